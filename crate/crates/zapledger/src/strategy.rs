//! The three metadata-storage strategies layered over the balance ledger.
//!
//! Heavyweight keeps every Zap record on-chain and rewrites it on transfer.
//! Featherweight and lightweight keep only the 32-byte digest on-chain;
//! featherweight leaves metadata updates to the holder (a separate modify
//! call), lightweight verifies, parses, and mutates the caller-supplied
//! payload inside the transfer itself. A gas-free deployment is the
//! lightweight strategy priced under the gas-free chain profile, not a
//! fourth code path.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::account::AccountId;
use crate::ledger::{LedgerError, LedgerState, ResourceKind, ResourceTrace, TokenId};
use crate::meter::{price_trace, GasReceipt};
use crate::profile::ChainProfile;
use crate::zap::{metadata_hash, GeoPoint, MetadataHash, Zap, ZapError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StrategyKind {
    Heavyweight,
    Featherweight,
    Lightweight,
}

impl StrategyKind {
    pub const ALL: [StrategyKind; 3] = [
        StrategyKind::Heavyweight,
        StrategyKind::Featherweight,
        StrategyKind::Lightweight,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            StrategyKind::Heavyweight => "heavyweight",
            StrategyKind::Featherweight => "featherweight",
            StrategyKind::Lightweight => "lightweight",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Some(match s {
            "heavyweight" => StrategyKind::Heavyweight,
            "featherweight" => StrategyKind::Featherweight,
            "lightweight" => StrategyKind::Lightweight,
            _ => return None,
        })
    }
}

impl std::fmt::Display for StrategyKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// Where metadata lives: the full record on-chain, or only its digest.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum MetadataStore {
    Full(BTreeMap<TokenId, Zap>),
    Hashed(BTreeMap<TokenId, MetadataHash>),
}

/// Priced record of one executed operation.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OpReceipt {
    pub op_name: String,
    pub strategy: StrategyKind,
    pub batch_size: u64,
    pub gas_units: u64,
    /// Gas per resource kind; sums to gas_units.
    pub breakdown: BTreeMap<ResourceKind, u64>,
}

#[derive(Debug, Error)]
pub enum StrategyError {
    #[error(transparent)]
    Ledger(#[from] LedgerError),
    #[error(transparent)]
    Metadata(#[from] ZapError),
    #[error("payload hash does not match the stored digest of token {0}")]
    HashMismatch(TokenId),
    #[error("this strategy does not take a metadata payload")]
    UnexpectedPayload,
    #[error("this strategy requires a metadata payload per token")]
    MissingPayload,
    #[error("caller does not hold token {0}")]
    NotOwner(TokenId),
    #[error("unknown token {0}")]
    UnknownToken(TokenId),
    #[error("operation not available under the {0} strategy")]
    WrongStrategy(StrategyKind),
}

/// Canonical metadata bytes for a batch, one entry per token.
pub type PayloadSet = Vec<Vec<u8>>;

/// A deployed ledger instance: balance state plus the strategy's metadata
/// store, pricing every operation under its chain profile.
#[derive(Debug, Clone)]
pub struct StrategyLedger {
    kind: StrategyKind,
    profile: ChainProfile,
    state: LedgerState,
    store: MetadataStore,
}

impl StrategyLedger {
    /// Deploy a fresh ledger contract. The receipt covers the transaction
    /// base, the deployment surcharge, the strategy's code size, and its
    /// constructor execution.
    pub fn deploy(kind: StrategyKind, profile: ChainProfile) -> (StrategyLedger, OpReceipt) {
        let calib = profile.calibration.for_kind(kind);
        let mut trace = ResourceTrace::new();
        trace.push(ResourceKind::TxBase, 1);
        trace.push(ResourceKind::DeployBase, 1);
        trace.push(ResourceKind::DeployCodeBytes, calib.code_bytes);
        trace.push(ResourceKind::ExecBase, calib.deploy_exec);
        let receipt = receipt_for("deploy", kind, 1, &trace, &profile);
        let store = match kind {
            StrategyKind::Heavyweight => MetadataStore::Full(BTreeMap::new()),
            _ => MetadataStore::Hashed(BTreeMap::new()),
        };
        let ledger = StrategyLedger {
            kind,
            profile,
            state: LedgerState::new(),
            store,
        };
        (ledger, receipt)
    }

    pub fn kind(&self) -> StrategyKind {
        self.kind
    }

    pub fn profile(&self) -> &ChainProfile {
        &self.profile
    }

    pub fn state(&self) -> &LedgerState {
        &self.state
    }

    pub fn balance_of(&self, account: AccountId, token: TokenId) -> u64 {
        self.state.balance_of(account, token)
    }

    pub fn set_approval_for_all(
        &mut self,
        owner: AccountId,
        operator: AccountId,
        approved: bool,
    ) -> Result<(), StrategyError> {
        Ok(self.state.set_approval_for_all(owner, operator, approved)?)
    }

    /// Mint one token per Zap to `to`. Ids are assigned sequentially and
    /// written into the records; hashed stores digest the canonical bytes
    /// (the caller keeps the bytes off-chain), the full store keeps the
    /// records themselves.
    pub fn mint_zaps(
        &mut self,
        to: AccountId,
        zaps: Vec<Zap>,
    ) -> Result<(Vec<TokenId>, OpReceipt), StrategyError> {
        for zap in &zaps {
            zap.check_invariants()?;
        }
        let n = zaps.len() as u64;
        let (ids, mut trace) = self.state.mint_balances(to, n)?;
        for (mut zap, id) in zaps.into_iter().zip(ids.iter()) {
            zap.token_id = *id;
            match &mut self.store {
                MetadataStore::Full(records) => {
                    trace.push(
                        ResourceKind::StorageWriteNew,
                        self.profile.calibration.heavyweight_struct_words,
                    );
                    records.insert(*id, zap);
                }
                MetadataStore::Hashed(digests) => {
                    let bytes = zap.canonical_bytes()?;
                    trace.push(ResourceKind::CalldataBytes, bytes.len() as u64);
                    trace.push(ResourceKind::HashWords, word_count(&bytes));
                    trace.push(ResourceKind::StorageWriteNew, 1);
                    digests.insert(*id, metadata_hash(&bytes));
                }
            }
        }
        if self.kind == StrategyKind::Heavyweight {
            trace.push(
                ResourceKind::MemoryWords,
                self.profile.calibration.heavyweight_struct_words * n,
            );
        }
        let calib = self.profile.calibration.for_kind(self.kind);
        trace.push(ResourceKind::ExecBase, calib.mint_exec.at(n));
        Ok((
            ids,
            receipt_for("mint", self.kind, n, &trace, &self.profile),
        ))
    }

    /// Move a batch of tokens and keep metadata consistent per strategy.
    ///
    /// Heavyweight appends to the stored records in place. Featherweight
    /// moves balances only; holders update digests via
    /// [`StrategyLedger::fw_modify_zap`]. Lightweight requires the current
    /// canonical bytes per token, verifies them against the stored digests,
    /// applies the history append, stores the new digests, and returns the
    /// updated bytes. Any failure leaves the ledger untouched.
    pub fn transfer_zaps(
        &mut self,
        operator: AccountId,
        from: AccountId,
        to: AccountId,
        ids: &[TokenId],
        new_location: GeoPoint,
        payload: Option<&[Vec<u8>]>,
    ) -> Result<(OpReceipt, Option<PayloadSet>), StrategyError> {
        let n = ids.len() as u64;
        match (self.kind, payload) {
            (StrategyKind::Lightweight, None) => return Err(StrategyError::MissingPayload),
            (StrategyKind::Lightweight, Some(p)) if p.len() != ids.len() => {
                return Err(StrategyError::MissingPayload)
            }
            (StrategyKind::Heavyweight | StrategyKind::Featherweight, Some(_)) => {
                return Err(StrategyError::UnexpectedPayload)
            }
            _ => {}
        }

        // Lightweight verifies every payload against the stored digest
        // before any state changes so a mismatch aborts the whole batch.
        if let (MetadataStore::Hashed(digests), Some(payloads)) = (&self.store, payload) {
            for (id, bytes) in ids.iter().zip(payloads) {
                if let Some(stored) = digests.get(id) {
                    if metadata_hash(bytes) != *stored {
                        return Err(StrategyError::HashMismatch(*id));
                    }
                }
            }
        }

        let amounts = vec![1u64; ids.len()];
        let mut trace = self
            .state
            .transfer_balances(operator, from, to, ids, &amounts)?;

        let mut updated = None;
        match (&mut self.store, self.kind) {
            (MetadataStore::Full(records), _) => {
                for id in ids {
                    let record = records
                        .get_mut(id)
                        .unwrap_or_else(|| unreachable!("minted token {id} has a record"));
                    let growing = record.owner_history.len() < crate::zap::HISTORY_CAP;
                    record.append_history(to, new_location);
                    if growing {
                        // New history slots plus the cursor word.
                        trace.push(ResourceKind::StorageWriteNew, 2);
                        trace.push(ResourceKind::StorageWriteUpdate, 1);
                    } else {
                        // Ring overwrite: two slots plus the cursor word.
                        trace.push(ResourceKind::StorageWriteUpdate, 3);
                    }
                }
                let mem = self.profile.calibration.heavyweight_transfer_mem_words;
                trace.push(ResourceKind::MemoryWords, mem.at(n));
            }
            (MetadataStore::Hashed(digests), StrategyKind::Lightweight) => {
                let payloads = payload.expect("payload presence checked above");
                let mut new_bytes = Vec::with_capacity(ids.len());
                for (id, bytes) in ids.iter().zip(payloads) {
                    trace.push(ResourceKind::StorageRead, 1);
                    trace.push(ResourceKind::CalldataBytes, bytes.len() as u64);
                    trace.push(ResourceKind::HashWords, word_count(bytes));
                    let mut zap = Zap::from_canonical_bytes(bytes)?;
                    zap.append_history(to, new_location);
                    let out = zap.canonical_bytes()?;
                    trace.push(ResourceKind::HashWords, word_count(&out));
                    trace.push(ResourceKind::StorageWriteUpdate, 1);
                    digests.insert(*id, metadata_hash(&out));
                    new_bytes.push(out);
                }
                updated = Some(new_bytes);
            }
            (MetadataStore::Hashed(_), _) => {}
        }

        let calib = self.profile.calibration.for_kind(self.kind);
        trace.push(ResourceKind::ExecBase, calib.transfer_exec.at(n));
        let receipt = receipt_for("transfer", self.kind, n, &trace, &self.profile);
        Ok((receipt, updated))
    }

    /// Featherweight-only: the holder replaces a token's stored digest
    /// after maintaining the metadata off-chain. The preimage is not
    /// validated; correctness is the holder's responsibility.
    pub fn fw_modify_zap(
        &mut self,
        caller: AccountId,
        id: TokenId,
        new_hash: MetadataHash,
    ) -> Result<OpReceipt, StrategyError> {
        if self.kind != StrategyKind::Featherweight {
            return Err(StrategyError::WrongStrategy(self.kind));
        }
        if self.state.balance_of(caller, id) == 0 {
            return Err(StrategyError::NotOwner(id));
        }
        let MetadataStore::Hashed(digests) = &mut self.store else {
            unreachable!("featherweight always uses a hashed store");
        };
        if !digests.contains_key(&id) {
            return Err(StrategyError::UnknownToken(id));
        }
        digests.insert(id, new_hash);
        let mut trace = ResourceTrace::new();
        trace.push(ResourceKind::TxBase, 1);
        trace.push(ResourceKind::StorageWriteUpdate, 1);
        let calib = self.profile.calibration.for_kind(self.kind);
        let modify = calib.modify_exec.expect("featherweight calibrates modify");
        trace.push(ResourceKind::ExecBase, modify.fixed);
        Ok(receipt_for("modify", self.kind, 1, &trace, &self.profile))
    }

    /// Read a token's record: straight from the full store, or by
    /// verifying and parsing caller-supplied bytes for hashed stores.
    pub fn read_zap(&self, id: TokenId, payload: Option<&[u8]>) -> Result<Zap, StrategyError> {
        match &self.store {
            MetadataStore::Full(records) => records
                .get(&id)
                .cloned()
                .ok_or(StrategyError::UnknownToken(id)),
            MetadataStore::Hashed(digests) => {
                let stored = digests.get(&id).ok_or(StrategyError::UnknownToken(id))?;
                let bytes = payload.ok_or(StrategyError::MissingPayload)?;
                if metadata_hash(bytes) != *stored {
                    return Err(StrategyError::HashMismatch(id));
                }
                Ok(Zap::from_canonical_bytes(bytes)?)
            }
        }
    }

    /// Stored digest of a token, when the store is hashed.
    pub fn stored_digest(&self, id: TokenId) -> Option<MetadataHash> {
        match &self.store {
            MetadataStore::Hashed(digests) => digests.get(&id).copied(),
            MetadataStore::Full(_) => None,
        }
    }
}

fn word_count(bytes: &[u8]) -> u64 {
    (bytes.len() as u64).div_ceil(32)
}

fn receipt_for(
    op_name: &str,
    kind: StrategyKind,
    batch_size: u64,
    trace: &ResourceTrace,
    profile: &ChainProfile,
) -> OpReceipt {
    let GasReceipt {
        gas_units,
        breakdown,
    } = price_trace(trace, profile).expect("operation traces are never empty");
    OpReceipt {
        op_name: op_name.to_string(),
        strategy: kind,
        batch_size,
        gas_units,
        breakdown,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::meter::{fixture_zap, FIXTURE_BUYER, FIXTURE_SELLER, FIXTURE_TRANSFER_LOCATION};

    fn fresh(kind: StrategyKind) -> StrategyLedger {
        StrategyLedger::deploy(kind, ChainProfile::ethereum()).0
    }

    fn unminted(n: u64) -> Vec<Zap> {
        (0..n).map(|_| fixture_zap(0)).collect()
    }

    #[test]
    fn deploy_gas_matches_calibration() {
        let profile = ChainProfile::ethereum();
        let (_, fw) = StrategyLedger::deploy(StrategyKind::Featherweight, profile.clone());
        let (_, lw) = StrategyLedger::deploy(StrategyKind::Lightweight, profile.clone());
        assert_eq!(fw.gas_units, 3_702_977);
        assert_eq!(lw.gas_units, 4_592_780);
    }

    #[test]
    fn single_op_gas_matches_calibration() {
        for (kind, mint_gas, transfer_gas) in [
            (StrategyKind::Featherweight, 158_483, 71_456),
            (StrategyKind::Lightweight, 165_052, 169_077),
        ] {
            let mut ledger = fresh(kind);
            let (ids, mint) = ledger.mint_zaps(FIXTURE_SELLER, unminted(1)).unwrap();
            assert_eq!(mint.gas_units, mint_gas, "{kind} mint");

            let payload = (kind == StrategyKind::Lightweight)
                .then(|| vec![fixture_zap(ids[0].value()).canonical_bytes().unwrap()]);
            let (transfer, _) = ledger
                .transfer_zaps(
                    FIXTURE_SELLER,
                    FIXTURE_SELLER,
                    FIXTURE_BUYER,
                    &ids,
                    FIXTURE_TRANSFER_LOCATION,
                    payload.as_deref(),
                )
                .unwrap();
            assert_eq!(transfer.gas_units, transfer_gas, "{kind} transfer");
        }
    }

    #[test]
    fn receipts_sum_their_breakdown() {
        let mut ledger = fresh(StrategyKind::Heavyweight);
        let (ids, mint) = ledger.mint_zaps(FIXTURE_SELLER, unminted(3)).unwrap();
        let (transfer, _) = ledger
            .transfer_zaps(
                FIXTURE_SELLER,
                FIXTURE_SELLER,
                FIXTURE_BUYER,
                &ids,
                FIXTURE_TRANSFER_LOCATION,
                None,
            )
            .unwrap();
        for receipt in [mint, transfer] {
            assert_eq!(receipt.gas_units, receipt.breakdown.values().sum::<u64>());
        }
    }

    #[test]
    fn heavyweight_transfer_appends_stored_history() {
        let mut ledger = fresh(StrategyKind::Heavyweight);
        let (ids, _) = ledger.mint_zaps(FIXTURE_SELLER, unminted(1)).unwrap();
        ledger
            .transfer_zaps(
                FIXTURE_SELLER,
                FIXTURE_SELLER,
                FIXTURE_BUYER,
                &ids,
                FIXTURE_TRANSFER_LOCATION,
                None,
            )
            .unwrap();
        let zap = ledger.read_zap(ids[0], None).unwrap();
        assert_eq!(zap.owner_history, vec![FIXTURE_SELLER, FIXTURE_BUYER]);
        assert_eq!(zap.location_history.len(), 2);
        assert_eq!(ledger.balance_of(FIXTURE_BUYER, ids[0]), 1);
    }

    #[test]
    fn lightweight_round_trips_payload() {
        let mut ledger = fresh(StrategyKind::Lightweight);
        let (ids, _) = ledger.mint_zaps(FIXTURE_SELLER, unminted(1)).unwrap();
        let bytes = fixture_zap(ids[0].value()).canonical_bytes().unwrap();
        let (_, updated) = ledger
            .transfer_zaps(
                FIXTURE_SELLER,
                FIXTURE_SELLER,
                FIXTURE_BUYER,
                &ids,
                FIXTURE_TRANSFER_LOCATION,
                Some(&[bytes]),
            )
            .unwrap();
        let updated = updated.unwrap();
        let zap = ledger.read_zap(ids[0], Some(&updated[0])).unwrap();
        assert_eq!(zap.current_owner(), FIXTURE_BUYER);
        assert_eq!(zap.owner_history.len(), 2);
    }

    #[test]
    fn lightweight_stale_payload_aborts_whole_batch() {
        let mut ledger = fresh(StrategyKind::Lightweight);
        let (ids, _) = ledger.mint_zaps(FIXTURE_SELLER, unminted(2)).unwrap();
        let good = fixture_zap(ids[0].value()).canonical_bytes().unwrap();
        let mut stale = fixture_zap(ids[1].value()).canonical_bytes().unwrap();
        let flip = stale.len() - 3;
        stale[flip] ^= 1;
        let err = ledger
            .transfer_zaps(
                FIXTURE_SELLER,
                FIXTURE_SELLER,
                FIXTURE_BUYER,
                &ids,
                FIXTURE_TRANSFER_LOCATION,
                Some(&[good, stale]),
            )
            .unwrap_err();
        assert!(matches!(err, StrategyError::HashMismatch(id) if id == ids[1]));
        assert_eq!(ledger.balance_of(FIXTURE_SELLER, ids[0]), 1);
        assert_eq!(ledger.balance_of(FIXTURE_SELLER, ids[1]), 1);
    }

    #[test]
    fn payload_rules_per_strategy() {
        let mut hw = fresh(StrategyKind::Heavyweight);
        let (ids, _) = hw.mint_zaps(FIXTURE_SELLER, unminted(1)).unwrap();
        let err = hw
            .transfer_zaps(
                FIXTURE_SELLER,
                FIXTURE_SELLER,
                FIXTURE_BUYER,
                &ids,
                FIXTURE_TRANSFER_LOCATION,
                Some(&[vec![1, 2, 3]]),
            )
            .unwrap_err();
        assert!(matches!(err, StrategyError::UnexpectedPayload));

        let mut lw = fresh(StrategyKind::Lightweight);
        let (ids, _) = lw.mint_zaps(FIXTURE_SELLER, unminted(1)).unwrap();
        let err = lw
            .transfer_zaps(
                FIXTURE_SELLER,
                FIXTURE_SELLER,
                FIXTURE_BUYER,
                &ids,
                FIXTURE_TRANSFER_LOCATION,
                None,
            )
            .unwrap_err();
        assert!(matches!(err, StrategyError::MissingPayload));
    }

    #[test]
    fn modify_updates_digest_for_holder_only() {
        let mut ledger = fresh(StrategyKind::Featherweight);
        let (ids, _) = ledger.mint_zaps(FIXTURE_SELLER, unminted(1)).unwrap();
        ledger
            .transfer_zaps(
                FIXTURE_SELLER,
                FIXTURE_SELLER,
                FIXTURE_BUYER,
                &ids,
                FIXTURE_TRANSFER_LOCATION,
                None,
            )
            .unwrap();

        let mut zap = fixture_zap(ids[0].value());
        zap.append_history(FIXTURE_BUYER, FIXTURE_TRANSFER_LOCATION);
        let new_bytes = zap.canonical_bytes().unwrap();
        let new_hash = metadata_hash(&new_bytes);

        let err = ledger
            .fw_modify_zap(FIXTURE_SELLER, ids[0], new_hash)
            .unwrap_err();
        assert!(matches!(err, StrategyError::NotOwner(_)));

        let receipt = ledger
            .fw_modify_zap(FIXTURE_BUYER, ids[0], new_hash)
            .unwrap();
        assert_eq!(receipt.gas_units, 28_500);
        assert_eq!(receipt.breakdown.len(), 3);
        assert_eq!(ledger.stored_digest(ids[0]), Some(new_hash));
        let read = ledger.read_zap(ids[0], Some(&new_bytes)).unwrap();
        assert_eq!(read, zap);
    }

    #[test]
    fn modify_rejected_outside_featherweight() {
        let mut ledger = fresh(StrategyKind::Lightweight);
        let (ids, _) = ledger.mint_zaps(FIXTURE_SELLER, unminted(1)).unwrap();
        let err = ledger
            .fw_modify_zap(FIXTURE_SELLER, ids[0], metadata_hash(b"x"))
            .unwrap_err();
        assert!(matches!(err, StrategyError::WrongStrategy(_)));
    }

    #[test]
    fn read_zap_detects_tampered_value() {
        let mut ledger = fresh(StrategyKind::Lightweight);
        let (ids, _) = ledger.mint_zaps(FIXTURE_SELLER, unminted(1)).unwrap();
        let mut zap = fixture_zap(ids[0].value());
        zap.value_usd_cents += 1;
        let tampered = zap.canonical_bytes().unwrap();
        let err = ledger.read_zap(ids[0], Some(&tampered)).unwrap_err();
        assert!(matches!(err, StrategyError::HashMismatch(_)));
    }
}
