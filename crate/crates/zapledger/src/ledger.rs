//! ERC-1155-style balance bookkeeping shared by all storage strategies.
//!
//! Every state mutation emits a [`ResourceTrace`]: the ordered raw resource
//! events (storage writes, payload memory, the per-transaction base) that the
//! gas meter later prices. The ledger itself never prices anything.
//!
//! Mutations are applied serially; failed batches leave the state untouched.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::account::AccountId;

/// Sequential token identifier, assigned from 1 at mint time. 0 is never a
/// valid token.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct TokenId(u64);

impl TokenId {
    /// Placeholder for a Zap that has not been minted yet.
    pub const UNASSIGNED: TokenId = TokenId(0);

    pub fn new(id: u64) -> Self {
        TokenId(id)
    }

    pub fn value(&self) -> u64 {
        self.0
    }
}

impl std::fmt::Display for TokenId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        self.0.fmt(f)
    }
}

/// One raw resource event. `count` units of the given kind; counts are
/// always positive.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ResourceEvent {
    pub kind: ResourceKind,
    pub count: u64,
}

/// The resource classes an operation can consume. Storage events count
/// slots; `HashWords`, `MemoryWords` count 32-byte words; calldata and code
/// count bytes; `ExecBase` counts pre-priced gas units from calibration.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ResourceKind {
    TxBase,
    ExecBase,
    StorageWriteNew,
    StorageWriteUpdate,
    StorageRead,
    HashWords,
    CalldataBytes,
    MemoryWords,
    DeployBase,
    DeployCodeBytes,
}

/// Ordered resource events of one operation.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ResourceTrace {
    pub events: Vec<ResourceEvent>,
}

impl ResourceTrace {
    pub fn new() -> Self {
        ResourceTrace { events: Vec::new() }
    }

    /// Record `count` units of `kind`. Zero counts are dropped so traces
    /// only ever hold positive events.
    pub fn push(&mut self, kind: ResourceKind, count: u64) {
        if count > 0 {
            self.events.push(ResourceEvent { kind, count });
        }
    }

    pub fn extend(&mut self, other: &ResourceTrace) {
        self.events.extend_from_slice(&other.events);
    }

    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }
}

/// Words of call payload the ledger touches for a transfer batch of `n`:
/// recipient/sender/selector scaffolding plus one id word and one amount
/// word per token.
pub fn transfer_payload_words(n: u64) -> u64 {
    8 + 2 * n
}

/// Words of call payload for a mint batch of `n`.
pub fn mint_payload_words(n: u64) -> u64 {
    6 + n
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum LedgerError {
    #[error("an account cannot change its own operator approval for itself")]
    SelfApproval,
    #[error("ids and amounts differ in length ({ids} vs {amounts})")]
    LengthMismatch { ids: usize, amounts: usize },
    #[error("batch must contain at least one token")]
    EmptyBatch,
    #[error("operator {operator} is not authorized to move tokens of {from}")]
    NotAuthorized {
        operator: AccountId,
        from: AccountId,
    },
    #[error("insufficient balance of token {0}")]
    InsufficientBalance(TokenId),
}

/// Balance bookkeeping state: account/token balances, operator approvals and
/// the mint cursor. Metadata lives with the owning strategy, not here.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct LedgerState {
    balances: BTreeMap<(AccountId, TokenId), u64>,
    operator_approvals: BTreeSet<(AccountId, AccountId)>,
    next_token_id: u64,
}

impl LedgerState {
    pub fn new() -> Self {
        LedgerState {
            balances: BTreeMap::new(),
            operator_approvals: BTreeSet::new(),
            next_token_id: 1,
        }
    }

    pub fn balance_of(&self, account: AccountId, token: TokenId) -> u64 {
        self.balances.get(&(account, token)).copied().unwrap_or(0)
    }

    /// Like [`LedgerState::balance_of`] but records the storage read on the
    /// given trace.
    pub fn balance_of_metered(
        &self,
        account: AccountId,
        token: TokenId,
        trace: &mut ResourceTrace,
    ) -> u64 {
        trace.push(ResourceKind::StorageRead, 1);
        self.balance_of(account, token)
    }

    pub fn is_approved_for_all(&self, owner: AccountId, operator: AccountId) -> bool {
        self.operator_approvals.contains(&(owner, operator))
    }

    /// Token ids minted so far are exactly `1..next_token_id`.
    pub fn next_token_id(&self) -> TokenId {
        TokenId(self.next_token_id)
    }

    /// Total supply of a token across all accounts.
    pub fn total_supply(&self, token: TokenId) -> u64 {
        self.balances
            .iter()
            .filter(|((_, t), _)| *t == token)
            .map(|(_, amount)| amount)
            .sum()
    }

    /// All `(token, amount)` pairs held by `account` with amount > 0.
    pub fn holdings(&self, account: AccountId) -> Vec<(TokenId, u64)> {
        self.balances
            .range((account, TokenId(0))..=(account, TokenId(u64::MAX)))
            .filter(|(_, amount)| **amount > 0)
            .map(|((_, token), amount)| (*token, *amount))
            .collect()
    }

    pub fn set_approval_for_all(
        &mut self,
        owner: AccountId,
        operator: AccountId,
        approved: bool,
    ) -> Result<(), LedgerError> {
        if owner == operator {
            return Err(LedgerError::SelfApproval);
        }
        if approved {
            self.operator_approvals.insert((owner, operator));
        } else {
            self.operator_approvals.remove(&(owner, operator));
        }
        Ok(())
    }

    /// Move `amounts[k]` of `ids[k]` from `from` to `to`, all-or-nothing.
    ///
    /// The trace records one `TxBase`, then per token one debit
    /// (`StorageWriteUpdate`) and one credit (`StorageWriteNew` when the
    /// recipient slot did not exist, `StorageWriteUpdate` otherwise), then
    /// the payload memory words. On any error the state is unchanged.
    pub fn transfer_balances(
        &mut self,
        operator: AccountId,
        from: AccountId,
        to: AccountId,
        ids: &[TokenId],
        amounts: &[u64],
    ) -> Result<ResourceTrace, LedgerError> {
        if ids.is_empty() {
            return Err(LedgerError::EmptyBatch);
        }
        if ids.len() != amounts.len() {
            return Err(LedgerError::LengthMismatch {
                ids: ids.len(),
                amounts: amounts.len(),
            });
        }
        if operator != from && !self.is_approved_for_all(from, operator) {
            return Err(LedgerError::NotAuthorized { operator, from });
        }
        // Validate the whole batch before touching state. Duplicate ids
        // debit cumulatively, so sum per id first.
        let mut debits: BTreeMap<TokenId, u64> = BTreeMap::new();
        for (id, amount) in ids.iter().zip(amounts) {
            *debits.entry(*id).or_insert(0) += amount;
        }
        for (id, needed) in &debits {
            if self.balance_of(from, *id) < *needed {
                return Err(LedgerError::InsufficientBalance(*id));
            }
        }

        let mut trace = ResourceTrace::new();
        trace.push(ResourceKind::TxBase, 1);
        for (id, amount) in ids.iter().zip(amounts) {
            let from_slot = self.balances.entry((from, *id)).or_insert(0);
            *from_slot -= amount;
            trace.push(ResourceKind::StorageWriteUpdate, 1);

            let credit_kind = if self.balances.contains_key(&(to, *id)) {
                ResourceKind::StorageWriteUpdate
            } else {
                ResourceKind::StorageWriteNew
            };
            *self.balances.entry((to, *id)).or_insert(0) += amount;
            trace.push(credit_kind, 1);
        }
        trace.push(
            ResourceKind::MemoryWords,
            transfer_payload_words(ids.len() as u64),
        );
        Ok(trace)
    }

    /// Mint `count` fresh sequential tokens, each with balance 1 at `to`.
    pub fn mint_balances(
        &mut self,
        to: AccountId,
        count: u64,
    ) -> Result<(Vec<TokenId>, ResourceTrace), LedgerError> {
        if count == 0 {
            return Err(LedgerError::EmptyBatch);
        }
        let mut trace = ResourceTrace::new();
        trace.push(ResourceKind::TxBase, 1);
        let mut ids = Vec::with_capacity(count as usize);
        for _ in 0..count {
            let id = TokenId(self.next_token_id);
            self.next_token_id += 1;
            self.balances.insert((to, id), 1);
            trace.push(ResourceKind::StorageWriteNew, 1);
            ids.push(id);
        }
        trace.push(ResourceKind::MemoryWords, mint_payload_words(count));
        Ok((ids, trace))
    }
}
