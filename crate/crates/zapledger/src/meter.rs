//! Gas metering: pricing resource traces under a chain profile, converting
//! gas to currency, and the comparative reports (per-token batch curves,
//! baseline-normalized reductions, node-hosting costs for gas-free chains).

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::account::AccountId;
use crate::ledger::{ResourceKind, ResourceTrace, TokenId};
use crate::profile::ChainProfile;
use crate::strategy::{OpReceipt, StrategyKind, StrategyLedger};
use crate::zap::{metadata_hash, EnergySource, GeoPoint, Zap};

/// Priced total of one trace with a per-kind breakdown.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GasReceipt {
    pub gas_units: u64,
    pub breakdown: BTreeMap<ResourceKind, u64>,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum MeterError {
    #[error("cannot price an empty trace")]
    EmptyTrace,
    #[error("baseline and candidate series disagree at index {0}")]
    MismatchedSeries(usize),
    #[error("operation requires a profile without gas pricing")]
    WrongProfile,
}

/// Price every event of a trace and aggregate gas per resource kind.
/// Pricing is the only path from events to gas, and it is linear:
/// concatenated traces price to the sum of their parts.
pub fn price_trace(
    trace: &ResourceTrace,
    profile: &ChainProfile,
) -> Result<GasReceipt, MeterError> {
    if trace.is_empty() {
        return Err(MeterError::EmptyTrace);
    }
    let mut breakdown = BTreeMap::new();
    let mut gas_units = 0u64;
    for event in &trace.events {
        let gas = profile.prices.price_event(*event);
        gas_units += gas;
        *breakdown.entry(event.kind).or_insert(0) += gas;
    }
    Ok(GasReceipt {
        gas_units,
        breakdown,
    })
}

/// Gas price tier.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Rate {
    Fast,
    Standard,
}

impl Rate {
    pub fn name(&self) -> &'static str {
        match self {
            Rate::Fast => "fast",
            Rate::Standard => "standard",
        }
    }

    pub fn parse(s: &str) -> Option<Rate> {
        match s {
            "fast" => Some(Rate::Fast),
            "standard" => Some(Rate::Standard),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct MoneyAmount {
    pub gwei: u64,
    pub usd_cents: u64,
}

impl MoneyAmount {
    pub const ZERO: MoneyAmount = MoneyAmount {
        gwei: 0,
        usd_cents: 0,
    };
}

/// Render integer cents as a dollars string, e.g. 2666 -> "26.66".
pub fn format_usd_cents(cents: u64) -> String {
    format!("{}.{:02}", cents / 100, cents % 100)
}

/// Convert gas units to Gwei and US cents. Gwei is exact; cents are
/// round-half-up at the final conversion only. Profiles without gas
/// pricing cost nothing.
pub fn gas_to_money(gas_units: u64, rate: Rate, profile: &ChainProfile) -> MoneyAmount {
    if !profile.gas_priced {
        return MoneyAmount::ZERO;
    }
    let per_gas = match rate {
        Rate::Fast => profile.gwei_per_gas_fast,
        Rate::Standard => profile.gwei_per_gas_standard,
    };
    let gwei = gas_units * per_gas;
    let usd_cents =
        ((gwei as u128 * profile.usd_per_eth_cents as u128 + 500_000_000) / 1_000_000_000) as u64;
    MoneyAmount { gwei, usd_cents }
}

/// Monthly hosting cost of running a gas-free chain: nodes x months at the
/// profile's flat node rate.
pub fn gasfree_cost(
    nodes: u64,
    months: u64,
    profile: &ChainProfile,
) -> Result<MoneyAmount, MeterError> {
    if profile.gas_priced {
        return Err(MeterError::WrongProfile);
    }
    let usd_cents = nodes * months * profile.node_monthly_usd_cents.unwrap_or(0);
    Ok(MoneyAmount { gwei: 0, usd_cents })
}

/// One row of a baseline-normalized comparison.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReductionRow {
    pub op_name: String,
    pub batch_size: u64,
    pub baseline_gas: u64,
    pub candidate_gas: u64,
    /// 1 - candidate/baseline.
    pub reduction: f64,
}

/// Per-op gas reduction of a candidate series against a baseline series.
/// Series must pair up by op name and batch size.
pub fn reduction_report(
    baseline: &[OpReceipt],
    candidate: &[OpReceipt],
) -> Result<Vec<ReductionRow>, MeterError> {
    if baseline.len() != candidate.len() {
        return Err(MeterError::MismatchedSeries(
            baseline.len().min(candidate.len()),
        ));
    }
    baseline
        .iter()
        .zip(candidate)
        .enumerate()
        .map(|(i, (b, c))| {
            if b.op_name != c.op_name || b.batch_size != c.batch_size {
                return Err(MeterError::MismatchedSeries(i));
            }
            Ok(ReductionRow {
                op_name: b.op_name.clone(),
                batch_size: b.batch_size,
                baseline_gas: b.gas_units,
                candidate_gas: c.gas_units,
                reduction: 1.0 - c.gas_units as f64 / b.gas_units as f64,
            })
        })
        .collect()
}

/// Benchmark operation driven at varying batch sizes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CurveOp {
    Mint,
    Transfer,
}

impl CurveOp {
    pub fn name(&self) -> &'static str {
        match self {
            CurveOp::Mint => "mint",
            CurveOp::Transfer => "transfer",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub n: u64,
    pub gas_units: u64,
}

impl CurvePoint {
    pub fn per_token(&self) -> f64 {
        self.gas_units as f64 / self.n as f64
    }
}

/// Deterministic benchmark fixture: the account that mints, the account
/// that receives transfers, and the locations stamped at mint and transfer
/// time.
pub const FIXTURE_SELLER: AccountId = AccountId::from_bytes([
    0x11, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0,
]);
pub const FIXTURE_BUYER: AccountId = AccountId::from_bytes([
    0x22, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0,
]);
pub const FIXTURE_MINT_LOCATION: GeoPoint = GeoPoint {
    lat_udeg: 43_653_200,
    lon_udeg: -79_383_200,
};
pub const FIXTURE_TRANSFER_LOCATION: GeoPoint = GeoPoint {
    lat_udeg: 43_651_100,
    lon_udeg: -79_347_000,
};

/// The benchmark Zap: 0.250 kWh generated in one five-minute window,
/// valued at 30 cents/kWh. `token_id` is the id the ledger assigned (0
/// while unminted).
pub fn fixture_zap(token_id: u64) -> Zap {
    let mut zap = Zap::new(
        7,
        1_600_000_000,
        250,
        EnergySource::Photovoltaic,
        FIXTURE_SELLER,
        FIXTURE_MINT_LOCATION,
        30,
    )
    .expect("fixture energy is positive");
    zap.token_id = TokenId::new(token_id);
    zap
}

/// Run one op at batch size `n` on a fresh fixture ledger and return its
/// receipt. Mints go to the fixture seller; transfers move every minted
/// token from seller to buyer in one batch.
pub fn fixture_batch_receipt(
    kind: StrategyKind,
    op: CurveOp,
    n: u64,
    profile: &ChainProfile,
) -> OpReceipt {
    let (mut ledger, _) = StrategyLedger::deploy(kind, profile.clone());
    let zaps: Vec<Zap> = (0..n).map(|_| fixture_zap(0)).collect();
    let (ids, mint_receipt) = ledger
        .mint_zaps(FIXTURE_SELLER, zaps)
        .expect("fixture mint is valid");
    match op {
        CurveOp::Mint => mint_receipt,
        CurveOp::Transfer => {
            let payload = (kind == StrategyKind::Lightweight).then(|| {
                ids.iter()
                    .map(|id| {
                        fixture_zap(id.value())
                            .canonical_bytes()
                            .expect("fixture serializes")
                    })
                    .collect::<Vec<_>>()
            });
            let (receipt, _) = ledger
                .transfer_zaps(
                    FIXTURE_SELLER,
                    FIXTURE_SELLER,
                    FIXTURE_BUYER,
                    &ids,
                    FIXTURE_TRANSFER_LOCATION,
                    payload.as_deref(),
                )
                .expect("fixture transfer is valid");
            receipt
        }
    }
}

/// Receipts for one of each operation the strategy performs in a
/// single-token flow.
#[derive(Debug, Clone)]
pub struct FixtureOps {
    pub deploy: OpReceipt,
    pub mint: OpReceipt,
    pub transfer: OpReceipt,
    /// Present only where a transfer leaves metadata stale and a follow-up
    /// write is required to correct it.
    pub modify: Option<OpReceipt>,
}

/// Deploy + single mint + single transfer (+ the modify call where the
/// strategy needs one to keep metadata truthful), all on one fresh ledger.
pub fn fixture_op_receipts(kind: StrategyKind, profile: &ChainProfile) -> FixtureOps {
    let (mut ledger, deploy) = StrategyLedger::deploy(kind, profile.clone());
    let (ids, mint) = ledger
        .mint_zaps(FIXTURE_SELLER, vec![fixture_zap(0)])
        .expect("fixture mint");
    let payload;
    let payloads: Option<&[Vec<u8>]> = if kind == StrategyKind::Lightweight {
        payload = vec![fixture_zap(ids[0].value())
            .canonical_bytes()
            .expect("fixture bytes")];
        Some(&payload)
    } else {
        None
    };
    let (transfer, _) = ledger
        .transfer_zaps(
            FIXTURE_SELLER,
            FIXTURE_SELLER,
            FIXTURE_BUYER,
            &ids,
            FIXTURE_TRANSFER_LOCATION,
            payloads,
        )
        .expect("fixture transfer");
    let modify = (kind == StrategyKind::Featherweight).then(|| {
        let mut moved = fixture_zap(ids[0].value());
        moved.append_history(FIXTURE_BUYER, FIXTURE_TRANSFER_LOCATION);
        let digest = metadata_hash(&moved.canonical_bytes().expect("fixture bytes"));
        ledger
            .fw_modify_zap(FIXTURE_BUYER, ids[0], digest)
            .expect("fixture modify")
    });
    FixtureOps {
        deploy,
        mint,
        transfer,
        modify,
    }
}

/// Batch-size sweep: total gas of the op at each n in 1..=n_max, each run
/// on a fresh fixture ledger.
pub fn per_token_curve(
    kind: StrategyKind,
    op: CurveOp,
    n_max: u64,
    profile: &ChainProfile,
) -> Vec<CurvePoint> {
    (1..=n_max)
        .map(|n| CurvePoint {
            n,
            gas_units: fixture_batch_receipt(kind, op, n, profile).gas_units,
        })
        .collect()
}
