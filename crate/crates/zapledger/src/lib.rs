//! Semi-fungible energy-token ledger with pluggable metadata storage and a
//! resource-based gas meter.
//!
//! One produced energy window becomes one Zap token: balances live in an
//! ERC-1155-style ledger, metadata lives wherever the chosen storage
//! strategy puts it (full on-chain struct, or off-chain JSON pinned by an
//! on-chain digest). Every operation yields a resource trace a chain
//! profile can turn into gas and money, which drives the benchmark CLI and
//! the neighborhood market simulator.

pub mod account;
pub mod ledger;
pub mod market;
pub mod meter;
pub mod profile;
pub mod strategy;
pub mod zap;

pub use account::{AccountId, UTILITY_ACCOUNT};
pub use ledger::{LedgerError, LedgerState, ResourceEvent, ResourceKind, ResourceTrace, TokenId};
pub use market::{
    consume_step, run, schedule_feasibility, settle_cycle, statements_csv, viability_report,
    BillingStatement, ConsumeOutcome, CycleTotals, EventBody, FeasibilityRow, GridScenario,
    Holding, Household, MarketError, ReceiptRecord, ScenarioError, SimEvent, SimResult, SIM_EPOCH,
};
pub use meter::{
    fixture_op_receipts, gas_to_money, gasfree_cost, per_token_curve, price_trace,
    reduction_report, CurveOp, CurvePoint, FixtureOps, GasReceipt, MeterError, MoneyAmount, Rate,
};
pub use profile::{Calibration, ChainProfile, LatencyModel, LinearCost, PriceTable, ProfileError};
pub use strategy::{MetadataStore, OpReceipt, StrategyError, StrategyKind, StrategyLedger};
pub use zap::{metadata_hash, EnergySource, GeoPoint, MetadataHash, Zap, ZapError};
