//! Chain profiles: resource price tables, currency rates, confirmation
//! latency, and the per-strategy calibration constants.
//!
//! Prices follow the familiar EVM cost structure (21k transaction base, 20k
//! per fresh storage word, quadratic memory expansion). Exec constants and
//! code sizes were tuned once against reference measurements and are frozen
//! here; the two shipped profiles price identically so gas units are
//! comparable, differing only in currency, latency, and hosting model.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ledger::{ResourceEvent, ResourceKind};
use crate::strategy::StrategyKind;

/// Gas price per resource event. Hash and memory events are priced per
/// event: hash pays a base plus a per-word rate, memory pays a linear rate
/// plus `words * words / memory_quad_divisor`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PriceTable {
    pub tx_base: u64,
    pub exec_unit: u64,
    pub storage_write_new: u64,
    pub storage_write_update: u64,
    pub storage_read: u64,
    pub hash_base: u64,
    pub hash_per_word: u64,
    pub calldata_per_byte: u64,
    pub memory_per_word: u64,
    pub memory_quad_divisor: u64,
    pub deploy_base: u64,
    pub deploy_code_per_byte: u64,
}

impl PriceTable {
    pub fn price_event(&self, event: ResourceEvent) -> u64 {
        let n = event.count;
        match event.kind {
            ResourceKind::TxBase => n * self.tx_base,
            ResourceKind::ExecBase => n * self.exec_unit,
            ResourceKind::StorageWriteNew => n * self.storage_write_new,
            ResourceKind::StorageWriteUpdate => n * self.storage_write_update,
            ResourceKind::StorageRead => n * self.storage_read,
            ResourceKind::HashWords => self.hash_base + n * self.hash_per_word,
            ResourceKind::CalldataBytes => n * self.calldata_per_byte,
            ResourceKind::MemoryWords => {
                n * self.memory_per_word + n * n / self.memory_quad_divisor
            }
            ResourceKind::DeployBase => n * self.deploy_base,
            ResourceKind::DeployCodeBytes => n * self.deploy_code_per_byte,
        }
    }
}

/// A cost with a fixed part and a per-token part: `fixed + per_token * n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct LinearCost {
    pub fixed: u64,
    pub per_token: u64,
}

impl LinearCost {
    pub fn at(&self, n: u64) -> u64 {
        self.fixed + self.per_token * n
    }
}

/// Tuned constants for one strategy: contract code size, constructor
/// execution, and the execution gas of each operation.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StrategyCalibration {
    pub code_bytes: u64,
    pub deploy_exec: u64,
    pub mint_exec: LinearCost,
    pub transfer_exec: LinearCost,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub modify_exec: Option<LinearCost>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Calibration {
    pub heavyweight: StrategyCalibration,
    pub featherweight: StrategyCalibration,
    pub lightweight: StrategyCalibration,
    /// Storage words one full metadata record occupies on-chain.
    pub heavyweight_struct_words: u64,
    /// Working memory (words) a heavyweight transfer touches while
    /// rewriting records; the quadratic memory term makes large batches
    /// progressively more expensive.
    pub heavyweight_transfer_mem_words: LinearCost,
}

impl Calibration {
    pub fn for_kind(&self, kind: StrategyKind) -> &StrategyCalibration {
        match kind {
            StrategyKind::Heavyweight => &self.heavyweight,
            StrategyKind::Featherweight => &self.featherweight,
            StrategyKind::Lightweight => &self.lightweight,
        }
    }
}

/// Confirmation latency model: uniform over [lo, hi] seconds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LatencyModel {
    pub uniform_seconds: [f64; 2],
}

impl LatencyModel {
    pub fn sample(&self, rng: &mut impl rand::RngCore) -> f64 {
        let [lo, hi] = self.uniform_seconds;
        lo + (hi - lo) * rand::Rng::gen::<f64>(rng)
    }

    pub fn max_seconds(&self) -> f64 {
        self.uniform_seconds[1]
    }
}

#[derive(Debug, Error)]
pub enum ProfileError {
    #[error("profile document malformed: {0}")]
    Malformed(#[from] serde_json::Error),
    #[error("latency bounds must satisfy 0 <= lo <= hi")]
    BadLatency,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChainProfile {
    pub name: String,
    /// When false, operations still consume gas units but cost no currency;
    /// running the chain is paid for per node instead.
    pub gas_priced: bool,
    pub prices: PriceTable,
    pub gwei_per_gas_fast: u64,
    pub gwei_per_gas_standard: u64,
    pub usd_per_eth_cents: u64,
    pub confirmation_latency: LatencyModel,
    pub throughput_gas_per_sec: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub node_monthly_usd_cents: Option<u64>,
    pub calibration: Calibration,
}

impl ChainProfile {
    pub fn from_json_str(text: &str) -> Result<ChainProfile, ProfileError> {
        let profile: ChainProfile = serde_json::from_str(text)?;
        let [lo, hi] = profile.confirmation_latency.uniform_seconds;
        if !(0.0 <= lo && lo <= hi) {
            return Err(ProfileError::BadLatency);
        }
        Ok(profile)
    }

    pub fn to_json_string(&self) -> String {
        let mut text = serde_json::to_string_pretty(self).expect("profile serializes");
        text.push('\n');
        text
    }

    /// Public-chain defaults: gas priced at 30 (fast) / 26 (standard)
    /// Gwei per unit, 240.00 USD per ETH, minutes-scale confirmation.
    pub fn ethereum() -> ChainProfile {
        ChainProfile {
            name: "ethereum".into(),
            gas_priced: true,
            prices: default_prices(),
            gwei_per_gas_fast: 30,
            gwei_per_gas_standard: 26,
            usd_per_eth_cents: 24_000,
            confirmation_latency: LatencyModel {
                uniform_seconds: [180.0, 300.0],
            },
            throughput_gas_per_sec: 1_000_000,
            node_monthly_usd_cents: None,
            calibration: default_calibration(),
        }
    }

    /// Permissioned-chain defaults: same price table (gas units stay
    /// comparable) but free of currency cost, with millisecond-scale
    /// confirmation and a flat monthly hosting cost per node.
    pub fn quorum() -> ChainProfile {
        ChainProfile {
            name: "quorum".into(),
            gas_priced: false,
            prices: default_prices(),
            gwei_per_gas_fast: 30,
            gwei_per_gas_standard: 26,
            usd_per_eth_cents: 24_000,
            confirmation_latency: LatencyModel {
                uniform_seconds: [0.01, 1.0],
            },
            throughput_gas_per_sec: 1_000_000,
            node_monthly_usd_cents: Some(8_000),
            calibration: default_calibration(),
        }
    }

    pub fn by_chain_name(name: &str) -> Option<ChainProfile> {
        match name {
            "ethereum" => Some(ChainProfile::ethereum()),
            "quorum" => Some(ChainProfile::quorum()),
            _ => None,
        }
    }
}

fn default_prices() -> PriceTable {
    PriceTable {
        tx_base: 21_000,
        exec_unit: 1,
        storage_write_new: 20_000,
        storage_write_update: 5_000,
        storage_read: 800,
        hash_base: 30,
        hash_per_word: 6,
        calldata_per_byte: 16,
        memory_per_word: 3,
        memory_quad_divisor: 512,
        deploy_base: 32_000,
        deploy_code_per_byte: 200,
    }
}

fn default_calibration() -> Calibration {
    Calibration {
        heavyweight: StrategyCalibration {
            code_bytes: 29_598,
            deploy_exec: 177,
            mint_exec: LinearCost {
                fixed: 3_000,
                per_token: 6_000,
            },
            transfer_exec: LinearCost {
                fixed: 4_000,
                per_token: 1_903_672,
            },
            modify_exec: None,
        },
        featherweight: StrategyCalibration {
            code_bytes: 18_249,
            deploy_exec: 177,
            mint_exec: LinearCost {
                fixed: 38_001,
                per_token: 54_993,
            },
            transfer_exec: LinearCost {
                fixed: 6_182,
                per_token: 19_244,
            },
            modify_exec: Some(LinearCost {
                fixed: 2_500,
                per_token: 0,
            }),
        },
        lightweight: StrategyCalibration {
            code_bytes: 22_698,
            deploy_exec: 180,
            mint_exec: LinearCost {
                fixed: 4_659,
                per_token: 94_904,
            },
            transfer_exec: LinearCost {
                fixed: 4_558,
                per_token: 108_119,
            },
            modify_exec: None,
        },
        heavyweight_struct_words: 16,
        heavyweight_transfer_mem_words: LinearCost {
            fixed: 32,
            per_token: 320,
        },
    }
}
