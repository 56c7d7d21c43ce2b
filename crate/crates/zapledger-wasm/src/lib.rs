//! Browser bindings for the gas model. Each export takes plain strings and
//! numbers and returns a JSON string, so the page needs no shared types.
//!
//! Build with `wasm-pack build --target web`; the same functions compile
//! natively so the JSON layer is tested on the host.

use serde::Serialize;
use wasm_bindgen::prelude::*;

use zapledger::meter::{
    fixture_batch_receipt, fixture_op_receipts, format_usd_cents, gas_to_money, gasfree_cost,
    per_token_curve, CurveOp, Rate,
};
use zapledger::profile::ChainProfile;
use zapledger::strategy::StrategyKind;
use zapledger::viability_report;

/// Batch sizes past this add nothing visually and only burn browser time.
const N_CAP: u64 = 200;

fn profile_by_name(name: &str) -> Result<ChainProfile, String> {
    match name {
        "ethereum" => Ok(ChainProfile::ethereum()),
        "quorum" => Ok(ChainProfile::quorum()),
        other => Err(format!("unknown profile {other:?}")),
    }
}

fn strategy_by_name(name: &str) -> Result<StrategyKind, String> {
    StrategyKind::parse(name).ok_or_else(|| format!("unknown strategy {name:?}"))
}

fn op_by_name(name: &str) -> Result<CurveOp, String> {
    match name {
        "mint" => Ok(CurveOp::Mint),
        "transfer" => Ok(CurveOp::Transfer),
        other => Err(format!("unknown op {other:?}")),
    }
}

fn check_n(n: u64) -> Result<(), String> {
    if n == 0 || n > N_CAP {
        return Err(format!("batch size must be in 1..={N_CAP}"));
    }
    Ok(())
}

#[derive(Serialize)]
struct PointOut {
    n: u64,
    gas_units: u64,
    per_token: f64,
}

#[derive(Serialize)]
struct SeriesOut {
    strategy: &'static str,
    points: Vec<PointOut>,
}

#[derive(Serialize)]
struct CurvesOut {
    op: String,
    profile: String,
    series: Vec<SeriesOut>,
}

/// Per-token gas of one op for every strategy at batch sizes 1..=n_max.
pub fn curves_json(op: &str, n_max: u64, profile: &str) -> Result<String, String> {
    let op_kind = op_by_name(op)?;
    let profile = profile_by_name(profile)?;
    check_n(n_max)?;
    let series = StrategyKind::ALL
        .iter()
        .map(|&kind| SeriesOut {
            strategy: kind.name(),
            points: per_token_curve(kind, op_kind, n_max, &profile)
                .into_iter()
                .map(|p| PointOut {
                    n: p.n,
                    gas_units: p.gas_units,
                    per_token: p.per_token(),
                })
                .collect(),
        })
        .collect();
    let out = CurvesOut {
        op: op.to_string(),
        profile: profile.name.clone(),
        series,
    };
    Ok(serde_json::to_string(&out).expect("report serializes"))
}

#[derive(Serialize)]
struct MoneyOut {
    gwei: u64,
    usd: String,
}

fn money_out(gas_units: u64, rate: Rate, profile: &ChainProfile) -> MoneyOut {
    let amount = gas_to_money(gas_units, rate, profile);
    MoneyOut {
        gwei: amount.gwei,
        usd: format_usd_cents(amount.usd_cents),
    }
}

#[derive(Serialize)]
struct CostRowOut {
    op: &'static str,
    gas_units: u64,
    baseline_gas: u64,
    /// 1 - gas/baseline, against the full-struct strategy at the same size.
    reduction: f64,
    fast: MoneyOut,
    standard: MoneyOut,
}

#[derive(Serialize)]
struct CostCardOut {
    strategy: String,
    profile: String,
    batch_size: u64,
    rows: Vec<CostRowOut>,
}

/// Mint and transfer priced at one batch size, normalized against the
/// full-struct baseline.
pub fn cost_card_json(strategy: &str, n: u64, profile: &str) -> Result<String, String> {
    let kind = strategy_by_name(strategy)?;
    let profile = profile_by_name(profile)?;
    check_n(n)?;
    let rows = [("mint", CurveOp::Mint), ("transfer", CurveOp::Transfer)]
        .into_iter()
        .map(|(label, op)| {
            let gas = fixture_batch_receipt(kind, op, n, &profile).gas_units;
            let baseline =
                fixture_batch_receipt(StrategyKind::Heavyweight, op, n, &profile).gas_units;
            CostRowOut {
                op: label,
                gas_units: gas,
                baseline_gas: baseline,
                reduction: 1.0 - gas as f64 / baseline as f64,
                fast: money_out(gas, Rate::Fast, &profile),
                standard: money_out(gas, Rate::Standard, &profile),
            }
        })
        .collect();
    let out = CostCardOut {
        strategy: kind.name().to_string(),
        profile: profile.name.clone(),
        batch_size: n,
        rows,
    };
    Ok(serde_json::to_string(&out).expect("report serializes"))
}

#[derive(Serialize)]
struct ViabilityOut {
    strategy: String,
    profile: String,
    rate: String,
    households: u64,
    days: u64,
    windows: u64,
    mint_gas: u64,
    /// Transfer plus the follow-up metadata write where one is required.
    flow_gas: u64,
    mint_usd: String,
    flow_usd: String,
    total_usd: String,
    /// Node-hosting price that replaces gas spend on gas-free profiles.
    #[serde(skip_serializing_if = "Option::is_none")]
    hosting_usd_per_node_month: Option<String>,
}

/// Projected cost of running a neighborhood: one mint and one transfer
/// flow per five-minute window per household.
pub fn viability_json(
    strategy: &str,
    households: u64,
    days: u64,
    profile: &str,
    rate: &str,
) -> Result<String, String> {
    let kind = strategy_by_name(strategy)?;
    let profile = profile_by_name(profile)?;
    let rate = Rate::parse(rate).ok_or_else(|| format!("unknown rate {rate:?}"))?;
    if households == 0 || households > 100_000 {
        return Err("households must be in 1..=100000".to_string());
    }
    if days == 0 || days > 36_500 {
        return Err("days must be in 1..=36500".to_string());
    }
    let ops = fixture_op_receipts(kind, &profile);
    let modify_gas = ops.modify.map(|m| m.gas_units).unwrap_or(0);
    let mint_cents = gas_to_money(ops.mint.gas_units, rate, &profile).usd_cents;
    let flow_cents = gas_to_money(ops.transfer.gas_units, rate, &profile).usd_cents
        + gas_to_money(modify_gas, rate, &profile).usd_cents;
    let projection = viability_report(households, mint_cents, flow_cents, days);
    let hosting = (!profile.gas_priced)
        .then(|| gasfree_cost(1, 1, &profile).expect("profile is gas-free"))
        .map(|m| format_usd_cents(m.usd_cents));
    let out = ViabilityOut {
        strategy: kind.name().to_string(),
        profile: profile.name.clone(),
        rate: rate.name().to_string(),
        households,
        days,
        windows: households * days * 24 * 12,
        mint_gas: ops.mint.gas_units,
        flow_gas: ops.transfer.gas_units + modify_gas,
        mint_usd: format_usd_cents(mint_cents),
        flow_usd: format_usd_cents(flow_cents),
        total_usd: format_usd_cents(projection.usd_cents),
        hosting_usd_per_node_month: hosting,
    };
    Ok(serde_json::to_string(&out).expect("report serializes"))
}

#[wasm_bindgen]
pub fn curves(op: &str, n_max: u64, profile: &str) -> Result<String, JsError> {
    curves_json(op, n_max, profile).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn cost_card(strategy: &str, n: u64, profile: &str) -> Result<String, JsError> {
    cost_card_json(strategy, n, profile).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn viability(
    strategy: &str,
    households: u64,
    days: u64,
    profile: &str,
    rate: &str,
) -> Result<String, JsError> {
    viability_json(strategy, households, days, profile, rate).map_err(|e| JsError::new(&e))
}
