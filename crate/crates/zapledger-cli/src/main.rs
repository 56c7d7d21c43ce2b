//! Command-line harness: gas-cost benchmarks, neighborhood simulations,
//! and cost-table reports over receipt files.
//!
//! Exit codes: 0 success, 2 validation error (bad flags or input files),
//! 3 runtime error. All artifacts are plain CSV or JSON-lines and rerunning
//! any subcommand with identical inputs rewrites them byte for byte.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use zapledger::market::{self, GridScenario, ReceiptRecord, SimResult};
use zapledger::meter::{
    fixture_op_receipts, format_usd_cents, gas_to_money, gasfree_cost, per_token_curve, CurveOp,
    Rate,
};
use zapledger::profile::ChainProfile;
use zapledger::strategy::{OpReceipt, StrategyKind};
use zapledger::CurvePoint;

#[derive(Parser)]
#[command(
    name = "zapledger",
    version,
    about = "Energy-token ledger benchmarks and neighborhood market simulation"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Emit per-token gas curves, reduction series, and single-op receipts.
    Bench(BenchArgs),
    /// Run a neighborhood scenario and persist its artifacts.
    Simulate(SimulateArgs),
    /// Price a receipts file into a cost table (CSV and stdout).
    Report(ReportArgs),
}

#[derive(Args)]
struct BenchArgs {
    /// Storage strategy: heavyweight, featherweight, lightweight, or all.
    #[arg(long, default_value = "all")]
    strategy: String,
    /// Chain profile: a builtin name (ethereum, quorum) or a JSON file path.
    #[arg(long, default_value = "ethereum")]
    profile: String,
    /// Largest batch size to sweep.
    #[arg(long, default_value_t = 100)]
    n_max: u64,
    /// Output directory; the ZAPLEDGER_OUT environment variable overrides it.
    #[arg(long, default_value = "out")]
    out: PathBuf,
}

#[derive(Args)]
struct SimulateArgs {
    /// Scenario JSON file.
    #[arg(long)]
    scenario: PathBuf,
    #[arg(long, default_value = "lightweight")]
    strategy: String,
    #[arg(long, default_value = "ethereum")]
    profile: String,
    /// Overrides the seed stored in the scenario.
    #[arg(long)]
    seed: Option<u64>,
    /// Gas price tier for currency figures: fast or standard.
    #[arg(long, default_value = "standard")]
    rate: String,
    #[arg(long, default_value = "out")]
    out: PathBuf,
}

#[derive(Args)]
struct ReportArgs {
    /// Receipts file: JSON-lines of operation receipts, bare or with
    /// event references.
    receipts: PathBuf,
    #[arg(long, default_value = "ethereum")]
    profile: String,
    #[arg(long, default_value = "out")]
    out: PathBuf,
}

enum CliError {
    Validation(String),
    Runtime(String),
}

impl CliError {
    fn validation(msg: impl Into<String>) -> CliError {
        CliError::Validation(msg.into())
    }

    fn runtime(msg: impl Into<String>) -> CliError {
        CliError::Runtime(msg.into())
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Bench(args) => cmd_bench(args),
        Command::Simulate(args) => cmd_simulate(args),
        Command::Report(args) => cmd_report(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Validation(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(CliError::Runtime(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(3)
        }
    }
}

fn load_profile(arg: &str) -> Result<ChainProfile, CliError> {
    if let Some(profile) = ChainProfile::by_chain_name(arg) {
        return Ok(profile);
    }
    let text = std::fs::read_to_string(arg)
        .map_err(|e| CliError::validation(format!("cannot read profile {arg:?}: {e}")))?;
    ChainProfile::from_json_str(&text)
        .map_err(|e| CliError::validation(format!("profile {arg:?}: {e}")))
}

fn load_scenario(path: &Path) -> Result<GridScenario, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::validation(format!("cannot read scenario {path:?}: {e}")))?;
    GridScenario::from_json_str(&text)
        .map_err(|e| CliError::validation(format!("scenario {path:?}: {e}")))
}

fn parse_strategies(arg: &str) -> Result<Vec<StrategyKind>, CliError> {
    if arg == "all" {
        return Ok(StrategyKind::ALL.to_vec());
    }
    StrategyKind::parse(arg).map(|k| vec![k]).ok_or_else(|| {
        CliError::validation(format!(
            "unknown strategy {arg:?} (expected heavyweight, featherweight, lightweight, or all)"
        ))
    })
}

fn parse_rate(arg: &str) -> Result<Rate, CliError> {
    Rate::parse(arg).ok_or_else(|| {
        CliError::validation(format!("unknown rate {arg:?} (expected fast or standard)"))
    })
}

/// `ZAPLEDGER_OUT`, when set and non-empty, wins over the flag.
fn resolve_out(flag: &Path) -> PathBuf {
    match std::env::var("ZAPLEDGER_OUT") {
        Ok(dir) if !dir.is_empty() => PathBuf::from(dir),
        _ => flag.to_path_buf(),
    }
}

fn write_artifact(dir: &Path, name: &str, contents: &str) -> Result<(), CliError> {
    std::fs::create_dir_all(dir)
        .map_err(|e| CliError::runtime(format!("cannot create {dir:?}: {e}")))?;
    let path = dir.join(name);
    std::fs::write(&path, contents)
        .map_err(|e| CliError::runtime(format!("cannot write {path:?}: {e}")))?;
    eprintln!("wrote {}", path.display());
    Ok(())
}

fn cmd_bench(args: BenchArgs) -> Result<(), CliError> {
    let strategies = parse_strategies(&args.strategy)?;
    let profile = load_profile(&args.profile)?;
    if args.n_max == 0 {
        return Err(CliError::validation("--n-max must be at least 1"));
    }
    let out = resolve_out(&args.out);

    let ops = [CurveOp::Mint, CurveOp::Transfer];
    let mut curves: BTreeMap<(StrategyKind, &str), Vec<CurvePoint>> = BTreeMap::new();
    for op in ops {
        // The baseline is always swept: reductions normalize against it.
        curves.insert(
            (StrategyKind::Heavyweight, op.name()),
            per_token_curve(StrategyKind::Heavyweight, op, args.n_max, &profile),
        );
        for &kind in &strategies {
            curves
                .entry((kind, op.name()))
                .or_insert_with(|| per_token_curve(kind, op, args.n_max, &profile));
        }
    }

    let mut curve_csv = String::from("strategy,op,n,gas_units,per_token_gas\n");
    for &kind in &strategies {
        for op in ops {
            for point in &curves[&(kind, op.name())] {
                writeln!(
                    curve_csv,
                    "{},{},{},{},{:.6}",
                    kind.name(),
                    op.name(),
                    point.n,
                    point.gas_units,
                    point.per_token(),
                )
                .unwrap();
            }
        }
    }
    write_artifact(&out, "curves.csv", &curve_csv)?;

    let mut reduction_csv =
        String::from("op,n,heavyweight_gas,strategy,gas_units,ratio,reduction\n");
    for op in ops {
        let baseline = &curves[&(StrategyKind::Heavyweight, op.name())];
        for &kind in &strategies {
            let series = &curves[&(kind, op.name())];
            for (base, point) in baseline.iter().zip(series.iter()) {
                let ratio = point.gas_units as f64 / base.gas_units as f64;
                writeln!(
                    reduction_csv,
                    "{},{},{},{},{},{:.6},{:.6}",
                    op.name(),
                    point.n,
                    base.gas_units,
                    kind.name(),
                    point.gas_units,
                    ratio,
                    1.0 - ratio,
                )
                .unwrap();
            }
        }
    }
    write_artifact(&out, "reductions.csv", &reduction_csv)?;

    let mut receipts = String::new();
    for &kind in &strategies {
        let ops = fixture_op_receipts(kind, &profile);
        for receipt in [
            Some(ops.deploy),
            Some(ops.mint),
            Some(ops.transfer),
            ops.modify,
        ]
        .into_iter()
        .flatten()
        {
            receipts.push_str(&serde_json::to_string(&receipt).expect("receipt serializes"));
            receipts.push('\n');
        }
    }
    write_artifact(&out, "receipts.jsonl", &receipts)?;
    Ok(())
}

fn count_events(result: &SimResult) -> (usize, usize, usize, usize) {
    use market::EventBody::*;
    let mut counts = (0, 0, 0, 0);
    for event in &result.events {
        match event.body {
            Mint { .. } => counts.0 += 1,
            Transfer { .. } => counts.1 += 1,
            Consume { .. } => counts.2 += 1,
            Settle { .. } => counts.3 += 1,
        }
    }
    counts
}

fn feasibility_csv(rows: &[market::FeasibilityRow]) -> String {
    let mut out = String::from(
        "op,count,worst_processing_seconds,worst_confirmation_seconds,\
         worst_total_seconds,processing_fits,fits\n",
    );
    for row in rows {
        writeln!(
            out,
            "{},{},{:.6},{:.6},{:.6},{},{}",
            row.op_name,
            row.count,
            row.worst_processing_seconds,
            row.worst_confirmation_seconds,
            row.worst_total_seconds,
            row.processing_fits,
            row.fits,
        )
        .unwrap();
    }
    out
}

fn cmd_simulate(args: SimulateArgs) -> Result<(), CliError> {
    let scenario = load_scenario(&args.scenario)?;
    let profile = load_profile(&args.profile)?;
    let kind = StrategyKind::parse(&args.strategy)
        .ok_or_else(|| CliError::validation(format!("unknown strategy {:?}", args.strategy)))?;
    let rate = parse_rate(&args.rate)?;
    let seed = args.seed.unwrap_or(scenario.seed);
    let out = resolve_out(&args.out);

    let result = market::run(&scenario, kind, &profile, seed).map_err(|e| match e {
        market::MarketError::Scenario(e) => CliError::validation(e.to_string()),
        other => CliError::runtime(other.to_string()),
    })?;
    let feasibility = market::schedule_feasibility(&result, &profile, 300.0);

    write_artifact(&out, "events.jsonl", &result.events_jsonl())?;
    write_artifact(&out, "statements.csv", &result.statements_csv())?;
    write_artifact(&out, "receipts.jsonl", &result.receipts_jsonl())?;
    write_artifact(&out, "feasibility.csv", &feasibility_csv(&feasibility))?;

    let (mints, transfers, consumes, settles) = count_events(&result);
    let total_gas: u64 = result.receipts.iter().map(|r| r.receipt.gas_units).sum();
    let spend_cents: u64 = result
        .receipts
        .iter()
        .map(|r| gas_to_money(r.receipt.gas_units, rate, &profile).usd_cents)
        .sum();

    // Projection at the published per-window arithmetic: one mint and one
    // transfer flow per five-minute window per household, priced from the
    // canonical single-op receipts on this profile.
    let ops = fixture_op_receipts(kind, &profile);
    let mint = ops.mint;
    let transfer = ops.transfer;
    let mint_cents = gas_to_money(mint.gas_units, rate, &profile).usd_cents;
    let transfer_cents = gas_to_money(transfer.gas_units, rate, &profile).usd_cents
        + ops
            .modify
            .as_ref()
            .map(|m| gas_to_money(m.gas_units, rate, &profile).usd_cents)
            .unwrap_or(0);
    let houses = scenario.households.len() as u64;
    let projection = market::viability_report(houses, mint_cents, transfer_cents, scenario.days);

    let mut summary = String::new();
    writeln!(
        summary,
        "scenario: {} ({} households, {} days, {} ticks/day)",
        scenario.name, houses, scenario.days, scenario.ticks_per_day
    )
    .unwrap();
    writeln!(
        summary,
        "strategy: {}  profile: {}  seed: {}  rate: {}",
        kind.name(),
        profile.name,
        seed,
        rate.name()
    )
    .unwrap();
    writeln!(
        summary,
        "events: {mints} mints, {transfers} transfers, {consumes} consumes, {settles} settlements"
    )
    .unwrap();
    writeln!(
        summary,
        "chain operations: {}  total gas: {total_gas}",
        result.receipts.len()
    )
    .unwrap();
    writeln!(
        summary,
        "simulated gas spend ({}): {} USD",
        rate.name(),
        format_usd_cents(spend_cents)
    )
    .unwrap();
    writeln!(
        summary,
        "single-op gas: mint {}, transfer flow {}",
        mint.gas_units,
        transfer.gas_units + ops.modify.map(|m| m.gas_units).unwrap_or(0)
    )
    .unwrap();
    writeln!(
        summary,
        "single-op cost ({}): mint {} USD, transfer flow {} USD",
        rate.name(),
        format_usd_cents(mint_cents),
        format_usd_cents(transfer_cents)
    )
    .unwrap();
    writeln!(
        summary,
        "projected spend, {houses} households x {} days x 288 windows: {} USD",
        scenario.days,
        format_usd_cents(projection.usd_cents)
    )
    .unwrap();
    if let Some(node_cents) = profile.node_monthly_usd_cents {
        let hosting = gasfree_cost(1, 1, &profile).expect("profile is gas-free");
        debug_assert_eq!(hosting.usd_cents, node_cents);
        writeln!(
            summary,
            "hosting: {} USD/node-month",
            format_usd_cents(node_cents)
        )
        .unwrap();
    }
    write_artifact(&out, "summary.txt", &summary)?;
    print!("{summary}");
    Ok(())
}

fn cmd_report(args: ReportArgs) -> Result<(), CliError> {
    let text = std::fs::read_to_string(&args.receipts).map_err(|e| {
        CliError::validation(format!("cannot read receipts {:?}: {e}", args.receipts))
    })?;
    let profile = load_profile(&args.profile)?;
    let out = resolve_out(&args.out);

    let mut receipts = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let receipt = serde_json::from_str::<OpReceipt>(line)
            .or_else(|_| serde_json::from_str::<ReceiptRecord>(line).map(|r| r.receipt))
            .map_err(|e| {
                CliError::validation(format!(
                    "receipts line {}: not an operation receipt: {e}",
                    lineno + 1
                ))
            })?;
        receipts.push(receipt);
    }

    // Table-1-style rows: one per distinct operation shape, with a count
    // of how many receipts shared it.
    let mut grouped: BTreeMap<(String, String, u64, u64), u64> = BTreeMap::new();
    for receipt in &receipts {
        *grouped
            .entry((
                receipt.strategy.name().to_string(),
                receipt.op_name.clone(),
                receipt.batch_size,
                receipt.gas_units,
            ))
            .or_insert(0) += 1;
    }

    let mut csv = String::from(
        "strategy,op,batch_size,count,gas_units,fast_gwei,fast_usd,standard_gwei,standard_usd\n",
    );
    let mut table = format!(
        "{:<14} {:<9} {:>5} {:>7} {:>10} {:>13} {:>10} {:>13} {:>13}\n",
        "strategy", "op", "batch", "count", "gas", "fast gwei", "fast usd", "std gwei", "std usd"
    );
    for ((strategy, op, batch, gas), count) in &grouped {
        let fast = gas_to_money(*gas, Rate::Fast, &profile);
        let standard = gas_to_money(*gas, Rate::Standard, &profile);
        writeln!(
            csv,
            "{strategy},{op},{batch},{count},{gas},{},{},{},{}",
            fast.gwei,
            format_usd_cents(fast.usd_cents),
            standard.gwei,
            format_usd_cents(standard.usd_cents),
        )
        .unwrap();
        writeln!(
            table,
            "{strategy:<14} {op:<9} {batch:>5} {count:>7} {gas:>10} {:>13} {:>10} {:>13} {:>13}",
            fast.gwei,
            format_usd_cents(fast.usd_cents),
            standard.gwei,
            format_usd_cents(standard.usd_cents),
        )
        .unwrap();
    }
    write_artifact(&out, "cost_table.csv", &csv)?;
    if grouped.is_empty() {
        println!("no receipts");
    } else {
        print!("{table}");
    }
    Ok(())
}
