use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use optbench::calc;
use optbench::config::PipelineConfig;
use optbench::error::{CliError, Result, EXIT_OK};
use optbench::fixture::{self, FixtureOptions};
use optbench::io;
use optbench::pipeline::{self, Stage};
use optbench_core::OptionKind;

/// Regime-sensitive benchmark pricing of AMM option quotes.
///
/// Without a subcommand, runs the whole pipeline (or the stage named by
/// `--stage`) from `--config`.
#[derive(Debug, Parser)]
#[command(name = "optbench", version)]
struct Cli {
    /// Pipeline configuration (TOML).
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Run a single stage.
    #[arg(long, global = true, value_name = "NAME")]
    stage: Option<Stage>,
    /// Override the master seed.
    #[arg(long, global = true, value_name = "N")]
    seed: Option<u64>,
    /// Override the output directory.
    #[arg(long, global = true, value_name = "DIR")]
    out: Option<PathBuf>,
    /// Log progress (repeat for more detail).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,
    #[command(subcommand)]
    command: Option<Command>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run every stage in order.
    Run,
    /// Validate inputs and compute returns.
    Ingest,
    /// Fit the two-regime MS-AR and label days.
    FitRegimes,
    /// Select and fit a GARCH model per regime.
    FitGarch,
    /// Build the annualized volatility path.
    VolPath,
    /// Price every trade against the benchmark.
    Mispricing,
    /// FGLS regression of the price gap.
    Regress,
    /// Summary and reference-target comparison.
    Report,
    /// Black-Scholes price and implied volatility.
    Price(PriceArgs),
    /// AMM quote from a rate table or a single rate.
    Quote(QuoteArgs),
    /// Write the synthetic fixture into `--out` (default `fixture`).
    Simulate(SimulateArgs),
}

#[derive(Debug, Args)]
struct PriceArgs {
    #[arg(long)]
    spot: f64,
    #[arg(long)]
    strike: f64,
    /// Continuously compounded annual rate.
    #[arg(long, default_value_t = 0.0)]
    rate: f64,
    #[arg(long)]
    maturity_days: f64,
    /// Annualized volatility (decimal).
    #[arg(long)]
    sigma: f64,
    #[arg(long)]
    kind: OptionKind,
    /// Observed premium to invert for implied volatility.
    #[arg(long)]
    premium: Option<f64>,
}

#[derive(Debug, Args)]
struct QuoteArgs {
    /// Rate-table CSV (kind,step_percent,maturity_days,rate).
    #[arg(long, conflicts_with = "rate", required_unless_present = "rate")]
    rates: Option<PathBuf>,
    /// Quote at this rate instead of a table lookup.
    #[arg(long)]
    rate: Option<f64>,
    #[arg(long)]
    spot: f64,
    #[arg(long)]
    kind: OptionKind,
    /// Strike step in percent of spot (calls 100-130, puts 100-70).
    #[arg(long)]
    step: u32,
    #[arg(long)]
    maturity_days: u32,
    #[arg(long, default_value_t = 1.0)]
    amount: f64,
}

#[derive(Debug, Args)]
struct SimulateArgs {
    #[arg(long, default_value_t = FixtureOptions::default().days)]
    days: usize,
    #[arg(long, default_value_t = FixtureOptions::default().trades)]
    trades: usize,
    /// Tag the assets with reference targets.
    #[arg(long)]
    with_references: bool,
}

fn load_config(cli: &Cli) -> Result<PipelineConfig> {
    let path = cli.config.as_ref().ok_or_else(|| CliError::Config("--config PATH is required".into()))?;
    let mut cfg = PipelineConfig::load(path)?;
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    if let Some(out) = &cli.out {
        cfg.output_dir = out.clone();
    }
    Ok(cfg)
}

fn print_json<T: serde::Serialize>(value: &T) -> Result<()> {
    let text = serde_json::to_string_pretty(value).map_err(|e| CliError::Data(e.to_string()))?;
    println!("{text}");
    Ok(())
}

fn run_stages(cli: &Cli, stages: &[Stage]) -> Result<i32> {
    let cfg = load_config(cli)?;
    let outcome = pipeline::run(&cfg, stages);
    if let Some((stage, e)) = &outcome.error {
        eprintln!("optbench: stage {stage} failed ({}): {e}", e.kind());
    }
    Ok(outcome.exit_code)
}

fn dispatch(cli: &Cli) -> Result<i32> {
    let single = |s: Stage| run_stages(cli, &[s]);
    match &cli.command {
        None | Some(Command::Run) => match cli.stage {
            Some(s) => single(s),
            None => run_stages(cli, &Stage::ALL),
        },
        Some(Command::Ingest) => single(Stage::Ingest),
        Some(Command::FitRegimes) => single(Stage::FitRegimes),
        Some(Command::FitGarch) => single(Stage::FitGarch),
        Some(Command::VolPath) => single(Stage::VolPath),
        Some(Command::Mispricing) => single(Stage::Mispricing),
        Some(Command::Regress) => single(Stage::Regress),
        Some(Command::Report) => single(Stage::Report),
        Some(Command::Price(a)) => {
            print_json(&calc::price(a.kind, a.spot, a.strike, a.rate, a.maturity_days, a.sigma, a.premium)?)?;
            Ok(EXIT_OK)
        }
        Some(Command::Quote(a)) => {
            let table = match (&a.rates, a.rate) {
                (Some(p), _) => io::load_rate_table(p)?,
                (None, Some(r)) => calc::single_rate_table(a.kind, a.step, a.maturity_days, r)?,
                (None, None) => return Err(CliError::Config("one of --rates or --rate is required".into())),
            };
            print_json(&calc::quote_one(&table, a.spot, a.kind, a.step, a.maturity_days, a.amount)?)?;
            Ok(EXIT_OK)
        }
        Some(Command::Simulate(a)) => {
            let dir = cli.out.clone().unwrap_or_else(|| PathBuf::from("fixture"));
            let mut opts = FixtureOptions {
                days: a.days,
                trades: a.trades,
                with_references: a.with_references,
                ..Default::default()
            };
            if let Some(seed) = cli.seed {
                opts.seed = seed;
            }
            let config = fixture::generate(&dir, &opts)?;
            println!("{}", config.display());
            Ok(EXIT_OK)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    let code = dispatch(&cli).unwrap_or_else(|e| {
        eprintln!("optbench: {e}");
        e.exit_code()
    });
    ExitCode::from(u8::try_from(code).unwrap_or(1))
}
