//! Command-line front end: scenario loading, experiment execution, and
//! machine-readable output.
//!
//! Exit codes: 0 success, 2 usage/configuration error, 3 internal invariant
//! violation.

mod output;

use std::path::PathBuf;
use std::process::ExitCode;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand};

use chargernet_core::assignment::Scheme;
use chargernet_core::protocol::{
    run_session, FaultSpec, QiPowerCategory, QiPowerProfile, SessionConfig, Standard,
};
use chargernet_core::scenario::{build_default_scenario, Scenario};
use chargernet_core::simulator::{run_replications, sweep_ratio, SimError, SweepPoint};
use chargernet_core::{Minutes, Scalar};

#[derive(Parser)]
#[command(
    name = "chargernet",
    version,
    about = "Simulate user-charger assignment over a networked wireless-charger deployment"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one scheme over replicated seeds and write the per-area cost table.
    Run(RunArgs),
    /// Sweep the load ratio between the last and first areas and write the
    /// per-ratio mean-cost curve.
    Sweep(SweepArgs),
    /// Run a single charging session and dump its protocol trace.
    Trace(TraceArgs),
}

#[derive(Args)]
struct ScenarioArgs {
    /// Scenario JSON file (omitted keys fall back to the built-in defaults).
    #[arg(
        long,
        value_name = "PATH",
        conflicts_with = "default",
        required_unless_present = "default"
    )]
    scenario: Option<PathBuf>,
    /// Use the built-in default campus scenario.
    #[arg(long)]
    default: bool,
}

#[derive(Args)]
struct SeedArgs {
    /// Number of replications; seeds are scenario.seed, scenario.seed+1, ...
    #[arg(long, default_value_t = 1)]
    seeds: u64,
    /// Explicit comma-separated seed list (overrides --seeds).
    #[arg(long, value_name = "S1,S2,...", value_delimiter = ',')]
    seed_list: Option<Vec<u64>>,
}

#[derive(Args)]
struct OutputArgs {
    /// Output file; stdout when omitted.
    #[arg(long, value_name = "PATH")]
    output: Option<PathBuf>,
    /// Output format.
    #[arg(long, default_value = "csv", value_parser = ["csv", "json"])]
    format: String,
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    scenario: ScenarioArgs,
    /// Assignment scheme.
    #[arg(long, value_parser = Scheme::from_str)]
    scheme: Scheme,
    #[command(flatten)]
    seeds: SeedArgs,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args)]
struct SweepArgs {
    #[command(flatten)]
    scenario: ScenarioArgs,
    /// Load ratios between areas 16 and 1 (each >= 1).
    #[arg(long, value_name = "R1,R2,...", value_delimiter = ',', required = true)]
    ratios: Vec<Scalar>,
    /// Schemes to sweep.
    #[arg(
        long,
        value_name = "S1,S2,...",
        value_delimiter = ',',
        value_parser = Scheme::from_str,
        default_values = ["nearest", "individual", "optimal"]
    )]
    schemes: Vec<Scheme>,
    #[command(flatten)]
    seeds: SeedArgs,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args)]
struct TraceArgs {
    /// Charging standard.
    #[arg(long, value_parser = Standard::from_str)]
    standard: Standard,
    /// Charging demand in minutes.
    #[arg(long, default_value_t = 20.0)]
    demand: Minutes,
    /// Scheduled faults, `kind@minutes` (e.g. `over-temp@10`); repeatable.
    #[arg(long, value_parser = FaultSpec::from_str)]
    fault: Vec<FaultSpec>,
    /// Requested power in watts.
    #[arg(long)]
    power: Option<Scalar>,
    /// Qi power category.
    #[arg(long, value_parser = QiPowerCategory::from_str, default_value = "low")]
    category: QiPowerCategory,
    /// Qi operating frequency in kHz.
    #[arg(long)]
    frequency: Option<Scalar>,
    /// Control-loop period in ms of session time.
    #[arg(long, default_value_t = 250)]
    control_period_ms: u64,
    #[command(flatten)]
    output: OutputArgs,
}

enum CliError {
    /// Bad input or configuration; exit 2.
    Config(String),
    /// Broken internal invariant; exit 3.
    Internal(String),
}

impl From<SimError> for CliError {
    fn from(e: SimError) -> Self {
        match e {
            SimError::Invariant(msg) => CliError::Internal(msg),
            other => CliError::Config(other.to_string()),
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    configure_threads();
    let result = match cli.command {
        Command::Run(args) => cmd_run(args),
        Command::Sweep(args) => cmd_sweep(args),
        Command::Trace(args) => cmd_trace(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Config(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(CliError::Internal(msg)) => {
            eprintln!("internal error: {msg}");
            ExitCode::from(3)
        }
    }
}

/// CHARGERNET_THREADS overrides the worker count for replication fan-out.
fn configure_threads() {
    if let Ok(value) = std::env::var("CHARGERNET_THREADS") {
        if let Ok(threads) = value.parse::<usize>() {
            if threads >= 1 {
                let _ = rayon::ThreadPoolBuilder::new()
                    .num_threads(threads)
                    .build_global();
            }
        }
    }
}

fn load_scenario(args: &ScenarioArgs) -> Result<Scenario, CliError> {
    match &args.scenario {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| {
                CliError::Config(format!("cannot read scenario `{}`: {e}", path.display()))
            })?;
            Scenario::from_json_str(&text)
                .map_err(|e| CliError::Config(format!("scenario `{}`: {e}", path.display())))
        }
        None => Ok(build_default_scenario()),
    }
}

fn resolve_seeds(args: &SeedArgs, scenario: &Scenario) -> Result<Vec<u64>, CliError> {
    let seeds = match &args.seed_list {
        Some(list) => list.clone(),
        None => (0..args.seeds)
            .map(|i| scenario.seed.wrapping_add(i))
            .collect(),
    };
    if seeds.is_empty() {
        return Err(CliError::Config(
            "at least one seed is required".to_string(),
        ));
    }
    Ok(seeds)
}

fn write_output(args: &OutputArgs, content: &str) -> Result<(), CliError> {
    match &args.output {
        Some(path) => std::fs::write(path, content)
            .map_err(|e| CliError::Config(format!("cannot write `{}`: {e}", path.display()))),
        None => {
            print!("{content}");
            Ok(())
        }
    }
}

fn cmd_run(args: RunArgs) -> Result<(), CliError> {
    let scenario = load_scenario(&args.scenario)?;
    let seeds = resolve_seeds(&args.seeds, &scenario)?;
    let set = run_replications(&scenario, args.scheme, &seeds)?;

    let content = match args.output.format.as_str() {
        "csv" => output::run_csv(&scenario, &set),
        _ => output::run_json(&scenario, args.scheme, &seeds, &set),
    };
    write_output(&args.output, &content)?;
    if args.output.output.is_some() {
        println!(
            "scheme {}: mean overall cost {} (95% CI {}..{}, {} replications)",
            args.scheme,
            set.summary.mean,
            set.summary.ci95_low,
            set.summary.ci95_high,
            set.summary.n
        );
    }
    Ok(())
}

fn cmd_sweep(args: SweepArgs) -> Result<(), CliError> {
    if args.ratios.is_empty() {
        return Err(CliError::Config(
            "at least one ratio is required".to_string(),
        ));
    }
    let scenario = load_scenario(&args.scenario)?;
    let seeds = resolve_seeds(&args.seeds, &scenario)?;

    let mut points: Vec<SweepPoint> = Vec::new();
    for &scheme in &args.schemes {
        points.extend(sweep_ratio(&scenario, scheme, &args.ratios, &seeds)?);
    }

    let content = match args.output.format.as_str() {
        "csv" => output::sweep_csv(&points),
        _ => output::sweep_json(&points),
    };
    write_output(&args.output, &content)
}

fn cmd_trace(args: TraceArgs) -> Result<(), CliError> {
    let mut config = SessionConfig::new(args.standard, args.demand);
    config.control_period_ms = args.control_period_ms;
    config.faults = args.fault.clone();
    match args.standard {
        Standard::Qi => {
            let defaults = QiPowerProfile::default();
            config.qi_profile = QiPowerProfile {
                category: args.category,
                requested_power_w: args.power.unwrap_or(defaults.requested_power_w),
                frequency_khz: args.frequency.unwrap_or(defaults.frequency_khz),
            };
        }
        Standard::A4wp => {
            if let Some(power) = args.power {
                config.a4wp_requested_power_w = power;
            }
        }
    }
    let trace = run_session(&config).map_err(|e| CliError::Config(e.to_string()))?;
    write_output(&args.output, &trace.to_text())
}
