//! Command-line driver: `run` executes one scenario, `converge` sweeps a
//! list of time steps to a common final time.
//!
//! Exit codes: 0 on success, 2 on configuration problems (bad flags, bad
//! config file, invalid parameter combinations), 3 when the solver itself
//! fails mid-run (the partial time series is still written).

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use unifield::config::{ScenarioConfig, ScenarioKind};
use unifield::error::FsiError;
use unifield::scenario::{convergence_study, format_convergence, run_scenario};

#[derive(Parser)]
#[command(name = "unifield", version, about = "One-field fictitious domain FSI solver")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one scenario and write its energy time series
    Run(RunArgs),
    /// Run the same scenario at several time steps to a common final time
    Converge(ConvergeArgs),
}

#[derive(Args)]
struct CommonArgs {
    /// Scenario preset: activated_disc, stretched_disc, oscillating_ball, custom
    #[arg(long)]
    scenario: String,

    /// Config file of key=value overrides, applied after the preset
    #[arg(long)]
    config: Option<PathBuf>,

    /// Cells per axis (square/cubic override of the preset resolution)
    #[arg(long)]
    nx: Option<usize>,

    /// Time scheme: implicit or explicit
    #[arg(long)]
    scheme: Option<String>,

    /// Pressure space: p1 or p1_p0
    #[arg(long)]
    pressure: Option<String>,

    /// Boundary preset: periodic or noslip
    #[arg(long)]
    bc: Option<String>,

    /// Output directory (time series and field snapshots)
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    common: CommonArgs,

    /// Time step size
    #[arg(long)]
    dt: Option<f64>,

    /// Number of steps
    #[arg(long)]
    steps: Option<usize>,
}

#[derive(Args)]
struct ConvergeArgs {
    #[command(flatten)]
    common: CommonArgs,

    /// Comma-separated time steps, e.g. 2e-2,1e-2,5e-3
    #[arg(long)]
    dts: String,

    /// Common final time every listed step must divide
    #[arg(long)]
    tfinal: f64,
}

/// Preset, then file, then flags.
fn build_config(common: &CommonArgs) -> Result<ScenarioConfig, FsiError> {
    let kind: ScenarioKind = common.scenario.parse()?;
    let mut config = ScenarioConfig::preset(kind);
    if let Some(path) = &common.config {
        config.apply_file(path)?;
    }
    if let Some(nx) = common.nx {
        for a in 0..config.dim {
            config.cells[a] = nx;
        }
    }
    if let Some(s) = &common.scheme {
        config.apply_override("time.scheme", s)?;
    }
    if let Some(p) = &common.pressure {
        config.apply_override("space.pressure", p)?;
    }
    if let Some(b) = &common.bc {
        config.apply_override("bc.preset", b)?;
    }
    if let Some(out) = &common.out {
        config.out_dir = Some(out.clone());
    }
    Ok(config)
}

fn exit_code_for(err: &FsiError) -> u8 {
    match err {
        FsiError::Config(_) | FsiError::InvalidParams(_) => 2,
        _ => 3,
    }
}

fn run(args: &RunArgs) -> Result<(), FsiError> {
    let mut config = build_config(&args.common)?;
    if let Some(dt) = args.dt {
        config.dt = dt;
    }
    if let Some(steps) = args.steps {
        config.n_steps = steps;
    }
    let result = run_scenario(&config)?;
    let last = result.reports.last().unwrap();
    println!(
        "{} finished: {} steps to t = {:.6}, E_total {:.6e}, E_ratio {}",
        config.scenario.name(),
        result.reports.len() - 1,
        last.t,
        last.e_total,
        last.e_ratio
            .map(|r| format!("{r:.9}"))
            .unwrap_or_else(|| "n/a".to_string()),
    );
    if let Some(path) = &result.timeseries_path {
        println!("time series: {}", path.display());
    }
    Ok(())
}

fn converge(args: &ConvergeArgs) -> Result<(), FsiError> {
    let config = build_config(&args.common)?;
    let mut dts = Vec::new();
    for part in args.dts.split(',') {
        let dt: f64 = part
            .trim()
            .parse()
            .map_err(|_| FsiError::Config(format!("bad time step {part:?} in --dts")))?;
        dts.push(dt);
    }
    let rows = convergence_study(&config, &dts, args.tfinal)?;
    let table = format_convergence(&rows);
    print!("{table}");
    if let Some(dir) = &config.out_dir {
        std::fs::create_dir_all(dir)?;
        let path = dir.join("convergence.csv");
        std::fs::write(&path, table)?;
        println!("table: {}", path.display());
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match &cli.command {
        Command::Run(args) => run(args),
        Command::Converge(args) => converge(args),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code_for(&e))
        }
    }
}
