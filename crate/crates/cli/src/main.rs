use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand};
use ergolab::measure::InvariantMeasure;
use ergolab_cli::{emit, literal, oscillate, parse_polys, run_construct, run_example, CliError, Overrides, Report, Scenario};
use serde_json::Value;

#[derive(Parser)]
#[command(name = "ergolab", about = "Exact temporo-spatial averages, limit-set constructions and oscillation points")]
struct Cli {
    /// Largest k computed
    #[arg(long, global = true)]
    horizon: Option<usize>,
    /// Output files, comma separated, matched to the command's artifacts in order
    #[arg(long, global = true, value_delimiter = ',')]
    out: Vec<PathBuf>,
    /// Worker threads
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Seed for fuzzing; never changes scenario results
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// cant-take-limsups or give-and-take
    Example { name: String },
    Sandwich { scenario: PathBuf },
    Chase { scenario: PathBuf },
    Oscillate {
        scenario: Option<PathBuf>,
        /// JSON list of invariant measure literals
        #[arg(long)]
        targets: Option<PathBuf>,
        /// Sampling polynomials, e.g. "t,t^2"
        #[arg(long)]
        poly: Option<String>,
        #[arg(long)]
        levels: Option<usize>,
        #[arg(long, default_value_t = 2)]
        alphabet: u8,
    },
    Trace {
        scenario: Option<PathBuf>,
        /// Check this many random specifications instead
        #[arg(long)]
        fuzz: Option<usize>,
    },
    Ergopt { scenario: PathBuf },
    DecayCheck { scenario: PathBuf },
    /// Dispatch on the scenario's "construct" field
    Run { scenario: PathBuf },
}

fn scenario_run(kind: &str, path: &PathBuf, ov: &Overrides) -> Result<Report, CliError> {
    run_construct(kind, &Scenario::load(path)?, ov)
}

fn execute(cli: &Cli) -> Result<Report, CliError> {
    let ov = Overrides { horizon: cli.horizon, seed: cli.seed };
    match &cli.cmd {
        Cmd::Example { name } => run_example(name, cli.horizon.unwrap_or(64)),
        Cmd::Sandwich { scenario } => scenario_run("sandwich", scenario, &ov),
        Cmd::Chase { scenario } => scenario_run("chase", scenario, &ov),
        Cmd::Ergopt { scenario } => scenario_run("ergopt", scenario, &ov),
        Cmd::DecayCheck { scenario } => scenario_run("decay-check", scenario, &ov),
        Cmd::Run { scenario } => ergolab_cli::run_scenario(scenario, &ov),
        Cmd::Trace { scenario, fuzz } => match (scenario, fuzz) {
            (_, Some(n)) => {
                let sc = scenario.as_deref().map(Scenario::load).transpose()?.unwrap_or_default();
                ergolab_cli::trace_fuzz(&literal::space(sc.space.as_ref())?, *n, cli.seed)
            }
            (Some(p), None) => scenario_run("trace", p, &ov),
            (None, None) => Err(CliError::Input("trace needs a scenario or --fuzz".into())),
        },
        Cmd::Oscillate { scenario: Some(p), targets: None, poly: None, levels: None, .. } => scenario_run("oscillate", p, &ov),
        Cmd::Oscillate { scenario: Some(_), .. } => {
            Err(CliError::Input("give either a scenario or --targets/--poly, not both".into()))
        }
        Cmd::Oscillate { scenario: None, targets, poly, levels, alphabet } => {
            let path = targets.as_ref().ok_or_else(|| CliError::Input("oscillate needs --targets".into()))?;
            let text = std::fs::read_to_string(path)?;
            let list: Value = serde_json::from_str(&text).map_err(|e| CliError::Input(format!("bad targets file: {e}")))?;
            let space = literal::space(Some(&serde_json::json!({"shift": {"alphabet": alphabet}})))?;
            let targets = list
                .as_array()
                .ok_or_else(|| CliError::Input("targets file must hold a list of measure literals".into()))?
                .iter()
                .map(|v| literal::invariant(&space, v))
                .collect::<Result<Vec<InvariantMeasure>, _>>()?;
            let polys = parse_polys(poly.as_deref().unwrap_or("t"))?;
            let ergolab::space::Space::Shift(sft) = space else { unreachable!() };
            oscillate(&sft, &targets, &polys, levels.unwrap_or(4), cli.horizon.unwrap_or(10_000), None, None)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("cannot configure threads: {e}");
            return ExitCode::from(2);
        }
    }
    let start = Instant::now();
    let result = execute(&cli).and_then(|r| emit(&r, &cli.out).map(|_| r));
    eprintln!("elapsed {:.3}s", start.elapsed().as_secs_f64());
    match result {
        Ok(r) if r.pass => ExitCode::SUCCESS,
        Ok(_) => {
            eprintln!("assertion failure: see summary");
            ExitCode::from(1)
        }
        Err(e) => {
            eprintln!("{e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
