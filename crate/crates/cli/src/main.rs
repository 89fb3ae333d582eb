//! `trustwatch`: analyze supervision scenarios, compute the cheapest deterring
//! monitoring strategy, run scripted or interactive trial sessions and serve
//! the HTTP API.
//!
//! Exit codes: 0 ok, 1 I/O failure, 2 invalid input, 3 empty trust region.

mod render;

use std::io::{BufRead, Write};
use std::net::{IpAddr, SocketAddr};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use trustwatch_core::analysis::{analyze, region_plot, AnalysisBundle, AnalysisOptions};
use trustwatch_core::game::{MatrixSource, TrustGame};
use trustwatch_core::region::{OptimalMonitoringResult, TrustBoundary, TrustRegion};
use trustwatch_core::scenario::{load_scenario, LoadedScenario};
use trustwatch_core::simulator::{Session, SessionConfig};

#[derive(Parser)]
#[command(name = "trustwatch", version, about = "Trust-game analysis and supervision trials")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Payoff matrices, equilibria, trust boundary, region and optimum.
    Analyze(AnalyzeArgs),
    /// Boundary, region and cheapest deterring strategy only.
    Optimize(AnalyzeArgs),
    /// Run a session of supervision trials.
    Simulate(SimulateArgs),
    /// Boundary samples and region vertices in the (qN, qE) plane.
    RegionData(RegionArgs),
    /// Serve the HTTP API.
    Serve(ServeArgs),
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Machine,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum BoundarySource {
    Constraining,
    Expected,
}

impl From<BoundarySource> for MatrixSource {
    fn from(s: BoundarySource) -> Self {
        match s {
            BoundarySource::Constraining => MatrixSource::Constraining,
            BoundarySource::Expected => MatrixSource::Expected,
        }
    }
}

#[derive(Args)]
struct Common {
    #[arg(long)]
    scenario: PathBuf,
    #[arg(long, value_enum, default_value = "text")]
    format: Format,
    /// Write the output here instead of standard output.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct AnalysisFlags {
    #[arg(long, value_enum, default_value = "constraining")]
    boundary_source: BoundarySource,
    /// Safety margin in utility units.
    #[arg(long, default_value_t = 0.0)]
    epsilon: f64,
}

impl AnalysisFlags {
    fn options(&self) -> AnalysisOptions {
        AnalysisOptions { boundary_source: self.boundary_source.into(), epsilon: self.epsilon }
    }
}

#[derive(Args)]
struct AnalyzeArgs {
    #[command(flatten)]
    common: Common,
    #[command(flatten)]
    analysis: AnalysisFlags,
}

#[derive(Args)]
struct RegionArgs {
    #[command(flatten)]
    common: Common,
    #[command(flatten)]
    analysis: AnalysisFlags,
    /// Number of boundary samples.
    #[arg(long, default_value_t = 100)]
    resolution: usize,
}

#[derive(Args)]
struct SimulateArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Trial count; defaults to the number of strategies given.
    #[arg(long)]
    trials: Option<u32>,
    /// "qP,qE,qN" (or "monitor,idle" with --merged). A single strategy is
    /// repeated for every trial.
    #[arg(long = "strategy")]
    strategies: Vec<String>,
    /// Read one strategy per trial from standard input.
    #[arg(long, conflicts_with = "strategies")]
    interactive: bool,
    /// Strategies are (monitor, idle) pairs.
    #[arg(long)]
    merged: bool,
    /// Share of the monitor weight spent reading the plan in merged mode.
    #[arg(long, default_value_t = 1.0)]
    monitor_split: f64,
    /// Matrix the robot best-responds in.
    #[arg(long, default_value = "constraining")]
    response_source: MatrixSource,
}

#[derive(Args)]
struct ServeArgs {
    #[arg(long, default_value_t = 8080)]
    port: u16,
    #[arg(long, default_value = "127.0.0.1")]
    bind: IpAddr,
    /// Hide the robot's plan in trial responses unless a session opts out.
    #[arg(long)]
    blind: bool,
}

#[derive(Debug)]
enum CliError {
    Io(String),
    Invalid(String),
    EmptyRegion,
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Io(_) => 1,
            CliError::Invalid(_) => 2,
            CliError::EmptyRegion => 3,
        }
    }

    fn message(&self) -> String {
        match self {
            CliError::Io(m) | CliError::Invalid(m) => m.clone(),
            CliError::EmptyRegion => "no deterring strategy: the trust region is empty".into(),
        }
    }
}

fn invalid(e: impl std::fmt::Display) -> CliError {
    CliError::Invalid(e.to_string())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message());
            ExitCode::from(e.code())
        }
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Analyze(args) => cmd_analyze(&args),
        Command::Optimize(args) => cmd_optimize(&args),
        Command::Simulate(args) => cmd_simulate(&args),
        Command::RegionData(args) => cmd_region_data(&args),
        Command::Serve(args) => cmd_serve(&args),
    }
}

fn read_scenario(path: &Path) -> Result<LoadedScenario, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    load_scenario(&text).map_err(|e| CliError::Invalid(format!("{}: {e}", path.display())))
}

fn bundle_for(common: &Common, flags: &AnalysisFlags) -> Result<AnalysisBundle, CliError> {
    analyze(&read_scenario(&common.scenario)?, flags.options()).map_err(invalid)
}

fn machine<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("output serializes");
    s.push('\n');
    s
}

fn emit(common: &Common, output: &str) -> Result<(), CliError> {
    match &common.out {
        Some(path) => std::fs::write(path, output).map_err(|e| CliError::Io(format!("{}: {e}", path.display()))),
        None => std::io::stdout()
            .lock()
            .write_all(output.as_bytes())
            .map_err(|e| CliError::Io(e.to_string())),
    }
}

fn cmd_analyze(args: &AnalyzeArgs) -> Result<(), CliError> {
    let bundle = bundle_for(&args.common, &args.analysis)?;
    let out = match args.common.format {
        Format::Machine => machine(&bundle),
        Format::Text => render::analysis(&bundle),
    };
    emit(&args.common, &out)
}

#[derive(Serialize)]
struct OptimizeReport {
    options: AnalysisOptions,
    boundary: TrustBoundary,
    region: TrustRegion,
    optimum: OptimalMonitoringResult,
}

fn cmd_optimize(args: &AnalyzeArgs) -> Result<(), CliError> {
    let bundle = bundle_for(&args.common, &args.analysis)?;
    let optimum = bundle.optimum.ok_or(CliError::EmptyRegion)?;
    let report = OptimizeReport { options: bundle.options, boundary: bundle.boundary, region: bundle.region, optimum };
    let out = match args.common.format {
        Format::Machine => machine(&report),
        Format::Text => render::optimum(&report.boundary, &report.region, &report.optimum, report.options.epsilon),
    };
    emit(&args.common, &out)
}

fn cmd_region_data(args: &RegionArgs) -> Result<(), CliError> {
    let bundle = bundle_for(&args.common, &args.analysis)?;
    let plot = region_plot(&bundle, args.resolution);
    let out = match args.common.format {
        Format::Machine => machine(&plot),
        Format::Text => render::region(&plot),
    };
    emit(&args.common, &out)
}

fn parse_strategy(text: &str) -> Result<Vec<f64>, String> {
    text.split(',')
        .map(|part| part.trim().parse::<f64>().map_err(|e| format!("`{}`: {e}", part.trim())))
        .collect()
}

fn cmd_simulate(args: &SimulateArgs) -> Result<(), CliError> {
    let loaded = read_scenario(&args.common.scenario)?;
    let game = TrustGame::build(loaded.cost_model).map_err(invalid)?;
    let mut config = SessionConfig::new(0);
    config.merged_monitoring = args.merged;
    config.monitor_split = args.monitor_split;
    config.response_source = args.response_source;

    let session = if args.interactive {
        config.trial_limit = args.trials.unwrap_or(5);
        let mut session = Session::new(format!("cli-{}", args.seed), game, args.seed, config).map_err(invalid)?;
        run_interactive(&mut session)?;
        session
    } else {
        let trials = match (args.trials, args.strategies.len()) {
            (_, 0) => return Err(invalid("no strategies given; pass --strategy or --interactive")),
            (Some(t), 1) => t,
            (Some(t), n) if t as usize != n => {
                return Err(invalid(format!("--trials {t} does not match the {n} strategies given")))
            }
            (_, n) => n as u32,
        };
        config.trial_limit = trials;
        let mut session = Session::new(format!("cli-{}", args.seed), game, args.seed, config).map_err(invalid)?;
        // parse everything before running so a bad entry leaves no output
        let parsed = (0..trials as usize)
            .map(|k| {
                let raw = &args.strategies[if args.strategies.len() == 1 { 0 } else { k }];
                parse_strategy(raw)
                    .and_then(|v| config.expand(&v).map_err(|e| e.to_string()))
                    .map_err(|e| invalid(format!("trial {}: {e}", k + 1)))
            })
            .collect::<Result<Vec<_>, _>>()?;
        for q in parsed {
            session.run_trial_strategy(q).map_err(invalid)?;
        }
        session
    };

    let export = session.export();
    match (args.common.format, &args.common.out) {
        (Format::Machine, _) => emit(&args.common, &machine(&export)),
        (Format::Text, out) => {
            if !args.interactive {
                print!("{}", render::trials(session.trials()));
            }
            if let Some(path) = out {
                std::fs::write(path, machine(&export)).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
            }
            Ok(())
        }
    }
}

/// Prompts on standard error; feedback lines go to standard output as each
/// trial completes. Unparseable lines are re-prompted, end of input stops
/// the session early.
fn run_interactive(session: &mut Session) -> Result<(), CliError> {
    let stdin = std::io::stdin();
    let mut lines = stdin.lock().lines();
    let limit = session.config().trial_limit;
    let hint = if session.config().merged_monitoring { "monitor,idle" } else { "qP,qE,qN" };
    while !session.is_finished() {
        eprint!("trial {}/{limit} strategy ({hint}): ", session.trials().len() + 1);
        let Some(line) = lines.next() else { break };
        let line = line.map_err(|e| CliError::Io(e.to_string()))?;
        let values = match parse_strategy(&line) {
            Ok(v) => v,
            Err(e) => {
                eprintln!("  {e}");
                continue;
            }
        };
        match session.run_trial(&values) {
            Ok(rec) => println!("{}", render::trial_line(rec)),
            Err(e) => eprintln!("  {e}"),
        }
    }
    Ok(())
}

fn cmd_serve(args: &ServeArgs) -> Result<(), CliError> {
    let addr = SocketAddr::new(args.bind, args.port);
    let config = trustwatch_service::ServiceConfig { blind: args.blind };
    let rt = tokio::runtime::Runtime::new().map_err(|e| CliError::Io(e.to_string()))?;
    eprintln!("listening on http://{addr}");
    rt.block_on(trustwatch_service::serve(addr, config)).map_err(|e| CliError::Io(format!("{addr}: {e}")))
}
