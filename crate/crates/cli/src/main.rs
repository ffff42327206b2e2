use std::fs;
use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};

use chernloc_cli::config::{ConfigError, RawConfig, ScenarioConfig};
use chernloc_cli::report::RunReport;
use chernloc_cli::scenario::{run, RunOptions};
use chernloc_cli::EXIT_CONFIG;

#[derive(Parser)]
#[command(name = "chernloc", version, about = "Odd Chern degrees and localization checks")]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Scenario file (`key = value` lines).
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Report destination; stdout when omitted.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,

    /// Multiplies every grid resolution.
    #[arg(long, global = true, default_value_t = 1.0)]
    resolution_scale: f64,

    /// Overrides the scenario seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
}

#[derive(Subcommand, Clone, Copy)]
enum Command {
    /// Odd Chern degree of a map on S^{2n-1}.
    Deg,
    /// deg* of a map on S^{2n-2k} x S^{2k-1}.
    DegStar,
    /// Boundary γ integral for growing T and its limit.
    GammaLimit,
    /// Localized index through the deg* and γ paths.
    Localize,
    /// Point case against the clutching construction.
    FlzPoint,
    /// Index sum over several boundary models.
    IndexReport,
    /// Runs the acceptance suite.
    Verify,
}

impl Command {
    fn name(self) -> &'static str {
        match self {
            Command::Deg => "deg",
            Command::DegStar => "deg-star",
            Command::GammaLimit => "gamma-limit",
            Command::Localize => "localize",
            Command::FlzPoint => "flz-point",
            Command::IndexReport => "index-report",
            Command::Verify => "verify",
        }
    }
}

#[derive(ValueEnum, Clone, Copy)]
enum Format {
    Json,
    Csv,
}

fn load(cli: &Cli) -> Result<ScenarioConfig, ConfigError> {
    let mut raw = match &cli.config {
        Some(path) => {
            let text = fs::read_to_string(path).map_err(|e| ConfigError::new(path.display().to_string(), e.to_string()))?;
            RawConfig::parse(&text)?
        }
        None if matches!(cli.command, Command::Verify) => RawConfig::default(),
        None => return Err(ConfigError::new("--config", "required for this subcommand")),
    };
    let name = cli.command.name();
    match raw.get("scenario") {
        Some(s) if s != name => {
            return Err(ConfigError::new("scenario", format!("file says `{s}` but the subcommand is `{name}`")));
        }
        _ => raw.set("scenario", name),
    }
    if !(cli.resolution_scale > 0.0 && cli.resolution_scale <= 16.0) {
        return Err(ConfigError::new("--resolution-scale", "must lie in (0, 16]"));
    }
    ScenarioConfig::from_raw(&raw)
}

fn emit(report: &RunReport, cli: &Cli) -> io::Result<()> {
    let mut buf = Vec::new();
    match cli.format {
        Format::Json => buf.extend_from_slice(report.to_json().as_bytes()),
        Format::Csv => report.write_csv(&mut buf).map_err(io::Error::other)?,
    }
    match &cli.out {
        Some(path) => fs::write(path, buf),
        None => io::stdout().write_all(&buf),
    }
}

fn init_threads() -> Result<(), ConfigError> {
    let Ok(v) = std::env::var("CHERN_THREADS") else { return Ok(()) };
    let n: usize = v
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| ConfigError::new("CHERN_THREADS", format!("expected a positive integer, got `{v}`")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| ConfigError::new("CHERN_THREADS", e.to_string()))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let cfg = match init_threads().and_then(|()| load(&cli)) {
        Ok(cfg) => cfg,
        Err(e) => {
            eprintln!("config error: {e}");
            return ExitCode::from(EXIT_CONFIG as u8);
        }
    };
    let start = Instant::now();
    let opts = RunOptions {
        resolution_scale: cli.resolution_scale,
        seed: cli.seed,
    };
    let report = match run(&cfg, opts) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("config error: {e}");
            return ExitCode::from(EXIT_CONFIG as u8);
        }
    };
    eprintln!("wall time: {:.3} s", start.elapsed().as_secs_f64());
    for c in report.checks.iter().filter(|c| !c.passed) {
        eprintln!("failed check {}: {}", c.name, c.detail);
    }
    if let Err(e) = emit(&report, &cli) {
        eprintln!("{e}");
        return ExitCode::FAILURE;
    }
    ExitCode::from(report.status.exit_code() as u8)
}
