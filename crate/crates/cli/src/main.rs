mod config;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use bellcheck_core::fine::{BehaviorStatistics, Marginals};
use bellcheck_core::ghz::{ProductConstraint, Station};
use bellcheck_core::report::{self, GhzReport, QUANTUM_MODEL};
use bellcheck_core::rng::threads_from_env;
use bellcheck_core::{zoo, CorrelationTable, Error, Outcome, Schedule};
use clap::{Args, Parser, Subcommand};
use serde::Deserialize;

use config::{parse_angles, ConfigFile, Format, RationalQuad};

#[derive(Parser)]
#[command(
    name = "bellcheck",
    version,
    about = "Simulate and verify CHSH and GHZ experiments"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
#[allow(clippy::large_enum_variant)]
enum Command {
    /// Run a sampled experiment and write its report.
    Run(RunArgs),
    /// Exact CHSH value of a measurement-independent model.
    Bound {
        #[arg(long)]
        model: String,
        #[arg(long, value_parser = parse_angles)]
        angles: Option<bellcheck_core::AnglePair>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Decide whether a joint probability reproduces the given statistics.
    FineCheck {
        /// Correlations `E11,E12,E21,E22`.
        #[arg(long)]
        table: RationalQuad,
        /// Marginals `A1,A2,B1,B2`; zero when omitted.
        #[arg(long)]
        marginals: Option<RationalQuad>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Exhaustive satisfiability of GHZ product constraints.
    GhzCheck {
        #[arg(long, default_value = "pi/2", value_parser = config::parse_angle)]
        phi: f64,
        /// Add `A(2φ)B(0)C(0)D(0) = +1` (only defined at φ = π/2).
        #[arg(long)]
        fifth: bool,
        /// JSON list of `{"factors": [["A", angle], ...], "target": ±1}`
        /// checked instead of the canonical system.
        #[arg(long, conflicts_with = "fifth")]
        constraints: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// List the named hidden-variable models.
    Zoo,
}

#[derive(Args)]
struct RunArgs {
    /// JSON manifest; flags override its keys.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    model: Option<String>,
    /// Trials per setting pair.
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// `a1,a2,b1,b2` in radians; `pi/4` style is accepted.
    #[arg(long, value_parser = parse_angles)]
    angles: Option<bellcheck_core::AnglePair>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<Format>,
    #[arg(long, value_parser = parse_schedule)]
    schedule: Option<Schedule>,
}

fn parse_schedule(text: &str) -> Result<Schedule, String> {
    match text {
        "independent" => Ok(Schedule::Independent),
        "interleaved" => Ok(Schedule::Interleaved),
        other => Err(format!(
            "unknown schedule `{other}` (independent or interleaved)"
        )),
    }
}

/// A failed command and its exit status.
enum Failure {
    Config(String),
    Model(String),
    Resource(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Config(_) => 2,
            Failure::Model(_) => 3,
            Failure::Resource(_) => 4,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Config(m) | Failure::Model(m) | Failure::Resource(m) => m,
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Model(_) | Error::MissingHiddenVariables | Error::MissingPair(_) => {
                Failure::Model(e.to_string())
            }
            Error::TooManyVariables { .. } => Failure::Resource(e.to_string()),
            _ => Failure::Config(e.to_string()),
        }
    }
}

impl From<config::ConfigError> for Failure {
    fn from(e: config::ConfigError) -> Self {
        Failure::Config(e.0)
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(failure) => {
            eprintln!("bellcheck: {}", failure.message());
            ExitCode::from(failure.code())
        }
    }
}

fn dispatch(command: Command) -> Result<(), Failure> {
    match command {
        Command::Run(args) => cmd_run(args),
        Command::Bound { model, angles, out } => {
            let report = report::bound_report(&model, angles)?;
            emit(out.as_deref(), &report::to_json(&report))
        }
        Command::FineCheck {
            table,
            marginals,
            out,
        } => {
            let [e11, e12, e21, e22] = table.0;
            let table = CorrelationTable::new(e11, e12, e21, e22)?;
            let stats = match marginals {
                Some(RationalQuad([a1, a2, b1, b2])) => {
                    BehaviorStatistics::new(table, Marginals { a1, a2, b1, b2 })?
                }
                None => BehaviorStatistics::zero_marginals(table)?,
            };
            emit(
                out.as_deref(),
                &report::to_json(&report::fine_report(&stats)),
            )
        }
        Command::GhzCheck {
            phi,
            fifth,
            constraints,
            out,
        } => {
            let report = match constraints {
                None => report::ghz_report(phi, fifth)?,
                Some(path) => custom_ghz(&path)?,
            };
            emit(out.as_deref(), &report::to_json(&report))
        }
        Command::Zoo => {
            for name in zoo::MODEL_NAMES {
                println!("{name:<16} {}", zoo::describe(name).unwrap_or(""));
            }
            println!("{QUANTUM_MODEL:<16} singlet-state sampling, E = -cos(a - b)");
            Ok(())
        }
    }
}

fn cmd_run(args: RunArgs) -> Result<(), Failure> {
    let file = match &args.config {
        Some(path) => ConfigFile::load(path)?,
        None => ConfigFile::default(),
    };
    let flags = ConfigFile {
        model: args.model,
        n_per_series: args.n,
        seed: args.seed,
        angles: args.angles,
        output: args.out,
        format: args.format,
        schedule: args.schedule,
    };
    let config = file.merge(flags)?;
    let report = report::run_report(&config.run_spec(threads_from_env()))?;
    let text = match config.format {
        Format::Json => report::to_json(&report),
        Format::Csv => report::run_report_csv(&report),
    };
    emit(config.output.as_deref(), &text)
}

#[derive(Deserialize)]
struct ConstraintSpec {
    factors: Vec<(Station, f64)>,
    target: i64,
}

fn custom_ghz(path: &Path) -> Result<GhzReport, Failure> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Failure::Config(format!("cannot read {}: {e}", path.display())))?;
    let specs: Vec<ConstraintSpec> = serde_json::from_str(&text)
        .map_err(|e| Failure::Config(format!("{}: {e}", path.display())))?;
    let system = specs
        .into_iter()
        .map(|s| {
            let target = Outcome::try_from(s.target)
                .map_err(|_| Failure::Config(format!("target {} is not ±1", s.target)))?;
            Ok(ProductConstraint::new(s.factors, target)?)
        })
        .collect::<Result<Vec<_>, Failure>>()?;
    Ok(report::constraint_report(&system)?)
}

fn emit(out: Option<&Path>, text: &str) -> Result<(), Failure> {
    match out {
        Some(path) => std::fs::write(path, text)
            .map_err(|e| Failure::Config(format!("cannot write {}: {e}", path.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}
