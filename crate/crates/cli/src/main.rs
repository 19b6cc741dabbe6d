//! Command-line front end: `symbol`, `check`, `run` and `verify`.
//!
//! Exit codes: 0 success, 1 verification or parabolicity failure, 2 usage, input or I/O error.

mod config;
mod point;
mod report;
mod run;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use rgflow::presets::{PresetParams, FIELD_PRESETS, POINT_PRESETS};

#[derive(Debug)]
pub struct Failure {
    pub code: u8,
    pub message: String,
}

impl Failure {
    pub fn usage(message: impl Into<String>) -> Self {
        Self {
            code: 2,
            message: message.into(),
        }
    }

    pub fn rejected(message: impl Into<String>) -> Self {
        Self {
            code: 1,
            message: message.into(),
        }
    }
}

impl From<rgflow::Error> for Failure {
    fn from(e: rgflow::Error) -> Self {
        match e {
            rgflow::Error::InitialConditionRejected { .. } => Self::rejected(e.to_string()),
            _ => Self::usage(e.to_string()),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Self::usage(e.to_string())
    }
}

impl From<serde_json::Error> for Failure {
    fn from(e: serde_json::Error) -> Self {
        Self::usage(e.to_string())
    }
}

impl From<csv::Error> for Failure {
    fn from(e: csv::Error) -> Self {
        Self::usage(e.to_string())
    }
}

#[derive(Parser)]
#[command(
    name = "rgflow",
    version,
    about = "Second-order renormalization group flow of 3D metrics"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Principal symbol of one flow at one point and direction.
    Symbol(SymbolArgs),
    /// Parabolicity of a flow over a whole metric field.
    Check(CheckArgs),
    /// Integrate a flow and write diagnostics, snapshots and a summary.
    Run(RunArgs),
    /// Run the built-in self-test suite.
    Verify(VerifyArgs),
}

#[derive(Args)]
struct FlowArgs {
    /// ricci, rg2, rg2zero, squared-ricci or mixed.
    #[arg(long)]
    kind: Option<String>,
    /// Coupling constant.
    #[arg(short, long, allow_hyphen_values = true)]
    a: Option<f64>,
}

#[derive(Args)]
struct SymbolArgs {
    /// Point-data file (key = value; see the README).
    file: Option<PathBuf>,
    #[arg(long, conflicts_with = "file", help = format!("one of {POINT_PRESETS:?}"))]
    preset: Option<String>,
    /// Sectional curvature for the constant-curvature preset.
    #[arg(long, default_value_t = -1.0, allow_hyphen_values = true)]
    curvature: f64,
    #[command(flatten)]
    flow: FlowArgs,
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct CheckArgs {
    /// Metric snapshot JSON.
    #[arg(long, conflicts_with_all = ["preset", "config"])]
    snapshot: Option<PathBuf>,
    #[arg(long, conflicts_with = "config", help = format!("one of {FIELD_PRESETS:?}"))]
    preset: Option<String>,
    /// Take geometry and flow from a run configuration.
    #[arg(long)]
    config: Option<PathBuf>,
    #[command(flatten)]
    flow: FlowArgs,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, allow_hyphen_values = true)]
    amplitude: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    curvature: Option<f64>,
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct RunArgs {
    /// Run configuration; defaults apply to anything it omits.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Overrides the seed of random presets.
    #[arg(long)]
    seed: Option<u64>,
    /// Skip the parabolicity gate and the parabolicity stop.
    #[arg(long)]
    force: bool,
    /// Overrides the output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct VerifyArgs {
    /// Only the fast subset.
    #[arg(long)]
    quick: bool,
    #[arg(long)]
    json: bool,
    /// Flip the curvature sign convention to exercise the self-test.
    #[arg(long, hide = true)]
    inject_sign_fault: bool,
}

fn read_text(path: &std::path::Path) -> Result<String, Failure> {
    std::fs::read_to_string(path).map_err(|e| Failure::usage(format!("{}: {e}", path.display())))
}

fn dispatch(cli: Cli) -> Result<u8, Failure> {
    match cli.command {
        Command::Symbol(args) => {
            let (sample, file) = match (&args.file, &args.preset) {
                (Some(path), _) => {
                    let parsed = point::parse_point_file(&read_text(path)?)?;
                    (parsed.sample, Some(parsed))
                }
                (None, preset) => {
                    let name = preset.as_deref().unwrap_or("flat");
                    (rgflow::presets::point_preset(name, args.curvature)?, None)
                }
            };
            let kind = match &file {
                Some(f) => f.flow_kind(args.flow.kind.as_deref(), args.flow.a)?,
                None => rgflow::flows::FlowKind::from_name(
                    args.flow.kind.as_deref().unwrap_or("rg2"),
                    args.flow.a.unwrap_or(0.0),
                )?,
            };
            let r = report::symbol_report(&sample, &kind)?;
            if args.json {
                println!("{}", serde_json::to_string_pretty(&r)?);
            } else {
                print!("{}", r.render());
            }
            Ok(u8::from(!r.parabolic))
        }
        Command::Check(args) => {
            let mut cfg = match &args.config {
                Some(path) => config::RunConfig::parse(&read_text(path)?)?,
                None => config::RunConfig::default(),
            };
            if let Some(preset) = args.preset {
                cfg.preset = preset;
                cfg.snapshot = None;
            }
            if args.snapshot.is_some() {
                cfg.snapshot = args.snapshot;
            }
            let p: &mut PresetParams = &mut cfg.params;
            p.n = args.n.unwrap_or(p.n);
            p.seed = args.seed.unwrap_or(p.seed);
            p.amplitude = args.amplitude.unwrap_or(p.amplitude);
            p.curvature = args.curvature.unwrap_or(p.curvature);
            let name = args
                .flow
                .kind
                .as_deref()
                .unwrap_or(cfg.kind.name())
                .to_string();
            cfg.kind = rgflow::flows::FlowKind::from_name(
                &name,
                args.flow.a.unwrap_or(cfg.kind.coupling()),
            )?;
            cfg.validate()?;
            let r = report::check_report(&cfg)?;
            if args.json {
                println!("{}", serde_json::to_string_pretty(&r)?);
            } else {
                print!("{}", r.render());
            }
            Ok(u8::from(!r.parabolic))
        }
        Command::Run(args) => {
            let mut cfg = match &args.config {
                Some(path) => config::RunConfig::parse(&read_text(path)?)?,
                None => config::RunConfig::default(),
            };
            if let Some(seed) = args.seed {
                cfg.params.seed = seed;
            }
            if let Some(out) = args.out {
                cfg.out_dir = out;
            }
            cfg.controls.force |= args.force;
            let summary = run::execute(&cfg)?;
            if args.json {
                println!("{}", serde_json::to_string_pretty(&summary)?);
            } else {
                print!("{}", summary.render(&cfg.out_dir));
            }
            Ok(u8::from(
                summary.stop_reason == rgflow::integrate::StopReason::ParabolicityLost,
            ))
        }
        Command::Verify(args) => {
            let results = rgflow::verify::run_checks(&rgflow::verify::VerifyOptions {
                quick: args.quick,
                sign_fault: args.inject_sign_fault,
            });
            let failed = results.iter().filter(|r| !r.passed).count();
            if args.json {
                println!("{}", serde_json::to_string_pretty(&results)?);
            } else {
                for r in &results {
                    let status = if r.passed { "PASS" } else { "FAIL" };
                    println!("{status} {:<22} {:>8.3}s  {}", r.name, r.seconds, r.detail);
                }
                println!(
                    "{} of {} checks passed",
                    results.len() - failed,
                    results.len()
                );
            }
            Ok(u8::from(failed > 0))
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match dispatch(cli) {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
