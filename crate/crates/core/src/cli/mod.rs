//! `dcv verify|compile|bench`.
//!
//! Exit codes: 0 all verified, 1 some property unknown, 2 input error,
//! 3 solver or internal error.

pub mod bench;
pub mod report;

use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::compiler::{compile, Compiled};
use crate::frontend::{diagnostic, load, ValidatedContract};
use crate::inference::{induction_obligations, verify_contract, CandidateOptions, VerifierConfig};
use crate::solver::{script, SolverConfig};

pub use report::{BenchReport, BenchRow, PropertyReport, Report};

pub const EXIT_VERIFIED: i32 = 0;
pub const EXIT_UNKNOWN: i32 = 1;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_SOLVER: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "dcv", version, about = "Safety verifier for DeCon smart contracts")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Prove every violation property of a contract.
    Verify {
        path: PathBuf,
        #[command(flatten)]
        flags: Flags,
    },
    /// Print the compiled transition system.
    Compile {
        path: PathBuf,
        #[command(flatten)]
        flags: Flags,
    },
    /// Verify every `.dcn` file in a directory and tabulate the results.
    Bench {
        dir: PathBuf,
        #[command(flatten)]
        flags: Flags,
        /// Where to write the JSON results [default: <dir>/dcv-bench.json].
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Json,
}

#[derive(Debug, Clone, Args)]
pub struct Flags {
    /// SMT solver executable.
    #[arg(long, env = "DCV_SOLVER", default_value = "z3")]
    pub solver: PathBuf,
    /// Per-query timeout in seconds.
    #[arg(long, default_value_t = 10.0)]
    pub qtimeout: f64,
    /// Total budget per contract in seconds.
    #[arg(long, default_value_t = 3600.0)]
    pub budget: f64,
    /// Write every solver script to this directory.
    #[arg(long, value_name = "DIR")]
    pub dump_smt: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    pub format: Format,
    /// Only generate single-predicate candidates.
    #[arg(long)]
    pub no_pattern2: bool,
    /// Only use predicates at the polarity they were extracted with.
    #[arg(long)]
    pub no_polarity: bool,
    /// Log Houdini rounds.
    #[arg(long)]
    pub trace: bool,
}

impl Flags {
    pub fn verifier_config(&self) -> VerifierConfig {
        let secs = |x: f64| Duration::try_from_secs_f64(x.max(0.0)).unwrap_or(Duration::MAX);
        VerifierConfig {
            solver: SolverConfig {
                dump_dir: self.dump_smt.clone(),
                ..SolverConfig::new(&self.solver)
            },
            qtimeout: secs(self.qtimeout),
            budget: secs(self.budget),
            candidates: CandidateOptions {
                pattern1: true,
                pattern2: !self.no_pattern2,
                polarity: !self.no_polarity,
            },
            ..Default::default()
        }
    }
}

/// Contract loaded and compiled, or the reason it could not be.
pub enum Loaded {
    Ok {
        name: String,
        vc: Box<ValidatedContract>,
        compiled: Box<Compiled>,
    },
    InputError(String),
    InternalError(String),
}

pub fn load_file(path: &Path, format: Format) -> Loaded {
    let file = path.display().to_string();
    let src = match std::fs::read_to_string(path) {
        Ok(s) => s,
        Err(e) => return Loaded::InputError(format!("{file}: error: cannot read: {e}")),
    };
    let name = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    let vc = match load(&name, &src) {
        Ok(vc) => vc,
        Err(diags) => {
            let text = match format {
                Format::Json => diagnostic::to_json(&file, &diags),
                Format::Text => diags.iter().map(|d| d.render(&file)).collect::<Vec<_>>().join("\n"),
            };
            return Loaded::InputError(text);
        }
    };
    match compile(&vc) {
        Ok(c) => Loaded::Ok {
            name,
            vc: Box::new(vc),
            compiled: Box::new(c),
        },
        Err(e) => Loaded::InternalError(format!("{file}: error: {e}")),
    }
}

/// Verify one file. `Err` carries the exit code and message for input
/// and solver errors.
pub fn verify_file(path: &Path, flags: &Flags) -> Result<Report, (i32, String)> {
    let start = Instant::now();
    let (name, vc, compiled) = match load_file(path, flags.format) {
        Loaded::Ok { name, vc, compiled } => (name, vc, compiled),
        Loaded::InputError(m) => return Err((EXIT_INPUT, m)),
        Loaded::InternalError(m) => return Err((EXIT_SOLVER, m)),
    };
    let results = verify_contract(&vc, &compiled, &flags.verifier_config())
        .map_err(|e| (EXIT_SOLVER, format!("{}: error: {e}", path.display())))?;
    let props = results.iter().map(|r| PropertyReport::from_result(r, flags.trace)).collect();
    Ok(Report::new(
        &name,
        &path.display().to_string(),
        vc.rules().len(),
        props,
        start.elapsed().as_secs_f64(),
    ))
}

fn cmd_verify(path: &Path, flags: &Flags, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    match verify_file(path, flags) {
        Ok(r) => {
            let text = match flags.format {
                Format::Json => r.to_json() + "\n",
                Format::Text => r.to_text(),
            };
            let _ = out.write_all(text.as_bytes());
            if r.is_verified() {
                EXIT_VERIFIED
            } else {
                EXIT_UNKNOWN
            }
        }
        Err((code, msg)) => {
            let _ = writeln!(err, "{msg}");
            code
        }
    }
}

/// Base and consecution scripts for every property, `inv = prop`.
pub fn dump_obligations(compiled: &Compiled, dir: &Path) -> std::io::Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir)?;
    let ts = &compiled.system;
    let mut written = Vec::new();
    for p in &ts.properties {
        let obs = induction_obligations(ts, &p.name, &p.formula).map_err(std::io::Error::other)?;
        for o in obs {
            let path = dir.join(crate::solver::driver::dump_file_name(&o.name));
            std::fs::write(&path, script(&o).0)?;
            written.push(path);
        }
    }
    Ok(written)
}

fn cmd_compile(path: &Path, flags: &Flags, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    let compiled = match load_file(path, flags.format) {
        Loaded::Ok { compiled, .. } => compiled,
        Loaded::InputError(m) => {
            let _ = writeln!(err, "{m}");
            return EXIT_INPUT;
        }
        Loaded::InternalError(m) => {
            let _ = writeln!(err, "{m}");
            return EXIT_SOLVER;
        }
    };
    let text = match flags.format {
        Format::Json => serde_json::to_string_pretty(&compiled.system.to_json()).expect("system serializes") + "\n",
        Format::Text => compiled.system.dump(),
    };
    let _ = out.write_all(text.as_bytes());
    if let Some(dir) = &flags.dump_smt {
        if let Err(e) = dump_obligations(&compiled, dir) {
            let _ = writeln!(err, "{}: error: {e}", dir.display());
            return EXIT_INPUT;
        }
    }
    EXIT_VERIFIED
}

/// Run with explicit arguments and streams; returns the exit code.
pub fn run_with<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            if e.use_stderr() {
                let _ = write!(err, "{e}");
                return EXIT_INPUT;
            }
            let _ = write!(out, "{e}");
            return EXIT_VERIFIED;
        }
    };
    match &cli.command {
        Command::Verify { path, flags } => cmd_verify(path, flags, out, err),
        Command::Compile { path, flags } => cmd_compile(path, flags, out, err),
        Command::Bench { dir, flags, out: json } => bench::cmd_bench(dir, flags, json.as_deref(), out, err),
    }
}

pub fn main() -> i32 {
    let args: Vec<std::ffi::OsString> = std::env::args_os().collect();
    run_with(args, &mut std::io::stdout(), &mut std::io::stderr())
}
