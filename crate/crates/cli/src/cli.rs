//! Command-line interface.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};

use crate::config::{parse_config, ExperimentConfig};
use crate::error::CliError;
use crate::experiment::{run_experiment, run_rates, RunOptions};
use crate::presets::{preset, PRESET_NAMES, SUBSPACE_SWEEP};
use crate::suite::run_suite;

pub const EXIT_PASS: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Parser)]
#[command(
    name = "feasibility",
    version,
    about = "Projection and reflection experiments for two-set feasibility"
)]
pub struct Args {
    #[command(subcommand)]
    pub command: Command,

    /// Seed for the regularity estimators.
    #[arg(long, global = true)]
    pub seed: Option<u32>,
    /// Samples per estimator.
    #[arg(long, global = true)]
    pub samples: Option<usize>,
    #[arg(long, global = true)]
    pub max_iters: Option<usize>,
    #[arg(long, global = true)]
    pub tol: Option<f64>,
    /// Directory for traces and reports.
    #[arg(long, global = true)]
    pub out_dir: Option<PathBuf>,
    /// Concurrent suite entries.
    #[arg(long, global = true, default_value_t = 4)]
    pub workers: usize,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run one experiment from a TOML file or a preset name.
    Run { config: String },
    /// Run presets (default: all of them and the subspace sweep).
    Suite { names: Vec<String> },
    /// List presets, or print one as TOML.
    Presets { name: Option<String> },
    /// Regularity estimates only, without iterating.
    Rates { config: String },
}

impl Args {
    fn options(&self) -> RunOptions {
        RunOptions {
            seed: self.seed,
            samples: self.samples,
            max_iters: self.max_iters,
            tol: self.tol,
            out_dir: self.out_dir.clone(),
        }
    }
}

/// A TOML file when the argument names an existing file, a preset otherwise.
pub fn load_config(arg: &str) -> Result<ExperimentConfig, CliError> {
    let path = Path::new(arg);
    if path.is_file() {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        return parse_config(&text);
    }
    preset(arg)
}

fn execute(args: &Args, out: &mut dyn Write) -> Result<i32, CliError> {
    let opts = args.options();
    match &args.command {
        Command::Run { config } => {
            let doc = run_experiment(&load_config(config)?, &opts)?;
            let _ = write!(out, "{}", doc.render());
            Ok(if doc.passed() { EXIT_PASS } else { EXIT_FAIL })
        }
        Command::Suite { names } => {
            let outcome = run_suite(names, &opts, args.workers);
            for (name, result) in &outcome.entries {
                match result {
                    Ok(doc) => {
                        let failed = doc.verdicts.iter().filter(|v| !v.pass).count();
                        let _ = writeln!(
                            out,
                            "{} {name}: {} verdicts, {failed} failed",
                            if failed == 0 { "PASS" } else { "FAIL" },
                            doc.verdicts.len()
                        );
                        for v in doc.verdicts.iter().filter(|v| !v.pass) {
                            let _ = writeln!(
                                out,
                                "    {} ({}) measured {:?} bound {:?} {}",
                                v.claim, v.check, v.measured, v.bound, v.note
                            );
                        }
                    }
                    Err(e) => {
                        let _ = writeln!(out, "ERROR {name}: {e}");
                    }
                }
            }
            Ok(outcome.exit_code())
        }
        Command::Presets { name: None } => {
            for n in PRESET_NAMES {
                let _ = writeln!(out, "{n}");
            }
            let _ = writeln!(out, "{SUBSPACE_SWEEP}");
            Ok(EXIT_PASS)
        }
        Command::Presets { name: Some(n) } => {
            let _ = write!(out, "{}", preset(n)?.to_toml());
            Ok(EXIT_PASS)
        }
        Command::Rates { config } => {
            let entries = run_rates(&load_config(config)?, &opts)?;
            let _ = writeln!(
                out,
                "{}",
                serde_json::to_string_pretty(&entries).expect("reports serialize")
            );
            Ok(EXIT_PASS)
        }
    }
}

/// Parses `argv` and runs it, returning the process exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    run_with(argv, &mut std::io::stdout(), &mut std::io::stderr())
}

/// [`run`] writing to the given streams.
pub fn run_with<I, T>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args = match Args::try_parse_from(argv) {
        Ok(a) => a,
        Err(e) => {
            let usage = e.use_stderr();
            let text = e.render().to_string();
            let _ = if usage {
                err.write_all(text.as_bytes())
            } else {
                out.write_all(text.as_bytes())
            };
            return if usage { EXIT_USAGE } else { EXIT_PASS };
        }
    };
    match execute(&args, out) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            EXIT_USAGE
        }
    }
}
