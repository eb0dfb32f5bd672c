//! Runs several presets concurrently and aggregates their verdicts.

use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use crate::error::CliError;
use crate::experiment::{run_experiment, ReportDocument, RunOptions};
use crate::presets::{preset, PRESET_NAMES, SUBSPACE_SWEEP};
use crate::sweep::sweep_report;

/// Expands `all` (or an empty list) to every preset plus the subspace sweep.
pub fn expand_names(names: &[String]) -> Vec<String> {
    let everything = || {
        PRESET_NAMES
            .iter()
            .map(|s| s.to_string())
            .chain(std::iter::once(SUBSPACE_SWEEP.to_string()))
            .collect::<Vec<_>>()
    };
    if names.is_empty() {
        return everything();
    }
    let mut out = Vec::new();
    for n in names {
        if n == "all" {
            out.extend(everything());
        } else {
            out.push(n.clone());
        }
    }
    out
}

pub fn run_named(name: &str, opts: &RunOptions) -> Result<ReportDocument, CliError> {
    if name == SUBSPACE_SWEEP {
        let doc = sweep_report(
            opts.samples.unwrap_or(feasibility::regularity::DEFAULT_SAMPLES),
            opts.seed.unwrap_or(0),
        )?;
        if let Some(dir) = &opts.out_dir {
            let path = dir.join(format!("{SUBSPACE_SWEEP}.report.txt"));
            std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
            std::fs::write(&path, crate::experiment::report_file_contents(&doc)).map_err(|e| CliError::io(&path, e))?;
        }
        return Ok(doc);
    }
    run_experiment(&preset(name)?, opts)
}

pub struct SuiteOutcome {
    pub entries: Vec<(String, Result<ReportDocument, CliError>)>,
}

impl SuiteOutcome {
    /// 0 when every verdict passes, 2 if any entry errored, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        if self.entries.iter().any(|(_, r)| r.is_err()) {
            2
        } else if self
            .entries
            .iter()
            .all(|(_, r)| r.as_ref().is_ok_and(ReportDocument::passed))
        {
            0
        } else {
            1
        }
    }
}

/// Runs the named entries on up to `workers` threads; results keep input order.
pub fn run_suite(names: &[String], opts: &RunOptions, workers: usize) -> SuiteOutcome {
    let names = expand_names(names);
    let next = AtomicUsize::new(0);
    let slots: Vec<Mutex<Option<Result<ReportDocument, CliError>>>> = names.iter().map(|_| Mutex::new(None)).collect();
    std::thread::scope(|scope| {
        for _ in 0..workers.clamp(1, names.len().max(1)) {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                if i >= names.len() {
                    break;
                }
                let result = run_named(&names[i], opts);
                *slots[i].lock().expect("no poisoned slots") = Some(result);
            });
        }
    });
    let entries = names
        .into_iter()
        .zip(slots)
        .map(|(n, s)| {
            (
                n,
                s.into_inner()
                    .expect("no poisoned slots")
                    .expect("every slot is filled"),
            )
        })
        .collect();
    SuiteOutcome { entries }
}
