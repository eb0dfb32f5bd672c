//! Runs a configured experiment: estimators, iteration, checks and outputs.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use feasibility::driver::{self, IterationTrace, RateFit, StopReason, DEFAULT_TAIL_FRACTION};
use feasibility::regularity::{self, RateInputs, RegularityReport, LIMITING_SAMPLES, SAFETY_FACTOR};
use feasibility::{Point, SetSpec};
use serde::Serialize;

use crate::config::{AlgorithmKind, Check, ExperimentConfig, Problem, StartConfig};
use crate::error::CliError;

/// Command-line overrides applied on top of a configuration.
#[derive(Clone, Debug, Default)]
pub struct RunOptions {
    pub seed: Option<u32>,
    pub samples: Option<usize>,
    pub max_iters: Option<usize>,
    pub tol: Option<f64>,
    /// Directory for outputs; relative output paths resolve against it.
    pub out_dir: Option<PathBuf>,
}

impl RunOptions {
    pub fn apply(&self, cfg: &mut ExperimentConfig) {
        if let Some(s) = self.seed {
            cfg.regularity.seed = s;
        }
        if let Some(n) = self.samples {
            cfg.regularity.samples = n;
        }
        if let Some(n) = self.max_iters {
            cfg.budget.max_iters = n;
        }
        if let Some(t) = self.tol {
            cfg.budget.tol = t;
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DeltaEntry {
    pub delta: f64,
    pub estimated: RegularityReport,
    pub inflated: RegularityReport,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RunSummary {
    pub x0: Vec<f64>,
    pub iterations: usize,
    pub final_dist_to_s: f64,
    pub stop_reason: StopReason,
    pub ball_exits: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Verdict {
    pub claim: String,
    pub check: String,
    pub pass: bool,
    pub measured: Option<f64>,
    pub bound: Option<f64>,
    #[serde(skip_serializing_if = "String::is_empty")]
    pub note: String,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ReportDocument {
    pub name: String,
    pub algorithm: AlgorithmKind,
    pub regularity: Vec<DeltaEntry>,
    pub runs: Vec<RunSummary>,
    pub rate_fit: Option<RateFit>,
    pub verdicts: Vec<Verdict>,
}

impl ReportDocument {
    pub fn passed(&self) -> bool {
        self.verdicts.iter().all(|v| v.pass)
    }

    /// Human-readable summary followed by the JSON document.
    pub fn render(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "experiment: {}", self.name);
        let _ = writeln!(out, "algorithm: {:?}", self.algorithm);
        for e in &self.regularity {
            let r = &e.estimated;
            let _ = writeln!(
                out,
                "delta {:.6}: eps_a {:.3e} eps_b {:.3e} kappa {:.6} c {:.6} rate_map {:.6} rate_dr {:.6} (inflated {:.6} / {:.6})",
                e.delta,
                r.eps_a,
                r.eps_b,
                r.kappa,
                r.c,
                r.predicted_rate_map,
                r.predicted_rate_dr,
                e.inflated.predicted_rate_map,
                e.inflated.predicted_rate_dr,
            );
        }
        for (i, r) in self.runs.iter().enumerate().take(5) {
            let _ = writeln!(
                out,
                "run {i}: {} iterations, dist_S {:.3e}, {:?}",
                r.iterations, r.final_dist_to_s, r.stop_reason
            );
        }
        if self.runs.len() > 5 {
            let _ = writeln!(out, "... {} runs in total", self.runs.len());
        }
        if let Some(f) = &self.rate_fit {
            let _ = writeln!(
                out,
                "rate fit: observed {:.6}, r² {:.6}, linear {}",
                f.observed_rate, f.r_squared, f.linear
            );
        }
        for v in &self.verdicts {
            let _ = write!(
                out,
                "[{}] {} ({})",
                if v.pass { "PASS" } else { "FAIL" },
                v.claim,
                v.check
            );
            if let Some(m) = v.measured {
                let _ = write!(out, " measured {m:.6e}");
            }
            if let Some(b) = v.bound {
                let _ = write!(out, " bound {b:.6e}");
            }
            if !v.note.is_empty() {
                let _ = write!(out, " - {}", v.note);
            }
            out.push('\n');
        }
        out.push_str("--- json ---\n");
        out.push_str(&serde_json::to_string_pretty(self).expect("reports serialize"));
        out.push('\n');
        out
    }
}

/// The report file: one timestamp line, then [`ReportDocument::render`].
pub fn report_file_contents(doc: &ReportDocument) -> String {
    format!(
        "# generated {}\n{}",
        chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true),
        doc.render()
    )
}

/// Estimated constants of the configured pair on `B_delta(x̂)`.
pub fn estimate_inputs(problem: &Problem, delta: f64, samples: usize, seed: u32) -> Result<RateInputs, CliError> {
    let Problem { a, b, solution, .. } = problem;
    let xhat = solution.witness();
    let eps = |s: &SetSpec, salt: u32| -> Result<f64, CliError> {
        if s.is_convex() {
            return Ok(0.0);
        }
        Ok(regularity::estimate_subregularity(
            s,
            solution,
            delta,
            samples,
            seed.wrapping_add(salt),
        )?)
    };
    let eps_a = eps(a, 0)?;
    let eps_b = eps(b, 10)?;
    let kappa = regularity::estimate_kappa(a, b, solution, delta, samples, seed.wrapping_add(20))?;
    let c = regularity::estimate_c(a, b, xhat, delta, samples, seed.wrapping_add(30))?;
    let friedrichs_cos = match (a.as_frame(), b.as_frame()) {
        (Some(fa), Some(fb)) => Some(regularity::friedrichs_cosine(fa, fb)?),
        _ => None,
    };
    let strongly_regular = regularity::check_strong_regularity(a, b, xhat, delta, LIMITING_SAMPLES)?;
    Ok(RateInputs {
        eps_a,
        eps_b,
        delta,
        kappa,
        c,
        friedrichs_cos,
        strongly_regular,
        a_convex: a.is_convex(),
        b_convex: b.is_convex(),
        b_affine: b.is_affine(),
    })
}

/// The configured radii, or `{1, ½, ¼, ⅛}` times the start's distance to the witness.
pub fn delta_sweep(cfg: &ExperimentConfig, problem: &Problem) -> Vec<f64> {
    if !cfg.regularity.deltas.is_empty() {
        return cfg.regularity.deltas.clone();
    }
    let base = match &cfg.start {
        StartConfig::Region { radius, .. } => *radius,
        StartConfig::Point { .. } => problem.starts[0].distance(problem.solution.witness()),
    };
    let base = if base > 0.0 { base } else { 1.0 };
    [1.0, 0.5, 0.25, 0.125].iter().map(|f| f * base).collect()
}

fn regularity_entries(cfg: &ExperimentConfig, problem: &Problem) -> Result<Vec<DeltaEntry>, CliError> {
    delta_sweep(cfg, problem)
        .into_iter()
        .map(|delta| {
            let inputs = estimate_inputs(problem, delta, cfg.regularity.samples, cfg.regularity.seed)?;
            Ok(DeltaEntry {
                delta,
                estimated: regularity::predicted_rates(&inputs)?,
                inflated: regularity::predicted_rates(&inputs.inflated(SAFETY_FACTOR))?,
            })
        })
        .collect()
}

/// Estimators only: the regularity sweep without iterating.
pub fn run_rates(cfg: &ExperimentConfig, opts: &RunOptions) -> Result<Vec<DeltaEntry>, CliError> {
    let mut cfg = cfg.clone();
    opts.apply(&mut cfg);
    let problem = cfg.build()?;
    regularity_entries(&cfg, &problem)
}

struct Context<'a> {
    cfg: &'a ExperimentConfig,
    problem: &'a Problem,
    regularity: &'a [DeltaEntry],
    traces: &'a [IterationTrace],
    fit: Option<&'a RateFit>,
}

fn verdict(claim: &str, check: &Check, pass: bool, measured: Option<f64>, bound: Option<f64>) -> Verdict {
    Verdict {
        claim: claim.into(),
        check: check_name(check).into(),
        pass,
        measured,
        bound,
        note: String::new(),
    }
}

fn check_name(check: &Check) -> &'static str {
    match check {
        Check::Converges { .. } => "converges",
        Check::FinalDistAtMost { .. } => "final_dist_at_most",
        Check::Rate { .. } => "rate",
        Check::RateAtMost { .. } => "rate_at_most",
        Check::Linear { .. } => "linear",
        Check::Stagnates { .. } => "stagnates",
        Check::PredictedBound { .. } => "predicted_bound",
        Check::StronglyRegular { .. } => "strongly_regular",
        Check::Friedrichs { .. } => "friedrichs",
        Check::NormalAngle { .. } => "normal_angle",
        Check::Subregularity { .. } => "subregularity",
        Check::PairRegularity { .. } => "pair_regularity",
        Check::ZeroNormalCone { .. } => "zero_normal_cone",
        Check::FixedPointOffSolution { .. } => "fixed_point_off_solution",
    }
}

fn flag(b: bool) -> f64 {
    if b {
        1.0
    } else {
        0.0
    }
}

impl Context<'_> {
    fn largest_delta(&self) -> Option<&DeltaEntry> {
        self.regularity.iter().max_by(|x, y| x.delta.total_cmp(&y.delta))
    }

    fn set(&self, name: &str) -> Result<SetSpec, CliError> {
        self.cfg.sets[name].build(&format!("sets.{name}"))
    }

    fn evaluate(&self, claim: &str, check: &Check) -> Result<Verdict, CliError> {
        let worst_final = self
            .traces
            .iter()
            .map(IterationTrace::final_dist_to_s)
            .fold(0.0f64, f64::max);
        let first = &self.traces[0];
        let rate = self.fit.map(|f| f.observed_rate);
        let no_fit = |mut v: Verdict| {
            if self.fit.is_none() {
                v.note = "no rate fit: too few iterates above the fit floor".into();
            }
            v
        };
        let witness = self.problem.solution.witness();
        let v = match check {
            Check::Converges { tol } => verdict(claim, check, worst_final < *tol, Some(worst_final), Some(*tol)),
            Check::FinalDistAtMost { bound } => {
                verdict(claim, check, worst_final <= *bound, Some(worst_final), Some(*bound))
            }
            Check::Rate { target, tolerance } => no_fit(verdict(
                claim,
                check,
                rate.is_some_and(|r| (r - target).abs() <= *tolerance),
                rate,
                Some(*target),
            )),
            Check::RateAtMost { bound } => no_fit(verdict(
                claim,
                check,
                rate.is_some_and(|r| r <= *bound),
                rate,
                Some(*bound),
            )),
            Check::Linear { expected } => {
                let linear = self.fit.map(|f| f.linear);
                no_fit(verdict(
                    claim,
                    check,
                    linear == Some(*expected),
                    self.fit.map(|f| f.r_squared),
                    None,
                ))
            }
            Check::Stagnates { dist, tolerance } => {
                let d = first.final_dist_to_s();
                let mut v = verdict(
                    claim,
                    check,
                    first.stop_reason == StopReason::Stagnation && (d - dist).abs() <= *tolerance,
                    Some(d),
                    Some(*dist),
                );
                v.note = format!("stop reason {:?}", first.stop_reason);
                v
            }
            Check::PredictedBound { algorithm } => {
                let guaranteed = self
                    .regularity
                    .iter()
                    .filter(|e| match algorithm {
                        AlgorithmKind::Map => e.inflated.map_guarantee,
                        AlgorithmKind::Dr => e.inflated.dr_guarantee,
                    })
                    .max_by(|x, y| x.delta.total_cmp(&y.delta));
                match guaranteed {
                    Some(e) => {
                        let bound = match algorithm {
                            AlgorithmKind::Map => e.inflated.predicted_rate_map,
                            AlgorithmKind::Dr => e.inflated.predicted_rate_dr,
                        };
                        let mut v = no_fit(verdict(
                            claim,
                            check,
                            rate.is_some_and(|r| r <= bound),
                            rate,
                            Some(bound),
                        ));
                        if v.note.is_empty() {
                            v.note = format!("delta {:.6}", e.delta);
                        }
                        v
                    }
                    None => {
                        let mut v = verdict(claim, check, false, rate, None);
                        v.note = "no delta in the sweep satisfies the rate hypotheses".into();
                        v
                    }
                }
            }
            Check::StronglyRegular { expected } => {
                let delta = self.largest_delta().map_or(1.0, |e| e.delta);
                let got = regularity::check_strong_regularity(
                    &self.problem.a,
                    &self.problem.b,
                    witness,
                    delta,
                    LIMITING_SAMPLES,
                )?;
                verdict(claim, check, got == *expected, Some(flag(got)), Some(flag(*expected)))
            }
            Check::Friedrichs { target, tolerance } => match (self.problem.a.as_frame(), self.problem.b.as_frame()) {
                (Some(fa), Some(fb)) => {
                    let cf = regularity::friedrichs_cosine(fa, fb)?;
                    verdict(claim, check, (cf - target).abs() <= *tolerance, Some(cf), Some(*target))
                }
                _ => {
                    let mut v = verdict(claim, check, false, None, Some(*target));
                    v.note = "both sets must be affine".into();
                    v
                }
            },
            Check::NormalAngle { target, tolerance } => {
                let c = self.largest_delta().map(|e| e.estimated.c);
                verdict(
                    claim,
                    check,
                    c.is_some_and(|c| (c - target).abs() <= *tolerance),
                    c,
                    Some(*target),
                )
            }
            Check::Subregularity { set, min, max } => {
                let s = self.set(set)?;
                let delta = self.largest_delta().map_or(1.0, |e| e.delta);
                let eps = regularity::estimate_subregularity(
                    &s,
                    &self.problem.solution,
                    delta,
                    self.cfg.regularity.samples,
                    self.cfg.regularity.seed,
                )?;
                verdict(claim, check, (*min..=*max).contains(&eps), Some(eps), Some(*max))
            }
            Check::PairRegularity { set, delta, min, max } => {
                let s = self.set(set)?;
                let eps = regularity::estimate_pair_regularity(
                    &s,
                    witness,
                    *delta,
                    self.cfg.regularity.samples,
                    self.cfg.regularity.seed,
                )?;
                verdict(claim, check, (*min..=*max).contains(&eps), Some(eps), Some(*max))
            }
            Check::ZeroNormalCone { set } => {
                let cone = self.set(set)?.proximal_cone(witness)?;
                verdict(claim, check, cone.is_zero(), None, None)
            }
            Check::FixedPointOffSolution {
                radius,
                samples,
                min_dist,
            } => {
                let probe = driver::probe_fixed_points(
                    &self.problem.operator,
                    witness,
                    *radius,
                    *samples,
                    self.cfg.regularity.seed,
                    &self.problem.solution,
                    self.cfg.budget.max_iters,
                    self.cfg.budget.tol,
                )?;
                let far = probe.limits.iter().map(|l| l.dist_to_s).fold(0.0f64, f64::max);
                let mut v = verdict(claim, check, far > *min_dist, Some(far), Some(*min_dist));
                v.note = format!(
                    "{} of {} limits off S",
                    probe.off_solution(*min_dist).count(),
                    probe.limits.len()
                );
                v
            }
        };
        Ok(v)
    }
}

fn resolve(path: &str, out_dir: Option<&Path>) -> PathBuf {
    match out_dir {
        Some(dir) => dir.join(path),
        None => PathBuf::from(path),
    }
}

fn write_file(path: &Path, contents: &str) -> Result<(), CliError> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent).map_err(|e| CliError::io(parent, e))?;
    }
    fs::write(path, contents).map_err(|e| CliError::io(path, e))
}

/// CSV of the trace keeping every `stride`-th row and the last one.
pub fn strided_csv(trace: &IterationTrace, stride: usize) -> String {
    let full = trace.to_csv();
    if stride <= 1 {
        return full;
    }
    let mut lines = full.lines();
    let mut out = String::new();
    if let Some(header) = lines.next() {
        out.push_str(header);
        out.push('\n');
    }
    let rows: Vec<&str> = lines.collect();
    for (n, row) in rows.iter().enumerate() {
        if n % stride == 0 || n + 1 == rows.len() {
            out.push_str(row);
            out.push('\n');
        }
    }
    out
}

/// Runs the estimators, the iteration from every start and the checks.
/// Writes the trace and the report when output paths are configured or an
/// output directory is given.
pub fn run_experiment(cfg: &ExperimentConfig, opts: &RunOptions) -> Result<ReportDocument, CliError> {
    let mut cfg = cfg.clone();
    opts.apply(&mut cfg);
    let problem = cfg.build()?;
    let regularity = regularity_entries(&cfg, &problem)?;
    let watch_radius = regularity.iter().map(|e| e.delta).fold(0.0f64, f64::max);
    let traces = problem
        .starts
        .iter()
        .map(|x0| {
            driver::iterate_watched(
                &problem.operator,
                x0,
                &problem.solution,
                cfg.budget.max_iters,
                cfg.budget.tol,
                Some((problem.solution.witness(), watch_radius)),
            )
        })
        .collect::<Result<Vec<_>, _>>()?;
    let fit = driver::fit_rate(&traces[0], DEFAULT_TAIL_FRACTION).ok();
    let ctx = Context {
        cfg: &cfg,
        problem: &problem,
        regularity: &regularity,
        traces: &traces,
        fit: fit.as_ref(),
    };
    let verdicts = cfg
        .checks
        .iter()
        .map(|c| ctx.evaluate(&c.claim, &c.check))
        .collect::<Result<Vec<_>, _>>()?;
    let runs = problem
        .starts
        .iter()
        .zip(&traces)
        .map(|(x0, t): (&Point, &IterationTrace)| RunSummary {
            x0: x0.coords().to_vec(),
            iterations: t.len() - 1,
            final_dist_to_s: t.final_dist_to_s(),
            stop_reason: t.stop_reason,
            ball_exits: t.ball_exits.len(),
        })
        .collect();
    let doc = ReportDocument {
        name: cfg.name.clone(),
        algorithm: cfg.algorithm.kind,
        regularity,
        runs,
        rate_fit: fit,
        verdicts,
    };

    let out_dir = opts.out_dir.as_deref();
    let csv_path = cfg
        .outputs
        .trace_csv
        .as_deref()
        .map(|p| resolve(p, out_dir))
        .or_else(|| out_dir.map(|d| d.join(format!("{}.csv", cfg.name))));
    let report_path = cfg
        .outputs
        .report
        .as_deref()
        .map(|p| resolve(p, out_dir))
        .or_else(|| out_dir.map(|d| d.join(format!("{}.report.txt", cfg.name))));
    if let Some(path) = csv_path {
        write_file(&path, &strided_csv(&traces[0], cfg.outputs.csv_stride.unwrap_or(1)))?;
    }
    if let Some(path) = report_path {
        write_file(&path, &report_file_contents(&doc))?;
    }
    Ok(doc)
}
