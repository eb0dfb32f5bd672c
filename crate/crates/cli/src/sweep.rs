//! Douglas-Rachford on seeded random subspace pairs in R⁵.
//!
//! Pairs of two 3-dimensional subspaces have trivial `A⊥ ∩ B⊥` generically;
//! pairs of two 2-dimensional subspaces never do. Each pair shares a random
//! offset, which is the witness.

use feasibility::driver::{self, StopReason, DEFAULT_TAIL_FRACTION};
use feasibility::linalg::subspace_intersection;
use feasibility::regularity::{self, SAFETY_FACTOR};
use feasibility::{OperatorSpec, SetSpec, SolutionSet};
use serde::Serialize;

use crate::error::CliError;
use crate::experiment::{ReportDocument, RunSummary, Verdict};
use crate::random;

pub const SWEEP_DIM: usize = 5;
pub const SWEEP_PAIRS: usize = 20;
pub const SWEEP_SEED: u64 = 2024;
pub const SWEEP_MAX_ITERS: usize = 20_000;
pub const SWEEP_TOL: f64 = 1e-10;
/// Additive slack on the predicted rate.
pub const RATE_SLACK: f64 = 0.02;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PairOutcome {
    pub index: usize,
    pub dim_a: usize,
    pub dim_b: usize,
    /// `A⊥ ∩ B⊥ = {0}` by the exact rank test.
    pub complements_trivial: bool,
    pub converged: bool,
    pub linear: bool,
    pub observed_rate: Option<f64>,
    pub c: f64,
    pub kappa: f64,
    pub predicted_bound: f64,
    pub final_dist_to_s: f64,
    pub stop_reason: StopReason,
}

impl PairOutcome {
    /// DR converges linearly to `S` exactly when the complements meet trivially.
    pub fn iff_holds(&self) -> bool {
        (self.converged && self.linear) == self.complements_trivial
    }

    pub fn rate_within_bound(&self) -> bool {
        !self.complements_trivial
            || self
                .observed_rate
                .is_some_and(|r| r <= self.predicted_bound + RATE_SLACK)
    }
}

/// Rate of a converged orbit: the fitted rate, or the geometric mean over the
/// whole orbit when it is too short to fit.
fn orbit_rate(trace: &driver::IterationTrace) -> (Option<f64>, bool) {
    match driver::fit_rate(trace, DEFAULT_TAIL_FRACTION) {
        Ok(f) => (Some(f.observed_rate), f.linear),
        Err(_) if trace.stop_reason == StopReason::Tolerance => {
            let d0 = trace.dist_to_s[0];
            let steps = (trace.len() - 1).max(1) as f64;
            let r = if d0 > 0.0 {
                (trace.final_dist_to_s() / d0).powf(1.0 / steps)
            } else {
                0.0
            };
            (Some(r), r < 1.0)
        }
        Err(_) => (None, false),
    }
}

/// One pair of the sweep; pairs `0..10` are (3, 3), the rest (2, 2).
pub fn run_pair(index: usize, samples: usize, seed: u32) -> Result<PairOutcome, CliError> {
    let mut rng = random::rng(SWEEP_SEED.wrapping_add(index as u64));
    let k = if index < SWEEP_PAIRS / 2 { 3 } else { 2 };
    let offset = random::gaussian(&mut rng, SWEEP_DIM);
    let fa = random::subspace(&mut rng, &offset, k);
    let fb = random::subspace(&mut rng, &offset, k);
    let x0 = offset.add_scaled(1.0, &random::gaussian(&mut rng, SWEEP_DIM));
    let complements_trivial =
        subspace_intersection(&fa.complement_basis(), &fb.complement_basis(), SWEEP_DIM).is_empty();
    let c = regularity::exact_subspace_c(&fa, &fb);
    let (a, b) = (SetSpec::affine(fa), SetSpec::affine(fb));
    let sol = SolutionSet::affine_auto(&a, &b, offset.clone())?;
    let delta = x0.distance(&offset).max(1e-3);
    let kappa = regularity::estimate_kappa(&a, &b, &sol, delta, samples, seed)?;
    let op = OperatorSpec::douglas_rachford(a, b)?;
    let trace = driver::iterate(&op, &x0, &sol, SWEEP_MAX_ITERS, SWEEP_TOL)?;
    let converged = trace.stop_reason == StopReason::Tolerance;
    let (observed_rate, linear) = orbit_rate(&trace);
    let k_infl = kappa * SAFETY_FACTOR;
    let predicted_bound = if k_infl > 0.0 {
        (1.0 - (1.0 - c) / (k_infl * k_infl)).max(0.0).sqrt()
    } else {
        1.0
    };
    Ok(PairOutcome {
        index,
        dim_a: k,
        dim_b: k,
        complements_trivial,
        converged,
        linear,
        observed_rate,
        c,
        kappa,
        predicted_bound,
        final_dist_to_s: trace.final_dist_to_s(),
        stop_reason: trace.stop_reason,
    })
}

pub fn run_sweep(samples: usize, seed: u32) -> Result<Vec<PairOutcome>, CliError> {
    (0..SWEEP_PAIRS).map(|i| run_pair(i, samples, seed)).collect()
}

/// The sweep as a report with two verdicts per pair.
pub fn sweep_report(samples: usize, seed: u32) -> Result<ReportDocument, CliError> {
    let pairs = run_sweep(samples, seed)?;
    let mut verdicts = Vec::new();
    let mut runs = Vec::new();
    for p in &pairs {
        verdicts.push(Verdict {
            claim: format!("ac9-pair-{:02}-iff", p.index),
            check: "linear_iff_trivial_complements".into(),
            pass: p.iff_holds(),
            measured: p.observed_rate,
            bound: None,
            note: format!(
                "dims ({}, {}), complements trivial {}, {:?}",
                p.dim_a, p.dim_b, p.complements_trivial, p.stop_reason
            ),
        });
        if p.complements_trivial {
            verdicts.push(Verdict {
                claim: format!("ac9-pair-{:02}-rate", p.index),
                check: "rate_at_most_prediction".into(),
                pass: p.rate_within_bound(),
                measured: p.observed_rate,
                bound: Some(p.predicted_bound + RATE_SLACK),
                note: format!("c {:.6}, kappa {:.6}", p.c, p.kappa),
            });
        }
        runs.push(RunSummary {
            x0: Vec::new(),
            iterations: 0,
            final_dist_to_s: p.final_dist_to_s,
            stop_reason: p.stop_reason,
            ball_exits: 0,
        });
    }
    Ok(ReportDocument {
        name: crate::presets::SUBSPACE_SWEEP.into(),
        algorithm: crate::config::AlgorithmKind::Dr,
        regularity: Vec::new(),
        runs,
        rate_fit: None,
        verdicts,
    })
}
