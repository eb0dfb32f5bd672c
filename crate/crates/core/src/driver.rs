//! Picard iteration of fixed-point operators, rate fitting and fixed-point probes.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{orthonormalize, subspace_intersection, AffineFrame, Point};
use crate::operators::OperatorSpec;
use crate::regularity::sampling::ball_points;
use crate::regularity::SolutionSet;
use crate::sets::SetSpec;

/// Steps shorter than this off `S` count as a fixed point.
pub const STAGNATION_TOL: f64 = 1e-15;

/// Iterates longer than this count as divergence.
pub const DIVERGENCE_NORM: f64 = 1e12;

/// Distances at or below this are excluded from rate fits.
pub const FIT_FLOOR: f64 = 1e-14;

/// Minimum number of usable entries for a rate fit.
pub const MIN_FIT_ENTRIES: usize = 10;

pub const DEFAULT_TAIL_FRACTION: f64 = 0.5;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    Tolerance,
    MaxIters,
    Stagnation,
    Divergence,
}

/// The orbit `x₀, x₁ = T x₀, …` with per-iterate diagnostics.
///
/// All lists are indexed by iterate; `step_norms[n] = ‖T x_n − x_n‖`, which for
/// every iterate but the last equals `‖x_{n+1} − x_n‖`.
#[derive(Clone, Debug, PartialEq)]
pub struct IterationTrace {
    pub iterates: Vec<Point>,
    pub dist_to_a: Vec<f64>,
    pub dist_to_b: Vec<f64>,
    pub dist_to_s: Vec<f64>,
    pub step_norms: Vec<f64>,
    pub stop_reason: StopReason,
    /// Indices of iterates outside the watch ball, if one was given.
    pub ball_exits: Vec<usize>,
}

impl IterationTrace {
    pub fn len(&self) -> usize {
        self.iterates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.iterates.is_empty()
    }

    pub fn last(&self) -> &Point {
        self.iterates.last().expect("traces hold at least one iterate")
    }

    pub fn final_dist_to_s(&self) -> f64 {
        *self.dist_to_s.last().expect("traces hold at least one iterate")
    }

    /// CSV with columns `iter, x_0..x_{d-1}, dist_A, dist_B, dist_S, step_norm`.
    pub fn to_csv(&self) -> String {
        let dim = self.iterates.first().map_or(0, Point::dim);
        let mut out = String::from("iter");
        for i in 0..dim {
            let _ = write!(out, ",x_{i}");
        }
        out.push_str(",dist_A,dist_B,dist_S,step_norm\n");
        for (n, x) in self.iterates.iter().enumerate() {
            let _ = write!(out, "{n}");
            for v in x.coords() {
                let _ = write!(out, ",{v}");
            }
            let _ = writeln!(
                out,
                ",{},{},{},{}",
                self.dist_to_a[n], self.dist_to_b[n], self.dist_to_s[n], self.step_norms[n]
            );
        }
        out
    }
}

fn pair_of(sol: &SolutionSet) -> (&SetSpec, &SetSpec) {
    match sol.description() {
        SetSpec::Intersection(members) if members.len() == 2 => (&members[0], &members[1]),
        _ => unreachable!("solution sets describe a pair"),
    }
}

/// Iterates `op` from `x0` on the selected branch.
pub fn iterate(op: &OperatorSpec, x0: &Point, sol: &SolutionSet, max_iters: usize, tol: f64) -> Result<IterationTrace> {
    iterate_watched(op, x0, sol, max_iters, tol, None)
}

/// [`iterate`], recording iterates that leave `watch = (center, radius)`.
pub fn iterate_watched(
    op: &OperatorSpec,
    x0: &Point,
    sol: &SolutionSet,
    max_iters: usize,
    tol: f64,
    watch: Option<(&Point, f64)>,
) -> Result<IterationTrace> {
    if max_iters == 0 {
        return Err(Error::InvalidParameter("max_iters must be at least 1".into()));
    }
    if tol.is_nan() || tol <= 0.0 {
        return Err(Error::InvalidParameter(format!("tol must be positive, got {tol}")));
    }
    if x0.dim() != op.dim() {
        return Err(Error::DimensionMismatch {
            expected: op.dim(),
            found: x0.dim(),
        });
    }
    let (a, b) = pair_of(sol);
    let mut trace = IterationTrace {
        iterates: Vec::new(),
        dist_to_a: Vec::new(),
        dist_to_b: Vec::new(),
        dist_to_s: Vec::new(),
        step_norms: Vec::new(),
        stop_reason: StopReason::MaxIters,
        ball_exits: Vec::new(),
    };
    let mut x = x0.clone();
    for n in 0.. {
        let ds = sol.distance(&x)?;
        let next = op.apply(&x)?.selected;
        let step = next.distance(&x);
        if let Some((center, radius)) = watch {
            if x.distance(center) > radius {
                trace.ball_exits.push(n);
            }
        }
        trace.dist_to_a.push(a.distance(&x)?);
        trace.dist_to_b.push(b.distance(&x)?);
        trace.dist_to_s.push(ds);
        trace.step_norms.push(step);
        trace.iterates.push(x);
        if ds < tol {
            trace.stop_reason = StopReason::Tolerance;
            break;
        }
        if n == max_iters {
            trace.stop_reason = StopReason::MaxIters;
            break;
        }
        if step < STAGNATION_TOL {
            trace.stop_reason = StopReason::Stagnation;
            break;
        }
        if !next.is_finite() || next.norm() > DIVERGENCE_NORM {
            trace.stop_reason = StopReason::Divergence;
            break;
        }
        x = next;
    }
    Ok(trace)
}

/// Log-linear fit of `dist_to_s` over the tail of a trace.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RateFit {
    /// `exp` of the least-squares slope of `ln dist_to_s` per iterate.
    pub observed_rate: f64,
    /// `(d_last / d_first)^(1 / steps)` over the same tail.
    pub geometric_mean: f64,
    pub r_squared: f64,
    pub tail_start: usize,
    pub linear: bool,
}

/// Fits the trailing `tail_fraction` of the entries with `dist_to_s > 1e-14`.
pub fn fit_rate(trace: &IterationTrace, tail_fraction: f64) -> Result<RateFit> {
    if !(tail_fraction > 0.0 && tail_fraction <= 1.0) {
        return Err(Error::InvalidParameter(format!(
            "tail_fraction must lie in (0, 1], got {tail_fraction}"
        )));
    }
    let usable: Vec<(f64, f64)> = trace
        .dist_to_s
        .iter()
        .enumerate()
        .filter(|(_, d)| d.is_finite() && **d > FIT_FLOOR)
        .map(|(n, d)| (n as f64, d.ln()))
        .collect();
    if usable.len() < MIN_FIT_ENTRIES {
        return Err(Error::InsufficientData {
            usable: usable.len(),
            required: MIN_FIT_ENTRIES,
        });
    }
    let take = ((usable.len() as f64 * tail_fraction).ceil() as usize).clamp(2, usable.len());
    let tail = &usable[usable.len() - take..];
    let m = tail.len() as f64;
    let mean_x = tail.iter().map(|p| p.0).sum::<f64>() / m;
    let mean_y = tail.iter().map(|p| p.1).sum::<f64>() / m;
    let sxx: f64 = tail.iter().map(|p| (p.0 - mean_x).powi(2)).sum();
    let sxy: f64 = tail.iter().map(|p| (p.0 - mean_x) * (p.1 - mean_y)).sum();
    let syy: f64 = tail.iter().map(|p| (p.1 - mean_y).powi(2)).sum();
    let slope = sxy / sxx;
    let ss_res: f64 = tail
        .iter()
        .map(|p| (p.1 - mean_y - slope * (p.0 - mean_x)).powi(2))
        .sum();
    let r_squared = if syy <= 1e-30 * m {
        1.0
    } else {
        (1.0 - ss_res / syy).clamp(0.0, 1.0)
    };
    let (first, last) = (tail[0], tail[tail.len() - 1]);
    let geometric_mean = ((last.1 - first.1) / (last.0 - first.0)).exp();
    let observed_rate = slope.exp();
    Ok(RateFit {
        observed_rate,
        geometric_mean,
        r_squared,
        tail_start: first.0 as usize,
        linear: r_squared >= 0.98 && observed_rate <= 0.999,
    })
}

/// Limit of one probe orbit.
#[derive(Clone, Debug, PartialEq)]
pub struct ProbeLimit {
    pub start: Point,
    pub point: Point,
    pub dist_to_s: f64,
    pub stop_reason: StopReason,
}

#[derive(Clone, Debug, PartialEq)]
pub struct FixedPointProbe {
    pub limits: Vec<ProbeLimit>,
    /// `x̂ + (A∩B) + (A⊥∩B⊥)` for Douglas-Rachford on two affine sets.
    pub exact_fixed_set: Option<AffineFrame>,
}

impl FixedPointProbe {
    /// Limits farther than `threshold` from `S`.
    pub fn off_solution(&self, threshold: f64) -> impl Iterator<Item = &ProbeLimit> {
        self.limits.iter().filter(move |l| l.dist_to_s > threshold)
    }
}

/// Iterates from `samples` seeded starts in `B_radius(center)` and collects the limits.
#[allow(clippy::too_many_arguments)]
pub fn probe_fixed_points(
    op: &OperatorSpec,
    center: &Point,
    radius: f64,
    samples: usize,
    seed: u32,
    sol: &SolutionSet,
    max_iters: usize,
    tol: f64,
) -> Result<FixedPointProbe> {
    let mut limits = Vec::with_capacity(samples);
    for start in ball_points(center, radius, samples, seed) {
        let trace = iterate(op, &start, sol, max_iters, tol)?;
        limits.push(ProbeLimit {
            point: trace.last().clone(),
            dist_to_s: trace.final_dist_to_s(),
            stop_reason: trace.stop_reason,
            start,
        });
    }
    Ok(FixedPointProbe {
        limits,
        exact_fixed_set: exact_dr_fixed_set(op, sol)?,
    })
}

/// `Fix T_DR` for two affine sets through the witness.
pub fn exact_dr_fixed_set(op: &OperatorSpec, sol: &SolutionSet) -> Result<Option<AffineFrame>> {
    let OperatorSpec::DouglasRachford { a, b } = op else {
        return Ok(None);
    };
    let (Some(fa), Some(fb)) = (a.as_frame(), b.as_frame()) else {
        return Ok(None);
    };
    let dim = fa.dim_ambient();
    let mut spanning = subspace_intersection(fa.basis(), fb.basis(), dim);
    spanning.extend(subspace_intersection(
        &fa.complement_basis(),
        &fb.complement_basis(),
        dim,
    ));
    let basis = orthonormalize(&spanning)?;
    Ok(Some(AffineFrame::from_orthonormal(sol.witness().clone(), basis)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::FRAC_1_SQRT_2;

    fn p(c: &[f64]) -> Point {
        Point::from_slice(c).unwrap()
    }

    fn line(dir: &[f64]) -> SetSpec {
        SetSpec::affine(AffineFrame::linear(dir.len(), &[p(dir)]).unwrap())
    }

    fn lines(dim: usize) -> (SetSpec, SetSpec, SolutionSet) {
        let mut e1 = vec![0.0; dim];
        e1[0] = 1.0;
        let mut d = vec![0.0; dim];
        d[0] = 1.0;
        d[1] = 1.0;
        let (a, b) = (line(&e1), line(&d));
        let sol = SolutionSet::singleton(&a, &b, Point::zeros(dim)).unwrap();
        (a, b, sol)
    }

    #[test]
    fn map_cascade_halves() {
        let (a, b, sol) = lines(2);
        let op = OperatorSpec::map(a, b).unwrap();
        let trace = iterate(&op, &p(&[1.0, 0.0]), &sol, 1000, 1e-10).unwrap();
        assert_eq!(trace.stop_reason, StopReason::Tolerance);
        for (n, x) in trace.iterates.iter().enumerate() {
            assert!(x.approx_eq(&p(&[0.5f64.powi(n as i32), 0.0]), 1e-15));
        }
        let fit = fit_rate(&trace, 0.5).unwrap();
        assert_abs_diff_eq!(fit.observed_rate, 0.5, epsilon = 1e-9);
        assert!(fit.linear);
    }

    #[test]
    fn dr_on_lines_contracts_by_cosine() {
        let (a, b, sol) = lines(2);
        let op = OperatorSpec::douglas_rachford(a, b).unwrap();
        let trace = iterate(&op, &p(&[1.0, 0.0]), &sol, 1000, 1e-10).unwrap();
        assert_eq!(trace.stop_reason, StopReason::Tolerance);
        let fit = fit_rate(&trace, 0.5).unwrap();
        assert_abs_diff_eq!(fit.observed_rate, FRAC_1_SQRT_2, epsilon = 1e-9);
    }

    #[test]
    fn dr_stagnates_off_the_plane() {
        let (a, b, sol) = lines(3);
        let op = OperatorSpec::douglas_rachford(a, b).unwrap();
        let trace = iterate(&op, &p(&[0.0, 0.0, 1.0]), &sol, 100, 1e-10).unwrap();
        assert_eq!(trace.stop_reason, StopReason::Stagnation);
        assert_eq!(trace.len(), 1);
        assert_eq!(trace.final_dist_to_s(), 1.0);
    }

    #[test]
    fn start_in_solution_stops_immediately() {
        let (a, b, sol) = lines(2);
        let op = OperatorSpec::map(a, b).unwrap();
        let trace = iterate(&op, &p(&[0.0, 0.0]), &sol, 10, 1e-10).unwrap();
        assert_eq!(trace.stop_reason, StopReason::Tolerance);
        assert_eq!(trace.len(), 1);
    }

    #[test]
    fn lists_share_length_and_steps_match() {
        let (a, b, sol) = lines(2);
        let op = OperatorSpec::douglas_rachford(a, b).unwrap();
        let trace = iterate(&op, &p(&[0.3, 2.0]), &sol, 7, 1e-30).unwrap();
        assert_eq!(trace.stop_reason, StopReason::MaxIters);
        assert_eq!(trace.len(), 8);
        for list in [&trace.dist_to_a, &trace.dist_to_b, &trace.dist_to_s, &trace.step_norms] {
            assert_eq!(list.len(), trace.len());
        }
        for n in 0..trace.len() - 1 {
            assert_eq!(trace.step_norms[n], trace.iterates[n + 1].distance(&trace.iterates[n]));
        }
    }

    #[test]
    fn divergence_is_detected() {
        let axis = line(&[1.0, 0.0]);
        let sol = SolutionSet::singleton(&axis, &axis, p(&[0.0, 0.0])).unwrap();
        // 2(2R − I) − I = 4R − 3I scales x₂ by −7.
        let op = OperatorSpec::companion(OperatorSpec::companion(OperatorSpec::reflector(axis)));
        let trace = iterate(&op, &p(&[0.0, 1.0]), &sol, 1000, 1e-10).unwrap();
        assert_eq!(trace.stop_reason, StopReason::Divergence);
    }

    #[test]
    fn watch_ball_records_exits() {
        let (a, b, sol) = lines(2);
        let op = OperatorSpec::map(a, b).unwrap();
        let trace = iterate_watched(&op, &p(&[1.0, 0.0]), &sol, 100, 1e-10, Some((&p(&[0.0, 0.0]), 0.3))).unwrap();
        assert_eq!(trace.ball_exits, vec![0, 1]);
    }

    #[test]
    fn geometric_fit() {
        let trace = IterationTrace {
            iterates: vec![Point::zeros(1); 30],
            dist_to_a: vec![0.0; 30],
            dist_to_b: vec![0.0; 30],
            dist_to_s: (0..30).map(|n| 0.5f64.powi(n)).collect(),
            step_norms: vec![0.0; 30],
            stop_reason: StopReason::MaxIters,
            ball_exits: vec![],
        };
        let fit = fit_rate(&trace, 0.5).unwrap();
        assert_abs_diff_eq!(fit.observed_rate, 0.5, epsilon = 1e-12);
        assert_abs_diff_eq!(fit.geometric_mean, 0.5, epsilon = 1e-12);
        assert_abs_diff_eq!(fit.r_squared, 1.0, epsilon = 1e-12);
        assert_eq!(fit.tail_start, 15);
        let short = IterationTrace {
            dist_to_s: vec![1.0; 5],
            ..trace
        };
        assert!(matches!(fit_rate(&short, 0.5), Err(Error::InsufficientData { .. })));
    }

    #[test]
    fn csv_layout() {
        let (a, b, sol) = lines(2);
        let op = OperatorSpec::map(a, b).unwrap();
        let trace = iterate(&op, &p(&[1.0, 0.0]), &sol, 2, 1e-10).unwrap();
        let csv = trace.to_csv();
        let mut lines = csv.lines();
        assert_eq!(lines.next().unwrap(), "iter,x_0,x_1,dist_A,dist_B,dist_S,step_norm");
        let row: Vec<f64> = lines.next().unwrap().split(',').map(|v| v.parse().unwrap()).collect();
        let expected = [0.0, 1.0, 0.0, 0.0, FRAC_1_SQRT_2, 1.0, 0.5];
        for (got, want) in row.iter().zip(expected) {
            assert_abs_diff_eq!(*got, want, epsilon = 1e-15);
        }
        assert_eq!(csv.lines().count(), 4);
    }

    #[test]
    fn exact_fixed_set_of_lines_in_r3() {
        let (a, b, sol) = lines(3);
        let op = OperatorSpec::douglas_rachford(a, b).unwrap();
        let probe = probe_fixed_points(&op, &Point::zeros(3), 1.0, 16, 0, &sol, 2000, 1e-10).unwrap();
        let fix = probe.exact_fixed_set.clone().unwrap();
        assert_eq!(fix.dim_subspace(), 1);
        assert!(fix.contains(&p(&[0.0, 0.0, 3.0]), 1e-12));
        assert!(probe.off_solution(1e-6).count() > 0);
        for l in &probe.limits {
            assert!(fix.distance(&l.point) < 1e-8);
        }
    }
}
