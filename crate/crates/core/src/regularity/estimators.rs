use crate::error::{Error, Result};
use crate::linalg::{
    largest_principal_cosine, orthonormalize, project_onto_span, subspace_intersection, AffineFrame, Point,
};
use crate::operators::{OperatorSpec, MAX_BRANCHES};
use crate::sets::{NormalCone, SetSpec, MEMBERSHIP_TOL};

use super::sampling::{ball_points, set_points, SampleRole};
use super::SolutionSet;

/// Radius of the neighborhood searched for limiting normals, relative to `delta`.
pub const LIMITING_RADIUS_FACTOR: f64 = 1e-4;

/// Default number of nearby points assembled into a limiting cone.
pub const LIMITING_SAMPLES: usize = 256;

/// Alignment above `1 − STRONG_REGULARITY_TOL` counts as opposite normals.
pub const STRONG_REGULARITY_TOL: f64 = 1e-6;

const LIMITING_SEED: u32 = 0x1131;

fn check_delta(delta: f64) -> Result<()> {
    if delta.is_finite() && delta > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("delta must be positive, got {delta}")))
    }
}

fn check_samples(samples: usize) -> Result<()> {
    if samples == 0 {
        return Err(Error::InvalidParameter("samples must be positive".into()));
    }
    Ok(())
}

fn sqrt_count(samples: usize) -> usize {
    (samples as f64).sqrt().ceil() as usize
}

/// Points of `s` near `center` carrying normals, falling back to any member
/// when the boundary misses the ball.
fn normal_carriers(s: &SetSpec, center: &Point, delta: f64, n: usize, seed: u32) -> Result<Vec<Point>> {
    let boundary = set_points(s, center, delta, n, SampleRole::Boundary, seed);
    if boundary.is_empty() && set_points(s, center, delta, 1, SampleRole::Members, seed).is_empty() {
        return Err(Error::NoSamples { delta });
    }
    Ok(boundary)
}

fn normal_ratio(cone: &NormalCone, x: &Point, xbar: &Point) -> Option<f64> {
    let w = xbar - x;
    let len = w.norm();
    if len <= 1e-14 {
        return None;
    }
    cone.support(&w).map(|s| s / len)
}

/// Sampled `(ε, δ)`-subregularity constant of `s` at the witness of `sol`
/// with respect to `S`: the supremum of `⟨v, x̄ − x⟩ / (‖v‖‖x̄ − x‖)`.
pub fn estimate_subregularity(s: &SetSpec, sol: &SolutionSet, delta: f64, samples: usize, seed: u32) -> Result<f64> {
    check_delta(delta)?;
    check_samples(samples)?;
    let xs = normal_carriers(s, sol.witness(), delta, samples, seed)?;
    let xbars = sol.sample(delta, sqrt_count(samples), seed.wrapping_add(1));
    Ok(sup_ratio(s, &xs, &xbars)?.max(0.0))
}

/// Sampled `(ε, δ)`-regularity constant of `s` at `center`: as
/// [`estimate_subregularity`] with `x̄` ranging over `s ∩ B_delta(center)`.
pub fn estimate_pair_regularity(s: &SetSpec, center: &Point, delta: f64, samples: usize, seed: u32) -> Result<f64> {
    check_delta(delta)?;
    check_samples(samples)?;
    let xs = normal_carriers(s, center, delta, samples, seed)?;
    let xbars = set_points(
        s,
        center,
        delta,
        sqrt_count(samples),
        SampleRole::Members,
        seed.wrapping_add(1),
    );
    Ok(sup_ratio(s, &xs, &xbars)?.max(0.0))
}

fn sup_ratio(s: &SetSpec, xs: &[Point], xbars: &[Point]) -> Result<f64> {
    let mut best = 0.0f64;
    for x in xs {
        let cone = s.proximal_cone(x)?;
        if cone.is_zero() {
            continue;
        }
        for xbar in xbars {
            if let Some(r) = normal_ratio(&cone, x, xbar) {
                best = best.max(r);
            }
        }
    }
    Ok(best)
}

/// Sampled local linear regularity modulus: the supremum of
/// `dist(x, S) / max(dist(x, a), dist(x, b))` over the ball and over points of
/// either set inside it.
pub fn estimate_kappa(
    a: &SetSpec,
    b: &SetSpec,
    sol: &SolutionSet,
    delta: f64,
    samples: usize,
    seed: u32,
) -> Result<f64> {
    check_delta(delta)?;
    check_samples(samples)?;
    let center = sol.witness();
    let mut points = ball_points(center, delta, samples, seed);
    points.extend(set_points(
        a,
        center,
        delta,
        samples,
        SampleRole::Members,
        seed.wrapping_add(2),
    ));
    points.extend(set_points(
        b,
        center,
        delta,
        samples,
        SampleRole::Members,
        seed.wrapping_add(3),
    ));
    estimate_kappa_on_points(a, b, sol, &points)
}

/// [`estimate_kappa`] over caller-chosen points.
pub fn estimate_kappa_on_points(a: &SetSpec, b: &SetSpec, sol: &SolutionSet, points: &[Point]) -> Result<f64> {
    let mut best = 0.0f64;
    for x in points {
        let gap = a.distance(x)?.max(b.distance(x)?);
        if gap < 1e-12 {
            continue;
        }
        best = best.max(sol.distance(x)? / gap);
    }
    Ok(best)
}

/// `c` for two affine sets: the largest cosine between their normal spaces.
pub fn exact_subspace_c(a: &AffineFrame, b: &AffineFrame) -> f64 {
    largest_principal_cosine(&a.complement_basis(), &b.complement_basis())
}

/// Normal-cone angle constant `c = max(0, sup −⟨u, v⟩)` over unit normals of
/// `a` and `b` at points near `center`; exact for two affine sets.
pub fn estimate_c(a: &SetSpec, b: &SetSpec, center: &Point, delta: f64, samples: usize, seed: u32) -> Result<f64> {
    if let (Some(fa), Some(fb)) = (a.as_frame(), b.as_frame()) {
        return Ok(exact_subspace_c(fa, fb));
    }
    estimate_c_sampled(a, b, center, delta, samples, seed)
}

/// The sampled path of [`estimate_c`], used for every variant.
pub fn estimate_c_sampled(
    a: &SetSpec,
    b: &SetSpec,
    center: &Point,
    delta: f64,
    samples: usize,
    seed: u32,
) -> Result<f64> {
    check_delta(delta)?;
    check_samples(samples)?;
    let m = sqrt_count(samples);
    let cones = |s: &SetSpec, seed: u32| -> Result<Vec<NormalCone>> {
        set_points(s, center, delta, m, SampleRole::Boundary, seed)
            .iter()
            .map(|z| s.proximal_cone(z))
            .filter(|c| !matches!(c, Ok(c) if c.is_zero()))
            .collect()
    };
    let na = cones(a, seed)?;
    let nb: Vec<NormalCone> = cones(b, seed.wrapping_add(1))?
        .iter()
        .map(NormalCone::negated)
        .collect();
    let mut best = 0.0f64;
    for u in &na {
        for v in &nb {
            if let Some(al) = u.max_alignment(v) {
                best = best.max(al);
            }
        }
    }
    Ok(best)
}

/// Limiting normal cone at `x`: the proximal cone there joined with proximal
/// cones at up to `samples` points of `s` within `LIMITING_RADIUS_FACTOR · delta`.
pub fn limiting_cone(s: &SetSpec, x: &Point, delta: f64, samples: usize) -> Result<NormalCone> {
    check_delta(delta)?;
    let mut cone = s.proximal_cone(x)?;
    let radius = LIMITING_RADIUS_FACTOR * delta;
    for z in set_points(s, x, radius, samples, SampleRole::Boundary, LIMITING_SEED) {
        cone.extend(&s.proximal_cone(&z)?);
    }
    Ok(cone)
}

/// Whether `N_a(x̂) ∩ −N_b(x̂) = {0}`; exact for affine pairs, otherwise tested
/// on limiting cones assembled from nearby proximal normals.
pub fn check_strong_regularity(a: &SetSpec, b: &SetSpec, xhat: &Point, delta: f64, samples: usize) -> Result<bool> {
    for s in [a, b] {
        let distance = s.distance(xhat)?;
        if distance > MEMBERSHIP_TOL {
            return Err(Error::NotInSet { distance });
        }
    }
    if let (Some(fa), Some(fb)) = (a.as_frame(), b.as_frame()) {
        let shared = subspace_intersection(&fa.complement_basis(), &fb.complement_basis(), xhat.dim());
        return Ok(shared.is_empty());
    }
    let na = limiting_cone(a, xhat, delta, samples)?;
    let nb = limiting_cone(b, xhat, delta, samples)?.negated();
    Ok(match na.max_alignment(&nb) {
        None => true,
        Some(al) => al <= 1.0 - STRONG_REGULARITY_TOL,
    })
}

/// Cosine of the Friedrichs angle between the linear parts of two frames.
pub fn friedrichs_cosine(a: &AffineFrame, b: &AffineFrame) -> Result<f64> {
    let dim = a.dim_ambient();
    if b.dim_ambient() != dim {
        return Err(Error::DimensionMismatch {
            expected: dim,
            found: b.dim_ambient(),
        });
    }
    let shared = subspace_intersection(a.basis(), b.basis(), dim);
    let reduce = |basis: &[Point]| -> Result<Vec<Point>> {
        let residuals: Vec<Point> = basis.iter().map(|v| v - &project_onto_span(&shared, v)).collect();
        orthonormalize(&residuals)
    };
    let ra = reduce(a.basis())?;
    let rb = reduce(b.basis())?;
    Ok(largest_principal_cosine(&ra, &rb))
}

/// Worst coercivity margin `min ‖x − x₊‖ − λ·dist(x, S)` over the points and
/// every branch `x₊ ∈ T x`.
pub fn verify_coercivity(op: &OperatorSpec, sol: &SolutionSet, lambda: f64, points: &[Point]) -> Result<f64> {
    if points.is_empty() {
        return Err(Error::InvalidParameter("no sample points".into()));
    }
    let mut worst = f64::INFINITY;
    for x in points {
        let d = sol.distance(x)?;
        for xp in op.branches(x, MAX_BRANCHES)?.points {
            worst = worst.min(x.distance(&xp) - lambda * d);
        }
    }
    Ok(worst)
}

/// Outcome of checking `dist(x₊, S) ≤ sqrt(1 + ε − λ²)·dist(x, S)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TransferCheck {
    /// Points where both hypotheses held.
    pub checked: usize,
    /// Largest `dist(x₊, S) − sqrt(1 + ε − λ²)·dist(x, S)` over them.
    pub worst_margin: f64,
}

/// Checks the contraction bound on the points where the `(S, ε)`-firm
/// inequality against `P_S x` and the `λ`-coercivity condition both hold.
pub fn contraction_transfer(
    op: &OperatorSpec,
    sol: &SolutionSet,
    eps: f64,
    lambda: f64,
    points: &[Point],
) -> Result<TransferCheck> {
    let factor = (1.0 + eps - lambda * lambda).max(0.0).sqrt();
    let mut out = TransferCheck {
        checked: 0,
        worst_margin: f64::NEG_INFINITY,
    };
    for x in points {
        let d = sol.distance(x)?;
        let xbar = sol.project(x)?;
        let xbar_plus = op.apply(&xbar)?.selected;
        for xp in op.branches(x, MAX_BRANCHES)?.points {
            let firm =
                xp.distance(&xbar_plus).powi(2) + (&(x - &xp) - &(&xbar - &xbar_plus)).norm_sq() - (1.0 + eps) * d * d;
            let coercive = x.distance(&xp) - lambda * d;
            if firm > 0.0 || coercive < 0.0 {
                continue;
            }
            out.checked += 1;
            out.worst_margin = out.worst_margin.max(sol.distance(&xp)? - factor * d);
        }
    }
    Ok(out)
}
