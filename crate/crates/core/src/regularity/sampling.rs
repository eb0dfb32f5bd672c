//! Deterministic low-discrepancy samples of sets intersected with balls.
//!
//! Every stream is index based: candidate `k` depends only on `k`, the set,
//! the ball and the seed, and rejected candidates are skipped. Asking for more
//! points therefore extends the previous answer, so suprema over the samples
//! are non-decreasing in the sample count.

use std::f64::consts::{FRAC_1_SQRT_2, PI};

use crate::linalg::{AffineFrame, Point};
use crate::sets::{SetSpec, MEMBERSHIP_TOL};

/// Which points of a set to draw.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SampleRole {
    /// Points that can carry nonzero normals: boundaries of solid sets.
    Boundary,
    /// Any point of the set, interior included.
    Members,
}

/// Rejection budget: candidates scanned per requested point, plus a floor.
const CANDIDATES_PER_POINT: usize = 64;
const CANDIDATE_FLOOR: usize = 1024;

fn budget(n: usize) -> usize {
    n.saturating_mul(CANDIDATES_PER_POINT).saturating_add(CANDIDATE_FLOOR)
}

fn sobol(index: usize, dim: usize, seed: u32) -> f64 {
    f64::from(sobol_burley::sample(index as u32, (dim % 256) as u32, seed))
}

fn cube_point(index: usize, dim: usize, seed: u32) -> Vec<f64> {
    (0..dim).map(|d| 2.0 * sobol(index, d, seed) - 1.0).collect()
}

fn take_stream(n: usize, mut candidate: impl FnMut(usize) -> Option<Point>) -> Vec<Point> {
    let mut out = Vec::with_capacity(n.min(1 << 16));
    for k in 0..budget(n) {
        if out.len() == n {
            break;
        }
        if let Some(p) = candidate(k) {
            out.push(p);
        }
    }
    out
}

/// The first `n` accepted points of the ambient ball `B_delta(center)`,
/// starting with the center itself.
pub fn ball_points(center: &Point, delta: f64, n: usize, seed: u32) -> Vec<Point> {
    take_stream(n, |k| ball_candidate(center, delta, k, seed))
}

fn ball_candidate(center: &Point, delta: f64, k: usize, seed: u32) -> Option<Point> {
    if k == 0 {
        return Some(center.clone());
    }
    let c = Point(cube_point(k - 1, center.dim(), seed));
    (c.norm() <= 1.0).then(|| center.add_scaled(delta, &c))
}

/// The first `n` accepted points of `s ∩ B_delta(center)` for the given role.
pub fn set_points(s: &SetSpec, center: &Point, delta: f64, n: usize, role: SampleRole, seed: u32) -> Vec<Point> {
    if n == 0 || delta.is_nan() || delta <= 0.0 || s.dim() != center.dim() {
        return Vec::new();
    }
    match s {
        SetSpec::AffineSubspace(f) => take_stream(n, |k| frame_candidate(f, center, delta, k, seed)),
        SetSpec::Sphere { center: c, radius } => {
            take_stream(n, |k| sphere_candidate(c, *radius, center, delta, k, seed))
        }
        SetSpec::Ball { center: c, radius } => match role {
            SampleRole::Boundary => take_stream(n, |k| sphere_candidate(c, *radius, center, delta, k, seed)),
            SampleRole::Members => take_stream(n, |k| {
                if k % 2 == 0 {
                    sphere_candidate(c, *radius, center, delta, k / 2, seed)
                } else {
                    ball_candidate(center, delta, k / 2 + 1, seed ^ 0x9e37_79b9).filter(|p| p.distance(c) <= *radius)
                }
            }),
        },
        SetSpec::UnionOfSubspaces(frames) => {
            let live: Vec<&AffineFrame> = frames.iter().filter(|f| f.distance(center) <= delta).collect();
            if live.is_empty() {
                return Vec::new();
            }
            let m = live.len();
            take_stream(n, |k| {
                let f = live[k % m];
                frame_candidate(f, center, delta, k / m, seed.wrapping_add((k % m) as u32))
            })
        }
        SetSpec::KinkedRegion => take_stream(n, |k| kinked_candidate(center, delta, k, role, seed)),
        SetSpec::Intersection(_) => Vec::new(),
    }
}

fn frame_candidate(f: &AffineFrame, center: &Point, delta: f64, k: usize, seed: u32) -> Option<Point> {
    let foot = f.project(center);
    let offset_sq = foot.distance(center).powi(2);
    let reach_sq = delta * delta - offset_sq;
    if reach_sq < 0.0 {
        return None;
    }
    if k == 0 {
        return Some(foot);
    }
    let basis = f.basis();
    if basis.is_empty() {
        return None;
    }
    let c = cube_point(k - 1, basis.len(), seed);
    let r = c.iter().map(|v| v * v).sum::<f64>().sqrt();
    if r > 1.0 {
        return None;
    }
    let reach = reach_sq.sqrt();
    let mut p = foot;
    for (ci, b) in c.iter().zip(basis) {
        p = p.add_scaled(reach * ci, b);
    }
    Some(p)
}

fn sphere_candidate(c: &Point, radius: f64, center: &Point, delta: f64, k: usize, seed: u32) -> Option<Point> {
    let rel = center - c;
    let d = rel.norm();
    let dim = c.dim();
    if k == 0 {
        let dir = rel.normalized().unwrap_or_else(|| Point::unit(dim, 0));
        let p = c.add_scaled(radius, &dir);
        return (p.distance(center) <= delta).then_some(p);
    }
    if dim == 2 {
        // Arc of angles within delta of `center`.
        let phi0 = if d > 0.0 {
            rel.coords()[1].atan2(rel.coords()[0])
        } else {
            0.0
        };
        let cos_bound = if d > 0.0 {
            (radius * radius + d * d - delta * delta) / (2.0 * radius * d)
        } else if radius <= delta {
            -1.0
        } else {
            return None;
        };
        if cos_bound > 1.0 {
            return None;
        }
        let half = if cos_bound <= -1.0 { PI } else { cos_bound.acos() };
        let theta = phi0 + half * (2.0 * sobol(k - 1, 0, seed) - 1.0);
        let p = Point(vec![
            c.coords()[0] + radius * theta.cos(),
            c.coords()[1] + radius * theta.sin(),
        ]);
        return (p.distance(center) <= delta + 1e-12).then_some(p);
    }
    let dir = Point(cube_point(k - 1, dim, seed)).normalized()?;
    let p = c.add_scaled(radius, &dir);
    (p.distance(center) <= delta).then_some(p)
}

fn kinked_candidate(center: &Point, delta: f64, k: usize, role: SampleRole, seed: u32) -> Option<Point> {
    let origin = Point::zeros(2);
    if k == 0 {
        return (origin.distance(center) <= delta).then_some(origin);
    }
    let k = k - 1;
    let lanes = match role {
        SampleRole::Boundary => 2,
        SampleRole::Members => 3,
    };
    let local = k / lanes;
    let reach = center.norm() + delta;
    let p = match k % lanes {
        0 => Point(vec![reach * sobol(local, 0, seed), 0.0]),
        1 => {
            let t = reach * sobol(local, 0, seed ^ 0x5bd1_e995);
            Point(vec![-t * FRAC_1_SQRT_2, t * FRAC_1_SQRT_2])
        }
        _ => {
            let q = ball_candidate(center, delta, local + 1, seed ^ 0x27d4_eb2f)?;
            let (x1, x2) = (q.coords()[0], q.coords()[1]);
            return (x2 <= (-x1).max(0.0) + MEMBERSHIP_TOL).then_some(q);
        }
    };
    (p.distance(center) <= delta).then_some(p)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(c: &[f64]) -> Point {
        Point::from_slice(c).unwrap()
    }

    fn all_sets() -> Vec<SetSpec> {
        vec![
            SetSpec::affine(AffineFrame::linear(2, &[p(&[1.0, 1.0])]).unwrap()),
            SetSpec::ball(p(&[0.0, 1.0]), 1.0).unwrap(),
            SetSpec::sphere(p(&[0.0, 0.0]), 1.0).unwrap(),
            SetSpec::axes(2),
            SetSpec::kinked(),
        ]
    }

    #[test]
    fn samples_lie_in_set_and_ball() {
        let center = p(&[0.0, 0.0]);
        for s in all_sets() {
            let center = s.project(&center).unwrap().selected;
            for role in [SampleRole::Boundary, SampleRole::Members] {
                let pts = set_points(&s, &center, 0.5, 200, role, 7);
                assert!(!pts.is_empty(), "{s:?}");
                for q in &pts {
                    assert!(s.contains(q, 1e-9).unwrap(), "{q} not in {s:?}");
                    assert!(q.distance(&center) <= 0.5 + 1e-9);
                }
            }
        }
    }

    #[test]
    fn streams_are_nested() {
        let center = p(&[0.0, 0.0]);
        for s in all_sets() {
            let center = s.project(&center).unwrap().selected;
            let small = set_points(&s, &center, 1.0, 50, SampleRole::Members, 3);
            let large = set_points(&s, &center, 1.0, 100, SampleRole::Members, 3);
            assert_eq!(&large[..small.len()], &small[..]);
        }
        let small = ball_points(&center, 1.0, 40, 1);
        let large = ball_points(&center, 1.0, 80, 1);
        assert_eq!(&large[..40], &small[..]);
    }

    #[test]
    fn sphere_arc_stays_local() {
        let s = FRAC_1_SQRT_2;
        let circle = SetSpec::sphere(p(&[0.0, 0.0]), 1.0).unwrap();
        let witness = p(&[s, s]);
        let pts = set_points(&circle, &witness, 0.02, 500, SampleRole::Boundary, 0);
        assert_eq!(pts.len(), 500);
        assert_eq!(pts[0], witness);
        assert!(pts.iter().all(|q| q.distance(&witness) <= 0.02 + 1e-12));
    }

    #[test]
    fn far_sets_give_no_samples() {
        let line = SetSpec::affine(AffineFrame::new(p(&[0.0, 5.0]), &[p(&[1.0, 0.0])]).unwrap());
        assert!(set_points(&line, &p(&[0.0, 0.0]), 1.0, 10, SampleRole::Members, 0).is_empty());
    }

    #[test]
    fn kinked_members_include_interior() {
        let origin = p(&[0.0, 0.0]);
        let pts = set_points(&SetSpec::kinked(), &origin, 1.0, 300, SampleRole::Members, 0);
        let interior = pts
            .iter()
            .filter(|q| q.coords()[1] < (-q.coords()[0]).max(0.0) - 1e-6)
            .count();
        assert!(interior > 50);
    }
}
