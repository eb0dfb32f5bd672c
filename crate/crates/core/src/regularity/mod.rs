//! Regularity constants of sets and pairs, and the convergence rates they predict.

mod estimators;
mod rates;
pub mod sampling;

pub use estimators::{
    check_strong_regularity, contraction_transfer, estimate_c, estimate_c_sampled, estimate_kappa,
    estimate_kappa_on_points, estimate_pair_regularity, estimate_subregularity, exact_subspace_c, friedrichs_cosine,
    limiting_cone, verify_coercivity, TransferCheck, LIMITING_RADIUS_FACTOR, LIMITING_SAMPLES, STRONG_REGULARITY_TOL,
};
pub use rates::{
    eps_tilde_dr, eps_tilde_projector, eps_tilde_reflector, predicted_rates, MapRegime, RateInputs, RegularityReport,
    SAFETY_FACTOR,
};

use crate::error::{Error, Result};
use crate::linalg::{affine_intersection, AffineFrame, Point};
use crate::sets::{SetSpec, MEMBERSHIP_TOL};

use sampling::SampleRole;

/// Default number of samples for the estimators.
pub const DEFAULT_SAMPLES: usize = 4096;

/// The intersection `S = A ∩ B` of a feasibility problem.
#[derive(Clone, Debug, PartialEq)]
pub struct SolutionSet {
    description: SetSpec,
    witness: Point,
    exact: Option<SetSpec>,
}

impl SolutionSet {
    /// Validates that `witness` lies in both sets.
    pub fn new(a: &SetSpec, b: &SetSpec, witness: Point, exact: Option<SetSpec>) -> Result<Self> {
        let description = SetSpec::intersection(vec![a.clone(), b.clone()])?;
        for s in [a, b] {
            if witness.dim() != s.dim() {
                return Err(Error::DimensionMismatch {
                    expected: s.dim(),
                    found: witness.dim(),
                });
            }
            let distance = s.distance(&witness)?;
            if distance > MEMBERSHIP_TOL {
                return Err(Error::NotInSet { distance });
            }
        }
        if let Some(e) = &exact {
            if e.dim() != witness.dim() {
                return Err(Error::DimensionMismatch {
                    expected: witness.dim(),
                    found: e.dim(),
                });
            }
        }
        Ok(Self {
            description,
            witness,
            exact,
        })
    }

    /// `S = {witness}`.
    pub fn singleton(a: &SetSpec, b: &SetSpec, witness: Point) -> Result<Self> {
        let exact = SetSpec::affine(AffineFrame::point(witness.clone()));
        Self::new(a, b, witness, Some(exact))
    }

    /// A finite `S`; the first point is the witness.
    pub fn points(a: &SetSpec, b: &SetSpec, points: Vec<Point>) -> Result<Self> {
        let witness = points.first().cloned().ok_or(Error::EmptyPoint)?;
        for q in &points[1..] {
            Self::new(a, b, q.clone(), None)?;
        }
        let exact = SetSpec::union(points.into_iter().map(AffineFrame::point).collect())?;
        Self::new(a, b, witness, Some(exact))
    }

    /// Exact `S` from the closed form when both sets are affine, witness only otherwise.
    pub fn affine_auto(a: &SetSpec, b: &SetSpec, witness: Point) -> Result<Self> {
        let exact = match (a.as_frame(), b.as_frame()) {
            (Some(fa), Some(fb)) => match affine_intersection(&[fa.clone(), fb.clone()])? {
                Some(f) => Some(SetSpec::affine(f)),
                None => return Err(Error::InconsistentIntersection),
            },
            _ => None,
        };
        Self::new(a, b, witness, exact)
    }

    pub fn description(&self) -> &SetSpec {
        &self.description
    }

    pub fn witness(&self) -> &Point {
        &self.witness
    }

    pub fn exact(&self) -> Option<&SetSpec> {
        self.exact.as_ref()
    }

    pub fn dim(&self) -> usize {
        self.witness.dim()
    }

    pub fn distance(&self, x: &Point) -> Result<f64> {
        match &self.exact {
            Some(e) => e.distance(x),
            None => Err(Error::SolutionDistanceUnavailable),
        }
    }

    /// A nearest point of `S`, lexicographically smallest on ties.
    pub fn project(&self, x: &Point) -> Result<Point> {
        match &self.exact {
            Some(e) => Ok(e.project(x)?.selected),
            None => Err(Error::SolutionDistanceUnavailable),
        }
    }

    /// Points of `S ∩ B_delta(witness)`; the witness alone without an exact set.
    pub fn sample(&self, delta: f64, n: usize, seed: u32) -> Vec<Point> {
        match &self.exact {
            Some(e) => sampling::set_points(e, &self.witness, delta, n, SampleRole::Members, seed),
            None => vec![self.witness.clone()],
        }
    }
}
