//! Fixed-point operators built from projectors and reflectors.
//!
//! Composition always acts on the deterministic `selected` branch of each
//! projector; [`OperatorSpec::branches`] enumerates the full branch set for
//! diagnostics, capped at [`MAX_BRANCHES`].

use crate::error::{Error, Result};
use crate::linalg::{AffineFrame, Point};
use crate::sets::SetSpec;

/// Cap on the number of branches enumerated by [`OperatorSpec::branches`].
pub const MAX_BRANCHES: usize = 64;

/// Tolerance on combination weights summing to one.
pub const WEIGHT_TOL: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq)]
pub enum OperatorSpec {
    /// `x ↦ P_A P_B x`.
    Map {
        a: SetSpec,
        b: SetSpec,
    },
    /// `x ↦ ½(R_A R_B x + x)`, evaluated as `P_A(2z − x) − z + x` with `z = P_B x`.
    DouglasRachford {
        a: SetSpec,
        b: SetSpec,
    },
    /// `2T − I`.
    Companion(Box<OperatorSpec>),
    /// `Σ λ_i T_i` with non-negative weights summing to one.
    Combination(Vec<(f64, OperatorSpec)>),
    Projector(SetSpec),
    Reflector(SetSpec),
}

/// One application of an operator: the selected image plus named intermediates.
#[derive(Clone, Debug, PartialEq)]
pub struct StepRecord {
    pub selected: Point,
    pub intermediates: Vec<(&'static str, Point)>,
}

impl StepRecord {
    pub fn intermediate(&self, name: &str) -> Option<&Point> {
        self.intermediates.iter().find(|(n, _)| *n == name).map(|(_, p)| p)
    }
}

/// Enumerated images of a multi-valued operator.
#[derive(Clone, Debug, PartialEq)]
pub struct BranchSet {
    pub points: Vec<Point>,
    /// Set when enumeration stopped at the cap.
    pub truncated: bool,
}

fn same_dim(a: &SetSpec, b: &SetSpec) -> Result<()> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch {
            expected: a.dim(),
            found: b.dim(),
        });
    }
    Ok(())
}

impl OperatorSpec {
    pub fn map(a: SetSpec, b: SetSpec) -> Result<Self> {
        same_dim(&a, &b)?;
        Ok(OperatorSpec::Map { a, b })
    }

    pub fn douglas_rachford(a: SetSpec, b: SetSpec) -> Result<Self> {
        same_dim(&a, &b)?;
        Ok(OperatorSpec::DouglasRachford { a, b })
    }

    pub fn companion(inner: OperatorSpec) -> Self {
        OperatorSpec::Companion(Box::new(inner))
    }

    pub fn combination(terms: Vec<(f64, OperatorSpec)>) -> Result<Self> {
        let op = OperatorSpec::Combination(terms);
        op.validate()?;
        Ok(op)
    }

    pub fn projector(s: SetSpec) -> Self {
        OperatorSpec::Projector(s)
    }

    pub fn reflector(s: SetSpec) -> Self {
        OperatorSpec::Reflector(s)
    }

    /// The identity, as the projector onto the whole space.
    pub fn identity(dim: usize) -> Self {
        OperatorSpec::Projector(SetSpec::affine(AffineFrame::full(dim)))
    }

    pub fn dim(&self) -> usize {
        match self {
            OperatorSpec::Map { a, .. } | OperatorSpec::DouglasRachford { a, .. } => a.dim(),
            OperatorSpec::Companion(inner) => inner.dim(),
            OperatorSpec::Combination(terms) => terms.first().map_or(0, |(_, t)| t.dim()),
            OperatorSpec::Projector(s) | OperatorSpec::Reflector(s) => s.dim(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            OperatorSpec::Map { a, b } | OperatorSpec::DouglasRachford { a, b } => {
                a.validate()?;
                b.validate()?;
                same_dim(a, b)
            }
            OperatorSpec::Companion(inner) => inner.validate(),
            OperatorSpec::Combination(terms) => {
                if terms.is_empty() {
                    return Err(Error::InvalidOperator("empty combination".into()));
                }
                let mut total = 0.0;
                let dim = terms[0].1.dim();
                for (w, t) in terms {
                    if !(w.is_finite() && *w >= 0.0) {
                        return Err(Error::InvalidOperator(format!("negative weight {w}")));
                    }
                    t.validate()?;
                    if t.dim() != dim {
                        return Err(Error::DimensionMismatch {
                            expected: dim,
                            found: t.dim(),
                        });
                    }
                    total += w;
                }
                if (total - 1.0).abs() > WEIGHT_TOL {
                    return Err(Error::InvalidOperator(format!("weights sum to {total}, expected 1")));
                }
                Ok(())
            }
            OperatorSpec::Projector(s) | OperatorSpec::Reflector(s) => s.validate(),
        }
    }

    /// One application on the selected branch.
    pub fn apply(&self, x: &Point) -> Result<StepRecord> {
        match self {
            OperatorSpec::Map { a, b } => {
                let y = b.project(x)?.selected;
                let z = a.project(&y)?.selected;
                Ok(StepRecord {
                    selected: z,
                    intermediates: vec![("P_B x", y)],
                })
            }
            OperatorSpec::DouglasRachford { a, b } => {
                let z = b.project(x)?.selected;
                let reflected = z.scale(2.0).add_scaled(-1.0, x);
                let w = a.project(&reflected)?.selected;
                let selected = (&w - &z).add_scaled(1.0, x);
                Ok(StepRecord {
                    selected,
                    intermediates: vec![("P_B x", z), ("R_B x", reflected), ("P_A R_B x", w)],
                })
            }
            OperatorSpec::Companion(inner) => {
                let mut step = inner.apply(x)?;
                let t = step.selected.clone();
                step.selected = t.scale(2.0).add_scaled(-1.0, x);
                step.intermediates.push(("T x", t));
                Ok(step)
            }
            OperatorSpec::Combination(terms) => {
                let mut sum = Point::zeros(x.dim());
                for (w, t) in terms {
                    sum = sum.add_scaled(*w, &t.apply(x)?.selected);
                }
                Ok(StepRecord {
                    selected: sum,
                    intermediates: Vec::new(),
                })
            }
            OperatorSpec::Projector(s) => Ok(StepRecord {
                selected: s.project(x)?.selected,
                intermediates: Vec::new(),
            }),
            OperatorSpec::Reflector(s) => Ok(StepRecord {
                selected: s.reflect(x)?.selected,
                intermediates: Vec::new(),
            }),
        }
    }

    /// The full image set `T x`, composed branch by branch up to `cap` points.
    ///
    /// Infinite projector branch sets contribute only their canonical point.
    pub fn branches(&self, x: &Point, cap: usize) -> Result<BranchSet> {
        let cap = cap.clamp(1, MAX_BRANCHES);
        let mut out = BranchSet {
            points: Vec::new(),
            truncated: false,
        };
        match self {
            OperatorSpec::Map { a, b } => {
                for y in b.project(x)?.all_branches {
                    for z in a.project(&y)?.all_branches {
                        push_branch(&mut out, z, cap);
                    }
                }
            }
            OperatorSpec::DouglasRachford { a, b } => {
                for z in b.project(x)?.all_branches {
                    let reflected = z.scale(2.0).add_scaled(-1.0, x);
                    for w in a.project(&reflected)?.all_branches {
                        push_branch(&mut out, (&w - &z).add_scaled(1.0, x), cap);
                    }
                }
            }
            OperatorSpec::Companion(inner) => {
                let inner_set = inner.branches(x, cap)?;
                out.truncated = inner_set.truncated;
                for t in inner_set.points {
                    push_branch(&mut out, t.scale(2.0).add_scaled(-1.0, x), cap);
                }
            }
            OperatorSpec::Combination(terms) => {
                let mut partial = vec![Point::zeros(x.dim())];
                for (w, t) in terms {
                    let term = t.branches(x, cap)?;
                    out.truncated |= term.truncated;
                    let mut next = Vec::new();
                    'outer: for acc in &partial {
                        for p in &term.points {
                            if next.len() == cap {
                                out.truncated = true;
                                break 'outer;
                            }
                            next.push(acc.add_scaled(*w, p));
                        }
                    }
                    partial = next;
                }
                for p in partial {
                    push_branch(&mut out, p, cap);
                }
            }
            OperatorSpec::Projector(s) => {
                for p in s.project(x)?.all_branches {
                    push_branch(&mut out, p, cap);
                }
            }
            OperatorSpec::Reflector(s) => {
                for p in s.reflect(x)?.all_branches {
                    push_branch(&mut out, p, cap);
                }
            }
        }
        Ok(out)
    }
}

fn push_branch(set: &mut BranchSet, p: Point, cap: usize) {
    if set.points.iter().any(|q| q.approx_eq(&p, 1e-12)) {
        return;
    }
    if set.points.len() >= cap {
        set.truncated = true;
        return;
    }
    set.points.push(p);
}

/// Douglas-Rachford images computed from the averaged-reflection form
/// `½(R_A R_B x + x)`, branch by branch.
pub fn dr_reflection_form(a: &SetSpec, b: &SetSpec, x: &Point) -> Result<(Point, Vec<Point>)> {
    let rb = b.reflect(x)?;
    let average = |r: &Point| r.add_scaled(1.0, x).scale(0.5);
    let selected = average(&a.reflect(&rb.selected)?.selected);
    let mut all: Vec<Point> = Vec::new();
    for v in &rb.all_branches {
        for r in a.reflect(v)?.all_branches {
            let p = average(&r);
            if !all.iter().any(|q| q.approx_eq(&p, 1e-12)) {
                all.push(p);
            }
        }
    }
    Ok((selected, all))
}

/// Whether the averaged-reflection form and the projector form of
/// Douglas-Rachford give the same selection and the same branch set.
pub fn dr_two_forms_agree(a: &SetSpec, b: &SetSpec, x: &Point) -> Result<bool> {
    const TOL: f64 = 1e-10;
    let op = OperatorSpec::douglas_rachford(a.clone(), b.clone())?;
    let projector_selected = op.apply(x)?.selected;
    let projector_all = op.branches(x, MAX_BRANCHES)?.points;
    let (reflection_selected, reflection_all) = dr_reflection_form(a, b, x)?;
    if !projector_selected.approx_eq(&reflection_selected, TOL) {
        return Ok(false);
    }
    let covers = |xs: &[Point], ys: &[Point]| xs.iter().all(|p| ys.iter().any(|q| p.approx_eq(q, TOL)));
    Ok(covers(&projector_all, &reflection_all) && covers(&reflection_all, &projector_all))
}

/// Residual of the Douglas-Rachford energy identity
/// `‖x₊−y₊‖² + ‖(x−x₊)−(y−y₊)‖² = ½‖x−y‖² + ½‖x̃−ỹ‖²` with `x̃ = 2x₊ − x`.
pub fn dr_energy_identity_residual(a: &SetSpec, b: &SetSpec, x: &Point, y: &Point) -> Result<f64> {
    if x.dim() != y.dim() {
        return Err(Error::DimensionMismatch {
            expected: x.dim(),
            found: y.dim(),
        });
    }
    let op = OperatorSpec::douglas_rachford(a.clone(), b.clone())?;
    let xp = op.apply(x)?.selected;
    let yp = op.apply(y)?.selected;
    let xt = xp.scale(2.0).add_scaled(-1.0, x);
    let yt = yp.scale(2.0).add_scaled(-1.0, y);
    let lhs = xp.distance(&yp).powi(2) + (&(x - &xp) - &(y - &yp)).norm_sq();
    let rhs = 0.5 * x.distance(y).powi(2) + 0.5 * xt.distance(&yt).powi(2);
    Ok((lhs - rhs).abs())
}

/// Largest excess of the `(S, ε)`-firm inequality at `(x, x̄)` over all branches:
/// `‖x₊−x̄₊‖² + ‖(x−x₊)−(x̄−x̄₊)‖² − (1+ε)‖x−x̄‖²`. Non-positive means it holds.
pub fn s_firm_excess(op: &OperatorSpec, x: &Point, xbar: &Point, eps: f64) -> Result<f64> {
    let xbar_plus = op.apply(xbar)?.selected;
    let bound = (1.0 + eps) * x.distance(xbar).powi(2);
    let mut worst = f64::NEG_INFINITY;
    for xp in op.branches(x, MAX_BRANCHES)?.points {
        let lhs = xp.distance(&xbar_plus).powi(2) + (&(x - &xp) - &(xbar - &xbar_plus)).norm_sq();
        worst = worst.max(lhs - bound);
    }
    Ok(worst)
}

/// Largest excess of the squared `(S, ε)`-nonexpansive inequality
/// `‖x₊−x̄₊‖² − (1+ε)‖x−x̄‖²` over all branches.
pub fn s_nonexpansive_excess(op: &OperatorSpec, x: &Point, xbar: &Point, eps: f64) -> Result<f64> {
    let xbar_plus = op.apply(xbar)?.selected;
    let bound = (1.0 + eps) * x.distance(xbar).powi(2);
    let mut worst = f64::NEG_INFINITY;
    for xp in op.branches(x, MAX_BRANCHES)?.points {
        worst = worst.max(xp.distance(&xbar_plus).powi(2) - bound);
    }
    Ok(worst)
}

/// Sampled sufficient check for `x ∈ {z : P_Ω z ⊂ B_δ(x̂)}`.
///
/// Infinite branch sets only expose their canonical point, so the check is
/// exact for finitely many branches and optimistic otherwise.
pub fn in_projector_neighborhood(s: &SetSpec, x: &Point, center: &Point, delta: f64) -> Result<bool> {
    let proj = s.project(x)?;
    if proj.branch_count == crate::sets::BranchCount::Infinite {
        return Ok(false);
    }
    Ok(proj.all_branches.iter().all(|p| p.distance(center) <= delta))
}

/// Sampled check for `x ∈ {z : P_B z ⊂ B_δ(x̂), P_A R_B z ⊂ B_δ(x̂)}`.
pub fn in_dr_neighborhood(a: &SetSpec, b: &SetSpec, x: &Point, center: &Point, delta: f64) -> Result<bool> {
    if !in_projector_neighborhood(b, x, center, delta)? {
        return Ok(false);
    }
    for r in b.reflect(x)?.all_branches {
        if !in_projector_neighborhood(a, &r, center, delta)? {
            return Ok(false);
        }
    }
    Ok(true)
}
