//! Closed sets with exact distance, projector, reflector and proximal normal cone.

use std::f64::consts::FRAC_1_SQRT_2;

use crate::error::{Error, Result};
use crate::linalg::{largest_principal_cosine, orthonormalize, project_onto_span, AffineFrame, Point};

/// Membership slack for normal-cone queries.
pub const MEMBERSHIP_TOL: f64 = 1e-9;

/// Two projection candidates whose distances differ by less than this
/// (relative to `1 + distance`) are treated as tied branches.
pub const TIE_TOL: f64 = 1e-12;

/// A nonempty closed subset of `R^d`.
///
/// Prefer the checked constructors ([`SetSpec::ball`], [`SetSpec::union`], ...);
/// [`SetSpec::validate`] re-checks a value built directly from the variants.
#[derive(Clone, Debug, PartialEq)]
pub enum SetSpec {
    AffineSubspace(AffineFrame),
    Ball {
        center: Point,
        radius: f64,
    },
    Sphere {
        center: Point,
        radius: f64,
    },
    UnionOfSubspaces(Vec<AffineFrame>),
    /// `{x₂ ≤ −x₁ if x₁ ≤ 0; x₂ ≤ 0 if x₁ > 0}` in `R²`.
    KinkedRegion,
    /// Supports membership and distance only.
    Intersection(Vec<SetSpec>),
}

/// Number of best approximation points.
#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum BranchCount {
    Finite(usize),
    Infinite,
}

/// Result of a (possibly multi-valued) projection or reflection.
#[derive(Clone, Debug, PartialEq)]
pub struct ProjectionOutcome {
    /// The deterministic selection used by the algorithms.
    pub selected: Point,
    pub branch_count: BranchCount,
    /// All branches when finitely many; just the selection otherwise.
    pub all_branches: Vec<Point>,
    /// Distance from the query point to the set.
    pub distance: f64,
}

impl ProjectionOutcome {
    fn single(p: Point, distance: f64) -> Self {
        Self {
            selected: p.clone(),
            branch_count: BranchCount::Finite(1),
            all_branches: vec![p],
            distance,
        }
    }

    pub fn is_single_valued(&self) -> bool {
        self.branch_count == BranchCount::Finite(1)
    }
}

impl SetSpec {
    pub fn affine(frame: AffineFrame) -> Self {
        SetSpec::AffineSubspace(frame)
    }

    pub fn ball(center: Point, radius: f64) -> Result<Self> {
        check_radius(radius)?;
        Ok(SetSpec::Ball { center, radius })
    }

    pub fn sphere(center: Point, radius: f64) -> Result<Self> {
        check_radius(radius)?;
        Ok(SetSpec::Sphere { center, radius })
    }

    pub fn union(frames: Vec<AffineFrame>) -> Result<Self> {
        let s = SetSpec::UnionOfSubspaces(frames);
        s.validate()?;
        Ok(s)
    }

    pub fn kinked() -> Self {
        SetSpec::KinkedRegion
    }

    pub fn intersection(members: Vec<SetSpec>) -> Result<Self> {
        let s = SetSpec::Intersection(members);
        s.validate()?;
        Ok(s)
    }

    /// The coordinate axes of `R^dim` as a union of lines ("cross" for `dim = 2`).
    pub fn axes(dim: usize) -> Self {
        let frames = (0..dim)
            .map(|i| AffineFrame::linear(dim, &[Point::unit(dim, i)]).expect("unit vector"))
            .collect();
        SetSpec::UnionOfSubspaces(frames)
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            SetSpec::AffineSubspace(_) | SetSpec::KinkedRegion => Ok(()),
            SetSpec::Ball { radius, .. } | SetSpec::Sphere { radius, .. } => check_radius(*radius),
            SetSpec::UnionOfSubspaces(frames) => {
                let first = frames
                    .first()
                    .ok_or_else(|| Error::InvalidSet("union needs at least one frame".into()))?;
                for f in frames {
                    if f.dim_ambient() != first.dim_ambient() {
                        return Err(Error::DimensionMismatch {
                            expected: first.dim_ambient(),
                            found: f.dim_ambient(),
                        });
                    }
                }
                Ok(())
            }
            SetSpec::Intersection(members) => {
                let first = members
                    .first()
                    .ok_or_else(|| Error::InvalidSet("intersection needs at least one member".into()))?;
                let dim = first.dim();
                for m in members {
                    m.validate()?;
                    if m.dim() != dim {
                        return Err(Error::DimensionMismatch {
                            expected: dim,
                            found: m.dim(),
                        });
                    }
                }
                Ok(())
            }
        }
    }

    /// Ambient dimension.
    pub fn dim(&self) -> usize {
        match self {
            SetSpec::AffineSubspace(f) => f.dim_ambient(),
            SetSpec::Ball { center, .. } | SetSpec::Sphere { center, .. } => center.dim(),
            SetSpec::UnionOfSubspaces(frames) => frames.first().map_or(0, |f| f.dim_ambient()),
            SetSpec::KinkedRegion => 2,
            SetSpec::Intersection(members) => members.first().map_or(0, SetSpec::dim),
        }
    }

    pub fn is_affine(&self) -> bool {
        match self {
            SetSpec::AffineSubspace(_) => true,
            SetSpec::UnionOfSubspaces(frames) => frames.len() == 1,
            _ => false,
        }
    }

    pub fn is_convex(&self) -> bool {
        match self {
            SetSpec::AffineSubspace(_) | SetSpec::Ball { .. } => true,
            SetSpec::UnionOfSubspaces(frames) => frames.len() == 1,
            SetSpec::Sphere { .. } | SetSpec::KinkedRegion => false,
            SetSpec::Intersection(members) => members.iter().all(SetSpec::is_convex),
        }
    }

    /// The single frame of an affine set, if it is one.
    pub fn as_frame(&self) -> Option<&AffineFrame> {
        match self {
            SetSpec::AffineSubspace(f) => Some(f),
            SetSpec::UnionOfSubspaces(frames) if frames.len() == 1 => frames.first(),
            _ => None,
        }
    }

    fn check_point(&self, x: &Point) -> Result<()> {
        let dim = self.dim();
        if x.dim() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: x.dim(),
            });
        }
        Ok(())
    }

    pub fn contains(&self, x: &Point, tol: f64) -> Result<bool> {
        self.check_point(x)?;
        match self {
            SetSpec::KinkedRegion => {
                let (x1, x2) = (x.coords()[0], x.coords()[1]);
                Ok(x2 <= kink_boundary(x1) + tol)
            }
            SetSpec::Intersection(members) => {
                for m in members {
                    if !m.contains(x, tol)? {
                        return Ok(false);
                    }
                }
                Ok(true)
            }
            _ => Ok(self.distance(x)? <= tol),
        }
    }

    /// Distance from `x` to the set.
    ///
    /// For an intersection the value is exact only when some member's
    /// projection of `x` already lies in every other member (then the lower
    /// bound `max_i dist(x, M_i)` is attained); affine-only intersections are
    /// resolved in closed form. Anything else reports
    /// [`Error::IntersectionUnresolved`].
    pub fn distance(&self, x: &Point) -> Result<f64> {
        self.check_point(x)?;
        match self {
            SetSpec::AffineSubspace(f) => Ok(f.distance(x)),
            SetSpec::Ball { center, radius } => Ok((x.distance(center) - radius).max(0.0)),
            SetSpec::Sphere { center, radius } => Ok((x.distance(center) - radius).abs()),
            SetSpec::UnionOfSubspaces(frames) => Ok(frames.iter().map(|f| f.distance(x)).fold(f64::INFINITY, f64::min)),
            SetSpec::KinkedRegion => Ok(self.project(x)?.distance),
            SetSpec::Intersection(members) => intersection_distance(members, x),
        }
    }

    /// All nearest points of the set to `x`, with a deterministic selection.
    ///
    /// Ties are broken by lowest frame index for unions and by lexicographic
    /// order otherwise. Projecting the center of a sphere selects
    /// `center + r·e₁` and reports [`BranchCount::Infinite`].
    pub fn project(&self, x: &Point) -> Result<ProjectionOutcome> {
        self.check_point(x)?;
        match self {
            SetSpec::AffineSubspace(f) => {
                let p = f.project(x);
                let d = x.distance(&p);
                Ok(ProjectionOutcome::single(p, d))
            }
            SetSpec::Ball { center, radius } => {
                let r = x.distance(center);
                if r <= *radius {
                    Ok(ProjectionOutcome::single(x.clone(), 0.0))
                } else {
                    let p = center.add_scaled(radius / r, &(x - center));
                    Ok(ProjectionOutcome::single(p, r - radius))
                }
            }
            SetSpec::Sphere { center, radius } => {
                let r = x.distance(center);
                if r == 0.0 {
                    let p = center.add_scaled(*radius, &Point::unit(x.dim(), 0));
                    Ok(ProjectionOutcome {
                        selected: p.clone(),
                        branch_count: BranchCount::Infinite,
                        all_branches: vec![p],
                        distance: *radius,
                    })
                } else {
                    let p = center.add_scaled(radius / r, &(x - center));
                    Ok(ProjectionOutcome::single(p, (r - radius).abs()))
                }
            }
            SetSpec::UnionOfSubspaces(frames) => {
                let candidates: Vec<(Point, f64)> = frames
                    .iter()
                    .map(|f| {
                        let p = f.project(x);
                        let d = x.distance(&p);
                        (p, d)
                    })
                    .collect();
                Ok(select_ties(candidates, false))
            }
            SetSpec::KinkedRegion => {
                let (x1, x2) = (x.coords()[0], x.coords()[1]);
                if x2 <= kink_boundary(x1) {
                    return Ok(ProjectionOutcome::single(x.clone(), 0.0));
                }
                let right = Point(vec_pair(x1.max(0.0), 0.0));
                let s = ((x2 - x1) * FRAC_1_SQRT_2).max(0.0);
                let left = Point(vec_pair(-s * FRAC_1_SQRT_2, s * FRAC_1_SQRT_2));
                let candidates = vec![(right.clone(), x.distance(&right)), (left.clone(), x.distance(&left))];
                Ok(select_ties(candidates, true))
            }
            SetSpec::Intersection(_) => Err(Error::ProjectionUnsupported),
        }
    }

    /// Reflection `2p − x` through every projection branch `p`.
    pub fn reflect(&self, x: &Point) -> Result<ProjectionOutcome> {
        let proj = self.project(x)?;
        let reflect = |p: &Point| p.scale(2.0).add_scaled(-1.0, x);
        Ok(ProjectionOutcome {
            selected: reflect(&proj.selected),
            branch_count: proj.branch_count,
            all_branches: proj.all_branches.iter().map(reflect).collect(),
            distance: proj.distance,
        })
    }

    /// The proximal normal cone at a point of the set.
    pub fn proximal_cone(&self, x: &Point) -> Result<NormalCone> {
        self.check_point(x)?;
        if let SetSpec::Intersection(_) = self {
            return Err(Error::ProjectionUnsupported);
        }
        let distance = self.distance(x)?;
        if distance > MEMBERSHIP_TOL {
            return Err(Error::NotInSet { distance });
        }
        let dim = x.dim();
        let cone = match self {
            SetSpec::AffineSubspace(f) => NormalCone::subspace(f.complement_basis()),
            SetSpec::Ball { center, radius } => {
                let rel = x - center;
                if rel.norm() >= radius - MEMBERSHIP_TOL {
                    NormalCone::ray(rel.normalized().expect("boundary point off center"))
                } else {
                    NormalCone::zero()
                }
            }
            SetSpec::Sphere { center, .. } => {
                let radial = (x - center).normalized().expect("sphere point off center");
                NormalCone::subspace(vec![radial])
            }
            SetSpec::UnionOfSubspaces(frames) => {
                let mut directions = Vec::new();
                for f in frames.iter().filter(|f| f.distance(x) <= MEMBERSHIP_TOL) {
                    directions.extend_from_slice(f.basis());
                }
                let span = orthonormalize(&directions)?;
                NormalCone::subspace(crate::linalg::complement_basis(&span, dim))
            }
            SetSpec::KinkedRegion => {
                let (x1, x2) = (x.coords()[0], x.coords()[1]);
                if x2 < kink_boundary(x1) - MEMBERSHIP_TOL || x.norm() <= 1e-12 {
                    NormalCone::zero()
                } else if x1 > 0.0 {
                    NormalCone::ray(Point(vec_pair(0.0, 1.0)))
                } else {
                    NormalCone::ray(Point(vec_pair(FRAC_1_SQRT_2, FRAC_1_SQRT_2)))
                }
            }
            SetSpec::Intersection(_) => unreachable!(),
        };
        Ok(cone)
    }

    /// Unit generators of the proximal normal cone at `x`, at most `max_samples`.
    ///
    /// Rays contribute their direction; subspace pieces contribute `±` their
    /// basis and then, room permitting, further deterministic unit directions.
    /// The zero cone yields an empty list.
    pub fn proximal_normals(&self, x: &Point, max_samples: usize) -> Result<Vec<Point>> {
        if max_samples == 0 {
            return Err(Error::InvalidParameter("max_samples must be positive".into()));
        }
        Ok(self.proximal_cone(x)?.generators(max_samples))
    }
}

fn vec_pair(a: f64, b: f64) -> Vec<f64> {
    vec![a, b]
}

fn check_radius(radius: f64) -> Result<()> {
    if !(radius.is_finite() && radius > 0.0) {
        return Err(Error::InvalidSet(format!("radius must be positive, got {radius}")));
    }
    Ok(())
}

/// Upper boundary `x₂ = max(−x₁, 0)` of the kinked region.
fn kink_boundary(x1: f64) -> f64 {
    if x1 <= 0.0 {
        -x1
    } else {
        0.0
    }
}

fn select_ties(candidates: Vec<(Point, f64)>, lexicographic: bool) -> ProjectionOutcome {
    let best = candidates.iter().map(|c| c.1).fold(f64::INFINITY, f64::min);
    let slack = TIE_TOL * (1.0 + best);
    let mut branches: Vec<Point> = Vec::new();
    for (p, d) in candidates {
        if d <= best + slack && !branches.iter().any(|q| q.approx_eq(&p, TIE_TOL)) {
            branches.push(p);
        }
    }
    let selected = if lexicographic {
        branches
            .iter()
            .min_by(|a, b| a.lex_cmp(b))
            .cloned()
            .expect("at least one candidate")
    } else {
        branches[0].clone()
    };
    ProjectionOutcome {
        selected,
        branch_count: BranchCount::Finite(branches.len()),
        all_branches: branches,
        distance: best,
    }
}

fn intersection_distance(members: &[SetSpec], x: &Point) -> Result<f64> {
    let frames: Option<Vec<AffineFrame>> = members.iter().map(|m| m.as_frame().cloned()).collect();
    if let Some(frames) = frames {
        return match crate::linalg::affine_intersection(&frames)? {
            Some(f) => Ok(f.distance(x)),
            None => Err(Error::InconsistentIntersection),
        };
    }
    for (i, m) in members.iter().enumerate() {
        let Ok(proj) = m.project(x) else { continue };
        for p in &proj.all_branches {
            let mut feasible = true;
            for (j, other) in members.iter().enumerate() {
                if i != j && !other.contains(p, MEMBERSHIP_TOL)? {
                    feasible = false;
                    break;
                }
            }
            if feasible {
                return Ok(proj.distance);
            }
        }
    }
    Err(Error::IntersectionUnresolved)
}

/// One generator family of a normal cone.
#[derive(Clone, Debug, PartialEq)]
pub enum ConePiece {
    /// `{t·d : t ≥ 0}` with unit `d`.
    Ray(Point),
    /// The linear span of an orthonormal basis.
    Subspace(Vec<Point>),
}

/// A finite union of rays and linear subspaces; no pieces means `{0}`.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct NormalCone {
    pieces: Vec<ConePiece>,
}

impl NormalCone {
    pub fn zero() -> Self {
        Self { pieces: Vec::new() }
    }

    pub fn ray(direction: Point) -> Self {
        Self {
            pieces: vec![ConePiece::Ray(direction)],
        }
    }

    pub fn subspace(basis: Vec<Point>) -> Self {
        if basis.is_empty() {
            Self::zero()
        } else {
            Self {
                pieces: vec![ConePiece::Subspace(basis)],
            }
        }
    }

    pub fn pieces(&self) -> &[ConePiece] {
        &self.pieces
    }

    pub fn is_zero(&self) -> bool {
        self.pieces.is_empty()
    }

    pub fn negated(&self) -> Self {
        Self {
            pieces: self
                .pieces
                .iter()
                .map(|piece| match piece {
                    ConePiece::Ray(d) => ConePiece::Ray(-d),
                    ConePiece::Subspace(b) => ConePiece::Subspace(b.clone()),
                })
                .collect(),
        }
    }

    /// Union with another cone, dropping pieces already present.
    pub fn extend(&mut self, other: &NormalCone) {
        for piece in &other.pieces {
            let duplicate = self.pieces.iter().any(|q| same_piece(q, piece));
            if !duplicate {
                self.pieces.push(piece.clone());
            }
        }
    }

    /// `sup { ⟨v, w⟩ : v in the cone, ‖v‖ = 1 }`, `None` for the zero cone.
    pub fn support(&self, w: &Point) -> Option<f64> {
        self.pieces
            .iter()
            .map(|piece| match piece {
                ConePiece::Ray(d) => d.dot(w),
                ConePiece::Subspace(b) => project_onto_span(b, w).norm(),
            })
            .reduce(f64::max)
    }

    /// `sup { ⟨u, v⟩ : u ∈ self, v ∈ other, ‖u‖ = ‖v‖ = 1 }`, `None` if either cone is `{0}`.
    pub fn max_alignment(&self, other: &NormalCone) -> Option<f64> {
        let mut best: Option<f64> = None;
        for p in &self.pieces {
            for q in &other.pieces {
                let value = match (p, q) {
                    (ConePiece::Ray(u), ConePiece::Ray(v)) => u.dot(v),
                    (ConePiece::Ray(u), ConePiece::Subspace(b)) | (ConePiece::Subspace(b), ConePiece::Ray(u)) => {
                        project_onto_span(b, u).norm()
                    }
                    (ConePiece::Subspace(a), ConePiece::Subspace(b)) => largest_principal_cosine(a, b),
                };
                best = Some(best.map_or(value, |b: f64| b.max(value)));
            }
        }
        best
    }

    /// Up to `max` unit vectors of the cone; see [`SetSpec::proximal_normals`].
    pub fn generators(&self, max: usize) -> Vec<Point> {
        let mut out = Vec::new();
        for piece in &self.pieces {
            match piece {
                ConePiece::Ray(d) => out.push(d.clone()),
                ConePiece::Subspace(b) => {
                    for v in b {
                        out.push(v.clone());
                        out.push(-v);
                    }
                }
            }
        }
        // Extra directions inside higher-dimensional subspace pieces.
        let wide: Vec<&Vec<Point>> = self
            .pieces
            .iter()
            .filter_map(|p| match p {
                ConePiece::Subspace(b) if b.len() >= 2 => Some(b),
                _ => None,
            })
            .collect();
        let mut index = 0u32;
        while out.len() < max && !wide.is_empty() && index < 64 * max as u32 {
            let basis = wide[index as usize % wide.len()];
            let k = index / wide.len() as u32;
            index += 1;
            let coeffs: Vec<f64> = (0..basis.len() as u32)
                .map(|d| 2.0 * f64::from(sobol_burley::sample(k, d, 0x5eed)) - 1.0)
                .collect();
            let mut v = Point::zeros(basis[0].dim());
            for (c, b) in coeffs.iter().zip(basis.iter()) {
                v = v.add_scaled(*c, b);
            }
            if let Some(u) = v.normalized() {
                out.push(u);
            }
        }
        out.truncate(max);
        out
    }
}

fn same_piece(a: &ConePiece, b: &ConePiece) -> bool {
    match (a, b) {
        (ConePiece::Ray(u), ConePiece::Ray(v)) => u.approx_eq(v, 1e-12),
        (ConePiece::Subspace(x), ConePiece::Subspace(y)) => {
            x.len() == y.len() && y.iter().all(|v| (project_onto_span(x, v).norm() - 1.0).abs() <= 1e-12)
        }
        _ => false,
    }
}
