//! Dense vectors, orthonormal bases and affine subspaces.
//!
//! Everything here is a plain value type. Arithmetic operators on [`Point`]
//! panic on dimension mismatch, the same way `nalgebra` does; the checked
//! entry points ([`inner`], [`Point::new`], [`AffineFrame::new`]) return
//! [`Error::DimensionMismatch`] instead.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// Relative rank cutoff used by [`orthonormalize`].
pub const RANK_TOL: f64 = 1e-10;

/// Tolerance on inner products for a basis to count as orthonormal.
pub const ORTHONORMAL_TOL: f64 = 1e-12;

/// A point (or vector) of a Euclidean space with finite coordinates.
#[derive(Clone, PartialEq)]
pub struct Point(pub(crate) Vec<f64>);

impl Point {
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        if coords.is_empty() {
            return Err(Error::EmptyPoint);
        }
        if let Some(index) = coords.iter().position(|c| !c.is_finite()) {
            return Err(Error::NonFinite { index });
        }
        Ok(Self(coords))
    }

    pub fn from_slice(coords: &[f64]) -> Result<Self> {
        Self::new(coords.to_vec())
    }

    pub fn zeros(dim: usize) -> Self {
        assert!(dim > 0, "a point needs at least one coordinate");
        Self(vec![0.0; dim])
    }

    /// The `index`-th standard unit vector of `R^dim`.
    pub fn unit(dim: usize, index: usize) -> Self {
        let mut p = Self::zeros(dim);
        p.0[index] = 1.0;
        p
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn coords(&self) -> &[f64] {
        &self.0
    }

    pub fn into_coords(self) -> Vec<f64> {
        self.0
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|c| c.is_finite())
    }

    /// Unchecked inner product. Panics when dimensions differ.
    pub fn dot(&self, other: &Point) -> f64 {
        assert_eq!(self.dim(), other.dim(), "dimension mismatch in dot");
        self.0.iter().zip(&other.0).map(|(a, b)| a * b).sum()
    }

    pub fn norm_sq(&self) -> f64 {
        self.0.iter().map(|a| a * a).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sq().sqrt()
    }

    pub fn distance(&self, other: &Point) -> f64 {
        assert_eq!(self.dim(), other.dim(), "dimension mismatch in distance");
        self.0
            .iter()
            .zip(&other.0)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt()
    }

    pub fn scale(&self, factor: f64) -> Point {
        Point(self.0.iter().map(|a| a * factor).collect())
    }

    /// `self + factor * other`.
    pub fn add_scaled(&self, factor: f64, other: &Point) -> Point {
        assert_eq!(self.dim(), other.dim(), "dimension mismatch in add_scaled");
        Point(self.0.iter().zip(&other.0).map(|(a, b)| a + factor * b).collect())
    }

    /// Unit vector in the direction of `self`, or `None` for the zero vector.
    pub fn normalized(&self) -> Option<Point> {
        let n = self.norm();
        (n > 0.0).then(|| self.scale(1.0 / n))
    }

    /// Lexicographic order on coordinates; NaN-free by construction.
    pub fn lex_cmp(&self, other: &Point) -> Ordering {
        for (a, b) in self.0.iter().zip(&other.0) {
            match a.partial_cmp(b).unwrap_or(Ordering::Equal) {
                Ordering::Equal => continue,
                ord => return ord,
            }
        }
        self.dim().cmp(&other.dim())
    }

    pub fn approx_eq(&self, other: &Point, tol: f64) -> bool {
        self.dim() == other.dim() && self.distance(other) <= tol
    }
}

impl fmt::Debug for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Point{:?}", self.0)
    }
}

impl fmt::Display for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, c) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, ")")
    }
}

impl Add for &Point {
    type Output = Point;
    fn add(self, rhs: &Point) -> Point {
        assert_eq!(self.dim(), rhs.dim(), "dimension mismatch in add");
        Point(self.0.iter().zip(&rhs.0).map(|(a, b)| a + b).collect())
    }
}

impl Sub for &Point {
    type Output = Point;
    fn sub(self, rhs: &Point) -> Point {
        assert_eq!(self.dim(), rhs.dim(), "dimension mismatch in sub");
        Point(self.0.iter().zip(&rhs.0).map(|(a, b)| a - b).collect())
    }
}

impl Add for Point {
    type Output = Point;
    fn add(self, rhs: Point) -> Point {
        &self + &rhs
    }
}

impl Sub for Point {
    type Output = Point;
    fn sub(self, rhs: Point) -> Point {
        &self - &rhs
    }
}

impl Mul<f64> for &Point {
    type Output = Point;
    fn mul(self, rhs: f64) -> Point {
        self.scale(rhs)
    }
}

impl Mul<&Point> for f64 {
    type Output = Point;
    fn mul(self, rhs: &Point) -> Point {
        rhs.scale(self)
    }
}

impl Neg for &Point {
    type Output = Point;
    fn neg(self) -> Point {
        self.scale(-1.0)
    }
}

fn check_dims(a: &Point, b: &Point) -> Result<()> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch {
            expected: a.dim(),
            found: b.dim(),
        });
    }
    Ok(())
}

/// Euclidean inner product.
pub fn inner(a: &Point, b: &Point) -> Result<f64> {
    check_dims(a, b)?;
    Ok(a.dot(b))
}

/// Euclidean 2-norm.
pub fn norm(a: &Point) -> f64 {
    a.norm()
}

/// Orthonormal basis of the span of `vectors`, using the default rank cutoff.
pub fn orthonormalize(vectors: &[Point]) -> Result<Vec<Point>> {
    orthonormalize_with_tol(vectors, RANK_TOL)
}

/// Modified Gram-Schmidt with one re-orthogonalization pass.
///
/// A vector is dropped when its residual after projection falls below
/// `rel_tol` times the largest input norm.
pub fn orthonormalize_with_tol(vectors: &[Point], rel_tol: f64) -> Result<Vec<Point>> {
    let Some(first) = vectors.first() else {
        return Ok(Vec::new());
    };
    for v in vectors {
        check_dims(first, v)?;
    }
    let scale = vectors.iter().map(Point::norm).fold(0.0, f64::max);
    if scale == 0.0 {
        return Ok(Vec::new());
    }
    let cutoff = rel_tol * scale;
    let mut basis: Vec<Point> = Vec::new();
    for v in vectors {
        let mut w = v.clone();
        for _ in 0..2 {
            for q in &basis {
                w = w.add_scaled(-w.dot(q), q);
            }
        }
        let n = w.norm();
        if n >= cutoff {
            basis.push(w.scale(1.0 / n));
        }
    }
    Ok(basis)
}

/// Orthonormal basis of the orthogonal complement of `span(basis)` in `R^dim`.
///
/// `basis` must already be orthonormal.
pub fn complement_basis(basis: &[Point], dim: usize) -> Vec<Point> {
    let mut all: Vec<Point> = basis.to_vec();
    let mut out = Vec::new();
    for i in 0..dim {
        let mut w = Point::unit(dim, i);
        for _ in 0..2 {
            for q in &all {
                w = w.add_scaled(-w.dot(q), q);
            }
        }
        let n = w.norm();
        // Unit inputs: an absolute cutoff is the relative one.
        if n >= 1e-8 {
            let q = w.scale(1.0 / n);
            all.push(q.clone());
            out.push(q);
        }
        if all.len() == dim {
            break;
        }
    }
    out
}

/// Orthogonal projection of `w` onto `span(basis)` for an orthonormal basis.
pub fn project_onto_span(basis: &[Point], w: &Point) -> Point {
    let mut out = Point::zeros(w.dim());
    for q in basis {
        out = out.add_scaled(w.dot(q), q);
    }
    out
}

/// Orthonormal basis of `span(a) ∩ span(b)` for orthonormal `a`, `b` in `R^dim`.
pub fn subspace_intersection(a: &[Point], b: &[Point], dim: usize) -> Vec<Point> {
    // (A ∩ B) = (A⊥ + B⊥)⊥
    let mut normals = complement_basis(a, dim);
    normals.extend(complement_basis(b, dim));
    let normals = orthonormalize(&normals).unwrap_or_default();
    complement_basis(&normals, dim)
}

/// Largest singular value of the cross-Gram matrix `[⟨u_i, v_j⟩]`.
///
/// For orthonormal inputs this is the cosine of the smallest principal angle
/// between the two spans. Returns 0 when either list is empty.
pub fn largest_principal_cosine(u: &[Point], v: &[Point]) -> f64 {
    if u.is_empty() || v.is_empty() {
        return 0.0;
    }
    let gram = DMatrix::from_fn(u.len(), v.len(), |i, j| u[i].dot(&v[j]));
    gram.singular_values().iter().copied().fold(0.0, f64::max)
}

/// An affine subspace `offset + span(basis)` with an orthonormal basis.
#[derive(Clone, Debug, PartialEq)]
pub struct AffineFrame {
    offset: Point,
    basis: Vec<Point>,
}

impl AffineFrame {
    /// Frame through `offset` spanned by arbitrary (possibly dependent) vectors.
    pub fn new(offset: Point, spanning: &[Point]) -> Result<Self> {
        for v in spanning {
            check_dims(&offset, v)?;
        }
        let basis = orthonormalize(spanning)?;
        Ok(Self { offset, basis })
    }

    /// Frame from a basis that is already orthonormal; the invariant is verified.
    pub fn from_orthonormal(offset: Point, basis: Vec<Point>) -> Result<Self> {
        for v in &basis {
            check_dims(&offset, v)?;
        }
        if basis.len() > offset.dim() {
            return Err(Error::InvalidFrame(format!(
                "{} basis vectors in dimension {}",
                basis.len(),
                offset.dim()
            )));
        }
        for (i, a) in basis.iter().enumerate() {
            for (j, b) in basis.iter().enumerate().skip(i) {
                let target = if i == j { 1.0 } else { 0.0 };
                if (a.dot(b) - target).abs() > ORTHONORMAL_TOL {
                    return Err(Error::InvalidFrame(format!(
                        "basis vectors {i} and {j} are not orthonormal"
                    )));
                }
            }
        }
        Ok(Self { offset, basis })
    }

    /// Linear subspace through the origin of `R^dim`.
    pub fn linear(dim: usize, spanning: &[Point]) -> Result<Self> {
        Self::new(Point::zeros(dim), spanning)
    }

    /// Zero-dimensional frame `{point}`.
    pub fn point(point: Point) -> Self {
        Self {
            offset: point,
            basis: Vec::new(),
        }
    }

    /// The whole ambient space.
    pub fn full(dim: usize) -> Self {
        Self {
            offset: Point::zeros(dim),
            basis: (0..dim).map(|i| Point::unit(dim, i)).collect(),
        }
    }

    pub fn offset(&self) -> &Point {
        &self.offset
    }

    pub fn basis(&self) -> &[Point] {
        &self.basis
    }

    pub fn dim_ambient(&self) -> usize {
        self.offset.dim()
    }

    pub fn dim_subspace(&self) -> usize {
        self.basis.len()
    }

    /// Orthonormal basis of the orthogonal complement of the direction space.
    pub fn complement_basis(&self) -> Vec<Point> {
        complement_basis(&self.basis, self.dim_ambient())
    }

    /// Frame through the same offset spanning the orthogonal complement.
    pub fn orthogonal_complement(&self) -> AffineFrame {
        AffineFrame {
            offset: self.offset.clone(),
            basis: self.complement_basis(),
        }
    }

    /// Orthogonal projection onto the affine subspace.
    pub fn project(&self, x: &Point) -> Point {
        let rel = x - &self.offset;
        &self.offset + &project_onto_span(&self.basis, &rel)
    }

    pub fn distance(&self, x: &Point) -> f64 {
        x.distance(&self.project(x))
    }

    pub fn contains(&self, x: &Point, tol: f64) -> bool {
        self.distance(x) <= tol
    }

    /// Same direction space through a new offset.
    pub fn translated(&self, offset: Point) -> AffineFrame {
        AffineFrame {
            offset,
            basis: self.basis.clone(),
        }
    }
}

/// Intersection of affine subspaces, `None` when it is empty.
///
/// The returned offset is the point of the intersection nearest to the
/// offset of the first frame.
pub fn affine_intersection(frames: &[AffineFrame]) -> Result<Option<AffineFrame>> {
    let Some(first) = frames.first() else {
        return Err(Error::InvalidFrame("empty list of frames".into()));
    };
    let dim = first.dim_ambient();
    for f in frames {
        if f.dim_ambient() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: f.dim_ambient(),
            });
        }
    }
    // Constraints n^T (x - o_i) = 0 for every complement direction n of frame i.
    let mut rows: Vec<Point> = Vec::new();
    let mut rhs: Vec<f64> = Vec::new();
    for f in frames {
        for n in f.complement_basis() {
            rhs.push(n.dot(&(f.offset() - first.offset())));
            rows.push(n);
        }
    }
    if rows.is_empty() {
        return Ok(Some(first.clone()));
    }
    let m = DMatrix::from_fn(rows.len(), dim, |i, j| rows[i].coords()[j]);
    let b = nalgebra::DVector::from_vec(rhs);
    let svd = m.clone().svd(true, true);
    let y = svd.solve(&b, 1e-12).map_err(|e| Error::InvalidFrame(e.to_string()))?;
    let scale = 1.0 + b.norm();
    if (&m * &y - &b).norm() > 1e-9 * scale {
        return Ok(None);
    }
    let offset = first.offset().add_scaled(1.0, &Point(y.iter().copied().collect()));
    let normals = orthonormalize(&rows)?;
    let basis = complement_basis(&normals, dim);
    Ok(Some(AffineFrame { offset, basis }))
}
