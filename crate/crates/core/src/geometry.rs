//! Polytopes in H-representation, simplices, and the primitives on them.

use std::ops::Deref;

use crate::error::{Error, Result};
use crate::linalg::{self, dot, Lu, Matrix};

/// A point in ℝⁿ with finite coordinates.
#[derive(Clone, Debug, PartialEq)]
pub struct Point(Vec<f64>);

impl Point {
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        if coords.iter().any(|x| !x.is_finite()) {
            return Err(Error::invalid("point has non-finite coordinates"));
        }
        Ok(Self(coords))
    }

    pub fn origin(n: usize) -> Self {
        Self(vec![0.0; n])
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn coords(&self) -> &[f64] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }

    pub(crate) fn from_vec_unchecked(coords: Vec<f64>) -> Self {
        debug_assert!(coords.iter().all(|x| x.is_finite()));
        Self(coords)
    }
}

impl Deref for Point {
    type Target = [f64];

    fn deref(&self) -> &[f64] {
        &self.0
    }
}

impl TryFrom<Vec<f64>> for Point {
    type Error = Error;

    fn try_from(v: Vec<f64>) -> Result<Self> {
        Self::new(v)
    }
}

/// `{p ∈ ℝⁿ : A p ≤ b}` with `A` of shape `r × n`.
///
/// Boundedness and non-emptiness are not checked here; vertex enumeration
/// reports them.
#[derive(Clone, Debug, PartialEq)]
pub struct Polytope {
    a: Matrix,
    b: Vec<f64>,
}

impl Polytope {
    pub fn new(a: Matrix, b: Vec<f64>) -> Result<Self> {
        let (r, n) = (a.rows(), a.cols());
        if n == 0 {
            return Err(Error::invalid("polytope dimension must be positive"));
        }
        if b.len() != r {
            return Err(Error::invalid(format!(
                "constraint matrix has {r} rows but bound vector has {} entries",
                b.len()
            )));
        }
        if r < n + 1 {
            return Err(Error::invalid(format!(
                "{r} constraints cannot bound a {n}-dimensional polytope (need at least {})",
                n + 1
            )));
        }
        if !a.is_finite() || b.iter().any(|x| !x.is_finite()) {
            return Err(Error::invalid("constraints have non-finite entries"));
        }
        if let Some(i) = (0..r).find(|&i| a.row(i).iter().all(|&x| x == 0.0)) {
            return Err(Error::invalid(format!("constraint row {i} is all zero")));
        }
        Ok(Self { a, b })
    }

    pub fn from_rows<R: AsRef<[f64]>>(a: &[R], b: Vec<f64>) -> Result<Self> {
        Self::new(Matrix::from_rows(a)?, b)
    }

    /// `{lower ≤ x ≤ upper}` as 2n constraints, ordered `-x_0 ≤ -l_0, x_0 ≤ u_0, ...`.
    pub fn axis_box(lower: &[f64], upper: &[f64]) -> Result<Self> {
        if lower.len() != upper.len() {
            return Err(Error::invalid("box bounds differ in dimension"));
        }
        let n = lower.len();
        let mut rows = Vec::with_capacity(2 * n);
        let mut b = Vec::with_capacity(2 * n);
        for j in 0..n {
            let mut lo = vec![0.0; n];
            lo[j] = -1.0;
            rows.push(lo);
            b.push(-lower[j]);
            let mut hi = vec![0.0; n];
            hi[j] = 1.0;
            rows.push(hi);
            b.push(upper[j]);
        }
        Self::from_rows(&rows, b)
    }

    /// Unit hypercube `[0, 1]ⁿ`.
    pub fn hypercube(n: usize) -> Result<Self> {
        Self::axis_box(&vec![0.0; n], &vec![1.0; n])
    }

    /// Standard simplex `{x ≥ 0, Σ x ≤ 1}`.
    pub fn standard_simplex(n: usize) -> Result<Self> {
        let mut rows = Vec::with_capacity(n + 1);
        for j in 0..n {
            let mut r = vec![0.0; n];
            r[j] = -1.0;
            rows.push(r);
        }
        rows.push(vec![1.0; n]);
        let mut b = vec![0.0; n];
        b.push(1.0);
        Self::from_rows(&rows, b)
    }

    /// Cross-polytope `{Σ |x_i| ≤ 1}`: one constraint per sign pattern.
    pub fn cross_polytope(n: usize) -> Result<Self> {
        if n >= 20 {
            return Err(Error::TooLarge(format!(
                "cross-polytope in dimension {n} needs 2^{n} constraints"
            )));
        }
        let rows: Vec<Vec<f64>> = (0..1usize << n)
            .map(|mask| {
                (0..n)
                    .map(|j| if mask >> j & 1 == 1 { -1.0 } else { 1.0 })
                    .collect()
            })
            .collect();
        let b = vec![1.0; rows.len()];
        Self::from_rows(&rows, b)
    }

    /// Copy of `self` with the extra constraints of an axis-aligned box appended.
    pub fn clip_to_box(&self, lower: &[f64], upper: &[f64]) -> Result<Self> {
        let bx = Self::axis_box(lower, upper)?;
        if bx.dim() != self.dim() {
            return Err(Error::invalid("box and polytope differ in dimension"));
        }
        let mut rows: Vec<&[f64]> = (0..self.num_constraints()).map(|i| self.row(i)).collect();
        rows.extend((0..bx.num_constraints()).map(|i| bx.row(i)));
        let mut b = self.b.clone();
        b.extend_from_slice(&bx.b);
        Self::from_rows(&rows, b)
    }

    pub fn dim(&self) -> usize {
        self.a.cols()
    }

    pub fn num_constraints(&self) -> usize {
        self.a.rows()
    }

    pub fn a(&self) -> &Matrix {
        &self.a
    }

    pub fn b(&self) -> &[f64] {
        &self.b
    }

    pub fn row(&self, i: usize) -> &[f64] {
        self.a.row(i)
    }

    pub fn max_abs_b(&self) -> f64 {
        self.b.iter().fold(0.0_f64, |m, x| m.max(x.abs()))
    }

    /// True iff `A_i · p ≤ b_i + eps` for every row.
    pub fn contains(&self, p: &[f64], eps: f64) -> Result<bool> {
        if p.len() != self.dim() {
            return Err(Error::invalid(format!(
                "point has dimension {}, polytope has {}",
                p.len(),
                self.dim()
            )));
        }
        if eps.is_nan() || eps < 0.0 {
            return Err(Error::invalid("containment tolerance must be nonnegative"));
        }
        Ok(self.contains_unchecked(p, eps))
    }

    pub(crate) fn contains_unchecked(&self, p: &[f64], eps: f64) -> bool {
        (0..self.num_constraints()).all(|i| dot(self.row(i), p) <= self.b[i] + eps)
    }
}

/// An n-simplex: n+1 affinely independent points and its edge matrix.
#[derive(Clone, Debug)]
pub struct Simplex {
    vertices: Vec<Point>,
    /// Column `i` is `vertices[i + 1] - vertices[0]`.
    edge_matrix: Matrix,
    abs_det: f64,
}

impl Simplex {
    pub fn new(vertices: Vec<Point>) -> Result<Self> {
        let n = vertices.len().saturating_sub(1);
        if n == 0 {
            return Err(Error::invalid("a simplex needs at least two vertices"));
        }
        if let Some(v) = vertices.iter().find(|v| v.dim() != n) {
            return Err(Error::invalid(format!(
                "{} vertices need dimension {n}, got a vertex of dimension {}",
                n + 1,
                v.dim()
            )));
        }
        let mut edge_matrix = Matrix::zeros(n, n);
        for (j, v) in vertices[1..].iter().enumerate() {
            for i in 0..n {
                edge_matrix[(i, j)] = v[i] - vertices[0][i];
            }
        }
        let abs_det = linalg::abs_determinant(&edge_matrix)?;
        if abs_det == 0.0 {
            return Err(Error::DegenerateSimplex { abs_det });
        }
        Ok(Self {
            vertices,
            edge_matrix,
            abs_det,
        })
    }

    /// Convenience constructor from raw coordinate rows.
    pub fn from_coords<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let pts = rows
            .iter()
            .map(|r| Point::new(r.as_ref().to_vec()))
            .collect::<Result<Vec<_>>>()?;
        Self::new(pts)
    }

    /// Standard simplex `conv{0, e_1, ..., e_n}`.
    pub fn standard(n: usize) -> Result<Self> {
        let mut pts = vec![Point::origin(n)];
        for i in 0..n {
            let mut e = vec![0.0; n];
            e[i] = 1.0;
            pts.push(Point::from_vec_unchecked(e));
        }
        Self::new(pts)
    }

    pub fn dim(&self) -> usize {
        self.edge_matrix.rows()
    }

    pub fn vertices(&self) -> &[Point] {
        &self.vertices
    }

    pub fn edge_matrix(&self) -> &Matrix {
        &self.edge_matrix
    }

    pub fn abs_det(&self) -> f64 {
        self.abs_det
    }

    /// `|det V₀| / n!`
    pub fn volume(&self) -> f64 {
        self.abs_det / linalg::factorial(self.dim())
    }

    /// `v₀ + V₀ w` for `w` in the unit simplex `{w ≥ 0, Σ w ≤ 1}`.
    pub fn map_to_simplex(&self, w: &[f64]) -> Result<Point> {
        const TOL: f64 = 1e-12;
        if w.len() != self.dim() {
            return Err(Error::invalid(format!(
                "weight vector has length {}, simplex has dimension {}",
                w.len(),
                self.dim()
            )));
        }
        if w.iter().any(|&x| x.is_nan() || x < -TOL) || w.iter().sum::<f64>() > 1.0 + TOL {
            return Err(Error::invalid(
                "weights lie outside the unit simplex {w >= 0, sum w <= 1}",
            ));
        }
        let mut p = self.edge_matrix.mul_vec(w);
        for (x, v0) in p.iter_mut().zip(self.vertices[0].iter()) {
            *x += v0;
        }
        Point::new(p)
    }

    /// Unchecked affine map into `out`; the sampler hot path.
    pub(crate) fn map_into(&self, w: &[f64], out: &mut [f64]) {
        let n = self.dim();
        let v0 = &self.vertices[0];
        for i in 0..n {
            let row = self.edge_matrix.row(i);
            out[i] = v0[i] + dot(row, w);
        }
    }

    /// Barycentric coordinates `(λ₀, ..., λ_n)` of `p`, with `Σ λ = 1`.
    pub fn barycentric(&self, p: &[f64]) -> Result<Vec<f64>> {
        if p.len() != self.dim() {
            return Err(Error::invalid("point dimension differs from simplex"));
        }
        let rhs: Vec<f64> = p
            .iter()
            .zip(self.vertices[0].iter())
            .map(|(x, v)| x - v)
            .collect();
        let w = Lu::factor(&self.edge_matrix)?
            .solve(&rhs)
            .ok_or(Error::DegenerateSimplex {
                abs_det: self.abs_det,
            })?;
        let mut lambda = Vec::with_capacity(w.len() + 1);
        lambda.push(1.0 - w.iter().sum::<f64>());
        lambda.extend(w);
        Ok(lambda)
    }

    /// H-representation with n+1 facet constraints.
    ///
    /// Row 0 is `Σ w ≤ 1`, rows 1..=n are `w_i ≥ 0`, where `w = V₀⁻¹ (p - v₀)`.
    pub fn to_polytope(&self) -> Result<Polytope> {
        let n = self.dim();
        let inv = Lu::factor(&self.edge_matrix)?
            .inverse()
            .ok_or(Error::DegenerateSimplex {
                abs_det: self.abs_det,
            })?;
        let inv_v0 = inv.mul_vec(&self.vertices[0]);
        let mut rows = Vec::with_capacity(n + 1);
        let mut b = Vec::with_capacity(n + 1);
        rows.push(
            (0..n)
                .map(|j| (0..n).map(|i| inv[(i, j)]).sum())
                .collect::<Vec<f64>>(),
        );
        b.push(1.0 + inv_v0.iter().sum::<f64>());
        for (i, c) in inv_v0.iter().enumerate() {
            rows.push(inv.row(i).iter().map(|x| -x).collect());
            b.push(-c);
        }
        Polytope::from_rows(&rows, b)
    }
}
