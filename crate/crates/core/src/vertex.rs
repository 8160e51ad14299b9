//! H-to-V conversion and the geometric anchors derived from a vertex set.
//!
//! Two enumeration routes share one contract:
//!
//! - [`VertexMethod::BasisEnumeration`] tries every choice of `n` constraint
//!   rows, solves the square system, and keeps feasible solutions. Simple and
//!   exact, but it touches all `C(r, n)` subsets and refuses above
//!   [`MAX_BASES`].
//! - [`VertexMethod::DoubleDescription`] homogenizes `Ax ≤ b` into the cone
//!   `{(x, t) : Ax - bt ≤ 0, t ≥ 0}` and inserts constraints one at a time,
//!   tracking the extreme rays. Its cost follows the number of vertices rather
//!   than the number of bases, which matters for highly degenerate inputs such
//!   as the cross-polytope (every vertex lies on 2ⁿ⁻¹ facets).
//!
//! Output is deduplicated and sorted lexicographically, so both routes return
//! identical sets up to floating-point noise.

use std::cmp::Ordering;

use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::geometry::{Point, Polytope};
use crate::linalg::{self, dot, Lu, Matrix};

/// Default feasibility tolerance for basis solutions.
pub const DEFAULT_EPS: f64 = 1e-9;
/// Relative tolerance for merging coincident vertices and for incidence.
pub const DEDUP_RTOL: f64 = 1e-8;
/// Largest `C(r, n)` basis enumeration accepts.
pub const MAX_BASES: u128 = 10_000_000;

/// Which algorithm converts the H-representation to vertices.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum VertexMethod {
    BasisEnumeration,
    DoubleDescription,
    /// Basis enumeration when `C(r, n) ≤ MAX_BASES`, double description otherwise.
    #[default]
    Auto,
}

/// The extreme points of a full-dimensional polytope, sorted lexicographically.
#[derive(Clone, Debug, PartialEq)]
pub struct VertexSet {
    n: usize,
    vertices: Vec<Point>,
    dedup_eps: f64,
}

impl VertexSet {
    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn vertices(&self) -> &[Point] {
        &self.vertices
    }

    pub fn dedup_eps(&self) -> f64 {
        self.dedup_eps
    }

    /// Wrap an externally supplied vertex list (e.g. a V-representation file).
    ///
    /// Sorts and deduplicates but does not check extremality.
    pub fn from_points(n: usize, points: Vec<Point>, dedup_eps: f64) -> Result<Self> {
        if let Some(p) = points.iter().find(|p| p.dim() != n) {
            return Err(Error::invalid(format!(
                "vertex of dimension {} in a {n}-dimensional set",
                p.dim()
            )));
        }
        let coords = points.into_iter().map(Point::into_inner).collect();
        let vertices = dedup_sorted(coords, dedup_eps);
        Ok(Self {
            n,
            vertices,
            dedup_eps,
        })
    }

    /// Coordinate-wise mean of the vertices; strictly interior for a
    /// full-dimensional polytope.
    pub fn interior_point(&self) -> Result<Point> {
        if self.vertices.is_empty() {
            return Err(Error::invalid("empty vertex set has no interior point"));
        }
        let m = self.vertices.len() as f64;
        let mut c = vec![0.0; self.n];
        for v in &self.vertices {
            for (ci, vi) in c.iter_mut().zip(v.iter()) {
                *ci += vi;
            }
        }
        c.iter_mut().for_each(|x| *x /= m);
        Point::new(c)
    }

    /// Coordinate-wise `(min, max)` over the vertices.
    pub fn bounding_box(&self) -> Result<(Vec<f64>, Vec<f64>)> {
        if self.vertices.is_empty() {
            return Err(Error::invalid("empty vertex set has no bounding box"));
        }
        let mut lo = vec![f64::INFINITY; self.n];
        let mut hi = vec![f64::NEG_INFINITY; self.n];
        for v in &self.vertices {
            for j in 0..self.n {
                lo[j] = lo[j].min(v[j]);
                hi[j] = hi[j].max(v[j]);
            }
        }
        Ok((lo, hi))
    }
}

/// For each constraint row, the sorted indices of vertices tight on it.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FacetIncidence {
    sets: Vec<Vec<usize>>,
}

impl FacetIncidence {
    pub fn tight(&self, row: usize) -> &[usize] {
        &self.sets[row]
    }

    pub fn num_constraints(&self) -> usize {
        self.sets.len()
    }

    pub fn sets(&self) -> &[Vec<usize>] {
        &self.sets
    }
}

/// `C(r, k)` saturating at `u128::MAX`.
pub fn binomial(r: usize, k: usize) -> u128 {
    if k > r {
        return 0;
    }
    let k = k.min(r - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = match acc.checked_mul((r - i) as u128) {
            Some(x) => x / (i as u128 + 1),
            None => return u128::MAX,
        };
    }
    acc
}

fn incidence_tol(p: &Polytope) -> f64 {
    DEDUP_RTOL * (1.0 + p.max_abs_b())
}

/// Vertices of `p` by exhaustive basis enumeration.
pub fn enumerate_vertices(p: &Polytope, eps: f64) -> Result<VertexSet> {
    enumerate_vertices_with(p, eps, VertexMethod::BasisEnumeration, Execution::default())
}

pub fn enumerate_vertices_with(
    p: &Polytope,
    eps: f64,
    method: VertexMethod,
    exec: Execution,
) -> Result<VertexSet> {
    if eps.is_nan() || eps < 0.0 {
        return Err(Error::invalid("feasibility tolerance must be nonnegative"));
    }
    let (r, n) = (p.num_constraints(), p.dim());
    let bases = binomial(r, n);
    let method = match method {
        VertexMethod::Auto if bases <= MAX_BASES => VertexMethod::BasisEnumeration,
        VertexMethod::Auto => VertexMethod::DoubleDescription,
        m => m,
    };
    let dedup_eps = DEDUP_RTOL * (1.0 + p.max_abs_b());
    let candidates = match method {
        VertexMethod::BasisEnumeration => {
            if bases > MAX_BASES {
                return Err(Error::TooLarge(format!(
                    "basis enumeration would visit C({r}, {n}) = {bases} subsets (limit {MAX_BASES})"
                )));
            }
            let found = basis_candidates(p, eps, exec);
            if found.len() > n {
                check_no_recession_ray(p, exec)?;
            }
            found
        }
        VertexMethod::DoubleDescription => double_description(p)?
            .into_iter()
            .filter(|v| p.contains_unchecked(v, eps.max(dedup_eps)))
            .collect(),
        VertexMethod::Auto => unreachable!(),
    };
    let vertices = dedup_sorted(candidates, dedup_eps);
    if vertices.len() < n + 1 {
        return Err(Error::NotBounded(format!(
            "found {} vertices, a bounded full-dimensional polytope in dimension {n} has at least {}",
            vertices.len(),
            n + 1
        )));
    }
    let diffs: Vec<Vec<f64>> = vertices[1..]
        .iter()
        .map(|v| {
            v.iter()
                .zip(vertices[0].iter())
                .map(|(a, b)| a - b)
                .collect()
        })
        .collect();
    if linalg::rank(&diffs, 1e-10) < n {
        return Err(Error::DegeneratePolytope(format!(
            "the {} vertices span less than {n} dimensions",
            vertices.len()
        )));
    }
    Ok(VertexSet {
        n,
        vertices,
        dedup_eps,
    })
}

/// Tight-constraint sets per row; residuals are measured as Euclidean distance
/// to the constraint hyperplane and compared with `eps`.
pub fn facet_incidence(p: &Polytope, v: &VertexSet, eps: f64) -> FacetIncidence {
    let sets = (0..p.num_constraints())
        .map(|i| {
            let row = p.row(i);
            let norm = dot(row, row).sqrt();
            v.vertices()
                .iter()
                .enumerate()
                .filter(|(_, x)| (dot(row, x) - p.b()[i]).abs() <= eps * norm)
                .map(|(k, _)| k)
                .collect()
        })
        .collect();
    FacetIncidence { sets }
}

/// [`facet_incidence`] with the default tolerance `1e-8 (1 + max |b|)`.
pub fn default_facet_incidence(p: &Polytope, v: &VertexSet) -> FacetIncidence {
    facet_incidence(p, v, incidence_tol(p))
}

fn lex_cmp(a: &[f64], b: &[f64]) -> Ordering {
    a.iter()
        .zip(b)
        .map(|(x, y)| x.total_cmp(y))
        .find(|o| o.is_ne())
        .unwrap_or(Ordering::Equal)
}

fn dedup_sorted(mut candidates: Vec<Vec<f64>>, eps: f64) -> Vec<Point> {
    for c in candidates.iter_mut() {
        // normalizes -0.0
        c.iter_mut().for_each(|x| *x += 0.0);
    }
    candidates.sort_by(|a, b| lex_cmp(a, b));
    let mut kept: Vec<Vec<f64>> = Vec::new();
    let eps2 = eps * eps;
    for c in candidates {
        let dup = kept.iter().rev().any(|k| {
            k.iter()
                .zip(&c)
                .map(|(a, b)| (a - b) * (a - b))
                .sum::<f64>()
                <= eps2
        });
        if !dup {
            kept.push(c);
        }
    }
    kept.into_iter().map(Point::from_vec_unchecked).collect()
}

/// Visit every increasing `k`-subset of `start..r` extended from `prefix`.
fn for_each_combination(
    r: usize,
    k: usize,
    prefix: &mut Vec<usize>,
    start: usize,
    f: &mut impl FnMut(&[usize]),
) {
    if prefix.len() == k {
        f(prefix);
        return;
    }
    let remaining = k - prefix.len();
    for i in start..=r.saturating_sub(remaining) {
        prefix.push(i);
        for_each_combination(r, k, prefix, i + 1, f);
        prefix.pop();
    }
}

fn basis_candidates(p: &Polytope, eps: f64, exec: Execution) -> Vec<Vec<f64>> {
    let (r, n) = (p.num_constraints(), p.dim());
    let chunks = exec.map_range(r.saturating_sub(n - 1), |first| {
        let mut out = Vec::new();
        let mut sub = Matrix::zeros(n, n);
        let mut rhs = vec![0.0; n];
        let mut prefix = vec![first];
        for_each_combination(r, n, &mut prefix, first + 1, &mut |basis| {
            for (k, &row) in basis.iter().enumerate() {
                for j in 0..n {
                    sub[(k, j)] = p.row(row)[j];
                }
                rhs[k] = p.b()[row];
            }
            let Ok(lu) = Lu::factor(&sub) else { return };
            if let Some(x) = lu.solve(&rhs) {
                if x.iter().all(|v| v.is_finite()) && p.contains_unchecked(&x, eps) {
                    out.push(x);
                }
            }
        });
        out
    });
    chunks.into_iter().flatten().collect()
}

/// Errors when `{d : A d ≤ 0}` has an extreme ray, i.e. the polyhedron is unbounded.
///
/// Extreme rays of this pointed cone are one-dimensional kernels of `n - 1`
/// rows of `A`; each kernel direction is computed by signed cofactors.
fn check_no_recession_ray(p: &Polytope, exec: Execution) -> Result<()> {
    let (r, n) = (p.num_constraints(), p.dim());
    let norms: Vec<f64> = (0..r).map(|i| dot(p.row(i), p.row(i)).sqrt()).collect();
    let is_ray = |d: &[f64]| (0..r).all(|i| dot(p.row(i), d) <= 1e-9 * norms[i]);
    if n == 1 {
        return if is_ray(&[1.0]) || is_ray(&[-1.0]) {
            Err(Error::NotBounded("the feasible set contains a ray".into()))
        } else {
            Ok(())
        };
    }
    let found = exec.map_range(r.saturating_sub(n - 2), |first| {
        let mut found = None;
        let mut prefix = vec![first];
        let mut minor = Matrix::zeros(n - 1, n - 1);
        for_each_combination(r, n - 1, &mut prefix, first + 1, &mut |rows| {
            if found.is_some() {
                return;
            }
            let mut d = vec![0.0; n];
            for (skip, dj) in d.iter_mut().enumerate() {
                for (k, &row) in rows.iter().enumerate() {
                    for (c, j) in (0..n).filter(|&j| j != skip).enumerate() {
                        minor[(k, c)] = p.row(row)[j];
                    }
                }
                let det = linalg::determinant(&minor).unwrap_or(0.0);
                *dj = if skip % 2 == 0 { det } else { -det };
            }
            let scale = d.iter().fold(0.0_f64, |m, x| m.max(x.abs()));
            if scale == 0.0 {
                return;
            }
            d.iter_mut().for_each(|x| *x /= scale);
            if is_ray(&d) {
                found = Some(d.clone());
            } else {
                d.iter_mut().for_each(|x| *x = -*x);
                if is_ray(&d) {
                    found = Some(d);
                }
            }
        });
        found
    });
    match found.into_iter().flatten().next() {
        Some(d) => Err(Error::NotBounded(format!(
            "the feasible set is unbounded along direction {d:?}"
        ))),
        None => Ok(()),
    }
}

#[derive(Clone, Debug)]
struct Ray {
    y: Vec<f64>,
    zero: Vec<u64>,
}

fn bit_set(bits: &mut [u64], i: usize) {
    bits[i / 64] |= 1 << (i % 64);
}

fn normalize_max(y: &mut [f64]) {
    let m = y.iter().fold(0.0_f64, |m, x| m.max(x.abs()));
    if m > 0.0 {
        y.iter_mut().for_each(|x| *x /= m);
    }
}

/// Double description on the homogenized cone; returns raw vertex coordinates.
fn double_description(p: &Polytope) -> Result<Vec<Vec<f64>>> {
    const ZERO_TOL: f64 = 1e-10;
    let (r, n) = (p.num_constraints(), p.dim());
    let d = n + 1;
    // Row r is t ≥ 0.
    let mut rows: Vec<Vec<f64>> = (0..r)
        .map(|i| {
            let mut h = p.row(i).to_vec();
            h.push(-p.b()[i]);
            normalize_max(&mut h);
            h
        })
        .collect();
    let mut t_row = vec![0.0; d];
    t_row[n] = -1.0;
    rows.push(t_row);
    let words = (r + 1).div_ceil(64);

    // Greedy choice of d independent rows, starting with t ≥ 0.
    let order: Vec<usize> = std::iter::once(r).chain(0..r).collect();
    let mut chosen: Vec<usize> = Vec::with_capacity(d);
    let mut reduced: Vec<Vec<f64>> = Vec::with_capacity(d);
    for &i in &order {
        if chosen.len() == d {
            break;
        }
        let mut v = rows[i].clone();
        for b in &reduced {
            let f = dot(&v, b);
            v.iter_mut().zip(b).for_each(|(x, y)| *x -= f * y);
        }
        let norm = dot(&v, &v).sqrt();
        if norm > 1e-9 {
            v.iter_mut().for_each(|x| *x /= norm);
            reduced.push(v);
            chosen.push(i);
        }
    }
    if chosen.len() < d {
        return Err(Error::NotBounded(
            "constraint matrix is rank deficient, the feasible set contains a line".into(),
        ));
    }
    let h = Matrix::from_rows(&chosen.iter().map(|&i| rows[i].clone()).collect::<Vec<_>>())?;
    let inv = Lu::factor(&h)?
        .inverse()
        .ok_or_else(|| Error::NumericalDegeneracy("initial cone is singular".into()))?;
    let mut rays: Vec<Ray> = (0..d)
        .map(|j| {
            let mut y: Vec<f64> = inv.column(j).iter().map(|x| -x).collect();
            normalize_max(&mut y);
            let mut zero = vec![0u64; words];
            for (k, &i) in chosen.iter().enumerate() {
                if k != j {
                    bit_set(&mut zero, i);
                }
            }
            Ray { y, zero }
        })
        .collect();

    let mut in_basis = vec![false; r + 1];
    chosen.iter().for_each(|&i| in_basis[i] = true);
    for i in (0..r + 1).filter(|&i| !in_basis[i]) {
        let h = &rows[i];
        let s: Vec<f64> = rays.iter().map(|ray| dot(h, &ray.y)).collect();
        let pos: Vec<usize> = (0..rays.len()).filter(|&k| s[k] > ZERO_TOL).collect();
        if pos.is_empty() {
            for (ray, &sk) in rays.iter_mut().zip(&s) {
                if sk.abs() <= ZERO_TOL {
                    bit_set(&mut ray.zero, i);
                }
            }
            continue;
        }
        let neg: Vec<usize> = (0..rays.len()).filter(|&k| s[k] < -ZERO_TOL).collect();
        let mut next: Vec<Ray> = Vec::with_capacity(rays.len());
        for &pk in &pos {
            for &nk in &neg {
                let common: Vec<u64> = rays[pk]
                    .zero
                    .iter()
                    .zip(&rays[nk].zero)
                    .map(|(a, b)| a & b)
                    .collect();
                let count: u32 = common.iter().map(|w| w.count_ones()).sum();
                if (count as usize) + 2 < d {
                    continue;
                }
                let adjacent = rays.iter().enumerate().all(|(k, other)| {
                    k == pk || k == nk || !other.zero.iter().zip(&common).all(|(o, c)| o & c == *c)
                });
                if !adjacent {
                    continue;
                }
                let (sp, sn) = (s[pk], s[nk]);
                let mut y: Vec<f64> = rays[nk]
                    .y
                    .iter()
                    .zip(&rays[pk].y)
                    .map(|(yn, yp)| sp * yn - sn * yp)
                    .collect();
                normalize_max(&mut y);
                let mut zero = common;
                bit_set(&mut zero, i);
                next.push(Ray { y, zero });
            }
        }
        for (k, mut ray) in rays.into_iter().enumerate() {
            if s[k] > ZERO_TOL {
                continue;
            }
            if s[k] >= -ZERO_TOL {
                bit_set(&mut ray.zero, i);
            }
            next.push(ray);
        }
        rays = next;
    }

    if rays.is_empty() {
        return Err(Error::NotBounded("the feasible set is empty".into()));
    }
    let mut out = Vec::with_capacity(rays.len());
    for ray in rays {
        let t = ray.y[n];
        if t <= ZERO_TOL {
            return Err(Error::NotBounded(format!(
                "the feasible set is unbounded along direction {:?}",
                &ray.y[..n]
            )));
        }
        out.push(ray.y[..n].iter().map(|x| x / t).collect());
    }
    Ok(out)
}
