//! Simplicial decomposition by recursive boundary coning (a pulling triangulation).
//!
//! For a face `F` of dimension `d` with apex `a` (its lexicographically least
//! vertex), every facet of `F` not containing `a` is triangulated recursively
//! and each resulting `(d-1)`-simplex is coned to `a`. Faces are identified
//! combinatorially: a facet of `F` is a maximal set `F ∩ tight(i)` whose affine
//! hull has dimension `d - 1`, so no coordinate projection is needed and every
//! simplex vertex is an input vertex.

use std::collections::{HashMap, HashSet};
use std::rc::Rc;

use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::geometry::{Point, Polytope, Simplex};
use crate::linalg::{self, compensated_sum};
use crate::vertex::{FacetIncidence, VertexSet};

const RANK_RTOL: f64 = 1e-9;

/// The simplices of a triangulation together with their volume weights.
#[derive(Clone, Debug)]
pub struct Decomposition {
    n: usize,
    simplices: Vec<Simplex>,
    vertex_indices: Vec<Vec<usize>>,
    volumes: Vec<f64>,
    total_volume: f64,
    weights: Vec<f64>,
    dropped: usize,
}

impl Decomposition {
    /// Assemble from simplices; volumes, total and weights are derived.
    pub fn from_simplices(
        simplices: Vec<Simplex>,
        vertex_indices: Vec<Vec<usize>>,
        dropped: usize,
    ) -> Result<Self> {
        let Some(first) = simplices.first() else {
            return Err(Error::DegeneratePolytope(
                "triangulation produced no full-dimensional simplex".into(),
            ));
        };
        let n = first.dim();
        if simplices.iter().any(|s| s.dim() != n) {
            return Err(Error::invalid("simplices of mixed dimension"));
        }
        if vertex_indices.len() != simplices.len() {
            return Err(Error::invalid(
                "one vertex-index list per simplex is required",
            ));
        }
        let volumes: Vec<f64> = simplices.iter().map(Simplex::volume).collect();
        let total_volume = compensated_sum(volumes.iter().copied());
        let weights = volumes.iter().map(|v| v / total_volume).collect();
        Ok(Self {
            n,
            simplices,
            vertex_indices,
            volumes,
            total_volume,
            weights,
            dropped,
        })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.simplices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.simplices.is_empty()
    }

    pub fn simplices(&self) -> &[Simplex] {
        &self.simplices
    }

    /// Indices into the originating [`VertexSet`], one list per simplex.
    pub fn vertex_indices(&self) -> &[Vec<usize>] {
        &self.vertex_indices
    }

    pub fn volumes(&self) -> &[f64] {
        &self.volumes
    }

    pub fn total_volume(&self) -> f64 {
        self.total_volume
    }

    /// `q_k = Vol(S_k) / Vol(P)`.
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Slivers discarded for falling below the determinant tolerance.
    pub fn dropped(&self) -> usize {
        self.dropped
    }
}

/// Sum of simplex volumes.
pub fn polytope_volume(d: &Decomposition) -> f64 {
    d.total_volume()
}

/// The constant density of the mixture on `P`: `n! / Σ_j |det V₀ⱼ|`.
///
/// The flat Dirichlet has density `n!` on the unit simplex, so each simplex
/// contributes `n! / |det V₀ₖ|` times its weight `q_k`; the weights cancel the
/// per-simplex determinant and leave the same constant everywhere, `1 / Vol(P)`.
pub fn uniform_density_value(d: &Decomposition) -> f64 {
    let dets = compensated_sum(d.simplices.iter().map(Simplex::abs_det));
    linalg::factorial(d.n) / dets
}

pub fn triangulate(p: &Polytope, v: &VertexSet, inc: &FacetIncidence) -> Result<Decomposition> {
    triangulate_with(p, v, inc, Execution::default())
}

pub fn triangulate_with(
    p: &Polytope,
    v: &VertexSet,
    inc: &FacetIncidence,
    exec: Execution,
) -> Result<Decomposition> {
    let n = p.dim();
    if v.dim() != n {
        return Err(Error::invalid(
            "vertex set and polytope differ in dimension",
        ));
    }
    if inc.num_constraints() != p.num_constraints() {
        return Err(Error::InconsistentIncidence(format!(
            "{} incidence sets for {} constraints",
            inc.num_constraints(),
            p.num_constraints()
        )));
    }
    let ctx = FaceCtx {
        points: v.vertices(),
        tight: inc.sets(),
    };
    let all: Vec<usize> = (0..v.len()).collect();
    let index_lists: Vec<Vec<usize>> = if n == 1 {
        if all.len() != 2 {
            return Err(Error::InconsistentIncidence(format!(
                "a segment needs 2 vertices, got {}",
                all.len()
            )));
        }
        vec![all]
    } else {
        let apex = all[0];
        let facets = ctx.facets(&all, n)?;
        let per_facet = exec.map(facets, |facet| -> Result<Vec<Vec<usize>>> {
            let mut memo = HashMap::new();
            let tri = ctx.triangulate_face(&facet, n - 1, &mut memo)?;
            Ok(tri
                .iter()
                .map(|s| std::iter::once(apex).chain(s.iter().copied()).collect())
                .collect())
        });
        let mut lists = Vec::new();
        for r in per_facet {
            lists.extend(r?);
        }
        lists
    };

    let points = v.vertices();
    let built = exec.map(index_lists, |idx| {
        let pts: Vec<Point> = idx.iter().map(|&k| points[k].clone()).collect();
        (Simplex::new(pts), idx)
    });
    let mut simplices = Vec::with_capacity(built.len());
    let mut indices = Vec::with_capacity(built.len());
    let mut dropped = 0;
    for (s, idx) in built {
        match s {
            Ok(s) => {
                simplices.push(s);
                indices.push(idx);
            }
            Err(Error::DegenerateSimplex { .. }) => dropped += 1,
            Err(e) => return Err(e),
        }
    }
    Decomposition::from_simplices(simplices, indices, dropped)
}

struct FaceCtx<'a> {
    points: &'a [Point],
    tight: &'a [Vec<usize>],
}

type Memo = HashMap<Vec<usize>, Rc<Vec<Vec<usize>>>>;

impl FaceCtx<'_> {
    fn affine_dim(&self, face: &[usize]) -> usize {
        let base = &self.points[face[0]];
        let diffs: Vec<Vec<f64>> = face[1..]
            .iter()
            .map(|&k| {
                self.points[k]
                    .iter()
                    .zip(base.iter())
                    .map(|(a, b)| a - b)
                    .collect()
            })
            .collect();
        linalg::rank(&diffs, RANK_RTOL)
    }

    /// Facets of `face` (dimension `dim`) that avoid its apex `face[0]`, sorted.
    fn facets(&self, face: &[usize], dim: usize) -> Result<Vec<Vec<usize>>> {
        let mut seen: HashSet<Vec<usize>> = HashSet::new();
        let mut any = false;
        let mut out = Vec::new();
        for tight in self.tight {
            let g = intersect_sorted(face, tight);
            if g.len() < dim || g.len() == face.len() || !seen.insert(g.clone()) {
                continue;
            }
            if self.affine_dim(&g) != dim - 1 {
                continue;
            }
            any = true;
            if g[0] != face[0] {
                out.push(g);
            }
        }
        if !any {
            return Err(Error::InconsistentIncidence(format!(
                "a {dim}-face with {} vertices has no facets",
                face.len()
            )));
        }
        out.sort();
        Ok(out)
    }

    fn triangulate_face(
        &self,
        face: &[usize],
        dim: usize,
        memo: &mut Memo,
    ) -> Result<Rc<Vec<Vec<usize>>>> {
        if let Some(hit) = memo.get(face) {
            return Ok(Rc::clone(hit));
        }
        let result = match dim {
            0 => vec![vec![face[0]]],
            1 => {
                if face.len() != 2 {
                    return Err(Error::InconsistentIncidence(format!(
                        "an edge has {} vertices",
                        face.len()
                    )));
                }
                vec![face.to_vec()]
            }
            _ => {
                let apex = face[0];
                let mut out = Vec::new();
                for facet in self.facets(face, dim)? {
                    for s in self.triangulate_face(&facet, dim - 1, memo)?.iter() {
                        out.push(std::iter::once(apex).chain(s.iter().copied()).collect());
                    }
                }
                out
            }
        };
        let rc = Rc::new(result);
        memo.insert(face.to_vec(), Rc::clone(&rc));
        Ok(rc)
    }
}

fn intersect_sorted(a: &[usize], b: &[usize]) -> Vec<usize> {
    let (mut i, mut j) = (0, 0);
    let mut out = Vec::new();
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                out.push(a[i]);
                i += 1;
                j += 1;
            }
        }
    }
    out
}

/// Convenience: enumerate vertices (auto method), incidence, and triangulate.
pub fn decompose(p: &Polytope, exec: Execution) -> Result<(VertexSet, Decomposition)> {
    use crate::vertex::{
        default_facet_incidence, enumerate_vertices_with, VertexMethod, DEFAULT_EPS,
    };
    let v = enumerate_vertices_with(p, DEFAULT_EPS, VertexMethod::Auto, exec)?;
    let inc = default_facet_incidence(p, &v);
    let d = triangulate_with(p, &v, &inc, exec)?;
    Ok((v, d))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn vol(p: &Polytope) -> (usize, f64) {
        let (_, d) = decompose(p, Execution::Sequential).unwrap();
        (d.len(), polytope_volume(&d))
    }

    #[test]
    fn two_simplex_is_one_simplex() {
        let (k, v) = vol(&Polytope::standard_simplex(2).unwrap());
        assert_eq!(k, 1);
        assert_eq!(v, 0.5);
    }

    #[test]
    fn square_splits_in_two() {
        let (_, d) = decompose(&Polytope::hypercube(2).unwrap(), Execution::Sequential).unwrap();
        assert_eq!(d.len(), 2);
        assert_eq!(d.volumes(), &[0.5, 0.5]);
        assert_eq!(d.weights(), &[0.5, 0.5]);
        assert_eq!(uniform_density_value(&d), 1.0);
    }

    #[test]
    fn cube_gives_six_tetrahedra() {
        let (k, v) = vol(&Polytope::hypercube(3).unwrap());
        assert_eq!(k, 6);
        assert!((v - 1.0).abs() < 1e-15);
    }

    #[test]
    fn hypercube_counts_follow_factorial() {
        // pulling from the origin: K(n) = n K(n-1)
        for n in 2..=6 {
            let (k, v) = vol(&Polytope::hypercube(n).unwrap());
            assert_eq!(k as f64, linalg::factorial(n));
            assert!((v - 1.0).abs() <= 1e-9);
        }
    }

    #[test]
    fn density_examples() {
        let (_, d) = decompose(
            &Polytope::standard_simplex(2).unwrap(),
            Execution::Sequential,
        )
        .unwrap();
        assert_eq!(uniform_density_value(&d), 2.0);
        let big = Polytope::axis_box(&[0.0, 0.0], &[2.0, 2.0]).unwrap();
        let (_, d) = decompose(&big, Execution::Sequential).unwrap();
        assert_eq!(uniform_density_value(&d), 0.25);
    }

    #[test]
    fn cross_polytope_volume() {
        let (_, v) = vol(&Polytope::cross_polytope(3).unwrap());
        assert!((v - 4.0 / 3.0).abs() <= 1e-9 * 4.0 / 3.0);
    }

    #[test]
    fn segment() {
        let p = Polytope::from_rows(&[vec![1.0], vec![-1.0]], vec![3.0, 1.0]).unwrap();
        let (k, v) = vol(&p);
        assert_eq!((k, v), (1, 4.0));
    }

    #[test]
    fn mismatched_incidence_is_rejected() {
        let p = Polytope::hypercube(2).unwrap();
        let q = Polytope::hypercube(3).unwrap();
        let (vp, _) = decompose(&p, Execution::Sequential).unwrap();
        let (vq, _) = decompose(&q, Execution::Sequential).unwrap();
        let inc_q = crate::vertex::default_facet_incidence(&q, &vq);
        assert!(triangulate(&p, &vp, &inc_q).is_err());
        assert!(Decomposition::from_simplices(vec![], vec![], 0).is_err());
    }

    #[test]
    fn sequential_and_parallel_agree() {
        let p = Polytope::hypercube(4).unwrap();
        let (_, a) = decompose(&p, Execution::Sequential).unwrap();
        let (_, b) = decompose(&p, Execution::Parallel).unwrap();
        assert_eq!(a.vertex_indices(), b.vertex_indices());
        assert_eq!(a.volumes(), b.volumes());
    }
}
