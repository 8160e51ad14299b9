mod common;

use common::{random_polytope, slacks};
use polysample::linalg::{factorial, rank};
use polysample::triangulation::{
    decompose, polytope_volume, triangulate_with, uniform_density_value,
};
use polysample::vertex::{
    default_facet_incidence, enumerate_vertices, enumerate_vertices_with, DEFAULT_EPS,
};
use polysample::{Execution, Polytope, Simplex, VertexMethod};
use proptest::prelude::*;

fn assert_feasible_and_extreme(p: &Polytope) {
    let n = p.dim();
    let v = enumerate_vertices(p, DEFAULT_EPS).unwrap();
    for (k, x) in v.vertices().iter().enumerate() {
        let s = slacks(p, x);
        assert!(s.iter().all(|&t| t > -1e-9), "infeasible vertex {x:?}");
        let tight: Vec<&[f64]> = (0..p.num_constraints())
            .filter(|&i| s[i].abs() < 1e-8)
            .map(|i| p.row(i))
            .collect();
        assert_eq!(rank(&tight, 1e-10), n, "vertex {x:?} is not extreme");
        // the sum of tight normals is maximized over P at x alone
        let c: Vec<f64> = (0..n).map(|j| tight.iter().map(|r| r[j]).sum()).collect();
        let score = |y: &[f64]| c.iter().zip(y).map(|(a, b)| a * b).sum::<f64>();
        for (l, y) in v.vertices().iter().enumerate() {
            assert!(
                l == k || score(x) > score(y) + 1e-9,
                "{x:?} does not beat {y:?}"
            );
        }
    }
}

#[test]
fn vertices_are_feasible_and_extreme() {
    for seed in 0..10 {
        let n = 2 + (seed as usize % 3);
        assert_feasible_and_extreme(&random_polytope(n, n + 2, seed));
    }
    for n in 2..=4 {
        assert_feasible_and_extreme(&Polytope::hypercube(n).unwrap());
        assert_feasible_and_extreme(&Polytope::cross_polytope(n).unwrap());
        assert_feasible_and_extreme(&Polytope::standard_simplex(n).unwrap());
    }
}

#[test]
fn both_enumeration_methods_agree() {
    for seed in 0..12 {
        let n = 2 + (seed as usize % 3);
        let p = random_polytope(n, 2 * n, 100 + seed);
        let a = enumerate_vertices_with(
            &p,
            DEFAULT_EPS,
            VertexMethod::BasisEnumeration,
            Execution::Sequential,
        )
        .unwrap();
        let b = enumerate_vertices_with(
            &p,
            DEFAULT_EPS,
            VertexMethod::DoubleDescription,
            Execution::Parallel,
        )
        .unwrap();
        assert_eq!(a.len(), b.len(), "seed {seed}");
        // lex order can differ in the last ulp, so match as sets
        for x in a.vertices() {
            let hit = b
                .vertices()
                .iter()
                .any(|y| x.iter().zip(y.iter()).all(|(s, t)| (s - t).abs() < 1e-9));
            assert!(hit, "seed {seed}: {x:?} missing from double description");
        }
    }
}

#[test]
fn enumeration_is_deterministic() {
    let p = random_polytope(4, 6, 7);
    let a = enumerate_vertices(&p, DEFAULT_EPS).unwrap();
    let b = enumerate_vertices(&p, DEFAULT_EPS).unwrap();
    assert_eq!(a, b);
    let (_, d1) = decompose(&p, Execution::Parallel).unwrap();
    let (_, d2) = decompose(&p, Execution::Sequential).unwrap();
    assert_eq!(d1.vertex_indices(), d2.vertex_indices());
    assert_eq!(d1.volumes(), d2.volumes());
}

#[test]
fn simplex_volume_matches_hull() {
    // a random simplex written as H-rep decomposes into itself
    let s = Simplex::from_coords(&[
        [0.1, 0.2, 0.0],
        [2.0, 0.3, 0.1],
        [0.4, 1.7, 0.2],
        [0.3, 0.1, 1.1],
    ])
    .unwrap();
    let p = s.to_polytope().unwrap();
    let (v, d) = decompose(&p, Execution::Sequential).unwrap();
    assert_eq!((v.len(), d.len()), (4, 1));
    assert!((polytope_volume(&d) - s.volume()).abs() < 1e-12 * s.volume());
}

#[test]
fn simplex_family_volume() {
    for n in 2..=6 {
        let (_, d) =
            decompose(&Polytope::standard_simplex(n).unwrap(), Execution::Parallel).unwrap();
        assert!((polytope_volume(&d) * factorial(n) - 1.0).abs() < 1e-9);
    }
}

fn translate(p: &Polytope, t: &[f64]) -> Polytope {
    let b = (0..p.num_constraints())
        .map(|i| p.b()[i] + p.row(i).iter().zip(t).map(|(a, v)| a * v).sum::<f64>())
        .collect();
    let rows: Vec<&[f64]> = (0..p.num_constraints()).map(|i| p.row(i)).collect();
    Polytope::from_rows(&rows, b).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn volume_is_translation_invariant(seed in 0u64..1000, t in prop::collection::vec(-5.0f64..5.0, 3)) {
        let p = random_polytope(3, 4, seed);
        let (_, d0) = decompose(&p, Execution::Sequential).unwrap();
        let (_, d1) = decompose(&translate(&p, &t), Execution::Sequential).unwrap();
        let (v0, v1) = (polytope_volume(&d0), polytope_volume(&d1));
        prop_assert!((v0 - v1).abs() <= 1e-9 * v0);
    }

    #[test]
    fn volume_is_row_order_invariant(seed in 0u64..1000, rot in 0usize..10) {
        let p = random_polytope(3, 4, seed);
        let r = p.num_constraints();
        let rows: Vec<&[f64]> = (0..r).map(|i| p.row((i + rot) % r)).collect();
        let b = (0..r).map(|i| p.b()[(i + rot) % r]).collect();
        let q = Polytope::from_rows(&rows, b).unwrap();
        let (_, d0) = decompose(&p, Execution::Sequential).unwrap();
        let (_, d1) = decompose(&q, Execution::Sequential).unwrap();
        let (v0, v1) = (polytope_volume(&d0), polytope_volume(&d1));
        prop_assert!((v0 - v1).abs() <= 1e-9 * v0);
    }

    #[test]
    fn volume_never_exceeds_box(seed in 0u64..1000, n in 2usize..5) {
        let p = random_polytope(n, n + 1, seed);
        let v = enumerate_vertices(&p, DEFAULT_EPS).unwrap();
        let d = triangulate_with(&p, &v, &default_facet_incidence(&p, &v), Execution::Sequential).unwrap();
        let vol = polytope_volume(&d);
        prop_assert!(vol > 0.0 && vol <= 2f64.powi(n as i32) * (1.0 + 1e-12));
        prop_assert!(d.weights().iter().all(|&q| q > 0.0));
        prop_assert!((d.weights().iter().sum::<f64>() - 1.0).abs() < 1e-12);
        prop_assert!((uniform_density_value(&d) * vol - 1.0).abs() < 1e-12);
    }
}
