#![allow(dead_code)]

use polysample::{Polytope, RngStream};

/// `[-1, 1]^n` cut by `cuts` random halfspaces `a·x ≤ ‖a‖ u` with
/// `u ∈ [0.3, 1)`, so the origin stays well inside.
pub fn random_polytope(n: usize, cuts: usize, seed: u64) -> Polytope {
    let mut rng = RngStream::new(seed);
    let mut rows: Vec<Vec<f64>> = Vec::new();
    let mut b = Vec::new();
    for j in 0..n {
        for s in [-1.0, 1.0] {
            let mut r = vec![0.0; n];
            r[j] = s;
            rows.push(r);
            b.push(1.0);
        }
    }
    for _ in 0..cuts {
        let a: Vec<f64> = (0..n).map(|_| rng.std_normal()).collect();
        let norm = a.iter().map(|v| v * v).sum::<f64>().sqrt();
        b.push(norm * (0.3 + 0.7 * rng.uniform()));
        rows.push(a);
    }
    Polytope::from_rows(&rows, b).unwrap()
}

/// Row slacks `b - A x` of a polytope.
pub fn slacks(p: &Polytope, x: &[f64]) -> Vec<f64> {
    (0..p.num_constraints())
        .map(|i| p.b()[i] - p.row(i).iter().zip(x).map(|(a, v)| a * v).sum::<f64>())
        .collect()
}
