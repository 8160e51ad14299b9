//! Small dense linear algebra: LU with partial pivoting, determinants, solves, rank.
//!
//! Everything here works on the modest sizes this crate deals with (n ≤ ~18),
//! so the matrix is a flat row-major `Vec<f64>` with no blocking.

use std::ops::{Index, IndexMut};

use crate::error::{Error, Result};

/// Relative pivot tolerance: a pivot is treated as zero when its magnitude
/// falls below `PIVOT_RTOL * max |entry|` of the original matrix.
pub const PIVOT_RTOL: f64 = 1e-12;

/// Dense row-major matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    /// Build from a flat row-major buffer.
    pub fn from_row_major(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::invalid(format!(
                "buffer of length {} cannot form a {rows}x{cols} matrix",
                data.len()
            )));
        }
        Ok(Self { rows, cols, data })
    }

    /// Build from a list of equally long rows.
    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let cols = rows.first().map_or(0, |r| r.as_ref().len());
        let mut data = Vec::with_capacity(rows.len() * cols);
        for (i, r) in rows.iter().enumerate() {
            let r = r.as_ref();
            if r.len() != cols {
                return Err(Error::invalid(format!(
                    "row {i} has {} entries, expected {cols}",
                    r.len()
                )));
            }
            data.extend_from_slice(r);
        }
        Ok(Self {
            rows: rows.len(),
            cols,
            data,
        })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0_f64, |m, x| m.max(x.abs()))
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|x| x.is_finite())
    }

    /// `self * x`
    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        debug_assert_eq!(x.len(), self.cols);
        (0..self.rows).map(|i| dot(self.row(i), x)).collect()
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t[(j, i)] = self[(i, j)];
            }
        }
        t
    }
}

impl Index<(usize, usize)> for Matrix {
    type Output = f64;

    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for Matrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.data[i * self.cols + j]
    }
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// LU factorization `P M = L U` with partial pivoting.
#[derive(Clone, Debug)]
pub struct Lu {
    n: usize,
    lu: Vec<f64>,
    perm: Vec<usize>,
    parity: f64,
    singular: bool,
}

impl Lu {
    pub fn factor(m: &Matrix) -> Result<Self> {
        if !m.is_square() {
            return Err(Error::invalid(format!(
                "expected a square matrix, got {}x{}",
                m.rows, m.cols
            )));
        }
        if !m.is_finite() {
            return Err(Error::invalid("matrix has non-finite entries"));
        }
        let n = m.rows;
        let tol = PIVOT_RTOL * m.max_abs();
        let mut lu = m.data.clone();
        let mut perm: Vec<usize> = (0..n).collect();
        let mut parity = 1.0;
        let mut singular = n > 0 && tol == 0.0;

        for k in 0..n {
            let (p, pmax) = (k..n)
                .map(|i| (i, lu[i * n + k].abs()))
                .fold((k, -1.0), |acc, x| if x.1 > acc.1 { x } else { acc });
            if pmax <= tol {
                singular = true;
                break;
            }
            if p != k {
                for j in 0..n {
                    lu.swap(k * n + j, p * n + j);
                }
                perm.swap(k, p);
                parity = -parity;
            }
            let pivot = lu[k * n + k];
            for i in k + 1..n {
                let f = lu[i * n + k] / pivot;
                lu[i * n + k] = f;
                if f != 0.0 {
                    for j in k + 1..n {
                        lu[i * n + j] -= f * lu[k * n + j];
                    }
                }
            }
        }
        Ok(Self {
            n,
            lu,
            perm,
            parity,
            singular,
        })
    }

    pub fn is_singular(&self) -> bool {
        self.singular
    }

    /// Signed determinant; exactly zero when a pivot fell below tolerance.
    pub fn determinant(&self) -> f64 {
        if self.singular {
            return 0.0;
        }
        (0..self.n).fold(self.parity, |d, k| d * self.lu[k * self.n + k])
    }

    /// Solve `M x = b`; `None` when the factorization is singular.
    pub fn solve(&self, b: &[f64]) -> Option<Vec<f64>> {
        if self.singular || b.len() != self.n {
            return None;
        }
        let n = self.n;
        let mut x: Vec<f64> = self.perm.iter().map(|&p| b[p]).collect();
        for i in 0..n {
            let s: f64 = (0..i).map(|j| self.lu[i * n + j] * x[j]).sum();
            x[i] -= s;
        }
        for i in (0..n).rev() {
            let s: f64 = (i + 1..n).map(|j| self.lu[i * n + j] * x[j]).sum();
            x[i] = (x[i] - s) / self.lu[i * n + i];
        }
        Some(x)
    }

    pub fn inverse(&self) -> Option<Matrix> {
        if self.singular {
            return None;
        }
        let n = self.n;
        let mut inv = Matrix::zeros(n, n);
        let mut e = vec![0.0; n];
        for j in 0..n {
            e.iter_mut().for_each(|x| *x = 0.0);
            e[j] = 1.0;
            let col = self.solve(&e)?;
            for i in 0..n {
                inv[(i, j)] = col[i];
            }
        }
        Some(inv)
    }
}

/// `|det M|` as the product of LU pivot magnitudes; 0 for numerically singular `M`.
pub fn abs_determinant(m: &Matrix) -> Result<f64> {
    Ok(Lu::factor(m)?.determinant().abs())
}

/// Signed determinant, same tolerance rules as [`abs_determinant`].
pub fn determinant(m: &Matrix) -> Result<f64> {
    Ok(Lu::factor(m)?.determinant())
}

/// Numerical rank of a set of row vectors by Gaussian elimination with
/// full pivoting; entries below `rtol * max |entry|` count as zero.
pub fn rank<R: AsRef<[f64]>>(rows: &[R], rtol: f64) -> usize {
    let Some(first) = rows.first() else {
        return 0;
    };
    let cols = first.as_ref().len();
    let mut m: Vec<Vec<f64>> = rows.iter().map(|r| r.as_ref().to_vec()).collect();
    let scale = m
        .iter()
        .flat_map(|r| r.iter())
        .fold(0.0_f64, |a, x| a.max(x.abs()));
    if scale == 0.0 {
        return 0;
    }
    let tol = rtol * scale;
    let mut rank = 0;
    let mut col_used = vec![false; cols];
    while rank < m.len() {
        let mut best = (0, 0, 0.0);
        for (i, row) in m.iter().enumerate().skip(rank) {
            for (j, &x) in row.iter().enumerate() {
                if !col_used[j] && x.abs() > best.2 {
                    best = (i, j, x.abs());
                }
            }
        }
        if best.2 <= tol {
            break;
        }
        let (pi, pj, _) = best;
        m.swap(rank, pi);
        col_used[pj] = true;
        let pivot_row = m[rank].clone();
        for row in m.iter_mut().skip(rank + 1) {
            let f = row[pj] / pivot_row[pj];
            if f != 0.0 {
                for (x, p) in row.iter_mut().zip(&pivot_row) {
                    *x -= f * p;
                }
            }
        }
        rank += 1;
    }
    rank
}

/// Neumaier-compensated sum.
pub fn compensated_sum<I: IntoIterator<Item = f64>>(values: I) -> f64 {
    let mut sum = 0.0_f64;
    let mut c = 0.0_f64;
    for x in values {
        let t = sum + x;
        if sum.abs() >= x.abs() {
            c += (sum - t) + x;
        } else {
            c += (x - t) + sum;
        }
        sum = t;
    }
    sum + c
}

/// `n!` as an iterative floating-point product; exact for n ≤ 18.
pub fn factorial(n: usize) -> f64 {
    (2..=n).fold(1.0, |acc, k| acc * k as f64)
}
