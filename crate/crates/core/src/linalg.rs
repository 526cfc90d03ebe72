//! Small dense linear algebra for ambient dimensions up to 7.
//!
//! Everything is plain `Vec`-backed: the geometry lives in d <= 6, so
//! asymptotics are irrelevant and clarity wins. The one exact primitive,
//! [`exact_det_sign`], decides orientation predicates in big-rational
//! arithmetic (every f64 is a rational), which is what the hull code falls
//! back to when a floating-point sign sits inside its guard band.

use num::rational::BigRational;
use num::{Signed, Zero};

use crate::stream::RandomStream;

pub type Mat = Vec<Vec<f64>>;

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

pub fn add(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

pub fn scale(a: &[f64], s: f64) -> Vec<f64> {
    a.iter().map(|x| x * s).collect()
}

pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

pub fn mat_vec(m: &[Vec<f64>], v: &[f64]) -> Vec<f64> {
    m.iter().map(|row| dot(row, v)).collect()
}

/// Transpose of a rectangular row-major matrix.
pub fn transpose(m: &[Vec<f64>]) -> Mat {
    if m.is_empty() {
        return Vec::new();
    }
    (0..m[0].len())
        .map(|j| m.iter().map(|row| row[j]).collect())
        .collect()
}

/// Determinant by LU with partial pivoting.
pub fn lu_determinant(mut m: Mat) -> f64 {
    let n = m.len();
    debug_assert!(m.iter().all(|row| row.len() == n));
    let mut det = 1.0;
    for col in 0..n {
        let pivot_row = (col..n)
            .max_by(|&a, &b| m[a][col].abs().total_cmp(&m[b][col].abs()))
            .unwrap();
        if m[pivot_row][col] == 0.0 {
            return 0.0;
        }
        if pivot_row != col {
            m.swap(pivot_row, col);
            det = -det;
        }
        det *= m[col][col];
        for row in col + 1..n {
            let factor = m[row][col] / m[col][col];
            for k in col..n {
                m[row][k] -= factor * m[col][k];
            }
        }
    }
    det
}

/// Solves `m x = b` by Gaussian elimination with partial pivoting.
/// Returns `None` when a pivot degenerates relative to the matrix scale.
pub fn solve(mut m: Mat, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let n = m.len();
    let matrix_scale = m
        .iter()
        .flatten()
        .fold(0.0f64, |acc, &x| acc.max(x.abs()))
        .max(1e-300);
    for col in 0..n {
        let pivot_row = (col..n)
            .max_by(|&a, &b| m[a][col].abs().total_cmp(&m[b][col].abs()))
            .unwrap();
        if m[pivot_row][col].abs() <= 1e-13 * matrix_scale {
            return None;
        }
        m.swap(pivot_row, col);
        b.swap(pivot_row, col);
        for row in col + 1..n {
            let factor = m[row][col] / m[col][col];
            for k in col..n {
                m[row][k] -= factor * m[col][k];
            }
            b[row] -= factor * b[col];
        }
    }
    let mut x = vec![0.0; n];
    for col in (0..n).rev() {
        let mut sum = b[col];
        for k in col + 1..n {
            sum -= m[col][k] * x[k];
        }
        x[col] = sum / m[col][col];
    }
    Some(x)
}

/// Orthonormal basis of the span of `rows` by modified Gram-Schmidt,
/// dropping directions whose residual falls below the relative tolerance:
/// the output length is the numerical rank.
pub fn orthonormal_basis(rows: &[Vec<f64>]) -> Mat {
    let input_scale = rows
        .iter()
        .map(|r| norm(r))
        .fold(0.0f64, f64::max)
        .max(1e-300);
    let mut basis: Mat = Vec::new();
    for row in rows {
        let mut residual = row.clone();
        for q in &basis {
            let coefficient = dot(&residual, q);
            for (r, &qk) in residual.iter_mut().zip(q) {
                *r -= coefficient * qk;
            }
        }
        // Second pass tames the loss of orthogonality on near-dependent rows.
        for q in &basis {
            let coefficient = dot(&residual, q);
            for (r, &qk) in residual.iter_mut().zip(q) {
                *r -= coefficient * qk;
            }
        }
        let len = norm(&residual);
        if len > 1e-10 * input_scale {
            basis.push(scale(&residual, 1.0 / len));
        }
    }
    basis
}

/// A vector orthogonal to all `rows` (assumed of rank `d - 1` in ambient
/// dimension `d`), from the residual of the best-conditioned coordinate
/// axis. Returns `None` when the rows do not leave exactly one dimension.
pub fn orthogonal_complement_vector(rows: &[Vec<f64>], dim: usize) -> Option<Vec<f64>> {
    let basis = orthonormal_basis(rows);
    if basis.len() != dim - 1 {
        return None;
    }
    let mut best: Option<Vec<f64>> = None;
    let mut best_len = 0.0;
    for axis in 0..dim {
        let mut residual = vec![0.0; dim];
        residual[axis] = 1.0;
        for q in &basis {
            let coefficient = dot(&residual, q);
            for (r, &qk) in residual.iter_mut().zip(q) {
                *r -= coefficient * qk;
            }
        }
        let len = norm(&residual);
        if len > best_len {
            best_len = len;
            best = Some(residual);
        }
    }
    let v = best?;
    if best_len <= 1e-10 {
        return None;
    }
    Some(scale(&v, 1.0 / best_len))
}

/// Exact sign of `det` over the rationals: every f64 entry converts
/// losslessly, so this is the ground truth behind the float predicates.
/// Returns -1, 0, or 1.
pub fn exact_det_sign(m: &[Vec<f64>]) -> i32 {
    let n = m.len();
    let mut a: Vec<Vec<BigRational>> = m
        .iter()
        .map(|row| {
            row.iter()
                .map(|&x| BigRational::from_float(x).expect("finite matrix entry"))
                .collect()
        })
        .collect();
    let mut sign = 1i32;
    for col in 0..n {
        let Some(pivot_row) = (col..n).find(|&r| !a[r][col].is_zero()) else {
            return 0;
        };
        if pivot_row != col {
            a.swap(pivot_row, col);
            sign = -sign;
        }
        if a[col][col].is_negative() {
            sign = -sign;
        }
        for row in col + 1..n {
            if a[row][col].is_zero() {
                continue;
            }
            let factor = &a[row][col] / &a[col][col];
            for k in col..n {
                let delta = &factor * &a[col][k];
                a[row][k] -= delta;
            }
        }
    }
    sign
}

/// Exact rank of a rectangular matrix over the rationals, by fraction-free
/// elimination with full pivoting. The arbiter for affine-dimension calls
/// that land inside the float guard band.
pub fn exact_rank(m: &[Vec<f64>]) -> usize {
    let rows = m.len();
    if rows == 0 {
        return 0;
    }
    let cols = m[0].len();
    let mut a: Vec<Vec<BigRational>> = m
        .iter()
        .map(|row| {
            row.iter()
                .map(|&x| BigRational::from_float(x).expect("finite matrix entry"))
                .collect()
        })
        .collect();
    let mut rank = 0;
    for col in 0..cols {
        let Some(pivot_row) = (rank..rows).find(|&r| !a[r][col].is_zero()) else {
            continue;
        };
        a.swap(rank, pivot_row);
        for row in rank + 1..rows {
            if a[row][col].is_zero() {
                continue;
            }
            let factor = &a[row][col] / &a[rank][col];
            for k in col..cols {
                let delta = &factor * &a[rank][k];
                a[row][k] -= delta;
            }
        }
        rank += 1;
        if rank == rows {
            break;
        }
    }
    rank
}

/// Haar-distributed rotation in `SO(d)`: QR of a Gaussian matrix with the
/// R-diagonal signs fixed, then one column flip if the determinant is -1.
/// Returned row-major; rows are orthonormal.
pub fn haar_rotation(dim: usize, stream: &mut RandomStream) -> Mat {
    loop {
        let gaussian: Mat = (0..dim)
            .map(|_| (0..dim).map(|_| stream.normal()).collect())
            .collect();
        // Orthonormalize columns; working on the transpose keeps rows handy.
        let q_cols = orthonormal_basis(&transpose(&gaussian));
        if q_cols.len() != dim {
            continue;
        }
        let mut q = transpose(&q_cols);
        if lu_determinant(q.clone()) < 0.0 {
            for row in q.iter_mut() {
                row[dim - 1] = -row[dim - 1];
            }
        }
        return q;
    }
}

/// Nonnegative least squares by active sets: minimizes `|A x - b|` over
/// `x >= 0` and returns `(x, residual_norm)`. Columns of `A` are the cone
/// generators when this is used as a membership test.
pub fn nnls(a: &[Vec<f64>], b: &[f64]) -> (Vec<f64>, f64) {
    let n_rows = a.len();
    let n_cols = if n_rows == 0 { 0 } else { a[0].len() };
    let mut x = vec![0.0f64; n_cols];
    if n_cols == 0 {
        return (x, norm(b));
    }
    let scale_b = norm(b).max(1e-300);
    let mut passive = vec![false; n_cols];
    // Gradient of the objective at x.
    let gradient = |x: &[f64]| -> Vec<f64> {
        let residual: Vec<f64> = (0..n_rows)
            .map(|i| b[i] - dot(&a[i], x))
            .collect();
        (0..n_cols)
            .map(|j| (0..n_rows).map(|i| a[i][j] * residual[i]).sum())
            .collect()
    };
    // Unconstrained least squares restricted to the passive set, via the
    // normal equations (the systems here are at most 7x7).
    let solve_passive = |passive: &[bool]| -> Option<Vec<f64>> {
        let cols: Vec<usize> = (0..n_cols).filter(|&j| passive[j]).collect();
        let k = cols.len();
        let mut gram = vec![vec![0.0; k]; k];
        let mut rhs = vec![0.0; k];
        for (ci, &i) in cols.iter().enumerate() {
            for (cj, &j) in cols.iter().enumerate() {
                gram[ci][cj] = (0..n_rows).map(|r| a[r][i] * a[r][j]).sum();
            }
            rhs[ci] = (0..n_rows).map(|r| a[r][i] * b[r]).sum();
        }
        let z = solve(gram, rhs)?;
        let mut full = vec![0.0; n_cols];
        for (ci, &j) in cols.iter().enumerate() {
            full[j] = z[ci];
        }
        Some(full)
    };
    for _ in 0..(3 * n_cols.max(8) * 10) {
        let w = gradient(&x);
        let candidate = (0..n_cols)
            .filter(|&j| !passive[j])
            .max_by(|&i, &j| w[i].total_cmp(&w[j]));
        match candidate {
            Some(j) if w[j] > 1e-12 * scale_b => passive[j] = true,
            _ => break,
        }
        loop {
            let Some(z) = solve_passive(&passive) else {
                // Degenerate passive set: drop the newest direction.
                let last = (0..n_cols).rev().find(|&j| passive[j]).unwrap();
                passive[last] = false;
                break;
            };
            let negative: Vec<usize> = (0..n_cols)
                .filter(|&j| passive[j] && z[j] <= 0.0)
                .collect();
            if negative.is_empty() {
                x = z;
                break;
            }
            let mut alpha = f64::INFINITY;
            for &j in &negative {
                let step = x[j] / (x[j] - z[j]);
                alpha = alpha.min(step);
            }
            for j in 0..n_cols {
                if passive[j] {
                    x[j] += alpha * (z[j] - x[j]);
                    if x[j] <= 1e-14 * scale_b {
                        x[j] = 0.0;
                        passive[j] = false;
                    }
                }
            }
        }
    }
    let residual: Vec<f64> = (0..n_rows).map(|i| b[i] - dot(&a[i], &x)).collect();
    (x, norm(&residual))
}
