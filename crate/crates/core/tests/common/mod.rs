//! Shared helpers for the integration suites: seeded matrix generators and an
//! independent singular-value oracle that diagonalizes the Gram matrix instead
//! of working on the columns directly.
//!
//! Each test target compiles this module separately and uses its own subset.
#![allow(dead_code)]

use radar_lowrank::DenseMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn seeded_matrix(rows: usize, cols: usize, seed: u64) -> DenseMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let data: Vec<f64> = (0..rows * cols).map(|_| rng.gen_range(-1.0..1.0)).collect();
    DenseMatrix::from_vec(rows, cols, data).unwrap()
}

pub fn seeded_low_rank(rows: usize, cols: usize, rank: usize, seed: u64) -> DenseMatrix {
    let left = seeded_matrix(rows, rank, seed);
    let right = seeded_matrix(rank, cols, seed ^ 0x9e37_79b9_7f4a_7c15);
    left.matmul(&right).unwrap()
}

pub fn rel_err(approx: &DenseMatrix, reference: &DenseMatrix) -> f64 {
    approx.sub(reference).unwrap().frobenius_norm() / reference.frobenius_norm()
}

/// Largest deviation of MᵀM from the identity.
pub fn orthonormality_defect(m: &DenseMatrix) -> f64 {
    let gram = m.transpose().matmul(m).unwrap();
    let mut worst = 0.0f64;
    for i in 0..gram.rows() {
        for j in 0..gram.cols() {
            let target = if i == j { 1.0 } else { 0.0 };
            worst = worst.max((gram.get(i, j) - target).abs());
        }
    }
    worst
}

/// Singular values via cyclic two-sided Jacobi eigendecomposition of the Gram
/// matrix of the thinner side. Deliberately a different computational route
/// than the library kernel; accuracy is limited to roughly √ε of the squared
/// scale, plenty for cross-checks at 1e-8·σ₁.
pub fn gram_singular_values(a: &DenseMatrix) -> Vec<f64> {
    let gram = if a.rows() >= a.cols() {
        a.transpose().matmul(a).unwrap()
    } else {
        a.matmul(&a.transpose()).unwrap()
    };
    let n = gram.rows();
    let mut g: Vec<Vec<f64>> = (0..n)
        .map(|i| (0..n).map(|j| gram.get(i, j)).collect())
        .collect();
    for _ in 0..100 {
        let mut off = 0.0f64;
        let mut scale = f64::MIN_POSITIVE;
        for i in 0..n {
            scale = scale.max(g[i][i].abs());
            for j in i + 1..n {
                off = off.max(g[i][j].abs());
            }
        }
        if off <= 1e-15 * scale {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = g[p][q];
                if apq == 0.0 {
                    continue;
                }
                let zeta = (g[q][q] - g[p][p]) / (2.0 * apq);
                let t = if zeta.abs() < 1.0e154 {
                    zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt())
                } else {
                    0.5 / zeta
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                for k in 0..n {
                    let (gkp, gkq) = (g[k][p], g[k][q]);
                    g[k][p] = c * gkp - s * gkq;
                    g[k][q] = s * gkp + c * gkq;
                }
                for k in 0..n {
                    let (gpk, gqk) = (g[p][k], g[q][k]);
                    g[p][k] = c * gpk - s * gqk;
                    g[q][k] = s * gpk + c * gqk;
                }
            }
        }
    }
    let mut vals: Vec<f64> = (0..n).map(|i| g[i][i].max(0.0).sqrt()).collect();
    vals.sort_by(|x, y| y.total_cmp(x));
    vals
}
