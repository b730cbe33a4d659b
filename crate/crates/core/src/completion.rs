//! Low-rank matrix completion by singular value thresholding.
//!
//! Given values on a subset Ω of entries, the solver seeks the matrix of
//! minimal nuclear norm agreeing with those values. The iteration alternates
//! a soft-threshold of the singular values (`shrink`) with a gradient step on
//! the observed entries, keeping the dual iterate supported on Ω:
//!
//!   X_k = shrink(Y_{k−1}, τ)
//!   Y_k = Y_{k−1} + δ·P_Ω(M − X_k),  Y_0 = 0
//!
//! and stops when the relative residual on Ω drops below the tolerance.

use std::collections::HashSet;

use crate::error::{Error, Result};
use crate::matrix::DenseMatrix;
use crate::svd::{outer_accumulate, svd_raw, Keep};

/// Values observed at an index set Ω of an m×n matrix.
///
/// Indices are in bounds and pairwise distinct, values finite, and Ω is
/// non-empty, so the sampling fraction is in (0, 1].
#[derive(Debug, Clone)]
pub struct ObservationSet {
    rows: usize,
    cols: usize,
    entries: Vec<(usize, usize, f64)>,
}

impl ObservationSet {
    pub fn new(rows: usize, cols: usize, entries: Vec<(usize, usize, f64)>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::EmptyMatrix);
        }
        if entries.is_empty() {
            return Err(Error::EmptyObservations);
        }
        let mut seen = HashSet::with_capacity(entries.len());
        for &(i, j, value) in &entries {
            if i >= rows || j >= cols {
                return Err(Error::OutOfBounds {
                    row: i,
                    col: j,
                    rows,
                    cols,
                });
            }
            if !value.is_finite() {
                return Err(Error::NonFinite);
            }
            if !seen.insert(i * cols + j) {
                return Err(Error::DuplicateObservation { row: i, col: j });
            }
        }
        Ok(Self {
            rows,
            cols,
            entries,
        })
    }

    /// Every entry of `a`, fully observed.
    pub fn from_dense(a: &DenseMatrix) -> Self {
        let entries = (0..a.rows())
            .flat_map(|i| (0..a.cols()).map(move |j| (i, j, a.get(i, j))))
            .collect();
        Self {
            rows: a.rows(),
            cols: a.cols(),
            entries,
        }
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// |Ω| / (m·n), in (0, 1].
    pub fn sampling_fraction(&self) -> f64 {
        self.entries.len() as f64 / (self.rows as f64 * self.cols as f64)
    }

    pub fn entries(&self) -> &[(usize, usize, f64)] {
        &self.entries
    }

    /// Frobenius norm of the observed values.
    pub fn values_norm(&self) -> f64 {
        self.entries
            .iter()
            .map(|&(_, _, v)| v * v)
            .sum::<f64>()
            .sqrt()
    }

    /// Dense matrix with observed values in place and `fill` elsewhere.
    pub fn to_dense(&self, fill: f64) -> DenseMatrix {
        let mut m = DenseMatrix::from_vec(
            self.rows,
            self.cols,
            vec![fill; self.rows * self.cols],
        )
        .expect("fill value must be finite");
        for &(i, j, v) in &self.entries {
            m.set(i, j, v);
        }
        m
    }
}

/// Restricts `a` to the positions of `omega`, discarding everything else.
pub fn project_onto_omega(a: &DenseMatrix, omega: &ObservationSet) -> Result<ObservationSet> {
    if a.shape() != omega.shape() {
        return Err(Error::ShapeMismatch {
            expected: omega.shape(),
            got: a.shape(),
        });
    }
    let entries = omega
        .entries
        .iter()
        .map(|&(i, j, _)| (i, j, a.get(i, j)))
        .collect();
    Ok(ObservationSet {
        rows: a.rows(),
        cols: a.cols(),
        entries,
    })
}

/// Soft-thresholds the singular values: U·diag(max(σ−τ, 0))·Vᵀ. The result's
/// rank is the number of values strictly above τ.
pub fn shrink(a: &DenseMatrix, tau: f64) -> Result<DenseMatrix> {
    check_positive(tau, "shrink threshold")?;
    Ok(shrink_impl(a, tau, None)?.0)
}

fn shrink_impl(a: &DenseMatrix, tau: f64, rank_cap: Option<usize>) -> Result<(DenseMatrix, usize)> {
    if a.frobenius_norm() == 0.0 {
        return Ok((DenseMatrix::zeros(a.rows(), a.cols()), 0));
    }
    let raw = svd_raw(a, Keep::Above(tau), true)?;
    let kept = raw.kept.min(rank_cap.unwrap_or(usize::MAX));
    if kept == 0 {
        return Ok((DenseMatrix::zeros(a.rows(), a.cols()), 0));
    }
    let weights: Vec<f64> = raw.sigmas[..kept].iter().map(|s| s - tau).collect();
    let u = raw.u.expect("factors requested");
    let v = raw.v.expect("factors requested");
    Ok((outer_accumulate(&u, &weights, &v), kept))
}

/// Iteration parameters for `svt_complete`.
#[derive(Debug, Clone)]
pub struct SvtConfig {
    /// Singular-value threshold τ.
    pub tau: f64,
    /// Step size δ for the observed-entry gradient update.
    pub delta: f64,
    pub max_iters: usize,
    /// Relative residual on Ω below which the iteration stops; in (0, 1).
    pub tolerance: f64,
    /// Optional cap on the rank retained inside each shrink, as an escape
    /// hatch for memory or time limits. `None` leaves it unbounded.
    pub inner_rank_cap: Option<usize>,
}

impl SvtConfig {
    fn validate(&self) -> Result<()> {
        check_positive(self.tau, "tau")?;
        check_positive(self.delta, "delta")?;
        if self.max_iters == 0 {
            return Err(Error::InvalidConfig("max_iters must be at least 1".into()));
        }
        if !(self.tolerance > 0.0 && self.tolerance < 1.0) {
            return Err(Error::InvalidConfig(format!(
                "tolerance must lie in (0, 1), got {}",
                self.tolerance
            )));
        }
        if self.inner_rank_cap == Some(0) {
            return Err(Error::InvalidConfig(
                "inner_rank_cap must be at least 1 when set".into(),
            ));
        }
        Ok(())
    }
}

fn check_positive(x: f64, what: &str) -> Result<()> {
    if x.is_finite() && x > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidConfig(format!(
            "{what} must be positive and finite, got {x}"
        )))
    }
}

/// The standard parameter heuristics: τ = 5√(mn), δ = 1.2/p, 500 iterations,
/// tolerance 1e-4, unbounded inner rank.
pub fn default_svt_config(omega: &ObservationSet) -> SvtConfig {
    let (m, n) = omega.shape();
    SvtConfig {
        tau: 5.0 * ((m * n) as f64).sqrt(),
        delta: 1.2 / omega.sampling_fraction(),
        max_iters: 500,
        tolerance: 1e-4,
        inner_rank_cap: None,
    }
}

/// Outcome of the thresholding iteration.
#[derive(Debug, Clone)]
pub struct SvtResult {
    /// The recovered matrix (last iterate).
    pub x_hat: DenseMatrix,
    pub iterations_used: usize,
    /// Relative residual on Ω at the final iterate.
    pub final_residual: f64,
    pub converged: bool,
    pub rank_of_solution: usize,
    /// Relative residual on Ω after each iteration, in order.
    pub residuals: Vec<f64>,
}

/// Runs the thresholding iteration until the relative residual on Ω falls
/// below `cfg.tolerance` or `cfg.max_iters` is exhausted. Deterministic for
/// fixed inputs.
///
/// Errors with `Divergence` when the residual blows past 1e6× its initial
/// value or stops being finite, which almost always means δ is too large.
pub fn svt_complete(omega: &ObservationSet, cfg: &SvtConfig) -> Result<SvtResult> {
    cfg.validate()?;
    let (m, n) = omega.shape();
    let norm_obs = omega.values_norm();
    if norm_obs == 0.0 {
        // All observed values are zero; the zero matrix is the minimizer.
        return Ok(SvtResult {
            x_hat: DenseMatrix::zeros(m, n),
            iterations_used: 0,
            final_residual: 0.0,
            converged: true,
            rank_of_solution: 0,
            residuals: Vec::new(),
        });
    }

    let mut y = DenseMatrix::zeros(m, n);
    let mut initial_rel = f64::NAN;
    let mut residuals = Vec::new();
    let mut last: Option<(DenseMatrix, usize, f64)> = None;
    for iteration in 1..=cfg.max_iters {
        let (x, rank) = shrink_impl(&y, cfg.tau, cfg.inner_rank_cap)?;
        let mut sum_sq = 0.0;
        for &(i, j, v) in omega.entries() {
            let d = v - x.get(i, j);
            sum_sq += d * d;
        }
        let rel = sum_sq.sqrt() / norm_obs;
        if !rel.is_finite() {
            return Err(Error::Divergence {
                iteration,
                residual: rel,
            });
        }
        residuals.push(rel);
        if initial_rel.is_nan() {
            initial_rel = rel.max(f64::MIN_POSITIVE);
        }
        if rel > 1e6 * initial_rel {
            return Err(Error::Divergence {
                iteration,
                residual: rel,
            });
        }
        if rel <= cfg.tolerance {
            return Ok(SvtResult {
                x_hat: x,
                iterations_used: iteration,
                final_residual: rel,
                converged: true,
                rank_of_solution: rank,
                residuals,
            });
        }
        for &(i, j, v) in omega.entries() {
            let d = v - x.get(i, j);
            y.set(i, j, y.get(i, j) + cfg.delta * d);
        }
        last = Some((x, rank, rel));
    }
    let (x_hat, rank_of_solution, final_residual) =
        last.expect("max_iters is at least 1, so the loop body ran");
    Ok(SvtResult {
        x_hat,
        iterations_used: cfg.max_iters,
        final_residual,
        converged: false,
        rank_of_solution,
        residuals,
    })
}
