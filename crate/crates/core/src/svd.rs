//! Self-contained singular value decomposition and truncated reconstruction.
//!
//! The decomposition is a one-sided Jacobi iteration: columns of the working
//! matrix are rotated in pairs until all pairs are mutually orthogonal, at
//! which point the column norms are the singular values. Tall inputs are
//! first reduced by Householder QR so the sweeps run on a small square
//! factor; wide inputs are transposed. Jacobi is slower than
//! bidiagonalization but is simple, unconditionally robust, and accurate for
//! small singular values.
//!
//! Each sweep visits every column pair exactly once, grouped into rounds of
//! disjoint pairs (a round-robin tournament schedule). Pairs within a round
//! share no data, so they may execute on any number of threads and still
//! produce bitwise-identical results.

use std::mem;

use crate::error::{Error, Result};
use crate::matrix::{dot, DenseMatrix};
use crate::parallel;

/// Singular values below `RANK_CUTOFF`·σ₁ are treated as zero rank.
pub const RANK_CUTOFF: f64 = 1e-12;

/// Per-pair convergence threshold: a pair (p, q) is orthogonal enough when
/// |wₚ·w_q| ≤ PAIR_EPS·‖wₚ‖·‖w_q‖, which bounds the off-diagonal entries of
/// UᵀU by the same factor.
const PAIR_EPS: f64 = 1e-14;

/// Columns below this fraction of the largest column norm are numerically
/// zero: rotating them would only chase roundoff (their pairs can fail the
/// relative test forever), and any direction hiding in them is at most
/// √2·1e-13 of σ₁, under the `RANK_CUTOFF` drop threshold. Their pairs are
/// skipped.
const TINY_COL_REL: f64 = 1e-13;

const MAX_SWEEPS: usize = 60;

/// Compact factorization A = U·diag(σ)·Vᵀ.
///
/// `U` is m×r and `V` is n×r, both column-orthonormal to 1e-10; the singular
/// values are strictly positive and non-increasing; r ≤ min(m, n).
#[derive(Debug, Clone)]
pub struct SvdFactors {
    u: DenseMatrix,
    singular_values: Vec<f64>,
    v: DenseMatrix,
}

impl SvdFactors {
    /// Left singular vectors, one column per retained singular value.
    pub fn u(&self) -> &DenseMatrix {
        &self.u
    }

    /// Right singular vectors, one column per retained singular value.
    pub fn v(&self) -> &DenseMatrix {
        &self.v
    }

    /// Descending, strictly positive.
    pub fn singular_values(&self) -> &[f64] {
        &self.singular_values
    }

    pub fn rank(&self) -> usize {
        self.singular_values.len()
    }

    /// U·diag(σ)·Vᵀ using every retained value.
    pub fn reconstruct(&self) -> DenseMatrix {
        outer_accumulate(&self.u, &self.singular_values, &self.v)
    }
}

/// Full-accuracy decomposition. Values below `RANK_CUTOFF`·σ₁ are dropped as
/// rank-deficient directions.
///
/// Errors: `NonFinite` on NaN/Inf entries, `ZeroRank` when A is identically
/// zero (there are no positive singular values to return).
pub fn svd(a: &DenseMatrix) -> Result<SvdFactors> {
    let raw = svd_raw(a, Keep::RankCutoff, true)?;
    if raw.kept == 0 {
        return Err(Error::ZeroRank);
    }
    let mut sigmas = raw.sigmas;
    sigmas.truncate(raw.kept);
    Ok(SvdFactors {
        u: raw.u.expect("factors requested"),
        singular_values: sigmas,
        v: raw.v.expect("factors requested"),
    })
}

/// Sum of the retained singular values. Zero for the all-zeros matrix.
pub fn nuclear_norm(a: &DenseMatrix) -> Result<f64> {
    let raw = svd_raw(a, Keep::RankCutoff, false)?;
    Ok(raw.sigmas[..raw.kept].iter().sum())
}

/// The complete descending singular-value list, length min(m, n), with the
/// near-zero tail included (useful for decay plots; `svd` drops that tail).
pub fn singular_value_profile(a: &DenseMatrix) -> Result<Vec<f64>> {
    Ok(svd_raw(a, Keep::RankCutoff, false)?.sigmas)
}

/// Best rank-`r_prime` approximation: U·diag(σ₁…σ_r′, 0…)·Vᵀ. When `r_prime`
/// is at least the stored rank this is the full reconstruction.
pub fn low_rank_approx(factors: &SvdFactors, r_prime: usize) -> Result<DenseMatrix> {
    if r_prime == 0 {
        return Err(Error::ZeroRank);
    }
    let keep = r_prime.min(factors.rank());
    Ok(outer_accumulate(
        &factors.u,
        &factors.singular_values[..keep],
        &factors.v,
    ))
}

// ---------------------------------------------------------------------------
// crate-internal entry point with control over which factors get built
// ---------------------------------------------------------------------------

/// Which singular values (and factor columns) to retain.
pub(crate) enum Keep {
    /// σ ≥ RANK_CUTOFF·σ₁ and σ > 0.
    RankCutoff,
    /// σ strictly above the given threshold (soft-threshold support).
    Above(f64),
}

pub(crate) struct RawSvd {
    /// Full descending value list, length min(m, n), zeros included.
    pub sigmas: Vec<f64>,
    /// How many leading values the keep rule retained.
    pub kept: usize,
    /// m×kept, present when factors were requested and kept > 0.
    pub u: Option<DenseMatrix>,
    /// n×kept, same conditions.
    pub v: Option<DenseMatrix>,
}

pub(crate) fn svd_raw(a: &DenseMatrix, keep: Keep, want_factors: bool) -> Result<RawSvd> {
    a.check_finite()?;
    let transposed = a.rows() < a.cols();
    let work = if transposed { a.transpose() } else { a.clone() };
    let m = work.rows();
    let n = work.cols();

    let (mut w, qr) = if m > n {
        let (h, r_cols) = householder_qr(work.to_columns());
        (r_cols, Some(h))
    } else {
        (work.to_columns(), None)
    };

    // Right-rotation accumulator, started at the identity. Skipped entirely
    // when only singular values are wanted; that halves the sweep cost.
    let mut v: Vec<Vec<f64>> = if want_factors {
        (0..n)
            .map(|j| {
                let mut e = vec![0.0; n];
                e[j] = 1.0;
                e
            })
            .collect()
    } else {
        Vec::new()
    };

    jacobi_orthogonalize(&mut w, &mut v)?;

    let norms: Vec<f64> = w.iter().map(|c| dot(c, c).sqrt()).collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| norms[j].partial_cmp(&norms[i]).unwrap().then(i.cmp(&j)));
    let sigmas: Vec<f64> = order.iter().map(|&j| norms[j]).collect();

    let kept = match keep {
        Keep::RankCutoff => {
            let cut = RANK_CUTOFF * sigmas[0];
            sigmas.iter().take_while(|&&s| s > 0.0 && s >= cut).count()
        }
        Keep::Above(tau) => sigmas.iter().take_while(|&&s| s > tau).count(),
    };

    if !want_factors || kept == 0 {
        return Ok(RawSvd {
            sigmas,
            kept,
            u: None,
            v: None,
        });
    }

    let mut u_cols: Vec<Vec<f64>> = Vec::with_capacity(kept);
    let mut v_cols: Vec<Vec<f64>> = Vec::with_capacity(kept);
    for &j in order.iter().take(kept) {
        let inv = 1.0 / norms[j];
        u_cols.push(w[j].iter().map(|x| x * inv).collect());
        v_cols.push(v[j].clone());
    }
    if let Some(h) = &qr {
        // The left vectors were computed against R; lift them back through Q.
        // Only the retained columns pay for the reflector applications.
        for col in u_cols.iter_mut() {
            col.resize(m, 0.0);
        }
        parallel::for_each_mut(&mut u_cols, |col| h.apply_q(col));
    }

    let rows_u = if qr.is_some() { m } else { w[0].len() };
    let mut u = Some(DenseMatrix::from_columns(rows_u, &u_cols));
    let mut vfac = Some(DenseMatrix::from_columns(n, &v_cols));
    if transposed {
        mem::swap(&mut u, &mut vfac);
    }
    Ok(RawSvd {
        sigmas,
        kept,
        u,
        v: vfac,
    })
}

/// Σ_k weights[k]·u_k·v_kᵀ over the first `weights.len()` factor columns.
pub(crate) fn outer_accumulate(u: &DenseMatrix, weights: &[f64], v: &DenseMatrix) -> DenseMatrix {
    debug_assert!(weights.len() <= u.cols() && weights.len() <= v.cols());
    let vt = v.transpose();
    let mut x = DenseMatrix::zeros(u.rows(), v.rows());
    for i in 0..u.rows() {
        let coeffs: Vec<f64> = weights
            .iter()
            .enumerate()
            .map(|(k, &wk)| u.get(i, k) * wk)
            .collect();
        let xrow = x.row_mut(i);
        for (k, &coef) in coeffs.iter().enumerate() {
            if coef == 0.0 {
                continue;
            }
            for (xj, &vj) in xrow.iter_mut().zip(vt.row(k)) {
                *xj += coef * vj;
            }
        }
    }
    x
}

// ---------------------------------------------------------------------------
// Jacobi sweeps
// ---------------------------------------------------------------------------

struct PairTask {
    p: usize,
    q: usize,
    wp: Vec<f64>,
    wq: Vec<f64>,
    vp: Vec<f64>,
    vq: Vec<f64>,
    spp: f64,
    sqq: f64,
    floor_sq: f64,
    rotated: bool,
}

impl PairTask {
    fn run(&mut self) {
        if self.spp <= self.floor_sq || self.sqq <= self.floor_sq {
            return;
        }
        let apq = dot(&self.wp, &self.wq);
        if apq.abs() <= PAIR_EPS * (self.spp * self.sqq).sqrt() {
            return;
        }
        let zeta = (self.sqq - self.spp) / (2.0 * apq);
        // Smaller root of t² + 2ζt − 1 = 0; the branch avoids overflowing ζ².
        let t = if zeta.abs() < 1.0e154 {
            zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt())
        } else {
            0.5 / zeta
        };
        let c = 1.0 / (1.0 + t * t).sqrt();
        let s = c * t;
        rotate(&mut self.wp, &mut self.wq, c, s);
        if !self.vp.is_empty() {
            rotate(&mut self.vp, &mut self.vq, c, s);
        }
        // Exact post-rotation norms; clamped because roundoff can take the
        // smaller one fractionally negative.
        let spp = self.spp;
        self.spp = (c * c * spp - 2.0 * c * s * apq + s * s * self.sqq).max(0.0);
        self.sqq = (s * s * spp + 2.0 * c * s * apq + c * c * self.sqq).max(0.0);
        self.rotated = true;
    }
}

#[inline]
fn rotate(a: &mut [f64], b: &mut [f64], c: f64, s: f64) {
    for (x, y) in a.iter_mut().zip(b.iter_mut()) {
        let (xv, yv) = (*x, *y);
        *x = c * xv - s * yv;
        *y = s * xv + c * yv;
    }
}

/// Rotates columns of `w` (and mirrors the rotations onto `v`, unless `v` is
/// empty) until every pair passes the orthogonality test for a whole sweep.
fn jacobi_orthogonalize(w: &mut [Vec<f64>], v: &mut [Vec<f64>]) -> Result<()> {
    let n = w.len();
    if n < 2 {
        return Ok(());
    }
    let track_v = !v.is_empty();
    let rounds = round_robin_rounds(n);
    let mut sq = vec![0.0; n];
    for _ in 0..MAX_SWEEPS {
        // Cached squared norms drift a little across a sweep's updates;
        // refresh them from scratch each sweep.
        for (s, c) in sq.iter_mut().zip(w.iter()) {
            *s = dot(c, c);
        }
        let max_sq = sq.iter().fold(0.0f64, |a, &b| a.max(b));
        let floor_sq = TINY_COL_REL * TINY_COL_REL * max_sq;
        let mut any_rotation = false;
        for round in &rounds {
            let mut tasks: Vec<PairTask> = round
                .iter()
                .map(|&(p, q)| PairTask {
                    p,
                    q,
                    wp: mem::take(&mut w[p]),
                    wq: mem::take(&mut w[q]),
                    vp: if track_v { mem::take(&mut v[p]) } else { Vec::new() },
                    vq: if track_v { mem::take(&mut v[q]) } else { Vec::new() },
                    spp: sq[p],
                    sqq: sq[q],
                    floor_sq,
                    rotated: false,
                })
                .collect();
            parallel::for_each_mut(&mut tasks, |task| task.run());
            for task in tasks {
                w[task.p] = task.wp;
                w[task.q] = task.wq;
                if track_v {
                    v[task.p] = task.vp;
                    v[task.q] = task.vq;
                }
                sq[task.p] = task.spp;
                sq[task.q] = task.sqq;
                any_rotation |= task.rotated;
            }
        }
        if !any_rotation {
            return Ok(());
        }
    }
    Err(Error::NoConvergence { sweeps: MAX_SWEEPS })
}

/// Tournament schedule: n−1 (or n) rounds of disjoint pairs covering every
/// unordered pair exactly once.
fn round_robin_rounds(n: usize) -> Vec<Vec<(usize, usize)>> {
    let ne = n + n % 2;
    let mut players: Vec<usize> = (0..ne).collect();
    let mut rounds = Vec::with_capacity(ne - 1);
    for _ in 0..ne - 1 {
        let mut pairs = Vec::with_capacity(ne / 2);
        for i in 0..ne / 2 {
            let a = players[i];
            let b = players[ne - 1 - i];
            if a < n && b < n {
                pairs.push((a.min(b), a.max(b)));
            }
        }
        rounds.push(pairs);
        players[1..].rotate_right(1);
    }
    rounds
}

// ---------------------------------------------------------------------------
// Householder QR (tall inputs only)
// ---------------------------------------------------------------------------

struct Householder {
    m: usize,
    /// `reflectors[k]` is the unit vector acting on rows k.., empty when the
    /// step was already triangular (identity reflector).
    reflectors: Vec<Vec<f64>>,
}

impl Householder {
    /// Applies Q = H₀H₁…H_{n−1} to a length-m vector.
    fn apply_q(&self, col: &mut [f64]) {
        debug_assert_eq!(col.len(), self.m);
        for (k, refl) in self.reflectors.iter().enumerate().rev() {
            if !refl.is_empty() {
                reflect(refl, &mut col[k..]);
            }
        }
    }
}

/// Factors the m×n column set (m ≥ n) as Q·R, returning the reflectors and
/// the n×n upper-triangular R as columns.
fn householder_qr(mut cols: Vec<Vec<f64>>) -> (Householder, Vec<Vec<f64>>) {
    let m = cols[0].len();
    let n = cols.len();
    let mut reflectors: Vec<Vec<f64>> = Vec::with_capacity(n);
    for k in 0..n {
        let x = &cols[k][k..];
        let norm = dot(x, x).sqrt();
        let alpha = if x[0] >= 0.0 { -norm } else { norm };
        let mut vk = x.to_vec();
        vk[0] -= alpha;
        let vnorm = dot(&vk, &vk).sqrt();
        if norm == 0.0 || vnorm == 0.0 {
            reflectors.push(Vec::new());
            continue;
        }
        let inv = 1.0 / vnorm;
        for e in vk.iter_mut() {
            *e *= inv;
        }
        cols[k][k] = alpha;
        for e in cols[k][k + 1..].iter_mut() {
            *e = 0.0;
        }
        let (_, rest) = cols.split_at_mut(k + 1);
        parallel::for_each_mut(rest, |col| reflect(&vk, &mut col[k..]));
        reflectors.push(vk);
    }
    let r_cols = cols.iter().map(|c| c[..n].to_vec()).collect();
    (Householder { m, reflectors }, r_cols)
}

#[inline]
fn reflect(v: &[f64], seg: &mut [f64]) {
    let w = 2.0 * dot(v, seg);
    for (e, &vv) in seg.iter_mut().zip(v) {
        *e -= w * vv;
    }
}
