//! Error metrics and histograms for the evaluation step.

use radar_lowrank::DenseMatrix;
use serde::Serialize;

use crate::AppError;

#[derive(Debug, Serialize)]
pub struct ErrorReport {
    /// ‖reconstructed − lowrank‖_F / ‖lowrank‖_F.
    pub epsilon1: f64,
    /// ‖reconstructed − original‖_F / ‖original‖_F.
    pub epsilon2: f64,
    /// Whether ε₁/ε₂ lies in [0.1, 10]; true when both are exactly zero.
    pub same_order: bool,
    pub histograms: Histograms,
}

#[derive(Debug, Serialize)]
pub struct Histograms {
    /// Shared uniform bin edges in dBZ, length = counts length + 1.
    pub bin_edges: Vec<f64>,
    pub original: Vec<u64>,
    pub lowrank: Vec<u64>,
    pub reconstructed: Vec<u64>,
}

fn relative_error(hat: &DenseMatrix, reference: &DenseMatrix) -> Result<f64, AppError> {
    let diff = hat.sub(reference).map_err(AppError::Core)?;
    let num = diff.frobenius_norm();
    let den = reference.frobenius_norm();
    if den == 0.0 {
        if num == 0.0 {
            Ok(0.0)
        } else {
            Err(AppError::Msg(
                "reference matrix has zero norm but the reconstruction differs from it".into(),
            ))
        }
    } else {
        Ok(num / den)
    }
}

fn same_order(e1: f64, e2: f64) -> bool {
    if e1 == 0.0 && e2 == 0.0 {
        return true;
    }
    if e1 == 0.0 || e2 == 0.0 {
        return false;
    }
    let ratio = e1 / e2;
    (0.1..=10.0).contains(&ratio)
}

fn histogram(m: &DenseMatrix, lo: f64, width: f64, bins: usize) -> Vec<u64> {
    let mut counts = vec![0u64; bins];
    for &x in m.data() {
        let idx = (((x - lo) / width).floor() as usize).min(bins - 1);
        counts[idx] += 1;
    }
    counts
}

pub fn evaluate(
    original: &DenseMatrix,
    lowrank: &DenseMatrix,
    reconstructed: &DenseMatrix,
    bin_width: f64,
) -> Result<ErrorReport, AppError> {
    for (name, m) in [("lowrank", lowrank), ("reconstructed", reconstructed)] {
        if m.shape() != original.shape() {
            return Err(AppError::Msg(format!(
                "{name} is {:?} but original is {:?}",
                m.shape(),
                original.shape()
            )));
        }
    }
    if !(bin_width.is_finite() && bin_width > 0.0) {
        return Err(AppError::Msg(format!(
            "bin width must be positive and finite, got {bin_width}"
        )));
    }

    let epsilon1 = relative_error(reconstructed, lowrank)?;
    let epsilon2 = relative_error(reconstructed, original)?;

    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for m in [original, lowrank, reconstructed] {
        let (a, b) = m.min_max();
        lo = lo.min(a);
        hi = hi.max(b);
    }
    let lo = (lo / bin_width).floor() * bin_width;
    let bins = (((hi - lo) / bin_width).ceil() as usize).max(1);
    let bin_edges: Vec<f64> = (0..=bins).map(|k| lo + k as f64 * bin_width).collect();

    Ok(ErrorReport {
        epsilon1,
        epsilon2,
        same_order: same_order(epsilon1, epsilon2),
        histograms: Histograms {
            bin_edges,
            original: histogram(original, lo, bin_width, bins),
            lowrank: histogram(lowrank, lo, bin_width, bins),
            reconstructed: histogram(reconstructed, lo, bin_width, bins),
        },
    })
}
