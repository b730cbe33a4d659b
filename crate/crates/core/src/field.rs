//! Seeded synthesis of spatially correlated range×azimuth reflectivity
//! fields. Separable Gaussian smoothing of white noise gives independent
//! control of the correlation length along each axis, which in turn controls
//! how fast the singular values decay; a rank-based threshold then dries out
//! the requested fraction of cells.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::matrix::DenseMatrix;
use crate::parallel;

/// Value assigned to dry (below-coverage) cells, in dBZ.
pub const DRY_FLOOR_DBZ: f64 = 0.0;

/// Recipe for one synthetic scan.
///
/// `n_range` is the row count (range gates), `n_azimuth` the column count
/// (rays). Correlation lengths are in cells along the respective axis; zero
/// disables smoothing on that axis. `mean_dbz`/`std_dbz` are the statistics
/// the wet-cell population gets mapped to, and `coverage_fraction` is the
/// fraction of cells left wet (the rest are set to `DRY_FLOOR_DBZ`).
#[derive(Debug, Clone, PartialEq)]
pub struct FieldSpec {
    pub n_range: usize,
    pub n_azimuth: usize,
    pub correlation_length_range: f64,
    pub correlation_length_azimuth: f64,
    pub mean_dbz: f64,
    pub std_dbz: f64,
    pub coverage_fraction: f64,
    pub seed: u64,
}

impl FieldSpec {
    /// Moderate correlation, fully wet, synthetic-looking defaults.
    pub fn new(n_range: usize, n_azimuth: usize) -> Self {
        Self {
            n_range,
            n_azimuth,
            correlation_length_range: 20.0,
            correlation_length_azimuth: 10.0,
            mean_dbz: 30.0,
            std_dbz: 8.0,
            coverage_fraction: 1.0,
            seed: 0,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.n_range < 2 || self.n_azimuth < 2 {
            return Err(Error::InvalidConfig(format!(
                "field needs at least 2 cells per axis, got {}x{}",
                self.n_range, self.n_azimuth
            )));
        }
        for (value, what) in [
            (self.correlation_length_range, "correlation_length_range"),
            (self.correlation_length_azimuth, "correlation_length_azimuth"),
            (self.std_dbz, "std_dbz"),
        ] {
            if !(value.is_finite() && value >= 0.0) {
                return Err(Error::InvalidConfig(format!(
                    "{what} must be nonnegative and finite, got {value}"
                )));
            }
        }
        if !self.mean_dbz.is_finite() {
            return Err(Error::InvalidConfig("mean_dbz must be finite".into()));
        }
        if !(0.0..=1.0).contains(&self.coverage_fraction) {
            return Err(Error::InvalidConfig(format!(
                "coverage_fraction must lie in [0, 1], got {}",
                self.coverage_fraction
            )));
        }
        Ok(())
    }
}

/// Builds the field: seeded white noise, separable Gaussian smoothing with
/// the two correlation lengths, an affine map putting the wet population at
/// exactly `mean_dbz`/`std_dbz`, and a rank threshold that dries out the
/// lowest cells. Identical specs give identical fields.
pub fn synthesize_field(spec: &FieldSpec) -> Result<DenseMatrix> {
    spec.validate()?;
    let (m, n) = (spec.n_range, spec.n_azimuth);
    let total = m * n;

    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut data: Vec<f64> = (0..total).map(|_| StandardNormal.sample(&mut rng)).collect();

    smooth_rows(&mut data, m, n, spec.correlation_length_azimuth);
    let mut transposed = transpose_buf(&data, m, n);
    smooth_rows(&mut transposed, n, m, spec.correlation_length_range);
    data = transpose_buf(&transposed, n, m);

    let n_wet = (spec.coverage_fraction * total as f64).round() as usize;
    if n_wet == 0 {
        return DenseMatrix::from_vec(m, n, vec![DRY_FLOOR_DBZ; total]);
    }

    // Dry out the lowest cells by rank, then anchor the affine map on the
    // wet population so its mean/std match the spec exactly.
    let mut order: Vec<usize> = (0..total).collect();
    order.sort_by(|&a, &b| data[a].total_cmp(&data[b]).then(a.cmp(&b)));
    let wet = &order[total - n_wet..];

    let mean: f64 = wet.iter().map(|&i| data[i]).sum::<f64>() / n_wet as f64;
    let var: f64 = wet.iter().map(|&i| (data[i] - mean).powi(2)).sum::<f64>() / n_wet as f64;
    let sd = var.sqrt();

    let mut out = vec![DRY_FLOOR_DBZ; total];
    for &i in wet {
        out[i] = if sd > 0.0 {
            spec.mean_dbz + spec.std_dbz * (data[i] - mean) / sd
        } else {
            spec.mean_dbz
        };
    }
    DenseMatrix::from_vec(m, n, out)
}

/// Fraction of entries strictly above the threshold.
pub fn coverage_fraction_of(field: &DenseMatrix, wet_threshold_dbz: f64) -> f64 {
    let above = field
        .data()
        .iter()
        .filter(|&&x| x > wet_threshold_dbz)
        .count();
    above as f64 / field.data().len() as f64
}

/// In-place Gaussian smoothing of each length-`cols` row of a `rows`×`cols`
/// row-major buffer, with reflected edges. No-op for sigma = 0.
fn smooth_rows(data: &mut [f64], rows: usize, cols: usize, sigma: f64) {
    if sigma == 0.0 {
        return;
    }
    let kernel = gaussian_kernel(sigma);
    let radius = (kernel.len() - 1) / 2;
    let mut row_views: Vec<&mut [f64]> = data.chunks_mut(cols).collect();
    debug_assert_eq!(row_views.len(), rows);
    parallel::for_each_mut(&mut row_views, |row| {
        let src = row.to_vec();
        for (i, out) in row.iter_mut().enumerate() {
            let mut acc = 0.0;
            for (k, &w) in kernel.iter().enumerate() {
                let offset = i as isize + k as isize - radius as isize;
                acc += w * src[reflect(offset, cols)];
            }
            *out = acc;
        }
    });
}

/// Normalized Gaussian taps out to ±⌈3σ⌉.
fn gaussian_kernel(sigma: f64) -> Vec<f64> {
    let radius = (3.0 * sigma).ceil() as usize;
    let mut taps: Vec<f64> = (-(radius as isize)..=radius as isize)
        .map(|d| (-0.5 * (d as f64 / sigma).powi(2)).exp())
        .collect();
    let sum: f64 = taps.iter().sum();
    for t in taps.iter_mut() {
        *t /= sum;
    }
    taps
}

/// Mirrors an index into [0, len) across the edges; bounces as many times as
/// the overshoot requires.
fn reflect(mut idx: isize, len: usize) -> usize {
    let len = len as isize;
    loop {
        if idx < 0 {
            idx = -idx - 1;
        } else if idx >= len {
            idx = 2 * len - idx - 1;
        } else {
            return idx as usize;
        }
    }
}

fn transpose_buf(data: &[f64], rows: usize, cols: usize) -> Vec<f64> {
    let mut out = vec![0.0; data.len()];
    for i in 0..rows {
        for j in 0..cols {
            out[j * rows + i] = data[i * cols + j];
        }
    }
    out
}
