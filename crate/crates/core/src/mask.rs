//! Observation-mask generators: uniform random entries, and a fast-scan
//! pattern that fully dwells on a few azimuth columns and catches stray
//! samples on the rest.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::completion::ObservationSet;
use crate::error::{Error, Result};
use crate::matrix::DenseMatrix;

/// How the retained entries are placed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MaskScheme {
    /// Entries drawn uniformly without replacement over the whole grid.
    UniformEntries,
    /// `dwell_ratio` of the azimuth columns retained whole; the remaining
    /// budget is scattered uniformly over the other columns.
    AzimuthMiss { dwell_ratio: f64 },
}

/// Mask recipe: scheme, target fraction of entries, grid shape, seed.
#[derive(Debug, Clone, PartialEq)]
pub struct MaskSpec {
    pub scheme: MaskScheme,
    pub fraction: f64,
    pub rows: usize,
    pub cols: usize,
    pub seed: u64,
}

impl MaskSpec {
    fn validate(&self) -> Result<()> {
        if self.rows == 0 || self.cols == 0 {
            return Err(Error::EmptyMatrix);
        }
        if !(self.fraction > 0.0 && self.fraction <= 1.0) {
            return Err(Error::InvalidConfig(format!(
                "sampling fraction must lie in (0, 1], got {}",
                self.fraction
            )));
        }
        if self.fraction * ((self.rows * self.cols) as f64) < 1.0 {
            return Err(Error::InvalidConfig(format!(
                "fraction {} of a {}x{} grid selects no entries",
                self.fraction, self.rows, self.cols
            )));
        }
        if let MaskScheme::AzimuthMiss { dwell_ratio } = self.scheme {
            if !(dwell_ratio > 0.0 && dwell_ratio <= 1.0) {
                return Err(Error::InvalidConfig(format!(
                    "dwell_ratio must lie in (0, 1], got {dwell_ratio}"
                )));
            }
        }
        Ok(())
    }
}

/// Generates the index set Ω. The total count is round(p·m·n) for both
/// schemes; indices come back sorted row-major and duplicate-free.
/// Deterministic per seed.
pub fn make_mask(spec: &MaskSpec) -> Result<Vec<(usize, usize)>> {
    spec.validate()?;
    let (m, n) = (spec.rows, spec.cols);
    let total = m * n;
    let target = (spec.fraction * total as f64).round() as usize;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);

    let mut linear: Vec<usize> = match spec.scheme {
        MaskScheme::UniformEntries => sample_without_replacement(&mut rng, total, target)
            .expect("target <= total by construction"),
        MaskScheme::AzimuthMiss { dwell_ratio } => {
            let n_full = (dwell_ratio * n as f64).round() as usize;
            let full_entries = n_full * m;
            if full_entries > target {
                return Err(Error::InfeasibleFraction {
                    dwell_ratio,
                    fraction: spec.fraction,
                });
            }
            let full_cols = sample_without_replacement(&mut rng, n, n_full)
                .expect("n_full <= n since dwell_ratio <= 1");
            let mut is_full = vec![false; n];
            for &j in &full_cols {
                is_full[j] = true;
            }
            let mut picked: Vec<usize> = Vec::with_capacity(target);
            for j in full_cols {
                picked.extend((0..m).map(|i| i * n + j));
            }
            // Scatter the remaining budget over the missed columns.
            let complement: Vec<usize> = (0..total).filter(|lin| !is_full[lin % n]).collect();
            let scattered =
                sample_without_replacement(&mut rng, complement.len(), target - full_entries)
                    .expect("remaining budget fits in the missed columns");
            picked.extend(scattered.into_iter().map(|k| complement[k]));
            picked
        }
    };
    linear.sort_unstable();
    Ok(linear.into_iter().map(|lin| (lin / n, lin % n)).collect())
}

/// `count` distinct values from 0..`total`, by partial Fisher-Yates shuffle.
/// None when count exceeds total.
fn sample_without_replacement(
    rng: &mut ChaCha8Rng,
    total: usize,
    count: usize,
) -> Option<Vec<usize>> {
    if count > total {
        return None;
    }
    let mut pool: Vec<usize> = (0..total).collect();
    for i in 0..count {
        let j = rng.gen_range(i..total);
        pool.swap(i, j);
    }
    pool.truncate(count);
    Some(pool)
}

/// Reads the field at the mask positions, producing the observation set the
/// completion solver consumes.
pub fn apply_mask(field: &DenseMatrix, omega: &[(usize, usize)]) -> Result<ObservationSet> {
    for &(i, j) in omega {
        if i >= field.rows() || j >= field.cols() {
            return Err(Error::OutOfBounds {
                row: i,
                col: j,
                rows: field.rows(),
                cols: field.cols(),
            });
        }
    }
    let entries = omega
        .iter()
        .map(|&(i, j)| (i, j, field.get(i, j)))
        .collect();
    ObservationSet::new(field.rows(), field.cols(), entries)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashSet;

    fn uniform(rows: usize, cols: usize, fraction: f64, seed: u64) -> MaskSpec {
        MaskSpec {
            scheme: MaskScheme::UniformEntries,
            fraction,
            rows,
            cols,
            seed,
        }
    }

    #[test]
    fn full_fraction_keeps_everything() {
        let omega = make_mask(&uniform(6, 7, 1.0, 3)).unwrap();
        assert_eq!(omega.len(), 42);
        let unique: HashSet<_> = omega.iter().collect();
        assert_eq!(unique.len(), 42);

        let spec = MaskSpec {
            scheme: MaskScheme::AzimuthMiss { dwell_ratio: 0.25 },
            ..uniform(6, 8, 1.0, 3)
        };
        assert_eq!(make_mask(&spec).unwrap().len(), 48);
    }

    #[test]
    fn uniform_cardinality_is_exact() {
        assert_eq!(make_mask(&uniform(10, 10, 0.37, 1)).unwrap().len(), 37);
        assert_eq!(make_mask(&uniform(9, 7, 0.5, 2)).unwrap().len(), 32);
    }

    #[test]
    fn full_scan_one_third_count() {
        let omega = make_mask(&uniform(1930, 413, 1.0 / 3.0, 9)).unwrap();
        assert_eq!(omega.len(), 265_697);
        assert!(omega.iter().all(|&(i, j)| i < 1930 && j < 413));
    }

    #[test]
    fn azimuth_miss_counting_identity() {
        let spec = MaskSpec {
            scheme: MaskScheme::AzimuthMiss { dwell_ratio: 0.2 },
            ..uniform(60, 40, 1.0 / 3.0, 5)
        };
        let omega = make_mask(&spec).unwrap();
        assert_eq!(omega.len(), 800);

        // 8 full columns of 60, 320 strays elsewhere
        let mut per_col = vec![0usize; 40];
        for &(_, j) in &omega {
            per_col[j] += 1;
        }
        let full_cols = per_col.iter().filter(|&&c| c == 60).count();
        assert_eq!(full_cols, 8);
        let full_total: usize = per_col.iter().filter(|&&c| c == 60).sum();
        assert_eq!(omega.len() - full_total, 320);
    }

    #[test]
    fn azimuth_miss_rejects_excess_dwell() {
        let spec = MaskSpec {
            scheme: MaskScheme::AzimuthMiss { dwell_ratio: 0.9 },
            ..uniform(10, 10, 0.3, 1)
        };
        assert!(matches!(
            make_mask(&spec),
            Err(Error::InfeasibleFraction { .. })
        ));
    }

    #[test]
    fn masks_are_seeded_and_sorted() {
        let a = make_mask(&uniform(20, 20, 0.25, 17)).unwrap();
        let b = make_mask(&uniform(20, 20, 0.25, 17)).unwrap();
        let c = make_mask(&uniform(20, 20, 0.25, 18)).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
        assert!(a.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn invalid_fractions_rejected() {
        assert!(make_mask(&uniform(10, 10, 0.0, 1)).is_err());
        assert!(make_mask(&uniform(10, 10, 1.1, 1)).is_err());
        // fraction so small that not a single entry gets selected
        assert!(make_mask(&uniform(2, 2, 0.05, 1)).is_err());
    }

    #[test]
    fn apply_mask_reads_field_values() {
        let field = DenseMatrix::from_vec(2, 3, vec![1.0, 2.0, 3.0, 4.0, 5.0, 6.0]).unwrap();
        let omega = vec![(0, 0), (1, 2)];
        let obs = apply_mask(&field, &omega).unwrap();
        assert_eq!(obs.entries(), &[(0, 0, 1.0), (1, 2, 6.0)]);
        assert!((obs.sampling_fraction() - 2.0 / 6.0).abs() <= 1e-15);

        let single = apply_mask(&field, &[(1, 1)]).unwrap();
        assert!((single.sampling_fraction() - 1.0 / 6.0).abs() <= 1e-15);
    }

    #[test]
    fn apply_mask_checks_bounds() {
        let field = DenseMatrix::zeros(2, 2);
        assert!(matches!(
            apply_mask(&field, &[(2, 0)]),
            Err(Error::OutOfBounds { .. })
        ));
    }
}
