//! Low-rank recovery of sparsely sampled weather-radar reflectivity fields.
//!
//! A range×azimuth scan of precipitation is highly correlated from cell to
//! cell, so the matrix of reflectivity values has rapidly decaying singular
//! values: it is approximately low rank, even though its entries are mostly
//! nonzero. This crate builds the whole experimental loop around that fact:
//!
//! - [`signal`] simulates per-gate Doppler time series (point targets and
//!   Gaussian-spectrum weather echoes) and estimates spectral moments, the
//!   quantities a real radar would measure.
//! - [`field`] synthesizes seeded, spatially correlated reflectivity fields
//!   with tunable correlation lengths and wet-area coverage.
//! - [`svd`] provides a self-contained singular value decomposition plus
//!   truncated reconstruction, for measuring and exploiting rank sparsity.
//! - [`mask`] draws the observation patterns of an undersampling scan:
//!   uniform random entries, or whole azimuth dwells plus strays.
//! - [`completion`] fills the unobserved entries back in by singular value
//!   thresholding, the convex relaxation that minimizes the nuclear norm
//!   subject to agreeing with the samples.
//! - [`io`] reads and writes all of the above as CSV or a small binary
//!   format.
//!
//! Every randomized step is seeded and every parallel region operates on
//! disjoint data, so identical inputs give bitwise-identical outputs
//! regardless of thread count (see [`set_thread_cap`]).

pub mod completion;
pub mod error;
pub mod field;
pub mod io;
pub mod mask;
pub mod matrix;
mod parallel;
pub mod signal;
pub mod svd;

pub use num_complex::Complex64;

pub use completion::{
    default_svt_config, project_onto_omega, shrink, svt_complete, ObservationSet, SvtConfig,
    SvtResult,
};
pub use error::{Error, Result};
pub use field::{coverage_fraction_of, synthesize_field, FieldSpec, DRY_FLOOR_DBZ};
pub use mask::{apply_mask, make_mask, MaskScheme, MaskSpec};
pub use matrix::DenseMatrix;
pub use parallel::set_thread_cap;
pub use signal::{
    doppler_frequency, estimate_moments, gaussian_psd, mean_periodogram_over_seeds,
    num_range_bins, periodogram, range_bin_length, reflectivity_dbz, synthesize_point_target_iq,
    synthesize_weather_iq, velocity_bins, IqSeries, RadarParams, Scatterer, ScattererScene,
    SpectrumMoments, SPEED_OF_LIGHT,
};
pub use svd::{low_rank_approx, nuclear_norm, singular_value_profile, svd, SvdFactors};
