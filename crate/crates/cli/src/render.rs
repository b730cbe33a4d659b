//! 8-bit binary PGM rendering of reflectivity matrices.

use std::io::Write;

use radar_lowrank::{DenseMatrix, ObservationSet};

use crate::AppError;

/// Maps values linearly from [lo, hi] onto gray levels. Without a mask the
/// full 0..=255 ramp is used; with one, unobserved cells are black and
/// observed values map onto 1..=255 so every observed pixel stays non-black
/// even at the floor value.
pub fn render_pgm(
    out: &mut dyn Write,
    matrix: &DenseMatrix,
    mask: Option<&ObservationSet>,
    lo: f64,
    hi: f64,
) -> Result<(), AppError> {
    if !(lo.is_finite() && hi.is_finite() && hi >= lo) {
        return Err(AppError::Msg(format!(
            "invalid gray-scale range [{lo}, {hi}]"
        )));
    }
    let (rows, cols) = matrix.shape();
    let observed = match mask {
        None => Vec::new(),
        Some(obs) => {
            if obs.shape() != (rows, cols) {
                return Err(AppError::Msg(format!(
                    "mask is {:?} but matrix is {:?}",
                    obs.shape(),
                    matrix.shape()
                )));
            }
            let mut flags = vec![false; rows * cols];
            for &(i, j, _) in obs.entries() {
                flags[i * cols + j] = true;
            }
            flags
        }
    };

    let span = hi - lo;
    let shade = |x: f64| -> u8 {
        let x = x.clamp(lo, hi);
        if mask.is_some() {
            if span == 0.0 {
                return 128;
            }
            1 + ((x - lo) / span * 254.0).round() as u8
        } else {
            if span == 0.0 {
                return 128;
            }
            ((x - lo) / span * 255.0).round() as u8
        }
    };

    let mut pixels = Vec::with_capacity(rows * cols);
    for i in 0..rows {
        for j in 0..cols {
            let on = mask.is_none() || observed[i * cols + j];
            pixels.push(if on { shade(matrix.get(i, j)) } else { 0 });
        }
    }

    write!(out, "P5\n{cols} {rows}\n255\n").map_err(|e| AppError::Core(e.into()))?;
    out.write_all(&pixels).map_err(|e| AppError::Core(e.into()))?;
    Ok(())
}
