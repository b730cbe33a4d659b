//! Slow-time radar echo models: point-scatterer tones, weather echoes with a
//! Gaussian Doppler spectrum, periodograms, and pulse-pair moment estimates.
//!
//! Everything works on the per-gate pulse-to-pulse (slow-time) series; the
//! fast-time dimension only appears through the range-bin bookkeeping.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rustfft::FftPlanner;

use crate::error::{Error, Result};
use crate::parallel;

pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Acquisition geometry and hardware constants.
#[derive(Debug, Clone)]
pub struct RadarParams {
    wavelength: f64,
    prf: f64,
    pulse_width: f64,
    max_range: f64,
    radar_constant: f64,
}

impl RadarParams {
    /// All quantities must be positive, and the pulse interval must cover the
    /// round trip to `max_range` (unambiguous-range condition).
    pub fn new(
        wavelength: f64,
        prf: f64,
        pulse_width: f64,
        max_range: f64,
        radar_constant: f64,
    ) -> Result<Self> {
        for (value, what) in [
            (wavelength, "wavelength"),
            (prf, "prf"),
            (pulse_width, "pulse_width"),
            (max_range, "max_range"),
            (radar_constant, "radar_constant"),
        ] {
            if !(value.is_finite() && value > 0.0) {
                return Err(Error::InvalidConfig(format!(
                    "{what} must be positive and finite, got {value}"
                )));
            }
        }
        if prf * (2.0 * max_range / SPEED_OF_LIGHT) > 1.0 {
            return Err(Error::InvalidConfig(format!(
                "prf {prf} Hz leaves no time for echoes from {max_range} m"
            )));
        }
        Ok(Self {
            wavelength,
            prf,
            pulse_width,
            max_range,
            radar_constant,
        })
    }

    /// Wavelength λ in meters.
    pub fn wavelength(&self) -> f64 {
        self.wavelength
    }

    /// Pulse repetition frequency in hertz.
    pub fn prf(&self) -> f64 {
        self.prf
    }

    /// Pulse width τ₀ in seconds.
    pub fn pulse_width(&self) -> f64 {
        self.pulse_width
    }

    /// Maximum range in meters.
    pub fn max_range(&self) -> f64 {
        self.max_range
    }

    /// Radar constant in dB, used by the reflectivity conversion.
    pub fn radar_constant(&self) -> f64 {
        self.radar_constant
    }

    /// Largest unambiguous radial speed, λ·PRF/4.
    pub fn nyquist_velocity(&self) -> f64 {
        self.wavelength * self.prf / 4.0
    }
}

/// One discrete reflector: range, complex reflectivity, radial velocity.
/// Positive velocity means an approaching target.
#[derive(Debug, Clone, Copy)]
pub struct Scatterer {
    pub range: f64,
    pub amplitude: Complex64,
    pub velocity: f64,
}

/// A set of point scatterers inside the radar's coverage.
#[derive(Debug, Clone)]
pub struct ScattererScene {
    scatterers: Vec<Scatterer>,
}

impl ScattererScene {
    /// Validates every range against (0, max_range] and every amplitude and
    /// velocity for finiteness. An empty list is a legal (silent) scene.
    pub fn new(scatterers: Vec<Scatterer>, params: &RadarParams) -> Result<Self> {
        for s in &scatterers {
            if !(s.range > 0.0 && s.range <= params.max_range()) {
                return Err(Error::InvalidConfig(format!(
                    "scatterer range {} m outside (0, {}]",
                    s.range,
                    params.max_range()
                )));
            }
            if !(s.amplitude.re.is_finite()
                && s.amplitude.im.is_finite()
                && s.velocity.is_finite())
            {
                return Err(Error::NonFinite);
            }
        }
        Ok(Self { scatterers })
    }

    pub fn scatterers(&self) -> &[Scatterer] {
        &self.scatterers
    }

    pub fn len(&self) -> usize {
        self.scatterers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.scatterers.is_empty()
    }
}

/// Complex voltage samples for one range gate, one per transmitted pulse.
#[derive(Debug, Clone, PartialEq)]
pub struct IqSeries {
    samples: Vec<Complex64>,
    prf: f64,
}

impl IqSeries {
    pub fn new(samples: Vec<Complex64>, prf: f64) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::TooFewSamples { got: 0, need: 1 });
        }
        if !(prf.is_finite() && prf > 0.0) {
            return Err(Error::InvalidConfig(format!(
                "prf must be positive and finite, got {prf}"
            )));
        }
        if samples.iter().any(|s| !(s.re.is_finite() && s.im.is_finite())) {
            return Err(Error::NonFinite);
        }
        Ok(Self { samples, prf })
    }

    pub fn samples(&self) -> &[Complex64] {
        &self.samples
    }

    pub fn prf(&self) -> f64 {
        self.prf
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }
}

/// First three spectral moments of a Doppler spectrum.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectrumMoments {
    /// Mean received power in dBm.
    pub power_dbm: f64,
    /// Mean radial velocity v̄ in m/s.
    pub mean_velocity: f64,
    /// Spectrum width σ_v in m/s, nonnegative.
    pub spectrum_width: f64,
}

/// Radial extent of one range bin, c·τ₀/2.
pub fn range_bin_length(params: &RadarParams) -> f64 {
    SPEED_OF_LIGHT * params.pulse_width() / 2.0
}

/// Number of whole range bins inside max_range: ⌊R_max/r₀⌋. Zero when the
/// pulse is longer than the whole coverage (callers should warn).
pub fn num_range_bins(params: &RadarParams) -> usize {
    (params.max_range() / range_bin_length(params)).floor() as usize
}

/// Doppler shift 2v/λ; positive for approaching targets.
pub fn doppler_frequency(velocity: f64, params: &RadarParams) -> f64 {
    2.0 * velocity / params.wavelength()
}

/// Pulse-to-pulse series for one gate holding the scene's scatterers:
/// s[p] = Σ_k a_k·exp(i·2π·f_{d,k}·p/PRF).
pub fn synthesize_point_target_iq(
    scene: &ScattererScene,
    params: &RadarParams,
    n_pulses: usize,
) -> Result<IqSeries> {
    if scene.is_empty() {
        return Err(Error::EmptyScene);
    }
    if n_pulses < 2 {
        return Err(Error::TooFewSamples {
            got: n_pulses,
            need: 2,
        });
    }
    let mut samples = vec![Complex64::new(0.0, 0.0); n_pulses];
    for s in scene.scatterers() {
        let phase_step = 2.0 * PI * doppler_frequency(s.velocity, params) / params.prf();
        for (p, out) in samples.iter_mut().enumerate() {
            *out += s.amplitude * Complex64::from_polar(1.0, phase_step * p as f64);
        }
    }
    IqSeries::new(samples, params.prf())
}

/// Gaussian power spectral density over radial velocity:
/// S(v) = P/(σ_v√(2π))·exp(−(v−v̄)²/(2σ_v²)), with P the linear power in
/// milliwatts, so that ∫S dv = P.
pub fn gaussian_psd(v_grid: &[f64], moments: &SpectrumMoments) -> Result<Vec<f64>> {
    if moments.spectrum_width <= 0.0 {
        return Err(Error::ZeroWidth);
    }
    let p_lin = dbm_to_milliwatts(moments.power_dbm);
    let sigma = moments.spectrum_width;
    let scale = p_lin / (sigma * (2.0 * PI).sqrt());
    Ok(v_grid
        .iter()
        .map(|&v| {
            let z = (v - moments.mean_velocity) / sigma;
            scale * (-0.5 * z * z).exp()
        })
        .collect())
}

/// Velocity of each FFT bin of an n-point periodogram, in FFT index order:
/// bin k sits at frequency k·PRF/n wrapped into [−PRF/2, PRF/2), then mapped
/// through v = λf/2.
pub fn velocity_bins(params: &RadarParams, n: usize) -> Vec<f64> {
    (0..n)
        .map(|k| {
            let mut f = k as f64 * params.prf() / n as f64;
            if f >= params.prf() / 2.0 {
                f -= params.prf();
            }
            params.wavelength() * f / 2.0
        })
        .collect()
}

/// Squared-magnitude DFT scaled by 1/n²; the total over all bins equals the
/// mean sample power (1/n)·Σ|x[p]|².
pub fn periodogram(iq: &IqSeries) -> Vec<f64> {
    let n = iq.len();
    let mut buf: Vec<Complex64> = iq.samples().to_vec();
    FftPlanner::new().plan_fft_forward(n).process(&mut buf);
    let scale = 1.0 / (n as f64 * n as f64);
    buf.iter().map(|x| x.norm_sqr() * scale).collect()
}

/// Draws one seeded realization of a weather echo: a complex Gaussian
/// spectrum whose expected periodogram equals the Gaussian density sampled at
/// the FFT bins plus a flat noise floor, inverse-transformed to slow time.
///
/// `noise_dbm` may be −∞ for a noiseless series.
pub fn synthesize_weather_iq(
    moments: &SpectrumMoments,
    params: &RadarParams,
    n_pulses: usize,
    noise_dbm: f64,
    seed: u64,
) -> Result<IqSeries> {
    if n_pulses < 16 {
        return Err(Error::TooFewSamples {
            got: n_pulses,
            need: 16,
        });
    }
    if moments.spectrum_width <= 0.0 {
        return Err(Error::ZeroWidth);
    }
    if moments.mean_velocity.abs() > params.nyquist_velocity() {
        return Err(Error::InvalidConfig(format!(
            "mean velocity {} m/s exceeds the Nyquist velocity {} m/s",
            moments.mean_velocity,
            params.nyquist_velocity()
        )));
    }
    if noise_dbm.is_nan() || noise_dbm == f64::INFINITY {
        return Err(Error::InvalidConfig(format!(
            "noise power must be a finite dBm value or -inf, got {noise_dbm}"
        )));
    }

    let n = n_pulses;
    let bins = velocity_bins(params, n);
    let psd = gaussian_psd(&bins, moments)?;
    let dv = params.wavelength() * params.prf() / (2.0 * n as f64);
    let noise_lin = dbm_to_milliwatts(noise_dbm);

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let nf = n as f64;
    let mut spectrum: Vec<Complex64> = psd
        .iter()
        .map(|&s| {
            // Expected |X_k|² so that the periodogram |X_k|²/n² averages to
            // S(v_k)·Δv + N/n.
            let energy = nf * nf * (s * dv + noise_lin / nf);
            let re: f64 = StandardNormal.sample(&mut rng);
            let im: f64 = StandardNormal.sample(&mut rng);
            Complex64::new(re, im) * (energy / 2.0).sqrt()
        })
        .collect();
    FftPlanner::new().plan_fft_inverse(n).process(&mut spectrum);
    for x in spectrum.iter_mut() {
        *x /= nf;
    }
    IqSeries::new(spectrum, params.prf())
}

/// Periodogram averaged over one independent weather realization per seed.
/// Realizations may be computed on any number of threads; the average is
/// accumulated in seed order, so the result is identical either way.
pub fn mean_periodogram_over_seeds(
    moments: &SpectrumMoments,
    params: &RadarParams,
    n_pulses: usize,
    noise_dbm: f64,
    seeds: &[u64],
) -> Result<Vec<f64>> {
    if seeds.is_empty() {
        return Err(Error::InvalidConfig("need at least one seed".into()));
    }
    let spectra = parallel::map_collect(seeds.len(), |k| {
        synthesize_weather_iq(moments, params, n_pulses, noise_dbm, seeds[k])
            .map(|iq| periodogram(&iq))
    });
    let mut mean = vec![0.0; n_pulses];
    for spectrum in spectra {
        for (m, s) in mean.iter_mut().zip(spectrum?) {
            *m += s;
        }
    }
    let inv = 1.0 / seeds.len() as f64;
    for m in mean.iter_mut() {
        *m *= inv;
    }
    Ok(mean)
}

/// Pulse-pair estimates: power from the lag-0 autocorrelation, velocity from
/// the lag-1 phase, width from the lag-0/lag-1 magnitude ratio.
///
/// Errors with `WeakSignal` when |R₁| falls under 3·R₀/√n, the regime where
/// the phase and ratio carry no usable information (noise-only input).
pub fn estimate_moments(iq: &IqSeries, params: &RadarParams) -> Result<SpectrumMoments> {
    let n = iq.len();
    if n < 16 {
        return Err(Error::TooFewSamples { got: n, need: 16 });
    }
    let samples = iq.samples();
    let r0: f64 = samples.iter().map(|x| x.norm_sqr()).sum::<f64>() / n as f64;
    let mut r1 = Complex64::new(0.0, 0.0);
    for pair in samples.windows(2) {
        r1 += pair[0].conj() * pair[1];
    }
    r1 /= (n - 1) as f64;

    if r0 == 0.0 || r1.norm() < 3.0 * r0 / (n as f64).sqrt() {
        return Err(Error::WeakSignal);
    }

    let lam_prf = params.wavelength() * params.prf();
    let mean_velocity = lam_prf / (4.0 * PI) * r1.arg();
    let ratio = (r0 / r1.norm()).ln().max(0.0);
    let spectrum_width = lam_prf / (2.0 * std::f64::consts::SQRT_2 * PI) * ratio.sqrt();
    Ok(SpectrumMoments {
        power_dbm: milliwatts_to_dbm(r0),
        mean_velocity,
        spectrum_width,
    })
}

/// Reflectivity factor in dBZ: P̄_rx + C + 20·log₁₀(r), with r taken in
/// kilometers (`r_meters` is converted internally).
pub fn reflectivity_dbz(p_bar_rx_dbm: f64, r_meters: f64, params: &RadarParams) -> Result<f64> {
    if !(r_meters > 0.0) {
        return Err(Error::NonPositiveRange);
    }
    Ok(p_bar_rx_dbm + params.radar_constant() + 20.0 * (r_meters / 1000.0).log10())
}

fn dbm_to_milliwatts(dbm: f64) -> f64 {
    10f64.powf(dbm / 10.0)
}

fn milliwatts_to_dbm(mw: f64) -> f64 {
    10.0 * mw.log10()
}
