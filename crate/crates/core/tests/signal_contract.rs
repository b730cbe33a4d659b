use num_complex::Complex64;
use radar_lowrank::{
    estimate_moments, gaussian_psd, mean_periodogram_over_seeds, periodogram,
    synthesize_point_target_iq, synthesize_weather_iq, velocity_bins, IqSeries, RadarParams,
    Scatterer, ScattererScene, SpectrumMoments,
};

fn demo_params() -> RadarParams {
    RadarParams::new(0.032, 2000.0, 1.0e-6, 30_000.0, 70.0).unwrap()
}

fn fig_moments() -> SpectrumMoments {
    SpectrumMoments {
        power_dbm: -10.0,
        mean_velocity: 6.0,
        spectrum_width: 3.5,
    }
}

fn dbm_to_mw(dbm: f64) -> f64 {
    10f64.powf(dbm / 10.0)
}

/// Expected mean periodogram bin: PSD mass in the bin plus the white-noise
/// share 1/n of the noise power.
fn theoretical_bins(
    params: &RadarParams,
    moments: &SpectrumMoments,
    n: usize,
    noise_dbm: f64,
) -> Vec<f64> {
    let dv = params.wavelength() * params.prf() / (2.0 * n as f64);
    let noise = dbm_to_mw(noise_dbm) / n as f64;
    gaussian_psd(&velocity_bins(params, n), moments)
        .unwrap()
        .iter()
        .map(|&s| s * dv + noise)
        .collect()
}

#[test]
fn psd_integrates_to_linear_power_within_point_one_percent() {
    let m = fig_moments();
    let lo = m.mean_velocity - 8.0 * m.spectrum_width;
    let hi = m.mean_velocity + 8.0 * m.spectrum_width;
    let steps = 20_000usize;
    let h = (hi - lo) / steps as f64;
    let grid: Vec<f64> = (0..=steps).map(|k| lo + k as f64 * h).collect();
    let density = gaussian_psd(&grid, &m).unwrap();
    let mut integral = 0.0;
    for (k, s) in density.iter().enumerate() {
        let w = if k == 0 || k == steps { 0.5 } else { 1.0 };
        integral += w * s;
    }
    integral *= h;
    let want = dbm_to_mw(m.power_dbm);
    assert!(
        (integral - want).abs() <= 1e-3 * want,
        "integral {integral}, expected {want}"
    );
}

#[test]
fn averaged_periodogram_tracks_psd_within_five_percent_of_peak() {
    let params = demo_params();
    let m = fig_moments();
    let n = 64;
    let noise_dbm = -40.0;
    let seeds: Vec<u64> = (0..200).collect();
    let est = mean_periodogram_over_seeds(&m, &params, n, noise_dbm, &seeds).unwrap();
    let theory = theoretical_bins(&params, &m, n, noise_dbm);
    let peak = theory.iter().fold(0.0f64, |a, &b| a.max(b));
    let ms: f64 = est
        .iter()
        .zip(&theory)
        .map(|(e, t)| (e - t) * (e - t))
        .sum::<f64>()
        / n as f64;
    let rms = ms.sqrt() / peak;
    assert!(rms <= 0.05, "peak-normalized RMS mismatch {rms}");
}

#[test]
fn moment_estimates_close_the_loop_over_seeds() {
    let params = demo_params();
    let m = fig_moments();
    let n = 64;
    let mut v_sum = 0.0;
    let mut w_sum = 0.0;
    let count = 100;
    for seed in 0..count {
        let iq = synthesize_weather_iq(&m, &params, n, -40.0, seed).unwrap();
        let est = estimate_moments(&iq, &params).unwrap();
        assert!(
            (est.mean_velocity - m.mean_velocity).abs() <= 2.0,
            "seed {seed}: velocity {}",
            est.mean_velocity
        );
        v_sum += est.mean_velocity;
        w_sum += est.spectrum_width;
    }
    let v_bar = v_sum / count as f64;
    let w_bar = w_sum / count as f64;
    assert!(
        (v_bar - m.mean_velocity).abs() <= 0.5,
        "mean velocity over seeds {v_bar}"
    );
    assert!(
        (w_bar - m.spectrum_width).abs() <= 0.5,
        "mean width over seeds {w_bar}"
    );
}

#[test]
fn point_targets_occupy_exactly_their_bins() {
    let params = demo_params();
    let n = 64;
    // On-grid Doppler velocities: v = k·Δv with Δv = λ·PRF/(2n) = 0.5 m/s.
    let dv = params.wavelength() * params.prf() / (2.0 * n as f64);
    let scene = ScattererScene::new(
        vec![
            Scatterer { range: 500.0, amplitude: Complex64::new(1.0, 0.0), velocity: 4.0 * dv },
            Scatterer { range: 900.0, amplitude: Complex64::new(0.0, 0.9), velocity: -12.0 * dv },
            Scatterer { range: 1500.0, amplitude: Complex64::new(-1.1, 0.0), velocity: 23.0 * dv },
            Scatterer { range: 2500.0, amplitude: Complex64::new(0.7, 0.7), velocity: -27.0 * dv },
        ],
        &params,
    )
    .unwrap();
    let iq = synthesize_point_target_iq(&scene, &params, n).unwrap();
    let p = periodogram(&iq);
    let peak = p.iter().fold(0.0f64, |a, &b| a.max(b));
    let loud = p.iter().filter(|&&x| x > 0.1 * peak).count();
    assert_eq!(loud, 4);
}

#[test]
fn weather_spectrum_fills_its_three_sigma_band() {
    let params = demo_params();
    let m = fig_moments();
    let n = 64;
    let seeds: Vec<u64> = (0..32).collect();
    let p = mean_periodogram_over_seeds(&m, &params, n, -40.0, &seeds).unwrap();
    let peak = p.iter().fold(0.0f64, |a, &b| a.max(b));
    let span = params.wavelength() * params.prf() / 2.0;
    let bins = velocity_bins(&params, n);
    let mut inside = 0usize;
    let mut loud = 0usize;
    for (v, &pw) in bins.iter().zip(&p) {
        // Wrapped distance to the mean velocity on the Nyquist circle.
        let mut d = (v - m.mean_velocity).abs() % span;
        if d > span / 2.0 {
            d = span - d;
        }
        if d <= 3.0 * m.spectrum_width {
            inside += 1;
            if pw > 0.1 * peak {
                loud += 1;
            }
        }
    }
    assert!(inside > 0);
    let frac = loud as f64 / inside as f64;
    assert!(frac >= 0.25, "only {frac:.2} of in-band bins above 10% of peak");
}

#[test]
fn periodogram_total_power_matches_series_power() {
    let params = demo_params();
    let iq = synthesize_weather_iq(&fig_moments(), &params, 128, -35.0, 9).unwrap();
    let total: f64 = periodogram(&iq).iter().sum();
    let mean_power: f64 =
        iq.samples().iter().map(|s| s.norm_sqr()).sum::<f64>() / iq.len() as f64;
    assert!((total - mean_power).abs() <= 1e-12 * mean_power);
}

#[test]
fn weak_signal_is_flagged_not_measured() {
    let params = demo_params();
    let m = SpectrumMoments {
        power_dbm: -300.0,
        mean_velocity: 0.0,
        spectrum_width: 1.0,
    };
    let iq = synthesize_weather_iq(&m, &params, 64, -10.0, 7).unwrap();
    assert!(matches!(
        estimate_moments(&iq, &params),
        Err(radar_lowrank::Error::WeakSignal)
    ));
    let good = synthesize_weather_iq(&fig_moments(), &params, 64, -40.0, 7).unwrap();
    assert!(estimate_moments(&good, &params).is_ok());
    let series = IqSeries::new(good.samples().to_vec(), params.prf()).unwrap();
    assert_eq!(series.len(), 64);
}
