use num_complex::Complex64;
use spdc_vacuum::correlations::alpha_for_visibility;
use spdc_vacuum::scan::{
    dominant_fringe_frequency, envelope, estimate_visibility, fit_visibility, ideal_scan,
    phase_from_delay, poisson_sample, simulate_counts, substream_seed, write_csv, CountingConfig,
    ScanConfig, ScanResult, ScanType,
};
use spdc_vacuum::Error;

fn scan(scan_type: ScanType, lc_um: f64, range: (f64, f64), points: usize, v: f64) -> ScanConfig {
    ScanConfig {
        scan_type,
        wavelength_nm: scan_type.nominal_wavelength_nm(),
        coherence_length_um: lc_um,
        delay_start_um: range.0,
        delay_stop_um: range.1,
        points,
        alpha: Complex64::new(alpha_for_visibility(v), 0.0),
        baseline_rate_hz: 1000.0,
    }
}

fn counting(seed: u64, accidentals_hz: f64) -> CountingConfig {
    CountingConfig {
        bin_seconds: 1.0,
        accidentals_hz,
        seed,
    }
}

#[test]
fn phase_and_envelope_conventions() {
    assert!((phase_from_delay(808.0, 808.0) - std::f64::consts::TAU).abs() < 1e-15);
    assert!((phase_from_delay(404.0, 808.0) - std::f64::consts::PI).abs() < 1e-15);
    assert_eq!(phase_from_delay(0.0, 808.0), 0.0);
    assert_eq!(envelope(0.0, 80.0), 1.0);
    assert!((envelope(80.0, 80.0) - 0.5).abs() < 1e-15);
    assert!((envelope(240.0, 80.0) - 1.953125e-3).abs() < 1e-15);
}

#[test]
fn fringe_period_follows_the_delayed_field() {
    for (scan_type, lc) in [
        (ScanType::SignalDelay, 80.0),
        (ScanType::IdlerDelay, 80.0),
        (ScanType::PumpDelay, 1500.0),
    ] {
        let cfg = scan(scan_type, lc, (-2.0, 2.0), 801, 1.0);
        let sr = ideal_scan(&cfg).unwrap();
        let (freq, bin) = dominant_fringe_frequency(&sr.delays_um, &sr.ideal_rate_hz);
        let expected = 1000.0 / cfg.wavelength_nm;
        assert!(
            (freq - expected).abs() <= bin,
            "{scan_type}: {freq} vs {expected}"
        );
    }
}

#[test]
fn ideal_scan_shapes() {
    let flat = ideal_scan(&ScanConfig {
        alpha: Complex64::new(0.0, 0.0),
        ..scan(ScanType::SignalDelay, 80.0, (-2.0, 2.0), 101, 1.0)
    })
    .unwrap();
    assert!(flat
        .ideal_rate_hz
        .iter()
        .all(|r| (r - 1000.0).abs() < 1e-12));

    let full = ideal_scan(&scan(ScanType::SignalDelay, 1e9, (-2.0, 2.0), 801, 1.0)).unwrap();
    let max = full.ideal_rate_hz.iter().copied().fold(f64::MIN, f64::max);
    let min = full.ideal_rate_hz.iter().copied().fold(f64::MAX, f64::min);
    assert!((max - 2000.0).abs() < 1e-9);
    // The 5 nm grid misses the exact minimum by at most 2.5 nm.
    assert!(min < 1000.0 * (1.0 - (std::f64::consts::TAU * 2.5 / 808.0).cos()));
}

#[test]
fn noiseless_fit_is_exact() {
    let sr = ideal_scan(&scan(ScanType::SignalDelay, 1e12, (-2.0, 2.0), 801, 1.0)).unwrap();
    let fit = fit_visibility(&sr.delays_um, &sr.ideal_rate_hz, 808.0, (-2.0, 2.0)).unwrap();
    assert!((fit.visibility - 1.0).abs() < 1e-9);
    let sr = ideal_scan(&scan(ScanType::PumpDelay, 1e12, (-1.0, 1.0), 401, 0.98)).unwrap();
    let fit = fit_visibility(&sr.delays_um, &sr.ideal_rate_hz, 355.0, (-1.0, 1.0)).unwrap();
    assert!((fit.visibility - 0.98).abs() < 1e-9);
}

#[test]
fn too_few_fringes_is_an_error() {
    let sr = simulate_counts(
        &ideal_scan(&scan(ScanType::SignalDelay, 80.0, (-0.5, 0.5), 101, 0.9)).unwrap(),
        &counting(1, 0.0),
    )
    .unwrap();
    assert!(matches!(
        estimate_visibility(&sr, 808.0),
        Err(Error::InsufficientFringes { .. })
    ));
    let no_counts = ideal_scan(&scan(ScanType::SignalDelay, 80.0, (-2.0, 2.0), 101, 0.9)).unwrap();
    assert_eq!(
        estimate_visibility(&no_counts, 808.0).unwrap_err(),
        Error::MissingCounts
    );
}

#[test]
fn constant_rate_counts_are_poisson() {
    let sr = ScanResult {
        delays_um: (0..400).map(|k| k as f64).collect(),
        ideal_rate_hz: vec![1000.0; 400],
        counts: None,
        fit: None,
        wavelength_nm: 808.0,
        coherence_length_um: 80.0,
    };
    let counts = simulate_counts(&sr, &counting(42, 0.0))
        .unwrap()
        .counts
        .unwrap();
    let n = counts.len() as f64;
    let mean = counts.iter().sum::<u64>() as f64 / n;
    let var = counts
        .iter()
        .map(|&k| (k as f64 - mean).powi(2))
        .sum::<f64>()
        / (n - 1.0);
    assert!((mean - 1000.0).abs() < 5.0 * (1000.0f64 / 400.0).sqrt());
    assert!((0.8..1.2).contains(&(var / mean)));
}

#[test]
fn repeated_fixed_delay_draws_have_unit_fano_factor() {
    for (seed, mean) in [(3u64, 1000.0), (4, 5000.0)] {
        let draws: Vec<f64> = (0..4000)
            .map(|k| poisson_sample(mean, substream_seed(seed, k)) as f64)
            .collect();
        let m = draws.iter().sum::<f64>() / draws.len() as f64;
        let v = draws.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (draws.len() - 1) as f64;
        assert!((0.9..=1.1).contains(&(v / m)), "fano {}", v / m);
    }
}

#[test]
fn zero_rates_give_zero_counts() {
    let mut sr = ideal_scan(&scan(ScanType::SignalDelay, 80.0, (-2.0, 2.0), 51, 1.0)).unwrap();
    sr.ideal_rate_hz.iter_mut().for_each(|r| *r = 0.0);
    let counts = simulate_counts(&sr, &counting(9, 0.0))
        .unwrap()
        .counts
        .unwrap();
    assert!(counts.iter().all(|&c| c == 0));
}

#[test]
fn counts_and_csv_are_deterministic() {
    let cfg = scan(ScanType::IdlerDelay, 80.0, (-2.0, 2.0), 401, 0.9);
    let render = || {
        let mut sr = simulate_counts(&ideal_scan(&cfg).unwrap(), &counting(77, 5.0)).unwrap();
        sr.fit = estimate_visibility(&sr, cfg.wavelength_nm).ok();
        let mut buf = Vec::new();
        write_csv(&sr, &[("seed".into(), "77".into())], &mut buf).unwrap();
        buf
    };
    let first = render();
    assert_eq!(first, render());
    let text = String::from_utf8(first).unwrap();
    assert!(text.starts_with("# seed=77\n# fitted_v="));
    assert!(text.contains("\ndelay_um,ideal_rate_hz,counts\n"));
    assert!(text.ends_with('\n'));
    assert_eq!(text.lines().filter(|l| !l.starts_with('#')).count(), 402);
    let other = simulate_counts(&ideal_scan(&cfg).unwrap(), &counting(78, 5.0)).unwrap();
    assert_ne!(
        other.counts,
        simulate_counts(&ideal_scan(&cfg).unwrap(), &counting(77, 5.0))
            .unwrap()
            .counts
    );
}

#[test]
fn visibility_decreases_away_from_zero_delay() {
    // Windows of 4 μm centred at increasing delay on a short-coherence scan.
    let lc = 20.0;
    let mut previous = f64::INFINITY;
    for centre in [0.0, 8.0, 16.0, 24.0, 32.0] {
        let cfg = scan(
            ScanType::SignalDelay,
            lc,
            (centre - 2.0, centre + 2.0),
            801,
            0.94,
        );
        let ideal = ideal_scan(&cfg).unwrap();
        let sr = simulate_counts(&ideal, &counting(11, 0.0)).unwrap();
        let counts: Vec<f64> = sr.counts.unwrap().iter().map(|&c| c as f64).collect();
        let fit =
            fit_visibility(&sr.delays_um, &counts, 808.0, (centre - 2.0, centre + 2.0)).unwrap();
        assert!(
            fit.visibility <= previous + 3.0 * fit.stderr,
            "centre {centre}: {} after {previous}",
            fit.visibility
        );
        assert!((fit.visibility - 0.94 * envelope(centre, lc)).abs() < 4.0 * fit.stderr + 0.01);
        previous = fit.visibility;
    }
}

#[test]
fn accidentals_equal_to_baseline_halve_visibility() {
    let cfg = scan(ScanType::SignalDelay, 80.0, (-2.0, 2.0), 801, 0.94);
    let ideal = ideal_scan(&cfg).unwrap();
    let clean =
        estimate_visibility(&simulate_counts(&ideal, &counting(5, 0.0)).unwrap(), 808.0).unwrap();
    let noisy = estimate_visibility(
        &simulate_counts(&ideal, &counting(5, 1000.0)).unwrap(),
        808.0,
    )
    .unwrap();
    let expected = clean.visibility / 2.0;
    let sigma = (noisy.stderr.powi(2) + (clean.stderr / 2.0).powi(2)).sqrt();
    assert!(
        (noisy.visibility - expected).abs() < 4.0 * sigma,
        "{} vs {}",
        noisy.visibility,
        expected
    );
}
