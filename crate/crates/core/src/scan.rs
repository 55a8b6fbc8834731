//! Delay scans of the two-crystal coincidence rate.
//!
//! Delaying one field by `δ` shifts the interferometer phase by `2πδ/λ`,
//! where `λ` is the wavelength of the delayed field (signal, idler or pump).
//! Finite coherence damps the fringes with a Gaussian envelope whose
//! half-width at half maximum is the configured coherence length.
//!
//! Counting noise is Poisson. Each scan point draws from its own generator,
//! a PCG64 (`rand_pcg::Pcg64`, XSL-RR 128/64) seeded with
//! `splitmix64(seed + (k + 1) * 0x9E3779B97F4A7C15)` for point `k`, so
//! output is independent of thread count and evaluation order.

use std::f64::consts::{LN_2, PI, TAU};
use std::fmt;
use std::io::{self, Write};
use std::str::FromStr;

use num_complex::Complex64;
use rand::SeedableRng;
use rand_distr::{Distribution, Poisson};
use rand_pcg::Pcg64;
use rayon::prelude::*;

use crate::correlations::visibility_distinguishability;
use crate::error::{Error, Result};

/// Fits only use points where the envelope is at least this large.
pub const FIT_ENVELOPE_THRESHOLD: f64 = 0.9;

pub const NM_PER_UM: f64 = 1000.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ScanType {
    SignalDelay,
    IdlerDelay,
    PumpDelay,
}

impl ScanType {
    /// Wavelength of the delayed field in the reference setup.
    pub fn nominal_wavelength_nm(self) -> f64 {
        match self {
            ScanType::SignalDelay => 808.0,
            ScanType::IdlerDelay => 632.0,
            ScanType::PumpDelay => 355.0,
        }
    }

    /// Sign with which the delay enters `θ = φ1 - φ2`: the signal and pump
    /// delays act on the crystal-1 pathway, the idler delay on crystal 2.
    fn phase_sign(self) -> f64 {
        match self {
            ScanType::SignalDelay | ScanType::PumpDelay => 1.0,
            ScanType::IdlerDelay => -1.0,
        }
    }
}

impl fmt::Display for ScanType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ScanType::SignalDelay => "signal",
            ScanType::IdlerDelay => "idler",
            ScanType::PumpDelay => "pump",
        })
    }
}

impl FromStr for ScanType {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "signal" => Ok(ScanType::SignalDelay),
            "idler" => Ok(ScanType::IdlerDelay),
            "pump" => Ok(ScanType::PumpDelay),
            other => Err(Error::InvalidScan(format!(
                "unknown scan type {other:?} (expected signal, idler or pump)"
            ))),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ScanConfig {
    pub scan_type: ScanType,
    pub wavelength_nm: f64,
    pub coherence_length_um: f64,
    pub delay_start_um: f64,
    pub delay_stop_um: f64,
    pub points: usize,
    /// Pump amplitude ratio `C2/C1`.
    pub alpha: Complex64,
    /// Mean coincidence rate away from the fringes, pairs per second.
    pub baseline_rate_hz: f64,
}

impl ScanConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::InvalidScan(msg.to_string()));
        if !(self.wavelength_nm > 0.0 && self.wavelength_nm.is_finite()) {
            return bad("wavelength must be positive");
        }
        if !(self.coherence_length_um > 0.0) {
            return bad("coherence length must be positive");
        }
        if !(self.delay_start_um < self.delay_stop_um)
            || !self.delay_stop_um.is_finite()
            || !self.delay_start_um.is_finite()
        {
            return bad("delay start must be below delay stop");
        }
        if self.points < 2 {
            return bad("a scan needs at least 2 points");
        }
        if !(self.baseline_rate_hz >= 0.0 && self.baseline_rate_hz.is_finite()) {
            return bad("baseline rate must be nonnegative");
        }
        if !(self.alpha.re.is_finite() && self.alpha.im.is_finite()) {
            return bad("alpha must be finite");
        }
        Ok(())
    }

    pub fn delays_um(&self) -> Vec<f64> {
        let step = (self.delay_stop_um - self.delay_start_um) / (self.points - 1) as f64;
        (0..self.points)
            .map(|k| self.delay_start_um + step * k as f64)
            .collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CountingConfig {
    pub bin_seconds: f64,
    pub accidentals_hz: f64,
    pub seed: u64,
}

impl CountingConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.bin_seconds > 0.0 && self.bin_seconds.is_finite()) {
            return Err(Error::InvalidScan("bin length must be positive".into()));
        }
        if !(self.accidentals_hz >= 0.0 && self.accidentals_hz.is_finite()) {
            return Err(Error::InvalidScan(
                "accidental rate must be nonnegative".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct VisibilityFit {
    pub visibility: f64,
    pub stderr: f64,
    /// Fitted mean level `A` of `A [1 + V cos(2πδ/λ + ψ)]`.
    pub mean: f64,
    pub phase: f64,
    pub window_um: (f64, f64),
}

#[derive(Clone, Debug, PartialEq)]
pub struct ScanResult {
    pub delays_um: Vec<f64>,
    pub ideal_rate_hz: Vec<f64>,
    pub counts: Option<Vec<u64>>,
    pub fit: Option<VisibilityFit>,
    pub wavelength_nm: f64,
    pub coherence_length_um: f64,
}

impl ScanResult {
    pub fn fitted_visibility(&self) -> Option<f64> {
        self.fit.map(|f| f.visibility)
    }

    pub fn fitted_visibility_stderr(&self) -> Option<f64> {
        self.fit.map(|f| f.stderr)
    }
}

/// `2πδ/λ` with both lengths in the same unit; not reduced mod 2π.
pub fn phase_from_delay(delta: f64, wavelength: f64) -> f64 {
    TAU * delta / wavelength
}

/// Gaussian fringe envelope with `envelope(±L_c) = 1/2`.
pub fn envelope(delta: f64, coherence_length: f64) -> f64 {
    (-(delta / coherence_length).powi(2) * LN_2).exp()
}

/// Half-width of the region where the envelope stays above `threshold`.
pub fn envelope_half_width(coherence_length: f64, threshold: f64) -> f64 {
    coherence_length * ((1.0 / threshold).ln() / LN_2).sqrt()
}

/// `R(δ) = R0 [1 + envelope(δ) V(α) cos(±2πδ/λ - arg α)]`.
pub fn ideal_scan(cfg: &ScanConfig) -> Result<ScanResult> {
    cfg.validate()?;
    let visibility = visibility_distinguishability(cfg.alpha).visibility;
    let beta = cfg.alpha.arg();
    let sign = cfg.scan_type.phase_sign();
    let delays = cfg.delays_um();
    let ideal = delays
        .iter()
        .map(|&d| {
            let phase = sign * phase_from_delay(d * NM_PER_UM, cfg.wavelength_nm) - beta;
            let fringe = envelope(d, cfg.coherence_length_um) * visibility * phase.cos();
            (cfg.baseline_rate_hz * (1.0 + fringe)).max(0.0)
        })
        .collect();
    Ok(ScanResult {
        delays_um: delays,
        ideal_rate_hz: ideal,
        counts: None,
        fit: None,
        wavelength_nm: cfg.wavelength_nm,
        coherence_length_um: cfg.coherence_length_um,
    })
}

fn splitmix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed of the generator used for scan point `k`.
pub fn substream_seed(seed: u64, k: u64) -> u64 {
    splitmix64(seed.wrapping_add((k + 1).wrapping_mul(0x9E37_79B9_7F4A_7C15)))
}

pub fn poisson_sample(mean: f64, seed: u64) -> u64 {
    if mean <= 0.0 {
        return 0;
    }
    let mut rng = Pcg64::seed_from_u64(seed);
    let dist = Poisson::new(mean).expect("positive finite mean");
    dist.sample(&mut rng) as u64
}

/// Draws `counts[k] ~ Poisson(bin · (ideal[k] + accidentals))`.
pub fn simulate_counts(sr: &ScanResult, cc: &CountingConfig) -> Result<ScanResult> {
    cc.validate()?;
    let counts = sr
        .ideal_rate_hz
        .par_iter()
        .enumerate()
        .map(|(k, rate)| {
            let mean = cc.bin_seconds * (rate + cc.accidentals_hz);
            poisson_sample(mean, substream_seed(cc.seed, k as u64))
        })
        .collect();
    Ok(ScanResult {
        counts: Some(counts),
        fit: None,
        ..sr.clone()
    })
}

/// Fits the simulated counts near zero delay, where the envelope is at
/// least [`FIT_ENVELOPE_THRESHOLD`].
pub fn estimate_visibility(sr: &ScanResult, wavelength_nm: f64) -> Result<VisibilityFit> {
    let counts = sr.counts.as_ref().ok_or(Error::MissingCounts)?;
    let values: Vec<f64> = counts.iter().map(|&c| c as f64).collect();
    let half = envelope_half_width(sr.coherence_length_um, FIT_ENVELOPE_THRESHOLD);
    fit_visibility(&sr.delays_um, &values, wavelength_nm, (-half, half))
}

/// Weighted least-squares fit of `A [1 + V cos(2πδ/λ + ψ)]` to the points
/// with delay inside `window_um`.
///
/// The model is linear in `(A, B, C)` for `A + B cos kδ + C sin kδ`. A first
/// unweighted pass provides variances `~ max(model, 1)` for a second,
/// Poisson-weighted pass; the covariance is scaled by the reduced χ².
/// `V = √(B²+C²)/A` is clamped to `[0, 1]` and its standard error comes
/// from first-order propagation.
pub fn fit_visibility(
    delays_um: &[f64],
    values: &[f64],
    wavelength_nm: f64,
    window_um: (f64, f64),
) -> Result<VisibilityFit> {
    let (lo, hi) = window_um;
    let selected: Vec<(f64, f64)> = delays_um
        .iter()
        .zip(values)
        .filter(|(d, _)| **d >= lo && **d <= hi)
        .map(|(d, v)| (*d, *v))
        .collect();
    let span_nm = match (selected.first(), selected.last()) {
        (Some(a), Some(b)) => (b.0 - a.0) * NM_PER_UM,
        _ => 0.0,
    };
    let periods = span_nm / wavelength_nm;
    if periods < 2.0 || selected.len() < 4 {
        return Err(Error::InsufficientFringes { periods });
    }

    let k = TAU * NM_PER_UM / wavelength_nm;
    let design: Vec<[f64; 3]> = selected
        .iter()
        .map(|(d, _)| [1.0, (k * d).cos(), (k * d).sin()])
        .collect();
    let ys: Vec<f64> = selected.iter().map(|(_, v)| *v).collect();

    let unit = vec![1.0; ys.len()];
    let first = weighted_solve(&design, &ys, &unit)?;
    let weights: Vec<f64> = design
        .iter()
        .map(|x| 1.0 / dot(x, &first.coef).max(1.0))
        .collect();
    let fit = weighted_solve(&design, &ys, &weights)?;

    let [a, b, c] = fit.coef;
    let dof = (ys.len() - 3) as f64;
    let chi2: f64 = design
        .iter()
        .zip(&ys)
        .zip(&weights)
        .map(|((x, y), w)| w * (y - dot(x, &fit.coef)).powi(2))
        .sum();
    let scale = chi2 / dof;

    let m = b.hypot(c);
    let raw_v = if a > 0.0 { m / a } else { 0.0 };
    let grad = if m > 0.0 && a > 0.0 {
        [-raw_v / a, b / (a * m), c / (a * m)]
    } else {
        [0.0, 1.0 / a.abs().max(f64::MIN_POSITIVE), 0.0]
    };
    let mut var = 0.0;
    for i in 0..3 {
        for j in 0..3 {
            var += grad[i] * fit.inverse[i][j] * grad[j];
        }
    }
    Ok(VisibilityFit {
        visibility: raw_v.clamp(0.0, 1.0),
        stderr: (var * scale).max(0.0).sqrt(),
        mean: a,
        phase: (-c).atan2(b),
        window_um: (
            lo.max(selected[0].0),
            hi.min(selected[selected.len() - 1].0),
        ),
    })
}

struct Solved {
    coef: [f64; 3],
    inverse: [[f64; 3]; 3],
}

fn dot(x: &[f64; 3], y: &[f64; 3]) -> f64 {
    x[0] * y[0] + x[1] * y[1] + x[2] * y[2]
}

fn weighted_solve(design: &[[f64; 3]], ys: &[f64], weights: &[f64]) -> Result<Solved> {
    let mut normal = [[0.0; 3]; 3];
    let mut rhs = [0.0; 3];
    for ((x, y), w) in design.iter().zip(ys).zip(weights) {
        for i in 0..3 {
            rhs[i] += w * x[i] * y;
            for j in 0..3 {
                normal[i][j] += w * x[i] * x[j];
            }
        }
    }
    let inverse = invert3(&normal).ok_or(Error::SingularFit)?;
    let mut coef = [0.0; 3];
    for i in 0..3 {
        coef[i] = dot(&inverse[i], &rhs);
    }
    Ok(Solved { coef, inverse })
}

fn invert3(m: &[[f64; 3]; 3]) -> Option<[[f64; 3]; 3]> {
    let cof =
        |r0: usize, r1: usize, c0: usize, c1: usize| m[r0][c0] * m[r1][c1] - m[r0][c1] * m[r1][c0];
    let adj = [
        [cof(1, 2, 1, 2), -cof(0, 2, 1, 2), cof(0, 1, 1, 2)],
        [-cof(1, 2, 0, 2), cof(0, 2, 0, 2), -cof(0, 1, 0, 2)],
        [cof(1, 2, 0, 1), -cof(0, 2, 0, 1), cof(0, 1, 0, 1)],
    ];
    let det = m[0][0] * adj[0][0] + m[0][1] * adj[1][0] + m[0][2] * adj[2][0];
    let scale = m.iter().flatten().fold(0.0f64, |acc, v| acc.max(v.abs()));
    if !det.is_finite() || det.abs() <= 1e-14 * scale.powi(3) {
        return None;
    }
    Some(adj.map(|row| row.map(|v| v / det)))
}

/// Spatial frequency (cycles per μm) of the strongest nonzero DFT bin of
/// `values` sampled on a uniform delay grid, with the frequency resolution.
pub fn dominant_fringe_frequency(delays_um: &[f64], values: &[f64]) -> (f64, f64) {
    let n = values.len();
    let span = (delays_um[n - 1] - delays_um[0]) * n as f64 / (n - 1) as f64;
    let mean = values.iter().sum::<f64>() / n as f64;
    let best = (1..n / 2)
        .map(|bin| {
            let (mut re, mut im) = (0.0, 0.0);
            for (j, v) in values.iter().enumerate() {
                let arg = -2.0 * PI * (bin * j) as f64 / n as f64;
                re += (v - mean) * arg.cos();
                im += (v - mean) * arg.sin();
            }
            (bin, re * re + im * im)
        })
        .fold(
            (0, -1.0),
            |best, cur| if cur.1 > best.1 { cur } else { best },
        );
    (best.0 as f64 / span, 1.0 / span)
}

/// CSV with `#` metadata lines, header `delay_um,ideal_rate_hz,counts` and
/// one row per point. The counts column is empty when no counts were simulated.
pub fn write_csv<W: Write + ?Sized>(
    sr: &ScanResult,
    metadata: &[(String, String)],
    out: &mut W,
) -> io::Result<()> {
    for (key, value) in metadata {
        writeln!(out, "# {key}={value}")?;
    }
    if let Some(fit) = sr.fit {
        writeln!(out, "# fitted_v={} stderr={}", fit.visibility, fit.stderr)?;
    }
    writeln!(out, "delay_um,ideal_rate_hz,counts")?;
    for (k, (d, r)) in sr.delays_um.iter().zip(&sr.ideal_rate_hz).enumerate() {
        match &sr.counts {
            Some(counts) => writeln!(out, "{d},{r},{}", counts[k])?,
            None => writeln!(out, "{d},{r},")?,
        }
    }
    Ok(())
}
