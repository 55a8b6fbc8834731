//! Physical quantities of the two experiments, evaluated by three independent
//! routes:
//!
//! 1. Heisenberg picture: vacuum expectation values of products of detector
//!    fields, normal-ordered symbolically ([`coincidence_rate`]).
//! 2. Probability amplitudes: closed-form sum over the indistinguishable
//!    pathways ([`amplitude_method_rate`]).
//! 3. Perturbative state: first-order two-photon state in a truncated Fock
//!    basis, projected by the free detector fields ([`state_coincidence_rate`]).
//!
//! Rates carry the absolute scale of the fields (they include `|D|²`); use
//! [`RateResult::in_gain_units`] to express them relative to a reference gain.

use num_complex::Complex64;

use std::collections::BTreeMap;

use crate::algebra::{
    vacuum_expectation, vacuum_expectation_by_degree, vacuum_expectation_of_product, GainDegree,
    ModeId, OperatorPoly,
};
use crate::error::{Error, Result};
use crate::model::{
    field_component_split, two_crystal_detector_fields, BeamSplitter, CrystalParams, DetectorField,
    PathDelay, IDLER_1, IDLER_2, SIGNAL_1, SIGNAL_2,
};
use crate::oracle::{FockOracle, FockState};

/// Largest imaginary part (or negative excursion) tolerated in a rate before
/// it is treated as an algebra error.
pub const RESIDUE_TOLERANCE: f64 = 1e-12;

/// Total gain degree kept in coincidence rates: one `D` and one `D*`.
pub const LOWEST_ORDER: u32 = 2;

/// Operator ordering of the quartic coincidence correlator.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CorrelatorOrder {
    /// `⟨E_A^(-) E_B^(-) E_B^(+) E_A^(+)⟩`
    AOuter,
    /// `⟨E_B^(-) E_A^(-) E_A^(+) E_B^(+)⟩`, equal to the above because the
    /// positive-frequency fields commute.
    BOuter,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RateResult {
    value: f64,
    total_degree: u32,
    imaginary_residue: f64,
}

impl RateResult {
    pub fn value(&self) -> f64 {
        self.value
    }

    /// Gain degree kept when the rate was extracted.
    pub fn total_degree(&self) -> u32 {
        self.total_degree
    }

    pub fn imaginary_residue(&self) -> f64 {
        self.imaginary_residue
    }

    /// Rate divided by `|gain|²`.
    pub fn in_gain_units(&self, gain: Complex64) -> f64 {
        self.value / gain.norm_sqr()
    }
}

/// Keeps the total-degree-`total` part of a vacuum expectation value and
/// checks it is a real nonnegative number.
pub fn rate_from_correlator(correlator: &OperatorPoly, total: u32) -> Result<RateResult> {
    rate_from_vev(vacuum_expectation_by_degree(correlator), total)
}

fn rate_from_vev(by_degree: BTreeMap<GainDegree, Complex64>, total: u32) -> Result<RateResult> {
    let vev: Complex64 = by_degree
        .into_iter()
        .filter(|(d, _)| d.total() == total)
        .map(|(_, v)| v)
        .sum();
    if vev.im.abs() > RESIDUE_TOLERANCE {
        return Err(Error::NonHermitianResidue(vev.im));
    }
    if vev.re < -RESIDUE_TOLERANCE {
        return Err(Error::NegativeRate(vev.re));
    }
    Ok(RateResult {
        value: vev.re.max(0.0),
        total_degree: total,
        imaginary_residue: vev.im.abs(),
    })
}

/// The quartic correlator operator before taking its vacuum value.
pub fn coincidence_correlator(
    ea: &DetectorField,
    eb: &DetectorField,
    order: CorrelatorOrder,
) -> OperatorPoly {
    let (outer, inner) = match order {
        CorrelatorOrder::AOuter => (ea, eb),
        CorrelatorOrder::BOuter => (eb, ea),
    };
    let left = outer.negative_frequency() * inner.negative_frequency();
    let right = inner.expr() * outer.expr();
    left * right
}

/// Coincidence rate `⟨E_A^(-) E_B^(-) E_B^(+) E_A^(+)⟩` to lowest order in the gain.
pub fn coincidence_rate(ea: &DetectorField, eb: &DetectorField) -> Result<RateResult> {
    coincidence_rate_with(ea, eb, CorrelatorOrder::AOuter)
}

pub fn coincidence_rate_with(
    ea: &DetectorField,
    eb: &DetectorField,
    order: CorrelatorOrder,
) -> Result<RateResult> {
    let (outer, inner) = match order {
        CorrelatorOrder::AOuter => (ea, eb),
        CorrelatorOrder::BOuter => (eb, ea),
    };
    let (outer_minus, inner_minus) = (outer.negative_frequency(), inner.negative_frequency());
    let factors = [&outer_minus, &inner_minus, inner.expr(), outer.expr()];
    rate_from_vev(vacuum_expectation_of_product(&factors), LOWEST_ORDER)
}

/// `⟨E_B^(-) E_A^(+)⟩`, exact in the gain. Pass the same field twice for a
/// singles rate.
pub fn first_order_correlation(ea: &DetectorField, eb: &DetectorField) -> Complex64 {
    vacuum_expectation(&(eb.negative_frequency() * ea.expr()))
}

/// `|rt|² |C1 e^{iφ1} + C2 e^{iφ2}|²`: the two pair pathways (crystal 1 with
/// the signal delayed, crystal 2 with the idler delayed) added coherently.
pub fn amplitude_method_rate(
    c1: Complex64,
    c2: Complex64,
    phi1: f64,
    phi2: f64,
    r: Complex64,
    t: Complex64,
) -> f64 {
    let pathways = c1 * Complex64::from_polar(1.0, phi1) + c2 * Complex64::from_polar(1.0, phi2);
    (r * t).norm_sqr() * pathways.norm_sqr()
}

fn modes(labels: [&str; 4]) -> Vec<ModeId> {
    labels
        .iter()
        .map(|l| ModeId::new(l).expect("built-in labels are valid"))
        .collect()
}

/// First-order two-crystal state
/// `|vac⟩ + C1 |1_s1 1_i1⟩|0 0⟩ + C2 |0 0⟩|1_s2 1_i2⟩` over modes
/// `(s1, i1, s2, i2)`, unnormalized, with the overall pair scale set to 1.
pub fn perturbative_state(c1: Complex64, c2: Complex64) -> FockState {
    let state_scale = Complex64::new(1.0, 0.0);
    let basis = FockOracle::new(modes([SIGNAL_1, IDLER_1, SIGNAL_2, IDLER_2]), 1)
        .expect("four distinct modes, cutoff 1");
    let mut psi = basis.vacuum();
    psi.set_amplitude(&[1, 1, 0, 0], state_scale * c1)
        .and_then(|_| psi.set_amplitude(&[0, 0, 1, 1], state_scale * c2))
        .expect("occupations within cutoff");
    psi
}

/// `⟨vac| E_B E_A |ψ⟩` with the free (vacuum-part) detector fields, i.e. the
/// amplitude to annihilate one photon at each detector.
pub fn transition_amplitude(
    state: &FockState,
    ea: &DetectorField,
    eb: &DetectorField,
) -> Result<Complex64> {
    let (_, free_a) = field_component_split(ea);
    let (_, free_b) = field_component_split(eb);
    let projected = state.apply(&(free_b * free_a))?;
    Ok(projected.vacuum_amplitude())
}

pub fn state_coincidence_rate(
    state: &FockState,
    ea: &DetectorField,
    eb: &DetectorField,
) -> Result<f64> {
    Ok(transition_amplitude(state, ea, eb)?.norm_sqr())
}

pub const HOM_MODES: [&str; 4] = ["sA", "iA", "sB", "iB"];

/// First-order HOM state over pair modes `(sA, iA, sB, iB)`: vacuum
/// amplitude 1, `D t²` for the pair that is transmitted into the A arm and
/// `D r²` for the pair reflected into the B arm.
pub fn hom_perturbative_state(d: Complex64, r: Complex64, t: Complex64) -> FockState {
    let basis = FockOracle::new(modes(HOM_MODES), 1).expect("four distinct modes, cutoff 1");
    let mut psi = basis.vacuum();
    psi.set_amplitude(&[1, 1, 0, 0], d * t * t)
        .and_then(|_| psi.set_amplitude(&[0, 0, 1, 1], d * r * r))
        .expect("occupations within cutoff");
    psi
}

/// Coincidence rate implied by [`hom_perturbative_state`]: the two pair
/// amplitudes lead to the same A-B detection event and add before squaring.
pub fn hom_state_coincidence_rate(state: &FockState) -> Result<f64> {
    let [s_a, i_a, s_b, i_b] = HOM_MODES.map(|l| ModeId::new(l).expect("valid label"));
    let pair_a = OperatorPoly::annihilate(&s_a) * OperatorPoly::annihilate(&i_a);
    let pair_b = OperatorPoly::annihilate(&s_b) * OperatorPoly::annihilate(&i_b);
    let amplitude = state.apply(&(pair_a + pair_b))?.vacuum_amplitude();
    Ok(amplitude.norm_sqr())
}

/// Fringe visibility and which-path distinguishability for pump ratio
/// `alpha = C2/C1`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ComplementarityPair {
    pub visibility: f64,
    pub distinguishability: f64,
    pub alpha: Complex64,
}

impl ComplementarityPair {
    /// `K² + V²`, which is 1 for these pure-state configurations.
    pub fn sum_of_squares(&self) -> f64 {
        self.visibility.powi(2) + self.distinguishability.powi(2)
    }
}

pub fn visibility_distinguishability(alpha: Complex64) -> ComplementarityPair {
    let m = alpha.norm();
    let denom = 1.0 + m * m;
    ComplementarityPair {
        visibility: 2.0 * m / denom,
        distinguishability: (1.0 - m * m) / denom,
        alpha,
    }
}

/// Pump ratio magnitude `|alpha| ≤ 1` that yields visibility `v`.
pub fn alpha_for_visibility(v: f64) -> f64 {
    if v <= 0.0 {
        0.0
    } else {
        (1.0 - (1.0 - v * v).max(0.0).sqrt()) / v
    }
}

/// Two-crystal coincidence rate as a function of `θ = φ1 - φ2` (with `φ2 = 0`).
pub fn two_crystal_rate_at(
    gain: Complex64,
    alpha: Complex64,
    bs: &BeamSplitter,
    theta: f64,
) -> Result<f64> {
    let (c1, c2) = CrystalParams::two_identical(gain, alpha)?;
    let (ea, eb) =
        two_crystal_detector_fields(&c1, &c2, bs, bs, PathDelay::new(theta)?, PathDelay::zero())?;
    Ok(coincidence_rate(&ea, &eb)?.value())
}

/// Fringe visibility `(R_max - R_min)/(R_max + R_min)` read off a θ-scan of
/// the Heisenberg coincidence rate. The extrema are bracketed on a grid of
/// `grid_points` phases and then refined by golden-section search.
pub fn phase_scan_visibility(
    gain: Complex64,
    alpha: Complex64,
    bs: &BeamSplitter,
    grid_points: usize,
) -> Result<f64> {
    let rate = |theta: f64| two_crystal_rate_at(gain, alpha, bs, theta);
    let step = std::f64::consts::TAU / grid_points as f64;
    let samples = (0..grid_points)
        .map(|k| Ok((k as f64 * step, rate(k as f64 * step)?)))
        .collect::<Result<Vec<_>>>()?;
    let pick = |better: fn(f64, f64) -> bool| {
        samples.iter().copied().fold(
            samples[0],
            |best, cur| if better(cur.1, best.1) { cur } else { best },
        )
    };
    let (theta_max, _) = pick(|a, b| a > b);
    let (theta_min, _) = pick(|a, b| a < b);
    let max = golden_extremum(|t| rate(t).map(|r| -r), theta_max - step, theta_max + step)?.abs();
    let min = golden_extremum(rate, theta_min - step, theta_min + step)?;
    if max + min <= 0.0 {
        return Ok(0.0);
    }
    Ok((max - min) / (max + min))
}

/// Minimum value of a unimodal `f` on `[lo, hi]`.
fn golden_extremum(f: impl Fn(f64) -> Result<f64>, mut lo: f64, mut hi: f64) -> Result<f64> {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = hi - inv_phi * (hi - lo);
    let mut x2 = lo + inv_phi * (hi - lo);
    let (mut f1, mut f2) = (f(x1)?, f(x2)?);
    while hi - lo > 1e-6 {
        if f1 < f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - inv_phi * (hi - lo);
            f1 = f(x1)?;
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + inv_phi * (hi - lo);
            f2 = f(x2)?;
        }
    }
    Ok(f1.min(f2))
}

/// Single-crystal coincidence rate written as a correlation between the
/// down-converted signal field at A and the vacuum idler field at B.
pub fn vacuum_decomposition_rate(ea: &DetectorField, eb: &DetectorField) -> Result<RateResult> {
    let (generated_a, _) = field_component_split(ea);
    let (generated_b, vacuum_b) = field_component_split(eb);
    if generated_a.len() > 1 || generated_b.len() > 1 {
        return Err(Error::NotSingleCrystal);
    }
    let correlator = generated_a.adjoint() * vacuum_b.adjoint() * &vacuum_b * &generated_a;
    rate_from_correlator(&correlator, LOWEST_ORDER)
}

#[cfg(test)]
mod tests {
    use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2, PI};

    use super::*;
    use crate::model::{
        hom_detector_fields, two_crystal_detector_fields, BeamSplitter, CrystalParams, PathDelay,
    };

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn two_crystal(
        d: Complex64,
        alpha: Complex64,
        phi1: f64,
        phi2: f64,
    ) -> (DetectorField, DetectorField) {
        let (c1, c2) = CrystalParams::two_identical(d, alpha).unwrap();
        let bs = BeamSplitter::balanced();
        two_crystal_detector_fields(
            &c1,
            &c2,
            &bs,
            &bs,
            PathDelay::new(phi1).unwrap(),
            PathDelay::new(phi2).unwrap(),
        )
        .unwrap()
    }

    #[test]
    fn single_crystal_rate() {
        let d = c(0.1, 0.0);
        let (ea, eb) = two_crystal(d, c(0.0, 0.0), 0.4, 0.0);
        let rate = coincidence_rate(&ea, &eb).unwrap();
        // |D|² |rt|² = 0.01 * 0.25
        assert!((rate.value() - 2.5e-3).abs() < 1e-15);
        assert!((rate.in_gain_units(d) - 0.25).abs() < 1e-13);
        assert_eq!(rate.total_degree(), 2);
    }

    #[test]
    fn two_crystal_fringe() {
        let d = c(0.1, 0.0);
        for theta in [0.0, 0.5, FRAC_PI_2, 2.0, PI] {
            let (ea, eb) = two_crystal(d, c(1.0, 0.0), theta, 0.0);
            let expected = 2.0 * 0.01 * 0.25 * (1.0 + theta.cos());
            assert!((coincidence_rate(&ea, &eb).unwrap().value() - expected).abs() < 1e-15);
        }
    }

    #[test]
    fn orderings_agree() {
        let (ea, eb) = two_crystal(c(0.05, 0.02), c(0.3, -0.4), 1.1, -0.3);
        let a = coincidence_rate_with(&ea, &eb, CorrelatorOrder::AOuter).unwrap();
        let b = coincidence_rate_with(&ea, &eb, CorrelatorOrder::BOuter).unwrap();
        assert!((a.value() - b.value()).abs() < 1e-15);
    }

    #[test]
    fn hom_dip_at_balanced_splitter() {
        let cr = CrystalParams::single(c(0.1, 0.0)).unwrap();
        let (ea, eb) = hom_detector_fields(&cr, &BeamSplitter::balanced());
        assert!(coincidence_rate(&ea, &eb).unwrap().value() < 1e-15);
    }

    #[test]
    fn first_order_vanishes_and_singles_do_not() {
        let d = c(0.1, 0.0);
        for alpha in [c(0.0, 0.0), c(1.0, 0.0), c(0.3, 0.7)] {
            let (ea, eb) = two_crystal(d, alpha, 0.9, 0.2);
            assert_eq!(first_order_correlation(&ea, &eb), c(0.0, 0.0));
            let singles = first_order_correlation(&ea, &ea);
            let expected = d.norm_sqr() * (0.5 + 0.5 * alpha.norm_sqr());
            assert!((singles - expected).norm() < 1e-15);
        }
    }

    #[test]
    fn amplitude_formula() {
        let (r, t) = (c(0.0, FRAC_1_SQRT_2), c(FRAC_1_SQRT_2, 0.0));
        let one = c(1.0, 0.0);
        assert!((amplitude_method_rate(one, one, 0.3, 0.3, r, t) - 1.0).abs() < 1e-15);
        assert!(amplitude_method_rate(one, one, PI, 0.0, r, t) < 1e-30);
    }

    #[test]
    fn perturbative_state_components() {
        let psi = perturbative_state(c(0.7, 0.1), c(0.0, 0.0));
        let nonzero = psi.amplitudes().iter().filter(|a| a.norm() > 0.0).count();
        assert_eq!(nonzero, 2);

        // ⟨vac| a_s1 e^{iφ1} a_i1 |ψ⟩ = C1 e^{iφ1}
        let c1 = c(0.7, 0.1);
        let psi = perturbative_state(c1, c(0.2, 0.0));
        let [s1, i1] = [SIGNAL_1, IDLER_1].map(|l| ModeId::new(l).unwrap());
        let phi1 = 0.8;
        let op = (OperatorPoly::annihilate(&s1) * OperatorPoly::annihilate(&i1))
            .scale(Complex64::from_polar(1.0, phi1));
        let amp = psi.apply(&op).unwrap().vacuum_amplitude();
        assert!((amp - c1 * Complex64::from_polar(1.0, phi1)).norm() < 1e-15);
    }

    #[test]
    fn state_route_matches_amplitude_route() {
        let (c1, c2) = (c(1.0, 0.0), c(0.4, 0.3));
        let (ea, eb) = two_crystal(c(0.1, 0.0), c2, 0.6, 1.9);
        let bs = BeamSplitter::balanced();
        let state_rate = state_coincidence_rate(&perturbative_state(c1, c2), &ea, &eb).unwrap();
        let amp_rate = amplitude_method_rate(c1, c2, 0.6, 1.9, bs.r(), bs.t());
        assert!((state_rate - amp_rate).abs() < 1e-15);
    }

    #[test]
    fn hom_state() {
        let d = c(0.1, 0.0);
        let bs = BeamSplitter::balanced();
        let psi = hom_perturbative_state(d, bs.r(), bs.t());
        let a = psi.amplitude(&[1, 1, 0, 0]).unwrap();
        let b = psi.amplitude(&[0, 0, 1, 1]).unwrap();
        assert!((a + b).norm() < 1e-17);
        assert!((a - d * 0.5).norm() < 1e-17);
        assert!(hom_state_coincidence_rate(&psi).unwrap() < 1e-30);

        let psi = hom_perturbative_state(d, c(0.0, 0.0), c(1.0, 0.0));
        let nonzero: Vec<_> = psi.amplitudes().iter().filter(|a| a.norm() > 0.0).collect();
        assert_eq!(nonzero.len(), 2);
        assert_eq!(psi.amplitude(&[1, 1, 0, 0]).unwrap(), d);

        // r = 0.6, t = 0.8 e^{-iπ/2}: |r²+t²|²|D|² = 0.28² · 0.01
        let (r, t) = (c(0.6, 0.0), c(0.0, -0.8));
        let psi = hom_perturbative_state(d, r, t);
        let heis = {
            let cr = CrystalParams::single(d).unwrap();
            let (ea, eb) = hom_detector_fields(&cr, &BeamSplitter::new(r, t).unwrap());
            coincidence_rate(&ea, &eb).unwrap().value()
        };
        let state = hom_state_coincidence_rate(&psi).unwrap();
        assert!((heis - 0.0784 * 0.01).abs() < 1e-12);
        assert!((state - heis).abs() < 1e-12);
    }

    #[test]
    fn complementarity_values() {
        let p = visibility_distinguishability(c(1.0, 0.0));
        assert_eq!((p.visibility, p.distinguishability), (1.0, 0.0));
        let p = visibility_distinguishability(c(0.0, 0.0));
        assert_eq!((p.visibility, p.distinguishability), (0.0, 1.0));
        let p = visibility_distinguishability(Complex64::from_polar(0.5, 1.3));
        assert!((p.visibility - 0.8).abs() < 1e-15);
        assert!((p.distinguishability - 0.6).abs() < 1e-15);
        assert!((p.sum_of_squares() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn alpha_inversion() {
        for v in [0.0, 0.3, 0.94, 0.98, 1.0] {
            let a = alpha_for_visibility(v);
            let p = visibility_distinguishability(c(a, 0.0));
            assert!((p.visibility - v).abs() < 1e-12, "{v}");
        }
    }

    #[test]
    fn phase_scan_recovers_closed_form_visibility() {
        let bs = BeamSplitter::balanced();
        for alpha in [
            c(1.0, 0.0),
            Complex64::from_polar(0.5, 2.1),
            c(0.0, 0.0),
            c(-0.3, 0.1),
        ] {
            let v = phase_scan_visibility(c(0.1, 0.0), alpha, &bs, 24).unwrap();
            let expected = visibility_distinguishability(alpha).visibility;
            assert!((v - expected).abs() < 1e-9, "{alpha}: {v} vs {expected}");
        }
    }

    #[test]
    fn vacuum_decomposition() {
        let d = c(0.1, 0.0);
        let (ea, eb) = two_crystal(d, c(0.0, 0.0), 0.3, 0.0);
        let rate = vacuum_decomposition_rate(&ea, &eb).unwrap();
        assert!((rate.value() - 2.5e-3).abs() < 1e-15);

        let (ea, eb) = two_crystal(c(0.0, 0.0), c(0.0, 0.0), 0.3, 0.0);
        assert_eq!(vacuum_decomposition_rate(&ea, &eb).unwrap().value(), 0.0);

        let (ea, eb) = two_crystal(d, c(1.0, 0.0), 0.3, 0.0);
        assert_eq!(
            vacuum_decomposition_rate(&ea, &eb).unwrap_err(),
            Error::NotSingleCrystal
        );
    }

    #[test]
    fn residue_check_rejects_non_hermitian_correlators() {
        let s = ModeId::new("s").unwrap();
        let bad = (OperatorPoly::annihilate(&s) * OperatorPoly::create(&s))
            .scale_gain(c(0.0, 1.0), crate::algebra::GainDegree::new(1, 1));
        assert!(matches!(
            rate_from_correlator(&bad, 2),
            Err(Error::NonHermitianResidue(_))
        ));
        let neg = bad.scale(c(0.0, 1.0));
        assert!(matches!(
            rate_from_correlator(&neg, 2),
            Err(Error::NegativeRate(_))
        ));
    }
}
