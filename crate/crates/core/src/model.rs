//! Detector field operators built from element-level transforms.
//!
//! A pumped crystal maps its input vacuum modes to first order in the gain:
//! the signal output is `a_s + D a_i†` and the idler output is `a_i + D a_s†`.
//! Beam splitters mix two fields linearly and path delays multiply by a phase.
//! The two constructors at the bottom chain these elements into the fields
//! seen by detectors A and B. Time-phase factors `e^{-iωt}` are left out;
//! they cancel in every equal-time correlator built from these fields.

use std::f64::consts::FRAC_1_SQRT_2;

use num_complex::Complex64;

use crate::algebra::{commutator, GainDegree, ModeId, OperatorPoly};
use crate::error::{Error, Result};

/// Default mode labels for the two-crystal interferometer.
pub const SIGNAL_1: &str = "s1";
pub const IDLER_1: &str = "i1";
pub const SIGNAL_2: &str = "s2";
pub const IDLER_2: &str = "i2";
/// Default mode labels for the single-crystal HOM setup.
pub const SIGNAL: &str = "s";
pub const IDLER: &str = "i";

/// One down-conversion crystal.
///
/// The field gain entering the operators is `gain * pump_amplitude`; with the
/// default unit pump amplitude it is just `gain`. Two identical crystals
/// pumped with amplitudes `C1`, `C2` therefore get gains in the ratio `C1/C2`.
#[derive(Clone, Debug, PartialEq)]
pub struct CrystalParams {
    gain: Complex64,
    pump_amplitude: Complex64,
    signal: ModeId,
    idler: ModeId,
}

impl CrystalParams {
    pub fn new(gain: Complex64, signal: ModeId, idler: ModeId) -> Result<Self> {
        CrystalParams {
            gain,
            pump_amplitude: Complex64::new(1.0, 0.0),
            signal,
            idler,
        }
        .validated()
    }

    pub fn with_pump_amplitude(mut self, pump_amplitude: Complex64) -> Result<Self> {
        self.pump_amplitude = pump_amplitude;
        self.validated()
    }

    fn validated(self) -> Result<Self> {
        let d = self.effective_gain().norm();
        if !(d < 1.0) {
            return Err(Error::GainOutOfRange(d));
        }
        if self.signal == self.idler {
            return Err(Error::ModeCollision(self.signal.to_string()));
        }
        Ok(self)
    }

    /// Crystal 1 (`s1`, `i1`) and crystal 2 (`s2`, `i2`) with gains `gain` and
    /// `alpha * gain`.
    pub fn two_identical(gain: Complex64, alpha: Complex64) -> Result<(Self, Self)> {
        let c1 = CrystalParams::new(gain, ModeId::new(SIGNAL_1)?, ModeId::new(IDLER_1)?)?;
        let c2 = CrystalParams::new(gain, ModeId::new(SIGNAL_2)?, ModeId::new(IDLER_2)?)?
            .with_pump_amplitude(alpha)?;
        Ok((c1, c2))
    }

    /// A single crystal on the modes `s`, `i`.
    pub fn single(gain: Complex64) -> Result<Self> {
        CrystalParams::new(gain, ModeId::new(SIGNAL)?, ModeId::new(IDLER)?)
    }

    pub fn gain(&self) -> Complex64 {
        self.gain
    }

    pub fn pump_amplitude(&self) -> Complex64 {
        self.pump_amplitude
    }

    pub fn effective_gain(&self) -> Complex64 {
        self.gain * self.pump_amplitude
    }

    pub fn signal_mode(&self) -> &ModeId {
        &self.signal
    }

    pub fn idler_mode(&self) -> &ModeId {
        &self.idler
    }

    fn shares_mode_with(&self, other: &CrystalParams) -> Option<&ModeId> {
        [&self.signal, &self.idler]
            .into_iter()
            .find(|m| **m == other.signal || **m == other.idler)
    }
}

/// First-order output fields `(a_s + D a_i†, a_i + D a_s†)`; the `D` terms
/// carry gain degree (1, 0).
pub fn spdc_output_fields(c: &CrystalParams) -> (OperatorPoly, OperatorPoly) {
    let d = c.effective_gain();
    let signal = OperatorPoly::annihilate(&c.signal)
        + OperatorPoly::create(&c.idler).scale_gain(d, GainDegree::D);
    let idler = OperatorPoly::annihilate(&c.idler)
        + OperatorPoly::create(&c.signal).scale_gain(d, GainDegree::D);
    (signal, idler)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BeamSplitter {
    r: Complex64,
    t: Complex64,
}

impl BeamSplitter {
    pub const UNITARITY_TOLERANCE: f64 = 1e-12;

    /// Lossless beam splitter with amplitude reflectance `r` and
    /// transmittance `t`: `|r|² + |t|² = 1` and `Re(r t*) = 0`.
    pub fn new(r: Complex64, t: Complex64) -> Result<Self> {
        BeamSplitter::with_tolerance(r, t, Self::UNITARITY_TOLERANCE)
    }

    pub fn with_tolerance(r: Complex64, t: Complex64, tol: f64) -> Result<Self> {
        let norm = r.norm_sqr() + t.norm_sqr();
        let cross = (r * t.conj()).re;
        if (norm - 1.0).abs() > tol || cross.abs() > tol || !norm.is_finite() {
            return Err(Error::NonUnitary { norm, cross });
        }
        Ok(BeamSplitter { r, t })
    }

    /// Symmetric convention `r = t e^{iπ/2}` with real `t = √T`.
    pub fn symmetric(transmittance: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&transmittance) {
            return Err(Error::NonUnitary {
                norm: f64::NAN,
                cross: f64::NAN,
            });
        }
        BeamSplitter::new(
            Complex64::new(0.0, (1.0 - transmittance).sqrt()),
            Complex64::new(transmittance.sqrt(), 0.0),
        )
    }

    /// 50:50 symmetric splitter, `t = 1/√2`, `r = i/√2`.
    pub fn balanced() -> Self {
        BeamSplitter {
            r: Complex64::new(0.0, FRAC_1_SQRT_2),
            t: Complex64::new(FRAC_1_SQRT_2, 0.0),
        }
    }

    pub fn r(&self) -> Complex64 {
        self.r
    }

    pub fn t(&self) -> Complex64 {
        self.t
    }
}

/// `(r·in1 + t·in2, t·in1 + r·in2)`.
pub fn apply_beamsplitter(
    in1: &OperatorPoly,
    in2: &OperatorPoly,
    bs: &BeamSplitter,
) -> (OperatorPoly, OperatorPoly) {
    let out1 = in1.scale(bs.r) + in2.scale(bs.t);
    let out2 = in1.scale(bs.t) + in2.scale(bs.r);
    (out1, out2)
}

/// Phase picked up along a delayed path, in radians. Never reduced mod 2π.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PathDelay(f64);

impl PathDelay {
    pub fn new(phase: f64) -> Result<Self> {
        if phase.is_finite() {
            Ok(PathDelay(phase))
        } else {
            Err(Error::NonFinitePhase(phase))
        }
    }

    pub fn zero() -> Self {
        PathDelay(0.0)
    }

    pub fn phase(&self) -> f64 {
        self.0
    }
}

pub fn apply_phase(f: &OperatorPoly, d: PathDelay) -> OperatorPoly {
    f.scale(Complex64::from_polar(1.0, d.0))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Detector {
    A,
    B,
}

/// Positive-frequency field at a detector, written in input-mode operators
/// and at most first order in the gain.
#[derive(Clone, Debug, PartialEq)]
pub struct DetectorField {
    expr: OperatorPoly,
    detector: Detector,
}

impl DetectorField {
    fn new(expr: OperatorPoly, detector: Detector) -> Self {
        debug_assert!(expr
            .degrees()
            .iter()
            .all(|d| d.total() <= 1 && d.gain_conj == 0));
        DetectorField { expr, detector }
    }

    pub fn expr(&self) -> &OperatorPoly {
        &self.expr
    }

    pub fn detector(&self) -> Detector {
        self.detector
    }

    /// Negative-frequency part, `E^(-) = (E^(+))†`.
    pub fn negative_frequency(&self) -> OperatorPoly {
        self.expr.adjoint()
    }
}

pub fn two_crystal_detector_fields(
    c1: &CrystalParams,
    c2: &CrystalParams,
    bs1: &BeamSplitter,
    bs2: &BeamSplitter,
    phi1: PathDelay,
    phi2: PathDelay,
) -> Result<(DetectorField, DetectorField)> {
    if let Some(m) = c1.shares_mode_with(c2) {
        return Err(Error::ModeCollision(m.to_string()));
    }
    let (signal1, idler1) = spdc_output_fields(c1);
    let (signal2, idler2) = spdc_output_fields(c2);
    let (at_a, _) = apply_beamsplitter(&apply_phase(&signal1, phi1), &signal2, bs1);
    let (_, at_b) = apply_beamsplitter(&idler1, &apply_phase(&idler2, phi2), bs2);
    Ok((
        DetectorField::new(at_a, Detector::A),
        DetectorField::new(at_b, Detector::B),
    ))
}

/// Signal and idler of one crystal meeting on one beam splitter after equal
/// path lengths.
pub fn hom_detector_fields(c: &CrystalParams, bs: &BeamSplitter) -> (DetectorField, DetectorField) {
    let (signal, idler) = spdc_output_fields(c);
    let (at_a, at_b) = apply_beamsplitter(&signal, &idler, bs);
    (
        DetectorField::new(at_a, Detector::A),
        DetectorField::new(at_b, Detector::B),
    )
}

/// Splits a field into its down-converted part (gain degree 1) and its
/// propagated vacuum part (gain degree 0).
pub fn field_component_split(f: &DetectorField) -> (OperatorPoly, OperatorPoly) {
    (
        f.expr.with_degree(GainDegree::D),
        f.expr.with_degree(GainDegree::ZERO),
    )
}

/// `[E_A^(+), E_B^(+)]` in normal order.
pub fn field_commutator(a: &DetectorField, b: &DetectorField) -> OperatorPoly {
    commutator(&a.expr, &b.expr)
}
