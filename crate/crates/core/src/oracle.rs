//! Truncated number-state representation used to check the symbolic algebra.
//!
//! Nothing here goes through normal ordering: operators are dense
//! single-mode matrices applied one at a time to a state vector over the
//! tensor-product basis, so agreement with [`crate::algebra`] is an
//! independent check.

use num_complex::Complex64;

use crate::algebra::{LadderKind, LadderOp, ModeId, OperatorPoly};
use crate::error::{Error, Result};

pub const DEFAULT_CUTOFF: usize = 4;

/// Dense matrix of one ladder operator in the basis `|0⟩..|cutoff⟩`, row-major.
/// `a†|cutoff⟩` is truncated to zero.
pub fn ladder_matrix(kind: LadderKind, cutoff: usize) -> Vec<Vec<Complex64>> {
    let dim = cutoff + 1;
    let mut m = vec![vec![Complex64::new(0.0, 0.0); dim]; dim];
    for n in 0..dim {
        match kind {
            LadderKind::Annihilate if n > 0 => m[n - 1][n] = Complex64::new((n as f64).sqrt(), 0.0),
            LadderKind::Create if n < cutoff => {
                m[n + 1][n] = Complex64::new(((n + 1) as f64).sqrt(), 0.0)
            }
            _ => {}
        }
    }
    m
}

/// Multimode Fock space truncated at `cutoff` photons per mode.
#[derive(Clone, Debug, PartialEq)]
pub struct FockOracle {
    cutoff: usize,
    modes: Vec<ModeId>,
}

impl FockOracle {
    pub fn new(modes: Vec<ModeId>, cutoff: usize) -> Result<Self> {
        if cutoff < 1 {
            return Err(Error::InvalidBasis("cutoff must be at least 1".into()));
        }
        if modes.is_empty() {
            return Err(Error::InvalidBasis("no modes".into()));
        }
        for (k, m) in modes.iter().enumerate() {
            if modes[..k].contains(m) {
                return Err(Error::InvalidBasis(format!("mode {m} listed twice")));
            }
        }
        Ok(FockOracle { cutoff, modes })
    }

    pub fn with_default_cutoff(modes: Vec<ModeId>) -> Result<Self> {
        FockOracle::new(modes, DEFAULT_CUTOFF)
    }

    /// Oracle over the modes of `p` whose cutoff covers every word's
    /// per-mode degree (and is never below the default).
    pub fn covering(p: &OperatorPoly) -> Result<Self> {
        let modes: Vec<ModeId> = p.modes().into_iter().collect();
        let needed = modes
            .iter()
            .map(|m| p.max_mode_degree(m))
            .max()
            .unwrap_or(0);
        let modes = if modes.is_empty() {
            vec![ModeId::new("vac")?]
        } else {
            modes
        };
        FockOracle::new(modes, needed.max(DEFAULT_CUTOFF))
    }

    pub fn cutoff(&self) -> usize {
        self.cutoff
    }

    pub fn modes(&self) -> &[ModeId] {
        &self.modes
    }

    pub fn dimension(&self) -> usize {
        (self.cutoff + 1).pow(self.modes.len() as u32)
    }

    pub fn vacuum(&self) -> FockState {
        self.basis_state(&vec![0; self.modes.len()])
            .expect("vacuum occupations are always in range")
    }

    /// `|n_1 n_2 ...⟩` with occupations listed in mode order.
    pub fn basis_state(&self, occupations: &[usize]) -> Result<FockState> {
        let mut state = FockState::zero(self.clone());
        let idx = state.index_of(occupations)?;
        state.amps[idx] = Complex64::new(1.0, 0.0);
        Ok(state)
    }

    /// `⟨0…0|p|0…0⟩` by explicit matrix products. Refuses when some word
    /// would climb past the cutoff in a mode, where the truncated matrices
    /// stop being exact.
    pub fn expectation(&self, p: &OperatorPoly) -> Result<Complex64> {
        let vac = self.vacuum();
        Ok(vac.inner(&vac.apply(p)?))
    }

    fn axis(&self, mode: &ModeId) -> Result<usize> {
        self.modes
            .iter()
            .position(|m| m == mode)
            .ok_or_else(|| Error::UnknownMode(mode.to_string()))
    }
}

/// `oracle_expectation` under its operational name.
pub fn oracle_expectation(p: &OperatorPoly, oracle: &FockOracle) -> Result<Complex64> {
    oracle.expectation(p)
}

/// State vector over a [`FockOracle`] basis. Mode 0 is the most significant
/// digit of the basis index.
#[derive(Clone, Debug, PartialEq)]
pub struct FockState {
    basis: FockOracle,
    amps: Vec<Complex64>,
}

impl FockState {
    pub fn zero(basis: FockOracle) -> Self {
        let dim = basis.dimension();
        FockState {
            basis,
            amps: vec![Complex64::new(0.0, 0.0); dim],
        }
    }

    pub fn basis(&self) -> &FockOracle {
        &self.basis
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    fn index_of(&self, occupations: &[usize]) -> Result<usize> {
        if occupations.len() != self.basis.modes.len() {
            return Err(Error::InvalidBasis(format!(
                "expected {} occupations, got {}",
                self.basis.modes.len(),
                occupations.len()
            )));
        }
        let base = self.basis.cutoff + 1;
        occupations.iter().try_fold(0, |idx, &n| {
            if n > self.basis.cutoff {
                Err(Error::InvalidBasis(format!(
                    "occupation {n} exceeds cutoff {}",
                    self.basis.cutoff
                )))
            } else {
                Ok(idx * base + n)
            }
        })
    }

    fn occupations_of(&self, mut idx: usize) -> Vec<usize> {
        let base = self.basis.cutoff + 1;
        let mut occ = vec![0; self.basis.modes.len()];
        for slot in occ.iter_mut().rev() {
            *slot = idx % base;
            idx /= base;
        }
        occ
    }

    pub fn amplitude(&self, occupations: &[usize]) -> Result<Complex64> {
        Ok(self.amps[self.index_of(occupations)?])
    }

    pub fn set_amplitude(&mut self, occupations: &[usize], value: Complex64) -> Result<()> {
        let idx = self.index_of(occupations)?;
        self.amps[idx] = value;
        Ok(())
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &FockState) -> Complex64 {
        self.amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    /// Amplitude of the all-zero basis state.
    pub fn vacuum_amplitude(&self) -> Complex64 {
        self.amps[0]
    }

    fn max_occupation(&self, axis: usize) -> usize {
        self.amps
            .iter()
            .enumerate()
            .filter(|(_, a)| a.norm_sqr() > 0.0)
            .map(|(idx, _)| self.occupations_of(idx)[axis])
            .max()
            .unwrap_or(0)
    }

    /// `p|self⟩`. Refuses when a word could push some mode past the cutoff,
    /// where truncation would make the result wrong.
    pub fn apply(&self, p: &OperatorPoly) -> Result<FockState> {
        for mode in p.modes() {
            let axis = self.basis.axis(&mode)?;
            let reach = self.max_occupation(axis) + p.max_ladder_climb(&mode);
            if reach > self.basis.cutoff {
                return Err(Error::CutoffTooSmall {
                    mode: mode.to_string(),
                    degree: reach,
                    cutoff: self.basis.cutoff,
                });
            }
        }
        Ok(self.apply_unchecked(p))
    }

    fn apply_unchecked(&self, p: &OperatorPoly) -> FockState {
        let mut out = FockState::zero(self.basis.clone());
        let annihilate = ladder_matrix(LadderKind::Annihilate, self.basis.cutoff);
        let create = ladder_matrix(LadderKind::Create, self.basis.cutoff);
        for (word, _, coeff) in p.terms() {
            let mut psi = self.clone();
            for op in word.ops().iter().rev() {
                let matrix = match op.kind {
                    LadderKind::Annihilate => &annihilate,
                    LadderKind::Create => &create,
                };
                psi = psi.apply_single(op, matrix);
            }
            for (o, a) in out.amps.iter_mut().zip(&psi.amps) {
                *o += coeff * a;
            }
        }
        out
    }

    fn apply_single(&self, op: &LadderOp, matrix: &[Vec<Complex64>]) -> FockState {
        let axis = self
            .basis
            .axis(&op.mode)
            .expect("modes were validated before application");
        let dim = self.basis.cutoff + 1;
        let stride = dim.pow((self.basis.modes.len() - 1 - axis) as u32);
        let mut out = vec![Complex64::new(0.0, 0.0); self.amps.len()];
        for outer in 0..self.amps.len() / (dim * stride) {
            for inner in 0..stride {
                let base = outer * dim * stride + inner;
                for (row, coeffs) in matrix.iter().enumerate() {
                    out[base + row * stride] = coeffs
                        .iter()
                        .enumerate()
                        .map(|(col, m)| m * self.amps[base + col * stride])
                        .sum();
                }
            }
        }
        FockState {
            basis: self.basis.clone(),
            amps: out,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mode(label: &str) -> ModeId {
        ModeId::new(label).unwrap()
    }

    #[test]
    fn single_mode_matrices() {
        let a = ladder_matrix(LadderKind::Annihilate, 3);
        let ad = ladder_matrix(LadderKind::Create, 3);
        assert_eq!(a[1][2], Complex64::new(2f64.sqrt(), 0.0));
        assert_eq!(ad[2][1], Complex64::new(2f64.sqrt(), 0.0));
        // truncation at the top of the ladder
        assert!(ad.iter().all(|row| row[3] == Complex64::new(0.0, 0.0)));
    }

    #[test]
    fn oracle_basic_expectations() {
        let s = mode("s");
        let oracle = FockOracle::new(vec![s.clone()], 3).unwrap();
        let a = OperatorPoly::annihilate(&s);
        let ad = OperatorPoly::create(&s);
        assert_eq!(
            oracle.expectation(&(&a * &ad)).unwrap(),
            Complex64::new(1.0, 0.0)
        );
        assert_eq!(
            oracle.expectation(&(&ad * &ad * &a * &a)).unwrap(),
            Complex64::new(0.0, 0.0)
        );
        assert_eq!(
            oracle.expectation(&OperatorPoly::identity()).unwrap(),
            Complex64::new(1.0, 0.0)
        );
    }

    #[test]
    fn refuses_insufficient_cutoff() {
        let s = mode("s");
        let oracle = FockOracle::new(vec![s.clone()], 1).unwrap();
        let a = OperatorPoly::annihilate(&s);
        let ad = OperatorPoly::create(&s);
        assert_eq!(
            oracle.expectation(&(&a * &ad * &a * &ad)).unwrap(),
            Complex64::new(1.0, 0.0)
        );
        let err = oracle.expectation(&(&a * &a * &ad * &ad)).unwrap_err();
        assert!(matches!(
            err,
            Error::CutoffTooSmall {
                degree: 2,
                cutoff: 1,
                ..
            }
        ));
        let err = oracle
            .expectation(&OperatorPoly::annihilate(&mode("x")))
            .unwrap_err();
        assert!(matches!(err, Error::UnknownMode(_)));
    }

    #[test]
    fn rejects_bad_bases() {
        assert!(FockOracle::new(vec![mode("s")], 0).is_err());
        assert!(FockOracle::new(vec![], 2).is_err());
        assert!(FockOracle::new(vec![mode("s"), mode("s")], 2).is_err());
    }

    #[test]
    fn apply_creates_number_states() {
        let (s, i) = (mode("s"), mode("i"));
        let oracle = FockOracle::new(vec![s.clone(), i.clone()], 2).unwrap();
        let pair = OperatorPoly::create(&s) * OperatorPoly::create(&i);
        let psi = oracle.vacuum().apply(&pair).unwrap();
        assert_eq!(psi.amplitude(&[1, 1]).unwrap(), Complex64::new(1.0, 0.0));
        assert!((psi.norm_sqr() - 1.0).abs() < 1e-15);

        let twice = psi.apply(&OperatorPoly::create(&s)).unwrap();
        assert!((twice.amplitude(&[2, 1]).unwrap().re - 2f64.sqrt()).abs() < 1e-15);
        assert!(twice.apply(&OperatorPoly::create(&s)).is_err());
    }

    #[test]
    fn adjoint_matches_matrix_adjoint() {
        // ⟨adjoint(p)ψ|φ⟩ = ⟨ψ|pφ⟩ for p = D a†_i0
        let i0 = mode("i0");
        let oracle = FockOracle::new(vec![i0.clone()], 3).unwrap();
        let d = Complex64::new(0.1, -0.3);
        let p = OperatorPoly::create(&i0).scale_gain(d, crate::algebra::GainDegree::D);
        let psi = oracle.basis_state(&[1]).unwrap();
        let phi = oracle.basis_state(&[0]).unwrap();
        let lhs = psi.apply(&p.adjoint()).unwrap().inner(&phi);
        let rhs = psi.inner(&phi.apply(&p).unwrap());
        assert!((lhs - rhs).norm() < 1e-15);
        assert!(rhs.norm() > 0.0);
    }
}
