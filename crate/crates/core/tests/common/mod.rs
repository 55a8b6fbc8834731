//! Exact sparse Fock-space arithmetic, written without the crate's
//! normal-ordering code so it can serve as an independent oracle.

#![allow(dead_code)]

use std::collections::BTreeMap;

use num_complex::Complex64;
use spdc_vacuum::{LadderKind, OperatorPoly};

/// Occupation numbers by mode label; absent modes are empty.
pub type Occupations = BTreeMap<String, u32>;

#[derive(Clone, Debug, Default)]
pub struct SparseState(pub BTreeMap<Occupations, Complex64>);

impl SparseState {
    pub fn vacuum() -> Self {
        let mut s = SparseState::default();
        s.0.insert(Occupations::new(), Complex64::new(1.0, 0.0));
        s
    }

    pub fn basis(occ: &[(&str, u32)]) -> Self {
        let key: Occupations = occ
            .iter()
            .filter(|(_, n)| *n > 0)
            .map(|(m, n)| (m.to_string(), *n))
            .collect();
        let mut s = SparseState::default();
        s.0.insert(key, Complex64::new(1.0, 0.0));
        s
    }

    fn ladder(&self, mode: &str, create: bool) -> Self {
        let mut out = SparseState::default();
        for (occ, amp) in &self.0 {
            let n = occ.get(mode).copied().unwrap_or(0);
            let (factor, m) = if create {
                (((n + 1) as f64).sqrt(), n + 1)
            } else if n == 0 {
                continue;
            } else {
                ((n as f64).sqrt(), n - 1)
            };
            let mut next = occ.clone();
            if m == 0 {
                next.remove(mode);
            } else {
                next.insert(mode.to_string(), m);
            }
            *out.0.entry(next).or_default() += amp * factor;
        }
        out
    }

    /// `p |self⟩`, applying each word right to left.
    pub fn apply(&self, p: &OperatorPoly) -> Self {
        let mut out = SparseState::default();
        for (word, _, coeff) in p.terms() {
            let mut s = self.clone();
            for op in word.ops().iter().rev() {
                s = s.ladder(op.mode.as_str(), op.kind == LadderKind::Create);
            }
            for (occ, amp) in s.0 {
                *out.0.entry(occ).or_default() += amp * coeff;
            }
        }
        out
    }

    pub fn inner(&self, other: &SparseState) -> Complex64 {
        self.0
            .iter()
            .filter_map(|(occ, a)| other.0.get(occ).map(|b| a.conj() * b))
            .sum()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.0.values().map(|a| a.norm_sqr()).sum()
    }
}

/// Exact `⟨vac|p|vac⟩` summed over all gain degrees.
pub fn oracle_vev(p: &OperatorPoly) -> Complex64 {
    SparseState::vacuum().inner(&SparseState::vacuum().apply(p))
}

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}
