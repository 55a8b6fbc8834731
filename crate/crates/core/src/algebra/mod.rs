//! Symbolic algebra of multimode bosonic ladder operators.
//!
//! An [`OperatorPoly`] is a complex-weighted sum of operator words. Each term
//! also carries a [`GainDegree`], the formal power of the parametric gain `D`
//! and of its conjugate that produced the coefficient, so that correlators can
//! be truncated at a fixed perturbative order after evaluation.
//!
//! Normal ordering rewrites every word with `[a, a†] = 1` inside a mode and
//! plain commutation across modes, producing a canonical form: modes sorted by
//! label, creators before annihilators within each mode. The vacuum
//! expectation value is the identity coefficient of that form.

mod normal;
mod poly;
mod text;

use std::fmt;
use std::ops::{Add, AddAssign, Mul};
use std::str::FromStr;
use std::sync::Arc;

use crate::error::{Error, Result};

pub use normal::{
    commutator, normal_order, vacuum_expectation, vacuum_expectation_by_degree,
    vacuum_expectation_of_product, with_commutator,
};
pub use poly::{OperatorPoly, PRUNE_TOLERANCE};

/// Label of a bosonic mode, e.g. `s1` or `i2`.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ModeId(Arc<str>);

impl ModeId {
    pub fn new(label: &str) -> Result<Self> {
        let valid = !label.is_empty()
            && !label
                .chars()
                .any(|c| c.is_whitespace() || c == '(' || c == ')' || c == ':');
        if valid {
            Ok(ModeId(Arc::from(label)))
        } else {
            Err(Error::InvalidMode(label.to_string()))
        }
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl FromStr for ModeId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ModeId::new(s)
    }
}

impl fmt::Display for ModeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl fmt::Debug for ModeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", &*self.0)
    }
}

/// Creators order before annihilators; the derived `Ord` relies on it.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum LadderKind {
    Create,
    Annihilate,
}

impl LadderKind {
    pub fn flip(self) -> Self {
        match self {
            LadderKind::Create => LadderKind::Annihilate,
            LadderKind::Annihilate => LadderKind::Create,
        }
    }
}

/// A single creation or annihilation operator on one mode.
///
/// The derived ordering (mode label first, then kind) is the canonical order
/// of normal-ordered words.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct LadderOp {
    pub mode: ModeId,
    pub kind: LadderKind,
}

impl LadderOp {
    pub fn create(mode: &ModeId) -> Self {
        LadderOp {
            mode: mode.clone(),
            kind: LadderKind::Create,
        }
    }

    pub fn annihilate(mode: &ModeId) -> Self {
        LadderOp {
            mode: mode.clone(),
            kind: LadderKind::Annihilate,
        }
    }

    pub fn adjoint(&self) -> Self {
        LadderOp {
            mode: self.mode.clone(),
            kind: self.kind.flip(),
        }
    }
}

impl fmt::Display for LadderOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            LadderKind::Create => write!(f, "ad({})", self.mode),
            LadderKind::Annihilate => write!(f, "a({})", self.mode),
        }
    }
}

impl fmt::Debug for LadderOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// Ordered product of ladder operators. The leftmost operator acts last on a
/// ket; the empty word is the identity.
#[derive(Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct OperatorWord(Vec<LadderOp>);

impl OperatorWord {
    pub fn identity() -> Self {
        OperatorWord(Vec::new())
    }

    pub fn new(ops: Vec<LadderOp>) -> Self {
        OperatorWord(ops)
    }

    pub fn ops(&self) -> &[LadderOp] {
        &self.0
    }

    pub fn into_ops(self) -> Vec<LadderOp> {
        self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn is_identity(&self) -> bool {
        self.0.is_empty()
    }

    pub fn adjoint(&self) -> Self {
        OperatorWord(self.0.iter().rev().map(LadderOp::adjoint).collect())
    }

    /// True when the word is already in canonical normal order.
    pub fn is_normal_ordered(&self) -> bool {
        self.0.windows(2).all(|w| w[0] <= w[1])
    }

    /// Number of operators (of either kind) acting on `mode`.
    pub fn mode_degree(&self, mode: &ModeId) -> usize {
        self.0.iter().filter(|op| &op.mode == mode).count()
    }

    /// Highest number of quanta the word can add to `mode` at any point while
    /// acting on a ket (operators applied right to left).
    pub fn ladder_climb(&self, mode: &ModeId) -> usize {
        let mut height: i64 = 0;
        let mut peak = 0;
        for op in self.0.iter().rev().filter(|op| &op.mode == mode) {
            height += match op.kind {
                LadderKind::Create => 1,
                LadderKind::Annihilate => -1,
            };
            peak = peak.max(height);
        }
        peak as usize
    }

    pub fn modes(&self) -> impl Iterator<Item = &ModeId> {
        self.0.iter().map(|op| &op.mode)
    }
}

impl Mul<&OperatorWord> for &OperatorWord {
    type Output = OperatorWord;

    fn mul(self, rhs: &OperatorWord) -> OperatorWord {
        let mut ops = Vec::with_capacity(self.len() + rhs.len());
        ops.extend_from_slice(&self.0);
        ops.extend_from_slice(&rhs.0);
        OperatorWord(ops)
    }
}

impl From<LadderOp> for OperatorWord {
    fn from(op: LadderOp) -> Self {
        OperatorWord(vec![op])
    }
}

impl FromIterator<LadderOp> for OperatorWord {
    fn from_iter<I: IntoIterator<Item = LadderOp>>(iter: I) -> Self {
        OperatorWord(iter.into_iter().collect())
    }
}

impl fmt::Display for OperatorWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return f.write_str("I");
        }
        for (k, op) in self.0.iter().enumerate() {
            if k > 0 {
                f.write_str(" ")?;
            }
            write!(f, "{op}")?;
        }
        Ok(())
    }
}

impl fmt::Debug for OperatorWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{self}]")
    }
}

/// Formal order of a coefficient in the gain `D` and its conjugate `D*`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct GainDegree {
    pub gain: u32,
    pub gain_conj: u32,
}

impl GainDegree {
    pub const ZERO: GainDegree = GainDegree {
        gain: 0,
        gain_conj: 0,
    };
    /// One factor of `D`.
    pub const D: GainDegree = GainDegree {
        gain: 1,
        gain_conj: 0,
    };

    pub const fn new(gain: u32, gain_conj: u32) -> Self {
        GainDegree { gain, gain_conj }
    }

    pub fn swapped(self) -> Self {
        GainDegree {
            gain: self.gain_conj,
            gain_conj: self.gain,
        }
    }

    pub fn total(self) -> u32 {
        self.gain + self.gain_conj
    }
}

impl Add for GainDegree {
    type Output = GainDegree;

    fn add(self, rhs: GainDegree) -> GainDegree {
        GainDegree {
            gain: self.gain + rhs.gain,
            gain_conj: self.gain_conj + rhs.gain_conj,
        }
    }
}

impl AddAssign for GainDegree {
    fn add_assign(&mut self, rhs: GainDegree) {
        *self = *self + rhs;
    }
}
