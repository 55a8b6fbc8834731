use std::collections::btree_map::Entry;
use std::collections::{BTreeMap, BTreeSet};
use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;

use super::{GainDegree, LadderOp, ModeId, OperatorWord};

/// Coefficients below this magnitude are dropped after every operation.
pub const PRUNE_TOLERANCE: f64 = 1e-14;

type TermKey = (OperatorWord, GainDegree);

/// Complex-weighted sum of operator words, each tagged with its gain degree.
///
/// Terms are kept in a `BTreeMap`, so iteration (and therefore the text
/// serialization) follows a fixed order: word first, then gain degree.
#[derive(Clone, Default, PartialEq)]
pub struct OperatorPoly {
    terms: BTreeMap<TermKey, Complex64>,
}

impl OperatorPoly {
    pub fn zero() -> Self {
        OperatorPoly::default()
    }

    pub fn identity() -> Self {
        OperatorPoly::scalar(Complex64::new(1.0, 0.0))
    }

    pub fn scalar(c: Complex64) -> Self {
        OperatorPoly::term(OperatorWord::identity(), GainDegree::ZERO, c)
    }

    pub fn op(op: LadderOp) -> Self {
        OperatorPoly::term(op.into(), GainDegree::ZERO, Complex64::new(1.0, 0.0))
    }

    pub fn annihilate(mode: &ModeId) -> Self {
        OperatorPoly::op(LadderOp::annihilate(mode))
    }

    pub fn create(mode: &ModeId) -> Self {
        OperatorPoly::op(LadderOp::create(mode))
    }

    pub fn term(word: OperatorWord, degree: GainDegree, coeff: Complex64) -> Self {
        OperatorPoly::from_terms([(word, degree, coeff)])
    }

    /// Sums the given terms, merging duplicates, then prunes.
    pub fn from_terms<I>(terms: I) -> Self
    where
        I: IntoIterator<Item = (OperatorWord, GainDegree, Complex64)>,
    {
        let mut map = BTreeMap::new();
        for (word, degree, coeff) in terms {
            accumulate(&mut map, word, degree, coeff);
        }
        OperatorPoly::from_map(map)
    }

    pub(crate) fn from_map(mut terms: BTreeMap<TermKey, Complex64>) -> Self {
        terms.retain(|_, c| c.norm() >= PRUNE_TOLERANCE);
        OperatorPoly { terms }
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&OperatorWord, GainDegree, Complex64)> {
        self.terms.iter().map(|((w, d), c)| (w, *d, *c))
    }

    pub fn coefficient(&self, word: &OperatorWord, degree: GainDegree) -> Complex64 {
        self.terms
            .get(&(word.clone(), degree))
            .copied()
            .unwrap_or_default()
    }

    /// Multiplies every coefficient by `c` without touching gain degrees.
    pub fn scale(&self, c: Complex64) -> Self {
        OperatorPoly::from_map(self.terms.iter().map(|(k, v)| (k.clone(), v * c)).collect())
    }

    /// Multiplies by a gain-carrying factor: coefficients by `c`, degrees by `degree`.
    pub fn scale_gain(&self, c: Complex64, degree: GainDegree) -> Self {
        OperatorPoly::from_map(
            self.terms
                .iter()
                .map(|((w, d), v)| ((w.clone(), *d + degree), v * c))
                .collect(),
        )
    }

    /// Hermitian conjugate: words reversed with kinds flipped, coefficients
    /// conjugated, gain degree swapped.
    pub fn adjoint(&self) -> Self {
        OperatorPoly::from_terms(
            self.terms
                .iter()
                .map(|((w, d), c)| (w.adjoint(), d.swapped(), c.conj())),
        )
    }

    /// Keeps only the terms whose degree satisfies `keep`.
    pub fn filter_degree(&self, mut keep: impl FnMut(GainDegree) -> bool) -> Self {
        OperatorPoly {
            terms: self
                .terms
                .iter()
                .filter(|((_, d), _)| keep(*d))
                .map(|(k, v)| (k.clone(), *v))
                .collect(),
        }
    }

    pub fn with_degree(&self, degree: GainDegree) -> Self {
        self.filter_degree(|d| d == degree)
    }

    pub fn with_total_degree(&self, total: u32) -> Self {
        self.filter_degree(|d| d.total() == total)
    }

    pub fn max_total_degree(&self) -> Option<u32> {
        self.terms.keys().map(|(_, d)| d.total()).max()
    }

    pub fn degrees(&self) -> BTreeSet<GainDegree> {
        self.terms.keys().map(|(_, d)| *d).collect()
    }

    pub fn modes(&self) -> BTreeSet<ModeId> {
        self.terms
            .keys()
            .flat_map(|(w, _)| w.modes().cloned())
            .collect()
    }

    /// Largest number of operators any single word places on `mode`.
    pub fn max_mode_degree(&self, mode: &ModeId) -> usize {
        self.terms
            .keys()
            .map(|(w, _)| w.mode_degree(mode))
            .max()
            .unwrap_or(0)
    }

    /// Largest [`OperatorWord::ladder_climb`] over all words.
    pub fn max_ladder_climb(&self, mode: &ModeId) -> usize {
        self.terms
            .keys()
            .map(|(w, _)| w.ladder_climb(mode))
            .max()
            .unwrap_or(0)
    }

    pub fn is_normal_ordered(&self) -> bool {
        self.terms.keys().all(|(w, _)| w.is_normal_ordered())
    }

    /// Largest coefficient magnitude of `self - other`; zero for equal polys.
    pub fn max_abs_difference(&self, other: &OperatorPoly) -> f64 {
        let mut keys: BTreeSet<&TermKey> = self.terms.keys().collect();
        keys.extend(other.terms.keys());
        keys.into_iter()
            .map(|k| {
                let a = self.terms.get(k).copied().unwrap_or_default();
                let b = other.terms.get(k).copied().unwrap_or_default();
                (a - b).norm()
            })
            .fold(0.0, f64::max)
    }

    pub(crate) fn raw_terms(&self) -> &BTreeMap<TermKey, Complex64> {
        &self.terms
    }
}

pub(crate) fn accumulate(
    map: &mut BTreeMap<TermKey, Complex64>,
    word: OperatorWord,
    degree: GainDegree,
    coeff: Complex64,
) {
    match map.entry((word, degree)) {
        Entry::Vacant(e) => {
            e.insert(coeff);
        }
        Entry::Occupied(mut e) => {
            *e.get_mut() += coeff;
        }
    }
}

impl std::fmt::Debug for OperatorPoly {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        let mut list = f.debug_list();
        for ((w, d), c) in &self.terms {
            list.entry(&format_args!("({c}) D^{} D*^{} {w}", d.gain, d.gain_conj));
        }
        list.finish()
    }
}

impl Add<&OperatorPoly> for &OperatorPoly {
    type Output = OperatorPoly;

    fn add(self, rhs: &OperatorPoly) -> OperatorPoly {
        let mut map = self.terms.clone();
        for ((w, d), c) in &rhs.terms {
            accumulate(&mut map, w.clone(), *d, *c);
        }
        OperatorPoly::from_map(map)
    }
}

impl Sub<&OperatorPoly> for &OperatorPoly {
    type Output = OperatorPoly;

    fn sub(self, rhs: &OperatorPoly) -> OperatorPoly {
        let mut map = self.terms.clone();
        for ((w, d), c) in &rhs.terms {
            accumulate(&mut map, w.clone(), *d, -c);
        }
        OperatorPoly::from_map(map)
    }
}

impl Mul<&OperatorPoly> for &OperatorPoly {
    type Output = OperatorPoly;

    fn mul(self, rhs: &OperatorPoly) -> OperatorPoly {
        let mut map = BTreeMap::new();
        for ((wl, dl), cl) in &self.terms {
            for ((wr, dr), cr) in &rhs.terms {
                accumulate(&mut map, wl * wr, *dl + *dr, cl * cr);
            }
        }
        OperatorPoly::from_map(map)
    }
}

impl Neg for &OperatorPoly {
    type Output = OperatorPoly;

    fn neg(self) -> OperatorPoly {
        self.scale(Complex64::new(-1.0, 0.0))
    }
}

macro_rules! forward_owned {
    ($($tr:ident :: $f:ident),*) => {$(
        impl $tr<OperatorPoly> for OperatorPoly {
            type Output = OperatorPoly;
            fn $f(self, rhs: OperatorPoly) -> OperatorPoly {
                (&self).$f(&rhs)
            }
        }
        impl $tr<&OperatorPoly> for OperatorPoly {
            type Output = OperatorPoly;
            fn $f(self, rhs: &OperatorPoly) -> OperatorPoly {
                (&self).$f(rhs)
            }
        }
        impl $tr<OperatorPoly> for &OperatorPoly {
            type Output = OperatorPoly;
            fn $f(self, rhs: OperatorPoly) -> OperatorPoly {
                self.$f(&rhs)
            }
        }
    )*};
}

forward_owned!(Add::add, Sub::sub, Mul::mul);

impl Neg for OperatorPoly {
    type Output = OperatorPoly;

    fn neg(self) -> OperatorPoly {
        -&self
    }
}

impl std::iter::Sum for OperatorPoly {
    fn sum<I: Iterator<Item = OperatorPoly>>(iter: I) -> Self {
        iter.fold(OperatorPoly::zero(), |acc, p| &acc + &p)
    }
}
