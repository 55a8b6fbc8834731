use std::cell::Cell;
use std::collections::{BTreeMap, BTreeSet, HashMap};

use num_complex::Complex64;

use super::poly::accumulate;
use super::{GainDegree, LadderKind, LadderOp, ModeId, OperatorPoly};

thread_local! {
    static COMMUTATOR: Cell<f64> = const { Cell::new(1.0) };
}

/// Runs `f` with the same-mode commutator `[a, a†]` replaced by `value` on
/// the current thread. Only meant for exercising the verification harness;
/// any value other than 1 produces wrong physics.
pub fn with_commutator<R>(value: f64, f: impl FnOnce() -> R) -> R {
    struct Restore(f64);
    impl Drop for Restore {
        fn drop(&mut self) {
            COMMUTATOR.with(|c| c.set(self.0));
        }
    }
    let _restore = Restore(COMMUTATOR.with(|c| c.replace(value)));
    f()
}

fn first_inversion(codes: &[u32]) -> Option<usize> {
    codes.windows(2).position(|w| w[0] > w[1])
}

/// Rewrites `p` into canonical normal order.
///
/// Works through a stack of pending words. Each step swaps the first adjacent
/// out-of-order pair; when the pair is `a a†` on the same mode the swap also
/// emits the shorter word with both removed, weighted by the commutator. The
/// pair (word length, inversion count) strictly decreases, so this terminates.
///
/// Operators are interned as `2 * rank(mode) + kind` while rewriting, which
/// sorts exactly like [`LadderOp`].
pub fn normal_order(p: &OperatorPoly) -> OperatorPoly {
    let commutator = Complex64::new(COMMUTATOR.with(Cell::get), 0.0);
    let modes: Vec<ModeId> = p.modes().into_iter().collect();

    let mut out: HashMap<(Vec<u32>, GainDegree), Complex64> = HashMap::new();
    let mut pending: Vec<(Vec<u32>, GainDegree, Complex64)> = p
        .raw_terms()
        .iter()
        .map(|((w, d), c)| {
            (
                w.ops().iter().map(|op| encode(&modes, op)).collect(),
                *d,
                *c,
            )
        })
        .collect();

    while let Some((mut codes, degree, coeff)) = pending.pop() {
        match first_inversion(&codes) {
            None => *out.entry((codes, degree)).or_default() += coeff,
            Some(k) => {
                if codes[k] >> 1 == codes[k + 1] >> 1 {
                    // Only `a a†` can be inverted within a mode.
                    let mut contracted = Vec::with_capacity(codes.len() - 2);
                    contracted.extend_from_slice(&codes[..k]);
                    contracted.extend_from_slice(&codes[k + 2..]);
                    pending.push((contracted, degree, coeff * commutator));
                }
                codes.swap(k, k + 1);
                pending.push((codes, degree, coeff));
            }
        }
    }

    let decode = |code: &u32| LadderOp {
        mode: modes[(code >> 1) as usize].clone(),
        kind: if code & 1 == 0 {
            LadderKind::Create
        } else {
            LadderKind::Annihilate
        },
    };
    let mut terms = BTreeMap::new();
    for ((codes, degree), coeff) in out {
        accumulate(
            &mut terms,
            codes.iter().map(decode).collect(),
            degree,
            coeff,
        );
    }
    OperatorPoly::from_map(terms)
}

/// Normal-ordered commutator `pq - qp`.
pub fn commutator(p: &OperatorPoly, q: &OperatorPoly) -> OperatorPoly {
    normal_order(&(p * q - q * p))
}

/// `⟨vac|p|vac⟩` summed over all gain degrees.
pub fn vacuum_expectation(p: &OperatorPoly) -> Complex64 {
    vacuum_expectation_by_degree(p).values().sum()
}

/// `⟨vac|p|vac⟩` split by gain degree, for callers that keep one perturbative order.
///
/// Equal to the identity coefficient of [`normal_order`], but evaluated by
/// contracting each word directly.
pub fn vacuum_expectation_by_degree(p: &OperatorPoly) -> BTreeMap<GainDegree, Complex64> {
    vacuum_expectation_of_product(&[p])
}

/// `⟨vac|f_0 f_1 ... f_n|vac⟩` split by gain degree, without expanding the product.
pub fn vacuum_expectation_of_product(factors: &[&OperatorPoly]) -> BTreeMap<GainDegree, Complex64> {
    let commutator = COMMUTATOR.with(Cell::get);
    let modes: BTreeSet<ModeId> = factors.iter().flat_map(|f| f.modes()).collect();
    let modes: Vec<ModeId> = modes.into_iter().collect();
    let encoded: Vec<Vec<(Vec<u32>, GainDegree, Complex64)>> = factors
        .iter()
        .map(|f| {
            f.raw_terms()
                .iter()
                .map(|((w, d), c)| {
                    (
                        w.ops().iter().map(|op| encode(&modes, op)).collect(),
                        *d,
                        *c,
                    )
                })
                .collect()
        })
        .collect();

    let mut out = BTreeMap::new();
    let mut word = Vec::new();
    let mut choice = vec![0usize; factors.len()];
    if encoded.iter().any(Vec::is_empty) {
        return out;
    }
    loop {
        word.clear();
        let mut degree = GainDegree::ZERO;
        let mut coeff = Complex64::new(1.0, 0.0);
        for (terms, &k) in encoded.iter().zip(&choice) {
            let (codes, d, c) = &terms[k];
            word.extend_from_slice(codes);
            degree += *d;
            coeff *= c;
        }
        let value = contract(&word, commutator);
        if value != 0.0 {
            *out.entry(degree).or_insert(Complex64::new(0.0, 0.0)) += coeff * value;
        }
        // Odometer over one term per factor.
        let mut slot = factors.len();
        loop {
            if slot == 0 {
                return out;
            }
            slot -= 1;
            choice[slot] += 1;
            if choice[slot] < encoded[slot].len() {
                break;
            }
            choice[slot] = 0;
        }
    }
}

fn encode(modes: &[ModeId], op: &LadderOp) -> u32 {
    let rank = modes
        .binary_search(&op.mode)
        .expect("mode collected from operand") as u32;
    2 * rank + matches!(op.kind, LadderKind::Annihilate) as u32
}

/// Vacuum value of one encoded word: the rightmost creator is moved to the
/// left edge, picking up the commutator at every matching annihilator.
fn contract(codes: &[u32], commutator: f64) -> f64 {
    let Some((&last, rest)) = codes.split_last() else {
        return 1.0;
    };
    if codes.len() % 2 == 1 || last & 1 == 1 || codes[0] & 1 == 0 {
        return 0.0;
    }
    let partner = last | 1;
    let mut sum = 0.0;
    let mut reduced = Vec::with_capacity(rest.len() - 1);
    for (k, &code) in rest.iter().enumerate() {
        if code == partner {
            reduced.clear();
            reduced.extend_from_slice(&rest[..k]);
            reduced.extend_from_slice(&rest[k + 1..]);
            sum += contract(&reduced, commutator);
        }
    }
    commutator * sum
}
