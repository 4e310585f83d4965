//! Words in the free group on `x_0 .. x_{n+1}`, Fox derivatives, and the
//! one-relator presentation.

use std::collections::btree_map::Entry;
use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::linalg::{prime_power_decompose, Matrix, RingModulus};

/// A freely reduced word stored as syllables `(generator, exponent)`.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Word {
    syllables: Vec<(usize, i64)>,
}

impl Word {
    pub fn identity() -> Self {
        Word::default()
    }

    pub fn generator(i: usize) -> Self {
        Word { syllables: vec![(i, 1)] }
    }

    pub fn power(i: usize, e: i64) -> Self {
        let mut w = Word::identity();
        w.push(i, e);
        w
    }

    /// Builds a word from letters `(generator, ±1)`, reducing as it goes.
    pub fn from_letters(letters: &[(usize, i64)]) -> Self {
        let mut w = Word::identity();
        for &(g, e) in letters {
            w.push(g, e);
        }
        w
    }

    /// `(x, y) = x^-1 y^-1 x y`.
    pub fn commutator(x: usize, y: usize) -> Self {
        Word::from_letters(&[(x, -1), (y, -1), (x, 1), (y, 1)])
    }

    /// Appends `x_g^e`, merging with the last syllable.
    pub fn push(&mut self, g: usize, e: i64) {
        if e == 0 {
            return;
        }
        match self.syllables.last_mut() {
            Some((last, exp)) if *last == g => {
                *exp += e;
                if *exp == 0 {
                    self.syllables.pop();
                }
            }
            _ => self.syllables.push((g, e)),
        }
    }

    pub fn syllables(&self) -> &[(usize, i64)] {
        &self.syllables
    }

    pub fn is_identity(&self) -> bool {
        self.syllables.is_empty()
    }

    /// Number of letters in the reduced word.
    pub fn len(&self) -> usize {
        self.syllables.iter().map(|&(_, e)| e.unsigned_abs() as usize).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.syllables.is_empty()
    }

    pub fn max_generator(&self) -> Option<usize> {
        self.syllables.iter().map(|&(g, _)| g).max()
    }

    pub fn mul(&self, other: &Word) -> Word {
        let mut w = self.clone();
        for &(g, e) in &other.syllables {
            w.push(g, e);
        }
        w
    }

    pub fn inverse(&self) -> Word {
        Word { syllables: self.syllables.iter().rev().map(|&(g, e)| (g, -e)).collect() }
    }

    /// Expands the word into single letters.
    pub fn letters(&self) -> Vec<(usize, i64)> {
        let mut out = Vec::with_capacity(self.len());
        for &(g, e) in &self.syllables {
            let sign = e.signum();
            out.extend(std::iter::repeat_n((g, sign), e.unsigned_abs() as usize));
        }
        out
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.syllables.is_empty() {
            return write!(f, "1");
        }
        let parts: Vec<String> =
            self.syllables.iter().map(|&(g, e)| if e == 1 { format!("x{g}") } else { format!("x{g}^{e}") }).collect();
        write!(f, "{}", parts.join(" "))
    }
}

/// An element of the integral group ring of the free group.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct GroupRingElt {
    terms: BTreeMap<Word, i64>,
}

impl GroupRingElt {
    pub fn zero() -> Self {
        GroupRingElt::default()
    }

    pub fn one() -> Self {
        GroupRingElt::from_word(Word::identity())
    }

    pub fn from_word(w: Word) -> Self {
        let mut e = GroupRingElt::zero();
        e.add_term(w, 1);
        e
    }

    pub fn add_term(&mut self, w: Word, c: i64) {
        if c == 0 {
            return;
        }
        match self.terms.entry(w) {
            Entry::Occupied(mut o) => {
                *o.get_mut() += c;
                if *o.get() == 0 {
                    o.remove();
                }
            }
            Entry::Vacant(v) => {
                v.insert(c);
            }
        }
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Word, i64)> {
        self.terms.iter().map(|(w, &c)| (w, c))
    }

    pub fn coefficient(&self, w: &Word) -> i64 {
        self.terms.get(w).copied().unwrap_or(0)
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn add(&self, other: &GroupRingElt) -> GroupRingElt {
        let mut out = self.clone();
        for (w, c) in other.terms() {
            out.add_term(w.clone(), c);
        }
        out
    }

    pub fn sub(&self, other: &GroupRingElt) -> GroupRingElt {
        let mut out = self.clone();
        for (w, c) in other.terms() {
            out.add_term(w.clone(), -c);
        }
        out
    }

    pub fn mul(&self, other: &GroupRingElt) -> GroupRingElt {
        let mut out = GroupRingElt::zero();
        for (a, ca) in self.terms() {
            for (b, cb) in other.terms() {
                out.add_term(a.mul(b), ca * cb);
            }
        }
        out
    }

    /// `w * self`.
    pub fn left_mul_word(&self, w: &Word) -> GroupRingElt {
        let mut out = GroupRingElt::zero();
        for (b, c) in self.terms() {
            out.add_term(w.mul(b), c);
        }
        out
    }
}

impl fmt::Display for GroupRingElt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let parts: Vec<String> = self
            .terms
            .iter()
            .map(|(w, c)| match c {
                1 => w.to_string(),
                -1 => format!("-{w}"),
                c => format!("{c}*{w}"),
            })
            .collect();
        write!(f, "{}", parts.join(" + "))
    }
}

/// Fox derivative `d w / d x_i` in a free group of the given rank.
pub fn fox_derivative(w: &Word, i: usize, rank: usize) -> Result<GroupRingElt> {
    if i >= rank {
        return invalid(format!("generator index {i} out of range for rank {rank}"));
    }
    if let Some(g) = w.max_generator() {
        if g >= rank {
            return invalid(format!("word uses generator {g} outside rank {rank}"));
        }
    }
    let mut out = GroupRingElt::zero();
    let mut prefix = Word::identity();
    for &(g, e) in w.syllables() {
        if g == i {
            // x^e contributes 1 + x + .. + x^(e-1) for e > 0 and
            // -(x^-1 + .. + x^e) for e < 0.
            if e > 0 {
                for t in 0..e {
                    out.add_term(prefix.mul(&Word::power(g, t)), 1);
                }
            } else {
                for t in 1..=(-e) {
                    out.add_term(prefix.mul(&Word::power(g, -t)), -1);
                }
            }
        }
        prefix.push(g, e);
    }
    Ok(out)
}

/// Images of the generators and their inverses in `GL_m(Z/p^s)`.
#[derive(Clone, Debug)]
pub struct Representation<'a> {
    actions: &'a [Matrix],
    inverses: Vec<Matrix>,
}

impl<'a> Representation<'a> {
    pub fn new(actions: &'a [Matrix], m: &RingModulus) -> Result<Self> {
        let mut inverses = Vec::with_capacity(actions.len());
        for (i, a) in actions.iter().enumerate() {
            if !a.is_square() {
                return invalid(format!("action of x{i} is not square"));
            }
            match a.inverse(m) {
                Some(inv) => inverses.push(inv),
                None => return invalid(format!("action of x{i} is not invertible mod {}", m.order())),
            }
        }
        Ok(Representation { actions, inverses })
    }

    pub fn dim(&self) -> usize {
        self.actions.first().map_or(0, |a| a.rows())
    }

    pub fn word(&self, w: &Word, m: &RingModulus) -> Result<Matrix> {
        let mut acc = Matrix::identity(self.dim());
        for &(g, e) in w.syllables() {
            if g >= self.actions.len() {
                return invalid(format!("word uses x{g} but only {} actions given", self.actions.len()));
            }
            let base = if e > 0 { &self.actions[g] } else { &self.inverses[g] };
            acc = acc.mul(&base.pow(e.unsigned_abs(), m), m);
        }
        Ok(acc)
    }

    pub fn element(&self, e: &GroupRingElt, m: &RingModulus) -> Result<Matrix> {
        let d = self.dim();
        let mut acc = Matrix::zeros(d, d);
        for (w, c) in e.terms() {
            let img = self.word(w, m)?;
            acc = acc.add(&img.scale(m.reduce_i64(c), m), m);
        }
        Ok(acc)
    }
}

/// Evaluates a group-ring element through the given generator actions.
pub fn evaluate(e: &GroupRingElt, actions: &[Matrix], m: &RingModulus) -> Result<Matrix> {
    if actions.is_empty() {
        return invalid("no actions given");
    }
    Representation::new(actions, m)?.element(e, m)
}

/// The one-relator presentation `x_0^q (x_0,x_1)(x_2,x_3)...(x_n,x_{n+1})`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DemuskinPresentation {
    n: usize,
    p: u64,
    q: u64,
    relator: Word,
    derivatives: Vec<GroupRingElt>,
}

impl DemuskinPresentation {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn q(&self) -> u64 {
        self.q
    }

    pub fn num_generators(&self) -> usize {
        self.n + 2
    }

    pub fn relator(&self) -> &Word {
        &self.relator
    }

    /// Letters of the relator as written, before free reduction.
    pub fn relator_letters(&self) -> Vec<(usize, i64)> {
        let mut out: Vec<(usize, i64)> = std::iter::repeat_n((0, 1), self.q as usize).collect();
        for k in 0..=self.n / 2 {
            out.extend_from_slice(&[(2 * k, -1), (2 * k + 1, -1), (2 * k, 1), (2 * k + 1, 1)]);
        }
        out
    }

    /// `d R / d x_i`.
    pub fn derivative(&self, i: usize) -> &GroupRingElt {
        &self.derivatives[i]
    }

    pub fn derivatives(&self) -> &[GroupRingElt] {
        &self.derivatives
    }
}

pub fn build_relator(n: usize, q: u64) -> Result<DemuskinPresentation> {
    if n < 2 || !n.is_multiple_of(2) {
        return invalid(format!("n must be even and at least 2, got {n}"));
    }
    let Some((p, _)) = prime_power_decompose(q) else {
        return invalid(format!("q = {q} is not a prime power"));
    };
    if p == 2 {
        return invalid("q must be a power of an odd prime");
    }
    if q > i64::MAX as u64 {
        return invalid("q is too large");
    }
    let mut relator = Word::power(0, q as i64);
    for k in 0..=n / 2 {
        relator = relator.mul(&Word::commutator(2 * k, 2 * k + 1));
    }
    let rank = n + 2;
    let derivatives = (0..rank).map(|i| fox_derivative(&relator, i, rank)).collect::<Result<Vec<_>>>()?;
    Ok(DemuskinPresentation { n, p, q, relator, derivatives })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn w(letters: &[(usize, i64)]) -> Word {
        Word::from_letters(letters)
    }

    #[test]
    fn free_reduction() {
        let a = w(&[(0, 1), (1, 1), (1, -1), (0, -1)]);
        assert!(a.is_identity());
        let b = w(&[(2, 3), (2, -1)]);
        assert_eq!(b, Word::power(2, 2));
        assert_eq!(b.mul(&b.inverse()), Word::identity());
    }

    #[test]
    fn relator_shape() {
        let pres = build_relator(2, 5).unwrap();
        assert_eq!(pres.relator_letters().len(), 5 + 4 * 2);
        assert_eq!(pres.relator().to_string(), "x0^4 x1^-1 x0 x1 x2^-1 x3^-1 x2 x3");
        let pres = build_relator(4, 7).unwrap();
        assert_eq!(pres.num_generators(), 6);
        assert_eq!(pres.relator_letters().len(), 7 + 4 * 3);
        assert!(build_relator(3, 5).is_err());
        assert!(build_relator(2, 6).is_err());
        assert!(build_relator(2, 8).is_err());
    }

    #[test]
    fn listed_derivatives() {
        let q = 5;
        let pres = build_relator(2, q).unwrap();
        let mut d0 = GroupRingElt::zero();
        for t in 0..=(q as i64 - 2) {
            d0.add_term(Word::power(0, t), 1);
        }
        d0.add_term(w(&[(0, 4), (1, -1)]), 1);
        assert_eq!(pres.derivative(0), &d0);

        let prefix = w(&[(0, 4), (1, -1)]);
        let d1 = GroupRingElt::from_word(Word::generator(0)).sub(&GroupRingElt::one()).left_mul_word(&prefix);
        assert_eq!(pres.derivative(1), &d1);

        // Later pairs carry the prefix x0^q (x0,x1) as written.
        let head = Word::power(0, 5).mul(&Word::commutator(0, 1));
        let d2 =
            GroupRingElt::from_word(w(&[(3, -1)])).sub(&GroupRingElt::one()).left_mul_word(&head.mul(&w(&[(2, -1)])));
        assert_eq!(pres.derivative(2), &d2);
        let d3 = GroupRingElt::from_word(Word::generator(2))
            .sub(&GroupRingElt::one())
            .left_mul_word(&head.mul(&w(&[(2, -1), (3, -1)])));
        assert_eq!(pres.derivative(3), &d3);
    }

    #[test]
    fn derivative_of_other_generator_vanishes() {
        assert!(fox_derivative(&Word::generator(2), 0, 4).unwrap().is_zero());
        assert_eq!(fox_derivative(&Word::generator(0), 0, 4).unwrap(), GroupRingElt::one());
        assert!(fox_derivative(&Word::generator(0), 4, 4).is_err());
        let inv = fox_derivative(&Word::power(1, -1), 1, 2).unwrap();
        let mut expected = GroupRingElt::zero();
        expected.add_term(Word::power(1, -1), -1);
        assert_eq!(inv, expected);
    }

    #[test]
    fn trivial_evaluations() {
        let m = RingModulus::new(5, 1).unwrap();
        let pres = build_relator(2, 5).unwrap();
        let trivial = vec![Matrix::identity(1); 4];
        let one_minus = GroupRingElt::one().sub(&GroupRingElt::from_word(Word::generator(0)));
        assert!(evaluate(&one_minus, &trivial, &m).unwrap().is_zero());
        assert!(evaluate(pres.derivative(0), &trivial, &m).unwrap().is_zero());
        assert!(evaluate(pres.derivative(1), &trivial, &m).unwrap().is_zero());
        let m2 = RingModulus::new(5, 2).unwrap();
        assert_eq!(evaluate(pres.derivative(0), &trivial, &m2).unwrap().get(0, 0), 5);
    }

    #[test]
    fn singular_action_rejected() {
        let m = RingModulus::new(5, 1).unwrap();
        let bad = vec![Matrix::zeros(1, 1)];
        assert!(evaluate(&GroupRingElt::one(), &bad, &m).is_err());
    }
}
