//! Bit-vector strategies and the paired predator/prey populations.
//!
//! A [`BitVector`] is an element of `{0,1}^n` packed into 64-bit words. The
//! unused high bits of the last word are always zero, so `ones` and
//! `hamming` reduce to population counts over the words.

use std::fmt;
use std::str::FromStr;

use rand::RngCore;

use crate::error::{ensure_same_len, invalid, Error, Result};

const WORD_BITS: usize = 64;

fn word_count(n: usize) -> usize {
    n.div_ceil(WORD_BITS)
}

fn tail_mask(n: usize) -> u64 {
    match n % WORD_BITS {
        0 => u64::MAX,
        r => (1u64 << r) - 1,
    }
}

/// Fixed-length binary strategy.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct BitVector {
    words: Vec<u64>,
    len: usize,
}

impl BitVector {
    /// All-zero vector of length `n`.
    pub fn zeros(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(invalid("bit vector length must be positive"));
        }
        Ok(Self {
            words: vec![0; word_count(n)],
            len: n,
        })
    }

    /// All-one vector of length `n`.
    pub fn filled(n: usize) -> Result<Self> {
        Self::with_ones(n, n)
    }

    /// Vector of length `n` whose first `count` positions are set.
    ///
    /// Every quantity of the Bilinear game depends on one-counts only, so this
    /// is the canonical representative of the class `{v : ones(v) = count}`.
    pub fn with_ones(n: usize, count: usize) -> Result<Self> {
        if count > n {
            return Err(invalid(format!("one-count {count} exceeds length {n}")));
        }
        let mut v = Self::zeros(n)?;
        for (w, word) in v.words.iter_mut().enumerate() {
            let lo = w * WORD_BITS;
            if count >= lo + WORD_BITS {
                *word = u64::MAX;
            } else if count > lo {
                *word = (1u64 << (count - lo)) - 1;
            }
        }
        Ok(v)
    }

    pub fn from_bits(bits: &[bool]) -> Result<Self> {
        let mut v = Self::zeros(bits.len())?;
        for (i, &b) in bits.iter().enumerate() {
            if b {
                v.words[i / WORD_BITS] |= 1u64 << (i % WORD_BITS);
            }
        }
        Ok(v)
    }

    /// Uniformly random vector: each bit is 1 with probability 1/2.
    pub fn random<R: RngCore + ?Sized>(n: usize, rng: &mut R) -> Result<Self> {
        let mut v = Self::zeros(n)?;
        for word in v.words.iter_mut() {
            *word = rng.next_u64();
        }
        v.clear_tail();
        Ok(v)
    }

    fn clear_tail(&mut self) {
        if let Some(last) = self.words.last_mut() {
            *last &= tail_mask(self.len);
        }
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.len
    }

    /// Always false: zero-length vectors cannot be constructed.
    #[inline]
    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn words(&self) -> &[u64] {
        &self.words
    }

    pub fn get(&self, i: usize) -> Option<bool> {
        (i < self.len).then(|| (self.words[i / WORD_BITS] >> (i % WORD_BITS)) & 1 == 1)
    }

    pub fn iter(&self) -> impl Iterator<Item = bool> + '_ {
        (0..self.len).map(move |i| (self.words[i / WORD_BITS] >> (i % WORD_BITS)) & 1 == 1)
    }

    /// Number of 1-bits, `||v||`.
    #[inline]
    pub fn ones(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    /// Number of positions where `self` and `other` disagree.
    pub fn hamming(&self, other: &BitVector) -> Result<usize> {
        ensure_same_len(self.len, other.len)?;
        Ok(self
            .words
            .iter()
            .zip(&other.words)
            .map(|(a, b)| (a ^ b).count_ones() as usize)
            .sum())
    }

    pub fn complement(&self) -> BitVector {
        let mut v = Self {
            words: self.words.iter().map(|w| !w).collect(),
            len: self.len,
        };
        v.clear_tail();
        v
    }

    /// `self XOR mask`; both vectors have the same length.
    pub(crate) fn xor(&self, mask: &BitVector) -> BitVector {
        debug_assert_eq!(self.len, mask.len);
        Self {
            words: self
                .words
                .iter()
                .zip(&mask.words)
                .map(|(a, b)| a ^ b)
                .collect(),
            len: self.len,
        }
    }

    pub(crate) fn set_bit(&mut self, i: usize) {
        self.words[i / WORD_BITS] |= 1u64 << (i % WORD_BITS);
    }
}

impl fmt::Display for BitVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for b in self.iter() {
            f.write_str(if b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl fmt::Debug for BitVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BitVector({self})")
    }
}

impl FromStr for BitVector {
    type Err = Error;

    /// Parses a string of `0`/`1` characters, position 0 first.
    fn from_str(s: &str) -> Result<Self> {
        let bits = s
            .chars()
            .map(|c| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                other => Err(invalid(format!("unexpected character {other:?} in bit string"))),
            })
            .collect::<Result<Vec<_>>>()?;
        Self::from_bits(&bits)
    }
}

/// A population of `lambda` strategies of one common length.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Population {
    members: Vec<BitVector>,
}

impl Population {
    pub fn new(members: Vec<BitVector>) -> Result<Self> {
        let first = members
            .first()
            .ok_or_else(|| invalid("population must be non-empty"))?;
        let n = first.len();
        for m in &members {
            ensure_same_len(n, m.len())?;
        }
        Ok(Self { members })
    }

    /// `lambda` independent uniform vectors of length `n`.
    pub fn random<R: RngCore + ?Sized>(lambda: usize, n: usize, rng: &mut R) -> Result<Self> {
        if lambda == 0 {
            return Err(invalid("population size must be positive"));
        }
        let members = (0..lambda)
            .map(|_| BitVector::random(n, rng))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { members })
    }

    /// `lambda` copies of `v`.
    pub fn uniform(lambda: usize, v: &BitVector) -> Result<Self> {
        if lambda == 0 {
            return Err(invalid("population size must be positive"));
        }
        Ok(Self {
            members: vec![v.clone(); lambda],
        })
    }

    /// Builds a population of canonical vectors from one-counts.
    pub fn from_ones(n: usize, counts: &[usize]) -> Result<Self> {
        let members = counts
            .iter()
            .map(|&c| BitVector::with_ones(n, c))
            .collect::<Result<Vec<_>>>()?;
        Self::new(members)
    }

    #[inline]
    pub fn lambda(&self) -> usize {
        self.members.len()
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.members[0].len()
    }

    #[inline]
    pub fn get(&self, i: usize) -> &BitVector {
        &self.members[i]
    }

    pub fn members(&self) -> &[BitVector] {
        &self.members
    }

    pub fn iter(&self) -> std::slice::Iter<'_, BitVector> {
        self.members.iter()
    }

    pub fn one_counts(&self) -> Vec<usize> {
        self.members.iter().map(BitVector::ones).collect()
    }

    pub fn count_where(&self, pred: impl Fn(usize) -> bool) -> usize {
        self.members.iter().filter(|m| pred(m.ones())).count()
    }
}

/// Algorithm state `(P_t, Q_t)` at generation `t`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PairedPopulations {
    predators: Population,
    prey: Population,
    generation: u64,
}

impl PairedPopulations {
    pub fn new(predators: Population, prey: Population) -> Result<Self> {
        if predators.lambda() != prey.lambda() {
            return Err(invalid(format!(
                "population sizes differ: {} predators vs {} prey",
                predators.lambda(),
                prey.lambda()
            )));
        }
        ensure_same_len(predators.n(), prey.n())?;
        Ok(Self {
            predators,
            prey,
            generation: 0,
        })
    }

    pub fn with_generation(mut self, generation: u64) -> Self {
        self.generation = generation;
        self
    }

    /// Both populations drawn uniformly at random, predators first.
    pub fn random<R: RngCore + ?Sized>(lambda: usize, n: usize, rng: &mut R) -> Result<Self> {
        let mut predators = Vec::with_capacity(lambda);
        let mut prey = Vec::with_capacity(lambda);
        if lambda == 0 {
            return Err(invalid("population size must be positive"));
        }
        for _ in 0..lambda {
            predators.push(BitVector::random(n, rng)?);
            prey.push(BitVector::random(n, rng)?);
        }
        Self::new(Population { members: predators }, Population { members: prey })
    }

    pub fn predators(&self) -> &Population {
        &self.predators
    }

    pub fn prey(&self) -> &Population {
        &self.prey
    }

    pub fn generation(&self) -> u64 {
        self.generation
    }

    pub fn lambda(&self) -> usize {
        self.predators.lambda()
    }

    pub fn n(&self) -> usize {
        self.predators.n()
    }

    pub(crate) fn from_offspring(
        predators: Vec<BitVector>,
        prey: Vec<BitVector>,
        generation: u64,
    ) -> Self {
        Self {
            predators: Population { members: predators },
            prey: Population { members: prey },
            generation,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn bv(s: &str) -> BitVector {
        s.parse().unwrap()
    }

    #[test]
    fn ones_examples() {
        assert_eq!(BitVector::zeros(10).unwrap().ones(), 0);
        assert_eq!(BitVector::filled(10).unwrap().ones(), 10);
        assert_eq!(bv("1010110000").ones(), 4);
    }

    #[test]
    fn hamming_examples() {
        let u = bv("11001010");
        assert_eq!(u.hamming(&u).unwrap(), 0);
        let z = BitVector::zeros(8).unwrap();
        let o = BitVector::filled(8).unwrap();
        assert_eq!(z.hamming(&o).unwrap(), 8);
        assert_eq!(bv("1100").hamming(&bv("1010")).unwrap(), 2);
    }

    #[test]
    fn hamming_length_mismatch() {
        let err = bv("110").hamming(&bv("1100")).unwrap_err();
        assert_eq!(err, Error::DimensionMismatch { expected: 3, actual: 4 });
    }

    #[test]
    fn zero_length_rejected() {
        assert!(BitVector::zeros(0).is_err());
        assert!(BitVector::from_bits(&[]).is_err());
    }

    #[test]
    fn with_ones_spans_words() {
        for n in [1usize, 63, 64, 65, 130] {
            for c in [0, 1, n / 2, n.saturating_sub(1), n] {
                let v = BitVector::with_ones(n, c).unwrap();
                assert_eq!(v.ones(), c);
                assert_eq!(v.complement().ones(), n - c);
            }
        }
        assert!(BitVector::with_ones(5, 6).is_err());
    }

    #[test]
    fn hamming_triangle_exhaustive_small_n() {
        for n in 1..=6usize {
            let all: Vec<BitVector> = (0u32..(1 << n))
                .map(|m| BitVector::from_bits(&(0..n).map(|i| m >> i & 1 == 1).collect::<Vec<_>>()).unwrap())
                .collect();
            for a in &all {
                for b in &all {
                    let ab = a.hamming(b).unwrap();
                    assert_eq!(ab, b.hamming(a).unwrap());
                    for c in &all {
                        assert!(a.hamming(c).unwrap() <= ab + b.hamming(c).unwrap());
                    }
                }
            }
        }
    }

    #[test]
    fn population_invariants() {
        assert!(Population::new(vec![]).is_err());
        let mixed = vec![bv("101"), bv("1010")];
        assert!(Population::new(mixed).is_err());
        let p = Population::from_ones(4, &[0, 2, 4]).unwrap();
        let q = Population::from_ones(4, &[1, 1]).unwrap();
        assert!(PairedPopulations::new(p.clone(), q).is_err());
        let q = Population::from_ones(5, &[1, 1, 1]).unwrap();
        assert!(PairedPopulations::new(p, q).is_err());
    }

    proptest! {
        #[test]
        fn ones_and_complement(bits in proptest::collection::vec(any::<bool>(), 1..200)) {
            let v = BitVector::from_bits(&bits).unwrap();
            let n = v.len();
            prop_assert!(v.ones() <= n);
            prop_assert_eq!(v.complement().ones(), n - v.ones());
            prop_assert_eq!(v.hamming(&v.complement()).unwrap(), n);
            let round: BitVector = v.to_string().parse().unwrap();
            prop_assert_eq!(round, v);
        }

        #[test]
        fn hamming_triangle(a in proptest::collection::vec(any::<bool>(), 70),
                            b in proptest::collection::vec(any::<bool>(), 70),
                            c in proptest::collection::vec(any::<bool>(), 70)) {
            let (a, b, c) = (BitVector::from_bits(&a).unwrap(), BitVector::from_bits(&b).unwrap(), BitVector::from_bits(&c).unwrap());
            prop_assert!(a.hamming(&c).unwrap() <= a.hamming(&b).unwrap() + b.hamming(&c).unwrap());
        }
    }
}
