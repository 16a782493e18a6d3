//! Deterministic, splittable random streams.
//!
//! A [`RandomStream`] is ChaCha8 (the `rand_chacha` block cipher RNG with 8
//! rounds). The 256-bit key is expanded from the 64-bit seed by
//! `SeedableRng::seed_from_u64`, which fills the key with the output of a
//! PCG32 generator (multiplier `6364136223846793005`, increment
//! `11634580027462260723`). The stream index selects ChaCha's 64-bit stream
//! (nonce) word. Child streams `(seed, i)` and `(seed, j)` therefore share a
//! key and differ in nonce, which makes them independent keystreams.
//!
//! All sampling helpers in this module use integer operations and exact IEEE
//! `+ - * /` only, so a stream produces the same samples on every platform.

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Single-owner deterministic generator.
#[derive(Clone, Debug)]
pub struct RandomStream {
    inner: ChaCha8Rng,
    seed: u64,
    index: u64,
}

impl RandomStream {
    /// Stream 0 of `seed`.
    pub fn new(seed: u64) -> Self {
        spawn_stream(seed, 0)
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn index(&self) -> u64 {
        self.index
    }
}

/// Child stream `index` of `seed`.
pub fn spawn_stream(seed: u64, index: u64) -> RandomStream {
    let mut inner = ChaCha8Rng::seed_from_u64(seed);
    inner.set_stream(index);
    RandomStream { inner, seed, index }
}

impl RngCore for RandomStream {
    #[inline]
    fn next_u32(&mut self) -> u32 {
        self.inner.next_u32()
    }

    #[inline]
    fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }

    fn fill_bytes(&mut self, dst: &mut [u8]) {
        self.inner.fill_bytes(dst)
    }
}

/// Uniform double in `[0, 1)` built from the top 53 bits of one word.
#[inline]
pub fn unit_f64<R: RngCore + ?Sized>(rng: &mut R) -> f64 {
    (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// Uniform index in `0..bound`. `bound` must be positive and fit in `u32`.
#[inline]
pub fn index_below<R: RngCore + ?Sized>(rng: &mut R, bound: usize) -> usize {
    debug_assert!(bound > 0 && bound <= u32::MAX as usize);
    rng.random_range(0..bound as u32) as usize
}

/// `base^exp` by repeated squaring.
pub(crate) fn pow_u(mut base: f64, mut exp: u64) -> f64 {
    let mut acc = 1.0;
    while exp > 0 {
        if exp & 1 == 1 {
            acc *= base;
        }
        base *= base;
        exp >>= 1;
    }
    acc
}

// Above this mean the inversion walk gets long; fall back to per-trial draws.
const INVERSION_MAX_MEAN: f64 = 32.0;

/// Exact sample from Binomial(`n`, `p`).
///
/// Uses sequential inversion for small means and summed Bernoulli trials
/// otherwise; both routes use only exact floating-point operations.
pub fn binomial<R: RngCore + ?Sized>(rng: &mut R, n: u64, p: f64) -> u64 {
    if n == 0 || p <= 0.0 {
        return 0;
    }
    if p >= 1.0 {
        return n;
    }
    if p > 0.5 {
        return n - binomial(rng, n, 1.0 - p);
    }
    let q = 1.0 - p;
    let p0 = pow_u(q, n);
    if (n as f64) * p > INVERSION_MAX_MEAN || p0 < f64::MIN_POSITIVE {
        return (0..n).filter(|_| unit_f64(rng) < p).count() as u64;
    }
    let ratio = p / q;
    let u = unit_f64(rng);
    let mut k = 0u64;
    let mut pk = p0;
    let mut cdf = pk;
    while u >= cdf && k < n {
        pk *= (n - k) as f64 / (k + 1) as f64 * ratio;
        k += 1;
        cdf += pk;
    }
    k
}
