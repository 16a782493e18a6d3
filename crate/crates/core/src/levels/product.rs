//! Monte Carlo checks on the pair count `Z = |(P' × Q') ∩ (A × B)|` of one
//! generation, for interaction distributions with known marginals.

use rand::RngCore;
use serde::Serialize;

use crate::bits::{BitVector, PairedPopulations, Population};
use crate::error::{invalid, Result};
use crate::pdcoea::{step_generation, InteractionDistribution};
use crate::rng::{spawn_stream, unit_f64};

/// Dependence between the predator and prey indicator of one interaction.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Coupling {
    Independent,
    /// Both indicators driven by one uniform: maximal positive correlation.
    Comonotone,
    /// `y ∈ B` iff `u >= 1 - q`: maximal negative correlation.
    Antitone,
}

/// Emits single-bit strategies with `P(x = 1) = p` and `P(y = 1) = q`, so
/// that `A = B = {1}`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct BernoulliPairs {
    pub p: f64,
    pub q: f64,
    pub coupling: Coupling,
}

impl InteractionDistribution for BernoulliPairs {
    fn sample<R: RngCore + ?Sized>(&self, _pops: &PairedPopulations, rng: &mut R) -> (BitVector, BitVector) {
        let u = unit_f64(rng);
        let (x, y) = match self.coupling {
            Coupling::Independent => (u < self.p, unit_f64(rng) < self.q),
            Coupling::Comonotone => (u < self.p, u < self.q),
            Coupling::Antitone => (u < self.p, u >= 1.0 - self.q),
        };
        let bit = |b: bool| BitVector::from_bits(&[b]).expect("length 1");
        (bit(x), bit(y))
    }
}

impl BernoulliPairs {
    fn validate(&self) -> Result<()> {
        for v in [self.p, self.q] {
            if !(v > 0.0 && v <= 1.0) {
                return Err(invalid(format!("marginal {v} outside (0, 1]")));
            }
        }
        Ok(())
    }

    /// Samples of `Z` after one generation.
    pub fn sample_pair_counts(&self, lambda: usize, samples: usize, seed: u64) -> Result<Vec<u64>> {
        self.validate()?;
        let start = Population::uniform(lambda, &BitVector::zeros(1)?)?;
        let pops = PairedPopulations::new(start.clone(), start)?;
        let mut rng = spawn_stream(seed, 0);
        Ok((0..samples)
            .map(|_| {
                let next = step_generation(&pops, self, &mut rng);
                let a = next.predators().count_where(|c| c == 1) as u64;
                let b = next.prey().count_where(|c| c == 1) as u64;
                a * b
            })
            .collect())
    }
}

fn mean_and_se(v: impl Iterator<Item = f64>) -> (f64, f64) {
    let (mut n, mut s, mut ss) = (0.0, 0.0, 0.0);
    for x in v {
        n += 1.0;
        s += x;
        ss += x * x;
    }
    let mean = s / n;
    let var = (ss / n - mean * mean).max(0.0) * n / (n - 1.0).max(1.0);
    (mean, (var / n).sqrt())
}

/// Margin, in standard errors, within which an estimate counts as
/// consistent with a bound.
pub const SIGMAS: f64 = 6.0;

/// For `pq = (1 + δ)γ`:
/// `E[Z] >= λ(λ-1)(1+δ)γ`,
/// `E[e^{-ηZ}] <= e^{-ηλ(γλ-1)}` at `η = (1 - (1+δ)^{-1/2})/λ`, and
/// `P(Z < λ(γλ-1)) <= exp(-δ1 γλ (1 - sqrt((1+δ1)/(1+δ))))`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ProductBoundReport {
    pub dist: BernoulliPairs,
    pub lambda: usize,
    pub delta: f64,
    pub delta1: f64,
    pub samples: usize,
    pub mean: f64,
    pub mean_se: f64,
    pub mean_lower: f64,
    pub mgf: f64,
    pub mgf_se: f64,
    pub mgf_upper: f64,
    pub tail: f64,
    pub tail_se: f64,
    pub tail_upper: f64,
    pub pass: bool,
}

pub fn check_product_bound(
    dist: BernoulliPairs,
    lambda: usize,
    delta: f64,
    delta1: f64,
    samples: usize,
    seed: u64,
) -> Result<ProductBoundReport> {
    if !(delta > 0.0 && delta1 > 0.0 && delta1 < delta) {
        return Err(invalid("need 0 < delta1 < delta"));
    }
    let zs = dist.sample_pair_counts(lambda, samples, seed)?;
    let l = lambda as f64;
    let gamma = dist.p * dist.q / (1.0 + delta);
    let eta = (1.0 - 1.0 / (1.0 + delta).sqrt()) / l;
    let threshold = l * (gamma * l - 1.0);
    let (mean, mean_se) = mean_and_se(zs.iter().map(|&z| z as f64));
    let (mgf, mgf_se) = mean_and_se(zs.iter().map(|&z| (-eta * z as f64).exp()));
    let (tail, tail_se) = mean_and_se(zs.iter().map(|&z| ((z as f64) < threshold) as u8 as f64));
    let mean_lower = l * (l - 1.0) * (1.0 + delta) * gamma;
    let mgf_upper = (-eta * threshold).exp();
    let tail_upper = (-delta1 * gamma * l * (1.0 - ((1.0 + delta1) / (1.0 + delta)).sqrt())).exp();
    let pass = mean + SIGMAS * mean_se >= mean_lower
        && mgf - SIGMAS * mgf_se <= mgf_upper
        && tail - SIGMAS * tail_se <= tail_upper;
    Ok(ProductBoundReport {
        dist,
        lambda,
        delta,
        delta1,
        samples,
        mean,
        mean_se,
        mean_lower,
        mgf,
        mgf_se,
        mgf_upper,
        tail,
        tail_se,
        tail_upper,
        pass,
    })
}

/// `r = P(Z > 0)` against `1/r < 3/(z(λ-1)) + 1` with `z = pq`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct UpgradeReport {
    pub dist: BernoulliPairs,
    pub lambda: usize,
    pub samples: usize,
    pub r: f64,
    pub r_se: f64,
    pub inverse_bound: f64,
    pub pass: bool,
}

pub fn check_population_upgrade(dist: BernoulliPairs, lambda: usize, samples: usize, seed: u64) -> Result<UpgradeReport> {
    if lambda < 2 {
        return Err(invalid("need lambda >= 2"));
    }
    let zs = dist.sample_pair_counts(lambda, samples, seed)?;
    let (r, r_se) = mean_and_se(zs.iter().map(|&z| (z > 0) as u8 as f64));
    let z = dist.p * dist.q;
    let inverse_bound = 3.0 / (z * (lambda as f64 - 1.0)) + 1.0;
    Ok(UpgradeReport {
        dist,
        lambda,
        samples,
        r,
        r_se,
        inverse_bound,
        pass: r + SIGMAS * r_se.max(1.0 / samples as f64) >= 1.0 / inverse_bound,
    })
}
