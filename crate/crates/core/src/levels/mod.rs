//! Level structure of the product space `X × Y`.
//!
//! A level is a pair of one-count intervals `(A_j, B_j)`. The sequence used
//! for the Bilinear game starts with the whole space, then follows the
//! predators down to `|x| < βn` (phase 1) and finally the prey up into the
//! target band (phase 2).

mod level_function;
mod product;
mod selection;

pub use level_function::{
    first_violation, reference_g1_g2, validate_level_function, LevelFunctionParams, ReferenceLevelFunctions,
};
pub use product::{
    check_population_upgrade, check_product_bound, BernoulliPairs, Coupling, ProductBoundReport,
    UpgradeReport,
};
pub use selection::{
    check_growth_bound, conditional_dominance, exact_selection_distribution,
    exact_selection_distribution_with_cap, GrowthBound, GrowthReport, SelectionCount,
    ENUMERATION_CAP,
};

use serde::Serialize;

use crate::bilinear::{classify_predator_count, classify_prey_count, BilinearParams, Region};
use crate::bits::PairedPopulations;
use crate::error::{invalid, Result};

/// Fraction of pairs a level must hold to count as reached.
pub const GAMMA0: f64 = 9.0 / 25.0;

/// Half-open range `[lo, hi)` of one-counts.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct CountInterval {
    pub lo: usize,
    pub hi: usize,
}

impl CountInterval {
    pub fn new(lo: usize, hi: usize) -> Self {
        Self { lo, hi: hi.max(lo) }
    }

    #[inline]
    pub fn contains(&self, c: usize) -> bool {
        self.lo <= c && c < self.hi
    }

    pub fn is_empty(&self) -> bool {
        self.lo == self.hi
    }
}

/// Number of non-negative integers strictly below `t`.
fn count_below(t: f64) -> usize {
    if t <= 0.0 {
        0
    } else {
        t.ceil() as usize
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Phase {
    /// The whole space `X × Y`.
    Full,
    /// `(R0 ∪ R1(j)) × S2((α-ε)n)`.
    One(usize),
    /// `R0 × S1(j)`.
    Two(usize),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct Level {
    pub phase: Phase,
    pub predators: CountInterval,
    pub prey: CountInterval,
}

impl Level {
    pub fn contains_counts(&self, cx: usize, cy: usize) -> bool {
        self.predators.contains(cx) && self.prey.contains(cy)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LevelSequence {
    levels: Vec<Level>,
    phase1: usize,
    phase2: usize,
}

impl LevelSequence {
    pub fn levels(&self) -> &[Level] {
        &self.levels
    }

    /// Total number of levels `m`.
    pub fn len(&self) -> usize {
        self.levels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.levels.is_empty()
    }

    pub fn phase1_len(&self) -> usize {
        self.phase1
    }

    pub fn phase2_len(&self) -> usize {
        self.phase2
    }

    pub fn get(&self, j: usize) -> &Level {
        &self.levels[j]
    }

    /// Index of the highest level holding at least `γ0 λ²` pairs.
    pub fn current_level(&self, pops: &PairedPopulations, gamma0: f64) -> usize {
        self.current_level_counts(&pops.predators().one_counts(), &pops.prey().one_counts(), gamma0)
    }

    pub fn current_level_counts(&self, xs: &[usize], ys: &[usize], gamma0: f64) -> usize {
        let prefix = |cs: &[usize]| {
            let n = cs.iter().copied().max().unwrap_or(0) + 1;
            let mut hist = vec![0usize; n + 1];
            for &c in cs {
                hist[c + 1] += 1;
            }
            for i in 1..hist.len() {
                hist[i] += hist[i - 1];
            }
            hist
        };
        let (px, py) = (prefix(xs), prefix(ys));
        let in_range = |h: &[usize], r: &CountInterval| {
            let clamp = |v: usize| h[v.min(h.len() - 1)];
            clamp(r.hi) - clamp(r.lo)
        };
        let need = gamma0 * (xs.len() * ys.len()) as f64;
        self.levels
            .iter()
            .rposition(|l| (in_range(&px, &l.predators) * in_range(&py, &l.prey)) as f64 >= need)
            .unwrap_or(0)
    }
}

/// Builds the full-space level followed by the phase-1 levels
/// `j = 0..=⌊(1-β)n⌋` and the phase-2 levels `j = 0..=⌈(α-ε)n⌉`.
///
/// The last level is exactly the target `R0 × S1((α-ε)n)`.
pub fn build_bilinear_levels(p: &BilinearParams) -> Result<LevelSequence> {
    let n = p.n();
    if p.target_lo() < 0.0 {
        return Err(invalid("alpha - epsilon must be non-negative"));
    }
    if p.beta_n() <= 0.0 {
        return Err(invalid("beta must be positive: R0 is empty"));
    }
    let full = CountInterval::new(0, n + 1);
    let r0_hi = count_below(p.beta_n());
    let s0_lo = count_below(p.alpha_n());
    let band_lo = count_below(p.target_lo());
    let mut levels = vec![Level { phase: Phase::Full, predators: full, prey: full }];
    let m1 = (n as f64 - p.beta_n() + 1e-9).floor() as usize;
    for j in 0..=m1 {
        levels.push(Level {
            phase: Phase::One(j),
            predators: CountInterval::new(0, n - j),
            prey: CountInterval::new(0, band_lo),
        });
    }
    for j in 0..=band_lo {
        levels.push(Level {
            phase: Phase::Two(j),
            predators: CountInterval::new(0, r0_hi),
            prey: CountInterval::new(j, s0_lo),
        });
    }
    Ok(LevelSequence { levels, phase1: m1 + 1, phase2: band_lo + 1 })
}

/// `|(P × Q) ∩ (A × B)|`.
pub fn pairs_in_level(pops: &PairedPopulations, level: &Level) -> usize {
    pops.predators().count_where(|c| level.predators.contains(c))
        * pops.prey().count_where(|c| level.prey.contains(c))
}

/// Largest level index whose pair count reaches `γ0 λ²`.
pub fn current_level(pops: &PairedPopulations, seq: &LevelSequence, gamma0: f64) -> Result<usize> {
    if !(gamma0 > 0.0 && gamma0 < 1.0) {
        return Err(invalid(format!("gamma0 = {gamma0} outside (0, 1)")));
    }
    Ok(seq.current_level(pops, gamma0))
}

/// Population counts in `R0, R1(k), R2(k)` and `S0, S1(l), S2(l)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct FractionStats {
    pub lambda: usize,
    pub r0: usize,
    pub r1: usize,
    pub r2: usize,
    pub s0: usize,
    pub s1: usize,
    pub s2: usize,
}

impl FractionStats {
    pub fn p0(&self) -> f64 {
        self.r0 as f64 / self.lambda as f64
    }

    pub fn p_k(&self) -> f64 {
        self.r1 as f64 / self.lambda as f64
    }

    pub fn p_r2(&self) -> f64 {
        self.r2 as f64 / self.lambda as f64
    }

    pub fn q0(&self) -> f64 {
        self.s0 as f64 / self.lambda as f64
    }

    pub fn q_l(&self) -> f64 {
        self.s1 as f64 / self.lambda as f64
    }

    pub fn q_s2(&self) -> f64 {
        self.s2 as f64 / self.lambda as f64
    }
}

pub fn fraction_stats(pops: &PairedPopulations, k: usize, l: usize, p: &BilinearParams) -> Result<FractionStats> {
    let mut s = FractionStats { lambda: pops.lambda(), r0: 0, r1: 0, r2: 0, s0: 0, s1: 0, s2: 0 };
    for x in pops.predators().iter() {
        match classify_predator_count(x.ones(), k, p)? {
            Region::R0 => s.r0 += 1,
            Region::R1(_) => s.r1 += 1,
            _ => s.r2 += 1,
        }
    }
    for y in pops.prey().iter() {
        match classify_prey_count(y.ones(), l, p)? {
            Region::S0 => s.s0 += 1,
            Region::S1(_) => s.s1 += 1,
            _ => s.s2 += 1,
        }
    }
    Ok(s)
}
