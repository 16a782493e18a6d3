//! Numeric and exhaustive check suites over the core library.

use std::fmt;

use clap::ValueEnum;
use pdcoea_core::bilinear::is_intransitive_cycle;
use pdcoea_core::levels::{
    check_growth_bound, check_population_upgrade, check_product_bound, conditional_dominance,
    exact_selection_distribution, first_violation, reference_g1_g2, BernoulliPairs, Coupling,
    GrowthBound, LevelFunctionParams,
};
use pdcoea_core::rng::{index_below, spawn_stream, RandomStream};
use pdcoea_core::theory::{check_power_bound, check_product_mgf, check_sqrt_bound};
use pdcoea_core::{
    dominates, dominates_by_onecounts, intransitivity_witness, select_pair, BilinearParams, BitVector,
    PairedPopulations, Population,
};
use serde::Serialize;

use crate::error::Result;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Suite {
    /// Payoff and one-count dominance agree on every quadruple.
    Dominance,
    /// Reflexivity and a dominance 4-cycle.
    Intransitivity,
    /// Conditional dominance probabilities are at least 1/2.
    HalfProbability,
    /// Mean, mgf and tail of the count of good offspring pairs.
    ProductCount,
    /// Probability of at least one good offspring pair.
    Upgrade,
    /// Product-of-binomials mgf bound.
    ProductMgf,
    /// Region growth bounds under selection.
    Growth,
    /// `1 - (1-x)^n >= 1 - e^{-xn} >= xn/(1+xn)`.
    PowerBound,
    /// Two-sided bound on `1 - sqrt((1+δ1)/(1+δ))`.
    SqrtBound,
    /// Level-function conditions for the reference functions.
    LevelFunction,
    /// Monte Carlo selection against exact enumeration.
    Selection,
    All,
}

impl Suite {
    pub const EACH: [Suite; 11] = [
        Suite::Dominance,
        Suite::Intransitivity,
        Suite::HalfProbability,
        Suite::ProductCount,
        Suite::Upgrade,
        Suite::ProductMgf,
        Suite::Growth,
        Suite::PowerBound,
        Suite::SqrtBound,
        Suite::LevelFunction,
        Suite::Selection,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Dominance => "dominance",
            Suite::Intransitivity => "intransitivity",
            Suite::HalfProbability => "half-probability",
            Suite::ProductCount => "product-count",
            Suite::Upgrade => "upgrade",
            Suite::ProductMgf => "product-mgf",
            Suite::Growth => "growth",
            Suite::PowerBound => "power-bound",
            Suite::SqrtBound => "sqrt-bound",
            Suite::LevelFunction => "level-function",
            Suite::Selection => "selection",
            Suite::All => "all",
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CheckOutcome {
    pub suite: Suite,
    pub checked: u64,
    pub violations: u64,
    pub summary: String,
    pub pass: bool,
}

impl CheckOutcome {
    fn new(suite: Suite, checked: u64, violations: u64, summary: String) -> Self {
        CheckOutcome { suite, checked, violations, summary, pass: violations == 0 && checked > 0 }
    }
}

impl fmt::Display for CheckOutcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let tag = if self.pass { "PASS" } else { "FAIL" };
        write!(f, "[{tag}] {}: {}", self.suite, self.summary)
    }
}

/// Parameter sets `(α, β)` used at `n = 10`.
pub const DOMINANCE_SETS: [(f64, f64); 3] = [(0.4, 0.6), (0.9, 0.05), (0.0, 1.0)];

fn params(n: usize, alpha: f64, beta: f64) -> BilinearParams {
    BilinearParams::new(n, alpha, beta, 1.0 / n as f64).expect("valid parameters")
}

fn pops(n: usize, xs: &[usize], ys: &[usize]) -> PairedPopulations {
    PairedPopulations::new(
        Population::from_ones(n, xs).expect("counts within n"),
        Population::from_ones(n, ys).expect("counts within n"),
    )
    .expect("equal sizes")
}

fn random_counts(rng: &mut RandomStream, lambda: usize, n: usize) -> Vec<usize> {
    (0..lambda).map(|_| index_below(rng, n + 1)).collect()
}

pub fn run_suite(suite: Suite, seed: u64) -> Result<Vec<CheckOutcome>> {
    Ok(match suite {
        Suite::All => {
            let mut out = Vec::new();
            for s in Suite::EACH {
                out.extend(run_suite(s, seed)?);
            }
            out
        }
        Suite::Dominance => vec![dominance()],
        Suite::Intransitivity => vec![intransitivity()],
        Suite::HalfProbability => vec![half_probability(seed)],
        Suite::ProductCount => vec![product_count(seed)?],
        Suite::Upgrade => vec![upgrade(seed)?],
        Suite::ProductMgf => {
            let (r, _) = check_product_mgf(100_000, seed)?;
            vec![CheckOutcome::new(Suite::ProductMgf, r.checked, r.violations, format!("{} cases at 6 sigma; {}", r.checked, r.detail))]
        }
        Suite::Growth => vec![growth(seed)?],
        Suite::PowerBound => {
            let r = check_power_bound(1000, 1000);
            vec![CheckOutcome::new(Suite::PowerBound, r.checked, r.violations, format!("{} points, {} violations; {}", r.checked, r.violations, r.detail))]
        }
        Suite::SqrtBound => {
            let r = check_sqrt_bound(1000);
            vec![CheckOutcome::new(Suite::SqrtBound, r.checked, r.violations, format!("{} points, {} violations; {}", r.checked, r.violations, r.detail))]
        }
        Suite::LevelFunction => vec![level_function()?],
        Suite::Selection => vec![selection(seed, 20, 100_000)?],
    })
}

/// Payoff-based against one-count dominance on all `(n+1)^4` count
/// quadruples at `n = 10`.
pub fn dominance() -> CheckOutcome {
    let n = 10;
    let vecs: Vec<BitVector> = (0..=n).map(|c| BitVector::with_ones(n, c).expect("c <= n")).collect();
    let mut checked = 0;
    let mut mismatches = 0;
    for (a, b) in DOMINANCE_SETS {
        let p = params(n, a, b);
        for (cx1, x1) in vecs.iter().enumerate() {
            for (cy1, y1) in vecs.iter().enumerate() {
                for (cx2, x2) in vecs.iter().enumerate() {
                    for (cy2, y2) in vecs.iter().enumerate() {
                        checked += 1;
                        let by_payoff = dominates(x1, y1, x2, y2, &p).expect("same length");
                        let by_counts = dominates_by_onecounts(cx1, cy1, cx2, cy2, &p).expect("counts within n");
                        mismatches += (by_payoff != by_counts) as u64;
                    }
                }
            }
        }
    }
    CheckOutcome::new(
        Suite::Dominance,
        checked,
        mismatches,
        format!("11^4 quadruples verified for each of {} parameter sets at n=10, {mismatches} mismatches", DOMINANCE_SETS.len()),
    )
}

/// Reflexivity on all count pairs, and a verified 4-cycle at `n = 20`,
/// `α = 0.4`, `β = 0.6`.
pub fn intransitivity() -> CheckOutcome {
    let n = 10;
    let mut checked = 0;
    let mut violations = 0;
    for (a, b) in DOMINANCE_SETS {
        let p = params(n, a, b);
        for cx in 0..=n {
            for cy in 0..=n {
                let x = BitVector::with_ones(n, cx).expect("c <= n");
                let y = BitVector::with_ones(n, cy).expect("c <= n");
                checked += 1;
                violations += !dominates(&x, &y, &x, &y, &p).expect("same length") as u64;
            }
        }
    }
    let p = params(20, 0.4, 0.6);
    checked += 1;
    let cycle = intransitivity_witness(&p);
    let ok = cycle.map(|c| is_intransitive_cycle(&c, &p)).unwrap_or(false);
    violations += !ok as u64;
    let cycle_text = match cycle {
        Some(c) => format!("{c:?}"),
        None => "none".into(),
    };
    CheckOutcome::new(
        Suite::Intransitivity,
        checked,
        violations,
        format!("reflexive on {} count pairs; 4-cycle at n=20 alpha=0.4 beta=0.6: {cycle_text}", checked - 1),
    )
}

/// Conditional dominance probabilities on 100 random populations
/// (`λ = 6`, `n = 10`) per parameter set.
pub fn half_probability(seed: u64) -> CheckOutcome {
    let mut rng = spawn_stream(seed, 3);
    let mut checked = 0;
    let mut violations = 0;
    for (a, b) in DOMINANCE_SETS {
        let p = params(10, a, b);
        for _ in 0..100 {
            let pp = pops(10, &random_counts(&mut rng, 6, 10), &random_counts(&mut rng, 6, 10));
            for c in conditional_dominance(&pp, &p).into_iter().flatten() {
                checked += 1;
                violations += (2 * c.favourable < c.total) as u64;
            }
        }
    }
    CheckOutcome::new(
        Suite::HalfProbability,
        checked,
        violations,
        format!("{checked} non-null conditional probabilities over 300 populations, {violations} below 1/2"),
    )
}

const COUPLINGS: [Coupling; 3] = [Coupling::Independent, Coupling::Comonotone, Coupling::Antitone];

pub fn product_count(seed: u64) -> Result<CheckOutcome> {
    let mut checked = 0;
    let mut violations = 0;
    for (i, coupling) in COUPLINGS.into_iter().enumerate() {
        for (j, (p, q)) in [(0.5, 0.5), (0.3, 0.9), (0.8, 0.7)].into_iter().enumerate() {
            let r = check_product_bound(BernoulliPairs { p, q, coupling }, 20, 0.5, 0.2, 20_000, seed ^ (i * 8 + j) as u64)?;
            checked += 1;
            violations += !r.pass as u64;
        }
    }
    Ok(CheckOutcome::new(
        Suite::ProductCount,
        checked,
        violations,
        format!("{checked} couplings x marginals at lambda=20 delta=0.5 delta1=0.2, 6 sigma, {violations} violations"),
    ))
}

pub fn upgrade(seed: u64) -> Result<CheckOutcome> {
    let mut checked = 0;
    let mut violations = 0;
    for (i, coupling) in COUPLINGS.into_iter().enumerate() {
        for (j, (p, q)) in [(0.05, 0.2), (0.3, 0.3), (0.9, 0.6)].into_iter().enumerate() {
            for lambda in [2, 5, 20] {
                let r = check_population_upgrade(BernoulliPairs { p, q, coupling }, lambda, 20_000, seed ^ (i * 64 + j * 8 + lambda) as u64)?;
                checked += 1;
                violations += !r.pass as u64;
            }
        }
    }
    Ok(CheckOutcome::new(Suite::Upgrade, checked, violations, format!("{checked} settings, 6 sigma, {violations} violations")))
}

/// Reference level functions over `λ ∈ {15, 20, 30}`, `m ∈ {2, 5, 10}`,
/// `z ∈ {0.05, 0.3, 1}` with `δ = 0.5`, `η = (1 - (1+δ)^{-1/2})/λ`,
/// `φ = δ/2`; `g(k, j) = k` must be rejected.
pub fn level_function() -> Result<CheckOutcome> {
    let delta = 0.5;
    let mut checked = 0;
    let mut violations = 0;
    for lambda in [15, 20, 30] {
        for m in [2, 5, 10] {
            for z in [0.05, 0.3, 1.0] {
                let g = reference_g1_g2(LevelFunctionParams {
                    eta: LevelFunctionParams::eta_for(delta, lambda),
                    phi: delta / 2.0,
                    z: vec![z; m - 1],
                    lambda,
                    m,
                })?;
                checked += 1;
                let valid = first_violation(|k, j| g.g(k, j), lambda, m).is_none();
                let within = g.g(0, 1) < g.distance_bound();
                violations += !(valid && within) as u64;
            }
        }
    }
    checked += 1;
    let rejected = first_violation(|k, _| k as f64, 4, 3).is_some();
    violations += !rejected as u64;
    Ok(CheckOutcome::new(
        Suite::LevelFunction,
        checked,
        violations,
        format!("reference g1+g2 on 27 (lambda, m, z) points, {violations} failures; g(k,j)=k rejected: {rejected}"),
    ))
}

/// Empirical `select_pair` frequencies of every one-count pair against
/// exact enumeration, within 6 standard errors.
pub fn selection(seed: u64, populations: usize, draws: usize) -> Result<CheckOutcome> {
    let mut rng = spawn_stream(seed, 5);
    let mut checked = 0;
    let mut violations = 0;
    let mut worst: f64 = 0.0;
    for _ in 0..populations {
        let n = 1 + index_below(&mut rng, 10);
        let lambda = 1 + index_below(&mut rng, 6);
        let a = index_below(&mut rng, n + 1) as f64 / n as f64;
        let b = index_below(&mut rng, n + 1) as f64 / n as f64;
        let p = params(n, a, b);
        let pp = pops(n, &random_counts(&mut rng, lambda, n), &random_counts(&mut rng, lambda, n));
        let mut counts = vec![0u64; (n + 1) * (n + 1)];
        for _ in 0..draws {
            let (x, y) = select_pair(&pp, &p, &mut rng);
            counts[x.ones() * (n + 1) + y.ones()] += 1;
        }
        for cx in 0..=n {
            for cy in 0..=n {
                let exact = exact_selection_distribution(&pp, &p, |x, y| x.ones() == cx && y.ones() == cy)?;
                let freq = counts[cx * (n + 1) + cy] as f64 / draws as f64;
                let se = (exact * (1.0 - exact) / draws as f64).sqrt();
                checked += 1;
                let dev = (freq - exact).abs();
                if se > 0.0 {
                    worst = worst.max(dev / se);
                }
                violations += if se == 0.0 { (dev > 0.0) as u64 } else { (dev > 6.0 * se) as u64 };
            }
        }
    }
    Ok(CheckOutcome::new(
        Suite::Selection,
        checked,
        violations,
        format!("{populations} populations x {draws} draws, {checked} cells, largest deviation {worst:.2} se"),
    ))
}

/// Parameter sets of the growth suite: `βn` non-integer, then integer.
pub const GROWTH_SETS: [(usize, f64, f64, f64); 2] = [(10, 0.9, 0.05, 0.1), (10, 0.4, 0.6, 0.1)];
pub const GROWTH_SAMPLES: usize = 2000;
/// Hypothesis-satisfying populations required per bound and parameter set.
pub const GROWTH_MIN_COVERAGE: u64 = 50;

/// Tally of one growth bound over constructed populations.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GrowthTally {
    pub bound: &'static str,
    pub n: usize,
    pub alpha: f64,
    pub beta: f64,
    pub met: u64,
    pub violations: u64,
    /// Smallest `ratio - bound` among populations meeting the hypotheses.
    pub min_slack: f64,
}

fn growth_population(rng: &mut RandomStream, p: &BilinearParams, saturated: bool) -> PairedPopulations {
    let n = p.n();
    let lambda = 6;
    let r0_hi = p.beta_n().ceil() as usize;
    let above = p.beta_n().floor() as usize + 1;
    let s0_lo = p.alpha_n().ceil() as usize;
    let xs: Vec<usize> = (0..lambda)
        .map(|_| {
            if saturated || (r0_hi > 0 && index_below(rng, 2) == 0) || above > n {
                index_below(rng, r0_hi.max(1))
            } else {
                above + index_below(rng, n + 1 - above)
            }
        })
        .collect();
    let ys: Vec<usize> = (0..lambda)
        .map(|_| {
            if saturated || index_below(rng, 2) == 0 {
                index_below(rng, s0_lo.max(1))
            } else {
                index_below(rng, n + 1)
            }
        })
        .collect();
    pops(n, &xs, &ys)
}

/// Every growth bound on random populations with no predator at exactly
/// `βn`, plus saturated populations (all predators in `R0`, no prey in
/// `S0`) for the saturated joint bound.
pub fn growth_tallies(seed: u64) -> Result<Vec<GrowthTally>> {
    let mut out = Vec::new();
    for (si, &(n, a, b, e)) in GROWTH_SETS.iter().enumerate() {
        let p = BilinearParams::new(n, a, b, e)?;
        let s0_lo = p.alpha_n().ceil() as usize;
        let k_max = n - p.beta_n().ceil() as usize;
        let cases: [(&'static str, bool, Box<dyn Fn(&mut RandomStream) -> GrowthBound>); 5] = [
            ("r0-s1", false, Box::new(move |r| GrowthBound::R0S1 { delta1: [0.1, 0.2, 0.5][index_below(r, 3)], l: index_below(r, s0_lo) })),
            ("r0-s1-saturated", true, Box::new(move |r| GrowthBound::R0S1Saturated { rho: [0.05, 0.1, 0.15][index_below(r, 3)], l: index_below(r, s0_lo) })),
            ("r0", false, Box::new(|_| GrowthBound::R0)),
            ("s1", false, Box::new(move |r| GrowthBound::S1 { l: index_below(r, s0_lo) })),
            ("r0-r1", false, Box::new(move |r| GrowthBound::R0R1 { rho: [0.1, 0.3, 0.5][index_below(r, 3)], k: index_below(r, k_max + 1) })),
        ];
        for (ci, (name, saturated, case)) in cases.iter().enumerate() {
            let mut rng = spawn_stream(seed, 100 + (si * 8 + ci) as u64);
            let mut tally = GrowthTally { bound: name, n, alpha: a, beta: b, met: 0, violations: 0, min_slack: f64::INFINITY };
            for _ in 0..GROWTH_SAMPLES {
                let pp = growth_population(&mut rng, &p, *saturated);
                let c = case(&mut rng);
                let r = check_growth_bound(c, &pp, &p)?;
                debug_assert_eq!(r.predators_at_beta_n, 0);
                if let Some(pass) = r.pass {
                    tally.met += 1;
                    tally.violations += !pass as u64;
                    tally.min_slack = tally.min_slack.min(r.ratio - r.bound);
                }
            }
            out.push(tally);
        }
    }
    Ok(out)
}

/// A population with predators at exactly `βn` for which the `R0` bound
/// fails; reported, not counted.
pub fn growth_boundary_example() -> Result<(f64, f64)> {
    let p = BilinearParams::new(10, 0.4, 0.6, 0.1)?;
    let r = check_growth_bound(GrowthBound::R0, &pops(10, &[4, 1, 6, 2, 6, 10], &[7, 8, 3, 9, 2, 0]), &p)?;
    Ok((r.ratio, r.bound))
}

pub fn growth(seed: u64) -> Result<CheckOutcome> {
    let tallies = growth_tallies(seed)?;
    let checked: u64 = tallies.iter().map(|t| t.met).sum();
    let violations: u64 = tallies.iter().map(|t| t.violations).sum::<u64>()
        + tallies.iter().filter(|t| t.met < GROWTH_MIN_COVERAGE).count() as u64;
    let parts: Vec<String> = tallies
        .iter()
        .map(|t| format!("{}@beta={}: {} met, {} fail, min slack {:.4}", t.bound, t.beta, t.met, t.violations, t.min_slack))
        .collect();
    let (ratio, bound) = growth_boundary_example()?;
    Ok(CheckOutcome::new(
        Suite::Growth,
        checked,
        violations,
        format!(
            "{}; excluded boundary case (predators at |x| = beta n): ratio {ratio:.4} vs bound {bound:.4}",
            parts.join("; ")
        ),
    ))
}
