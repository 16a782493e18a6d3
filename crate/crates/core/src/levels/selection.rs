//! Exact distribution of the pair returned by dominance selection, by
//! enumerating all `λ⁴` equally likely index draws.

use serde::Serialize;

use crate::bilinear::BilinearParams;
use crate::bits::{BitVector, PairedPopulations};
use crate::error::{Error, Result};
use crate::game::Game;
use crate::levels::fraction_stats;
use crate::pdcoea::select_from_draws;

/// Largest population size enumerated exactly by default.
pub const ENUMERATION_CAP: usize = 12;

/// `favourable` of `total` equally likely draw outcomes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct SelectionCount {
    pub favourable: u64,
    pub total: u64,
}

impl SelectionCount {
    pub fn probability(&self) -> f64 {
        self.favourable as f64 / self.total as f64
    }
}

/// Probability that selection returns a pair in `c`.
pub fn exact_selection_distribution<G, F>(pops: &PairedPopulations, game: &G, c: F) -> Result<f64>
where
    G: Game + ?Sized,
    F: Fn(&BitVector, &BitVector) -> bool,
{
    exact_selection_distribution_with_cap(pops, game, c, ENUMERATION_CAP).map(|s| s.probability())
}

pub fn exact_selection_distribution_with_cap<G, F>(
    pops: &PairedPopulations,
    game: &G,
    c: F,
    cap: usize,
) -> Result<SelectionCount>
where
    G: Game + ?Sized,
    F: Fn(&BitVector, &BitVector) -> bool,
{
    let lambda = pops.lambda();
    if lambda > cap {
        return Err(Error::EnumerationTooLarge { lambda, cap });
    }
    let (p, q) = (pops.predators(), pops.prey());
    let member: Vec<bool> = (0..lambda * lambda)
        .map(|ij| c(p.get(ij / lambda), q.get(ij % lambda)))
        .collect();
    let mut favourable = 0u64;
    for i1 in 0..lambda {
        for j1 in 0..lambda {
            for i2 in 0..lambda {
                for j2 in 0..lambda {
                    let (i, j) = select_from_draws(pops, game, [i1, j1, i2, j2]);
                    favourable += member[i * lambda + j] as u64;
                }
            }
        }
    }
    Ok(SelectionCount { favourable, total: (lambda as u64).pow(4) })
}

/// Conditional probability that `(x1, y1)` dominates `(x2, y2)` given each of
///
/// 0. `|y1| <= |y2|`, `|x1| > βn`, `|x2| > βn`
/// 1. `|y1| >= |y2|`, `|x1| < βn`, `|x2| < βn`
/// 2. `|x1| >= |x2|`, `|y1| > αn`, `|y2| > αn`
/// 3. `|x1| <= |x2|`, `|y1| < αn`, `|y2| < αn`
///
/// over uniform independent draws. `None` marks a null conditioning event.
pub fn conditional_dominance(pops: &PairedPopulations, p: &BilinearParams) -> [Option<SelectionCount>; 4] {
    let xs = pops.predators().one_counts();
    let ys = pops.prey().one_counts();
    let (bn, an) = (p.beta_n(), p.alpha_n());
    let mut hit = [0u64; 4];
    let mut total = [0u64; 4];
    for &x1 in &xs {
        for &y1 in &ys {
            for &x2 in &xs {
                for &y2 in &ys {
                    let (fx1, fy1, fx2, fy2) = (x1 as f64, y1 as f64, x2 as f64, y2 as f64);
                    let events = [
                        y1 <= y2 && fx1 > bn && fx2 > bn,
                        y1 >= y2 && fx1 < bn && fx2 < bn,
                        x1 >= x2 && fy1 > an && fy2 > an,
                        x1 <= x2 && fy1 < an && fy2 < an,
                    ];
                    if !events.iter().any(|&e| e) {
                        continue;
                    }
                    let d = p.dominates_counts(x1, y1, x2, y2) as u64;
                    for (k, &e) in events.iter().enumerate() {
                        if e {
                            total[k] += 1;
                            hit[k] += d;
                        }
                    }
                }
            }
        }
    }
    std::array::from_fn(|k| (total[k] > 0).then_some(SelectionCount { favourable: hit[k], total: total[k] }))
}

/// Lower bounds on how selection amplifies regions of the Bilinear game.
///
/// Fractions: `p0` of predators in `R0`, `p` in `R1(k)`, `q0` of prey in
/// `S0`, `q` in `S1(l)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(rename_all = "kebab-case", tag = "case")]
pub enum GrowthBound {
    /// If `1/3 < p0 < 1 - δ1`, the product of the `R0` and `S1(l)`
    /// amplification factors exceeds `1 + min(δ1/2 - 8q0, 1/10 - 12q0)`.
    R0S1 { delta1: f64, l: usize },
    /// If `p0 q < 1 - ρ`, `p0 >= 1 - ρ/10` and `q0 < ρ/90`, the same product
    /// exceeds `1 + ρ/300 (40 - ρ(17 - ρ))`.
    R0S1Saturated { rho: f64, l: usize },
    /// `P_sel(R0)/p0 >= ((3 + q0)(1 - q0) - p0(1 - q0(2 + q0))) / 2`.
    R0,
    /// `P_sel(S1(l))/q > 3/2 (2 - p0) p0 (1 - q) + q - 4q0`.
    S1 { l: usize },
    /// If `q0 <= sqrt(2(1 - ρ)) - 1`,
    /// `P_sel(R0 ∪ R1(k))/(p0 + p) > 1 + ρ(1 - p - p0)`.
    R0R1 { rho: f64, k: usize },
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct GrowthReport {
    pub case: GrowthBound,
    pub hypotheses_met: bool,
    pub ratio: f64,
    pub bound: f64,
    /// `None` when the hypotheses fail.
    pub pass: Option<bool>,
    /// Predators with `|x| = βn` exactly. The `R0` and `R0 ∪ R1(k)` bounds
    /// can fail when this is nonzero.
    pub predators_at_beta_n: usize,
}

const GROWTH_TOL: f64 = 1e-12;

/// Evaluates one growth bound exactly for `pops`.
pub fn check_growth_bound(case: GrowthBound, pops: &PairedPopulations, p: &BilinearParams) -> Result<GrowthReport> {
    let (k, l) = match case {
        GrowthBound::R0S1 { l, .. } | GrowthBound::R0S1Saturated { l, .. } | GrowthBound::S1 { l } => (0, l),
        GrowthBound::R0R1 { k, .. } => (k, 0),
        GrowthBound::R0 => (0, 0),
    };
    let s = fraction_stats(pops, k, l, p)?;
    let at_beta = pops.predators().count_where(|x| x as f64 == p.beta_n());
    let (p0, pk, q0, q) = (s.p0(), s.p_k(), s.q0(), s.q_l());
    let an = p.alpha_n();
    let in_s1 = |y: usize| (y as f64) < an && y >= l;
    let sel = |f: &dyn Fn(usize, usize) -> bool| {
        exact_selection_distribution(pops, p, |x, y| f(x.ones(), y.ones()))
    };
    let r0_factor = || -> Result<f64> { Ok(sel(&|x, _| p.in_r0(x))? / p0) };
    let s1_factor = || -> Result<f64> { Ok(sel(&|_, y| in_s1(y))? / q) };

    let (met, bound) = match case {
        GrowthBound::R0S1 { delta1, .. } => (
            delta1 > 0.0 && delta1 < 1.0 && p0 > 1.0 / 3.0 && p0 < 1.0 - delta1 && q > 0.0,
            1.0 + (delta1 / 2.0 - 8.0 * q0).min(0.1 - 12.0 * q0),
        ),
        GrowthBound::R0S1Saturated { rho, .. } => (
            rho > 0.0 && rho < 1.0 && p0 * q < 1.0 - rho && p0 >= 1.0 - rho / 10.0 && q0 < rho / 90.0 && q > 0.0,
            1.0 + rho / 300.0 * (40.0 - rho * (17.0 - rho)),
        ),
        GrowthBound::R0 => (p0 > 0.0, 0.5 * ((3.0 + q0) * (1.0 - q0) - p0 * (1.0 - q0 * (2.0 + q0)))),
        GrowthBound::S1 { .. } => (q > 0.0, 1.5 * (2.0 - p0) * p0 * (1.0 - q) + q - 4.0 * q0),
        GrowthBound::R0R1 { rho, .. } => (
            rho > 0.0 && q0 <= (2.0 * (1.0 - rho)).sqrt() - 1.0 && p0 + pk > 0.0,
            1.0 + rho * (1.0 - pk - p0),
        ),
    };
    if !met {
        return Ok(GrowthReport { case, hypotheses_met: false, ratio: f64::NAN, bound, pass: None, predators_at_beta_n: at_beta });
    }
    let ratio = match case {
        GrowthBound::R0S1 { .. } | GrowthBound::R0S1Saturated { .. } => r0_factor()? * s1_factor()?,
        GrowthBound::R0 => r0_factor()?,
        GrowthBound::S1 { .. } => s1_factor()?,
        GrowthBound::R0R1 { .. } => {
            let hi = p.n() - k;
            sel(&|x, _| x < hi)? / (p0 + pk)
        }
    };
    Ok(GrowthReport { case, hypotheses_met: true, ratio, bound, pass: Some(ratio > bound - GROWTH_TOL), predators_at_beta_n: at_beta })
}
