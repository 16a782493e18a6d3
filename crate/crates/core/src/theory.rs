//! Closed-form runtime bounds and mutation-rate thresholds, plus numeric
//! checks of the standalone inequalities behind them.

use serde::Serialize;

use crate::error::{invalid, Result};
use crate::rng::{binomial, pow_u, spawn_stream};

/// Inputs of the generic level-based runtime bound.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LevelBoundInputs {
    /// Number of levels `m`.
    pub m: usize,
    pub lambda: usize,
    pub delta: f64,
    /// `z_1, ..., z_{m-1}`.
    pub z: Vec<f64>,
    /// The constant `c'' > 1`.
    pub c_pp: f64,
}

/// `(c''λ/δ)(mλ² + 16 Σ 1/z_i)` split into its two summands.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct LevelBound {
    pub value: f64,
    /// `(c''λ/δ) mλ²`
    pub population_term: f64,
    /// `(c''λ/δ) 16 Σ 1/z_i`
    pub upgrade_term: f64,
}

/// Expected runtime bound, in interactions, of a process satisfying the
/// level conditions with upgrade probabilities `z_i` and growth rate `δ`.
pub fn level_runtime_bound(b: &LevelBoundInputs) -> Result<LevelBound> {
    if b.m == 0 || b.lambda == 0 {
        return Err(invalid("m and lambda must be positive"));
    }
    if !(b.delta > 0.0 && b.delta <= 1.0) {
        return Err(invalid(format!("delta = {} outside (0, 1]", b.delta)));
    }
    if b.z.len() != b.m - 1 {
        return Err(invalid(format!("expected {} values of z, got {}", b.m - 1, b.z.len())));
    }
    if let Some(z) = b.z.iter().find(|&&z| !(z > 0.0 && z <= 1.0)) {
        return Err(invalid(format!("z = {z} outside (0, 1]")));
    }
    if !(b.c_pp > 1.0) {
        return Err(invalid("c'' must exceed 1"));
    }
    let l = b.lambda as f64;
    let scale = b.c_pp * l / b.delta;
    let population_term = scale * (b.m as f64 * l * l);
    let upgrade_term = scale * (16.0 * b.z.iter().map(|z| 1.0 / z).sum::<f64>());
    Ok(LevelBound { value: population_term + upgrade_term, population_term, upgrade_term })
}

/// Largest `δ` for which [`mutation_rate_for_delta`] is defined.
pub const MAX_RATE_DELTA: f64 = 1.0 / 41.0;

/// `χ = ½ ln(42/(41(1+δ)))` for `δ ∈ (0, 1/41)`.
pub fn mutation_rate_for_delta(delta: f64) -> Result<f64> {
    if !(delta > 0.0 && delta < MAX_RATE_DELTA) {
        return Err(invalid(format!("delta = {delta} outside (0, 1/41)")));
    }
    Ok(0.5 * (42.0 / (41.0 * (1.0 + delta))).ln())
}

/// Inverse of [`mutation_rate_for_delta`]: `δ = (42/41) e^{-2χ} - 1`.
pub fn delta_for_mutation_rate(chi: f64) -> f64 {
    42.0 / 41.0 * (-2.0 * chi).exp() - 1.0
}

/// Inputs of the Bilinear runtime budget.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct BilinearBudgetInputs {
    pub n: usize,
    pub lambda: usize,
    pub chi: f64,
    pub alpha: f64,
    pub beta: f64,
    pub epsilon: f64,
    /// Failure-probability factor: the runtime exceeds the budget with
    /// probability at most about `1/r`.
    pub r: f64,
    pub c_pp: f64,
    /// Growth margin `δ`; derived from `χ` as `(42/41)e^{-2χ} - 1` when absent.
    pub delta: Option<f64>,
}

/// `(2rc''λ/δ)(λ²n + (23n/χ) ln(1/(β(1-α+ε))))` with its parts.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct BilinearBudget {
    pub value: f64,
    /// `δ = (42/41)e^{-2χ} - 1`.
    pub delta: f64,
    /// `2rc''λ/δ`
    pub prefactor: f64,
    /// `λ²n`
    pub population_term: f64,
    /// `(23n/χ) ln(1/(β(1-α+ε)))`
    pub mutation_term: f64,
}

/// Interaction budget within which the pairwise-dominance algorithm reaches
/// the Bilinear target with probability about `1 - 1/r`. The guarantee
/// carries an unquantified `1 + o(1)` factor that is not included.
pub fn bilinear_runtime_budget(b: &BilinearBudgetInputs) -> Result<BilinearBudget> {
    if b.n == 0 || b.lambda == 0 {
        return Err(invalid("n and lambda must be positive"));
    }
    if !(b.r > 0.0) || !(b.c_pp > 1.0) {
        return Err(invalid("need r > 0 and c'' > 1"));
    }
    if !(b.chi > 0.0) {
        return Err(invalid("chi must be positive"));
    }
    let delta = b.delta.unwrap_or_else(|| delta_for_mutation_rate(b.chi));
    if !(delta > 0.0) {
        return Err(invalid(format!("chi = {} leaves no growth margin (delta <= 0)", b.chi)));
    }
    let base = b.beta * (1.0 - b.alpha + b.epsilon);
    if !(base > 0.0 && base < 1.0) {
        return Err(invalid(format!("beta(1 - alpha + epsilon) = {base} outside (0, 1)")));
    }
    let (n, l) = (b.n as f64, b.lambda as f64);
    let prefactor = 2.0 * b.r * b.c_pp * l / delta;
    let population_term = l * l * n;
    let mutation_term = 23.0 * n / b.chi * (1.0 / base).ln();
    Ok(BilinearBudget { value: prefactor * (population_term + mutation_term), delta, prefactor, population_term, mutation_term })
}

/// `ln 2 / (1 - 2δ)`: mutation rates above it make small targets
/// exponentially hard to reach.
pub fn error_threshold(delta: f64) -> Result<f64> {
    if !(delta > 0.0 && delta < 0.5) {
        return Err(invalid(format!("delta = {delta} outside (0, 1/2)")));
    }
    Ok(std::f64::consts::LN_2 / (1.0 - 2.0 * delta))
}

/// Probabilities of Binomial(`n`, `p`) at `0..=n`.
pub fn binomial_pmf(n: u64, p: f64) -> Vec<f64> {
    let mut pmf = vec![0.0; n as usize + 1];
    if p <= 0.0 {
        pmf[0] = 1.0;
        return pmf;
    }
    if p >= 1.0 {
        pmf[n as usize] = 1.0;
        return pmf;
    }
    let ratio = p / (1.0 - p);
    let mut v = pow_u(1.0 - p, n);
    for (k, slot) in pmf.iter_mut().enumerate() {
        *slot = v;
        v *= (n - k as u64) as f64 / (k as f64 + 1.0) * ratio;
    }
    pmf
}

/// Outcome of one numeric inequality check.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct InequalityReport {
    pub name: &'static str,
    pub checked: u64,
    pub violations: u64,
    pub detail: String,
}

impl InequalityReport {
    pub fn pass(&self) -> bool {
        self.violations == 0
    }
}

/// `1 - sqrt((1+δ1)/(1+δ))` without cancellation.
fn sqrt_gap(delta: f64, delta1: f64) -> f64 {
    let a = (1.0 + delta1) / (1.0 + delta);
    (delta - delta1) / (1.0 + delta) / (1.0 + a.sqrt())
}

/// `(3δ - 4δ1)/11 < 1 - sqrt((1+δ1)/(1+δ)) < (4δ - 3δ1)/8` on a
/// `points × points` grid of `δ ∈ (0, 1)`, `δ1 ∈ [0, δ)`.
pub fn check_sqrt_bound(points: usize) -> InequalityReport {
    let mut violations = 0;
    let mut first = None;
    for i in 0..points {
        let delta = (i as f64 + 0.5) / points as f64;
        for j in 0..points {
            let delta1 = delta * j as f64 / points as f64;
            let mid = sqrt_gap(delta, delta1);
            let lo = (3.0 * delta - 4.0 * delta1) / 11.0;
            let hi = (4.0 * delta - 3.0 * delta1) / 8.0;
            if !(lo < mid && mid < hi) {
                violations += 1;
                first.get_or_insert((delta, delta1));
            }
        }
    }
    InequalityReport {
        name: "sqrt-bound",
        checked: (points * points) as u64,
        violations,
        detail: match first {
            Some((d, d1)) => format!("first violation at delta={d}, delta1={d1}"),
            None => format!("{points}x{points} grid of (delta, delta1)"),
        },
    }
}

/// `1 - (1-x)^n >= 1 - e^{-xn} >= xn/(1+xn)` for `x` on a grid of `[0, 1]`
/// and `n = 1..=max_n`, up to a few units of rounding.
pub fn check_power_bound(x_points: usize, max_n: u64) -> InequalityReport {
    let tol = 8.0 * f64::EPSILON;
    let mut violations = 0;
    let mut checked = 0;
    let mut first = None;
    for i in 0..=x_points {
        let x = i as f64 / x_points as f64;
        for n in 1..=max_n {
            let a = 1.0 - pow_u(1.0 - x, n);
            let b = -(-x * n as f64).exp_m1();
            let c = x * n as f64 / (1.0 + x * n as f64);
            checked += 1;
            if a < b - tol || b < c - tol {
                violations += 1;
                first.get_or_insert((x, n));
            }
        }
    }
    InequalityReport {
        name: "power-bound",
        checked,
        violations,
        detail: match first {
            Some((x, n)) => format!("first violation at x={x}, n={n}"),
            None => format!("{} values of x times n in 1..={max_n}", x_points + 1),
        },
    }
}

/// Setting of the product moment-generating-function bound: for independent
/// `X ~ Bin(λ, p)`, `Y ~ Bin(λ, q)` with `pq >= (1+σ)²z` and
/// `0 < η <= σ/((1+σ)λ)`, `E[e^{-ηXY}] <= e^{-ηzλ²}`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ProductMgfCase {
    pub lambda: u64,
    pub p: f64,
    pub q: f64,
    pub z: f64,
    /// Fraction of the largest admissible `η` to use.
    pub eta_fraction: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ProductMgfResult {
    pub case: ProductMgfCase,
    pub sigma: f64,
    pub eta: f64,
    pub bound: f64,
    pub exact: f64,
    pub estimate: f64,
    pub estimate_se: f64,
}

impl ProductMgfResult {
    pub fn pass(&self) -> bool {
        self.exact <= self.bound * (1.0 + 1e-12) && self.estimate - 6.0 * self.estimate_se <= self.bound
    }
}

pub fn product_mgf(case: ProductMgfCase, samples: usize, seed: u64) -> Result<ProductMgfResult> {
    let ProductMgfCase { lambda, p, q, z, eta_fraction } = case;
    if !(z > 0.0 && p * q >= z && eta_fraction > 0.0 && eta_fraction <= 1.0) {
        return Err(invalid("need pq >= z > 0 and eta_fraction in (0, 1]"));
    }
    let sigma = (p * q / z).sqrt() - 1.0;
    if !(sigma > 0.0) {
        return Err(invalid("need pq > z"));
    }
    let l = lambda as f64;
    let eta = eta_fraction * sigma / ((1.0 + sigma) * l);
    let bound = (-eta * z * l * l).exp();
    let (px, py) = (binomial_pmf(lambda, p), binomial_pmf(lambda, q));
    let exact = px
        .iter()
        .enumerate()
        .flat_map(|(x, &wx)| py.iter().enumerate().map(move |(y, &wy)| wx * wy * (-eta * (x * y) as f64).exp()))
        .sum();
    let mut rng = spawn_stream(seed, 0);
    let (mut s, mut ss) = (0.0, 0.0);
    for _ in 0..samples {
        let x = binomial(&mut rng, lambda, p);
        let y = binomial(&mut rng, lambda, q);
        let v = (-eta * (x * y) as f64).exp();
        s += v;
        ss += v * v;
    }
    let m = samples as f64;
    let estimate = s / m;
    let estimate_se = ((ss / m - estimate * estimate).max(0.0) / (m - 1.0).max(1.0)).sqrt();
    Ok(ProductMgfResult { case, sigma, eta, bound, exact, estimate, estimate_se })
}

/// Runs the product-mgf bound over a parameter grid.
pub fn check_product_mgf(samples: usize, seed: u64) -> Result<(InequalityReport, Vec<ProductMgfResult>)> {
    let mut cases = vec![ProductMgfCase { lambda: 20, p: 0.9, q: 0.9, z: 0.5, eta_fraction: 1.0 }];
    for lambda in [5, 20, 50] {
        for (p, q) in [(0.5, 0.5), (0.3, 0.9), (1.0, 0.6)] {
            for zf in [0.2, 0.6, 0.95] {
                cases.push(ProductMgfCase { lambda, p, q, z: p * q * zf, eta_fraction: 1.0 });
            }
        }
    }
    let results = cases
        .iter()
        .enumerate()
        .map(|(i, &c)| product_mgf(c, if i == 0 { samples } else { samples / 10 }, seed.wrapping_add(i as u64)))
        .collect::<Result<Vec<_>>>()?;
    let violations = results.iter().filter(|r| !r.pass()).count() as u64;
    let head = &results[0];
    Ok((
        InequalityReport {
            name: "product-mgf",
            checked: results.len() as u64,
            violations,
            detail: format!(
                "lambda=20 p=q=0.9 z=0.5: estimate {:.6e} (se {:.1e}), exact {:.6e}, bound {:.6e}",
                head.estimate, head.estimate_se, head.exact, head.bound
            ),
        },
        results,
    ))
}
