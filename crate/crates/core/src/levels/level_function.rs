//! Level functions on `[0..λ²] × [1..m]` and the reference pair `g1`, `g2`
//! used as a drift potential.
//!
//! Level indices `j` here are 1-based.

use serde::Serialize;

use crate::error::{invalid, Result};

/// Checks the three level-function conditions over the whole grid:
///
/// 1. `g(k, j) >= g(k, j + 1)` for `j < m`,
/// 2. `g(k, j) >= g(k + 1, j)` for `k < λ²`,
/// 3. `g(λ², j) >= g(0, j + 1)` for `j < m`.
pub fn validate_level_function(g: impl Fn(u64, usize) -> f64, lambda: usize, m: usize) -> bool {
    first_violation(g, lambda, m).is_none()
}

/// The first `(condition, k, j)` that fails, if any.
pub fn first_violation(g: impl Fn(u64, usize) -> f64, lambda: usize, m: usize) -> Option<(u8, u64, usize)> {
    let top = (lambda as u64) * (lambda as u64);
    for j in 1..=m {
        let mut prev = g(0, j);
        for k in 0..=top {
            let cur = if k == 0 { prev } else { g(k, j) };
            if k > 0 && prev < cur {
                return Some((2, k - 1, j));
            }
            if j < m && cur < g(k, j + 1) {
                return Some((1, k, j));
            }
            prev = cur;
        }
        if j < m && g(top, j) < g(0, j + 1) {
            return Some((3, top, j));
        }
    }
    None
}

/// Parameters of the reference level functions.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LevelFunctionParams {
    pub eta: f64,
    pub phi: f64,
    /// `z_1, ..., z_{m-1}`.
    pub z: Vec<f64>,
    pub lambda: usize,
    pub m: usize,
}

impl LevelFunctionParams {
    /// `η = (1 - 1/sqrt(1 + δ))/λ`, which lies in `(3δ/(11λ), δ/(2λ))`.
    pub fn eta_for(delta: f64, lambda: usize) -> f64 {
        (1.0 - 1.0 / (1.0 + delta).sqrt()) / lambda as f64
    }

    pub fn validate(&self) -> Result<()> {
        if self.lambda == 0 || self.m == 0 {
            return Err(invalid("lambda and m must be positive"));
        }
        if !(self.eta > 0.0 && self.eta.is_finite()) {
            return Err(invalid("eta must be positive"));
        }
        if !(self.phi > 0.0 && self.phi < 1.0) {
            return Err(invalid("phi must lie in (0, 1)"));
        }
        if self.z.len() != self.m - 1 {
            return Err(invalid(format!("expected {} values of z, got {}", self.m - 1, self.z.len())));
        }
        if self.z.iter().any(|&z| !(z > 0.0 && z <= 1.0)) {
            return Err(invalid("every z_j must lie in (0, 1]"));
        }
        Ok(())
    }

    pub fn z_min(&self) -> f64 {
        self.z.iter().copied().fold(1.0, f64::min)
    }
}

/// `g1(k, j) = η/(1+η) ((m - j)λ² - k)` and
/// `g2(k, j) = φ (e^{-ηk}/q_j + Σ_{i=j+1}^{m-1} 1/q_i)` with
/// `q_j = λ z_j/(4 + λ z_j)`; `g2(·, m) = 0`.
#[derive(Clone, Debug)]
pub struct ReferenceLevelFunctions {
    params: LevelFunctionParams,
    /// `q[j]` for `j` in `1..m`; index 0 unused.
    q: Vec<f64>,
    /// `suffix[j] = Σ_{i=j}^{m-1} 1/q_i`, `suffix[m] = 0`.
    suffix: Vec<f64>,
}

pub fn reference_g1_g2(params: LevelFunctionParams) -> Result<ReferenceLevelFunctions> {
    params.validate()?;
    let (lambda, m) = (params.lambda as f64, params.m);
    let mut q = vec![f64::NAN; m];
    for j in 1..m {
        let lz = lambda * params.z[j - 1];
        q[j] = lz / (4.0 + lz);
    }
    let mut suffix = vec![0.0; m + 1];
    for j in (1..m).rev() {
        suffix[j] = 1.0 / q[j] + suffix[j + 1];
    }
    Ok(ReferenceLevelFunctions { params, q, suffix })
}

impl ReferenceLevelFunctions {
    pub fn params(&self) -> &LevelFunctionParams {
        &self.params
    }

    pub fn q(&self, j: usize) -> f64 {
        self.q[j]
    }

    pub fn g1(&self, k: u64, j: usize) -> f64 {
        let l2 = (self.params.lambda * self.params.lambda) as i64;
        let units = (self.params.m as i64 - j as i64) * l2 - k as i64;
        self.params.eta / (1.0 + self.params.eta) * units as f64
    }

    pub fn g2(&self, k: u64, j: usize) -> f64 {
        if j >= self.params.m {
            return 0.0;
        }
        let e = (-self.params.eta * k as f64).exp();
        self.params.phi * (e / self.q[j] + self.suffix[j + 1])
    }

    pub fn g(&self, k: u64, j: usize) -> f64 {
        self.g1(k, j) + self.g2(k, j)
    }

    /// `3ηλ²m / z_*`, the bound on `g(0, 1)` when `λ > 44/3`,
    /// `λ² > 44/(3δ)` and `φ <= δ`.
    pub fn distance_bound(&self) -> f64 {
        let p = &self.params;
        3.0 * p.eta * (p.lambda * p.lambda) as f64 * p.m as f64 / p.z_min()
    }
}
