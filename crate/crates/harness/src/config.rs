//! Experiment specifications and their flat `key = value` config format.
//!
//! ```text
//! # scaling run
//! kind    = runtime-scaling
//! n       = 30,50,80
//! lambda  = 100
//! delta   = 0.01
//! alpha   = 0.9
//! beta    = 0.05
//! epsilon = 0.1
//! trials  = 30
//! seed    = 1
//! budget  = pilot
//! ```
//!
//! Grid keys (`n`, `lambda`, `chi`, `delta`, `alpha`, `beta`, `epsilon`,
//! `r`) take comma-separated lists. When `chi` is absent each `delta` value
//! yields `χ = ½ ln(42/(41(1+δ)))`.
//!
//! `budget` is one of `<generations>`, `bound * <factor>` (the Bilinear
//! runtime budget in interactions times the factor, divided by `λ`) or
//! `pilot` (ten times the median hit time of ten pilot runs).

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use pdcoea_core::theory::mutation_rate_for_delta;
use serde::Serialize;

use crate::error::{HarnessError, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    RuntimeScaling,
    ErrorThreshold,
    Trajectory,
    CheckSuites,
    BoundTable,
}

impl ExperimentKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ExperimentKind::RuntimeScaling => "runtime-scaling",
            ExperimentKind::ErrorThreshold => "error-threshold",
            ExperimentKind::Trajectory => "trajectory",
            ExperimentKind::CheckSuites => "lemma-checks",
            ExperimentKind::BoundTable => "bound-table",
        }
    }
}

impl FromStr for ExperimentKind {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        Ok(match s {
            "runtime-scaling" => ExperimentKind::RuntimeScaling,
            "error-threshold" => ExperimentKind::ErrorThreshold,
            "trajectory" => ExperimentKind::Trajectory,
            "lemma-checks" => ExperimentKind::CheckSuites,
            "bound-table" => ExperimentKind::BoundTable,
            _ => return Err(format!("unknown kind `{s}`")),
        })
    }
}

impl fmt::Display for ExperimentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(rename_all = "kebab-case", tag = "rule", content = "value")]
pub enum BudgetRule {
    Generations(u64),
    /// Multiple of the Bilinear runtime budget.
    BoundFactor(f64),
    Pilot,
}

impl FromStr for BudgetRule {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        let s = s.trim();
        if s == "pilot" {
            return Ok(BudgetRule::Pilot);
        }
        if let Some(rest) = s.strip_prefix("bound") {
            let f = rest.trim().strip_prefix('*').ok_or("expected `bound * <factor>`")?;
            let f: f64 = f.trim().parse().map_err(|_| format!("bad factor `{}`", f.trim()))?;
            if !(f > 0.0 && f.is_finite()) {
                return Err("factor must be positive".into());
            }
            return Ok(BudgetRule::BoundFactor(f));
        }
        let g: u64 = s.parse().map_err(|_| format!("bad budget `{s}`"))?;
        if g == 0 {
            return Err("budget must be at least one generation".into());
        }
        Ok(BudgetRule::Generations(g))
    }
}

impl fmt::Display for BudgetRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BudgetRule::Generations(g) => write!(f, "{g}"),
            BudgetRule::BoundFactor(x) => write!(f, "bound * {x}"),
            BudgetRule::Pilot => f.write_str("pilot"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum TargetKind {
    /// Some predator below `βn` with some prey in `[(α-ε)n, αn)`.
    Epsilon,
    /// The all-one predator together with the all-one prey.
    AllOnes,
}

impl FromStr for TargetKind {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "epsilon" => Ok(TargetKind::Epsilon),
            "all-ones" => Ok(TargetKind::AllOnes),
            _ => Err(format!("unknown target `{s}`")),
        }
    }
}

impl fmt::Display for TargetKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            TargetKind::Epsilon => "epsilon",
            TargetKind::AllOnes => "all-ones",
        })
    }
}

/// Parameter lists; cells are their Cartesian product in the order
/// `n, lambda, chi/delta, alpha, beta, epsilon, r`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Grid {
    pub n: Vec<usize>,
    pub lambda: Vec<usize>,
    pub chi: Vec<f64>,
    pub delta: Vec<f64>,
    pub alpha: Vec<f64>,
    pub beta: Vec<f64>,
    pub epsilon: Vec<f64>,
    pub r: Vec<f64>,
}

/// One grid point.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Cell {
    pub n: usize,
    pub lambda: usize,
    pub chi: f64,
    /// Set when given in the grid or used to derive `chi`.
    pub delta: Option<f64>,
    pub alpha: f64,
    pub beta: f64,
    pub epsilon: f64,
    pub r: f64,
}

impl Grid {
    pub fn cells(&self) -> Result<Vec<Cell>> {
        let rates: Vec<(f64, Option<f64>)> = match (self.chi.is_empty(), self.delta.is_empty()) {
            (true, true) => return Err(HarnessError::Spec("one of chi or delta is required".into())),
            (true, false) => self
                .delta
                .iter()
                .map(|&d| Ok((mutation_rate_for_delta(d)?, Some(d))))
                .collect::<Result<_>>()?,
            (false, true) => self.chi.iter().map(|&c| (c, None)).collect(),
            (false, false) => self
                .chi
                .iter()
                .flat_map(|&c| self.delta.iter().map(move |&d| (c, Some(d))))
                .collect(),
        };
        let mut out = Vec::new();
        for &n in &self.n {
            for &lambda in &self.lambda {
                for &(chi, delta) in &rates {
                    for &alpha in &self.alpha {
                        for &beta in &self.beta {
                            for &epsilon in &self.epsilon {
                                for &r in &self.r {
                                    out.push(Cell { n, lambda, chi, delta, alpha, beta, epsilon, r });
                                }
                            }
                        }
                    }
                }
            }
        }
        if out.is_empty() {
            return Err(HarnessError::Spec("empty grid".into()));
        }
        for (i, a) in out.iter().enumerate() {
            if out[..i].contains(a) {
                return Err(HarnessError::Spec("grid contains a repeated cell".into()));
            }
        }
        Ok(out)
    }
}

/// Everything needed to reproduce an experiment: each row depends only on
/// this, the cell index and the trial index.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExperimentSpec {
    pub kind: ExperimentKind,
    pub grid: Grid,
    pub trials: usize,
    pub seed: u64,
    pub budget: BudgetRule,
    pub target: TargetKind,
    /// The constant `c'' > 1` of the runtime budget.
    pub c_pp: f64,
    pub out: Option<PathBuf>,
}

/// Default `c''`: just above 1.
pub const DEFAULT_C_PP: f64 = 1.000001;

impl ExperimentSpec {
    /// A single-cell spec with default `ε`-target and `r = 1`.
    pub fn single(kind: ExperimentKind, cell: Cell, trials: usize, seed: u64, budget: BudgetRule) -> Self {
        ExperimentSpec {
            kind,
            grid: Grid {
                n: vec![cell.n],
                lambda: vec![cell.lambda],
                chi: vec![cell.chi],
                delta: cell.delta.into_iter().collect(),
                alpha: vec![cell.alpha],
                beta: vec![cell.beta],
                epsilon: vec![cell.epsilon],
                r: vec![cell.r],
            },
            trials,
            seed,
            budget,
            target: TargetKind::Epsilon,
            c_pp: DEFAULT_C_PP,
            out: None,
        }
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut entries: Vec<(&str, &str, usize)> = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or(HarnessError::Config { line: i + 1, msg: format!("expected `key = value`, got `{line}`") })?;
            let (k, v) = (k.trim(), v.trim());
            if entries.iter().any(|(e, _, _)| *e == k) {
                return Err(HarnessError::Config { line: i + 1, msg: format!("duplicate key `{k}`") });
            }
            entries.push((k, v, i + 1));
        }
        let get = |key: &str| entries.iter().find(|(k, _, _)| *k == key).map(|&(_, v, l)| (v, l));
        for (k, _, line) in &entries {
            if !KEYS.contains(k) {
                return Err(HarnessError::Config { line: *line, msg: format!("unknown key `{k}`") });
            }
        }
        fn one<T: FromStr>(v: Option<(&str, usize)>, key: &str, default: Option<T>) -> Result<T>
        where
            T::Err: fmt::Display,
        {
            match v {
                Some((s, line)) => s.parse().map_err(|e| HarnessError::Config { line, msg: format!("{key}: {e}") }),
                None => default.ok_or(HarnessError::Spec(format!("missing key `{key}`"))),
            }
        }
        fn list<T: FromStr>(v: Option<(&str, usize)>, key: &str, default: Vec<T>) -> Result<Vec<T>>
        where
            T::Err: fmt::Display,
        {
            match v {
                None => Ok(default),
                Some((s, line)) => s
                    .split(',')
                    .map(|x| {
                        x.trim()
                            .parse()
                            .map_err(|e| HarnessError::Config { line, msg: format!("{key}: `{}`: {e}", x.trim()) })
                    })
                    .collect(),
            }
        }
        let spec = ExperimentSpec {
            kind: one(get("kind"), "kind", None)?,
            grid: Grid {
                n: list(get("n"), "n", vec![])?,
                lambda: list(get("lambda"), "lambda", vec![])?,
                chi: list(get("chi"), "chi", vec![])?,
                delta: list(get("delta"), "delta", vec![])?,
                alpha: list(get("alpha"), "alpha", vec![])?,
                beta: list(get("beta"), "beta", vec![])?,
                epsilon: list(get("epsilon"), "epsilon", vec![])?,
                r: list(get("r"), "r", vec![1.0])?,
            },
            trials: one(get("trials"), "trials", Some(1))?,
            seed: one(get("seed"), "seed", Some(0))?,
            budget: one(get("budget"), "budget", None)?,
            target: one(get("target"), "target", Some(TargetKind::Epsilon))?,
            c_pp: one(get("c_pp"), "c_pp", Some(DEFAULT_C_PP))?,
            out: get("out").map(|(v, _)| PathBuf::from(v)),
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        let g = &self.grid;
        for (name, empty) in [
            ("n", g.n.is_empty()),
            ("lambda", g.lambda.is_empty()),
            ("alpha", g.alpha.is_empty()),
            ("beta", g.beta.is_empty()),
            ("epsilon", g.epsilon.is_empty()),
            ("r", g.r.is_empty()),
        ] {
            if empty {
                return Err(HarnessError::Spec(format!("grid key `{name}` is required")));
            }
        }
        if self.trials == 0 {
            return Err(HarnessError::Spec("trials must be positive".into()));
        }
        if !(self.c_pp > 1.0) {
            return Err(HarnessError::Spec("c_pp must exceed 1".into()));
        }
        for cell in g.cells()? {
            pdcoea_core::BilinearParams::new(cell.n, cell.alpha, cell.beta, cell.epsilon)?;
            if cell.lambda == 0 {
                return Err(HarnessError::Spec("lambda must be positive".into()));
            }
            if !(cell.chi > 0.0 && cell.chi <= cell.n as f64) {
                return Err(HarnessError::Spec(format!("chi = {} outside (0, n]", cell.chi)));
            }
            if !(cell.r > 0.0) {
                return Err(HarnessError::Spec("r must be positive".into()));
            }
        }
        Ok(())
    }

    /// Canonical config text; parses back to an equal spec.
    pub fn to_config(&self) -> String {
        fn join<T: fmt::Display>(v: &[T]) -> String {
            v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",")
        }
        let g = &self.grid;
        let mut lines = vec![format!("kind = {}", self.kind), format!("n = {}", join(&g.n)), format!("lambda = {}", join(&g.lambda))];
        if !g.chi.is_empty() {
            lines.push(format!("chi = {}", join(&g.chi)));
        }
        if !g.delta.is_empty() {
            lines.push(format!("delta = {}", join(&g.delta)));
        }
        lines.extend([
            format!("alpha = {}", join(&g.alpha)),
            format!("beta = {}", join(&g.beta)),
            format!("epsilon = {}", join(&g.epsilon)),
            format!("r = {}", join(&g.r)),
            format!("trials = {}", self.trials),
            format!("seed = {}", self.seed),
            format!("budget = {}", self.budget),
            format!("target = {}", self.target),
            format!("c_pp = {}", self.c_pp),
        ]);
        if let Some(out) = &self.out {
            lines.push(format!("out = {}", out.display()));
        }
        lines.join("\n") + "\n"
    }
}

const KEYS: [&str; 15] = [
    "kind", "n", "lambda", "chi", "delta", "alpha", "beta", "epsilon", "r", "trials", "seed", "budget", "target",
    "c_pp", "out",
];
