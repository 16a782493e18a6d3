//! Multi-trial runs over a parameter grid, plus the error-threshold,
//! runtime-scaling and trajectory experiments built on them.
//!
//! Trial `t` of cell `c` draws from `spawn_stream(seed, c · trials + t)`,
//! so results do not depend on how work is scheduled. Pilot run `i` of cell
//! `c` uses stream `PILOT_STREAM_BASE + c · PILOT_RUNS + i`.

use std::time::Instant;

use pdcoea_core::levels::GAMMA0;
use pdcoea_core::theory::{bilinear_runtime_budget, BilinearBudgetInputs};
use pdcoea_core::{run_trial, BilinearParams, GenerationStats, PdcoeaConfig, Target, TrialRecord};
use rayon::prelude::*;
use serde::Serialize;

use crate::config::{BudgetRule, Cell, ExperimentKind, ExperimentSpec, TargetKind};
use crate::error::{HarnessError, Result};
use crate::table::{quantile, ResultTable, TrialRow};

pub const PILOT_RUNS: u64 = 10;
pub const PILOT_FACTOR: f64 = 10.0;
pub const PILOT_STREAM_BASE: u64 = 1 << 62;

/// Generation cap of a pilot run: `100 · n · λ`.
pub fn pilot_cap(cell: &Cell) -> u64 {
    100 * cell.n as u64 * cell.lambda as u64
}

pub fn trial_config(spec: &ExperimentSpec, cell: &Cell, budget: u64, stream: u64) -> Result<PdcoeaConfig> {
    let game = BilinearParams::new(cell.n, cell.alpha, cell.beta, cell.epsilon)?;
    let mut cfg = PdcoeaConfig::new(game, cell.lambda, cell.chi, spec.seed, budget);
    cfg.stream = stream;
    cfg.target = match spec.target {
        TargetKind::Epsilon => Target::Epsilon,
        TargetKind::AllOnes => Target::all_ones(cell.n)?,
    };
    cfg.validate()?;
    Ok(cfg)
}

/// The Bilinear runtime budget, in interactions, for a cell.
pub fn reference_budget(spec: &ExperimentSpec, cell: &Cell) -> Result<f64> {
    Ok(bilinear_runtime_budget(&BilinearBudgetInputs {
        n: cell.n,
        lambda: cell.lambda,
        chi: cell.chi,
        alpha: cell.alpha,
        beta: cell.beta,
        epsilon: cell.epsilon,
        r: cell.r,
        c_pp: spec.c_pp,
        delta: cell.delta,
    })?
    .value)
}

/// Pilot runs of one cell and the budget they fix.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PilotReport {
    pub cap_generations: u64,
    /// Generations to hit, or the cap for censored pilots.
    pub generations: Vec<u64>,
    pub hits: usize,
    pub median_generations: f64,
    pub budget_generations: u64,
}

/// Ten pilot runs capped at `100·n·λ` generations; the budget is ten times
/// their median generation count, censored pilots counting as the cap.
pub fn pilot_budget(spec: &ExperimentSpec, cell_index: usize, cell: &Cell) -> Result<PilotReport> {
    let cap = pilot_cap(cell);
    let records = (0..PILOT_RUNS)
        .into_par_iter()
        .map(|i| Ok(run_trial(&trial_config(spec, cell, cap, PILOT_STREAM_BASE + cell_index as u64 * PILOT_RUNS + i)?)?))
        .collect::<Result<Vec<_>>>()?;
    let hits = records.iter().filter(|r| r.hit).count();
    if hits == 0 {
        return Err(HarnessError::Spec(format!("no pilot run reached the target within {cap} generations")));
    }
    let generations: Vec<u64> = records.iter().map(|r| r.generations_run).collect();
    let median_generations = {
        let mut s = generations.clone();
        s.sort_unstable();
        quantile(&s, 0.5).expect("ten pilots")
    };
    Ok(PilotReport {
        cap_generations: cap,
        generations,
        hits,
        median_generations,
        budget_generations: ((PILOT_FACTOR * median_generations).ceil() as u64).max(1),
    })
}

/// Generation budget of each cell, with pilot reports where pilots ran.
pub fn cell_budgets(spec: &ExperimentSpec) -> Result<Vec<(u64, Option<PilotReport>)>> {
    spec.grid
        .cells()?
        .iter()
        .enumerate()
        .map(|(i, cell)| match spec.budget {
            BudgetRule::Generations(g) => Ok((g, None)),
            BudgetRule::BoundFactor(f) => {
                let g = (f * reference_budget(spec, cell)? / cell.lambda as f64).ceil();
                Ok(((g as u64).max(1), None))
            }
            BudgetRule::Pilot => {
                let p = pilot_budget(spec, i, cell)?;
                Ok((p.budget_generations, Some(p)))
            }
        })
        .collect()
}

fn check_trial_kind(spec: &ExperimentSpec) -> Result<()> {
    spec.validate()?;
    match spec.kind {
        ExperimentKind::CheckSuites | ExperimentKind::BoundTable => {
            Err(HarnessError::Spec(format!("kind `{}` does not run trials", spec.kind)))
        }
        _ => Ok(()),
    }
}

/// Runs every cell × trial in parallel and returns the rows in cell, trial
/// order.
pub fn run_experiment(spec: &ExperimentSpec) -> Result<ResultTable> {
    check_trial_kind(spec)?;
    let budgets: Vec<u64> = cell_budgets(spec)?.into_iter().map(|(b, _)| b).collect();
    run_with_budgets(spec, budgets)
}

pub fn run_with_budgets(spec: &ExperimentSpec, budgets: Vec<u64>) -> Result<ResultTable> {
    let cells = spec.grid.cells()?;
    if budgets.len() != cells.len() {
        return Err(HarnessError::Spec("one budget per cell required".into()));
    }
    let trials = spec.trials;
    let mut rows = (0..cells.len() * trials)
        .into_par_iter()
        .map(|unit| {
            let (ci, trial) = (unit / trials, unit % trials);
            let cell = &cells[ci];
            let cfg = trial_config(spec, cell, budgets[ci], unit as u64)?;
            let start = Instant::now();
            let rec = run_trial(&cfg)?;
            let wall_ms = start.elapsed().as_secs_f64() * 1e3;
            Ok((ci, row(spec, cell, trial, &rec, wall_ms)))
        })
        .collect::<Result<Vec<_>>>()?;
    rows.sort_by_key(|(ci, r)| (*ci, r.trial));
    Ok(ResultTable { spec: spec.clone(), budgets, rows: rows.into_iter().map(|(_, r)| r).collect() })
}

fn row(spec: &ExperimentSpec, cell: &Cell, trial: usize, rec: &TrialRecord, wall_ms: f64) -> TrialRow {
    TrialRow {
        kind: spec.kind.to_string(),
        n: cell.n,
        lambda: cell.lambda,
        chi: cell.chi,
        alpha: cell.alpha,
        beta: cell.beta,
        epsilon: cell.epsilon,
        delta: cell.delta,
        r: cell.r,
        trial,
        seed: spec.seed,
        hit: rec.hit,
        t_interactions: rec.t_interactions,
        generations: rec.generations_run,
        wall_ms: (wall_ms * 1e3).round() / 1e3,
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ThresholdPoint {
    pub n: usize,
    pub lambda: usize,
    pub chi: f64,
    pub trials: usize,
    pub hits: usize,
    pub success_rate: f64,
}

/// Success rate against `χ`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ThresholdSummary {
    /// Sorted by `(n, λ, χ)`.
    pub points: Vec<ThresholdPoint>,
    /// Success rate never rises with `χ` at fixed `(n, λ)`.
    pub non_increasing: bool,
    /// Consecutive grid rates `(χ_lo, χ_hi)` where the rate first drops
    /// from at least 1/2 to below 1/2, per `(n, λ)`.
    pub transitions: Vec<(usize, usize, f64, f64)>,
    /// `ln 2`, the limit of the error threshold as `δ → 0`.
    pub ln2: f64,
}

pub fn summarize_threshold(table: &ResultTable) -> ThresholdSummary {
    let mut points: Vec<ThresholdPoint> = table
        .aggregates()
        .into_iter()
        .map(|a| ThresholdPoint {
            n: a.n,
            lambda: a.lambda,
            chi: a.chi,
            trials: a.trials,
            hits: a.hits,
            success_rate: a.success_rate,
        })
        .collect();
    points.sort_by(|a, b| (a.n, a.lambda).cmp(&(b.n, b.lambda)).then(a.chi.total_cmp(&b.chi)));
    let mut non_increasing = true;
    let mut transitions = Vec::new();
    for w in points.windows(2) {
        if (w[0].n, w[0].lambda) != (w[1].n, w[1].lambda) {
            continue;
        }
        if w[1].success_rate > w[0].success_rate {
            non_increasing = false;
        }
        if w[0].success_rate >= 0.5
            && w[1].success_rate < 0.5
            && !transitions.iter().any(|t: &(usize, usize, f64, f64)| (t.0, t.1) == (w[0].n, w[0].lambda))
        {
            transitions.push((w[0].n, w[0].lambda, w[0].chi, w[1].chi));
        }
    }
    ThresholdSummary { points, non_increasing, transitions, ln2: std::f64::consts::LN_2 }
}

/// Success rate against mutation rate on the all-ones pair target.
pub fn experiment_error_threshold(spec: &ExperimentSpec) -> Result<(ResultTable, ThresholdSummary)> {
    let table = run_experiment(spec)?;
    let summary = summarize_threshold(&table);
    Ok((table, summary))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ScalingPoint {
    pub n: usize,
    pub lambda: usize,
    pub chi: f64,
    pub success_rate: f64,
    pub median_t: Option<f64>,
    pub budget_generations: u64,
    /// The Bilinear runtime budget in interactions, for scale only.
    pub reference_budget: Option<f64>,
}

/// Log-log least-squares slope of median `T` along one axis.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ScalingFit {
    /// `"n"` or `"lambda"`.
    pub axis: &'static str,
    /// Value of the other axis.
    pub fixed: usize,
    pub points: usize,
    pub slope: f64,
    pub rank_correlation: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ScalingSummary {
    pub points: Vec<ScalingPoint>,
    pub fits: Vec<ScalingFit>,
    pub pilots: Vec<Option<PilotReport>>,
}

fn ranks(v: &[f64]) -> Vec<f64> {
    let mut idx: Vec<usize> = (0..v.len()).collect();
    idx.sort_by(|&a, &b| v[a].total_cmp(&v[b]));
    let mut r = vec![0.0; v.len()];
    let mut i = 0;
    while i < idx.len() {
        let mut j = i;
        while j + 1 < idx.len() && v[idx[j + 1]] == v[idx[i]] {
            j += 1;
        }
        let avg = (i + j) as f64 / 2.0 + 1.0;
        for k in i..=j {
            r[idx[k]] = avg;
        }
        i = j + 1;
    }
    r
}

fn pearson(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let (mx, my) = (x.iter().sum::<f64>() / n, y.iter().sum::<f64>() / n);
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx) * (a - mx);
        syy += (b - my) * (b - my);
    }
    sxy / (sxx * syy).sqrt()
}

/// Spearman rank correlation.
pub fn rank_correlation(x: &[f64], y: &[f64]) -> f64 {
    pearson(&ranks(x), &ranks(y))
}

/// Least-squares slope of `ln y` on `ln x`.
pub fn log_log_slope(x: &[f64], y: &[f64]) -> f64 {
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let n = lx.len() as f64;
    let (mx, my) = (lx.iter().sum::<f64>() / n, ly.iter().sum::<f64>() / n);
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = lx.iter().map(|a| (a - mx) * (a - mx)).sum();
    sxy / sxx
}

pub fn summarize_scaling(spec: &ExperimentSpec, table: &ResultTable, pilots: Vec<Option<PilotReport>>) -> ScalingSummary {
    let cells = spec.grid.cells().unwrap_or_default();
    let points: Vec<ScalingPoint> = table
        .aggregates()
        .into_iter()
        .zip(&cells)
        .map(|(a, cell)| ScalingPoint {
            n: a.n,
            lambda: a.lambda,
            chi: a.chi,
            success_rate: a.success_rate,
            median_t: a.median_t,
            budget_generations: a.budget_generations,
            reference_budget: reference_budget(spec, cell).ok(),
        })
        .collect();
    let mut fits = Vec::new();
    let fit = |axis: &'static str, fixed: usize, sel: Vec<(f64, f64)>| -> Option<ScalingFit> {
        if sel.len() < 2 {
            return None;
        }
        let (x, y): (Vec<f64>, Vec<f64>) = sel.into_iter().unzip();
        Some(ScalingFit { axis, fixed, points: x.len(), slope: log_log_slope(&x, &y), rank_correlation: rank_correlation(&x, &y) })
    };
    for &lambda in &spec.grid.lambda {
        let sel = points
            .iter()
            .filter(|p| p.lambda == lambda)
            .filter_map(|p| p.median_t.map(|m| (p.n as f64, m)))
            .collect();
        fits.extend(fit("n", lambda, sel));
    }
    for &n in &spec.grid.n {
        let sel = points
            .iter()
            .filter(|p| p.n == n)
            .filter_map(|p| p.median_t.map(|m| (p.lambda as f64, m)))
            .collect();
        fits.extend(fit("lambda", n, sel));
    }
    ScalingSummary { points, fits, pilots }
}

/// Median runtime against `n` and `λ` in the polynomial regime.
pub fn experiment_runtime_scaling(spec: &ExperimentSpec) -> Result<(ResultTable, ScalingSummary)> {
    check_trial_kind(spec)?;
    let budgets = cell_budgets(spec)?;
    let (b, pilots): (Vec<u64>, Vec<Option<PilotReport>>) = budgets.into_iter().unzip();
    let table = run_with_budgets(spec, b)?;
    let summary = summarize_scaling(spec, &table, pilots);
    Ok((table, summary))
}

/// Per-generation series of one run.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RunTrajectory {
    pub stream: u64,
    pub hit: bool,
    pub generations: u64,
    /// First generation with `p0 >= γ0`.
    pub phase2_start: Option<u64>,
    pub rows: Vec<GenerationStats>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TrajectoryReport {
    pub budget_generations: u64,
    pub attempts: usize,
    /// Successful runs in stream order, at most `trials` of them.
    pub runs: Vec<RunTrajectory>,
    /// Generations before the hit, over the successful runs.
    pub pre_hit_generations: u64,
    /// Of those, generations where no prey lies in `S0`.
    pub pre_hit_without_s0: u64,
    pub fraction_without_s0: f64,
    /// Runs whose mean predator count at the hit is below `βn` plus half
    /// the initial mean.
    pub descended: usize,
    pub descended_fraction: f64,
}

/// Runs the first cell until `trials` runs hit the target or
/// `max_attempts` runs were made, recording every generation.
pub fn experiment_trajectory(spec: &ExperimentSpec, max_attempts: usize) -> Result<TrajectoryReport> {
    check_trial_kind(spec)?;
    let cell = spec.grid.cells()?[0];
    let budget = cell_budgets(&ExperimentSpec { grid: single_cell_grid(spec), ..spec.clone() })?[0].0;
    let beta_n = cell.beta * cell.n as f64;
    let mut runs = Vec::new();
    let mut attempts = 0;
    while runs.len() < spec.trials && attempts < max_attempts {
        let batch = (spec.trials - runs.len()).min(max_attempts - attempts);
        let recs = (attempts..attempts + batch)
            .into_par_iter()
            .map(|s| {
                let mut cfg = trial_config(spec, &cell, budget, s as u64)?;
                cfg.record_trajectory = true;
                Ok((s as u64, run_trial(&cfg)?))
            })
            .collect::<Result<Vec<_>>>()?;
        attempts += batch;
        for (stream, rec) in recs {
            if rec.hit && runs.len() < spec.trials {
                let phase2_start = rec.trajectory.iter().find(|g| g.p0 >= GAMMA0).map(|g| g.generation);
                runs.push(RunTrajectory { stream, hit: true, generations: rec.generations_run, phase2_start, rows: rec.trajectory });
            }
        }
    }
    let mut pre = 0;
    let mut without = 0;
    let mut descended = 0;
    for r in &runs {
        for g in &r.rows[..r.rows.len() - 1] {
            pre += 1;
            without += (g.prey_in_s0 == 0) as u64;
        }
        let (first, last) = (&r.rows[0], r.rows.last().expect("non-empty"));
        descended += (last.predator_mean < beta_n + first.predator_mean / 2.0) as usize;
    }
    Ok(TrajectoryReport {
        budget_generations: budget,
        attempts,
        pre_hit_generations: pre,
        pre_hit_without_s0: without,
        fraction_without_s0: if pre == 0 { f64::NAN } else { without as f64 / pre as f64 },
        descended,
        descended_fraction: if runs.is_empty() { f64::NAN } else { descended as f64 / runs.len() as f64 },
        runs,
    })
}

fn single_cell_grid(spec: &ExperimentSpec) -> crate::config::Grid {
    let mut g = spec.grid.clone();
    g.n.truncate(1);
    g.lambda.truncate(1);
    g.chi.truncate(1);
    g.delta.truncate(1);
    g.alpha.truncate(1);
    g.beta.truncate(1);
    g.epsilon.truncate(1);
    g.r.truncate(1);
    g
}
