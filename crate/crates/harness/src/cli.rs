//! The `pdcoea` command line.
//!
//! Exit codes: 0 success, 1 usage or invalid input, 2 failed checks, 3 I/O.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use pdcoea_core::theory::{
    bilinear_runtime_budget, error_threshold, level_runtime_bound, mutation_rate_for_delta, BilinearBudgetInputs,
    LevelBoundInputs,
};
use pdcoea_core::{run_trial, TrialRecord};
use serde::Serialize;

use crate::checks::{run_suite, Suite};
use crate::config::{BudgetRule, Cell, ExperimentKind, ExperimentSpec, Grid, TargetKind, DEFAULT_C_PP};
use crate::error::{HarnessError, Result};
use crate::experiment::{
    experiment_error_threshold, experiment_runtime_scaling, experiment_trajectory, run_experiment, trial_config,
    TrajectoryReport,
};
use crate::table::ResultTable;

#[derive(Parser, Debug)]
#[command(name = "pdcoea", version, about = "Pairwise-dominance co-evolution on the Bilinear game")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// One trial; prints the trial record as JSON.
    Run(RunArgs),
    /// Runs the experiment described by a config file.
    Sweep(SweepArgs),
    /// Success rate against mutation rate.
    Threshold(ThresholdArgs),
    /// Median runtime against n and lambda.
    Scaling(ScalingArgs),
    /// Per-generation series of successful runs.
    Trajectory(TrajectoryArgs),
    /// Runtime bounds and mutation-rate thresholds.
    Bound(BoundArgs),
    /// Numeric and exhaustive check suites.
    Check(CheckArgs),
    /// Long-format plot data from a results file.
    EmitPlots(EmitPlotsArgs),
}

#[derive(Args, Debug, Clone)]
struct GameArgs {
    #[arg(long, default_value_t = 0.9)]
    alpha: f64,
    #[arg(long, default_value_t = 0.05)]
    beta: f64,
    #[arg(long, default_value_t = 0.1)]
    epsilon: f64,
}

#[derive(Args, Debug)]
#[command(group(clap::ArgGroup::new("rate").required(true).args(["chi", "delta"])))]
struct RunArgs {
    #[arg(long)]
    n: usize,
    #[arg(long)]
    lambda: usize,
    #[arg(long)]
    chi: Option<f64>,
    /// Derive chi from this growth margin.
    #[arg(long)]
    delta: Option<f64>,
    #[command(flatten)]
    game: GameArgs,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Child stream of the seed.
    #[arg(long, default_value_t = 0)]
    stream: u64,
    /// Generation budget.
    #[arg(long, default_value_t = 10_000)]
    budget: u64,
    #[arg(long, default_value = "epsilon")]
    target: TargetKind,
    /// Include per-generation statistics.
    #[arg(long)]
    trajectory: bool,
    /// Also write the record to this file.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct SweepArgs {
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long)]
    budget: Option<BudgetRule>,
    /// Results CSV; overrides the config's `out`.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct ThresholdArgs {
    #[arg(long, default_value_t = 100)]
    n: usize,
    #[arg(long, default_value_t = 100)]
    lambda: usize,
    #[arg(long, value_delimiter = ',', default_value = "0.05,0.2,0.5,0.7,1.0,1.4")]
    chi: Vec<f64>,
    #[arg(long, default_value_t = 0.0)]
    alpha: f64,
    #[arg(long, default_value_t = 1.0)]
    beta: f64,
    #[arg(long, default_value_t = 0.1)]
    epsilon: f64,
    #[arg(long, default_value = "all-ones")]
    target: TargetKind,
    #[arg(long, default_value_t = 20)]
    trials: usize,
    #[arg(long, default_value = "10000")]
    budget: BudgetRule,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct ScalingArgs {
    #[arg(long, value_delimiter = ',', default_value = "30,50,80")]
    n: Vec<usize>,
    #[arg(long, value_delimiter = ',', default_value = "100")]
    lambda: Vec<usize>,
    /// Explicit mutation rates; otherwise derived from --delta.
    #[arg(long, value_delimiter = ',')]
    chi: Vec<f64>,
    #[arg(long, value_delimiter = ',', default_value = "0.01")]
    delta: Vec<f64>,
    #[command(flatten)]
    game: GameArgs,
    #[arg(long, default_value_t = 30)]
    trials: usize,
    #[arg(long, default_value = "pilot")]
    budget: BudgetRule,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long, default_value_t = DEFAULT_C_PP)]
    c_pp: f64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct TrajectoryArgs {
    #[arg(long, default_value_t = 100)]
    n: usize,
    #[arg(long, default_value_t = 100)]
    lambda: usize,
    #[arg(long)]
    chi: Option<f64>,
    #[arg(long, default_value_t = 0.01)]
    delta: f64,
    #[command(flatten)]
    game: GameArgs,
    /// Successful runs to collect.
    #[arg(long, default_value_t = 30)]
    runs: usize,
    #[arg(long, default_value_t = 90)]
    max_attempts: usize,
    #[arg(long, default_value = "pilot")]
    budget: BudgetRule,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Long-format per-generation CSV.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct BoundArgs {
    #[command(subcommand)]
    kind: BoundKind,
}

#[derive(Subcommand, Debug)]
enum BoundKind {
    /// `(c''λ/δ)(mλ² + 16 Σ 1/z_i)` for a level-based process.
    LevelBased {
        #[arg(long)]
        m: usize,
        #[arg(long)]
        lambda: usize,
        #[arg(long)]
        delta: f64,
        /// `z_1, ..., z_{m-1}`.
        #[arg(long, value_delimiter = ',')]
        z: Vec<f64>,
        #[arg(long, default_value_t = DEFAULT_C_PP)]
        c_pp: f64,
    },
    /// Interaction budget for the Bilinear target.
    #[command(group(clap::ArgGroup::new("rate").required(true).args(["chi", "delta"])))]
    Bilinear {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        lambda: usize,
        #[arg(long)]
        chi: Option<f64>,
        #[arg(long)]
        delta: Option<f64>,
        #[command(flatten)]
        game: GameArgs,
        #[arg(long, default_value_t = 1.0)]
        r: f64,
        #[arg(long, default_value_t = DEFAULT_C_PP)]
        c_pp: f64,
    },
    /// Mutation rate for a growth margin.
    MutationRate {
        #[arg(long)]
        delta: f64,
    },
    /// Mutation rate above which small targets become exponentially hard.
    ErrorThreshold {
        #[arg(long)]
        delta: f64,
    },
}

#[derive(Args, Debug)]
struct CheckArgs {
    #[arg(long, value_enum, default_value_t = Suite::All)]
    suite: Suite,
    #[arg(long, default_value_t = 1)]
    seed: u64,
}

#[derive(Args, Debug)]
struct EmitPlotsArgs {
    #[arg(long)]
    results: PathBuf,
    /// Output directory.
    #[arg(long)]
    out: PathBuf,
}

/// Runs the CLI with `args` (program name first) and returns the exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let text = e.render().to_string();
            let _ = if code == 0 { out.write_all(text.as_bytes()) } else { err.write_all(text.as_bytes()) };
            return code;
        }
    };
    match dispatch(cli.command, out) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            e.exit_code()
        }
    }
}

fn io_out(e: std::io::Error) -> HarnessError {
    HarnessError::io("<stdout>", e)
}

fn rate(chi: Option<f64>, delta: Option<f64>) -> Result<(f64, Option<f64>)> {
    match (chi, delta) {
        (Some(c), d) => Ok((c, d)),
        (None, Some(d)) => Ok((mutation_rate_for_delta(d)?, Some(d))),
        (None, None) => Err(HarnessError::Spec("one of --chi or --delta is required".into())),
    }
}

fn write_json<T: Serialize>(out: &mut dyn Write, v: &T) -> Result<()> {
    writeln!(out, "{}", serde_json::to_string_pretty(v)?).map_err(io_out)
}

fn write_file(path: &Path, text: &str) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| HarnessError::io(dir, e))?;
    }
    fs::write(path, text).map_err(|e| HarnessError::io(path, e))
}

#[derive(Serialize)]
struct RunOutput<'a> {
    #[serde(flatten)]
    record: &'a TrialRecord,
    n: usize,
    lambda: usize,
    chi: f64,
    wall_ms: f64,
}

fn dispatch(cmd: Command, out: &mut dyn Write) -> Result<i32> {
    match cmd {
        Command::Run(a) => {
            let (chi, delta) = rate(a.chi, a.delta)?;
            let cell = Cell { n: a.n, lambda: a.lambda, chi, delta, alpha: a.game.alpha, beta: a.game.beta, epsilon: a.game.epsilon, r: 1.0 };
            let mut spec = ExperimentSpec::single(ExperimentKind::RuntimeScaling, cell, 1, a.seed, BudgetRule::Generations(a.budget));
            spec.target = a.target;
            let mut cfg = trial_config(&spec, &cell, a.budget, a.stream)?;
            cfg.record_trajectory = a.trajectory;
            let start = Instant::now();
            let record = run_trial(&cfg)?;
            let wall_ms = (start.elapsed().as_secs_f64() * 1e6).round() / 1e3;
            let text = serde_json::to_string_pretty(&RunOutput { record: &record, n: a.n, lambda: a.lambda, chi, wall_ms })?;
            if let Some(path) = &a.out {
                write_file(path, &(text.clone() + "\n"))?;
            }
            writeln!(out, "{text}").map_err(io_out)?;
            Ok(0)
        }
        Command::Sweep(a) => sweep(a, out),
        Command::Threshold(a) => {
            let spec = ExperimentSpec {
                kind: ExperimentKind::ErrorThreshold,
                grid: Grid {
                    n: vec![a.n],
                    lambda: vec![a.lambda],
                    chi: a.chi,
                    delta: vec![],
                    alpha: vec![a.alpha],
                    beta: vec![a.beta],
                    epsilon: vec![a.epsilon],
                    r: vec![1.0],
                },
                trials: a.trials,
                seed: a.seed,
                budget: a.budget,
                target: a.target,
                c_pp: DEFAULT_C_PP,
                out: a.out.clone(),
            };
            let (table, summary) = experiment_error_threshold(&spec)?;
            for p in &summary.points {
                writeln!(out, "chi={} n={} lambda={}: {}/{} hits, success rate {:.3}", p.chi, p.n, p.lambda, p.hits, p.trials, p.success_rate)
                    .map_err(io_out)?;
            }
            writeln!(out, "success rate non-increasing in chi: {}", summary.non_increasing).map_err(io_out)?;
            for (n, l, lo, hi) in &summary.transitions {
                writeln!(out, "transition n={n} lambda={l}: between chi={lo} and chi={hi} (ln 2 = {:.4})", summary.ln2).map_err(io_out)?;
            }
            if let Some(path) = &a.out {
                persist(&table, path, out)?;
                let side = path.with_extension("summary.json");
                write_file(&side, &(serde_json::to_string_pretty(&summary)? + "\n"))?;
            }
            Ok(0)
        }
        Command::Scaling(a) => {
            let spec = ExperimentSpec {
                kind: ExperimentKind::RuntimeScaling,
                grid: Grid {
                    n: a.n,
                    lambda: a.lambda,
                    delta: if a.chi.is_empty() { a.delta } else { vec![] },
                    chi: a.chi,
                    alpha: vec![a.game.alpha],
                    beta: vec![a.game.beta],
                    epsilon: vec![a.game.epsilon],
                    r: vec![1.0],
                },
                trials: a.trials,
                seed: a.seed,
                budget: a.budget,
                target: TargetKind::Epsilon,
                c_pp: a.c_pp,
                out: a.out.clone(),
            };
            let (table, summary) = experiment_runtime_scaling(&spec)?;
            for p in &summary.points {
                let median = p.median_t.map(|m| m.to_string()).unwrap_or_else(|| "-".into());
                let reference = p.reference_budget.map(|b| format!("{b:.4e}")).unwrap_or_else(|| "-".into());
                let regime = if (p.lambda as f64) < 2000.0 * (p.n as f64).ln() { " (lambda below the proven regime)" } else { "" };
                writeln!(
                    out,
                    "n={} lambda={} chi={:.6}: success {:.3}, median T {median}, budget {} generations, bound {reference}{regime}",
                    p.n, p.lambda, p.chi, p.success_rate, p.budget_generations
                )
                .map_err(io_out)?;
            }
            for f in &summary.fits {
                writeln!(out, "log-log slope of median T in {} (other axis {}): {:.3}, rank correlation {:.3}", f.axis, f.fixed, f.slope, f.rank_correlation)
                    .map_err(io_out)?;
            }
            if let Some(path) = &a.out {
                persist(&table, path, out)?;
                let side = path.with_extension("summary.json");
                write_file(&side, &(serde_json::to_string_pretty(&summary)? + "\n"))?;
            }
            Ok(0)
        }
        Command::Trajectory(a) => {
            let (chi, delta) = rate(a.chi, Some(a.delta))?;
            let cell = Cell { n: a.n, lambda: a.lambda, chi, delta, alpha: a.game.alpha, beta: a.game.beta, epsilon: a.game.epsilon, r: 1.0 };
            let spec = ExperimentSpec::single(ExperimentKind::Trajectory, cell, a.runs, a.seed, a.budget);
            let report = experiment_trajectory(&spec, a.max_attempts)?;
            writeln!(
                out,
                "{} successful runs of {} attempts, budget {} generations",
                report.runs.len(),
                report.attempts,
                report.budget_generations
            )
            .map_err(io_out)?;
            writeln!(
                out,
                "pre-hit generations without prey in S0: {}/{} ({:.4})",
                report.pre_hit_without_s0, report.pre_hit_generations, report.fraction_without_s0
            )
            .map_err(io_out)?;
            writeln!(out, "runs with predator descent at the hit: {}/{}", report.descended, report.runs.len()).map_err(io_out)?;
            if let Some(path) = &a.out {
                write_file(path, &trajectory_csv(&report))?;
                writeln!(out, "wrote {}", path.display()).map_err(io_out)?;
            }
            Ok(0)
        }
        Command::Bound(a) => {
            match a.kind {
                BoundKind::LevelBased { m, lambda, delta, z, c_pp } => {
                    write_json(out, &level_runtime_bound(&LevelBoundInputs { m, lambda, delta, z, c_pp })?)?
                }
                BoundKind::Bilinear { n, lambda, chi, delta, game, r, c_pp } => {
                    let (chi, delta) = rate(chi, delta)?;
                    let b = bilinear_runtime_budget(&BilinearBudgetInputs {
                        n,
                        lambda,
                        chi,
                        alpha: game.alpha,
                        beta: game.beta,
                        epsilon: game.epsilon,
                        r,
                        c_pp,
                        delta,
                    })?;
                    write_json(out, &serde_json::json!({ "chi": chi, "budget": b }))?
                }
                BoundKind::MutationRate { delta } => {
                    write_json(out, &serde_json::json!({ "delta": delta, "chi": mutation_rate_for_delta(delta)? }))?
                }
                BoundKind::ErrorThreshold { delta } => {
                    write_json(out, &serde_json::json!({ "delta": delta, "error_threshold": error_threshold(delta)? }))?
                }
            }
            Ok(0)
        }
        Command::Check(a) => {
            let outcomes = run_suite(a.suite, a.seed)?;
            for o in &outcomes {
                writeln!(out, "{o}").map_err(io_out)?;
            }
            let failed = outcomes.iter().filter(|o| !o.pass).count();
            writeln!(out, "{} of {} checks passed", outcomes.len() - failed, outcomes.len()).map_err(io_out)?;
            Ok(if failed == 0 { 0 } else { 2 })
        }
        Command::EmitPlots(a) => {
            let table = ResultTable::read(&a.results)?;
            let (rates, hits) = plot_data(&table);
            let (p1, p2) = (a.out.join("cells.csv"), a.out.join("hit_times.csv"));
            write_file(&p1, &rates)?;
            write_file(&p2, &hits)?;
            writeln!(out, "wrote {}\nwrote {}", p1.display(), p2.display()).map_err(io_out)?;
            Ok(0)
        }
    }
}

fn persist(table: &ResultTable, path: &Path, out: &mut dyn Write) -> Result<()> {
    let side = table.write(path)?;
    writeln!(out, "wrote {}\nwrote {}", path.display(), side.display()).map_err(io_out)
}

fn sweep(a: SweepArgs, out: &mut dyn Write) -> Result<i32> {
    let text = fs::read_to_string(&a.config).map_err(|e| HarnessError::io(&a.config, e))?;
    let mut spec = ExperimentSpec::parse(&text)?;
    if let Some(s) = a.seed {
        spec.seed = s;
    }
    if let Some(t) = a.trials {
        spec.trials = t;
    }
    if let Some(b) = a.budget {
        spec.budget = b;
    }
    if a.out.is_some() {
        spec.out = a.out;
    }
    spec.validate()?;
    match spec.kind {
        ExperimentKind::CheckSuites => {
            let outcomes = run_suite(Suite::All, spec.seed)?;
            for o in &outcomes {
                writeln!(out, "{o}").map_err(io_out)?;
            }
            Ok(if outcomes.iter().all(|o| o.pass) { 0 } else { 2 })
        }
        ExperimentKind::BoundTable => {
            let text = bound_table(&spec)?;
            match &spec.out {
                Some(p) => {
                    write_file(p, &text)?;
                    writeln!(out, "wrote {}", p.display()).map_err(io_out)?;
                }
                None => out.write_all(text.as_bytes()).map_err(io_out)?,
            }
            Ok(0)
        }
        _ => {
            let table = run_experiment(&spec)?;
            match &spec.out {
                Some(p) => {
                    persist(&table, p, out)?;
                    for a in table.aggregates() {
                        let median = a.median_t.map(|m| m.to_string()).unwrap_or_else(|| "-".into());
                        writeln!(out, "n={} lambda={} chi={}: {}/{} hits, median T {median}", a.n, a.lambda, a.chi, a.hits, a.trials)
                            .map_err(io_out)?;
                    }
                }
                None => out.write_all(table.to_csv()?.as_bytes()).map_err(io_out)?,
            }
            Ok(0)
        }
    }
}

fn bound_table(spec: &ExperimentSpec) -> Result<String> {
    let mut s = String::from("n,lambda,chi,delta,alpha,beta,epsilon,r,c_pp,budget,prefactor,population_term,mutation_term\n");
    for c in spec.grid.cells()? {
        let b = bilinear_runtime_budget(&BilinearBudgetInputs {
            n: c.n,
            lambda: c.lambda,
            chi: c.chi,
            alpha: c.alpha,
            beta: c.beta,
            epsilon: c.epsilon,
            r: c.r,
            c_pp: spec.c_pp,
            delta: c.delta,
        })?;
        s.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{},{},{},{}\n",
            c.n, c.lambda, c.chi, b.delta, c.alpha, c.beta, c.epsilon, c.r, spec.c_pp, b.value, b.prefactor, b.population_term, b.mutation_term
        ));
    }
    Ok(s)
}

fn trajectory_csv(report: &TrajectoryReport) -> String {
    let mut s = String::from(
        "stream,generation,phase,predator_mean,predator_min,predator_max,prey_mean,prey_min,prey_max,p0,q0,prey_in_s0,prey_in_band,current_level\n",
    );
    for run in &report.runs {
        for g in &run.rows {
            let phase = match run.phase2_start {
                Some(t) if g.generation >= t => 2,
                _ => 1,
            };
            let level = g.current_level.map(|l| l.to_string()).unwrap_or_default();
            s.push_str(&format!(
                "{},{},{},{},{},{},{},{},{},{},{},{},{},{}\n",
                run.stream,
                g.generation,
                phase,
                g.predator_mean,
                g.predator_min,
                g.predator_max,
                g.prey_mean,
                g.prey_min,
                g.prey_max,
                g.p0,
                g.q0,
                g.prey_in_s0,
                g.prey_in_band,
                level
            ));
        }
    }
    s
}

/// `(per-cell metrics, per-hit times)`, both long format.
fn plot_data(table: &ResultTable) -> (String, String) {
    let mut cells = String::from("kind,n,lambda,chi,alpha,beta,epsilon,r,metric,value\n");
    let kind = table.spec.kind.as_str();
    for a in table.aggregates() {
        let key = format!("{kind},{},{},{},{},{},{},{}", a.n, a.lambda, a.chi, a.alpha, a.beta, a.epsilon, a.r);
        let metrics = [
            ("trials", Some(a.trials as f64)),
            ("hits", Some(a.hits as f64)),
            ("success_rate", Some(a.success_rate)),
            ("median_t", a.median_t),
            ("q25_t", a.q25_t),
            ("q75_t", a.q75_t),
            ("budget_generations", Some(a.budget_generations as f64)),
        ];
        for (name, v) in metrics {
            if let Some(v) = v {
                cells.push_str(&format!("{key},{name},{v}\n"));
            }
        }
    }
    let mut hits = String::from("kind,n,lambda,chi,alpha,beta,epsilon,r,trial,T_interactions\n");
    for r in table.rows.iter().filter(|r| r.hit) {
        hits.push_str(&format!(
            "{kind},{},{},{},{},{},{},{},{},{}\n",
            r.n, r.lambda, r.chi, r.alpha, r.beta, r.epsilon, r.r, r.trial, r.t_interactions
        ));
    }
    (cells, hits)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn call(args: &[&str]) -> (i32, String, String) {
        let mut o = Vec::new();
        let mut e = Vec::new();
        let code = run(std::iter::once("pdcoea").chain(args.iter().copied()), &mut o, &mut e);
        (code, String::from_utf8(o).unwrap(), String::from_utf8(e).unwrap())
    }

    #[test]
    fn usage_errors() {
        assert_eq!(call(&["frobnicate"]).0, 1);
        assert_eq!(call(&["run", "--n", "10"]).0, 1);
        assert_eq!(call(&["run", "--n", "10", "--lambda", "4", "--chi", "0.5", "--bogus"]).0, 1);
        let (code, out, _) = call(&["--help"]);
        assert_eq!(code, 0);
        assert!(out.contains("threshold"));
    }

    #[test]
    fn invalid_values_exit_one() {
        let (code, _, err) = call(&["run", "--n", "10", "--lambda", "4", "--chi", "50"]);
        assert_eq!(code, 1);
        assert!(err.contains("chi"), "{err}");
    }

    #[test]
    fn bound_mutation_rate() {
        let (code, out, _) = call(&["bound", "mutation-rate", "--delta", "0.01"]);
        assert_eq!(code, 0);
        let v: serde_json::Value = serde_json::from_str(&out).unwrap();
        let chi = v["chi"].as_f64().unwrap();
        assert!((chi - 0.5 * (42.0f64 / (41.0 * 1.01)).ln()).abs() < 1e-15);
    }

    #[test]
    fn check_exit_code() {
        let (code, out, _) = call(&["check", "--suite", "dominance"]);
        assert_eq!(code, 0);
        assert!(out.contains("11^4 quadruples verified"));
    }
}
