//! Acceptance gate: one PASS/FAIL line per criterion, nonzero exit on any
//! failure.

use std::fs;
use std::time::Instant;

use pdcoea_core::levels::{
    check_growth_bound, conditional_dominance, fraction_stats, validate_level_function, GrowthBound,
};
use pdcoea_core::rng::{index_below, spawn_stream, unit_f64, RandomStream};
use pdcoea_core::theory::{
    bilinear_runtime_budget, error_threshold, level_runtime_bound, mutation_rate_for_delta, BilinearBudgetInputs,
    LevelBoundInputs,
};
use pdcoea_core::{intransitivity_witness, BilinearParams, PairedPopulations, Population};
use pdcoea_harness::checks::{self, CheckOutcome};
use pdcoea_harness::config::{BudgetRule, ExperimentKind, ExperimentSpec, Grid, TargetKind};
use pdcoea_harness::experiment::{experiment_error_threshold, experiment_runtime_scaling, experiment_trajectory};
use pdcoea_harness::table::strip_wall_time;

const SEED: u64 = 20_240_601;
const DOMINANCE_TIME_LIMIT_S: f64 = 1.0;
const SELECTION_SIGMAS: f64 = 6.0;
const SCALING_MIN_SUCCESS: f64 = 0.9;
const TRAJECTORY_MIN_FRACTION: f64 = 0.99;
const CALCULATOR_REL_TOL: f64 = 1e-12;

struct Gate {
    failures: usize,
}

impl Gate {
    fn report(&mut self, id: u32, name: &str, pass: bool, detail: String) {
        if !pass {
            self.failures += 1;
        }
        println!("criterion {id:>2} [{}] {name}: {detail}", if pass { "PASS" } else { "FAIL" });
    }
}

/// Twice the payoff with integer thresholds `2αn`, `2βn`.
struct Oracle {
    a2: i64,
    b2: i64,
}

impl Oracle {
    fn new(n: usize, alpha: f64, beta: f64) -> Self {
        let (a, b) = (2.0 * alpha * n as f64, 2.0 * beta * n as f64);
        assert!((a - a.round()).abs() < 1e-9 && (b - b.round()).abs() < 1e-9);
        Oracle { a2: a.round() as i64, b2: b.round() as i64 }
    }

    fn g(&self, cx: usize, cy: usize) -> i64 {
        let (x, y) = (cx as i64, cy as i64);
        y * (2 * x - self.b2) - self.a2 * x
    }

    fn dom(&self, (x1, y1): (usize, usize), (x2, y2): (usize, usize)) -> bool {
        self.g(x1, y2) >= self.g(x1, y1) && self.g(x1, y1) >= self.g(x2, y1)
    }
}

fn pops(n: usize, xs: &[usize], ys: &[usize]) -> PairedPopulations {
    PairedPopulations::new(Population::from_ones(n, xs).unwrap(), Population::from_ones(n, ys).unwrap()).unwrap()
}

fn rel_err(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
}

fn summary(o: &CheckOutcome) -> String {
    format!("{} checked, {} violations; {}", o.checked, o.violations, o.summary)
}

fn criterion_1(g: &mut Gate) {
    let start = Instant::now();
    let o = checks::dominance();
    let secs = start.elapsed().as_secs_f64();
    g.report(
        1,
        "dominance equivalence (exhaustive, n=10)",
        o.pass && o.checked == 3 * 14_641 && secs < DOMINANCE_TIME_LIMIT_S,
        format!("{} quadruples, {} mismatches, {secs:.3} s (limit {DOMINANCE_TIME_LIMIT_S} s)", o.checked, o.violations),
    );
}

fn criterion_2(g: &mut Gate) {
    let o = checks::intransitivity();
    let p = BilinearParams::new(20, 0.4, 0.6, 0.05).unwrap();
    let oracle = Oracle::new(20, 0.4, 0.6);
    let ok = match intransitivity_witness(&p) {
        Some(c) => {
            let cycle = (0..4).all(|i| oracle.dom(c[i], c[(i + 1) % 4]));
            let broken = !oracle.dom(c[0], c[2]) && !oracle.dom(c[1], c[3]);
            let distinct = (0..4).all(|i| (i + 1..4).all(|j| c[i] != c[j]));
            cycle && broken && distinct
        }
        None => false,
    };
    let mut reflexive = true;
    for (a, b) in checks::DOMINANCE_SETS {
        let oracle = Oracle::new(10, a, b);
        reflexive &= (0..=10).all(|x| (0..=10).all(|y| oracle.dom((x, y), (x, y))));
    }
    g.report(
        2,
        "reflexivity and intransitivity witness",
        o.pass && ok && reflexive,
        format!("{}; cycle confirmed by integer payoff oracle: {ok}", summary(&o)),
    );
}

fn criterion_3(g: &mut Gate) {
    let mut rng = spawn_stream(SEED, 3);
    let (mut checked, mut below, mut disagree) = (0, 0, 0);
    for (a, b) in checks::DOMINANCE_SETS {
        let p = BilinearParams::new(10, a, b, 0.1).unwrap();
        let oracle = Oracle::new(10, a, b);
        let (an2, bn2) = (oracle.a2, oracle.b2);
        for _ in 0..100 {
            let xs: Vec<usize> = (0..6).map(|_| index_below(&mut rng, 11)).collect();
            let ys: Vec<usize> = (0..6).map(|_| index_below(&mut rng, 11)).collect();
            let mut fav = [0u64; 4];
            let mut tot = [0u64; 4];
            for &x1 in &xs {
                for &y1 in &ys {
                    for &x2 in &xs {
                        for &y2 in &ys {
                            let (tx1, tx2, ty1, ty2) = (2 * x1 as i64, 2 * x2 as i64, 2 * y1 as i64, 2 * y2 as i64);
                            let ev = [
                                y1 <= y2 && tx1 > bn2 && tx2 > bn2,
                                y1 >= y2 && tx1 < bn2 && tx2 < bn2,
                                x1 >= x2 && ty1 > an2 && ty2 > an2,
                                x1 <= x2 && ty1 < an2 && ty2 < an2,
                            ];
                            let d = oracle.dom((x1, y1), (x2, y2)) as u64;
                            for k in 0..4 {
                                if ev[k] {
                                    tot[k] += 1;
                                    fav[k] += d;
                                }
                            }
                        }
                    }
                }
            }
            let core = conditional_dominance(&pops(10, &xs, &ys), &p);
            for k in 0..4 {
                match core[k] {
                    Some(c) => {
                        checked += 1;
                        below += (2 * c.favourable < c.total) as u64;
                        disagree += ((c.favourable, c.total) != (fav[k], tot[k])) as u64;
                    }
                    None => disagree += (tot[k] != 0) as u64,
                }
            }
        }
    }
    g.report(
        3,
        "conditional dominance probabilities >= 1/2",
        checked > 0 && below == 0 && disagree == 0,
        format!("{checked} non-null probabilities over 300 populations (lambda=6, n=10), {below} below 1/2, {disagree} disagreements with enumeration oracle"),
    );
}

fn criterion_4(g: &mut Gate) {
    let delta: f64 = 0.5;
    let mut passed = 0;
    let mut total = 0;
    for lambda in [15usize, 20, 30] {
        for m in [2usize, 5, 10] {
            for z in [0.05, 0.3, 1.0] {
                let l = lambda as f64;
                let eta = (1.0 - (1.0 + delta).powf(-0.5)) / l;
                let phi = delta / 2.0;
                let q = l * z / (4.0 + l * z);
                let g_ref = move |k: u64, j: usize| -> f64 {
                    let g1 = eta / (1.0 + eta) * ((m - j) as f64 * l * l - k as f64);
                    let g2 = if j < m { phi * ((-eta * k as f64).exp() / q + (m - 1 - j) as f64 / q) } else { 0.0 };
                    g1 + g2
                };
                total += 1;
                let bound = 3.0 * eta * l * l * m as f64 / z;
                passed += (validate_level_function(g_ref, lambda, m) && g_ref(0, 1) < bound) as usize;
            }
        }
    }
    let rejected = !validate_level_function(|k, _| k as f64, 4, 3);
    let o = checks::level_function().unwrap();
    g.report(
        4,
        "level-function validator",
        passed == total && rejected && o.pass,
        format!("{passed}/{total} grid points accept independently coded g1+g2; g(k,j)=k rejected: {rejected}; suite: {}", o.summary),
    );
}

fn criterion_5(g: &mut Gate) {
    let o = checks::selection(SEED, 20, 100_000).unwrap();
    g.report(5, "selection distribution oracle", o.pass, format!("{} ({SELECTION_SIGMAS} se)", summary(&o)));
}

fn criterion_6(g: &mut Gate) {
    let o = checks::growth(SEED).unwrap();
    // Recompute P_sel(R0) for the unconditional bound by direct enumeration.
    let mut rng: RandomStream = spawn_stream(SEED, 6);
    let mut mismatches = 0;
    let p = BilinearParams::new(10, 0.9, 0.05, 0.1).unwrap();
    let oracle = Oracle::new(10, 0.9, 0.05);
    for _ in 0..50 {
        let xs: Vec<usize> = (0..6).map(|_| if index_below(&mut rng, 2) == 0 { 0 } else { index_below(&mut rng, 11) }).collect();
        let ys: Vec<usize> = (0..6).map(|_| index_below(&mut rng, 11)).collect();
        let pp = pops(10, &xs, &ys);
        let r = check_growth_bound(GrowthBound::R0, &pp, &p).unwrap();
        if r.pass.is_none() {
            continue;
        }
        let mut sel = 0u64;
        for i1 in 0..6 {
            for j1 in 0..6 {
                for i2 in 0..6 {
                    for j2 in 0..6 {
                        let x = if oracle.dom((xs[i1], ys[j1]), (xs[i2], ys[j2])) { xs[i1] } else { xs[i2] };
                        sel += (2 * x < 1) as u64;
                    }
                }
            }
        }
        let p0 = fraction_stats(&pp, 0, 0, &p).unwrap().p0();
        mismatches += (rel_err(r.ratio, sel as f64 / 1296.0 / p0) > 1e-12) as u32;
    }
    g.report(
        6,
        "growth bounds on constructed populations",
        o.pass && mismatches == 0,
        format!("{}; enumeration oracle mismatches: {mismatches}", summary(&o)),
    );
}

fn criterion_7(g: &mut Gate) {
    let mut outs = Vec::new();
    for s in [checks::Suite::SqrtBound, checks::Suite::PowerBound, checks::Suite::ProductMgf] {
        outs.extend(checks::run_suite(s, SEED).unwrap());
    }
    let sqrt_ok = outs[0].checked == 1_000_000;
    g.report(
        7,
        "inequality suite",
        sqrt_ok && outs.iter().all(|o| o.pass),
        outs.iter().map(|o| format!("{}: {}", o.suite, summary(o))).collect::<Vec<_>>().join(" | "),
    );
}

fn criterion_8(g: &mut Gate) {
    let spec = ExperimentSpec {
        kind: ExperimentKind::ErrorThreshold,
        grid: Grid {
            n: vec![100],
            lambda: vec![100],
            chi: vec![0.05, 0.7, 1.4],
            delta: vec![],
            alpha: vec![0.0],
            beta: vec![1.0],
            epsilon: vec![0.1],
            r: vec![1.0],
        },
        trials: 20,
        seed: SEED,
        budget: BudgetRule::Generations(10_000),
        target: TargetKind::AllOnes,
        c_pp: 1.000001,
        out: None,
    };
    let (_, s) = experiment_error_threshold(&spec).unwrap();
    let rates: Vec<String> = s.points.iter().map(|p| format!("chi={}: {}/{}", p.chi, p.hits, p.trials)).collect();
    let last = s.points.last().unwrap();
    g.report(
        8,
        "error-threshold collapse",
        last.chi == 1.4 && last.hits == 0 && s.non_increasing,
        format!("{}; non-increasing: {}", rates.join(", "), s.non_increasing),
    );
}

fn criterion_9(g: &mut Gate) {
    let spec = ExperimentSpec {
        kind: ExperimentKind::RuntimeScaling,
        grid: Grid {
            n: vec![30, 50, 80],
            lambda: vec![100],
            chi: vec![],
            delta: vec![0.01],
            alpha: vec![0.9],
            beta: vec![0.05],
            epsilon: vec![0.1],
            r: vec![1.0],
        },
        trials: 30,
        seed: SEED,
        budget: BudgetRule::Pilot,
        target: TargetKind::Epsilon,
        c_pp: 1.000001,
        out: None,
    };
    let (table, s) = experiment_runtime_scaling(&spec).unwrap();
    let chi_ok = rel_err(s.points[0].chi, mutation_rate_for_delta(0.01).unwrap()) < 1e-15;
    let multiples = table.rows.iter().all(|r| r.t_interactions % r.lambda as u64 == 0);
    let rates_ok = s.points.iter().all(|p| p.success_rate >= SCALING_MIN_SUCCESS);
    let medians: Vec<f64> = s.points.iter().map(|p| p.median_t.unwrap_or(f64::NAN)).collect();
    let monotone = medians.windows(2).all(|w| w[0] <= w[1]);
    let cells: Vec<String> = s
        .points
        .iter()
        .map(|p| format!("n={} success {:.2} median T {} budget {}", p.n, p.success_rate, p.median_t.unwrap_or(f64::NAN), p.budget_generations))
        .collect();
    g.report(
        9,
        "polynomial-regime solvability",
        chi_ok && multiples && rates_ok && monotone,
        format!("{}; T multiples of lambda: {multiples}; median non-decreasing: {monotone}", cells.join(", ")),
    );
}

fn criterion_10(g: &mut Gate) {
    let spec = ExperimentSpec {
        kind: ExperimentKind::Trajectory,
        grid: Grid {
            n: vec![100],
            lambda: vec![100],
            chi: vec![],
            delta: vec![0.01],
            alpha: vec![0.9],
            beta: vec![0.05],
            epsilon: vec![0.1],
            r: vec![1.0],
        },
        trials: 30,
        seed: SEED,
        budget: BudgetRule::Pilot,
        target: TargetKind::Epsilon,
        c_pp: 1.000001,
        out: None,
    };
    spec.validate().unwrap();
    let r = experiment_trajectory(&spec, 90).unwrap();
    g.report(
        10,
        "no prey in S0 before the hit",
        r.runs.len() == 30 && r.fraction_without_s0 >= TRAJECTORY_MIN_FRACTION,
        format!(
            "{} successful runs, {}/{} pre-hit generations without prey in S0 ({:.4}, need {TRAJECTORY_MIN_FRACTION})",
            r.runs.len(),
            r.pre_hit_without_s0,
            r.pre_hit_generations,
            r.fraction_without_s0
        ),
    );
}

fn cli(args: &[&str]) -> (i32, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let code = pdcoea_harness::cli::run(std::iter::once("pdcoea").chain(args.iter().copied()), &mut out, &mut err);
    (code, String::from_utf8(out).unwrap())
}

fn without_wall_ms(s: &str) -> String {
    s.lines().filter(|l| !l.contains("wall_ms")).collect::<Vec<_>>().join("\n")
}

fn criterion_11(g: &mut Gate) {
    let run_args = ["run", "--n", "50", "--lambda", "20", "--delta", "0.01", "--seed", "7", "--budget", "3000"];
    let (c1, a) = cli(&run_args);
    let (c2, b) = cli(&run_args);
    let run_same = c1 == 0 && c2 == 0 && without_wall_ms(&a) == without_wall_ms(&b);

    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("sweep.cfg");
    fs::write(
        &cfg,
        "kind = runtime-scaling\nn = 20,30\nlambda = 10\nchi = 0.05\nalpha = 0.9\nbeta = 0.05\nepsilon = 0.1\ntrials = 4\nseed = 3\nbudget = 4000\n",
    )
    .unwrap();
    let mut texts = Vec::new();
    for (i, threads) in [1usize, 3].into_iter().enumerate() {
        let sub = dir.path().join(format!("w{i}"));
        fs::create_dir(&sub).unwrap();
        let out = sub.join("r.csv");
        let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
        let (code, stdout) = pool.install(|| cli(&["sweep", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]));
        let csv = fs::read_to_string(&out).unwrap();
        let json = fs::read_to_string(out.with_extension("json")).unwrap();
        let prefix = sub.to_str().unwrap();
        texts.push((code, stdout.replace(prefix, ""), strip_wall_time(&csv).replace(prefix, ""), json.replace(prefix, "")));
    }
    let sweep_same = texts[0] == texts[1] && texts[0].0 == 0;
    g.report(
        11,
        "determinism of run and sweep",
        run_same && sweep_same,
        format!("run output identical: {run_same}; sweep CSV, sidecar and stdout identical across 1 and 3 workers: {sweep_same}"),
    );
}

fn criterion_12(g: &mut Gate) {
    let mut rng = spawn_stream(SEED, 12);
    let mut u = move || unit_f64(&mut rng);
    let mut worst: f64 = 0.0;
    for _ in 0..10 {
        // Level-based bound.
        let m = 1 + (u() * 20.0) as usize;
        let lambda = 1 + (u() * 200.0) as usize;
        let delta = 0.01 + 0.99 * u();
        let c_pp = 1.0 + 3.0 * u() + 1e-9;
        let z: Vec<f64> = (1..m).map(|_| 0.001 + 0.999 * u()).collect();
        let got = level_runtime_bound(&LevelBoundInputs { m, lambda, delta, z: z.clone(), c_pp }).unwrap().value;
        let l = lambda as f64;
        let mut inv = 0.0;
        for zi in &z {
            inv += 1.0 / zi;
        }
        let want = c_pp * l * (m as f64 * l * l + 16.0 * inv) / delta;
        worst = worst.max(rel_err(got, want));

        // Mutation rate.
        let d = 1e-6 + (1.0 / 41.0 - 2e-6) * u();
        let chi = mutation_rate_for_delta(d).unwrap();
        worst = worst.max(rel_err(chi, ((42.0f64).ln() - (41.0f64).ln() - d.ln_1p()) / 2.0));

        // Runtime budget, with chi in the range where delta > 0.
        let chi = 0.001 + 0.01 * u();
        let n = 10 + (u() * 500.0) as usize;
        let alpha = 0.5 + 0.5 * u();
        let epsilon = (2.0 / n as f64) + 0.2 * u();
        let beta = 0.01 + 0.4 * u();
        let r = 0.5 + 10.0 * u();
        let got = bilinear_runtime_budget(&BilinearBudgetInputs { n, lambda, chi, alpha, beta, epsilon, r, c_pp, delta: None })
            .unwrap()
            .value;
        let dd = (42.0 / 41.0) * (-2.0 * chi).exp() - 1.0;
        let nf = n as f64;
        let want = 2.0 * r * c_pp * l / dd * (l * l * nf + 23.0 * nf / chi * -(beta * (1.0 - alpha + epsilon)).ln());
        worst = worst.max(rel_err(got, want));

        // Error threshold.
        let d = 0.499 * u() + 1e-6;
        worst = worst.max(rel_err(error_threshold(d).unwrap(), 2.0f64.ln() / (1.0 - 2.0 * d)));
    }
    g.report(
        12,
        "calculators against formula re-evaluation",
        worst <= CALCULATOR_REL_TOL,
        format!("40 evaluations, worst relative error {worst:.2e} (tolerance {CALCULATOR_REL_TOL:.0e})"),
    );
}

fn main() {
    let mut g = Gate { failures: 0 };
    criterion_1(&mut g);
    criterion_2(&mut g);
    criterion_3(&mut g);
    criterion_4(&mut g);
    criterion_5(&mut g);
    criterion_6(&mut g);
    criterion_7(&mut g);
    criterion_8(&mut g);
    criterion_9(&mut g);
    criterion_10(&mut g);
    criterion_11(&mut g);
    criterion_12(&mut g);
    println!("acceptance: {} of 12 criteria passed", 12 - g.failures);
    if g.failures > 0 {
        std::process::exit(1);
    }
}
