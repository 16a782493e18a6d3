//! The generic co-evolutionary process and its pairwise-dominance instance.
//!
//! [`step_generation`] draws `λ` independent offspring pairs from an
//! [`InteractionDistribution`]. [`Pdcoea`] is the distribution that samples
//! two predator/prey pairs uniformly, keeps the dominant one and mutates it.

use rand::RngCore;
use serde::Serialize;

use crate::bilinear::{target_hit, BilinearParams};
use crate::bits::{BitVector, PairedPopulations};
use crate::error::{invalid, Result};
use crate::game::Game;
use crate::levels::{build_bilinear_levels, LevelSequence, GAMMA0};
use crate::rng::{binomial, index_below, spawn_stream};

/// A sampler `D(P, Q)` of one offspring interaction.
pub trait InteractionDistribution {
    fn sample<R: RngCore + ?Sized>(
        &self,
        pops: &PairedPopulations,
        rng: &mut R,
    ) -> (BitVector, BitVector);
}

impl<D: InteractionDistribution + ?Sized> InteractionDistribution for &D {
    fn sample<R: RngCore + ?Sized>(
        &self,
        pops: &PairedPopulations,
        rng: &mut R,
    ) -> (BitVector, BitVector) {
        (**self).sample(pops, rng)
    }
}

/// Indices `[x1, y1, x2, y2]` of one selection round.
pub type Draws = [usize; 4];

/// Predator and prey index picked from fixed draws: `(x1, y1)` if it
/// dominates `(x2, y2)`, otherwise `(x2, y2)`.
#[inline]
pub fn select_from_draws<G: Game + ?Sized>(
    pops: &PairedPopulations,
    game: &G,
    [i1, j1, i2, j2]: Draws,
) -> (usize, usize) {
    let (p, q) = (pops.predators(), pops.prey());
    if game.dominates(p.get(i1), q.get(j1), p.get(i2), q.get(j2)) {
        (i1, j1)
    } else {
        (i2, j2)
    }
}

/// Draws the four indices in the order `x1, y1, x2, y2`.
#[inline]
pub fn sample_draws<R: RngCore + ?Sized>(lambda: usize, rng: &mut R) -> Draws {
    [
        index_below(rng, lambda),
        index_below(rng, lambda),
        index_below(rng, lambda),
        index_below(rng, lambda),
    ]
}

pub fn select_pair<G: Game + ?Sized, R: RngCore + ?Sized>(
    pops: &PairedPopulations,
    game: &G,
    rng: &mut R,
) -> (BitVector, BitVector) {
    let draws = sample_draws(pops.lambda(), rng);
    let (i, j) = select_from_draws(pops, game, draws);
    (pops.predators().get(i).clone(), pops.prey().get(j).clone())
}

fn check_chi(chi: f64, n: usize) -> Result<()> {
    if !(0.0..=n as f64).contains(&chi) {
        return Err(invalid(format!("chi = {chi} outside [0, {n}]")));
    }
    Ok(())
}

/// Flips each bit independently with probability `chi / n`.
///
/// Samples the number of flips from Binomial(n, chi/n) and then that many
/// distinct positions uniformly (Floyd's algorithm).
pub fn mutate<R: RngCore + ?Sized>(v: &BitVector, chi: f64, rng: &mut R) -> Result<BitVector> {
    check_chi(chi, v.len())?;
    Ok(mutate_unchecked(v, chi / v.len() as f64, rng))
}

pub(crate) fn mutate_unchecked<R: RngCore + ?Sized>(
    v: &BitVector,
    rate: f64,
    rng: &mut R,
) -> BitVector {
    let n = v.len();
    let flips = binomial(rng, n as u64, rate) as usize;
    if flips == 0 {
        return v.clone();
    }
    if flips == n {
        return v.complement();
    }
    let mut mask = BitVector::zeros(n).expect("n > 0");
    for j in n - flips..n {
        let t = index_below(rng, j + 1);
        if mask.get(t) == Some(true) {
            mask.set_bit(j);
        } else {
            mask.set_bit(t);
        }
    }
    v.xor(&mask)
}

/// Pairwise dominance selection followed by bitwise mutation of both
/// members of the selected pair.
#[derive(Clone, Debug)]
pub struct Pdcoea<G> {
    game: G,
    chi: f64,
}

impl<G: Game> Pdcoea<G> {
    pub fn new(game: G, chi: f64) -> Result<Self> {
        check_chi(chi, game.n())?;
        Ok(Self { game, chi })
    }

    pub fn game(&self) -> &G {
        &self.game
    }

    pub fn chi(&self) -> f64 {
        self.chi
    }
}

impl<G: Game> InteractionDistribution for Pdcoea<G> {
    fn sample<R: RngCore + ?Sized>(
        &self,
        pops: &PairedPopulations,
        rng: &mut R,
    ) -> (BitVector, BitVector) {
        let rate = self.chi / pops.n() as f64;
        let draws = sample_draws(pops.lambda(), rng);
        let (i, j) = select_from_draws(pops, &self.game, draws);
        let x = mutate_unchecked(pops.predators().get(i), rate, rng);
        let y = mutate_unchecked(pops.prey().get(j), rate, rng);
        (x, y)
    }
}

/// One interaction of the pairwise-dominance algorithm.
pub fn pdcoea_interaction<G: Game + ?Sized, R: RngCore + ?Sized>(
    pops: &PairedPopulations,
    game: &G,
    chi: f64,
    rng: &mut R,
) -> Result<(BitVector, BitVector)> {
    check_chi(chi, pops.n())?;
    Ok(Pdcoea { game, chi }.sample(pops, rng))
}

/// Produces `(P_{t+1}, Q_{t+1})` from `λ` independent interactions; slot `i`
/// of both populations comes from interaction `i`.
pub fn step_generation<D: InteractionDistribution + ?Sized, R: RngCore + ?Sized>(
    pops: &PairedPopulations,
    d: &D,
    rng: &mut R,
) -> PairedPopulations {
    let lambda = pops.lambda();
    let mut predators = Vec::with_capacity(lambda);
    let mut prey = Vec::with_capacity(lambda);
    for _ in 0..lambda {
        let (x, y) = d.sample(pops, rng);
        predators.push(x);
        prey.push(y);
    }
    PairedPopulations::from_offspring(predators, prey, pops.generation() + 1)
}

/// Outcome of [`run_process`].
#[derive(Clone, Debug)]
pub struct ProcessOutcome {
    pub hit: bool,
    /// Generation at which the target was first met, or the budget.
    pub generations: u64,
    pub last: PairedPopulations,
}

/// Runs the process from `pops`, checking `is_hit` at every generation
/// `t = 0, 1, ..., budget` before producing offspring. `observe` sees every
/// checked population.
pub fn run_process<D, R>(
    mut pops: PairedPopulations,
    d: &D,
    budget: u64,
    rng: &mut R,
    mut is_hit: impl FnMut(&PairedPopulations) -> bool,
    mut observe: impl FnMut(&PairedPopulations),
) -> ProcessOutcome
where
    D: InteractionDistribution + ?Sized,
    R: RngCore + ?Sized,
{
    let start = pops.generation();
    loop {
        observe(&pops);
        let t = pops.generation() - start;
        if is_hit(&pops) {
            return ProcessOutcome { hit: true, generations: t, last: pops };
        }
        if t >= budget {
            return ProcessOutcome { hit: false, generations: t, last: pops };
        }
        pops = step_generation(&pops, d, rng);
    }
}

/// The set whose first contact ends a run.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(rename_all = "kebab-case", tag = "kind")]
pub enum Target {
    /// Some predator with `|x| < βn` and some prey with `(α-ε)n <= |y| < αn`.
    Epsilon,
    /// The predator `x*` and the prey `y*` both present.
    Pair {
        #[serde(serialize_with = "ser_bits")]
        predator: BitVector,
        #[serde(serialize_with = "ser_bits")]
        prey: BitVector,
    },
}

fn ser_bits<S: serde::Serializer>(v: &BitVector, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.collect_str(v)
}

impl Target {
    /// The all-one predator paired with the all-one prey.
    pub fn all_ones(n: usize) -> Result<Self> {
        let v = BitVector::filled(n)?;
        Ok(Target::Pair { predator: v.clone(), prey: v })
    }

    pub fn is_hit(&self, pops: &PairedPopulations, game: &BilinearParams) -> bool {
        match self {
            Target::Epsilon => target_hit(pops, game),
            Target::Pair { predator, prey } => {
                pops.predators().iter().any(|x| x == predator) && pops.prey().iter().any(|y| y == prey)
            }
        }
    }
}

/// Settings of one run of the pairwise-dominance algorithm on the Bilinear game.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PdcoeaConfig {
    pub lambda: usize,
    pub chi: f64,
    pub seed: u64,
    /// Index of the child stream of `seed` the run draws from.
    pub stream: u64,
    pub budget_generations: u64,
    pub game: BilinearParams,
    pub target: Target,
    /// Keep one [`GenerationStats`] row per checked generation.
    pub record_trajectory: bool,
}

impl PdcoeaConfig {
    pub fn new(game: BilinearParams, lambda: usize, chi: f64, seed: u64, budget_generations: u64) -> Self {
        Self {
            lambda,
            chi,
            seed,
            stream: 0,
            budget_generations,
            game,
            target: Target::Epsilon,
            record_trajectory: false,
        }
    }

    pub fn n(&self) -> usize {
        self.game.n()
    }

    pub fn validate(&self) -> Result<()> {
        if self.lambda == 0 {
            return Err(invalid("lambda must be positive"));
        }
        if !(self.chi > 0.0 && self.chi <= self.n() as f64) {
            return Err(invalid(format!("chi = {} outside (0, n]", self.chi)));
        }
        if self.budget_generations == 0 {
            return Err(invalid("budget must be at least one generation"));
        }
        if let Target::Pair { predator, prey } = &self.target {
            if predator.len() != self.n() || prey.len() != self.n() {
                return Err(invalid("target length differs from n"));
            }
        }
        Ok(())
    }
}

/// Summary of one generation `(P_t, Q_t)`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GenerationStats {
    pub generation: u64,
    pub predator_mean: f64,
    pub predator_min: usize,
    pub predator_max: usize,
    pub prey_mean: f64,
    pub prey_min: usize,
    pub prey_max: usize,
    /// `|Q ∩ S0|`: prey with `|y| >= αn`.
    pub prey_in_s0: usize,
    /// Predators with `|x| < βn`.
    pub predators_in_r0: usize,
    /// Prey in the target band `(α-ε)n <= |y| < αn`.
    pub prey_in_band: usize,
    pub p0: f64,
    pub q0: f64,
    /// Index into the Bilinear level sequence, when one exists for the game.
    pub current_level: Option<usize>,
}

impl GenerationStats {
    pub fn of(pops: &PairedPopulations, game: &BilinearParams, levels: Option<&LevelSequence>) -> Self {
        let xs = pops.predators().one_counts();
        let ys = pops.prey().one_counts();
        let lambda = xs.len() as f64;
        let mean = |v: &[usize]| v.iter().sum::<usize>() as f64 / lambda;
        let predators_in_r0 = xs.iter().filter(|&&c| game.in_r0(c)).count();
        let prey_in_s0 = ys.iter().filter(|&&c| game.in_s0(c)).count();
        Self {
            generation: pops.generation(),
            predator_mean: mean(&xs),
            predator_min: *xs.iter().min().expect("non-empty"),
            predator_max: *xs.iter().max().expect("non-empty"),
            prey_mean: mean(&ys),
            prey_min: *ys.iter().min().expect("non-empty"),
            prey_max: *ys.iter().max().expect("non-empty"),
            prey_in_s0,
            predators_in_r0,
            prey_in_band: ys.iter().filter(|&&c| game.in_target_band(c)).count(),
            p0: predators_in_r0 as f64 / lambda,
            q0: prey_in_s0 as f64 / lambda,
            current_level: levels.map(|l| l.current_level_counts(&xs, &ys, GAMMA0)),
        }
    }
}

/// Outcome of one run.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TrialRecord {
    pub hit: bool,
    /// `tλ` at the first hit, or `budget·λ` when the budget ran out.
    #[serde(rename = "T_interactions")]
    pub t_interactions: u64,
    pub generations_run: u64,
    pub seed: u64,
    pub stream: u64,
    pub trajectory: Vec<GenerationStats>,
}

/// Initialises both populations uniformly at random and runs until the
/// target is met or the generation budget is spent.
pub fn run_trial(cfg: &PdcoeaConfig) -> Result<TrialRecord> {
    cfg.validate()?;
    let mut rng = spawn_stream(cfg.seed, cfg.stream);
    let pops = PairedPopulations::random(cfg.lambda, cfg.n(), &mut rng)?;
    let d = Pdcoea::new(cfg.game, cfg.chi)?;
    let levels = if cfg.record_trajectory {
        build_bilinear_levels(&cfg.game).ok()
    } else {
        None
    };
    let mut trajectory = Vec::new();
    let outcome = run_process(
        pops,
        &d,
        cfg.budget_generations,
        &mut rng,
        |p| cfg.target.is_hit(p, &cfg.game),
        |p| {
            if cfg.record_trajectory {
                trajectory.push(GenerationStats::of(p, &cfg.game, levels.as_ref()));
            }
        },
    );
    Ok(TrialRecord {
        hit: outcome.hit,
        t_interactions: outcome.generations * cfg.lambda as u64,
        generations_run: outcome.generations,
        seed: cfg.seed,
        stream: cfg.stream,
        trajectory,
    })
}
