//! Competitive co-evolution on bit strings: the pairwise-dominance
//! co-evolutionary algorithm, the Bilinear maximin game, level-based
//! diagnostics and runtime-bound calculators.
//!
//! ```
//! use pdcoea_core::{run_trial, BilinearParams, PdcoeaConfig};
//!
//! let game = BilinearParams::new(20, 0.9, 0.05, 0.1).unwrap();
//! let cfg = PdcoeaConfig::new(game, 20, 0.01, 7, 50);
//! let record = run_trial(&cfg).unwrap();
//! assert_eq!(record.t_interactions % 20, 0);
//! ```

pub mod bilinear;
pub mod bits;
pub mod error;
pub mod game;
pub mod levels;
pub mod pdcoea;
pub mod rng;
pub mod theory;

pub use bilinear::{
    classify_predator, classify_prey, dominates, dominates_by_onecounts, intransitivity_witness,
    payoff, target_hit, worst_case_f, BilinearParams, Region,
};
pub use bits::{BitVector, PairedPopulations, Population};
pub use error::{Error, Result};
pub use game::Game;
pub use pdcoea::{
    mutate, pdcoea_interaction, run_trial, select_pair, step_generation, GenerationStats,
    InteractionDistribution, Pdcoea, PdcoeaConfig, Target, TrialRecord,
};
pub use rng::{spawn_stream, RandomStream};

/// Uniformly random bit vector of length `n`.
pub fn uniform_bitvector<R: rand::RngCore + ?Sized>(n: usize, rng: &mut R) -> Result<BitVector> {
    BitVector::random(n, rng)
}
