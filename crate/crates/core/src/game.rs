//! Two-player zero-sum games over bit strings and the pairwise dominance
//! relation used for selection.

use crate::bits::BitVector;

/// A payoff `g(x, y)` that the predator `x` maximises and the prey `y`
/// minimises.
pub trait Game {
    /// Strategy length both players use.
    fn n(&self) -> usize;

    fn payoff(&self, x: &BitVector, y: &BitVector) -> f64;

    /// `(x1, y1)` dominates `(x2, y2)` iff `g(x1, y2) >= g(x1, y1) >= g(x2, y1)`.
    ///
    /// Ties count as dominance.
    fn dominates(&self, x1: &BitVector, y1: &BitVector, x2: &BitVector, y2: &BitVector) -> bool {
        payoff_dominance(self.payoff(x1, y2), self.payoff(x1, y1), self.payoff(x2, y1))
    }
}

/// `hi >= mid >= lo` with payoffs that differ only by rounding treated as
/// equal.
pub fn payoff_dominance(hi: f64, mid: f64, lo: f64) -> bool {
    at_least(hi, mid) && at_least(mid, lo)
}

fn at_least(a: f64, b: f64) -> bool {
    a >= b - TIE_TOLERANCE * (1.0 + a.abs() + b.abs())
}

/// Relative gap below which two payoffs compare equal.
pub const TIE_TOLERANCE: f64 = 1e-12;

impl<G: Game + ?Sized> Game for &G {
    fn n(&self) -> usize {
        (**self).n()
    }

    fn payoff(&self, x: &BitVector, y: &BitVector) -> f64 {
        (**self).payoff(x, y)
    }

    fn dominates(&self, x1: &BitVector, y1: &BitVector, x2: &BitVector, y2: &BitVector) -> bool {
        (**self).dominates(x1, y1, x2, y2)
    }
}
