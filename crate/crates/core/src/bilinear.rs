//! The Bilinear maximin game `g(x, y) = |y| (|x| - βn) - αn |x|`.
//!
//! Every quantity depends on the strategies only through their one-counts,
//! so most functions here come in two flavours: one over [`BitVector`]s and
//! one over counts.

use serde::Serialize;

use crate::bits::{BitVector, PairedPopulations};
use crate::error::{ensure_same_len, invalid, Result};
use crate::game::{payoff_dominance, Game};

// αn, βn and (α-ε)n within this distance of an integer are snapped to it, so
// that parameters like α = 0.9, n = 30 give exact thresholds.
const SNAP_TOL: f64 = 1e-9;

fn snap(v: f64) -> f64 {
    let r = v.round();
    if (v - r).abs() < SNAP_TOL {
        r
    } else {
        v
    }
}

/// Parameters `(n, α, β, ε)` of the Bilinear game and its approximation target.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct BilinearParams {
    n: usize,
    alpha: f64,
    beta: f64,
    epsilon: f64,
    #[serde(skip)]
    alpha_n: f64,
    #[serde(skip)]
    beta_n: f64,
    #[serde(skip)]
    target_lo: f64,
}

impl BilinearParams {
    pub fn new(n: usize, alpha: f64, beta: f64, epsilon: f64) -> Result<Self> {
        if n == 0 {
            return Err(invalid("n must be positive"));
        }
        for (name, v) in [("alpha", alpha), ("beta", beta)] {
            if !(0.0..=1.0).contains(&v) {
                return Err(invalid(format!("{name} = {v} outside [0, 1]")));
            }
        }
        if !epsilon.is_finite() || epsilon * (n as f64) < 1.0 - SNAP_TOL {
            return Err(invalid(format!("epsilon = {epsilon} below 1/n")));
        }
        let nf = n as f64;
        Ok(Self {
            n,
            alpha,
            beta,
            epsilon,
            alpha_n: snap(alpha * nf),
            beta_n: snap(beta * nf),
            target_lo: snap((alpha - epsilon) * nf),
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    /// `αn`, snapped to an integer when within rounding distance of one.
    pub fn alpha_n(&self) -> f64 {
        self.alpha_n
    }

    pub fn beta_n(&self) -> f64 {
        self.beta_n
    }

    /// `(α - ε)n`: the lower end of the prey target band.
    pub fn target_lo(&self) -> f64 {
        self.target_lo
    }

    /// Whether `α - ε >= 4/5` and `β < ε`, the regime with a polynomial
    /// runtime guarantee. Informational only.
    pub fn in_polynomial_regime(&self) -> bool {
        self.alpha - self.epsilon >= 0.8 - 1e-12 && self.beta < self.epsilon
    }

    #[inline]
    pub fn payoff_counts(&self, cx: usize, cy: usize) -> f64 {
        let (x, y) = (cx as f64, cy as f64);
        y * (x - self.beta_n) - self.alpha_n * x
    }

    /// The one-count form of dominance:
    /// `|y2|(|x1| - βn) >= |y1|(|x1| - βn)` and `|x1|(|y1| - αn) >= |x2|(|y1| - αn)`.
    #[inline]
    pub fn dominates_counts(&self, cx1: usize, cy1: usize, cx2: usize, cy2: usize) -> bool {
        let dx = cx1 as f64 - self.beta_n;
        let dy = cy1 as f64 - self.alpha_n;
        cy2 as f64 * dx >= cy1 as f64 * dx && cx1 as f64 * dy >= cx2 as f64 * dy
    }

    #[inline]
    pub fn in_r0(&self, cx: usize) -> bool {
        (cx as f64) < self.beta_n
    }

    #[inline]
    pub fn in_s0(&self, cy: usize) -> bool {
        cy as f64 >= self.alpha_n
    }

    /// `(α - ε)n <= |y| < αn`.
    #[inline]
    pub fn in_target_band(&self, cy: usize) -> bool {
        let y = cy as f64;
        y >= self.target_lo && y < self.alpha_n
    }

    /// Worst-case payoff of a predator with `cx` ones against any prey.
    pub fn worst_case_counts(&self, cx: usize) -> f64 {
        // g is affine in |y|, so the minimum sits at |y| = 0 or |y| = n.
        self.payoff_counts(cx, 0).min(self.payoff_counts(cx, self.n))
    }

    fn check_count(&self, c: usize) -> Result<()> {
        if c > self.n {
            return Err(invalid(format!("one-count {c} exceeds n = {}", self.n)));
        }
        Ok(())
    }

    fn check_len(&self, v: &BitVector) -> Result<()> {
        ensure_same_len(self.n, v.len())
    }
}

impl Game for BilinearParams {
    fn n(&self) -> usize {
        self.n
    }

    fn payoff(&self, x: &BitVector, y: &BitVector) -> f64 {
        self.payoff_counts(x.ones(), y.ones())
    }

    fn dominates(&self, x1: &BitVector, y1: &BitVector, x2: &BitVector, y2: &BitVector) -> bool {
        self.dominates_counts(x1.ones(), y1.ones(), x2.ones(), y2.ones())
    }
}

/// One cell of the predator partition `R0, R1(k), R2(k)` or the prey
/// partition `S0, S1(l), S2(l)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum Region {
    /// `|x| < βn`
    R0,
    /// `βn <= |x| < n - k`
    R1(usize),
    /// `|x| >= n - k`
    R2(usize),
    /// `|y| >= αn`
    S0,
    /// `l <= |y| < αn`
    S1(usize),
    /// `|y| < l`
    S2(usize),
}

pub fn payoff(x: &BitVector, y: &BitVector, p: &BilinearParams) -> Result<f64> {
    p.check_len(x)?;
    p.check_len(y)?;
    Ok(p.payoff(x, y))
}

/// `f(x) = min_y g(x, y)`.
pub fn worst_case_f(x: &BitVector, p: &BilinearParams) -> Result<f64> {
    p.check_len(x)?;
    Ok(p.worst_case_counts(x.ones()))
}

/// Pairwise dominance evaluated through the payoff function.
///
/// When `αn` or `βn` is not an integer the payoffs carry rounding error, so
/// payoffs within a relative `1e-12` count as tied.
pub fn dominates(
    x1: &BitVector,
    y1: &BitVector,
    x2: &BitVector,
    y2: &BitVector,
    p: &BilinearParams,
) -> Result<bool> {
    for v in [x1, y1, x2, y2] {
        p.check_len(v)?;
    }
    Ok(payoff_dominance(p.payoff(x1, y2), p.payoff(x1, y1), p.payoff(x2, y1)))
}

pub fn dominates_by_onecounts(
    cx1: usize,
    cy1: usize,
    cx2: usize,
    cy2: usize,
    p: &BilinearParams,
) -> Result<bool> {
    for c in [cx1, cy1, cx2, cy2] {
        p.check_count(c)?;
    }
    Ok(p.dominates_counts(cx1, cy1, cx2, cy2))
}

pub fn classify_predator_count(cx: usize, k: usize, p: &BilinearParams) -> Result<Region> {
    p.check_count(cx)?;
    if k as f64 > p.n as f64 - p.beta_n + SNAP_TOL {
        return Err(invalid(format!("k = {k} outside [0, (1-β)n]")));
    }
    Ok(if p.in_r0(cx) {
        Region::R0
    } else if cx < p.n - k {
        Region::R1(k)
    } else {
        Region::R2(k)
    })
}

pub fn classify_predator(x: &BitVector, k: usize, p: &BilinearParams) -> Result<Region> {
    p.check_len(x)?;
    classify_predator_count(x.ones(), k, p)
}

pub fn classify_prey_count(cy: usize, l: usize, p: &BilinearParams) -> Result<Region> {
    p.check_count(cy)?;
    if l as f64 >= p.alpha_n {
        return Err(invalid(format!("l = {l} outside [0, αn)")));
    }
    Ok(if p.in_s0(cy) {
        Region::S0
    } else if cy >= l {
        Region::S1(l)
    } else {
        Region::S2(l)
    })
}

pub fn classify_prey(y: &BitVector, l: usize, p: &BilinearParams) -> Result<Region> {
    p.check_len(y)?;
    classify_prey_count(y.ones(), l, p)
}

/// Some predator lies in `R0` and some prey has `(α - ε)n <= |y| < αn`.
pub fn target_hit(pops: &PairedPopulations, p: &BilinearParams) -> bool {
    pops.predators().iter().any(|x| p.in_r0(x.ones()))
        && pops.prey().iter().any(|y| p.in_target_band(y.ones()))
}

/// A one-count pair `(|x|, |y|)`.
pub type CountPair = (usize, usize);

fn dom(p: &BilinearParams, a: CountPair, b: CountPair) -> bool {
    p.dominates_counts(a.0, a.1, b.0, b.1)
}

/// Checks that `c` is a dominance 4-cycle of distinct pairs
/// `c0 ≽ c1 ≽ c2 ≽ c3 ≽ c0` in which neither diagonal pair is comparable.
pub fn is_intransitive_cycle(c: &[CountPair; 4], p: &BilinearParams) -> bool {
    let distinct = (0..4).all(|i| (i + 1..4).all(|j| c[i] != c[j]));
    distinct
        && (0..4).all(|i| dom(p, c[i], c[(i + 1) % 4]))
        && (0..2).all(|i| !dom(p, c[i], c[i + 2]) && !dom(p, c[i + 2], c[i]))
}

fn search_cycle(points: &[CountPair], p: &BilinearParams) -> Option<[CountPair; 4]> {
    let m = points.len();
    let succ: Vec<Vec<usize>> = (0..m)
        .map(|i| {
            (0..m)
                .filter(|&j| j != i && dom(p, points[i], points[j]))
                .collect()
        })
        .collect();
    let incomparable = |i: usize, j: usize| !dom(p, points[i], points[j]) && !dom(p, points[j], points[i]);
    for a in 0..m {
        for &b in &succ[a] {
            for &c in &succ[b] {
                if c == a || !incomparable(a, c) {
                    continue;
                }
                for &d in &succ[c] {
                    if d == a || d == b || !incomparable(b, d) || !dom(p, points[d], points[a]) {
                        continue;
                    }
                    return Some([points[a], points[b], points[c], points[d]]);
                }
            }
        }
    }
    None
}

/// Finds a dominance 4-cycle showing the relation is not transitive.
///
/// Searches the 7×7 block of one-count pairs around `(βn, αn)` first and
/// falls back to the whole `(n+1)²` grid.
pub fn intransitivity_witness(p: &BilinearParams) -> Option<[CountPair; 4]> {
    let n = p.n as i64;
    let (bx, ay) = (p.beta_n.floor() as i64, p.alpha_n.floor() as i64);
    let near: Vec<CountPair> = (bx - 3..=bx + 3)
        .flat_map(|cx| (ay - 3..=ay + 3).map(move |cy| (cx, cy)))
        .filter(|&(cx, cy)| (0..=n).contains(&cx) && (0..=n).contains(&cy))
        .map(|(cx, cy)| (cx as usize, cy as usize))
        .collect();
    search_cycle(&near, p).or_else(|| {
        let all: Vec<CountPair> = (0..=p.n)
            .flat_map(|cx| (0..=p.n).map(move |cy| (cx, cy)))
            .collect();
        search_cycle(&all, p)
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bits::Population;
    use crate::rng::spawn_stream;
    use proptest::prelude::*;

    fn params(n: usize, alpha: f64, beta: f64) -> BilinearParams {
        BilinearParams::new(n, alpha, beta, 1.0 / n as f64).unwrap()
    }

    fn v(n: usize, c: usize) -> BitVector {
        BitVector::with_ones(n, c).unwrap()
    }

    #[test]
    fn payoff_examples() {
        let p = params(10, 0.4, 0.6);
        assert_eq!(payoff(&v(10, 10), &v(10, 10), &p).unwrap(), 0.0);
        assert_eq!(payoff(&v(10, 0), &v(10, 0), &p).unwrap(), 0.0);
        for cy in 0..=10 {
            assert_eq!(payoff(&v(10, 6), &v(10, cy), &p).unwrap(), -24.0);
        }
    }

    #[test]
    fn payoff_rejects_mismatch() {
        let p = params(10, 0.4, 0.6);
        assert!(payoff(&v(9, 0), &v(10, 0), &p).is_err());
    }

    #[test]
    fn payoff_depends_on_counts_only() {
        let p = params(40, 0.3, 0.6);
        let mut rng = spawn_stream(1, 0);
        for _ in 0..200 {
            let x = BitVector::random(40, &mut rng).unwrap();
            let y = BitVector::random(40, &mut rng).unwrap();
            let x2 = v(40, x.ones());
            assert_eq!(payoff(&x, &y, &p).unwrap(), payoff(&x2, &y, &p).unwrap());
        }
    }

    fn brute_min(p: &BilinearParams, cx: usize) -> f64 {
        (0..=p.n())
            .map(|cy| p.payoff_counts(cx, cy))
            .fold(f64::INFINITY, f64::min)
    }

    #[test]
    fn worst_case_matches_brute_force() {
        for n in 1..=32 {
            for (a, b) in [(0.0, 0.0), (0.5, 0.5), (0.4, 0.6), (0.9, 0.05), (0.0, 1.0), (1.0, 0.3)] {
                let p = params(n, a, b);
                for cx in 0..=n {
                    assert_eq!(worst_case_f(&v(n, cx), &p).unwrap(), brute_min(&p, cx), "n={n} a={a} b={b} cx={cx}");
                }
            }
        }
    }

    #[test]
    fn worst_case_zero_vector() {
        let p = params(12, 0.25, 0.5);
        assert_eq!(worst_case_f(&v(12, 0), &p).unwrap(), -6.0 * 12.0);
    }

    #[test]
    fn worst_case_over_all_prey_n8() {
        let p = params(8, 0.5, 0.5);
        for cx in 0..=8 {
            let x = v(8, cx);
            let min = (0u32..256)
                .map(|bits| {
                    let y = BitVector::from_bits(&(0..8).map(|i| bits >> i & 1 == 1).collect::<Vec<_>>()).unwrap();
                    payoff(&x, &y, &p).unwrap()
                })
                .fold(f64::INFINITY, f64::min);
            assert_eq!(worst_case_f(&x, &p).unwrap(), min);
        }
    }

    #[test]
    fn worst_case_onemax_scaling() {
        // With α = 0 and β = 1 the adversary always plays the all-one prey and
        // f is OneMax shifted by n and scaled by n.
        let p = params(10, 0.0, 1.0);
        for cx in 0..=10 {
            assert_eq!(worst_case_f(&v(10, cx), &p).unwrap(), 10.0 * (cx as f64 - 10.0));
        }
    }

    #[test]
    fn dominance_examples() {
        let p = params(10, 0.4, 0.6);
        let d = |a, b, c, e| dominates(&v(10, a), &v(10, b), &v(10, c), &v(10, e), &p).unwrap();
        assert!(d(5, 5, 5, 5));
        assert!(d(7, 2, 8, 3));
        assert!(!d(7, 2, 8, 1));
        assert!(dominates_by_onecounts(7, 2, 8, 3, &p).unwrap());
        assert!(dominates_by_onecounts(4, 4, 4, 4, &p).unwrap());
        assert!(dominates_by_onecounts(11, 2, 8, 3, &p).is_err());
    }

    #[test]
    fn onecount_form_agrees_exhaustively() {
        let vals = [0.0, 0.3, 0.4, 0.6, 1.0];
        for n in [5usize, 10, 17] {
            for &a in &vals {
                for &b in &vals {
                    let p = params(n, a, b);
                    let vs: Vec<BitVector> = (0..=n).map(|c| v(n, c)).collect();
                    for c1 in 0..=n {
                        for d1 in 0..=n {
                            for c2 in 0..=n {
                                for d2 in 0..=n {
                                    assert_eq!(
                                        dominates(&vs[c1], &vs[d1], &vs[c2], &vs[d2], &p).unwrap(),
                                        dominates_by_onecounts(c1, d1, c2, d2, &p).unwrap(),
                                        "n={n} a={a} b={b} ({c1},{d1},{c2},{d2})"
                                    );
                                }
                            }
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn reflexive_everywhere_small() {
        for n in 1..=8 {
            let p = params(n, 0.4, 0.6);
            for c in 0..=n {
                for d in 0..=n {
                    assert!(p.dominates_counts(c, d, c, d));
                }
            }
        }
    }

    #[test]
    fn antisymmetric_unless_all_ties() {
        let p = params(20, 0.4, 0.6);
        let mut rng = spawn_stream(9, 0);
        let mut draw = || crate::rng::index_below(&mut rng, 21);
        for _ in 0..10_000 {
            let a = (draw(), draw());
            let b = (draw(), draw());
            if p.dominates_counts(a.0, a.1, b.0, b.1) && p.dominates_counts(b.0, b.1, a.0, a.1) {
                // Mutual dominance forces every inequality to be tight.
                let g = |x, y| p.payoff_counts(x, y);
                assert_eq!(g(a.0, b.1), g(a.0, a.1));
                assert_eq!(g(a.0, a.1), g(b.0, a.1));
                assert_eq!(g(b.0, a.1), g(b.0, b.1));
                assert_eq!(g(b.0, b.1), g(a.0, b.1));
            }
        }
    }

    #[test]
    fn known_cycle_is_intransitive() {
        // Around (βn, αn) = (12, 8) with εn = 1.
        let p = params(20, 0.4, 0.6);
        let cycle = [(13, 6), (14, 9), (11, 10), (10, 7)];
        assert!(is_intransitive_cycle(&cycle, &p));
    }

    #[test]
    fn witness_found_and_verified() {
        let p = params(20, 0.4, 0.6);
        let w = intransitivity_witness(&p).expect("cycle");
        assert!(is_intransitive_cycle(&w, &p));
    }

    #[test]
    fn any_returned_witness_verifies() {
        for n in [1, 4, 9, 16] {
            for (a, b) in [(0.0, 0.0), (0.5, 0.5), (0.9, 0.05), (0.25, 0.75)] {
                let p = params(n, a, b);
                if let Some(w) = intransitivity_witness(&p) {
                    assert!(is_intransitive_cycle(&w, &p));
                }
            }
        }
    }

    #[test]
    fn classify_examples() {
        let p = params(10, 0.4, 0.6);
        assert_eq!(classify_predator(&v(10, 0), 0, &p).unwrap(), Region::R0);
        assert_eq!(classify_predator(&v(10, 6), 2, &p).unwrap(), Region::R1(2));
        assert_eq!(classify_predator(&v(10, 9), 2, &p).unwrap(), Region::R2(2));
        assert!(classify_predator(&v(10, 9), 5, &p).is_err());
        assert_eq!(classify_prey(&v(10, 10), 3, &p).unwrap(), Region::S0);
        assert_eq!(classify_prey(&v(10, 2), 1, &p).unwrap(), Region::S1(1));
        assert_eq!(classify_prey(&v(10, 0), 1, &p).unwrap(), Region::S2(1));
        assert!(classify_prey(&v(10, 0), 4, &p).is_err());
    }

    #[test]
    fn regions_partition() {
        for n in 1..=12 {
            for (a, b) in [(0.4, 0.6), (0.9, 0.05), (1.0, 0.0), (0.5, 1.0)] {
                let p = params(n, a, b);
                let kmax = n - p.beta_n().ceil() as usize;
                for k in 0..=kmax {
                    for c in 0..=n {
                        let r = classify_predator_count(c, k, &p).unwrap();
                        let hits = [p.in_r0(c), !p.in_r0(c) && c < n - k, c >= n - k && !p.in_r0(c)];
                        assert_eq!(hits.iter().filter(|h| **h).count(), 1);
                        assert!(matches!(r, Region::R0 | Region::R1(_) | Region::R2(_)));
                    }
                }
                for l in (0..=n).filter(|&l| (l as f64) < p.alpha_n()) {
                    for c in 0..=n {
                        let r = classify_prey_count(c, l, &p).unwrap();
                        let expect = if c as f64 >= p.alpha_n() {
                            Region::S0
                        } else if c >= l {
                            Region::S1(l)
                        } else {
                            Region::S2(l)
                        };
                        assert_eq!(r, expect);
                    }
                }
            }
        }
    }

    #[test]
    fn target_examples() {
        let p = BilinearParams::new(10, 0.4, 0.6, 0.2).unwrap();
        let ones = Population::uniform(3, &v(10, 10)).unwrap();
        let any = Population::from_ones(10, &[0, 3, 7]).unwrap();
        assert!(!target_hit(&PairedPopulations::new(ones.clone(), any.clone()).unwrap(), &p));
        let preds = Population::from_ones(10, &[10, 0, 10]).unwrap();
        let prey = Population::from_ones(10, &[10, 2, 10]).unwrap();
        assert!(target_hit(&PairedPopulations::new(preds, prey).unwrap(), &p));
        let p0 = BilinearParams::new(10, 0.4, 0.0, 0.2).unwrap();
        for c in 0..=10 {
            let single = PairedPopulations::new(
                Population::from_ones(10, &[c]).unwrap(),
                Population::from_ones(10, &[3]).unwrap(),
            )
            .unwrap();
            assert!(!target_hit(&single, &p0));
        }
    }

    #[test]
    fn params_validation() {
        assert!(BilinearParams::new(0, 0.5, 0.5, 1.0).is_err());
        assert!(BilinearParams::new(10, 1.5, 0.5, 0.1).is_err());
        assert!(BilinearParams::new(10, 0.5, -0.1, 0.1).is_err());
        assert!(BilinearParams::new(10, 0.5, 0.5, 0.05).is_err());
        let p = BilinearParams::new(30, 0.9, 0.05, 0.1).unwrap();
        assert_eq!(p.alpha_n(), 27.0);
        assert_eq!(p.beta_n(), 1.5);
        assert_eq!(p.target_lo(), 24.0);
        assert!(p.in_polynomial_regime());
        assert!(!params(10, 0.4, 0.6).in_polynomial_regime());
    }

    proptest! {
        #[test]
        fn f_is_lower_envelope(n in 1usize..40, a in 0.0f64..=1.0, b in 0.0f64..=1.0, cx in 0usize..40) {
            let p = params(n, a, b);
            let cx = cx % (n + 1);
            let f = p.worst_case_counts(cx);
            for cy in 0..=n {
                prop_assert!(f <= p.payoff_counts(cx, cy));
            }
        }
    }
}
