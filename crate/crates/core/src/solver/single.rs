//! One-object first-price grid auction with the same discretization and the
//! same greatest-argmax best-reply dynamics. With zero synergy the two-object
//! game splits into two copies of this game, which makes it an independent
//! reference for the decoupled case.

use std::collections::HashSet;

use crate::distribution::Marginal;
use crate::model::BidGrid;
use crate::scalar::Scalar;

/// Bid levels of both bidders, one per value point.
type Profile = (Vec<u32>, Vec<u32>);

#[derive(Clone, Debug)]
pub struct SingleObjectGame<T> {
    values: Vec<T>,
    weights: Vec<T>,
    bids: BidGrid,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SingleSolve<T> {
    /// Bid level of each value point, for each bidder.
    pub profile: Profile,
    pub converged: bool,
    pub iterations: usize,
    pub max_regret: T,
}

impl<T: Scalar> SingleObjectGame<T> {
    pub fn new(marginal: &Marginal<T>, bids: BidGrid) -> Self {
        Self {
            values: marginal.points.clone(),
            weights: marginal.weights.clone(),
            bids,
        }
    }

    /// Win probability of each level: opponent mass below plus half the tie.
    fn win_table(&self, opponent: &[u32]) -> Vec<T> {
        let mut mass = vec![T::zero(); self.bids.len()];
        for (level, w) in opponent.iter().zip(&self.weights) {
            mass[*level as usize] = mass[*level as usize].clone() + w.clone();
        }
        let mut below = T::zero();
        mass.into_iter()
            .map(|m| {
                let q = below.clone() + T::half() * m.clone();
                below = below.clone() + m;
                q
            })
            .collect()
    }

    fn payoffs(&self, wins: &[T], value: &T) -> Vec<T> {
        wins.iter()
            .enumerate()
            .map(|(k, q)| q.clone() * (value.clone() - self.bids.value::<T>(k as u32)))
            .collect()
    }

    /// Greatest maximizer for each value point.
    pub fn best_reply(&self, opponent: &[u32]) -> Vec<u32> {
        let wins = self.win_table(opponent);
        self.values
            .iter()
            .map(|x| {
                let pay = self.payoffs(&wins, x);
                let best = pay.iter().skip(1).fold(pay[0].clone(), |a, b| T::max_of(a, b.clone()));
                let floor = best - T::tolerance();
                pay.iter().rposition(|p| *p >= floor).expect("nonempty grid") as u32
            })
            .collect()
    }

    pub fn regret(&self, own: &[u32], opponent: &[u32]) -> T {
        let wins = self.win_table(opponent);
        let mut worst = T::zero();
        for (x, b) in self.values.iter().zip(own) {
            let pay = self.payoffs(&wins, x);
            let best = pay.iter().skip(1).fold(pay[0].clone(), |a, v| T::max_of(a, v.clone()));
            let gain = best - pay[*b as usize].clone();
            if gain > T::tolerance() {
                worst = T::max_of(worst, gain);
            }
        }
        worst
    }

    fn profile_regret(&self, profile: &Profile) -> T {
        T::max_of(self.regret(&profile.0, &profile.1), self.regret(&profile.1, &profile.0))
    }

    /// Alternating greatest best replies from `(start, start)`, stopped the
    /// same way as the two-object solver: at a fixed point, after
    /// `max_iter` rounds (last profile), or on a revisit (lowest-regret
    /// profile seen).
    pub fn solve(&self, start: Vec<u32>, max_iter: usize) -> SingleSolve<T> {
        let mut profile = (start.clone(), start);
        let mut seen = HashSet::new();
        let mut best: Option<(T, Profile)> = None;
        let mut iterations = 0;
        loop {
            let regret = self.profile_regret(&profile);
            if best.as_ref().is_none_or(|(r, _)| regret < *r) {
                best = Some((regret.clone(), profile.clone()));
            }
            let next1 = self.best_reply(&profile.1);
            let next2 = self.best_reply(&next1);
            let converged = next1 == profile.0 && next2 == profile.1;
            if converged || iterations == max_iter {
                return SingleSolve {
                    profile,
                    converged,
                    iterations,
                    max_regret: regret,
                };
            }
            if !seen.insert(profile.clone()) {
                let (max_regret, profile) = best.expect("one profile evaluated");
                return SingleSolve {
                    profile,
                    converged: false,
                    iterations,
                    max_regret,
                };
            }
            profile = (next1, next2);
            iterations += 1;
        }
    }

    /// Level nearest to half of each value.
    pub fn half_value_start(&self) -> Vec<u32> {
        self.values.iter().map(|x| self.bids.nearest_level(x.to_real() / 2.0)).collect()
    }
}
