//! Best replies and monotone pure-strategy equilibrium search.
//!
//! The best reply of each type is the greatest element of its argmax set.
//! When the interim utility is weakly quasi-supermodular the argmax is a
//! sublattice and the greatest element exists; weak single crossing then
//! makes the selection monotone in type. Both facts are checked at runtime
//! and surface as [`SolverError`]s if they ever fail.

pub mod single;

use std::collections::HashMap;
use std::io::Write;

use rayon::prelude::*;

use crate::distribution::{induced_bid_distribution, BidDistribution, TypeGrid};
use crate::error::SolverError;
use crate::interim::{InterimTable, TypeValues};
use crate::model::{BidGrid, BidPair, TypePoint, UtilitySpec};
use crate::scalar::Scalar;
use crate::strategy::{enumerate_monotone, MonotoneStrategy};

/// Exact argmax of `V(., x)` over the full bid lattice (up to the scalar's
/// tolerance), in lexicographic order.
pub fn best_response_set<T: Scalar>(x: &TypePoint<T>, mu: &BidDistribution<T>, spec: &UtilitySpec<T>) -> Vec<BidPair> {
    let table = InterimTable::new(mu);
    argmax(&table, &TypeValues::new(spec, x)).1
}

fn argmax<T: Scalar>(table: &InterimTable<T>, v: &TypeValues<T>) -> (T, Vec<BidPair>) {
    let values = table.utilities(v);
    let best = values
        .iter()
        .skip(1)
        .fold(values[0].clone(), |acc, u| T::max_of(acc, u.clone()));
    let floor = best.clone() - T::tolerance();
    let set = values
        .iter()
        .enumerate()
        .filter(|(_, u)| **u >= floor)
        .map(|(k, _)| table.bids().pair_at(k))
        .collect();
    (best, set)
}

/// Greatest element of a set of bid pairs, if the coordinatewise join is a member.
pub fn greatest_element(set: &[BidPair]) -> Option<BidPair> {
    let join = set.iter().skip(1).fold(*set.first()?, |acc, b| acc.join(b));
    set.contains(&join).then_some(join)
}

#[derive(Clone, Debug, PartialEq)]
pub enum SolveStatus<T> {
    /// No type of either bidder gains from any deviation.
    ExactEquilibrium,
    /// Iteration budget exhausted; the profile's largest regret is `epsilon`.
    EpsilonEquilibrium { epsilon: T },
    /// Best replies revisited an earlier profile; the lowest-regret profile
    /// on the path is returned.
    CycleDetected { period: usize, epsilon: T },
}

/// Largest deviation gain of one type.
#[derive(Clone, Debug, PartialEq)]
pub struct TypeRegret<T> {
    /// 1 or 2.
    pub bidder: usize,
    pub type_index: usize,
    pub played: BidPair,
    pub best_deviation: BidPair,
    pub regret: T,
}

#[derive(Clone, Debug, PartialEq)]
pub struct EquilibriumCheck<T> {
    pub max_regret: T,
    /// Bidder 1's types first, then bidder 2's.
    pub per_type: Vec<TypeRegret<T>>,
}

impl<T: Scalar> EquilibriumCheck<T> {
    pub fn is_exact(&self) -> bool {
        self.max_regret.is_zero()
    }
}

#[derive(Clone, Debug)]
pub struct SolveResult<T> {
    pub profile: (MonotoneStrategy, MonotoneStrategy),
    pub status: SolveStatus<T>,
    pub iterations: usize,
    pub max_regret: T,
    pub regrets: EquilibriumCheck<T>,
}

/// Per-type reply information against one opponent strategy.
struct ReplyAnalysis<T> {
    table: InterimTable<T>,
    best: Vec<T>,
    sets: Vec<Vec<BidPair>>,
    best_bid: Vec<BidPair>,
}

/// Symmetric two-bidder game on a discretized type grid.
#[derive(Clone, Debug)]
pub struct Game<T> {
    grid: TypeGrid<T>,
    spec: UtilitySpec<T>,
    bids: BidGrid,
    values: Vec<TypeValues<T>>,
}

impl<T: Scalar> Game<T> {
    pub fn new(grid: TypeGrid<T>, spec: UtilitySpec<T>, bids: BidGrid) -> Self {
        let values = grid.points().iter().map(|x| TypeValues::new(&spec, x)).collect();
        Self {
            grid,
            spec,
            bids,
            values,
        }
    }

    pub fn grid(&self) -> &TypeGrid<T> {
        &self.grid
    }

    pub fn spec(&self) -> &UtilitySpec<T> {
        &self.spec
    }

    pub fn bids(&self) -> &BidGrid {
        &self.bids
    }

    pub fn type_values(&self, index: usize) -> &TypeValues<T> {
        &self.values[index]
    }

    /// Opponent bid distribution induced by `s`.
    pub fn induced(&self, s: &MonotoneStrategy) -> Result<BidDistribution<T>, SolverError> {
        Ok(induced_bid_distribution(s, &self.grid)?)
    }

    fn analyse(&self, opponent: &MonotoneStrategy) -> Result<ReplyAnalysis<T>, SolverError> {
        let table = InterimTable::new(&self.induced(opponent)?);
        let per_type: Vec<(T, Vec<BidPair>)> = self.values.par_iter().map(|v| argmax(&table, v)).collect();
        let mut best = Vec::with_capacity(per_type.len());
        let mut sets = Vec::with_capacity(per_type.len());
        for (b, s) in per_type {
            best.push(b);
            sets.push(s);
        }
        let best_bid = sets
            .iter()
            .zip(&self.values)
            .map(|(set, v)| {
                // highest utility first, ties towards the greatest bid
                let mut top = set[0];
                let mut top_value = table.utility(top, v);
                for b in &set[1..] {
                    let u = table.utility(*b, v);
                    if u >= top_value {
                        top = *b;
                        top_value = u;
                    }
                }
                top
            })
            .collect();
        Ok(ReplyAnalysis {
            table,
            best,
            sets,
            best_bid,
        })
    }

    fn select(&self, analysis: &ReplyAnalysis<T>) -> Result<MonotoneStrategy, SolverError> {
        let assignment = analysis
            .sets
            .iter()
            .enumerate()
            .map(|(k, set)| {
                greatest_element(set).ok_or_else(|| SolverError::NoGreatestElement {
                    type_index: k,
                    candidates: set.clone(),
                })
            })
            .collect::<Result<Vec<_>, _>>()?;
        MonotoneStrategy::new(self.grid.m(), self.bids, assignment).map_err(SolverError::MonotonicityBroken)
    }

    /// Argmax set of type `type_index` against `opponent`.
    pub fn best_response_set(&self, type_index: usize, opponent: &MonotoneStrategy) -> Result<Vec<BidPair>, SolverError> {
        let table = InterimTable::new(&self.induced(opponent)?);
        Ok(argmax(&table, &self.values[type_index]).1)
    }

    /// Greatest-argmax reply of every type to `opponent`.
    pub fn monotone_best_reply(&self, opponent: &MonotoneStrategy) -> Result<MonotoneStrategy, SolverError> {
        self.select(&self.analyse(opponent)?)
    }

    fn regrets(&self, bidder: usize, own: &MonotoneStrategy, against: &ReplyAnalysis<T>) -> Vec<TypeRegret<T>> {
        (0..self.grid.len())
            .map(|k| {
                let played = own.bid(k);
                let gain = against.best[k].clone() - against.table.utility(played, &self.values[k]);
                // within tolerance counts as no gain
                let regret = if gain <= T::tolerance() { T::zero() } else { gain };
                TypeRegret {
                    bidder,
                    type_index: k,
                    played,
                    best_deviation: against.best_bid[k],
                    regret,
                }
            })
            .collect()
    }

    fn check_with(
        &self,
        s1: &MonotoneStrategy,
        s2: &MonotoneStrategy,
        against_s2: &ReplyAnalysis<T>,
        against_s1: &ReplyAnalysis<T>,
    ) -> EquilibriumCheck<T> {
        let mut per_type = self.regrets(1, s1, against_s2);
        per_type.extend(self.regrets(2, s2, against_s1));
        let max_regret = per_type
            .iter()
            .fold(T::zero(), |acc, r| T::max_of(acc, r.regret.clone()));
        EquilibriumCheck { max_regret, per_type }
    }

    /// Largest gain any type of either bidder can get by deviating to any bid pair.
    pub fn check_equilibrium(&self, s1: &MonotoneStrategy, s2: &MonotoneStrategy) -> Result<EquilibriumCheck<T>, SolverError> {
        let against_s2 = self.analyse(s2)?;
        let against_s1 = self.analyse(s1)?;
        Ok(self.check_with(s1, s2, &against_s2, &against_s1))
    }

    /// Alternating best replies: bidder 1 replies to bidder 2, then bidder 2
    /// to the new strategy of bidder 1. Stops at a fixed point, on the first
    /// revisited profile, or after `max_iter` rounds.
    pub fn iterate_best_response(
        &self,
        s1: MonotoneStrategy,
        s2: MonotoneStrategy,
        max_iter: usize,
    ) -> Result<SolveResult<T>, SolverError> {
        let mut current = (s1, s2);
        let mut seen: HashMap<(MonotoneStrategy, MonotoneStrategy), usize> = HashMap::new();
        let mut best: Option<(EquilibriumCheck<T>, (MonotoneStrategy, MonotoneStrategy))> = None;
        let mut iterations = 0;

        loop {
            let against_s2 = self.analyse(&current.1)?;
            let against_s1 = self.analyse(&current.0)?;
            let check = self.check_with(&current.0, &current.1, &against_s2, &against_s1);
            if best.as_ref().is_none_or(|(b, _)| check.max_regret < b.max_regret) {
                best = Some((check.clone(), current.clone()));
            }
            if check.is_exact() {
                return Ok(self.finish(current, SolveStatus::ExactEquilibrium, iterations, check));
            }
            if iterations == max_iter {
                let epsilon = check.max_regret.clone();
                return Ok(self.finish(current, SolveStatus::EpsilonEquilibrium { epsilon }, iterations, check));
            }
            if let Some(first) = seen.insert(current.clone(), iterations) {
                let (check, profile) = best.expect("at least one profile evaluated");
                let status = SolveStatus::CycleDetected {
                    period: iterations - first,
                    epsilon: check.max_regret.clone(),
                };
                return Ok(self.finish(profile, status, iterations, check));
            }

            let next1 = self.select(&against_s2)?;
            let next2 = if next1 == current.0 {
                self.select(&against_s1)?
            } else {
                self.monotone_best_reply(&next1)?
            };
            current = (next1, next2);
            iterations += 1;
        }
    }

    fn finish(
        &self,
        profile: (MonotoneStrategy, MonotoneStrategy),
        status: SolveStatus<T>,
        iterations: usize,
        regrets: EquilibriumCheck<T>,
    ) -> SolveResult<T> {
        SolveResult {
            profile,
            status,
            iterations,
            max_regret: regrets.max_regret.clone(),
            regrets,
        }
    }

    /// Every monotone profile with zero regret, over the first `cap`
    /// monotone strategies of the enumeration.
    pub fn exhaustive_equilibria(&self, cap: usize) -> Result<EquilibriumList, SolverError> {
        let mut stream = enumerate_monotone(&self.grid, self.bids, cap);
        let strategies: Vec<MonotoneStrategy> = stream.by_ref().collect();
        let truncated = stream.truncated();

        // replies[o][c]: is strategy c a best reply to opponent strategy o?
        let replies: Vec<Vec<bool>> = strategies
            .par_iter()
            .map(|opp| {
                let analysis = self.analyse(opp)?;
                Ok(strategies
                    .iter()
                    .map(|cand| {
                        (0..self.grid.len()).all(|k| {
                            let v = analysis.table.utility(cand.bid(k), &self.values[k]);
                            v >= analysis.best[k].clone() - T::tolerance()
                        })
                    })
                    .collect())
            })
            .collect::<Result<_, SolverError>>()?;

        let mut profiles = Vec::new();
        for (a, s1) in strategies.iter().enumerate() {
            for (b, s2) in strategies.iter().enumerate() {
                if replies[b][a] && replies[a][b] {
                    profiles.push((s1.clone(), s2.clone()));
                }
            }
        }
        Ok(EquilibriumList {
            profiles,
            searched: strategies.len(),
            truncated,
        })
    }
}

#[derive(Clone, Debug)]
pub struct EquilibriumList {
    pub profiles: Vec<(MonotoneStrategy, MonotoneStrategy)>,
    /// Number of monotone strategies considered per bidder.
    pub searched: usize,
    /// True if the strategy cap cut the enumeration short.
    pub truncated: bool,
}

/// Formats a scalar with 17 significant digits.
pub fn format_real(v: f64) -> String {
    format!("{v:.16e}")
}

impl<T: Scalar> SolveResult<T> {
    pub fn status_label(&self) -> String {
        match &self.status {
            SolveStatus::ExactEquilibrium => "exact_equilibrium".to_string(),
            SolveStatus::EpsilonEquilibrium { .. } => "epsilon_equilibrium".to_string(),
            SolveStatus::CycleDetected { period, .. } => format!("cycle_detected(period={period})"),
        }
    }

    /// Per-type rows `bidder, x1, x2, b1, b2, regret`.
    pub fn write_strategies_csv<W: Write>(&self, game: &Game<T>, out: W) -> std::io::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["bidder", "x1", "x2", "b1", "b2", "regret"])?;
        let bids = game.bids();
        for r in &self.regrets.per_type {
            let s = if r.bidder == 1 { &self.profile.0 } else { &self.profile.1 };
            let x = game.grid().point(r.type_index);
            let b = s.bid(r.type_index);
            w.write_record([
                r.bidder.to_string(),
                format_real(x.x1.to_real()),
                format_real(x.x2.to_real()),
                format_real(bids.value::<T>(b.b1).to_real()),
                format_real(bids.value::<T>(b.b2).to_real()),
                format_real(r.regret.to_real()),
            ])?;
        }
        w.flush()
    }

    /// Single summary row `status, iterations, max_regret`.
    pub fn write_summary_csv<W: Write>(&self, out: W) -> std::io::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["status", "iterations", "max_regret"])?;
        w.write_record([
            self.status_label(),
            self.iterations.to_string(),
            format_real(self.max_regret.to_real()),
        ])?;
        w.flush()
    }
}
