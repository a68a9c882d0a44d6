//! Monte Carlo play of the auction under fixed strategies.

use std::io::Write;

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::SolverError;
use crate::interim::win_probs;
use crate::model::{allocate, ex_post_utility, Allocation, Coin};
use crate::scalar::Scalar;
use crate::solver::{format_real, Game};
use crate::strategy::MonotoneStrategy;

/// Draws per shard. Shards get their own ChaCha stream, so results do not
/// depend on how many workers run them.
const SHARD: usize = 10_000;

/// Outcome classes in reporting order.
pub const OUTCOMES: [&str; 4] = ["both", "only1", "only2", "neither"];

fn outcome_index(a: Allocation) -> usize {
    match (a.won1, a.won2) {
        (true, true) => 0,
        (true, false) => 1,
        (false, true) => 2,
        (false, false) => 3,
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SimStats {
    pub draws: usize,
    /// `frequencies[bidder][outcome]`, outcomes ordered as [`OUTCOMES`].
    pub frequencies: [[f64; 4]; 2],
    /// Mean sum of winning payments.
    pub mean_revenue: f64,
    /// Mean value of the bundles won, payments excluded.
    pub mean_welfare: f64,
    /// Mean sum of both bidders' ex-post utilities.
    pub mean_total_utility: f64,
    /// Realized welfare over the best welfare any allocation of the two
    /// objects could have produced for the drawn types.
    pub efficiency: f64,
}

#[derive(Clone, Debug, Default)]
struct Tally {
    counts: [[u64; 4]; 2],
    revenue: f64,
    welfare: f64,
    utility: f64,
    best_welfare: f64,
}

impl Tally {
    fn merge(mut self, other: &Tally) -> Tally {
        for b in 0..2 {
            for o in 0..4 {
                self.counts[b][o] += other.counts[b][o];
            }
        }
        self.revenue += other.revenue;
        self.welfare += other.welfare;
        self.utility += other.utility;
        self.best_welfare += other.best_welfare;
        self
    }
}

fn coin<R: Rng>(rng: &mut R) -> Coin {
    if rng.random::<bool>() {
        Coin::Own
    } else {
        Coin::Rival
    }
}

/// Plays `draws` independent auctions: both bidders' types are drawn from
/// the type grid, bids come from `s1` and `s2`, and every tie gets a fresh
/// fair coin.
pub fn run_simulation<T: Scalar>(
    game: &Game<T>,
    s1: &MonotoneStrategy,
    s2: &MonotoneStrategy,
    draws: usize,
    seed: u64,
) -> Result<SimStats, SolverError> {
    assert!(draws >= 1, "draws must be at least 1");
    for s in [s1, s2] {
        if s.len() != game.grid().len() {
            return Err(crate::error::DistributionError::StrategySize {
                got: s.len(),
                expected: game.grid().len(),
            }
            .into());
        }
    }
    let grid = game.grid();
    let bids = game.bids();
    let spec = game.spec();
    let m = grid.m();
    let axis = WeightedIndex::new(grid.marginal().weights.iter().map(|w| w.to_real()))
        .expect("marginal weights are a distribution");

    let shards = draws.div_ceil(SHARD);
    let tallies: Vec<Tally> = (0..shards)
        .into_par_iter()
        .map(|shard| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(shard as u64);
            let count = SHARD.min(draws - shard * SHARD);
            let mut t = Tally::default();
            for _ in 0..count {
                let k1 = axis.sample(&mut rng) * m + axis.sample(&mut rng);
                let k2 = axis.sample(&mut rng) * m + axis.sample(&mut rng);
                let (b1, b2) = (s1.bid(k1), s2.bid(k2));
                let (c1, c2) = (coin(&mut rng), coin(&mut rng));
                let a1 = allocate(b1, b2, c1, c2);
                // coins are from bidder 1's side
                let flip = |c: Coin| if c == Coin::Own { Coin::Rival } else { Coin::Own };
                let a2 = allocate(b2, b1, flip(c1), flip(c2));
                debug_assert!(a1.won1 != a2.won1 && a1.won2 != a2.won2);
                t.counts[0][outcome_index(a1)] += 1;
                t.counts[1][outcome_index(a2)] += 1;

                let (x1, x2) = (grid.point(k1), grid.point(k2));
                let u1 = ex_post_utility(a1, b1, x1, spec, bids).to_real();
                let u2 = ex_post_utility(a2, b2, x2, spec, bids).to_real();
                let paid = |a: Allocation, b: crate::model::BidPair| {
                    let mut p = 0.0;
                    if a.won1 {
                        p += bids.value::<f64>(b.b1);
                    }
                    if a.won2 {
                        p += bids.value::<f64>(b.b2);
                    }
                    p
                };
                let revenue = paid(a1, b1) + paid(a2, b2);
                t.revenue += revenue;
                t.utility += u1 + u2;
                t.welfare += u1 + u2 + revenue;

                let joint1 = spec.at(x1).to_real();
                let joint2 = spec.at(x2).to_real();
                let split_a = spec.standalone1(&x1.x1).to_real() + spec.standalone2(&x2.x2).to_real();
                let split_b = spec.standalone1(&x2.x1).to_real() + spec.standalone2(&x1.x2).to_real();
                t.best_welfare += joint1.max(joint2).max(split_a).max(split_b);
            }
            t
        })
        .collect();
    let total = tallies.iter().fold(Tally::default(), |acc, t| acc.merge(t));

    let n = draws as f64;
    let freq = |b: usize| total.counts[b].map(|c| c as f64 / n);
    Ok(SimStats {
        draws,
        frequencies: [freq(0), freq(1)],
        mean_revenue: total.revenue / n,
        mean_welfare: total.welfare / n,
        mean_total_utility: total.utility / n,
        efficiency: if total.best_welfare > 0.0 {
            total.welfare / total.best_welfare
        } else {
            1.0
        },
    })
}

/// Ex-ante outcome probabilities of a bidder playing `own` against `opponent`:
/// interim win probabilities averaged over own types. Ordered as [`OUTCOMES`].
pub fn expected_outcomes<T: Scalar>(
    game: &Game<T>,
    own: &MonotoneStrategy,
    opponent: &MonotoneStrategy,
) -> Result<[f64; 4], SolverError> {
    let mu = game.induced(opponent)?;
    let mut out = [0.0; 4];
    for k in 0..game.grid().len() {
        let w = game.grid().weight(k).to_real();
        let p = win_probs(&mu, own.bid(k)).expect("consistent region split");
        let (p3, p1, p2) = (p.p3.to_real(), p.p1.to_real(), p.p2.to_real());
        out[0] += w * p3;
        out[1] += w * p1;
        out[2] += w * p2;
        out[3] += w * (1.0 - p1 - p2 - p3);
    }
    Ok(out)
}

impl SimStats {
    /// Rows `bidder, both, only1, only2, neither`.
    pub fn write_outcomes_csv<W: Write>(&self, out: W) -> std::io::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let mut header = vec!["bidder"];
        header.extend(OUTCOMES);
        w.write_record(header)?;
        for (b, row) in self.frequencies.iter().enumerate() {
            let mut rec = vec![(b + 1).to_string()];
            rec.extend(row.iter().map(|f| format_real(*f)));
            w.write_record(rec)?;
        }
        w.flush()
    }

    pub fn write_summary_csv<W: Write>(&self, out: W) -> std::io::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["draws", "mean_revenue", "mean_welfare", "mean_total_utility", "efficiency"])?;
        w.write_record([
            self.draws.to_string(),
            format_real(self.mean_revenue),
            format_real(self.mean_welfare),
            format_real(self.mean_total_utility),
            format_real(self.efficiency),
        ])?;
        w.flush()
    }
}
