//! Monotone pure strategies on the type grid: validation, generation,
//! exhaustive enumeration and CSV serialization.

use std::io::{Read, Write};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::distribution::TypeGrid;
use crate::error::StrategyError;
use crate::model::{BidGrid, BidPair};
use crate::scalar::Scalar;

/// A coordinatewise-monotone map from the `m x m` type lattice to bid pairs.
/// `assignment[i * m + j]` is the bid of the type with lattice coordinates
/// `(i, j)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct MonotoneStrategy {
    m: usize,
    bids: BidGrid,
    assignment: Vec<BidPair>,
}

/// Checks monotonicity along both lattice axes; comparable pairs further
/// apart follow by transitivity. Returns the first offending neighbour pair.
pub fn is_monotone(assignment: &[BidPair], m: usize) -> Result<(), StrategyError> {
    if assignment.len() != m * m {
        return Err(StrategyError::Size {
            got: assignment.len(),
            m,
        });
    }
    for i in 0..m {
        for j in 0..m {
            let here = assignment[i * m + j];
            for (ni, nj) in [(i + 1, j), (i, j + 1)] {
                if ni < m && nj < m {
                    let there = assignment[ni * m + nj];
                    if !there.dominates(&here) {
                        return Err(StrategyError::NotMonotone {
                            lower: (i, j),
                            upper: (ni, nj),
                            lower_bid: here,
                            upper_bid: there,
                        });
                    }
                }
            }
        }
    }
    Ok(())
}

impl MonotoneStrategy {
    pub fn new(m: usize, bids: BidGrid, assignment: Vec<BidPair>) -> Result<Self, StrategyError> {
        if let Some(b) = assignment.iter().find(|b| !bids.contains(**b)) {
            return Err(StrategyError::BidOffGrid(*b));
        }
        is_monotone(&assignment, m)?;
        Ok(Self { m, bids, assignment })
    }

    pub fn constant(m: usize, bids: BidGrid, b: BidPair) -> Result<Self, StrategyError> {
        Self::new(m, bids, vec![b; m * m])
    }

    /// Builds `s(x) = f(x)` over the grid and validates it.
    pub fn from_fn<T: Scalar, F>(grid: &TypeGrid<T>, bids: BidGrid, f: F) -> Result<Self, StrategyError>
    where
        F: Fn(&crate::model::TypePoint<T>) -> BidPair,
    {
        Self::new(grid.m(), bids, grid.points().iter().map(f).collect())
    }

    /// Each coordinate bids the level nearest to half its value.
    pub fn half_value<T: Scalar>(grid: &TypeGrid<T>, bids: BidGrid) -> Self {
        Self::from_fn(grid, bids, |x| {
            BidPair::new(
                bids.nearest_level(x.x1.to_real() / 2.0),
                bids.nearest_level(x.x2.to_real() / 2.0),
            )
        })
        .expect("rounding half values is monotone")
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn len(&self) -> usize {
        self.assignment.len()
    }

    pub fn is_empty(&self) -> bool {
        self.assignment.is_empty()
    }

    pub fn bids(&self) -> &BidGrid {
        &self.bids
    }

    pub fn assignment(&self) -> &[BidPair] {
        &self.assignment
    }

    pub fn bid(&self, index: usize) -> BidPair {
        self.assignment[index]
    }

    pub fn bid_at(&self, i: usize, j: usize) -> BidPair {
        self.assignment[i * self.m + j]
    }

    /// Strategy after swapping the object labels on types and bids.
    pub fn relabel_objects(&self) -> Self {
        let m = self.m;
        let assignment = (0..m * m)
            .map(|k| self.bid_at(k % m, k / m).transpose())
            .collect();
        Self {
            m,
            bids: self.bids,
            assignment,
        }
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<(), StrategyError> {
        let mut w = csv::Writer::from_writer(out);
        let n = self.bids.n();
        let err = |e: csv::Error| StrategyError::Csv(e.to_string());
        w.write_record(["x1_index", "x2_index", "b1", "b2"]).map_err(err)?;
        for (k, b) in self.assignment.iter().enumerate() {
            w.write_record([
                (k / self.m).to_string(),
                (k % self.m).to_string(),
                format!("{}/{n}", b.b1),
                format!("{}/{n}", b.b2),
            ])
            .map_err(err)?;
        }
        w.flush().map_err(|e| StrategyError::Csv(e.to_string()))
    }

    /// Reads the `x1_index, x2_index, b1, b2` CSV written by [`write_csv`].
    /// Bids may be fractions (`3/4`) or decimals on the grid.
    ///
    /// [`write_csv`]: MonotoneStrategy::write_csv
    pub fn read_csv<R: Read>(input: R, m: usize, bids: BidGrid) -> Result<Self, StrategyError> {
        let mut r = csv::Reader::from_reader(input);
        let mut slots: Vec<Option<BidPair>> = vec![None; m * m];
        for record in r.records() {
            let record = record.map_err(|e| StrategyError::Csv(e.to_string()))?;
            if record.len() != 4 {
                return Err(StrategyError::Csv(format!("expected 4 columns, got {}", record.len())));
            }
            let index = |c: usize| -> Result<usize, StrategyError> {
                record[c]
                    .trim()
                    .parse()
                    .map_err(|_| StrategyError::Csv(format!("bad index `{}`", &record[c])))
            };
            let (i, j) = (index(0)?, index(1)?);
            if i >= m || j >= m {
                return Err(StrategyError::Csv(format!("type index ({i}, {j}) outside {m}x{m} grid")));
            }
            let b = BidPair::new(parse_level(&record[2], &bids)?, parse_level(&record[3], &bids)?);
            if slots[i * m + j].replace(b).is_some() {
                return Err(StrategyError::Csv(format!("duplicate row for type ({i}, {j})")));
            }
        }
        let assignment = slots
            .into_iter()
            .enumerate()
            .map(|(k, b)| b.ok_or_else(|| StrategyError::Csv(format!("missing row for type ({}, {})", k / m, k % m))))
            .collect::<Result<Vec<_>, _>>()?;
        Self::new(m, bids, assignment)
    }
}

/// Parses a bid written as `p/q` or a decimal into a level of `bids`.
pub fn parse_level(text: &str, bids: &BidGrid) -> Result<u32, StrategyError> {
    let text = text.trim();
    let bad = || StrategyError::Csv(format!("bid `{text}` is not on the 1/{} grid", bids.n()));
    let level = if let Some((p, q)) = text.split_once('/') {
        let p: u64 = p.trim().parse().map_err(|_| bad())?;
        let q: u64 = q.trim().parse().map_err(|_| bad())?;
        if q == 0 || !(p * bids.n() as u64).is_multiple_of(q) {
            return Err(bad());
        }
        p * bids.n() as u64 / q
    } else {
        let v: f64 = text.parse().map_err(|_| bad())?;
        bids.level_of(v).ok_or_else(bad)? as u64
    };
    if level > bids.top() as u64 {
        return Err(bad());
    }
    Ok(level as u32)
}

/// Draws a uniform bid pair per cell, then replaces each cell by the
/// coordinatewise maximum of itself and its already-processed lower and left
/// neighbours. The running maximum makes the result monotone; it skews
/// towards high bids in upper cells.
pub fn random_monotone<T: Scalar>(grid: &TypeGrid<T>, bids: BidGrid, seed: u64) -> MonotoneStrategy {
    random_monotone_m(grid.m(), bids, seed)
}

pub(crate) fn random_monotone_m(m: usize, bids: BidGrid, seed: u64) -> MonotoneStrategy {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let top = bids.top();
    let mut assignment: Vec<BidPair> = (0..m * m)
        .map(|_| BidPair::new(rng.random_range(0..=top), rng.random_range(0..=top)))
        .collect();
    for i in 0..m {
        for j in 0..m {
            let mut b = assignment[i * m + j];
            if i > 0 {
                b = b.join(&assignment[(i - 1) * m + j]);
            }
            if j > 0 {
                b = b.join(&assignment[i * m + j - 1]);
            }
            assignment[i * m + j] = b;
        }
    }
    MonotoneStrategy { m, bids, assignment }
}

/// Lexicographic enumeration of every monotone strategy, stopping after
/// `cap` items. Cells are ordered row-major and bid pairs lexicographically.
pub struct MonotoneEnumerator {
    m: usize,
    bids: BidGrid,
    cap: usize,
    current: Vec<usize>,
    yielded: usize,
    started: bool,
    exhausted: bool,
    truncated: bool,
}

/// Streams monotone strategies; check [`MonotoneEnumerator::truncated`]
/// after draining to learn whether the cap cut the stream short.
pub fn enumerate_monotone<T: Scalar>(grid: &TypeGrid<T>, bids: BidGrid, cap: usize) -> MonotoneEnumerator {
    MonotoneEnumerator::new(grid.m(), bids, cap)
}

impl MonotoneEnumerator {
    pub fn new(m: usize, bids: BidGrid, cap: usize) -> Self {
        Self {
            m,
            bids,
            cap,
            current: vec![0; m * m],
            yielded: 0,
            started: false,
            exhausted: false,
            truncated: false,
        }
    }

    /// True once the cap was reached while strategies remained.
    pub fn truncated(&self) -> bool {
        self.truncated
    }

    /// Lower bound imposed on cell `k` by its left and lower neighbours.
    fn floor(&self, k: usize) -> BidPair {
        let (i, j) = (k / self.m, k % self.m);
        let mut lo = BidPair::ZERO;
        if i > 0 {
            lo = lo.join(&self.bids.pair_at(self.current[k - self.m]));
        }
        if j > 0 {
            lo = lo.join(&self.bids.pair_at(self.current[k - 1]));
        }
        lo
    }

    fn fill_from(&mut self, start: usize) {
        for k in start..self.current.len() {
            self.current[k] = self.bids.pair_index(self.floor(k));
        }
    }

    fn advance(&mut self) -> bool {
        for k in (0..self.current.len()).rev() {
            let lo = self.floor(k);
            let next = (self.current[k] + 1..self.bids.pair_count()).find(|&p| self.bids.pair_at(p).dominates(&lo));
            if let Some(p) = next {
                self.current[k] = p;
                self.fill_from(k + 1);
                return true;
            }
        }
        false
    }

    fn snapshot(&self) -> MonotoneStrategy {
        MonotoneStrategy {
            m: self.m,
            bids: self.bids,
            assignment: self.current.iter().map(|&p| self.bids.pair_at(p)).collect(),
        }
    }
}

impl Iterator for MonotoneEnumerator {
    type Item = MonotoneStrategy;

    fn next(&mut self) -> Option<MonotoneStrategy> {
        if self.exhausted {
            return None;
        }
        let has_next = if self.started {
            self.advance()
        } else {
            self.started = true;
            self.fill_from(0);
            true
        };
        if !has_next {
            self.exhausted = true;
            return None;
        }
        if self.yielded == self.cap {
            self.truncated = true;
            self.exhausted = true;
            return None;
        }
        self.yielded += 1;
        Some(self.snapshot())
    }
}
