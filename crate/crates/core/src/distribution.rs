//! Discretized value distributions, the product type grid, and the opponent
//! bid distribution induced by a strategy.

use serde::{Deserialize, Serialize};

use crate::error::DistributionError;
use crate::model::{BidGrid, BidPair, TypePoint};
use crate::scalar::{self, Scalar};
use crate::strategy::MonotoneStrategy;

/// Atomless marginal distribution `F` of a single object's value on `[0,1]`.
#[derive(Clone, Debug, PartialEq)]
pub enum MarginalDist<T> {
    Uniform,
    /// Linear interpolation between `(x, F(x))` knots.
    PiecewiseLinear { knots: Vec<(T, T)> },
}

impl<T: Scalar> MarginalDist<T> {
    pub fn piecewise(knots: Vec<(T, T)>) -> Result<Self, DistributionError> {
        if knots.len() < 2 {
            return Err(DistributionError::TooFewKnots);
        }
        let first = &knots[0];
        let last = &knots[knots.len() - 1];
        if !(first.0.is_zero() && first.1.is_zero() && last.0.is_one() && last.1.is_one()) {
            return Err(DistributionError::Endpoints);
        }
        for (k, pair) in knots.windows(2).enumerate() {
            if pair[1].0 <= pair[0].0 {
                return Err(DistributionError::KnotOrder(k + 1));
            }
            if pair[1].1 < pair[0].1 {
                return Err(DistributionError::CdfOrder(k + 1));
            }
        }
        Ok(Self::PiecewiseLinear { knots })
    }

    pub fn from_config(config: &DistributionConfig) -> Result<Self, DistributionError> {
        match config {
            DistributionConfig::Uniform => Ok(Self::Uniform),
            DistributionConfig::Piecewise { knots } => Self::piecewise(
                knots
                    .iter()
                    .map(|[x, f]| (T::from_real(*x), T::from_real(*f)))
                    .collect(),
            ),
        }
    }

    pub fn cdf(&self, x: &T) -> T {
        if *x <= T::zero() {
            return T::zero();
        }
        if *x >= T::one() {
            return T::one();
        }
        match self {
            Self::Uniform => x.clone(),
            Self::PiecewiseLinear { knots } => {
                for pair in knots.windows(2) {
                    let (x0, f0) = &pair[0];
                    let (x1, f1) = &pair[1];
                    if x <= x1 {
                        return f0.clone()
                            + (f1.clone() - f0.clone()) * (x.clone() - x0.clone())
                                / (x1.clone() - x0.clone());
                    }
                }
                T::one()
            }
        }
    }

    /// Generalized inverse `inf { x : F(x) >= p }`.
    pub fn quantile(&self, p: &T) -> T {
        match self {
            Self::Uniform => p.clone(),
            Self::PiecewiseLinear { knots } => {
                if *p <= T::zero() {
                    return T::zero();
                }
                for pair in knots.windows(2) {
                    let (x0, f0) = &pair[0];
                    let (x1, f1) = &pair[1];
                    if p <= f1 && f1 > f0 {
                        return x0.clone()
                            + (p.clone() - f0.clone()) * (x1.clone() - x0.clone())
                                / (f1.clone() - f0.clone());
                    }
                }
                T::one()
            }
        }
    }
}

/// Serialized form: `"uniform"` or `{ kind = "piecewise", knots = [[x, F], ...] }`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawDistribution", into = "RawDistribution")]
pub enum DistributionConfig {
    Uniform,
    Piecewise { knots: Vec<[f64; 2]> },
}

#[derive(Clone, Serialize, Deserialize)]
#[serde(untagged)]
enum RawDistribution {
    Named(String),
    Table { kind: String, knots: Vec<[f64; 2]> },
}

impl TryFrom<RawDistribution> for DistributionConfig {
    type Error = String;

    fn try_from(raw: RawDistribution) -> Result<Self, String> {
        match raw {
            RawDistribution::Named(name) if name == "uniform" => Ok(Self::Uniform),
            RawDistribution::Named(name) => Err(format!("unknown distribution `{name}`")),
            RawDistribution::Table { kind, knots } if kind == "piecewise" => Ok(Self::Piecewise { knots }),
            RawDistribution::Table { kind, .. } => Err(format!("unknown distribution kind `{kind}`")),
        }
    }
}

impl From<DistributionConfig> for RawDistribution {
    fn from(config: DistributionConfig) -> Self {
        match config {
            DistributionConfig::Uniform => RawDistribution::Named("uniform".into()),
            DistributionConfig::Piecewise { knots } => RawDistribution::Table {
                kind: "piecewise".into(),
                knots,
            },
        }
    }
}

/// One-dimensional discretization of `F`.
#[derive(Clone, Debug, PartialEq)]
pub struct Marginal<T> {
    pub points: Vec<T>,
    pub weights: Vec<T>,
}

/// Quantile midpoints `F^-1((k - 1/2) / m)`, each with weight `1/m`.
pub fn discretize<T: Scalar>(dist: &MarginalDist<T>, m: usize) -> Result<Marginal<T>, DistributionError> {
    if m == 0 {
        return Err(DistributionError::EmptyGrid);
    }
    let points = (1..=m)
        .map(|k| dist.quantile(&T::ratio(2 * k as i64 - 1, 2 * m as i64)))
        .collect();
    let weights = vec![T::ratio(1, m as i64); m];
    Ok(Marginal { points, weights })
}

/// `m x m` product lattice of types. Index `i * m + j` is the type
/// `(points[i], points[j])`.
#[derive(Clone, Debug, PartialEq)]
pub struct TypeGrid<T> {
    marginal: Marginal<T>,
    points: Vec<TypePoint<T>>,
    weights: Vec<T>,
}

/// Product grid from a marginal; weights multiply (independent objects).
pub fn product_grid<T: Scalar>(marginal: Marginal<T>) -> Result<TypeGrid<T>, DistributionError> {
    let m = marginal.points.len();
    if m == 0 {
        return Err(DistributionError::EmptyGrid);
    }
    if marginal.weights.len() != m {
        return Err(DistributionError::LengthMismatch {
            points: m,
            weights: marginal.weights.len(),
        });
    }
    let total = scalar::sum(marginal.weights.iter().cloned());
    if marginal.weights.iter().any(|w| *w < T::zero()) || total.abs_diff(&T::one()) > T::tolerance() {
        return Err(DistributionError::Weights(total.to_real()));
    }
    for (k, p) in marginal.points.iter().enumerate() {
        if *p < T::zero() || *p > T::one() || (k > 0 && *p < marginal.points[k - 1]) {
            return Err(DistributionError::KnotOrder(k));
        }
    }
    let mut points = Vec::with_capacity(m * m);
    let mut weights = Vec::with_capacity(m * m);
    for i in 0..m {
        for j in 0..m {
            points.push(TypePoint {
                x1: marginal.points[i].clone(),
                x2: marginal.points[j].clone(),
            });
            weights.push(marginal.weights[i].clone() * marginal.weights[j].clone());
        }
    }
    Ok(TypeGrid {
        marginal,
        points,
        weights,
    })
}

impl<T: Scalar> TypeGrid<T> {
    /// Discretize `dist` with `m` points per axis and take the product.
    pub fn from_dist(dist: &MarginalDist<T>, m: usize) -> Result<Self, DistributionError> {
        product_grid(discretize(dist, m)?)
    }

    pub fn uniform(m: usize) -> Self {
        Self::from_dist(&MarginalDist::Uniform, m).expect("uniform grid with m >= 1")
    }

    /// Points per axis.
    pub fn m(&self) -> usize {
        self.marginal.points.len()
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn marginal(&self) -> &Marginal<T> {
        &self.marginal
    }

    pub fn points(&self) -> &[TypePoint<T>] {
        &self.points
    }

    pub fn weights(&self) -> &[T] {
        &self.weights
    }

    pub fn point(&self, index: usize) -> &TypePoint<T> {
        &self.points[index]
    }

    pub fn weight(&self, index: usize) -> &T {
        &self.weights[index]
    }

    pub fn index(&self, i: usize, j: usize) -> usize {
        i * self.m() + j
    }

    /// Lattice coordinates `(i, j)` of a flat index.
    pub fn coords(&self, index: usize) -> (usize, usize) {
        (index / self.m(), index % self.m())
    }
}

/// Probability mass over bid pairs, stored densely in lexicographic pair order.
#[derive(Clone, Debug, PartialEq)]
pub struct BidDistribution<T> {
    bids: BidGrid,
    mass: Vec<T>,
}

impl<T: Scalar> BidDistribution<T> {
    pub fn point_mass(bids: BidGrid, b: BidPair) -> Result<Self, DistributionError> {
        Self::from_masses(bids, [(b, T::one())])
    }

    /// Accumulates `(bid, mass)` pairs; repeated bids add up. Masses must be
    /// nonnegative and total 1.
    pub fn from_masses<I>(bids: BidGrid, masses: I) -> Result<Self, DistributionError>
    where
        I: IntoIterator<Item = (BidPair, T)>,
    {
        let mut acc = vec![scalar::CompensatedSum::<T>::default(); bids.pair_count()];
        for (b, w) in masses {
            if !bids.contains(b) {
                return Err(DistributionError::BidOffGrid(b));
            }
            if w < T::zero() {
                return Err(DistributionError::Weights(w.to_real()));
            }
            acc[bids.pair_index(b)].add(w);
        }
        let mass: Vec<T> = acc.iter().map(|a| a.total()).collect();
        let total = scalar::sum(mass.iter().cloned());
        if total.abs_diff(&T::one()) > T::tolerance() {
            return Err(DistributionError::Weights(total.to_real()));
        }
        Ok(Self { bids, mass })
    }

    pub fn bids(&self) -> &BidGrid {
        &self.bids
    }

    pub fn mass(&self, b: BidPair) -> &T {
        &self.mass[self.bids.pair_index(b)]
    }

    /// Masses in lexicographic pair order.
    pub fn masses(&self) -> &[T] {
        &self.mass
    }

    pub fn total(&self) -> T {
        scalar::sum(self.mass.iter().cloned())
    }

    /// Bid pairs with positive mass.
    pub fn support(&self) -> impl Iterator<Item = (BidPair, &T)> + '_ {
        self.mass
            .iter()
            .enumerate()
            .filter(|(_, w)| **w > T::zero())
            .map(|(k, w)| (self.bids.pair_at(k), w))
    }

    /// Distribution of `(b2, b1)`.
    pub fn transpose(&self) -> Self {
        let mut mass = vec![T::zero(); self.mass.len()];
        for (k, w) in self.mass.iter().enumerate() {
            let b = self.bids.pair_at(k).transpose();
            mass[self.bids.pair_index(b)] = w.clone();
        }
        Self { bids: self.bids, mass }
    }

    /// Mass of each first-coordinate level.
    pub fn marginal1(&self) -> Vec<T> {
        let len = self.bids.len();
        (0..len)
            .map(|a| scalar::sum((0..len).map(|c| self.mass[a * len + c].clone())))
            .collect()
    }

    /// Mass of each second-coordinate level.
    pub fn marginal2(&self) -> Vec<T> {
        let len = self.bids.len();
        (0..len)
            .map(|c| scalar::sum((0..len).map(|a| self.mass[a * len + c].clone())))
            .collect()
    }
}

/// Pushforward of the type grid's weights through `s`.
pub fn induced_bid_distribution<T: Scalar>(
    s: &MonotoneStrategy,
    grid: &TypeGrid<T>,
) -> Result<BidDistribution<T>, DistributionError> {
    if s.len() != grid.len() {
        return Err(DistributionError::StrategySize {
            got: s.len(),
            expected: grid.len(),
        });
    }
    BidDistribution::from_masses(
        *s.bids(),
        s.assignment()
            .iter()
            .zip(grid.weights())
            .map(|(b, w)| (*b, w.clone())),
    )
}

/// Position of an opponent bid coordinate relative to a query coordinate.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Region {
    Below = 0,
    Equal = 1,
    Above = 2,
}

impl Region {
    pub const ALL: [Region; 3] = [Region::Below, Region::Equal, Region::Above];

    pub fn classify(opponent: u32, query: u32) -> Region {
        match opponent.cmp(&query) {
            std::cmp::Ordering::Less => Region::Below,
            std::cmp::Ordering::Equal => Region::Equal,
            std::cmp::Ordering::Greater => Region::Above,
        }
    }
}

/// Opponent mass split by `{<, =, >}` on each coordinate relative to a query bid.
#[derive(Clone, Debug, PartialEq)]
pub struct NineCells<T> {
    cells: [[T; 3]; 3],
}

impl<T: Scalar> NineCells<T> {
    /// Mass with first coordinate in `r1` and second in `r2`.
    pub fn get(&self, r1: Region, r2: Region) -> &T {
        &self.cells[r1 as usize][r2 as usize]
    }

    pub fn total(&self) -> T {
        scalar::sum(self.cells.iter().flatten().cloned())
    }
}

pub fn cumulative_masses<T: Scalar>(mu: &BidDistribution<T>, b: BidPair) -> NineCells<T> {
    let mut acc: [[scalar::CompensatedSum<T>; 3]; 3] = Default::default();
    for (opp, w) in mu.support() {
        let r1 = Region::classify(opp.b1, b.b1);
        let r2 = Region::classify(opp.b2, b.b2);
        acc[r1 as usize][r2 as usize].add(w.clone());
    }
    NineCells {
        cells: acc.map(|row| row.map(|c| c.total())),
    }
}
