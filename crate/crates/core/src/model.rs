//! Primitive game objects: the bid lattice, types, valuations, allocation
//! with fair-coin tie-breaking, and ex-post payoffs.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::ModelError;
use crate::scalar::Scalar;

/// The bid levels `{0, 1/n, ..., top/n}` available for each object.
///
/// Levels are stored as integer numerators over `n`, so every comparison and
/// tie test between bids is exact regardless of the scalar type.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct BidGrid {
    n: u32,
    top: u32,
}

impl BidGrid {
    /// Grid with increment `1/n` and maximum bid `top/n`.
    pub fn new(n: u32, top: u32) -> Result<Self, ModelError> {
        if n == 0 {
            return Err(ModelError::ZeroIncrement);
        }
        Ok(Self { n, top })
    }

    /// Grid whose maximum bid is exactly `u_bar`; rejects `u_bar` with
    /// `u_bar * n` not an integer.
    pub fn with_max_bid<T: Scalar>(n: u32, u_bar: &T) -> Result<Self, ModelError> {
        if n == 0 {
            return Err(ModelError::ZeroIncrement);
        }
        if *u_bar < T::zero() {
            return Err(ModelError::NegativeMaxBid(u_bar.to_real()));
        }
        let scaled = u_bar.clone() * T::from_int(n as i64);
        let top = scaled.to_real().round();
        if T::from_int(top as i64).abs_diff(&scaled) > T::tolerance() {
            return Err(ModelError::MisalignedMaxBid {
                u_bar: u_bar.to_real(),
                n,
            });
        }
        Self::new(n, top as u32)
    }

    /// Largest grid-aligned maximum bid not exceeding `limit`.
    pub fn aligned_below<T: Scalar>(n: u32, limit: &T) -> Result<Self, ModelError> {
        if n == 0 {
            return Err(ModelError::ZeroIncrement);
        }
        if *limit < T::zero() {
            return Err(ModelError::NegativeMaxBid(limit.to_real()));
        }
        let scaled = limit.clone() * T::from_int(n as i64);
        let mut top = scaled.to_real().floor() as i64;
        // to_real may round across an integer boundary
        while T::from_int(top + 1) <= scaled {
            top += 1;
        }
        while top > 0 && T::from_int(top) > scaled {
            top -= 1;
        }
        Self::new(n, top as u32)
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    /// Numerator of the maximum bid `u_bar = top / n`.
    pub fn top(&self) -> u32 {
        self.top
    }

    /// Number of levels per object, `top + 1`.
    pub fn len(&self) -> usize {
        self.top as usize + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn u_bar<T: Scalar>(&self) -> T {
        self.value(self.top)
    }

    /// Monetary value of level `k`, i.e. `k / n`.
    pub fn value<T: Scalar>(&self, level: u32) -> T {
        T::ratio(level as i64, self.n as i64)
    }

    pub fn levels<T: Scalar>(&self) -> Vec<T> {
        (0..=self.top).map(|k| self.value(k)).collect()
    }

    pub fn contains(&self, b: BidPair) -> bool {
        b.b1 <= self.top && b.b2 <= self.top
    }

    /// Number of bid pairs in the lattice.
    pub fn pair_count(&self) -> usize {
        self.len() * self.len()
    }

    /// Lexicographic index of a bid pair, `b1 * len + b2`.
    pub fn pair_index(&self, b: BidPair) -> usize {
        b.b1 as usize * self.len() + b.b2 as usize
    }

    pub fn pair_at(&self, index: usize) -> BidPair {
        BidPair::new((index / self.len()) as u32, (index % self.len()) as u32)
    }

    /// All bid pairs in lexicographic order.
    pub fn pairs(&self) -> impl Iterator<Item = BidPair> + '_ {
        (0..self.pair_count()).map(|i| self.pair_at(i))
    }

    /// Level whose value is `v`, if `v` lies on the grid.
    pub fn level_of(&self, v: f64) -> Option<u32> {
        let scaled = v * self.n as f64;
        let k = scaled.round();
        if (scaled - k).abs() > 1e-9 || k < 0.0 || k > self.top as f64 {
            return None;
        }
        Some(k as u32)
    }

    /// Level closest to `v`, clamped to the grid.
    pub fn nearest_level(&self, v: f64) -> u32 {
        let k = (v * self.n as f64).round();
        k.clamp(0.0, self.top as f64) as u32
    }
}

/// A bid on both objects, stored as grid levels.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct BidPair {
    pub b1: u32,
    pub b2: u32,
}

impl BidPair {
    pub const ZERO: BidPair = BidPair { b1: 0, b2: 0 };

    pub fn new(b1: u32, b2: u32) -> Self {
        Self { b1, b2 }
    }

    /// Coordinatewise `self >= other`.
    pub fn dominates(&self, other: &BidPair) -> bool {
        self.b1 >= other.b1 && self.b2 >= other.b2
    }

    /// Coordinatewise minimum.
    pub fn meet(&self, other: &BidPair) -> BidPair {
        BidPair::new(self.b1.min(other.b1), self.b2.min(other.b2))
    }

    /// Coordinatewise maximum.
    pub fn join(&self, other: &BidPair) -> BidPair {
        BidPair::new(self.b1.max(other.b1), self.b2.max(other.b2))
    }

    pub fn transpose(&self) -> BidPair {
        BidPair::new(self.b2, self.b1)
    }
}

impl fmt::Display for BidPair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.b1, self.b2)
    }
}

/// A bidder's two-dimensional value type in `[0,1]^2`.
#[derive(Clone, Debug, PartialEq)]
pub struct TypePoint<T> {
    pub x1: T,
    pub x2: T,
}

impl<T: Scalar> TypePoint<T> {
    pub fn new(x1: T, x2: T) -> Result<Self, ModelError> {
        let unit = |v: &T| *v >= T::zero() && *v <= T::one();
        if !unit(&x1) || !unit(&x2) {
            return Err(ModelError::TypeOutOfRange(x1.to_real(), x2.to_real()));
        }
        Ok(Self { x1, x2 })
    }

    pub fn dominates(&self, other: &TypePoint<T>) -> bool {
        self.x1 >= other.x1 && self.x2 >= other.x2
    }
}

type Valuation<T> = dyn Fn(&T, &T) -> T + Send + Sync;

/// Valuation `u(x1, x2)` of winning both objects, with `u(x1, 0)` and
/// `u(0, x2)` the stand-alone values.
#[derive(Clone)]
pub struct UtilitySpec<T> {
    u: Arc<Valuation<T>>,
    description: String,
}

impl<T> fmt::Debug for UtilitySpec<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("UtilitySpec")
            .field("description", &self.description)
            .finish()
    }
}

impl<T: Scalar> UtilitySpec<T> {
    pub fn custom<F>(description: impl Into<String>, u: F) -> Self
    where
        F: Fn(&T, &T) -> T + Send + Sync + 'static,
    {
        Self {
            u: Arc::new(u),
            description: description.into(),
        }
    }

    /// `u = x1 + x2 + alpha * 1{x1 > 0 and x2 > 0}`.
    pub fn additive_synergy(alpha: T) -> Self {
        let label = format!("additive_synergy(alpha={})", alpha.to_real());
        Self::custom(label, move |x1: &T, x2: &T| {
            let bonus = if *x1 > T::zero() && *x2 > T::zero() {
                alpha.clone()
            } else {
                T::zero()
            };
            x1.clone() + x2.clone() + bonus
        })
    }

    /// `u = x1 * x2`: the objects are worthless alone.
    pub fn multiplicative() -> Self {
        Self::custom("multiplicative", |x1: &T, x2: &T| x1.clone() * x2.clone())
    }

    /// `u = sum_{i,j} c[i][j] * x1^i * x2^j`.
    pub fn polynomial(coefficients: Vec<Vec<T>>) -> Self {
        let label = format!(
            "polynomial({:?})",
            coefficients
                .iter()
                .map(|row| row.iter().map(Scalar::to_real).collect::<Vec<_>>())
                .collect::<Vec<_>>()
        );
        Self::custom(label, move |x1: &T, x2: &T| {
            let mut total = T::zero();
            let mut p1 = T::one();
            for row in &coefficients {
                let mut p2 = T::one();
                for c in row {
                    total = total + c.clone() * p1.clone() * p2.clone();
                    p2 = p2 * x2.clone();
                }
                p1 = p1 * x1.clone();
            }
            total
        })
    }

    pub fn from_config(config: &UtilityConfig) -> Self {
        match config {
            UtilityConfig::AdditiveSynergy { alpha } => Self::additive_synergy(T::from_real(*alpha)),
            UtilityConfig::Multiplicative => Self::multiplicative(),
            UtilityConfig::Polynomial { coefficients } => Self::polynomial(
                coefficients
                    .iter()
                    .map(|row| row.iter().map(|&c| T::from_real(c)).collect())
                    .collect(),
            ),
        }
    }

    pub fn description(&self) -> &str {
        &self.description
    }

    pub fn value(&self, x1: &T, x2: &T) -> T {
        (self.u)(x1, x2)
    }

    pub fn at(&self, x: &TypePoint<T>) -> T {
        self.value(&x.x1, &x.x2)
    }

    /// `u(x1, 0)`.
    pub fn standalone1(&self, x1: &T) -> T {
        self.value(x1, &T::zero())
    }

    /// `u(0, x2)`.
    pub fn standalone2(&self, x2: &T) -> T {
        self.value(&T::zero(), x2)
    }

    /// Synergy `u(x1,x2) - u(x1,0) - u(0,x2)`.
    pub fn lambda(&self, x: &TypePoint<T>) -> T {
        self.at(x) - self.standalone1(&x.x1) - self.standalone2(&x.x2)
    }

    /// Default maximum bid `u(1,1)`.
    pub fn max_value(&self) -> T {
        self.value(&T::one(), &T::one())
    }
}

/// Free function form of [`UtilitySpec::lambda`].
pub fn lambda<T: Scalar>(spec: &UtilitySpec<T>, x: &TypePoint<T>) -> T {
    spec.lambda(x)
}

/// Serializable description of a utility family.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum UtilityConfig {
    AdditiveSynergy { alpha: f64 },
    Multiplicative,
    Polynomial { coefficients: Vec<Vec<f64>> },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Assumption {
    /// `u(0,0) = 0`.
    Normalization,
    /// `u` nondecreasing.
    A1,
    /// `lambda >= 0`.
    A2,
    /// `lambda` nondecreasing.
    A3,
}

impl fmt::Display for Assumption {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Assumption::Normalization => "normalization",
            Assumption::A1 => "A1",
            Assumption::A2 => "A2",
            Assumption::A3 => "A3",
        };
        f.write_str(s)
    }
}

/// One failed inequality. For monotonicity assumptions `lower <= upper`
/// and the failure is `value(upper) < value(lower)`; for `A2` and
/// normalization only `lower` is set.
#[derive(Clone, Debug, PartialEq)]
pub struct AssumptionViolation<T> {
    pub assumption: Assumption,
    pub lower: TypePoint<T>,
    pub upper: Option<TypePoint<T>>,
    pub lower_value: T,
    pub upper_value: Option<T>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ValidationReport<T> {
    pub violations: Vec<AssumptionViolation<T>>,
}

impl<T> ValidationReport<T> {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn violates(&self, assumption: Assumption) -> bool {
        self.violations.iter().any(|v| v.assumption == assumption)
    }
}

/// Checks normalization and A1–A3 on the uniform `resolution x resolution`
/// grid over `[0,1]^2`. Monotonicity is checked between lattice neighbours,
/// which covers every comparable pair by transitivity.
pub fn validate_assumptions<T: Scalar>(
    spec: &UtilitySpec<T>,
    resolution: usize,
) -> Result<ValidationReport<T>, ModelError> {
    if resolution < 2 {
        return Err(ModelError::ValidationResolution(resolution));
    }
    let step = |k: usize| T::ratio(k as i64, resolution as i64 - 1);
    let point = |i: usize, j: usize| TypePoint {
        x1: step(i),
        x2: step(j),
    };
    let tol = T::tolerance();
    let mut violations = Vec::new();

    let origin = spec.value(&T::zero(), &T::zero());
    if origin.abs_diff(&T::zero()) > tol {
        violations.push(AssumptionViolation {
            assumption: Assumption::Normalization,
            lower: point(0, 0),
            upper: None,
            lower_value: origin,
            upper_value: None,
        });
    }

    let u: Vec<T> = (0..resolution * resolution)
        .map(|k| spec.at(&point(k / resolution, k % resolution)))
        .collect();
    let lam: Vec<T> = (0..resolution * resolution)
        .map(|k| spec.lambda(&point(k / resolution, k % resolution)))
        .collect();
    let at = |i: usize, j: usize| i * resolution + j;

    for i in 0..resolution {
        for j in 0..resolution {
            if lam[at(i, j)] < T::zero() - tol.clone() {
                violations.push(AssumptionViolation {
                    assumption: Assumption::A2,
                    lower: point(i, j),
                    upper: None,
                    lower_value: lam[at(i, j)].clone(),
                    upper_value: None,
                });
            }
            let neighbours = [(i + 1, j), (i, j + 1)];
            for (ni, nj) in neighbours {
                if ni >= resolution || nj >= resolution {
                    continue;
                }
                for (assumption, values) in [(Assumption::A1, &u), (Assumption::A3, &lam)] {
                    let lo = &values[at(i, j)];
                    let hi = &values[at(ni, nj)];
                    if *hi < lo.clone() - tol.clone() {
                        violations.push(AssumptionViolation {
                            assumption,
                            lower: point(i, j),
                            upper: Some(point(ni, nj)),
                            lower_value: lo.clone(),
                            upper_value: Some(hi.clone()),
                        });
                    }
                }
            }
        }
    }
    Ok(ValidationReport { violations })
}

/// Which bidder a tie-breaking coin favours.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Coin {
    Own,
    Rival,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Default)]
pub struct Allocation {
    pub won1: bool,
    pub won2: bool,
}

impl Allocation {
    pub const NONE: Allocation = Allocation {
        won1: false,
        won2: false,
    };
}

/// Outcome for bidder `i` of the two separate first-price auctions. Each
/// tied object is settled by its own coin.
pub fn allocate(b_i: BidPair, b_j: BidPair, tie1: Coin, tie2: Coin) -> Allocation {
    let wins = |mine: u32, theirs: u32, coin: Coin| mine > theirs || (mine == theirs && coin == Coin::Own);
    Allocation {
        won1: wins(b_i.b1, b_j.b1, tie1),
        won2: wins(b_i.b2, b_j.b2, tie2),
    }
}

/// Quasi-linear payoff: value of the bundle won minus the bids paid on the
/// objects won.
pub fn ex_post_utility<T: Scalar>(
    a: Allocation,
    b_i: BidPair,
    x_i: &TypePoint<T>,
    spec: &UtilitySpec<T>,
    bids: &BidGrid,
) -> T {
    let pay1 = bids.value::<T>(b_i.b1);
    let pay2 = bids.value::<T>(b_i.b2);
    match (a.won1, a.won2) {
        (true, true) => spec.at(x_i) - pay1 - pay2,
        (true, false) => spec.standalone1(&x_i.x1) - pay1,
        (false, true) => spec.standalone2(&x_i.x2) - pay2,
        (false, false) => T::zero(),
    }
}

/// A probability that is a multiple of 1/4, stored as the number of quarters.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Quarters(pub i8);

impl Quarters {
    pub fn value<T: Scalar>(self) -> T {
        T::ratio(self.0 as i64, 4)
    }
}

impl std::ops::Sub for Quarters {
    type Output = Quarters;
    fn sub(self, rhs: Quarters) -> Quarters {
        Quarters(self.0 - rhs.0)
    }
}

impl fmt::Display for Quarters {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.0 {
            0 => f.write_str("0"),
            4 => f.write_str("1"),
            -4 => f.write_str("-1"),
            q if q % 2 == 0 => write!(f, "{}/2", q / 2),
            q => write!(f, "{q}/4"),
        }
    }
}

/// Probability that bidder `i` wins both objects against the fixed bid
/// `b_j` when ties are settled by independent fair coins.
pub fn q_both(b_i: BidPair, b_j: BidPair) -> Quarters {
    use std::cmp::Ordering::*;
    match (b_i.b1.cmp(&b_j.b1), b_i.b2.cmp(&b_j.b2)) {
        (Greater, Greater) => Quarters(4),
        (Greater, Equal) | (Equal, Greater) => Quarters(2),
        (Equal, Equal) => Quarters(1),
        _ => Quarters(0),
    }
}
