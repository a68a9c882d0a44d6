use thiserror::Error;

use crate::model::BidPair;

#[derive(Debug, Error, PartialEq)]
pub enum ModelError {
    #[error("bid increment count n must be positive")]
    ZeroIncrement,
    #[error("maximum bid {0} is negative")]
    NegativeMaxBid(f64),
    #[error("maximum bid {u_bar} is not a multiple of 1/{n}")]
    MisalignedMaxBid { u_bar: f64, n: u32 },
    #[error("type ({0}, {1}) lies outside [0,1]^2")]
    TypeOutOfRange(f64, f64),
    #[error("validation grid needs at least 2 points per axis, got {0}")]
    ValidationResolution(usize),
}

#[derive(Debug, Error, PartialEq)]
pub enum DistributionError {
    #[error("type grid needs at least one point per axis")]
    EmptyGrid,
    #[error("piecewise CDF needs at least two knots")]
    TooFewKnots,
    #[error("piecewise CDF must start at (0, 0) and end at (1, 1)")]
    Endpoints,
    #[error("knot x-coordinates must be strictly increasing (knot {0})")]
    KnotOrder(usize),
    #[error("CDF values must be nondecreasing within [0,1] (knot {0})")]
    CdfOrder(usize),
    #[error("marginal has {points} points but {weights} weights")]
    LengthMismatch { points: usize, weights: usize },
    #[error("marginal weights must be nonnegative and sum to 1 (sum {0})")]
    Weights(f64),
    #[error("bid {0} is off the bid grid")]
    BidOffGrid(BidPair),
    #[error("strategy covers {got} types, grid has {expected}")]
    StrategySize { got: usize, expected: usize },
}

#[derive(Debug, Error, PartialEq)]
pub enum InterimError {
    #[error(
        "region and identity routes disagree on {which} at {bid}: direct {direct}, via identity {identity}"
    )]
    Inconsistent {
        which: &'static str,
        bid: BidPair,
        direct: f64,
        identity: f64,
    },
}

#[derive(Debug, Error, PartialEq)]
pub enum StrategyError {
    #[error("strategy assigns {got} bids on a {m}x{m} type grid")]
    Size { got: usize, m: usize },
    #[error("bid {0} is off the bid grid")]
    BidOffGrid(BidPair),
    #[error("not monotone: type {lower:?} bids {lower_bid}, higher type {upper:?} bids {upper_bid}")]
    NotMonotone {
        lower: (usize, usize),
        upper: (usize, usize),
        lower_bid: BidPair,
        upper_bid: BidPair,
    },
    #[error("malformed strategy CSV: {0}")]
    Csv(String),
}

#[derive(Debug, Error, PartialEq)]
pub enum SolverError {
    #[error("argmax at type {type_index} has no greatest element (candidates {candidates:?})")]
    NoGreatestElement {
        type_index: usize,
        candidates: Vec<BidPair>,
    },
    #[error("greatest-argmax selection is not monotone: {0}")]
    MonotonicityBroken(StrategyError),
    #[error(transparent)]
    Strategy(#[from] StrategyError),
    #[error(transparent)]
    Distribution(#[from] DistributionError),
}

#[derive(Debug, Error, PartialEq)]
pub enum PropertyError {
    #[error("need b1h > b1l and b2h > b2l, got b1h={b1h} b1l={b1l} b2h={b2h} b2l={b2l}")]
    NotOrdered { b1h: u32, b1l: u32, b2h: u32, b2l: u32 },
}
