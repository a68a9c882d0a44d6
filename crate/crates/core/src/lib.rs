//! Simultaneous first-price auctions for two objects with complementarities:
//! discrete bid grids, interim win probabilities, monotone best replies and
//! the order properties behind existence of monotone equilibria.

pub mod cli;
pub mod distribution;
pub mod error;
pub mod interim;
pub mod model;
pub mod properties;
pub mod scalar;
pub mod scenario;
pub mod sim;
pub mod solver;
pub mod strategy;

pub use distribution::{BidDistribution, DistributionConfig, Marginal, MarginalDist, TypeGrid};
pub use error::{DistributionError, InterimError, ModelError, PropertyError, SolverError, StrategyError};
pub use interim::{interim_utility, interim_utility_by_outcome, win_probs, InterimTable, WinProbs};
pub use model::{BidGrid, BidPair, TypePoint, UtilityConfig, UtilitySpec};
pub use scalar::Scalar;
pub use scenario::{Instance, Scenario};
pub use solver::{Game, SolveResult, SolveStatus};
pub use strategy::MonotoneStrategy;

/// Exact rational scalar. `i128` components are ample for the grid sizes
/// used here; switch to [`num_rational::BigRational`] for anything larger.
pub type Exact = num_rational::Ratio<i128>;

pub type Game64 = Game<f64>;
pub type ExactGame = Game<Exact>;
pub type TypeGrid64 = TypeGrid<f64>;
pub type ExactTypeGrid = TypeGrid<Exact>;
pub type UtilitySpec64 = UtilitySpec<f64>;
pub type ExactUtilitySpec = UtilitySpec<Exact>;
pub type BidDistribution64 = BidDistribution<f64>;
pub type ExactBidDistribution = BidDistribution<Exact>;
