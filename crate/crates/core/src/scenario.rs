//! Scenario files: one TOML document describing a runnable instance.
//!
//! ```toml
//! n = 4                # bid increments per unit
//! m = 5                # type points per axis
//! u_bar = 2.0          # optional; defaults to the largest grid level <= u(1,1)
//! seed = 7
//! distribution = "uniform"
//! utility = { kind = "additive_synergy", alpha = 0.3 }
//!
//! [solver]
//! max_iter = 200
//! init = "half_value"
//!
//! [sweep]
//! strategies = 200
//! ```

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::distribution::{DistributionConfig, MarginalDist, TypeGrid};
use crate::model::{BidGrid, BidPair, UtilityConfig, UtilitySpec};
use crate::scalar::Scalar;
use crate::solver::Game;
use crate::strategy::MonotoneStrategy;

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("cannot parse scenario: {0}")]
    Parse(String),
    #[error("invalid `{field}`: {message}")]
    Field { field: &'static str, message: String },
}

fn field(field: &'static str, message: impl Into<String>) -> ScenarioError {
    ScenarioError::Field {
        field,
        message: message.into(),
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InitRule {
    /// Bid the level nearest to half of each value.
    #[default]
    HalfValue,
    /// Bid zero everywhere.
    Zero,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SolverConfig {
    pub max_iter: usize,
    pub init: InitRule,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            max_iter: 200,
            init: InitRule::HalfValue,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SweepConfig {
    /// Random monotone opponent strategies per property sweep.
    pub strategies: usize,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self { strategies: 200 }
    }
}

fn default_distribution() -> DistributionConfig {
    DistributionConfig::Uniform
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub n: u32,
    pub m: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub u_bar: Option<f64>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_distribution")]
    pub distribution: DistributionConfig,
    pub utility: UtilityConfig,
    #[serde(default)]
    pub solver: SolverConfig,
    #[serde(default)]
    pub sweep: SweepConfig,
}

/// A scenario resolved into grids and a game.
#[derive(Clone, Debug)]
pub struct Instance<T> {
    pub game: Game<T>,
}

impl<T: Scalar> Instance<T> {
    pub fn grid(&self) -> &TypeGrid<T> {
        self.game.grid()
    }

    pub fn bids(&self) -> &BidGrid {
        self.game.bids()
    }

    pub fn spec(&self) -> &UtilitySpec<T> {
        self.game.spec()
    }
}

impl Scenario {
    pub fn from_toml_str(text: &str) -> Result<Self, ScenarioError> {
        let scenario: Scenario = toml::from_str(text).map_err(|e| ScenarioError::Parse(e.to_string()))?;
        scenario.check_fields()?;
        Ok(scenario)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("scenario serializes")
    }

    fn check_fields(&self) -> Result<(), ScenarioError> {
        if self.n == 0 {
            return Err(field("n", "must be a positive integer"));
        }
        if self.m == 0 {
            return Err(field("m", "must be a positive integer"));
        }
        if self.sweep.strategies == 0 {
            return Err(field("sweep.strategies", "must be positive"));
        }
        if let Some(u) = self.u_bar {
            if u.is_nan() || u <= 0.0 {
                return Err(field("u_bar", "must be positive"));
            }
        }
        Ok(())
    }

    /// Resolves grids and utility in scalar type `T`.
    pub fn build<T: Scalar>(&self) -> Result<Instance<T>, ScenarioError> {
        self.check_fields()?;
        let spec = UtilitySpec::<T>::from_config(&self.utility);
        let ceiling = spec.max_value();
        let bids = match self.u_bar {
            Some(u) => {
                let u_bar = T::from_real(u);
                if u_bar > ceiling {
                    return Err(field(
                        "u_bar",
                        format!("{u} exceeds u(1,1) = {}", ceiling.to_real()),
                    ));
                }
                BidGrid::with_max_bid(self.n, &u_bar).map_err(|e| field("u_bar", e.to_string()))?
            }
            None => BidGrid::aligned_below(self.n, &ceiling).map_err(|e| field("utility", e.to_string()))?,
        };
        let dist = MarginalDist::<T>::from_config(&self.distribution).map_err(|e| field("distribution", e.to_string()))?;
        let grid = TypeGrid::from_dist(&dist, self.m).map_err(|e| field("m", e.to_string()))?;
        Ok(Instance {
            game: Game::new(grid, spec, bids),
        })
    }
}

impl<T: Scalar> Instance<T> {
    pub fn initial_strategy(&self, rule: InitRule) -> MonotoneStrategy {
        match rule {
            InitRule::HalfValue => MonotoneStrategy::half_value(self.grid(), *self.bids()),
            InitRule::Zero => MonotoneStrategy::constant(self.grid().m(), *self.bids(), BidPair::ZERO)
                .expect("constant strategy is monotone"),
        }
    }
}
