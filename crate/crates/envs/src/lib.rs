//! Environment simulators for homeostatic multi-agent experiments.
//!
//! Three environments share one stepping contract:
//!
//! * [`FoodShareEnv`] — two agents with binary energy; the Possessor eats or
//!   passes food to a passive Partner.
//! * [`GridEnv`] — a five-cell line; a mobile Possessor shuttles food to an
//!   immobile Partner under continuous energy drift.
//! * [`Field2DEnv`] — two symmetric mobile agents on the unit square with
//!   food carrying, passing, energy-based immobilization, and accidents.
//!
//! Each environment instance owns its random stream, so rollout workers can
//! hold independent instances without shared state.

mod field2d;
mod foodshare;
mod grid;

pub use field2d::{AgentState, Field2DAction, Field2DConfig, Field2DEnv, Field2DState};
pub use foodshare::{FoodShareAction, FoodShareConfig, FoodShareEnv, FoodShareState};
pub use grid::{GridAction, GridConfig, GridEnv, GridState};

use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum EnvError {
    #[error("step() called on a finished episode; reset() first")]
    EpisodeOver,
    #[error("expected {expected} action(s), got {got}")]
    WrongActionCount { expected: usize, got: usize },
    #[error("action index {0} out of range for this environment")]
    InvalidAction(usize),
}

/// Result of advancing an environment by one step.
#[derive(Debug, Clone)]
pub struct EnvStep {
    /// One observation per policy stream.
    pub observations: Vec<Vec<f64>>,
    /// One homeostatic reward per policy stream.
    pub rewards: Vec<f64>,
    /// The episode failed (an agent left its viable range).
    pub terminated: bool,
    /// The episode hit the step cap without failing.
    pub truncated: bool,
}

impl EnvStep {
    /// Episode boundary of any kind.
    pub fn done(&self) -> bool {
        self.terminated || self.truncated
    }
}

/// Common stepping contract used by rollout collection.
///
/// `n_agents` counts policy streams: the food-share and grid environments
/// expose one (the Partner is passive), the 2-D field exposes two.
pub trait Environment {
    fn n_agents(&self) -> usize;
    fn obs_dim(&self) -> usize;
    fn n_actions(&self) -> usize;
    fn max_steps(&self) -> u32;
    /// Replaces the environment's random stream.
    fn reseed(&mut self, seed: u64);
    /// Starts a fresh episode and returns per-stream observations.
    fn reset(&mut self) -> Vec<Vec<f64>>;
    fn step(&mut self, actions: &[usize]) -> Result<EnvStep, EnvError>;
    /// Raw (uncoupled) drive per physical agent.
    fn drives(&self) -> Vec<f64>;
    /// Coupled drive per policy stream, as used for rewards.
    fn coupled_drives(&self) -> Vec<f64>;
}

fn check_actions(got: usize, expected: usize) -> Result<(), EnvError> {
    if got != expected {
        return Err(EnvError::WrongActionCount { expected, got });
    }
    Ok(())
}

/// One-hot encoding of a boolean as `[not flag, flag]`.
fn one_hot_flag(flag: bool) -> [f64; 2] {
    if flag {
        [0.0, 1.0]
    } else {
        [1.0, 0.0]
    }
}
