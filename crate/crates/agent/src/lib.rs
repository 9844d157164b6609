//! Recurrent policy learning: a fixed encoder/LSTM/softmax network with
//! exact reverse-mode gradients, plus recurrent PPO with generalized
//! advantage estimation.
//!
//! The network is deliberately small and hand-differentiated; the
//! finite-difference suite in `tests/` gates the gradient code.

pub mod neural;
pub mod ppo;
pub mod seed;

pub use neural::{
    sample_action, Checkpoint, NetConfig, PolicyParams, RecurrentState, SequenceOutput,
    StepOutput,
};
pub use ppo::{
    clip_gradient, compute_gae, evaluate_loss, normalize_advantages, ppo_update, Adam, EpisodeStat,
    IterationReport, PpoConfig, RolloutBatch, RolloutCollector, Trainer, UpdateStats,
};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum AgentError {
    #[error("environment error: {0}")]
    Env(#[from] homeostat_envs::EnvError),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error(
        "non-finite loss at iteration {iteration} (policy {policy_loss}, value {value_loss}, entropy {entropy})"
    )]
    NonFiniteLoss {
        iteration: u64,
        policy_loss: f64,
        value_loss: f64,
        entropy: f64,
    },
    #[error("checkpoint rejected: {0}")]
    Checkpoint(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}
