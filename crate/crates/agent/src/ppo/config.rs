use serde::{Deserialize, Serialize};

use crate::AgentError;

/// PPO hyper-parameters. The per-environment constructors carry the exact
/// training configurations used by the experiments.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PpoConfig {
    pub learning_rate: f64,
    pub n_workers: usize,
    pub rollout_steps: usize,
    pub gamma: f64,
    pub gae_lambda: f64,
    pub n_minibatches: usize,
    pub update_epochs: usize,
    pub normalize_advantage: bool,
    pub clip_coef: f64,
    pub clip_value_loss: bool,
    pub entropy_coef: f64,
    pub value_coef: f64,
    pub max_grad_norm: f64,
    pub total_timesteps: u64,
}

impl Default for PpoConfig {
    fn default() -> Self {
        Self::foodshare()
    }
}

impl PpoConfig {
    /// Food-sharing environment configuration (hidden dim 16 lives in the
    /// network config).
    pub fn foodshare() -> Self {
        Self {
            learning_rate: 1e-3,
            n_workers: 16,
            rollout_steps: 32,
            gamma: 0.99,
            gae_lambda: 0.95,
            n_minibatches: 4,
            update_epochs: 4,
            normalize_advantage: true,
            clip_coef: 0.1,
            clip_value_loss: true,
            entropy_coef: 0.01,
            value_coef: 0.5,
            max_grad_norm: 0.5,
            total_timesteps: 25_000,
        }
    }

    /// Linear grid environment configuration.
    pub fn grid() -> Self {
        Self {
            rollout_steps: 100,
            total_timesteps: 1_000_000,
            ..Self::foodshare()
        }
    }

    /// 2-D field environment configuration.
    pub fn field2d() -> Self {
        Self {
            rollout_steps: 1024,
            n_minibatches: 2,
            entropy_coef: 0.0,
            value_coef: 0.3,
            total_timesteps: 20_000_000,
            ..Self::foodshare()
        }
    }

    /// Environment steps gathered per training iteration.
    pub fn batch_env_steps(&self) -> u64 {
        (self.n_workers * self.rollout_steps) as u64
    }

    pub fn validate(&self, n_streams: usize) -> Result<(), AgentError> {
        let mut problems = Vec::new();
        if !(self.learning_rate > 0.0) {
            problems.push("learning_rate must be positive");
        }
        if self.n_workers == 0 || self.rollout_steps == 0 {
            problems.push("n_workers and rollout_steps must be positive");
        }
        if !(0.0..1.0).contains(&self.gamma) {
            problems.push("gamma must lie in [0, 1)");
        }
        if !(0.0..1.0).contains(&self.gae_lambda) {
            problems.push("gae_lambda must lie in [0, 1)");
        }
        if self.n_minibatches == 0 || self.update_epochs == 0 {
            problems.push("n_minibatches and update_epochs must be positive");
        }
        if !(self.clip_coef > 0.0) {
            problems.push("clip_coef must be positive");
        }
        if self.entropy_coef < 0.0 || self.value_coef < 0.0 {
            problems.push("loss coefficients must be non-negative");
        }
        if !(self.max_grad_norm > 0.0) {
            problems.push("max_grad_norm must be positive");
        }
        if self.total_timesteps == 0 {
            problems.push("total_timesteps must be positive");
        }
        if n_streams > 0 && n_streams % self.n_minibatches != 0 {
            problems.push("n_minibatches must evenly partition the policy streams");
        }
        if problems.is_empty() {
            Ok(())
        } else {
            Err(AgentError::InvalidConfig(problems.join("; ")))
        }
    }
}
