//! Recurrent Proximal Policy Optimization: clipped surrogate, clipped value
//! loss, entropy bonus, generalized advantage estimation, and
//! sequence-preserving minibatches over whole worker segments.

mod adam;
mod config;
mod gae;
mod rollout;
mod trainer;
mod update;

pub use adam::Adam;
pub use config::PpoConfig;
pub use gae::compute_gae;
pub use rollout::{EpisodeStat, RolloutBatch, RolloutCollector};
pub use trainer::{IterationReport, Trainer};
pub use update::{clip_gradient, evaluate_loss, normalize_advantages, ppo_update, UpdateStats};
