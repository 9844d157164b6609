//! The policy/value network: observation encoder (single hidden layer with
//! rectifier), one LSTM cell, categorical policy head, scalar value head.
//!
//! Parameters live in one flat vector so the optimizer, gradient clipping,
//! and finite-difference checks all operate on plain slices. Gradients are
//! hand-derived reverse-mode backpropagation through time.

mod checkpoint;
mod net;
mod params;

pub use checkpoint::Checkpoint;
pub(crate) use net::log_prob_of;
pub use net::{sample_action, SequenceCache, SequenceOutput, StepOutput};
pub use params::{NetConfig, ParamLayout, PolicyParams, RecurrentState};
