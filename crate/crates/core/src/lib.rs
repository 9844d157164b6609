//! Homeostatic drive functions, empathy coupling, and the drive-difference
//! reward transform shared by every environment and the exact solver.
//!
//! An agent is modelled as a homeostat: it senses an internal energy state
//! (interoception), a drive function maps that state to a non-negative
//! deviation from the setpoint, and the per-step reward is the scaled
//! decrease of the drive, `r = beta * (D_t - D_{t+1})`. Empathy conditions
//! optionally couple an agent's drive to its partner's.

mod drive;
mod empathy;
mod reward;

pub use drive::{
    drive_categorical, drive_quadratic, BinaryEnergy, ContinuousEnergy, Drive, PreferenceDist,
};
pub use empathy::{couple_drives, EmpathyCondition};
pub use reward::{homeostatic_reward, RewardScale};

use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum CoreError {
    #[error("preference probability {0} must lie strictly inside (0, 1)")]
    PreferenceOutOfRange(f64),
    #[error("drive value {0} must be non-negative and finite")]
    InvalidDrive(f64),
    #[error("reward scale beta {0} must be positive and finite")]
    InvalidScale(f64),
    #[error("unknown empathy condition `{0}` (expected none|cognitive|affective|full)")]
    UnknownCondition(String),
}
