use serde::{Deserialize, Serialize};

use crate::{CoreError, Drive};

/// Positive scaling constant `beta` applied to the drive difference.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RewardScale {
    beta: f64,
}

impl RewardScale {
    /// beta = 1, used by the binary-energy environment where the categorical
    /// drive is already O(1).
    pub const UNIT: RewardScale = RewardScale { beta: 1.0 };
    /// beta = 100, used by both continuous-energy environments.
    pub const CONTINUOUS: RewardScale = RewardScale { beta: 100.0 };

    pub fn new(beta: f64) -> Result<Self, CoreError> {
        if !(beta.is_finite() && beta > 0.0) {
            return Err(CoreError::InvalidScale(beta));
        }
        Ok(Self { beta })
    }

    pub fn beta(self) -> f64 {
        self.beta
    }
}

/// Homeostatic reward: `r = beta * (D_prev - D_next)`.
///
/// The sign is free: reward is positive when the drive shrinks. Summed over
/// any drive sequence the per-step rewards telescope to
/// `beta * (D_first - D_last)`.
pub fn homeostatic_reward(d_prev: Drive, d_next: Drive, scale: RewardScale) -> f64 {
    scale.beta() * (d_prev.value() - d_next.value())
}
