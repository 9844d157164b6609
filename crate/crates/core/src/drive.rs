use serde::{Deserialize, Serialize};

use crate::CoreError;

/// Desirability distribution over the two binary energy labels.
///
/// Houses the preference `P*` used by the categorical drive; the default is
/// heavily weighted toward the High state.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PreferenceDist {
    p_high: f64,
    p_low: f64,
}

impl PreferenceDist {
    /// Builds a preference from the probability assigned to High; Low takes
    /// the complement. Both masses must lie strictly inside (0, 1) so the
    /// log-drive stays finite.
    pub fn new(p_high: f64) -> Result<Self, CoreError> {
        if !(p_high.is_finite() && p_high > 0.0 && p_high < 1.0) {
            return Err(CoreError::PreferenceOutOfRange(p_high));
        }
        Ok(Self {
            p_high,
            p_low: 1.0 - p_high,
        })
    }

    pub fn p_high(&self) -> f64 {
        self.p_high
    }

    pub fn p_low(&self) -> f64 {
        self.p_low
    }

    pub fn prob_of(&self, state: BinaryEnergy) -> f64 {
        match state {
            BinaryEnergy::High => self.p_high,
            BinaryEnergy::Low => self.p_low,
        }
    }
}

impl Default for PreferenceDist {
    /// P*(High) = 0.95, P*(Low) = 0.05.
    fn default() -> Self {
        Self::new(0.95).expect("0.95 is a valid preference mass")
    }
}

/// Binary interoceptive energy label.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum BinaryEnergy {
    High,
    Low,
}

impl BinaryEnergy {
    /// Numeric encoding used everywhere a network observes a binary energy:
    /// High = 1.0, Low = 0.0. Keeping this in one place pins the observation
    /// layout for checkpoints.
    pub fn encode(self) -> f64 {
        match self {
            BinaryEnergy::High => 1.0,
            BinaryEnergy::Low => 0.0,
        }
    }

    pub fn is_low(self) -> bool {
        matches!(self, BinaryEnergy::Low)
    }
}

/// Continuous interoceptive energy level.
///
/// The live range is [-1, 1]; leaving it is an episode-terminal event, which
/// the environments enforce (this type stores whatever the dynamics produce
/// so the terminal value itself remains observable in diagnostics).
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
pub struct ContinuousEnergy(pub f64);

impl ContinuousEnergy {
    pub fn value(self) -> f64 {
        self.0
    }

    /// True while the energy sits strictly inside the survivable band.
    pub fn in_live_range(self) -> bool {
        self.0 > -1.0 && self.0 < 1.0
    }
}

/// Non-negative deviation of interoception from its setpoint.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct Drive(f64);

impl Drive {
    pub fn new(value: f64) -> Result<Self, CoreError> {
        if !(value.is_finite() && value >= 0.0) {
            return Err(CoreError::InvalidDrive(value));
        }
        Ok(Self(value))
    }

    pub const ZERO: Drive = Drive(0.0);

    pub fn value(self) -> f64 {
        self.0
    }
}

/// Categorical drive: `-ln P*(state)`.
///
/// Strictly positive whenever the preference puts mass below one on the
/// current state, so dwelling in the dispreferred label keeps the drive high.
pub fn drive_categorical(state: BinaryEnergy, pref: &PreferenceDist) -> Drive {
    Drive(-pref.prob_of(state).ln())
}

/// Quadratic drive: squared deviation of the energy level from the zero
/// setpoint.
pub fn drive_quadratic(energy: ContinuousEnergy) -> Drive {
    let e = energy.value();
    Drive(e * e)
}
