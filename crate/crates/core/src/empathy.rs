use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::{CoreError, Drive};

/// Weight applied to the partner's drive under affective coupling.
pub const COUPLING_WEIGHT: f64 = 0.5;

/// The four empathy conditions compared across experiments.
///
/// Each condition is a fixed pair of (observe partner, coupling weight):
/// observation is the cognitive channel, coupling the affective one.
///
/// | condition | observes partner | coupling w |
/// |-----------|------------------|------------|
/// | None      | no               | 0.0        |
/// | Cognitive | yes              | 0.0        |
/// | Affective | no               | 0.5        |
/// | Full      | yes              | 0.5        |
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EmpathyCondition {
    None,
    Cognitive,
    Affective,
    Full,
}

impl EmpathyCondition {
    pub const ALL: [EmpathyCondition; 4] = [
        EmpathyCondition::None,
        EmpathyCondition::Cognitive,
        EmpathyCondition::Affective,
        EmpathyCondition::Full,
    ];

    /// Whether the partner's interoception is appended to the observation.
    pub fn observes_partner(self) -> bool {
        matches!(self, EmpathyCondition::Cognitive | EmpathyCondition::Full)
    }

    /// Affective weight `w` applied to the partner's drive.
    pub fn coupling_weight(self) -> f64 {
        match self {
            EmpathyCondition::None | EmpathyCondition::Cognitive => 0.0,
            EmpathyCondition::Affective | EmpathyCondition::Full => COUPLING_WEIGHT,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            EmpathyCondition::None => "none",
            EmpathyCondition::Cognitive => "cognitive",
            EmpathyCondition::Affective => "affective",
            EmpathyCondition::Full => "full",
        }
    }
}

impl fmt::Display for EmpathyCondition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for EmpathyCondition {
    type Err = CoreError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "none" => Ok(EmpathyCondition::None),
            "cognitive" => Ok(EmpathyCondition::Cognitive),
            "affective" => Ok(EmpathyCondition::Affective),
            "full" => Ok(EmpathyCondition::Full),
            other => Err(CoreError::UnknownCondition(other.to_string())),
        }
    }
}

/// Couples an agent's drive to its partner's: `D = D_self + w * D_partner`.
///
/// Coupling always happens on drives, never on rewards, so the telescoping
/// identity of the reward transform holds for the coupled drive as well.
pub fn couple_drives(d_self: Drive, d_partner: Drive, cond: EmpathyCondition) -> Drive {
    Drive::new(d_self.value() + cond.coupling_weight() * d_partner.value())
        .expect("sum of non-negative drives is non-negative")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn condition_table_is_exact() {
        use EmpathyCondition::*;
        let table = [
            (None, false, 0.0),
            (Cognitive, true, 0.0),
            (Affective, false, 0.5),
            (Full, true, 0.5),
        ];
        for (cond, observes, w) in table {
            assert_eq!(cond.observes_partner(), observes, "{cond}");
            assert_eq!(cond.coupling_weight(), w, "{cond}");
        }
    }

    #[test]
    fn affective_coupling_example() {
        let d = couple_drives(
            Drive::new(0.051293).unwrap(),
            Drive::new(2.995732).unwrap(),
            EmpathyCondition::Affective,
        );
        assert!((d.value() - 1.549159).abs() < 1e-6, "got {}", d.value());
    }

    #[test]
    fn no_coupling_is_identity() {
        let d_self = Drive::new(0.42).unwrap();
        let d_partner = Drive::new(7.0).unwrap();
        assert_eq!(
            couple_drives(d_self, d_partner, EmpathyCondition::None).value(),
            d_self.value()
        );
        assert_eq!(
            couple_drives(d_self, d_partner, EmpathyCondition::Cognitive).value(),
            d_self.value()
        );
    }

    #[test]
    fn zero_drives_couple_to_zero() {
        let d = couple_drives(Drive::ZERO, Drive::ZERO, EmpathyCondition::Full);
        assert_eq!(d.value(), 0.0);
    }

    #[test]
    fn condition_round_trips_through_names() {
        for cond in EmpathyCondition::ALL {
            assert_eq!(cond.name().parse::<EmpathyCondition>().unwrap(), cond);
        }
        assert!("mirror".parse::<EmpathyCondition>().is_err());
    }
}
