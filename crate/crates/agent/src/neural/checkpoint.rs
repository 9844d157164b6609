use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::params::{NetConfig, ParamLayout, PolicyParams};
use crate::AgentError;

pub const CHECKPOINT_FORMAT_VERSION: u32 = 1;

/// Serialized network parameters plus provenance.
///
/// The JSON text round-trips f64 values exactly, so a reloaded checkpoint
/// reproduces the saved policy bit for bit.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Checkpoint {
    pub format_version: u32,
    /// Hash of the experiment configuration that produced these weights.
    pub config_hash: String,
    pub net: NetConfig,
    /// Free-form run metadata (environment id, condition, seed, ...).
    #[serde(default)]
    pub meta: BTreeMap<String, String>,
    pub theta: Vec<f64>,
}

impl Checkpoint {
    pub fn from_params(params: &PolicyParams, config_hash: &str) -> Self {
        Self {
            format_version: CHECKPOINT_FORMAT_VERSION,
            config_hash: config_hash.to_string(),
            net: params.cfg,
            meta: BTreeMap::new(),
            theta: params.theta.clone(),
        }
    }

    pub fn with_meta(mut self, key: &str, value: impl Into<String>) -> Self {
        self.meta.insert(key.to_string(), value.into());
        self
    }

    /// Reconstructs parameters, rejecting version or shape mismatches.
    pub fn into_params(self) -> Result<PolicyParams, AgentError> {
        if self.format_version != CHECKPOINT_FORMAT_VERSION {
            return Err(AgentError::Checkpoint(format!(
                "unsupported format version {} (expected {})",
                self.format_version, CHECKPOINT_FORMAT_VERSION
            )));
        }
        let layout = ParamLayout::of(self.net);
        if self.theta.len() != layout.total {
            return Err(AgentError::Checkpoint(format!(
                "parameter count {} does not match net shape (expected {})",
                self.theta.len(),
                layout.total
            )));
        }
        if !self.theta.iter().all(|v| v.is_finite()) {
            return Err(AgentError::Checkpoint(
                "non-finite parameter values".to_string(),
            ));
        }
        Ok(PolicyParams {
            cfg: self.net,
            layout,
            theta: self.theta,
        })
    }

    pub fn save(&self, path: &Path) -> Result<(), AgentError> {
        let json = serde_json::to_string(self)
            .map_err(|e| AgentError::Checkpoint(format!("serialize: {e}")))?;
        fs::write(path, json)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self, AgentError> {
        let json = fs::read_to_string(path)?;
        serde_json::from_str(&json)
            .map_err(|e| AgentError::Checkpoint(format!("parse {}: {e}", path.display())))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn checkpoint_round_trips_bit_for_bit() {
        let cfg = NetConfig::new(3, 8, 4);
        let mut rng = ChaCha8Rng::seed_from_u64(77);
        let params = PolicyParams::orthogonal_init(cfg, &mut rng);
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("ckpt.json");

        let ckpt = Checkpoint::from_params(&params, "deadbeef")
            .with_meta("environment", "foodshare")
            .with_meta("condition", "affective");
        ckpt.save(&path).unwrap();

        let loaded = Checkpoint::load(&path).unwrap();
        assert_eq!(loaded.config_hash, "deadbeef");
        assert_eq!(loaded.meta["condition"], "affective");
        let restored = loaded.into_params().unwrap();
        assert_eq!(restored.theta, params.theta);
        assert_eq!(restored.cfg, cfg);
    }

    #[test]
    fn shape_mismatch_is_rejected() {
        let cfg = NetConfig::new(3, 8, 4);
        let params = PolicyParams::zeroed(cfg);
        let mut ckpt = Checkpoint::from_params(&params, "x");
        ckpt.net = NetConfig::new(3, 16, 4);
        assert!(matches!(
            ckpt.into_params(),
            Err(AgentError::Checkpoint(_))
        ));
    }

    #[test]
    fn version_mismatch_is_rejected() {
        let cfg = NetConfig::new(2, 4, 2);
        let params = PolicyParams::zeroed(cfg);
        let mut ckpt = Checkpoint::from_params(&params, "x");
        ckpt.format_version = 99;
        assert!(ckpt.into_params().is_err());
    }
}
