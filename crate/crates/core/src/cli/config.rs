//! Run configuration loaded from a JSON file.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::model::{validate_params, ModelParams, RewardCost, ValidatedModel};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub lambda1: f64,
    pub lambda2: f64,
    pub mu1: f64,
    pub mu2: f64,
    pub q12: f64,
    pub q21: f64,
    #[serde(rename = "R")]
    pub reward: f64,
    #[serde(rename = "C")]
    pub cost: f64,
    /// Default seed when `--seed` is not given.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    /// Default knife-edge tolerance when `--tolerance` is not given.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tolerance: Option<f64>,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, String> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| format!("cannot read config {}: {e}", path.display()))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self, String> {
        let cfg: RunConfig =
            serde_json::from_str(text).map_err(|e| format!("invalid config: {e}"))?;
        cfg.validated().map_err(|e| format!("invalid config: {e}"))?;
        Ok(cfg)
    }

    pub fn params(&self) -> ModelParams {
        ModelParams::new(
            [self.lambda1, self.lambda2],
            [self.mu1, self.mu2],
            self.q12,
            self.q21,
        )
    }

    pub fn reward_cost(&self) -> RewardCost {
        RewardCost {
            reward: self.reward,
            cost: self.cost,
        }
    }

    pub fn validated(&self) -> crate::Result<(ValidatedModel, RewardCost)> {
        let rc = self.reward_cost();
        let model = validate_params(&self.params(), &rc)?;
        Ok((model, rc))
    }
}
