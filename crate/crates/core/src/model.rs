//! Model parameters and the environment-level quantities derived from them.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::Tolerances;

/// State of the alternating environment.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Env {
    One,
    Two,
}

impl Env {
    pub const BOTH: [Env; 2] = [Env::One, Env::Two];

    /// Zero-based index used for the `[f64; 2]` per-environment arrays.
    pub fn index(self) -> usize {
        match self {
            Env::One => 0,
            Env::Two => 1,
        }
    }

    pub fn other(self) -> Env {
        match self {
            Env::One => Env::Two,
            Env::Two => Env::One,
        }
    }

    pub fn from_index(i: usize) -> Option<Env> {
        match i {
            0 => Some(Env::One),
            1 => Some(Env::Two),
            _ => None,
        }
    }
}

/// Raw rates of the clearing system (all per unit time).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    pub lambda1: f64,
    pub lambda2: f64,
    pub mu1: f64,
    pub mu2: f64,
    pub q12: f64,
    pub q21: f64,
}

impl ModelParams {
    pub fn new(lambda: [f64; 2], mu: [f64; 2], q12: f64, q21: f64) -> Self {
        ModelParams {
            lambda1: lambda[0],
            lambda2: lambda[1],
            mu1: mu[0],
            mu2: mu[1],
            q12,
            q21,
        }
    }

    fn fields(&self) -> [(&'static str, f64); 6] {
        [
            ("lambda1", self.lambda1),
            ("lambda2", self.lambda2),
            ("mu1", self.mu1),
            ("mu2", self.mu2),
            ("q12", self.q12),
            ("q21", self.q21),
        ]
    }

    pub fn validate(&self) -> Result<()> {
        for (field, value) in self.fields() {
            if !(value.is_finite() && value > 0.0) {
                return Err(Error::NonPositiveRate { field, value });
            }
        }
        Ok(())
    }
}

/// Reward per completed service and waiting cost per unit time.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RewardCost {
    #[serde(rename = "R")]
    pub reward: f64,
    #[serde(rename = "C")]
    pub cost: f64,
}

impl RewardCost {
    pub fn new(reward: f64, cost: f64) -> Result<Self> {
        let rc = RewardCost { reward, cost };
        rc.validate()?;
        Ok(rc)
    }

    pub fn validate(&self) -> Result<()> {
        for (field, value) in [("R", self.reward), ("C", self.cost)] {
            if !(value.is_finite() && value > 0.0) {
                return Err(Error::NonPositiveRewardCost { field, value });
            }
        }
        Ok(())
    }

    pub fn ratio(&self) -> f64 {
        self.reward / self.cost
    }
}

/// Parameters that passed validation, with the derived congestion ratios,
/// environment stationary law and mean times to the next clearing.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ValidatedModel {
    params: ModelParams,
    rho: [f64; 2],
    env_stationary: [f64; 2],
    mean_clearing: [f64; 2],
}

impl ValidatedModel {
    pub fn new(params: ModelParams) -> Result<Self> {
        params.validate()?;
        let ModelParams {
            lambda1,
            lambda2,
            mu1,
            mu2,
            q12,
            q21,
        } = params;

        let p1 = q21 / (q12 + q21);
        let env_stationary = [p1, 1.0 - p1];

        // First-step analysis on the time until the next facility visit.
        let det = mu1 * mu2 + mu1 * q21 + mu2 * q12;
        let mean_clearing = [(mu2 + q21 + q12) / det, (mu1 + q21 + q12) / det];

        Ok(ValidatedModel {
            params,
            rho: [lambda1 / mu1, lambda2 / mu2],
            env_stationary,
            mean_clearing,
        })
    }

    pub fn params(&self) -> &ModelParams {
        &self.params
    }

    pub fn lambda(&self) -> [f64; 2] {
        [self.params.lambda1, self.params.lambda2]
    }

    pub fn mu(&self) -> [f64; 2] {
        [self.params.mu1, self.params.mu2]
    }

    /// Rate of leaving environment `e` for the other one.
    pub fn switch_rate(&self, e: Env) -> f64 {
        match e {
            Env::One => self.params.q12,
            Env::Two => self.params.q21,
        }
    }

    pub fn rho(&self) -> [f64; 2] {
        self.rho
    }

    /// `(p_E(1), p_E(2))`, summing to exactly one.
    pub fn env_stationary(&self) -> [f64; 2] {
        self.env_stationary
    }

    /// `(E[S_1], E[S_2])`: expected time to the next clearing given the
    /// current environment. Independent of the queue length.
    pub fn mean_clearing(&self) -> [f64; 2] {
        self.mean_clearing
    }

    /// Environment distribution seen by an arbitrary arrival.
    pub fn arrival_env_weights(&self) -> [f64; 2] {
        let l = self.lambda();
        let p = self.env_stationary;
        let total = l[0] * p[0] + l[1] * p[1];
        [l[0] * p[0] / total, l[1] * p[1] / total]
    }
}

/// Validate both the rate parameters and the reward/cost pair.
pub fn validate_params(raw: &ModelParams, rc: &RewardCost) -> Result<ValidatedModel> {
    let model = ValidatedModel::new(*raw)?;
    rc.validate()?;
    Ok(model)
}

/// Sign class of `(mu1 - mu2)(rho1 - rho2)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum CaseLabel {
    /// Negative product: the fast environment is the less congested one.
    CaseA,
    /// Positive product: the fast environment is the more congested one.
    CaseB,
    /// Zero product: the queue length carries no information.
    CaseC,
}

impl std::fmt::Display for CaseLabel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            CaseLabel::CaseA => "A",
            CaseLabel::CaseB => "B",
            CaseLabel::CaseC => "C",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CongestionCase {
    pub label: CaseLabel,
    /// Raw value of `(mu1 - mu2)(rho1 - rho2)`.
    pub product: f64,
}

pub fn congestion_case(model: &ValidatedModel) -> CongestionCase {
    congestion_case_with(model, &Tolerances::default())
}

pub fn congestion_case_with(model: &ValidatedModel, tol: &Tolerances) -> CongestionCase {
    let [mu1, mu2] = model.mu();
    let [rho1, rho2] = model.rho();
    let product = (mu1 - mu2) * (rho1 - rho2);
    let scale = (mu1.abs() + mu2.abs()) * (rho1.abs() + rho2.abs());
    let label = if product.abs() <= tol.case_relative * scale {
        CaseLabel::CaseC
    } else if product < 0.0 {
        CaseLabel::CaseA
    } else {
        CaseLabel::CaseB
    };
    CongestionCase { label, product }
}
