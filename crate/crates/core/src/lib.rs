//! Equilibrium join/balk strategies for a Markovian stochastic clearing queue
//! whose arrival and clearing rates are modulated by a two-state environment.
//!
//! Customers arrive, observe some part of the state, and decide whether to
//! join. All waiting customers leave together when the transport facility
//! visits. Four information levels are covered:
//!
//! * fully unobservable, almost unobservable and fully observable, where a
//!   dominant strategy exists ([`unobservable`]);
//! * almost observable (queue length seen, environment hidden), where the
//!   equilibria are threshold or reverse-threshold strategies
//!   ([`equilibrium`]), built on the closed-form stationary laws in
//!   [`spectral`] and the benefit functions in [`benefit`].
//!
//! [`oracle`] holds a truncated balance-equation solver and a discrete-event
//! simulator that check the closed forms independently.

pub mod benefit;
pub mod cli;
pub mod equilibrium;
pub mod error;
pub mod model;
pub mod oracle;
pub mod spectral;
pub mod strategy;
pub mod unobservable;

use serde::{Deserialize, Serialize};

pub use benefit::{benefit_coefficients, net_benefit_ao, BenefitCoefficients, BenefitValue};
pub use equilibrium::{compute_equilibria, EquilibriumReport, ThresholdBounds};
pub use error::{Error, Result};
pub use model::{
    congestion_case, validate_params, CaseLabel, CongestionCase, Env, ModelParams, RewardCost,
    ValidatedModel,
};
pub use spectral::{spectral_quantities, SpectralData, StationaryDistribution};
pub use strategy::Strategy;

/// Numerical tolerances for the knife-edge decisions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    /// Relative band around zero for `(mu1 - mu2)(rho1 - rho2)`.
    pub case_relative: f64,
    /// Band used for the sign tests on benefits and on `R/C` against
    /// critical values.
    pub knife_edge: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            case_relative: 1e-12,
            knife_edge: 1e-9,
        }
    }
}

/// Everything derived from a model and a reward/cost pair, computed once.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Analysis {
    pub model: ValidatedModel,
    pub reward_cost: RewardCost,
    pub spectral: SpectralData,
    pub coefficients: BenefitCoefficients,
}

impl Analysis {
    pub fn new(params: &ModelParams, rc: &RewardCost) -> Result<Self> {
        let model = validate_params(params, rc)?;
        let spectral = spectral_quantities(&model);
        let coefficients = benefit_coefficients(&model, &spectral, rc);
        Ok(Analysis {
            model,
            reward_cost: *rc,
            spectral,
            coefficients,
        })
    }

    pub fn equilibria(&self, tol: &Tolerances) -> Result<EquilibriumReport> {
        equilibrium::compute_equilibria_with(&self.model, &self.coefficients, tol)
    }
}
