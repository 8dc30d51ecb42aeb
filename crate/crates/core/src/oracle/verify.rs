//! Best-response check of a strategy against itself, using Palm
//! probabilities from the truncated balance solve.
//!
//! At every reachable `n` an arrival must weakly prefer what the strategy
//! tells it to do: join with probability one only if `S(n) >= -tol`, balk
//! only if `S(n) <= tol`, and randomise only if `|S(n)| <= tol`.

use serde::{Deserialize, Serialize};

use crate::equilibrium::EquilibriumReport;
use crate::error::Result;
use crate::model::{RewardCost, ValidatedModel};
use crate::oracle::balance::{solve_adaptive, TruncatedSolution};
use crate::strategy::Strategy;

pub const VERIFY_TOLERANCE: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StateCheck {
    pub n: u64,
    pub join_probability: f64,
    pub benefit: f64,
    /// Distance to violating the condition; negative means violated.
    pub margin: f64,
}

impl StateCheck {
    pub fn passed(&self) -> bool {
        self.margin >= 0.0
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub strategy: Strategy,
    pub tolerance: f64,
    pub states: Vec<StateCheck>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VerificationSummary {
    pub passed: bool,
    pub checked_states: usize,
    pub worst_margin: f64,
    pub first_failure: Option<u64>,
}

impl VerificationReport {
    pub fn passed(&self) -> bool {
        self.states.iter().all(StateCheck::passed)
    }

    pub fn benefit(&self, n: u64) -> Option<f64> {
        self.states.iter().find(|s| s.n == n).map(|s| s.benefit)
    }

    pub fn summary(&self) -> VerificationSummary {
        VerificationSummary {
            passed: self.passed(),
            checked_states: self.states.len(),
            worst_margin: self.states.iter().map(|s| s.margin).fold(f64::INFINITY, f64::min),
            first_failure: self.states.iter().find(|s| !s.passed()).map(|s| s.n),
        }
    }
}

/// Oracle net benefit `R - C E[time to clearing | arrival sees n]` at every
/// level of `sol` that carries mass, excluding the truncation level.
pub fn oracle_benefits(
    model: &ValidatedModel,
    rc: &RewardCost,
    sol: &TruncatedSolution,
    finite_support: bool,
) -> Vec<(u64, f64)> {
    let last = if finite_support { sol.n_max } else { sol.n_max - 1 };
    (0..=last)
        .filter_map(|n| {
            sol.conditional_sojourn(model, n)
                .map(|s| (n, rc.reward - rc.cost * s))
        })
        .collect()
}

pub fn verify_equilibrium(
    model: &ValidatedModel,
    rc: &RewardCost,
    strategy: &Strategy,
) -> Result<VerificationReport> {
    verify_equilibrium_with(model, rc, strategy, VERIFY_TOLERANCE)
}

pub fn verify_equilibrium_with(
    model: &ValidatedModel,
    rc: &RewardCost,
    strategy: &Strategy,
    tol: f64,
) -> Result<VerificationReport> {
    let sol = solve_adaptive(model, strategy)?;
    let finite = strategy.support_bound().is_some();
    let states = oracle_benefits(model, rc, &sol, finite)
        .into_iter()
        .map(|(n, benefit)| {
            let p = strategy.join_probability(n);
            let margin = if p == 1.0 {
                benefit + tol
            } else if p == 0.0 {
                tol - benefit
            } else {
                tol - benefit.abs()
            };
            StateCheck {
                n,
                join_probability: p,
                benefit,
                margin,
            }
        })
        .collect();
    Ok(VerificationReport {
        strategy: strategy.clone(),
        tolerance: tol,
        states,
    })
}

impl EquilibriumReport {
    /// Run the oracle verifier on every emitted equilibrium and store the
    /// outcome. For the indifference family both extreme members are
    /// checked. Returns whether all passed.
    pub fn attach_verification(&mut self, model: &ValidatedModel, rc: &RewardCost) -> Result<bool> {
        let mut all = true;
        for entry in &mut self.equilibria {
            let summary = match &entry.strategy {
                Some(s) => verify_equilibrium(model, rc, s)?.summary(),
                None => {
                    let join = verify_equilibrium(model, rc, &Strategy::AlwaysJoin)?.summary();
                    let balk = verify_equilibrium(model, rc, &Strategy::AlwaysBalk)?.summary();
                    VerificationSummary {
                        passed: join.passed && balk.passed,
                        checked_states: join.checked_states + balk.checked_states,
                        worst_margin: join.worst_margin.min(balk.worst_margin),
                        first_failure: join.first_failure.or(balk.first_failure),
                    }
                }
            };
            all &= summary.passed;
            entry.verification = Some(summary);
        }
        Ok(all)
    }
}
