//! Dominant strategies when the queue length is not used: the fully
//! unobservable, almost unobservable and fully observable cases.
//!
//! The time to the next clearing does not depend on how many customers are
//! waiting, so a tagged customer's benefit never depends on what the others
//! do and a dominant strategy always exists.

use serde::{Deserialize, Serialize};

use crate::model::{RewardCost, ValidatedModel};
use crate::Tolerances;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CriticalValues {
    pub v_fu: f64,
    pub v_au_min: f64,
    pub v_au_max: f64,
}

pub fn critical_values(model: &ValidatedModel) -> CriticalValues {
    let p = model.params();
    let (l1, l2, m1, m2, q12, q21) = (p.lambda1, p.lambda2, p.mu1, p.mu2, p.q12, p.q21);
    let det = m1 * m2 + m1 * q21 + m2 * q12;
    let v_fu = (l1 * q21 * m2 + l2 * q12 * m1) / ((l1 * q21 + l2 * q12) * det) + (q21 + q12) / det;
    CriticalValues {
        v_fu,
        v_au_min: (m1.min(m2) + q21 + q12) / det,
        v_au_max: (m1.max(m2) + q21 + q12) / det,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum InfoRegime {
    FullyUnobservable,
    AlmostUnobservable,
    FullyObservable,
}

/// Joining decision for one information state.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum JoinChoice {
    /// `q = 0`.
    Balk,
    /// `q = 1`.
    Join,
    /// Any `q` in `[0, 1]`: the customer is indifferent.
    Free,
}

impl JoinChoice {
    fn from_benefit_gap(ratio: f64, critical: f64, tol: f64) -> (JoinChoice, bool) {
        if (ratio - critical).abs() <= tol * critical.abs() {
            (JoinChoice::Free, true)
        } else if ratio > critical {
            (JoinChoice::Join, false)
        } else {
            (JoinChoice::Balk, false)
        }
    }
}

impl std::fmt::Display for JoinChoice {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            JoinChoice::Balk => "0",
            JoinChoice::Join => "1",
            JoinChoice::Free => "[0,1]",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum DominanceKind {
    UniquePure,
    IndifferenceFamily,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum DominantChoice {
    /// A single joining probability, environment unseen.
    Pooled { q: JoinChoice },
    /// One joining probability per observed environment.
    PerEnvironment { q1: JoinChoice, q2: JoinChoice },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DominantStrategySet {
    pub regime: InfoRegime,
    pub kind: DominanceKind,
    pub choice: DominantChoice,
    /// Set when `R/C` sits within tolerance of a critical value.
    pub knife_edge: bool,
    /// Expected net benefit of joining: `S_fu` for the pooled case, or
    /// `(S_au(1), S_au(2))`.
    pub net_benefit: NetBenefit,
    pub critical: CriticalValues,
    /// Equilibrium and social optimum coincide in these regimes.
    pub socially_optimal: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum NetBenefit {
    Pooled(f64),
    PerEnvironment([f64; 2]),
}

pub fn dominant_fully_unobservable(model: &ValidatedModel, rc: &RewardCost) -> DominantStrategySet {
    dominant_fully_unobservable_with(model, rc, &Tolerances::default())
}

pub fn dominant_fully_unobservable_with(
    model: &ValidatedModel,
    rc: &RewardCost,
    tol: &Tolerances,
) -> DominantStrategySet {
    let critical = critical_values(model);
    let (q, knife_edge) = JoinChoice::from_benefit_gap(rc.ratio(), critical.v_fu, tol.knife_edge);
    DominantStrategySet {
        regime: InfoRegime::FullyUnobservable,
        kind: if knife_edge {
            DominanceKind::IndifferenceFamily
        } else {
            DominanceKind::UniquePure
        },
        choice: DominantChoice::Pooled { q },
        knife_edge,
        net_benefit: NetBenefit::Pooled(rc.reward - rc.cost * critical.v_fu),
        critical,
        socially_optimal: true,
    }
}

pub fn dominant_almost_unobservable(model: &ValidatedModel, rc: &RewardCost) -> DominantStrategySet {
    dominant_almost_unobservable_with(model, rc, &Tolerances::default())
}

/// Join in environment `e` iff `R/C > E[S_e]`. When `mu1 == mu2` both
/// critical values coincide and both coordinates are free at equality.
pub fn dominant_almost_unobservable_with(
    model: &ValidatedModel,
    rc: &RewardCost,
    tol: &Tolerances,
) -> DominantStrategySet {
    let critical = critical_values(model);
    let es = model.mean_clearing();
    let ratio = rc.ratio();
    let (q1, edge1) = JoinChoice::from_benefit_gap(ratio, es[0], tol.knife_edge);
    let (q2, edge2) = JoinChoice::from_benefit_gap(ratio, es[1], tol.knife_edge);
    let knife_edge = edge1 || edge2;
    DominantStrategySet {
        regime: InfoRegime::AlmostUnobservable,
        kind: if knife_edge {
            DominanceKind::IndifferenceFamily
        } else {
            DominanceKind::UniquePure
        },
        choice: DominantChoice::PerEnvironment { q1, q2 },
        knife_edge,
        net_benefit: NetBenefit::PerEnvironment([
            rc.reward - rc.cost * es[0],
            rc.reward - rc.cost * es[1],
        ]),
        critical,
        socially_optimal: true,
    }
}

pub fn dominant_fully_observable(model: &ValidatedModel, rc: &RewardCost) -> DominantStrategySet {
    dominant_fully_observable_with(model, rc, &Tolerances::default())
}

/// Once the environment is seen the queue length adds nothing, so this is
/// the almost unobservable answer under a different tag.
pub fn dominant_fully_observable_with(
    model: &ValidatedModel,
    rc: &RewardCost,
    tol: &Tolerances,
) -> DominantStrategySet {
    DominantStrategySet {
        regime: InfoRegime::FullyObservable,
        ..dominant_almost_unobservable_with(model, rc, tol)
    }
}
