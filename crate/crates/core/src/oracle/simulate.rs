//! Discrete-event simulation of the clearing queue.
//!
//! Each replication runs an exponential race between arrival, clearing and
//! environment switch. Every arrival after warm-up is recorded with the
//! queue length it sees, its environment, and the time until the next
//! clearing, whether it joins or not. Joiners additionally feed the
//! per-environment sojourn statistics.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::Exp1;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{RewardCost, ValidatedModel};
use crate::strategy::Strategy;

/// Queue lengths `0..=REPORTED_LEVELS` get their own rows; longer queues
/// are pooled into the tail.
pub const REPORTED_LEVELS: usize = 30;
const WARMUP_FRACTION: f64 = 0.1;

/// Cross-replication mean with its standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub mean: Option<f64>,
    pub se: Option<f64>,
    /// Replications that produced a value.
    pub samples: usize,
}

impl Estimate {
    fn from_samples(values: impl Iterator<Item = Option<f64>>) -> Self {
        let xs: Vec<f64> = values.flatten().collect();
        let k = xs.len();
        if k == 0 {
            return Estimate {
                mean: None,
                se: None,
                samples: 0,
            };
        }
        let mean = xs.iter().sum::<f64>() / k as f64;
        let se = (k >= 2).then(|| {
            let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (k - 1) as f64;
            (var / k as f64).sqrt()
        });
        Estimate {
            mean: Some(mean),
            se,
            samples: k,
        }
    }

    /// Whether `target` lies within `z` standard errors. A zero standard
    /// error demands an exact match.
    pub fn covers(&self, target: f64, z: f64) -> bool {
        match (self.mean, self.se) {
            (Some(m), Some(se)) => (m - target).abs() <= z * se,
            _ => false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimEstimates {
    pub strategy: Strategy,
    pub horizon: f64,
    pub warmup: f64,
    pub seed: u64,
    pub replications: usize,
    pub event_count: u64,
    /// Time-average `p(n, e)` for `n <= REPORTED_LEVELS`.
    pub masses: Vec<[Estimate; 2]>,
    /// Time-average mass above `REPORTED_LEVELS`.
    pub tail_mass: [Estimate; 2],
    /// Fraction of arrivals seeing `n` that are in environment 1.
    pub palm_env1: Vec<Estimate>,
    /// Mean time to the next clearing for arrivals seeing `n`.
    pub conditional_sojourn: Vec<Estimate>,
    /// `R - C * conditional_sojourn`.
    pub conditional_benefit: Vec<Estimate>,
    /// Mean sojourn of joiners by entry environment.
    pub joiner_sojourn: [Estimate; 2],
    /// Mean net benefit over all joiners.
    pub joiner_benefit: Estimate,
}

#[derive(Default)]
struct RepStats {
    events: u64,
    occupancy: Vec<[f64; 2]>,
    observed: f64,
    arrivals: Vec<[u64; 2]>,
    sojourn_sum: Vec<f64>,
    joiner_sum: [f64; 2],
    joiner_count: [u64; 2],
}

struct Pending {
    level: usize,
    env: usize,
    joined: bool,
    time: f64,
}

fn run_replication(
    model: &ValidatedModel,
    strategy: &Strategy,
    horizon: f64,
    seed: u64,
    rep: u64,
) -> RepStats {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(rep);
    let p = model.params();
    let lam = model.lambda();
    let mu = model.mu();
    let q = [p.q12, p.q21];
    let warm = WARMUP_FRACTION * horizon;
    let pe = model.env_stationary();

    let rows = REPORTED_LEVELS + 2;
    let mut st = RepStats {
        occupancy: vec![[0.0; 2]; rows],
        arrivals: vec![[0; 2]; rows - 1],
        sojourn_sum: vec![0.0; rows - 1],
        ..Default::default()
    };
    let mut pending: Vec<Pending> = Vec::new();

    let mut env = usize::from(rng.gen::<f64>() >= pe[0]);
    let mut n: u64 = 0;
    let mut t = 0.0f64;
    loop {
        let total = lam[env] + mu[env] + q[env];
        let dt: f64 = rng.sample::<f64, _>(Exp1) / total;
        let t_next = t + dt;
        let lo = t.max(warm);
        let hi = t_next.min(horizon);
        if hi > lo {
            let row = (n as usize).min(REPORTED_LEVELS + 1);
            st.occupancy[row][env] += hi - lo;
        }
        t = t_next;
        if t > horizon && pending.is_empty() {
            break;
        }
        st.events += 1;

        let u = rng.gen::<f64>() * total;
        if u < lam[env] {
            let theta = strategy.join_probability(n);
            let joined = rng.gen::<f64>() < theta;
            if t >= warm && t <= horizon && (n as usize) <= REPORTED_LEVELS {
                pending.push(Pending {
                    level: n as usize,
                    env,
                    joined,
                    time: t,
                });
            } else if t >= warm && t <= horizon && joined {
                pending.push(Pending {
                    level: usize::MAX,
                    env,
                    joined,
                    time: t,
                });
            }
            if joined {
                n += 1;
            }
        } else if u < lam[env] + mu[env] {
            for a in pending.drain(..) {
                let s = t - a.time;
                if a.level != usize::MAX {
                    st.arrivals[a.level][a.env] += 1;
                    st.sojourn_sum[a.level] += s;
                }
                if a.joined {
                    st.joiner_sum[a.env] += s;
                    st.joiner_count[a.env] += 1;
                }
            }
            n = 0;
            if t > horizon {
                break;
            }
        } else {
            env = 1 - env;
        }
    }
    st.observed = horizon - warm;
    st
}

/// Simulate `replications` independent runs of length `horizon`.
///
/// Replication `k` uses the ChaCha8 stream `k` of `seed`, so output depends
/// only on `(seed, replications, horizon)` and not on thread scheduling.
pub fn simulate(
    model: &ValidatedModel,
    rc: &RewardCost,
    strategy: &Strategy,
    horizon: f64,
    seed: u64,
    replications: usize,
) -> Result<SimEstimates> {
    strategy.validate()?;
    if !(horizon.is_finite() && horizon > 0.0) {
        return Err(Error::InvalidSimulation(format!("horizon must be positive, got {horizon}")));
    }
    if replications == 0 {
        return Err(Error::InvalidSimulation("at least one replication is required".into()));
    }

    let reps: Vec<RepStats> = (0..replications as u64)
        .into_par_iter()
        .map(|k| run_replication(model, strategy, horizon, seed, k))
        .collect();

    let cell = |f: &dyn Fn(&RepStats) -> Option<f64>| Estimate::from_samples(reps.iter().map(f));
    let masses = (0..=REPORTED_LEVELS)
        .map(|n| [0, 1].map(|e| cell(&|r| Some(r.occupancy[n][e] / r.observed))))
        .collect();
    let tail_mass = [0, 1].map(|e| cell(&|r| Some(r.occupancy[REPORTED_LEVELS + 1][e] / r.observed)));

    let seen = |r: &RepStats, n: usize| r.arrivals[n][0] + r.arrivals[n][1];
    let palm_env1 = (0..=REPORTED_LEVELS)
        .map(|n| cell(&|r| (seen(r, n) > 0).then(|| r.arrivals[n][0] as f64 / seen(r, n) as f64)))
        .collect();
    let mean_sojourn = |r: &RepStats, n: usize| (seen(r, n) > 0).then(|| r.sojourn_sum[n] / seen(r, n) as f64);
    let conditional_sojourn = (0..=REPORTED_LEVELS).map(|n| cell(&|r| mean_sojourn(r, n))).collect();
    let conditional_benefit = (0..=REPORTED_LEVELS)
        .map(|n| cell(&|r| mean_sojourn(r, n).map(|s| rc.reward - rc.cost * s)))
        .collect();
    let joiner_sojourn = [0, 1].map(|e| {
        cell(&|r| (r.joiner_count[e] > 0).then(|| r.joiner_sum[e] / r.joiner_count[e] as f64))
    });
    let joiner_benefit = cell(&|r| {
        let k = r.joiner_count[0] + r.joiner_count[1];
        (k > 0).then(|| rc.reward - rc.cost * (r.joiner_sum[0] + r.joiner_sum[1]) / k as f64)
    });

    Ok(SimEstimates {
        strategy: strategy.clone(),
        horizon,
        warmup: WARMUP_FRACTION * horizon,
        seed,
        replications,
        event_count: reps.iter().map(|r| r.events).sum(),
        masses,
        tail_mass,
        palm_env1,
        conditional_sojourn,
        conditional_benefit,
        joiner_sojourn,
        joiner_benefit,
    })
}
