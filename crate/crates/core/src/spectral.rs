//! Closed-form stationary distributions for threshold and reverse-threshold
//! strategies.
//!
//! Under "always join" the stationary law is a mixture of two geometric
//! sequences, `p(n, e) = a_e r1^n + b_e r2^n`, with `r_k = 1 / (1 - z_k)` for
//! the two negative roots `z_k` of the characteristic quadratic. Every other
//! strategy class folds a tail of that law into one or two boundary levels, so
//! all masses are finite sums of geometric series evaluated in closed form.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{Env, ValidatedModel};
use crate::strategy::{SteadyClass, Strategy};

/// Masses above `-CLIP_BAND` but below zero are rounding noise.
pub const CLIP_BAND: f64 = 1e-14;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectralData {
    pub delta: f64,
    /// Root taking `+sqrt(delta)`; `z2 < z1 < 0`.
    pub z1: f64,
    pub z2: f64,
    /// Geometric ratios, `0 < r2 < r1 < 1`.
    pub r1: f64,
    pub r2: f64,
    /// Coefficient of `r1^n` per environment (`A_1`, `A_2`).
    pub a: [f64; 2],
    /// Coefficient of `r2^n` per environment (`B_1`, `B_2`).
    pub b: [f64; 2],
}

pub fn spectral_quantities(model: &ValidatedModel) -> SpectralData {
    let [l1, l2] = model.lambda();
    let [m1, m2] = model.mu();
    let p = model.params();
    let (q12, q21) = (p.q12, p.q21);

    let delta = (l2 * (m1 + q12) - l1 * (m2 + q21)).powi(2) + 4.0 * l1 * l2 * q12 * q21;
    let sqrt_delta = delta.sqrt();
    let lin = l1 * (m2 + q21) + l2 * (m1 + q12);
    let k = m1 * m2 + m2 * q12 + m1 * q21;
    // z1 * z2 = k / (l1 l2); taking z1 from the product avoids cancellation
    // in -lin + sqrt(delta).
    let z2 = (-lin - sqrt_delta) / (2.0 * l1 * l2);
    let z1 = k / (l1 * l2 * z2);

    let pe = model.env_stationary();
    let a = [
        (m1 * l2 * z1 + k) * pe[0] / (sqrt_delta * (1.0 - z1)),
        (m2 * l1 * z1 + k) * pe[1] / (sqrt_delta * (1.0 - z1)),
    ];
    let b = [
        -(m1 * l2 * z2 + k) * pe[0] / (sqrt_delta * (1.0 - z2)),
        -(m2 * l1 * z2 + k) * pe[1] / (sqrt_delta * (1.0 - z2)),
    ];

    SpectralData {
        delta,
        z1,
        z2,
        r1: 1.0 / (1.0 - z1),
        r2: 1.0 / (1.0 - z2),
        a,
        b,
    }
}

pub(crate) fn pow(r: f64, n: u64) -> f64 {
    match i32::try_from(n) {
        Ok(k) => r.powi(k),
        Err(_) => r.powf(n as f64),
    }
}

impl SpectralData {
    /// `p(n, e)` under "always join".
    pub fn join_mass(&self, n: u64, e: Env) -> f64 {
        let i = e.index();
        self.a[i] * pow(self.r1, n) + self.b[i] * pow(self.r2, n)
    }

    /// `sum_{n >= m} u^(n - m) p(n, e)` for `u` in `[0, 1]`.
    pub fn discounted_tail(&self, m: u64, e: Env, u: f64) -> f64 {
        let i = e.index();
        self.a[i] * pow(self.r1, m) / (1.0 - u * self.r1)
            + self.b[i] * pow(self.r2, m) / (1.0 - u * self.r2)
    }

    /// `sum_{n >= m} (1 - u^(n - m + 1)) p(n, e)`, written so the two
    /// geometric sums do not cancel.
    fn overflow_tail(&self, m: u64, e: Env, u: f64) -> f64 {
        let i = e.index();
        let theta = 1.0 - u;
        theta
            * (self.a[i] * pow(self.r1, m) / ((1.0 - self.r1) * (1.0 - u * self.r1))
                + self.b[i] * pow(self.r2, m) / ((1.0 - self.r2) * (1.0 - u * self.r2)))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Support {
    /// Positive mass only on `0..=max_n`.
    Finite { max_n: u64 },
    /// Geometric tail; mass beyond any level is given in closed form.
    GeometricTail,
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Shape {
    Balk,
    Join,
    Threshold { n0: u64, theta: f64 },
    ReverseAtZero { theta: f64 },
}

/// Lazy handle over `p(n, e)` for one strategy.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StationaryDistribution {
    spectral: SpectralData,
    env: [f64; 2],
    shape: Shape,
}

pub fn stationary_always_join(model: &ValidatedModel, spec: &SpectralData) -> StationaryDistribution {
    StationaryDistribution {
        spectral: *spec,
        env: model.env_stationary(),
        shape: Shape::Join,
    }
}

/// `(n0, theta)` mixed threshold; `theta == 0` is the pure threshold and
/// `n0 == 0, theta == 0` is "always balk".
pub fn stationary_threshold(
    model: &ValidatedModel,
    spec: &SpectralData,
    n0: u64,
    theta: f64,
) -> Result<StationaryDistribution> {
    Strategy::MixedThreshold { n0, theta }.validate()?;
    let shape = if n0 == 0 && theta == 0.0 {
        Shape::Balk
    } else {
        Shape::Threshold { n0, theta }
    };
    Ok(StationaryDistribution {
        spectral: *spec,
        env: model.env_stationary(),
        shape,
    })
}

/// `(0, theta)` reverse threshold. Any reverse threshold with `n0 >= 1`
/// balks at an empty queue and is passed here as `theta = 0`.
pub fn stationary_reverse(
    model: &ValidatedModel,
    spec: &SpectralData,
    theta: f64,
) -> Result<StationaryDistribution> {
    Strategy::ReverseThreshold { n0: 0, theta }.validate()?;
    let shape = if theta == 0.0 {
        Shape::Balk
    } else if theta == 1.0 {
        Shape::Join
    } else {
        Shape::ReverseAtZero { theta }
    };
    Ok(StationaryDistribution {
        spectral: *spec,
        env: model.env_stationary(),
        shape,
    })
}

/// Dispatch on the steady-state class of any threshold-type strategy.
pub fn stationary_for(
    model: &ValidatedModel,
    spec: &SpectralData,
    strategy: &Strategy,
) -> Result<StationaryDistribution> {
    strategy.validate()?;
    match strategy.steady_class() {
        SteadyClass::Balk => stationary_reverse(model, spec, 0.0),
        SteadyClass::Join => Ok(stationary_always_join(model, spec)),
        SteadyClass::Threshold { n0, theta } => stationary_threshold(model, spec, n0, theta),
        SteadyClass::ReverseAtZero { theta } => stationary_reverse(model, spec, theta),
        SteadyClass::General(_) => Err(Error::UnsupportedStrategy(strategy.to_string())),
    }
}

impl StationaryDistribution {
    pub fn support(&self) -> Support {
        match self.shape {
            Shape::Balk => Support::Finite { max_n: 0 },
            Shape::Join | Shape::ReverseAtZero { .. } => Support::GeometricTail,
            Shape::Threshold { n0, theta } => Support::Finite {
                max_n: if theta > 0.0 { n0 + 1 } else { n0 },
            },
        }
    }

    /// Unclipped closed-form value.
    pub fn raw_mass(&self, n: u64, e: Env) -> f64 {
        let sp = &self.spectral;
        match self.shape {
            Shape::Balk => {
                if n == 0 {
                    self.env[e.index()]
                } else {
                    0.0
                }
            }
            Shape::Join => sp.join_mass(n, e),
            Shape::Threshold { n0, theta } => {
                let u = 1.0 - theta;
                if n < n0 {
                    sp.join_mass(n, e)
                } else if n == n0 {
                    sp.discounted_tail(n0, e, u)
                } else if n == n0 + 1 && theta > 0.0 {
                    sp.overflow_tail(n0 + 1, e, u)
                } else {
                    0.0
                }
            }
            Shape::ReverseAtZero { theta } => {
                let u = 1.0 - theta;
                if n == 0 {
                    sp.discounted_tail(0, e, u)
                } else {
                    theta * sp.discounted_tail(n, e, u)
                }
            }
        }
    }

    /// Mass at `(n, e)`; rounding noise below zero is clipped, anything more
    /// negative is an internal inconsistency.
    pub fn try_mass(&self, n: u64, e: Env) -> Result<f64> {
        let v = self.raw_mass(n, e);
        if v >= 0.0 {
            Ok(v)
        } else if v >= -CLIP_BAND {
            Ok(0.0)
        } else {
            Err(Error::InconsistentMass {
                n,
                env: e.index() + 1,
                value: v,
            })
        }
    }

    pub fn mass(&self, n: u64, e: Env) -> f64 {
        self.raw_mass(n, e).max(0.0)
    }

    /// `sum_{n >= m} p(n, e)` in closed form.
    pub fn tail_mass(&self, m: u64, e: Env) -> f64 {
        let sp = &self.spectral;
        match self.shape {
            Shape::Balk => {
                if m == 0 {
                    self.env[e.index()]
                } else {
                    0.0
                }
            }
            Shape::Join => sp.discounted_tail(m, e, 1.0),
            Shape::Threshold { n0, theta } => {
                let upper = if theta > 0.0 { n0 + 1 } else { n0 };
                if m > upper {
                    return 0.0;
                }
                // Levels below n0 carry the always-join masses unchanged.
                let below = if m < n0 {
                    sp.discounted_tail(m, e, 1.0) - sp.discounted_tail(n0, e, 1.0)
                } else {
                    0.0
                };
                below + (m.max(n0)..=upper).map(|n| self.raw_mass(n, e)).sum::<f64>()
            }
            Shape::ReverseAtZero { theta } => {
                let u = 1.0 - theta;
                let i = e.index();
                // sum_{n >= k} theta T(n, u) with T the discounted tail.
                let beyond = |k: u64| {
                    theta
                        * (sp.a[i] * pow(sp.r1, k) / ((1.0 - sp.r1) * (1.0 - u * sp.r1))
                            + sp.b[i] * pow(sp.r2, k) / ((1.0 - sp.r2) * (1.0 - u * sp.r2)))
                };
                if m == 0 {
                    sp.discounted_tail(0, e, u) + beyond(1)
                } else {
                    beyond(m)
                }
            }
        }
    }

    pub fn marginal(&self, e: Env) -> f64 {
        self.tail_mass(0, e)
    }

    pub fn total_mass(&self) -> f64 {
        self.marginal(Env::One) + self.marginal(Env::Two)
    }

    /// Materialise levels `0..=max_n`, counting clipped entries.
    pub fn table(&self, max_n: u64) -> Result<StationaryTable> {
        let mut rows = Vec::with_capacity(max_n as usize + 1);
        let mut clipped = 0;
        for n in 0..=max_n {
            let mut row = [0.0; 2];
            for e in Env::BOTH {
                let raw = self.raw_mass(n, e);
                let v = self.try_mass(n, e)?;
                if raw < 0.0 {
                    clipped += 1;
                }
                row[e.index()] = v;
            }
            rows.push(row);
        }
        let tail = [
            self.tail_mass(max_n + 1, Env::One).max(0.0),
            self.tail_mass(max_n + 1, Env::Two).max(0.0),
        ];
        Ok(StationaryTable { rows, tail, clipped })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StationaryTable {
    /// `rows[n] = [p(n, 1), p(n, 2)]`.
    pub rows: Vec<[f64; 2]>,
    /// Mass beyond the last row, per environment.
    pub tail: [f64; 2],
    pub clipped: usize,
}
