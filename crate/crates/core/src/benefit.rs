//! Expected net benefit of joining after seeing `n` customers, when everybody
//! else follows a threshold or reverse-threshold strategy.
//!
//! With `alpha = R D - C A` and `beta = R E - C B`,
//!
//! ```text
//! F(n, theta) = alpha r1^n / (1 - (1 - theta) r1) + beta r2^n / (1 - (1 - theta) r2)
//! G(n, theta) =     D r1^n / (1 - (1 - theta) r1) +    E r2^n / (1 - (1 - theta) r2)
//! ```
//!
//! and every conditional benefit is a ratio of these. Ratios are evaluated
//! after dividing through by `r1^n` so that large `n` does not underflow.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{RewardCost, ValidatedModel};
use crate::spectral::{pow, SpectralData};
use crate::strategy::{SteadyClass, Strategy};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BenefitCoefficients {
    pub a: f64,
    pub b: f64,
    pub d: f64,
    pub e: f64,
    pub alpha: f64,
    pub beta: f64,
    pub reward_cost: RewardCost,
    pub spectral: SpectralData,
}

pub fn benefit_coefficients(
    model: &ValidatedModel,
    spec: &SpectralData,
    rc: &RewardCost,
) -> BenefitCoefficients {
    let l = model.lambda();
    let es = model.mean_clearing();
    let a = l[0] * spec.a[0] * es[0] + l[1] * spec.a[1] * es[1];
    let b = l[0] * spec.b[0] * es[0] + l[1] * spec.b[1] * es[1];
    let d = l[0] * spec.a[0] + l[1] * spec.a[1];
    let e = l[0] * spec.b[0] + l[1] * spec.b[1];
    BenefitCoefficients {
        a,
        b,
        d,
        e,
        alpha: rc.reward * d - rc.cost * a,
        beta: rc.reward * e - rc.cost * b,
        reward_cost: *rc,
        spectral: *spec,
    }
}

impl BenefitCoefficients {
    fn r1(&self) -> f64 {
        self.spectral.r1
    }

    fn r2(&self) -> f64 {
        self.spectral.r2
    }

    /// `(r2 / r1)^n`, in `(0, 1]`.
    fn decay(&self, n: u64) -> f64 {
        pow(self.r2() / self.r1(), n)
    }

    pub fn f_eval(&self, n: u64, theta: f64) -> f64 {
        let u = 1.0 - theta;
        self.alpha * pow(self.r1(), n) / (1.0 - u * self.r1())
            + self.beta * pow(self.r2(), n) / (1.0 - u * self.r2())
    }

    pub fn g_eval(&self, n: u64, theta: f64) -> f64 {
        let u = 1.0 - theta;
        self.d * pow(self.r1(), n) / (1.0 - u * self.r1())
            + self.e * pow(self.r2(), n) / (1.0 - u * self.r2())
    }

    /// `F(n, theta) / G(n, theta)`.
    pub fn ratio(&self, n: u64, theta: f64) -> f64 {
        let u = 1.0 - theta;
        let w1 = 1.0 / (1.0 - u * self.r1());
        let w2 = self.decay(n) / (1.0 - u * self.r2());
        (self.alpha * w1 + self.beta * w2) / (self.d * w1 + self.e * w2)
    }

    /// `(F(n0, 0) - F(n0, theta)) / (G(n0, 0) - G(n0, theta))` for
    /// `theta > 0`. The common factor `theta r_k / (1 - r_k)` is cancelled
    /// analytically instead of subtracting two nearly equal sums.
    pub fn overflow_ratio(&self, n0: u64, theta: f64) -> f64 {
        let u = 1.0 - theta;
        let (r1, r2) = (self.r1(), self.r2());
        let w1 = 1.0 / ((1.0 - r1) * (1.0 - u * r1));
        let w2 = self.decay(n0 + 1) / ((1.0 - r2) * (1.0 - u * r2));
        (self.alpha * w1 + self.beta * w2) / (self.d * w1 + self.e * w2)
    }

    pub fn h_upper(&self, n: u64) -> f64 {
        self.ratio(n, 1.0)
    }

    pub fn h_lower(&self, n: u64) -> f64 {
        self.ratio(n, 0.0)
    }

    /// `lim_{n -> inf} H^U(n) = R - C A / D`; the `r1` terms dominate.
    pub fn h_upper_limit(&self) -> f64 {
        self.alpha / self.d
    }

    /// `A E - B D`; positive exactly when `H^U` decreases.
    pub fn monotonicity_determinant(&self) -> f64 {
        self.a * self.e - self.b * self.d
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BenefitValue {
    /// Expected net benefit of joining, in utility units.
    pub value: f64,
    /// Conditional expected time to the next clearing.
    pub sojourn: f64,
    /// Environment distribution seen by the arrival (Palm probabilities).
    pub palm: [f64; 2],
}

/// Per-environment weights proportional to `p(n, e)`, scaled by `r1^-n`.
fn scaled_weights(
    model: &ValidatedModel,
    sp: &SpectralData,
    class: &SteadyClass,
    n: u64,
) -> [f64; 2] {
    let rho = pow(sp.r2 / sp.r1, n);
    let join = |i: usize| sp.a[i] + sp.b[i] * rho;
    let tail = |i: usize, u: f64| sp.a[i] / (1.0 - u * sp.r1) + sp.b[i] * rho / (1.0 - u * sp.r2);
    let overflow = |i: usize, u: f64| {
        sp.a[i] / ((1.0 - sp.r1) * (1.0 - u * sp.r1))
            + sp.b[i] * rho / ((1.0 - sp.r2) * (1.0 - u * sp.r2))
    };
    let pick = |f: &dyn Fn(usize) -> f64| [f(0), f(1)];
    match *class {
        SteadyClass::Balk => model.env_stationary(),
        SteadyClass::Join => pick(&join),
        SteadyClass::Threshold { n0, theta } => {
            let u = 1.0 - theta;
            if n < n0 {
                pick(&join)
            } else if n == n0 {
                pick(&|i| tail(i, u))
            } else {
                pick(&|i| overflow(i, u))
            }
        }
        SteadyClass::ReverseAtZero { theta } => pick(&|i| tail(i, 1.0 - theta)),
        SteadyClass::General(_) => unreachable!("general vectors are rejected before weighting"),
    }
}

/// Conditional net benefit `S_ao(n; strategy)` of a tagged arrival who sees
/// `n` customers and joins.
pub fn net_benefit_ao(
    model: &ValidatedModel,
    coef: &BenefitCoefficients,
    strategy: &Strategy,
    n: u64,
) -> Result<BenefitValue> {
    strategy.validate()?;
    let class = strategy.steady_class();
    let unreachable = || Error::UnreachableState {
        n,
        strategy: strategy.to_string(),
    };
    let value = match class {
        SteadyClass::Join => coef.h_upper(n),
        SteadyClass::Balk if n == 0 => coef.h_lower(0),
        SteadyClass::Balk => return Err(unreachable()),
        SteadyClass::Threshold { n0, theta } => {
            if n < n0 {
                coef.h_upper(n)
            } else if n == n0 {
                coef.ratio(n0, theta)
            } else if n == n0 + 1 && theta > 0.0 {
                coef.overflow_ratio(n0, theta)
            } else {
                return Err(unreachable());
            }
        }
        SteadyClass::ReverseAtZero { theta } => coef.ratio(n, theta),
        SteadyClass::General(_) => return Err(Error::UnsupportedStrategy(strategy.to_string())),
    };

    let w = scaled_weights(model, &coef.spectral, &class, n);
    let l = model.lambda();
    let total = l[0] * w[0] + l[1] * w[1];
    let palm = [l[0] * w[0] / total, l[1] * w[1] / total];
    let es = model.mean_clearing();
    Ok(BenefitValue {
        value,
        sojourn: palm[0] * es[0] + palm[1] * es[1],
        palm,
    })
}
