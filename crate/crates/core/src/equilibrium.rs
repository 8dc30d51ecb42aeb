//! Equilibrium threshold and reverse-threshold strategies for the almost
//! observable case.
//!
//! The model is first classified by the sign of `(mu1 - mu2)(rho1 - rho2)`.
//! In case A the benefit `H^U(n)` decreases in `n` and the equilibria are
//! threshold strategies; in case B it increases and there is exactly one
//! reverse-threshold equilibrium; in case C it is constant. Within each case
//! the signs of `H^U(0)` and `lim H^U(n)` select subcase I, II or III.

use std::cmp::Ordering;
use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::benefit::BenefitCoefficients;
use crate::error::{Error, Result};
use crate::model::{congestion_case_with, CaseLabel, CongestionCase, ValidatedModel};
use crate::oracle::verify::VerificationSummary;
use crate::strategy::Strategy;
use crate::Tolerances;

/// Upper bound on the threshold scans. Subcase II guarantees termination
/// long before this for any well-posed input.
pub const SCAN_LIMIT: u64 = 1_000_000;

/// A count that may be infinite.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum ExtCount {
    Finite(u64),
    Infinite,
}

impl ExtCount {
    pub fn finite(self) -> Option<u64> {
        match self {
            ExtCount::Finite(n) => Some(n),
            ExtCount::Infinite => None,
        }
    }
}

impl fmt::Display for ExtCount {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExtCount::Finite(n) => write!(f, "{n}"),
            ExtCount::Infinite => f.write_str("inf"),
        }
    }
}

impl Serialize for ExtCount {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            ExtCount::Finite(n) => s.serialize_u64(*n),
            ExtCount::Infinite => s.serialize_str("inf"),
        }
    }
}

impl<'de> Deserialize<'de> for ExtCount {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(u64),
            Str(String),
        }
        match Raw::deserialize(d)? {
            Raw::Num(n) => Ok(ExtCount::Finite(n)),
            Raw::Str(s) if s == "inf" => Ok(ExtCount::Infinite),
            Raw::Str(s) => Err(serde::de::Error::custom(format!("bad count `{s}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Orientation {
    /// Case A: bounds are `n_L, n_U, n_L+, n_U-`.
    Threshold,
    /// Case B: bounds are `m_L, m_U, m_L+, m_U-`.
    Reverse,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Subcase {
    I,
    II,
    III,
}

impl fmt::Display for Subcase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Subcase::I => "I",
            Subcase::II => "II",
            Subcase::III => "III",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThresholdBounds {
    pub orientation: Orientation,
    pub subcase: Subcase,
    pub lower: ExtCount,
    pub upper: ExtCount,
    pub lower_plus: ExtCount,
    pub upper_minus: ExtCount,
    /// Some sign test fell inside the tolerance band.
    pub knife_edge: bool,
}

/// Three-way sign with a tolerance band around zero; remembers whether any
/// value landed in the band.
struct SignTest {
    eps: f64,
    knife_edge: bool,
}

impl SignTest {
    fn new(tol: &Tolerances) -> Self {
        SignTest {
            eps: tol.knife_edge,
            knife_edge: false,
        }
    }

    fn sign(&mut self, x: f64) -> Ordering {
        if x.abs() <= self.eps {
            self.knife_edge = true;
            Ordering::Equal
        } else if x > 0.0 {
            Ordering::Greater
        } else {
            Ordering::Less
        }
    }
}

fn scan_up(limit: u64, mut keep_going: impl FnMut(u64) -> bool) -> Result<u64> {
    let mut n = 0;
    while keep_going(n) {
        n += 1;
        if n > limit {
            return Err(Error::ScanLimitExceeded { limit });
        }
    }
    Ok(n)
}

fn scan_down(start: u64, mut keep_going: impl FnMut(u64) -> bool) -> u64 {
    let mut n = start;
    while n > 0 && keep_going(n - 1) {
        n -= 1;
    }
    n
}

pub fn threshold_bounds(
    coef: &BenefitCoefficients,
    orientation: Orientation,
    tol: &Tolerances,
) -> Result<ThresholdBounds> {
    let mut st = SignTest::new(tol);
    let h0 = st.sign(coef.h_upper(0));
    let limit = st.sign(coef.h_upper_limit());
    use Ordering::*;

    let flat = |subcase, v| ThresholdBounds {
        orientation,
        subcase,
        lower: v,
        upper: v,
        lower_plus: v,
        upper_minus: v,
        knife_edge: false,
    };

    let mut bounds = match orientation {
        Orientation::Threshold => {
            if h0 == Less {
                flat(Subcase::I, ExtCount::Finite(0))
            } else if limit != Less {
                flat(Subcase::III, ExtCount::Infinite)
            } else {
                // n_U = inf{n : F(n,1) < 0}
                let upper = scan_up(SCAN_LIMIT, |n| st.sign(coef.h_upper(n)) != Less)?;
                // n_L = inf{n : F(n,0) <= 0}, searched downward from n_U
                let lower = scan_down(upper, |n| st.sign(coef.h_lower(n)) != Greater);
                let upper_minus = if st.sign(coef.h_upper(upper - 1)) == Greater {
                    upper
                } else {
                    upper - 1
                };
                let lower_plus = if st.sign(coef.h_lower(lower)) == Less {
                    lower
                } else {
                    lower + 1
                };
                ThresholdBounds {
                    orientation,
                    subcase: Subcase::II,
                    lower: ExtCount::Finite(lower),
                    upper: ExtCount::Finite(upper),
                    lower_plus: ExtCount::Finite(lower_plus),
                    upper_minus: ExtCount::Finite(upper_minus),
                    knife_edge: false,
                }
            }
        }
        Orientation::Reverse => {
            if h0 == Greater {
                flat(Subcase::I, ExtCount::Finite(0))
            } else if limit != Greater {
                flat(Subcase::III, ExtCount::Infinite)
            } else {
                // m_U = inf{n : F(n,1) > 0}
                let upper = scan_up(SCAN_LIMIT, |n| st.sign(coef.h_upper(n)) != Greater)?;
                // m_L = inf{n : F(n,0) >= 0}
                let lower = scan_down(upper, |n| st.sign(coef.h_lower(n)) != Less);
                let upper_minus = if st.sign(coef.h_upper(upper - 1)) == Less {
                    upper
                } else {
                    upper - 1
                };
                let lower_plus = if st.sign(coef.h_lower(lower)) == Greater {
                    lower
                } else {
                    lower + 1
                };
                ThresholdBounds {
                    orientation,
                    subcase: Subcase::II,
                    lower: ExtCount::Finite(lower),
                    upper: ExtCount::Finite(upper),
                    lower_plus: ExtCount::Finite(lower_plus),
                    upper_minus: ExtCount::Finite(upper_minus),
                    knife_edge: false,
                }
            }
        }
    };
    bounds.knife_edge = st.knife_edge;
    Ok(bounds)
}

/// Tolerance on `|F/G|` at the returned mixing probability.
const MIXING_RESIDUAL: f64 = 1e-10;

/// The unique `theta` in `(0, 1)` with `F(n0, theta) = 0`.
///
/// Clearing denominators makes `F(n0, theta)` linear in `u = 1 - theta`:
/// `u = F(n0, 1) / (alpha r1^n0 r2 + beta r2^n0 r1)`. Bisection on the
/// monotone ratio `F/G` is the fallback when the closed form misses.
pub fn mixing_probability(coef: &BenefitCoefficients, n0: u64) -> Result<f64> {
    let at_join = coef.ratio(n0, 1.0);
    let at_balk = coef.ratio(n0, 0.0);
    if !(at_join * at_balk < 0.0) {
        return Err(Error::NoInteriorRoot { n0 });
    }

    let (r1, r2) = (coef.spectral.r1, coef.spectral.r2);
    let decay = crate::spectral::pow(r2 / r1, n0);
    // Both numerator and denominator divided by r1^n0.
    let u = (coef.alpha + coef.beta * decay) / (coef.alpha * r2 + coef.beta * decay * r1);
    let theta = 1.0 - u;
    if theta > 0.0 && theta < 1.0 && coef.ratio(n0, theta).abs() < MIXING_RESIDUAL {
        return Ok(theta);
    }

    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    let sign_lo = at_balk.signum();
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if coef.ratio(n0, mid).signum() == sign_lo {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let theta = 0.5 * (lo + hi);
    if theta > 0.0 && theta < 1.0 {
        Ok(theta)
    } else {
        Err(Error::NoInteriorRoot { n0 })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EquilibriumKind {
    Pure,
    Mixed,
    Reverse,
    /// Every threshold and reverse-threshold strategy is an equilibrium.
    Family,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EquilibriumEntry {
    pub kind: EquilibriumKind,
    /// `None` for the family marker.
    pub strategy: Option<Strategy>,
    pub verification: Option<VerificationSummary>,
}

impl EquilibriumEntry {
    fn new(kind: EquilibriumKind, strategy: Strategy) -> Self {
        EquilibriumEntry {
            kind,
            strategy: Some(strategy),
            verification: None,
        }
    }

    pub fn label(&self) -> String {
        match &self.strategy {
            Some(s) => s.to_string(),
            None => "all-threshold-strategies".to_string(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum SocialOptimum {
    Strategy { strategy: Strategy },
    /// The social optimum coincides with the equilibrium.
    CoincidesWithEquilibrium,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EquilibriumReport {
    pub case: CongestionCase,
    pub subcase: Subcase,
    pub bounds: Option<ThresholdBounds>,
    pub h_upper_zero: f64,
    pub h_upper_limit: f64,
    pub h_lower_zero: f64,
    pub equilibria: Vec<EquilibriumEntry>,
    pub socially_optimal: SocialOptimum,
    pub knife_edge: bool,
}

pub fn compute_equilibria(
    model: &ValidatedModel,
    coef: &BenefitCoefficients,
) -> Result<EquilibriumReport> {
    compute_equilibria_with(model, coef, &Tolerances::default())
}

pub fn compute_equilibria_with(
    model: &ValidatedModel,
    coef: &BenefitCoefficients,
    tol: &Tolerances,
) -> Result<EquilibriumReport> {
    let case = congestion_case_with(model, tol);
    let mut report = EquilibriumReport {
        case,
        subcase: Subcase::I,
        bounds: None,
        h_upper_zero: coef.h_upper(0),
        h_upper_limit: coef.h_upper_limit(),
        h_lower_zero: coef.h_lower(0),
        equilibria: Vec::new(),
        socially_optimal: SocialOptimum::CoincidesWithEquilibrium,
        knife_edge: false,
    };

    match case.label {
        CaseLabel::CaseA => {
            let b = threshold_bounds(coef, Orientation::Threshold, tol)?;
            report.subcase = b.subcase;
            report.knife_edge = b.knife_edge;
            match b.subcase {
                Subcase::I => report
                    .equilibria
                    .push(EquilibriumEntry::new(EquilibriumKind::Pure, Strategy::AlwaysBalk)),
                Subcase::III => report
                    .equilibria
                    .push(EquilibriumEntry::new(EquilibriumKind::Pure, Strategy::AlwaysJoin)),
                Subcase::II => {
                    let (lower, upper) = (b.lower.finite().unwrap(), b.upper.finite().unwrap());
                    let (lower_plus, upper_minus) =
                        (b.lower_plus.finite().unwrap(), b.upper_minus.finite().unwrap());
                    for n0 in lower..=upper {
                        report.equilibria.push(EquilibriumEntry::new(
                            EquilibriumKind::Pure,
                            Strategy::PureThreshold(n0),
                        ));
                    }
                    for n0 in lower_plus..upper_minus {
                        let theta = mixing_probability(coef, n0)?;
                        report.equilibria.push(EquilibriumEntry::new(
                            EquilibriumKind::Mixed,
                            Strategy::MixedThreshold { n0, theta },
                        ));
                    }
                    report.socially_optimal = SocialOptimum::Strategy {
                        strategy: Strategy::PureThreshold(upper),
                    };
                }
            }
            report.bounds = Some(b);
        }
        CaseLabel::CaseB => {
            let b = threshold_bounds(coef, Orientation::Reverse, tol)?;
            report.subcase = b.subcase;
            report.knife_edge = b.knife_edge;
            let strategy = match b.subcase {
                Subcase::I => Strategy::AlwaysJoin,
                Subcase::III => Strategy::AlwaysBalk,
                Subcase::II => {
                    if b.upper_minus == ExtCount::Finite(0) {
                        Strategy::AlwaysJoin
                    } else if b.lower_plus >= ExtCount::Finite(1) {
                        Strategy::AlwaysBalk
                    } else {
                        Strategy::ReverseThreshold {
                            n0: 0,
                            theta: mixing_probability(coef, 0)?,
                        }
                    }
                }
            };
            report
                .equilibria
                .push(EquilibriumEntry::new(EquilibriumKind::Reverse, strategy));
            report.bounds = Some(b);
        }
        CaseLabel::CaseC => {
            let mut st = SignTest::new(tol);
            let (subcase, entry) = match st.sign(report.h_upper_zero) {
                Ordering::Less => (
                    Subcase::I,
                    EquilibriumEntry::new(EquilibriumKind::Pure, Strategy::AlwaysBalk),
                ),
                Ordering::Greater => (
                    Subcase::III,
                    EquilibriumEntry::new(EquilibriumKind::Pure, Strategy::AlwaysJoin),
                ),
                Ordering::Equal => (
                    Subcase::II,
                    EquilibriumEntry {
                        kind: EquilibriumKind::Family,
                        strategy: None,
                        verification: None,
                    },
                ),
            };
            report.subcase = subcase;
            report.knife_edge = st.knife_edge;
            report.equilibria.push(entry);
        }
    }
    Ok(report)
}
