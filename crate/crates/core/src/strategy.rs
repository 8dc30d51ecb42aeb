//! Joining strategies for the almost observable case and their textual
//! descriptor form.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// A joining strategy as a function of the queue length seen on arrival.
#[derive(Debug, Clone, PartialEq)]
pub enum Strategy {
    /// Join whatever the queue length.
    AlwaysJoin,
    /// Never join.
    AlwaysBalk,
    /// Join iff fewer than `n0` customers are present.
    PureThreshold(u64),
    /// Join below `n0`, join with probability `theta` at `n0`, balk above.
    MixedThreshold { n0: u64, theta: f64 },
    /// Balk below `n0`, join with probability `theta` at `n0`, join above.
    ReverseThreshold { n0: u64, theta: f64 },
    /// Explicit joining probabilities `theta_0, theta_1, ...`; the last entry
    /// applies to every longer queue.
    JoinVector(Vec<f64>),
}

/// Steady-state equivalence class of a strategy. Strategies in the same
/// class produce the same stationary distribution and the same benefits at
/// every reachable state.
#[derive(Debug, Clone, PartialEq)]
pub enum SteadyClass {
    Balk,
    Join,
    /// `theta` in `[0, 1]`, `n0 >= 1` when `theta == 0`.
    Threshold { n0: u64, theta: f64 },
    /// `(0, theta)` reverse threshold with `theta` strictly inside `(0, 1)`.
    ReverseAtZero { theta: f64 },
    General(Vec<f64>),
}

fn check_probability(what: &str, p: f64) -> Result<()> {
    if (0.0..=1.0).contains(&p) {
        Ok(())
    } else {
        Err(Error::InvalidStrategy(format!("{what} = {p} is not in [0, 1]")))
    }
}

impl Strategy {
    pub fn validate(&self) -> Result<()> {
        match self {
            Strategy::MixedThreshold { theta, .. } | Strategy::ReverseThreshold { theta, .. } => {
                check_probability("theta", *theta)
            }
            Strategy::JoinVector(v) => {
                if v.is_empty() {
                    return Err(Error::InvalidStrategy("empty joining vector".into()));
                }
                v.iter().try_for_each(|&p| check_probability("joining probability", p))
            }
            _ => Ok(()),
        }
    }

    /// Probability that an arrival who sees `n` customers joins.
    pub fn join_probability(&self, n: u64) -> f64 {
        match *self {
            Strategy::AlwaysJoin => 1.0,
            Strategy::AlwaysBalk => 0.0,
            Strategy::PureThreshold(n0) => {
                if n < n0 {
                    1.0
                } else {
                    0.0
                }
            }
            Strategy::MixedThreshold { n0, theta } => match n.cmp(&n0) {
                std::cmp::Ordering::Less => 1.0,
                std::cmp::Ordering::Equal => theta,
                std::cmp::Ordering::Greater => 0.0,
            },
            Strategy::ReverseThreshold { n0, theta } => match n.cmp(&n0) {
                std::cmp::Ordering::Less => 0.0,
                std::cmp::Ordering::Equal => theta,
                std::cmp::Ordering::Greater => 1.0,
            },
            Strategy::JoinVector(ref v) => {
                let i = usize::try_from(n).unwrap_or(usize::MAX).min(v.len() - 1);
                v[i]
            }
        }
    }

    pub fn steady_class(&self) -> SteadyClass {
        match *self {
            Strategy::AlwaysJoin => SteadyClass::Join,
            Strategy::AlwaysBalk | Strategy::PureThreshold(0) => SteadyClass::Balk,
            Strategy::PureThreshold(n0) => SteadyClass::Threshold { n0, theta: 0.0 },
            Strategy::MixedThreshold { n0: 0, theta } if theta == 0.0 => SteadyClass::Balk,
            Strategy::MixedThreshold { n0, theta } => SteadyClass::Threshold { n0, theta },
            // Balking at an empty queue keeps the queue empty forever.
            Strategy::ReverseThreshold { n0, theta } if n0 >= 1 || theta == 0.0 => {
                SteadyClass::Balk
            }
            Strategy::ReverseThreshold { theta, .. } if theta == 1.0 => SteadyClass::Join,
            Strategy::ReverseThreshold { theta, .. } => SteadyClass::ReverseAtZero { theta },
            Strategy::JoinVector(ref v) => SteadyClass::General(v.clone()),
        }
    }

    /// Largest reachable queue length, `None` when the support is infinite.
    pub fn support_bound(&self) -> Option<u64> {
        match self.steady_class() {
            SteadyClass::Balk => Some(0),
            SteadyClass::Join | SteadyClass::ReverseAtZero { .. } => None,
            SteadyClass::Threshold { n0, theta } => Some(if theta > 0.0 { n0 + 1 } else { n0 }),
            SteadyClass::General(v) => match v.iter().position(|&p| p == 0.0) {
                Some(i) => Some(i as u64),
                None => None,
            },
        }
    }

    pub fn is_reachable(&self, n: u64) -> bool {
        self.support_bound().map_or(true, |b| n <= b)
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Strategy::AlwaysJoin => f.write_str("always-join"),
            Strategy::AlwaysBalk => f.write_str("always-balk"),
            Strategy::PureThreshold(n0) => write!(f, "threshold:{n0}"),
            Strategy::MixedThreshold { n0, theta } => write!(f, "mixed-threshold:{n0}:{theta}"),
            Strategy::ReverseThreshold { n0, theta } => write!(f, "reverse:{n0}:{theta}"),
            Strategy::JoinVector(v) => {
                f.write_str("vector:")?;
                for (i, p) in v.iter().enumerate() {
                    if i > 0 {
                        f.write_str(",")?;
                    }
                    write!(f, "{p}")?;
                }
                Ok(())
            }
        }
    }
}

fn parse_count(s: &str) -> Result<u64> {
    s.trim()
        .parse::<u64>()
        .map_err(|_| Error::InvalidStrategy(format!("`{s}` is not a non-negative integer")))
}

fn parse_prob(s: &str) -> Result<f64> {
    let p = s
        .trim()
        .parse::<f64>()
        .map_err(|_| Error::InvalidStrategy(format!("`{s}` is not a number")))?;
    check_probability("probability", p)?;
    Ok(p)
}

impl FromStr for Strategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let (head, rest) = match s.split_once(':') {
            Some((h, r)) => (h, Some(r)),
            None => (s, None),
        };
        let args: Vec<&str> = rest.map(|r| r.split(':').collect()).unwrap_or_default();
        let strategy = match (head, args.as_slice()) {
            ("always-join", []) => Strategy::AlwaysJoin,
            ("always-balk", []) => Strategy::AlwaysBalk,
            ("threshold", [n0]) => Strategy::PureThreshold(parse_count(n0)?),
            ("mixed-threshold", [n0, theta]) => Strategy::MixedThreshold {
                n0: parse_count(n0)?,
                theta: parse_prob(theta)?,
            },
            ("reverse", [n0, theta]) => Strategy::ReverseThreshold {
                n0: parse_count(n0)?,
                theta: parse_prob(theta)?,
            },
            ("vector", [list]) => Strategy::JoinVector(
                list.split(',').map(parse_prob).collect::<Result<Vec<_>>>()?,
            ),
            _ => {
                return Err(Error::InvalidStrategy(format!(
                    "unrecognised strategy descriptor `{s}`"
                )))
            }
        };
        strategy.validate()?;
        Ok(strategy)
    }
}

impl Serialize for Strategy {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Strategy {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}
