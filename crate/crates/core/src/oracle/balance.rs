//! Truncated balance-equation solver.
//!
//! For `n >= 1` the balance equation at level `n` only involves levels `n`
//! and `n - 1`:
//!
//! ```text
//! (lambda_e theta_n + mu_e + q_e) p(n,e) - q_e' p(n,e') = lambda_e theta_{n-1} p(n-1,e)
//! ```
//!
//! so every level is a 2x2 linear map of level 0. Level 0 is then fixed by
//! one of its own balance equations plus normalisation. Arrivals at the top
//! level `N` are suppressed; this changes nothing below `N` except the
//! normalising constant.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::ValidatedModel;
use crate::strategy::Strategy;

type Mat = [[f64; 2]; 2];

/// Levels lighter than this are close enough to the subnormal range that
/// the split between environments has lost precision.
pub const RESOLVABLE_MASS: f64 = 1e-290;

const IDENTITY: Mat = [[1.0, 0.0], [0.0, 1.0]];

fn mat_mul(a: &Mat, b: &Mat) -> Mat {
    let mut out = [[0.0; 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            out[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j];
        }
    }
    out
}

fn solve2(m: &Mat, rhs: [f64; 2]) -> Option<[f64; 2]> {
    let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
    let scale = m.iter().flatten().fold(0.0f64, |s, x| s.max(x.abs()));
    if !det.is_finite() || det.abs() <= 1e-300 || det.abs() < 1e-14 * scale * scale {
        return None;
    }
    Some([
        (rhs[0] * m[1][1] - m[0][1] * rhs[1]) / det,
        (m[0][0] * rhs[1] - m[1][0] * rhs[0]) / det,
    ])
}

/// `(E[S_1], E[S_2])` from the first-step equations
/// `(mu_e + q_e) s_e - q_e s_e' = 1`.
pub fn clearing_means(model: &ValidatedModel) -> [f64; 2] {
    let p = model.params();
    let m = [[p.mu1 + p.q12, -p.q12], [-p.q21, p.mu2 + p.q21]];
    solve2(&m, [1.0, 1.0]).expect("first-step system is diagonally dominant")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TruncatedSolution {
    /// Truncation level `N`.
    pub n_max: u64,
    /// `table[n] = [p(n,1), p(n,2)]` for `n = 0..=N`.
    pub table: Vec<[f64; 2]>,
    /// Largest absolute violation over all balance equations.
    pub residual: f64,
    /// Mass sitting at level `N`, an upper estimate of what truncation hides.
    pub tail_mass: f64,
}

impl TruncatedSolution {
    pub fn mass(&self, n: u64, e: usize) -> f64 {
        usize::try_from(n)
            .ok()
            .and_then(|i| self.table.get(i))
            .map_or(0.0, |row| row[e])
    }

    pub fn total(&self) -> f64 {
        self.table.iter().map(|r| r[0] + r[1]).sum()
    }

    /// Environment distribution seen by an arrival at level `n`, or `None`
    /// if the level is too light for its ratio to be meaningful.
    pub fn palm(&self, model: &ValidatedModel, n: u64) -> Option<[f64; 2]> {
        let l = model.lambda();
        let w = [l[0] * self.mass(n, 0), l[1] * self.mass(n, 1)];
        let total = w[0] + w[1];
        (total > RESOLVABLE_MASS).then(|| [w[0] / total, w[1] / total])
    }

    /// Expected time to the next clearing for an arrival at level `n`.
    pub fn conditional_sojourn(&self, model: &ValidatedModel, n: u64) -> Option<f64> {
        let s = clearing_means(model);
        self.palm(model, n).map(|p| p[0] * s[0] + p[1] * s[1])
    }
}

fn join_probs(strategy: &Strategy, n_max: u64) -> Vec<f64> {
    (0..=n_max)
        .map(|n| if n == n_max { 0.0 } else { strategy.join_probability(n) })
        .collect()
}

/// Solve the chain truncated at level `n_max`.
pub fn solve_truncated_balance(
    model: &ValidatedModel,
    strategy: &Strategy,
    n_max: u64,
) -> Result<TruncatedSolution> {
    strategy.validate()?;
    let p = model.params();
    let lam = model.lambda();
    let mu = model.mu();
    let q = [p.q12, p.q21];
    let theta = join_probs(strategy, n_max);
    let levels = theta.len();

    // p(n) = T_n p(0)
    let mut maps: Vec<Mat> = Vec::with_capacity(levels);
    maps.push(IDENTITY);
    for n in 1..levels {
        let m: Mat = [
            [lam[0] * theta[n] + mu[0] + q[0], -q[1]],
            [-q[0], lam[1] * theta[n] + mu[1] + q[1]],
        ];
        let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
        let inv: Mat = [[m[1][1] / det, -m[0][1] / det], [-m[1][0] / det, m[0][0] / det]];
        let feed: Mat = [[lam[0] * theta[n - 1], 0.0], [0.0, lam[1] * theta[n - 1]]];
        let step = mat_mul(&inv, &feed);
        let next = mat_mul(&step, &maps[n - 1]);
        maps.push(next);
    }

    // Level-0 balance for environment 1:
    // (lambda_1 theta_0 + q12) p(0,1) - q21 p(0,2) - mu_1 sum_{n>=1} p(n,1) = 0
    let mut upper = [0.0; 2];
    let mut total = [0.0; 2];
    for (n, t) in maps.iter().enumerate() {
        for j in 0..2 {
            total[j] += t[0][j] + t[1][j];
            if n >= 1 {
                upper[j] += t[0][j];
            }
        }
    }
    let sys: Mat = [
        [
            lam[0] * theta[0] + q[0] - mu[0] * upper[0],
            -q[1] - mu[0] * upper[1],
        ],
        total,
    ];
    let p0 = solve2(&sys, [0.0, 1.0]).ok_or(Error::SingularSystem)?;

    let table: Vec<[f64; 2]> = maps
        .iter()
        .map(|t| {
            [
                t[0][0] * p0[0] + t[0][1] * p0[1],
                t[1][0] * p0[0] + t[1][1] * p0[1],
            ]
        })
        .collect();
    if table.iter().flatten().any(|x| !x.is_finite() || *x < -1e-12) {
        return Err(Error::SingularSystem);
    }
    let table: Vec<[f64; 2]> = table.into_iter().map(|r| [r[0].max(0.0), r[1].max(0.0)]).collect();

    let residual = balance_residual(model, &theta, &table);
    let tail_mass = table[levels - 1][0] + table[levels - 1][1];
    Ok(TruncatedSolution {
        n_max,
        table,
        residual,
        tail_mass,
    })
}

fn balance_residual(model: &ValidatedModel, theta: &[f64], table: &[[f64; 2]]) -> f64 {
    let p = model.params();
    let lam = model.lambda();
    let mu = model.mu();
    let q = [p.q12, p.q21];
    let cleared: [f64; 2] = [
        table.iter().skip(1).map(|r| r[0]).sum(),
        table.iter().skip(1).map(|r| r[1]).sum(),
    ];
    let mut worst = 0.0f64;
    for (n, row) in table.iter().enumerate() {
        for e in 0..2 {
            let o = 1 - e;
            let out = if n == 0 {
                row[e] * (lam[e] * theta[0] + q[e])
            } else {
                row[e] * (lam[e] * theta[n] + mu[e] + q[e])
            };
            let inflow = if n == 0 {
                mu[e] * cleared[e] + q[o] * row[o]
            } else {
                lam[e] * theta[n - 1] * table[n - 1][e] + q[o] * row[o]
            };
            worst = worst.max((out - inflow).abs());
        }
    }
    worst
}

/// Tail bound targeted by [`solve_adaptive`].
pub const TAIL_TARGET: f64 = 1e-13;
const START_LEVEL: u64 = 64;
const MAX_LEVEL: u64 = 1 << 22;

/// Solve with a truncation level large enough for the strategy: two levels
/// past the support for finite supports, otherwise doubling from 64 until
/// the estimated mass from level `N` on drops below [`TAIL_TARGET`].
pub fn solve_adaptive(model: &ValidatedModel, strategy: &Strategy) -> Result<TruncatedSolution> {
    if let Some(bound) = strategy.support_bound() {
        return solve_truncated_balance(model, strategy, bound + 2);
    }
    let mut n_max = START_LEVEL;
    loop {
        let sol = solve_truncated_balance(model, strategy, n_max)?;
        // The top level holds the suppressed arrivals, so the decay rate is
        // read off the two levels below it.
        let level = |n: usize| sol.table[n][0] + sol.table[n][1];
        let top = n_max as usize;
        let (below, further) = (level(top - 1), level(top - 2));
        let ratio = if further > 0.0 { below / further } else { 0.0 };
        let beyond = if ratio < 1.0 {
            below * ratio / (1.0 - ratio)
        } else {
            f64::INFINITY
        };
        if beyond < TAIL_TARGET || n_max >= MAX_LEVEL {
            return Ok(sol);
        }
        n_max *= 2;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::ModelParams;
    use nalgebra::{DMatrix, DVector};

    fn model(p: ModelParams) -> ValidatedModel {
        ValidatedModel::new(p).unwrap()
    }

    fn p_star() -> ValidatedModel {
        model(ModelParams::new([2.0, 1.0], [1.0, 3.0], 1.0, 2.0))
    }

    /// Dense generator solve, replacing one balance row by normalisation.
    fn dense(m: &ValidatedModel, s: &Strategy, n_max: u64) -> Vec<[f64; 2]> {
        let p = m.params();
        let lam = m.lambda();
        let mu = m.mu();
        let q = [p.q12, p.q21];
        let levels = n_max as usize + 1;
        let size = 2 * levels;
        let idx = |n: usize, e: usize| 2 * n + e;
        let mut gen = DMatrix::<f64>::zeros(size, size);
        for n in 0..levels {
            for e in 0..2 {
                let from = idx(n, e);
                let th = if n == levels - 1 { 0.0 } else { s.join_probability(n as u64) };
                if th > 0.0 {
                    gen[(from, idx(n + 1, e))] += lam[e] * th;
                }
                if n > 0 {
                    gen[(from, idx(0, e))] += mu[e];
                }
                gen[(from, idx(n, 1 - e))] += q[e];
            }
        }
        for i in 0..size {
            let out: f64 = gen.row(i).iter().sum();
            gen[(i, i)] -= out;
        }
        let mut a = gen.transpose();
        for j in 0..size {
            a[(0, j)] = 1.0;
        }
        let mut b = DVector::<f64>::zeros(size);
        b[0] = 1.0;
        let x = a.lu().solve(&b).unwrap();
        (0..levels).map(|n| [x[idx(n, 0)], x[idx(n, 1)]]).collect()
    }

    #[test]
    fn matches_dense_solve() {
        let strategies = [
            Strategy::AlwaysJoin,
            Strategy::PureThreshold(3),
            Strategy::MixedThreshold { n0: 2, theta: 0.4 },
            Strategy::ReverseThreshold { n0: 0, theta: 0.3 },
            Strategy::JoinVector(vec![1.0, 0.5, 0.9, 0.2]),
        ];
        for s in &strategies {
            let m = p_star();
            let sol = solve_truncated_balance(&m, s, 20).unwrap();
            let reference = dense(&m, s, 20);
            for (a, b) in sol.table.iter().zip(&reference) {
                assert!((a[0] - b[0]).abs() < 1e-12 && (a[1] - b[1]).abs() < 1e-12, "{s}");
            }
            assert!(sol.residual < 1e-12);
            assert!((sol.total() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn symmetric_always_join_is_geometric() {
        let m = model(ModelParams::new([1.0; 2], [1.0; 2], 1.0, 1.0));
        let sol = solve_adaptive(&m, &Strategy::AlwaysJoin).unwrap();
        for n in 0..40 {
            let want = 0.25 * 0.5f64.powi(n as i32);
            assert!((sol.mass(n, 0) - want).abs() < 1e-10);
            assert!((sol.mass(n, 1) - want).abs() < 1e-10);
        }
        assert!(sol.residual < 1e-10);
    }

    #[test]
    fn always_balk_sits_at_zero() {
        let m = p_star();
        let sol = solve_adaptive(&m, &Strategy::AlwaysBalk).unwrap();
        assert!((sol.mass(0, 0) - 2.0 / 3.0).abs() < 1e-14);
        assert!((sol.mass(0, 1) - 1.0 / 3.0).abs() < 1e-14);
        assert_eq!(sol.mass(1, 0), 0.0);
    }

    #[test]
    fn threshold_two_on_p_star() {
        let m = p_star();
        let sol = solve_adaptive(&m, &Strategy::PureThreshold(2)).unwrap();
        assert_eq!(sol.n_max, 4);
        let upper: f64 = (2..=4).map(|n| sol.mass(n, 0)).sum();
        assert!((upper - 0.2258953168).abs() < 1e-9);
        assert_eq!(sol.mass(3, 0), 0.0);
    }

    #[test]
    fn always_join_p_star_empty_mass() {
        let m = p_star();
        let sol = solve_adaptive(&m, &Strategy::AlwaysJoin).unwrap();
        assert!((sol.mass(0, 0) - 3.0 / 11.0).abs() < 1e-12);
        assert!(sol.tail_mass < 1e-13);
        assert_eq!(sol.n_max, 64);
    }

    #[test]
    fn clearing_means_p_star() {
        let s = clearing_means(&p_star());
        assert!((s[0] - 0.75).abs() < 1e-14 && (s[1] - 0.5).abs() < 1e-14);
    }

    #[test]
    fn heavy_traffic_grows_truncation() {
        let m = model(ModelParams::new([10.0, 9.0], [0.1, 0.2], 0.3, 0.4));
        let sol = solve_adaptive(&m, &Strategy::AlwaysJoin).unwrap();
        assert!(sol.n_max > 64 && sol.n_max < 1 << 14, "N = {}", sol.n_max);
        assert!((sol.total() - 1.0).abs() < 1e-12);
        assert!(sol.residual < 1e-10);
    }

    #[test]
    fn deep_levels_are_not_resolved() {
        let m = model(ModelParams::new([7.456, 5.333], [0.2214, 5.943], 7.036, 9.924));
        let sol = solve_truncated_balance(&m, &Strategy::AlwaysJoin, 4096).unwrap();
        assert!(sol.palm(&m, 2721).is_none());
        assert!(sol.palm(&m, 100).is_some());
        assert!(solve_adaptive(&m, &Strategy::AlwaysJoin).unwrap().n_max <= 256);
    }
}
