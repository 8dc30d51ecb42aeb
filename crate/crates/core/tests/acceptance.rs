//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.

mod common;

use std::process::Command;
use std::time::Instant;

use clearq_core::benefit::net_benefit_ao;
use clearq_core::cli::{SweepRow, StationaryOutput};
use clearq_core::equilibrium::{
    compute_equilibria, EquilibriumKind, EquilibriumReport, ExtCount, SocialOptimum, Subcase,
};
use clearq_core::oracle::{clearing_means, simulate, solve_adaptive, verify_equilibrium, SimEstimates};
use clearq_core::spectral::{spectral_quantities, stationary_always_join, stationary_for};
use clearq_core::unobservable::{critical_values, DominantStrategySet};
use clearq_core::{
    benefit_coefficients, congestion_case, Analysis, BenefitCoefficients, CaseLabel, Env,
    ModelParams, RewardCost, Strategy, ValidatedModel,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use common::{p_star, random_params, validated};

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        passed,
        detail: detail.into(),
    }
}

fn analysis(p: ModelParams, r: f64, c: f64) -> (ValidatedModel, RewardCost, BenefitCoefficients) {
    let m = validated(p);
    let rc = RewardCost::new(r, c).unwrap();
    let coef = benefit_coefficients(&m, &spectral_quantities(&m), &rc);
    (m, rc, coef)
}

fn random_strategy(rng: &mut ChaCha8Rng, i: usize) -> Strategy {
    match i % 5 {
        0 => Strategy::AlwaysJoin,
        1 => match rng.gen_range(0..3) {
            0 => Strategy::AlwaysBalk,
            1 => Strategy::PureThreshold(0),
            _ => Strategy::ReverseThreshold {
                n0: rng.gen_range(1..4),
                theta: rng.gen(),
            },
        },
        2 => Strategy::PureThreshold(rng.gen_range(1..9)),
        3 => Strategy::MixedThreshold {
            n0: rng.gen_range(0..7),
            theta: rng.gen_range(0.01..0.99),
        },
        _ => Strategy::ReverseThreshold {
            n0: 0,
            theta: rng.gen_range(0.01..0.99),
        },
    }
}

/// 1. Closed-form stationary masses against the truncated balance solve.
fn oracle_equivalence() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    let mut worst = 0.0f64;
    for i in 0..200 {
        let m = validated(random_params(&mut rng));
        let s = random_strategy(&mut rng, i);
        let dist = stationary_for(&m, &spectral_quantities(&m), &s).unwrap();
        let sol = solve_adaptive(&m, &s).unwrap();
        let last = if s.support_bound().is_some() { sol.n_max } else { sol.n_max - 1 };
        for n in 0..=last {
            for e in Env::BOTH {
                worst = worst.max((dist.mass(n, e) - sol.mass(n, e.index())).abs());
            }
        }
    }
    let secs = start.elapsed().as_secs_f64();
    outcome(
        worst < 1e-8 && secs < 10.0,
        format!("max |closed - oracle| = {worst:.2e} over 200 pairs in {secs:.2} s"),
    )
}

/// 2. Spot values on the reference model.
fn spot_values() -> Outcome {
    let (m, _, coef) = analysis(p_star(), 0.72, 1.0);
    let sp = spectral_quantities(&m);
    let cv = critical_values(&m);
    let es = m.mean_clearing();
    let root5 = 5f64.sqrt();
    let checks = [
        ("E[S1]", es[0], 0.75),
        ("E[S2]", es[1], 0.5),
        ("V_fu", cv.v_fu, 0.7),
        ("V_au_min", cv.v_au_min, 0.5),
        ("V_au_max", cv.v_au_max, 0.75),
        ("Delta", sp.delta, 80.0),
        ("z1", sp.z1, -3.0 + root5),
        ("z2", sp.z2, -3.0 - root5),
        ("H^U(0)", coef.h_upper(0), 0.72 - 0.68),
        ("lim H^U", coef.h_upper_limit(), 0.72 - (5.0 + root5) / 10.0),
    ];
    let bad: Vec<_> = checks
        .iter()
        .filter(|(_, got, want)| (got - want).abs() > 1e-9)
        .map(|(name, got, want)| format!("{name}: {got} vs {want}"))
        .collect();

    // Oracle confirmation of the clearing means and of H^U(0).
    let oracle_es = clearing_means(&m);
    let join = verify_equilibrium(&m, &RewardCost::new(0.72, 1.0).unwrap(), &Strategy::AlwaysJoin)
        .unwrap();
    let oracle_ok = (oracle_es[0] - 0.75).abs() < 1e-12
        && (oracle_es[1] - 0.5).abs() < 1e-12
        && (join.benefit(0).unwrap() - 0.04).abs() < 1e-9;
    outcome(
        bad.is_empty() && oracle_ok,
        if bad.is_empty() {
            format!("{} values within 1e-9, oracle agrees: {oracle_ok}", checks.len())
        } else {
            bad.join("; ")
        },
    )
}

/// Every emitted strategy passes the oracle, and for threshold subcase II
/// the set of passing pure thresholds is exactly `n_L..=n_U`.
fn check_report(m: &ValidatedModel, rc: &RewardCost, report: &EquilibriumReport) -> Result<(), String> {
    for e in &report.equilibria {
        let strategies = match &e.strategy {
            Some(s) => vec![s.clone()],
            None => vec![Strategy::AlwaysJoin, Strategy::AlwaysBalk],
        };
        for s in strategies {
            let v = verify_equilibrium(m, rc, &s).map_err(|e| e.to_string())?;
            if !v.passed() {
                return Err(format!("{s} fails at n={:?}", v.summary().first_failure));
            }
        }
    }
    if report.case.label == CaseLabel::CaseA && report.subcase == Subcase::II {
        let b = report.bounds.unwrap();
        let (lo, hi) = (b.lower.finite().unwrap(), b.upper.finite().unwrap());
        for n0 in 0..=hi + 3 {
            let pass = verify_equilibrium(m, rc, &Strategy::PureThreshold(n0))
                .map_err(|e| e.to_string())?
                .passed();
            if pass != (lo..=hi).contains(&n0) {
                return Err(format!("threshold:{n0} oracle={pass}, bounds {lo}..={hi}"));
            }
        }
    }
    Ok(())
}

/// `R/C` drawn around the window where the subcases change.
fn random_ratio(rng: &mut ChaCha8Rng, coef: &BenefitCoefficients) -> f64 {
    let a = coef.a / coef.d;
    let b = (coef.a + coef.b) / (coef.d + coef.e);
    let (lo, hi) = (a.min(b), a.max(b));
    rng.gen_range(0.9 * lo..=1.1 * hi)
}

/// 3. Equilibrium fixed point over random draws.
fn fixed_point() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(303);
    let mut tally = [[0usize; 3]; 3];
    let mut failures = Vec::new();
    for _ in 0..500 {
        let p = random_params(&mut rng);
        let (m, _, probe) = analysis(p, 1.0, 1.0);
        let c = rng.gen_range(0.5..2.0);
        let r = c * random_ratio(&mut rng, &probe);
        let (_, rc, coef) = analysis(p, r, c);
        let report = compute_equilibria(&m, &coef).unwrap();
        let ci = report.case.label as usize;
        let si = report.subcase as usize;
        tally[ci][si] += 1;
        if let Err(e) = check_report(&m, &rc, &report) {
            failures.push(format!("{p:?} R={r} C={c}: {e}"));
        }
    }
    let secs = start.elapsed().as_secs_f64();
    let passed = failures.is_empty() && secs < 60.0;
    let mut detail = format!(
        "500 draws in {secs:.1} s; case A I/II/III = {:?}, case B = {:?}",
        tally[0], tally[1]
    );
    if let Some(f) = failures.first() {
        detail += &format!("; {} failures, first: {f}", failures.len());
    }
    outcome(passed, detail)
}

/// 4. The worked case A instance.
fn worked_instance() -> Outcome {
    let (m, rc, coef) = analysis(p_star(), 0.72, 1.0);
    let mut report = compute_equilibria(&m, &coef).unwrap();
    let b = report.bounds.unwrap();
    let bounds_ok = (b.lower, b.upper, b.lower_plus, b.upper_minus)
        == (
            ExtCount::Finite(2),
            ExtCount::Finite(3),
            ExtCount::Finite(2),
            ExtCount::Finite(3),
        );
    let strategies: Vec<_> = report.equilibria.iter().filter_map(|e| e.strategy.clone()).collect();
    let theta = match strategies.as_slice() {
        [Strategy::PureThreshold(2), Strategy::PureThreshold(3), Strategy::MixedThreshold { n0: 2, theta }] => {
            Some(*theta)
        }
        _ => None,
    };
    let theta_ok = theta.is_some_and(|t| (t - 0.857).abs() < 1e-3 && (t - 6.0 / 7.0).abs() < 1e-6);
    let f_ok = theta.is_some_and(|t| coef.f_eval(2, t).abs() < 1e-10);
    let social_ok = report.socially_optimal
        == SocialOptimum::Strategy {
            strategy: Strategy::PureThreshold(3),
        };
    let oracle_ok = report.attach_verification(&m, &rc).unwrap();
    outcome(
        bounds_ok && theta_ok && f_ok && social_ok && oracle_ok,
        format!(
            "bounds ({}, {}, {}, {}), theta = {:?}, |F(2,theta)| = {:.1e}, social {:?}, oracle {}",
            b.lower,
            b.upper,
            b.lower_plus,
            b.upper_minus,
            theta,
            theta.map_or(f64::NAN, |t| coef.f_eval(2, t).abs()),
            report.socially_optimal,
            oracle_ok
        ),
    )
}

fn case_a_model(rng: &mut ChaCha8Rng) -> ModelParams {
    loop {
        let p = random_params(rng);
        if congestion_case(&validated(p)).label == CaseLabel::CaseA {
            return p;
        }
    }
}

fn case_b_model(rng: &mut ChaCha8Rng) -> ModelParams {
    loop {
        let p = random_params(rng);
        if congestion_case(&validated(p)).label == CaseLabel::CaseB {
            return p;
        }
    }
}

fn case_c_model(rng: &mut ChaCha8Rng, i: usize) -> ModelParams {
    let mut p = random_params(rng);
    if i % 2 == 0 {
        p.mu2 = p.mu1;
    } else {
        // rho2 = rho1
        p.lambda2 = p.lambda1 * p.mu2 / p.mu1;
    }
    p
}

/// Rounding band for strict-sign tests on differences of benefit ratios.
fn noise(x: f64, y: f64) -> f64 {
    1e-12 * (1.0 + x.abs() + y.abs())
}

/// 5. Monotonicity in `n` and `theta`, the recurrences, positivity of G.
fn monotonicity() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(505);
    let grid: Vec<f64> = (0..=10).map(|i| i as f64 / 10.0).collect();
    let mut wrong_sign = 0usize;
    let mut worst_recurrence = 0.0f64;
    let mut g_bad = 0usize;
    let mut det_bad = 0usize;
    for label in [CaseLabel::CaseA, CaseLabel::CaseB, CaseLabel::CaseC] {
        for i in 0..200 {
            let p = match label {
                CaseLabel::CaseA => case_a_model(&mut rng),
                CaseLabel::CaseB => case_b_model(&mut rng),
                CaseLabel::CaseC => case_c_model(&mut rng, i),
            };
            let r = rng.gen_range(0.1..5.0);
            let (m, _, coef) = analysis(p, r, 1.0);
            // Increasing in n and decreasing in theta carry the same sign
            // for the ratio.
            let expected = match congestion_case(&m).label {
                CaseLabel::CaseA => -1.0,
                CaseLabel::CaseB => 1.0,
                CaseLabel::CaseC => 0.0,
            };
            let det = coef.monotonicity_determinant();
            // B and E vanish in case C, so scale by the coefficients themselves.
            let det_scale = (coef.a.abs() + coef.b.abs()) * (coef.d.abs() + coef.e.abs());
            let det_ok = match label {
                CaseLabel::CaseA => det > 0.0,
                CaseLabel::CaseB => det < 0.0,
                CaseLabel::CaseC => det.abs() <= 1e-10 * det_scale.max(1e-300),
            };
            det_bad += usize::from(!det_ok);
            for n in 0..=30u64 {
                let (h0, h1) = (coef.h_upper(n), coef.h_upper(n + 1));
                let d = h1 - h0;
                let band = noise(h0, h1);
                let ok = if expected == 0.0 {
                    d.abs() <= 1e-10 * (1.0 + h0.abs())
                } else {
                    d * expected > 0.0 || d.abs() <= band
                };
                wrong_sign += usize::from(!ok);

                for w in grid.windows(2) {
                    let (t1, t2) = (w[0], w[1]);
                    let (a, b) = (coef.ratio(n, t1), coef.ratio(n, t2));
                    let d = b - a;
                    let ok = if expected == 0.0 {
                        d.abs() <= 1e-10 * (1.0 + a.abs())
                    } else {
                        d * -expected > 0.0 || d.abs() <= noise(a, b)
                    };
                    wrong_sign += usize::from(!ok);
                    let (g1, g2) = (coef.g_eval(n, t1), coef.g_eval(n, t2));
                    g_bad += usize::from(!(g1 > 0.0 && g2 > 0.0 && g2 < g1));
                }
                for &t in &grid {
                    let f = coef.f_eval(n, 1.0) + (1.0 - t) * coef.f_eval(n + 1, t);
                    let g = coef.g_eval(n, 1.0) + (1.0 - t) * coef.g_eval(n + 1, t);
                    worst_recurrence = worst_recurrence
                        .max((coef.f_eval(n, t) - f).abs())
                        .max((coef.g_eval(n, t) - g).abs());
                }
            }
        }
    }
    outcome(
        wrong_sign == 0 && worst_recurrence < 1e-10 && g_bad == 0 && det_bad == 0,
        format!(
            "600 models: {wrong_sign} sign violations, {det_bad} determinant mismatches, \
             max recurrence error {worst_recurrence:.1e}, {g_bad} G violations"
        ),
    )
}

/// 6. Structural identities, cross-checked against oracle Palm benefits.
fn identities() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(606);
    let mut worst_identity = 0.0f64;
    let mut worst_construction = 0.0f64;
    let mut worst_oracle = 0.0f64;
    for _ in 0..200 {
        let p = random_params(&mut rng);
        let r = rng.gen_range(0.1..5.0);
        let c = rng.gen_range(0.5..2.0);
        let (m, rc, coef) = analysis(p, r, c);
        let v_fu = critical_values(&m).v_fu;
        worst_identity = worst_identity.max((coef.h_lower(0) - (r - c * v_fu)).abs());

        let join = verify_equilibrium(&m, &rc, &Strategy::AlwaysJoin).unwrap();
        for n in 0..=10 {
            let closed = net_benefit_ao(&m, &coef, &Strategy::AlwaysJoin, n).unwrap().value;
            worst_construction = worst_construction.max((closed - coef.h_upper(n)).abs());
            worst_oracle = worst_oracle.max((closed - join.benefit(n).unwrap()).abs());
        }
        for n0 in 0..=6 {
            let s = Strategy::PureThreshold(n0);
            let closed = net_benefit_ao(&m, &coef, &s, n0).unwrap().value;
            worst_construction = worst_construction.max((closed - coef.h_lower(n0)).abs());
            let oracle = verify_equilibrium(&m, &rc, &s).unwrap();
            worst_oracle = worst_oracle.max((closed - oracle.benefit(n0).unwrap()).abs());
        }
    }
    outcome(
        worst_identity < 1e-10 && worst_construction == 0.0 && worst_oracle < 1e-8,
        format!(
            "H^L(0) identity {worst_identity:.1e}, construction {worst_construction:.1e}, \
             oracle Palm {worst_oracle:.1e}"
        ),
    )
}

/// 7. Simulation against the closed form on the reference model.
fn simulation() -> Outcome {
    let start = Instant::now();
    let m = validated(p_star());
    let rc = RewardCost::new(0.72, 1.0).unwrap();
    let est = simulate(&m, &rc, &Strategy::AlwaysJoin, 1e5, 2024, 16).unwrap();
    let dist = stationary_always_join(&m, &spectral_quantities(&m));
    let mut covered = 0;
    let mut cells = 0;
    for n in 0..=10u64 {
        for e in Env::BOTH {
            cells += 1;
            covered += usize::from(est.masses[n as usize][e.index()].covers(dist.mass(n, e), 3.0));
        }
    }
    let share = covered as f64 / cells as f64;
    let soj_ok = est.joiner_sojourn[0].covers(0.75, 3.0) && est.joiner_sojourn[1].covers(0.5, 3.0);
    let secs = start.elapsed().as_secs_f64();
    outcome(
        share >= 0.95 && soj_ok && secs < 30.0,
        format!(
            "{covered}/{cells} cells within 3 SE, joiner sojourn ({:.4}, {:.4}) covered: {soj_ok}, {secs:.1} s",
            est.joiner_sojourn[0].mean.unwrap_or(f64::NAN),
            est.joiner_sojourn[1].mean.unwrap_or(f64::NAN)
        ),
    )
}

/// R/C drawn from one of four bands in turn: below `A/D`, between `A/D` and
/// `V_fu`, the interior window up to `(A+B)/(D+E)`, and above it. Empty bands
/// fall through to the next one.
fn case_b_ratio(
    rng: &mut ChaCha8Rng,
    m: &ValidatedModel,
    coef: &BenefitCoefficients,
    i: usize,
) -> f64 {
    let low = coef.a / coef.d;
    let high = (coef.a + coef.b) / (coef.d + coef.e);
    let v_fu = critical_values(m).v_fu;
    let mid = v_fu.max(low);
    let bands = [
        (0.8 * low, low),
        (low, mid),
        (mid, high),
        (high, 1.2 * high),
    ];
    (0..4)
        .map(|k| bands[(i + k) % 4])
        .find(|(lo, hi)| hi > lo && (hi - lo) > 1e-9 * hi)
        .map(|(lo, hi)| rng.gen_range(lo..hi))
        .unwrap_or(high)
}

/// 8. Uniqueness of the reverse-threshold equilibrium in case B.
fn case_b_uniqueness() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(808);
    let mut kinds = [0usize; 3];
    let mut failures = Vec::new();
    for i in 0..100 {
        let p = case_b_model(&mut rng);
        let (m, _, probe) = analysis(p, 1.0, 1.0);
        let r = case_b_ratio(&mut rng, &m, &probe, i);
        let (_, rc, coef) = analysis(p, r, 1.0);
        let report = compute_equilibria(&m, &coef).unwrap();
        if report.equilibria.len() != 1 || report.equilibria[0].kind != EquilibriumKind::Reverse {
            failures.push(format!("{} equilibria", report.equilibria.len()));
            continue;
        }
        let s = report.equilibria[0].strategy.clone().unwrap();
        let v = verify_equilibrium(&m, &rc, &s).unwrap();
        if !v.passed() {
            failures.push(format!("{s} fails the oracle"));
        }
        match s {
            Strategy::AlwaysJoin => kinds[0] += 1,
            Strategy::AlwaysBalk => kinds[1] += 1,
            Strategy::ReverseThreshold { n0: 0, .. } => {
                kinds[2] += 1;
                let zero_ok = v.benefit(0).is_some_and(|b| b.abs() < 1e-6);
                let positive = (1..=10).all(|n| v.benefit(n).is_some_and(|b| b > 0.0));
                if !(zero_ok && positive) {
                    failures.push(format!("{s}: S(0) = {:?}", v.benefit(0)));
                }
            }
            other => failures.push(format!("unexpected {other}")),
        }
    }
    let mut detail = format!(
        "100 instances: join {}, balk {}, reverse(0,theta) {}",
        kinds[0], kinds[1], kinds[2]
    );
    if let Some(f) = failures.first() {
        detail += &format!("; {} failures, first: {f}", failures.len());
    }
    outcome(failures.is_empty(), detail)
}

fn run_cli(args: &[&str]) -> (i32, Vec<u8>) {
    let out = Command::new(env!("CARGO_BIN_EXE_clearq"))
        .args(args)
        .output()
        .expect("run clearq");
    (out.status.code().unwrap_or(-1), out.stdout)
}

fn round_trips<T>(bytes: &[u8]) -> bool
where
    T: serde::de::DeserializeOwned + serde::Serialize + PartialEq,
{
    let Ok(first) = serde_json::from_slice::<T>(bytes) else {
        return false;
    };
    let again = serde_json::to_string(&first).unwrap();
    serde_json::from_str::<T>(&again).is_ok_and(|second| second == first)
}

/// 9. CLI determinism, JSON round trips and the sweep boundaries.
fn cli_contract() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("p_star.json");
    std::fs::write(
        &cfg,
        r#"{"lambda1":2,"lambda2":1,"mu1":1,"mu2":3,"q12":1,"q21":2,"R":0.72,"C":1}"#,
    )
    .unwrap();
    let cfg = cfg.to_str().unwrap();
    let base = ["--config", cfg, "--format", "json"];
    let with = |extra: &[&str]| -> Vec<String> {
        base.iter().chain(extra).map(|s| s.to_string()).collect()
    };
    let call = |extra: &[&str]| {
        let args = with(extra);
        run_cli(&args.iter().map(String::as_str).collect::<Vec<_>>())
    };

    let sim = ["simulate", "--strategy", "always-join", "--horizon", "2000", "--replications", "4", "--seed", "42"];
    let (c1, s1) = call(&sim);
    let (c2, s2) = call(&sim);
    let deterministic = c1 == 0 && c2 == 0 && s1 == s2;

    let mut trips = Vec::new();
    trips.push(("simulate", round_trips::<SimEstimates>(&s1)));
    for level in ["fu", "au", "fo"] {
        let (c, out) = call(&["analyze", "--info-level", level]);
        trips.push((level, c == 0 && round_trips::<DominantStrategySet>(&out)));
    }
    let (c, out) = call(&["analyze", "--info-level", "ao"]);
    trips.push(("ao", c == 0 && round_trips::<EquilibriumReport>(&out)));
    let (c, out) = call(&["stationary", "--strategy", "threshold:2", "--max-n", "5"]);
    trips.push(("stationary", c == 0 && round_trips::<StationaryOutput>(&out)));
    let (c, out) = call(&["benefit", "--strategy", "always-join", "--n", "0..5"]);
    trips.push(("benefit", c == 0 && round_trips::<Vec<clearq_core::cli::BenefitRow>>(&out)));
    let (c, out) = call(&["sweep", "--param", "R", "--from", "0.6", "--to", "0.8", "--steps", "21"]);
    trips.push(("sweep", c == 0 && round_trips::<Vec<SweepRow>>(&out)));
    let failed_trips: Vec<_> = trips.iter().filter(|t| !t.1).map(|t| t.0).collect();

    let rows: Vec<SweepRow> = serde_json::from_slice(&out).unwrap_or_default();
    let step = 0.01;
    let first = |s: Subcase| rows.iter().find(|r| r.subcase == s).map(|r| r.value);
    let lower = first(Subcase::II).unwrap_or(f64::NAN);
    let upper = first(Subcase::III).unwrap_or(f64::NAN);
    let lower_ok = (lower - 0.68).abs() <= step + 1e-12;
    let upper_ok = (upper - (5.0 + 5f64.sqrt()) / 10.0).abs() <= step + 1e-12;

    outcome(
        deterministic && failed_trips.is_empty() && lower_ok && upper_ok,
        format!(
            "simulate byte-identical: {deterministic}; round-trip failures {failed_trips:?}; \
             sweep boundaries at {lower} and {upper}"
        ),
    )
}

fn main() {
    // Make sure the analysis entry point used by the CLI agrees with the
    // direct one before running anything else.
    let a = Analysis::new(&p_star(), &RewardCost::new(0.72, 1.0).unwrap()).unwrap();
    assert_eq!(a.equilibria(&Default::default()).unwrap().equilibria.len(), 3);

    let criteria: [(&str, fn() -> Outcome); 9] = [
        ("stationary oracle equivalence", oracle_equivalence),
        ("spot values on the reference model", spot_values),
        ("equilibrium fixed point", fixed_point),
        ("worked case A instance", worked_instance),
        ("monotonicity suites", monotonicity),
        ("structural identities", identities),
        ("simulation agreement", simulation),
        ("case B uniqueness", case_b_uniqueness),
        ("CLI determinism and round trip", cli_contract),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let o = check();
        println!(
            "{} {} {name}: {}",
            if o.passed { "PASS" } else { "FAIL" },
            i + 1,
            o.detail
        );
        failed += usize::from(!o.passed);
    }
    println!("acceptance: {}/{} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
