//! Command-line front end.
//!
//! Exit codes: 0 on success, 2 for bad input (config, descriptor, flags),
//! 3 when the oracle disagrees with a closed-form result.

pub mod config;
pub mod format;

use std::ops::RangeInclusive;
use std::path::PathBuf;
use std::str::FromStr;

use clap::{Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::benefit::net_benefit_ao;
use crate::equilibrium::{EquilibriumReport, ExtCount, Subcase};
use crate::error::Error;
use crate::model::{CaseLabel, RewardCost, ValidatedModel};
use crate::oracle::{self, solve_adaptive};
use crate::spectral::stationary_for;
use crate::strategy::Strategy;
use crate::unobservable::{
    dominant_almost_unobservable_with, dominant_fully_observable_with,
    dominant_fully_unobservable_with, DominantChoice, DominantStrategySet, JoinChoice, NetBenefit,
};
use crate::{Analysis, Tolerances};

use config::RunConfig;
use format::{csv, fmt_g, fmt_opt, table};

/// Largest allowed gap between closed-form and oracle stationary masses.
const STATIONARY_AGREEMENT: f64 = 1e-8;
const DEFAULT_SEED: u64 = 1;

#[derive(Debug, Parser)]
#[command(
    name = "clearq",
    version,
    about = "Equilibrium join/balk strategies for a clearing queue in a two-state environment"
)]
pub struct Cli {
    /// Model configuration (JSON with lambda1, lambda2, mu1, mu2, q12, q21, R, C).
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Write output to this file instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = OutputFormat::Table)]
    pub format: OutputFormat,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Knife-edge tolerance for sign tests.
    #[arg(long, global = true)]
    pub tolerance: Option<f64>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OutputFormat {
    Table,
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum InfoLevel {
    /// Fully unobservable.
    Fu,
    /// Almost unobservable: environment seen, queue length hidden.
    Au,
    /// Fully observable.
    Fo,
    /// Almost observable: queue length seen, environment hidden.
    Ao,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
pub enum SweepParam {
    #[value(name = "R", alias = "r")]
    R,
    #[value(name = "C", alias = "c")]
    C,
    Lambda1,
    Lambda2,
    Mu1,
    Mu2,
    Q12,
    Q21,
}

impl SweepParam {
    fn apply(self, cfg: &RunConfig, v: f64) -> RunConfig {
        let mut c = *cfg;
        match self {
            SweepParam::R => c.reward = v,
            SweepParam::C => c.cost = v,
            SweepParam::Lambda1 => c.lambda1 = v,
            SweepParam::Lambda2 => c.lambda2 = v,
            SweepParam::Mu1 => c.mu1 = v,
            SweepParam::Mu2 => c.mu2 = v,
            SweepParam::Q12 => c.q12 = v,
            SweepParam::Q21 => c.q21 = v,
        }
        c
    }
}

/// Inclusive queue-length range written `a..b` or a single `n`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NRange(pub RangeInclusive<u64>);

impl FromStr for NRange {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        let bad = || format!("expected `a..b` or `n`, got `{s}`");
        match s.split_once("..") {
            Some((a, b)) => {
                let a: u64 = a.trim().parse().map_err(|_| bad())?;
                let b: u64 = b.trim().trim_start_matches('=').parse().map_err(|_| bad())?;
                if a > b {
                    return Err(bad());
                }
                Ok(NRange(a..=b))
            }
            None => {
                let n: u64 = s.trim().parse().map_err(|_| bad())?;
                Ok(NRange(n..=n))
            }
        }
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Equilibrium or dominant strategy for one information level.
    Analyze {
        #[arg(long, value_enum, default_value_t = InfoLevel::Ao)]
        info_level: InfoLevel,
    },
    /// Same as `analyze --info-level ao`.
    Equilibrium,
    /// Stationary distribution under a strategy.
    Stationary {
        #[arg(long)]
        strategy: Strategy,
        #[arg(long, default_value_t = 10)]
        max_n: u64,
    },
    /// Net benefit of joining after seeing n customers.
    Benefit {
        #[arg(long)]
        strategy: Strategy,
        #[arg(long, default_value = "0..5")]
        n: NRange,
    },
    /// Discrete-event simulation of a strategy.
    Simulate {
        #[arg(long)]
        strategy: Strategy,
        #[arg(long, default_value_t = 10_000.0)]
        horizon: f64,
        #[arg(long, default_value_t = 8)]
        replications: usize,
    },
    /// Case, subcase and equilibria over a one-parameter grid.
    Sweep {
        #[arg(long, value_enum)]
        param: SweepParam,
        #[arg(long)]
        from: f64,
        #[arg(long)]
        to: f64,
        #[arg(long)]
        steps: usize,
    },
}

#[derive(Debug)]
pub enum Failure {
    Input(String),
    /// The rendered output is still produced so it can be inspected.
    Consistency { message: String, output: String },
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Input(e.to_string())
    }
}

pub struct Outcome {
    pub output: String,
    pub warnings: Vec<String>,
}

struct Context {
    cfg: RunConfig,
    model: ValidatedModel,
    rc: RewardCost,
    tol: Tolerances,
    seed: u64,
    format: OutputFormat,
}

impl Context {
    fn new(cli: &Cli) -> Result<Self, Failure> {
        let path = cli
            .config
            .as_ref()
            .ok_or_else(|| Failure::Input("--config <path> is required".into()))?;
        let cfg = RunConfig::load(path).map_err(Failure::Input)?;
        let (model, rc) = cfg.validated()?;
        let mut tol = Tolerances::default();
        if let Some(t) = cli.tolerance.or(cfg.tolerance) {
            if !(t.is_finite() && t >= 0.0) {
                return Err(Failure::Input(format!("tolerance must be non-negative, got {t}")));
            }
            tol.knife_edge = t;
        }
        Ok(Context {
            cfg,
            model,
            rc,
            tol,
            seed: cli.seed.or(cfg.seed).unwrap_or(DEFAULT_SEED),
            format: cli.format,
        })
    }

    fn json<T: Serialize>(&self, value: &T) -> String {
        serde_json::to_string_pretty(value).expect("report types serialize") + "\n"
    }
}

pub fn run(cli: &Cli) -> Result<Outcome, Failure> {
    let ctx = Context::new(cli)?;
    match &cli.command {
        Command::Analyze { info_level } => analyze(&ctx, *info_level),
        Command::Equilibrium => analyze(&ctx, InfoLevel::Ao),
        Command::Stationary { strategy, max_n } => stationary(&ctx, strategy, *max_n),
        Command::Benefit { strategy, n } => benefit(&ctx, strategy, n),
        Command::Simulate {
            strategy,
            horizon,
            replications,
        } => simulate(&ctx, strategy, *horizon, *replications),
        Command::Sweep {
            param,
            from,
            to,
            steps,
        } => sweep(&ctx, *param, *from, *to, *steps),
    }
}

/// Parse arguments, run, write output and return the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    let (output, warnings, failure) = match run(&cli) {
        Ok(o) => (o.output, o.warnings, None),
        Err(Failure::Input(msg)) => {
            eprintln!("error: {msg}");
            return 2;
        }
        Err(Failure::Consistency { message, output }) => (output, Vec::new(), Some(message)),
    };
    for w in warnings {
        eprintln!("warning: {w}");
    }
    match &cli.out {
        Some(path) => {
            if let Err(e) = std::fs::write(path, &output) {
                eprintln!("error: cannot write {}: {e}", path.display());
                return 2;
            }
        }
        None => print!("{output}"),
    }
    match failure {
        Some(msg) => {
            eprintln!("error: {msg}");
            3
        }
        None => 0,
    }
}

fn ok(output: String) -> Result<Outcome, Failure> {
    Ok(Outcome {
        output,
        warnings: Vec::new(),
    })
}

fn describe_choice(q: JoinChoice) -> &'static str {
    match q {
        JoinChoice::Balk => "balk (q=0)",
        JoinChoice::Join => "join (q=1)",
        JoinChoice::Free => "indifferent (q in [0,1])",
    }
}

fn analyze(ctx: &Context, level: InfoLevel) -> Result<Outcome, Failure> {
    let set = match level {
        InfoLevel::Fu => dominant_fully_unobservable_with(&ctx.model, &ctx.rc, &ctx.tol),
        InfoLevel::Au => dominant_almost_unobservable_with(&ctx.model, &ctx.rc, &ctx.tol),
        InfoLevel::Fo => dominant_fully_observable_with(&ctx.model, &ctx.rc, &ctx.tol),
        InfoLevel::Ao => return analyze_ao(ctx),
    };
    ok(render_dominant(ctx, &set))
}

fn render_dominant(ctx: &Context, set: &DominantStrategySet) -> String {
    let mut fields: Vec<(String, String)> = Vec::new();
    match set.choice {
        DominantChoice::Pooled { q } => fields.push(("decision".into(), describe_choice(q).into())),
        DominantChoice::PerEnvironment { q1, q2 } => {
            fields.push(("decision_env1".into(), describe_choice(q1).into()));
            fields.push(("decision_env2".into(), describe_choice(q2).into()));
        }
    }
    fields.push(("V_fu".into(), fmt_g(set.critical.v_fu)));
    fields.push(("V_au_min".into(), fmt_g(set.critical.v_au_min)));
    fields.push(("V_au_max".into(), fmt_g(set.critical.v_au_max)));
    match set.net_benefit {
        NetBenefit::Pooled(s) => fields.push(("S_fu".into(), fmt_g(s))),
        NetBenefit::PerEnvironment([s1, s2]) => {
            fields.push(("S_env1".into(), fmt_g(s1)));
            fields.push(("S_env2".into(), fmt_g(s2)));
        }
    }
    fields.push(("knife_edge".into(), set.knife_edge.to_string()));
    match ctx.format {
        OutputFormat::Json => ctx.json(set),
        OutputFormat::Csv => csv(
            &["field", "value"],
            &fields.into_iter().map(|(k, v)| vec![k, v]).collect::<Vec<_>>(),
        ),
        OutputFormat::Table => {
            let mut out = format!("regime: {:?}\n", set.regime);
            for (k, v) in fields {
                out += &format!("{k}: {v}\n");
            }
            out
        }
    }
}

fn analyze_ao(ctx: &Context) -> Result<Outcome, Failure> {
    let analysis = Analysis::new(&ctx.cfg.params(), &ctx.rc)?;
    let mut report = analysis.equilibria(&ctx.tol)?;
    let verified = report.attach_verification(&ctx.model, &ctx.rc)?;
    let output = render_report(ctx, &report);
    if verified {
        ok(output)
    } else {
        Err(Failure::Consistency {
            message: "oracle best-response check failed for an emitted equilibrium".into(),
            output,
        })
    }
}

fn ext(c: Option<ExtCount>) -> String {
    c.map_or_else(String::new, |c| c.to_string())
}

fn render_report(ctx: &Context, r: &EquilibriumReport) -> String {
    let rows: Vec<Vec<String>> = r
        .equilibria
        .iter()
        .map(|e| {
            let v = e.verification;
            vec![
                format!("{:?}", e.kind).to_lowercase(),
                e.label(),
                v.map_or_else(String::new, |v| if v.passed { "pass" } else { "FAIL" }.into()),
                v.map_or_else(String::new, |v| fmt_g(v.worst_margin)),
            ]
        })
        .collect();
    let header = ["kind", "strategy", "oracle", "worst_margin"];
    match ctx.format {
        OutputFormat::Json => ctx.json(r),
        OutputFormat::Csv => csv(&header, &rows),
        OutputFormat::Table => {
            let mut out = format!("case: {} (product {})\n", r.case.label, fmt_g(r.case.product));
            out += &format!("subcase: {}\n", r.subcase);
            if let Some(b) = &r.bounds {
                let names = match b.orientation {
                    crate::equilibrium::Orientation::Threshold => ["n_L", "n_U", "n_L+", "n_U-"],
                    crate::equilibrium::Orientation::Reverse => ["m_L", "m_U", "m_L+", "m_U-"],
                };
                out += &format!(
                    "bounds: {}={} {}={} {}={} {}={}\n",
                    names[0], b.lower, names[1], b.upper, names[2], b.lower_plus, names[3], b.upper_minus
                );
            }
            out += &format!("H^U(0): {}\n", fmt_g(r.h_upper_zero));
            out += &format!("H^L(0): {}\n", fmt_g(r.h_lower_zero));
            out += &format!("lim H^U: {}\n", fmt_g(r.h_upper_limit));
            out += &match &r.socially_optimal {
                crate::equilibrium::SocialOptimum::Strategy { strategy } => {
                    format!("socially optimal: {strategy}\n")
                }
                crate::equilibrium::SocialOptimum::CoincidesWithEquilibrium => {
                    "socially optimal: coincides with equilibrium\n".into()
                }
            };
            if r.knife_edge {
                out += "knife edge: a sign test fell inside the tolerance band\n";
            }
            out += "\n";
            out += &table(&header, &rows);
            out
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StationaryRow {
    pub n: u64,
    pub p1: f64,
    pub p2: f64,
    pub total: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StationaryOutput {
    pub strategy: Strategy,
    /// `closed-form` or `balance-solve`.
    pub source: String,
    pub rows: Vec<StationaryRow>,
    pub tail: [f64; 2],
    /// Largest gap to the balance-equation oracle over the printed rows.
    pub oracle_gap: f64,
}

fn stationary(ctx: &Context, strategy: &Strategy, max_n: u64) -> Result<Outcome, Failure> {
    strategy.validate()?;
    let sol = solve_adaptive(&ctx.model, strategy)?;
    let sp = crate::spectral::spectral_quantities(&ctx.model);
    let mut warnings = Vec::new();
    let (source, rows, tail) = match stationary_for(&ctx.model, &sp, strategy) {
        Ok(dist) => {
            let t = dist.table(max_n)?;
            ("closed-form", t.rows, t.tail)
        }
        Err(Error::UnsupportedStrategy(_)) => {
            warnings.push("no closed form for joining vectors; showing the balance-equation solve".into());
            let rows: Vec<[f64; 2]> = (0..=max_n).map(|n| [sol.mass(n, 0), sol.mass(n, 1)]).collect();
            let tail = [0, 1].map(|e| (max_n + 1..=sol.n_max).map(|n| sol.mass(n, e)).sum());
            ("balance-solve", rows, tail)
        }
        Err(e) => return Err(e.into()),
    };
    let sol = &sol;
    let gap = rows
        .iter()
        .enumerate()
        .flat_map(|(n, r)| (0..2).map(move |e| (r[e] - sol.mass(n as u64, e)).abs()))
        .fold(0.0f64, f64::max);
    let out = StationaryOutput {
        strategy: strategy.clone(),
        source: source.into(),
        rows: rows
            .iter()
            .enumerate()
            .map(|(n, r)| StationaryRow {
                n: n as u64,
                p1: r[0],
                p2: r[1],
                total: r[0] + r[1],
            })
            .collect(),
        tail,
        oracle_gap: gap,
    };

    let header = ["n", "p(n,1)", "p(n,2)", "p(n,.)"];
    let mut cells: Vec<Vec<String>> = out
        .rows
        .iter()
        .map(|r| vec![r.n.to_string(), fmt_g(r.p1), fmt_g(r.p2), fmt_g(r.total)])
        .collect();
    cells.push(vec![
        format!(">{max_n}"),
        fmt_g(tail[0]),
        fmt_g(tail[1]),
        fmt_g(tail[0] + tail[1]),
    ]);
    let output = match ctx.format {
        OutputFormat::Json => ctx.json(&out),
        OutputFormat::Csv => csv(&header, &cells),
        OutputFormat::Table => format!("strategy: {strategy}\n") + &table(&header, &cells),
    };
    if gap > STATIONARY_AGREEMENT {
        return Err(Failure::Consistency {
            message: format!("closed form and balance solve differ by {gap:e}"),
            output,
        });
    }
    Ok(Outcome { output, warnings })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenefitRow {
    pub n: u64,
    /// `None` where the state is unreachable.
    pub value: Option<f64>,
    pub palm1: Option<f64>,
    pub sojourn: Option<f64>,
}

fn benefit(ctx: &Context, strategy: &Strategy, range: &NRange) -> Result<Outcome, Failure> {
    let analysis = Analysis::new(&ctx.cfg.params(), &ctx.rc)?;
    let mut warnings = Vec::new();
    let mut rows = Vec::new();
    for n in range.0.clone() {
        match net_benefit_ao(&ctx.model, &analysis.coefficients, strategy, n) {
            Ok(v) => rows.push(BenefitRow {
                n,
                value: Some(v.value),
                palm1: Some(v.palm[0]),
                sojourn: Some(v.sojourn),
            }),
            Err(e @ Error::UnreachableState { .. }) => {
                warnings.push(e.to_string());
                rows.push(BenefitRow {
                    n,
                    value: None,
                    palm1: None,
                    sojourn: None,
                });
            }
            Err(e) => return Err(e.into()),
        }
    }
    let header = ["n", "S_ao", "palm_env1", "sojourn"];
    let cell = |x: Option<f64>| x.map_or_else(|| "\u{2014}".to_string(), fmt_g);
    let cells: Vec<Vec<String>> = rows
        .iter()
        .map(|r| vec![r.n.to_string(), cell(r.value), cell(r.palm1), cell(r.sojourn)])
        .collect();
    let output = match ctx.format {
        OutputFormat::Json => ctx.json(&rows),
        OutputFormat::Csv => csv(&header, &cells),
        OutputFormat::Table => format!("strategy: {strategy}\n") + &table(&header, &cells),
    };
    Ok(Outcome { output, warnings })
}

fn simulate(
    ctx: &Context,
    strategy: &Strategy,
    horizon: f64,
    replications: usize,
) -> Result<Outcome, Failure> {
    let est = oracle::simulate(&ctx.model, &ctx.rc, strategy, horizon, ctx.seed, replications)?;
    if ctx.format == OutputFormat::Json {
        return ok(ctx.json(&est));
    }

    // Exact column: closed form where one exists, balance solve otherwise.
    let sp = crate::spectral::spectral_quantities(&ctx.model);
    let exact: Box<dyn Fn(u64, usize) -> f64> = match stationary_for(&ctx.model, &sp, strategy) {
        Ok(dist) => Box::new(move |n, e| dist.mass(n, crate::model::Env::from_index(e).unwrap())),
        Err(_) => {
            let sol = solve_adaptive(&ctx.model, strategy)?;
            Box::new(move |n, e| sol.mass(n, e))
        }
    };
    let header = [
        "n", "p1_sim", "p1_se", "p1_exact", "p2_sim", "p2_se", "p2_exact", "S_sim", "S_se",
    ];
    let cells: Vec<Vec<String>> = (0..=10u64)
        .map(|n| {
            let m = &est.masses[n as usize];
            let s = &est.conditional_benefit[n as usize];
            vec![
                n.to_string(),
                fmt_opt(m[0].mean),
                fmt_opt(m[0].se),
                fmt_g(exact(n, 0)),
                fmt_opt(m[1].mean),
                fmt_opt(m[1].se),
                fmt_g(exact(n, 1)),
                fmt_opt(s.mean),
                fmt_opt(s.se),
            ]
        })
        .collect();
    let output = match ctx.format {
        OutputFormat::Csv => csv(&header, &cells),
        _ => {
            let mut out = format!(
                "strategy: {strategy}\nseed: {}  replications: {}  horizon: {}  events: {}\n",
                est.seed,
                est.replications,
                fmt_g(est.horizon),
                est.event_count
            );
            for e in 0..2 {
                let j = &est.joiner_sojourn[e];
                out += &format!(
                    "joiner sojourn env {}: {} (se {}), exact {}\n",
                    e + 1,
                    fmt_opt(j.mean),
                    fmt_opt(j.se),
                    fmt_g(ctx.model.mean_clearing()[e])
                );
            }
            out + "\n" + &table(&header, &cells)
        }
    };
    ok(output)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub value: f64,
    pub case: CaseLabel,
    pub subcase: Subcase,
    pub lower: Option<ExtCount>,
    pub upper: Option<ExtCount>,
    pub equilibria: Vec<String>,
    pub v_fu: f64,
    pub h_upper_zero: f64,
    pub h_upper_limit: f64,
}

fn sweep_row(ctx: &Context, param: SweepParam, value: f64) -> Result<SweepRow, Failure> {
    let cfg = param.apply(&ctx.cfg, value);
    let (model, rc) = cfg.validated()?;
    let analysis = Analysis::new(&cfg.params(), &rc)?;
    let report = analysis.equilibria(&ctx.tol)?;
    Ok(SweepRow {
        value,
        case: report.case.label,
        subcase: report.subcase,
        lower: report.bounds.map(|b| b.lower),
        upper: report.bounds.map(|b| b.upper),
        equilibria: report.equilibria.iter().map(|e| e.label()).collect(),
        v_fu: crate::unobservable::critical_values(&model).v_fu,
        h_upper_zero: report.h_upper_zero,
        h_upper_limit: report.h_upper_limit,
    })
}

fn sweep(
    ctx: &Context,
    param: SweepParam,
    from: f64,
    to: f64,
    steps: usize,
) -> Result<Outcome, Failure> {
    if steps < 2 {
        return Err(Failure::Input(format!("--steps must be at least 2, got {steps}")));
    }
    if !(from.is_finite() && to.is_finite()) {
        return Err(Failure::Input("sweep range must be finite".into()));
    }
    let grid: Vec<f64> = (0..steps)
        .map(|i| from + (to - from) * i as f64 / (steps - 1) as f64)
        .collect();
    let rows: Vec<SweepRow> = grid
        .par_iter()
        .map(|&v| sweep_row(ctx, param, v))
        .collect::<Result<_, _>>()?;

    let header = [
        "value", "case", "subcase", "lower", "upper", "equilibria", "V_fu", "H_U0", "H_U_limit",
    ];
    let cells: Vec<Vec<String>> = rows
        .iter()
        .map(|r| {
            vec![
                fmt_g(r.value),
                r.case.to_string(),
                r.subcase.to_string(),
                ext(r.lower),
                ext(r.upper),
                r.equilibria.join(";"),
                fmt_g(r.v_fu),
                fmt_g(r.h_upper_zero),
                fmt_g(r.h_upper_limit),
            ]
        })
        .collect();
    ok(match ctx.format {
        OutputFormat::Json => ctx.json(&rows),
        OutputFormat::Csv => csv(&header, &cells),
        OutputFormat::Table => table(&header, &cells),
    })
}
