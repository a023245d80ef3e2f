//! Batch front-end behind the `persuasion` binary.

pub mod output;
pub mod spec;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::{json, Value};

use crate::analysis::{check_all, results_bundle, solve, SolveConfig, Solution};
use crate::error::{Error, Result};
use crate::lp::Pricing;
use crate::model::Problem;
use crate::nad::{solve_nad, verify_against_lp};
use crate::presets::{catalog, oracle_check, GridSpec, Params};
use output::{nad_csv, outcome_csv, prices_csv, to_json, write};
use spec::{check_grid, load_source, parse_spec, Loaded, Source};

/// Cells sampled by `certify` when scanning for negative slack.
pub const SCAN_CELLS: usize = 10_000;

#[derive(Parser, Debug)]
#[command(name = "persuasion", version, about = "Finite-grid persuasion solver and structure checker")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Solve the outcome LP; writes outcome, prices and summary.
    Solve(RunArgs),
    /// Run every structure checker; writes verdicts.json.
    Check(RunArgs),
    /// Shoot the NAD boundary-value problem and compare it with the LP; writes nad.csv.
    Nad(RunArgs),
    /// Verify complementary slackness and scan for negative slack; writes certificate.json.
    Certify(RunArgs),
    /// Print the preset catalog as JSON.
    Presets,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum PricingArg {
    Bland,
    Dantzig,
}

#[derive(Args, Debug, Clone)]
pub struct RunArgs {
    #[arg(long, conflicts_with = "spec")]
    pub preset: Option<String>,
    /// Preset parameters as k=v[,k=v].
    #[arg(long, requires = "preset")]
    pub params: Option<String>,
    /// Problem spec file (JSON).
    #[arg(long)]
    pub spec: Option<PathBuf>,
    /// State grid size, optionally followed by the action grid size: N or N,M.
    #[arg(long, value_parser = parse_grid)]
    pub grid_n: Option<GridSpec>,
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
    #[arg(long, value_enum, default_value = "csv")]
    pub format: Format,
    /// Simplex optimality tolerance.
    #[arg(long)]
    pub tol_lp: Option<f64>,
    /// Contact tolerance, relative to the payoff scale.
    #[arg(long, default_value_t = 1e-6)]
    pub tol_contact: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, value_enum, default_value = "dantzig")]
    pub pricing: PricingArg,
}

fn parse_grid(s: &str) -> std::result::Result<GridSpec, String> {
    let nums: Vec<usize> = s.split(',').map(|t| t.trim().parse::<usize>().map_err(|e| format!("'{t}': {e}"))).collect::<std::result::Result<_, _>>()?;
    let g = match nums[..] {
        [n] => GridSpec::new(n),
        [n, m] => GridSpec::with_actions(n, m),
        _ => return Err("expected N or N,M".into()),
    };
    check_grid(&g).map_err(|e| e.to_string())?;
    Ok(g)
}

/// What a successful run found.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Status {
    Clean,
    /// Some check produced a counterexample.
    Witness,
}

impl Status {
    pub fn code(self) -> i32 {
        match self {
            Status::Clean => 0,
            Status::Witness => 2,
        }
    }
}

/// Parses `argv`, runs, and returns the process exit code. Errors go to stderr.
pub fn main_with<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    match run(&cli.command) {
        Ok(s) => s.code(),
        Err(e) => {
            eprintln!("error: {e}");
            1
        }
    }
}

pub fn run(command: &Command) -> Result<Status> {
    match command {
        Command::Presets => {
            print!("{}", to_json(&catalog())?);
            Ok(Status::Clean)
        }
        Command::Solve(a) => run_solve(a),
        Command::Check(a) => run_check(a),
        Command::Nad(a) => run_nad(a),
        Command::Certify(a) => run_certify(a),
    }
}

fn load(a: &RunArgs) -> Result<Loaded> {
    let source = match (&a.preset, &a.spec) {
        (Some(id), None) => {
            let params = a.params.as_deref().map(Params::parse).transpose()?.unwrap_or_default();
            Source::Preset { id: id.clone(), params, grid: None }
        }
        (None, Some(path)) => {
            let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
            parse_spec(&text)?
        }
        _ => return Err(Error::parse("input", "give exactly one of --preset or --spec")),
    };
    load_source(source, a.grid_n)
}

fn config(a: &RunArgs) -> SolveConfig {
    SolveConfig {
        pricing: match a.pricing {
            PricingArg::Bland => Pricing::Bland,
            PricingArg::Dantzig => Pricing::Dantzig,
        },
        tol_lp: a.tol_lp,
        tol_contact: a.tol_contact,
        ..SolveConfig::default()
    }
}

fn solved(a: &RunArgs) -> Result<(Loaded, Solution)> {
    let cfg = config(a);
    cfg.validate()?;
    let l = load(a)?;
    let s = solve(&l.problem, &cfg)?;
    Ok((l, s))
}

fn emit_table(a: &RunArgs, stem: &str, csv: impl FnOnce() -> Result<String>, json: impl FnOnce() -> Value) -> Result<()> {
    match a.format {
        Format::Csv => write(&a.out, &format!("{stem}.csv"), &csv()?),
        Format::Json => write(&a.out, &format!("{stem}.json"), &to_json(&json())?),
    }
}

fn write_solution(a: &RunArgs, p: &Problem, s: &Solution) -> Result<()> {
    let n = p.n_states();
    emit_table(a, "outcome", || outcome_csv(p, &s.outcome), || {
        let cells: Vec<Value> = (0..p.n_actions())
            .flat_map(|j| (0..n).map(move |i| (j, i)))
            .filter(|&(j, i)| s.outcome.mass(j, i) != 0.0)
            .map(|(j, i)| json!({ "y": p.action(j), "x": p.state(i), "mass": s.outcome.mass(j, i) }))
            .collect();
        Value::Array(cells)
    })?;
    emit_table(a, "prices", || prices_csv(p, &s.prices), || {
        json!({
            "p": (0..n).map(|i| json!({ "x": p.state(i), "p": s.prices.p[i] })).collect::<Vec<_>>(),
            "q": (0..p.n_actions()).map(|j| json!({ "y": p.action(j), "q": s.prices.q[j] })).collect::<Vec<_>>(),
        })
    })
}

fn run_solve(a: &RunArgs) -> Result<Status> {
    let (l, s) = solved(a)?;
    write_solution(a, &l.problem, &s)?;
    write(&a.out, "summary.json", &to_json(&s.summary(&l.problem))?)?;
    Ok(Status::Clean)
}

fn run_check(a: &RunArgs) -> Result<Status> {
    let (l, s) = solved(a)?;
    let verdicts = check_all(&l.problem, &s);
    let oracle = l.preset.as_ref().map(|pr| oracle_check(&l.problem, pr, &results_bundle(&l.problem, &s, &verdicts, None)));
    let doc = json!({ "problem": l.problem.name(), "verdicts": verdicts, "oracle": oracle });
    write(&a.out, "verdicts.json", &to_json(&doc)?)?;
    Ok(if verdicts.iter().any(|v| v.witness.is_some()) { Status::Witness } else { Status::Clean })
}

fn run_nad(a: &RunArgs) -> Result<Status> {
    let cfg = config(a);
    cfg.validate()?;
    let l = load(a)?;
    let p = &l.problem;
    let density = p
        .density()
        .ok_or_else(|| Error::IllPosed("the NAD solver needs a prior density; inline problems do not carry one".into()))?
        .clone();
    let nad = solve_nad(p, &|x| density(x))?;
    let s = solve(p, &cfg)?;
    let report = verify_against_lp(p, &nad, &s.outcome);
    emit_table(a, "nad", || nad_csv(&nad.nodes), || json!(nad.nodes))?;
    let oracle = l.preset.as_ref().map(|pr| {
        let verdicts = check_all(p, &s);
        oracle_check(p, pr, &results_bundle(p, &s, &verdicts, Some(&nad)))
    });
    let summary = json!({
        "problem": p.name(),
        "method": nad.method,
        "y_low": nad.y_low,
        "y_high": nad.y_high,
        "objective": nad.objective,
        "terminal_residual": nad.terminal_residual,
        "collision_gap": nad.collision_gap,
        "foc_residual": nad.foc_residual,
        "mass_residual": nad.mass_residual,
        "shooting_iterations": nad.shooting_iterations,
        "lp_comparison": report,
        "oracle": oracle,
    });
    write(&a.out, "nad_summary.json", &to_json(&summary)?)?;
    Ok(if report.agrees() { Status::Clean } else { Status::Witness })
}

/// A grid cell whose dual slack is negative beyond the contact tolerance.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SlackViolation {
    pub y: f64,
    pub x: f64,
    pub slack: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SlackScan {
    pub seed: u64,
    pub sampled: usize,
    pub min_slack: f64,
    pub violations: usize,
    pub first_violation: Option<SlackViolation>,
}

/// Samples grid cells with a seeded generator and checks V + q·u ≤ p at each.
pub fn slack_scan(p: &Problem, s: &Solution, seed: u64, cells: usize) -> SlackScan {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (m, n) = (p.n_actions(), p.n_states());
    let mut scan = SlackScan { seed, sampled: 0, min_slack: f64::INFINITY, violations: 0, first_violation: None };
    for _ in 0..cells {
        let (j, i) = (rng.gen_range(0..m), rng.gen_range(0..n));
        if p.is_forbidden(p.action(j), p.state(i)) || p.prior()[i] == 0.0 {
            continue;
        }
        scan.sampled += 1;
        let slack = s.prices.slack(p, j, i);
        scan.min_slack = scan.min_slack.min(slack);
        if slack < -s.contact_tol {
            scan.violations += 1;
            scan.first_violation.get_or_insert(SlackViolation { y: p.action(j), x: p.state(i), slack });
        }
    }
    scan
}

fn run_certify(a: &RunArgs) -> Result<Status> {
    let (l, s) = solved(a)?;
    let p = &l.problem;
    let cs = s.complementary_slackness(p);
    let scan = slack_scan(p, &s, a.seed, SCAN_CELLS);
    let gap_tol = 1e-8 * (1.0 + s.objective.abs());
    let certified = cs.duality_gap <= gap_tol
        && cs.support_outside_contact == 0
        && cs.max_q_residual <= s.contact_tol
        && cs.feasibility_residual >= -s.contact_tol
        && scan.violations == 0;
    let doc = json!({
        "problem": p.name(),
        "certified": certified,
        "duality_gap_tol": gap_tol,
        "contact_tol": s.contact_tol,
        "complementary_slackness": cs,
        "slack_scan": scan,
    });
    write(&a.out, "certificate.json", &to_json(&doc)?)?;
    Ok(if certified { Status::Clean } else { Status::Witness })
}
