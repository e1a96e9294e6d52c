//! Command-line front end.
//!
//! Exit codes: 0 when a verdict was computed (whatever it is), 1 for usage
//! and parse errors, 2 for numerical failures.

use std::path::PathBuf;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::certificates::{
    check_candidate, critical_cone, first_order_certificate, sample_critical_directions, second_order_certificate,
    CriticalConeSummary, Verdict, DEFAULT_DIRECTION_COUNT,
};
use crate::cone::PolyhedralCone;
use crate::deriv::{dini_lower, hadamard_lower, hadamard_second_lower, scalarized_gap, LimitSchedule};
use crate::error::Error;
use crate::oracle::{weak_global_scan, weak_local_min_oracle, ScanGrid, ScanMode};
use crate::parser::{self, parse_cone_literal};
use crate::problem::VectorProblem;
use crate::report::{
    CertificateReport, CertificateSection, DerivativeSection, IsolatedSection, Meta, OracleSection, PolarSection,
    ProblemSummary, SufficiencySection,
};
use crate::sufficiency::{
    first_order_global_verdict, isolated_first_order_check, isolated_second_order_check, second_order_global_verdict,
    IsolationOptions, SamplingBudget, DEFAULT_HALF_WIDTH,
};

#[derive(Debug, Parser)]
#[command(
    name = "vopt",
    version,
    about = "Fritz John certificates and sufficiency checks for cone-constrained vector problems"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// First-order Fritz John certificate at a point.
    Check(CheckArgs),
    /// First- and second-order certificates with sampled critical directions.
    Check2(Check2Args),
    /// Global sufficiency verdicts (generalized convexity falsifiers).
    Sufficiency(SufficiencyArgs),
    /// Isolated (strict) local minimizer checks of order 1 and 2.
    Isolated(IsolatedArgs),
    /// Brute-force search for a dominating point.
    Scan(ScanArgs),
    /// Directional derivative estimates and the scalarized gap.
    Deriv(DerivArgs),
    /// Polar of a cone given as a literal or taken from a problem file.
    Polar(PolarArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Text,
}

#[derive(Debug, Args)]
struct Output {
    /// Report format.
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Omit wall-clock timing so that reports are byte-identical across runs.
    #[arg(long)]
    no_meta: bool,
}

#[derive(Debug, Args)]
struct Common {
    /// Problem file (.vopt).
    file: PathBuf,
    /// Candidate point as comma-separated decimals.
    #[arg(long, allow_hyphen_values = true)]
    point: String,
    /// Seed for every sampled quantity.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Override the membership tolerance.
    #[arg(long)]
    tol_membership: Option<f64>,
    /// Override the strict-inequality tolerance.
    #[arg(long)]
    tol_strict: Option<f64>,
    /// Override the stationarity and slackness tolerance.
    #[arg(long)]
    tol_stationarity: Option<f64>,
    /// Override the ray-activity tolerance.
    #[arg(long)]
    tol_activity: Option<f64>,
    /// Override the strict-positivity margin (δ).
    #[arg(long)]
    tol_margin: Option<f64>,
    #[command(flatten)]
    output: Output,
}

#[derive(Debug, Args)]
struct CheckArgs {
    #[command(flatten)]
    common: Common,
}

#[derive(Debug, Args)]
struct Check2Args {
    #[command(flatten)]
    common: Common,
    /// Random critical directions added to the extreme rays.
    #[arg(long, default_value_t = DEFAULT_DIRECTION_COUNT)]
    directions: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum OrderSel {
    #[value(name = "1")]
    First,
    #[value(name = "2")]
    Second,
    Both,
}

impl OrderSel {
    fn first(self) -> bool {
        self != OrderSel::Second
    }
    fn second(self) -> bool {
        self != OrderSel::First
    }
}

#[derive(Debug, Args)]
struct Multipliers {
    /// λ as comma-separated decimals (default: from the certificate search).
    #[arg(long, allow_hyphen_values = true, requires = "mu")]
    lambda: Option<String>,
    /// μ as comma-separated decimals.
    #[arg(long, allow_hyphen_values = true, requires = "lambda")]
    mu: Option<String>,
}

#[derive(Debug, Args)]
struct SufficiencyArgs {
    #[command(flatten)]
    common: Common,
    #[command(flatten)]
    multipliers: Multipliers,
    /// Which theorem to check.
    #[arg(long, value_enum, default_value_t = OrderSel::Both)]
    order: OrderSel,
    /// Number of sampled pairs.
    #[arg(long, default_value_t = 10_000)]
    pairs: usize,
    /// Sampling box as `lo:hi` (all axes) or `lo:hi,lo:hi,...`.
    #[arg(long = "box", allow_hyphen_values = true)]
    bounds: Option<String>,
}

#[derive(Debug, Args)]
struct IsolatedArgs {
    #[command(flatten)]
    common: Common,
    #[command(flatten)]
    multipliers: Multipliers,
    #[arg(long, value_enum, default_value_t = OrderSel::Both)]
    order: OrderSel,
    /// Neighborhood radius for the growth constant ε.
    #[arg(long, default_value_t = 1.0)]
    radius: f64,
    /// Neighborhood samples.
    #[arg(long, default_value_t = 10_000)]
    samples: usize,
    /// Random unit directions for the first-order check.
    #[arg(long, default_value_t = 64)]
    directions: usize,
}

#[derive(Debug, Args)]
struct ScanArgs {
    #[command(flatten)]
    common: Common,
    /// Half-width of the cube around the point.
    #[arg(long, default_value_t = 0.5)]
    radius: f64,
    /// Grid points per axis.
    #[arg(long, default_value_t = 41)]
    points_per_axis: usize,
    /// Sample this many random points instead of a grid.
    #[arg(long)]
    random: Option<usize>,
    /// Scan a whole box instead of a neighborhood.
    #[arg(long)]
    global: bool,
    /// Box for `--global`, as `lo:hi` or `lo:hi,lo:hi,...`.
    #[arg(long = "box", allow_hyphen_values = true)]
    bounds: Option<String>,
    /// Points for `--global`.
    #[arg(long, default_value_t = 100_000)]
    count: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum DerivKind {
    Dini,
    Hadamard,
    Hadamard2,
    Gap,
}

#[derive(Debug, Args)]
struct DerivArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long, value_enum, default_value_t = DerivKind::Dini)]
    kind: DerivKind,
    /// Component such as `f1` or `g2` (1-based).
    #[arg(long, default_value = "f1")]
    function: String,
    /// Direction u as comma-separated decimals.
    #[arg(long, allow_hyphen_values = true)]
    direction: Option<String>,
    /// Linear functional for `hadamard2` (default zero).
    #[arg(long, allow_hyphen_values = true)]
    base: Option<String>,
    /// Second point x for `gap`.
    #[arg(long, allow_hyphen_values = true)]
    at: Option<String>,
    #[arg(long, default_value_t = 1e-2)]
    t0: f64,
    #[arg(long, default_value_t = 0.5)]
    rho: f64,
    #[arg(long, default_value_t = 20)]
    depth: usize,
    /// Trailing grid levels that are sampled.
    #[arg(long, default_value_t = 2)]
    window: usize,
    /// Perturbed directions per level.
    #[arg(long, default_value_t = 32)]
    perturbations: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Which {
    #[value(name = "C")]
    C,
    #[value(name = "K")]
    K,
}

#[derive(Debug, Args)]
struct PolarArgs {
    /// Problem file whose cone is used.
    #[arg(required_unless_present = "cone", conflicts_with = "cone")]
    file: Option<PathBuf>,
    /// Cone literal, e.g. `generators [[1, 0], [1, 1]]` or `orthant(3)`.
    #[arg(long)]
    cone: Option<String>,
    /// Which cone of the problem.
    #[arg(long, value_enum, default_value_t = Which::C)]
    which: Which,
    #[command(flatten)]
    output: Output,
}

/// Exit code with the text destined for standard output and standard error.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Outcome {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

enum Failure {
    Usage(String),
    Numerical(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::NonSmooth(_)
            | Error::NonFinite(_)
            | Error::IterationLimit(_)
            | Error::LinearProgram(_)
            | Error::DirectionOutsideCriticalCone { .. } => Failure::Numerical(e.to_string()),
            _ => Failure::Usage(e.to_string()),
        }
    }
}

type Step<T> = std::result::Result<T, Failure>;

pub fn run<I, T>(args: I) -> Outcome
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            let text = e.render().to_string();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => Outcome {
                    code: 0,
                    stdout: text,
                    stderr: String::new(),
                },
                _ => Outcome {
                    code: 1,
                    stdout: String::new(),
                    stderr: text,
                },
            };
        }
    };
    let start = Instant::now();
    let (output, result) = match &cli.command {
        Command::Check(a) => (&a.common.output, check(a)),
        Command::Check2(a) => (&a.common.output, check2(a)),
        Command::Sufficiency(a) => (&a.common.output, sufficiency(a)),
        Command::Isolated(a) => (&a.common.output, isolated(a)),
        Command::Scan(a) => (&a.common.output, scan(a)),
        Command::Deriv(a) => (&a.common.output, deriv(a)),
        Command::Polar(a) => (&a.output, polar(a)),
    };
    match result {
        Ok(mut report) => {
            if !output.no_meta {
                report.meta = Some(Meta {
                    wall_time_ms: start.elapsed().as_secs_f64() * 1e3,
                });
            }
            if !report.all_finite() {
                return Outcome {
                    code: 2,
                    stdout: String::new(),
                    stderr: "error: report contains non-finite numbers\n".into(),
                };
            }
            let stdout = match output.format {
                Format::Json => report.to_json() + "\n",
                Format::Text => report.to_text(),
            };
            Outcome {
                code: 0,
                stdout,
                stderr: String::new(),
            }
        }
        Err(Failure::Usage(m)) => Outcome {
            code: 1,
            stdout: String::new(),
            stderr: format!("error: {m}\n"),
        },
        Err(Failure::Numerical(m)) => Outcome {
            code: 2,
            stdout: String::new(),
            stderr: format!("numerical failure: {m}\n"),
        },
    }
}

fn parse_vector(text: &str, what: &str) -> Step<Vec<f64>> {
    let parts: Vec<&str> = text.split(',').map(str::trim).collect();
    let mut out = Vec::with_capacity(parts.len());
    for p in parts {
        match p.parse::<f64>() {
            Ok(v) if v.is_finite() => out.push(v),
            _ => return Err(Failure::Usage(format!("{what}: `{p}` is not a finite decimal number"))),
        }
    }
    Ok(out)
}

fn parse_box(text: &str, dim: usize) -> Step<Vec<(f64, f64)>> {
    let mut out = Vec::new();
    for part in text.split(',') {
        let (lo, hi) = part
            .split_once(':')
            .ok_or_else(|| Failure::Usage(format!("box entry `{part}` is not of the form lo:hi")))?;
        let lo = parse_vector(lo, "box")?[0];
        let hi = parse_vector(hi, "box")?[0];
        if !(lo < hi) {
            return Err(Failure::Usage(format!("box entry `{part}` needs lo < hi")));
        }
        out.push((lo, hi));
    }
    match out.len() {
        1 => Ok(vec![out[0]; dim]),
        n if n == dim => Ok(out),
        n => Err(Failure::Usage(format!(
            "box has {n} entries, problem has {dim} variables"
        ))),
    }
}

struct Loaded {
    problem: VectorProblem,
    point: Vec<f64>,
    report: CertificateReport,
}

fn load(common: &Common, command: &str) -> Step<Loaded> {
    let text =
        std::fs::read_to_string(&common.file).map_err(|e| Failure::Usage(format!("{}: {e}", common.file.display())))?;
    let mut problem = parser::parse(&text).map_err(|e| Failure::Usage(format!("{}: {e}", common.file.display())))?;
    let mut tol = *problem.tolerances();
    for (name, v) in [
        ("membership", common.tol_membership),
        ("strict", common.tol_strict),
        ("stationarity", common.tol_stationarity),
        ("activity", common.tol_activity),
        ("margin", common.tol_margin),
    ] {
        if let Some(v) = v {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(Failure::Usage(format!("--tol-{name} must be finite and nonnegative")));
            }
            tol.set(name, v);
        }
    }
    problem.set_tolerances(tol);
    let point = parse_vector(&common.point, "--point")?;
    problem.check_point(&point)?;
    let mut report = CertificateReport::new(command);
    report.problem = Some(ProblemSummary::of(&problem));
    report.point = Some(point.clone());
    report.tolerances = Some(tol);
    report.seed = Some(common.seed);
    if let Some(b) = problem.domain_box() {
        if point.iter().zip(b).any(|(v, (lo, hi))| v == lo || v == hi) {
            report
                .warnings
                .push("point lies on the boundary of the domain box".into());
        }
    }
    let feasible = problem.is_feasible(&point)?;
    report.feasible = Some(feasible);
    if !feasible {
        report.summary = Some("candidate point is infeasible".into());
    }
    Ok(Loaded { problem, point, report })
}

fn check(a: &CheckArgs) -> Step<CertificateReport> {
    let Loaded {
        problem,
        point,
        mut report,
    } = load(&a.common, "check")?;
    if report.feasible == Some(false) {
        return Ok(report);
    }
    let pair = first_order_certificate(&problem, &point)?;
    let cone = critical_cone(&problem, &point)?;
    let lineality = cone.lineality();
    let pointed = cone.pointed_rays();
    report.verdict = Some(if pair.is_some() {
        Verdict::FjConsistent { sampled: false }
    } else {
        Verdict::RefutedFirstOrder
    });
    report.summary = Some(
        if pair.is_some() {
            "first-order Fritz John conditions hold"
        } else {
            "not a weak local minimizer (first order)"
        }
        .into(),
    );
    report.totally_degenerate = Some(check_candidate_degenerate(&problem, &point)?);
    report.first_order = Some(CertificateSection::from(pair));
    report.critical_cone = Some(CriticalConeSummary {
        trivial: lineality.is_empty() && pointed.is_empty(),
        lineality_dim: lineality.len(),
        pointed_rays: pointed,
        rows: cone.rows,
    });
    Ok(report)
}

fn check_candidate_degenerate(problem: &VectorProblem, point: &[f64]) -> Step<bool> {
    let tol = problem.tolerances().stationarity;
    let jf = problem.objective().jacobian(point)?;
    let jg = problem.constraint().jacobian(point)?;
    Ok(jf.iter().chain(&jg).flatten().all(|v| v.abs() <= tol))
}

fn check2(a: &Check2Args) -> Step<CertificateReport> {
    let Loaded {
        problem,
        point,
        mut report,
    } = load(&a.common, "check2")?;
    if report.feasible == Some(false) {
        return Ok(report);
    }
    let c = check_candidate(&problem, &point, a.directions, a.common.seed)?;
    report.summary = Some(
        match c.verdict {
            Verdict::FjConsistent { sampled: true } => "Fritz John conditions hold at both orders (sampled directions)",
            Verdict::FjConsistent { sampled: false } => "Fritz John conditions hold at both orders",
            Verdict::RefutedFirstOrder => "not a weak local minimizer (first order)",
            Verdict::RefutedSecondOrder => "not a weak local minimizer (second order, modulo direction sampling)",
        }
        .into(),
    );
    report.totally_degenerate = Some(c.totally_degenerate);
    report.first_order = Some(CertificateSection::from(c.first_order));
    if c.critical_cone.is_some() {
        report.critical_cone = c.critical_cone;
        report.directions = Some(c.directions);
        report.second_order = Some(CertificateSection::from(c.second_order));
    }
    report.verdict = Some(c.verdict);
    Ok(report)
}

fn explicit_multipliers(m: &Multipliers, problem: &VectorProblem) -> Step<Option<(Vec<f64>, Vec<f64>)>> {
    let (Some(l), Some(u)) = (&m.lambda, &m.mu) else {
        return Ok(None);
    };
    let lambda = parse_vector(l, "--lambda")?;
    let mu = parse_vector(u, "--mu")?;
    if lambda.len() != problem.num_objectives() || mu.len() != problem.num_constraints() {
        return Err(Failure::Usage(format!(
            "multipliers need {} and {} entries",
            problem.num_objectives(),
            problem.num_constraints()
        )));
    }
    Ok(Some((lambda, mu)))
}

fn sufficiency(a: &SufficiencyArgs) -> Step<CertificateReport> {
    let Loaded {
        problem,
        point,
        mut report,
    } = load(&a.common, "sufficiency")?;
    if report.feasible == Some(false) {
        return Ok(report);
    }
    let mut budget = SamplingBudget::for_problem(&problem, Some(&point));
    if let Some(b) = &a.bounds {
        let anchors_box = parse_box(b, problem.dim())?;
        budget = SamplingBudget {
            tolerances: budget.tolerances,
            ..SamplingBudget::new(anchors_box)
        };
        if !budget.anchors.contains(&point) {
            budget.anchors.push(point.clone());
        }
    }
    budget.pair_count = a.pairs;
    budget.seed = a.common.seed;
    let explicit = explicit_multipliers(&a.multipliers, &problem)?;
    let mut section = SufficiencySection {
        first_order: None,
        second_order: None,
    };
    let mut missing = Vec::new();
    if a.order.first() {
        let pair = match &explicit {
            Some(p) => Some(p.clone()),
            None => first_order_certificate(&problem, &point)?.map(|p| (p.lambda, p.mu)),
        };
        match pair {
            Some((l, m)) => section.first_order = Some(first_order_global_verdict(&problem, &point, &l, &m, &budget)?),
            None => missing.push("first"),
        }
        if explicit.is_none() {
            report.first_order = Some(CertificateSection::from(first_order_certificate(&problem, &point)?));
        }
    }
    if a.order.second() {
        let pair = match &explicit {
            Some(p) => Some(p.clone()),
            None => {
                let cone = critical_cone(&problem, &point)?;
                let dirs = sample_critical_directions(&cone, DEFAULT_DIRECTION_COUNT, a.common.seed);
                let found = second_order_certificate(&problem, &point, &dirs)?;
                report.second_order = Some(CertificateSection::from(found.clone()));
                found.map(|p| (p.lambda, p.mu))
            }
        };
        match pair {
            Some((l, m)) => {
                section.second_order = Some(second_order_global_verdict(&problem, &point, &l, &m, &budget)?)
            }
            None => missing.push("second"),
        }
    }
    let mut parts: Vec<String> = Vec::new();
    for (name, v) in [
        ("first-order", &section.first_order),
        ("second-order", &section.second_order),
    ] {
        if let Some(v) = v {
            parts.push(format!("{name}: {}", v.label));
        }
    }
    for m in missing {
        parts.push(format!("{m}-order: no Fritz John pair at the point"));
    }
    report.summary = Some(parts.join("; "));
    report.sufficiency = Some(section);
    Ok(report)
}

fn isolated(a: &IsolatedArgs) -> Step<CertificateReport> {
    let Loaded {
        problem,
        point,
        mut report,
    } = load(&a.common, "isolated")?;
    if report.feasible == Some(false) {
        return Ok(report);
    }
    if a.samples == 0 {
        return Err(Failure::Usage("--samples must be positive".into()));
    }
    let cone = critical_cone(&problem, &point);
    let (lambda, mu) = match explicit_multipliers(&a.multipliers, &problem)? {
        Some(p) => p,
        None => {
            let found = if a.order.second() && problem.is_smooth() {
                let dirs = sample_critical_directions(&cone.clone()?, DEFAULT_DIRECTION_COUNT, a.common.seed);
                second_order_certificate(&problem, &point, &dirs)?
            } else {
                first_order_certificate(&problem, &point)?
            };
            match found {
                Some(p) => (p.lambda, p.mu),
                None => {
                    report.summary = Some("no Fritz John pair at the point; pass --lambda and --mu".into());
                    return Ok(report);
                }
            }
        }
    };
    let mut budget = SamplingBudget::for_problem(&problem, Some(&point));
    budget.pair_count = a.samples;
    budget.seed = a.common.seed;
    let opts = IsolationOptions {
        delta: problem.tolerances().margin,
        radius: a.radius,
        direction_count: a.directions,
    };
    let mut section = IsolatedSection {
        lambda: lambda.clone(),
        mu: mu.clone(),
        first_order: None,
        second_order: None,
    };
    if a.order.first() {
        let sched = LimitSchedule {
            seed: a.common.seed,
            ..Default::default()
        };
        section.first_order = Some(isolated_first_order_check(
            &problem, &point, &lambda, &mu, &budget, &sched, &opts,
        )?);
    }
    if a.order.second() {
        let dirs = sample_critical_directions(&cone?, DEFAULT_DIRECTION_COUNT, a.common.seed);
        section.second_order = Some(isolated_second_order_check(
            &problem, &point, &lambda, &mu, &dirs, &budget, &opts,
        )?);
        report.directions = Some(dirs);
    }
    let labels: Vec<String> = [&section.first_order, &section.second_order]
        .into_iter()
        .flatten()
        .map(|v| format!("order {}: {}", v.order, v.label))
        .collect();
    report.summary = Some(labels.join("; "));
    report.isolated = Some(section);
    Ok(report)
}

fn scan(a: &ScanArgs) -> Step<CertificateReport> {
    let Loaded {
        problem,
        point,
        mut report,
    } = load(&a.common, "scan")?;
    if report.feasible == Some(false) {
        return Ok(report);
    }
    let section = if a.global {
        let bounds = match &a.bounds {
            Some(b) => parse_box(b, problem.dim())?,
            None => problem
                .domain_box()
                .map(<[_]>::to_vec)
                .unwrap_or_else(|| vec![(-DEFAULT_HALF_WIDTH, DEFAULT_HALF_WIDTH); problem.dim()]),
        };
        let result = weak_global_scan(&problem, &point, &bounds, a.count, a.common.seed)?;
        OracleSection {
            kind: "global".into(),
            bounds,
            result,
        }
    } else {
        let mut grid = ScanGrid::new(a.radius);
        grid.mode = match a.random {
            Some(count) => ScanMode::Random {
                count,
                seed: a.common.seed,
            },
            None => ScanMode::Grid {
                points_per_axis: a.points_per_axis,
            },
        };
        let result = weak_local_min_oracle(&problem, &point, &grid)?;
        OracleSection {
            kind: "local".into(),
            bounds: point.iter().map(|c| (c - a.radius, c + a.radius)).collect(),
            result,
        }
    };
    report.summary = Some(
        if section.result.minimal {
            "no dominating point found"
        } else {
            "dominated: not a weak minimizer"
        }
        .into(),
    );
    report.oracle = Some(section);
    Ok(report)
}

fn deriv(a: &DerivArgs) -> Step<CertificateReport> {
    let Loaded {
        problem,
        point,
        mut report,
    } = load(&a.common, "deriv")?;
    let s = problem.dim();
    if a.kind == DerivKind::Gap {
        if report.feasible == Some(false) {
            return Ok(report);
        }
        let at =
            a.at.as_deref()
                .ok_or_else(|| Failure::Usage("--kind gap needs --at".into()))?;
        let x = parse_vector(at, "--at")?;
        problem.check_point(&x)?;
        let value = scalarized_gap(&problem, &point, &x)?;
        report.summary = Some(format!("F = {value}"));
        report.derivative = Some(DerivativeSection {
            kind: "gap".into(),
            function: "gap".into(),
            direction: None,
            at: Some(x),
            value,
            estimate: None,
            schedule: None,
        });
        return Ok(report);
    }
    let dir = a
        .direction
        .as_deref()
        .ok_or_else(|| Failure::Usage("--direction is required".into()))?;
    let u = parse_vector(dir, "--direction")?;
    if u.len() != s {
        return Err(Failure::Usage(format!(
            "--direction has {} entries, expected {s}",
            u.len()
        )));
    }
    let expr = component(&problem, &a.function)?;
    let h = |y: &[f64]| expr.eval(y);
    let sched = LimitSchedule {
        t0: a.t0,
        rho: a.rho,
        depth: a.depth,
        window: a.window,
        perturbation_count: a.perturbations,
        radius_scale: 1.0,
        seed: a.common.seed,
    };
    sched.validate()?;
    let est = match a.kind {
        DerivKind::Dini => dini_lower(h, &point, &u, &sched)?,
        DerivKind::Hadamard => hadamard_lower(h, &point, &u, &sched)?,
        DerivKind::Hadamard2 => {
            let base = match &a.base {
                Some(b) => parse_vector(b, "--base")?,
                None => vec![0.0; s],
            };
            if base.len() != s {
                return Err(Failure::Usage(format!(
                    "--base has {} entries, expected {s}",
                    base.len()
                )));
            }
            hadamard_second_lower(h, &point, &base, &u, &sched)?
        }
        DerivKind::Gap => unreachable!("handled above"),
    };
    let kind = match a.kind {
        DerivKind::Dini => "dini",
        DerivKind::Hadamard => "hadamard",
        _ => "hadamard2",
    };
    report.summary = Some(format!("{kind} estimate {}", est.value));
    report.derivative = Some(DerivativeSection {
        kind: kind.into(),
        function: a.function.clone(),
        direction: Some(u),
        at: None,
        value: est.value,
        estimate: Some(est),
        schedule: Some(sched),
    });
    Ok(report)
}

fn component<'a>(problem: &'a VectorProblem, name: &str) -> Step<&'a crate::expr::Expr> {
    let bad = || Failure::Usage(format!("--function `{name}` must look like f1 or g2"));
    let (map, rest) = match name.split_at_checked(1) {
        Some(("f", r)) => (problem.objective(), r),
        Some(("g", r)) => (problem.constraint(), r),
        _ => return Err(bad()),
    };
    let k: usize = rest.parse().map_err(|_| bad())?;
    if k == 0 || k > map.len() {
        return Err(Failure::Usage(format!(
            "--function `{name}` is out of range (1..={})",
            map.len()
        )));
    }
    Ok(&map.exprs()[k - 1])
}

fn polar(a: &PolarArgs) -> Step<CertificateReport> {
    let mut report = CertificateReport::new("polar");
    let cone: PolyhedralCone = match (&a.cone, &a.file) {
        (Some(text), _) => {
            let lit = parse_cone_literal(text)?;
            lit.build(lit.dim())?
        }
        (None, Some(path)) => {
            let text = std::fs::read_to_string(path).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?;
            let problem = parser::parse(&text).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?;
            report.problem = Some(ProblemSummary::of(&problem));
            match a.which {
                Which::C => problem.cone_c().clone(),
                Which::K => problem.cone_k().clone(),
            }
        }
        (None, None) => return Err(Failure::Usage("give a problem file or --cone".into())),
    };
    let p = cone.polar()?;
    report.summary = Some(format!("polar has {} extreme rays", p.generators().len()));
    report.polar = Some(PolarSection {
        generators: cone.generators().to_vec(),
        halfspace_normals: cone.halfspace_normals().to_vec(),
        polar_generators: p.generators().to_vec(),
        polar_halfspace_normals: p.halfspace_normals().to_vec(),
    });
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::testutil::{E1, SADDLE};

    fn write(name: &str, text: &str) -> String {
        let dir = std::env::temp_dir().join(format!("vopt-cli-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join(name);
        std::fs::write(&path, text).unwrap();
        path.to_string_lossy().into_owned()
    }

    fn json(o: &Outcome) -> serde_json::Value {
        serde_json::from_str(&o.stdout).unwrap_or_else(|e| panic!("{e}: {o:?}"))
    }

    #[test]
    fn check_reports_the_pair() {
        let f = write("e1.vopt", E1);
        let o = run(["vopt", "check", &f, "--point", "0", "--no-meta"]);
        assert_eq!(o.code, 0, "{o:?}");
        let v = json(&o);
        assert_eq!(v["schema"], 1);
        assert_eq!(v["first_order"]["pair"]["lambda"][0], 0.5);
        assert_eq!(v["first_order"]["pair"]["mu"][0], 0.5);
        assert!(v["meta"].is_null());
    }

    #[test]
    fn usage_errors_exit_one() {
        let f = write("e1b.vopt", E1);
        assert_eq!(run(["vopt", "check", &f, "--point", "notanumber"]).code, 1);
        assert_eq!(run(["vopt", "check", &f, "--point", "0", "--bogus"]).code, 1);
        assert_eq!(run(["vopt", "frobnicate"]).code, 1);
        assert_eq!(run(["vopt", "check", "/nonexistent.vopt", "--point", "0"]).code, 1);
        assert_eq!(run(["vopt", "check", &f, "--point", "0,0"]).code, 1);
        assert_eq!(run(["vopt", "--help"]).code, 0);
    }

    #[test]
    fn scan_finds_the_saddle_dominator() {
        let f = write("saddle.vopt", SADDLE);
        let o = run(["vopt", "scan", &f, "--point", "0", "--radius", "0.6", "--no-meta"]);
        assert_eq!(o.code, 0);
        let v = json(&o);
        assert_eq!(v["oracle"]["result"]["minimal"], false);
        assert!(v["oracle"]["result"]["dominator"].is_array());
    }

    #[test]
    fn numerical_failures_exit_two() {
        let f = write(
            "abs.vopt",
            "vars x; objective [abs(x)]; constraint [-1]; coneC orthant(1); coneK orthant(1)",
        );
        assert_eq!(run(["vopt", "check", &f, "--point", "0"]).code, 2);
    }

    #[test]
    fn runs_are_deterministic() {
        let f = write("e1c.vopt", E1);
        let args = [
            "vopt",
            "sufficiency",
            &f,
            "--point",
            "0",
            "--pairs",
            "500",
            "--seed",
            "3",
            "--no-meta",
        ];
        assert_eq!(run(args), run(args));
    }

    #[test]
    fn text_format_and_polar() {
        let o = run([
            "vopt",
            "polar",
            "--cone",
            "generators [[1, 0], [1, 1]]",
            "--format",
            "text",
            "--no-meta",
        ]);
        assert_eq!(o.code, 0, "{o:?}");
        assert!(o.stdout.contains("polar.polar_generators"));
        let o = run(["vopt", "polar", "--cone", "generators [[1, 0], [-1, 0]]"]);
        assert_eq!(o.code, 1);
    }
}
