//! Sampling falsifiers for generalized convexity with respect to a cone, and
//! verdicts for the global and isolated-minimizer sufficiency theorems.
//!
//! A witness is a proof that a hypothesis fails. When no witness is found the
//! verdict is only as strong as the sample, so every positive verdict is
//! labeled "(modulo sampling)".

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::certificates::CriticalCone;
use crate::cone::PolyhedralCone;
use crate::deriv::{dini_lower, LimitSchedule};
use crate::error::{Error, Result};
use crate::linalg::{dot, mat_vec, norm, norm_inf, normalized, quad_form, scale, sub, vec_mat};
use crate::problem::{ExprMap, Tolerances, VectorProblem};

/// Half-width of the sampling box used when a problem declares none.
pub const DEFAULT_HALF_WIDTH: f64 = 2.0;

pub const CERTIFIED: &str = "certified (modulo sampling)";
pub const VIOLATED: &str = "hypotheses violated";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SamplingBudget {
    pub pair_count: usize,
    pub domain_box: Vec<(f64, f64)>,
    pub seed: u64,
    /// Points used as `x̄` in every other pair.
    pub anchors: Vec<Vec<f64>>,
    /// Pairs closer than this are discarded.
    pub min_separation: f64,
    pub tolerances: Tolerances,
}

impl SamplingBudget {
    pub fn new(domain_box: Vec<(f64, f64)>) -> Self {
        let center = domain_box.iter().map(|(lo, hi)| 0.5 * (lo + hi)).collect();
        Self {
            pair_count: 10_000,
            domain_box,
            seed: 0,
            anchors: vec![center],
            min_separation: 1e-6,
            tolerances: Tolerances::default(),
        }
    }

    /// The problem's box (or `[−2, 2]ˢ`), anchored at its center and at `x̄`.
    pub fn for_problem(problem: &VectorProblem, x_bar: Option<&[f64]>) -> Self {
        let bx = problem
            .domain_box()
            .map(<[_]>::to_vec)
            .unwrap_or_else(|| vec![(-DEFAULT_HALF_WIDTH, DEFAULT_HALF_WIDTH); problem.dim()]);
        let mut b = Self::new(bx);
        if let Some(x) = x_bar {
            if !b.anchors.contains(&x.to_vec()) {
                b.anchors.push(x.to_vec());
            }
        }
        b.tolerances = *problem.tolerances();
        b
    }

    pub fn validate(&self) -> Result<()> {
        if self.pair_count == 0 {
            return Err(Error::InvalidArgument("sampling budget needs at least one pair".into()));
        }
        if self.domain_box.is_empty()
            || self
                .domain_box
                .iter()
                .any(|(lo, hi)| !(lo < hi) || !lo.is_finite() || !hi.is_finite())
        {
            return Err(Error::InvalidArgument(
                "sampling box must be bounded with lo < hi".into(),
            ));
        }
        if self.anchors.iter().any(|a| a.len() != self.domain_box.len()) {
            return Err(Error::DimensionMismatch {
                expected: self.domain_box.len(),
                actual: self
                    .anchors
                    .iter()
                    .map(Vec::len)
                    .find(|&l| l != self.domain_box.len())
                    .unwrap_or(0),
                context: "sampling anchor",
            });
        }
        Ok(())
    }

    fn uniform(&self, rng: &mut ChaCha8Rng) -> Vec<f64> {
        self.domain_box
            .iter()
            .map(|(lo, hi)| lo + (hi - lo) * rng.gen::<f64>())
            .collect()
    }

    /// The deterministic pair sequence `(x̄, x)`. Every pair consumes the same
    /// number of draws, so a larger budget extends a smaller one.
    pub fn pairs(&self) -> impl Iterator<Item = (Vec<f64>, Vec<f64>)> + '_ {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        (0..self.pair_count).map(move |k| {
            let xb = self.uniform(&mut rng);
            let x = self.uniform(&mut rng);
            let xb = if k % 2 == 0 && !self.anchors.is_empty() {
                self.anchors[(k / 2) % self.anchors.len()].clone()
            } else {
                xb
            };
            (xb, x)
        })
    }

    /// Independent stream of single points in the box.
    pub fn points(&self, stream: u64) -> impl Iterator<Item = Vec<f64>> + '_ {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(stream);
        (0..self.pair_count).map(move |_| self.uniform(&mut rng))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Clause {
    /// `f(x) ∈ f(x̄) − int C` but `∇f(x̄)(x−x̄) ∉ −int C`.
    Pseudoconvex,
    /// `h(x) ≤ h(x̄)` but `∇h(x̄)(x−x̄) ≥ 0`.
    StrictPseudoconvex,
    /// `f(x) ∈ f(x̄) − int C` but `∇f(x̄)(x−x̄) ∉ −C`.
    SecondOrderFirst,
    /// Boundary first-order term but `(x−x̄)∇²f(x̄)(x−x̄) ∉ −int C`.
    SecondOrderBoundary,
    /// `h(x) ≤ h(x̄)` but `∇h(x̄)(x−x̄) > 0`.
    StrictSecondOrderFirst,
    /// Zero first-order term but `(x−x̄)∇²h(x̄)(x−x̄) ≥ 0`.
    StrictSecondOrderEquality,
    /// A point of the restriction set where the second-order form is negative.
    Soc2,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvexityWitness {
    pub x_bar: Vec<f64>,
    pub x: Vec<f64>,
    pub violated_clause: Clause,
    /// Measured premise: a cone margin or `h(x̄) − h(x)`.
    pub premise: f64,
    /// Measured conclusion that failed.
    pub conclusion: f64,
}

impl ConvexityWitness {
    /// Re-evaluate the clause at the stored pair. `f` is the vector map
    /// (with `cone`) or the scalar map the witness was produced for.
    pub fn reverify(&self, f: &ExprMap, cone: Option<&PolyhedralCone>, tol: &Tolerances) -> Result<bool> {
        let again = match (self.violated_clause, cone) {
            (Clause::Pseudoconvex, Some(c)) => pseudoconvex_pair(f, c, &self.x_bar, &self.x, tol)?,
            (Clause::SecondOrderFirst | Clause::SecondOrderBoundary, Some(c)) => {
                second_order_pair(f, c, &self.x_bar, &self.x, tol)?
            }
            (Clause::StrictPseudoconvex, None) => strict_pair(f, &self.x_bar, &self.x)?,
            (Clause::StrictSecondOrderFirst | Clause::StrictSecondOrderEquality, None) => {
                strict_second_order_pair(f, &self.x_bar, &self.x, tol)?
            }
            _ => {
                return Err(Error::InvalidArgument(
                    "witness clause does not match the supplied map".into(),
                ))
            }
        };
        Ok(again.as_ref() == Some(self))
    }
}

fn witness(clause: Clause, xb: &[f64], x: &[f64], premise: f64, conclusion: f64) -> Option<ConvexityWitness> {
    Some(ConvexityWitness {
        x_bar: xb.to_vec(),
        x: x.to_vec(),
        violated_clause: clause,
        premise,
        conclusion,
    })
}

fn scalar(h: &ExprMap) -> Result<()> {
    if h.len() != 1 {
        return Err(Error::DimensionMismatch {
            expected: 1,
            actual: h.len(),
            context: "scalar function",
        });
    }
    Ok(())
}

/// Margin of `f(x̄) − f(x)` in `C`; the premise holds when it exceeds `strict`.
fn domination_margin(f: &ExprMap, c: &PolyhedralCone, xb: &[f64], x: &[f64]) -> Result<f64> {
    let fb = f.values(xb)?;
    let fx = f.values(x)?;
    c.min_margin(&sub(&fb, &fx))
}

fn pseudoconvex_pair(
    f: &ExprMap,
    c: &PolyhedralCone,
    xb: &[f64],
    x: &[f64],
    tol: &Tolerances,
) -> Result<Option<ConvexityWitness>> {
    let premise = domination_margin(f, c, xb, x)?;
    if premise <= tol.strict {
        return Ok(None);
    }
    let lin = scale(&mat_vec(&f.jacobian(xb)?, &sub(x, xb)), -1.0);
    let conclusion = c.min_margin(&lin)?;
    Ok(if conclusion > 0.0 {
        None
    } else {
        witness(Clause::Pseudoconvex, xb, x, premise, conclusion)
    })
}

fn strict_pair(h: &ExprMap, xb: &[f64], x: &[f64]) -> Result<Option<ConvexityWitness>> {
    let premise = h.values(xb)?[0] - h.values(x)?[0];
    if premise < 0.0 {
        return Ok(None);
    }
    let conclusion = dot(&h.jacobian(xb)?[0], &sub(x, xb));
    Ok(if conclusion < 0.0 {
        None
    } else {
        witness(Clause::StrictPseudoconvex, xb, x, premise, conclusion)
    })
}

fn second_order_pair(
    f: &ExprMap,
    c: &PolyhedralCone,
    xb: &[f64],
    x: &[f64],
    tol: &Tolerances,
) -> Result<Option<ConvexityWitness>> {
    let premise = domination_margin(f, c, xb, x)?;
    if premise <= tol.strict {
        return Ok(None);
    }
    let d = sub(x, xb);
    let first = c.min_margin(&scale(&mat_vec(&f.jacobian(xb)?, &d), -1.0))?;
    if first < -tol.membership {
        return Ok(witness(Clause::SecondOrderFirst, xb, x, premise, first));
    }
    if first > tol.strict {
        return Ok(None);
    }
    let curv: Vec<f64> = f.hessians(xb)?.iter().map(|h| -quad_form(h, &d)).collect();
    let second = c.min_margin(&curv)?;
    Ok(if second > 0.0 {
        None
    } else {
        witness(Clause::SecondOrderBoundary, xb, x, premise, second)
    })
}

fn strict_second_order_pair(h: &ExprMap, xb: &[f64], x: &[f64], tol: &Tolerances) -> Result<Option<ConvexityWitness>> {
    let premise = h.values(xb)?[0] - h.values(x)?[0];
    if premise < 0.0 {
        return Ok(None);
    }
    let d = sub(x, xb);
    let first = dot(&h.jacobian(xb)?[0], &d);
    if first > tol.strict {
        return Ok(witness(Clause::StrictSecondOrderFirst, xb, x, premise, first));
    }
    if first < -tol.strict {
        return Ok(None);
    }
    let second = quad_form(&h.hessians(xb)?[0], &d);
    Ok(if second < 0.0 {
        None
    } else {
        witness(Clause::StrictSecondOrderEquality, xb, x, premise, second)
    })
}

/// Failures at individual samples (outside the natural domain, on a kink)
/// skip the sample instead of aborting the scan.
fn skippable(e: &Error) -> bool {
    matches!(
        e,
        Error::NonFinite(_) | Error::NonSmooth(_) | Error::DomainViolation { .. }
    )
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ScanCounts {
    pub checked: usize,
    pub skipped: usize,
}

fn scan<F>(budget: &SamplingBudget, counts: &mut ScanCounts, mut test: F) -> Result<Option<ConvexityWitness>>
where
    F: FnMut(&[f64], &[f64]) -> Result<Option<ConvexityWitness>>,
{
    budget.validate()?;
    for (xb, x) in budget.pairs() {
        if norm(&sub(&x, &xb)) < budget.min_separation {
            counts.skipped += 1;
            continue;
        }
        match test(&xb, &x) {
            Ok(Some(w)) => {
                counts.checked += 1;
                return Ok(Some(w));
            }
            Ok(None) => counts.checked += 1,
            Err(e) if skippable(&e) => counts.skipped += 1,
            Err(e) => return Err(e),
        }
    }
    Ok(None)
}

pub fn falsify_pseudoconvex(
    f: &ExprMap,
    c: &PolyhedralCone,
    budget: &SamplingBudget,
) -> Result<Option<ConvexityWitness>> {
    let tol = budget.tolerances;
    scan(budget, &mut ScanCounts::default(), |xb, x| {
        pseudoconvex_pair(f, c, xb, x, &tol)
    })
}

pub fn falsify_strict_pseudoconvex(h: &ExprMap, budget: &SamplingBudget) -> Result<Option<ConvexityWitness>> {
    scalar(h)?;
    scan(budget, &mut ScanCounts::default(), |xb, x| strict_pair(h, xb, x))
}

pub fn falsify_second_order_pseudoconvex(
    f: &ExprMap,
    c: &PolyhedralCone,
    budget: &SamplingBudget,
) -> Result<Option<ConvexityWitness>> {
    let tol = budget.tolerances;
    scan(budget, &mut ScanCounts::default(), |xb, x| {
        second_order_pair(f, c, xb, x, &tol)
    })
}

pub fn falsify_second_order_strict_pseudoconvex(
    h: &ExprMap,
    budget: &SamplingBudget,
) -> Result<Option<ConvexityWitness>> {
    scalar(h)?;
    let tol = budget.tolerances;
    scan(budget, &mut ScanCounts::default(), |xb, x| {
        strict_second_order_pair(h, xb, x, &tol)
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GlobalStatus {
    Certified,
    HypothesesViolated,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GlobalVerdict {
    pub status: GlobalStatus,
    pub label: String,
    /// Hypotheses that were sampled, in order.
    pub checks: Vec<String>,
    pub witness: Option<ConvexityWitness>,
    pub pairs_checked: usize,
    pub pairs_skipped: usize,
}

impl GlobalVerdict {
    fn new() -> Self {
        Self {
            status: GlobalStatus::Certified,
            label: CERTIFIED.into(),
            checks: Vec::new(),
            witness: None,
            pairs_checked: 0,
            pairs_skipped: 0,
        }
    }

    fn run<F>(&mut self, name: &str, budget: &SamplingBudget, test: F) -> Result<bool>
    where
        F: FnMut(&[f64], &[f64]) -> Result<Option<ConvexityWitness>>,
    {
        self.checks.push(name.into());
        let mut counts = ScanCounts::default();
        let found = scan(budget, &mut counts, test)?;
        self.pairs_checked += counts.checked;
        self.pairs_skipped += counts.skipped;
        if let Some(w) = found {
            self.status = GlobalStatus::HypothesesViolated;
            self.label = VIOLATED.into();
            self.witness = Some(w);
            return Ok(true);
        }
        Ok(false)
    }
}

fn in_polar(cone: &PolyhedralCone, v: &[f64], tol: f64) -> bool {
    v.len() == cone.ambient_dim() && cone.generators().iter().all(|g| dot(g, v) >= -tol)
}

fn l1(v: &[f64]) -> f64 {
    v.iter().map(|x| x.abs()).sum()
}

/// Check `λ ∈ C*`, `μ ∈ K*`, `μ·g(x̄) = 0` and, when `stationary`,
/// `λ∇f(x̄) + μ∇g(x̄) = 0`, all within the problem's tolerances.
fn validate_multipliers(
    problem: &VectorProblem,
    x_bar: &[f64],
    lambda: &[f64],
    mu: &[f64],
    require_lambda: bool,
    stationary: bool,
) -> Result<()> {
    let tol = problem.tolerances();
    problem.check_point(x_bar)?;
    if !problem.is_feasible(x_bar)? {
        return Err(Error::InfeasibleCandidate);
    }
    if !in_polar(problem.cone_c(), lambda, tol.membership) {
        return Err(Error::InvalidArgument("λ is not in the polar of C".into()));
    }
    if !in_polar(problem.cone_k(), mu, tol.membership) {
        return Err(Error::InvalidArgument("μ is not in the polar of K".into()));
    }
    let lambda_zero = l1(lambda) < 1e-12;
    if lambda_zero && (require_lambda || l1(mu) < 1e-12) {
        return Err(Error::InvalidArgument("multiplier is zero".into()));
    }
    let g = problem.constraint().values(x_bar)?;
    if dot(mu, &g).abs() > tol.stationarity {
        return Err(Error::InvalidArgument(format!(
            "μ·g(x̄) = {:e} is not zero",
            dot(mu, &g)
        )));
    }
    if stationary {
        let s = problem.dim();
        let jf = problem.objective().jacobian(x_bar)?;
        let jg = problem.constraint().jacobian(x_bar)?;
        let r: Vec<f64> = vec_mat(lambda, &jf, s)
            .iter()
            .zip(vec_mat(mu, &jg, s))
            .map(|(a, b)| a + b)
            .collect();
        if norm_inf(&r) > tol.stationarity {
            return Err(Error::InvalidArgument(format!(
                "stationarity residual {:e} exceeds tolerance",
                norm_inf(&r)
            )));
        }
    }
    Ok(())
}

/// Pseudoconvexity of `f` w.r.t. `C` and, when `μ ≠ 0`, strict
/// pseudoconvexity of `μ·g`, sampled over the budget's box.
pub fn first_order_global_verdict(
    problem: &VectorProblem,
    x_bar: &[f64],
    lambda: &[f64],
    mu: &[f64],
    budget: &SamplingBudget,
) -> Result<GlobalVerdict> {
    validate_multipliers(problem, x_bar, lambda, mu, false, true)?;
    let tol = budget.tolerances;
    let mut v = GlobalVerdict::new();
    let f = problem.objective();
    if v.run("pseudoconvex f", budget, |xb, x| {
        pseudoconvex_pair(f, problem.cone_c(), xb, x, &tol)
    })? {
        return Ok(v);
    }
    if l1(mu) > 0.0 {
        let h = problem.constraint().scalarize(mu)?;
        v.run("strictly pseudoconvex μ·g", budget, |xb, x| strict_pair(&h, xb, x))?;
    }
    Ok(v)
}

/// Second-order pseudoconvexity of `f`, second-order strict pseudoconvexity
/// of `μ·g` when `μ ≠ 0`, and the curvature inequality on sampled feasible
/// points of the restriction set.
pub fn second_order_global_verdict(
    problem: &VectorProblem,
    x_bar: &[f64],
    lambda: &[f64],
    mu: &[f64],
    budget: &SamplingBudget,
) -> Result<GlobalVerdict> {
    validate_multipliers(problem, x_bar, lambda, mu, false, true)?;
    let tol = budget.tolerances;
    let mut v = GlobalVerdict::new();
    let f = problem.objective();
    if v.run("second-order pseudoconvex f", budget, |xb, x| {
        second_order_pair(f, problem.cone_c(), xb, x, &tol)
    })? {
        return Ok(v);
    }
    if l1(mu) > 0.0 {
        let h = problem.constraint().scalarize(mu)?;
        if v.run("second-order strictly pseudoconvex μ·g", budget, |xb, x| {
            strict_second_order_pair(&h, xb, x, &tol)
        })? {
            return Ok(v);
        }
    }
    let jf = problem.objective().jacobian(x_bar)?;
    let jg = problem.constraint().jacobian(x_bar)?;
    let hf = problem.objective().hessians(x_bar)?;
    let hg = problem.constraint().hessians(x_bar)?;
    let boundary = |cone: &PolyhedralCone, w: &[f64]| -> Result<bool> {
        Ok(cone.contains_tol(w, tol.membership)? && !cone.interior_contains_tol(w, tol.strict)?)
    };
    let soc2 = |xb: &[f64], x: &[f64]| -> Result<Option<ConvexityWitness>> {
        if !problem.is_feasible(x)? {
            return Ok(None);
        }
        let premise = domination_margin(f, problem.cone_c(), xb, x)?;
        if premise <= tol.strict {
            return Ok(None);
        }
        let d = sub(x, xb);
        if norm(&d) < budget.min_separation {
            return Ok(None);
        }
        if !boundary(problem.cone_c(), &scale(&mat_vec(&jf, &d), -1.0))?
            || !boundary(problem.cone_k(), &scale(&mat_vec(&jg, &d), -1.0))?
        {
            return Ok(None);
        }
        let form = lambda.iter().zip(&hf).map(|(l, h)| l * quad_form(h, &d)).sum::<f64>()
            + mu.iter().zip(&hg).map(|(m, h)| m * quad_form(h, &d)).sum::<f64>();
        Ok(if form >= -tol.strict {
            None
        } else {
            witness(Clause::Soc2, xb, x, premise, form)
        })
    };
    // Base point is always x̄; only the x half of each pair is used.
    let stream = SamplingBudget {
        seed: budget.seed.wrapping_add(1),
        ..budget.clone()
    };
    v.run("curvature on the restriction set", &stream, |_, x| soc2(x_bar, x))?;
    Ok(v)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IsolationOptions {
    /// Strict positivity margin.
    pub delta: f64,
    /// Radius of the neighborhood sampled for the growth constant.
    pub radius: f64,
    /// Random unit directions in addition to `±eᵢ`.
    pub direction_count: usize,
}

impl Default for IsolationOptions {
    fn default() -> Self {
        Self {
            delta: 1e-4,
            radius: 1.0,
            direction_count: 64,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IsolationVerdict {
    pub certified: bool,
    pub label: String,
    pub order: u8,
    pub directions_checked: usize,
    /// Smallest directional value; `None` when no direction was checked.
    pub direction_minimum: Option<f64>,
    pub worst_direction: Option<Vec<f64>>,
    /// Largest `ε` for which the growth inequality holds on every sample.
    pub epsilon: f64,
    pub neighborhood_samples: usize,
}

fn unit_directions(dim: usize, count: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut out = Vec::new();
    for i in 0..dim {
        for s in [1.0, -1.0] {
            let mut e = vec![0.0; dim];
            e[i] = s;
            out.push(e);
        }
    }
    if dim > 1 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        while out.len() < 2 * dim + count {
            let v: Vec<f64> = (0..dim).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let n = norm(&v);
            if n > 1e-3 && n <= 1.0 {
                out.push(scale(&v, 1.0 / n));
            }
        }
    }
    out
}

/// Largest `ε ≤ radius` such that every sample with `‖x − x̄‖ < ε` satisfies
/// `λ·f(x) ≥ λ·f(x̄) + ε‖x − x̄‖^order`, given `(distance, growth)` pairs where
/// growth is `(λ·f(x) − λ·f(x̄)) / ‖x − x̄‖^order`.
pub fn largest_epsilon(mut samples: Vec<(f64, f64)>, radius: f64) -> f64 {
    samples.retain(|(r, _)| *r > 0.0 && *r < radius);
    samples.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut best = samples.first().map_or(radius, |s| s.0);
    let mut prefix = f64::INFINITY;
    for (k, (r, q)) in samples.iter().enumerate() {
        prefix = prefix.min(*q);
        let upper = samples.get(k + 1).map_or(radius, |s| s.0);
        let eps = prefix.min(upper);
        if eps > *r && eps > best {
            best = eps;
        }
    }
    best
}

fn growth_epsilon(
    problem: &VectorProblem,
    x_bar: &[f64],
    lambda: &[f64],
    order: i32,
    radius: f64,
    budget: &SamplingBudget,
) -> Result<(f64, usize)> {
    let base = dot(lambda, &problem.objective().values(x_bar)?);
    let mut rng = ChaCha8Rng::seed_from_u64(budget.seed);
    rng.set_stream(2);
    let s = x_bar.len();
    let mut samples = Vec::new();
    for _ in 0..budget.pair_count {
        let v: Vec<f64> = loop {
            let v: Vec<f64> = (0..s).map(|_| rng.gen_range(-1.0..1.0)).collect();
            if norm(&v) <= 1.0 {
                break v;
            }
        };
        let x: Vec<f64> = x_bar.iter().zip(&v).map(|(a, b)| a + radius * b).collect();
        let r = norm(&sub(&x, x_bar));
        if r == 0.0 || !problem.in_domain(&x) {
            continue;
        }
        match problem.is_feasible(&x) {
            Ok(true) => {}
            Ok(false) => continue,
            Err(e) if skippable(&e) => continue,
            Err(e) => return Err(e),
        }
        let fx = match problem.objective().values(&x) {
            Ok(v) => v,
            Err(e) if skippable(&e) => continue,
            Err(e) => return Err(e),
        };
        samples.push((r, (dot(lambda, &fx) - base) / r.powi(order)));
    }
    let n = samples.len();
    Ok((largest_epsilon(samples, radius), n))
}

/// Sampled form of the first-order isolation condition
/// `λ·d⁻f(x̄,u) + μ·d⁻g(x̄,u) > δ` over unit directions, with lower Dini
/// derivatives taken componentwise.
pub fn isolated_first_order_check(
    problem: &VectorProblem,
    x_bar: &[f64],
    lambda: &[f64],
    mu: &[f64],
    budget: &SamplingBudget,
    sched: &LimitSchedule,
    opts: &IsolationOptions,
) -> Result<IsolationVerdict> {
    validate_multipliers(problem, x_bar, lambda, mu, true, false)?;
    let dirs = unit_directions(problem.dim(), opts.direction_count, budget.seed);
    let mut minimum = f64::INFINITY;
    let mut worst = None;
    for u in &dirs {
        let mut value = 0.0;
        for (w, e) in lambda
            .iter()
            .zip(problem.objective().exprs())
            .chain(mu.iter().zip(problem.constraint().exprs()))
        {
            if *w != 0.0 {
                value += w * dini_lower(|y: &[f64]| e.eval(y), x_bar, u, sched)?.value;
            }
        }
        if value < minimum {
            minimum = value;
            worst = Some(u.clone());
        }
    }
    let (epsilon, n) = growth_epsilon(problem, x_bar, lambda, 1, opts.radius, budget)?;
    let certified = minimum > opts.delta;
    Ok(IsolationVerdict {
        certified,
        label: if certified {
            "first-order isolated (sampled)"
        } else {
            "not certified"
        }
        .into(),
        order: 1,
        directions_checked: dirs.len(),
        direction_minimum: Some(minimum),
        worst_direction: worst,
        epsilon,
        neighborhood_samples: n,
    })
}

/// `λ·∇²f(x̄)(u,u) + μ·∇²g(x̄)(u,u) > δ` on the supplied critical directions.
pub fn isolated_second_order_check(
    problem: &VectorProblem,
    x_bar: &[f64],
    lambda: &[f64],
    mu: &[f64],
    directions: &[Vec<f64>],
    budget: &SamplingBudget,
    opts: &IsolationOptions,
) -> Result<IsolationVerdict> {
    validate_multipliers(problem, x_bar, lambda, mu, true, true)?;
    let cone = crate::certificates::critical_cone(problem, x_bar)?;
    let hf = problem.objective().hessians(x_bar)?;
    let hg = problem.constraint().hessians(x_bar)?;
    let mut minimum: Option<f64> = None;
    let mut worst = None;
    for (index, u) in directions.iter().enumerate() {
        check_direction(&cone, index, u)?;
        let u = normalized(u).ok_or_else(|| Error::InvalidArgument("zero direction".into()))?;
        let form = lambda.iter().zip(&hf).map(|(l, h)| l * quad_form(h, &u)).sum::<f64>()
            + mu.iter().zip(&hg).map(|(m, h)| m * quad_form(h, &u)).sum::<f64>();
        if minimum.is_none_or(|m| form < m) {
            minimum = Some(form);
            worst = Some(u);
        }
    }
    let (epsilon, n) = growth_epsilon(problem, x_bar, lambda, 2, opts.radius, budget)?;
    let certified = minimum.is_none_or(|m| m > opts.delta);
    Ok(IsolationVerdict {
        certified,
        label: if certified {
            "second-order isolated (sampled)"
        } else {
            "not certified"
        }
        .into(),
        order: 2,
        directions_checked: directions.len(),
        direction_minimum: minimum,
        worst_direction: worst,
        epsilon,
        neighborhood_samples: n,
    })
}

fn check_direction(cone: &CriticalCone, index: usize, u: &[f64]) -> Result<()> {
    if u.len() != cone.dim {
        return Err(Error::DimensionMismatch {
            expected: cone.dim,
            actual: u.len(),
            context: "critical direction",
        });
    }
    if !cone.contains(u) {
        return Err(Error::DirectionOutsideCriticalCone {
            index,
            violation: cone.violation(u),
        });
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::Expr;
    use crate::testutil::{problem, CUBIC, E1, E2, E6, SADDLE};

    fn map(e: Expr) -> ExprMap {
        ExprMap::new(1, vec![e]).unwrap()
    }

    fn unit_box() -> SamplingBudget {
        SamplingBudget::new(vec![(-1.0, 1.0)])
    }

    fn x() -> Expr {
        Expr::Var(0)
    }

    fn r1() -> PolyhedralCone {
        PolyhedralCone::orthant(1).unwrap()
    }

    #[test]
    fn pseudoconvex_examples() {
        let w = falsify_pseudoconvex(&map(Expr::Pow(Box::new(x()), 3)), &r1(), &unit_box())
            .unwrap()
            .unwrap();
        assert_eq!(w.violated_clause, Clause::Pseudoconvex);
        assert!(w.x[0] < w.x_bar[0]);
        let lin = ExprMap::new(2, vec![Expr::Var(0), crate::expr::add(Expr::Var(0), Expr::Var(1))]).unwrap();
        let b2 = SamplingBudget::new(vec![(-1.0, 1.0); 2]);
        assert!(falsify_pseudoconvex(&lin, &PolyhedralCone::orthant(2).unwrap(), &b2)
            .unwrap()
            .is_none());
        assert!(
            falsify_pseudoconvex(&map(Expr::Pow(Box::new(x()), 2)), &r1(), &unit_box())
                .unwrap()
                .is_none()
        );
    }

    #[test]
    fn cubic_witness_at_the_anchor() {
        // The first pair uses the box center 0 as x̄.
        let f = map(Expr::Pow(Box::new(x()), 3));
        let b = SamplingBudget {
            pair_count: 200,
            ..unit_box()
        };
        let w = falsify_pseudoconvex(&f, &r1(), &b).unwrap().unwrap();
        assert_eq!(w.x_bar, vec![0.0]);
        assert!(w.x[0] < 0.0 && w.conclusion == 0.0);
    }

    #[test]
    fn strict_pseudoconvex_examples() {
        let w = falsify_strict_pseudoconvex(&map(Expr::Const(2.0)), &unit_box())
            .unwrap()
            .unwrap();
        assert_eq!(w.violated_clause, Clause::StrictPseudoconvex);
        assert!(falsify_strict_pseudoconvex(&map(x()), &unit_box()).unwrap().is_none());
        assert!(
            falsify_strict_pseudoconvex(&map(Expr::Pow(Box::new(x()), 2)), &unit_box())
                .unwrap()
                .is_none()
        );
    }

    #[test]
    fn second_order_pseudoconvex_examples() {
        let w = falsify_second_order_pseudoconvex(&map(Expr::Pow(Box::new(x()), 3)), &r1(), &unit_box())
            .unwrap()
            .unwrap();
        assert_eq!(w.violated_clause, Clause::SecondOrderBoundary);
        assert!(
            falsify_second_order_pseudoconvex(&map(Expr::Pow(Box::new(x()), 2)), &r1(), &unit_box())
                .unwrap()
                .is_none()
        );
        // −x² fails the first implication away from 0 (e.g. x̄ = 0.5, x = −0.9).
        let neg_sq = map(crate::expr::neg(Expr::Pow(Box::new(x()), 2)));
        let w = falsify_second_order_pseudoconvex(&neg_sq, &r1(), &unit_box())
            .unwrap()
            .unwrap();
        assert_eq!(w.violated_clause, Clause::SecondOrderFirst);
    }

    #[test]
    fn second_order_strict_examples() {
        assert!(
            falsify_second_order_strict_pseudoconvex(&map(Expr::Pow(Box::new(x()), 2)), &unit_box())
                .unwrap()
                .is_none()
        );
        let w = falsify_second_order_strict_pseudoconvex(&map(Expr::Const(1.0)), &unit_box())
            .unwrap()
            .unwrap();
        assert_eq!(w.violated_clause, Clause::StrictSecondOrderEquality);
        let neg_sq = map(crate::expr::neg(Expr::Pow(Box::new(x()), 2)));
        let w = falsify_second_order_strict_pseudoconvex(&neg_sq, &unit_box())
            .unwrap()
            .unwrap();
        assert_eq!(w.violated_clause, Clause::StrictSecondOrderFirst);
        let tol = Tolerances::default();
        assert_eq!(
            strict_second_order_pair(&neg_sq, &[1.0], &[-1.0], &tol)
                .unwrap()
                .unwrap()
                .violated_clause,
            Clause::StrictSecondOrderFirst
        );
    }

    #[test]
    fn witnesses_reverify() {
        let tol = Tolerances::default();
        let cubic = map(Expr::Pow(Box::new(x()), 3));
        let w = falsify_pseudoconvex(&cubic, &r1(), &unit_box()).unwrap().unwrap();
        assert!(w.reverify(&cubic, Some(&r1()), &tol).unwrap());
        let c = map(Expr::Const(1.0));
        let w = falsify_strict_pseudoconvex(&c, &unit_box()).unwrap().unwrap();
        assert!(w.reverify(&c, None, &tol).unwrap());
        assert!(w.reverify(&c, Some(&r1()), &tol).is_err());
    }

    #[test]
    fn pair_sequence_is_prefix_stable() {
        let small = SamplingBudget {
            pair_count: 50,
            ..unit_box()
        };
        let large = SamplingBudget {
            pair_count: 500,
            ..unit_box()
        };
        let a: Vec<_> = small.pairs().collect();
        let b: Vec<_> = large.pairs().take(50).collect();
        assert_eq!(a, b);
        assert!(a.iter().step_by(2).all(|(xb, _)| xb == &vec![0.0]));
    }

    #[test]
    fn first_order_verdicts() {
        let p = problem(E1);
        let b = SamplingBudget::for_problem(&p, Some(&[0.0]));
        let v = first_order_global_verdict(&p, &[0.0], &[0.5], &[0.5], &b).unwrap();
        assert_eq!(v.status, GlobalStatus::Certified);
        assert_eq!(v.checks.len(), 2);
        let p = problem(E2);
        let b = SamplingBudget::for_problem(&p, Some(&[0.5, 0.5]));
        let t = 1.0 / 3.0;
        let v = first_order_global_verdict(&p, &[0.5, 0.5], &[t, t], &[t], &b).unwrap();
        assert_eq!(v.status, GlobalStatus::Certified, "{v:?}");
        let p = problem(CUBIC);
        let b = SamplingBudget::for_problem(&p, Some(&[0.0]));
        let v = first_order_global_verdict(&p, &[0.0], &[1.0], &[0.0], &b).unwrap();
        assert_eq!(v.status, GlobalStatus::HypothesesViolated);
        assert_eq!(v.witness.unwrap().violated_clause, Clause::Pseudoconvex);
    }

    #[test]
    fn invalid_multipliers_are_rejected() {
        let p = problem(E1);
        let b = SamplingBudget::for_problem(&p, None);
        assert!(first_order_global_verdict(&p, &[0.0], &[1.0], &[0.0], &b).is_err());
        assert!(first_order_global_verdict(&p, &[0.0], &[-0.5], &[-0.5], &b).is_err());
        assert!(first_order_global_verdict(&p, &[0.0], &[0.0], &[0.0], &b).is_err());
    }

    #[test]
    fn second_order_verdicts() {
        let p = problem(E6);
        let b = SamplingBudget::for_problem(&p, Some(&[0.0]));
        let v = second_order_global_verdict(&p, &[0.0], &[1.0], &[0.0], &b).unwrap();
        assert_eq!(v.status, GlobalStatus::Certified, "{v:?}");
        let p = problem(SADDLE);
        let b = SamplingBudget::for_problem(&p, Some(&[0.0]));
        let v = second_order_global_verdict(&p, &[0.0], &[1.0], &[0.0], &b).unwrap();
        assert_eq!(v.status, GlobalStatus::HypothesesViolated);
        let p = problem(E1);
        let b = SamplingBudget::for_problem(&p, Some(&[0.0]));
        let v = second_order_global_verdict(&p, &[0.0], &[0.5], &[0.5], &b).unwrap();
        assert_eq!(v.status, GlobalStatus::Certified);
    }

    #[test]
    fn epsilon_search() {
        assert_eq!(largest_epsilon(vec![(0.1, 1.0), (0.2, 1.0), (0.3, 1.0)], 1.0), 1.0);
        assert_eq!(largest_epsilon(vec![(0.1, 0.5), (0.2, 1.0)], 1.0), 0.5);
        assert_eq!(largest_epsilon(vec![(0.1, 0.05), (0.2, 1.0)], 1.0), 0.1);
        assert_eq!(largest_epsilon(vec![], 0.7), 0.7);
    }

    #[test]
    fn isolated_first_order_examples() {
        let abs = problem("vars x; objective [abs(x)]; constraint [-1]; coneC orthant(1); coneK orthant(1)");
        let b = SamplingBudget {
            pair_count: 2000,
            ..SamplingBudget::for_problem(&abs, None)
        };
        let s = LimitSchedule::default();
        let o = IsolationOptions::default();
        let v = isolated_first_order_check(&abs, &[0.0], &[1.0], &[0.0], &b, &s, &o).unwrap();
        assert!(v.certified);
        assert!((v.direction_minimum.unwrap() - 1.0).abs() < 1e-9);
        assert!(v.epsilon > 0.99);
        let v = isolated_first_order_check(&problem(E6), &[0.0], &[1.0], &[0.0], &b, &s, &o).unwrap();
        assert!(!v.certified);
        let v = isolated_first_order_check(&problem(E1), &[0.0], &[0.5], &[0.5], &b, &s, &o).unwrap();
        assert!(!v.certified);
        assert!(v.direction_minimum.unwrap().abs() < 1e-9);
    }

    #[test]
    fn isolated_second_order_examples() {
        let p = problem(E6);
        let b = SamplingBudget {
            pair_count: 2000,
            ..SamplingBudget::for_problem(&p, None)
        };
        let o = IsolationOptions {
            radius: 0.5,
            ..Default::default()
        };
        let dirs = vec![vec![1.0], vec![-1.0]];
        let v = isolated_second_order_check(&p, &[0.0], &[1.0], &[0.0], &dirs, &b, &o).unwrap();
        assert!(v.certified);
        assert!(v.epsilon >= 0.4 && v.epsilon <= 0.5);
        let quartic = problem("vars x; objective [x^4]; constraint [-1]; coneC orthant(1); coneK orthant(1)");
        let v = isolated_second_order_check(&quartic, &[0.0], &[1.0], &[0.0], &dirs, &b, &o).unwrap();
        assert!(!v.certified);
        let v = isolated_second_order_check(&problem(SADDLE), &[0.0], &[1.0], &[0.0], &dirs, &b, &o).unwrap();
        assert!(!v.certified && v.direction_minimum.unwrap() < 0.0);
        let r = isolated_second_order_check(&problem(E1), &[0.0], &[0.5], &[0.5], &[vec![1.0]], &b, &o);
        assert!(matches!(r, Err(Error::DirectionOutsideCriticalCone { .. })));
    }
}
