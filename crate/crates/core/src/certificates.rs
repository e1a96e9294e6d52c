//! First- and second-order Fritz John certificates at a candidate point.
//!
//! A multiplier pair is parametrized by nonnegative coefficients `a` over the
//! unit extreme rays `rᵢ` of `C*` and `b` over the unit extreme rays `qⱼ` of
//! `K*`, normalized by `Σa + Σb = 1`. Rays of `K*` with `qⱼ·g(x̄) < −tol`
//! are slack and their coefficients are fixed at zero, which makes
//! complementary slackness hold by construction.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::cone::Combinations;
use crate::error::{Error, Result};
use crate::linalg::{
    dot, norm, norm_inf, normalized, null_space, orthogonal_complement, orthonormal_row_basis, quad_form, scale,
    vec_mat,
};
use crate::lp::{self, LinearProgram, LpStatus};
use crate::problem::{EvaluatedPoint, Order, VectorProblem};

/// Random in-cone directions added to the extreme rays by default.
pub const DEFAULT_DIRECTION_COUNT: usize = 64;

const BASIS_TOL: f64 = 1e-10;
const DEDUP_TOL: f64 = 1e-8;
const NONZERO_PAIR: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MultiplierPair {
    pub lambda: Vec<f64>,
    pub mu: Vec<f64>,
    /// Coefficients over the extreme rays of `C*`.
    pub a: Vec<f64>,
    /// Coefficients over the extreme rays of `K*`; zero on slack rays.
    pub b: Vec<f64>,
    pub stationarity_residual: f64,
    pub slackness_residual: f64,
}

impl MultiplierPair {
    pub fn mu_is_zero(&self) -> bool {
        self.b.iter().all(|v| *v == 0.0)
    }
}

struct Setup {
    rays_c: Vec<Vec<f64>>,
    rays_k: Vec<Vec<f64>>,
    active: Vec<usize>,
    point: EvaluatedPoint,
    dim: usize,
}

impl Setup {
    fn new(problem: &VectorProblem, x_bar: &[f64], order: Order) -> Result<Self> {
        problem.check_point(x_bar)?;
        if !problem.is_feasible(x_bar)? {
            return Err(Error::InfeasibleCandidate);
        }
        let point = problem.evaluate(x_bar, order)?;
        let tol = problem.tolerances().activity;
        let rays_k = problem.cone_k().polar_rays().to_vec();
        let active = (0..rays_k.len())
            .filter(|&j| dot(&rays_k[j], &point.g_val) >= -tol)
            .collect();
        Ok(Self {
            rays_c: problem.cone_c().polar_rays().to_vec(),
            rays_k,
            active,
            point,
            dim: problem.dim(),
        })
    }

    /// Row `rᵀ J` for every ray of `C*` followed by every ray of `K*`.
    fn gradient_rows(&self) -> (Vec<Vec<f64>>, Vec<Vec<f64>>) {
        let fc = self
            .rays_c
            .iter()
            .map(|r| vec_mat(r, &self.point.jac_f, self.dim))
            .collect();
        let gk = self
            .rays_k
            .iter()
            .map(|q| vec_mat(q, &self.point.jac_g, self.dim))
            .collect();
        (fc, gk)
    }

    fn curvature(&self, u: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let hf: Vec<f64> = self.point.hess_f.iter().map(|h| quad_form(h, u)).collect();
        let hg: Vec<f64> = self.point.hess_g.iter().map(|h| quad_form(h, u)).collect();
        (
            self.rays_c.iter().map(|r| dot(r, &hf)).collect(),
            self.rays_k.iter().map(|q| dot(q, &hg)).collect(),
        )
    }

    /// Solve the certificate LP with the given `≥ 0` rows (coefficients over
    /// all rays of `C*` then all rays of `K*`).
    fn solve(&self, extra: &[(Vec<f64>, Vec<f64>)], allow_mu: bool, tol: f64) -> Result<Option<MultiplierPair>> {
        let nc = self.rays_c.len();
        let kb: Vec<usize> = if allow_mu { self.active.clone() } else { Vec::new() };
        let nvar = nc + kb.len();
        let (fc, gk) = self.gradient_rows();
        let mut lp = LinearProgram::new(nvar);
        for k in 0..self.dim {
            let row: Vec<f64> = fc.iter().map(|r| r[k]).chain(kb.iter().map(|&j| gk[j][k])).collect();
            lp.eq(row, 0.0);
        }
        lp.eq(vec![1.0; nvar], 1.0);
        for (ca, cb) in extra {
            let row: Vec<f64> = ca.iter().copied().chain(kb.iter().map(|&j| cb[j])).collect();
            lp.ge(row, 0.0);
        }
        let out = lp::solve(&lp)?;
        match out.status {
            LpStatus::Infeasible => return Ok(None),
            LpStatus::Unbounded => return Err(Error::LinearProgram("certificate program reported unbounded".into())),
            LpStatus::Optimal => {}
        }
        let a: Vec<f64> = out.solution[..nc].iter().map(|v| v.max(0.0)).collect();
        let mut b = vec![0.0; self.rays_k.len()];
        for (slot, &j) in kb.iter().enumerate() {
            b[j] = out.solution[nc + slot].max(0.0);
        }
        let pair = self.assemble(a, b);
        if pair.stationarity_residual > tol || pair.slackness_residual > tol {
            return Err(Error::LinearProgram(format!(
                "certificate residuals {:e}/{:e} exceed tolerance {tol:e}",
                pair.stationarity_residual, pair.slackness_residual
            )));
        }
        if norm_l1(&pair.lambda) + norm_l1(&pair.mu) < NONZERO_PAIR {
            return Err(Error::LinearProgram("certificate collapsed to (0, 0)".into()));
        }
        Ok(Some(pair))
    }

    fn assemble(&self, a: Vec<f64>, b: Vec<f64>) -> MultiplierPair {
        let combine = |coef: &[f64], rays: &[Vec<f64>], len: usize| {
            let mut v = vec![0.0; len];
            for (c, r) in coef.iter().zip(rays) {
                for (x, y) in v.iter_mut().zip(r) {
                    *x += c * y;
                }
            }
            v
        };
        let lambda = combine(&a, &self.rays_c, self.point.f_val.len());
        let mu = combine(&b, &self.rays_k, self.point.g_val.len());
        let grad: Vec<f64> = vec_mat(&lambda, &self.point.jac_f, self.dim)
            .iter()
            .zip(vec_mat(&mu, &self.point.jac_g, self.dim))
            .map(|(x, y)| x + y)
            .collect();
        MultiplierPair {
            stationarity_residual: norm_inf(&grad),
            slackness_residual: dot(&mu, &self.point.g_val).abs(),
            lambda,
            mu,
            a,
            b,
        }
    }

    fn search(&self, extra: &[(Vec<f64>, Vec<f64>)], tol: f64) -> Result<Option<MultiplierPair>> {
        if let Some(pair) = self.solve(extra, false, tol)? {
            return Ok(Some(pair));
        }
        if self.active.is_empty() {
            return Ok(None);
        }
        self.solve(extra, true, tol)
    }
}

fn norm_l1(v: &[f64]) -> f64 {
    v.iter().map(|x| x.abs()).sum()
}

/// Search for `(λ, μ) ∈ C*×K*` with `λ∇f(x̄) + μ∇g(x̄) = 0` and `μ·g(x̄) = 0`.
/// Pairs with `μ = 0` are tried first.
pub fn first_order_certificate(problem: &VectorProblem, x_bar: &[f64]) -> Result<Option<MultiplierPair>> {
    let setup = Setup::new(problem, x_bar, Order::Gradients)?;
    setup.search(&[], problem.tolerances().stationarity)
}

/// `{u | rᵢ∇f(x̄)u ≤ 0, qⱼ∇g(x̄)u ≤ 0}` for all extreme rays of `C*` and `K*`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CriticalCone {
    pub dim: usize,
    pub rows: Vec<Vec<f64>>,
    pub tol: f64,
}

impl CriticalCone {
    pub fn new(dim: usize, rows: Vec<Vec<f64>>, tol: f64) -> Self {
        Self { dim, rows, tol }
    }

    /// Largest scaled violation `row·u / max(1, ‖row‖)`; nonpositive inside.
    pub fn violation(&self, u: &[f64]) -> f64 {
        self.rows
            .iter()
            .map(|r| dot(r, u) / norm(r).max(1.0))
            .fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn contains(&self, u: &[f64]) -> bool {
        u.len() == self.dim && (self.rows.is_empty() || self.violation(u) <= self.tol)
    }

    /// Orthonormal basis of the largest subspace inside the cone.
    pub fn lineality(&self) -> Vec<Vec<f64>> {
        let span = orthonormal_row_basis(&self.rows, BASIS_TOL);
        orthogonal_complement(&span, self.dim, BASIS_TOL)
    }

    /// Unit extreme rays of the cone's intersection with the row space.
    pub fn pointed_rays(&self) -> Vec<Vec<f64>> {
        let span = orthonormal_row_basis(&self.rows, BASIS_TOL);
        let k = span.len();
        if k == 0 {
            return Vec::new();
        }
        // Constraints in coordinates y with u = Σ yᵢ spanᵢ.
        let reduced: Vec<Vec<f64>> = self
            .rows
            .iter()
            .filter_map(|r| normalized(&span.iter().map(|b| dot(r, b)).collect::<Vec<_>>()))
            .collect();
        let feasible = |y: &[f64]| reduced.iter().all(|r| dot(r, y) <= 1e-9);
        let lift = |y: &[f64]| {
            let mut u = vec![0.0; self.dim];
            for (c, b) in y.iter().zip(&span) {
                for (x, v) in u.iter_mut().zip(b) {
                    *x += c * v;
                }
            }
            normalized(&u)
        };
        let mut out: Vec<Vec<f64>> = Vec::new();
        let candidates: Vec<Vec<f64>> = if k == 1 {
            vec![vec![1.0], vec![-1.0]]
        } else {
            Combinations::new(reduced.len(), k - 1)
                .filter_map(|subset| {
                    let rows: Vec<Vec<f64>> = subset.iter().map(|&i| reduced[i].clone()).collect();
                    let ns = null_space(&rows, k, BASIS_TOL);
                    (ns.len() == 1).then(|| normalized(&ns[0])).flatten()
                })
                .flat_map(|v| {
                    let neg = scale(&v, -1.0);
                    [v, neg]
                })
                .collect()
        };
        for y in candidates {
            if feasible(&y) {
                if let Some(u) = lift(&y) {
                    push_unique(&mut out, u);
                }
            }
        }
        out
    }

    /// Whether the cone is `{0}`.
    pub fn is_trivial(&self) -> bool {
        self.lineality().is_empty() && self.pointed_rays().is_empty()
    }
}

fn push_unique(list: &mut Vec<Vec<f64>>, v: Vec<f64>) {
    let close = |a: &Vec<f64>| a.iter().zip(&v).all(|(x, y)| (x - y).abs() < DEDUP_TOL);
    if !list.iter().any(close) {
        list.push(v);
    }
}

pub fn critical_cone(problem: &VectorProblem, x_bar: &[f64]) -> Result<CriticalCone> {
    let setup = Setup::new(problem, x_bar, Order::Gradients)?;
    let (fc, gk) = setup.gradient_rows();
    let rows = fc.into_iter().chain(gk).collect();
    Ok(CriticalCone::new(problem.dim(), rows, problem.tolerances().membership))
}

/// Extreme rays of the cone (with `±` lineality directions) followed by up to
/// `count` random nonnegative combinations of them, normalized and
/// deduplicated. Empty when the cone is `{0}`.
pub fn sample_critical_directions(cone: &CriticalCone, count: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut gens: Vec<Vec<f64>> = Vec::new();
    for l in cone.lineality() {
        let neg = scale(&l, -1.0);
        push_unique(&mut gens, l);
        push_unique(&mut gens, neg);
    }
    for r in cone.pointed_rays() {
        push_unique(&mut gens, r);
    }
    if gens.is_empty() {
        return gens;
    }
    let mut out = gens.clone();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..count {
        let mut v = vec![0.0; cone.dim];
        for g in &gens {
            let w: f64 = rng.gen();
            for (x, y) in v.iter_mut().zip(g) {
                *x += w * y;
            }
        }
        if let Some(u) = normalized(&v) {
            if cone.contains(&u) {
                push_unique(&mut out, u);
            }
        }
    }
    out
}

/// First-order certificate that additionally satisfies
/// `[λ·∇²f(x̄) + μ·∇²g(x̄)](u, u) ≥ 0` for every supplied direction.
pub fn second_order_certificate(
    problem: &VectorProblem,
    x_bar: &[f64],
    directions: &[Vec<f64>],
) -> Result<Option<MultiplierPair>> {
    let setup = Setup::new(problem, x_bar, Order::Hessians)?;
    let (fc, gk) = setup.gradient_rows();
    let cone = CriticalCone::new(
        problem.dim(),
        fc.into_iter().chain(gk).collect(),
        problem.tolerances().membership,
    );
    let mut extra = Vec::with_capacity(directions.len());
    for (index, u) in directions.iter().enumerate() {
        if u.len() != problem.dim() {
            return Err(Error::DimensionMismatch {
                expected: problem.dim(),
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
        extra.push(setup.curvature(u));
    }
    setup.search(&extra, problem.tolerances().stationarity)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    /// Both necessary conditions hold; `sampled` when second-order rows came
    /// from a finite subset of critical directions.
    FjConsistent {
        sampled: bool,
    },
    RefutedFirstOrder,
    /// Not a weak local minimizer, modulo the sampled direction set.
    RefutedSecondOrder,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CriticalConeSummary {
    pub rows: Vec<Vec<f64>>,
    pub lineality_dim: usize,
    pub pointed_rays: Vec<Vec<f64>>,
    pub trivial: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CandidateReport {
    pub point: Vec<f64>,
    pub first_order: Option<MultiplierPair>,
    /// `∇f(x̄) = 0` and `∇g(x̄) = 0`: every normalized pair is stationary.
    pub totally_degenerate: bool,
    pub critical_cone: Option<CriticalConeSummary>,
    pub directions: Vec<Vec<f64>>,
    pub second_order: Option<MultiplierPair>,
    pub verdict: Verdict,
}

pub fn check_candidate(
    problem: &VectorProblem,
    x_bar: &[f64],
    direction_count: usize,
    seed: u64,
) -> Result<CandidateReport> {
    let setup = Setup::new(problem, x_bar, Order::Gradients)?;
    let tol = problem.tolerances().stationarity;
    let degenerate = setup
        .point
        .jac_f
        .iter()
        .chain(&setup.point.jac_g)
        .all(|r| norm_inf(r) <= tol);
    let first = setup.search(&[], tol)?;
    let mut report = CandidateReport {
        point: x_bar.to_vec(),
        first_order: first.clone(),
        totally_degenerate: degenerate,
        critical_cone: None,
        directions: Vec::new(),
        second_order: None,
        verdict: Verdict::RefutedFirstOrder,
    };
    if first.is_none() {
        return Ok(report);
    }
    let cone = critical_cone(problem, x_bar)?;
    let lineality = cone.lineality();
    let pointed = cone.pointed_rays();
    let directions = sample_critical_directions(&cone, direction_count, seed);
    // Exact only when the cone is a finite union of rays.
    let exact = match lineality.len() {
        0 => pointed.len() <= 1,
        1 => pointed.is_empty(),
        _ => false,
    };
    report.critical_cone = Some(CriticalConeSummary {
        trivial: lineality.is_empty() && pointed.is_empty(),
        lineality_dim: lineality.len(),
        pointed_rays: pointed,
        rows: cone.rows,
    });
    report.second_order = second_order_certificate(problem, x_bar, &directions)?;
    report.directions = directions;
    report.verdict = match report.second_order {
        Some(_) => Verdict::FjConsistent { sampled: !exact },
        None => Verdict::RefutedSecondOrder,
    };
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::testutil::{problem, E1, E2, E3, E6, SADDLE};

    fn close(a: &[f64], b: &[f64]) -> bool {
        a.len() == b.len() && a.iter().zip(b).all(|(x, y)| (x - y).abs() < 1e-9)
    }

    #[test]
    fn first_order_examples() {
        let p = first_order_certificate(&problem(E1), &[0.0]).unwrap().unwrap();
        assert!(close(&p.lambda, &[0.5]) && close(&p.mu, &[0.5]), "{p:?}");
        let p = first_order_certificate(&problem(E2), &[0.5, 0.5]).unwrap().unwrap();
        let third = 1.0 / 3.0;
        assert!(close(&p.lambda, &[third, third]) && close(&p.mu, &[third]), "{p:?}");
        let p = first_order_certificate(&problem(E3), &[0.0]).unwrap().unwrap();
        assert!(close(&p.lambda, &[0.0]) && close(&p.mu, &[1.0]), "{p:?}");
        assert!(first_order_certificate(&problem(E1), &[1.0]).unwrap().is_none());
        assert!(p.stationarity_residual <= 1e-8 && p.slackness_residual <= 1e-8);
    }

    #[test]
    fn infeasible_candidates_are_errors() {
        let r = first_order_certificate(&problem(E1), &[-0.5]);
        assert!(matches!(r, Err(Error::InfeasibleCandidate)));
    }

    #[test]
    fn interior_constraint_forces_zero_mu() {
        let p = first_order_certificate(&problem(E6), &[0.0]).unwrap().unwrap();
        assert!(p.mu_is_zero());
        assert!(close(&p.lambda, &[1.0]));
    }

    #[test]
    fn critical_cone_examples() {
        let c = critical_cone(&problem(E6), &[0.0]).unwrap();
        assert_eq!(c.lineality().len(), 1);
        assert!(c.contains(&[1.0]) && c.contains(&[-1.0]));
        let c = critical_cone(&problem(E1), &[0.0]).unwrap();
        assert!(c.is_trivial());
        assert!(!c.contains(&[1.0]) && !c.contains(&[-1.0]));
        let c = critical_cone(&problem(E2), &[0.5, 0.5]).unwrap();
        assert!(c.is_trivial());
    }

    #[test]
    fn direction_sampling_examples() {
        let zero = CriticalCone::new(1, vec![vec![1.0], vec![-1.0]], 1e-9);
        assert!(sample_critical_directions(&zero, 10, 0).is_empty());
        let all = CriticalCone::new(1, vec![vec![0.0]], 1e-9);
        assert_eq!(sample_critical_directions(&all, 10, 0), vec![vec![1.0], vec![-1.0]]);
        let half = CriticalCone::new(1, vec![vec![2.0]], 1e-9);
        assert_eq!(sample_critical_directions(&half, 10, 0), vec![vec![-1.0]]);
    }

    #[test]
    fn sampled_directions_are_unit_and_inside() {
        // {u₁ ≤ 0, u₁ + u₂ ≤ 0} in R³: pointed part is 2-D, lineality is e₃.
        let cone = CriticalCone::new(3, vec![vec![1.0, 0.0, 0.0], vec![1.0, 1.0, 0.0]], 1e-9);
        assert_eq!(cone.lineality().len(), 1);
        assert_eq!(cone.pointed_rays().len(), 2);
        let dirs = sample_critical_directions(&cone, 40, 7);
        assert!(dirs.len() > 4);
        for d in &dirs {
            assert!((norm(d) - 1.0).abs() < 1e-12);
            assert!(cone.contains(d));
        }
        assert_eq!(dirs, sample_critical_directions(&cone, 40, 7));
    }

    #[test]
    fn lower_dimensional_pointed_part() {
        // u₁ = 0 and u₂ ≤ 0 in R³: the ray −e₂ plus lineality e₃.
        let cone = CriticalCone::new(
            3,
            vec![vec![1.0, 0.0, 0.0], vec![-1.0, 0.0, 0.0], vec![0.0, 1.0, 0.0]],
            1e-9,
        );
        let rays = cone.pointed_rays();
        assert_eq!(rays.len(), 1);
        assert!(close(&rays[0], &[0.0, -1.0, 0.0]));
    }

    #[test]
    fn second_order_examples() {
        let dirs = vec![vec![1.0], vec![-1.0]];
        let p = second_order_certificate(&problem(E6), &[0.0], &dirs).unwrap().unwrap();
        assert!(close(&p.lambda, &[1.0]) && close(&p.mu, &[0.0]));
        assert!(second_order_certificate(&problem(SADDLE), &[0.0], &dirs)
            .unwrap()
            .is_none());
        let p = second_order_certificate(&problem(E1), &[0.0], &[]).unwrap().unwrap();
        assert!(close(&p.lambda, &[0.5]) && close(&p.mu, &[0.5]));
    }

    #[test]
    fn directions_outside_the_cone_are_rejected() {
        let r = second_order_certificate(&problem(E1), &[0.0], &[vec![1.0]]);
        assert!(matches!(r, Err(Error::DirectionOutsideCriticalCone { index: 0, .. })));
    }

    #[test]
    fn candidate_verdicts() {
        let r = check_candidate(&problem(E1), &[0.0], 16, 0).unwrap();
        assert_eq!(r.verdict, Verdict::FjConsistent { sampled: false });
        let r = check_candidate(&problem(SADDLE), &[0.0], 16, 0).unwrap();
        assert_eq!(r.verdict, Verdict::RefutedSecondOrder);
        let r = check_candidate(&problem(E1), &[1.0], 16, 0).unwrap();
        assert_eq!(r.verdict, Verdict::RefutedFirstOrder);
        let r = check_candidate(&problem(E3), &[0.0], 16, 0).unwrap();
        assert!(!r.totally_degenerate);
        let r = check_candidate(&problem(E6), &[0.0], 16, 0).unwrap();
        assert!(r.totally_degenerate);
    }

    #[test]
    fn rescaled_objective_keeps_a_certificate() {
        let scaled = "vars x, y; objective [2*x, y]; constraint [1 - x - y]; coneC orthant(2); coneK orthant(1)";
        assert!(first_order_certificate(&problem(scaled), &[0.5, 0.5])
            .unwrap()
            .is_some());
    }
}
