//! Sampled lower Dini and lower Hadamard directional derivatives, and the
//! scalarized gap `F(x) = max over Λ of λ·[f(x)−f(x̄)] + μ·g(x)`.
//!
//! A liminf cannot be computed from finitely many samples. Each estimator
//! evaluates difference quotients on the trailing `window` levels of the
//! geometric grid `t_k = t₀ ρᵏ` (`k < depth`) and returns the smallest one
//! together with the `(t, u′)` that attained it.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{add, dot, scale, sub};
use crate::lp::{self, LinearProgram, LpStatus};
use crate::problem::VectorProblem;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LimitSchedule {
    pub t0: f64,
    pub rho: f64,
    pub depth: usize,
    /// Number of trailing grid levels that are sampled.
    pub window: usize,
    /// Directions `u′` drawn per level, in addition to `u` itself.
    pub perturbation_count: usize,
    /// Perturbation radius at step `t` is `radius_scale·√t`.
    pub radius_scale: f64,
    /// Offset into the low-discrepancy sequence.
    pub seed: u64,
}

impl Default for LimitSchedule {
    fn default() -> Self {
        Self {
            t0: 1e-2,
            rho: 0.5,
            depth: 20,
            window: 2,
            perturbation_count: 32,
            radius_scale: 1.0,
            seed: 0,
        }
    }
}

impl LimitSchedule {
    pub fn validate(&self) -> Result<()> {
        if !(self.t0 > 0.0 && self.t0.is_finite()) {
            return Err(Error::InvalidArgument(format!("t0 must be positive, got {}", self.t0)));
        }
        if !(self.rho > 0.0 && self.rho < 1.0) {
            return Err(Error::InvalidArgument(format!(
                "rho must lie in (0, 1), got {}",
                self.rho
            )));
        }
        if self.depth < 2 {
            return Err(Error::InvalidArgument(format!(
                "depth must be at least 2, got {}",
                self.depth
            )));
        }
        if self.window == 0 || self.window > self.depth {
            return Err(Error::InvalidArgument(format!(
                "window must lie in 1..={}, got {}",
                self.depth, self.window
            )));
        }
        if !(self.radius_scale >= 0.0 && self.radius_scale.is_finite()) {
            return Err(Error::InvalidArgument(
                "radius_scale must be finite and nonnegative".into(),
            ));
        }
        Ok(())
    }

    /// The sampled step sizes, largest first.
    pub fn steps(&self) -> Vec<f64> {
        (self.depth - self.window..self.depth)
            .map(|k| self.t0 * self.rho.powi(k as i32))
            .collect()
    }

    pub fn radius(&self, t: f64) -> f64 {
        self.radius_scale * t.sqrt()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DerivativeEstimate {
    pub value: f64,
    pub samples_used: usize,
    /// Step and direction of the minimizing quotient.
    pub min_attained_at: (f64, Vec<f64>),
}

/// `min over t of t⁻¹[h(x+tu) − h(x)]`.
pub fn dini_lower<H>(h: H, x: &[f64], u: &[f64], sched: &LimitSchedule) -> Result<DerivativeEstimate>
where
    H: Fn(&[f64]) -> f64,
{
    estimate(&h, x, u, sched, false, |hx, hy, t, _| (hy - hx) / t)
}

/// `min over t, u′ of t⁻¹[h(x+tu′) − h(x)]`, with `u′ = u` always included.
pub fn hadamard_lower<H>(h: H, x: &[f64], u: &[f64], sched: &LimitSchedule) -> Result<DerivativeEstimate>
where
    H: Fn(&[f64]) -> f64,
{
    estimate(&h, x, u, sched, true, |hx, hy, t, _| (hy - hx) / t)
}

/// `min over t, u′ of 2t⁻²[h(x+tu′) − h(x) − t·base(u′)]`.
pub fn hadamard_second_lower<H>(
    h: H,
    x: &[f64],
    base: &[f64],
    u: &[f64],
    sched: &LimitSchedule,
) -> Result<DerivativeEstimate>
where
    H: Fn(&[f64]) -> f64,
{
    if base.len() != x.len() {
        return Err(Error::DimensionMismatch {
            expected: x.len(),
            actual: base.len(),
            context: "base functional",
        });
    }
    estimate(&h, x, u, sched, true, |hx, hy, t, up| {
        2.0 * (hy - hx - t * dot(base, up)) / (t * t)
    })
}

fn estimate<H, Q>(
    h: &H,
    x: &[f64],
    u: &[f64],
    sched: &LimitSchedule,
    perturb: bool,
    quotient: Q,
) -> Result<DerivativeEstimate>
where
    H: Fn(&[f64]) -> f64,
    Q: Fn(f64, f64, f64, &[f64]) -> f64,
{
    sched.validate()?;
    if u.len() != x.len() {
        return Err(Error::DimensionMismatch {
            expected: x.len(),
            actual: u.len(),
            context: "direction",
        });
    }
    let hx = h(x);
    if !hx.is_finite() {
        return Err(Error::NonFinite("function at the base point".into()));
    }
    let mut halton = Halton::new(x.len(), sched.seed);
    let mut best = DerivativeEstimate {
        value: f64::INFINITY,
        samples_used: 0,
        min_attained_at: (0.0, u.to_vec()),
    };
    for t in sched.steps() {
        let r = sched.radius(t);
        let extra = if perturb { sched.perturbation_count } else { 0 };
        for j in 0..=extra {
            let up = if j == 0 {
                u.to_vec()
            } else {
                add(u, &scale(&halton.next_in_ball(), r))
            };
            let y = add(x, &scale(&up, t));
            let hy = h(&y);
            if !hy.is_finite() {
                return Err(Error::NonFinite(format!("function at sample t={t:e}")));
            }
            let q = quotient(hx, hy, t, &up);
            best.samples_used += 1;
            if q < best.value {
                best.value = q;
                best.min_attained_at = (t, up);
            }
        }
    }
    Ok(best)
}

/// Halton points mapped radially from the cube `[−1,1]^d` onto the unit ball.
struct Halton {
    bases: Vec<u64>,
    index: u64,
}

const PRIMES: [u64; 16] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53];

impl Halton {
    fn new(dim: usize, seed: u64) -> Self {
        let bases = (0..dim)
            .map(|i| PRIMES[i % PRIMES.len()] + 56 * (i / PRIMES.len()) as u64)
            .collect();
        Self {
            bases,
            index: seed.wrapping_add(1),
        }
    }

    fn next_in_ball(&mut self) -> Vec<f64> {
        let k = self.index;
        self.index = self.index.wrapping_add(1);
        let w: Vec<f64> = self.bases.iter().map(|&b| 2.0 * radical_inverse(k, b) - 1.0).collect();
        let inf = w.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let two = w.iter().map(|v| v * v).sum::<f64>().sqrt();
        if two == 0.0 {
            w
        } else {
            scale(&w, inf / two)
        }
    }
}

fn radical_inverse(mut k: u64, base: u64) -> f64 {
    let mut inv = 1.0 / base as f64;
    let mut out = 0.0;
    while k > 0 {
        out += (k % base) as f64 * inv;
        k /= base;
        inv /= base as f64;
    }
    out
}

/// `F(x)` relative to `x̄`, solved as an LP over the coefficients of `(λ, μ)`
/// on the unit extreme rays of `C*` and `K*` with `Σa + Σb = 1`.
pub fn scalarized_gap(problem: &VectorProblem, x_bar: &[f64], x: &[f64]) -> Result<f64> {
    problem.check_point(x_bar)?;
    problem.check_point(x)?;
    if !problem.is_feasible(x_bar)? {
        return Err(Error::InfeasibleCandidate);
    }
    let f_bar = problem.objective().values(x_bar)?;
    let fx = problem.objective().values(x)?;
    let gx = problem.constraint().values(x)?;
    let df = sub(&fx, &f_bar);
    let objective: Vec<f64> = problem
        .cone_c()
        .polar_rays()
        .iter()
        .map(|r| dot(r, &df))
        .chain(problem.cone_k().polar_rays().iter().map(|q| dot(q, &gx)))
        .collect();
    let n = objective.len();
    let mut lp = LinearProgram::new(n).maximize(objective);
    lp.eq(vec![1.0; n], 1.0);
    let out = lp::solve(&lp)?;
    match out.status {
        LpStatus::Optimal => Ok(out.objective),
        other => Err(Error::LinearProgram(format!("gap program ended as {other:?}"))),
    }
}
