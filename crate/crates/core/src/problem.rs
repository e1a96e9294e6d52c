//! Cone-constrained vector problems: minimize `f(x)` with respect to `C`
//! subject to `g(x) ∈ −K`, with `x` restricted to an optional closed box.

use serde::{Deserialize, Serialize};

use crate::cone::PolyhedralCone;
use crate::error::{Error, Result};
use crate::expr::{self, Expr};
use crate::linalg::scale;

/// Numerical tolerances shared by every check. All are overridable from a
/// problem file (`tol <name> <value>`) or from the command line.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    /// `h·x ≥ −membership` counts as inside a halfspace.
    pub membership: f64,
    /// `h·x > strict` counts as strictly inside.
    pub strict: f64,
    /// Bound on stationarity and slackness residuals.
    pub stationarity: f64,
    /// A polar ray `q` is active at `x̄` when `q·g(x̄) ≥ −activity`.
    pub activity: f64,
    /// Margin separating strict positivity from roundoff in sufficiency checks.
    pub margin: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            membership: 1e-9,
            strict: 1e-9,
            stationarity: 1e-8,
            activity: 1e-9,
            margin: 1e-4,
        }
    }
}

impl Tolerances {
    pub const NAMES: [&'static str; 5] = ["membership", "strict", "stationarity", "activity", "margin"];

    pub fn get(&self, name: &str) -> Option<f64> {
        Some(match name {
            "membership" => self.membership,
            "strict" => self.strict,
            "stationarity" => self.stationarity,
            "activity" => self.activity,
            "margin" => self.margin,
            _ => return None,
        })
    }

    pub fn set(&mut self, name: &str, value: f64) -> bool {
        let slot = match name {
            "membership" => &mut self.membership,
            "strict" => &mut self.strict,
            "stationarity" => &mut self.stationarity,
            "activity" => &mut self.activity,
            "margin" => &mut self.margin,
            _ => return false,
        };
        *slot = value;
        true
    }
}

/// A list of expressions with their symbolic Jacobian and Hessians.
#[derive(Debug, Clone)]
pub struct ExprMap {
    dim: usize,
    exprs: Vec<Expr>,
    jacobian: Vec<Vec<Expr>>,
    hessians: Vec<Vec<Vec<Expr>>>,
}

impl PartialEq for ExprMap {
    fn eq(&self, other: &Self) -> bool {
        self.dim == other.dim && self.exprs == other.exprs
    }
}

impl ExprMap {
    pub fn new(dim: usize, exprs: Vec<Expr>) -> Result<Self> {
        for e in &exprs {
            if e.arity() > dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    actual: e.arity(),
                    context: "expression variable index",
                });
            }
        }
        let jacobian: Vec<Vec<Expr>> = exprs
            .iter()
            .map(|e| (0..dim).map(|j| e.derivative(j)).collect())
            .collect();
        let hessians = jacobian
            .iter()
            .map(|row| {
                (0..dim)
                    .map(|i| (0..dim).map(|j| row[i].derivative(j)).collect())
                    .collect()
            })
            .collect();
        Ok(Self {
            dim,
            exprs,
            jacobian,
            hessians,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.exprs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.exprs.is_empty()
    }

    pub fn exprs(&self) -> &[Expr] {
        &self.exprs
    }

    pub fn has_nonsmooth(&self) -> bool {
        self.exprs.iter().any(Expr::has_nonsmooth)
    }

    /// The scalar map `x ↦ Σ wᵢ eᵢ(x)`.
    pub fn scalarize(&self, weights: &[f64]) -> Result<ExprMap> {
        if weights.len() != self.exprs.len() {
            return Err(Error::DimensionMismatch {
                expected: self.exprs.len(),
                actual: weights.len(),
                context: "scalarization weights",
            });
        }
        let combined = self
            .exprs
            .iter()
            .zip(weights)
            .filter(|(_, w)| **w != 0.0)
            .map(|(e, w)| expr::mul(Expr::Const(*w), e.clone()))
            .fold(Expr::Const(0.0), expr::add);
        ExprMap::new(self.dim, vec![combined])
    }

    fn check_point(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                actual: x.len(),
                context: "point",
            });
        }
        Ok(())
    }

    pub fn values(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.check_point(x)?;
        let v: Vec<f64> = self.exprs.iter().map(|e| e.eval(x)).collect();
        finite(v, "function value")
    }

    /// Raw values without dimension or finiteness checks (for sampling loops).
    pub fn values_unchecked(&self, x: &[f64]) -> Vec<f64> {
        self.exprs.iter().map(|e| e.eval(x)).collect()
    }

    fn check_smooth(&self, x: &[f64]) -> Result<()> {
        if let Some(i) = self.exprs.iter().position(|e| e.nonsmooth_active(x)) {
            return Err(Error::NonSmooth(format!(
                "component {} has an active abs/norm kink",
                i + 1
            )));
        }
        Ok(())
    }

    pub fn jacobian(&self, x: &[f64]) -> Result<Vec<Vec<f64>>> {
        self.check_point(x)?;
        self.check_smooth(x)?;
        let j: Vec<Vec<f64>> = self
            .jacobian
            .iter()
            .map(|row| row.iter().map(|e| e.eval(x)).collect())
            .collect();
        for row in &j {
            if row.iter().any(|v| !v.is_finite()) {
                return Err(Error::NonFinite("Jacobian".into()));
            }
        }
        Ok(j)
    }

    /// Symmetrized Hessians `(H + Hᵀ)/2`, one per component.
    pub fn hessians(&self, x: &[f64]) -> Result<Vec<Vec<Vec<f64>>>> {
        self.check_point(x)?;
        self.check_smooth(x)?;
        let mut out = Vec::with_capacity(self.hessians.len());
        for h in &self.hessians {
            let raw: Vec<Vec<f64>> = h.iter().map(|row| row.iter().map(|e| e.eval(x)).collect()).collect();
            let n = raw.len();
            let mut sym = vec![vec![0.0; n]; n];
            for i in 0..n {
                for j in 0..n {
                    sym[i][j] = 0.5 * (raw[i][j] + raw[j][i]);
                    if !sym[i][j].is_finite() {
                        return Err(Error::NonFinite("Hessian".into()));
                    }
                }
            }
            out.push(sym);
        }
        Ok(out)
    }
}

fn finite(v: Vec<f64>, what: &str) -> Result<Vec<f64>> {
    if v.iter().all(|x| x.is_finite()) {
        Ok(v)
    } else {
        Err(Error::NonFinite(what.into()))
    }
}

#[derive(Debug, Clone)]
pub struct VectorProblem {
    vars: Vec<String>,
    objective: ExprMap,
    constraint: ExprMap,
    cone_c: PolyhedralCone,
    cone_k: PolyhedralCone,
    domain_box: Option<Vec<(f64, f64)>>,
    tolerances: Tolerances,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluatedPoint {
    pub x: Vec<f64>,
    pub f_val: Vec<f64>,
    pub g_val: Vec<f64>,
    pub jac_f: Vec<Vec<f64>>,
    pub jac_g: Vec<Vec<f64>>,
    pub hess_f: Vec<Vec<Vec<f64>>>,
    pub hess_g: Vec<Vec<Vec<f64>>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Order {
    Values,
    Gradients,
    Hessians,
}

impl TryFrom<u8> for Order {
    type Error = Error;

    fn try_from(v: u8) -> Result<Self> {
        match v {
            0 => Ok(Order::Values),
            1 => Ok(Order::Gradients),
            2 => Ok(Order::Hessians),
            _ => Err(Error::InvalidArgument(format!("derivative order {v}"))),
        }
    }
}

impl VectorProblem {
    pub fn new(
        vars: Vec<String>,
        objective: Vec<Expr>,
        constraint: Vec<Expr>,
        cone_c: PolyhedralCone,
        cone_k: PolyhedralCone,
        domain_box: Option<Vec<(f64, f64)>>,
        tolerances: Tolerances,
    ) -> Result<Self> {
        let s = vars.len();
        if s == 0 {
            return Err(Error::InvalidArgument("no decision variables".into()));
        }
        if objective.len() != cone_c.ambient_dim() {
            return Err(Error::DimensionMismatch {
                expected: cone_c.ambient_dim(),
                actual: objective.len(),
                context: "objective components vs cone C",
            });
        }
        if constraint.len() != cone_k.ambient_dim() {
            return Err(Error::DimensionMismatch {
                expected: cone_k.ambient_dim(),
                actual: constraint.len(),
                context: "constraint components vs cone K",
            });
        }
        if let Some(b) = &domain_box {
            if b.len() != s {
                return Err(Error::DimensionMismatch {
                    expected: s,
                    actual: b.len(),
                    context: "domain box",
                });
            }
            if b.iter().any(|(lo, hi)| !(lo < hi)) {
                return Err(Error::InvalidArgument("box bounds must satisfy lo < hi".into()));
            }
        }
        Ok(Self {
            objective: ExprMap::new(s, objective)?,
            constraint: ExprMap::new(s, constraint)?,
            vars,
            cone_c,
            cone_k,
            domain_box,
            tolerances,
        })
    }

    pub fn vars(&self) -> &[String] {
        &self.vars
    }

    /// Decision dimension `s`.
    pub fn dim(&self) -> usize {
        self.vars.len()
    }

    pub fn num_objectives(&self) -> usize {
        self.objective.len()
    }

    pub fn num_constraints(&self) -> usize {
        self.constraint.len()
    }

    pub fn objective(&self) -> &ExprMap {
        &self.objective
    }

    pub fn constraint(&self) -> &ExprMap {
        &self.constraint
    }

    pub fn cone_c(&self) -> &PolyhedralCone {
        &self.cone_c
    }

    pub fn cone_k(&self) -> &PolyhedralCone {
        &self.cone_k
    }

    pub fn domain_box(&self) -> Option<&[(f64, f64)]> {
        self.domain_box.as_deref()
    }

    pub fn tolerances(&self) -> &Tolerances {
        &self.tolerances
    }

    pub fn set_tolerances(&mut self, tol: Tolerances) {
        self.tolerances = tol;
    }

    pub fn is_smooth(&self) -> bool {
        !self.objective.has_nonsmooth() && !self.constraint.has_nonsmooth()
    }

    /// Identical expression trees and settings, with cones compared up to
    /// ray scaling.
    pub fn structurally_eq(&self, other: &Self) -> bool {
        self.vars == other.vars
            && self.objective == other.objective
            && self.constraint == other.constraint
            && self.cone_c.approx_eq(&other.cone_c, 1e-9)
            && self.cone_k.approx_eq(&other.cone_k, 1e-9)
            && self.domain_box == other.domain_box
            && self.tolerances == other.tolerances
    }

    pub fn check_point(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                actual: x.len(),
                context: "point",
            });
        }
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument("point has non-finite coordinates".into()));
        }
        if let Some(b) = &self.domain_box {
            for (i, (v, (lo, hi))) in x.iter().zip(b).enumerate() {
                if v < lo || v > hi {
                    return Err(Error::DomainViolation {
                        index: i,
                        value: *v,
                        lo: *lo,
                        hi: *hi,
                    });
                }
            }
        }
        Ok(())
    }

    pub fn in_domain(&self, x: &[f64]) -> bool {
        self.check_point(x).is_ok()
    }

    pub fn evaluate(&self, x: &[f64], order: Order) -> Result<EvaluatedPoint> {
        self.check_point(x)?;
        let mut p = EvaluatedPoint {
            x: x.to_vec(),
            f_val: self.objective.values(x)?,
            g_val: self.constraint.values(x)?,
            jac_f: Vec::new(),
            jac_g: Vec::new(),
            hess_f: Vec::new(),
            hess_g: Vec::new(),
        };
        if order != Order::Values {
            p.jac_f = self.objective.jacobian(x)?;
            p.jac_g = self.constraint.jacobian(x)?;
        }
        if order == Order::Hessians {
            p.hess_f = self.objective.hessians(x)?;
            p.hess_g = self.constraint.hessians(x)?;
        }
        Ok(p)
    }

    /// `g(x) ∈ −K`, tested as `−g(x) ∈ K` against K's facet normals.
    pub fn is_feasible(&self, x: &[f64]) -> Result<bool> {
        self.check_point(x)?;
        let g = self.constraint.values(x)?;
        self.cone_k.contains_tol(&scale(&g, -1.0), self.tolerances.membership)
    }

    /// Max relative deviation between symbolic derivatives and central
    /// differences: Jacobians against differences of values, Hessians against
    /// differences of the symbolic Jacobian.
    pub fn finite_difference_check(&self, x: &[f64], step: f64) -> Result<f64> {
        if !(step > 0.0) {
            return Err(Error::InvalidArgument("finite-difference step must be positive".into()));
        }
        self.check_point(x)?;
        let mut worst: f64 = 0.0;
        for map in [&self.objective, &self.constraint] {
            let jac = map.jacobian(x)?;
            let hess = map.hessians(x)?;
            for j in 0..self.dim() {
                // Differences use the representable step (x+h)−x so that
                // affine maps are differentiated exactly.
                let mut xp = x.to_vec();
                let mut xm = x.to_vec();
                xp[j] += step;
                xm[j] -= step;
                let width = (xp[j] - x[j]) + (x[j] - xm[j]);
                let fp = map.values(&xp)?;
                let fm = map.values(&xm)?;
                let jp = map.jacobian(&xp)?;
                let jm = map.jacobian(&xm)?;
                for i in 0..map.len() {
                    let fd = (fp[i] - fm[i]) / width;
                    worst = worst.max(rel_dev(jac[i][j], fd));
                    for k in 0..self.dim() {
                        let fd2 = (jp[i][k] - jm[i][k]) / width;
                        worst = worst.max(rel_dev(hess[i][k][j], fd2));
                    }
                }
            }
        }
        Ok(worst)
    }
}

fn rel_dev(exact: f64, approx: f64) -> f64 {
    (exact - approx).abs() / exact.abs().max(1.0)
}
