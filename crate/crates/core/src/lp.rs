//! Dense two-phase simplex with Bland's rule.
//!
//! Problems here are tiny (certificate searches with a few dozen columns), so
//! the solver keeps a full tableau and pivots deterministically.

use crate::error::{Error, Result};

pub const DEFAULT_MAX_PIVOTS: usize = 100_000;

const PIVOT_TOL: f64 = 1e-11;
const COST_TOL: f64 = 1e-11;
const PHASE_ONE_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VarBound {
    NonNegative,
    Free,
}

/// `maximize cᵀz  s.t.  A z ≤ b,  E z = d`, with per-variable sign bounds.
#[derive(Debug, Clone)]
pub struct LinearProgram {
    pub objective: Vec<f64>,
    pub ineq_rows: Vec<Vec<f64>>,
    pub ineq_rhs: Vec<f64>,
    pub eq_rows: Vec<Vec<f64>>,
    pub eq_rhs: Vec<f64>,
    pub bounds: Vec<VarBound>,
    pub max_pivots: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

#[derive(Debug, Clone)]
pub struct LpOutcome {
    pub status: LpStatus,
    pub solution: Vec<f64>,
    pub objective: f64,
    pub max_violation: f64,
    pub pivots: usize,
}

impl LinearProgram {
    /// A program over `num_vars` nonnegative variables with zero objective.
    pub fn new(num_vars: usize) -> Self {
        Self {
            objective: vec![0.0; num_vars],
            ineq_rows: Vec::new(),
            ineq_rhs: Vec::new(),
            eq_rows: Vec::new(),
            eq_rhs: Vec::new(),
            bounds: vec![VarBound::NonNegative; num_vars],
            max_pivots: DEFAULT_MAX_PIVOTS,
        }
    }

    pub fn num_vars(&self) -> usize {
        self.objective.len()
    }

    pub fn maximize(mut self, c: Vec<f64>) -> Self {
        self.objective = c;
        self
    }

    pub fn le(&mut self, row: Vec<f64>, rhs: f64) -> &mut Self {
        self.ineq_rows.push(row);
        self.ineq_rhs.push(rhs);
        self
    }

    pub fn ge(&mut self, row: Vec<f64>, rhs: f64) -> &mut Self {
        self.le(row.iter().map(|v| -v).collect(), -rhs)
    }

    pub fn eq(&mut self, row: Vec<f64>, rhs: f64) -> &mut Self {
        self.eq_rows.push(row);
        self.eq_rhs.push(rhs);
        self
    }

    fn validate(&self) -> Result<()> {
        let n = self.num_vars();
        let bad = |what: &str| Err(Error::LinearProgram(format!("malformed program: {what}")));
        if self.bounds.len() != n {
            return bad("bounds length");
        }
        if self.ineq_rows.len() != self.ineq_rhs.len() || self.eq_rows.len() != self.eq_rhs.len() {
            return bad("row/rhs count");
        }
        for r in self.ineq_rows.iter().chain(&self.eq_rows) {
            if r.len() != n {
                return bad("row length");
            }
            if r.iter().any(|v| !v.is_finite()) {
                return bad("non-finite coefficient");
            }
        }
        let finite = |v: &[f64]| v.iter().all(|x| x.is_finite());
        if !finite(&self.objective) || !finite(&self.ineq_rhs) || !finite(&self.eq_rhs) {
            return bad("non-finite objective or rhs");
        }
        Ok(())
    }

    /// Largest violation of the constraints (and sign bounds) at `z`.
    pub fn max_violation(&self, z: &[f64]) -> f64 {
        let mut worst: f64 = 0.0;
        for (row, b) in self.ineq_rows.iter().zip(&self.ineq_rhs) {
            worst = worst.max(crate::linalg::dot(row, z) - b);
        }
        for (row, d) in self.eq_rows.iter().zip(&self.eq_rhs) {
            worst = worst.max((crate::linalg::dot(row, z) - d).abs());
        }
        for (v, bound) in z.iter().zip(&self.bounds) {
            if *bound == VarBound::NonNegative {
                worst = worst.max(-v);
            }
        }
        worst
    }
}

pub fn solve(lp: &LinearProgram) -> Result<LpOutcome> {
    lp.validate()?;
    let n = lp.num_vars();

    // Column layout: one column per nonnegative variable, two per free variable,
    // then one slack per inequality, then one artificial per row.
    let mut col_of: Vec<(usize, Option<usize>)> = Vec::with_capacity(n);
    let mut ncols = 0;
    for b in &lp.bounds {
        match b {
            VarBound::NonNegative => {
                col_of.push((ncols, None));
                ncols += 1;
            }
            VarBound::Free => {
                col_of.push((ncols, Some(ncols + 1)));
                ncols += 2;
            }
        }
    }
    let n_struct = ncols;
    let n_ineq = lp.ineq_rows.len();
    let n_rows = n_ineq + lp.eq_rows.len();
    let n_real = n_struct + n_ineq;
    let width = n_real + n_rows + 1;

    let mut tab: Vec<Vec<f64>> = Vec::with_capacity(n_rows);
    for (r, (row, rhs)) in lp
        .ineq_rows
        .iter()
        .zip(&lp.ineq_rhs)
        .chain(lp.eq_rows.iter().zip(&lp.eq_rhs))
        .enumerate()
    {
        let mut t = vec![0.0; width];
        for (j, &(p, neg)) in col_of.iter().enumerate() {
            t[p] = row[j];
            if let Some(q) = neg {
                t[q] = -row[j];
            }
        }
        if r < n_ineq {
            t[n_struct + r] = 1.0;
        }
        t[width - 1] = *rhs;
        if *rhs < 0.0 {
            for v in t.iter_mut() {
                *v = -*v;
            }
        }
        t[n_real + r] = 1.0;
        tab.push(t);
    }
    let mut basis: Vec<usize> = (n_real..n_real + n_rows).collect();
    let mut tableau = Tableau {
        rows: tab,
        basis: &mut basis,
        allowed: vec![true; width - 1],
        pivots: 0,
        max_pivots: lp.max_pivots,
    };

    // Phase I: maximize −Σ artificials.
    let mut phase1_cost = vec![0.0; width - 1];
    for c in phase1_cost.iter_mut().skip(n_real) {
        *c = -1.0;
    }
    let p1 = tableau.optimize(&phase1_cost)?;
    debug_assert!(matches!(p1, PhaseResult::Optimal));
    let infeas: f64 = tableau
        .basis
        .iter()
        .enumerate()
        .filter(|(_, &b)| b >= n_real)
        .map(|(i, _)| tableau.rows[i][width - 1])
        .sum();
    let rhs_scale = lp
        .ineq_rhs
        .iter()
        .chain(&lp.eq_rhs)
        .fold(1.0_f64, |m, v| m.max(v.abs()));
    if infeas > PHASE_ONE_TOL * rhs_scale {
        return Ok(LpOutcome {
            status: LpStatus::Infeasible,
            solution: Vec::new(),
            objective: f64::NAN,
            max_violation: f64::NAN,
            pivots: tableau.pivots,
        });
    }

    // Drive artificials out of the basis; drop rows that are redundant.
    let mut i = 0;
    while i < tableau.rows.len() {
        if tableau.basis[i] >= n_real {
            let entering = (0..n_real).find(|&j| tableau.rows[i][j].abs() > 1e-9);
            match entering {
                Some(j) => {
                    tableau.pivot(i, j)?;
                    i += 1;
                }
                None => {
                    tableau.rows.remove(i);
                    tableau.basis.remove(i);
                }
            }
        } else {
            i += 1;
        }
    }
    for a in tableau.allowed.iter_mut().skip(n_real) {
        *a = false;
    }

    // Phase II.
    let mut cost = vec![0.0; width - 1];
    for (j, &(p, neg)) in col_of.iter().enumerate() {
        cost[p] = lp.objective[j];
        if let Some(q) = neg {
            cost[q] = -lp.objective[j];
        }
    }
    let p2 = tableau.optimize(&cost)?;

    let mut cols = vec![0.0; width - 1];
    for (r, &b) in tableau.basis.iter().enumerate() {
        cols[b] = tableau.rows[r][width - 1];
    }
    let solution: Vec<f64> = col_of
        .iter()
        .map(|&(p, neg)| cols[p] - neg.map_or(0.0, |q| cols[q]))
        .collect();
    let objective = crate::linalg::dot(&lp.objective, &solution);
    let max_violation = lp.max_violation(&solution);
    let status = match p2 {
        PhaseResult::Optimal => LpStatus::Optimal,
        PhaseResult::Unbounded => LpStatus::Unbounded,
    };
    Ok(LpOutcome {
        status,
        solution,
        objective,
        max_violation,
        pivots: tableau.pivots,
    })
}

enum PhaseResult {
    Optimal,
    Unbounded,
}

struct Tableau<'a> {
    rows: Vec<Vec<f64>>,
    basis: &'a mut Vec<usize>,
    allowed: Vec<bool>,
    pivots: usize,
    max_pivots: usize,
}

impl Tableau<'_> {
    fn rhs(&self) -> usize {
        self.allowed.len()
    }

    /// Bland's rule: lowest-index improving column, lowest-index leaving variable on ties.
    fn optimize(&mut self, cost: &[f64]) -> Result<PhaseResult> {
        loop {
            let entering = (0..self.allowed.len()).find(|&j| {
                if !self.allowed[j] || self.basis.contains(&j) {
                    return false;
                }
                let zj: f64 = self
                    .basis
                    .iter()
                    .zip(&self.rows)
                    .map(|(&b, row)| cost[b] * row[j])
                    .sum();
                cost[j] - zj > COST_TOL
            });
            let Some(j) = entering else {
                return Ok(PhaseResult::Optimal);
            };
            let rhs = self.rhs();
            let mut leave: Option<(usize, f64)> = None;
            for (i, row) in self.rows.iter().enumerate() {
                if row[j] > PIVOT_TOL {
                    let ratio = row[rhs] / row[j];
                    leave = match leave {
                        None => Some((i, ratio)),
                        Some((li, lr)) => {
                            if ratio < lr - 1e-12 || ((ratio - lr).abs() <= 1e-12 && self.basis[i] < self.basis[li]) {
                                Some((i, ratio))
                            } else {
                                Some((li, lr))
                            }
                        }
                    };
                }
            }
            let Some((i, _)) = leave else {
                return Ok(PhaseResult::Unbounded);
            };
            self.pivot(i, j)?;
        }
    }

    fn pivot(&mut self, r: usize, c: usize) -> Result<()> {
        if self.pivots >= self.max_pivots {
            return Err(Error::IterationLimit(self.max_pivots));
        }
        self.pivots += 1;
        let p = self.rows[r][c];
        for v in self.rows[r].iter_mut() {
            *v /= p;
        }
        let pivot_row = self.rows[r].clone();
        for (i, row) in self.rows.iter_mut().enumerate() {
            if i == r {
                continue;
            }
            let f = row[c];
            if f != 0.0 {
                for (x, y) in row.iter_mut().zip(&pivot_row) {
                    *x -= f * y;
                }
                row[c] = 0.0;
            }
        }
        // keep rhs nonnegative against roundoff
        let rhs = self.rhs();
        for row in self.rows.iter_mut() {
            if row[rhs] < 0.0 && row[rhs] > -1e-13 {
                row[rhs] = 0.0;
            }
        }
        self.basis[r] = c;
        Ok(())
    }
}
