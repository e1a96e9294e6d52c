//! Brute-force ground truth for weak local and global efficiency.
//!
//! A dominator `x` (feasible, `f(x̄) − f(x) ∈ int C`) proves that `x̄` is not
//! weakly efficient. Not finding one is evidence only.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::sub;
use crate::problem::VectorProblem;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScanMode {
    Grid { points_per_axis: usize },
    Random { count: usize, seed: u64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanGrid {
    pub radius: f64,
    pub mode: ScanMode,
    /// Upper bound on evaluated points.
    pub cap: usize,
}

impl ScanGrid {
    pub fn new(radius: f64) -> Self {
        Self {
            radius,
            mode: ScanMode::Grid { points_per_axis: 41 },
            cap: 1_000_000,
        }
    }

    pub fn random(radius: f64, count: usize, seed: u64) -> Self {
        Self {
            radius,
            mode: ScanMode::Random { count, seed },
            cap: 1_000_000,
        }
    }

    fn validate(&self) -> Result<()> {
        if !(self.radius > 0.0 && self.radius.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "scan radius must be positive, got {}",
                self.radius
            )));
        }
        if self.cap == 0 {
            return Err(Error::InvalidArgument("scan cap must be positive".into()));
        }
        if let ScanMode::Grid { points_per_axis } = self.mode {
            if points_per_axis < 2 {
                return Err(Error::InvalidArgument(
                    "a scan grid needs at least 2 points per axis".into(),
                ));
            }
        }
        Ok(())
    }
}

/// Points per axis after applying the cap, kept odd so the center is a node.
fn capped_axis(points_per_axis: usize, dim: usize, cap: usize) -> usize {
    let mut p = points_per_axis;
    while p > 2 && (p as f64).powi(dim as i32) > cap as f64 {
        p -= 1;
    }
    if p.is_multiple_of(2) && p > 2 && !points_per_axis.is_multiple_of(2) {
        p -= 1;
    }
    p
}

/// Grid nodes of `∏[loᵢ, hiᵢ]` in lexicographic order (last axis fastest).
struct Lattice {
    axes: Vec<Vec<f64>>,
    idx: Vec<usize>,
    done: bool,
}

impl Lattice {
    fn new(bounds: &[(f64, f64)], p: usize) -> Self {
        let axes = bounds
            .iter()
            .map(|(lo, hi)| {
                (0..p)
                    .map(|i| {
                        if i + 1 == p {
                            *hi
                        } else {
                            lo + (hi - lo) * i as f64 / (p - 1) as f64
                        }
                    })
                    .collect()
            })
            .collect();
        Self {
            axes,
            idx: vec![0; bounds.len()],
            done: bounds.is_empty(),
        }
    }
}

impl Iterator for Lattice {
    type Item = (Vec<usize>, Vec<f64>);

    fn next(&mut self) -> Option<Self::Item> {
        if self.done {
            return None;
        }
        let point = self.idx.iter().zip(&self.axes).map(|(&i, a)| a[i]).collect();
        let out = (self.idx.clone(), point);
        let mut k = self.idx.len();
        loop {
            if k == 0 {
                self.done = true;
                break;
            }
            k -= 1;
            self.idx[k] += 1;
            if self.idx[k] < self.axes[k].len() {
                break;
            }
            self.idx[k] = 0;
        }
        Some(out)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleResult {
    /// No dominator was found among the sampled points.
    pub minimal: bool,
    pub dominator: Option<Vec<f64>>,
    pub points_checked: usize,
}

/// Whether `x` is a feasible point in the problem's domain that dominates
/// `f(x̄)` strictly inside `C`. Evaluation failures count as "no".
fn dominates(problem: &VectorProblem, f_bar: &[f64], x: &[f64]) -> bool {
    if !problem.in_domain(x) || !matches!(problem.is_feasible(x), Ok(true)) {
        return false;
    }
    let Ok(fx) = problem.objective().values(x) else {
        return false;
    };
    problem
        .cone_c()
        .interior_contains_tol(&sub(f_bar, &fx), problem.tolerances().strict)
        .unwrap_or(false)
}

fn candidate_values(problem: &VectorProblem, x_bar: &[f64]) -> Result<Vec<f64>> {
    problem.check_point(x_bar)?;
    if !problem.is_feasible(x_bar)? {
        return Err(Error::InfeasibleCandidate);
    }
    problem.objective().values(x_bar)
}

fn first_dominator<I>(problem: &VectorProblem, f_bar: &[f64], points: I) -> OracleResult
where
    I: Iterator<Item = Vec<f64>>,
{
    let mut checked = 0;
    for x in points {
        checked += 1;
        if dominates(problem, f_bar, &x) {
            return OracleResult {
                minimal: false,
                dominator: Some(x),
                points_checked: checked,
            };
        }
    }
    OracleResult {
        minimal: true,
        dominator: None,
        points_checked: checked,
    }
}

/// Scan the cube of half-width `grid.radius` around `x̄`. The first dominator
/// in scan order is reported.
pub fn weak_local_min_oracle(problem: &VectorProblem, x_bar: &[f64], grid: &ScanGrid) -> Result<OracleResult> {
    grid.validate()?;
    let f_bar = candidate_values(problem, x_bar)?;
    let bounds: Vec<(f64, f64)> = x_bar.iter().map(|c| (c - grid.radius, c + grid.radius)).collect();
    Ok(match &grid.mode {
        ScanMode::Grid { points_per_axis } => {
            let p = capped_axis(*points_per_axis, x_bar.len(), grid.cap);
            first_dominator(problem, &f_bar, Lattice::new(&bounds, p).map(|(_, x)| x))
        }
        ScanMode::Random { count, seed } => {
            let mut rng = ChaCha8Rng::seed_from_u64(*seed);
            let n = (*count).min(grid.cap);
            let pts = (0..n).map(move |_| bounds.iter().map(|(lo, hi)| rng.gen_range(*lo..=*hi)).collect());
            first_dominator(problem, &f_bar, pts)
        }
    })
}

/// Box center first, then `count − 1` uniform points of `bounds`.
pub fn weak_global_scan(
    problem: &VectorProblem,
    x_bar: &[f64],
    bounds: &[(f64, f64)],
    count: usize,
    seed: u64,
) -> Result<OracleResult> {
    let f_bar = candidate_values(problem, x_bar)?;
    if bounds.len() != x_bar.len() {
        return Err(Error::DimensionMismatch {
            expected: x_bar.len(),
            actual: bounds.len(),
            context: "scan box",
        });
    }
    if bounds
        .iter()
        .any(|(lo, hi)| !(lo < hi) || !lo.is_finite() || !hi.is_finite())
    {
        return Err(Error::InvalidArgument("scan box must be bounded with lo < hi".into()));
    }
    let center: Vec<f64> = bounds.iter().map(|(lo, hi)| 0.5 * (lo + hi)).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let rest = (1..count).map(move |_| bounds.iter().map(|(lo, hi)| rng.gen_range(*lo..=*hi)).collect());
    Ok(first_dominator(
        problem,
        &f_bar,
        std::iter::once(center).take(count.min(1)).chain(rest),
    ))
}

/// Feasible grid nodes of `bounds` not dominated by any feasible node among
/// their (up to `3ˢ − 1`) grid neighbors.
pub fn enumerate_candidates(
    problem: &VectorProblem,
    bounds: &[(f64, f64)],
    points_per_axis: usize,
) -> Result<Vec<Vec<f64>>> {
    if bounds.len() != problem.dim() {
        return Err(Error::DimensionMismatch {
            expected: problem.dim(),
            actual: bounds.len(),
            context: "candidate box",
        });
    }
    if bounds
        .iter()
        .any(|(lo, hi)| !(lo < hi) || !lo.is_finite() || !hi.is_finite())
    {
        return Err(Error::InvalidArgument(
            "candidate box must be bounded with lo < hi".into(),
        ));
    }
    let p = capped_axis(points_per_axis.max(2), bounds.len(), 1_000_000);
    let nodes: Vec<(Vec<usize>, Vec<f64>)> = Lattice::new(bounds, p).collect();
    let s = bounds.len();
    let flat = |idx: &[usize]| idx.iter().fold(0usize, |acc, &i| acc * p + i);
    let values: Vec<Option<Vec<f64>>> = nodes
        .iter()
        .map(|(_, x)| {
            if problem.in_domain(x) && matches!(problem.is_feasible(x), Ok(true)) {
                problem.objective().values(x).ok()
            } else {
                None
            }
        })
        .collect();
    let strict = problem.tolerances().strict;
    let mut out = Vec::new();
    for (k, (idx, x)) in nodes.iter().enumerate() {
        let Some(fk) = &values[k] else { continue };
        let mut dominated = false;
        for offset in Lattice::new(&vec![(0.0, 2.0); s], 3).map(|(o, _)| o) {
            if offset.iter().all(|&o| o == 1) {
                continue;
            }
            let nb: Option<Vec<usize>> = idx
                .iter()
                .zip(&offset)
                .map(|(&i, &o)| {
                    let j = i as isize + o as isize - 1;
                    (j >= 0 && (j as usize) < p).then_some(j as usize)
                })
                .collect();
            let Some(nb) = nb else { continue };
            if let Some(fn_) = &values[flat(&nb)] {
                if problem.cone_c().interior_contains_tol(&sub(fk, fn_), strict)? {
                    dominated = true;
                    break;
                }
            }
        }
        if !dominated {
            out.push(x.clone());
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::testutil::{problem, E1, E2, E6, SADDLE};

    #[test]
    fn local_oracle_examples() {
        let r = weak_local_min_oracle(&problem(E1), &[0.0], &ScanGrid::new(0.5)).unwrap();
        assert!(r.minimal && r.points_checked == 41);
        let r = weak_local_min_oracle(&problem(SADDLE), &[0.0], &ScanGrid::new(0.5)).unwrap();
        assert!(!r.minimal);
        assert_eq!(r.dominator, Some(vec![-0.5]));
        let r = weak_local_min_oracle(&problem(E2), &[0.5, 0.5], &ScanGrid::new(0.5)).unwrap();
        assert!(r.minimal);
        assert_eq!(r.points_checked, 41 * 41);
    }

    #[test]
    fn random_mode_and_cap() {
        let g = ScanGrid::random(0.5, 500, 3);
        let r = weak_local_min_oracle(&problem(SADDLE), &[0.0], &g).unwrap();
        assert!(!r.minimal);
        let g = ScanGrid {
            cap: 100,
            ..ScanGrid::new(0.5)
        };
        let r = weak_local_min_oracle(&problem(E2), &[0.5, 0.5], &g).unwrap();
        assert!(r.points_checked <= 100);
        assert_eq!(capped_axis(41, 2, 100), 9);
        assert_eq!(capped_axis(41, 1, 1_000_000), 41);
    }

    #[test]
    fn shrinking_radius_stays_minimal() {
        let p = problem(E2);
        for r in [0.4, 0.2, 0.1, 0.05] {
            assert!(
                weak_local_min_oracle(&p, &[0.5, 0.5], &ScanGrid::new(r))
                    .unwrap()
                    .minimal
            );
        }
    }

    #[test]
    fn global_scan_examples() {
        let p = problem(E1);
        let bx = [(-2.0, 2.0)];
        assert!(weak_global_scan(&p, &[0.0], &bx, 1000, 0).unwrap().minimal);
        let r = weak_global_scan(&p, &[1.0], &bx, 1000, 0).unwrap();
        assert_eq!(r.dominator, Some(vec![0.0]));
        let r = weak_global_scan(&problem(E2), &[0.5, 0.5], &[(0.0, 2.0), (0.0, 2.0)], 1000, 0).unwrap();
        assert!(r.minimal);
    }

    #[test]
    fn infeasible_candidates_are_errors() {
        assert!(matches!(
            weak_local_min_oracle(&problem(E1), &[-1.0], &ScanGrid::new(0.5)),
            Err(Error::InfeasibleCandidate)
        ));
        assert!(weak_local_min_oracle(&problem(E1), &[0.0], &ScanGrid::new(0.0)).is_err());
    }

    #[test]
    fn candidate_enumeration_examples() {
        let bx = [(-1.0, 1.0)];
        assert_eq!(enumerate_candidates(&problem(E1), &bx, 41).unwrap(), vec![vec![0.0]]);
        assert_eq!(enumerate_candidates(&problem(E6), &bx, 41).unwrap(), vec![vec![0.0]]);
        assert_eq!(
            enumerate_candidates(&problem(SADDLE), &bx, 41).unwrap(),
            vec![vec![-1.0], vec![1.0]]
        );
    }

    #[test]
    fn lattice_order_is_lexicographic() {
        let pts: Vec<Vec<f64>> = Lattice::new(&[(0.0, 1.0), (0.0, 1.0)], 2).map(|(_, x)| x).collect();
        assert_eq!(
            pts,
            vec![vec![0.0, 0.0], vec![0.0, 1.0], vec![1.0, 0.0], vec![1.0, 1.0]]
        );
    }
}
