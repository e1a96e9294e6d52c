//! Corpus loading and small helpers shared by the integration tests.
#![allow(dead_code)]

use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use vopt::lp::{solve, LinearProgram, LpStatus, VarBound};
use vopt::{parser, PolyhedralCone, VectorProblem};

pub struct Entry {
    pub name: String,
    pub path: PathBuf,
    pub text: String,
    pub problem: VectorProblem,
    pub minimizers: Vec<Vec<f64>>,
    /// Planted non-minimizers with the order (1 or 2) that should refute them.
    pub refutations: Vec<(Vec<f64>, u8)>,
}

pub fn corpus_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/corpus")
}

fn point(text: &str) -> Vec<f64> {
    text.split(',').map(|v| v.trim().parse().unwrap()).collect()
}

/// Every `.vopt` file in the corpus, sorted by name. Header comments list
/// `# minimizers: a,b | c,d` and `# refute: a,b first|second`.
pub fn corpus() -> Vec<Entry> {
    let mut paths: Vec<PathBuf> = std::fs::read_dir(corpus_dir())
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|e| e == "vopt"))
        .collect();
    paths.sort();
    paths
        .into_iter()
        .map(|path| {
            let text = std::fs::read_to_string(&path).unwrap();
            let problem = parser::parse(&text).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
            let mut minimizers = Vec::new();
            let mut refutations = Vec::new();
            for line in text.lines() {
                if let Some(rest) = line.strip_prefix("# minimizers:") {
                    minimizers.extend(rest.split('|').map(point));
                } else if let Some(rest) = line.strip_prefix("# refute:") {
                    let (p, order) = rest.trim().split_once(' ').unwrap();
                    let order = match order.trim() {
                        "first" => 1,
                        "second" => 2,
                        other => panic!("bad refute order {other}"),
                    };
                    refutations.push((point(p), order));
                }
            }
            Entry {
                name: path.file_stem().unwrap().to_string_lossy().into_owned(),
                path,
                text,
                problem,
                minimizers,
                refutations,
            }
        })
        .collect()
}

pub fn entry(name: &str) -> Entry {
    corpus()
        .into_iter()
        .find(|e| e.name == name)
        .unwrap_or_else(|| panic!("no corpus entry {name}"))
}

/// A random pointed full-dimensional cone: `count` generators clustered
/// around a random axis.
pub fn random_cone(rng: &mut ChaCha8Rng, dim: usize, count: usize) -> (Vec<Vec<f64>>, PolyhedralCone) {
    loop {
        let axis = unit(rng, dim);
        let gens: Vec<Vec<f64>> = (0..count)
            .map(|_| {
                let w = unit(rng, dim);
                axis.iter().zip(&w).map(|(a, b)| a + 0.9 * b).collect()
            })
            .filter(|g: &Vec<f64>| g.iter().zip(&axis).map(|(a, b)| a * b).sum::<f64>() > 0.1)
            .collect();
        if gens.len() < dim {
            continue;
        }
        if let Ok(c) = PolyhedralCone::from_generators(dim, &gens) {
            return (gens, c);
        }
    }
}

pub fn unit(rng: &mut ChaCha8Rng, dim: usize) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..dim).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if n > 0.1 && n <= 1.0 {
            return v.iter().map(|x| x / n).collect();
        }
    }
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Whether `g` is a nonnegative combination of `others`, decided by an LP.
pub fn in_conic_hull(g: &[f64], others: &[Vec<f64>]) -> bool {
    if others.is_empty() {
        return false;
    }
    let mut lp = LinearProgram::new(others.len());
    for i in 0..g.len() {
        lp.eq(others.iter().map(|o| o[i]).collect(), g[i]);
    }
    solve(&lp).unwrap().status == LpStatus::Optimal
}

/// Largest `s` with `x = Σ cᵢ gᵢ`, `cᵢ ≥ s`, capped at 1; `None` if `x` is
/// outside the cone.
pub fn interior_depth(x: &[f64], gens: &[Vec<f64>]) -> Option<f64> {
    let k = gens.len();
    let mut obj = vec![0.0; k + 1];
    obj[k] = 1.0;
    let mut lp = LinearProgram::new(k + 1).maximize(obj);
    lp.bounds[k] = VarBound::Free;
    for i in 0..x.len() {
        let mut row: Vec<f64> = gens.iter().map(|g| g[i]).collect();
        row.push(0.0);
        lp.eq(row, x[i]);
    }
    for j in 0..k {
        let mut row = vec![0.0; k + 1];
        row[j] = 1.0;
        row[k] = -1.0;
        lp.ge(row, 0.0);
    }
    let mut cap = vec![0.0; k + 1];
    cap[k] = 1.0;
    lp.le(cap, 1.0);
    let out = solve(&lp).unwrap();
    (out.status == LpStatus::Optimal).then_some(out.objective)
}

/// Same ray sets up to permutation after unit normalization.
pub fn same_rays(a: &[Vec<f64>], b: &[Vec<f64>], tol: f64) -> bool {
    let norm = |v: &Vec<f64>| {
        let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        v.iter().map(|x| x / n).collect::<Vec<f64>>()
    };
    let a: Vec<_> = a.iter().map(norm).collect();
    let b: Vec<_> = b.iter().map(norm).collect();
    let close = |p: &Vec<f64>, q: &Vec<f64>| p.iter().zip(q).all(|(x, y)| (x - y).abs() <= tol);
    a.len() == b.len()
        && a.iter().all(|p| b.iter().any(|q| close(p, q)))
        && b.iter().all(|p| a.iter().any(|q| close(p, q)))
}

/// Uniform sample from the cube of half-width `r` around `c`, clipped to `bounds`.
pub fn near(rng: &mut ChaCha8Rng, c: &[f64], r: f64, bounds: Option<&[(f64, f64)]>) -> Vec<f64> {
    c.iter()
        .enumerate()
        .map(|(i, v)| {
            let y = v + rng.gen_range(-r..=r);
            match bounds {
                Some(b) => y.clamp(b[i].0, b[i].1),
                None => y,
            }
        })
        .collect()
}
