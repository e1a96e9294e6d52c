//! Small dense helpers shared by the cone and certificate code.

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

pub fn norm_inf(a: &[f64]) -> f64 {
    a.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
}

pub fn scale(a: &[f64], s: f64) -> Vec<f64> {
    a.iter().map(|v| v * s).collect()
}

pub fn sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

pub fn add(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

/// Returns `a / |a|`, or `None` for (numerically) zero vectors.
pub fn normalized(a: &[f64]) -> Option<Vec<f64>> {
    let n = norm(a);
    if n <= 1e-300 || !n.is_finite() {
        None
    } else {
        Some(scale(a, 1.0 / n))
    }
}

/// `rows · v` for a row-major matrix.
pub fn mat_vec(rows: &[Vec<f64>], v: &[f64]) -> Vec<f64> {
    rows.iter().map(|r| dot(r, v)).collect()
}

/// `wᵀ · rows`, i.e. the weighted sum of rows.
pub fn vec_mat(w: &[f64], rows: &[Vec<f64>], cols: usize) -> Vec<f64> {
    let mut out = vec![0.0; cols];
    for (wi, row) in w.iter().zip(rows) {
        if *wi == 0.0 {
            continue;
        }
        for (o, r) in out.iter_mut().zip(row) {
            *o += wi * r;
        }
    }
    out
}

/// Quadratic form `uᵀ H u`.
pub fn quad_form(h: &[Vec<f64>], u: &[f64]) -> f64 {
    dot(u, &mat_vec(h, u))
}

/// Row-reduces a copy of `rows` and returns (rank, reduced rows, pivot columns).
fn row_reduce(rows: &[Vec<f64>], cols: usize, tol: f64) -> (usize, Vec<Vec<f64>>, Vec<usize>) {
    let mut m: Vec<Vec<f64>> = rows.to_vec();
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        if r == m.len() {
            break;
        }
        let (best, best_val) =
            (r..m.len())
                .map(|i| (i, m[i][c].abs()))
                .fold((r, -1.0), |acc, x| if x.1 > acc.1 { x } else { acc });
        if best_val <= tol {
            continue;
        }
        m.swap(r, best);
        let p = m[r][c];
        for v in m[r].iter_mut() {
            *v /= p;
        }
        let pivot_row = m[r].clone();
        for (i, row) in m.iter_mut().enumerate() {
            if i != r && row[c] != 0.0 {
                let f = row[c];
                for (x, y) in row.iter_mut().zip(&pivot_row) {
                    *x -= f * y;
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    (r, m, pivots)
}

pub fn rank(rows: &[Vec<f64>], cols: usize, tol: f64) -> usize {
    row_reduce(rows, cols, tol).0
}

/// Basis of the null space of `rows` (each row has `cols` entries).
pub fn null_space(rows: &[Vec<f64>], cols: usize, tol: f64) -> Vec<Vec<f64>> {
    let (rank, m, pivots) = row_reduce(rows, cols, tol);
    let free: Vec<usize> = (0..cols).filter(|c| !pivots.contains(c)).collect();
    free.iter()
        .map(|&fc| {
            let mut v = vec![0.0; cols];
            v[fc] = 1.0;
            for (r, &pc) in pivots.iter().enumerate().take(rank) {
                v[pc] = -m[r][fc];
            }
            v
        })
        .collect()
}

/// Orthonormal basis of the row space of `rows` (modified Gram-Schmidt).
pub fn orthonormal_row_basis(rows: &[Vec<f64>], tol: f64) -> Vec<Vec<f64>> {
    let mut basis: Vec<Vec<f64>> = Vec::new();
    for row in rows {
        let mut v = row.clone();
        for _ in 0..2 {
            for b in &basis {
                let c = dot(&v, b);
                for (x, y) in v.iter_mut().zip(b) {
                    *x -= c * y;
                }
            }
        }
        let n = norm(&v);
        let scale_ref = norm(row).max(1.0);
        if n > tol * scale_ref {
            basis.push(scale(&v, 1.0 / n));
        }
    }
    basis
}

/// Orthonormal basis of the orthogonal complement of span(`basis`) in R^dim,
/// assuming `basis` is orthonormal.
pub fn orthogonal_complement(basis: &[Vec<f64>], dim: usize, tol: f64) -> Vec<Vec<f64>> {
    let mut all: Vec<Vec<f64>> = basis.to_vec();
    let start = all.len();
    for i in 0..dim {
        let mut e = vec![0.0; dim];
        e[i] = 1.0;
        for _ in 0..2 {
            for b in &all {
                let c = dot(&e, b);
                for (x, y) in e.iter_mut().zip(b) {
                    *x -= c * y;
                }
            }
        }
        let n = norm(&e);
        if n > tol {
            all.push(scale(&e, 1.0 / n));
        }
    }
    all.split_off(start)
}
