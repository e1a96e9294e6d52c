//! Polyhedral cones in double representation.
//!
//! Every [`PolyhedralCone`] carries both its extreme rays (`generators`) and
//! its irredundant facet normals (`halfspace_normals`), all scaled to unit
//! Euclidean length and sorted lexicographically. Only pointed,
//! full-dimensional cones can be constructed; under that restriction the
//! facet normals are exactly the extreme rays of the polar cone, so polars
//! and interior tests are finite computations.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{dot, norm, normalized, null_space, rank};

/// Default tolerance for membership and strict-inequality tests.
pub const DEFAULT_TOL: f64 = 1e-9;

const RANK_TOL: f64 = 1e-10;
const DEDUP_TOL: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolyhedralCone {
    ambient_dim: usize,
    generators: Vec<Vec<f64>>,
    halfspace_normals: Vec<Vec<f64>>,
}

/// The polar `C* = {λ | λ·x ≥ 0 ∀x ∈ C}` has the same representation.
pub type PolarCone = PolyhedralCone;

impl PolyhedralCone {
    /// The nonnegative orthant of R^d. It is self-polar.
    pub fn orthant(dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::DegenerateCone("orthant of dimension 0".into()));
        }
        let eye: Vec<Vec<f64>> = (0..dim)
            .map(|i| {
                let mut e = vec![0.0; dim];
                e[i] = 1.0;
                e
            })
            .collect();
        let mut generators = eye.clone();
        sort_rays(&mut generators);
        Ok(Self {
            ambient_dim: dim,
            halfspace_normals: generators.clone(),
            generators,
        })
    }

    /// Conic hull of `generators`. Redundant generators are dropped.
    pub fn from_generators(dim: usize, generators: &[Vec<f64>]) -> Result<Self> {
        check_vectors(dim, generators, "cone generator")?;
        let normals = extreme_rays(generators)
            .map_err(|e| relabel(e, "generators do not span the ambient space or the cone is not pointed"))?;
        let rays = extreme_rays(&normals)?;
        Ok(Self {
            ambient_dim: dim,
            generators: rays,
            halfspace_normals: normals,
        })
    }

    /// `{x | h·x ≥ 0 for every h in normals}`. Redundant normals are dropped.
    pub fn from_halfspaces(dim: usize, normals: &[Vec<f64>]) -> Result<Self> {
        check_vectors(dim, normals, "halfspace normal")?;
        let rays = extreme_rays(normals)?;
        let facets = extreme_rays(&rays)?;
        Ok(Self {
            ambient_dim: dim,
            generators: rays,
            halfspace_normals: facets,
        })
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient_dim
    }

    pub fn generators(&self) -> &[Vec<f64>] {
        &self.generators
    }

    pub fn halfspace_normals(&self) -> &[Vec<f64>] {
        &self.halfspace_normals
    }

    /// Extreme rays of the polar cone, i.e. the facet normals of this cone.
    pub fn polar_rays(&self) -> &[Vec<f64>] {
        &self.halfspace_normals
    }

    /// Smallest value of `h·x` over the facet normals.
    pub fn min_margin(&self, x: &[f64]) -> Result<f64> {
        self.check_dim(x)?;
        Ok(self
            .halfspace_normals
            .iter()
            .map(|h| dot(h, x))
            .fold(f64::INFINITY, f64::min))
    }

    pub fn contains(&self, x: &[f64]) -> Result<bool> {
        self.contains_tol(x, DEFAULT_TOL)
    }

    pub fn contains_tol(&self, x: &[f64], tol: f64) -> Result<bool> {
        Ok(self.min_margin(x)? >= -tol)
    }

    /// Interior test: strictly positive against every extreme ray of the polar.
    pub fn interior_contains(&self, x: &[f64]) -> Result<bool> {
        self.interior_contains_tol(x, DEFAULT_TOL)
    }

    pub fn interior_contains_tol(&self, x: &[f64], tol: f64) -> Result<bool> {
        Ok(self.min_margin(x)? > tol)
    }

    pub fn polar(&self) -> Result<PolarCone> {
        polar(self)
    }

    /// Whether this cone is the nonnegative orthant (up to `tol`).
    pub fn is_orthant(&self, tol: f64) -> bool {
        Self::orthant(self.ambient_dim)
            .map(|o| self.approx_eq(&o, tol))
            .unwrap_or(false)
    }

    /// Equality of generator sets up to ordering, within `tol` per entry.
    pub fn approx_eq(&self, other: &Self, tol: f64) -> bool {
        self.ambient_dim == other.ambient_dim
            && same_ray_set(&self.generators, &other.generators, tol)
            && same_ray_set(&self.halfspace_normals, &other.halfspace_normals, tol)
    }

    fn check_dim(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.ambient_dim {
            return Err(Error::DimensionMismatch {
                expected: self.ambient_dim,
                actual: x.len(),
                context: "cone membership",
            });
        }
        Ok(())
    }
}

/// Polar cone. The facet normals of the result are the generators of `cone`
/// and its generators are recomputed as extreme rays of those halfspaces.
pub fn polar(cone: &PolyhedralCone) -> Result<PolarCone> {
    PolyhedralCone::from_halfspaces(cone.ambient_dim, &cone.generators)
}

/// Minimal generating set of `{x | h·x ≥ 0 ∀h ∈ normals}`.
///
/// Brute force over all (d−1)-subsets of normals: each subset of rank d−1
/// fixes a line, and whichever of its two directions satisfies every
/// inequality is an extreme ray. The number of subsets grows combinatorially,
/// which is fine for d ≤ 6 and a few dozen normals.
pub fn extreme_rays(normals: &[Vec<f64>]) -> Result<Vec<Vec<f64>>> {
    let Some(first) = normals.first() else {
        return Err(Error::DegenerateCone("empty halfspace list".into()));
    };
    let dim = first.len();
    check_vectors(dim, normals, "halfspace normal")?;
    let unit: Vec<Vec<f64>> = normals
        .iter()
        .map(|h| normalized(h).expect("checked nonzero"))
        .collect();

    if rank(&unit, dim, RANK_TOL) < dim {
        return Err(Error::DegenerateCone(
            "intersection contains a line (not pointed)".into(),
        ));
    }

    let feasible = |v: &[f64]| unit.iter().all(|h| dot(h, v) >= -DEFAULT_TOL);
    let mut rays: Vec<Vec<f64>> = Vec::new();
    let push = |v: Vec<f64>, rays: &mut Vec<Vec<f64>>| {
        if !rays.iter().any(|r| max_abs_diff(r, &v) < DEDUP_TOL) {
            rays.push(v);
        }
    };

    if dim == 1 {
        for v in [vec![1.0], vec![-1.0]] {
            if feasible(&v) {
                push(v, &mut rays);
            }
        }
    } else {
        for subset in Combinations::new(unit.len(), dim - 1) {
            let rows: Vec<Vec<f64>> = subset.iter().map(|&i| unit[i].clone()).collect();
            let ns = null_space(&rows, dim, RANK_TOL);
            if ns.len() != 1 {
                continue;
            }
            let Some(v) = normalized(&ns[0]) else { continue };
            let neg: Vec<f64> = v.iter().map(|x| -x).collect();
            for cand in [v, neg] {
                if feasible(&cand) {
                    push(cand, &mut rays);
                }
            }
        }
    }

    if rays.is_empty() {
        return Err(Error::DegenerateCone("intersection is {0}".into()));
    }
    // Full-dimensional iff the sum of extreme rays is strictly inside every halfspace.
    let center: Vec<f64> = (0..dim).map(|k| rays.iter().map(|r| r[k]).sum()).collect();
    if unit.iter().any(|h| dot(h, &center) <= DEFAULT_TOL) {
        return Err(Error::DegenerateCone("cone has empty interior".into()));
    }
    sort_rays(&mut rays);
    Ok(rays)
}

fn check_vectors(dim: usize, vs: &[Vec<f64>], context: &'static str) -> Result<()> {
    if dim == 0 {
        return Err(Error::DegenerateCone("ambient dimension 0".into()));
    }
    if vs.is_empty() {
        return Err(Error::DegenerateCone(format!("no {context}s given")));
    }
    for v in vs {
        if v.len() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                actual: v.len(),
                context,
            });
        }
        if v.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidArgument(format!("non-finite {context}")));
        }
        if norm(v) == 0.0 {
            return Err(Error::DegenerateCone(format!("zero {context}")));
        }
    }
    Ok(())
}

fn relabel(e: Error, msg: &str) -> Error {
    match e {
        Error::DegenerateCone(inner) => Error::DegenerateCone(format!("{msg}: {inner}")),
        other => other,
    }
}

fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).fold(0.0, |m, (x, y)| f64::max(m, (x - y).abs()))
}

fn sort_rays(rays: &mut [Vec<f64>]) {
    rays.sort_by(|a, b| {
        a.iter()
            .zip(b)
            .map(|(x, y)| x.total_cmp(y))
            .find(|o| o.is_ne())
            .unwrap_or(std::cmp::Ordering::Equal)
    });
}

fn same_ray_set(a: &[Vec<f64>], b: &[Vec<f64>], tol: f64) -> bool {
    a.len() == b.len()
        && a.iter().all(|r| b.iter().any(|q| max_abs_diff(r, q) <= tol))
        && b.iter().all(|r| a.iter().any(|q| max_abs_diff(r, q) <= tol))
}

/// Lexicographic k-subsets of 0..n.
pub(crate) struct Combinations {
    n: usize,
    idx: Vec<usize>,
    done: bool,
}

impl Combinations {
    pub(crate) fn new(n: usize, k: usize) -> Self {
        Self {
            n,
            idx: (0..k).collect(),
            done: k > n,
        }
    }
}

impl Iterator for Combinations {
    type Item = Vec<usize>;

    fn next(&mut self) -> Option<Vec<usize>> {
        if self.done {
            return None;
        }
        let out = self.idx.clone();
        let k = self.idx.len();
        let mut i = k;
        loop {
            if i == 0 {
                self.done = true;
                break;
            }
            i -= 1;
            if self.idx[i] < self.n - k + i {
                self.idx[i] += 1;
                for j in i + 1..k {
                    self.idx[j] = self.idx[j - 1] + 1;
                }
                break;
            }
        }
        Some(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const S: f64 = std::f64::consts::FRAC_1_SQRT_2;

    fn wedge() -> PolyhedralCone {
        PolyhedralCone::from_generators(2, &[vec![1.0, 0.0], vec![1.0, 1.0]]).unwrap()
    }

    #[test]
    fn orthant_is_self_polar() {
        let c = PolyhedralCone::orthant(2).unwrap();
        assert!(c.polar().unwrap().approx_eq(&c, 1e-12));
        let r1 = PolyhedralCone::orthant(1).unwrap();
        assert!(r1.polar().unwrap().approx_eq(&r1, 1e-12));
    }

    #[test]
    fn wedge_polar_matches_hand_enumeration() {
        // {λ₁ ≥ 0, λ₁ + λ₂ ≥ 0} has rays (0,1) and (1,−1)/√2.
        let p = wedge().polar().unwrap();
        let expected = vec![vec![0.0, 1.0], vec![S, -S]];
        assert!(same_ray_set(p.generators(), &expected, 1e-12));
        let direct = extreme_rays(&[vec![1.0, 0.0], vec![1.0, 1.0]]).unwrap();
        assert!(same_ray_set(&direct, &expected, 1e-12));
    }

    #[test]
    fn membership_examples() {
        let o = PolyhedralCone::orthant(2).unwrap();
        assert!(o.contains(&[1.0, 2.0]).unwrap());
        assert!(!o.contains(&[-1.0, 0.0]).unwrap());
        assert!(wedge().contains(&[2.0, 1.0]).unwrap());
        assert!(o.interior_contains(&[1.0, 1.0]).unwrap());
        assert!(!o.interior_contains(&[1.0, 0.0]).unwrap());
        assert!(wedge().interior_contains(&[2.0, 1.0]).unwrap());
    }

    #[test]
    fn dimension_mismatch_is_reported() {
        let o = PolyhedralCone::orthant(2).unwrap();
        assert!(matches!(o.contains(&[1.0]), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn orthant_rays_in_three_dimensions() {
        let eye = vec![vec![1.0, 0.0, 0.0], vec![0.0, 1.0, 0.0], vec![0.0, 0.0, 1.0]];
        assert_eq!(extreme_rays(&eye).unwrap(), {
            let mut e = eye.clone();
            sort_rays(&mut e);
            e
        });
    }

    #[test]
    fn degenerate_inputs_are_rejected() {
        // half-plane: contains a line
        assert!(matches!(extreme_rays(&[vec![1.0, 0.0]]), Err(Error::DegenerateCone(_))));
        // a ray in R²: empty interior
        assert!(PolyhedralCone::from_generators(2, &[vec![1.0, 0.0]]).is_err());
        // opposite halflines in R¹ meet in {0}
        assert!(extreme_rays(&[vec![1.0], vec![-1.0]]).is_err());
        // whole half-plane as generators is not pointed
        assert!(PolyhedralCone::from_generators(2, &[vec![1.0, 0.0], vec![-1.0, 0.0], vec![0.0, 1.0]]).is_err());
    }

    #[test]
    fn redundant_generators_are_dropped() {
        let c = PolyhedralCone::from_generators(2, &[vec![1.0, 0.0], vec![2.0, 1.0], vec![1.0, 1.0]]).unwrap();
        assert_eq!(c.generators().len(), 2);
        assert!(c.approx_eq(&wedge(), 1e-12));
    }

    #[test]
    fn combinations_enumerate_all_subsets() {
        let all: Vec<_> = Combinations::new(4, 2).collect();
        assert_eq!(all.len(), 6);
        assert_eq!(all[0], vec![0, 1]);
        assert_eq!(all[5], vec![2, 3]);
        assert_eq!(Combinations::new(3, 0).count(), 1);
    }
}
