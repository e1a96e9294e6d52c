//! Certification and falsification of first- and second-order
//! Fritz John conditions for cone-constrained vector optimization problems.
//!
//! ```text
//!     minimize f(x) with respect to C   subject to g(x) ∈ −K,  x ∈ X
//! ```
//!
//! `C` and `K` are pointed, full-dimensional polyhedral cones. Multiplier
//! searches reduce to small linear programs over the extreme rays of the
//! polar cones `C*` and `K*`.

pub mod certificates;
pub mod cli;
pub mod cone;
pub mod deriv;
pub mod error;
pub mod expr;
pub mod linalg;
pub mod lp;
pub mod oracle;
pub mod parser;
pub mod problem;
pub mod report;
pub mod sufficiency;

#[cfg(test)]
mod testutil;

pub use cone::{PolarCone, PolyhedralCone};
pub use error::{Error, Result};
pub use expr::Expr;
pub use problem::{EvaluatedPoint, ExprMap, Order, Tolerances, VectorProblem};
