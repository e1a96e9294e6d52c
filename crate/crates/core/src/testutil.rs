//! Small problems shared by unit tests.

use crate::parser::parse;
use crate::problem::VectorProblem;

pub const E1: &str = "vars x; objective [x]; constraint [-x]; coneC orthant(1); coneK orthant(1)";
pub const E2: &str = "vars x, y; objective [x, y]; constraint [1 - x - y]; coneC orthant(2); coneK orthant(1)";
pub const E3: &str = "vars x; objective [x]; constraint [x^2]; coneC orthant(1); coneK orthant(1)";
pub const E6: &str = "vars x; objective [x^2]; constraint [-1]; coneC orthant(1); coneK orthant(1)";
pub const SADDLE: &str = "vars x; objective [-x^2]; constraint [x^2 - 1]; coneC orthant(1); coneK orthant(1)";
pub const CUBIC: &str = "vars x; objective [x^3]; constraint [-x]; coneC orthant(1); coneK orthant(1); box [[-1, 1]]";

pub fn problem(text: &str) -> VectorProblem {
    parse(text).unwrap_or_else(|e| panic!("{text}: {e}"))
}
