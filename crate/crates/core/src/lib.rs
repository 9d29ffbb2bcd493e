//! Conic-constrained optimization through the quadratic penalty method.
//!
//! * [`expr`] parses objective and constraint expressions and differentiates
//!   them with dual numbers.
//! * [`cones`] projects onto closed convex cones and their polars.
//! * [`penalty`] builds the penalized subproblems, minimizes them and
//!   recovers multiplier estimates `λᵏ = k·Π_{K°}(h(xᵏ))`.
//! * [`kkt`] measures the conic KKT residuals and checks constraint
//!   regularity.

pub mod cones;
pub mod expr;
pub mod kkt;
pub mod linalg;
pub mod penalty;
pub mod problem;

pub use cones::{Cone, ConeError};
pub use expr::{EvalError, Expr, ParseError};
pub use kkt::{KktReport, RegularityReport};
pub use penalty::{Problem, SolverConfig};
