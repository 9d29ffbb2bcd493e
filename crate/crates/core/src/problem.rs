//! `minimize f(x) subject to h(x) ∈ K`.

use thiserror::Error;

use crate::cones::{Cone, ConeError};
use crate::expr::{self, EvalError, Expr, ParseError};
use crate::linalg::Matrix;

/// Largest `dist(h(x̄), K)` accepted for a point declared feasible.
pub const FEASIBILITY_TOL: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ProblemError {
    #[error("{which}: {source}")]
    Parse {
        which: String,
        #[source]
        source: ParseError,
    },
    #[error("{constraints} constraint expressions for a cone of dimension {cone_dim}")]
    ConstraintCount { constraints: usize, cone_dim: usize },
    #[error("{what} has dimension {got}, expected {expected}")]
    Dimension {
        what: &'static str,
        expected: usize,
        got: usize,
    },
    #[error("expression parsed under dimension {got}, problem has n = {expected}")]
    ExprDimension { expected: usize, got: usize },
    #[error("known solution is infeasible: dist(h(x), K) = {dist:e}")]
    InfeasibleSolution { dist: f64 },
    #[error(transparent)]
    Cone(#[from] ConeError),
    #[error(transparent)]
    Eval(#[from] EvalError),
}

#[derive(Debug, Clone)]
pub struct Problem {
    name: String,
    n: usize,
    objective: Expr,
    constraints: Vec<Expr>,
    cone: Cone,
    known_solution: Option<Vec<f64>>,
    known_multiplier: Option<Vec<f64>>,
}

impl Problem {
    pub fn new(
        name: impl Into<String>,
        objective: Expr,
        constraints: Vec<Expr>,
        cone: Cone,
    ) -> Result<Self, ProblemError> {
        cone.validate()?;
        let n = objective.dim();
        if let Some(bad) = constraints.iter().find(|c| c.dim() != n) {
            return Err(ProblemError::ExprDimension {
                expected: n,
                got: bad.dim(),
            });
        }
        if constraints.len() != cone.dim() {
            return Err(ProblemError::ConstraintCount {
                constraints: constraints.len(),
                cone_dim: cone.dim(),
            });
        }
        Ok(Problem {
            name: name.into(),
            n,
            objective,
            constraints,
            cone,
            known_solution: None,
            known_multiplier: None,
        })
    }

    /// Parses the objective and constraint texts under dimension `n`.
    pub fn parse(
        name: impl Into<String>,
        n: usize,
        objective: &str,
        constraints: &[&str],
        cone: Cone,
    ) -> Result<Self, ProblemError> {
        let objective = Expr::parse(objective, n).map_err(|source| ProblemError::Parse {
            which: "objective".into(),
            source,
        })?;
        let constraints = constraints
            .iter()
            .enumerate()
            .map(|(i, text)| {
                Expr::parse(text, n).map_err(|source| ProblemError::Parse {
                    which: format!("constraint {}", i + 1),
                    source,
                })
            })
            .collect::<Result<Vec<_>, _>>()?;
        Problem::new(name, objective, constraints, cone)
    }

    /// Records a known local solution; it must satisfy `h(x̄) ∈ K` to 1e-8.
    pub fn with_known_solution(mut self, x: Vec<f64>) -> Result<Self, ProblemError> {
        self.check_point(&x, "known solution")?;
        let dist = self.constraint_violation(&x)?;
        if dist > FEASIBILITY_TOL {
            return Err(ProblemError::InfeasibleSolution { dist });
        }
        self.known_solution = Some(x);
        Ok(self)
    }

    pub fn with_known_multiplier(mut self, lambda: Vec<f64>) -> Result<Self, ProblemError> {
        if lambda.len() != self.cone.dim() {
            return Err(ProblemError::Dimension {
                what: "known multiplier",
                expected: self.cone.dim(),
                got: lambda.len(),
            });
        }
        self.known_multiplier = Some(lambda);
        Ok(self)
    }

    pub fn check_point(&self, x: &[f64], what: &'static str) -> Result<(), ProblemError> {
        if x.len() != self.n {
            return Err(ProblemError::Dimension {
                what,
                expected: self.n,
                got: x.len(),
            });
        }
        Ok(())
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Embedded dimension of `Y`.
    pub fn m(&self) -> usize {
        self.constraints.len()
    }

    pub fn objective(&self) -> &Expr {
        &self.objective
    }

    pub fn constraints(&self) -> &[Expr] {
        &self.constraints
    }

    pub fn cone(&self) -> &Cone {
        &self.cone
    }

    pub fn known_solution(&self) -> Option<&[f64]> {
        self.known_solution.as_deref()
    }

    pub fn known_multiplier(&self) -> Option<&[f64]> {
        self.known_multiplier.as_deref()
    }

    pub fn f(&self, x: &[f64]) -> Result<f64, EvalError> {
        self.objective.eval(x)
    }

    pub fn f_and_grad(&self, x: &[f64]) -> Result<(f64, Vec<f64>), EvalError> {
        self.objective.value_and_grad(x)
    }

    pub fn h(&self, x: &[f64]) -> Result<Vec<f64>, EvalError> {
        expr::eval_all(&self.constraints, x)
    }

    /// `h(x)` and its `m × n` Jacobian.
    pub fn h_and_jac(&self, x: &[f64]) -> Result<(Vec<f64>, Matrix), EvalError> {
        if self.constraints.is_empty() {
            return Ok((Vec::new(), Matrix::zeros(0, x.len())));
        }
        expr::values_and_jacobian(&self.constraints, x)
    }

    /// `dist(h(x), K)`
    pub fn constraint_violation(&self, x: &[f64]) -> Result<f64, ProblemError> {
        let hx = self.h(x)?;
        Ok(self.cone.dist_to_cone(&hx)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn construction_checks() {
        let p = Problem::parse("c", 2, "x1+x2", &["x1^2+x2^2-2"], Cone::Zero(1)).unwrap();
        assert_eq!((p.n(), p.m()), (2, 1));
        assert!(p.clone().with_known_solution(vec![-1.0, -1.0]).is_ok());
        assert!(matches!(
            p.clone().with_known_solution(vec![0.0, 0.0]),
            Err(ProblemError::InfeasibleSolution { .. })
        ));
        assert!(p.clone().with_known_multiplier(vec![0.5, 1.0]).is_err());

        assert!(matches!(
            Problem::parse("c", 2, "x1", &["x1", "x2"], Cone::Zero(1)),
            Err(ProblemError::ConstraintCount { constraints: 2, cone_dim: 1 })
        ));
        let err = Problem::parse("c", 1, "x1", &["x1 +"], Cone::Zero(1)).unwrap_err();
        assert_eq!(err.to_string(), "constraint 1: syntax error: unexpected end of input at offset 4");
    }

    #[test]
    fn unconstrained_problem_has_empty_jacobian() {
        let p = Problem::parse("u", 2, "x1^2", &[], Cone::Zero(0)).unwrap();
        let (h, j) = p.h_and_jac(&[1.0, 2.0]).unwrap();
        assert!(h.is_empty());
        assert_eq!((j.rows(), j.cols()), (0, 2));
        assert_eq!(p.constraint_violation(&[1.0, 2.0]).unwrap(), 0.0);
    }
}
