//! Scalar expressions over `x1..xn` with exact first derivatives.
//!
//! Expressions are parsed once into an immutable tree and evaluated with
//! [`Dual`] numbers; a gradient costs one forward pass per coordinate.

mod dual;
mod parse;
pub mod random;

use std::fmt;

use thiserror::Error;

pub use dual::Dual;

use crate::linalg::Matrix;

/// Smooth intrinsic functions accepted by the grammar.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Func {
    Sin,
    Cos,
    Exp,
    Log,
    Sqrt,
}

impl Func {
    pub fn from_name(name: &str) -> Option<Func> {
        Some(match name {
            "sin" => Func::Sin,
            "cos" => Func::Cos,
            "exp" => Func::Exp,
            "log" => Func::Log,
            "sqrt" => Func::Sqrt,
            _ => return None,
        })
    }

    pub fn name(self) -> &'static str {
        match self {
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Exp => "exp",
            Func::Log => "log",
            Func::Sqrt => "sqrt",
        }
    }
}

/// Expression tree node. Variables are stored zero-based.
#[derive(Debug, Clone, PartialEq)]
pub enum Node {
    Const(f64),
    Var(usize),
    Add(Box<Node>, Box<Node>),
    Sub(Box<Node>, Box<Node>),
    Mul(Box<Node>, Box<Node>),
    Div(Box<Node>, Box<Node>),
    Pow(Box<Node>, Box<Node>),
    Neg(Box<Node>),
    Call(Func, Box<Node>),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ParseErrorKind {
    UnexpectedEnd,
    UnexpectedChar(char),
    Expected(char),
    InvalidNumber,
    UnknownIdentifier(String),
    VariableOutOfRange { index: usize, dim: usize },
    ZeroDimension,
}

/// A parse failure with the byte offset where it was detected.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{kind} at offset {offset}")]
pub struct ParseError {
    pub kind: ParseErrorKind,
    pub offset: usize,
}

impl fmt::Display for ParseErrorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ParseErrorKind::UnexpectedEnd => write!(f, "syntax error: unexpected end of input"),
            ParseErrorKind::UnexpectedChar(c) => write!(f, "syntax error: unexpected '{c}'"),
            ParseErrorKind::Expected(c) => write!(f, "syntax error: expected '{c}'"),
            ParseErrorKind::InvalidNumber => write!(f, "syntax error: invalid number"),
            ParseErrorKind::UnknownIdentifier(name) => write!(f, "unknown identifier '{name}'"),
            ParseErrorKind::VariableOutOfRange { index, dim } => {
                write!(f, "variable x{index} out of range for dimension {dim}")
            }
            ParseErrorKind::ZeroDimension => write!(f, "dimension must be at least 1"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EvalError {
    #[error("point has dimension {got}, expected {expected}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("domain error: {func} undefined at {arg}")]
    Domain { func: &'static str, arg: f64 },
    #[error("domain error: division by zero")]
    DivisionByZero,
    #[error("domain error: {op} produced a non-finite result")]
    NonFinite { op: &'static str },
}

/// A parsed expression together with the dimension it was parsed under.
#[derive(Debug, Clone, PartialEq)]
pub struct Expr {
    root: Node,
    dim: usize,
}

impl Expr {
    pub fn parse(text: &str, dim: usize) -> Result<Expr, ParseError> {
        if dim == 0 {
            return Err(ParseError {
                kind: ParseErrorKind::ZeroDimension,
                offset: 0,
            });
        }
        let root = parse::parse_node(text, dim)?;
        Ok(Expr { root, dim })
    }

    /// Wraps an already built tree. Fails if a variable exceeds `dim`.
    pub fn from_node(root: Node, dim: usize) -> Result<Expr, ParseError> {
        let max = max_var(&root);
        if dim == 0 || max.is_some_and(|m| m >= dim) {
            return Err(ParseError {
                kind: ParseErrorKind::VariableOutOfRange {
                    index: max.map_or(0, |m| m + 1),
                    dim,
                },
                offset: 0,
            });
        }
        Ok(Expr { root, dim })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn root(&self) -> &Node {
        &self.root
    }

    fn check_dim(&self, x: &[f64]) -> Result<(), EvalError> {
        if x.len() != self.dim {
            return Err(EvalError::DimensionMismatch {
                expected: self.dim,
                got: x.len(),
            });
        }
        Ok(())
    }

    pub fn eval(&self, x: &[f64]) -> Result<f64, EvalError> {
        self.check_dim(x)?;
        Ok(eval_node(&self.root, x, None)?.value)
    }

    /// Value and directional derivative along coordinate `seed`.
    pub fn eval_dual(&self, x: &[f64], seed: usize) -> Result<Dual, EvalError> {
        self.check_dim(x)?;
        eval_node(&self.root, x, Some(seed))
    }

    pub fn grad(&self, x: &[f64]) -> Result<Vec<f64>, EvalError> {
        self.value_and_grad(x).map(|(_, g)| g)
    }

    pub fn value_and_grad(&self, x: &[f64]) -> Result<(f64, Vec<f64>), EvalError> {
        self.check_dim(x)?;
        let mut value = 0.0;
        let mut grad = Vec::with_capacity(self.dim);
        for j in 0..self.dim {
            let d = eval_node(&self.root, x, Some(j))?;
            value = d.value;
            grad.push(d.derivative);
        }
        Ok((value, grad))
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.root)
    }
}

/// Fully parenthesised; parsing the output reproduces the same tree.
impl fmt::Display for Node {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Node::Const(c) => write!(f, "{c:e}"),
            Node::Var(i) => write!(f, "x{}", i + 1),
            Node::Add(a, b) => write!(f, "({a} + {b})"),
            Node::Sub(a, b) => write!(f, "({a} - {b})"),
            Node::Mul(a, b) => write!(f, "({a} * {b})"),
            Node::Div(a, b) => write!(f, "({a} / {b})"),
            Node::Pow(a, b) => write!(f, "({a} ^ {b})"),
            Node::Neg(a) => write!(f, "(-{a})"),
            Node::Call(func, a) => write!(f, "{}({a})", func.name()),
        }
    }
}

fn max_var(node: &Node) -> Option<usize> {
    match node {
        Node::Const(_) => None,
        Node::Var(i) => Some(*i),
        Node::Add(a, b) | Node::Sub(a, b) | Node::Mul(a, b) | Node::Div(a, b) | Node::Pow(a, b) => {
            max_var(a).max(max_var(b))
        }
        Node::Neg(a) | Node::Call(_, a) => max_var(a),
    }
}

fn eval_node(node: &Node, x: &[f64], seed: Option<usize>) -> Result<Dual, EvalError> {
    let out = match node {
        Node::Const(c) => Dual::constant(*c),
        Node::Var(i) => {
            if seed == Some(*i) {
                Dual::variable(x[*i])
            } else {
                Dual::constant(x[*i])
            }
        }
        Node::Add(a, b) => eval_node(a, x, seed)? + eval_node(b, x, seed)?,
        Node::Sub(a, b) => eval_node(a, x, seed)? - eval_node(b, x, seed)?,
        Node::Mul(a, b) => eval_node(a, x, seed)? * eval_node(b, x, seed)?,
        Node::Div(a, b) => {
            let num = eval_node(a, x, seed)?;
            let den = eval_node(b, x, seed)?;
            if den.value == 0.0 {
                return Err(EvalError::DivisionByZero);
            }
            num / den
        }
        Node::Pow(a, b) => {
            let base = eval_node(a, x, seed)?;
            let exponent = eval_node(b, x, seed)?;
            if exponent.derivative != 0.0 && base.value <= 0.0 {
                return Err(EvalError::Domain {
                    func: "pow with variable exponent",
                    arg: base.value,
                });
            }
            if base.value == 0.0 && exponent.value < 0.0 {
                return Err(EvalError::DivisionByZero);
            }
            if base.value < 0.0 && exponent.value.fract() != 0.0 {
                return Err(EvalError::Domain {
                    func: "pow with fractional exponent",
                    arg: base.value,
                });
            }
            base.pow(exponent)
        }
        Node::Neg(a) => -eval_node(a, x, seed)?,
        Node::Call(func, a) => {
            let arg = eval_node(a, x, seed)?;
            match func {
                Func::Sin => arg.sin(),
                Func::Cos => arg.cos(),
                Func::Exp => arg.exp(),
                Func::Log => {
                    if arg.value <= 0.0 {
                        return Err(EvalError::Domain {
                            func: "log",
                            arg: arg.value,
                        });
                    }
                    arg.ln()
                }
                Func::Sqrt => {
                    if arg.value < 0.0 || (arg.value == 0.0 && arg.derivative != 0.0) {
                        return Err(EvalError::Domain {
                            func: "sqrt",
                            arg: arg.value,
                        });
                    }
                    arg.sqrt()
                }
            }
        }
    };
    if !out.is_finite() {
        return Err(EvalError::NonFinite {
            op: node_op_name(node),
        });
    }
    Ok(out)
}

fn node_op_name(node: &Node) -> &'static str {
    match node {
        Node::Const(_) => "constant",
        Node::Var(_) => "variable",
        Node::Add(..) => "+",
        Node::Sub(..) => "-",
        Node::Mul(..) => "*",
        Node::Div(..) => "/",
        Node::Pow(..) => "^",
        Node::Neg(_) => "negation",
        Node::Call(func, _) => func.name(),
    }
}

/// Stacks the gradients of `exprs` at `x` into an `m × n` matrix.
pub fn jacobian(exprs: &[Expr], x: &[f64]) -> Result<Matrix, EvalError> {
    let mut jac = Matrix::zeros(exprs.len(), x.len());
    for (i, e) in exprs.iter().enumerate() {
        let g = e.grad(x)?;
        jac.row_mut(i).copy_from_slice(&g);
    }
    Ok(jac)
}

/// Values and Jacobian of a vector of expressions in one sweep.
pub fn values_and_jacobian(exprs: &[Expr], x: &[f64]) -> Result<(Vec<f64>, Matrix), EvalError> {
    let mut values = Vec::with_capacity(exprs.len());
    let mut jac = Matrix::zeros(exprs.len(), x.len());
    for (i, e) in exprs.iter().enumerate() {
        let (v, g) = e.value_and_grad(x)?;
        values.push(v);
        jac.row_mut(i).copy_from_slice(&g);
    }
    Ok((values, jac))
}

pub fn eval_all(exprs: &[Expr], x: &[f64]) -> Result<Vec<f64>, EvalError> {
    exprs.iter().map(|e| e.eval(x)).collect()
}

/// Central finite-difference gradient, used as an independent check on the
/// dual-number path.
pub fn finite_difference_grad(
    f: impl Fn(&[f64]) -> Result<f64, EvalError>,
    x: &[f64],
    step: f64,
) -> Result<Vec<f64>, EvalError> {
    let mut probe = x.to_vec();
    let mut grad = Vec::with_capacity(x.len());
    for j in 0..x.len() {
        probe[j] = x[j] + step;
        let fp = f(&probe)?;
        probe[j] = x[j] - step;
        let fm = f(&probe)?;
        probe[j] = x[j];
        grad.push((fp - fm) / (2.0 * step));
    }
    Ok(grad)
}
