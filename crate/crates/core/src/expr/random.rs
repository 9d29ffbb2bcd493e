//! Seeded generator of random smooth expressions, used by the gradient
//! test battery.
//!
//! Partial functions only ever see arguments bounded away from their
//! singularities (`log(1 + u^2)`, `a / (1 + u^2)`, ...), so every generated
//! expression is differentiable everywhere.

use rand::Rng;

use super::{Expr, Func, Node};

/// Builds a random expression over `dim` variables with at most `depth`
/// levels of nesting.
pub fn random_expr<R: Rng + ?Sized>(rng: &mut R, dim: usize, depth: usize) -> Expr {
    let node = random_node(rng, dim, depth);
    Expr::from_node(node, dim).expect("generator only emits in-range variables")
}

fn leaf<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> Node {
    if rng.random_bool(0.7) {
        Node::Var(rng.random_range(0..dim))
    } else {
        // Parsed trees never hold negative literals; keep the sign outside.
        let c = (rng.random_range(0.0..2.0f64) * 100.0).round() / 100.0;
        if rng.random_bool(0.5) {
            Node::Neg(Box::new(Node::Const(c)))
        } else {
            Node::Const(c)
        }
    }
}

fn one_plus_square(u: Node) -> Node {
    Node::Add(
        Box::new(Node::Const(1.0)),
        Box::new(Node::Pow(Box::new(u), Box::new(Node::Const(2.0)))),
    )
}

fn random_node<R: Rng + ?Sized>(rng: &mut R, dim: usize, depth: usize) -> Node {
    if depth == 0 || rng.random_bool(0.2) {
        return leaf(rng, dim);
    }
    let sub = |rng: &mut R| Box::new(random_node(rng, dim, depth - 1));
    match rng.random_range(0..11) {
        0 => Node::Add(sub(rng), sub(rng)),
        1 => Node::Sub(sub(rng), sub(rng)),
        2 | 3 => Node::Mul(sub(rng), sub(rng)),
        4 => Node::Div(sub(rng), Box::new(one_plus_square(random_node(rng, dim, depth - 1)))),
        5 => {
            let power = rng.random_range(2..=3) as f64;
            Node::Pow(sub(rng), Box::new(Node::Const(power)))
        }
        6 => Node::Neg(sub(rng)),
        7 => Node::Call(Func::Sin, sub(rng)),
        8 => Node::Call(Func::Cos, sub(rng)),
        9 => Node::Call(Func::Exp, Box::new(Node::Call(Func::Sin, sub(rng)))),
        _ => {
            let inner = one_plus_square(random_node(rng, dim, depth - 1));
            if rng.random_bool(0.5) {
                Node::Call(Func::Log, Box::new(inner))
            } else {
                Node::Call(Func::Sqrt, Box::new(inner))
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn generated_expressions_are_evaluable_and_reparse() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..200 {
            let dim = rng.random_range(1..=4);
            let e = random_expr(&mut rng, dim, 4);
            let x: Vec<f64> = (0..dim).map(|_| rng.random_range(-1.5..1.5)).collect();
            e.grad(&x).unwrap();
            assert_eq!(Expr::parse(&e.to_string(), dim).unwrap(), e);
        }
    }
}
