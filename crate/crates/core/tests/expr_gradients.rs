use conic_multipliers::expr::random::random_expr;
use conic_multipliers::expr::{finite_difference_grad, jacobian};
use conic_multipliers::Expr;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn rel_err(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs() / x.abs().max(1.0))
        .fold(0.0, f64::max)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn random_expressions_match_central_differences(
        seed in any::<u64>(),
        dim in 1usize..=4,
        depth in 1usize..=4,
        x in prop::collection::vec(-2.0..2.0f64, 4),
    ) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let e = random_expr(&mut rng, dim, depth);
        let x = &x[..dim];
        let g = e.grad(x).unwrap();
        let fd = finite_difference_grad(|y| e.eval(y), x, 1e-6).unwrap();
        prop_assert!(rel_err(&g, &fd) <= 1e-5, "{} at {:?}: {:?} vs {:?}", e, x, g, fd);

        // printing and re-parsing preserves the function
        let back = Expr::parse(&e.to_string(), dim).unwrap();
        prop_assert_eq!(back.eval(x).unwrap().to_bits(), e.eval(x).unwrap().to_bits());
    }

    #[test]
    fn gradient_is_linear_in_the_expression(
        a in -3.0..3.0f64,
        x in prop::collection::vec(-2.0..2.0f64, 2),
    ) {
        let f = Expr::parse("sin(x1)*x2 + exp(x2/3)", 2).unwrap();
        let g = Expr::parse("x1^3 - log(1 + x2^2)", 2).unwrap();
        let sum = Expr::parse(&format!("{a} * (sin(x1)*x2 + exp(x2/3)) + (x1^3 - log(1 + x2^2))"), 2).unwrap();
        let (gf, gg, gs) = (f.grad(&x).unwrap(), g.grad(&x).unwrap(), sum.grad(&x).unwrap());
        for j in 0..2 {
            prop_assert!((gs[j] - (a * gf[j] + gg[j])).abs() <= 1e-12 * (1.0 + gs[j].abs()));
        }
    }
}

#[test]
fn jacobian_rows_are_gradients() {
    let exprs = vec![
        Expr::parse("x1*x2*x3", 3).unwrap(),
        Expr::parse("sqrt(1 + x1^2) - x3", 3).unwrap(),
    ];
    let x = [0.3, -1.2, 2.0];
    let j = jacobian(&exprs, &x).unwrap();
    for (i, e) in exprs.iter().enumerate() {
        assert_eq!(j.row(i), e.grad(&x).unwrap().as_slice());
    }
}
