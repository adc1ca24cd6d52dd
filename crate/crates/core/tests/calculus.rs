mod common;

use common::{arb_expr, arb_point, eval_at, rel_close};
use hfree_core::{parse, Expr};
use proptest::prelude::*;

const VARS: &[&str] = &["x", "y", "z"];

fn central_difference(e: &Expr, var: usize, point: &[f64], h: f64) -> f64 {
    let mut plus = point.to_vec();
    let mut minus = point.to_vec();
    plus[var] += h;
    minus[var] -= h;
    (eval_at(e, VARS, &plus) - eval_at(e, VARS, &minus)) / (2.0 * h)
}

fn finite(e: &Expr, point: &[f64]) -> bool {
    let margin = 1e-3;
    [-margin, 0.0, margin].iter().all(|d| {
        let shifted: Vec<f64> = point.iter().map(|v| v + d).collect();
        e.eval(common::env(VARS, &shifted).as_slice()).is_ok_and(|v| v.is_finite() && v.abs() < 1e8)
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn derivative_matches_central_difference(e in arb_expr(VARS, 4), p in arb_point(3), var in 0usize..3) {
        prop_assume!(finite(&e, &p));
        let d = e.diff(VARS[var]);
        let exact = eval_at(&d, VARS, &p);
        let approx = central_difference(&e, var, &p, 1e-5);
        prop_assert!(rel_close(exact, approx, 1e-6), "d/d{} {} at {:?}: {} vs {}", VARS[var], e, p, exact, approx);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn mixed_partials_commute(e in arb_expr(VARS, 3), p in arb_point(3)) {
        prop_assume!(finite(&e, &p));
        let xy = eval_at(&e.diff("x").diff("y"), VARS, &p);
        let yx = eval_at(&e.diff("y").diff("x"), VARS, &p);
        prop_assert!(rel_close(xy, yx, 1e-12), "{}: {} vs {}", e, xy, yx);
    }

    #[test]
    fn printing_round_trips(e in arb_expr(VARS, 4), p in arb_point(3)) {
        let shown = e.to_string();
        let back = parse(&shown).unwrap();
        prop_assert_eq!(back.to_string(), shown.clone());
        prop_assume!(finite(&e, &p));
        prop_assert!(rel_close(eval_at(&e, VARS, &p), eval_at(&back, VARS, &p), 1e-12), "{}", shown);
    }

    #[test]
    fn simplify_is_idempotent_and_sound(e in arb_expr(VARS, 4), p in arb_point(3)) {
        let s = e.simplify();
        prop_assert_eq!(s.simplify(), s.clone());
        prop_assume!(finite(&e, &p));
        prop_assert!(rel_close(eval_at(&e, VARS, &p), eval_at(&s, VARS, &p), 1e-9), "{} -> {}", e, s);
    }

    #[test]
    fn compiled_programs_match_tree_walk(e in arb_expr(VARS, 4), p in arb_point(3)) {
        let names: Vec<String> = VARS.iter().map(|s| s.to_string()).collect();
        let program = e.compile(&names).unwrap();
        let tree = e.eval(common::env(VARS, &p).as_slice());
        let flat = program.eval(&p);
        match (tree, flat) {
            (Ok(a), Ok(b)) => prop_assert!(a.to_bits() == b.to_bits() || (a.is_nan() && b.is_nan())),
            (a, b) => prop_assert_eq!(a.is_err(), b.is_err()),
        }
    }

    #[test]
    fn derivative_of_constant_free_expression_vanishes(e in arb_expr(&["x", "y"], 3)) {
        prop_assert!(e.diff("z").simplify().is_zero());
    }
}

#[test]
fn chain_rule_examples() {
    let cases = [
        ("sin(x^2)", "x", "2*x*cos(x^2)"),
        ("exp(2*x)", "x", "2*exp(2*x)"),
        ("y*exp(x)", "y", "exp(x)"),
    ];
    for (src, var, expected) in cases {
        let d = parse(src).unwrap().diff(var).simplify();
        let want = parse(expected).unwrap();
        for p in [[0.3, -0.7, 0.1], [1.2, 0.4, -0.9]] {
            assert!(rel_close(eval_at(&d, VARS, &p), eval_at(&want, VARS, &p), 1e-14), "{src}");
        }
    }
}
