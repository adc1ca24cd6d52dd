mod common;

use common::{arb_expr, rel_close};
use hfree_core::brackets::{
    annihilation, contact_form, contact_frame, jacobi_residual, PoissonBracket, RpStructure, SymplecticChart,
};
use hfree_core::gallery::{fixture, Structure};
use hfree_core::sampling::{sample_points, SamplePlan};
use hfree_core::{parse, Expr};
use proptest::prelude::*;

const TORUS_3: &[&str] = &["phi1", "phi2", "phi3", "p1", "p2", "p3"];
const E3: &[&str] = &["x", "y", "z"];

fn eval(s: &dyn PoissonBracket, e: &Expr, p: &[f64]) -> f64 {
    s.chart().compile(e).unwrap().eval(p).unwrap()
}

fn moderate(values: &[f64]) -> bool {
    values.iter().all(|v| v.is_finite() && v.abs() < 1e6)
}

fn check_laws(s: &dyn PoissonBracket, f: &Expr, g: &Expr, h: &Expr, p: &[f64]) -> Result<(), TestCaseError> {
    let fg = s.bracket(f, g).unwrap();
    let gf = s.bracket(g, f).unwrap();
    let f_gh = s.bracket(f, &(g.clone() * h.clone())).unwrap();
    let fh = s.bracket(f, h).unwrap();
    let vals = [eval(s, &fg, p), eval(s, &gf, p), eval(s, &f_gh, p), eval(s, &fh, p), eval(s, g, p), eval(s, h, p)];
    prop_assume!(moderate(&vals));
    prop_assert_eq!(vals[0], -vals[1]);
    prop_assert!(rel_close(vals[2], vals[0] * vals[5] + vals[4] * vals[3], 1e-10));
    let j = jacobi_residual(s, f, g, h, p).unwrap();
    prop_assert!(j <= 1e-8, "Jacobi residual {}", j);
    Ok(())
}

fn torus_point() -> impl Strategy<Value = Vec<f64>> {
    (proptest::collection::vec(0.0f64..std::f64::consts::TAU, 3), proptest::collection::vec(-2.0f64..2.0, 3))
        .prop_map(|(a, b)| a.into_iter().chain(b).collect())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn canonical_bracket_laws(f in arb_expr(TORUS_3, 2), g in arb_expr(TORUS_3, 2), h in arb_expr(TORUS_3, 2), p in torus_point()) {
        let s = SymplecticChart::cotangent_torus(3);
        check_laws(&s, &f, &g, &h, &p)?;
    }

    #[test]
    fn riemann_poisson_bracket_laws(f in arb_expr(E3, 2), g in arb_expr(E3, 2), h in arb_expr(E3, 2), p in common::arb_point(3)) {
        let fx = fixture("riemann-poisson-e3").unwrap();
        let Some(Structure::RiemannPoisson(rp)) = fx.structure else { unreachable!() };
        check_laws(&rp, &f, &g, &h, &p)?;
    }

    #[test]
    fn novikov_bracket_is_the_levi_civita_contraction(
        f in arb_expr(&["theta1", "theta2", "theta3"], 3),
        g in arb_expr(&["theta1", "theta2", "theta3"], 3),
        h in arb_expr(&["theta1", "theta2", "theta3"], 2),
        p in proptest::collection::vec(0.0f64..std::f64::consts::TAU, 3),
    ) {
        let fx = fixture("novikov-t3").unwrap();
        let Some(Structure::RiemannPoisson(rp)) = fx.structure else { unreachable!() };
        let names = ["theta1", "theta2", "theta3"];
        let b = [0.0, 0.0, 1.0];
        let mut expected = 0.0;
        for i in 0..3 {
            for j in 0..3 {
                for k in 0..3 {
                    let eps = levi_civita(i, j, k);
                    if eps != 0.0 {
                        let fi = eval(&rp, &f.diff(names[i]), &p);
                        let gj = eval(&rp, &g.diff(names[j]), &p);
                        expected += eps * fi * gj * b[k];
                    }
                }
            }
        }
        let got = eval(&rp, &rp.rp_bracket(&f, &g).unwrap(), &p);
        prop_assume!(moderate(&[expected, got]));
        prop_assert!(rel_close(got, expected, 1e-10), "{} vs {}", got, expected);
        check_laws(&rp, &f, &g, &h, &p)?;
    }

    #[test]
    fn rp_hamiltonian_field_agrees_with_bracket(h in arb_expr(E3, 2), f in arb_expr(E3, 2), p in common::arb_point(3)) {
        let fx = fixture("riemann-poisson-e3").unwrap();
        let Some(Structure::RiemannPoisson(rp)) = fx.structure else { unreachable!() };
        let xi = rp.hamiltonian_field(&h, -1.0).unwrap();
        let via_field = eval(&rp, &xi.lie_derivative(&f).unwrap(), &p);
        let via_bracket = -eval(&rp, &rp.rp_bracket(&h, &f).unwrap(), &p);
        prop_assume!(moderate(&[via_field, via_bracket]));
        prop_assert!(rel_close(via_field, via_bracket, 1e-10));
    }
}

fn levi_civita(i: usize, j: usize, k: usize) -> f64 {
    match (i, j, k) {
        (0, 1, 2) | (1, 2, 0) | (2, 0, 1) => 1.0,
        (0, 2, 1) | (2, 1, 0) | (1, 0, 2) => -1.0,
        _ => 0.0,
    }
}

#[test]
fn actions_are_in_involution() {
    for n in 1..=3 {
        let s = SymplecticChart::cotangent_torus(n);
        let actions: Vec<Expr> = (1..=n).map(|a| parse(&format!("exp(p{a})*cos(phi{a})")).unwrap()).collect();
        for a in 0..n {
            for b in 0..n {
                if a != b {
                    assert!(s.canonical_bracket(&actions[a], &actions[b]).unwrap().is_zero());
                }
            }
        }
    }
}

#[test]
fn riemann_poisson_casimir_brackets_vanish() {
    let chart = std::sync::Arc::new(hfree_core::Chart::cube(E3, -2.0, 2.0).unwrap());
    let big_h = parse("(1-y^2)*exp(x)").unwrap();
    let rp = RpStructure::new(chart, std::slice::from_ref(&big_h)).unwrap();
    let g = parse("x*z + sin(y)").unwrap();
    assert!(rp.rp_bracket(&big_h, &g).unwrap().is_zero());
}

#[test]
fn contact_frames_are_annihilated_up_to_n_4() {
    for n in 1..=4 {
        let frame = contact_frame(n);
        let theta = contact_form(frame.chart()).unwrap();
        assert!(annihilation(&frame, &theta).unwrap().iter().all(Expr::is_zero), "n = {n}");
    }
}

#[test]
fn gallery_bracket_test_functions_satisfy_jacobi() {
    for name in ["integrable-torus-2", "riemann-poisson-e3", "novikov-t3"] {
        let fx = fixture(name).unwrap();
        let s = fx.structure.as_ref().unwrap().as_bracket();
        let pts = sample_points(&fx.chart, &SamplePlan::random(50, 3)).unwrap();
        let fs = &fx.bracket_functions;
        for i in 0..fs.len() {
            for j in i + 1..fs.len() {
                for k in j + 1..fs.len() {
                    for p in &pts {
                        let r = jacobi_residual(s, &fs[i], &fs[j], &fs[k], p).unwrap();
                        assert!(r <= 1e-8, "{name}: residual {r}");
                    }
                }
            }
        }
    }
}
