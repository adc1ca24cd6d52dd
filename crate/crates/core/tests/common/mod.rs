#![allow(dead_code)]

use std::sync::Arc;

use hfree_core::Expr;
use proptest::prelude::*;

/// Random expressions over `vars` whose values stay moderate on `[-1, 1]^n`:
/// divisions and negative powers only ever hit denominators of the form
/// `2 + sin(·)`.
pub fn arb_expr(vars: &'static [&'static str], depth: u32) -> BoxedStrategy<Expr> {
    let leaf = prop_oneof![
        (-12i32..=12).prop_map(|n| Expr::Const(f64::from(n) / 4.0)),
        proptest::sample::select(vars).prop_map(Expr::coord),
    ];
    leaf.prop_recursive(depth, 24, 2, |inner| {
        let safe = |e: Expr| Expr::Add(Arc::new(Expr::Const(2.0)), Arc::new(Expr::Sin(Arc::new(e))));
        prop_oneof![
            inner.clone().prop_map(|a| Expr::Neg(Arc::new(a))),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Expr::Add(Arc::new(a), Arc::new(b))),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Expr::Sub(Arc::new(a), Arc::new(b))),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Expr::Mul(Arc::new(a), Arc::new(b))),
            (inner.clone(), inner.clone()).prop_map(move |(a, b)| Expr::Div(Arc::new(a), Arc::new(safe(b)))),
            (inner.clone(), 0i32..=3).prop_map(|(a, n)| Expr::Pow(Arc::new(a), n)),
            (inner.clone(), 1i32..=2).prop_map(move |(a, n)| Expr::Pow(Arc::new(safe(a)), -n)),
            inner.clone().prop_map(|a| Expr::Sin(Arc::new(a))),
            inner.clone().prop_map(|a| Expr::Cos(Arc::new(a))),
            inner.prop_map(|a| Expr::Exp(Arc::new(a))),
        ]
    })
    .boxed()
}

pub fn arb_point(n: usize) -> impl Strategy<Value = Vec<f64>> {
    proptest::collection::vec(-1.0f64..1.0, n)
}

pub fn env<'a>(vars: &[&'a str], point: &[f64]) -> Vec<(&'a str, f64)> {
    vars.iter().copied().zip(point.iter().copied()).collect()
}

pub fn eval_at(e: &Expr, vars: &[&str], point: &[f64]) -> f64 {
    e.eval(env(vars, point).as_slice()).expect("bounded expression evaluates")
}

pub fn rel_close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * 1f64.max(a.abs()).max(b.abs())
}

/// Exact determinant of an integer matrix by fraction-free elimination.
pub fn bareiss_det(mut m: Vec<Vec<i128>>) -> i128 {
    let n = m.len();
    let mut sign = 1;
    let mut prev = 1i128;
    for k in 0..n {
        if m[k][k] == 0 {
            let Some(swap) = (k + 1..n).find(|&r| m[r][k] != 0) else { return 0 };
            m.swap(k, swap);
            sign = -sign;
        }
        for i in k + 1..n {
            for j in k + 1..n {
                m[i][j] = (m[i][j] * m[k][k] - m[i][k] * m[k][j]) / prev;
            }
        }
        prev = m[k][k];
    }
    sign * m[n - 1][n - 1]
}

/// Determinant by the Leibniz permutation sum; meant for n <= 6.
pub fn leibniz_det(m: &[Vec<f64>]) -> f64 {
    let n = m.len();
    assert!(n <= 6, "Leibniz expansion is too slow for n = {n}");
    let mut perm: Vec<usize> = (0..n).collect();
    let mut total = 0.0;
    permute(&mut perm, 0, m, &mut total);
    total
}

fn permute(perm: &mut Vec<usize>, at: usize, m: &[Vec<f64>], total: &mut f64) {
    if at == perm.len() {
        let mut inversions = 0;
        for i in 0..perm.len() {
            for j in i + 1..perm.len() {
                if perm[i] > perm[j] {
                    inversions += 1;
                }
            }
        }
        let sign = if inversions % 2 == 0 { 1.0 } else { -1.0 };
        *total += sign * perm.iter().enumerate().map(|(r, &c)| m[r][c]).product::<f64>();
        return;
    }
    for i in at..perm.len() {
        perm.swap(at, i);
        permute(perm, at + 1, m, total);
        perm.swap(at, i);
    }
}
