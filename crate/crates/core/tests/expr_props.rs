use std::collections::HashMap;

use conformable::expr::{diff, parse, BinaryOp, Expr, UnaryOp, VarSpace};
use proptest::prelude::*;

fn leaf() -> impl Strategy<Value = Expr> {
    prop_oneof![
        (-3.0f64..3.0).prop_map(|c| Expr::constant((c * 100.0).round() / 100.0)),
        Just(Expr::var("x_1")),
        Just(Expr::var("x_2")),
    ]
}

/// Random trees of depth at most 6 over `x_1, x_2`.
fn tree() -> impl Strategy<Value = Expr> {
    leaf().prop_recursive(4, 48, 2, |inner| {
        prop_oneof![
            (inner.clone(), 0..7usize).prop_map(|(e, k)| match k {
                0 => Expr::unary(UnaryOp::Neg, e),
                1 => e.sin(),
                2 => e.cos(),
                // keep exp and log inside tame ranges
                3 => e.sin().exp(),
                4 => (1.0 + e.clone() * e).ln(),
                5 => (1.0 + e.clone() * e).sqrt(),
                _ => e.powf(2.0),
            }),
            (inner.clone(), inner, 0..4usize).prop_map(|(a, b, k)| match k {
                0 => a + b,
                1 => a - b,
                2 => a * b,
                _ => Expr::binary(BinaryOp::Div, a, 2.0 + b.sin()),
            }),
        ]
    })
    .prop_filter("depth above 6", |e| e.depth() <= 6)
}

fn point() -> impl Strategy<Value = (f64, f64)> {
    (0.2f64..2.0, 0.2f64..2.0)
}

fn at(e: &Expr, x: (f64, f64)) -> Option<f64> {
    let b: HashMap<&str, f64> = [("x_1", x.0), ("x_2", x.1)].into();
    e.eval(&b).ok().filter(|v| v.abs() < 1e6)
}

/// Central differences at `h` and `h/2`, Richardson-combined; `None` when
/// the two levels disagree enough that the oracle itself is unreliable.
fn fd(e: &Expr, x: (f64, f64)) -> Option<f64> {
    let central = |h: f64| Some((at(e, (x.0 + h, x.1))? - at(e, (x.0 - h, x.1))?) / (2.0 * h));
    let (c1, c2) = (central(1e-3)?, central(5e-4)?);
    let r = (4.0 * c2 - c1) / 3.0;
    ((c1 - c2).abs() < 1e-3 * r.abs().max(1.0)).then_some(r)
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1.0)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn derivative_matches_finite_differences(e in tree(), pts in prop::collection::vec(point(), 10)) {
        prop_assert!(e.depth() <= 6);
        let d = diff(&e, "x_1", &VarSpace::coordinates(2)).unwrap();
        for x in pts {
            let (Some(exact), Some(oracle)) = (at(&d, x), fd(&e, x)) else { continue };
            prop_assert!(rel(exact, oracle) < 1e-6, "{e} at {x:?}: {exact} vs {oracle}");
        }
    }

    #[test]
    fn parse_inverts_render(e in tree(), pts in prop::collection::vec(point(), 10)) {
        let text = e.to_string();
        let back = parse(&text, &VarSpace::coordinates(2)).unwrap();
        prop_assert_eq!(back.to_string(), text.clone());
        for x in pts {
            if let (Some(a), Some(b)) = (at(&e, x), at(&back, x)) {
                prop_assert!((a - b).abs() <= 1e-15 * a.abs().max(1.0), "{text}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn derivative_is_linear(
        e1 in tree(),
        e2 in tree(),
        a in -2.0f64..2.0,
        b in -2.0f64..2.0,
        x in point(),
    ) {
        let space = VarSpace::coordinates(2);
        let combined = diff(&(a * e1.clone() + b * e2.clone()), "x_2", &space).unwrap();
        let parts = a * diff(&e1, "x_2", &space).unwrap() + b * diff(&e2, "x_2", &space).unwrap();
        if let (Some(l), Some(r)) = (at(&combined, x), at(&parts, x)) {
            prop_assert!(rel(l, r) < 1e-12, "{l} vs {r}");
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(2000))]

    /// Arbitrary token soup: parsing never panics, and whatever parses
    /// renders to a fixed point.
    #[test]
    fn token_soup_round_trips(parts in prop::collection::vec(prop::sample::select(vec![
        "x_1", "x_2", "g_1", "phi", "+", "-", "*", "/", "^", "(", ")", " ", "sin(", "cos(",
        "exp(", "log(", "sqrt(", "abs(", "0", "1.5", "2e-3", "1e308", "7", ".", "e", ",",
    ]), 0..24)) {
        let text: String = parts.concat();
        let space = VarSpace::full(2);
        if let Ok(e) = parse(&text, &space) {
            let rendered = e.to_string();
            let back = parse(&rendered, &space);
            prop_assert!(back.is_ok(), "{text:?} rendered as {rendered:?}: {back:?}");
            prop_assert_eq!(back.unwrap().to_string(), rendered);
        }
    }
}

#[test]
fn unknown_variable_is_refused() {
    let e = parse("x_1^2", &VarSpace::coordinates(1)).unwrap();
    assert!(diff(&e, "x_3", &VarSpace::coordinates(1)).is_err());
}
