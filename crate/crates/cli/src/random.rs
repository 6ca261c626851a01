//! Random smooth fields for the property suites.

use conformable::expr::{coordinate_name, Expr};
use rand::Rng;

fn coefficient(rng: &mut impl Rng, bound: f64) -> f64 {
    rng.gen_range(-bound..bound)
}

fn term(rng: &mut impl Rng, dim: usize) -> Expr {
    let axis = rng.gen_range(0..dim);
    let x = Expr::var(&coordinate_name(axis));
    let c = coefficient(rng, 2.0);
    let a = coefficient(rng, 1.0);
    let b = coefficient(rng, 1.0);
    let body = match rng.gen_range(0..8) {
        0 => (a * x + b).sin(),
        1 => (a * x + b).cos(),
        2 => (0.5 * a * x).exp(),
        3 => x.powf(rng.gen_range(1..=3) as f64),
        4 => (1.0 + x).ln(),
        5 => (1.0 + x.clone() * x).sqrt(),
        6 if dim > 1 => {
            let other = Expr::var(&coordinate_name((axis + 1) % dim));
            x * other
        }
        _ => {
            let other = Expr::var(&coordinate_name(rng.gen_range(0..dim)));
            (a * x + b * other).sin()
        }
    };
    c * body
}

/// Smooth on the positive orthant: sums and products of a few elementary
/// terms with coefficients of order one.
pub(crate) fn smooth_field(rng: &mut impl Rng, dim: usize) -> Expr {
    let n = rng.gen_range(2..=4);
    let mut terms = Vec::with_capacity(n);
    for _ in 0..n {
        let t = term(rng, dim);
        if rng.gen_bool(0.25) {
            terms.push(t * term(rng, dim));
        } else {
            terms.push(t);
        }
    }
    Expr::sum(terms) + coefficient(rng, 1.0)
}

pub(crate) fn point(rng: &mut impl Rng, dim: usize, lo: f64, hi: f64) -> Vec<f64> {
    (0..dim).map(|_| rng.gen_range(lo..hi)).collect()
}
