use crate::error::{Error, Result};
use crate::expr::{coordinate_name, Expr};

use super::field::FieldSource;
use super::space::{AxisDomain, Sector, SpaceSpec};

/// The factor `s_i` in `d^alpha_i = s_i d_i`: `(x - a)^(1 - alpha)` on a right
/// axis and `-(b - x)^(1 - alpha)` on a left axis.
pub fn scale(axis: &AxisDomain, alpha: f64, x: f64) -> f64 {
    axis.sector().sign() * axis.distance(x).powf(1.0 - alpha)
}

/// `1 / s_i`: `(x - a)^(alpha - 1)` (right) or `-(b - x)^(alpha - 1)` (left).
pub fn inverse_scale(axis: &AxisDomain, alpha: f64, x: f64) -> f64 {
    axis.sector().sign() * axis.distance(x).powf(alpha - 1.0)
}

/// The weight `prod_i |x_i - anchor_i|^(alpha - 1)` for the space's sides.
pub fn weight(x: &[f64], space: &SpaceSpec) -> Result<f64> {
    space.check_point(x)?;
    Ok(weight_unchecked(x, space))
}

fn weight_unchecked(x: &[f64], space: &SpaceSpec) -> f64 {
    let alpha = space.alpha();
    space
        .axes()
        .iter()
        .zip(x)
        .map(|(axis, &xi)| axis.distance(xi).powf(alpha - 1.0))
        .product()
}

/// Conformable partial derivative along `axis` from the ordinary one.
pub fn conf_deriv(f: &FieldSource, axis: usize, x: &[f64], space: &SpaceSpec) -> Result<f64> {
    space.check_point(x)?;
    let dom = space.axis(axis);
    Ok(scale(dom, space.alpha(), x[axis]) * f.partial(axis, x)?)
}

/// Settings of the difference-quotient ladder.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LimitOptions {
    /// `eps_0 = eps_factor * max(1, |x - anchor|)`.
    pub eps_factor: f64,
    pub halvings: usize,
    pub richardson_order: usize,
    /// Relative tolerance on the error estimate, scaled by `max(1, |value|)`.
    pub tolerance: f64,
}

impl Default for LimitOptions {
    fn default() -> LimitOptions {
        LimitOptions {
            eps_factor: 1e-2,
            halvings: 12,
            richardson_order: 2,
            tolerance: 1e-6,
        }
    }
}

/// Conformable partial derivative from its limit definition. Returns the
/// extrapolated value and an error estimate.
pub fn conf_deriv_limit(
    f: &FieldSource,
    axis: usize,
    x: &[f64],
    space: &SpaceSpec,
) -> Result<(f64, f64)> {
    conf_deriv_limit_with(|p| f.value(p), axis, x, space, LimitOptions::default())
}

/// [`conf_deriv_limit`] for any scalar function of the coordinates.
///
/// The quotients `q_k = ±[f(x + eps_k s e_i) - f(x)] / eps_k` with
/// `eps_k = eps_0 2^-k` and `s = distance^(1 - alpha)` form the first column
/// of a Richardson tableau; the answer is the entry of the last column whose
/// difference from its predecessor is smallest.
pub fn conf_deriv_limit_with(
    f: impl Fn(&[f64]) -> Result<f64>,
    axis: usize,
    x: &[f64],
    space: &SpaceSpec,
    opts: LimitOptions,
) -> Result<(f64, f64)> {
    space.check_point(x)?;
    let dom = space.axis(axis);
    let alpha = space.alpha();
    let step = dom.distance(x[axis]).powf(1.0 - alpha);
    let sign = dom.sector().sign();
    let eps0 = opts.eps_factor * dom.offset(x[axis]).abs().max(1.0);
    let order = opts.richardson_order;

    let f0 = f(x)?;
    let mut shifted = x.to_vec();
    let mut prev_row: Vec<f64> = Vec::new();
    let mut best: Option<(f64, f64)> = None;
    for k in 0..=opts.halvings {
        let eps = eps0 / f64::powi(2.0, k as i32);
        shifted[axis] = x[axis] + eps * step;
        let q = sign * (f(&shifted)? - f0) / eps;
        let mut row = vec![q];
        for j in 1..=order.min(k) {
            let factor = f64::powi(2.0, j as i32) - 1.0;
            row.push(row[j - 1] + (row[j - 1] - prev_row[j - 1]) / factor);
        }
        if k > order {
            let est = (row[order] - prev_row[order]).abs();
            if best.is_none_or(|(_, e)| est < e) {
                best = Some((row[order], est));
            }
        }
        prev_row = row;
    }
    let (value, est) = best.unwrap_or((prev_row[prev_row.len() - 1], f64::INFINITY));
    let tolerance = opts.tolerance * value.abs().max(1.0);
    if !(est <= tolerance) {
        return Err(Error::NonConvergence {
            what: "conformable difference quotient",
            estimate: est,
            tolerance,
        });
    }
    Ok((value, est))
}

/// `x_i - anchor_i` as an expression.
pub fn offset_expr(space: &SpaceSpec, axis: usize) -> Expr {
    Expr::var(&coordinate_name(axis)) - space.axis(axis).anchor()
}

/// `x_i - a_i` (right) or `b_i - x_i` (left).
pub fn distance_expr(space: &SpaceSpec, axis: usize) -> Expr {
    let dom = space.axis(axis);
    let x = Expr::var(&coordinate_name(axis));
    match dom.sector() {
        Sector::Right => x - dom.anchor(),
        Sector::Left => dom.anchor() - x,
    }
}

fn signed(sector: Sector, e: Expr) -> Expr {
    match sector {
        Sector::Right => e,
        Sector::Left => -e,
    }
}

/// [`scale`] as an expression in the coordinates.
pub fn scale_expr(space: &SpaceSpec, axis: usize) -> Expr {
    let s = distance_expr(space, axis).powf(1.0 - space.alpha());
    signed(space.axis(axis).sector(), s)
}

/// [`inverse_scale`] as an expression in the coordinates.
pub fn inverse_scale_expr(space: &SpaceSpec, axis: usize) -> Expr {
    let w = distance_expr(space, axis).powf(space.alpha() - 1.0);
    signed(space.axis(axis).sector(), w)
}

/// Symbolic conformable partial derivative of an expression in the
/// coordinates (other variables held fixed).
pub fn conf_deriv_expr(e: &Expr, space: &SpaceSpec, axis: usize) -> Expr {
    scale_expr(space, axis) * e.derivative(&coordinate_name(axis))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * b.abs().max(1.0)
    }

    #[test]
    fn weight_examples() {
        let s1 = SpaceSpec::right(1, 0.5).unwrap();
        assert_eq!(weight(&[4.0], &s1).unwrap(), 0.5);
        let s2 = SpaceSpec::right(2, 0.5).unwrap();
        assert!(close(weight(&[4.0, 9.0], &s2).unwrap(), 1.0 / 6.0, 1e-15));
        let c = SpaceSpec::right(2, 1.0).unwrap();
        assert_eq!(weight(&[0.3, 7.0], &c).unwrap(), 1.0);
        assert!(matches!(weight(&[0.0], &s1), Err(Error::EndpointContact { .. })));
    }

    #[test]
    fn power_field_has_unit_derivative() {
        let alpha = 0.35;
        let space = SpaceSpec::right(1, alpha).unwrap();
        let f = FieldSource::parse(&format!("x_1^{alpha}/{alpha}"), 1).unwrap();
        for t in [0.01, 0.5, 3.0, 9.9] {
            assert!(close(conf_deriv(&f, 0, &[t], &space).unwrap(), 1.0, 1e-13));
        }
    }

    #[test]
    fn left_sign_convention() {
        // f(t) = t on (-inf, 0]: -(0 - t)^(1 - alpha) * 1
        let space = SpaceSpec::left(1, 0.5).unwrap();
        let f = FieldSource::parse("x_1", 1).unwrap();
        let d = conf_deriv(&f, 0, &[-4.0], &space).unwrap();
        assert!(close(d, -2.0, 1e-15));
    }

    #[test]
    fn limit_matches_closed_form() {
        let space = SpaceSpec::right(1, 0.5).unwrap();
        let f = FieldSource::parse("sin(x_1)", 1).unwrap();
        let (v, est) = conf_deriv_limit(&f, 0, &[1.0], &space).unwrap();
        assert!(close(v, 1f64.cos(), 1e-6));
        assert!(est < 1e-6);
    }

    #[test]
    fn limit_classical_and_constant() {
        let space = SpaceSpec::right(1, 1.0).unwrap();
        let f = FieldSource::parse("x_1^2", 1).unwrap();
        let (v, _) = conf_deriv_limit(&f, 0, &[3.0], &space).unwrap();
        assert!(close(v, 6.0, 1e-9));
        let c = FieldSource::parse("2.5", 1).unwrap();
        assert_eq!(conf_deriv_limit(&c, 0, &[3.0], &space).unwrap(), (0.0, 0.0));
    }

    #[test]
    fn limit_left_sector() {
        let space = SpaceSpec::left(1, 0.3).unwrap();
        let f = FieldSource::parse("exp(x_1)", 1).unwrap();
        let x = [-1.7];
        let (v, _) = conf_deriv_limit(&f, 0, &x, &space).unwrap();
        assert!(close(v, conf_deriv(&f, 0, &x, &space).unwrap(), 1e-6));
    }

    #[test]
    fn limit_reports_non_convergence() {
        let space = SpaceSpec::right(1, 0.5).unwrap();
        let opts = LimitOptions {
            tolerance: 1e-30,
            ..LimitOptions::default()
        };
        let r = conf_deriv_limit_with(|p| Ok(p[0].sin()), 0, &[1.0], &space, opts);
        assert!(matches!(r, Err(Error::NonConvergence { .. })));
    }

    #[test]
    fn symbolic_and_numeric_agree() {
        let space = SpaceSpec::left(2, 0.7).unwrap();
        let f = FieldSource::parse("x_1*x_2^2", 2).unwrap();
        let e = conf_deriv_expr(f.as_closed_form().unwrap().expr(), &space, 1);
        let x = [-1.5, -0.8];
        let v = e.eval(&[("x_1", x[0]), ("x_2", x[1])]).unwrap();
        assert!(close(v, conf_deriv(&f, 1, &x, &space).unwrap(), 1e-14));
    }
}
