use crate::error::{Error, Result};
use crate::expr::{self, Expr, ExprError, Program, VarRole, VarSpace};

use super::space::{GridSpec, SpaceSpec};

/// Value, gradient and Hessian of a field at one point.
#[derive(Debug, Clone, PartialEq)]
pub struct Jet {
    pub value: f64,
    pub grad: Vec<f64>,
    pub hess: Vec<Vec<f64>>,
}

/// A closed-form field `phi(x_1, .., x_D)` with its exact first and second
/// partials prepared once.
#[derive(Debug, Clone)]
pub struct ClosedField {
    expr: Expr,
    dim: usize,
    grad: Vec<Expr>,
    hess: Vec<Vec<Expr>>,
    value_prog: Program,
    grad_prog: Program,
    jet_prog: Program,
}

impl ClosedField {
    pub fn new(expr: Expr, dim: usize) -> Result<ClosedField> {
        let space = VarSpace::coordinates(dim);
        for name in expr.free_variables() {
            if !matches!(space.role_of(&name), Some(VarRole::Coordinate(_))) {
                return Err(ExprError::UnknownVariable(name).into());
            }
        }
        let grad: Vec<Expr> = (0..dim)
            .map(|i| expr.derivative(&expr::coordinate_name(i)))
            .collect();
        let hess: Vec<Vec<Expr>> = (0..dim)
            .map(|i| {
                (0..dim)
                    .map(|j| grad[i].derivative(&expr::coordinate_name(j)))
                    .collect()
            })
            .collect();
        let mut jet_outputs = vec![expr.clone()];
        jet_outputs.extend(grad.iter().cloned());
        for i in 0..dim {
            jet_outputs.extend(hess[i][i..].iter().cloned());
        }
        Ok(ClosedField {
            value_prog: Program::compile(&expr, &space)?,
            grad_prog: Program::compile_many(&grad, &space)?,
            jet_prog: Program::compile_many(&jet_outputs, &space)?,
            expr,
            dim,
            grad,
            hess,
        })
    }

    pub fn parse(text: &str, dim: usize) -> Result<ClosedField> {
        ClosedField::new(expr::parse(text, &VarSpace::coordinates(dim))?, dim)
    }

    pub fn expr(&self) -> &Expr {
        &self.expr
    }

    pub fn gradient_exprs(&self) -> &[Expr] {
        &self.grad
    }

    pub fn hessian_exprs(&self) -> &[Vec<Expr>] {
        &self.hess
    }

    fn jet(&self, x: &[f64]) -> Result<Jet> {
        let d = self.dim;
        let out = self.jet_prog.eval_vec(x)?;
        let mut hess = vec![vec![0.0; d]; d];
        let mut k = 1 + d;
        for i in 0..d {
            for j in i..d {
                hess[i][j] = out[k];
                hess[j][i] = out[k];
                k += 1;
            }
        }
        Ok(Jet {
            value: out[0],
            grad: out[1..=d].to_vec(),
            hess,
        })
    }
}

/// A field sampled on a tensor grid, interpolated by a tensor-product
/// natural cubic spline.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledField {
    axes: Vec<Vec<f64>>,
    values: Vec<f64>,
}

// Relative slack on the hull test so grid-end coordinates are accepted.
const HULL_SLACK: f64 = 1e-12;

impl SampledField {
    /// `values` is row-major over `axes` (last axis fastest).
    pub fn new(axes: Vec<Vec<f64>>, values: Vec<f64>) -> Result<SampledField> {
        if axes.is_empty() {
            return Err(Error::SampledField("no axes".into()));
        }
        for (i, a) in axes.iter().enumerate() {
            if a.len() < 2 {
                return Err(Error::SampledField(format!(
                    "axis {} has {} points (need at least 2)",
                    i + 1,
                    a.len()
                )));
            }
            if a.iter().any(|x| !x.is_finite()) || a.windows(2).any(|w| w[0] >= w[1]) {
                return Err(Error::SampledField(format!(
                    "axis {} coordinates must be finite and strictly increasing",
                    i + 1
                )));
            }
        }
        let expected: usize = axes.iter().map(Vec::len).product();
        if values.len() != expected {
            return Err(Error::SampledField(format!(
                "{} values for a grid of {} points",
                values.len(),
                expected
            )));
        }
        if let Some(k) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::SampledField(format!("value {k} is not finite")));
        }
        Ok(SampledField { axes, values })
    }

    /// Samples taken at `grid.sample_points(space)`.
    pub fn on_grid(space: &SpaceSpec, grid: &GridSpec, values: Vec<f64>) -> Result<SampledField> {
        let axes = (0..space.dim())
            .map(|i| grid.points(space, i))
            .collect::<Result<Vec<_>>>()?;
        SampledField::new(axes, values)
    }

    /// Sample a closed-form field on the grid.
    pub fn sample(field: &FieldSource, space: &SpaceSpec, grid: &GridSpec) -> Result<SampledField> {
        let values = grid
            .sample_points(space)?
            .iter()
            .map(|p| field.value(p))
            .collect::<Result<Vec<_>>>()?;
        SampledField::on_grid(space, grid, values)
    }

    pub fn dim(&self) -> usize {
        self.axes.len()
    }

    pub fn axes(&self) -> &[Vec<f64>] {
        &self.axes
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn hull(&self, axis: usize) -> (f64, f64) {
        let a = &self.axes[axis];
        (a[0], a[a.len() - 1])
    }

    fn locate(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: x.len(),
            });
        }
        x.iter()
            .enumerate()
            .map(|(i, &xi)| {
                let (lo, hi) = self.hull(i);
                let slack = HULL_SLACK * (hi - lo).max(lo.abs()).max(hi.abs());
                if !(xi >= lo - slack && xi <= hi + slack) {
                    return Err(Error::InterpolationOutOfRange {
                        axis: i,
                        coordinate: xi,
                        lo,
                        hi,
                    });
                }
                Ok(xi.clamp(lo, hi))
            })
            .collect()
    }

    /// Mixed partial derivative of the interpolant; `orders[i]` is the
    /// derivative order along axis `i`.
    pub fn eval(&self, x: &[f64], orders: &[u8]) -> Result<f64> {
        let x = self.locate(x)?;
        let mut data = self.values.clone();
        for axis in (0..self.dim()).rev() {
            let knots = &self.axes[axis];
            let n = knots.len();
            data = data
                .chunks_exact(n)
                .map(|fiber| {
                    let m = natural_second_derivatives(knots, fiber);
                    spline_eval(knots, fiber, &m, x[axis], orders[axis])
                })
                .collect();
        }
        Ok(data[0])
    }

    fn jet(&self, x: &[f64]) -> Result<Jet> {
        let d = self.dim();
        let mut orders = vec![0u8; d];
        let value = self.eval(x, &orders)?;
        let mut grad = vec![0.0; d];
        let mut hess = vec![vec![0.0; d]; d];
        for i in 0..d {
            orders[i] = 1;
            grad[i] = self.eval(x, &orders)?;
            for j in i..d {
                orders[j] += 1;
                let h = self.eval(x, &orders)?;
                orders[j] -= 1;
                hess[i][j] = h;
                hess[j][i] = h;
            }
            orders[i] = 0;
        }
        Ok(Jet { value, grad, hess })
    }
}

/// Second derivatives of the natural cubic spline through `(x, y)`.
fn natural_second_derivatives(x: &[f64], y: &[f64]) -> Vec<f64> {
    let n = x.len();
    let mut m = vec![0.0; n];
    if n < 3 {
        return m;
    }
    // Thomas algorithm on the interior equations
    let mut c_prime = vec![0.0; n];
    let mut d_prime = vec![0.0; n];
    for i in 1..n - 1 {
        let h0 = x[i] - x[i - 1];
        let h1 = x[i + 1] - x[i];
        let a = h0 / 6.0;
        let b = (h0 + h1) / 3.0;
        let c = h1 / 6.0;
        let d = (y[i + 1] - y[i]) / h1 - (y[i] - y[i - 1]) / h0;
        let denom = b - a * c_prime[i - 1];
        c_prime[i] = c / denom;
        d_prime[i] = (d - a * d_prime[i - 1]) / denom;
    }
    for i in (1..n - 1).rev() {
        m[i] = d_prime[i] - c_prime[i] * m[i + 1];
    }
    m
}

fn spline_eval(x: &[f64], y: &[f64], m: &[f64], xq: f64, order: u8) -> f64 {
    let n = x.len();
    let j = x.partition_point(|&k| k <= xq).clamp(1, n - 1) - 1;
    let h = x[j + 1] - x[j];
    let a = (x[j + 1] - xq) / h;
    let b = (xq - x[j]) / h;
    match order {
        0 => a * y[j] + b * y[j + 1] + ((a * a * a - a) * m[j] + (b * b * b - b) * m[j + 1]) * h * h / 6.0,
        1 => {
            (y[j + 1] - y[j]) / h - (3.0 * a * a - 1.0) / 6.0 * h * m[j]
                + (3.0 * b * b - 1.0) / 6.0 * h * m[j + 1]
        }
        2 => a * m[j] + b * m[j + 1],
        3 => (m[j + 1] - m[j]) / h,
        _ => 0.0,
    }
}

/// A scalar field given either in closed form or by samples.
#[derive(Debug, Clone)]
pub enum FieldSource {
    ClosedForm(ClosedField),
    Sampled(SampledField),
}

impl FieldSource {
    pub fn closed_form(expr: Expr, dim: usize) -> Result<FieldSource> {
        Ok(FieldSource::ClosedForm(ClosedField::new(expr, dim)?))
    }

    pub fn parse(text: &str, dim: usize) -> Result<FieldSource> {
        Ok(FieldSource::ClosedForm(ClosedField::parse(text, dim)?))
    }

    pub fn dim(&self) -> usize {
        match self {
            FieldSource::ClosedForm(c) => c.dim,
            FieldSource::Sampled(s) => s.dim(),
        }
    }

    pub fn is_sampled(&self) -> bool {
        matches!(self, FieldSource::Sampled(_))
    }

    pub fn as_closed_form(&self) -> Option<&ClosedField> {
        match self {
            FieldSource::ClosedForm(c) => Some(c),
            FieldSource::Sampled(_) => None,
        }
    }

    fn check_dim(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: x.len(),
            });
        }
        Ok(())
    }

    pub fn value(&self, x: &[f64]) -> Result<f64> {
        self.check_dim(x)?;
        match self {
            FieldSource::ClosedForm(c) => Ok(c.value_prog.eval(x)?),
            FieldSource::Sampled(s) => s.eval(x, &vec![0; x.len()]),
        }
    }

    /// Ordinary partial derivatives `d phi / d x_i`.
    pub fn gradient(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.check_dim(x)?;
        match self {
            FieldSource::ClosedForm(c) => Ok(c.grad_prog.eval_vec(x)?),
            FieldSource::Sampled(s) => (0..x.len())
                .map(|i| {
                    let mut orders = vec![0; x.len()];
                    orders[i] = 1;
                    s.eval(x, &orders)
                })
                .collect(),
        }
    }

    pub fn partial(&self, axis: usize, x: &[f64]) -> Result<f64> {
        Ok(self.gradient(x)?[axis])
    }

    pub fn jet(&self, x: &[f64]) -> Result<Jet> {
        self.check_dim(x)?;
        match self {
            FieldSource::ClosedForm(c) => c.jet(x),
            FieldSource::Sampled(s) => s.jet(x),
        }
    }

    /// Interval on which the field is defined along `axis`; unbounded for
    /// closed forms.
    pub fn support(&self, axis: usize) -> Option<(f64, f64)> {
        match self {
            FieldSource::ClosedForm(_) => None,
            FieldSource::Sampled(s) => Some(s.hull(axis)),
        }
    }
}

impl From<ClosedField> for FieldSource {
    fn from(c: ClosedField) -> FieldSource {
        FieldSource::ClosedForm(c)
    }
}

impl From<SampledField> for FieldSource {
    fn from(s: SampledField) -> FieldSource {
        FieldSource::Sampled(s)
    }
}

#[cfg(test)]
mod tests {
    use super::super::space::Spacing;
    use super::*;

    #[test]
    fn closed_form_jet() {
        let f = FieldSource::parse("x_1^2*x_2 + sin(x_2)", 2).unwrap();
        let j = f.jet(&[2.0, 0.5]).unwrap();
        assert_eq!(j.value, 4.0 * 0.5 + 0.5f64.sin());
        assert_eq!(j.grad, vec![2.0, 4.0 + 0.5f64.cos()]);
        assert_eq!(j.hess[0][0], 1.0);
        assert_eq!(j.hess[0][1], 4.0);
        assert_eq!(j.hess[1][0], 4.0);
        assert!((j.hess[1][1] + 0.5f64.sin()).abs() < 1e-15);
    }

    #[test]
    fn closed_form_rejects_non_coordinates() {
        let e = expr::parse("phi*x_1", &VarSpace::full(1)).unwrap();
        assert!(FieldSource::closed_form(e, 1).is_err());
    }

    #[test]
    fn spline_reproduces_linear_exactly() {
        let xs: Vec<f64> = (0..7).map(|k| k as f64 * 0.5).collect();
        let ys: Vec<f64> = xs.iter().map(|x| 3.0 * x - 1.0).collect();
        let s = SampledField::new(vec![xs], ys).unwrap();
        assert!((s.eval(&[1.3], &[0]).unwrap() - 2.9).abs() < 1e-14);
        assert!((s.eval(&[1.3], &[1]).unwrap() - 3.0).abs() < 1e-14);
        assert!(s.eval(&[1.3], &[2]).unwrap().abs() < 1e-14);
    }

    #[test]
    fn spline_converges_on_smooth_data() {
        let space = SpaceSpec::right(1, 0.5).unwrap();
        let grid = GridSpec::uniform(1, 401, Spacing::UniformX).unwrap();
        let f = FieldSource::parse("sin(x_1)", 1).unwrap();
        let s = FieldSource::Sampled(SampledField::sample(&f, &space, &grid).unwrap());
        for x in [0.7, 3.1, 8.4] {
            assert!((s.value(&[x]).unwrap() - x.sin()).abs() < 1e-7);
            assert!((s.partial(0, &[x]).unwrap() - x.cos()).abs() < 1e-5);
        }
    }

    #[test]
    fn tensor_spline_mixed_partial() {
        // bilinear data is reproduced exactly, mixed partial included
        let a = vec![0.0, 1.0, 2.5, 3.0];
        let b = vec![-1.0, 0.0, 2.0];
        let mut v = Vec::new();
        for &x in &a {
            for &y in &b {
                v.push(2.0 * x * y + x - y);
            }
        }
        let s = SampledField::new(vec![a, b], v).unwrap();
        assert!((s.eval(&[1.7, 0.3], &[0, 0]).unwrap() - (2.0 * 1.7 * 0.3 + 1.7 - 0.3)).abs() < 1e-13);
        assert!((s.eval(&[1.7, 0.3], &[1, 1]).unwrap() - 2.0).abs() < 1e-13);
    }

    #[test]
    fn out_of_hull_rejected() {
        let s = SampledField::new(vec![vec![1.0, 2.0, 3.0]], vec![0.0, 1.0, 0.0]).unwrap();
        assert!(matches!(
            s.eval(&[3.5], &[0]),
            Err(Error::InterpolationOutOfRange { .. })
        ));
        assert!(s.eval(&[3.0], &[0]).is_ok());
    }

    #[test]
    fn bad_samples_rejected() {
        assert!(SampledField::new(vec![vec![1.0, 1.0]], vec![0.0, 0.0]).is_err());
        assert!(SampledField::new(vec![vec![1.0, 2.0]], vec![0.0]).is_err());
        assert!(SampledField::new(vec![vec![1.0, 2.0]], vec![0.0, f64::NAN]).is_err());
    }
}
