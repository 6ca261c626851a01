use crate::error::{Error, Result};

use super::field::FieldSource;
use super::quadrature::{self, Tolerance};
use super::space::{GridSpec, Sector, SpaceSpec};

/// An axis-aligned box inside the closure of a [`SpaceSpec`].
#[derive(Debug, Clone, PartialEq)]
pub struct IntegrationBox {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

impl IntegrationBox {
    pub fn new(lo: Vec<f64>, hi: Vec<f64>) -> Result<IntegrationBox> {
        if lo.len() != hi.len() {
            return Err(Error::DimensionMismatch {
                expected: lo.len(),
                found: hi.len(),
            });
        }
        if lo.iter().zip(&hi).any(|(l, h)| !(l <= h)) {
            return Err(Error::InvalidDomain(format!(
                "box lower corner {lo:?} exceeds upper corner {hi:?}"
            )));
        }
        Ok(IntegrationBox { lo, hi })
    }

    /// The full closure `[a, a + T]` / `[b - T, b]` of every axis.
    pub fn closure(space: &SpaceSpec) -> IntegrationBox {
        let (lo, hi) = space.axes().iter().map(|a| a.closure()).unzip();
        IntegrationBox { lo, hi }
    }

    /// The closure intersected with the field's support; a sampled field
    /// is only integrated where it has data.
    pub fn for_field(space: &SpaceSpec, field: &FieldSource) -> Result<IntegrationBox> {
        let mut b = IntegrationBox::closure(space);
        for i in 0..space.dim() {
            if let Some((lo, hi)) = field.support(i) {
                b.lo[i] = b.lo[i].max(lo);
                b.hi[i] = b.hi[i].min(hi);
            }
        }
        IntegrationBox::new(b.lo, b.hi)
    }

    pub fn dim(&self) -> usize {
        self.lo.len()
    }

    fn check(&self, space: &SpaceSpec) -> Result<()> {
        space.check_dim(&self.lo)?;
        for (i, axis) in space.axes().iter().enumerate() {
            axis.check_closure(i, self.lo[i])?;
            axis.check_closure(i, self.hi[i])?;
        }
        Ok(())
    }
}

/// `int_from^to |x_i - anchor|^(alpha - 1) h dx_i` along `axis`, with the
/// other coordinates taken from `at`. The substitution `u = distance^alpha`
/// turns the weighted measure into `du / alpha`.
pub fn conf_integral_along(
    h: &dyn Fn(&[f64]) -> Result<f64>,
    axis: usize,
    from: f64,
    to: f64,
    at: &[f64],
    space: &SpaceSpec,
    tol: Tolerance,
) -> Result<f64> {
    space.check_dim(at)?;
    let dom = space.axis(axis);
    dom.check_closure(axis, from)?;
    dom.check_closure(axis, to)?;
    let alpha = space.alpha();
    let (u_from, u_to) = (dom.to_u(from, alpha), dom.to_u(to, alpha));
    // on a left axis u decreases with x, which flips the orientation
    let forward = match dom.sector() {
        Sector::Right => u_from <= u_to,
        Sector::Left => u_from >= u_to,
    };
    let sign = if forward { 1.0 } else { -1.0 };
    let integrand = |u: f64| {
        let mut p = at.to_vec();
        p[axis] = dom.from_u(u, alpha);
        h(&p)
    };
    let v = quadrature::integrate(&integrand, &[u_from.min(u_to), u_from.max(u_to)], tol)?;
    Ok(sign * v / alpha)
}

/// One-dimensional α-integral of a field over `[from, to]`.
pub fn conf_integral(
    f: &FieldSource,
    axis: usize,
    from: f64,
    to: f64,
    space: &SpaceSpec,
) -> Result<f64> {
    if space.dim() != 1 {
        return Err(Error::DimensionMismatch {
            expected: 1,
            found: space.dim(),
        });
    }
    conf_integral_along(
        &|p| f.value(p),
        axis,
        from,
        to,
        &[0.0],
        space,
        Tolerance::default(),
    )
}

/// `int Delta(x) h(x) d^D x` over `bx`, as nested one-dimensional rules in
/// `u`. Initial panels follow the grid spacing.
pub fn integrate_box(
    h: &dyn Fn(&[f64]) -> Result<f64>,
    space: &SpaceSpec,
    grid: &GridSpec,
    bx: &IntegrationBox,
    tol: Tolerance,
) -> Result<f64> {
    if grid.dim() != space.dim() {
        return Err(Error::DimensionMismatch {
            expected: space.dim(),
            found: grid.dim(),
        });
    }
    bx.check(space)?;
    let edges: Vec<Vec<f64>> = (0..space.dim())
        .map(|i| grid.panel_edges_u(space, i, bx.lo[i], bx.hi[i]))
        .collect();
    let mut point = bx.lo.clone();
    nested(h, space, &edges, 0, &mut point, tol)
}

fn nested(
    h: &dyn Fn(&[f64]) -> Result<f64>,
    space: &SpaceSpec,
    edges: &[Vec<f64>],
    axis: usize,
    point: &mut [f64],
    tol: Tolerance,
) -> Result<f64> {
    let dom = space.axis(axis);
    let alpha = space.alpha();
    let last = axis + 1 == space.dim();
    let base = point.to_vec();
    let integrand = |u: f64| {
        let mut p = base.clone();
        p[axis] = dom.from_u(u, alpha);
        if last {
            h(&p)
        } else {
            nested(h, space, edges, axis + 1, &mut p, tol.inner())
        }
    };
    Ok(quadrature::integrate(&integrand, &edges[axis], tol)? / alpha)
}

/// α-integral of a field over the closure of the space (restricted to the
/// field's support).
pub fn conf_integral_multi(f: &FieldSource, space: &SpaceSpec, grid: &GridSpec) -> Result<f64> {
    let bx = IntegrationBox::for_field(space, f)?;
    integrate_box(&|p| f.value(p), space, grid, &bx, Tolerance::default())
}
