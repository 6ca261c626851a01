use crate::error::{Error, Result};

/// Order of the conformable derivative, `0 < alpha <= 1`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct FractionalOrder(f64);

impl FractionalOrder {
    pub fn new(alpha: f64) -> Result<FractionalOrder> {
        if alpha.is_finite() && alpha > 0.0 && alpha <= 1.0 {
            Ok(FractionalOrder(alpha))
        } else {
            Err(Error::InvalidOrder(alpha))
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }

    pub fn is_classical(self) -> bool {
        self.0 == 1.0
    }
}

/// Which half-domain an axis belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Sector {
    /// `[a, +inf)`, right derivative.
    Right,
    /// `(-inf, b]`, left derivative.
    Left,
}

impl Sector {
    /// +1 for the right sector, -1 for the left: the direction pointing away
    /// from the singular endpoint.
    pub fn sign(self) -> f64 {
        match self {
            Sector::Right => 1.0,
            Sector::Left => -1.0,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Sector::Right => "right",
            Sector::Left => "left",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Side {
    Right { origin: f64 },
    Left { endpoint: f64 },
}

impl Side {
    pub fn sector(self) -> Sector {
        match self {
            Side::Right { .. } => Sector::Right,
            Side::Left { .. } => Sector::Left,
        }
    }

    /// The singular endpoint: `a` for the right sector, `b` for the left.
    pub fn anchor(self) -> f64 {
        match self {
            Side::Right { origin } => origin,
            Side::Left { endpoint } => endpoint,
        }
    }
}

pub const DEFAULT_INNER_OFFSET: f64 = 1e-3;
pub const DEFAULT_TRUNCATION: f64 = 10.0;

// Relative slack when testing coverage bounds, so grid points computed as
// `a + delta` or `a + T` are not rejected by rounding.
const BOUND_SLACK: f64 = 1e-12;

/// One axis of the domain. Pointwise operators are defined on the coverage
/// `[a + delta, a + T]` (right) or `[b - T, b - delta]` (left); integrals run
/// over the closure `[a, a + T]` / `[b - T, b]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AxisDomain {
    side: Side,
    inner_offset: f64,
    truncation: f64,
}

impl AxisDomain {
    pub fn new(side: Side, inner_offset: f64, truncation: f64) -> Result<AxisDomain> {
        if !side.anchor().is_finite() {
            return Err(Error::InvalidDomain(format!(
                "endpoint {} is not finite",
                side.anchor()
            )));
        }
        if !(inner_offset.is_finite() && inner_offset > 0.0) {
            return Err(Error::InvalidDomain(format!(
                "inner offset {inner_offset} must be positive"
            )));
        }
        if !(truncation.is_finite() && truncation > inner_offset) {
            return Err(Error::InvalidDomain(format!(
                "truncation length {truncation} must exceed the inner offset {inner_offset}"
            )));
        }
        Ok(AxisDomain {
            side,
            inner_offset,
            truncation,
        })
    }

    pub fn right(origin: f64) -> AxisDomain {
        AxisDomain::new(
            Side::Right { origin },
            DEFAULT_INNER_OFFSET,
            DEFAULT_TRUNCATION,
        )
        .expect("default right axis")
    }

    pub fn left(endpoint: f64) -> AxisDomain {
        AxisDomain::new(
            Side::Left { endpoint },
            DEFAULT_INNER_OFFSET,
            DEFAULT_TRUNCATION,
        )
        .expect("default left axis")
    }

    pub fn with_truncation(self, truncation: f64) -> Result<AxisDomain> {
        AxisDomain::new(self.side, self.inner_offset, truncation)
    }

    pub fn with_inner_offset(self, inner_offset: f64) -> Result<AxisDomain> {
        AxisDomain::new(self.side, inner_offset, self.truncation)
    }

    pub fn side(&self) -> Side {
        self.side
    }

    pub fn sector(&self) -> Sector {
        self.side.sector()
    }

    pub fn anchor(&self) -> f64 {
        self.side.anchor()
    }

    pub fn inner_offset(&self) -> f64 {
        self.inner_offset
    }

    pub fn truncation(&self) -> f64 {
        self.truncation
    }

    fn interval(&self, near: f64, far: f64) -> (f64, f64) {
        let a = self.anchor();
        match self.sector() {
            Sector::Right => (a + near, a + far),
            Sector::Left => (a - far, a - near),
        }
    }

    pub fn coverage(&self) -> (f64, f64) {
        self.interval(self.inner_offset, self.truncation)
    }

    pub fn closure(&self) -> (f64, f64) {
        self.interval(0.0, self.truncation)
    }

    /// `x - a` (right) or `x - b` (left); negative inside a left axis.
    pub fn offset(&self, x: f64) -> f64 {
        x - self.anchor()
    }

    /// Distance from the singular endpoint measured into the sector:
    /// `x - a` (right) or `b - x` (left).
    pub fn distance(&self, x: f64) -> f64 {
        self.sector().sign() * (x - self.anchor())
    }

    /// `u = distance^alpha`.
    pub fn to_u(&self, x: f64, alpha: f64) -> f64 {
        self.distance(x).max(0.0).powf(alpha)
    }

    pub fn from_u(&self, u: f64, alpha: f64) -> f64 {
        self.anchor() + self.sector().sign() * u.powf(1.0 / alpha)
    }

    pub(crate) fn check(&self, axis: usize, x: f64) -> Result<()> {
        let (lo, hi) = self.coverage();
        let d = self.distance(x);
        if !x.is_finite() || d < 0.0 || d > self.truncation * (1.0 + BOUND_SLACK) {
            return Err(Error::OutsideDomain {
                axis,
                coordinate: x,
                lo,
                hi,
            });
        }
        if d < self.inner_offset * (1.0 - BOUND_SLACK) {
            return Err(Error::EndpointContact {
                axis,
                coordinate: x,
                endpoint: self.anchor(),
                inner_offset: self.inner_offset,
            });
        }
        Ok(())
    }

    pub(crate) fn check_closure(&self, axis: usize, x: f64) -> Result<()> {
        let (lo, hi) = self.closure();
        let d = self.distance(x);
        let slack = self.truncation * BOUND_SLACK;
        if !x.is_finite() || d < -slack || d > self.truncation + slack {
            return Err(Error::OutsideDomain {
                axis,
                coordinate: x,
                lo,
                hi,
            });
        }
        Ok(())
    }
}

/// The Euclidean domain: one [`AxisDomain`] per coordinate and a single
/// fractional order shared by all axes.
#[derive(Debug, Clone, PartialEq)]
pub struct SpaceSpec {
    axes: Vec<AxisDomain>,
    order: FractionalOrder,
}

impl SpaceSpec {
    pub fn new(axes: Vec<AxisDomain>, order: FractionalOrder) -> Result<SpaceSpec> {
        if axes.is_empty() {
            return Err(Error::InvalidDomain("dimension must be at least 1".into()));
        }
        Ok(SpaceSpec { axes, order })
    }

    /// All axes right-sided with origin 0 and default coverage.
    pub fn right(dim: usize, alpha: f64) -> Result<SpaceSpec> {
        SpaceSpec::new(vec![AxisDomain::right(0.0); dim], FractionalOrder::new(alpha)?)
    }

    /// All axes left-sided with endpoint 0 and default coverage.
    pub fn left(dim: usize, alpha: f64) -> Result<SpaceSpec> {
        SpaceSpec::new(vec![AxisDomain::left(0.0); dim], FractionalOrder::new(alpha)?)
    }

    pub fn dim(&self) -> usize {
        self.axes.len()
    }

    pub fn order(&self) -> FractionalOrder {
        self.order
    }

    pub fn alpha(&self) -> f64 {
        self.order.value()
    }

    pub fn axis(&self, i: usize) -> &AxisDomain {
        &self.axes[i]
    }

    pub fn axes(&self) -> &[AxisDomain] {
        &self.axes
    }

    pub fn with_order(&self, alpha: f64) -> Result<SpaceSpec> {
        SpaceSpec::new(self.axes.clone(), FractionalOrder::new(alpha)?)
    }

    /// The common sector when every axis lies on the same side.
    pub fn sector(&self) -> Option<Sector> {
        let first = self.axes[0].sector();
        self.axes
            .iter()
            .all(|a| a.sector() == first)
            .then_some(first)
    }

    pub fn anchors(&self) -> Vec<f64> {
        self.axes.iter().map(|a| a.anchor()).collect()
    }

    pub fn check_dim(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: x.len(),
            });
        }
        Ok(())
    }

    /// Pointwise operators require every coordinate inside its coverage.
    pub fn check_point(&self, x: &[f64]) -> Result<()> {
        self.check_dim(x)?;
        for (i, (axis, &xi)) in self.axes.iter().zip(x).enumerate() {
            axis.check(i, xi)?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Spacing {
    /// Uniform in the coordinate `x`.
    UniformX,
    /// Uniform in `u = distance^alpha`, which clusters points near the
    /// singular endpoint.
    UniformU,
}

impl Spacing {
    pub fn name(self) -> &'static str {
        match self {
            Spacing::UniformX => "uniform_x",
            Spacing::UniformU => "uniform_u",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AxisGrid {
    pub n_points: usize,
    pub spacing: Spacing,
}

/// Sampling of each axis: sweep points inside the coverage, and the initial
/// panel partition for integrals over the closure.
#[derive(Debug, Clone, PartialEq)]
pub struct GridSpec {
    axes: Vec<AxisGrid>,
}

fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    let step = (hi - lo) / (n - 1) as f64;
    (0..n)
        .map(|k| if k == n - 1 { hi } else { lo + step * k as f64 })
        .collect()
}

impl GridSpec {
    pub fn new(axes: Vec<AxisGrid>) -> Result<GridSpec> {
        if axes.is_empty() {
            return Err(Error::InvalidGrid("no axes".into()));
        }
        if let Some(a) = axes.iter().find(|a| a.n_points < 2) {
            return Err(Error::InvalidGrid(format!(
                "n_points = {} (need at least 2)",
                a.n_points
            )));
        }
        Ok(GridSpec { axes })
    }

    pub fn uniform(dim: usize, n_points: usize, spacing: Spacing) -> Result<GridSpec> {
        GridSpec::new(vec![AxisGrid { n_points, spacing }; dim])
    }

    pub fn dim(&self) -> usize {
        self.axes.len()
    }

    pub fn axis(&self, i: usize) -> AxisGrid {
        self.axes[i]
    }

    fn check_space(&self, space: &SpaceSpec) -> Result<()> {
        if self.dim() != space.dim() {
            return Err(Error::DimensionMismatch {
                expected: space.dim(),
                found: self.dim(),
            });
        }
        Ok(())
    }

    fn spaced(&self, space: &SpaceSpec, axis: usize, lo: f64, hi: f64) -> Vec<f64> {
        let g = self.axes[axis];
        let dom = space.axis(axis);
        let alpha = space.alpha();
        let mut pts = match g.spacing {
            Spacing::UniformX => linspace(lo, hi, g.n_points),
            Spacing::UniformU => {
                let (ua, ub) = (dom.to_u(lo, alpha), dom.to_u(hi, alpha));
                let mut xs: Vec<f64> = linspace(ua, ub, g.n_points)
                    .into_iter()
                    .map(|u| dom.from_u(u, alpha))
                    .collect();
                // keep the interval ends exact
                let n = xs.len();
                xs[0] = lo;
                xs[n - 1] = hi;
                xs
            }
        };
        pts.sort_by(f64::total_cmp);
        pts
    }

    /// Sweep points of one axis, inside its coverage, ascending.
    pub fn points(&self, space: &SpaceSpec, axis: usize) -> Result<Vec<f64>> {
        self.check_space(space)?;
        let (lo, hi) = space.axis(axis).coverage();
        Ok(self.spaced(space, axis, lo, hi))
    }

    /// Tensor-product sweep points in row-major order (last axis fastest).
    pub fn sample_points(&self, space: &SpaceSpec) -> Result<Vec<Vec<f64>>> {
        let per_axis = (0..self.dim())
            .map(|i| self.points(space, i))
            .collect::<Result<Vec<_>>>()?;
        Ok(tensor_points(&per_axis))
    }

    /// Initial panel edges in `u` covering `[lo, hi]` on one axis, ascending.
    pub fn panel_edges_u(&self, space: &SpaceSpec, axis: usize, lo: f64, hi: f64) -> Vec<f64> {
        let dom = space.axis(axis);
        let alpha = space.alpha();
        let mut us: Vec<f64> = self
            .spaced(space, axis, lo, hi)
            .into_iter()
            .map(|x| dom.to_u(x, alpha))
            .collect();
        us.sort_by(f64::total_cmp);
        us.dedup();
        us
    }
}

pub(crate) fn tensor_points(per_axis: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let mut out = vec![Vec::with_capacity(per_axis.len())];
    for axis_pts in per_axis {
        let mut next = Vec::with_capacity(out.len() * axis_pts.len());
        for prefix in &out {
            for &x in axis_pts {
                let mut p = prefix.clone();
                p.push(x);
                next.push(p);
            }
        }
        out = next;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn order_bounds() {
        assert!(FractionalOrder::new(0.0).is_err());
        assert!(FractionalOrder::new(1.5).is_err());
        assert!(FractionalOrder::new(f64::NAN).is_err());
        assert!(FractionalOrder::new(1.0).unwrap().is_classical());
    }

    #[test]
    fn coverage_and_closure() {
        let r = AxisDomain::right(2.0);
        assert_eq!(r.coverage(), (2.001, 12.0));
        assert_eq!(r.closure(), (2.0, 12.0));
        let l = AxisDomain::left(0.0);
        assert_eq!(l.coverage(), (-10.0, -0.001));
        assert_eq!(l.distance(-3.0), 3.0);
    }

    #[test]
    fn domain_validation() {
        assert!(AxisDomain::new(Side::Right { origin: 0.0 }, 0.0, 1.0).is_err());
        assert!(AxisDomain::new(Side::Right { origin: 0.0 }, 2.0, 1.0).is_err());
        assert!(AxisDomain::new(Side::Left { endpoint: f64::INFINITY }, 0.1, 1.0).is_err());
    }

    #[test]
    fn point_checks() {
        let s = SpaceSpec::right(1, 0.5).unwrap();
        assert!(matches!(s.check_point(&[0.0]), Err(Error::EndpointContact { .. })));
        assert!(matches!(s.check_point(&[0.0005]), Err(Error::EndpointContact { .. })));
        assert!(matches!(s.check_point(&[-1.0]), Err(Error::OutsideDomain { .. })));
        assert!(matches!(s.check_point(&[10.5]), Err(Error::OutsideDomain { .. })));
        assert!(s.check_point(&[0.001]).is_ok());
        assert!(s.check_point(&[10.0]).is_ok());
        assert!(matches!(
            s.check_point(&[1.0, 1.0]),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn grid_points_inside_coverage() {
        for spacing in [Spacing::UniformX, Spacing::UniformU] {
            for space in [SpaceSpec::right(1, 0.4).unwrap(), SpaceSpec::left(1, 0.4).unwrap()] {
                let g = GridSpec::uniform(1, 17, spacing).unwrap();
                let pts = g.points(&space, 0).unwrap();
                assert_eq!(pts.len(), 17);
                assert!(pts.windows(2).all(|w| w[0] < w[1]));
                for &p in &pts {
                    space.check_point(&[p]).unwrap();
                }
            }
        }
    }

    #[test]
    fn uniform_u_edges_are_uniform_in_u() {
        let space = SpaceSpec::right(1, 0.5).unwrap();
        let g = GridSpec::uniform(1, 5, Spacing::UniformU).unwrap();
        let us = g.panel_edges_u(&space, 0, 0.0, 4.0);
        let want = [0.0, 0.5, 1.0, 1.5, 2.0];
        for (u, w) in us.iter().zip(want) {
            assert!((u - w).abs() < 1e-14);
        }
    }

    #[test]
    fn tensor_order_is_row_major() {
        let pts = tensor_points(&[vec![1.0, 2.0], vec![10.0, 20.0, 30.0]]);
        assert_eq!(pts[1], vec![1.0, 20.0]);
        assert_eq!(pts[3], vec![2.0, 10.0]);
    }
}
