//! Conformable derivatives, weights and α-integrals on right and left
//! half-domains.
//!
//! On a right axis with origin `a` the α-derivative of a differentiable
//! function is `(x - a)^(1 - alpha) f'(x)`; on a left axis with endpoint `b`
//! it is `-(b - x)^(1 - alpha) f'(x)`. Integrals are weighted by the inverse
//! factor and computed in `u = distance^alpha`, where the weighted measure
//! becomes `du / alpha` and the endpoint singularity disappears.

mod deriv;
mod field;
mod integral;
pub mod quadrature;
mod space;

pub use deriv::{
    conf_deriv, conf_deriv_expr, conf_deriv_limit, conf_deriv_limit_with, distance_expr,
    inverse_scale, inverse_scale_expr, offset_expr, scale, scale_expr, weight, LimitOptions,
};
pub use field::{ClosedField, FieldSource, Jet, SampledField};
pub use integral::{conf_integral, conf_integral_along, conf_integral_multi, integrate_box, IntegrationBox};
pub use quadrature::Tolerance;
pub use space::{
    AxisDomain, AxisGrid, FractionalOrder, GridSpec, Sector, Side, SpaceSpec, Spacing,
    DEFAULT_INNER_OFFSET, DEFAULT_TRUNCATION,
};
