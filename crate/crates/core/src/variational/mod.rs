//! Fractional actions and Euler-Lagrange residuals.
//!
//! A density `L(phi, g_1, .., g_D)` is a function of the field and its
//! α-derivatives, which are independent symbols until a field is composed
//! in. The action is the α-integral of the composed density, and the EL
//! residual is `L_phi - sum_i d^alpha_i (dL/dg_i)`.

mod compose;
mod el;

use crate::error::{Error, Result};
use crate::expr::{self, alpha_derivative_name, Expr, Program, VarRole, VarSpace, FIELD};
use crate::frac::{Sector, SpaceSpec};

pub(crate) use compose::{Composition, Kinematics};
pub use el::{action, el_residual, el_residual_sweep, ElOperator, ElResidualSample};

/// A Lagrangian density with no explicit coordinate dependence, attached to
/// one sector.
#[derive(Debug, Clone, PartialEq)]
pub struct LagrangianSpec {
    density: Expr,
    dim: usize,
    sector: Sector,
}

impl LagrangianSpec {
    pub fn new(density: Expr, dim: usize, sector: Sector) -> Result<LagrangianSpec> {
        let space = VarSpace::full(dim);
        for name in density.free_variables() {
            match space.role_of(&name) {
                Some(VarRole::Field) | Some(VarRole::AlphaDerivative(_)) => {}
                Some(VarRole::Coordinate(_)) => {
                    return Err(Error::Lagrangian(format!(
                        "density depends explicitly on the coordinate `{name}`"
                    )))
                }
                None => {
                    return Err(Error::Lagrangian(format!(
                        "density references `{name}`, which is neither `phi` nor g_1..g_{dim}"
                    )))
                }
            }
        }
        Ok(LagrangianSpec {
            density,
            dim,
            sector,
        })
    }

    /// Parse a density. Coordinates are recognised by the parser so that
    /// their use is reported as explicit coordinate dependence.
    pub fn parse(text: &str, dim: usize, sector: Sector) -> Result<LagrangianSpec> {
        LagrangianSpec::new(expr::parse(text, &VarSpace::full(dim))?, dim, sector)
    }

    pub fn density(&self) -> &Expr {
        &self.density
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn sector(&self) -> Sector {
        self.sector
    }

    pub(crate) fn check_space(&self, space: &SpaceSpec) -> Result<()> {
        if space.dim() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: space.dim(),
                found: self.dim,
            });
        }
        match space.sector() {
            Some(s) if s == self.sector => Ok(()),
            Some(s) => Err(Error::SectorMismatch(format!(
                "{} lagrangian on a {} space",
                self.sector.name(),
                s.name()
            ))),
            None => Err(Error::SectorMismatch(format!(
                "{} lagrangian on a space mixing left and right axes",
                self.sector.name()
            ))),
        }
    }
}

/// `(dL/dphi, [dL/dg_1, .., dL/dg_D])`.
pub fn lagrangian_partials(l: &LagrangianSpec) -> (Expr, Vec<Expr>) {
    let d_phi = l.density.derivative(FIELD);
    let d_g = (0..l.dim)
        .map(|i| l.density.derivative(&alpha_derivative_name(i)))
        .collect();
    (d_phi, d_g)
}

/// Values of a density and its first and second partials at `(phi, g)`.
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct LagrangianValues {
    pub l: f64,
    pub l_phi: f64,
    pub p: Vec<f64>,
    pub l_phi_g: Vec<f64>,
    pub l_gg: Vec<Vec<f64>>,
}

/// Compiled density partials up to second order.
#[derive(Debug, Clone)]
pub(crate) struct LagrangianDerivs {
    dim: usize,
    value: Program,
    all: Program,
}

impl LagrangianDerivs {
    pub fn new(l: &LagrangianSpec) -> Result<LagrangianDerivs> {
        let d = l.dim;
        let space = VarSpace::lagrangian(d);
        let (l_phi, p) = lagrangian_partials(l);
        let mut outputs = vec![l.density.clone(), l_phi];
        outputs.extend(p.iter().cloned());
        outputs.extend(p.iter().map(|pi| pi.derivative(FIELD)));
        for pi in &p {
            outputs.extend((0..d).map(|k| pi.derivative(&alpha_derivative_name(k))));
        }
        Ok(LagrangianDerivs {
            dim: d,
            value: Program::compile(&l.density, &space)?,
            all: Program::compile_many(&outputs, &space)?,
        })
    }

    fn inputs(phi: f64, g: &[f64]) -> Vec<f64> {
        let mut v = Vec::with_capacity(g.len() + 1);
        v.push(phi);
        v.extend_from_slice(g);
        v
    }

    pub fn density(&self, phi: f64, g: &[f64]) -> Result<f64> {
        Ok(self.value.eval(&Self::inputs(phi, g))?)
    }

    pub fn eval(&self, phi: f64, g: &[f64]) -> Result<LagrangianValues> {
        let d = self.dim;
        let out = self.all.eval_vec(&Self::inputs(phi, g))?;
        Ok(LagrangianValues {
            l: out[0],
            l_phi: out[1],
            p: out[2..2 + d].to_vec(),
            l_phi_g: out[2 + d..2 + 2 * d].to_vec(),
            l_gg: (0..d)
                .map(|i| out[2 + 2 * d + i * d..2 + 2 * d + (i + 1) * d].to_vec())
                .collect(),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn partial_examples() {
        let l = LagrangianSpec::parse("0.5*g_1^2 - 0.5*phi^2", 1, Sector::Right).unwrap();
        let (dp, dg) = lagrangian_partials(&l);
        assert_eq!(dp, -Expr::var("phi"));
        assert_eq!(dg, vec![Expr::var("g_1")]);

        let l = LagrangianSpec::parse("phi*g_1", 1, Sector::Left).unwrap();
        let (dp, dg) = lagrangian_partials(&l);
        assert_eq!(dp, Expr::var("g_1"));
        assert_eq!(dg, vec![Expr::var("phi")]);
    }

    #[test]
    fn coefficient_partials_evaluate() {
        let l = LagrangianSpec::parse("0.5*2.5*g_1^2 - 0.5*1.7^2*phi^2", 1, Sector::Right).unwrap();
        let (dp, dg) = lagrangian_partials(&l);
        let at = [("phi", 0.4), ("g_1", -1.1)];
        assert!((dp.eval(&at).unwrap() + 1.7 * 1.7 * 0.4).abs() < 1e-15);
        assert!((dg[0].eval(&at).unwrap() + 2.5 * 1.1).abs() < 1e-15);
    }

    #[test]
    fn explicit_coordinates_rejected() {
        let err = LagrangianSpec::parse("x_1*g_1^2", 1, Sector::Right).unwrap_err();
        assert!(matches!(err, Error::Lagrangian(_)));
        assert!(LagrangianSpec::parse("g_2", 1, Sector::Right).is_err());
    }

    #[test]
    fn sector_checked_against_space() {
        let l = LagrangianSpec::parse("g_1^2", 1, Sector::Left).unwrap();
        assert!(l.check_space(&SpaceSpec::left(1, 0.5).unwrap()).is_ok());
        assert!(matches!(
            l.check_space(&SpaceSpec::right(1, 0.5).unwrap()),
            Err(Error::SectorMismatch(_))
        ));
    }

    #[test]
    fn second_partials() {
        let l = LagrangianSpec::parse("phi^2*g_1*g_2 + g_2^3", 2, Sector::Right).unwrap();
        let v = LagrangianDerivs::new(&l).unwrap().eval(2.0, &[3.0, 5.0]).unwrap();
        assert_eq!(v.l, 4.0 * 15.0 + 125.0);
        assert_eq!(v.l_phi, 2.0 * 2.0 * 15.0);
        assert_eq!(v.p, vec![4.0 * 5.0, 4.0 * 3.0 + 75.0]);
        assert_eq!(v.l_phi_g, vec![4.0 * 5.0, 4.0 * 3.0]);
        assert_eq!(v.l_gg, vec![vec![0.0, 4.0], vec![4.0, 30.0]]);
    }
}
