//! Noether currents, energy-momentum and angular-momentum tensors, the
//! breaking term and the first-order action variation.
//!
//! A generator moves points by `x' = x - sum_s f_s beta_s` and the field by
//! `phi' = phi + sum_s C_s beta_s`. To first order the action changes by
//! `sum_s beta_s int Delta (sum_i d^alpha_i theta_s^i + B_s)`, where `theta`
//! is the current and `B` collects the terms produced by the fractional
//! weights. `B` vanishes on-shell.

mod generator;
mod operator;
mod variation;

use crate::error::{Error, Result};
use crate::expr::{coordinate_name, Program, VarSpace};
use crate::frac::{self, FieldSource, Sector, SpaceSpec};
use crate::variational::{Kinematics, LagrangianSpec};

pub use generator::SymmetryGenerator;
pub use operator::{NoetherOperator, NoetherPoint};
pub use variation::action_variation;

/// Which sector a current sample belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CurrentSector {
    Right,
    Left,
    /// Sum of a right and a left sample.
    Combined,
}

impl From<Sector> for CurrentSector {
    fn from(s: Sector) -> CurrentSector {
        match s {
            Sector::Right => CurrentSector::Right,
            Sector::Left => CurrentSector::Left,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CurrentSample {
    pub point: Vec<f64>,
    /// `theta[s][i]`, `M x D`.
    pub theta: Vec<Vec<f64>>,
    pub sector: CurrentSector,
    /// The singular endpoint of each axis.
    pub anchor: Vec<f64>,
}

impl CurrentSample {
    /// A zero current, for a point outside the sector's domain.
    pub fn vacant(point: &[f64], params: usize, sector: CurrentSector, anchor: &[f64]) -> CurrentSample {
        CurrentSample {
            point: point.to_vec(),
            theta: vec![vec![0.0; point.len()]; params],
            sector,
            anchor: anchor.to_vec(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BreakingSample {
    pub point: Vec<f64>,
    /// One entry per generator parameter.
    pub b: Vec<f64>,
}

impl NoetherOperator {
    pub fn current(&self, x: &[f64]) -> Result<CurrentSample> {
        let sector = self.space().sector().expect("operator spaces have one sector");
        Ok(CurrentSample {
            point: x.to_vec(),
            theta: self.at(x)?.theta,
            sector: sector.into(),
            anchor: self.space().anchors(),
        })
    }

    /// The current, or a vacant sample when `x` lies outside this sector.
    pub fn current_or_vacant(&self, x: &[f64]) -> Result<CurrentSample> {
        match self.current(x) {
            Err(Error::OutsideDomain { .. }) => {
                let sector = self.space().sector().expect("operator spaces have one sector");
                Ok(CurrentSample::vacant(
                    x,
                    self.params(),
                    sector.into(),
                    &self.space().anchors(),
                ))
            }
            other => other,
        }
    }

    pub fn breaking(&self, x: &[f64]) -> Result<BreakingSample> {
        Ok(BreakingSample {
            point: x.to_vec(),
            b: self.at(x)?.breaking,
        })
    }

    pub fn divergence(&self, x: &[f64]) -> Result<Vec<f64>> {
        Ok(self.at(x)?.divergence)
    }

    /// `emt[i][j] = T^i_j`.
    pub fn emt(&self, x: &[f64]) -> Result<Vec<Vec<f64>>> {
        Ok(self.at(x)?.emt)
    }

    /// `amt[i][k][j] = x_k T^i_j`.
    pub fn amt(&self, x: &[f64]) -> Result<Vec<Vec<Vec<f64>>>> {
        let t = self.emt(x)?;
        Ok(t.iter()
            .map(|row| x.iter().map(|xk| row.iter().map(|tij| xk * tij).collect()).collect())
            .collect())
    }

    pub fn increment(&self, sigma: usize, axis: usize, x: &[f64]) -> Result<f64> {
        Ok(self.at(x)?.increment[sigma][axis])
    }

    pub fn first_order_integrand(&self, x: &[f64]) -> Result<Vec<f64>> {
        Ok(self.at(x)?.integrand)
    }
}

fn check_index(what: &str, index: usize, len: usize) -> Result<()> {
    if index >= len {
        return Err(Error::Generator(format!("{what} index {index} out of range 0..{len}")));
    }
    Ok(())
}

pub fn derivative_increment(
    gen: &SymmetryGenerator,
    sigma: usize,
    axis: usize,
    l: &LagrangianSpec,
    field: &FieldSource,
    x: &[f64],
    space: &SpaceSpec,
) -> Result<f64> {
    check_index("parameter", sigma, gen.params())?;
    check_index("axis", axis, space.dim())?;
    NoetherOperator::new(gen, l, field, space)?.increment(sigma, axis, x)
}

pub fn noether_current(
    gen: &SymmetryGenerator,
    l: &LagrangianSpec,
    field: &FieldSource,
    x: &[f64],
    space: &SpaceSpec,
) -> Result<CurrentSample> {
    NoetherOperator::new(gen, l, field, space)?.current(x)
}

pub fn emt(l: &LagrangianSpec, field: &FieldSource, x: &[f64], space: &SpaceSpec) -> Result<Vec<Vec<f64>>> {
    NoetherOperator::new(&SymmetryGenerator::zero(space.dim(), 1), l, field, space)?.emt(x)
}

pub fn amt(
    l: &LagrangianSpec,
    field: &FieldSource,
    x: &[f64],
    space: &SpaceSpec,
) -> Result<Vec<Vec<Vec<f64>>>> {
    NoetherOperator::new(&SymmetryGenerator::zero(space.dim(), 1), l, field, space)?.amt(x)
}

pub fn breaking_term(
    gen: &SymmetryGenerator,
    l: &LagrangianSpec,
    field: &FieldSource,
    x: &[f64],
    space: &SpaceSpec,
) -> Result<BreakingSample> {
    NoetherOperator::new(gen, l, field, space)?.breaking(x)
}

/// `d_k(d^alpha_i phi) - [(1 - alpha) distance_k^-alpha delta_ik d_i phi
/// + d^alpha_i(d_k phi)]`.
pub fn commutation_residual(
    field: &FieldSource,
    i: usize,
    k: usize,
    x: &[f64],
    space: &SpaceSpec,
) -> Result<f64> {
    check_index("axis", i, space.dim())?;
    check_index("axis", k, space.dim())?;
    space.check_point(x)?;
    let alpha = space.alpha();
    match field {
        FieldSource::ClosedForm(c) => {
            let dphi_i = &c.gradient_exprs()[i];
            let dphi_k = &c.gradient_exprs()[k];
            let lhs = (frac::scale_expr(space, i) * dphi_i.clone()).derivative(&coordinate_name(k));
            let mut rhs = frac::conf_deriv_expr(dphi_k, space, i);
            if i == k {
                rhs = rhs
                    + (1.0 - alpha) * frac::distance_expr(space, k).powf(-alpha) * dphi_i.clone();
            }
            let program = Program::compile_many(&[lhs, rhs], &VarSpace::coordinates(space.dim()))?;
            let v = program.eval_vec(x)?;
            Ok(v[0] - v[1])
        }
        FieldSource::Sampled(_) => {
            let kin = Kinematics::at(field, x, space)?;
            let lhs = kin.dg[i][k];
            let mut rhs = kin.scale[i] * kin.jet.hess[k][i];
            if i == k {
                rhs += (1.0 - alpha) * space.axis(k).distance(x[k]).powf(-alpha) * kin.jet.grad[i];
            }
            Ok(lhs - rhs)
        }
    }
}

/// `theta = theta_right + theta_left` for samples taken at the same point
/// with a common endpoint `a = b`.
pub fn combine_currents(right: &CurrentSample, left: &CurrentSample) -> Result<CurrentSample> {
    if right.sector != CurrentSector::Right || left.sector != CurrentSector::Left {
        return Err(Error::SectorMismatch(format!(
            "expected a right and a left sample, got {:?} and {:?}",
            right.sector, left.sector
        )));
    }
    if right.point != left.point {
        return Err(Error::CurrentMismatch(format!(
            "samples at different points {:?} and {:?}",
            right.point, left.point
        )));
    }
    if right.anchor != left.anchor {
        return Err(Error::CurrentMismatch(format!(
            "right origin {:?} differs from left endpoint {:?}",
            right.anchor, left.anchor
        )));
    }
    let shape = |t: &Vec<Vec<f64>>| (t.len(), t.first().map_or(0, Vec::len));
    if shape(&right.theta) != shape(&left.theta) {
        return Err(Error::CurrentMismatch(format!(
            "shapes {:?} and {:?} differ",
            shape(&right.theta),
            shape(&left.theta)
        )));
    }
    let theta = right
        .theta
        .iter()
        .zip(&left.theta)
        .map(|(r, l)| r.iter().zip(l).map(|(a, b)| a + b).collect())
        .collect();
    Ok(CurrentSample {
        point: right.point.clone(),
        theta,
        sector: CurrentSector::Combined,
        anchor: right.anchor.clone(),
    })
}
