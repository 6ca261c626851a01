use std::collections::HashMap;

use crate::error::Result;
use crate::expr::{alpha_derivative_name, coordinate_name, Expr, FIELD};
use crate::frac::{self, ClosedField, FieldSource, Jet, SpaceSpec};

/// Substitution of a closed-form field into densities: `phi <- phi(x)` and
/// `g_i <- s_i(x) d_i phi(x)`, leaving an expression in the coordinates.
#[derive(Debug, Clone)]
pub(crate) struct Composition {
    pub phi: Expr,
    pub dphi: Vec<Expr>,
    pub g: Vec<Expr>,
    pub scale: Vec<Expr>,
    pub inverse_scale: Vec<Expr>,
    pub offset: Vec<Expr>,
    names: Vec<String>,
}

impl Composition {
    pub fn new(field: &ClosedField, space: &SpaceSpec) -> Composition {
        let d = space.dim();
        let scale: Vec<Expr> = (0..d).map(|i| frac::scale_expr(space, i)).collect();
        let dphi = field.gradient_exprs().to_vec();
        let g = (0..d).map(|i| scale[i].clone() * dphi[i].clone()).collect();
        let mut names = vec![FIELD.to_string()];
        names.extend((0..d).map(alpha_derivative_name));
        Composition {
            phi: field.expr().clone(),
            dphi,
            g,
            scale,
            inverse_scale: (0..d).map(|i| frac::inverse_scale_expr(space, i)).collect(),
            offset: (0..d).map(|i| frac::offset_expr(space, i)).collect(),
            names,
        }
    }

    pub fn apply(&self, e: &Expr) -> Expr {
        let mut map = HashMap::new();
        map.insert(self.names[0].as_str(), self.phi.clone());
        for (name, g) in self.names[1..].iter().zip(&self.g) {
            map.insert(name.as_str(), g.clone());
        }
        e.substitute(&map)
    }

    /// `d^alpha_i e = s_i d e / d x_i` for an expression in the coordinates.
    pub fn alpha_deriv(&self, e: &Expr, axis: usize) -> Expr {
        self.scale[axis].clone() * e.derivative(&coordinate_name(axis))
    }
}

/// Pointwise kinematic data on a right or left axis set: the field jet and
/// the sector factors with their first derivatives.
#[derive(Debug, Clone)]
pub(crate) struct Kinematics {
    pub jet: Jet,
    /// `x_i - anchor_i`, negative on left axes.
    pub offset: Vec<f64>,
    /// `s_i` and `d s_i / d x_i = (1 - alpha) distance^-alpha`.
    pub scale: Vec<f64>,
    pub dscale: Vec<f64>,
    /// `w_i = 1 / s_i` and `d w_i / d x_i = (alpha - 1) distance^(alpha - 2)`.
    pub inverse_scale: Vec<f64>,
    pub dinverse_scale: Vec<f64>,
    pub g: Vec<f64>,
    /// `dg[i][j] = d g_i / d x_j`.
    pub dg: Vec<Vec<f64>>,
}

impl Kinematics {
    pub fn at(field: &FieldSource, x: &[f64], space: &SpaceSpec) -> Result<Kinematics> {
        let jet = field.jet(x)?;
        Ok(Kinematics::from_jet(jet, x, space))
    }

    pub fn from_jet(jet: Jet, x: &[f64], space: &SpaceSpec) -> Kinematics {
        let d = space.dim();
        let alpha = space.alpha();
        let mut k = Kinematics {
            offset: vec![0.0; d],
            scale: vec![0.0; d],
            dscale: vec![0.0; d],
            inverse_scale: vec![0.0; d],
            dinverse_scale: vec![0.0; d],
            g: vec![0.0; d],
            dg: vec![vec![0.0; d]; d],
            jet,
        };
        for i in 0..d {
            let axis = space.axis(i);
            let dist = axis.distance(x[i]);
            k.offset[i] = axis.offset(x[i]);
            k.scale[i] = frac::scale(axis, alpha, x[i]);
            k.dscale[i] = (1.0 - alpha) * dist.powf(-alpha);
            k.inverse_scale[i] = frac::inverse_scale(axis, alpha, x[i]);
            k.dinverse_scale[i] = (alpha - 1.0) * dist.powf(alpha - 2.0);
            k.g[i] = k.scale[i] * k.jet.grad[i];
            for j in 0..d {
                k.dg[i][j] = k.scale[i] * k.jet.hess[i][j];
            }
            k.dg[i][i] += k.dscale[i] * k.jet.grad[i];
        }
        k
    }
}
