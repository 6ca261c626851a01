use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::frac::{self, FieldSource, GridSpec, IntegrationBox, SpaceSpec, Tolerance};
use crate::variational::{LagrangianDerivs, LagrangianSpec};

use super::generator::{GeneratorDerivs, SymmetryGenerator};
use super::operator::NoetherOperator;

/// Change of the action under the finite transformation with parameters
/// `beta`, returned as `(direct, formula)`.
///
/// `direct` pulls the transformed action back to the original coordinates:
/// with `x' = x - f beta`, `J = dx'/dx` and `phi'(x') = phi(x) + C beta`, it
/// integrates `Delta(x') / Delta(x) |det J| L(phi', d'^alpha phi') - L` against
/// the weight `Delta(x)`. `formula` is the first-order prediction
/// `sum_s beta_s int Delta (div theta_s + B_s)`. They agree up to `O(beta^2)`.
pub fn action_variation(
    gen: &SymmetryGenerator,
    l: &LagrangianSpec,
    field: &FieldSource,
    space: &SpaceSpec,
    grid: &GridSpec,
    beta: &[f64],
) -> Result<(f64, f64)> {
    if beta.len() != gen.params() {
        return Err(Error::DimensionMismatch {
            expected: gen.params(),
            found: beta.len(),
        });
    }
    let op = NoetherOperator::new(gen, l, field, space)?;
    let derivs = LagrangianDerivs::new(l)?;
    let gen_derivs = GeneratorDerivs::new(gen)?;
    let bx = IntegrationBox::for_field(space, field)?;
    let tol = Tolerance::default();

    let direct = frac::integrate_box(
        &|x| transformed_density_change(&derivs, &gen_derivs, field, space, beta, x),
        space,
        grid,
        &bx,
        tol,
    )?;
    let formula = frac::integrate_box(
        &|x| {
            let p = op.at_unchecked(x)?;
            Ok((0..beta.len())
                .map(|s| beta[s] * (p.divergence[s] + p.breaking[s]))
                .sum())
        },
        space,
        grid,
        &bx,
        tol,
    )?;
    Ok((direct, formula))
}

fn transformed_density_change(
    derivs: &LagrangianDerivs,
    gen: &GeneratorDerivs,
    field: &FieldSource,
    space: &SpaceSpec,
    beta: &[f64],
    x: &[f64],
) -> Result<f64> {
    let d = space.dim();
    let alpha = space.alpha();
    let phi = field.value(x)?;
    let grad = field.gradient(x)?;
    let gv = gen.eval(x, phi)?;

    let g: Vec<f64> = (0..d)
        .map(|i| frac::scale(space.axis(i), alpha, x[i]) * grad[i])
        .collect();
    let original = derivs.density(phi, &g)?;

    let mut x_new = x.to_vec();
    let mut jac = DMatrix::<f64>::identity(d, d);
    let mut phi_new = phi;
    let mut grad_new = DVector::from_column_slice(&grad);
    for (s, v) in gv.iter().enumerate() {
        let b = beta[s];
        for i in 0..d {
            x_new[i] -= b * v.f[i];
            for k in 0..d {
                jac[(i, k)] -= b * v.df[i][k];
            }
        }
        phi_new += b * v.c;
        for k in 0..d {
            grad_new[k] += b * (v.dc[k] + v.c_phi * grad[k]);
        }
    }

    let mut ratio = 1.0;
    for i in 0..d {
        let axis = space.axis(i);
        let (before, after) = (axis.distance(x[i]), axis.distance(x_new[i]));
        if !(after > 0.0) {
            return Err(Error::Generator(format!(
                "transformed coordinate {} on axis {} leaves the sector",
                x_new[i],
                i + 1
            )));
        }
        ratio *= (after / before).powf(alpha - 1.0);
    }
    let det = jac.determinant();
    // d phi' / d x'_i = sum_k (J^-1)_{ki} d_k(phi + C beta)
    let grad_prime = jac
        .transpose()
        .lu()
        .solve(&grad_new)
        .ok_or_else(|| Error::Generator("singular coordinate transformation".into()))?;
    let g_new: Vec<f64> = (0..d)
        .map(|i| frac::scale(space.axis(i), alpha, x_new[i]) * grad_prime[i])
        .collect();
    let transformed = derivs.density(phi_new, &g_new)?;
    Ok(ratio * det.abs() * transformed - original)
}
