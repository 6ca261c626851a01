use crate::error::Result;
use crate::expr::{Program, VarSpace};
use crate::frac::{self, FieldSource, GridSpec, IntegrationBox, SpaceSpec, Tolerance};

use super::{lagrangian_partials, Composition, Kinematics, LagrangianDerivs, LagrangianSpec};

#[derive(Debug, Clone, PartialEq)]
pub struct ElResidualSample {
    pub point: Vec<f64>,
    pub residual: f64,
}

#[derive(Debug, Clone)]
enum Backend {
    /// The residual composed with a closed-form field and compiled.
    Symbolic(Program),
    /// Chain rule on the field jet.
    Jet {
        derivs: LagrangianDerivs,
        field: FieldSource,
    },
}

/// The Euler-Lagrange operator of one density on one field, prepared for
/// repeated pointwise evaluation.
#[derive(Debug, Clone)]
pub struct ElOperator {
    space: SpaceSpec,
    backend: Backend,
}

impl ElOperator {
    /// Closed-form fields use exact symbolic composition; sampled fields use
    /// interpolant derivatives.
    pub fn new(l: &LagrangianSpec, field: &FieldSource, space: &SpaceSpec) -> Result<ElOperator> {
        l.check_space(space)?;
        space.check_dim(&vec![0.0; field.dim()])?;
        let FieldSource::ClosedForm(closed) = field else {
            return ElOperator::with_jets(l, field, space);
        };
        let comp = Composition::new(closed, space);
        let (l_phi, p) = lagrangian_partials(l);
        let mut residual = comp.apply(&l_phi);
        for (i, pi) in p.iter().enumerate() {
            residual = residual - comp.alpha_deriv(&comp.apply(pi), i);
        }
        let program = Program::compile(&residual, &VarSpace::coordinates(space.dim()))?;
        Ok(ElOperator {
            space: space.clone(),
            backend: Backend::Symbolic(program),
        })
    }

    /// Force the jet route, also for closed-form fields.
    pub fn with_jets(l: &LagrangianSpec, field: &FieldSource, space: &SpaceSpec) -> Result<ElOperator> {
        l.check_space(space)?;
        space.check_dim(&vec![0.0; field.dim()])?;
        Ok(ElOperator {
            space: space.clone(),
            backend: Backend::Jet {
                derivs: LagrangianDerivs::new(l)?,
                field: field.clone(),
            },
        })
    }

    pub fn uses_jets(&self) -> bool {
        matches!(self.backend, Backend::Jet { .. })
    }

    pub fn residual(&self, x: &[f64]) -> Result<f64> {
        self.space.check_point(x)?;
        match &self.backend {
            Backend::Symbolic(program) => Ok(program.eval(x)?),
            Backend::Jet { derivs, field } => {
                let k = Kinematics::at(field, x, &self.space)?;
                let v = derivs.eval(k.jet.value, &k.g)?;
                let d = self.space.dim();
                let mut residual = v.l_phi;
                for i in 0..d {
                    let mut dp = v.l_phi_g[i] * k.jet.grad[i];
                    for m in 0..d {
                        dp += v.l_gg[i][m] * k.dg[m][i];
                    }
                    residual -= k.scale[i] * dp;
                }
                Ok(residual)
            }
        }
    }

    /// Residuals at the grid's sweep points, in row-major order.
    pub fn sweep(&self, grid: &GridSpec) -> Result<Vec<ElResidualSample>> {
        grid.sample_points(&self.space)?
            .into_iter()
            .map(|point| {
                let residual = self.residual(&point)?;
                Ok(ElResidualSample { point, residual })
            })
            .collect()
    }
}

/// Euler-Lagrange residual of `l` on `field` at `x`.
pub fn el_residual(l: &LagrangianSpec, field: &FieldSource, x: &[f64], space: &SpaceSpec) -> Result<f64> {
    ElOperator::new(l, field, space)?.residual(x)
}

pub fn el_residual_sweep(
    l: &LagrangianSpec,
    field: &FieldSource,
    space: &SpaceSpec,
    grid: &GridSpec,
) -> Result<Vec<ElResidualSample>> {
    ElOperator::new(l, field, space)?.sweep(grid)
}

/// The density composed with the field at `x`, without coverage checks.
pub(crate) fn composed_density(
    derivs: &LagrangianDerivs,
    field: &FieldSource,
    x: &[f64],
    space: &SpaceSpec,
) -> Result<f64> {
    let alpha = space.alpha();
    let grad = field.gradient(x)?;
    let g: Vec<f64> = grad
        .iter()
        .enumerate()
        .map(|(i, d)| frac::scale(space.axis(i), alpha, x[i]) * d)
        .collect();
    derivs.density(field.value(x)?, &g)
}

/// The action `int Delta L(phi, d^alpha phi) d^D x` over the closure of the
/// space, restricted to the field's support.
pub fn action(l: &LagrangianSpec, field: &FieldSource, space: &SpaceSpec, grid: &GridSpec) -> Result<f64> {
    l.check_space(space)?;
    space.check_dim(&vec![0.0; field.dim()])?;
    let derivs = LagrangianDerivs::new(l)?;
    let bx = IntegrationBox::for_field(space, field)?;
    frac::integrate_box(
        &|x| composed_density(&derivs, field, x, space),
        space,
        grid,
        &bx,
        Tolerance::default(),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frac::{Sector, Spacing};

    fn oscillator(sector: Sector) -> LagrangianSpec {
        LagrangianSpec::parse("0.5*g_1^2 - 0.5*phi^2", 1, sector).unwrap()
    }

    #[test]
    fn analytic_oscillator_is_on_shell() {
        for alpha in [0.5, 0.9] {
            let space = SpaceSpec::right(1, alpha).unwrap();
            let f = FieldSource::parse(&format!("cos(x_1^{alpha}/{alpha})"), 1).unwrap();
            let op = ElOperator::new(&oscillator(Sector::Right), &f, &space).unwrap();
            let jets = ElOperator::with_jets(&oscillator(Sector::Right), &f, &space).unwrap();
            for t in [0.1, 0.77, 3.3, 9.5] {
                assert!(op.residual(&[t]).unwrap().abs() < 1e-12);
                assert!(jets.residual(&[t]).unwrap().abs() < 1e-12);
            }
        }
    }

    #[test]
    fn off_shell_backends_agree() {
        let space = SpaceSpec::left(1, 0.6).unwrap();
        let f = FieldSource::parse("x_1^3 + sin(x_1)", 1).unwrap();
        let l = LagrangianSpec::parse("0.5*g_1^2 - 0.5*phi^2 + phi^4*g_1", 1, Sector::Left).unwrap();
        let a = ElOperator::new(&l, &f, &space).unwrap();
        let b = ElOperator::with_jets(&l, &f, &space).unwrap();
        for t in [-0.2, -1.5, -7.0] {
            let (ra, rb) = (a.residual(&[t]).unwrap(), b.residual(&[t]).unwrap());
            assert!((ra - rb).abs() < 1e-11 * ra.abs().max(1.0), "{ra} vs {rb}");
            assert!(ra.abs() > 1e-3);
        }
    }

    #[test]
    fn classical_free_linear_field() {
        let space = SpaceSpec::right(1, 1.0).unwrap();
        let l = LagrangianSpec::parse("0.5*g_1^2", 1, Sector::Right).unwrap();
        let f = FieldSource::parse("2.5*x_1", 1).unwrap();
        assert_eq!(el_residual(&l, &f, &[3.0], &space).unwrap(), 0.0);
    }

    #[test]
    fn action_of_power_field() {
        let alpha = 0.5;
        let s = 4.0;
        let axis = crate::frac::AxisDomain::right(0.0).with_truncation(s).unwrap();
        let space = SpaceSpec::new(vec![axis], crate::frac::FractionalOrder::new(alpha).unwrap()).unwrap();
        let grid = GridSpec::uniform(1, 8, Spacing::UniformU).unwrap();
        let l = LagrangianSpec::parse("0.5*g_1^2", 1, Sector::Right).unwrap();
        let f = FieldSource::parse("x_1^0.5/0.5", 1).unwrap();
        let v = action(&l, &f, &space, &grid).unwrap();
        let want = 0.5 * s.powf(alpha) / alpha;
        assert!((v - want).abs() < 1e-12 * want);
        let zero = LagrangianSpec::parse("0", 1, Sector::Right).unwrap();
        assert_eq!(action(&zero, &f, &space, &grid).unwrap(), 0.0);
    }
}
