use std::collections::HashMap;

use crate::error::Result;
use crate::expr::{coordinate_name, Expr, Program, VarSpace, FIELD};
use crate::frac::{FieldSource, SpaceSpec};
use crate::variational::{lagrangian_partials, Composition, Kinematics, LagrangianDerivs, LagrangianSpec};

use super::generator::{GeneratorDerivs, SymmetryGenerator};

/// Every pointwise Noether quantity at one point.
#[derive(Debug, Clone, PartialEq)]
pub struct NoetherPoint {
    /// `theta[s][i]`: the current of parameter `s` along axis `i`.
    pub theta: Vec<Vec<f64>>,
    /// `sum_i d^alpha_i theta[s][i]`.
    pub divergence: Vec<f64>,
    pub breaking: Vec<f64>,
    /// `increment[s][i]`: first-order change of `d^alpha_i phi`.
    pub increment: Vec<Vec<f64>>,
    /// Integrand of the first-order action variation, per parameter.
    pub integrand: Vec<f64>,
    /// `emt[i][j] = T^i_j`.
    pub emt: Vec<Vec<f64>>,
    pub el_residual: f64,
}

#[derive(Debug, Clone)]
enum Backend {
    Symbolic(Program),
    Jet {
        derivs: LagrangianDerivs,
        gen: GeneratorDerivs,
        field: FieldSource,
    },
}

/// Noether current, EMT, breaking term and related quantities for one
/// generator, density and field, prepared for pointwise evaluation.
#[derive(Debug, Clone)]
pub struct NoetherOperator {
    space: SpaceSpec,
    params: usize,
    anchored: Vec<bool>,
    backend: Backend,
}

impl NoetherOperator {
    /// Closed-form fields are composed symbolically; sampled fields use
    /// interpolant derivatives.
    pub fn new(
        gen: &SymmetryGenerator,
        l: &LagrangianSpec,
        field: &FieldSource,
        space: &SpaceSpec,
    ) -> Result<NoetherOperator> {
        let FieldSource::ClosedForm(closed) = field else {
            return NoetherOperator::with_jets(gen, l, field, space);
        };
        let anchored = Self::validate(gen, l, field, space)?;
        let outputs = symbolic_outputs(gen, l, &Composition::new(closed, space), space);
        let program = Program::compile_many(&outputs, &VarSpace::coordinates(space.dim()))?;
        Ok(NoetherOperator {
            space: space.clone(),
            params: gen.params(),
            anchored,
            backend: Backend::Symbolic(program),
        })
    }

    /// Force the jet (chain rule) route, also for closed-form fields.
    pub fn with_jets(
        gen: &SymmetryGenerator,
        l: &LagrangianSpec,
        field: &FieldSource,
        space: &SpaceSpec,
    ) -> Result<NoetherOperator> {
        let anchored = Self::validate(gen, l, field, space)?;
        Ok(NoetherOperator {
            space: space.clone(),
            params: gen.params(),
            anchored,
            backend: Backend::Jet {
                derivs: LagrangianDerivs::new(l)?,
                gen: GeneratorDerivs::new(gen)?,
                field: field.clone(),
            },
        })
    }

    fn validate(
        gen: &SymmetryGenerator,
        l: &LagrangianSpec,
        field: &FieldSource,
        space: &SpaceSpec,
    ) -> Result<Vec<bool>> {
        l.check_space(space)?;
        space.check_dim(&vec![0.0; field.dim()])?;
        space.check_dim(&vec![0.0; gen.dim()])?;
        gen.anchored(space)
    }

    pub fn space(&self) -> &SpaceSpec {
        &self.space
    }

    pub fn params(&self) -> usize {
        self.params
    }

    /// Per parameter, whether `f_s` vanishes at the anchor point.
    pub fn anchored(&self) -> &[bool] {
        &self.anchored
    }

    pub fn uses_jets(&self) -> bool {
        matches!(self.backend, Backend::Jet { .. })
    }

    /// All quantities at a point inside the coverage.
    pub fn at(&self, x: &[f64]) -> Result<NoetherPoint> {
        self.space.check_point(x)?;
        self.at_unchecked(x)
    }

    /// As [`NoetherOperator::at`] without the coverage check, for quadrature
    /// nodes closer to the singular endpoint than the inner offset.
    pub(crate) fn at_unchecked(&self, x: &[f64]) -> Result<NoetherPoint> {
        match &self.backend {
            Backend::Symbolic(program) => Ok(self.unpack(&program.eval_vec(x)?)),
            Backend::Jet { derivs, gen, field } => self.jet_point(derivs, gen, field, x),
        }
    }

    fn unpack(&self, out: &[f64]) -> NoetherPoint {
        let (m, d) = (self.params, self.space.dim());
        let mut rest = out;
        let mut take = |n: usize| {
            let (head, tail) = rest.split_at(n);
            rest = tail;
            head.to_vec()
        };
        let theta = take(m * d).chunks(d).map(<[f64]>::to_vec).collect();
        let divergence = take(m);
        let breaking = take(m);
        let increment = take(m * d).chunks(d).map(<[f64]>::to_vec).collect();
        let integrand = take(m);
        let emt = take(d * d).chunks(d).map(<[f64]>::to_vec).collect();
        let el_residual = take(1)[0];
        NoetherPoint {
            theta,
            divergence,
            breaking,
            increment,
            integrand,
            emt,
            el_residual,
        }
    }

    fn jet_point(
        &self,
        derivs: &LagrangianDerivs,
        gen: &GeneratorDerivs,
        field: &FieldSource,
        x: &[f64],
    ) -> Result<NoetherPoint> {
        let d = self.space.dim();
        let one_minus_alpha = 1.0 - self.space.alpha();
        let k = Kinematics::at(field, x, &self.space)?;
        let lv = derivs.eval(k.jet.value, &k.g)?;
        let phi_x = &k.jet.grad;
        let phi_xx = &k.jet.hess;
        // d_j of the composed density and of P_i
        let dl: Vec<f64> = (0..d)
            .map(|j| lv.l_phi * phi_x[j] + (0..d).map(|m| lv.p[m] * k.dg[m][j]).sum::<f64>())
            .collect();
        let dp: Vec<Vec<f64>> = (0..d)
            .map(|i| {
                (0..d)
                    .map(|j| {
                        lv.l_phi_g[i] * phi_x[j]
                            + (0..d).map(|m| lv.l_gg[i][m] * k.dg[m][j]).sum::<f64>()
                    })
                    .collect()
            })
            .collect();
        let el = lv.l_phi - (0..d).map(|i| k.scale[i] * dp[i][i]).sum::<f64>();
        let emt = (0..d)
            .map(|i| {
                (0..d)
                    .map(|j| {
                        let diag = if i == j { k.inverse_scale[i] * lv.l } else { 0.0 };
                        -phi_x[j] * lv.p[i] + diag
                    })
                    .collect()
            })
            .collect();

        let mut out = NoetherPoint {
            theta: Vec::new(),
            divergence: Vec::new(),
            breaking: Vec::new(),
            increment: Vec::new(),
            integrand: Vec::new(),
            emt,
            el_residual: el,
        };
        for gv in gen.eval(x, k.jet.value)? {
            let f = &gv.f;
            // total derivative of the composed C
            let dc: Vec<f64> = (0..d).map(|j| gv.dc[j] + gv.c_phi * phi_x[j]).collect();
            let flow: f64 = (0..d).map(|m| f[m] * phi_x[m]).sum();
            let w = &k.inverse_scale;
            let theta: Vec<f64> = (0..d)
                .map(|i| gv.c * lv.p[i] + flow * lv.p[i] - w[i] * f[i] * lv.l)
                .collect();
            let mut div = 0.0;
            let mut breaking = gv.c * el;
            let mut increment = vec![0.0; d];
            let mut integrand = gv.c * lv.l_phi;
            for i in 0..d {
                let s = k.scale[i];
                let dflow: f64 = (0..d)
                    .map(|m| gv.df[m][i] * phi_x[m] + f[m] * phi_xx[m][i])
                    .sum();
                let dtheta = dc[i] * lv.p[i]
                    + gv.c * dp[i][i]
                    + dflow * lv.p[i]
                    + flow * dp[i][i]
                    - (k.dinverse_scale[i] * f[i] * lv.l
                        + w[i] * gv.df[i][i] * lv.l
                        + w[i] * f[i] * dl[i]);
                div += s * dtheta;

                let transport: f64 = (0..d)
                    .map(|m| f[m] * s * (phi_xx[m][i] * lv.p[i] + phi_x[m] * dp[i][i]))
                    .sum();
                let r = k.offset[i];
                let d_wl = s * (k.dinverse_scale[i] * lv.l + w[i] * dl[i]);
                breaking += -transport - one_minus_alpha * f[i] * k.g[i] * lv.p[i] / r
                    + one_minus_alpha * f[i] * lv.l / r
                    + f[i] * d_wl;

                increment[i] = s * dc[i]
                    + (0..d).map(|m| s * gv.df[m][i] * phi_x[m]).sum::<f64>()
                    - one_minus_alpha * f[i] / r * k.g[i];
                integrand +=
                    increment[i] * lv.p[i] + one_minus_alpha * f[i] * lv.l / r - gv.df[i][i] * lv.l;
            }
            out.theta.push(theta);
            out.divergence.push(div);
            out.breaking.push(breaking);
            out.increment.push(increment);
            out.integrand.push(integrand);
        }
        Ok(out)
    }
}

/// The symbolic counterparts of [`NoetherOperator::jet_point`], in the
/// layout read back by `unpack`.
fn symbolic_outputs(
    gen: &SymmetryGenerator,
    l: &LagrangianSpec,
    comp: &Composition,
    space: &SpaceSpec,
) -> Vec<Expr> {
    let d = space.dim();
    let one_minus_alpha = Expr::constant(1.0 - space.alpha());
    let (l_phi, p) = lagrangian_partials(l);
    let lc = comp.apply(l.density());
    let l_phi_c = comp.apply(&l_phi);
    let pc: Vec<Expr> = p.iter().map(|pi| comp.apply(pi)).collect();
    let w = &comp.inverse_scale;
    let r = &comp.offset;
    let dphi = &comp.dphi;
    let el = &l_phi_c - &Expr::sum((0..d).map(|i| comp.alpha_deriv(&pc[i], i)));

    let mut map = HashMap::new();
    map.insert(FIELD, comp.phi.clone());

    let mut theta_out = Vec::new();
    let mut div_out = Vec::new();
    let mut breaking_out = Vec::new();
    let mut increment_out = Vec::new();
    let mut integrand_out = Vec::new();
    for s in 0..gen.params() {
        let f = gen.f(s);
        let c = gen.c(s).substitute(&map);
        let flow = Expr::sum((0..d).map(|m| f[m].clone() * dphi[m].clone()));
        let theta: Vec<Expr> = (0..d)
            .map(|i| &c * &pc[i] + &flow * &pc[i] - w[i].clone() * f[i].clone() * lc.clone())
            .collect();
        div_out.push(Expr::sum((0..d).map(|i| comp.alpha_deriv(&theta[i], i))));

        let mut breaking = vec![&c * &el];
        let mut integrand = vec![&c * &l_phi_c];
        for i in 0..d {
            for m in 0..d {
                breaking.push(-(f[m].clone() * comp.alpha_deriv(&(&dphi[m] * &pc[i]), i)));
            }
            breaking.push(-(&one_minus_alpha * &f[i] * comp.g[i].clone() * pc[i].clone() / r[i].clone()));
            breaking.push(&one_minus_alpha * &f[i] * lc.clone() / r[i].clone());
            breaking.push(f[i].clone() * comp.alpha_deriv(&(&w[i] * &lc), i));

            let increment = comp.alpha_deriv(&c, i)
                + Expr::sum((0..d).map(|m| comp.alpha_deriv(&f[m], i) * dphi[m].clone()))
                - &one_minus_alpha * &f[i] / r[i].clone() * comp.g[i].clone();
            integrand.push(&increment * &pc[i]);
            integrand.push(&one_minus_alpha * &f[i] * lc.clone() / r[i].clone());
            integrand.push(-(f[i].derivative(&coordinate_name(i)) * lc.clone()));
            increment_out.push(increment);
        }
        breaking_out.push(Expr::sum(breaking));
        integrand_out.push(Expr::sum(integrand));
        theta_out.extend(theta);
    }

    let mut outputs = theta_out;
    outputs.extend(div_out);
    outputs.extend(breaking_out);
    outputs.extend(increment_out);
    outputs.extend(integrand_out);
    for i in 0..d {
        for j in 0..d {
            let mut t = -(&dphi[j] * &pc[i]);
            if i == j {
                t = t + &w[i] * &lc;
            }
            outputs.push(t);
        }
    }
    outputs.push(el);
    outputs
}
