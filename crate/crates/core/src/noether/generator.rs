use crate::error::{Error, Result};
use crate::expr::{self, coordinate_name, Expr, Program, VarRole, VarSpace, FIELD};
use crate::frac::SpaceSpec;

/// An `M`-parameter infinitesimal transformation
/// `x' = x - sum_s f_s(x) beta_s`, `phi' = phi + sum_s C_s(x, phi) beta_s`.
#[derive(Debug, Clone, PartialEq)]
pub struct SymmetryGenerator {
    dim: usize,
    f: Vec<Vec<Expr>>,
    c: Vec<Expr>,
}

// |f(a)| below this (relative to max(1, |a|)) counts as anchored.
const ANCHOR_TOLERANCE: f64 = 1e-12;

impl SymmetryGenerator {
    pub fn new(dim: usize, f: Vec<Vec<Expr>>, c: Vec<Expr>) -> Result<SymmetryGenerator> {
        if f.is_empty() {
            return Err(Error::Generator("at least one parameter is required".into()));
        }
        if f.len() != c.len() {
            return Err(Error::Generator(format!(
                "{} coordinate parts but {} field parts",
                f.len(),
                c.len()
            )));
        }
        let space = VarSpace::generator(dim);
        for (s, (fs, cs)) in f.iter().zip(&c).enumerate() {
            if fs.len() != dim {
                return Err(Error::Generator(format!(
                    "parameter {} has {} coordinate components, expected {dim}",
                    s + 1,
                    fs.len()
                )));
            }
            for e in fs {
                for name in e.free_variables() {
                    if !matches!(space.role_of(&name), Some(VarRole::Coordinate(_))) {
                        return Err(Error::Generator(format!(
                            "coordinate part of parameter {} references `{name}`",
                            s + 1
                        )));
                    }
                }
            }
            for name in cs.free_variables() {
                if space.role_of(&name).is_none() {
                    return Err(Error::Generator(format!(
                        "field part of parameter {} references `{name}`",
                        s + 1
                    )));
                }
            }
        }
        Ok(SymmetryGenerator { dim, f, c })
    }

    /// Parse `f` texts over the coordinates and `C` texts over the
    /// coordinates and `phi`.
    pub fn parse<S: AsRef<str>>(dim: usize, f: &[Vec<S>], c: &[S]) -> Result<SymmetryGenerator> {
        let space = VarSpace::generator(dim);
        let f = f
            .iter()
            .map(|fs| {
                fs.iter()
                    .map(|t| expr::parse(t.as_ref(), &space))
                    .collect::<std::result::Result<Vec<_>, _>>()
            })
            .collect::<std::result::Result<Vec<_>, _>>()?;
        let c = c
            .iter()
            .map(|t| expr::parse(t.as_ref(), &space))
            .collect::<std::result::Result<Vec<_>, _>>()?;
        SymmetryGenerator::new(dim, f, c)
    }

    /// Translations along every axis, `f_s^k = -delta_s^k`, so that
    /// `x' = x + beta` for the identification `sum f beta = -epsilon`.
    pub fn translation(dim: usize) -> SymmetryGenerator {
        let f = (0..dim)
            .map(|s| {
                (0..dim)
                    .map(|k| if k == s { Expr::constant(-1.0) } else { Expr::zero() })
                    .collect()
            })
            .collect();
        SymmetryGenerator::new(dim, f, vec![Expr::zero(); dim]).expect("translation generator")
    }

    /// Rotation in the `(x_1, x_2)` plane, `f = (x_2, -x_1)`.
    pub fn rotation() -> SymmetryGenerator {
        let f = vec![vec![Expr::var("x_2"), -Expr::var("x_1")]];
        SymmetryGenerator::new(2, f, vec![Expr::zero()]).expect("rotation generator")
    }

    /// Dilation `f = x`.
    pub fn scaling(dim: usize) -> SymmetryGenerator {
        let f = vec![(0..dim).map(|k| Expr::var(&coordinate_name(k))).collect()];
        SymmetryGenerator::new(dim, f, vec![Expr::zero()]).expect("scaling generator")
    }

    pub fn zero(dim: usize, params: usize) -> SymmetryGenerator {
        SymmetryGenerator::new(
            dim,
            vec![vec![Expr::zero(); dim]; params.max(1)],
            vec![Expr::zero(); params.max(1)],
        )
        .expect("zero generator")
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Number of parameters `M`.
    pub fn params(&self) -> usize {
        self.f.len()
    }

    pub fn f(&self, sigma: usize) -> &[Expr] {
        &self.f[sigma]
    }

    pub fn c(&self, sigma: usize) -> &Expr {
        &self.c[sigma]
    }

    /// Whether each `f_s` vanishes at the anchor point of the space.
    pub fn anchored(&self, space: &SpaceSpec) -> Result<Vec<bool>> {
        let a = space.anchors();
        let bindings: Vec<(String, f64)> = a
            .iter()
            .enumerate()
            .map(|(i, &ai)| (coordinate_name(i), ai))
            .collect();
        let scale = a.iter().fold(1.0f64, |m, v| m.max(v.abs()));
        self.f
            .iter()
            .map(|fs| {
                for e in fs {
                    if e.eval(&bindings)?.abs() > ANCHOR_TOLERANCE * scale {
                        return Ok(false);
                    }
                }
                Ok(true)
            })
            .collect()
    }
}

/// Values of one parameter's `f`, `C` and their partials.
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct GeneratorValues {
    pub f: Vec<f64>,
    /// `df[k][j] = d f^k / d x_j`.
    pub df: Vec<Vec<f64>>,
    pub c: f64,
    /// `d C / d x_j` at fixed `phi`.
    pub dc: Vec<f64>,
    pub c_phi: f64,
}

#[derive(Debug, Clone)]
pub(crate) struct GeneratorDerivs {
    dim: usize,
    params: usize,
    program: Program,
}

impl GeneratorDerivs {
    pub fn new(gen: &SymmetryGenerator) -> Result<GeneratorDerivs> {
        let d = gen.dim;
        let mut outputs = Vec::new();
        for s in 0..gen.params() {
            outputs.extend(gen.f[s].iter().cloned());
            for fk in &gen.f[s] {
                outputs.extend((0..d).map(|j| fk.derivative(&coordinate_name(j))));
            }
            outputs.push(gen.c[s].clone());
            outputs.extend((0..d).map(|j| gen.c[s].derivative(&coordinate_name(j))));
            outputs.push(gen.c[s].derivative(FIELD));
        }
        Ok(GeneratorDerivs {
            dim: d,
            params: gen.params(),
            program: Program::compile_many(&outputs, &VarSpace::generator(d))?,
        })
    }

    pub fn eval(&self, x: &[f64], phi: f64) -> Result<Vec<GeneratorValues>> {
        let d = self.dim;
        let mut inputs = x.to_vec();
        inputs.push(phi);
        let out = self.program.eval_vec(&inputs)?;
        let stride = d + d * d + 1 + d + 1;
        Ok((0..self.params)
            .map(|s| {
                let o = &out[s * stride..(s + 1) * stride];
                GeneratorValues {
                    f: o[..d].to_vec(),
                    df: (0..d).map(|k| o[d + k * d..d + (k + 1) * d].to_vec()).collect(),
                    c: o[d + d * d],
                    dc: o[d + d * d + 1..d + d * d + 1 + d].to_vec(),
                    c_phi: o[stride - 1],
                }
            })
            .collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constructors() {
        let t = SymmetryGenerator::translation(2);
        assert_eq!(t.params(), 2);
        assert_eq!(t.f(1), &[Expr::zero(), Expr::constant(-1.0)]);
        let r = SymmetryGenerator::rotation();
        assert_eq!(r.f(0)[1].to_string(), "-x_1");
    }

    #[test]
    fn parse_and_validate() {
        let g = SymmetryGenerator::parse(1, &[vec!["x_1^2"]], &["0.5*phi"]).unwrap();
        assert_eq!(g.params(), 1);
        assert!(SymmetryGenerator::parse(1, &[vec!["phi"]], &["0"]).is_err());
        assert!(SymmetryGenerator::parse(2, &[vec!["x_1"]], &["0"]).is_err());
        assert!(SymmetryGenerator::parse(1, &[vec!["x_1"]], &["g_1"]).is_err());
    }

    #[test]
    fn anchoring() {
        let space = SpaceSpec::right(2, 0.5).unwrap();
        assert_eq!(SymmetryGenerator::scaling(2).anchored(&space).unwrap(), vec![true]);
        assert_eq!(SymmetryGenerator::rotation().anchored(&space).unwrap(), vec![true]);
        assert_eq!(
            SymmetryGenerator::translation(2).anchored(&space).unwrap(),
            vec![false, false]
        );
    }

    #[test]
    fn generator_partials() {
        let g = SymmetryGenerator::parse(2, &[vec!["x_1*x_2", "x_2^2"]], &["phi*x_1"]).unwrap();
        let v = &GeneratorDerivs::new(&g).unwrap().eval(&[2.0, 3.0], 5.0).unwrap()[0];
        assert_eq!(v.f, vec![6.0, 9.0]);
        assert_eq!(v.df, vec![vec![3.0, 2.0], vec![0.0, 6.0]]);
        assert_eq!((v.c, v.c_phi), (10.0, 2.0));
        assert_eq!(v.dc, vec![5.0, 0.0]);
    }
}
