use conformable::frac::{FieldSource, Sector, SpaceSpec};
use conformable::noether::{amt, emt, NoetherOperator, SymmetryGenerator};
use conformable::variational::LagrangianSpec;
use proptest::prelude::*;

fn free_2d() -> LagrangianSpec {
    LagrangianSpec::parse("0.5*(g_1^2 + g_2^2) - 0.5*phi^2", 2, Sector::Right).unwrap()
}

fn wave(alpha: f64, k1: f64, k2: f64) -> FieldSource {
    FieldSource::parse(&format!("cos({k1}*x_1^{alpha}/{alpha} + {k2}*x_2^{alpha}/{alpha})"), 2).unwrap()
}

fn interior() -> impl Strategy<Value = [f64; 2]> {
    (0.2f64..5.0, 0.2f64..5.0).prop_map(|(a, b)| [a, b])
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn breaking_vanishes_on_shell(
        x in interior(),
        alpha in prop::sample::select(vec![0.4, 0.6, 0.9]),
        angle in 0.0f64..std::f64::consts::TAU,
    ) {
        let f = wave(alpha, angle.cos(), angle.sin());
        for gen in [SymmetryGenerator::translation(2), SymmetryGenerator::rotation(), SymmetryGenerator::scaling(2)] {
            let op = NoetherOperator::new(&gen, &free_2d(), &f, &SpaceSpec::right(2, alpha).unwrap()).unwrap();
            let p = op.at(&x).unwrap();
            prop_assert!(p.el_residual.abs() < 1e-9);
            for b in &p.breaking {
                prop_assert!(b.abs() < 1e-6, "{b}");
            }
        }
    }

    /// Off-shell too: the divergence plus the breaking term is the
    /// first-order integrand of the action variation.
    #[test]
    fn divergence_identity(x in interior(), c in -1.0f64..1.0) {
        let space = SpaceSpec::right(2, 0.7).unwrap();
        let f = FieldSource::parse(&format!("x_1^2*x_2 + {c}*sin(x_1 + 2*x_2)"), 2).unwrap();
        let l = LagrangianSpec::parse("0.5*(g_1^2 + g_2^2) - 0.5*phi^2 - 0.1*phi^3*g_1", 2, Sector::Right).unwrap();
        let op = NoetherOperator::new(&SymmetryGenerator::rotation(), &l, &f, &space).unwrap();
        let p = op.at(&x).unwrap();
        let lhs = p.divergence[0] + p.breaking[0];
        prop_assert!((lhs - p.integrand[0]).abs() <= 1e-6 * lhs.abs().max(1.0));
    }

    #[test]
    fn amt_is_coordinate_times_emt(x in interior()) {
        let space = SpaceSpec::right(2, 0.5).unwrap();
        let f = wave(0.5, 0.6, 0.8);
        let t = emt(&free_2d(), &f, &x, &space).unwrap();
        let m = amt(&free_2d(), &f, &x, &space).unwrap();
        for i in 0..2 {
            for k in 0..2 {
                for j in 0..2 {
                    prop_assert_eq!(m[i][k][j], x[k] * t[i][j]);
                }
            }
        }
    }
}

#[test]
fn classical_emt_is_divergence_free() {
    let space = SpaceSpec::right(2, 1.0).unwrap();
    let f = FieldSource::parse("cos(0.6*x_1 + 0.8*x_2) + 0.3*sin(0.8*x_1 - 0.6*x_2)", 2).unwrap();
    let op = NoetherOperator::new(&SymmetryGenerator::translation(2), &free_2d(), &f, &space).unwrap();
    for x in [[0.5, 0.5], [1.7, 3.2], [4.0, 0.3]] {
        let p = op.at(&x).unwrap();
        for d in &p.divergence {
            assert!(d.abs() < 1e-6, "{d}");
        }
    }
    let osc = LagrangianSpec::parse("0.5*g_1^2 - 0.5*phi^2", 1, Sector::Right).unwrap();
    let f = FieldSource::parse("cos(x_1) - 0.4*sin(x_1)", 1).unwrap();
    let space = SpaceSpec::right(1, 1.0).unwrap();
    let op = NoetherOperator::new(&SymmetryGenerator::translation(1), &osc, &f, &space).unwrap();
    for t in [0.5, 2.0, 7.5] {
        assert!(op.at(&[t]).unwrap().divergence[0].abs() < 1e-6);
    }
}

#[test]
fn anchoring_is_reported() {
    let space = SpaceSpec::right(2, 0.5).unwrap();
    let f = wave(0.5, 0.6, 0.8);
    let flags = |g: SymmetryGenerator| NoetherOperator::new(&g, &free_2d(), &f, &space).unwrap().anchored().to_vec();
    assert_eq!(flags(SymmetryGenerator::scaling(2)), vec![true]);
    assert_eq!(flags(SymmetryGenerator::rotation()), vec![true]);
    assert_eq!(flags(SymmetryGenerator::translation(2)), vec![false, false]);
}
