//! Property suites run by `verify`. Each suite reduces its cases to one
//! worst error and compares it with a fixed bound.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use conformable::expr::Expr;
use conformable::frac::{
    self, FieldSource, GridSpec, Sector, SpaceSpec, Spacing,
};
use conformable::noether::{action_variation, commutation_residual, NoetherOperator, SymmetryGenerator};
use conformable::oscillator::{
    analytic_energy_drift, analytic_solution, energy, energy_drift_predicted, integrate,
    integrate_uniform, regularized_energy, EnergyTrace, OscillatorParams,
};
use conformable::variational::{ElOperator, LagrangianSpec};

use crate::output::{fmt_f64, Table};
use crate::random::{point, smooth_field};

type CoreResult<T> = conformable::Result<T>;

#[derive(Debug, Clone, PartialEq)]
pub struct SuiteReport {
    pub name: &'static str,
    pub criterion: u8,
    pub passed: bool,
    pub max_err: f64,
    pub tolerance: f64,
    pub cases: usize,
    /// Set when the suite stopped on an error.
    pub note: Option<String>,
}

impl SuiteReport {
    pub fn summary_line(&self) -> String {
        let status = if self.passed { "PASS" } else { "FAIL" };
        let mut line = format!("SUITE {} {status} max_err={}", self.name, fmt_f64(self.max_err));
        if let Some(note) = &self.note {
            line.push_str(&format!(" error={note}"));
        }
        line
    }
}

/// Worst error over the cases of a suite; any NaN is a failure.
#[derive(Debug, Default)]
pub struct Errors {
    worst: Option<f64>,
    nan: bool,
    cases: usize,
}

impl Errors {
    fn push(&mut self, e: f64) {
        self.cases += 1;
        if e.is_nan() {
            self.nan = true;
        } else {
            self.worst = Some(self.worst.map_or(e, |w| w.max(e)));
        }
    }

    fn rel(&mut self, got: f64, expect: f64) {
        self.push((got - expect).abs() / expect.abs().max(1.0));
    }
}

pub struct Suite {
    pub name: &'static str,
    pub criterion: u8,
    /// The suite passes when the worst error is strictly below this.
    pub tolerance: f64,
    run: fn(&mut ChaCha8Rng, &mut Errors) -> CoreResult<()>,
}

pub fn suites() -> Vec<Suite> {
    let s = |name, criterion, tolerance, run| Suite {
        name,
        criterion,
        tolerance,
        run,
    };
    vec![
        s("fundamental_theorem", 1, 1e-8, fundamental_theorem),
        s("limit_definition", 2, 1e-6, limit_definition),
        s("linearity", 3, 1e-9, linearity),
        s("leibniz", 3, 1e-9, leibniz),
        s("chain_rule", 3, 1e-9, chain_rule),
        s("el_oscillator", 4, 1e-8, el_oscillator),
        s("el_plane_wave", 4, 1e-6, el_plane_wave),
        s("breaking_translation", 5, 1e-6, |r, e| breaking(r, e, 0)),
        s("breaking_rotation", 5, 1e-6, |r, e| breaking(r, e, 1)),
        s("breaking_scaling", 5, 1e-6, |r, e| breaking(r, e, 2)),
        s("commutation", 6, 1e-8, commutation),
        s("variation_scaling", 7, 0.5, |r, e| variation(r, e, false)),
        s("variation_field", 7, 0.5, |r, e| variation(r, e, true)),
        s("energy_weight", 8, 1e-9, energy_weight),
        s("energy_drift", 8, 1e-5, energy_drift),
        s("regularized_analytic", 8, 1e-9, regularized_analytic),
        s("regularized_integrated", 8, 1e-6, regularized_integrated),
        s("classical_energy", 9, 1e-8, classical_energy),
        s("classical_emt", 9, 1e-6, classical_emt),
        s("classical_reduction", 9, 1e-10, classical_reduction),
        s("delayed_match", 10, 1e-6, delayed_match),
        s("delayed_gaps", 10, 0.0, delayed_gaps),
    ]
}

/// Run one suite with its own random stream derived from `seed`.
pub fn run_suite(suite: &Suite, index: usize, seed: u64) -> SuiteReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index as u64);
    let mut errors = Errors::default();
    let outcome = (suite.run)(&mut rng, &mut errors);
    let max_err = if errors.nan {
        f64::NAN
    } else {
        errors.worst.unwrap_or(f64::INFINITY)
    };
    SuiteReport {
        name: suite.name,
        criterion: suite.criterion,
        passed: outcome.is_ok() && max_err < suite.tolerance,
        max_err,
        tolerance: suite.tolerance,
        cases: errors.cases,
        note: outcome.err().map(|e| e.to_string()),
    }
}

/// All suites, in parallel, reported in a fixed order.
pub fn run_all(seed: u64) -> Vec<SuiteReport> {
    let all = suites();
    all.par_iter()
        .enumerate()
        .map(|(k, s)| run_suite(s, k, seed))
        .collect()
}

pub fn report_table(reports: &[SuiteReport]) -> Table {
    let mut t = Table::new(["suite", "criterion", "status", "max_err", "tolerance", "cases"]);
    for r in reports {
        t.push(vec![
            r.name.to_string(),
            r.criterion.to_string(),
            if r.passed { "PASS" } else { "FAIL" }.to_string(),
            fmt_f64(r.max_err),
            fmt_f64(r.tolerance),
            r.cases.to_string(),
        ]);
    }
    t
}

fn field(e: Expr, dim: usize) -> CoreResult<FieldSource> {
    FieldSource::closed_form(e, dim)
}

fn fundamental_theorem(_: &mut ChaCha8Rng, errors: &mut Errors) -> CoreResult<()> {
    for alpha in [0.3, 0.5, 0.9, 1.0] {
        let space = SpaceSpec::right(1, alpha)?;
        let f = FieldSource::parse("sin(x_1) - sin(0)", 1)?;
        let d = frac::conf_deriv_expr(f.as_closed_form().expect("closed form").expr(), &space, 0);
        let h = field(d, 1)?;
        for s in [0.5f64, 1.0, 2.0] {
            let v = frac::conf_integral(&h, 0, 0.0, s, &space)?;
            errors.push((v - s.sin()).abs());
        }
    }
    Ok(())
}

fn limit_definition(rng: &mut ChaCha8Rng, errors: &mut Errors) -> CoreResult<()> {
    for _ in 0..50 {
        let f = field(smooth_field(rng, 2), 2)?;
        let points: Vec<Vec<f64>> = (0..10).map(|_| point(rng, 2, 0.2, 3.0)).collect();
        for alpha in [0.3, 0.5, 0.9, 1.0] {
            let space = SpaceSpec::right(2, alpha)?;
            for x in &points {
                for axis in 0..2 {
                    let exact = frac::conf_deriv(&f, axis, x, &space)?;
                    let (limit, _) = frac::conf_deriv_limit(&f, axis, x, &space)?;
                    errors.rel(limit, exact);
                }
            }
        }
    }
    Ok(())
}

struct AxiomCase {
    space: SpaceSpec,
    axis: usize,
    x: Vec<f64>,
    f: Expr,
    g: Expr,
}

fn axiom_case(rng: &mut ChaCha8Rng) -> CoreResult<AxiomCase> {
    let alpha = rng.gen_range(0.1..=1.0);
    Ok(AxiomCase {
        space: SpaceSpec::right(2, alpha)?,
        axis: rng.gen_range(0..2),
        x: point(rng, 2, 0.1, 4.0),
        f: smooth_field(rng, 2),
        g: smooth_field(rng, 2),
    })
}

impl AxiomCase {
    fn d(&self, e: Expr) -> CoreResult<f64> {
        frac::conf_deriv(&field(e, 2)?, self.axis, &self.x, &self.space)
    }

    fn value(&self, e: &Expr) -> CoreResult<f64> {
        field(e.clone(), 2)?.value(&self.x)
    }
}

fn linearity(rng: &mut ChaCha8Rng, errors: &mut Errors) -> CoreResult<()> {
    for _ in 0..100 {
        let c = axiom_case(rng)?;
        let (a, b) = (rng.gen_range(-3.0..3.0), rng.gen_range(-3.0..3.0));
        let lhs = c.d(a * c.f.clone() + b * c.g.clone())?;
        let rhs = a * c.d(c.f.clone())? + b * c.d(c.g.clone())?;
        errors.rel(lhs, rhs);
    }
    Ok(())
}

fn leibniz(rng: &mut ChaCha8Rng, errors: &mut Errors) -> CoreResult<()> {
    for _ in 0..100 {
        let c = axiom_case(rng)?;
        let lhs = c.d(c.f.clone() * c.g.clone())?;
        let rhs = c.value(&c.f)? * c.d(c.g.clone())? + c.value(&c.g)? * c.d(c.f.clone())?;
        errors.rel(lhs, rhs);
    }
    Ok(())
}

fn chain_rule(rng: &mut ChaCha8Rng, errors: &mut Errors) -> CoreResult<()> {
    for _ in 0..100 {
        let c = axiom_case(rng)?;
        let g = c.g.clone();
        let (outer, slope): (Expr, fn(f64) -> f64) = match rng.gen_range(0..5) {
            0 => (g.sin(), f64::cos),
            1 => (g.cos(), |u| -u.sin()),
            2 => ((0.3 * g).exp(), |u| 0.3 * (0.3 * u).exp()),
            3 => (g.clone() * g.clone() * g.clone() - g, |u| 3.0 * u * u - 1.0),
            _ => ((g.clone() * g + 1.0).sqrt(), |u| u / (u * u + 1.0).sqrt()),
        };
        let lhs = c.d(outer)?;
        let rhs = slope(c.value(&c.g)?) * c.d(c.g.clone())?;
        errors.rel(lhs, rhs);
    }
    Ok(())
}

const WAVE_M: f64 = 1.3;
const WAVE_XI: f64 = 0.7;

fn wave_lagrangian() -> CoreResult<LagrangianSpec> {
    LagrangianSpec::parse(
        &format!("0.5*{WAVE_XI}*(g_1^2 + g_2^2) - 0.5*{WAVE_M}^2*phi^2"),
        2,
        Sector::Right,
    )
}

/// `cos(k . u)` with `u_i = x_i^alpha / alpha` and `|k| = m / sqrt(xi)`.
fn plane_wave(alpha: f64, angle: f64) -> CoreResult<FieldSource> {
    let k = WAVE_M / WAVE_XI.sqrt();
    let u = |i: &str| Expr::var(i).powf(alpha) * (1.0 / alpha);
    let phase = k * angle.cos() * u("x_1") + k * angle.sin() * u("x_2");
    field(phase.cos(), 2)
}

fn el_oscillator(_: &mut ChaCha8Rng, errors: &mut Errors) -> CoreResult<()> {
    for alpha in [0.5, 0.9] {
        let p = OscillatorParams::new(WAVE_M, WAVE_XI, alpha)?.with_amplitudes(1.0, 0.5);
        let space = SpaceSpec::right(1, alpha)?;
        let f = field(p.solution_expr()?, 1)?;
        let op = ElOperator::new(&p.lagrangian(Sector::Right), &f, &space)?;
        for k in 0..200 {
            let t = 0.1 + 9.9 * k as f64 / 199.0;
            errors.push(op.residual(&[t])?.abs());
        }
    }
    Ok(())
}

fn el_plane_wave(rng: &mut ChaCha8Rng, errors: &mut Errors) -> CoreResult<()> {
    let l = wave_lagrangian()?;
    for alpha in [0.5, 0.9] {
        let space = SpaceSpec::right(2, alpha)?;
        for _ in 0..2 {
            let f = plane_wave(alpha, rng.gen_range(0.0..std::f64::consts::TAU))?;
            let op = ElOperator::new(&l, &f, &space)?;
            for _ in 0..25 {
                errors.push(op.residual(&point(rng, 2, 0.1, 5.0))?.abs());
            }
        }
    }
    Ok(())
}

fn breaking(rng: &mut ChaCha8Rng, errors: &mut Errors, which: usize) -> CoreResult<()> {
    let gen = match which {
        0 => SymmetryGenerator::translation(2),
        1 => SymmetryGenerator::rotation(),
        _ => SymmetryGenerator::scaling(2),
    };
    let l = wave_lagrangian()?;
    for alpha in [0.5, 0.9] {
        let space = SpaceSpec::right(2, alpha)?;
        let f = plane_wave(alpha, rng.gen_range(0.0..std::f64::consts::TAU))?;
        let op = NoetherOperator::new(&gen, &l, &f, &space)?;
        for _ in 0..50 {
            for b in op.breaking(&point(rng, 2, 0.1, 5.0))?.b {
                errors.push(b.abs());
            }
        }
    }
    Ok(())
}

fn commutation(rng: &mut ChaCha8Rng, errors: &mut Errors) -> CoreResult<()> {
    for _ in 0..50 {
        let f = field(smooth_field(rng, 2), 2)?;
        let points: Vec<Vec<f64>> = (0..2).map(|_| point(rng, 2, 0.1, 4.0)).collect();
        for alpha in [0.3, 0.5, 0.9] {
            let space = SpaceSpec::right(2, alpha)?;
            for x in &points {
                for i in 0..2 {
                    for k in 0..2 {
                        errors.push(commutation_residual(&f, i, k, x, &space)?.abs());
                    }
                }
            }
        }
    }
    Ok(())
}

/// `|ratio - 4|` where `ratio` is the shrink of `|direct - formula|` as
/// `beta` halves.
fn variation(_: &mut ChaCha8Rng, errors: &mut Errors, field_rescaling: bool) -> CoreResult<()> {
    let gen = if field_rescaling {
        SymmetryGenerator::parse(1, &[vec!["0"]], &["phi"])?
    } else {
        SymmetryGenerator::scaling(1)
    };
    let grid = GridSpec::uniform(1, 16, Spacing::UniformU)?;
    for alpha in [0.5, 0.9] {
        let p = OscillatorParams::new(1.0, 1.0, alpha)?.with_amplitudes(1.0, 0.4);
        let space = SpaceSpec::right(1, alpha)?;
        let f = field(p.solution_expr()?, 1)?;
        let l = p.lagrangian(Sector::Right);
        let mut gaps = Vec::new();
        for beta in [1e-3, 5e-4, 2.5e-4] {
            let (direct, formula) = action_variation(&gen, &l, &f, &space, &grid, &[beta])?;
            gaps.push((direct - formula).abs());
        }
        for w in gaps.windows(2) {
            errors.push((w[0] / w[1] - 4.0).abs());
        }
    }
    Ok(())
}

fn random_params(rng: &mut ChaCha8Rng, alpha_max: f64) -> CoreResult<OscillatorParams> {
    let alpha = rng.gen_range(0.2..=alpha_max);
    let p = OscillatorParams::new(rng.gen_range(0.5..2.0), rng.gen_range(0.5..2.0), alpha)?;
    Ok(p.with_amplitudes(rng.gen_range(-1.5..1.5), rng.gen_range(-1.5..1.5)))
}

fn log_points(lo: f64, hi: f64, n: usize) -> impl Iterator<Item = f64> {
    (0..n).map(move |k| lo * (hi / lo).powf(k as f64 / (n - 1) as f64))
}

fn energy_weight(rng: &mut ChaCha8Rng, errors: &mut Errors) -> CoreResult<()> {
    for _ in 0..10 {
        let p = random_params(rng, 1.0)?;
        let scale = p.energy_scale()?;
        for t in log_points(0.1, 10.0, 50) {
            let (phi, v) = analytic_solution(&p, t)?;
            let e = energy(&p, t, phi, v)? * t.powf(1.0 - p.alpha());
            errors.push((e - scale).abs() / scale);
        }
    }
    Ok(())
}

fn energy_drift(rng: &mut ChaCha8Rng, errors: &mut Errors) -> CoreResult<()> {
    for _ in 0..10 {
        let p = random_params(rng, 0.99)?;
        for k in 0..=45 {
            let t = 0.5 + 0.1 * k as f64;
            let predicted = energy_drift_predicted(&p, t)?;
            let measured = analytic_energy_drift(&p, t)?;
            errors.push((measured - predicted).abs() / predicted.abs());
        }
    }
    Ok(())
}

fn regularized_analytic(rng: &mut ChaCha8Rng, errors: &mut Errors) -> CoreResult<()> {
    for _ in 0..10 {
        let p = random_params(rng, 1.0)?;
        for t in log_points(0.1, 10.0, 50) {
            let (phi, v) = analytic_solution(&p, t)?;
            errors.push(regularized_energy(&p, t, phi, v)?.abs());
        }
    }
    Ok(())
}

fn delayed(alpha: f64) -> CoreResult<(OscillatorParams, f64)> {
    let p = OscillatorParams::new(1.0, 1.0, alpha)?;
    let t0 = p.delayed_start();
    Ok((p, t0))
}

fn regularized_integrated(_: &mut ChaCha8Rng, errors: &mut Errors) -> CoreResult<()> {
    for alpha in [0.9, 0.5] {
        let (p, t0) = delayed(alpha)?;
        let traj = integrate_uniform(&p, t0, 1.0, 1.0, t0 + 10.0, 0.05, 1e-10)?;
        let trace = EnergyTrace::of(&p.fitted(t0, 1.0, 1.0)?, &traj)?;
        for d in trace.regularized_drift()? {
            errors.push(d.abs());
        }
    }
    Ok(())
}

fn classical_energy(_: &mut ChaCha8Rng, errors: &mut Errors) -> CoreResult<()> {
    let (p, t0) = delayed(1.0)?;
    let periods = 10.0 * std::f64::consts::TAU;
    let traj = integrate(&p, t0, 1.0, 1.0, t0 + periods, 1e-10)?;
    let e0 = energy(&p, t0, 1.0, 1.0)?;
    for k in 0..traj.len() {
        let e = energy(&p, traj.t[k], traj.phi[k], traj.dphi[k])?;
        errors.push((e - e0).abs() / e0);
    }
    Ok(())
}

/// `sum_i d_i T^i_j` through the translation current, which is `T` itself.
fn classical_emt(rng: &mut ChaCha8Rng, errors: &mut Errors) -> CoreResult<()> {
    let p = OscillatorParams::new(WAVE_M, WAVE_XI, 1.0)?.with_amplitudes(1.0, 0.3);
    let space = SpaceSpec::right(1, 1.0)?;
    let f = field(p.solution_expr()?, 1)?;
    let op = NoetherOperator::new(&SymmetryGenerator::translation(1), &p.lagrangian(Sector::Right), &f, &space)?;
    for _ in 0..50 {
        for d in op.divergence(&point(rng, 1, 0.1, 10.0))? {
            errors.push(d.abs());
        }
    }
    let space = SpaceSpec::right(2, 1.0)?;
    let f = plane_wave(1.0, rng.gen_range(0.0..std::f64::consts::TAU))?;
    let op = NoetherOperator::new(&SymmetryGenerator::translation(2), &wave_lagrangian()?, &f, &space)?;
    for _ in 0..50 {
        for d in op.divergence(&point(rng, 2, 0.1, 5.0))? {
            errors.push(d.abs());
        }
    }
    Ok(())
}

/// At `alpha = 1` against hand-written classical results.
fn classical_reduction(rng: &mut ChaCha8Rng, errors: &mut Errors) -> CoreResult<()> {
    let space = SpaceSpec::right(2, 1.0)?;
    let f = FieldSource::parse("sin(x_1)*exp(0.3*x_2)", 2)?;
    for _ in 0..50 {
        let x = point(rng, 2, 0.1, 5.0);
        let d1 = x[0].cos() * (0.3 * x[1]).exp();
        let d2 = 0.3 * x[0].sin() * (0.3 * x[1]).exp();
        errors.rel(frac::conf_deriv(&f, 0, &x, &space)?, d1);
        errors.rel(frac::conf_deriv(&f, 1, &x, &space)?, d2);
        errors.rel(frac::weight(&x, &space)?, 1.0);
    }

    let line = SpaceSpec::right(1, 1.0)?;
    let cos = FieldSource::parse("cos(x_1)", 1)?;
    for s in [0.5f64, 1.0, 2.0, 5.0] {
        errors.rel(frac::conf_integral(&cos, 0, 0.0, s, &line)?, s.sin());
    }

    // off-shell phi = t^3 under the oscillator
    let (m, xi) = (WAVE_M, WAVE_XI);
    let p = OscillatorParams::new(m, xi, 1.0)?;
    let l = p.lagrangian(Sector::Right);
    let cube = FieldSource::parse("x_1^3", 1)?;
    let el = ElOperator::new(&l, &cube, &line)?;
    let current = NoetherOperator::new(&SymmetryGenerator::translation(1), &l, &cube, &line)?;
    for k in 0..20 {
        let t = 0.25 + 0.5 * k as f64;
        let (phi, v) = (t.powi(3), 3.0 * t * t);
        errors.rel(el.residual(&[t])?, -m * m * phi - 6.0 * xi * t);
        let energy = 0.5 * xi * v * v + 0.5 * m * m * phi * phi;
        errors.rel(current.current(&[t])?.theta[0][0], -energy);
    }
    Ok(())
}

fn delayed_match(_: &mut ChaCha8Rng, errors: &mut Errors) -> CoreResult<()> {
    for alpha in [1.0, 0.9, 0.5] {
        let (p, t0) = delayed(alpha)?;
        let traj = integrate_uniform(&p, t0, 1.0, 1.0, t0 + 10.0, 0.01, 1e-10)?;
        errors.push(traj.max_error(&p.fitted(t0, 1.0, 1.0)?)?);
    }
    Ok(())
}

/// `gap_k - gap_(k+1)` between successive zero crossings; all negative when
/// the gaps grow.
fn delayed_gaps(_: &mut ChaCha8Rng, errors: &mut Errors) -> CoreResult<()> {
    for alpha in [0.9, 0.5] {
        let (p, t0) = delayed(alpha)?;
        let traj = integrate(&p, t0, 1.0, 1.0, t0 + 200.0, 1e-10)?;
        let zeros = traj.zero_crossings();
        if zeros.len() < 4 {
            errors.push(f64::INFINITY);
            continue;
        }
        let gaps: Vec<f64> = zeros.windows(2).map(|w| w[1] - w[0]).collect();
        for w in gaps.windows(2) {
            errors.push(w[0] - w[1]);
        }
    }
    Ok(())
}
