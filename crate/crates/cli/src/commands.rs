use rayon::prelude::*;

use conformable::frac::{self, IntegrationBox, Tolerance};
use conformable::noether::NoetherOperator;
use conformable::oscillator::{analytic_solution, integrate_uniform, EnergyTrace, OscillatorParams, Trajectory};
use conformable::variational::{action, ElOperator};

use crate::config::{OscillatorMode, ScenarioConfig};
use crate::output::{coordinate_header, fmt_f64, point_fields, Table};
use crate::{verify, CliError, Result};

#[derive(Debug, Clone, PartialEq)]
pub enum Command {
    /// Evaluate at this point, or at `[deriv] point` when `None`.
    Deriv { point: Option<Vec<f64>> },
    Integrate,
    Action,
    El,
    Noether,
    Oscillator,
    Verify,
}

#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    /// Overrides `[verify] seed`.
    pub seed: Option<u64>,
}

/// What a command produced: lines for standard output and named CSV files.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub lines: Vec<String>,
    pub files: Vec<(String, String)>,
    /// False when a verification suite failed.
    pub success: bool,
}

impl Outcome {
    fn lines(lines: Vec<String>) -> Outcome {
        Outcome {
            lines,
            files: Vec::new(),
            success: true,
        }
    }
}

pub fn run(cmd: &Command, cfg: &ScenarioConfig, opts: &RunOptions) -> Result<Outcome> {
    match cmd {
        Command::Deriv { point } => deriv(cfg, point.as_deref()),
        Command::Integrate => integrate(cfg),
        Command::Action => action_value(cfg),
        Command::El => el(cfg),
        Command::Noether => noether(cfg),
        Command::Oscillator => oscillator(cfg),
        Command::Verify => verify_all(cfg, opts),
    }
}

fn deriv(cfg: &ScenarioConfig, point: Option<&[f64]>) -> Result<Outcome> {
    let space = cfg.space()?;
    let f = cfg.field()?;
    let x = point
        .or(cfg.deriv_point.as_deref())
        .ok_or_else(|| CliError::Config("no point given (use --point or [deriv] point)".into()))?;
    space.check_dim(x)?;
    let mut lines = Vec::new();
    for axis in 0..space.dim() {
        let closed = frac::conf_deriv(f, axis, x, space)?;
        let (limit, est) = frac::conf_deriv_limit(f, axis, x, space)?;
        lines.push(format!(
            "axis={} conf_deriv={} limit={} est_error={}",
            axis + 1,
            fmt_f64(closed),
            fmt_f64(limit),
            fmt_f64(est)
        ));
    }
    Ok(Outcome::lines(lines))
}

fn integrate(cfg: &ScenarioConfig) -> Result<Outcome> {
    let space = cfg.space()?;
    let f = cfg.field()?;
    let grid = cfg.grid()?;
    let bx = IntegrationBox::for_field(space, f)?;
    let v = frac::integrate_box(&|x| f.value(x), space, &grid, &bx, Tolerance::default())?;
    Ok(Outcome::lines(vec![format!("integral={}", fmt_f64(v))]))
}

fn action_value(cfg: &ScenarioConfig) -> Result<Outcome> {
    let v = action(cfg.lagrangian()?, cfg.field()?, cfg.space()?, &cfg.grid()?)?;
    Ok(Outcome::lines(vec![format!("action={}", fmt_f64(v))]))
}

fn el(cfg: &ScenarioConfig) -> Result<Outcome> {
    let space = cfg.space()?;
    let op = ElOperator::new(cfg.lagrangian()?, cfg.field()?, space)?;
    let points = cfg.grid()?.sample_points(space)?;
    let residuals = points
        .par_iter()
        .map(|x| op.residual(x))
        .collect::<conformable::Result<Vec<_>>>()?;

    let mut header = coordinate_header(space.dim());
    header.push("residual".into());
    let mut table = Table::new(header);
    let mut worst = 0.0f64;
    for (x, r) in points.iter().zip(&residuals) {
        worst = worst.max(r.abs());
        let mut row = point_fields(x);
        row.push(fmt_f64(*r));
        table.push(row);
    }
    Ok(Outcome {
        lines: vec![format!("points={} max_abs_residual={}", points.len(), fmt_f64(worst))],
        files: vec![(cfg.output.el.clone(), table.render())],
        success: true,
    })
}

fn noether(cfg: &ScenarioConfig) -> Result<Outcome> {
    let space = cfg.space()?;
    let d = space.dim();
    let op = NoetherOperator::new(cfg.generator()?, cfg.lagrangian()?, cfg.field()?, space)?;
    let points = cfg.grid()?.sample_points(space)?;
    let samples = points
        .par_iter()
        .map(|x| op.at(x))
        .collect::<conformable::Result<Vec<_>>>()?;

    let with = |extra: &[&str]| {
        let mut h = coordinate_header(d);
        h.extend(extra.iter().map(|s| s.to_string()));
        Table::new(h)
    };
    let mut currents = with(&["sigma", "i", "theta", "B", "div_theta"]);
    let mut emt = with(&["i", "j", "T"]);
    let mut amt = with(&["i", "k", "j", "M"]);
    let mut worst_b = vec![0.0f64; op.params()];
    let mut worst_div = vec![0.0f64; op.params()];
    for (x, p) in points.iter().zip(&samples) {
        for s in 0..op.params() {
            worst_b[s] = worst_b[s].max(p.breaking[s].abs());
            worst_div[s] = worst_div[s].max(p.divergence[s].abs());
            for i in 0..d {
                let mut row = point_fields(x);
                row.extend([
                    (s + 1).to_string(),
                    (i + 1).to_string(),
                    fmt_f64(p.theta[s][i]),
                    fmt_f64(p.breaking[s]),
                    fmt_f64(p.divergence[s]),
                ]);
                currents.push(row);
            }
        }
        for i in 0..d {
            for j in 0..d {
                let mut row = point_fields(x);
                row.extend([(i + 1).to_string(), (j + 1).to_string(), fmt_f64(p.emt[i][j])]);
                emt.push(row);
                for k in 0..d {
                    let mut row = point_fields(x);
                    row.extend([
                        (i + 1).to_string(),
                        (k + 1).to_string(),
                        (j + 1).to_string(),
                        fmt_f64(x[k] * p.emt[i][j]),
                    ]);
                    amt.push(row);
                }
            }
        }
    }
    let lines = (0..op.params())
        .map(|s| {
            format!(
                "sigma={} max_abs_B={} max_abs_div_theta={}",
                s + 1,
                fmt_f64(worst_b[s]),
                fmt_f64(worst_div[s])
            )
        })
        .collect();
    Ok(Outcome {
        lines,
        files: vec![
            (cfg.output.noether.clone(), currents.render()),
            (cfg.output.emt.clone(), emt.render()),
            (cfg.output.amt.clone(), amt.render()),
        ],
        success: true,
    })
}

fn oscillator(cfg: &ScenarioConfig) -> Result<Outcome> {
    let osc = cfg.oscillator()?;
    let bare = osc.params;
    let t0 = osc.t0.unwrap_or_else(|| bare.delayed_start());
    let t_end = osc.t_end.unwrap_or(t0 + 10.0);
    if !(t_end > t0) {
        return Err(CliError::Config(format!("t_end = {t_end} must exceed t0 = {t0}")));
    }
    // initial data and constants pin each other down
    let (p, phi0, v0): (OscillatorParams, f64, f64) = match (osc.phi0.zip(osc.v0), bare.amplitudes()) {
        (Some((phi0, v0)), _) => (bare.fitted(t0, phi0, v0)?, phi0, v0),
        (None, Ok(_)) => {
            let (phi0, v0) = analytic_solution(&bare, t0)?;
            (bare, phi0, v0)
        }
        (None, Err(_)) => {
            return Err(CliError::Config(
                "[oscillator] needs `phi0` and `v0`, or `A` and `B`".into(),
            ))
        }
    };
    let traj = match osc.mode {
        OscillatorMode::Integrated => integrate_uniform(&p, t0, phi0, v0, t_end, osc.step, osc.tolerance)?,
        OscillatorMode::Analytic => {
            let n = ((t_end - t0) / osc.step).round().max(1.0) as usize;
            let times: Vec<f64> = (0..=n)
                .map(|k| if k == n { t_end } else { t0 + k as f64 * osc.step })
                .collect();
            Trajectory::analytic(&p, &times)?
        }
    };
    let trace = EnergyTrace::of(&p, &traj)?;

    let mut trajectory = Table::new(["t", "phi", "dphi_dt", "phi_analytic", "abs_err"]);
    let mut worst = 0.0f64;
    for k in 0..traj.len() {
        let t = traj.t[k];
        let (exact, _) = analytic_solution(&p, t)?;
        let err = (traj.phi[k] - exact).abs();
        worst = worst.max(err);
        trajectory.push(vec![
            fmt_f64(t),
            fmt_f64(traj.phi[k]),
            fmt_f64(traj.dphi[k]),
            fmt_f64(exact),
            fmt_f64(err),
        ]);
    }
    let mut energy = Table::new(["t", "E", "E_tilde", "drift_pred", "drift_meas"]);
    let mut worst_tilde = 0.0f64;
    for k in 0..trace.len() {
        worst_tilde = worst_tilde.max(trace.regularized[k].abs());
        energy.push(vec![
            fmt_f64(trace.t[k]),
            fmt_f64(trace.energy[k]),
            fmt_f64(trace.regularized[k]),
            fmt_f64(trace.drift_predicted[k]),
            fmt_f64(trace.drift_measured[k]),
        ]);
    }
    let (a, b) = p.amplitudes()?;
    Ok(Outcome {
        lines: vec![
            format!(
                "mode={} t0={} t_end={} A={} B={}",
                traj.provenance.name(),
                fmt_f64(t0),
                fmt_f64(t_end),
                fmt_f64(a),
                fmt_f64(b)
            ),
            format!("samples={} max_abs_err={} max_abs_E_tilde={}", traj.len(), fmt_f64(worst), fmt_f64(worst_tilde)),
        ],
        files: vec![
            (cfg.output.trajectory.clone(), trajectory.render()),
            (cfg.output.energy.clone(), energy.render()),
        ],
        success: true,
    })
}

fn verify_all(cfg: &ScenarioConfig, opts: &RunOptions) -> Result<Outcome> {
    let seed = opts.seed.or(cfg.seed).unwrap_or(0);
    let reports = verify::run_all(seed);
    let success = reports.iter().all(|r| r.passed);
    let mut lines: Vec<String> = reports.iter().map(verify::SuiteReport::summary_line).collect();
    let passed = reports.iter().filter(|r| r.passed).count();
    lines.push(format!("seed={seed} passed={passed}/{}", reports.len()));
    Ok(Outcome {
        lines,
        files: vec![(cfg.output.verify.clone(), verify::report_table(&reports).render())],
        success,
    })
}
