//! The fractional harmonic oscillator `L = ½ ξ (d^alpha_t phi)^2 - ½ m^2 phi^2`
//! on `t > 0`.
//!
//! Its Euler-Lagrange equation is
//! `(1 - alpha) t^(1 - 2alpha) phi' + t^(2 - 2alpha) phi'' + m̃^2 phi = 0`
//! with `m̃ = m / sqrt(ξ)`, solved by `A cos θ + B sin θ`, `θ = m̃ t^alpha / alpha`.
//! The energy `E = ½ ξ t^(1 - alpha) phi'^2 + ½ t^(alpha - 1) m^2 phi^2`
//! decays like `t^(alpha - 1)` on-shell; subtracting that secular part leaves
//! a quantity that vanishes on every solution.

mod dopri;
mod fd;

use crate::error::{Error, Result};
use crate::expr::{coordinate_name, Expr};
use crate::frac::{FractionalOrder, Sector};
use crate::variational::LagrangianSpec;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OscillatorParams {
    m: f64,
    xi_d: f64,
    alpha: FractionalOrder,
    amplitudes: Option<(f64, f64)>,
}

impl OscillatorParams {
    pub fn new(m: f64, xi_d: f64, alpha: f64) -> Result<OscillatorParams> {
        if !(m > 0.0 && m.is_finite()) {
            return Err(Error::Oscillator(format!("m must be positive, got {m}")));
        }
        if !(xi_d > 0.0 && xi_d.is_finite()) {
            return Err(Error::Oscillator(format!("xi_d must be positive, got {xi_d}")));
        }
        Ok(OscillatorParams {
            m,
            xi_d,
            alpha: FractionalOrder::new(alpha)?,
            amplitudes: None,
        })
    }

    /// Fix the integration constants `A` and `B`.
    pub fn with_amplitudes(self, a: f64, b: f64) -> OscillatorParams {
        OscillatorParams {
            amplitudes: Some((a, b)),
            ..self
        }
    }

    /// The constants of the solution through `(t0, phi0, v0)`.
    pub fn fitted(self, t0: f64, phi0: f64, v0: f64) -> Result<OscillatorParams> {
        let (a, b) = fit(&self, t0, phi0, v0)?;
        Ok(self.with_amplitudes(a, b))
    }

    pub fn m(&self) -> f64 {
        self.m
    }

    pub fn xi_d(&self) -> f64 {
        self.xi_d
    }

    pub fn alpha(&self) -> f64 {
        self.alpha.value()
    }

    pub fn order(&self) -> FractionalOrder {
        self.alpha
    }

    pub fn m_tilde(&self) -> f64 {
        self.m / self.xi_d.sqrt()
    }

    pub fn amplitudes(&self) -> Result<(f64, f64)> {
        self.amplitudes.ok_or(Error::Unfitted)
    }

    /// `½ m^2 (A^2 + B^2)`, the constant value of `E t^(1 - alpha)` on-shell.
    pub fn energy_scale(&self) -> Result<f64> {
        let (a, b) = self.amplitudes()?;
        Ok(0.5 * self.m * self.m * (a * a + b * b))
    }

    /// `θ = m̃ t^alpha / alpha`.
    pub fn phase(&self, t: f64) -> Result<f64> {
        positive(t)?;
        Ok(self.m_tilde() * t.powf(self.alpha()) / self.alpha())
    }

    /// `(2 pi alpha / m)^(1 / alpha)`, where the phase `m t^alpha / alpha`
    /// first reaches `2 pi`.
    pub fn delayed_start(&self) -> f64 {
        let alpha = self.alpha();
        (2.0 * std::f64::consts::PI * alpha / self.m).powf(1.0 / alpha)
    }

    /// The density as a Lagrangian over one time axis.
    pub fn lagrangian(&self, sector: Sector) -> LagrangianSpec {
        let g = Expr::var("g_1");
        let density = 0.5 * self.xi_d * g.clone() * g
            - 0.5 * self.m * self.m * Expr::var("phi") * Expr::var("phi");
        LagrangianSpec::new(density, 1, sector).expect("the oscillator density is well formed")
    }

    /// The analytic solution as an expression in `x_1`, for `t > 0`.
    pub fn solution_expr(&self) -> Result<Expr> {
        let (a, b) = self.amplitudes()?;
        let alpha = self.alpha();
        let theta = self.m_tilde() / alpha * Expr::var(&coordinate_name(0)).powf(alpha);
        Ok(a * theta.clone().cos() + b * theta.sin())
    }
}

fn positive(t: f64) -> Result<()> {
    if t > 0.0 {
        Ok(())
    } else {
        Err(Error::NonPositiveTime(t))
    }
}

/// `(phi, dphi/dt)` of the solution fixed by `p`'s amplitudes.
pub fn analytic_solution(p: &OscillatorParams, t: f64) -> Result<(f64, f64)> {
    let (a, b) = p.amplitudes()?;
    let theta = p.phase(t)?;
    let (s, c) = theta.sin_cos();
    let rate = p.m_tilde() * t.powf(p.alpha() - 1.0);
    Ok((a * c + b * s, rate * (b * c - a * s)))
}

/// `phi''` from the equation of motion.
pub fn ode_rhs(p: &OscillatorParams, t: f64, phi: f64, v: f64) -> Result<f64> {
    positive(t)?;
    let alpha = p.alpha();
    let mt = p.m_tilde();
    Ok(-((1.0 - alpha) * t.powf(1.0 - 2.0 * alpha) * v + mt * mt * phi) / t.powf(2.0 - 2.0 * alpha))
}

/// `(A, B)` of the solution with `phi(t0) = phi0` and `phi'(t0) = v0`.
pub fn fit(p: &OscillatorParams, t0: f64, phi0: f64, v0: f64) -> Result<(f64, f64)> {
    let theta = p.phase(t0)?;
    let (s, c) = theta.sin_cos();
    // the system matrix is a rotation, so its inverse is its transpose
    let w = v0 * t0.powf(1.0 - p.alpha()) / p.m_tilde();
    Ok((c * phi0 - s * w, s * phi0 + c * w))
}

pub fn energy(p: &OscillatorParams, t: f64, phi: f64, v: f64) -> Result<f64> {
    positive(t)?;
    let alpha = p.alpha();
    Ok(0.5 * p.xi_d * t.powf(1.0 - alpha) * v * v + 0.5 * t.powf(alpha - 1.0) * p.m * p.m * phi * phi)
}

/// `dE/dt = ½ (alpha - 1) m^2 (A^2 + B^2) t^(alpha - 2)` on-shell.
pub fn energy_drift_predicted(p: &OscillatorParams, t: f64) -> Result<f64> {
    positive(t)?;
    let alpha = p.alpha();
    Ok((alpha - 1.0) * p.energy_scale()? * t.powf(alpha - 2.0))
}

/// `E - ½ m^2 (A^2 + B^2) t^(alpha - 1)`.
pub fn regularized_energy(p: &OscillatorParams, t: f64, phi: f64, v: f64) -> Result<f64> {
    let e = energy(p, t, phi, v)?;
    Ok(e - p.energy_scale()? * t.powf(p.alpha() - 1.0))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Provenance {
    Analytic,
    Integrated,
}

impl Provenance {
    pub fn name(self) -> &'static str {
        match self {
            Provenance::Analytic => "analytic",
            Provenance::Integrated => "integrated",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub t: Vec<f64>,
    pub phi: Vec<f64>,
    pub dphi: Vec<f64>,
    pub provenance: Provenance,
}

impl Trajectory {
    /// The analytic solution sampled at `times`.
    pub fn analytic(p: &OscillatorParams, times: &[f64]) -> Result<Trajectory> {
        check_times(times)?;
        let mut traj = Trajectory::empty(Provenance::Analytic);
        for &t in times {
            let (phi, v) = analytic_solution(p, t)?;
            traj.push(t, phi, v);
        }
        Ok(traj)
    }

    fn empty(provenance: Provenance) -> Trajectory {
        Trajectory {
            t: Vec::new(),
            phi: Vec::new(),
            dphi: Vec::new(),
            provenance,
        }
    }

    fn push(&mut self, t: f64, phi: f64, v: f64) {
        self.t.push(t);
        self.phi.push(phi);
        self.dphi.push(v);
    }

    pub fn len(&self) -> usize {
        self.t.len()
    }

    pub fn is_empty(&self) -> bool {
        self.t.is_empty()
    }

    /// Largest `|phi - phi_analytic|` over the samples.
    pub fn max_error(&self, p: &OscillatorParams) -> Result<f64> {
        let mut worst = 0.0f64;
        for (&t, &phi) in self.t.iter().zip(&self.phi) {
            worst = worst.max((phi - analytic_solution(p, t)?.0).abs());
        }
        Ok(worst)
    }

    /// Sign changes of `phi`, located on the cubic Hermite interpolant
    /// through the samples and their derivatives.
    pub fn zero_crossings(&self) -> Vec<f64> {
        let mut roots = Vec::new();
        for k in 0..self.len().saturating_sub(1) {
            let (t0, t1) = (self.t[k], self.t[k + 1]);
            let (y0, y1) = (self.phi[k], self.phi[k + 1]);
            if y0 == 0.0 {
                if roots.last() != Some(&t0) {
                    roots.push(t0);
                }
                continue;
            }
            if y1 == 0.0 || y0.signum() == y1.signum() {
                continue;
            }
            let h = t1 - t0;
            let (m0, m1) = (self.dphi[k] * h, self.dphi[k + 1] * h);
            let hermite = |s: f64| {
                let s2 = s * s;
                let s3 = s2 * s;
                (2.0 * s3 - 3.0 * s2 + 1.0) * y0
                    + (s3 - 2.0 * s2 + s) * m0
                    + (-2.0 * s3 + 3.0 * s2) * y1
                    + (s3 - s2) * m1
            };
            let (mut lo, mut hi) = (0.0, 1.0);
            for _ in 0..100 {
                let mid = 0.5 * (lo + hi);
                if hermite(mid).signum() == y0.signum() {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            roots.push(t0 + 0.5 * (lo + hi) * h);
        }
        if let (Some(&t), Some(&0.0)) = (self.t.last(), self.phi.last()) {
            roots.push(t);
        }
        roots
    }
}

fn check_times(times: &[f64]) -> Result<()> {
    if let Some(&t) = times.first() {
        positive(t)?;
    }
    if times.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::Oscillator("sample times must be strictly increasing".into()));
    }
    Ok(())
}

fn check_tolerance(tol: f64) -> Result<()> {
    if !(tol > 0.0 && tol < 1.0) {
        return Err(Error::Oscillator(format!("tolerance {tol} outside (0, 1)")));
    }
    Ok(())
}

fn rhs(p: &OscillatorParams) -> impl Fn(f64, &[f64; 2]) -> Result<[f64; 2]> + '_ {
    move |t, y| {
        if !(t > 0.0) {
            return Err(Error::SingularityApproach { t, step: 0.0 });
        }
        Ok([y[1], ode_rhs(p, t, y[0], y[1])?])
    }
}

/// Integrate the equation of motion from `(t0, phi0, v0)` to `t_end`,
/// recording every accepted step.
pub fn integrate(
    p: &OscillatorParams,
    t0: f64,
    phi0: f64,
    v0: f64,
    t_end: f64,
    tolerance: f64,
) -> Result<Trajectory> {
    run(p, t0, phi0, v0, &[t_end], tolerance, true)
}

/// As [`integrate`], recording only at `t0 + k h` for `k = 0..=n`, where
/// `n = round((t_end - t0) / h)`.
pub fn integrate_uniform(
    p: &OscillatorParams,
    t0: f64,
    phi0: f64,
    v0: f64,
    t_end: f64,
    step: f64,
    tolerance: f64,
) -> Result<Trajectory> {
    if !(step > 0.0 && step.is_finite()) {
        return Err(Error::Oscillator(format!("output step {step} must be positive")));
    }
    let n = ((t_end - t0) / step).round().max(1.0) as usize;
    let stops: Vec<f64> = (1..=n)
        .map(|k| if k == n { t_end } else { t0 + k as f64 * step })
        .collect();
    run(p, t0, phi0, v0, &stops, tolerance, false)
}

fn run(
    p: &OscillatorParams,
    t0: f64,
    phi0: f64,
    v0: f64,
    stops: &[f64],
    tolerance: f64,
    dense: bool,
) -> Result<Trajectory> {
    positive(t0)?;
    check_tolerance(tolerance)?;
    let t_end = *stops.last().expect("at least one stop");
    if !(t_end > t0) {
        return Err(Error::Oscillator(format!("end time {t_end} must exceed start time {t0}")));
    }
    let mut traj = Trajectory::empty(Provenance::Integrated);
    traj.push(t0, phi0, v0);
    dopri::integrate(&rhs(p), t0, [phi0, v0], stops, tolerance, dense, &mut |t, y| {
        traj.push(t, y[0], y[1])
    })?;
    Ok(traj)
}

/// Step of the centred difference used on analytic samples, relative to `t`.
pub const DRIFT_STEP: f64 = 1e-3;

#[derive(Debug, Clone, PartialEq)]
pub struct EnergyTrace {
    pub t: Vec<f64>,
    pub energy: Vec<f64>,
    pub regularized: Vec<f64>,
    pub drift_predicted: Vec<f64>,
    pub drift_measured: Vec<f64>,
}

impl EnergyTrace {
    /// Energies along `traj` using `p`'s amplitudes. The measured drift is a
    /// five-point centred difference of the analytic energy with step
    /// `DRIFT_STEP * t` for analytic trajectories, and a five-point
    /// difference over neighbouring samples for integrated ones.
    pub fn of(p: &OscillatorParams, traj: &Trajectory) -> Result<EnergyTrace> {
        p.amplitudes()?;
        let n = traj.len();
        let mut trace = EnergyTrace {
            t: traj.t.clone(),
            energy: Vec::with_capacity(n),
            regularized: Vec::with_capacity(n),
            drift_predicted: Vec::with_capacity(n),
            drift_measured: Vec::new(),
        };
        for k in 0..n {
            let (t, phi, v) = (traj.t[k], traj.phi[k], traj.dphi[k]);
            trace.energy.push(energy(p, t, phi, v)?);
            trace.regularized.push(regularized_energy(p, t, phi, v)?);
            trace.drift_predicted.push(energy_drift_predicted(p, t)?);
        }
        trace.drift_measured = match traj.provenance {
            Provenance::Analytic => traj
                .t
                .iter()
                .map(|&t| analytic_energy_drift(p, t))
                .collect::<Result<_>>()?,
            Provenance::Integrated => fd::derivative(&traj.t, &trace.energy)?,
        };
        Ok(trace)
    }

    /// `dẼ/dt` from the sampled regularized energy.
    pub fn regularized_drift(&self) -> Result<Vec<f64>> {
        fd::derivative(&self.t, &self.regularized)
    }

    pub fn len(&self) -> usize {
        self.t.len()
    }

    pub fn is_empty(&self) -> bool {
        self.t.is_empty()
    }
}

/// Fourth-order centred difference of the energy along the analytic solution.
pub fn analytic_energy_drift(p: &OscillatorParams, t: f64) -> Result<f64> {
    positive(t)?;
    let h = DRIFT_STEP * t;
    let e = |s: f64| -> Result<f64> {
        let (phi, v) = analytic_solution(p, s)?;
        energy(p, s, phi, v)
    };
    Ok((e(t - 2.0 * h)? - 8.0 * e(t - h)? + 8.0 * e(t + h)? - e(t + 2.0 * h)?) / (12.0 * h))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit(alpha: f64) -> OscillatorParams {
        OscillatorParams::new(1.0, 1.0, alpha).unwrap().with_amplitudes(1.0, 0.0)
    }

    #[test]
    fn closed_form_values() {
        let p = unit(0.5);
        let (phi, _) = analytic_solution(&p, 1.0).unwrap();
        assert!((phi - 2f64.cos()).abs() < 1e-15);
        let (phi, v) = analytic_solution(&p, 1.0).unwrap();
        assert!((energy(&p, 1.0, phi, v).unwrap() - 0.5).abs() < 1e-15);
        assert!((energy_drift_predicted(&p, 1.0).unwrap() + 0.25).abs() < 1e-15);
        assert!(regularized_energy(&p, 1.0, phi, v).unwrap().abs() < 1e-15);
        let c = unit(1.0);
        for t in [0.3, 2.0, 7.5] {
            assert!((analytic_solution(&c, t).unwrap().0 - t.cos()).abs() < 1e-15);
            assert_eq!(energy_drift_predicted(&c, t).unwrap(), 0.0);
        }
    }

    #[test]
    fn rejects_bad_input() {
        assert!(OscillatorParams::new(0.0, 1.0, 0.5).is_err());
        assert!(OscillatorParams::new(1.0, -1.0, 0.5).is_err());
        assert!(matches!(OscillatorParams::new(1.0, 1.0, 1.5), Err(Error::InvalidOrder(_))));
        let p = unit(0.5);
        assert!(matches!(analytic_solution(&p, 0.0), Err(Error::NonPositiveTime(_))));
        assert!(matches!(ode_rhs(&p, -1.0, 0.0, 0.0), Err(Error::NonPositiveTime(_))));
        let bare = OscillatorParams::new(1.0, 1.0, 0.5).unwrap();
        assert!(matches!(regularized_energy(&bare, 1.0, 1.0, 0.0), Err(Error::Unfitted)));
        assert_eq!(ode_rhs(&p, 2.0, 0.0, 0.0).unwrap(), 0.0);
    }

    #[test]
    fn fit_recovers_constants() {
        let p = OscillatorParams::new(1.3, 0.7, 0.6).unwrap().with_amplitudes(0.4, -1.1);
        let (phi, v) = analytic_solution(&p, 2.3).unwrap();
        let (a, b) = fit(&p, 2.3, phi, v).unwrap();
        assert!((a - 0.4).abs() < 1e-13 && (b + 1.1).abs() < 1e-13);
    }

    #[test]
    fn delayed_start_has_full_phase() {
        for alpha in [1.0, 0.9, 0.5] {
            let p = unit(alpha);
            let theta = p.phase(p.delayed_start()).unwrap();
            assert!((theta - 2.0 * std::f64::consts::PI).abs() < 1e-12);
        }
    }

    #[test]
    fn integrated_follows_fitted_family() {
        let bare = OscillatorParams::new(1.0, 1.0, 0.9).unwrap();
        let t0 = bare.delayed_start();
        let traj = integrate(&bare, t0, 1.0, 1.0, t0 + 10.0, 1e-10).unwrap();
        assert_eq!(traj.provenance, Provenance::Integrated);
        let p = bare.fitted(t0, 1.0, 1.0).unwrap();
        assert!(traj.max_error(&p).unwrap() < 1e-6);
    }

    #[test]
    fn uniform_output_lands_on_grid() {
        let p = unit(0.5);
        let traj = integrate_uniform(&p, 1.0, 1.0, 0.0, 3.0, 0.5, 1e-10).unwrap();
        assert_eq!(traj.t, vec![1.0, 1.5, 2.0, 2.5, 3.0]);
    }

    #[test]
    fn singular_start_is_rejected() {
        let p = unit(0.5);
        assert!(matches!(
            integrate(&p, 0.0, 1.0, 0.0, 1.0, 1e-8),
            Err(Error::NonPositiveTime(_))
        ));
    }

    #[test]
    fn zero_crossings_of_cosine() {
        let p = unit(1.0);
        let times: Vec<f64> = (1..=200).map(|k| k as f64 * 0.1).collect();
        let traj = Trajectory::analytic(&p, &times).unwrap();
        let z = traj.zero_crossings();
        assert_eq!(z.len(), 6);
        for (k, t) in z.iter().enumerate() {
            let expect = std::f64::consts::FRAC_PI_2 + k as f64 * std::f64::consts::PI;
            assert!((t - expect).abs() < 1e-5, "{t} vs {expect}");
        }
    }

    #[test]
    fn analytic_trace_drift() {
        let p = unit(0.5);
        let times: Vec<f64> = (0..10).map(|k| 0.5 + 0.5 * k as f64).collect();
        let trace = EnergyTrace::of(&p, &Trajectory::analytic(&p, &times).unwrap()).unwrap();
        for k in 0..trace.len() {
            let rel = (trace.drift_measured[k] - trace.drift_predicted[k]).abs()
                / trace.drift_predicted[k].abs();
            assert!(rel < 1e-5);
        }
    }
}
