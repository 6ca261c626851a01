//! Dormand-Prince 5(4) with per-step error control.

use crate::error::{Error, Result};

// Butcher tableau
const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
// fifth-order weights are the last row of A; these are fifth minus fourth
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

const SAFETY: f64 = 0.9;
const MIN_FACTOR: f64 = 0.2;
const MAX_FACTOR: f64 = 5.0;
const MAX_STEPS: usize = 1_000_000;

pub(crate) struct StepStats {
    pub accepted: usize,
    pub rejected: usize,
}

/// Integrate `y' = f(t, y)` from `t0` through each of `stops` (ascending,
/// all beyond `t0`), landing exactly on every stop. `record` is called at
/// every accepted step when `dense` is set, otherwise only at the stops.
/// The local error of each step is at most `tol` in the mixed absolute and
/// relative norm.
pub(crate) fn integrate<const N: usize>(
    f: &dyn Fn(f64, &[f64; N]) -> Result<[f64; N]>,
    t0: f64,
    y0: [f64; N],
    stops: &[f64],
    tol: f64,
    dense: bool,
    record: &mut dyn FnMut(f64, &[f64; N]),
) -> Result<StepStats> {
    let mut stats = StepStats {
        accepted: 0,
        rejected: 0,
    };
    let Some(&t_end) = stops.last() else {
        return Ok(stats);
    };
    let mut t = t0;
    let mut y = y0;
    let mut k1 = eval(f, t, &y)?;
    let mut h = initial_step(f, t, &y, &k1, tol, t_end - t0)?;
    let mut next_stop = 0;
    for _ in 0..MAX_STEPS {
        if next_stop == stops.len() {
            return Ok(stats);
        }
        let target = stops[next_stop];
        let remaining = target - t;
        let landing = h >= remaining;
        let step = if landing { remaining } else { h };
        if step <= 1e-14 * t.abs().max(1.0) {
            return Err(Error::SingularityApproach { t, step });
        }

        let mut k = [[0.0; N]; 7];
        k[0] = k1;
        let mut stage = [0.0; N];
        for s in 1..7 {
            for n in 0..N {
                stage[n] = y[n] + step * (0..s).map(|j| A[s][j] * k[j][n]).sum::<f64>();
            }
            k[s] = eval(f, t + C[s] * step, &stage)?;
        }
        // the seventh stage point is the fifth-order solution
        let y_new = stage;
        let mut err = 0.0f64;
        for n in 0..N {
            let e = step * (0..7).map(|j| E[j] * k[j][n]).sum::<f64>();
            let scale = tol * (1.0 + y[n].abs().max(y_new[n].abs()));
            err = err.max((e / scale).abs());
        }
        if !err.is_finite() {
            h = step * MIN_FACTOR;
            stats.rejected += 1;
            continue;
        }
        let factor = if err == 0.0 {
            MAX_FACTOR
        } else {
            (SAFETY * err.powf(-0.2)).clamp(MIN_FACTOR, MAX_FACTOR)
        };
        if err <= 1.0 {
            t = if landing { target } else { t + step };
            y = y_new;
            k1 = k[6];
            stats.accepted += 1;
            if landing {
                next_stop += 1;
                record(t, &y);
            } else if dense {
                record(t, &y);
            }
            // a landing step may be short; do not let it shrink the next one
            h = if landing { h.max(step * factor) } else { step * factor };
        } else {
            stats.rejected += 1;
            h = step * factor;
        }
    }
    Err(Error::NonConvergence {
        what: "Dormand-Prince step budget",
        estimate: t,
        tolerance: t_end,
    })
}

fn eval<const N: usize>(
    f: &dyn Fn(f64, &[f64; N]) -> Result<[f64; N]>,
    t: f64,
    y: &[f64; N],
) -> Result<[f64; N]> {
    let k = f(t, y)?;
    if k.iter().any(|v| !v.is_finite()) {
        return Err(Error::SingularityApproach { t, step: 0.0 });
    }
    Ok(k)
}

/// Starting step from the size of the solution and its derivative.
fn initial_step<const N: usize>(
    f: &dyn Fn(f64, &[f64; N]) -> Result<[f64; N]>,
    t: f64,
    y: &[f64; N],
    k1: &[f64; N],
    tol: f64,
    span: f64,
) -> Result<f64> {
    let norm = |v: &[f64; N]| {
        v.iter()
            .zip(y)
            .map(|(a, b)| (a / (tol * (1.0 + b.abs()))).abs())
            .fold(0.0f64, f64::max)
    };
    let d0 = norm(y);
    let d1 = norm(k1);
    let h0 = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 } else { 0.01 * d0 / d1 };
    let h0 = h0.min(span);
    let mut y1 = [0.0; N];
    for n in 0..N {
        y1[n] = y[n] + h0 * k1[n];
    }
    let k2 = eval(f, t + h0, &y1)?;
    let mut diff = [0.0; N];
    for n in 0..N {
        diff[n] = k2[n] - k1[n];
    }
    let d2 = norm(&diff) / h0;
    let h1 = if d1.max(d2) <= 1e-15 {
        (h0 * 1e-3).max(1e-6)
    } else {
        (0.01 / d1.max(d2)).powf(0.2)
    };
    Ok((100.0 * h0).min(h1).min(span))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exponential_decay() {
        let mut last = (0.0, 0.0);
        integrate(
            &|_, y: &[f64; 1]| Ok([-y[0]]),
            0.0,
            [1.0],
            &[5.0],
            1e-10,
            false,
            &mut |t, y| last = (t, y[0]),
        )
        .unwrap();
        assert_eq!(last.0, 5.0);
        assert!((last.1 - (-5f64).exp()).abs() < 1e-10);
    }

    #[test]
    fn lands_on_every_stop() {
        let stops: Vec<f64> = (1..=20).map(|k| k as f64 * 0.25).collect();
        let mut seen = Vec::new();
        integrate(
            &|_, y: &[f64; 2]| Ok([y[1], -y[0]]),
            0.0,
            [1.0, 0.0],
            &stops,
            1e-11,
            false,
            &mut |t, y| seen.push((t, y[0])),
        )
        .unwrap();
        assert_eq!(seen.iter().map(|s| s.0).collect::<Vec<_>>(), stops);
        for (t, v) in seen {
            assert!((v - t.cos()).abs() < 1e-9);
        }
    }

    #[test]
    fn blow_up_is_reported() {
        // y' = y^2 from y(0) = 1 blows up at t = 1
        let r = integrate(
            &|_, y: &[f64; 1]| Ok([y[0] * y[0]]),
            0.0,
            [1.0],
            &[2.0],
            1e-10,
            false,
            &mut |_, _| {},
        );
        assert!(r.is_err());
    }
}
