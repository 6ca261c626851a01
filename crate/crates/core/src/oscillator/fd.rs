//! Finite differences on arbitrary sample spacing.

use crate::error::{Error, Result};

const STENCIL: usize = 5;

/// Weights `c[j][k]` of the `k`-th derivative at `z` over nodes `x`
/// (Fornberg's recurrence).
fn weights(z: f64, x: &[f64], order: usize) -> Vec<Vec<f64>> {
    let n = x.len();
    let mut c = vec![vec![0.0; order + 1]; n];
    c[0][0] = 1.0;
    let mut c1 = 1.0;
    let mut c4 = x[0] - z;
    for i in 1..n {
        let mn = i.min(order);
        let mut c2 = 1.0;
        let c5 = c4;
        c4 = x[i] - z;
        for j in 0..i {
            let c3 = x[i] - x[j];
            c2 *= c3;
            if j == i - 1 {
                for k in (1..=mn).rev() {
                    c[i][k] = c1 * (k as f64 * c[i - 1][k - 1] - c5 * c[i - 1][k]) / c2;
                }
                c[i][0] = -c1 * c5 * c[i - 1][0] / c2;
            }
            for k in (1..=mn).rev() {
                c[j][k] = (c4 * c[j][k] - k as f64 * c[j][k - 1]) / c3;
            }
            c[j][0] = c4 * c[j][0] / c3;
        }
        c1 = c2;
    }
    c
}

/// First derivative of sampled `y(t)` at every sample from the five nearest
/// samples (centred where possible), exact for quartics.
pub(crate) fn derivative(t: &[f64], y: &[f64]) -> Result<Vec<f64>> {
    let n = t.len();
    if n != y.len() {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: y.len(),
        });
    }
    if n < 2 {
        return Err(Error::Oscillator("at least two samples are needed to differentiate".into()));
    }
    let width = STENCIL.min(n);
    Ok((0..n)
        .map(|k| {
            let start = k.saturating_sub(width / 2).min(n - width);
            let nodes = &t[start..start + width];
            let c = weights(t[k], nodes, 1);
            (0..width).map(|j| c[j][1] * y[start + j]).sum()
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_for_quartics_on_uneven_nodes() {
        let t: [f64; 7] = [0.1, 0.35, 0.4, 0.9, 1.3, 1.31, 2.0];
        let y: Vec<f64> = t.iter().map(|x| x.powi(4) - 2.0 * x * x + 3.0).collect();
        let d = derivative(&t, &y).unwrap();
        for (x, v) in t.iter().zip(d) {
            let expect = 4.0 * x.powi(3) - 4.0 * x;
            assert!((v - expect).abs() < 1e-9, "{v} vs {expect}");
        }
    }

    #[test]
    fn uniform_centre_weights() {
        let c = weights(0.0, &[-2.0, -1.0, 0.0, 1.0, 2.0], 1);
        let expect = [1.0 / 12.0, -2.0 / 3.0, 0.0, 2.0 / 3.0, -1.0 / 12.0];
        for j in 0..5 {
            assert!((c[j][1] - expect[j]).abs() < 1e-15);
        }
    }
}
