use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::sync::OnceLock;

use crate::error::{Error, Result};

const GL_POINTS: usize = 10;

/// Gauss-Legendre nodes and weights on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        // Newton iteration from the Chebyshev-like initial guess
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

fn rule() -> &'static (Vec<f64>, Vec<f64>) {
    static RULE: OnceLock<(Vec<f64>, Vec<f64>)> = OnceLock::new();
    RULE.get_or_init(|| gauss_legendre(GL_POINTS))
}

/// Stopping rule of the adaptive integrator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerance {
    pub rel: f64,
    pub abs: f64,
    pub max_panels: usize,
}

impl Default for Tolerance {
    fn default() -> Tolerance {
        Tolerance {
            rel: 1e-12,
            abs: 1e-15,
            max_panels: 4000,
        }
    }
}

impl Tolerance {
    /// Tolerance for an inner integral of a nested product rule, tighter so
    /// that its error does not masquerade as roughness of the outer integrand.
    pub fn inner(self) -> Tolerance {
        Tolerance {
            rel: (self.rel * 0.1).max(1e-15),
            abs: self.abs * 0.1,
            ..self
        }
    }
}

fn gl_panel(f: &dyn Fn(f64) -> Result<f64>, a: f64, b: f64) -> Result<f64> {
    let (nodes, weights) = rule();
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    let mut sum = 0.0;
    for (x, w) in nodes.iter().zip(weights) {
        sum += w * f(mid + half * x)?;
    }
    Ok(sum * half)
}

struct Panel {
    a: f64,
    b: f64,
    value: f64,
    err: f64,
}

impl Panel {
    fn new(f: &dyn Fn(f64) -> Result<f64>, a: f64, b: f64) -> Result<Panel> {
        let m = 0.5 * (a + b);
        let coarse = gl_panel(f, a, b)?;
        let value = gl_panel(f, a, m)? + gl_panel(f, m, b)?;
        Ok(Panel {
            a,
            b,
            value,
            err: (value - coarse).abs(),
        })
    }
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Panel {}

impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Panel {
    fn cmp(&self, other: &Self) -> Ordering {
        self.err
            .total_cmp(&other.err)
            .then_with(|| other.a.total_cmp(&self.a))
    }
}

/// Globally adaptive Gauss-Legendre integration of `f` over the interval
/// spanned by `edges` (ascending), starting from the given partition. The
/// panel with the largest error estimate is bisected until the summed
/// estimate meets the tolerance.
pub fn integrate(f: &dyn Fn(f64) -> Result<f64>, edges: &[f64], tol: Tolerance) -> Result<f64> {
    if edges.len() < 2 {
        return Ok(0.0);
    }
    let mut heap = BinaryHeap::new();
    for w in edges.windows(2) {
        if w[1] > w[0] {
            heap.push(Panel::new(f, w[0], w[1])?);
        }
    }
    loop {
        let (total, err) = heap
            .iter()
            .fold((0.0, 0.0), |(t, e), p| (t + p.value, e + p.err));
        let target = tol.abs.max(tol.rel * total.abs());
        if err <= target {
            break;
        }
        if heap.len() >= tol.max_panels {
            return Err(Error::NonConvergence {
                what: "adaptive quadrature",
                estimate: err,
                tolerance: target,
            });
        }
        let worst = heap.pop().expect("non-empty panel set");
        let m = 0.5 * (worst.a + worst.b);
        if !(m > worst.a && m < worst.b) {
            return Err(Error::NonConvergence {
                what: "adaptive quadrature (panel width underflow)",
                estimate: err,
                tolerance: target,
            });
        }
        heap.push(Panel::new(f, worst.a, m)?);
        heap.push(Panel::new(f, m, worst.b)?);
    }
    let mut panels = heap.into_vec();
    panels.sort_by(|p, q| p.a.total_cmp(&q.a));
    Ok(panels.iter().map(|p| p.value).sum())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nodes_and_weights() {
        let (x, w) = gauss_legendre(10);
        assert!((w.iter().sum::<f64>() - 2.0).abs() < 1e-14);
        assert!((x[9] - 0.973_906_528_517_171_7).abs() < 1e-15);
        assert!((w[9] - 0.066_671_344_308_688_14).abs() < 1e-15);
        // exact for degree 19
        let q: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(18)).sum();
        assert!((q - 2.0 / 19.0).abs() < 1e-15);
    }

    #[test]
    fn adaptive_smooth_and_peaked() {
        let v = integrate(&|x: f64| Ok(x.exp()), &[0.0, 1.0], Tolerance::default()).unwrap();
        assert!((v - (1f64.exp() - 1.0)).abs() < 1e-14);
        let peak = |x: f64| Ok(1.0 / (1e-4 + (x - 0.3).powi(2)));
        let v = integrate(&peak, &[0.0, 1.0], Tolerance::default()).unwrap();
        let want = 100.0 * ((70.0f64).atan() + (30.0f64).atan());
        assert!((v - want).abs() < 1e-10 * want);
    }

    #[test]
    fn zero_integrand() {
        assert_eq!(integrate(&|_| Ok(0.0), &[0.0, 2.0], Tolerance::default()).unwrap(), 0.0);
    }

    #[test]
    fn non_convergence_is_reported() {
        let tol = Tolerance {
            max_panels: 4,
            ..Tolerance::default()
        };
        let r = integrate(&|x: f64| Ok(x.abs().sqrt().recip()), &[-1.0, 1.0], tol);
        assert!(matches!(r, Err(Error::NonConvergence { .. })));
    }
}
