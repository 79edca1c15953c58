//! Mild solution of `y'' − λ² y = −s` on `[0, ∞)` with `y(0) = 0` and `y`
//! decaying, `Re λ > 0`:
//!
//! ```text
//! g(Y) = ∫_Y^∞ e^{λ(Y − t)} s(t) dt,    y(Y) = ∫₀^Y e^{−λ(Y − t)} g(t) dt,
//! ```
//!
//! so that `y' = −λy + g`. Both sweeps integrate the kernel exactly against
//! the piecewise-linear interpolant of the nodal data (exponential
//! integrator), which stays stable for any `λh`.

use num_complex::Complex64;

use super::grid::GradedGrid;
use crate::error::{Error, Result};

/// `(1 − e^{−z})/z` and `(1 − e^{−z}(1 + z))/z²`.
fn phi_weights(z: Complex64) -> (Complex64, Complex64) {
    if z.norm() < 0.1 {
        // Taylor series; ten terms reach full precision for |z| < 0.1
        let mut p1 = Complex64::new(0.0, 0.0);
        let mut p2 = Complex64::new(0.0, 0.0);
        let mut zk = Complex64::new(1.0, 0.0);
        let mut fact = 1.0;
        for k in 0..12 {
            // p1: Σ (−z)^k/(k+1)!, p2: Σ (−1)^k (k+1) z^k/(k+2)!
            fact *= (k + 1) as f64;
            let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
            p1 += zk * sign / fact;
            p2 += zk * sign * (k + 1) as f64 / (fact * (k + 2) as f64);
            zk *= z;
        }
        (p1, p2)
    } else {
        let e = (-z).exp();
        ((1.0 - e) / z, (1.0 - e * (1.0 + z)) / (z * z))
    }
}

/// Nodal `y`, `y'` and the auxiliary `g` of the mild solution.
#[derive(Debug, Clone)]
pub struct MildSolution {
    pub y: Vec<Complex64>,
    pub dy: Vec<Complex64>,
    pub g: Vec<Complex64>,
}

/// Solves `y'' − λ²y = −s` with `y(0) = 0`, decay at infinity, from nodal
/// values of `s` (taken as zero beyond the last node).
pub fn mild_solve(grid: &GradedGrid, lambda: Complex64, s: &[Complex64]) -> Result<MildSolution> {
    let n = grid.len();
    if s.len() != n {
        return Err(Error::InvalidParameter("mild_solve: source length differs from grid".into()));
    }
    if !(lambda.re > 0.0) {
        return Err(Error::InvalidParameter(format!("mild_solve needs Re λ > 0, got {lambda}")));
    }
    let weights: Vec<(Complex64, Complex64, Complex64)> = (0..n - 1)
        .map(|j| {
            let h = grid.h(j);
            let z = lambda * h;
            let (p1, p2) = phi_weights(z);
            ((-z).exp(), p1 * h, p2 * h)
        })
        .collect();
    let mut g = vec![Complex64::new(0.0, 0.0); n];
    for j in (0..n - 1).rev() {
        let (decay, w1, w2) = weights[j];
        g[j] = decay * g[j + 1] + s[j] * w1 + (s[j + 1] - s[j]) * w2;
    }
    let mut y = vec![Complex64::new(0.0, 0.0); n];
    for j in 0..n - 1 {
        let (decay, w1, w2) = weights[j];
        y[j + 1] = decay * y[j] + g[j + 1] * w1 - (g[j + 1] - g[j]) * w2;
    }
    let dy = y.iter().zip(&g).map(|(yv, gv)| -lambda * yv + gv).collect();
    Ok(MildSolution { y, dy, g })
}

/// `∫_Y^∞ f` at every node by the trapezoid rule with the endpoint
/// derivative correction (fourth order), from nodal `f` and `f'`.
pub fn tail_integral(grid: &GradedGrid, f: &[Complex64], df: &[Complex64]) -> Vec<Complex64> {
    let n = grid.len();
    let mut out = vec![Complex64::new(0.0, 0.0); n];
    for j in (0..n - 1).rev() {
        let h = grid.h(j);
        out[j] = out[j + 1] + (f[j] + f[j + 1]) * (0.5 * h) + (df[j] - df[j + 1]) * (h * h / 12.0);
    }
    out
}
