//! Damped Newton iteration for holomorphic functions with a
//! central-difference derivative.

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};

/// History of a Newton run.
#[derive(Debug, Clone, Default, Serialize)]
pub struct RootTrace {
    pub iterates: Vec<Complex64>,
    pub residuals: Vec<f64>,
    pub converged: bool,
}

const MAX_HALVINGS: usize = 40;

/// Derivative step used by [`newton_root`].
pub fn derivative_step(c: Complex64) -> f64 {
    1e-7 * c.norm().max(1.0)
}

/// Central complex difference quotient of `g` at `c`.
pub fn central_derivative<G>(g: &G, c: Complex64) -> Result<Complex64>
where
    G: Fn(Complex64) -> Result<Complex64>,
{
    let h = derivative_step(c);
    let d = (g(c + h)? - g(c - h)?) / (2.0 * h);
    if !d.norm().is_finite() || d.norm() == 0.0 {
        return Err(Error::DerivativeBreakdown { at: c });
    }
    Ok(d)
}

/// Finds a zero of `g` starting from `c0`. Each step is halved until `|g|`
/// decreases.
pub fn newton_root<G>(g: G, c0: Complex64, tol: f64, max_iter: usize) -> Result<(Complex64, RootTrace)>
where
    G: Fn(Complex64) -> Result<Complex64>,
{
    let mut trace = RootTrace::default();
    let mut c = c0;
    let mut gc = g(c)?;
    trace.iterates.push(c);
    trace.residuals.push(gc.norm());
    for _ in 0..max_iter {
        if gc.norm() <= tol {
            trace.converged = true;
            return Ok((c, trace));
        }
        let d = central_derivative(&g, c)?;
        let mut step = -gc / d;
        let mut accepted = None;
        for _ in 0..MAX_HALVINGS {
            let trial = c + step;
            if let Ok(gt) = g(trial) {
                if gt.norm().is_finite() && gt.norm() < gc.norm() {
                    accepted = Some((trial, gt));
                    break;
                }
            }
            step *= 0.5;
        }
        let Some((cn, gn)) = accepted else {
            return Err(Error::NonConvergence {
                context: "newton",
                detail: format!("no decrease from |g| = {:e} at {c}", gc.norm()),
            });
        };
        c = cn;
        gc = gn;
        trace.iterates.push(c);
        trace.residuals.push(gc.norm());
    }
    if gc.norm() <= tol {
        trace.converged = true;
        return Ok((c, trace));
    }
    Err(Error::NonConvergence {
        context: "newton",
        detail: format!("|g| = {:e} after {max_iter} iterations", gc.norm()),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn affine_map_in_one_step() {
        let target = c(1.0, 1.0);
        let (r, t) = newton_root(|z| Ok(z - target), c(0.0, 0.0), 1e-12, 20).unwrap();
        assert!((r - target).norm() < 1e-12);
        assert!(t.converged);
        assert!(t.iterates.len() <= 3);
    }

    #[test]
    fn square_root_of_two() {
        let (r, t) = newton_root(|z| Ok(z * z - 2.0), c(1.0, 0.0), 1e-13, 50).unwrap();
        assert!((r - 2f64.sqrt()).norm() < 1e-12);
        assert!(*t.residuals.last().unwrap() <= 1e-13);
    }

    #[test]
    fn flat_function_breaks_down() {
        let r = newton_root(|_| Ok(c(1.0, 0.0)), c(0.0, 0.0), 1e-12, 5);
        assert!(matches!(r, Err(Error::DerivativeBreakdown { .. })));
    }

    #[test]
    fn no_root_reports_nonconvergence() {
        let r = newton_root(|z| Ok(z.exp()), c(0.0, 0.0), 1e-12, 5);
        assert!(matches!(r, Err(Error::NonConvergence { .. })));
    }
}
