//! Evaluable mode functions of `Y` with derivatives up to a declared order.

use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::numerics::GradedGrid;

/// A complex function of `Y ≥ 0` with derivatives up to `max_order` and a
/// known decay envelope `|f(Y)| ≲ e^{−η Y}`.
pub trait ModeFunction: Send + Sync {
    fn max_order(&self) -> usize;
    /// `∂_Y^order f(y)`.
    fn eval(&self, order: usize, y: f64) -> Result<Complex64>;
    /// The envelope exponent η.
    fn decay_rate(&self) -> f64 {
        0.0
    }

    /// Nodal values of `∂_Y^order f` on `grid`.
    fn sample(&self, order: usize, grid: &GradedGrid) -> Result<Vec<Complex64>> {
        grid.nodes().iter().map(|&y| self.eval(order, y)).collect()
    }
}

pub(crate) fn check_order(order: usize, max: usize, what: &'static str) -> Result<()> {
    if order > max {
        Err(Error::UnsupportedOrder { what, order })
    } else {
        Ok(())
    }
}

/// A mode backed by a closure `(order, y) -> value`.
pub struct FnMode<F> {
    max_order: usize,
    decay_rate: f64,
    f: F,
}

impl<F> FnMode<F>
where
    F: Fn(usize, f64) -> Result<Complex64> + Send + Sync,
{
    pub fn new(max_order: usize, decay_rate: f64, f: F) -> Self {
        Self { max_order, decay_rate, f }
    }
}

impl<F> ModeFunction for FnMode<F>
where
    F: Fn(usize, f64) -> Result<Complex64> + Send + Sync,
{
    fn max_order(&self) -> usize {
        self.max_order
    }

    fn eval(&self, order: usize, y: f64) -> Result<Complex64> {
        check_order(order, self.max_order, "closure mode")?;
        (self.f)(order, y)
    }

    fn decay_rate(&self) -> f64 {
        self.decay_rate
    }
}

/// The zero function (all orders).
pub struct ZeroMode;

impl ModeFunction for ZeroMode {
    fn max_order(&self) -> usize {
        usize::MAX
    }
    fn eval(&self, _order: usize, _y: f64) -> Result<Complex64> {
        Ok(Complex64::new(0.0, 0.0))
    }
    fn decay_rate(&self) -> f64 {
        f64::INFINITY
    }
}

/// Nodal values of a function and its derivatives on a graded grid, with
/// local cubic interpolation between nodes and zero beyond `Y_max`.
#[derive(Debug, Clone)]
pub struct GridMode {
    grid: Arc<GradedGrid>,
    derivs: Vec<Vec<Complex64>>,
    decay_rate: f64,
}

impl GridMode {
    /// `derivs[k]` holds `∂_Y^k f` at the grid nodes.
    pub fn new(grid: Arc<GradedGrid>, derivs: Vec<Vec<Complex64>>, decay_rate: f64) -> Result<Self> {
        if derivs.is_empty() || derivs.iter().any(|d| d.len() != grid.len()) {
            return Err(Error::InvalidParameter("grid mode: derivative arrays must match the grid".into()));
        }
        Ok(Self { grid, derivs, decay_rate })
    }

    pub fn grid(&self) -> &Arc<GradedGrid> {
        &self.grid
    }

    pub fn values(&self, order: usize) -> &[Complex64] {
        &self.derivs[order]
    }

    /// Scales every derivative by `s`.
    pub fn scaled(mut self, s: Complex64) -> Self {
        for d in self.derivs.iter_mut() {
            for v in d.iter_mut() {
                *v *= s;
            }
        }
        self
    }
}

impl ModeFunction for GridMode {
    fn max_order(&self) -> usize {
        self.derivs.len() - 1
    }

    fn eval(&self, order: usize, y: f64) -> Result<Complex64> {
        check_order(order, self.max_order(), "grid mode")?;
        if !(y >= 0.0) {
            return Err(Error::InvalidParameter(format!("mode evaluated at Y = {y}")));
        }
        if y > self.grid.y_max() {
            return Ok(Complex64::new(0.0, 0.0));
        }
        Ok(self.grid.interp_cubic(&self.derivs[order], y))
    }

    fn decay_rate(&self) -> f64 {
        self.decay_rate
    }

    fn sample(&self, order: usize, grid: &GradedGrid) -> Result<Vec<Complex64>> {
        check_order(order, self.max_order(), "grid mode")?;
        if grid == self.grid.as_ref() {
            return Ok(self.derivs[order].clone());
        }
        grid.nodes().iter().map(|&y| self.eval(order, y)).collect()
    }
}

/// `sup_Y |f(Y)| e^{ηY}` on the grid for the mode's declared η. A finite
/// value that does not blow up toward `Y_max` confirms the envelope.
pub fn decay_envelope(f: &dyn ModeFunction, grid: &GradedGrid) -> Result<f64> {
    let v = f.sample(0, grid)?;
    Ok(grid.sup_norm_exp(&v, f.decay_rate()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn closure_mode_respects_order() {
        let m = FnMode::new(1, 1.0, |k, y| {
            let e = (-y).exp();
            Ok(Complex64::new(if k == 0 { e } else { -e }, 0.0))
        });
        assert!((m.eval(1, 0.0).unwrap() + 1.0).norm() < 1e-15);
        assert!(matches!(m.eval(2, 0.0), Err(Error::UnsupportedOrder { .. })));
    }

    #[test]
    fn grid_mode_interpolates() {
        let g = Arc::new(GradedGrid::new(10.0, 400, 0.005).unwrap());
        let v: Vec<Complex64> = g.nodes().iter().map(|&y| Complex64::new(0.0, (-y).exp())).collect();
        let m = GridMode::new(g.clone(), vec![v], 1.0).unwrap();
        let got = m.eval(0, 1.2345).unwrap();
        assert!((got.im - (-1.2345f64).exp()).abs() < 1e-7);
        assert_eq!(m.eval(0, 11.0).unwrap(), Complex64::new(0.0, 0.0));
        let env = decay_envelope(&m, &g).unwrap();
        assert!((env - 1.0).abs() < 1e-12);
    }
}
