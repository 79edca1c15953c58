//! Argument-principle winding numbers on circles.

use std::f64::consts::{FRAC_PI_2, PI};

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};

/// A circle in the complex plane.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Circle {
    pub center: Complex64,
    pub radius: f64,
}

impl Circle {
    pub fn new(center: Complex64, radius: f64) -> Result<Self> {
        if !(radius > 0.0) || !radius.is_finite() {
            return Err(Error::InvalidParameter(format!("circle radius {radius}")));
        }
        Ok(Self { center, radius })
    }

    pub fn point(&self, theta: f64) -> Complex64 {
        self.center + Complex64::from_polar(self.radius, theta)
    }

    pub fn contains(&self, z: Complex64) -> bool {
        (z - self.center).norm() <= self.radius
    }
}

/// Samples of a function on a circle together with its winding number.
#[derive(Debug, Clone)]
pub struct ContourScan {
    pub winding: i64,
    /// Sample angles in increasing order on [0, 2π).
    pub thetas: Vec<f64>,
    pub values: Vec<Complex64>,
    pub min_abs: f64,
}

/// Relative size below which a sample counts as a zero on the contour.
pub const ZERO_THRESHOLD: f64 = 1e-13;

/// Total sample budget for the adaptive refinement.
pub const SAMPLE_BUDGET: usize = 1 << 15;

/// Winding number of `g` around `circle`.
pub fn winding_number<G>(g: G, circle: &Circle, init_samples: usize) -> Result<i64>
where
    G: Fn(Complex64) -> Result<Complex64> + Sync,
{
    scan_contour(g, circle, init_samples).map(|s| s.winding)
}

/// Samples `g` on the circle, refining until every consecutive argument
/// increment is below π/2, and sums the increments.
pub fn scan_contour<G>(g: G, circle: &Circle, init_samples: usize) -> Result<ContourScan>
where
    G: Fn(Complex64) -> Result<Complex64> + Sync,
{
    if init_samples < 16 {
        return Err(Error::InvalidParameter(format!(
            "init_samples = {init_samples}, need at least 16"
        )));
    }
    let eval = |thetas: &[f64]| -> Result<Vec<Complex64>> {
        thetas.par_iter().map(|&t| g(circle.point(t))).collect()
    };
    let mut thetas: Vec<f64> = (0..init_samples)
        .map(|k| 2.0 * PI * k as f64 / init_samples as f64)
        .collect();
    let mut values = eval(&thetas)?;

    loop {
        let scale = values.iter().map(|v| v.norm()).fold(0.0, f64::max);
        for (t, v) in thetas.iter().zip(&values) {
            if !v.norm().is_finite() {
                return Err(Error::NonResolvable { samples: thetas.len() });
            }
            if v.norm() <= ZERO_THRESHOLD * scale || v.norm() == 0.0 {
                return Err(Error::ZeroOnContour { at: circle.point(*t), abs: v.norm() });
            }
        }
        let n = thetas.len();
        let coarse: Vec<usize> = (0..n)
            .filter(|&i| (values[(i + 1) % n] / values[i]).arg().abs() >= FRAC_PI_2)
            .collect();
        if coarse.is_empty() {
            break;
        }
        if n + coarse.len() > SAMPLE_BUDGET {
            return Err(Error::NonResolvable { samples: n });
        }
        let mids: Vec<f64> = coarse
            .iter()
            .map(|&i| {
                let t1 = if i + 1 == n { 2.0 * PI } else { thetas[i + 1] };
                0.5 * (thetas[i] + t1)
            })
            .collect();
        let mid_vals = eval(&mids)?;
        let mut t_new = Vec::with_capacity(n + mids.len());
        let mut v_new = Vec::with_capacity(n + mids.len());
        let mut j = 0;
        for i in 0..n {
            t_new.push(thetas[i]);
            v_new.push(values[i]);
            if j < coarse.len() && coarse[j] == i {
                t_new.push(mids[j]);
                v_new.push(mid_vals[j]);
                j += 1;
            }
        }
        thetas = t_new;
        values = v_new;
    }

    let n = values.len();
    let total: f64 = (0..n).map(|i| (values[(i + 1) % n] / values[i]).arg()).sum();
    let min_abs = values.iter().map(|v| v.norm()).fold(f64::INFINITY, f64::min);
    Ok(ContourScan {
        winding: (total / (2.0 * PI)).round() as i64,
        thetas,
        values,
        min_abs,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn simple_zero() {
        let c0 = c(0.3, -0.2);
        let circ = Circle::new(c0, 0.5).unwrap();
        assert_eq!(winding_number(|z| Ok(z - c0), &circ, 16).unwrap(), 1);
    }

    #[test]
    fn constant_has_no_winding() {
        let circ = Circle::new(c(1.0, 1.0), 2.0).unwrap();
        assert_eq!(winding_number(|_| Ok(c(5.0, 0.0)), &circ, 16).unwrap(), 0);
    }

    #[test]
    fn double_zero() {
        let a = c(0.1, 0.1);
        let circ = Circle::new(c(0.0, 0.0), 1.0).unwrap();
        assert_eq!(winding_number(|z| Ok((z - a) * (z - a)), &circ, 16).unwrap(), 2);
    }

    #[test]
    fn high_degree_forces_refinement() {
        let circ = Circle::new(c(0.0, 0.0), 1.0).unwrap();
        let s = scan_contour(|z| Ok(z.powi(9)), &circ, 16).unwrap();
        assert_eq!(s.winding, 9);
        assert!(s.thetas.len() > 16);
    }

    #[test]
    fn pole_counts_negative() {
        let circ = Circle::new(c(0.0, 0.0), 1.0).unwrap();
        assert_eq!(winding_number(|z| Ok(1.0 / (z - 0.2)), &circ, 32).unwrap(), -1);
    }

    #[test]
    fn zero_on_contour_detected() {
        let circ = Circle::new(c(0.0, 0.0), 1.0).unwrap();
        let r = winding_number(|z| Ok(z - 1.0), &circ, 16);
        assert!(matches!(r, Err(Error::ZeroOnContour { .. })));
    }

    #[test]
    fn too_few_samples_rejected() {
        let circ = Circle::new(c(0.0, 0.0), 1.0).unwrap();
        assert!(winding_number(Ok, &circ, 8).is_err());
    }
}
