//! Adaptive Gauss-Kronrod (7/15) quadrature for complex integrands on
//! straight segments and rays of the complex plane.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use num_complex::Complex64;

use crate::error::{Error, Result};

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];

const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];

// Gauss weights for the odd-indexed Kronrod nodes (1, 3, 5, 7).
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

/// Maximum number of live subintervals before giving up.
pub const SUBDIVISION_BUDGET: usize = 4000;

/// An integration path: a finite segment or a ray `start + s * dir`, `s >= 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Path {
    Segment { start: Complex64, end: Complex64 },
    Ray { start: Complex64, dir: Complex64 },
}

impl Path {
    pub fn segment(start: Complex64, end: Complex64) -> Result<Self> {
        if start == end {
            return Err(Error::InvalidParameter("degenerate segment".into()));
        }
        Ok(Path::Segment { start, end })
    }

    /// Ray with the direction normalized to unit modulus.
    pub fn ray(start: Complex64, dir: Complex64) -> Result<Self> {
        let m = dir.norm();
        if !(m > 0.0) || !m.is_finite() {
            return Err(Error::InvalidParameter("ray direction must be nonzero".into()));
        }
        Ok(Path::Ray { start, dir: dir / m })
    }
}

#[derive(Debug, Clone, Copy)]
struct Panel<const M: usize> {
    a: f64,
    b: f64,
    val: [Complex64; M],
    err: f64,
}

impl<const M: usize> PartialEq for Panel<M> {
    fn eq(&self, other: &Self) -> bool {
        self.err == other.err
    }
}
impl<const M: usize> Eq for Panel<M> {}
impl<const M: usize> PartialOrd for Panel<M> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl<const M: usize> Ord for Panel<M> {
    fn cmp(&self, other: &Self) -> Ordering {
        self.err.total_cmp(&other.err)
    }
}

fn norm_m<const M: usize>(v: &[Complex64; M]) -> f64 {
    v.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// One G7/K15 panel: returns (Kronrod value, |K - G|, integral of |f|).
fn gk15<const M: usize, F>(f: &F, a: f64, b: f64) -> ([Complex64; M], f64, f64)
where
    F: Fn(f64) -> [Complex64; M],
{
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let zero = Complex64::new(0.0, 0.0);
    let mut k = [zero; M];
    let mut g = [zero; M];
    let mut abs = 0.0;
    let fc = f(c);
    for m in 0..M {
        k[m] = fc[m] * WGK[7];
        g[m] = fc[m] * WG[3];
    }
    abs += norm_m(&fc) * WGK[7];
    for j in 0..7 {
        let dx = h * XGK[j];
        let f1 = f(c - dx);
        let f2 = f(c + dx);
        for m in 0..M {
            let s = f1[m] + f2[m];
            k[m] += s * WGK[j];
            if j % 2 == 1 {
                g[m] += s * WG[j / 2];
            }
        }
        abs += (norm_m(&f1) + norm_m(&f2)) * WGK[j];
    }
    let mut err = 0.0f64;
    for m in 0..M {
        k[m] *= h;
        g[m] *= h;
        err = err.max((k[m] - g[m]).norm());
    }
    (k, err, abs * h.abs())
}

/// Adaptive integration of a vector-valued integrand over the real interval [a, b].
///
/// Terminates when the summed error estimate is below `rel_tol` times the
/// largest component of the integral, or at the roundoff floor set by the
/// integral of |f|.
pub fn integrate_interval<const M: usize, F>(f: F, a: f64, b: f64, rel_tol: f64) -> Result<[Complex64; M]>
where
    F: Fn(f64) -> [Complex64; M],
{
    let zero = Complex64::new(0.0, 0.0);
    if a == b {
        return Ok([zero; M]);
    }
    let (val, err, abs) = gk15(&f, a, b);
    let mut heap = BinaryHeap::new();
    heap.push(Panel { a, b, val, err });
    let mut total = val;
    let mut total_err = err;
    let mut total_abs = abs;
    loop {
        let scale = norm_m(&total);
        if !scale.is_finite() || !total_err.is_finite() {
            return Err(Error::NonConvergence {
                context: "adaptive quadrature",
                detail: format!("non-finite integrand on [{a}, {b}]"),
            });
        }
        let floor = 64.0 * f64::EPSILON * total_abs;
        if total_err <= rel_tol * scale || total_err <= floor {
            return Ok(total);
        }
        if heap.len() >= SUBDIVISION_BUDGET {
            return Err(Error::NonConvergence {
                context: "adaptive quadrature",
                detail: format!(
                    "error estimate {total_err:e} against |I| = {scale:e} on [{a}, {b}]"
                ),
            });
        }
        let p = heap.pop().expect("heap is nonempty");
        let mid = 0.5 * (p.a + p.b);
        if mid == p.a || mid == p.b {
            return Err(Error::NonConvergence {
                context: "adaptive quadrature",
                detail: format!("interval collapsed near {mid}; singular integrand?"),
            });
        }
        let (v1, e1, a1) = gk15(&f, p.a, mid);
        let (v2, e2, a2) = gk15(&f, mid, p.b);
        for m in 0..M {
            total[m] += v1[m] + v2[m] - p.val[m];
        }
        total_err += e1 + e2 - p.err;
        total_abs += a1 + a2;
        if total_err < 0.0 {
            total_err = heap.iter().map(|q| q.err).sum::<f64>() + e1 + e2;
        }
        heap.push(Panel { a: p.a, b: mid, val: v1, err: e1 });
        heap.push(Panel { a: mid, b: p.b, val: v2, err: e2 });
    }
}

/// Integral of a vector-valued integrand along a path in the complex plane.
pub fn integrate_path<const M: usize, F>(f: F, path: &Path, rel_tol: f64) -> Result<[Complex64; M]>
where
    F: Fn(Complex64) -> [Complex64; M],
{
    match *path {
        Path::Segment { start, end } => {
            let d = end - start;
            integrate_interval(
                |t| {
                    let mut v = f(start + d * t);
                    for x in v.iter_mut() {
                        *x *= d;
                    }
                    v
                },
                0.0,
                1.0,
                rel_tol,
            )
        }
        Path::Ray { start, dir } => {
            let g = |s: f64| {
                let mut v = f(start + dir * s);
                for x in v.iter_mut() {
                    *x *= dir;
                }
                v
            };
            let zero = Complex64::new(0.0, 0.0);
            let mut total = [zero; M];
            let (mut lo, mut hi) = (0.0, 1.0);
            loop {
                let piece = integrate_interval(g, lo, hi, rel_tol)?;
                for m in 0..M {
                    total[m] += piece[m];
                }
                let running = norm_m(&total);
                let tail = norm_m(&g(hi)) * (hi - lo);
                if norm_m(&piece) <= 1e-18 * running && tail <= 1e-18 * running {
                    return Ok(total);
                }
                if running == 0.0 && tail == 0.0 && norm_m(&piece) == 0.0 {
                    return Ok(total);
                }
                if hi > 1e6 {
                    return Err(Error::NonConvergence {
                        context: "ray quadrature",
                        detail: "integrand does not decay along the ray".into(),
                    });
                }
                lo = hi;
                hi *= 2.0;
            }
        }
    }
}

/// Scalar integral of `f` along `path` with relative tolerance `rel_tol`.
pub fn quad_segment<F>(f: F, path: &Path, rel_tol: f64) -> Result<Complex64>
where
    F: Fn(Complex64) -> Complex64,
{
    check_tol(rel_tol)?;
    integrate_path(|z| [f(z)], path, rel_tol).map(|v| v[0])
}

/// Scalar integral of a complex-valued function of a real variable over [a, b].
pub fn quad_real<F>(f: F, a: f64, b: f64, rel_tol: f64) -> Result<Complex64>
where
    F: Fn(f64) -> Complex64,
{
    check_tol(rel_tol)?;
    integrate_interval(|t| [f(t)], a, b, rel_tol).map(|v| v[0])
}

fn check_tol(rel_tol: f64) -> Result<()> {
    if !(rel_tol > 1e-14 && rel_tol < 1e-3) {
        return Err(Error::InvalidParameter(format!(
            "rel_tol {rel_tol:e} outside (1e-14, 1e-3)"
        )));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn constant_on_unit_interval() {
        let p = Path::segment(c(0.0, 0.0), c(1.0, 0.0)).unwrap();
        let v = quad_segment(|_| c(1.0, 0.0), &p, 1e-12).unwrap();
        assert!((v - 1.0).norm() < 1e-15);
    }

    #[test]
    fn exponential_on_ray() {
        let p = Path::ray(c(0.0, 0.0), c(1.0, 0.0)).unwrap();
        let v = quad_segment(|z| (-z).exp(), &p, 1e-12).unwrap();
        assert!((v - 1.0).norm() < 1e-13, "{v}");
    }

    #[test]
    fn complex_segment_polynomial() {
        // integral of z^2 from 0 to 1+i is (1+i)^3/3
        let end = c(1.0, 1.0);
        let p = Path::segment(c(0.0, 0.0), end).unwrap();
        let v = quad_segment(|z| z * z, &p, 1e-12).unwrap();
        assert!((v - end.powi(3) / 3.0).norm() < 1e-14);
    }

    #[test]
    fn zero_integral_stops_at_roundoff_floor() {
        let v = quad_real(|t| c(t.sin(), 0.0), -1.0, 1.0, 1e-12).unwrap();
        assert!(v.norm() < 1e-15);
    }

    #[test]
    fn rejects_bad_tolerance() {
        assert!(quad_real(|_| c(1.0, 0.0), 0.0, 1.0, 1e-2).is_err());
        assert!(Path::segment(c(1.0, 0.0), c(1.0, 0.0)).is_err());
    }

    #[test]
    fn non_integrable_singularity_reports_nonconvergence() {
        let r = quad_real(|t| c(1.0 / t, 0.0), 0.0, 1.0, 1e-10);
        assert!(matches!(r, Err(Error::NonConvergence { .. })));
    }
}
