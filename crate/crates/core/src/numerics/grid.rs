//! Graded grids on [0, Y_max], three-point stencils, trapezoid norms and
//! local cubic interpolation.

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Nodes `Y_j = Y_max (e^{κ j/N} − 1)/(e^κ − 1)`, clustered at the wall.
#[derive(Debug, Clone, PartialEq)]
pub struct GradedGrid {
    nodes: Vec<f64>,
    kappa: f64,
    y_max: f64,
}

fn map(y_max: f64, kappa: f64, s: f64) -> f64 {
    if kappa < 1e-12 {
        y_max * s
    } else {
        y_max * (kappa * s).exp_m1() / kappa.exp_m1()
    }
}

impl GradedGrid {
    /// Grid with `intervals` cells whose first spacing is `h0` (or uniform if
    /// `h0 >= y_max / intervals`).
    pub fn new(y_max: f64, intervals: usize, h0: f64) -> Result<Self> {
        if !(y_max > 0.0) || intervals < 4 || !(h0 > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "grid: y_max {y_max}, intervals {intervals}, h0 {h0}"
            )));
        }
        let first = |k: f64| map(y_max, k, 1.0 / intervals as f64);
        let kappa = if h0 >= first(0.0) {
            0.0
        } else {
            let (mut lo, mut hi) = (1e-9, 700.0);
            if first(hi) > h0 {
                return Err(Error::InvalidParameter(format!("grid: h0 {h0} too small")));
            }
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                if first(mid) > h0 {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            0.5 * (lo + hi)
        };
        Ok(Self::with_kappa(y_max, intervals, kappa))
    }

    fn with_kappa(y_max: f64, intervals: usize, kappa: f64) -> Self {
        let nodes = (0..=intervals)
            .map(|j| map(y_max, kappa, j as f64 / intervals as f64))
            .collect::<Vec<_>>();
        Self { nodes, kappa, y_max }
    }

    /// Uniform grid on [0, y_max].
    pub fn uniform(y_max: f64, intervals: usize) -> Result<Self> {
        Self::new(y_max, intervals, y_max)
    }

    /// The grid with every cell halved (same mapping).
    pub fn refined(&self) -> Self {
        Self::with_kappa(self.y_max, 2 * self.intervals(), self.kappa)
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn intervals(&self) -> usize {
        self.nodes.len() - 1
    }

    pub fn y_max(&self) -> f64 {
        self.y_max
    }

    pub fn h(&self, j: usize) -> f64 {
        self.nodes[j + 1] - self.nodes[j]
    }

    /// Trapezoid weights.
    pub fn weights(&self) -> Vec<f64> {
        let n = self.nodes.len();
        let mut w = vec![0.0; n];
        for j in 0..n - 1 {
            let h = self.h(j);
            w[j] += 0.5 * h;
            w[j + 1] += 0.5 * h;
        }
        w
    }

    /// `(∫ w |f|²)^{1/2}` by the trapezoid rule.
    pub fn l2_norm_weighted<W: Fn(f64) -> f64>(&self, values: &[Complex64], weight: W) -> f64 {
        self.weights()
            .iter()
            .zip(values)
            .zip(&self.nodes)
            .map(|((w, v), &y)| w * weight(y) * v.norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    pub fn l2_norm(&self, values: &[Complex64]) -> f64 {
        self.l2_norm_weighted(values, |_| 1.0)
    }

    /// `sup e^{ηY}|f(Y)|` over the nodes.
    pub fn sup_norm_exp(&self, values: &[Complex64], eta: f64) -> f64 {
        self.nodes
            .iter()
            .zip(values)
            .map(|(&y, v)| (eta * y).exp() * v.norm())
            .fold(0.0, f64::max)
    }

    /// Three-point first-derivative weights at interior node `j`.
    pub fn d1_weights(&self, j: usize) -> [f64; 3] {
        let hm = self.nodes[j] - self.nodes[j - 1];
        let hp = self.nodes[j + 1] - self.nodes[j];
        [
            -hp / (hm * (hm + hp)),
            (hp - hm) / (hm * hp),
            hm / (hp * (hm + hp)),
        ]
    }

    /// Three-point second-derivative weights at interior node `j`.
    pub fn d2_weights(&self, j: usize) -> [f64; 3] {
        let hm = self.nodes[j] - self.nodes[j - 1];
        let hp = self.nodes[j + 1] - self.nodes[j];
        [
            2.0 / (hm * (hm + hp)),
            -2.0 / (hm * hp),
            2.0 / (hp * (hm + hp)),
        ]
    }

    /// Second-order one-sided first-derivative weights at node 0 (nodes 0, 1, 2).
    pub fn d1_wall_weights(&self) -> [f64; 3] {
        let (x0, x1, x2) = (self.nodes[0], self.nodes[1], self.nodes[2]);
        [
            (2.0 * x0 - x1 - x2) / ((x0 - x1) * (x0 - x2)),
            (x0 - x2) / ((x1 - x0) * (x1 - x2)),
            (x0 - x1) / ((x2 - x0) * (x2 - x1)),
        ]
    }

    /// Discrete first derivative of nodal values; one-sided at both ends.
    pub fn derivative(&self, f: &[Complex64]) -> Vec<Complex64> {
        let n = self.len();
        let mut d = vec![Complex64::new(0.0, 0.0); n];
        let w0 = self.d1_wall_weights();
        d[0] = f[0] * w0[0] + f[1] * w0[1] + f[2] * w0[2];
        for j in 1..n - 1 {
            let w = self.d1_weights(j);
            d[j] = f[j - 1] * w[0] + f[j] * w[1] + f[j + 1] * w[2];
        }
        let (x0, x1, x2) = (self.nodes[n - 1], self.nodes[n - 2], self.nodes[n - 3]);
        let wl = [
            (2.0 * x0 - x1 - x2) / ((x0 - x1) * (x0 - x2)),
            (x0 - x2) / ((x1 - x0) * (x1 - x2)),
            (x0 - x1) / ((x2 - x0) * (x2 - x1)),
        ];
        d[n - 1] = f[n - 1] * wl[0] + f[n - 2] * wl[1] + f[n - 3] * wl[2];
        d
    }

    /// Index `j` with `Y_j <= y < Y_{j+1}` (clamped to the last cell).
    pub fn locate(&self, y: f64) -> usize {
        let n = self.nodes.len();
        match self.nodes.binary_search_by(|v| v.total_cmp(&y)) {
            Ok(j) => j.min(n - 2),
            Err(0) => 0,
            Err(j) => (j - 1).min(n - 2),
        }
    }

    /// Local four-point Lagrange interpolation of nodal values at `y`.
    pub fn interp_cubic(&self, values: &[Complex64], y: f64) -> Complex64 {
        let n = self.nodes.len();
        let j = self.locate(y);
        let start = j.saturating_sub(1).min(n - 4);
        let xs = &self.nodes[start..start + 4];
        let mut acc = Complex64::new(0.0, 0.0);
        for i in 0..4 {
            let mut l = 1.0;
            for m in 0..4 {
                if m != i {
                    l *= (y - xs[m]) / (xs[i] - xs[m]);
                }
            }
            acc += values[start + i] * l;
        }
        acc
    }
}

/// Derivative of order `order` of a holomorphic `f` at `z`, from the
/// trapezoid rule for Cauchy's integral on a circle of radius `radius`.
pub fn holomorphic_derivative<F>(f: F, z: Complex64, order: u32, radius: f64, points: usize) -> Complex64
where
    F: Fn(Complex64) -> Complex64,
{
    let mut acc = Complex64::new(0.0, 0.0);
    for k in 0..points {
        let theta = 2.0 * std::f64::consts::PI * k as f64 / points as f64;
        let w = Complex64::from_polar(1.0, theta);
        acc += f(z + w * radius) * w.powi(-(order as i32));
    }
    let fact: f64 = (1..=order).map(f64::from).product();
    acc * fact / (points as f64 * radius.powi(order as i32))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn first_spacing_matches_request() {
        let g = GradedGrid::new(40.0, 400, 1e-3).unwrap();
        assert!((g.h(0) - 1e-3).abs() < 1e-9);
        assert_eq!(g.nodes()[0], 0.0);
        assert!((g.nodes()[400] - 40.0).abs() < 1e-12);
        assert!(g.nodes().windows(2).all(|w| w[1] > w[0]));
    }

    #[test]
    fn refinement_nests_nodes() {
        let g = GradedGrid::new(10.0, 50, 0.01).unwrap();
        let r = g.refined();
        for j in 0..=50 {
            assert!((r.nodes()[2 * j] - g.nodes()[j]).abs() < 1e-12);
        }
    }

    #[test]
    fn stencils_exact_on_quadratics() {
        let g = GradedGrid::new(5.0, 30, 0.02).unwrap();
        let f: Vec<Complex64> = g.nodes().iter().map(|&y| Complex64::new(y * y, -y)).collect();
        let d = g.derivative(&f);
        for (j, &y) in g.nodes().iter().enumerate() {
            assert!((d[j] - Complex64::new(2.0 * y, -1.0)).norm() < 1e-9);
        }
        for j in 1..30 {
            let w = g.d2_weights(j);
            let v = f[j - 1] * w[0] + f[j] * w[1] + f[j + 1] * w[2];
            assert!((v - 2.0).norm() < 1e-8);
        }
    }

    #[test]
    fn cubic_interpolation_exact_on_cubics() {
        let g = GradedGrid::new(3.0, 20, 0.01).unwrap();
        let f = |y: f64| Complex64::new(y.powi(3) - y, 2.0 * y * y);
        let v: Vec<Complex64> = g.nodes().iter().map(|&y| f(y)).collect();
        for y in [0.0, 0.005, 0.3, 1.7, 2.99, 3.0] {
            assert!((g.interp_cubic(&v, y) - f(y)).norm() < 1e-10);
        }
    }

    #[test]
    fn trapezoid_norm_of_decaying_exponential() {
        let g = GradedGrid::new(40.0, 4000, 1e-3).unwrap();
        let v: Vec<Complex64> = g.nodes().iter().map(|&y| Complex64::new((-y).exp(), 0.0)).collect();
        // ∫ e^{-2Y} = 1/2
        assert!((g.l2_norm(&v) - 0.5f64.sqrt()).abs() < 1e-5);
    }

    #[test]
    fn cauchy_derivative_of_exponential() {
        let z = Complex64::new(0.3, -0.7);
        let d2 = holomorphic_derivative(|w| w.exp(), z, 2, 0.5, 32);
        assert!((d2 - z.exp()).norm() < 1e-13);
    }
}
