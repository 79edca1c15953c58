//! The magnetic stream-function equation
//!
//! ```text
//! −(∂_Y² − α²)φ + iα(U_s − c)φ = f,   φ(0) = φ_b,   φ → 0,
//! ```
//!
//! solved as `φ = e^{−ξY}φ_b + φ̃` with `ξ² = α² + iα(1 − c)` and the Picard
//! iteration `φ̃^{k+1} = K_ξ[f + iα(1 − U_s)(e^{−ξY}φ_b + φ̃^k)]`, where `K_ξ`
//! is the mild solution operator of `∂_Y² − ξ²` with a zero wall value.

use std::sync::Arc;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::mode::{GridMode, ModeFunction};
use crate::numerics::{mild_solve, GradedGrid};
use crate::params::SpectralParams;
use crate::profile::Profile;

type C = Complex64;

/// Default admissibility radius for `α`.
pub const ALPHA0_DEFAULT: f64 = 0.5;

#[derive(Debug, Clone)]
pub struct MagneticProblem {
    pub params: SpectralParams,
    pub profile: Arc<dyn Profile>,
    pub grid: Arc<GradedGrid>,
    pub phi_b: C,
    /// Source at the grid nodes.
    pub f: Vec<C>,
    pub eta: f64,
    pub xi: C,
}

/// `√(iα + α² − iαc)`, principal branch.
pub fn magnetic_xi(params: &SpectralParams) -> C {
    let a = params.alpha;
    (C::new(a * a, a) - C::new(0.0, a) * params.c).sqrt()
}

impl MagneticProblem {
    /// Problem with nodal source `f` and the default weight `η = √(2α)/8`.
    pub fn new(
        params: SpectralParams,
        profile: Arc<dyn Profile>,
        grid: Arc<GradedGrid>,
        phi_b: C,
        f: Vec<C>,
    ) -> Result<Self> {
        if f.len() != grid.len() {
            return Err(Error::InvalidParameter("magnetic source length differs from grid".into()));
        }
        if f.iter().any(|v| !v.is_finite()) || !phi_b.is_finite() {
            return Err(Error::InvalidParameter("magnetic data not finite".into()));
        }
        let xi = magnetic_xi(&params);
        if !(xi.re > 0.0) {
            return Err(Error::InvalidParameter(format!("Re xi = {} is not positive", xi.re)));
        }
        let eta = (2.0 * params.alpha).sqrt() / 8.0;
        Ok(Self { params, profile, grid, phi_b, f, eta, xi })
    }

    /// Samples `f` on `grid`.
    pub fn from_mode(
        params: SpectralParams,
        profile: Arc<dyn Profile>,
        grid: Arc<GradedGrid>,
        phi_b: C,
        f: &dyn ModeFunction,
    ) -> Result<Self> {
        let fv = f.sample(0, &grid)?;
        Self::new(params, profile, grid, phi_b, fv)
    }

    pub fn with_eta(mut self, eta: f64) -> Result<Self> {
        let ceiling = (2.0 * self.params.alpha).sqrt() / 4.0;
        if !(eta > 0.0 && eta < ceiling) {
            return Err(Error::InvalidParameter(format!("eta {eta} outside (0, {ceiling})")));
        }
        self.eta = eta;
        Ok(self)
    }

    /// `α < α₀` and `√(2α)/3 < Re ξ < 2√(2α)/3`.
    pub fn check_admissible(&self, alpha0: f64) -> Result<()> {
        let a = self.params.alpha;
        let s = (2.0 * a).sqrt();
        if !(a < alpha0) {
            return Err(Error::InvalidParameter(format!("alpha {a} not below the guard {alpha0}")));
        }
        if !(self.xi.re > s / 3.0 && self.xi.re < 2.0 * s / 3.0) {
            return Err(Error::InvalidParameter(format!(
                "Re xi = {} outside ({}, {})",
                self.xi.re,
                s / 3.0,
                2.0 * s / 3.0
            )));
        }
        Ok(())
    }
}

/// Per-step weighted gaps `sup e^{ηY}|φ̃^{k+1} − φ̃^k|` and their ratios.
#[derive(Debug, Clone, Default, Serialize)]
pub struct ContractionTrace {
    pub gaps: Vec<f64>,
    pub ratios: Vec<f64>,
}

impl ContractionTrace {
    /// Largest observed ratio, ignoring steps whose gap is at rounding level.
    pub fn worst_ratio(&self) -> f64 {
        self.ratios.iter().copied().fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone)]
pub struct MagneticSolution {
    /// `φ`, `∂_Yφ`, `∂_Y²φ` on the problem grid.
    pub mode: GridMode,
    pub trace: ContractionTrace,
}

pub fn solve_magnetic(prob: &MagneticProblem, tol: f64, max_picard: usize) -> Result<MagneticSolution> {
    let grid = &prob.grid;
    let nodes = grid.nodes();
    let (a, c, xi) = (prob.params.alpha, prob.params.c, prob.xi);
    let ia = C::new(0.0, a);
    let lift: Vec<C> = nodes.iter().map(|&y| (-xi * y).exp() * prob.phi_b).collect();
    let deficit: Vec<f64> = nodes.iter().map(|&y| prob.profile.deficit(y)).collect();

    let mut tilde = vec![C::new(0.0, 0.0); nodes.len()];
    let mut dtilde = tilde.clone();
    let mut trace = ContractionTrace::default();
    let mut growing = 0;
    let mut converged = false;
    for _ in 0..max_picard {
        let src: Vec<C> = (0..nodes.len())
            .map(|j| prob.f[j] + ia * deficit[j] * (lift[j] + tilde[j]))
            .collect();
        let sol = mild_solve(grid, xi, &src)?;
        let diff: Vec<C> = sol.y.iter().zip(&tilde).map(|(x, y)| x - y).collect();
        let gap = grid.sup_norm_exp(&diff, prob.eta);
        if let Some(&prev) = trace.gaps.last() {
            let r = if prev > 0.0 { gap / prev } else { 0.0 };
            trace.ratios.push(r);
            // rounding-level gaps carry no contraction information
            if r >= 1.0 && gap > 1e3 * f64::EPSILON * (1.0 + grid.sup_norm_exp(&sol.y, prob.eta)) {
                growing += 1;
                if growing >= 2 {
                    return Err(Error::NonContraction { ratios: trace.ratios });
                }
            } else {
                growing = 0;
            }
        }
        trace.gaps.push(gap);
        tilde = sol.y;
        dtilde = sol.dy;
        if gap < tol {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::NonConvergence {
            context: "magnetic Picard iteration",
            detail: format!("gap {:e} after {max_picard} steps", trace.gaps.last().copied().unwrap_or(f64::NAN)),
        });
    }

    let n = nodes.len();
    let mut phi = vec![C::new(0.0, 0.0); n];
    let mut dphi = phi.clone();
    let mut d2phi = phi.clone();
    for j in 0..n {
        let u = prob.profile.u(nodes[j]);
        phi[j] = lift[j] + tilde[j];
        dphi[j] = -xi * lift[j] + dtilde[j];
        d2phi[j] = a * a * phi[j] + ia * (u - c) * phi[j] - prob.f[j];
    }
    let mode = GridMode::new(grid.clone(), vec![phi, dphi, d2phi], prob.eta)?;
    Ok(MagneticSolution { mode, trace })
}

/// `−(∂_Y² − α²)φ + iα(U_s − c)φ − f` at the interior nodes, with `∂_Y²`
/// by three-point differences.
pub fn magnetic_residual(prob: &MagneticProblem, phi: &[C]) -> Vec<C> {
    let grid = &prob.grid;
    let nodes = grid.nodes();
    let (a, c) = (prob.params.alpha, prob.params.c);
    (1..nodes.len() - 1)
        .map(|j| {
            let w = grid.d2_weights(j);
            let d2 = w[0] * phi[j - 1] + w[1] * phi[j] + w[2] * phi[j + 1];
            -(d2 - a * a * phi[j]) + C::new(0.0, a) * (prob.profile.u(nodes[j]) - c) * phi[j] - prob.f[j]
        })
        .collect()
}

/// `Ψ_app^s`: the magnetic solution with `φ_b = Φ_app^s(0)Ψ_app^f(0)` and
/// `f = iαH_sΦ_app^s + ∂_YΦ_app^s`. `slow[k]` holds `∂_Y^kΦ_app^s` (k = 0, 1)
/// at the grid nodes.
#[allow(clippy::too_many_arguments)]
pub fn build_psi_app_s(
    params: &SpectralParams,
    profile: Arc<dyn Profile>,
    grid: Arc<GradedGrid>,
    slow: &[Vec<C>],
    fast_psi_at_0: C,
    slow_at_0: C,
    tol: f64,
    max_picard: usize,
) -> Result<MagneticSolution> {
    if slow.len() < 2 {
        return Err(Error::UnsupportedOrder { what: "slow mode for the magnetic source", order: 1 });
    }
    let ia = C::new(0.0, params.alpha);
    let f: Vec<C> = grid
        .nodes()
        .iter()
        .enumerate()
        .map(|(j, &y)| ia * profile.h(y) * slow[0][j] + slow[1][j])
        .collect();
    let prob = MagneticProblem::new(*params, profile, grid, slow_at_0 * fast_psi_at_0, f)?;
    solve_magnetic(&prob, tol, max_picard)
}

/// As [`build_psi_app_s`] from an evaluable slow mode.
pub fn build_psi_app_s_from_mode(
    params: &SpectralParams,
    profile: Arc<dyn Profile>,
    grid: Arc<GradedGrid>,
    slow: &dyn ModeFunction,
    fast_psi_at_0: C,
    slow_at_0: C,
) -> Result<MagneticSolution> {
    if slow.max_order() < 1 {
        return Err(Error::UnsupportedOrder { what: "slow mode for the magnetic source", order: 1 });
    }
    let s = vec![slow.sample(0, &grid)?, slow.sample(1, &grid)?];
    build_psi_app_s(params, profile, grid, &s, fast_psi_at_0, slow_at_0, 1e-12, 200)
}
