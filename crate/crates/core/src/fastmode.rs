//! Viscous sub-layer modes.
//!
//! In the eighth regime the fast mode is `Φ_app^f(Y) = Ai(2, z + z₀)/Ai(2, z₀)`
//! with `z = Y/δ`, `δ = e^{−iπ/6} n^{−1/3}`, `z₀ = −ĉ/δ`, and the magnetic
//! companion `Ψ_app^f = −δ Ai(3, z + z₀)/Ai(2, z₀)`. In the β regime it is the
//! hierarchy `Φ₀ = e^{−ϖY}`, `Φ_k'' − ϖ²Φ_k = −in S_k`, `Φ_k(0) = 0`, with
//! `S_k = −U_sΦ_{k−1} + 2∂_Y^{−1}(U_s'Φ_{k−1})` and `∂_Y^{−1} f = −∫_Y^∞ f`.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::airy::{airy_bundle, AiryBundle};
use crate::error::{Error, Result};
use crate::mode::{check_order, ModeFunction};
use crate::numerics::{mild_solve, tail_integral, GradedGrid};
use crate::params::{Regime, SpectralParams};
use crate::profile::Profile;

type C = Complex64;

fn zero() -> C {
    C::new(0.0, 0.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum FastWhich {
    Phi,
    Psi,
}

/// Sub-layer scales `δ`, `z₀` (eighth regime) and `ϖ = (−inc)^{1/2}` (β regime).
#[derive(Debug, Clone, Copy, Serialize)]
pub struct SublayerScales {
    pub delta: C,
    pub z0: C,
    pub varpi: C,
}

impl SublayerScales {
    pub fn new(p: &SpectralParams) -> Self {
        let delta = C::from_polar(p.n.powf(-1.0 / 3.0), -PI / 6.0);
        let z0 = -p.c_hat / delta;
        // principal root has Re ≥ 0
        let varpi = (C::new(0.0, -p.n) * p.c).sqrt();
        Self { delta, z0, varpi }
    }
}

/// The Airy fast mode at one wave speed.
#[derive(Debug, Clone)]
pub struct AiryFastMode {
    params: SpectralParams,
    scales: SublayerScales,
    base: AiryBundle,
}

impl AiryFastMode {
    pub fn new(params: SpectralParams) -> Result<Self> {
        params.require_regime(Regime::Eighth)?;
        let scales = SublayerScales::new(&params);
        let base = airy_bundle(scales.z0)?;
        if base.mantissa[(-2 - crate::airy::P_MIN) as usize] == zero() {
            return Err(Error::InvalidParameter("Ai(2, z0) vanishes".into()));
        }
        Ok(Self { params, scales, base })
    }

    pub fn scales(&self) -> &SublayerScales {
        &self.scales
    }

    /// `Ai(1, z₀)/Ai(2, z₀)`.
    pub fn wall_ratio(&self) -> C {
        self.base.ratio(-1, &self.base, -2)
    }

    /// `[Φ, ∂Φ, ∂²Φ, ∂³Φ, ∂⁴Φ]` and `[Ψ, ∂Ψ, ∂²Ψ, ∂³Ψ]` at `y`.
    pub fn derivs(&self, y: f64) -> Result<([C; 5], [C; 4])> {
        let d = self.scales.delta;
        let b = airy_bundle(y / d + self.scales.z0)?;
        let mut phi = [zero(); 5];
        let mut psi = [zero(); 4];
        let dinv = 1.0 / d;
        let mut pow = C::new(1.0, 0.0);
        for k in 0..5 {
            phi[k] = pow * b.ratio(k as i32 - 2, &self.base, -2);
            if k < 4 {
                psi[k] = -d * pow * b.ratio(k as i32 - 3, &self.base, -2);
            }
            pow *= dinv;
        }
        Ok((phi, psi))
    }

    /// `Γ`-type boundary slope `∂_YΦ_app^f(0) = δ^{−1} Ai(1, z₀)/Ai(2, z₀)`.
    pub fn wall_slope(&self) -> C {
        self.wall_ratio() / self.scales.delta
    }

    /// Nodal values on `grid`, evaluated in parallel.
    pub fn sample(&self, grid: &GradedGrid) -> Result<FastSamples> {
        let rows: Vec<([C; 5], [C; 4])> =
            grid.nodes().par_iter().map(|&y| self.derivs(y)).collect::<Result<_>>()?;
        let n = grid.len();
        let mut phi = vec![vec![zero(); n]; 4];
        let mut psi = vec![vec![zero(); n]; 3];
        for (j, (f, s)) in rows.iter().enumerate() {
            for k in 0..4 {
                phi[k][j] = f[k];
            }
            for k in 0..3 {
                psi[k][j] = s[k];
            }
        }
        Ok(FastSamples { phi, psi, phi_last: None })
    }
}

impl ModeFunction for AiryFastMode {
    fn max_order(&self) -> usize {
        4
    }
    fn eval(&self, order: usize, y: f64) -> Result<C> {
        check_order(order, 4, "Airy fast mode")?;
        Ok(self.derivs(y)?.0[order])
    }
    fn decay_rate(&self) -> f64 {
        0.0
    }
}

/// `∂_Y^order` of `Φ_app^f` (order ≤ 4) or `Ψ_app^f` (order ≤ 3) at `y`.
pub fn airy_fast(which: FastWhich, order: usize, y: f64, params: &SpectralParams) -> Result<C> {
    let m = AiryFastMode::new(*params)?;
    let (phi, psi) = m.derivs(y)?;
    match which {
        FastWhich::Phi => {
            check_order(order, 4, "fast Phi")?;
            Ok(phi[order])
        }
        FastWhich::Psi => {
            check_order(order, 3, "fast Psi")?;
            Ok(psi[order])
        }
    }
}

/// Fast-mode fields on a grid; index `[order][node]`. `phi_last` holds the
/// final hierarchy term `Φ_N` (orders 0, 1) in the β regime.
#[derive(Debug, Clone)]
pub struct FastSamples {
    pub phi: Vec<Vec<C>>,
    pub psi: Vec<Vec<C>>,
    pub phi_last: Option<Vec<Vec<C>>>,
}

/// How many hierarchy terms to keep.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Truncation {
    Fixed(usize),
    /// Largest `k ≤ max` such that `|∂_YΦ_j(0)|` strictly decreases for `j = 1..k`.
    Optimal { max: usize },
}

/// `ceil((1 + ν₀)/ν₀) + 1`.
pub fn default_terms(nu0: f64) -> usize {
    ((1.0 + nu0) / nu0).ceil() as usize + 1
}

/// One hierarchy term on the grid: `Φ_k` orders 0..3 and `∫_Y^∞ Φ_k`.
#[derive(Debug, Clone)]
struct Term {
    phi: [Vec<C>; 4],
    tail: Vec<C>,
}

/// The β-regime fast mode, truncated after `terms` corrections.
#[derive(Debug, Clone)]
pub struct ExpFastMode {
    params: SpectralParams,
    grid: Arc<GradedGrid>,
    varpi: C,
    terms: Vec<Term>,
    /// `∂_YΦ_k(0)` for every computed `k ≥ 1` (before truncation).
    pub wall_slopes: Vec<C>,
    kept: usize,
}

impl ExpFastMode {
    pub fn new(
        params: SpectralParams,
        profile: &dyn Profile,
        grid: Arc<GradedGrid>,
        truncation: Truncation,
    ) -> Result<Self> {
        params.require_regime(Regime::Beta)?;
        let varpi = SublayerScales::new(&params).varpi;
        let nodes = grid.nodes();
        let n = nodes.len();
        let in_ = C::new(0.0, params.n);
        let u: Vec<[f64; 4]> = nodes.iter().map(|&y| profile.u_derivs(y)).collect();

        let mut phi0: [Vec<C>; 4] = Default::default();
        for k in 0..4 {
            phi0[k] = nodes.iter().map(|&y| (-varpi).powi(k as i32) * (-varpi * y).exp()).collect();
        }
        let tail0 = nodes.iter().map(|&y| (-varpi * y).exp() / varpi).collect();
        let mut terms = vec![Term { phi: phi0, tail: tail0 }];
        let max = match truncation {
            Truncation::Fixed(m) => m,
            Truncation::Optimal { max } => max,
        };
        let mut wall_slopes = Vec::new();
        for _ in 1..=max {
            let prev = &terms.last().expect("at least Φ₀").phi;
            // ∂^{-1}(U'Φ) = −∫_Y^∞ U'Φ
            let f: Vec<C> = (0..n).map(|j| u[j][1] * prev[0][j]).collect();
            let df: Vec<C> = (0..n).map(|j| u[j][2] * prev[0][j] + u[j][1] * prev[1][j]).collect();
            let anti = tail_integral(&grid, &f, &df);
            let s: Vec<C> = (0..n).map(|j| -u[j][0] * prev[0][j] - 2.0 * anti[j]).collect();
            let ds: Vec<C> = (0..n).map(|j| u[j][1] * prev[0][j] - u[j][0] * prev[1][j]).collect();
            let sol = mild_solve(&grid, varpi, &s)?;
            let v2 = varpi * varpi;
            let p0: Vec<C> = sol.y.iter().map(|v| in_ * v).collect();
            let p1: Vec<C> = sol.dy.iter().map(|v| in_ * v).collect();
            let p2: Vec<C> = (0..n).map(|j| v2 * p0[j] - in_ * s[j]).collect();
            let p3: Vec<C> = (0..n).map(|j| v2 * p1[j] - in_ * ds[j]).collect();
            // ∫_Y^∞ Φ = (in ∫_Y^∞ S − Φ'(Y))/ϖ²
            let s_tail = tail_integral(&grid, &s, &ds);
            let tail: Vec<C> = (0..n).map(|j| (in_ * s_tail[j] - p1[j]) / v2).collect();
            wall_slopes.push(p1[0]);
            terms.push(Term { phi: [p0, p1, p2, p3], tail });
        }
        let kept = match truncation {
            Truncation::Fixed(m) => m,
            Truncation::Optimal { .. } => optimal_count(&wall_slopes),
        };
        Ok(Self { params, grid, varpi, terms, wall_slopes, kept })
    }

    pub fn varpi(&self) -> C {
        self.varpi
    }

    /// Number of corrections retained.
    pub fn kept(&self) -> usize {
        self.kept
    }

    pub fn grid(&self) -> &Arc<GradedGrid> {
        &self.grid
    }

    pub fn params(&self) -> &SpectralParams {
        &self.params
    }

    /// `∂_YΦ_app^f(0) = −ϖ + Σ_{k ≤ N} ∂_YΦ_k(0)`.
    pub fn wall_slope(&self) -> C {
        -self.varpi + self.wall_slopes[..self.kept].iter().sum::<C>()
    }

    /// Sum of the retained terms on the grid.
    pub fn sample(&self) -> FastSamples {
        let n = self.grid.len();
        let mut phi = vec![vec![zero(); n]; 4];
        let mut psi = vec![vec![zero(); n]; 3];
        for t in &self.terms[..=self.kept] {
            for j in 0..n {
                for k in 0..4 {
                    phi[k][j] += t.phi[k][j];
                }
                psi[0][j] += t.tail[j];
                psi[1][j] -= t.phi[0][j];
                psi[2][j] -= t.phi[1][j];
            }
        }
        let last = &self.terms[self.kept];
        FastSamples { phi, psi, phi_last: Some(vec![last.phi[0].clone(), last.phi[1].clone()]) }
    }

    /// `∂_Y^order` of `Φ_k` alone at node `j` (for envelope checks).
    pub fn term_value(&self, k: usize, order: usize, j: usize) -> Result<C> {
        check_order(order, 3, "hierarchy term")?;
        self.terms
            .get(k)
            .map(|t| t.phi[order][j])
            .ok_or_else(|| Error::InvalidParameter(format!("term {k} not computed")))
    }
}

fn optimal_count(slopes: &[C]) -> usize {
    let mut k = slopes.len().min(1);
    while k < slopes.len() && slopes[k].norm() < slopes[k - 1].norm() {
        k += 1;
    }
    k
}

/// `∂_Y^order` of `Φ_app^f` (order ≤ 3) or `Ψ_app^f` (order ≤ 2) in the β
/// regime, summing `n_terms` corrections; nodal interpolation off the grid.
pub fn exp_fast(
    which: FastWhich,
    order: usize,
    y: f64,
    params: &SpectralParams,
    n_terms: usize,
    profile: &dyn Profile,
    grid: Arc<GradedGrid>,
) -> Result<C> {
    if params.regime() == Regime::Eighth {
        return Err(Error::RegimeMismatch("exp_fast needs beta < 1/8".into()));
    }
    let m = ExpFastMode::new(*params, profile, grid.clone(), Truncation::Fixed(n_terms))?;
    let s = m.sample();
    let v = match which {
        FastWhich::Phi => {
            check_order(order, 3, "fast Phi")?;
            &s.phi[order]
        }
        FastWhich::Psi => {
            check_order(order, 2, "fast Psi")?;
            &s.psi[order]
        }
    };
    if y > grid.y_max() {
        return Ok(zero());
    }
    Ok(grid.interp_cubic(v, y))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum FastErrorGroup {
    E1f,
    E2f,
    E3f,
    Ff,
    E1fBeta,
    E2fBeta,
    E3fBeta,
    FfBeta,
}

/// One fast-mode error term at `y` from local values: `phi[0..3]` of
/// `Φ_app^f`, `psi[0..2]` of `Ψ_app^f`, `phi_last[0..2]` of `Φ_N^f`
/// (β groups only), and `slow_wall = Φ_app^s(0)`.
#[allow(clippy::too_many_arguments)]
pub fn fast_error_point(
    group: FastErrorGroup,
    y: f64,
    params: &SpectralParams,
    profile: &dyn Profile,
    slow_wall: C,
    phi: &[C],
    psi: &[C],
    phi_last: &[C],
) -> C {
    let (a, n, se, c, ch) = (params.alpha, params.n, params.eps.sqrt(), params.c, params.c_hat);
    let u = profile.u_derivs(y);
    let h = profile.h_derivs(y);
    let i = C::i();
    let inner = match group {
        FastErrorGroup::E1f => {
            -2.0 * a * a * i / n * phi[1] - se * h[0] * psi[1] - a / n * (u[0] - c) * psi[0]
                + a / n * h[0] * phi[0]
        }
        FastErrorGroup::E2f => {
            a * a * a / n * phi[0] + i * a * (u[0] - ch) * phi[0] - a / n * phi[0] - i * a * se * h[0] * psi[0]
        }
        FastErrorGroup::E3f => {
            (u[0] - u1_at_wall(profile) * y) * phi[2] - u[2] * phi[0] + se * h[1] * psi[1] + se * h[2] * psi[0]
        }
        FastErrorGroup::Ff | FastErrorGroup::FfBeta => {
            a * a * psi[0] + i * a * (u[0] - c) * psi[0] - i * a * h[0] * phi[0]
        }
        FastErrorGroup::E1fBeta => {
            -i / n * (2.0 * a * a + 1.0) * phi[1] + u[0] * phi_last[1] - u[1] * phi_last[0]
                - se * h[0] * psi[1]
                - a / n * (u[0] - c) * psi[0]
                + a / n * h[0] * phi[0]
        }
        FastErrorGroup::E2fBeta => {
            a / n * (a * a - 1.0) * phi[0] + i * a * (u[0] - ch) * phi[0] - i * a * se * h[0] * psi[0]
        }
        FastErrorGroup::E3fBeta => se * h[1] * psi[1] + se * h[2] * psi[0],
    };
    -slow_wall * inner
}

fn u1_at_wall(p: &dyn Profile) -> f64 {
    p.du(0.0)
}

/// Error fields `[E1, E2, E3, F]` on the grid for the regime of `params`.
pub fn fast_error_fields(
    grid: &GradedGrid,
    params: &SpectralParams,
    profile: &dyn Profile,
    slow_wall: C,
    fast: &FastSamples,
) -> [Vec<C>; 4] {
    let groups = match params.regime() {
        Regime::Eighth => [FastErrorGroup::E1f, FastErrorGroup::E2f, FastErrorGroup::E3f, FastErrorGroup::Ff],
        Regime::Beta => [
            FastErrorGroup::E1fBeta,
            FastErrorGroup::E2fBeta,
            FastErrorGroup::E3fBeta,
            FastErrorGroup::FfBeta,
        ],
    };
    let n = grid.len();
    let mut out: [Vec<C>; 4] = Default::default();
    for (g, slot) in groups.iter().zip(out.iter_mut()) {
        *slot = (0..n)
            .map(|j| {
                let phi = [fast.phi[0][j], fast.phi[1][j], fast.phi[2][j]];
                let psi = [fast.psi[0][j], fast.psi[1][j]];
                let last = match &fast.phi_last {
                    Some(l) => [l[0][j], l[1][j]],
                    None => [zero(), zero()],
                };
                fast_error_point(*g, grid.nodes()[j], params, profile, slow_wall, &phi, &psi, &last)
            })
            .collect();
    }
    out
}

/// Decay constant `τ₁` of `|Φ_app^f| ≲ e^{−τ₁ n^{1/3} Y}`, from a least-squares
/// fit of `−log|Φ_app^f|` against `n^{1/3}Y` on `[x_lo, x_hi]`.
pub fn measure_tau1(mode: &AiryFastMode, x_lo: f64, x_hi: f64, samples: usize) -> Result<f64> {
    if !(x_hi > x_lo && x_lo >= 0.0) || samples < 2 {
        return Err(Error::InvalidParameter("measure_tau1: bad fit window".into()));
    }
    let scale = mode.params.n.powf(1.0 / 3.0);
    let mut pts = Vec::with_capacity(samples);
    for k in 0..samples {
        let x = x_lo + (x_hi - x_lo) * k as f64 / (samples - 1) as f64;
        let v = mode.derivs(x / scale)?.0[0].norm();
        if v > 0.0 {
            pts.push((x, -v.ln()));
        }
    }
    let m = pts.len() as f64;
    let (sx, sy) = pts.iter().fold((0.0, 0.0), |a, p| (a.0 + p.0, a.1 + p.1));
    let (mx, my) = (sx / m, sy / m);
    let num: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let den: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    Ok(num / den)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::profile::HartmannProfile;

    fn eighth() -> SpectralParams {
        SpectralParams::eighth(1e-10, 2.0).unwrap()
    }

    #[test]
    fn unit_wall_value_and_slope() {
        let p = eighth();
        let m = AiryFastMode::new(p).unwrap();
        let (phi, _) = m.derivs(0.0).unwrap();
        assert!((phi[0] - 1.0).norm() < 1e-13);
        let expect = crate::airy::ai_k(1, m.scales.z0).unwrap()
            / crate::airy::ai_k(2, m.scales.z0).unwrap()
            / m.scales.delta;
        assert!((phi[1] - expect).norm() < 1e-10 * expect.norm());
    }

    #[test]
    fn airy_ode_and_magnetic_linkage() {
        let p = eighth();
        let m = AiryFastMode::new(p).unwrap();
        let scale = p.n.powf(4.0 / 3.0);
        for y in [0.0, 0.001, 0.01, 0.05, 0.3] {
            let (phi, psi) = m.derivs(y).unwrap();
            let res = C::new(0.0, 1.0 / p.n) * phi[4] + (y - p.c_hat) * phi[2];
            assert!(res.norm() <= 1e-6 * scale, "y {y}: {res}");
            assert!((psi[2] + phi[1]).norm() <= 1e-8 * (1.0 + phi[1].norm()));
        }
    }

    #[test]
    fn sector_of_sublayer_argument() {
        let p = eighth();
        let s = SublayerScales::new(&p);
        let a = s.z0.arg();
        assert!(a > -5.0 * PI / 6.0 && a < -5.0 * PI / 6.0 + 0.2, "{a}");
    }

    #[test]
    fn hierarchy_zeroth_term_and_wall_condition() {
        let p = SpectralParams::beta_regime(1e-10, 1.0, 0.115).unwrap();
        let grid = Arc::new(GradedGrid::new(20.0, 2000, 5e-4).unwrap());
        let m = ExpFastMode::new(p, &HartmannProfile::default(), grid.clone(), Truncation::Fixed(2)).unwrap();
        for k in 1..=2 {
            assert!(m.term_value(k, 0, 0).unwrap().norm() < 1e-14);
        }
        let v = exp_fast(FastWhich::Phi, 0, 0.3, &p, 0, &HartmannProfile::default(), grid).unwrap();
        let exact = (-m.varpi() * 0.3).exp();
        assert!((v - exact).norm() < 1e-6);
    }

    #[test]
    fn first_correction_matches_exp_poly_closed_form() {
        // For U = 1 − e^{−Y}: S₁ = −e^{−ϖY} + b e^{−μY} with μ = ϖ + 1,
        // b = (ϖ − 1)/(ϖ + 1); the ϖ-resonant part gives Y e^{−ϖY}/(2ϖ).
        let p = SpectralParams::beta_regime(1e-10, 1.0, 0.115).unwrap();
        let grid = Arc::new(GradedGrid::new(20.0, 4000, 2e-4).unwrap());
        let m = ExpFastMode::new(p, &HartmannProfile::default(), grid.clone(), Truncation::Fixed(1)).unwrap();
        let w = m.varpi();
        let mu = w + 1.0;
        let b = (w - 1.0) / (w + 1.0);
        let d = mu * mu - w * w;
        let in_ = C::new(0.0, p.n);
        let exact = |y: f64| {
            let (ew, em) = ((-w * y).exp(), (-mu * y).exp());
            in_ * (-y * ew / (2.0 * w) + b * (ew - em) / d)
        };
        let slope = in_ * (-1.0 / (2.0 * w) + b / (2.0 * w + 1.0));
        assert!((m.wall_slopes[0] - slope).norm() < 1e-3 * slope.norm());
        let scale = (0..grid.len()).map(|j| exact(grid.nodes()[j]).norm()).fold(0.0, f64::max);
        for j in (0..grid.len()).step_by(53) {
            let y = grid.nodes()[j];
            let got = m.term_value(1, 0, j).unwrap();
            assert!((got - exact(y)).norm() < 1e-3 * scale, "y {y}: {got} vs {}", exact(y));
        }
        let tail0 = in_ * (-1.0 / (2.0 * w * w * w) + b / d * (1.0 / w - 1.0 / mu));
        let s = m.sample();
        let psi1 = s.psi[0][0] - 1.0 / w;
        assert!((psi1 - tail0).norm() < 1e-3 * tail0.norm(), "{psi1} vs {tail0}");
    }

    #[test]
    fn optimal_count_stops_at_first_growth() {
        let s = [C::new(1.0, 0.0), C::new(0.8, 0.0), C::new(1.2, 0.0), C::new(0.1, 0.0)];
        assert_eq!(optimal_count(&s), 2);
        assert_eq!(optimal_count(&s[..1]), 1);
        assert_eq!(optimal_count(&[]), 0);
    }

    #[test]
    fn boundary_prefactor_zero_kills_ff() {
        let p = eighth();
        let phi = [C::new(1.0, 2.0); 3];
        let psi = [C::new(0.5, 0.0); 2];
        let v = fast_error_point(FastErrorGroup::Ff, 0.1, &p, &HartmannProfile::default(), zero(), &phi, &psi, &psi);
        assert_eq!(v, zero());
    }

    #[test]
    fn regime_mismatch() {
        assert!(matches!(AiryFastMode::new(SpectralParams::beta_regime(1e-10, 1.0, 0.115).unwrap()), Err(Error::RegimeMismatch(_))));
    }
}
