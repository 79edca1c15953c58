//! The inviscid slow mode `Φ_app^s = ψ_{α,1} + αΦ₁^s`, the Rayleigh
//! operator, and the slow-mode error groups `E₁^s, E₂^s, E₃^s`.
//!
//! Everything reduces to `I(Y) = ∫₁^Y (U_s − ĉ)^{−2}`. With `w = U_s − ĉ`,
//! `ψ_{0,1} = w`, `ψ_{0,2} = wI`, and the two running integrals of the
//! corrector have closed forms
//!
//! ```text
//! ∫₀^Y U_s' ψ_{0,2} = (w(Y)² I(Y) − ĉ² I(0) − Y) / 2,
//! ∫_Y^∞ U_s' ψ_{0,1} = ((1 − ĉ)² − w(Y)²) / 2,
//! ```
//!
//! (differentiate `w² I` and use `w² I' = 1`), so no quadrature to infinity
//! is needed.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::mode::{check_order, ModeFunction};
use crate::numerics::quad::integrate_interval;
use crate::numerics::GradedGrid;
use crate::params::SpectralParams;
use crate::profile::{HartmannProfile, Profile};

const QUAD_TOL: f64 = 1e-12;

type C = Complex64;

fn zero() -> C {
    C::new(0.0, 0.0)
}

const BINOM: [[f64; 4]; 4] = [
    [1.0, 0.0, 0.0, 0.0],
    [1.0, 1.0, 0.0, 0.0],
    [1.0, 2.0, 1.0, 0.0],
    [1.0, 3.0, 3.0, 1.0],
];

/// Derivatives of `e^{−αY} f` from those of `f` (orders 0..3).
fn times_exp(alpha: f64, y: f64, f: &[C; 4]) -> [C; 4] {
    let e = (-alpha * y).exp();
    let mut out = [zero(); 4];
    for (k, o) in out.iter_mut().enumerate() {
        let mut acc = zero();
        for j in 0..=k {
            acc += f[j] * BINOM[k][j] * (-alpha).powi((k - j) as i32);
        }
        *o = acc * e;
    }
    out
}

/// The slow mode at one wave speed, with `I(0)` precomputed.
#[derive(Debug, Clone)]
pub struct SlowMode {
    params: SpectralParams,
    profile: Arc<dyn Profile>,
    /// `1/(U'(1) w(1)) + log w(1) · U''(1)/U'(1)³`
    k1: C,
    i0: C,
}

fn g0(p: &dyn Profile, y: f64) -> f64 {
    let [_, d1, d2, _] = p.u_derivs(y);
    d2 / (d1 * d1 * d1)
}

/// `(U''/U'³)'`
fn g1(p: &dyn Profile, y: f64) -> f64 {
    let [_, d1, d2, d3] = p.u_derivs(y);
    d3 / (d1 * d1 * d1) - 3.0 * d2 * d2 / (d1 * d1 * d1 * d1)
}

impl SlowMode {
    pub fn new(params: SpectralParams, profile: Arc<dyn Profile>) -> Result<Self> {
        let c_hat = params.c_hat;
        if c_hat.im < 0.0 && profile.critical_point(c_hat).is_none() {
            return Err(Error::InvalidParameter(
                "Im ĉ < 0 needs a profile with an analytic critical point".into(),
            ));
        }
        let [u1, d1, _, _] = profile.u_derivs(1.0);
        let w1 = u1 - c_hat;
        let k1 = 1.0 / (d1 * w1) + w1.ln() * g0(profile.as_ref(), 1.0);
        let mut me = Self { params, profile, k1, i0: zero() };
        me.i0 = me.integral_i(0.0)?;
        Ok(me)
    }

    /// Slow mode for the exponential Hartmann layer with `h_inf = 1`.
    pub fn hartmann(params: SpectralParams) -> Result<Self> {
        Self::new(params, Arc::new(HartmannProfile::default()))
    }

    pub fn params(&self) -> &SpectralParams {
        &self.params
    }

    pub fn profile(&self) -> &Arc<dyn Profile> {
        &self.profile
    }

    fn w(&self, y: f64) -> C {
        self.profile.u(y) - self.params.c_hat
    }

    /// Residue term picked up when `ĉ` has been continued below the real
    /// axis across the image of the integration segment `[a, b]` (a < b).
    fn continuation(&self, a: f64, b: f64) -> C {
        let c_hat = self.params.c_hat;
        if c_hat.im >= 0.0 {
            return zero();
        }
        match self.profile.critical_point(c_hat) {
            Some((x_star, g)) if x_star.re > a && x_star.re < b => C::new(0.0, 2.0 * PI) * g,
            _ => zero(),
        }
    }

    /// `∫₁^{y} log(w) (U''/U'³)' dX` for `y ≤ 1`.
    fn log_tail(&self, y: f64) -> Result<C> {
        let p = self.profile.as_ref();
        let c_hat = self.params.c_hat;
        let v = integrate_interval(|x| [(p.u(x) - c_hat).ln() * g1(p, x)], 1.0, y, QUAD_TOL)?;
        Ok(v[0])
    }

    /// `∫₁^{y} w^{−2}` directly, for `y ≥ 1`.
    fn direct(&self, a: f64, b: f64) -> Result<C> {
        let p = self.profile.as_ref();
        let c_hat = self.params.c_hat;
        let v = integrate_interval(
            |x| {
                let w = p.u(x) - c_hat;
                [1.0 / (w * w)]
            },
            a,
            b,
            QUAD_TOL,
        )?;
        Ok(v[0])
    }

    fn ibp_head(&self, y: f64) -> C {
        let p = self.profile.as_ref();
        let w = self.w(y);
        -1.0 / (p.du(y) * w) - w.ln() * g0(p, y) + self.k1
    }

    /// `I(y) = ∫₁^y (U_s − ĉ)^{−2} dX`: integration by parts on `[0, 1]`,
    /// direct quadrature beyond.
    pub fn integral_i(&self, y: f64) -> Result<C> {
        if !(y >= 0.0) {
            return Err(Error::InvalidParameter(format!("slow mode evaluated at Y = {y}")));
        }
        if y <= 1.0 {
            Ok(self.ibp_head(y) + self.log_tail(y)? + self.continuation(y, 1.0))
        } else {
            Ok(self.direct(1.0, y)? - self.continuation(1.0, y))
        }
    }

    /// `I(0)`.
    pub fn i0(&self) -> C {
        self.i0
    }

    /// `ψ_{0,2}(0) = −ĉ I(0)`.
    pub fn psi02_at_wall(&self) -> C {
        -self.params.c_hat * self.i0
    }

    /// `∂_Y ψ_{0,2}(0) = U'(0) I(0) − 1/ĉ`.
    pub fn dpsi02_at_wall(&self) -> C {
        self.profile.du(0.0) * self.i0 - 1.0 / self.params.c_hat
    }

    fn psi01_from(&self, u: &[f64; 4]) -> [C; 4] {
        [u[0] - self.params.c_hat, C::from(u[1]), C::from(u[2]), C::from(u[3])]
    }

    fn psi02_from(&self, u: &[f64; 4], w: C, i: C) -> [C; 4] {
        [w * i, u[1] * i + 1.0 / w, u[2] * i, u[3] * i + u[2] / (w * w)]
    }

    /// `ψ_{0,j}` and its first three derivatives.
    pub fn psi0_derivs(&self, j: u8, y: f64) -> Result<[C; 4]> {
        let u = self.profile.u_derivs(y);
        match j {
            1 => Ok(self.psi01_from(&u)),
            2 => {
                let i = self.integral_i(y)?;
                Ok(self.psi02_from(&u, u[0] - self.params.c_hat, i))
            }
            _ => Err(Error::InvalidParameter(format!("psi0 index {j} not in {{1, 2}}"))),
        }
    }

    /// `P = ψ_{0,1}J₁ + ψ_{0,2}J₂` and its derivatives, with `Φ₁^s = −2e^{−αY}P`.
    fn p_from(&self, y: f64, u: &[f64; 4], i: C) -> [C; 4] {
        let c_hat = self.params.c_hat;
        let w = u[0] - c_hat;
        let p1 = self.psi01_from(u);
        let p2 = self.psi02_from(u, w, i);
        let j1 = (w * w * i - c_hat * c_hat * self.i0 - y) / 2.0;
        // ((1 − ĉ)² − w²)/2 through the deficit, which keeps the e^{−Y} decay exact
        let d = self.profile.deficit(y);
        let j2 = d * (2.0 * (1.0 - c_hat) - d) / 2.0;
        [
            p1[0] * j1 + p2[0] * j2,
            p1[1] * j1 + p2[1] * j2,
            p1[2] * j1 + p2[2] * j2 - u[1],
            p1[3] * j1 + p2[3] * j2 - u[2],
        ]
    }

    fn phi1_from(&self, y: f64, u: &[f64; 4], i: C) -> [C; 4] {
        let mut out = times_exp(self.params.alpha, y, &self.p_from(y, u, i));
        for v in out.iter_mut() {
            *v *= -2.0;
        }
        out
    }

    /// `∂_YΦ₁^s + αΦ₁^s = −2e^{−αY}∂_Y P`, formed without the cancellation
    /// between the two terms at large `Y`.
    fn phi1_lift_from(&self, y: f64, u: &[f64; 4], i: C) -> C {
        -2.0 * (-self.params.alpha * y).exp() * self.p_from(y, u, i)[1]
    }

    /// `∂_YΦ₁^s + αΦ₁^s` at `y`.
    pub fn phi1_lift(&self, y: f64) -> Result<C> {
        let i = self.integral_i(y)?;
        Ok(self.phi1_lift_from(y, &self.profile.u_derivs(y), i))
    }

    /// `Φ₁^s` and its first three derivatives.
    pub fn phi1_derivs(&self, y: f64) -> Result<[C; 4]> {
        let i = self.integral_i(y)?;
        Ok(self.phi1_from(y, &self.profile.u_derivs(y), i))
    }

    fn phi_app_from(&self, y: f64, u: &[f64; 4], phi1: &[C; 4]) -> [C; 4] {
        let lift = times_exp(self.params.alpha, y, &self.psi01_from(u));
        let mut out = [zero(); 4];
        for k in 0..4 {
            out[k] = lift[k] + self.params.alpha * phi1[k];
        }
        out
    }

    /// `Φ_app^s` and its first three derivatives.
    pub fn phi_app_derivs(&self, y: f64) -> Result<[C; 4]> {
        let u = self.profile.u_derivs(y);
        let phi1 = self.phi1_from(y, &u, self.integral_i(y)?);
        Ok(self.phi_app_from(y, &u, &phi1))
    }

    /// Closed form of `Φ_app^s(0) = −ĉ − αψ_{0,2}(0)(1 − 2ĉ)`.
    pub fn wall_value(&self) -> C {
        let (a, ch) = (self.params.alpha, self.params.c_hat);
        -ch - a * self.psi02_at_wall() * (1.0 - 2.0 * ch)
    }

    /// Closed form of `∂_YΦ_app^s(0) = 1 + αĉ + α(1 − 2ĉ)(αψ_{0,2}(0) − ∂_Yψ_{0,2}(0))`.
    pub fn wall_slope(&self) -> C {
        let (a, ch) = (self.params.alpha, self.params.c_hat);
        1.0 + a * ch + a * (1.0 - 2.0 * ch) * (a * self.psi02_at_wall() - self.dpsi02_at_wall())
    }

    /// `I` at every node of `grid`, accumulated interval by interval.
    pub fn sample_i(&self, grid: &GradedGrid) -> Result<Vec<C>> {
        let nodes = grid.nodes();
        let p = self.profile.as_ref();
        let c_hat = self.params.c_hat;
        let mut out = vec![zero(); nodes.len()];
        // nodes in [0, 1]: head + ∫₁^Y log(w) g1, accumulated downward from 1
        let split = nodes.partition_point(|&y| y <= 1.0);
        let mut acc = zero();
        let mut upper = 1.0;
        for j in (0..split).rev() {
            let y = nodes[j];
            if y < upper {
                let v = integrate_interval(|x| [(p.u(x) - c_hat).ln() * g1(p, x)], upper, y, QUAD_TOL)?;
                acc += v[0];
                upper = y;
            }
            out[j] = self.ibp_head(y) + acc + self.continuation(y, 1.0);
        }
        let mut acc = zero();
        let mut lower = 1.0;
        for j in split..nodes.len() {
            let y = nodes[j];
            acc += self.direct(lower, y)?;
            lower = y;
            out[j] = acc - self.continuation(1.0, y);
        }
        Ok(out)
    }

    /// Nodal values of `Φ₁^s` and `Φ_app^s` (orders 0..3) on `grid`.
    pub fn sample(&self, grid: &GradedGrid) -> Result<SlowSamples> {
        let ivals = self.sample_i(grid)?;
        let n = grid.len();
        let mut phi1 = vec![vec![zero(); n]; 4];
        let mut phi = vec![vec![zero(); n]; 4];
        let mut phi1_lift = vec![zero(); n];
        for (j, (&y, &i)) in grid.nodes().iter().zip(&ivals).enumerate() {
            let u = self.profile.u_derivs(y);
            let p1 = self.phi1_from(y, &u, i);
            phi1_lift[j] = self.phi1_lift_from(y, &u, i);
            let pa = self.phi_app_from(y, &u, &p1);
            for k in 0..4 {
                phi1[k][j] = p1[k];
                phi[k][j] = pa[k];
            }
        }
        Ok(SlowSamples { phi1, phi1_lift, phi })
    }
}

/// Slow-mode fields at grid nodes; index `[order][node]`.
#[derive(Debug, Clone)]
pub struct SlowSamples {
    pub phi1: Vec<Vec<C>>,
    /// `∂_YΦ₁^s + αΦ₁^s`
    pub phi1_lift: Vec<C>,
    pub phi: Vec<Vec<C>>,
}

impl ModeFunction for SlowMode {
    fn max_order(&self) -> usize {
        3
    }

    fn eval(&self, order: usize, y: f64) -> Result<C> {
        check_order(order, 3, "slow mode")?;
        Ok(self.phi_app_derivs(y)?[order])
    }

    fn decay_rate(&self) -> f64 {
        self.params.alpha
    }
}

/// `∂_Y^order ψ_{0,j}(y)` for the Hartmann layer.
pub fn psi0(j: u8, order: usize, y: f64, params: &SpectralParams) -> Result<C> {
    check_order(order, 3, "psi0")?;
    Ok(SlowMode::hartmann(*params)?.psi0_derivs(j, y)?[order])
}

/// `∂_Y^order Φ₁^s(y)` for the Hartmann layer.
pub fn phi1s(order: usize, y: f64, params: &SpectralParams) -> Result<C> {
    check_order(order, 3, "phi1s")?;
    Ok(SlowMode::hartmann(*params)?.phi1_derivs(y)?[order])
}

/// `∂_Y^order Φ_app^s(y)` for the Hartmann layer.
pub fn phi_app_s(order: usize, y: f64, params: &SpectralParams) -> Result<C> {
    check_order(order, 3, "phi_app_s")?;
    Ok(SlowMode::hartmann(*params)?.phi_app_derivs(y)?[order])
}

/// `Ray_α(f) = (U_s − ĉ)(∂_Y² − α²)f − U_s'' f` at `y`.
pub fn rayleigh_apply(f: &dyn ModeFunction, y: f64, params: &SpectralParams, profile: &dyn Profile) -> Result<C> {
    if f.max_order() < 2 {
        return Err(Error::UnsupportedOrder { what: "Rayleigh operator input", order: 2 });
    }
    let u = profile.u_derivs(y);
    let a2 = params.alpha * params.alpha;
    let f0 = f.eval(0, y)?;
    let f2 = f.eval(2, y)?;
    Ok((u[0] - params.c_hat) * (f2 - a2 * f0) - u[2] * f0)
}

/// Closed form `Ray_α(Φ_app^s) = −2α²(U_s − ĉ)(∂_YΦ₁^s + αΦ₁^s)`.
pub fn rayleigh_closed_form(slow: &SlowMode, y: f64) -> Result<C> {
    let p = slow.params();
    let w = slow.profile().u(y) - p.c_hat;
    Ok(-2.0 * p.alpha * p.alpha * w * slow.phi1_lift(y)?)
}

/// The three slow-mode error groups at one point, from local values:
/// `phi[0..4]` of `Φ_app^s`, `phi1_lift = ∂_YΦ₁^s + αΦ₁^s`, `psi[0..2]` of `Ψ_app^s`.
pub fn slow_error_point(
    group: u8,
    y: f64,
    params: &SpectralParams,
    profile: &dyn Profile,
    phi: &[C],
    phi1_lift: C,
    psi: &[C],
) -> Result<C> {
    let (a, n, se) = (params.alpha, params.n, params.eps.sqrt());
    let u = profile.u_derivs(y);
    let h = profile.h_derivs(y);
    let i = C::i();
    match group {
        1 => Ok(i / n * (phi[3] - 2.0 * a * a * phi[1])
            - se * h[0] * psi[1]
            - a / n * ((u[0] - params.c) * psi[0] - h[0] * phi[0])),
        2 => Ok(a * a * a / n * phi[0] - i * a * se * h[0] * psi[0] - a / n * phi[0]),
        3 => Ok(-2.0 * a * a * (u[0] - params.c_hat) * phi1_lift
            + se * h[1] * psi[1]
            + se * h[2] * psi[0]),
        _ => Err(Error::InvalidParameter(format!("slow error group {group} not in 1..=3"))),
    }
}

/// `E_group^s(y)` with `Ψ_app^s` supplied by the magnetic solver.
pub fn slow_errors(group: u8, y: f64, slow: &SlowMode, psi_app_s: &dyn ModeFunction) -> Result<C> {
    let phi = slow.phi_app_derivs(y)?;
    let lift = slow.phi1_lift(y)?;
    let psi = [psi_app_s.eval(0, y)?, psi_app_s.eval(1, y)?];
    slow_error_point(group, y, slow.params(), slow.profile().as_ref(), &phi, lift, &psi)
}

/// All three error groups on `grid`; `psi[k]` holds `∂_Y^k Ψ_app^s` (k = 0, 1).
pub fn slow_error_fields(
    grid: &GradedGrid,
    slow: &SlowMode,
    samples: &SlowSamples,
    psi: &[Vec<C>],
) -> Result<[Vec<C>; 3]> {
    let n = grid.len();
    let mut out = [vec![zero(); n], vec![zero(); n], vec![zero(); n]];
    for (j, &y) in grid.nodes().iter().enumerate() {
        let phi: Vec<C> = (0..4).map(|k| samples.phi[k][j]).collect();
        let ps = [psi[0][j], psi[1][j]];
        for g in 0..3 {
            out[g][j] = slow_error_point(
                g as u8 + 1,
                y,
                slow.params(),
                slow.profile().as_ref(),
                &phi,
                samples.phi1_lift[j],
                &ps,
            )?;
        }
    }
    Ok(out)
}
