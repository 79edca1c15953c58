//! Discrete Orr-Sommerfeld resolvents and the exact dispersion function.
//!
//! Unknowns are interleaved per node as `(φ_j, ω_j, ψ_j)` with
//! `ω = (∂_Y² − α²)φ`, so the fourth-order operator is two applications of
//! the three-point `∂_Y² − α²` stencil and the Navier-slip row is `ω(0) = 0`.
//! Far-field rows are homogeneous Dirichlet at `Y_max`.
//!
//! Three operators share the layout:
//!
//! * `OS`: the full system;
//! * `OS_d`: first row `(i/n)(∂²−α²)ω + (U−ĉ)ω − U''φ` only;
//! * `OS_s`: `OS` plus `U'∂φ + U''φ` (the divergence form).
//!
//! The second row is the magnetic equation in all three.

use std::sync::Arc;

use num_complex::Complex64;
use serde::Serialize;

use crate::dispersion::{gamma0_with, scan_boundary, DispersionReport};
use crate::error::{Error, Result};
use crate::fastmode::{fast_error_fields, AiryFastMode};
use crate::magnetic::build_psi_app_s;
use crate::numerics::{newton_root, BandMatrix, Circle, GradedGrid};
use crate::params::{Regime, SpectralParams};
use crate::profile::Profile;
use crate::slowmode::{slow_error_fields, SlowMode};

type C = Complex64;

fn zero() -> C {
    C::new(0.0, 0.0)
}

/// Condition estimate above which a factorization counts as singular.
pub const COND_LIMIT: f64 = 1e12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum WallCondition {
    /// `φ = (∂² − α²)φ = ψ = 0`
    NavierSlip,
    /// `φ = ∂φ = ψ = 0`
    NoSlip,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum OsKind {
    Full,
    D,
    S,
}

/// Grid and wall condition for the discrete problems.
#[derive(Debug, Clone)]
pub struct DiscreteBVP {
    pub grid: Arc<GradedGrid>,
    pub wall: WallCondition,
}

impl DiscreteBVP {
    pub fn new(grid: Arc<GradedGrid>, wall: WallCondition) -> Result<Self> {
        if grid.len() < 8 || grid.nodes()[0] != 0.0 {
            return Err(Error::InvalidParameter("OS grid needs Y_0 = 0 and at least 8 nodes".into()));
        }
        Ok(Self { grid, wall })
    }

    /// `Y_max = max(40, 16/α)`, `intervals` cells, wall spacing resolving the
    /// `n^{−1/3}` sub-layer.
    pub fn for_params(params: &SpectralParams, intervals: usize) -> Result<Self> {
        let y_max = 40f64.max(16.0 / params.alpha);
        let h0 = (0.01 * params.n.powf(-1.0 / 3.0)).min(5e-4);
        Self::new(Arc::new(GradedGrid::new(y_max, intervals, h0)?), WallCondition::NavierSlip)
    }

    /// As [`DiscreteBVP::for_params`] with an explicit `Y_max`.
    pub fn with_y_max(params: &SpectralParams, intervals: usize, y_max: f64) -> Result<Self> {
        let h0 = (0.01 * params.n.powf(-1.0 / 3.0)).min(5e-4);
        Self::new(Arc::new(GradedGrid::new(y_max, intervals, h0)?), WallCondition::NavierSlip)
    }

    pub fn with_wall(mut self, wall: WallCondition) -> Self {
        self.wall = wall;
        self
    }

    pub fn refined(&self) -> Self {
        Self { grid: Arc::new(self.grid.refined()), wall: self.wall }
    }
}

/// Nodal profile data reused by every assembly at one grid.
struct Coeffs {
    u: Vec<[f64; 4]>,
    h: Vec<[f64; 3]>,
}

impl Coeffs {
    fn new(profile: &dyn Profile, grid: &GradedGrid) -> Self {
        let u = grid.nodes().iter().map(|&y| profile.u_derivs(y)).collect();
        let h = grid.nodes().iter().map(|&y| profile.h_derivs(y)).collect();
        Self { u, h }
    }
}

/// `(variable, offset, weight)`; `variable` 0 = φ, 1 = ω, 2 = ψ.
type Stencil = Vec<(usize, isize, C)>;

/// The discrete first-row and second-row coefficients at interior node `j`.
fn interior_rows(
    kind: OsKind,
    p: &SpectralParams,
    co: &Coeffs,
    grid: &GradedGrid,
    j: usize,
) -> (Stencil, Stencil) {
    let (a, n, se, c, ch) = (p.alpha, p.n, p.eps.sqrt(), p.c, p.c_hat);
    let a2 = a * a;
    let i = C::i();
    let [u, du, d2u, _] = co.u[j];
    let [h, dh, d2h] = co.h[j];
    let d1 = grid.d1_weights(j);
    let d2 = grid.d2_weights(j);
    let mut r1 = Vec::with_capacity(16);
    // (i/n)(∂² − α²)ω
    for k in 0..3 {
        r1.push((1, k as isize - 1, i / n * d2[k]));
    }
    r1.push((1, 0, -i / n * a2));
    r1.push((1, 0, u - ch));
    r1.push((0, 0, C::new(-d2u, 0.0)));
    if kind != OsKind::D {
        // ∂R₁ + iαR₂ expanded:
        // −√εH(∂²−α²)ψ + √εH''ψ − (α/n)(U'ψ + (U−c)∂ψ − H'φ − H∂φ) − (iα²/n)φ
        for k in 0..3 {
            r1.push((2, k as isize - 1, C::new(-se * h * d2[k], 0.0)));
            r1.push((2, k as isize - 1, -a / n * (u - c) * d1[k]));
            r1.push((0, k as isize - 1, C::new(a / n * h * d1[k], 0.0)));
        }
        r1.push((2, 0, C::new(se * h * a2 + se * d2h - a / n * du, 0.0)));
        r1.push((0, 0, C::new(a / n * dh, 0.0) - i * a2 / n));
    }
    if kind == OsKind::S {
        for k in 0..3 {
            r1.push((0, k as isize - 1, C::new(du * d1[k], 0.0)));
        }
        r1.push((0, 0, C::new(d2u, 0.0)));
    }
    // −(∂² − α²)ψ + iα(U − c)ψ − iαHφ − ∂φ
    let mut r2 = Vec::with_capacity(10);
    for k in 0..3 {
        r2.push((2, k as isize - 1, C::new(-d2[k], 0.0)));
        r2.push((0, k as isize - 1, C::new(-d1[k], 0.0)));
    }
    r2.push((2, 0, C::new(a2, 0.0) + i * a * (u - c)));
    r2.push((0, 0, -i * a * h));
    (r1, r2)
}

const BAND: usize = 6;

/// Assembles the discrete operator of `kind`.
pub fn assemble(kind: OsKind, params: &SpectralParams, profile: &dyn Profile, bvp: &DiscreteBVP) -> BandMatrix {
    let co = Coeffs::new(profile, &bvp.grid);
    assemble_with(kind, params, &co, bvp)
}

fn assemble_with(kind: OsKind, params: &SpectralParams, co: &Coeffs, bvp: &DiscreteBVP) -> BandMatrix {
    let grid = &bvp.grid;
    let m = grid.len();
    let a2 = params.alpha * params.alpha;
    let one = C::new(1.0, 0.0);
    let mut mat = BandMatrix::zeros(3 * m, BAND, BAND);
    // wall
    mat.set(0, 0, one);
    match bvp.wall {
        WallCondition::NavierSlip => mat.set(1, 1, one),
        WallCondition::NoSlip => {
            let w = grid.d1_wall_weights();
            for k in 0..3 {
                mat.set(1, 3 * k, C::new(w[k], 0.0));
            }
        }
    }
    mat.set(2, 2, one);
    for j in 1..m - 1 {
        let base = 3 * j;
        // ω − (∂² − α²)φ = 0
        let d2 = grid.d2_weights(j);
        mat.add(base, base + 1, one);
        for k in 0..3 {
            mat.add(base, base + 3 * k - 3, C::new(-d2[k], 0.0));
        }
        mat.add(base, base, C::new(a2, 0.0));
        let (r1, r2) = interior_rows(kind, params, co, grid, j);
        for (var, off, w) in r1 {
            mat.add(base + 1, (base as isize + 3 * off) as usize + var, w);
        }
        for (var, off, w) in r2 {
            mat.add(base + 2, (base as isize + 3 * off) as usize + var, w);
        }
    }
    let last = 3 * (m - 1);
    for v in 0..3 {
        mat.set(last + v, last + v, one);
    }
    mat
}

/// Nodal `φ`, `ω = (∂²−α²)φ`, `ψ`.
#[derive(Debug, Clone)]
pub struct OsSolution {
    pub phi: Vec<C>,
    pub omega: Vec<C>,
    pub psi: Vec<C>,
}

impl OsSolution {
    fn zeros(m: usize) -> Self {
        Self { phi: vec![zero(); m], omega: vec![zero(); m], psi: vec![zero(); m] }
    }

    fn from_interleaved(x: &[C]) -> Self {
        let m = x.len() / 3;
        Self {
            phi: (0..m).map(|j| x[3 * j]).collect(),
            omega: (0..m).map(|j| x[3 * j + 1]).collect(),
            psi: (0..m).map(|j| x[3 * j + 2]).collect(),
        }
    }

    pub fn interleaved(&self) -> Vec<C> {
        let mut x = Vec::with_capacity(3 * self.phi.len());
        for j in 0..self.phi.len() {
            x.extend([self.phi[j], self.omega[j], self.psi[j]]);
        }
        x
    }

    fn add_assign(&mut self, o: &OsSolution) {
        for j in 0..self.phi.len() {
            self.phi[j] += o.phi[j];
            self.omega[j] += o.omega[j];
            self.psi[j] += o.psi[j];
        }
    }

    /// One-sided second-order `∂_Yφ(0)`.
    pub fn wall_slope(&self, grid: &GradedGrid) -> C {
        let w = grid.d1_wall_weights();
        self.phi[0] * w[0] + self.phi[1] * w[1] + self.phi[2] * w[2]
    }

    /// `‖ω‖ + ‖(∂φ, αφ)‖ + α‖ψ‖` in `L²`.
    pub fn energy(&self, grid: &GradedGrid, alpha: f64) -> f64 {
        let dphi = grid.derivative(&self.phi);
        let grad = (grid.l2_norm(&dphi).powi(2) + (alpha * grid.l2_norm(&self.phi)).powi(2)).sqrt();
        grid.l2_norm(&self.omega) + grad + alpha * grid.l2_norm(&self.psi)
    }
}

fn rhs(f1: &[C], f2: &[C]) -> Vec<C> {
    let m = f1.len();
    let mut b = vec![zero(); 3 * m];
    for j in 1..m - 1 {
        b[3 * j + 1] = f1[j];
        b[3 * j + 2] = f2[j];
    }
    b
}

/// Factorized discrete operator of one kind at one `c`.
pub struct OsSolver {
    lu: crate::numerics::BandLu,
    pub kind: OsKind,
    pub condition: f64,
}

impl OsSolver {
    pub fn new(kind: OsKind, params: &SpectralParams, profile: &dyn Profile, bvp: &DiscreteBVP) -> Result<Self> {
        let co = Coeffs::new(profile, &bvp.grid);
        Self::with_coeffs(kind, params, &co, bvp)
    }

    fn with_coeffs(kind: OsKind, params: &SpectralParams, co: &Coeffs, bvp: &DiscreteBVP) -> Result<Self> {
        let lu = assemble_with(kind, params, co, bvp).factor()?;
        let condition = lu.condition_estimate();
        if !(condition < COND_LIMIT) {
            return Err(Error::SingularSystem { cond: condition });
        }
        Ok(Self { lu, kind, condition })
    }

    /// Solves with sources `(f1, f2)` at the nodes; boundary entries ignored.
    pub fn solve(&self, f1: &[C], f2: &[C]) -> OsSolution {
        OsSolution::from_interleaved(&self.lu.solve(&rhs(f1, f2)))
    }
}

fn check_sources(bvp: &DiscreteBVP, f1: &[C], f2: &[C]) -> Result<()> {
    let m = bvp.grid.len();
    if f1.len() != m || f2.len() != m {
        return Err(Error::InvalidParameter("OS sources must be sampled on the BVP grid".into()));
    }
    Ok(())
}

/// `OS_d(φ, ϱ) = (q1, q2)` with Navier-slip rows.
pub fn os_d_solve(q1: &[C], q2: &[C], params: &SpectralParams, profile: &dyn Profile, bvp: &DiscreteBVP) -> Result<OsSolution> {
    check_sources(bvp, q1, q2)?;
    Ok(OsSolver::new(OsKind::D, params, profile, bvp)?.solve(q1, q2))
}

/// How a first-row source is supplied to [`os_s_solve`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum SourceForm {
    /// `h1` is the source itself.
    Plain,
    /// `h1 = ∂_Y g1`, with `g1` supplied.
    Derivative,
    /// `h1 = iα g1`, with `g1` supplied.
    Alpha,
}

fn expand_source(form: SourceForm, g: &[C], grid: &GradedGrid, alpha: f64) -> Vec<C> {
    match form {
        SourceForm::Plain => g.to_vec(),
        SourceForm::Derivative => grid.derivative(g),
        SourceForm::Alpha => g.iter().map(|v| C::new(0.0, alpha) * v).collect(),
    }
}

/// `OS_s(ξ, ϑ) = (h1, h2)`.
pub fn os_s_solve(
    h1: &[C],
    h2: &[C],
    params: &SpectralParams,
    profile: &dyn Profile,
    bvp: &DiscreteBVP,
    form: SourceForm,
) -> Result<OsSolution> {
    check_sources(bvp, h1, h2)?;
    let h1 = expand_source(form, h1, &bvp.grid, params.alpha);
    Ok(OsSolver::new(OsKind::S, params, profile, bvp)?.solve(&h1, h2))
}

/// Applies `kind` to `sol`; entry `j` of each row is meaningful for interior `j`.
pub fn apply_os(kind: OsKind, params: &SpectralParams, profile: &dyn Profile, bvp: &DiscreteBVP, sol: &OsSolution) -> (Vec<C>, Vec<C>) {
    let v = assemble(kind, params, profile, bvp).matvec(&sol.interleaved());
    let m = sol.phi.len();
    ((0..m).map(|j| v[3 * j + 1]).collect(), (0..m).map(|j| v[3 * j + 2]).collect())
}

/// The continuous operator `kind` at one point, from `∂^k φ` (k = 0..4) and
/// `∂^k ψ` (k = 0..2). Used to manufacture sources with a known solution.
pub fn os_pointwise(kind: OsKind, params: &SpectralParams, profile: &dyn Profile, y: f64, phi: [C; 5], psi: [C; 3]) -> (C, C) {
    let (a, n, se, c, ch) = (params.alpha, params.n, params.eps.sqrt(), params.c, params.c_hat);
    let a2 = a * a;
    let i = C::i();
    let [u, du, d2u, _] = profile.u_derivs(y);
    let [h, dh, d2h] = profile.h_derivs(y);
    let omega = phi[2] - a2 * phi[0];
    let d2omega = phi[4] - a2 * phi[2];
    let mut r1 = i / n * (d2omega - a2 * omega) + (u - ch) * omega - d2u * phi[0];
    if kind != OsKind::D {
        r1 += -se * h * (psi[2] - a2 * psi[0]) + se * d2h * psi[0]
            - a / n * (du * psi[0] + (u - c) * psi[1] - dh * phi[0] - h * phi[1])
            - i * a2 / n * phi[0];
    }
    if kind == OsKind::S {
        r1 += du * phi[1] + d2u * phi[0];
    }
    let r2 = -(psi[2] - a2 * psi[0]) + i * a * (u - c) * psi[0] - i * a * h * phi[0] - phi[1];
    (r1, r2)
}

/// `L_d = ∂R₁ + iαR₂` (first row only), from the difference of the assembled
/// operators so that `OS = OS_d + L_d` holds exactly on the grid.
fn apply_l_d(co: &Coeffs, params: &SpectralParams, grid: &GradedGrid, sol: &OsSolution) -> Vec<C> {
    let m = sol.phi.len();
    let mut out = vec![zero(); m];
    for (j, slot) in out.iter_mut().enumerate().take(m - 1).skip(1) {
        let (full, _) = interior_rows(OsKind::Full, params, co, grid, j);
        let (d, _) = interior_rows(OsKind::D, params, co, grid, j);
        let val = |rows: &[(usize, isize, C)]| -> C {
            rows.iter()
                .map(|&(var, off, w)| {
                    let k = (j as isize + off) as usize;
                    w * [sol.phi[k], sol.omega[k], sol.psi[k]][var]
                })
                .sum()
        };
        *slot = val(&full) - val(&d);
    }
    out
}

/// `U'∂ξ + U''ξ`, the difference `OS_s − OS` on the first row.
fn apply_l_s_neg(co: &Coeffs, grid: &GradedGrid, xi: &[C]) -> Vec<C> {
    let m = xi.len();
    let mut out = vec![zero(); m];
    for j in 1..m - 1 {
        let d1 = grid.d1_weights(j);
        let dxi = d1[0] * xi[j - 1] + d1[1] * xi[j] + d1[2] * xi[j + 1];
        out[j] = co.u[j][1] * dxi + co.u[j][2] * xi[j];
    }
    out
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct IterationTrace {
    /// Energy of each increment `(Φ_k, Ψ_k)`, starting with `(φ₀, ϱ₀)`.
    pub e: Vec<f64>,
    /// `α^{1/2}‖(∂Ψ_k, αΨ_k)‖` of each increment.
    pub f: Vec<f64>,
    pub ratios: Vec<f64>,
}

/// The `OS_d`–`OS_s` iteration for `OS(Φ, Ψ) = (f1, f2)`. With a divergence
/// form source the `OS_s` pre-step runs first.
#[allow(clippy::too_many_arguments)]
pub fn os_iterate(
    f1: &[C],
    f2: &[C],
    params: &SpectralParams,
    profile: &dyn Profile,
    bvp: &DiscreteBVP,
    form: SourceForm,
    tol: f64,
    max_iter: usize,
) -> Result<(OsSolution, IterationTrace)> {
    check_sources(bvp, f1, f2)?;
    let grid = &bvp.grid;
    let m = grid.len();
    let a = params.alpha;
    let mut trace = IterationTrace::default();
    let f1 = expand_source(form, f1, grid, a);
    if f1.iter().chain(f2).all(|v| *v == zero()) {
        return Ok((OsSolution::zeros(m), trace));
    }
    let co = Coeffs::new(profile, grid);
    let sd = OsSolver::with_coeffs(OsKind::D, params, &co, bvp)?;
    let ss = OsSolver::with_coeffs(OsKind::S, params, &co, bvp)?;

    let mut total = OsSolution::zeros(m);
    let (q1, q2) = if form == SourceForm::Plain {
        (f1, f2.to_vec())
    } else {
        let pre = ss.solve(&f1, f2);
        let q = apply_l_s_neg(&co, grid, &pre.phi);
        total.add_assign(&pre);
        (q, vec![zero(); m])
    };
    let magnetic = |s: &OsSolution| {
        let d = grid.derivative(&s.psi);
        a.sqrt() * (grid.l2_norm(&d).powi(2) + (a * grid.l2_norm(&s.psi)).powi(2)).sqrt()
    };
    let mut prev = sd.solve(&q1, &q2);
    total.add_assign(&prev);
    trace.e.push(prev.energy(grid, a));
    trace.f.push(magnetic(&prev));
    let e0 = trace.e[0];
    let mut growing = 0;
    for _ in 0..max_iter {
        if *trace.e.last().expect("nonempty") <= tol * e0 {
            return Ok((total, trace));
        }
        let ld = apply_l_d(&co, params, grid, &prev);
        let h1: Vec<C> = ld.iter().map(|v| -v).collect();
        let xi = ss.solve(&h1, &vec![zero(); m]);
        let src = apply_l_s_neg(&co, grid, &xi.phi);
        let phi = sd.solve(&src, &vec![zero(); m]);
        let mut inc = xi.clone();
        inc.add_assign(&phi);
        let e = inc.energy(grid, a);
        let r = e / trace.e.last().expect("nonempty");
        trace.ratios.push(r);
        trace.e.push(e);
        trace.f.push(magnetic(&inc));
        total.add_assign(&inc);
        prev = phi;
        if r >= 1.0 {
            growing += 1;
            if growing >= 2 {
                return Err(Error::NonContraction { ratios: trace.ratios });
            }
        } else {
            growing = 0;
        }
    }
    if *trace.e.last().expect("nonempty") <= tol * e0 {
        Ok((total, trace))
    } else {
        Err(Error::NonConvergence {
            context: "OS_d-OS_s iteration",
            detail: format!("E_k/E_0 = {:e} after {max_iter} steps", trace.e.last().unwrap() / e0),
        })
    }
}

/// Direct solve of the full discrete system.
pub fn os_solve_direct(f1: &[C], f2: &[C], params: &SpectralParams, profile: &dyn Profile, bvp: &DiscreteBVP) -> Result<OsSolution> {
    check_sources(bvp, f1, f2)?;
    Ok(OsSolver::new(OsKind::Full, params, profile, bvp)?.solve(f1, f2))
}

/// The approximate mode and its error sources on one grid.
#[derive(Debug, Clone)]
pub struct ApproxMode {
    /// `∂^k Φ_app`, k = 0..3.
    pub phi: Vec<Vec<C>>,
    /// `∂^k Ψ_app`, k = 0..2.
    pub psi: Vec<Vec<C>>,
    /// First-row source `E₃ + ∂E₁ + iαE₂` (slow plus fast).
    pub f1: Vec<C>,
    /// Second-row source `F^f`.
    pub f2: Vec<C>,
    pub gamma0: C,
    pub picard_ratio: f64,
    pub norms: ErrorNorms,
}

/// `L²` norms of the error groups; `E₃` groups carry the weight `|U_s''|^{−1/2}`.
#[derive(Debug, Clone, Copy, Default, Serialize)]
pub struct ErrorNorms {
    pub e1s_l2: f64,
    pub e2s_l2: f64,
    pub e3s_l2w: f64,
    pub e1f_l2: f64,
    pub e2f_l2: f64,
    pub e3f_l2w: f64,
    pub ff_l2: f64,
}

/// Builds `(Φ_app, Ψ_app)` and the remainder sources at `params.c`.
pub fn approx_mode(params: &SpectralParams, profile: Arc<dyn Profile>, grid: Arc<GradedGrid>) -> Result<ApproxMode> {
    params.require_regime(Regime::Eighth)?;
    let slow = SlowMode::new(*params, profile.clone())?;
    let ss = slow.sample(&grid)?;
    let fast = AiryFastMode::new(*params)?;
    let fs = fast.sample(&grid)?;
    let s0 = slow.wall_value();
    let mag = build_psi_app_s(params, profile.clone(), grid.clone(), &ss.phi, fs.psi[0][0], s0, 1e-13, 200)?;
    let psi_s: Vec<Vec<C>> = (0..3).map(|k| mag.mode.values(k).to_vec()).collect();
    let es = slow_error_fields(&grid, &slow, &ss, &psi_s)?;
    let ef = fast_error_fields(&grid, params, profile.as_ref(), s0, &fs);
    let m = grid.len();
    let e1: Vec<C> = (0..m).map(|j| es[0][j] + ef[0][j]).collect();
    let de1 = grid.derivative(&e1);
    let ia = C::new(0.0, params.alpha);
    let f1 = (0..m).map(|j| es[2][j] + ef[2][j] + de1[j] + ia * (es[1][j] + ef[1][j])).collect();
    let weight = |y: f64| 1.0 / profile.d2u(y).abs().max(f64::MIN_POSITIVE);
    let norms = ErrorNorms {
        e1s_l2: grid.l2_norm(&es[0]),
        e2s_l2: grid.l2_norm(&es[1]),
        e3s_l2w: grid.l2_norm_weighted(&es[2], weight),
        e1f_l2: grid.l2_norm(&ef[0]),
        e2f_l2: grid.l2_norm(&ef[1]),
        e3f_l2w: grid.l2_norm_weighted(&ef[2], weight),
        ff_l2: grid.l2_norm(&ef[3]),
    };
    let phi = (0..4).map(|k| (0..m).map(|j| ss.phi[k][j] - s0 * fs.phi[k][j]).collect()).collect();
    let psi = (0..3).map(|k| (0..m).map(|j| psi_s[k][j] - s0 * fs.psi[k][j]).collect()).collect();
    Ok(ApproxMode {
        phi,
        psi,
        f1,
        f2: ef[3].clone(),
        gamma0: slow.wall_slope() - s0 * fast.wall_slope(),
        picard_ratio: mag.trace.worst_ratio(),
        norms,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum RemainderMethod {
    Iteration,
    /// The iteration failed and the full system was solved directly.
    DirectFallback,
    Direct,
}

#[derive(Debug, Clone, Serialize)]
pub struct GammaDiagnostics {
    pub gamma0: C,
    pub gap: f64,
    pub method: RemainderMethod,
    pub trace: Option<IterationTrace>,
    pub picard_ratio: f64,
}

/// Options for [`remainder_and_gamma`].
#[derive(Debug, Clone, Copy)]
pub struct GammaOptions {
    pub intervals: usize,
    /// Overrides the default `Y_max`.
    pub y_max: Option<f64>,
    pub tol: f64,
    pub max_iter: usize,
    /// Skip the iteration and solve the full system directly.
    pub direct: bool,
}

impl Default for GammaOptions {
    fn default() -> Self {
        Self { intervals: 4000, y_max: None, tol: 1e-10, max_iter: 60, direct: false }
    }
}

/// `Γ(c) = Γ₀(c) − ∂_YΦ_R(0; c)` with `OS(Φ_R, Ψ_R) = OS(Φ_app, Ψ_app)`.
pub fn remainder_and_gamma(
    c: C,
    params: &SpectralParams,
    profile: Arc<dyn Profile>,
    opts: &GammaOptions,
) -> Result<(C, GammaDiagnostics)> {
    let p = params.with_c(c);
    let bvp = match opts.y_max {
        Some(y) => DiscreteBVP::with_y_max(&p, opts.intervals, y)?,
        None => DiscreteBVP::for_params(&p, opts.intervals)?,
    };
    let am = approx_mode(&p, profile.clone(), bvp.grid.clone())?;
    let (sol, method, trace) = if opts.direct {
        (os_solve_direct(&am.f1, &am.f2, &p, profile.as_ref(), &bvp)?, RemainderMethod::Direct, None)
    } else {
        match os_iterate(&am.f1, &am.f2, &p, profile.as_ref(), &bvp, SourceForm::Plain, opts.tol, opts.max_iter) {
            Ok((s, t)) => (s, RemainderMethod::Iteration, Some(t)),
            Err(Error::NonContraction { .. }) | Err(Error::NonConvergence { .. }) => (
                os_solve_direct(&am.f1, &am.f2, &p, profile.as_ref(), &bvp)?,
                RemainderMethod::DirectFallback,
                None,
            ),
            Err(e) => return Err(e),
        }
    };
    let dr = sol.wall_slope(&bvp.grid);
    let gamma = am.gamma0 - dr;
    Ok((gamma, GammaDiagnostics { gamma0: am.gamma0, gap: dr.norm(), method, trace, picard_ratio: am.picard_ratio }))
}

/// Wall slope of the discrete solution of `OS(Φ, Ψ) = 0` with
/// `Φ(0) = Ψ(0) = 0`, `(∂²−α²)Φ(0) = 1`: a dispersion function of the
/// discrete no-slip problem independent of the asymptotic construction.
pub fn discrete_dispersion(c: C, params: &SpectralParams, profile: &dyn Profile, bvp: &DiscreteBVP) -> Result<C> {
    let p = params.with_c(c);
    let lu = assemble(OsKind::Full, &p, profile, &bvp.clone().with_wall(WallCondition::NavierSlip)).factor()?;
    let mut b = vec![zero(); 3 * bvp.grid.len()];
    b[1] = C::new(1.0, 0.0);
    let sol = OsSolution::from_interleaved(&lu.solve(&b));
    Ok(sol.wall_slope(&bvp.grid))
}

/// Theorem-level certification on `disk`: the Rouché gap `|Γ − Γ₀|` against
/// `min|Γ₀|` on the boundary, the winding of `Γ`, and its root.
#[derive(Debug, Clone, Serialize)]
pub struct FullCertification {
    pub gap_max: f64,
    pub gamma0_min: f64,
    pub gap_certified: bool,
    pub gamma0_winding: i64,
    pub report: Option<DispersionReport>,
    pub winding: i64,
    pub boundary_samples: usize,
    pub fallback_count: usize,
}

pub fn certify_full(
    params: &SpectralParams,
    disk: &Circle,
    profile: Arc<dyn Profile>,
    opts: &GammaOptions,
    newton_tol: f64,
) -> Result<FullCertification> {
    let seen = std::sync::Mutex::new(Vec::<GammaDiagnostics>::new());
    let g = |c: C| {
        let (v, d) = remainder_and_gamma(c, params, profile.clone(), opts)?;
        seen.lock().expect("diagnostics lock").push(d);
        Ok(v)
    };
    let scan = scan_boundary(g, disk, None)?;
    let diags = std::mem::take(&mut *seen.lock().expect("diagnostics lock"));
    let gap_max = diags.iter().map(|d| d.gap).fold(0.0, f64::max);
    let gamma0_min = diags.iter().map(|d| d.gamma0.norm()).fold(f64::INFINITY, f64::min);
    let fallback_count = diags.iter().filter(|d| d.method == RemainderMethod::DirectFallback).count();
    let g0 = scan_boundary(|c| gamma0_with(c, params, profile.clone()), disk, None)?;
    let report = if scan.winding == 1 {
        let (c_root, newton) = newton_root(g, disk.center, newton_tol, 40)?;
        Some(DispersionReport {
            c_root,
            winding: 1,
            boundary_min_abs: scan.min_abs,
            reference_gap_max: Some(gap_max),
            reference_min_abs: Some(gamma0_min),
            newton,
            disk: *disk,
            boundary_samples: scan.samples,
        })
    } else {
        None
    };
    Ok(FullCertification {
        gap_max,
        gamma0_min,
        gap_certified: gap_max < 0.5 * gamma0_min,
        gamma0_winding: g0.winding,
        report,
        winding: scan.winding,
        boundary_samples: scan.samples,
        fallback_count,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::profile::HartmannProfile;

    fn setup() -> (SpectralParams, HartmannProfile) {
        (SpectralParams::eighth(1e-10, 2.0).unwrap(), HartmannProfile::default())
    }

    #[test]
    fn zero_source_zero_solution() {
        let (p, prof) = setup();
        let bvp = DiscreteBVP::for_params(&p, 400).unwrap();
        let z = vec![zero(); bvp.grid.len()];
        let s = os_d_solve(&z, &z, &p, &prof, &bvp).unwrap();
        assert!(s.phi.iter().chain(&s.psi).all(|v| *v == zero()));
        let s = os_s_solve(&z, &z, &p, &prof, &bvp, SourceForm::Plain).unwrap();
        assert!(s.phi.iter().all(|v| *v == zero()));
        let (s, t) = os_iterate(&z, &z, &p, &prof, &bvp, SourceForm::Plain, 1e-10, 10).unwrap();
        assert!(t.e.is_empty() && s.omega.iter().all(|v| *v == zero()));
    }

    /// `∂^k (Y^m e^{−λY})` for k = 0..K−1.
    fn monomial_exp<const K: usize>(m: i32, lambda: f64, y: f64) -> [C; K] {
        let mut out = [zero(); K];
        for (k, slot) in out.iter_mut().enumerate() {
            // Leibniz: Σ_j binom(k,j) (m)_j Y^{m−j} (−λ)^{k−j}
            let mut v = 0.0;
            let mut binom = 1.0;
            for j in 0..=k {
                let falling: f64 = (0..j as i32).map(|t| (m - t) as f64).product();
                if falling != 0.0 {
                    v += binom * falling * y.powi(m - j as i32) * (-lambda).powi((k - j) as i32);
                }
                binom = binom * (k - j) as f64 / (j + 1) as f64;
            }
            *slot = C::new(v * (-lambda * y).exp(), 0.0);
        }
        out
    }

    fn manufactured_error(kind: OsKind, p: &SpectralParams, prof: &HartmannProfile, bvp: &DiscreteBVP) -> f64 {
        let nodes = bvp.grid.nodes();
        let (mut f1, mut f2) = (Vec::new(), Vec::new());
        for &y in nodes {
            let (a, b) = os_pointwise(kind, p, prof, y, monomial_exp::<5>(3, 1.0, y), monomial_exp::<3>(1, 1.0, y));
            f1.push(a);
            f2.push(b);
        }
        let sol = OsSolver::new(kind, p, prof, bvp).unwrap().solve(&f1, &f2);
        nodes
            .iter()
            .enumerate()
            .map(|(j, &y)| {
                let e1 = (sol.phi[j] - monomial_exp::<1>(3, 1.0, y)[0]).norm();
                let e2 = (sol.psi[j] - monomial_exp::<1>(1, 1.0, y)[0]).norm();
                e1.max(e2)
            })
            .fold(0.0, f64::max)
    }

    #[test]
    fn manufactured_solution_second_order() {
        let (p, prof) = setup();
        for kind in [OsKind::D, OsKind::S, OsKind::Full] {
            let coarse = DiscreteBVP::with_y_max(&p, 1000, 40.0).unwrap();
            let e1 = manufactured_error(kind, &p, &prof, &coarse);
            let e2 = manufactured_error(kind, &p, &prof, &coarse.refined());
            let e3 = manufactured_error(kind, &p, &prof, &coarse.refined().refined());
            assert!(e1 / e2 > 3.5 && e2 / e3 > 3.5, "{kind:?}: {e1:e} {e2:e} {e3:e}");
        }
    }

    proptest::proptest! {
        #![proptest_config(proptest::prelude::ProptestConfig::with_cases(16))]

        #[test]
        fn decompositions_agree(a in 1.5f64..4.0, le in 8.0f64..12.0, k1 in 0.3f64..2.0, k2 in 0.3f64..2.0, s in -1.0f64..1.0) {
            let p = SpectralParams::eighth(10f64.powf(-le), a).unwrap();
            let prof = HartmannProfile::default();
            let bvp = DiscreteBVP::for_params(&p, 300).unwrap();
            let co = Coeffs::new(&prof, &bvp.grid);
            let nodes = bvp.grid.nodes();
            let sol = OsSolution {
                phi: nodes.iter().map(|&y| C::new(y * (-k1 * y).exp(), s * y * y * (-y).exp())).collect(),
                omega: nodes.iter().map(|&y| C::new((-2.0 * y).exp(), s * y)).collect(),
                psi: nodes.iter().map(|&y| C::new(0.0, y * (-k2 * y).exp())).collect(),
            };
            let (full, _) = apply_os(OsKind::Full, &p, &prof, &bvp, &sol);
            let (d, _) = apply_os(OsKind::D, &p, &prof, &bvp, &sol);
            let (sv, _) = apply_os(OsKind::S, &p, &prof, &bvp, &sol);
            let ld = apply_l_d(&co, &p, &bvp.grid, &sol);
            let ls = apply_l_s_neg(&co, &bvp.grid, &sol.phi);
            for j in 1..nodes.len() - 1 {
                proptest::prop_assert!((full[j] - d[j] - ld[j]).norm() < 1e-9 * (1.0 + full[j].norm()));
                proptest::prop_assert!((full[j] - sv[j] + ls[j]).norm() < 1e-9 * (1.0 + full[j].norm()));
            }
        }
    }

    #[test]
    fn iteration_matches_direct_solve() {
        let (p, prof) = setup();
        let bvp = DiscreteBVP::for_params(&p, 1500).unwrap();
        let nodes = bvp.grid.nodes();
        let f1: Vec<C> = nodes.iter().map(|&y| C::new((-y).exp() * y, 0.0)).collect();
        let f2: Vec<C> = nodes.iter().map(|&y| C::new(0.0, (-y).exp())).collect();
        let (it, trace) = os_iterate(&f1, &f2, &p, &prof, &bvp, SourceForm::Plain, 1e-12, 60).unwrap();
        let direct = os_solve_direct(&f1, &f2, &p, &prof, &bvp).unwrap();
        let scale = direct.phi.iter().map(|v| v.norm()).fold(0.0, f64::max);
        for j in 0..nodes.len() {
            assert!((it.phi[j] - direct.phi[j]).norm() < 1e-8 * scale);
        }
        assert!(trace.ratios.iter().all(|r| *r < 1.0), "{:?}", trace.ratios);
    }

    #[test]
    fn divergence_pre_step_matches_direct_solve() {
        let (p, prof) = setup();
        let bvp = DiscreteBVP::for_params(&p, 1500).unwrap();
        let nodes = bvp.grid.nodes();
        let g1: Vec<C> = nodes.iter().map(|&y| C::new((-0.2 * y).exp() * y, 0.0)).collect();
        let z = vec![zero(); nodes.len()];
        let (it, _) = os_iterate(&g1, &z, &p, &prof, &bvp, SourceForm::Derivative, 1e-12, 60).unwrap();
        let f1 = bvp.grid.derivative(&g1);
        let direct = os_solve_direct(&f1, &z, &p, &prof, &bvp).unwrap();
        let scale = direct.phi.iter().map(|v| v.norm()).fold(0.0, f64::max);
        for j in 0..nodes.len() {
            assert!((it.phi[j] - direct.phi[j]).norm() < 1e-8 * scale);
        }
    }
}
