//! Airy tables and normal-mode field export.

use std::f64::consts::PI;
use std::io::Write;
use std::sync::Arc;

use anyhow::{bail, Result};
use hartmann_ts::airy::{ai_k_value, SECTOR_MAX};
use hartmann_ts::osresolvent::{approx_mode, os_solve_direct};
use hartmann_ts::{Complex64 as C, HartmannProfile, Profile, SpectralParams};
use serde::Serialize;

use crate::sweep::{bvp_for, fmt_f64};
use crate::config::RunConfig;

#[derive(Debug, Clone, Serialize)]
pub struct AiryRow {
    pub k: u32,
    pub re_z: f64,
    pub im_z: f64,
    pub re_ai: f64,
    pub im_ai: f64,
    pub branch: String,
}

/// `Ai(k, z)`, k = 0..3, at the origin and on `rings × rays` points of the
/// sector `|arg z| ≤ 11π/12`, `|z| ≤ radius`.
pub fn airy_table(radius: f64, rings: usize, rays: usize) -> Result<Vec<AiryRow>> {
    if !(radius > 0.0) || rings == 0 || rays < 2 {
        bail!("airy-table needs radius > 0, rings >= 1, rays >= 2");
    }
    let mut pts = vec![C::new(0.0, 0.0)];
    for i in 1..=rings {
        let r = radius * i as f64 / rings as f64;
        for j in 0..rays {
            let th = -SECTOR_MAX + 2.0 * SECTOR_MAX * j as f64 / (rays - 1) as f64;
            pts.push(C::from_polar(r, th));
        }
    }
    let mut rows = Vec::with_capacity(4 * pts.len());
    for z in pts {
        for k in 0..=3 {
            let v = ai_k_value(k, z)?;
            rows.push(AiryRow {
                k,
                re_z: z.re,
                im_z: z.im,
                re_ai: v.value.re,
                im_ai: v.value.im,
                branch: v.branch.to_string(),
            });
        }
    }
    Ok(rows)
}

pub fn write_airy_csv(out: &mut dyn Write, rows: &[AiryRow]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["k", "re_z", "im_z", "re_ai", "im_ai", "branch"])?;
    for r in rows {
        w.write_record([
            r.k.to_string(),
            fmt_f64(r.re_z),
            fmt_f64(r.im_z),
            fmt_f64(r.re_ai),
            fmt_f64(r.im_ai),
            r.branch.clone(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// `Φ, ∂Φ, Ψ, ∂Ψ` on the solver grid.
pub struct ModeProfile {
    pub grid: Arc<hartmann_ts::numerics::GradedGrid>,
    pub phi: Vec<C>,
    pub dphi: Vec<C>,
    pub psi: Vec<C>,
    pub dpsi: Vec<C>,
}

impl ModeProfile {
    fn at(&self, y: f64) -> [C; 4] {
        let g = &self.grid;
        [
            g.interp_cubic(&self.phi, y),
            g.interp_cubic(&self.dphi, y),
            g.interp_cubic(&self.psi, y),
            g.interp_cubic(&self.dpsi, y),
        ]
    }
}

/// The approximate mode at `p.c`, corrected by the discrete remainder when
/// `full` is set.
pub fn mode_profile(cfg: &RunConfig, p: &SpectralParams, full: bool) -> Result<ModeProfile> {
    let profile: Arc<dyn Profile> = Arc::new(HartmannProfile::default());
    let bvp = bvp_for(cfg, p)?;
    let am = approx_mode(p, profile.clone(), bvp.grid.clone())?;
    let mut phi = am.phi[0].clone();
    let mut dphi = am.phi[1].clone();
    let mut psi = am.psi[0].clone();
    let mut dpsi = am.psi[1].clone();
    if full {
        let r = os_solve_direct(&am.f1, &am.f2, p, profile.as_ref(), &bvp)?;
        let dr = bvp.grid.derivative(&r.phi);
        let dq = bvp.grid.derivative(&r.psi);
        for j in 0..phi.len() {
            phi[j] -= r.phi[j];
            dphi[j] -= dr[j];
            psi[j] -= r.psi[j];
            dpsi[j] -= dq[j];
        }
    }
    Ok(ModeProfile { grid: bvp.grid, phi, dphi, psi, dpsi })
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct FieldSample {
    pub t: f64,
    pub x: f64,
    pub y: f64,
    pub u: f64,
    pub v: f64,
    pub b1: f64,
    pub b2: f64,
    pub energy: f64,
}

/// Real fields `(u, v, b₁, b₂) = Re e^{iα(X − cτ)}(∂Φ, −iαΦ, ∂Ψ, −iαΨ)` in the
/// original variables `x = √ε X`, `y = √ε Y`, `t = √ε τ`, on one wavelength in
/// `x` (`nx` points, endpoint excluded) and `ny` points of `Y ∈ [0, y_extent]`.
/// Fields are scaled so that the lattice-mean energy is one at the first time.
pub fn sample_fields(
    mode: &ModeProfile,
    p: &SpectralParams,
    t_list: &[f64],
    nx: usize,
    ny: usize,
    y_extent: f64,
) -> Result<Vec<FieldSample>> {
    if t_list.is_empty() || nx < 3 || ny < 2 || !(y_extent > 0.0) {
        bail!("export needs a time list, nx >= 3, ny >= 2 and a positive y extent");
    }
    if y_extent > mode.grid.y_max() {
        bail!("y extent {y_extent} beyond the solver grid ({})", mode.grid.y_max());
    }
    let (a, c, se) = (p.alpha, p.c, p.eps.sqrt());
    let i = C::i();
    let big_y: Vec<f64> = (0..ny).map(|k| y_extent * k as f64 / (ny - 1) as f64).collect();
    let prof: Vec<[C; 4]> = big_y.iter().map(|&y| mode.at(y)).collect();
    let mut out = Vec::with_capacity(t_list.len() * nx * ny);
    let mut e0 = None;
    for &t in t_list {
        let tau = t / se;
        let mut block = Vec::with_capacity(nx * ny);
        let mut energy = 0.0;
        for ix in 0..nx {
            let big_x = 2.0 * PI / a * ix as f64 / nx as f64;
            let phase = (i * a * (big_x - c * tau)).exp();
            for (k, &yy) in big_y.iter().enumerate() {
                let [f, df, g, dg] = prof[k];
                let s = FieldSample {
                    t,
                    x: se * big_x,
                    y: se * yy,
                    u: (phase * df).re,
                    v: (phase * (-i * a * f)).re,
                    b1: (phase * dg).re,
                    b2: (phase * (-i * a * g)).re,
                    energy: 0.0,
                };
                energy += s.u * s.u + s.v * s.v + s.b1 * s.b1 + s.b2 * s.b2;
                block.push(s);
            }
        }
        energy /= (nx * ny) as f64;
        let norm = *e0.get_or_insert(energy);
        let scale = norm.sqrt().recip();
        for s in &mut block {
            s.u *= scale;
            s.v *= scale;
            s.b1 *= scale;
            s.b2 *= scale;
            s.energy = energy / norm;
        }
        out.extend(block);
    }
    Ok(out)
}

pub fn write_fields_csv(out: &mut dyn Write, rows: &[FieldSample]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["t", "x", "y", "u", "v", "b1", "b2", "energy"])?;
    for r in rows {
        w.write_record([r.t, r.x, r.y, r.u, r.v, r.b1, r.b2, r.energy].map(fmt_f64))?;
    }
    w.flush()?;
    Ok(())
}
