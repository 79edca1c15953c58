//! Dispersion functions, their affine reference maps, and root certification
//! on the disks `D_*` (eighth regime) and `D_**` (β regime).

use std::f64::consts::FRAC_PI_4;
use std::sync::Arc;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::fastmode::{AiryFastMode, ExpFastMode, Truncation};
use crate::numerics::{newton_root, scan_contour, Circle, GradedGrid, RootTrace};
use crate::params::{Regime, SpectralParams};
use crate::profile::{HartmannProfile, Profile};
use crate::slowmode::SlowMode;

type C = Complex64;

/// Initial number of boundary samples for the winding count.
pub const BOUNDARY_SAMPLES: usize = 64;

/// Default `D_**` radius factor; must lie in `(0, √2/2)`.
pub const R3_DEFAULT: f64 = 0.5;

/// `Γ₀(c) = ∂_YΦ_app^s(0) − δ^{−1}Φ_app^s(0) Ai(1, z₀)/Ai(2, z₀)`.
pub fn gamma0(c: C, params: &SpectralParams) -> Result<C> {
    gamma0_with(c, params, Arc::new(HartmannProfile::default()))
}

pub fn gamma0_with(c: C, params: &SpectralParams, profile: Arc<dyn Profile>) -> Result<C> {
    params.require_regime(Regime::Eighth)?;
    let p = params.with_c(c);
    let slow = SlowMode::new(p, profile)?;
    let fast = AiryFastMode::new(p)?;
    Ok(slow.wall_slope() - slow.wall_value() * fast.wall_slope())
}

/// Grid for the β-regime hierarchy: fine enough at the wall for the
/// `|ϖ|^{−1}` sub-layer.
pub fn beta_grid(params: &SpectralParams) -> Result<Arc<GradedGrid>> {
    let varpi = (C::new(0.0, -params.n) * params.c).sqrt();
    let h0 = (0.02 / varpi.norm()).min(1e-3);
    Ok(Arc::new(GradedGrid::new(30.0, 3000, h0)?))
}

/// Retained hierarchy length by optimal truncation at the disk centre.
pub fn beta_truncation(params: &SpectralParams, profile: &dyn Profile, max_terms: usize) -> Result<usize> {
    let p = params.with_c(params.disk_center());
    let m = ExpFastMode::new(p, profile, beta_grid(&p)?, Truncation::Optimal { max: max_terms })?;
    Ok(m.kept())
}

/// `Γ̃₀(c) = ∂_YΦ_app^s(0) − Φ_app^s(0)(−ϖ + Σ_{k ≤ N} ∂_YΦ_k(0))`.
pub fn gamma0_beta(c: C, params: &SpectralParams, n_terms: usize) -> Result<C> {
    gamma0_beta_with(c, params, n_terms, Arc::new(HartmannProfile::default()))
}

pub fn gamma0_beta_with(c: C, params: &SpectralParams, n_terms: usize, profile: Arc<dyn Profile>) -> Result<C> {
    params.require_regime(Regime::Beta)?;
    let p = params.with_c(c);
    let grid = beta_grid(&p)?;
    let fast = ExpFastMode::new(p, profile.as_ref(), grid, Truncation::Fixed(n_terms))?;
    let slow = SlowMode::new(p, profile)?;
    Ok(slow.wall_slope() - slow.wall_value() * fast.wall_slope())
}

/// `Γ̂_ref(h) = 1 + e^{−iπ/4}A(A − h)`, zero at `h_* = A + A^{−1}e^{iπ/4}`.
pub fn gamma_ref_eighth(h: C, a: f64) -> C {
    1.0 + C::from_polar(a, -FRAC_PI_4) * (a - h)
}

/// `Γ̃_ref(c) = 1 + α^{−(1+ν₀)}e^{−iπ/4}(α − c)`, zero at `c_**`.
pub fn gamma_ref_beta(c: C, params: &SpectralParams) -> C {
    1.0 + C::from_polar(1.0 / params.beta_scale(), -FRAC_PI_4) * (params.alpha - c)
}

/// `D_*` in the variable `c`: `|ĉ − h_*ε^{1/8}| ≤ A^{−1−θ}ε^{1/8}`.
pub fn disk_star(params: &SpectralParams) -> Result<Circle> {
    params.require_regime(Regime::Eighth)?;
    let r = params.amplitude.powf(-1.0 - params.theta) * params.scale();
    Circle::new(params.disk_center(), r)
}

/// `D_**`: `|c − c_**| ≤ r₃ α^{1+ν₀}`.
pub fn disk_beta(params: &SpectralParams, r3: f64) -> Result<Circle> {
    params.require_regime(Regime::Beta)?;
    if !(r3 > 0.0 && r3 < std::f64::consts::FRAC_1_SQRT_2) {
        return Err(Error::InvalidParameter(format!("r3 {r3} outside (0, sqrt(2)/2)")));
    }
    Circle::new(params.disk_center(), r3 * params.beta_scale())
}

#[derive(Debug, Clone, Serialize)]
pub struct DispersionReport {
    pub c_root: C,
    pub winding: i64,
    pub boundary_min_abs: f64,
    /// `max |g − g_ref|` over the boundary samples, when a reference is given.
    pub reference_gap_max: Option<f64>,
    /// `min |g_ref|` over the same samples.
    pub reference_min_abs: Option<f64>,
    pub newton: RootTrace,
    pub disk: Circle,
    pub boundary_samples: usize,
}

impl DispersionReport {
    /// The strict Rouché inequality `max |g − g_ref| < min |g_ref|`.
    pub fn rouche_certified(&self) -> Option<bool> {
        Some(self.reference_gap_max? < self.reference_min_abs?)
    }
}

/// Boundary scan of `g` with winding count and, optionally, the gap against
/// a reference map; no Newton step.
pub fn scan_boundary<G>(g: G, disk: &Circle, reference: Option<&(dyn Fn(C) -> C + Sync)>) -> Result<BoundaryScan>
where
    G: Fn(C) -> Result<C> + Sync,
{
    let scan = scan_contour(&g, disk, BOUNDARY_SAMPLES)?;
    let (gap, rmin) = match reference {
        Some(r) => {
            let mut gap = 0.0f64;
            let mut rmin = f64::INFINITY;
            for (t, v) in scan.thetas.iter().zip(&scan.values) {
                let rv = r(disk.point(*t));
                gap = gap.max((v - rv).norm());
                rmin = rmin.min(rv.norm());
            }
            (Some(gap), Some(rmin))
        }
        None => (None, None),
    };
    Ok(BoundaryScan {
        winding: scan.winding,
        min_abs: scan.min_abs,
        samples: scan.values.len(),
        reference_gap_max: gap,
        reference_min_abs: rmin,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct BoundaryScan {
    pub winding: i64,
    pub min_abs: f64,
    pub samples: usize,
    pub reference_gap_max: Option<f64>,
    pub reference_min_abs: Option<f64>,
}

/// Winding count on `disk`, then Newton from the centre when it is one.
pub fn find_root_certified<G>(
    g: G,
    disk: &Circle,
    tol: f64,
    reference: Option<&(dyn Fn(C) -> C + Sync)>,
) -> Result<DispersionReport>
where
    G: Fn(C) -> Result<C> + Sync,
{
    let scan = scan_boundary(&g, disk, reference)?;
    if scan.winding != 1 {
        return Err(Error::WindingNotOne { winding: scan.winding, boundary_min_abs: scan.min_abs });
    }
    let (c_root, newton) = newton_root(&g, disk.center, tol, 50)?;
    if !disk.contains(c_root) {
        return Err(Error::NonConvergence {
            context: "certified root",
            detail: format!("Newton left the disk: {c_root}"),
        });
    }
    Ok(DispersionReport {
        c_root,
        winding: scan.winding,
        boundary_min_abs: scan.min_abs,
        reference_gap_max: scan.reference_gap_max,
        reference_min_abs: scan.reference_min_abs,
        newton,
        disk: *disk,
        boundary_samples: scan.samples,
    })
}

/// Certifies the zero of `Γ₀` on `D_*` against `Γ̂_ref`.
pub fn certify_eighth(params: &SpectralParams, tol: f64) -> Result<DispersionReport> {
    let disk = disk_star(params)?;
    let (a, s, n) = (params.amplitude, params.scale(), params.n);
    let reference = move |c: C| gamma_ref_eighth((c + C::new(0.0, 1.0 / n)) / s, a);
    find_root_certified(|c| gamma0(c, params), &disk, tol, Some(&reference))
}

/// Certifies the zero of `Γ̃₀` on `D_**` against `Γ̃_ref`, with the hierarchy
/// truncated once at `c_**`. Returns the report and the retained length.
pub fn certify_beta(params: &SpectralParams, r3: f64, max_terms: usize, tol: f64) -> Result<(DispersionReport, usize)> {
    let disk = disk_beta(params, r3)?;
    let n_eff = beta_truncation(params, &HartmannProfile::default(), max_terms)?;
    let p = *params;
    let reference = move |c: C| gamma_ref_beta(c, &p);
    let rep = find_root_certified(|c| gamma0_beta(c, params, n_eff), &disk, tol, Some(&reference))?;
    Ok((rep, n_eff))
}

/// `|c/ε^{1/8} − h_*|`, the distance from the leading-order eigenvalue.
pub fn leading_order_distance(c: C, params: &SpectralParams) -> f64 {
    (c / params.scale() - params.h_star()).norm()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reference_maps_vanish_at_centres() {
        let p = SpectralParams::eighth(1e-10, 2.0).unwrap();
        assert!(gamma_ref_eighth(p.h_star(), 2.0).norm() < 1e-15);
        let b = SpectralParams::beta_regime(1e-10, 1.0, 0.115).unwrap();
        assert!(gamma_ref_beta(b.disk_center(), &b).norm() < 1e-12);
    }

    #[test]
    fn reference_modulus_on_boundaries() {
        let a = 2.0;
        let p = SpectralParams::eighth(1e-10, a).unwrap();
        let r = a.powf(-1.5);
        for k in 0..16 {
            let h = p.h_star() + C::from_polar(r, k as f64 * 0.4);
            assert!((gamma_ref_eighth(h, a).norm() - a.powf(-0.5)).abs() < 1e-13);
        }
        let b = SpectralParams::beta_regime(1e-12, 1.0, 0.115).unwrap();
        let d = disk_beta(&b, R3_DEFAULT).unwrap();
        for k in 0..16 {
            let v = gamma_ref_beta(d.point(k as f64 * 0.4), &b).norm();
            assert!((v - R3_DEFAULT).abs() < 1e-10, "{v}");
        }
    }

    #[test]
    fn affine_reference_is_certified() {
        let a = 4.0;
        let p = SpectralParams::eighth(1e-10, a).unwrap();
        let disk = Circle::new(p.h_star(), a.powf(-1.5)).unwrap();
        let rep = find_root_certified(|h| Ok(gamma_ref_eighth(h, a)), &disk, 1e-14, None).unwrap();
        assert_eq!(rep.winding, 1);
        assert!((rep.c_root - p.h_star()).norm() < 1e-12);
    }

    #[test]
    fn shifted_disk_has_no_zero() {
        let a = 4.0;
        let p = SpectralParams::eighth(1e-10, a).unwrap();
        let disk = Circle::new(p.h_star() + 1.0, a.powf(-1.5)).unwrap();
        let err = find_root_certified(|h| Ok(gamma_ref_eighth(h, a)), &disk, 1e-14, None).unwrap_err();
        assert!(matches!(err, Error::WindingNotOne { winding: 0, .. }));
    }

    #[test]
    fn gamma0_is_finite_across_disk() {
        let p = SpectralParams::eighth(1e-10, 2.0).unwrap();
        let d = disk_star(&p).unwrap();
        for k in 0..8 {
            let v = gamma0(d.point(k as f64 * 0.785), &p).unwrap();
            assert!(v.is_finite() && v.norm() < 10.0);
        }
    }

    #[test]
    fn regime_checks() {
        let b = SpectralParams::beta_regime(1e-10, 1.0, 0.115).unwrap();
        assert!(gamma0(b.c, &b).is_err());
        assert!(disk_beta(&b, 0.8).is_err());
    }
}
