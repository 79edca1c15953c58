//! Background shear and magnetic profiles and the structural conditions
//! (monotone envelope, strong concavity) the construction relies on.

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};

/// A background pair `(U_s, H_s)` in the boundary-layer variable `Y`.
///
/// Implementations must satisfy `U_s(0) = 0`, `U_s'(0) = 1` and
/// `U_s → 1`, `H_s → h_inf` as `Y → ∞`.
pub trait Profile: Send + Sync + std::fmt::Debug {
    /// `[U, U', U'', U''']` at `y`.
    fn u_derivs(&self, y: f64) -> [f64; 4];
    /// `[H, H', H'']` at `y`.
    fn h_derivs(&self, y: f64) -> [f64; 3];
    fn h_inf(&self) -> f64;
    fn u_inf(&self) -> f64 {
        1.0
    }

    fn u(&self, y: f64) -> f64 {
        self.u_derivs(y)[0]
    }
    fn du(&self, y: f64) -> f64 {
        self.u_derivs(y)[1]
    }
    fn d2u(&self, y: f64) -> f64 {
        self.u_derivs(y)[2]
    }
    fn h(&self, y: f64) -> f64 {
        self.h_derivs(y)[0]
    }
    /// `u_inf − U_s(y)` without cancellation where the profile allows it.
    fn deficit(&self, y: f64) -> f64 {
        self.u_inf() - self.u(y)
    }

    /// Critical point `X*` with `U_s(X*) = ĉ` continued into the complex
    /// plane, and `U_s''/U_s'^3` there. Needed only to continue the slow
    /// mode below `Im ĉ = 0`; `None` if the profile cannot provide it.
    fn critical_point(&self, _c_hat: Complex64) -> Option<(Complex64, Complex64)> {
        None
    }
}

/// The exponential Prandtl-Hartmann layer `U_s = 1 − e^{−Y}`, `H_s = h_inf − e^{−Y}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HartmannProfile {
    pub h_inf: f64,
}

impl Default for HartmannProfile {
    fn default() -> Self {
        Self { h_inf: 1.0 }
    }
}

impl HartmannProfile {
    pub fn new(h_inf: f64) -> Self {
        Self { h_inf }
    }
}

impl Profile for HartmannProfile {
    fn u_derivs(&self, y: f64) -> [f64; 4] {
        let e = (-y).exp();
        [-(-y).exp_m1(), e, -e, e]
    }

    fn h_derivs(&self, y: f64) -> [f64; 3] {
        let e = (-y).exp();
        [self.h_inf - e, e, -e]
    }

    fn h_inf(&self) -> f64 {
        self.h_inf
    }

    fn deficit(&self, y: f64) -> f64 {
        (-y).exp()
    }

    fn critical_point(&self, c_hat: Complex64) -> Option<(Complex64, Complex64)> {
        let one_minus = 1.0 - c_hat;
        Some((-one_minus.ln(), -1.0 / (one_minus * one_minus)))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Field {
    U,
    H,
}

/// `∂_Y^order` of `U_s` (order ≤ 3) or `H_s` (order ≤ 2) at `y ≥ 0`.
pub fn eval_profile(p: &dyn Profile, which: Field, order: usize, y: f64) -> Result<f64> {
    if !(y >= 0.0) {
        return Err(Error::InvalidParameter(format!("profile evaluated at Y = {y}")));
    }
    match which {
        Field::U if order <= 3 => Ok(p.u_derivs(y)[order]),
        Field::H if order <= 2 => Ok(p.h_derivs(y)[order]),
        Field::U => Err(Error::UnsupportedOrder { what: "U_s derivative", order }),
        Field::H => Err(Error::UnsupportedOrder { what: "H_s derivative", order }),
    }
}

/// Constants of the envelope `s1 e^{−s0 Y} ≤ U_s' ≤ s2 e^{−s0 Y}` and the
/// concavity bound `−σ0 U_s'' ≥ (U_s')²`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StructureConstants {
    pub s0: f64,
    pub s1: f64,
    pub s2: f64,
    pub sigma0: f64,
}

impl StructureConstants {
    pub fn new(s0: f64, s1: f64, s2: f64, sigma0: f64) -> Result<Self> {
        let all_pos = [s0, s1, s2, sigma0].iter().all(|v| *v > 0.0 && v.is_finite());
        if !all_pos || s1 > s2 {
            return Err(Error::InvalidParameter(format!(
                "structure constants need 0 < s1 <= s2 and s0, sigma0 > 0 (got {s0}, {s1}, {s2}, {sigma0})"
            )));
        }
        Ok(Self { s0, s1, s2, sigma0 })
    }
}

impl Default for StructureConstants {
    fn default() -> Self {
        Self { s0: 1.0, s1: 1.0, s2: 1.0, sigma0: 1.0 }
    }
}

/// Worst margins found by [`check_structure`]; every margin is ≥ 0 on success.
#[derive(Debug, Clone, Serialize)]
pub struct StructureReport {
    pub lower_envelope: f64,
    pub upper_envelope: f64,
    pub concavity: f64,
    /// `σ0 − sup` for each of the five ratios
    /// `U'''/U''`, `U''/U'`, `H''/U'`, `H'/U'`, `(1−U)/U'`.
    pub ratio_margins: [f64; 5],
    /// Supremum of the sum of the five ratios.
    pub ratio_sum_sup: f64,
}

/// Checks the structural conditions on `n` uniform points of `[0, y_max]`.
///
/// Margins are relative to the size of the compared quantities so that
/// exact equalities (the Hartmann envelope) do not trip on rounding.
pub fn check_structure(
    p: &dyn Profile,
    consts: &StructureConstants,
    y_max: f64,
    n: usize,
) -> Result<StructureReport> {
    if n < 100 {
        return Err(Error::InvalidParameter(format!("check_structure needs N >= 100, got {n}")));
    }
    if !(y_max > 0.0) {
        return Err(Error::InvalidParameter(format!("y_max must be positive, got {y_max}")));
    }
    let slack = 1e-12;
    let mut rep = StructureReport {
        lower_envelope: f64::INFINITY,
        upper_envelope: f64::INFINITY,
        concavity: f64::INFINITY,
        ratio_margins: [f64::INFINITY; 5],
        ratio_sum_sup: 0.0,
    };
    for j in 0..n {
        let y = y_max * j as f64 / (n - 1) as f64;
        let [_, du, d2u, d3u] = p.u_derivs(y);
        let [_, dh, d2h] = p.h_derivs(y);
        let env = (-consts.s0 * y).exp();

        let lower = (du - consts.s1 * env) / env;
        let upper = (consts.s2 * env - du) / env;
        let conc = (-consts.sigma0 * d2u - du * du) / (du * du).max(f64::MIN_POSITIVE);
        let ratios = [
            (d3u / d2u).abs(),
            (d2u / du).abs(),
            (d2h / du).abs(),
            (dh / du).abs(),
            (p.deficit(y) / du).abs(),
        ];
        let checks = [
            ("s1 e^{-s0 Y} <= U'", lower),
            ("U' <= s2 e^{-s0 Y}", upper),
            ("-sigma0 U'' >= (U')^2", conc),
        ];
        for (name, m) in checks {
            if m < -slack || !m.is_finite() {
                return Err(Error::StructureViolation { condition: name.into(), y, margin: m });
            }
        }
        rep.lower_envelope = rep.lower_envelope.min(lower);
        rep.upper_envelope = rep.upper_envelope.min(upper);
        rep.concavity = rep.concavity.min(conc);
        for (k, r) in ratios.iter().enumerate() {
            let m = consts.sigma0 - r;
            if m < -slack * consts.sigma0 || !m.is_finite() {
                let names = ["|U'''/U''|", "|U''/U'|", "|H''/U'|", "|H'/U'|", "|(1-U)/U'|"];
                return Err(Error::StructureViolation {
                    condition: format!("{} <= sigma0", names[k]),
                    y,
                    margin: m,
                });
            }
            rep.ratio_margins[k] = rep.ratio_margins[k].min(m);
        }
        rep.ratio_sum_sup = rep.ratio_sum_sup.max(ratios.iter().sum());
    }
    Ok(rep)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn wall_values() {
        let p = HartmannProfile::default();
        assert_eq!(eval_profile(&p, Field::U, 0, 0.0).unwrap(), 0.0);
        assert_eq!(eval_profile(&p, Field::U, 1, 0.0).unwrap(), 1.0);
        let v = eval_profile(&p, Field::U, 2, 2f64.ln()).unwrap();
        assert!((v + 0.5).abs() < 1e-15);
    }

    #[test]
    fn far_field_limits() {
        let p = HartmannProfile::new(1.7);
        assert!((p.u(40.0) - 1.0).abs() < 1e-15);
        assert!((p.h(40.0) - 1.7).abs() < 1e-15);
    }

    #[test]
    fn unsupported_orders() {
        let p = HartmannProfile::default();
        assert!(matches!(
            eval_profile(&p, Field::U, 4, 1.0),
            Err(Error::UnsupportedOrder { .. })
        ));
        assert!(eval_profile(&p, Field::H, 3, 1.0).is_err());
    }

    #[test]
    fn hartmann_structure_holds_with_unit_constants() {
        let p = HartmannProfile::default();
        let rep = check_structure(&p, &StructureConstants::default(), 40.0, 400).unwrap();
        assert!(rep.lower_envelope.abs() < 1e-12 && rep.upper_envelope.abs() < 1e-12);
        assert!(rep.concavity >= 0.0);
        assert!((rep.ratio_sum_sup - 5.0).abs() < 1e-9);
    }

    #[test]
    fn tight_envelope_is_reported() {
        let p = HartmannProfile::default();
        let consts = StructureConstants::new(1.0, 1.0, 1.0, 0.5).unwrap();
        let err = check_structure(&p, &consts, 10.0, 100).unwrap_err();
        assert!(matches!(err, Error::StructureViolation { .. }));
        let consts = StructureConstants::new(0.5, 1.0, 1.0, 1.0).unwrap();
        assert!(check_structure(&p, &consts, 10.0, 100).is_err());
    }
}
