//! The spectral parameter tuple `(ε, A or M, β, α, n, c, ĉ, θ, ν₀)`.

use std::f64::consts::FRAC_PI_4;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};

/// Lower end (exclusive) of the admissible β range.
pub const BETA_MIN: f64 = 3.0 / 28.0;
pub const BETA_EIGHTH: f64 = 0.125;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Regime {
    /// `α = A ε^{1/8}`, Airy fast mode.
    Eighth,
    /// `α = M ε^β`, `β ∈ (3/28, 1/8)`, exponential fast-mode hierarchy.
    Beta,
}

/// Parameters of one Orr-Sommerfeld evaluation.
///
/// `alpha`, `n`, `c_hat` and `nu0` are derived and kept consistent by the
/// constructors. `c` is not required to lie in the upper half plane: the
/// certification circles may dip below it, where every function is the
/// analytic continuation from `Im ĉ > 0`. [`SpectralParams::check_unstable`]
/// tests the physical condition.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SpectralParams {
    pub eps: f64,
    pub amplitude: f64,
    pub beta: f64,
    pub alpha: f64,
    pub n: f64,
    pub c: Complex64,
    pub c_hat: Complex64,
    pub theta: f64,
    pub nu0: f64,
}

impl SpectralParams {
    /// `α = A ε^{1/8}`, wave speed at the centre of the certification disk.
    pub fn eighth(eps: f64, a: f64) -> Result<Self> {
        let p = Self::build(eps, a, BETA_EIGHTH, Complex64::new(0.0, 0.0))?;
        Ok(p.with_c(p.disk_center()))
    }

    /// `α = M ε^β` with `β ∈ (3/28, 1/8)`, wave speed at `c_**`.
    pub fn beta_regime(eps: f64, m: f64, beta: f64) -> Result<Self> {
        if !(beta > BETA_MIN && beta < BETA_EIGHTH) {
            return Err(Error::InvalidParameter(format!(
                "beta {beta} outside (3/28, 1/8); use the eighth regime for beta = 1/8"
            )));
        }
        let p = Self::build(eps, m, beta, Complex64::new(0.0, 0.0))?;
        Ok(p.with_c(p.disk_center()))
    }

    /// Either regime, dispatching on `beta`.
    pub fn new(eps: f64, amplitude: f64, beta: f64) -> Result<Self> {
        if beta == BETA_EIGHTH {
            Self::eighth(eps, amplitude)
        } else {
            Self::beta_regime(eps, amplitude, beta)
        }
    }

    fn build(eps: f64, amplitude: f64, beta: f64, c: Complex64) -> Result<Self> {
        if !(eps > 0.0 && eps < 1.0) {
            return Err(Error::InvalidParameter(format!("eps {eps} outside (0, 1)")));
        }
        if !(amplitude > 0.0 && amplitude.is_finite()) {
            return Err(Error::InvalidParameter(format!("amplitude {amplitude} must be positive")));
        }
        let alpha = amplitude * eps.powf(beta);
        let n = alpha / eps.sqrt();
        let nu0 = (1.0 - 8.0 * beta) / (4.0 * beta);
        Ok(Self {
            eps,
            amplitude,
            beta,
            alpha,
            n,
            c,
            c_hat: c + Complex64::new(0.0, 1.0 / n),
            theta: 0.5,
            nu0,
        })
    }

    pub fn regime(&self) -> Regime {
        if self.beta == BETA_EIGHTH {
            Regime::Eighth
        } else {
            Regime::Beta
        }
    }

    pub fn with_c(mut self, c: Complex64) -> Self {
        self.c = c;
        self.c_hat = c + Complex64::new(0.0, 1.0 / self.n);
        self
    }

    pub fn with_c_hat(self, c_hat: Complex64) -> Self {
        self.with_c(c_hat - Complex64::new(0.0, 1.0 / self.n))
    }

    pub fn with_theta(mut self, theta: f64) -> Result<Self> {
        if !(theta > 0.0 && theta < 1.0) {
            return Err(Error::InvalidParameter(format!("theta {theta} outside (0, 1)")));
        }
        self.theta = theta;
        Ok(self)
    }

    /// `ε^{1/8}`, the natural scale of `c` in the eighth regime.
    pub fn scale(&self) -> f64 {
        self.eps.powf(0.125)
    }

    /// `h_* = A + A^{−1} e^{iπ/4}`.
    pub fn h_star(&self) -> Complex64 {
        self.amplitude + Complex64::from_polar(1.0 / self.amplitude, FRAC_PI_4)
    }

    /// `α^{1+ν₀}`, the radius scale of the β-regime disk.
    pub fn beta_scale(&self) -> f64 {
        self.alpha.powf(1.0 + self.nu0)
    }

    /// `c` at the centre of the certification disk: `ĉ = h_* ε^{1/8}` in the
    /// eighth regime, `c_** = α + α^{1+ν₀} e^{iπ/4}` in the β regime.
    pub fn disk_center(&self) -> Complex64 {
        match self.regime() {
            Regime::Eighth => self.h_star() * self.scale() - Complex64::new(0.0, 1.0 / self.n),
            Regime::Beta => self.alpha + Complex64::from_polar(self.beta_scale(), FRAC_PI_4),
        }
    }

    /// Fails unless `Im c > 0` (a growing mode).
    pub fn check_unstable(&self) -> Result<()> {
        if self.c.im > 0.0 {
            Ok(())
        } else {
            Err(Error::InvalidParameter(format!("Im c = {} is not positive", self.c.im)))
        }
    }

    pub fn require_regime(&self, want: Regime) -> Result<()> {
        if self.regime() == want {
            Ok(())
        } else {
            Err(Error::RegimeMismatch(format!(
                "operation needs the {want:?} regime, parameters are in {:?} (beta = {})",
                self.regime(),
                self.beta
            )))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn couplings_are_exact() {
        let p = SpectralParams::eighth(1e-8, 2.0).unwrap();
        assert_eq!(p.alpha, 2.0 * 1e-8f64.powf(0.125));
        assert_eq!(p.n, p.alpha / 1e-8f64.sqrt());
        assert_eq!(p.nu0, 0.0);
        assert!((p.c_hat - p.c - Complex64::new(0.0, 1.0 / p.n)).norm() < 1e-18);
        assert!(p.c_hat.im > p.c.im && p.c.im > 0.0);
        assert!((p.c_hat - p.h_star() * p.scale()).norm() < 1e-15);
    }

    #[test]
    fn beta_regime_center() {
        let p = SpectralParams::beta_regime(1e-10, 1.0, 0.115).unwrap();
        assert!((p.nu0 - 0.17391304347826086).abs() < 1e-12);
        assert_eq!(p.regime(), Regime::Beta);
        let expect = p.alpha + Complex64::from_polar(p.alpha.powf(1.0 + p.nu0), FRAC_PI_4);
        assert_eq!(p.c, expect);
    }

    #[test]
    fn rejects_bad_inputs() {
        assert!(SpectralParams::eighth(0.0, 2.0).is_err());
        assert!(SpectralParams::eighth(1e-8, -1.0).is_err());
        assert!(SpectralParams::beta_regime(1e-8, 1.0, 0.1).is_err());
        assert!(SpectralParams::beta_regime(1e-8, 1.0, 0.125).is_err());
        assert!(SpectralParams::eighth(1e-8, 2.0).unwrap().with_theta(1.0).is_err());
    }
}
