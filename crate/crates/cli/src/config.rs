//! Run configuration: defaults, a flat `key = value` file, then flags.

use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use clap::ValueEnum;
use hartmann_ts::params::{BETA_EIGHTH, BETA_MIN};
use hartmann_ts::SpectralParams;
use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum RegimeArg {
    Eighth,
    Beta,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Serialize)]
pub struct RunConfig {
    pub regime: RegimeArg,
    /// `A` of the eighth regime.
    pub a: f64,
    /// `M` of the β regime.
    pub m: f64,
    pub beta: f64,
    pub eps_list: Vec<f64>,
    pub theta: f64,
    pub r3: f64,
    pub y_max: Option<f64>,
    pub grid_n: usize,
    pub newton_tol: f64,
    pub iterate_tol: f64,
    pub max_iter: usize,
    pub max_terms: usize,
    pub full_os: bool,
    pub out: Option<PathBuf>,
    pub format: Format,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            regime: RegimeArg::Eighth,
            a: 2.0,
            m: 1.0,
            beta: BETA_EIGHTH,
            eps_list: vec![1e-8, 1e-10, 1e-12],
            theta: 0.5,
            r3: 0.5,
            y_max: None,
            grid_n: 4000,
            newton_tol: 1e-12,
            iterate_tol: 1e-10,
            max_iter: 60,
            max_terms: 12,
            full_os: false,
            out: None,
            format: Format::Csv,
        }
    }
}

fn parse_f64(key: &str, v: &str) -> Result<f64> {
    v.trim().parse().with_context(|| format!("{key}: not a number: {v:?}"))
}

pub fn parse_eps_list(v: &str) -> Result<Vec<f64>> {
    v.split(',').filter(|s| !s.trim().is_empty()).map(|s| parse_f64("eps_list", s)).collect()
}

fn parse_bool(key: &str, v: &str) -> Result<bool> {
    match v.trim() {
        "true" | "1" | "yes" => Ok(true),
        "false" | "0" | "no" => Ok(false),
        other => bail!("{key}: expected a boolean, got {other:?}"),
    }
}

impl RunConfig {
    /// Sets one `key = value` pair. Keys match the long flag names, with
    /// `-` or `_` accepted.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let v = value.trim();
        match key.trim().replace('-', "_").as_str() {
            "regime" => {
                self.regime = RegimeArg::from_str(v, true).map_err(|e| anyhow!("regime: {e}"))?;
            }
            "A" | "a" => self.a = parse_f64(key, v)?,
            "M" | "m" => self.m = parse_f64(key, v)?,
            "beta" => self.beta = parse_f64(key, v)?,
            "eps" => self.eps_list = vec![parse_f64(key, v)?],
            "eps_list" => self.eps_list = parse_eps_list(v)?,
            "theta" => self.theta = parse_f64(key, v)?,
            "r3" => self.r3 = parse_f64(key, v)?,
            "ymax" | "y_max" => self.y_max = Some(parse_f64(key, v)?),
            "grid_n" => self.grid_n = v.parse().with_context(|| format!("grid_n: {v:?}"))?,
            "newton_tol" => self.newton_tol = parse_f64(key, v)?,
            "iterate_tol" => self.iterate_tol = parse_f64(key, v)?,
            "max_iter" => self.max_iter = v.parse().with_context(|| format!("max_iter: {v:?}"))?,
            "max_terms" => self.max_terms = v.parse().with_context(|| format!("max_terms: {v:?}"))?,
            "full_os" => self.full_os = parse_bool(key, v)?,
            "out" => self.out = Some(PathBuf::from(v)),
            "format" => self.format = Format::from_str(v, true).map_err(|e| anyhow!("format: {e}"))?,
            other => bail!("unknown configuration key {other:?}"),
        }
        Ok(())
    }

    /// Applies a flat `key = value` file; `#` starts a comment.
    pub fn load_file(&mut self, path: &Path) -> Result<()> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| anyhow!("{}:{}: expected key = value", path.display(), lineno + 1))?;
            self.set(k, v).with_context(|| format!("{}:{}", path.display(), lineno + 1))?;
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        if self.eps_list.is_empty() {
            bail!("eps list is empty");
        }
        if self.eps_list.iter().any(|e| !(*e > 0.0 && *e < 1.0)) {
            bail!("every eps must lie in (0, 1)");
        }
        if self.eps_list.windows(2).any(|w| !(w[1] < w[0])) {
            bail!("eps list must be strictly decreasing");
        }
        if !(self.beta > BETA_MIN && self.beta <= BETA_EIGHTH) {
            bail!("beta {} outside (3/28, 1/8]", self.beta);
        }
        match self.regime {
            RegimeArg::Eighth if self.beta != BETA_EIGHTH => bail!("the eighth regime needs beta = 1/8"),
            RegimeArg::Beta if self.beta == BETA_EIGHTH => bail!("beta = 1/8 is the eighth regime"),
            RegimeArg::Beta if self.full_os => bail!("--full-os is available in the eighth regime only"),
            _ => {}
        }
        for (name, v) in [("newton_tol", self.newton_tol), ("iterate_tol", self.iterate_tol)] {
            if !(v > 0.0) {
                bail!("{name} must be positive");
            }
        }
        if !(self.theta > 0.0 && self.theta < 1.0) {
            bail!("theta {} outside (0, 1)", self.theta);
        }
        if !(self.r3 > 0.0) {
            bail!("r3 must be positive");
        }
        if self.grid_n < 100 {
            bail!("grid_n {} too small (>= 100)", self.grid_n);
        }
        if let Some(y) = self.y_max {
            if !(y > 1.0) {
                bail!("ymax must exceed 1");
            }
        }
        Ok(())
    }

    pub fn params(&self, eps: f64) -> hartmann_ts::Result<SpectralParams> {
        let p = match self.regime {
            RegimeArg::Eighth => SpectralParams::eighth(eps, self.a)?,
            RegimeArg::Beta => SpectralParams::beta_regime(eps, self.m, self.beta)?,
        };
        p.with_theta(self.theta)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn file_then_keys() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.conf");
        std::fs::write(&path, "# sweep\nregime = beta\nM = 1.5\nbeta=0.115\neps_list = 1e-10, 1e-12\n").unwrap();
        let mut cfg = RunConfig::default();
        cfg.load_file(&path).unwrap();
        assert_eq!(cfg.regime, RegimeArg::Beta);
        assert_eq!(cfg.eps_list, vec![1e-10, 1e-12]);
        assert_eq!(cfg.m, 1.5);
        cfg.validate().unwrap();
    }

    #[test]
    fn rejects_bad_lists() {
        let mut cfg = RunConfig::default();
        cfg.eps_list.clear();
        assert!(cfg.validate().is_err());
        cfg.eps_list = vec![1e-10, 1e-8];
        assert!(cfg.validate().is_err());
        cfg.eps_list = vec![1e-8];
        cfg.beta = 0.1;
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn unknown_key_is_an_error() {
        let mut cfg = RunConfig::default();
        assert!(cfg.set("colour", "red").is_err());
    }
}
