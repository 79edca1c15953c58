//! Per-ε certification rows, regression slopes and their CSV/JSON output.

use std::io::Write;
use std::sync::Arc;

use anyhow::Result;
use hartmann_ts::dispersion::{
    beta_truncation, certify_beta, certify_eighth, disk_beta, disk_star, gamma0_beta_with, gamma0_with,
    scan_boundary,
};
use hartmann_ts::osresolvent::{approx_mode, certify_full, DiscreteBVP, ErrorNorms, FullCertification, GammaOptions};
use hartmann_ts::{DispersionReport, HartmannProfile, Profile, SpectralParams};
use rayon::prelude::*;
use serde::Serialize;

use crate::config::{RegimeArg, RunConfig};

pub const COLUMNS: [&str; 19] = [
    "eps",
    "alpha",
    "n",
    "re_c_app",
    "im_c_app",
    "winding",
    "min_gamma0_boundary",
    "re_c_exact",
    "im_c_exact",
    "growth_rate",
    "gamma_gap_max",
    "e1s_l2",
    "e2s_l2",
    "e3s_l2w",
    "e1f_l2",
    "e2f_l2",
    "e3f_l2w",
    "ff_l2",
    "status",
];

/// One sweep row. Missing values stay `None` and print as empty fields.
#[derive(Debug, Clone, Default, Serialize)]
pub struct Row {
    pub eps: f64,
    pub alpha: f64,
    pub n: f64,
    pub re_c_app: Option<f64>,
    pub im_c_app: Option<f64>,
    pub winding: Option<i64>,
    pub min_gamma0_boundary: Option<f64>,
    pub re_c_exact: Option<f64>,
    pub im_c_exact: Option<f64>,
    pub growth_rate: Option<f64>,
    pub gamma_gap_max: Option<f64>,
    pub e1s_l2: Option<f64>,
    pub e2s_l2: Option<f64>,
    pub e3s_l2w: Option<f64>,
    pub e1f_l2: Option<f64>,
    pub e2f_l2: Option<f64>,
    pub e3f_l2w: Option<f64>,
    pub ff_l2: Option<f64>,
    pub status: String,
    #[serde(skip)]
    pub certified: bool,
}

/// Fixed 17-significant-digit formatting so identical runs give identical bytes.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(fmt_f64).unwrap_or_default()
}

impl Row {
    fn fields(&self) -> Vec<String> {
        vec![
            fmt_f64(self.eps),
            fmt_f64(self.alpha),
            fmt_f64(self.n),
            fmt_opt(self.re_c_app),
            fmt_opt(self.im_c_app),
            self.winding.map(|w| w.to_string()).unwrap_or_default(),
            fmt_opt(self.min_gamma0_boundary),
            fmt_opt(self.re_c_exact),
            fmt_opt(self.im_c_exact),
            fmt_opt(self.growth_rate),
            fmt_opt(self.gamma_gap_max),
            fmt_opt(self.e1s_l2),
            fmt_opt(self.e2s_l2),
            fmt_opt(self.e3s_l2w),
            fmt_opt(self.e1f_l2),
            fmt_opt(self.e2f_l2),
            fmt_opt(self.e3f_l2w),
            fmt_opt(self.ff_l2),
            self.status.clone(),
        ]
    }

    fn set_norms(&mut self, n: &ErrorNorms) {
        self.e1s_l2 = Some(n.e1s_l2);
        self.e2s_l2 = Some(n.e2s_l2);
        self.e3s_l2w = Some(n.e3s_l2w);
        self.e1f_l2 = Some(n.e1f_l2);
        self.e2f_l2 = Some(n.e2f_l2);
        self.e3f_l2w = Some(n.e3f_l2w);
        self.ff_l2 = Some(n.ff_l2);
    }
}

/// Everything computed for one ε, including the full reports for `root`.
#[derive(Debug, Clone, Serialize)]
pub struct RowDetail {
    pub row: Row,
    pub report: Option<DispersionReport>,
    pub full: Option<FullCertification>,
    pub retained_terms: Option<usize>,
}

pub fn gamma_options(cfg: &RunConfig) -> GammaOptions {
    GammaOptions {
        intervals: cfg.grid_n,
        y_max: cfg.y_max,
        tol: cfg.iterate_tol,
        max_iter: cfg.max_iter,
        direct: false,
    }
}

pub fn bvp_for(cfg: &RunConfig, p: &SpectralParams) -> hartmann_ts::Result<DiscreteBVP> {
    match cfg.y_max {
        Some(y) => DiscreteBVP::with_y_max(p, cfg.grid_n, y),
        None => DiscreteBVP::for_params(p, cfg.grid_n),
    }
}

/// Error-norm audit at the disk centre (eighth regime).
pub fn audit_norms(cfg: &RunConfig, p: &SpectralParams) -> hartmann_ts::Result<ErrorNorms> {
    let bvp = bvp_for(cfg, p)?;
    Ok(approx_mode(p, Arc::new(HartmannProfile::default()), bvp.grid.clone())?.norms)
}

pub fn run_row(cfg: &RunConfig, eps: f64) -> RowDetail {
    let mut row = Row { eps, status: String::new(), ..Row::default() };
    let mut detail = RowDetail { row: Row::default(), report: None, full: None, retained_terms: None };
    let p = match cfg.params(eps) {
        Ok(p) => p,
        Err(e) => {
            row.status = format!("error: {e}");
            detail.row = row;
            return detail;
        }
    };
    row.alpha = p.alpha;
    row.n = p.n;
    let profile: Arc<dyn Profile> = Arc::new(HartmannProfile::default());
    let mut problems: Vec<String> = Vec::new();

    // boundary scan first, so winding and min|Γ₀| are reported even when
    // there is no certified root
    let scan = match cfg.regime {
        RegimeArg::Eighth => disk_star(&p).and_then(|d| scan_boundary(|c| gamma0_with(c, &p, profile.clone()), &d, None)),
        RegimeArg::Beta => beta_truncation(&p, profile.as_ref(), cfg.max_terms).and_then(|nt| {
            detail.retained_terms = Some(nt);
            disk_beta(&p, cfg.r3)
                .and_then(|d| scan_boundary(|c| gamma0_beta_with(c, &p, nt, profile.clone()), &d, None))
        }),
    };
    match scan {
        Ok(s) => {
            row.winding = Some(s.winding);
            row.min_gamma0_boundary = Some(s.min_abs);
            if s.winding == 1 {
                let cert = match cfg.regime {
                    RegimeArg::Eighth => certify_eighth(&p, cfg.newton_tol),
                    RegimeArg::Beta => certify_beta(&p, cfg.r3, cfg.max_terms, cfg.newton_tol).map(|(r, _)| r),
                };
                match cert {
                    Ok(r) => {
                        row.re_c_app = Some(r.c_root.re);
                        row.im_c_app = Some(r.c_root.im);
                        detail.report = Some(r);
                    }
                    Err(e) => problems.push(format!("root: {e}")),
                }
            } else {
                problems.push(format!("winding {}", s.winding));
            }
        }
        Err(e) => problems.push(format!("scan: {e}")),
    }

    if cfg.regime == RegimeArg::Eighth {
        match audit_norms(cfg, &p) {
            Ok(n) => row.set_norms(&n),
            Err(e) => problems.push(format!("audit: {e}")),
        }
    }

    if cfg.full_os {
        let opts = gamma_options(cfg);
        match disk_star(&p).and_then(|d| certify_full(&p, &d, profile.clone(), &opts, cfg.newton_tol)) {
            Ok(f) => {
                row.gamma_gap_max = Some(f.gap_max);
                match &f.report {
                    Some(r) => {
                        row.re_c_exact = Some(r.c_root.re);
                        row.im_c_exact = Some(r.c_root.im);
                        row.growth_rate = Some(p.alpha * r.c_root.im / eps.sqrt());
                    }
                    None => problems.push(format!("full winding {}", f.winding)),
                }
                if !f.gap_certified {
                    problems.push("rouche gap not certified".into());
                }
                detail.full = Some(f);
            }
            Err(e) => problems.push(format!("full: {e}")),
        }
    }

    row.certified = problems.is_empty();
    row.status = if problems.is_empty() { "certified".into() } else { problems.join("; ") };
    detail.row = row;
    detail
}

/// Rows in `eps_list` order; rows run in the rayon pool.
pub fn run_sweep(cfg: &RunConfig) -> Vec<RowDetail> {
    cfg.eps_list.par_iter().map(|&e| run_row(cfg, e)).collect()
}

/// Least-squares slope of `log y` against `log ε` over rows with a positive value.
fn slope_of(rows: &[Row], get: impl Fn(&Row) -> Option<f64>) -> Option<f64> {
    let pts: Vec<(f64, f64)> = rows
        .iter()
        .filter_map(|r| get(r).filter(|v| *v > 0.0).map(|v| (r.eps.ln(), v.ln())))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

#[derive(Debug, Clone, Serialize)]
pub struct Slopes {
    pub growth_rate: Option<f64>,
    pub e1s_l2: Option<f64>,
    pub e2s_l2: Option<f64>,
    pub e3s_l2w: Option<f64>,
    pub e1f_l2: Option<f64>,
    pub e2f_l2: Option<f64>,
    pub e3f_l2w: Option<f64>,
    pub ff_l2: Option<f64>,
}

pub fn slopes(rows: &[Row]) -> Slopes {
    Slopes {
        growth_rate: slope_of(rows, |r| r.growth_rate),
        e1s_l2: slope_of(rows, |r| r.e1s_l2),
        e2s_l2: slope_of(rows, |r| r.e2s_l2),
        e3s_l2w: slope_of(rows, |r| r.e3s_l2w),
        e1f_l2: slope_of(rows, |r| r.e1f_l2),
        e2f_l2: slope_of(rows, |r| r.e2f_l2),
        e3f_l2w: slope_of(rows, |r| r.e3f_l2w),
        ff_l2: slope_of(rows, |r| r.ff_l2),
    }
}

/// CSV with the fixed schema; the regression slopes follow as `#` comment lines.
pub fn write_csv(out: &mut dyn Write, rows: &[Row], slopes: &Slopes) -> Result<()> {
    {
        let mut w = csv::Writer::from_writer(&mut *out);
        w.write_record(COLUMNS)?;
        for r in rows {
            w.write_record(r.fields())?;
        }
        w.flush()?;
    }
    let pairs = [
        ("growth_rate", slopes.growth_rate),
        ("e1s_l2", slopes.e1s_l2),
        ("e2s_l2", slopes.e2s_l2),
        ("e3s_l2w", slopes.e3s_l2w),
        ("e1f_l2", slopes.e1f_l2),
        ("e2f_l2", slopes.e2f_l2),
        ("e3f_l2w", slopes.e3f_l2w),
        ("ff_l2", slopes.ff_l2),
    ];
    for (name, v) in pairs {
        writeln!(out, "# slope {name} {}", v.map_or_else(|| "NA".to_string(), fmt_f64))?;
    }
    Ok(())
}

#[derive(Serialize)]
struct SweepJson<'a> {
    config: &'a RunConfig,
    rows: &'a [Row],
    slopes: &'a Slopes,
}

pub fn write_json(out: &mut dyn Write, cfg: &RunConfig, rows: &[Row], slopes: &Slopes) -> Result<()> {
    serde_json::to_writer_pretty(&mut *out, &SweepJson { config: cfg, rows, slopes })?;
    writeln!(out)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn slope_of_power_law() {
        let rows: Vec<Row> = [1e-8, 1e-10, 1e-12]
            .iter()
            .map(|&e: &f64| Row { eps: e, growth_rate: Some(3.0 * e.powf(-0.25)), ..Row::default() })
            .collect();
        let s = slopes(&rows);
        assert!((s.growth_rate.unwrap() + 0.25).abs() < 1e-12);
        assert!(s.e1s_l2.is_none());
    }

    #[test]
    fn seventeen_digits() {
        assert_eq!(fmt_f64(0.1), "1.0000000000000001e-1");
        assert_eq!(fmt_f64(1.0).len(), "1.0000000000000000e0".len());
    }
}
