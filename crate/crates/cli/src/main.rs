//! `hartmann-ts`: certification sweeps, audits, Airy tables and mode export
//! for Tollmien-Schlichting modes of the MHD boundary layer.

mod config;
mod export;
mod sweep;

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use hartmann_ts::airy::ai_k;
use hartmann_ts::dispersion::{certify_eighth, disk_star};
use hartmann_ts::numerics::{holomorphic_derivative, quad_real};
use hartmann_ts::osresolvent::{remainder_and_gamma, DiscreteBVP};
use hartmann_ts::{Complex64 as C, HartmannProfile, Profile, SlowMode};
use serde::Serialize;

use config::{Format, RegimeArg, RunConfig};

#[derive(Parser, Debug)]
#[command(name = "hartmann-ts", version, about = "Tollmien-Schlichting modes of the MHD Orr-Sommerfeld system")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

/// Flags shared by every subcommand; they override `--config` values.
#[derive(Args, Debug, Default, Clone)]
struct Common {
    /// Flat `key = value` file
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, value_enum)]
    regime: Option<RegimeArg>,
    /// Amplitude A of α = Aε^{1/8}
    #[arg(long = "A")]
    a: Option<f64>,
    /// Amplitude M of α = Mε^β
    #[arg(long = "M")]
    m: Option<f64>,
    #[arg(long)]
    beta: Option<f64>,
    /// A single ε (replaces the list)
    #[arg(long)]
    eps: Option<f64>,
    /// Comma-separated, strictly decreasing ε values
    #[arg(long = "eps-list", value_delimiter = ',')]
    eps_list: Option<Vec<f64>>,
    #[arg(long)]
    theta: Option<f64>,
    #[arg(long)]
    r3: Option<f64>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<Format>,
    /// Run the full Orr-Sommerfeld stages (remainder, exact dispersion)
    #[arg(long = "full-os")]
    full_os: bool,
    /// Cells of the Orr-Sommerfeld grid
    #[arg(long = "grid-n")]
    grid_n: Option<usize>,
    /// Far-field truncation Y_max
    #[arg(long)]
    ymax: Option<f64>,
}

impl Common {
    fn resolve(&self) -> Result<RunConfig> {
        let mut cfg = RunConfig::default();
        if let Some(path) = &self.config {
            cfg.load_file(path)?;
        }
        if let Some(r) = self.regime {
            cfg.regime = r;
            if r == RegimeArg::Beta && self.beta.is_none() && cfg.beta == hartmann_ts::params::BETA_EIGHTH {
                bail!("--regime beta needs --beta");
            }
        }
        if let Some(v) = self.a {
            cfg.a = v;
        }
        if let Some(v) = self.m {
            cfg.m = v;
        }
        if let Some(v) = self.beta {
            cfg.beta = v;
        }
        if let Some(v) = &self.eps_list {
            cfg.eps_list = v.clone();
        }
        if let Some(v) = self.eps {
            cfg.eps_list = vec![v];
        }
        if let Some(v) = self.theta {
            cfg.theta = v;
        }
        if let Some(v) = self.r3 {
            cfg.r3 = v;
        }
        if let Some(v) = &self.out {
            cfg.out = Some(v.clone());
        }
        if let Some(v) = self.format {
            cfg.format = v;
        }
        if self.full_os {
            cfg.full_os = true;
        }
        if let Some(v) = self.grid_n {
            cfg.grid_n = v;
        }
        if let Some(v) = self.ymax {
            cfg.y_max = Some(v);
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Certify the dispersion root for every ε and report error-norm audits
    Sweep(Common),
    /// Certify a single ε and print the full root report
    Root(Common),
    /// Error-norm audit of the approximate mode (eighth regime)
    Audit(Common),
    /// Table of Ai(k, z) on a polar lattice of the sector
    AiryTable {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 20.0)]
        radius: f64,
        #[arg(long, default_value_t = 5)]
        rings: usize,
        #[arg(long, default_value_t = 12)]
        rays: usize,
    },
    /// Sample the normal-mode velocity and magnetic fields on an (x, y, t) lattice
    ExportMode {
        #[command(flatten)]
        common: Common,
        /// Wave speed; defaults to the certified root
        #[arg(long = "c-re", requires = "c_im")]
        c_re: Option<f64>,
        #[arg(long = "c-im", requires = "c_re")]
        c_im: Option<f64>,
        #[arg(long = "t-list", value_delimiter = ',', default_value = "0")]
        t_list: Vec<f64>,
        #[arg(long, default_value_t = 32)]
        nx: usize,
        #[arg(long, default_value_t = 64)]
        ny: usize,
        /// Extent of the exported layer in Y = y/√ε
        #[arg(long = "y-extent", default_value_t = 10.0)]
        y_extent: f64,
    },
    /// Check the configuration and run quick self-checks at the first ε
    Validate(Common),
}

fn open_out(path: &Option<PathBuf>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p).with_context(|| format!("creating {}", p.display()))?)),
        None => Box::new(BufWriter::new(std::io::stdout().lock())),
    })
}

fn write_json<T: Serialize>(out: &mut dyn Write, v: &T) -> Result<()> {
    serde_json::to_writer_pretty(&mut *out, v)?;
    writeln!(out)?;
    Ok(())
}

fn cmd_sweep(cfg: &RunConfig) -> Result<bool> {
    let details = sweep::run_sweep(cfg);
    let rows: Vec<sweep::Row> = details.into_iter().map(|d| d.row).collect();
    let slopes = sweep::slopes(&rows);
    let mut out = open_out(&cfg.out)?;
    match cfg.format {
        Format::Csv => sweep::write_csv(&mut out, &rows, &slopes)?,
        Format::Json => sweep::write_json(&mut out, cfg, &rows, &slopes)?,
    }
    out.flush()?;
    Ok(rows.iter().all(|r| r.certified))
}

fn cmd_root(cfg: &RunConfig) -> Result<bool> {
    if cfg.eps_list.len() != 1 {
        bail!("root takes a single ε (--eps)");
    }
    let d = sweep::run_row(cfg, cfg.eps_list[0]);
    let mut out = open_out(&cfg.out)?;
    match cfg.format {
        Format::Json => write_json(&mut out, &d)?,
        Format::Csv => {
            let rows = [d.row.clone()];
            sweep::write_csv(&mut out, &rows, &sweep::slopes(&rows))?;
        }
    }
    out.flush()?;
    Ok(d.row.certified)
}

#[derive(Serialize)]
struct AuditRow {
    eps: f64,
    alpha: f64,
    n: f64,
    #[serde(flatten)]
    norms: hartmann_ts::osresolvent::ErrorNorms,
}

fn cmd_audit(cfg: &RunConfig) -> Result<bool> {
    if cfg.regime != RegimeArg::Eighth {
        bail!("audit is defined for the eighth regime");
    }
    let mut rows = Vec::new();
    for &eps in &cfg.eps_list {
        let p = cfg.params(eps)?;
        rows.push(AuditRow { eps, alpha: p.alpha, n: p.n, norms: sweep::audit_norms(cfg, &p)? });
    }
    // reuse the sweep schema so the same regression code applies
    let sweep_rows: Vec<sweep::Row> = rows
        .iter()
        .map(|r| sweep::Row {
            eps: r.eps,
            alpha: r.alpha,
            n: r.n,
            e1s_l2: Some(r.norms.e1s_l2),
            e2s_l2: Some(r.norms.e2s_l2),
            e3s_l2w: Some(r.norms.e3s_l2w),
            e1f_l2: Some(r.norms.e1f_l2),
            e2f_l2: Some(r.norms.e2f_l2),
            e3f_l2w: Some(r.norms.e3f_l2w),
            ff_l2: Some(r.norms.ff_l2),
            status: "audited".into(),
            ..sweep::Row::default()
        })
        .collect();
    let slopes = sweep::slopes(&sweep_rows);
    let mut out = open_out(&cfg.out)?;
    match cfg.format {
        Format::Csv => sweep::write_csv(&mut out, &sweep_rows, &slopes)?,
        Format::Json => write_json(&mut out, &serde_json::json!({ "rows": rows, "slopes": slopes }))?,
    }
    out.flush()?;
    Ok(true)
}

fn cmd_export(cfg: &RunConfig, c: Option<C>, t_list: &[f64], nx: usize, ny: usize, y_extent: f64) -> Result<bool> {
    if cfg.regime != RegimeArg::Eighth {
        bail!("export-mode is defined for the eighth regime");
    }
    let p = cfg.params(cfg.eps_list[0])?;
    let c = match c {
        Some(c) => c,
        None => {
            let r = certify_eighth(&p, cfg.newton_tol).context("no certified root to export; pass --c-re/--c-im")?;
            if cfg.full_os {
                let profile: std::sync::Arc<dyn Profile> = std::sync::Arc::new(HartmannProfile::default());
                let opts = sweep::gamma_options(cfg);
                let g = |c: C| remainder_and_gamma(c, &p, profile.clone(), &opts).map(|(v, _)| v);
                hartmann_ts::numerics::newton_root(g, r.c_root, cfg.newton_tol, 40)?.0
            } else {
                r.c_root
            }
        }
    };
    let p = p.with_c(c);
    let mode = export::mode_profile(cfg, &p, cfg.full_os)?;
    let samples = export::sample_fields(&mode, &p, t_list, nx, ny, y_extent)?;
    let mut out = open_out(&cfg.out)?;
    match cfg.format {
        Format::Csv => export::write_fields_csv(&mut out, &samples)?,
        Format::Json => write_json(&mut out, &serde_json::json!({ "c": [c.re, c.im], "samples": samples }))?,
    }
    out.flush()?;
    Ok(true)
}

/// Quick self-checks: the Airy equation, the slow-mode wall closed forms
/// against direct quadrature, and second-order convergence of the discrete
/// operator on a manufactured solution.
fn cmd_validate(cfg: &RunConfig) -> Result<bool> {
    let mut ok = true;
    let mut report = |name: &str, pass: bool, detail: String| {
        println!("{} {name}: {detail}", if pass { "PASS" } else { "FAIL" });
        ok &= pass;
    };
    report("config", true, format!("{} eps values, regime {:?}", cfg.eps_list.len(), cfg.regime));

    let mut worst: f64 = 0.0;
    for z in [C::new(1.5, 0.5), C::new(-6.0, 2.0), C::new(10.0, -3.0), C::from_polar(15.0, 2.5)] {
        let ai = ai_k(0, z)?;
        let d2 = holomorphic_derivative(|w| ai_k(0, w).expect("sector"), z, 2, 0.1, 64);
        worst = worst.max((d2 - z * ai).norm() / (1.0 + (z * ai).norm()));
    }
    report("airy-ode", worst <= 1e-8, format!("residual {worst:.2e}"));

    if cfg.regime == RegimeArg::Eighth {
        let p = cfg.params(cfg.eps_list[0])?;
        let p = p.with_c(disk_star(&p)?.center);
        let prof = HartmannProfile::default();
        let slow = SlowMode::hartmann(p)?;
        let i0 = -quad_real(|y| (prof.u(y) - p.c_hat).powi(-2), 0.0, 1.0, 1e-13)?;
        let rel = (slow.i0() - i0).norm() / i0.norm();
        report("slow-wall", rel <= 1e-10, format!("I(0) relative difference {rel:.2e}"));

        let bvp = DiscreteBVP::for_params(&p, cfg.grid_n.min(2000))?;
        let e1 = manufactured(&p, &prof, &bvp)?;
        let e2 = manufactured(&p, &prof, &bvp.refined())?;
        report("os-convergence", e1 / e2 >= 3.5, format!("error ratio {:.3} on doubling", e1 / e2));
    }
    Ok(ok)
}

/// Max-norm error of the discrete `OS_d` solve for `φ = Y³e^{−Y}`, `ψ = Ye^{−Y}`.
fn manufactured(p: &hartmann_ts::SpectralParams, prof: &dyn Profile, bvp: &DiscreteBVP) -> Result<f64> {
    use hartmann_ts::osresolvent::{os_pointwise, OsKind, OsSolver};
    let e = |y: f64| (-y).exp();
    let phi = |y: f64| {
        let k = e(y);
        [
            y.powi(3) * k,
            (3.0 * y * y - y.powi(3)) * k,
            (6.0 * y - 6.0 * y * y + y.powi(3)) * k,
            (6.0 - 18.0 * y + 9.0 * y * y - y.powi(3)) * k,
            (-24.0 + 36.0 * y - 12.0 * y * y + y.powi(3)) * k,
        ]
        .map(C::from)
    };
    let psi = |y: f64| [y * e(y), (1.0 - y) * e(y), (y - 2.0) * e(y)].map(C::from);
    let nodes = bvp.grid.nodes();
    let (f1, f2): (Vec<C>, Vec<C>) = nodes.iter().map(|&y| os_pointwise(OsKind::D, p, prof, y, phi(y), psi(y))).unzip();
    let sol = OsSolver::new(OsKind::D, p, prof, bvp)?.solve(&f1, &f2);
    Ok(nodes
        .iter()
        .enumerate()
        .map(|(j, &y)| (sol.phi[j] - phi(y)[0]).norm().max((sol.psi[j] - psi(y)[0]).norm()))
        .fold(0.0, f64::max))
}

fn run(cli: Cli) -> Result<bool> {
    match cli.command {
        Command::Sweep(c) => cmd_sweep(&c.resolve()?),
        Command::Root(c) => cmd_root(&c.resolve()?),
        Command::Audit(c) => cmd_audit(&c.resolve()?),
        Command::AiryTable { common, radius, rings, rays } => {
            let cfg = common.resolve()?;
            let rows = export::airy_table(radius, rings, rays)?;
            let mut out = open_out(&cfg.out)?;
            match cfg.format {
                Format::Csv => export::write_airy_csv(&mut out, &rows)?,
                Format::Json => write_json(&mut out, &rows)?,
            }
            out.flush()?;
            Ok(true)
        }
        Command::ExportMode { common, c_re, c_im, t_list, nx, ny, y_extent } => {
            let cfg = common.resolve()?;
            let c = c_re.zip(c_im).map(|(re, im)| C::new(re, im));
            cmd_export(&cfg, c, &t_list, nx, ny, y_extent)
        }
        Command::Validate(c) => cmd_validate(&c.resolve()?),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
