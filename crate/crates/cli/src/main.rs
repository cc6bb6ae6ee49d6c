//! Command-line surface for the Krzyz problem toolkit.
//!
//! Subcommands wrap the library crate: coefficient tables, the verification
//! battery, multistart optimization, per-atom-count sweeps, boundary audits,
//! spectral factorization, beta tables, and SVG plots. Every file output gets
//! a sibling run manifest recording the command, parameters, seed, and tool
//! version; timestamps live only in the manifest so the data files themselves
//! are byte-identical across reruns with the same seed.
//!
//! Exit codes: 0 success, 1 failed check or non-convergence or numerical
//! error, 2 usage or input error.

use std::collections::BTreeMap;
use std::f64::consts::TAU;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context;
use clap::{Parser, Subcommand, ValueEnum};
use krzyz_core::{
    battery, battery_filtered, beta, beta_sup, build_p, constrained_maximize, f_series, fejer_riesz,
    fg_series, g_series, maximize, sweep_csv, sweep_n, AtomicConfig, Error as CoreError,
    MaximizeOptions, TrigPolyReal,
};
use serde::Serialize;

#[derive(Parser)]
#[command(name = "krzyz", version, about = "Numerical toolkit for the Krzyz extremal problem")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Table of Taylor coefficients a_j, b_j and products T_j(fg) as CSV.
    Coeffs {
        /// Path to a JSON configuration file.
        #[arg(long)]
        config: PathBuf,
        /// Truncation order (default: 2n from the config).
        #[arg(long)]
        order: Option<usize>,
        /// Output CSV path (stdout when absent).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the verification battery; exit 0 iff all required checks pass.
    Verify {
        #[arg(long)]
        config: PathBuf,
        /// Restrict the battery to checks whose name contains this string.
        #[arg(long)]
        only: Option<String>,
        /// Stationarity tolerance for the first-order conditions.
        #[arg(long, default_value_t = 1e-6)]
        tol: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Maximize Re a_n over configurations with a fixed atom count.
    Optimize {
        /// Target coefficient index n.
        n: usize,
        /// Number of atoms (default: n).
        atoms: Option<usize>,
        #[arg(long, default_value_t = 32)]
        starts: usize,
        #[arg(long, default_value_t = 7)]
        seed: u64,
        /// Lower bound on total mass (0 disables the constraint).
        #[arg(long, default_value_t = 0.0)]
        t_min: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Best value for each atom count 1..=K as CSV.
    Sweep {
        /// Target coefficient index n.
        n: usize,
        /// Largest atom count to try (default: n).
        #[arg(long)]
        atoms: Option<usize>,
        #[arg(long, default_value_t = 32)]
        starts: usize,
        #[arg(long, default_value_t = 7)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Audit the boundary-arc bound chain for a configuration.
    Thm1Audit {
        #[arg(long)]
        config: PathBuf,
        /// Level constant k1 (> 1).
        #[arg(long, default_value_t = 4.0 / 3.0)]
        k1: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Spectral factorization of Re P on the circle.
    Fejer {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Single-atom coefficient values beta_j(t): table, or the sup over t.
    Beta {
        /// Coefficient index j.
        j: usize,
        /// Print the maximizing t and sup value instead of a table.
        #[arg(long)]
        sup: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// SVG plot of the boundary phase or of Re P on the circle.
    Plot {
        #[arg(long)]
        config: PathBuf,
        /// Which figure to draw.
        what: PlotKind,
        /// Output SVG path.
        #[arg(long)]
        svg: PathBuf,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum PlotKind {
    /// Boundary phase with vertical asymptote markers at the atoms.
    Phi,
    /// Re P(e^{i theta}) with markers at its zeros.
    #[value(name = "reP", alias = "rep")]
    ReP,
}

/// Reproducibility sidecar written next to every file output. The timestamp
/// lives here and only here, keeping the data outputs byte-identical.
#[derive(Serialize)]
struct RunManifest {
    command: String,
    config: Option<String>,
    parameters: BTreeMap<String, serde_json::Value>,
    seed: Option<u64>,
    outputs: Vec<String>,
    version: String,
    timestamp_unix_secs: u64,
}

impl RunManifest {
    fn new(command: &str) -> Self {
        RunManifest {
            command: command.to_string(),
            config: None,
            parameters: BTreeMap::new(),
            seed: None,
            outputs: Vec::new(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            timestamp_unix_secs: std::time::SystemTime::now()
                .duration_since(std::time::UNIX_EPOCH)
                .map(|d| d.as_secs())
                .unwrap_or(0),
        }
    }

    fn config(mut self, path: &Path) -> Self {
        self.config = Some(path.display().to_string());
        self
    }

    fn param(mut self, key: &str, value: impl Into<serde_json::Value>) -> Self {
        self.parameters.insert(key.to_string(), value.into());
        self
    }

    fn seed(mut self, seed: u64) -> Self {
        self.seed = Some(seed);
        self
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Err(e) = init_threads() {
        eprintln!("error: {e:#}");
        return ExitCode::from(2);
    }
    match run(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            classify(&e)
        }
    }
}

/// KRZYZ_THREADS caps the rayon pool used for parallel multistart.
fn init_threads() -> anyhow::Result<()> {
    if let Ok(raw) = std::env::var("KRZYZ_THREADS") {
        let threads: usize = raw
            .parse()
            .with_context(|| format!("KRZYZ_THREADS must be a positive integer, got {raw:?}"))?;
        if threads == 0 {
            anyhow::bail!("KRZYZ_THREADS must be a positive integer, got 0");
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .context("rayon thread pool already initialized")?;
    }
    Ok(())
}

/// Input and usage problems exit 2; numerical and check failures exit 1.
fn classify(e: &anyhow::Error) -> ExitCode {
    if let Some(core) = e.downcast_ref::<CoreError>() {
        match core {
            CoreError::Io(_)
            | CoreError::Json(_)
            | CoreError::InvalidConfig { .. }
            | CoreError::InvalidArgument { .. } => ExitCode::from(2),
            _ => ExitCode::from(1),
        }
    } else {
        ExitCode::from(1)
    }
}

fn run(command: Command) -> anyhow::Result<ExitCode> {
    match command {
        Command::Coeffs { config, order, out } => cmd_coeffs(&config, order, out.as_deref()),
        Command::Verify {
            config,
            only,
            tol,
            out,
        } => cmd_verify(&config, only.as_deref(), tol, out.as_deref()),
        Command::Optimize {
            n,
            atoms,
            starts,
            seed,
            t_min,
            out,
        } => cmd_optimize(n, atoms.unwrap_or(n), starts, seed, t_min, out.as_deref()),
        Command::Sweep {
            n,
            atoms,
            starts,
            seed,
            out,
        } => cmd_sweep(n, atoms.unwrap_or(n), starts, seed, out.as_deref()),
        Command::Thm1Audit { config, k1, out } => cmd_thm1_audit(&config, k1, out.as_deref()),
        Command::Fejer { config, out } => cmd_fejer(&config, out.as_deref()),
        Command::Beta { j, sup, out } => cmd_beta(j, sup, out.as_deref()),
        Command::Plot { config, what, svg } => cmd_plot(&config, what, &svg),
    }
}

/// Write `text` to `out` (with a manifest sibling) or to stdout.
fn emit(text: &str, out: Option<&Path>, manifest: RunManifest) -> anyhow::Result<()> {
    match out {
        Some(path) => {
            std::fs::write(path, text)
                .map_err(CoreError::from)
                .with_context(|| format!("writing {}", path.display()))?;
            let mut manifest = manifest;
            manifest.outputs.push(path.display().to_string());
            let stem = path
                .file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_else(|| "output".to_string());
            let sidecar = path.with_file_name(format!("{stem}.manifest.json"));
            let body = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
            std::fs::write(&sidecar, body + "\n")
                .map_err(CoreError::from)
                .with_context(|| format!("writing {}", sidecar.display()))?;
        }
        None => print!("{text}"),
    }
    Ok(())
}

fn read_config(path: &Path) -> anyhow::Result<AtomicConfig> {
    AtomicConfig::read_json_file(path).with_context(|| format!("reading {}", path.display()))
}

fn cmd_coeffs(config_path: &Path, order: Option<usize>, out: Option<&Path>) -> anyhow::Result<ExitCode> {
    let config = read_config(config_path)?;
    let order = order.unwrap_or(2 * config.n());
    let a = f_series(&config, order);
    let b = g_series(&config, order);
    let fg = fg_series(&config, order);
    let mut csv = String::from("j,a_re,a_im,b_re,b_im,fg_re,fg_im\n");
    for j in 0..=order {
        let (aj, bj, fgj) = (a.coeff(j), b.coeff(j), fg.coeff(j));
        csv.push_str(&format!(
            "{j},{:.17e},{:.17e},{:.17e},{:.17e},{:.17e},{:.17e}\n",
            aj.re, aj.im, bj.re, bj.im, fgj.re, fgj.im
        ));
    }
    let manifest = RunManifest::new("coeffs")
        .config(config_path)
        .param("order", order as u64);
    emit(&csv, out, manifest)?;
    Ok(ExitCode::SUCCESS)
}

fn cmd_verify(
    config_path: &Path,
    only: Option<&str>,
    tol: f64,
    out: Option<&Path>,
) -> anyhow::Result<ExitCode> {
    let config = read_config(config_path)?;
    let report = match only {
        Some(filter) => battery_filtered(&config, tol, Some(filter)),
        None => battery(&config, tol),
    };
    let manifest = RunManifest::new("verify")
        .config(config_path)
        .param("tol", tol)
        .param("only", only.unwrap_or(""));
    emit(&(report.to_json_string() + "\n"), out, manifest)?;
    if report.all_required_passed {
        Ok(ExitCode::SUCCESS)
    } else {
        for check in report.checks.iter().filter(|c| c.required && !c.passed) {
            eprintln!("failed required check: {} ({})", check.name, check.detail);
        }
        Ok(ExitCode::from(1))
    }
}

fn cmd_optimize(
    n: usize,
    atoms: usize,
    starts: usize,
    seed: u64,
    t_min: f64,
    out: Option<&Path>,
) -> anyhow::Result<ExitCode> {
    let result = if t_min > 0.0 {
        constrained_maximize(n, atoms, t_min, starts, seed)
    } else {
        maximize(n, atoms, starts, seed, MaximizeOptions::default())
    };
    let manifest = RunManifest::new("optimize")
        .param("n", n as u64)
        .param("atoms", atoms as u64)
        .param("starts", starts as u64)
        .param("t_min", t_min)
        .seed(seed);
    emit(&(result.to_json_string() + "\n"), out, manifest)?;
    if result.converged {
        Ok(ExitCode::SUCCESS)
    } else {
        eprintln!(
            "optimizer did not converge: gradient norm {:.3e} after {} iterations",
            result.grad_norm, result.iterations
        );
        Ok(ExitCode::from(1))
    }
}

fn cmd_sweep(
    n: usize,
    max_atoms: usize,
    starts: usize,
    seed: u64,
    out: Option<&Path>,
) -> anyhow::Result<ExitCode> {
    if max_atoms == 0 {
        return Err(CoreError::InvalidArgument {
            what: "sweep needs at least one atom count".to_string(),
        }
        .into());
    }
    let rows = sweep_n(n, 1..=max_atoms, starts, seed);
    let manifest = RunManifest::new("sweep")
        .param("n", n as u64)
        .param("atoms", max_atoms as u64)
        .param("starts", starts as u64)
        .seed(seed);
    emit(&sweep_csv(&rows), out, manifest)?;
    Ok(ExitCode::SUCCESS)
}

fn cmd_thm1_audit(config_path: &Path, k1: f64, out: Option<&Path>) -> anyhow::Result<ExitCode> {
    let config = read_config(config_path)?;
    let report = krzyz_core::boundary::audit(&config, config.n(), k1)?;
    let body = serde_json::to_string_pretty(&report).expect("audit report serializes");
    let all_pass = report.all_pass;
    let manifest = RunManifest::new("thm1-audit")
        .config(config_path)
        .param("k1", k1);
    emit(&(body + "\n"), out, manifest)?;
    if all_pass {
        Ok(ExitCode::SUCCESS)
    } else {
        eprintln!("audit failed: slack {:.3e}", report.ermers_slack);
        Ok(ExitCode::from(1))
    }
}

fn cmd_fejer(config_path: &Path, out: Option<&Path>) -> anyhow::Result<ExitCode> {
    let config = read_config(config_path)?;
    let t = TrigPolyReal::re_boundary(&build_p(&config));
    let fact = fejer_riesz(&t)?;
    let body = serde_json::json!({
        "scale": fact.scale,
        "sup_error": fact.sup_error,
        "factor_coeffs": fact.factor.coeffs().iter().map(|c| [c.re, c.im]).collect::<Vec<_>>(),
        "roots": fact.roots.iter().map(|z| [z.re, z.im]).collect::<Vec<_>>(),
    });
    let manifest = RunManifest::new("fejer").config(config_path);
    emit(
        &(serde_json::to_string_pretty(&body).expect("factorization serializes") + "\n"),
        out,
        manifest,
    )?;
    Ok(ExitCode::SUCCESS)
}

fn cmd_beta(j: usize, sup: bool, out: Option<&Path>) -> anyhow::Result<ExitCode> {
    let manifest = RunManifest::new("beta").param("j", j as u64).param("sup", sup);
    if sup {
        let (t_star, value) = beta_sup(j);
        emit(&format!("t* = {t_star:.6}, value = {value:.5}\n"), out, manifest)?;
    } else {
        let mut csv = String::from("t,beta\n");
        let samples = 200;
        let hi = (4 * j.max(1)) as f64;
        for k in 0..=samples {
            let t = hi * k as f64 / samples as f64;
            csv.push_str(&format!("{t:.17e},{:.17e}\n", beta(j, t)));
        }
        emit(&csv, out, manifest)?;
    }
    Ok(ExitCode::SUCCESS)
}

// ---------------------------------------------------------------------------
// SVG plotting
// ---------------------------------------------------------------------------

const SVG_W: f64 = 800.0;
const SVG_H: f64 = 500.0;
const MARGIN: f64 = 40.0;
const SAMPLES: usize = 2048;
/// Display clip for the phase, which has poles at the atoms.
const PHI_CLIP: f64 = 20.0;

fn cmd_plot(config_path: &Path, what: PlotKind, svg_path: &Path) -> anyhow::Result<ExitCode> {
    let config = read_config(config_path)?;
    let body = match what {
        PlotKind::Phi => plot_phi(&config),
        PlotKind::ReP => plot_re_p(&config),
    };
    let manifest = RunManifest::new("plot").config(config_path).param(
        "what",
        match what {
            PlotKind::Phi => "phi",
            PlotKind::ReP => "reP",
        },
    );
    emit(&body, Some(svg_path), manifest)?;
    Ok(ExitCode::SUCCESS)
}

fn svg_open(title: &str) -> String {
    format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 {SVG_W} {SVG_H}\">\n\
         <title>{title}</title>\n\
         <rect width=\"{SVG_W}\" height=\"{SVG_H}\" fill=\"white\"/>\n"
    )
}

fn x_of(theta: f64) -> f64 {
    MARGIN + (SVG_W - 2.0 * MARGIN) * theta / TAU
}

fn y_of(value: f64, lo: f64, hi: f64) -> f64 {
    let s = (value - lo) / (hi - lo);
    SVG_H - MARGIN - (SVG_H - 2.0 * MARGIN) * s
}

fn polyline(points: &[(f64, f64)], color: &str) -> String {
    if points.len() < 2 {
        return String::new();
    }
    let coords: Vec<String> = points.iter().map(|(x, y)| format!("{x:.2},{y:.2}")).collect();
    format!(
        "<polyline points=\"{}\" fill=\"none\" stroke=\"{color}\" stroke-width=\"1.5\"/>\n",
        coords.join(" ")
    )
}

/// Boundary phase: clipped polyline segments broken at the poles, with a
/// dashed vertical asymptote marker at every atom angle.
fn plot_phi(config: &AtomicConfig) -> String {
    let (lo, hi) = (-PHI_CLIP, PHI_CLIP);
    let mut svg = svg_open("boundary phase");
    let axis_y = y_of(0.0, lo, hi);
    svg.push_str(&format!(
        "<line x1=\"{MARGIN}\" y1=\"{axis_y:.2}\" x2=\"{:.2}\" y2=\"{axis_y:.2}\" stroke=\"#999\" stroke-width=\"1\"/>\n",
        SVG_W - MARGIN
    ));
    for atom in config.atoms() {
        let x = x_of(atom.theta);
        svg.push_str(&format!(
            "<line x1=\"{x:.2}\" y1=\"{MARGIN}\" x2=\"{x:.2}\" y2=\"{:.2}\" stroke=\"#c33\" stroke-width=\"1\" stroke-dasharray=\"4 3\"/>\n",
            SVG_H - MARGIN
        ));
    }
    let mut segment: Vec<(f64, f64)> = Vec::new();
    for k in 0..=SAMPLES {
        let theta = TAU * k as f64 / SAMPLES as f64;
        match krzyz_core::boundary::phi(config, theta) {
            Ok(v) if v.abs() <= PHI_CLIP => segment.push((x_of(theta), y_of(v, lo, hi))),
            _ => {
                svg.push_str(&polyline(&segment, "#036"));
                segment.clear();
            }
        }
    }
    svg.push_str(&polyline(&segment, "#036"));
    svg.push_str("</svg>\n");
    svg
}

/// Re P on the circle with circle markers at its zeros (sign changes and
/// touch points, which is how the double zeros of extremal configs appear).
fn plot_re_p(config: &AtomicConfig) -> String {
    let p = build_p(config);
    let t = TrigPolyReal::re_boundary(&p);
    let values: Vec<(f64, f64)> = (0..=SAMPLES)
        .map(|k| {
            let theta = TAU * k as f64 / SAMPLES as f64;
            (theta, t.eval(theta))
        })
        .collect();
    let vmax = values.iter().map(|(_, v)| v.abs()).fold(0.0, f64::max).max(1e-12);
    let lo = values.iter().map(|(_, v)| *v).fold(f64::INFINITY, f64::min).min(0.0) - 0.05 * vmax;
    let hi = vmax * 1.05;

    let mut svg = svg_open("Re P on the unit circle");
    let axis_y = y_of(0.0, lo, hi);
    svg.push_str(&format!(
        "<line x1=\"{MARGIN}\" y1=\"{axis_y:.2}\" x2=\"{:.2}\" y2=\"{axis_y:.2}\" stroke=\"#999\" stroke-width=\"1\"/>\n",
        SVG_W - MARGIN
    ));
    let points: Vec<(f64, f64)> = values
        .iter()
        .map(|&(theta, v)| (x_of(theta), y_of(v, lo, hi)))
        .collect();
    svg.push_str(&polyline(&points, "#036"));

    // Zeros: sign changes between samples, or local minima touching zero.
    // Adjacent hits at one zero (a touch that also flips sign in the last
    // bit) collapse to a single marker.
    let near = 1e-6 * vmax;
    let mut zeros: Vec<f64> = Vec::new();
    for w in values.windows(3) {
        let ((_, v0), (th1, v1), (_, v2)) = (w[0], w[1], w[2]);
        let sign_change = v0 * v1 < 0.0;
        let touch = v1.abs() <= near && v1 <= v0 && v1 <= v2;
        if sign_change || touch {
            let close = zeros
                .last()
                .is_some_and(|&prev| th1 - prev < 8.0 * TAU / SAMPLES as f64);
            if !close {
                zeros.push(th1);
            }
        }
    }
    for theta in zeros {
        svg.push_str(&format!(
            "<circle cx=\"{:.2}\" cy=\"{axis_y:.2}\" r=\"4\" fill=\"none\" stroke=\"#c33\" stroke-width=\"1.5\"/>\n",
            x_of(theta)
        ));
    }
    svg.push_str("</svg>\n");
    svg
}
