//! Command-line front end: matrix inspection, grid sampling, singular point reports,
//! level curves of `|grad u| = 1`, and the catalog verification battery.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, Context};
use clap::{Args, Parser, Subcommand};

use maxsurf::families::{build_entry, verify_entry, CatalogEntry, Params, CATALOG_NAMES};
use maxsurf::genmat::{format_matrix, max_derived_minor, parse_matrix, GeneratingMatrix, MatrixClass, DEFAULT_TOL};
use maxsurf::singular::{classify, lightcone_fit, sector_census, tangent_check, trace_unit_gradient_levelset, Polyline};
use maxsurf::surface::{sample_grid, Causal, ImplicitGraph, ImplicitSurface, Surface, Window};

pub const TOL_ENV: &str = "MAXSURF_TOL";

/// Failure classes, mapped to process exit codes by [`CliError::exit_code`].
#[derive(Debug)]
pub enum CliError {
    /// Bad arguments, unreadable or malformed input.
    Usage(anyhow::Error),
    /// The command ran but a verification failed.
    Verification(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Verification(_) => 1,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(e) => write!(f, "error: {e:#}"),
            CliError::Verification(s) => write!(f, "verification failed: {s}"),
        }
    }
}

fn usage<E: Into<anyhow::Error>>(e: E) -> CliError {
    CliError::Usage(e.into())
}

#[derive(Debug, Parser)]
#[command(name = "maxsurf", version, about = "Doubly periodic maximal surfaces from generating matrices")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generating-matrix tools
    Matrix {
        #[command(subcommand)]
        action: MatrixAction,
    },
    /// Catalog tools
    Catalog {
        #[command(subcommand)]
        action: CatalogAction,
    },
    /// Run the invariant battery on a catalog entry
    Verify {
        name: String,
        #[command(flatten)]
        params: ParamArgs,
    },
    /// Sample a surface on a grid (CSV, optional OBJ mesh)
    Sample(RunArgs),
    /// Report special points with type, cone fit and sector census
    Singular(RunArgs),
    /// Trace the curves |grad u| = 1 (CSV polylines)
    Levelset(RunArgs),
}

#[derive(Debug, Subcommand)]
pub enum MatrixAction {
    /// Check a nine-number matrix file
    Check {
        path: PathBuf,
        /// Generating tolerance (relative to the squared largest entry)
        #[arg(long)]
        tol: Option<f64>,
    },
}

#[derive(Debug, Subcommand)]
pub enum CatalogAction {
    /// List catalog entries
    List,
}

#[derive(Debug, Args, Default, Clone)]
pub struct ParamArgs {
    #[arg(long)]
    pub k: Option<f64>,
    #[arg(long)]
    pub m: Option<f64>,
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long)]
    pub a: Option<f64>,
}

#[derive(Debug, Args, Default, Clone)]
pub struct RunArgs {
    /// Catalog entry name
    #[arg(long, conflicts_with = "matrix")]
    pub surface: Option<String>,
    /// Matrix file (nine reals); profiles use default initial conditions
    #[arg(long)]
    pub matrix: Option<PathBuf>,
    #[command(flatten)]
    pub params: ParamArgs,
    /// x0,x1,y0,y1
    #[arg(long, allow_hyphen_values = true)]
    pub window: Option<String>,
    /// Grid nodes per side
    #[arg(long)]
    pub n: Option<usize>,
    /// Monotone branch of the level function
    #[arg(long, allow_hyphen_values = true)]
    pub sheet: Option<i64>,
    /// Output file (stdout when absent)
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Mesh output file (sample only)
    #[arg(long)]
    pub mesh: Option<PathBuf>,
    /// Generating tolerance for --matrix
    #[arg(long)]
    pub tol: Option<f64>,
    /// Circle radius for the sector census (singular only)
    #[arg(long)]
    pub radius: Option<f64>,
    /// key=value file; flags override its values
    #[arg(long)]
    pub config: Option<PathBuf>,
}

/// A fully resolved run configuration.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub surface: Option<String>,
    pub matrix: Option<PathBuf>,
    pub params: Params,
    pub window: Option<Window>,
    pub n: usize,
    pub sheet: i64,
    pub out: Option<PathBuf>,
    pub mesh: Option<PathBuf>,
    pub tol: f64,
    pub radius: f64,
}

fn parse_f64(key: &str, v: &str) -> anyhow::Result<f64> {
    let x: f64 = v.trim().parse().with_context(|| format!("{key}: not a number: {v:?}"))?;
    if !x.is_finite() {
        return Err(anyhow!("{key}: must be finite"));
    }
    Ok(x)
}

pub fn parse_window(s: &str) -> anyhow::Result<Window> {
    let parts: Vec<f64> = s.split(',').map(|p| parse_f64("window", p)).collect::<anyhow::Result<_>>()?;
    if parts.len() != 4 {
        return Err(anyhow!("window needs four values x0,x1,y0,y1, got {}", parts.len()));
    }
    Ok(Window::new(parts[0], parts[1], parts[2], parts[3])?)
}

/// Reads `key = value` lines; `#` starts a comment.
pub fn parse_config(text: &str) -> anyhow::Result<HashMap<String, String>> {
    let mut map = HashMap::new();
    for (no, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line.split_once('=').ok_or_else(|| anyhow!("config line {}: expected key=value", no + 1))?;
        let key = k.trim().to_string();
        const KEYS: [&str; 13] =
            ["surface", "matrix", "k", "m", "alpha", "a", "window", "n", "sheet", "out", "mesh", "tol", "radius"];
        if !KEYS.contains(&key.as_str()) {
            return Err(anyhow!("config line {}: unknown key {key:?}", no + 1));
        }
        map.insert(key, v.trim().to_string());
    }
    Ok(map)
}

fn tol_from_env() -> anyhow::Result<Option<f64>> {
    match std::env::var(TOL_ENV) {
        Ok(v) => Ok(Some(parse_f64(TOL_ENV, &v)?)),
        Err(_) => Ok(None),
    }
}

fn positive_tol(t: f64) -> anyhow::Result<f64> {
    if t > 0.0 {
        Ok(t)
    } else {
        Err(anyhow!("tolerance must be positive, got {t}"))
    }
}

impl RunArgs {
    /// Merges flags over the config file over `MAXSURF_TOL` over the defaults.
    pub fn resolve(&self, default_n: usize) -> anyhow::Result<RunConfig> {
        let file = match &self.config {
            Some(p) => {
                let text = fs::read_to_string(p).with_context(|| format!("reading config {}", p.display()))?;
                parse_config(&text)?
            }
            None => HashMap::new(),
        };
        let num = |key: &str, flag: Option<f64>| -> anyhow::Result<Option<f64>> {
            match flag {
                Some(v) => Ok(Some(v)),
                None => file.get(key).map(|v| parse_f64(key, v)).transpose(),
            }
        };
        let params = Params {
            k: num("k", self.params.k)?,
            m: num("m", self.params.m)?,
            alpha: num("alpha", self.params.alpha)?,
            a: num("a", self.params.a)?,
        };
        let window = match (&self.window, file.get("window")) {
            (Some(w), _) | (None, Some(w)) => Some(parse_window(w)?),
            (None, None) => None,
        };
        let n = match (self.n, file.get("n")) {
            (Some(n), _) => n,
            (None, Some(v)) => v.parse().with_context(|| format!("n: not an integer: {v:?}"))?,
            (None, None) => default_n,
        };
        if n < 2 {
            return Err(anyhow!("resolution n = {n} must be at least 2"));
        }
        let sheet = match (self.sheet, file.get("sheet")) {
            (Some(s), _) => s,
            (None, Some(v)) => v.parse().with_context(|| format!("sheet: not an integer: {v:?}"))?,
            (None, None) => 0,
        };
        let tol = match num("tol", self.tol)? {
            Some(t) => t,
            None => tol_from_env()?.unwrap_or(DEFAULT_TOL),
        };
        let radius = num("radius", self.radius)?.unwrap_or(1e-3);
        if radius.is_nan() || radius <= 0.0 {
            return Err(anyhow!("radius must be positive"));
        }
        let surface = self.surface.clone().or_else(|| file.get("surface").cloned());
        let matrix = self.matrix.clone().or_else(|| file.get("matrix").map(PathBuf::from));
        if surface.is_some() && matrix.is_some() {
            return Err(anyhow!("give either a catalog surface or a matrix file, not both"));
        }
        if surface.is_none() && matrix.is_none() {
            return Err(anyhow!("no surface selected: use --surface NAME or --matrix PATH"));
        }
        Ok(RunConfig {
            surface,
            matrix,
            params,
            window,
            n,
            sheet,
            out: self.out.clone().or_else(|| file.get("out").map(PathBuf::from)),
            mesh: self.mesh.clone().or_else(|| file.get("mesh").map(PathBuf::from)),
            tol: positive_tol(tol)?,
            radius,
        })
    }
}

/// A selected surface with its label and default window.
pub struct Selected {
    pub label: String,
    pub surface: Surface,
    pub window: Window,
    pub entry: Option<CatalogEntry>,
}

pub fn read_matrix(path: &Path, tol: f64) -> anyhow::Result<(maxsurf::genmat::Mat3, bool)> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let a = parse_matrix(&text)?;
    Ok((a, maxsurf::genmat::is_generating(&a, tol)))
}

pub fn select(cfg: &RunConfig) -> anyhow::Result<Selected> {
    let sel = if let Some(name) = &cfg.surface {
        let entry = build_entry(name, &cfg.params)?;
        Selected { label: name.clone(), surface: entry.surface.clone(), window: entry.window, entry: Some(entry) }
    } else {
        let path = cfg.matrix.as_ref().expect("resolve guarantees a selection");
        if cfg.params != Params::default() {
            return Err(anyhow!("--k/--m/--alpha/--a apply to catalog surfaces only"));
        }
        let (a, _) = read_matrix(path, cfg.tol)?;
        let g = GeneratingMatrix::with_tol(a, cfg.tol)?;
        let s = ImplicitSurface::build_from_matrix(&g, None)?;
        let tx = s.phi().period();
        let ty = s.psi().period();
        let axis = |t: Option<f64>| t.map_or((-2.0, 2.0), |t| (0.01 * t, 1.01 * t));
        let ((x0, x1), (y0, y1)) = (axis(tx), axis(ty));
        Selected {
            label: path.display().to_string(),
            surface: Surface::Product(s),
            window: Window { x0, x1, y0, y1 },
            entry: None,
        }
    };
    let surface = sel.surface.with_sheet(cfg.sheet)?;
    Ok(Selected { surface, window: cfg.window.unwrap_or(sel.window), ..sel })
}

/// Seventeen significant digits.
pub fn num(v: f64) -> String {
    format!("{v:.16e}")
}

fn write_output(path: Option<&Path>, text: &str, stdout: &mut dyn Write) -> anyhow::Result<()> {
    match path {
        Some(p) => fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => stdout.write_all(text.as_bytes()).context("writing stdout"),
    }
}

pub fn cmd_matrix_check(path: &Path, tol: Option<f64>, out: &mut dyn Write) -> Result<(), CliError> {
    let tol = match tol {
        Some(t) => t,
        None => tol_from_env().map_err(usage)?.unwrap_or(DEFAULT_TOL),
    };
    let tol = positive_tol(tol).map_err(usage)?;
    let (a, generating) = read_matrix(path, tol).map_err(usage)?;
    let mut r = String::new();
    let _ = writeln!(r, "matrix:\n{}", format_matrix(&a).trim_end());
    let _ = writeln!(r, "max_minor: {}", num(max_derived_minor(&a)));
    let _ = writeln!(r, "tolerance: {}", num(tol));
    if !generating {
        let _ = writeln!(r, "generating: no");
        out.write_all(r.as_bytes()).map_err(usage)?;
        return Ok(());
    }
    let _ = writeln!(r, "generating: yes");
    let g = GeneratingMatrix::with_tol(a, tol).map_err(usage)?;
    match g.theta() {
        Ok(t) => {
            let _ = writeln!(r, "theta: {}", num(t));
        }
        Err(e) => {
            let _ = writeln!(r, "theta: inconsistent ({e})");
        }
    }
    match g.discriminant() {
        Ok(d) => {
            let _ = writeln!(r, "discriminant: {}", num(d));
        }
        Err(e) => {
            let _ = writeln!(r, "discriminant: inconsistent ({e})");
        }
    }
    match g.class() {
        Ok(MatrixClass::Elliptic) => {
            let _ = writeln!(r, "class: elliptic");
            match g.canonical_elliptic_form() {
                Ok((c, (l1, l2))) => {
                    let _ = writeln!(
                        r,
                        "canonical: a={} b={} c={} eps2={:+} eps3={:+}\nlambda: {} {}",
                        num(c.a),
                        num(c.b),
                        num(c.c),
                        c.eps2,
                        c.eps3,
                        num(l1),
                        num(l2)
                    );
                }
                Err(e) => {
                    let _ = writeln!(r, "canonical: unavailable ({e})");
                }
            }
        }
        Ok(MatrixClass::Parabolic) => {
            let _ = writeln!(r, "class: parabolic");
            match g.classify_parabolic() {
                Ok(f) => {
                    let pattern = f.pattern.map_or("none".to_string(), |p| format!("{p:?}"));
                    let _ = writeln!(
                        r,
                        "normal form: pattern={pattern} row_perm={:?} col_perm={:?} zero_line={}",
                        f.row_perm, f.col_perm, f.zero_line
                    );
                }
                Err(e) => {
                    let _ = writeln!(r, "normal form: unavailable ({e})");
                }
            }
        }
        Err(e) => {
            let _ = writeln!(r, "class: unknown ({e})");
        }
    }
    out.write_all(r.as_bytes()).map_err(usage)?;
    Ok(())
}

pub fn cmd_catalog_list(out: &mut dyn Write) -> Result<(), CliError> {
    let mut r = String::new();
    for name in CATALOG_NAMES {
        let e = build_entry(name, &Params::default()).map_err(usage)?;
        let params = e
            .params
            .iter()
            .map(|p| format!("{}={} in ({}, {})", p.name, p.value, p.range.0, p.range.1))
            .collect::<Vec<_>>()
            .join(", ");
        let _ = writeln!(r, "{name}\t{}\t{}", e.description, if params.is_empty() { "-".into() } else { params });
    }
    out.write_all(r.as_bytes()).map_err(usage)?;
    Ok(())
}

pub fn cmd_verify(name: &str, p: &ParamArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let params = Params { k: p.k, m: p.m, alpha: p.alpha, a: p.a };
    let entry = build_entry(name, &params).map_err(usage)?;
    let report = verify_entry(&entry);
    let mut r = String::new();
    for c in &report.checks {
        let _ = writeln!(r, "[{}] {}: {}", if c.passed { "ok" } else { "FAIL" }, c.name, c.detail);
    }
    let _ = writeln!(r, "{}: {}", report.name, if report.passed() { "PASS" } else { "FAIL" });
    out.write_all(r.as_bytes()).map_err(usage)?;
    if report.passed() {
        Ok(())
    } else {
        Err(CliError::Verification(format!("{} check(s) failed for {name}", report.failures().count())))
    }
}

pub fn cmd_sample(cfg: &RunConfig, out: &mut dyn Write, log: &mut dyn Write) -> Result<(), CliError> {
    let sel = select(cfg).map_err(usage)?;
    let samples = sample_grid(&sel.surface, &sel.window, cfg.n, cfg.n).map_err(usage)?;
    let mut csv = String::with_capacity(samples.len() * 200);
    csv.push_str("x,y,z,zx,zy,grad_norm_sq,causal,residual\n");
    let (mut failed, mut singular) = (0usize, 0usize);
    let mut max_res = 0.0f64;
    for s in &samples {
        let (z, zx, zy, g, tag, res) = match &s.eval {
            Ok(e) => {
                let (zx, zy) = e.grad.unwrap_or((f64::NAN, f64::NAN));
                if e.causal == Causal::Singular {
                    singular += 1;
                }
                let res = s.residual.unwrap_or(f64::NAN);
                if res.is_finite() {
                    max_res = max_res.max(res.abs());
                }
                (e.z, zx, zy, e.grad_norm_sq().unwrap_or(f64::NAN), e.causal.as_str(), res)
            }
            Err(_) => {
                failed += 1;
                (f64::NAN, f64::NAN, f64::NAN, f64::NAN, "failed", f64::NAN)
            }
        };
        let _ = writeln!(csv, "{},{},{},{},{},{},{},{}", num(s.x), num(s.y), num(z), num(zx), num(zy), num(g), tag, num(res));
    }
    write_output(cfg.out.as_deref(), &csv, out).map_err(usage)?;
    if let Some(mesh) = &cfg.mesh {
        fs::write(mesh, mesh_text(&samples, cfg.n, &sel.label))
            .with_context(|| format!("writing {}", mesh.display()))
            .map_err(usage)?;
    }
    let _ = writeln!(
        log,
        "surface={} rows={} failed={} singular={} max_residual={}",
        sel.label,
        samples.len(),
        failed,
        singular,
        num(max_res)
    );
    Ok(())
}

/// OBJ-style mesh: one vertex per evaluated node, two triangles per cell whose four
/// corners evaluated, and a `# singular <vertex>` line per singular node.
fn mesh_text(samples: &[maxsurf::surface::Sample], n: usize, label: &str) -> String {
    let mut t = String::new();
    let _ = writeln!(t, "# maxsurf mesh: {label}");
    let mut index = vec![0usize; samples.len()];
    let mut next = 1;
    for (i, s) in samples.iter().enumerate() {
        if let Ok(e) = &s.eval {
            let _ = writeln!(t, "v {} {} {}", num(s.x), num(s.y), num(e.z));
            index[i] = next;
            next += 1;
        }
    }
    for (i, s) in samples.iter().enumerate() {
        if matches!(&s.eval, Ok(e) if e.is_singular()) {
            let _ = writeln!(t, "# singular {}", index[i]);
        }
    }
    for j in 0..n - 1 {
        for i in 0..n - 1 {
            let c = [j * n + i, j * n + i + 1, (j + 1) * n + i + 1, (j + 1) * n + i].map(|k| index[k]);
            if c.iter().all(|&v| v > 0) {
                let _ = writeln!(t, "f {} {} {}", c[0], c[1], c[2]);
                let _ = writeln!(t, "f {} {} {}", c[0], c[2], c[3]);
            }
        }
    }
    t
}

pub fn cmd_singular_report(cfg: &RunConfig, out: &mut dyn Write) -> Result<(), CliError> {
    let sel = select(cfg).map_err(usage)?;
    let s = &sel.surface;
    let points = s.special_points(&sel.window);
    let mut r = String::new();
    let w = sel.window;
    let _ = writeln!(r, "surface={}", sel.label);
    let _ = writeln!(r, "window={},{},{},{}", num(w.x0), num(w.x1), num(w.y0), num(w.y1));
    if let Some(g) = s.matrix() {
        if let Ok(c) = classify(g) {
            let _ = writeln!(r, "beta1={}\nbeta2={}\nb3={}", num(c.beta1), num(c.beta2), num(c.b3));
            let _ = writeln!(r, "quadratic_discriminant={}", num(c.quadratic_discriminant));
        }
    }
    let _ = writeln!(r, "count={}", points.len());
    for (i, p) in points.iter().enumerate() {
        let _ = writeln!(r, "\n[point {}]", i + 1);
        let _ = writeln!(r, "x0={}\ny0={}\nz0={}", num(p.x0), num(p.y0), num(p.z0));
        let _ = writeln!(r, "root_sign={}", p.root_sign.map_or("none".to_string(), |v| format!("{v:+}")));
        let _ = writeln!(r, "type={}", p.kind.map_or("none", |k| k.as_str()));
        match p.xi_roots {
            Some((a, b)) => {
                let _ = writeln!(r, "xi1={}\nxi2={}", num(a), num(b));
            }
            None => {
                let _ = writeln!(r, "xi1=none\nxi2=none");
            }
        }
        match lightcone_fit(s, p, &[1e-2, 5e-3, 2.5e-3]) {
            Ok(fits) => {
                for f in &fits {
                    let _ = writeln!(
                        r,
                        "sheet{}_delta={:+}\nsheet{}_cone_fit_error={}\nsheet{}_cone_constants={}\nsheet{}_cone_stable={}",
                        f.sheet,
                        f.delta,
                        f.sheet,
                        num(f.fit_error),
                        f.sheet,
                        f.constants.iter().map(|c| num(*c)).collect::<Vec<_>>().join(","),
                        f.sheet,
                        f.is_stable(0.25)
                    );
                }
            }
            Err(e) => {
                let _ = writeln!(r, "cone_fit=error ({e})");
            }
        }
        match sector_census(s, p, cfg.radius) {
            Ok(c) => {
                let _ = writeln!(
                    r,
                    "census_space_like={}\ncensus_time_like={}\ncensus_full_space_like={}\ncensus_full_time_like={}",
                    c.space_like, c.time_like, c.full_space_like, c.full_time_like
                );
            }
            Err(e) => {
                let _ = writeln!(r, "census=error ({e})");
            }
        }
    }
    write_output(cfg.out.as_deref(), &r, out).map_err(usage)
}

pub fn cmd_levelset(cfg: &RunConfig, out: &mut dyn Write, log: &mut dyn Write) -> Result<(), CliError> {
    let sel = select(cfg).map_err(usage)?;
    let lines = trace_unit_gradient_levelset(&sel.surface, &sel.window, cfg.n).map_err(usage)?;
    write_output(cfg.out.as_deref(), &polylines_csv(&lines), out).map_err(usage)?;
    let _ = writeln!(log, "surface={} polylines={}", sel.label, lines.len());
    for p in sel.surface.special_points(&sel.window) {
        let Some((a, b)) = p.xi_roots else { continue };
        let c = tangent_check(&lines, p.x0, p.y0, &[a, b], 1e-2, 3e-2, 2.0);
        let _ = writeln!(
            log,
            "point=({},{}) rays_expected={} rays_matched={} max_deviation_deg={}",
            num(p.x0),
            num(p.y0),
            c.rays_expected,
            c.rays_matched,
            num(c.max_deviation_deg)
        );
    }
    Ok(())
}

/// `x,y` per vertex, components separated by blank lines.
pub fn polylines_csv(lines: &[Polyline]) -> String {
    let mut t = String::from("x,y\n");
    for (i, l) in lines.iter().enumerate() {
        if i > 0 {
            t.push('\n');
        }
        for (x, y) in l {
            let _ = writeln!(t, "{},{}", num(*x), num(*y));
        }
    }
    t
}

/// Runs a parsed command, writing reports to `out` and summaries to `log`.
pub fn run(cli: Cli, out: &mut dyn Write, log: &mut dyn Write) -> Result<(), CliError> {
    match cli.command {
        Command::Matrix { action: MatrixAction::Check { path, tol } } => cmd_matrix_check(&path, tol, out),
        Command::Catalog { action: CatalogAction::List } => cmd_catalog_list(out),
        Command::Verify { name, params } => cmd_verify(&name, &params, out),
        Command::Sample(args) => cmd_sample(&args.resolve(64).map_err(usage)?, out, log),
        Command::Singular(args) => cmd_singular_report(&args.resolve(64).map_err(usage)?, out),
        Command::Levelset(args) => cmd_levelset(&args.resolve(512).map_err(usage)?, out, log),
    }
}
