//! Named surfaces with their expected invariants, and a battery that checks them.

use std::f64::consts::{PI, SQRT_2};

use crate::elliptic::{cn, complete_k, sn, Modulus};
use crate::error::{Error, Result};
use crate::genmat::{GeneratingMatrix, Mat3};
use crate::profiles::{Profile, ProfileInit};
use crate::singular::{lightcone_fit, sector_census, SingularType};
use crate::surface::{ClosedFormSurface, ImplicitGraph, ImplicitSurface, Surface, Window};

pub const CATALOG_NAMES: [&str; 9] =
    ["snsn", "sncn", "cncn", "tanh-scherk", "one-periodic", "sinsin", "sinsin1", "catenoid", "plane"];

const AT_ZERO: ProfileInit = ProfileInit::AtZero;
const TOP: ProfileInit = ProfileInit::AtTurningPoint { delta: -1.0 };

/// Parameter overrides; unset values take the entry's default.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Params {
    pub k: Option<f64>,
    pub m: Option<f64>,
    pub alpha: Option<f64>,
    pub a: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Param {
    pub name: &'static str,
    pub value: f64,
    /// Open admissible interval.
    pub range: (f64, f64),
}

/// Metadata a built entry is expected to reproduce.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Expected {
    pub displayed_matrix: Option<Mat3>,
    pub theta: Option<f64>,
    pub discriminant: Option<f64>,
    pub periods: (Option<f64>, Option<f64>),
    pub kind: Option<SingularType>,
    /// Arcs on a small circle modulo the antipodal map: (space-like, time-like).
    pub census: Option<(usize, usize)>,
    /// Number of special points in the default window.
    pub special_points: Option<usize>,
    /// Known special points in the default window.
    pub special_locations: Vec<(f64, f64)>,
    /// Bound on `|u|`.
    pub slab: Option<f64>,
    pub all_space_like: bool,
    pub mixed_type: bool,
    pub rotational: bool,
}

/// The displayed implicit equation, evaluated independently of the profile machinery.
#[derive(Debug, Clone, Copy, PartialEq)]
enum Display {
    SnSn { k: f64, m: f64 },
    SnCn { k: f64, m: f64 },
    CnCn { k: f64, m: f64 },
    OnePeriodic { alpha: f64, a: f64 },
    SinSin1,
    Tanh,
    SinSum { alpha: f64 },
    Catenoid,
    Plane,
}

impl Display {
    /// `Z(z) - X(x) Y(y)` of the displayed equation.
    fn residual(&self, x: f64, y: f64, z: f64) -> Result<f64> {
        let md = Modulus::new;
        let comp = |k: f64| ((1.0 - k) * (1.0 + k)).sqrt();
        Ok(match *self {
            Display::SnSn { k, m } => {
                let lambda = 1.0 / comp(k * m);
                sn(lambda * z, md(k * m)?) - sn(x / comp(k), md(k)?) * sn(y / comp(m), md(m)?)
            }
            Display::SnCn { k, m } => {
                let mu = 1.0 / comp(comp(k) * m);
                cn(z, md(mu * k * m)?) - sn(x / comp(k), md(k)?) * cn(y, md(m)?)
            }
            Display::CnCn { k, m } => {
                let lambda = 1.0 / comp(k * m);
                let kk = md(k / (1.0 + k * k).sqrt())?;
                let mm = md(m / (1.0 + m * m).sqrt())?;
                sn(lambda * z, md(k * m)?) - cn(x, kk) * cn(y, mm)
            }
            Display::OnePeriodic { alpha, a } => sn(a * z / comp(alpha), md(alpha)?) - (a * x).cos() / (a * y).cosh(),
            Display::SinSin1 => z.sin() - x.sin() * y.sin(),
            Display::Tanh => (z / SQRT_2).tanh() - x.tanh() * y.tanh(),
            Display::SinSum { alpha } => {
                z.sin() - alpha * (x / alpha.sqrt()).sin() - (1.0 - alpha) * (y / (1.0 - alpha).sqrt()).sin()
            }
            Display::Catenoid => z.sinh().powi(2) - x * x - y * y,
            Display::Plane => z - x - y,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CatalogEntry {
    pub name: &'static str,
    pub description: &'static str,
    pub params: Vec<Param>,
    pub surface: Surface,
    pub expected: Expected,
    /// Window used by the verification battery and as the CLI default.
    pub window: Window,
    display: Display,
}

impl CatalogEntry {
    /// `Z(u) - X(x) Y(y)` of the displayed equation at a solved point.
    pub fn displayed_residual(&self, x: f64, y: f64, z: f64) -> Result<f64> {
        self.display.residual(x, y, z)
    }
}

fn check_open(name: &str, v: f64, lo: f64, hi: f64) -> Result<f64> {
    if v.is_finite() && v > lo && v < hi {
        Ok(v)
    } else {
        Err(Error::InvalidParameter(format!("{name} = {v} outside ({lo}, {hi})")))
    }
}

fn kprime(k: f64) -> f64 {
    ((1.0 - k) * (1.0 + k)).sqrt()
}

fn quarter(k: f64) -> Result<f64> {
    complete_k(Modulus::new(k)?)
}

/// Window `[0.01 T, 1.01 T]` in each direction: one period cell, offset so the
/// special points of the cell lie strictly inside.
fn cell_window(tx: f64, ty: f64) -> Window {
    Window { x0: 0.01 * tx, x1: 1.01 * tx, y0: 0.01 * ty, y1: 1.01 * ty }
}

fn product(matrix: Mat3, inits: [ProfileInit; 3]) -> Result<Surface> {
    let g = GeneratingMatrix::new(matrix)?;
    Ok(Surface::Product(ImplicitSurface::build_from_matrix(&g, Some(inits))?))
}

/// `sn(lambda z; km) = sn(x/k'; k) sn(y/m'; m)`, `lambda = 1/(km)'`.
pub fn snsn(k: f64, m: f64) -> Result<CatalogEntry> {
    let k = check_open("k", k, 0.0, 1.0)?;
    let m = check_open("m", m, 0.0, 1.0)?;
    let (kp2, mp2) = (kprime(k).powi(2), kprime(m).powi(2));
    let l2 = 1.0 / (1.0 - k * k * m * m);
    let (k2, m2) = (k * k, m * m);
    let matrix = [
        [1.0 / kp2, l2 * kp2 * m2 / mp2, k2 / kp2],
        [1.0 / mp2, l2 * k2 * mp2 / kp2, m2 / mp2],
        [l2 * k2 * m2, 1.0 / (l2 * kp2 * mp2), l2],
    ];
    let tx = 4.0 * kprime(k) * quarter(k)?;
    let ty = 4.0 * kprime(m) * quarter(m)?;
    let window = cell_window(tx, ty);
    Ok(CatalogEntry {
        name: "snsn",
        description: "third-type doubly periodic surface sn(lz; km) = sn(x/k'; k) sn(y/m'; m)",
        params: vec![Param { name: "k", value: k, range: (0.0, 1.0) }, Param { name: "m", value: m, range: (0.0, 1.0) }],
        surface: product(matrix, [AT_ZERO; 3])?,
        expected: Expected {
            displayed_matrix: Some(matrix),
            theta: Some(matrix[0].iter().product()),
            discriminant: Some(0.25),
            periods: (Some(tx), Some(ty)),
            kind: Some(SingularType::Type3),
            census: Some((2, 2)),
            special_points: Some(4),
            special_locations: lattice(&window, 0.25 * tx, 0.5 * tx, 0.25 * ty, 0.5 * ty),
            ..Expected::default()
        },
        window,
        display: Display::SnSn { k, m },
    })
}

/// `cn(z; mu km) = sn(x/k'; k) cn(y; m)`, `mu = 1/(k'm)'`.
pub fn sncn(k: f64, m: f64) -> Result<CatalogEntry> {
    let k = check_open("k", k, 0.0, 1.0)?;
    let m = check_open("m", m, 0.0, 1.0)?;
    let (kp, mp) = (kprime(k), kprime(m));
    let mu2 = 1.0 / (1.0 - kp * kp * m * m);
    let (k2, m2, kp2, mp2) = (k * k, m * m, kp * kp, mp * mp);
    let matrix = [
        [1.0 / kp2, -(kp * mp * m).powi(2) * mu2, k2 / kp2],
        [mp2, k2 * mu2 / kp2, -m2],
        [-k2 * m2 * mu2, 1.0 / (kp2 * mu2), mp2 * mu2],
    ];
    let tx = 4.0 * kp * quarter(k)?;
    let ty = 4.0 * quarter(m)?;
    let window = cell_window(tx, ty);
    Ok(CatalogEntry {
        name: "sncn",
        description: "second-type doubly periodic surface cn(z; mu km) = sn(x/k'; k) cn(y; m)",
        params: vec![Param { name: "k", value: k, range: (0.0, 1.0) }, Param { name: "m", value: m, range: (0.0, 1.0) }],
        surface: product(matrix, [AT_ZERO, TOP, TOP])?,
        expected: Expected {
            displayed_matrix: Some(matrix),
            theta: Some(matrix[0].iter().product()),
            discriminant: Some(0.25),
            periods: (Some(tx), Some(ty)),
            kind: Some(SingularType::Type2),
            census: Some((1, 1)),
            special_points: Some(4),
            special_locations: lattice(&window, 0.25 * tx, 0.5 * tx, 0.0, 0.5 * ty),
            ..Expected::default()
        },
        window,
        display: Display::SnCn { k, m },
    })
}

/// `sn(lambda z; km) = cn(x; k/sqrt(1+k^2)) cn(y; m/sqrt(1+m^2))`, `lambda = 1/(km)'`.
pub fn cncn(k: f64, m: f64) -> Result<CatalogEntry> {
    let k = check_open("k", k, 0.0, f64::INFINITY)?;
    let m = check_open("m", m, 0.0, f64::INFINITY)?;
    check_open("k m", k * m, 0.0, 1.0)?;
    let l2 = 1.0 / (1.0 - k * k * m * m);
    let (k2, m2) = (k * k, m * m);
    let matrix = [
        [1.0 / (1.0 + k2), -(1.0 + k2) * m2 * l2 / (1.0 + m2), -k2 / (1.0 + k2)],
        [1.0 / (1.0 + m2), -(1.0 + m2) * k2 * l2 / (1.0 + k2), -m2 / (1.0 + m2)],
        [k2 * m2 * l2, 1.0 / (l2 * (1.0 + k2) * (1.0 + m2)), l2],
    ];
    let tx = 4.0 * quarter(k / (1.0 + k2).sqrt())?;
    let ty = 4.0 * quarter(m / (1.0 + m2).sqrt())?;
    let window = cell_window(tx, ty);
    Ok(CatalogEntry {
        name: "cncn",
        description: "first-type doubly periodic surface sn(lz; km) = cn(x; k/sqrt(1+k^2)) cn(y; m/sqrt(1+m^2))",
        params: vec![
            Param { name: "k", value: k, range: (0.0, f64::INFINITY) },
            Param { name: "m", value: m, range: (0.0, f64::INFINITY) },
        ],
        surface: product(matrix, [TOP, TOP, AT_ZERO])?,
        expected: Expected {
            displayed_matrix: Some(matrix),
            theta: Some(matrix[0].iter().product()),
            discriminant: Some(0.25),
            periods: (Some(tx), Some(ty)),
            kind: Some(SingularType::Type1),
            census: Some((1, 0)),
            special_points: Some(4),
            special_locations: lattice(&window, 0.0, 0.5 * tx, 0.0, 0.5 * ty),
            ..Expected::default()
        },
        window,
        display: Display::CnCn { k, m },
    })
}

/// `sn(a z / alpha'; alpha) = cos(a x) / cosh(a y)`, periodic in `x` only and contained
/// in the slab `|z| <= K(alpha) alpha' / a`.
pub fn one_periodic(alpha: f64, a: f64) -> Result<CatalogEntry> {
    let alpha = check_open("alpha", alpha, 0.0, 1.0)?;
    let a = check_open("a", a, 0.0, f64::INFINITY)?;
    let ap2 = kprime(alpha).powi(2);
    let s = a * a;
    let matrix = [
        [s, -s / ap2, 0.0],
        [0.0, -s * alpha * alpha / ap2, -s],
        [s * alpha * alpha / ap2, 0.0, s / ap2],
    ];
    let tx = 2.0 * PI / a;
    let window = Window { x0: 0.01 * tx, x1: 1.01 * tx, y0: -2.0 / a, y1: 2.0 / a };
    let locations = lattice(&window, 0.0, 0.5 * tx, 0.0, f64::INFINITY);
    Ok(CatalogEntry {
        name: "one-periodic",
        description: "space-like surface sn(a z/alpha'; alpha) = cos(a x)/cosh(a y) in a slab",
        params: vec![
            Param { name: "alpha", value: alpha, range: (0.0, 1.0) },
            Param { name: "a", value: a, range: (0.0, f64::INFINITY) },
        ],
        surface: product(matrix, [TOP, TOP, AT_ZERO])?,
        expected: Expected {
            displayed_matrix: Some(matrix),
            theta: Some(0.0),
            discriminant: Some(0.25 * s * s),
            periods: (Some(tx), None),
            special_points: Some(locations.len()),
            special_locations: locations,
            slab: Some(quarter(alpha)? * kprime(alpha) / a),
            all_space_like: true,
            ..Expected::default()
        },
        window,
        display: Display::OnePeriodic { alpha, a },
    })
}

/// `sin z = sin x sin y`.
pub fn sinsin1() -> Result<CatalogEntry> {
    let matrix = [[1.0, 0.0, 0.0], [1.0, 0.0, 0.0], [0.0, 1.0, 1.0]];
    let tau = 2.0 * PI;
    let window = Window { x0: 0.0, x1: tau, y0: 0.0, y1: tau };
    Ok(CatalogEntry {
        name: "sinsin1",
        description: "doubly periodic surface sin z = sin x sin y",
        params: Vec::new(),
        surface: product(matrix, [AT_ZERO; 3])?,
        expected: Expected {
            displayed_matrix: Some(matrix),
            theta: Some(0.0),
            discriminant: Some(0.25),
            periods: (Some(tau), Some(tau)),
            kind: Some(SingularType::Degenerate),
            special_points: Some(4),
            special_locations: lattice(&window, 0.25 * tau, 0.5 * tau, 0.25 * tau, 0.5 * tau),
            ..Expected::default()
        },
        window,
        display: Display::SinSin1,
    })
}

/// `tanh x tanh y = tanh(z / sqrt 2)`: mixed type, no singular points.
pub fn tanh_scherk() -> Result<CatalogEntry> {
    let matrix = [[1.0, 0.5, 1.0], [1.0, 0.5, 1.0], [0.5, 2.0, 0.5]];
    Ok(CatalogEntry {
        name: "tanh-scherk",
        description: "mixed-type surface tanh x tanh y = tanh(z/sqrt 2) without singular points",
        params: Vec::new(),
        surface: product(matrix, [AT_ZERO; 3])?,
        expected: Expected {
            displayed_matrix: Some(matrix),
            theta: Some(0.5),
            discriminant: Some(0.0),
            periods: (None, None),
            special_points: Some(0),
            mixed_type: true,
            ..Expected::default()
        },
        window: Window { x0: -2.0, x1: 2.0, y0: -2.0, y1: 2.0 },
        display: Display::Tanh,
    })
}

/// `sin z = alpha sin(x / sqrt(alpha)) + (1 - alpha) sin(y / sqrt(1 - alpha))`.
pub fn sinsin(alpha: f64) -> Result<CatalogEntry> {
    let alpha = check_open("alpha", alpha, 0.0, 1.0)?;
    let tx = 2.0 * PI * alpha.sqrt();
    let ty = 2.0 * PI * (1.0 - alpha).sqrt();
    let window = cell_window(tx, ty);
    let locations = lattice(&window, 0.25 * tx, 0.5 * tx, 0.25 * ty, 0.5 * ty)
        .into_iter()
        .filter(|&(x, y)| ((x / alpha.sqrt()).sin() - (y / (1.0 - alpha).sqrt()).sin()).abs() < 1e-9)
        .collect::<Vec<_>>();
    Ok(CatalogEntry {
        name: "sinsin",
        description: "doubly periodic sin-sum surface",
        params: vec![Param { name: "alpha", value: alpha, range: (0.0, 1.0) }],
        surface: Surface::Closed(ClosedFormSurface::sin_sum(alpha)?),
        expected: Expected {
            periods: (Some(tx), Some(ty)),
            special_points: Some(locations.len()),
            special_locations: locations,
            ..Expected::default()
        },
        window,
        display: Display::SinSum { alpha },
    })
}

/// `sinh^2 z = x^2 + y^2`.
pub fn catenoid() -> Result<CatalogEntry> {
    Ok(CatalogEntry {
        name: "catenoid",
        description: "maximal catenoid sinh^2 z = x^2 + y^2 with a light-cone point at the origin",
        params: Vec::new(),
        surface: Surface::Closed(ClosedFormSurface::catenoid()),
        expected: Expected {
            periods: (None, None),
            special_points: Some(1),
            special_locations: vec![(0.0, 0.0)],
            all_space_like: true,
            rotational: true,
            ..Expected::default()
        },
        window: Window { x0: -1.0, x1: 1.0, y0: -1.0, y1: 1.0 },
        display: Display::Catenoid,
    })
}

/// `e^z = e^x e^y`, the time-like plane `z = x + y`.
pub fn plane() -> Result<CatalogEntry> {
    let e = Profile::exponential(1.0)?;
    let s = ImplicitSurface::from_profiles(e.clone(), e.clone(), e)?;
    let matrix = *s.generating_matrix().entries();
    Ok(CatalogEntry {
        name: "plane",
        description: "affine plane e^z = e^x e^y",
        params: Vec::new(),
        surface: Surface::Product(s),
        expected: Expected {
            displayed_matrix: Some(matrix),
            theta: Some(0.0),
            periods: (None, None),
            special_points: Some(0),
            ..Expected::default()
        },
        window: Window { x0: -1.0, x1: 1.0, y0: -1.0, y1: 1.0 },
        display: Display::Plane,
    })
}

/// Points `(x0 + i dx, y0 + j dy)` inside the window. An infinite step means one row/column.
fn lattice(w: &Window, x0: f64, dx: f64, y0: f64, dy: f64) -> Vec<(f64, f64)> {
    let axis = |start: f64, step: f64, lo: f64, hi: f64| -> Vec<f64> {
        if !step.is_finite() {
            return if start >= lo && start <= hi { vec![start] } else { Vec::new() };
        }
        let first = ((lo - start) / step).ceil() as i64;
        let last = ((hi - start) / step).floor() as i64;
        (first..=last).map(|i| start + i as f64 * step).collect()
    };
    let xs = axis(x0, dx, w.x0, w.x1);
    let ys = axis(y0, dy, w.y0, w.y1);
    xs.iter().flat_map(|&x| ys.iter().map(move |&y| (x, y))).collect()
}

/// Entry by CLI name with parameter overrides.
pub fn build_entry(name: &str, p: &Params) -> Result<CatalogEntry> {
    let no_params = |n: &str| {
        if p.k.is_some() || p.m.is_some() || p.alpha.is_some() || p.a.is_some() {
            Err(Error::InvalidParameter(format!("{n} takes no parameters")))
        } else {
            Ok(())
        }
    };
    match name {
        "snsn" => snsn(p.k.unwrap_or(0.8), p.m.unwrap_or(0.8)),
        "sncn" => sncn(p.k.unwrap_or(0.8), p.m.unwrap_or(0.8)),
        "cncn" => cncn(p.k.unwrap_or(0.8), p.m.unwrap_or(0.8)),
        "one-periodic" => one_periodic(p.alpha.unwrap_or(0.6), p.a.unwrap_or(1.0)),
        "sinsin" => sinsin(p.alpha.unwrap_or(0.25)),
        "sinsin1" => no_params(name).and_then(|_| sinsin1()),
        "tanh-scherk" => no_params(name).and_then(|_| tanh_scherk()),
        "catenoid" => no_params(name).and_then(|_| catenoid()),
        "plane" => no_params(name).and_then(|_| plane()),
        other => Err(Error::InvalidParameter(format!("unknown catalog entry {other:?}"))),
    }
}

/// Every entry with default parameters.
pub fn build_catalog() -> Result<Vec<CatalogEntry>> {
    CATALOG_NAMES.iter().map(|n| build_entry(n, &Params::default())).collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct VerifyReport {
    pub name: String,
    pub checks: Vec<Check>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.passed)
    }

    fn push(&mut self, name: &str, passed: bool, detail: String) {
        self.checks.push(Check { name: name.to_string(), passed, detail });
    }
}

fn rel_close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs()).max(1.0)
}

/// Grid spacing of the residual battery.
pub const VERIFY_GRID: usize = 50;
/// Disks of this radius around special points are excluded from residual checks.
pub const EXCLUSION_RADIUS: f64 = 1e-2;

/// Runs the invariant battery on an entry and compares against its expected metadata.
pub fn verify_entry(e: &CatalogEntry) -> VerifyReport {
    let mut r = VerifyReport { name: e.name.to_string(), checks: Vec::new() };
    let s = &e.surface;
    let ex = &e.expected;

    if let Some(g) = s.matrix() {
        r.push("generating", true, format!("max minor {:.3e}", crate::genmat::max_derived_minor(g.entries())));
        if let Some(d) = ex.displayed_matrix {
            let scale = g.scale();
            let dev = g.entries().iter().flatten().zip(d.iter().flatten()).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
            r.push("displayed matrix", dev <= 1e-12 * scale, format!("max entry deviation {dev:.3e}"));
        }
        if let Some(t) = ex.theta {
            match g.theta() {
                Ok(th) => r.push("theta", rel_close(th, t, 1e-12), format!("{th:.17e} (expected {t:.17e})")),
                Err(err) => r.push("theta", false, err.to_string()),
            }
        }
        if let Some(d) = ex.discriminant {
            match g.discriminant() {
                Ok(dd) => r.push("discriminant", rel_close(dd, d, 1e-12), format!("{dd:.17e} (expected {d:.17e})")),
                Err(err) => r.push("discriminant", false, err.to_string()),
            }
        }
    }

    let specials = s.special_points(&e.window);
    if let Some(n) = ex.special_points {
        r.push("special point count", specials.len() == n, format!("{} found, {n} expected", specials.len()));
    }
    for &(x, y) in &ex.special_locations {
        let found = specials.iter().any(|p| (p.x0 - x).abs() <= 1e-9 && (p.y0 - y).abs() <= 1e-9);
        r.push("special point location", found, format!("({x:.12}, {y:.12})"));
    }

    // residuals and the displayed equation on a grid that avoids the special points
    let w = &e.window;
    let mut max_res = 0.0f64;
    let mut max_disp = 0.0f64;
    let mut max_grad = 0.0f64;
    let mut min_grad = f64::INFINITY;
    let mut max_abs_u = 0.0f64;
    let mut failures = 0usize;
    let (mut space, mut time) = (0usize, 0usize);
    for j in 0..VERIFY_GRID {
        for i in 0..VERIFY_GRID {
            let x = w.node_x(i, VERIFY_GRID);
            let y = w.node_y(j, VERIFY_GRID);
            if specials.iter().any(|p| (p.x0 - x).hypot(p.y0 - y) < EXCLUSION_RADIUS) {
                continue;
            }
            match s.evaluate(x, y, None) {
                Ok(ev) => {
                    max_abs_u = max_abs_u.max(ev.z.abs());
                    if let (Some((p, q)), Some((a, b, c))) = (ev.grad, ev.hess) {
                        max_res = max_res.max(crate::surface::maximal_operator(p, q, a, b, c).abs());
                        let gn = p * p + q * q;
                        max_grad = max_grad.max(gn);
                        min_grad = min_grad.min(gn);
                        if gn < 1.0 {
                            space += 1;
                        } else if gn > 1.0 {
                            time += 1;
                        }
                    }
                    if let Ok(d) = e.displayed_residual(x, y, ev.z) {
                        max_disp = max_disp.max(d.abs());
                    }
                }
                Err(_) => failures += 1,
            }
        }
    }
    r.push("evaluation", failures == 0, format!("{failures} failed nodes"));
    r.push("maximal surface residual", max_res <= 1e-8, format!("max {max_res:.3e}"));
    r.push("displayed equation", max_disp <= 1e-10, format!("max {max_disp:.3e}"));
    if ex.all_space_like {
        r.push("space-like", max_grad < 1.0, format!("max |grad u|^2 = {max_grad:.6}"));
    }
    if ex.mixed_type {
        r.push("mixed type", space > 0 && time > 0, format!("{space} space-like, {time} time-like nodes"));
    }
    if let Some(b) = ex.slab {
        r.push("slab", max_abs_u <= b + 1e-9, format!("max |u| = {max_abs_u:.12}, bound {b:.12}"));
    }

    let periods = s.periods();
    let period_ok = |got: Option<f64>, want: Option<f64>| match (got, want) {
        (None, None) => true,
        (Some(a), Some(b)) => rel_close(a, b, 1e-12),
        _ => false,
    };
    r.push(
        "periods",
        period_ok(periods.0, ex.periods.0) && period_ok(periods.1, ex.periods.1),
        format!("{:?} (expected {:?})", periods, ex.periods),
    );
    let mut max_shift = 0.0f64;
    for j in 0..8 {
        for i in 0..8 {
            let x = w.x0 + (w.x1 - w.x0) * (i as f64 + 0.5) / 8.0;
            let y = w.y0 + (w.y1 - w.y0) * (j as f64 + 0.5) / 8.0;
            let Ok(u0) = s.u(x, y) else { continue };
            if let Some(t) = periods.0 {
                if let Ok(u1) = s.u(x + t, y) {
                    max_shift = max_shift.max((u1 - u0).abs());
                }
            }
            if let Some(t) = periods.1 {
                if let Ok(u1) = s.u(x, y + t) {
                    max_shift = max_shift.max((u1 - u0).abs());
                }
            }
        }
    }
    if periods.0.is_some() || periods.1.is_some() {
        r.push("periodicity", max_shift <= 1e-9, format!("max |u(p + T) - u(p)| = {max_shift:.3e}"));
    }

    for p in &specials {
        if let Some(kind) = ex.kind {
            r.push("type", p.kind == Some(kind), format!("{:?} at ({:.6}, {:.6})", p.kind, p.x0, p.y0));
        }
        if let Some(want) = ex.census {
            match sector_census(s, p, 1e-3) {
                Ok(c) => r.push(
                    "sector census",
                    (c.space_like, c.time_like) == want,
                    format!("({}, {}) at ({:.6}, {:.6})", c.space_like, c.time_like, p.x0, p.y0),
                ),
                Err(err) => r.push("sector census", false, err.to_string()),
            }
        }
        match lightcone_fit(s, p, &[1e-2, 5e-3, 2.5e-3]) {
            Ok(fits) => {
                let ok = fits.iter().all(|f| f.is_stable(0.25));
                let detail = fits
                    .iter()
                    .map(|f| format!("sheet {} delta {:+} C {:?}", f.sheet, f.delta, f.constants))
                    .collect::<Vec<_>>()
                    .join("; ");
                r.push("light cone", ok, detail);
            }
            Err(err) => r.push("light cone", false, err.to_string()),
        }
    }

    if ex.rotational {
        let mut dev = 0.0f64;
        for (x, y) in [(0.3, 0.4), (-0.6, 0.2), (0.05, -0.7), (-0.4, -0.45)] {
            if let (Ok(a), Ok(b)) = (s.u(x, y), s.u(x.hypot(y), 0.0)) {
                dev = dev.max((a - b).abs());
            } else {
                dev = f64::INFINITY;
            }
        }
        r.push("rotational symmetry", dev <= 1e-10, format!("max deviation {dev:.3e}"));
    }
    r
}
