//! Implicit surfaces `G(z) = h(x, y)` and their graph `z = u(x, y)`.
//!
//! The product surfaces `zeta(z) = phi(x) psi(y)` are [`ImplicitSurface`]; the two
//! displayed closed forms that are not products (the maximal catenoid and the
//! sin-sum family) are [`ClosedFormSurface`]. Both implement [`ImplicitGraph`],
//! which supplies evaluation, derivatives, causal character and PDE residuals.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::genmat::GeneratingMatrix;
use crate::profiles::{default_init, solve_profile, End, Interval, Profile, ProfileInit, QuarticCoeffs};
use crate::singular::{find_special_points, SingularPoint};

/// `|grad u|^2` within this of 1 is tagged null.
pub const NULL_BAND: f64 = 1e-10;
/// `G'(z)^2` at or below this (relative to the level equation's scale) is a singular point.
const SINGULAR_SLOPE_SQ: f64 = 1e-24;
/// Level values this far outside the range of a branch are clamped to the endpoint.
const RANGE_SLACK: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Window {
    pub x0: f64,
    pub x1: f64,
    pub y0: f64,
    pub y1: f64,
}

impl Window {
    pub fn new(x0: f64, x1: f64, y0: f64, y1: f64) -> Result<Self> {
        if ![x0, x1, y0, y1].iter().all(|v| v.is_finite()) {
            return Err(Error::InvalidParameter("window bounds must be finite".into()));
        }
        if !(x0 < x1 && y0 < y1) {
            return Err(Error::InvalidParameter(format!("degenerate window [{x0}, {x1}] x [{y0}, {y1}]")));
        }
        Ok(Self { x0, x1, y0, y1 })
    }

    /// Square window of half-width `r` around `(x, y)`.
    pub fn around(x: f64, y: f64, r: f64) -> Self {
        Self { x0: x - r, x1: x + r, y0: y - r, y1: y + r }
    }

    pub fn contains(&self, x: f64, y: f64) -> bool {
        x >= self.x0 && x <= self.x1 && y >= self.y0 && y <= self.y1
    }

    /// Node `i` of `n` equally spaced nodes in x, endpoints included.
    pub fn node_x(&self, i: usize, n: usize) -> f64 {
        self.x0 + (self.x1 - self.x0) * i as f64 / (n - 1) as f64
    }

    pub fn node_y(&self, j: usize, n: usize) -> f64 {
        self.y0 + (self.y1 - self.y0) * j as f64 / (n - 1) as f64
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Causal {
    SpaceLike,
    TimeLike,
    Null,
    Singular,
}

impl Causal {
    pub fn from_grad_norm_sq(g: f64) -> Self {
        if (g - 1.0).abs() <= NULL_BAND {
            Causal::Null
        } else if g < 1.0 {
            Causal::SpaceLike
        } else {
            Causal::TimeLike
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Causal::SpaceLike => "space-like",
            Causal::TimeLike => "time-like",
            Causal::Null => "null",
            Causal::Singular => "singular",
        }
    }
}

/// `h` and its first and second partial derivatives.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SourceJet {
    pub h: f64,
    pub hx: f64,
    pub hy: f64,
    pub hxx: f64,
    pub hxy: f64,
    pub hyy: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvalResult {
    pub z: f64,
    /// `(z_x, z_y)`, absent at a singular point.
    pub grad: Option<(f64, f64)>,
    /// `(z_xx, z_xy, z_yy)`, absent at a singular point.
    pub hess: Option<(f64, f64, f64)>,
    pub causal: Causal,
}

impl EvalResult {
    pub fn grad_norm_sq(&self) -> Option<f64> {
        self.grad.map(|(p, q)| p * p + q * q)
    }

    pub fn is_singular(&self) -> bool {
        self.grad.is_none()
    }
}

/// A surface `G(z) = h(x, y)` solved for `z` on a monotone branch of `G`.
pub trait ImplicitGraph: Sync {
    /// `[G, G', G'']` at `z`.
    fn level(&self, z: f64) -> [f64; 3];
    /// `G'(z)^2` written through the value `v = G(z)`.
    fn level_slope_sq(&self, v: f64) -> f64;
    /// `G''(z)` written through `v = G(z)`.
    fn level_second(&self, v: f64) -> f64;
    /// Size of the coefficients of the level equation, for relative thresholds.
    fn level_scale(&self) -> f64;
    /// Monotone branch of `G` with the given sheet index.
    fn branch(&self, sheet: i64) -> Result<Interval>;
    /// Sheet used by [`ImplicitGraph::evaluate`].
    fn sheet(&self) -> i64;
    fn source(&self, x: f64, y: f64) -> SourceJet;
    /// Periods of `h` in `x` and `y`.
    fn base_periods(&self) -> (Option<f64>, Option<f64>);
    /// Points in the window where `grad h` and `G'` vanish together.
    fn special_points(&self, window: &Window) -> Vec<SingularPoint>;

    fn matrix(&self) -> Option<&GeneratingMatrix> {
        None
    }

    /// Solves `G(z) = v` on the branch `sheet`, starting from `seed` when given.
    fn solve_level(&self, v: f64, sheet: i64, seed: Option<f64>) -> Result<f64> {
        let iv = self.branch(sheet)?;
        solve_on_branch(|z| self.level(z), v, &iv, seed)
    }

    fn evaluate(&self, x: f64, y: f64, seed: Option<f64>) -> Result<EvalResult> {
        self.evaluate_on(x, y, self.sheet(), seed)
    }

    fn evaluate_on(&self, x: f64, y: f64, sheet: i64, seed: Option<f64>) -> Result<EvalResult> {
        if !x.is_finite() || !y.is_finite() {
            return Err(Error::Domain(format!("non-finite point ({x}, {y})")));
        }
        let src = self.source(x, y);
        let iv = self.branch(sheet)?;
        let z = solve_on_branch(|z| self.level(z), src.h, &iv, seed)?;
        let slope_sq = self.level_slope_sq(src.h).max(0.0);
        if slope_sq <= SINGULAR_SLOPE_SQ * self.level_scale().max(f64::MIN_POSITIVE) {
            return Ok(EvalResult { z: snap_to_end(&iv, z), grad: None, hess: None, causal: Causal::Singular });
        }
        let g1 = if iv.increasing { slope_sq.sqrt() } else { -slope_sq.sqrt() };
        let g2 = self.level_second(src.h);
        let zx = src.hx / g1;
        let zy = src.hy / g1;
        let zxx = (src.hxx - g2 * zx * zx) / g1;
        let zxy = (src.hxy - g2 * zx * zy) / g1;
        let zyy = (src.hyy - g2 * zy * zy) / g1;
        Ok(EvalResult {
            z,
            grad: Some((zx, zy)),
            hess: Some((zxx, zxy, zyy)),
            causal: Causal::from_grad_norm_sq(zx * zx + zy * zy),
        })
    }

    fn u(&self, x: f64, y: f64) -> Result<f64> {
        Ok(self.evaluate(x, y, None)?.z)
    }

    /// `(1 - u_y^2) u_xx + 2 u_x u_y u_xy + (1 - u_x^2) u_yy` from the implicit derivatives.
    fn pde_residual_implicit(&self, x: f64, y: f64) -> Result<f64> {
        let e = self.evaluate(x, y, None)?;
        match (e.grad, e.hess) {
            (Some((p, q)), Some((r, s, t))) => Ok(maximal_operator(p, q, r, s, t)),
            _ => Err(Error::Singular { x, y }),
        }
    }

    /// The same operator with central differences of `u` on a 3x3 stencil of step `h`.
    fn pde_residual_fd(&self, x: f64, y: f64, h: f64) -> Result<f64> {
        if !(h > 0.0) {
            return Err(Error::InvalidParameter(format!("stencil step {h}")));
        }
        let centre = self.evaluate(x, y, None)?;
        if centre.is_singular() {
            return Err(Error::Singular { x, y });
        }
        let mut u = [[0.0; 3]; 3];
        for (i, row) in u.iter_mut().enumerate() {
            for (j, cell) in row.iter_mut().enumerate() {
                let (px, py) = (x + (i as f64 - 1.0) * h, y + (j as f64 - 1.0) * h);
                let e = self.evaluate(px, py, Some(centre.z))?;
                if e.is_singular() {
                    return Err(Error::Singular { x: px, y: py });
                }
                *cell = e.z;
            }
        }
        let ux = (u[2][1] - u[0][1]) / (2.0 * h);
        let uy = (u[1][2] - u[1][0]) / (2.0 * h);
        let uxx = (u[2][1] - 2.0 * u[1][1] + u[0][1]) / (h * h);
        let uyy = (u[1][2] - 2.0 * u[1][1] + u[1][0]) / (h * h);
        let uxy = (u[2][2] - u[2][0] - u[0][2] + u[0][0]) / (4.0 * h * h);
        Ok(maximal_operator(ux, uy, uxx, uxy, uyy))
    }

    /// Causal tag and `|grad u|^2`.
    fn causal_character(&self, x: f64, y: f64) -> Result<(Causal, f64)> {
        let e = self.evaluate(x, y, None)?;
        match e.grad_norm_sq() {
            Some(g) => Ok((e.causal, g)),
            None => Err(Error::Singular { x, y }),
        }
    }

    /// Periods of `u`. Starts from the periods of `h` and halves one when `u` is
    /// already invariant under the half shift at a handful of probe points.
    fn periods(&self) -> (Option<f64>, Option<f64>) {
        let (tx, ty) = self.base_periods();
        let probes = [(0.137, 0.291), (0.613, 0.457), (0.389, 0.853), (0.771, 0.112), (0.245, 0.679)];
        let half_is_period = |t: f64, along_x: bool| {
            probes.iter().all(|&(px, py)| {
                let (sx, sy) = (px * tx.unwrap_or(1.0), py * ty.unwrap_or(1.0));
                let (qx, qy) = if along_x { (sx + 0.5 * t, sy) } else { (sx, sy + 0.5 * t) };
                match (self.u(sx, sy), self.u(qx, qy)) {
                    (Ok(a), Ok(b)) => (a - b).abs() <= 1e-9 * (1.0 + a.abs()),
                    _ => false,
                }
            })
        };
        let tx = tx.map(|t| if half_is_period(t, true) { 0.5 * t } else { t });
        let ty = ty.map(|t| if half_is_period(t, false) { 0.5 * t } else { t });
        (tx, ty)
    }
}

/// Left-hand side of the maximal surface equation.
pub fn maximal_operator(ux: f64, uy: f64, uxx: f64, uxy: f64, uyy: f64) -> f64 {
    (1.0 - uy * uy) * uxx + 2.0 * ux * uy * uxy + (1.0 - ux * ux) * uyy
}

/// Safeguarded Newton iteration for `G(z) = v` on a monotone interval.
fn solve_on_branch<F: Fn(f64) -> [f64; 3]>(g: F, v: f64, iv: &Interval, seed: Option<f64>) -> Result<f64> {
    if !v.is_finite() {
        return Err(Error::Domain(format!("level value {v}")));
    }
    let sgn = if iv.increasing { 1.0 } else { -1.0 };
    // s(z) = sgn (G(z) - v) is increasing; find lo with s <= 0 and hi with s >= 0
    let s = |z: f64| sgn * (g(z)[0] - v);
    let out_of_range = || {
        let lo = if iv.lo.is_finite() { g(iv.lo)[0] } else { f64::NEG_INFINITY };
        let hi = if iv.hi.is_finite() { g(iv.hi)[0] } else { f64::INFINITY };
        Error::OutOfRange { value: v, lo: lo.min(hi), hi: lo.max(hi) }
    };
    let slack = RANGE_SLACK * v.abs().max(1.0);

    let lo = match iv.lo_end {
        End::Closed => {
            let f = s(iv.lo);
            if f > 0.0 {
                return if f <= slack { Ok(iv.lo) } else { Err(out_of_range()) };
            }
            iv.lo
        }
        End::Pole => {
            let width = iv.hi - iv.lo;
            (1..=60)
                .map(|j| iv.lo + width * 0.5f64.powi(j))
                .find(|&z| s(z) <= 0.0)
                .ok_or_else(out_of_range)?
        }
        End::Infinite => {
            let anchor = if iv.hi.is_finite() { iv.hi } else { 0.0 };
            (0..64)
                .map(|j| anchor - 2f64.powi(j))
                .find(|&z| s(z) <= 0.0)
                .ok_or_else(out_of_range)?
        }
    };
    let hi = match iv.hi_end {
        End::Closed => {
            let f = s(iv.hi);
            if f < 0.0 {
                return if -f <= slack { Ok(iv.hi) } else { Err(out_of_range()) };
            }
            iv.hi
        }
        End::Pole => {
            let width = iv.hi - iv.lo;
            (1..=60)
                .map(|j| iv.hi - width * 0.5f64.powi(j))
                .find(|&z| s(z) >= 0.0)
                .ok_or_else(out_of_range)?
        }
        End::Infinite => {
            let anchor = if iv.lo.is_finite() { iv.lo } else { 0.0 };
            (0..64)
                .map(|j| anchor + 2f64.powi(j))
                .find(|&z| s(z) >= 0.0)
                .ok_or_else(out_of_range)?
        }
    };

    let (mut lo, mut hi) = (lo, hi);
    let mut z = match seed {
        Some(z0) if z0 > lo && z0 < hi => z0,
        _ => 0.5 * (lo + hi),
    };
    for _ in 0..200 {
        let [gz, dg, _] = g(z);
        let f = sgn * (gz - v);
        if f == 0.0 {
            return Ok(z);
        }
        if f < 0.0 {
            lo = z;
        } else {
            hi = z;
        }
        let newton = z - (gz - v) / dg;
        let next = if dg != 0.0 && newton > lo && newton < hi { newton } else { 0.5 * (lo + hi) };
        let tiny = 4.0 * f64::EPSILON * z.abs().max(1.0);
        if (next - z).abs() <= tiny || hi - lo <= tiny {
            return Ok(next);
        }
        z = next;
    }
    Err(Error::NoConvergence)
}

/// The surface `zeta(z) = phi(x) psi(y)` with its generating matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct ImplicitSurface {
    phi: Profile,
    psi: Profile,
    zeta: Profile,
    matrix: GeneratingMatrix,
    sheet: i64,
}

/// Matrix rows `(a_i, beta_i, c_i)` with `beta_i = b_j + b_k`, from the three profile equations.
pub fn matrix_from_coeffs(phi: QuarticCoeffs, psi: QuarticCoeffs, zeta: QuarticCoeffs) -> [[f64; 3]; 3] {
    let p = phi.to_phi_like();
    let q = psi.to_phi_like();
    let r = zeta.to_zeta_like();
    [
        [p.a, q.b + r.b, p.c],
        [q.a, p.b + r.b, q.c],
        [r.a, p.b + q.b, r.c],
    ]
}

/// The three profile equations encoded by a matrix: `b_i = (beta_j + beta_k - beta_i) / 2`.
pub fn coeffs_from_matrix(a: &[[f64; 3]; 3]) -> [QuarticCoeffs; 3] {
    let beta = [a[0][1], a[1][1], a[2][1]];
    let b = |i: usize| 0.5 * (beta[(i + 1) % 3] + beta[(i + 2) % 3] - beta[i]);
    [
        QuarticCoeffs::phi_like(a[0][0], b(0), a[0][2]),
        QuarticCoeffs::phi_like(a[1][0], b(1), a[1][2]),
        QuarticCoeffs::zeta_like(a[2][0], b(2), a[2][2]),
    ]
}

impl ImplicitSurface {
    /// Surface from three solved profiles; their equations must form a generating matrix.
    pub fn from_profiles(phi: Profile, psi: Profile, zeta: Profile) -> Result<Self> {
        let a = matrix_from_coeffs(phi.coeffs(), psi.coeffs(), zeta.coeffs());
        let matrix = GeneratingMatrix::new(a)?;
        Ok(Self { phi, psi, zeta, matrix, sheet: 0 })
    }

    /// Solves the three rows of the matrix for profiles, using `inits` or a default per row,
    /// then spot-checks the maximal surface equation.
    pub fn build_from_matrix(matrix: &GeneratingMatrix, inits: Option<[ProfileInit; 3]>) -> Result<Self> {
        let coeffs = coeffs_from_matrix(matrix.entries());
        let inits = inits.unwrap_or_else(|| coeffs.map(default_init));
        let phi = solve_profile(coeffs[0], inits[0])?;
        let psi = solve_profile(coeffs[1], inits[1])?;
        let zeta = solve_profile(coeffs[2], inits[2])?;
        let s = Self { phi, psi, zeta, matrix: *matrix, sheet: 0 };
        s.spot_check()?;
        Ok(s)
    }

    fn spot_check(&self) -> Result<()> {
        let tx = self.phi.period().unwrap_or(2.0);
        let ty = self.psi.period().unwrap_or(2.0);
        let mut checked = 0;
        for (px, py) in [(0.113, 0.271), (0.347, 0.619), (0.582, 0.163), (0.791, 0.437), (0.229, 0.887), (0.661, 0.733)] {
            if let Ok(r) = self.pde_residual_implicit(px * tx, py * ty) {
                if !(r.abs() <= 1e-6) {
                    return Err(Error::Inconsistent(format!(
                        "maximal surface residual {r:e} at ({}, {})",
                        px * tx,
                        py * ty
                    )));
                }
                checked += 1;
            }
        }
        if checked == 0 {
            return Err(Error::Inconsistent("no evaluable spot-check point".into()));
        }
        Ok(())
    }

    /// The same surface evaluated on another monotone branch of `zeta`.
    pub fn with_sheet(mut self, sheet: i64) -> Result<Self> {
        self.zeta.monotone_interval(sheet)?;
        self.sheet = sheet;
        Ok(self)
    }

    pub fn phi(&self) -> &Profile {
        &self.phi
    }

    pub fn psi(&self) -> &Profile {
        &self.psi
    }

    pub fn zeta(&self) -> &Profile {
        &self.zeta
    }

    pub fn generating_matrix(&self) -> &GeneratingMatrix {
        &self.matrix
    }

    /// `(b_1, b_2, b_3)`.
    pub fn b(&self) -> [f64; 3] {
        [self.phi.coeffs().to_phi_like().b, self.psi.coeffs().to_phi_like().b, self.zeta.coeffs().to_zeta_like().b]
    }
}

impl ImplicitGraph for ImplicitSurface {
    fn level(&self, z: f64) -> [f64; 3] {
        self.zeta.jet(z)
    }

    fn level_slope_sq(&self, v: f64) -> f64 {
        self.zeta.coeffs().slope_sq(v)
    }

    fn level_second(&self, v: f64) -> f64 {
        self.zeta.coeffs().second(v)
    }

    fn level_scale(&self) -> f64 {
        self.zeta.coeffs().scale()
    }

    fn branch(&self, sheet: i64) -> Result<Interval> {
        self.zeta.monotone_interval(sheet)
    }

    fn sheet(&self) -> i64 {
        self.sheet
    }

    fn source(&self, x: f64, y: f64) -> SourceJet {
        let [p, p1, p2] = self.phi.jet(x);
        let [q, q1, q2] = self.psi.jet(y);
        SourceJet { h: p * q, hx: p1 * q, hy: p * q1, hxx: p2 * q, hxy: p1 * q1, hyy: p * q2 }
    }

    fn base_periods(&self) -> (Option<f64>, Option<f64>) {
        (self.phi.period(), self.psi.period())
    }

    fn special_points(&self, window: &Window) -> Vec<SingularPoint> {
        find_special_points(self, window)
    }

    fn matrix(&self) -> Option<&GeneratingMatrix> {
        Some(&self.matrix)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ClosedFormKind {
    /// `sinh^2 z = x^2 + y^2`
    Catenoid,
    /// `sin z = alpha sin(x / sqrt(alpha)) + (1 - alpha) sin(y / sqrt(1 - alpha))`
    SinSum { alpha: f64 },
}

/// Implicit surfaces given by a displayed formula rather than a product of profiles.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClosedFormSurface {
    kind: ClosedFormKind,
    sheet: i64,
}

impl ClosedFormSurface {
    pub fn catenoid() -> Self {
        Self { kind: ClosedFormKind::Catenoid, sheet: 0 }
    }

    pub fn sin_sum(alpha: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(Error::InvalidParameter(format!("alpha = {alpha} not in (0, 1)")));
        }
        Ok(Self { kind: ClosedFormKind::SinSum { alpha }, sheet: 0 })
    }

    pub fn kind(&self) -> ClosedFormKind {
        self.kind
    }

    pub fn with_sheet(mut self, sheet: i64) -> Result<Self> {
        self.branch(sheet)?;
        self.sheet = sheet;
        Ok(self)
    }
}

impl ImplicitGraph for ClosedFormSurface {
    fn level(&self, z: f64) -> [f64; 3] {
        match self.kind {
            ClosedFormKind::Catenoid => {
                let sh = z.sinh();
                [sh * sh, (2.0 * z).sinh(), 2.0 * (2.0 * z).cosh()]
            }
            ClosedFormKind::SinSum { .. } => {
                let (s, c) = z.sin_cos();
                [s, c, -s]
            }
        }
    }

    fn level_slope_sq(&self, v: f64) -> f64 {
        match self.kind {
            ClosedFormKind::Catenoid => 4.0 * v * (1.0 + v),
            ClosedFormKind::SinSum { .. } => (1.0 - v) * (1.0 + v),
        }
    }

    fn level_second(&self, v: f64) -> f64 {
        match self.kind {
            ClosedFormKind::Catenoid => 2.0 * (1.0 + 2.0 * v),
            ClosedFormKind::SinSum { .. } => -v,
        }
    }

    fn level_scale(&self) -> f64 {
        match self.kind {
            ClosedFormKind::Catenoid => 4.0,
            ClosedFormKind::SinSum { .. } => 1.0,
        }
    }

    fn branch(&self, sheet: i64) -> Result<Interval> {
        match self.kind {
            ClosedFormKind::Catenoid => match sheet {
                0 => Ok(Interval { lo: 0.0, hi: f64::INFINITY, lo_end: End::Closed, hi_end: End::Infinite, increasing: true }),
                -1 => Ok(Interval { lo: f64::NEG_INFINITY, hi: 0.0, lo_end: End::Infinite, hi_end: End::Closed, increasing: false }),
                s => Err(Error::NoBranch(s)),
            },
            ClosedFormKind::SinSum { .. } => {
                let half = std::f64::consts::FRAC_PI_2;
                let centre = sheet as f64 * std::f64::consts::PI;
                Ok(Interval {
                    lo: centre - half,
                    hi: centre + half,
                    lo_end: End::Closed,
                    hi_end: End::Closed,
                    increasing: sheet.rem_euclid(2) == 0,
                })
            }
        }
    }

    fn sheet(&self) -> i64 {
        self.sheet
    }

    fn source(&self, x: f64, y: f64) -> SourceJet {
        match self.kind {
            ClosedFormKind::Catenoid => SourceJet { h: x * x + y * y, hx: 2.0 * x, hy: 2.0 * y, hxx: 2.0, hxy: 0.0, hyy: 2.0 },
            ClosedFormKind::SinSum { alpha } => {
                let (ra, rb) = (alpha.sqrt(), (1.0 - alpha).sqrt());
                let (sx, cx) = (x / ra).sin_cos();
                let (sy, cy) = (y / rb).sin_cos();
                SourceJet {
                    h: alpha * sx + (1.0 - alpha) * sy,
                    hx: ra * cx,
                    hy: rb * cy,
                    hxx: -sx,
                    hxy: 0.0,
                    hyy: -sy,
                }
            }
        }
    }

    fn base_periods(&self) -> (Option<f64>, Option<f64>) {
        match self.kind {
            ClosedFormKind::Catenoid => (None, None),
            ClosedFormKind::SinSum { alpha } => {
                let tau = 2.0 * std::f64::consts::PI;
                (Some(tau * alpha.sqrt()), Some(tau * (1.0 - alpha).sqrt()))
            }
        }
    }

    fn special_points(&self, window: &Window) -> Vec<SingularPoint> {
        match self.kind {
            ClosedFormKind::Catenoid => {
                if window.contains(0.0, 0.0) {
                    vec![SingularPoint::located(0.0, 0.0, 0.0, self.cone_sign_at(0.0))]
                } else {
                    Vec::new()
                }
            }
            ClosedFormKind::SinSum { alpha } => {
                // sin(x / ra) and sin(y / rb) both equal to +1 or both to -1
                let (ra, rb) = (alpha.sqrt(), (1.0 - alpha).sqrt());
                let pi = std::f64::consts::PI;
                let half = std::f64::consts::FRAC_PI_2;
                let mut out = Vec::new();
                let jx = ((window.x0 / ra - half) / pi).floor() as i64;
                let jy = ((window.y0 / rb - half) / pi).floor() as i64;
                for i in jx..=jx + ((window.x1 - window.x0) / (ra * pi)).ceil() as i64 + 1 {
                    for j in jy..=jy + ((window.y1 - window.y0) / (rb * pi)).ceil() as i64 + 1 {
                        if (i - j).rem_euclid(2) != 0 {
                            continue;
                        }
                        let x = ra * (half + i as f64 * pi);
                        let y = rb * (half + j as f64 * pi);
                        if !window.contains(x, y) {
                            continue;
                        }
                        let v = if i.rem_euclid(2) == 0 { 1.0 } else { -1.0 };
                        if let (Ok(z), Ok(iv)) = (self.solve_level(v, self.sheet, None), self.branch(self.sheet)) {
                            let z = snap_to_end(&iv, z);
                            out.push(SingularPoint::located(x, y, z, self.cone_sign_at(z)));
                        }
                    }
                }
                out
            }
        }
    }
}

impl ClosedFormSurface {
    fn cone_sign_at(&self, z0: f64) -> f64 {
        cone_sign(&self.branch(self.sheet), z0)
    }
}

/// A solve at a fold of `G` only fixes `z` to about `sqrt(eps)`; when `G'` vanishes
/// the exact answer is the nearby closed end of the branch.
pub(crate) fn snap_to_end(iv: &Interval, z: f64) -> f64 {
    for (end, kind) in [(iv.lo, iv.lo_end), (iv.hi, iv.hi_end)] {
        if kind == End::Closed && (z - end).abs() <= 1e-6 * end.abs().max(1.0) {
            return end;
        }
    }
    z
}

/// `+1` when the branch leaves `z0` upwards (z0 at its lower end), `-1` otherwise.
pub(crate) fn cone_sign(iv: &Result<Interval>, z0: f64) -> f64 {
    match iv {
        Ok(iv) if (z0 - iv.lo).abs() <= (z0 - iv.hi).abs() => 1.0,
        _ => -1.0,
    }
}

/// Any of the implemented surfaces.
// product surfaces dominate and are cloned rarely, so boxing buys nothing
#[allow(clippy::large_enum_variant)]
#[derive(Debug, Clone, PartialEq)]
pub enum Surface {
    Product(ImplicitSurface),
    Closed(ClosedFormSurface),
}

impl Surface {
    fn inner(&self) -> &dyn ImplicitGraph {
        match self {
            Surface::Product(s) => s,
            Surface::Closed(s) => s,
        }
    }

    pub fn with_sheet(self, sheet: i64) -> Result<Self> {
        Ok(match self {
            Surface::Product(s) => Surface::Product(s.with_sheet(sheet)?),
            Surface::Closed(s) => Surface::Closed(s.with_sheet(sheet)?),
        })
    }

    pub fn as_product(&self) -> Option<&ImplicitSurface> {
        match self {
            Surface::Product(s) => Some(s),
            Surface::Closed(_) => None,
        }
    }
}

impl ImplicitGraph for Surface {
    fn level(&self, z: f64) -> [f64; 3] {
        self.inner().level(z)
    }
    fn level_slope_sq(&self, v: f64) -> f64 {
        self.inner().level_slope_sq(v)
    }
    fn level_second(&self, v: f64) -> f64 {
        self.inner().level_second(v)
    }
    fn level_scale(&self) -> f64 {
        self.inner().level_scale()
    }
    fn branch(&self, sheet: i64) -> Result<Interval> {
        self.inner().branch(sheet)
    }
    fn sheet(&self) -> i64 {
        self.inner().sheet()
    }
    fn source(&self, x: f64, y: f64) -> SourceJet {
        self.inner().source(x, y)
    }
    fn base_periods(&self) -> (Option<f64>, Option<f64>) {
        self.inner().base_periods()
    }
    fn special_points(&self, window: &Window) -> Vec<SingularPoint> {
        self.inner().special_points(window)
    }
    fn matrix(&self) -> Option<&GeneratingMatrix> {
        self.inner().matrix()
    }
}

/// One grid node of [`sample_grid`].
#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    pub x: f64,
    pub y: f64,
    pub eval: Result<EvalResult>,
    /// Implicit PDE residual, absent at singular or failed nodes.
    pub residual: Option<f64>,
}

/// Evaluates the surface on `nx * ny` nodes spanning the window, endpoints included.
/// Rows (fixed `y`) are processed in parallel; inside a row each solve is seeded by
/// its left neighbour. The result is in row-major order and independent of scheduling.
pub fn sample_grid<G: ImplicitGraph + ?Sized>(g: &G, window: &Window, nx: usize, ny: usize) -> Result<Vec<Sample>> {
    if nx < 2 || ny < 2 {
        return Err(Error::InvalidParameter(format!("grid resolution {nx} x {ny} below 2")));
    }
    let rows: Vec<Vec<Sample>> = (0..ny)
        .into_par_iter()
        .map(|j| {
            let y = window.node_y(j, ny);
            let mut seed = None;
            (0..nx)
                .map(|i| {
                    let x = window.node_x(i, nx);
                    let eval = g.evaluate(x, y, seed);
                    let residual = match &eval {
                        Ok(e) => {
                            seed = Some(e.z);
                            match (e.grad, e.hess) {
                                (Some((p, q)), Some((r, s, t))) => Some(maximal_operator(p, q, r, s, t)),
                                _ => None,
                            }
                        }
                        Err(_) => None,
                    };
                    Sample { x, y, eval, residual }
                })
                .collect()
        })
        .collect();
    Ok(rows.into_iter().flatten().collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_6, PI};

    fn sinsin1() -> ImplicitSurface {
        let m = GeneratingMatrix::new([[1.0, 0.0, 0.0], [1.0, 0.0, 0.0], [0.0, 1.0, 1.0]]).unwrap();
        ImplicitSurface::build_from_matrix(&m, None).unwrap()
    }

    fn tanh_scherk() -> ImplicitSurface {
        let m = GeneratingMatrix::new([[1.0, 0.5, 1.0], [1.0, 0.5, 1.0], [0.5, 2.0, 0.5]]).unwrap();
        ImplicitSurface::build_from_matrix(&m, None).unwrap()
    }

    #[test]
    fn coefficient_bookkeeping_round_trips() {
        let a = [[1.0, 0.5, 1.0], [1.0, 0.5, 1.0], [0.5, 2.0, 0.5]];
        let [p, q, r] = coeffs_from_matrix(&a);
        assert_eq!((p.b, q.b, r.b), (1.0, 1.0, -0.5));
        assert_eq!(matrix_from_coeffs(p, q, r), a);
    }

    #[test]
    fn sinsin_value() {
        let s = sinsin1();
        let e = s.evaluate(FRAC_PI_6, FRAC_PI_2, None).unwrap();
        assert!((e.z - FRAC_PI_6).abs() < 1e-15);
        for (x, y) in [(0.3, 0.7), (2.0, -1.0), (4.0, 5.5)] {
            let z = s.u(x, y).unwrap();
            assert!((z.sin() - x.sin() * y.sin()).abs() < 1e-15);
        }
    }

    #[test]
    fn tanh_origin_is_flat_and_spacelike() {
        let s = tanh_scherk();
        for y in [-1.0, 0.0, 0.4] {
            let e = s.evaluate(0.0, y, None).unwrap();
            assert_eq!(e.z, 0.0);
        }
        let e = s.evaluate(0.0, 0.0, None).unwrap();
        assert_eq!(e.grad, Some((0.0, 0.0)));
        assert_eq!(e.causal, Causal::SpaceLike);
    }

    #[test]
    fn residuals_vanish() {
        let s = sinsin1();
        assert!(s.pde_residual_implicit(0.3, 0.7).unwrap().abs() < 1e-12);
        assert!(s.pde_residual_fd(0.3, 0.7, 1e-3).unwrap().abs() < 1e-5);
        let t = tanh_scherk();
        let r1 = t.pde_residual_fd(0.5, 0.5, 1e-3).unwrap();
        let r2 = t.pde_residual_fd(0.5, 0.5, 5e-4).unwrap();
        let ratio = r1 / r2;
        assert!((ratio - 4.0).abs() < 0.8, "ratio {ratio}");
    }

    #[test]
    fn singular_point_is_marked() {
        let s = sinsin1();
        let e = s.evaluate(FRAC_PI_2, FRAC_PI_2, None).unwrap();
        assert!(e.is_singular());
        assert_eq!(e.causal, Causal::Singular);
        assert!(matches!(s.pde_residual_implicit(FRAC_PI_2, FRAC_PI_2), Err(Error::Singular { .. })));
    }

    #[test]
    fn plane_from_exponentials() {
        let e = Profile::exponential(1.0).unwrap();
        let s = ImplicitSurface::from_profiles(e.clone(), e.clone(), e).unwrap();
        for (x, y) in [(0.2, -0.3), (1.5, 0.5)] {
            let ev = s.evaluate(x, y, None).unwrap();
            assert!((ev.z - (x + y)).abs() < 1e-14);
            assert_eq!(s.pde_residual_implicit(x, y).unwrap(), 0.0);
            assert!(s.pde_residual_fd(x, y, 1e-3).unwrap().abs() < 1e-6);
        }
    }

    #[test]
    fn non_generating_matrix_rejected() {
        assert!(GeneratingMatrix::new([[1.0, 2.0, 3.0], [4.0, 5.0, 6.0], [7.0, 8.0, 9.0]]).is_err());
    }

    #[test]
    fn periods_of_sinsin_and_tanh() {
        let (tx, ty) = sinsin1().periods();
        assert!((tx.unwrap() - 2.0 * PI).abs() < 1e-14 && (ty.unwrap() - 2.0 * PI).abs() < 1e-14);
        assert_eq!(tanh_scherk().periods(), (None, None));
    }

    #[test]
    fn catenoid_is_rotational() {
        let c = ClosedFormSurface::catenoid();
        for (x, y) in [(0.3, 0.4), (-1.0, 2.0), (0.01, -0.02)] {
            let r = f64::hypot(x, y);
            let a = c.u(x, y).unwrap();
            assert!((a - c.u(r, 0.0).unwrap()).abs() < 1e-12);
            assert!((a - r.asinh()).abs() < 1e-12);
            assert!(c.pde_residual_implicit(x, y).unwrap().abs() < 1e-9);
        }
        assert!(c.evaluate(0.0, 0.0, None).unwrap().is_singular());
        let lower = c.with_sheet(-1).unwrap();
        assert!((lower.u(0.3, 0.4).unwrap() + 0.5f64.asinh()).abs() < 1e-12);
    }

    #[test]
    fn sin_sum_residual() {
        for alpha in [0.1, 0.25, 0.5, 0.9] {
            let s = ClosedFormSurface::sin_sum(alpha).unwrap();
            for (x, y) in [(0.3, 0.2), (1.1, -0.7), (2.5, 3.0)] {
                let r = s.pde_residual_implicit(x, y).unwrap();
                assert!(r.abs() < 1e-9, "alpha {alpha}: {r:e}");
            }
        }
        assert!(ClosedFormSurface::sin_sum(1.0).is_err());
    }

    #[test]
    fn grid_is_row_major() {
        let s = sinsin1();
        let w = Window::new(0.0, 1.0, 0.0, 2.0).unwrap();
        let g = sample_grid(&s, &w, 3, 4).unwrap();
        assert_eq!(g.len(), 12);
        assert_eq!((g[1].x, g[1].y), (0.5, 0.0));
        assert_eq!((g[3].x, g[3].y), (0.0, 2.0 / 3.0));
        assert!(Window::new(1.0, 1.0, 0.0, 1.0).is_err());
    }
}
