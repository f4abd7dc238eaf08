//! Special points of the product surfaces, their light-cone behaviour, the
//! three singularity types, and the curves where `|grad u| = 1`.

use std::collections::HashMap;
use std::f64::consts::PI;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::genmat::GeneratingMatrix;
use crate::profiles::Profile;
use crate::surface::{cone_sign, sample_grid, snap_to_end, Causal, ImplicitGraph, ImplicitSurface, Window};

/// Minimum number of bracketing cells per period when scanning for zeros of `f'`.
const CELLS_PER_PERIOD: usize = 512;
/// Relative threshold below which a sign quantity of the classification counts as zero.
const DEGENERATE_EPS: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SingularType {
    /// Space-like in a punctured neighbourhood.
    Type1,
    /// One space-like and one time-like sector.
    Type2,
    /// Two space-like and two time-like sectors.
    Type3,
    /// A sign quantity vanishes; none of the strict patterns applies.
    Degenerate,
}

impl SingularType {
    pub fn as_str(self) -> &'static str {
        match self {
            SingularType::Type1 => "Type1",
            SingularType::Type2 => "Type2",
            SingularType::Type3 => "Type3",
            SingularType::Degenerate => "Degenerate",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SingularPoint {
    pub x0: f64,
    pub y0: f64,
    pub z0: f64,
    /// Cone sign on the evaluated sheet: `u - z0 ~ delta r`.
    pub delta: f64,
    /// Sign selecting the roots `phi^2 = (b1 + s sqrt(Delta)) / c1`, `psi^2 = (b2 + s sqrt(Delta)) / c2`,
    /// when both `c1` and `c2` are non-zero and the two rows agree on it.
    pub root_sign: Option<f64>,
    pub kind: Option<SingularType>,
    pub xi_roots: Option<(f64, f64)>,
    pub cone_fit_error: Option<f64>,
}

impl SingularPoint {
    pub(crate) fn located(x0: f64, y0: f64, z0: f64, delta: f64) -> Self {
        Self { x0, y0, z0, delta, root_sign: None, kind: None, xi_roots: None, cone_fit_error: None }
    }
}

/// Zeros of `f'` in `[a, b]`, by sign changes on a fine grid refined with bisection.
pub fn derivative_zeros(p: &Profile, a: f64, b: f64) -> Vec<f64> {
    if !(a < b) {
        return Vec::new();
    }
    let width = b - a;
    let cells = match p.period() {
        Some(t) => ((CELLS_PER_PERIOD as f64 * width / t).ceil() as usize).max(CELLS_PER_PERIOD),
        None => ((CELLS_PER_PERIOD as f64 * width).ceil() as usize).max(CELLS_PER_PERIOD),
    };
    let node = |i: usize| if i == cells { b } else { a + width * i as f64 / cells as f64 };
    let d: Vec<f64> = (0..=cells).map(|i| p.deriv(node(i))).collect();
    let dscale = d.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let flat = 1e-13 * dscale;
    let mut roots = Vec::new();
    for i in 0..=cells {
        if d[i].abs() <= flat {
            // accept a flat node only when it is a local minimum of |f'|
            let left = if i > 0 { d[i - 1].abs() } else { f64::INFINITY };
            let right = if i < cells { d[i + 1].abs() } else { f64::INFINITY };
            if d[i].abs() <= left && d[i].abs() <= right {
                roots.push(node(i));
            }
            continue;
        }
        if i < cells && d[i + 1].abs() > flat && d[i].signum() != d[i + 1].signum() {
            let (mut lo, mut hi) = (node(i), node(i + 1));
            let slo = d[i].signum();
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                if mid <= lo || mid >= hi {
                    break;
                }
                if p.deriv(mid).signum() == slo {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            roots.push(0.5 * (lo + hi));
        }
    }
    roots.sort_by(f64::total_cmp);
    roots.dedup_by(|x, y| (*x - *y).abs() <= 1e-9 * width.max(1.0));
    roots
}

/// Points of the window where `phi' = psi' = 0` and `zeta'` vanishes at the solved level,
/// each with its classification and the sign of the root formula attached.
pub fn find_special_points(s: &ImplicitSurface, window: &Window) -> Vec<SingularPoint> {
    let xs = derivative_zeros(s.phi(), window.x0, window.x1);
    let ys = derivative_zeros(s.psi(), window.y0, window.y1);
    let zeta_eq = s.zeta().coeffs();
    let tol = 1e-8 * zeta_eq.scale();
    let classification = classify(s.generating_matrix()).ok();
    let branch = s.branch(s.sheet());
    let mut out = Vec::new();
    for &x in &xs {
        for &y in &ys {
            let v = s.phi().value(x) * s.psi().value(y);
            if zeta_eq.slope_sq(v).abs() > tol {
                continue;
            }
            let Ok(z0) = s.solve_level(v, s.sheet(), None) else {
                continue;
            };
            let z0 = match &branch {
                Ok(iv) => snap_to_end(iv, z0),
                Err(_) => z0,
            };
            let mut p = SingularPoint::located(x, y, z0, cone_sign(&branch, z0));
            p.root_sign = root_sign(s, x, y);
            if let Some(c) = &classification {
                p.kind = Some(c.kind);
                p.xi_roots = c.xi_roots;
            }
            out.push(p);
        }
    }
    out
}

/// Sign `s` with `phi^2(x0) = (b1 + s sqrt(Delta)) / c1`, and likewise for `psi`, if the
/// two rows determine the same sign.
fn root_sign(s: &ImplicitSurface, x0: f64, y0: f64) -> Option<f64> {
    let disc = s.generating_matrix().discriminant().ok()?;
    if !(disc > 0.0) {
        return None;
    }
    let sq = disc.sqrt();
    let sign_for = |p: &Profile, t: f64| {
        let q = p.coeffs().to_phi_like();
        if q.c.abs() <= 1e-12 * q.scale() {
            return None;
        }
        let f2 = p.value(t).powi(2);
        Some(((q.c * f2 - q.b) / sq).signum())
    };
    match (sign_for(s.phi(), x0), sign_for(s.psi(), y0)) {
        (Some(a), Some(b)) if a == b => Some(a),
        _ => None,
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Classification {
    pub kind: SingularType,
    pub beta1: f64,
    pub beta2: f64,
    pub b3: f64,
    /// Roots of `beta1 xi^2 + 2 b3 xi + beta2 = 0`, ascending; absent when `beta1 = 0`.
    pub xi_roots: Option<(f64, f64)>,
    /// `4 (b3^2 - beta1 beta2)`.
    pub quadratic_discriminant: f64,
}

/// Singularity type from the signs of `beta1`, `beta2`, `b3`.
pub fn classify(a: &GeneratingMatrix) -> Result<Classification> {
    let m = a.entries();
    let scale = a.scale();
    let disc = a.discriminant()?;
    if !(disc > 1e-12 * scale * scale) {
        return Err(Error::NotApplicable(format!("classification needs Delta > 0, got {disc:e}")));
    }
    let (beta1, beta2) = (m[0][1], m[1][1]);
    let b3 = 0.5 * (m[0][1] + m[1][1] - m[2][1]);
    let quadratic_discriminant = 4.0 * (b3 * b3 - beta1 * beta2);
    let zero = |v: f64| v.abs() <= DEGENERATE_EPS * scale;
    let kind = if zero(beta1) || zero(beta2) || zero(b3) {
        SingularType::Degenerate
    } else if beta1 * beta2 < 0.0 {
        SingularType::Type2
    } else if beta1.signum() == b3.signum() {
        SingularType::Type1
    } else {
        SingularType::Type3
    };
    let xi_roots = if beta1 != 0.0 {
        let sq = (b3 * b3 - beta1 * beta2).max(0.0).sqrt();
        let q = -(b3 + sq.copysign(b3));
        let (r1, r2) = if q != 0.0 { (q / beta1, beta2 / q) } else { (0.0, 0.0) };
        Some((r1.min(r2), r1.max(r2)))
    } else {
        None
    };
    Ok(Classification { kind, beta1, beta2, b3, xi_roots, quadratic_discriminant })
}

/// Light-cone fit of `u - z0` on one sheet.
#[derive(Debug, Clone, PartialEq)]
pub struct ConeFit {
    pub sheet: i64,
    pub delta: f64,
    pub radii: Vec<f64>,
    /// `max |u - z0 - delta r| / r^2` on the circle of each radius.
    pub constants: Vec<f64>,
    /// Least-squares `C` in `u - z0 - delta r ~ C r^2` over all samples.
    pub c_fit: f64,
    /// Largest deviation from `delta r + c_fit r^2`.
    pub fit_error: f64,
}

impl ConeFit {
    /// `C(r)` does not grow by more than the factor `1 + tol` from one radius to the next.
    pub fn is_stable(&self, tol: f64) -> bool {
        self.constants.windows(2).all(|w| w[1] <= (1.0 + tol) * w[0])
    }
}

/// Samples `u` on circles around the special point, on the evaluated sheet and, when the
/// adjacent monotone branch of `G` also ends at `z0`, on that sheet too.
pub fn lightcone_fit<G: ImplicitGraph + ?Sized>(g: &G, p: &SingularPoint, radii: &[f64]) -> Result<Vec<ConeFit>> {
    if radii.is_empty() || radii.iter().any(|r| !(*r > 0.0)) {
        return Err(Error::InvalidParameter("radii must be positive".into()));
    }
    let here = g.sheet();
    let iv = g.branch(here)?;
    let at_hi = (p.z0 - iv.hi).abs() < (p.z0 - iv.lo).abs();
    let other = if at_hi { here + 1 } else { here - 1 };
    let mut sheets = vec![here];
    if let Ok(ov) = g.branch(other) {
        let end = if at_hi { ov.lo } else { ov.hi };
        if (end - p.z0).abs() <= 1e-9 * p.z0.abs().max(1.0) {
            sheets.push(other);
        }
    }
    sheets.into_iter().map(|sheet| fit_sheet(g, p, radii, sheet)).collect()
}

fn fit_sheet<G: ImplicitGraph + ?Sized>(g: &G, p: &SingularPoint, radii: &[f64], sheet: i64) -> Result<ConeFit> {
    const ANGLES: usize = 64;
    let mut rows = Vec::with_capacity(radii.len());
    for &r in radii {
        let mut d = Vec::with_capacity(ANGLES);
        for k in 0..ANGLES {
            let th = 2.0 * PI * (k as f64 + 0.5) / ANGLES as f64;
            let e = g.evaluate_on(p.x0 + r * th.cos(), p.y0 + r * th.sin(), sheet, Some(p.z0))?;
            d.push(e.z - p.z0);
        }
        rows.push((r, d));
    }
    let (rmin, dmin) = rows.iter().min_by(|a, b| a.0.total_cmp(&b.0)).expect("non-empty radii");
    let mean = dmin.iter().sum::<f64>() / dmin.len() as f64 / rmin;
    let delta = if mean >= 0.0 { 1.0 } else { -1.0 };

    let constants = rows
        .iter()
        .map(|(r, d)| d.iter().map(|v| (v - delta * r).abs()).fold(0.0, f64::max) / (r * r))
        .collect();
    let (num, den) = rows.iter().fold((0.0, 0.0), |(n, m), (r, d)| {
        let r2 = r * r;
        (n + d.iter().map(|v| (v - delta * r) * r2).sum::<f64>(), m + d.len() as f64 * r2 * r2)
    });
    let c_fit = num / den;
    let fit_error = rows
        .iter()
        .flat_map(|(r, d)| d.iter().map(move |v| (v - delta * r - c_fit * r * r).abs()))
        .fold(0.0, f64::max);
    Ok(ConeFit { sheet, delta, radii: radii.to_vec(), constants, c_fit, fit_error })
}

/// Numbers of maximal space-like and time-like arcs on a small circle around a singular
/// point. `space_like`/`time_like` count arcs of the circle taken modulo the antipodal map
/// (a half circle closed up cyclically); `full_*` count arcs of the whole circle.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SectorCensus {
    pub space_like: usize,
    pub time_like: usize,
    pub full_space_like: usize,
    pub full_time_like: usize,
}

pub fn sector_census<G: ImplicitGraph + ?Sized>(g: &G, p: &SingularPoint, r: f64) -> Result<SectorCensus> {
    if !(r > 0.0) {
        return Err(Error::InvalidParameter(format!("census radius {r}")));
    }
    let near = g.special_points(&Window::around(p.x0, p.y0, 2.0 * r));
    if let Some(q) = near.iter().find(|q| {
        let d = (q.x0 - p.x0).hypot(q.y0 - p.y0);
        d > 1e-9 && d <= 2.0 * r
    }) {
        return Err(Error::InvalidParameter(format!(
            "census radius {r} too large: another special point at ({}, {})",
            q.x0, q.y0
        )));
    }
    const SAMPLES: usize = 1440;
    let tags: Vec<Option<bool>> = (0..SAMPLES)
        .into_par_iter()
        .map(|k| {
            let th = 2.0 * PI * (k as f64 + 0.25) / SAMPLES as f64;
            match g.evaluate(p.x0 + r * th.cos(), p.y0 + r * th.sin(), Some(p.z0)) {
                Ok(e) => match e.causal {
                    Causal::SpaceLike => Some(true),
                    Causal::TimeLike => Some(false),
                    _ => None,
                },
                Err(_) => None,
            }
        })
        .collect();
    let (full_space_like, full_time_like) = count_arcs(&tags);
    let (space_like, time_like) = count_arcs(&tags[..SAMPLES / 2]);
    Ok(SectorCensus { space_like, time_like, full_space_like, full_time_like })
}

/// Maximal runs of equal tags in a cyclic sequence, skipping untagged samples.
fn count_arcs(tags: &[Option<bool>]) -> (usize, usize) {
    let seq: Vec<bool> = tags.iter().flatten().copied().collect();
    if seq.is_empty() {
        return (0, 0);
    }
    let changes = (0..seq.len()).filter(|&i| seq[i] != seq[(i + seq.len() - 1) % seq.len()]).count();
    if changes == 0 {
        return if seq[0] { (1, 0) } else { (0, 1) };
    }
    (changes / 2, changes / 2)
}

pub type Polyline = Vec<(f64, f64)>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
enum EdgeKey {
    /// Between nodes (i, j) and (i + 1, j).
    H(usize, usize),
    /// Between nodes (i, j) and (i, j + 1).
    V(usize, usize),
}

/// Curves `|grad u|^2 = 1` in the window, by marching squares on an `n x n` grid of
/// nodes. Cells touching a singular or failed node are skipped. Each crossing is
/// located on its grid edge by a bracketing root search of `|grad u|^2 - 1`.
pub fn trace_unit_gradient_levelset<G: ImplicitGraph + ?Sized>(g: &G, window: &Window, n: usize) -> Result<Vec<Polyline>> {
    let samples = sample_grid(g, window, n, n)?;
    let field = |idx: usize| match &samples[idx].eval {
        Ok(e) => e.grad_norm_sq().map_or(f64::NAN, |v| v - 1.0),
        Err(_) => f64::NAN,
    };
    let f: Vec<f64> = (0..samples.len()).map(field).collect();
    let at = |i: usize, j: usize| f[j * n + i];
    let node = |i: usize, j: usize| (window.node_x(i, n), window.node_y(j, n));
    let point_f = |x: f64, y: f64| match g.evaluate(x, y, None) {
        Ok(e) => e.grad_norm_sq().map_or(f64::NAN, |v| v - 1.0),
        Err(_) => f64::NAN,
    };

    let mut segments: Vec<(EdgeKey, EdgeKey)> = Vec::new();
    for j in 0..n - 1 {
        for i in 0..n - 1 {
            let v = [at(i, j), at(i + 1, j), at(i + 1, j + 1), at(i, j + 1)];
            if v.iter().any(|x| x.is_nan()) {
                continue;
            }
            let pos = v.map(|x| x >= 0.0);
            let bottom = EdgeKey::H(i, j);
            let right = EdgeKey::V(i + 1, j);
            let top = EdgeKey::H(i, j + 1);
            let left = EdgeKey::V(i, j);
            let mut crossed = Vec::with_capacity(4);
            if pos[0] != pos[1] {
                crossed.push(bottom);
            }
            if pos[1] != pos[2] {
                crossed.push(right);
            }
            if pos[2] != pos[3] {
                crossed.push(top);
            }
            if pos[3] != pos[0] {
                crossed.push(left);
            }
            match crossed.len() {
                2 => segments.push((crossed[0], crossed[1])),
                4 => {
                    let (cx, cy) = (window.node_x(i, n) + 0.5 * (window.x1 - window.x0) / (n - 1) as f64, window.node_y(j, n) + 0.5 * (window.y1 - window.y0) / (n - 1) as f64);
                    let centre = point_f(cx, cy);
                    if centre.is_nan() || (centre >= 0.0) == pos[0] {
                        segments.push((bottom, right));
                        segments.push((top, left));
                    } else {
                        segments.push((bottom, left));
                        segments.push((top, right));
                    }
                }
                _ => {}
            }
        }
    }

    let mut keys: Vec<EdgeKey> = segments.iter().flat_map(|(a, b)| [*a, *b]).collect();
    keys.sort_by_key(|k| match k {
        EdgeKey::H(i, j) => (0, *j, *i),
        EdgeKey::V(i, j) => (1, *j, *i),
    });
    keys.dedup();
    let located: Vec<(EdgeKey, (f64, f64))> = keys
        .par_iter()
        .map(|&k| {
            let ((x0, y0), (x1, y1), f0, f1) = match k {
                EdgeKey::H(i, j) => (node(i, j), node(i + 1, j), at(i, j), at(i + 1, j)),
                EdgeKey::V(i, j) => (node(i, j), node(i, j + 1), at(i, j), at(i, j + 1)),
            };
            let t = edge_root(|t| point_f(x0 + t * (x1 - x0), y0 + t * (y1 - y0)), f0, f1);
            (k, (x0 + t * (x1 - x0), y0 + t * (y1 - y0)))
        })
        .collect();
    let position: HashMap<EdgeKey, (f64, f64)> = located.into_iter().collect();

    Ok(stitch(&segments).into_iter().map(|chain| chain.iter().map(|k| position[k]).collect()).collect())
}

/// Root of `f` on `[0, 1]` given end values of opposite sign (Illinois variant of regula falsi).
fn edge_root<F: Fn(f64) -> f64>(f: F, f0: f64, f1: f64) -> f64 {
    let (mut a, mut b, mut fa, mut fb) = (0.0, 1.0, f0, f1);
    let mut t = fa / (fa - fb);
    let mut side = 0;
    for _ in 0..60 {
        t = (a * fb - b * fa) / (fb - fa);
        let ft = f(t);
        if ft.is_nan() {
            return fa / (fa - fb) * (b - a) + a;
        }
        if ft == 0.0 || (b - a) < 1e-14 {
            return t;
        }
        if (ft >= 0.0) == (fa >= 0.0) {
            a = t;
            fa = ft;
            if side == -1 {
                fb *= 0.5;
            }
            side = -1;
        } else {
            b = t;
            fb = ft;
            if side == 1 {
                fa *= 0.5;
            }
            side = 1;
        }
        if ft.abs() < 1e-14 {
            return t;
        }
    }
    t
}

/// Joins segments sharing an edge into chains of edge keys.
fn stitch(segments: &[(EdgeKey, EdgeKey)]) -> Vec<Vec<EdgeKey>> {
    let mut adj: HashMap<EdgeKey, Vec<usize>> = HashMap::new();
    for (s, (a, b)) in segments.iter().enumerate() {
        adj.entry(*a).or_default().push(s);
        adj.entry(*b).or_default().push(s);
    }
    let mut used = vec![false; segments.len()];
    let mut chains = Vec::new();
    let walk = |start: EdgeKey, first: usize, used: &mut Vec<bool>| {
        let mut chain = vec![start];
        let mut cur = start;
        let mut seg = Some(first);
        while let Some(s) = seg {
            used[s] = true;
            let (a, b) = segments[s];
            let next = if a == cur { b } else { a };
            chain.push(next);
            cur = next;
            seg = adj[&cur].iter().copied().find(|&t| !used[t]);
        }
        chain
    };
    // open chains first, starting from edges with a single segment
    for s in 0..segments.len() {
        if used[s] {
            continue;
        }
        let (a, b) = segments[s];
        let start = if adj[&a].len() == 1 {
            Some(a)
        } else if adj[&b].len() == 1 {
            Some(b)
        } else {
            None
        };
        if let Some(start) = start {
            chains.push(walk(start, s, &mut used));
        }
    }
    for s in 0..segments.len() {
        if !used[s] {
            chains.push(walk(segments[s].0, s, &mut used));
        }
    }
    chains
}

/// Agreement of traced level curves with the rays `y - y0 = +-sqrt(xi) (x - x0)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TangentCheck {
    /// Largest angle (degrees) between a vertex direction and the nearest expected ray.
    pub max_deviation_deg: f64,
    /// Expected rays with at least one vertex within `tol_deg`.
    pub rays_matched: usize,
    pub rays_expected: usize,
    pub vertices_checked: usize,
}

/// Compares vertices at distance in `[r_in, r_out]` from `(x0, y0)` against the rays of
/// slopes `+-sqrt(xi)` for each positive root `xi`.
pub fn tangent_check(polylines: &[Polyline], x0: f64, y0: f64, xi: &[f64], r_in: f64, r_out: f64, tol_deg: f64) -> TangentCheck {
    let mut rays = Vec::new();
    for &x in xi.iter().filter(|x| **x > 0.0) {
        let a = x.sqrt().atan();
        rays.extend([a, PI - a, -a, a - PI]);
    }
    let angular = |u: f64, v: f64| {
        let d = (u - v).rem_euclid(2.0 * PI);
        d.min(2.0 * PI - d)
    };
    let mut matched = vec![false; rays.len()];
    let mut max_dev = 0.0f64;
    let mut checked = 0;
    for &(x, y) in polylines.iter().flatten() {
        let r = (x - x0).hypot(y - y0);
        if r < r_in || r > r_out {
            continue;
        }
        checked += 1;
        let th = (y - y0).atan2(x - x0);
        let (best, dev) = rays
            .iter()
            .enumerate()
            .map(|(i, a)| (i, angular(th, *a)))
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .unwrap_or((usize::MAX, PI));
        let dev = dev.to_degrees();
        max_dev = max_dev.max(dev);
        if best != usize::MAX && dev <= tol_deg {
            matched[best] = true;
        }
    }
    TangentCheck {
        max_deviation_deg: max_dev,
        rays_matched: matched.iter().filter(|m| **m).count(),
        rays_expected: rays.len(),
        vertices_checked: checked,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_PI_2;

    fn sinsin1() -> ImplicitSurface {
        let m = GeneratingMatrix::new([[1.0, 0.0, 0.0], [1.0, 0.0, 0.0], [0.0, 1.0, 1.0]]).unwrap();
        ImplicitSurface::build_from_matrix(&m, None).unwrap()
    }

    #[test]
    fn sinsin_special_points() {
        let s = sinsin1();
        let w = Window::new(0.0, 2.0 * PI, 0.0, 2.0 * PI).unwrap();
        let pts = find_special_points(&s, &w);
        assert_eq!(pts.len(), 4);
        let p = pts.iter().find(|p| (p.x0 - FRAC_PI_2).abs() < 1e-12 && (p.y0 - FRAC_PI_2).abs() < 1e-12).unwrap();
        assert!((p.z0 - FRAC_PI_2).abs() < 1e-12);
        assert_eq!(p.delta, -1.0);
        assert_eq!(p.kind, Some(SingularType::Degenerate));
        assert_eq!(p.root_sign, None);
    }

    #[test]
    fn sinsin_cone_goes_down() {
        let s = sinsin1();
        let p = SingularPoint::located(FRAC_PI_2, FRAC_PI_2, FRAC_PI_2, -1.0);
        let fits = lightcone_fit(&s, &p, &[1e-2, 5e-3, 2.5e-3]).unwrap();
        assert_eq!(fits.len(), 2);
        assert_eq!(fits[0].delta, -1.0);
        assert_eq!(fits[1].delta, 1.0);
        for f in &fits {
            assert!(f.is_stable(0.25), "{:?}", f.constants);
        }
    }

    #[test]
    fn classification_patterns() {
        let sinsin = GeneratingMatrix::new([[1.0, 0.0, 0.0], [1.0, 0.0, 0.0], [0.0, 1.0, 1.0]]).unwrap();
        let c = classify(&sinsin).unwrap();
        assert_eq!(c.kind, SingularType::Degenerate);
        assert_eq!((c.beta1, c.beta2, c.b3), (0.0, 0.0, -0.5));
        let tanh = GeneratingMatrix::new([[1.0, 0.5, 1.0], [1.0, 0.5, 1.0], [0.5, 2.0, 0.5]]).unwrap();
        assert!(matches!(classify(&tanh), Err(Error::NotApplicable(_))));
    }

    #[test]
    fn arc_counting() {
        let t = Some(true);
        let f = Some(false);
        assert_eq!(count_arcs(&[t, t, t]), (1, 0));
        assert_eq!(count_arcs(&[f, None, f]), (0, 1));
        assert_eq!(count_arcs(&[t, f, f, t]), (1, 1));
        assert_eq!(count_arcs(&[t, f, t, f]), (2, 2));
    }

    #[test]
    fn stitch_closes_loops() {
        let segs = [
            (EdgeKey::H(0, 0), EdgeKey::V(1, 0)),
            (EdgeKey::V(1, 0), EdgeKey::H(0, 1)),
            (EdgeKey::H(0, 1), EdgeKey::V(0, 0)),
            (EdgeKey::V(0, 0), EdgeKey::H(0, 0)),
            (EdgeKey::H(5, 5), EdgeKey::V(6, 5)),
        ];
        let chains = stitch(&segs);
        assert_eq!(chains.len(), 2);
        assert_eq!(chains[0].len(), 2);
        assert_eq!(chains[1].len(), 5);
    }

    #[test]
    fn edge_root_linear() {
        let t = edge_root(|t| t - 0.3, -0.3, 0.7);
        assert!((t - 0.3).abs() < 1e-14);
    }
}
