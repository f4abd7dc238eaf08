//! One-variable profiles `f` with `f'^2 = P(f^2)`, `P` quadratic.
//!
//! Two sign conventions are in use for the coefficients: the `phi`-like form
//! `f'^2 = a - 2 b f^2 + c f^4` and the `zeta`-like form `f'^2 = c + 2 b f^2 + a f^4`.
//! Internally everything is phi-like; a zeta-like triple `(a, b, c)` maps to `(c, -b, a)`.
//!
//! [`solve_profile`] picks a closed form (scaled `sn`/`cn`/`dn`/`sc`, `tanh`, `tan`,
//! trigonometric or hyperbolic) from the root structure of `P(s)` in `s = f^2`.
//! [`integrate_profile_numeric`] integrates `f'' = 2 f (c f^2 - b)` with a fixed-step
//! RK4 scheme and is used as an independent check of the closed forms.

use std::f64::consts::{FRAC_PI_2, PI};
use std::sync::Arc;

use crate::elliptic::{complete_k, jacobi_sn_cn_dn, Modulus};
use crate::error::{Error, Result};

const ROOT_EPS: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Convention {
    PhiLike,
    ZetaLike,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuarticCoeffs {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub convention: Convention,
}

impl QuarticCoeffs {
    /// `f'^2 = a - 2 b f^2 + c f^4`
    pub fn phi_like(a: f64, b: f64, c: f64) -> Self {
        Self { a, b, c, convention: Convention::PhiLike }
    }

    /// `f'^2 = c + 2 b f^2 + a f^4`
    pub fn zeta_like(a: f64, b: f64, c: f64) -> Self {
        Self { a, b, c, convention: Convention::ZetaLike }
    }

    /// The same equation in the phi-like convention.
    pub fn to_phi_like(self) -> Self {
        match self.convention {
            Convention::PhiLike => self,
            Convention::ZetaLike => Self::phi_like(self.c, -self.b, self.a),
        }
    }

    /// The same equation in the zeta-like convention.
    pub fn to_zeta_like(self) -> Self {
        match self.convention {
            Convention::ZetaLike => self,
            Convention::PhiLike => Self::zeta_like(self.c, -self.b, self.a),
        }
    }

    /// `P(s)` in the phi-like form.
    pub fn poly(&self, s: f64) -> f64 {
        let p = self.to_phi_like();
        p.a - 2.0 * p.b * s + p.c * s * s
    }

    /// `f'^2` given `f`.
    pub fn slope_sq(&self, f: f64) -> f64 {
        self.poly(f * f)
    }

    /// `f''` given `f`, from differentiating the first-order equation.
    pub fn second(&self, f: f64) -> f64 {
        let p = self.to_phi_like();
        2.0 * f * (p.c * f * f - p.b)
    }

    /// `b^2 - a c`, the same in both conventions.
    pub fn discriminant(&self) -> f64 {
        self.b * self.b - self.a * self.c
    }

    pub fn scale(&self) -> f64 {
        self.a.abs().max(self.b.abs()).max(self.c.abs())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ProfileInit {
    /// `f(0) = 0`, `f'(0) > 0`.
    AtZero,
    /// `f(0) = sqrt(s)` where `s = (b + delta sqrt(Delta)) / c` is a root of `P`
    /// (for `c = 0` the single root `a / 2b` is used and `delta` is ignored).
    AtTurningPoint { delta: f64 },
}

/// A reasonable initial condition: a zero when `P(0) > 0`, otherwise the smallest
/// positive turning value that bounds a region where `P > 0`.
pub fn default_init(q: QuarticCoeffs) -> ProfileInit {
    let p = q.to_phi_like();
    let eps = ROOT_EPS * p.scale();
    if p.a > eps {
        return ProfileInit::AtZero;
    }
    for delta in [-1.0, 1.0] {
        let init = ProfileInit::AtTurningPoint { delta };
        if closed_form(p, init).is_ok() {
            return init;
        }
    }
    ProfileInit::AtZero
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Shape {
    Sn,
    Cn,
    Dn,
    Sc,
    Tanh,
    Tan,
    Sin,
    Sinh,
    Cosh,
    Sech,
    Exp,
    Linear,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FormTag {
    SnScaled,
    CnScaled,
    DnScaled,
    ScScaled,
    Tanh,
    Trig,
    ExpLike,
    Linear,
    Numeric,
}

impl Shape {
    pub fn tag(self) -> FormTag {
        match self {
            Shape::Sn => FormTag::SnScaled,
            Shape::Cn => FormTag::CnScaled,
            Shape::Dn => FormTag::DnScaled,
            Shape::Sc => FormTag::ScScaled,
            Shape::Tanh => FormTag::Tanh,
            Shape::Tan | Shape::Sin => FormTag::Trig,
            Shape::Sinh | Shape::Cosh | Shape::Sech | Shape::Exp => FormTag::ExpLike,
            Shape::Linear => FormTag::Linear,
        }
    }
}

/// How an end of a monotone interval behaves.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum End {
    /// Finite end where the profile attains a turning value.
    Closed,
    /// Finite end at a pole of the profile.
    Pole,
    Infinite,
}

/// Maximal interval on which a profile is strictly monotone.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
    pub lo_end: End,
    pub hi_end: End,
    pub increasing: bool,
}

impl Interval {
    pub fn contains(&self, t: f64) -> bool {
        t >= self.lo && t <= self.hi
    }
}

/// `amp * J(omega t + phase)` for one of the elementary shapes.
#[derive(Debug, Clone, Copy, PartialEq)]
struct Closed {
    shape: Shape,
    amp: f64,
    omega: f64,
    modulus: Modulus,
    /// `K(k)` for the Jacobi shapes, `pi/2` for the circular ones.
    quarter: f64,
    phase: f64,
}

impl Closed {
    fn new(shape: Shape, amp: f64, omega: f64, modulus: Option<Modulus>, phase: Phase) -> Result<Self> {
        let modulus = modulus.unwrap_or(Modulus::new(0.0)?);
        let quarter = match shape {
            Shape::Sn | Shape::Cn | Shape::Dn | Shape::Sc => complete_k(modulus)?,
            _ => FRAC_PI_2,
        };
        let phase = match phase {
            Phase::Zero => 0.0,
            Phase::Quarter => quarter,
            Phase::MinusQuarter => -quarter,
        };
        Ok(Self { shape, amp, omega, modulus, quarter, phase })
    }

    fn jet(&self, t: f64) -> [f64; 3] {
        let u = self.omega * t + self.phase;
        let (a, w) = (self.amp, self.omega);
        let k2 = self.modulus.k2();
        match self.shape {
            Shape::Sn => {
                let (s, c, d) = jacobi_sn_cn_dn(u, self.modulus);
                [a * s, a * w * c * d, -a * w * w * s * (d * d + k2 * c * c)]
            }
            Shape::Cn => {
                let (s, c, d) = jacobi_sn_cn_dn(u, self.modulus);
                [a * c, -a * w * s * d, -a * w * w * c * (d * d - k2 * s * s)]
            }
            Shape::Dn => {
                let (s, c, d) = jacobi_sn_cn_dn(u, self.modulus);
                [a * d, -a * w * k2 * s * c, -a * w * w * k2 * d * (c * c - s * s)]
            }
            Shape::Sc => {
                let (s, c, d) = jacobi_sn_cn_dn(u, self.modulus);
                [a * s / c, a * w * d / (c * c), a * w * w * s * (2.0 * d * d - k2 * c * c) / (c * c * c)]
            }
            Shape::Tanh => {
                let th = u.tanh();
                let sech2 = 1.0 - th * th;
                [a * th, a * w * sech2, -2.0 * a * w * w * th * sech2]
            }
            Shape::Tan => {
                let tn = u.tan();
                let sec2 = 1.0 + tn * tn;
                [a * tn, a * w * sec2, 2.0 * a * w * w * tn * sec2]
            }
            Shape::Sin => {
                let (s, c) = u.sin_cos();
                [a * s, a * w * c, -a * w * w * s]
            }
            Shape::Sinh => [a * u.sinh(), a * w * u.cosh(), a * w * w * u.sinh()],
            Shape::Cosh => [a * u.cosh(), a * w * u.sinh(), a * w * w * u.cosh()],
            Shape::Sech => {
                let sech = 1.0 / u.cosh();
                let th = u.tanh();
                [a * sech, -a * w * sech * th, a * w * w * sech * (th * th - sech * sech)]
            }
            Shape::Exp => {
                let e = u.exp();
                [a * e, a * w * e, a * w * w * e]
            }
            Shape::Linear => [a * t, a, 0.0],
        }
    }

    fn period(&self) -> Option<f64> {
        let w = self.omega.abs();
        match self.shape {
            Shape::Sn | Shape::Cn => Some(4.0 * self.quarter / w),
            Shape::Dn | Shape::Sc => Some(2.0 * self.quarter / w),
            Shape::Sin => Some(2.0 * PI / w),
            Shape::Tan => Some(PI / w),
            _ => None,
        }
    }

    /// First turning point (in `u`) and the spacing between consecutive ones.
    fn turning_lattice(&self) -> Option<(f64, f64)> {
        let q = self.quarter;
        match self.shape {
            Shape::Sn => Some((q, 2.0 * q)),
            Shape::Cn => Some((0.0, 2.0 * q)),
            Shape::Dn => Some((0.0, q)),
            Shape::Sin => Some((q, 2.0 * q)),
            _ => None,
        }
    }

    fn pole_lattice(&self) -> Option<(f64, f64)> {
        let q = self.quarter;
        match self.shape {
            Shape::Sc | Shape::Tan => Some((q, 2.0 * q)),
            _ => None,
        }
    }

    fn turning_points(&self) -> Vec<f64> {
        match self.shape {
            Shape::Cosh | Shape::Sech => vec![-self.phase / self.omega],
            _ => {
                let (Some((first, step)), Some(period)) = (self.turning_lattice(), self.period()) else {
                    return Vec::new();
                };
                let mut out: Vec<f64> = (-8..8)
                    .map(|j| (first + j as f64 * step - self.phase) / self.omega)
                    .filter(|t| *t >= -1e-12 * period && *t < period * (1.0 - 1e-12))
                    .map(|t| t.max(0.0))
                    .collect();
                out.sort_by(f64::total_cmp);
                out
            }
        }
    }

    fn monotone_interval(&self, sheet: i64) -> Result<Interval> {
        let w = self.omega;
        let increasing_at = |t: f64| self.jet(t)[1] > 0.0;
        if let Some((first, step)) = self.turning_lattice() {
            let j0 = ((self.phase - first) / step + 1e-12).floor() as i64 + sheet;
            let lo = (first + j0 as f64 * step - self.phase) / w;
            let hi = (first + (j0 + 1) as f64 * step - self.phase) / w;
            let increasing = increasing_at(0.5 * (lo + hi));
            return Ok(Interval { lo, hi, lo_end: End::Closed, hi_end: End::Closed, increasing });
        }
        if let Some((first, step)) = self.pole_lattice() {
            let j0 = ((self.phase - first) / step).floor() as i64 + sheet;
            let lo = (first + j0 as f64 * step - self.phase) / w;
            let hi = (first + (j0 + 1) as f64 * step - self.phase) / w;
            let increasing = increasing_at(0.5 * (lo + hi));
            return Ok(Interval { lo, hi, lo_end: End::Pole, hi_end: End::Pole, increasing });
        }
        match (self.shape, sheet) {
            (Shape::Cosh | Shape::Sech, 0) => {
                let t0 = -self.phase / w;
                Ok(Interval { lo: t0, hi: f64::INFINITY, lo_end: End::Closed, hi_end: End::Infinite, increasing: increasing_at(t0 + 1.0) })
            }
            (Shape::Cosh | Shape::Sech, -1) => {
                let t0 = -self.phase / w;
                Ok(Interval { lo: f64::NEG_INFINITY, hi: t0, lo_end: End::Infinite, hi_end: End::Closed, increasing: increasing_at(t0 - 1.0) })
            }
            (Shape::Cosh | Shape::Sech, s) => Err(Error::NoBranch(s)),
            (_, 0) => Ok(Interval {
                lo: f64::NEG_INFINITY,
                hi: f64::INFINITY,
                lo_end: End::Infinite,
                hi_end: End::Infinite,
                increasing: increasing_at(0.0),
            }),
            (_, s) => Err(Error::NoBranch(s)),
        }
    }
}

#[derive(Debug, Clone, Copy)]
enum Phase {
    Zero,
    Quarter,
    MinusQuarter,
}

/// Samples of a numerically integrated profile on a uniform grid.
#[derive(Debug, Clone, PartialEq)]
struct NumericTable {
    t0: f64,
    h: f64,
    values: Vec<[f64; 2]>,
    period: Option<f64>,
}

impl NumericTable {
    fn value_slope(&self, t: f64) -> Option<[f64; 2]> {
        let x = (t - self.t0) / self.h;
        if !(x >= 0.0) || x > (self.values.len() - 1) as f64 {
            return None;
        }
        let i = (x.floor() as usize).min(self.values.len() - 2);
        let s = x - i as f64;
        let [f0, d0] = self.values[i];
        let [f1, d1] = self.values[i + 1];
        let h = self.h;
        // cubic Hermite on [t_i, t_{i+1}]
        let s2 = s * s;
        let s3 = s2 * s;
        let h00 = 2.0 * s3 - 3.0 * s2 + 1.0;
        let h10 = s3 - 2.0 * s2 + s;
        let h01 = -2.0 * s3 + 3.0 * s2;
        let h11 = s3 - s2;
        let f = h00 * f0 + h10 * h * d0 + h01 * f1 + h11 * h * d1;
        let dh00 = 6.0 * s2 - 6.0 * s;
        let dh10 = 3.0 * s2 - 4.0 * s + 1.0;
        let dh01 = -6.0 * s2 + 6.0 * s;
        let dh11 = 3.0 * s2 - 2.0 * s;
        let d = (dh00 * f0 + dh01 * f1) / h + dh10 * d0 + dh11 * d1;
        Some([f, d])
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Repr {
    Closed(Closed),
    Numeric(Arc<NumericTable>),
}

/// A solution of one profile equation, centred by its initial condition.
#[derive(Debug, Clone, PartialEq)]
pub struct Profile {
    coeffs: QuarticCoeffs,
    repr: Repr,
}

impl Profile {
    /// `f(t) = exp(rate t)`, the profile with `f'^2 = rate^2 f^2`. It has neither
    /// a zero nor a turning point, so [`solve_profile`] cannot produce it.
    pub fn exponential(rate: f64) -> Result<Self> {
        if rate == 0.0 || !rate.is_finite() {
            return Err(Error::InvalidParameter(format!("exponential rate {rate}")));
        }
        Ok(Self {
            coeffs: QuarticCoeffs::phi_like(0.0, -0.5 * rate * rate, 0.0),
            repr: Repr::Closed(Closed::new(Shape::Exp, 1.0, rate, None, Phase::Zero)?),
        })
    }

    pub fn coeffs(&self) -> QuarticCoeffs {
        self.coeffs
    }

    /// `[f, f', f'']` at `t`. Numeric profiles return NaN outside their table.
    pub fn jet(&self, t: f64) -> [f64; 3] {
        match &self.repr {
            Repr::Closed(c) => c.jet(t),
            Repr::Numeric(table) => match table.value_slope(t) {
                Some([f, d]) => [f, d, self.coeffs.second(f)],
                None => [f64::NAN; 3],
            },
        }
    }

    pub fn value(&self, t: f64) -> f64 {
        self.jet(t)[0]
    }

    pub fn deriv(&self, t: f64) -> f64 {
        self.jet(t)[1]
    }

    pub fn second_deriv(&self, t: f64) -> f64 {
        self.jet(t)[2]
    }

    pub fn period(&self) -> Option<f64> {
        match &self.repr {
            Repr::Closed(c) => c.period(),
            Repr::Numeric(t) => t.period,
        }
    }

    pub fn form_tag(&self) -> FormTag {
        match &self.repr {
            Repr::Closed(c) => c.shape.tag(),
            Repr::Numeric(_) => FormTag::Numeric,
        }
    }

    pub fn shape(&self) -> Option<Shape> {
        match &self.repr {
            Repr::Closed(c) => Some(c.shape),
            Repr::Numeric(_) => None,
        }
    }

    /// Modulus of the Jacobi shapes.
    pub fn modulus(&self) -> Option<Modulus> {
        match &self.repr {
            Repr::Closed(c) if matches!(c.shape, Shape::Sn | Shape::Cn | Shape::Dn | Shape::Sc) => Some(c.modulus),
            _ => None,
        }
    }

    /// Turning points in one period `[0, T)` (or the single one of `cosh`/`sech`).
    pub fn turning_points(&self) -> Vec<f64> {
        match &self.repr {
            Repr::Closed(c) => c.turning_points(),
            Repr::Numeric(_) => Vec::new(),
        }
    }

    /// Monotone interval number `sheet`, counted from the one whose left end is
    /// the last turning point (or pole) at or before `t = 0`.
    pub fn monotone_interval(&self, sheet: i64) -> Result<Interval> {
        match &self.repr {
            Repr::Closed(c) => c.monotone_interval(sheet),
            Repr::Numeric(_) => Err(Error::Unsupported("monotone intervals of a numeric profile".into())),
        }
    }
}

/// Closed-form profile for the coefficients and initial condition.
pub fn solve_profile(q: QuarticCoeffs, init: ProfileInit) -> Result<Profile> {
    let p = q.to_phi_like();
    if !(p.a.is_finite() && p.b.is_finite() && p.c.is_finite()) {
        return Err(Error::Domain("non-finite coefficients".into()));
    }
    if p.scale() == 0.0 {
        return Err(Error::NoRealSolution("P is identically zero".into()));
    }
    if let ProfileInit::AtTurningPoint { delta } = init {
        if delta.abs() != 1.0 {
            return Err(Error::InvalidParameter(format!("delta must be +-1, got {delta}")));
        }
    }
    Ok(Profile { coeffs: q, repr: Repr::Closed(closed_form(p, init)?) })
}

fn closed_form(p: QuarticCoeffs, init: ProfileInit) -> Result<Closed> {
    let (a, b, c) = (p.a, p.b, p.c);
    let scale = p.scale();
    let eps = ROOT_EPS * scale;
    let at_zero = matches!(init, ProfileInit::AtZero);
    let no_turning = || Error::InconsistentInit("no admissible turning point".into());
    let no_zero = || Error::InconsistentInit("P(0) < 0, the profile cannot vanish".into());

    if c.abs() <= eps {
        // P(s) = a - 2 b s
        if b.abs() <= eps {
            if a > eps {
                return if at_zero { Closed::new(Shape::Linear, a.sqrt(), 1.0, None, Phase::Zero) } else { Err(no_turning()) };
            }
            return Err(Error::NoRealSolution("P is a non-positive constant".into()));
        }
        let omega = (2.0 * b.abs()).sqrt();
        if b > 0.0 {
            if a <= eps {
                return Err(Error::NoRealSolution("P(s) <= 0 for all s >= 0".into()));
            }
            let amp = (a / (2.0 * b)).sqrt();
            let phase = if at_zero { Phase::Zero } else { Phase::Quarter };
            return Closed::new(Shape::Sin, amp, omega, None, phase);
        }
        if a > eps {
            return if at_zero {
                Closed::new(Shape::Sinh, (a / (2.0 * b.abs())).sqrt(), omega, None, Phase::Zero)
            } else {
                Err(no_turning())
            };
        }
        if a < -eps {
            return if at_zero {
                Err(no_zero())
            } else {
                Closed::new(Shape::Cosh, (a / (2.0 * b)).sqrt(), omega, None, Phase::Zero)
            };
        }
        return Err(Error::Unsupported("exponential profile exp(mu t) has no zero or turning point".into()));
    }

    if a.abs() <= eps {
        // P(s) = s (c s - 2 b): sech, or the unbounded reciprocal forms
        let other = 2.0 * b / c;
        if c < 0.0 && b < 0.0 {
            return match init {
                ProfileInit::AtZero => Err(Error::InconsistentInit("f = 0 is an equilibrium".into())),
                ProfileInit::AtTurningPoint { delta } => {
                    let disc_root = b.abs();
                    let chosen = (b + delta * disc_root) / c;
                    if chosen <= eps / scale.max(1.0) {
                        Err(Error::InconsistentInit("f = 0 is an equilibrium".into()))
                    } else {
                        Closed::new(Shape::Sech, other.sqrt(), (-2.0 * b).sqrt(), None, Phase::Zero)
                    }
                }
            };
        }
        if c > 0.0 {
            let name = if b > eps {
                "1/sin-type"
            } else if b < -eps {
                "1/sinh-type"
            } else {
                "1/t-type"
            };
            return Err(Error::Unsupported(format!("unbounded {name} profile (P(0) = 0, c > 0)")));
        }
        return Err(Error::NoRealSolution("P(s) <= 0 for all s >= 0".into()));
    }

    let disc = b * b - a * c;
    if disc.abs() <= ROOT_EPS * scale * scale {
        let s0 = b / c;
        if c < 0.0 {
            return Err(Error::NoRealSolution("P(s) = c (s - s0)^2 <= 0".into()));
        }
        if !at_zero {
            return Err(Error::InconsistentInit("double root: the turning value is an equilibrium".into()));
        }
        let shape = if s0 > 0.0 { Shape::Tanh } else { Shape::Tan };
        return Closed::new(shape, s0.abs().sqrt(), (c * s0.abs()).sqrt(), None, Phase::Zero);
    }
    if disc < 0.0 {
        return Err(if c > 0.0 {
            Error::Unsupported("P has complex roots and is positive everywhere".into())
        } else {
            Error::NoRealSolution("P(s) < 0 for all s".into())
        });
    }

    let sq = disc.sqrt();
    let (r_lo, r_hi) = {
        let x = (b - sq) / c;
        let y = (b + sq) / c;
        if x < y { (x, y) } else { (y, x) }
    };
    let upper_selected = match init {
        ProfileInit::AtTurningPoint { delta } => Some((delta > 0.0) == (c > 0.0)),
        ProfileInit::AtZero => None,
    };

    if c > 0.0 {
        if r_lo > 0.0 {
            let modulus = Modulus::new((r_lo / r_hi).sqrt())?;
            let omega = (c * r_hi).sqrt();
            let phase = match upper_selected {
                None => Phase::Zero,
                Some(false) => Phase::Quarter,
                Some(true) => return Err(Error::Unsupported("unbounded branch beyond the larger root".into())),
            };
            return Closed::new(Shape::Sn, r_lo.sqrt(), omega, Some(modulus), phase);
        }
        if r_hi < 0.0 {
            if !at_zero {
                return Err(no_turning());
            }
            let modulus = Modulus::from_complement((r_hi / r_lo).sqrt())?;
            return Closed::new(Shape::Sc, r_hi.abs().sqrt(), (c * r_lo.abs()).sqrt(), Some(modulus), Phase::Zero);
        }
        return Err(if at_zero {
            no_zero()
        } else {
            Error::Unsupported("unbounded nc-type branch beyond the positive root".into())
        });
    }

    if r_lo < 0.0 && r_hi > 0.0 {
        let modulus = Modulus::new((r_hi / (r_hi - r_lo)).sqrt())?;
        let omega = (c.abs() * (r_hi - r_lo)).sqrt();
        let phase = match upper_selected {
            None => Phase::MinusQuarter,
            Some(true) => Phase::Zero,
            Some(false) => return Err(no_turning()),
        };
        return Closed::new(Shape::Cn, r_hi.sqrt(), omega, Some(modulus), phase);
    }
    if r_lo > 0.0 {
        if at_zero {
            return Err(no_zero());
        }
        let modulus = Modulus::new(((r_hi - r_lo) / r_hi).sqrt())?;
        let omega = (c.abs() * r_hi).sqrt();
        let phase = if upper_selected == Some(true) { Phase::Zero } else { Phase::Quarter };
        return Closed::new(Shape::Dn, r_hi.sqrt(), omega, Some(modulus), phase);
    }
    Err(Error::NoRealSolution("P(s) < 0 for all s > 0".into()))
}

/// Numerical solution of `f'' = 2 f (c f^2 - b)` on `[-t_max, t_max]` by classical
/// RK4 with step `period / 4096` (or `t_max / 4096` for aperiodic profiles).
pub fn integrate_profile_numeric(q: QuarticCoeffs, init: ProfileInit, t_max: f64) -> Result<Profile> {
    if !(t_max > 0.0) || !t_max.is_finite() {
        return Err(Error::InvalidParameter(format!("t_max = {t_max}")));
    }
    let p = q.to_phi_like();
    // the closed-form analysis validates the initial condition and supplies the period
    let shape = closed_form(p, init)?;
    let f0 = match init {
        ProfileInit::AtZero => 0.0,
        ProfileInit::AtTurningPoint { .. } => shape.jet(0.0)[0],
    };
    let d0 = match init {
        ProfileInit::AtZero => p.a.max(0.0).sqrt(),
        ProfileInit::AtTurningPoint { .. } => 0.0,
    };
    let period = shape.period();
    let h = period.unwrap_or(t_max) / 4096.0;
    if !(h > 1e-12) {
        return Err(Error::StepUnderflow(h));
    }
    let n = (t_max / h).ceil() as usize;
    let rhs = |y: [f64; 2]| [y[1], 2.0 * y[0] * (p.c * y[0] * y[0] - p.b)];
    let march = |step: f64| {
        let mut out = Vec::with_capacity(n + 1);
        let mut y = [f0, d0];
        out.push(y);
        for _ in 0..n {
            let k1 = rhs(y);
            let k2 = rhs([y[0] + 0.5 * step * k1[0], y[1] + 0.5 * step * k1[1]]);
            let k3 = rhs([y[0] + 0.5 * step * k2[0], y[1] + 0.5 * step * k2[1]]);
            let k4 = rhs([y[0] + step * k3[0], y[1] + step * k3[1]]);
            y = [
                y[0] + step / 6.0 * (k1[0] + 2.0 * k2[0] + 2.0 * k3[0] + k4[0]),
                y[1] + step / 6.0 * (k1[1] + 2.0 * k2[1] + 2.0 * k3[1] + k4[1]),
            ];
            if !(y[0].abs() < 1e8) {
                break;
            }
            out.push(y);
        }
        out
    };
    let forward = march(h);
    let backward = march(-h);
    let nb = backward.len() - 1;
    let mut values: Vec<[f64; 2]> = backward.into_iter().skip(1).rev().collect();
    values.extend(forward);
    let table = NumericTable { t0: -(nb as f64) * h, h, values, period };
    Ok(Profile { coeffs: q, repr: Repr::Numeric(Arc::new(table)) })
}

/// Generating conditions of the zero-discriminant family:
/// `1/b1 + 1/b2 + 1/b3 = 0` and `b1 b2 b3 = -alpha1^2 alpha2^2 alpha3^2`.
pub fn tanh_family_conditions(b: [f64; 3], alpha_sq: [f64; 3], tol: f64) -> Result<bool> {
    if b.contains(&0.0) {
        return Err(Error::Domain("tanh family needs all b_i != 0".into()));
    }
    let inv_sum = b.iter().map(|v| 1.0 / v).sum::<f64>();
    let inv_scale = b.iter().map(|v| 1.0 / v.abs()).fold(0.0, f64::max);
    let prod = b[0] * b[1] * b[2];
    let target = -alpha_sq[0] * alpha_sq[1] * alpha_sq[2];
    let first = inv_sum.abs() <= tol * inv_scale;
    let second = (prod - target).abs() <= tol * prod.abs().max(target.abs()).max(f64::MIN_POSITIVE);
    Ok(first && second)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::elliptic::sn;

    fn residuals(p: &Profile, t0: f64, t1: f64) -> (f64, f64) {
        let q = p.coeffs();
        let scale = q.scale().max(1.0);
        let mut first = 0.0f64;
        let mut second = 0.0f64;
        for i in 0..=1000 {
            let t = t0 + (t1 - t0) * i as f64 / 1000.0;
            let [f, d, dd] = p.jet(t);
            first = first.max((d * d - q.slope_sq(f)).abs() / scale);
            second = second.max((dd - q.second(f)).abs() / scale);
        }
        (first, second)
    }

    #[test]
    fn sine_profile() {
        let p = solve_profile(QuarticCoeffs::phi_like(1.0, 0.5, 0.0), ProfileInit::AtZero).unwrap();
        assert_eq!(p.shape(), Some(Shape::Sin));
        assert!((p.period().unwrap() - 2.0 * PI).abs() < 1e-14);
        for t in [0.1, 1.0, 2.5, -4.0] {
            assert!((p.value(t) - t.sin()).abs() < 1e-15);
        }
    }

    #[test]
    fn tanh_profile_from_double_root() {
        let p = solve_profile(QuarticCoeffs::phi_like(1.0, 1.0, 1.0), ProfileInit::AtZero).unwrap();
        assert_eq!(p.form_tag(), FormTag::Tanh);
        assert_eq!(p.period(), None);
        assert!(p.turning_points().is_empty());
        for t in [-3.0, -0.2, 0.4, 2.0] {
            assert!((p.value(t) - t.tanh()).abs() < 1e-15);
        }
        assert!(solve_profile(QuarticCoeffs::phi_like(1.0, 1.0, 1.0), ProfileInit::AtTurningPoint { delta: 1.0 }).is_err());
    }

    #[test]
    fn sn_row_matches_scaled_sn() {
        let k: f64 = 0.8;
        let kp2 = 1.0 - k * k;
        let q = QuarticCoeffs::phi_like(1.0 / kp2, (1.0 + k * k) / (2.0 * kp2), k * k / kp2);
        let p = solve_profile(q, ProfileInit::AtZero).unwrap();
        let m = Modulus::new(k).unwrap();
        for i in 0..200 {
            let x = -6.0 + 0.06 * i as f64;
            assert!((p.value(x) - sn(x / kp2.sqrt(), m)).abs() < 1e-9);
        }
    }

    #[test]
    fn zeta_convention_round_trip() {
        let z = QuarticCoeffs::zeta_like(0.3, -1.2, 2.0);
        let p = z.to_phi_like();
        assert_eq!((p.a, p.b, p.c), (2.0, 1.2, 0.3));
        assert_eq!(p.to_zeta_like(), z);
        assert_eq!(z.slope_sq(0.7), p.slope_sq(0.7));
    }

    #[test]
    fn every_shape_satisfies_its_equation() {
        let cases = [
            (QuarticCoeffs::phi_like(2.0, 1.5, 0.5), ProfileInit::AtZero, Shape::Sn),
            (QuarticCoeffs::phi_like(2.0, 1.5, 0.5), ProfileInit::AtTurningPoint { delta: -1.0 }, Shape::Sn),
            (QuarticCoeffs::phi_like(1.0, 0.3, -0.7), ProfileInit::AtZero, Shape::Cn),
            (QuarticCoeffs::phi_like(1.0, 0.3, -0.7), ProfileInit::AtTurningPoint { delta: -1.0 }, Shape::Cn),
            (QuarticCoeffs::phi_like(-1.0, -1.5, -1.0), ProfileInit::AtTurningPoint { delta: -1.0 }, Shape::Dn),
            (QuarticCoeffs::phi_like(-1.0, -1.5, -1.0), ProfileInit::AtTurningPoint { delta: 1.0 }, Shape::Dn),
            (QuarticCoeffs::phi_like(1.0, -1.5, 0.5), ProfileInit::AtZero, Shape::Sc),
            (QuarticCoeffs::phi_like(2.0, -1.0, 0.5), ProfileInit::AtZero, Shape::Tan),
            (QuarticCoeffs::phi_like(1.0, -0.5, 0.0), ProfileInit::AtZero, Shape::Sinh),
            (QuarticCoeffs::phi_like(-1.0, -0.5, 0.0), ProfileInit::AtTurningPoint { delta: 1.0 }, Shape::Cosh),
            (QuarticCoeffs::phi_like(0.0, -0.5, -1.0), ProfileInit::AtTurningPoint { delta: -1.0 }, Shape::Sech),
            (QuarticCoeffs::phi_like(3.0, 0.0, 0.0), ProfileInit::AtZero, Shape::Linear),
            (QuarticCoeffs::zeta_like(0.5, -0.5, 0.5), ProfileInit::AtZero, Shape::Tanh),
        ];
        for (q, init, shape) in cases {
            let p = solve_profile(q, init).unwrap_or_else(|e| panic!("{q:?} {init:?}: {e}"));
            assert_eq!(p.shape(), Some(shape), "{q:?} {init:?}");
            let span = p.period().unwrap_or(2.0);
            let (lo, hi) = match shape {
                Shape::Sc | Shape::Tan => {
                    let iv = p.monotone_interval(0).unwrap();
                    (0.9 * iv.lo, 0.9 * iv.hi)
                }
                _ => (-0.5 * span, 0.5 * span),
            };
            let (r1, r2) = residuals(&p, lo, hi);
            assert!(r1 < 1e-9 && r2 < 1e-9, "{shape:?}: {r1:e} {r2:e}");
            match init {
                ProfileInit::AtZero => assert!(p.value(0.0).abs() < 1e-15 && p.deriv(0.0) > 0.0),
                ProfileInit::AtTurningPoint { .. } => assert!(p.deriv(0.0).abs() < 1e-12, "{shape:?}"),
            }
        }
    }

    #[test]
    fn turning_values_are_roots() {
        let q = QuarticCoeffs::phi_like(1.0, 0.3, -0.7);
        let p = solve_profile(q, ProfileInit::AtZero).unwrap();
        let tps = p.turning_points();
        assert_eq!(tps.len(), 2);
        for t in tps {
            let f = p.value(t);
            assert!(p.deriv(t).abs() < 1e-9);
            assert!(q.poly(f * f).abs() < 1e-9);
        }
    }

    #[test]
    fn error_paths() {
        // P(s) < 0 everywhere on s >= 0
        assert!(matches!(
            solve_profile(QuarticCoeffs::phi_like(-1.0, 1.0, -1.0), ProfileInit::AtZero),
            Err(Error::NoRealSolution(_))
        ));
        assert!(matches!(
            solve_profile(QuarticCoeffs::phi_like(-1.0, -1.5, -1.0), ProfileInit::AtZero),
            Err(Error::InconsistentInit(_))
        ));
        assert!(matches!(
            solve_profile(QuarticCoeffs::phi_like(0.0, 0.0, 0.0), ProfileInit::AtZero),
            Err(Error::NoRealSolution(_))
        ));
        assert!(matches!(
            solve_profile(QuarticCoeffs::phi_like(0.0, -0.5, 0.0), ProfileInit::AtZero),
            Err(Error::Unsupported(_))
        ));
        assert!(matches!(
            solve_profile(QuarticCoeffs::phi_like(0.0, 1.0, 1.0), ProfileInit::AtZero),
            Err(Error::Unsupported(_))
        ));
    }

    #[test]
    fn numeric_sine() {
        let q = QuarticCoeffs::phi_like(1.0, 0.5, 0.0);
        let p = integrate_profile_numeric(q, ProfileInit::AtZero, 4.0 * PI).unwrap();
        assert_eq!(p.form_tag(), FormTag::Numeric);
        for i in 0..=400 {
            let t = 4.0 * PI * i as f64 / 400.0;
            assert!((p.value(t) - t.sin()).abs() < 1e-8, "t = {t}");
        }
    }

    #[test]
    fn numeric_energy_drift_over_ten_periods() {
        let q = QuarticCoeffs::phi_like(2.0, 1.5, 0.5);
        let closed = solve_profile(q, ProfileInit::AtZero).unwrap();
        let period = closed.period().unwrap();
        let p = integrate_profile_numeric(q, ProfileInit::AtZero, 10.0 * period).unwrap();
        let mut drift = 0.0f64;
        for i in 0..=5000 {
            let t = 10.0 * period * i as f64 / 5000.0;
            let [f, d, _] = p.jet(t);
            drift = drift.max((d * d - q.slope_sq(f)).abs());
        }
        assert!(drift < 1e-9, "drift {drift:e}");
    }

    #[test]
    fn exponential_constructor() {
        let p = Profile::exponential(1.0).unwrap();
        assert!((p.value(1.0) - 1f64.exp()).abs() < 1e-15);
        assert!((p.coeffs().slope_sq(2.0) - 4.0).abs() < 1e-15);
        assert!(Profile::exponential(0.0).is_err());
    }

    #[test]
    fn tanh_conditions() {
        assert!(tanh_family_conditions([1.0, 1.0, -0.5], [1.0, 1.0, 0.5], 1e-12).unwrap());
        assert!(!tanh_family_conditions([1.0, 1.0, 1.0], [1.0, 1.0, 1.0], 1e-12).unwrap());
        assert!(!tanh_family_conditions([1.0 + 1e-3, 1.0, -0.5], [1.0, 1.0, 0.5], 1e-9).unwrap());
        assert!(tanh_family_conditions([0.0, 1.0, -0.5], [1.0, 1.0, 0.5], 1e-12).is_err());
    }
}
