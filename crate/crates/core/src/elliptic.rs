//! Jacobi elliptic functions and the complete elliptic integral of the first kind.
//!
//! `sn`, `cn` and `dn` are evaluated by the descending Landen transformation driven
//! by the arithmetic-geometric mean, after reducing the argument modulo `4K`.
//! [`incomplete_f`] integrates the defining integral by adaptive quadrature and is
//! kept deliberately independent of the AGM path so it can serve as an oracle.

use std::f64::consts::{FRAC_PI_2, PI};

use crate::error::{Error, Result};

const AGM_MAX_ITER: usize = 32;
const AGM_TOL: f64 = 1e-15;

/// Elliptic modulus `k` in `[0, 1]` with its complement `k' = sqrt(1 - k^2)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Modulus {
    k: f64,
    kprime: f64,
}

impl Modulus {
    pub fn new(k: f64) -> Result<Self> {
        if !k.is_finite() || !(0.0..=1.0).contains(&k) {
            return Err(Error::Domain(format!("modulus k = {k} not in [0, 1]")));
        }
        // (1-k)(1+k) keeps k' accurate as k -> 1
        let kprime = ((1.0 - k) * (1.0 + k)).sqrt();
        Ok(Self { k, kprime })
    }

    /// Modulus from its complement `k'`.
    pub fn from_complement(kprime: f64) -> Result<Self> {
        if !kprime.is_finite() || !(0.0..=1.0).contains(&kprime) {
            return Err(Error::Domain(format!("complementary modulus k' = {kprime} not in [0, 1]")));
        }
        let k = ((1.0 - kprime) * (1.0 + kprime)).sqrt();
        Ok(Self { k, kprime })
    }

    #[inline]
    pub fn k(&self) -> f64 {
        self.k
    }

    #[inline]
    pub fn kprime(&self) -> f64 {
        self.kprime
    }

    #[inline]
    pub fn k2(&self) -> f64 {
        self.k * self.k
    }
}

/// Arithmetic-geometric mean of two non-negative numbers.
fn agm(mut a: f64, mut b: f64) -> f64 {
    for _ in 0..AGM_MAX_ITER {
        if (a - b).abs() <= AGM_TOL * a {
            break;
        }
        let an = 0.5 * (a + b);
        b = (a * b).sqrt();
        a = an;
    }
    0.5 * (a + b)
}

/// Complete elliptic integral of the first kind, `K(k) = pi / (2 AGM(1, k'))`.
pub fn complete_k(m: Modulus) -> Result<f64> {
    if m.k >= 1.0 || m.kprime == 0.0 {
        return Err(Error::Divergence);
    }
    Ok(PI / (2.0 * agm(1.0, m.kprime)))
}

/// Simultaneous `(sn, cn, dn)` of a real argument.
pub fn jacobi_sn_cn_dn(t: f64, m: Modulus) -> (f64, f64, f64) {
    if !t.is_finite() {
        return (f64::NAN, f64::NAN, f64::NAN);
    }
    if m.k == 0.0 {
        let (s, c) = t.sin_cos();
        return (s, c, 1.0);
    }
    if m.kprime == 0.0 {
        let sech = 1.0 / t.cosh();
        return (t.tanh(), sech, sech);
    }

    // complete_k cannot fail here: 0 < k < 1
    let quarter = PI / (2.0 * agm(1.0, m.kprime));
    let period = 4.0 * quarter;
    let u = t - period * (t / period).round();

    let mut a = [0.0f64; AGM_MAX_ITER + 1];
    let mut c = [0.0f64; AGM_MAX_ITER + 1];
    a[0] = 1.0;
    let mut b = m.kprime;
    c[0] = m.k;
    let mut n = 0;
    while n < AGM_MAX_ITER && c[n].abs() > AGM_TOL * a[n] {
        let an = 0.5 * (a[n] + b);
        let cn = 0.5 * (a[n] - b);
        b = (a[n] * b).sqrt();
        n += 1;
        a[n] = an;
        c[n] = cn;
    }

    let mut phi = (1u64 << n) as f64 * a[n] * u;
    for j in (1..=n).rev() {
        let r = (c[j] / a[j] * phi.sin()).clamp(-1.0, 1.0);
        phi = 0.5 * (phi + r.asin());
    }
    let (sn, cn) = phi.sin_cos();
    // dn^2 = k'^2 + k^2 cn^2 has no cancellation, unlike cos(phi0)/cos(phi1 - phi0)
    let dn = (m.kprime * m.kprime + m.k2() * cn * cn).sqrt();
    (sn, cn, dn)
}

#[inline]
pub fn sn(t: f64, m: Modulus) -> f64 {
    jacobi_sn_cn_dn(t, m).0
}

#[inline]
pub fn cn(t: f64, m: Modulus) -> f64 {
    jacobi_sn_cn_dn(t, m).1
}

#[inline]
pub fn dn(t: f64, m: Modulus) -> f64 {
    jacobi_sn_cn_dn(t, m).2
}

/// Inverse of `sn` on `[-1, 1]`: the `t` in `[-K, K]` with `sn(t; k) = s`.
///
/// Computed by adaptive quadrature of `1/sqrt((1-u^2)(1-k^2 u^2))` from 0 to `s`,
/// after the substitution `u = sin(theta)` that removes the endpoint singularity.
pub fn incomplete_f(s: f64, m: Modulus) -> Result<f64> {
    if !s.is_finite() || s.abs() > 1.0 {
        return Err(Error::Domain(format!("|s| = {} > 1", s.abs())));
    }
    if m.k >= 1.0 {
        return Err(Error::Domain("incomplete_f requires k < 1".into()));
    }
    let k2 = m.k2();
    let upper = if s.abs() == 1.0 { FRAC_PI_2.copysign(s) } else { s.asin() };
    let integrand = |theta: f64| {
        let st = theta.sin();
        1.0 / (1.0 - k2 * st * st).sqrt()
    };
    Ok(adaptive_simpson(&integrand, 0.0, upper, 1e-15, 48))
}

fn adaptive_simpson<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64, depth: u32) -> f64 {
    if a == b {
        return 0.0;
    }
    let fa = f(a);
    let fb = f(b);
    let m = 0.5 * (a + b);
    let fm = f(m);
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    simpson_step(f, a, b, fa, fm, fb, whole, tol, depth)
}

#[allow(clippy::too_many_arguments)]
fn simpson_step<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> f64 {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * tol {
        return left + right + delta / 15.0;
    }
    simpson_step(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
        + simpson_step(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn md(k: f64) -> Modulus {
        Modulus::new(k).unwrap()
    }

    #[test]
    fn k_at_zero_is_half_pi() {
        assert!((complete_k(md(0.0)).unwrap() - FRAC_PI_2).abs() < 1e-15);
    }

    #[test]
    fn k_diverges_at_one() {
        assert_eq!(complete_k(md(1.0)), Err(Error::Divergence));
        assert!(Modulus::new(1.5).is_err());
        assert!(Modulus::new(-0.1).is_err());
        assert!(Modulus::new(f64::NAN).is_err());
    }

    #[test]
    fn k_matches_quadrature() {
        let m = md(0.8);
        let agm_k = complete_k(m).unwrap();
        let quad_k = incomplete_f(1.0, m).unwrap();
        assert!((agm_k - quad_k).abs() < 1e-11, "{agm_k} vs {quad_k}");
        // A&S table value K(m = 0.64)
        assert!((agm_k - 1.995_302_777_664_729).abs() < 1e-12);
    }

    #[test]
    fn origin_values() {
        for k in [0.0, 0.3, 0.9, 1.0] {
            assert_eq!(jacobi_sn_cn_dn(0.0, md(k)), (0.0, 1.0, 1.0));
        }
    }

    #[test]
    fn degenerate_moduli() {
        for t in [-2.0, -0.3, 0.7, 5.0] {
            let (s, c, d) = jacobi_sn_cn_dn(t, md(0.0));
            assert!((s - f64::sin(t)).abs() < 1e-15 && (c - f64::cos(t)).abs() < 1e-15 && d == 1.0);
            let (s, c, d) = jacobi_sn_cn_dn(t, md(1.0));
            assert!((s - t.tanh()).abs() < 1e-15);
            assert!((c - 1.0 / t.cosh()).abs() < 1e-15 && (d - c).abs() < 1e-15);
        }
    }

    #[test]
    fn sn_of_quarter_period_is_one() {
        let m = md(0.8);
        let quarter = incomplete_f(1.0, m).unwrap();
        assert!((sn(quarter, m) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn incomplete_f_endpoints_and_round_trip() {
        let m = md(0.6);
        assert_eq!(incomplete_f(0.0, m).unwrap(), 0.0);
        let kk = complete_k(m).unwrap();
        assert!((incomplete_f(1.0, m).unwrap() - kk).abs() < 1e-12);
        for i in 1..=9 {
            let s = i as f64 / 10.0;
            let t = incomplete_f(s, m).unwrap();
            assert!((sn(t, m) - s).abs() < 1e-10);
        }
        assert!(incomplete_f(1.0001, m).is_err());
    }

    #[test]
    fn near_singular_modulus_stays_accurate() {
        let m = md(0.999_999);
        for t in [0.5, 3.0, 7.0] {
            let (s, c, d) = jacobi_sn_cn_dn(t, m);
            assert!((s * s + c * c - 1.0).abs() < 1e-12);
            assert!((d * d + m.k2() * s * s - 1.0).abs() < 1e-12);
        }
    }
}
