//! Generating matrices: validity, module, discriminant, the action of
//! `R+ x R+`, and the elliptic / parabolic normal forms.

use std::fmt;

use crate::error::{Error, Result};

pub type Mat3 = [[f64; 3]; 3];

/// Relative tolerance used by validity checks unless overridden.
pub const DEFAULT_TOL: f64 = 1e-9;

const PERMS: [[usize; 3]; 6] = [
    [0, 1, 2],
    [0, 2, 1],
    [1, 0, 2],
    [1, 2, 0],
    [2, 0, 1],
    [2, 1, 0],
];

/// Rows `(a11, a22, a33)`, `(a23, a31, a12)`, `(a32, a13, a21)`.
pub fn derived_matrix(a: &Mat3) -> Mat3 {
    [
        [a[0][0], a[1][1], a[2][2]],
        [a[1][2], a[2][0], a[0][1]],
        [a[2][1], a[0][2], a[1][0]],
    ]
}

pub fn max_abs(a: &Mat3) -> f64 {
    a.iter().flatten().fold(0.0f64, |m, v| m.max(v.abs()))
}

/// Largest absolute 2x2 minor of the derived matrix.
pub fn max_derived_minor(a: &Mat3) -> f64 {
    let d = derived_matrix(a);
    let mut worst = 0.0f64;
    for (r1, r2) in [(0, 1), (0, 2), (1, 2)] {
        for (c1, c2) in [(0, 1), (0, 2), (1, 2)] {
            let minor = d[r1][c1] * d[r2][c2] - d[r1][c2] * d[r2][c1];
            worst = worst.max(minor.abs());
        }
    }
    worst
}

/// `A != 0` and every 2x2 minor of `A'` vanishes within `tol * max|a_ij|^2`.
pub fn is_generating(a: &Mat3, tol: f64) -> bool {
    let scale = max_abs(a);
    scale > 0.0 && a.iter().flatten().all(|v| v.is_finite()) && max_derived_minor(a) <= tol * scale * scale
}

/// Applies `lambda(A)` without validity checks.
pub fn act_raw(lambda1: f64, lambda2: f64, a: &Mat3) -> Mat3 {
    let l12 = lambda1 * lambda2;
    [
        [a[0][0] / lambda1, a[0][1], lambda1 * a[0][2]],
        [a[1][0] / lambda2, a[1][1], lambda2 * a[1][2]],
        [l12 * a[2][0], a[2][1], a[2][2] / l12],
    ]
}

/// Parses nine whitespace-separated reals in row-major order.
pub fn parse_matrix(text: &str) -> Result<Mat3> {
    let values = text
        .split_whitespace()
        .map(|tok| tok.parse::<f64>().map_err(|e| Error::Parse(format!("{tok:?}: {e}"))))
        .collect::<Result<Vec<_>>>()?;
    if values.len() != 9 {
        return Err(Error::Parse(format!("expected 9 numbers, found {}", values.len())));
    }
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::Parse("matrix entries must be finite".into()));
    }
    let mut a = [[0.0; 3]; 3];
    for (i, v) in values.into_iter().enumerate() {
        a[i / 3][i % 3] = v;
    }
    Ok(a)
}

/// Writes a matrix in the nine-number text format, one row per line.
pub fn format_matrix(a: &Mat3) -> String {
    a.iter()
        .map(|row| row.iter().map(|v| format!("{v:.17e}")).collect::<Vec<_>>().join(" "))
        .collect::<Vec<_>>()
        .join("\n")
        + "\n"
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MatrixClass {
    Elliptic,
    Parabolic,
}

/// A non-zero 3x3 matrix whose derived matrix has rank one.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GeneratingMatrix {
    a: Mat3,
    tol: f64,
}

impl GeneratingMatrix {
    pub fn new(a: Mat3) -> Result<Self> {
        Self::with_tol(a, DEFAULT_TOL)
    }

    pub fn with_tol(a: Mat3, tol: f64) -> Result<Self> {
        if !(tol > 0.0) {
            return Err(Error::InvalidParameter(format!("tolerance {tol} must be positive")));
        }
        if !is_generating(&a, tol) {
            let scale = max_abs(&a);
            return Err(Error::NotGenerating { max_minor: max_derived_minor(&a), bound: tol * scale * scale });
        }
        Ok(Self { a, tol })
    }

    pub fn entries(&self) -> &Mat3 {
        &self.a
    }

    pub fn tol(&self) -> f64 {
        self.tol
    }

    pub fn scale(&self) -> f64 {
        max_abs(&self.a)
    }

    pub fn row_products(&self) -> [f64; 3] {
        [0, 1, 2].map(|i| self.a[i][0] * self.a[i][1] * self.a[i][2])
    }

    pub fn column_products(&self) -> [f64; 3] {
        [0, 1, 2].map(|j| self.a[0][j] * self.a[1][j] * self.a[2][j])
    }

    /// The module: common product of the entries of every row and every column.
    pub fn theta(&self) -> Result<f64> {
        let products: Vec<f64> = self.row_products().into_iter().chain(self.column_products()).collect();
        let lo = products.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = products.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let s = self.scale();
        if hi - lo > self.tol * s * s * s {
            return Err(Error::Inconsistent(format!("row/column products disagree: {products:?}")));
        }
        Ok(products.iter().sum::<f64>() / 6.0)
    }

    pub fn class(&self) -> Result<MatrixClass> {
        let s = self.scale();
        Ok(if self.theta()?.abs() <= self.tol * s * s * s {
            MatrixClass::Parabolic
        } else {
            MatrixClass::Elliptic
        })
    }

    /// `Delta_alpha / 4` for column `alpha` and every choice of the row `i`
    /// (`j`, `k` the remaining rows, `beta`, `gamma` the remaining columns).
    pub fn quarter_deltas(&self, alpha: usize) -> [f64; 3] {
        let a = &self.a;
        let others = |x: usize| match x {
            0 => (1, 2),
            1 => (0, 2),
            _ => (0, 1),
        };
        let (beta, gamma) = others(alpha);
        [0, 1, 2].map(|i| {
            let (j, k) = others(i);
            let lin = a[j][alpha] + a[k][alpha] - a[i][alpha];
            0.25 * (lin * lin - 4.0 * a[i][beta] * a[i][gamma])
        })
    }

    /// The discriminant `Delta(A) = Delta_2 / 4`, after checking that all three
    /// row choices agree.
    pub fn discriminant(&self) -> Result<f64> {
        let d = self.quarter_deltas(1);
        let lo = d.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = d.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let s = self.scale();
        if hi - lo > self.tol * s * s {
            return Err(Error::Inconsistent(format!("Delta_2/4 depends on the row: {d:?}")));
        }
        Ok(d.iter().sum::<f64>() / 3.0)
    }

    pub fn act(&self, lambda1: f64, lambda2: f64) -> Result<Self> {
        if !(lambda1 > 0.0 && lambda2 > 0.0) || !lambda1.is_finite() || !lambda2.is_finite() {
            return Err(Error::Domain(format!("action needs positive lambda, got ({lambda1}, {lambda2})")));
        }
        Self::with_tol(act_raw(lambda1, lambda2, &self.a), self.tol)
    }

    /// Finds `lambda` with `lambda(self) = other`, if the two matrices are equivalent.
    pub fn equivalence(&self, other: &GeneratingMatrix) -> Option<(f64, f64)> {
        let a = &self.a;
        let b = &other.a;
        let ratio = |num: f64, den: f64| if den != 0.0 && num != 0.0 { Some(num / den) } else { None };
        let lambda1 = ratio(a[0][0], b[0][0]).or_else(|| ratio(b[0][2], a[0][2]));
        let lambda2 = ratio(a[1][0], b[1][0]).or_else(|| ratio(b[1][2], a[1][2]));
        let product = ratio(b[2][0], a[2][0]).or_else(|| ratio(a[2][2], b[2][2]));
        let (l1, l2) = match (lambda1, lambda2, product) {
            (Some(l1), Some(l2), _) => (l1, l2),
            (Some(l1), None, Some(p)) => (l1, p / l1),
            (None, Some(l2), Some(p)) => (p / l2, l2),
            (Some(l1), None, None) => (l1, 1.0),
            (None, Some(l2), None) => (1.0, l2),
            (None, None, Some(p)) => (p, 1.0),
            (None, None, None) => (1.0, 1.0),
        };
        if !(l1 > 0.0 && l2 > 0.0) {
            return None;
        }
        let mapped = act_raw(l1, l2, a);
        let s = max_abs(a).max(max_abs(b));
        let close = mapped
            .iter()
            .flatten()
            .zip(b.iter().flatten())
            .all(|(x, y)| (x - y).abs() <= self.tol * s);
        close.then_some((l1, l2))
    }

    /// Canonical representative `A_{e2 e3}(a, b, c)` of an elliptic matrix, with the
    /// `lambda` that carries `self` onto it.
    pub fn canonical_elliptic_form(&self) -> Result<(CanonicalForm, (f64, f64))> {
        if self.class()? != MatrixClass::Elliptic {
            return Err(Error::NotApplicable("canonical form needs an elliptic matrix (theta != 0)".into()));
        }
        let a = &self.a;
        let eps2 = (a[1][1] / a[0][0]).signum();
        let eps3 = (a[2][2] / a[0][0]).signum();
        let lambda1 = eps2 * a[0][0] / a[1][1];
        let lambda2 = eps3 * a[2][2] / a[0][0];
        // a32 is fixed by the action and equals eps2 * c in the canonical pattern
        let form = CanonicalForm { a: eps2 * a[1][1], b: a[0][1], c: eps2 * a[2][1], eps2, eps3 };
        let mapped = act_raw(lambda1, lambda2, a);
        let target = form.matrix();
        let s = max_abs(a);
        for (x, y) in mapped.iter().flatten().zip(target.iter().flatten()) {
            if (x - y).abs() > self.tol * s.max(max_abs(&target)) {
                return Err(Error::Inconsistent(format!(
                    "lambda(A) does not reproduce the canonical pattern ({x} vs {y})"
                )));
            }
        }
        Ok((form, (lambda1, lambda2)))
    }

    /// Zero pattern of a parabolic matrix after row and column permutations.
    pub fn classify_parabolic(&self) -> Result<ParabolicForm> {
        if self.class()? != MatrixClass::Parabolic {
            return Err(Error::NotApplicable("parabolic normal form needs theta = 0".into()));
        }
        let zero_tol = self.tol.sqrt() * self.scale();
        let is_zero = |v: f64| v.abs() <= zero_tol;
        let a = &self.a;
        let zero_line = (0..3).any(|i| (0..3).all(|j| is_zero(a[i][j])))
            || (0..3).any(|j| (0..3).all(|i| is_zero(a[i][j])));

        let search = |strict: bool| {
            for pattern in [ParabolicPattern::ZeroDiagonal, ParabolicPattern::Cross, ParabolicPattern::Diagonal] {
                let mask = pattern.mask();
                for rp in PERMS {
                    for cp in PERMS {
                        let ok = (0..3).all(|i| {
                            (0..3).all(|j| {
                                let v = a[rp[i]][cp[j]];
                                if mask[i][j] {
                                    !strict || !is_zero(v)
                                } else {
                                    is_zero(v)
                                }
                            })
                        });
                        if ok {
                            return Some((pattern, rp, cp));
                        }
                    }
                }
            }
            None
        };

        let found = search(true).or_else(|| if zero_line { search(false) } else { None });
        match found {
            Some((pattern, row_perm, col_perm)) => {
                Ok(ParabolicForm { pattern: Some(pattern), row_perm, col_perm, zero_line })
            }
            None if zero_line => {
                Ok(ParabolicForm { pattern: None, row_perm: PERMS[0], col_perm: PERMS[0], zero_line })
            }
            None => Err(Error::Inconsistent("parabolic matrix matches no normal form".into())),
        }
    }
}

impl fmt::Display for GeneratingMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for row in &self.a {
            writeln!(f, "{:>14.8} {:>14.8} {:>14.8}", row[0], row[1], row[2])?;
        }
        Ok(())
    }
}

/// Two factor vectors `(p1, q1, r1)` and `(p2, q2, r2)` of a generating matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FactorVectors {
    pub p1: f64,
    pub q1: f64,
    pub r1: f64,
    pub p2: f64,
    pub q2: f64,
    pub r2: f64,
}

impl FactorVectors {
    pub fn matrix(&self) -> Mat3 {
        let Self { p1, q1, r1, p2, q2, r2 } = *self;
        [
            [p1 * p2, q1 * r2, r1 * q2],
            [r1 * r2, p1 * q2, q1 * p2],
            [q1 * q2, r1 * p2, p1 * r2],
        ]
    }
}

pub fn from_factors(f: FactorVectors) -> Result<GeneratingMatrix> {
    let n1 = f.p1 * f.p1 + f.q1 * f.q1 + f.r1 * f.r1;
    let n2 = f.p2 * f.p2 + f.q2 * f.q2 + f.r2 * f.r2;
    if n1 == 0.0 || n2 == 0.0 {
        return Err(Error::DegenerateFactor);
    }
    GeneratingMatrix::new(f.matrix())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CanonicalForm {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub eps2: f64,
    pub eps3: f64,
}

impl CanonicalForm {
    pub fn matrix(&self) -> Mat3 {
        let Self { a, b, c, eps2, eps3 } = *self;
        [
            [a, b, c],
            [eps2 * eps3 * c, eps2 * a, eps3 * b],
            [eps2 * eps3 * b, eps2 * c, eps3 * a],
        ]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ParabolicPattern {
    /// Zeros exactly on the diagonal.
    ZeroDiagonal,
    /// `a12, a13, a21, a31` non-zero, everything else zero.
    Cross,
    /// Non-zero diagonal only.
    Diagonal,
}

impl ParabolicPattern {
    fn mask(self) -> [[bool; 3]; 3] {
        match self {
            Self::ZeroDiagonal => [[false, true, true], [true, false, true], [true, true, false]],
            Self::Cross => [[false, true, true], [true, false, false], [true, false, false]],
            Self::Diagonal => [[true, false, false], [false, true, false], [false, false, true]],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ParabolicForm {
    pub pattern: Option<ParabolicPattern>,
    /// Row `i` of the normal form is row `row_perm[i]` of the input.
    pub row_perm: [usize; 3],
    pub col_perm: [usize; 3],
    /// The matrix has a zero row or a zero column.
    pub zero_line: bool,
}
