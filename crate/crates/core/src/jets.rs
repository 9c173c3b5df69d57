//! Truncated power series about 0 and closed-form symbol families.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernels::{inv_pow, ipow};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Radius of the ring sampled by [`self_map_margin`].
pub const MARGIN_RING: f64 = 0.999;

/// Taylor coefficients `a_0..a_N` of a function about 0.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TruncatedSeries {
    coeffs: Vec<Complex64>,
}

impl TruncatedSeries {
    pub fn new(coeffs: Vec<Complex64>) -> Result<Self> {
        if coeffs.is_empty() {
            return Err(Error::InvalidArgument("series needs at least one coefficient".into()));
        }
        if coeffs.iter().any(|c| !(c.re.is_finite() && c.im.is_finite())) {
            return Err(Error::InvalidArgument("series coefficients must be finite".into()));
        }
        Ok(Self { coeffs })
    }

    pub fn from_real(coeffs: &[f64]) -> Result<Self> {
        Self::new(coeffs.iter().map(|&x| Complex64::new(x, 0.0)).collect())
    }

    pub fn zeros(degree: usize) -> Self {
        Self {
            coeffs: vec![ZERO; degree + 1],
        }
    }

    pub fn one(degree: usize) -> Self {
        let mut s = Self::zeros(degree);
        s.coeffs[0] = ONE;
        s
    }

    /// `z^k` at truncation degree `degree` (zero if `k > degree`).
    pub fn monomial(k: usize, degree: usize) -> Self {
        let mut s = Self::zeros(degree);
        if k <= degree {
            s.coeffs[k] = ONE;
        }
        s
    }

    pub fn identity(degree: usize) -> Self {
        Self::monomial(1, degree)
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn coeff(&self, k: usize) -> Complex64 {
        self.coeffs.get(k).copied().unwrap_or(ZERO)
    }

    pub fn into_coeffs(self) -> Vec<Complex64> {
        self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| *c == ZERO)
    }

    /// Pads with zeros or truncates to the given degree.
    pub fn with_degree(&self, degree: usize) -> Self {
        let mut coeffs = self.coeffs.clone();
        coeffs.resize(degree + 1, ZERO);
        Self { coeffs }
    }

    /// Horner evaluation of the retained polynomial.
    pub fn eval(&self, z: Complex64) -> Complex64 {
        self.coeffs.iter().rev().fold(ZERO, |acc, c| acc * z + c)
    }

    fn check_degree(&self, other: &Self) -> Result<()> {
        if self.degree() != other.degree() {
            return Err(Error::DegreeMismatch {
                left: self.degree(),
                right: other.degree(),
            });
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_degree(other)?;
        Ok(Self {
            coeffs: self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a + b).collect(),
        })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.check_degree(other)?;
        Ok(Self {
            coeffs: self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a - b).collect(),
        })
    }

    pub fn scale(&self, s: Complex64) -> Self {
        Self {
            coeffs: self.coeffs.iter().map(|a| a * s).collect(),
        }
    }

    /// Cauchy product truncated at the common degree.
    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.check_degree(other)?;
        Ok(self.mul_unchecked(other))
    }

    fn mul_unchecked(&self, other: &Self) -> Self {
        let len = self.coeffs.len();
        let mut out = vec![ZERO; len];
        for (i, a) in self.coeffs.iter().enumerate() {
            if *a == ZERO {
                continue;
            }
            for (j, b) in other.coeffs[..len - i].iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        Self { coeffs: out }
    }

    /// Coefficients `k a_k` moved down one slot; the top slot becomes zero.
    pub fn derivative(&self) -> Self {
        let len = self.coeffs.len();
        let mut out = vec![ZERO; len];
        for k in 1..len {
            out[k - 1] = self.coeffs[k] * k as f64;
        }
        Self { coeffs: out }
    }

    pub fn nth_derivative(&self, n: u32) -> Self {
        (0..n).fold(self.clone(), |f, _| f.derivative())
    }

    /// Multiplies by `z^k`, dropping what falls past the truncation degree.
    pub fn shift(&self, k: usize) -> Self {
        let len = self.coeffs.len();
        let mut out = vec![ZERO; len];
        let keep = len.saturating_sub(k);
        out[k.min(len)..].copy_from_slice(&self.coeffs[..keep]);
        Self { coeffs: out }
    }

    /// `self ∘ inner` through the common degree, by Horner in the jet algebra.
    pub fn compose(&self, inner: &Self) -> Result<Self> {
        self.check_degree(inner)?;
        if inner.coeffs[0].norm() >= 1.0 {
            return Err(Error::Domain(format!(
                "composition needs |phi(0)| < 1, got {}",
                inner.coeffs[0].norm()
            )));
        }
        let degree = self.degree();
        let mut acc = Self::zeros(degree);
        for c in self.coeffs.iter().rev() {
            acc = acc.mul_unchecked(inner);
            acc.coeffs[0] += c;
        }
        Ok(acc)
    }

    /// Largest coefficient-wise difference; degrees may differ.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        let len = self.coeffs.len().max(other.coeffs.len());
        (0..len)
            .map(|k| (self.coeff(k) - other.coeff(k)).norm())
            .fold(0.0, f64::max)
    }
}

pub fn series_mul(f: &TruncatedSeries, g: &TruncatedSeries) -> Result<TruncatedSeries> {
    f.mul(g)
}

pub fn series_derivative(f: &TruncatedSeries) -> TruncatedSeries {
    f.derivative()
}

pub fn series_compose(f: &TruncatedSeries, phi: &TruncatedSeries) -> Result<TruncatedSeries> {
    f.compose(phi)
}

/// Coefficients of `(1 - c z)^(-s)` through degree `degree`.
pub fn binomial_negative_power(c: Complex64, s: u32, degree: usize) -> Result<TruncatedSeries> {
    if s == 0 {
        return Err(Error::InvalidArgument("exponent s must be positive".into()));
    }
    if !(c.norm() < 1.0) {
        return Err(Error::Domain(format!("pole parameter needs |c| < 1, got {}", c.norm())));
    }
    let mut coeffs = Vec::with_capacity(degree + 1);
    let mut term = ONE;
    for k in 0..=degree {
        if k > 0 {
            // C(k+s-1, k) c^k from the previous term
            term = term * c * ((k as f64 + f64::from(s) - 1.0) / k as f64);
        }
        coeffs.push(term);
    }
    TruncatedSeries::new(coeffs)
}

/// Something that can be evaluated pointwise and expanded about 0.
pub trait AnalyticSymbol {
    fn eval(&self, z: Complex64) -> Complex64;
    fn series(&self, degree: usize) -> TruncatedSeries;
}

impl AnalyticSymbol for TruncatedSeries {
    fn eval(&self, z: Complex64) -> Complex64 {
        TruncatedSeries::eval(self, z)
    }

    fn series(&self, degree: usize) -> TruncatedSeries {
        self.with_degree(degree)
    }
}

/// `phi(z) = b0 + b1 z / (1 - c z)`, `|c| < 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LftSymbol {
    b0: Complex64,
    b1: Complex64,
    c: Complex64,
}

impl LftSymbol {
    pub fn new(b0: Complex64, b1: Complex64, c: Complex64) -> Result<Self> {
        for v in [b0, b1, c] {
            if !(v.re.is_finite() && v.im.is_finite()) {
                return Err(Error::InvalidArgument("symbol parameters must be finite".into()));
            }
        }
        if !(c.norm() < 1.0) {
            return Err(Error::InvalidArgument(format!(
                "pole parameter needs |c| < 1, got {}",
                c.norm()
            )));
        }
        Ok(Self { b0, b1, c })
    }

    pub fn identity() -> Self {
        Self {
            b0: ZERO,
            b1: ONE,
            c: ZERO,
        }
    }

    /// `z -> beta z`.
    pub fn linear(beta: Complex64) -> Self {
        Self {
            b0: ZERO,
            b1: beta,
            c: ZERO,
        }
    }

    /// `(z - alpha) / (1 - conj(alpha) z) = -alpha + (1 - |alpha|^2) z / (1 - conj(alpha) z)`.
    pub fn blaschke(alpha: Complex64) -> Result<Self> {
        if !(alpha.norm() < 1.0) {
            return Err(Error::InvalidArgument(format!(
                "Blaschke parameter needs |alpha| < 1, got {}",
                alpha.norm()
            )));
        }
        Ok(Self {
            b0: -alpha,
            b1: Complex64::new(1.0 - alpha.norm_sqr(), 0.0),
            c: alpha.conj(),
        })
    }

    pub fn is_identity(&self) -> bool {
        *self == Self::identity()
    }

    pub fn b0(&self) -> Complex64 {
        self.b0
    }

    pub fn b1(&self) -> Complex64 {
        self.b1
    }

    pub fn c(&self) -> Complex64 {
        self.c
    }
}

impl AnalyticSymbol for LftSymbol {
    fn eval(&self, z: Complex64) -> Complex64 {
        self.b0 + self.b1 * z / (1.0 - self.c * z)
    }

    fn series(&self, degree: usize) -> TruncatedSeries {
        lft_to_series(self, degree)
    }
}

/// `[b0, b1, b1 c, b1 c^2, ...]` through degree `degree`.
pub fn lft_to_series(phi: &LftSymbol, degree: usize) -> TruncatedSeries {
    let mut coeffs = Vec::with_capacity(degree + 1);
    coeffs.push(phi.b0);
    let mut term = phi.b1;
    for _ in 1..=degree {
        coeffs.push(term);
        term *= phi.c;
    }
    TruncatedSeries { coeffs }
}

/// `psi(z) = a z^n (1 - c z)^(-s)`, `|c| < 1`, `s >= 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WeightSymbol {
    a: Complex64,
    n: u32,
    c: Complex64,
    s: u32,
}

impl WeightSymbol {
    pub fn new(a: Complex64, n: u32, c: Complex64, s: u32) -> Result<Self> {
        if !(a.re.is_finite() && a.im.is_finite() && c.re.is_finite() && c.im.is_finite()) {
            return Err(Error::InvalidArgument("weight parameters must be finite".into()));
        }
        if s == 0 {
            return Err(Error::InvalidArgument("weight exponent s must be positive".into()));
        }
        if !(c.norm() < 1.0) {
            return Err(Error::InvalidArgument(format!(
                "weight pole needs |c| < 1, got {}",
                c.norm()
            )));
        }
        Ok(Self { a, n, c, s })
    }

    /// `psi = a` (constant).
    pub fn constant(a: Complex64) -> Self {
        Self { a, n: 0, c: ZERO, s: 1 }
    }

    pub fn a(&self) -> Complex64 {
        self.a
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn c(&self) -> Complex64 {
        self.c
    }

    pub fn s(&self) -> u32 {
        self.s
    }

    /// Same weight with the amplitude multiplied by `k`.
    pub fn scaled(&self, k: Complex64) -> Self {
        Self { a: self.a * k, ..*self }
    }
}

impl AnalyticSymbol for WeightSymbol {
    fn eval(&self, z: Complex64) -> Complex64 {
        self.a * ipow(z, self.n) * inv_pow(1.0 - self.c * z, self.s)
    }

    fn series(&self, degree: usize) -> TruncatedSeries {
        // validated at construction; the error branch is unreachable
        let base = binomial_negative_power(self.c, self.s, degree).unwrap_or_else(|_| TruncatedSeries::zeros(degree));
        base.shift(self.n as usize).scale(self.a)
    }
}

/// `min_theta 1 - |phi(0.999 e^{i theta})|` over `samples` equally spaced angles.
pub fn self_map_margin(phi: &dyn AnalyticSymbol, samples: usize) -> Result<f64> {
    if samples < 64 {
        return Err(Error::InvalidArgument(format!(
            "self_map_margin needs at least 64 samples, got {samples}"
        )));
    }
    let mut margin = f64::INFINITY;
    for i in 0..samples {
        let theta = 2.0 * PI * i as f64 / samples as f64;
        let z = Complex64::from_polar(MARGIN_RING, theta);
        let v = phi.eval(z);
        let m = 1.0 - v.norm();
        if m.is_nan() {
            return Ok(f64::NEG_INFINITY);
        }
        margin = margin.min(m);
    }
    Ok(margin)
}
