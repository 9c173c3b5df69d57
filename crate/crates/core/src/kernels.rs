//! Reproducing kernels of `H_gamma(D^d)`.
//!
//! The space `H_gamma(D)` has kernel `K_w(z) = (1 - conj(w) z)^(-gamma)` and the
//! polydisk version is the product over coordinates. Expanding the kernel gives
//! `K_w(z) = sum_k C(k + gamma - 1, k) conj(w)^k z^k`, so the monomials are
//! orthogonal with `||z^k||^2 = 1 / C(k + gamma - 1, k)`.
//!
//! `gamma` is restricted to positive integers and every power below is an
//! integer power computed by repeated squaring; no complex logarithm is taken.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::jets::TruncatedSeries;

/// Largest admissible modulus of a [`DiskPoint`].
pub const MAX_POINT_MODULUS: f64 = 1.0 - 1e-9;

/// Degrees up to which [`basis_norm_sq`] is computed with exact integers.
pub const EXACT_BINOMIAL_DEGREE: u32 = 512;

/// The ambient space `H_gamma(D^d)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SpaceSpec {
    dim: usize,
    gamma: u32,
}

impl SpaceSpec {
    pub fn new(dim: usize, gamma: u32) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidArgument("dimension d must be at least 1".into()));
        }
        if gamma == 0 {
            return Err(Error::InvalidArgument("gamma must be a positive integer".into()));
        }
        Ok(Self { dim, gamma })
    }

    /// One-variable space `H_gamma(D)`.
    pub fn disk(gamma: u32) -> Result<Self> {
        Self::new(1, gamma)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn gamma(&self) -> u32 {
        self.gamma
    }

    fn check_dim(&self, got: usize) -> Result<()> {
        if got != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got,
            });
        }
        Ok(())
    }
}

/// A point of the open unit disk, `|z| <= 1 - 1e-9`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Complex64", into = "Complex64")]
pub struct DiskPoint(Complex64);

impl DiskPoint {
    pub fn new(value: Complex64) -> Result<Self> {
        if !(value.re.is_finite() && value.im.is_finite()) || value.norm() > MAX_POINT_MODULUS {
            return Err(Error::OutsideDisk {
                re: value.re,
                im: value.im,
            });
        }
        Ok(Self(value))
    }

    pub fn real(x: f64) -> Result<Self> {
        Self::new(Complex64::new(x, 0.0))
    }

    pub fn origin() -> Self {
        Self(Complex64::new(0.0, 0.0))
    }

    pub fn value(self) -> Complex64 {
        self.0
    }
}

impl TryFrom<Complex64> for DiskPoint {
    type Error = Error;

    fn try_from(value: Complex64) -> Result<Self> {
        Self::new(value)
    }
}

impl From<DiskPoint> for Complex64 {
    fn from(p: DiskPoint) -> Self {
        p.0
    }
}

/// A point of the polydisk `D^d`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolyPoint(Vec<DiskPoint>);

impl PolyPoint {
    pub fn new(coords: Vec<DiskPoint>) -> Result<Self> {
        if coords.is_empty() {
            return Err(Error::InvalidArgument(
                "a polydisk point needs at least one coordinate".into(),
            ));
        }
        Ok(Self(coords))
    }

    pub fn from_complex(coords: &[Complex64]) -> Result<Self> {
        Self::new(coords.iter().map(|&z| DiskPoint::new(z)).collect::<Result<_>>()?)
    }

    pub fn single(p: DiskPoint) -> Self {
        Self(vec![p])
    }

    pub fn coords(&self) -> &[DiskPoint] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn values(&self) -> impl Iterator<Item = Complex64> + '_ {
        self.0.iter().map(|p| p.0)
    }
}

/// Multi-index of derivative orders `(n_1, ..., n_d)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct MultiIndex(Vec<u32>);

impl MultiIndex {
    pub fn new(orders: Vec<u32>) -> Result<Self> {
        if orders.is_empty() {
            return Err(Error::InvalidArgument(
                "multi-index must have at least one entry".into(),
            ));
        }
        Ok(Self(orders))
    }

    pub fn zeros(dim: usize) -> Self {
        Self(vec![0; dim.max(1)])
    }

    pub fn single(order: u32) -> Self {
        Self(vec![order])
    }

    pub fn orders(&self) -> &[u32] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn total(&self) -> u32 {
        self.0.iter().sum()
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&n| n == 0)
    }
}

/// `z^n` for integer `n >= 0` by repeated squaring.
pub fn ipow(z: Complex64, n: u32) -> Complex64 {
    let mut base = z;
    let mut exp = n;
    let mut acc = Complex64::new(1.0, 0.0);
    while exp > 0 {
        if exp & 1 == 1 {
            acc *= base;
        }
        exp >>= 1;
        if exp > 0 {
            base *= base;
        }
    }
    acc
}

/// `z^(-n)`.
pub fn inv_pow(z: Complex64, n: u32) -> Complex64 {
    ipow(z.inv(), n)
}

/// Rising factorial `(gamma)_m = gamma (gamma + 1) ... (gamma + m - 1)`.
pub fn pochhammer(gamma: u32, m: u32) -> f64 {
    (0..m).map(|i| f64::from(gamma + i)).product()
}

/// Falling factorial `k (k - 1) ... (k - n + 1)`, zero when `n > k`.
pub fn falling_factorial(k: usize, n: u32) -> f64 {
    let n = n as usize;
    if n > k {
        return 0.0;
    }
    ((k - n + 1)..=k).map(|i| i as f64).product()
}

/// Exact binomial coefficient, `None` on `u128` overflow.
pub fn binomial_u128(n: u64, k: u64) -> Option<u128> {
    if k > n {
        return Some(0);
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        // acc * (n - i) / (i + 1) stays integral at every step
        acc = acc.checked_mul(u128::from(n - i))? / u128::from(i + 1);
    }
    Some(acc)
}

/// Kernel Taylor weights `C(k + gamma - 1, k)` for `k = 0..len` in `f64`.
pub fn kernel_weights(gamma: u32, len: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(len);
    let mut c = 1.0_f64;
    for k in 0..len {
        if k > 0 {
            c *= (k as f64 + f64::from(gamma) - 1.0) / k as f64;
        }
        out.push(c);
    }
    out
}

/// `||z^k||^2 = prod_j 1 / C(k_j + gamma - 1, k_j)`, kept as the reciprocal of
/// an exact integer whenever it fits.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BasisNormSq {
    denominator: Option<u128>,
    ln_denominator: f64,
}

impl BasisNormSq {
    /// The integer `D` with `||z^k||^2 = 1 / D`, when it was computed exactly.
    pub fn exact_denominator(&self) -> Option<u128> {
        self.denominator
    }

    pub fn ln_denominator(&self) -> f64 {
        self.ln_denominator
    }

    pub fn value(&self) -> f64 {
        match self.denominator {
            Some(d) => 1.0 / d as f64,
            None => (-self.ln_denominator).exp(),
        }
    }
}

fn ln_binomial_weight(k: u32, gamma: u32) -> f64 {
    // C(k + gamma - 1, gamma - 1) = prod_{i=1}^{gamma-1} (k + i) / i
    (1..gamma).map(|i| (f64::from(k) / f64::from(i)).ln_1p()).sum()
}

pub fn basis_norm_sq(space: &SpaceSpec, k: &MultiIndex) -> Result<BasisNormSq> {
    space.check_dim(k.len())?;
    let gamma = space.gamma;
    let ln_denominator = k.orders().iter().map(|&kj| ln_binomial_weight(kj, gamma)).sum();
    let exact = if k.orders().iter().all(|&kj| kj <= EXACT_BINOMIAL_DEGREE) {
        k.orders().iter().try_fold(1u128, |acc, &kj| {
            let b = binomial_u128(u64::from(kj) + u64::from(gamma) - 1, u64::from(kj))?;
            acc.checked_mul(b)
        })
    } else {
        None
    };
    Ok(BasisNormSq {
        denominator: exact,
        ln_denominator,
    })
}

/// `K_w(z) = prod_j (1 - conj(w_j) z_j)^(-gamma)`.
pub fn kernel_eval(space: &SpaceSpec, w: &PolyPoint, z: &PolyPoint) -> Result<Complex64> {
    space.check_dim(w.len())?;
    space.check_dim(z.len())?;
    Ok(w.values()
        .zip(z.values())
        .map(|(wj, zj)| inv_pow(1.0 - wj.conj() * zj, space.gamma))
        .product())
}

/// `||K_w|| = prod_j (1 - |w_j|^2)^(-gamma/2)`.
pub fn kernel_norm(space: &SpaceSpec, w: &PolyPoint) -> Result<f64> {
    space.check_dim(w.len())?;
    let norm_sq: f64 = w
        .values()
        .map(|wj| (1.0 - wj.norm_sqr()).powi(-(space.gamma as i32)))
        .product();
    Ok(norm_sq.sqrt())
}

/// `k_w(z) = K_w(z) / ||K_w||`.
pub fn normalized_kernel_eval(space: &SpaceSpec, w: &PolyPoint, z: &PolyPoint) -> Result<Complex64> {
    Ok(kernel_eval(space, w, z)? / kernel_norm(space, w)?)
}

/// Kernel for the `n`-th partial derivative at `w`:
/// `prod_j (gamma)_{n_j} z_j^{n_j} (1 - conj(w_j) z_j)^(-gamma - n_j)`.
pub fn derivative_kernel_eval(space: &SpaceSpec, n: &MultiIndex, w: &PolyPoint, z: &PolyPoint) -> Result<Complex64> {
    space.check_dim(n.len())?;
    space.check_dim(w.len())?;
    space.check_dim(z.len())?;
    let gamma = space.gamma;
    Ok(n.orders()
        .iter()
        .zip(w.values().zip(z.values()))
        .map(|(&nj, (wj, zj))| pochhammer(gamma, nj) * ipow(zj, nj) * inv_pow(1.0 - wj.conj() * zj, gamma + nj))
        .product())
}

/// Monomial Taylor coefficients of the one-variable `K_w^{[n]}` through `len - 1`.
pub fn derivative_kernel_coefficients(gamma: u32, n: u32, w: Complex64, len: usize) -> Vec<Complex64> {
    // K_w^{[n]}(z) = (gamma)_n sum_m C(m + gamma + n - 1, m) conj(w)^m z^{m + n}
    let lead = pochhammer(gamma, n);
    let shifted = kernel_weights(gamma + n, len);
    let wc = w.conj();
    let mut out = vec![Complex64::new(0.0, 0.0); len];
    let mut power = Complex64::new(1.0, 0.0);
    for (m, weight) in shifted.iter().enumerate() {
        let k = m + n as usize;
        if k >= len {
            break;
        }
        out[k] = power * (lead * weight);
        power *= wc;
    }
    out
}

/// Coefficients of `f` in the orthonormal basis `e_k = z^k / ||z^k||` (`d = 1`).
pub fn orthonormal_coefficients(gamma: u32, monomial: &[Complex64]) -> Vec<Complex64> {
    let weights = kernel_weights(gamma, monomial.len());
    monomial.iter().zip(&weights).map(|(a, b)| a / b.sqrt()).collect()
}

/// Inverse of [`orthonormal_coefficients`].
pub fn monomial_coefficients(gamma: u32, orthonormal: &[Complex64]) -> Vec<Complex64> {
    let weights = kernel_weights(gamma, orthonormal.len());
    orthonormal.iter().zip(&weights).map(|(a, b)| a * b.sqrt()).collect()
}

/// Inner product of two orthonormal coefficient vectors.
pub fn inner(x: &[Complex64], y: &[Complex64]) -> Complex64 {
    x.iter().zip(y).map(|(a, b)| a * b.conj()).sum()
}

fn require_disk(space: &SpaceSpec) -> Result<()> {
    if space.dim != 1 {
        return Err(Error::DimensionMismatch {
            expected: 1,
            got: space.dim,
        });
    }
    Ok(())
}

/// `f(w)` computed as the inner product `<f, K_w>` in the orthonormal basis.
pub fn reproduce_eval(space: &SpaceSpec, coeffs: &TruncatedSeries, w: DiskPoint) -> Result<Complex64> {
    reproduce_deriv(space, coeffs, 0, w)
}

/// `f^{(n)}(w)` computed as `<f, K_w^{[n]}>` in the orthonormal basis.
pub fn reproduce_deriv(space: &SpaceSpec, coeffs: &TruncatedSeries, n: u32, w: DiskPoint) -> Result<Complex64> {
    require_disk(space)?;
    let len = coeffs.coeffs().len();
    let f_on = orthonormal_coefficients(space.gamma, coeffs.coeffs());
    let k_on = orthonormal_coefficients(
        space.gamma,
        &derivative_kernel_coefficients(space.gamma, n, w.value(), len),
    );
    Ok(inner(&f_on, &k_on))
}

/// `<f, K_w>` on the polydisk for `f = sum_k a_k z^k` given as sparse terms.
pub fn reproduce_eval_tensor(space: &SpaceSpec, terms: &[(MultiIndex, Complex64)], w: &PolyPoint) -> Result<Complex64> {
    space.check_dim(w.len())?;
    let mut acc = Complex64::new(0.0, 0.0);
    for (k, a) in terms {
        let ns = basis_norm_sq(space, k)?;
        // ON coefficient of f is a * ||z^k||; that of K_w is conj(w)^k / ||z^k||.
        let kernel_on: Complex64 = k
            .orders()
            .iter()
            .zip(w.values())
            .map(|(&kj, wj)| ipow(wj.conj(), kj))
            .product::<Complex64>()
            / ns.value().sqrt();
        acc += a * ns.value().sqrt() * kernel_on.conj();
    }
    Ok(acc)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn pt(re: f64) -> PolyPoint {
        PolyPoint::from_complex(&[c(re, 0.0)]).unwrap()
    }

    #[test]
    fn kernel_examples() {
        let h1 = SpaceSpec::disk(1).unwrap();
        let h2 = SpaceSpec::disk(2).unwrap();
        assert!((kernel_eval(&h1, &pt(0.0), &pt(0.7)).unwrap() - 1.0).norm() < 1e-15);
        assert!((kernel_eval(&h2, &pt(0.5), &pt(0.5)).unwrap() - 16.0 / 9.0).norm() < 1e-14);
        let d2 = SpaceSpec::new(2, 1).unwrap();
        let w = PolyPoint::from_complex(&[c(0.5, 0.0), c(0.0, 0.0)]).unwrap();
        let z = PolyPoint::from_complex(&[c(0.5, 0.0), c(0.3, 0.0)]).unwrap();
        assert!((kernel_eval(&d2, &w, &z).unwrap() - 4.0 / 3.0).norm() < 1e-14);
    }

    #[test]
    fn norm_examples() {
        let h2 = SpaceSpec::disk(2).unwrap();
        assert!((kernel_norm(&h2, &pt(0.0)).unwrap() - 1.0).abs() < 1e-15);
        assert!((kernel_norm(&h2, &pt(0.6)).unwrap() - 1.5625).abs() < 1e-14);
        let d2 = SpaceSpec::new(2, 1).unwrap();
        let w = PolyPoint::from_complex(&[c(0.6, 0.0), c(0.8, 0.0)]).unwrap();
        assert!((kernel_norm(&d2, &w).unwrap() - 1.0 / 0.48).abs() < 1e-13);
    }

    #[test]
    fn normalized_examples() {
        let h1 = SpaceSpec::disk(1).unwrap();
        assert!((normalized_kernel_eval(&h1, &pt(0.0), &pt(0.3)).unwrap() - 1.0).norm() < 1e-15);
        let v = normalized_kernel_eval(&h1, &pt(0.5), &pt(0.5)).unwrap();
        assert!((v - 0.75_f64.powf(-0.5)).norm() < 1e-14);
        let h3 = SpaceSpec::disk(3).unwrap();
        let v = normalized_kernel_eval(&h3, &pt(0.5), &pt(0.0)).unwrap();
        assert!((v - 0.75_f64.powf(1.5)).norm() < 1e-14);
        // value at z = w equals the norm
        let w = PolyPoint::from_complex(&[c(0.3, -0.4)]).unwrap();
        let at_w = normalized_kernel_eval(&h3, &w, &w).unwrap();
        assert!((at_w - kernel_norm(&h3, &w).unwrap()).norm() < 1e-13);
    }

    #[test]
    fn derivative_kernel_examples() {
        let h1 = SpaceSpec::disk(1).unwrap();
        let h2 = SpaceSpec::disk(2).unwrap();
        let n0 = MultiIndex::single(0);
        let v = derivative_kernel_eval(&h1, &n0, &pt(0.5), &pt(0.5)).unwrap();
        assert!((v - 4.0 / 3.0).norm() < 1e-14);
        let v = derivative_kernel_eval(&h1, &MultiIndex::single(1), &pt(0.0), &pt(0.5)).unwrap();
        assert!((v - 0.5).norm() < 1e-15);
        let v = derivative_kernel_eval(&h2, &MultiIndex::single(2), &pt(0.0), &pt(0.5)).unwrap();
        assert!((v - 1.5).norm() < 1e-14);
        // f = z^2 in H_2: f''(0) = 2 = <f, K_0^{[2]}>
        let f = TruncatedSeries::monomial(2, 4);
        let d2 = reproduce_deriv(&h2, &f, 2, DiskPoint::origin()).unwrap();
        assert!((d2 - 2.0).norm() < 1e-14);
    }

    #[test]
    fn derivative_kernel_zero_order_is_kernel() {
        let space = SpaceSpec::new(2, 3).unwrap();
        let w = PolyPoint::from_complex(&[c(0.2, 0.3), c(-0.4, 0.1)]).unwrap();
        let z = PolyPoint::from_complex(&[c(0.5, -0.1), c(0.0, 0.6)]).unwrap();
        let a = derivative_kernel_eval(&space, &MultiIndex::zeros(2), &w, &z).unwrap();
        let b = kernel_eval(&space, &w, &z).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn basis_norm_examples() {
        let h1 = SpaceSpec::disk(1).unwrap();
        let b = basis_norm_sq(&h1, &MultiIndex::single(5)).unwrap();
        assert_eq!(b.exact_denominator(), Some(1));
        let h2 = SpaceSpec::disk(2).unwrap();
        let b = basis_norm_sq(&h2, &MultiIndex::single(3)).unwrap();
        assert_eq!(b.exact_denominator(), Some(4));
        let s = SpaceSpec::new(2, 3).unwrap();
        let b = basis_norm_sq(&s, &MultiIndex::new(vec![1, 2]).unwrap()).unwrap();
        assert_eq!(b.exact_denominator(), Some(18));
        assert!((b.value() - 1.0 / 18.0).abs() < 1e-16);
    }

    #[test]
    fn basis_norm_log_domain_matches_exact() {
        let s = SpaceSpec::disk(15).unwrap();
        for k in [0u32, 1, 17, 200, 512] {
            let b = basis_norm_sq(&s, &MultiIndex::single(k)).unwrap();
            let exact = b.exact_denominator().unwrap() as f64;
            assert!(((b.ln_denominator() - exact.ln()) / exact.ln().max(1.0)).abs() < 1e-13);
        }
        let beyond = basis_norm_sq(&s, &MultiIndex::single(2000)).unwrap();
        assert!(beyond.exact_denominator().is_none());
        assert!(beyond.value() > 0.0);
    }

    #[test]
    fn binomial_overflow_is_detected() {
        assert_eq!(binomial_u128(10, 3), Some(120));
        assert_eq!(binomial_u128(3, 5), Some(0));
        assert!(binomial_u128(400, 200).is_none());
    }

    #[test]
    fn kernel_weights_match_exact_binomials() {
        let w = kernel_weights(4, 30);
        for (k, wk) in w.iter().enumerate() {
            let exact = binomial_u128(k as u64 + 3, k as u64).unwrap() as f64;
            assert!((wk - exact).abs() / exact < 1e-14);
        }
    }

    #[test]
    fn reproduce_examples() {
        let h2 = SpaceSpec::disk(2).unwrap();
        let f = TruncatedSeries::from_real(&[1.0, 1.0]).unwrap();
        let v = reproduce_eval(&h2, &f, DiskPoint::real(0.5).unwrap()).unwrap();
        assert!((v - 1.5).norm() < 1e-15);
        let h1 = SpaceSpec::disk(1).unwrap();
        let f = TruncatedSeries::monomial(3, 3);
        let v = reproduce_eval(&h1, &f, DiskPoint::real(0.2).unwrap()).unwrap();
        assert!((v - 0.008).norm() < 1e-15);
    }

    #[test]
    fn reproduce_rejects_polydisk() {
        let s = SpaceSpec::new(2, 1).unwrap();
        let f = TruncatedSeries::one(3);
        assert!(matches!(
            reproduce_eval(&s, &f, DiskPoint::origin()),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn tensor_reproduce_matches_direct_product() {
        let s = SpaceSpec::new(2, 2).unwrap();
        let terms = vec![
            (MultiIndex::new(vec![0, 0]).unwrap(), c(1.0, 0.0)),
            (MultiIndex::new(vec![2, 1]).unwrap(), c(0.5, -1.0)),
            (MultiIndex::new(vec![0, 3]).unwrap(), c(0.0, 2.0)),
        ];
        let w = PolyPoint::from_complex(&[c(0.3, 0.2), c(-0.5, 0.1)]).unwrap();
        let (w1, w2) = (w.coords()[0].value(), w.coords()[1].value());
        let direct = c(1.0, 0.0) + c(0.5, -1.0) * w1 * w1 * w2 + c(0.0, 2.0) * w2 * w2 * w2;
        let v = reproduce_eval_tensor(&s, &terms, &w).unwrap();
        assert!((v - direct).norm() < 1e-14);
    }

    #[test]
    fn rejects_bad_inputs() {
        assert!(SpaceSpec::new(0, 1).is_err());
        assert!(SpaceSpec::new(1, 0).is_err());
        assert!(DiskPoint::new(c(1.0, 0.0)).is_err());
        assert!(DiskPoint::new(c(0.6, 0.8)).is_err());
        assert!(DiskPoint::new(c(1.0 - 1e-9, 0.0)).is_ok());
        assert!(DiskPoint::new(c(f64::NAN, 0.0)).is_err());
        let h1 = SpaceSpec::disk(1).unwrap();
        let d2 = PolyPoint::from_complex(&[c(0.1, 0.0), c(0.1, 0.0)]).unwrap();
        assert!(matches!(
            kernel_eval(&h1, &d2, &pt(0.1)),
            Err(Error::DimensionMismatch { expected: 1, got: 2 })
        ));
    }

    #[test]
    fn integer_powers() {
        let z = c(0.3, -0.7);
        let mut naive = c(1.0, 0.0);
        for n in 0..20 {
            assert!((ipow(z, n) - naive).norm() < 1e-15);
            naive *= z;
        }
        assert!((inv_pow(c(2.0, 0.0), 3) - 0.125).norm() < 1e-16);
        assert_eq!(pochhammer(2, 2), 6.0);
        assert_eq!(pochhammer(5, 0), 1.0);
        assert_eq!(falling_factorial(5, 2), 20.0);
        assert_eq!(falling_factorial(1, 2), 0.0);
    }
}
