//! Weighted composition-differentiation operators, conjugations, canonical
//! symbol families and the defect functionals that certify the symmetry
//! identities on kernel functions.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::jets::{self_map_margin, AnalyticSymbol, LftSymbol, TruncatedSeries, WeightSymbol};
use crate::kernels::{
    derivative_kernel_coefficients, derivative_kernel_eval, falling_factorial, inv_pow, ipow, kernel_weights,
    orthonormal_coefficients, pochhammer, DiskPoint, MultiIndex, PolyPoint, SpaceSpec,
};
use crate::sampling::{sample_pairs, DEFAULT_RADIUS, DEFAULT_SAMPLES};

const ONE: Complex64 = Complex64::new(1.0, 0.0);
const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Angles sampled when validating a composition symbol.
pub const MARGIN_SAMPLES: usize = 256;
/// Largest finite section accepted by [`operator_matrix`].
pub const MAX_MATRIX_DIM: usize = 1024;
/// Defects below this certify an identity.
pub const PASS_THRESHOLD: f64 = 1e-9;
/// Defects above this refute an identity.
pub const FAIL_THRESHOLD: f64 = 1e-4;
/// Tolerance on `|mu| = |xi| = 1`.
pub const UNIMODULAR_TOL: f64 = 1e-14;

/// A composition symbol of one variable.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum SelfMap {
    Lft(LftSymbol),
    Polynomial(TruncatedSeries),
}

impl SelfMap {
    pub fn is_identity(&self) -> bool {
        match self {
            SelfMap::Lft(l) => l.is_identity(),
            SelfMap::Polynomial(p) => p
                .coeffs()
                .iter()
                .enumerate()
                .all(|(k, &c)| c == if k == 1 { ONE } else { ZERO }),
        }
    }
}

impl AnalyticSymbol for SelfMap {
    fn eval(&self, z: Complex64) -> Complex64 {
        match self {
            SelfMap::Lft(l) => l.eval(z),
            SelfMap::Polynomial(p) => p.eval(z),
        }
    }

    fn series(&self, degree: usize) -> TruncatedSeries {
        match self {
            SelfMap::Lft(l) => l.series(degree),
            SelfMap::Polynomial(p) => p.with_degree(degree),
        }
    }
}

impl From<LftSymbol> for SelfMap {
    fn from(l: LftSymbol) -> Self {
        SelfMap::Lft(l)
    }
}

/// A weight of one variable.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum Weight {
    Closed(WeightSymbol),
    Polynomial(TruncatedSeries),
    Product(Box<Weight>, Box<Weight>),
}

impl Weight {
    pub fn one() -> Self {
        Weight::Closed(WeightSymbol::constant(ONE))
    }

    pub fn is_identically_zero(&self) -> bool {
        match self {
            Weight::Closed(w) => w.a() == ZERO,
            Weight::Polynomial(p) => p.is_zero(),
            Weight::Product(a, b) => a.is_identically_zero() || b.is_identically_zero(),
        }
    }

    /// `self * (1 + eps z)`, used for negative controls.
    pub fn perturbed(self, eps: f64) -> Self {
        let factor = TruncatedSeries::new(vec![ONE, Complex64::new(eps, 0.0)]).expect("finite coefficients");
        Weight::Product(Box::new(self), Box::new(Weight::Polynomial(factor)))
    }
}

impl AnalyticSymbol for Weight {
    fn eval(&self, z: Complex64) -> Complex64 {
        match self {
            Weight::Closed(w) => w.eval(z),
            Weight::Polynomial(p) => p.eval(z),
            Weight::Product(a, b) => a.eval(z) * b.eval(z),
        }
    }

    fn series(&self, degree: usize) -> TruncatedSeries {
        match self {
            Weight::Closed(w) => w.series(degree),
            Weight::Polynomial(p) => p.with_degree(degree),
            Weight::Product(a, b) => a.series(degree).mul(&b.series(degree)).expect("equal degrees"),
        }
    }
}

impl From<WeightSymbol> for Weight {
    fn from(w: WeightSymbol) -> Self {
        Weight::Closed(w)
    }
}

/// One summand `a_j D_{j, psi_j, phi}` of a generalized sum.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SumTerm {
    pub coeff: Complex64,
    pub order: u32,
    pub weight: Weight,
}

/// Operator families. On the polydisk the weight is the product of the
/// per-coordinate weights.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum OperatorKind {
    Composition {
        phi: Vec<SelfMap>,
    },
    WeightedComposition {
        psi: Vec<Weight>,
        phi: Vec<SelfMap>,
    },
    CompDiff {
        n: MultiIndex,
        psi: Vec<Weight>,
        phi: Vec<SelfMap>,
    },
    GeneralizedSum {
        terms: Vec<SumTerm>,
        phi: SelfMap,
    },
}

/// A validated operator on `H_gamma(D^d)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OperatorSpec {
    space: SpaceSpec,
    kind: OperatorKind,
    margins: Vec<f64>,
}

struct Term<'a> {
    coeff: Complex64,
    orders: Vec<u32>,
    psi: &'a [Weight],
}

impl<'a> Term<'a> {
    fn psi_at(&self, z: &[Complex64]) -> Complex64 {
        self.psi.iter().zip(z).map(|(p, &zj)| p.eval(zj)).product::<Complex64>() * self.coeff
    }
}

impl OperatorSpec {
    pub fn new(space: SpaceSpec, kind: OperatorKind) -> Result<Self> {
        let d = space.dim();
        let check_len = |got: usize| {
            if got != d {
                Err(Error::DimensionMismatch { expected: d, got })
            } else {
                Ok(())
            }
        };
        let check_weights = |psi: &[Weight]| -> Result<()> {
            check_len(psi.len())?;
            if psi.iter().any(Weight::is_identically_zero) {
                return Err(Error::InvalidArgument("weight psi is identically zero".into()));
            }
            Ok(())
        };
        let phis: Vec<&SelfMap> = match &kind {
            OperatorKind::Composition { phi } => {
                check_len(phi.len())?;
                phi.iter().collect()
            }
            OperatorKind::WeightedComposition { psi, phi } => {
                check_weights(psi)?;
                check_len(phi.len())?;
                phi.iter().collect()
            }
            OperatorKind::CompDiff { n, psi, phi } => {
                check_len(n.len())?;
                check_weights(psi)?;
                check_len(phi.len())?;
                phi.iter().collect()
            }
            OperatorKind::GeneralizedSum { terms, phi } => {
                if d != 1 {
                    return Err(Error::Unsupported(
                        "generalized sums are defined on the disk only (d = 1)".into(),
                    ));
                }
                if terms.is_empty() {
                    return Err(Error::InvalidArgument("generalized sum needs at least one term".into()));
                }
                if terms.iter().any(|t| t.order == 0) {
                    return Err(Error::InvalidArgument("generalized sum orders start at 1".into()));
                }
                if terms.iter().any(|t| t.weight.is_identically_zero()) {
                    return Err(Error::InvalidArgument("weight psi_j is identically zero".into()));
                }
                if terms.iter().all(|t| t.coeff == ZERO) {
                    return Err(Error::InvalidArgument("all amplitudes a_j vanish".into()));
                }
                vec![phi]
            }
        };
        let mut margins = Vec::with_capacity(phis.len());
        for phi in phis {
            let m = self_map_margin(phi, MARGIN_SAMPLES)?;
            if !(m > 0.0) {
                return Err(Error::NotSelfMap { margin: m });
            }
            margins.push(m);
        }
        Ok(Self { space, kind, margins })
    }

    pub fn composition(space: SpaceSpec, phi: Vec<SelfMap>) -> Result<Self> {
        Self::new(space, OperatorKind::Composition { phi })
    }

    pub fn weighted_composition(space: SpaceSpec, psi: Vec<Weight>, phi: Vec<SelfMap>) -> Result<Self> {
        Self::new(space, OperatorKind::WeightedComposition { psi, phi })
    }

    pub fn comp_diff(space: SpaceSpec, n: MultiIndex, psi: Vec<Weight>, phi: Vec<SelfMap>) -> Result<Self> {
        Self::new(space, OperatorKind::CompDiff { n, psi, phi })
    }

    pub fn generalized_sum(gamma: u32, terms: Vec<SumTerm>, phi: SelfMap) -> Result<Self> {
        Self::new(SpaceSpec::disk(gamma)?, OperatorKind::GeneralizedSum { terms, phi })
    }

    pub fn space(&self) -> &SpaceSpec {
        &self.space
    }

    pub fn kind(&self) -> &OperatorKind {
        &self.kind
    }

    /// Sampled self-map margins of the composition symbols.
    pub fn margins(&self) -> &[f64] {
        &self.margins
    }

    /// The same operator with the first weight multiplied by `1 + eps z`.
    pub fn perturbed(&self, eps: f64) -> Result<Self> {
        let space = self.space;
        let d = space.dim();
        let kind = match self.kind.clone() {
            OperatorKind::Composition { phi } => {
                let mut psi = vec![Weight::one(); d];
                psi[0] = psi[0].clone().perturbed(eps);
                OperatorKind::WeightedComposition { psi, phi }
            }
            OperatorKind::WeightedComposition { mut psi, phi } => {
                psi[0] = psi[0].clone().perturbed(eps);
                OperatorKind::WeightedComposition { psi, phi }
            }
            OperatorKind::CompDiff { n, mut psi, phi } => {
                psi[0] = psi[0].clone().perturbed(eps);
                OperatorKind::CompDiff { n, psi, phi }
            }
            OperatorKind::GeneralizedSum { mut terms, phi } => {
                terms[0].weight = terms[0].weight.clone().perturbed(eps);
                OperatorKind::GeneralizedSum { terms, phi }
            }
        };
        Self::new(space, kind)
    }

    fn phis(&self) -> &[SelfMap] {
        match &self.kind {
            OperatorKind::Composition { phi }
            | OperatorKind::WeightedComposition { phi, .. }
            | OperatorKind::CompDiff { phi, .. } => phi,
            OperatorKind::GeneralizedSum { phi, .. } => std::slice::from_ref(phi),
        }
    }

    fn terms(&self) -> Vec<Term<'_>> {
        let d = self.space.dim();
        match &self.kind {
            OperatorKind::Composition { .. } => vec![Term {
                coeff: ONE,
                orders: vec![0; d],
                psi: &[],
            }],
            OperatorKind::WeightedComposition { psi, .. } => vec![Term {
                coeff: ONE,
                orders: vec![0; d],
                psi,
            }],
            OperatorKind::CompDiff { n, psi, .. } => vec![Term {
                coeff: ONE,
                orders: n.orders().to_vec(),
                psi,
            }],
            OperatorKind::GeneralizedSum { terms, .. } => terms
                .iter()
                .map(|t| Term {
                    coeff: t.coeff,
                    orders: vec![t.order],
                    psi: std::slice::from_ref(&t.weight),
                })
                .collect(),
        }
    }

    /// `phi(z)` coordinatewise, rejected if it leaves the disk.
    pub fn phi_at(&self, z: &PolyPoint) -> Result<PolyPoint> {
        self.check_point(z)?;
        let coords = self
            .phis()
            .iter()
            .zip(z.values())
            .map(|(p, zj)| {
                let v = p.eval(zj);
                DiskPoint::new(v).map_err(|_| Error::Domain(format!("phi({zj}) = {v} is not in the open disk")))
            })
            .collect::<Result<Vec<_>>>()?;
        PolyPoint::new(coords)
    }

    fn check_point(&self, z: &PolyPoint) -> Result<()> {
        if z.len() != self.space.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.space.dim(),
                got: z.len(),
            });
        }
        Ok(())
    }

    /// `(T f)` for a one-variable series `f`, through the degree of `f`.
    pub fn apply_series(&self, f: &TruncatedSeries) -> Result<TruncatedSeries> {
        require_disk(&self.space)?;
        let degree = f.degree();
        let phi = self.phis()[0].series(degree);
        let mut out = TruncatedSeries::zeros(degree);
        for t in self.terms() {
            let inner = f.nth_derivative(t.orders[0]).compose(&phi)?;
            let weighted = match t.psi.first() {
                Some(p) => inner.mul(&p.series(degree))?,
                None => inner,
            };
            out = out.add(&weighted.scale(t.coeff))?;
        }
        Ok(out)
    }

    /// `T K_w (z)` from the definition of `T`.
    pub fn apply_to_kernel(&self, w: &PolyPoint, z: &PolyPoint) -> Result<Complex64> {
        self.check_point(w)?;
        let phi_z = self.phi_at(z)?;
        let z: Vec<Complex64> = z.values().collect();
        let gamma = self.space.gamma();
        let mut acc = ZERO;
        for t in self.terms() {
            let mut val = t.psi_at(&z);
            for ((&n, wj), pj) in t.orders.iter().zip(w.values()).zip(phi_z.values()) {
                val *= pochhammer(gamma, n) * ipow(wj.conj(), n) * inv_pow(1.0 - wj.conj() * pj, gamma + n);
            }
            acc += val;
        }
        Ok(acc)
    }
}

fn require_disk(space: &SpaceSpec) -> Result<()> {
    if space.dim() != 1 {
        return Err(Error::Unsupported(
            "matrix and series paths are implemented for d = 1 only".into(),
        ));
    }
    Ok(())
}

/// One summand `coeff * K^{[orders]}_{center}`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KernelTerm {
    pub coeff: Complex64,
    pub orders: MultiIndex,
    pub center: PolyPoint,
}

/// A finite combination of derivative kernels.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KernelCombination {
    space: SpaceSpec,
    terms: Vec<KernelTerm>,
}

impl KernelCombination {
    pub fn terms(&self) -> &[KernelTerm] {
        &self.terms
    }

    pub fn eval(&self, z: &PolyPoint) -> Result<Complex64> {
        self.terms.iter().try_fold(ZERO, |acc, t| {
            Ok(acc + t.coeff * derivative_kernel_eval(&self.space, &t.orders, &t.center, z)?)
        })
    }

    /// Orthonormal-basis coefficients `0..len` (disk only).
    pub fn on_coefficients(&self, len: usize) -> Result<Vec<Complex64>> {
        require_disk(&self.space)?;
        let gamma = self.space.gamma();
        let mut out = vec![ZERO; len];
        for t in &self.terms {
            let mono = derivative_kernel_coefficients(gamma, t.orders.orders()[0], t.center.coords()[0].value(), len);
            for (o, c) in out.iter_mut().zip(orthonormal_coefficients(gamma, &mono)) {
                *o += t.coeff * c;
            }
        }
        Ok(out)
    }
}

/// `T^* K_w = sum_t conj(a_t psi_t(w)) K^{[n_t]}_{phi(w)}`.
pub fn adjoint_on_kernel(op: &OperatorSpec, w: &PolyPoint) -> Result<KernelCombination> {
    let center = op.phi_at(w)?;
    let wv: Vec<Complex64> = w.values().collect();
    let terms = op
        .terms()
        .iter()
        .map(|t| {
            Ok(KernelTerm {
                coeff: t.psi_at(&wv).conj(),
                orders: MultiIndex::new(t.orders.clone())?,
                center: center.clone(),
            })
        })
        .collect::<Result<_>>()?;
    Ok(KernelCombination {
        space: *op.space(),
        terms,
    })
}

/// Anti-linear conjugations of `H_gamma`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum ConjugationSpec {
    /// `f(z) -> conj(f(conj(z)))`.
    StandardJ,
    /// `f(z) -> mu conj(f(conj(xi z)))`.
    Rotation { mu: Complex64, xi: Complex64 },
    /// `f(z) -> u(z) conj(f(conj(v(z))))`, carried as data only.
    WeightedComp { u: Weight, v: SelfMap },
}

impl ConjugationSpec {
    pub fn rotation(mu: Complex64, xi: Complex64) -> Result<Self> {
        for (name, v) in [("mu", mu), ("xi", xi)] {
            if !((v.norm() - 1.0).abs() <= UNIMODULAR_TOL) {
                return Err(Error::InvalidArgument(format!(
                    "{name} must be unimodular, |{name}| = {}",
                    v.norm()
                )));
            }
        }
        Ok(ConjugationSpec::Rotation { mu, xi })
    }

    fn parameters(&self) -> Result<(Complex64, Complex64)> {
        match self {
            ConjugationSpec::StandardJ => Ok((ONE, ONE)),
            ConjugationSpec::Rotation { mu, xi } => Ok((*mu, *xi)),
            ConjugationSpec::WeightedComp { .. } => Err(Error::Unsupported(
                "the weighted composition conjugation has no operations".into(),
            )),
        }
    }

    /// `a_k -> mu xi^k conj(a_k)` on a coefficient vector.
    pub fn apply_coeffs(&self, coeffs: &[Complex64]) -> Result<Vec<Complex64>> {
        let (mu, xi) = self.parameters()?;
        let mut p = mu;
        Ok(coeffs
            .iter()
            .map(|a| {
                let v = p * a.conj();
                p *= xi;
                v
            })
            .collect())
    }
}

pub fn conjugation_coeff_map(conj: &ConjugationSpec, coeffs: &TruncatedSeries) -> Result<TruncatedSeries> {
    TruncatedSeries::new(conj.apply_coeffs(coeffs.coeffs())?)
}

/// Closed-form sides of `T C K_w = C T^* K_w`.
pub struct SymmetryPair<'a> {
    op: &'a OperatorSpec,
    mu: Complex64,
    xi: Complex64,
    w: Vec<Complex64>,
    weights_at_w: Vec<Complex64>,
    phi_w: Vec<Complex64>,
}

impl SymmetryPair<'_> {
    /// `T C K_w (z)`.
    pub fn lhs(&self, z: &PolyPoint) -> Result<Complex64> {
        let phi_z = self.op.phi_at(z)?;
        let zv: Vec<Complex64> = z.values().collect();
        let gamma = self.op.space().gamma();
        let mut acc = ZERO;
        for t in self.op.terms() {
            let mut val = t.psi_at(&zv);
            for ((&n, &wj), pj) in t.orders.iter().zip(&self.w).zip(phi_z.values()) {
                let xw = self.xi * wj;
                val *= pochhammer(gamma, n) * ipow(xw, n) * inv_pow(1.0 - xw * pj, gamma + n);
            }
            acc += val;
        }
        Ok(acc * self.mu)
    }

    /// `C T^* K_w (z)`.
    pub fn rhs(&self, z: &PolyPoint) -> Result<Complex64> {
        self.op.check_point(z)?;
        let gamma = self.op.space().gamma();
        let mut acc = ZERO;
        for (t, &aw) in self.op.terms().iter().zip(&self.weights_at_w) {
            let mut val = aw;
            for ((&n, zj), &pj) in t.orders.iter().zip(z.values()).zip(&self.phi_w) {
                let xz = self.xi * zj;
                val *= pochhammer(gamma, n) * ipow(xz, n) * inv_pow(1.0 - xz * pj, gamma + n);
            }
            acc += val;
        }
        Ok(acc * self.mu)
    }
}

pub fn apply_on_kernel<'a>(op: &'a OperatorSpec, conj: &ConjugationSpec, w: &PolyPoint) -> Result<SymmetryPair<'a>> {
    let (mu, xi) = conj.parameters()?;
    if matches!(conj, ConjugationSpec::Rotation { .. }) && op.space().dim() != 1 {
        return Err(Error::Unsupported(
            "the rotation conjugation is defined on the disk only (d = 1)".into(),
        ));
    }
    let phi_w: Vec<Complex64> = op.phi_at(w)?.values().collect();
    let wv: Vec<Complex64> = w.values().collect();
    let weights_at_w = op.terms().iter().map(|t| t.psi_at(&wv)).collect();
    Ok(SymmetryPair {
        op,
        mu,
        xi,
        w: wv,
        weights_at_w,
        phi_w,
    })
}

/// Sampling parameters of the defect sweeps.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SampleSpec {
    pub samples: usize,
    pub radius: f64,
    pub seed: u64,
}

impl Default for SampleSpec {
    fn default() -> Self {
        Self {
            samples: DEFAULT_SAMPLES,
            radius: DEFAULT_RADIUS,
            seed: 0,
        }
    }
}

impl SampleSpec {
    fn validate(&self) -> Result<()> {
        if self.samples == 0 {
            return Err(Error::InvalidArgument("need at least one sample".into()));
        }
        if !(self.radius > 0.0 && self.radius < 1.0) {
            return Err(Error::InvalidArgument(format!(
                "sampling radius must lie in (0, 1), got {}",
                self.radius
            )));
        }
        Ok(())
    }
}

/// `|a - b|` measured relative to the magnitude of the values once they exceed 1.
pub fn scaled_residual(a: Complex64, b: Complex64) -> f64 {
    (a - b).norm() / 1f64.max(a.norm()).max(b.norm())
}

fn max_over_pairs<F>(op: &OperatorSpec, spec: &SampleSpec, residual: F) -> Result<f64>
where
    F: Fn(&PolyPoint, &PolyPoint) -> Result<f64> + Sync,
{
    spec.validate()?;
    let pairs = sample_pairs(op.space().dim(), spec.samples, spec.radius, spec.seed)?;
    let values = pairs
        .par_iter()
        .map(|(z, w)| residual(z, w))
        .collect::<Result<Vec<f64>>>()?;
    Ok(values.into_iter().fold(0.0, f64::max))
}

/// Largest sampled residual of `T C K_w (z) = C T^* K_w (z)`.
pub fn cs_defect(op: &OperatorSpec, conj: &ConjugationSpec, spec: &SampleSpec) -> Result<f64> {
    apply_on_kernel(op, conj, &PolyPoint::new(vec![DiskPoint::origin(); op.space().dim()])?)?;
    max_over_pairs(op, spec, |z, w| {
        let pair = apply_on_kernel(op, conj, w)?;
        Ok(scaled_residual(pair.lhs(z)?, pair.rhs(z)?))
    })
}

/// Largest sampled residual of `T^* K_w (z) = T K_w (z)`.
pub fn sa_defect(op: &OperatorSpec, spec: &SampleSpec) -> Result<f64> {
    max_over_pairs(op, spec, |z, w| {
        let adj = adjoint_on_kernel(op, w)?.eval(z)?;
        let direct = op.apply_to_kernel(w, z)?;
        Ok(scaled_residual(adj, direct))
    })
}

/// A square matrix in the orthonormal monomial basis of `H_gamma(D)`.
#[derive(Debug, Clone, PartialEq)]
pub struct OperatorMatrix {
    gamma: u32,
    entries: DMatrix<Complex64>,
}

impl OperatorMatrix {
    pub fn new(gamma: u32, entries: DMatrix<Complex64>) -> Result<Self> {
        if gamma == 0 {
            return Err(Error::InvalidArgument("gamma must be a positive integer".into()));
        }
        if entries.nrows() != entries.ncols() || entries.nrows() == 0 {
            return Err(Error::InvalidArgument(format!(
                "operator matrix must be square and non-empty, got {}x{}",
                entries.nrows(),
                entries.ncols()
            )));
        }
        if entries.iter().any(|c| !(c.re.is_finite() && c.im.is_finite())) {
            return Err(Error::InvalidArgument("operator matrix entries must be finite".into()));
        }
        Ok(Self { gamma, entries })
    }

    pub fn identity(gamma: u32, dim: usize) -> Result<Self> {
        Self::new(gamma, DMatrix::identity(dim, dim))
    }

    pub fn diagonal(gamma: u32, diag: &[Complex64]) -> Result<Self> {
        Self::new(
            gamma,
            DMatrix::from_diagonal(&nalgebra::DVector::from_column_slice(diag)),
        )
    }

    pub fn gamma(&self) -> u32 {
        self.gamma
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn entries(&self) -> &DMatrix<Complex64> {
        &self.entries
    }

    pub fn get(&self, row: usize, col: usize) -> Complex64 {
        self.entries[(row, col)]
    }

    /// `T x` for an orthonormal coefficient vector of length `dim`.
    pub fn apply(&self, x: &[Complex64]) -> Result<Vec<Complex64>> {
        if x.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: x.len(),
            });
        }
        let v = &self.entries * nalgebra::DVector::from_column_slice(x);
        Ok(v.iter().copied().collect())
    }

    /// `T^* x`.
    pub fn apply_adjoint(&self, x: &[Complex64]) -> Result<Vec<Complex64>> {
        if x.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: x.len(),
            });
        }
        let v = self.entries.adjoint() * nalgebra::DVector::from_column_slice(x);
        Ok(v.iter().copied().collect())
    }
}

/// Finite section of `op` on `e_0..e_{N-1}`: column `k` holds the orthonormal
/// coefficients of `op(e_k)` truncated at degree `N - 1`.
pub fn operator_matrix(op: &OperatorSpec, n: usize) -> Result<OperatorMatrix> {
    require_disk(op.space())?;
    if n == 0 || n > MAX_MATRIX_DIM {
        return Err(Error::InvalidArgument(format!(
            "matrix size must lie in 1..={MAX_MATRIX_DIM}, got {n}"
        )));
    }
    let gamma = op.space().gamma();
    let degree = n - 1;
    let phi = op.phis()[0].series(degree);
    let mut powers = Vec::with_capacity(n);
    powers.push(TruncatedSeries::one(degree));
    for m in 1..n {
        let next = powers[m - 1].mul(&phi)?;
        powers.push(next);
    }
    let mut entries = DMatrix::from_element(n, n, ZERO);
    for t in op.terms() {
        let order = t.orders[0];
        let psi = t.psi.first().map(|p| p.series(degree));
        for k in (order as usize)..n {
            let base = &powers[k - order as usize];
            let col = match &psi {
                Some(p) => p.mul(base)?,
                None => base.clone(),
            };
            let scale = t.coeff * falling_factorial(k, order);
            for (m, c) in col.coeffs().iter().enumerate() {
                entries[(m, k)] += c * scale;
            }
        }
    }
    let weights = kernel_weights(gamma, n);
    for k in 0..n {
        for m in 0..n {
            entries[(m, k)] *= (weights[k] / weights[m]).sqrt();
        }
    }
    OperatorMatrix::new(gamma, entries)
}

fn retained_block(n: usize, margin: usize) -> Result<usize> {
    if margin >= n {
        return Err(Error::InvalidArgument(format!(
            "margin {margin} must be smaller than N = {n}"
        )));
    }
    Ok(n - margin)
}

/// `max |C T^* C - T|` over the leading `(N - margin)` block of the finite section.
pub fn matrix_cs_defect(op: &OperatorSpec, conj: &ConjugationSpec, n: usize, margin: usize) -> Result<f64> {
    conj.parameters()?;
    let keep = retained_block(n, margin)?;
    let t = operator_matrix(op, n)?;
    let mut worst = 0.0_f64;
    for k in 0..keep {
        let mut e = vec![ZERO; n];
        e[k] = ONE;
        let x = conj.apply_coeffs(&e)?;
        let y = t.apply_adjoint(&x)?;
        let z = conj.apply_coeffs(&y)?;
        for (m, zm) in z.iter().enumerate().take(keep) {
            worst = worst.max((zm - t.get(m, k)).norm());
        }
    }
    Ok(worst)
}

/// `max |T^* - T|` over the leading `(N - margin)` block.
pub fn matrix_sa_defect(op: &OperatorSpec, n: usize, margin: usize) -> Result<f64> {
    let keep = retained_block(n, margin)?;
    let t = operator_matrix(op, n)?;
    let mut worst = 0.0_f64;
    for k in 0..keep {
        for m in 0..keep {
            worst = worst.max((t.get(k, m).conj() - t.get(m, k)).norm());
        }
    }
    Ok(worst)
}

/// Per-coordinate canonical symbols of a composition-differentiation operator.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FactorSymbols {
    pub weights: Vec<WeightSymbol>,
    pub maps: Vec<LftSymbol>,
    pub margins: Vec<f64>,
}

impl FactorSymbols {
    pub fn into_operator(self, space: SpaceSpec, n: MultiIndex) -> Result<OperatorSpec> {
        OperatorSpec::comp_diff(
            space,
            n,
            self.weights.into_iter().map(Weight::Closed).collect(),
            self.maps.into_iter().map(SelfMap::Lft).collect(),
        )
    }
}

/// Canonical symbols of a generalized sum: weights `psi_1..psi_n` and a shared map.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SumSymbols {
    pub weights: Vec<WeightSymbol>,
    pub map: LftSymbol,
    pub margin: f64,
    gamma: u32,
    real_amplitudes: bool,
}

impl SumSymbols {
    /// `sum_j a_j D_{j, psi_j, phi}`; missing amplitudes default to 1.
    pub fn into_operator(self, amplitudes: &[Complex64]) -> Result<OperatorSpec> {
        if amplitudes.len() > self.weights.len() {
            return Err(Error::DimensionMismatch {
                expected: self.weights.len(),
                got: amplitudes.len(),
            });
        }
        if self.real_amplitudes && amplitudes.iter().any(|a| a.im != 0.0) {
            return Err(Error::InvalidArgument(
                "amplitudes a_j must be real for the Hermitian family".into(),
            ));
        }
        let terms = self
            .weights
            .iter()
            .enumerate()
            .map(|(j, w)| SumTerm {
                coeff: amplitudes.get(j).copied().unwrap_or(ONE),
                order: j as u32 + 1,
                weight: Weight::Closed(*w),
            })
            .collect();
        OperatorSpec::generalized_sum(self.gamma, terms, SelfMap::Lft(self.map))
    }
}

fn checked_margin(phi: &LftSymbol) -> Result<f64> {
    let m = self_map_margin(phi, MARGIN_SAMPLES)?;
    if !(m > 0.0) {
        return Err(Error::NotSelfMap { margin: m });
    }
    Ok(m)
}

fn check_lengths(space: &SpaceSpec, n: &MultiIndex, phi0: usize, phi1: usize) -> Result<()> {
    for got in [n.len(), phi0, phi1] {
        if got != space.dim() {
            return Err(Error::DimensionMismatch {
                expected: space.dim(),
                got,
            });
        }
    }
    Ok(())
}

fn factor_symbols(
    space: &SpaceSpec,
    n: &MultiIndex,
    a: Complex64,
    pole: impl Fn(Complex64) -> Complex64,
    phi0: &[Complex64],
    phi1: &[Complex64],
) -> Result<FactorSymbols> {
    if a == ZERO {
        return Err(Error::InvalidArgument(
            "amplitude a = 0 gives psi identically zero".into(),
        ));
    }
    let gamma = space.gamma();
    let mut weights = Vec::with_capacity(space.dim());
    let mut maps = Vec::with_capacity(space.dim());
    let mut margins = Vec::with_capacity(space.dim());
    for (t, ((&nt, &p0), &p1)) in n.orders().iter().zip(phi0).zip(phi1).enumerate() {
        let c = pole(p0);
        let amp = if t == 0 { a } else { ONE };
        weights.push(WeightSymbol::new(amp, nt, c, gamma + nt)?);
        let map = LftSymbol::new(p0, p1, c)?;
        margins.push(checked_margin(&map)?);
        maps.push(map);
    }
    Ok(FactorSymbols { weights, maps, margins })
}

/// Canonical symbols symmetric with respect to the standard conjugation:
/// `psi = a prod z_j^{n_j} (1 - phi0_j z_j)^(-gamma - n_j)`, `phi_j = phi0_j + phi1_j z / (1 - phi0_j z)`.
pub fn canonical_cs_symbols_j(
    space: &SpaceSpec,
    n: &MultiIndex,
    phi0: &[Complex64],
    phi1: &[Complex64],
    a: Complex64,
) -> Result<FactorSymbols> {
    check_lengths(space, n, phi0.len(), phi1.len())?;
    factor_symbols(space, n, a, |p| p, phi0, phi1)
}

/// Canonical self-adjoint symbols:
/// `psi = a prod z_j^{n_j} (1 - conj(phi0_j) z_j)^(-gamma - n_j)`, `phi_j = phi0_j + phi1_j z / (1 - conj(phi0_j) z)`
/// with real `a` and `phi1`.
pub fn canonical_sa_symbols(
    space: &SpaceSpec,
    n: &MultiIndex,
    phi0: &[Complex64],
    phi1: &[f64],
    a: f64,
) -> Result<FactorSymbols> {
    check_lengths(space, n, phi0.len(), phi1.len())?;
    if !a.is_finite() || phi1.iter().any(|p| !p.is_finite()) {
        return Err(Error::InvalidArgument("a and phi1 must be finite reals".into()));
    }
    let phi1: Vec<Complex64> = phi1.iter().map(|&p| Complex64::new(p, 0.0)).collect();
    factor_symbols(space, n, Complex64::new(a, 0.0), |p| p.conj(), phi0, &phi1)
}

fn sum_symbols(
    gamma: u32,
    pole: Complex64,
    phi0: Complex64,
    phi1: Complex64,
    c: &[Complex64],
    real_amplitudes: bool,
) -> Result<SumSymbols> {
    if gamma == 0 {
        return Err(Error::InvalidArgument("gamma must be a positive integer".into()));
    }
    if c.is_empty() {
        return Err(Error::InvalidArgument("need at least one coefficient c_j".into()));
    }
    if c.iter().all(|&cj| cj == ZERO) {
        return Err(Error::InvalidArgument("every psi_j is identically zero".into()));
    }
    let weights = c
        .iter()
        .enumerate()
        .map(|(j, &cj)| WeightSymbol::new(cj, j as u32 + 1, pole, gamma + j as u32 + 1))
        .collect::<Result<Vec<_>>>()?;
    let map = LftSymbol::new(phi0, phi1, pole)?;
    let margin = checked_margin(&map)?;
    Ok(SumSymbols {
        weights,
        map,
        margin,
        gamma,
        real_amplitudes,
    })
}

/// Canonical sums symmetric with respect to `C_{mu, xi}`:
/// `psi_j = c_j z^j (1 - xi phi0 z)^(-gamma - j)`, `phi = phi0 + phi1 z / (1 - xi phi0 z)`.
pub fn canonical_cs_symbols_rotation(
    gamma: u32,
    xi: Complex64,
    phi0: Complex64,
    phi1: Complex64,
    c: &[Complex64],
) -> Result<SumSymbols> {
    ConjugationSpec::rotation(ONE, xi)?;
    sum_symbols(gamma, xi * phi0, phi0, phi1, c, false)
}

/// Canonical Hermitian sums:
/// `psi_j = c_j z^j (1 - conj(phi0) z)^(-gamma - j)`, `phi = phi0 + phi1 z / (1 - conj(phi0) z)`
/// with real `c_j` and `phi1`.
pub fn canonical_hermitian_symbols(gamma: u32, phi0: Complex64, phi1: f64, c: &[f64]) -> Result<SumSymbols> {
    if !phi1.is_finite() || c.iter().any(|x| !x.is_finite()) {
        return Err(Error::InvalidArgument("phi1 and c_j must be finite reals".into()));
    }
    let c: Vec<Complex64> = c.iter().map(|&x| Complex64::new(x, 0.0)).collect();
    sum_symbols(gamma, phi0.conj(), phi0, Complex64::new(phi1, 0.0), &c, true)
}
