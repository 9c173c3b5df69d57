//! Berezin transforms of composition operators and the geometry of their ranges.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::jets::{AnalyticSymbol, LftSymbol};
use crate::kernels::{ipow, kernel_weights, DiskPoint};
use crate::symbols::{OperatorMatrix, SelfMap};

/// Fraction of `||K_w||^2` the truncated kernel may lose in [`berezin_matrix`].
pub const KERNEL_TAIL_TOL: f64 = 1e-8;
/// Membership radius of the sampled-range test, in units of the local spacing.
pub const MEMBERSHIP_FACTOR: f64 = 10.0;
/// `|Im v|` below this counts as real in the geometric searches.
pub const REAL_TOL: f64 = 1e-12;

/// Parameter of the disk automorphism `(z - alpha) / (1 - conj(alpha) z)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BlaschkeParam(Complex64);

impl BlaschkeParam {
    pub fn new(alpha: Complex64) -> Result<Self> {
        if !(alpha.re.is_finite() && alpha.im.is_finite()) || alpha.norm() >= 1.0 {
            return Err(Error::InvalidArgument(format!(
                "Blaschke parameter needs |alpha| < 1, got {alpha}"
            )));
        }
        Ok(Self(alpha))
    }

    pub fn alpha(&self) -> Complex64 {
        self.0
    }

    pub fn is_zero(&self) -> bool {
        self.0 == Complex64::new(0.0, 0.0)
    }

    pub fn negated(&self) -> Self {
        Self(-self.0)
    }

    pub fn to_lft(&self) -> LftSymbol {
        LftSymbol::blaschke(self.0).expect("validated parameter")
    }

    pub fn eval(&self, z: Complex64) -> Complex64 {
        (z - self.0) / (1.0 - self.0.conj() * z)
    }
}

fn check_gamma(gamma: u32) -> Result<()> {
    if gamma == 0 {
        return Err(Error::InvalidArgument("gamma must be a positive integer".into()));
    }
    Ok(())
}

/// `[(1 - |w|^2) / (1 - conj(w) phi(w))]^gamma`.
pub fn berezin_composition(gamma: u32, phi: &dyn AnalyticSymbol, w: DiskPoint) -> Result<Complex64> {
    check_gamma(gamma)?;
    let w = w.value();
    let p = phi.eval(w);
    if !(p.norm() < 1.0) {
        return Err(Error::Domain(format!("phi({w}) = {p} is not in the open disk")));
    }
    Ok(ipow((1.0 - w.norm_sqr()) / (1.0 - w.conj() * p), gamma))
}

/// `[(1 - |w|^2)(1 - conj(alpha) w) / (1 - |w|^2 + alpha conj(w) - conj(alpha) w)]^gamma`.
pub fn berezin_blaschke(gamma: u32, alpha: &BlaschkeParam, w: DiskPoint) -> Complex64 {
    let a = alpha.0;
    let w = w.value();
    let s = 1.0 - w.norm_sqr();
    // alpha conj(w) - conj(alpha) w = 2 i Im(alpha conj(w))
    let den = Complex64::new(s, 2.0 * (a * w.conj()).im);
    ipow(s * (1.0 - a.conj() * w) / den, gamma.max(1))
}

/// `(1 - r^2)^gamma / (1 - r^2 beta)^gamma`, the Berezin transform of `z -> beta z`
/// at any point of modulus `r`.
pub fn berezin_elliptic(gamma: u32, beta: Complex64, r: f64) -> Result<Complex64> {
    check_gamma(gamma)?;
    if !(beta.norm() <= 1.0) {
        return Err(Error::InvalidArgument(format!(
            "elliptic symbol needs |beta| <= 1, got {}",
            beta.norm()
        )));
    }
    if !(0.0..1.0).contains(&r) {
        return Err(Error::InvalidArgument(format!("radius must lie in [0, 1), got {r}")));
    }
    let t = r * r;
    Ok(ipow((1.0 - t) / (1.0 - t * beta), gamma))
}

/// Smallest `N` with the degree-`(N - 1)` kernel at `|w| = r` losing at most
/// [`KERNEL_TAIL_TOL`] of its squared norm, searched up to `limit`.
pub fn required_truncation(gamma: u32, r: f64, limit: usize) -> Option<usize> {
    let t = r * r;
    let scale = (1.0 - t).powi(gamma as i32);
    let mut head = 0.0;
    let mut term = 1.0_f64;
    for k in 0..limit {
        if k > 0 {
            term *= t * (k as f64 + f64::from(gamma) - 1.0) / k as f64;
        }
        head += term * scale;
        if 1.0 - head <= KERNEL_TAIL_TOL {
            return Some(k + 1);
        }
    }
    None
}

fn truncated_kernel(gamma: u32, n: usize, w: Complex64) -> Vec<Complex64> {
    let mut power = Complex64::new(1.0, 0.0);
    kernel_weights(gamma, n)
        .iter()
        .map(|b| {
            let k = power * b.sqrt();
            power *= w.conj();
            k
        })
        .collect()
}

fn rayleigh(t: &OperatorMatrix, x: &[Complex64]) -> Result<Complex64> {
    let norm_sq: f64 = x.iter().map(|k| k.norm_sqr()).sum();
    let tx = t.apply(x)?;
    Ok(tx.iter().zip(x).map(|(a, b)| a * b.conj()).sum::<Complex64>() / norm_sq)
}

/// `<T kappa, kappa> / <kappa, kappa>` with `kappa` the truncated kernel at `w`;
/// fails when the truncation drops more than [`KERNEL_TAIL_TOL`] of the kernel.
pub fn berezin_matrix(t: &OperatorMatrix, w: DiskPoint) -> Result<Complex64> {
    let gamma = t.gamma();
    let r = w.value().norm();
    let kappa = truncated_kernel(gamma, t.dim(), w.value());
    let norm_sq: f64 = kappa.iter().map(|k| k.norm_sqr()).sum();
    let retained = norm_sq * (1.0 - r * r).powi(gamma as i32);
    if 1.0 - retained > KERNEL_TAIL_TOL {
        let required = required_truncation(gamma, r, 1 << 20).unwrap_or(usize::MAX);
        return Err(Error::Precision { modulus: r, required });
    }
    rayleigh(t, &kappa)
}

/// Berezin transform of `T` on the span of the first `dim` basis vectors, whose
/// kernel is the truncated kernel. Every value lies in `W(T)`.
pub fn berezin_section(t: &OperatorMatrix, w: DiskPoint) -> Result<Complex64> {
    rayleigh(t, &truncated_kernel(t.gamma(), t.dim(), w.value()))
}

/// Where Berezin values come from.
#[derive(Debug, Clone)]
pub enum BerezinSource<'a> {
    Blaschke(BlaschkeParam),
    /// `z -> beta z`.
    Elliptic(Complex64),
    Map(SelfMap),
    Matrix(&'a OperatorMatrix),
    /// The matrix as an operator on its own finite-dimensional space.
    Section(&'a OperatorMatrix),
}

impl BerezinSource<'_> {
    pub fn value(&self, gamma: u32, w: DiskPoint) -> Result<Complex64> {
        match self {
            BerezinSource::Blaschke(a) => {
                check_gamma(gamma)?;
                Ok(berezin_blaschke(gamma, a, w))
            }
            BerezinSource::Elliptic(beta) => berezin_composition(gamma, &LftSymbol::linear(*beta), w),
            BerezinSource::Map(phi) => berezin_composition(gamma, phi, w),
            BerezinSource::Matrix(t) | BerezinSource::Section(t) => {
                if t.gamma() != gamma {
                    return Err(Error::InvalidArgument(format!(
                        "matrix built for gamma = {}, asked for gamma = {gamma}",
                        t.gamma()
                    )));
                }
                match self {
                    BerezinSource::Matrix(_) => berezin_matrix(t, w),
                    _ => berezin_section(t, w),
                }
            }
        }
    }
}

/// Polar grid `r_i = r_max i / (r_count - 1)`, `theta_j = 2 pi j / theta_count`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PolarGrid {
    r_count: usize,
    theta_count: usize,
    r_max: f64,
}

impl PolarGrid {
    pub fn new(r_count: usize, theta_count: usize, r_max: f64) -> Result<Self> {
        if r_count < 2 || theta_count < 1 {
            return Err(Error::InvalidArgument(format!(
                "grid needs at least 2 radii and 1 angle, got {r_count}x{theta_count}"
            )));
        }
        if !(r_max > 0.0 && r_max < 1.0) {
            return Err(Error::InvalidArgument(format!("r_max must lie in (0, 1), got {r_max}")));
        }
        Ok(Self {
            r_count,
            theta_count,
            r_max,
        })
    }

    /// 200 radii, 512 angles, `r_max = 0.995`.
    pub fn figure_default() -> Self {
        Self {
            r_count: 200,
            theta_count: 512,
            r_max: 0.995,
        }
    }

    pub fn r_count(&self) -> usize {
        self.r_count
    }

    pub fn theta_count(&self) -> usize {
        self.theta_count
    }

    pub fn r_max(&self) -> f64 {
        self.r_max
    }

    pub fn len(&self) -> usize {
        self.r_count * self.theta_count
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn radius(&self, i: usize) -> f64 {
        self.r_max * i as f64 / (self.r_count - 1) as f64
    }

    pub fn angle(&self, j: usize) -> f64 {
        2.0 * PI * j as f64 / self.theta_count as f64
    }

    /// Node `(i, j)`; nodes are stored radius-major.
    pub fn node(&self, i: usize, j: usize) -> DiskPoint {
        DiskPoint::new(Complex64::from_polar(self.radius(i), self.angle(j))).expect("r_max < 1")
    }

    fn index(&self, i: usize, j: usize) -> usize {
        i * self.theta_count + j
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BerezinSample {
    pub w: DiskPoint,
    pub value: Complex64,
}

/// Berezin values at every node of a polar grid.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RangeCloud {
    grid: PolarGrid,
    samples: Vec<BerezinSample>,
}

impl RangeCloud {
    pub fn grid(&self) -> &PolarGrid {
        &self.grid
    }

    pub fn samples(&self) -> &[BerezinSample] {
        &self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn sample(&self, i: usize, j: usize) -> &BerezinSample {
        &self.samples[self.grid.index(i, j)]
    }

    pub fn min_modulus(&self) -> f64 {
        self.samples
            .iter()
            .map(|s| s.value.norm())
            .fold(f64::INFINITY, f64::min)
    }

    pub fn max_modulus(&self) -> f64 {
        self.samples.iter().map(|s| s.value.norm()).fold(0.0, f64::max)
    }

    /// Largest distance from a sample to its grid neighbours.
    pub fn local_spacing(&self, index: usize) -> f64 {
        let t = self.grid.theta_count;
        let (i, j) = (index / t, index % t);
        let v = self.samples[index].value;
        let mut neighbours = vec![self.grid.index(i, (j + 1) % t), self.grid.index(i, (j + t - 1) % t)];
        if i > 0 {
            neighbours.push(self.grid.index(i - 1, j));
        }
        if i + 1 < self.grid.r_count {
            neighbours.push(self.grid.index(i + 1, j));
        }
        neighbours
            .into_iter()
            .map(|n| (self.samples[n].value - v).norm())
            .fold(0.0, f64::max)
    }

    /// Index of and distance to the sample value nearest to `p`.
    pub fn nearest(&self, p: Complex64) -> (usize, f64) {
        self.samples
            .par_iter()
            .enumerate()
            .map(|(k, s)| (k, (s.value - p).norm()))
            .reduce(
                || (usize::MAX, f64::INFINITY),
                |a, b| if b.1 < a.1 || (b.1 == a.1 && b.0 < a.0) { b } else { a },
            )
    }

    /// Sampled-membership test of `p` against the cloud.
    pub fn membership(&self, p: Complex64) -> Membership {
        let (index, distance) = self.nearest(p);
        let spacing = self.local_spacing(index);
        Membership {
            point: p,
            nearest: self.samples[index].value,
            distance,
            spacing,
            inside: distance <= MEMBERSHIP_FACTOR * spacing,
        }
    }
}

/// Outcome of a sampled-membership test.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Membership {
    pub point: Complex64,
    pub nearest: Complex64,
    pub distance: f64,
    pub spacing: f64,
    pub inside: bool,
}

pub fn sample_berezin_range(gamma: u32, source: &BerezinSource<'_>, grid: &PolarGrid) -> Result<RangeCloud> {
    check_gamma(gamma)?;
    let samples = (0..grid.len())
        .into_par_iter()
        .map(|k| {
            let w = grid.node(k / grid.theta_count, k % grid.theta_count);
            Ok(BerezinSample {
                w,
                value: source.value(gamma, w)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(RangeCloud { grid: *grid, samples })
}

/// The point `lambda` with `C(lambda) = conj(C(w))` for the Blaschke symbol.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SymmetryWitness {
    pub lambda: DiskPoint,
    pub residual: f64,
}

/// `lambda = (|w|^2 / |alpha|^2) (alpha^2 / w)` and `|conj(C(w)) - C(lambda)|`.
pub fn symmetry_witness(gamma: u32, alpha: &BlaschkeParam, w: DiskPoint) -> Result<SymmetryWitness> {
    check_gamma(gamma)?;
    let a = alpha.0;
    let wv = w.value();
    let v = berezin_blaschke(gamma, alpha, w);
    if alpha.is_zero() || wv.norm() == 0.0 {
        // the transform is real here and w is its own partner
        return Ok(SymmetryWitness {
            lambda: w,
            residual: (v.conj() - v).norm(),
        });
    }
    // reflection of w across the line through 0 and alpha
    let u = a / a.norm();
    let lambda = DiskPoint::new(u * u * wv.conj())?;
    let residual = (v.conj() - berezin_blaschke(gamma, alpha, lambda)).norm();
    Ok(SymmetryWitness { lambda, residual })
}

/// `|C_alpha(w) - C_{-alpha}(-w)|`.
pub fn mirror_identity_defect(gamma: u32, alpha: &BlaschkeParam, w: DiskPoint) -> f64 {
    let minus_w = DiskPoint::new(-w.value()).expect("same modulus");
    (berezin_blaschke(gamma, alpha, w) - berezin_blaschke(gamma, &alpha.negated(), minus_w)).norm()
}

/// `(1 - r |alpha|^2)^gamma`, the transform at `w = r alpha`.
pub fn real_slice_value(gamma: u32, alpha: &BlaschkeParam, r: f64) -> Result<f64> {
    check_gamma(gamma)?;
    if !((r * alpha.0).norm() < 1.0) {
        return Err(Error::Domain(format!(
            "r alpha = {} is not in the open disk",
            r * alpha.0
        )));
    }
    Ok((1.0 - r * alpha.0.norm_sqr()).powi(gamma as i32))
}

/// Search schedule of [`nonconvexity_certificate`]: each ring is tried in turn.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WitnessSearch {
    pub theta_count: usize,
    pub radii: Vec<f64>,
}

impl Default for WitnessSearch {
    fn default() -> Self {
        Self {
            theta_count: 720,
            radii: vec![0.9, 0.99, 0.999, 0.9999, 0.99999, 0.999999],
        }
    }
}

/// A non-real value `v` whose real part lies below every real value of the
/// range coming from the line through `alpha`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NonconvexityWitness {
    pub z: DiskPoint,
    pub v: Complex64,
    /// `conj(v)`, attained at `partner`.
    pub v_conj_partner: Complex64,
    pub partner: DiskPoint,
    pub partner_residual: f64,
    /// `Re(v)`, the midpoint of `v` and `conj(v)`.
    pub midpoint: f64,
    /// `(1 - |alpha|)^gamma`.
    pub real_slice_inf: f64,
    pub gap: f64,
}

pub fn nonconvexity_certificate(
    gamma: u32,
    alpha: &BlaschkeParam,
    search: &WitnessSearch,
) -> Result<NonconvexityWitness> {
    check_gamma(gamma)?;
    if alpha.is_zero() {
        return Err(Error::NotFound("alpha = 0 gives the range {1}, which is convex".into()));
    }
    if search.theta_count == 0 || search.radii.is_empty() {
        return Err(Error::InvalidArgument("witness search needs angles and radii".into()));
    }
    let inf = (1.0 - alpha.0.norm()).powi(gamma as i32);
    let target = inf - 0.01 * inf;
    for &rho in &search.radii {
        if !(rho > 0.0 && rho < 1.0) {
            return Err(Error::InvalidArgument(format!(
                "search radius must lie in (0, 1), got {rho}"
            )));
        }
        let best = (0..search.theta_count)
            .map(|j| {
                let z = DiskPoint::new(Complex64::from_polar(
                    rho,
                    2.0 * PI * j as f64 / search.theta_count as f64,
                ))
                .map_err(|_| Error::InvalidArgument(format!("search radius {rho} exceeds the admissible disk")))?;
                Ok((z, berezin_blaschke(gamma, alpha, z)))
            })
            .collect::<Result<Vec<_>>>()?
            .into_iter()
            .filter(|(_, v)| v.re > 0.0 && v.re < target && v.im.abs() > REAL_TOL)
            .fold(None::<(DiskPoint, Complex64)>, |acc, c| match acc {
                Some(a) if a.1.im.abs() >= c.1.im.abs() => Some(a),
                _ => Some(c),
            });
        if let Some((z, v)) = best {
            let partner = symmetry_witness(gamma, alpha, z)?;
            return Ok(NonconvexityWitness {
                z,
                v,
                v_conj_partner: v.conj(),
                partner: partner.lambda,
                partner_residual: partner.residual,
                midpoint: v.re,
                real_slice_inf: inf,
                gap: inf - v.re,
            });
        }
    }
    Err(Error::NotFound(format!(
        "no non-real value below {target:.6e} on {} rings of {} angles",
        search.radii.len(),
        search.theta_count
    )))
}

/// Verdict of the sampled convexity test for `z -> beta z`.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum EllipticVerdict {
    /// Every sample is real; the range is the interval `[min, max]`.
    RealSegment {
        min: f64,
        max: f64,
        max_imag: f64,
        angular_variation: f64,
    },
    /// Two samples whose midpoint is far from every sample.
    NonConvex {
        first: Complex64,
        second: Complex64,
        midpoint: Membership,
    },
    /// No midpoint failure was found.
    Inconclusive { max_imag: f64, best_ratio: f64 },
}

/// Largest change of the value around any circle of the grid.
pub fn angular_variation(cloud: &RangeCloud) -> f64 {
    let g = cloud.grid();
    (0..g.r_count())
        .map(|i| {
            let v0 = cloud.sample(i, 0).value;
            (0..g.theta_count())
                .map(|j| (cloud.sample(i, j).value - v0).norm())
                .fold(0.0, f64::max)
        })
        .fold(0.0, f64::max)
}

/// Number of spread-out samples paired up when looking for a failing midpoint.
const PAIR_CANDIDATES: usize = 48;

pub fn elliptic_convexity_verdict(gamma: u32, beta: Complex64, grid: &PolarGrid) -> Result<EllipticVerdict> {
    if !(beta.norm() <= 1.0) {
        return Err(Error::InvalidArgument(format!(
            "elliptic symbol needs |beta| <= 1, got {}",
            beta.norm()
        )));
    }
    let cloud = sample_berezin_range(gamma, &BerezinSource::Elliptic(beta), grid)?;
    let max_imag = cloud.samples().iter().map(|s| s.value.im.abs()).fold(0.0, f64::max);
    if beta.im == 0.0 {
        let re = cloud.samples().iter().map(|s| s.value.re);
        let min = re.clone().fold(f64::INFINITY, f64::min);
        let max = re.fold(f64::NEG_INFINITY, f64::max);
        return Ok(EllipticVerdict::RealSegment {
            min,
            max,
            max_imag,
            angular_variation: angular_variation(&cloud),
        });
    }
    let candidates: Vec<Complex64> = cloud
        .samples()
        .iter()
        .map(|s| s.value)
        .filter(|v| v.im.abs() > REAL_TOL)
        .collect();
    let stride = (candidates.len() / PAIR_CANDIDATES).max(1);
    let picks: Vec<Complex64> = candidates.iter().step_by(stride).copied().collect();
    let mut best: Option<(f64, Complex64, Complex64, Membership)> = None;
    for (a_idx, &a) in picks.iter().enumerate() {
        for &b in &picks[a_idx + 1..] {
            let m = cloud.membership((a + b) / 2.0);
            let ratio = if m.spacing > 0.0 {
                m.distance / m.spacing
            } else if m.distance > 0.0 {
                f64::INFINITY
            } else {
                0.0
            };
            if best.as_ref().is_none_or(|(r, ..)| ratio > *r) {
                best = Some((ratio, a, b, m));
            }
        }
    }
    match best {
        Some((ratio, first, second, midpoint)) if ratio > MEMBERSHIP_FACTOR => Ok(EllipticVerdict::NonConvex {
            first,
            second,
            midpoint,
        }),
        Some((ratio, ..)) => Ok(EllipticVerdict::Inconclusive {
            max_imag,
            best_ratio: ratio,
        }),
        None => Ok(EllipticVerdict::Inconclusive {
            max_imag,
            best_ratio: 0.0,
        }),
    }
}

/// An empty region of the plane surrounded by cloud values.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Hole {
    /// Point of the region farthest from every sample.
    pub center: Complex64,
    /// Distance from `center` to the nearest sample.
    pub clearance: f64,
    /// Raster cells in the enclosed region.
    pub cells: usize,
}

/// Raster resolution per axis used by [`enclosed_hole`].
pub const HOLE_RASTER: usize = 160;

/// Largest empty region of the raster that cannot be reached from the border.
///
/// Occupied cells are dilated once so sparse stretches of the cloud do not leak.
pub fn enclosed_hole(cloud: &RangeCloud) -> Option<Hole> {
    let vals: Vec<Complex64> = cloud.samples().iter().map(|s| s.value).collect();
    if vals.len() < 3 {
        return None;
    }
    let n = HOLE_RASTER;
    let (mut x0, mut x1, mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
    for v in &vals {
        x0 = x0.min(v.re);
        x1 = x1.max(v.re);
        y0 = y0.min(v.im);
        y1 = y1.max(v.im);
    }
    let span = (x1 - x0).max(y1 - y0);
    if !(span > 0.0) {
        return None;
    }
    // one empty ring of cells around the box
    let (dx, dy) = (
        ((x1 - x0).max(span * 1e-3)) / (n - 2) as f64,
        ((y1 - y0).max(span * 1e-3)) / (n - 2) as f64,
    );
    let (ox, oy) = (x0 - dx, y0 - dy);
    let cell = |v: Complex64| {
        let i = (((v.re - ox) / dx) as usize).min(n - 1);
        let j = (((v.im - oy) / dy) as usize).min(n - 1);
        (i, j)
    };
    let mut occupied = vec![false; n * n];
    for &v in &vals {
        let (i, j) = cell(v);
        occupied[i * n + j] = true;
    }
    let mut dilated = occupied.clone();
    for i in 0..n {
        for j in 0..n {
            if occupied[i * n + j] {
                for (a, b) in neighbours(i, j, n) {
                    dilated[a * n + b] = true;
                }
            }
        }
    }
    // label empty components; component 0 is the one touching the border
    let mut label = vec![usize::MAX; n * n];
    let mut sizes = Vec::new();
    let mut order = Vec::new();
    for start in 0..n * n {
        if dilated[start] || label[start] != usize::MAX {
            continue;
        }
        let id = sizes.len();
        let mut stack = vec![start];
        label[start] = id;
        let mut members = Vec::new();
        let mut touches_border = false;
        while let Some(k) = stack.pop() {
            members.push(k);
            let (i, j) = (k / n, k % n);
            touches_border |= i == 0 || j == 0 || i == n - 1 || j == n - 1;
            for (a, b) in neighbours(i, j, n) {
                let m = a * n + b;
                if !dilated[m] && label[m] == usize::MAX {
                    label[m] = id;
                    stack.push(m);
                }
            }
        }
        sizes.push(if touches_border { 0 } else { members.len() });
        order.push(members);
    }
    let (best, &size) = sizes.iter().enumerate().max_by_key(|(_, s)| **s)?;
    if size == 0 {
        return None;
    }
    // rank cells by raster distance to the occupied set, then refine exactly
    let mut depth = vec![usize::MAX; n * n];
    let mut queue: std::collections::VecDeque<usize> = (0..n * n).filter(|&k| occupied[k]).collect();
    for &k in &queue {
        depth[k] = 0;
    }
    while let Some(k) = queue.pop_front() {
        for (a, b) in neighbours(k / n, k % n, n) {
            let m = a * n + b;
            if depth[m] == usize::MAX {
                depth[m] = depth[k] + 1;
                queue.push_back(m);
            }
        }
    }
    let mut cells = order[best].clone();
    cells.sort_by_key(|&k| (std::cmp::Reverse(depth[k]), k));
    let center_of = |k: usize| Complex64::new(ox + ((k / n) as f64 + 0.5) * dx, oy + ((k % n) as f64 + 0.5) * dy);
    let clearance = |p: Complex64| {
        vals.par_iter()
            .map(|v| (v - p).norm())
            .reduce(|| f64::INFINITY, f64::min)
    };
    let (mut center, mut clear) = cells
        .iter()
        .take(16)
        .map(|&k| (center_of(k), clearance(center_of(k))))
        .fold((Complex64::new(0.0, 0.0), f64::NEG_INFINITY), |a, b| {
            if b.1 > a.1 {
                b
            } else {
                a
            }
        });
    let mut step = dx.max(dy);
    while step > span * 1e-5 {
        let moved = [
            Complex64::new(step, 0.0),
            Complex64::new(-step, 0.0),
            Complex64::new(0.0, step),
            Complex64::new(0.0, -step),
        ]
        .into_iter()
        .map(|d| center + d)
        .filter(|&p| {
            // stay in the hole; outside it clearance can grow without bound
            let (i, j) = cell(p);
            p.re >= ox && p.im >= oy && label[i * n + j] == best
        })
        .map(|p| (p, clearance(p)))
        .fold((center, clear), |a, b| if b.1 > a.1 { b } else { a });
        if moved.1 > clear {
            (center, clear) = moved;
        } else {
            step /= 2.0;
        }
    }
    Some(Hole {
        center,
        clearance: clear,
        cells: size,
    })
}

fn neighbours(i: usize, j: usize, n: usize) -> impl Iterator<Item = (usize, usize)> {
    let mut out = Vec::with_capacity(4);
    if i > 0 {
        out.push((i - 1, j));
    }
    if i + 1 < n {
        out.push((i + 1, j));
    }
    if j > 0 {
        out.push((i, j - 1));
    }
    if j + 1 < n {
        out.push((i, j + 1));
    }
    out.into_iter()
}

/// Summary statistics of a Blaschke Berezin range.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FigureSummary {
    pub samples: usize,
    pub min_modulus: f64,
    pub max_modulus: f64,
    /// Smallest and largest sampled value along the line through `alpha`.
    pub real_slice: Option<(f64, f64)>,
    pub hole: Option<Hole>,
}

pub fn figure_summary(cloud: &RangeCloud, alpha: &BlaschkeParam) -> FigureSummary {
    let a = alpha.alpha();
    let real_slice = if alpha.is_zero() {
        None
    } else {
        let along: Vec<f64> = cloud
            .samples()
            .iter()
            .filter(|s| {
                let w = s.w.value();
                (a.conj() * w).im.abs() <= REAL_TOL * (1.0 + w.norm())
            })
            .map(|s| s.value.re)
            .collect();
        if along.is_empty() {
            None
        } else {
            Some((
                along.iter().copied().fold(f64::INFINITY, f64::min),
                along.iter().copied().fold(f64::NEG_INFINITY, f64::max),
            ))
        }
    };
    FigureSummary {
        samples: cloud.len(),
        min_modulus: cloud.min_modulus(),
        max_modulus: cloud.max_modulus(),
        real_slice,
        hole: enclosed_hole(cloud),
    }
}
