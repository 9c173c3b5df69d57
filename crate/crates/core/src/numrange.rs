//! Numerical ranges: Berezin points of weighted composition sums on the Hardy
//! space, and support-function hulls of finite sections.

use std::f64::consts::PI;

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::berezin::RangeCloud;
use crate::error::{Error, Result};
use crate::jets::AnalyticSymbol;
use crate::kernels::DiskPoint;
use crate::symbols::{OperatorMatrix, SelfMap, Weight};

/// One summand `W_{psi, phi} f = psi (f o phi)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NumRangeTerm {
    pub psi: Weight,
    pub phi: SelfMap,
}

/// `<M k_z, k_z> = sum_j psi_j(z) (1 - |z|^2) / (1 - conj(z) phi_j(z))` on `H^2`.
pub fn numrange_point(terms: &[NumRangeTerm], z: DiskPoint) -> Result<Complex64> {
    if terms.is_empty() {
        return Err(Error::InvalidArgument("need at least one term".into()));
    }
    let z = z.value();
    let s = 1.0 - z.norm_sqr();
    terms.iter().try_fold(Complex64::new(0.0, 0.0), |acc, t| {
        let p = t.phi.eval(z);
        if !(p.norm() < 1.0) {
            return Err(Error::Domain(format!("phi({z}) = {p} is not in the open disk")));
        }
        Ok(acc + t.psi.eval(z) * s / (1.0 - z.conj() * p))
    })
}

/// `|lambda_{r xi}|` for each `r`.
pub fn boundary_decay_probe(terms: &[NumRangeTerm], xi: Complex64, radii: &[f64]) -> Result<Vec<f64>> {
    if !((xi.norm() - 1.0).abs() <= 1e-12) {
        return Err(Error::InvalidArgument(format!(
            "direction must be unimodular, |xi| = {}",
            xi.norm()
        )));
    }
    if terms.iter().any(|t| t.phi.is_identity()) {
        return Err(Error::InvalidArgument(
            "composition symbols must not be the identity".into(),
        ));
    }
    radii
        .iter()
        .map(|&r| {
            if !(0.0..1.0).contains(&r) {
                return Err(Error::InvalidArgument(format!("radius must lie in [0, 1), got {r}")));
            }
            Ok(numrange_point(terms, DiskPoint::new(xi * r)?)?.norm())
        })
        .collect()
}

/// Support data of `W(T)` at equally spaced angles.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NumericalRangeHull {
    angles: Vec<f64>,
    support: Vec<f64>,
    boundary_points: Vec<Complex64>,
    vertices: Vec<Complex64>,
}

impl NumericalRangeHull {
    pub fn angles(&self) -> &[f64] {
        &self.angles
    }

    /// `h(theta) = max Re(e^{-i theta} W(T))`.
    pub fn support(&self) -> &[f64] {
        &self.support
    }

    /// Rayleigh quotients `<T x, x>` of the maximizing eigenvectors; these lie in `W(T)`.
    pub fn boundary_points(&self) -> &[Complex64] {
        &self.boundary_points
    }

    /// Corners of the polygon cut out by the support lines; it encloses `W(T)`.
    pub fn vertices(&self) -> &[Complex64] {
        &self.vertices
    }

    /// `max_theta (Re(e^{-i theta} p) - h(theta))`; non-positive for points of the polygon.
    pub fn signed_distance(&self, p: Complex64) -> f64 {
        self.angles
            .iter()
            .zip(&self.support)
            .map(|(&t, &h)| p.re * t.cos() + p.im * t.sin() - h)
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// Every turn of the vertex polygon goes the same way, up to `tol` times the
    /// squared polygon size.
    pub fn is_convex(&self, tol: f64) -> bool {
        convex_polygon(&self.vertices, tol)
    }
}

/// All consecutive cross products of the closed polygon are `>= -tol * scale^2`.
pub fn convex_polygon(vertices: &[Complex64], tol: f64) -> bool {
    let n = vertices.len();
    if n < 3 {
        return true;
    }
    let scale = vertices.iter().map(|v| v.norm()).fold(1.0, f64::max);
    (0..n).all(|k| {
        let a = vertices[k];
        let b = vertices[(k + 1) % n];
        let c = vertices[(k + 2) % n];
        let (e1, e2) = (b - a, c - b);
        e1.re * e2.im - e1.im * e2.re >= -tol * scale * scale
    })
}

fn max_eigenpair(h: DMatrix<Complex64>) -> Result<(f64, Vec<Complex64>)> {
    let eig = SymmetricEigen::try_new(h, f64::EPSILON, 100_000)
        .ok_or_else(|| Error::Numerical("Hermitian eigen-solver did not converge".into()))?;
    let (idx, &lambda) = eig
        .eigenvalues
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1))
        .ok_or_else(|| Error::Numerical("empty spectrum".into()))?;
    Ok((lambda, eig.eigenvectors.column(idx).iter().copied().collect()))
}

/// Support-function sweep over `angles` equally spaced directions.
pub fn numerical_range_hull(t: &OperatorMatrix, angles: usize) -> Result<NumericalRangeHull> {
    if angles < 8 {
        return Err(Error::InvalidArgument(format!("need at least 8 angles, got {angles}")));
    }
    let m = t.entries();
    let mh = m.adjoint();
    let thetas: Vec<f64> = (0..angles).map(|k| 2.0 * PI * k as f64 / angles as f64).collect();
    let sweep = thetas
        .par_iter()
        .map(|&theta| {
            let e = Complex64::from_polar(1.0, -theta);
            let h = (m * e + &mh * e.conj()) * Complex64::new(0.5, 0.0);
            let (lambda, x) = max_eigenpair(h)?;
            let norm_sq: f64 = x.iter().map(|c| c.norm_sqr()).sum();
            let tx = t.apply(&x)?;
            let q: Complex64 = tx.iter().zip(&x).map(|(a, b)| a * b.conj()).sum::<Complex64>() / norm_sq;
            Ok((lambda, q))
        })
        .collect::<Result<Vec<_>>>()?;
    let support: Vec<f64> = sweep.iter().map(|s| s.0).collect();
    let boundary_points = sweep.iter().map(|s| s.1).collect();
    let vertices = (0..angles)
        .map(|k| {
            let k1 = (k + 1) % angles;
            let (t0, t1) = (thetas[k], thetas[k1] + if k1 == 0 { 2.0 * PI } else { 0.0 });
            let det = (t1 - t0).sin();
            let x = (support[k] * t1.sin() - support[k1] * t0.sin()) / det;
            let y = (support[k1] * t0.cos() - support[k] * t1.cos()) / det;
            Complex64::new(x, y)
        })
        .collect();
    Ok(NumericalRangeHull {
        angles: thetas,
        support,
        boundary_points,
        vertices,
    })
}

/// Largest signed distance of a Berezin cloud of `T` to the hull of `W(T)`.
pub fn berezin_in_numrange_check(t: &OperatorMatrix, gamma: u32, cloud: &RangeCloud, angles: usize) -> Result<f64> {
    if gamma != t.gamma() {
        return Err(Error::InvalidArgument(format!(
            "matrix built for gamma = {}, cloud for gamma = {gamma}",
            t.gamma()
        )));
    }
    let hull = numerical_range_hull(t, angles)?;
    Ok(cloud
        .samples()
        .par_iter()
        .map(|s| hull.signed_distance(s.value))
        .reduce(|| f64::NEG_INFINITY, f64::max))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::berezin::{sample_berezin_range, BerezinSource, PolarGrid};
    use crate::jets::{LftSymbol, TruncatedSeries};
    use crate::kernels::SpaceSpec;
    use crate::symbols::{operator_matrix, OperatorSpec};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn two_term_fixture() -> Vec<NumRangeTerm> {
        vec![
            NumRangeTerm {
                psi: Weight::one(),
                phi: SelfMap::Lft(LftSymbol::linear(c(0.5, 0.0))),
            },
            NumRangeTerm {
                psi: Weight::Polynomial(TruncatedSeries::identity(1)),
                phi: SelfMap::Lft(LftSymbol::linear(c(1.0 / 3.0, 0.0))),
            },
        ]
    }

    #[test]
    fn numrange_point_examples() {
        let beta = c(0.3, -0.4);
        let single = [NumRangeTerm {
            psi: Weight::one(),
            phi: SelfMap::Lft(LftSymbol::linear(beta)),
        }];
        let r: f64 = 0.6;
        let v = numrange_point(&single, DiskPoint::real(r).unwrap()).unwrap();
        assert!((v - (1.0 - r * r) / (1.0 - beta * r * r)).norm() < 1e-15);

        let fixture = two_term_fixture();
        let at0 = numrange_point(&fixture, DiskPoint::origin()).unwrap();
        assert!((at0 - 1.0).norm() < 1e-15);
        let z = 0.5;
        let v = numrange_point(&fixture, DiskPoint::real(z).unwrap()).unwrap();
        let oracle = 0.75 / (1.0 - z * z / 2.0) + z * 0.75 / (1.0 - z * z / 3.0);
        assert!((v - oracle).norm() < 1e-15);
        assert!((v.re - 1.266_234).abs() < 1e-6);
    }

    #[test]
    fn numrange_point_is_a_berezin_value_of_the_matrix() {
        // single weighted composition on H^2: compare with the finite section
        let psi = Weight::Closed(crate::jets::WeightSymbol::new(c(1.0, 0.5), 1, c(0.2, 0.0), 1).unwrap());
        let phi = SelfMap::Lft(LftSymbol::new(c(0.1, 0.2), c(0.4, 0.0), c(0.1, 0.0)).unwrap());
        let op = OperatorSpec::weighted_composition(SpaceSpec::disk(1).unwrap(), vec![psi.clone()], vec![phi.clone()])
            .unwrap();
        let t = operator_matrix(&op, 96).unwrap();
        let z = DiskPoint::new(c(0.3, -0.4)).unwrap();
        let via_matrix = crate::berezin::berezin_matrix(&t, z).unwrap();
        let closed = numrange_point(&[NumRangeTerm { psi, phi }], z).unwrap();
        assert!((via_matrix - closed).norm() < 1e-10, "{via_matrix} vs {closed}");
    }

    #[test]
    fn decay_probe_examples() {
        let single = [NumRangeTerm {
            psi: Weight::one(),
            phi: SelfMap::Lft(LftSymbol::linear(c(0.5, 0.0))),
        }];
        let r: f64 = 0.999;
        let v = boundary_decay_probe(&single, c(1.0, 0.0), &[r]).unwrap();
        assert!((v[0] - (1.0 - r * r) / (1.0 - r * r / 2.0)).abs() < 1e-15);
        assert!((v[0] - 0.00399).abs() < 1e-5);

        let id = [NumRangeTerm {
            psi: Weight::one(),
            phi: SelfMap::Lft(LftSymbol::identity()),
        }];
        assert!(boundary_decay_probe(&id, c(1.0, 0.0), &[0.9]).is_err());
        assert!(boundary_decay_probe(&single, c(1.1, 0.0), &[0.9]).is_err());

        let v = boundary_decay_probe(&two_term_fixture(), c(1.0, 0.0), &[0.9, 0.99, 0.999, 0.9999]).unwrap();
        assert!(v[3] < 0.01);
        assert!(v.windows(2).all(|w| w[1] < w[0]));
    }

    fn dense_rayleigh_extent(t: &OperatorMatrix, samples: usize) -> Vec<Complex64> {
        let n = t.dim();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        (0..samples)
            .map(|_| {
                let x: Vec<Complex64> = (0..n)
                    .map(|_| c(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5))
                    .collect();
                let nn: f64 = x.iter().map(|v| v.norm_sqr()).sum();
                let tx = t.apply(&x).unwrap();
                tx.iter().zip(&x).map(|(a, b)| a * b.conj()).sum::<Complex64>() / nn
            })
            .collect()
    }

    #[test]
    fn hull_of_diagonal_is_a_segment() {
        let t = OperatorMatrix::diagonal(1, &[c(0.0, 0.0), c(1.0, 0.0)]).unwrap();
        let hull = numerical_range_hull(&t, 360).unwrap();
        for v in hull.vertices() {
            assert!(v.im.abs() < 1e-9 && v.re > -1e-9 && v.re < 1.0 + 1e-9, "{v}");
        }
        assert!(hull.is_convex(1e-12));
        assert!(hull.signed_distance(c(0.5, 0.0)) <= 1e-12);
        assert!(hull.signed_distance(c(0.5, 0.1)) > 0.09);
        let grid = PolarGrid::new(20, 32, 0.99).unwrap();
        let cloud = sample_berezin_range(1, &BerezinSource::Section(&t), &grid).unwrap();
        assert!(berezin_in_numrange_check(&t, 1, &cloud, 360).unwrap() <= 1e-9);
    }

    #[test]
    fn hull_of_jordan_block_is_a_disk() {
        let mut m = DMatrix::from_element(2, 2, c(0.0, 0.0));
        m[(0, 1)] = c(1.0, 0.0);
        let t = OperatorMatrix::new(1, m).unwrap();
        let hull = numerical_range_hull(&t, 360).unwrap();
        let max = hull.vertices().iter().map(|v| v.norm()).fold(0.0, f64::max);
        assert!((0.499..=0.501).contains(&max), "{max}");
        assert!(hull.is_convex(1e-12));
        for p in dense_rayleigh_extent(&t, 5000) {
            assert!(p.norm() <= 0.5 + 1e-12);
            assert!(hull.signed_distance(p) <= 1e-12);
        }
        for p in hull.boundary_points() {
            assert!((p.norm() - 0.5).abs() < 1e-12);
        }
        let grid = PolarGrid::new(20, 32, 0.99).unwrap();
        let cloud = sample_berezin_range(1, &BerezinSource::Section(&t), &grid).unwrap();
        assert!(berezin_in_numrange_check(&t, 1, &cloud, 360).unwrap() <= 1e-9);
    }

    #[test]
    fn composition_matrix_hull_contains_berezin_cloud() {
        let op = OperatorSpec::composition(
            SpaceSpec::disk(1).unwrap(),
            vec![SelfMap::Lft(LftSymbol::linear(c(0.5, 0.0)))],
        )
        .unwrap();
        let t = operator_matrix(&op, 32).unwrap();
        let grid = PolarGrid::new(12, 24, 0.5).unwrap();
        let cloud = sample_berezin_range(1, &BerezinSource::Matrix(&t), &grid).unwrap();
        assert!(berezin_in_numrange_check(&t, 1, &cloud, 180).unwrap() <= 1e-9);
        assert!(berezin_in_numrange_check(&t, 2, &cloud, 180).is_err());
    }

    #[test]
    fn random_upper_triangular_hull_contains_rayleigh_quotients() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let mut m = DMatrix::from_element(16, 16, c(0.0, 0.0));
        for i in 0..16 {
            for j in i..16 {
                m[(i, j)] = c(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5);
            }
        }
        let t = OperatorMatrix::new(2, m).unwrap();
        let hull = numerical_range_hull(&t, 256).unwrap();
        assert!(hull.is_convex(1e-12));
        for p in dense_rayleigh_extent(&t, 2000) {
            assert!(hull.signed_distance(p) <= 1e-12);
        }
        let grid = PolarGrid::new(10, 16, 0.95).unwrap();
        let cloud = sample_berezin_range(2, &BerezinSource::Section(&t), &grid).unwrap();
        assert!(berezin_in_numrange_check(&t, 2, &cloud, 256).unwrap() <= 1e-9);
    }

    #[test]
    fn identity_hull_is_a_point() {
        let t = OperatorMatrix::identity(1, 8).unwrap();
        let hull = numerical_range_hull(&t, 64).unwrap();
        assert!(hull.vertices().iter().all(|v| (v - 1.0).norm() < 1e-12));
        let grid = PolarGrid::new(5, 8, 0.3).unwrap();
        let cloud = sample_berezin_range(1, &BerezinSource::Matrix(&t), &grid).unwrap();
        assert!(berezin_in_numrange_check(&t, 1, &cloud, 64).unwrap().abs() < 1e-12);
        assert!(numerical_range_hull(&t, 4).is_err());
    }
}
