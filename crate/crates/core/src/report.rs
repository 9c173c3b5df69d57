//! Check records and the default certification sweep.

use std::time::Instant;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::berezin::{
    elliptic_convexity_verdict, mirror_identity_defect, nonconvexity_certificate, sample_berezin_range,
    symmetry_witness, BerezinSource, BlaschkeParam, EllipticVerdict, PolarGrid, WitnessSearch, MEMBERSHIP_FACTOR,
};
use crate::error::{Error, Result};
use crate::jets::{LftSymbol, TruncatedSeries};
use crate::kernels::{MultiIndex, SpaceSpec};
use crate::numrange::{boundary_decay_probe, numerical_range_hull, NumRangeTerm};
use crate::sampling::sample_disk;
use crate::symbols::{
    canonical_cs_symbols_j, canonical_cs_symbols_rotation, canonical_hermitian_symbols, canonical_sa_symbols,
    cs_defect, matrix_cs_defect, matrix_sa_defect, sa_defect, ConjugationSpec, OperatorMatrix, OperatorSpec,
    SampleSpec, SelfMap, Weight, FAIL_THRESHOLD, PASS_THRESHOLD,
};

pub const CS_STANDARD: &str = "cs-standard-conjugation";
pub const SELF_ADJOINT: &str = "self-adjoint";
pub const CS_ROTATION: &str = "cs-rotation-conjugation";
pub const HERMITIAN_SUM: &str = "hermitian-sum";
pub const ZERO_IN_CLOSURE: &str = "zero-in-numrange-closure";
pub const ELLIPTIC_CONVEXITY: &str = "elliptic-convexity";
pub const BLASCHKE_SYMMETRY: &str = "blaschke-conjugation-symmetry";
pub const BLASCHKE_NONCONVEXITY: &str = "blaschke-nonconvexity";
pub const BLASCHKE_MIRROR: &str = "blaschke-mirror";
pub const BEREZIN_IN_NUMRANGE: &str = "berezin-in-numerical-range";

/// Size of the perturbation `psi -> psi (1 + eps z)` used by `--perturb`.
pub const DEFAULT_PERTURBATION: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Pass,
    Fail,
    Inconclusive,
}

impl Verdict {
    pub fn exit_code(self) -> i32 {
        match self {
            Verdict::Pass => 0,
            Verdict::Fail => 1,
            Verdict::Inconclusive => 2,
        }
    }
}

/// Defects below `pass` pass, above `fail` fail, anything else is inconclusive.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Thresholds {
    pub pass: f64,
    pub fail: f64,
}

impl Default for Thresholds {
    fn default() -> Self {
        Self {
            pass: PASS_THRESHOLD,
            fail: FAIL_THRESHOLD,
        }
    }
}

impl Thresholds {
    pub fn new(pass: f64, fail: f64) -> Result<Self> {
        if !(pass > 0.0 && fail.is_finite() && pass <= fail) {
            return Err(Error::InvalidArgument(format!(
                "need 0 < pass <= fail, got pass = {pass}, fail = {fail}"
            )));
        }
        Ok(Self { pass, fail })
    }

    /// A single cut: below passes, anything else fails.
    pub fn strict(cut: f64) -> Self {
        Self { pass: cut, fail: cut }
    }

    pub fn verdict(&self, defect: f64) -> Verdict {
        if defect < self.pass {
            Verdict::Pass
        } else if defect > self.fail || defect.is_nan() || self.pass == self.fail {
            Verdict::Fail
        } else {
            Verdict::Inconclusive
        }
    }
}

/// One row of a certification report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportRecord {
    pub theorem: String,
    pub params: Value,
    /// `None` when the check could not be carried out.
    pub defect: Option<f64>,
    pub verdict: Verdict,
    pub runtime_ms: f64,
    pub seed: u64,
    pub thresholds: Thresholds,
    #[serde(default, skip_serializing_if = "Value::is_null")]
    pub details: Value,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

impl ReportRecord {
    /// 0 pass, 1 fail, 2 inconclusive or not carried out.
    pub fn exit_code(&self) -> i32 {
        if self.error.is_some() {
            2
        } else {
            self.verdict.exit_code()
        }
    }
}

/// The measured defect of a cell and whatever else is worth recording.
#[derive(Debug, Clone, PartialEq)]
pub struct CellOutcome {
    pub defect: f64,
    pub details: Value,
}

/// Whether records carry wall-clock time; without it records are reproducible byte for byte.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Timing {
    Measured,
    Omitted,
}

/// Runs `check` and turns its outcome, or its error, into a record.
pub fn run_cell(
    theorem: &str,
    params: Value,
    seed: u64,
    thresholds: Thresholds,
    timing: Timing,
    check: impl FnOnce() -> Result<CellOutcome>,
) -> ReportRecord {
    let start = Instant::now();
    let outcome = check();
    let runtime_ms = match timing {
        Timing::Measured => (start.elapsed().as_secs_f64() * 1e6).round() / 1e3,
        Timing::Omitted => 0.0,
    };
    let (defect, verdict, details, error) = match outcome {
        Ok(o) if o.defect.is_finite() => (Some(o.defect), thresholds.verdict(o.defect), o.details, None),
        Ok(o) => (
            None,
            Verdict::Fail,
            o.details,
            Some(format!("non-finite defect {}", o.defect)),
        ),
        Err(e) => (None, Verdict::Inconclusive, Value::Null, Some(e.to_string())),
    };
    ReportRecord {
        theorem: theorem.to_string(),
        params,
        defect,
        verdict,
        runtime_ms,
        seed,
        thresholds,
        details,
        error,
    }
}

/// Finite-section cross-check of a defect sweep.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MatrixCheck {
    pub n: usize,
    pub margin: usize,
}

impl Default for MatrixCheck {
    fn default() -> Self {
        Self { n: 64, margin: 24 }
    }
}

fn with_matrix<F>(kernel: f64, op: &OperatorSpec, matrix: Option<MatrixCheck>, f: F) -> Result<CellOutcome>
where
    F: FnOnce(usize, usize) -> Result<f64>,
{
    let matrix_defect = match matrix {
        Some(m) if op.space().dim() == 1 => Some(f(m.n, m.margin)?),
        _ => None,
    };
    let defect = matrix_defect.map_or(kernel, |m| kernel.max(m));
    Ok(CellOutcome {
        defect,
        details: json!({ "kernel_defect": kernel, "matrix_defect": matrix_defect }),
    })
}

/// `T = C T^* C` on kernels, and on the finite section when `d = 1`.
pub fn cs_cell(
    op: &OperatorSpec,
    conj: &ConjugationSpec,
    samples: &SampleSpec,
    matrix: Option<MatrixCheck>,
) -> Result<CellOutcome> {
    let kernel = cs_defect(op, conj, samples)?;
    with_matrix(kernel, op, matrix, |n, m| matrix_cs_defect(op, conj, n, m))
}

/// `T = T^*` on kernels, and on the finite section when `d = 1`.
pub fn sa_cell(op: &OperatorSpec, samples: &SampleSpec, matrix: Option<MatrixCheck>) -> Result<CellOutcome> {
    let kernel = sa_defect(op, samples)?;
    with_matrix(kernel, op, matrix, |n, m| matrix_sa_defect(op, n, m))
}

/// `|lambda_{r xi}|` along `radii`; the defect is the last value, or at least 1
/// when the sequence fails to decrease strictly.
pub fn decay_cell(terms: &[NumRangeTerm], xi: Complex64, radii: &[f64]) -> Result<CellOutcome> {
    let values = boundary_decay_probe(terms, xi, radii)?;
    let last = *values
        .last()
        .ok_or_else(|| Error::InvalidArgument("need at least one radius".into()))?;
    let decreasing = values.windows(2).all(|w| w[1] < w[0]);
    let defect = if decreasing { last } else { last.max(1.0) };
    Ok(CellOutcome {
        defect,
        details: json!({ "radii": radii, "moduli": values, "strictly_decreasing": decreasing }),
    })
}

/// The two-term fixture `psi_1 = 1, phi_1 = z / 2; psi_2 = z, phi_2 = z / 3`.
pub fn decay_fixture() -> Vec<NumRangeTerm> {
    linear_terms(&[Complex64::new(0.5, 0.0), Complex64::new(1.0 / 3.0, 0.0)])
}

/// Terms `psi_j = z^(j - 1)`, `phi_j = beta_j z`.
pub fn linear_terms(betas: &[Complex64]) -> Vec<NumRangeTerm> {
    betas
        .iter()
        .enumerate()
        .map(|(j, &beta)| NumRangeTerm {
            psi: if j == 0 {
                Weight::one()
            } else {
                Weight::Polynomial(TruncatedSeries::monomial(j, j))
            },
            phi: SelfMap::Lft(LftSymbol::linear(beta)),
        })
        .collect()
}

/// Real `beta`: defect is the largest imaginary part or angular variation, or 1
/// if a value leaves `(0, 1]`. Non-real `beta`: defect is `10 spacing / distance`
/// of the best failing midpoint, so values below 1 certify nonconvexity.
pub fn elliptic_cell(gamma: u32, beta: Complex64, grid: &PolarGrid) -> Result<CellOutcome> {
    let verdict = elliptic_convexity_verdict(gamma, beta, grid)?;
    let defect = match &verdict {
        EllipticVerdict::RealSegment {
            min,
            max,
            max_imag,
            angular_variation,
        } => {
            if *min > 0.0 && *max <= 1.0 {
                max_imag.max(*angular_variation)
            } else {
                1.0
            }
        }
        EllipticVerdict::NonConvex { midpoint, .. } => {
            if midpoint.distance > 0.0 {
                MEMBERSHIP_FACTOR * midpoint.spacing / midpoint.distance
            } else {
                f64::INFINITY
            }
        }
        EllipticVerdict::Inconclusive { best_ratio, .. } => {
            if *best_ratio > 0.0 {
                MEMBERSHIP_FACTOR / best_ratio
            } else {
                f64::INFINITY
            }
        }
    };
    Ok(CellOutcome {
        defect,
        details: serde_json::to_value(&verdict).map_err(|e| Error::Numerical(e.to_string()))?,
    })
}

/// Largest residual of the conjugate-value witness over `count` seeded points.
pub fn symmetry_cell(gamma: u32, alpha: &BlaschkeParam, count: usize, radius: f64, seed: u64) -> Result<CellOutcome> {
    let points = sample_disk(count, radius, seed)?;
    let worst = points
        .par_iter()
        .map(|&w| symmetry_witness(gamma, alpha, w).map(|s| s.residual))
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .fold(0.0, f64::max);
    Ok(CellOutcome {
        defect: worst,
        details: json!({ "points": count, "radius": radius }),
    })
}

/// `alpha != 0`: defect is the witness residual, or 1 without a positive gap.
/// `alpha = 0`: defect is the largest `|value - 1|` over `grid`.
pub fn nonconvexity_cell(
    gamma: u32,
    alpha: &BlaschkeParam,
    search: &WitnessSearch,
    grid: &PolarGrid,
) -> Result<CellOutcome> {
    if alpha.is_zero() {
        let cloud = sample_berezin_range(gamma, &BerezinSource::Blaschke(*alpha), grid)?;
        let worst = cloud
            .samples()
            .iter()
            .map(|s| (s.value - 1.0).norm())
            .fold(0.0, f64::max);
        return Ok(CellOutcome {
            defect: worst,
            details: json!({ "convex": true, "range": [[1.0, 0.0]] }),
        });
    }
    let w = nonconvexity_certificate(gamma, alpha, search)?;
    let defect = if w.gap > 0.0 { w.partner_residual } else { 1.0 };
    Ok(CellOutcome {
        defect,
        details: serde_json::to_value(w).map_err(|e| Error::Numerical(e.to_string()))?,
    })
}

/// Largest mirror-identity residual over the nodes of `grid`.
pub fn mirror_cell(gamma: u32, alpha: &BlaschkeParam, grid: &PolarGrid) -> Result<CellOutcome> {
    let worst = (0..grid.len())
        .into_par_iter()
        .map(|k| mirror_identity_defect(gamma, alpha, grid.node(k / grid.theta_count(), k % grid.theta_count())))
        .reduce(|| 0.0, f64::max);
    Ok(CellOutcome {
        defect: worst,
        details: json!({ "points": grid.len() }),
    })
}

/// Containment of the section Berezin cloud in the support polygon, plus 1 if
/// the polygon fails the convexity test.
pub fn numrange_cell(t: &OperatorMatrix, grid: &PolarGrid, angles: usize) -> Result<CellOutcome> {
    let hull = numerical_range_hull(t, angles)?;
    let cloud = sample_berezin_range(t.gamma(), &BerezinSource::Section(t), grid)?;
    let containment = cloud
        .samples()
        .par_iter()
        .map(|s| hull.signed_distance(s.value))
        .reduce(|| f64::NEG_INFINITY, f64::max);
    let convex = hull.is_convex(1e-12);
    let defect = containment.max(0.0) + if convex { 0.0 } else { 1.0 };
    let extent = hull.vertices().iter().map(|v| v.norm()).fold(0.0, f64::max);
    Ok(CellOutcome {
        defect,
        details: json!({ "containment": containment, "convex": convex, "max_vertex_modulus": extent, "angles": angles }),
    })
}

/// The default `T` fixtures of the containment check.
pub fn numrange_fixtures() -> Result<Vec<(&'static str, OperatorMatrix)>> {
    let zero = Complex64::new(0.0, 0.0);
    let one = Complex64::new(1.0, 0.0);
    let mut jordan = DMatrix::from_element(2, 2, zero);
    jordan[(0, 1)] = one;
    let comp = OperatorSpec::composition(
        SpaceSpec::disk(1)?,
        vec![SelfMap::Lft(LftSymbol::linear(Complex64::new(0.5, 0.0)))],
    )?;
    Ok(vec![
        ("diagonal", OperatorMatrix::diagonal(1, &[zero, one])?),
        ("jordan", OperatorMatrix::new(1, jordan)?),
        ("composition", crate::symbols::operator_matrix(&comp, 32)?),
    ])
}

/// Options of the default sweep.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepOptions {
    pub seed: u64,
    /// Perturb the weights of the symmetry and self-adjointness cells.
    pub perturb: Option<f64>,
    pub timing: Timing,
    pub thresholds: Thresholds,
}

impl Default for SweepOptions {
    fn default() -> Self {
        Self {
            seed: 0,
            perturb: None,
            timing: Timing::Measured,
            thresholds: Thresholds::default(),
        }
    }
}

/// Aggregate of a sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub records: Vec<ReportRecord>,
    pub passed: usize,
    pub failed: usize,
    pub inconclusive: usize,
}

impl Report {
    pub fn new(records: Vec<ReportRecord>) -> Self {
        let count = |v: Verdict| records.iter().filter(|r| r.verdict == v).count();
        let (passed, failed, inconclusive) = (count(Verdict::Pass), count(Verdict::Fail), count(Verdict::Inconclusive));
        Self {
            records,
            passed,
            failed,
            inconclusive,
        }
    }

    /// 0 iff every cell passes.
    pub fn exit_code(&self) -> i32 {
        if self
            .records
            .iter()
            .all(|r| r.verdict == Verdict::Pass && r.error.is_none())
        {
            0
        } else {
            1
        }
    }
}

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn maybe_perturb(op: Result<OperatorSpec>, perturb: Option<f64>) -> Result<OperatorSpec> {
    match perturb {
        Some(eps) => op?.perturbed(eps),
        None => op,
    }
}

/// Every theorem over a small fixed parameter grid.
#[allow(clippy::type_complexity)]
pub fn default_sweep(opts: &SweepOptions) -> Vec<ReportRecord> {
    let samples = SampleSpec {
        seed: opts.seed,
        ..SampleSpec::default()
    };
    let matrix = Some(MatrixCheck::default());
    let cell = |theorem: &str, params: Value, th: Thresholds, f: &dyn Fn() -> Result<CellOutcome>| {
        run_cell(theorem, params, opts.seed, th, opts.timing, f)
    };
    let mut out = Vec::new();

    let j_cells: [(u32, Vec<u32>, Vec<Complex64>, Vec<Complex64>, Complex64); 4] = [
        (1, vec![0], vec![c(0.3, 0.0)], vec![c(0.4, 0.0)], c(1.0, 0.0)),
        (2, vec![1], vec![c(0.2, 0.1)], vec![c(0.5, 0.0)], c(0.7, -0.2)),
        (
            3,
            vec![0, 2],
            vec![c(0.1, 0.0), c(0.0, -0.2)],
            vec![c(0.5, 0.0), c(0.3, 0.0)],
            c(1.5, 0.0),
        ),
        (
            2,
            vec![1, 0, 1],
            vec![c(0.2, 0.0), c(0.0, 0.1), c(-0.3, 0.0)],
            vec![c(0.3, 0.0), c(0.0, 0.4), c(0.2, 0.0)],
            c(0.0, 1.0),
        ),
    ];
    for (gamma, n, phi0, phi1, a) in j_cells {
        let params = json!({ "gamma": gamma, "dim": n.len(), "n": n, "phi0": phi0, "phi1": phi1, "a": a, "perturb": opts.perturb });
        out.push(cell(CS_STANDARD, params, opts.thresholds, &|| {
            let space = SpaceSpec::new(n.len(), gamma)?;
            let mi = MultiIndex::new(n.clone())?;
            let op =
                canonical_cs_symbols_j(&space, &mi, &phi0, &phi1, a).and_then(|s| s.into_operator(space, mi.clone()));
            cs_cell(
                &maybe_perturb(op, opts.perturb)?,
                &ConjugationSpec::StandardJ,
                &samples,
                matrix,
            )
        }));
    }

    let sa_cells: [(u32, Vec<u32>, Vec<Complex64>, Vec<f64>, f64); 3] = [
        (1, vec![1], vec![c(0.3, 0.2)], vec![0.4], 1.0),
        (2, vec![0, 1], vec![c(0.1, 0.0), c(0.0, 0.2)], vec![0.5, -0.3], -2.0),
        (3, vec![2], vec![c(-0.25, 0.0)], vec![0.3], 0.5),
    ];
    for (gamma, n, phi0, phi1, a) in sa_cells {
        let params = json!({ "gamma": gamma, "dim": n.len(), "n": n, "phi0": phi0, "phi1": phi1, "a": a, "perturb": opts.perturb });
        out.push(cell(SELF_ADJOINT, params, opts.thresholds, &|| {
            let space = SpaceSpec::new(n.len(), gamma)?;
            let mi = MultiIndex::new(n.clone())?;
            let op =
                canonical_sa_symbols(&space, &mi, &phi0, &phi1, a).and_then(|s| s.into_operator(space, mi.clone()));
            sa_cell(&maybe_perturb(op, opts.perturb)?, &samples, matrix)
        }));
    }

    let rot_cells: [(u32, Complex64, Complex64, Complex64, Complex64, Vec<Complex64>); 2] = [
        (
            1,
            c(1.0, 0.0),
            c(0.0, 1.0),
            c(0.2, 0.0),
            c(0.3, 0.1),
            vec![c(1.0, 0.0), c(0.0, 0.5)],
        ),
        (
            2,
            Complex64::from_polar(1.0, 0.7),
            Complex64::from_polar(1.0, 2.1),
            c(0.1, -0.2),
            c(0.4, 0.0),
            vec![c(0.3, 0.0), c(0.0, 0.2), c(1.0, -1.0)],
        ),
    ];
    for (gamma, mu, xi, phi0, phi1, coeffs) in rot_cells {
        let params = json!({ "gamma": gamma, "mu": mu, "xi": xi, "phi0": phi0, "phi1": phi1, "coeffs": coeffs, "perturb": opts.perturb });
        out.push(cell(CS_ROTATION, params, opts.thresholds, &|| {
            let conj = ConjugationSpec::rotation(mu, xi)?;
            let op = canonical_cs_symbols_rotation(gamma, xi, phi0, phi1, &coeffs).and_then(|s| s.into_operator(&[]));
            cs_cell(&maybe_perturb(op, opts.perturb)?, &conj, &samples, matrix)
        }));
    }

    let herm_cells: [(u32, Complex64, f64, Vec<f64>, Vec<f64>); 2] = [
        (1, c(0.0, 0.3), 0.3, vec![1.0, -0.5], vec![1.0, 1.0]),
        (2, c(0.2, 0.1), -0.4, vec![0.7, 0.2, 0.1], vec![1.5, -1.0, 0.5]),
    ];
    for (gamma, phi0, phi1, coeffs, amps) in herm_cells {
        let params = json!({ "gamma": gamma, "phi0": phi0, "phi1": phi1, "coeffs": coeffs, "amplitudes": amps, "perturb": opts.perturb });
        out.push(cell(HERMITIAN_SUM, params, opts.thresholds, &|| {
            let amps: Vec<Complex64> = amps.iter().map(|&x| c(x, 0.0)).collect();
            let op = canonical_hermitian_symbols(gamma, phi0, phi1, &coeffs).and_then(|s| s.into_operator(&amps));
            sa_cell(&maybe_perturb(op, opts.perturb)?, &samples, matrix)
        }));
    }

    let radii = [0.9, 0.99, 0.999, 0.9999];
    for xi in [c(1.0, 0.0), c(0.0, 1.0), Complex64::from_polar(1.0, 2.0)] {
        let params = json!({ "terms": "psi_1 = 1, phi_1 = z/2; psi_2 = z, phi_2 = z/3", "xi": xi, "radii": radii });
        out.push(cell(ZERO_IN_CLOSURE, params, Thresholds::strict(0.01), &|| {
            decay_cell(&decay_fixture(), xi, &radii)
        }));
    }

    for beta in [-1.0, -0.5, 0.0, 0.5, 1.0] {
        let grid = PolarGrid::new(40, 32, 0.99).expect("valid grid");
        let params = json!({ "gamma": 1, "beta": c(beta, 0.0), "grid": [40, 32], "r_max": 0.99 });
        out.push(cell(ELLIPTIC_CONVEXITY, params, Thresholds::strict(1e-13), &|| {
            elliptic_cell(1, c(beta, 0.0), &grid)
        }));
    }
    for (gamma, beta) in [(1, c(0.0, 1.0)), (2, c(0.0, 1.0))] {
        let grid = PolarGrid::new(200, 16, 0.99).expect("valid grid");
        let params = json!({ "gamma": gamma, "beta": beta, "grid": [200, 16], "r_max": 0.99 });
        out.push(cell(ELLIPTIC_CONVEXITY, params, Thresholds::strict(1.0), &|| {
            elliptic_cell(gamma, beta, &grid)
        }));
    }

    let alphas = [c(0.5, 0.0), c(0.3, 0.4), c(0.0, -0.6)];
    for alpha in alphas {
        for gamma in [1, 3] {
            let params = json!({ "gamma": gamma, "alpha": alpha, "points": 200, "radius": 0.95 });
            out.push(cell(BLASCHKE_SYMMETRY, params, Thresholds::strict(1e-11), &|| {
                symmetry_cell(gamma, &BlaschkeParam::new(alpha)?, 200, 0.95, opts.seed)
            }));
        }
    }

    let search = WitnessSearch::default();
    let collapse_grid = PolarGrid::new(20, 32, 0.99).expect("valid grid");
    for (alpha, gamma, th) in [
        (c(0.0, 0.0), 1, Thresholds::strict(1e-14)),
        (c(0.1, 0.0), 1, Thresholds::default()),
        (c(0.5, 0.0), 2, Thresholds::default()),
        (c(0.7, 0.0), 3, Thresholds::default()),
        (c(0.3, 0.4), 1, Thresholds::default()),
    ] {
        let params = json!({ "gamma": gamma, "alpha": alpha });
        out.push(cell(BLASCHKE_NONCONVEXITY, params, th, &|| {
            nonconvexity_cell(gamma, &BlaschkeParam::new(alpha)?, &search, &collapse_grid)
        }));
    }

    let mirror_grid = PolarGrid::new(20, 50, 0.99).expect("valid grid");
    for alpha in [c(0.1, 0.0), c(0.3, 0.4), c(0.0, 0.6)] {
        for gamma in [1, 2] {
            let params = json!({ "gamma": gamma, "alpha": alpha, "grid": [20, 50], "r_max": 0.99 });
            out.push(cell(BLASCHKE_MIRROR, params, Thresholds::strict(1e-13), &|| {
                mirror_cell(gamma, &BlaschkeParam::new(alpha)?, &mirror_grid)
            }));
        }
    }

    match numrange_fixtures() {
        Ok(fixtures) => {
            for (name, t) in fixtures {
                let r_max = if t.dim() > 2 { 0.6 } else { 0.99 };
                let grid = PolarGrid::new(20, 32, r_max).expect("valid grid");
                let params =
                    json!({ "fixture": name, "dim": t.dim(), "grid": [20, 32], "r_max": r_max, "angles": 360 });
                out.push(cell(BEREZIN_IN_NUMRANGE, params, Thresholds::default(), &|| {
                    numrange_cell(&t, &grid, 360)
                }));
            }
        }
        Err(e) => out.push(cell(BEREZIN_IN_NUMRANGE, json!({}), Thresholds::default(), &|| {
            Err(e.clone())
        })),
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn thresholds_classify() {
        let t = Thresholds::default();
        assert_eq!(t.verdict(1e-12), Verdict::Pass);
        assert_eq!(t.verdict(1e-6), Verdict::Inconclusive);
        assert_eq!(t.verdict(1e-3), Verdict::Fail);
        assert_eq!(t.verdict(f64::NAN), Verdict::Fail);
        let s = Thresholds::strict(0.01);
        assert_eq!(s.verdict(0.009), Verdict::Pass);
        assert_eq!(s.verdict(0.01), Verdict::Fail);
        assert!(Thresholds::new(1e-3, 1e-6).is_err());
    }

    #[test]
    fn errors_become_records() {
        let r = run_cell("x", json!({}), 3, Thresholds::default(), Timing::Omitted, || {
            Err(Error::NotFound("nothing".into()))
        });
        assert_eq!(r.verdict, Verdict::Inconclusive);
        assert_eq!(r.exit_code(), 2);
        assert!(r.defect.is_none());
        assert_eq!(r.runtime_ms, 0.0);
        let back: ReportRecord = serde_json::from_str(&serde_json::to_string(&r).unwrap()).unwrap();
        assert_eq!(back, r);
    }

    #[test]
    fn decay_cell_flags_growth() {
        let out = decay_cell(&decay_fixture(), c(1.0, 0.0), &[0.9, 0.99, 0.999, 0.9999]).unwrap();
        assert!(out.defect < 0.01);
        let out = decay_cell(&decay_fixture(), c(1.0, 0.0), &[0.99, 0.9]).unwrap();
        assert!(out.defect >= 1.0);
    }

    #[test]
    fn linear_terms_match_fixture() {
        let t = linear_terms(&[c(0.5, 0.0), c(1.0 / 3.0, 0.0)]);
        assert_eq!(t, decay_fixture());
        let z = crate::kernels::DiskPoint::real(0.5).unwrap();
        let v = crate::numrange::numrange_point(&t, z).unwrap();
        assert!((v.re - 1.266_234).abs() < 1e-6);
    }
}
