//! C ABI over `berezin-kit`.
//!
//! Every fallible call returns a [`BkStatus`]. On failure the message is kept per thread and can be read
//! with [`bk_last_error_message`]. Handles are opaque and owned by the caller until passed to their
//! `_free` function.

#![allow(clippy::missing_safety_doc)]

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;
use std::slice;

use berezin_kit::berezin::{
    berezin_blaschke, nonconvexity_certificate, sample_berezin_range, symmetry_witness, BerezinSource, BlaschkeParam,
    PolarGrid, RangeCloud, WitnessSearch,
};
use berezin_kit::jets::{LftSymbol, TruncatedSeries};
use berezin_kit::kernels::{DiskPoint, MultiIndex, SpaceSpec};
use berezin_kit::symbols::{
    canonical_cs_symbols_j, canonical_sa_symbols, cs_defect, sa_defect, ConjugationSpec, OperatorSpec, SampleSpec,
    SelfMap, Weight,
};
use berezin_kit::Error;
use num_complex::Complex64;

/// Result codes.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BkStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    OutsideDisk = 3,
    DimensionMismatch = 4,
    NotSelfMap = 5,
    Domain = 6,
    Precision = 7,
    NotFound = 8,
    Numerical = 9,
    Unsupported = 10,
    IndexOutOfRange = 11,
    Panic = 12,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BkComplex {
    pub re: f64,
    pub im: f64,
}

impl From<BkComplex> for Complex64 {
    fn from(z: BkComplex) -> Self {
        Complex64::new(z.re, z.im)
    }
}

impl From<Complex64> for BkComplex {
    fn from(z: Complex64) -> Self {
        BkComplex { re: z.re, im: z.im }
    }
}

/// Certificate that the Berezin range of a Blaschke composition operator is not convex.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BkCertificate {
    pub z: BkComplex,
    pub v: BkComplex,
    pub partner: BkComplex,
    pub partner_residual: f64,
    pub midpoint: f64,
    pub real_slice_inf: f64,
    pub gap: f64,
}

/// Opaque operator handle.
pub struct BkOperator(OperatorSpec);

/// Opaque sampled Berezin range.
pub struct BkCloud(RangeCloud);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(message: String) {
    let text = CString::new(message.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|slot| *slot.borrow_mut() = Some(text));
}

fn status_of(e: &Error) -> BkStatus {
    match e {
        Error::DimensionMismatch { .. } | Error::DegreeMismatch { .. } => BkStatus::DimensionMismatch,
        Error::InvalidArgument(_) => BkStatus::InvalidArgument,
        Error::OutsideDisk { .. } => BkStatus::OutsideDisk,
        Error::Domain(_) => BkStatus::Domain,
        Error::NotSelfMap { .. } => BkStatus::NotSelfMap,
        Error::Unsupported(_) => BkStatus::Unsupported,
        Error::Precision { .. } => BkStatus::Precision,
        Error::NotFound(_) => BkStatus::NotFound,
        Error::Numerical(_) => BkStatus::Numerical,
    }
}

enum Fail {
    Core(Error),
    Null(&'static str),
    Index(usize, usize),
}

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail::Core(e)
    }
}

fn guard(body: impl FnOnce() -> Result<(), Fail>) -> BkStatus {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(Ok(())) => BkStatus::Ok,
        Ok(Err(Fail::Core(e))) => {
            set_error(e.to_string());
            status_of(&e)
        }
        Ok(Err(Fail::Null(name))) => {
            set_error(format!("{name} is null"));
            BkStatus::NullPointer
        }
        Ok(Err(Fail::Index(k, len))) => {
            set_error(format!("index {k} out of range for length {len}"));
            BkStatus::IndexOutOfRange
        }
        Err(_) => {
            set_error("internal panic".into());
            BkStatus::Panic
        }
    }
}

unsafe fn out<'a, T>(p: *mut T, name: &'static str) -> Result<&'a mut T, Fail> {
    p.as_mut().ok_or(Fail::Null(name))
}

unsafe fn input<'a, T>(p: *const T, name: &'static str) -> Result<&'a T, Fail> {
    p.as_ref().ok_or(Fail::Null(name))
}

unsafe fn array<'a, T>(p: *const T, len: usize, name: &'static str) -> Result<&'a [T], Fail> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(Fail::Null(name));
    }
    Ok(slice::from_raw_parts(p, len))
}

fn complexes(z: &[BkComplex]) -> Vec<Complex64> {
    z.iter().map(|&c| c.into()).collect()
}

/// Message of the last failed call on this thread, or null. Valid until the next failing call on the thread.
#[no_mangle]
pub extern "C" fn bk_last_error_message() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Static description of a status code.
#[no_mangle]
pub extern "C" fn bk_status_name(status: BkStatus) -> *const c_char {
    let s: &'static [u8] = match status {
        BkStatus::Ok => b"ok\0",
        BkStatus::NullPointer => b"null pointer\0",
        BkStatus::InvalidArgument => b"invalid argument\0",
        BkStatus::OutsideDisk => b"outside disk\0",
        BkStatus::DimensionMismatch => b"dimension mismatch\0",
        BkStatus::NotSelfMap => b"not a self-map\0",
        BkStatus::Domain => b"domain error\0",
        BkStatus::Precision => b"precision\0",
        BkStatus::NotFound => b"not found\0",
        BkStatus::Numerical => b"numerical failure\0",
        BkStatus::Unsupported => b"unsupported\0",
        BkStatus::IndexOutOfRange => b"index out of range\0",
        BkStatus::Panic => b"panic\0",
    };
    s.as_ptr().cast()
}

/// `f -> psi * (f^{(n)} o phi)` on `H_gamma` of the disk, with polynomial `psi` (monomial coefficients,
/// lowest first) and `phi(z) = b0 + b1 z / (1 - c z)`.
#[no_mangle]
pub unsafe extern "C" fn bk_operator_comp_diff(
    gamma: u32,
    n: u32,
    psi: *const BkComplex,
    psi_len: usize,
    b0: BkComplex,
    b1: BkComplex,
    c: BkComplex,
    result: *mut *mut BkOperator,
) -> BkStatus {
    guard(|| {
        let result = out(result, "result")?;
        let psi = TruncatedSeries::new(complexes(array(psi, psi_len, "psi")?))?;
        let phi = LftSymbol::new(b0.into(), b1.into(), c.into())?;
        let op = OperatorSpec::comp_diff(
            SpaceSpec::disk(gamma)?,
            MultiIndex::single(n),
            vec![Weight::Polynomial(psi)],
            vec![SelfMap::Lft(phi)],
        )?;
        *result = Box::into_raw(Box::new(BkOperator(op)));
        Ok(())
    })
}

/// Operator built from the canonical symbols that make it complex symmetric for the standard conjugation,
/// on `H_gamma` of the polydisk of dimension `dim`. `n`, `phi0`, `phi1` each hold `dim` entries.
#[no_mangle]
pub unsafe extern "C" fn bk_operator_canonical_j(
    gamma: u32,
    dim: usize,
    n: *const u32,
    phi0: *const BkComplex,
    phi1: *const BkComplex,
    a: BkComplex,
    result: *mut *mut BkOperator,
) -> BkStatus {
    guard(|| {
        let result = out(result, "result")?;
        let space = SpaceSpec::new(dim, gamma)?;
        let n = MultiIndex::new(array(n, dim, "n")?.to_vec())?;
        let phi0 = complexes(array(phi0, dim, "phi0")?);
        let phi1 = complexes(array(phi1, dim, "phi1")?);
        let op = canonical_cs_symbols_j(&space, &n, &phi0, &phi1, a.into())?.into_operator(space, n)?;
        *result = Box::into_raw(Box::new(BkOperator(op)));
        Ok(())
    })
}

/// Self-adjoint analogue of [`bk_operator_canonical_j`]; `phi1` and `a` are real.
#[no_mangle]
pub unsafe extern "C" fn bk_operator_canonical_sa(
    gamma: u32,
    dim: usize,
    n: *const u32,
    phi0: *const BkComplex,
    phi1: *const f64,
    a: f64,
    result: *mut *mut BkOperator,
) -> BkStatus {
    guard(|| {
        let result = out(result, "result")?;
        let space = SpaceSpec::new(dim, gamma)?;
        let n = MultiIndex::new(array(n, dim, "n")?.to_vec())?;
        let phi0 = complexes(array(phi0, dim, "phi0")?);
        let phi1 = array(phi1, dim, "phi1")?;
        let op = canonical_sa_symbols(&space, &n, &phi0, phi1, a)?.into_operator(space, n)?;
        *result = Box::into_raw(Box::new(BkOperator(op)));
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn bk_operator_free(op: *mut BkOperator) {
    if !op.is_null() {
        drop(Box::from_raw(op));
    }
}

fn sample_spec(samples: usize, radius: f64, seed: u64) -> SampleSpec {
    SampleSpec { samples, radius, seed }
}

/// Sampled defect of `C T C = T^*` for the standard conjugation.
#[no_mangle]
pub unsafe extern "C" fn bk_cs_defect(
    op: *const BkOperator,
    samples: usize,
    radius: f64,
    seed: u64,
    defect: *mut f64,
) -> BkStatus {
    guard(|| {
        let op = input(op, "op")?;
        let defect = out(defect, "defect")?;
        *defect = cs_defect(&op.0, &ConjugationSpec::StandardJ, &sample_spec(samples, radius, seed))?;
        Ok(())
    })
}

/// Same as [`bk_cs_defect`] for `f(z) -> mu conj(f(conj(xi z)))` with unimodular `mu`, `xi`.
#[no_mangle]
pub unsafe extern "C" fn bk_cs_defect_rotation(
    op: *const BkOperator,
    mu: BkComplex,
    xi: BkComplex,
    samples: usize,
    radius: f64,
    seed: u64,
    defect: *mut f64,
) -> BkStatus {
    guard(|| {
        let op = input(op, "op")?;
        let defect = out(defect, "defect")?;
        let conj = ConjugationSpec::rotation(mu.into(), xi.into())?;
        *defect = cs_defect(&op.0, &conj, &sample_spec(samples, radius, seed))?;
        Ok(())
    })
}

/// Sampled defect of `T = T^*`.
#[no_mangle]
pub unsafe extern "C" fn bk_sa_defect(
    op: *const BkOperator,
    samples: usize,
    radius: f64,
    seed: u64,
    defect: *mut f64,
) -> BkStatus {
    guard(|| {
        let op = input(op, "op")?;
        let defect = out(defect, "defect")?;
        *defect = sa_defect(&op.0, &sample_spec(samples, radius, seed))?;
        Ok(())
    })
}

/// Berezin transform at `w` of composition with the Blaschke factor of zero `alpha`.
#[no_mangle]
pub unsafe extern "C" fn bk_berezin_blaschke(
    gamma: u32,
    alpha: BkComplex,
    w: BkComplex,
    value: *mut BkComplex,
) -> BkStatus {
    guard(|| {
        let value = out(value, "value")?;
        if gamma == 0 {
            return Err(Error::InvalidArgument("gamma must be a positive integer".into()).into());
        }
        let alpha = BlaschkeParam::new(alpha.into())?;
        *value = berezin_blaschke(gamma, &alpha, DiskPoint::new(w.into())?).into();
        Ok(())
    })
}

/// Point `lambda` whose transform value is the conjugate of the value at `w`.
#[no_mangle]
pub unsafe extern "C" fn bk_symmetry_witness(
    gamma: u32,
    alpha: BkComplex,
    w: BkComplex,
    lambda: *mut BkComplex,
    residual: *mut f64,
) -> BkStatus {
    guard(|| {
        let lambda = out(lambda, "lambda")?;
        let residual = out(residual, "residual")?;
        let s = symmetry_witness(gamma, &BlaschkeParam::new(alpha.into())?, DiskPoint::new(w.into())?)?;
        *lambda = s.lambda.value().into();
        *residual = s.residual;
        Ok(())
    })
}

/// Searches for a nonconvexity certificate with the default search.
#[no_mangle]
pub unsafe extern "C" fn bk_nonconvexity_certificate(
    gamma: u32,
    alpha: BkComplex,
    certificate: *mut BkCertificate,
) -> BkStatus {
    guard(|| {
        let certificate = out(certificate, "certificate")?;
        let w = nonconvexity_certificate(gamma, &BlaschkeParam::new(alpha.into())?, &WitnessSearch::default())?;
        *certificate = BkCertificate {
            z: w.z.value().into(),
            v: w.v.into(),
            partner: w.partner.value().into(),
            partner_residual: w.partner_residual,
            midpoint: w.midpoint,
            real_slice_inf: w.real_slice_inf,
            gap: w.gap,
        };
        Ok(())
    })
}

/// Samples the Berezin range of the Blaschke composition operator on a polar grid.
#[no_mangle]
pub unsafe extern "C" fn bk_cloud_blaschke(
    gamma: u32,
    alpha: BkComplex,
    r_count: usize,
    theta_count: usize,
    r_max: f64,
    result: *mut *mut BkCloud,
) -> BkStatus {
    guard(|| {
        let result = out(result, "result")?;
        let source = BerezinSource::Blaschke(BlaschkeParam::new(alpha.into())?);
        let cloud = sample_berezin_range(gamma, &source, &PolarGrid::new(r_count, theta_count, r_max)?)?;
        *result = Box::into_raw(Box::new(BkCloud(cloud)));
        Ok(())
    })
}

/// Number of samples, or 0 for a null handle.
#[no_mangle]
pub unsafe extern "C" fn bk_cloud_len(cloud: *const BkCloud) -> usize {
    cloud.as_ref().map_or(0, |c| c.0.len())
}

#[no_mangle]
pub unsafe extern "C" fn bk_cloud_get(
    cloud: *const BkCloud,
    index: usize,
    w: *mut BkComplex,
    value: *mut BkComplex,
) -> BkStatus {
    guard(|| {
        let cloud = input(cloud, "cloud")?;
        let w = out(w, "w")?;
        let value = out(value, "value")?;
        let samples = cloud.0.samples();
        let s = samples.get(index).ok_or(Fail::Index(index, samples.len()))?;
        *w = s.w.value().into();
        *value = s.value.into();
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn bk_cloud_free(cloud: *mut BkCloud) {
    if !cloud.is_null() {
        drop(Box::from_raw(cloud));
    }
}
