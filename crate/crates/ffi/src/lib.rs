//! C ABI over the `prdim` estimators.
//!
//! Matrices and trial pairs are opaque heap handles created by `*_new` or
//! `prdim_generate*` and released by the matching `*_free`. Every fallible
//! function returns a [`PrdimStatus`]; on failure the message is kept per
//! thread and read back with [`prdim_last_error_message`]. Panics never
//! cross the boundary.

use std::cell::RefCell;
use std::ffi::c_char;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;
use std::slice;

use prdim::estimator::{estimate_dimensionality, Centering, Correction, DimEstimate, EstimatorVariant};
use prdim::local::twonn;
use prdim::synth::{generate, generate_trial_pair, PopulationSpec};
use prdim::{Error, ErrorClass, SampleMatrix, TrialPair, WeightVector};

/// Result codes. Nonzero values mirror the CLI exit codes where they overlap.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PrdimStatus {
    Ok = 0,
    NullPointer = 1,
    /// Malformed input: non-finite values, bad weights, bad arguments.
    InvalidInput = 2,
    /// A structural precondition failed (too few rows or columns, ...).
    Precondition = 3,
    /// The computation could not produce a usable number.
    Numerical = 4,
    /// An internal panic was caught.
    Panic = 5,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PrdimCorrection {
    Naive = 0,
    Row = 1,
    Col = 2,
    Both = 3,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PrdimCentering {
    Task = 0,
    Neuron = 1,
    None = 2,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PrdimModel {
    Linear = 0,
    Rff = 1,
}

/// One estimate. `gamma` is NaN when `valid` is false.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PrdimEstimate {
    pub gamma: f64,
    pub a: f64,
    pub b: f64,
    pub terms: [f64; 5],
    pub valid: bool,
    pub noise_corrected: bool,
}

/// Opaque matrix handle.
pub struct PrdimMatrix(SampleMatrix);

/// Opaque trial-pair handle.
pub struct PrdimPair(TrialPair);

thread_local! {
    static LAST_ERROR: RefCell<String> = const { RefCell::new(String::new()) };
}

fn set_error(message: String) {
    LAST_ERROR.with(|e| *e.borrow_mut() = message);
}

fn status_of(err: &Error) -> PrdimStatus {
    match err.class() {
        ErrorClass::Input => PrdimStatus::InvalidInput,
        ErrorClass::Precondition => PrdimStatus::Precondition,
        ErrorClass::Numerical => PrdimStatus::Numerical,
    }
}

/// Runs `f`, recording any error or panic.
fn guard(f: impl FnOnce() -> Result<(), PrdimStatusError>) -> PrdimStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_error(String::new());
            PrdimStatus::Ok
        }
        Ok(Err(PrdimStatusError(status, message))) => {
            set_error(message);
            status
        }
        Err(_) => {
            set_error("internal panic".into());
            PrdimStatus::Panic
        }
    }
}

struct PrdimStatusError(PrdimStatus, String);

impl From<Error> for PrdimStatusError {
    fn from(e: Error) -> Self {
        PrdimStatusError(status_of(&e), e.to_string())
    }
}

fn null(what: &str) -> PrdimStatusError {
    PrdimStatusError(PrdimStatus::NullPointer, format!("{what} is null"))
}

fn variant(correction: PrdimCorrection, centering: PrdimCentering) -> EstimatorVariant {
    let correction = match correction {
        PrdimCorrection::Naive => Correction::Naive,
        PrdimCorrection::Row => Correction::Row,
        PrdimCorrection::Col => Correction::Col,
        PrdimCorrection::Both => Correction::Both,
    };
    let centering = match centering {
        PrdimCentering::Task => Centering::Task,
        PrdimCentering::Neuron => Centering::Neuron,
        PrdimCentering::None => Centering::None,
    };
    EstimatorVariant::new(correction, centering)
}

fn to_c(e: &DimEstimate) -> PrdimEstimate {
    PrdimEstimate {
        gamma: e.gamma(),
        a: e.terms.a,
        b: e.terms.b,
        terms: e.terms.as_array(),
        valid: e.is_valid(),
        noise_corrected: e.noise_corrected,
    }
}

/// # Safety
/// `weights` must be null or point to `len` readable doubles.
unsafe fn weights_from(weights: *const f64, len: usize) -> Result<Option<WeightVector>, PrdimStatusError> {
    if weights.is_null() {
        return Ok(None);
    }
    let w = unsafe { slice::from_raw_parts(weights, len) };
    Ok(Some(WeightVector::new(w.to_vec())?))
}

/// Copies a row-major `rows x cols` array into a new matrix handle.
///
/// # Safety
/// `data` must point to `rows * cols` readable doubles and `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn prdim_matrix_new(
    data: *const f64,
    rows: usize,
    cols: usize,
    out: *mut *mut PrdimMatrix,
) -> PrdimStatus {
    guard(|| {
        if data.is_null() {
            return Err(null("data"));
        }
        if out.is_null() {
            return Err(null("out"));
        }
        let len = rows
            .checked_mul(cols)
            .ok_or_else(|| PrdimStatusError(PrdimStatus::InvalidInput, "rows * cols overflows".into()))?;
        let values = unsafe { slice::from_raw_parts(data, len) }.to_vec();
        let m = SampleMatrix::from_shape_vec(rows, cols, values)?;
        unsafe { *out = Box::into_raw(Box::new(PrdimMatrix(m))) };
        Ok(())
    })
}

/// Releases a matrix handle. Null is ignored.
///
/// # Safety
/// `m` must be null or a handle from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn prdim_matrix_free(m: *mut PrdimMatrix) {
    if !m.is_null() {
        drop(unsafe { Box::from_raw(m) });
    }
}

/// # Safety
/// `m` must be a live handle; `rows` and `cols` must be writable.
#[no_mangle]
pub unsafe extern "C" fn prdim_matrix_shape(m: *const PrdimMatrix, rows: *mut usize, cols: *mut usize) -> PrdimStatus {
    guard(|| {
        let m = unsafe { m.as_ref() }.ok_or_else(|| null("matrix"))?;
        if rows.is_null() || cols.is_null() {
            return Err(null("shape output"));
        }
        let (r, c) = m.0.shape();
        unsafe {
            *rows = r;
            *cols = c;
        }
        Ok(())
    })
}

/// Copies the entries in row-major order into `out`, which holds `len` doubles.
///
/// # Safety
/// `m` must be a live handle and `out` must point to `len` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn prdim_matrix_copy(m: *const PrdimMatrix, out: *mut f64, len: usize) -> PrdimStatus {
    guard(|| {
        let m = unsafe { m.as_ref() }.ok_or_else(|| null("matrix"))?;
        if out.is_null() {
            return Err(null("out"));
        }
        let (r, c) = m.0.shape();
        if len != r * c {
            return Err(PrdimStatusError(
                PrdimStatus::InvalidInput,
                format!("buffer holds {len} values, matrix has {}", r * c),
            ));
        }
        let dst = unsafe { slice::from_raw_parts_mut(out, len) };
        for (d, s) in dst.iter_mut().zip(m.0.view().iter()) {
            *d = *s;
        }
        Ok(())
    })
}

/// Builds a trial pair from copies of two equally shaped matrices.
///
/// # Safety
/// `trial1` and `trial2` must be live handles and `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn prdim_pair_new(
    trial1: *const PrdimMatrix,
    trial2: *const PrdimMatrix,
    symmetrize: bool,
    out: *mut *mut PrdimPair,
) -> PrdimStatus {
    guard(|| {
        let t1 = unsafe { trial1.as_ref() }.ok_or_else(|| null("trial1"))?;
        let t2 = unsafe { trial2.as_ref() }.ok_or_else(|| null("trial2"))?;
        if out.is_null() {
            return Err(null("out"));
        }
        let pair = TrialPair::new(t1.0.clone(), t2.0.clone())?.symmetrized(symmetrize);
        unsafe { *out = Box::into_raw(Box::new(PrdimPair(pair))) };
        Ok(())
    })
}

/// Releases a pair handle. Null is ignored.
///
/// # Safety
/// `p` must be null or a handle from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn prdim_pair_free(p: *mut PrdimPair) {
    if !p.is_null() {
        drop(unsafe { Box::from_raw(p) });
    }
}

/// Estimates the dimensionality of one matrix. `weights` may be null; when
/// given it holds one nonnegative weight per row.
///
/// # Safety
/// `m` must be a live handle, `weights` null or `weights_len` readable
/// doubles, and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn prdim_estimate(
    m: *const PrdimMatrix,
    correction: PrdimCorrection,
    centering: PrdimCentering,
    weights: *const f64,
    weights_len: usize,
    out: *mut PrdimEstimate,
) -> PrdimStatus {
    guard(|| {
        let m = unsafe { m.as_ref() }.ok_or_else(|| null("matrix"))?;
        if out.is_null() {
            return Err(null("out"));
        }
        let w = unsafe { weights_from(weights, weights_len) }?;
        let e = estimate_dimensionality(&m.0, variant(correction, centering), w.as_ref())?;
        unsafe { *out = to_c(&e) };
        Ok(())
    })
}

/// Noise-corrected estimate from a trial pair.
///
/// # Safety
/// Same contract as [`prdim_estimate`] with a pair handle.
#[no_mangle]
pub unsafe extern "C" fn prdim_estimate_pair(
    p: *const PrdimPair,
    correction: PrdimCorrection,
    centering: PrdimCentering,
    weights: *const f64,
    weights_len: usize,
    out: *mut PrdimEstimate,
) -> PrdimStatus {
    guard(|| {
        let p = unsafe { p.as_ref() }.ok_or_else(|| null("pair"))?;
        if out.is_null() {
            return Err(null("out"));
        }
        let w = unsafe { weights_from(weights, weights_len) }?;
        let e = estimate_dimensionality(&p.0, variant(correction, centering), w.as_ref())?;
        unsafe { *out = to_c(&e) };
        Ok(())
    })
}

fn spec(model: PrdimModel, latent_dim: usize, input_scale: f64, noise_std: f64) -> PopulationSpec {
    match model {
        PrdimModel::Linear => PopulationSpec::linear(latent_dim, noise_std),
        PrdimModel::Rff => PopulationSpec::rff(latent_dim, input_scale, noise_std),
    }
}

/// Draws one synthetic matrix. `input_scale` is used by the RFF model only.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn prdim_generate(
    model: PrdimModel,
    latent_dim: usize,
    input_scale: f64,
    noise_std: f64,
    rows: usize,
    cols: usize,
    seed: u64,
    out: *mut *mut PrdimMatrix,
) -> PrdimStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let m = generate(&spec(model, latent_dim, input_scale, noise_std), rows, cols, seed)?;
        unsafe { *out = Box::into_raw(Box::new(PrdimMatrix(m))) };
        Ok(())
    })
}

/// Draws two trials sharing one signal, with independent noise.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn prdim_generate_pair(
    model: PrdimModel,
    latent_dim: usize,
    input_scale: f64,
    noise_std: f64,
    rows: usize,
    cols: usize,
    seed: u64,
    out: *mut *mut PrdimPair,
) -> PrdimStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let p = generate_trial_pair(&spec(model, latent_dim, input_scale, noise_std), rows, cols, seed)?;
        unsafe { *out = Box::into_raw(Box::new(PrdimPair(p))) };
        Ok(())
    })
}

/// TwoNN intrinsic-dimension estimate of the rows of `m`.
///
/// # Safety
/// `m` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn prdim_twonn(m: *const PrdimMatrix, out: *mut f64) -> PrdimStatus {
    guard(|| {
        let m = unsafe { m.as_ref() }.ok_or_else(|| null("matrix"))?;
        if out.is_null() {
            return Err(null("out"));
        }
        let d = twonn(&m.0)?;
        unsafe { *out = d };
        Ok(())
    })
}

/// Copies the calling thread's last error message, NUL-terminated and
/// truncated to `len` bytes, into `buf`. Returns the full message length
/// excluding the terminator; an empty message means the last call succeeded.
///
/// # Safety
/// `buf` must be null or point to `len` writable bytes.
#[no_mangle]
pub unsafe extern "C" fn prdim_last_error_message(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| {
        let msg = e.borrow();
        if !buf.is_null() && len > 0 {
            let n = msg.len().min(len - 1);
            unsafe {
                ptr::copy_nonoverlapping(msg.as_ptr().cast::<c_char>(), buf, n);
                *buf.add(n) = 0;
            }
        }
        msg.len()
    })
}
