//! C ABI for the tonereserve library.
//!
//! Every function returns a [`TrStatus`]; outputs go through caller-supplied
//! pointers and are written only on success. Handles are opaque, owned by the
//! caller, and released with the matching `*_free` function. The message for
//! the most recent failure on the calling thread is available from
//! [`tr_last_error_message`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, UnwindSafe};
use std::ptr;
use std::slice;

use num_complex::Complex64;
use tonereserve::extension::{solve_min_sup, ExtensionProblem, ExtensionResult, Method, SolverBudget};
use tonereserve::papr::compute_papr;
use tonereserve::systems::{CoefficientVector, IndexSet, StepScalar, SystemTag};
use tonereserve::walsh_tools::{cex_lower_bound_walsh, main_lemma_witness, WitnessReport};
use tonereserve::Error;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TrStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    NotPowerOfTwo = 3,
    IndexOutOfRange = 4,
    SizeOverflow = 5,
    EmptySet = 6,
    ZeroVector = 7,
    Degenerate = 8,
    Internal = 9,
    Panic = 10,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TrSystem {
    Walsh = 0,
    Fourier = 1,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TrMethod {
    Lp = 0,
    Pocs = 1,
    Brute = 2,
}

/// An extension problem: information set, compensation set and coefficients.
pub struct TrProblem(ExtensionProblem);

/// Solver output for a [`TrProblem`].
pub struct TrResult(ExtensionResult);

/// Split trace and witness for a Walsh index set.
pub struct TrTrace(WitnessReport);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

struct Failure(TrStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let status = match &e {
            Error::NotPowerOfTwo(_) => TrStatus::NotPowerOfTwo,
            Error::IndexOutOfRange { .. } => TrStatus::IndexOutOfRange,
            Error::SizeOverflow { .. } => TrStatus::SizeOverflow,
            Error::EmptySet => TrStatus::EmptySet,
            Error::ZeroVector => TrStatus::ZeroVector,
            Error::Degenerate(_) | Error::NoCorrelator => TrStatus::Degenerate,
            Error::Internal(_) => TrStatus::Internal,
            _ => TrStatus::InvalidArgument,
        };
        Failure(status, e.to_string())
    }
}

fn null(what: &str) -> Failure {
    Failure(TrStatus::NullPointer, format!("{what} is null"))
}

fn invalid(msg: impl Into<String>) -> Failure {
    Failure(TrStatus::InvalidArgument, msg.into())
}

fn set_error(msg: String) {
    let msg = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(msg));
}

fn guard(f: impl FnOnce() -> Result<(), Failure> + UnwindSafe) -> TrStatus {
    match catch_unwind(f) {
        Ok(Ok(())) => TrStatus::Ok,
        Ok(Err(Failure(status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("panic inside tonereserve".into());
            TrStatus::Panic
        }
    }
}

unsafe fn deref<'a, T>(p: *const T, what: &str) -> Result<&'a T, Failure> {
    p.as_ref().ok_or_else(|| null(what))
}

unsafe fn out<'a, T>(p: *mut T, what: &str) -> Result<&'a mut T, Failure> {
    p.as_mut().ok_or_else(|| null(what))
}

unsafe fn array<'a, T>(p: *const T, len: usize, what: &str) -> Result<&'a [T], Failure> {
    if len == 0 {
        Ok(&[])
    } else if p.is_null() {
        Err(null(what))
    } else {
        Ok(slice::from_raw_parts(p, len))
    }
}

fn system(s: TrSystem) -> SystemTag {
    match s {
        TrSystem::Walsh => SystemTag::Walsh,
        TrSystem::Fourier => SystemTag::Fourier,
    }
}

fn json_string(text: serde_json::Result<String>) -> Result<*mut c_char, Failure> {
    let text = text.map_err(|e| Failure(TrStatus::Internal, e.to_string()))?;
    Ok(CString::new(text).map_err(|e| Failure(TrStatus::Internal, e.to_string()))?.into_raw())
}

/// Message for the last failed call on this thread, or null if none.
/// The pointer stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn tr_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Releases a string returned by a `*_to_json` function.
///
/// # Safety
/// `s` must be null or a pointer obtained from this library and not yet freed.
#[no_mangle]
pub unsafe extern "C" fn tr_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Builds a problem from 1-based indices and coefficients. `re` and `im`
/// hold one value per information index; `im` may be null for real data.
///
/// # Safety
/// Array pointers must reference at least the stated number of elements;
/// `out_problem` must be writable.
#[no_mangle]
pub unsafe extern "C" fn tr_problem_new(
    system_tag: TrSystem,
    n: usize,
    info: *const usize,
    info_len: usize,
    comp: *const usize,
    comp_len: usize,
    re: *const f64,
    im: *const f64,
    out_problem: *mut *mut TrProblem,
) -> TrStatus {
    guard(|| {
        let slot = out(out_problem, "out_problem")?;
        let info = array(info, info_len, "info")?;
        let comp = array(comp, comp_len, "comp")?;
        let re = array(re, info_len, "re")?;
        let values: Vec<Complex64> = if im.is_null() {
            re.iter().map(|&r| Complex64::new(r, 0.0)).collect()
        } else {
            let im = array(im, info_len, "im")?;
            re.iter().zip(im).map(|(&r, &i)| Complex64::new(r, i)).collect()
        };
        let info_set = IndexSet::new(n, info.iter().copied())?;
        if info_set.len() != info_len {
            return Err(invalid("information indices must be distinct"));
        }
        let comp_set = IndexSet::new(n, comp.iter().copied())?;
        // coefficients follow the caller's index order; IndexSet sorts
        let mut order: Vec<usize> = (0..info_len).collect();
        order.sort_by_key(|&i| info[i]);
        let sorted: Vec<Complex64> = order.iter().map(|&i| values[i]).collect();
        let a = CoefficientVector::new(info_set.clone(), &sorted)?;
        let problem = ExtensionProblem::new(system(system_tag), n, info_set, comp_set, a)?;
        *slot = Box::into_raw(Box::new(TrProblem(problem)));
        Ok(())
    })
}

/// Parses a problem from its JSON form.
///
/// # Safety
/// `json` must be a NUL-terminated string; `out_problem` must be writable.
#[no_mangle]
pub unsafe extern "C" fn tr_problem_from_json(json: *const c_char, out_problem: *mut *mut TrProblem) -> TrStatus {
    guard(|| {
        let slot = out(out_problem, "out_problem")?;
        if json.is_null() {
            return Err(null("json"));
        }
        let text = CStr::from_ptr(json).to_str().map_err(|e| invalid(e.to_string()))?;
        let problem: ExtensionProblem = serde_json::from_str(text).map_err(|e| invalid(e.to_string()))?;
        *slot = Box::into_raw(Box::new(TrProblem(problem)));
        Ok(())
    })
}

/// Serializes a problem to JSON; release with [`tr_string_free`].
///
/// # Safety
/// `problem` must be a live handle; `out_json` must be writable.
#[no_mangle]
pub unsafe extern "C" fn tr_problem_to_json(problem: *const TrProblem, out_json: *mut *mut c_char) -> TrStatus {
    guard(|| {
        let slot = out(out_json, "out_json")?;
        *slot = json_string(serde_json::to_string(&deref(problem, "problem")?.0))?;
        Ok(())
    })
}

/// # Safety
/// `problem` must be null or a live handle from this library.
#[no_mangle]
pub unsafe extern "C" fn tr_problem_free(problem: *mut TrProblem) {
    if !problem.is_null() {
        drop(Box::from_raw(problem));
    }
}

/// Minimizes the peak over compensation coefficients.
/// Zero `max_iterations` or non-positive `tolerance` selects the defaults.
///
/// # Safety
/// `problem` must be a live handle; `out_result` must be writable.
#[no_mangle]
pub unsafe extern "C" fn tr_solve(
    problem: *const TrProblem,
    method: TrMethod,
    max_iterations: usize,
    tolerance: f64,
    out_result: *mut *mut TrResult,
) -> TrStatus {
    guard(|| {
        let slot = out(out_result, "out_result")?;
        let problem = deref(problem, "problem")?;
        let mut budget = SolverBudget::default();
        if max_iterations > 0 {
            budget.max_iterations = max_iterations;
        }
        if tolerance > 0.0 {
            budget.tolerance = tolerance;
        }
        let method = match method {
            TrMethod::Lp => Method::Lp,
            TrMethod::Pocs => Method::Pocs,
            TrMethod::Brute => Method::Brute,
        };
        let result = solve_min_sup(&problem.0, method, &budget)?;
        *slot = Box::into_raw(Box::new(TrResult(result)));
        Ok(())
    })
}

/// Peak of the compensated signal and whether the solver converged.
///
/// # Safety
/// `result` must be a live handle; the output pointers must be writable.
#[no_mangle]
pub unsafe extern "C" fn tr_result_summary(
    result: *const TrResult,
    out_sup: *mut f64,
    out_gap: *mut f64,
    out_converged: *mut bool,
) -> TrStatus {
    guard(|| {
        let r = &deref(result, "result")?.0;
        *out(out_sup, "out_sup")? = r.achieved_sup;
        *out(out_gap, "out_gap")? = r.optimality_gap;
        *out(out_converged, "out_converged")? = r.converged;
        Ok(())
    })
}

/// Copies the dense compensation vector (`b_k` at position `k − 1`) into
/// `re` and `im`, each of length `len`, which must equal N.
///
/// # Safety
/// `result` must be a live handle; `re` and `im` must hold `len` elements.
#[no_mangle]
pub unsafe extern "C" fn tr_result_compensation(
    result: *const TrResult,
    re: *mut f64,
    im: *mut f64,
    len: usize,
) -> TrStatus {
    guard(|| {
        let b = &deref(result, "result")?.0.b;
        let entries = b.entries();
        if len != entries.len() {
            return Err(invalid(format!("buffer length {len}, need {}", entries.len())));
        }
        if re.is_null() || im.is_null() {
            return Err(null("re/im"));
        }
        let (re, im) = (slice::from_raw_parts_mut(re, len), slice::from_raw_parts_mut(im, len));
        for (i, z) in entries.iter().enumerate() {
            re[i] = z.re;
            im[i] = z.im;
        }
        Ok(())
    })
}

/// # Safety
/// `result` must be a live handle; `out_json` must be writable.
#[no_mangle]
pub unsafe extern "C" fn tr_result_to_json(result: *const TrResult, out_json: *mut *mut c_char) -> TrStatus {
    guard(|| {
        let slot = out(out_json, "out_json")?;
        *slot = json_string(serde_json::to_string(&deref(result, "result")?.0))?;
        Ok(())
    })
}

/// # Safety
/// `result` must be null or a live handle from this library.
#[no_mangle]
pub unsafe extern "C" fn tr_result_free(result: *mut TrResult) {
    if !result.is_null() {
        drop(Box::from_raw(result));
    }
}

/// PAPR of the dense coefficient vector `(re[k] + i im[k])`, `k < n`.
/// `im` may be null for real data.
///
/// # Safety
/// `re` (and `im` if non-null) must hold `n` elements; `out_papr` must be writable.
#[no_mangle]
pub unsafe extern "C" fn tr_papr(
    system_tag: TrSystem,
    n: usize,
    re: *const f64,
    im: *const f64,
    out_papr: *mut f64,
) -> TrStatus {
    guard(|| {
        let slot = out(out_papr, "out_papr")?;
        let re = array(re, n, "re")?;
        let entries: Vec<Complex64> = if im.is_null() {
            re.iter().map(|&r| Complex64::new(r, 0.0)).collect()
        } else {
            let im = array(im, n, "im")?;
            re.iter().zip(im).map(|(&r, &i)| Complex64::new(r, i)).collect()
        };
        let a = CoefficientVector::from_dense(entries);
        *slot = compute_papr(system(system_tag), n, &a)?.papr;
        Ok(())
    })
}

/// Runs the Walsh splitting procedure on a 1-based index set.
///
/// # Safety
/// `indices` must hold `len` elements; `out_trace` must be writable.
#[no_mangle]
pub unsafe extern "C" fn tr_split_trace(
    n: usize,
    indices: *const usize,
    len: usize,
    out_trace: *mut *mut TrTrace,
) -> TrStatus {
    guard(|| {
        let slot = out(out_trace, "out_trace")?;
        let set = IndexSet::new(n, array(indices, len, "indices")?.iter().copied())?;
        *slot = Box::into_raw(Box::new(TrTrace(main_lemma_witness(&set, n)?)));
        Ok(())
    })
}

/// Number of completed stages `m` and whether both witness bounds hold.
///
/// # Safety
/// `trace` must be a live handle; the output pointers must be writable.
#[no_mangle]
pub unsafe extern "C" fn tr_trace_summary(
    trace: *const TrTrace,
    out_stages: *mut usize,
    out_bounds_hold: *mut bool,
) -> TrStatus {
    guard(|| {
        let w = &deref(trace, "trace")?.0;
        *out(out_stages, "out_stages")? = w.m;
        *out(out_bounds_hold, "out_bounds_hold")? = w.bounds_hold;
        Ok(())
    })
}

/// Stage-by-stage trace as JSON; release with [`tr_string_free`].
///
/// # Safety
/// `trace` must be a live handle; `out_json` must be writable.
#[no_mangle]
pub unsafe extern "C" fn tr_trace_to_json(trace: *const TrTrace, out_json: *mut *mut c_char) -> TrStatus {
    guard(|| {
        let slot = out(out_json, "out_json")?;
        *slot = json_string(Ok(deref(trace, "trace")?.0.trace.to_json()))?;
        Ok(())
    })
}

/// # Safety
/// `trace` must be null or a live handle from this library.
#[no_mangle]
pub unsafe extern "C" fn tr_trace_free(trace: *mut TrTrace) {
    if !trace.is_null() {
        drop(Box::from_raw(trace));
    }
}

/// Lower bound on the Walsh extension constant at density `delta`, with the
/// stage count `m` it is built from.
///
/// # Safety
/// Output pointers must be writable.
#[no_mangle]
pub unsafe extern "C" fn tr_cex_lower_bound_walsh(
    delta: f64,
    n: usize,
    out_bound: *mut f64,
    out_m: *mut usize,
) -> TrStatus {
    guard(|| {
        let b = cex_lower_bound_walsh(delta, n)?;
        *out(out_bound, "out_bound")? = b.bound.to_f64();
        *out(out_m, "out_m")? = b.m;
        Ok(())
    })
}
