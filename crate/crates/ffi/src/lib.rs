//! C ABI over `distmorse`.
//!
//! Every function returns a [`DmStatus`]; on failure the message is available
//! from [`dm_last_error_message`] on the same thread. Handles are opaque and
//! must be released with their `_free` function. Strings returned to the
//! caller are released with [`dm_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, c_int, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use distmorse::error::Error;
use distmorse::poly::{degree_bound, Poly};
use distmorse::report::{analyze, AnalysisReport, AnalyzeRequest};
use distmorse::topology::{check_duality, IndexCensus};

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DmStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    InvalidInput = 3,
    DimensionMismatch = 4,
    /// A numerical routine failed (singular system, no convergence, oracle failure).
    Numerical = 5,
    OutOfRange = 6,
    BufferTooSmall = 7,
    Panic = 8,
}

/// Opaque polynomial handle.
pub struct DmPoly(Poly);

/// Opaque analysis report handle.
pub struct DmReport(AnalysisReport);

/// Summary of one critical point of a report.
#[repr(C)]
#[derive(Clone, Copy, Debug, Default)]
pub struct DmCriticalPoint {
    pub value: f64,
    pub k: usize,
    /// Quadratic index, or -1 when it could not be determined.
    pub iota: i64,
    pub nondegenerate: c_int,
    pub validated: c_int,
    /// Length of `x`.
    pub dim: usize,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> DmStatus {
    match e {
        Error::DimensionMismatch { .. } => DmStatus::DimensionMismatch,
        Error::IndexOutOfRange { .. } | Error::TooLarge(_) | Error::CloudTooLarge { .. } => {
            DmStatus::OutOfRange
        }
        Error::Singular { .. }
        | Error::NonSymmetric { .. }
        | Error::NoConvergence { .. }
        | Error::OracleFailure { .. }
        | Error::Focal(_) => DmStatus::Numerical,
        _ => DmStatus::InvalidInput,
    }
}

fn fail(e: Error) -> DmStatus {
    let s = status_of(&e);
    set_error(e.to_string());
    s
}

fn guard(f: impl FnOnce() -> Result<(), DmStatus>) -> DmStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => DmStatus::Ok,
        Ok(Err(s)) => s,
        Err(p) => {
            let msg = p
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| p.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_error(format!("internal panic: {msg}"));
            DmStatus::Panic
        }
    }
}

fn null() -> DmStatus {
    set_error("null pointer argument".into());
    DmStatus::NullPointer
}

unsafe fn str_arg<'a>(s: *const c_char) -> Result<&'a str, DmStatus> {
    if s.is_null() {
        return Err(null());
    }
    CStr::from_ptr(s).to_str().map_err(|_| {
        set_error("argument is not valid UTF-8".into());
        DmStatus::InvalidUtf8
    })
}

unsafe fn slice_arg<'a>(p: *const f64, len: usize) -> Result<&'a [f64], DmStatus> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(null());
    }
    Ok(std::slice::from_raw_parts(p, len))
}

unsafe fn out_arg<'a, T>(p: *mut T) -> Result<&'a mut T, DmStatus> {
    p.as_mut().ok_or_else(null)
}

fn to_c_string(s: String) -> Result<*mut c_char, DmStatus> {
    CString::new(s).map(CString::into_raw).map_err(|_| {
        set_error("string contains an interior NUL".into());
        DmStatus::InvalidInput
    })
}

/// Message of the last failure on this thread, or NULL. The pointer stays
/// valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn dm_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Releases a string returned by this library.
///
/// # Safety
/// `s` must be NULL or a pointer returned by this library and not yet freed.
#[no_mangle]
pub unsafe extern "C" fn dm_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Parses a polynomial from `{"nvars": n, "terms": [{"exp": [...], "coef": c}]}`.
///
/// # Safety
/// `json` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn dm_poly_from_json(json: *const c_char, out: *mut *mut DmPoly) -> DmStatus {
    guard(|| {
        let out = out_arg(out)?;
        *out = ptr::null_mut();
        let p = Poly::from_json(str_arg(json)?).map_err(fail)?;
        *out = Box::into_raw(Box::new(DmPoly(p)));
        Ok(())
    })
}

/// # Safety
/// `p` must be NULL or a handle from [`dm_poly_from_json`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn dm_poly_free(p: *mut DmPoly) {
    if !p.is_null() {
        drop(Box::from_raw(p));
    }
}

/// # Safety
/// `p` must be a live polynomial handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn dm_poly_nvars(p: *const DmPoly, out: *mut usize) -> DmStatus {
    guard(|| {
        let p = p.as_ref().ok_or_else(null)?;
        *out_arg(out)? = p.0.nvars();
        Ok(())
    })
}

/// # Safety
/// `x` must point to `len` doubles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn dm_poly_eval(
    p: *const DmPoly,
    x: *const f64,
    len: usize,
    out: *mut f64,
) -> DmStatus {
    guard(|| {
        let p = p.as_ref().ok_or_else(null)?;
        let x = slice_arg(x, len)?;
        *out_arg(out)? = p.0.eval(x).map_err(fail)?;
        Ok(())
    })
}

/// Writes the gradient into `out[0..len]`.
///
/// # Safety
/// `x` and `out` must each point to `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn dm_poly_grad(
    p: *const DmPoly,
    x: *const f64,
    len: usize,
    out: *mut f64,
) -> DmStatus {
    guard(|| {
        let p = p.as_ref().ok_or_else(null)?;
        let x = slice_arg(x, len)?;
        let g = p.0.grad(x).map_err(fail)?;
        if out.is_null() {
            return Err(null());
        }
        std::slice::from_raw_parts_mut(out, len).copy_from_slice(&g);
        Ok(())
    })
}

/// Smallest `d` with the multijet submersion property for `(n, k, r)`.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn dm_degree_bound(n: u64, k: u64, r: u64, out: *mut u64) -> DmStatus {
    guard(|| {
        let out = out_arg(out)?;
        *out = degree_bound(n, k, r).map_err(fail)?;
        Ok(())
    })
}

/// Runs an analysis from a request JSON (the `inputs` block of a report).
/// With `with_meta` nonzero the report includes timing information.
///
/// # Safety
/// `request_json` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn dm_analyze(
    request_json: *const c_char,
    with_meta: c_int,
    out: *mut *mut DmReport,
) -> DmStatus {
    guard(|| {
        let out = out_arg(out)?;
        *out = ptr::null_mut();
        let req = AnalyzeRequest::from_json(str_arg(request_json)?).map_err(fail)?;
        let report = analyze(&req, with_meta != 0).map_err(fail)?;
        *out = Box::into_raw(Box::new(DmReport(report)));
        Ok(())
    })
}

/// # Safety
/// `r` must be NULL or a handle from [`dm_analyze`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn dm_report_free(r: *mut DmReport) {
    if !r.is_null() {
        drop(Box::from_raw(r));
    }
}

/// The report as JSON; release with [`dm_string_free`].
///
/// # Safety
/// `r` must be a live report handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn dm_report_json(r: *const DmReport, out: *mut *mut c_char) -> DmStatus {
    guard(|| {
        let r = r.as_ref().ok_or_else(null)?;
        let out = out_arg(out)?;
        *out = to_c_string(r.0.to_json())?;
        Ok(())
    })
}

/// 0 for a clean run, 2 when a degeneracy was flagged, -1 for NULL.
///
/// # Safety
/// `r` must be NULL or a live report handle.
#[no_mangle]
pub unsafe extern "C" fn dm_report_exit_code(r: *const DmReport) -> c_int {
    r.as_ref().map_or(-1, |r| r.0.exit_code())
}

/// Number of validated critical points.
///
/// # Safety
/// `r` must be a live report handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn dm_report_len(r: *const DmReport, out: *mut usize) -> DmStatus {
    guard(|| {
        let r = r.as_ref().ok_or_else(null)?;
        *out_arg(out)? = r.0.critical_points.len();
        Ok(())
    })
}

fn point_at(r: &DmReport, i: usize) -> Result<&distmorse::hypersurface::CriticalPoint, DmStatus> {
    r.0.critical_points.get(i).ok_or_else(|| {
        set_error(format!(
            "critical point {i} out of range (report has {})",
            r.0.critical_points.len()
        ));
        DmStatus::OutOfRange
    })
}

/// # Safety
/// `r` must be a live report handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn dm_report_point(
    r: *const DmReport,
    i: usize,
    out: *mut DmCriticalPoint,
) -> DmStatus {
    guard(|| {
        let r = r.as_ref().ok_or_else(null)?;
        let c = point_at(r, i)?;
        *out_arg(out)? = DmCriticalPoint {
            value: c.value,
            k: c.k,
            iota: c.iota.map_or(-1, |v| v as i64),
            nondegenerate: c.nondegenerate.into(),
            validated: c.validated.into(),
            dim: c.x.len(),
        };
        Ok(())
    })
}

/// Copies the location of critical point `i` into `out[0..len]`; `len` must
/// be at least its dimension.
///
/// # Safety
/// `out` must point to `len` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn dm_report_point_x(
    r: *const DmReport,
    i: usize,
    out: *mut f64,
    len: usize,
) -> DmStatus {
    guard(|| {
        let r = r.as_ref().ok_or_else(null)?;
        let c = point_at(r, i)?;
        if len < c.x.len() {
            set_error(format!("buffer holds {len} values, need {}", c.x.len()));
            return Err(DmStatus::BufferTooSmall);
        }
        if out.is_null() {
            return Err(null());
        }
        std::slice::from_raw_parts_mut(out, c.x.len()).copy_from_slice(&c.x);
        Ok(())
    })
}

fn census_of(s: &str) -> Result<IndexCensus, DmStatus> {
    match AnalysisReport::from_json(s) {
        Ok(r) => Ok(r.census),
        Err(_) => IndexCensus::from_json(s).map_err(fail),
    }
}

/// Duality check between the (X, Y) and (Y, X) runs. Each argument is a
/// report or a census JSON. `holds` receives 1 when both sides agree.
///
/// # Safety
/// Both strings must be NUL-terminated; the outputs must be writable.
#[no_mangle]
pub unsafe extern "C" fn dm_check_duality_json(
    xy_json: *const c_char,
    yx_json: *const c_char,
    lhs: *mut i64,
    rhs: *mut i64,
    holds: *mut c_int,
) -> DmStatus {
    guard(|| {
        let xy = census_of(str_arg(xy_json)?)?;
        let yx = census_of(str_arg(yx_json)?)?;
        let v = check_duality(&xy, &yx).map_err(fail)?;
        *out_arg(lhs)? = v.lhs;
        *out_arg(rhs)? = v.rhs;
        *out_arg(holds)? = v.holds.into();
        Ok(())
    })
}
