//! C ABI over `nc_cover`.
//!
//! Objects cross the boundary as opaque handles owned by the caller and
//! released with the matching `*_free`. Every fallible call returns an
//! [`NcStatus`]; on failure a message is kept per thread and can be read
//! with [`nc_last_error_message`]. Strings returned through `char **` are
//! owned by the caller and released with [`nc_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use libc::size_t;
use nc_cover::kinv::SampledLoop;
use nc_cover::scenario::{self, ScenarioConfig};
use nc_cover::{embed_cover, winding_number, CoveringSpec, Error, MatrixRep, TorusElement};
use num_complex::Complex64;

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NcStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    ParamsMismatch = 3,
    Numerical = 4,
    Parse = 5,
    Usage = 6,
    Panic = 7,
}

/// An element of a noncommutative torus.
pub struct NcElement {
    inner: TorusElement,
}

/// A finite-dimensional unitary representation.
pub struct NcRep {
    inner: MatrixRep,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).expect("no interior nul");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> NcStatus {
    match e {
        Error::ParamsMismatch { .. } | Error::ThetaMismatch { .. } | Error::DimensionMismatch(..) => {
            NcStatus::ParamsMismatch
        }
        Error::InvalidArgument(_) | Error::NotUnitary { .. } => NcStatus::InvalidArgument,
        Error::Json(_) => NcStatus::Parse,
        Error::Usage(_) | Error::UnknownScenario(_) => NcStatus::Usage,
        _ => NcStatus::Numerical,
    }
}

fn guard<F: FnOnce() -> Result<(), NcStatus>>(f: F) -> NcStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => NcStatus::Ok,
        Ok(Err(s)) => s,
        Err(_) => {
            set_error("internal panic".into());
            NcStatus::Panic
        }
    }
}

fn fail(e: Error) -> NcStatus {
    let s = status_of(&e);
    set_error(e.to_string());
    s
}

fn null(what: &str) -> NcStatus {
    set_error(format!("null pointer: {what}"));
    NcStatus::NullPointer
}

unsafe fn str_arg<'a>(p: *const c_char, what: &str) -> Result<&'a str, NcStatus> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p).to_str().map_err(|_| {
        set_error(format!("{what} is not valid UTF-8"));
        NcStatus::InvalidArgument
    })
}

unsafe fn ref_arg<'a, T>(p: *const T, what: &str) -> Result<&'a T, NcStatus> {
    p.as_ref().ok_or_else(|| null(what))
}

unsafe fn put<T>(out: *mut T, value: T, what: &str) -> Result<(), NcStatus> {
    if out.is_null() {
        return Err(null(what));
    }
    out.write(value);
    Ok(())
}

unsafe fn put_string(out: *mut *mut c_char, s: String) -> Result<(), NcStatus> {
    let c = CString::new(s).map_err(|_| {
        set_error("string contains an interior nul".into());
        NcStatus::Numerical
    })?;
    put(out, c.into_raw(), "out")
}

unsafe fn put_element(out: *mut *mut NcElement, e: TorusElement) -> Result<(), NcStatus> {
    if out.is_null() {
        return Err(null("out"));
    }
    out.write(Box::into_raw(Box::new(NcElement { inner: e })));
    Ok(())
}

/// Message for the last failure on this thread, or null. Valid until the
/// next failing call on the same thread.
#[no_mangle]
pub extern "C" fn nc_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// # Safety
/// `s` must be null or a string returned by this library.
#[no_mangle]
pub unsafe extern "C" fn nc_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Parses an element from its JSON form
/// `{"theta": [p, q] | x, "terms": [[r, s, re, im], ...]}`.
///
/// # Safety
/// `json` must be a nul-terminated string and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn nc_element_from_json(json: *const c_char, out: *mut *mut NcElement) -> NcStatus {
    guard(|| {
        let s = str_arg(json, "json")?;
        let e = TorusElement::from_json(s).map_err(fail)?;
        put_element(out, e)
    })
}

/// # Safety
/// `e` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn nc_element_to_json(e: *const NcElement, out: *mut *mut c_char) -> NcStatus {
    guard(|| {
        let e = ref_arg(e, "element")?;
        put_string(out, e.inner.to_json())
    })
}

/// # Safety
/// `e` must be null or a handle from this library, not used afterwards.
#[no_mangle]
pub unsafe extern "C" fn nc_element_free(e: *mut NcElement) {
    if !e.is_null() {
        drop(Box::from_raw(e));
    }
}

/// # Safety
/// Handles must be live and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn nc_element_mul(
    a: *const NcElement,
    b: *const NcElement,
    out: *mut *mut NcElement,
) -> NcStatus {
    guard(|| {
        let (a, b) = (ref_arg(a, "a")?, ref_arg(b, "b")?);
        put_element(out, a.inner.mul(&b.inner).map_err(fail)?)
    })
}

/// # Safety
/// Handles must be live and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn nc_element_add(
    a: *const NcElement,
    b: *const NcElement,
    out: *mut *mut NcElement,
) -> NcStatus {
    guard(|| {
        let (a, b) = (ref_arg(a, "a")?, ref_arg(b, "b")?);
        put_element(out, a.inner.add(&b.inner).map_err(fail)?)
    })
}

/// # Safety
/// `a` must be live and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn nc_element_adjoint(a: *const NcElement, out: *mut *mut NcElement) -> NcStatus {
    guard(|| {
        let a = ref_arg(a, "a")?;
        put_element(out, a.inner.adjoint())
    })
}

/// The canonical trace `τ₀(a)`.
///
/// # Safety
/// `a` must be live and `re`, `im` writable.
#[no_mangle]
pub unsafe extern "C" fn nc_element_trace(a: *const NcElement, re: *mut f64, im: *mut f64) -> NcStatus {
    guard(|| {
        let a = ref_arg(a, "a")?;
        let t = a.inner.trace_tau0();
        put(re, t.re, "re")?;
        put(im, t.im, "im")
    })
}

/// Coefficient 2-norm.
///
/// # Safety
/// `a` must be live and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn nc_element_l2_norm(a: *const NcElement, out: *mut f64) -> NcStatus {
    guard(|| {
        let a = ref_arg(a, "a")?;
        put(out, a.inner.l2_norm(), "out")
    })
}

/// `u^r v^s ↦ u'^{mr} v'^{ns}` into the cover with twist `k`.
///
/// # Safety
/// `a` must be live and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn nc_element_embed(
    m: u32,
    n: u32,
    k: u64,
    a: *const NcElement,
    out: *mut *mut NcElement,
) -> NcStatus {
    guard(|| {
        let a = ref_arg(a, "a")?;
        let spec = CoveringSpec::new(m, n, k, a.inner.params()).map_err(fail)?;
        put_element(out, embed_cover(&spec, &a.inner).map_err(fail)?)
    })
}

/// Runs the Galois round trip and writes the JSON report. `theta` accepts
/// `[p,q]`, `p/q` or a decimal.
///
/// # Safety
/// `theta` must be a nul-terminated string; `out_json` and `pass` writable.
#[no_mangle]
#[allow(clippy::too_many_arguments)]
pub unsafe extern "C" fn nc_verify_galois(
    m: u32,
    n: u32,
    k: u64,
    theta: *const c_char,
    truncation: i64,
    trials: size_t,
    seed: u64,
    out_json: *mut *mut c_char,
    pass: *mut bool,
) -> NcStatus {
    guard(|| {
        let theta = scenario::parse_theta(str_arg(theta, "theta")?).map_err(fail)?;
        let spec = CoveringSpec::new(m, n, k, theta).map_err(fail)?;
        let report = nc_cover::verify_galois(&spec, truncation, trials, seed, false).map_err(fail)?;
        put(pass, report.pass, "pass")?;
        put_string(out_json, report.to_json_value().to_string())
    })
}

/// Runs a named scenario with `argc` command-line style options and writes
/// its JSON report without the duration field.
///
/// # Safety
/// `name` and each of the `argc` entries of `argv` must be nul-terminated
/// strings; `out_json` and `pass` writable.
#[no_mangle]
pub unsafe extern "C" fn nc_scenario_run(
    name: *const c_char,
    argv: *const *const c_char,
    argc: size_t,
    out_json: *mut *mut c_char,
    pass: *mut bool,
) -> NcStatus {
    guard(|| {
        let name = str_arg(name, "name")?;
        let mut args = Vec::with_capacity(argc);
        if argc > 0 {
            if argv.is_null() {
                return Err(null("argv"));
            }
            for i in 0..argc {
                args.push(str_arg(*argv.add(i), "argv entry")?);
            }
        }
        let cfg = ScenarioConfig::parse_args(name, &args).map_err(fail)?;
        let report = scenario::run(&cfg).map_err(fail)?;
        put(pass, report.pass, "pass")?;
        put_string(out_json, report.to_json(false).map_err(fail)?)
    })
}

/// Winding number of a closed loop of `len` unit complex samples given as
/// interleaved `(re, im)` pairs.
///
/// # Safety
/// `samples` must point to `2·len` doubles; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn nc_winding_number(samples: *const f64, len: size_t, out: *mut i64) -> NcStatus {
    guard(|| {
        if samples.is_null() {
            return Err(null("samples"));
        }
        let raw = std::slice::from_raw_parts(samples, 2 * len);
        let pts = raw.chunks_exact(2).map(|p| Complex64::new(p[0], p[1])).collect();
        let lp = SampledLoop::new(pts).map_err(fail)?;
        put(out, winding_number(&lp).map_err(fail)?, "out")
    })
}

/// The `q`-dimensional clock/shift representation of `A_{p/q}`.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn nc_clock_shift_rep(p: i64, q: u64, out: *mut *mut NcRep) -> NcStatus {
    guard(|| {
        let rep = nc_cover::clock_shift_rep(p, q).map_err(fail)?;
        put(out, Box::into_raw(Box::new(NcRep { inner: rep })), "out")
    })
}

/// # Safety
/// `r` must be live and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn nc_rep_dim(r: *const NcRep, out: *mut size_t) -> NcStatus {
    guard(|| {
        let r = ref_arg(r, "rep")?;
        put(out, r.inner.dim(), "out")
    })
}

/// `‖ρ(u)ρ(v) − e^{2πiθ} ρ(v)ρ(u)‖`.
///
/// # Safety
/// `r` must be live and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn nc_rep_relation_residual(r: *const NcRep, out: *mut f64) -> NcStatus {
    guard(|| {
        let r = ref_arg(r, "rep")?;
        put(out, r.inner.relation_residual(), "out")
    })
}

/// `ρ(a)` as JSON `[[[re, im], ...], ...]` (row-major).
///
/// # Safety
/// Handles must be live and `out_json` writable.
#[no_mangle]
pub unsafe extern "C" fn nc_rep_evaluate(r: *const NcRep, a: *const NcElement, out_json: *mut *mut c_char) -> NcStatus {
    guard(|| {
        let (r, a) = (ref_arg(r, "rep")?, ref_arg(a, "element")?);
        let m = nc_cover::evaluate(&r.inner, &a.inner).map_err(fail)?;
        put_string(out_json, nc_cover::linalg::matrix_to_json(&m).to_string())
    })
}

/// # Safety
/// `r` must be null or a handle from this library, not used afterwards.
#[no_mangle]
pub unsafe extern "C" fn nc_rep_free(r: *mut NcRep) {
    if !r.is_null() {
        drop(Box::from_raw(r));
    }
}
