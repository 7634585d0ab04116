//! C ABI over `mdl-core`.
//!
//! Every function returns an [`MdlStatus`]. On failure the message is kept in
//! a thread-local slot readable through [`mdl_last_error`]. Strings handed
//! out by this library must be released with [`mdl_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use mdl_core::duality::DualityMatrix;
use mdl_core::generators::SparseGenerator;
use mdl_core::qnum::{parse_rational, to_f64};
use mdl_core::sim::{build_system, estimate_duality_gap_with, ModelParams};
use mdl_core::states::Model;
use mdl_core::verify::{check_markov_duality, run_suite, Suite, SuiteParams};
use mdl_core::Error;

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MdlStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    Parse = 3,
    InvalidParameter = 4,
    StateCapExceeded = 5,
    Unsupported = 6,
    Numeric = 7,
    Panic = 8,
}

/// Generator and duality matrix for one model instance.
pub struct MdlSystem {
    gen: SparseGenerator,
    duality: DualityMatrix,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct MdlEstimate {
    pub mean1: f64,
    pub se1: f64,
    pub mean2: f64,
    pub se2: f64,
    pub z: f64,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|slot| *slot.borrow_mut() = Some(c));
}

struct Failure(MdlStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let status = match &e {
            Error::InvalidParameter(_) | Error::DimensionMismatch { .. } => MdlStatus::InvalidParameter,
            Error::Parse(_) => MdlStatus::Parse,
            Error::StateCapExceeded { .. } => MdlStatus::StateCapExceeded,
            Error::Unsupported(_) => MdlStatus::Unsupported,
            Error::QEqualsOne | Error::TruncationBound { .. } | Error::NotAnEigenvector => MdlStatus::Numeric,
        };
        Failure(status, e.to_string())
    }
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> MdlStatus {
    LAST_ERROR.with(|slot| *slot.borrow_mut() = None);
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => MdlStatus::Ok,
        Ok(Err(Failure(status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("panic inside mdl".into());
            MdlStatus::Panic
        }
    }
}

unsafe fn read_str<'a>(p: *const c_char, name: &str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(Failure(MdlStatus::NullPointer, format!("{name} is null")));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| Failure(MdlStatus::InvalidUtf8, format!("{name} is not UTF-8")))
}

fn check_out<T>(p: *mut T, name: &str) -> Result<(), Failure> {
    if p.is_null() {
        Err(Failure(MdlStatus::NullPointer, format!("{name} is null")))
    } else {
        Ok(())
    }
}

fn into_c_string(s: String) -> *mut c_char {
    CString::new(s).map(CString::into_raw).unwrap_or(ptr::null_mut())
}

unsafe fn system_ref<'a>(sys: *const MdlSystem) -> Result<&'a MdlSystem, Failure> {
    sys.as_ref().ok_or_else(|| Failure(MdlStatus::NullPointer, "system is null".into()))
}

/// Message for the last failing call on this thread, or null. Owned by the
/// library; valid until the next call on the same thread.
#[no_mangle]
pub extern "C" fn mdl_last_error() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// # Safety
/// `s` must be null or a string returned by this library.
#[no_mangle]
pub unsafe extern "C" fn mdl_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Builds a generator and its duality function. `model` is `"msasep"`,
/// `"open"` or `"braided"`; `param` is `n`, `1` or `m` respectively. `q` and
/// `big_q` are rationals such as `"1/2"`; a null `big_q` means `Q = q`.
///
/// # Safety
/// String arguments must be null or NUL-terminated; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn mdl_system_new(
    model: *const c_char,
    l: usize,
    param: u32,
    q: *const c_char,
    big_q: *const c_char,
    out: *mut *mut MdlSystem,
) -> MdlStatus {
    guard(|| {
        check_out(out, "out")?;
        let model: Model = read_str(model, "model")?.parse()?;
        let q = parse_rational(read_str(q, "q")?)?;
        let big_q = if big_q.is_null() { q.clone() } else { parse_rational(read_str(big_q, "big_q")?)? };
        let (gen, duality) = build_system(&ModelParams { model, l, param, q, big_q })?;
        *out = Box::into_raw(Box::new(MdlSystem { gen, duality }));
        Ok(())
    })
}

/// # Safety
/// `sys` must be null or a handle from [`mdl_system_new`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn mdl_system_free(sys: *mut MdlSystem) {
    if !sys.is_null() {
        drop(Box::from_raw(sys));
    }
}

/// # Safety
/// `sys` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn mdl_system_state_count(sys: *const MdlSystem, out: *mut usize) -> MdlStatus {
    guard(|| {
        check_out(out, "out")?;
        *out = system_ref(sys)?.gen.len();
        Ok(())
    })
}

/// Exact `D(eta, xi)` as a rational string. Configurations are written like
/// `"-1 -1 1 1"` or `"2,1"`.
///
/// # Safety
/// `sys` must be a live handle, strings NUL-terminated, `out` writable. The
/// returned string must be released with [`mdl_string_free`].
#[no_mangle]
pub unsafe extern "C" fn mdl_system_duality(
    sys: *const MdlSystem,
    eta: *const c_char,
    xi: *const c_char,
    out: *mut *mut c_char,
) -> MdlStatus {
    guard(|| {
        check_out(out, "out")?;
        let sys = system_ref(sys)?;
        let space = sys.gen.space();
        let eta = space.parse(read_str(eta, "eta")?)?;
        let xi = space.parse(read_str(xi, "xi")?)?;
        *out = into_c_string(sys.duality.get(&eta, &xi)?.to_string());
        Ok(())
    })
}

/// Same as [`mdl_system_duality`] rounded to `f64`.
///
/// # Safety
/// As for [`mdl_system_duality`].
#[no_mangle]
pub unsafe extern "C" fn mdl_system_duality_f64(
    sys: *const MdlSystem,
    eta: *const c_char,
    xi: *const c_char,
    out: *mut f64,
) -> MdlStatus {
    guard(|| {
        check_out(out, "out")?;
        let sys = system_ref(sys)?;
        let space = sys.gen.space();
        let eta = space.parse(read_str(eta, "eta")?)?;
        let xi = space.parse(read_str(xi, "xi")?)?;
        *out = to_f64(&sys.duality.get(&eta, &xi)?);
        Ok(())
    })
}

/// Exact check of `L D = D L^T`. `residual` may be null; otherwise it receives
/// the largest absolute entry of the residual as a string.
///
/// # Safety
/// `sys` must be a live handle, `pass` writable, `residual` null or writable.
#[no_mangle]
pub unsafe extern "C" fn mdl_system_check_duality(
    sys: *const MdlSystem,
    pass: *mut bool,
    residual: *mut *mut c_char,
) -> MdlStatus {
    guard(|| {
        check_out(pass, "pass")?;
        let sys = system_ref(sys)?;
        let report = check_markov_duality(&sys.gen, &sys.duality)?;
        *pass = report.pass;
        if !residual.is_null() {
            *residual = into_c_string(report.max_residual);
        }
        Ok(())
    })
}

/// Monte-Carlo estimates of both sides of the duality identity at time `t`.
///
/// # Safety
/// `sys` must be a live handle, strings NUL-terminated, `out` writable.
#[no_mangle]
pub unsafe extern "C" fn mdl_system_simulate(
    sys: *const MdlSystem,
    x: *const c_char,
    y: *const c_char,
    t: f64,
    n_traj: usize,
    seed: u64,
    out: *mut MdlEstimate,
) -> MdlStatus {
    guard(|| {
        check_out(out, "out")?;
        let sys = system_ref(sys)?;
        let space = sys.gen.space();
        let x = space.parse(read_str(x, "x")?)?;
        let y = space.parse(read_str(y, "y")?)?;
        let (a, b) = estimate_duality_gap_with(&sys.gen, &sys.duality, &x, &y, t, n_traj, seed)?;
        *out = MdlEstimate {
            mean1: a.mean,
            se1: a.se,
            mean2: b.mean,
            se2: b.se,
            z: mdl_core::sim::z_score(&a, &b),
        };
        Ok(())
    })
}

/// Runs a verification suite with default parameters and returns the
/// reports as a JSON array. `all_pass` may be null.
///
/// # Safety
/// `suite` must be NUL-terminated, `out` writable, `all_pass` null or
/// writable. The returned string must be released with [`mdl_string_free`].
#[no_mangle]
pub unsafe extern "C" fn mdl_verify_suite_json(
    suite: *const c_char,
    all_pass: *mut bool,
    out: *mut *mut c_char,
) -> MdlStatus {
    guard(|| {
        check_out(out, "out")?;
        let suite: Suite = read_str(suite, "suite")?.parse()?;
        let reports = run_suite(suite, &SuiteParams::default())?;
        if !all_pass.is_null() {
            *all_pass = reports.iter().all(|r| r.pass);
        }
        let json = serde_json::Value::Array(reports.iter().map(|r| r.to_json()).collect());
        *out = into_c_string(json.to_string());
        Ok(())
    })
}
