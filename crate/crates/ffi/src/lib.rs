//! C ABI over `tentlab`.
//!
//! Objects are opaque handles created by `*_new`/producer calls and released
//! with the matching `*_free`. Every fallible call returns a [`TlStatus`];
//! on failure [`tl_last_error_message`] describes the cause on the calling
//! thread. Strings returned to the caller must be released with
//! [`tl_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use tentlab::binary::round_off;
use tentlab::harness::build_histogram;
use tentlab::{
    Backend, Error, ExactRational, OrbitOutcome, PrecisionSpec, TentMap, TentParams, Value,
};

/// Result of every fallible call.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TlStatus {
    Ok = 0,
    NullPointer = 1,
    /// Malformed number, bad backend id, bad parameters or precision.
    InvalidArgument = 2,
    /// A value outside `[0, N]`.
    Domain = 3,
    /// A value does not fit the fixed-point format.
    Overflow = 4,
    /// The operation needs other parameters, e.g. slope 2.
    Unsupported = 5,
    /// Index past the end of a sequence, or no cycle was found.
    OutOfRange = 6,
    Io = 7,
    Panic = 8,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let msg = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(msg).ok());
}

fn status_of(e: &Error) -> TlStatus {
    match e {
        Error::Domain { .. } | Error::Negative(_) | Error::NegativeResult { .. } => {
            TlStatus::Domain
        }
        Error::Overflow { .. } | Error::NotRepresentable(..) => TlStatus::Overflow,
        Error::UnsupportedSlope(..) | Error::BackendMismatch(_) | Error::PrecisionMismatch(..) => {
            TlStatus::Unsupported
        }
        Error::NotACycle(_) => TlStatus::OutOfRange,
        Error::Io(_) => TlStatus::Io,
        _ => TlStatus::InvalidArgument,
    }
}

fn fail(status: TlStatus, msg: impl Into<String>) -> TlStatus {
    set_error(msg);
    status
}

/// Runs `f`, turning errors and panics into status codes.
fn guard<F>(f: F) -> TlStatus
where
    F: FnOnce() -> Result<(), TlStatus>,
{
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            LAST_ERROR.with(|e| *e.borrow_mut() = None);
            TlStatus::Ok
        }
        Ok(Err(status)) => status,
        Err(_) => fail(TlStatus::Panic, "internal panic"),
    }
}

fn lib(e: Error) -> TlStatus {
    fail(status_of(&e), e.to_string())
}

unsafe fn text<'a>(p: *const c_char, what: &str) -> Result<&'a str, TlStatus> {
    if p.is_null() {
        return Err(fail(TlStatus::NullPointer, format!("{what} is null")));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| fail(TlStatus::InvalidArgument, format!("{what} is not UTF-8")))
}

unsafe fn number(p: *const c_char, what: &str) -> Result<ExactRational, TlStatus> {
    text(p, what)?.parse().map_err(lib)
}

fn check_out<T>(out: *mut T) -> Result<(), TlStatus> {
    if out.is_null() {
        Err(fail(TlStatus::NullPointer, "output pointer is null"))
    } else {
        Ok(())
    }
}

fn into_c_string(s: String) -> *mut c_char {
    CString::new(s.replace('\0', " "))
        .expect("nul bytes replaced")
        .into_raw()
}

/// A tent map bound to one arithmetic backend.
pub struct TlTentMap {
    map: TentMap,
}

/// A computed trajectory.
pub struct TlTrajectory {
    values: Vec<Value>,
}

/// The result of a cycle search.
pub struct TlOrbit {
    outcome: OrbitOutcome,
}

/// Plain-data view of a [`TlOrbit`].
#[repr(C)]
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct TlOrbitSummary {
    /// False when the step budget ran out without a revisit.
    pub found: bool,
    pub transient: u64,
    pub period: u64,
    /// -1 when no state was an integer.
    pub first_integer_step: i64,
    pub even_cycle: bool,
    /// States computed, including the initial one.
    pub states: u64,
}

/// Library version as a static string.
#[no_mangle]
pub extern "C" fn tl_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Message for the last failed call on this thread, or null. The pointer is
/// valid until the next call into the library on the same thread.
#[no_mangle]
pub extern "C" fn tl_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Releases a string returned by this library. Null is ignored.
///
/// # Safety
/// `s` must come from this library and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn tl_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Creates a map with slope `slope` on `[0, bound]`. Numbers are decimal
/// strings or `p/q`; `backend` is `rational`, `fixed:p,q`, `fixed:q`, `f64`
/// or `f32`.
///
/// # Safety
/// String arguments must be null or NUL-terminated; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn tl_tent_map_new(
    slope: *const c_char,
    bound: *const c_char,
    backend: *const c_char,
    out: *mut *mut TlTentMap,
) -> TlStatus {
    guard(|| {
        check_out(out)?;
        let params =
            TentParams::new(number(slope, "slope")?, number(bound, "bound")?).map_err(lib)?;
        let backend =
            Backend::parse_for_bound(text(backend, "backend")?, params.bound()).map_err(lib)?;
        let map = TentMap::new(params, backend).map_err(lib)?;
        *out = Box::into_raw(Box::new(TlTentMap { map }));
        Ok(())
    })
}

/// # Safety
/// `map` must be null or come from [`tl_tent_map_new`] and not be freed.
#[no_mangle]
pub unsafe extern "C" fn tl_tent_map_free(map: *mut TlTentMap) {
    if !map.is_null() {
        drop(Box::from_raw(map));
    }
}

/// Backend id of `map`, such as `fixed:8,20`. Free with [`tl_string_free`].
///
/// # Safety
/// `map` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn tl_tent_map_backend(map: *const TlTentMap) -> *mut c_char {
    match map.as_ref() {
        Some(m) => into_c_string(m.map.backend().to_string()),
        None => ptr::null_mut(),
    }
}

unsafe fn map_ref<'a>(map: *const TlTentMap) -> Result<&'a TentMap, TlStatus> {
    map.as_ref()
        .map(|m| &m.map)
        .ok_or_else(|| fail(TlStatus::NullPointer, "map is null"))
}

/// Computes `steps + 1` states from `x0`.
///
/// # Safety
/// `map` must be a live handle, `x0` NUL-terminated, `out` writable.
#[no_mangle]
pub unsafe extern "C" fn tl_iterate(
    map: *const TlTentMap,
    x0: *const c_char,
    steps: usize,
    out: *mut *mut TlTrajectory,
) -> TlStatus {
    guard(|| {
        check_out(out)?;
        let map = map_ref(map)?;
        let values = map.iterate(&number(x0, "x0")?, steps).map_err(lib)?;
        *out = Box::into_raw(Box::new(TlTrajectory { values }));
        Ok(())
    })
}

/// # Safety
/// `t` must be null or a live trajectory handle.
#[no_mangle]
pub unsafe extern "C" fn tl_trajectory_free(t: *mut TlTrajectory) {
    if !t.is_null() {
        drop(Box::from_raw(t));
    }
}

/// Number of states; 0 for a null handle.
///
/// # Safety
/// `t` must be null or a live trajectory handle.
#[no_mangle]
pub unsafe extern "C" fn tl_trajectory_len(t: *const TlTrajectory) -> usize {
    t.as_ref().map_or(0, |t| t.values.len())
}

fn state(values: &[Value], i: usize) -> Result<&Value, TlStatus> {
    values.get(i).ok_or_else(|| {
        fail(
            TlStatus::OutOfRange,
            format!("index {i} out of range for {} states", values.len()),
        )
    })
}

/// State `i` rounded to binary64.
///
/// # Safety
/// `t` must be a live trajectory handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn tl_trajectory_get_f64(
    t: *const TlTrajectory,
    i: usize,
    out: *mut f64,
) -> TlStatus {
    guard(|| {
        check_out(out)?;
        let t = t
            .as_ref()
            .ok_or_else(|| fail(TlStatus::NullPointer, "trajectory is null"))?;
        *out = state(&t.values, i)?.to_f64();
        Ok(())
    })
}

/// Exact decimal expansion of state `i`. Free with [`tl_string_free`].
///
/// # Safety
/// `t` must be a live trajectory handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn tl_trajectory_get_decimal(
    t: *const TlTrajectory,
    i: usize,
    out: *mut *mut c_char,
) -> TlStatus {
    guard(|| {
        check_out(out)?;
        let t = t
            .as_ref()
            .ok_or_else(|| fail(TlStatus::NullPointer, "trajectory is null"))?;
        *out = into_c_string(state(&t.values, i)?.to_decimal_string());
        Ok(())
    })
}

/// Iterates from `x0` until a state repeats or `max_steps` steps are taken.
/// Running out of budget is not an error; check `found` in the summary.
///
/// # Safety
/// `map` must be a live handle, `x0` NUL-terminated, `out` writable.
#[no_mangle]
pub unsafe extern "C" fn tl_detect_cycle(
    map: *const TlTentMap,
    x0: *const c_char,
    max_steps: usize,
    out: *mut *mut TlOrbit,
) -> TlStatus {
    guard(|| {
        check_out(out)?;
        let map = map_ref(map)?;
        let outcome = map
            .detect_cycle(&number(x0, "x0")?, max_steps)
            .map_err(lib)?;
        *out = Box::into_raw(Box::new(TlOrbit { outcome }));
        Ok(())
    })
}

/// # Safety
/// `orbit` must be null or a live orbit handle.
#[no_mangle]
pub unsafe extern "C" fn tl_orbit_free(orbit: *mut TlOrbit) {
    if !orbit.is_null() {
        drop(Box::from_raw(orbit));
    }
}

/// # Safety
/// `orbit` must be a live orbit handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn tl_orbit_summary(
    orbit: *const TlOrbit,
    out: *mut TlOrbitSummary,
) -> TlStatus {
    guard(|| {
        check_out(out)?;
        let orbit = orbit
            .as_ref()
            .ok_or_else(|| fail(TlStatus::NullPointer, "orbit is null"))?;
        let first = |s: Option<usize>| s.map_or(-1, |s| s as i64);
        *out = match &orbit.outcome {
            OrbitOutcome::Cycle(r) => TlOrbitSummary {
                found: true,
                transient: r.transient as u64,
                period: r.period as u64,
                first_integer_step: first(r.first_integer_step),
                even_cycle: r.even_cycle,
                states: r.trajectory.len() as u64,
            },
            OrbitOutcome::NoRevisit(b) => TlOrbitSummary {
                found: false,
                first_integer_step: first(b.first_integer_step),
                states: b.trajectory.len() as u64,
                ..TlOrbitSummary::default()
            },
        };
        Ok(())
    })
}

/// Cycle state `i`, `0 <= i < period`, rounded to binary64.
///
/// # Safety
/// `orbit` must be a live orbit handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn tl_orbit_cycle_get_f64(
    orbit: *const TlOrbit,
    i: usize,
    out: *mut f64,
) -> TlStatus {
    guard(|| {
        check_out(out)?;
        let orbit = orbit
            .as_ref()
            .ok_or_else(|| fail(TlStatus::NullPointer, "orbit is null"))?;
        let report = orbit
            .outcome
            .cycle()
            .ok_or_else(|| fail(TlStatus::OutOfRange, "no cycle was found"))?;
        *out = state(&report.cycle, i)?.to_f64();
        Ok(())
    })
}

/// JSON description of the orbit. Free with [`tl_string_free`].
///
/// # Safety
/// `orbit` must be a live orbit handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn tl_orbit_to_json(
    orbit: *const TlOrbit,
    out: *mut *mut c_char,
) -> TlStatus {
    guard(|| {
        check_out(out)?;
        let orbit = orbit
            .as_ref()
            .ok_or_else(|| fail(TlStatus::NullPointer, "orbit is null"))?;
        let json = serde_json::to_string(&orbit.outcome)
            .map_err(|e| fail(TlStatus::InvalidArgument, e.to_string()))?;
        *out = into_c_string(json);
        Ok(())
    })
}

/// Truncates `x` onto the grid with `p` integer and `q` fractional bits and
/// writes its bit string, e.g. `0.0110`. Free with [`tl_string_free`].
///
/// # Safety
/// `x` must be NUL-terminated and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn tl_round_off(
    x: *const c_char,
    p: u32,
    q: u32,
    out: *mut *mut c_char,
) -> TlStatus {
    guard(|| {
        check_out(out)?;
        let spec = PrecisionSpec::new(p, q).map_err(lib)?;
        let fixed = round_off(&number(x, "x")?, spec).map_err(lib)?;
        *out = into_c_string(fixed.to_bit_string());
        Ok(())
    })
}

/// Bins `len` samples into `bins` equal-width bins on `[0, bound]` and
/// reports the distance from uniform. `counts` may be null; otherwise it
/// must hold `bins` entries.
///
/// # Safety
/// `values` must point to `len` doubles, `counts` to `bins` slots if not null.
#[no_mangle]
pub unsafe extern "C" fn tl_histogram(
    values: *const f64,
    len: usize,
    bound: f64,
    bins: usize,
    counts: *mut u64,
    sup_norm: *mut f64,
    chi_square: *mut f64,
) -> TlStatus {
    guard(|| {
        check_out(sup_norm)?;
        check_out(chi_square)?;
        if values.is_null() && len > 0 {
            return Err(fail(TlStatus::NullPointer, "values is null"));
        }
        let slice = if len == 0 {
            &[][..]
        } else {
            std::slice::from_raw_parts(values, len)
        };
        let h = build_histogram(slice, bound, bins).map_err(lib)?;
        if !counts.is_null() {
            std::slice::from_raw_parts_mut(counts, bins).copy_from_slice(&h.counts);
        }
        *sup_norm = h.sup_norm;
        *chi_square = h.chi_square;
        Ok(())
    })
}
