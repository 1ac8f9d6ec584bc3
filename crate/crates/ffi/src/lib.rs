//! C interface to urykit.
//!
//! Every entry point returns a [`UkStatus`]. On failure a message is kept
//! for [`uk_last_error`] until the next call on the same thread. Strings
//! handed out through `out` parameters belong to the caller and are
//! released with [`uk_string_free`]; spaces with [`uk_space_free`].
//! Rationals cross the boundary as strings such as `"3/2"`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use urykit::builder::GrowingSpace;
use urykit::io::{from_json, instance_from_labels, split_labels, to_json, IoError, MapFile, SpaceFile, TraceFile};
use urykit::rational::{format_rat, parse_rat, Rat};
use urykit::stabilizer::{random_instance, stabilize, StabilizerInstance, Strategy};
use urykit::suite::{run_suite, SuiteName};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UkStatus {
    Ok = 0,
    /// Malformed JSON or rational literal.
    Parse = 1,
    /// Well-formed input that breaks a precondition.
    Invalid = 2,
    /// A bug: an internal check failed or the library panicked.
    Internal = 3,
    NullArgument = 4,
    /// The call completed but its result misses the requested target, for
    /// example a descent that did not reach epsilon or a failing suite.
    Failed = 5,
}

/// A growing finite metric space.
pub struct UkSpace {
    inner: GrowingSpace,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

struct Fail(UkStatus, String);

impl From<IoError> for Fail {
    fn from(e: IoError) -> Self {
        let status = if e.exit_code() == 1 {
            UkStatus::Parse
        } else {
            UkStatus::Invalid
        };
        Fail(status, e.to_string())
    }
}

fn invalid(e: impl std::fmt::Display) -> Fail {
    Fail(UkStatus::Invalid, e.to_string())
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).expect("no interior nul");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn guard(f: impl FnOnce() -> Result<UkStatus, Fail>) -> UkStatus {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(status)) => status,
        Ok(Err(Fail(status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic".into());
            UkStatus::Internal
        }
    }
}

fn null(name: &str) -> Fail {
    Fail(UkStatus::NullArgument, format!("{name} is null"))
}

/// # Safety
/// `p` is null or a valid nul-terminated string.
unsafe fn text<'a>(p: *const c_char, name: &str) -> Result<&'a str, Fail> {
    if p.is_null() {
        return Err(null(name));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| Fail(UkStatus::Parse, format!("{name} is not UTF-8")))
}

/// # Safety
/// `out` is null or valid for a pointer write.
unsafe fn put_string(out: *mut *mut c_char, s: String) -> Result<(), Fail> {
    if out.is_null() {
        return Err(null("out"));
    }
    let c = CString::new(s).map_err(|_| Fail(UkStatus::Internal, "output contains a nul byte".into()))?;
    *out = c.into_raw();
    Ok(())
}

/// # Safety
/// `space` is null or a live handle.
unsafe fn space_ref<'a>(space: *const UkSpace) -> Result<&'a UkSpace, Fail> {
    space.as_ref().ok_or_else(|| null("space"))
}

fn epsilon(literal: &str) -> Result<Rat, Fail> {
    parse_rat(literal).map_err(|e| Fail(UkStatus::Parse, e.to_string()))
}

/// Message of the last failed call on this thread, or null. Valid until
/// the next call into the library on the same thread.
#[no_mangle]
pub extern "C" fn uk_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// # Safety
/// `s` is null or a string returned by this library, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn uk_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Parses a space from JSON `{"points": [...], "dist": [[...]]}`.
///
/// # Safety
/// `json` is a nul-terminated string; `out` is valid for a pointer write.
#[no_mangle]
pub unsafe extern "C" fn uk_space_from_json(json: *const c_char, out: *mut *mut UkSpace) -> UkStatus {
    guard(|| {
        let text = text(json, "json")?;
        if out.is_null() {
            return Err(null("out"));
        }
        let inner = from_json::<SpaceFile>(text)?.to_growing()?;
        *out = Box::into_raw(Box::new(UkSpace { inner }));
        Ok(UkStatus::Ok)
    })
}

/// # Safety
/// `space` is null or a handle from [`uk_space_from_json`], not yet freed.
#[no_mangle]
pub unsafe extern "C" fn uk_space_free(space: *mut UkSpace) {
    if !space.is_null() {
        drop(Box::from_raw(space));
    }
}

/// # Safety
/// `space` is a live handle; `out` is valid for a write.
#[no_mangle]
pub unsafe extern "C" fn uk_space_len(space: *const UkSpace, out: *mut usize) -> UkStatus {
    guard(|| {
        let s = space_ref(space)?;
        if out.is_null() {
            return Err(null("out"));
        }
        *out = s.inner.len();
        Ok(UkStatus::Ok)
    })
}

/// Distance between points `i` and `j` as a rational string.
///
/// # Safety
/// `space` is a live handle; `out` is valid for a pointer write.
#[no_mangle]
pub unsafe extern "C" fn uk_space_distance(
    space: *const UkSpace,
    i: usize,
    j: usize,
    out: *mut *mut c_char,
) -> UkStatus {
    guard(|| {
        let s = space_ref(space)?;
        let n = s.inner.len();
        if i >= n || j >= n {
            return Err(invalid(format!("point index out of range for {n} points")));
        }
        put_string(out, format_rat(s.inner.d(i, j)))?;
        Ok(UkStatus::Ok)
    })
}

/// The space with its provenance log as JSON.
///
/// # Safety
/// `space` is a live handle; `out` is valid for a pointer write.
#[no_mangle]
pub unsafe extern "C" fn uk_space_to_json(space: *const UkSpace, out: *mut *mut c_char) -> UkStatus {
    guard(|| {
        let s = space_ref(space)?;
        put_string(out, to_json(&SpaceFile::from_growing(&s.inner)))?;
        Ok(UkStatus::Ok)
    })
}

/// Realizes a Katětov map given as `{"domain": [...], "values": [...]}`,
/// writing the index of the realizing point, which may already exist.
///
/// # Safety
/// `space` is a live handle not used concurrently; `map_json` is a
/// nul-terminated string; `out_point` is valid for a write.
#[no_mangle]
pub unsafe extern "C" fn uk_space_realize(
    space: *mut UkSpace,
    map_json: *const c_char,
    out_point: *mut usize,
) -> UkStatus {
    guard(|| {
        let s = space.as_mut().ok_or_else(|| null("space"))?;
        let map = from_json::<MapFile>(text(map_json, "map_json")?)?.to_map(s.inner.space())?;
        if out_point.is_null() {
            return Err(null("out_point"));
        }
        *out_point = s.inner.realize_katetov(&map).map_err(invalid)?;
        Ok(UkStatus::Ok)
    })
}

fn run_stabilize(mut inst: StabilizerInstance, max_iter: usize) -> Result<(UkStatus, String), Fail> {
    if max_iter == 0 {
        return Err(invalid("max_iter must be positive"));
    }
    let out = stabilize(&mut inst, max_iter, Strategy::Steered).map_err(|e| {
        let status = if e.rejects_instance() {
            UkStatus::Invalid
        } else {
            UkStatus::Internal
        };
        Fail(status, e.to_string())
    })?;
    let trace = TraceFile::new(&inst, Strategy::Steered, &out);
    let status = if out.within_epsilon {
        UkStatus::Ok
    } else {
        UkStatus::Failed
    };
    Ok((status, to_json(&trace)))
}

/// Approximates `phi` on `A` by a word in the stabilizers of `A` and `B`.
/// `a` and `b` are comma-separated labels, `phi_json` is
/// `{"domain": [...], "range": [...]}`. The space behind the handle is not
/// modified; the trace JSON carries the grown space. Returns
/// `UK_STATUS_FAILED`, still writing the trace, when the word misses
/// `epsilon`.
///
/// # Safety
/// `space` is a live handle; string arguments are nul-terminated; `out` is
/// valid for a pointer write.
#[no_mangle]
pub unsafe extern "C" fn uk_stabilize(
    space: *const UkSpace,
    a: *const c_char,
    b: *const c_char,
    phi_json: *const c_char,
    eps: *const c_char,
    max_iter: usize,
    out: *mut *mut c_char,
) -> UkStatus {
    guard(|| {
        let s = space_ref(space)?;
        let a = split_labels(text(a, "a")?);
        let b = split_labels(text(b, "b")?);
        let phi = from_json(text(phi_json, "phi_json")?)?;
        let eps = epsilon(text(eps, "eps")?)?;
        let inst = instance_from_labels(s.inner.clone(), &a, &b, &phi, eps)?;
        let (status, trace) = run_stabilize(inst, max_iter)?;
        put_string(out, trace)?;
        Ok(status)
    })
}

/// Same as [`uk_stabilize`] on the random instance drawn from `seed`.
///
/// # Safety
/// `eps` is nul-terminated; `out` is valid for a pointer write.
#[no_mangle]
pub unsafe extern "C" fn uk_stabilize_random(
    seed: u64,
    eps: *const c_char,
    max_iter: usize,
    out: *mut *mut c_char,
) -> UkStatus {
    guard(|| {
        let inst = random_instance(seed, epsilon(text(eps, "eps")?)?).map_err(invalid)?;
        let (status, trace) = run_stabilize(inst, max_iter)?;
        put_string(out, trace)?;
        Ok(status)
    })
}

/// Runs a property suite (`katetov`, `lemma1`, `homotopy`, `stabilizer` or
/// `all`) and writes its JSON report. Returns `UK_STATUS_FAILED` when a
/// property fails.
///
/// # Safety
/// `name` is nul-terminated; `out` is valid for a pointer write.
#[no_mangle]
pub unsafe extern "C" fn uk_run_suite(
    name: *const c_char,
    seed: u64,
    budget: usize,
    out: *mut *mut c_char,
) -> UkStatus {
    guard(|| {
        let suite: SuiteName = text(name, "name")?.parse().map_err(invalid)?;
        let report = run_suite(suite, seed, budget);
        put_string(out, to_json(&report))?;
        Ok(if report.passed { UkStatus::Ok } else { UkStatus::Failed })
    })
}
