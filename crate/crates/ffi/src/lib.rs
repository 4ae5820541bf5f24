//! C interface to `rpbis`.
//!
//! Systems are opaque handles created by [`rpbis_system_parse`] and released
//! with [`rpbis_system_free`]. Every fallible call returns an
//! [`RpbisStatus`]; on failure, [`rpbis_last_error`] describes the problem
//! for the calling thread. Strings returned by the library are owned by the
//! caller and must be released with [`rpbis_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use rpbis::synth::{Side, Synthesizer};
use rpbis::{bisimilar, parse_formula, parse_system, render_formula, sat_state, Error, LogicId, Rplts, StateId};

/// Result codes of the C interface.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RpbisStatus {
    Ok = 0,
    NullArgument = 1,
    InvalidUtf8 = 2,
    ParseError = 3,
    InvalidSystem = 4,
    UnknownState = 5,
    InternalError = 6,
}

/// Modal logic fragments accepted by [`rpbis_distinguish`].
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RpbisLogic {
    NegAnd = 0,
    NegOr = 1,
    And = 2,
    Or = 3,
}

impl From<RpbisLogic> for LogicId {
    fn from(l: RpbisLogic) -> Self {
        match l {
            RpbisLogic::NegAnd => LogicId::PmlNegAnd,
            RpbisLogic::NegOr => LogicId::PmlNegOr,
            RpbisLogic::And => LogicId::PmlAnd,
            RpbisLogic::Or => LogicId::PmlOr,
        }
    }
}

/// Opaque parsed system.
pub struct RpbisSystem {
    sys: Rplts,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: &str) {
    let text = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = text);
}

struct Failure(RpbisStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let status = match e {
            Error::Syntax { .. } | Error::NumberTooLarge { .. } => RpbisStatus::ParseError,
            Error::UnknownState(_) => RpbisStatus::UnknownState,
            _ => RpbisStatus::InvalidSystem,
        };
        Failure(status, e.to_string())
    }
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> RpbisStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_error("");
            RpbisStatus::Ok
        }
        Ok(Err(Failure(status, msg))) => {
            set_error(&msg);
            status
        }
        Err(_) => {
            set_error("internal error");
            RpbisStatus::InternalError
        }
    }
}

unsafe fn text<'a>(p: *const c_char, what: &str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(Failure(RpbisStatus::NullArgument, format!("{what} is null")));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| Failure(RpbisStatus::InvalidUtf8, format!("{what} is not valid UTF-8")))
}

unsafe fn system<'a>(p: *const RpbisSystem) -> Result<&'a Rplts, Failure> {
    p.as_ref()
        .map(|s| &s.sys)
        .ok_or_else(|| Failure(RpbisStatus::NullArgument, "system is null".into()))
}

fn out_ptr<T>(p: *mut T, what: &str) -> Result<(), Failure> {
    if p.is_null() {
        Err(Failure(RpbisStatus::NullArgument, format!("{what} is null")))
    } else {
        Ok(())
    }
}

unsafe fn state(sys: &Rplts, name: *const c_char, what: &str) -> Result<StateId, Failure> {
    Ok(sys.state(text(name, what)?)?)
}

/// Parses a system from its text form. On success `*out` holds a new handle.
///
/// # Safety
/// `source` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn rpbis_system_parse(source: *const c_char, out: *mut *mut RpbisSystem) -> RpbisStatus {
    guard(|| {
        out_ptr(out, "out")?;
        *out = ptr::null_mut();
        let sys = parse_system(text(source, "source")?)?;
        *out = Box::into_raw(Box::new(RpbisSystem { sys }));
        Ok(())
    })
}

/// Releases a system handle. Null is ignored.
///
/// # Safety
/// `sys` must come from [`rpbis_system_parse`] and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn rpbis_system_free(sys: *mut RpbisSystem) {
    if !sys.is_null() {
        drop(Box::from_raw(sys));
    }
}

/// Number of states, or 0 for a null handle.
///
/// # Safety
/// `sys` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn rpbis_system_num_states(sys: *const RpbisSystem) -> usize {
    sys.as_ref().map_or(0, |s| s.sys.num_states())
}

/// Decides whether two named states are bisimilar.
///
/// # Safety
/// Pointers must be valid; names NUL-terminated.
#[no_mangle]
pub unsafe extern "C" fn rpbis_bisimilar(
    sys: *const RpbisSystem,
    s1: *const c_char,
    s2: *const c_char,
    out: *mut bool,
) -> RpbisStatus {
    guard(|| {
        out_ptr(out, "out")?;
        let sys = system(sys)?;
        let (a, b) = (state(sys, s1, "s1")?, state(sys, s2, "s2")?);
        *out = bisimilar(sys, a, b)?;
        Ok(())
    })
}

/// Synthesizes a formula of `logic` that holds in exactly one of the states.
/// For bisimilar states `*formula` is set to null. Otherwise it receives the
/// formula text and `*holds_in` is 1 or 2 for the satisfying state.
///
/// # Safety
/// Pointers must be valid; names NUL-terminated.
#[no_mangle]
pub unsafe extern "C" fn rpbis_distinguish(
    sys: *const RpbisSystem,
    s1: *const c_char,
    s2: *const c_char,
    logic: RpbisLogic,
    formula: *mut *mut c_char,
    holds_in: *mut i32,
) -> RpbisStatus {
    guard(|| {
        out_ptr(formula, "formula")?;
        out_ptr(holds_in, "holds_in")?;
        *formula = ptr::null_mut();
        *holds_in = 0;
        let sys = system(sys)?;
        let (a, b) = (state(sys, s1, "s1")?, state(sys, s2, "s2")?);
        if let Some((d, _)) = Synthesizer::new().distinguish_states(sys, a, b, logic.into())? {
            let rendered = CString::new(render_formula(&d.formula)).expect("formulas contain no NUL");
            *formula = rendered.into_raw();
            *holds_in = if d.holds_in == Side::First { 1 } else { 2 };
        }
        Ok(())
    })
}

/// Checks whether a state satisfies a formula given in text form.
///
/// # Safety
/// Pointers must be valid; strings NUL-terminated.
#[no_mangle]
pub unsafe extern "C" fn rpbis_check(
    sys: *const RpbisSystem,
    state_name: *const c_char,
    formula: *const c_char,
    out: *mut bool,
) -> RpbisStatus {
    guard(|| {
        out_ptr(out, "out")?;
        let sys = system(sys)?;
        let s = state(sys, state_name, "state")?;
        let f = parse_formula(text(formula, "formula")?)?;
        *out = sat_state(sys, s, &f)?;
        Ok(())
    })
}

/// Releases a string returned by the library. Null is ignored.
///
/// # Safety
/// `s` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn rpbis_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Message for the last failed call on this thread, or an empty string. The
/// pointer stays valid until the next call into the library on this thread.
#[no_mangle]
pub extern "C" fn rpbis_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Library version as a static string.
#[no_mangle]
pub extern "C" fn rpbis_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}
