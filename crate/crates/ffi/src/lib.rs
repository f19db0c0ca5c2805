// SPDX-License-Identifier: Apache-2.0

//! C interface to ifog-core.
//!
//! Objects cross the boundary as opaque pointers with a matching `_free`.
//! Calls return an [`IfogStatus`]; on failure the message is kept per
//! thread and read back with [`ifog_last_error`]. Strings handed out by the
//! library are released with [`ifog_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use ifog_core::formula::{parse, Formula};
use ifog_core::kripke::{KripkeModel, ModelFile, StateId, Valuation};
use ifog_core::service::{self, DecisionRequest, MoveRequest, ServiceError, SessionManager};
use ifog_core::smp::Caps;

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum IfogStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    ParseError = 3,
    InvalidModel = 4,
    BadRequest = 5,
    BudgetExhausted = 6,
    UnknownSession = 7,
    IllegalMove = 8,
    Panic = 99,
}

/// Search budgets, passed by value.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct IfogCaps {
    pub max_model: usize,
    pub max_depth: usize,
    pub max_nodes: u64,
}

impl From<IfogCaps> for Caps {
    fn from(c: IfogCaps) -> Self {
        Caps {
            max_model: c.max_model,
            max_depth: c.max_depth,
            max_nodes: c.max_nodes,
        }
    }
}

/// A parsed formula.
pub struct IfogFormula(Formula);

/// A validated Kripke model.
pub struct IfogModel(KripkeModel);

/// A set of game sessions.
pub struct IfogSessions(SessionManager);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let text = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(text).ok());
}

fn fail(status: IfogStatus, msg: impl Into<String>) -> IfogStatus {
    set_error(msg);
    status
}

fn service_status(e: &ServiceError) -> IfogStatus {
    match e {
        ServiceError::Parse(_) => IfogStatus::ParseError,
        ServiceError::Undecided => IfogStatus::BudgetExhausted,
        ServiceError::UnknownSession(_) => IfogStatus::UnknownSession,
        ServiceError::IllegalMove { .. }
        | ServiceError::StaleSession { .. }
        | ServiceError::GameOver => IfogStatus::IllegalMove,
        ServiceError::BadRequest(_) => IfogStatus::BadRequest,
        ServiceError::Internal(_) => IfogStatus::Panic,
    }
}

/// Runs `f`, turning panics into [`IfogStatus::Panic`].
fn guard(f: impl FnOnce() -> Result<(), IfogStatus>) -> IfogStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            LAST_ERROR.with(|e| *e.borrow_mut() = None);
            IfogStatus::Ok
        }
        Ok(Err(s)) => s,
        Err(_) => fail(IfogStatus::Panic, "panic inside ifog"),
    }
}

unsafe fn text<'a>(p: *const c_char) -> Result<&'a str, IfogStatus> {
    if p.is_null() {
        return Err(fail(IfogStatus::NullPointer, "null string"));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| fail(IfogStatus::InvalidUtf8, "string is not UTF-8"))
}

unsafe fn put_string(out: *mut *mut c_char, s: String) -> Result<(), IfogStatus> {
    if out.is_null() {
        return Err(fail(IfogStatus::NullPointer, "null output pointer"));
    }
    let c = CString::new(s).map_err(|_| fail(IfogStatus::Panic, "interior NUL"))?;
    *out = c.into_raw();
    Ok(())
}

unsafe fn put<T>(out: *mut *mut T, v: T) -> Result<(), IfogStatus> {
    if out.is_null() {
        return Err(fail(IfogStatus::NullPointer, "null output pointer"));
    }
    *out = Box::into_raw(Box::new(v));
    Ok(())
}

unsafe fn borrow<'a, T>(p: *const T) -> Result<&'a T, IfogStatus> {
    p.as_ref()
        .ok_or_else(|| fail(IfogStatus::NullPointer, "null handle"))
}

fn json<T: serde::Serialize>(v: &T) -> Result<String, IfogStatus> {
    serde_json::to_string(v).map_err(|e| fail(IfogStatus::Panic, e.to_string()))
}

/// Message for the last failed call on this thread, or NULL. The pointer
/// stays valid until the next ifog call on the same thread.
#[no_mangle]
pub extern "C" fn ifog_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Releases a string returned by the library. NULL is ignored.
///
/// # Safety
/// `s` must come from this library and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn ifog_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

#[no_mangle]
pub extern "C" fn ifog_caps_default() -> IfogCaps {
    let c = Caps::default();
    IfogCaps {
        max_model: c.max_model,
        max_depth: c.max_depth,
        max_nodes: c.max_nodes,
    }
}

/// # Safety
/// `src` is a NUL-terminated string; `out` is writable.
#[no_mangle]
pub unsafe extern "C" fn ifog_formula_parse(
    src: *const c_char,
    out: *mut *mut IfogFormula,
) -> IfogStatus {
    guard(|| {
        let f = parse(text(src)?).map_err(|e| fail(IfogStatus::ParseError, e.to_string()))?;
        put(out, IfogFormula(f))
    })
}

/// Canonical text of the formula.
///
/// # Safety
/// `f` is a live handle; `out` is writable.
#[no_mangle]
pub unsafe extern "C" fn ifog_formula_to_string(
    f: *const IfogFormula,
    out: *mut *mut c_char,
) -> IfogStatus {
    guard(|| put_string(out, borrow(f)?.0.to_string()))
}

/// 1 if closed, 0 if open or `f` is NULL.
///
/// # Safety
/// `f` is NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn ifog_formula_is_closed(f: *const IfogFormula) -> i32 {
    f.as_ref().map_or(0, |f| f.0.is_closed() as i32)
}

/// # Safety
/// `f` is NULL or a live handle, freed at most once.
#[no_mangle]
pub unsafe extern "C" fn ifog_formula_free(f: *mut IfogFormula) {
    if !f.is_null() {
        drop(Box::from_raw(f));
    }
}

/// Loads and validates a model from its JSON file form.
///
/// # Safety
/// `src` is a NUL-terminated string; `out` is writable.
#[no_mangle]
pub unsafe extern "C" fn ifog_model_from_json(
    src: *const c_char,
    out: *mut *mut IfogModel,
) -> IfogStatus {
    guard(|| {
        let mf: ModelFile = serde_json::from_str(text(src)?)
            .map_err(|e| fail(IfogStatus::ParseError, e.to_string()))?;
        let m = mf
            .into_model()
            .map_err(|e| fail(IfogStatus::InvalidModel, e.to_string()))?;
        put(out, IfogModel(m))
    })
}

/// `|C| + |⋃A|`, or 0 for NULL.
///
/// # Safety
/// `m` is NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn ifog_model_size(m: *const IfogModel) -> usize {
    m.as_ref().map_or(0, |m| m.0.size())
}

/// Whether state `state` forces the closed formula `f`.
///
/// # Safety
/// `m` and `f` are live handles; `out` is writable.
#[no_mangle]
pub unsafe extern "C" fn ifog_model_forces(
    m: *const IfogModel,
    state: usize,
    f: *const IfogFormula,
    out: *mut bool,
) -> IfogStatus {
    guard(|| {
        let (m, f) = (borrow(m)?, borrow(f)?);
        if out.is_null() {
            return Err(fail(IfogStatus::NullPointer, "null output pointer"));
        }
        if !f.0.is_closed() {
            return Err(fail(IfogStatus::BadRequest, "formula has free variables"));
        }
        let v =
            m.0.satisfies(StateId(state), &Valuation::new(), &f.0)
                .map_err(|e| fail(IfogStatus::BadRequest, e.to_string()))?;
        *out = v;
        Ok(())
    })
}

/// # Safety
/// `m` is NULL or a live handle, freed at most once.
#[no_mangle]
pub unsafe extern "C" fn ifog_model_free(m: *mut IfogModel) {
    if !m.is_null() {
        drop(Box::from_raw(m));
    }
}

/// Satisfiability over all models; writes the JSON response with witness.
/// Returns `BudgetExhausted` (with the response still written) when the
/// caps run out.
///
/// # Safety
/// `f` is a live handle; `out` is writable.
#[no_mangle]
pub unsafe extern "C" fn ifog_decide(
    f: *const IfogFormula,
    caps: IfogCaps,
    out: *mut *mut c_char,
) -> IfogStatus {
    guard(|| {
        let req = DecisionRequest {
            formula: borrow(f)?.0.to_string(),
            axioms: Vec::new(),
            caps: Some(caps.into()),
        };
        let r = service::decide(&req, true).map_err(|e| fail(service_status(&e), e.to_string()))?;
        put_string(out, json(&r)?)?;
        if r.is_decided() {
            Ok(())
        } else {
            Err(fail(IfogStatus::BudgetExhausted, "caps exhausted"))
        }
    })
}

/// Provability; JSON as for `POST /prove`. `BudgetExhausted` when unknown.
///
/// # Safety
/// `f` is a live handle; `out` is writable.
#[no_mangle]
pub unsafe extern "C" fn ifog_prove(
    f: *const IfogFormula,
    caps: IfogCaps,
    out: *mut *mut c_char,
) -> IfogStatus {
    guard(|| {
        let req = DecisionRequest {
            formula: borrow(f)?.0.to_string(),
            axioms: Vec::new(),
            caps: Some(caps.into()),
        };
        let r = service::prove(&req).map_err(|e| fail(service_status(&e), e.to_string()))?;
        put_string(out, json(&r)?)?;
        if r.is_decided() {
            Ok(())
        } else {
            Err(fail(IfogStatus::BudgetExhausted, "caps exhausted"))
        }
    })
}

#[no_mangle]
pub extern "C" fn ifog_sessions_new() -> *mut IfogSessions {
    Box::into_raw(Box::new(IfogSessions(SessionManager::new())))
}

/// Opens a game; writes the session view JSON.
///
/// # Safety
/// `s` is a live handle; `formula` is a NUL-terminated string; `out` is
/// writable.
#[no_mangle]
pub unsafe extern "C" fn ifog_session_create(
    s: *const IfogSessions,
    formula: *const c_char,
    caps: IfogCaps,
    out: *mut *mut c_char,
) -> IfogStatus {
    guard(|| {
        let v = borrow(s)?
            .0
            .create(text(formula)?, &caps.into())
            .map_err(|e| fail(service_status(&e), e.to_string()))?;
        put_string(out, json(&v)?)
    })
}

/// Plays a move given as `MoveRequest` JSON; writes the new view.
///
/// # Safety
/// `s` is a live handle; `id` and `request` are NUL-terminated strings;
/// `out` is writable.
#[no_mangle]
pub unsafe extern "C" fn ifog_session_move(
    s: *const IfogSessions,
    id: *const c_char,
    request: *const c_char,
    out: *mut *mut c_char,
) -> IfogStatus {
    guard(|| {
        let req: MoveRequest = serde_json::from_str(text(request)?)
            .map_err(|e| fail(IfogStatus::BadRequest, e.to_string()))?;
        let v = borrow(s)?
            .0
            .play(text(id)?, &req)
            .map_err(|e| fail(service_status(&e), e.to_string()))?;
        put_string(out, json(&v)?)
    })
}

/// Current session view JSON.
///
/// # Safety
/// `s` is a live handle; `id` is a NUL-terminated string; `out` is writable.
#[no_mangle]
pub unsafe extern "C" fn ifog_session_view(
    s: *const IfogSessions,
    id: *const c_char,
    out: *mut *mut c_char,
) -> IfogStatus {
    guard(|| {
        let v = borrow(s)?
            .0
            .view(text(id)?)
            .map_err(|e| fail(service_status(&e), e.to_string()))?;
        put_string(out, json(&v)?)
    })
}

/// # Safety
/// `s` is NULL or a live handle, freed at most once.
#[no_mangle]
pub unsafe extern "C" fn ifog_sessions_free(s: *mut IfogSessions) {
    if !s.is_null() {
        drop(Box::from_raw(s));
    }
}
