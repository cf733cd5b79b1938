//! C interface to the hodecomp toolchain.
//!
//! Objects cross the boundary as opaque handles created by `hd_*_parse`,
//! `hd_decompose` and `hd_*_run`, and released by the matching `hd_*_free`.
//! Every fallible call returns an [`HdStatus`]; on failure the message of
//! the most recent error on the calling thread is available from
//! [`hd_last_error`]. Strings returned to the caller are owned by the caller
//! and must be released with [`hd_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use hodecomp::ast::{Name, Process};
use hodecomp::decompose::{degree, Decomposition};
use hodecomp::np::encode_namepass;
use hodecomp::optimize::{decompose_with, Optimization};
use hodecomp::parse::{parse_file, Mode};
use hodecomp::semantics::{run, Terminal, Trace};
use hodecomp::typeck::{check_minimal_typed, check_with_frees};
use hodecomp::types::CType;
use thiserror::Error;

/// Result of a call.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum HdStatus {
    Ok = 0,
    /// A required pointer argument was null.
    NullArgument = 1,
    /// A string argument was not valid UTF-8.
    InvalidUtf8 = 2,
    /// The source text did not parse.
    Parse = 3,
    /// A name-passing source could not be encoded.
    Encode = 4,
    /// The process could not be decomposed.
    Decompose = 5,
    /// An enumeration argument was out of range.
    InvalidArgument = 6,
    /// The library panicked; the handle arguments should not be used again.
    Internal = 7,
}

/// Dialect of a source text.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum HdSyntax {
    /// Higher-order processes.
    Ho = 0,
    /// First-order name passing, encoded into higher-order processes.
    NamePassing = 1,
}

/// Form of the decomposition.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum HdOptimization {
    None = 0,
    Duos = 1,
    Monadic = 2,
}

/// How a run ended.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum HdTerminal {
    Inert = 0,
    FuelExhausted = 1,
    Stuck = 2,
}

/// A parsed process with the types of its free names.
pub struct HdProcess {
    process: Process,
    frees: Vec<(Name, CType)>,
}

/// A decomposed process.
pub struct HdDecomposition {
    inner: Decomposition,
}

/// The record of a deterministic run.
pub struct HdTrace {
    inner: Trace,
}

#[derive(Debug, Error)]
enum FfiError {
    #[error("argument `{0}` is null")]
    Null(&'static str),
    #[error("argument `{0}` is not valid UTF-8")]
    Utf8(&'static str),
    #[error("{0}")]
    Parse(#[from] hodecomp::parse::ParseError),
    #[error("{0}")]
    Encode(#[from] hodecomp::np::NpError),
    #[error("{0}")]
    Decompose(#[from] hodecomp::optimize::OptError),
    #[error("argument `{0}` is out of range")]
    Range(&'static str),
    #[error("internal error: {0}")]
    Panic(String),
}

impl FfiError {
    fn status(&self) -> HdStatus {
        match self {
            FfiError::Null(_) => HdStatus::NullArgument,
            FfiError::Utf8(_) => HdStatus::InvalidUtf8,
            FfiError::Parse(_) => HdStatus::Parse,
            FfiError::Encode(_) => HdStatus::Encode,
            FfiError::Decompose(_) => HdStatus::Decompose,
            FfiError::Range(_) => HdStatus::InvalidArgument,
            FfiError::Panic(_) => HdStatus::Internal,
        }
    }
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).expect("interior nul bytes were replaced");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

/// Runs `f`, converting errors and panics into a status.
fn guard(f: impl FnOnce() -> Result<(), FfiError>) -> HdStatus {
    let r = match catch_unwind(AssertUnwindSafe(f)) {
        Ok(r) => r,
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            Err(FfiError::Panic(msg))
        }
    };
    match r {
        Ok(()) => HdStatus::Ok,
        Err(e) => {
            set_last_error(&e.to_string());
            e.status()
        }
    }
}

/// # Safety
/// `p` must be null or a valid nul-terminated string.
unsafe fn str_arg<'a>(p: *const c_char, name: &'static str) -> Result<&'a str, FfiError> {
    if p.is_null() {
        return Err(FfiError::Null(name));
    }
    CStr::from_ptr(p).to_str().map_err(|_| FfiError::Utf8(name))
}

/// # Safety
/// `p` must be null or point to a live `T`.
unsafe fn ref_arg<'a, T>(p: *const T, name: &'static str) -> Result<&'a T, FfiError> {
    p.as_ref().ok_or(FfiError::Null(name))
}

/// # Safety
/// `out` must be null or valid for writing one `T`.
unsafe fn write_out<T>(out: *mut T, name: &'static str, v: T) -> Result<(), FfiError> {
    if out.is_null() {
        return Err(FfiError::Null(name));
    }
    out.write(v);
    Ok(())
}

fn owned_string(s: &str) -> *mut c_char {
    CString::new(s.replace('\0', " ")).expect("interior nul bytes were replaced").into_raw()
}

/// Message of the last failed call on this thread, or null if none failed.
/// The pointer stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn hd_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(std::ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static nul-terminated string.
#[no_mangle]
pub extern "C" fn hd_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Releases a string returned by this library.
///
/// # Safety
/// `s` must be null or a pointer returned by this library and not yet freed.
#[no_mangle]
pub unsafe extern "C" fn hd_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Parses a source file (declarations followed by a process) and stores a
/// new handle in `*out`. `syntax` is one of the [`HdSyntax`] values.
///
/// # Safety
/// `src` must be a valid nul-terminated string and `out` valid for writing.
#[no_mangle]
pub unsafe extern "C" fn hd_process_parse(src: *const c_char, syntax: u32, out: *mut *mut HdProcess) -> HdStatus {
    guard(|| {
        let text = str_arg(src, "src")?;
        let syntax = match syntax {
            s if s == HdSyntax::Ho as u32 => HdSyntax::Ho,
            s if s == HdSyntax::NamePassing as u32 => HdSyntax::NamePassing,
            _ => return Err(FfiError::Range("syntax")),
        };
        if out.is_null() {
            return Err(FfiError::Null("out"));
        }
        let p = match syntax {
            HdSyntax::Ho => {
                let f = parse_file(text, Mode::User)?;
                HdProcess { process: f.process, frees: f.frees }
            }
            HdSyntax::NamePassing => {
                let f = parse_file(text, Mode::NamePassing)?;
                HdProcess { process: encode_namepass(&f.process, &f.frees)?, frees: f.frees }
            }
        };
        write_out(out, "out", Box::into_raw(Box::new(p)))
    })
}

/// Releases a process handle.
///
/// # Safety
/// `p` must be null or a handle from [`hd_process_parse`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn hd_process_free(p: *mut HdProcess) {
    if !p.is_null() {
        drop(Box::from_raw(p));
    }
}

/// Typechecks the process; `*well_typed` receives the verdict and, when it
/// is false, [`hd_last_error`] the diagnostics.
///
/// # Safety
/// `p` must be a live handle and `well_typed` valid for writing.
#[no_mangle]
pub unsafe extern "C" fn hd_process_typecheck(p: *const HdProcess, well_typed: *mut bool) -> HdStatus {
    guard(|| {
        let p = ref_arg(p, "p")?;
        let r = check_with_frees(&p.frees, &p.process);
        if !r.ok {
            set_last_error(&r.message());
        }
        write_out(well_typed, "well_typed", r.ok)
    })
}

/// Number of propagators the decomposition of the process uses.
///
/// # Safety
/// `p` must be a live handle and `out` valid for writing.
#[no_mangle]
pub unsafe extern "C" fn hd_process_degree(p: *const HdProcess, out: *mut u32) -> HdStatus {
    guard(|| write_out(out, "out", degree(&ref_arg(p, "p")?.process)))
}

/// Renders the process in the surface syntax; null if `p` is null.
///
/// # Safety
/// `p` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn hd_process_to_string(p: *const HdProcess) -> *mut c_char {
    p.as_ref().map_or(std::ptr::null_mut(), |p| owned_string(&p.process.to_string()))
}

/// Decomposes the process in the form given by `opt`, one of the
/// [`HdOptimization`] values, and stores a new handle in `*out`.
///
/// # Safety
/// `p` must be a live handle and `out` valid for writing.
#[no_mangle]
pub unsafe extern "C" fn hd_decompose(p: *const HdProcess, opt: u32, out: *mut *mut HdDecomposition) -> HdStatus {
    guard(|| {
        let p = ref_arg(p, "p")?;
        if out.is_null() {
            return Err(FfiError::Null("out"));
        }
        let opt = match opt {
            o if o == HdOptimization::None as u32 => Optimization::None,
            o if o == HdOptimization::Duos as u32 => Optimization::Duos,
            o if o == HdOptimization::Monadic as u32 => Optimization::Monadic,
            _ => return Err(FfiError::Range("opt")),
        };
        let d = decompose_with(opt, &p.process, &p.frees)?;
        write_out(out, "out", Box::into_raw(Box::new(HdDecomposition { inner: d })))
    })
}

/// Releases a decomposition handle.
///
/// # Safety
/// `d` must be null or a handle from [`hd_decompose`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn hd_decomposition_free(d: *mut HdDecomposition) {
    if !d.is_null() {
        drop(Box::from_raw(d));
    }
}

/// Degree of the decomposed source process.
///
/// # Safety
/// `d` must be a live handle and `out` valid for writing.
#[no_mangle]
pub unsafe extern "C" fn hd_decomposition_degree(d: *const HdDecomposition, out: *mut u32) -> HdStatus {
    guard(|| write_out(out, "out", ref_arg(d, "d")?.inner.degree))
}

/// Checks that the decomposition is typable with minimal session types;
/// when it is not, [`hd_last_error`] holds the diagnostics.
///
/// # Safety
/// `d` must be a live handle and `minimal` valid for writing.
#[no_mangle]
pub unsafe extern "C" fn hd_decomposition_is_minimally_typed(
    d: *const HdDecomposition,
    minimal: *mut bool,
) -> HdStatus {
    guard(|| {
        let d = &ref_arg(d, "d")?.inner;
        let r = check_minimal_typed(&d.frees, &d.term);
        if !r.ok {
            set_last_error(&r.message());
        }
        write_out(minimal, "minimal", r.ok)
    })
}

/// Renders the decomposed process; null if `d` is null.
///
/// # Safety
/// `d` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn hd_decomposition_to_string(d: *const HdDecomposition) -> *mut c_char {
    d.as_ref().map_or(std::ptr::null_mut(), |d| owned_string(&d.inner.term.to_string()))
}

fn trace_handle(t: Trace) -> *mut HdTrace {
    Box::into_raw(Box::new(HdTrace { inner: t }))
}

/// Runs the process under the deterministic policy for at most `fuel` steps.
///
/// # Safety
/// `p` must be a live handle and `out` valid for writing.
#[no_mangle]
pub unsafe extern "C" fn hd_process_run(p: *const HdProcess, fuel: usize, out: *mut *mut HdTrace) -> HdStatus {
    guard(|| {
        let p = ref_arg(p, "p")?;
        if out.is_null() {
            return Err(FfiError::Null("out"));
        }
        write_out(out, "out", trace_handle(run(&p.process, &p.frees, fuel)))
    })
}

/// Runs the decomposed process under the deterministic policy for at most `fuel` steps.
///
/// # Safety
/// `d` must be a live handle and `out` valid for writing.
#[no_mangle]
pub unsafe extern "C" fn hd_decomposition_run(
    d: *const HdDecomposition,
    fuel: usize,
    out: *mut *mut HdTrace,
) -> HdStatus {
    guard(|| {
        let d = &ref_arg(d, "d")?.inner;
        if out.is_null() {
            return Err(FfiError::Null("out"));
        }
        write_out(out, "out", trace_handle(run(&d.term, &d.frees, fuel)))
    })
}

/// Releases a trace handle.
///
/// # Safety
/// `t` must be null or a handle from a run function not yet freed.
#[no_mangle]
pub unsafe extern "C" fn hd_trace_free(t: *mut HdTrace) {
    if !t.is_null() {
        drop(Box::from_raw(t));
    }
}

/// Number of reduction steps taken.
///
/// # Safety
/// `t` must be a live handle and `out` valid for writing.
#[no_mangle]
pub unsafe extern "C" fn hd_trace_steps(t: *const HdTrace, out: *mut usize) -> HdStatus {
    guard(|| write_out(out, "out", ref_arg(t, "t")?.inner.steps.len()))
}

/// How the run ended.
///
/// # Safety
/// `t` must be a live handle and `out` valid for writing.
#[no_mangle]
pub unsafe extern "C" fn hd_trace_terminal(t: *const HdTrace, out: *mut HdTerminal) -> HdStatus {
    guard(|| {
        let term = match ref_arg(t, "t")?.inner.terminal {
            Terminal::Inert => HdTerminal::Inert,
            Terminal::FuelExhausted => HdTerminal::FuelExhausted,
            Terminal::Stuck => HdTerminal::Stuck,
        };
        write_out(out, "out", term)
    })
}

/// The trace as JSON lines, one record per step; null if `t` is null.
///
/// # Safety
/// `t` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn hd_trace_to_jsonl(t: *const HdTrace) -> *mut c_char {
    t.as_ref().map_or(std::ptr::null_mut(), |t| owned_string(&t.inner.to_jsonl()))
}

/// Rendering of the state after `step` steps; null if `t` is null or the
/// run is shorter.
///
/// # Safety
/// `t` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn hd_trace_state(t: *const HdTrace, step: usize) -> *mut c_char {
    t.as_ref()
        .and_then(|t| t.inner.states.get(step))
        .map_or(std::ptr::null_mut(), |c| owned_string(&c.to_process().to_string()))
}
