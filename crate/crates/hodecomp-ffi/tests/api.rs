//! Tests of the C interface, called from Rust.

use std::ffi::{CStr, CString};
use std::ptr;

use hodecomp_ffi::*;

fn last_error() -> String {
    let p = hd_last_error();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

/// Takes ownership of a string returned by the library.
fn take(s: *mut std::ffi::c_char) -> String {
    assert!(!s.is_null());
    let out = unsafe { CStr::from_ptr(s) }.to_string_lossy().into_owned();
    unsafe { hd_string_free(s) };
    out
}

fn parse(src: &str, syntax: HdSyntax) -> Result<*mut HdProcess, HdStatus> {
    let c = CString::new(src).unwrap();
    let mut p = ptr::null_mut();
    match unsafe { hd_process_parse(c.as_ptr(), syntax as u32, &mut p) } {
        HdStatus::Ok => Ok(p),
        s => Err(s),
    }
}

const EXCHANGE: &str = "new s : !<Int>;?<Bool>;end in (s!(1).s?(b).0 | ~s?(x).~s!(true).0)";

#[test]
fn parse_typecheck_decompose_and_run() {
    let p = parse(EXCHANGE, HdSyntax::Ho).unwrap();
    let mut ok = false;
    assert_eq!(unsafe { hd_process_typecheck(p, &mut ok) }, HdStatus::Ok);
    assert!(ok);
    let mut deg = 0;
    assert_eq!(unsafe { hd_process_degree(p, &mut deg) }, HdStatus::Ok);
    // Two threads of degree 3 each, plus one for the parallel composition.
    assert_eq!(deg, 7);
    assert!(take(unsafe { hd_process_to_string(p) }).contains("~s?(x)"));

    let mut d = ptr::null_mut();
    assert_eq!(unsafe { hd_decompose(p, HdOptimization::None as u32, &mut d) }, HdStatus::Ok);
    let mut minimal = false;
    assert_eq!(unsafe { hd_decomposition_is_minimally_typed(d, &mut minimal) }, HdStatus::Ok);
    assert!(minimal);
    let mut ddeg = 0;
    assert_eq!(unsafe { hd_decomposition_degree(d, &mut ddeg) }, HdStatus::Ok);
    assert_eq!(ddeg, deg);
    assert!(take(unsafe { hd_decomposition_to_string(d) }).contains("s_1"));

    for (trace_of, want_steps) in [(0, Some(2)), (1, None)] {
        let mut t = ptr::null_mut();
        let st = if trace_of == 0 {
            unsafe { hd_process_run(p, 100, &mut t) }
        } else {
            unsafe { hd_decomposition_run(d, 100, &mut t) }
        };
        assert_eq!(st, HdStatus::Ok);
        let (mut steps, mut term) = (0usize, HdTerminal::Stuck);
        assert_eq!(unsafe { hd_trace_steps(t, &mut steps) }, HdStatus::Ok);
        assert_eq!(unsafe { hd_trace_terminal(t, &mut term) }, HdStatus::Ok);
        assert_eq!(term, HdTerminal::Inert);
        if let Some(n) = want_steps {
            assert_eq!(steps, n);
        }
        assert_eq!(take(unsafe { hd_trace_to_jsonl(t) }).lines().count(), steps);
        assert_eq!(take(unsafe { hd_trace_state(t, steps) }), "0");
        assert!(unsafe { hd_trace_state(t, steps + 1) }.is_null());
        unsafe { hd_trace_free(t) };
    }
    unsafe {
        hd_decomposition_free(d);
        hd_process_free(p);
    }
}

#[test]
fn optimized_forms_are_minimally_typed() {
    let p = parse(EXCHANGE, HdSyntax::Ho).unwrap();
    for opt in [HdOptimization::Duos, HdOptimization::Monadic] {
        let mut d = ptr::null_mut();
        assert_eq!(unsafe { hd_decompose(p, opt as u32, &mut d) }, HdStatus::Ok, "{opt:?}");
        let mut minimal = false;
        assert_eq!(unsafe { hd_decomposition_is_minimally_typed(d, &mut minimal) }, HdStatus::Ok);
        assert!(minimal, "{opt:?}");
        unsafe { hd_decomposition_free(d) };
    }
    unsafe { hd_process_free(p) };
}

#[test]
fn name_passing_sources_are_encoded() {
    let p = parse("free n : !<!<Int>;end>;end; free m : !<Int>;end; n!(m).0", HdSyntax::NamePassing).unwrap();
    let mut ok = false;
    assert_eq!(unsafe { hd_process_typecheck(p, &mut ok) }, HdStatus::Ok);
    assert!(ok);
    assert!(take(unsafe { hd_process_to_string(p) }).contains("apply"));
    unsafe { hd_process_free(p) };
}

#[test]
fn errors_are_reported_through_status_and_message() {
    assert_eq!(parse("a!(1.0", HdSyntax::Ho).unwrap_err(), HdStatus::Parse);
    assert!(last_error().contains("parse error"));

    assert_eq!(parse("0", HdSyntax::NamePassing).map(|p| unsafe { hd_process_free(p) }), Ok(()));
    assert_eq!(parse("n!(m).0", HdSyntax::NamePassing).unwrap_err(), HdStatus::Encode);

    let c = CString::new("0").unwrap();
    let mut p = ptr::null_mut();
    assert_eq!(unsafe { hd_process_parse(c.as_ptr(), 9, &mut p) }, HdStatus::InvalidArgument);
    assert!(last_error().contains("syntax"));
    assert_eq!(unsafe { hd_process_parse(ptr::null(), 0, &mut p) }, HdStatus::NullArgument);
    assert_eq!(unsafe { hd_process_parse(c.as_ptr(), 0, ptr::null_mut()) }, HdStatus::NullArgument);
    let bad = [0xffu8, 0];
    assert_eq!(unsafe { hd_process_parse(bad.as_ptr().cast(), 0, &mut p) }, HdStatus::InvalidUtf8);

    let mut ok = true;
    assert_eq!(unsafe { hd_process_typecheck(ptr::null(), &mut ok) }, HdStatus::NullArgument);
    let ill = parse("new s : !<Int>;end in s!(1).0", HdSyntax::Ho).unwrap();
    assert_eq!(unsafe { hd_process_typecheck(ill, &mut ok) }, HdStatus::Ok);
    assert!(!ok);
    assert!(last_error().contains("ResS"));
    let mut d = ptr::null_mut();
    assert_eq!(unsafe { hd_decompose(ill, 0, &mut d) }, HdStatus::Decompose);
    assert_eq!(unsafe { hd_decompose(ill, 7, &mut d) }, HdStatus::InvalidArgument);
    unsafe { hd_process_free(ill) };

    let poly = parse("new s : !<Int, Bool>;end in (s!(1, true).0 | ~s?(a, b).0)", HdSyntax::Ho).unwrap();
    assert_eq!(unsafe { hd_decompose(poly, HdOptimization::Monadic as u32, &mut d) }, HdStatus::Decompose);
    unsafe { hd_process_free(poly) };
}

#[test]
fn null_handles_are_tolerated_by_release_and_render_functions() {
    unsafe {
        hd_process_free(ptr::null_mut());
        hd_decomposition_free(ptr::null_mut());
        hd_trace_free(ptr::null_mut());
        hd_string_free(ptr::null_mut());
        assert!(hd_process_to_string(ptr::null()).is_null());
        assert!(hd_decomposition_to_string(ptr::null()).is_null());
        assert!(hd_trace_to_jsonl(ptr::null()).is_null());
    }
    let v = unsafe { CStr::from_ptr(hd_version()) };
    assert_eq!(v.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
}
