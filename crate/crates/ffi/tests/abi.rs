use std::ffi::{CStr, CString};
use std::path::Path;
use std::process::Command;
use std::ptr;

use corneralg_ffi::*;

fn last_error() -> String {
    let p = ca_last_error();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

#[test]
fn family_classify_round_trip() {
    let tag = CString::new("EX1").unwrap();
    let ranks = [1usize, 2, 1];
    let mut alg = ptr::null_mut();
    unsafe {
        assert_eq!(ca_family_make(tag.as_ptr(), 4, ranks.as_ptr(), 0.0, 0.0, &mut alg), CaStatus::Ok);
        let (mut n, mut dim) = (0, 0);
        assert_eq!(ca_algebra_shape(alg, &mut n, &mut dim), CaStatus::Ok);
        assert_eq!((n, dim), (4, 11));
        let mut v = ptr::null_mut();
        assert_eq!(ca_classify(alg, 0, &mut v), CaStatus::Ok);
        let mut comp = false;
        assert_eq!(ca_verdict_compressible(v, &mut comp), CaStatus::Ok);
        assert!(comp);
        let mut ok = false;
        assert_eq!(ca_certify(alg, v, &mut ok), CaStatus::Ok);
        assert!(ok);
        let mut json = ptr::null_mut();
        assert_eq!(ca_verdict_to_json(v, &mut json), CaStatus::Ok);
        let text = CStr::from_ptr(json).to_str().unwrap().to_owned();
        assert!(text.contains("\"tag\":\"EX1\""));
        ca_string_free(json);
        ca_verdict_free(v);
        ca_algebra_free(alg);
    }
}

#[test]
fn basis_and_check() {
    // Diagonal algebra of M_3 as interleaved (re, im) values.
    let n = 3;
    let mut data = vec![0.0; 3 * n * n * 2];
    for k in 0..3 {
        data[k * n * n * 2 + 2 * (k * n + k)] = 1.0;
    }
    let mut alg = ptr::null_mut();
    unsafe {
        assert_eq!(ca_algebra_from_basis(n, 3, data.as_ptr(), &mut alg), CaStatus::Ok);
        let mut viol = 0;
        let mut report = ptr::null_mut();
        assert_eq!(ca_check(alg, 1, 50, 1, &mut viol, &mut report), CaStatus::Ok);
        assert!(viol > 0);
        assert!(CStr::from_ptr(report).to_str().unwrap().contains("violations"));
        ca_string_free(report);
        // n = 3 is outside the classifier's range.
        let mut v = ptr::null_mut();
        assert_eq!(ca_classify(alg, 0, &mut v), CaStatus::InvalidInput);
        assert!(last_error().contains("n >= 4"));
        ca_algebra_free(alg);
    }
}

#[test]
fn errors_are_reported() {
    let mut alg = ptr::null_mut();
    unsafe {
        let bad = CString::new("{\"n\": 2}").unwrap();
        assert_eq!(ca_algebra_from_json(bad.as_ptr(), &mut alg), CaStatus::InvalidInput);
        assert!(last_error().contains("malformed"));
        assert_eq!(ca_algebra_from_json(ptr::null(), &mut alg), CaStatus::InvalidInput);
        assert!(last_error().contains("null"));
        let tag = CString::new("NOPE").unwrap();
        assert_eq!(ca_family_make(tag.as_ptr(), 4, ptr::null(), 0.0, 0.0, &mut alg), CaStatus::InvalidInput);
        // Not closed under multiplication: span{E12, E21}.
        let mut data = [0.0; 2 * 4 * 2];
        data[2] = 1.0;
        data[8 + 4] = 1.0;
        assert_eq!(ca_algebra_from_basis(2, 2, data.as_ptr(), &mut alg), CaStatus::InvalidInput);
        ca_algebra_free(ptr::null_mut());
        ca_string_free(ptr::null_mut());
    }
}

#[test]
fn json_file_parses() {
    let json = CString::new(r#"{"n":2,"basis":[[[[1,0],[0,0]],[[0,0],[1,0]]]]}"#).unwrap();
    let mut alg = ptr::null_mut();
    unsafe {
        assert_eq!(ca_algebra_from_json(json.as_ptr(), &mut alg), CaStatus::Ok);
        let mut dim = 0;
        assert_eq!(ca_algebra_shape(alg, ptr::null_mut(), &mut dim), CaStatus::Ok);
        assert_eq!(dim, 1);
        ca_algebra_free(alg);
    }
}

#[test]
fn header_compiles_as_c() {
    let header = Path::new(env!("CARGO_MANIFEST_DIR")).join("include/corneralg.h");
    let text = std::fs::read_to_string(&header).unwrap();
    for name in ["ca_classify", "ca_check", "ca_last_error", "CA_STATUS_INCONSISTENT", "typedef struct CaAlgebra CaAlgebra"] {
        assert!(text.contains(name), "{name} missing from header");
    }
    let dir = tempfile::tempdir().unwrap();
    let src = dir.path().join("use.c");
    std::fs::write(&src, "#include \"corneralg.h\"\nint main(void) { return ca_last_error() == 0 ? 0 : 1; }\n").unwrap();
    let Ok(out) = Command::new("cc")
        .arg("-fsyntax-only")
        .arg("-std=c99")
        .arg("-I")
        .arg(header.parent().unwrap())
        .arg(&src)
        .output()
    else {
        eprintln!("no C compiler; syntax check skipped");
        return;
    };
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
}
