//! C ABI over corneralg. Algebras and verdicts are opaque handles; every
//! call returns a `CaStatus` and leaves a message for `ca_last_error` on
//! failure. Strings returned to the caller are freed with `ca_string_free`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use corneralg::checker::{check_with, CheckOptions, Mode};
use corneralg::classifier::{certify, classify, Verdict};
use corneralg::cli::{family_spec, tolerance_from_env, AlgebraFile};
use corneralg::families::{make_family, FamilyTag};
use corneralg::matcore::c;
use corneralg::{ComplexMatrix, Error, MatrixAlgebra};

/// Result codes.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CaStatus {
    Ok = 0,
    /// Malformed input, shape mismatch, null pointer, or not an algebra.
    InvalidInput = 1,
    /// A numerical routine failed to converge or met a singular matrix.
    Numerical = 2,
    /// Structural and empirical checks disagreed.
    Inconsistent = 3,
    /// A Rust panic was caught at the boundary.
    Internal = 4,
}

/// Opaque unital or non-unital subalgebra of M_n.
pub struct CaAlgebra {
    inner: MatrixAlgebra,
}

/// Opaque classification verdict.
pub struct CaVerdict {
    inner: Verdict,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let s = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(s));
}

fn status_of(e: &Error) -> CaStatus {
    match e {
        Error::Shape(_) | Error::InvalidInput(_) | Error::NotIdempotent(_) | Error::NotAlgebra(_) => CaStatus::InvalidInput,
        Error::Inconsistent(_) => CaStatus::Inconsistent,
        _ => CaStatus::Numerical,
    }
}

fn guard(f: impl FnOnce() -> corneralg::Result<()>) -> CaStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => CaStatus::Ok,
        Ok(Err(e)) => {
            set_error(e.to_string());
            status_of(&e)
        }
        Err(_) => {
            set_error("internal panic".into());
            CaStatus::Internal
        }
    }
}

fn null(what: &str) -> Error {
    Error::InvalidInput(format!("null pointer: {what}"))
}

unsafe fn read_str<'a>(p: *const c_char, what: &str) -> corneralg::Result<&'a str> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p).to_str().map_err(|_| Error::InvalidInput(format!("{what} is not UTF-8")))
}

fn into_c_string(s: String) -> corneralg::Result<*mut c_char> {
    CString::new(s).map(CString::into_raw).map_err(|_| Error::InvalidInput("string contains NUL".into()))
}

/// Message for the last failed call on this thread, or NULL. The pointer is
/// valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn ca_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Parses an algebra file (JSON text).
///
/// # Safety
/// `json` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ca_algebra_from_json(json: *const c_char, out: *mut *mut CaAlgebra) -> CaStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let text = read_str(json, "json")?;
        let tol = tolerance_from_env()?;
        let a = AlgebraFile::from_json(text)?.algebra(tol)?;
        *out = Box::into_raw(Box::new(CaAlgebra { inner: a }));
        Ok(())
    })
}

/// Span of `count` matrices of size n x n given as interleaved (re, im)
/// doubles in row-major order, `count * n * n * 2` values in total.
///
/// # Safety
/// `data` must point to that many doubles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ca_algebra_from_basis(
    n: usize,
    count: usize,
    data: *const f64,
    out: *mut *mut CaAlgebra,
) -> CaStatus {
    guard(|| {
        if out.is_null() || data.is_null() {
            return Err(null("data or out"));
        }
        if n == 0 || count == 0 {
            return Err(Error::InvalidInput("n and count must be positive".into()));
        }
        let len = count.checked_mul(n * n * 2).ok_or_else(|| Error::InvalidInput("size overflow".into()))?;
        let vals = std::slice::from_raw_parts(data, len);
        let mats: Vec<ComplexMatrix> = vals
            .chunks_exact(n * n * 2)
            .map(|m| ComplexMatrix::from_fn(n, n, |i, j| c(m[2 * (i * n + j)], m[2 * (i * n + j) + 1])))
            .collect();
        let a = MatrixAlgebra::span(n, &mats, tolerance_from_env()?)?;
        *out = Box::into_raw(Box::new(CaAlgebra { inner: a }));
        Ok(())
    })
}

/// Canonical family instance. `ranks` points to three values or is NULL for
/// families without ranks; `t_re`, `t_im` are read for AT only.
///
/// # Safety
/// `tag` must be NUL-terminated; `ranks` NULL or three readable values.
#[no_mangle]
pub unsafe extern "C" fn ca_family_make(
    tag: *const c_char,
    n: usize,
    ranks: *const usize,
    t_re: f64,
    t_im: f64,
    out: *mut *mut CaAlgebra,
) -> CaStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let tag: FamilyTag = read_str(tag, "tag")?.parse()?;
        let ranks = if ranks.is_null() {
            None
        } else {
            let r = std::slice::from_raw_parts(ranks, 3);
            Some(format!("{},{},{}", r[0], r[1], r[2]))
        };
        let t = format!("{t_re},{t_im}");
        let spec = family_spec(tag, n, ranks.as_deref(), Some(&t))?;
        let a = make_family(&spec, tolerance_from_env()?)?;
        *out = Box::into_raw(Box::new(CaAlgebra { inner: a }));
        Ok(())
    })
}

/// Writes n and the dimension of the algebra.
///
/// # Safety
/// `alg` must be a live handle; `n` and `dim` writable or NULL.
#[no_mangle]
pub unsafe extern "C" fn ca_algebra_shape(alg: *const CaAlgebra, n: *mut usize, dim: *mut usize) -> CaStatus {
    guard(|| {
        let a = alg.as_ref().ok_or_else(|| null("alg"))?;
        if !n.is_null() {
            *n = a.inner.n();
        }
        if !dim.is_null() {
            *dim = a.inner.dim();
        }
        Ok(())
    })
}

/// Classifies a unital algebra with n >= 4.
///
/// # Safety
/// `alg` must be a live handle; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn ca_classify(alg: *const CaAlgebra, seed: u64, out: *mut *mut CaVerdict) -> CaStatus {
    guard(|| {
        let a = alg.as_ref().ok_or_else(|| null("alg"))?;
        if out.is_null() {
            return Err(null("out"));
        }
        let v = classify(&a.inner, seed)?;
        *out = Box::into_raw(Box::new(CaVerdict { inner: v }));
        Ok(())
    })
}

/// Whether the verdict says compressible.
///
/// # Safety
/// `verdict` must be a live handle; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn ca_verdict_compressible(verdict: *const CaVerdict, out: *mut bool) -> CaStatus {
    guard(|| {
        let v = verdict.as_ref().ok_or_else(|| null("verdict"))?;
        if out.is_null() {
            return Err(null("out"));
        }
        *out = v.inner.compressible;
        Ok(())
    })
}

/// Replays the verdict's certificate against the algebra.
///
/// # Safety
/// Both handles must be live; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn ca_certify(alg: *const CaAlgebra, verdict: *const CaVerdict, out: *mut bool) -> CaStatus {
    guard(|| {
        let a = alg.as_ref().ok_or_else(|| null("alg"))?;
        let v = verdict.as_ref().ok_or_else(|| null("verdict"))?;
        if out.is_null() {
            return Err(null("out"));
        }
        *out = certify(&a.inner, &v.inner);
        Ok(())
    })
}

/// JSON form of the verdict; free with `ca_string_free`.
///
/// # Safety
/// `verdict` must be a live handle; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn ca_verdict_to_json(verdict: *const CaVerdict, out: *mut *mut c_char) -> CaStatus {
    guard(|| {
        let v = verdict.as_ref().ok_or_else(|| null("verdict"))?;
        if out.is_null() {
            return Err(null("out"));
        }
        let s = serde_json::to_string(&v.inner).map_err(|e| Error::InvalidInput(e.to_string()))?;
        *out = into_c_string(s)?;
        Ok(())
    })
}

/// Corner-closure check. `mode` is 0 for projections, 1 for idempotents.
/// Writes the violation count and, when `report` is not NULL, the JSON
/// report (free with `ca_string_free`).
///
/// # Safety
/// `alg` must be a live handle; `violations` writable; `report` NULL or writable.
#[no_mangle]
pub unsafe extern "C" fn ca_check(
    alg: *const CaAlgebra,
    mode: u32,
    trials: usize,
    seed: u64,
    violations: *mut usize,
    report: *mut *mut c_char,
) -> CaStatus {
    guard(|| {
        let a = alg.as_ref().ok_or_else(|| null("alg"))?;
        if violations.is_null() {
            return Err(null("violations"));
        }
        let mode = match mode {
            0 => Mode::Projection,
            1 => Mode::Idempotent,
            m => return Err(Error::InvalidInput(format!("unknown mode {m}"))),
        };
        let r = check_with(&a.inner, &CheckOptions::new(mode, trials, seed))?;
        *violations = r.violations.len();
        if !report.is_null() {
            let s = serde_json::to_string(&r).map_err(|e| Error::InvalidInput(e.to_string()))?;
            *report = into_c_string(s)?;
        }
        Ok(())
    })
}

/// # Safety
/// `s` must come from this library or be NULL.
#[no_mangle]
pub unsafe extern "C" fn ca_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// # Safety
/// `alg` must come from this library or be NULL.
#[no_mangle]
pub unsafe extern "C" fn ca_algebra_free(alg: *mut CaAlgebra) {
    if !alg.is_null() {
        drop(Box::from_raw(alg));
    }
}

/// # Safety
/// `verdict` must come from this library or be NULL.
#[no_mangle]
pub unsafe extern "C" fn ca_verdict_free(verdict: *mut CaVerdict) {
    if !verdict.is_null() {
        drop(Box::from_raw(verdict));
    }
}
