//! C interface to the S³ and T³ Beltrami fields.
//!
//! Every fallible call returns a [`BtStatus`]; on failure the message is kept per thread and
//! read with [`bt_last_error`]. Handles are opaque and released with their `_free` function.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

use beltrami::io::{Document, FieldDescriptor, LoadedField};
use beltrami::r3_fields::R3Field;
use beltrami::s3_construct::{S3BeltramiField, S3Field};
use beltrami::t3_construct::{enumerate_sphere_lattice, torus_helicity_ratio, TorusBeltramiField};
use beltrami::{dynamics, BeltramiError};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BtStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Domain = 3,
    Io = 4,
    Parse = 5,
    Precondition = 6,
    Internal = 7,
}

/// A Beltrami field on the unit sphere of ℝ⁴.
pub struct BtS3Field(S3BeltramiField);

/// A Beltrami field on the 2π-periodic torus.
pub struct BtT3Field(TorusBeltramiField);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn classify(e: &BeltramiError) -> BtStatus {
    match e {
        BeltramiError::Stage { source, .. } => classify(source),
        BeltramiError::Io { .. } => BtStatus::Io,
        BeltramiError::Json(_) | BeltramiError::Config(_) => BtStatus::Parse,
        BeltramiError::Domain { .. } | BeltramiError::UnsupportedDegree { .. } => BtStatus::Domain,
        _ => BtStatus::Precondition,
    }
}

fn fail(status: BtStatus, msg: impl Into<String>) -> BtStatus {
    set_error(msg.into());
    status
}

/// Clears the last error, runs `f`, and turns errors and panics into status codes.
fn guard(f: impl FnOnce() -> Result<(), BtStatus>) -> BtStatus {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => BtStatus::Ok,
        Ok(Err(s)) => s,
        Err(p) => {
            let msg = p.downcast_ref::<&str>().map(|s| s.to_string()).or_else(|| p.downcast_ref::<String>().cloned());
            fail(BtStatus::Internal, format!("panic: {}", msg.unwrap_or_default()))
        }
    }
}

fn lib<T>(r: beltrami::Result<T>) -> Result<T, BtStatus> {
    r.map_err(|e| fail(classify(&e), e.to_string()))
}

unsafe fn non_null<'a, T>(p: *const T, what: &str) -> Result<&'a T, BtStatus> {
    p.as_ref().ok_or_else(|| fail(BtStatus::NullPointer, format!("{what} is null")))
}

unsafe fn out_ref<'a, T>(p: *mut T, what: &str) -> Result<&'a mut T, BtStatus> {
    p.as_mut().ok_or_else(|| fail(BtStatus::NullPointer, format!("{what} is null")))
}

unsafe fn c_str<'a>(p: *const c_char, what: &str) -> Result<&'a str, BtStatus> {
    if p.is_null() {
        return Err(fail(BtStatus::NullPointer, format!("{what} is null")));
    }
    CStr::from_ptr(p).to_str().map_err(|_| fail(BtStatus::InvalidArgument, format!("{what} is not UTF-8")))
}

unsafe fn read<const N: usize>(p: *const f64, what: &str) -> Result<[f64; N], BtStatus> {
    if p.is_null() {
        return Err(fail(BtStatus::NullPointer, format!("{what} is null")));
    }
    Ok(std::array::from_fn(|i| *p.add(i)))
}

unsafe fn write<const N: usize>(p: *mut f64, v: [f64; N], what: &str) -> Result<(), BtStatus> {
    if p.is_null() {
        return Err(fail(BtStatus::NullPointer, format!("{what} is null")));
    }
    ptr::copy_nonoverlapping(v.as_ptr(), p, N);
    Ok(())
}

fn parse_doc(text: &str) -> Result<LoadedField, BtStatus> {
    let doc: Document = serde_json::from_str(text).map_err(|e| fail(BtStatus::Parse, e.to_string()))?;
    lib(doc.field.to_field())
}

fn load_doc(path: &str) -> Result<LoadedField, BtStatus> {
    lib(Document::read(Path::new(path)).and_then(|d| d.field.to_field()))
}

fn to_c_string(field: FieldDescriptor) -> Result<*mut c_char, BtStatus> {
    let text = serde_json::to_string(&Document { field, provenance: None }).map_err(|e| fail(BtStatus::Internal, e.to_string()))?;
    Ok(CString::new(text).map_err(|e| fail(BtStatus::Internal, e.to_string()))?.into_raw())
}

fn expect_s3(f: LoadedField) -> Result<S3BeltramiField, BtStatus> {
    match f {
        LoadedField::S3(u) => Ok(u),
        other => Err(fail(BtStatus::InvalidArgument, format!("descriptor is {}, not s3_beltrami", other.kind()))),
    }
}

fn expect_t3(f: LoadedField) -> Result<TorusBeltramiField, BtStatus> {
    match f {
        LoadedField::T3(u) => Ok(u),
        other => Err(fail(BtStatus::InvalidArgument, format!("descriptor is {}, not t3_beltrami", other.kind()))),
    }
}

/// Message of the last failed call on this thread, or NULL. Valid until the next call on the thread.
#[no_mangle]
pub extern "C" fn bt_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn bt_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Frees a string returned by a `_to_json` call. NULL is ignored.
///
/// # Safety
/// `s` must come from this library and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn bt_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Builds a field from `n` unit-vector centers (4 doubles each) and weights
/// (3 doubles each) at harmonic degree `degree`.
///
/// # Safety
/// `centers` and `weights` must hold 4n and 3n doubles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn bt_s3_field_new(
    degree: u32,
    centers: *const f64,
    weights: *const f64,
    n: usize,
    out: *mut *mut BtS3Field,
) -> BtStatus {
    guard(|| {
        let out = out_ref(out, "out")?;
        if n > 0 && (centers.is_null() || weights.is_null()) {
            return Err(fail(BtStatus::NullPointer, "centers or weights is null"));
        }
        let cs = (0..n).map(|i| read::<4>(centers.add(4 * i), "centers")).collect::<Result<Vec<_>, _>>()?;
        let ws = (0..n).map(|i| read::<3>(weights.add(3 * i), "weights")).collect::<Result<Vec<_>, _>>()?;
        let u = lib(S3BeltramiField::new(degree, cs, ws))?;
        *out = Box::into_raw(Box::new(BtS3Field(u)));
        Ok(())
    })
}

/// Parses an `s3_beltrami` descriptor.
///
/// # Safety
/// `json` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn bt_s3_field_from_json(json: *const c_char, out: *mut *mut BtS3Field) -> BtStatus {
    guard(|| {
        let out = out_ref(out, "out")?;
        let u = expect_s3(parse_doc(c_str(json, "json")?)?)?;
        *out = Box::into_raw(Box::new(BtS3Field(u)));
        Ok(())
    })
}

/// Reads an `s3_beltrami` descriptor file.
///
/// # Safety
/// `path` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn bt_s3_field_load(path: *const c_char, out: *mut *mut BtS3Field) -> BtStatus {
    guard(|| {
        let out = out_ref(out, "out")?;
        let u = expect_s3(load_doc(c_str(path, "path")?)?)?;
        *out = Box::into_raw(Box::new(BtS3Field(u)));
        Ok(())
    })
}

/// # Safety
/// `field` must come from this library and not be freed twice. NULL is ignored.
#[no_mangle]
pub unsafe extern "C" fn bt_s3_field_free(field: *mut BtS3Field) {
    if !field.is_null() {
        drop(Box::from_raw(field));
    }
}

/// Serializes the field as a descriptor; free the result with `bt_string_free`.
///
/// # Safety
/// `field` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn bt_s3_field_to_json(field: *const BtS3Field, out: *mut *mut c_char) -> BtStatus {
    guard(|| {
        let f = non_null(field, "field")?;
        *out_ref(out, "out")? = to_c_string((&f.0).into())?;
        Ok(())
    })
}

/// Ambient tangent vector of the field at the unit vector `p`.
///
/// # Safety
/// `p` holds 4 doubles, `out` room for 4.
#[no_mangle]
pub unsafe extern "C" fn bt_s3_field_eval(field: *const BtS3Field, p: *const f64, out: *mut f64) -> BtStatus {
    guard(|| {
        let f = non_null(field, "field")?;
        let p = read::<4>(p, "p")?;
        write(out, S3Field::eval(&f.0, p), "out")
    })
}

/// Closed-form curl at `p`, equal to `eigenvalue · eval` up to rounding.
///
/// # Safety
/// `p` holds 4 doubles, `out` room for 4.
#[no_mangle]
pub unsafe extern "C" fn bt_s3_field_curl(field: *const BtS3Field, p: *const f64, out: *mut f64) -> BtStatus {
    guard(|| {
        let f = non_null(field, "field")?;
        let p = read::<4>(p, "p")?;
        let c = f.0.curl(p).ok_or_else(|| fail(BtStatus::Internal, "curl unavailable"))?;
        write(out, c, "out")
    })
}

/// # Safety
/// `field` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn bt_s3_field_eigenvalue(field: *const BtS3Field, out: *mut f64) -> BtStatus {
    guard(|| {
        *out_ref(out, "out")? = non_null(field, "field")?.0.eigenvalue();
        Ok(())
    })
}

/// Monte Carlo estimate of ∫u·curl u / ∫|u|² from `nodes` ≥ 10⁴ uniform points.
///
/// # Safety
/// `field` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn bt_s3_helicity_ratio(field: *const BtS3Field, nodes: usize, seed: u64, out: *mut f64) -> BtStatus {
    guard(|| {
        let f = non_null(field, "field")?;
        let out = out_ref(out, "out")?;
        *out = lib(dynamics::s3_helicity_ratio(&f.0, nodes, seed))?;
        Ok(())
    })
}

/// Parses a `t3_beltrami` descriptor; modes are checked against the eigen and divergence identities.
///
/// # Safety
/// `json` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn bt_t3_field_from_json(json: *const c_char, out: *mut *mut BtT3Field) -> BtStatus {
    guard(|| {
        let out = out_ref(out, "out")?;
        let u = expect_t3(parse_doc(c_str(json, "json")?)?)?;
        *out = Box::into_raw(Box::new(BtT3Field(u)));
        Ok(())
    })
}

/// Reads a `t3_beltrami` descriptor file.
///
/// # Safety
/// `path` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn bt_t3_field_load(path: *const c_char, out: *mut *mut BtT3Field) -> BtStatus {
    guard(|| {
        let out = out_ref(out, "out")?;
        let u = expect_t3(load_doc(c_str(path, "path")?)?)?;
        *out = Box::into_raw(Box::new(BtT3Field(u)));
        Ok(())
    })
}

/// # Safety
/// `field` must come from this library and not be freed twice. NULL is ignored.
#[no_mangle]
pub unsafe extern "C" fn bt_t3_field_free(field: *mut BtT3Field) {
    if !field.is_null() {
        drop(Box::from_raw(field));
    }
}

/// # Safety
/// `field` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn bt_t3_field_to_json(field: *const BtT3Field, out: *mut *mut c_char) -> BtStatus {
    guard(|| {
        let f = non_null(field, "field")?;
        *out_ref(out, "out")? = to_c_string((&f.0).into())?;
        Ok(())
    })
}

/// Real field value at `x` (any real coordinates; the field is 2π-periodic).
///
/// # Safety
/// `x` holds 3 doubles, `out` room for 3.
#[no_mangle]
pub unsafe extern "C" fn bt_t3_field_eval(field: *const BtT3Field, x: *const f64, out: *mut f64) -> BtStatus {
    guard(|| {
        let f = non_null(field, "field")?;
        let x = read::<3>(x, "x")?;
        write(out, f.0.eval(x), "out")
    })
}

/// # Safety
/// `field` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn bt_t3_field_eigenvalue(field: *const BtT3Field, out: *mut f64) -> BtStatus {
    guard(|| {
        *out_ref(out, "out")? = non_null(field, "field")?.0.eigenvalue();
        Ok(())
    })
}

/// Number of stored Fourier modes (conjugate pairs count twice).
///
/// # Safety
/// `field` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn bt_t3_field_mode_count(field: *const BtT3Field, out: *mut usize) -> BtStatus {
    guard(|| {
        *out_ref(out, "out")? = non_null(field, "field")?.0.modes().len();
        Ok(())
    })
}

/// Exact helicity ratio from the Fourier coefficients.
///
/// # Safety
/// `field` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn bt_t3_helicity_ratio(field: *const BtT3Field, out: *mut f64) -> BtStatus {
    guard(|| {
        let f = non_null(field, "field")?;
        let out = out_ref(out, "out")?;
        *out = lib(torus_helicity_ratio(&f.0))?;
        Ok(())
    })
}

/// Number of integer points k with |k| = lambda.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn bt_lattice_count(lambda: u64, out: *mut usize) -> BtStatus {
    guard(|| {
        let out = out_ref(out, "out")?;
        *out = lib(enumerate_sphere_lattice(lambda))?.len();
        Ok(())
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn last() -> String {
        let p = bt_last_error();
        assert!(!p.is_null());
        unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
    }

    #[test]
    fn status_codes_and_last_error() {
        unsafe {
            let mut out = 0usize;
            assert_eq!(bt_lattice_count(3, &mut out), BtStatus::Ok);
            assert_eq!(out, 30);
            assert!(bt_last_error().is_null());
            assert_eq!(bt_lattice_count(0, &mut out), BtStatus::Domain);
            assert!(last().contains("degree 0"));
            assert_eq!(bt_lattice_count(3, ptr::null_mut()), BtStatus::NullPointer);
            assert_eq!(last(), "out is null");
        }
    }

    #[test]
    fn last_error_is_per_thread() {
        unsafe {
            bt_lattice_count(0, ptr::null_mut());
        }
        std::thread::spawn(|| assert!(bt_last_error().is_null())).join().unwrap();
        assert!(!bt_last_error().is_null());
    }

    #[test]
    fn s3_handle_round_trip() {
        let centers = [0.0, 0.0, 0.0, 1.0, 0.6, 0.0, 0.8, 0.0];
        let weights = [1.0, 0.0, 0.5, -0.25, 2.0, 0.0];
        unsafe {
            let mut h = ptr::null_mut();
            assert_eq!(bt_s3_field_new(7, centers.as_ptr(), weights.as_ptr(), 2, &mut h), BtStatus::Ok);
            let mut lam = 0.0;
            bt_s3_field_eigenvalue(h, &mut lam);
            assert_eq!(lam, 9.0);
            let p = [0.5, 0.5, 0.5, 0.5];
            let (mut u, mut w) = ([0.0; 4], [0.0; 4]);
            assert_eq!(bt_s3_field_eval(h, p.as_ptr(), u.as_mut_ptr()), BtStatus::Ok);
            assert_eq!(bt_s3_field_curl(h, p.as_ptr(), w.as_mut_ptr()), BtStatus::Ok);
            for i in 0..4 {
                assert!((w[i] - lam * u[i]).abs() <= 1e-9 * lam);
            }
            let mut s = ptr::null_mut();
            assert_eq!(bt_s3_field_to_json(h, &mut s), BtStatus::Ok);
            let mut h2 = ptr::null_mut();
            assert_eq!(bt_s3_field_from_json(s, &mut h2), BtStatus::Ok);
            assert_eq!((*h).0, (*h2).0);
            bt_string_free(s);
            let mut t = ptr::null_mut();
            assert_eq!(bt_t3_field_from_json(c"{\"type\":\"s3_beltrami\",\"Lambda\":3,\"centers\":[],\"weights\":[]}".as_ptr(), &mut t), BtStatus::InvalidArgument);
            assert!(t.is_null());
            bt_s3_field_free(h);
            bt_s3_field_free(h2);
            bt_s3_field_free(ptr::null_mut());
        }
    }

    #[test]
    fn bad_inputs() {
        unsafe {
            let mut h = ptr::null_mut();
            assert_eq!(bt_s3_field_from_json(c"{not json".as_ptr(), &mut h), BtStatus::Parse);
            assert_eq!(bt_s3_field_load(c"/nonexistent/x.json".as_ptr(), &mut h), BtStatus::Io);
            assert!(last().contains("/nonexistent/x.json"));
            let c = [0.0, 0.0, 0.0, 2.0];
            let w = [1.0, 0.0, 0.0];
            assert_eq!(bt_s3_field_new(4, c.as_ptr(), w.as_ptr(), 1, &mut h), BtStatus::Precondition);
            assert_eq!(bt_s3_field_eval(ptr::null(), c.as_ptr(), ptr::null_mut()), BtStatus::NullPointer);
            assert!(h.is_null());
        }
    }
}
