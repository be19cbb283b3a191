//! C ABI for the brushlet library: opaque covering handles, error codes,
//! and JSON/string outputs. Strings returned by this library must be
//! released with `brushlet_string_free`.

use brushlet::anisotropy::{quasi_norm, Anisotropy};
use brushlet::brushlet1d::RampProfile;
use brushlet::covering::{layer_to_json, tiling_svg, Covering, CoveringSpec};
use brushlet::seqnorm::{m_norm, NormParams};
use brushlet::transform::{analyze, coefficients_from_json, coefficients_to_json, GaussianFreq};
use brushlet::Error;
use std::cell::RefCell;
use std::ffi::{c_char, c_double, c_int, CString};
use std::slice;

/// Status codes returned by every fallible entry point.
pub const BRUSHLET_OK: c_int = 0;
pub const BRUSHLET_ERR_NULL: c_int = 1;
pub const BRUSHLET_ERR_INVALID: c_int = 2;
pub const BRUSHLET_ERR_OUT_OF_RANGE: c_int = 3;
pub const BRUSHLET_ERR_INTERNAL: c_int = 4;

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    LAST_ERROR.with(|slot| {
        *slot.borrow_mut() = CString::new(msg).ok();
    });
}

fn code_of(err: &Error) -> c_int {
    match err {
        Error::OutsideRange { .. } => BRUSHLET_ERR_OUT_OF_RANGE,
        Error::InvalidAnisotropy(_) | Error::InvalidCovering(_) | Error::InvalidArgument(_) => {
            BRUSHLET_ERR_INVALID
        }
        _ => BRUSHLET_ERR_INTERNAL,
    }
}

/// Opaque covering handle.
pub struct BrushletCovering {
    covering: Covering,
}

/// Last error message for this thread, or NULL when no error is recorded.
/// The caller owns the returned string.
#[no_mangle]
pub extern "C" fn brushlet_last_error() -> *mut c_char {
    LAST_ERROR.with(|slot| match slot.borrow().as_ref() {
        Some(msg) => msg.clone().into_raw(),
        None => std::ptr::null_mut(),
    })
}

/// Release a string returned by this library.
///
/// # Safety
/// `s` must be a pointer previously returned by a brushlet function and not
/// yet freed; NULL is ignored.
#[no_mangle]
pub unsafe extern "C" fn brushlet_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Build a covering for the anisotropy `a[0..dim]` and the given α, with
/// layers `0..=j_max` materialized. On success writes the handle and returns
/// `BRUSHLET_OK`.
///
/// # Safety
/// `a` must point to `dim` readable doubles and `out` to a writable pointer
/// slot.
#[no_mangle]
pub unsafe extern "C" fn brushlet_covering_new(
    alpha: c_double,
    a: *const c_double,
    dim: usize,
    j_max: u32,
    out: *mut *mut BrushletCovering,
) -> c_int {
    if a.is_null() || out.is_null() {
        set_error("null pointer".into());
        return BRUSHLET_ERR_NULL;
    }
    let exponents = slice::from_raw_parts(a, dim).to_vec();
    let build = Anisotropy::new(exponents)
        .and_then(|aniso| CoveringSpec::new(alpha, aniso))
        .and_then(|spec| Covering::build(spec, j_max));
    match build {
        Ok(covering) => {
            *out = Box::into_raw(Box::new(BrushletCovering { covering }));
            BRUSHLET_OK
        }
        Err(e) => {
            set_error(e.to_string());
            *out = std::ptr::null_mut();
            code_of(&e)
        }
    }
}

/// Release a covering handle. NULL is ignored.
///
/// # Safety
/// `h` must be a handle from `brushlet_covering_new`, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn brushlet_covering_free(h: *mut BrushletCovering) {
    if !h.is_null() {
        drop(Box::from_raw(h));
    }
}

/// Number of tiles in layer `j`.
///
/// # Safety
/// `h` must be a live covering handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn brushlet_layer_count(
    h: *const BrushletCovering,
    j: u32,
    out: *mut usize,
) -> c_int {
    if h.is_null() || out.is_null() {
        set_error("null pointer".into());
        return BRUSHLET_ERR_NULL;
    }
    match (*h).covering.layer(j) {
        Ok(layer) => {
            *out = layer.len();
            BRUSHLET_OK
        }
        Err(e) => {
            set_error(e.to_string());
            code_of(&e)
        }
    }
}

/// JSON document for layer `j` (tiles, centers, cutoffs, measures).
/// Returns NULL on error; the caller frees the string.
///
/// # Safety
/// `h` must be a live covering handle.
#[no_mangle]
pub unsafe extern "C" fn brushlet_layer_json(h: *const BrushletCovering, j: u32) -> *mut c_char {
    if h.is_null() {
        set_error("null pointer".into());
        return std::ptr::null_mut();
    }
    match layer_to_json(&(*h).covering, j)
        .and_then(|doc| serde_json::to_string(&doc).map_err(Error::from))
    {
        Ok(text) => CString::new(text).map_or(std::ptr::null_mut(), CString::into_raw),
        Err(e) => {
            set_error(e.to_string());
            std::ptr::null_mut()
        }
    }
}

/// SVG rendering of a d = 2 tiling up to layer `j_max`.
/// Returns NULL on error; the caller frees the string.
///
/// # Safety
/// `h` must be a live covering handle.
#[no_mangle]
pub unsafe extern "C" fn brushlet_tiling_svg(
    h: *const BrushletCovering,
    j_max: u32,
) -> *mut c_char {
    if h.is_null() {
        set_error("null pointer".into());
        return std::ptr::null_mut();
    }
    match tiling_svg(&(*h).covering, j_max) {
        Ok(text) => CString::new(text).map_or(std::ptr::null_mut(), CString::into_raw),
        Err(e) => {
            set_error(e.to_string());
            std::ptr::null_mut()
        }
    }
}

/// Anisotropic quasi-norm |x|_a of `x[0..dim]` under `a[0..dim]`.
///
/// # Safety
/// `a` and `x` must point to `dim` readable doubles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn brushlet_quasi_norm(
    a: *const c_double,
    x: *const c_double,
    dim: usize,
    out: *mut c_double,
) -> c_int {
    if a.is_null() || x.is_null() || out.is_null() {
        set_error("null pointer".into());
        return BRUSHLET_ERR_NULL;
    }
    match Anisotropy::new(slice::from_raw_parts(a, dim).to_vec()) {
        Ok(aniso) => {
            *out = quasi_norm(slice::from_raw_parts(x, dim), &aniso);
            BRUSHLET_OK
        }
        Err(e) => {
            set_error(e.to_string());
            code_of(&e)
        }
    }
}

/// Locate the tile containing `xi[0..dim]`: writes the layer and the
/// 1-based tile index. Returns `BRUSHLET_ERR_OUT_OF_RANGE` beyond the built
/// layers.
///
/// # Safety
/// `h` must be a live covering handle; `xi` must point to `dim` readable
/// doubles matching the covering dimension; outputs must be writable.
#[no_mangle]
pub unsafe extern "C" fn brushlet_locate(
    h: *const BrushletCovering,
    xi: *const c_double,
    dim: usize,
    out_j: *mut u32,
    out_k: *mut usize,
) -> c_int {
    if h.is_null() || xi.is_null() || out_j.is_null() || out_k.is_null() {
        set_error("null pointer".into());
        return BRUSHLET_ERR_NULL;
    }
    match (*h).covering.locate(slice::from_raw_parts(xi, dim)) {
        Ok((j, k)) => {
            *out_j = j;
            *out_k = k;
            BRUSHLET_OK
        }
        Err(e) => {
            set_error(e.to_string());
            code_of(&e)
        }
    }
}

/// Analyze a centered Gaussian with per-dimension widths `sigma[0..dim]`:
/// coefficients on tiles meeting `[-bound, bound]^d` with cosine indices up
/// to `n_max`, as a JSON document. Returns NULL on error.
///
/// # Safety
/// `h` must be a live covering handle; `sigma` must point to `dim` readable
/// doubles matching the covering dimension.
#[no_mangle]
pub unsafe extern "C" fn brushlet_analyze_gaussian(
    h: *const BrushletCovering,
    sigma: *const c_double,
    dim: usize,
    bound: c_double,
    n_max: u32,
    oversample: usize,
    ramp_order: u32,
) -> *mut c_char {
    if h.is_null() || sigma.is_null() {
        set_error("null pointer".into());
        return std::ptr::null_mut();
    }
    let f = GaussianFreq::new(slice::from_raw_parts(sigma, dim).to_vec());
    let run = RampProfile::new(ramp_order)
        .and_then(|ramp| analyze(&f, &(*h).covering, &ramp, bound, n_max, oversample))
        .and_then(|coeffs| {
            serde_json::to_string(&coefficients_to_json(&coeffs)).map_err(Error::from)
        });
    match run {
        Ok(text) => CString::new(text).map_or(std::ptr::null_mut(), CString::into_raw),
        Err(e) => {
            set_error(e.to_string());
            std::ptr::null_mut()
        }
    }
}

/// Discrete mixed norm of a coefficient JSON document (as produced by
/// `brushlet_analyze_gaussian`) with parameters (s, p, q); pass `q <= 0`
/// for the sup form.
///
/// # Safety
/// `h` must be a live covering handle; `json` must be a NUL-terminated
/// string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn brushlet_m_norm(
    h: *const BrushletCovering,
    json: *const c_char,
    s: c_double,
    p: c_double,
    q: c_double,
    out: *mut c_double,
) -> c_int {
    if h.is_null() || json.is_null() || out.is_null() {
        set_error("null pointer".into());
        return BRUSHLET_ERR_NULL;
    }
    let text = match std::ffi::CStr::from_ptr(json).to_str() {
        Ok(t) => t,
        Err(_) => {
            set_error("coefficient JSON is not valid UTF-8".into());
            return BRUSHLET_ERR_INVALID;
        }
    };
    let covering = &(*h).covering;
    let q = if q <= 0.0 { f64::INFINITY } else { q };
    let run = serde_json::from_str::<serde_json::Value>(text)
        .map_err(Error::from)
        .and_then(|value| coefficients_from_json(covering, &value))
        .and_then(|coeffs| {
            let params = NormParams::new(s, p, q, covering.spec())?;
            m_norm(covering, &coeffs, &params)
        });
    match run {
        Ok(v) => {
            *out = v;
            BRUSHLET_OK
        }
        Err(e) => {
            set_error(e.to_string());
            code_of(&e)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn covering_lifecycle_through_the_abi() {
        let a = [3.0_f64.sqrt(), 1.5];
        let alpha = 1.0 - 1.0 / 1.1;
        let mut handle: *mut BrushletCovering = std::ptr::null_mut();
        unsafe {
            let code = brushlet_covering_new(alpha, a.as_ptr(), 2, 3, &mut handle);
            assert_eq!(code, BRUSHLET_OK);
            let mut count = 0usize;
            assert_eq!(brushlet_layer_count(handle, 3, &mut count), BRUSHLET_OK);
            assert_eq!(count, 88);

            let json = brushlet_layer_json(handle, 3);
            assert!(!json.is_null());
            let text = std::ffi::CStr::from_ptr(json).to_str().unwrap().to_owned();
            assert!(text.contains("\"count\":88"));
            brushlet_string_free(json);

            let xi = [8.5, 0.0];
            let mut j = 0u32;
            let mut k = 0usize;
            assert_eq!(
                brushlet_locate(handle, xi.as_ptr(), 2, &mut j, &mut k),
                BRUSHLET_OK
            );
            assert_eq!(j, 3);

            let far = [1e9, 0.0];
            assert_eq!(
                brushlet_locate(handle, far.as_ptr(), 2, &mut j, &mut k),
                BRUSHLET_ERR_OUT_OF_RANGE
            );
            let err = brushlet_last_error();
            assert!(!err.is_null());
            brushlet_string_free(err);

            brushlet_covering_free(handle);
        }
    }

    #[test]
    fn quasi_norm_and_analysis_through_the_abi() {
        unsafe {
            let a = [2.0_f64, 1.0];
            let x = [4.0_f64, 0.0];
            let mut v = 0.0_f64;
            assert_eq!(
                brushlet_quasi_norm(a.as_ptr(), x.as_ptr(), 2, &mut v),
                BRUSHLET_OK
            );
            assert!((v - 2.0).abs() < 1e-12);

            let aniso = [3.0_f64.sqrt(), 1.5];
            let mut handle: *mut BrushletCovering = std::ptr::null_mut();
            assert_eq!(
                brushlet_covering_new(1.0 - 1.0 / 1.1, aniso.as_ptr(), 2, 4, &mut handle),
                BRUSHLET_OK
            );
            let sigma = [1.0_f64, 1.0];
            let json = brushlet_analyze_gaussian(handle, sigma.as_ptr(), 2, 4.0, 3, 8, 3);
            assert!(!json.is_null());
            let mut norm = 0.0_f64;
            assert_eq!(
                brushlet_m_norm(handle, json, 0.0, 2.0, 2.0, &mut norm),
                BRUSHLET_OK
            );
            assert!(norm > 0.5 && norm < 5.0, "norm {norm}");
            brushlet_string_free(json);
            brushlet_covering_free(handle);
        }
    }

    #[test]
    fn null_pointers_are_rejected() {
        unsafe {
            let mut out = 0.0_f64;
            assert_eq!(
                brushlet_quasi_norm(std::ptr::null(), std::ptr::null(), 2, &mut out),
                BRUSHLET_ERR_NULL
            );
            let mut handle: *mut BrushletCovering = std::ptr::null_mut();
            assert_eq!(
                brushlet_covering_new(2.0, std::ptr::null(), 2, 1, &mut handle),
                BRUSHLET_ERR_NULL
            );
            // Invalid alpha surfaces as an invalid-argument code.
            let a = [1.0_f64, 1.0];
            assert_eq!(
                brushlet_covering_new(2.0, a.as_ptr(), 2, 1, &mut handle),
                BRUSHLET_ERR_INVALID
            );
        }
    }
}
