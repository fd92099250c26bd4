//! C ABI over `sofic-lab`.
//!
//! Every entry point returns an [`SlStatus`] and writes results through out
//! pointers. Homomorphisms cross the boundary as opaque [`SlHom`] handles
//! owned by the caller and released with [`sl_hom_free`]. Strings returned
//! by the library are released with [`sl_string_free`]. The message for the
//! most recent failure on the calling thread is available from
//! [`sl_last_error`].

use libc::{c_char, c_double, size_t};
use sofic_lab::analytics;
use sofic_lab::count::count_proper;
use sofic_lab::group::{ModelParams, UniformHom};
use sofic_lab::hypergraph::{build_hypergraph, is_proper, Coloring};
use sofic_lab::numeric::Fraction;
use sofic_lab::samplers::{sample_planted_hom, sample_uniform_hom};
use sofic_lab::structure::core_decomposition;
use sofic_lab::{Error, RngState};
use std::cell::RefCell;
use std::ffi::{CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

/// Result code of every call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SlStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidInput = 2,
    Domain = 3,
    Scale = 4,
    Unsupported = 5,
    Solver = 6,
    Io = 7,
    Panic = 8,
}

/// Opaque homomorphism handle.
pub struct SlHom {
    inner: UniformHom,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(err: &Error) -> SlStatus {
    match err {
        Error::InvalidInput(_) | Error::Json(_) => SlStatus::InvalidInput,
        Error::Domain(_) => SlStatus::Domain,
        Error::Scale { .. } => SlStatus::Scale,
        Error::Unsupported(_) => SlStatus::Unsupported,
        Error::Solver(_) => SlStatus::Solver,
        Error::Io(_) | Error::Csv(_) => SlStatus::Io,
    }
}

struct Fail(SlStatus, String);

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail(status_of(&e), e.to_string())
    }
}

fn null(what: &str) -> Fail {
    Fail(SlStatus::NullPointer, format!("{what} is null"))
}

fn guard(f: impl FnOnce() -> Result<(), Fail>) -> SlStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => SlStatus::Ok,
        Ok(Err(Fail(status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("panic inside sofic-lab".into());
            SlStatus::Panic
        }
    }
}

unsafe fn write_out<T>(out: *mut T, value: T) -> Result<(), Fail> {
    if out.is_null() {
        return Err(null("output pointer"));
    }
    out.write(value);
    Ok(())
}

unsafe fn coloring_arg(bits: *const u8, len: size_t) -> Result<Coloring, Fail> {
    if bits.is_null() {
        return Err(null("coloring"));
    }
    let slice = std::slice::from_raw_parts(bits, len);
    Ok(Coloring::new(slice.to_vec())?)
}

fn fraction(num: i64, den: i64) -> Result<Fraction, Fail> {
    if den == 0 {
        return Err(Fail(SlStatus::InvalidInput, "zero denominator".into()));
    }
    Ok(Fraction::new(num, den))
}

fn into_c_string(s: String) -> Result<*mut c_char, Fail> {
    CString::new(s)
        .map(CString::into_raw)
        .map_err(|_| Fail(SlStatus::InvalidInput, "string contains NUL".into()))
}

/// Message for the last failed call on this thread, or NULL. The pointer
/// stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn sl_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// # Safety
/// `s` must come from this library and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn sl_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Samples a uniform homomorphism with `d` generators of order `k` on `n` points.
///
/// # Safety
/// `out` must be a valid pointer to writable storage for one handle.
#[no_mangle]
pub unsafe extern "C" fn sl_hom_sample_uniform(
    d: size_t,
    k: size_t,
    n: size_t,
    seed: u64,
    stream: u64,
    out: *mut *mut SlHom,
) -> SlStatus {
    guard(|| {
        let params = ModelParams::uniform(d, k, n)?;
        let hom = sample_uniform_hom(&params, &mut RngState::new(seed, stream).rng())?;
        write_out(out, Box::into_raw(Box::new(SlHom { inner: hom })))
    })
}

/// Samples a homomorphism for which the equitable coloring `chi` (length `n`,
/// entries 0 or 1) is proper.
///
/// # Safety
/// `chi` must point to `n` readable bytes; `out` as in [`sl_hom_sample_uniform`].
#[no_mangle]
pub unsafe extern "C" fn sl_hom_sample_planted(
    d: size_t,
    k: size_t,
    n: size_t,
    chi: *const u8,
    seed: u64,
    stream: u64,
    out: *mut *mut SlHom,
) -> SlStatus {
    guard(|| {
        let params = ModelParams::planted(d, k, n)?;
        let chi = coloring_arg(chi, n)?;
        let hom = sample_planted_hom(&params, &chi, &mut RngState::new(seed, stream).rng())?;
        write_out(out, Box::into_raw(Box::new(SlHom { inner: hom })))
    })
}

/// Parses a JSON homomorphism record.
///
/// # Safety
/// `json` must be a NUL-terminated string; `out` as in [`sl_hom_sample_uniform`].
#[no_mangle]
pub unsafe extern "C" fn sl_hom_from_json(json: *const c_char, out: *mut *mut SlHom) -> SlStatus {
    guard(|| {
        if json.is_null() {
            return Err(null("json"));
        }
        let text = CStr::from_ptr(json)
            .to_str()
            .map_err(|_| Fail(SlStatus::InvalidInput, "json is not UTF-8".into()))?;
        let hom = UniformHom::from_json(text)?;
        write_out(out, Box::into_raw(Box::new(SlHom { inner: hom })))
    })
}

/// Serializes a handle to JSON; free the result with [`sl_string_free`].
///
/// # Safety
/// `hom` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn sl_hom_to_json(hom: *const SlHom, out: *mut *mut c_char) -> SlStatus {
    guard(|| {
        let hom = hom.as_ref().ok_or_else(|| null("hom"))?;
        let s = into_c_string(hom.inner.to_json()?)?;
        write_out(out, s)
    })
}

/// # Safety
/// `hom` must be NULL or a handle from this library that has not been freed.
#[no_mangle]
pub unsafe extern "C" fn sl_hom_free(hom: *mut SlHom) {
    if !hom.is_null() {
        drop(Box::from_raw(hom));
    }
}

/// Writes `(d, k, n)` of a handle.
///
/// # Safety
/// `hom` must be a live handle; each out pointer must be writable.
#[no_mangle]
pub unsafe extern "C" fn sl_hom_params(
    hom: *const SlHom,
    d: *mut size_t,
    k: *mut size_t,
    n: *mut size_t,
) -> SlStatus {
    guard(|| {
        let p = *hom.as_ref().ok_or_else(|| null("hom"))?.inner.params();
        write_out(d, p.d)?;
        write_out(k, p.k)?;
        write_out(n, p.n)
    })
}

/// Copies the permutation of generator `g` into `buf`, which holds `len >= n` entries.
///
/// # Safety
/// `hom` must be a live handle and `buf` must point to `len` writable entries.
#[no_mangle]
pub unsafe extern "C" fn sl_hom_image(
    hom: *const SlHom,
    g: size_t,
    buf: *mut size_t,
    len: size_t,
) -> SlStatus {
    guard(|| {
        let hom = &hom.as_ref().ok_or_else(|| null("hom"))?.inner;
        if buf.is_null() {
            return Err(null("buf"));
        }
        if g >= hom.params().d {
            return Err(Fail(SlStatus::InvalidInput, format!("generator {g} out of range")));
        }
        let image = hom.image(g);
        if len < image.len() {
            return Err(Fail(SlStatus::InvalidInput, format!("buffer holds {len}, need {}", image.len())));
        }
        ptr::copy_nonoverlapping(image.as_ptr(), buf, image.len());
        Ok(())
    })
}

/// Whether `chi` (length `n`) properly 2-colors the hypergraph of `hom`.
///
/// # Safety
/// `hom` must be a live handle, `chi` must hold `len` bytes, `out` writable.
#[no_mangle]
pub unsafe extern "C" fn sl_hom_is_proper(
    hom: *const SlHom,
    chi: *const u8,
    len: size_t,
    out: *mut bool,
) -> SlStatus {
    guard(|| {
        let hom = &hom.as_ref().ok_or_else(|| null("hom"))?.inner;
        let chi = coloring_arg(chi, len)?;
        write_out(out, is_proper(&build_hypergraph(hom), &chi)?)
    })
}

/// Exact count of colorings with at most `(eps_num/eps_den) n` monochromatic
/// edges, as a decimal string freed with [`sl_string_free`].
///
/// # Safety
/// `hom` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn sl_count_proper(
    hom: *const SlHom,
    eps_num: i64,
    eps_den: i64,
    out: *mut *mut c_char,
) -> SlStatus {
    guard(|| {
        let hom = &hom.as_ref().ok_or_else(|| null("hom"))?.inner;
        let eps = fraction(eps_num, eps_den)?;
        let report = count_proper(&build_hypergraph(hom), &eps)?;
        write_out(out, into_c_string(report.value.to_string())?)
    })
}

/// Size of the rigid set `C_l ∪ A_l \ A'_l` relative to `chi`.
///
/// # Safety
/// `hom` must be a live handle, `chi` must hold `len` bytes, `out` writable.
#[no_mangle]
pub unsafe extern "C" fn sl_rigid_set_size(
    hom: *const SlHom,
    chi: *const u8,
    len: size_t,
    level: size_t,
    out: *mut size_t,
) -> SlStatus {
    guard(|| {
        let hom = &hom.as_ref().ok_or_else(|| null("hom"))?.inner;
        let chi = coloring_arg(chi, len)?;
        let dec = core_decomposition(&build_hypergraph(hom), &chi, level)?;
        write_out(out, dec.level(level)?.rigid_len())
    })
}

/// First-moment exponent `f(d, k)`.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn sl_f_dk(d: u64, k: size_t, out: *mut c_double) -> SlStatus {
    guard(|| write_out(out, analytics::f_dk(d, k)?))
}

/// Second-moment exponent `ψ₀(δ)`.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn sl_psi0(delta: c_double, d: u64, k: size_t, out: *mut c_double) -> SlStatus {
    guard(|| write_out(out, analytics::psi0(delta, d, k)?))
}
