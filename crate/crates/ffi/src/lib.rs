//! C ABI over `cmv-scatter`.
//!
//! Objects cross the boundary as opaque handles created by `*_new`/`*_from_*`
//! functions and released with the matching `*_free`. Every fallible call
//! returns a [`CmvStatus`]; on failure, [`cmv_last_error_message`] describes
//! the most recent error on the calling thread. Complex arrays are passed as
//! separate real and imaginary `double` arrays.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use cmv_scatter::circle::{CircleGrid, LaurentSeries, ScatteringFunction};
use cmv_scatter::config::RunConfig;
use cmv_scatter::families::Family;
use cmv_scatter::scattering::{roundtrip, DirectScattering};
use cmv_scatter::verblunsky::{inverse_scattering, VerblunskySequence};
use cmv_scatter::{Error, C64};

/// Result of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CmvStatus {
    Ok = 0,
    /// A required pointer argument was null.
    NullPointer = 1,
    /// Malformed arguments: bad sizes, unparsable strings, invalid configuration.
    InvalidInput = 2,
    /// Data outside the domain of the method (Szegő failure, |α| ≥ 1, ...).
    Domain = 3,
    /// The computation itself failed (conditioning, resolution, solver).
    Numerical = 4,
    /// A Rust panic was caught at the boundary.
    Panic = 5,
}

/// Opaque scattering function sampled on a grid.
pub struct CmvScattering {
    inner: ScatteringFunction,
}

/// Opaque sequence of Verblunsky coefficients.
pub struct CmvSequence {
    inner: VerblunskySequence,
}

/// Numerical parameters. Obtain defaults from [`cmv_config_default`].
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct CmvConfig {
    /// Inverse scattering computes levels `-levels..=levels`.
    pub levels: i64,
    pub section_start: usize,
    pub section_cap: usize,
    pub section_tol: f64,
    /// CMV truncation half-width for direct scattering.
    pub window: usize,
    /// Neumann depth of the wandering-vector approximation.
    pub depth: usize,
    /// Smallest accepted `1 - sup |R|`.
    pub margin_min: f64,
}

impl From<&RunConfig> for CmvConfig {
    fn from(c: &RunConfig) -> Self {
        Self {
            levels: c.levels,
            section_start: c.section_start,
            section_cap: c.section_cap,
            section_tol: c.section_tol,
            window: c.window,
            depth: c.depth,
            margin_min: c.margin_min,
        }
    }
}

impl CmvConfig {
    fn to_run(self) -> Result<RunConfig, Failure> {
        let cfg = RunConfig {
            levels: self.levels,
            section_start: self.section_start,
            section_cap: self.section_cap,
            section_tol: self.section_tol,
            window: self.window,
            depth: self.depth,
            margin_min: self.margin_min,
            ..RunConfig::default()
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

enum Failure {
    Null(&'static str),
    Core(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Core(e)
    }
}

fn invalid(msg: impl Into<String>) -> Failure {
    Failure::Core(Error::Input(msg.into()))
}

fn classify(e: &Error) -> CmvStatus {
    match e {
        Error::AtLevel { source, .. } => classify(source),
        Error::Input(_) | Error::Parse { .. } | Error::Io(_) => CmvStatus::InvalidInput,
        Error::Domain(_) => CmvStatus::Domain,
        _ => CmvStatus::Numerical,
    }
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_last_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> CmvStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_last_error(String::new());
            CmvStatus::Ok
        }
        Ok(Err(Failure::Null(what))) => {
            set_last_error(format!("null pointer: {what}"));
            CmvStatus::NullPointer
        }
        Ok(Err(Failure::Core(e))) => {
            set_last_error(e.to_string());
            classify(&e)
        }
        Err(p) => {
            let msg = p
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| p.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_last_error(format!("panic: {msg}"));
            CmvStatus::Panic
        }
    }
}

unsafe fn slice<'a, T>(p: *const T, len: usize, what: &'static str) -> Result<&'a [T], Failure> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(Failure::Null(what));
    }
    Ok(std::slice::from_raw_parts(p, len))
}

unsafe fn slice_mut<'a, T>(
    p: *mut T,
    len: usize,
    what: &'static str,
) -> Result<&'a mut [T], Failure> {
    if len == 0 {
        return Ok(&mut []);
    }
    if p.is_null() {
        return Err(Failure::Null(what));
    }
    Ok(std::slice::from_raw_parts_mut(p, len))
}

unsafe fn handle<'a, T>(p: *const T, what: &'static str) -> Result<&'a T, Failure> {
    p.as_ref().ok_or(Failure::Null(what))
}

unsafe fn complexes(re: *const f64, im: *const f64, len: usize) -> Result<Vec<C64>, Failure> {
    let re = slice(re, len, "re")?;
    let im = slice(im, len, "im")?;
    Ok(re.iter().zip(im).map(|(a, b)| C64::new(*a, *b)).collect())
}

unsafe fn write_complexes(values: &[C64], re: *mut f64, im: *mut f64) -> Result<(), Failure> {
    let re = slice_mut(re, values.len(), "re_out")?;
    let im = slice_mut(im, values.len(), "im_out")?;
    for (k, v) in values.iter().enumerate() {
        re[k] = v.re;
        im[k] = v.im;
    }
    Ok(())
}

unsafe fn store<T>(out: *mut *mut T, value: T) -> Result<(), Failure> {
    if out.is_null() {
        return Err(Failure::Null("out"));
    }
    *out = Box::into_raw(Box::new(value));
    Ok(())
}

unsafe fn config_or_default(cfg: *const CmvConfig) -> Result<RunConfig, Failure> {
    match cfg.as_ref() {
        Some(c) => c.to_run(),
        None => Ok(RunConfig::default()),
    }
}

/// Message for the last failed call on this thread; empty after a success.
/// The pointer stays valid until the next call into this library on the same thread.
#[no_mangle]
pub extern "C" fn cmv_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn cmv_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Default numerical parameters.
#[no_mangle]
pub extern "C" fn cmv_config_default() -> CmvConfig {
    CmvConfig::from(&RunConfig::default())
}

/// Builds a scattering function from Fourier coefficients `c_j`, `j = indices[i]`,
/// sampled on a grid of `grid_size` nodes (a power of two, at least 8).
///
/// # Safety
/// `indices`, `re` and `im` must each point to `len` readable elements; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn cmv_scattering_from_coeffs(
    grid_size: usize,
    indices: *const i64,
    re: *const f64,
    im: *const f64,
    len: usize,
    out: *mut *mut CmvScattering,
) -> CmvStatus {
    guard(|| {
        let idx = slice(indices, len, "indices")?;
        let vals = complexes(re, im, len)?;
        let entries: Vec<(i64, C64)> = idx.iter().copied().zip(vals).collect();
        if entries.is_empty() {
            return Err(invalid("no coefficients given"));
        }
        let series = LaurentSeries::from_entries(&entries)?;
        let inner = ScatteringFunction::from_coeffs(CircleGrid::new(grid_size)?, &series)?;
        store(out, CmvScattering { inner })
    })
}

/// Builds a scattering function from `grid_size` samples at the nodes `e^{2πik/grid_size}`.
///
/// # Safety
/// `re` and `im` must each point to `grid_size` readable elements; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn cmv_scattering_from_samples(
    grid_size: usize,
    re: *const f64,
    im: *const f64,
    out: *mut *mut CmvScattering,
) -> CmvStatus {
    guard(|| {
        let grid = CircleGrid::new(grid_size)?;
        let inner = ScatteringFunction::from_samples(grid, complexes(re, im, grid_size)?)?;
        store(out, CmvScattering { inner })
    })
}

/// Builds a built-in family from a spec such as `"random:8,0.2,1"`.
///
/// # Safety
/// `spec` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn cmv_scattering_from_family(
    spec: *const c_char,
    grid_size: usize,
    out: *mut *mut CmvScattering,
) -> CmvStatus {
    guard(|| {
        if spec.is_null() {
            return Err(Failure::Null("spec"));
        }
        let s = CStr::from_ptr(spec)
            .to_str()
            .map_err(|_| invalid("family spec is not UTF-8"))?;
        let inner = s.parse::<Family>()?.build(CircleGrid::new(grid_size)?)?;
        store(out, CmvScattering { inner })
    })
}

/// # Safety
/// `r` must be a live handle or null; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn cmv_scattering_grid_size(
    r: *const CmvScattering,
    out: *mut usize,
) -> CmvStatus {
    guard(|| {
        let r = handle(r, "r")?;
        *out.as_mut().ok_or(Failure::Null("out"))? = r.inner.grid().size();
        Ok(())
    })
}

/// Copies the grid samples; `len` must equal the grid size.
///
/// # Safety
/// `re_out` and `im_out` must each have room for `len` elements.
#[no_mangle]
pub unsafe extern "C" fn cmv_scattering_samples(
    r: *const CmvScattering,
    re_out: *mut f64,
    im_out: *mut f64,
    len: usize,
) -> CmvStatus {
    guard(|| {
        let r = handle(r, "r")?;
        let s = r.inner.samples();
        if len != s.len() {
            return Err(invalid(format!(
                "buffer holds {len} values, grid has {}",
                s.len()
            )));
        }
        write_complexes(s, re_out, im_out)
    })
}

/// Fourier coefficient `c_j`.
///
/// # Safety
/// `r` must be a live handle; `re_out` and `im_out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn cmv_scattering_coefficient(
    r: *const CmvScattering,
    j: i64,
    re_out: *mut f64,
    im_out: *mut f64,
) -> CmvStatus {
    guard(|| {
        let c = handle(r, "r")?.inner.coefficient(j)?;
        write_complexes(&[c], re_out, im_out)
    })
}

/// # Safety
/// `r` must come from this library and not be used afterwards. Null is ignored.
#[no_mangle]
pub unsafe extern "C" fn cmv_scattering_free(r: *mut CmvScattering) {
    if !r.is_null() {
        drop(Box::from_raw(r));
    }
}

/// Sequence `α_lo, ..., α_{lo+len-1}`; every `|α|` must be below 1.
///
/// # Safety
/// `re` and `im` must each point to `len` readable elements; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn cmv_sequence_new(
    lo: i64,
    re: *const f64,
    im: *const f64,
    len: usize,
    out: *mut *mut CmvSequence,
) -> CmvStatus {
    guard(|| {
        let inner = VerblunskySequence::new(lo, complexes(re, im, len)?)?;
        store(out, CmvSequence { inner })
    })
}

/// First level and number of coefficients.
///
/// # Safety
/// `s` must be a live handle; `lo_out` and `len_out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn cmv_sequence_bounds(
    s: *const CmvSequence,
    lo_out: *mut i64,
    len_out: *mut usize,
) -> CmvStatus {
    guard(|| {
        let s = handle(s, "s")?;
        *lo_out.as_mut().ok_or(Failure::Null("lo_out"))? = s.inner.lo;
        *len_out.as_mut().ok_or(Failure::Null("len_out"))? = s.inner.alphas.len();
        Ok(())
    })
}

/// `α_j`; zero outside the stored range.
///
/// # Safety
/// `s` must be a live handle; `re_out` and `im_out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn cmv_sequence_alpha(
    s: *const CmvSequence,
    j: i64,
    re_out: *mut f64,
    im_out: *mut f64,
) -> CmvStatus {
    guard(|| write_complexes(&[handle(s, "s")?.inner.get(j)], re_out, im_out))
}

/// `a_j(0)` recorded by inverse scattering for `j = lo..=lo+len`.
/// Fails with `InvalidInput` when the sequence carries none at `j`.
///
/// # Safety
/// `s` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn cmv_sequence_a0(
    s: *const CmvSequence,
    j: i64,
    out: *mut f64,
) -> CmvStatus {
    guard(|| {
        let a0 = handle(s, "s")?
            .inner
            .a0(j)
            .ok_or_else(|| invalid(format!("no a0 recorded at level {j}")))?;
        *out.as_mut().ok_or(Failure::Null("out"))? = a0;
        Ok(())
    })
}

/// # Safety
/// `s` must come from this library and not be used afterwards. Null is ignored.
#[no_mangle]
pub unsafe extern "C" fn cmv_sequence_free(s: *mut CmvSequence) {
    if !s.is_null() {
        drop(Box::from_raw(s));
    }
}

/// Inverse scattering: `α_j` for `j = -levels..=levels`. `cfg` may be null for defaults.
///
/// # Safety
/// `r` must be a live handle, `cfg` null or readable, `out` writable.
#[no_mangle]
pub unsafe extern "C" fn cmv_inverse(
    r: *const CmvScattering,
    cfg: *const CmvConfig,
    out: *mut *mut CmvSequence,
) -> CmvStatus {
    guard(|| {
        let r = handle(r, "r")?;
        let cfg = config_or_default(cfg)?;
        let inv = inverse_scattering(&r.inner, &cfg.inverse())?;
        store(
            out,
            CmvSequence {
                inner: inv.sequence,
            },
        )
    })
}

/// Evaluates the harmonic extension of `R` at `n` points inside the unit disk.
///
/// # Safety
/// Input arrays must hold `n` elements, output arrays room for `n`.
#[no_mangle]
pub unsafe extern "C" fn cmv_direct(
    s: *const CmvSequence,
    cfg: *const CmvConfig,
    z_re: *const f64,
    z_im: *const f64,
    n: usize,
    re_out: *mut f64,
    im_out: *mut f64,
) -> CmvStatus {
    guard(|| {
        let s = handle(s, "s")?;
        let cfg = config_or_default(cfg)?;
        let z = complexes(z_re, z_im, n)?;
        let values = DirectScattering::new(&s.inner, &cfg.direct())?.evaluate_many(&z)?;
        write_complexes(&values, re_out, im_out)
    })
}

/// Boundary values of `R` at the `grid_size` grid nodes.
///
/// # Safety
/// Output arrays must have room for `grid_size` elements.
#[no_mangle]
pub unsafe extern "C" fn cmv_boundary_values(
    s: *const CmvSequence,
    cfg: *const CmvConfig,
    grid_size: usize,
    re_out: *mut f64,
    im_out: *mut f64,
) -> CmvStatus {
    guard(|| {
        let s = handle(s, "s")?;
        let cfg = config_or_default(cfg)?;
        let grid = CircleGrid::new(grid_size)?;
        let values = DirectScattering::new(&s.inner, &cfg.direct())?.boundary_values(grid)?;
        write_complexes(&values, re_out, im_out)
    })
}

/// Inverse followed by direct scattering; writes the sup-norm boundary error
/// at the base parameters and whether it does not grow under one doubling.
///
/// # Safety
/// `r` must be a live handle, `cfg` null or readable, the outputs writable.
#[no_mangle]
pub unsafe extern "C" fn cmv_roundtrip(
    r: *const CmvScattering,
    cfg: *const CmvConfig,
    sup_error_out: *mut f64,
    non_increasing_out: *mut bool,
) -> CmvStatus {
    guard(|| {
        let r = handle(r, "r")?;
        let cfg = config_or_default(cfg)?;
        let rep = roundtrip(&r.inner, &cfg.roundtrip())?;
        *sup_error_out
            .as_mut()
            .ok_or(Failure::Null("sup_error_out"))? = rep.sup_error;
        *non_increasing_out
            .as_mut()
            .ok_or(Failure::Null("non_increasing_out"))? = rep.non_increasing;
        Ok(())
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn message() -> String {
        unsafe { CStr::from_ptr(cmv_last_error_message()) }
            .to_string_lossy()
            .into_owned()
    }

    #[test]
    fn classification_looks_through_levels() {
        let e = Error::Conditioning("x".into()).at_level(3);
        assert_eq!(classify(&e), CmvStatus::Numerical);
        assert_eq!(
            classify(&Error::Domain("x".into()).at_level(1)),
            CmvStatus::Domain
        );
        assert_eq!(classify(&Error::Input("x".into())), CmvStatus::InvalidInput);
    }

    #[test]
    fn panics_are_caught_and_reported() {
        let s = guard(|| panic!("boom"));
        assert_eq!(s, CmvStatus::Panic);
        assert_eq!(message(), "panic: boom");
        assert_eq!(guard(|| Ok(())), CmvStatus::Ok);
        assert_eq!(message(), "");
    }

    #[test]
    fn default_config_roundtrips() {
        let run = cmv_config_default().to_run().ok().unwrap();
        assert_eq!(run, RunConfig::default());
    }
}
