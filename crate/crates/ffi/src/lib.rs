//! C ABI over the `splitstudy` engine.
//!
//! Every fallible function returns an [`SsStatus`]. On failure the message
//! is available from [`ss_last_error_message`] on the same thread. Reports
//! are opaque handles released with [`ss_report_free`]; strings returned
//! through `char **` out-parameters are released with [`ss_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::PathBuf;

use splitstudy::report::{render, AnalysisReport, Selector};
use splitstudy::returns::{beta, covariance, variance, BetaVariant};
use splitstudy::synthetic::{generate_universe, write_universe, UniverseSpec};
use splitstudy::{emit, run_pipeline, Error, RunConfig};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SsStatus {
    Ok = 0,
    InputError = 1,
    NoAnalyzableSamples = 2,
    InternalError = 3,
    NullPointer = 4,
    InvalidArgument = 5,
    Panic = 6,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SsBetaVariant {
    Covariance = 0,
    Correlation = 1,
}

/// Opaque analysis report.
pub struct SsReport {
    inner: AnalysisReport,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: impl Into<String>) {
    let msg = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(msg).expect("nul bytes removed"));
}

fn status_of(e: &Error) -> SsStatus {
    match e.exit_code() {
        1 => SsStatus::InputError,
        2 => SsStatus::NoAnalyzableSamples,
        _ => SsStatus::InternalError,
    }
}

struct Fail(SsStatus, String);

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail(status_of(&e), e.to_string())
    }
}

fn guard(f: impl FnOnce() -> Result<(), Fail>) -> SsStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_error("");
            SsStatus::Ok
        }
        Ok(Err(Fail(status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("panic inside splitstudy");
            SsStatus::Panic
        }
    }
}

fn null(name: &str) -> Fail {
    Fail(SsStatus::NullPointer, format!("{name} is null"))
}

unsafe fn str_arg<'a>(p: *const c_char, name: &str) -> Result<&'a str, Fail> {
    if p.is_null() {
        return Err(null(name));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| Fail(SsStatus::InvalidArgument, format!("{name} is not valid UTF-8")))
}

unsafe fn opt_path(p: *const c_char, name: &str) -> Result<Option<PathBuf>, Fail> {
    if p.is_null() {
        Ok(None)
    } else {
        str_arg(p, name).map(|s| Some(PathBuf::from(s)))
    }
}

unsafe fn slice_arg<'a>(p: *const f64, n: usize, name: &str) -> Result<&'a [f64], Fail> {
    if n == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(null(name));
    }
    Ok(std::slice::from_raw_parts(p, n))
}

unsafe fn put<T>(out: *mut T, v: T, name: &str) -> Result<(), Fail> {
    if out.is_null() {
        return Err(null(name));
    }
    out.write(v);
    Ok(())
}

unsafe fn put_string(out: *mut *mut c_char, s: String) -> Result<(), Fail> {
    let c = CString::new(s).map_err(|_| Fail(SsStatus::InternalError, "output contains a nul byte".into()))?;
    put(out, c.into_raw(), "out")
}

unsafe fn put_report(out: *mut *mut SsReport, report: AnalysisReport) -> Result<(), Fail> {
    if out.is_null() {
        return Err(null("out"));
    }
    out.write(Box::into_raw(Box::new(SsReport { inner: report })));
    Ok(())
}

unsafe fn report_ref<'a>(r: *const SsReport) -> Result<&'a AnalysisReport, Fail> {
    r.as_ref().map(|r| &r.inner).ok_or_else(|| null("report"))
}

/// Message of the last failure on this thread; empty after a success.
/// The pointer stays valid until the next call into this library.
#[no_mangle]
pub extern "C" fn ss_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn ss_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Runs the pipeline from TOML config text.
///
/// # Safety
/// `config_toml` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ss_run_config(config_toml: *const c_char, out: *mut *mut SsReport) -> SsStatus {
    guard(|| {
        let cfg = RunConfig::from_toml(str_arg(config_toml, "config_toml")?)?;
        put_report(out, run_pipeline(&cfg)?)
    })
}

/// Runs the pipeline on CSV files with default settings. `fundamentals` and
/// `rates` may be null.
///
/// # Safety
/// Non-null string arguments must be NUL-terminated; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ss_run_files(
    bars: *const c_char,
    splits: *const c_char,
    fundamentals: *const c_char,
    rates: *const c_char,
    out: *mut *mut SsReport,
) -> SsStatus {
    guard(|| {
        let cfg = RunConfig {
            bars: Some(PathBuf::from(str_arg(bars, "bars")?)),
            splits: Some(PathBuf::from(str_arg(splits, "splits")?)),
            fundamentals: opt_path(fundamentals, "fundamentals")?,
            rates: opt_path(rates, "rates")?,
            ..Default::default()
        };
        put_report(out, run_pipeline(&cfg)?)
    })
}

/// Runs the pipeline on the synthetic nine-sample universe for `seed`.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ss_run_synthetic(seed: u64, out: *mut *mut SsReport) -> SsStatus {
    guard(|| {
        let cfg = RunConfig {
            seed: Some(seed),
            ..Default::default()
        };
        put_report(out, run_pipeline(&cfg)?)
    })
}

/// # Safety
/// `report` must come from this library and not be freed yet; null is ignored.
#[no_mangle]
pub unsafe extern "C" fn ss_report_free(report: *mut SsReport) {
    if !report.is_null() {
        drop(Box::from_raw(report));
    }
}

/// Number of analyzed samples, or 0 for a null handle.
///
/// # Safety
/// `report` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn ss_report_sample_count(report: *const SsReport) -> usize {
    report.as_ref().map_or(0, |r| r.inner.samples.len())
}

/// Number of excluded samples, or 0 for a null handle.
///
/// # Safety
/// `report` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn ss_report_exclusion_count(report: *const SsReport) -> usize {
    report.as_ref().map_or(0, |r| r.inner.exclusions.len())
}

/// Renders one selector (`json`, `table1`, `fig1`, ...) into a new string.
///
/// # Safety
/// `report` must be a live handle, `selector` NUL-terminated, `out` writable.
#[no_mangle]
pub unsafe extern "C" fn ss_report_render(
    report: *const SsReport,
    selector: *const c_char,
    out: *mut *mut c_char,
) -> SsStatus {
    guard(|| {
        let r = report_ref(report)?;
        let sel: Selector = str_arg(selector, "selector")?.parse()?;
        put_string(out, render(r, sel)?.contents)
    })
}

/// Writes the comma-separated `selectors` (or `all`) into directory `dir`.
///
/// # Safety
/// `report` must be a live handle; strings must be NUL-terminated.
#[no_mangle]
pub unsafe extern "C" fn ss_report_emit(
    report: *const SsReport,
    dir: *const c_char,
    selectors: *const c_char,
) -> SsStatus {
    guard(|| {
        let r = report_ref(report)?;
        let dir = PathBuf::from(str_arg(dir, "dir")?);
        let list = str_arg(selectors, "selectors")?;
        let sels = if list.trim() == "all" {
            Selector::all()
        } else {
            list.split(',').map(|s| s.trim().parse()).collect::<splitstudy::Result<Vec<_>>>()?
        };
        emit(r, &dir, &sels)?;
        Ok(())
    })
}

/// # Safety
/// `s` must be null or a string returned by this library.
#[no_mangle]
pub unsafe extern "C" fn ss_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Market-value factor `price_factor * split_ratio`.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ss_value_factor(price_factor: f64, split_ratio: f64, out: *mut f64) -> SsStatus {
    guard(|| {
        let v = splitstudy::price::value_factor(price_factor, split_ratio)?;
        put(out, v.value_factor, "out")
    })
}

/// Population variance of `n` values.
///
/// # Safety
/// `xs` must point to `n` doubles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ss_variance(xs: *const f64, n: usize, out: *mut f64) -> SsStatus {
    guard(|| put(out, variance(slice_arg(xs, n, "xs")?)?, "out"))
}

/// Population covariance of two length-`n` series.
///
/// # Safety
/// `xs` and `ys` must each point to `n` doubles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ss_covariance(xs: *const f64, ys: *const f64, n: usize, out: *mut f64) -> SsStatus {
    guard(|| {
        let v = covariance(slice_arg(xs, n, "xs")?, slice_arg(ys, n, "ys")?)?;
        put(out, v, "out")
    })
}

/// Beta of `stock` returns against `reference` returns.
///
/// # Safety
/// `stock` and `reference` must each point to `n` doubles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ss_beta(
    stock: *const f64,
    reference: *const f64,
    n: usize,
    variant: SsBetaVariant,
    out: *mut f64,
) -> SsStatus {
    guard(|| {
        let variant = match variant {
            SsBetaVariant::Covariance => BetaVariant::Covariance,
            SsBetaVariant::Correlation => BetaVariant::Correlation,
        };
        let b = beta(slice_arg(stock, n, "stock")?, slice_arg(reference, n, "reference")?, variant)?;
        put(out, b.beta, "out")
    })
}

/// Writes the synthetic nine-sample universe for `seed` as CSV files in `dir`.
///
/// # Safety
/// `dir` must be NUL-terminated.
#[no_mangle]
pub unsafe extern "C" fn ss_generate_universe(seed: u64, dir: *const c_char) -> SsStatus {
    guard(|| {
        let dir = PathBuf::from(str_arg(dir, "dir")?);
        let u = generate_universe(&UniverseSpec {
            seed,
            ..Default::default()
        })?;
        write_universe(&u, &dir)?;
        Ok(())
    })
}
