//! C ABI for the nsopt solvers.
//!
//! Objects cross the boundary as opaque handles that the caller releases
//! with the matching `*_free` function. Fallible calls return an
//! [`NsoptStatus`]; on failure the message is kept per thread and can be
//! copied out with [`nsopt_last_error_message`].

#![allow(clippy::missing_safety_doc)]

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;
use std::sync::Arc;

use nsopt::data::{load_libsvm, parse_libsvm, Dataset};
use nsopt::model::{FeasibleRegion, Problem, SpectralBounds, Vector};
use nsopt::problems::{HingeLossSvm, HingeParams};
use nsopt::solver::{run, spectral_update, Method, RunTrace, SolverConfig};
use nsopt::Error;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NsoptStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    ParseError = 3,
    ConfigError = 4,
    IoError = 5,
    RuntimeError = 6,
    Panic = 7,
}

/// A loaded binary-classification dataset.
pub struct NsoptDataset {
    inner: Arc<Dataset>,
}

/// A hinge-loss SVM objective bound to a dataset.
pub struct NsoptProblem {
    inner: HingeLossSvm,
}

/// The result of one solver run.
pub struct NsoptTrace {
    inner: RunTrace,
}

/// One trace row. Missing values (`alpha` at `k = 0`, untracked `f_true`)
/// are NaN.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NsoptRecord {
    pub k: u64,
    pub n_k: u64,
    pub alpha: f64,
    pub zeta: f64,
    pub fev_cum: u64,
    pub f_saa: f64,
    pub f_true: f64,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let msg = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(CString::new(msg).expect("NULs removed")));
}

fn status_of(err: &Error) -> NsoptStatus {
    match err {
        Error::Usage(_) => NsoptStatus::InvalidArgument,
        Error::Parse { .. } | Error::Json(_) | Error::Csv(_) => NsoptStatus::ParseError,
        Error::Config(_) => NsoptStatus::ConfigError,
        Error::Io(_) => NsoptStatus::IoError,
    }
}

struct Fail(NsoptStatus, String);

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail(status_of(&e), e.to_string())
    }
}

fn guard(f: impl FnOnce() -> Result<(), Fail>) -> NsoptStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => NsoptStatus::Ok,
        Ok(Err(Fail(status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic");
            NsoptStatus::Panic
        }
    }
}

fn null(what: &str) -> Fail {
    Fail(NsoptStatus::NullPointer, format!("{what} is null"))
}

unsafe fn str_arg<'a>(p: *const c_char, what: &str) -> Result<&'a str, Fail> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| Fail(NsoptStatus::InvalidArgument, format!("{what} is not UTF-8")))
}

unsafe fn slice_arg<'a>(p: *const f64, len: usize, what: &str) -> Result<&'a [f64], Fail> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(null(what));
    }
    Ok(std::slice::from_raw_parts(p, len))
}

unsafe fn handle<'a, T>(p: *const T, what: &str) -> Result<&'a T, Fail> {
    p.as_ref().ok_or_else(|| null(what))
}

unsafe fn out_arg<'a, T>(p: *mut T, what: &str) -> Result<&'a mut T, Fail> {
    p.as_mut().ok_or_else(|| null(what))
}

/// Copies the calling thread's last error message into `buf` (NUL
/// terminated, truncated to `len`). Returns the full message length
/// including the terminator, or 0 when there is no error.
#[no_mangle]
pub unsafe extern "C" fn nsopt_last_error_message(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| {
        let e = e.borrow();
        let Some(msg) = e.as_ref() else { return 0 };
        let bytes = msg.as_bytes_with_nul();
        if !buf.is_null() && len > 0 {
            let n = bytes.len().min(len);
            ptr::copy_nonoverlapping(bytes.as_ptr() as *const c_char, buf, n);
            *buf.add(n - 1) = 0;
        }
        bytes.len()
    })
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn nsopt_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}

/// Loads a LIBSVM file; `.gz` files are decompressed.
#[no_mangle]
pub unsafe extern "C" fn nsopt_dataset_load(
    path: *const c_char,
    out: *mut *mut NsoptDataset,
) -> NsoptStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        *out = ptr::null_mut();
        let data = load_libsvm(Path::new(str_arg(path, "path")?))?;
        *out = Box::into_raw(Box::new(NsoptDataset { inner: Arc::new(data) }));
        Ok(())
    })
}

/// Parses LIBSVM text held in memory.
#[no_mangle]
pub unsafe extern "C" fn nsopt_dataset_parse(
    text: *const c_char,
    out: *mut *mut NsoptDataset,
) -> NsoptStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        *out = ptr::null_mut();
        let data = parse_libsvm(str_arg(text, "text")?.as_bytes())?;
        *out = Box::into_raw(Box::new(NsoptDataset { inner: Arc::new(data) }));
        Ok(())
    })
}

/// Number of rows; 0 for a null handle.
#[no_mangle]
pub unsafe extern "C" fn nsopt_dataset_rows(dataset: *const NsoptDataset) -> usize {
    dataset.as_ref().map_or(0, |d| d.inner.n_rows())
}

/// Number of feature columns; 0 for a null handle.
#[no_mangle]
pub unsafe extern "C" fn nsopt_dataset_cols(dataset: *const NsoptDataset) -> usize {
    dataset.as_ref().map_or(0, |d| d.inner.n_cols())
}

#[no_mangle]
pub unsafe extern "C" fn nsopt_dataset_free(dataset: *mut NsoptDataset) {
    if !dataset.is_null() {
        drop(Box::from_raw(dataset));
    }
}

/// Builds the regularised hinge-loss objective on `dataset`. The dataset
/// handle may be freed afterwards.
#[no_mangle]
pub unsafe extern "C" fn nsopt_problem_hinge_new(
    dataset: *const NsoptDataset,
    reg_coeff: f64,
    out: *mut *mut NsoptProblem,
) -> NsoptStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        *out = ptr::null_mut();
        let d = handle(dataset, "dataset")?;
        let params = HingeParams { reg_coeff, ..HingeParams::default() };
        params.validate()?;
        let inner = HingeLossSvm::new(d.inner.clone(), params)?;
        *out = Box::into_raw(Box::new(NsoptProblem { inner }));
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn nsopt_problem_dim(problem: *const NsoptProblem) -> usize {
    problem.as_ref().map_or(0, |p| p.inner.dim())
}

/// Full-sample objective value at `x`.
#[no_mangle]
pub unsafe extern "C" fn nsopt_problem_value(
    problem: *const NsoptProblem,
    x: *const f64,
    dim: usize,
    out: *mut f64,
) -> NsoptStatus {
    guard(|| {
        let p = handle(problem, "problem")?;
        let out = out_arg(out, "out")?;
        let x = Vector::new(slice_arg(x, dim, "x")?.to_vec())?;
        *out = p.inner.full_value(&x)?;
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn nsopt_problem_free(problem: *mut NsoptProblem) {
    if !problem.is_null() {
        drop(Box::from_raw(problem));
    }
}

/// Runs `method` (e.g. "ls-sps") on `problem` over the ball
/// `||x||^2 <= radius_sq`. `config_json` is an optional solver config
/// document (NULL for defaults); `seed` overrides its seed.
#[no_mangle]
pub unsafe extern "C" fn nsopt_run(
    problem: *const NsoptProblem,
    method: *const c_char,
    config_json: *const c_char,
    seed: u64,
    budget: u64,
    radius_sq: f64,
    out: *mut *mut NsoptTrace,
) -> NsoptStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        *out = ptr::null_mut();
        let p = handle(problem, "problem")?;
        let method: Method = str_arg(method, "method")?.parse()?;
        let base: SolverConfig = if config_json.is_null() {
            SolverConfig::default()
        } else {
            serde_json::from_str(str_arg(config_json, "config_json")?)
                .map_err(|e| Fail(NsoptStatus::ConfigError, format!("solver config: {e}")))?
        };
        let mut cfg = method.configure(&base);
        cfg.seed = seed;
        let region = FeasibleRegion::ball(radius_sq)?;
        let trace = run(&p.inner, &region, &cfg, budget).map_err(|e| match e {
            e @ (Error::Config(_) | Error::Usage(_)) => Fail::from(e),
            e => Fail(NsoptStatus::RuntimeError, e.to_string()),
        })?;
        *out = Box::into_raw(Box::new(NsoptTrace { inner: trace }));
        Ok(())
    })
}

/// Number of records, including the initial one; 0 for a null handle.
#[no_mangle]
pub unsafe extern "C" fn nsopt_trace_len(trace: *const NsoptTrace) -> usize {
    trace.as_ref().map_or(0, |t| t.inner.records.len())
}

#[no_mangle]
pub unsafe extern "C" fn nsopt_trace_record(
    trace: *const NsoptTrace,
    index: usize,
    out: *mut NsoptRecord,
) -> NsoptStatus {
    guard(|| {
        let t = handle(trace, "trace")?;
        let out = out_arg(out, "out")?;
        let r = t.inner.records.get(index).ok_or_else(|| {
            Fail(
                NsoptStatus::InvalidArgument,
                format!("record {index} out of range (len {})", t.inner.records.len()),
            )
        })?;
        *out = NsoptRecord {
            k: r.k,
            n_k: r.n_k as u64,
            alpha: r.alpha.unwrap_or(f64::NAN),
            zeta: r.zeta,
            fev_cum: r.fev_cum,
            f_saa: r.f_saa,
            f_true: r.f_true.unwrap_or(f64::NAN),
        };
        Ok(())
    })
}

/// Copies the final iterate into `buf`, which must hold `dim` values.
#[no_mangle]
pub unsafe extern "C" fn nsopt_trace_final_point(
    trace: *const NsoptTrace,
    buf: *mut f64,
    dim: usize,
) -> NsoptStatus {
    guard(|| {
        let t = handle(trace, "trace")?;
        let x = t.inner.x_final.as_slice();
        if dim != x.len() {
            return Err(Fail(
                NsoptStatus::InvalidArgument,
                format!("buffer holds {dim} values, point has {}", x.len()),
            ));
        }
        if buf.is_null() {
            return Err(null("buf"));
        }
        std::slice::from_raw_parts_mut(buf, dim).copy_from_slice(x);
        Ok(())
    })
}

/// Writes the trace as schema-tagged CSV.
#[no_mangle]
pub unsafe extern "C" fn nsopt_trace_write_csv(
    trace: *const NsoptTrace,
    path: *const c_char,
) -> NsoptStatus {
    guard(|| {
        let t = handle(trace, "trace")?;
        let f = std::fs::File::create(str_arg(path, "path")?).map_err(Error::from)?;
        t.inner.write_csv(std::io::BufWriter::new(f))?;
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn nsopt_trace_free(trace: *mut NsoptTrace) {
    if !trace.is_null() {
        drop(Box::from_raw(trace));
    }
}

/// Safeguarded spectral coefficient `clamp(s's / s'y)` for step `s` and
/// subgradient difference `y`.
#[no_mangle]
pub unsafe extern "C" fn nsopt_spectral_update(
    s: *const f64,
    y: *const f64,
    dim: usize,
    zeta_min: f64,
    zeta_max: f64,
    previous: f64,
    out: *mut f64,
) -> NsoptStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        let bounds = SpectralBounds::new(zeta_min, zeta_max)?;
        let s = Vector::new(slice_arg(s, dim, "s")?.to_vec())?;
        let y = Vector::new(slice_arg(y, dim, "y")?.to_vec())?;
        *out = spectral_update(&s, &y, &bounds, previous);
        Ok(())
    })
}

/// Projects `x` in place onto the ball `||x||^2 <= radius_sq`.
#[no_mangle]
pub unsafe extern "C" fn nsopt_project_ball(x: *mut f64, dim: usize, radius_sq: f64) -> NsoptStatus {
    guard(|| {
        let region = FeasibleRegion::ball(radius_sq)?;
        if dim > 0 && x.is_null() {
            return Err(null("x"));
        }
        if dim == 0 {
            return Ok(());
        }
        let buf = std::slice::from_raw_parts_mut(x, dim);
        let y = region.project(&Vector::new(buf.to_vec())?)?;
        buf.copy_from_slice(y.as_slice());
        Ok(())
    })
}

/// Projects `x` in place onto the box `[lower, upper]`.
#[no_mangle]
pub unsafe extern "C" fn nsopt_project_box(
    x: *mut f64,
    lower: *const f64,
    upper: *const f64,
    dim: usize,
) -> NsoptStatus {
    guard(|| {
        let lo = Vector::new(slice_arg(lower, dim, "lower")?.to_vec())?;
        let hi = Vector::new(slice_arg(upper, dim, "upper")?.to_vec())?;
        let region = FeasibleRegion::boxed(lo, hi)?;
        if dim == 0 {
            return Ok(());
        }
        if x.is_null() {
            return Err(null("x"));
        }
        let buf = std::slice::from_raw_parts_mut(x, dim);
        let y = region.project(&Vector::new(buf.to_vec())?)?;
        buf.copy_from_slice(y.as_slice());
        Ok(())
    })
}
