//! C ABI over the `ngcenter` engine.
//!
//! Every entry point returns an [`NgStatus`]; on failure the message is
//! available from [`ng_last_error`] until the next call on the same thread.
//! Handles are opaque and owned by the caller, who releases them with the
//! matching `_free` function. Strings returned as `char *` are released with
//! [`ng_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use ngcenter::centerdata::ModularData;
use ngcenter::pipeline::{self as pl, PipelineConfig, PipelineOutcome, Source, Stage};
use ngcenter::superfactor::SuperModularData;
use ngcenter::Error;

/// Result of every call.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NgStatus {
    Ok = 0,
    /// A comparison ran and did not match.
    Mismatch = 1,
    /// A pipeline stage failed.
    StageFailure = 2,
    /// Bad arguments or configuration.
    InvalidArgument = 3,
    NullPointer = 4,
    OutOfRange = 5,
    Io = 6,
    Panic = 7,
}

/// Modular data `(S, T)` of a modular category.
pub struct NgModularData(ModularData);

/// Reduced super-modular data `(Ŝ, T̂²)`.
pub struct NgSuperData(SuperModularData);

/// Outcome of a pipeline run.
pub struct NgPipeline(PipelineOutcome);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(err: &Error) -> NgStatus {
    match err {
        Error::Io(_) | Error::Json(_) => NgStatus::Io,
        e if pl::error_exit_code(e) == 2 => NgStatus::StageFailure,
        _ => NgStatus::InvalidArgument,
    }
}

fn guard(f: impl FnOnce() -> Result<NgStatus, (NgStatus, String)>) -> NgStatus {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(s)) => s,
        Ok(Err((s, msg))) => {
            set_error(msg);
            s
        }
        Err(_) => {
            set_error("internal panic".into());
            NgStatus::Panic
        }
    }
}

fn fail(err: Error) -> (NgStatus, String) {
    (status_of(&err), err.to_string())
}

unsafe fn read_str<'a>(p: *const c_char, what: &str) -> Result<&'a str, (NgStatus, String)> {
    if p.is_null() {
        return Err((NgStatus::NullPointer, format!("{what} is null")));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| (NgStatus::InvalidArgument, format!("{what} is not UTF-8")))
}

unsafe fn opt_str<'a>(p: *const c_char, what: &str) -> Result<Option<&'a str>, (NgStatus, String)> {
    if p.is_null() {
        Ok(None)
    } else {
        read_str(p, what).map(Some)
    }
}

unsafe fn handle<'a, T>(h: *const T) -> Result<&'a T, (NgStatus, String)> {
    h.as_ref().ok_or((NgStatus::NullPointer, "handle is null".into()))
}

unsafe fn write_out<T>(out: *mut T, v: T) -> Result<(), (NgStatus, String)> {
    if out.is_null() {
        return Err((NgStatus::NullPointer, "output pointer is null".into()));
    }
    *out = v;
    Ok(())
}

fn into_c_string(s: String) -> *mut c_char {
    CString::new(s).map_or(ptr::null_mut(), CString::into_raw)
}

/// Message of the last failed call on this thread, or null. Owned by the
/// library; valid until the next call.
#[no_mangle]
pub extern "C" fn ng_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// # Safety
/// `s` must come from this library and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn ng_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Solves, assembles and verifies the center of a catalog instance.
///
/// # Safety
/// `instance` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ng_center_from_instance(
    instance: *const c_char,
    omega_order: u32,
    out: *mut *mut NgModularData,
) -> NgStatus {
    guard(|| {
        let name = read_str(instance, "instance")?;
        if out.is_null() {
            return Err((NgStatus::NullPointer, "output pointer is null".into()));
        }
        let data = pl::load_source(&Source::Instance(name.to_string())).map_err(fail)?;
        let triples = pl::stage_solve(&data, omega_order).map_err(fail)?;
        let md = pl::stage_center(&data, &triples, 1e-6).map_err(fail)?;
        write_out(out, Box::into_raw(Box::new(NgModularData(md))))?;
        Ok(NgStatus::Ok)
    })
}

/// Parses modular data from its JSON form.
///
/// # Safety
/// `json` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ng_modular_from_json(json: *const c_char, out: *mut *mut NgModularData) -> NgStatus {
    guard(|| {
        let text = read_str(json, "json")?;
        let j = serde_json::from_str(text).map_err(|e| fail(e.into()))?;
        let md = ModularData::from_json(&j).map_err(fail)?;
        write_out(out, Box::into_raw(Box::new(NgModularData(md))))?;
        Ok(NgStatus::Ok)
    })
}

/// # Safety
/// `h` must be null or a handle from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn ng_modular_free(h: *mut NgModularData) {
    if !h.is_null() {
        drop(Box::from_raw(h));
    }
}

/// # Safety
/// `h` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ng_modular_rank(h: *const NgModularData, out: *mut usize) -> NgStatus {
    guard(|| {
        write_out(out, handle(h)?.0.rank())?;
        Ok(NgStatus::Ok)
    })
}

/// Global dimension `λ = √Σ d²`.
///
/// # Safety
/// `h` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ng_modular_lambda(h: *const NgModularData, out: *mut f64) -> NgStatus {
    guard(|| {
        write_out(out, handle(h)?.0.lambda)?;
        Ok(NgStatus::Ok)
    })
}

/// Dimension and twist `(re, im)` of simple `i`.
///
/// # Safety
/// `h` must be a live handle; the three outputs must be writable.
#[no_mangle]
pub unsafe extern "C" fn ng_modular_simple(
    h: *const NgModularData,
    i: usize,
    dim: *mut f64,
    twist_re: *mut f64,
    twist_im: *mut f64,
) -> NgStatus {
    guard(|| {
        let md = &handle(h)?.0;
        if i >= md.rank() {
            return Err((NgStatus::OutOfRange, format!("index {i} >= rank {}", md.rank())));
        }
        write_out(dim, md.dims[i])?;
        write_out(twist_re, md.twists[i].re)?;
        write_out(twist_im, md.twists[i].im)?;
        Ok(NgStatus::Ok)
    })
}

/// Entry `S_{ij}` of the normalized S-matrix.
///
/// # Safety
/// `h` must be a live handle; `re` and `im` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ng_modular_s(
    h: *const NgModularData,
    i: usize,
    j: usize,
    re: *mut f64,
    im: *mut f64,
) -> NgStatus {
    guard(|| {
        let md = &handle(h)?.0;
        let r = md.rank();
        if i >= r || j >= r {
            return Err((NgStatus::OutOfRange, format!("({i}, {j}) outside rank {r}")));
        }
        write_out(re, md.s[(i, j)].re)?;
        write_out(im, md.s[(i, j)].im)?;
        Ok(NgStatus::Ok)
    })
}

/// Label of simple `i` as a new string.
///
/// # Safety
/// `h` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ng_modular_label(h: *const NgModularData, i: usize, out: *mut *mut c_char) -> NgStatus {
    guard(|| {
        let md = &handle(h)?.0;
        let l = md
            .labels
            .get(i)
            .ok_or((NgStatus::OutOfRange, format!("index {i} >= rank {}", md.rank())))?;
        write_out(out, into_c_string(l.clone()))?;
        Ok(NgStatus::Ok)
    })
}

/// JSON form as a new string.
///
/// # Safety
/// `h` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ng_modular_to_json(h: *const NgModularData, out: *mut *mut c_char) -> NgStatus {
    guard(|| {
        let s = pl::to_json_string(&handle(h)?.0.to_json()).map_err(fail)?;
        write_out(out, into_c_string(s))?;
        Ok(NgStatus::Ok)
    })
}

/// Runs the pipeline on a catalog instance through `through` (a stage name
/// such as `"supermodular"`), optionally comparing with `compare`
/// (`"smds1"`, `"smds2"` or null). Returns [`NgStatus::Mismatch`] with a
/// valid handle when the comparison fails.
///
/// # Safety
/// `instance` and `through` must be NUL-terminated strings, `compare` null
/// or NUL-terminated; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ng_pipeline_run(
    instance: *const c_char,
    through: *const c_char,
    compare: *const c_char,
    allow_conjugation: bool,
    out: *mut *mut NgPipeline,
) -> NgStatus {
    guard(|| {
        let name = read_str(instance, "instance")?;
        let through: Stage = read_str(through, "through")?.parse().map_err(fail)?;
        if out.is_null() {
            return Err((NgStatus::NullPointer, "output pointer is null".into()));
        }
        let mut cfg = PipelineConfig::instance(name);
        cfg.through = through;
        cfg.compare = opt_str(compare, "compare")?.map(str::to_string);
        cfg.allow_conjugation = allow_conjugation;
        let res = pl::run_pipeline(&cfg).map_err(fail)?;
        let status = if res.exit_code() == 1 {
            set_error(format!(
                "no match, max deviation {:.3e}",
                res.comparison.as_ref().map_or(f64::NAN, |m| m.max_deviation)
            ));
            NgStatus::Mismatch
        } else {
            NgStatus::Ok
        };
        write_out(out, Box::into_raw(Box::new(NgPipeline(res))))?;
        Ok(status)
    })
}

/// # Safety
/// `h` must be null or a handle from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn ng_pipeline_free(h: *mut NgPipeline) {
    if !h.is_null() {
        drop(Box::from_raw(h));
    }
}

/// Number of `(ξ, τ, ω)` triples found.
///
/// # Safety
/// `h` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ng_pipeline_triple_count(h: *const NgPipeline, out: *mut usize) -> NgStatus {
    guard(|| {
        write_out(out, handle(h)?.0.triples.len())?;
        Ok(NgStatus::Ok)
    })
}

/// Comparison outcome. `InvalidArgument` when no comparison ran.
///
/// # Safety
/// `h` must be a live handle; the outputs must be writable.
#[no_mangle]
pub unsafe extern "C" fn ng_pipeline_comparison(
    h: *const NgPipeline,
    matched: *mut bool,
    conjugated: *mut bool,
    max_deviation: *mut f64,
) -> NgStatus {
    guard(|| {
        let m = handle(h)?
            .0
            .comparison
            .as_ref()
            .ok_or((NgStatus::InvalidArgument, "no comparison in this run".into()))?;
        write_out(matched, m.matched)?;
        write_out(conjugated, m.conjugated)?;
        write_out(max_deviation, m.max_deviation)?;
        Ok(NgStatus::Ok)
    })
}

/// Copies out the center's data as a new handle.
///
/// # Safety
/// `h` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ng_pipeline_center(h: *const NgPipeline, out: *mut *mut NgModularData) -> NgStatus {
    guard(|| {
        let md = handle(h)?
            .0
            .center
            .clone()
            .ok_or((NgStatus::InvalidArgument, "center stage did not run".into()))?;
        write_out(out, Box::into_raw(Box::new(NgModularData(md))))?;
        Ok(NgStatus::Ok)
    })
}

/// Copies out the super-modular data as a new handle.
///
/// # Safety
/// `h` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ng_pipeline_super(h: *const NgPipeline, out: *mut *mut NgSuperData) -> NgStatus {
    guard(|| {
        let smd = handle(h)?
            .0
            .super_data
            .clone()
            .ok_or((NgStatus::InvalidArgument, "supermodular stage did not run".into()))?;
        write_out(out, Box::into_raw(Box::new(NgSuperData(smd))))?;
        Ok(NgStatus::Ok)
    })
}

/// # Safety
/// `h` must be null or a handle from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn ng_super_free(h: *mut NgSuperData) {
    if !h.is_null() {
        drop(Box::from_raw(h));
    }
}

/// # Safety
/// `h` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ng_super_rank(h: *const NgSuperData, out: *mut usize) -> NgStatus {
    guard(|| {
        write_out(out, handle(h)?.0.rank())?;
        Ok(NgStatus::Ok)
    })
}

/// Entry `Ŝ_{ij}`.
///
/// # Safety
/// `h` must be a live handle; `re` and `im` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ng_super_s(h: *const NgSuperData, i: usize, j: usize, re: *mut f64, im: *mut f64) -> NgStatus {
    guard(|| {
        let sd = &handle(h)?.0;
        let r = sd.rank();
        if i >= r || j >= r {
            return Err((NgStatus::OutOfRange, format!("({i}, {j}) outside rank {r}")));
        }
        write_out(re, sd.s_hat[(i, j)].re)?;
        write_out(im, sd.s_hat[(i, j)].im)?;
        Ok(NgStatus::Ok)
    })
}

/// Entry `T̂²_i`.
///
/// # Safety
/// `h` must be a live handle; `re` and `im` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ng_super_t2(h: *const NgSuperData, i: usize, re: *mut f64, im: *mut f64) -> NgStatus {
    guard(|| {
        let sd = &handle(h)?.0;
        let t = *sd
            .t2_hat
            .get(i)
            .ok_or((NgStatus::OutOfRange, format!("index {i} >= rank {}", sd.rank())))?;
        write_out(re, t.re)?;
        write_out(im, t.im)?;
        Ok(NgStatus::Ok)
    })
}

/// JSON form as a new string.
///
/// # Safety
/// `h` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ng_super_to_json(h: *const NgSuperData, out: *mut *mut c_char) -> NgStatus {
    guard(|| {
        let s = pl::to_json_string(&handle(h)?.0.to_json()).map_err(fail)?;
        write_out(out, into_c_string(s))?;
        Ok(NgStatus::Ok)
    })
}
