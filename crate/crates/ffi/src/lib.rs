//! C interface to `catq`.
//!
//! Programs are loaded into an opaque [`CatqEnv`]; every entry point returns
//! a [`CatqStatus`] and writes results through out-pointers. Strings handed
//! out by this library must be released with [`catq_string_free`]. After a
//! failing call, [`catq_last_error`] describes what went wrong.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use catq::dsl::printer::mapping_text;
use catq::dsl::{load, render_model, Diagnostic, DiagnosticKind, ElabOptions, Environment, Format};
use catq::{invert_mapping, match_mapping, InversionBounds, MatchResult, SimilarityConfig};

/// Result of every call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CatqStatus {
    Ok = 0,
    /// The program has syntax, name or validation errors.
    Diagnostics = 1,
    ResourceLimit = 2,
    /// An instance proves two distinct literals equal.
    Inconsistent = 3,
    NullPointer = 10,
    InvalidUtf8 = 11,
    NotFound = 12,
    InvalidArgument = 13,
    Panic = 99,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CatqFormat {
    Markdown = 0,
    Csv = 1,
    Json = 2,
}

impl From<CatqFormat> for Format {
    fn from(f: CatqFormat) -> Self {
        match f {
            CatqFormat::Markdown => Format::Markdown,
            CatqFormat::Csv => Format::Csv,
            CatqFormat::Json => Format::Json,
        }
    }
}

/// An elaborated program and its diagnostics.
pub struct CatqEnv {
    env: Environment,
    diagnostics: Vec<Diagnostic>,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

struct Failure(CatqStatus, String);

type Outcome<T> = Result<T, Failure>;

fn fail<T>(status: CatqStatus, msg: impl Into<String>) -> Outcome<T> {
    Err(Failure(status, msg.into()))
}

fn set_error(msg: Option<String>) {
    let c = msg.map(|m| CString::new(m.replace('\0', " ")).expect("nul bytes removed"));
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

/// Runs `f`, recording its failure message and catching panics.
fn guard(f: impl FnOnce() -> Outcome<CatqStatus>) -> CatqStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(status)) => {
            if status == CatqStatus::Ok {
                set_error(None);
            }
            status
        }
        Ok(Err(Failure(status, msg))) => {
            set_error(Some(msg));
            status
        }
        Err(_) => {
            set_error(Some("internal panic".into()));
            CatqStatus::Panic
        }
    }
}

unsafe fn text<'a>(p: *const c_char, what: &str) -> Outcome<&'a str> {
    if p.is_null() {
        return fail(CatqStatus::NullPointer, format!("{what} is null"));
    }
    // SAFETY: caller passes a NUL-terminated string that outlives the call.
    unsafe { CStr::from_ptr(p) }
        .to_str()
        .map_err(|_| Failure(CatqStatus::InvalidUtf8, format!("{what} is not UTF-8")))
}

unsafe fn env_ref<'a>(env: *const CatqEnv) -> Outcome<&'a CatqEnv> {
    // SAFETY: non-null handles come from `catq_env_load` and are live.
    unsafe { env.as_ref() }.ok_or(Failure(CatqStatus::NullPointer, "env is null".into()))
}

unsafe fn write_string(out: *mut *mut c_char, s: String) -> Outcome<()> {
    if out.is_null() {
        return fail(CatqStatus::NullPointer, "out is null");
    }
    let c = CString::new(s).map_err(|_| {
        Failure(
            CatqStatus::InvalidArgument,
            "result contains a nul byte".into(),
        )
    })?;
    // SAFETY: `out` is non-null and points to writable storage.
    unsafe { *out = c.into_raw() };
    Ok(())
}

fn status_of(diags: &[Diagnostic]) -> CatqStatus {
    if diags.is_empty() {
        CatqStatus::Ok
    } else if diags
        .iter()
        .any(|d| d.kind == DiagnosticKind::ResourceLimit)
    {
        CatqStatus::ResourceLimit
    } else {
        CatqStatus::Diagnostics
    }
}

/// Parses and elaborates `source`. `file` names the source in diagnostics
/// and may be null. On return `*out` holds a handle even when the status is
/// `Diagnostics` or `ResourceLimit`, so the diagnostics can be read.
///
/// # Safety
/// `source` and a non-null `file` must be NUL-terminated; `out` must be
/// writable.
#[no_mangle]
pub unsafe extern "C" fn catq_env_load(
    source: *const c_char,
    file: *const c_char,
    out: *mut *mut CatqEnv,
) -> CatqStatus {
    guard(|| {
        if out.is_null() {
            return fail(CatqStatus::NullPointer, "out is null");
        }
        // SAFETY: `out` is non-null.
        unsafe { *out = ptr::null_mut() };
        let src = unsafe { text(source, "source") }?;
        let file = if file.is_null() {
            "<input>"
        } else {
            unsafe { text(file, "file") }?
        };
        let (env, diagnostics) = load(src, file, &ElabOptions::default());
        let status = status_of(&diagnostics);
        let first = diagnostics.first().map(|d| d.to_string());
        let handle = Box::into_raw(Box::new(CatqEnv { env, diagnostics }));
        // SAFETY: `out` is non-null.
        unsafe { *out = handle };
        match first {
            None => Ok(CatqStatus::Ok),
            Some(msg) => fail(status, msg),
        }
    })
}

/// Releases a handle. Null is ignored.
///
/// # Safety
/// `env` must come from `catq_env_load` and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn catq_env_free(env: *mut CatqEnv) {
    if !env.is_null() {
        // SAFETY: the handle was created by `Box::into_raw`.
        drop(unsafe { Box::from_raw(env) });
    }
}

/// Number of diagnostics produced by loading.
///
/// # Safety
/// `env` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn catq_env_diagnostic_count(
    env: *const CatqEnv,
    out: *mut usize,
) -> CatqStatus {
    guard(|| {
        let env = unsafe { env_ref(env) }?;
        if out.is_null() {
            return fail(CatqStatus::NullPointer, "out is null");
        }
        // SAFETY: `out` is non-null.
        unsafe { *out = env.diagnostics.len() };
        Ok(CatqStatus::Ok)
    })
}

/// Diagnostic `index` as `file:line:col: kind: message`.
///
/// # Safety
/// `env` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn catq_env_diagnostic(
    env: *const CatqEnv,
    index: usize,
    out: *mut *mut c_char,
) -> CatqStatus {
    guard(|| {
        let env = unsafe { env_ref(env) }?;
        let Some(d) = env.diagnostics.get(index) else {
            return fail(CatqStatus::NotFound, format!("no diagnostic {index}"));
        };
        unsafe { write_string(out, d.to_string()) }?;
        Ok(CatqStatus::Ok)
    })
}

/// Renders instance `name` as tables.
///
/// # Safety
/// `env` must be a live handle, `name` NUL-terminated and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn catq_env_render(
    env: *const CatqEnv,
    name: *const c_char,
    format: CatqFormat,
    out: *mut *mut c_char,
) -> CatqStatus {
    guard(|| {
        let env = unsafe { env_ref(env) }?;
        let name = unsafe { text(name, "name") }?;
        let Some(i) = env.env.instance(name) else {
            return fail(CatqStatus::NotFound, format!("`{name}` is not an instance"));
        };
        unsafe { write_string(out, render_model(&i.model, format.into())) }?;
        Ok(CatqStatus::Ok)
    })
}

/// Number of rows of `entity` in instance `name`.
///
/// # Safety
/// `env` must be a live handle, the names NUL-terminated and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn catq_env_row_count(
    env: *const CatqEnv,
    name: *const c_char,
    entity: *const c_char,
    out: *mut usize,
) -> CatqStatus {
    guard(|| {
        let env = unsafe { env_ref(env) }?;
        let name = unsafe { text(name, "name") }?;
        let entity = unsafe { text(entity, "entity") }?;
        let Some(i) = env.env.instance(name) else {
            return fail(CatqStatus::NotFound, format!("`{name}` is not an instance"));
        };
        if !i.model.schema().is_entity(entity) {
            return fail(CatqStatus::NotFound, format!("`{entity}` is not an entity"));
        }
        if out.is_null() {
            return fail(CatqStatus::NullPointer, "out is null");
        }
        // SAFETY: `out` is non-null.
        unsafe { *out = i.model.carrier(entity).len() };
        Ok(CatqStatus::Ok)
    })
}

/// `Ok` when instance `name` is consistent, `Inconsistent` otherwise; the
/// collision is then available from `catq_last_error`.
///
/// # Safety
/// `env` must be a live handle and `name` NUL-terminated.
#[no_mangle]
pub unsafe extern "C" fn catq_env_check(env: *const CatqEnv, name: *const c_char) -> CatqStatus {
    guard(|| {
        let env = unsafe { env_ref(env) }?;
        let name = unsafe { text(name, "name") }?;
        let Some(i) = env.env.instance(name) else {
            return fail(CatqStatus::NotFound, format!("`{name}` is not an instance"));
        };
        match i.model.collision() {
            None => Ok(CatqStatus::Ok),
            Some(c) => fail(CatqStatus::Inconsistent, c.to_string()),
        }
    })
}

/// Proposes a mapping `source -> target` and writes it as a declaration.
/// Returns `Diagnostics` when the candidate does not validate; the text is
/// written either way.
///
/// # Safety
/// `env` must be a live handle, the names NUL-terminated and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn catq_match(
    env: *const CatqEnv,
    source: *const c_char,
    target: *const c_char,
    cutoff: f64,
    out: *mut *mut c_char,
) -> CatqStatus {
    guard(|| {
        let env = unsafe { env_ref(env) }?;
        let (s, t) = (unsafe { text(source, "source") }?, unsafe {
            text(target, "target")
        }?);
        let (Some(s), Some(t)) = (env.env.schema(s), env.env.schema(t)) else {
            return fail(
                CatqStatus::NotFound,
                format!("`{s}` and `{t}` must both be schemas"),
            );
        };
        let cfg = SimilarityConfig::new(cutoff)
            .map_err(|e| Failure(CatqStatus::InvalidArgument, e.to_string()))?;
        let r = match_mapping(s, t, &cfg)
            .map_err(|e| Failure(CatqStatus::Diagnostics, e.to_string()))?;
        let MatchResult::Candidate(c) = r else {
            unreachable!("match_mapping yields a candidate")
        };
        unsafe { write_string(out, mapping_text(&c.mapping)) }?;
        match c.validation_error {
            None => Ok(CatqStatus::Ok),
            Some(e) => fail(CatqStatus::Diagnostics, e.to_string()),
        }
    })
}

/// Searches for an inverse of `mapping` using paths of at most `depth`
/// symbols. Writes the inverse, or null when the search space holds none.
///
/// # Safety
/// `env` must be a live handle, `mapping` NUL-terminated and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn catq_invert(
    env: *const CatqEnv,
    mapping: *const c_char,
    depth: usize,
    out: *mut *mut c_char,
) -> CatqStatus {
    guard(|| {
        let env = unsafe { env_ref(env) }?;
        let name = unsafe { text(mapping, "mapping") }?;
        if out.is_null() {
            return fail(CatqStatus::NullPointer, "out is null");
        }
        // SAFETY: `out` is non-null.
        unsafe { *out = ptr::null_mut() };
        let Some(f) = env.env.mapping(name) else {
            return fail(CatqStatus::NotFound, format!("`{name}` is not a mapping"));
        };
        let bounds = InversionBounds {
            depth,
            ..InversionBounds::default()
        };
        match invert_mapping(f, bounds) {
            Ok(Some(g)) => unsafe { write_string(out, mapping_text(&g)) }.map(|_| CatqStatus::Ok),
            Ok(None) => Ok(CatqStatus::Ok),
            Err(e) if e.is_resource_limit() => fail(CatqStatus::ResourceLimit, e.to_string()),
            Err(e) => fail(CatqStatus::Diagnostics, e.to_string()),
        }
    })
}

/// Releases a string returned by this library. Null is ignored.
///
/// # Safety
/// `s` must come from this library and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn catq_string_free(s: *mut c_char) {
    if !s.is_null() {
        // SAFETY: the string was created by `CString::into_raw`.
        drop(unsafe { CString::from_raw(s) });
    }
}

/// Message of the last failing call on this thread, or null. The pointer
/// stays valid until the next call on the same thread.
#[no_mangle]
pub extern "C" fn catq_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version, statically allocated.
#[no_mangle]
pub extern "C" fn catq_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}
