//! C ABI for the dbar solver: opaque context handles, status codes, and
//! JSON-in/JSON-out calls, so other languages can drive solves, probes and
//! experiments without linking Rust.
//!
//! Conventions:
//! - every returned `char*` is owned by the caller and must be released with
//!   [`dbar_string_free`];
//! - functions returning [`DbarStatus`] report failure details through
//!   [`dbar_last_error`];
//! - all entry points catch panics and convert them to `DBAR_STATUS_PANIC`.

use dbar_core::config::RunConfig;
use dbar_core::fields::OneForm;
use dbar_core::solver::{cross_validate, SolveMethod, SolverContext};
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;

/// Status codes mirrored by the CLI exit codes.
#[repr(C)]
#[derive(Clone, Copy, PartialEq, Eq)]
pub enum DbarStatus {
    Ok = 0,
    RuntimeError = 1,
    ConfigError = 2,
    ToleranceFailure = 3,
    NullArgument = 4,
    Panic = 5,
}

/// Opaque solver context: a parsed config plus the prepared grids and kernel
/// tables for its domain and dimension.
pub struct DbarContext {
    config: RunConfig,
    solver: SolverContext,
    form: Option<OneForm>,
}

thread_local! {
    static LAST_ERROR: std::cell::RefCell<Option<CString>> =
        const { std::cell::RefCell::new(None) };
}

fn set_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(err: &dbar_core::Error) -> DbarStatus {
    match err {
        dbar_core::Error::Config(_) => DbarStatus::ConfigError,
        _ => DbarStatus::RuntimeError,
    }
}

unsafe fn cstr_arg<'a>(ptr: *const c_char) -> Option<&'a str> {
    if ptr.is_null() {
        return None;
    }
    CStr::from_ptr(ptr).to_str().ok()
}

fn to_cstring(s: String) -> *mut c_char {
    CString::new(s.replace('\0', " "))
        .map(CString::into_raw)
        .unwrap_or(std::ptr::null_mut())
}

/// Library version as a static string; do not free.
#[no_mangle]
pub extern "C" fn dbar_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}

/// Last error message for this thread, or NULL when none; caller frees.
#[no_mangle]
pub extern "C" fn dbar_last_error() -> *mut c_char {
    LAST_ERROR.with(|e| match e.borrow().as_ref() {
        Some(c) => to_cstring(c.to_string_lossy().into_owned()),
        None => std::ptr::null_mut(),
    })
}

/// Release a string returned by this library.
///
/// # Safety
/// `s` must be a pointer previously returned by a `dbar_*` call and not yet
/// freed; NULL is accepted.
#[no_mangle]
pub unsafe extern "C" fn dbar_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Build a context from a JSON configuration. Returns NULL on failure and
/// records the reason for [`dbar_last_error`].
///
/// # Safety
/// `config_json` must be a valid NUL-terminated UTF-8 string.
#[no_mangle]
pub unsafe extern "C" fn dbar_context_new(config_json: *const c_char) -> *mut DbarContext {
    let Some(text) = cstr_arg(config_json) else {
        set_error("config_json is NULL or not UTF-8");
        return std::ptr::null_mut();
    };
    let result = catch_unwind(|| -> Result<DbarContext, dbar_core::Error> {
        let config = RunConfig::from_json(text)?;
        let solver = SolverContext::new(
            &config.domain.to_domain()?,
            config.dim,
            config.grid,
            config.s3_grid,
            config.tolerances,
        )?;
        let form = if config.field.is_some() {
            Some(config.build_form()?)
        } else {
            None
        };
        Ok(DbarContext {
            config,
            solver,
            form,
        })
    });
    match result {
        Ok(Ok(ctx)) => Box::into_raw(Box::new(ctx)),
        Ok(Err(e)) => {
            set_error(&e.to_string());
            std::ptr::null_mut()
        }
        Err(_) => {
            set_error("panic while building context");
            std::ptr::null_mut()
        }
    }
}

/// Release a context.
///
/// # Safety
/// `ctx` must come from [`dbar_context_new`] and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn dbar_context_free(ctx: *mut DbarContext) {
    if !ctx.is_null() {
        drop(Box::from_raw(ctx));
    }
}

fn parse_method(name: &str) -> Option<SolveMethod> {
    match name {
        "forward" => Some(SolveMethod::Forward),
        "reverse" => Some(SolveMethod::Reverse),
        "section3" => Some(SolveMethod::Section3),
        "oracle" | "monomial_oracle" => Some(SolveMethod::MonomialOracle),
        _ => None,
    }
}

/// Solve the configured form with one method and return the method report
/// as JSON (caller frees); NULL on failure.
///
/// # Safety
/// `ctx` must be a live context; `method` a NUL-terminated string among
/// `forward`, `reverse`, `section3`, `oracle`.
#[no_mangle]
pub unsafe extern "C" fn dbar_solve_json(
    ctx: *const DbarContext,
    method: *const c_char,
) -> *mut c_char {
    let Some(ctx) = ctx.as_ref() else {
        set_error("ctx is NULL");
        return std::ptr::null_mut();
    };
    let Some(mname) = cstr_arg(method) else {
        set_error("method is NULL or not UTF-8");
        return std::ptr::null_mut();
    };
    let Some(m) = parse_method(mname) else {
        set_error("unknown method; expected forward|reverse|section3|oracle");
        return std::ptr::null_mut();
    };
    let Some(form) = ctx.form.as_ref() else {
        set_error("the context's config has no field section");
        return std::ptr::null_mut();
    };
    let out = catch_unwind(AssertUnwindSafe(|| ctx.solver.canonical_solve(form, m)));
    match out {
        Ok(Ok(outcome)) => match serde_json::to_string_pretty(&outcome.report) {
            Ok(s) => to_cstring(s),
            Err(e) => {
                set_error(&format!("serialization failed: {e}"));
                std::ptr::null_mut()
            }
        },
        Ok(Err(e)) => {
            set_error(&e.to_string());
            std::ptr::null_mut()
        }
        Err(_) => {
            set_error("panic during solve");
            std::ptr::null_mut()
        }
    }
}

/// Cross-validate the configured form over the configured methods; returns
/// the report as JSON (caller frees); NULL on failure.
///
/// # Safety
/// `ctx` must be a live context.
#[no_mangle]
pub unsafe extern "C" fn dbar_crossval_json(ctx: *const DbarContext) -> *mut c_char {
    let Some(ctx) = ctx.as_ref() else {
        set_error("ctx is NULL");
        return std::ptr::null_mut();
    };
    let Some(form) = ctx.form.as_ref() else {
        set_error("the context's config has no field section");
        return std::ptr::null_mut();
    };
    let out = catch_unwind(AssertUnwindSafe(|| {
        cross_validate(&ctx.solver, form, &ctx.config.methods)
    }));
    match out {
        Ok(Ok((report, _))) => match serde_json::to_string_pretty(&report) {
            Ok(s) => to_cstring(s),
            Err(e) => {
                set_error(&format!("serialization failed: {e}"));
                std::ptr::null_mut()
            }
        },
        Ok(Err(e)) => {
            set_error(&e.to_string());
            std::ptr::null_mut()
        }
        Err(_) => {
            set_error("panic during crossval");
            std::ptr::null_mut()
        }
    }
}

/// Run a full subcommand (`solve`, `crossval`, `probe`, `experiment`,
/// `convergence`) with artifacts written to `out_dir`, mirroring the CLI.
/// Returns OK, TOLERANCE_FAILURE when `check` is set and a gate fails, or an
/// error status.
///
/// # Safety
/// `config_json`, `subcommand` and `out_dir` must be valid NUL-terminated
/// UTF-8 strings.
#[no_mangle]
pub unsafe extern "C" fn dbar_run(
    config_json: *const c_char,
    subcommand: *const c_char,
    out_dir: *const c_char,
    check: bool,
) -> DbarStatus {
    let (Some(cfg_text), Some(sub), Some(dir)) = (
        cstr_arg(config_json),
        cstr_arg(subcommand),
        cstr_arg(out_dir),
    ) else {
        set_error("NULL or non-UTF-8 argument");
        return DbarStatus::NullArgument;
    };
    let result = catch_unwind(|| -> Result<bool, dbar_core::Error> {
        let cfg = RunConfig::from_json(cfg_text)?;
        dbar_core::runner::run_subcommand(&cfg, sub, Path::new(dir), check)
    });
    match result {
        Ok(Ok(true)) => DbarStatus::Ok,
        Ok(Ok(false)) => {
            set_error("tolerance check failed; see report.json");
            DbarStatus::ToleranceFailure
        }
        Ok(Err(e)) => {
            set_error(&e.to_string());
            status_of(&e)
        }
        Err(_) => {
            set_error("panic during run");
            DbarStatus::Panic
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg_json() -> CString {
        CString::new(
            r#"{
                "domain": {"type": "disc"},
                "dim": 2,
                "seed": 7,
                "methods": ["forward", "monomial_oracle"],
                "field": {"exprs": ["conj(z2)", "conj(z1)"]},
                "grid": {"n_r": 16, "n_theta": 48, "margin": 0.05,
                         "eval_n_r": 4, "eval_n_theta": 8}
            }"#,
        )
        .unwrap()
    }

    #[test]
    fn context_round_trip_and_solve() {
        unsafe {
            let ctx = dbar_context_new(cfg_json().as_ptr());
            assert!(!ctx.is_null(), "context build failed");
            let method = CString::new("oracle").unwrap();
            let out = dbar_solve_json(ctx, method.as_ptr());
            assert!(!out.is_null());
            let text = CStr::from_ptr(out).to_str().unwrap().to_string();
            assert!(text.contains("\"method\": \"oracle\""), "{text}");
            let parsed: serde_json::Value = serde_json::from_str(&text).unwrap();
            assert!(parsed["dbar_residual_sup"].as_f64().unwrap() < 1e-10);
            dbar_string_free(out);
            dbar_context_free(ctx);
        }
    }

    #[test]
    fn crossval_through_the_abi() {
        unsafe {
            let ctx = dbar_context_new(cfg_json().as_ptr());
            assert!(!ctx.is_null());
            let out = dbar_crossval_json(ctx);
            assert!(!out.is_null());
            let text = CStr::from_ptr(out).to_str().unwrap().to_string();
            let parsed: serde_json::Value = serde_json::from_str(&text).unwrap();
            let pairs = parsed["pairwise"].as_array().unwrap();
            assert_eq!(pairs.len(), 1);
            assert!(pairs[0]["sup_rel_diff"].as_f64().unwrap() < 1e-2);
            dbar_string_free(out);
            dbar_context_free(ctx);
        }
    }

    #[test]
    fn errors_are_reported_not_crashed() {
        unsafe {
            let bad = CString::new("{not json").unwrap();
            let ctx = dbar_context_new(bad.as_ptr());
            assert!(ctx.is_null());
            let err = dbar_last_error();
            assert!(!err.is_null());
            let msg = CStr::from_ptr(err).to_str().unwrap();
            assert!(msg.contains("bad config"), "{msg}");
            dbar_string_free(err);

            let ctx = dbar_context_new(std::ptr::null());
            assert!(ctx.is_null());
            // freeing NULL is a no-op
            dbar_context_free(std::ptr::null_mut());
            dbar_string_free(std::ptr::null_mut());
        }
    }

    #[test]
    fn run_subcommand_writes_artifacts() {
        unsafe {
            let dir = std::env::temp_dir().join("dbar_ffi_run_test");
            let _ = std::fs::remove_dir_all(&dir);
            let cfg = cfg_json();
            let sub = CString::new("solve").unwrap();
            let out = CString::new(dir.to_str().unwrap()).unwrap();
            // coarse test grids may miss the strict gates; artifact writing is what
            // this test checks
            let status = dbar_run(cfg.as_ptr(), sub.as_ptr(), out.as_ptr(), false);
            assert!(matches!(status, DbarStatus::Ok));
            assert!(dir.join("report.json").exists());
            assert!(dir.join("field_forward.csv").exists());
            let _ = std::fs::remove_dir_all(&dir);
        }
    }

    #[test]
    fn version_is_static() {
        let v = dbar_version();
        assert!(!v.is_null());
        let s = unsafe { CStr::from_ptr(v) }.to_str().unwrap();
        assert_eq!(s, env!("CARGO_PKG_VERSION"));
    }

    #[test]
    fn header_was_generated() {
        let header = std::path::Path::new(env!("CARGO_MANIFEST_DIR"))
            .join("include")
            .join("dbar.h");
        let text = std::fs::read_to_string(header).expect("cbindgen header");
        for sym in [
            "dbar_context_new",
            "dbar_solve_json",
            "dbar_run",
            "DbarStatus",
            "dbar_string_free",
        ] {
            assert!(text.contains(sym), "header missing {sym}");
        }
    }
}
