//! C ABI over the engine: opaque agent handles, a JSON-driven scenario
//! runner, and status codes mirroring the CLI exit taxonomy.
//!
//! Every function returning `caif_status` reports detail through
//! `caif_last_error_message` on failure. Strings handed out by this library
//! are NUL-terminated, UTF-8, and owned by the caller until returned via
//! `caif_string_free`.

#![allow(non_camel_case_types)]

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use continuum_aif::agents::{build_consumer, build_producer, build_worker, AgentSpec};
use continuum_aif::cli::{
    run_scenario_summary, CliConfig, EXIT_CONFIG, EXIT_INGESTION, EXIT_RUNTIME,
};

/// Result of every fallible call. Numeric values match the CLI exit codes so
/// one taxonomy covers both front ends.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum caif_status {
    CAIF_OK = 0,
    CAIF_RUNTIME_ERROR = 1,
    CAIF_CONFIG_ERROR = 2,
    CAIF_INGESTION_ERROR = 3,
    CAIF_NULL_POINTER = 4,
}

fn status_from_code(code: i32) -> caif_status {
    match code {
        EXIT_CONFIG => caif_status::CAIF_CONFIG_ERROR,
        EXIT_INGESTION => caif_status::CAIF_INGESTION_ERROR,
        _ => caif_status::CAIF_RUNTIME_ERROR,
    }
}

const _: () = assert!(EXIT_RUNTIME == caif_status::CAIF_RUNTIME_ERROR as i32);

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn fail(status: caif_status, message: impl AsRef<str>) -> caif_status {
    let sanitized = message.as_ref().replace('\0', " ");
    LAST_ERROR.with(|slot| {
        *slot.borrow_mut() = CString::new(sanitized).expect("NULs stripped");
    });
    status
}

/// One agent's generative model. Opaque: create with `caif_agent_build`,
/// release with `caif_agent_free`.
pub struct caif_agent {
    spec: AgentSpec,
}

/// Wraps a body so a Rust panic surfaces as a runtime status instead of
/// unwinding across the C boundary.
fn guarded(body: impl FnOnce() -> caif_status) -> caif_status {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(status) => status,
        Err(_) => fail(caif_status::CAIF_RUNTIME_ERROR, "internal panic"),
    }
}

/// Detail for the most recent failure on this thread, or an empty string.
///
/// The pointer stays valid until the next failing call on the same thread;
/// do not free it.
#[no_mangle]
pub extern "C" fn caif_last_error_message() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ptr())
}

unsafe fn read_utf8<'a>(raw: *const c_char, what: &str) -> Result<&'a str, caif_status> {
    if raw.is_null() {
        return Err(fail(caif_status::CAIF_NULL_POINTER, format!("{what} is NULL")));
    }
    CStr::from_ptr(raw)
        .to_str()
        .map_err(|_| fail(caif_status::CAIF_CONFIG_ERROR, format!("{what} is not UTF-8")))
}

fn give_string(out: *mut *mut c_char, text: String) -> caif_status {
    let sanitized = text.replace('\0', " ");
    let owned = CString::new(sanitized).expect("NULs stripped");
    unsafe { *out = owned.into_raw() };
    caif_status::CAIF_OK
}

/// Builds the named agent ("producer", "worker", or "consumer") and writes
/// its handle to `out`.
///
/// # Safety
/// `name` must be a NUL-terminated string; `out` must point to writable
/// memory for one pointer. The handle must be released exactly once with
/// `caif_agent_free`.
#[no_mangle]
pub unsafe extern "C" fn caif_agent_build(
    name: *const c_char,
    out: *mut *mut caif_agent,
) -> caif_status {
    guarded(|| {
        if out.is_null() {
            return fail(caif_status::CAIF_NULL_POINTER, "out is NULL");
        }
        let name = match read_utf8(name, "name") {
            Ok(s) => s,
            Err(status) => return status,
        };
        let built = match name {
            "producer" => build_producer(),
            "worker" => build_worker(),
            "consumer" => build_consumer(),
            other => {
                return fail(
                    caif_status::CAIF_CONFIG_ERROR,
                    format!("unknown agent `{other}` (expected producer, worker, or consumer)"),
                )
            }
        };
        match built {
            Ok(spec) => {
                *out = Box::into_raw(Box::new(caif_agent { spec }));
                caif_status::CAIF_OK
            }
            Err(e) => fail(caif_status::CAIF_RUNTIME_ERROR, e.to_string()),
        }
    })
}

/// Runs the agent's structural validators (CPT normalization, wiring
/// arities, SLOiD references). Returns OK when every check passes.
///
/// # Safety
/// `agent` must be a live handle from `caif_agent_build`.
#[no_mangle]
pub unsafe extern "C" fn caif_agent_validate(agent: *const caif_agent) -> caif_status {
    guarded(|| {
        if agent.is_null() {
            return fail(caif_status::CAIF_NULL_POINTER, "agent is NULL");
        }
        let problems = (*agent).spec.validate();
        if problems.is_empty() {
            caif_status::CAIF_OK
        } else {
            fail(caif_status::CAIF_RUNTIME_ERROR, problems.join("; "))
        }
    })
}

/// Serializes the agent's full model (factors, controls, CPTs, preferences,
/// SLOiDs) as JSON into `out`.
///
/// # Safety
/// `agent` must be a live handle; `out` must point to writable memory for
/// one pointer. Free the returned string with `caif_string_free`.
#[no_mangle]
pub unsafe extern "C" fn caif_agent_to_json(
    agent: *const caif_agent,
    out: *mut *mut c_char,
) -> caif_status {
    guarded(|| {
        if agent.is_null() || out.is_null() {
            return fail(caif_status::CAIF_NULL_POINTER, "agent or out is NULL");
        }
        match (*agent).spec.to_json() {
            Ok(json) => give_string(out, json),
            Err(e) => fail(caif_status::CAIF_RUNTIME_ERROR, e.to_string()),
        }
    })
}

/// Releases an agent handle. NULL is a no-op.
///
/// # Safety
/// `agent` must be NULL or a live handle from `caif_agent_build`, and must
/// not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn caif_agent_free(agent: *mut caif_agent) {
    if !agent.is_null() {
        drop(Box::from_raw(agent));
    }
}

/// Runs one experiment described by a flat JSON config (the same schema the
/// CLI's `--config` file uses; omitted keys take their defaults) and writes
/// the summary document JSON to `out`.
///
/// # Safety
/// `config_json` must be a NUL-terminated string; `out` must point to
/// writable memory for one pointer. Free the returned string with
/// `caif_string_free`.
#[no_mangle]
pub unsafe extern "C" fn caif_run_scenario_json(
    config_json: *const c_char,
    out: *mut *mut c_char,
) -> caif_status {
    guarded(|| {
        if out.is_null() {
            return fail(caif_status::CAIF_NULL_POINTER, "out is NULL");
        }
        let text = match read_utf8(config_json, "config_json") {
            Ok(s) => s,
            Err(status) => return status,
        };
        let config: CliConfig = match serde_json::from_str(text) {
            Ok(c) => c,
            Err(e) => return fail(caif_status::CAIF_CONFIG_ERROR, format!("config: {e}")),
        };
        match run_scenario_summary(&config) {
            Ok(summary) => match serde_json::to_string_pretty(&summary) {
                Ok(json) => give_string(out, json),
                Err(e) => fail(caif_status::CAIF_RUNTIME_ERROR, e.to_string()),
            },
            Err((code, message)) => fail(status_from_code(code), message),
        }
    })
}

/// Releases a string returned by this library. NULL is a no-op.
///
/// # Safety
/// `text` must be NULL or a pointer obtained from this library, and must not
/// be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn caif_string_free(text: *mut c_char) {
    if !text.is_null() {
        drop(CString::from_raw(text));
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::ffi::CString;

    fn build(name: &str) -> (*mut caif_agent, caif_status) {
        let name = CString::new(name).unwrap();
        let mut handle: *mut caif_agent = ptr::null_mut();
        let status = unsafe { caif_agent_build(name.as_ptr(), &mut handle) };
        (handle, status)
    }

    fn last_error() -> String {
        unsafe {
            CStr::from_ptr(caif_last_error_message())
                .to_string_lossy()
                .into_owned()
        }
    }

    #[test]
    fn agents_build_validate_and_serialize() {
        for name in ["producer", "worker", "consumer"] {
            let (handle, status) = build(name);
            assert_eq!(status, caif_status::CAIF_OK);
            assert!(!handle.is_null());
            unsafe {
                assert_eq!(caif_agent_validate(handle), caif_status::CAIF_OK);
                let mut json: *mut c_char = ptr::null_mut();
                assert_eq!(caif_agent_to_json(handle, &mut json), caif_status::CAIF_OK);
                let parsed: serde_json::Value =
                    serde_json::from_str(CStr::from_ptr(json).to_str().unwrap()).unwrap();
                assert_eq!(parsed["name"], name);
                caif_string_free(json);
                caif_agent_free(handle);
            }
        }
    }

    #[test]
    fn unknown_agent_is_a_config_error_with_detail() {
        let (handle, status) = build("router");
        assert_eq!(status, caif_status::CAIF_CONFIG_ERROR);
        assert!(handle.is_null());
        assert!(last_error().contains("unknown agent"));
    }

    #[test]
    fn null_pointers_are_rejected_not_dereferenced() {
        unsafe {
            let mut handle: *mut caif_agent = ptr::null_mut();
            assert_eq!(
                caif_agent_build(ptr::null(), &mut handle),
                caif_status::CAIF_NULL_POINTER
            );
            assert_eq!(
                caif_agent_validate(ptr::null()),
                caif_status::CAIF_NULL_POINTER
            );
            let name = CString::new("producer").unwrap();
            assert_eq!(
                caif_agent_build(name.as_ptr(), ptr::null_mut()),
                caif_status::CAIF_NULL_POINTER
            );
            caif_agent_free(ptr::null_mut());
            caif_string_free(ptr::null_mut());
        }
    }

    #[test]
    fn scenario_runner_returns_summary_json() {
        let config =
            CString::new(r#"{"policy_length": 1, "steps": 4, "repetitions": 2, "seed": 3}"#)
                .unwrap();
        let mut json: *mut c_char = ptr::null_mut();
        let status = unsafe { caif_run_scenario_json(config.as_ptr(), &mut json) };
        assert_eq!(status, caif_status::CAIF_OK, "{}", last_error());
        let parsed: serde_json::Value = unsafe {
            serde_json::from_str(CStr::from_ptr(json).to_str().unwrap()).unwrap()
        };
        assert!(parsed["final_rates"]["worker"]["Latency"].is_number());
        unsafe { caif_string_free(json) };
    }

    #[test]
    fn scenario_runner_maps_config_errors() {
        let config = CString::new(r#"{"policy_length": 0}"#).unwrap();
        let mut json: *mut c_char = ptr::null_mut();
        let status = unsafe { caif_run_scenario_json(config.as_ptr(), &mut json) };
        assert_eq!(status, caif_status::CAIF_CONFIG_ERROR);
        assert!(json.is_null());
        assert!(last_error().contains("policy_length"));
    }

    #[test]
    fn scenario_runner_maps_ingestion_errors() {
        let config = CString::new(
            r#"{"backend": "trace", "trace_csv": "/nonexistent/t.csv", "steps": 2, "policy_length": 1, "repetitions": 1}"#,
        )
        .unwrap();
        let mut json: *mut c_char = ptr::null_mut();
        let status = unsafe { caif_run_scenario_json(config.as_ptr(), &mut json) };
        assert_eq!(status, caif_status::CAIF_INGESTION_ERROR, "{}", last_error());
    }
}
