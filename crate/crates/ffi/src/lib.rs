//! C ABI over `cortex-core`.
//!
//! Every fallible function returns a [`CortexStatus`]. On failure the message
//! is kept per thread and can be read with [`cortex_last_error`]. Handles are
//! opaque; each `*_new` has a matching `*_free`. Panics never cross the
//! boundary: they surface as `CORTEX_STATUS_INTERNAL`.

#![allow(clippy::missing_safety_doc)]

use std::cell::RefCell;
use std::collections::VecDeque;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;
use std::slice;
use std::sync::Arc;

use cortex_core::gate::{decide, gate_score};
use cortex_core::model::{init_weights, ModelConfig};
use cortex_core::prism::Prism;
use cortex_core::router::{Router, Trigger};
use cortex_core::scheduler::{write_audit_csv, RunOutput, RuntimeConfig, Scheduler, Script};
use cortex_core::synapse::{hausdorff_distance, select_hybrid, PointCloud};
use cortex_core::CortexError;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CortexStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Config = 3,
    Capacity = 4,
    Topology = 5,
    Precondition = 6,
    Degenerate = 7,
    Sequencing = 8,
    EmptySynapse = 9,
    AgentCap = 10,
    Io = 11,
    /// Output buffer too small; the required length was still written.
    BufferTooSmall = 12,
    /// Nothing to return (e.g. no pending trigger).
    Empty = 13,
    Internal = 99,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let text = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(text).ok());
}

fn status_of(err: &CortexError) -> CortexStatus {
    match err {
        CortexError::Config(_) => CortexStatus::Config,
        CortexError::Capacity { .. } => CortexStatus::Capacity,
        CortexError::Topology(_) => CortexStatus::Topology,
        CortexError::Precondition(_) => CortexStatus::Precondition,
        CortexError::Degenerate(_) => CortexStatus::Degenerate,
        CortexError::Sequencing(_) => CortexStatus::Sequencing,
        CortexError::EmptySynapse => CortexStatus::EmptySynapse,
        CortexError::AgentCap { .. } => CortexStatus::AgentCap,
        CortexError::Io(_) | CortexError::Json(_) | CortexError::Csv(_) => CortexStatus::Io,
    }
}

fn fail(status: CortexStatus, msg: impl Into<String>) -> CortexStatus {
    set_error(msg);
    status
}

/// Runs `f`, mapping errors and panics to a status.
fn guard(f: impl FnOnce() -> Result<(), CortexStatus>) -> CortexStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => CortexStatus::Ok,
        Ok(Err(s)) => s,
        Err(_) => fail(CortexStatus::Internal, "panic inside cortex"),
    }
}

fn core<T>(r: cortex_core::Result<T>) -> Result<T, CortexStatus> {
    r.map_err(|e| fail(status_of(&e), e.to_string()))
}

unsafe fn slice_in<'a, T>(p: *const T, len: usize) -> Result<&'a [T], CortexStatus> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(fail(CortexStatus::NullPointer, "null input array"));
    }
    Ok(slice::from_raw_parts(p, len))
}

unsafe fn out<'a, T>(p: *mut T) -> Result<&'a mut T, CortexStatus> {
    p.as_mut().ok_or_else(|| fail(CortexStatus::NullPointer, "null output pointer"))
}

/// Copies `bytes` into `buf` (capacity `cap`) and writes the full length to `len`.
unsafe fn copy_out<T: Copy>(bytes: &[T], buf: *mut T, cap: usize, len: *mut usize) -> Result<(), CortexStatus> {
    *out(len)? = bytes.len();
    if bytes.len() > cap {
        return Err(fail(CortexStatus::BufferTooSmall, format!("need {} elements, have {cap}", bytes.len())));
    }
    if !bytes.is_empty() {
        if buf.is_null() {
            return Err(fail(CortexStatus::NullPointer, "null output buffer"));
        }
        ptr::copy_nonoverlapping(bytes.as_ptr(), buf, bytes.len());
    }
    Ok(())
}

/// Message of the last failure on this thread, or NULL. Valid until the next
/// failing call on the same thread.
#[no_mangle]
pub extern "C" fn cortex_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn cortex_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Runtime knobs. Obtain defaults from [`cortex_runtime_config_default`].
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct CortexRuntimeConfig {
    pub k: usize,
    pub lambda: f64,
    pub theta: f64,
    pub max_stream_agents: usize,
    pub thought_budget: usize,
    pub synapse_push_period: usize,
    pub max_new_tokens: usize,
    pub single_lane: bool,
}

impl From<CortexRuntimeConfig> for RuntimeConfig {
    fn from(c: CortexRuntimeConfig) -> Self {
        RuntimeConfig {
            k: c.k,
            lambda: c.lambda,
            theta: c.theta,
            max_stream_agents: c.max_stream_agents,
            thought_budget: c.thought_budget,
            synapse_push_period: c.synapse_push_period,
            max_new_tokens: c.max_new_tokens,
            single_lane: c.single_lane,
        }
    }
}

#[no_mangle]
pub extern "C" fn cortex_runtime_config_default() -> CortexRuntimeConfig {
    let d = RuntimeConfig::default();
    CortexRuntimeConfig {
        k: d.k,
        lambda: d.lambda,
        theta: d.theta,
        max_stream_agents: d.max_stream_agents,
        thought_budget: d.thought_budget,
        synapse_push_period: d.synapse_push_period,
        max_new_tokens: d.max_new_tokens,
        single_lane: d.single_lane,
    }
}

/// Shared weights plus the agent registry.
pub struct CortexRuntime {
    prism: Arc<Prism>,
    config: RuntimeConfig,
}

/// Result of one `cortex_runtime_run`.
pub struct CortexRun {
    output: RunOutput,
}

/// Builds the default toy model from `seed`.
#[no_mangle]
pub unsafe extern "C" fn cortex_runtime_new(
    seed: u64,
    config: CortexRuntimeConfig,
    runtime: *mut *mut CortexRuntime,
) -> CortexStatus {
    guard(|| {
        let slot = out(runtime)?;
        let config = RuntimeConfig::from(config);
        core(config.validate())?;
        let weights = core(init_weights(&ModelConfig::default().with_seed(seed)))?;
        *slot = Box::into_raw(Box::new(CortexRuntime { prism: Arc::new(Prism::new(weights)), config }));
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn cortex_runtime_free(runtime: *mut CortexRuntime) {
    if !runtime.is_null() {
        drop(Box::from_raw(runtime));
    }
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct CortexMemoryReport {
    pub weight_bytes: usize,
    pub agent_bytes: usize,
    pub total_bytes: usize,
    pub agent_count: usize,
}

#[no_mangle]
pub unsafe extern "C" fn cortex_runtime_memory(
    runtime: *const CortexRuntime,
    report: *mut CortexMemoryReport,
) -> CortexStatus {
    guard(|| {
        let rt = runtime.as_ref().ok_or_else(|| fail(CortexStatus::NullPointer, "null runtime"))?;
        let m = rt.prism.memory_report();
        *out(report)? = CortexMemoryReport {
            weight_bytes: m.weight_bytes,
            agent_bytes: m.agent_bytes(),
            total_bytes: m.total_bytes,
            agent_count: m.agent_count,
        };
        Ok(())
    })
}

/// Runs the river over `prompt`. `script_json` may be NULL; otherwise a
/// NUL-terminated JSON script. On success `*run` must be released with
/// [`cortex_run_free`].
#[no_mangle]
pub unsafe extern "C" fn cortex_runtime_run(
    runtime: *const CortexRuntime,
    prompt: *const u8,
    prompt_len: usize,
    script_json: *const c_char,
    run: *mut *mut CortexRun,
) -> CortexStatus {
    guard(|| {
        let rt = runtime.as_ref().ok_or_else(|| fail(CortexStatus::NullPointer, "null runtime"))?;
        let slot = out(run)?;
        let prompt = slice_in(prompt, prompt_len)?;
        let script = if script_json.is_null() {
            None
        } else {
            let text = CStr::from_ptr(script_json)
                .to_str()
                .map_err(|_| fail(CortexStatus::InvalidArgument, "script is not UTF-8"))?;
            Some(core(Script::from_json(text))?)
        };
        let sched = core(Scheduler::new(rt.prism.clone(), rt.config))?;
        let output = core(sched.run(prompt, script.as_ref()))?;
        *slot = Box::into_raw(Box::new(CortexRun { output }));
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn cortex_run_free(run: *mut CortexRun) {
    if !run.is_null() {
        drop(Box::from_raw(run));
    }
}

/// Copies the generated token ids. `*len` always receives the full count.
#[no_mangle]
pub unsafe extern "C" fn cortex_run_tokens(run: *const CortexRun, buf: *mut u32, cap: usize, len: *mut usize) -> CortexStatus {
    guard(|| {
        let r = run.as_ref().ok_or_else(|| fail(CortexStatus::NullPointer, "null run"))?;
        copy_out(&r.output.transcript.generated_tokens, buf, cap, len)
    })
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct CortexRunSummary {
    pub triggers: usize,
    pub spawned: usize,
    pub injections: usize,
    pub rejections: usize,
    pub max_live_streams: usize,
}

#[no_mangle]
pub unsafe extern "C" fn cortex_run_summary(run: *const CortexRun, summary: *mut CortexRunSummary) -> CortexStatus {
    guard(|| {
        let r = &run.as_ref().ok_or_else(|| fail(CortexStatus::NullPointer, "null run"))?.output;
        *out(summary)? = CortexRunSummary {
            triggers: r.triggers.len(),
            spawned: r.agents().len(),
            injections: r.injections.len(),
            rejections: r.decisions.iter().filter(|d| !d.accepted).count(),
            max_live_streams: r.max_live_streams,
        };
        Ok(())
    })
}

/// Audit log as CSV bytes (no NUL terminator).
#[no_mangle]
pub unsafe extern "C" fn cortex_run_audit_csv(run: *const CortexRun, buf: *mut u8, cap: usize, len: *mut usize) -> CortexStatus {
    guard(|| {
        let r = run.as_ref().ok_or_else(|| fail(CortexStatus::NullPointer, "null run"))?;
        let mut csv = Vec::new();
        core(write_audit_csv(&r.output.audit, &mut csv))?;
        copy_out(&csv, buf, cap, len)
    })
}

/// Streaming trigger detector with a queue of detected triggers.
pub struct CortexRouter {
    router: Router,
    pending: VecDeque<Trigger>,
}

#[no_mangle]
pub extern "C" fn cortex_router_new() -> *mut CortexRouter {
    Box::into_raw(Box::new(CortexRouter { router: Router::new(), pending: VecDeque::new() }))
}

#[no_mangle]
pub unsafe extern "C" fn cortex_router_free(router: *mut CortexRouter) {
    if !router.is_null() {
        drop(Box::from_raw(router));
    }
}

/// Feeds a chunk; `*found` receives how many triggers it completed.
#[no_mangle]
pub unsafe extern "C" fn cortex_router_feed(
    router: *mut CortexRouter,
    data: *const u8,
    len: usize,
    found: *mut usize,
) -> CortexStatus {
    guard(|| {
        let r = router.as_mut().ok_or_else(|| fail(CortexStatus::NullPointer, "null router"))?;
        let bytes = slice_in(data, len)?;
        let new = r.router.feed(bytes);
        if !found.is_null() {
            *found = new.len();
        }
        r.pending.extend(new);
        Ok(())
    })
}

/// Pops the oldest pending trigger. Returns `CORTEX_STATUS_EMPTY` when none
/// is pending. If the payload does not fit, the trigger stays queued and
/// `*payload_len` holds the size needed.
#[no_mangle]
pub unsafe extern "C" fn cortex_router_pop(
    router: *mut CortexRouter,
    trigger_id: *mut u64,
    stream_position: *mut usize,
    payload: *mut u8,
    cap: usize,
    payload_len: *mut usize,
) -> CortexStatus {
    guard(|| {
        let r = router.as_mut().ok_or_else(|| fail(CortexStatus::NullPointer, "null router"))?;
        let Some(front) = r.pending.front() else {
            return Err(CortexStatus::Empty);
        };
        copy_out(front.payload.as_bytes(), payload, cap, payload_len)?;
        *out(trigger_id)? = front.trigger_id;
        *out(stream_position)? = front.stream_position;
        r.pending.pop_front();
        Ok(())
    })
}

/// Ends the stream; `*diagnostics` receives the number of dangling or
/// malformed patterns reported.
#[no_mangle]
pub unsafe extern "C" fn cortex_router_flush(router: *mut CortexRouter, diagnostics: *mut usize) -> CortexStatus {
    guard(|| {
        let r = router.as_mut().ok_or_else(|| fail(CortexStatus::NullPointer, "null router"))?;
        let n = r.router.flush().len();
        if !diagnostics.is_null() {
            *diagnostics = n;
        }
        Ok(())
    })
}

/// Cosine similarity of two `dim`-wide vectors.
#[no_mangle]
pub unsafe extern "C" fn cortex_gate_score(h_main: *const f32, t_side: *const f32, dim: usize, score: *mut f64) -> CortexStatus {
    guard(|| {
        let (h, t) = (slice_in(h_main, dim)?, slice_in(t_side, dim)?);
        *out(score)? = core(gate_score(h, t))?;
        Ok(())
    })
}

/// Gate decision. A zero vector is a rejection with `*degenerate` set and
/// `*score` NaN.
#[no_mangle]
pub unsafe extern "C" fn cortex_gate_decide(
    h_main: *const f32,
    t_side: *const f32,
    dim: usize,
    theta: f64,
    accepted: *mut bool,
    degenerate: *mut bool,
    score: *mut f64,
) -> CortexStatus {
    guard(|| {
        let (h, t) = (slice_in(h_main, dim)?, slice_in(t_side, dim)?);
        let d = core(decide(h, t, theta, 0))?;
        *out(accepted)? = d.accepted;
        if !degenerate.is_null() {
            *degenerate = d.degenerate;
        }
        if !score.is_null() {
            *score = d.score.unwrap_or(f64::NAN);
        }
        Ok(())
    })
}

/// Directed Hausdorff distance from `n` cloud points to `m` landmark points,
/// both row-major with `dim` columns.
#[no_mangle]
pub unsafe extern "C" fn cortex_hausdorff(
    cloud: *const f64,
    n: usize,
    landmarks: *const f64,
    m: usize,
    dim: usize,
    distance: *mut f64,
) -> CortexStatus {
    guard(|| {
        let c = core(PointCloud::new(dim, slice_in(cloud, n * dim)?.to_vec()))?;
        let l = core(PointCloud::new(dim, slice_in(landmarks, m * dim)?.to_vec()))?;
        *out(distance)? = core(hausdorff_distance(&c, &l))?;
        Ok(())
    })
}

/// Hybrid landmark selection over `n` row-major points with per-point
/// `density`. Writes `min(k, n)` indices in ascending order.
#[no_mangle]
pub unsafe extern "C" fn cortex_select_landmarks(
    points: *const f64,
    n: usize,
    dim: usize,
    density: *const f64,
    k: usize,
    lambda: f64,
    indices: *mut usize,
    cap: usize,
    len: *mut usize,
) -> CortexStatus {
    guard(|| {
        let cloud = core(PointCloud::new(dim, slice_in(points, n * dim)?.to_vec()))?;
        let density = slice_in(density, n)?;
        let picked = core(select_hybrid(&cloud, density, k, lambda))?.sorted_indices();
        copy_out(&picked, indices, cap, len)
    })
}
