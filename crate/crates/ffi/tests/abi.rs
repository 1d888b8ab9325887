use std::ffi::{CStr, CString};
use std::ptr;

use cortex_ffi::*;

fn last_error() -> String {
    let p = cortex_last_error();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

#[test]
fn version_is_a_c_string() {
    let v = unsafe { CStr::from_ptr(cortex_version()) };
    assert_eq!(v.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
}

#[test]
fn gate_matches_scalar_cosine() {
    let h = [1.0f32, 2.0, 2.0];
    let t = [2.0f32, 1.0, 2.0];
    let mut score = 0.0;
    assert_eq!(unsafe { cortex_gate_score(h.as_ptr(), t.as_ptr(), 3, &mut score) }, CortexStatus::Ok);
    assert!((score - 8.0 / 9.0).abs() < 1e-12);

    let (mut accepted, mut degenerate) = (false, true);
    let status = unsafe {
        cortex_gate_decide(h.as_ptr(), t.as_ptr(), 3, 0.5, &mut accepted, &mut degenerate, ptr::null_mut())
    };
    assert_eq!(status, CortexStatus::Ok);
    assert!(accepted && !degenerate);

    let zero = [0.0f32; 3];
    let status = unsafe {
        cortex_gate_decide(h.as_ptr(), zero.as_ptr(), 3, 0.5, &mut accepted, &mut degenerate, &mut score)
    };
    assert_eq!(status, CortexStatus::Ok);
    assert!(!accepted && degenerate && score.is_nan());
    assert_eq!(unsafe { cortex_gate_score(h.as_ptr(), zero.as_ptr(), 3, &mut score) }, CortexStatus::Degenerate);
    assert!(!last_error().is_empty());
}

#[test]
fn null_and_bad_arguments_map_to_status_codes() {
    let mut score = 0.0;
    assert_eq!(unsafe { cortex_gate_score(ptr::null(), ptr::null(), 3, &mut score) }, CortexStatus::NullPointer);
    let h = [1.0f32];
    let mut accepted = false;
    let status = unsafe {
        cortex_gate_decide(h.as_ptr(), h.as_ptr(), 1, 2.0, &mut accepted, ptr::null_mut(), ptr::null_mut())
    };
    assert_eq!(status, CortexStatus::Config);
    assert!(last_error().contains("theta"));

    let mut cfg = cortex_runtime_config_default();
    cfg.k = 0;
    let mut rt = ptr::null_mut();
    assert_eq!(unsafe { cortex_runtime_new(1, cfg, &mut rt) }, CortexStatus::Config);
    assert!(rt.is_null());
    unsafe { cortex_runtime_free(ptr::null_mut()) };
}

#[test]
fn hausdorff_and_selection_over_raw_arrays() {
    let cloud = [0.0f64, 10.0];
    let landmark = [0.0f64];
    let mut d = 0.0;
    assert_eq!(unsafe { cortex_hausdorff(cloud.as_ptr(), 2, landmark.as_ptr(), 1, 1, &mut d) }, CortexStatus::Ok);
    assert_eq!(d, 10.0);
    assert_eq!(unsafe { cortex_hausdorff(cloud.as_ptr(), 2, landmark.as_ptr(), 0, 1, &mut d) }, CortexStatus::Precondition);

    // Density-only selection picks the two densest points.
    let points = [0.0f64, 1.0, 2.0, 3.0, 4.0];
    let density = [0.1, 0.9, 0.2, 0.8, 0.0];
    let mut idx = [0usize; 5];
    let mut len = 0;
    let status = unsafe {
        cortex_select_landmarks(points.as_ptr(), 5, 1, density.as_ptr(), 2, 0.0, idx.as_mut_ptr(), 5, &mut len)
    };
    assert_eq!(status, CortexStatus::Ok);
    assert_eq!(&idx[..len], &[1, 3]);

    let status = unsafe {
        cortex_select_landmarks(points.as_ptr(), 5, 1, density.as_ptr(), 4, 0.0, idx.as_mut_ptr(), 2, &mut len)
    };
    assert_eq!(status, CortexStatus::BufferTooSmall);
    assert_eq!(len, 4);
}

#[test]
fn router_handle_streams_across_chunks() {
    let r = cortex_router_new();
    let mut found = 0;
    unsafe {
        assert_eq!(cortex_router_feed(r, b"say [TAS".as_ptr(), 8, &mut found), CortexStatus::Ok);
        assert_eq!(found, 0);
        assert_eq!(cortex_router_feed(r, b"K: check]".as_ptr(), 9, &mut found), CortexStatus::Ok);
        assert_eq!(found, 1);

        let (mut id, mut pos, mut len) = (9u64, 0usize, 0usize);
        let mut small = [0u8; 2];
        let status = cortex_router_pop(r, &mut id, &mut pos, small.as_mut_ptr(), 2, &mut len);
        assert_eq!(status, CortexStatus::BufferTooSmall);
        assert_eq!(len, 5);

        let mut buf = [0u8; 16];
        assert_eq!(cortex_router_pop(r, &mut id, &mut pos, buf.as_mut_ptr(), 16, &mut len), CortexStatus::Ok);
        assert_eq!((&buf[..len], id, pos), (&b"check"[..], 0, 16));
        assert_eq!(cortex_router_pop(r, &mut id, &mut pos, buf.as_mut_ptr(), 16, &mut len), CortexStatus::Empty);

        let mut diags = 0;
        cortex_router_feed(r, b"[TASK: dangling".as_ptr(), 15, ptr::null_mut());
        assert_eq!(cortex_router_flush(r, &mut diags), CortexStatus::Ok);
        assert_eq!(diags, 1);
        cortex_router_free(r);
    }
}

#[test]
fn runtime_runs_a_scripted_session() {
    let mut cfg = cortex_runtime_config_default();
    cfg.max_new_tokens = 32;
    let mut rt = ptr::null_mut();
    assert_eq!(unsafe { cortex_runtime_new(42, cfg, &mut rt) }, CortexStatus::Ok);

    let mut mem = CortexMemoryReport::default();
    assert_eq!(unsafe { cortex_runtime_memory(rt, &mut mem) }, CortexStatus::Ok);
    assert_eq!((mem.weight_bytes, mem.agent_count, mem.total_bytes), (919_808, 0, 919_808));

    let script = CString::new(r#"{"river_text": "ok [TASK: check] go", "thoughts": [{"text": "fine", "alignment": "aligned"}]}"#)
        .unwrap();
    let prompt = b"Count: ";
    let mut run = ptr::null_mut();
    let status = unsafe { cortex_runtime_run(rt, prompt.as_ptr(), prompt.len(), script.as_ptr(), &mut run) };
    assert_eq!(status, CortexStatus::Ok);

    let mut summary = CortexRunSummary::default();
    assert_eq!(unsafe { cortex_run_summary(run, &mut summary) }, CortexStatus::Ok);
    assert_eq!((summary.triggers, summary.spawned, summary.injections, summary.rejections), (1, 1, 1, 0));

    let mut tokens = vec![0u32; 64];
    let mut len = 0;
    assert_eq!(unsafe { cortex_run_tokens(run, tokens.as_mut_ptr(), 64, &mut len) }, CortexStatus::Ok);
    assert_eq!(len, 32);
    let forced: Vec<u32> = b"ok [TASK: check] go".iter().map(|&b| b as u32).collect();
    assert_eq!(&tokens[..forced.len()], &forced[..]);

    let mut need = 0;
    assert_eq!(unsafe { cortex_run_audit_csv(run, ptr::null_mut(), 0, &mut need) }, CortexStatus::BufferTooSmall);
    let mut csv = vec![0u8; need];
    assert_eq!(unsafe { cortex_run_audit_csv(run, csv.as_mut_ptr(), need, &mut need) }, CortexStatus::Ok);
    let csv = String::from_utf8(csv).unwrap();
    assert!(csv.starts_with("logical_time,agent_id,event,detail"));
    assert!(csv.contains(",injected,"));

    let bad = CString::new("{not json").unwrap();
    let mut other = ptr::null_mut();
    let status = unsafe { cortex_runtime_run(rt, prompt.as_ptr(), prompt.len(), bad.as_ptr(), &mut other) };
    assert_eq!(status, CortexStatus::Io);
    assert!(other.is_null());
    unsafe {
        cortex_run_free(run);
        cortex_runtime_free(rt);
    }
}

#[test]
fn header_declares_every_export() {
    let header = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/include/cortex.h")).unwrap();
    let src = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/src/lib.rs")).unwrap();
    let exports: Vec<&str> = src
        .lines()
        .filter_map(|l| l.split("extern \"C\" fn ").nth(1))
        .filter_map(|rest| rest.split('(').next())
        .collect();
    assert!(exports.len() >= 15, "{exports:?}");
    for name in exports {
        assert!(header.contains(&format!("{name}(")), "{name} missing from cortex.h");
    }
}
