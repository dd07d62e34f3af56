use std::ffi::{CStr, CString};
use std::path::{Path, PathBuf};
use std::process::Command;
use std::ptr;

use tourplan::domain::Problem;
use tourplan::instances::{fixture_t1, write_instance};
use tourplan_ffi::*;

fn t1_json(problem: Problem) -> CString {
    CString::new(write_instance(&fixture_t1(problem))).unwrap()
}

fn load(problem: Problem) -> *mut TpInstance {
    let json = t1_json(problem);
    let mut inst = ptr::null_mut();
    assert_eq!(unsafe { tp_instance_from_json(json.as_ptr(), &mut inst) }, TpStatus::Ok);
    assert!(!inst.is_null());
    inst
}

fn last_error() -> String {
    let p = tp_last_error_message();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

#[test]
fn solve_rmt_and_walk_stops() {
    let inst = load(Problem::Rmt { budget: 6.0 });
    unsafe {
        assert_eq!(tp_instance_poi_count(inst), 3);
        let opts = tp_solve_options_default();
        let mut plan = ptr::null_mut();
        assert_eq!(tp_solve(inst, &opts, &mut plan), TpStatus::Ok);
        assert!((tp_plan_objective(plan) - 11.0).abs() < 1e-6);
        assert!(tp_plan_total_time(plan) <= 6.0 + 1e-6);
        assert!(tp_plan_gap(plan) <= 1e-9);
        assert_eq!(tp_plan_tour_count(plan), 1);
        assert_eq!(tp_plan_start_base(plan, 0), 1);

        let mut total = 0.0;
        for k in 0..tp_plan_stop_count(plan, 0) {
            let (mut poi, mut d) = (0u32, 0.0f64);
            assert_eq!(tp_plan_stop(plan, 0, k, &mut poi, &mut d), TpStatus::Ok);
            assert!((1..=3).contains(&poi));
            total += d;
        }
        assert!(total > 0.0);

        let (mut poi, mut d) = (0u32, 0.0f64);
        assert_eq!(tp_plan_stop(plan, 0, 99, &mut poi, &mut d), TpStatus::InvalidArgument);
        assert!(last_error().contains("out of range"));

        let json = tp_plan_to_json(plan);
        let doc: serde_json::Value = serde_json::from_str(CStr::from_ptr(json).to_str().unwrap()).unwrap();
        assert_eq!(doc["mode"], "rmt");
        tp_string_free(json);

        tp_plan_free(plan);
        tp_instance_free(inst);
    }
}

#[test]
fn switch_to_bmt_and_compare_with_oracle() {
    let inst = load(Problem::Rmt { budget: 6.0 });
    unsafe {
        assert_eq!(tp_instance_set_bmt(inst, 11.0), TpStatus::Ok);
        let mut exact = 0.0;
        assert_eq!(tp_oracle(inst, &mut exact), TpStatus::Ok);
        let mut plan = ptr::null_mut();
        assert_eq!(tp_solve(inst, ptr::null(), &mut plan), TpStatus::Ok);
        assert!((tp_plan_objective(plan) - exact).abs() < 1e-6);
        assert!(tp_plan_true_reward(plan) >= 11.0 - 1e-6);
        tp_plan_free(plan);

        assert_eq!(tp_instance_set_bmt(inst, 1000.0), TpStatus::Ok);
        let mut plan = ptr::null_mut();
        assert_eq!(tp_solve(inst, ptr::null(), &mut plan), TpStatus::Infeasible);
        assert!(plan.is_null());
        assert!(!last_error().is_empty());
        tp_instance_free(inst);
    }
}

#[test]
fn error_codes() {
    unsafe {
        let mut inst = ptr::null_mut();
        let bad = CString::new("{\"pois\": 3}").unwrap();
        assert_eq!(tp_instance_from_json(bad.as_ptr(), &mut inst), TpStatus::InvalidInput);
        assert!(inst.is_null());
        assert_eq!(tp_instance_from_json(ptr::null(), &mut inst), TpStatus::InvalidArgument);
        let missing = CString::new("/nonexistent/instance.json").unwrap();
        assert_ne!(tp_instance_from_file(missing.as_ptr(), &mut inst), TpStatus::Ok);

        let inst = load(Problem::Rmt { budget: 6.0 });
        assert_eq!(tp_instance_set_rmt(inst, f64::NAN), TpStatus::InvalidArgument);
        let mut opts = tp_solve_options_default();
        opts.epsilon = 1.5;
        let mut plan = ptr::null_mut();
        assert_eq!(tp_solve(inst, &opts, &mut plan), TpStatus::InvalidArgument);
        opts = tp_solve_options_default();
        opts.tours = 0;
        assert_eq!(tp_solve(inst, &opts, &mut plan), TpStatus::InvalidArgument);
        assert_eq!(tp_solve(ptr::null(), &opts, &mut plan), TpStatus::InvalidArgument);

        // Null handles are tolerated by queries and destructors.
        assert!(tp_plan_objective(ptr::null()).is_nan());
        assert_eq!(tp_plan_tour_count(ptr::null()), 0);
        tp_plan_free(ptr::null_mut());
        tp_instance_free(inst);
    }
    assert!(!unsafe { CStr::from_ptr(tp_version()) }.to_str().unwrap().is_empty());
}

#[test]
fn load_from_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("t1.json");
    std::fs::write(&path, t1_json(Problem::Rmt { budget: 6.0 }).to_bytes()).unwrap();
    let c = CString::new(path.to_str().unwrap()).unwrap();
    let mut inst = ptr::null_mut();
    unsafe {
        assert_eq!(tp_instance_from_file(c.as_ptr(), &mut inst), TpStatus::Ok);
        assert_eq!(tp_instance_poi_count(inst), 3);
        tp_instance_free(inst);
    }
}

fn header() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("include/tourplan.h")
}

#[test]
fn header_declares_every_export() {
    let text = std::fs::read_to_string(header()).unwrap();
    let src = std::fs::read_to_string(Path::new(env!("CARGO_MANIFEST_DIR")).join("src/lib.rs")).unwrap();
    let exported: Vec<&str> = src
        .lines()
        .filter_map(|l| l.split("extern \"C\" fn ").nth(1))
        .map(|rest| rest.split('(').next().unwrap())
        .collect();
    assert!(exported.len() > 15);
    for name in exported {
        assert!(text.contains(&format!("{name}(")), "{name} missing from header");
    }
    assert!(text.contains("typedef struct TpInstance TpInstance;"));
    assert!(text.contains("TP_STATUS_OK = 0"));
}

// Compiles and runs a small C program against the header and the static
// library when a C compiler is on PATH.
#[test]
fn c_program_links_against_static_library() {
    let Ok(cc) = which_cc() else { return };
    // target/<profile>/deps/<test-binary>
    let exe = std::env::current_exe().unwrap();
    let profile_dir = exe.parent().unwrap().parent().unwrap();
    let lib = profile_dir.join("libtourplan_ffi.a");
    if !lib.exists() {
        return;
    }
    let dir = tempfile::tempdir().unwrap();
    let inst_path = dir.path().join("t1.json");
    std::fs::write(&inst_path, t1_json(Problem::Rmt { budget: 6.0 }).to_bytes()).unwrap();
    let src = dir.path().join("main.c");
    std::fs::write(
        &src,
        r#"#include <stdio.h>
#include "tourplan.h"
int main(int argc, char **argv) {
    TpInstance *inst = NULL;
    if (tp_instance_from_file(argv[1], &inst) != TP_STATUS_OK) { fprintf(stderr, "%s\n", tp_last_error_message()); return 1; }
    TpSolveOptions opts = tp_solve_options_default();
    TpPlan *plan = NULL;
    if (tp_solve(inst, &opts, &plan) != TP_STATUS_OK) return 2;
    printf("%.6f\n", tp_plan_objective(plan));
    tp_plan_free(plan);
    tp_instance_free(inst);
    return 0;
}
"#,
    )
    .unwrap();
    let bin = dir.path().join("main");
    let status = Command::new(cc)
        .arg(&src)
        .arg("-I")
        .arg(header().parent().unwrap())
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm"])
        .arg("-o")
        .arg(&bin)
        .status()
        .unwrap();
    assert!(status.success());
    let out = Command::new(&bin).arg(&inst_path).output().unwrap();
    assert!(out.status.success());
    let value: f64 = String::from_utf8(out.stdout).unwrap().trim().parse().unwrap();
    assert!((value - 11.0).abs() < 1e-6);
}

fn which_cc() -> Result<&'static str, ()> {
    for cc in ["cc", "gcc", "clang"] {
        if Command::new(cc).arg("--version").output().is_ok_and(|o| o.status.success()) {
            return Ok(cc);
        }
    }
    Err(())
}
