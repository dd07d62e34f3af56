use std::fs;
use std::path::{Path, PathBuf};

use serde_json::Value;
use tourplan::cli::{exit_code, run, EXIT_INFEASIBLE, EXIT_INTERNAL, EXIT_INVALID, EXIT_OK, EXIT_TIME_LIMIT};
use tourplan::error::Error;
use tourplan::domain::Problem;
use tourplan::instances::{fixture_t1, read_instance_file, write_instance_file};

fn call(args: &[&str]) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let argv = std::iter::once("tourplan").chain(args.iter().copied());
    let code = run(argv, &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

fn t1_file(dir: &Path, problem: Problem) -> PathBuf {
    let path = dir.join("t1.json");
    write_instance_file(&fixture_t1(problem), &path).unwrap();
    path
}

fn events(dir: &Path) -> Vec<Value> {
    fs::read_to_string(dir.join("events.jsonl"))
        .unwrap()
        .lines()
        .map(|l| serde_json::from_str(l).unwrap())
        .collect()
}

#[test]
fn solve_writes_itinerary_and_events() {
    let dir = tempfile::tempdir().unwrap();
    let inst = t1_file(dir.path(), Problem::Rmt { budget: 10.0 });
    let out = dir.path().join("run");
    let (code, stdout, stderr) = call(&[
        "solve",
        "--instance",
        inst.to_str().unwrap(),
        "--mode",
        "rmt",
        "--budget",
        "6",
        "--epsilon",
        "0.05",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code, EXIT_OK, "{stdout}{stderr}");
    let doc: Value = serde_json::from_str(&fs::read_to_string(out.join("itinerary.json")).unwrap()).unwrap();
    assert!((doc["objective"].as_f64().unwrap() - 11.0).abs() < 1e-6);
    assert_eq!(doc["status"], "optimal");
    assert_eq!(doc["tours"][0]["start_base"], 1);
    let ev = events(&out);
    assert!(!ev.is_empty());
    assert_eq!(ev.last().unwrap()["kind"], "done");
    let gaps: Vec<f64> = ev.iter().map(|e| e["gap"].as_f64().unwrap()).collect();
    assert!(gaps.windows(2).all(|w| w[1] <= w[0]));
    for e in &ev {
        for key in ["elapsed", "incumbent", "bound", "gap", "kind"] {
            assert!(e.get(key).is_some(), "missing {key}");
        }
    }
}

#[test]
fn export_only_writes_model_and_stops() {
    let dir = tempfile::tempdir().unwrap();
    let inst = t1_file(dir.path(), Problem::Rmt { budget: 6.0 });
    let model = dir.path().join("model.mps");
    let (code, _, stderr) =
        call(&["solve", "--instance", inst.to_str().unwrap(), "--export-only", model.to_str().unwrap()]);
    assert_eq!(code, EXIT_OK, "{stderr}");
    let text = fs::read_to_string(&model).unwrap();
    assert!(text.starts_with("NAME"));
    assert!(text.trim_end().ends_with("ENDATA"));
    assert!(!dir.path().join("itinerary.json").exists());

    let lp = dir.path().join("model.lp");
    let (code, _, _) = call(&["solve", "--instance", inst.to_str().unwrap(), "--export-only", lp.to_str().unwrap()]);
    assert_eq!(code, EXIT_OK);
    assert!(fs::read_to_string(&lp).unwrap().to_lowercase().contains("maximize"));
}

#[test]
fn export_alongside_solve() {
    let dir = tempfile::tempdir().unwrap();
    let inst = t1_file(dir.path(), Problem::Bmt { requirement: 11.0 });
    let out = dir.path().join("run");
    let (code, _, stderr) = call(&[
        "solve",
        "--instance",
        inst.to_str().unwrap(),
        "--export",
        "lp",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code, EXIT_OK, "{stderr}");
    assert!(out.join("model.lp").exists());
    let doc: Value = serde_json::from_str(&fs::read_to_string(out.join("itinerary.json")).unwrap()).unwrap();
    assert_eq!(doc["mode"], "bmt");
    assert!((doc["objective"].as_f64().unwrap() - 6.0).abs() < 1e-6);
}

#[test]
fn gap_target_stops_with_small_gap() {
    let dir = tempfile::tempdir().unwrap();
    let inst = t1_file(dir.path(), Problem::Rmt { budget: 10.0 });
    let out = dir.path().join("run");
    let (code, _, _) =
        call(&["solve", "--instance", inst.to_str().unwrap(), "--gap", "0.2", "--out", out.to_str().unwrap()]);
    assert_eq!(code, EXIT_OK);
    let ev = events(&out);
    let last = ev.last().unwrap();
    assert!(last["gap"].as_f64().unwrap() <= 0.2);
}

#[test]
fn oracle_prints_value() {
    let dir = tempfile::tempdir().unwrap();
    let inst = t1_file(dir.path(), Problem::Rmt { budget: 6.0 });
    let (code, stdout, _) =
        call(&["oracle", "--instance", inst.to_str().unwrap(), "--mode", "bmt", "--requirement", "11"]);
    assert_eq!(code, EXIT_OK);
    assert!((stdout.trim().parse::<f64>().unwrap() - 6.0).abs() < 1e-9);
    let (_, stdout, _) = call(&["oracle", "--instance", inst.to_str().unwrap()]);
    assert!((stdout.trim().parse::<f64>().unwrap() - 11.0).abs() < 1e-9);
}

#[test]
fn approx_reports_segments_and_samples() {
    let dir = tempfile::tempdir().unwrap();
    let samples = dir.path().join("samples.csv");
    let (code, stdout, stderr) =
        call(&["approx", "--curve", "exp:1.0", "--epsilon", "0.05", "--out", samples.to_str().unwrap()]);
    assert_eq!(code, EXIT_OK, "{stderr}");
    let err_line = stdout.lines().find(|l| l.starts_with("max relative error")).unwrap();
    let err: f64 = err_line.split_whitespace().nth(3).unwrap().parse().unwrap();
    assert!(err <= 0.05, "{err}");
    let text = fs::read_to_string(&samples).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("t,f,approx"));
    assert!(lines.count() > 100);
}

#[test]
fn gen_grid_has_twenty_pois() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("grid.json");
    let (code, _, _) =
        call(&["gen", "grid", "--rows", "4", "--cols", "5", "--seed", "7", "--out", path.to_str().unwrap()]);
    assert_eq!(code, EXIT_OK);
    assert_eq!(read_instance_file(&path).unwrap().n(), 20);
}

#[test]
fn gen_random_and_ingest() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("random.json");
    let (code, _, stderr) = call(&[
        "gen", "random", "--n", "8", "--seed", "3", "--curve", "exp", "--mode", "bmt", "--out", path.to_str().unwrap(),
    ]);
    assert_eq!(code, EXIT_OK, "{stderr}");
    assert_eq!(read_instance_file(&path).unwrap().n(), 8);

    let pois = dir.path().join("pois.csv");
    fs::write(&pois, "name,rank,n_review\nMuseum,1,27000\nPalace,2,8000\nBazaar,3,1000\n").unwrap();
    let dist = dir.path().join("dist.csv");
    fs::write(&dist, "0,10,20\n10,0,\n20,15,0\n").unwrap();
    let out = dir.path().join("city.json");
    let (code, _, stderr) = call(&[
        "gen",
        "ingest",
        "--pois",
        pois.to_str().unwrap(),
        "--distances",
        dist.to_str().unwrap(),
        "--bases",
        "1",
        "--budget",
        "120",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code, EXIT_OK, "{stderr}");
    let inst = read_instance_file(&out).unwrap();
    assert_eq!(inst.n(), 3);
    assert_eq!(inst.bases(), &[1]);
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    fs::write(&bad, "{\"pois\": 3}").unwrap();
    let (code, _, stderr) = call(&["solve", "--instance", bad.to_str().unwrap(), "--out", dir.path().to_str().unwrap()]);
    assert_eq!(code, EXIT_INVALID);
    assert!(stderr.contains("error"));

    let (code, _, _) = call(&["solve", "--bogus"]);
    assert_eq!(code, EXIT_INVALID);

    let inst = t1_file(dir.path(), Problem::Rmt { budget: 6.0 });
    let inst = inst.to_str().unwrap();
    let out = dir.path().join("run");
    let out = out.to_str().unwrap();
    let (code, _, _) = call(&["solve", "--instance", inst, "--mode", "bmt", "--requirement", "1000", "--out", out]);
    assert_eq!(code, EXIT_INFEASIBLE);

    let (code, _, _) = call(&["solve", "--instance", inst, "--time-limit", "0", "--out", out]);
    assert_eq!(code, EXIT_TIME_LIMIT);

    let (code, _, _) = call(&["solve", "--instance", inst, "--deterministic", "--threads", "2", "--out", out]);
    assert_eq!(code, EXIT_INVALID);

    let (code, _, _) = call(&["solve", "--instance", inst, "--epsilon", "1.5", "--out", out]);
    assert_eq!(code, EXIT_INVALID);
}

#[test]
fn bench_table_shape() {
    let dir = tempfile::tempdir().unwrap();
    let table = dir.path().join("bench.csv");
    let inst_dir = dir.path().join("instances");
    let args = [
        "bench",
        "--sizes",
        "2x3",
        "--reps",
        "2",
        "--time-limit",
        "60",
        "--out",
        table.to_str().unwrap(),
        "--instances-dir",
        inst_dir.to_str().unwrap(),
    ];
    let (code, _, stderr) = call(&args);
    assert_eq!(code, EXIT_OK, "{stderr}");
    let text = fs::read_to_string(&table).unwrap();
    let mut rdr = csv::Reader::from_reader(text.as_bytes());
    let header: Vec<String> = rdr.headers().unwrap().iter().map(String::from).collect();
    let times: Vec<f64> = header
        .iter()
        .filter_map(|h| h.strip_prefix("time_"))
        .map(|t| t.parse().unwrap())
        .collect();
    assert_eq!(times, vec![100.0, 50.0, 20.0, 10.0, 5.0, 1.0, 0.0]);
    let rows: Vec<csv::StringRecord> = rdr.records().map(|r| r.unwrap()).collect();
    assert_eq!(rows.len(), 4);
    let done = header.iter().position(|h| h == "reached_0").unwrap();
    assert!(rows.iter().all(|r| &r[done] == "2"));
    assert_eq!(fs::read_dir(&inst_dir).unwrap().count(), 8);

    // Same seeds, deterministic solver: identical value columns.
    let (code, _, _) = call(&args);
    assert_eq!(code, EXIT_OK);
    let again = fs::read_to_string(&table).unwrap();
    let values = |t: &str| -> Vec<String> {
        let mut r = csv::Reader::from_reader(t.as_bytes());
        r.records().map(|rec| rec.unwrap().iter().next_back().unwrap().to_string()).collect()
    };
    assert_eq!(values(&text), values(&again));
}

#[test]
fn solve_matches_oracle_end_to_end() {
    let dir = tempfile::tempdir().unwrap();
    for k in 0..25u64 {
        let n = 3 + (k % 4) as usize;
        let path = dir.path().join(format!("r{k}.json"));
        let seed = (40 + k).to_string();
        let (code, _, stderr) =
            call(&["gen", "random", "--n", &n.to_string(), "--seed", &seed, "--out", path.to_str().unwrap()]);
        assert_eq!(code, EXIT_OK, "{stderr}");
        let inst = path.to_str().unwrap();
        let (code, stdout, stderr) = call(&["oracle", "--instance", inst]);
        assert_eq!(code, EXIT_OK, "{stderr}");
        let exact: f64 = stdout.trim().parse().unwrap();
        let out = dir.path().join(format!("run{k}"));
        let (code, _, stderr) = call(&["solve", "--instance", inst, "--gap", "0", "--out", out.to_str().unwrap()]);
        assert_eq!(code, EXIT_OK, "{stderr}");
        let doc: Value = serde_json::from_str(&fs::read_to_string(out.join("itinerary.json")).unwrap()).unwrap();
        let got = doc["objective"].as_f64().unwrap();
        assert!((got - exact).abs() <= 1e-6 * exact.abs().max(1.0), "instance {k}: solve {got} oracle {exact}");
    }
}

#[test]
fn errors_map_to_distinct_exit_codes() {
    assert_eq!(exit_code(&Error::Numerical("lp".into())), EXIT_INTERNAL);
    assert_eq!(exit_code(&Error::InvalidInstance("x".into())), EXIT_INVALID);
    assert_eq!(exit_code(&Error::Infeasible), EXIT_INFEASIBLE);
    assert_eq!(exit_code(&Error::TimeLimitNoIncumbent), EXIT_TIME_LIMIT);
}
