mod common;

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use common::data_path;

fn sunny(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sunny")).args(args).output().expect("binary runs")
}

fn reference_args<'a>(cmd: &'a str, features: &'a str, runtimes: &'a str) -> Vec<&'a str> {
    vec![cmd, "--features", features, "--runtimes", runtimes]
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn schedule_for_reference_query() {
    let (f, r) = (data_path("reference_features.csv"), data_path("reference_runtimes.csv"));
    let (f, r) = (f.to_str().unwrap(), r.to_str().unwrap());
    let mut args = reference_args("schedule", f, r);
    args.extend(["--k", "5", "--backup", "s3", "--query", "2,11"]);
    let out = sunny(&args);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let doc: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    let entries: Vec<(String, f64)> = doc["entries"]
        .as_array()
        .unwrap()
        .iter()
        .map(|e| (e["solver"].as_str().unwrap().to_owned(), e["seconds"].as_f64().unwrap()))
        .collect();
    let expected = [("s4", 600.0), ("s1", 600.0), ("s3", 300.0), ("s2", 300.0)];
    assert_eq!(entries, expected.map(|(s, t)| (s.to_owned(), t)));
    assert_eq!(doc["slots"], 6);
}

#[test]
fn schedule_rejects_bad_input() {
    let (f, r) = (data_path("reference_features.csv"), data_path("reference_runtimes.csv"));
    let (f, r) = (f.to_str().unwrap(), r.to_str().unwrap());

    let mut zero_k = reference_args("schedule", f, r);
    zero_k.extend(["--k", "0", "--query", "2,11"]);
    assert_eq!(sunny(&zero_k).status.code(), Some(2));

    let mut bad_dim = reference_args("schedule", f, r);
    bad_dim.extend(["--query", "1,2,3"]);
    let out = sunny(&bad_dim);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("dimension"));

    let mut too_many = reference_args("schedule", f, r);
    too_many.extend(["--k", "9", "--query", "2,11"]);
    assert_eq!(sunny(&too_many).status.code(), Some(3));

    let mut unknown = reference_args("evaluate", f, r);
    unknown.extend(["--approaches", "SUNNY,ORACLE"]);
    assert_eq!(sunny(&unknown).status.code(), Some(3));

    // solved runtimes beyond a 2 s timeout are rejected at load time
    let mut short = reference_args("schedule", f, r);
    short.extend(["--timeout", "2", "--query", "2,11"]);
    assert_eq!(sunny(&short).status.code(), Some(3));
}

fn write_tiny_kb(dir: &Path) {
    fs::write(dir.join("features.csv"), "instance,f1\na,0\nb,1\nc,2\nd,3\n").unwrap();
    fs::write(
        dir.join("runtimes.csv"),
        "instance,solver,time,solved\n\
         a,x,1,1\na,y,10,0\nb,x,10,0\nb,y,2,1\nc,x,3,1\nc,y,4,1\nd,x,10,0\nd,y,10,0\n",
    )
    .unwrap();
}

#[test]
fn evaluate_minimal_protocol() {
    let dir = tempfile::tempdir().unwrap();
    write_tiny_kb(dir.path());
    let f = dir.path().join("features.csv");
    let r = dir.path().join("runtimes.csv");
    let reports = dir.path().join("reports");
    let out = sunny(&[
        "evaluate",
        "--features",
        f.to_str().unwrap(),
        "--runtimes",
        r.to_str().unwrap(),
        "--timeout",
        "10",
        "--k",
        "1",
        "--repeats",
        "1",
        "--folds",
        "2",
        "--out",
        reports.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    for ap in ["sunny", "vbs", "sbs", "knn", "equ"] {
        let csv = fs::read_to_string(reports.join(format!("{ap}.csv"))).unwrap();
        let cells = csv.lines().filter(|l| l.split(',').nth(2).is_some_and(|f| f.parse::<usize>().is_ok())).count();
        assert_eq!(cells, 2, "{ap}: {csv}");
        let json: serde_json::Value =
            serde_json::from_str(&fs::read_to_string(reports.join(format!("{ap}.json"))).unwrap()).unwrap();
        assert_eq!(json["repeats"].as_array().unwrap().len(), 1);
    }
    let cmp = fs::read_to_string(reports.join("comparison.csv")).unwrap();
    assert_eq!(cmp.lines().next(), Some("approach,psi,ast"));
    assert_eq!(cmp.lines().count(), 6);
    // d is unsolvable, so even the virtual best tops out at 75%
    let vbs: Vec<&str> = cmp.lines().find(|l| l.starts_with("VBS,")).unwrap().split(',').collect();
    assert_eq!(vbs[1].parse::<f64>().unwrap(), 75.0);
}

#[test]
fn synthetic_generation_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let run = |name: &str, seed: &str| {
        let out_dir = dir.path().join(name);
        let out = sunny(&["gen-synthetic", "--instances", "60", "--seed", seed, "--out", out_dir.to_str().unwrap()]);
        assert!(out.status.success());
        (fs::read(out_dir.join("features.csv")).unwrap(), fs::read(out_dir.join("runtimes.csv")).unwrap())
    };
    let a = run("a", "7");
    assert_eq!(a, run("b", "7"));
    assert_ne!(a, run("c", "8"));
}

#[test]
fn sweep_emits_one_row_per_grid_point() {
    let dir = tempfile::tempdir().unwrap();
    let kb = dir.path().join("kb");
    assert!(sunny(&["gen-synthetic", "--instances", "40", "--seed", "1", "--out", kb.to_str().unwrap()])
        .status
        .success());
    let f = kb.join("features.csv");
    let r = kb.join("runtimes.csv");
    let out = sunny(&[
        "sweep",
        "--features",
        f.to_str().unwrap(),
        "--runtimes",
        r.to_str().unwrap(),
        "--repeats",
        "1",
        "--folds",
        "2",
        "--m-range",
        "2..4",
        "--k-range",
        "1..20",
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = stdout(&out);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("m,k,psi,ast,avg_subpf_size,max_subpf_size"));
    assert_eq!(lines.count(), 3 * 20);
}

#[cfg(unix)]
#[test]
fn run_executes_scheduled_solvers() {
    let dir = tempfile::tempdir().unwrap();
    let (f, r) = (data_path("reference_features.csv"), data_path("reference_runtimes.csv"));
    let schedule = dir.path().join("schedule.json");
    let out = sunny(&[
        "schedule",
        "--features",
        f.to_str().unwrap(),
        "--runtimes",
        r.to_str().unwrap(),
        "--k",
        "5",
        "--backup",
        "s3",
        "--query",
        "2,11",
        "--out",
        schedule.to_str().unwrap(),
    ]);
    assert!(out.status.success());

    let instance = dir.path().join("p.fzn");
    fs::write(&instance, "").unwrap();
    let config = dir.path().join("solvers.toml");
    // s4 runs first and exits without a solution; s1 solves
    fs::write(
        &config,
        r#"
[solvers.s1]
command = ["sh", "-c", "sleep 0.1; echo '=====SOLVED'", "{instance}"]
success_marker = "=====SOLVED"
[solvers.s2]
command = ["sh", "-c", "sleep 5", "{instance}"]
[solvers.s3]
command = ["sh", "-c", "sleep 5", "{instance}"]
[solvers.s4]
command = ["sh", "-c", "exit 1", "{instance}"]
"#,
    )
    .unwrap();
    let out = sunny(&[
        "run",
        "--solvers-config",
        config.to_str().unwrap(),
        "--instance",
        instance.to_str().unwrap(),
        "--schedule",
        schedule.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let trace: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(trace["solved"], true);
    let steps = trace["steps"].as_array().unwrap();
    assert_eq!(steps[0]["solver"], "s4");
    assert_eq!(steps[0]["outcome"], "premature-exit");
    assert_eq!(steps[1]["solver"], "s1");
    assert_eq!(steps[1]["outcome"], "solved");

    // nothing solves within a 50 ms budget
    let out = sunny(&[
        "run",
        "--solvers-config",
        config.to_str().unwrap(),
        "--instance",
        instance.to_str().unwrap(),
        "--schedule",
        schedule.to_str().unwrap(),
        "--timeout",
        "0.05",
    ]);
    assert_eq!(out.status.code(), Some(1), "{}", String::from_utf8_lossy(&out.stderr));
}
