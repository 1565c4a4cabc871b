use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value as Json;
use tempfile::TempDir;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_subgreedy"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

fn stdout_json(out: &Output) -> Json {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| {
        panic!(
            "stdout is not JSON ({e}): {}",
            String::from_utf8_lossy(&out.stdout)
        )
    })
}

fn write(dir: &TempDir, name: &str, text: &str) -> String {
    let path = dir.path().join(name);
    std::fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_string()
}

fn c4(dir: &TempDir) -> String {
    write(
        dir,
        "c4.json",
        r#"{"kind": "coverage", "n": 4, "weights": ["1", "1", "1", "1"],
            "sets": [[0, 1, 2], [0, 1], [2, 3], [3]]}"#,
    )
}

fn path_str(dir: &TempDir, name: &str) -> String {
    dir.path().join(name).to_str().unwrap().to_string()
}

#[test]
fn solve_coverage() {
    let dir = TempDir::new().unwrap();
    let inst = c4(&dir);
    let out = run(&["solve", "--instance", &inst, "--T", "2"]);
    assert_eq!(code(&out), 0);
    let j = stdout_json(&out);
    assert_eq!(j["value"], "4/1");
    assert_eq!(j["chosen"], serde_json::json!([0, 2]));

    let lazy = run(&["solve", "--instance", &inst, "--T", "2", "--lazy"]);
    assert_eq!(stdout_json(&lazy)["chosen"], j["chosen"]);

    let last = run(&["solve", "--instance", &inst, "--T", "1", "--policy", "last"]);
    assert_eq!(stdout_json(&last)["chosen"], serde_json::json!([0]));
}

#[test]
fn solve_rejects_bad_input() {
    let dir = TempDir::new().unwrap();
    let inst = c4(&dir);
    assert_eq!(code(&run(&["solve", "--instance", &inst, "--T", "9"])), 2);
    assert_eq!(
        code(&run(&[
            "solve",
            "--instance",
            "/nonexistent.json",
            "--T",
            "1"
        ])),
        2
    );
    let bad = write(&dir, "bad.json", "{not json");
    assert_eq!(code(&run(&["solve", "--instance", &bad, "--T", "1"])), 2);
    assert_eq!(
        code(&run(&[
            "solve",
            "--instance",
            &inst,
            "--T",
            "1",
            "--policy",
            "random"
        ])),
        2
    );
    assert_eq!(
        code(&run(&["solve", "--instance", &inst, "--T", "1", "--bogus"])),
        2
    );
}

#[test]
fn gen_tight_then_solve_then_verify() {
    let dir = TempDir::new().unwrap();
    let f = path_str(&dir, "f.json");
    let out = run(&[
        "gen-tight",
        "--n",
        "7",
        "--T",
        "4",
        "--alpha",
        "1",
        "--out",
        &f,
    ]);
    assert_eq!(code(&out), 0);
    let j = stdout_json(&out);
    assert_eq!(j["predicted"]["ratio"], "175/256");
    let file: Json = serde_json::from_str(&std::fs::read_to_string(&f).unwrap()).unwrap();
    assert_eq!(file["kind"], "tight-family");
    assert_eq!(file["r"], 3);

    let solved = stdout_json(&run(&["solve", "--instance", &f, "--T", "4"]));
    assert_eq!(solved["value"], j["predicted"]["greedy"]);

    let verified = run(&["verify-instance", "--instance", &f, "--T", "4"]);
    assert_eq!(code(&verified), 0);
    let report = stdout_json(&verified);
    assert_eq!(report["theorem1"]["ratio"], "175/256");
    assert_eq!(report["theorem1"]["g_tilde"], "175/256");
}

#[test]
fn gen_tight_small_t_convention() {
    let dir = TempDir::new().unwrap();
    let g = path_str(&dir, "g.json");
    let out = run(&[
        "gen-tight",
        "--n",
        "4",
        "--T",
        "2",
        "--alpha",
        "1",
        "--out",
        &g,
    ]);
    assert_eq!(code(&out), 0);
    let j = stdout_json(&out);
    assert!(j["predicted"].is_null());
    assert!(!j["convention"].as_str().unwrap().is_empty());
    let file: Json = serde_json::from_str(&std::fs::read_to_string(&g).unwrap()).unwrap();
    assert_eq!(file["r"], 2);
}

#[test]
fn gen_tight_rejects_bad_alpha() {
    let dir = TempDir::new().unwrap();
    let f = path_str(&dir, "x.json");
    let out = run(&[
        "gen-tight",
        "--n",
        "3",
        "--T",
        "2",
        "--alpha",
        "2",
        "--out",
        &f,
    ]);
    assert_eq!(code(&out), 2);
    assert!(!Path::new(&f).exists());
}

#[test]
fn solve_tight_value() {
    let dir = TempDir::new().unwrap();
    let f = path_str(&dir, "t.json");
    assert_eq!(
        code(&run(&[
            "gen-tight",
            "--n",
            "4",
            "--T",
            "3",
            "--alpha",
            "1",
            "--out",
            &f
        ])),
        0
    );
    let j = stdout_json(&run(&["solve", "--instance", &f, "--T", "3"]));
    assert_eq!(j["value"], "7/3");
    let report = run(&["verify-instance", "--instance", &f, "--T", "3"]);
    assert_eq!(code(&report), 0);
    let r = stdout_json(&report);
    assert_eq!(
        r["theorem1"]["ratio"],
        r["theorem1"]["bound_per_optimum"][0]
    );
}

#[test]
fn verify_exit_codes() {
    let dir = TempDir::new().unwrap();
    let superm = write(
        &dir,
        "sup.json",
        r#"{"kind": "explicit-table", "n": 2, "values": ["0", "1", "1", "3"]}"#,
    );
    let out = run(&["verify-instance", "--instance", &superm, "--T", "1"]);
    assert_eq!(code(&out), 1);
    assert_eq!(stdout_json(&out)["submodular"], false);

    let big = write(
        &dir,
        "big.json",
        r#"{"kind": "explicit-table", "n": 30, "values": ["0"]}"#,
    );
    assert_eq!(
        code(&run(&["verify-instance", "--instance", &big, "--T", "2"])),
        3
    );

    let weights = vec!["\"1\""; 30].join(",");
    let additive = write(
        &dir,
        "add.json",
        &format!(r#"{{"kind": "additive", "n": 30, "weights": [{weights}]}}"#),
    );
    assert_eq!(
        code(&run(&[
            "verify-instance",
            "--instance",
            &additive,
            "--T",
            "2"
        ])),
        3
    );
}

#[test]
fn lp_certificate() {
    let out = run(&["lp-cert", "--T", "3", "--m", "1", "--alpha", "1"]);
    assert_eq!(code(&out), 0);
    let j = stdout_json(&out);
    assert_eq!(
        j["certificate"]["c"],
        serde_json::json!(["4/27", "2/9", "1/3"])
    );
    assert_eq!(j["certificate"]["objective"], "19/27");
    assert_eq!(j["head"], "10/27");
    assert_eq!(j["tail"], "1/3");
    assert_eq!(j["dual_simplex"]["value"], "19/27");
    assert_eq!(j["weak_duality"], true);
    assert_eq!(
        code(&run(&["lp-cert", "--T", "3", "--m", "3", "--alpha", "1"])),
        2
    );
    assert_eq!(
        code(&run(&["lp-cert", "--T", "100", "--m", "0", "--alpha", "1"])),
        3
    );
}

#[test]
fn audit_corollary_outcomes() {
    let out = run(&["audit-corollary", "--n", "4", "--alpha", "1"]);
    assert_eq!(code(&out), 0);
    assert_eq!(stdout_json(&out)["consistent"], true);

    let dir = TempDir::new().unwrap();
    let w = path_str(&dir, "w.json");
    let out = run(&[
        "audit-corollary",
        "--n",
        "3",
        "--alpha",
        "1",
        "--witness-out",
        &w,
    ]);
    assert_eq!(code(&out), 1);
    let j = stdout_json(&out);
    assert_eq!(j["corollary_floor"], "1/1");
    assert_eq!(j["min_value"], "3/4");
    let solved = stdout_json(&run(&["verify-instance", "--instance", &w, "--T", "2"]));
    assert_eq!(solved["theorem1"]["ratio"], "3/4");

    let out = run(&["audit-corollary", "--n", "7", "--alpha", "1"]);
    assert_eq!(code(&out), 1);
    let j = stdout_json(&out);
    assert_eq!(j["corollary_floor"], "19/27");
    assert_eq!(j["min_value"], "175/256");
    assert_eq!(j["witness_instance"]["verified_ratio"], "175/256");
}

#[test]
fn sweep_csv() {
    let out = run(&["sweep", "--n-min", "4", "--n-max", "4", "--alpha", "1"]);
    assert_eq!(code(&out), 0);
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert!(lines[0].starts_with("n,T,alpha,m_lower,g_nwf,g_cc,g_tilde"));
    assert_eq!(lines.len(), 5);
    let row: Vec<&str> = lines[3].split(',').collect();
    assert_eq!(&row[..2], &["4", "3"]);
    assert_eq!(row[6], "0.777777777778");
    assert_eq!(row.last(), Some(&"7/9"));

    let dir = TempDir::new().unwrap();
    let csv = path_str(&dir, "s.csv");
    let out = run(&[
        "sweep", "--n-min", "2", "--n-max", "2", "--alpha", "1,1/2", "--out", &csv,
    ]);
    assert_eq!(code(&out), 0);
    assert_eq!(stdout_json(&out)["rows"], 4);
    let text = std::fs::read_to_string(&csv).unwrap();
    for line in text.lines().skip(1) {
        let cells: Vec<&str> = line.split(',').collect();
        assert_eq!(cells[6], "1.00000000000");
        assert_eq!(cells[10], "1/1");
    }

    assert_eq!(code(&run(&["sweep", "--n-min", "2", "--n-max", "3"])), 2);
    let unwritable = run(&[
        "sweep",
        "--n-min",
        "2",
        "--n-max",
        "2",
        "--alpha",
        "1",
        "--out",
        "/nonexistent/dir/s.csv",
    ]);
    assert_eq!(code(&unwritable), 2);
}
