use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

const TWO_HUB: &str = "n 6\n2 0\n2 3\n2 4\n2 5\n1 3\n1 4\n1 5\n";
const PATH3: &str = "n 3\n0 1\n1 2\n";

fn isingc(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_isingc"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn write(dir: &TempDir, name: &str, text: &str) -> PathBuf {
    let p = dir.path().join(name);
    std::fs::write(&p, text).unwrap();
    p
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn compile_reports_the_two_hub_count_and_round_trips_through_verify() {
    let dir = TempDir::new().unwrap();
    let g = write(&dir, "g.txt", TWO_HUB);
    let out = dir.path().join("p.json");
    let o = isingc(&["compile", s(&g), "--out", s(&out)]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let text = stdout(&o);
    assert!(text.contains("L0=7"), "{text}");
    assert!(text.contains("bound=16 (3n-2)"), "{text}");
    assert!(text.contains("verified=true"), "{text}");
    assert!(dir.path().join("p.json.manifest.json").exists());

    let v = isingc(&["verify", s(&out), s(&g)]);
    assert_eq!(v.status.code(), Some(0), "{}", stdout(&v));
}

#[test]
fn compile_edges_and_empty_graph() {
    let dir = TempDir::new().unwrap();
    let g = write(&dir, "g.txt", PATH3);
    let o = isingc(&["compile", s(&g), "--method", "edges"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stderr(&o).contains("bound=7 (3m+1)"), "{}", stderr(&o));
    assert!(stdout(&o).contains("\"ops\""));

    let empty = write(&dir, "e.txt", "n 4\n");
    let o = isingc(&["compile", s(&empty)]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stderr(&o).contains("L0=0"));
}

#[test]
fn weighted_graph_with_stars_is_rejected() {
    let dir = TempDir::new().unwrap();
    let g = write(&dir, "w.txt", "n 3\n0 1 2\n1 2 1\n");
    let o = isingc(&["compile", s(&g), "--method", "stars"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("method requires unweighted"), "{}", stderr(&o));
}

#[test]
fn tampered_strength_fails_verification_with_the_pair() {
    let dir = TempDir::new().unwrap();
    let g = write(&dir, "g.txt", PATH3);
    let pulse = write(
        &dir,
        "p.json",
        r#"{"n": 3, "ops": [{"mask": "+++", "w": "1/2"}, {"mask": "+-+", "w": "-1/3"}]}"#,
    );
    let o = isingc(&["verify", s(&pulse), s(&g)]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("mismatch at (0, 1)"), "{}", stdout(&o));

    let good = write(
        &dir,
        "good.json",
        r#"{"n": 3, "ops": [{"mask": "+++", "w": "1/2"}, {"mask": "+-+", "w": "-1/2"}]}"#,
    );
    assert_eq!(isingc(&["verify", s(&good), s(&g)]).status.code(), Some(0));
}

#[test]
fn optimize_objectives() {
    let dir = TempDir::new().unwrap();
    let path = write(&dir, "p.txt", PATH3);
    let o = isingc(&["optimize", s(&path)]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stderr(&o).contains("status=optimal objective=2"), "{}", stderr(&o));

    let k5 = write(
        &dir,
        "k5.txt",
        "n 5\n0 1\n0 2\n0 3\n0 4\n1 2\n1 3\n1 4\n2 3\n2 4\n3 4\n",
    );
    let o = isingc(&["optimize", s(&k5), "--big-m", "theorem"]);
    assert!(stderr(&o).contains("objective=1 "), "{}", stderr(&o));

    let out = dir.path().join("l1.json");
    let o = isingc(&["optimize", s(&path), "--objective", "l1", "--out", s(&out)]);
    assert_eq!(o.status.code(), Some(0));
    let doc: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(doc["objective"], "1");
    assert_eq!(doc["objective_kind"], "L1");
}

#[test]
fn optimize_timeout_exits_two_with_a_valid_incumbent() {
    let dir = TempDir::new().unwrap();
    let g = dir.path().join("g.txt");
    let o = isingc(&[
        "gen",
        "--n",
        "8",
        "--p",
        "0.5",
        "--weights",
        "1,2,3",
        "--seed",
        "4",
        "--out",
        s(&g),
    ]);
    assert_eq!(o.status.code(), Some(0));
    let out = dir.path().join("r.json");
    let o = isingc(&["optimize", s(&g), "--time-limit", "0.2", "--out", s(&out)]);
    assert_eq!(o.status.code(), Some(2), "{}", stdout(&o));
    assert!(stdout(&o).contains("status=incumbent_timeout"));
    let doc: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    let seq = dir.path().join("seq.json");
    std::fs::write(&seq, doc["sequence"].to_string()).unwrap();
    assert_eq!(isingc(&["verify", s(&seq), s(&g)]).status.code(), Some(0));
}

#[test]
fn large_graphs_point_to_subsampling() {
    let dir = TempDir::new().unwrap();
    let g = dir.path().join("g.txt");
    isingc(&["gen", "--n", "10", "--p", "0.3", "--out", s(&g)]);
    let o = isingc(&["optimize", s(&g)]);
    assert_eq!(o.status.code(), Some(3));
    assert!(stderr(&o).contains("--subsample"), "{}", stderr(&o));
    let o = isingc(&["optimize", s(&g), "--subsample", "64", "--time-limit", "0.5"]);
    assert!(matches!(o.status.code(), Some(0) | Some(2)), "{}", stderr(&o));
}

#[test]
fn cost_of_the_worst_cases() {
    let o = isingc(&["cost", "--worst-case", "10"]);
    assert!(stdout(&o).contains("time_ms=4.645000"), "{}", stdout(&o));
    let o = isingc(&["cost", "--worst-case", "100"]);
    assert!(stdout(&o).contains("time_ms=496.495000"), "{}", stdout(&o));
    let o = isingc(&["cost", "--worst-case", "10", "--t-pi", "10"]);
    assert!(stdout(&o).contains("time_us=4790.000"), "{}", stdout(&o));
    let o = isingc(&["cost", "--worst-case", "10", "--t-pi", "0"]);
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn config_file_feeds_timings_and_flags_win() {
    let dir = TempDir::new().unwrap();
    let cfg = write(&dir, "c.toml", "timing.t_pi_us = 10\ntiming.t_ising_per_ion_us = 100\n");
    let o = isingc(&["--config", s(&cfg), "cost", "--worst-case", "10"]);
    assert!(stdout(&o).contains("time_us=9290.000"), "{}", stdout(&o));
    let o = isingc(&["--config", s(&cfg), "cost", "--worst-case", "10", "--t-pi", "5"]);
    assert!(stdout(&o).contains("time_us=9145.000"), "{}", stdout(&o));
    let bad = write(&dir, "bad.toml", "timing.tpi = 1\n");
    assert_eq!(
        isingc(&["--config", s(&bad), "cost", "--worst-case", "3"])
            .status
            .code(),
        Some(3)
    );
}

#[test]
fn simulate_fixed_and_optimized_angles() {
    let dir = TempDir::new().unwrap();
    let g = write(&dir, "g.txt", TWO_HUB);
    let ms = isingc(&["simulate", s(&g), "--gamma", "0.4", "--beta", "0.3"]);
    let cx = isingc(&[
        "simulate",
        s(&g),
        "--compilation",
        "cx",
        "--gamma",
        "0.4",
        "--beta",
        "0.3",
    ]);
    let value = |o: &Output| -> f64 {
        let text = stdout(o);
        let field = text
            .split_whitespace()
            .find(|f| f.starts_with("expectation="))
            .unwrap()
            .to_string();
        field["expectation=".len()..].parse().unwrap()
    };
    assert!((value(&ms) - value(&cx)).abs() < 1e-9);
    let o = isingc(&["simulate", s(&g), "--lambda", "0.01", "--grid-res", "8"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("ratio="));
    let o = isingc(&["simulate", s(&g), "--grid-res", "4"]);
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn gen_is_deterministic_per_seed() {
    let a = stdout(&isingc(&["gen", "--n", "7", "--p", "0.4", "--seed", "12"]));
    let b = stdout(&isingc(&["gen", "--n", "7", "--p", "0.4", "--seed", "12"]));
    let c = stdout(&isingc(&["gen", "--n", "7", "--p", "0.4", "--seed", "13"]));
    assert_eq!(a, b);
    assert_ne!(a, c);
    assert!(a.starts_with("n 7\n"));
}

#[test]
fn usage_errors_exit_three() {
    assert_eq!(isingc(&["frobnicate"]).status.code(), Some(3));
    assert_eq!(isingc(&["compile"]).status.code(), Some(3));
    assert_eq!(isingc(&["--help"]).status.code(), Some(0));
    let dir = TempDir::new().unwrap();
    let g = write(&dir, "g.txt", PATH3);
    assert_eq!(isingc(&["compile", s(&g), "--method", "spiral"]).status.code(), Some(3));
    let broken = write(&dir, "b.txt", "n 3\n0 0\n");
    let o = isingc(&["compile", s(&broken)]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("line 2"), "{}", stderr(&o));
}

#[test]
fn sweeps_write_csv_with_manifests() {
    let dir = TempDir::new().unwrap();
    let out = dir.path();
    let o = isingc(&["sweep", "fig_worstcase", "--max-n", "4", "--out", s(out)]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let table = std::fs::read_to_string(out.join("fig_worstcase.csv")).unwrap();
    let lines: Vec<&str> = table.lines().collect();
    assert_eq!(lines[0], "n,labeled_graphs,classes,max_L0_opt,n_plus_1,timeouts");
    assert_eq!(lines[1], "3,8,4,2,4,0");
    assert_eq!(lines.len(), 3);
    assert!(out.join("fig_worstcase.manifest.json").exists());

    let o = isingc(&[
        "sweep",
        "fig_random_unweighted",
        "--n",
        "4",
        "--graphs-per-p",
        "2",
        "--p-count",
        "3",
        "--out",
        s(out),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let first = std::fs::read_to_string(out.join("fig_random_unweighted.csv")).unwrap();
    assert!(first.starts_with("graph_id,p,seed,n,m,L0_construction,L0_opt,status,L1_construction,L1_opt,time_ms"));
    assert_eq!(first.lines().count(), 7);

    let o = isingc(&[
        "sweep",
        "fig_noise",
        "--lambda-grid",
        "0,0.01",
        "--grid-res",
        "8",
        "--out",
        s(out),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let noise = std::fs::read_to_string(out.join("fig_noise.csv")).unwrap();
    assert!(noise.starts_with("graph_id,compilation,lambda,gamma,beta,expectation,ratio"));
    assert_eq!(noise.lines().count(), 1 + 4 * 2 * 2);

    assert_eq!(
        isingc(&["sweep", "fig_unknown", "--out", s(out)]).status.code(),
        Some(3)
    );
}

#[test]
fn sweeps_are_deterministic() {
    let a = TempDir::new().unwrap();
    let b = TempDir::new().unwrap();
    for d in [&a, &b] {
        let o = isingc(&[
            "--seed",
            "5",
            "sweep",
            "fig_random_weighted",
            "--n",
            "4",
            "--graphs-per-p",
            "2",
            "--p-count",
            "2",
            "--jobs",
            "2",
            "--out",
            s(d.path()),
        ]);
        assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    }
    let strip = |d: &TempDir| -> Vec<String> {
        std::fs::read_to_string(d.path().join("fig_random_weighted.csv"))
            .unwrap()
            .lines()
            .map(|l| l.rsplit_once(',').unwrap().0.to_string())
            .collect()
    };
    assert_eq!(strip(&a), strip(&b));
}
