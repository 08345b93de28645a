use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::Value;
use tempfile::TempDir;
use triway_core::{fixtures, oracle, project, Conditionality};

fn triway(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_triway"))
        .args(args)
        .env_remove("TRIWAY_COLOR_PALETTE")
        .output()
        .expect("binary runs")
}

fn run_ok(args: &[&str], out: &Path) -> Value {
    let o = triway(args);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    serde_json::from_str(&std::fs::read_to_string(out).unwrap()).unwrap()
}

fn path(dir: &TempDir, name: &str) -> PathBuf {
    dir.path().join(name)
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn journal_embedding() {
    let dir = TempDir::new().unwrap();
    let out = path(&dir, "j.json");
    let v = run_ok(&["project", "--input", "builtin:journals", "--out", s(&out)], &out);
    let gof: Vec<f64> = serde_json::from_value(v["result"]["embedding"]["gof"].clone()).unwrap();
    assert!((gof[0] - 0.8017).abs() <= 0.005 && (gof[1] - 0.9985).abs() <= 0.005);
    assert_eq!(v["result"]["asymmetry"]["most_symmetric"]["label"], "TH");
    assert_eq!(v["result"]["asymmetry"]["most_asymmetric"]["label"], "SF");
}

#[test]
fn point_counts_follow_the_arrangement() {
    let dir = TempDir::new().unwrap();
    let out = path(&dir, "p.json");
    let svg = path(&dir, "p.svg");
    for (cond, points) in [("unconditional", 16), ("conditional", 8)] {
        let v = run_ok(
            &["project", "--input", "builtin:artificial", "--conditionality", cond, "--out", s(&out), "--svg", s(&svg)],
            &out,
        );
        assert_eq!(v["result"]["embedding"]["points"].as_array().unwrap().len(), points);
        let text = std::fs::read_to_string(&svg).unwrap();
        assert_eq!(text.matches("<circle").count(), points);
        // one more of each in the legend
        assert_eq!(text.matches("font-weight=\"bold\">").count(), points / 2 + 1);
        assert_eq!(text.matches("font-style=\"italic\">").count(), points / 2 + 1);
    }
}

#[test]
fn palette_comes_from_the_environment() {
    let dir = TempDir::new().unwrap();
    let out = path(&dir, "p.json");
    let svg = path(&dir, "p.svg");
    let o = Command::new(env!("CARGO_BIN_EXE_triway"))
        .args(["project", "--input", "builtin:artificial", "--out", s(&out), "--svg", s(&svg)])
        .env("TRIWAY_COLOR_PALETTE", "navy,#ff8800")
        .output()
        .unwrap();
    assert!(o.status.success());
    let text = std::fs::read_to_string(&svg).unwrap();
    assert_eq!(text.matches("<circle").count(), 16);
    assert_eq!(text.matches("fill=\"navy\"/>").count(), 8 + 1);
    assert_eq!(text.matches("fill=\"#ff8800\"/>").count(), 8 + 1);
}

#[test]
fn ada_with_k_equal_to_n() {
    let dir = TempDir::new().unwrap();
    let out = path(&dir, "a.json");
    let v = run_ok(&["ada", "--input", "builtin:artificial", "--k", "4", "--out", s(&out)], &out);
    assert_eq!(v["result"]["rss"], 0.0);
    let mut names: Vec<String> = serde_json::from_value(v["result"]["archetypoids"].clone()).unwrap();
    names.sort();
    assert_eq!(names, ["A", "B", "C", "D"]);
}

#[test]
fn ada_two_archetypoids_regression() {
    let dir = TempDir::new().unwrap();
    let out = path(&dir, "a.json");
    let v = run_ok(&["ada", "--input", "builtin:artificial", "--k", "2", "--out", s(&out)], &out);
    assert_eq!(v["result"]["archetypoids"], serde_json::json!(["D", "B"]));
    let rss = v["result"]["rss"].as_f64().unwrap();
    assert_eq!(rss, 568.9238228174897);

    let p = project(&fixtures::artificial(Conditionality::Unconditional).unwrap(), 2).unwrap();
    let best = oracle::exhaustive_ada(p.y.view(), 2).unwrap();
    let mut idx = best.indices.clone();
    idx.sort();
    assert_eq!(idx, vec![1, 3]);
    assert!((rss - best.value).abs() <= 1e-6 * best.value);
}

#[test]
fn ada_without_k_reports_the_curve() {
    let dir = TempDir::new().unwrap();
    let out = path(&dir, "a.json");
    let v = run_ok(&["ada", "--input", "builtin:artificial", "--out", s(&out)], &out);
    let sel = &v["result"]["selection"];
    let curve: Vec<(usize, f64)> = serde_json::from_value(sel["curve"].clone()).unwrap();
    assert_eq!(
        curve,
        vec![(1, 1170.0290906001512), (2, 568.9238228174897), (3, 129.66393286457182), (4, 0.0)]
    );
    assert_eq!(sel["elbow"]["k"], 3);
    assert_eq!(v["result"]["k"], 3);
}

#[test]
fn usage_errors_exit_with_two_and_write_nothing() {
    let dir = TempDir::new().unwrap();
    let out = path(&dir, "x.json");
    for args in [
        vec!["ada", "--input", "builtin:artificial", "--k", "0"],
        vec!["cluster", "--input", "builtin:artificial", "--k", "5"],
        vec!["cluster", "--input", "builtin:nations"],
        vec!["project", "--input", "builtin:artificial", "--transform", "power:-2"],
    ] {
        let mut full = args.clone();
        full.extend(["--out", s(&out)]);
        let o = triway(&full);
        assert_eq!(o.status.code(), Some(2), "{args:?}");
        assert!(!out.exists());
    }
    let o = triway(&["project", "--input", "builtin:artificial", "--out", s(&out), "--svg", s(&out)]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn runtime_errors_are_one_line() {
    let dir = TempDir::new().unwrap();
    let out = path(&dir, "x.json");
    let o = triway(&["project", "--input", "/nonexistent/data.csv", "--out", s(&out)]);
    assert_eq!(o.status.code(), Some(1));
    let err = String::from_utf8(o.stderr).unwrap();
    assert_eq!(err.trim_end().lines().count(), 1, "{err}");
    assert!(err.starts_with("triway: error:"));
    assert!(!out.exists());

    let bad = path(&dir, "bad.csv");
    std::fs::write(&bad, "occasion,from,to,value\n1,A,A,0\n1,A,B,1\n1,B,A,2\n").unwrap();
    let o = triway(&["project", "--input", s(&bad), "--out", s(&out)]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8(o.stderr).unwrap().contains("incomplete matrix"));
}

#[test]
fn conditional_clustering_with_k_equal_to_n() {
    let dir = TempDir::new().unwrap();
    let out = path(&dir, "c.json");
    let v = run_ok(
        &["cluster", "--input", "builtin:artificial", "--conditionality", "conditional", "--k", "4", "--out", s(&out)],
        &out,
    );
    assert_eq!(v["result"]["objective"], 0.0);
    assert_eq!(v["result"]["clusters"], serde_json::json!({"A": 0, "B": 1, "C": 2, "D": 3}));
}

/// Twelve objects in three well separated groups; dissimilarities are
/// plane distances.
fn write_blobs(path: &Path) {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    let centres = [(0.0, 0.0), (40.0, 0.0), (20.0, 35.0)];
    let pts: Vec<(f64, f64)> = (0..12)
        .map(|i| {
            let (cx, cy) = centres[i / 4];
            (cx + rng.gen_range(-1.0..1.0), cy + rng.gen_range(-1.0..1.0))
        })
        .collect();
    let mut text = String::from("occasion,from,to,value\n");
    for (i, a) in pts.iter().enumerate() {
        for (j, b) in pts.iter().enumerate() {
            let d = ((a.0 - b.0).powi(2) + (a.1 - b.1).powi(2)).sqrt();
            text.push_str(&format!("1,o{i:02},o{j:02},{d}\n"));
        }
    }
    std::fs::write(path, text).unwrap();
}

#[test]
fn automatic_k_finds_planted_groups() {
    let dir = TempDir::new().unwrap();
    let input = path(&dir, "blobs.csv");
    write_blobs(&input);
    let out = path(&dir, "c.json");
    let v = run_ok(&["cluster", "--input", s(&input), "--k", "auto", "--kmax", "6", "--out", s(&out)], &out);
    assert_eq!(v["case"], "unconditional_symmetric");
    assert_eq!(v["result"]["k"], 3);
    assert_eq!(v["result"]["quality"], "strong");
    assert_eq!(v["result"]["silhouette_by_k"].as_array().unwrap().len(), 5);
    let clusters = v["result"]["clusters"].as_object().unwrap();
    let ids: Vec<u64> = clusters.values().map(|c| c.as_u64().unwrap()).collect();
    assert_eq!(ids, [0, 0, 0, 0, 1, 1, 1, 1, 2, 2, 2, 2]);
}

#[test]
fn json_input_and_transforms() {
    let dir = TempDir::new().unwrap();
    let input = path(&dir, "data.json");
    let data = fixtures::artificial(Conditionality::Unconditional).unwrap();
    std::fs::write(&input, data.to_json_string()).unwrap();
    let out = path(&dir, "p.json");
    let from_json = run_ok(&["project", "--input", s(&input), "--out", s(&out)], &out);
    let builtin = run_ok(&["project", "--input", "builtin:artificial", "--out", s(&out)], &out);
    assert_eq!(from_json["result"], builtin["result"]);

    for t in ["rank:global", "rank:occasion", "power:2"] {
        let v = run_ok(&["project", "--input", "builtin:artificial", "--transform", t, "--out", s(&out)], &out);
        assert_eq!(v["result"]["embedding"]["points"].as_array().unwrap().len(), 16);
    }
}

#[test]
fn covariate_correlations() {
    let dir = TempDir::new().unwrap();
    let cov = path(&dir, "cov.csv");
    std::fs::write(&cov, "label,value\nD,4\nA,1\nC,9\nB,2\n").unwrap();
    let out = path(&dir, "p.json");
    let v = run_ok(
        &["project", "--input", "builtin:artificial", "--covariate", s(&cov), "--out", s(&out)],
        &out,
    );
    let corr = v["result"]["embedding"]["correlations"].as_array().unwrap();
    assert_eq!(corr.len(), 2 * 2 * 2);
    assert!(corr.iter().all(|c| c["r"].as_f64().unwrap().abs() <= 1.0 + 1e-12));

    std::fs::write(&cov, "A,1\nB,2\nC,3\n").unwrap();
    let o = triway(&["project", "--input", "builtin:artificial", "--covariate", s(&cov), "--out", s(&out)]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn reruns_are_byte_identical() {
    let dir = TempDir::new().unwrap();
    let a = path(&dir, "a.json");
    let b = path(&dir, "b.json");
    for cmd in ["project", "ada", "cluster"] {
        run_ok(&[cmd, "--input", "builtin:artificial", "--out", s(&a)], &a);
        run_ok(&[cmd, "--input", "builtin:artificial", "--out", s(&b)], &b);
        assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap(), "{cmd}");
    }
}
