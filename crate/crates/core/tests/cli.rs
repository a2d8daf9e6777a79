use std::collections::BTreeSet;
use std::path::Path;
use std::process::{Command, Output};

fn factcrowd(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_factcrowd"))
        .current_dir(dir)
        .env_remove("FACTCROWD_OUT")
        .args(args)
        .output()
        .unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

const SIMULATE: &[&str] = &["simulate", "--fixture", "--sizes", "2,4", "--replicas", "5", "--algorithms", "cwmv,exp4"];

#[test]
fn simulate_writes_one_block_per_algorithm_and_size() {
    let dir = tempfile::tempdir().unwrap();
    let o = factcrowd(dir.path(), &[SIMULATE, &["--seed", "3", "-o", "a"]].concat());
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let csv = std::fs::read_to_string(dir.path().join("a/metrics.csv")).unwrap();
    let cells: BTreeSet<(String, String)> = csv
        .lines()
        .skip(1)
        .map(|l| {
            let f: Vec<&str> = l.split(',').collect();
            (f[0].to_string(), f[2].to_string())
        })
        .collect();
    let want: BTreeSet<(String, String)> = ["cwmv", "exp4"]
        .iter()
        .flat_map(|a| ["2", "4"].map(|n| (a.to_string(), n.to_string())))
        .collect();
    assert_eq!(cells, want);
    for f in ["metrics.meta.json", "manifest.json", "config.json", "run_info.json"] {
        assert!(dir.path().join("a").join(f).exists(), "{f}");
    }
}

#[test]
fn same_seed_same_metrics() {
    let dir = tempfile::tempdir().unwrap();
    for (out, workers) in [("a", "1"), ("b", "4")] {
        let o = factcrowd(dir.path(), &[SIMULATE, &["--seed", "8", "--workers", workers, "-o", out]].concat());
        assert_eq!(code(&o), 0);
    }
    let read = |d: &str| std::fs::read(dir.path().join(d).join("metrics.csv")).unwrap();
    assert_eq!(read("a"), read("b"));
}

#[test]
fn invalid_input_exits_with_one() {
    let dir = tempfile::tempdir().unwrap();
    let o = factcrowd(dir.path(), &["simulate", "--fixture", "--sizes", "41", "--replicas", "2", "-o", "x"]);
    assert_eq!(code(&o), 1);
    assert!(String::from_utf8_lossy(&o.stderr).contains("exceeds the 40 participants"));

    assert_eq!(code(&factcrowd(dir.path(), &["analyze", "framing", "-o", "x"])), 1);
    assert_eq!(code(&factcrowd(dir.path(), &["report", "-o", "empty"])), 1);
    assert_eq!(code(&factcrowd(dir.path(), &["simulate", "--bogus"])), 1);
    assert_eq!(code(&factcrowd(dir.path(), &["stats", "kruskal", "--file", "missing.csv"])), 1);
}

#[test]
fn framing_analysis_covers_every_fixture_pair() {
    let dir = tempfile::tempdir().unwrap();
    let o = factcrowd(dir.path(), &["analyze", "framing", "--fixture", "-o", "f"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let csv = std::fs::read_to_string(dir.path().join("f/framing.csv")).unwrap();
    assert_eq!(csv.lines().count(), 121);
    let report = factcrowd(dir.path(), &["report", "-o", "f"]);
    assert_eq!(code(&report), 0, "{}", String::from_utf8_lossy(&report.stderr));
}

#[test]
fn synthetic_data_feeds_the_analyses() {
    let dir = tempfile::tempdir().unwrap();
    let o = factcrowd(dir.path(), &["synth", "--participants", "10", "--no-calibrate", "--seed", "2", "-o", "d"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let o = factcrowd(dir.path(), &["analyze", "all", "--data", "d", "-o", "r"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    for f in ["framing.json", "group_errors.json", "demographics.json", "calibration.json", "timing.csv", "diversity.json"] {
        assert!(dir.path().join("r").join(f).exists(), "{f}");
    }
}
