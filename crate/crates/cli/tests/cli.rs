use std::fs;
use std::process::{Command, Output};

fn pbcast(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pbcast")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn json(o: &Output) -> serde_json::Value {
    serde_json::from_slice(&o.stdout).expect("valid JSON")
}

/// Data rows of a CSV file as numbers (skips the comment and column header).
fn rows(text: &str) -> Vec<Vec<f64>> {
    text.lines()
        .skip(2)
        .map(|l| l.split(',').map(|v| v.parse().unwrap()).collect())
        .collect()
}

#[test]
fn classify_degraded() {
    let o = pbcast(&["classify", "--alpha", "1.2", "--s1", "0.1", "--s2", "1"]);
    assert!(o.status.success());
    assert_eq!(json(&o)["class"]["verdict"], "degraded");
}

#[test]
fn classify_unresolved_but_stronger_condition_holds() {
    let o = pbcast(&["classify", "--alpha", "0.28", "--s1", "0.1", "--s2", "1"]);
    assert!(o.status.success());
    let v = json(&o);
    assert_eq!(v["class"]["verdict"], "unresolved");
    assert!(v["summary"].as_str().unwrap().starts_with("unresolved; stronger-condition: optimal"));
}

#[test]
fn classify_effectively_less_noisy() {
    let o = pbcast(&["classify", "--alpha", "0.25", "--s1", "0.1", "--s2", "1"]);
    let v = json(&o);
    assert_eq!(v["summary"], "effectively-less-noisy (receiver 2)");
    // alpha3 < 0.25 <= alpha23
    let bp = &v["breakpoints"];
    assert!(bp["alpha3"].as_f64().unwrap() < 0.25 && 0.25 <= bp["alpha23"].as_f64().unwrap());
}

#[test]
fn invalid_parameters_exit_2() {
    let o = pbcast(&["classify", "--alpha", "-1", "--s1", "0.1", "--s2", "1"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(!o.stderr.is_empty());
    assert_eq!(pbcast(&["classify", "--alpha", "0.3"]).status.code(), Some(2));
}

#[test]
fn region_corners_and_sum_rate_consistency() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("region.csv");
    let o = pbcast(&["region", "--alpha", "1.2", "--s1", "0.1", "--s2", "1", "--points", "80", "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = fs::read_to_string(&out).unwrap();
    assert!(text.starts_with("# pbcast region {"));
    let r = rows(&text);
    let (first, last) = (&r[0], &r[r.len() - 1]);
    assert!(first[1].abs() < 1e-12 && first[2] > 0.0);
    assert!(last[2].abs() < 1e-12 && last[1] > 0.0);
    // the boundary is a concave polyline in r1
    for w in r.windows(3) {
        let cross = (w[1][1] - w[0][1]) * (w[2][2] - w[0][2]) - (w[1][2] - w[0][2]) * (w[2][1] - w[0][1]);
        assert!(cross <= 1e-12);
    }
    let best_sum = r.iter().map(|row| row[1] + row[2]).fold(0.0, f64::max);
    let s = pbcast(&["sumrates", "--s1", "0.1", "--s2", "1", "--alpha-from", "1.2", "--alpha-to", "1.2", "--steps", "1", "--marton-starts", "4", "--uv-starts", "1"]);
    let sup = rows(&stdout(&s))[0][1];
    assert!((best_sum - sup).abs() < 1e-9, "{best_sum} vs {sup}");
}

#[test]
fn unknown_region_is_inconclusive() {
    let o = pbcast(&["region", "--alpha", "0.34", "--s1", "0.1", "--s2", "1"]);
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn sumrates_coincide_at_band_edge() {
    let o = pbcast(&["sumrates", "--s1", "0.1", "--s2", "1", "--alpha-from", "0.28", "--alpha-to", "0.28", "--steps", "1"]);
    let r = rows(&stdout(&o));
    assert!(r[0][4].abs() <= 1e-3);
}

#[test]
fn sweep_map_for_noiseless_receiver() {
    let o = pbcast(&["sweep", "--s1", "0", "--s2-max", "4", "--s2-steps", "8", "--alpha-steps", "12"]);
    assert!(o.status.success());
    let text = stdout(&o);
    for line in text.lines().skip(2) {
        let f: Vec<&str> = line.split(',').collect();
        if f[0].parse::<f64>().unwrap() >= 1.0 {
            assert_eq!(f[2], "degraded");
        }
    }
}

#[test]
fn fraction_rows_agree() {
    let o = pbcast(&["fraction", "--b", "10", "--k", "1", "--samples", "200000", "--seed", "3"]);
    let text = stdout(&o);
    let lines: Vec<Vec<&str>> = text.lines().skip(2).map(|l| l.split(',').collect()).collect();
    let cf: f64 = lines[0][1].parse().unwrap();
    let mc: f64 = lines[1][1].parse().unwrap();
    let se: f64 = lines[1][2].parse().unwrap();
    assert!((cf - mc).abs() <= 3.0 * se);
}

#[test]
fn config_runs_are_byte_identical_and_thread_invariant() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    for (out, threads) in [(&a, "1"), (&b, "3")] {
        fs::write(&cfg, format!(r#"{{"command": "fraction", "b": 2, "k": 0.5, "samples": 50000, "seed": 9, "out": "{}"}}"#, out.display())).unwrap();
        let o = pbcast(&["--threads", threads, "run", "--config", cfg.to_str().unwrap()]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    }
    let (ta, tb) = (fs::read_to_string(&a).unwrap(), fs::read_to_string(&b).unwrap());
    // headers differ only in the echoed output path
    let body = |t: &str| t.lines().skip(1).collect::<Vec<_>>().join("\n");
    assert_eq!(body(&ta), body(&tb));
    assert!(ta.lines().next().unwrap().contains("\"seed\":9"));
}

#[test]
fn config_rejects_unknown_keys() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    fs::write(&cfg, r#"{"command": "fraction", "b": 2, "k": 1, "bogus": 1}"#).unwrap();
    let o = pbcast(&["run", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    fs::write(&cfg, r#"{"b": 2}"#).unwrap();
    assert_eq!(pbcast(&["run", "--config", cfg.to_str().unwrap()]).status.code(), Some(2));
}
