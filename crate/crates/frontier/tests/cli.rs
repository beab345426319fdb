//! End-to-end runs of the command line tool.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

fn tool(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_frontier-adapt"))
        .args(args)
        .env_remove("FRONTIER_ADAPT_THREADS")
        .output()
        .expect("binary runs")
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn read_csv(p: &Path) -> Vec<Vec<String>> {
    fs::read_to_string(p)
        .unwrap()
        .lines()
        .skip(1)
        .map(|l| l.split(',').map(str::to_owned).collect())
        .collect()
}

fn simulate(dir: &Path, f: &str, em: &str, n: usize, seed: u64) -> Output {
    tool(&[
        "simulate",
        "--f",
        f,
        "--em",
        em,
        "--n",
        &n.to_string(),
        "--seed",
        &seed.to_string(),
        "--out",
        path(dir),
    ])
}

#[test]
fn estimate_envelopes_the_data() {
    let tmp = TempDir::new().unwrap();
    let sim = tmp.path().join("sim");
    assert!(simulate(&sim, "f1", "negexp", 300, 5).status.success());
    let fit = tmp.path().join("fit");
    let o = tool(&[
        "estimate",
        "--input",
        path(&sim.join("sample.csv")),
        "--out",
        path(&fit),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let data = read_csv(&sim.join("sample.csv"));
    let fitted = read_csv(&fit.join("fitted.csv"));
    assert_eq!(data.len(), fitted.len());
    for (d, f) in data.iter().zip(&fitted) {
        let y: f64 = d[1].parse().unwrap();
        let v: f64 = f[1].parse().unwrap();
        assert!(v >= y - 1e-9, "estimate {v} below observation {y}");
    }
    assert!(fit.join("diagnostics.json").exists());
    let manifest: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(fit.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["command"], "estimate");
    assert!(manifest["input_sha256"].as_str().is_some_and(|s| s.len() == 64));
}

#[test]
fn single_column_input_is_accepted() {
    let tmp = TempDir::new().unwrap();
    let input = tmp.path().join("y.csv");
    let ys: String = (1..=120)
        .map(|j| format!("{}\n", -((j * 37) % 11) as f64 / 10.0))
        .collect();
    fs::write(&input, ys).unwrap();
    let out = tmp.path().join("out");
    let o = tool(&["estimate", "--input", path(&input), "--out", path(&out)]);
    assert!(o.status.success(), "{}", stderr(&o));
    let rows = read_csv(&out.join("fitted.csv"));
    assert_eq!(rows.len(), 120);
    let x0: f64 = rows[0][0].parse().unwrap();
    assert!((x0 - 1.0 / 120.0).abs() < 1e-15);
}

#[test]
fn malformed_row_names_its_line() {
    let tmp = TempDir::new().unwrap();
    let input = tmp.path().join("bad.csv");
    fs::write(&input, "x,y\n0.1,-1\n0.2,-2\n0.3,oops\n").unwrap();
    let o = tool(&[
        "estimate",
        "--input",
        path(&input),
        "--out",
        path(&tmp.path().join("o")),
    ]);
    assert_eq!(o.status.code(), Some(3));
    let msg = stderr(&o);
    assert!(msg.contains("line 4"), "{msg}");
}

#[test]
fn simulate_is_reproducible() {
    let tmp = TempDir::new().unwrap();
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    assert!(simulate(&a, "f2", "neggamma", 500, 11).status.success());
    assert!(simulate(&b, "f2", "neggamma", 500, 11).status.success());
    assert_eq!(
        fs::read(a.join("sample.csv")).unwrap(),
        fs::read(b.join("sample.csv")).unwrap()
    );
    let c = tmp.path().join("c");
    assert!(simulate(&c, "f2", "neggamma", 500, 12).status.success());
    assert_ne!(
        fs::read(a.join("sample.csv")).unwrap(),
        fs::read(c.join("sample.csv")).unwrap()
    );
}

#[test]
fn simulate_rejects_a_single_observation() {
    let tmp = TempDir::new().unwrap();
    let o = simulate(tmp.path(), "f1", "negexp", 1, 0);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).starts_with("error[config]"), "{}", stderr(&o));
}

#[test]
fn tail_is_shift_invariant() {
    let tmp = TempDir::new().unwrap();
    let sim = tmp.path().join("sim");
    assert!(simulate(&sim, "const", "neguniform", 2000, 3).status.success());
    let rows = read_csv(&sim.join("sample.csv"));
    let shifted: String = std::iter::once("x,y\n".to_owned())
        .chain(
            rows.iter()
                .map(|r| format!("{},{}\n", r[0], r[1].parse::<f64>().unwrap() + 2.5)),
        )
        .collect();
    let moved = tmp.path().join("moved.csv");
    fs::write(&moved, shifted).unwrap();
    let run = |input: &Path, out: &str| {
        let dir = tmp.path().join(out);
        let o = tool(&["tail", "--input", path(input), "--x", "0.5", "--out", path(&dir)]);
        assert!(o.status.success(), "{}", stderr(&o));
        serde_json::from_str::<serde_json::Value>(&fs::read_to_string(dir.join("tail.json")).unwrap()).unwrap()
    };
    let a = run(&sim.join("sample.csv"), "ta");
    let b = run(&moved, "tb");
    for key in ["inv_alpha_hat", "b_hat"] {
        let (u, v) = (a[key].as_f64().unwrap(), b[key].as_f64().unwrap());
        assert!((u - v).abs() <= 1e-9 * u.abs().max(1.0), "{key}: {u} vs {v}");
    }
    assert_eq!(a["k_alpha"], b["k_alpha"]);
}

#[test]
fn constant_column_is_a_degenerate_window() {
    let tmp = TempDir::new().unwrap();
    let input = tmp.path().join("flat.csv");
    fs::write(&input, "-1\n".repeat(200)).unwrap();
    let o = tool(&[
        "tail",
        "--input",
        path(&input),
        "--x",
        "0.5",
        "--out",
        path(&tmp.path().join("o")),
    ]);
    assert_eq!(o.status.code(), Some(4));
    let msg = stderr(&o);
    assert!(msg.contains("hint:"), "{msg}");
}

#[test]
fn rates_needs_three_sample_sizes() {
    let tmp = TempDir::new().unwrap();
    let o = tool(&[
        "rates",
        "--f",
        "f2",
        "--em",
        "negexp",
        "--n-list",
        "100,200",
        "--reps",
        "4",
        "--out",
        path(tmp.path()),
    ]);
    assert_eq!(o.status.code(), Some(3));
    assert!(stderr(&o).contains("three"), "{}", stderr(&o));
}

#[test]
fn rates_from_a_risk_file() {
    let tmp = TempDir::new().unwrap();
    let risks = tmp.path().join("risks.csv");
    // risk = 3 n^-1 exactly.
    fs::write(&risks, "n,risk\n100,0.03\n200,0.015\n400,0.0075\n800,0.00375\n").unwrap();
    let out = tmp.path().join("out");
    let o = tool(&["rates", "--risks-file", path(&risks), "--out", path(&out)]);
    assert!(o.status.success(), "{}", stderr(&o));
    let report: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out.join("report.json")).unwrap()).unwrap();
    assert!((report["slope"].as_f64().unwrap() + 1.0).abs() < 1e-12);
    assert_eq!(read_csv(&out.join("rates.csv")).len(), 4);
}

#[test]
fn small_rates_run_completes() {
    let tmp = TempDir::new().unwrap();
    let o = tool(&[
        "rates",
        "--f",
        "absdip",
        "--em",
        "negexp",
        "--n-list",
        "100,200,400",
        "--reps",
        "8",
        "--target",
        "lq:1",
        "--alpha",
        "1",
        "--beta",
        "1",
        "--seed",
        "4",
        "--out",
        path(tmp.path()),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let report: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(tmp.path().join("report.json")).unwrap()).unwrap();
    assert_eq!(report["theoretical_exponent"].as_f64(), Some(-0.5));
    assert!(report["slope"].as_f64().unwrap().is_finite());
}
