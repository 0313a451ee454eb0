use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::{json, Value};

fn awq(args: &[&str], env: &[(&str, &str)]) -> Output {
    let mut c = Command::new(env!("CARGO_BIN_EXE_awq"));
    c.args(args).env_remove("AWQ_WORKERS");
    for (k, v) in env {
        c.env(k, v);
    }
    c.output().unwrap()
}

fn write_config(dir: &Path, file: &str, v: &Value) -> PathBuf {
    let p = dir.join(file);
    std::fs::write(&p, serde_json::to_string_pretty(v).unwrap()).unwrap();
    p
}

fn run(cmd: &str, config: &Path, out: &Path, extra: &[&str]) -> Output {
    let mut args = vec![cmd, "--config", config.to_str().unwrap(), "--out", out.to_str().unwrap()];
    args.extend_from_slice(extra);
    awq(&args, &[])
}

fn read_csv(path: &Path) -> (Vec<String>, Vec<Vec<String>>) {
    let mut r = csv::Reader::from_path(path).unwrap();
    let header = r.headers().unwrap().iter().map(String::from).collect();
    let rows = r.records().map(|rec| rec.unwrap().iter().map(String::from).collect()).collect();
    (header, rows)
}

fn column(header: &[String], rows: &[Vec<String>], name: &str) -> Vec<f64> {
    let i = header.iter().position(|h| h == name).unwrap_or_else(|| panic!("no column {name}"));
    rows.iter().map(|r| r[i].parse().unwrap()).collect()
}

fn gap_config(n: usize) -> Value {
    json!({
        "name": "gap",
        "chain": { "n": n, "d": 0.25 },
        "dimers": [{ "center": 0.0 }],
        "raman": { "omega": 0.03, "delta": 200.0 },
        "run": { "separation_over_d": 14, "tuning": "band_edge", "epsilon": 0.002 }
    })
}

#[test]
fn band_has_one_row_per_site() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "chain.json", &json!({ "chain": { "n": 100, "d": 0.25 }, "dimers": [] }));
    let out = run("band", &cfg, dir.path(), &[]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let (header, rows) = read_csv(&dir.path().join("chain.csv"));
    assert_eq!(header, ["nu", "k_d_over_pi", "J_over_Gamma0", "Gamma_over_Gamma0", "parity", "guided"]);
    assert_eq!(rows.len(), 100);
    let report: Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("chain.report.json")).unwrap()).unwrap();
    assert_eq!(report["status"], "ok");
    assert_eq!(report["config"]["chain"]["n"], 100);
    assert!(report["version"].is_string());
}

#[test]
fn malformed_json_exits_2_with_location() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("bad.json");
    std::fs::write(&p, "{\n  \"chain\": { \"n\": 10, \"d\": 0.25 },\n  \"dimers\": [,]\n}\n").unwrap();
    let out = run("band", &p, dir.path(), &[]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("line 3"), "{err}");
}

#[test]
fn invalid_scenarios_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let unknown = write_config(dir.path(), "u.json", &json!({ "chain": { "n": 10, "d": 0.25 }, "dimers": [], "colour": 1 }));
    assert_eq!(run("band", &unknown, dir.path(), &[]).status.code(), Some(2));
    let spacing = write_config(dir.path(), "s.json", &json!({ "chain": { "n": 10, "d": -0.25 }, "dimers": [] }));
    assert_eq!(run("band", &spacing, dir.path(), &[]).status.code(), Some(2));
    let one = write_config(dir.path(), "o.json", &json!({ "chain": { "n": 20, "d": 0.25 }, "dimers": [{ "center": 0.0 }] }));
    assert_eq!(run("bandgap", &one, dir.path(), &[]).status.code(), Some(2));
}

#[test]
fn empty_axis_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "g.json", &gap_config(50));
    for spec in ["chain.n=", "chain.n=5:1:1", "=1,2", "chain.n"] {
        let out = run("scan", &cfg, dir.path(), &["--command", "band", "--axis", spec]);
        assert_eq!(out.status.code(), Some(2), "{spec}");
    }
}

#[test]
fn resonance_exits_3_with_diagnostics() {
    let dir = tempfile::tempdir().unwrap();
    let mut v = gap_config(40);
    v["run"] = json!({ "separation_over_d": 6, "tuning": "top_mode", "detuning": 0.0 });
    let cfg = write_config(dir.path(), "r.json", &v);
    let out = run("bandgap", &cfg, dir.path(), &[]);
    assert_eq!(out.status.code(), Some(3), "{}", String::from_utf8_lossy(&out.stderr));
    let report: Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("gap.report.json")).unwrap()).unwrap();
    assert_eq!(report["status"], "error");
    assert_eq!(report["error"]["kind"], "numeric");
}

#[test]
fn two_axis_scan_has_product_rows() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "g.json", &gap_config(50));
    let out = run(
        "scan",
        &cfg,
        dir.path(),
        &["--command", "bandgap", "--axis", "chain.n=40,60,80", "--axis", "run.separation_over_d=2:8:2"],
    );
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let (header, rows) = read_csv(&dir.path().join("gap.csv"));
    assert_eq!(rows.len(), 12);
    assert_eq!(&header[..3], ["chain.n", "run.separation_over_d", "N"]);
    assert_eq!(header.last().unwrap(), "status");
    // last axis varies fastest
    assert_eq!(rows[1][0], "40");
    assert_eq!(rows[1][1], "4");
    assert_eq!(rows[4][0], "60");
    assert!(rows.iter().all(|r| r.last().unwrap() == "ok"));
    let n = column(&header, &rows, "N");
    let l = column(&header, &rows, "L_over_d");
    assert_eq!(n, column(&header, &rows, "chain.n"));
    assert_eq!(l, column(&header, &rows, "run.separation_over_d"));
}

#[test]
fn failed_points_are_recorded_and_the_scan_continues() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "g.json", &gap_config(50));
    // a negative spacing fails validation at the second point only
    let out = run("scan", &cfg, dir.path(), &["--command", "bandgap", "--axis", "chain.d=0.25,-1"]);
    assert_ne!(out.status.code(), Some(0));
    let (_, rows) = read_csv(&dir.path().join("gap.csv"));
    assert_eq!(rows.len(), 2);
    assert_eq!(rows[0].last().unwrap(), "ok");
    assert!(rows[1].last().unwrap().starts_with("validation"));
    let report: Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("gap.report.json")).unwrap()).unwrap();
    assert_eq!(report["failed_points"], 1);
    assert_eq!(report["points"].as_array().unwrap().len(), 2);
}

#[test]
fn output_bytes_do_not_depend_on_worker_count() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "g.json", &gap_config(50));
    let mut outputs = vec![];
    for workers in ["1", "3"] {
        let out_dir = dir.path().join(format!("w{workers}"));
        let args = [
            "scan",
            "--config",
            cfg.to_str().unwrap(),
            "--out",
            out_dir.to_str().unwrap(),
            "--command",
            "bandgap",
            "--axis",
            "chain.n=40,60,80,100",
        ];
        let out = awq(&args, &[("AWQ_WORKERS", workers)]);
        assert_eq!(out.status.code(), Some(0));
        outputs.push(std::fs::read(out_dir.join("gap.csv")).unwrap());
    }
    assert_eq!(outputs[0], outputs[1]);
}

#[test]
fn numbers_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "c.json", &json!({ "chain": { "n": 30, "d": 0.25 }, "dimers": [{ "center": 0.0 }] }));
    assert_eq!(run("coupling", &cfg, dir.path(), &[]).status.code(), Some(0));
    let text = std::fs::read_to_string(dir.path().join("c.csv")).unwrap();
    let (header, rows) = read_csv(&dir.path().join("c.csv"));
    assert_eq!(header, ["k_d_over_pi", "re_g", "im_g", "re_gamma_half", "im_gamma_half", "parity", "mode_parity"]);
    assert_eq!(rows.len(), 60);
    for r in &rows {
        for cell in &r[..5] {
            let x: f64 = cell.parse().unwrap();
            assert_eq!(format!("{x:?}"), *cell);
        }
    }
    assert!(!text.contains("NaN"));
}

#[test]
fn purcell_scan_rises_then_leaves_the_golden_rule() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "p.json",
        &json!({
            "chain": { "n": 200, "d": 0.25 },
            "dimers": [{ "center": 0.0 }],
            "raman": { "omega": 0.2, "delta": 8.0 },
            "run": { "kd_start": 0.80, "kd_stop": 0.97, "kd_step": 0.01 }
        }),
    );
    let out = run("purcell-scan", &cfg, dir.path(), &[]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let (header, rows) = read_csv(&dir.path().join("p.csv"));
    assert_eq!(rows.len(), 18);
    let kd = column(&header, &rows, "k_d_over_pi");
    let p = column(&header, &rows, "purcell");
    let p_fgr = column(&header, &rows, "purcell_fgr");
    assert!(kd.windows(2).all(|w| w[1] > w[0]));
    assert!(p_fgr.windows(2).all(|w| w[1] > w[0]));
    // the measured factor climbs across the Markovian part of the band
    let mid: Vec<usize> = (0..rows.len()).filter(|&i| kd[i] > 0.875 && kd[i] < 0.955).collect();
    assert!(mid.windows(2).all(|w| p[w[1]] > p[w[0]]));
    let dev = |i: usize| (p[i] / p_fgr[i] - 1.0).abs();
    assert!(mid.iter().all(|&i| dev(i) < 0.05));
    assert!(dev(rows.len() - 1) > 3.0 * mid.iter().map(|&i| dev(i)).fold(0.0, f64::max));
}

fn optimal_slope(ns: &str) -> f64 {
    let dir = tempfile::tempdir().unwrap();
    let mut v = gap_config(100);
    v["run"] = json!({ "command": "bandgap-rabi", "separation_over_d": 14, "tuning": "optimal" });
    let cfg = write_config(dir.path(), "o.json", &v);
    let out = run("scan", &cfg, dir.path(), &["--axis", &format!("chain.n={ns}")]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let (header, rows) = read_csv(&dir.path().join("gap.csv"));
    let n = column(&header, &rows, "chain.n");
    let e = column(&header, &rows, "error");
    let x: Vec<f64> = n.iter().map(|v| v.ln()).collect();
    let y: Vec<f64> = e.iter().map(|v| v.ln()).collect();
    let (mx, my) = (x.iter().sum::<f64>() / x.len() as f64, y.iter().sum::<f64>() / y.len() as f64);
    let sxy: f64 = x.iter().zip(&y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    sxy / sxx
}

#[test]
fn optimal_error_falls_as_inverse_n() {
    let slope = optimal_slope("50,100,200");
    assert!((slope + 1.0).abs() <= 0.2, "slope {slope}");
}

#[test]
#[ignore = "at N = 400 the next chain mode is within reach of the optimal detuning and the single-mode estimate fails"]
fn optimal_error_falls_as_inverse_n_up_to_400() {
    let slope = optimal_slope("50,100,200,400");
    assert!((slope + 1.0).abs() <= 0.2, "slope {slope}");
}
