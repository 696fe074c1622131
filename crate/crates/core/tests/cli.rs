use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use holoris::formats::{parse_coding, parse_hologram, parse_report, write_hologram, Table};
use tempfile::TempDir;

fn holoris(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_holoris")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

fn report_value(report: &str, key: &str) -> String {
    report
        .lines()
        .find_map(|l| l.strip_prefix(&format!("{key}=")))
        .unwrap_or_else(|| panic!("{key} missing in {report}"))
        .to_string()
}

/// Default config: BS broadside, user at (0°, 30°).
fn fixture(dir: &TempDir) -> std::path::PathBuf {
    let out = dir.path().join("holo.csv");
    let o = holoris(&["simulate", "--output", p(&out), "--quiet"]);
    assert!(o.status.success(), "{}", stderr(&o));
    out
}

#[test]
fn simulate_defaults_to_reference_panel() {
    let dir = TempDir::new().unwrap();
    let out = fixture(&dir);
    let text = fs::read_to_string(&out).unwrap();
    assert!(text.lines().any(|l| l == "# f_c_hz=3500000000"));
    let h = parse_hologram(&text).unwrap();
    assert_eq!(h.values().dim(), (32, 32));
    assert_eq!(write_hologram(&h), text);
}

#[test]
fn simulate_writes_one_file_per_tag() {
    let dir = TempDir::new().unwrap();
    let cfg = dir.path().join("cfg.toml");
    fs::write(
        &cfg,
        r#"
[[sources]]
kind = "far"
theta_deg = 0.0
phi_deg = 0.0

[[sources]]
kind = "far"
theta_deg = 0.0
phi_deg = 30.0
frequency_tag = 1

[[sources]]
kind = "far"
theta_deg = 15.0
phi_deg = -30.0
frequency_tag = 2
"#,
    )
    .unwrap();
    let out = dir.path().join("h.csv");
    let o = holoris(&["simulate", "--config", p(&cfg), "--output", p(&out), "--quiet"]);
    assert!(o.status.success(), "{}", stderr(&o));
    for tag in [1, 2] {
        let h = parse_hologram(&fs::read_to_string(dir.path().join(format!("h_tag{tag}.csv"))).unwrap()).unwrap();
        assert_eq!(h.frequency_tag(), tag);
    }
    assert!(!out.exists());
}

#[test]
fn invalid_config_exits_2_with_field_path() {
    let dir = TempDir::new().unwrap();
    let cfg = dir.path().join("cfg.toml");
    fs::write(&cfg, "[detector]\nnoise_std = -0.5\n").unwrap();
    let o = holoris(&["simulate", "--config", p(&cfg), "--output", p(&dir.path().join("x.csv"))]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("detector.noise_std"), "{}", stderr(&o));

    fs::write(&cfg, "[geometry]\nbogus = 1\n").unwrap();
    let o = holoris(&["simulate", "--config", p(&cfg), "--output", p(&dir.path().join("x.csv"))]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn missing_config_file_exits_3() {
    let o = holoris(&["simulate", "--config", "/nonexistent/cfg.toml", "--output", "/tmp/never.csv"]);
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn localize_fixture_reports_twin_candidates() {
    let dir = TempDir::new().unwrap();
    let holo = fixture(&dir);
    let o = holoris(&["localize", p(&holo), "--bs-theta", "0", "--bs-phi", "0"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let r = parse_report(&stdout(&o)).unwrap();
    let mut phis: Vec<f64> = r.candidates().map(|c| c.phi_deg).collect();
    phis.sort_by(f64::total_cmp);
    assert_eq!(phis.len(), 2);
    assert!((phis[0] + 32.367_221_6).abs() < 1e-6 && (phis[1] - 32.367_221_6).abs() < 1e-6);
    assert!(r.chosen.is_none());
    assert_eq!(report_value(&stdout(&o), "chosen_phi_deg"), "none");
}

#[test]
fn localize_sector_and_oracle() {
    let dir = TempDir::new().unwrap();
    let holo = fixture(&dir);
    let o = holoris(&["localize", p(&holo), "--bs-theta", "0", "--bs-phi", "0", "--sector", "0:90"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let chosen: f64 = report_value(&stdout(&o), "chosen_phi_deg").parse().unwrap();
    assert!((chosen - 32.367_221_6).abs() < 1e-6);

    let o = holoris(&["localize", p(&holo), "--bs-theta", "0", "--bs-phi", "0", "--sector", "-90:-40"]);
    assert_eq!(o.status.code(), Some(5));
    let o = holoris(&["localize", p(&holo), "--bs-theta", "0", "--bs-phi", "0", "--sector", "-90:90"]);
    assert_eq!(o.status.code(), Some(5));

    let o = holoris(&["localize", p(&holo), "--bs-theta", "0", "--bs-phi", "0", "--oracle-truth", "-1,-29"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let chosen: f64 = report_value(&stdout(&o), "chosen_phi_deg").parse().unwrap();
    assert!(chosen < 0.0);
}

#[test]
fn localize_zero_pad_flag() {
    let dir = TempDir::new().unwrap();
    let holo = fixture(&dir);
    let o = holoris(&["localize", p(&holo), "--bs-theta", "0", "--bs-phi", "0", "--zero-pad", "8", "--sector", "0:90"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let chosen: f64 = report_value(&stdout(&o), "chosen_phi_deg").parse().unwrap();
    assert!((chosen - 30.0).abs() < 0.5, "{chosen}");
}

#[test]
fn constant_hologram_exits_4() {
    let dir = TempDir::new().unwrap();
    let holo = fixture(&dir);
    let text = fs::read_to_string(&holo).unwrap();
    let flat: String = text
        .lines()
        .map(|l| if l.starts_with('#') { l.to_string() } else { vec!["2"; 32].join(",") })
        .collect::<Vec<_>>()
        .join("\n");
    let path = dir.path().join("flat.csv");
    fs::write(&path, flat).unwrap();
    let o = holoris(&["localize", p(&path), "--bs-theta", "0", "--bs-phi", "0"]);
    assert_eq!(o.status.code(), Some(4), "{}", stderr(&o));
}

#[test]
fn malformed_hologram_exits_3_with_line() {
    let dir = TempDir::new().unwrap();
    let holo = fixture(&dir);
    let mut lines: Vec<String> = fs::read_to_string(&holo).unwrap().lines().map(String::from).collect();
    lines[10] = lines[10].replacen(',', ",oops,", 1);
    let path = dir.path().join("bad.csv");
    fs::write(&path, lines.join("\n")).unwrap();
    let o = holoris(&["localize", p(&path), "--bs-theta", "0", "--bs-phi", "0"]);
    assert_eq!(o.status.code(), Some(3));
    assert!(stderr(&o).contains("line 11"), "{}", stderr(&o));
}

#[test]
fn codegen_far_and_near() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("code.txt");
    let o = holoris(&[
        "codegen", "--mode", "far", "--bs-theta", "0", "--bs-phi", "0", "--ue-theta", "0", "--ue-phi", "0", "--output",
        p(&out),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let code = parse_coding(&fs::read_to_string(&out).unwrap()).unwrap();
    assert!(code.states().iter().all(|s| *s == 0));

    let o = holoris(&[
        "codegen", "--mode", "far", "--bs-theta", "0", "--bs-phi", "0", "--ue-theta", "0", "--ue-phi", "30", "--output",
        p(&out),
    ]);
    assert!(o.status.success());
    assert!(stdout(&o).contains("gain_vs_all_zero_db="));
    let text = fs::read_to_string(&out).unwrap();
    let code = parse_coding(&text).unwrap();
    let row: Vec<u8> = code.states().row(0).to_vec();
    assert!(code.states().rows().into_iter().all(|r| r.to_vec() == row));
    let rises: Vec<usize> = (1..row.len()).filter(|&i| row[i - 1] == 0 && row[i] == 1).collect();
    let period = (rises[rises.len() - 1] - rises[0]) as f64 / (rises.len() - 1) as f64;
    assert!((period - 8.57).abs() < 0.5, "{period}");

    let o = holoris(&[
        "codegen", "--mode", "near", "--bs-theta", "0", "--bs-phi", "0", "--ue-theta", "0", "--ue-phi", "30",
        "--bs-range", "5", "--output", p(&out),
    ]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("--ue-range"));

    let o = holoris(&[
        "codegen", "--mode", "near", "--bs-theta", "-15", "--bs-phi", "0", "--ue-theta", "0", "--ue-phi", "30",
        "--bs-range", "5", "--ue-range", "1.5", "--output", p(&out),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
}

#[test]
fn pattern_command_writes_csv() {
    let dir = TempDir::new().unwrap();
    let code = dir.path().join("code.txt");
    let o = holoris(&[
        "codegen", "--mode", "far", "--bs-theta", "0", "--bs-phi", "0", "--ue-theta", "0", "--ue-phi", "30", "--output",
        p(&code),
    ]);
    assert!(o.status.success());
    let out = dir.path().join("pattern.csv");
    let o = holoris(&["pattern", p(&code), "--bs-theta", "0", "--bs-phi", "0", "--step", "2", "--output", p(&out)]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = fs::read_to_string(&out).unwrap();
    let t = Table::parse(&text).unwrap();
    assert_eq!(t.header, vec!["theta_deg", "phi_deg", "power_db"]);
    assert_eq!(t.to_csv(), text);
    let peak: f64 = report_value(&stdout(&o), "peak_phi_deg").parse().unwrap();
    assert!((peak.abs() - 30.0).abs() <= 2.0, "{peak}");
}

#[test]
fn unknown_suite_lists_valid_ones() {
    let o = holoris(&["experiment", "bogus"]);
    assert_eq!(o.status.code(), Some(2));
    let err = stderr(&o);
    for s in ["grid", "gain", "ber", "showcase"] {
        assert!(err.contains(s), "{err}");
    }
}

fn manifest(dir: &Path, suite: &str) -> String {
    fs::read_to_string(dir.join(format!("manifest_{suite}.txt"))).unwrap()
}

#[test]
fn grid_suite_is_deterministic() {
    let dir = TempDir::new().unwrap();
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    for d in [&a, &b] {
        let o = holoris(&["experiment", "grid", "--seed", "7", "--output-dir", p(d), "--quiet"]);
        assert!(o.status.success(), "{}", stderr(&o));
        assert!(stdout(&o).starts_with("grid: samples=104 failures=0"), "{}", stdout(&o));
        assert!(stdout(&o).contains("fraction_within_9deg="));
    }
    assert_eq!(manifest(&a, "grid"), manifest(&b, "grid"));
    let m = manifest(&a, "grid");
    assert!(m.contains("status=OK") && m.contains("seed=7") && m.contains("artifact=grid_records.csv sha256="));
    let records = fs::read_to_string(a.join("grid_records.csv")).unwrap();
    assert_eq!(Table::parse(&records).unwrap().to_csv(), records);
}

#[test]
fn gain_ber_and_showcase_suites() {
    let dir = TempDir::new().unwrap();
    let out = dir.path();
    for suite in ["gain", "ber", "showcase"] {
        let o = holoris(&["experiment", suite, "--output-dir", p(out), "--quiet"]);
        assert!(o.status.success(), "{suite}: {}", stderr(&o));
        assert!(stdout(&o).starts_with(&format!("{suite}:")));
        assert!(manifest(out, suite).contains("status=OK"));
    }
    let ber = Table::parse(&fs::read_to_string(out.join("ber.csv")).unwrap()).unwrap();
    assert_eq!(ber.header, vec!["tx_power_proxy_db", "ber_all_zero", "ber_with_gain"]);
    let gain = Table::parse(&fs::read_to_string(out.join("gain_sweep.csv")).unwrap()).unwrap();
    let status = gain.header.iter().position(|h| h == "status").unwrap();
    assert_eq!(gain.rows.iter().filter(|r| r[status] != "ok").count(), 1);
    for k in 1..=3 {
        let text = fs::read_to_string(out.join(format!("sample{k}_coding.txt"))).unwrap();
        assert_eq!(holoris::formats::write_coding(&parse_coding(&text).unwrap()), text);
        let rep = fs::read_to_string(out.join(format!("sample{k}_report.txt"))).unwrap();
        assert!(parse_report(&rep).unwrap().chosen.is_some());
    }
}

#[test]
fn failed_suite_leaves_failed_manifest() {
    let dir = TempDir::new().unwrap();
    let cfg = dir.path().join("cfg.toml");
    // a sample with coincident BS and UE cannot be localized
    fs::write(&cfg, "[[experiment.showcase.samples]]\nbs = [0.0, 0.0]\nue = [0.0, 0.0]\n").unwrap();
    let out = dir.path().join("out");
    let o = holoris(&["experiment", "showcase", "--config", p(&cfg), "--output-dir", p(&out), "--quiet"]);
    assert_eq!(o.status.code(), Some(4), "{}", stderr(&o));
    let m = manifest(&out, "showcase");
    assert!(m.contains("status=FAILED"), "{m}");
}
