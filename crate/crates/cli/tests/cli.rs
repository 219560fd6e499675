use std::path::Path;
use std::process::{Command, Output};

use ajwave_core::io::{parse_sweep_csv, sweep_csv, CoefficientFile, Spectrogram};
use ajwave_core::published::W5_6_6;
use ajwave_core::{DesignMethod, SweepAxis};
use tempfile::TempDir;

fn ajwave(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ajwave")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn path(dir: &TempDir, name: &str) -> String {
    dir.path().join(name).to_str().unwrap().to_owned()
}

/// Pulls every `<label>: <number> ns` value from `cost` output.
fn costs(text: &str) -> Vec<f64> {
    text.lines()
        .filter_map(|l| l.split(':').nth(1))
        .map(|v| v.trim().trim_end_matches("ns").trim().parse().unwrap())
        .collect()
}

#[test]
fn design_eigen_nulls_target() {
    let dir = TempDir::new().unwrap();
    let out = path(&dir, "w.json");
    let o = ajwave(&["design", "--fhat", "1.5", "--n", "5", "--tc", "1", "--method", "eigen", "--out", &out]);
    assert!(o.status.success());
    let f = CoefficientFile::read(Path::new(&out)).unwrap();
    assert_eq!(f.method, DesignMethod::Eigen);
    assert_eq!(f.n, 5);
    assert!(f.cost / 1e-9 <= 1e-10);
}

#[test]
fn powell_design_is_byte_identical() {
    let dir = TempDir::new().unwrap();
    let (a, b) = (path(&dir, "a.json"), path(&dir, "b.json"));
    for p in [&a, &b] {
        let o = ajwave(&["design", "--fhat", "6.6", "--n", "5", "--tc", "1", "--method", "powell", "--seed", "7", "--out", p]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    }
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
}

#[test]
fn design_band_edge_rejected() {
    let o = ajwave(&["design", "--fhat", "10", "--n", "5", "--tc", "1"]);
    assert!(!o.status.success());
}

#[test]
fn powell_without_iterations_reports_failure() {
    let dir = TempDir::new().unwrap();
    let out = path(&dir, "w.json");
    let o = ajwave(&["design", "--fhat", "3", "--method", "powell", "--max-outer", "0", "--out", &out]);
    assert!(!o.status.success());
    assert!(Path::new(&out).exists(), "best iterate kept");
}

#[test]
fn cost_of_published_coefficients() {
    let dir = TempDir::new().unwrap();
    let file = CoefficientFile {
        n: 5,
        fhat_hz: 6.6e9,
        tc_s: 1e-9,
        coeffs: W5_6_6.to_vec(),
        cost: 0.0,
        method: DesignMethod::Eigen,
        seed: 0,
    };
    let p = path(&dir, "w.json");
    file.write(Path::new(&p)).unwrap();
    let o = ajwave(&["cost", &p, "--fj", "6.6"]);
    assert!(o.status.success());
    let c = costs(&stdout(&o));
    assert_eq!(c.len(), 2);
    assert!(c.iter().all(|&x| x <= 5e-3), "{c:?}");

    let zero = CoefficientFile { coeffs: vec![0.0; 5], ..file.clone() };
    zero.write(Path::new(&p)).unwrap();
    assert_eq!(costs(&stdout(&ajwave(&["cost", &p, "--fj", "6.6"]))), vec![0.0, 0.0]);

    let random = CoefficientFile { coeffs: vec![0.3, -0.8, 0.1, 0.55, -0.2], ..file };
    random.write(Path::new(&p)).unwrap();
    let c = costs(&stdout(&ajwave(&["cost", &p, "--fj", "2.3"])));
    assert!((c[0] - c[1]).abs() <= 1e-3 * c[0], "{c:?}");
}

#[test]
fn spectrogram_rows_and_usage_errors() {
    let dir = TempDir::new().unwrap();
    let out = path(&dir, "s.csv");
    let o = ajwave(&["spectrogram", "--fgrid", "1.5,3.0,6.6", "--out", &out]);
    assert!(o.status.success());
    let text = std::fs::read_to_string(&out).unwrap();
    let s = Spectrogram::parse(&text).unwrap();
    assert_eq!(s.rows.len(), 3);
    assert_eq!(s.to_csv(), text);
    for (fhat, row) in &s.rows {
        let peak = row.iter().cloned().fold(0.0, f64::max);
        let k = ((fhat / (s.freqs[1] - s.freqs[0])).round()) as usize;
        assert!(10.0 * (row[k] / peak).log10() <= -40.0);
    }
    assert_eq!(ajwave(&["spectrogram", "--fgrid", "", "--out", &out]).status.code(), Some(2));
}

#[test]
fn ber_quiet_link_and_determinism() {
    let dir = TempDir::new().unwrap();
    let cfg = path(&dir, "q.toml");
    std::fs::write(&cfg, "jammer.sjr_db = inf\nlink.ebn0_db = inf\nmc.n_bits = 2000\nmc.seed = 5\n").unwrap();
    let (a, b) = (path(&dir, "a.csv"), path(&dir, "b.csv"));
    for out in [&a, &b] {
        let o = ajwave(&["ber", "--config", &cfg, "--axis", "sjr", "--grid", "-30:-20:5", "--out", out]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    }
    let text = std::fs::read_to_string(&a).unwrap();
    assert_eq!(text.as_bytes(), std::fs::read(&b).unwrap().as_slice());
    let (axis, points) = parse_sweep_csv(&text).unwrap();
    assert_eq!(axis, SweepAxis::Sjr);
    assert_eq!(points.len(), 3);
    assert!(points.iter().all(|p| p.n_errors == 0 && p.ber == 0.0 && p.n_bits == 2000));
    assert_eq!(sweep_csv(axis, &points), text);
}

#[test]
fn ber_writes_instrumented_dump() {
    let dir = TempDir::new().unwrap();
    let cfg = path(&dir, "c.toml");
    std::fs::write(&cfg, "mc.n_bits = 50\n").unwrap();
    let dump = path(&dir, "i.csv");
    let o = ajwave(&[
        "ber", "--config", &cfg, "--axis", "fj", "--grid", "1.5", "--out", &path(&dir, "b.csv"),
        "--instrumented", &dump,
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let rows = ajwave_core::io::parse_instrumented_csv(&std::fs::read_to_string(&dump).unwrap()).unwrap();
    assert_eq!(rows.len(), 50);
}

#[test]
fn unknown_config_key_rejected() {
    let dir = TempDir::new().unwrap();
    let cfg = path(&dir, "bad.toml");
    std::fs::write(&cfg, "th.tc_ns = 1\njammer.power = 3\n").unwrap();
    let o = ajwave(&["ber", "--config", &cfg, "--axis", "sjr", "--grid", "0", "--out", &path(&dir, "b.csv")]);
    assert!(!o.status.success());
    assert!(String::from_utf8_lossy(&o.stderr).contains("power"));
}

#[test]
fn psd_outputs() {
    let dir = TempDir::new().unwrap();
    let out = path(&dir, "p.csv");
    assert!(ajwave(&["psd", "--doublet", "--out", &out]).status.success());
    let text = std::fs::read_to_string(&out).unwrap();
    assert!(text.starts_with("freq_hz,psd\n"));

    let cfg = path(&dir, "c.toml");
    std::fs::write(&cfg, "jammer.sjr_db = -30\nwaveform.mode = \"doublet\"\nclipper.enabled = true\n").unwrap();
    let clipped = path(&dir, "c.csv");
    let o = ajwave(&["psd", "--config", &cfg, "--bits", "32", "--out", &out, "--clipped-out", &clipped]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(Path::new(&clipped).exists());
}

#[test]
fn verify_passes_and_catches_mutation() {
    let o = ajwave(&["verify"]);
    assert!(o.status.success(), "{}", stdout(&o));
    assert!(stdout(&o).contains("0 failed"));
    let m = ajwave(&["verify", "--mutate-xn"]);
    assert!(!m.status.success());
    assert!(stdout(&m).lines().any(|l| l.starts_with("FAIL oracle")));
    let tight = ajwave(&["verify", "--tol-scale", "1e-30"]);
    assert!(stdout(&tight).contains("residual"));
}
