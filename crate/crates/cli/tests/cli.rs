use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

const BIN: &str = env!("CARGO_BIN_EXE_cpi-lab");

fn config(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs").join(name)
}

fn run(args: &[&str]) -> Output {
    Command::new(BIN)
        .args(args)
        .env_remove("CPI_MATERIALS")
        .output()
        .unwrap()
}

fn summary(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| {
        panic!("{e}: {}", String::from_utf8_lossy(&out.stderr));
    })
}

const FAST: &str = r#"
[laser]
centre_wavelength_nm = 790.0
pulse_duration_fs = 110.0

[chirp]
chirped_duration_ps = 51.2
chirped_bandwidth_nm = 10.0
antichirped_bandwidth_nm = 9.0

[filter]
centre_wavelength_nm = 395.9
bandwidth_nm = 0.4

[scan]
start_um = -60.0
stop_um = 60.0
step_um = 2.0
"#;

fn write_config(dir: &TempDir, name: &str, text: &str) -> PathBuf {
    let path = dir.path().join(name);
    fs::write(&path, text).unwrap();
    path
}

#[test]
fn default_dip_has_expected_visibility_and_width() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("dip.csv");
    let o = run(&[
        "cpi-dip",
        "--config",
        config("paper_fig2.cfg").to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let s = summary(&o);
    let v = s["fit"]["visibility"].as_f64().unwrap();
    let w = s["fit"]["fwhm_um"].as_f64().unwrap();
    assert!((0.85..1.0).contains(&v), "{v}");
    assert!((w - 20.0).abs() < 1.0, "{w}");
    let csv = fs::read_to_string(&out).unwrap();
    assert!(csv.starts_with("stage_position_um,delay_fs,signal\n"));
    assert_eq!(csv.lines().count(), 242);
}

#[test]
fn fit_of_written_trace_matches_in_process_fit() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(&dir, "c.cfg", &format!("{FAST}\n[detector]\nbias = -0.035\n"));
    let out = dir.path().join("dip.csv");
    let dip = run(&[
        "cpi-dip",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(dip.status.success());
    let fit = run(&["fit", "--input", out.to_str().unwrap(), "--bias", "-0.035"]);
    assert!(fit.status.success(), "{}", String::from_utf8_lossy(&fit.stderr));
    let (a, b) = (summary(&dip), summary(&fit));
    assert_eq!(a["fit"], b["fit"]);
    assert_eq!(a["bias_corrected_fit"], b["bias_corrected_fit"]);
    // removing a negative bias raises the baseline and lowers the visibility
    let raw = a["fit"]["visibility"].as_f64().unwrap();
    let corrected = a["bias_corrected_fit"]["visibility"].as_f64().unwrap();
    assert!(corrected < raw);
}

#[test]
fn loss_sweep_without_background_is_flat() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(
        &dir,
        "c.cfg",
        &format!("{FAST}\n[loss]\ntransmissions = [1.0, 0.5, 0.1, 0.01]\n"),
    );
    let out = dir.path().join("loss.csv");
    let o = run(&[
        "loss-sweep",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(o.status.success());
    let s = summary(&o);
    let v: Vec<f64> = s["points"]
        .as_array()
        .unwrap()
        .iter()
        .map(|p| p["cpi_visibility"].as_f64().unwrap())
        .collect();
    assert_eq!(v.len(), 4);
    for x in &v {
        assert!((x - v[0]).abs() < 1e-6, "{v:?}");
    }
    let csv = fs::read_to_string(&out).unwrap();
    assert!(csv.starts_with("transmission,visibility,fwhm_um,centre_um,baseline\n"));
}

#[test]
fn repeated_runs_are_byte_identical() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(&dir, "c.cfg", FAST);
    let (a, b) = (dir.path().join("a.csv"), dir.path().join("b.csv"));
    for (path, threads) in [(&a, "1"), (&b, "3")] {
        let o = run(&[
            "--threads",
            threads,
            "cpi-dip",
            "--config",
            cfg.to_str().unwrap(),
            "--out",
            path.to_str().unwrap(),
        ]);
        assert!(o.status.success());
    }
    assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap());
}

#[test]
fn config_errors_exit_with_2() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("x.csv");
    for (name, text) in [
        ("typo.cfg", FAST.replace("bandwidth_nm = 0.4", "bandwith_nm = 0.4")),
        ("unit.cfg", FAST.replace("pulse_duration_fs", "pulse_duration_ps")),
        ("loss.cfg", format!("{FAST}\n[sample]\ntransmission = 1.5\n")),
        (
            "material.cfg",
            format!("{FAST}\n[sample]\nlayers = [{{ material = \"unobtainium\", thickness_mm = 1.0 }}]\n"),
        ),
    ] {
        let cfg = write_config(&dir, name, &text);
        let o = run(&[
            "cpi-dip",
            "--config",
            cfg.to_str().unwrap(),
            "--out",
            out.to_str().unwrap(),
        ]);
        assert_eq!(
            o.status.code(),
            Some(2),
            "{name}: {}",
            String::from_utf8_lossy(&o.stderr)
        );
    }
    let o = run(&[
        "cpi-dip",
        "--config",
        "/nonexistent.cfg",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(2));
    let o = run(&[
        "spectrum-map",
        "--config",
        write_config(&dir, "c.cfg", FAST).to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn scan_beyond_guard_band_exits_with_3() {
    let dir = TempDir::new().unwrap();
    let text = FAST
        .replace("start_um = -60.0", "start_um = 40000.0")
        .replace("stop_um = 60.0", "stop_um = 40004.0");
    let cfg = write_config(&dir, "far.cfg", &text);
    let out = dir.path().join("x.csv");
    let o = run(&[
        "cpi-dip",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(3), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(String::from_utf8_lossy(&o.stderr).contains("guard band"));
}

#[test]
fn materials_file_from_environment() {
    let dir = TempDir::new().unwrap();
    let materials = write_config(
        &dir,
        "materials.toml",
        "[glass]\nmodel = \"taylor\"\ngroup_delay_fs_per_mm = 1000.0\nreference_wavelength_nm = 791.8\n",
    );
    let cfg = write_config(
        &dir,
        "c.cfg",
        &format!("{FAST}\n[sample]\nlayers = [{{ material = \"glass\", thickness_mm = 2.0 }}]\n"),
    );
    let args = ["group-delay", "--config", cfg.to_str().unwrap()];
    let o = Command::new(BIN)
        .args(args)
        .env("CPI_MATERIALS", &materials)
        .output()
        .unwrap();
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let s = summary(&o);
    assert!((s["group_delay_fs"].as_f64().unwrap() - 2000.0).abs() < 1e-9);
    assert_eq!(run(&args).status.code(), Some(2));
}

#[test]
fn group_delay_report_for_calcite_and_bk7() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("gd.csv");
    let o = run(&[
        "group-delay",
        "--config",
        config("paper_fig3.cfg").to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(o.status.success());
    let s = summary(&o);
    let x = s["predicted_centre_um"].as_f64().unwrap();
    assert!((x - 34816.0).abs() < 20.0, "{x}");
    assert_eq!(s["layers"].as_array().unwrap().len(), 2);
    assert!(fs::read_to_string(&out)
        .unwrap()
        .starts_with("wavelength_nm,group_delay_fs,stage_position_um\n"));
}

#[test]
fn gnuplot_script_next_to_csv() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(&dir, "c.cfg", FAST);
    let out = dir.path().join("hom.csv");
    let o = run(&[
        "hom-dip",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
        "--gnuplot",
    ]);
    assert!(o.status.success());
    let script = fs::read_to_string(dir.path().join("hom.gp")).unwrap();
    assert!(script.contains("'hom.csv'"));
    let v = summary(&o)["fit"]["visibility"].as_f64().unwrap();
    assert!((v - 1.0).abs() < 1e-3);
}

#[test]
fn shipped_configs_parse() {
    for name in [
        "paper_fig2.cfg",
        "paper_fig3.cfg",
        "paper_fig3_no_sample.cfg",
        "paper_fig4.cfg",
    ] {
        let o = run(&["group-delay", "--config", config(name).to_str().unwrap()]);
        assert!(o.status.success(), "{name}: {}", String::from_utf8_lossy(&o.stderr));
    }
}
