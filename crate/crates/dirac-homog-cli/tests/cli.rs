//! End-to-end CLI behavior: exit codes, artifact layout, determinism of the
//! reports and stage isolation, on a deliberately small scenario.

use std::path::{Path, PathBuf};
use std::process::Command;

fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_dirac-homog")
}

fn tmp_dir(tag: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("dirac_homog_cli_{tag}"));
    let _ = std::fs::remove_dir_all(&dir);
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

/// Small but physical scenario: O(1) masses keep the strip short.
fn small_scenario(dir: &Path) -> PathBuf {
    let cfg = serde_json::json!({
        "potentials": {"v0": "8.8857658763167324*cos(2*pi*y1)"},
        "m": -0.5,
        "beta": 1.0,
        "grid_n": 32,
        "interface": {
            "l": 12.0, "n": 384, "xi1_half_range": 3.0, "steps": 41,
            "direct_trace_enabled": false
        },
        "bench": {
            "epsilons": [0.25, 0.125],
            "box_n": 64,
            "random_sources": 2,
            "structured_sources": 1,
            "extra_z": []
        },
        "output_dir": dir.join("out").to_str().unwrap()
    });
    let path = dir.join("scenario.json");
    std::fs::write(&path, serde_json::to_string_pretty(&cfg).unwrap()).unwrap();
    path
}

fn strip_timestamp(report: &str) -> String {
    report
        .lines()
        .filter(|l| !l.contains("generated_at"))
        .collect::<Vec<_>>()
        .join("\n")
}

#[test]
fn invalid_config_exits_with_code_2() {
    let dir = tmp_dir("badcfg");
    let path = dir.join("bad.json");
    std::fs::write(&path, r#"{"potentials": {}, "m": 1.0, "beta": 0.0}"#).unwrap();
    let out = Command::new(bin())
        .args(["all", "--config"])
        .arg(&path)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("beta"), "stderr: {err}");
}

#[test]
fn unknown_stage_exits_with_code_2() {
    let dir = tmp_dir("badstage");
    let cfg = small_scenario(&dir);
    let out = Command::new(bin())
        .args(["all", "--stages", "cell,nonsense", "--config"])
        .arg(&cfg)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn full_small_pipeline_passes_and_is_deterministic() {
    let dir = tmp_dir("full");
    let cfg = small_scenario(&dir);

    let run = |out_dir: &Path| {
        let out = Command::new(bin())
            .args(["all", "--config"])
            .arg(&cfg)
            .arg("--out")
            .arg(out_dir)
            .output()
            .unwrap();
        assert_eq!(
            out.status.code(),
            Some(0),
            "stdout: {}\nstderr: {}",
            String::from_utf8_lossy(&out.stdout),
            String::from_utf8_lossy(&out.stderr)
        );
    };
    let out_a = dir.join("a");
    let out_b = dir.join("b");
    run(&out_a);
    run(&out_b);

    // All advertised artifacts exist.
    for name in [
        "cell.json",
        "tensor.json",
        "bulk.json",
        "edge.json",
        "edge.csv",
        "bench.json",
        "bench.csv",
        "band_surface_unperturbed.csv",
        "band_surface_homogenized.csv",
        "scenario_report.json",
    ] {
        assert!(out_a.join(name).exists(), "missing {name}");
    }
    assert!(out_a.join("cell").join("T_11.csv").exists());
    assert!(out_a.join("cell").join("manifest.json").exists());

    // Byte-identical reports modulo the timestamp.
    let rep_a = std::fs::read_to_string(out_a.join("scenario_report.json")).unwrap();
    let rep_b = std::fs::read_to_string(out_b.join("scenario_report.json")).unwrap();
    assert_eq!(strip_timestamp(&rep_a), strip_timestamp(&rep_b));

    // The physics came out right for the O(1) transition scenario.
    let edge: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out_a.join("edge.json")).unwrap()).unwrap();
    assert_eq!(edge["spectral_flow"], 1);
    assert!((edge["sigma_band_integral"].as_f64().unwrap() - 1.0).abs() < 0.05);

    // Stage isolation: re-running one stage reproduces its artifact byte for
    // byte (recomputation is deterministic).
    let tensor_before = std::fs::read_to_string(out_a.join("tensor.json")).unwrap();
    let out = Command::new(bin())
        .args(["tensor", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(&out_a)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    let tensor_after = std::fs::read_to_string(out_a.join("tensor.json")).unwrap();
    assert_eq!(tensor_before, tensor_after);

    // `report` collates the cached stage outputs.
    let out = Command::new(bin())
        .args(["report", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(&out_a)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    let collated: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out_a.join("scenario_report.json")).unwrap())
            .unwrap();
    assert!(collated["stage_outputs"]["tensor"]["tau3"].is_number());
}

#[test]
fn degenerate_mass_short_circuits_with_numerical_exit_code() {
    let dir = tmp_dir("degenerate");
    // tau3 tuned so m + beta*tau3 = 0: amplitude^2/(8 pi^2) = 0.5.
    let amp = (0.5f64 * 8.0 * std::f64::consts::PI * std::f64::consts::PI).sqrt();
    let cfg = serde_json::json!({
        "potentials": {"v0": format!("{amp}*cos(2*pi*y1)")},
        "m": -0.5,
        "beta": 1.0,
        "grid_n": 32,
        "output_dir": dir.join("out").to_str().unwrap()
    });
    let path = dir.join("scenario.json");
    std::fs::write(&path, serde_json::to_string(&cfg).unwrap()).unwrap();
    let out = Command::new(bin())
        .args(["tensor", "--config"])
        .arg(&path)
        .output()
        .unwrap();
    assert_eq!(
        out.status.code(),
        Some(3),
        "stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(
        err.contains("degeneracy") || err.contains("gap closes"),
        "stderr: {err}"
    );
}
