// Copyright 2026 The qtransport Authors
// SPDX-License-Identifier: Apache-2.0

use std::path::{Path, PathBuf};

use qtransport_experiment::config::load_config;
use qtransport_experiment::manifest::verify_manifest;
use qtransport_experiment::output::{read_density, WignerFile};
use qtransport_experiment::runner::run_scenario;
use qtransport_experiment::RunError;

fn scenario(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("scenarios")
        .join(format!("{name}.toml"))
}

// The G.S. scenario, shortened and with both Wigner formats.
fn short_gs(extra: &[&str]) -> qtransport_experiment::ScenarioConfig {
    let mut overrides: Vec<String> = [
        "evolution.t_end=120.0",
        "evolution.snapshot_times=[0.0, 6.0, 120.0]",
        "output.wigner_format=both",
        "output.wigner_stride_x=3",
        "output.wigner_stride_k=5",
    ]
    .iter()
    .map(|s| s.to_string())
    .collect();
    overrides.extend(extra.iter().map(|s| s.to_string()));
    load_config(&scenario("gs_double_barrier"), &overrides).unwrap()
}

#[test]
fn emitted_files_roundtrip_and_verify() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_scenario(&short_gs(&[]), "gs_short", Some(dir.path())).unwrap();
    assert_eq!(out.snapshots.len(), 3);
    assert!(verify_manifest(dir.path()).unwrap().is_empty());

    let manifest: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("manifest.json")).unwrap())
            .unwrap();
    let convention = manifest["wigner"]["convention"].as_str().unwrap();
    for s in &out.snapshots {
        let q = read_density(&dir.path().join(s.files.density.as_ref().unwrap())).unwrap();
        assert_eq!(q.len(), 3000);
        assert!(s.negativity.is_clean());
        for name in [
            s.files.wigner_text.as_ref().unwrap(),
            s.files.wigner_binary.as_ref().unwrap(),
        ] {
            let w = WignerFile::read(&dir.path().join(name)).unwrap();
            assert_eq!(w.layout.convention, convention);
            for (x, v) in w.position_marginal() {
                let j = ((x - q[0].0) / (q[1].0 - q[0].0)).round() as usize;
                assert!((q[j].0 - x).abs() < 1e-9);
                assert!(
                    (q[j].1 - v).abs() < 1e-8,
                    "{name} at x = {x}: {} vs {v}",
                    q[j].1
                );
            }
        }
    }
}

#[test]
fn tampering_is_detected() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_scenario(
        &short_gs(&["output.wigner_format=none"]),
        "gs_short",
        Some(dir.path()),
    )
    .unwrap();
    let victim = dir
        .path()
        .join(out.snapshots[1].files.density.as_ref().unwrap());
    let mut bytes = std::fs::read(&victim).unwrap();
    bytes.push(b'\n');
    std::fs::write(&victim, bytes).unwrap();
    std::fs::write(dir.path().join("stray.txt"), "x").unwrap();
    let problems = verify_manifest(dir.path()).unwrap();
    assert_eq!(problems.len(), 3, "{problems:?}");
}

#[test]
fn rerun_replaces_own_files_but_refuses_foreign_ones() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = short_gs(&["output.wigner_format=none"]);
    run_scenario(&cfg, "gs_short", Some(dir.path())).unwrap();
    run_scenario(&cfg, "gs_short", Some(dir.path())).unwrap();
    assert!(verify_manifest(dir.path()).unwrap().is_empty());
    std::fs::write(dir.path().join("notes.md"), "mine").unwrap();
    let err = run_scenario(&cfg, "gs_short", Some(dir.path())).unwrap_err();
    assert!(matches!(err, RunError::Io(_)), "{err}");
    assert_eq!(err.exit_code(), 5);
}

#[test]
fn collision_time_is_recorded_as_post_collision_snapshot() {
    let out = run_scenario(&short_gs(&["output.wigner_format=none"]), "gs_short", None).unwrap();
    assert_eq!(out.snapshot_at(0.0).unwrap().ensemble.len(), 1);
    let at_ts = out.snapshot_at(6.0).unwrap();
    assert_eq!(at_ts.ensemble.weights(), vec![0.5, 0.5]);
    assert!(at_ts.ensemble.all_weights_nonnegative());
}

#[test]
fn reference_scenarios_stay_clear_of_the_walls_through_t2() {
    let snaps = "evolution.snapshot_times=[0.0, 45.0, 90.0, 135.0, 180.0, 225.0, 270.0, 315.0]";
    let common = ["evolution.t_end=315.0", snaps, "output.wigner_format=none"];
    let he_extra = ["collision.calibration_time=315.0"];
    for (name, extra) in [
        ("he_double_barrier", &he_extra[..]),
        ("gs_double_barrier", &[][..]),
    ] {
        let overrides: Vec<String> = common.iter().chain(extra).map(|s| s.to_string()).collect();
        let cfg = load_config(&scenario(name), &overrides).unwrap();
        let out = run_scenario(&cfg, name, None).unwrap();
        for s in &out.snapshots {
            assert!(
                s.boundary_leak < 1e-6,
                "{name} at {} fs: {}",
                s.time,
                s.boundary_leak
            );
        }
        assert!(out.warnings.is_empty(), "{:?}", out.warnings);
    }
}
