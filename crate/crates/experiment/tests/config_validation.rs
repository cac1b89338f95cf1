// Copyright 2026 The qtransport Authors
// SPDX-License-Identifier: Apache-2.0

use std::path::Path;

use qtransport_experiment::config::{
    load_config, validate_config, CollisionConfig, LoadError, PotentialConfig, WeightConfig,
};
use toml::Table;

fn scenario(name: &str) -> std::path::PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("scenarios")
        .join(format!("{name}.toml"))
}

#[test]
fn empty_document_names_every_required_block() {
    let errs = validate_config("").unwrap_err();
    let text = errs.to_string();
    for block in [
        "effective_mass",
        "grid",
        "packets",
        "potential",
        "evolution",
    ] {
        assert!(text.contains(block), "missing `{block}` in:\n{text}");
    }
}

#[test]
fn collision_after_end_is_a_single_error() {
    let raw = std::fs::read_to_string(scenario("he_double_barrier")).unwrap();
    let raw = raw.replace("t_s = 6.0", "t_s = 900.0");
    let errs = validate_config(&raw).unwrap_err();
    assert_eq!(errs.0.len(), 1, "{errs}");
    assert!(errs.0[0].contains("t_s"), "{errs}");
}

#[test]
fn unknown_keys_are_rejected() {
    let raw = std::fs::read_to_string(scenario("free_spreading")).unwrap();
    let raw = raw.replace("[potential]", "[potential]\nheigth = 0.2");
    let errs = validate_config(&raw).unwrap_err();
    assert!(errs.to_string().contains("heigth"), "{errs}");
}

#[test]
fn bundled_scenario_parses_to_the_reference_parameters() {
    let cfg = load_config(&scenario("he_double_barrier"), &[]).unwrap();
    assert_eq!(cfg.effective_mass, 0.2);
    assert_eq!(
        (cfg.grid.x_min, cfg.grid.x_max, cfg.grid.n_points),
        (0.0, 600.0, 3000)
    );
    let x0: Vec<f64> = cfg.packets.gaussian.iter().map(|p| p.x0).collect();
    assert_eq!(x0, vec![250.0, 280.0, 310.0]);
    assert!(cfg
        .packets
        .gaussian
        .iter()
        .all(|p| p.k0 == 0.69 && p.a0 == 15.0));
    assert_eq!(
        cfg.potential,
        PotentialConfig::DoubleBarrier {
            center: 350.0,
            barrier_width: 0.8,
            height: 0.2,
            well_width: 4.0
        }
    );
    assert_eq!((cfg.evolution.dt, cfg.evolution.t_end), (3.0, 660.0));
    assert_eq!(cfg.evolution.snapshot_times, vec![0.0, 6.0, 315.0, 660.0]);
    let CollisionConfig::He { recipe, weight } = cfg.collision else {
        panic!("expected an H.E. collision")
    };
    assert_eq!(
        (recipe.t_s, recipe.k_f, recipe.x0_ref),
        (6.0, -0.69, Some(250.0))
    );
    assert_eq!(
        weight,
        WeightConfig::Calibrate {
            target_negative_norm: -0.025,
            calibration_time: 660.0
        }
    );
}

#[test]
fn paired_scenarios_differ_only_in_collision() {
    let read = |name: &str| -> Table {
        std::fs::read_to_string(scenario(name))
            .unwrap()
            .parse()
            .unwrap()
    };
    let (mut he, mut gs) = (read("he_double_barrier"), read("gs_double_barrier"));
    assert_ne!(he.remove("collision"), gs.remove("collision"));
    assert_eq!(he, gs);
}

#[test]
fn overrides_are_validated_like_the_file() {
    let ok = load_config(&scenario("free_spreading"), &["evolution.dt=1.5".into()]).unwrap();
    assert_eq!(ok.evolution.dt, 1.5);
    let Err(LoadError::Config(errs)) =
        load_config(&scenario("free_spreading"), &["grid.n_points=-4".into()])
    else {
        panic!("negative node count accepted");
    };
    assert!(errs.to_string().contains("n_points"), "{errs}");
}

#[test]
fn missing_file_is_an_io_error() {
    assert!(matches!(
        load_config(Path::new("/nonexistent/scenario.toml"), &[]),
        Err(LoadError::Io(_))
    ));
}

#[test]
fn negative_explicit_weight_is_rejected() {
    let raw = std::fs::read_to_string(scenario("he_double_barrier")).unwrap();
    let raw = raw.replace(
        "weight_mode = \"calibrate\"\ntarget_negative_norm = -0.025",
        "weight_mode = \"explicit\"\nweight = -0.5",
    );
    let errs = validate_config(&raw).unwrap_err();
    assert_eq!(errs.0.len(), 1, "{errs}");
    assert!(errs.0[0].contains("collision.weight"), "{errs}");
}
