// Copyright 2026 The qtransport Authors
// SPDX-License-Identifier: Apache-2.0

//! evolve → collide → evolve pipeline for one scenario.

use std::fs;
use std::path::Path;

use ndarray::Array1;
use qtransport_core::collision::{
    apply_gs_collision, apply_he_collision, build_collision_packets, calibrate_weight,
    max_safe_weight, Calibration, GsCollisionSpec, HeCollisionSpec, WeightMode,
};
use qtransport_core::diagnostics::{
    boundary_leak, norm_decomposition, scan_negativity, transmission_reflection, NegativityReport,
    NormDecomposition, LEAK_THRESHOLD,
};
use qtransport_core::evolution::{evolve_ensemble, NormDrift, Propagator, Stencil};
use qtransport_core::grid::{make_grid, wigner_momentum_grid, SpatialGrid};
use qtransport_core::potential::{double_barrier, free_potential};
use qtransport_core::state::{charge_density, gaussian_packet, packet_fits, superpose};
use qtransport_core::units::UnitSystem;
use qtransport_core::wigner::{marginal_position, wigner_from_ensemble, CONVENTION};
use qtransport_core::{ChargeDensity, Complex64, Error as CoreError, Potential, SignedEnsemble};
use serde::Serialize;
use serde_json::json;

use crate::config::{
    CollisionConfig, PacketRecipe, PotentialConfig, ScenarioConfig, StencilConfig, WeightConfig,
    WignerFormat,
};
use crate::manifest::{file_entry, MANIFEST_FORMAT, MANIFEST_NAME};
use crate::output::{density_text, emit, negativity_json, OutputError, WignerFile};

/// Failure categories; each maps to its own exit code.
#[derive(Debug)]
pub enum RunError {
    Config(String),
    Runtime(String),
    Io(OutputError),
}

impl RunError {
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Config(_) => 3,
            RunError::Runtime(_) => 4,
            RunError::Io(_) => 5,
        }
    }
}

impl std::fmt::Display for RunError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            RunError::Config(m) => write!(f, "configuration error: {m}"),
            RunError::Runtime(m) => write!(f, "runtime error: {m}"),
            RunError::Io(e) => write!(f, "I/O error: {e}"),
        }
    }
}

impl std::error::Error for RunError {}

impl From<CoreError> for RunError {
    fn from(e: CoreError) -> Self {
        match e {
            CoreError::Config(m) => RunError::Config(m),
            other => RunError::Runtime(other.to_string()),
        }
    }
}

impl From<OutputError> for RunError {
    fn from(e: OutputError) -> Self {
        RunError::Io(e)
    }
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct SnapshotFiles {
    pub density: Option<String>,
    pub wigner_text: Option<String>,
    pub wigner_binary: Option<String>,
    pub negativity: Option<String>,
}

/// Everything measured at one snapshot.
#[derive(Debug, Clone)]
pub struct SnapshotResult {
    pub requested: f64,
    pub time: f64,
    pub ensemble: SignedEnsemble,
    pub density: ChargeDensity,
    pub decomposition: NormDecomposition,
    pub negativity: NegativityReport,
    pub reflection: f64,
    pub transmission: f64,
    pub boundary_leak: f64,
    /// max |marginal_position(F) − Q| when a Wigner field was computed.
    pub marginal_error: Option<f64>,
    pub wigner_residue: Option<f64>,
    pub files: SnapshotFiles,
}

#[derive(Debug, Clone, Serialize)]
pub struct CalibrationRecord {
    pub time_fs: f64,
    pub target: f64,
    pub achieved: f64,
    pub reachable: bool,
    pub range: [f64; 2],
    pub iterations: usize,
    pub w_max: f64,
}

impl CalibrationRecord {
    fn new(c: &Calibration, time_fs: f64, w_max: f64) -> Self {
        Self {
            time_fs,
            target: c.target,
            achieved: c.achieved,
            reachable: c.reachable,
            range: [c.range.0, c.range.1],
            iterations: c.iterations,
            w_max,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum CollisionRecord {
    None,
    He {
        t_s: f64,
        k0: f64,
        k_f: f64,
        a0: f64,
        x0_ref: f64,
        x0s: f64,
        a0s: f64,
        weight: f64,
        max_safe_weight: f64,
        subtraction_bound: f64,
        calibration: Option<CalibrationRecord>,
        post_min_q: [f64; 2],
    },
    Gs {
        t_s: f64,
        k0: f64,
        k_f: f64,
        a0: f64,
        x0_ref: f64,
        x0s: f64,
        a0s: f64,
        electron_count: u32,
        occupation: u32,
        weights_after: Vec<f64>,
    },
}

/// In-memory result of a run; the same data backs the manifest.
#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub name: String,
    pub snapshots: Vec<SnapshotResult>,
    pub final_time: f64,
    pub final_ensemble: SignedEnsemble,
    pub final_decomposition: NormDecomposition,
    pub final_boundary_leak: f64,
    pub collision: CollisionRecord,
    pub norm_drift: NormDrift,
    pub warnings: Vec<String>,
    pub manifest: serde_json::Value,
}

impl RunOutcome {
    pub fn snapshot_at(&self, t: f64) -> Option<&SnapshotResult> {
        self.snapshots
            .iter()
            .find(|s| (s.time - t).abs() < 1e-9 * t.abs().max(1.0))
    }
}

fn build_potential(cfg: &ScenarioConfig, grid: &SpatialGrid) -> Result<Potential, RunError> {
    Ok(match cfg.potential {
        PotentialConfig::Free => free_potential(grid),
        PotentialConfig::DoubleBarrier {
            center,
            barrier_width,
            height,
            well_width,
        } => double_barrier(grid, center, barrier_width, height, well_width)?,
    })
}

fn he_spec(recipe: &PacketRecipe, mass: f64, weight_mode: WeightMode) -> HeCollisionSpec {
    HeCollisionSpec {
        t_s: recipe.t_s,
        k0: recipe.k0,
        k_f: recipe.k_f,
        a0: recipe.a0,
        x0_ref: recipe.x0_ref,
        relative_mass: mass,
        weight_mode,
    }
}

/// Snapshot label used in file names.
pub fn snapshot_stem(index: usize, time: f64) -> String {
    format!("snap{index:02}_t{time}fs")
}

fn is_own_file(name: &str) -> bool {
    name == MANIFEST_NAME || name == "decomposition.tsv" || name.starts_with("snap")
}

fn prepare_dir(dir: &Path) -> Result<(), OutputError> {
    let err = |e: std::io::Error| OutputError {
        path: dir.display().to_string(),
        message: e.to_string(),
    };
    fs::create_dir_all(dir).map_err(err)?;
    for entry in fs::read_dir(dir).map_err(err)? {
        let entry = entry.map_err(err)?;
        let name = entry.file_name().to_string_lossy().into_owned();
        let path = entry.path();
        if entry.file_type().map_err(err)?.is_file() && is_own_file(&name) {
            fs::remove_file(&path).map_err(|e| OutputError {
                path: path.display().to_string(),
                message: e.to_string(),
            })?;
        } else {
            return Err(OutputError {
                path: path.display().to_string(),
                message:
                    "output directory holds a file this tool did not write; refusing to mix runs"
                        .into(),
            });
        }
    }
    Ok(())
}

/// Runs `cfg`. With `out_dir` set, every snapshot file and the manifest are
/// written there; otherwise only the in-memory outcome is produced.
pub fn run_scenario(
    cfg: &ScenarioConfig,
    name: &str,
    out_dir: Option<&Path>,
) -> Result<RunOutcome, RunError> {
    let units = UnitSystem::default();
    let mass = cfg.effective_mass;
    let grid = make_grid(cfg.grid.x_min, cfg.grid.x_max, cfg.grid.n_points)?;
    let mut warnings = Vec::new();

    let mut parts = Vec::with_capacity(cfg.packets.gaussian.len());
    for p in &cfg.packets.gaussian {
        if !packet_fits(&grid, p.x0, p.a0) {
            warnings.push(format!(
                "packet at {} nm with a0 = {} nm comes within 3·a0 of a wall",
                p.x0, p.a0
            ));
        }
        parts.push(gaussian_packet(&grid, p.x0, p.k0, p.a0)?);
    }
    let coeffs: Vec<Complex64> = cfg
        .packets
        .coefficients
        .iter()
        .map(|&c| Complex64::new(c, 0.0))
        .collect();
    let psi_b = superpose(&parts, &coeffs)?;
    let electron_count = match cfg.collision {
        CollisionConfig::Gs { electron_count, .. } => electron_count,
        _ => 1,
    };
    let e0 = SignedEnsemble::pure(psi_b).with_electron_count(electron_count)?;

    let potential = build_potential(cfg, &grid)?;
    let stencil = match cfg.evolution.stencil {
        StencilConfig::ThreePoint => Stencil::ThreePoint,
        StencilConfig::FivePoint => Stencil::FivePoint,
    };
    let ev = &cfg.evolution;
    let prop = Propagator::new(&potential, ev.dt, mass, stencil, ev.substeps, units)?;

    if let Some(dir) = out_dir {
        prepare_dir(dir)?;
    }

    // Evolution, with the collision spliced in at t_S.
    let mut drift = NormDrift::default();
    let mut snaps: Vec<(f64, f64, SignedEnsemble)> = Vec::new();
    let (collision, final_time, final_ensemble) = match &cfg.collision {
        CollisionConfig::None => {
            let traj = evolve_ensemble(&prop, &e0, 0.0, ev.t_end, &ev.snapshot_times)?;
            drift = drift.merge(traj.norm_drift);
            snaps.extend(
                traj.requested_times
                    .iter()
                    .zip(&traj.times)
                    .zip(traj.snapshots)
                    .map(|((&r, &t), e)| (r, t, e)),
            );
            (CollisionRecord::None, traj.final_time, traj.final_ensemble)
        }
        CollisionConfig::He { recipe, .. } | CollisionConfig::Gs { recipe, .. } => {
            let step_s = prop.steps_for(recipe.t_s);
            let (pre, post): (Vec<f64>, Vec<f64>) = ev
                .snapshot_times
                .iter()
                .partition(|&&t| prop.steps_for(t) < step_s);
            let first = evolve_ensemble(&prop, &e0, 0.0, recipe.t_s, &pre)?;
            drift = drift.merge(first.norm_drift);
            snaps.extend(
                first
                    .requested_times
                    .iter()
                    .zip(&first.times)
                    .zip(first.snapshots)
                    .map(|((&r, &t), e)| (r, t, e)),
            );
            let e_pre = first.final_ensemble;
            let (record, e_post) = collide(
                cfg,
                recipe,
                &prop,
                &e_pre,
                &units,
                &mut drift,
                &mut warnings,
            )?;
            let second = evolve_ensemble(&prop, &e_post, first.final_time, ev.t_end, &post)?;
            drift = drift.merge(second.norm_drift);
            snaps.extend(
                second
                    .requested_times
                    .iter()
                    .zip(&second.times)
                    .zip(second.snapshots)
                    .map(|((&r, &t), e)| (r, t, e)),
            );
            (record, second.final_time, second.final_ensemble)
        }
    };

    let out = &cfg.output;
    let kg = wigner_momentum_grid(&grid);
    let mut written: Vec<String> = Vec::new();
    let mut snapshots = Vec::with_capacity(snaps.len());
    for (index, (requested, time, ensemble)) in snaps.into_iter().enumerate() {
        let density = charge_density(&ensemble);
        let decomposition = norm_decomposition(&density);
        let negativity = scan_negativity(&density, out.negativity_tolerance, time)?;
        let (reflection, transmission) = transmission_reflection(&density, out.divider)?;
        let leak = boundary_leak(&density, out.leak_margin)?;
        let stem = snapshot_stem(index, time);
        let mut files = SnapshotFiles::default();
        let (mut marginal_error, mut wigner_residue) = (None, None);
        if out.wigner_format != WignerFormat::None {
            let field = wigner_from_ensemble(&ensemble, &kg)?;
            let q_f = marginal_position(&field);
            marginal_error = Some(
                q_f.values()
                    .iter()
                    .zip(density.values())
                    .map(|(a, b)| (a - b).abs())
                    .fold(0.0, f64::max),
            );
            wigner_residue = Some(field.imaginary_residue());
            if let Some(dir) = out_dir {
                let file =
                    WignerFile::from_field(&field, time, out.wigner_stride_x, out.wigner_stride_k);
                if matches!(out.wigner_format, WignerFormat::Text | WignerFormat::Both) {
                    let name = emit(
                        dir,
                        &format!("{stem}_wigner.txt"),
                        file.to_text().as_bytes(),
                    )?;
                    files.wigner_text = Some(name.clone());
                    written.push(name);
                }
                if matches!(out.wigner_format, WignerFormat::Binary | WignerFormat::Both) {
                    let name = emit(dir, &format!("{stem}_wigner.bin"), &file.to_binary())?;
                    files.wigner_binary = Some(name.clone());
                    written.push(name);
                }
            }
        }
        if let Some(dir) = out_dir {
            let name = emit(
                dir,
                &format!("{stem}_Q.tsv"),
                density_text(&density).as_bytes(),
            )?;
            files.density = Some(name.clone());
            written.push(name);
            let name = emit(
                dir,
                &format!("{stem}_negativity.json"),
                negativity_json(&negativity).as_bytes(),
            )?;
            files.negativity = Some(name.clone());
            written.push(name);
        }
        if leak > LEAK_THRESHOLD {
            warnings.push(format!(
                "t = {time} fs: {leak:.3e} of the charge lies within {} nm of a wall",
                out.leak_margin
            ));
        }
        snapshots.push(SnapshotResult {
            requested,
            time,
            ensemble,
            density,
            decomposition,
            negativity,
            reflection,
            transmission,
            boundary_leak: leak,
            marginal_error,
            wigner_residue,
            files,
        });
    }

    let final_density = charge_density(&final_ensemble);
    let final_decomposition = norm_decomposition(&final_density);
    let final_boundary_leak = boundary_leak(&final_density, out.leak_margin)?;
    let (final_r, final_t) = transmission_reflection(&final_density, out.divider)?;

    let mut table = String::from("# time_fs\tpositive\tnegative\ttotal\n");
    for s in &snapshots {
        let d = s.decomposition;
        table.push_str(&format!(
            "{:e}\t{:e}\t{:e}\t{:e}\n",
            s.time, d.positive, d.negative, d.total
        ));
    }
    if snapshots.last().is_none_or(|s| s.time != final_time) {
        let d = final_decomposition;
        table.push_str(&format!(
            "{final_time:e}\t{:e}\t{:e}\t{:e}\n",
            d.positive, d.negative, d.total
        ));
    }
    if let Some(dir) = out_dir {
        written.push(emit(dir, "decomposition.tsv", table.as_bytes())?);
    }

    let mut manifest = json!({
        "format": MANIFEST_FORMAT,
        "scenario": name,
        "config": cfg,
        "units": {
            "length": "nm",
            "time": "fs",
            "energy": "eV",
            "hbar_ev_fs": units.hbar,
            "electron_mass_ev_fs2_per_nm2": units.electron_rest_mass,
        },
        "solver": {
            "scheme": "crank-nicolson",
            "stencil": stencil.name(),
            "substeps": ev.substeps,
            "dt_fs": ev.dt,
            "steps": prop.steps_for(final_time),
            "boundary": "hard walls",
        },
        "wigner": {
            "convention": CONVENTION,
            "k_min": kg.k_min(),
            "dk": kg.dk(),
            "n_k": kg.n_points(),
            "format": out.wigner_format,
            "stride_x": out.wigner_stride_x,
            "bin_k": out.wigner_stride_k,
        },
        "collision": &collision,
        "norm_drift": { "max_step": drift.max_step, "cumulative": drift.cumulative },
        "snapshots": snapshots.iter().map(|s| json!({
            "requested_fs": s.requested,
            "time_fs": s.time,
            "files": s.files,
            "weights": s.ensemble.weights(),
            "decomposition": decomposition_json(&s.decomposition),
            "min_q": [s.negativity.global_min.0, s.negativity.global_min.1],
            "violations": s.negativity.violations.len(),
            "reflection": s.reflection,
            "transmission": s.transmission,
            "boundary_leak": s.boundary_leak,
            "marginal_max_error": s.marginal_error,
            "wigner_imaginary_residue": s.wigner_residue,
        })).collect::<Vec<_>>(),
        "final": {
            "time_fs": final_time,
            "decomposition": decomposition_json(&final_decomposition),
            "reflection": final_r,
            "transmission": final_t,
            "boundary_leak": final_boundary_leak,
        },
        "warnings": &warnings,
    });

    if let Some(dir) = out_dir {
        written.sort();
        let entries = written
            .iter()
            .map(|n| file_entry(dir, n))
            .collect::<Result<Vec<_>, _>>()?;
        manifest["files"] = serde_json::to_value(entries).expect("plain data");
        let mut text = serde_json::to_string_pretty(&manifest).expect("plain data");
        text.push('\n');
        emit(dir, MANIFEST_NAME, text.as_bytes())?;
    }

    Ok(RunOutcome {
        name: name.to_string(),
        snapshots,
        final_time,
        final_ensemble,
        final_decomposition,
        final_boundary_leak,
        collision,
        norm_drift: drift,
        warnings,
        manifest,
    })
}

fn decomposition_json(d: &NormDecomposition) -> serde_json::Value {
    json!({ "positive": d.positive, "negative": d.negative, "total": d.total })
}

fn collide(
    cfg: &ScenarioConfig,
    recipe: &PacketRecipe,
    prop: &Propagator,
    e_pre: &SignedEnsemble,
    units: &UnitSystem,
    drift: &mut NormDrift,
    warnings: &mut Vec<String>,
) -> Result<(CollisionRecord, SignedEnsemble), RunError> {
    let mass = cfg.effective_mass;
    match &cfg.collision {
        CollisionConfig::None => unreachable!("caller handles the collision-free case"),
        CollisionConfig::He { weight, .. } => {
            let (mode, calibration) = match *weight {
                WeightConfig::AutoMaxSafe { beta } => (WeightMode::AutoMaxSafe { beta }, None),
                WeightConfig::Explicit { weight } => (WeightMode::Explicit(weight), None),
                WeightConfig::Calibrate {
                    target_negative_norm,
                    calibration_time,
                } => {
                    let (w, record) = calibrate(
                        recipe,
                        mass,
                        prop,
                        e_pre,
                        units,
                        target_negative_norm,
                        calibration_time,
                        drift,
                    )?;
                    if !record.reachable {
                        warnings.push(format!(
                            "calibration target {} is outside the reachable negative-norm range [{}, {}]; using w = {w}",
                            record.target, record.range[1], record.range[0]
                        ));
                    }
                    (WeightMode::Explicit(w), Some(record))
                }
            };
            let he = apply_he_collision(e_pre, &he_spec(recipe, mass, mode), units)?;
            let (x, q) = charge_density(&he.ensemble).min();
            Ok((
                CollisionRecord::He {
                    t_s: recipe.t_s,
                    k0: recipe.k0,
                    k_f: recipe.k_f,
                    a0: recipe.a0,
                    x0_ref: he.packets.x0_ref,
                    x0s: he.packets.x0s,
                    a0s: he.packets.a0s,
                    weight: he.weight,
                    max_safe_weight: he.max_safe_weight,
                    subtraction_bound: he.subtraction_bound,
                    calibration,
                    post_min_q: [x, q],
                },
                he.ensemble,
            ))
        }
        CollisionConfig::Gs {
            electron_count,
            occupation,
            source_index,
            ..
        } => {
            // ψ_F is built exactly like the H.E. added packet.
            let packets = build_collision_packets(
                e_pre,
                &he_spec(recipe, mass, WeightMode::Explicit(1.0)),
                units,
            )?;
            let spec = GsCollisionSpec {
                source_index: *source_index,
                occupation: *occupation,
                final_state: packets.psi_p.clone(),
            };
            let e_post = apply_gs_collision(e_pre, &spec)?;
            Ok((
                CollisionRecord::Gs {
                    t_s: recipe.t_s,
                    k0: recipe.k0,
                    k_f: recipe.k_f,
                    a0: recipe.a0,
                    x0_ref: packets.x0_ref,
                    x0s: packets.x0s,
                    a0s: packets.a0s,
                    electron_count: *electron_count,
                    occupation: *occupation,
                    weights_after: e_post.weights(),
                },
                e_post,
            ))
        }
    }
}

/// Evolves the unscattered ensemble and both packets to `at`, then bisects
/// w against the negative norm there.
#[allow(clippy::too_many_arguments)]
fn calibrate(
    recipe: &PacketRecipe,
    mass: f64,
    prop: &Propagator,
    e_pre: &SignedEnsemble,
    units: &UnitSystem,
    target: f64,
    at: f64,
    drift: &mut NormDrift,
) -> Result<(f64, CalibrationRecord), RunError> {
    let packets = build_collision_packets(
        e_pre,
        &he_spec(recipe, mass, WeightMode::Explicit(1.0)),
        units,
    )?;
    let w_max = max_safe_weight(e_pre, &packets.psi_p, &packets.psi_n, 1.0)?;
    let k = e_pre.len();
    let mut terms = e_pre.terms().to_vec();
    terms.push(qtransport_core::EnsembleTerm {
        weight: 1.0,
        state: packets.psi_p,
    });
    terms.push(qtransport_core::EnsembleTerm {
        weight: 1.0,
        state: packets.psi_n,
    });
    let probe = SignedEnsemble::new(terms, e_pre.electron_count())?;
    let traj = evolve_ensemble(prop, &probe, recipe.t_s, at, &[])?;
    *drift = drift.merge(traj.norm_drift);
    let fin = traj.final_ensemble.terms();
    let q_b = charge_density(&SignedEnsemble::new(
        fin[..k].to_vec(),
        e_pre.electron_count(),
    )?);
    let q_p: Array1<f64> = fin[k].state.density();
    let q_n: Array1<f64> = fin[k + 1].state.density();
    let dx = prop.grid().dx();
    let c = calibrate_weight(
        q_b.values().as_slice().expect("contiguous"),
        q_p.as_slice().expect("contiguous"),
        q_n.as_slice().expect("contiguous"),
        dx,
        target,
        w_max,
    )?;
    Ok((c.weight, CalibrationRecord::new(&c, traj.final_time, w_max)))
}
