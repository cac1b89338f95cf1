// Copyright 2026 The qtransport Authors
// SPDX-License-Identifier: Apache-2.0

//! Scenario configuration: TOML schema, overrides and validation.
//!
//! Times are fs, lengths nm, wave vectors nm⁻¹, energies eV. Validation
//! walks the whole document and reports every problem it finds; unknown
//! keys are errors.
//!
//! ```toml
//! effective_mass = 0.2
//!
//! [grid]
//! x_min = 0.0
//! x_max = 600.0
//! n_points = 3000
//!
//! [packets]
//! coefficients = [1.0, 1.0, 1.0]   # optional, defaults to all ones
//! [[packets.gaussian]]
//! x0 = 250.0
//! k0 = 0.69
//! a0 = 15.0
//!
//! [potential]
//! kind = "double_barrier"          # or "free"
//! center = 350.0
//! barrier_width = 0.8
//! height = 0.2
//! well_width = 4.0
//!
//! [evolution]
//! dt = 3.0
//! t_end = 660.0
//! snapshot_times = [0.0, 6.0, 315.0, 660.0]
//! substeps = 16                    # optional
//! stencil = "five_point"           # optional, or "three_point"
//!
//! [collision]
//! mode = "he"                      # "none", "he" or "gs"
//! t_s = 6.0
//! k_f = -0.69
//! weight_mode = "calibrate"        # "auto_max_safe", "explicit" or "calibrate"
//! target_negative_norm = -0.025
//!
//! [output]
//! wigner_format = "text"           # "text", "binary", "both" or "none"
//! ```

use std::path::Path;

use serde::Serialize;
use toml::{Table, Value};

/// Every problem found in a configuration document.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfigErrors(pub Vec<String>);

impl std::fmt::Display for ConfigErrors {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        for (i, e) in self.0.iter().enumerate() {
            if i > 0 {
                writeln!(f)?;
            }
            write!(f, "{e}")?;
        }
        Ok(())
    }
}

impl std::error::Error for ConfigErrors {}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GridConfig {
    pub x_min: f64,
    pub x_max: f64,
    pub n_points: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PacketConfig {
    pub x0: f64,
    pub k0: f64,
    pub a0: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PacketsConfig {
    pub gaussian: Vec<PacketConfig>,
    pub coefficients: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PotentialConfig {
    Free,
    DoubleBarrier {
        center: f64,
        barrier_width: f64,
        height: f64,
        well_width: f64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum StencilConfig {
    ThreePoint,
    FivePoint,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvolutionConfig {
    pub dt: f64,
    pub t_end: f64,
    pub snapshot_times: Vec<f64>,
    pub substeps: usize,
    pub stencil: StencilConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "weight_mode", rename_all = "snake_case")]
pub enum WeightConfig {
    AutoMaxSafe {
        beta: f64,
    },
    Explicit {
        weight: f64,
    },
    /// Bisect w so that the negative norm at `calibration_time` equals
    /// `target_negative_norm`.
    Calibrate {
        target_negative_norm: f64,
        calibration_time: f64,
    },
}

/// Geometry of the wide collision packets.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PacketRecipe {
    pub t_s: f64,
    pub k0: f64,
    pub k_f: f64,
    pub a0: f64,
    pub x0_ref: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum CollisionConfig {
    None,
    He {
        #[serde(flatten)]
        recipe: PacketRecipe,
        #[serde(flatten)]
        weight: WeightConfig,
    },
    Gs {
        #[serde(flatten)]
        recipe: PacketRecipe,
        electron_count: u32,
        occupation: u32,
        source_index: usize,
    },
}

impl CollisionConfig {
    pub fn t_s(&self) -> Option<f64> {
        match self {
            CollisionConfig::None => None,
            CollisionConfig::He { recipe, .. } | CollisionConfig::Gs { recipe, .. } => {
                Some(recipe.t_s)
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum WignerFormat {
    Text,
    Binary,
    Both,
    None,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OutputConfig {
    pub directory: Option<String>,
    pub wigner_format: WignerFormat,
    pub wigner_stride_x: usize,
    pub wigner_stride_k: usize,
    pub negativity_tolerance: f64,
    pub leak_margin: f64,
    /// Split point for reflection/transmission; defaults to the barrier
    /// centre, or the box centre without a barrier.
    pub divider: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScenarioConfig {
    pub effective_mass: f64,
    pub grid: GridConfig,
    pub packets: PacketsConfig,
    pub potential: PotentialConfig,
    pub evolution: EvolutionConfig,
    pub collision: CollisionConfig,
    pub output: OutputConfig,
}

const DEFAULT_SUBSTEPS: usize = 16;
const DEFAULT_BETA: f64 = 0.9;
const DEFAULT_STRIDE: usize = 4;
const DEFAULT_NEGATIVITY_TOL: f64 = 1e-10;
const DEFAULT_LEAK_MARGIN: f64 = 5.0;

struct Walker {
    errors: Vec<String>,
}

impl Walker {
    fn err(&mut self, msg: impl Into<String>) {
        self.errors.push(msg.into());
    }

    fn unknown_keys(&mut self, t: &Table, path: &str, allowed: &[&str]) {
        for key in t.keys() {
            if !allowed.contains(&key.as_str()) {
                let full = if path.is_empty() {
                    key.clone()
                } else {
                    format!("{path}.{key}")
                };
                self.err(format!("{full}: unknown key"));
            }
        }
    }

    fn table<'a>(
        &mut self,
        t: &'a Table,
        path: &str,
        key: &str,
        required: bool,
    ) -> Option<&'a Table> {
        match t.get(key) {
            Some(Value::Table(inner)) => Some(inner),
            Some(_) => {
                self.err(format!("{}: expected a table", join(path, key)));
                None
            }
            None => {
                if required {
                    self.err(format!("[{}]: missing required block", join(path, key)));
                }
                None
            }
        }
    }

    fn number(&mut self, t: &Table, path: &str, key: &str, required: bool) -> Option<f64> {
        match t.get(key) {
            Some(Value::Float(v)) => Some(*v),
            Some(Value::Integer(v)) => Some(*v as f64),
            Some(_) => {
                self.err(format!("{}: expected a number", join(path, key)));
                None
            }
            None => {
                if required {
                    self.err(format!("{}: missing required field", join(path, key)));
                }
                None
            }
        }
    }

    fn integer(
        &mut self,
        t: &Table,
        path: &str,
        key: &str,
        required: bool,
        min: i64,
    ) -> Option<i64> {
        match t.get(key) {
            Some(Value::Integer(v)) if *v >= min => Some(*v),
            Some(Value::Integer(v)) => {
                self.err(format!(
                    "{}: must be at least {min}, got {v}",
                    join(path, key)
                ));
                None
            }
            Some(_) => {
                self.err(format!("{}: expected an integer", join(path, key)));
                None
            }
            None => {
                if required {
                    self.err(format!("{}: missing required field", join(path, key)));
                }
                None
            }
        }
    }

    fn string<'a>(
        &mut self,
        t: &'a Table,
        path: &str,
        key: &str,
        required: bool,
    ) -> Option<&'a str> {
        match t.get(key) {
            Some(Value::String(s)) => Some(s),
            Some(_) => {
                self.err(format!("{}: expected a string", join(path, key)));
                None
            }
            None => {
                if required {
                    self.err(format!("{}: missing required field", join(path, key)));
                }
                None
            }
        }
    }

    fn numbers(&mut self, t: &Table, path: &str, key: &str) -> Option<Vec<f64>> {
        match t.get(key) {
            Some(Value::Array(items)) => {
                let mut out = Vec::with_capacity(items.len());
                for (i, v) in items.iter().enumerate() {
                    match v {
                        Value::Float(x) => out.push(*x),
                        Value::Integer(x) => out.push(*x as f64),
                        _ => {
                            self.err(format!("{}[{i}]: expected a number", join(path, key)));
                            return None;
                        }
                    }
                }
                Some(out)
            }
            Some(_) => {
                self.err(format!("{}: expected an array of numbers", join(path, key)));
                None
            }
            None => None,
        }
    }

    fn check(&mut self, ok: bool, msg: impl FnOnce() -> String) {
        if !ok {
            self.errors.push(msg());
        }
    }
}

fn join(path: &str, key: &str) -> String {
    if path.is_empty() {
        key.to_string()
    } else {
        format!("{path}.{key}")
    }
}

/// Parses and validates a configuration document.
pub fn validate_config(raw: &str) -> Result<ScenarioConfig, ConfigErrors> {
    let doc: Table = raw
        .parse()
        .map_err(|e: toml::de::Error| ConfigErrors(vec![format!("parse error: {e}")]))?;
    validate_table(&doc)
}

/// Validates an already parsed document.
pub fn validate_table(doc: &Table) -> Result<ScenarioConfig, ConfigErrors> {
    let mut w = Walker { errors: Vec::new() };
    w.unknown_keys(
        doc,
        "",
        &[
            "effective_mass",
            "grid",
            "packets",
            "potential",
            "evolution",
            "collision",
            "output",
        ],
    );

    let mass = w.number(doc, "", "effective_mass", true);
    if let Some(m) = mass {
        w.check(m > 0.0 && m.is_finite(), || {
            format!("effective_mass: must be positive, got {m}")
        });
    }

    let grid = w.table(doc, "", "grid", true).and_then(|t| {
        w.unknown_keys(t, "grid", &["x_min", "x_max", "n_points"]);
        let x_min = w.number(t, "grid", "x_min", true);
        let x_max = w.number(t, "grid", "x_max", true);
        let n = w.integer(t, "grid", "n_points", true, 2);
        let (x_min, x_max, n) = (x_min?, x_max?, n?);
        if !(x_max > x_min) {
            w.err(format!("grid: x_max ({x_max}) must exceed x_min ({x_min})"));
            return None;
        }
        Some(GridConfig {
            x_min,
            x_max,
            n_points: n as usize,
        })
    });

    let packets = w.table(doc, "", "packets", true).and_then(|t| {
        w.unknown_keys(t, "packets", &["gaussian", "coefficients"]);
        let list = match t.get("gaussian") {
            Some(Value::Array(items)) if !items.is_empty() => items,
            Some(Value::Array(_)) | None => {
                w.err("[[packets.gaussian]]: at least one packet is required");
                return None;
            }
            Some(_) => {
                w.err("packets.gaussian: expected an array of tables");
                return None;
            }
        };
        let mut gaussian = Vec::new();
        for (i, item) in list.iter().enumerate() {
            let path = format!("packets.gaussian[{i}]");
            let Value::Table(p) = item else {
                w.err(format!("{path}: expected a table"));
                continue;
            };
            w.unknown_keys(p, &path, &["x0", "k0", "a0"]);
            let (x0, k0, a0) = (
                w.number(p, &path, "x0", true),
                w.number(p, &path, "k0", true),
                w.number(p, &path, "a0", true),
            );
            if let Some(a) = a0 {
                w.check(a > 0.0, || format!("{path}.a0: must be positive, got {a}"));
            }
            if let (Some(g), Some(x)) = (grid.as_ref(), x0) {
                w.check(x >= g.x_min && x <= g.x_max, || {
                    format!(
                        "{path}.x0: {x} nm lies outside the box [{}, {}] nm",
                        g.x_min, g.x_max
                    )
                });
            }
            if let (Some(x0), Some(k0), Some(a0)) = (x0, k0, a0) {
                gaussian.push(PacketConfig { x0, k0, a0 });
            }
        }
        let coefficients = w
            .numbers(t, "packets", "coefficients")
            .unwrap_or_else(|| vec![1.0; list.len()]);
        if coefficients.len() != list.len() {
            w.err(format!(
                "packets.coefficients: {} coefficients for {} packets",
                coefficients.len(),
                list.len()
            ));
            return None;
        }
        if coefficients.iter().all(|&c| c == 0.0) {
            w.err("packets.coefficients: at least one coefficient must be non-zero");
            return None;
        }
        (gaussian.len() == list.len()).then_some(PacketsConfig {
            gaussian,
            coefficients,
        })
    });

    let potential = w.table(doc, "", "potential", true).and_then(|t| {
        match w.string(t, "potential", "kind", true)? {
            "free" => {
                w.unknown_keys(t, "potential", &["kind"]);
                Some(PotentialConfig::Free)
            }
            "double_barrier" => {
                w.unknown_keys(
                    t,
                    "potential",
                    &["kind", "center", "barrier_width", "height", "well_width"],
                );
                let center = w.number(t, "potential", "center", true);
                let barrier_width = w.number(t, "potential", "barrier_width", true);
                let height = w.number(t, "potential", "height", true);
                let well_width = w.number(t, "potential", "well_width", true);
                if let Some(b) = barrier_width {
                    w.check(b > 0.0, || {
                        format!("potential.barrier_width: must be positive, got {b}")
                    });
                }
                if let Some(l) = well_width {
                    w.check(l >= 0.0, || {
                        format!("potential.well_width: must be non-negative, got {l}")
                    });
                }
                let (center, barrier_width, height, well_width) =
                    (center?, barrier_width?, height?, well_width?);
                if let Some(g) = grid.as_ref() {
                    let reach = 0.5 * well_width + barrier_width;
                    w.check(
                        center - reach >= g.x_min && center + reach <= g.x_max,
                        || {
                            format!(
                                "potential: barriers [{}, {}] nm do not fit in the box",
                                center - reach,
                                center + reach
                            )
                        },
                    );
                }
                Some(PotentialConfig::DoubleBarrier {
                    center,
                    barrier_width,
                    height,
                    well_width,
                })
            }
            other => {
                w.err(format!(
                    "potential.kind: expected \"free\" or \"double_barrier\", got \"{other}\""
                ));
                None
            }
        }
    });

    let evolution = w.table(doc, "", "evolution", true).and_then(|t| {
        w.unknown_keys(t, "evolution", &["dt", "t_end", "snapshot_times", "substeps", "stencil"]);
        let dt = w.number(t, "evolution", "dt", true);
        let t_end = w.number(t, "evolution", "t_end", true);
        let snapshot_times = w.numbers(t, "evolution", "snapshot_times").unwrap_or_default();
        let substeps = w.integer(t, "evolution", "substeps", false, 1).map_or(DEFAULT_SUBSTEPS, |v| v as usize);
        let stencil = match w.string(t, "evolution", "stencil", false) {
            None | Some("five_point") => StencilConfig::FivePoint,
            Some("three_point") => StencilConfig::ThreePoint,
            Some(other) => {
                w.err(format!("evolution.stencil: expected \"five_point\" or \"three_point\", got \"{other}\""));
                StencilConfig::FivePoint
            }
        };
        if let Some(d) = dt {
            w.check(d > 0.0, || format!("evolution.dt: must be positive, got {d}"));
        }
        if let Some(te) = t_end {
            w.check(te >= 0.0, || format!("evolution.t_end: must be non-negative, got {te}"));
            for (i, &s) in snapshot_times.iter().enumerate() {
                w.check(s >= 0.0 && s <= te, || {
                    format!("evolution.snapshot_times[{i}]: {s} fs lies outside [0, {te}] fs")
                });
            }
        }
        for i in 1..snapshot_times.len() {
            w.check(snapshot_times[i] > snapshot_times[i - 1], || {
                format!("evolution.snapshot_times: must be strictly increasing ({} then {})", snapshot_times[i - 1], snapshot_times[i])
            });
        }
        Some(EvolutionConfig { dt: dt?, t_end: t_end?, snapshot_times, substeps, stencil })
    });

    let collision = match w.table(doc, "", "collision", false) {
        None => Some(CollisionConfig::None),
        Some(t) => collision_block(&mut w, t, packets.as_ref(), evolution.as_ref()),
    };

    let output = output_block(
        &mut w,
        w_table_opt(doc, "output"),
        grid.as_ref(),
        potential.as_ref(),
    );

    if !w.errors.is_empty() {
        return Err(ConfigErrors(w.errors));
    }
    Ok(ScenarioConfig {
        effective_mass: mass.expect("validated"),
        grid: grid.expect("validated"),
        packets: packets.expect("validated"),
        potential: potential.expect("validated"),
        evolution: evolution.expect("validated"),
        collision: collision.expect("validated"),
        output: output.expect("validated"),
    })
}

fn w_table_opt<'a>(doc: &'a Table, key: &str) -> Result<Option<&'a Table>, ()> {
    match doc.get(key) {
        None => Ok(None),
        Some(Value::Table(t)) => Ok(Some(t)),
        Some(_) => Err(()),
    }
}

fn on_step(t: f64, dt: f64) -> bool {
    let n = (t / dt).round();
    (t - n * dt).abs() <= 1e-9 * dt.max(1.0)
}

fn collision_block(
    w: &mut Walker,
    t: &Table,
    packets: Option<&PacketsConfig>,
    evolution: Option<&EvolutionConfig>,
) -> Option<CollisionConfig> {
    const P: &str = "collision";
    const RECIPE: [&str; 6] = ["mode", "t_s", "k0", "k_f", "a0", "x0_ref"];
    let mode = w.string(t, P, "mode", true)?;
    let recipe = |w: &mut Walker| -> Option<PacketRecipe> {
        let t_s = w.number(t, P, "t_s", true);
        let k_f = w.number(t, P, "k_f", true);
        let first = packets.and_then(|p| p.gaussian.first());
        let k0 = w.number(t, P, "k0", false).or(first.map(|p| p.k0));
        let a0 = w.number(t, P, "a0", false).or(first.map(|p| p.a0));
        let x0_ref = w.number(t, P, "x0_ref", false);
        if let Some(a) = a0 {
            w.check(a > 0.0, || {
                format!("collision.a0: must be positive, got {a}")
            });
        }
        if let (Some(ts), Some(ev)) = (t_s, evolution) {
            if !(ts > 0.0) {
                w.err(format!("collision.t_s: must be positive, got {ts}"));
            } else if ts > ev.t_end {
                w.err(format!(
                    "collision.t_s: {ts} fs is after evolution.t_end ({} fs)",
                    ev.t_end
                ));
            } else if !on_step(ts, ev.dt) {
                w.err(format!(
                    "collision.t_s: {ts} fs is not a multiple of evolution.dt ({} fs)",
                    ev.dt
                ));
            }
        }
        Some(PacketRecipe {
            t_s: t_s?,
            k0: k0?,
            k_f: k_f?,
            a0: a0?,
            x0_ref,
        })
    };
    match mode {
        "none" => {
            w.unknown_keys(t, P, &["mode"]);
            Some(CollisionConfig::None)
        }
        "he" => {
            let mut allowed = RECIPE.to_vec();
            allowed.extend([
                "weight_mode",
                "beta",
                "weight",
                "target_negative_norm",
                "calibration_time",
            ]);
            w.unknown_keys(t, P, &allowed);
            let recipe = recipe(w);
            let weight = match w
                .string(t, P, "weight_mode", false)
                .unwrap_or("auto_max_safe")
            {
                "auto_max_safe" => {
                    forbid(
                        w,
                        t,
                        &["weight", "target_negative_norm", "calibration_time"],
                        "auto_max_safe",
                    );
                    let beta = w.number(t, P, "beta", false).unwrap_or(DEFAULT_BETA);
                    w.check(beta > 0.0 && beta <= 1.0, || {
                        format!("collision.beta: must lie in (0, 1], got {beta}")
                    });
                    Some(WeightConfig::AutoMaxSafe { beta })
                }
                "explicit" => {
                    forbid(
                        w,
                        t,
                        &["beta", "target_negative_norm", "calibration_time"],
                        "explicit",
                    );
                    let weight = w.number(t, P, "weight", true)?;
                    w.check(weight > 0.0, || {
                        format!("collision.weight: must be positive, got {weight}")
                    });
                    Some(WeightConfig::Explicit { weight })
                }
                "calibrate" => {
                    forbid(w, t, &["beta", "weight"], "calibrate");
                    let target = w.number(t, P, "target_negative_norm", true)?;
                    w.check(target < 0.0, || {
                        format!("collision.target_negative_norm: must be negative, got {target}")
                    });
                    let t_end = evolution.map(|e| e.t_end);
                    let at = w.number(t, P, "calibration_time", false).or(t_end)?;
                    // A t_s beyond t_end is already reported by the recipe.
                    if let (Some(ts), Some(te)) = (
                        recipe
                            .as_ref()
                            .map(|r| r.t_s)
                            .filter(|&ts| t_end.is_none_or(|te| ts <= te)),
                        t_end,
                    ) {
                        w.check(at > ts && at <= te, || {
                            format!("collision.calibration_time: {at} fs must lie in (t_s, t_end] = ({ts}, {te}] fs")
                        });
                    }
                    Some(WeightConfig::Calibrate {
                        target_negative_norm: target,
                        calibration_time: at,
                    })
                }
                other => {
                    w.err(format!(
                        "collision.weight_mode: expected \"auto_max_safe\", \"explicit\" or \"calibrate\", got \"{other}\""
                    ));
                    None
                }
            };
            Some(CollisionConfig::He {
                recipe: recipe?,
                weight: weight?,
            })
        }
        "gs" => {
            let mut allowed = RECIPE.to_vec();
            allowed.extend(["electron_count", "occupation", "source_index"]);
            w.unknown_keys(t, P, &allowed);
            let recipe = recipe(w);
            let electron_count = w.integer(t, P, "electron_count", false, 1).unwrap_or(1);
            let occupation = w
                .integer(t, P, "occupation", false, 1)
                .unwrap_or(electron_count);
            let source_index = w.integer(t, P, "source_index", false, 0).unwrap_or(0);
            w.check(occupation <= electron_count, || {
                format!(
                    "collision.occupation: {occupation} exceeds electron_count {electron_count}"
                )
            });
            w.check(electron_count <= u32::MAX as i64, || {
                "collision.electron_count: too large".into()
            });
            w.check(source_index == 0, || {
                format!("collision.source_index: the initial ensemble has one member, got index {source_index}")
            });
            Some(CollisionConfig::Gs {
                recipe: recipe?,
                electron_count: electron_count as u32,
                occupation: occupation as u32,
                source_index: source_index as usize,
            })
        }
        other => {
            w.err(format!(
                "collision.mode: expected \"none\", \"he\" or \"gs\", got \"{other}\""
            ));
            None
        }
    }
}

fn forbid(w: &mut Walker, t: &Table, keys: &[&str], mode: &str) {
    for k in keys {
        if t.contains_key(*k) {
            w.err(format!(
                "collision.{k}: not used with weight_mode \"{mode}\""
            ));
        }
    }
}

fn output_block(
    w: &mut Walker,
    t: Result<Option<&Table>, ()>,
    grid: Option<&GridConfig>,
    potential: Option<&PotentialConfig>,
) -> Option<OutputConfig> {
    const P: &str = "output";
    let empty = Table::new();
    let t = match t {
        Ok(t) => t.unwrap_or(&empty),
        Err(()) => {
            w.err("output: expected a table");
            return None;
        }
    };
    w.unknown_keys(
        t,
        P,
        &[
            "directory",
            "wigner_format",
            "wigner_stride_x",
            "wigner_stride_k",
            "negativity_tolerance",
            "leak_margin",
            "divider",
        ],
    );
    let directory = w.string(t, P, "directory", false).map(str::to_string);
    let wigner_format = match w.string(t, P, "wigner_format", false).unwrap_or("text") {
        "text" => WignerFormat::Text,
        "binary" => WignerFormat::Binary,
        "both" => WignerFormat::Both,
        "none" => WignerFormat::None,
        other => {
            w.err(format!("output.wigner_format: expected \"text\", \"binary\", \"both\" or \"none\", got \"{other}\""));
            WignerFormat::Text
        }
    };
    let wigner_stride_x = w
        .integer(t, P, "wigner_stride_x", false, 1)
        .map_or(DEFAULT_STRIDE, |v| v as usize);
    let wigner_stride_k = w
        .integer(t, P, "wigner_stride_k", false, 1)
        .map_or(DEFAULT_STRIDE, |v| v as usize);
    let negativity_tolerance = w
        .number(t, P, "negativity_tolerance", false)
        .unwrap_or(DEFAULT_NEGATIVITY_TOL);
    w.check(negativity_tolerance >= 0.0, || {
        format!("output.negativity_tolerance: must be non-negative, got {negativity_tolerance}")
    });
    let leak_margin = w
        .number(t, P, "leak_margin", false)
        .unwrap_or(DEFAULT_LEAK_MARGIN);
    if let Some(g) = grid {
        w.check(
            leak_margin >= 0.0 && leak_margin < 0.5 * (g.x_max - g.x_min),
            || format!("output.leak_margin: {leak_margin} nm must lie in [0, half the box)"),
        );
    }
    let divider = match (w.number(t, P, "divider", false), potential, grid) {
        (Some(d), _, Some(g)) => {
            w.check(d >= g.x_min && d <= g.x_max, || {
                format!("output.divider: {d} nm lies outside the box")
            });
            Some(d)
        }
        (Some(d), _, None) => Some(d),
        (None, Some(PotentialConfig::DoubleBarrier { center, .. }), _) => Some(*center),
        (None, _, Some(g)) => Some(0.5 * (g.x_min + g.x_max)),
        (None, _, None) => None,
    };
    Some(OutputConfig {
        directory,
        wigner_format,
        wigner_stride_x,
        wigner_stride_k,
        negativity_tolerance,
        leak_margin,
        divider: divider?,
    })
}

/// Applies `key.path=value` overrides to a parsed document. Values are
/// parsed as TOML and fall back to plain strings.
pub fn apply_overrides(doc: &mut Table, overrides: &[String]) -> Result<(), ConfigErrors> {
    let mut errors = Vec::new();
    for item in overrides {
        let Some((path, raw)) = item.split_once('=') else {
            errors.push(format!("override `{item}`: expected key=value"));
            continue;
        };
        let path = path.trim();
        let raw = raw.trim();
        let value = format!("v = {raw}")
            .parse::<Table>()
            .ok()
            .and_then(|mut t| t.remove("v"))
            .unwrap_or_else(|| Value::String(raw.to_string()));
        let keys: Vec<&str> = path.split('.').collect();
        if keys.iter().any(|k| k.is_empty()) {
            errors.push(format!("override `{item}`: empty key segment"));
            continue;
        }
        if let Err(k) = set_path(doc, &keys, value) {
            errors.push(format!("override `{item}`: `{k}` is not a table"));
        }
    }
    if errors.is_empty() {
        Ok(())
    } else {
        Err(ConfigErrors(errors))
    }
}

fn set_path(t: &mut Table, keys: &[&str], value: Value) -> Result<(), String> {
    match keys {
        [last] => {
            t.insert(last.to_string(), value);
            Ok(())
        }
        [head, rest @ ..] => match t
            .entry(head.to_string())
            .or_insert_with(|| Value::Table(Table::new()))
        {
            Value::Table(inner) => set_path(inner, rest, value),
            _ => Err(head.to_string()),
        },
        [] => Ok(()),
    }
}

/// Reads, overrides and validates a configuration file.
pub fn load_config(path: &Path, overrides: &[String]) -> Result<ScenarioConfig, LoadError> {
    let raw = std::fs::read_to_string(path)
        .map_err(|e| LoadError::Io(format!("{}: {e}", path.display())))?;
    let mut doc: Table = raw.parse().map_err(|e: toml::de::Error| {
        LoadError::Config(ConfigErrors(vec![format!("{}: {e}", path.display())]))
    })?;
    apply_overrides(&mut doc, overrides).map_err(LoadError::Config)?;
    validate_table(&doc).map_err(LoadError::Config)
}

#[derive(Debug)]
pub enum LoadError {
    Io(String),
    Config(ConfigErrors),
}
