// Copyright 2026 The qtransport Authors
// SPDX-License-Identifier: Apache-2.0

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use qtransport_experiment::compare::{compare_runs, CompareField};
use qtransport_experiment::config::{load_config, LoadError};
use qtransport_experiment::runner::{run_scenario, RunError};

/// 1D signed-ensemble quantum transport experiments.
#[derive(Parser)]
#[command(name = "qtransport", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario and write snapshots plus a manifest.
    Run {
        config: PathBuf,
        /// Output directory; defaults to [output].directory, then out/<scenario>.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Comma-separated snapshot times in fs, replacing the configured list.
        #[arg(long, value_delimiter = ',')]
        snapshots: Option<Vec<f64>>,
        /// key.path=value, applied before validation. Repeatable.
        #[arg(long = "override", value_name = "KEY=VALUE")]
        overrides: Vec<String>,
    },
    /// Validate a configuration and print the resolved form.
    Validate {
        config: PathBuf,
        #[arg(long = "override", value_name = "KEY=VALUE")]
        overrides: Vec<String>,
    },
    /// Tabulate one field of two run directories side by side.
    Compare {
        a: PathBuf,
        b: PathBuf,
        #[arg(long, value_enum, default_value_t = Field::Decomposition)]
        field: Field,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Field {
    Decomposition,
    Negativity,
}

fn scenario_name(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "scenario".into())
}

fn load(
    path: &Path,
    overrides: &[String],
) -> Result<qtransport_experiment::ScenarioConfig, RunError> {
    load_config(path, overrides).map_err(|e| match e {
        LoadError::Io(m) => RunError::Io(qtransport_experiment::output::OutputError {
            path: path.display().to_string(),
            message: m,
        }),
        LoadError::Config(errs) => RunError::Config(errs.to_string()),
    })
}

fn run(cli: Cli) -> Result<(), RunError> {
    match cli.command {
        Command::Run {
            config,
            out,
            snapshots,
            mut overrides,
        } => {
            if let Some(times) = snapshots {
                let list: Vec<String> = times.iter().map(|t| format!("{t:?}")).collect();
                overrides.push(format!("evolution.snapshot_times=[{}]", list.join(", ")));
            }
            let cfg = load(&config, &overrides)?;
            let name = scenario_name(&config);
            let dir = out
                .or_else(|| cfg.output.directory.as_ref().map(PathBuf::from))
                .unwrap_or_else(|| Path::new("out").join(&name));
            let outcome = run_scenario(&cfg, &name, Some(&dir))?;
            for w in &outcome.warnings {
                eprintln!("warning: {w}");
            }
            println!("time_fs\tpositive\tnegative\ttotal\tmin_q\tR\tT");
            for s in &outcome.snapshots {
                let d = s.decomposition;
                println!(
                    "{}\t{:.6}\t{:.6}\t{:.6}\t{:.3e}\t{:.4}\t{:.4}",
                    s.time,
                    d.positive,
                    d.negative,
                    d.total,
                    s.negativity.global_min.1,
                    s.reflection,
                    s.transmission
                );
            }
            println!("wrote {}", dir.display());
            Ok(())
        }
        Command::Validate { config, overrides } => {
            let cfg = load(&config, &overrides)?;
            println!(
                "{}",
                serde_json::to_string_pretty(&cfg).expect("plain data")
            );
            Ok(())
        }
        Command::Compare { a, b, field } => {
            let field = match field {
                Field::Decomposition => CompareField::Decomposition,
                Field::Negativity => CompareField::Negativity,
            };
            print!("{}", compare_runs(&a, &b, field)?);
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
