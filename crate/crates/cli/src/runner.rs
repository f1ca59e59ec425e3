//! Executes configured experiments: independent restarts, per-restart
//! record files, and the aggregated summary document.

use anyhow::Context;
use std::path::{Path, PathBuf};
use std::time::Instant;

use qmetro_core::exec;
use qmetro_core::metrology::{noon_fidelity, qfi_pure};
use qmetro_core::nmopt;
use qmetro_core::qcore::QuantumState;

use crate::config::RunConfig;
use crate::objective::ProbeObjective;
use crate::record::{IterationRow, RunHeader, RunRecord};
use crate::summary::{summarize, Summary};

/// Everything a finished experiment produced.
pub struct ExperimentOutcome {
    pub records: Vec<RunRecord>,
    pub record_paths: Vec<PathBuf>,
    pub summary: Summary,
    pub summary_path: PathBuf,
    /// (restart index, error text) of restarts that failed; they are
    /// logged and skipped, not fatal.
    pub failed_restarts: Vec<(usize, String)>,
}

impl ExperimentOutcome {
    pub fn all_restarts_completed(&self) -> bool {
        self.failed_restarts.is_empty()
    }
}

/// Bloch angles (delta, phi) of a single-qubit pure state written as
/// `cos(delta/2)|0> + sin(delta/2) e^{i phi} |1>`.
fn bloch_angles(probe: &QuantumState) -> Option<(f64, f64)> {
    let amps = probe.amplitudes()?;
    if amps.len() != 2 {
        return None;
    }
    let delta = 2.0 * amps[1].norm().atan2(amps[0].norm());
    let mut phi = amps[1].arg() - amps[0].arg();
    if phi <= -std::f64::consts::PI {
        phi += std::f64::consts::TAU;
    } else if phi > std::f64::consts::PI {
        phi -= std::f64::consts::TAU;
    }
    Some((delta, phi))
}

/// Runs one restart and assembles its record.
fn run_restart(config: &RunConfig, restart: usize) -> anyhow::Result<RunRecord> {
    let optimizer_config = config.optimizer.to_config(restart);
    let objective = ProbeObjective::from_config(config, optimizer_config.seed)?;
    let dimension = objective.dimension();
    let started = Instant::now();
    let result = nmopt::run(dimension, &optimizer_config, &objective.as_fn())
        .context("optimizer run")?;

    let dx2 = objective.strata().dx2();
    let mut rows = Vec::with_capacity(result.events.len() + 1);
    let mut push_row = |iteration: usize,
                        mv: &str,
                        value: f64,
                        vertex: &[f64]|
     -> anyhow::Result<()> {
        let delta_gamma = 1.0 - value;
        let probe = objective.probe_for(vertex)?;
        let fq_true = if config.record_true_qfi {
            Some(qfi_pure(&probe, objective.encoding()).context("true Fisher information")?)
        } else {
            None
        };
        let noon = if config.record_noon_fidelity {
            Some(noon_fidelity(&probe).context("reference fidelity")?.1)
        } else {
            None
        };
        let bloch =
            if config.system.n_qubits == 1 { bloch_angles(&probe) } else { None };
        rows.push(IterationRow {
            iteration,
            delta_gamma,
            fql: 2.0 * delta_gamma / dx2,
            fq_true,
            noon_fidelity: noon,
            mv: mv.to_string(),
            bloch,
            params: objective.physical_params(vertex),
        });
        Ok(())
    };

    push_row(0, "init", result.initial_best_value, &result.initial_best_vertex)?;
    for event in &result.events {
        push_row(event.iteration, event.mv.as_str(), event.best_value, &event.best_vertex)?;
    }

    Ok(RunRecord {
        header: RunHeader {
            config: config.clone(),
            restart_index: restart,
            seed: optimizer_config.seed,
            wall_time_s: started.elapsed().as_secs_f64(),
        },
        rows,
    })
}

/// Executes all restarts of a configuration (concurrently when the
/// parallel feature is on), writes one record file per restart plus a
/// summary document, and reports any failed restarts.
pub fn run_experiment(config: &RunConfig) -> anyhow::Result<ExperimentOutcome> {
    config.validate()?;
    let out_dir = Path::new(&config.output_path);
    std::fs::create_dir_all(out_dir)
        .with_context(|| format!("creating output directory {}", out_dir.display()))?;

    let results = exec::map_range(config.restarts, |restart| {
        run_restart(config, restart).map_err(|e| (restart, format!("{e:#}")))
    });

    let mut records = Vec::new();
    let mut record_paths = Vec::new();
    let mut failed_restarts = Vec::new();
    for result in results {
        match result {
            Ok(record) => {
                let path = out_dir.join(format!("restart_{:02}.csv", record.header.restart_index));
                record.write_to(&path)?;
                records.push(record);
                record_paths.push(path);
            }
            Err((restart, message)) => {
                log::error!("restart {restart} failed: {message}");
                failed_restarts.push((restart, message));
            }
        }
    }
    if records.is_empty() {
        anyhow::bail!("every restart failed");
    }

    let summary = summarize(&records)?;
    let summary_path = out_dir.join("summary.json");
    std::fs::write(&summary_path, serde_json::to_string_pretty(&summary)?)
        .with_context(|| format!("writing summary {}", summary_path.display()))?;

    Ok(ExperimentOutcome { records, record_paths, summary, summary_path, failed_restarts })
}
