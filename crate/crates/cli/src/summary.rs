//! Aggregation of run records into per-system summary tables.

use anyhow::bail;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

use crate::record::RunRecord;

/// Heisenberg-ratio threshold below which a group is flagged as not
/// converged.
pub const CONVERGENCE_RATIO: f64 = 0.95;

/// Best-of-restarts results for one qubit count.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub n_qubits: usize,
    pub restarts: usize,
    pub best_delta_gamma: f64,
    /// Best final Fisher-information bound over the restarts.
    pub best_fql: f64,
    /// Best final true Fisher information, when the runs recorded it.
    pub best_fq_true: Option<f64>,
    /// Best true (or, failing that, bound) value over the Heisenberg
    /// ceiling N^2.
    pub heisenberg_ratio: f64,
    pub best_noon_fidelity: Option<f64>,
    /// Iterations the best restart needed to reach 95% of its final
    /// purity loss.
    pub iterations_to_95pct: usize,
    /// False when the ratio falls below [`CONVERGENCE_RATIO`].
    pub converged: bool,
}

/// The whole summary document.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub rows: Vec<SummaryRow>,
}

/// Groups records by qubit count and reduces each group to its
/// best-of-restarts row.
pub fn summarize(records: &[RunRecord]) -> anyhow::Result<Summary> {
    if records.is_empty() {
        bail!("summarize needs at least one record");
    }
    let mut groups: BTreeMap<usize, Vec<&RunRecord>> = BTreeMap::new();
    for record in records {
        groups.entry(record.header.config.system.n_qubits).or_default().push(record);
    }
    let mut rows = Vec::new();
    for (n_qubits, group) in groups {
        let best_record = group
            .iter()
            .max_by(|a, b| {
                a.final_row().delta_gamma.total_cmp(&b.final_row().delta_gamma)
            })
            .expect("nonempty group");
        let final_dg = best_record.final_row().delta_gamma;
        let iterations_to_95pct = best_record
            .rows
            .iter()
            .find(|row| row.delta_gamma >= 0.95 * final_dg)
            .map(|row| row.iteration)
            .unwrap_or(best_record.final_row().iteration);

        let best_fql =
            group.iter().map(|r| r.final_row().fql).fold(f64::NEG_INFINITY, f64::max);
        let best_fq_true = group
            .iter()
            .filter_map(|r| r.final_row().fq_true)
            .fold(None, |acc: Option<f64>, v| Some(acc.map_or(v, |a| a.max(v))));
        let best_noon_fidelity = group
            .iter()
            .filter_map(|r| r.final_row().noon_fidelity)
            .fold(None, |acc: Option<f64>, v| Some(acc.map_or(v, |a| a.max(v))));
        let ceiling = (n_qubits * n_qubits) as f64;
        let heisenberg_ratio = best_fq_true.unwrap_or(best_fql) / ceiling;
        rows.push(SummaryRow {
            n_qubits,
            restarts: group.len(),
            best_delta_gamma: final_dg,
            best_fql,
            best_fq_true,
            heisenberg_ratio,
            best_noon_fidelity,
            iterations_to_95pct,
            converged: heisenberg_ratio >= CONVERGENCE_RATIO,
        })
    }
    Ok(Summary { rows })
}

/// Plain-text table for terminal output.
pub fn render_table(summary: &Summary) -> String {
    let mut out = String::new();
    out.push_str(
        "  N  restarts  best_dG      best_FQL     best_FQ      FQ/N^2   noon_fid  g95  converged\n",
    );
    for row in &summary.rows {
        let fq = row.best_fq_true.map_or("-".to_string(), |v| format!("{v:<12.6}"));
        let noon = row.best_noon_fidelity.map_or("-".to_string(), |v| format!("{v:<8.5}"));
        out.push_str(&format!(
            "{:>3}  {:>8}  {:<11.6}  {:<11.6}  {:<11}  {:<7.4}  {:<8}  {:>3}  {}\n",
            row.n_qubits,
            row.restarts,
            row.best_delta_gamma,
            row.best_fql,
            fq,
            row.heisenberg_ratio,
            noon,
            row.iterations_to_95pct,
            if row.converged { "yes" } else { "NO" },
        ));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::RunConfig;
    use crate::presets;
    use crate::record::{IterationRow, RunHeader, RunRecord};

    fn record_with(n: usize, config: &RunConfig, restart: usize, dgs: &[f64]) -> RunRecord {
        let rows = dgs
            .iter()
            .enumerate()
            .map(|(g, &dg)| IterationRow {
                iteration: g,
                delta_gamma: dg,
                fql: 2.0 * dg / 1.0721,
                fq_true: Some(2.2 * dg),
                noon_fidelity: Some(0.5 + dg),
                mv: if g == 0 { "init".into() } else { "reflect".into() },
                bloch: (n == 1).then_some((0.1, 0.2)),
                params: vec![0.0; 6],
            })
            .collect();
        RunRecord {
            header: RunHeader {
                config: config.clone(),
                restart_index: restart,
                seed: restart as u64,
                wall_time_s: 0.0,
            },
            rows,
        }
    }

    #[test]
    fn best_of_restarts_is_the_group_maximum() {
        let config = presets::fig3_config(1, 2, None, "unused");
        let a = record_with(1, &config, 0, &[0.1, 0.2, 0.30]);
        let b = record_with(1, &config, 1, &[0.05, 0.28, 0.45]);
        let summary = summarize(&[a.clone(), b.clone()]).unwrap();
        assert_eq!(summary.rows.len(), 1);
        let row = &summary.rows[0];
        assert_eq!(row.restarts, 2);
        assert_eq!(row.best_delta_gamma, 0.45);
        let manual_best_fql =
            a.final_row().fql.max(b.final_row().fql);
        assert_eq!(row.best_fql, manual_best_fql);
        assert_eq!(row.best_fq_true, Some(2.2 * 0.45));
    }

    #[test]
    fn iterations_to_95pct_finds_first_crossing() {
        let config = presets::fig3_config(1, 1, None, "unused");
        let r = record_with(1, &config, 0, &[0.0, 0.20, 0.40, 0.41, 0.42]);
        let summary = summarize(&[r]).unwrap();
        // 0.95 * 0.42 = 0.399, first reached at iteration 2
        assert_eq!(summary.rows[0].iterations_to_95pct, 2);
    }

    #[test]
    fn unconverged_groups_are_flagged() {
        let config = presets::fig3_config(1, 1, None, "unused");
        let weak = record_with(1, &config, 0, &[0.01, 0.02]);
        let summary = summarize(&[weak]).unwrap();
        assert!(summary.rows[0].heisenberg_ratio < 1.0);
        assert!(!summary.rows[0].converged);
    }

    #[test]
    fn empty_input_is_an_error() {
        assert!(summarize(&[]).is_err());
    }
}
