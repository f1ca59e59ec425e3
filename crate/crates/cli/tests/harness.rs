//! Integration tests for the run harness: record round-trips, run
//! determinism, restart isolation, and the purity-loss-tracks-Fisher
//! behavior of a converged single-qubit run.

use approx::assert_abs_diff_eq;

use qmetro::config::{RunConfig, StrataConfig};
use qmetro::objective::ProbeObjective;
use qmetro::presets;
use qmetro::record::RunRecord;
use qmetro::runner::run_experiment;
use qmetro::summary::summarize;

fn fig3_into(dir: &tempfile::TempDir, seed: u64, restarts: usize) -> RunConfig {
    presets::fig3_config(seed, restarts, None, &dir.path().join("out").to_string_lossy())
}

/// Record text with the wall-time header line removed.
fn strip_wall_time(text: &str) -> String {
    text.lines().filter(|l| !l.starts_with("# wall_time_s")).collect::<Vec<_>>().join("\n")
}

#[test]
fn identical_configs_produce_byte_identical_records() {
    let dir_a = tempfile::tempdir().unwrap();
    let dir_b = tempfile::tempdir().unwrap();
    let out_a = run_experiment(&fig3_into(&dir_a, 11, 3)).unwrap();
    let out_b = run_experiment(&fig3_into(&dir_b, 11, 3)).unwrap();
    assert_eq!(out_a.record_paths.len(), 3);
    for (pa, pb) in out_a.record_paths.iter().zip(&out_b.record_paths) {
        let ta = std::fs::read_to_string(pa).unwrap();
        let tb = std::fs::read_to_string(pb).unwrap();
        // output_path differs between the temp dirs; normalize it away
        let ta = ta.replace(&dir_a.path().to_string_lossy().to_string(), "DIR");
        let tb = tb.replace(&dir_b.path().to_string_lossy().to_string(), "DIR");
        assert_eq!(strip_wall_time(&ta), strip_wall_time(&tb));
    }
}

#[test]
fn different_seeds_change_trajectories() {
    let dir_a = tempfile::tempdir().unwrap();
    let dir_b = tempfile::tempdir().unwrap();
    let out_a = run_experiment(&fig3_into(&dir_a, 1, 1)).unwrap();
    let out_b = run_experiment(&fig3_into(&dir_b, 2, 1)).unwrap();
    assert_ne!(out_a.records[0].rows[0].params, out_b.records[0].rows[0].params);
}

#[test]
fn written_records_parse_back_with_exact_config() {
    let dir = tempfile::tempdir().unwrap();
    let config = fig3_into(&dir, 5, 2);
    let outcome = run_experiment(&config).unwrap();
    for path in &outcome.record_paths {
        let parsed = RunRecord::read_from(path).unwrap();
        assert_eq!(parsed.header.config, config);
        assert_eq!(parsed.rows.len(), 26); // init row + 25 iterations
    }
}

#[test]
fn recorded_best_purity_loss_is_monotone_and_consistent() {
    let dir = tempfile::tempdir().unwrap();
    let outcome = run_experiment(&fig3_into(&dir, 3, 2)).unwrap();
    for record in &outcome.records {
        let dx2 = 1.0721386825; // Bessel variance of the nine-point set
        let mut prev = f64::NEG_INFINITY;
        for row in &record.rows {
            assert!(row.delta_gamma >= prev - 1e-15, "purity loss decreased");
            assert_abs_diff_eq!(row.fql, 2.0 * row.delta_gamma / dx2, epsilon = 1e-6);
            prev = row.delta_gamma;
        }
    }
}

#[test]
fn summary_best_equals_max_over_restart_records() {
    let dir = tempfile::tempdir().unwrap();
    let outcome = run_experiment(&fig3_into(&dir, 9, 4)).unwrap();
    let summary = summarize(&outcome.records).unwrap();
    let best_fql = outcome
        .records
        .iter()
        .map(|r| r.final_row().fql)
        .fold(f64::NEG_INFINITY, f64::max);
    let best_fq = outcome
        .records
        .iter()
        .filter_map(|r| r.final_row().fq_true)
        .fold(f64::NEG_INFINITY, f64::max);
    assert_eq!(summary.rows[0].best_fql, best_fql);
    assert_eq!(summary.rows[0].best_fq_true, Some(best_fq));
}

/// Spearman rank correlation with average ranks for ties.
fn spearman(a: &[f64], b: &[f64]) -> f64 {
    fn ranks(v: &[f64]) -> Vec<f64> {
        let mut order: Vec<usize> = (0..v.len()).collect();
        order.sort_by(|&i, &j| v[i].total_cmp(&v[j]));
        let mut out = vec![0.0; v.len()];
        let mut i = 0;
        while i < order.len() {
            let mut j = i;
            while j + 1 < order.len() && v[order[j + 1]] == v[order[i]] {
                j += 1;
            }
            let avg = (i + j) as f64 / 2.0 + 1.0;
            for &k in &order[i..=j] {
                out[k] = avg;
            }
            i = j + 1;
        }
        out
    }
    let ra = ranks(a);
    let rb = ranks(b);
    let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
    let (ma, mb) = (mean(&ra), mean(&rb));
    let cov: f64 = ra.iter().zip(&rb).map(|(x, y)| (x - ma) * (y - mb)).sum();
    let va: f64 = ra.iter().map(|x| (x - ma).powi(2)).sum();
    let vb: f64 = rb.iter().map(|y| (y - mb).powi(2)).sum();
    cov / (va.sqrt() * vb.sqrt())
}

#[test]
fn purity_loss_series_tracks_fisher_information() {
    // over a converged single-qubit run, the per-iteration best purity
    // loss and the true Fisher information rise together
    let dir = tempfile::tempdir().unwrap();
    let outcome = run_experiment(&fig3_into(&dir, 7, 5)).unwrap();
    let best = outcome
        .records
        .iter()
        .max_by(|a, b| a.final_row().delta_gamma.total_cmp(&b.final_row().delta_gamma))
        .unwrap();
    let dg: Vec<f64> = best.rows.iter().map(|r| r.delta_gamma).collect();
    let fq: Vec<f64> = best.rows.iter().map(|r| r.fq_true.unwrap()).collect();
    let rho = spearman(&dg, &fq);
    assert!(rho >= 0.9, "rank correlation {rho}");
}

#[test]
fn exact_and_sampled_objectives_agree_at_high_shots() {
    let exact_config = presets::fig3_config(1, 1, None, "unused");
    let sampled_config = presets::fig3_config(1, 1, Some((1_000_000, 0.0)), "unused");
    let exact = ProbeObjective::from_config(&exact_config, 1).unwrap();
    let sampled = ProbeObjective::from_config(&sampled_config, 1).unwrap();
    let point = [500.0, -120.0, 40.0, 0.0, 310.0, 77.0];
    let r_exact = exact.report_for(&point).unwrap();
    let r_sampled = sampled.report_for(&point).unwrap();
    // 46 SWAP terms at a million shots each: standard error of the
    // combined purity difference is a few parts in 1e3
    assert_abs_diff_eq!(r_sampled.delta_gamma, r_exact.delta_gamma, epsilon = 5e-3);
}

#[test]
fn sampled_runs_are_deterministic_too() {
    let dir_a = tempfile::tempdir().unwrap();
    let dir_b = tempfile::tempdir().unwrap();
    let mk = |dir: &tempfile::TempDir| {
        presets::fig3_config(
            13,
            2,
            Some((400, 0.025)),
            &dir.path().join("out").to_string_lossy(),
        )
    };
    let out_a = run_experiment(&mk(&dir_a)).unwrap();
    let out_b = run_experiment(&mk(&dir_b)).unwrap();
    for (ra, rb) in out_a.records.iter().zip(&out_b.records) {
        assert_eq!(ra.rows, rb.rows);
    }
}

#[test]
fn gaussian_strata_config_flows_through() {
    let dir = tempfile::tempdir().unwrap();
    let mut config = fig3_into(&dir, 2, 1);
    config.strata = StrataConfig::Gaussian { k: 9, dx2: 0.01 };
    let outcome = run_experiment(&config).unwrap();
    let row = outcome.records[0].final_row();
    assert_abs_diff_eq!(row.fql, 2.0 * row.delta_gamma / 0.01, epsilon = 1e-9);
}

#[test]
fn single_qubit_records_carry_bloch_angles() {
    let dir = tempfile::tempdir().unwrap();
    let outcome = run_experiment(&fig3_into(&dir, 4, 1)).unwrap();
    for row in &outcome.records[0].rows {
        let (delta, phi) = row.bloch.expect("single-qubit rows carry Bloch angles");
        assert!((0.0..=std::f64::consts::PI).contains(&delta));
        assert!((-std::f64::consts::PI..=std::f64::consts::PI).contains(&phi));
    }
}
