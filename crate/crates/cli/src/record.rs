//! Learning-run records: one line-oriented delimited file per restart.
//!
//! A record carries enough to replot or re-analyze the run without
//! rerunning it: the full configuration (as one JSON header line), the
//! restart seed, and one row per iteration with the best candidate's
//! purity loss, its Fisher-information bound and true value, its NOON
//! fidelity, the move that produced it, and the flattened physical
//! parameters. Single-qubit runs also log the Bloch angles of the best
//! probe so the convergence can be drawn on the Bloch disk.

use anyhow::{bail, Context};
use serde::{Deserialize, Serialize};
use std::fmt::Write as _;
use std::path::Path;

use crate::config::RunConfig;

const MAGIC: &str = "# qmetro run record v1";

/// Header block of a record file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunHeader {
    pub config: RunConfig,
    pub restart_index: usize,
    pub seed: u64,
    /// Wall-clock duration of the restart; excluded from determinism
    /// comparisons.
    pub wall_time_s: f64,
}

/// One logged iteration. Iteration 0 is the freshly initialized simplex.
#[derive(Clone, Debug, PartialEq)]
pub struct IterationRow {
    pub iteration: usize,
    /// Best purity loss seen so far, as the optimizer measured it.
    pub delta_gamma: f64,
    /// `2 * delta_gamma / dx2`.
    pub fql: f64,
    /// True Fisher information of the best probe, when recorded.
    pub fq_true: Option<f64>,
    /// NOON fidelity of the best probe, when recorded.
    pub noon_fidelity: Option<f64>,
    /// Accepted move ("init" for iteration 0).
    pub mv: String,
    /// Bloch angles (delta, phi) of the best probe; single-qubit runs only.
    pub bloch: Option<(f64, f64)>,
    /// Flattened physical control parameters of the best vertex.
    pub params: Vec<f64>,
}

/// A complete per-restart record.
#[derive(Clone, Debug, PartialEq)]
pub struct RunRecord {
    pub header: RunHeader,
    pub rows: Vec<IterationRow>,
}

impl RunRecord {
    pub fn final_row(&self) -> &IterationRow {
        self.rows.last().expect("records carry at least the initial row")
    }

    /// Serializes to the on-disk text form.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let has_bloch = self.header.config.system.n_qubits == 1;
        let param_count = self.rows.first().map_or(0, |r| r.params.len());
        writeln!(out, "{MAGIC}").unwrap();
        writeln!(
            out,
            "# config: {}",
            serde_json::to_string(&self.header.config).expect("config serializes")
        )
        .unwrap();
        writeln!(out, "# restart: {}", self.header.restart_index).unwrap();
        writeln!(out, "# seed: {}", self.header.seed).unwrap();
        writeln!(out, "# wall_time_s: {}", self.header.wall_time_s).unwrap();
        let mut columns = vec![
            "g".to_string(),
            "delta_gamma".to_string(),
            "fql".to_string(),
            "fq_true".to_string(),
            "noon_fidelity".to_string(),
            "move".to_string(),
        ];
        if has_bloch {
            columns.push("bloch_delta".to_string());
            columns.push("bloch_phi".to_string());
        }
        for i in 0..param_count {
            columns.push(format!("p{i}"));
        }
        writeln!(out, "{}", columns.join(",")).unwrap();
        for row in &self.rows {
            let mut fields = vec![
                row.iteration.to_string(),
                fmt_f64(row.delta_gamma),
                fmt_f64(row.fql),
                row.fq_true.map(fmt_f64).unwrap_or_default(),
                row.noon_fidelity.map(fmt_f64).unwrap_or_default(),
                row.mv.clone(),
            ];
            if has_bloch {
                let (d, p) = row.bloch.unwrap_or((f64::NAN, f64::NAN));
                fields.push(fmt_f64(d));
                fields.push(fmt_f64(p));
            }
            fields.extend(row.params.iter().map(|&v| fmt_f64(v)));
            writeln!(out, "{}", fields.join(",")).unwrap();
        }
        out
    }

    /// Parses the on-disk text form back; inverse of
    /// [`RunRecord::to_text`] including the embedded configuration.
    pub fn from_text(text: &str) -> anyhow::Result<Self> {
        let mut lines = text.lines();
        match lines.next() {
            Some(first) if first == MAGIC => {}
            other => bail!("not a run record (first line {other:?})"),
        }
        let mut config: Option<RunConfig> = None;
        let mut restart_index = None;
        let mut seed = None;
        let mut wall_time_s = None;
        let mut column_line = None;
        for line in lines.by_ref() {
            if let Some(rest) = line.strip_prefix("# config: ") {
                config = Some(serde_json::from_str(rest).context("embedded config")?);
            } else if let Some(rest) = line.strip_prefix("# restart: ") {
                restart_index = Some(rest.parse().context("restart index")?);
            } else if let Some(rest) = line.strip_prefix("# seed: ") {
                seed = Some(rest.parse().context("seed")?);
            } else if let Some(rest) = line.strip_prefix("# wall_time_s: ") {
                wall_time_s = Some(rest.parse().context("wall time")?);
            } else if !line.starts_with('#') {
                column_line = Some(line);
                break;
            }
        }
        let header = RunHeader {
            config: config.context("record is missing its config line")?,
            restart_index: restart_index.context("record is missing its restart line")?,
            seed: seed.context("record is missing its seed line")?,
            wall_time_s: wall_time_s.context("record is missing its wall-time line")?,
        };
        let columns: Vec<&str> =
            column_line.context("record is missing the column header")?.split(',').collect();
        let has_bloch = columns.contains(&"bloch_delta");
        let fixed = if has_bloch { 8 } else { 6 };
        let mut rows = Vec::new();
        for line in lines {
            if line.trim().is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split(',').collect();
            if fields.len() != columns.len() {
                bail!("row has {} fields, header promises {}", fields.len(), columns.len());
            }
            let opt = |s: &str| -> anyhow::Result<Option<f64>> {
                if s.is_empty() {
                    Ok(None)
                } else {
                    Ok(Some(s.parse()?))
                }
            };
            rows.push(IterationRow {
                iteration: fields[0].parse().context("iteration")?,
                delta_gamma: fields[1].parse().context("delta_gamma")?,
                fql: fields[2].parse().context("fql")?,
                fq_true: opt(fields[3])?,
                noon_fidelity: opt(fields[4])?,
                mv: fields[5].to_string(),
                bloch: if has_bloch {
                    Some((fields[6].parse()?, fields[7].parse()?))
                } else {
                    None
                },
                params: fields[fixed..]
                    .iter()
                    .map(|s| s.parse().map_err(anyhow::Error::from))
                    .collect::<anyhow::Result<Vec<f64>>>()?,
            });
        }
        if rows.is_empty() {
            bail!("record has no iteration rows");
        }
        Ok(Self { header, rows })
    }

    pub fn write_to(&self, path: &Path) -> anyhow::Result<()> {
        std::fs::write(path, self.to_text())
            .with_context(|| format!("writing record {}", path.display()))
    }

    pub fn read_from(path: &Path) -> anyhow::Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading record {}", path.display()))?;
        Self::from_text(&text).with_context(|| format!("parsing record {}", path.display()))
    }
}

/// Shortest representation that parses back to the same f64.
fn fmt_f64(v: f64) -> String {
    format!("{v}")
}
