//! CSV and JSON export.
//!
//! Numbers are written in scientific notation with 17 significant digits,
//! which round-trips every `f64` exactly and does not depend on locale.

use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::{json, Value};

use crate::config::ScenarioConfig;
use crate::engine::TrajectoryRecord;
use crate::ensemble::{EnsembleResult, ObservableMetrics, TransientSummary, OBSERVABLES};
use crate::error::{Error, Result};
use crate::filter::Detection;

pub const SCHEMA_VERSION: &str = "1";
pub const GIT_DESCRIBE: &str = env!("QFILTER_GIT_DESCRIBE");

pub fn format_number(v: f64) -> String {
    format!("{v:.16e}")
}

fn write_row<W: Write>(w: &mut W, values: impl IntoIterator<Item = f64>) -> Result<()> {
    let row: Vec<String> = values.into_iter().map(format_number).collect();
    writeln!(w, "{}", row.join(","))?;
    Ok(())
}

pub fn innovation_column(detection: Detection) -> &'static str {
    match detection {
        Detection::Homodyne => "dW",
        Detection::PhotonCounting => "dN",
    }
}

pub fn trajectory_header(detection: Detection, auxiliary: &[String]) -> Vec<String> {
    let mut h: Vec<String> = ["t", "x", "y", "z", innovation_column(detection), "Y", "P"]
        .iter()
        .map(|s| s.to_string())
        .collect();
    h.extend(auxiliary.iter().cloned());
    h
}

pub fn write_trajectory_csv<W: Write>(
    w: &mut W,
    rec: &TrajectoryRecord,
    detection: Detection,
    auxiliary: &[String],
) -> Result<()> {
    writeln!(w, "{}", trajectory_header(detection, auxiliary).join(","))?;
    for k in 0..rec.len() {
        let b = rec.states[k];
        let aux = rec.auxiliary.get(k).map(Vec::as_slice).unwrap_or(&[]);
        if aux.len() != auxiliary.len() {
            return Err(Error::Alignment(format!(
                "row {k} has {} auxiliary values for {} columns",
                aux.len(),
                auxiliary.len()
            )));
        }
        let fixed = [
            rec.times[k],
            b.x,
            b.y,
            b.z,
            rec.innovations[k],
            rec.measurement[k],
            rec.purity[k],
        ];
        write_row(w, fixed.into_iter().chain(aux.iter().copied()))?;
    }
    Ok(())
}

pub fn ensemble_header(r: &EnsembleResult) -> Vec<String> {
    let mut h = vec!["t".to_string()];
    let names = OBSERVABLES.iter().map(|s| s.to_string()).chain(["P".to_string()]);
    let aux = r.auxiliary_names.iter().cloned();
    for name in names.chain(aux) {
        h.push(format!("{name}_mean"));
        h.push(format!("{name}_se"));
        h.push(format!("{name}_me"));
    }
    h
}

pub fn write_ensemble_csv<W: Write>(w: &mut W, r: &EnsembleResult) -> Result<()> {
    writeln!(w, "{}", ensemble_header(r).join(","))?;
    for k in 0..r.times.len() {
        let mut row = vec![r.times[k]];
        for axis in 0..3 {
            row.extend([r.bloch[axis].mean[k], r.bloch[axis].se[k], r.me[axis][k]]);
        }
        row.extend([r.purity.mean[k], r.purity.se[k], r.me_purity[k]]);
        for (s, me) in r.auxiliary.iter().zip(&r.me_auxiliary) {
            row.extend([s.mean[k], s.se[k], me[k]]);
        }
        write_row(w, row)?;
    }
    Ok(())
}

/// Metrics block of an ensemble run, keyed as `sup_norm_z`, `rmse_x`, ...
pub fn metrics_json(
    r: &EnsembleResult,
    metrics: &[ObservableMetrics],
    me_transient: &TransientSummary,
    mean_transient: &TransientSummary,
) -> Value {
    let mut m = serde_json::Map::new();
    for om in metrics {
        m.insert(format!("sup_norm_{}", om.observable), json!(om.sup_norm));
        m.insert(format!("rmse_{}", om.observable), json!(om.rmse));
        m.insert(format!("max_abs_z_{}", om.observable), json!(om.max_abs_z));
    }
    json!({
        "scenario": r.scenario,
        "n_trajectories": r.n_trajectories,
        "metrics": m,
        "transient": { "me": me_transient, "ensemble_mean": mean_transient },
        "total_jumps": r.total_jumps(),
        "diagnostics": r.diagnostics,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct Manifest<'a> {
    pub schema_version: &'static str,
    pub tool_version: &'static str,
    pub git_describe: &'static str,
    pub command: &'a str,
    pub scenario: &'a str,
    pub seed: u64,
    pub config: &'a ScenarioConfig,
}

impl<'a> Manifest<'a> {
    pub fn new(command: &'a str, scenario: &'a str, config: &'a ScenarioConfig) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            tool_version: env!("CARGO_PKG_VERSION"),
            git_describe: GIT_DESCRIBE,
            command,
            scenario,
            seed: config.integrator.seed,
            config,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("manifest serializes")
    }
}

/// `run.csv` -> `run.<suffix>`.
pub fn sidecar_path(out: &Path, suffix: &str) -> PathBuf {
    out.with_extension(suffix)
}

/// Directory for per-trajectory dumps next to `out`.
pub fn trajectory_dir(out: &Path) -> PathBuf {
    let stem = out.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    out.with_file_name(format!("{stem}_trajectories"))
}

/// Parses a CSV written by this module into its header and numeric rows.
pub fn read_csv(text: &str) -> Result<(Vec<String>, Vec<Vec<f64>>)> {
    let mut lines = text.lines();
    let header: Vec<String> = lines
        .next()
        .ok_or_else(|| Error::InvalidInput("empty CSV".into()))?
        .split(',')
        .map(str::to_string)
        .collect();
    let mut rows = Vec::new();
    for (i, line) in lines.enumerate() {
        let row = line
            .split(',')
            .map(|v| {
                v.parse::<f64>()
                    .map_err(|e| Error::InvalidInput(format!("row {}: {v:?}: {e}", i + 1)))
            })
            .collect::<Result<Vec<f64>>>()?;
        if row.len() != header.len() {
            return Err(Error::InvalidInput(format!(
                "row {} has {} fields, header has {}",
                i + 1,
                row.len(),
                header.len()
            )));
        }
        rows.push(row);
    }
    Ok((header, rows))
}
