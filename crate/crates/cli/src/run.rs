//! Parallel sweep execution and output files.

use std::fs;
use std::path::PathBuf;
use std::sync::atomic::{AtomicUsize, Ordering};

use polariton_core::analysis::phase::FINITE_SIZE_NOTE;
use polariton_core::Session;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::json;

use crate::error::CliError;
use crate::modes::{columns, evaluate, PointOutput};
use crate::plot::describe;
use crate::spec::{GridPoint, Mode, SweepSpec};
use crate::table::{Column, Row, Table, Value};

/// A grid point whose evaluation failed.
#[derive(Debug, Clone, Serialize)]
pub struct PointFailure {
    pub point: GridPoint,
    pub error: String,
    pub exit_code: u8,
}

#[derive(Debug, Clone)]
pub struct SweepResult {
    pub spec: SweepSpec,
    pub timestamp: String,
    pub table: Table,
    /// Per-point solver diagnostics in grid order.
    pub diagnostics: Vec<serde_json::Value>,
    pub failures: Vec<PointFailure>,
    pub notes: Vec<String>,
}

/// Paths of the files written by [`SweepResult::write`].
#[derive(Debug, Clone, Default)]
pub struct Written {
    pub csv: Option<PathBuf>,
    pub json: Option<PathBuf>,
    pub plot: Option<PathBuf>,
}

/// Flag columns that feed the per-row status.
const STATUS_FLAGS: [&str; 4] = ["degenerate", "saturated", "unstable", "inverted"];

fn status(columns: &[Column], row: &Row) -> String {
    let raised: Vec<&str> = columns
        .iter()
        .zip(row)
        .filter(|(c, v)| STATUS_FLAGS.contains(&c.name.as_str()) && **v == Value::Bool(true))
        .map(|(c, _)| c.name.as_str())
        .collect();
    if raised.is_empty() {
        "converged".into()
    } else {
        format!("converged;{}", raised.join(";"))
    }
}

pub fn run(spec: &SweepSpec) -> Result<SweepResult, CliError> {
    spec.validate()?;
    let session = Session::new(spec.eigen).with_dimension_cap(spec.dimension_cap);
    let grid = spec.grid();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(spec.workers)
        .build()
        .map_err(|e| CliError::Output(format!("cannot start worker pool: {e}")))?;
    let done = AtomicUsize::new(0);
    let total = grid.len();
    let outcomes: Vec<Result<PointOutput, polariton_core::Error>> = pool.install(|| {
        grid.par_iter()
            .map(|point| {
                let out = evaluate(spec, &session, point);
                let n = done.fetch_add(1, Ordering::Relaxed) + 1;
                eprint!("\r{}: {n}/{total} points", spec.name);
                if n == total {
                    eprintln!();
                }
                out
            })
            .collect()
    });

    let mut cols = columns(spec);
    cols.push(Column::text("status"));
    let mut table = Table::new(cols);
    let mut diagnostics = Vec::new();
    let mut failures = Vec::new();
    for (point, outcome) in grid.iter().zip(outcomes) {
        match outcome {
            Ok(out) => {
                for mut row in out.rows {
                    row.push(status(&table.columns, &row).into());
                    table.push(row)?;
                }
                diagnostics.push(json!({ "index": point.index, "point": point, "solver": out.diagnostics }));
            }
            Err(e) => {
                let exit_code = CliError::Core(e.clone()).exit_code();
                log::error!("grid point {} failed: {e}", point.index);
                failures.push(PointFailure {
                    point: point.clone(),
                    error: e.to_string(),
                    exit_code,
                });
            }
        }
    }
    let mut notes = Vec::new();
    match spec.mode {
        Mode::CriticalRatio | Mode::PhaseLambda | Mode::PhaseDelta | Mode::Gaps => {
            notes.push(format!("extrapolated in powers of 1/M, degree {}", spec.degree));
            if spec.mode == Mode::CriticalRatio {
                notes.push(FINITE_SIZE_NOTE.to_string());
            }
        }
        Mode::Analytic => notes.push("U and dressed states use g = max(g_l, g_r)".into()),
        Mode::Gce => notes.push("mu is reported as mu - omega_c".into()),
        Mode::Sector => {}
    }
    Ok(SweepResult {
        spec: spec.clone(),
        timestamp: chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true),
        table,
        diagnostics,
        failures,
        notes,
    })
}

impl SweepResult {
    /// Process exit status: 0, or the most severe failure code.
    pub fn exit_code(&self) -> u8 {
        self.failures.iter().map(|f| f.exit_code).max().unwrap_or(0)
    }

    /// `# ` header lines of the CSV file.
    pub fn metadata(&self) -> Vec<String> {
        let mut lines = vec![
            format!("tool = {} {}", env!("CARGO_PKG_NAME"), env!("CARGO_PKG_VERSION")),
            format!("timestamp = {}", self.timestamp),
        ];
        lines.extend(self.spec.echo());
        lines.extend(self.notes.iter().map(|n| format!("note = {n}")));
        for f in &self.failures {
            lines.push(format!("failed point {} = {}", f.point.index, f.error));
        }
        lines
    }

    pub fn csv_string(&self) -> Result<String, CliError> {
        let mut buf = Vec::new();
        self.table.write_csv(&mut buf, &self.metadata())?;
        String::from_utf8(buf).map_err(|e| CliError::Output(e.to_string()))
    }

    pub fn to_json(&self) -> serde_json::Value {
        json!({
            "config": {
                "tool": env!("CARGO_PKG_NAME"),
                "version": env!("CARGO_PKG_VERSION"),
                "timestamp": self.timestamp,
                "spec": self.spec,
                "resolved": self.spec.echo(),
                "notes": self.notes,
            },
            "columns": self.table.columns,
            "rows": self.table.named_rows(),
            "diagnostics": {
                "points": self.diagnostics,
                "failures": self.failures,
            },
        })
    }

    /// Write the requested files into the spec's output directory.
    pub fn write(&self) -> Result<Written, CliError> {
        let dir = &self.spec.out_dir;
        fs::create_dir_all(dir).map_err(|e| CliError::Output(format!("cannot create {}: {e}", dir.display())))?;
        let mut written = Written::default();
        let stem = &self.spec.name;
        if self.spec.format.csv() {
            let path = dir.join(format!("{stem}.csv"));
            fs::write(&path, self.csv_string()?)?;
            written.csv = Some(path);
        }
        if self.spec.format.json() {
            let path = dir.join(format!("{stem}.json"));
            let text = serde_json::to_string_pretty(&self.to_json()).map_err(|e| CliError::Output(e.to_string()))?;
            fs::write(&path, text + "\n")?;
            written.json = Some(path);
        }
        if self.spec.plot {
            let path = dir.join(format!("{stem}.plot.json"));
            let data = format!("{stem}.{}", if self.spec.format.csv() { "csv" } else { "json" });
            let text = serde_json::to_string_pretty(&describe(&self.spec, &data)).map_err(|e| CliError::Output(e.to_string()))?;
            fs::write(&path, text + "\n")?;
            written.plot = Some(path);
        }
        Ok(written)
    }
}
