//! Parameter sweeps: independent runs in parallel, merged in product order.

use std::path::{Path, PathBuf};

use rayon::prelude::*;

use super::output::{export_svg_plot, write_trace_csv, PlotSeries};
use super::{run_single, RunSpec, SweepSpec};
use crate::error::{Error, Result};
use crate::solvers::{IterationTrace, Status};

/// What a sweep keeps of a finished run.
#[derive(Debug, Clone)]
pub struct RunSummary {
    pub id: String,
    pub status: Status,
    pub iterations: usize,
    pub final_update: Option<f64>,
    pub final_div: f64,
    pub velocity_dofs: usize,
    pub trace: IterationTrace,
}

#[derive(Debug, Clone)]
pub struct SweepEntry {
    pub spec: RunSpec,
    /// The run's summary, or the message of the error that stopped it.
    pub result: std::result::Result<RunSummary, String>,
}

impl SweepEntry {
    pub fn id(&self) -> String {
        self.spec.run_id()
    }

    pub fn converged(&self) -> bool {
        matches!(&self.result, Ok(s) if s.status == Status::Converged)
    }

    pub fn iterations(&self) -> Option<usize> {
        self.result.as_ref().ok().map(|s| s.iterations)
    }
}

#[derive(Debug, Clone)]
pub struct SweepOutcome {
    pub entries: Vec<SweepEntry>,
    pub artifacts: Vec<PathBuf>,
}

impl SweepOutcome {
    pub fn find(&self, id: &str) -> Option<&SweepEntry> {
        self.entries.iter().find(|e| e.id() == id)
    }
}

/// Runs every point of `spec`. A failing run is recorded and the sweep goes
/// on. With `out_dir`, each run writes its own artifacts there and the sweep
/// adds `sweep.csv`, `summary.csv` and `convergence.svg`.
pub fn run_sweep(spec: &SweepSpec, out_dir: Option<&Path>) -> Result<SweepOutcome> {
    let mut runs = spec.expand()?;
    if let Some(dir) = out_dir {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        for r in &mut runs {
            r.out_dir = Some(dir.to_path_buf());
        }
    }
    let entries: Vec<SweepEntry> = runs
        .into_par_iter()
        .map(|spec| {
            let result = run_single(&spec)
                .map(|o| {
                    let last = o.trace.last();
                    RunSummary {
                        id: o.id.clone(),
                        status: o.trace.status,
                        iterations: o.trace.iterations(),
                        final_update: last.update,
                        final_div: last.div_l2,
                        velocity_dofs: o.velocity_dofs,
                        trace: o.trace,
                    }
                })
                .map_err(|e| e.to_string());
            SweepEntry { spec, result }
        })
        .collect();

    let mut artifacts = Vec::new();
    if let Some(dir) = out_dir {
        let done: Vec<&RunSummary> = entries.iter().filter_map(|e| e.result.as_ref().ok()).collect();
        let traces: Vec<(&str, &IterationTrace)> = done.iter().map(|s| (s.id.as_str(), &s.trace)).collect();
        let path = dir.join("sweep.csv");
        write_trace_csv(&path, &traces)?;
        artifacts.push(path);

        let path = dir.join("summary.csv");
        write_summary(&path, &entries)?;
        artifacts.push(path);

        if !done.is_empty() {
            let series: Vec<PlotSeries> = done
                .iter()
                .map(|s| PlotSeries {
                    label: s.id.clone(),
                    values: s.trace.updates(),
                })
                .collect();
            let path = dir.join("convergence.svg");
            export_svg_plot(&series, &path)?;
            artifacts.push(path);
        }
    }
    Ok(SweepOutcome { entries, artifacts })
}

fn write_summary(path: &Path, entries: &[SweepEntry]) -> Result<()> {
    let fail = |e: csv::Error| Error::io(path, std::io::Error::other(e.to_string()));
    let mut w = csv::Writer::from_path(path).map_err(fail)?;
    w.write_record(["run_id", "status", "iterations", "final_update", "final_div_l2", "velocity_dofs", "error"])
        .map_err(fail)?;
    for e in entries {
        let row = match &e.result {
            Ok(s) => [
                s.id.clone(),
                s.status.to_string(),
                s.iterations.to_string(),
                s.final_update.map_or(String::new(), |u| u.to_string()),
                s.final_div.to_string(),
                s.velocity_dofs.to_string(),
                String::new(),
            ],
            Err(msg) => [e.id(), "error".into(), String::new(), String::new(), String::new(), String::new(), msg.clone()],
        };
        w.write_record(row).map_err(fail)?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}
