//! CSV artifacts: histories, run summaries and sweep statistics.
//!
//! Floats that come out of a solve are printed with 17 significant digits so
//! they round-trip exactly. Line endings are LF.

use std::path::Path;

use super::{RunConfig, RunRecord};
use crate::error::{Error, Result};
use crate::krylov::SolveReport;

pub const HISTORY_HEADER: &str = "iteration,residual";
pub const SUMMARY_HEADER: &str = "seed,policy,tol,converged,iterations,restarts,final_true_R,final_true_error";
pub const STATS_HEADER: &str = "tol,policy,runs,converged,mean_iterations,stderr_iterations";

pub fn history(report: &SolveReport) -> String {
    let mut out = String::from(HISTORY_HEADER);
    out.push('\n');
    for (it, r) in &report.history {
        out += &format!("{it},{r:.16e}\n");
    }
    out
}

pub fn summary(records: &[RunRecord]) -> String {
    let mut out = String::from(SUMMARY_HEADER);
    out.push('\n');
    for r in records {
        let rep = &r.report;
        let err = rep.final_true_error.map_or(String::new(), |e| format!("{e:.16e}"));
        out += &format!(
            "{},{},{:e},{},{},{},{:.16e},{}\n",
            r.seed,
            r.policy,
            r.tol,
            rep.converged,
            rep.iterations,
            rep.restarts.len(),
            rep.final_true_r,
            err
        );
    }
    out
}

/// Iteration statistics of one (tolerance, policy) cell.
#[derive(Clone, Debug, PartialEq)]
pub struct StatsRow {
    pub tol: f64,
    pub policy: String,
    pub runs: usize,
    pub converged: usize,
    pub mean_iterations: f64,
    /// Sample standard deviation over `sqrt(runs)`; zero for a single run.
    pub stderr_iterations: f64,
}

pub fn stats(cfg: &RunConfig, records: &[RunRecord]) -> Vec<StatsRow> {
    let mut rows = Vec::new();
    for &tol in &cfg.tols {
        for policy in &cfg.policies {
            let cell: Vec<&RunRecord> = records.iter().filter(|r| r.tol == tol && r.policy == *policy).collect();
            let its: Vec<f64> = cell.iter().map(|r| r.report.iterations as f64).collect();
            let n = its.len() as f64;
            let mean = its.iter().sum::<f64>() / n;
            let stderr = if its.len() > 1 {
                let var = its.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0);
                (var / n).sqrt()
            } else {
                0.0
            };
            rows.push(StatsRow {
                tol,
                policy: policy.to_string(),
                runs: cell.len(),
                converged: cell.iter().filter(|r| r.report.converged).count(),
                mean_iterations: mean,
                stderr_iterations: stderr,
            });
        }
    }
    rows
}

pub fn stats_csv(rows: &[StatsRow]) -> String {
    let mut out = String::from(STATS_HEADER);
    out.push('\n');
    for r in rows {
        out += &format!(
            "{:e},{},{},{},{},{}\n",
            r.tol, r.policy, r.runs, r.converged, r.mean_iterations, r.stderr_iterations
        );
    }
    out
}

/// A parsed history file.
#[derive(Clone, Debug, PartialEq)]
pub struct History {
    /// File stem, used as the legend label.
    pub label: String,
    pub points: Vec<(usize, f64)>,
}

pub fn parse_history(text: &str, path: &Path) -> Result<History> {
    let bad = |line: usize, msg: String| Error::Data { path: path.to_path_buf(), line, msg };
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, h)) if h.trim() == HISTORY_HEADER => {}
        Some((_, h)) => return Err(bad(1, format!("expected header `{HISTORY_HEADER}`, found `{h}`"))),
        None => return Err(bad(1, "empty file".into())),
    }
    let mut points = Vec::new();
    for (n, line) in lines {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 2 {
            return Err(bad(n + 1, format!("expected 2 fields, found {}", fields.len())));
        }
        let it = fields[0]
            .trim()
            .parse::<usize>()
            .map_err(|_| bad(n + 1, format!("bad iteration `{}`", fields[0])))?;
        let r = fields[1]
            .trim()
            .parse::<f64>()
            .map_err(|_| bad(n + 1, format!("bad residual `{}`", fields[1])))?;
        points.push((it, r));
    }
    if points.is_empty() {
        return Err(bad(2, "history has no rows".into()));
    }
    let label = path.file_stem().map_or_else(|| path.display().to_string(), |s| s.to_string_lossy().into_owned());
    Ok(History { label, points })
}

pub fn read_history(path: &Path) -> Result<History> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_history(&text, path)
}
