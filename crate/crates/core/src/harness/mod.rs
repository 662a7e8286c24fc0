//! Runs, sweeps and their artifacts.
//!
//! Every artifact is a pure function of the [`RunConfig`]: runs may execute on
//! several threads, but rows are always written in configuration order and
//! files are replaced atomically.

pub mod config;
pub mod container;
pub mod csv;
pub mod plot;

use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

pub use config::{ProblemSource, RunConfig};

use crate::error::{Error, Result};
use crate::generate::{generate, noise, Problem};
use crate::grid::Field;
use crate::krylov::{bicgstab_solve, SolveReport};
use crate::operator::BandedMatrix;
use crate::perf::{working_set, Decomposition};
use crate::precision::PrecisionPolicy;

/// Outcome of one (seed, policy, tolerance) run.
#[derive(Clone, Debug)]
pub struct RunRecord {
    pub seed: u64,
    pub policy: PrecisionPolicy,
    pub tol: f64,
    /// Present for failed runs as well; see `report.failure`.
    pub report: SolveReport,
}

/// Build the problem of one seed.
pub fn build_problem(cfg: &RunConfig, seed: u64) -> Result<Problem<f64>> {
    match &cfg.source {
        ProblemSource::Generated => generate(&cfg.problem.clone().with_seed(seed)),
        ProblemSource::Identity => {
            let grid = cfg.problem.grid()?;
            let rhs = Field::from_vec(grid, (0..grid.len() as u64).map(|p| noise(seed, 7, p)).collect())?;
            Ok(Problem {
                matrix: BandedMatrix::identity(grid),
                x_ref: Some(rhs.clone()),
                rhs,
                x0: Field::zeros(grid),
            })
        }
        ProblemSource::File(path) => container::read_problem(path),
    }
}

/// Solve one problem, turning solver failures into data.
pub fn run_one(problem: &Problem<f64>, cfg: &RunConfig, seed: u64, policy: PrecisionPolicy, tol: f64) -> Result<RunRecord> {
    let report = match bicgstab_solve(problem, &cfg.solver_for(tol), &policy) {
        Ok(sol) => sol.report,
        Err(Error::Solve { report, .. }) => *report,
        Err(e) => return Err(e),
    };
    Ok(RunRecord { seed, policy, tol, report })
}

/// All runs of the cross product seeds x policies x tolerances, in that
/// nesting order.
pub fn run_all(cfg: &RunConfig) -> Result<Vec<RunRecord>> {
    cfg.validate()?;
    let jobs: Vec<(u64, PrecisionPolicy, f64)> = cfg
        .seeds
        .iter()
        .flat_map(|&s| cfg.policies.iter().flat_map(move |&p| cfg.tols.iter().map(move |&t| (s, p, t))))
        .collect();
    let workers = std::thread::available_parallelism().map_or(1, |n| n.get()).min(jobs.len());
    let next = AtomicUsize::new(0);
    let slots: Vec<Mutex<Option<Result<RunRecord>>>> = jobs.iter().map(|_| Mutex::new(None)).collect();
    std::thread::scope(|scope| {
        for _ in 0..workers {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                let Some(&(seed, policy, tol)) = jobs.get(i) else { break };
                let out = build_problem(cfg, seed).and_then(|p| run_one(&p, cfg, seed, policy, tol));
                *slots[i].lock().unwrap() = Some(out);
            });
        }
    });
    slots.into_iter().map(|m| m.into_inner().unwrap().expect("job not run")).collect()
}

fn ensure_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
}

/// Write `contents` to `path` through a temporary file and a rename.
pub fn write_atomic(path: &Path, contents: &[u8]) -> Result<()> {
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    let tmp = PathBuf::from(tmp);
    std::fs::write(&tmp, contents).map_err(|e| Error::io(&tmp, e))?;
    std::fs::rename(&tmp, path).map_err(|e| Error::io(path, e))
}

/// `solve`: one tolerance; per-run histories plus `summary.csv`.
pub fn cmd_solve(cfg: &RunConfig) -> Result<Vec<RunRecord>> {
    if cfg.tols.len() != 1 {
        return Err(Error::Config("solve takes a single solver.tol; use sweep for several".into()));
    }
    let records = run_all(cfg)?;
    ensure_dir(&cfg.output_dir)?;
    for r in &records {
        let name = format!("history_{}_{}.csv", r.seed, r.policy);
        write_atomic(&cfg.output_dir.join(name), csv::history(&r.report).as_bytes())?;
    }
    write_atomic(&cfg.output_dir.join("summary.csv"), csv::summary(&records).as_bytes())?;
    Ok(records)
}

/// `sweep`: every tolerance; histories, `summary.csv` and `stats.csv`.
pub fn cmd_sweep(cfg: &RunConfig) -> Result<(Vec<RunRecord>, Vec<csv::StatsRow>)> {
    let records = run_all(cfg)?;
    ensure_dir(&cfg.output_dir)?;
    for r in &records {
        let name = format!("history_{}_{}_tol{:e}.csv", r.seed, r.policy, r.tol);
        write_atomic(&cfg.output_dir.join(name), csv::history(&r.report).as_bytes())?;
    }
    let stats = csv::stats(cfg, &records);
    write_atomic(&cfg.output_dir.join("summary.csv"), csv::summary(&records).as_bytes())?;
    write_atomic(&cfg.output_dir.join("stats.csv"), csv::stats_csv(&stats).as_bytes())?;
    Ok((records, stats))
}

/// `plot`: read history files and write one SVG.
pub fn cmd_plot(inputs: &[PathBuf], output: &Path) -> Result<()> {
    if inputs.is_empty() {
        return Err(Error::Config("plot needs at least one history file".into()));
    }
    let series = inputs.iter().map(|p| csv::read_history(p)).collect::<Result<Vec<_>>>()?;
    let svg = plot::render(&series);
    if let Some(dir) = output.parent().filter(|d| !d.as_os_str().is_empty()) {
        ensure_dir(dir)?;
    }
    write_atomic(output, svg.as_bytes())
}

/// `perf`: the working-set table.
pub fn cmd_perf(d: &Decomposition) -> Result<String> {
    let ws = working_set(d)?;
    let lv = ws.local_volume;
    let mut out = format!("LV={}\n", lv.points);
    if !lv.is_exact() {
        out += &format!("LV_exact={}/{}\n", lv.numerator, lv.denominator);
    }
    out += &format!(
        "N={}\nbytes32={}\nbytes64={}\ncache={}\nfits32={}\nfits64={}\n",
        ws.entries, ws.bytes32, ws.bytes64, d.cache_bytes, ws.fits32, ws.fits64
    );
    Ok(out)
}
