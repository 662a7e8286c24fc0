//! Run configuration files.
//!
//! The format is flat `key = value` text. `#` starts a comment, blank lines
//! are ignored and nested names are dotted. List-valued keys take
//! comma-separated items; `run.seeds` also accepts a half-open range `a..b`.
//!
//! ```text
//! # two precisions over five problems
//! problem.nx = 48
//! solver.tol = 1e-3, 1e-4
//! solver.restart_threshold = 0   # disabled
//! run.seeds = 1..6
//! run.policies = full64, mixed
//! ```

use std::collections::HashSet;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::generate::{ProblemSpec, RhsMode};
use crate::krylov::{ResidualMonitor, SolveConfig};
use crate::precision::PrecisionPolicy;

/// Where the operator of each run comes from.
#[derive(Clone, Debug, PartialEq)]
pub enum ProblemSource {
    /// [`crate::generate::generate`] with the run's seed.
    Generated,
    /// Identity operator on the configured grid with a noise right-hand side.
    Identity,
    /// A problem container written by [`super::container::write_problem`].
    File(PathBuf),
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub problem: ProblemSpec,
    pub source: ProblemSource,
    /// `solver.tol` holds the first tolerance; `tols` the full list.
    pub solver: SolveConfig,
    pub tols: Vec<f64>,
    pub policies: Vec<PrecisionPolicy>,
    pub seeds: Vec<u64>,
    pub output_dir: PathBuf,
}

impl Default for RunConfig {
    fn default() -> Self {
        let solver = SolveConfig::default();
        Self {
            problem: ProblemSpec::default(),
            source: ProblemSource::Generated,
            tols: vec![solver.tol],
            solver,
            policies: vec![PrecisionPolicy::FULL64, PrecisionPolicy::MIXED],
            seeds: vec![1],
            output_dir: PathBuf::from("out"),
        }
    }
}

pub const KEYS: &[&str] = &[
    "problem.nx",
    "problem.ny",
    "problem.nz",
    "problem.periodic_x",
    "problem.diag_dominance",
    "problem.asymmetry",
    "problem.vertical_strength",
    "problem.rhs",
    "problem.kind",
    "problem.file",
    "solver.tol",
    "solver.max_iter",
    "solver.restart_threshold",
    "solver.breakdown_eps",
    "solver.monitor",
    "sor.omega",
    "sor.n_iters",
    "run.seeds",
    "run.policies",
    "run.output_dir",
];

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self> {
        Self::parse_named(text, Path::new("<config>"))
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse_named(&text, path)
    }

    fn parse_named(text: &str, path: &Path) -> Result<Self> {
        let mut cfg = RunConfig::default();
        let mut seen = HashSet::new();
        for (n, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let bad = |msg: String| Error::Config(format!("{}:{}: {msg}", path.display(), n + 1));
            let (key, value) = line.split_once('=').ok_or_else(|| bad("expected `key = value`".into()))?;
            let key = key.trim();
            if !seen.insert(key.to_string()) {
                return Err(bad(format!("duplicate key `{key}`")));
            }
            cfg.set(key, value.trim()).map_err(|e| match e {
                Error::Config(m) => bad(m),
                other => other,
            })?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    /// Apply a `key=value` override, as given on the command line.
    pub fn apply_override(&mut self, assignment: &str) -> Result<()> {
        let (key, value) = assignment
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("override `{assignment}` is not `key=value`")))?;
        self.set(key.trim(), value.trim())?;
        self.validate()
    }

    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        match key {
            "problem.nx" => self.problem.nx = parse(key, value)?,
            "problem.ny" => self.problem.ny = parse(key, value)?,
            "problem.nz" => self.problem.nz = parse(key, value)?,
            "problem.periodic_x" => self.problem.periodic_x = parse(key, value)?,
            "problem.diag_dominance" => self.problem.diag_dominance = parse(key, value)?,
            "problem.asymmetry" => self.problem.asymmetry = parse(key, value)?,
            "problem.vertical_strength" => self.problem.vertical_strength = parse(key, value)?,
            "problem.rhs" => self.problem.rhs_mode = value.parse::<RhsMode>()?,
            "problem.kind" => {
                self.source = match value {
                    "generated" => ProblemSource::Generated,
                    "identity" => ProblemSource::Identity,
                    other => return Err(Error::Config(format!("unknown problem.kind `{other}`"))),
                }
            }
            "problem.file" => self.source = ProblemSource::File(PathBuf::from(value)),
            "solver.tol" => {
                self.tols = parse_list(key, value)?;
                self.solver.tol = self.tols[0];
            }
            "solver.max_iter" => self.solver.max_iter = parse(key, value)?,
            "solver.restart_threshold" => {
                let th: usize = parse(key, value)?;
                self.solver.restart_threshold = (th > 0).then_some(th);
            }
            "solver.breakdown_eps" => self.solver.breakdown_eps = Some(parse(key, value)?),
            "solver.monitor" => self.solver.monitor = value.parse::<ResidualMonitor>()?,
            "sor.omega" => self.solver.sor.omega = parse(key, value)?,
            "sor.n_iters" => self.solver.sor.n_iters = parse(key, value)?,
            "run.seeds" => self.seeds = parse_seeds(value)?,
            "run.policies" => self.policies = parse_list(key, value)?,
            "run.output_dir" => self.output_dir = PathBuf::from(value),
            other => return Err(Error::Config(format!("unknown key `{other}`"))),
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        if self.seeds.is_empty() || self.policies.is_empty() || self.tols.is_empty() {
            return Err(Error::Config("need at least one seed, policy and tolerance".into()));
        }
        self.problem.validate()?;
        for &tol in &self.tols {
            SolveConfig { tol, ..self.solver.clone() }.validate()?;
        }
        Ok(())
    }

    /// Solver configuration for one tolerance of the list.
    pub fn solver_for(&self, tol: f64) -> SolveConfig {
        SolveConfig { tol, ..self.solver.clone() }
    }
}

fn parse<T: FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .parse()
        .map_err(|_| Error::Config(format!("cannot parse `{value}` for {key}")))
}

fn parse_list<T: FromStr>(key: &str, value: &str) -> Result<Vec<T>> {
    let items: Vec<T> = value
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| parse(key, s))
        .collect::<Result<_>>()?;
    if items.is_empty() {
        return Err(Error::Config(format!("{key} needs at least one value")));
    }
    Ok(items)
}

fn parse_seeds(value: &str) -> Result<Vec<u64>> {
    if let Some((a, b)) = value.split_once("..") {
        let a: u64 = parse("run.seeds", a.trim())?;
        let b: u64 = parse("run.seeds", b.trim())?;
        if a >= b {
            return Err(Error::Config(format!("empty seed range `{value}`")));
        }
        return Ok((a..b).collect());
    }
    parse_list("run.seeds", value)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::precision::Mode;

    #[test]
    fn defaults_match_documented_values() {
        let c = RunConfig::parse("").unwrap();
        assert_eq!((c.problem.nx, c.problem.ny, c.problem.nz), (48, 36, 20));
        assert_eq!(c.problem.diag_dominance, 1.2);
        assert_eq!(c.problem.asymmetry, 0.1);
        assert_eq!(c.problem.vertical_strength, 5.0);
        assert_eq!(c.solver.sor.omega, 1.5);
        assert_eq!(c.solver.sor.n_iters, 3);
        assert_eq!(c.solver.tol, 1e-4);
        assert_eq!(c.solver.max_iter, 500);
        assert_eq!(c.solver.restart_threshold, Some(150));
    }

    #[test]
    fn full_file() {
        let text = "
            # comment
            problem.nx = 8   # trailing
            problem.ny=6
            problem.nz = 4
            problem.periodic_x = false
            problem.rhs = random
            solver.tol = 1e-3, 1e-4
            solver.restart_threshold = 0
            solver.monitor = true
            sor.omega = 1.2
            run.seeds = 3..6
            run.policies = full32, mixed-r32
            run.output_dir = results
        ";
        let c = RunConfig::parse(text).unwrap();
        assert_eq!(c.problem.nx, 8);
        assert!(!c.problem.periodic_x);
        assert_eq!(c.problem.rhs_mode, RhsMode::Random);
        assert_eq!(c.tols, vec![1e-3, 1e-4]);
        assert_eq!(c.solver.tol, 1e-3);
        assert_eq!(c.solver.restart_threshold, None);
        assert_eq!(c.solver.monitor, ResidualMonitor::True);
        assert_eq!(c.seeds, vec![3, 4, 5]);
        assert_eq!(c.policies[1].mode, Mode::Mixed);
        assert!(!c.policies[1].reduce64);
        assert_eq!(c.output_dir, PathBuf::from("results"));
    }

    #[test]
    fn errors_name_the_line() {
        let err = RunConfig::parse("problem.nx = 4\nproblem.bogus = 1\n").unwrap_err().to_string();
        assert!(err.contains(":2:"), "{err}");
        let err = RunConfig::parse("problem.nx 4\n").unwrap_err().to_string();
        assert!(err.contains(":1:"), "{err}");
        assert!(RunConfig::parse("problem.nx = 4\nproblem.nx = 5\n").is_err());
        assert!(RunConfig::parse("problem.nx = four\n").is_err());
        assert!(RunConfig::parse("run.seeds = 5..5\n").is_err());
        assert!(RunConfig::parse("solver.tol = 2\n").is_err());
    }

    #[test]
    fn overrides() {
        let mut c = RunConfig::default();
        c.apply_override("solver.max_iter=400").unwrap();
        assert_eq!(c.solver.max_iter, 400);
        assert!(c.apply_override("solver.max_iter=40").is_err());
        assert!(c.apply_override("solver.max_iter").is_err());
        assert!(c.apply_override("problem.nx=0").is_err());
    }

    #[test]
    fn every_key_is_settable() {
        let values = [
            "4", "4", "4", "true", "1.5", "0.2", "3", "manufactured", "identity", "p.bin", "1e-3", "50",
            "10", "1e-5", "recurrence", "1.0", "2", "1, 2", "full64", "o",
        ];
        assert_eq!(values.len(), KEYS.len());
        let mut c = RunConfig::default();
        for (k, v) in KEYS.iter().zip(values) {
            c.set(k, v).unwrap_or_else(|e| panic!("{k}: {e}"));
        }
    }
}
