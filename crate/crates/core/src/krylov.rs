//! Right-preconditioned ("post-conditioned") BiCGstab under a precision policy.
//!
//! The solver works on `A C C^-1 x = b` with `C^-1` applied by tri-SOR sweeps.
//! Updates of `x` go through the preconditioned directions, so `x` stays in
//! the original variables and no unwinding solve is needed at the end.
//!
//! Per iteration, with `rh` the shadow residual:
//!
//! ```text
//! z  = C^-1 p        v = A z         alpha = rho / (rh . v)
//! s  = r - alpha v   (early exit if ||s|| / ||b|| <= tol)
//! zs = C^-1 s        t = A zs        w = (t . s) / (t . t)
//! x += alpha z + w zs                r = s - w t
//! rho' = rh . r      beta = (rho' / rho) (alpha / w)
//! p  = r + beta (p - w v)
//! ```
//!
//! Work vectors, operator and preconditioner factors are stored at the
//! policy's working width; the solution at its solution width. Dot products
//! and norms go through the fixed-shape pairwise reduction at the policy's
//! reduction width, and the scalars derived from them are rounded to that
//! width.
//!
//! A restart rebuilds the residual from `x`, resets the shadow residual and
//! search direction, and is triggered by a flagged breakdown, by
//! `restart_threshold` iterations since the last (re)start, or by the
//! recurrence claiming convergence while the 64-bit true residual is more than
//! [`CONVERGENCE_GUARD`] times the tolerance.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result, SolveFailure};
use crate::generate::Problem;
use crate::grid::Field;
use crate::operator::{residual_into, BandedMatrix};
use crate::precision::{Mode, PrecisionPolicy, Real, SliceRef, Width};
use crate::precond::{factor_t, tri_sor_into, SorParams, TriFactor};
use crate::reduce;

/// Largest accepted ratio of the exit true residual to the tolerance.
pub const CONVERGENCE_GUARD: f64 = 10.0;

#[derive(Clone, Debug, PartialEq)]
pub struct SolveConfig {
    /// Halting threshold on the relative residual. Zero runs to `max_iter`.
    pub tol: f64,
    pub max_iter: usize,
    /// Iterations since the last (re)start that force a restart; `None` disables.
    pub restart_threshold: Option<usize>,
    /// Relative threshold for breakdown detection; `None` uses `1e3 * eps` of
    /// the working width.
    pub breakdown_eps: Option<f64>,
    pub sor: SorParams,
    pub monitor: ResidualMonitor,
}

/// Which residual is recorded in the history and tested against `tol`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub enum ResidualMonitor {
    /// Norm of the solver's own residual vector at the reduction width.
    #[default]
    Recurrence,
    /// `||b - A x_i|| / ||b||` recomputed in 64-bit against the 64-bit problem
    /// after every iteration. Costs one extra 64-bit operator application.
    True,
}

impl fmt::Display for ResidualMonitor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ResidualMonitor::Recurrence => "recurrence",
            ResidualMonitor::True => "true",
        })
    }
}

impl FromStr for ResidualMonitor {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "recurrence" => Ok(ResidualMonitor::Recurrence),
            "true" => Ok(ResidualMonitor::True),
            other => Err(Error::Config(format!("unknown residual monitor `{other}`"))),
        }
    }
}

impl Default for SolveConfig {
    fn default() -> Self {
        Self {
            tol: 1e-4,
            max_iter: 500,
            restart_threshold: Some(150),
            breakdown_eps: None,
            sor: SorParams::default(),
            monitor: ResidualMonitor::Recurrence,
        }
    }
}

impl SolveConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.tol >= 0.0 && self.tol < 1.0) {
            return Err(Error::Config(format!("tol must be in [0, 1), got {}", self.tol)));
        }
        if let Some(th) = self.restart_threshold {
            if th == 0 || th > self.max_iter {
                return Err(Error::Config(format!(
                    "restart_threshold {th} must be in 1..={}",
                    self.max_iter
                )));
            }
        }
        if let Some(eps) = self.breakdown_eps {
            if !(eps >= 0.0 && eps.is_finite()) {
                return Err(Error::Config(format!("breakdown_eps must be non-negative, got {eps}")));
            }
        }
        self.sor.validate()
    }

    pub fn breakdown_eps_for(&self, working: Width) -> f64 {
        self.breakdown_eps.unwrap_or(1e3 * working.epsilon())
    }
}

/// Which BiCGstab scalar triggered a breakdown.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BreakdownScalar {
    /// `rho = rh . r` nearly orthogonal.
    Rho,
    /// `rh . v` nearly orthogonal.
    ShadowV,
    /// `t . t` underflowed.
    TT,
    /// Stabilisation weight `w` vanished.
    Omega,
}

impl BreakdownScalar {
    pub fn name(self) -> &'static str {
        match self {
            BreakdownScalar::Rho => "rho",
            BreakdownScalar::ShadowV => "rhat.v",
            BreakdownScalar::TT => "t.t",
            BreakdownScalar::Omega => "omega",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BreakdownEvent {
    pub iteration: usize,
    pub scalar: BreakdownScalar,
    pub value: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RestartCause {
    Breakdown,
    Threshold,
    /// Recurrence residual met the tolerance but the true residual did not.
    FalseConvergence,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RestartEvent {
    /// Completed iterations at the time of the restart.
    pub iteration: usize,
    pub cause: RestartCause,
    /// Relative residual recomputed from `x` at the restart.
    pub residual: f64,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct SolveReport {
    /// `(iteration, R)`; entry 0 is the initial residual, then one per completed iteration.
    pub history: Vec<(usize, f64)>,
    pub converged: bool,
    pub iterations: usize,
    pub restarts: Vec<RestartEvent>,
    pub breakdowns: Vec<BreakdownEvent>,
    /// `||b - A x|| / ||b||` in 64-bit against the 64-bit problem at exit.
    pub final_true_r: f64,
    /// `||x - x_ref|| / ||x_ref||` when a reference solution exists.
    pub final_true_error: Option<f64>,
    pub failure: Option<SolveFailure>,
}

impl SolveReport {
    pub fn restart_iterations(&self) -> Vec<usize> {
        self.restarts.iter().map(|r| r.iteration).collect()
    }

    /// Last recorded relative residual.
    pub fn final_residual(&self) -> f64 {
        self.history.last().map_or(f64::NAN, |h| h.1)
    }

    /// First iteration whose recorded residual is at most `level`.
    pub fn iterations_to(&self, level: f64) -> Option<usize> {
        self.history.iter().find(|h| h.1 <= level).map(|h| h.0)
    }
}

/// Solution field together with its report.
#[derive(Clone, Debug)]
pub struct Solution {
    pub x: Field<f64>,
    pub report: SolveReport,
}

/// Solution storage handed to observers.
pub type Iterate<'a> = SliceRef<'a>;

/// Hooks into a running solve. Default methods do nothing.
pub trait SolveObserver {
    /// Called after each completed iteration with the recorded residual.
    fn on_iteration(&mut self, _iteration: usize, _residual: f64, _x: Iterate<'_>) {}
    /// Called after each restart with the iterate the residual was rebuilt from.
    fn on_restart(&mut self, _event: &RestartEvent, _x: Iterate<'_>) {}
}

struct NoObserver;
impl SolveObserver for NoObserver {}

/// Flag a breakdown from the scalars of the current iteration.
///
/// `norms` carries `(||rh||, ||r||, ||v||)`; `tt` is `t . t` when known and
/// counts as underflowed below the smallest normal value of `width`.
/// NaN scalars always flag.
#[allow(clippy::neg_cmp_op_on_partial_ord)]
pub fn detect_breakdown(
    iteration: usize,
    rho: Option<f64>,
    rh_v: Option<f64>,
    tt: Option<f64>,
    norms: (f64, f64, f64),
    eps: f64,
    width: Width,
) -> Option<BreakdownEvent> {
    let (nrh, nr, nv) = norms;
    if let Some(rho) = rho {
        if !(rho.abs() > eps * nrh * nr) {
            return Some(BreakdownEvent { iteration, scalar: BreakdownScalar::Rho, value: rho });
        }
    }
    if let Some(rv) = rh_v {
        if !(rv.abs() > eps * nrh * nv) {
            return Some(BreakdownEvent { iteration, scalar: BreakdownScalar::ShadowV, value: rv });
        }
    }
    if let Some(tt) = tt {
        if !(tt >= width.min_positive() && tt.is_finite()) {
            return Some(BreakdownEvent { iteration, scalar: BreakdownScalar::TT, value: tt });
        }
    }
    None
}

/// Solve a generated problem under `policy`.
///
/// The operator and right-hand side are rounded to the working width,
/// the tri-SOR factors computed at that width, and BiCGstab run from
/// `problem.x0`.
pub fn bicgstab_solve(problem: &Problem<f64>, config: &SolveConfig, policy: &PrecisionPolicy) -> Result<Solution> {
    bicgstab_solve_observed(problem, config, policy, &mut NoObserver)
}

pub fn bicgstab_solve_observed(
    problem: &Problem<f64>,
    config: &SolveConfig,
    policy: &PrecisionPolicy,
    observer: &mut dyn SolveObserver,
) -> Result<Solution> {
    config.validate()?;
    match policy.mode {
        Mode::Full64 => {
            let f = factor_t(&problem.matrix)?;
            run::<f64, f64>(problem, &problem.matrix, &problem.rhs, &f, config, policy, observer)
        }
        Mode::Full32 => {
            let low = problem.cast::<f32>();
            let f = factor_t(&low.matrix)?;
            run::<f32, f32>(problem, &low.matrix, &low.rhs, &f, config, policy, observer)
        }
        Mode::Mixed => {
            let low = problem.cast::<f32>();
            let f = factor_t(&low.matrix)?;
            run::<f32, f64>(problem, &low.matrix, &low.rhs, &f, config, policy, observer)
        }
    }
}

/// Solve with a caller-provided operator, right-hand side and factors at
/// working width `W` and solution width `X`.
///
/// `reference` supplies the 64-bit problem used for the exit true residual.
pub fn bicgstab_solve_with<W: Real, X: Real>(
    reference: &Problem<f64>,
    a: &BandedMatrix<W>,
    b: &Field<W>,
    factor: &TriFactor<W>,
    config: &SolveConfig,
    policy: &PrecisionPolicy,
    observer: &mut dyn SolveObserver,
) -> Result<Solution> {
    config.validate()?;
    if W::WIDTH != policy.working() || X::WIDTH != policy.solution() {
        return Err(Error::Config(format!("storage widths do not match policy {policy}")));
    }
    run::<W, X>(reference, a, b, factor, config, policy, observer)
}

fn iterate_view<X: Real>(x: &[X]) -> Iterate<'_> {
    X::view(x)
}

/// Krylov state at working width.
struct Krylov<W> {
    r: Vec<W>,
    rh: Vec<W>,
    p: Vec<W>,
    v: Vec<W>,
    s: Vec<W>,
    t: Vec<W>,
    z: Vec<W>,
    zs: Vec<W>,
    scratch: Vec<W>,
    rho: f64,
    rh_norm: f64,
}

struct Engine<'a, W, X> {
    a: &'a BandedMatrix<W>,
    b: &'a [W],
    factor: &'a TriFactor<W>,
    reference: &'a Problem<f64>,
    config: &'a SolveConfig,
    policy: &'a PrecisionPolicy,
    rw: Width,
    b_norm: f64,
    x: Vec<X>,
    k: Krylov<W>,
    report: SolveReport,
}

fn run<W: Real, X: Real>(
    reference: &Problem<f64>,
    a: &BandedMatrix<W>,
    b: &Field<W>,
    factor: &TriFactor<W>,
    config: &SolveConfig,
    policy: &PrecisionPolicy,
    observer: &mut dyn SolveObserver,
) -> Result<Solution> {
    let grid = *reference.grid();
    grid.check_same(a.grid())?;
    grid.check_same(b.grid())?;
    grid.check_same(factor.grid())?;
    let rw = policy.reduction();
    let b_norm = reduce::norm2(b.as_slice(), rw);
    if b_norm == 0.0 {
        return Err(Error::DegenerateRhs);
    }
    let n = grid.len();
    let zeros = || vec![W::zero(); n];
    let mut e = Engine {
        a,
        b: b.as_slice(),
        factor,
        reference,
        config,
        policy,
        rw,
        b_norm,
        x: reference.x0.as_slice().iter().map(|v| X::from_f64(*v)).collect(),
        k: Krylov {
            r: zeros(),
            rh: zeros(),
            p: zeros(),
            v: zeros(),
            s: zeros(),
            t: zeros(),
            z: zeros(),
            zs: zeros(),
            scratch: vec![W::zero(); grid.nz()],
            rho: 0.0,
            rh_norm: 0.0,
        },
        report: SolveReport::default(),
    };
    let outcome = e.iterate(observer);
    e.finish(outcome)
}

enum Outcome {
    Converged,
    MaxIter,
    Failed(SolveFailure),
}

impl<W: Real, X: Real> Engine<'_, W, X> {
    fn round(&self, v: f64) -> f64 {
        self.rw.round(v)
    }

    fn dot(&self, a: &[W], b: &[W]) -> f64 {
        reduce::dot(a, b, self.rw)
    }

    fn norm(&self, a: &[W]) -> f64 {
        reduce::norm2(a, self.rw)
    }

    /// Rebuild residual, shadow residual and direction from `x`; returns the
    /// relative residual.
    fn reset(&mut self) -> f64 {
        let r_norm = residual_into(self.a, &self.x, self.b, self.policy, &mut self.k.r);
        self.k.rh.copy_from_slice(&self.k.r);
        self.k.p.copy_from_slice(&self.k.r);
        self.k.rho = self.dot(&self.k.rh, &self.k.r);
        self.k.rh_norm = self.norm(&self.k.rh);
        r_norm / self.b_norm
    }

    fn restart(&mut self, cause: RestartCause, observer: &mut dyn SolveObserver) {
        let residual = self.reset();
        let event = RestartEvent { iteration: self.report.iterations, cause, residual };
        self.report.restarts.push(event);
        observer.on_restart(&event, iterate_view(&self.x));
    }

    fn precondition(&mut self, src_is_p: bool) -> Result<(), SolveFailure> {
        let (src, dst) = if src_is_p { (&self.k.p, &mut self.k.z) } else { (&self.k.s, &mut self.k.zs) };
        tri_sor_into(self.a, self.factor, src, &self.config.sor, dst, &mut self.k.scratch)
            .map_err(|_| SolveFailure::Overflow)
    }

    /// 64-bit relative residual of the current iterate against the reference problem.
    fn true_residual(&self) -> f64 {
        let x64: Vec<f64> = self.x.iter().map(|v| v.as_f64()).collect();
        true_relative_residual(self.reference, &x64)
    }

    fn accept_convergence(&self) -> bool {
        self.true_residual() <= CONVERGENCE_GUARD * self.config.tol
    }

    fn monitored(&self, recurrence: f64) -> f64 {
        match self.config.monitor {
            ResidualMonitor::Recurrence => recurrence,
            ResidualMonitor::True => self.true_residual(),
        }
    }

    fn record(&mut self, residual: f64, observer: &mut dyn SolveObserver) {
        let it = self.report.iterations;
        self.report.history.push((it, residual));
        observer.on_iteration(it, residual, iterate_view(&self.x));
    }

    fn iterate(&mut self, observer: &mut dyn SolveObserver) -> Outcome {
        let tol = self.config.tol;
        let eps = self.config.breakdown_eps_for(self.policy.working());
        let r0 = self.reset();
        if !r0.is_finite() {
            self.report.history.push((0, r0));
            return Outcome::Failed(SolveFailure::Overflow);
        }
        let r0 = self.monitored(r0);
        self.report.history.push((0, r0));
        if r0 <= tol && self.accept_convergence() {
            return Outcome::Converged;
        }
        let mut since_restart = 0usize;
        // iteration index of the most recent restart, for consecutive-breakdown detection
        let mut last_restart_at: Option<usize> = None;

        while self.report.iterations < self.config.max_iter {
            if let Some(th) = self.config.restart_threshold {
                if since_restart >= th {
                    self.restart(RestartCause::Threshold, observer);
                    last_restart_at = Some(self.report.iterations);
                    since_restart = 0;
                }
            }
            let it = self.report.iterations;

            if let Err(f) = self.precondition(true) {
                return Outcome::Failed(f);
            }
            self.a.apply_into(&self.k.z, &mut self.k.v);
            let rh_v = self.round(self.dot(&self.k.rh, &self.k.v));
            let v_norm = self.norm(&self.k.v);
            let r_norm = self.norm(&self.k.r);
            if let Some(ev) = detect_breakdown(it, None, Some(rh_v), None, (self.k.rh_norm, r_norm, v_norm), eps, self.rw)
            {
                match self.on_breakdown(ev, &mut last_restart_at, observer) {
                    Ok(()) => {
                        since_restart = 0;
                        continue;
                    }
                    Err(f) => return Outcome::Failed(f),
                }
            }
            let alpha = self.round(self.k.rho / rh_v);
            let alpha_w = W::from_f64(alpha);
            for ((s, r), v) in self.k.s.iter_mut().zip(&self.k.r).zip(&self.k.v) {
                *s = *r - alpha_w * *v;
            }
            let s_rel = self.norm(&self.k.s) / self.b_norm;
            if !s_rel.is_finite() || !alpha.is_finite() {
                return Outcome::Failed(SolveFailure::Overflow);
            }
            if s_rel <= tol {
                for (x, z) in self.x.iter_mut().zip(&self.k.z) {
                    *x = *x + X::from_f64((alpha_w * *z).as_f64());
                }
                self.k.r.copy_from_slice(&self.k.s);
                self.report.iterations += 1;
                let rel = self.monitored(s_rel);
                self.record(rel, observer);
                if rel <= tol && self.accept_convergence() {
                    return Outcome::Converged;
                }
                self.restart(RestartCause::FalseConvergence, observer);
                last_restart_at = Some(self.report.iterations);
                since_restart = 0;
                continue;
            }

            if let Err(f) = self.precondition(false) {
                return Outcome::Failed(f);
            }
            self.a.apply_into(&self.k.zs, &mut self.k.t);
            let tt = self.round(self.dot(&self.k.t, &self.k.t));
            if let Some(ev) = detect_breakdown(it, None, None, Some(tt), (0.0, 0.0, 0.0), eps, self.rw) {
                match self.on_breakdown(ev, &mut last_restart_at, observer) {
                    Ok(()) => {
                        since_restart = 0;
                        continue;
                    }
                    Err(f) => return Outcome::Failed(f),
                }
            }
            let omega = self.round(self.round(self.dot(&self.k.t, &self.k.s)) / tt);
            if omega == 0.0 || !omega.is_finite() {
                let ev = BreakdownEvent { iteration: it, scalar: BreakdownScalar::Omega, value: omega };
                match self.on_breakdown(ev, &mut last_restart_at, observer) {
                    Ok(()) => {
                        since_restart = 0;
                        continue;
                    }
                    Err(f) => return Outcome::Failed(f),
                }
            }
            let omega_w = W::from_f64(omega);
            for ((x, z), zs) in self.x.iter_mut().zip(&self.k.z).zip(&self.k.zs) {
                *x = *x + X::from_f64((alpha_w * *z + omega_w * *zs).as_f64());
            }
            for ((r, s), t) in self.k.r.iter_mut().zip(&self.k.s).zip(&self.k.t) {
                *r = *s - omega_w * *t;
            }
            self.report.iterations += 1;
            since_restart += 1;
            let r_norm = self.norm(&self.k.r);
            let rel = r_norm / self.b_norm;
            if !rel.is_finite() {
                self.record(rel, observer);
                return Outcome::Failed(SolveFailure::Overflow);
            }
            let rel = self.monitored(rel);
            self.record(rel, observer);
            if rel <= tol {
                if self.accept_convergence() {
                    return Outcome::Converged;
                }
                self.restart(RestartCause::FalseConvergence, observer);
                last_restart_at = Some(self.report.iterations);
                since_restart = 0;
                continue;
            }

            let rho_new = self.round(self.dot(&self.k.rh, &self.k.r));
            if let Some(ev) = detect_breakdown(
                self.report.iterations,
                Some(rho_new),
                None,
                None,
                (self.k.rh_norm, r_norm, 0.0),
                eps,
                self.rw,
            ) {
                match self.on_breakdown(ev, &mut last_restart_at, observer) {
                    Ok(()) => {
                        since_restart = 0;
                        continue;
                    }
                    Err(f) => return Outcome::Failed(f),
                }
            }
            let beta = self.round(self.round(rho_new / self.k.rho) * self.round(alpha / omega));
            self.k.rho = rho_new;
            let beta_w = W::from_f64(beta);
            for ((p, r), v) in self.k.p.iter_mut().zip(&self.k.r).zip(&self.k.v) {
                *p = *r + beta_w * (*p - omega_w * *v);
            }
        }
        Outcome::MaxIter
    }

    fn on_breakdown(
        &mut self,
        ev: BreakdownEvent,
        last_restart_at: &mut Option<usize>,
        observer: &mut dyn SolveObserver,
    ) -> Result<(), SolveFailure> {
        self.report.breakdowns.push(ev);
        if *last_restart_at == Some(self.report.iterations) {
            return Err(SolveFailure::ConsecutiveBreakdown);
        }
        self.restart(RestartCause::Breakdown, observer);
        *last_restart_at = Some(self.report.iterations);
        Ok(())
    }

    fn finish(mut self, outcome: Outcome) -> Result<Solution> {
        let x: Vec<f64> = self.x.iter().map(|v| v.as_f64()).collect();
        self.report.final_true_r = true_relative_residual(self.reference, &x);
        self.report.final_true_error = self.reference.x_ref.as_ref().map(|xr| relative_error(&x, xr.as_slice()));
        match outcome {
            Outcome::Converged => self.report.converged = true,
            Outcome::MaxIter => {}
            Outcome::Failed(kind) => {
                self.report.failure = Some(kind);
                return Err(Error::Solve { kind, report: Box::new(self.report) });
            }
        }
        let x = Field::from_vec(*self.reference.grid(), x)?;
        Ok(Solution { x, report: self.report })
    }
}

/// `||b - A x||_2 / ||b||_2` in 64-bit with pairwise sums.
pub fn true_relative_residual(problem: &Problem<f64>, x: &[f64]) -> f64 {
    let mut ax = vec![0.0; x.len()];
    problem.matrix.apply_into(x, &mut ax);
    let b = problem.rhs.as_slice();
    let r: Vec<f64> = b.iter().zip(&ax).map(|(bi, yi)| bi - yi).collect();
    reduce::norm2(&r, Width::Bits64) / reduce::norm2(b, Width::Bits64)
}

/// `||x - x_ref||_2 / ||x_ref||_2`.
pub fn relative_error(x: &[f64], x_ref: &[f64]) -> f64 {
    let d: Vec<f64> = x.iter().zip(x_ref).map(|(a, b)| a - b).collect();
    reduce::norm2(&d, Width::Bits64) / reduce::norm2(x_ref, Width::Bits64)
}
