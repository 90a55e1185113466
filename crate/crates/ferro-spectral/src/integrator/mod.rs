//! Euler–Maruyama integration of the Galerkin SDE with a stopping radius,
//! counter-based Brownian increments and sequential ensembles.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use crate::error::{Error, Result};
use crate::galerkin::{GalerkinState, GalerkinSystem};
use crate::math;
use crate::operators::ProductEngine;
use crate::rng::StreamKey;

mod brownian;

pub use brownian::BrownianPath;

/// Default snapshot stride in steps.
pub const DEFAULT_SNAPSHOT_STRIDE: usize = 10;

/// Default stopping radius as a multiple of `E_tot(0)^{1/2}`.
pub const DEFAULT_RADIUS_FACTOR: f64 = 1e3;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Scheme {
    EulerMaruyama,
    /// Drift increment `ΥΔt / (1 + Δt‖Υ‖)`; diffusion untouched.
    TamedEm,
}

impl Scheme {
    pub fn as_str(self) -> &'static str {
        match self {
            Scheme::EulerMaruyama => "euler_maruyama",
            Scheme::TamedEm => "tamed_em",
        }
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Scheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "euler_maruyama" => Ok(Scheme::EulerMaruyama),
            "tamed_em" => Ok(Scheme::TamedEm),
            _ => Err(Error::InvalidConfig(format!("unknown scheme `{s}` (euler_maruyama | tamed_em)"))),
        }
    }
}

/// Stopping radius on `E_tot^{1/2}`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum StoppingRadius {
    /// `DEFAULT_RADIUS_FACTOR · E_tot(0)^{1/2}`, or no stopping when `E_tot(0) = 0`.
    Default,
    Fixed(f64),
    Never,
}

impl StoppingRadius {
    pub fn resolve(self, initial_energy: f64) -> f64 {
        match self {
            StoppingRadius::Default if initial_energy > 0.0 => DEFAULT_RADIUS_FACTOR * math::sqrt(initial_energy),
            StoppingRadius::Default | StoppingRadius::Never => f64::INFINITY,
            StoppingRadius::Fixed(r) => r,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RunConfig {
    pub horizon: f64,
    pub dt: f64,
    pub stopping_radius: StoppingRadius,
    pub scheme: Scheme,
    pub ensemble_size: usize,
    pub seed: u64,
    pub snapshot_stride: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            horizon: 1.0,
            dt: 1e-3,
            stopping_radius: StoppingRadius::Default,
            scheme: Scheme::EulerMaruyama,
            ensemble_size: 1,
            seed: 0,
            snapshot_stride: DEFAULT_SNAPSHOT_STRIDE,
        }
    }
}

impl RunConfig {
    /// Every violated constraint.
    pub fn violations(&self) -> Vec<String> {
        let mut out = Vec::new();
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            out.push(format!("dt = {} must be positive", self.dt));
        }
        if !(self.horizon.is_finite() && self.horizon >= self.dt) {
            out.push(format!("horizon = {} must be finite and at least dt", self.horizon));
        } else if self.dt > 0.0 {
            let n = self.horizon / self.dt;
            if math::abs(n - math::round(n)) > 1e-9 * n {
                out.push(format!("horizon {} is not an integer multiple of dt {}", self.horizon, self.dt));
            }
        }
        if let StoppingRadius::Fixed(r) = self.stopping_radius {
            if !(r > 0.0) {
                out.push(format!("stopping radius {r} must be positive"));
            }
        }
        if self.ensemble_size == 0 {
            out.push("ensemble size must be at least 1".into());
        }
        if self.snapshot_stride == 0 {
            out.push("snapshot stride must be at least 1".into());
        }
        out
    }

    pub fn validate(&self) -> Result<()> {
        let v = self.violations();
        if v.is_empty() {
            Ok(())
        } else {
            Err(Error::InvalidConfig(v.join("; ")))
        }
    }

    pub fn steps(&self) -> usize {
        math::round(self.horizon / self.dt) as usize
    }
}

/// One increment `y⁺ = y + ΥΔt + Σ_k Z_k Δβ_k` (tamed drift if requested).
pub fn step(
    state: &GalerkinState,
    drift: &GalerkinState,
    diffusion: &[GalerkinState],
    increments: &[f64],
    scheme: Scheme,
    dt: f64,
) -> Result<GalerkinState> {
    if diffusion.len() != increments.len() {
        return Err(Error::LengthMismatch { expected: diffusion.len(), found: increments.len() });
    }
    let factor = match scheme {
        Scheme::EulerMaruyama => dt,
        Scheme::TamedEm => dt / (1.0 + dt * drift.norm()),
    };
    let mut next = state.clone();
    next.axpy(factor, drift)?;
    for (col, &db) in diffusion.iter().zip(increments) {
        if db != 0.0 {
            next.axpy(db, col)?;
        }
    }
    if !next.is_finite() {
        return Err(Error::NonFinite("state after step".into()));
    }
    Ok(next)
}

/// Everything known about one completed step.
pub struct StepContext<'a, E: ProductEngine> {
    pub system: &'a GalerkinSystem<E>,
    pub index: usize,
    pub time: f64,
    pub dt: f64,
    pub before: &'a GalerkinState,
    pub drift: &'a GalerkinState,
    pub diffusion: &'a [GalerkinState],
    pub increments: &'a [f64],
    pub after: &'a GalerkinState,
}

/// Per-step hook, used to build ledgers alongside the trajectory.
pub trait StepObserver<E: ProductEngine> {
    fn observe(&mut self, ctx: &StepContext<'_, E>) -> Result<()>;
}

impl<E: ProductEngine> StepObserver<E> for () {
    fn observe(&mut self, _: &StepContext<'_, E>) -> Result<()> {
        Ok(())
    }
}

/// Non-finite blow-up of a member.
#[derive(Clone, Debug, PartialEq)]
pub struct Failure {
    pub step: usize,
    pub time: f64,
    pub message: String,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TrajectoryRecord {
    pub member: u64,
    pub seed: u64,
    pub radius: f64,
    pub times: Vec<f64>,
    pub states: Vec<GalerkinState>,
    /// Time at which `E_tot^{1/2} ≥ R` was first observed on the grid.
    pub stopped_at: Option<f64>,
    pub failure: Option<Failure>,
    pub steps_taken: usize,
}

impl TrajectoryRecord {
    pub fn last(&self) -> &GalerkinState {
        self.states.last().expect("at least the initial snapshot")
    }

    pub fn succeeded(&self) -> bool {
        self.failure.is_none()
    }
}

fn snapshot_due(step: usize, stride: usize, last: usize) -> bool {
    step % stride == 0 || step == last
}

/// Integrates with explicitly supplied increments.
pub fn integrate_with_path<E: ProductEngine, O: StepObserver<E>>(
    system: &GalerkinSystem<E>,
    initial: &GalerkinState,
    config: &RunConfig,
    path: &BrownianPath,
    observer: &mut O,
) -> Result<TrajectoryRecord> {
    config.validate()?;
    let steps = config.steps();
    let channels = system.noise().total_count();
    if path.channels() != channels || path.steps() < steps {
        return Err(Error::InvalidConfig(format!(
            "Brownian path has {} channels × {} steps, need {} × {}",
            path.channels(),
            path.steps(),
            channels,
            steps
        )));
    }
    if math::abs(path.dt() - config.dt) > 1e-12 * config.dt {
        return Err(Error::InvalidConfig(format!("path step {} differs from dt {}", path.dt(), config.dt)));
    }
    let radius = config.stopping_radius.resolve(system.energy(initial));
    let mut rec = TrajectoryRecord {
        member: path.member(),
        seed: path.seed(),
        radius,
        times: alloc::vec![0.0],
        states: alloc::vec![initial.clone()],
        stopped_at: None,
        failure: None,
        steps_taken: 0,
    };
    if math::sqrt(system.energy(initial)) >= radius {
        rec.stopped_at = Some(0.0);
        return Ok(rec);
    }
    let mut y = initial.clone();
    for n in 0..steps {
        let t = n as f64 * config.dt;
        let advanced = system.drift(&y).and_then(|drift| {
            let diffusion = system.diffusion(&y)?;
            let dw = path.increments_at(n);
            let next = step(&y, &drift, &diffusion, dw, config.scheme, config.dt)?;
            observer.observe(&StepContext {
                system,
                index: n,
                time: t,
                dt: config.dt,
                before: &y,
                drift: &drift,
                diffusion: &diffusion,
                increments: dw,
                after: &next,
            })?;
            Ok(next)
        });
        let next = match advanced {
            Ok(next) => next,
            Err(Error::NonFinite(what)) => {
                rec.failure = Some(Failure { step: n, time: t, message: format!("non-finite {what}") });
                if rec.times.last() != Some(&t) {
                    rec.times.push(t);
                    rec.states.push(y);
                }
                return Ok(rec);
            }
            Err(e) => return Err(e),
        };
        let t_next = (n + 1) as f64 * config.dt;
        let energy = system.energy(&next);
        if !energy.is_finite() {
            rec.failure = Some(Failure { step: n, time: t, message: "non-finite energy".into() });
            if rec.times.last() != Some(&t) {
                rec.times.push(t);
                rec.states.push(y);
            }
            return Ok(rec);
        }
        y = next;
        rec.steps_taken = n + 1;
        let stopped = math::sqrt(energy) >= radius;
        if stopped || snapshot_due(n + 1, config.snapshot_stride, steps) {
            rec.times.push(t_next);
            rec.states.push(y.clone());
        }
        if stopped {
            rec.stopped_at = Some(t_next);
            break;
        }
    }
    Ok(rec)
}

/// Integrates ensemble member `member` with increments drawn from
/// `(config.seed, member)`.
pub fn integrate_member<E: ProductEngine, O: StepObserver<E>>(
    system: &GalerkinSystem<E>,
    initial: &GalerkinState,
    config: &RunConfig,
    member: u64,
    observer: &mut O,
) -> Result<TrajectoryRecord> {
    config.validate()?;
    let key = StreamKey::new(StreamKey::member_seed(config.seed, member), member);
    let path = BrownianPath::generate(key, system.noise().total_count(), config.steps(), config.dt);
    integrate_with_path(system, initial, config, &path, observer)
}

/// Member 0 of the ensemble defined by `config`.
pub fn integrate<E: ProductEngine>(
    system: &GalerkinSystem<E>,
    initial: &GalerkinState,
    config: &RunConfig,
) -> Result<TrajectoryRecord> {
    integrate_member(system, initial, config, 0, &mut ())
}

/// Members `0..ensemble_size` run in order.
pub fn ensemble_run<E: ProductEngine>(
    system: &GalerkinSystem<E>,
    initial: &GalerkinState,
    config: &RunConfig,
) -> Result<Vec<TrajectoryRecord>> {
    (0..config.ensemble_size as u64).map(|m| integrate_member(system, initial, config, m, &mut ())).collect()
}

/// Aggregate of a scalar functional over the surviving members.
#[derive(Clone, Debug, PartialEq)]
pub struct EnsembleAggregate {
    pub summary: crate::stats::Summary,
    pub survivors: usize,
    pub failed: usize,
}

pub fn aggregate(records: &[TrajectoryRecord], functional: impl Fn(&TrajectoryRecord) -> f64) -> EnsembleAggregate {
    let values: Vec<f64> = records.iter().filter(|r| r.succeeded()).map(functional).collect();
    EnsembleAggregate {
        summary: crate::stats::Summary::of(&values),
        survivors: values.len(),
        failed: records.len() - values.len(),
    }
}
