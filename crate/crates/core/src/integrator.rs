//! Method-of-lines time stepping with classical RK4.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::Path;

use thiserror::Error;

use crate::diagnostics::DiagnosticsRow;
use crate::fields::{norm_sup, write_csv, Field, FieldError, StencilOrder};
use crate::kernels::HelmholtzOperator;
use crate::model::{rhs_with, ModelError, ModelSpec, RhsOptions};

/// Floor on the wave speed in [`select_dt`].
pub const SPEED_FLOOR: f64 = 1e-12;

#[derive(Debug, Error)]
pub enum IntegratorError {
    #[error("non-finite state at t = {t}")]
    NonFiniteState { t: f64, partial: Box<Trajectory> },
    #[error("step produced non-finite values")]
    NonFiniteStep,
    #[error("invalid solver config: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TimeStep {
    Fixed(f64),
    /// `dt = min(dt_max, cfl dx / max|u|)`, re-evaluated every step.
    Cfl {
        cfl: f64,
        dt_max: f64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverConfig {
    pub t_end: f64,
    pub step: TimeStep,
    pub dealias: bool,
    pub stencil: StencilOrder,
    /// Record a snapshot every this many steps (the final state is always
    /// recorded). Zero keeps only the initial and final states.
    pub snapshot_every: usize,
    /// Early stop once `max |∂x u|` exceeds this.
    pub blowup_threshold: f64,
    /// Right-tail window for a per-step decay fit.
    pub decay_window: Option<(f64, f64)>,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            t_end: 1.0,
            step: TimeStep::Cfl {
                cfl: 0.5,
                dt_max: 1e-2,
            },
            dealias: false,
            stencil: StencilOrder::Fourth,
            snapshot_every: 0,
            blowup_threshold: 1e6,
            decay_window: None,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<(), IntegratorError> {
        let bad = |m: String| Err(IntegratorError::InvalidConfig(m));
        if !(self.t_end.is_finite() && self.t_end >= 0.0) {
            return bad(format!("t_end must be finite and >= 0, got {}", self.t_end));
        }
        match self.step {
            TimeStep::Fixed(dt) if !(dt.is_finite() && dt > 0.0) => {
                return bad(format!("dt must be positive, got {dt}"))
            }
            TimeStep::Cfl { cfl, dt_max } => {
                if !(cfl > 0.0 && cfl <= 1.0) {
                    return bad(format!("cfl must be in (0, 1], got {cfl}"));
                }
                if !(dt_max.is_finite() && dt_max > 0.0) {
                    return bad(format!("dt_max must be positive, got {dt_max}"));
                }
            }
            _ => {}
        }
        if !(self.blowup_threshold > 0.0) {
            return bad(format!(
                "blowup_threshold must be positive, got {}",
                self.blowup_threshold
            ));
        }
        Ok(())
    }

    fn rhs_options(&self) -> RhsOptions {
        RhsOptions {
            dealias: self.dealias,
            stencil: self.stencil,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RunStatus {
    Completed,
    BlowUpSuspected,
    NonFiniteState,
}

impl RunStatus {
    pub fn as_str(&self) -> &'static str {
        match self {
            RunStatus::Completed => "Completed",
            RunStatus::BlowUpSuspected => "BlowUpSuspected",
            RunStatus::NonFiniteState => "NonFiniteState",
        }
    }
}

/// Snapshots, per-step diagnostics and the final status of a run.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub snapshots: Vec<Field>,
    /// Row 0 is the initial state, then one row per accepted step.
    pub diagnostics: Vec<DiagnosticsRow>,
    pub status: RunStatus,
    pub steps: usize,
}

impl Trajectory {
    pub fn final_field(&self) -> &Field {
        self.snapshots
            .last()
            .expect("trajectory holds the initial state")
    }

    pub fn final_time(&self) -> f64 {
        *self
            .times
            .last()
            .expect("trajectory holds the initial state")
    }

    /// Writes `snapshot_NNNNN.csv` per snapshot, `snapshots.csv`
    /// (`index,t,file`) and `diagnostics.csv`.
    pub fn export(&self, dir: &Path) -> Result<(), IntegratorError> {
        fs::create_dir_all(dir)?;
        let mut index = BufWriter::new(File::create(dir.join("snapshots.csv"))?);
        writeln!(index, "index,t,file")?;
        for (i, (t, u)) in self.times.iter().zip(&self.snapshots).enumerate() {
            let name = format!("snapshot_{i:05}.csv");
            write_csv(u, BufWriter::new(File::create(dir.join(&name))?))?;
            writeln!(index, "{i},{t:.16e},{name}")?;
        }
        index.flush()?;
        self.write_diagnostics(BufWriter::new(File::create(dir.join("diagnostics.csv"))?))
    }

    /// `t,energy,max_slope,sup_norm`, plus `decay_rate` when it was measured.
    pub fn write_diagnostics<W: Write>(&self, mut w: W) -> Result<(), IntegratorError> {
        let with_decay = self.diagnostics.iter().any(|r| r.decay_rate.is_some());
        write!(w, "t,energy,max_slope,sup_norm")?;
        if with_decay {
            write!(w, ",decay_rate")?;
        }
        writeln!(w)?;
        for r in &self.diagnostics {
            write!(
                w,
                "{:.16e},{:.16e},{:.16e},{:.16e}",
                r.t, r.energy, r.max_slope, r.sup_norm
            )?;
            if with_decay {
                match r.decay_rate {
                    Some(d) => write!(w, ",{d:.16e}")?,
                    None => write!(w, ",")?,
                }
            }
            writeln!(w)?;
        }
        w.flush()?;
        Ok(())
    }
}

/// `min(dt_max, cfl dx / max(‖u‖∞, 1e−12))`.
pub fn select_dt(u: &Field, cfl: f64, dt_max: f64) -> f64 {
    let speed = norm_sup(u).max(SPEED_FLOOR);
    dt_max.min(cfl * u.grid().dx() / speed)
}

/// One classical RK4 step with default discretization options.
pub fn step_rk4(model: &ModelSpec, u: &Field, dt: f64) -> Result<Field, IntegratorError> {
    Stepper::new(model, u, RhsOptions::default()).step(u, dt)
}

/// RK4 bound to a model and grid.
pub struct Stepper<'m> {
    model: &'m ModelSpec,
    op: HelmholtzOperator,
    opts: RhsOptions,
}

impl<'m> Stepper<'m> {
    pub fn new(model: &'m ModelSpec, like: &Field, opts: RhsOptions) -> Self {
        Stepper {
            model,
            op: HelmholtzOperator::new(*like.grid()),
            opts,
        }
    }

    fn eval(&self, u: &Field) -> Result<Field, IntegratorError> {
        Ok(rhs_with(self.model, &self.op, u, &self.opts)?)
    }

    pub fn step(&self, u: &Field, dt: f64) -> Result<Field, IntegratorError> {
        if !(dt > 0.0) {
            return Err(IntegratorError::InvalidConfig(format!(
                "dt must be positive, got {dt}"
            )));
        }
        let axpy = |a: &Field, s: f64, k: &Field| -> Field {
            let v = a
                .values()
                .iter()
                .zip(k.values())
                .map(|(x, y)| x + s * y)
                .collect();
            Field::from_raw(*a.grid(), v)
        };
        let k1 = self.eval(u)?;
        let k2 = self.eval(&axpy(u, 0.5 * dt, &k1))?;
        let k3 = self.eval(&axpy(u, 0.5 * dt, &k2))?;
        let k4 = self.eval(&axpy(u, dt, &k3))?;
        let c = dt / 6.0;
        let values: Vec<f64> = (0..u.len())
            .map(|j| {
                u.values()[j]
                    + c * (k1.values()[j]
                        + 2.0 * k2.values()[j]
                        + 2.0 * k3.values()[j]
                        + k4.values()[j])
            })
            .collect();
        let next = Field::from_raw(*u.grid(), values);
        if !next.is_finite() {
            return Err(IntegratorError::NonFiniteStep);
        }
        Ok(next)
    }
}

/// Advances `u0` to `cfg.t_end`. Stops early with
/// [`RunStatus::BlowUpSuspected`] once the discrete slope exceeds the
/// threshold; a non-finite state is an error carrying the partial
/// trajectory.
pub fn run(
    model: &ModelSpec,
    u0: &Field,
    cfg: &SolverConfig,
) -> Result<Trajectory, IntegratorError> {
    cfg.validate()?;
    let stepper = Stepper::new(model, u0, cfg.rhs_options());
    let mut traj = Trajectory {
        times: vec![0.0],
        snapshots: vec![u0.clone()],
        diagnostics: vec![DiagnosticsRow::measure(0.0, u0, cfg.decay_window)],
        status: RunStatus::Completed,
        steps: 0,
    };
    let mut u = u0.clone();
    let mut t = 0.0;
    // Relative slack so that round-off in t does not produce a sliver step.
    let t_eps = 1e-12 * cfg.t_end.max(1.0);
    while t < cfg.t_end - t_eps {
        let dt = match cfg.step {
            TimeStep::Fixed(dt) => dt,
            TimeStep::Cfl { cfl, dt_max } => select_dt(&u, cfl, dt_max),
        };
        let dt = dt.min(cfg.t_end - t);
        let next = match stepper.step(&u, dt) {
            Ok(next) => next,
            Err(IntegratorError::NonFiniteStep) => {
                traj.status = RunStatus::NonFiniteState;
                if traj.final_time() < t {
                    traj.times.push(t);
                    traj.snapshots.push(u);
                }
                return Err(IntegratorError::NonFiniteState {
                    t: t + dt,
                    partial: Box::new(traj),
                });
            }
            Err(e) => return Err(e),
        };
        u = next;
        traj.steps += 1;
        t = if cfg.t_end - (t + dt) <= t_eps {
            cfg.t_end
        } else {
            t + dt
        };
        let row = DiagnosticsRow::measure(t, &u, cfg.decay_window);
        traj.diagnostics.push(row);
        let blowup = row.max_slope > cfg.blowup_threshold;
        let done = t >= cfg.t_end;
        if blowup || done || (cfg.snapshot_every > 0 && traj.steps % cfg.snapshot_every == 0) {
            traj.times.push(t);
            traj.snapshots.push(u.clone());
        }
        if blowup {
            log::info!(
                "max slope {:.3e} exceeded threshold {:.1e} at t = {t}",
                row.max_slope,
                cfg.blowup_threshold
            );
            traj.status = RunStatus::BlowUpSuspected;
            return Ok(traj);
        }
    }
    if traj.final_time() < t {
        traj.times.push(t);
        traj.snapshots.push(u);
    }
    Ok(traj)
}
