//! MacCormack predictor-corrector with central-dispersion (CD) smoothing.
//!
//! One step runs predictor, corrector, smoothing and the boundary copy in
//! that order. Each stage clamps density to `[k_floor, k_jam]` and speed to
//! `[0, v_max]`, counting every clamp, and the step's mass budget is split
//! into closed-form source, boundary-flux and edge terms so that
//! [`crate::analysis::mass_ledger`] can check it.

use log::warn;

use crate::error::{SolverError, ValidationError};
use crate::model::{
    eigenvalues, flux, pressure, source_vector, Grid, ModelParams, RampConfig, State,
};

/// Slack on the hard `CFL <= 1` limit, absorbing rounding in the wave speeds.
pub const CFL_HARD_LIMIT: f64 = 1.0;
const CFL_SLACK: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum BoundaryMode {
    /// First cell copies the second, last copies the second-to-last.
    #[default]
    ZeroGradient,
    /// Wrapped stencils. Used for exact conservation checks.
    Periodic,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Smoothing {
    /// Apply the CD stage with weight `params.smoothing_weight`.
    #[default]
    CentralDispersion,
    /// Plain MacCormack: the CD stage is not executed at all.
    Disabled,
}

/// Bookkeeping for one `advance`.
///
/// Masses are vehicle counts (`sum(u1) dx`). For a step without clamping,
/// `mass_after - mass_before` equals
/// `source_mass_injected + boundary_flux_mass + edge_mass_change` up to
/// rounding; `clamp_mass_change` accounts for any density clamps.
#[derive(Debug, Clone, PartialEq)]
pub struct StepAudit {
    pub step_index: usize,
    /// Time at the start of the step.
    pub t: f64,
    pub cfl_observed: f64,
    pub cfl_warning: bool,
    pub density_clamps: usize,
    pub velocity_clamps: usize,
    pub mass_before: f64,
    pub mass_after: f64,
    /// Effective `R_1` contribution of the scheme over the step.
    pub source_mass_injected: f64,
    /// Net inflow through the two road ends; zero under periodic wrap.
    pub boundary_flux_mass: f64,
    /// Mass moved by edge-cell treatment (one-sided smoothing and the
    /// boundary copy); zero under periodic wrap.
    pub edge_mass_change: f64,
    /// Mass added by density clamps.
    pub clamp_mass_change: f64,
}

impl StepAudit {
    pub fn clamps(&self) -> usize {
        self.density_clamps + self.velocity_clamps
    }
}

/// Primitive fields at one recorded time.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldSnapshot {
    pub t: f64,
    pub k: Vec<f64>,
    pub v: Vec<f64>,
    pub grid: Grid,
}

impl FieldSnapshot {
    pub fn from_state(
        state: &State,
        grid: Grid,
        params: &ModelParams,
    ) -> Result<Self, SolverError> {
        let (k, v) = state.primitives(params)?;
        Ok(Self {
            t: state.t,
            k,
            v,
            grid,
        })
    }

    pub fn to_state(&self, params: &ModelParams) -> Result<State, SolverError> {
        Ok(State::from_primitive(&self.k, &self.v, self.t, params)?)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimulationRecord {
    pub grid: Grid,
    pub dt: f64,
    pub snapshots: Vec<FieldSnapshot>,
    pub audits: Vec<StepAudit>,
}

impl SimulationRecord {
    /// Snapshot recorded within half a time step of `t`.
    pub fn snapshot_at(&self, t: f64) -> Option<&FieldSnapshot> {
        self.snapshots
            .iter()
            .find(|s| (s.t - t).abs() < 0.5 * self.dt)
    }

    pub fn last(&self) -> &FieldSnapshot {
        self.snapshots
            .last()
            .expect("record has an initial snapshot")
    }

    pub fn max_cfl(&self) -> f64 {
        self.audits
            .iter()
            .map(|a| a.cfl_observed)
            .fold(0.0, f64::max)
    }

    pub fn total_clamps(&self) -> usize {
        self.audits.iter().map(StepAudit::clamps).sum()
    }
}

/// `max_i max(|lambda_1|, |lambda_2|) dt / dx`.
pub fn cfl_number(state: &State, params: &ModelParams) -> Result<f64, SolverError> {
    let mut max_speed: f64 = 0.0;
    for (&u1, &u2) in state.u1.iter().zip(&state.u2) {
        let (l1, l2) = eigenvalues(u1, u2, params)?;
        max_speed = max_speed.max(l1.abs()).max(l2.abs());
    }
    Ok(max_speed * params.dt / params.dx)
}

/// Central-dispersion smoothing with weight `weight`.
///
/// Under [`BoundaryMode::ZeroGradient`] the two edge cells are left alone.
pub fn smooth_cd(state: &State, weight: f64, mode: BoundaryMode) -> State {
    State {
        u1: smooth_component(&state.u1, weight, mode),
        u2: smooth_component(&state.u2, weight, mode),
        t: state.t,
    }
}

fn smooth_component(u: &[f64], s: f64, mode: BoundaryMode) -> Vec<f64> {
    let n = u.len();
    let mut out = u.to_vec();
    let blend = |left: f64, mid: f64, right: f64| (1.0 - s) * mid + s * (right + left) / 2.0;
    for i in 1..n - 1 {
        out[i] = blend(u[i - 1], u[i], u[i + 1]);
    }
    if mode == BoundaryMode::Periodic {
        out[0] = blend(u[n - 1], u[0], u[1]);
        out[n - 1] = blend(u[n - 2], u[n - 1], u[0]);
    }
    out
}

/// Zero-gradient copy of the edge cells; periodic mode leaves the state alone.
pub fn apply_boundary(state: &mut State, mode: BoundaryMode) {
    if mode == BoundaryMode::ZeroGradient {
        let n = state.len();
        state.u1[0] = state.u1[1];
        state.u2[0] = state.u2[1];
        state.u1[n - 1] = state.u1[n - 2];
        state.u2[n - 1] = state.u2[n - 2];
    }
}

/// Counters and mass terms produced by a single stage.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct StageReport {
    pub density_clamps: usize,
    pub velocity_clamps: usize,
    pub clamp_mass: f64,
    /// `dt sum(R_1) dx` for the source samples this stage added.
    pub source_mass: f64,
    /// Telescoped end-flux term of this stage's update.
    pub end_flux_mass: f64,
}

/// Clamp every cell into the admissible set in place.
pub fn clamp_state(state: &mut State, params: &ModelParams, dx: f64) -> StageReport {
    let mut report = StageReport::default();
    for (u1, u2) in state.u1.iter_mut().zip(state.u2.iter_mut()) {
        let k = u1.clamp(params.k_floor, params.k_jam);
        if k != *u1 {
            report.density_clamps += 1;
            report.clamp_mass += (k - *u1) * dx;
            *u1 = k;
        }
        let p = pressure(k, params);
        let v = *u2 / k - p;
        if !(0.0..=params.v_max).contains(&v) {
            report.velocity_clamps += 1;
            *u2 = k * (v.clamp(0.0, params.v_max) + p);
        }
    }
    report
}

fn check_finite(state: &State, stage: &'static str) -> Result<(), SolverError> {
    let bad = state
        .u1
        .iter()
        .zip(&state.u2)
        .position(|(a, b)| !a.is_finite() || !b.is_finite());
    match bad {
        Some(cell) => Err(SolverError::NonFinite { stage, cell }),
        None => Ok(()),
    }
}

/// MacCormack-CD time stepper bound to one parameter set, ramp and grid.
#[derive(Debug, Clone)]
pub struct Solver<'a> {
    params: &'a ModelParams,
    ramp: Option<&'a RampConfig>,
    grid: Grid,
    boundary: BoundaryMode,
    smoothing: Smoothing,
}

impl<'a> Solver<'a> {
    pub fn new(
        params: &'a ModelParams,
        ramp: Option<&'a RampConfig>,
        boundary: BoundaryMode,
    ) -> Result<Self, ValidationError> {
        params.validate()?;
        let grid = Grid::from_params(params)?;
        Ok(Self {
            params,
            ramp,
            grid,
            boundary,
            smoothing: Smoothing::CentralDispersion,
        })
    }

    pub fn with_smoothing(mut self, smoothing: Smoothing) -> Self {
        self.smoothing = smoothing;
        self
    }

    pub fn grid(&self) -> Grid {
        self.grid
    }

    pub fn params(&self) -> &ModelParams {
        self.params
    }

    fn fluxes(&self, state: &State) -> Result<Vec<(f64, f64)>, SolverError> {
        state
            .u1
            .iter()
            .zip(&state.u2)
            .map(|(&u1, &u2)| flux(u1, u2, self.params).map_err(SolverError::from))
            .collect()
    }

    fn sources(&self, state: &State, t: f64) -> Result<Vec<(f64, f64)>, SolverError> {
        state
            .u1
            .iter()
            .zip(&state.u2)
            .enumerate()
            .map(|(i, (&u1, &u2))| {
                let x = self.grid.cell_center(i);
                source_vector(u1, u2, x, t, self.ramp, self.params).map_err(SolverError::from)
            })
            .collect()
    }

    /// Forward-differenced stage: `U - dt/dx (F_{i+1} - F_i) + dt R(U)`.
    pub fn predictor(&self, state: &State) -> Result<(State, StageReport), SolverError> {
        let n = state.len();
        let dt = self.params.dt;
        let dx = self.grid.dx();
        let ratio = dt / dx;
        let f = self.fluxes(state)?;
        let r = self.sources(state, state.t)?;

        let ghost_right = match self.boundary {
            BoundaryMode::ZeroGradient => f[n - 1],
            BoundaryMode::Periodic => f[0],
        };
        let mut out = State {
            u1: vec![0.0; n],
            u2: vec![0.0; n],
            t: state.t,
        };
        for i in 0..n {
            let right = if i + 1 < n { f[i + 1] } else { ghost_right };
            out.u1[i] = state.u1[i] - ratio * (right.0 - f[i].0) + dt * r[i].0;
            out.u2[i] = state.u2[i] - ratio * (right.1 - f[i].1) + dt * r[i].1;
        }
        check_finite(&out, "predictor")?;

        let mut report = clamp_state(&mut out, self.params, dx);
        report.source_mass = dt * r.iter().map(|s| s.0).sum::<f64>() * dx;
        report.end_flux_mass = -dt * (ghost_right.0 - f[0].0);
        Ok((out, report))
    }

    /// Backward-differenced stage on the provisional state, averaged with `U^n`.
    pub fn corrector(
        &self,
        state: &State,
        provisional: &State,
    ) -> Result<(State, StageReport), SolverError> {
        let n = state.len();
        let dt = self.params.dt;
        let dx = self.grid.dx();
        let ratio = dt / dx;
        let f = self.fluxes(provisional)?;
        let t_new = state.t + dt;
        let r = if self.params.source_in_corrector {
            Some(self.sources(provisional, t_new)?)
        } else {
            None
        };

        let ghost_left = match self.boundary {
            BoundaryMode::ZeroGradient => f[0],
            BoundaryMode::Periodic => f[n - 1],
        };
        let mut out = State {
            u1: vec![0.0; n],
            u2: vec![0.0; n],
            t: t_new,
        };
        for i in 0..n {
            let left = if i > 0 { f[i - 1] } else { ghost_left };
            out.u1[i] = 0.5 * (provisional.u1[i] + state.u1[i]) - 0.5 * ratio * (f[i].0 - left.0);
            out.u2[i] = 0.5 * (provisional.u2[i] + state.u2[i]) - 0.5 * ratio * (f[i].1 - left.1);
            if let Some(r) = &r {
                out.u1[i] += 0.5 * dt * r[i].0;
                out.u2[i] += 0.5 * dt * r[i].1;
            }
        }
        check_finite(&out, "corrector")?;

        let mut report = clamp_state(&mut out, self.params, dx);
        if let Some(r) = &r {
            report.source_mass = 0.5 * dt * r.iter().map(|s| s.0).sum::<f64>() * dx;
        }
        report.end_flux_mass = -0.5 * dt * (f[n - 1].0 - ghost_left.0);
        Ok((out, report))
    }

    /// One full step with CFL supervision and mass audit.
    pub fn advance(&self, state: &State) -> Result<(State, StepAudit), SolverError> {
        let cfl = cfl_number(state, self.params)?;
        if cfl > CFL_HARD_LIMIT + CFL_SLACK || !cfl.is_finite() {
            return Err(SolverError::CflViolation {
                cfl,
                limit: CFL_HARD_LIMIT,
            });
        }
        let cfl_warning = cfl > self.params.courant_target + CFL_SLACK;

        let dx = self.grid.dx();
        let n = state.len();
        let mass_before = state.mass(dx);

        let (provisional, pred) = self.predictor(state)?;
        let (corrected, corr) = self.corrector(state, &provisional)?;

        let mut edge_mass_change = 0.0;
        let mut smooth = StageReport::default();
        let mut next = match self.smoothing {
            Smoothing::Disabled => corrected,
            Smoothing::CentralDispersion => {
                let s = self.params.smoothing_weight;
                if self.boundary == BoundaryMode::ZeroGradient {
                    let u = &corrected.u1;
                    edge_mass_change += 0.5 * s * ((u[n - 1] - u[n - 2]) - (u[1] - u[0])) * dx;
                }
                let mut smoothed = smooth_cd(&corrected, s, self.boundary);
                check_finite(&smoothed, "smoothing")?;
                smooth = clamp_state(&mut smoothed, self.params, dx);
                smoothed
            }
        };

        if self.boundary == BoundaryMode::ZeroGradient {
            let u = &next.u1;
            edge_mass_change += ((u[1] - u[0]) + (u[n - 2] - u[n - 1])) * dx;
        }
        apply_boundary(&mut next, self.boundary);

        // The corrector halves everything the predictor contributed.
        let audit = StepAudit {
            step_index: 0,
            t: state.t,
            cfl_observed: cfl,
            cfl_warning,
            density_clamps: pred.density_clamps + corr.density_clamps + smooth.density_clamps,
            velocity_clamps: pred.velocity_clamps + corr.velocity_clamps + smooth.velocity_clamps,
            mass_before,
            mass_after: next.mass(dx),
            source_mass_injected: 0.5 * pred.source_mass + corr.source_mass,
            boundary_flux_mass: 0.5 * pred.end_flux_mass + corr.end_flux_mass,
            edge_mass_change,
            clamp_mass_change: 0.5 * pred.clamp_mass + corr.clamp_mass + smooth.clamp_mass,
        };
        Ok((next, audit))
    }

    /// Advance `initial` to `horizon` seconds, recording primitive snapshots
    /// every `record_every` steps.
    pub fn run(
        &self,
        initial: &State,
        horizon: f64,
        record_every: usize,
    ) -> Result<SimulationRecord, SolverError> {
        let n_steps = step_count(horizon, self.params.dt)?;
        if record_every == 0 {
            return Err(ValidationError::new("record_every", "must be at least 1").into());
        }
        if initial.len() != self.grid.n_cells() {
            return Err(ValidationError::new(
                "initial",
                format!(
                    "state has {} cells, grid has {}",
                    initial.len(),
                    self.grid.n_cells()
                ),
            )
            .into());
        }

        let mut record = SimulationRecord {
            grid: self.grid,
            dt: self.params.dt,
            snapshots: vec![FieldSnapshot::from_state(initial, self.grid, self.params)?],
            audits: Vec::with_capacity(n_steps),
        };
        let mut state = initial.clone();
        let mut warned = false;
        for step in 0..n_steps {
            let at_step = |e: SolverError| SolverError::AtStep {
                step,
                source: Box::new(e),
            };
            let (next, mut audit) = self.advance(&state).map_err(at_step)?;
            audit.step_index = step;
            if audit.cfl_warning && !warned {
                warn!(
                    "step {step}: CFL {:.4} above target {}",
                    audit.cfl_observed, self.params.courant_target
                );
                warned = true;
            }
            record.audits.push(audit);
            state = next;
            if (step + 1) % record_every == 0 {
                record.snapshots.push(
                    FieldSnapshot::from_state(&state, self.grid, self.params).map_err(at_step)?,
                );
            }
        }
        Ok(record)
    }
}

/// Number of steps of size `dt` in `horizon`, which must be a non-negative
/// integer multiple of `dt`.
pub fn step_count(horizon: f64, dt: f64) -> Result<usize, SolverError> {
    let ratio = horizon / dt;
    let n = ratio.round();
    if !(ratio.is_finite() && n >= 0.0 && (ratio - n).abs() <= 1e-9 * n.max(1.0)) {
        return Err(SolverError::BadHorizon { horizon, dt });
    }
    Ok(n as usize)
}
