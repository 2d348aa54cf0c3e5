//! First-order Lax-Friedrichs solver, written independently of
//! [`crate::solver`] so the two schemes can check each other.

use crate::error::{SolverError, ValidationError};
use crate::model::{
    eigenvalues, flux, pressure, source_vector, Grid, ModelParams, RampConfig, State,
};
use crate::solver::{step_count, BoundaryMode, FieldSnapshot, SimulationRecord, StepAudit};

/// `U_i' = (U_{i+1} + U_{i-1}) / 2 - dt/(2 dx) (F_{i+1} - F_{i-1}) + dt R_i`.
pub fn lax_friedrichs_oracle(
    initial: &State,
    ramp: Option<&RampConfig>,
    params: &ModelParams,
    mode: BoundaryMode,
    horizon: f64,
    record_every: usize,
) -> Result<SimulationRecord, SolverError> {
    params.validate()?;
    let grid = Grid::from_params(params)?;
    let n = grid.n_cells();
    if initial.len() != n {
        return Err(ValidationError::new("initial", "state does not match the grid").into());
    }
    if record_every == 0 {
        return Err(ValidationError::new("record_every", "must be at least 1").into());
    }
    let steps = step_count(horizon, params.dt)?;
    let dt = params.dt;
    let dx = grid.dx();
    let half_ratio = 0.5 * dt / dx;

    let mut record = SimulationRecord {
        grid,
        dt,
        snapshots: vec![FieldSnapshot::from_state(initial, grid, params)?],
        audits: Vec::with_capacity(steps),
    };
    let mut u1 = initial.u1.clone();
    let mut u2 = initial.u2.clone();
    let mut t = initial.t;

    for step in 0..steps {
        let fail = |e: SolverError| SolverError::AtStep {
            step,
            source: Box::new(e),
        };
        let mut speed: f64 = 0.0;
        let mut f = Vec::with_capacity(n);
        let mut r = Vec::with_capacity(n);
        for i in 0..n {
            let (l1, l2) = eigenvalues(u1[i], u2[i], params).map_err(|e| fail(e.into()))?;
            speed = speed.max(l1.abs()).max(l2.abs());
            f.push(flux(u1[i], u2[i], params).map_err(|e| fail(e.into()))?);
            r.push(
                source_vector(u1[i], u2[i], grid.cell_center(i), t, ramp, params)
                    .map_err(|e| fail(e.into()))?,
            );
        }
        let cfl = speed * dt / dx;
        if cfl > 1.0 + 1e-12 {
            return Err(fail(SolverError::CflViolation { cfl, limit: 1.0 }));
        }

        let wrap = mode == BoundaryMode::Periodic;
        let at = |i: isize| -> usize {
            if i < 0 {
                if wrap {
                    n - 1
                } else {
                    0
                }
            } else if i as usize >= n {
                if wrap {
                    0
                } else {
                    n - 1
                }
            } else {
                i as usize
            }
        };
        let mass_before = u1.iter().sum::<f64>() * dx;
        let mut n1 = vec![0.0; n];
        let mut n2 = vec![0.0; n];
        for i in 0..n {
            let (l, rgt) = (at(i as isize - 1), at(i as isize + 1));
            n1[i] = 0.5 * (u1[rgt] + u1[l]) - half_ratio * (f[rgt].0 - f[l].0) + dt * r[i].0;
            n2[i] = 0.5 * (u2[rgt] + u2[l]) - half_ratio * (f[rgt].1 - f[l].1) + dt * r[i].1;
            if !n1[i].is_finite() || !n2[i].is_finite() {
                return Err(fail(SolverError::NonFinite {
                    stage: "lax-friedrichs",
                    cell: i,
                }));
            }
        }

        let mut density_clamps = 0;
        let mut velocity_clamps = 0;
        let mut clamp_mass = 0.0;
        for i in 0..n {
            let k = n1[i].clamp(params.k_floor, params.k_jam);
            if k != n1[i] {
                density_clamps += 1;
                clamp_mass += (k - n1[i]) * dx;
                n1[i] = k;
            }
            let p = pressure(k, params);
            let v = n2[i] / k - p;
            if !(0.0..=params.v_max).contains(&v) {
                velocity_clamps += 1;
                n2[i] = k * (v.clamp(0.0, params.v_max) + p);
            }
        }

        let (boundary_flux_mass, edge_mass_change) = if wrap {
            (0.0, 0.0)
        } else {
            let edge = ((n1[1] - n1[0]) + (n1[n - 2] - n1[n - 1])) * dx;
            n1[0] = n1[1];
            n2[0] = n2[1];
            n1[n - 1] = n1[n - 2];
            n2[n - 1] = n2[n - 2];
            (-dt * (f[n - 1].0 - f[0].0), edge)
        };

        u1 = n1;
        u2 = n2;
        t += dt;
        record.audits.push(StepAudit {
            step_index: step,
            t: t - dt,
            cfl_observed: cfl,
            cfl_warning: cfl > params.courant_target + 1e-12,
            density_clamps,
            velocity_clamps,
            mass_before,
            mass_after: u1.iter().sum::<f64>() * dx,
            source_mass_injected: dt * r.iter().map(|s| s.0).sum::<f64>() * dx,
            boundary_flux_mass,
            edge_mass_change,
            clamp_mass_change: clamp_mass,
        });
        if (step + 1) % record_every == 0 {
            let state = State {
                u1: u1.clone(),
                u2: u2.clone(),
                t,
            };
            record
                .snapshots
                .push(FieldSnapshot::from_state(&state, grid, params).map_err(fail)?);
        }
    }
    Ok(record)
}
