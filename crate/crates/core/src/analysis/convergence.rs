//! Grid self-convergence: rerun a scenario with `dx / r` and `dt / r`
//! (fixed CFL), restrict each solution onto the next coarser grid and
//! estimate the order from successive L¹ differences.

use std::thread;

use crate::error::{AnalysisError, SolverError, ValidationError};
use crate::scenario::{build_state, ScenarioSpec};
use crate::solver::{step_count, FieldSnapshot, Smoothing, Solver};

use super::oracle::lax_friedrichs_oracle;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scheme {
    MacCormackCd,
    LaxFriedrichs,
}

impl Scheme {
    pub fn name(self) -> &'static str {
        match self {
            Scheme::MacCormackCd => "maccormack_cd",
            Scheme::LaxFriedrichs => "lax_friedrichs",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceLevel {
    pub refinement: usize,
    pub n_cells: usize,
    pub dx: f64,
    pub dt: f64,
    /// L¹ distance (veh) to the next finer level, restricted to this grid.
    pub diff_to_finer: Option<f64>,
    /// Order estimated from this level's difference and the next one.
    pub order: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceReport {
    pub scheme: Scheme,
    pub levels: Vec<ConvergenceLevel>,
    /// Order from the three finest levels.
    pub observed_order: Option<f64>,
    /// All differences vanish (to rounding): the datum is reproduced exactly.
    pub exact: bool,
}

fn run_level(
    spec: &ScenarioSpec,
    refinement: usize,
    scheme: Scheme,
) -> Result<FieldSnapshot, SolverError> {
    let mut params = spec.params.clone();
    params.dx /= refinement as f64;
    params.dt /= refinement as f64;
    let state = build_state(&spec.ic, spec.initial_speed, &params)?;
    let ramp = spec.ramp.as_ref();
    let every = step_count(spec.horizon, params.dt)?.max(1);
    let record = match scheme {
        Scheme::MacCormackCd => Solver::new(&params, ramp, spec.boundary)?
            .with_smoothing(Smoothing::CentralDispersion)
            .run(&state, spec.horizon, every)?,
        Scheme::LaxFriedrichs => {
            lax_friedrichs_oracle(&state, ramp, &params, spec.boundary, spec.horizon, every)?
        }
    };
    Ok(record.last().clone())
}

/// Block-average a fine field onto a grid `ratio` times coarser.
fn restrict(fine: &[f64], ratio: usize) -> Vec<f64> {
    fine.chunks(ratio)
        .map(|c| c.iter().sum::<f64>() / c.len() as f64)
        .collect()
}

pub fn convergence_study(
    spec: &ScenarioSpec,
    refinements: &[usize],
    scheme: Scheme,
) -> Result<ConvergenceReport, AnalysisError> {
    if refinements.len() < 3 {
        return Err(SolverError::from(ValidationError::new(
            "refinements",
            "at least three levels are needed for an order estimate",
        ))
        .into());
    }
    let ratio = refinements[1] / refinements[0].max(1);
    let uniform =
        refinements[0] >= 1 && ratio >= 2 && refinements.windows(2).all(|w| w[1] == w[0] * ratio);
    if !uniform {
        return Err(SolverError::from(ValidationError::new(
            "refinements",
            "levels must grow by a constant integer ratio >= 2",
        ))
        .into());
    }

    let results: Vec<Result<FieldSnapshot, SolverError>> = thread::scope(|s| {
        let handles: Vec<_> = refinements
            .iter()
            .map(|&r| s.spawn(move || run_level(spec, r, scheme)))
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("convergence level panicked"))
            .collect()
    });
    let fields = results.into_iter().collect::<Result<Vec<_>, _>>()?;

    let diffs: Vec<f64> = fields
        .windows(2)
        .map(|w| {
            let coarse = &w[0];
            let fine = restrict(&w[1].k, ratio);
            coarse
                .k
                .iter()
                .zip(&fine)
                .map(|(a, b)| (a - b).abs())
                .sum::<f64>()
                * coarse.grid.dx()
        })
        .collect();

    let scale = fields[0].k.iter().map(|k| k.abs()).fold(0.0, f64::max) * spec.params.road_length;
    let exact = diffs
        .iter()
        .all(|&d| d <= 1e-12 * scale.max(f64::MIN_POSITIVE));
    let orders: Vec<Option<f64>> = diffs
        .windows(2)
        .map(|d| {
            if exact || d[1] <= 0.0 {
                None
            } else {
                Some((d[0] / d[1]).ln() / (ratio as f64).ln())
            }
        })
        .collect();

    let levels = refinements
        .iter()
        .zip(&fields)
        .enumerate()
        .map(|(i, (&r, f))| ConvergenceLevel {
            refinement: r,
            n_cells: f.grid.n_cells(),
            dx: f.grid.dx(),
            dt: spec.params.dt / r as f64,
            diff_to_finer: diffs.get(i).copied(),
            order: orders.get(i).copied().flatten(),
        })
        .collect();

    Ok(ConvergenceReport {
        scheme,
        levels,
        observed_order: orders.last().copied().flatten(),
        exact,
    })
}
