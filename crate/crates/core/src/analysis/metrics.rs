use crate::error::AnalysisError;
use crate::solver::FieldSnapshot;

fn check_matching(a: &FieldSnapshot, b: &FieldSnapshot) -> Result<(), AnalysisError> {
    if a.k.len() != b.k.len() || a.grid.n_cells() != b.grid.n_cells() {
        return Err(AnalysisError::GridMismatch(format!(
            "{} cells vs {} cells",
            a.k.len(),
            b.k.len()
        )));
    }
    let dx_tol = 1e-12 * a.grid.dx().abs();
    if (a.grid.dx() - b.grid.dx()).abs() > dx_tol {
        return Err(AnalysisError::GridMismatch(format!(
            "dx {} vs {}",
            a.grid.dx(),
            b.grid.dx()
        )));
    }
    if (a.t - b.t).abs() > 1e-9 * a.t.abs().max(1.0) {
        return Err(AnalysisError::GridMismatch(format!("t {} vs {}", a.t, b.t)));
    }
    Ok(())
}

/// Root-mean-square density error over cells, veh/m.
pub fn rmse(predicted: &FieldSnapshot, observed: &FieldSnapshot) -> Result<f64, AnalysisError> {
    check_matching(predicted, observed)?;
    let n = predicted.k.len() as f64;
    let sq: f64 = predicted
        .k
        .iter()
        .zip(&observed.k)
        .map(|(p, o)| (p - o) * (p - o))
        .sum();
    Ok((sq / n).sqrt())
}

pub fn max_abs_error(
    predicted: &FieldSnapshot,
    observed: &FieldSnapshot,
) -> Result<f64, AnalysisError> {
    check_matching(predicted, observed)?;
    Ok(predicted
        .k
        .iter()
        .zip(&observed.k)
        .map(|(p, o)| (p - o).abs())
        .fold(0.0, f64::max))
}

/// `sum |k_i - k_j| dx`, veh.
pub fn l1_distance(a: &FieldSnapshot, b: &FieldSnapshot) -> Result<f64, AnalysisError> {
    check_matching(a, b)?;
    Ok(a.k
        .iter()
        .zip(&b.k)
        .map(|(p, o)| (p - o).abs())
        .sum::<f64>()
        * a.grid.dx())
}

/// `sum |k_{i+1} - k_i|`, veh/m.
pub fn total_variation(snapshot: &FieldSnapshot) -> f64 {
    snapshot.k.windows(2).map(|w| (w[1] - w[0]).abs()).sum()
}

/// First position where density crosses `level`, interpolated linearly
/// between cell centres. `None` if the field never crosses it.
pub fn front_position(snapshot: &FieldSnapshot, level: f64) -> Option<f64> {
    let grid = snapshot.grid;
    snapshot.k.windows(2).enumerate().find_map(|(i, w)| {
        let (a, b) = (w[0] - level, w[1] - level);
        if a == 0.0 {
            Some(grid.cell_center(i))
        } else if a * b < 0.0 {
            Some(grid.cell_center(i) + grid.dx() * a / (a - b))
        } else {
            None
        }
    })
}

/// Error and oscillation metrics of a predicted run against reference fields.
#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonReport {
    /// `(t, rmse)` in veh/m.
    pub rmse_by_time: Vec<(f64, f64)>,
    /// `(t, total variation of the prediction)` in veh/m.
    pub tv_by_time: Vec<(f64, f64)>,
    /// Largest pointwise density error over all compared times, veh/m.
    pub max_abs_error: f64,
}

/// Compare snapshots pairwise by time. Every observed time must be present
/// in `predicted`.
pub fn compare(
    predicted: &[FieldSnapshot],
    observed: &[FieldSnapshot],
) -> Result<ComparisonReport, AnalysisError> {
    let mut report = ComparisonReport {
        rmse_by_time: Vec::with_capacity(observed.len()),
        tv_by_time: Vec::with_capacity(observed.len()),
        max_abs_error: 0.0,
    };
    for obs in observed {
        let pred = predicted
            .iter()
            .find(|p| (p.t - obs.t).abs() <= 1e-9 * obs.t.abs().max(1.0))
            .ok_or_else(|| {
                AnalysisError::GridMismatch(format!("no prediction at t = {}", obs.t))
            })?;
        report.rmse_by_time.push((obs.t, rmse(pred, obs)?));
        report.tv_by_time.push((obs.t, total_variation(pred)));
        report.max_abs_error = report.max_abs_error.max(max_abs_error(pred, obs)?);
    }
    Ok(report)
}
