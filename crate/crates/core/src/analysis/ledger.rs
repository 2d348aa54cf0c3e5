use crate::solver::SimulationRecord;

/// Mass balance of one step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LedgerEntry {
    pub step: usize,
    /// `mass_after - mass_before`, veh.
    pub mass_change: f64,
    /// Source integral the scheme applied over the step, veh.
    pub source: f64,
    /// `mass_change - source - boundary terms - clamp mass`, veh.
    pub residual: f64,
    /// `residual / M_0`, with `M_0` the mass at the start of the run.
    pub relative: f64,
}

/// Per-step mass balance residuals of a run.
///
/// Under zero-gradient boundaries the residual is corrected by the end
/// fluxes and the edge-cell treatment; under periodic wrap both are zero.
pub fn mass_ledger(record: &SimulationRecord) -> Vec<LedgerEntry> {
    let m0 = record.audits.first().map_or(1.0, |a| a.mass_before);
    let scale = if m0 != 0.0 { m0.abs() } else { 1.0 };
    record
        .audits
        .iter()
        .map(|a| {
            let mass_change = a.mass_after - a.mass_before;
            let residual = mass_change
                - a.source_mass_injected
                - a.boundary_flux_mass
                - a.edge_mass_change
                - a.clamp_mass_change;
            LedgerEntry {
                step: a.step_index,
                mass_change,
                source: a.source_mass_injected,
                residual,
                relative: residual / scale,
            }
        })
        .collect()
}
