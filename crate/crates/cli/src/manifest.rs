use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Duration;

use arz_core::SolverError;

#[derive(Debug, Clone, PartialEq)]
pub enum Status {
    Ok,
    Failed {
        exit_code: u8,
        kind: &'static str,
        step: Option<usize>,
        message: String,
    },
}

impl Status {
    pub fn from_solver_error(e: &SolverError) -> Self {
        Status::Failed {
            exit_code: exit_code(e),
            kind: error_kind(e),
            step: e.step(),
            message: e.to_string(),
        }
    }
}

pub fn error_kind(e: &SolverError) -> &'static str {
    match e.root() {
        SolverError::CflViolation { .. } => "CflViolation",
        SolverError::NonFinite { .. } => "NonFinite",
        SolverError::Domain(_) => "DomainError",
        SolverError::Validation(_) => "ValidationError",
        SolverError::BadHorizon { .. } => "BadHorizon",
        SolverError::AtStep { .. } => unreachable!("root strips step annotations"),
    }
}

pub fn exit_code(e: &SolverError) -> u8 {
    match e.root() {
        SolverError::Validation(_) | SolverError::BadHorizon { .. } => 2,
        _ => 3,
    }
}

/// Summary of one CLI invocation, written as `manifest.txt`.
#[derive(Debug)]
pub struct RunManifest {
    pub label: String,
    pub command: &'static str,
    pub config_path: PathBuf,
    pub resolved_config: String,
    pub outputs: Vec<PathBuf>,
    pub status: Status,
    pub wall_clock: Duration,
    pub max_cfl: Option<f64>,
    pub clamps: Option<(usize, usize)>,
    pub notes: Vec<String>,
}

impl RunManifest {
    pub fn render(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "label: {}", self.label);
        let _ = writeln!(s, "command: {}", self.command);
        let _ = writeln!(s, "config: {}", self.config_path.display());
        match &self.status {
            Status::Ok => {
                let _ = writeln!(s, "status: ok");
                let _ = writeln!(s, "exit_code: 0");
            }
            Status::Failed {
                exit_code,
                kind,
                step,
                message,
            } => {
                let _ = writeln!(s, "status: failed");
                let _ = writeln!(s, "exit_code: {exit_code}");
                let _ = writeln!(s, "error: {kind}");
                if let Some(step) = step {
                    let _ = writeln!(s, "failing_step: {step}");
                }
                let _ = writeln!(s, "message: {message}");
            }
        }
        let _ = writeln!(s, "wall_clock_s: {:.6}", self.wall_clock.as_secs_f64());
        match self.max_cfl {
            Some(c) => {
                let _ = writeln!(s, "max_cfl: {c:.6}");
            }
            None => {
                let _ = writeln!(s, "max_cfl: n/a");
            }
        }
        match self.clamps {
            Some((d, v)) => {
                let _ = writeln!(s, "total_clamps: {}", d + v);
                let _ = writeln!(s, "density_clamps: {d}");
                let _ = writeln!(s, "velocity_clamps: {v}");
            }
            None => {
                let _ = writeln!(s, "total_clamps: n/a");
            }
        }
        for note in &self.notes {
            let _ = writeln!(s, "note: {note}");
        }
        let _ = writeln!(s, "outputs:");
        for out in &self.outputs {
            let _ = writeln!(s, "  {}", out.display());
        }
        let _ = writeln!(s, "resolved_config:");
        for line in self.resolved_config.lines() {
            let _ = writeln!(s, "  {line}");
        }
        s
    }

    pub fn write(&self, dir: &Path) -> std::io::Result<PathBuf> {
        let path = dir.join("manifest.txt");
        fs::write(&path, self.render())?;
        Ok(path)
    }
}
