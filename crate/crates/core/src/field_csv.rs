//! `field.csv`: header `t,x,k,v`, rows ordered by time then position, SI
//! units, every number written as a positional decimal with 17 significant
//! digits so that reading it back reproduces the same `f64` bit pattern.

use std::io::{BufRead, Write};

use crate::error::CsvError;
use crate::model::Grid;
use crate::solver::{FieldSnapshot, SimulationRecord};

pub const HEADER: &str = "t,x,k,v";

/// Positional decimal with 17 significant digits (no exponent).
pub fn format_sig17(x: f64) -> String {
    if !x.is_finite() {
        return x.to_string();
    }
    let sci = format!("{:.16e}", x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    let (sign, mantissa) = match mantissa.strip_prefix('-') {
        Some(m) => ("-", m),
        None => ("", mantissa),
    };
    let digits: String = mantissa.chars().filter(char::is_ascii_digit).collect();
    let n = digits.len() as i32;
    if exp < 0 {
        let zeros = "0".repeat((-exp - 1) as usize);
        format!("{sign}0.{zeros}{digits}")
    } else if exp + 1 >= n {
        let zeros = "0".repeat((exp + 1 - n) as usize);
        format!("{sign}{digits}{zeros}")
    } else {
        let (int, frac) = digits.split_at((exp + 1) as usize);
        format!("{sign}{int}.{frac}")
    }
}

pub fn write_field_csv<W: Write>(record: &SimulationRecord, mut out: W) -> std::io::Result<()> {
    writeln!(out, "{HEADER}")?;
    for snap in &record.snapshots {
        write_snapshot_rows(snap, &mut out)?;
    }
    out.flush()
}

fn write_snapshot_rows<W: Write>(snap: &FieldSnapshot, out: &mut W) -> std::io::Result<()> {
    let t = format_sig17(snap.t);
    for (i, (k, v)) in snap.k.iter().zip(&snap.v).enumerate() {
        writeln!(
            out,
            "{t},{},{},{}",
            format_sig17(snap.grid.cell_center(i)),
            format_sig17(*k),
            format_sig17(*v)
        )?;
    }
    Ok(())
}

/// Read snapshots back; consecutive rows sharing `t` form one snapshot.
pub fn read_field_csv<R: BufRead>(input: R) -> Result<Vec<FieldSnapshot>, CsvError> {
    let mut lines = input.lines().enumerate();
    let header = lines.next().map(|(_, h)| h).transpose()?;
    match header {
        Some(h) if h.trim() == HEADER => {}
        _ => {
            return Err(CsvError::Format {
                line: 1,
                message: format!("expected header `{HEADER}`"),
            })
        }
    }

    struct Pending {
        t: f64,
        x: Vec<f64>,
        k: Vec<f64>,
        v: Vec<f64>,
    }
    let finish = |p: Pending, line: usize| -> Result<FieldSnapshot, CsvError> {
        let grid = Grid::new(p.x.len(), 2.0 * p.x[0]).map_err(|e| CsvError::Format {
            line,
            message: e.to_string(),
        })?;
        for (i, &x) in p.x.iter().enumerate() {
            if (x - grid.cell_center(i)).abs() > 1e-9 * grid.length() {
                return Err(CsvError::Format {
                    line,
                    message: format!("x = {x} is not on a uniform cell-centred grid"),
                });
            }
        }
        Ok(FieldSnapshot {
            t: p.t,
            k: p.k,
            v: p.v,
            grid,
        })
    };

    let mut snapshots = Vec::new();
    let mut pending: Option<Pending> = None;
    let mut last_line = 1;
    for (i, line) in lines {
        let line_no = i + 1;
        last_line = line_no;
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let cols: Vec<f64> = line
            .split(',')
            .map(|c| c.trim().parse::<f64>())
            .collect::<Result<_, _>>()
            .map_err(|_| CsvError::Format {
                line: line_no,
                message: format!("cannot parse `{line}`"),
            })?;
        let [t, x, k, v] = cols[..] else {
            return Err(CsvError::Format {
                line: line_no,
                message: "expected 4 columns".into(),
            });
        };
        match &mut pending {
            Some(p) if p.t == t => {
                p.x.push(x);
                p.k.push(k);
                p.v.push(v);
            }
            _ => {
                if let Some(done) = pending.take() {
                    snapshots.push(finish(done, line_no)?);
                }
                pending = Some(Pending {
                    t,
                    x: vec![x],
                    k: vec![k],
                    v: vec![v],
                });
            }
        }
    }
    if let Some(done) = pending {
        snapshots.push(finish(done, last_line)?);
    }
    Ok(snapshots)
}
