use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::thread;
use std::time::Instant;

use anyhow::{Context, Result};
use arz_core::analysis::{
    convergence_study, mass_ledger, total_variation, ConvergenceReport, Scheme,
};
use arz_core::field_csv::{format_sig17, write_field_csv};
use arz_core::{
    load_scenario_file, AnalysisError, FieldSnapshot, ScenarioSpec, SimulationRecord, Solver,
    SolverError, SourceCase,
};
use image::Rgb;
use log::warn;

use crate::manifest::{error_kind, RunManifest, Status};
use crate::render;
use crate::{CommonArgs, ConvergeArgs};

const EXIT_OK: u8 = 0;
const EXIT_INVALID: u8 = 2;
const EXIT_NUMERICAL: u8 = 3;

const CROSS_SECTION_TIMES: [f64; 2] = [100.0, 200.0];

fn load(args: &CommonArgs) -> Result<ScenarioSpec, u8> {
    let spec = load_scenario_file(&args.config).map_err(|e| {
        eprintln!("error: {}: {e}", args.config.display());
        EXIT_INVALID
    })?;
    fs::create_dir_all(&args.out).map_err(|e| {
        eprintln!("error: creating {}: {e}", args.out.display());
        EXIT_INVALID
    })?;
    Ok(spec)
}

fn simulate(spec: &ScenarioSpec) -> Result<SimulationRecord, SolverError> {
    let initial = spec.initial_state()?;
    Solver::new(&spec.params, spec.ramp.as_ref(), spec.boundary)?.run(
        &initial,
        spec.horizon,
        spec.record_every,
    )
}

fn clamp_totals(record: &SimulationRecord) -> (usize, usize) {
    record.audits.iter().fold((0, 0), |(d, v), a| {
        (d + a.density_clamps, v + a.velocity_clamps)
    })
}

fn write_csv(record: &SimulationRecord, path: &Path) -> Result<()> {
    let file = File::create(path).with_context(|| format!("creating {}", path.display()))?;
    write_field_csv(record, BufWriter::new(file))
        .with_context(|| format!("writing {}", path.display()))
}

fn manifest(spec: &ScenarioSpec, args: &CommonArgs, command: &'static str) -> RunManifest {
    RunManifest {
        label: spec.label.clone(),
        command,
        config_path: args.config.clone(),
        resolved_config: spec.to_config_text(),
        outputs: Vec::new(),
        status: Status::Ok,
        wall_clock: Default::default(),
        max_cfl: None,
        clamps: None,
        notes: Vec::new(),
    }
}

fn output_failure(e: &anyhow::Error) -> Status {
    eprintln!("error: {e:#}");
    Status::Failed {
        exit_code: EXIT_INVALID,
        kind: "OutputError",
        step: None,
        message: format!("{e:#}"),
    }
}

/// Write the manifest and settle the exit code.
fn finish(manifest: RunManifest, out: &Path) -> u8 {
    let code = match &manifest.status {
        Status::Ok => EXIT_OK,
        Status::Failed { exit_code, .. } => *exit_code,
    };
    match manifest.write(out) {
        Ok(_) => code,
        Err(e) => {
            eprintln!("error: writing manifest in {}: {e}", out.display());
            code.max(EXIT_INVALID)
        }
    }
}

/// Render a best-effort image; failures only warn.
fn plot(result: image::ImageResult<()>, path: PathBuf, outputs: &mut Vec<PathBuf>) {
    match result {
        Ok(()) => outputs.push(path),
        Err(e) => warn!("could not render {}: {e}", path.display()),
    }
}

fn time_tag(t: f64) -> String {
    format!("{t}").replace('.', "_")
}

pub fn run(args: &CommonArgs) -> u8 {
    let spec = match load(args) {
        Ok(spec) => spec,
        Err(code) => return code,
    };
    let mut manifest = manifest(&spec, args, "run");
    let started = Instant::now();
    let result = simulate(&spec);
    manifest.wall_clock = started.elapsed();

    match result {
        Err(e) => {
            eprintln!("error: {e}");
            manifest.status = Status::from_solver_error(&e);
        }
        Ok(record) => {
            manifest.max_cfl = Some(record.max_cfl());
            manifest.clamps = Some(clamp_totals(&record));
            let csv = args.out.join("field.csv");
            match write_csv(&record, &csv) {
                Ok(()) => manifest.outputs.push(csv),
                Err(e) => manifest.status = output_failure(&e),
            }
            if !args.no_plots {
                render_run(&record, &spec, &args.out, &mut manifest.outputs);
            }
            if !args.quiet {
                println!(
                    "{}: {} snapshots to t = {} s, max CFL {:.4}, {} clamps",
                    spec.label,
                    record.snapshots.len(),
                    record.last().t,
                    record.max_cfl(),
                    record.total_clamps()
                );
            }
        }
    }
    finish(manifest, &args.out)
}

fn render_run(
    record: &SimulationRecord,
    spec: &ScenarioSpec,
    out: &Path,
    outputs: &mut Vec<PathBuf>,
) {
    let k_max = spec.params.k_jam;
    let path = out.join("heatmap_k.png");
    plot(
        render::heatmap(&record.snapshots, k_max, &path),
        path,
        outputs,
    );
    let initial = &record.snapshots[0];
    for t in CROSS_SECTION_TIMES {
        if let Some(snap) = record.snapshot_at(t) {
            let path = out.join(format!("cross_t{}.png", time_tag(t)));
            let series = [
                (initial, Rgb([170, 170, 170])),
                (snap, render::CASE_COLORS[0]),
            ];
            plot(render::cross_section(&series, k_max, &path), path, outputs);
        }
    }
}

struct CaseRun {
    case: SourceCase,
    record_every: usize,
    result: Result<SimulationRecord, SolverError>,
}

fn case_rows(run: &CaseRun, out: &mut impl Write) -> std::io::Result<()> {
    let n = run.case.number();
    let record = match &run.result {
        Ok(record) => record,
        Err(e) => {
            let at = e.step().map_or(String::new(), |s| format!(" at step {s}"));
            return writeln!(out, "{n},,{}{at},,,,,,,", error_kind(e));
        }
    };
    let ledger = mass_ledger(record);
    let dx = record.grid.dx();
    for (j, snap) in record.snapshots.iter().enumerate() {
        let steps = (j * run.record_every).min(record.audits.len());
        let audits = &record.audits[..steps];
        let mass_change: f64 = audits.iter().map(|a| a.mass_after - a.mass_before).sum();
        let source: f64 = audits.iter().map(|a| a.source_mass_injected).sum();
        let boundary: f64 = audits
            .iter()
            .map(|a| a.boundary_flux_mass + a.edge_mass_change)
            .sum();
        let residual = ledger[..steps]
            .iter()
            .map(|e| e.relative.abs())
            .fold(0.0, f64::max);
        let clamps: usize = audits.iter().map(|a| a.clamps()).sum();
        writeln!(
            out,
            "{n},{},ok,{},{},{},{},{},{},{clamps}",
            format_sig17(snap.t),
            format_sig17(total_variation(snap)),
            format_sig17(snap.k.iter().sum::<f64>() * dx),
            format_sig17(mass_change),
            format_sig17(source),
            format_sig17(boundary),
            format_sig17(residual),
        )?;
    }
    Ok(())
}

fn write_case_report(runs: &[CaseRun], path: &Path) -> Result<()> {
    let file = File::create(path).with_context(|| format!("creating {}", path.display()))?;
    let mut out = BufWriter::new(file);
    writeln!(
        out,
        "case,t_s,status,total_variation,mass_veh,mass_change_veh,source_veh,boundary_veh,max_ledger_residual,clamps"
    )?;
    for run in runs {
        case_rows(run, &mut out)?;
    }
    out.flush()?;
    Ok(())
}

pub fn cases(args: &CommonArgs) -> u8 {
    let spec = match load(args) {
        Ok(spec) => spec,
        Err(code) => return code,
    };
    let mut manifest = manifest(&spec, args, "cases");
    let started = Instant::now();
    let runs: Vec<CaseRun> = thread::scope(|s| {
        let handles: Vec<_> = SourceCase::ALL
            .iter()
            .map(|&case| {
                let spec = spec.with_case(case);
                s.spawn(move || CaseRun {
                    case,
                    record_every: spec.record_every,
                    result: simulate(&spec),
                })
            })
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("case run panicked"))
            .collect()
    });
    manifest.wall_clock = started.elapsed();

    let mut max_cfl = None::<f64>;
    let mut clamps = (0, 0);
    for run in &runs {
        let n = run.case.number();
        match &run.result {
            Ok(record) => {
                max_cfl = Some(max_cfl.unwrap_or(0.0).max(record.max_cfl()));
                let (d, v) = clamp_totals(record);
                clamps = (clamps.0 + d, clamps.1 + v);
                manifest
                    .notes
                    .push(format!("case {n}: ok, {} clamps", d + v));
                let path = args.out.join(format!("field_case{n}.csv"));
                match write_csv(record, &path) {
                    Ok(()) => manifest.outputs.push(path),
                    Err(e) => manifest.status = output_failure(&e),
                }
            }
            Err(e) => manifest.notes.push(format!("case {n}: failed, {e}")),
        }
    }
    manifest.max_cfl = max_cfl;
    manifest.clamps = Some(clamps);

    let report = args.out.join("report.csv");
    match write_case_report(&runs, &report) {
        Ok(()) => manifest.outputs.push(report),
        Err(e) => manifest.status = output_failure(&e),
    }
    if !args.no_plots {
        render_cases(&runs, &spec, &args.out, &mut manifest.outputs);
    }
    if let Err(e) = &runs[0].result {
        eprintln!("error: case 1: {e}");
        manifest.status = Status::from_solver_error(e);
    }
    if !args.quiet {
        for run in &runs {
            match &run.result {
                Ok(record) => println!(
                    "case {}: TV(t = {}) {:.5}, max CFL {:.4}, {} clamps",
                    run.case.number(),
                    record.last().t,
                    total_variation(record.last()),
                    record.max_cfl(),
                    record.total_clamps()
                ),
                Err(e) => println!("case {}: failed, {e}", run.case.number()),
            }
        }
    }
    finish(manifest, &args.out)
}

fn render_cases(runs: &[CaseRun], spec: &ScenarioSpec, out: &Path, outputs: &mut Vec<PathBuf>) {
    let mut times: Vec<f64> = CROSS_SECTION_TIMES.to_vec();
    if let Some(record) = runs.iter().find_map(|r| r.result.as_ref().ok()) {
        let last = record.last().t;
        if !times.iter().any(|&t| (t - last).abs() < 0.5 * record.dt) {
            times.push(last);
        }
    }
    for t in times {
        let panels: [Option<&FieldSnapshot>; 4] =
            std::array::from_fn(|i| runs[i].result.as_ref().ok().and_then(|r| r.snapshot_at(t)));
        if panels.iter().all(Option::is_none) {
            continue;
        }
        let path = out.join(format!("cases_t{}.png", time_tag(t)));
        plot(
            render::four_panel(&panels, spec.params.k_jam, &path),
            path,
            outputs,
        );
    }
}

fn write_convergence_report(reports: &[ConvergenceReport], path: &Path) -> Result<()> {
    let file = File::create(path).with_context(|| format!("creating {}", path.display()))?;
    let mut out = BufWriter::new(file);
    writeln!(
        out,
        "scheme,level,n_cells,dx_m,dt_s,l1_diff_to_finer,order,exact"
    )?;
    let opt = |x: Option<f64>| x.map(format_sig17).unwrap_or_default();
    for r in reports {
        for level in &r.levels {
            writeln!(
                out,
                "{},{},{},{},{},{},{},{}",
                r.scheme.name(),
                level.refinement,
                level.n_cells,
                format_sig17(level.dx),
                format_sig17(level.dt),
                opt(level.diff_to_finer),
                opt(level.order),
                r.exact
            )?;
        }
        writeln!(
            out,
            "{},observed,,,,,{},{}",
            r.scheme.name(),
            opt(r.observed_order),
            r.exact
        )?;
    }
    out.flush()?;
    Ok(())
}

pub fn converge(args: &ConvergeArgs) -> u8 {
    let common = &args.common;
    let spec = match load(common) {
        Ok(spec) => spec,
        Err(code) => return code,
    };
    let mut manifest = manifest(&spec, common, "converge");
    let mut schemes = vec![Scheme::MacCormackCd];
    if args.oracle {
        schemes.push(Scheme::LaxFriedrichs);
    }

    let started = Instant::now();
    let mut reports = Vec::new();
    for scheme in schemes {
        match convergence_study(&spec, &args.levels, scheme) {
            Ok(report) => reports.push(report),
            Err(AnalysisError::Solver(e)) => {
                eprintln!("error: {}: {e}", scheme.name());
                manifest.status = Status::from_solver_error(&e);
                break;
            }
            Err(e) => {
                eprintln!("error: {}: {e}", scheme.name());
                manifest.status = Status::Failed {
                    exit_code: EXIT_NUMERICAL,
                    kind: "AnalysisError",
                    step: None,
                    message: e.to_string(),
                };
                break;
            }
        }
    }
    manifest.wall_clock = started.elapsed();

    if !reports.is_empty() {
        let path = common.out.join("report.csv");
        match write_convergence_report(&reports, &path) {
            Ok(()) => manifest.outputs.push(path),
            Err(e) => manifest.status = output_failure(&e),
        }
    }
    for r in &reports {
        let summary = match (r.exact, r.observed_order) {
            (true, _) => "exact".to_string(),
            (false, Some(p)) => format!("observed order {p:.4}"),
            (false, None) => "order undefined".to_string(),
        };
        manifest
            .notes
            .push(format!("{}: {summary}", r.scheme.name()));
        if !common.quiet {
            println!("{}: {summary}", r.scheme.name());
        }
        if !r.exact && r.observed_order.is_none() && manifest.status == Status::Ok {
            manifest.status = Status::Failed {
                exit_code: EXIT_NUMERICAL,
                kind: "NoOrder",
                step: None,
                message: format!("{}: differences did not shrink", r.scheme.name()),
            };
        }
    }
    finish(manifest, &common.out)
}
