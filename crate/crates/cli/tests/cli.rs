use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use arz_core::analysis::rmse;
use arz_core::field_csv::read_field_csv;
use arz_core::{load_scenario, Solver};
use tempfile::TempDir;

fn arzsim(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_arzsim"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn config(dir: &TempDir, name: &str, text: &str) -> PathBuf {
    let path = dir.path().join(name);
    fs::write(&path, text).unwrap();
    path
}

fn run_cmd(cmd: &str, cfg: &Path, out: &Path, extra: &[&str]) -> Output {
    let mut args = vec![cmd, cfg.to_str().unwrap(), "--out", out.to_str().unwrap()];
    args.extend_from_slice(extra);
    arzsim(&args)
}

fn csv_rows(path: &Path) -> Vec<Vec<String>> {
    fs::read_to_string(path)
        .unwrap()
        .lines()
        .skip(1)
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect()
}

#[test]
fn default_run_writes_all_artifacts() {
    let dir = TempDir::new().unwrap();
    let cfg = config(&dir, "ic1.cfg", "label = ic1-case3\ncase = 3\n");
    let out = dir.path().join("out");
    let result = run_cmd("run", &cfg, &out, &[]);
    assert_eq!(
        result.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&result.stderr)
    );
    for name in [
        "field.csv",
        "manifest.txt",
        "heatmap_k.png",
        "cross_t100.png",
        "cross_t200.png",
    ] {
        assert!(out.join(name).is_file(), "{name} missing");
    }
    let manifest = fs::read_to_string(out.join("manifest.txt")).unwrap();
    assert!(manifest.contains("label: ic1-case3"));
    assert!(manifest.contains("status: ok"));
    assert!(manifest.contains("max_cfl: "));
    assert!(manifest.contains("total_clamps: 0"));
    assert!(manifest.contains("  case = 3"));
}

#[test]
fn doubled_time_step_fails_before_the_first_step() {
    let dir = TempDir::new().unwrap();
    let cfg = config(&dir, "cfl.cfg", "dt_s = 2\n");
    let out = dir.path().join("out");
    let result = run_cmd("run", &cfg, &out, &[]);
    assert_eq!(result.status.code(), Some(3));
    let manifest = fs::read_to_string(out.join("manifest.txt")).unwrap();
    assert!(manifest.contains("error: CflViolation"), "{manifest}");
    assert!(manifest.contains("failing_step: 0"));
    assert!(!out.join("field.csv").exists());
}

#[test]
fn invalid_smoothing_is_a_validation_error() {
    let dir = TempDir::new().unwrap();
    let cfg = config(&dir, "bad.cfg", "smoothing_s = -0.1\n");
    let out = dir.path().join("out");
    let result = run_cmd("run", &cfg, &out, &[]);
    assert_eq!(result.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&result.stderr).contains("smoothing_weight"));
    assert!(!out.join("manifest.txt").exists());
}

#[test]
fn bad_inputs_exit_with_code_two() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("out");
    let unknown = config(&dir, "unknown.cfg", "speed_limit = 3\n");
    assert_eq!(run_cmd("run", &unknown, &out, &[]).status.code(), Some(2));
    let garbage = config(&dir, "garbage.cfg", "dt_s = fast\n");
    assert_eq!(run_cmd("cases", &garbage, &out, &[]).status.code(), Some(2));
    let missing = dir.path().join("nope.cfg");
    assert_eq!(
        run_cmd("converge", &missing, &out, &[]).status.code(),
        Some(2)
    );
    let levels = config(&dir, "ok.cfg", "");
    let result = run_cmd("converge", &levels, &out, &["--levels", "1,3"]);
    assert_eq!(result.status.code(), Some(2));
}

#[test]
fn identical_configs_give_identical_fields() {
    let dir = TempDir::new().unwrap();
    let cfg = config(&dir, "ic2.cfg", "ic = ic2\ncase = 4\n");
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    assert_eq!(
        run_cmd("run", &cfg, &a, &["--no-plots"]).status.code(),
        Some(0)
    );
    assert_eq!(
        run_cmd("run", &cfg, &b, &["--no-plots"]).status.code(),
        Some(0)
    );
    let (fa, fb) = (
        fs::read(a.join("field.csv")).unwrap(),
        fs::read(b.join("field.csv")).unwrap(),
    );
    assert!(!fa.is_empty());
    assert_eq!(fa, fb);
    assert!(!a.join("heatmap_k.png").exists());
}

#[test]
fn field_csv_reloads_with_zero_rmse() {
    let dir = TempDir::new().unwrap();
    let text = "ic = ic1\ncase = 3\nrecord_every = 10\n";
    let cfg = config(&dir, "ic1.cfg", text);
    let out = dir.path().join("out");
    assert_eq!(
        run_cmd("run", &cfg, &out, &["--quiet", "--no-plots"])
            .status
            .code(),
        Some(0)
    );

    let spec = load_scenario(text).unwrap();
    let record = Solver::new(&spec.params, spec.ramp.as_ref(), spec.boundary)
        .unwrap()
        .run(
            &spec.initial_state().unwrap(),
            spec.horizon,
            spec.record_every,
        )
        .unwrap();
    let file = fs::File::open(out.join("field.csv")).unwrap();
    let reloaded = read_field_csv(std::io::BufReader::new(file)).unwrap();
    assert_eq!(reloaded.len(), record.snapshots.len());
    for (a, b) in record.snapshots.iter().zip(&reloaded) {
        assert_eq!(rmse(a, b).unwrap(), 0.0);
    }
}

#[test]
fn quiet_runs_print_nothing() {
    let dir = TempDir::new().unwrap();
    let cfg = config(&dir, "q.cfg", "horizon_s = 10\n");
    let result = run_cmd(
        "run",
        &cfg,
        &dir.path().join("out"),
        &["--quiet", "--no-plots"],
    );
    assert_eq!(result.status.code(), Some(0));
    assert!(result.stdout.is_empty());
}

fn column(header: &str, name: &str) -> usize {
    header.split(',').position(|c| c == name).unwrap()
}

#[test]
fn cases_report_balances_mass() {
    let dir = TempDir::new().unwrap();
    let cfg = config(&dir, "ic1.cfg", "ic = ic1\n");
    let out = dir.path().join("out");
    let result = run_cmd("cases", &cfg, &out, &[]);
    assert_eq!(
        result.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&result.stderr)
    );
    for name in [
        "report.csv",
        "manifest.txt",
        "cases_t100.png",
        "cases_t200.png",
        "field_case4.csv",
    ] {
        assert!(out.join(name).is_file(), "{name} missing");
    }

    let text = fs::read_to_string(out.join("report.csv")).unwrap();
    let header = text.lines().next().unwrap();
    let (case, t, residual) = (
        column(header, "case"),
        column(header, "t_s"),
        column(header, "max_ledger_residual"),
    );
    let (change, source, boundary) = (
        column(header, "mass_change_veh"),
        column(header, "source_veh"),
        column(header, "boundary_veh"),
    );
    let rows = csv_rows(&out.join("report.csv"));
    assert_eq!(rows.len(), 4 * 201);
    for row in &rows {
        let num = |i: usize| row[i].parse::<f64>().unwrap();
        assert!(num(residual) <= 1e-10, "{row:?}");
        if num(t) == 200.0 {
            let interior = num(change) - num(boundary);
            match row[case].as_str() {
                "1" | "2" => assert_eq!(num(source), 0.0),
                _ => {
                    assert!(num(source) > 0.0);
                    assert_eq!(interior.signum(), num(source).signum());
                }
            }
        }
    }
}

#[test]
fn cases_ic2_orders_oscillation() {
    let dir = TempDir::new().unwrap();
    let cfg = config(&dir, "ic2.cfg", "ic = ic2\nhorizon_s = 100\n");
    let out = dir.path().join("out");
    assert_eq!(
        run_cmd("cases", &cfg, &out, &["--no-plots"]).status.code(),
        Some(0)
    );
    let text = fs::read_to_string(out.join("report.csv")).unwrap();
    let header = text.lines().next().unwrap();
    let (case, t, tv) = (
        column(header, "case"),
        column(header, "t_s"),
        column(header, "total_variation"),
    );
    let at_100: Vec<(String, f64)> = csv_rows(&out.join("report.csv"))
        .into_iter()
        .filter(|r| r[t].parse::<f64>().unwrap() == 100.0)
        .map(|r| (r[case].clone(), r[tv].parse().unwrap()))
        .collect();
    let tv_of = |c: &str| at_100.iter().find(|(k, _)| k == c).unwrap().1;
    assert!(tv_of("3") <= 1.05 * tv_of("4"));
}

#[test]
fn relaxation_is_inactive_at_equilibrium() {
    let dir = TempDir::new().unwrap();
    let cfg = config(&dir, "eq.cfg", "ic = uniform:0.5\nhorizon_s = 60\n");
    let out = dir.path().join("out");
    assert_eq!(
        run_cmd("cases", &cfg, &out, &["--no-plots"]).status.code(),
        Some(0)
    );
    let a = csv_rows(&out.join("field_case1.csv"));
    let b = csv_rows(&out.join("field_case2.csv"));
    assert_eq!(a.len(), b.len());
    for (ra, rb) in a.iter().zip(&b) {
        for (x, y) in ra.iter().zip(rb) {
            let (x, y): (f64, f64) = (x.parse().unwrap(), y.parse().unwrap());
            assert!((x - y).abs() <= 1e-12 * y.abs().max(1.0));
        }
    }
}

#[test]
fn converge_reports_orders() {
    let dir = TempDir::new().unwrap();
    let cfg = config(
        &dir,
        "sine.cfg",
        "ic = sine:0.3:0.03\nboundary = periodic\nsmoothing_s = 0\nhorizon_s = 20\n",
    );
    let out = dir.path().join("out");
    let result = run_cmd("converge", &cfg, &out, &["--oracle"]);
    assert_eq!(
        result.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&result.stderr)
    );
    let rows = csv_rows(&out.join("report.csv"));
    let observed = |scheme: &str| -> f64 {
        rows.iter()
            .find(|r| r[0] == scheme && r[1] == "observed")
            .unwrap()[6]
            .parse()
            .unwrap()
    };
    assert!(observed("maccormack_cd") >= 1.8);
    assert!((observed("lax_friedrichs") - 1.0).abs() <= 0.2);
    assert_eq!(rows.len(), 2 * 5);
}

#[test]
fn converge_flags_constant_data_as_exact() {
    let dir = TempDir::new().unwrap();
    let cfg = config(&dir, "flat.cfg", "ic = uniform:0.3\nhorizon_s = 10\n");
    let out = dir.path().join("out");
    assert_eq!(
        run_cmd("converge", &cfg, &out, &["--levels", "1,2,4"])
            .status
            .code(),
        Some(0)
    );
    let rows = csv_rows(&out.join("report.csv"));
    let observed = rows.iter().find(|r| r[1] == "observed").unwrap();
    assert_eq!(observed[7], "true");
    assert_eq!(observed[6], "");
}
