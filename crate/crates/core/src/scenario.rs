//! Scenario construction: initial conditions, ramps and the key-value
//! config format.
//!
//! ```text
//! # IC1 with a localized on-ramp
//! ic = ic1
//! case = 3
//! ramp_a_m = 400
//! ramp_b_m = 800
//! horizon_s = 200
//! ```
//!
//! Densities in initial conditions are fractions of `k_jam`; everything is
//! converted to SI when the state is built.

use std::collections::HashSet;
use std::f64::consts::PI;
use std::fmt::Write as _;
use std::path::Path;

use crate::error::{ScenarioError, ValidationError};
use crate::model::{
    equilibrium_speed, Grid, ModelParams, PressureLaw, RampConfig, Schedule, SourceCase, State,
};
use crate::solver::BoundaryMode;

/// Initial density profile; all densities are fractions of `k_jam`.
#[derive(Debug, Clone, PartialEq)]
pub enum InitialCondition {
    /// `left` for `x < jump_at`, `right` for `x >= jump_at`.
    RiemannStep {
        left: f64,
        right: f64,
        jump_at: f64,
    },
    UniformEquilibrium(f64),
    /// Piecewise-linear through `(x, fraction)` knots, constant beyond the ends.
    Custom(Vec<(f64, f64)>),
    /// `mean + amplitude sin(2 pi waves x / L)`.
    Sine {
        mean: f64,
        amplitude: f64,
        waves: u32,
    },
}

impl InitialCondition {
    pub fn ic1(params: &ModelParams) -> Self {
        InitialCondition::RiemannStep {
            left: 0.46,
            right: 0.10,
            jump_at: params.road_length / 2.0,
        }
    }

    pub fn ic2(params: &ModelParams) -> Self {
        InitialCondition::RiemannStep {
            left: 0.90,
            right: 0.55,
            jump_at: params.road_length / 2.0,
        }
    }

    /// Density fraction at position `x`.
    pub fn fraction_at(&self, x: f64, road_length: f64) -> f64 {
        match self {
            InitialCondition::RiemannStep {
                left,
                right,
                jump_at,
            } => {
                if x < *jump_at {
                    *left
                } else {
                    *right
                }
            }
            InitialCondition::UniformEquilibrium(f) => *f,
            InitialCondition::Custom(knots) => interpolate(knots, x),
            InitialCondition::Sine {
                mean,
                amplitude,
                waves,
            } => mean + amplitude * (2.0 * PI * f64::from(*waves) * x / road_length).sin(),
        }
    }

    pub fn validate(&self, params: &ModelParams) -> Result<(), ValidationError> {
        let lo = params.k_floor / params.k_jam;
        let check = |name: &str, f: f64| {
            if (lo..=1.0).contains(&f) {
                Ok(())
            } else {
                Err(ValidationError::new(
                    format!("ic.{name}"),
                    format!("density fraction {f} is outside [{lo}, 1]"),
                ))
            }
        };
        match self {
            InitialCondition::RiemannStep {
                left,
                right,
                jump_at,
            } => {
                check("left", *left)?;
                check("right", *right)?;
                if !(*jump_at > 0.0 && *jump_at < params.road_length) {
                    return Err(ValidationError::new(
                        "ic.jump_at",
                        format!("{jump_at} m is outside (0, L)"),
                    ));
                }
            }
            InitialCondition::UniformEquilibrium(f) => check("fraction", *f)?,
            InitialCondition::Custom(knots) => {
                if knots.is_empty() {
                    return Err(ValidationError::new("ic.knots", "no knots given"));
                }
                if knots
                    .windows(2)
                    .any(|w| w[1].0.partial_cmp(&w[0].0) != Some(std::cmp::Ordering::Greater))
                {
                    return Err(ValidationError::new("ic.knots", "x must increase strictly"));
                }
                for &(_, f) in knots {
                    check("knots", f)?;
                }
            }
            InitialCondition::Sine {
                mean, amplitude, ..
            } => {
                check("mean", mean - amplitude.abs())?;
                check("mean", mean + amplitude.abs())?;
            }
        }
        Ok(())
    }

    fn to_config_value(&self) -> String {
        match self {
            InitialCondition::RiemannStep {
                left,
                right,
                jump_at,
            } => format!("riemann:{left}:{right}:{jump_at}"),
            InitialCondition::UniformEquilibrium(f) => format!("uniform:{f}"),
            InitialCondition::Custom(knots) => {
                let parts: Vec<String> = knots.iter().map(|(x, f)| format!("{x}:{f}")).collect();
                format!("knots:{}", parts.join(","))
            }
            InitialCondition::Sine {
                mean,
                amplitude,
                waves,
            } => format!("sine:{mean}:{amplitude}:{waves}"),
        }
    }
}

fn interpolate(knots: &[(f64, f64)], x: f64) -> f64 {
    let first = knots[0];
    let last = knots[knots.len() - 1];
    if x <= first.0 {
        return first.1;
    }
    if x >= last.0 {
        return last.1;
    }
    let j = knots.partition_point(|&(kx, _)| kx <= x);
    let (x0, f0) = knots[j - 1];
    let (x1, f1) = knots[j];
    f0 + (f1 - f0) * (x - x0) / (x1 - x0)
}

/// Cell-centre sampled state with `v = V(k)` unless `initial_speed` is set.
pub fn build_state(
    ic: &InitialCondition,
    initial_speed: Option<f64>,
    params: &ModelParams,
) -> Result<State, ValidationError> {
    ic.validate(params)?;
    let grid = Grid::from_params(params)?;
    let k: Vec<f64> = grid
        .centers()
        .map(|x| ic.fraction_at(x, params.road_length) * params.k_jam)
        .collect();
    let v = k
        .iter()
        .map(|&ki| match initial_speed {
            Some(v0) => Ok(v0),
            None => equilibrium_speed(ki, params),
        })
        .collect::<Result<Vec<f64>, _>>()
        .map_err(|e| ValidationError::new("ic", e.to_string()))?;
    State::from_primitive(&k, &v, 0.0, params)
        .map_err(|e| ValidationError::new("ic", e.to_string()))
}

/// Congested-to-free-flow Riemann datum (0.46 / 0.10 of `k_jam`).
pub fn build_ic1(params: &ModelParams) -> Result<State, ValidationError> {
    build_state(&InitialCondition::ic1(params), None, params)
}

/// Heavy-to-lighter congestion Riemann datum (0.90 / 0.55 of `k_jam`).
pub fn build_ic2(params: &ModelParams) -> Result<State, ValidationError> {
    build_state(&InitialCondition::ic2(params), None, params)
}

/// A fully resolved, validated scenario.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioSpec {
    pub label: String,
    pub params: ModelParams,
    pub ic: InitialCondition,
    /// Constant initial speed; `None` starts at equilibrium `V(k)`.
    pub initial_speed: Option<f64>,
    /// Explicit ramp, or the full-road default when the case has sources.
    pub ramp: Option<RampConfig>,
    pub inflow: Schedule,
    pub outflow: Schedule,
    pub horizon: f64,
    pub boundary: BoundaryMode,
    pub record_every: usize,
    pub seed: Option<u64>,
}

impl Default for ScenarioSpec {
    fn default() -> Self {
        load_scenario("").expect("defaults are valid")
    }
}

impl ScenarioSpec {
    pub fn initial_state(&self) -> Result<State, ValidationError> {
        build_state(&self.ic, self.initial_speed, &self.params)
    }

    /// Ramp to use when sources are switched on: the configured one, or the
    /// whole road at the configured intensities.
    pub fn source_ramp(&self) -> RampConfig {
        self.ramp.clone().unwrap_or_else(|| RampConfig {
            a: 0.0,
            b: self.params.road_length,
            g_in: self.inflow.clone(),
            g_out: self.outflow.clone(),
        })
    }

    /// Copy of this scenario running `case`, with the ramp resolved for it.
    pub fn with_case(&self, case: SourceCase) -> ScenarioSpec {
        let mut spec = self.clone();
        spec.params.source_case = case;
        if case.has_source() {
            spec.ramp = Some(self.source_ramp());
        }
        spec
    }

    /// Canonical config text; reloading it yields an equal spec.
    pub fn to_config_text(&self) -> String {
        let p = &self.params;
        let mut out = String::new();
        let mut put = |key: &str, value: String| {
            let _ = writeln!(out, "{key} = {value}");
        };
        put("label", self.label.clone());
        put("length_m", p.road_length.to_string());
        put("vmax_mps", p.v_max.to_string());
        put("kjam_vpm", p.k_jam.to_string());
        put("kcr_fraction", (p.k_cr / p.k_jam).to_string());
        put("c0_sq", p.c0_sq.to_string());
        put("phi", p.phi.to_string());
        put("gamma", p.gamma.to_string());
        put(
            "pressure",
            match p.pressure_law {
                PressureLaw::OffsetPower => "offset_power",
                PressureLaw::MoutariRascle => "moutari_rascle",
            }
            .into(),
        );
        put("dt_s", p.dt.to_string());
        put("dx_m", p.dx.to_string());
        put("smoothing_s", p.smoothing_weight.to_string());
        put("a_in", schedule_text(&self.inflow));
        put("a_out", schedule_text(&self.outflow));
        put("delta_s", p.relaxation_time.to_string());
        put("courant_target", p.courant_target.to_string());
        put("k_floor", p.k_floor.to_string());
        put("case", p.source_case.number().to_string());
        put("source_in_corrector", p.source_in_corrector.to_string());
        put("ic", self.ic.to_config_value());
        if let Some(v0) = self.initial_speed {
            put("v0_mps", v0.to_string());
        }
        if let Some(ramp) = &self.ramp {
            put("ramp_a_m", ramp.a.to_string());
            put("ramp_b_m", ramp.b.to_string());
        }
        put(
            "boundary",
            match self.boundary {
                BoundaryMode::ZeroGradient => "zero_gradient",
                BoundaryMode::Periodic => "periodic",
            }
            .into(),
        );
        put("horizon_s", self.horizon.to_string());
        put("record_every", self.record_every.to_string());
        if let Some(seed) = self.seed {
            put("seed", seed.to_string());
        }
        out
    }
}

fn schedule_text(s: &Schedule) -> String {
    match s.steps() {
        [(_, v)] => v.to_string(),
        steps => steps
            .iter()
            .map(|(t, v)| format!("{t}:{v}"))
            .collect::<Vec<_>>()
            .join(","),
    }
}

const KNOWN_KEYS: &[&str] = &[
    "label",
    "length_m",
    "vmax_mps",
    "kjam_vpm",
    "kcr_fraction",
    "c0_sq",
    "phi",
    "gamma",
    "pressure",
    "dt_s",
    "dx_m",
    "smoothing_s",
    "a_in",
    "a_out",
    "delta_s",
    "courant_target",
    "k_floor",
    "case",
    "ic",
    "v0_mps",
    "ramp_a_m",
    "ramp_b_m",
    "boundary",
    "horizon_s",
    "record_every",
    "source_in_corrector",
    "seed",
];

/// Parse config text. Relative `custom:` paths resolve against the
/// current directory.
pub fn load_scenario(text: &str) -> Result<ScenarioSpec, ScenarioError> {
    load_scenario_in(text, None)
}

/// Read and parse a config file; relative `custom:` paths resolve against
/// the file's directory.
pub fn load_scenario_file(path: &Path) -> Result<ScenarioSpec, ScenarioError> {
    let text = std::fs::read_to_string(path).map_err(|source| ScenarioError::Io {
        path: path.display().to_string(),
        source,
    })?;
    load_scenario_in(&text, path.parent())
}

struct Entry<'a> {
    line: usize,
    value: &'a str,
}

fn parse_error(line: usize, message: impl Into<String>) -> ScenarioError {
    ScenarioError::Parse {
        line,
        message: message.into(),
    }
}

fn number(e: &Entry) -> Result<f64, ScenarioError> {
    e.value
        .parse::<f64>()
        .map_err(|_| parse_error(e.line, format!("`{}` is not a number", e.value)))
}

fn schedule(e: &Entry) -> Result<Schedule, ScenarioError> {
    if !e.value.contains(':') {
        return Ok(Schedule::piecewise(vec![(0.0, number(e)?)])?);
    }
    let mut steps = Vec::new();
    for part in e.value.split(',') {
        let (t, v) = part.split_once(':').ok_or_else(|| {
            parse_error(e.line, format!("schedule entry `{part}` is not t:value"))
        })?;
        let t = t.trim().parse::<f64>();
        let v = v.trim().parse::<f64>();
        match (t, v) {
            (Ok(t), Ok(v)) => steps.push((t, v)),
            _ => return Err(parse_error(e.line, format!("bad schedule entry `{part}`"))),
        }
    }
    Ok(Schedule::piecewise(steps)?)
}

fn read_knots(path: &Path) -> Result<Vec<(f64, f64)>, ScenarioError> {
    let text = std::fs::read_to_string(path).map_err(|source| ScenarioError::Io {
        path: path.display().to_string(),
        source,
    })?;
    let mut knots = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() || line.starts_with(|c: char| c.is_ascii_alphabetic()) {
            continue;
        }
        let mut cols = line.split(',').map(str::trim);
        let x = cols.next().and_then(|s| s.parse::<f64>().ok());
        let f = cols.next().and_then(|s| s.parse::<f64>().ok());
        match (x, f) {
            (Some(x), Some(f)) => knots.push((x, f)),
            _ => {
                return Err(ScenarioError::Io {
                    path: path.display().to_string(),
                    source: std::io::Error::new(
                        std::io::ErrorKind::InvalidData,
                        format!("line {}: expected `x,fraction`", i + 1),
                    ),
                })
            }
        }
    }
    Ok(knots)
}

fn initial_condition(
    e: &Entry,
    params: &ModelParams,
    base: Option<&Path>,
) -> Result<InitialCondition, ScenarioError> {
    let bad = |what: &str| parse_error(e.line, format!("ic `{}`: {what}", e.value));
    let floats = |s: &str| -> Result<Vec<f64>, ScenarioError> {
        s.split(':')
            .map(|p| p.trim().parse::<f64>().map_err(|_| bad("expected numbers")))
            .collect()
    };
    let (kind, rest) = e.value.split_once(':').unwrap_or((e.value, ""));
    Ok(match kind {
        "ic1" if rest.is_empty() => InitialCondition::ic1(params),
        "ic2" if rest.is_empty() => InitialCondition::ic2(params),
        "uniform" => match floats(rest)?.as_slice() {
            [f] => InitialCondition::UniformEquilibrium(*f),
            _ => return Err(bad("expected uniform:<fraction>")),
        },
        "riemann" => match floats(rest)?.as_slice() {
            [l, r] => InitialCondition::RiemannStep {
                left: *l,
                right: *r,
                jump_at: params.road_length / 2.0,
            },
            [l, r, j] => InitialCondition::RiemannStep {
                left: *l,
                right: *r,
                jump_at: *j,
            },
            _ => return Err(bad("expected riemann:<left>:<right>[:<jump_m>]")),
        },
        "sine" => match floats(rest)?.as_slice() {
            [m, a] => InitialCondition::Sine {
                mean: *m,
                amplitude: *a,
                waves: 1,
            },
            [m, a, w] if *w >= 1.0 && w.fract() == 0.0 => InitialCondition::Sine {
                mean: *m,
                amplitude: *a,
                waves: *w as u32,
            },
            _ => return Err(bad("expected sine:<mean>:<amplitude>[:<waves>]")),
        },
        "knots" => {
            let mut knots = Vec::new();
            for part in rest.split(',') {
                match floats(part)?.as_slice() {
                    [x, f] => knots.push((*x, *f)),
                    _ => return Err(bad("expected knots:<x>:<f>,<x>:<f>,...")),
                }
            }
            InitialCondition::Custom(knots)
        }
        "custom" if !rest.is_empty() => {
            let path = Path::new(rest);
            let path = match base {
                Some(dir) if path.is_relative() => dir.join(path),
                _ => path.to_path_buf(),
            };
            InitialCondition::Custom(read_knots(&path)?)
        }
        _ => return Err(bad("unknown initial condition")),
    })
}

fn load_scenario_in(text: &str, base: Option<&Path>) -> Result<ScenarioSpec, ScenarioError> {
    let known: HashSet<&str> = KNOWN_KEYS.iter().copied().collect();
    let mut entries: Vec<(&str, Entry)> = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let body = raw.split('#').next().unwrap_or("").trim();
        if body.is_empty() {
            continue;
        }
        let (key, value) = body
            .split_once('=')
            .ok_or_else(|| parse_error(line, "expected `key = value`"))?;
        let key = key.trim();
        let value = value.trim();
        if !known.contains(key) {
            return Err(ScenarioError::UnknownKey {
                line,
                key: key.to_string(),
            });
        }
        if value.is_empty() {
            return Err(parse_error(line, format!("`{key}` has no value")));
        }
        if entries.iter().any(|(k, _)| *k == key) {
            return Err(parse_error(line, format!("duplicate key `{key}`")));
        }
        entries.push((key, Entry { line, value }));
    }
    let get = |key: &str| entries.iter().find(|(k, _)| *k == key).map(|(_, e)| e);

    let mut params = ModelParams::default();
    let float_keys: [(&str, &mut f64); 11] = [
        ("length_m", &mut params.road_length),
        ("vmax_mps", &mut params.v_max),
        ("kjam_vpm", &mut params.k_jam),
        ("c0_sq", &mut params.c0_sq),
        ("phi", &mut params.phi),
        ("gamma", &mut params.gamma),
        ("dt_s", &mut params.dt),
        ("dx_m", &mut params.dx),
        ("smoothing_s", &mut params.smoothing_weight),
        ("delta_s", &mut params.relaxation_time),
        ("courant_target", &mut params.courant_target),
    ];
    for (key, slot) in float_keys {
        if let Some(e) = get(key) {
            *slot = number(e)?;
        }
    }
    if let Some(e) = get("k_floor") {
        params.k_floor = number(e)?;
    }
    let kcr_fraction = match get("kcr_fraction") {
        Some(e) => number(e)?,
        None => 0.2667,
    };
    params.k_cr = kcr_fraction * params.k_jam;

    if let Some(e) = get("pressure") {
        params.pressure_law = match e.value {
            "offset_power" => PressureLaw::OffsetPower,
            "moutari_rascle" => PressureLaw::MoutariRascle,
            other => {
                return Err(parse_error(
                    e.line,
                    format!("unknown pressure law `{other}`"),
                ))
            }
        };
    }
    if let Some(e) = get("case") {
        params.source_case = e
            .value
            .parse::<u8>()
            .ok()
            .and_then(SourceCase::from_number)
            .ok_or_else(|| parse_error(e.line, "case must be 1, 2, 3 or 4"))?;
    }
    if let Some(e) = get("source_in_corrector") {
        params.source_in_corrector = match e.value {
            "true" => true,
            "false" => false,
            _ => return Err(parse_error(e.line, "expected true or false")),
        };
    }

    let inflow = match get("a_in") {
        Some(e) => schedule(e)?,
        None => Schedule::constant(params.a_in_max),
    };
    let outflow = match get("a_out") {
        Some(e) => schedule(e)?,
        None => Schedule::constant(params.a_out_max),
    };
    let peak = |s: &Schedule| s.steps().iter().map(|&(_, v)| v).fold(0.0, f64::max);
    params.a_in_max = peak(&inflow);
    params.a_out_max = peak(&outflow);

    params.validate()?;
    Grid::from_params(&params)?;

    let ic = match get("ic") {
        Some(e) => initial_condition(e, &params, base)?,
        None => InitialCondition::ic1(&params),
    };
    ic.validate(&params)?;

    let initial_speed = match get("v0_mps") {
        Some(e) => {
            let v0 = number(e)?;
            if !(0.0..=params.v_max).contains(&v0) {
                return Err(ValidationError::new(
                    "initial_speed",
                    format!("{v0} m/s is outside [0, v_max]"),
                )
                .into());
            }
            Some(v0)
        }
        None => None,
    };

    let ramp_a = get("ramp_a_m").map(number).transpose()?;
    let ramp_b = get("ramp_b_m").map(number).transpose()?;
    let ramp = if ramp_a.is_some() || ramp_b.is_some() || params.source_case.has_source() {
        Some(RampConfig::new(
            ramp_a.unwrap_or(0.0),
            ramp_b.unwrap_or(params.road_length),
            inflow.clone(),
            outflow.clone(),
            params.road_length,
        )?)
    } else {
        None
    };

    let boundary = match get("boundary") {
        None => BoundaryMode::ZeroGradient,
        Some(e) => match e.value {
            "zero_gradient" => BoundaryMode::ZeroGradient,
            "periodic" => BoundaryMode::Periodic,
            other => return Err(parse_error(e.line, format!("unknown boundary `{other}`"))),
        },
    };

    let horizon = match get("horizon_s") {
        Some(e) => number(e)?,
        None => 200.0,
    };
    if !(horizon > 0.0 && horizon.is_finite()) {
        return Err(
            ValidationError::new("horizon", format!("{horizon} s must be positive")).into(),
        );
    }
    if crate::solver::step_count(horizon, params.dt).is_err() {
        return Err(ValidationError::new(
            "horizon",
            format!("{horizon} s is not a multiple of dt = {} s", params.dt),
        )
        .into());
    }

    let record_every = match get("record_every") {
        Some(e) => e
            .value
            .parse::<usize>()
            .ok()
            .filter(|&n| n >= 1)
            .ok_or_else(|| parse_error(e.line, "record_every must be a positive integer"))?,
        None => 1,
    };
    let seed = get("seed")
        .map(|e| {
            e.value
                .parse::<u64>()
                .map_err(|_| parse_error(e.line, "seed must be an unsigned integer"))
        })
        .transpose()?;
    let label = get("label").map_or_else(|| "default".to_string(), |e| e.value.to_string());

    Ok(ScenarioSpec {
        label,
        params,
        ic,
        initial_speed,
        ramp,
        inflow,
        outflow,
        horizon,
        boundary,
        record_every,
        seed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ic1_values() {
        let p = ModelParams::default();
        let s = build_ic1(&p).unwrap();
        let (k, v) = s.primitives(&p).unwrap();
        assert!((k[0] - 0.069).abs() < 1e-15);
        assert!((k[39] - 0.015).abs() < 1e-15);
        assert!((v[0] - 16.2).abs() < 1e-12);
        assert!((v[39] - 27.0).abs() < 1e-12);
    }

    #[test]
    fn ic2_values() {
        let p = ModelParams::default();
        let s = build_ic2(&p).unwrap();
        let (k, v) = s.primitives(&p).unwrap();
        assert!((k[0] - 0.135).abs() < 1e-15);
        assert!((k[39] - 0.0825).abs() < 1e-15);
        assert!((v[0] - 3.0).abs() < 1e-12);
        assert!((v[39] - 13.5).abs() < 1e-12);
    }

    #[test]
    fn published_fractions_convert_exactly() {
        let kj: f64 = 0.15;
        for (f, want) in [
            (0.46f64, 0.069f64),
            (0.10, 0.015),
            (0.90, 0.135),
            (0.55, 0.0825),
        ] {
            assert!((f * kj - want).abs() <= 1e-15, "{f}");
        }
    }

    #[test]
    fn jump_cell_takes_right_state() {
        // 30 m cells with the jump exactly on a cell centre
        let p = ModelParams::default();
        let ic = InitialCondition::RiemannStep {
            left: 0.5,
            right: 0.2,
            jump_at: 615.0,
        };
        let s = build_state(&ic, None, &p).unwrap();
        assert_eq!(s.u1[19], 0.5 * 0.15);
        assert_eq!(s.u1[20], 0.2 * 0.15);
    }

    #[test]
    fn custom_knots_interpolate() {
        let knots = vec![(0.0, 0.2), (600.0, 0.6), (1200.0, 0.2)];
        assert_eq!(interpolate(&knots, -5.0), 0.2);
        assert!((interpolate(&knots, 300.0) - 0.4).abs() < 1e-15);
        assert!((interpolate(&knots, 900.0) - 0.4).abs() < 1e-15);
        assert_eq!(interpolate(&knots, 1500.0), 0.2);
    }

    #[test]
    fn empty_config_is_the_reference_setup() {
        let spec = load_scenario("# nothing\n\n").unwrap();
        assert_eq!(spec.params, ModelParams::default());
        assert_eq!(spec.ic, InitialCondition::ic1(&spec.params));
        assert_eq!(spec.params.source_case, SourceCase::Case1);
        assert_eq!(spec.horizon, 200.0);
        assert_eq!(spec.boundary, BoundaryMode::ZeroGradient);
        assert!(spec.ramp.is_none());
    }

    #[test]
    fn bad_smoothing_names_the_field() {
        match load_scenario("smoothing_s = 1.5").unwrap_err() {
            ScenarioError::Validation(e) => assert!(e.field.contains("smoothing_weight")),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn localized_ramp_case3() {
        let spec =
            load_scenario("ramp_a_m = 400\nramp_b_m = 800\na_in = 0.003\na_out = 0.001\ncase = 3")
                .unwrap();
        assert_eq!(spec.params.source_case, SourceCase::Case3);
        let ramp = spec.ramp.unwrap();
        assert_eq!((ramp.a, ramp.b), (400.0, 800.0));
        assert_eq!(ramp.intensities(600.0, 0.0), (0.003, 0.001));
        assert_eq!(ramp.intensities(200.0, 0.0), (0.0, 0.0));
    }

    #[test]
    fn source_case_defaults_to_full_road_ramp() {
        let spec = load_scenario("case = 4").unwrap();
        let ramp = spec.ramp.unwrap();
        assert_eq!((ramp.a, ramp.b), (0.0, 1200.0));
    }

    #[test]
    fn parse_errors() {
        assert!(matches!(
            load_scenario("bogus = 1"),
            Err(ScenarioError::UnknownKey { line: 1, .. })
        ));
        assert!(matches!(
            load_scenario("dt_s = fast"),
            Err(ScenarioError::Parse { line: 1, .. })
        ));
        assert!(matches!(
            load_scenario("\ncase = 7"),
            Err(ScenarioError::Parse { line: 2, .. })
        ));
        assert!(matches!(
            load_scenario("case = 1\ncase = 2"),
            Err(ScenarioError::Parse { line: 2, .. })
        ));
        assert!(matches!(
            load_scenario("just words"),
            Err(ScenarioError::Parse { .. })
        ));
        assert!(matches!(
            load_scenario("ic = uniform:1.5"),
            Err(ScenarioError::Validation(_))
        ));
        assert!(matches!(
            load_scenario("dx_m = 7"),
            Err(ScenarioError::Validation(_))
        ));
        assert!(matches!(
            load_scenario("horizon_s = 0"),
            Err(ScenarioError::Validation(_))
        ));
    }

    #[test]
    fn config_text_round_trips() {
        let text = "label = mix\ncase = 4\nic = sine:0.3:0.05:2\na_in = 0:0.003,50:0\n\
                    ramp_a_m = 300\nboundary = periodic\nv0_mps = 12\nseed = 9\npressure = moutari_rascle";
        let spec = load_scenario(text).unwrap();
        let again = load_scenario(&spec.to_config_text()).unwrap();
        assert_eq!(spec, again);
        assert_eq!(spec.to_config_text(), again.to_config_text());
        assert_eq!(
            load_scenario(text).unwrap().to_config_text(),
            spec.to_config_text()
        );

        let knots = load_scenario("ic = knots:0:0.2,600:0.5,1200:0.2").unwrap();
        assert_eq!(load_scenario(&knots.to_config_text()).unwrap(), knots);
    }

    #[test]
    fn custom_file_resolves_relative_to_config() {
        let dir = std::env::temp_dir().join(format!("arz-scenario-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        std::fs::write(
            dir.join("knots.csv"),
            "x,fraction\n0,0.2\n600,0.6\n1200,0.2\n",
        )
        .unwrap();
        std::fs::write(dir.join("run.cfg"), "ic = custom:knots.csv\n").unwrap();
        let spec = load_scenario_file(&dir.join("run.cfg")).unwrap();
        assert_eq!(
            spec.ic,
            InitialCondition::Custom(vec![(0.0, 0.2), (600.0, 0.6), (1200.0, 0.2)])
        );
        std::fs::remove_dir_all(&dir).unwrap();
    }
}
