//! Domain types and the pure physics of the extended Aw-Rascle model.
//!
//! Conserved variables are `U = (k, k (v + p(k)))` with flux
//! `F(U) = (k v, k v (v + p(k)))` and a source `R(U)` whose shape is selected
//! by [`SourceCase`]. Everything here is a plain function of its inputs.

use crate::error::{DomainError, ValidationError};

/// Traffic pressure law `p(k)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PressureLaw {
    /// `p(k) = c0_sq * k^gamma - phi`.
    #[default]
    OffsetPower,
    /// `p(k) = (v_ref / gamma) (k / k_jam)^gamma` for `gamma > 0`, and
    /// `v_ref ln(k / k_jam)` for `gamma = 0`, with `v_ref = v_max`.
    MoutariRascle,
}

/// Preferred (equilibrium) speed law `V(k)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum EquilibriumLaw {
    /// `V(k) = v_max (1 - k / k_jam)`.
    #[default]
    Greenshields,
}

/// Which terms of the right-hand side `R(U)` are active.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Hash)]
pub enum SourceCase {
    /// No source, no relaxation.
    #[default]
    Case1,
    /// Relaxation only.
    Case2,
    /// Ramp source only.
    Case3,
    /// Ramp source and relaxation.
    Case4,
}

impl SourceCase {
    pub const ALL: [SourceCase; 4] = [
        SourceCase::Case1,
        SourceCase::Case2,
        SourceCase::Case3,
        SourceCase::Case4,
    ];

    pub fn number(self) -> u8 {
        match self {
            SourceCase::Case1 => 1,
            SourceCase::Case2 => 2,
            SourceCase::Case3 => 3,
            SourceCase::Case4 => 4,
        }
    }

    pub fn from_number(n: u8) -> Option<Self> {
        match n {
            1 => Some(SourceCase::Case1),
            2 => Some(SourceCase::Case2),
            3 => Some(SourceCase::Case3),
            4 => Some(SourceCase::Case4),
            _ => None,
        }
    }

    pub fn has_source(self) -> bool {
        matches!(self, SourceCase::Case3 | SourceCase::Case4)
    }

    pub fn has_relaxation(self) -> bool {
        matches!(self, SourceCase::Case2 | SourceCase::Case4)
    }
}

/// Physical and numerical constants. `Default` is the reference parameter
/// set (1200 m road, 30 m/s, 0.15 veh/m, ...).
#[derive(Debug, Clone, PartialEq)]
pub struct ModelParams {
    /// Road length `L` in m.
    pub road_length: f64,
    /// m/s
    pub v_max: f64,
    /// veh/m
    pub k_jam: f64,
    /// veh/m. Reporting only; enters no dynamics.
    pub k_cr: f64,
    /// m²/s²
    pub c0_sq: f64,
    /// Pressure offset, m/s.
    pub phi: f64,
    pub gamma: f64,
    /// s
    pub dt: f64,
    /// m
    pub dx: f64,
    /// Central-dispersion weight `S` in `[0, 1]`.
    pub smoothing_weight: f64,
    /// Maximum entry intensity, veh/m/s.
    pub a_in_max: f64,
    /// Maximum exit intensity, veh/m/s.
    pub a_out_max: f64,
    /// Relaxation time `delta` in s.
    pub relaxation_time: f64,
    /// Courant number above which a warning is emitted.
    pub courant_target: f64,
    /// Vacuum guard on density, veh/m.
    pub k_floor: f64,
    pub source_case: SourceCase,
    /// Add `0.5 dt R(U_bar)` in the corrector stage.
    pub source_in_corrector: bool,
    pub pressure_law: PressureLaw,
    pub equilibrium_law: EquilibriumLaw,
}

impl Default for ModelParams {
    fn default() -> Self {
        let k_jam = 0.15;
        Self {
            road_length: 1200.0,
            v_max: 30.0,
            k_jam,
            k_cr: 0.2667 * k_jam,
            c0_sq: 80.0,
            phi: 31.9,
            gamma: 0.5,
            dt: 1.0,
            dx: 30.0,
            smoothing_weight: 0.01,
            a_in_max: 0.003,
            a_out_max: 0.001,
            relaxation_time: 2.0,
            courant_target: 0.9,
            k_floor: 1e-8,
            source_case: SourceCase::Case1,
            source_in_corrector: false,
            pressure_law: PressureLaw::OffsetPower,
            equilibrium_law: EquilibriumLaw::Greenshields,
        }
    }
}

fn require(ok: bool, field: &str, message: impl Into<String>) -> Result<(), ValidationError> {
    if ok {
        Ok(())
    } else {
        Err(ValidationError::new(format!("params.{field}"), message))
    }
}

impl ModelParams {
    pub fn validate(&self) -> Result<(), ValidationError> {
        let finite = [
            ("road_length", self.road_length),
            ("v_max", self.v_max),
            ("k_jam", self.k_jam),
            ("k_cr", self.k_cr),
            ("c0_sq", self.c0_sq),
            ("phi", self.phi),
            ("gamma", self.gamma),
            ("dt", self.dt),
            ("dx", self.dx),
            ("smoothing_weight", self.smoothing_weight),
            ("a_in_max", self.a_in_max),
            ("a_out_max", self.a_out_max),
            ("relaxation_time", self.relaxation_time),
            ("courant_target", self.courant_target),
            ("k_floor", self.k_floor),
        ];
        for (name, value) in finite {
            require(value.is_finite(), name, format!("{value} is not finite"))?;
        }
        require(self.road_length > 0.0, "road_length", "must be positive")?;
        require(self.v_max > 0.0, "v_max", "must be positive")?;
        require(self.k_floor > 0.0, "k_floor", "must be positive")?;
        require(
            self.k_floor < self.k_cr,
            "k_cr",
            format!("must exceed k_floor = {}", self.k_floor),
        )?;
        require(
            self.k_cr < self.k_jam,
            "k_cr",
            format!("must be below k_jam = {}", self.k_jam),
        )?;
        require(self.c0_sq >= 0.0, "c0_sq", "must be non-negative")?;
        require(self.gamma >= 0.0, "gamma", "must be non-negative")?;
        require(self.dt > 0.0, "dt", "must be positive")?;
        require(self.dx > 0.0, "dx", "must be positive")?;
        require(
            (0.0..=1.0).contains(&self.smoothing_weight),
            "smoothing_weight",
            format!("{} is outside [0, 1]", self.smoothing_weight),
        )?;
        require(self.a_in_max >= 0.0, "a_in_max", "must be non-negative")?;
        require(self.a_out_max >= 0.0, "a_out_max", "must be non-negative")?;
        require(
            self.relaxation_time > 0.0,
            "relaxation_time",
            "must be positive",
        )?;
        require(
            self.courant_target > 0.0 && self.courant_target <= 1.0,
            "courant_target",
            format!("{} is outside (0, 1]", self.courant_target),
        )?;
        Ok(())
    }
}

/// Uniform cell-centred discretization of `[0, L]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    n_cells: usize,
    dx: f64,
}

impl Grid {
    pub const MIN_CELLS: usize = 4;

    pub fn new(n_cells: usize, dx: f64) -> Result<Self, ValidationError> {
        if n_cells < Self::MIN_CELLS {
            return Err(ValidationError::new(
                "grid.n_cells",
                format!("{n_cells} cells; at least {} required", Self::MIN_CELLS),
            ));
        }
        if !(dx > 0.0 && dx.is_finite()) {
            return Err(ValidationError::new(
                "grid.dx",
                "must be positive and finite",
            ));
        }
        Ok(Self { n_cells, dx })
    }

    /// Grid covering `length` with spacing `dx`; `length / dx` must be an
    /// integer to within one part in 10⁹.
    pub fn covering(length: f64, dx: f64) -> Result<Self, ValidationError> {
        let ratio = length / dx;
        let n = ratio.round();
        if !ratio.is_finite() || n < 1.0 || ((n * dx - length) / length).abs() > 1e-9 {
            return Err(ValidationError::new(
                "params.dx",
                format!("road length {length} m is not an integer multiple of dx = {dx} m"),
            ));
        }
        Self::new(n as usize, dx)
    }

    pub fn from_params(params: &ModelParams) -> Result<Self, ValidationError> {
        Self::covering(params.road_length, params.dx)
    }

    pub fn n_cells(&self) -> usize {
        self.n_cells
    }

    pub fn dx(&self) -> f64 {
        self.dx
    }

    pub fn length(&self) -> f64 {
        self.n_cells as f64 * self.dx
    }

    pub fn cell_center(&self, i: usize) -> f64 {
        (i as f64 + 0.5) * self.dx
    }

    pub fn centers(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.n_cells).map(|i| self.cell_center(i))
    }
}

/// Conserved field at one time level.
#[derive(Debug, Clone, PartialEq)]
pub struct State {
    /// Density `k`, veh/m.
    pub u1: Vec<f64>,
    /// `k (v + p(k))`, veh/s.
    pub u2: Vec<f64>,
    /// s
    pub t: f64,
}

impl State {
    pub fn from_primitive(
        k: &[f64],
        v: &[f64],
        t: f64,
        params: &ModelParams,
    ) -> Result<Self, DomainError> {
        assert_eq!(
            k.len(),
            v.len(),
            "density and speed arrays differ in length"
        );
        let mut u1 = Vec::with_capacity(k.len());
        let mut u2 = Vec::with_capacity(k.len());
        for (&ki, &vi) in k.iter().zip(v) {
            let (c1, c2) = conserved_from_primitive(ki, vi, params)?;
            u1.push(c1);
            u2.push(c2);
        }
        Ok(Self { u1, u2, t })
    }

    pub fn len(&self) -> usize {
        self.u1.len()
    }

    pub fn is_empty(&self) -> bool {
        self.u1.is_empty()
    }

    /// `(k, v)` per cell.
    pub fn primitives(&self, params: &ModelParams) -> Result<(Vec<f64>, Vec<f64>), DomainError> {
        let mut k = Vec::with_capacity(self.len());
        let mut v = Vec::with_capacity(self.len());
        for (&c1, &c2) in self.u1.iter().zip(&self.u2) {
            let (ki, vi) = primitive_from_conserved(c1, c2, params)?;
            k.push(ki);
            v.push(vi);
        }
        Ok((k, v))
    }

    /// Vehicle count `sum(u1) dx`.
    pub fn mass(&self, dx: f64) -> f64 {
        self.u1.iter().sum::<f64>() * dx
    }
}

/// Piecewise-constant, non-negative intensity schedule in veh/m/s.
///
/// Each entry `(start, value)` holds from `start` until the next entry.
#[derive(Debug, Clone, PartialEq)]
pub struct Schedule {
    steps: Vec<(f64, f64)>,
}

impl Schedule {
    pub fn constant(value: f64) -> Self {
        Self {
            steps: vec![(0.0, value)],
        }
    }

    pub fn piecewise(steps: Vec<(f64, f64)>) -> Result<Self, ValidationError> {
        let field = "ramp.schedule";
        let Some(&(first, _)) = steps.first() else {
            return Err(ValidationError::new(field, "schedule is empty"));
        };
        if first != 0.0 {
            return Err(ValidationError::new(
                field,
                "first entry must start at t = 0",
            ));
        }
        for w in steps.windows(2) {
            if w[1].0.partial_cmp(&w[0].0) != Some(std::cmp::Ordering::Greater) {
                return Err(ValidationError::new(
                    field,
                    "start times must increase strictly",
                ));
            }
        }
        for &(start, value) in &steps {
            if !start.is_finite() || !value.is_finite() || value < 0.0 {
                return Err(ValidationError::new(
                    field,
                    format!("entry ({start}, {value}) must be finite with value >= 0"),
                ));
            }
        }
        Ok(Self { steps })
    }

    pub fn value_at(&self, t: f64) -> f64 {
        self.steps
            .iter()
            .take_while(|(start, _)| *start <= t)
            .last()
            .map_or(self.steps[0].1, |&(_, v)| v)
    }

    pub fn steps(&self) -> &[(f64, f64)] {
        &self.steps
    }
}

/// Entry/exit ramp localized on the closed interval `[a, b]`.
#[derive(Debug, Clone, PartialEq)]
pub struct RampConfig {
    pub a: f64,
    pub b: f64,
    pub g_in: Schedule,
    pub g_out: Schedule,
}

impl RampConfig {
    pub fn new(
        a: f64,
        b: f64,
        g_in: Schedule,
        g_out: Schedule,
        road_length: f64,
    ) -> Result<Self, ValidationError> {
        if !(a >= 0.0 && a < b && b <= road_length) {
            return Err(ValidationError::new(
                "ramp",
                format!("need 0 <= a < b <= L, got a = {a}, b = {b}, L = {road_length}"),
            ));
        }
        Ok(Self { a, b, g_in, g_out })
    }

    /// Constant-intensity ramp spanning the whole road.
    pub fn full_road(params: &ModelParams) -> Self {
        Self {
            a: 0.0,
            b: params.road_length,
            g_in: Schedule::constant(params.a_in_max),
            g_out: Schedule::constant(params.a_out_max),
        }
    }

    /// `(a_in(t, x), a_out(t, x))`.
    pub fn intensities(&self, x: f64, t: f64) -> (f64, f64) {
        let chi = ramp_indicator(x, self);
        (self.g_in.value_at(t) * chi, self.g_out.value_at(t) * chi)
    }
}

/// Characteristic function of `[a, b]`.
pub fn ramp_indicator(x: f64, ramp: &RampConfig) -> f64 {
    if ramp.a <= x && x <= ramp.b {
        1.0
    } else {
        0.0
    }
}

/// Traffic pressure `p(k)` in m/s.
pub fn pressure(k: f64, params: &ModelParams) -> f64 {
    match params.pressure_law {
        PressureLaw::OffsetPower => params.c0_sq * k.powf(params.gamma) - params.phi,
        PressureLaw::MoutariRascle => {
            let ratio = k / params.k_jam;
            if params.gamma > 0.0 {
                params.v_max / params.gamma * ratio.powf(params.gamma)
            } else {
                params.v_max * ratio.ln()
            }
        }
    }
}

/// `k p'(k)`, the gap between the two characteristic speeds.
pub fn pressure_times_k_derivative(k: f64, params: &ModelParams) -> f64 {
    match params.pressure_law {
        PressureLaw::OffsetPower => {
            if params.gamma == 0.0 {
                0.0
            } else {
                params.c0_sq * params.gamma * k.powf(params.gamma)
            }
        }
        PressureLaw::MoutariRascle => {
            if params.gamma > 0.0 {
                params.v_max * (k / params.k_jam).powf(params.gamma)
            } else {
                params.v_max
            }
        }
    }
}

/// Preferred speed `V(k)` for `0 <= k <= k_jam`.
pub fn equilibrium_speed(k: f64, params: &ModelParams) -> Result<f64, DomainError> {
    if !(0.0..=params.k_jam).contains(&k) {
        return Err(DomainError {
            quantity: "density",
            value: k,
            min: 0.0,
            max: params.k_jam,
        });
    }
    Ok(match params.equilibrium_law {
        EquilibriumLaw::Greenshields => params.v_max * (1.0 - k / params.k_jam),
    })
}

/// Net ramp inflow per unit length `A(k) = a_in - (a_in + a_out) k / k_jam`.
pub fn source_strength(k: f64, a_in: f64, a_out: f64, params: &ModelParams) -> f64 {
    a_in - (a_in + a_out) * k / params.k_jam
}

pub fn conserved_from_primitive(
    k: f64,
    v: f64,
    params: &ModelParams,
) -> Result<(f64, f64), DomainError> {
    if !(params.k_floor..=params.k_jam).contains(&k) {
        return Err(DomainError {
            quantity: "density",
            value: k,
            min: params.k_floor,
            max: params.k_jam,
        });
    }
    if !(0.0..=params.v_max).contains(&v) {
        return Err(DomainError {
            quantity: "speed",
            value: v,
            min: 0.0,
            max: params.v_max,
        });
    }
    Ok((k, k * (v + pressure(k, params))))
}

/// Inverse of [`conserved_from_primitive`]. The speed is returned unclamped.
pub fn primitive_from_conserved(
    u1: f64,
    u2: f64,
    params: &ModelParams,
) -> Result<(f64, f64), DomainError> {
    if u1.is_nan() || u1 < params.k_floor {
        return Err(DomainError {
            quantity: "density",
            value: u1,
            min: params.k_floor,
            max: f64::INFINITY,
        });
    }
    Ok((u1, u2 / u1 - pressure(u1, params)))
}

pub fn flux(u1: f64, u2: f64, params: &ModelParams) -> Result<(f64, f64), DomainError> {
    let (k, v) = primitive_from_conserved(u1, u2, params)?;
    Ok((k * v, v * u2))
}

/// Right-hand side `R(U)` at position `x` and time `t`.
pub fn source_vector(
    u1: f64,
    u2: f64,
    x: f64,
    t: f64,
    ramp: Option<&RampConfig>,
    params: &ModelParams,
) -> Result<(f64, f64), DomainError> {
    let case = params.source_case;
    if case == SourceCase::Case1 {
        return Ok((0.0, 0.0));
    }
    let (k, v) = primitive_from_conserved(u1, u2, params)?;

    let relaxation = if case.has_relaxation() {
        k * (equilibrium_speed(k, params)? - v) / params.relaxation_time
    } else {
        0.0
    };
    if !case.has_source() {
        return Ok((0.0, relaxation));
    }

    let (a_in, a_out) = ramp.map_or((0.0, 0.0), |r| r.intensities(x, t));
    let strength = source_strength(k, a_in, a_out, params);
    let convective = (v + pressure(k, params)) * strength;
    match case {
        SourceCase::Case3 => Ok((strength, convective)),
        _ => Ok((strength, convective + relaxation)),
    }
}

/// Characteristic speeds `(v - k p'(k), v)`.
pub fn eigenvalues(u1: f64, u2: f64, params: &ModelParams) -> Result<(f64, f64), DomainError> {
    let (k, v) = primitive_from_conserved(u1, u2, params)?;
    Ok((v - pressure_times_k_derivative(k, params), v))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * b.abs().max(1e-300)
    }

    #[test]
    fn defaults_match_reference_table() {
        let p = ModelParams::default();
        assert_eq!(p.road_length, 1200.0);
        assert_eq!(p.v_max, 30.0);
        assert_eq!(p.k_jam, 0.15);
        assert_eq!(p.k_cr, 0.2667 * 0.15);
        assert_eq!(p.c0_sq, 80.0);
        assert_eq!(p.phi, 31.9);
        assert_eq!(p.gamma, 0.5);
        assert_eq!((p.dt, p.dx), (1.0, 30.0));
        assert_eq!(p.smoothing_weight, 0.01);
        assert_eq!((p.a_in_max, p.a_out_max), (0.003, 0.001));
        assert_eq!(p.relaxation_time, 2.0);
        assert_eq!(p.courant_target, 0.9);
        assert_eq!(p.k_floor, 1e-8);
        assert!(!p.source_in_corrector);
        p.validate().unwrap();
    }

    #[test]
    fn validation_names_the_field() {
        let p = ModelParams {
            smoothing_weight: 1.5,
            ..Default::default()
        };
        assert_eq!(p.validate().unwrap_err().field, "params.smoothing_weight");
        let p = ModelParams {
            k_floor: 0.1,
            ..Default::default()
        };
        assert_eq!(p.validate().unwrap_err().field, "params.k_cr");
        let p = ModelParams {
            courant_target: 0.0,
            ..Default::default()
        };
        assert!(p.validate().is_err());
    }

    #[test]
    fn grid_geometry() {
        let g = Grid::from_params(&ModelParams::default()).unwrap();
        assert_eq!(g.n_cells(), 40);
        assert_eq!(g.cell_center(0), 15.0);
        assert_eq!(g.cell_center(39), 1185.0);
        assert!((g.length() - 1200.0).abs() < 1e-9);
        assert!(Grid::covering(1200.0, 7.0).is_err());
        assert!(Grid::covering(90.0, 30.0).is_err());
        assert!(Grid::covering(1200.0, 7.5).is_ok());
    }

    #[test]
    fn pressure_values() {
        let p = ModelParams::default();
        assert!(close(pressure(0.0, &p), -31.9, 1e-15));
        assert!((pressure(0.15, &p) - (80.0 * 0.15f64.sqrt() - 31.9)).abs() < 1e-14);
        assert!((pressure(0.15, &p) - -0.916134).abs() < 1e-6);
        assert!((pressure(0.1, &p) - -6.6018).abs() < 1e-4);
    }

    #[test]
    fn pressure_derivative_values() {
        let p = ModelParams::default();
        assert_eq!(pressure_times_k_derivative(0.0, &p), 0.0);
        assert!((pressure_times_k_derivative(0.09, &p) - 12.0).abs() < 1e-12);
        assert!((pressure_times_k_derivative(0.04, &p) - 8.0).abs() < 1e-12);
    }

    #[test]
    fn pressure_derivative_matches_finite_difference() {
        for law in [PressureLaw::OffsetPower, PressureLaw::MoutariRascle] {
            for gamma in [0.0, 0.5, 2.0] {
                let p = ModelParams {
                    pressure_law: law,
                    gamma,
                    ..Default::default()
                };
                for &k in &[0.01, 0.05, 0.12] {
                    let h = 1e-7 * k;
                    let fd = (pressure(k + h, &p) - pressure(k - h, &p)) / (2.0 * h);
                    let got = pressure_times_k_derivative(k, &p);
                    assert!(
                        (k * fd - got).abs() < 1e-6 * got.abs().max(1.0),
                        "{law:?} {gamma} {k}"
                    );
                }
            }
        }
    }

    #[test]
    fn equilibrium_speed_values() {
        let p = ModelParams::default();
        assert_eq!(equilibrium_speed(0.0, &p).unwrap(), 30.0);
        assert_eq!(equilibrium_speed(0.15, &p).unwrap(), 0.0);
        assert!((equilibrium_speed(0.075, &p).unwrap() - 15.0).abs() < 1e-12);
        assert!(equilibrium_speed(0.2, &p).is_err());
        assert!(equilibrium_speed(-0.01, &p).is_err());
    }

    #[test]
    fn source_strength_values() {
        let p = ModelParams::default();
        assert_eq!(source_strength(0.0, 0.003, 0.001, &p), 0.003);
        assert!((source_strength(0.15, 0.003, 0.001, &p) - -0.001).abs() < 1e-15);
        assert!((source_strength(0.075, 0.003, 0.001, &p) - 0.001).abs() < 1e-15);
        // root at k_jam a_in / (a_in + a_out)
        assert!(source_strength(0.1125, 0.003, 0.001, &p).abs() < 1e-15);
        assert!(source_strength(0.11, 0.003, 0.001, &p) > 0.0);
        assert!(source_strength(0.115, 0.003, 0.001, &p) < 0.0);
    }

    #[test]
    fn ramp_indicator_is_closed_interval() {
        let ramp = RampConfig::new(
            400.0,
            800.0,
            Schedule::constant(0.003),
            Schedule::constant(0.001),
            1200.0,
        )
        .unwrap();
        assert_eq!(ramp_indicator(600.0, &ramp), 1.0);
        assert_eq!(ramp_indicator(370.0, &ramp), 0.0);
        assert_eq!(ramp_indicator(800.0, &ramp), 1.0);
        assert_eq!(ramp_indicator(400.0, &ramp), 1.0);
        assert_eq!(ramp.intensities(370.0, 5.0), (0.0, 0.0));
        assert_eq!(ramp.intensities(500.0, 5.0), (0.003, 0.001));
        assert!(RampConfig::new(
            800.0,
            400.0,
            Schedule::constant(0.0),
            Schedule::constant(0.0),
            1200.0
        )
        .is_err());
        assert!(RampConfig::new(
            0.0,
            1300.0,
            Schedule::constant(0.0),
            Schedule::constant(0.0),
            1200.0
        )
        .is_err());
    }

    #[test]
    fn schedule_is_piecewise_constant() {
        let s = Schedule::piecewise(vec![(0.0, 0.003), (100.0, 0.0), (150.0, 0.001)]).unwrap();
        assert_eq!(s.value_at(0.0), 0.003);
        assert_eq!(s.value_at(99.9), 0.003);
        assert_eq!(s.value_at(100.0), 0.0);
        assert_eq!(s.value_at(1e6), 0.001);
        assert!(Schedule::piecewise(vec![(1.0, 0.1)]).is_err());
        assert!(Schedule::piecewise(vec![(0.0, -0.1)]).is_err());
        assert!(Schedule::piecewise(vec![(0.0, 0.1), (0.0, 0.2)]).is_err());
    }

    #[test]
    fn conversions() {
        let p = ModelParams::default();
        let (u1, u2) = conserved_from_primitive(0.1, 20.0, &p).unwrap();
        assert_eq!(u1, 0.1);
        assert!((u2 - 1.3398).abs() < 1e-4);
        let (k, v) = primitive_from_conserved(u1, u2, &p).unwrap();
        assert_eq!(k, 0.1);
        assert!((v - 20.0).abs() < 1e-9);

        let kf = p.k_floor;
        let (_, u2) = conserved_from_primitive(kf, 0.0, &p).unwrap();
        assert_eq!(u2, kf * pressure(kf, &p));

        let (_, v) = primitive_from_conserved(0.07, 0.07 * pressure(0.07, &p), &p).unwrap();
        assert!(v.abs() < 1e-12);

        assert!(primitive_from_conserved(1e-12, 0.0, &p).is_err());
        assert!(primitive_from_conserved(f64::NAN, 0.0, &p).is_err());
        assert!(conserved_from_primitive(0.2, 1.0, &p).is_err());
        assert!(conserved_from_primitive(0.1, 31.0, &p).is_err());
        assert!(conserved_from_primitive(0.1, -1.0, &p).is_err());
    }

    #[test]
    fn flux_values() {
        let p = ModelParams::default();
        let (u1, u2) = conserved_from_primitive(0.1, 20.0, &p).unwrap();
        let (f1, f2) = flux(u1, u2, &p).unwrap();
        assert!((f1 - 2.0).abs() < 1e-12);
        assert!((f2 - 26.796).abs() < 1e-3);

        let (u1, u2) = conserved_from_primitive(0.08, 0.0, &p).unwrap();
        let (f1, f2) = flux(u1, u2, &p).unwrap();
        assert!(f1.abs() < 1e-15 && f2.abs() < 1e-15);
    }

    #[test]
    fn source_vector_cases() {
        let base = ModelParams::default();
        let ramp = RampConfig::full_road(&base);
        let with_case = |case| ModelParams {
            source_case: case,
            ..base.clone()
        };

        let (u1, u2) = conserved_from_primitive(0.06, 21.0, &base).unwrap();
        let p1 = with_case(SourceCase::Case1);
        assert_eq!(
            source_vector(u1, u2, 10.0, 0.0, Some(&ramp), &p1).unwrap(),
            (0.0, 0.0)
        );

        let p2 = with_case(SourceCase::Case2);
        let v_eq = equilibrium_speed(0.05, &base).unwrap();
        let (e1, e2) = conserved_from_primitive(0.05, v_eq, &base).unwrap();
        let (r1, r2) = source_vector(e1, e2, 10.0, 0.0, Some(&ramp), &p2).unwrap();
        assert_eq!(r1, 0.0);
        assert!(r2.abs() < 1e-15);

        let p3 = with_case(SourceCase::Case3);
        let (c1, c2) = conserved_from_primitive(0.075, 15.0, &base).unwrap();
        let (r1, r2) = source_vector(c1, c2, 600.0, 0.0, Some(&ramp), &p3).unwrap();
        assert!((r1 - 0.001).abs() < 1e-15);
        assert!((r2 - 0.0050089).abs() < 1e-7);
        assert!((r2 - (15.0 + pressure(0.075, &base)) * 0.001).abs() < 1e-15);

        // ramp absent means no inflow or outflow
        assert_eq!(
            source_vector(c1, c2, 600.0, 0.0, None, &p3).unwrap(),
            (0.0, 0.0)
        );
    }

    #[test]
    fn eigenvalue_examples() {
        let p = ModelParams::default();
        let (u1, u2) = conserved_from_primitive(0.09, 10.0, &p).unwrap();
        let (l1, l2) = eigenvalues(u1, u2, &p).unwrap();
        assert!((l1 - -2.0).abs() < 1e-12);
        assert!((l2 - 10.0).abs() < 1e-12);

        let (u1, u2) = conserved_from_primitive(p.k_floor, 30.0, &p).unwrap();
        let (l1, l2) = eigenvalues(u1, u2, &p).unwrap();
        assert!((l1 - 30.0).abs() < 1e-2 && (l2 - 30.0).abs() < 1e-9);
    }

    fn admissible() -> impl Strategy<Value = (f64, f64)> {
        let p = ModelParams::default();
        (p.k_floor..=p.k_jam, 0.0..=p.v_max)
    }

    proptest! {
        #[test]
        fn pressure_is_monotone(a in 0.0..=0.15f64, b in 0.0..=0.15f64) {
            let p = ModelParams::default();
            let (lo, hi) = if a < b { (a, b) } else { (b, a) };
            prop_assert!(pressure(lo, &p) <= pressure(hi, &p));
        }

        #[test]
        fn round_trip_and_flux_identity((k, v) in admissible()) {
            let p = ModelParams::default();
            let (u1, u2) = conserved_from_primitive(k, v, &p).unwrap();
            let (k2, v2) = primitive_from_conserved(u1, u2, &p).unwrap();
            prop_assert_eq!(k2, k);
            // absolute floor: v + p(k) cancels down to ~1e-14 near vacuum
            prop_assert!((v2 - v).abs() <= 1e-12 * v.abs().max(p.phi));
            let (_, f2) = flux(u1, u2, &p).unwrap();
            prop_assert!((f2 - v2 * u2).abs() <= 1e-12 * f2.abs());
        }

        #[test]
        fn anisotropy((k, v) in admissible()) {
            let p = ModelParams::default();
            let (u1, u2) = conserved_from_primitive(k, v, &p).unwrap();
            let (l1, l2) = eigenvalues(u1, u2, &p).unwrap();
            prop_assert!(l1 <= l2);
        }
    }
}
