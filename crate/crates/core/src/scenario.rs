//! Scenario description: plant and controller parameters, wind and setpoint
//! schedules, grid events and solver settings.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::aero::AeroParams;
use crate::dc_link::DcLinkParams;
use crate::framework::PerUnitBase;
use crate::grid_side::{ControlVariant, GscParams};
use crate::machine::{MscControlParams, PmsgParams};
use crate::math::{interp, round};
use crate::network::{validate_events, FaultSpec, NetworkParams};
use crate::pitch::PitchParams;

/// Every plant constant and controller setting.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TurbineParams {
    /// Converter-side electrical base.
    pub base: PerUnitBase,
    pub aero: AeroParams,
    pub pitch: PitchParams,
    pub machine: PmsgParams,
    pub msc: MscControlParams,
    pub dc_link: DcLinkParams,
    pub gsc: GscParams,
    pub network: NetworkParams,
}

impl Default for TurbineParams {
    fn default() -> Self {
        Self {
            base: PerUnitBase {
                s_base: 15e6,
                v_base_ll: 4e3,
                f0: 60.0,
            },
            aero: AeroParams::default(),
            pitch: PitchParams::default(),
            machine: PmsgParams::default(),
            msc: MscControlParams::default(),
            dc_link: DcLinkParams::default(),
            gsc: GscParams::default(),
            network: NetworkParams::default(),
        }
    }
}

impl TurbineParams {
    pub fn validate(&self, errors: &mut Vec<String>) {
        if let Err(e) = self.base.check() {
            errors.push(format!("base: {e}"));
        }
        self.aero.validate(errors);
        self.pitch.validate(errors);
        self.machine.validate(errors);
        self.msc.validate(errors);
        self.dc_link.validate(errors);
        self.gsc.validate(errors);
        self.network.validate(errors);
    }
}

/// Hub-height wind speed (m/s).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum WindProfile {
    Constant(f64),
    /// `(time s, speed m/s)` breakpoints, linearly interpolated and held at
    /// the ends. Repeat a time to make a step.
    Piecewise(Vec<(f64, f64)>),
}

impl Default for WindProfile {
    fn default() -> Self {
        WindProfile::Constant(15.0)
    }
}

impl WindProfile {
    pub fn at(&self, t: f64) -> f64 {
        match self {
            WindProfile::Constant(v) => *v,
            WindProfile::Piecewise(points) => interp(points, t),
        }
    }

    fn validate(&self, errors: &mut Vec<String>) {
        let speeds: Vec<f64> = match self {
            WindProfile::Constant(v) => vec![*v],
            WindProfile::Piecewise(points) => {
                if points.is_empty() {
                    errors.push(format!("wind.piecewise must not be empty"));
                }
                if points.windows(2).any(|w| !(w[1].0 >= w[0].0)) {
                    errors.push(format!("wind.piecewise must be sorted by time"));
                }
                points.iter().map(|p| p.1).collect()
            }
        };
        if speeds.iter().any(|v| !(*v >= 0.0 && v.is_finite())) {
            errors.push(format!("wind speeds must be finite and non-negative"));
        }
    }
}

/// A value versus time: `(time s, value)` breakpoints, linearly interpolated
/// and held at the ends. Repeat a time to make a step.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Schedule(pub Vec<(f64, f64)>);

impl Schedule {
    pub fn constant(v: f64) -> Self {
        Schedule(vec![(0.0, v)])
    }

    pub fn at(&self, t: f64) -> f64 {
        interp(&self.0, t)
    }

    fn validate(&self, name: &str, errors: &mut Vec<String>) {
        if self.0.is_empty() {
            errors.push(format!("setpoints.{name} must not be empty"));
        }
        if self.0.windows(2).any(|w| !(w[1].0 >= w[0].0)) {
            errors.push(format!("setpoints.{name} must be sorted by time"));
        }
        if self.0.iter().any(|p| !p.1.is_finite()) {
            errors.push(format!("setpoints.{name} values must be finite"));
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Setpoints {
    /// Turbine active power limit (pu). Values below 1 curtail.
    pub p_ref: Schedule,
    /// Reactive power exported outside dips (pu).
    pub q_ref: Schedule,
    /// DC-link voltage reference (pu).
    pub v_dc_ref: f64,
}

impl Default for Setpoints {
    fn default() -> Self {
        Self {
            p_ref: Schedule::constant(1.0),
            q_ref: Schedule::constant(0.0),
            v_dc_ref: 1.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridSettings {
    /// Pre-event source EMF magnitude (pu).
    pub magnitude: f64,
    /// Phase `a` angle at `t = 0` (rad).
    pub phase0: f64,
}

impl Default for GridSettings {
    fn default() -> Self {
        Self {
            magnitude: 1.0,
            phase0: 0.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverSettings {
    /// Plant integration step (s).
    pub dt: f64,
    /// Simulated time (s).
    pub duration: f64,
    /// Controllers run every this many plant steps.
    pub control_decimation: u32,
    /// Log sample interval (s), a whole multiple of `dt`.
    pub log_interval: f64,
}

impl Default for SolverSettings {
    fn default() -> Self {
        Self {
            dt: 50e-6,
            duration: 3.0,
            control_decimation: 1,
            log_interval: 1e-3,
        }
    }
}

impl SolverSettings {
    /// Plant steps per log sample.
    pub fn log_every(&self) -> u64 {
        round(self.log_interval / self.dt) as u64
    }

    /// Number of plant steps.
    pub fn steps(&self) -> u64 {
        round(self.duration / self.dt) as u64
    }

    fn validate(&self, errors: &mut Vec<String>) {
        if !(self.duration >= 0.0 && self.duration.is_finite()) {
            errors.push(format!("solver.duration must be non-negative, got {}", self.duration));
        }
        if self.control_decimation == 0 {
            errors.push(format!("solver.control_decimation must be at least 1"));
        }
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            errors.push(format!("solver.dt must be positive, got {}", self.dt));
            return;
        }
        let ratio = self.log_interval / self.dt;
        if !(ratio >= 1.0 - 1e-9) || (ratio - round(ratio)).abs() > 1e-6 * ratio {
            errors.push(format!(
                "solver.log_interval ({}) must be a positive multiple of dt ({})",
                self.log_interval, self.dt
            ));
        } else if self.duration.is_finite() && self.duration >= 0.0 {
            let samples = self.duration / self.log_interval;
            if (samples - round(samples)).abs() > 1e-6 * samples.max(1.0) {
                errors.push(format!("solver.duration must be a whole number of log intervals"));
            }
        }
    }
}

/// Which channels the log keeps; empty keeps all.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputSelection {
    pub channels: Vec<String>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Scenario {
    pub name: String,
    pub description: String,
    pub params: TurbineParams,
    pub wind: WindProfile,
    pub grid: GridSettings,
    pub events: Vec<FaultSpec>,
    pub setpoints: Setpoints,
    pub solver: SolverSettings,
    pub variant: ControlVariant,
    pub output: OutputSelection,
}

impl Scenario {
    /// Checks the whole scenario and returns every violation found.
    pub fn validate(&self) -> Result<(), Vec<String>> {
        let mut errors = Vec::new();
        self.params.validate(&mut errors);
        self.wind.validate(&mut errors);
        self.setpoints.p_ref.validate("p_ref", &mut errors);
        self.setpoints.q_ref.validate("q_ref", &mut errors);
        if !(self.setpoints.v_dc_ref > 0.0 && self.setpoints.v_dc_ref.is_finite()) {
            errors.push(format!("setpoints.v_dc_ref must be positive"));
        }
        if !(self.grid.magnitude > 0.0 && self.grid.magnitude.is_finite() && self.grid.phase0.is_finite()) {
            errors.push(format!("grid.magnitude must be positive and phase0 finite"));
        }
        self.solver.validate(&mut errors);
        validate_events(&self.events, self.solver.duration, &mut errors);
        for name in &self.output.channels {
            if !crate::engine::CHANNELS.iter().any(|c| c.name == name) {
                errors.push(format!("output.channels: unknown channel `{name}`"));
            }
        }
        if errors.is_empty() {
            Ok(())
        } else {
            Err(errors)
        }
    }
}
