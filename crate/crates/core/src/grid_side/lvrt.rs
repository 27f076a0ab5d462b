//! Low-voltage ride-through: dip detection and the voltage-dependent
//! active/reactive current commands and limits.

use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::math::{exp, interp};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LvrtParams {
    /// Dip detection threshold on the positive-sequence magnitude (pu).
    pub dip_threshold: f64,
    /// Time the voltage must stay above the threshold to clear a dip (s).
    pub release_hold: f64,
    /// Reactive current gain (pu current per pu voltage).
    pub k_qv: f64,
    /// Reference voltage the reactive injection is measured from (pu).
    pub iq_reference_voltage: f64,
    /// Deadband on the voltage error (pu).
    pub deadband: f64,
    /// Lower active-current limit during a dip (pu, may be negative).
    pub ip_min: f64,
    /// Active current limit versus voltage, `(pu voltage, pu current)`.
    pub vdl1: Vec<(f64, f64)>,
    /// Reactive current limit versus voltage, `(pu voltage, pu current)`.
    pub vdl2: Vec<(f64, f64)>,
    /// Keep the reactive command whole and cut active current first.
    pub reactive_priority: bool,
    /// Voltage floor for converting power demand to current (pu).
    pub voltage_floor: f64,
    /// Time constant of the voltage measurement behind the injection law
    /// and the limit tables (s). Zero uses the raw magnitude.
    pub voltage_filter_tc: f64,
    /// Below this raw magnitude the measurement follows the voltage at
    /// once (pu).
    pub voltage_snap: f64,
}

impl Default for LvrtParams {
    fn default() -> Self {
        Self {
            dip_threshold: 0.9,
            release_hold: 0.02,
            k_qv: 1.333,
            iq_reference_voltage: 1.0,
            deadband: 0.0,
            ip_min: -0.3,
            vdl1: vec![(0.0, 0.0), (0.2, 0.0), (0.5, 1.1), (1.0, 1.1)],
            vdl2: vec![(0.0, 0.0), (0.1, 0.0), (0.5, 1.1), (1.0, 1.1)],
            reactive_priority: true,
            voltage_floor: 0.05,
            voltage_filter_tc: 0.02,
            voltage_snap: 0.2,
        }
    }
}

impl LvrtParams {
    pub fn validate(&self, errors: &mut Vec<alloc::string::String>) {
        use alloc::format;
        if !(self.dip_threshold > 0.0 && self.release_hold >= 0.0 && self.k_qv >= 0.0) {
            errors.push(format!("lvrt thresholds and gain must be non-negative"));
        }
        if !(self.deadband >= 0.0 && self.voltage_floor > 0.0) {
            errors.push(format!("lvrt.deadband must be >= 0 and voltage_floor > 0"));
        }
        if !(self.voltage_filter_tc >= 0.0 && self.voltage_snap >= 0.0) {
            errors.push(format!("lvrt.voltage_filter_tc and voltage_snap must be >= 0"));
        }
        for (name, t) in [("vdl1", &self.vdl1), ("vdl2", &self.vdl2)] {
            if t.is_empty() || t.windows(2).any(|w| w[1].0 < w[0].0) {
                errors.push(format!("lvrt.{name} must be non-empty and sorted by voltage"));
            }
            if t.iter().any(|p| p.1 < 0.0) {
                errors.push(format!("lvrt.{name} limits must be non-negative"));
            }
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct LvrtState {
    pub v_dip: bool,
    /// Time spent above the threshold while a dip is still flagged (s).
    pub dip_timer: f64,
    pub iq_switch: bool,
    pub ip_switch: bool,
    /// Filtered positive-sequence magnitude (pu).
    pub v_filt: f64,
}

impl LvrtState {
    /// No dip, measurement settled at `v`.
    pub fn settled(v: f64) -> Self {
        Self {
            v_filt: v,
            ..Self::default()
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct LvrtCommand {
    /// Active current command (pu).
    pub ip: f64,
    /// Reactive current command (pu, positive exports vars).
    pub iq: f64,
    pub ip_min: f64,
    pub ip_max: f64,
    pub iq_max: f64,
}

/// Advances the voltage measurement and the dip flag for the terminal
/// voltage `v_t`. Detection uses the raw magnitude.
pub fn lvrt_measure(p: &LvrtParams, state: &mut LvrtState, v_t: f64, dt: f64) {
    state.v_filt = if p.voltage_filter_tc > 0.0 && v_t >= p.voltage_snap {
        state.v_filt + (v_t - state.v_filt) * (1.0 - exp(-dt / p.voltage_filter_tc))
    } else {
        v_t
    };
    if v_t < p.dip_threshold {
        state.v_dip = true;
        state.dip_timer = 0.0;
    } else if state.v_dip {
        state.dip_timer += dt;
        if state.dip_timer >= p.release_hold {
            state.v_dip = false;
            state.dip_timer = 0.0;
        }
    }
    state.iq_switch = state.v_dip;
    state.ip_switch = state.v_dip;
}

/// Injection commands for the measured voltage. `p_demand` is the active
/// power the DC-link regulator asks for (pu).
pub fn lvrt_command(p: &LvrtParams, state: &LvrtState, p_demand: f64) -> LvrtCommand {
    let v_t = state.v_filt;
    let iq_max = interp(&p.vdl2, v_t);
    let ip_max = interp(&p.vdl1, v_t);
    let ip_min = p.ip_min.max(-ip_max);
    if !state.v_dip {
        return LvrtCommand {
            ip: p_demand / v_t.max(p.voltage_floor),
            iq: 0.0,
            ip_min,
            ip_max,
            iq_max,
        };
    }
    let iq = (p.k_qv * (p.iq_reference_voltage - v_t - p.deadband).max(0.0)).min(iq_max);
    let ip = (p_demand / v_t.max(p.voltage_floor)).clamp(ip_min.min(ip_max), ip_max);
    LvrtCommand {
        ip,
        iq,
        ip_min,
        ip_max,
        iq_max,
    }
}

/// [`lvrt_measure`] followed by [`lvrt_command`].
pub fn lvrt_injection(p: &LvrtParams, state: &mut LvrtState, v_t: f64, p_demand: f64, dt: f64) -> LvrtCommand {
    lvrt_measure(p, state, v_t, dt);
    lvrt_command(p, state, p_demand)
}
