//! DC-link capacitor between the two converters, with a resistive braking
//! chopper switched by voltage hysteresis.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::framework::integrate_step;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DcLinkParams {
    /// Capacitance (F).
    pub capacitance: f64,
    /// Nominal voltage (V).
    pub v_nominal: f64,
    /// Chopper turn-on threshold (pu of nominal).
    pub chopper_on: f64,
    /// Chopper turn-off threshold (pu of nominal).
    pub chopper_off: f64,
    /// Braking resistance (ohm). Sized so the chopper absorbs `p_rated` at
    /// the turn-on threshold.
    pub r_chop: f64,
}

impl DcLinkParams {
    pub fn chopper_resistance(v_nominal: f64, on_threshold: f64, p_rated: f64) -> f64 {
        let v = on_threshold * v_nominal;
        v * v / p_rated
    }

    pub fn stored_energy(&self, v_dc: f64) -> f64 {
        0.5 * self.capacitance * v_dc * v_dc
    }

    pub fn validate(&self, errors: &mut Vec<String>) {
        for (name, v) in [
            ("capacitance", self.capacitance),
            ("v_nominal", self.v_nominal),
            ("r_chop", self.r_chop),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                errors.push(format!("dc_link.{name} must be positive, got {v}"));
            }
        }
        if !(self.chopper_off < self.chopper_on) {
            errors.push(format!(
                "dc_link.chopper_off ({}) must be below chopper_on ({})",
                self.chopper_off, self.chopper_on
            ));
        }
    }
}

impl Default for DcLinkParams {
    fn default() -> Self {
        Self {
            capacitance: 4000e-6,
            v_nominal: 10e3,
            chopper_on: 1.10,
            chopper_off: 1.05,
            r_chop: Self::chopper_resistance(10e3, 1.10, 15e6),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DcLinkState {
    /// Capacitor voltage (V).
    pub v_dc: f64,
    pub chopper_on: bool,
    /// Energy dissipated in the chopper so far (J).
    pub chopper_energy: f64,
}

impl DcLinkState {
    pub fn nominal(p: &DcLinkParams) -> Self {
        Self {
            v_dc: p.v_nominal,
            chopper_on: false,
            chopper_energy: 0.0,
        }
    }
}

/// The capacitor voltage left the physical range.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DcLinkCollapse {
    pub v_dc: f64,
}

/// Updates the chopper hysteresis for the measured voltage and returns the
/// power it would dissipate at that voltage (W).
pub fn chopper_logic(p: &DcLinkParams, on: &mut bool, v_dc: f64) -> f64 {
    let v_pu = v_dc / p.v_nominal;
    if v_pu > p.chopper_on {
        *on = true;
    } else if v_pu < p.chopper_off {
        *on = false;
    }
    if *on {
        v_dc * v_dc / p.r_chop
    } else {
        0.0
    }
}

/// `dv/dt` from `C v dv/dt = p_in - p_out - p_chop`.
pub fn dc_derivative(p: &DcLinkParams, v_dc: f64, p_in: f64, p_out: f64, chopper_on: bool) -> f64 {
    let p_chop = if chopper_on { v_dc * v_dc / p.r_chop } else { 0.0 };
    (p_in - p_out - p_chop) / (p.capacitance * v_dc)
}

/// Advances the link one step with both converter powers held. The chopper
/// state is latched from the voltage at the start of the step.
pub fn step_dclink(
    p: &DcLinkParams,
    state: DcLinkState,
    p_in: f64,
    p_out: f64,
    dt: f64,
) -> Result<DcLinkState, DcLinkCollapse> {
    let mut on = state.chopper_on;
    chopper_logic(p, &mut on, state.v_dc);
    let x = integrate_step(&[state.v_dc, state.chopper_energy], 0.0, dt, |_, x| {
        let p_chop = if on { x[0] * x[0] / p.r_chop } else { 0.0 };
        [dc_derivative(p, x[0], p_in, p_out, on), p_chop]
    })
    .map_err(|_| DcLinkCollapse { v_dc: f64::NAN })?;
    if !(x[0] > 0.0) {
        return Err(DcLinkCollapse { v_dc: x[0] });
    }
    Ok(DcLinkState {
        v_dc: x[0],
        chopper_on: on,
        chopper_energy: x[1],
    })
}
