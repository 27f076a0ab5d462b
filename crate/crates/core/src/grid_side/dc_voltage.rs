//! DC-link voltage regulator producing the grid-side active power reference.

use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DcVoltageParams {
    /// Proportional gain (pu power per pu voltage squared).
    pub kp: f64,
    /// Integral gain (pu power per pu voltage squared per second).
    pub ki: f64,
    /// Output limit (pu).
    pub p_limit: f64,
}

impl Default for DcVoltageParams {
    fn default() -> Self {
        Self {
            kp: 0.67,
            ki: 8.3,
            p_limit: 1.1,
        }
    }
}

impl DcVoltageParams {
    pub fn validate(&self, errors: &mut alloc::vec::Vec<alloc::string::String>) {
        if !(self.kp >= 0.0 && self.ki >= 0.0 && self.p_limit > 0.0) {
            errors.push(alloc::format!("dc_voltage gains must be non-negative and p_limit positive"));
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct DcVoltageState {
    pub integral: f64,
}

/// Active power reference (pu, positive exports) from a PI acting on
/// `v_dc^2 - v_ref^2`, both in pu. Export is capped at `p_max` as well as the
/// configured limit. The integrator stops while the output sits on either
/// cap and the error would push it further, so it keeps its last value
/// through a temporary ceiling.
pub fn dc_voltage_control(
    p: &DcVoltageParams,
    state: &mut DcVoltageState,
    v_dc: f64,
    v_ref: f64,
    p_max: f64,
    dt: f64,
) -> f64 {
    let hi = p_max.min(p.p_limit).max(0.0);
    let lo = -p.p_limit;
    let err = v_dc * v_dc - v_ref * v_ref;
    let raw = p.kp * err + state.integral;
    let out = raw.clamp(lo, hi);
    let pinned = (raw >= hi && err > 0.0) || (raw <= lo && err < 0.0);
    if !pinned {
        state.integral += p.ki * err * dt;
    }
    state.integral = state.integral.clamp(lo, p.p_limit);
    out
}
