//! Dual synchronous-frame current control of the filter inductor current.

use serde::{Deserialize, Serialize};

use crate::framework::SequenceDq;
use crate::math::TAU;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CurrentControlParams {
    /// Closed-loop bandwidth (rad/s).
    pub bandwidth: f64,
    /// PI zero as a fraction of the bandwidth.
    pub zero_ratio: f64,
}

impl Default for CurrentControlParams {
    fn default() -> Self {
        Self {
            bandwidth: TAU * 50.0,
            zero_ratio: 0.25,
        }
    }
}

impl CurrentControlParams {
    pub fn validate(&self, errors: &mut alloc::vec::Vec<alloc::string::String>) {
        if !(self.bandwidth > 0.0 && self.zero_ratio >= 0.0) {
            errors.push(alloc::format!("current_control.bandwidth must be positive"));
        }
    }

    /// `(kp, ki)` for a filter inductance `l_pu` (reactance at nominal
    /// frequency, pu) with nominal frequency `omega0`.
    pub fn gains(&self, l_pu: f64, omega0: f64) -> (f64, f64) {
        let kp = l_pu / omega0 * self.bandwidth;
        (kp, kp * self.bandwidth * self.zero_ratio)
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct CurrentControlState {
    /// Integrators in `[d+, q+, d-, q-]` order (pu voltage).
    pub integral: [f64; 4],
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct VoltageCommand {
    pub v: SequenceDq,
    /// Common scale applied to fit the modulation limit (1 when unlimited).
    pub scale: f64,
}

/// Converter voltage per sequence: PI on each axis, cross-coupling
/// decoupling with the filter reactance `x_f` (`+j` in the positive frame,
/// `-j` in the negative frame) and the feedforward voltage `v_ff` given in
/// the same frames. If the summed
/// sequence magnitudes exceed `v_max` both commands shrink by a common factor
/// and the integrators hold.
pub fn sequence_current_control(
    p: &CurrentControlParams,
    state: &mut CurrentControlState,
    i_ref: &SequenceDq,
    i_meas: &SequenceDq,
    v_ff: &SequenceDq,
    x_f: f64,
    omega0: f64,
    v_max: f64,
    dt: f64,
) -> VoltageCommand {
    let (kp, ki) = p.gains(x_f, omega0);
    let r = i_ref.as_array();
    let m = i_meas.as_array();
    let e: [f64; 4] = core::array::from_fn(|k| r[k] - m[k]);
    let decouple = [-x_f * m[1], x_f * m[0], x_f * m[3], -x_f * m[2]];
    let ff = v_ff.as_array();
    let raw: [f64; 4] = core::array::from_fn(|k| ff[k] + decouple[k] + kp * e[k] + state.integral[k]);
    let cmd = SequenceDq::new(raw[0], raw[1], raw[2], raw[3]);
    let total = cmd.pos().magnitude() + cmd.neg().magnitude();
    if total > v_max && total > 0.0 {
        let k = v_max.max(0.0) / total;
        return VoltageCommand { v: cmd.scale(k), scale: k };
    }
    for k in 0..4 {
        state.integral[k] += ki * e[k] * dt;
    }
    VoltageCommand { v: cmd, scale: 1.0 }
}
