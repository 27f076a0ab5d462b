//! Permanent-magnet synchronous generator and its machine-side converter
//! control: torque reference selection and the inner dq current loop.
//!
//! The machine is written in generator convention: positive `i_q` with
//! positive speed delivers power to the converter and produces a braking
//! torque on the rotor.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::aero::OperatingRegion;
use crate::framework::{integrate_step, Dq, NonFiniteDerivative};
use crate::math::{hypot, SQRT_3, TAU};

/// Rated phase-peak voltage of the 4 kV stator.
const V_PEAK_RATED: f64 = 4000.0 * crate::math::SQRT_2 / SQRT_3;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PmsgParams {
    pub pole_pairs: f64,
    /// Stator resistance (ohm).
    pub r_s: f64,
    /// d-axis inductance (H).
    pub l_d: f64,
    /// q-axis inductance (H).
    pub l_q: f64,
    /// Magnet flux linkage (Wb).
    pub flux_m: f64,
    /// Rated apparent power (VA).
    pub s_rated: f64,
    /// Stator current limit as a multiple of rated current.
    pub current_limit: f64,
}

impl PmsgParams {
    /// Flux linkage that yields rated torque at rated phase-peak current with
    /// `i_d = 0`. With the stator base this equals `V_peak / omega_e_rated`.
    pub fn rated_flux(s_rated: f64, p_rated: f64, omega_rated: f64, pole_pairs: f64) -> f64 {
        let i_peak = s_rated / (1.5 * V_PEAK_RATED);
        (p_rated / omega_rated) / (1.5 * pole_pairs * i_peak)
    }

    /// Rated phase-peak stator current (A).
    pub fn rated_current(&self) -> f64 {
        self.s_rated / (1.5 * V_PEAK_RATED)
    }

    pub fn torque_constant(&self) -> f64 {
        1.5 * self.pole_pairs * self.flux_m
    }

    pub fn validate(&self, errors: &mut Vec<String>) {
        for (name, v) in [
            ("pole_pairs", self.pole_pairs),
            ("r_s", self.r_s),
            ("l_d", self.l_d),
            ("l_q", self.l_q),
            ("flux_m", self.flux_m),
            ("s_rated", self.s_rated),
            ("current_limit", self.current_limit),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                errors.push(format!("machine.{name} must be positive, got {v}"));
            }
        }
    }
}

impl Default for PmsgParams {
    fn default() -> Self {
        Self {
            pole_pairs: 162.0,
            r_s: 0.0368,
            l_d: 0.0087,
            l_q: 0.0058,
            flux_m: Self::rated_flux(15e6, 15e6, 0.8, 162.0),
            s_rated: 15e6,
            current_limit: 1.1,
        }
    }
}

/// Stator dq currents (A).
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct PmsgState {
    pub i_d: f64,
    pub i_q: f64,
}

impl PmsgState {
    pub fn current(&self) -> Dq {
        Dq::new(self.i_d, self.i_q)
    }

    /// Magnetic energy stored in the stator inductances (J).
    pub fn stored_energy(&self, p: &PmsgParams) -> f64 {
        0.75 * (p.l_d * self.i_d * self.i_d + p.l_q * self.i_q * self.i_q)
    }
}

/// Stator current derivatives for terminal voltage `v` (V) at mechanical
/// speed `omega_r` (rad/s).
pub fn pmsg_derivative(p: &PmsgParams, i: PmsgState, v: Dq, omega_r: f64) -> [f64; 2] {
    let w = p.pole_pairs * omega_r;
    [
        (-v.d - p.r_s * i.i_d + w * p.l_q * i.i_q) / p.l_d,
        (-v.q - p.r_s * i.i_q - w * p.l_d * i.i_d + w * p.flux_m) / p.l_q,
    ]
}

/// Electromagnetic (braking) torque (N m). With generator-convention
/// currents the reluctance term carries `L_q - L_d`.
pub fn electrical_torque(p: &PmsgParams, i: PmsgState) -> f64 {
    1.5 * p.pole_pairs * (p.flux_m * i.i_q + (p.l_q - p.l_d) * i.i_d * i.i_q)
}

/// Electrical power delivered at the stator terminals (W).
pub fn stator_power(v: Dq, i: PmsgState) -> f64 {
    1.5 * (v.d * i.i_d + v.q * i.i_q)
}

/// Advances the stator currents one step with the terminal voltage and speed
/// held, returning the new state and the torque at the end of the step.
pub fn step_pmsg(
    p: &PmsgParams,
    state: PmsgState,
    v: Dq,
    omega_r: f64,
    dt: f64,
) -> Result<(PmsgState, f64), NonFiniteDerivative> {
    let x = integrate_step(&[state.i_d, state.i_q], 0.0, dt, |_, x| {
        pmsg_derivative(p, PmsgState { i_d: x[0], i_q: x[1] }, v, omega_r)
    })?;
    let next = PmsgState { i_d: x[0], i_q: x[1] };
    Ok((next, electrical_torque(p, next)))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MscControlParams {
    /// Current-loop bandwidth (rad/s).
    pub current_bandwidth: f64,
    /// Speed-loop proportional gain (pu torque per pu speed).
    pub speed_kp: f64,
    /// Speed-loop integral gain (pu torque per pu speed per second).
    pub speed_ki: f64,
    /// Speed-loop reference (pu), below the pitch set point so the torque
    /// loop rests on its limit while pitch regulates speed.
    pub speed_ref: f64,
}

impl Default for MscControlParams {
    fn default() -> Self {
        Self {
            current_bandwidth: TAU * 300.0,
            speed_kp: 13.5,
            speed_ki: 3.0,
            speed_ref: 0.95,
        }
    }
}

impl MscControlParams {
    pub fn validate(&self, errors: &mut Vec<String>) {
        if !(self.current_bandwidth > 0.0) {
            errors.push(format!("msc.current_bandwidth must be positive"));
        }
        if !(self.speed_kp >= 0.0 && self.speed_ki >= 0.0) {
            errors.push(format!("msc speed gains must be non-negative"));
        }
        if !(self.speed_ref > 0.0 && self.speed_ref <= 1.0) {
            errors.push(format!("msc.speed_ref must be in (0, 1]"));
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct MscState {
    /// Speed-loop integrator (N m).
    pub speed_integral: f64,
    /// Current-loop integrators (V).
    pub int_d: f64,
    pub int_q: f64,
    /// Last torque reference (N m).
    pub torque_ref: f64,
    /// Whether the speed loop was active on the previous step.
    pub speed_loop_active: bool,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TorqueInputs {
    pub region: OperatingRegion,
    /// Rotor speed (pu).
    pub omega_pu: f64,
    /// Speed reference (pu).
    pub omega_ref: f64,
    /// Optimal-torque law output (N m).
    pub t_opt: f64,
    /// Rated torque (N m).
    pub t_rated: f64,
    /// Turbine power reference (pu).
    pub p_ref: f64,
}

/// Generator torque reference (N m), limited to `[0, t_rated]`.
///
/// Entering the speed loop presets its integrator to the previous reference
/// so the hand-over from the optimal-torque law is bumpless.
pub fn torque_control(params: &MscControlParams, state: &mut MscState, inputs: TorqueInputs, dt: f64) -> f64 {
    let t_ref = match inputs.region {
        OperatingRegion::BelowCutIn | OperatingRegion::Mppt => {
            state.speed_loop_active = false;
            inputs.t_opt.clamp(0.0, inputs.t_rated)
        }
        OperatingRegion::Shutdown => {
            state.speed_loop_active = false;
            0.0
        }
        OperatingRegion::Rated => {
            if !state.speed_loop_active {
                state.speed_integral = state.torque_ref;
                state.speed_loop_active = true;
            }
            let cap = inputs.p_ref.clamp(0.0, 1.0) * inputs.t_rated;
            let err = inputs.omega_pu - inputs.omega_ref;
            let unclamped = params.speed_kp * inputs.t_rated * err + state.speed_integral;
            let saturated = (unclamped >= cap && err > 0.0) || (unclamped <= 0.0 && err < 0.0);
            if !saturated {
                state.speed_integral += params.speed_ki * inputs.t_rated * err * dt;
            }
            state.speed_integral = state.speed_integral.clamp(0.0, cap);
            unclamped.clamp(0.0, cap)
        }
    };
    state.torque_ref = t_ref;
    t_ref
}

/// Stator current reference for a torque reference with `i_d = 0`, limited
/// to the machine current limit.
pub fn current_reference(p: &PmsgParams, torque_ref: f64) -> Dq {
    let limit = p.current_limit * p.rated_current();
    Dq::new(0.0, (torque_ref / p.torque_constant()).clamp(-limit, limit))
}

/// Stator voltage command (V) from the dq current PI loops with decoupling
/// and back-EMF feedforward, limited to the `v_dc / sqrt(3)` phase peak.
/// Integrators hold while the command is limited.
pub fn msc_current_control(
    p: &PmsgParams,
    params: &MscControlParams,
    state: &mut MscState,
    i_ref: Dq,
    i_meas: PmsgState,
    omega_r: f64,
    v_dc: f64,
    dt: f64,
) -> Dq {
    let w = p.pole_pairs * omega_r;
    let bw = params.current_bandwidth;
    let ed = i_ref.d - i_meas.i_d;
    let eq = i_ref.q - i_meas.i_q;
    let ff = Dq::new(w * p.l_q * i_meas.i_q, w * (p.flux_m - p.l_d * i_meas.i_d));
    let vd = ff.d - (p.l_d * bw * ed + state.int_d);
    let vq = ff.q - (p.l_q * bw * eq + state.int_q);
    let limit = v_dc.max(0.0) / SQRT_3;
    let mag = hypot(vd, vq);
    if mag > limit {
        let k = if mag > 0.0 { limit / mag } else { 0.0 };
        return Dq::new(vd * k, vq * k);
    }
    state.int_d += p.r_s * bw * ed * dt;
    state.int_q += p.r_s * bw * eq * dt;
    Dq::new(vd, vq)
}
