//! Blade pitch regulation and the rate-limited pitch servo.

use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::aero::{AeroParams, OperatingRegion};
use crate::math::{exp, interp};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PitchParams {
    /// Proportional gain (deg per pu error).
    pub kp: f64,
    /// Integral gain (deg per pu error per second).
    pub ki: f64,
    pub beta_min: f64,
    pub beta_max: f64,
    /// Servo slew limit (deg/s).
    pub rate_limit: f64,
    /// Servo time constant (s).
    pub servo_tau: f64,
    /// Below-cut-in pitch lookup, `(wind m/s, pitch deg)`.
    pub lookup: Vec<(f64, f64)>,
}

impl Default for PitchParams {
    fn default() -> Self {
        Self {
            kp: 150.0,
            ki: 25.0,
            beta_min: 0.0,
            beta_max: 30.0,
            rate_limit: 5.0,
            servo_tau: 0.1,
            lookup: vec![(0.0, 25.0), (3.0, 0.0)],
        }
    }
}

impl PitchParams {
    pub fn validate(&self, errors: &mut Vec<alloc::string::String>) {
        use alloc::format;
        if !(self.beta_min < self.beta_max) {
            errors.push(format!("pitch.beta_min must be below beta_max"));
        }
        if !(self.rate_limit > 0.0) || !(self.servo_tau > 0.0) {
            errors.push(format!("pitch.rate_limit and pitch.servo_tau must be positive"));
        }
        if !(self.kp >= 0.0 && self.ki >= 0.0) {
            errors.push(format!("pitch gains must be non-negative"));
        }
        if self.lookup.windows(2).any(|w| w[1].0 < w[0].0) {
            errors.push(format!("pitch.lookup must be sorted by wind speed"));
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct PitchState {
    /// Actual blade angle (deg).
    pub beta: f64,
    /// Commanded blade angle (deg).
    pub beta_ref: f64,
    pub pi_integral: f64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PitchInputs {
    /// Wind speed (m/s).
    pub v_w: f64,
    /// Turbine power reference (pu).
    pub p_ref: f64,
    /// Measured turbine power (pu).
    pub p_meas: f64,
    /// Rotor speed (pu).
    pub omega_pu: f64,
}

/// Pitch reference (deg). Updates the PI integrator in `state`.
///
/// Below cut-in the lookup table applies; between cut-in and rated wind with
/// no curtailment the blades sit at zero; otherwise a PI regulator acts on
/// `max(omega - 1, p_meas - p_ref)`, so speed is held at 1 pu above rated wind
/// and captured power is held at `p_ref` under curtailment.
pub fn pitch_reference(
    params: &PitchParams,
    aero: &AeroParams,
    state: &mut PitchState,
    inputs: PitchInputs,
    dt: f64,
) -> f64 {
    let region = OperatingRegion::from_wind(inputs.v_w, aero);
    let beta_ref = match region {
        OperatingRegion::BelowCutIn => {
            state.pi_integral = 0.0;
            interp(&params.lookup, inputs.v_w)
        }
        OperatingRegion::Shutdown => {
            state.pi_integral = params.beta_max;
            params.beta_max
        }
        OperatingRegion::Mppt if inputs.p_ref >= 1.0 => {
            state.pi_integral = 0.0;
            0.0
        }
        _ => {
            let err = (inputs.omega_pu - 1.0).max(inputs.p_meas - inputs.p_ref);
            let unclamped = params.kp * err + state.pi_integral;
            let out = unclamped.clamp(params.beta_min, params.beta_max);
            // freeze integration while the command or the servo is saturated
            // in the direction the error pushes
            let slewing = (state.beta_ref - state.beta).abs() > params.rate_limit * params.servo_tau;
            let pushing_up = err > 0.0 && (unclamped >= params.beta_max || (slewing && state.beta_ref > state.beta));
            let pushing_down =
                err < 0.0 && (unclamped <= params.beta_min || (slewing && state.beta_ref < state.beta));
            if !(pushing_up || pushing_down) {
                state.pi_integral += params.ki * err * dt;
            }
            state.pi_integral = state
                .pi_integral
                .clamp(params.beta_min - params.kp.abs(), params.beta_max);
            out
        }
    };
    beta_ref.clamp(params.beta_min, params.beta_max)
}

/// Advances the pitch servo: first-order lag toward the clamped reference
/// with a slew-rate limit.
pub fn step_actuator(params: &PitchParams, state: PitchState, beta_ref: f64, dt: f64) -> PitchState {
    let target = beta_ref.clamp(params.beta_min, params.beta_max);
    let lag = (target - state.beta) * (1.0 - exp(-dt / params.servo_tau));
    let max_step = params.rate_limit * dt;
    let beta = (state.beta + lag.clamp(-max_step, max_step)).clamp(params.beta_min, params.beta_max);
    PitchState {
        beta,
        beta_ref: target,
        pi_integral: state.pi_integral,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::aero::{aero_torque, optimal_torque, step_rotor, CpCurve, RotorState};

    #[test]
    fn actuator_holds_at_reference() {
        let p = PitchParams::default();
        let s = PitchState {
            beta: 7.0,
            beta_ref: 7.0,
            pi_integral: 0.0,
        };
        assert_eq!(step_actuator(&p, s, 7.0, 1e-3).beta, 7.0);
    }

    #[test]
    fn actuator_slews_at_rate_limit() {
        let p = PitchParams::default();
        let mut s = PitchState::default();
        let dt = 1e-3;
        for n in 1..=6000 {
            s = step_actuator(&p, s, 30.0, dt);
            let t = n as f64 * dt;
            // exactly 5 deg/s until the lag takes over in the last
            // rate_limit * tau degrees
            if 30.0 - s.beta > p.rate_limit * p.servo_tau + 1e-9 {
                assert!((s.beta - 5.0 * t).abs() < 1e-9, "t {t}: {}", s.beta);
            }
        }
        assert!(s.beta > 29.0);
        for _ in 0..1000 {
            s = step_actuator(&p, s, 30.0, dt);
        }
        assert!((s.beta - 30.0).abs() < 1e-3);
    }

    #[test]
    fn actuator_clamps_below_zero() {
        let p = PitchParams::default();
        let mut s = PitchState {
            beta: 0.2,
            ..Default::default()
        };
        for _ in 0..1000 {
            s = step_actuator(&p, s, -5.0, 1e-3);
        }
        assert!(s.beta >= 0.0 && s.beta < 1e-4, "{}", s.beta);
        assert_eq!(s.beta_ref, 0.0);
    }

    #[test]
    fn region_two_is_zero_pitch() {
        let p = PitchParams::default();
        let a = AeroParams::default();
        let mut s = PitchState::default();
        let b = pitch_reference(
            &p,
            &a,
            &mut s,
            PitchInputs {
                v_w: 8.0,
                p_ref: 1.0,
                p_meas: 0.3,
                omega_pu: 0.67,
            },
            1e-3,
        );
        assert_eq!(b, 0.0);
    }

    #[test]
    fn below_cut_in_uses_lookup() {
        let p = PitchParams::default();
        let a = AeroParams::default();
        let mut s = PitchState::default();
        let inputs = PitchInputs {
            v_w: 1.5,
            p_ref: 1.0,
            p_meas: 0.0,
            omega_pu: 0.0,
        };
        assert!((pitch_reference(&p, &a, &mut s, inputs, 1e-3) - 12.5).abs() < 1e-12);
    }

    #[test]
    fn continuous_across_rated_wind() {
        let p = PitchParams::default();
        let a = AeroParams::default();
        let mut below = PitchState::default();
        let mut above = PitchState::default();
        let at = |v| PitchInputs {
            v_w: v,
            p_ref: 1.0,
            p_meas: 1.0,
            omega_pu: 1.0,
        };
        let b0 = pitch_reference(&p, &a, &mut below, at(12.0), 1e-3);
        let b1 = pitch_reference(&p, &a, &mut above, at(12.0 + 1e-9), 1e-3);
        assert!((b0 - b1).abs() < 1e-6);
    }

    /// Mechanical closed loop: rotor, pitch PI and servo, with the generator
    /// torque on the optimal-torque law capped at `p_ref` times rated torque.
    fn simulate(v_of_t: impl Fn(f64) -> f64, p_ref: f64, omega0: f64, beta0: f64, secs: f64) -> (RotorState, PitchState, f64) {
        let a = AeroParams::default();
        let c = CpCurve::from_params(&a);
        let p = PitchParams::default();
        let mut rotor = RotorState { omega_r: omega0 };
        let mut pitch = PitchState {
            beta: beta0,
            beta_ref: beta0,
            pi_integral: beta0,
        };
        let dt = 1e-3;
        let t_cap = p_ref.min(1.0) * a.rated_torque();
        let mut peak: f64 = 0.0;
        let steps = (secs / dt) as usize;
        for n in 0..steps {
            let t = n as f64 * dt;
            let v = v_of_t(t);
            let t_gen = optimal_torque(&a, rotor.omega_r).min(t_cap);
            let inputs = PitchInputs {
                v_w: v,
                p_ref,
                p_meas: t_gen * rotor.omega_r / a.p_rated,
                omega_pu: rotor.omega_pu(&a),
            };
            let r = pitch_reference(&p, &a, &mut pitch, inputs, dt);
            pitch = step_actuator(&p, pitch, r, dt);
            let ta = aero_torque(&a, &c, v, rotor.omega_r, pitch.beta);
            rotor = step_rotor(rotor, a.j_total, ta, t_gen, dt);
            peak = peak.max(rotor.omega_pu(&a));
        }
        (rotor, pitch, peak)
    }

    #[test]
    fn holds_rated_speed_and_power_at_15_mps() {
        let a = AeroParams::default();
        let (rotor, pitch, _) = simulate(|_| 15.0, 1.0, 0.8, 5.0, 120.0);
        let w = rotor.omega_pu(&a);
        assert!((w - 1.0).abs() < 0.01, "omega {w}");
        let t = optimal_torque(&a, rotor.omega_r).min(a.rated_torque());
        let pw = t * rotor.omega_r / a.p_rated;
        assert!((pw - 1.0).abs() < 0.01, "power {pw}");
        assert!(pitch.beta > 0.0);
    }

    #[test]
    fn step_12_to_18_overshoot_bounded() {
        let a = AeroParams::default();
        let (rotor, _, peak) = simulate(|t| if t < 1.0 { 12.0 } else { 18.0 }, 1.0, 0.8, 0.0, 90.0);
        assert!(peak < 1.2, "peak speed {peak} pu");
        assert!((rotor.omega_pu(&a) - 1.0).abs() < 0.01);
    }

    #[test]
    fn curtailment_holds_half_power() {
        let a = AeroParams::default();
        let c = CpCurve::from_params(&a);
        let w0 = crate::aero::mppt_equilibrium(&a, &c, 10.0, 0.0).unwrap();
        let (rotor, pitch, _) = simulate(|_| 10.0, 0.5, w0, 0.0, 300.0);
        let t_gen = optimal_torque(&a, rotor.omega_r).min(0.5 * a.rated_torque());
        let pw = t_gen * rotor.omega_r / a.p_rated;
        assert!((pw - 0.5).abs() < 0.01, "power {pw}");
        assert!(pitch.beta > 0.0);
    }
}
