//! Per-phase second-order generalised integrators, sequence extraction from
//! their quadrature outputs, and the synchronous-frame PLL that tracks the
//! positive-sequence angle.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::framework::{SequenceDq, ThreePhaseSample, PHASE_OP, PHASE_OP_SQ};
use crate::math::{atan2, exp, tan, SQRT_2};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PllParams {
    /// SOGI damping gain.
    pub sogi_gain: f64,
    /// Loop-filter proportional gain (rad/s per rad).
    pub kp: f64,
    /// Loop-filter integral gain (rad/s^2 per rad).
    pub ki: f64,
    /// Positive-sequence magnitude below which the frequency estimate is held (pu).
    pub hold_voltage: f64,
    /// Frequency estimate clamp, as a fraction of nominal either side.
    pub omega_band: f64,
    /// Time constant of the slow frequency memory the estimate falls back
    /// to while held (s).
    pub memory_tc: f64,
}

impl Default for PllParams {
    fn default() -> Self {
        Self {
            sogi_gain: SQRT_2,
            kp: 88.9,
            ki: 3948.0,
            hold_voltage: 0.03,
            omega_band: 0.1,
            memory_tc: 0.1,
        }
    }
}

impl PllParams {
    pub fn validate(&self, errors: &mut alloc::vec::Vec<alloc::string::String>) {
        if !(self.sogi_gain > 0.0 && self.kp > 0.0 && self.ki > 0.0) {
            errors.push(alloc::format!("pll gains must be positive"));
        }
        if !(self.omega_band > 0.0 && self.omega_band < 1.0) {
            errors.push(alloc::format!("pll.omega_band must lie in (0, 1)"));
        }
        if !(self.memory_tc > 0.0) {
            errors.push(alloc::format!("pll.memory_tc must be positive"));
        }
    }
}

/// Three SOGI quadrature-signal generators, one per phase.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SogiBank {
    /// In-phase outputs.
    pub direct: [f64; 3],
    /// Quadrature (90 degrees lagging) outputs.
    pub quadrature: [f64; 3],
    /// Input samples from the previous step.
    pub last_input: [f64; 3],
}

impl SogiBank {
    /// Bank already in steady state for a waveform whose per-phase analytic
    /// signals at this instant are `z`.
    pub fn settled(z: [Complex64; 3]) -> Self {
        Self {
            direct: [z[0].re, z[1].re, z[2].re],
            quadrature: [z[0].im, z[1].im, z[2].im],
            last_input: [z[0].re, z[1].re, z[2].re],
        }
    }

    /// Advances every SOGI with a bilinear (Tustin) discretisation,
    /// frequency-prewarped at `omega` so the quadrature is exact there.
    pub fn step(&mut self, input: ThreePhaseSample, omega: f64, gain: f64, dt: f64) {
        let a = tan(0.5 * omega * dt);
        let det = 1.0 + gain * a + a * a;
        for (n, u) in [input.a, input.b, input.c].into_iter().enumerate() {
            let (x0, x1) = (self.direct[n], self.quadrature[n]);
            let r0 = (1.0 - gain * a) * x0 - a * x1 + gain * a * (self.last_input[n] + u);
            let r1 = a * x0 + x1;
            self.direct[n] = (r0 - a * r1) / det;
            self.quadrature[n] = (a * r0 + (1.0 + gain * a) * r1) / det;
            self.last_input[n] = u;
        }
    }

    /// Rotating analytic signals `v' + j qv'` of the three phases.
    pub fn analytic(&self) -> [Complex64; 3] {
        core::array::from_fn(|n| Complex64::new(self.direct[n], self.quadrature[n]))
    }

    /// Positive- and negative-sequence components seen from the frame at
    /// `theta`.
    pub fn sequences(&self, theta: f64) -> SequenceDq {
        let [za, zb, zc] = self.analytic();
        let pos = (za + PHASE_OP * zb + PHASE_OP_SQ * zc) / 3.0;
        let neg = (za + PHASE_OP_SQ * zb + PHASE_OP * zc) / 3.0;
        let back = Complex64::from_polar(1.0, -theta);
        let p = pos * back;
        let n = (neg * back).conj();
        SequenceDq::new(p.re, p.im, n.re, n.im)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PllState {
    pub sogi: SogiBank,
    /// Positive-sequence angle estimate (rad), unwrapped.
    pub theta: f64,
    /// Frequency estimate (rad/s).
    pub omega: f64,
    /// Loop-filter integrator (rad/s, offset from nominal).
    pub integral: f64,
    /// Slow copy of the integrator, restored while the estimate is held.
    pub memory: f64,
}

impl PllState {
    pub fn locked(omega0: f64, theta: f64, sogi: SogiBank) -> Self {
        Self {
            sogi,
            theta,
            omega: omega0,
            integral: 0.0,
            memory: 0.0,
        }
    }
}

/// Output of one PLL step: sequence voltages in the frame at the sample
/// instant, and that frame's angle.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PllOutput {
    pub v_seq: SequenceDq,
    pub theta: f64,
    pub omega: f64,
}

/// Processes one terminal-voltage sample. The returned angle belongs to this
/// sample; the state's angle is advanced to the next one.
pub fn sogi_pll_step(p: &PllParams, state: &mut PllState, v: ThreePhaseSample, omega0: f64, dt: f64) -> PllOutput {
    let w_lo = (1.0 - p.omega_band) * omega0;
    let w_hi = (1.0 + p.omega_band) * omega0;
    state.sogi.step(v, omega0, p.sogi_gain, dt);
    let theta = state.theta;
    let v_seq = state.sogi.sequences(theta);
    let pos = v_seq.pos();
    let omega = if pos.magnitude() >= p.hold_voltage {
        let err = atan2(pos.q, pos.d);
        state.integral += p.ki * err * dt;
        state.integral = state.integral.clamp(w_lo - omega0, w_hi - omega0);
        state.memory += (state.integral - state.memory) * (1.0 - exp(-dt / p.memory_tc));
        (omega0 + state.integral + p.kp * err).clamp(w_lo, w_hi)
    } else {
        state.integral = state.memory;
        omega0 + state.integral
    };
    state.omega = omega;
    state.theta = theta + omega * dt;
    PllOutput { v_seq, theta, omega }
}
