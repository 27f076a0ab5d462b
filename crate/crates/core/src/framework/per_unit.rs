use serde::{Deserialize, Serialize};

use crate::math::{SQRT_2, SQRT_3, TAU};

/// Power factor of the amplitude-invariant transform: a balanced set with
/// peak phase amplitudes `v` and `i` carries `1.5 * v * i` watts.
pub const PEAK_POWER_FACTOR: f64 = 1.5;

/// Base quantities for one electrical section.
///
/// Voltages and currents are per-unitised on *peak phase* values so that the
/// amplitude-invariant dq components read directly in per unit, and
/// `s_base = 1.5 * v_peak * i_peak`. In that system the per-unit active power
/// of a balanced set is simply `v_d * i_d + v_q * i_q`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PerUnitBase {
    /// Apparent power base (VA).
    pub s_base: f64,
    /// Line-to-line RMS voltage base (V).
    pub v_base_ll: f64,
    /// Nominal frequency (Hz).
    pub f0: f64,
}

impl PerUnitBase {
    pub fn new(s_base: f64, v_base_ll: f64, f0: f64) -> Result<Self, &'static str> {
        let base = Self { s_base, v_base_ll, f0 };
        base.check()?;
        Ok(base)
    }

    pub fn check(&self) -> Result<(), &'static str> {
        let ok = |x: f64| x.is_finite() && x > 0.0;
        if !ok(self.s_base) {
            return Err("s_base must be positive");
        }
        if !ok(self.v_base_ll) {
            return Err("v_base_ll must be positive");
        }
        if !ok(self.f0) {
            return Err("f0 must be positive");
        }
        Ok(())
    }

    pub fn omega0(&self) -> f64 {
        TAU * self.f0
    }

    /// Peak phase-to-neutral voltage at 1 pu.
    pub fn v_peak(&self) -> f64 {
        self.v_base_ll * SQRT_2 / SQRT_3
    }

    /// RMS line current at 1 pu.
    pub fn i_base(&self) -> f64 {
        self.s_base / (SQRT_3 * self.v_base_ll)
    }

    /// Peak phase current at 1 pu.
    pub fn i_peak(&self) -> f64 {
        self.i_base() * SQRT_2
    }

    pub fn z_base(&self) -> f64 {
        self.v_base_ll * self.v_base_ll / self.s_base
    }

    /// Inductance whose reactance at `f0` is 1 pu.
    pub fn l_base(&self) -> f64 {
        self.z_base() / self.omega0()
    }

    /// Capacitance whose susceptance at `f0` is 1 pu.
    pub fn c_base(&self) -> f64 {
        1.0 / (self.z_base() * self.omega0())
    }

    /// Re-expresses a per-unit impedance given on `other`'s power base.
    pub fn impedance_from(&self, z_pu_other: f64, other_s_base: f64) -> f64 {
        z_pu_other * self.s_base / other_s_base
    }
}
