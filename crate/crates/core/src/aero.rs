//! Rotor aerodynamics and the single-mass drivetrain.

use serde::{Deserialize, Serialize};

use crate::framework::integrate_step;
use crate::math::{bisect, exp, PI};

/// Betz limit on the power coefficient.
pub const BETZ_LIMIT: f64 = 16.0 / 27.0;

/// Rotor speed floor used when evaluating `T = P / omega` near standstill.
pub const OMEGA_FLOOR: f64 = 0.01;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AeroParams {
    /// Air density (kg/m^3).
    pub rho: f64,
    /// Rotor radius (m).
    pub rotor_radius: f64,
    pub cp_max: f64,
    pub lambda_opt: f64,
    /// Cut-in wind speed (m/s).
    pub v_cin: f64,
    /// Rated wind speed (m/s).
    pub v_rated: f64,
    /// Cut-out wind speed (m/s).
    pub v_cout: f64,
    /// Rated mechanical power (W).
    pub p_rated: f64,
    /// Total reflected inertia (kg m^2).
    pub j_total: f64,
    /// Rated rotor speed (rad/s).
    pub omega_rated: f64,
}

impl Default for AeroParams {
    /// The 15 MW, 236 m rotor with `cp_max`/`lambda_opt` calibrated so that
    /// rated power is reached exactly at rated wind and rated speed.
    fn default() -> Self {
        let mut p = Self {
            rho: 1.225,
            rotor_radius: 118.0,
            cp_max: 0.0,
            lambda_opt: 0.0,
            v_cin: 3.0,
            v_rated: 12.0,
            v_cout: 25.0,
            p_rated: 15e6,
            j_total: 3.16e8,
            omega_rated: 0.8,
        };
        p.calibrate();
        p
    }
}

impl AeroParams {
    /// Swept-area factor `0.5 rho pi R^2`.
    pub fn half_rho_area(&self) -> f64 {
        0.5 * self.rho * PI * self.rotor_radius * self.rotor_radius
    }

    /// Places the power-curve optimum on the rated operating point:
    /// `lambda_opt = omega_rated R / v_rated` and
    /// `cp_max = P_rated / (0.5 rho pi R^2 v_rated^3)`.
    pub fn calibrate(&mut self) {
        self.lambda_opt = self.omega_rated * self.rotor_radius / self.v_rated;
        self.cp_max = self.p_rated / (self.half_rho_area() * (self.v_rated * self.v_rated * self.v_rated));
    }

    pub fn rated_torque(&self) -> f64 {
        self.p_rated / self.omega_rated
    }

    /// `k_opt = 0.5 rho pi R^2 cp_max (R / lambda_opt)^3`.
    pub fn k_opt(&self) -> f64 {
        self.half_rho_area() * self.cp_max * {
            let r = self.rotor_radius / self.lambda_opt;
            r * r * r
        }
    }

    pub fn tip_speed_ratio(&self, v_w: f64, omega_r: f64) -> f64 {
        if v_w <= 0.0 {
            return f64::INFINITY;
        }
        omega_r * self.rotor_radius / v_w
    }

    pub fn validate(&self, errors: &mut alloc::vec::Vec<alloc::string::String>) {
        use alloc::format;
        let positive = [
            ("rho", self.rho),
            ("rotor_radius", self.rotor_radius),
            ("lambda_opt", self.lambda_opt),
            ("v_cin", self.v_cin),
            ("p_rated", self.p_rated),
            ("j_total", self.j_total),
            ("omega_rated", self.omega_rated),
        ];
        for (name, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                errors.push(format!("aero.{name} must be positive (got {v})"));
            }
        }
        if !(self.cp_max > 0.0 && self.cp_max < BETZ_LIMIT) {
            errors.push(format!("aero.cp_max must lie in (0, {BETZ_LIMIT:.3}) (got {})", self.cp_max));
        }
        if !(self.v_cin < self.v_rated && self.v_rated < self.v_cout) {
            errors.push(format!(
                "aero wind speeds must satisfy v_cin < v_rated < v_cout (got {}, {}, {})",
                self.v_cin, self.v_rated, self.v_cout
            ));
        }
    }
}

/// Coefficients of the exponential power-coefficient form
/// `c1 (c2/li - c3 beta - c4) e^{-c5/li} + c6 lambda`.
const CP_COEFFS: [f64; 6] = [0.5176, 116.0, 0.4, 5.0, 21.0, 0.0068];

fn cp_reference(lambda: f64, beta: f64) -> f64 {
    let [c1, c2, c3, c4, c5, c6] = CP_COEFFS;
    let inv_li = 1.0 / (lambda + 0.08 * beta) - 0.035 / (beta * beta * beta + 1.0);
    if inv_li <= 0.0 {
        return 0.0;
    }
    c1 * (c2 * inv_li - c3 * beta - c4) * exp(-c5 * inv_li) + c6 * lambda
}

/// Power-coefficient surface `Cp(lambda, beta)`, the reference exponential
/// curve rescaled so its `beta = 0` peak lands on `(lambda_opt, cp_max)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CpCurve {
    cp_max: f64,
    lambda_opt: f64,
    lambda_scale: f64,
    cp_scale: f64,
}

impl CpCurve {
    pub fn new(cp_max: f64, lambda_opt: f64) -> Self {
        let (peak_lambda, peak_cp) = reference_peak();
        Self {
            cp_max,
            lambda_opt,
            lambda_scale: peak_lambda / lambda_opt,
            cp_scale: cp_max / peak_cp,
        }
    }

    pub fn from_params(p: &AeroParams) -> Self {
        Self::new(p.cp_max, p.lambda_opt)
    }

    pub fn cp_max(&self) -> f64 {
        self.cp_max
    }

    pub fn lambda_opt(&self) -> f64 {
        self.lambda_opt
    }

    /// Power coefficient at tip-speed ratio `lambda` and pitch `beta` (deg),
    /// clamped to `[0, cp_max]`.
    pub fn cp(&self, lambda: f64, beta: f64) -> f64 {
        if !(lambda > 0.0) || !lambda.is_finite() {
            return 0.0;
        }
        let beta = beta.max(0.0);
        let raw = self.cp_scale * cp_reference(lambda * self.lambda_scale, beta);
        raw.clamp(0.0, self.cp_max)
    }
}

/// Golden-section search for the `beta = 0` maximum of the reference curve.
fn reference_peak() -> (f64, f64) {
    let g = 0.5 * (libm::sqrt(5.0) - 1.0);
    let (mut a, mut b) = (2.0, 20.0);
    let mut x1 = b - g * (b - a);
    let mut x2 = a + g * (b - a);
    let mut f1 = cp_reference(x1, 0.0);
    let mut f2 = cp_reference(x2, 0.0);
    while b - a > 1e-12 {
        if f1 < f2 {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + g * (b - a);
            f2 = cp_reference(x2, 0.0);
        } else {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - g * (b - a);
            f1 = cp_reference(x1, 0.0);
        }
    }
    let x = 0.5 * (a + b);
    (x, cp_reference(x, 0.0))
}

/// Turbine operating region, selected from wind speed.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum OperatingRegion {
    /// Below cut-in: blades partially feathered from the lookup table.
    BelowCutIn,
    /// Optimal-torque tracking between cut-in and rated wind.
    Mppt,
    /// Above rated wind: speed held at 1 pu by torque and pitch.
    Rated,
    /// Above cut-out: turbine shut down.
    Shutdown,
}

impl OperatingRegion {
    pub fn from_wind(v_w: f64, p: &AeroParams) -> Self {
        if v_w < p.v_cin {
            Self::BelowCutIn
        } else if v_w <= p.v_rated {
            Self::Mppt
        } else if v_w <= p.v_cout {
            Self::Rated
        } else {
            Self::Shutdown
        }
    }

    pub fn number(self) -> f64 {
        match self {
            Self::BelowCutIn => 1.5,
            Self::Mppt => 2.0,
            Self::Rated => 3.0,
            Self::Shutdown => 4.0,
        }
    }
}

/// Captured aerodynamic power (W). Zero outside `[v_cin, v_cout]`.
pub fn aero_power(p: &AeroParams, curve: &CpCurve, v_w: f64, omega_r: f64, beta: f64) -> f64 {
    if !(v_w >= p.v_cin && v_w <= p.v_cout) {
        return 0.0;
    }
    let omega = omega_r.max(OMEGA_FLOOR);
    let lambda = omega * p.rotor_radius / v_w;
    p.half_rho_area() * curve.cp(lambda, beta) * v_w * v_w * v_w
}

/// Aerodynamic shaft torque (N m).
pub fn aero_torque(p: &AeroParams, curve: &CpCurve, v_w: f64, omega_r: f64, beta: f64) -> f64 {
    aero_power(p, curve, v_w, omega_r, beta) / omega_r.max(OMEGA_FLOOR)
}

/// Optimal-torque law `k_opt omega_r^2`.
pub fn optimal_torque(p: &AeroParams, omega_r: f64) -> f64 {
    p.k_opt() * omega_r * omega_r
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct RotorState {
    /// Mechanical speed (rad/s).
    pub omega_r: f64,
}

impl RotorState {
    pub fn omega_pu(&self, p: &AeroParams) -> f64 {
        self.omega_r / p.omega_rated
    }
}

/// `J d(omega)/dt = T_aero - T_gen`.
pub fn rotor_derivative(j_total: f64, t_aero: f64, t_gen: f64) -> f64 {
    (t_aero - t_gen) / j_total
}

/// Integrates the swing equation over `dt` with both torques held.
pub fn step_rotor(state: RotorState, j_total: f64, t_aero: f64, t_gen: f64, dt: f64) -> RotorState {
    let x = integrate_step(&[state.omega_r], 0.0, dt, |_, _| [rotor_derivative(j_total, t_aero, t_gen)])
        .map(|x| x[0])
        .unwrap_or(f64::NAN);
    RotorState { omega_r: x.max(0.0) }
}

/// Equilibrium rotor speed of the optimal-torque loop at fixed pitch, found
/// by bisection of `T_aero(omega) = k_opt omega^2` around the optimum.
pub fn mppt_equilibrium(p: &AeroParams, curve: &CpCurve, v_w: f64, beta: f64) -> Option<f64> {
    let centre = p.lambda_opt * v_w / p.rotor_radius;
    bisect(0.5 * centre, 1.6 * centre, |w| {
        aero_torque(p, curve, v_w, w, beta) - optimal_torque(p, w)
    })
}

/// Pitch angle (deg) at which the aerodynamic torque equals `torque` at
/// speed `omega_r`, searched on `[0, beta_max]`.
pub fn pitch_for_torque(
    p: &AeroParams,
    curve: &CpCurve,
    v_w: f64,
    omega_r: f64,
    torque: f64,
    beta_max: f64,
) -> Option<f64> {
    bisect(0.0, beta_max, |b| aero_torque(p, curve, v_w, omega_r, b) - torque)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn setup() -> (AeroParams, CpCurve) {
        let p = AeroParams::default();
        let c = CpCurve::from_params(&p);
        (p, c)
    }

    #[test]
    fn calibration_values() {
        let (p, _) = setup();
        // 0.8 * 118 / 12
        assert!((p.lambda_opt - 7.866_666_666_666_667).abs() < 1e-12);
        // 15e6 / (0.5 * 1.225 * pi * 118^2 * 12^3)
        let area = 0.5 * 1.225 * core::f64::consts::PI * 118.0 * 118.0;
        assert!((p.cp_max - 15e6 / (area * 1728.0)).abs() < 1e-15);
        assert!(p.cp_max > 0.32 && p.cp_max < 0.33);
        // rated power reachable at rated wind
        assert!(p.half_rho_area() * p.cp_max * p.v_rated.powi(3) >= p.p_rated * (1.0 - 1e-12));
    }

    #[test]
    fn cp_peak_sits_at_calibration_point() {
        let (p, c) = setup();
        assert!((c.cp(p.lambda_opt, 0.0) - p.cp_max).abs() < 1e-12);
        for k in 1..200 {
            let l = 0.1 * k as f64;
            assert!(c.cp(l, 0.0) <= p.cp_max + 1e-15);
        }
    }

    #[test]
    fn cp_feathered_and_stall_limits() {
        let (p, c) = setup();
        assert!(c.cp(p.lambda_opt, 25.0) < 0.1 * p.cp_max);
        assert!(c.cp(1e-6, 0.0) < 1e-6);
        assert!(c.cp(1e-9, 0.0) < c.cp(1e-6, 0.0));
        assert_eq!(c.cp(0.0, 0.0), 0.0);
    }

    #[test]
    fn cp_decreases_with_pitch_near_optimum() {
        let (p, c) = setup();
        // above the optimum a little pitch can raise Cp; the property holds at
        // and below it
        for &l in &[0.9 * p.lambda_opt, 0.95 * p.lambda_opt, p.lambda_opt] {
            let mut prev = c.cp(l, 0.0);
            for k in 1..=250 {
                let b = 0.1 * k as f64;
                let cur = c.cp(l, b);
                assert!(cur <= prev + 1e-15, "lambda {l} beta {b}: {cur} > {prev}");
                prev = cur;
            }
        }
    }

    #[test]
    fn zero_wind_zero_torque() {
        let (p, c) = setup();
        assert_eq!(aero_torque(&p, &c, 0.0, 0.8, 0.0), 0.0);
        assert_eq!(aero_torque(&p, &c, 30.0, 0.8, 0.0), 0.0);
    }

    #[test]
    fn rated_operating_point() {
        let (p, c) = setup();
        let w = p.lambda_opt * 12.0 / p.rotor_radius;
        assert!((w - 0.8).abs() < 1e-12);
        let t = aero_torque(&p, &c, 12.0, w, 0.0);
        assert!((t * w - 15e6).abs() < 1e-3);
    }

    #[test]
    fn cubic_wind_law_at_fixed_tip_speed_ratio() {
        let (p, c) = setup();
        let p12 = aero_power(&p, &c, 12.0, p.lambda_opt * 12.0 / p.rotor_radius, 0.0);
        let p8 = aero_power(&p, &c, 8.0, p.lambda_opt * 8.0 / p.rotor_radius, 0.0);
        assert!((p8 / p12 - (8.0f64 / 12.0).powi(3)).abs() < 1e-12);
    }

    #[test]
    fn startup_torque_is_finite() {
        let (p, c) = setup();
        let t = aero_torque(&p, &c, 6.0, 0.0, 0.0);
        assert!(t.is_finite() && t >= 0.0);
    }

    #[test]
    fn optimal_torque_law() {
        let (p, _) = setup();
        assert_eq!(optimal_torque(&p, 0.0), 0.0);
        let k = p.k_opt();
        assert!((optimal_torque(&p, 0.8) - k * 0.64).abs() < 1e-6);
        // direct arithmetic on the defaults
        let k_direct = 0.5 * 1.225 * core::f64::consts::PI * 118.0f64.powi(2) * p.cp_max
            * (118.0 / p.lambda_opt).powi(3);
        assert!((k - k_direct).abs() / k_direct < 1e-14);
        assert!((k * 0.8f64.powi(3) - 15e6).abs() < 1e-3);
        assert!((optimal_torque(&p, 1.0) / optimal_torque(&p, 0.5) - 4.0).abs() < 1e-12);
    }

    #[test]
    fn betz_bound_holds() {
        let (p, c) = setup();
        for v in [3.0, 6.0, 11.0, 15.0, 24.0] {
            for k in 0..50 {
                let w = 0.05 * k as f64;
                let pa = aero_power(&p, &c, v, w, 0.0);
                assert!(pa <= BETZ_LIMIT * p.half_rho_area() * v * v * v);
            }
        }
    }

    #[test]
    fn rotor_equilibrium_and_ramp() {
        let s = RotorState { omega_r: 0.7 };
        assert_eq!(step_rotor(s, 3.16e8, 5e6, 5e6, 1e-3), s);
        // 1e6 N m net for 3.16 s on 3.16e8 kg m^2 -> 0.01 rad/s
        let mut s = RotorState { omega_r: 0.5 };
        let dt = 1e-3;
        for _ in 0..3160 {
            s = step_rotor(s, 3.16e8, 2e6, 1e6, dt);
        }
        assert!((s.omega_r - 0.51).abs() < 1e-9);
        let stopped = step_rotor(RotorState { omega_r: 1e-6 }, 1.0, 0.0, 1e3, 1.0);
        assert_eq!(stopped.omega_r, 0.0);
    }

    #[test]
    fn mppt_loop_converges_to_optimal_tip_speed_ratio() {
        let (p, c) = setup();
        for v in [6.0, 8.0, 11.0] {
            // start 15 % off the optimum and let the ideal torque loop settle
            let mut s = RotorState { omega_r: 0.85 * p.lambda_opt * v / p.rotor_radius };
            let dt = 0.01;
            for _ in 0..60_000 {
                let ta = aero_torque(&p, &c, v, s.omega_r, 0.0);
                s = step_rotor(s, p.j_total, ta, optimal_torque(&p, s.omega_r), dt);
            }
            let tsr = p.tip_speed_ratio(v, s.omega_r);
            assert!((tsr / p.lambda_opt - 1.0).abs() < 0.02, "v {v}: tsr {tsr}");
            let eq = mppt_equilibrium(&p, &c, v, 0.0).unwrap();
            assert!((eq * p.rotor_radius / v / p.lambda_opt - 1.0).abs() < 1e-6);
        }
    }

    #[test]
    fn regions_from_wind() {
        let p = AeroParams::default();
        assert_eq!(OperatingRegion::from_wind(2.0, &p), OperatingRegion::BelowCutIn);
        assert_eq!(OperatingRegion::from_wind(8.0, &p), OperatingRegion::Mppt);
        assert_eq!(OperatingRegion::from_wind(12.0, &p), OperatingRegion::Mppt);
        assert_eq!(OperatingRegion::from_wind(15.0, &p), OperatingRegion::Rated);
        assert_eq!(OperatingRegion::from_wind(26.0, &p), OperatingRegion::Shutdown);
    }
}
