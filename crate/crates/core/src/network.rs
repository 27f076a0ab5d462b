//! Grid-side electrical network: LC output filter, step-up transformer and
//! source impedance, and the controlled source that plays voltage dips and
//! faults.
//!
//! Everything here is per unit on the converter-side base, in stationary
//! alpha-beta axes. The delta/wye transformer blocks zero-sequence current,
//! so the converter side carries no zero-sequence component. Grid quantities
//! are referred to the low-voltage side with the vector-group phase shift
//! omitted.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::framework::{clarke, integrate_step, AlphaBeta, NonFiniteDerivative, PerUnitBase, ThreePhaseSample};
use crate::math::interp;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TransformerParams {
    /// Rating (VA).
    pub s_rated: f64,
    /// Low-voltage winding, line RMS (V).
    pub v_lv: f64,
    /// High-voltage winding, line RMS (V).
    pub v_hv: f64,
    /// Leakage reactance (pu on own rating).
    pub x_pu: f64,
    /// Winding resistance (pu on own rating).
    pub r_pu: f64,
}

impl Default for TransformerParams {
    fn default() -> Self {
        Self {
            s_rated: 18e6,
            v_lv: 4e3,
            v_hv: 66e3,
            x_pu: 0.1,
            r_pu: 0.005,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NetworkParams {
    /// Filter inductance (H).
    pub filter_l: f64,
    /// Filter inductor resistance (ohm).
    pub filter_r: f64,
    /// Filter capacitance per phase (F).
    pub filter_c: f64,
    /// Damping resistance in series with the filter capacitor (ohm).
    pub damping_r: f64,
    pub transformer: TransformerParams,
    /// Source reactance (pu on the transformer rating).
    pub source_x_pu: f64,
    /// Source resistance (pu on the transformer rating).
    pub source_r_pu: f64,
}

impl Default for NetworkParams {
    fn default() -> Self {
        Self {
            filter_l: 0.275e-3,
            filter_r: 0.0,
            filter_c: 1024e-6,
            damping_r: 0.08,
            transformer: TransformerParams::default(),
            source_x_pu: 0.05,
            source_r_pu: 0.005,
        }
    }
}

impl NetworkParams {
    pub fn validate(&self, errors: &mut Vec<String>) {
        for (name, v) in [
            ("filter_l", self.filter_l),
            ("filter_c", self.filter_c),
            ("transformer.s_rated", self.transformer.s_rated),
            ("transformer.v_lv", self.transformer.v_lv),
            ("transformer.v_hv", self.transformer.v_hv),
            ("transformer.x_pu", self.transformer.x_pu),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                errors.push(format!("network.{name} must be positive, got {v}"));
            }
        }
        for (name, v) in [
            ("filter_r", self.filter_r),
            ("damping_r", self.damping_r),
            ("transformer.r_pu", self.transformer.r_pu),
            ("source_x_pu", self.source_x_pu),
            ("source_r_pu", self.source_r_pu),
        ] {
            if !(v >= 0.0 && v.is_finite()) {
                errors.push(format!("network.{name} must be non-negative, got {v}"));
            }
        }
    }

    /// Element values in per unit on `base` (the converter-side section).
    pub fn per_unit(&self, base: &PerUnitBase) -> NetworkPu {
        let z = base.z_base();
        let s_t = self.transformer.s_rated;
        NetworkPu {
            omega0: base.omega0(),
            l_f: self.filter_l / base.l_base(),
            r_f: self.filter_r / z,
            c_f: self.filter_c / base.c_base(),
            r_d: self.damping_r / z,
            l_t: base.impedance_from(self.transformer.x_pu, s_t),
            r_t: base.impedance_from(self.transformer.r_pu, s_t),
            l_s: base.impedance_from(self.source_x_pu, s_t),
            r_s: base.impedance_from(self.source_r_pu, s_t),
        }
    }
}

/// Network elements in per unit: reactances and susceptances at nominal
/// frequency, resistances, and `omega0` to turn them into time constants.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NetworkPu {
    pub omega0: f64,
    pub l_f: f64,
    pub r_f: f64,
    pub c_f: f64,
    pub r_d: f64,
    pub l_t: f64,
    pub r_t: f64,
    pub l_s: f64,
    pub r_s: f64,
}

impl NetworkPu {
    /// Series branch between the filter node and the source EMF.
    pub fn grid_branch(&self, include_source: bool) -> (f64, f64) {
        if include_source {
            (self.l_t + self.l_s, self.r_t + self.r_s)
        } else {
            (self.l_t, self.r_t)
        }
    }
}

/// Inductor currents and capacitor voltage, per unit, alpha-beta.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct NetworkState {
    /// Filter inductor current, converter to filter node.
    pub i_g: AlphaBeta,
    /// Voltage across the filter capacitance (excluding its damping resistor).
    pub v_cap: AlphaBeta,
    /// Current from the filter node into the transformer.
    pub i_go: AlphaBeta,
}

impl NetworkState {
    pub fn as_array(&self) -> [f64; 6] {
        [
            self.i_g.alpha,
            self.i_g.beta,
            self.v_cap.alpha,
            self.v_cap.beta,
            self.i_go.alpha,
            self.i_go.beta,
        ]
    }

    pub fn from_array(x: &[f64]) -> Self {
        Self {
            i_g: AlphaBeta::new(x[0], x[1]),
            v_cap: AlphaBeta::new(x[2], x[3]),
            i_go: AlphaBeta::new(x[4], x[5]),
        }
    }

    /// Filter-node (converter terminal) voltage.
    pub fn terminal_voltage(&self, n: &NetworkPu) -> AlphaBeta {
        self.v_cap + (self.i_g - self.i_go) * n.r_d
    }

    /// Magnetic plus electric stored energy in per-unit seconds.
    pub fn stored_energy(&self, n: &NetworkPu, include_source: bool) -> f64 {
        let (l_g, _) = n.grid_branch(include_source);
        0.5 / n.omega0
            * (n.l_f * self.i_g.dot(self.i_g) + n.c_f * self.v_cap.dot(self.v_cap) + l_g * self.i_go.dot(self.i_go))
    }
}

/// State derivatives for converter voltage `v_conv` and source EMF `v_src`.
pub fn network_derivative(
    n: &NetworkPu,
    x: &NetworkState,
    v_conv: AlphaBeta,
    v_src: AlphaBeta,
    include_source: bool,
) -> [f64; 6] {
    let (l_g, r_g) = n.grid_branch(include_source);
    let w = n.omega0;
    let v_t = x.terminal_voltage(n);
    let di_g = (v_conv - v_t - x.i_g * n.r_f) * (w / n.l_f);
    let dv = (x.i_g - x.i_go) * (w / n.c_f);
    let di_go = (v_t - x.i_go * r_g - v_src) * (w / l_g);
    [di_g.alpha, di_g.beta, dv.alpha, dv.beta, di_go.alpha, di_go.beta]
}

/// Advances the network one step with the converter voltage supplied as a
/// function of time inside the step.
pub fn step_network(
    n: &NetworkPu,
    state: NetworkState,
    mut v_conv: impl FnMut(f64) -> AlphaBeta,
    mut v_src: impl FnMut(f64) -> AlphaBeta,
    include_source: bool,
    t: f64,
    dt: f64,
) -> Result<NetworkState, NonFiniteDerivative> {
    let x = integrate_step(&state.as_array(), t, dt, |tau, x| {
        network_derivative(n, &NetworkState::from_array(x), v_conv(tau), v_src(tau), include_source)
    })?;
    Ok(NetworkState::from_array(&x))
}

/// Active and reactive power `v i*` in per unit.
pub fn power(v: AlphaBeta, i: AlphaBeta) -> (f64, f64) {
    (v.dot(i), v.cross(i))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Phase {
    A,
    B,
    C,
}

impl Phase {
    pub fn index(self) -> usize {
        match self {
            Phase::A => 0,
            Phase::B => 1,
            Phase::C => 2,
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FaultLocation {
    /// The retained voltage is behind the source impedance.
    #[default]
    Source,
    /// The retained voltage is imposed at the transformer high-voltage
    /// terminal: the source impedance is bypassed while the event is active.
    TransformerHighSide,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum FaultKind {
    /// All three phases scaled to `retained` (0 = bolted).
    ThreePhase {
        #[serde(default)]
        retained: f64,
    },
    /// One phase scaled to `retained`.
    SingleLineToGround {
        phase: Phase,
        #[serde(default)]
        retained: f64,
    },
    /// Balanced retained voltage interpolated from `(time since start,
    /// retained pu)` points.
    DipProfile { points: Vec<(f64, f64)> },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FaultSpec {
    #[serde(flatten)]
    pub kind: FaultKind,
    #[serde(default)]
    pub location: FaultLocation,
    /// Start time (s).
    pub t_start: f64,
    /// Duration (s).
    pub duration: f64,
}

impl FaultSpec {
    pub fn active(&self, t: f64) -> bool {
        t >= self.t_start && t < self.t_start + self.duration
    }

    pub fn end(&self) -> f64 {
        self.t_start + self.duration
    }

    /// Per-phase retained EMF factors while active.
    pub fn factors(&self, t: f64) -> [f64; 3] {
        match &self.kind {
            FaultKind::ThreePhase { retained } => [*retained; 3],
            FaultKind::SingleLineToGround { phase, retained } => {
                let mut k = [1.0; 3];
                k[phase.index()] = *retained;
                k
            }
            FaultKind::DipProfile { points } => [interp(points, t - self.t_start); 3],
        }
    }
}

/// Checks every event and rejects overlaps, collecting all violations.
pub fn validate_events(events: &[FaultSpec], duration: f64, errors: &mut Vec<String>) {
    for (n, e) in events.iter().enumerate() {
        if !(e.t_start >= 0.0 && e.t_start.is_finite()) {
            errors.push(format!("events[{n}].t_start must be >= 0"));
        }
        if !(e.duration > 0.0 && e.duration.is_finite()) {
            errors.push(format!("events[{n}].duration must be positive"));
        }
        if e.t_start > duration {
            errors.push(format!("events[{n}] starts after the end of the run"));
        }
        let retained = match &e.kind {
            FaultKind::ThreePhase { retained } | FaultKind::SingleLineToGround { retained, .. } => {
                alloc::vec![*retained]
            }
            FaultKind::DipProfile { points } => {
                if points.is_empty() {
                    errors.push(format!("events[{n}].points must not be empty"));
                }
                if points.windows(2).any(|w| w[1].0 < w[0].0) {
                    errors.push(format!("events[{n}].points must be sorted by time"));
                }
                points.iter().map(|p| p.1).collect()
            }
        };
        if retained.iter().any(|r| !(*r >= 0.0 && r.is_finite())) {
            errors.push(format!("events[{n}] retained voltage must be finite and >= 0"));
        }
    }
    for i in 0..events.len() {
        for j in i + 1..events.len() {
            let (a, b) = (&events[i], &events[j]);
            if a.t_start < b.end() && b.t_start < a.end() {
                errors.push(format!("events[{i}] and events[{j}] overlap"));
            }
        }
    }
}

/// Grid source EMF and whether its impedance is in circuit.
#[derive(Clone, Debug, PartialEq)]
pub struct GridSource {
    pub omega0: f64,
    /// Phase of phase `a` at `t = 0` (rad).
    pub phase0: f64,
    /// Pre-event magnitude (pu).
    pub magnitude: f64,
    pub events: Vec<FaultSpec>,
}

impl GridSource {
    pub fn active_event(&self, t: f64) -> Option<&FaultSpec> {
        self.events.iter().find(|e| e.active(t))
    }

    pub fn factors(&self, t: f64) -> [f64; 3] {
        self.active_event(t).map_or([1.0; 3], |e| e.factors(t))
    }

    pub fn include_source_impedance(&self, t: f64) -> bool {
        !matches!(
            self.active_event(t).map(|e| e.location),
            Some(FaultLocation::TransformerHighSide)
        )
    }

    /// Instantaneous per-phase source EMF.
    pub fn source_voltage(&self, t: f64) -> ThreePhaseSample {
        let k = self.factors(t);
        let bal = ThreePhaseSample::balanced(self.magnitude, self.omega0 * t + self.phase0);
        ThreePhaseSample::new(bal.a * k[0], bal.b * k[1], bal.c * k[2])
    }

    /// Source EMF in alpha-beta (zero sequence removed by the transformer).
    pub fn source_alpha_beta(&self, t: f64) -> AlphaBeta {
        clarke(self.source_voltage(t))
    }

    /// Positive- and negative-sequence EMF phasors for the factors at `t`,
    /// referenced to phase `a`'s angle at time zero.
    pub fn sequence_phasors(&self, t: f64) -> (Complex64, Complex64) {
        let k = self.factors(t);
        let e = Complex64::from_polar(self.magnitude, self.phase0);
        let a = crate::framework::PHASE_OP;
        let a2 = crate::framework::PHASE_OP_SQ;
        let ph = [e * k[0], e * a2 * k[1], e * a * k[2]];
        let s = crate::framework::fortescue_phasors(ph);
        (s.positive, s.negative)
    }
}
