//! Grid-side converter control: SOGI-PLL and sequence extraction, DC-link
//! voltage regulation, LVRT current injection, sequence current references
//! with double-frequency active-power cancellation, current limiting, filter
//! compensation and dual-frame current control.

mod current_control;
mod dc_voltage;
mod lvrt;
mod pll;
mod references;

pub use current_control::{sequence_current_control, CurrentControlParams, CurrentControlState, VoltageCommand};
pub use dc_voltage::{dc_voltage_control, DcVoltageParams, DcVoltageState};
pub use lvrt::{lvrt_command, lvrt_injection, lvrt_measure, LvrtCommand, LvrtParams, LvrtState};
pub use pll::{sogi_pll_step, PllOutput, PllParams, PllState, SogiBank};
pub use references::{
    current_compensator, positive_only, power_matrix, reactive_priority, sequence_current_limit,
    sequence_current_references, CurrentReferences, SequenceSolution, FALLBACK_VOLTAGE_FLOOR,
    SINGULAR_THRESHOLD,
};

use serde::{Deserialize, Serialize};

use num_complex::Complex64;

use crate::framework::{clarke, SequenceDq, ThreePhaseSample};

/// Which grid-side reference strategy runs.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ControlVariant {
    /// Negative-sequence currents chosen to cancel double-frequency active
    /// power.
    #[default]
    Sequence,
    /// Balanced output currents: negative-sequence references held at zero.
    PositiveOnly,
}

impl ControlVariant {
    pub fn name(self) -> &'static str {
        match self {
            ControlVariant::Sequence => "sequence",
            ControlVariant::PositiveOnly => "positive-only",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GscParams {
    pub pll: PllParams,
    pub dc_voltage: DcVoltageParams,
    pub lvrt: LvrtParams,
    pub current_control: CurrentControlParams,
    /// Converter current limit (pu, per-phase).
    pub current_limit: f64,
}

impl Default for GscParams {
    fn default() -> Self {
        Self {
            pll: PllParams::default(),
            dc_voltage: DcVoltageParams::default(),
            lvrt: LvrtParams::default(),
            current_control: CurrentControlParams::default(),
            current_limit: 1.1,
        }
    }
}

impl GscParams {
    pub fn validate(&self, errors: &mut alloc::vec::Vec<alloc::string::String>) {
        self.pll.validate(errors);
        self.dc_voltage.validate(errors);
        self.lvrt.validate(errors);
        self.current_control.validate(errors);
        if !(self.current_limit > 0.0) {
            errors.push(alloc::format!("gsc.current_limit must be positive"));
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GscState {
    pub pll: PllState,
    /// Extractor for the filter-inductor current.
    pub current_sogi: SogiBank,
    pub dc: DcVoltageState,
    pub lvrt: LvrtState,
    pub current: CurrentControlState,
}

/// Fixed electrical quantities the controller needs, per unit.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GscPlant {
    pub omega0: f64,
    /// Filter reactance at nominal frequency.
    pub x_f: f64,
    /// Filter capacitor susceptance at nominal frequency.
    pub b_c: f64,
    /// Damping resistance in series with the filter capacitor.
    pub r_d: f64,
    /// Converter phase-peak voltage available per pu of DC voltage.
    pub v_max_per_vdc: f64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GscInputs {
    pub v_terminal: ThreePhaseSample,
    pub i_filter: ThreePhaseSample,
    /// DC voltage (pu).
    pub v_dc: f64,
    pub v_dc_ref: f64,
    /// Reactive power setpoint outside dips (pu).
    pub q_ref: f64,
    pub variant: ControlVariant,
}

/// Everything the controller decided this step.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GscOutput {
    pub command: VoltageCommand,
    pub theta: f64,
    pub omega: f64,
    pub v_seq: SequenceDq,
    pub i_seq: SequenceDq,
    pub refs: CurrentReferences,
    /// Active power reference from the DC regulator (pu).
    pub p_ref: f64,
    /// Power targets handed to the reference solver (pu).
    pub p_target: f64,
    pub q_target: f64,
    pub v_dip: bool,
    pub fallback: bool,
}

/// One grid-side control step.
pub fn gsc_step(p: &GscParams, plant: &GscPlant, state: &mut GscState, inputs: &GscInputs, dt: f64) -> GscOutput {
    let pll = sogi_pll_step(&p.pll, &mut state.pll, inputs.v_terminal, plant.omega0, dt);
    let w = pll.omega.clamp(
        (1.0 - p.pll.omega_band) * plant.omega0,
        (1.0 + p.pll.omega_band) * plant.omega0,
    );
    state.current_sogi.step(inputs.i_filter, plant.omega0, p.pll.sogi_gain, dt);
    let i_seq = state.current_sogi.sequences(pll.theta);
    let v_seq = pll.v_seq;
    let v_t = v_seq.pos().magnitude();

    lvrt_measure(&p.lvrt, &mut state.lvrt, v_t, dt);
    let v_cmd = state.lvrt.v_filt.max(p.lvrt.voltage_floor);
    // active current left once the reactive command has taken its share
    let limits = lvrt_command(&p.lvrt, &state.lvrt, 0.0);
    let ip_room = if p.lvrt.reactive_priority {
        let left = (p.current_limit * p.current_limit - limits.iq * limits.iq).max(0.0);
        crate::math::sqrt(left).min(limits.ip_max)
    } else {
        limits.ip_max
    };
    let p_ref = dc_voltage_control(&p.dc_voltage, &mut state.dc, inputs.v_dc, inputs.v_dc_ref, ip_room * v_cmd, dt);
    let cmd = lvrt_command(&p.lvrt, &state.lvrt, p_ref);
    let v_eff = v_t.max(p.lvrt.voltage_floor);
    let (p_target, q_target) = if state.lvrt.v_dip {
        (cmd.ip * v_cmd, cmd.iq * v_eff)
    } else {
        (p_ref, inputs.q_ref)
    };

    let k = crate::framework::PEAK_POWER_FACTOR;
    let solve = |pp: f64, qq: f64| match inputs.variant {
        ControlVariant::Sequence => sequence_current_references(k * pp, k * qq, &v_seq),
        ControlVariant::PositiveOnly => SequenceSolution {
            currents: positive_only(k * pp, k * qq, v_seq.pos()),
            fallback: false,
        },
    };
    let (pre, fallback) = if state.lvrt.v_dip && p.lvrt.reactive_priority {
        let q_part = solve(0.0, q_target);
        let p_part = solve(p_target, 0.0);
        (
            reactive_priority(&q_part.currents, &p_part.currents, p.current_limit),
            q_part.fallback || p_part.fallback,
        )
    } else {
        let s = solve(p_target, q_target);
        (s.currents, s.fallback)
    };
    let refs = sequence_current_limit(&pre, p.current_limit);
    let b_c = plant.b_c * w / plant.omega0;
    let y_c = Complex64::new(1.0, 0.0) / Complex64::new(plant.r_d, -1.0 / b_c);
    let i_filter_ref = current_compensator(&refs.post_limit, &v_seq, y_c);
    // the instantaneous terminal voltage, all of it carried in the positive
    // frame, so the converter follows fast voltage changes without waiting
    // for the extractor
    let v_ff = {
        let z = clarke(inputs.v_terminal).to_complex() * Complex64::from_polar(1.0, -pll.theta);
        SequenceDq::new(z.re, z.im, 0.0, 0.0)
    };
    let command = sequence_current_control(
        &p.current_control,
        &mut state.current,
        &i_filter_ref,
        &i_seq,
        &v_ff,
        plant.x_f,
        plant.omega0,
        plant.v_max_per_vdc * inputs.v_dc.max(0.0),
        dt,
    );
    GscOutput {
        command,
        theta: pll.theta,
        omega: pll.omega,
        v_seq,
        i_seq,
        refs,
        p_ref,
        p_target,
        q_target,
        v_dip: state.lvrt.v_dip,
        fallback,
    }
}
