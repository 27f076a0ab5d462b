//! The fixed-step simulation loop.
//!
//! Every plant step integrates rotor speed, stator currents, DC-link voltage,
//! the grid-side network and three energy accumulators together with one RK4
//! step, holding the converter voltage commands (the grid-side command keeps
//! rotating with the PLL frequency inside the step). Controllers run every
//! `control_decimation` plant steps on measurements taken at the start of the
//! step. The pitch servo advances once per plant step.

mod init;

pub use init::{initial_state, mechanical_point, network_point, MechanicalPoint, NetworkPoint};

use alloc::boxed::Box;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::aero::{aero_power, aero_torque, optimal_torque, CpCurve, OperatingRegion, RotorState};
use crate::dc_link::{chopper_logic, DcLinkState};
use crate::framework::{inverse_clarke, integrate_step, AlphaBeta, Dq, NonFiniteDerivative, SequenceDq};
use crate::grid_side::{gsc_step, GscInputs, GscOutput, GscPlant, GscState};
use crate::log::TimeSeriesLog;
use crate::machine::{
    current_reference, electrical_torque, msc_current_control, pmsg_derivative, stator_power, torque_control,
    MscState, PmsgState, TorqueInputs,
};
use crate::math::SQRT_3;
use crate::network::{network_derivative, power, GridSource, NetworkPu, NetworkState};
use crate::pitch::{pitch_reference, step_actuator, PitchInputs, PitchState};
use crate::scenario::Scenario;

/// Energy that crossed each DC-link port since `t = 0` (J).
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct EnergyLedger {
    /// Into the link from the machine-side converter.
    pub msc: f64,
    /// Out of the link into the grid-side converter.
    pub gsc: f64,
    /// Dissipated in the chopper.
    pub chop: f64,
}

/// Controller outputs held between control updates.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct HeldCommands {
    /// Stator voltage command (V, rotor dq frame).
    pub v_msc: Dq,
    /// Grid-side converter voltage command (pu, sequence frames).
    pub v_gsc: SequenceDq,
    /// Frame angle at the last control update (rad).
    pub theta: f64,
    /// PLL frequency at the last control update (rad/s).
    pub omega: f64,
    pub t_control: f64,
    /// Pitch command (deg).
    pub beta_ref: f64,
}

/// Complete simulator state.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimState {
    pub t: f64,
    pub step: u64,
    pub rotor: RotorState,
    pub pitch: PitchState,
    pub pmsg: PmsgState,
    pub msc: MscState,
    pub dc: DcLinkState,
    pub network: NetworkState,
    pub gsc: GscState,
    pub energy: EnergyLedger,
    pub held: HeldCommands,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum FaultReason {
    /// A state derivative became NaN or infinite.
    NonFinite { index: usize, stage: u8 },
    /// The DC-link voltage fell to zero or below.
    DcCollapse { v_dc: f64 },
}

/// A simulation that could not continue, with the last good state.
#[derive(Clone, Debug, PartialEq)]
pub struct SimFault {
    pub time: f64,
    pub reason: FaultReason,
    pub snapshot: Box<SimState>,
}

impl core::fmt::Display for SimFault {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self.reason {
            FaultReason::NonFinite { index, stage } => write!(
                f,
                "non-finite derivative at t = {} s (state {}, RK stage {})",
                self.time,
                PLANT_STATE_NAMES.get(index).copied().unwrap_or("?"),
                stage
            ),
            FaultReason::DcCollapse { v_dc } => write!(f, "DC link collapsed at t = {} s (v_dc = {v_dc} V)", self.time),
        }
    }
}

/// Why `run_scenario` did not produce a log.
#[derive(Clone, Debug, PartialEq)]
pub enum RunError {
    Config(Vec<String>),
    Fault(SimFault),
}

impl core::fmt::Display for RunError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            RunError::Config(errs) => {
                write!(f, "invalid scenario:")?;
                for e in errs {
                    write!(f, "\n  - {e}")?;
                }
                Ok(())
            }
            RunError::Fault(fault) => fault.fmt(f),
        }
    }
}

const PLANT_STATE_NAMES: [&str; 13] = [
    "omega_r", "i_d", "i_q", "v_dc", "i_g_alpha", "i_g_beta", "v_cap_alpha", "v_cap_beta", "i_go_alpha",
    "i_go_beta", "e_msc", "e_gsc", "e_chop",
];

pub struct ChannelDef {
    pub name: &'static str,
    pub unit: &'static str,
}

const fn ch(name: &'static str, unit: &'static str) -> ChannelDef {
    ChannelDef { name, unit }
}

/// Every channel a run can log, in column order (time excluded).
pub const CHANNELS: &[ChannelDef] = &[
    ch("wind", "m/s"),
    ch("region", "-"),
    ch("omega_r", "pu"),
    ch("beta", "deg"),
    ch("beta_ref", "deg"),
    ch("t_aero", "pu"),
    ch("t_e", "pu"),
    ch("t_ref", "pu"),
    ch("p_aero", "pu"),
    ch("p_msc", "pu"),
    ch("p_gsc", "pu"),
    ch("p_chop", "pu"),
    ch("v_dc", "pu"),
    ch("chopper", "-"),
    ch("p", "pu"),
    ch("q", "pu"),
    ch("p_dc_ref", "pu"),
    ch("p_target", "pu"),
    ch("q_target", "pu"),
    ch("v_pos", "pu"),
    ch("v_neg", "pu"),
    ch("i_pos", "pu"),
    ch("i_neg", "pu"),
    ch("v_a", "pu"),
    ch("v_b", "pu"),
    ch("v_c", "pu"),
    ch("i_a", "pu"),
    ch("i_b", "pu"),
    ch("i_c", "pu"),
    ch("e_src", "pu"),
    ch("theta", "rad"),
    ch("f_pll", "Hz"),
    ch("k_cl", "-"),
    ch("v_dip", "-"),
    ch("fallback", "-"),
    ch("m_scale", "-"),
    ch("e_msc", "MJ"),
    ch("e_gsc", "MJ"),
    ch("e_chop", "MJ"),
    ch("e_dc", "MJ"),
];

/// Fixed per-run quantities derived from the scenario.
struct Plant<'a> {
    s: &'a Scenario,
    curve: CpCurve,
    net: NetworkPu,
    source: GridSource,
    gsc: GscPlant,
}

impl<'a> Plant<'a> {
    fn new(s: &'a Scenario) -> Self {
        let prm = &s.params;
        let net = prm.network.per_unit(&prm.base);
        let v_pk = prm.base.v_peak();
        Plant {
            s,
            curve: crate::aero::CpCurve::from_params(&prm.aero),
            source: GridSource {
                omega0: net.omega0,
                phase0: s.grid.phase0,
                magnitude: s.grid.magnitude,
                events: s.events.clone(),
            },
            gsc: GscPlant {
                omega0: net.omega0,
                x_f: net.l_f,
                b_c: net.c_f,
                r_d: net.r_d,
                v_max_per_vdc: prm.dc_link.v_nominal / SQRT_3 / v_pk,
            },
            net,
        }
    }
}

/// Values only known once the controllers have run, kept for logging.
#[derive(Clone, Copy, Debug, Default)]
struct ControlSnapshot {
    region: f64,
    t_ref: f64,
    p_dc_ref: f64,
    p_target: f64,
    q_target: f64,
    v_pos: f64,
    v_neg: f64,
    i_pos: f64,
    i_neg: f64,
    k_cl: f64,
    v_dip: bool,
    fallback: bool,
    m_scale: f64,
}

impl ControlSnapshot {
    fn from_gsc(out: &GscOutput, region: OperatingRegion, t_ref: f64) -> Self {
        Self {
            region: region.number(),
            t_ref,
            p_dc_ref: out.p_ref,
            p_target: out.p_target,
            q_target: out.q_target,
            v_pos: out.v_seq.pos().magnitude(),
            v_neg: out.v_seq.neg().magnitude(),
            i_pos: out.i_seq.pos().magnitude(),
            i_neg: out.i_seq.neg().magnitude(),
            k_cl: out.refs.k_cl,
            v_dip: out.v_dip,
            fallback: out.fallback,
            m_scale: out.command.scale,
        }
    }
}

fn control_step(plant: &Plant, st: &mut SimState, dt_c: f64) -> ControlSnapshot {
    let s = plant.s;
    let prm = &s.params;
    let aero = &prm.aero;
    let t = st.t;
    let v_w = s.wind.at(t);
    let p_ref = s.setpoints.p_ref.at(t);
    let region = OperatingRegion::from_wind(v_w, aero);
    let omega_pu = st.rotor.omega_pu(aero);
    let t_rated = aero.rated_torque();

    let t_ref = torque_control(
        &prm.msc,
        &mut st.msc,
        TorqueInputs {
            region,
            omega_pu,
            omega_ref: prm.msc.speed_ref,
            t_opt: optimal_torque(aero, st.rotor.omega_r),
            t_rated,
            p_ref,
        },
        dt_c,
    );
    let i_ref = current_reference(&prm.machine, t_ref);
    st.held.v_msc = msc_current_control(
        &prm.machine,
        &prm.msc,
        &mut st.msc,
        i_ref,
        st.pmsg,
        st.rotor.omega_r,
        st.dc.v_dc,
        dt_c,
    );

    let p_meas = electrical_torque(&prm.machine, st.pmsg) * st.rotor.omega_r / aero.p_rated;
    st.held.beta_ref = pitch_reference(
        &prm.pitch,
        aero,
        &mut st.pitch,
        PitchInputs {
            v_w,
            p_ref,
            p_meas,
            omega_pu,
        },
        dt_c,
    );

    let net = &st.network;
    let inputs = GscInputs {
        v_terminal: inverse_clarke(net.terminal_voltage(&plant.net)),
        i_filter: inverse_clarke(net.i_g),
        v_dc: st.dc.v_dc / prm.dc_link.v_nominal,
        v_dc_ref: s.setpoints.v_dc_ref,
        q_ref: s.setpoints.q_ref.at(t),
        variant: s.variant,
    };
    let out = gsc_step(&prm.gsc, &plant.gsc, &mut st.gsc, &inputs, dt_c);
    st.held.v_gsc = out.command.v;
    st.held.theta = out.theta;
    st.held.omega = out.omega;
    st.held.t_control = t;
    ControlSnapshot::from_gsc(&out, region, t_ref / t_rated)
}

fn converter_voltage(held: &HeldCommands, t: f64) -> AlphaBeta {
    let z = held.v_gsc.space_vector(held.theta + held.omega * (t - held.t_control));
    AlphaBeta::new(z.re, z.im)
}

type PlantVector = [f64; 13];

fn pack(st: &SimState) -> PlantVector {
    let n = st.network.as_array();
    [
        st.rotor.omega_r,
        st.pmsg.i_d,
        st.pmsg.i_q,
        st.dc.v_dc,
        n[0],
        n[1],
        n[2],
        n[3],
        n[4],
        n[5],
        st.energy.msc,
        st.energy.gsc,
        st.energy.chop,
    ]
}

fn plant_step(plant: &Plant, st: &SimState, dt: f64) -> Result<PlantVector, NonFiniteDerivative> {
    let prm = &plant.s.params;
    let aero = &prm.aero;
    let dc = &prm.dc_link;
    let s_base = prm.base.s_base;
    let beta = st.pitch.beta;
    let chop_on = st.dc.chopper_on;
    let held = st.held;
    integrate_step(&pack(st), st.t, dt, |tau, x| {
        let v_w = plant.s.wind.at(tau);
        let pmsg = PmsgState { i_d: x[1], i_q: x[2] };
        let t_aero = aero_torque(aero, &plant.curve, v_w, x[0], beta);
        let t_e = electrical_torque(&prm.machine, pmsg);
        let di = pmsg_derivative(&prm.machine, pmsg, held.v_msc, x[0]);
        let net = NetworkState::from_array(&x[4..10]);
        let v_conv = converter_voltage(&held, tau);
        let p_msc = stator_power(held.v_msc, pmsg);
        let p_gsc = v_conv.dot(net.i_g) * s_base;
        let p_chop = if chop_on { x[3] * x[3] / dc.r_chop } else { 0.0 };
        let dv = (p_msc - p_gsc - p_chop) / (dc.capacitance * x[3]);
        let dn = network_derivative(
            &plant.net,
            &net,
            v_conv,
            plant.source.source_alpha_beta(tau),
            plant.source.include_source_impedance(tau),
        );
        [
            (t_aero - t_e) / aero.j_total,
            di[0],
            di[1],
            dv,
            dn[0],
            dn[1],
            dn[2],
            dn[3],
            dn[4],
            dn[5],
            p_msc,
            p_gsc,
            p_chop,
        ]
    })
}

fn log_row(plant: &Plant, st: &SimState, c: &ControlSnapshot) -> [f64; 40] {
    let prm = &plant.s.params;
    let aero = &prm.aero;
    let dc = &prm.dc_link;
    let s_base = prm.base.s_base;
    let t = st.t;
    let v_w = plant.s.wind.at(t);
    let t_rated = aero.rated_torque();
    let omega = st.rotor.omega_r;
    let t_aero = aero_torque(aero, &plant.curve, v_w, omega, st.pitch.beta);
    let p_aero = aero_power(aero, &plant.curve, v_w, omega, st.pitch.beta);
    let t_e = electrical_torque(&prm.machine, st.pmsg);
    let p_msc = stator_power(st.held.v_msc, st.pmsg) / s_base;
    let v_conv = converter_voltage(&st.held, t);
    let p_gsc = v_conv.dot(st.network.i_g);
    let p_chop = if st.dc.chopper_on { st.dc.v_dc * st.dc.v_dc / dc.r_chop / s_base } else { 0.0 };
    let v_t = st.network.terminal_voltage(&plant.net);
    let (p, q) = power(v_t, st.network.i_go);
    let v_abc = inverse_clarke(v_t);
    let i_abc = inverse_clarke(st.network.i_go);
    let e_src = plant.source.sequence_phasors(t).0.norm();
    let theta = crate::framework::wrap_angle(st.held.theta + st.held.omega * (t - st.held.t_control));
    let flag = |b: bool| if b { 1.0 } else { 0.0 };
    [
        v_w,
        c.region,
        omega / aero.omega_rated,
        st.pitch.beta,
        st.held.beta_ref,
        t_aero / t_rated,
        t_e / t_rated,
        c.t_ref,
        p_aero / aero.p_rated,
        p_msc,
        p_gsc,
        p_chop,
        st.dc.v_dc / dc.v_nominal,
        flag(st.dc.chopper_on),
        p,
        q,
        c.p_dc_ref,
        c.p_target,
        c.q_target,
        c.v_pos,
        c.v_neg,
        c.i_pos,
        c.i_neg,
        v_abc.a,
        v_abc.b,
        v_abc.c,
        i_abc.a,
        i_abc.b,
        i_abc.c,
        e_src,
        theta,
        st.held.omega / core::f64::consts::TAU,
        c.k_cl,
        flag(c.v_dip),
        flag(c.fallback),
        c.m_scale,
        st.energy.msc * 1e-6,
        st.energy.gsc * 1e-6,
        st.energy.chop * 1e-6,
        dc.stored_energy(st.dc.v_dc) * 1e-6,
    ]
}

fn metadata(plant: &Plant) -> Vec<(String, String)> {
    let s = plant.s;
    let prm = &s.params;
    let n = &plant.net;
    let kv = |k: &str, v: String| (k.to_string(), v);
    alloc::vec![
        kv("scenario", s.name.clone()),
        kv("variant", s.variant.name().to_string()),
        kv("dt_s", format!("{}", s.solver.dt)),
        kv("control_decimation", format!("{}", s.solver.control_decimation)),
        kv("log_interval_s", format!("{}", s.solver.log_interval)),
        kv("duration_s", format!("{}", s.solver.duration)),
        kv("cp_max", format!("{}", prm.aero.cp_max)),
        kv("lambda_opt", format!("{}", prm.aero.lambda_opt)),
        kv("k_opt_nm_s2", format!("{}", prm.aero.k_opt())),
        kv("rated_torque_nm", format!("{}", prm.aero.rated_torque())),
        kv("flux_m_wb", format!("{}", prm.machine.flux_m)),
        kv("r_chop_ohm", format!("{}", prm.dc_link.r_chop)),
        kv("x_filter_pu", format!("{}", n.l_f)),
        kv("b_filter_pu", format!("{}", n.c_f)),
        kv("r_damp_pu", format!("{}", n.r_d)),
        kv("x_transformer_pu", format!("{}", n.l_t)),
        kv("x_source_pu", format!("{}", n.l_s)),
        kv("k_qv", format!("{}", prm.gsc.lvrt.k_qv)),
    ]
}

/// Runs a scenario from its fast-start operating point and returns the log.
pub fn run_scenario(s: &Scenario) -> Result<TimeSeriesLog, RunError> {
    s.validate().map_err(RunError::Config)?;
    let plant = Plant::new(s);
    let mut st = initial_state(s, &plant.curve, &plant.net);

    let dt = s.solver.dt;
    let steps = s.solver.steps();
    let log_every = s.solver.log_every().max(1);
    let decimation = s.solver.control_decimation.max(1) as u64;
    let dt_c = dt * decimation as f64;

    let selected: Vec<usize> = if s.output.channels.is_empty() {
        (0..CHANNELS.len()).collect()
    } else {
        s.output
            .channels
            .iter()
            .filter_map(|name| CHANNELS.iter().position(|c| c.name == name))
            .collect()
    };
    let mut log = TimeSeriesLog::new(
        selected
            .iter()
            .map(|&i| (CHANNELS[i].name.to_string(), CHANNELS[i].unit.to_string())),
        s.solver.log_interval,
    );
    log.metadata = metadata(&plant);

    let mut snapshot = ControlSnapshot::default();
    let mut row = Vec::with_capacity(selected.len());
    for n in 0..=steps {
        st.step = n;
        st.t = n as f64 * dt;
        if n % decimation == 0 {
            snapshot = control_step(&plant, &mut st, dt_c);
        }
        chopper_logic(&s.params.dc_link, &mut st.dc.chopper_on, st.dc.v_dc);
        if n % log_every == 0 {
            let full = log_row(&plant, &st, &snapshot);
            row.clear();
            row.extend(selected.iter().map(|&i| full[i]));
            log.push(st.t, &row);
        }
        if n == steps {
            break;
        }
        let x = plant_step(&plant, &st, dt).map_err(|e| {
            RunError::Fault(SimFault {
                time: st.t,
                reason: FaultReason::NonFinite {
                    index: e.index,
                    stage: e.stage,
                },
                snapshot: Box::new(st),
            })
        })?;
        if !(x[3] > 0.0) {
            return Err(RunError::Fault(SimFault {
                time: st.t + dt,
                reason: FaultReason::DcCollapse { v_dc: x[3] },
                snapshot: Box::new(st),
            }));
        }
        st.rotor.omega_r = x[0].max(0.0);
        st.pmsg = PmsgState { i_d: x[1], i_q: x[2] };
        st.dc.v_dc = x[3];
        st.network = NetworkState::from_array(&x[4..10]);
        st.energy = EnergyLedger {
            msc: x[10],
            gsc: x[11],
            chop: x[12],
        };
        st.dc.chopper_energy = x[12];
        st.pitch = step_actuator(&s.params.pitch, st.pitch, st.held.beta_ref, dt);
    }
    Ok(log)
}
