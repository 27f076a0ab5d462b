//! Fast-start initialisation: every state is placed at the steady operating
//! point implied by the wind, setpoints and grid at `t = 0`, so a short
//! relaxation replaces minutes of mechanical settling.

use num_complex::Complex64;

use crate::aero::{mppt_equilibrium, optimal_torque, pitch_for_torque, CpCurve, OperatingRegion, RotorState};
use crate::dc_link::DcLinkState;
use crate::framework::{AlphaBeta, PHASE_OP, PHASE_OP_SQ};
use crate::grid_side::{CurrentControlState, DcVoltageState, GscState, LvrtState, PllState, SogiBank};
use crate::machine::{stator_power, MscState, PmsgState};
use crate::math::{cbrt, interp};
use crate::network::{NetworkPu, NetworkState};
use crate::pitch::PitchState;
use crate::scenario::Scenario;

use super::{EnergyLedger, HeldCommands, SimState};

/// Mechanical operating point: rotor speed (rad/s), generator torque (N m)
/// and blade angle (deg).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MechanicalPoint {
    pub omega_r: f64,
    pub torque: f64,
    pub beta: f64,
    pub region: OperatingRegion,
}

pub fn mechanical_point(s: &Scenario, curve: &CpCurve) -> MechanicalPoint {
    let aero = &s.params.aero;
    let pitch = &s.params.pitch;
    let v = s.wind.at(0.0);
    let p_ref = s.setpoints.p_ref.at(0.0).clamp(0.0, 1.0);
    let t_rated = aero.rated_torque();
    let region = OperatingRegion::from_wind(v, aero);
    let idle = |beta| MechanicalPoint {
        omega_r: 0.0,
        torque: 0.0,
        beta,
        region,
    };
    match region {
        OperatingRegion::BelowCutIn => idle(interp(&pitch.lookup, v).clamp(pitch.beta_min, pitch.beta_max)),
        OperatingRegion::Shutdown => idle(pitch.beta_max),
        OperatingRegion::Rated => {
            let omega_r = aero.omega_rated;
            let torque = p_ref * t_rated;
            let beta = pitch_for_torque(aero, curve, v, omega_r, torque, pitch.beta_max).unwrap_or(pitch.beta_max);
            MechanicalPoint {
                omega_r,
                torque,
                beta,
                region,
            }
        }
        OperatingRegion::Mppt => {
            let free = mppt_equilibrium(aero, curve, v, 0.0).unwrap_or(aero.lambda_opt * v / aero.rotor_radius);
            let free_power = optimal_torque(aero, free) * free;
            if p_ref < 1.0 && free_power > p_ref * aero.p_rated {
                // pitch holds the optimal-torque law on the curtailed power
                let omega_r = cbrt(p_ref * aero.p_rated / aero.k_opt());
                let torque = optimal_torque(aero, omega_r);
                let beta = pitch_for_torque(aero, curve, v, omega_r, torque, pitch.beta_max).unwrap_or(0.0);
                MechanicalPoint {
                    omega_r,
                    torque,
                    beta,
                    region,
                }
            } else {
                MechanicalPoint {
                    omega_r: free,
                    torque: optimal_torque(aero, free).min(t_rated),
                    beta: 0.0,
                    region,
                }
            }
        }
    }
}

/// Steady phasors of the grid-side network for an exported `p + jq` at the
/// filter node.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NetworkPoint {
    pub v_terminal: Complex64,
    pub i_out: Complex64,
    pub i_filter: Complex64,
    pub v_cap: Complex64,
    pub v_conv: Complex64,
}

pub fn network_point(n: &NetworkPu, e: Complex64, p: f64, q: f64) -> NetworkPoint {
    let (l_g, r_g) = n.grid_branch(true);
    let z_g = Complex64::new(r_g, l_g);
    let s = Complex64::new(p, q);
    let mut v = e;
    for _ in 0..100 {
        let i = (s / v).conj();
        let next = e + z_g * i;
        let done = (next - v).norm() < 1e-15;
        v = next;
        if done {
            break;
        }
    }
    let i_out = (s / v).conj();
    let z_c = Complex64::new(n.r_d, -1.0 / n.c_f);
    let i_c = v / z_c;
    let v_cap = i_c / Complex64::new(0.0, n.c_f);
    let i_filter = i_out + i_c;
    let v_conv = v + Complex64::new(n.r_f, n.l_f) * i_filter;
    NetworkPoint {
        v_terminal: v,
        i_out,
        i_filter,
        v_cap,
        v_conv,
    }
}

/// Analytic signals of the three phases of a positive-sequence phasor `x`
/// at time `t`.
fn phase_signals(x: Complex64, omega0: f64, t: f64) -> [Complex64; 3] {
    let z = x * Complex64::from_polar(1.0, omega0 * t);
    [z, z * PHASE_OP_SQ, z * PHASE_OP]
}

fn ab(z: Complex64) -> AlphaBeta {
    AlphaBeta::new(z.re, z.im)
}

pub fn initial_state(s: &Scenario, curve: &CpCurve, n: &NetworkPu) -> SimState {
    let prm = &s.params;
    let base = &prm.base;
    let mech = mechanical_point(s, curve);

    let m = &prm.machine;
    let i_q = mech.torque / m.torque_constant();
    let pmsg = PmsgState { i_d: 0.0, i_q };
    let w_e = m.pole_pairs * mech.omega_r;
    let v_msc = crate::framework::Dq::new(w_e * m.l_q * i_q, w_e * m.flux_m - m.r_s * i_q);
    let p_msc = stator_power(v_msc, pmsg) / base.s_base;
    let msc = MscState {
        speed_integral: if mech.region == OperatingRegion::Rated { mech.torque } else { 0.0 },
        int_d: 0.0,
        int_q: m.r_s * i_q,
        torque_ref: mech.torque,
        speed_loop_active: mech.region == OperatingRegion::Rated,
    };

    let e = Complex64::from_polar(s.grid.magnitude, s.grid.phase0);
    let q = s.setpoints.q_ref.at(0.0);
    let mut p_out = p_msc;
    let mut net = network_point(n, e, p_out, q);
    for _ in 0..5 {
        let losses = n.r_f * net.i_filter.norm_sqr() + n.r_d * (net.i_filter - net.i_out).norm_sqr();
        p_out = p_msc - losses;
        net = network_point(n, e, p_out, q);
    }
    let network = NetworkState {
        i_g: ab(net.i_filter),
        v_cap: ab(net.v_cap),
        i_go: ab(net.i_out),
    };

    let dt = s.solver.dt;
    let omega0 = n.omega0;
    let theta0 = net.v_terminal.arg();
    let pll = PllState::locked(
        omega0,
        theta0,
        SogiBank::settled(phase_signals(net.v_terminal, omega0, -dt)),
    );
    let frame = Complex64::from_polar(1.0, -theta0);
    let i_pos = net.i_filter * frame;
    let v_pos = net.v_terminal * frame;
    let conv_pos = net.v_conv * frame;
    let x_f = n.l_f;
    let decouple = Complex64::new(-x_f * i_pos.im, x_f * i_pos.re);
    let int = conv_pos - v_pos - decouple;
    let gsc = GscState {
        pll,
        current_sogi: SogiBank::settled(phase_signals(net.i_filter, omega0, -dt)),
        dc: DcVoltageState { integral: p_out },
        lvrt: LvrtState::settled(net.v_terminal.norm()),
        current: CurrentControlState {
            integral: [int.re, int.im, 0.0, 0.0],
        },
    };

    SimState {
        t: 0.0,
        step: 0,
        rotor: RotorState { omega_r: mech.omega_r },
        pitch: PitchState {
            beta: mech.beta,
            beta_ref: mech.beta,
            pi_integral: mech.beta,
        },
        pmsg,
        msc,
        dc: DcLinkState {
            v_dc: s.setpoints.v_dc_ref * prm.dc_link.v_nominal,
            chopper_on: false,
            chopper_energy: 0.0,
        },
        network,
        gsc,
        energy: EnergyLedger::default(),
        held: HeldCommands {
            v_msc,
            v_gsc: crate::framework::SequenceDq::new(conv_pos.re, conv_pos.im, 0.0, 0.0),
            theta: theta0,
            omega: omega0,
            t_control: 0.0,
            beta_ref: mech.beta,
        },
    }
}
