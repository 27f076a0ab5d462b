//! Sequence current references for a power target with the double-frequency
//! active-power terms cancelled, the per-phase current limit, and the filter
//! capacitor compensation.

use serde::{Deserialize, Serialize};

use num_complex::Complex64;

use crate::framework::{max_phase_magnitude, solve4, Dq, SequenceDq};

/// `|v+|^2 - |v-|^2` below which the full solution is abandoned (pu^2).
pub const SINGULAR_THRESHOLD: f64 = 0.01;
/// Voltage floor for the positive-sequence fallback (pu).
pub const FALLBACK_VOLTAGE_FLOOR: f64 = 0.05;

/// Reference currents and whether the positive-sequence fallback was used.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SequenceSolution {
    pub currents: SequenceDq,
    pub fallback: bool,
}

/// Rows of `[P, Q, P_s2, P_c2] = 3/2 M i`, with `i = [id+, iq+, id-, iq-]`.
pub fn power_matrix(v: &SequenceDq) -> [[f64; 4]; 4] {
    let (dp, qp, dn, qn) = (v.pos_d, v.pos_q, v.neg_d, v.neg_q);
    [
        [dp, qp, dn, qn],
        [qp, -dp, qn, -dn],
        [qn, -dn, -qp, dp],
        [dn, qn, dp, qp],
    ]
}

/// Solves for the sequence currents that deliver average powers `p` and `q`
/// with both double-frequency active terms zero. Powers are in the same
/// `3/2 v i` units as [`crate::framework::power_decomposition`].
pub fn sequence_current_references(p: f64, q: f64, v: &SequenceDq) -> SequenceSolution {
    let pos2 = v.pos_d * v.pos_d + v.pos_q * v.pos_q;
    let neg2 = v.neg_d * v.neg_d + v.neg_q * v.neg_q;
    if pos2 - neg2 >= SINGULAR_THRESHOLD {
        let m = power_matrix(v);
        let k = 2.0 / 3.0;
        if let Some(i) = solve4(m, [k * p, k * q, 0.0, 0.0]) {
            return SequenceSolution {
                currents: SequenceDq::new(i[0], i[1], i[2], i[3]),
                fallback: false,
            };
        }
    }
    SequenceSolution {
        currents: positive_only(p, q, v.pos()),
        fallback: true,
    }
}

/// Positive-sequence currents for `p`, `q` against the positive-sequence
/// voltage alone (its magnitude floored).
pub fn positive_only(p: f64, q: f64, v_pos: Dq) -> SequenceDq {
    let mag = v_pos.magnitude();
    let v = if mag < FALLBACK_VOLTAGE_FLOOR {
        if mag > 0.0 {
            v_pos.scale(FALLBACK_VOLTAGE_FLOOR / mag)
        } else {
            Dq::new(FALLBACK_VOLTAGE_FLOOR, 0.0)
        }
    } else {
        v_pos
    };
    // S = 3/2 v i*  =>  i = conj(2 S / (3 v))
    let s = Complex64::new(p, q);
    let i = (s * (2.0 / 3.0) / v.to_complex()).conj();
    SequenceDq::new(i.re, i.im, 0.0, 0.0)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CurrentReferences {
    pub pre_limit: SequenceDq,
    pub post_limit: SequenceDq,
    pub k_cl: f64,
}

/// Scales all four components by the largest `k_cl <= 1` that keeps every
/// phase within `i_limit`.
pub fn sequence_current_limit(refs: &SequenceDq, i_limit: f64) -> CurrentReferences {
    let peak = max_phase_magnitude(refs);
    let k_cl = if peak > i_limit { i_limit / peak } else { 1.0 };
    CurrentReferences {
        pre_limit: *refs,
        post_limit: refs.scale(k_cl),
        k_cl,
    }
}

/// Combines a reactive and an active current set, keeping the reactive part
/// whole and shrinking the active part until the sum fits `i_limit`. If the
/// reactive part alone is over the limit the active part is dropped.
pub fn reactive_priority(reactive: &SequenceDq, active: &SequenceDq, i_limit: f64) -> SequenceDq {
    let sum = |s: f64| {
        let r = reactive.as_array();
        let a = active.as_array();
        SequenceDq::new(r[0] + s * a[0], r[1] + s * a[1], r[2] + s * a[2], r[3] + s * a[3])
    };
    if max_phase_magnitude(&sum(1.0)) <= i_limit {
        return sum(1.0);
    }
    if max_phase_magnitude(reactive) >= i_limit {
        return *reactive;
    }
    // the phase peak is convex in s, so bisection on [0, 1] finds the edge
    let (mut lo, mut hi) = (0.0, 1.0);
    for _ in 0..50 {
        let mid = 0.5 * (lo + hi);
        if max_phase_magnitude(&sum(mid)) <= i_limit {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    sum(lo)
}

/// Filter-inductor current references from output-current references: adds
/// the current drawn by the capacitor branch, whose admittance at the present
/// positive-sequence frequency is `y` (pu). The negative sequence sees the
/// conjugate admittance.
pub fn current_compensator(i_out: &SequenceDq, v: &SequenceDq, y: Complex64) -> SequenceDq {
    let pos = i_out.pos_c() + y * v.pos_c();
    let neg = i_out.neg_c() + y.conj() * v.neg_c();
    SequenceDq::from_parts(Dq::new(pos.re, pos.im), Dq::new(neg.re, neg.im))
}
