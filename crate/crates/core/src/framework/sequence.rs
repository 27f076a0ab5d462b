//! Symmetrical components, in phasor form and in synchronous frames.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::per_unit::PEAK_POWER_FACTOR;
use super::transforms::Dq;
use crate::math::SQRT_3;

/// Phase operator `a = e^{j 2pi/3}`.
pub const PHASE_OP: Complex64 = Complex64::new(-0.5, 0.5 * SQRT_3);
/// `a^2 = e^{-j 2pi/3}`.
pub const PHASE_OP_SQ: Complex64 = Complex64::new(-0.5, -0.5 * SQRT_3);

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SequencePhasors {
    pub positive: Complex64,
    pub negative: Complex64,
    pub zero: Complex64,
}

/// Decomposes phase phasors `[a, b, c]` into sequence phasors referred to
/// phase `a`.
pub fn fortescue_phasors(abc: [Complex64; 3]) -> SequencePhasors {
    let [a, b, c] = abc;
    SequencePhasors {
        positive: (a + PHASE_OP * b + PHASE_OP_SQ * c) / 3.0,
        negative: (a + PHASE_OP_SQ * b + PHASE_OP * c) / 3.0,
        zero: (a + b + c) / 3.0,
    }
}

/// Rebuilds phase phasors from sequence phasors.
pub fn phases_from_sequences(seq: &SequencePhasors) -> [Complex64; 3] {
    let SequencePhasors {
        positive: p,
        negative: n,
        zero: z,
    } = *seq;
    [
        z + p + n,
        z + PHASE_OP_SQ * p + PHASE_OP * n,
        z + PHASE_OP * p + PHASE_OP_SQ * n,
    ]
}

/// Positive- and negative-sequence components, each in its own synchronous
/// frame: the positive pair rotates with `+theta`, the negative with `-theta`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SequenceDq {
    pub pos_d: f64,
    pub pos_q: f64,
    pub neg_d: f64,
    pub neg_q: f64,
}

impl SequenceDq {
    pub const ZERO: Self = Self {
        pos_d: 0.0,
        pos_q: 0.0,
        neg_d: 0.0,
        neg_q: 0.0,
    };

    pub const fn new(pos_d: f64, pos_q: f64, neg_d: f64, neg_q: f64) -> Self {
        Self {
            pos_d,
            pos_q,
            neg_d,
            neg_q,
        }
    }

    pub fn from_parts(pos: Dq, neg: Dq) -> Self {
        Self::new(pos.d, pos.q, neg.d, neg.q)
    }

    pub fn pos(&self) -> Dq {
        Dq::new(self.pos_d, self.pos_q)
    }

    pub fn neg(&self) -> Dq {
        Dq::new(self.neg_d, self.neg_q)
    }

    pub fn pos_c(&self) -> Complex64 {
        Complex64::new(self.pos_d, self.pos_q)
    }

    pub fn neg_c(&self) -> Complex64 {
        Complex64::new(self.neg_d, self.neg_q)
    }

    pub fn scale(&self, k: f64) -> Self {
        Self::new(self.pos_d * k, self.pos_q * k, self.neg_d * k, self.neg_q * k)
    }

    pub fn as_array(&self) -> [f64; 4] {
        [self.pos_d, self.pos_q, self.neg_d, self.neg_q]
    }

    pub fn is_finite(&self) -> bool {
        self.as_array().iter().all(|x| x.is_finite())
    }

    /// Space vector `x+ e^{j theta} + x- e^{-j theta}` at frame angle `theta`.
    pub fn space_vector(&self, theta: f64) -> Complex64 {
        let rot = Complex64::from_polar(1.0, theta);
        self.pos_c() * rot + self.neg_c() * rot.conj()
    }

    /// Phase phasors (peak, referred to the `theta = 0` instant) of the
    /// three-phase waveform described by these sequence components.
    pub fn phase_phasors(&self) -> [Complex64; 3] {
        let p = self.pos_c();
        let n = self.neg_c().conj();
        [p + n, p * PHASE_OP_SQ + n * PHASE_OP, p * PHASE_OP + n * PHASE_OP_SQ]
    }
}

/// Average and double-frequency terms of complex power.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct PowerDecomposition {
    pub p_avg: f64,
    pub q_avg: f64,
    pub p_c2: f64,
    pub p_s2: f64,
    pub q_c2: f64,
    pub q_s2: f64,
}

impl PowerDecomposition {
    /// `p(t)` at frame angle `theta = omega t`.
    pub fn active_at(&self, theta: f64) -> f64 {
        let (s, c) = crate::math::sin_cos(2.0 * theta);
        self.p_avg + self.p_c2 * c + self.p_s2 * s
    }

    pub fn reactive_at(&self, theta: f64) -> f64 {
        let (s, c) = crate::math::sin_cos(2.0 * theta);
        self.q_avg + self.q_c2 * c + self.q_s2 * s
    }

    pub fn active_oscillation(&self) -> f64 {
        crate::math::hypot(self.p_c2, self.p_s2)
    }

    pub fn scale(&self, k: f64) -> Self {
        Self {
            p_avg: self.p_avg * k,
            q_avg: self.q_avg * k,
            p_c2: self.p_c2 * k,
            p_s2: self.p_s2 * k,
            q_c2: self.q_c2 * k,
            q_s2: self.q_s2 * k,
        }
    }
}

/// Splits `S = 1.5 v i*` into its average and `2 omega` terms.
///
/// Inputs are amplitude-invariant sequence components. With SI peak values
/// the result is in watts/vars; with per-unit peak values divide by
/// [`PEAK_POWER_FACTOR`] to get per unit of `s_base`.
pub fn power_decomposition(v: &SequenceDq, i: &SequenceDq) -> PowerDecomposition {
    let (vp, vn) = (v.pos_c(), v.neg_c());
    let (ip, inn) = (i.pos_c(), i.neg_c());
    let avg = vp * ip.conj() + vn * inn.conj();
    // coefficient of e^{+j2wt} and e^{-j2wt}
    let up = vp * inn.conj();
    let down = vn * ip.conj();
    let k = PEAK_POWER_FACTOR;
    PowerDecomposition {
        p_avg: k * avg.re,
        q_avg: k * avg.im,
        p_c2: k * (up.re + down.re),
        p_s2: k * (down.im - up.im),
        q_c2: k * (up.im + down.im),
        q_s2: k * (up.re - down.re),
    }
}

/// Instantaneous `p` and `q` of two stationary space vectors, `1.5 v i*`.
pub fn instantaneous_power(v: Complex64, i: Complex64) -> (f64, f64) {
    let s = v * i.conj() * PEAK_POWER_FACTOR;
    (s.re, s.im)
}

/// Maximum per-phase RMS of the waveform, expressed like the sequence inputs
/// (a peak-normalised per-unit value: a balanced 1 pu set reads 1).
pub fn max_phase_magnitude(seq: &SequenceDq) -> f64 {
    seq.phase_phasors()
        .iter()
        .map(|p| p.norm())
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::math::{cos, sin, TAU};
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    /// Closed-form Fortescue matrix applied elementwise.
    fn fortescue_matrix(abc: [Complex64; 3]) -> [Complex64; 3] {
        let a = Complex64::from_polar(1.0, TAU / 3.0);
        let a2 = a * a;
        let m = [[1.0.into(), a, a2], [1.0.into(), a2, a], [1.0.into(), 1.0.into(), 1.0.into()]];
        let mut out = [Complex64::default(); 3];
        for (o, row) in out.iter_mut().zip(m.iter()) {
            *o = (row[0] * abc[0] + row[1] * abc[1] + row[2] * abc[2]) / 3.0;
        }
        out
    }

    #[test]
    fn balanced_positive_set() {
        let abc = [
            Complex64::from_polar(1.0, 0.0),
            Complex64::from_polar(1.0, -TAU / 3.0),
            Complex64::from_polar(1.0, TAU / 3.0),
        ];
        let s = fortescue_phasors(abc);
        assert_abs_diff_eq!(s.positive.re, 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(s.positive.im, 0.0, epsilon = 1e-15);
        assert!(s.negative.norm() < 1e-15);
        assert!(s.zero.norm() < 1e-15);
    }

    #[test]
    fn single_phase_sag_against_matrix() {
        let abc = [
            Complex64::from_polar(0.35, 0.0),
            Complex64::from_polar(1.0, -TAU / 3.0),
            Complex64::from_polar(1.0, TAU / 3.0),
        ];
        let s = fortescue_phasors(abc);
        let m = fortescue_matrix(abc);
        assert_abs_diff_eq!(s.positive.re, m[0].re, epsilon = 1e-15);
        assert_abs_diff_eq!(s.negative.re, m[1].re, epsilon = 1e-15);
        assert_abs_diff_eq!(s.zero.re, m[2].re, epsilon = 1e-15);
        // (0.35 + 2)/3, (0.35 - 1)/3 for both negative and zero
        assert_abs_diff_eq!(s.positive.re, 2.35 / 3.0, epsilon = 1e-15);
        assert_abs_diff_eq!(s.negative.re, -0.65 / 3.0, epsilon = 1e-15);
        assert_abs_diff_eq!(s.zero.re, -0.65 / 3.0, epsilon = 1e-15);
        assert!(s.negative.im.abs() < 1e-15 && s.zero.im.abs() < 1e-15);
    }

    #[test]
    fn common_mode_is_zero_sequence_only() {
        let x = c(0.4, -0.3);
        let s = fortescue_phasors([x, x, x]);
        assert!(s.positive.norm() < 1e-15);
        assert!(s.negative.norm() < 1e-15);
        assert!((s.zero - x).norm() < 1e-15);
    }

    #[test]
    fn balanced_power_has_no_double_frequency() {
        let v = SequenceDq::new(1.0, 0.0, 0.0, 0.0);
        let p = power_decomposition(&v, &v);
        assert_eq!(p.p_avg, 1.5);
        assert_eq!(p.p_c2, 0.0);
        assert_eq!(p.p_s2, 0.0);
        let z = power_decomposition(&v, &SequenceDq::ZERO);
        assert_eq!(z, PowerDecomposition::default());
    }

    #[test]
    fn phase_phasors_match_fortescue_inverse() {
        let s = SequenceDq::new(0.8, 0.1, -0.2, 0.05);
        let direct = s.phase_phasors();
        let via = phases_from_sequences(&SequencePhasors {
            positive: s.pos_c(),
            negative: s.neg_c().conj(),
            zero: Complex64::default(),
        });
        for k in 0..3 {
            assert!((direct[k] - via[k]).norm() < 1e-15);
        }
    }

    /// Average and 2w Fourier coefficients of `1.5 v(t) i(t)` summed over
    /// explicit phase waveforms.
    fn time_domain_oracle(v: &SequenceDq, i: &SequenceDq) -> (f64, f64, f64) {
        let n = 720;
        let vp = v.phase_phasors();
        let ip = i.phase_phasors();
        let (mut avg, mut cc, mut ss) = (0.0, 0.0, 0.0);
        for k in 0..n {
            let th = TAU * k as f64 / n as f64;
            let mut p = 0.0;
            for ph in 0..3 {
                let vt = (vp[ph] * Complex64::from_polar(1.0, th)).re;
                let it = (ip[ph] * Complex64::from_polar(1.0, th)).re;
                p += vt * it;
            }
            avg += p;
            cc += p * cos(2.0 * th);
            ss += p * sin(2.0 * th);
        }
        let n = n as f64;
        (avg / n, 2.0 * cc / n, 2.0 * ss / n)
    }

    #[test]
    fn negative_voltage_creates_double_frequency_power() {
        let v = SequenceDq::new(1.0, 0.0, 0.2, 0.0);
        let i = SequenceDq::new(0.6, -0.1, 0.0, 0.0);
        let p = power_decomposition(&v, &i);
        let (avg, c2, s2) = time_domain_oracle(&v, &i);
        assert!(p.active_oscillation() > 0.1);
        assert_abs_diff_eq!(p.p_avg, avg, epsilon = 1e-12);
        assert_abs_diff_eq!(p.p_c2, c2, epsilon = 1e-12);
        assert_abs_diff_eq!(p.p_s2, s2, epsilon = 1e-12);
    }

    fn seq() -> impl Strategy<Value = SequenceDq> {
        (-1.5..1.5f64, -1.5..1.5f64, -0.8..0.8f64, -0.8..0.8f64)
            .prop_map(|(a, b, c, d)| SequenceDq::new(a, b, c, d))
    }

    fn phasor() -> impl Strategy<Value = Complex64> {
        (-2.0..2.0f64, -2.0..2.0f64).prop_map(|(a, b)| c(a, b))
    }

    proptest! {
        #[test]
        fn fortescue_is_linear(x in proptest::array::uniform3(phasor()), y in proptest::array::uniform3(phasor()),
                               al in -3.0..3.0f64, be in -3.0..3.0f64) {
            let mix = [x[0] * al + y[0] * be, x[1] * al + y[1] * be, x[2] * al + y[2] * be];
            let fx = fortescue_phasors(x);
            let fy = fortescue_phasors(y);
            let fm = fortescue_phasors(mix);
            prop_assert!((fm.positive - (fx.positive * al + fy.positive * be)).norm() < 1e-12);
            prop_assert!((fm.negative - (fx.negative * al + fy.negative * be)).norm() < 1e-12);
            prop_assert!((fm.zero - (fx.zero * al + fy.zero * be)).norm() < 1e-12);
        }

        #[test]
        fn fortescue_reconstructs(x in proptest::array::uniform3(phasor())) {
            let back = phases_from_sequences(&fortescue_phasors(x));
            for k in 0..3 {
                prop_assert!((back[k] - x[k]).norm() < 1e-12);
            }
        }

        #[test]
        fn reconstruction_matches_instantaneous_power(v in seq(), i in seq()) {
            let d = power_decomposition(&v, &i);
            let n = 256;
            let mut sq = 0.0;
            for k in 0..n {
                let th = TAU * k as f64 / n as f64;
                let (p, q) = instantaneous_power(v.space_vector(th), i.space_vector(th));
                sq += (p - d.active_at(th)).powi(2);
                prop_assert!((q - d.reactive_at(th)).abs() < 1e-9);
            }
            prop_assert!((sq / n as f64).sqrt() < 1e-6);
        }
    }
}
