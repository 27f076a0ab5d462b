//! Clarke / Park transforms, amplitude-invariant (2/3 scaled) convention.
//!
//! For a balanced set `a = A cos(phi)`, `b = A cos(phi - 2pi/3)`,
//! `c = A cos(phi + 2pi/3)` the frame rotating at `theta` sees
//! `d + jq = A e^{j(phi - theta)}`.

use core::ops::{Add, Mul, Sub};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::math::{sin_cos, PI, SQRT_3, TAU};

const TWO_PI_3: f64 = TAU / 3.0;

/// Instantaneous per-phase quantities at one timestep.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ThreePhaseSample {
    pub a: f64,
    pub b: f64,
    pub c: f64,
}

impl ThreePhaseSample {
    pub const fn new(a: f64, b: f64, c: f64) -> Self {
        Self { a, b, c }
    }

    /// Balanced positive-sequence cosine set with phase `a` at `angle`.
    pub fn balanced(amplitude: f64, angle: f64) -> Self {
        let (_, ca) = sin_cos(angle);
        let (_, cb) = sin_cos(angle - TWO_PI_3);
        let (_, cc) = sin_cos(angle + TWO_PI_3);
        Self::new(amplitude * ca, amplitude * cb, amplitude * cc)
    }

    pub fn zero_sequence(&self) -> f64 {
        (self.a + self.b + self.c) / 3.0
    }

    pub fn is_finite(&self) -> bool {
        self.a.is_finite() && self.b.is_finite() && self.c.is_finite()
    }

    pub fn scale(self, k: f64) -> Self {
        Self::new(self.a * k, self.b * k, self.c * k)
    }

    pub fn max_abs(&self) -> f64 {
        self.a.abs().max(self.b.abs()).max(self.c.abs())
    }
}

impl Add for ThreePhaseSample {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Self::new(self.a + o.a, self.b + o.b, self.c + o.c)
    }
}

impl Sub for ThreePhaseSample {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        Self::new(self.a - o.a, self.b - o.b, self.c - o.c)
    }
}

/// Stationary two-axis quantity (zero sequence excluded).
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct AlphaBeta {
    pub alpha: f64,
    pub beta: f64,
}

impl AlphaBeta {
    pub const ZERO: Self = Self { alpha: 0.0, beta: 0.0 };

    pub const fn new(alpha: f64, beta: f64) -> Self {
        Self { alpha, beta }
    }

    pub fn to_complex(self) -> Complex64 {
        Complex64::new(self.alpha, self.beta)
    }

    pub fn from_complex(z: Complex64) -> Self {
        Self::new(z.re, z.im)
    }

    pub fn dot(self, o: Self) -> f64 {
        self.alpha * o.alpha + self.beta * o.beta
    }

    /// `beta * o.alpha - alpha * o.beta`, the reactive product `Im(v i*)`.
    pub fn cross(self, o: Self) -> f64 {
        self.beta * o.alpha - self.alpha * o.beta
    }

    pub fn is_finite(&self) -> bool {
        self.alpha.is_finite() && self.beta.is_finite()
    }
}

impl Add for AlphaBeta {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Self::new(self.alpha + o.alpha, self.beta + o.beta)
    }
}

impl Sub for AlphaBeta {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        Self::new(self.alpha - o.alpha, self.beta - o.beta)
    }
}

impl Mul<f64> for AlphaBeta {
    type Output = Self;
    fn mul(self, k: f64) -> Self {
        Self::new(self.alpha * k, self.beta * k)
    }
}

/// Rotating-frame pair.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Dq {
    pub d: f64,
    pub q: f64,
}

impl Dq {
    pub const ZERO: Self = Self { d: 0.0, q: 0.0 };

    pub const fn new(d: f64, q: f64) -> Self {
        Self { d, q }
    }

    pub fn to_complex(self) -> Complex64 {
        Complex64::new(self.d, self.q)
    }

    pub fn from_complex(z: Complex64) -> Self {
        Self::new(z.re, z.im)
    }

    pub fn magnitude(self) -> f64 {
        crate::math::hypot(self.d, self.q)
    }

    pub fn scale(self, k: f64) -> Self {
        Self::new(self.d * k, self.q * k)
    }
}

/// Park output with the zero-sequence component kept so the transform is
/// invertible for arbitrary three-phase input.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Dq0 {
    pub d: f64,
    pub q: f64,
    pub zero: f64,
}

impl Dq0 {
    pub fn dq(self) -> Dq {
        Dq::new(self.d, self.q)
    }
}

pub fn clarke(x: ThreePhaseSample) -> AlphaBeta {
    AlphaBeta::new(
        (2.0 * x.a - x.b - x.c) / 3.0,
        (x.b - x.c) / SQRT_3,
    )
}

/// Inverse Clarke with zero zero-sequence.
pub fn inverse_clarke(x: AlphaBeta) -> ThreePhaseSample {
    let half_sqrt3 = 0.5 * SQRT_3;
    ThreePhaseSample::new(
        x.alpha,
        -0.5 * x.alpha + half_sqrt3 * x.beta,
        -0.5 * x.alpha - half_sqrt3 * x.beta,
    )
}

/// Rotates a stationary vector into the frame at `theta`.
pub fn rotate_to_frame(x: AlphaBeta, theta: f64) -> Dq {
    let (s, c) = sin_cos(theta);
    Dq::new(c * x.alpha + s * x.beta, -s * x.alpha + c * x.beta)
}

/// Rotates a frame quantity at `theta` back to stationary axes.
pub fn rotate_from_frame(x: Dq, theta: f64) -> AlphaBeta {
    let (s, c) = sin_cos(theta);
    AlphaBeta::new(c * x.d - s * x.q, s * x.d + c * x.q)
}

pub fn park_transform(abc: ThreePhaseSample, theta: f64) -> Dq0 {
    let dq = rotate_to_frame(clarke(abc), theta);
    Dq0 {
        d: dq.d,
        q: dq.q,
        zero: abc.zero_sequence(),
    }
}

pub fn inverse_park(dq0: Dq0, theta: f64) -> ThreePhaseSample {
    let abc = inverse_clarke(rotate_from_frame(dq0.dq(), theta));
    ThreePhaseSample::new(abc.a + dq0.zero, abc.b + dq0.zero, abc.c + dq0.zero)
}

/// Wraps to `(-pi, pi]`.
pub fn wrap_angle(theta: f64) -> f64 {
    let mut x = theta % TAU;
    if x <= -PI {
        x += TAU;
    } else if x > PI {
        x -= TAU;
    }
    x
}
