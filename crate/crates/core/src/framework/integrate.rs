//! Fixed-step explicit integration.

/// A derivative evaluation produced a non-finite value.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct NonFiniteDerivative {
    /// Index of the offending state component.
    pub index: usize,
    /// Runge-Kutta stage (1..=4).
    pub stage: u8,
}

fn check<const N: usize>(d: &[f64; N], stage: u8) -> Result<(), NonFiniteDerivative> {
    match d.iter().position(|x| !x.is_finite()) {
        Some(index) => Err(NonFiniteDerivative { index, stage }),
        None => Ok(()),
    }
}

fn axpy<const N: usize>(x: &[f64; N], k: &[f64; N], h: f64) -> [f64; N] {
    let mut out = *x;
    for (o, d) in out.iter_mut().zip(k) {
        *o += h * d;
    }
    out
}

/// Advances `x` from `t` to `t + dt` with classic fourth-order Runge-Kutta.
///
/// The update is a fixed sequence of float operations, so identical inputs
/// give bit-identical outputs.
pub fn integrate_step<const N: usize, F>(
    x: &[f64; N],
    t: f64,
    dt: f64,
    mut derivative: F,
) -> Result<[f64; N], NonFiniteDerivative>
where
    F: FnMut(f64, &[f64; N]) -> [f64; N],
{
    let half = 0.5 * dt;
    let k1 = derivative(t, x);
    check(&k1, 1)?;
    let k2 = derivative(t + half, &axpy(x, &k1, half));
    check(&k2, 2)?;
    let k3 = derivative(t + half, &axpy(x, &k2, half));
    check(&k3, 3)?;
    let k4 = derivative(t + dt, &axpy(x, &k3, dt));
    check(&k4, 4)?;
    let mut out = *x;
    let sixth = dt / 6.0;
    for i in 0..N {
        out[i] += sixth * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    }
    Ok(out)
}
