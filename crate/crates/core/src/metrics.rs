//! Post-processing of logs: double-frequency oscillation amplitude, steady
//! values, settling times and side-by-side comparison of two runs.

use alloc::string::String;
use alloc::vec::Vec;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::log::{LogError, TimeSeriesLog};
use crate::math::{floor, round, sin_cos, TAU};

/// Shortest window accepted by [`metric_2w_amplitude`], in fundamental cycles.
pub const MIN_CYCLES: f64 = 5.0;

#[derive(Clone, Debug, PartialEq)]
pub enum MetricError {
    Log(LogError),
    WindowTooShort { cycles: f64 },
    SampleRateMismatch { a: f64, b: f64 },
    ChannelMismatch(String),
}

impl From<LogError> for MetricError {
    fn from(e: LogError) -> Self {
        MetricError::Log(e)
    }
}

impl core::fmt::Display for MetricError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            MetricError::Log(e) => write!(f, "{e}"),
            MetricError::WindowTooShort { cycles } => {
                write!(f, "window spans {cycles:.3} fundamental cycles, at least {MIN_CYCLES} needed")
            }
            MetricError::SampleRateMismatch { a, b } => write!(f, "sample intervals differ: {a} s vs {b} s"),
            MetricError::ChannelMismatch(n) => write!(f, "channel `{n}` is missing from one of the logs"),
        }
    }
}

/// Number of samples, at most `n`, that covers a whole number of fundamental
/// cycles. When the sample rate is a rational multiple of `f0` the count is
/// an exact multiple of the common period, so every harmonic of `f0` is
/// orthogonal over it.
fn whole_cycle_samples(n: usize, dt: f64, f0: f64) -> usize {
    let per_sample = dt * f0;
    for period in 1..=n {
        let cycles = period as f64 * per_sample;
        if (cycles - round(cycles)).abs() < 1e-9 && round(cycles) >= 1.0 {
            return n / period * period;
        }
    }
    let cycles = floor(n as f64 * per_sample);
    (round(cycles / per_sample) as usize).clamp(1, n)
}

/// Amplitude of the `2 f0` Fourier component of `channel` over `[t0, t1)`.
pub fn metric_2w_amplitude(
    log: &TimeSeriesLog,
    channel: &str,
    window: (f64, f64),
    f0: f64,
) -> Result<f64, MetricError> {
    let (t0, t1) = window;
    let cycles = (t1 - t0) * f0;
    if !(cycles >= MIN_CYCLES - 1e-9) {
        return Err(MetricError::WindowTooShort { cycles });
    }
    let (a, b) = log.window(t0, t1)?;
    let x = &log.column(channel)?[a..b];
    let t = &log.time()[a..b];
    let len = whole_cycle_samples(x.len(), log.interval, f0);
    let w = 2.0 * TAU * f0;
    let sum: Complex64 = x[..len]
        .iter()
        .zip(&t[..len])
        .map(|(&v, &tk)| {
            let (s, c) = sin_cos(w * tk);
            Complex64::new(v * c, -v * s)
        })
        .sum();
    Ok(2.0 * sum.norm() / len as f64)
}

/// Time, measured from `from`, after which `channel` stays within
/// `target ± band` to the end of the log. `None` when the last sample is
/// still outside the band.
pub fn settling_time(
    log: &TimeSeriesLog,
    channel: &str,
    from: f64,
    target: f64,
    band: f64,
) -> Result<Option<f64>, MetricError> {
    let t = log.time();
    let x = log.column(channel)?;
    let start = t.partition_point(|&tk| tk < from);
    let outside = |k: usize| !((x[k] - target).abs() <= band);
    match (start..x.len()).rev().find(|&k| outside(k)) {
        None => Ok(Some(0.0)),
        Some(k) if k + 1 == x.len() => Ok(None),
        Some(k) => Ok(Some(t[k + 1] - from)),
    }
}

/// What [`compare_runs`] measures on each channel.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CompareSpec {
    /// Channels to compare; empty compares every channel the logs share.
    pub channels: Vec<String>,
    /// Window for the steady-state mean (s).
    pub steady_window: (f64, f64),
    /// Window for the double-frequency amplitude (s).
    pub oscillation_window: Option<(f64, f64)>,
    /// Settling is measured from this time (s), towards the steady mean.
    pub settle_from: Option<f64>,
    /// Settling band around the steady mean (channel units).
    pub settle_band: f64,
    /// Fundamental frequency (Hz).
    pub f0: f64,
}

impl Default for CompareSpec {
    fn default() -> Self {
        Self {
            channels: Vec::new(),
            steady_window: (0.0, 0.1),
            oscillation_window: None,
            settle_from: None,
            settle_band: 0.02,
            f0: 60.0,
        }
    }
}

/// Metrics of one channel in one run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChannelMetrics {
    pub steady: f64,
    pub settling: Option<f64>,
    pub amplitude_2w: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChannelComparison {
    pub channel: String,
    pub unit: String,
    pub a: ChannelMetrics,
    pub b: ChannelMetrics,
    /// `b - a` for the steady mean.
    pub steady_delta: f64,
    pub settling_delta: Option<f64>,
    pub amplitude_2w_delta: Option<f64>,
    /// `b / a` for the double-frequency amplitude, when `a` is nonzero.
    pub amplitude_2w_ratio: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComparisonReport {
    pub interval: f64,
    pub spec: CompareSpec,
    pub channels: Vec<ChannelComparison>,
}

fn channel_metrics(log: &TimeSeriesLog, name: &str, spec: &CompareSpec) -> Result<ChannelMetrics, MetricError> {
    let steady = log.mean(name, spec.steady_window.0, spec.steady_window.1)?;
    let settling = match spec.settle_from {
        Some(from) => settling_time(log, name, from, steady, spec.settle_band)?,
        None => None,
    };
    let amplitude_2w = match spec.oscillation_window {
        Some(w) => Some(metric_2w_amplitude(log, name, w, spec.f0)?),
        None => None,
    };
    Ok(ChannelMetrics {
        steady,
        settling,
        amplitude_2w,
    })
}

fn both(a: Option<f64>, b: Option<f64>, f: impl Fn(f64, f64) -> f64) -> Option<f64> {
    Some(f(a?, b?))
}

/// Measures the same channels in two runs and reports them side by side.
pub fn compare_runs(a: &TimeSeriesLog, b: &TimeSeriesLog, spec: &CompareSpec) -> Result<ComparisonReport, MetricError> {
    if (a.interval - b.interval).abs() > 1e-9 * a.interval.abs().max(b.interval.abs()) {
        return Err(MetricError::SampleRateMismatch {
            a: a.interval,
            b: b.interval,
        });
    }
    let names: Vec<String> = if spec.channels.is_empty() {
        let mut names = Vec::new();
        for c in a.channels.iter().skip(1).chain(b.channels.iter().skip(1)) {
            if a.index_of(&c.name).is_none() || b.index_of(&c.name).is_none() {
                return Err(MetricError::ChannelMismatch(c.name.clone()));
            }
            if !names.contains(&c.name) {
                names.push(c.name.clone());
            }
        }
        names
    } else {
        spec.channels.clone()
    };
    let mut channels = Vec::with_capacity(names.len());
    for name in names {
        let (Some(ia), Some(_)) = (a.index_of(&name), b.index_of(&name)) else {
            return Err(MetricError::ChannelMismatch(name));
        };
        let ma = channel_metrics(a, &name, spec)?;
        let mb = channel_metrics(b, &name, spec)?;
        channels.push(ChannelComparison {
            unit: a.channels[ia].unit.clone(),
            steady_delta: mb.steady - ma.steady,
            settling_delta: both(ma.settling, mb.settling, |x, y| y - x),
            amplitude_2w_delta: both(ma.amplitude_2w, mb.amplitude_2w, |x, y| y - x),
            amplitude_2w_ratio: both(ma.amplitude_2w, mb.amplitude_2w, |x, y| y / x).filter(|r| r.is_finite()),
            channel: name,
            a: ma,
            b: mb,
        });
    }
    Ok(ComparisonReport {
        interval: a.interval,
        spec: spec.clone(),
        channels,
    })
}
