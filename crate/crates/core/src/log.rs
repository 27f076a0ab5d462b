//! Uniformly sampled, named time series.

use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChannelInfo {
    pub name: String,
    pub unit: String,
}

/// Columns sharing one time axis. Column 0 is always `time`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TimeSeriesLog {
    pub channels: Vec<ChannelInfo>,
    pub columns: Vec<Vec<f64>>,
    /// Sample interval (s).
    pub interval: f64,
    /// Key/value notes describing the run (effective constants, variant, ...).
    pub metadata: Vec<(String, String)>,
}

/// Errors from building or querying a log.
#[derive(Clone, Debug, PartialEq)]
pub enum LogError {
    UnknownChannel(String),
    RaggedColumns,
    NonUniformTime { index: usize },
    WindowOutside { t0: f64, t1: f64 },
}

impl core::fmt::Display for LogError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            LogError::UnknownChannel(n) => write!(f, "unknown channel `{n}`"),
            LogError::RaggedColumns => write!(f, "columns have different lengths"),
            LogError::NonUniformTime { index } => write!(f, "time axis is not uniform at sample {index}"),
            LogError::WindowOutside { t0, t1 } => write!(f, "window [{t0}, {t1}] is not inside the log"),
        }
    }
}

impl TimeSeriesLog {
    /// Empty log with the given channels; a `time` channel is prepended.
    pub fn new(channels: impl IntoIterator<Item = (String, String)>, interval: f64) -> Self {
        let mut info = alloc::vec![ChannelInfo {
            name: "time".into(),
            unit: "s".into(),
        }];
        info.extend(channels.into_iter().map(|(name, unit)| ChannelInfo { name, unit }));
        let columns = info.iter().map(|_| Vec::new()).collect();
        Self {
            channels: info,
            columns,
            interval,
            metadata: Vec::new(),
        }
    }

    /// Rebuilds a log from columns (e.g. read back from a file), checking the
    /// shape and the time axis.
    pub fn from_columns(
        channels: Vec<ChannelInfo>,
        columns: Vec<Vec<f64>>,
        metadata: Vec<(String, String)>,
    ) -> Result<Self, LogError> {
        if channels.len() != columns.len() || columns.iter().any(|c| c.len() != columns[0].len()) {
            return Err(LogError::RaggedColumns);
        }
        if channels.first().map(|c| c.name.as_str()) != Some("time") {
            return Err(LogError::UnknownChannel("time".into()));
        }
        let t = &columns[0];
        let interval = if t.len() > 1 { t[1] - t[0] } else { 0.0 };
        for (index, w) in t.windows(2).enumerate() {
            let d = w[1] - w[0];
            if !(d > 0.0) || (d - interval).abs() > 1e-6 * interval {
                return Err(LogError::NonUniformTime { index: index + 1 });
            }
        }
        Ok(Self {
            channels,
            columns,
            interval,
            metadata,
        })
    }

    /// Appends one row; `values` excludes time.
    pub fn push(&mut self, t: f64, values: &[f64]) {
        debug_assert_eq!(values.len() + 1, self.columns.len());
        self.columns[0].push(t);
        for (col, v) in self.columns[1..].iter_mut().zip(values) {
            col.push(*v);
        }
    }

    pub fn len(&self) -> usize {
        self.columns[0].len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn time(&self) -> &[f64] {
        &self.columns[0]
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.channels.iter().position(|c| c.name == name)
    }

    pub fn column(&self, name: &str) -> Result<&[f64], LogError> {
        self.index_of(name)
            .map(|i| self.columns[i].as_slice())
            .ok_or_else(|| LogError::UnknownChannel(name.into()))
    }

    /// Sample index range `[start, end)` covering `t0 <= t < t1`.
    pub fn window(&self, t0: f64, t1: f64) -> Result<(usize, usize), LogError> {
        let t = self.time();
        let eps = 1e-9 * self.interval.max(1e-12);
        if t.is_empty() || !(t0 < t1) || t0 < t[0] - eps || t1 > t[t.len() - 1] + self.interval + eps {
            return Err(LogError::WindowOutside { t0, t1 });
        }
        let start = t.partition_point(|&x| x < t0 - eps);
        let end = t.partition_point(|&x| x < t1 - eps);
        Ok((start, end))
    }

    /// Mean of a channel over `[t0, t1)`.
    pub fn mean(&self, name: &str, t0: f64, t1: f64) -> Result<f64, LogError> {
        let (a, b) = self.window(t0, t1)?;
        let col = self.column(name)?;
        if b <= a {
            return Err(LogError::WindowOutside { t0, t1 });
        }
        Ok(col[a..b].iter().sum::<f64>() / (b - a) as f64)
    }

    /// Keeps only the named channels (plus time), in the given order.
    pub fn select(&self, names: &[String]) -> Result<Self, LogError> {
        let mut out = Self {
            channels: alloc::vec![self.channels[0].clone()],
            columns: alloc::vec![self.columns[0].clone()],
            interval: self.interval,
            metadata: self.metadata.clone(),
        };
        for n in names.iter().filter(|n| n.as_str() != "time") {
            let i = self.index_of(n).ok_or_else(|| LogError::UnknownChannel(n.clone()))?;
            out.channels.push(self.channels[i].clone());
            out.columns.push(self.columns[i].clone());
        }
        Ok(out)
    }
}
