//! CSV logs: a block of `# key: value` metadata lines, a header row of
//! `name [unit]` cells with `time [s]` first, then one row per sample.
//! Numbers use the shortest text that parses back to the same `f64`.

use std::io::{self, Write};

use thiserror::Error;
use wtsim_core::log::{ChannelInfo, LogError, TimeSeriesLog};

#[derive(Debug, Error)]
pub enum CsvError {
    #[error(transparent)]
    Io(#[from] io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error("line {line}: {message}")]
    Format { line: usize, message: String },
    #[error("{0}")]
    Log(LogError),
}

fn one_line(s: &str) -> String {
    s.replace(['\r', '\n'], " ")
}

pub fn write_csv<W: Write>(log: &TimeSeriesLog, out: W) -> Result<(), CsvError> {
    let mut out = io::BufWriter::new(out);
    for (k, v) in &log.metadata {
        writeln!(out, "# {}: {}", one_line(k), one_line(v))?;
    }
    let mut w = csv::WriterBuilder::new().from_writer(out);
    w.write_record(log.channels.iter().map(|c| format!("{} [{}]", c.name, c.unit)))?;
    let mut row = Vec::with_capacity(log.columns.len());
    for k in 0..log.len() {
        row.clear();
        row.extend(log.columns.iter().map(|c| format!("{:?}", c[k])));
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

fn parse_header(cell: &str) -> ChannelInfo {
    match cell.trim().strip_suffix(']').and_then(|s| s.rsplit_once(" [")) {
        Some((name, unit)) => ChannelInfo {
            name: name.to_string(),
            unit: unit.to_string(),
        },
        None => ChannelInfo {
            name: cell.trim().to_string(),
            unit: String::new(),
        },
    }
}

pub fn read_csv(text: &str) -> Result<TimeSeriesLog, CsvError> {
    let mut metadata = Vec::new();
    let mut body = 0;
    let mut lines = 0;
    for line in text.split_inclusive('\n') {
        let Some(rest) = line.strip_prefix('#') else { break };
        lines += 1;
        body += line.len();
        let rest = rest.trim();
        if let Some((k, v)) = rest.split_once(": ") {
            metadata.push((k.to_string(), v.to_string()));
        }
    }
    let mut r = csv::ReaderBuilder::new().from_reader(text[body..].as_bytes());
    let channels: Vec<ChannelInfo> = r.headers()?.iter().map(parse_header).collect();
    let mut columns = vec![Vec::new(); channels.len()];
    for (n, rec) in r.records().enumerate() {
        let rec = rec?;
        let line = lines + n + 2;
        if rec.len() != channels.len() {
            return Err(CsvError::Format {
                line,
                message: format!("{} fields, header has {}", rec.len(), channels.len()),
            });
        }
        for (col, cell) in columns.iter_mut().zip(rec.iter()) {
            col.push(cell.trim().parse::<f64>().map_err(|e| CsvError::Format {
                line,
                message: format!("`{cell}`: {e}"),
            })?);
        }
    }
    TimeSeriesLog::from_columns(channels, columns, metadata).map_err(CsvError::Log)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trips_exactly() {
        let mut log = TimeSeriesLog::new([("p".into(), "pu".into()), ("v_dc".into(), "pu".into())], 0.1);
        log.metadata.push(("scenario".into(), "demo\nwith newline".into()));
        for k in 0..4 {
            let t = k as f64 * 0.1;
            log.push(t, &[1.0 / 3.0 + t, -1e-300]);
        }
        let mut buf = Vec::new();
        write_csv(&log, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("# scenario: demo with newline\ntime [s],p [pu],v_dc [pu]\n"));
        let back = read_csv(&text).unwrap();
        assert_eq!(back.columns, log.columns);
        assert_eq!(back.channels, log.channels);
        assert_eq!(back.metadata[0].1, "demo with newline");
    }

    #[test]
    fn reports_bad_cells_with_line_numbers() {
        let e = read_csv("# a: b\ntime [s],x [pu]\n0,1\n1,oops\n").unwrap_err();
        assert!(matches!(e, CsvError::Format { line: 4, .. }), "{e}");
    }
}
