//! Static SVG line plots, one channel against time per file.

use std::fmt::Write;

const WIDTH: f64 = 800.0;
const HEIGHT: f64 = 320.0;
const LEFT: f64 = 70.0;
const RIGHT: f64 = 20.0;
const TOP: f64 = 30.0;
const BOTTOM: f64 = 45.0;

/// Tick positions at 1, 2 or 5 times a power of ten covering `[lo, hi]`.
fn ticks(lo: f64, hi: f64, target: usize) -> Vec<f64> {
    let span = hi - lo;
    let raw = span / target as f64;
    let mag = 10f64.powf(raw.log10().floor());
    let step = [1.0, 2.0, 5.0, 10.0]
        .iter()
        .map(|m| m * mag)
        .find(|s| span / s <= target as f64)
        .unwrap_or(10.0 * mag);
    let first = (lo / step).ceil() as i64;
    let last = (hi / step).floor() as i64;
    (first..=last).map(|k| k as f64 * step).collect()
}

fn label(v: f64) -> String {
    let s = format!("{:.6}", v);
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s == "-0" { "0".into() } else { s.into() }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Renders `values` against `time`. Long series are reduced to the minimum
/// and maximum of each horizontal pixel so spikes survive.
pub fn line_plot(time: &[f64], values: &[f64], title: &str, unit: &str) -> String {
    let finite = values.iter().copied().filter(|v| v.is_finite());
    let (mut lo, mut hi) = finite.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(v), b.max(v)));
    if !lo.is_finite() {
        (lo, hi) = (0.0, 1.0);
    }
    if hi - lo < 1e-9 * hi.abs().max(1.0) {
        let pad = 0.05 * hi.abs().max(1e-3);
        lo -= pad;
        hi += pad;
    } else {
        let pad = 0.05 * (hi - lo);
        lo -= pad;
        hi += pad;
    }
    let (t0, t1) = match (time.first(), time.last()) {
        (Some(&a), Some(&b)) if b > a => (a, b),
        (Some(&a), _) => (a, a + 1.0),
        _ => (0.0, 1.0),
    };
    let pw = WIDTH - LEFT - RIGHT;
    let ph = HEIGHT - TOP - BOTTOM;
    let x = |t: f64| LEFT + (t - t0) / (t1 - t0) * pw;
    let y = |v: f64| TOP + (hi - v) / (hi - lo) * ph;

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="11">"#
    );
    let _ = writeln!(svg, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(
        svg,
        r#"<text x="{}" y="18" text-anchor="middle" font-size="13">{}</text>"#,
        WIDTH / 2.0,
        escape(title)
    );
    for v in ticks(lo, hi, 6) {
        let yy = y(v);
        let _ = writeln!(
            svg,
            r##"<line x1="{LEFT}" y1="{yy:.2}" x2="{:.2}" y2="{yy:.2}" stroke="#e0e0e0"/><text x="{}" y="{:.2}" text-anchor="end">{}</text>"##,
            WIDTH - RIGHT,
            LEFT - 6.0,
            yy + 4.0,
            label(v)
        );
    }
    for t in ticks(t0, t1, 8) {
        let xx = x(t);
        let _ = writeln!(
            svg,
            r##"<line x1="{xx:.2}" y1="{TOP}" x2="{xx:.2}" y2="{:.2}" stroke="#e0e0e0"/><text x="{xx:.2}" y="{:.2}" text-anchor="middle">{}</text>"##,
            TOP + ph,
            TOP + ph + 16.0,
            label(t)
        );
    }
    let _ = writeln!(
        svg,
        r##"<rect x="{LEFT}" y="{TOP}" width="{pw}" height="{ph}" fill="none" stroke="#404040"/>"##
    );
    let _ = writeln!(
        svg,
        r#"<text x="{}" y="{}" text-anchor="middle">time [s]</text>"#,
        LEFT + pw / 2.0,
        HEIGHT - 8.0
    );
    let _ = writeln!(
        svg,
        r#"<text x="14" y="{}" text-anchor="middle" transform="rotate(-90 14 {})">[{}]</text>"#,
        TOP + ph / 2.0,
        TOP + ph / 2.0,
        escape(unit)
    );

    let mut points = String::new();
    let columns = pw as usize;
    if values.len() > 2 * columns {
        let mut k = 0;
        for c in 0..columns {
            let t_end = t0 + (c + 1) as f64 / columns as f64 * (t1 - t0);
            let (mut a, mut b) = (f64::INFINITY, f64::NEG_INFINITY);
            let (mut ia, mut ib) = (k, k);
            while k < values.len() && (time[k] <= t_end || c + 1 == columns) {
                let v = values[k];
                if v < a {
                    (a, ia) = (v, k);
                }
                if v > b {
                    (b, ib) = (v, k);
                }
                k += 1;
            }
            if a.is_finite() {
                for i in if ia <= ib { [ia, ib] } else { [ib, ia] } {
                    let _ = write!(points, "{:.2},{:.2} ", x(time[i]), y(values[i]));
                }
            }
        }
    } else {
        for (t, v) in time.iter().zip(values).filter(|(_, v)| v.is_finite()) {
            let _ = write!(points, "{:.2},{:.2} ", x(*t), y(*v));
        }
    }
    let _ = writeln!(
        svg,
        r##"<polyline fill="none" stroke="#1f77b4" stroke-width="1.2" points="{}"/>"##,
        points.trim_end()
    );
    svg.push_str("</svg>\n");
    svg
}
