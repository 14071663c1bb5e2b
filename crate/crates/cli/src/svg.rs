//! Deterministic SVG rendering of raster, trace, and kernel CSVs.
//!
//! Layout is fixed: an 800x400 canvas with a 50 px margin, time mapped as
//! `x = margin + t / t_max * span`. All coordinates print with two decimals,
//! so a given CSV always renders to identical bytes.

use std::fmt::Write as _;

use spikesim_core::error::{Error, Result};

pub const WIDTH: f64 = 800.0;
pub const HEIGHT: f64 = 400.0;
pub const MARGIN: f64 = 50.0;

const PALETTE: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf"];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PlotKind {
    Raster,
    Trace,
    Kernel,
}

struct Canvas {
    body: String,
}

impl Canvas {
    fn new(title: &str) -> Self {
        let mut body = String::new();
        let _ = writeln!(
            body,
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">"#
        );
        let _ = writeln!(
            body,
            r#"<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#
        );
        let _ = writeln!(
            body,
            r#"<text x="{:.2}" y="{:.2}" font-family="monospace" font-size="14">{title}</text>"#,
            MARGIN,
            MARGIN - 20.0
        );
        // Axes.
        let _ = writeln!(
            body,
            r#"<line x1="{m:.2}" y1="{b:.2}" x2="{r:.2}" y2="{b:.2}" stroke="black" stroke-width="1"/>"#,
            m = MARGIN,
            b = HEIGHT - MARGIN,
            r = WIDTH - MARGIN,
        );
        let _ = writeln!(
            body,
            r#"<line x1="{m:.2}" y1="{t:.2}" x2="{m:.2}" y2="{b:.2}" stroke="black" stroke-width="1"/>"#,
            m = MARGIN,
            t = MARGIN,
            b = HEIGHT - MARGIN,
        );
        Canvas { body }
    }

    fn label(&mut self, x: f64, y: f64, text: &str) {
        let _ = writeln!(
            self.body,
            r#"<text x="{x:.2}" y="{y:.2}" font-family="monospace" font-size="11">{text}</text>"#
        );
    }

    fn line(&mut self, x1: f64, y1: f64, x2: f64, y2: f64, stroke: &str) {
        let _ = writeln!(
            self.body,
            r#"<line x1="{x1:.2}" y1="{y1:.2}" x2="{x2:.2}" y2="{y2:.2}" stroke="{stroke}" stroke-width="1"/>"#
        );
    }

    fn polyline(&mut self, points: &[(f64, f64)], stroke: &str) {
        if points.is_empty() {
            return;
        }
        let mut coords = String::new();
        for (x, y) in points {
            let _ = write!(coords, "{x:.2},{y:.2} ");
        }
        let _ = writeln!(
            self.body,
            r#"<polyline points="{}" fill="none" stroke="{stroke}" stroke-width="1.5"/>"#,
            coords.trim_end()
        );
    }

    fn finish(mut self) -> String {
        self.body.push_str("</svg>\n");
        self.body
    }
}

pub fn x_of(t: f64, t_max: f64) -> f64 {
    let span = WIDTH - 2.0 * MARGIN;
    MARGIN + t / t_max * span
}

fn y_of(v: f64, v_min: f64, v_max: f64) -> f64 {
    let span = HEIGHT - 2.0 * MARGIN;
    let range = if v_max > v_min { v_max - v_min } else { 1.0 };
    HEIGHT - MARGIN - (v - v_min) / range * span
}

fn parse_header(text: &str, expected: &str) -> Result<()> {
    match text.lines().next() {
        Some(h) if h == expected => Ok(()),
        other => Err(Error::format(format!(
            "expected CSV header {expected:?}, got {other:?}"
        ))),
    }
}

/// Raster CSV (`t_ms,neuron_id`) to tick marks, one row per neuron.
pub fn render_raster(csv: &str) -> Result<String> {
    parse_header(csv, "t_ms,neuron_id")?;
    let mut events: Vec<(f64, usize)> = Vec::new();
    for line in csv.lines().skip(1).filter(|l| !l.is_empty()) {
        let (t, id) = line
            .split_once(',')
            .ok_or_else(|| Error::format(format!("bad raster row {line:?}")))?;
        events.push((
            t.parse().map_err(|_| Error::format(format!("bad time {t:?}")))?,
            id.parse().map_err(|_| Error::format(format!("bad id {id:?}")))?,
        ));
    }
    let t_max = events.iter().map(|(t, _)| *t).fold(0.0, f64::max).max(1.0);
    let mut ids: Vec<usize> = events.iter().map(|(_, id)| *id).collect();
    ids.sort_unstable();
    ids.dedup();

    let mut canvas = Canvas::new("spike raster");
    canvas.label(MARGIN, HEIGHT - MARGIN + 20.0, "0 ms");
    canvas.label(WIDTH - MARGIN - 40.0, HEIGHT - MARGIN + 20.0, &format!("{t_max:.1} ms"));
    let rows = ids.len().max(1) as f64;
    let row_height = (HEIGHT - 2.0 * MARGIN) / rows;
    let tick = (row_height * 0.4).clamp(2.0, 8.0);
    for (row, id) in ids.iter().enumerate() {
        let y = MARGIN + (row as f64 + 0.5) * row_height;
        canvas.label(8.0, y + 4.0, &format!("n{id}"));
        for (t, event_id) in &events {
            if event_id == id {
                let x = x_of(*t, t_max);
                canvas.line(x, y - tick, x, y + tick, PALETTE[row % PALETTE.len()]);
            }
        }
    }
    Ok(canvas.finish())
}

/// Trace CSV (`t_ms,neuron_id,var,value`) to one polyline per (neuron, var).
pub fn render_trace(csv: &str) -> Result<String> {
    parse_header(csv, "t_ms,neuron_id,var,value")?;
    // Series keyed by (neuron, var) in first-appearance order.
    let mut order: Vec<(String, Vec<(f64, f64)>)> = Vec::new();
    for line in csv.lines().skip(1).filter(|l| !l.is_empty()) {
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 4 {
            return Err(Error::format(format!("bad trace row {line:?}")));
        }
        let t: f64 = fields[0]
            .parse()
            .map_err(|_| Error::format(format!("bad time {:?}", fields[0])))?;
        let value: f64 = fields[3]
            .parse()
            .map_err(|_| Error::format(format!("bad value {:?}", fields[3])))?;
        let key = format!("n{} {}", fields[1], fields[2]);
        match order.iter_mut().find(|(k, _)| *k == key) {
            Some((_, series)) => series.push((t, value)),
            None => order.push((key, vec![(t, value)])),
        }
    }
    let t_max = order
        .iter()
        .flat_map(|(_, s)| s.iter().map(|(t, _)| *t))
        .fold(0.0, f64::max)
        .max(1.0);
    let v_min = order
        .iter()
        .flat_map(|(_, s)| s.iter().map(|(_, v)| *v))
        .fold(f64::INFINITY, f64::min);
    let v_max = order
        .iter()
        .flat_map(|(_, s)| s.iter().map(|(_, v)| *v))
        .fold(f64::NEG_INFINITY, f64::max);
    let (v_min, v_max) = if order.is_empty() { (0.0, 1.0) } else { (v_min, v_max) };

    let mut canvas = Canvas::new("state traces");
    canvas.label(MARGIN, HEIGHT - MARGIN + 20.0, "0 ms");
    canvas.label(WIDTH - MARGIN - 40.0, HEIGHT - MARGIN + 20.0, &format!("{t_max:.1} ms"));
    canvas.label(4.0, MARGIN + 4.0, &format!("{v_max:.1}"));
    canvas.label(4.0, HEIGHT - MARGIN + 4.0, &format!("{v_min:.1}"));
    for (idx, (key, series)) in order.iter().enumerate() {
        let color = PALETTE[idx % PALETTE.len()];
        let points: Vec<(f64, f64)> = series
            .iter()
            .map(|(t, v)| (x_of(*t, t_max), y_of(*v, v_min, v_max)))
            .collect();
        canvas.polyline(&points, color);
        canvas.label(
            WIDTH - MARGIN + 2.0,
            MARGIN + 14.0 * idx as f64 + 10.0,
            key,
        );
    }
    Ok(canvas.finish())
}

/// Kernel CSV (`dt_ms,stdp,sapr`) to the two pairing-window polylines.
pub fn render_kernel(csv: &str) -> Result<String> {
    parse_header(csv, "dt_ms,stdp,sapr")?;
    let mut rows: Vec<(f64, f64, f64)> = Vec::new();
    for line in csv.lines().skip(1).filter(|l| !l.is_empty()) {
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 3 {
            return Err(Error::format(format!("bad kernel row {line:?}")));
        }
        let parse = |s: &str| -> Result<f64> {
            s.parse().map_err(|_| Error::format(format!("bad kernel value {s:?}")))
        };
        rows.push((parse(fields[0])?, parse(fields[1])?, parse(fields[2])?));
    }
    if rows.is_empty() {
        return Err(Error::format("kernel CSV has no rows"));
    }
    let dt_min = rows.iter().map(|r| r.0).fold(f64::INFINITY, f64::min);
    let dt_max = rows.iter().map(|r| r.0).fold(f64::NEG_INFINITY, f64::max);
    let v_max = rows
        .iter()
        .flat_map(|r| [r.1.abs(), r.2.abs()])
        .fold(1e-12, f64::max);

    let span = WIDTH - 2.0 * MARGIN;
    let x_of_dt =
        |dt: f64| MARGIN + (dt - dt_min) / (dt_max - dt_min).max(1e-12) * span;
    let y_mid = HEIGHT / 2.0;
    let y_of_v = |v: f64| y_mid - v / v_max * (HEIGHT / 2.0 - MARGIN);

    let mut canvas = Canvas::new("pairing windows: stdp vs sapr");
    // Zero axes.
    canvas.line(MARGIN, y_mid, WIDTH - MARGIN, y_mid, "#888888");
    canvas.line(x_of_dt(0.0), MARGIN, x_of_dt(0.0), HEIGHT - MARGIN, "#888888");
    canvas.label(MARGIN, HEIGHT - MARGIN + 20.0, &format!("{dt_min:.0} ms"));
    canvas.label(WIDTH - MARGIN - 40.0, HEIGHT - MARGIN + 20.0, &format!("{dt_max:.0} ms"));
    let stdp: Vec<(f64, f64)> = rows.iter().map(|r| (x_of_dt(r.0), y_of_v(r.1))).collect();
    let sapr: Vec<(f64, f64)> = rows.iter().map(|r| (x_of_dt(r.0), y_of_v(r.2))).collect();
    canvas.polyline(&stdp, PALETTE[0]);
    canvas.polyline(&sapr, PALETTE[4]);
    canvas.label(WIDTH - MARGIN + 2.0, MARGIN + 10.0, "stdp");
    canvas.label(WIDTH - MARGIN + 2.0, MARGIN + 24.0, "sapr");
    Ok(canvas.finish())
}

pub fn render(kind: PlotKind, csv: &str) -> Result<String> {
    match kind {
        PlotKind::Raster => render_raster(csv),
        PlotKind::Trace => render_trace(csv),
        PlotKind::Kernel => render_kernel(csv),
    }
}
