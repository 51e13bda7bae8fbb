//! Static SVG heatmap of a phase-diagram table.

use std::fmt::Write as _;
use std::path::Path;

use crate::probcalc::weak_curve;
use crate::{Error, Result};

const SIZE: f64 = 480.0;
const MARGIN: f64 = 48.0;
const CURVE_SAMPLES: usize = 400;

#[derive(Clone, Copy, Debug, PartialEq)]
struct Cell {
    delta: f64,
    rho: f64,
    value: f64,
}

fn parse_table(table: &str) -> Result<Vec<Cell>> {
    let mut reader = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_reader(table.as_bytes());
    let headers = reader
        .headers()
        .map_err(|e| Error::MalformedTable(e.to_string()))?
        .clone();
    let col = |name: &str| {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::MalformedTable(format!("missing column '{name}'")))
    };
    let (d, r, p, e) = (col("delta")?, col("rho")?, col("predicted")?, col("empirical")?);
    let mut cells = Vec::new();
    for (line, record) in reader.records().enumerate() {
        let record = record.map_err(|e| Error::MalformedTable(e.to_string()))?;
        let num =
            |i: usize| -> Result<f64> {
                record.get(i).unwrap_or("").parse::<f64>().map_err(|_| {
                    Error::MalformedTable(format!("row {}: bad number in column {}", line + 1, &headers[i]))
                })
            };
        let value = match record.get(e) {
            Some(s) if !s.is_empty() => num(e)?,
            _ => num(p)?,
        };
        cells.push(Cell {
            delta: num(d)?,
            rho: num(r)?,
            value,
        });
    }
    if cells.is_empty() {
        return Err(Error::MalformedTable("phase table has no rows".into()));
    }
    Ok(cells)
}

fn distinct(mut v: Vec<f64>) -> Vec<f64> {
    v.sort_by(f64::total_cmp);
    v.dedup_by(|a, b| (*a - *b).abs() < 1e-9);
    v
}

/// Blue (0) through white (1/2) to red (1).
fn color(value: f64) -> String {
    let v = if value.is_finite() { value.clamp(0.0, 1.0) } else { 0.5 };
    let (r, g, b) = if v < 0.5 {
        let t = v / 0.5;
        (t, t, 1.0)
    } else {
        let t = (1.0 - v) / 0.5;
        (1.0, t, t)
    };
    let c = |x: f64| (x * 255.0).round() as u8;
    format!("#{:02x}{:02x}{:02x}", c(r), c(g), c(b))
}

/// Renders a phase table (columns `delta`, `rho`, `predicted`, `empirical`)
/// as an SVG document: `delta` across, `rho` up, cells coloured by the
/// empirical ratio (or the predicted one where no simulation ran), with the
/// weak threshold curve drawn on top.
pub fn render_svg_heatmap(table: &str) -> Result<String> {
    let cells = parse_table(table)?;
    let deltas = distinct(cells.iter().map(|c| c.delta).collect());
    let rhos = distinct(cells.iter().map(|c| c.rho).collect());
    let (w, h) = (SIZE / deltas.len() as f64, SIZE / rhos.len() as f64);
    let x = |delta: f64| MARGIN + delta * SIZE;
    let y = |rho: f64| MARGIN + (1.0 - rho) * SIZE;

    let mut out = String::new();
    let total = SIZE + 2.0 * MARGIN;
    writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{total}" height="{total}" viewBox="0 0 {total} {total}">"#
    )
    .unwrap();
    writeln!(
        out,
        r#"<rect x="0" y="0" width="{total}" height="{total}" fill="white"/>"#
    )
    .unwrap();
    writeln!(out, r#"<g class="cells">"#).unwrap();
    for c in &cells {
        let i = deltas.iter().position(|d| (d - c.delta).abs() < 1e-9).unwrap();
        let j = rhos.iter().position(|r| (r - c.rho).abs() < 1e-9).unwrap();
        writeln!(
            out,
            r#"<rect x="{:.3}" y="{:.3}" width="{:.3}" height="{:.3}" fill="{}"><title>delta={:.4} rho={:.4} value={:.4}</title></rect>"#,
            MARGIN + i as f64 * w,
            MARGIN + SIZE - (j + 1) as f64 * h,
            w,
            h,
            color(c.value),
            c.delta,
            c.rho,
            c.value
        )
        .unwrap();
    }
    writeln!(out, "</g>").unwrap();

    let points: Vec<String> = (0..=CURVE_SAMPLES)
        .map(|s| {
            let delta = s as f64 / CURVE_SAMPLES as f64;
            format!("{:.3},{:.3}", x(delta), y(weak_curve(delta)))
        })
        .collect();
    writeln!(
        out,
        r#"<polyline class="weak-threshold" fill="none" stroke="black" stroke-width="2" points="{}"/>"#,
        points.join(" ")
    )
    .unwrap();
    writeln!(
        out,
        r#"<rect x="{MARGIN}" y="{MARGIN}" width="{SIZE}" height="{SIZE}" fill="none" stroke="black"/>"#
    )
    .unwrap();
    writeln!(
        out,
        r#"<text x="{:.1}" y="{:.1}" text-anchor="middle" font-family="sans-serif" font-size="14">delta = n/N</text>"#,
        MARGIN + SIZE / 2.0,
        total - 14.0
    )
    .unwrap();
    writeln!(
        out,
        r#"<text x="16" y="{:.1}" text-anchor="middle" font-family="sans-serif" font-size="14" transform="rotate(-90 16 {:.1})">rho = k/n</text>"#,
        MARGIN + SIZE / 2.0,
        MARGIN + SIZE / 2.0
    )
    .unwrap();
    out.push_str("</svg>\n");
    Ok(out)
}

/// Writes [`render_svg_heatmap`] to `path`. Nothing is written if the table
/// cannot be rendered.
pub fn emit_svg_heatmap(table: &str, path: &Path) -> Result<()> {
    let svg = render_svg_heatmap(table)?;
    std::fs::write(path, svg)?;
    Ok(())
}
