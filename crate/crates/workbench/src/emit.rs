//! Report files: JSON (canonical), CSV and SVG views of the fields.

use std::fmt::Write as _;
use std::io;
use std::path::{Path, PathBuf};

use crate::report::{Field, Report};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Json,
    Csv,
    Svg,
}

impl Format {
    pub fn parse_list(s: &str) -> Result<Vec<Format>, String> {
        s.split(',')
            .map(|f| match f.trim() {
                "json" => Ok(Format::Json),
                "csv" => Ok(Format::Csv),
                "svg" => Ok(Format::Svg),
                other => Err(format!("unknown format '{other}' (expected json, csv, svg)")),
            })
            .collect()
    }
}

/// Writes the requested views into `dir` and returns the written paths.
pub fn emit(report: &Report, dir: &Path, formats: &[Format]) -> io::Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir)?;
    let mut written = Vec::new();
    for f in formats {
        match f {
            Format::Json => {
                let p = dir.join(format!("{}.json", report.id));
                std::fs::write(&p, report.to_json())?;
                written.push(p);
            }
            Format::Csv => {
                for field in &report.fields {
                    let p = dir.join(format!("{}.{}.csv", report.id, field.name));
                    std::fs::write(&p, csv(field))?;
                    written.push(p);
                }
            }
            Format::Svg => {
                for field in &report.fields {
                    let p = dir.join(format!("{}.{}.svg", report.id, field.name));
                    std::fs::write(&p, svg(field))?;
                    written.push(p);
                }
            }
        }
    }
    Ok(written)
}

/// `point_index,<x>,<y>,value`; missing values are left empty.
pub fn csv(field: &Field) -> String {
    let mut out = format!("point_index,{},{},value\n", field.x_label, field.y_label);
    let nx = field.x.len();
    for (k, v) in field.values.iter().enumerate() {
        let (i, j) = (k % nx, k / nx);
        let value = v.map(csv_number).unwrap_or_default();
        let _ = writeln!(out, "{k},{},{},{value}", csv_number(field.x[i]), csv_number(field.y[j]));
    }
    out
}

/// Shortest round-trip text; plain decimals in the usual range, exponent form outside it.
fn csv_number(v: f64) -> String {
    let a = v.abs();
    if a == 0.0 || (1e-4..1e15).contains(&a) {
        format!("{v}")
    } else {
        format!("{v:e}")
    }
}

const PALETTE: [&str; 8] = ["#440154", "#3b528b", "#21918c", "#5ec962", "#fde725", "#e66101", "#b2182b", "#542788"];
const MISSING: &str = "#dddddd";

/// Colour ramp (viridis stops) at `s ∈ [0, 1]`.
fn ramp(s: f64) -> String {
    const STOPS: [(f64, f64, f64); 5] =
        [(68.0, 1.0, 84.0), (59.0, 82.0, 139.0), (33.0, 145.0, 140.0), (94.0, 201.0, 98.0), (253.0, 231.0, 37.0)];
    let s = s.clamp(0.0, 1.0) * 4.0;
    let k = (s.floor() as usize).min(3);
    let w = s - k as f64;
    let (a, b) = (STOPS[k], STOPS[k + 1]);
    let mix = |x: f64, y: f64| (x + (y - x) * w).round() as u8;
    format!("#{:02x}{:02x}{:02x}", mix(a.0, b.0), mix(a.1, b.1), mix(a.2, b.2))
}

/// Static SVG 1.1 cell map with a legend.
pub fn svg(field: &Field) -> String {
    let (nx, ny) = (field.x.len().max(1), field.y.len().max(1));
    let plot_w = 640.0;
    let plot_h = (plot_w * ny as f64 / nx as f64).clamp(160.0, 640.0);
    let (cw, ch) = (plot_w / nx as f64, plot_h / ny as f64);
    let (left, top) = (60.0, 30.0);
    let legend_x = left + plot_w + 20.0;
    let width = legend_x + 140.0;
    let height = top + plot_h + 50.0;

    let mut values: Vec<f64> = field.present().collect();
    values.sort_by(f64::total_cmp);
    values.dedup();
    let categorical = field.discrete && !values.is_empty() && values.len() <= PALETTE.len();
    let (lo, hi) = (values.first().copied().unwrap_or(0.0), values.last().copied().unwrap_or(0.0));
    let log = !categorical && lo > 0.0 && hi / lo > 1e3;
    let scaled = |v: f64| {
        let (a, b, x) = if log { (lo.log10(), hi.log10(), v.log10()) } else { (lo, hi, v) };
        if b > a {
            (x - a) / (b - a)
        } else {
            0.5
        }
    };
    let colour = |v: Option<f64>| -> String {
        match v {
            None => MISSING.into(),
            Some(v) if categorical => {
                let k = values.iter().position(|&u| u == v).unwrap_or(0);
                PALETTE[k].into()
            }
            Some(v) => ramp(scaled(v)),
        }
    };

    let mut out = String::new();
    let _ = writeln!(out, r#"<?xml version="1.0" encoding="UTF-8"?>"#);
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{width:.0}" height="{height:.0}" viewBox="0 0 {width:.0} {height:.0}">"#
    );
    let _ = writeln!(out, r#"<title>{}</title>"#, escape(&field.name));
    let _ = writeln!(out, r#"<rect x="0" y="0" width="{width:.0}" height="{height:.0}" fill="white"/>"#);
    let _ = writeln!(out, r#"<g shape-rendering="crispEdges">"#);
    for j in 0..field.y.len() {
        for i in 0..field.x.len() {
            let v = field.values[j * field.x.len() + i];
            // Row 0 at the bottom.
            let y = top + plot_h - (j + 1) as f64 * ch;
            let _ = writeln!(
                out,
                r#"<rect x="{:.3}" y="{:.3}" width="{:.3}" height="{:.3}" fill="{}"/>"#,
                left + i as f64 * cw,
                y,
                cw,
                ch,
                colour(v)
            );
        }
    }
    let _ = writeln!(out, "</g>");
    let _ = writeln!(
        out,
        r#"<rect x="{left:.0}" y="{top:.0}" width="{plot_w:.0}" height="{plot_h:.3}" fill="none" stroke="black"/>"#
    );
    let _ = writeln!(
        out,
        r#"<text x="{:.1}" y="{:.1}" font-family="sans-serif" font-size="13" text-anchor="middle">{}</text>"#,
        left + plot_w / 2.0,
        top + plot_h + 20.0,
        escape(&field.x_label)
    );
    let _ = writeln!(
        out,
        r#"<text x="20" y="{:.1}" font-family="sans-serif" font-size="13" text-anchor="middle" transform="rotate(-90 20 {:.1})">{}</text>"#,
        top + plot_h / 2.0,
        top + plot_h / 2.0,
        escape(&field.y_label)
    );
    let _ = writeln!(
        out,
        r#"<text x="{left:.0}" y="20" font-family="sans-serif" font-size="14">{}</text>"#,
        escape(&field.name)
    );

    // Legend.
    let _ = writeln!(out, r#"<g font-family="sans-serif" font-size="12">"#);
    if categorical {
        for (k, v) in values.iter().enumerate() {
            let y = top + 20.0 * k as f64;
            let _ = writeln!(out, r#"<rect x="{legend_x:.0}" y="{y:.0}" width="14" height="14" fill="{}"/>"#, PALETTE[k]);
            let _ = writeln!(out, r#"<text x="{:.0}" y="{:.0}">{}</text>"#, legend_x + 20.0, y + 12.0, format_value(*v));
        }
    } else if !values.is_empty() {
        let steps = 32;
        let bar_h = 160.0;
        for k in 0..steps {
            let s = 1.0 - k as f64 / (steps - 1) as f64;
            let y = top + bar_h * k as f64 / steps as f64;
            let _ = writeln!(
                out,
                r#"<rect x="{legend_x:.0}" y="{y:.3}" width="14" height="{:.3}" fill="{}"/>"#,
                bar_h / steps as f64 + 0.5,
                ramp(s)
            );
        }
        let _ = writeln!(out, r#"<text x="{:.0}" y="{:.0}">{}</text>"#, legend_x + 20.0, top + 10.0, format_value(hi));
        let _ = writeln!(out, r#"<text x="{:.0}" y="{:.0}">{}</text>"#, legend_x + 20.0, top + bar_h, format_value(lo));
        if log {
            let _ = writeln!(out, r#"<text x="{legend_x:.0}" y="{:.0}">log scale</text>"#, top + bar_h + 18.0);
        }
    }
    if field.values.iter().any(Option::is_none) {
        let y = top + 200.0;
        let _ = writeln!(out, r#"<rect x="{legend_x:.0}" y="{y:.0}" width="14" height="14" fill="{MISSING}"/>"#);
        let _ = writeln!(out, r#"<text x="{:.0}" y="{:.0}">no value</text>"#, legend_x + 20.0, y + 12.0);
    }
    let _ = writeln!(out, "</g>");
    let _ = writeln!(out, "</svg>");
    out
}

fn format_value(v: f64) -> String {
    if v.fract() == 0.0 && v.abs() < 1e6 {
        format!("{v:.0}")
    } else {
        format!("{v:.3e}")
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn field(values: Vec<Option<f64>>, discrete: bool) -> Field {
        Field::new("rank", ("psi", "t"), vec![0.0, 1.0], vec![0.0, 1.0], values, discrete)
    }

    #[test]
    fn uniform_discrete_field_uses_one_colour() {
        let s = svg(&field(vec![Some(1.0); 4], true));
        let cells = s.split("<g shape-rendering=\"crispEdges\">").nth(1).unwrap().split("</g>").next().unwrap();
        let fills: std::collections::BTreeSet<&str> =
            cells.lines().filter_map(|l| l.split("fill=\"").nth(1)).collect();
        assert_eq!(fills.len(), 1, "{fills:?}");
        assert!(s.contains(">1</text>"));
    }

    #[test]
    fn csv_has_header_and_one_row_per_point() {
        let c = csv(&field(vec![Some(1.0), None, Some(2.5), Some(0.0)], false));
        let lines: Vec<&str> = c.lines().collect();
        assert_eq!(lines[0], "point_index,psi,t,value");
        assert_eq!(lines.len(), 5);
        assert_eq!(lines[2], "1,1,0,");
        assert_eq!(lines[3], "2,0,1,2.5");
        assert_eq!(csv_number(1.5e-17), "1.5e-17");
        assert_eq!(csv_number(-0.0).parse::<f64>().unwrap(), 0.0);
    }

    #[test]
    fn formats_parse() {
        assert_eq!(Format::parse_list("json,svg").unwrap(), vec![Format::Json, Format::Svg]);
        assert!(Format::parse_list("json,png").is_err());
    }
}
