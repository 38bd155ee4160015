//! Locale-free number formatting and the CSV / JSON / SVG writers.

use std::fmt::Write as _;

use serde::{Serialize, Serializer};

use crate::convexity::{Bbox, SliceCurve};

/// `printf("%.17g")`: 17 significant digits, trailing zeros removed. Round
/// trips every `f64`.
pub fn fmt17(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return if x.is_sign_negative() {
            "-0".into()
        } else {
            "0".into()
        };
    }
    let sci = format!("{:.16e}", x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent in {:e} output");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-4..17).contains(&exp) {
        let decimals = (16 - exp).max(0) as usize;
        trim_zeros(&format!("{:.*}", decimals, x))
    } else {
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{}e{}{:02}", trim_zeros(mantissa), sign, exp.abs())
    }
}

fn trim_zeros(s: &str) -> String {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s.to_string()
    }
}

/// A float that serializes as a JSON number written with [`fmt17`]
/// (`null` when not finite).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct F17(pub f64);

impl Serialize for F17 {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        if !self.0.is_finite() {
            return serializer.serialize_none();
        }
        let n: serde_json::Number = fmt17(self.0).parse().map_err(serde::ser::Error::custom)?;
        n.serialize(serializer)
    }
}

/// Quotes a CSV field when it contains a separator, quote or line break.
pub fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n', '\r']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

pub fn csv_line<S: AsRef<str>>(fields: &[S]) -> String {
    let mut line = fields
        .iter()
        .map(|f| csv_field(f.as_ref()))
        .collect::<Vec<_>>()
        .join(",");
    line.push('\n');
    line
}

const SVG_SIZE: f64 = 640.0;
const SVG_MARGIN: f64 = 48.0;

/// Both slice curves over `bbox`, with axes, as an SVG 1.1 document.
pub fn slice_svg(c: f64, bbox: &Bbox, curves: &[SliceCurve]) -> String {
    let plot = SVG_SIZE - 2.0 * SVG_MARGIN;
    let sx = plot / (bbox.v1_max - bbox.v1_min);
    let sy = plot / (bbox.u2_max - bbox.u2_min);
    let px = |x: f64| SVG_MARGIN + (x - bbox.v1_min) * sx;
    let py = |y: f64| SVG_MARGIN + (bbox.u2_max - y) * sy;
    let styles = ["#1f4e9c", "#c0392b"];

    let mut s = String::new();
    let _ = writeln!(s, r#"<?xml version="1.0" encoding="UTF-8"?>"#);
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{0}" height="{0}" viewBox="0 0 {0} {0}">"#,
        SVG_SIZE
    );
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<rect x="{m}" y="{m}" width="{p}" height="{p}" fill="none" stroke="black" stroke-width="1"/>"#,
        m = SVG_MARGIN,
        p = plot
    );
    if bbox.v1_min < 0.0 && bbox.v1_max > 0.0 {
        let x = px(0.0);
        let _ = writeln!(
            s,
            r#"<line x1="{x:.3}" y1="{:.3}" x2="{x:.3}" y2="{:.3}" stroke="gray" stroke-width="0.5"/>"#,
            SVG_MARGIN,
            SVG_MARGIN + plot
        );
    }
    if bbox.u2_min < 0.0 && bbox.u2_max > 0.0 {
        let y = py(0.0);
        let _ = writeln!(
            s,
            r#"<line x1="{:.3}" y1="{y:.3}" x2="{:.3}" y2="{y:.3}" stroke="gray" stroke-width="0.5"/>"#,
            SVG_MARGIN,
            SVG_MARGIN + plot
        );
    }
    let label = |s: &mut String, x: f64, y: f64, anchor: &str, text: &str| {
        let _ = writeln!(
            s,
            r#"<text x="{x:.3}" y="{y:.3}" font-family="sans-serif" font-size="12" text-anchor="{anchor}">{text}</text>"#
        );
    };
    label(
        &mut s,
        SVG_MARGIN,
        SVG_SIZE - 18.0,
        "middle",
        &fmt17(bbox.v1_min),
    );
    label(
        &mut s,
        SVG_MARGIN + plot,
        SVG_SIZE - 18.0,
        "middle",
        &fmt17(bbox.v1_max),
    );
    label(&mut s, SVG_SIZE / 2.0, SVG_SIZE - 8.0, "middle", "v1");
    label(
        &mut s,
        SVG_MARGIN - 6.0,
        SVG_MARGIN + plot,
        "end",
        &fmt17(bbox.u2_min),
    );
    label(
        &mut s,
        SVG_MARGIN - 6.0,
        SVG_MARGIN + 4.0,
        "end",
        &fmt17(bbox.u2_max),
    );
    label(&mut s, 14.0, SVG_SIZE / 2.0, "middle", "u2");
    label(
        &mut s,
        SVG_SIZE / 2.0,
        24.0,
        "middle",
        &format!("c = {}", fmt17(c)),
    );

    for (k, curve) in curves.iter().enumerate() {
        let color = styles[k % styles.len()];
        let dash = if k % 2 == 1 {
            r#" stroke-dasharray="6 3""#
        } else {
            ""
        };
        let _ = writeln!(
            s,
            r#"<g id="{}" fill="none" stroke="{color}" stroke-width="1.5"{dash}>"#,
            curve.id
        );
        for line in &curve.polylines {
            let pts: Vec<String> = line
                .iter()
                .map(|p| format!("{:.3},{:.3}", px(p[0]), py(p[1])))
                .collect();
            let _ = writeln!(s, r#"<polyline points="{}"/>"#, pts.join(" "));
        }
        let _ = writeln!(s, "</g>");
        let ly = SVG_MARGIN + 16.0 + 16.0 * k as f64;
        let lx = SVG_MARGIN + plot - 110.0;
        let _ = writeln!(
            s,
            r#"<line x1="{lx:.3}" y1="{ly:.3}" x2="{:.3}" y2="{ly:.3}" stroke="{color}" stroke-width="1.5"{dash}/>"#,
            lx + 24.0
        );
        label(&mut s, lx + 30.0, ly + 4.0, "start", &curve.id.to_string());
    }
    s.push_str("</svg>\n");
    s
}
