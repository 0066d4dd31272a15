//! SVG rendering of triangulations and CSV tables.

use std::fmt::Write as _;
use std::io::Write;

use crate::error::Result;
use crate::experiments::{ConstantsRow, QuadraticDemo, ShapeClass};
use crate::geometry::Triangle;

const SVG_SIZE: f64 = 800.0;

/// One polygon per triangle, filled with `fills[i]`, y axis pointing up.
pub fn svg_mesh(triangles: &[Triangle], fills: &[&str]) -> String {
    assert_eq!(triangles.len(), fills.len());
    let (mut x0, mut y0, mut x1, mut y1) = (f64::MAX, f64::MAX, f64::MIN, f64::MIN);
    for v in triangles.iter().flat_map(|t| t.vertices) {
        x0 = x0.min(v.x);
        y0 = y0.min(v.y);
        x1 = x1.max(v.x);
        y1 = y1.max(v.y);
    }
    if triangles.is_empty() {
        (x0, y0, x1, y1) = (0.0, 0.0, 1.0, 1.0);
    }
    let scale = SVG_SIZE / (x1 - x0).max(y1 - y0);
    let (w, h) = ((x1 - x0) * scale, (y1 - y0) * scale);
    let stroke = 0.5;
    let mut out = String::new();
    let _ = writeln!(out, r#"<?xml version="1.0" encoding="UTF-8"?>"#);
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{w:.2}" height="{h:.2}" viewBox="{:.2} {:.2} {:.2} {:.2}">"#,
        -stroke,
        -stroke,
        w + 2.0 * stroke,
        h + 2.0 * stroke
    );
    let _ = writeln!(
        out,
        r#"<g stroke="black" stroke-width="{stroke}" stroke-linejoin="round">"#
    );
    for (t, fill) in triangles.iter().zip(fills) {
        let pts: Vec<String> = t
            .vertices
            .iter()
            .map(|v| format!("{:.3},{:.3}", (v.x - x0) * scale, (y1 - v.y) * scale))
            .collect();
        let _ = writeln!(
            out,
            r#"<polygon points="{}" fill="{fill}"/>"#,
            pts.join(" ")
        );
    }
    out.push_str("</g>\n</svg>\n");
    out
}

/// Last level of a quadratic demo colored by shape class.
pub fn quadratic_demo_svg(demo: &QuadraticDemo) -> String {
    let level = demo.hierarchy.depth();
    let tris: Vec<Triangle> = demo.hierarchy.level(level).copied().collect();
    let fills: Vec<&str> = demo.classes.iter().map(|c| c.fill()).collect();
    svg_mesh(&tris, &fills)
}

pub fn write_constants_csv<W: Write>(rows: &[ConstantsRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["delta", "N", "U", "I", "A", "C_U", "C_I", "C_A"])?;
    for r in rows {
        w.write_record([
            r.delta.to_string(),
            r.n.to_string(),
            format!("{:.6}", r.constants.u),
            format!("{:.6}", r.constants.i),
            format!("{:.6}", r.constants.a),
            format!("{:.6}", r.c_u),
            format!("{:.6}", r.c_i),
            format!("{:.6}", r.c_a),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_demo_csv<W: Write>(demo: &QuadraticDemo, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        "level",
        "triangles",
        "adapted",
        "adapted_to_q_only",
        "other",
        "fraction_rho_q_le_4sqrt3",
    ])?;
    w.write_record([
        demo.hierarchy.depth().to_string(),
        demo.classes.len().to_string(),
        format!("{:.6}", demo.fraction(ShapeClass::Adapted)),
        format!("{:.6}", demo.fraction(ShapeClass::AdaptedToQOnly)),
        format!("{:.6}", demo.fraction(ShapeClass::Other)),
        format!("{:.6}", demo.fraction_adapted()),
    ])?;
    w.flush()?;
    Ok(())
}

/// Generic table with a header row and numeric rows.
pub fn write_rows_csv<W: Write>(header: &[&str], rows: &[Vec<f64>], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(header)?;
    for row in rows {
        w.write_record(row.iter().map(|v| format!("{v}")))?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiments::unit_square_d0;

    #[test]
    fn one_polygon_per_triangle() {
        let d0 = unit_square_d0();
        let svg = svg_mesh(&d0, &["#ffffff", "#a0a0a0"]);
        assert_eq!(svg.matches("<polygon").count(), 2);
        assert!(svg.contains(r#"points="0.000,800.000 800.000,800.000 800.000,0.000""#));
        assert!(svg.trim_end().ends_with("</svg>"));
    }

    #[test]
    fn csv_quoting() {
        let mut buf = Vec::new();
        write_rows_csv(&["a,b", "c"], &[vec![1.0, 0.5]], &mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "\"a,b\",c\n1,0.5\n");
    }
}
