//! Static SVG heatmaps of 2-D fields.

use std::fmt::Write;

/// Cell colour for `t` in `[0, 1]`: a straight line in RGB from blue to red.
fn ramp(t: f64) -> (u8, u8, u8) {
    let lerp = |a: f64, b: f64| (a + (b - a) * t).round() as u8;
    (lerp(49.0, 215.0), lerp(54.0, 48.0), lerp(149.0, 39.0))
}

/// Renders a `nx` by `ny` grid of optional values (row-major with the first
/// axis slowest, `None` for skipped cells) as coloured rectangles. Colours
/// are an affine function of the value between the observed minimum and
/// maximum; skipped cells are left blank.
pub fn heatmap(values: &[Option<f64>], nx: usize, ny: usize, title: &str) -> String {
    assert_eq!(values.len(), nx * ny, "one value per cell");
    let cell = 16usize.max(480 / nx.max(ny).max(1));
    let (w, h) = (nx * cell, ny * cell);
    let present = values.iter().flatten();
    let lo = present.clone().copied().fold(f64::INFINITY, f64::min);
    let hi = present.copied().fold(f64::NEG_INFINITY, f64::max);
    let span = if hi > lo { hi - lo } else { 1.0 };

    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{}" height="{}" viewBox="0 0 {} {}">"#,
        w,
        h + 40,
        w,
        h + 40
    );
    let _ = writeln!(out, "<title>{}</title>", escape(title));
    for i in 0..nx {
        for j in 0..ny {
            let Some(v) = values[i * ny + j] else { continue };
            let (r, g, b) = ramp(if hi > lo { (v - lo) / span } else { 0.5 });
            // The second axis points up.
            let _ = writeln!(
                out,
                r#"<rect x="{}" y="{}" width="{cell}" height="{cell}" fill="rgb({r},{g},{b})"><title>{v}</title></rect>"#,
                i * cell,
                (ny - 1 - j) * cell,
            );
        }
    }
    let _ = writeln!(
        out,
        r#"<text x="4" y="{}" font-family="monospace" font-size="12">min {lo} max {hi}</text>"#,
        h + 24
    );
    out.push_str("</svg>\n");
    out
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn colours_are_affine_in_the_value() {
        let svg = heatmap(&[Some(0.0), Some(1.0), Some(2.0), None], 2, 2, "t");
        assert_eq!(svg.matches("<rect").count(), 3);
        assert!(svg.contains("rgb(49,54,149)"));
        assert!(svg.contains("rgb(215,48,39)"));
        assert!(svg.contains("rgb(132,51,94)"));
    }

    #[test]
    fn constant_field_uses_the_midpoint() {
        let svg = heatmap(&[Some(3.0); 4], 2, 2, "c");
        assert_eq!(svg.matches("rgb(132,51,94)").count(), 4);
    }
}
