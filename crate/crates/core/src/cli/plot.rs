use std::fmt::Write;

use crate::numerics::C64;

const SIZE: f64 = 400.0;

/// Scatter of points in the complex plane with the unit circle for scale.
pub fn spectrum_svg(points: &[C64]) -> String {
    let radius = points.iter().map(|z| z.norm()).fold(1.0, f64::max) * 1.1;
    let px = |v: f64| SIZE / 2.0 * (1.0 + v / radius);
    let py = |v: f64| SIZE / 2.0 * (1.0 - v / radius);
    let mut svg = String::new();
    let _ = writeln!(svg, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{SIZE}" height="{SIZE}" viewBox="0 0 {SIZE} {SIZE}">"#);
    let _ = writeln!(svg, r##"<rect width="100%" height="100%" fill="#ffffff"/>"##);
    let _ = writeln!(svg, r##"<line x1="0" y1="{0}" x2="{SIZE}" y2="{0}" stroke="#bbbbbb"/>"##, SIZE / 2.0);
    let _ = writeln!(svg, r##"<line x1="{0}" y1="0" x2="{0}" y2="{SIZE}" stroke="#bbbbbb"/>"##, SIZE / 2.0);
    let _ = writeln!(
        svg,
        r##"<circle cx="{0}" cy="{0}" r="{1:.3}" fill="none" stroke="#888888" stroke-dasharray="4 3"/>"##,
        SIZE / 2.0,
        SIZE / 2.0 / radius
    );
    for z in points {
        let _ = writeln!(svg, r##"<circle cx="{:.3}" cy="{:.3}" r="4" fill="#c0392b"/>"##, px(z.re), py(z.im));
    }
    svg.push_str("</svg>\n");
    svg
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn one_marker_per_point() {
        let svg = spectrum_svg(&[C64::new(0.5, 0.5), C64::new(-2.0, 0.0)]);
        assert_eq!(svg.matches("fill=\"#c0392b\"").count(), 2);
        assert!(svg.starts_with("<svg") && svg.trim_end().ends_with("</svg>"));
    }
}
