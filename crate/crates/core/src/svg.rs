//! Standalone SVG rendering of a partition.

use std::fmt::Write;

use crate::geometry::{Dataset2D, DensityVector, Partition};

#[derive(Debug, Clone)]
pub struct SvgOptions {
    /// Width of the drawing in pixels; height follows the aspect ratio of S.
    pub width: f64,
    pub shade: bool,
    pub point_radius: f64,
}

impl Default for SvgOptions {
    fn default() -> Self {
        Self { width: 800.0, shade: false, point_radius: 1.0 }
    }
}

/// Draws S's frame, one polyline per maximal inner boundary segment, and
/// optionally density shading and the data points. Screen y grows downward,
/// so lattice rows are flipped.
pub fn render(
    partition: &Partition,
    densities: &DensityVector,
    points: Option<&Dataset2D>,
    options: &SvgOptions,
) -> String {
    let grid = partition.grid();
    let [w, h] = grid.cells();
    let scale = options.width / w as f64;
    let height = h as f64 * scale;
    let sx = |x: i64| x as f64 * scale;
    let sy = |y: i64| (h - y) as f64 * scale;

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{:.2}" height="{:.2}" viewBox="0 0 {:.2} {:.2}">"#,
        options.width, height, options.width, height
    );

    if options.shade {
        let max = densities.values().iter().cloned().fold(0.0, f64::max);
        let _ = writeln!(s, r#"<g class="density" fill="black" stroke="none">"#);
        for (region, &f) in partition.regions().iter().zip(densities.values()) {
            let opacity = if max > 0.0 { f / max } else { 0.0 };
            for r in region.rects() {
                let _ = writeln!(
                    s,
                    r#"<rect x="{:.2}" y="{:.2}" width="{:.2}" height="{:.2}" fill-opacity="{:.4}"/>"#,
                    sx(r.x0),
                    sy(r.y1),
                    r.width() as f64 * scale,
                    r.height() as f64 * scale,
                    opacity
                );
            }
        }
        let _ = writeln!(s, "</g>");
    }

    if let Some(data) = points {
        let _ = writeln!(s, r#"<g class="points" fill="steelblue" stroke="none">"#);
        let eps = grid.epsilon();
        let [ox, oy] = grid.origin();
        for i in 0..data.len() {
            let [x, y] = data.coords(i);
            let px = (x - ox) / eps * scale;
            let py = height - (y - oy) / eps * scale;
            let _ = writeln!(s, r#"<circle cx="{px:.2}" cy="{py:.2}" r="{:.2}"/>"#, options.point_radius);
        }
        let _ = writeln!(s, "</g>");
    }

    let _ = writeln!(
        s,
        r#"<rect class="frame" x="0" y="0" width="{:.2}" height="{:.2}" fill="none" stroke="black" stroke-width="2"/>"#,
        options.width, height
    );
    let _ = writeln!(s, r#"<g class="boundaries" fill="none" stroke="black" stroke-width="1.5">"#);
    for seg in partition.inner_segments() {
        let [a, b] = seg.endpoints();
        let _ = writeln!(
            s,
            r#"<polyline points="{:.2},{:.2} {:.2},{:.2}"/>"#,
            sx(a[0]),
            sy(a[1]),
            sx(b[0]),
            sy(b[1])
        );
    }
    let _ = writeln!(s, "</g>");
    s.push_str("</svg>\n");
    s
}
