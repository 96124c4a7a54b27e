//! Static SVG rendering of an embedding on the register.

use std::fmt::Write;

use gean::graph::Graph;
use gean::layout::{Embedding, REGISTER_RADIUS};
use gean::physics::RegisterLimits;

const CANVAS: f64 = 600.0;
/// Pixels per micrometer.
const SCALE: f64 = 5.0;
const MARKER: f64 = 4.0;

fn to_canvas(x: f64, y: f64) -> (f64, f64) {
    (CANVAS / 2.0 + x * SCALE, CANVAS / 2.0 - y * SCALE)
}

/// Draws the register disk, the edges of `g`, one marker per atom and the
/// blockade circle around the highest-degree vertex.
///
/// 3D embeddings are projected onto the xy plane; markers are drawn from low
/// to high z and grow with z.
pub fn plot_svg(e: &Embedding, g: &Graph, limits: &RegisterLimits) -> String {
    let n = e.n().min(g.n());
    let xy = |i: usize| {
        let p = e.point(i);
        to_canvas(p[0], p[1])
    };
    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{c}" height="{c}" viewBox="0 0 {c} {c}">"#,
        c = CANVAS
    );
    let (cx, cy) = to_canvas(0.0, 0.0);
    let _ = writeln!(
        svg,
        r##"<circle class="register" cx="{cx:.2}" cy="{cy:.2}" r="{:.2}" fill="none" stroke="#999999"/>"##,
        REGISTER_RADIUS * SCALE
    );

    // lowest id among the highest-degree vertices
    if let Some(center) = (1..=n).max_by_key(|&v| (g.degree(v), std::cmp::Reverse(v))) {
        let (x, y) = xy(center - 1);
        let _ = writeln!(
            svg,
            r##"<circle class="blockade" cx="{x:.2}" cy="{y:.2}" r="{:.2}" fill="none" stroke="#cc3333" stroke-dasharray="4 3"/>"##,
            limits.r_blockade * SCALE
        );
        let _ = writeln!(
            svg,
            r##"<text class="annotation" x="{:.2}" y="{:.2}" font-size="10" fill="#cc3333">r_b = {:.2} um</text>"##,
            x + limits.r_blockade * SCALE * 0.72,
            y - limits.r_blockade * SCALE * 0.72,
            limits.r_blockade
        );
    }

    for (i, j) in g.edges().filter(|&(_, j)| j <= n) {
        let (x1, y1) = xy(i - 1);
        let (x2, y2) = xy(j - 1);
        let _ = writeln!(
            svg,
            r##"<path class="edge" d="M {x1:.2} {y1:.2} L {x2:.2} {y2:.2}" stroke="#336699" stroke-width="1"/>"##
        );
    }

    let mut order: Vec<usize> = (0..n).collect();
    if e.dims() == 3 {
        order.sort_by(|&a, &b| e.point(a)[2].total_cmp(&e.point(b)[2]).then(a.cmp(&b)));
    }
    for i in order {
        let (x, y) = xy(i);
        let r = if e.dims() == 3 {
            MARKER * (1.0 + e.point(i)[2] / (2.0 * REGISTER_RADIUS)).max(0.25)
        } else {
            MARKER
        };
        let _ = writeln!(
            svg,
            r##"<circle class="vertex" cx="{x:.2}" cy="{y:.2}" r="{r:.2}" fill="#222222" stroke="#ffffff" stroke-width="0.5"/>"##
        );
        let _ = writeln!(
            svg,
            r##"<text class="label" x="{:.2}" y="{:.2}" font-size="8">{}</text>"##,
            x + r + 1.0,
            y - r - 1.0,
            i + 1
        );
    }
    svg.push_str("</svg>\n");
    svg
}

#[cfg(test)]
mod tests {
    use super::*;
    use gean::physics::{default_limits, PhysicsSpec};

    fn limits() -> RegisterLimits {
        default_limits(&PhysicsSpec::default(), 2).unwrap()
    }

    #[test]
    fn two_atoms_one_edge() {
        let e = Embedding::from_points(&[[0.0, 0.0], [8.0, 0.0]]).unwrap();
        let svg = plot_svg(&e, &Graph::complete(2), &limits());
        assert_eq!(svg.matches(r#"class="vertex""#).count(), 2);
        assert_eq!(svg.matches(r#"class="edge""#).count(), 1);
        assert_eq!(svg.matches(r#"class="blockade""#).count(), 1);
        assert_eq!(svg, plot_svg(&e, &Graph::complete(2), &limits()));
    }

    #[test]
    fn depth_sets_marker_size_and_order() {
        let e = Embedding::from_points(&[[0.0, 0.0, 40.0], [10.0, 0.0, -40.0], [0.0, 10.0, 0.0]]).unwrap();
        let svg = plot_svg(&e, &Graph::path(3), &limits().with_dims(3).unwrap());
        let radii: Vec<&str> = svg
            .lines()
            .filter(|l| l.contains(r#"class="vertex""#))
            .map(|l| l.split(" r=\"").nth(1).unwrap().split('"').next().unwrap())
            .collect();
        // drawn from the deepest atom (2) to the highest (1)
        assert_eq!(radii, vec!["2.40", "4.00", "5.60"]);
    }
}
