//! SVG drawing of a planar tessellation: the window frame and the internal
//! facets, one user unit per length unit, coordinates at full precision.

use std::fmt::Write as _;

use crate::geometry::Dim;
use crate::stit::Tessellation;

fn num(x: f64) -> String {
    format!("{x:.16e}")
}

/// `None` for spatial tessellations.
pub fn render_svg(y: &Tessellation) -> Option<String> {
    if y.dim() != Dim::Two {
        return None;
    }
    let w = y.window().vertices();
    let (mut x0, mut y0, mut x1, mut y1) = (f64::MAX, f64::MAX, f64::MIN, f64::MIN);
    for v in w {
        x0 = x0.min(v[0]);
        y0 = y0.min(v[1]);
        x1 = x1.max(v[0]);
        y1 = y1.max(v[1]);
    }
    let mut s = String::new();
    // y grows upwards: flip the axis, so the view box spans [-y1, -y0]
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" viewBox="{} {} {} {}">"#,
        num(x0),
        num(-y1),
        num(x1 - x0),
        num(y1 - y0)
    );
    s.push_str("<g transform=\"scale(1,-1)\" fill=\"none\" stroke=\"black\">\n");
    let pts: Vec<String> = w.iter().map(|v| format!("{},{}", num(v[0]), num(v[1]))).collect();
    let _ = writeln!(
        s,
        r#"<polygon class="window" points="{}" stroke-width="2" vector-effect="non-scaling-stroke"/>"#,
        pts.join(" ")
    );
    for f in y.facets() {
        if let [a, b] = f.points() {
            let _ = writeln!(
                s,
                r#"<line x1="{}" y1="{}" x2="{}" y2="{}" stroke-width="1" vector-effect="non-scaling-stroke"/>"#,
                num(a[0]),
                num(a[1]),
                num(b[0]),
                num(b[1])
            );
        }
    }
    s.push_str("</g>\n</svg>\n");
    Some(s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{ConvexPolytope, CuboidRegion};
    use crate::measure::HyperplaneMeasure;
    use crate::stit::{simulate, SimulationConfig};

    #[test]
    fn empty_interior_for_tiny_time() {
        let w = ConvexPolytope::cuboid(&CuboidRegion::unit(Dim::Two));
        let m = HyperplaneMeasure::isotropic(Dim::Two, 1.0).unwrap();
        let y = simulate(&SimulationConfig::new(w, 1e-12, m, 1)).unwrap();
        let s = render_svg(&y).unwrap();
        assert!(s.contains("class=\"window\""));
        assert!(!s.contains("<line"));
    }

    #[test]
    fn one_line_per_facet() {
        let w = ConvexPolytope::cuboid(&CuboidRegion::unit(Dim::Two));
        let m = HyperplaneMeasure::isotropic(Dim::Two, 1.0).unwrap();
        let y = simulate(&SimulationConfig::new(w, 5.0, m, 1)).unwrap();
        let s = render_svg(&y).unwrap();
        assert_eq!(s.matches("<line").count(), y.events().len());
        let w3 = ConvexPolytope::cuboid(&CuboidRegion::unit(Dim::Three));
        let m3 = HyperplaneMeasure::isotropic(Dim::Three, 1.0).unwrap();
        assert!(render_svg(&simulate(&SimulationConfig::new(w3, 1.0, m3, 1)).unwrap()).is_none());
    }
}
