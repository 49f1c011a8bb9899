//! Deterministic SVG rendering. Coordinates are printed with fixed precision
//! so identical input gives byte-identical output.

use std::fmt::Write;

use crate::dynamics::DefectPoint;
use crate::internal::WindowCell;
use crate::patterns::MultiPattern;

const WIDTH: f64 = 800.0;
const MARGIN: f64 = 40.0;
const PALETTE: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf"];

fn header(out: &mut String, height: f64) {
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH:.0}" height="{height:.0}" viewBox="0 0 {WIDTH:.0} {height:.0}">"#
    );
    let _ = writeln!(out, r#"<rect width="100%" height="100%" fill="white"/>"#);
}

fn axis(out: &mut String, y: f64) {
    let _ = writeln!(
        out,
        r#"<line x1="{MARGIN:.3}" y1="{y:.3}" x2="{:.3}" y2="{y:.3}" stroke="black" stroke-width="1"/>"#,
        WIDTH - MARGIN
    );
}

fn label(out: &mut String, x: f64, y: f64, text: &str) {
    let escaped = text.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;");
    let _ = writeln!(out, r#"<text x="{x:.3}" y="{y:.3}" font-family="monospace" font-size="12">{escaped}</text>"#);
}

fn scale(lo: f64, hi: f64) -> impl Fn(f64) -> f64 {
    let span = if hi > lo { hi - lo } else { 1.0 };
    move |x| MARGIN + (x - lo) / span * (WIDTH - 2.0 * MARGIN)
}

/// Tick rows per symbol in dimension 1, colored dots in dimension 2.
pub fn pattern_svg(p: &MultiPattern) -> String {
    let r = p.region_radius().to_f64();
    let mut out = String::new();
    if p.dim() == 1 {
        let row = 30.0;
        let height = 2.0 * MARGIN + row * p.symbols().len().max(1) as f64;
        header(&mut out, height);
        let sx = scale(-r, r);
        for (i, name) in p.symbols().iter().enumerate() {
            let y = MARGIN + row * (i as f64 + 0.5);
            axis(&mut out, y);
            label(&mut out, 4.0, y + 4.0, name);
            for c in p.points_of(i) {
                let x = sx(c[0].to_f64());
                let _ = writeln!(
                    out,
                    r#"<line x1="{x:.3}" y1="{:.3}" x2="{x:.3}" y2="{:.3}" stroke="{}" stroke-width="1"/>"#,
                    y - 8.0,
                    y + 8.0,
                    PALETTE[i % PALETTE.len()]
                );
            }
        }
    } else {
        header(&mut out, WIDTH);
        let s = scale(-r, r);
        axis(&mut out, WIDTH / 2.0);
        let _ = writeln!(
            out,
            r#"<line x1="{c:.3}" y1="{MARGIN:.3}" x2="{c:.3}" y2="{:.3}" stroke="black" stroke-width="1"/>"#,
            WIDTH - MARGIN,
            c = WIDTH / 2.0
        );
        for (c, sym) in p.points() {
            let _ = writeln!(
                out,
                r#"<circle cx="{:.3}" cy="{:.3}" r="2" fill="{}"/>"#,
                s(c[0].to_f64()),
                WIDTH - s(c[1].to_f64()),
                PALETTE[sym % PALETTE.len()]
            );
        }
    }
    out.push_str("</svg>\n");
    out
}

/// Defect curves as polylines over `ρ`, defect axis `[0, 2]`.
pub fn defect_svg(curves: &[(String, Vec<DefectPoint>)]) -> String {
    let height = 400.0;
    let mut out = String::new();
    header(&mut out, height);
    let rhos = curves.iter().flat_map(|(_, c)| c.iter().map(|p| p.rho.to_f64()));
    let lo = rhos.clone().fold(f64::INFINITY, f64::min);
    let hi = rhos.fold(f64::NEG_INFINITY, f64::max);
    let (lo, hi) = if lo.is_finite() { (lo, hi) } else { (0.0, 1.0) };
    let sx = scale(lo, hi);
    let sy = |d: f64| height - MARGIN - d / 2.0 * (height - 2.0 * MARGIN);
    axis(&mut out, sy(0.0));
    for (i, (title, curve)) in curves.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        label(&mut out, MARGIN + 150.0 * (i % 4) as f64, 14.0 + 14.0 * (i / 4) as f64, title);
        let pts: Vec<String> = curve.iter().map(|p| format!("{:.3},{:.3}", sx(p.rho.to_f64()), sy(p.defect))).collect();
        let _ = writeln!(out, r#"<polyline points="{}" fill="none" stroke="{color}" stroke-width="2"/>"#, pts.join(" "));
    }
    out.push_str("</svg>\n");
    out
}

/// Feasible region cells as shaded intervals along the first Euclidean axis;
/// compact pieces are listed as labels.
pub fn region_svg(cells: &[WindowCell]) -> String {
    let height = 160.0;
    let mut out = String::new();
    header(&mut out, height);
    let ivs: Vec<(f64, f64)> = cells
        .iter()
        .filter_map(|c| c.intervals.first().map(|iv| (iv.lo.to_f64(), iv.hi.to_f64())))
        .collect();
    let lo = ivs.iter().map(|v| v.0).fold(f64::INFINITY, f64::min);
    let hi = ivs.iter().map(|v| v.1).fold(f64::NEG_INFINITY, f64::max);
    let (lo, hi) = if lo.is_finite() { (lo - 0.05 * (hi - lo + 1e-9), hi + 0.05 * (hi - lo + 1e-9)) } else { (0.0, 1.0) };
    let sx = scale(lo, hi);
    axis(&mut out, 100.0);
    for (a, b) in &ivs {
        let (x0, x1) = (sx(*a), sx(*b));
        let _ = writeln!(
            out,
            r##"<rect x="{x0:.3}" y="70.000" width="{:.3}" height="30.000" fill="#1f77b4" fill-opacity="0.4" stroke="#1f77b4"/>"##,
            (x1 - x0).max(1.0)
        );
    }
    label(&mut out, MARGIN, 130.0, &format!("[{lo:.6}, {hi:.6}]"));
    for (i, c) in cells.iter().filter(|c| !c.compact.is_empty()).take(8).enumerate() {
        label(&mut out, MARGIN, 20.0 + 12.0 * i as f64, &serde_json::to_string(&c.compact).unwrap_or_default());
    }
    out.push_str("</svg>\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::QuadRational as Q;
    use crate::patterns::tests::fibonacci_oracle;

    #[test]
    fn fibonacci_has_two_rows() {
        let p = fibonacci_oracle(20);
        let svg = pattern_svg(&p);
        assert_eq!(svg.matches("stroke=\"black\"").count(), 2);
        assert_eq!(svg.matches(PALETTE[0]).count(), p.points_of(0).len());
        assert_eq!(svg, pattern_svg(&p));
    }

    #[test]
    fn empty_pattern_has_axes_only() {
        let p = MultiPattern::empty(1, vec!["x".into()], Q::int(3));
        let svg = pattern_svg(&p);
        assert!(svg.starts_with("<svg") && svg.ends_with("</svg>\n"));
        assert_eq!(svg.matches("<line").count(), 1);
    }

    #[test]
    fn defect_polyline_has_all_points() {
        let curve: Vec<DefectPoint> = (1..=4)
            .map(|k| DefectPoint {
                rho: Q::int(k),
                defect: 1.0 / k as f64,
                centers: 10,
                classes: 2,
            })
            .collect();
        let svg = defect_svg(&[("beta".to_string(), curve)]);
        let poly = svg.lines().find(|l| l.starts_with("<polyline")).unwrap();
        let ys: Vec<f64> = poly
            .split('"')
            .nth(1)
            .unwrap()
            .split(' ')
            .map(|p| p.split(',').nth(1).unwrap().parse().unwrap())
            .collect();
        assert_eq!(ys.len(), 4);
        // decreasing defect is an increasing screen y
        assert!(ys.windows(2).all(|w| w[1] >= w[0]));
    }
}
