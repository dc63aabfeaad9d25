//! SVG renderings: correspondence overlays and benchmark log-log plots.

use std::fmt::Write;

use crate::baseline::{Algorithm, BenchReport};
use crate::correspondence::PrunedCorrespondenceSet;
use crate::shapes::{Point2, Shape};
use crate::Scalar;

const CANVAS: f64 = 600.0;
const MARGIN: f64 = 20.0;

struct Frame {
    min_x: f64,
    min_y: f64,
    scale: f64,
}

impl Frame {
    fn fit<'a>(points: impl Iterator<Item = (f64, f64)> + 'a) -> Self {
        let (mut lo_x, mut lo_y, mut hi_x, mut hi_y) = (f64::INFINITY, f64::INFINITY, f64::NEG_INFINITY, f64::NEG_INFINITY);
        for (x, y) in points {
            lo_x = lo_x.min(x);
            lo_y = lo_y.min(y);
            hi_x = hi_x.max(x);
            hi_y = hi_y.max(y);
        }
        let extent = (hi_x - lo_x).max(hi_y - lo_y);
        let scale = if extent > 0.0 && extent.is_finite() { (CANVAS - 2.0 * MARGIN) / extent } else { 1.0 };
        Self { min_x: if lo_x.is_finite() { lo_x } else { 0.0 }, min_y: if lo_y.is_finite() { lo_y } else { 0.0 }, scale }
    }

    fn map<T: Scalar>(&self, p: &Point2<T>) -> (f64, f64) {
        (MARGIN + (p.x.as_f64() - self.min_x) * self.scale, MARGIN + (p.y.as_f64() - self.min_y) * self.scale)
    }
}

fn shape_paths<T: Scalar>(out: &mut String, frame: &Frame, shape: &Shape<T>, class: &str) {
    for c in &shape.contours {
        let pts: Vec<String> = c.points.iter().map(|p| frame.map(p)).map(|(x, y)| format!("{x:.2},{y:.2}")).collect();
        let tag = if c.closed { "polygon" } else { "polyline" };
        let _ = writeln!(out, r#"<{tag} class="{class}" points="{}"/>"#, pts.join(" "));
    }
}

/// Both shapes with one line per correspondence of `set`: kept pairs solid,
/// dropped pairs dashed.
pub fn correspondence_svg<T: Scalar>(p: &Shape<T>, q: &Shape<T>, set: &PrunedCorrespondenceSet<T>) -> String {
    let frame = Frame::fit(p.points().chain(q.points()).map(|pt| (pt.x.as_f64(), pt.y.as_f64())));
    let (pp, qp) = (p.flat_points(), q.flat_points());
    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{CANVAS}" height="{CANVAS}" viewBox="0 0 {CANVAS} {CANVAS}">"#
    );
    out.push_str(
        "<style>.shape-a{fill:none;stroke:#1f77b4;stroke-width:1.5}.shape-b{fill:none;stroke:#d62728;stroke-width:1.5}\
         .kept{stroke:#2ca02c;stroke-width:0.8}.dropped{stroke:#7f7f7f;stroke-width:0.8;stroke-dasharray:4 3}</style>\n",
    );
    shape_paths(&mut out, &frame, p, "shape-a");
    shape_paths(&mut out, &frame, q, "shape-b");
    for (pairs, class) in [(&set.kept, "kept"), (&set.dropped, "dropped")] {
        for pair in pairs.iter() {
            let (i, j) = pair.pq(set.direction);
            let ((x1, y1), (x2, y2)) = (frame.map(&pp[i]), frame.map(&qp[j]));
            let _ = writeln!(out, r#"<line class="{class}" x1="{x1:.2}" y1="{y1:.2}" x2="{x2:.2}" y2="{y2:.2}"/>"#);
        }
    }
    out.push_str("</svg>\n");
    out
}

/// Log-log plot of wall time against size, one series per algorithm.
pub fn bench_plot_svg(report: &BenchReport) -> String {
    let logs: Vec<(Algorithm, f64, f64)> = report
        .records
        .iter()
        .filter(|r| r.wall_time > 0.0)
        .map(|r| (r.algorithm, (r.size as f64).log10(), r.wall_time.log10()))
        .collect();
    let (lx0, lx1) = logs.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), r| (a.min(r.1), b.max(r.1)));
    let (ly0, ly1) = logs.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), r| (a.min(r.2), b.max(r.2)));
    let span = |lo: f64, hi: f64| if hi > lo { hi - lo } else { 1.0 };
    let (sx, sy) = ((CANVAS - 3.0 * MARGIN) / span(lx0, lx1), (CANVAS - 3.0 * MARGIN) / span(ly0, ly1));
    let to_xy = |lx: f64, ly: f64| (2.0 * MARGIN + (lx - lx0) * sx, CANVAS - 2.0 * MARGIN - (ly - ly0) * sy);

    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{CANVAS}" height="{CANVAS}" viewBox="0 0 {CANVAS} {CANVAS}">"#
    );
    let (ox, oy) = (2.0 * MARGIN, CANVAS - 2.0 * MARGIN);
    let _ = writeln!(out, r#"<line x1="{ox}" y1="{oy}" x2="{}" y2="{oy}" stroke="black"/>"#, CANVAS - MARGIN);
    let _ = writeln!(out, r#"<line x1="{ox}" y1="{oy}" x2="{ox}" y2="{MARGIN}" stroke="black"/>"#);
    let _ = writeln!(out, r#"<text x="{}" y="{}" font-size="12">log10 size</text>"#, CANVAS / 2.0, CANVAS - 5.0);
    let _ = writeln!(out, r#"<text x="5" y="{MARGIN}" font-size="12">log10 seconds</text>"#);
    for (k, (algorithm, slope)) in report.slopes.iter().enumerate() {
        let colour = if *algorithm == Algorithm::BscCorrespondence { "#1f77b4" } else { "#d62728" };
        let pts: Vec<(f64, f64)> = logs.iter().filter(|r| r.0 == *algorithm).map(|r| to_xy(r.1, r.2)).collect();
        let joined: Vec<String> = pts.iter().map(|(x, y)| format!("{x:.2},{y:.2}")).collect();
        let _ = writeln!(out, r#"<polyline fill="none" stroke="{colour}" points="{}"/>"#, joined.join(" "));
        for (x, y) in &pts {
            let _ = writeln!(out, r#"<circle cx="{x:.2}" cy="{y:.2}" r="3" fill="{colour}"/>"#);
        }
        let slope = slope.map_or("n/a".to_string(), |s| format!("{s:.2}"));
        let _ = writeln!(
            out,
            r#"<text x="{}" y="{}" font-size="12" fill="{colour}">{} slope {slope}</text>"#,
            3.0 * MARGIN,
            2.0 * MARGIN + 16.0 * k as f64,
            algorithm.name()
        );
    }
    out.push_str("</svg>\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::correspondence::{forward_correspondences, prune};
    use crate::descriptor::CostMatrix;

    #[test]
    fn overlay_has_solid_and_dashed_lines() {
        let p = Shape::from_points(vec![Point2::new(0.0, 0.0), Point2::new(1.0, 0.0), Point2::new(0.0, 1.0)]);
        let q = p.translate(2.0, 0.0);
        let m = CostMatrix::from_rows(&[vec![0.0, 0.5, 0.9], vec![0.5, 0.01, 0.9], vec![0.9, 0.9, 0.8]]).unwrap();
        let set = prune(&forward_correspondences(&m).unwrap()).unwrap();
        let svg = correspondence_svg(&p, &q, &set);
        assert_eq!(svg.matches(r#"class="kept""#).count(), 2);
        assert_eq!(svg.matches(r#"class="dropped""#).count(), 1);
        assert_eq!(svg.matches("<polygon").count(), 2);
        assert!(svg.trim_end().ends_with("</svg>"));
    }
}
