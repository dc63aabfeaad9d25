use std::f64::consts::{FRAC_PI_2, PI, TAU};
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::shapes::{Contour, Point2, Shape};
use crate::{Error, Result, Scalar};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ShapeFamily {
    /// Unit circle.
    Circle,
    /// Axis-aligned square with corners at (+-1, +-1).
    Square,
    /// Five-pointed star, outer radius 1, inner radius 0.4.
    Star,
    /// Smooth random radial profile around the unit circle.
    Blob,
    /// Unit circle with a square hole: two contours.
    MultiContourGlyph,
}

pub const STAR_OUTER: f64 = 1.0;
pub const STAR_INNER: f64 = 0.4;

impl ShapeFamily {
    pub const ALL: [ShapeFamily; 5] =
        [ShapeFamily::Circle, ShapeFamily::Square, ShapeFamily::Star, ShapeFamily::Blob, ShapeFamily::MultiContourGlyph];

    pub fn name(self) -> &'static str {
        match self {
            ShapeFamily::Circle => "circle",
            ShapeFamily::Square => "square",
            ShapeFamily::Star => "star",
            ShapeFamily::Blob => "blob",
            ShapeFamily::MultiContourGlyph => "multi_contour_glyph",
        }
    }
}

impl FromStr for ShapeFamily {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|f| f.name() == s)
            .ok_or_else(|| Error::BadParams(format!("unknown shape family {s:?}")))
    }
}

/// `n` points evenly spaced by arc length along the closed polygon `vertices`.
fn sample_polygon(vertices: &[(f64, f64)], n: usize) -> Vec<(f64, f64)> {
    let edges: Vec<_> = (0..vertices.len()).map(|i| (vertices[i], vertices[(i + 1) % vertices.len()])).collect();
    let lengths: Vec<f64> = edges.iter().map(|((ax, ay), (bx, by))| (bx - ax).hypot(by - ay)).collect();
    let perimeter: f64 = lengths.iter().sum();
    let mut out = Vec::with_capacity(n);
    let (mut edge, mut walked) = (0, 0.0);
    for k in 0..n {
        let s = perimeter * k as f64 / n as f64;
        while edge + 1 < edges.len() && walked + lengths[edge] <= s {
            walked += lengths[edge];
            edge += 1;
        }
        let t = (s - walked) / lengths[edge];
        let ((ax, ay), (bx, by)) = edges[edge];
        out.push((ax + t * (bx - ax), ay + t * (by - ay)));
    }
    out
}

fn ring(n: usize, radius: f64) -> Vec<(f64, f64)> {
    (0..n).map(|k| {
        let t = TAU * k as f64 / n as f64;
        (radius * t.cos(), radius * t.sin())
    })
    .collect()
}

/// Pushes every point radially by up to `jitter` (uniform in `[-jitter, jitter]`).
fn radial_jitter(points: Vec<(f64, f64)>, jitter: f64, rng: &mut ChaCha8Rng) -> Vec<(f64, f64)> {
    points
        .into_iter()
        .map(|(x, y)| {
            if jitter == 0.0 {
                return (x, y);
            }
            let r = x.hypot(y);
            let d = rng.gen_range(-jitter..=jitter);
            if r == 0.0 {
                (x + d, y)
            } else {
                (x * (r + d) / r, y * (r + d) / r)
            }
        })
        .collect()
}

fn contour<T: Scalar>(points: Vec<(f64, f64)>) -> Contour<T> {
    Contour::closed(points.into_iter().map(|(x, y)| Point2::new(T::lit(x), T::lit(y))).collect())
}

/// Deterministic synthetic boundary of `point_count` points, unit scale,
/// centred on the origin, with radial noise of amplitude `jitter`.
pub fn generate_shape<T: Scalar>(family: ShapeFamily, point_count: usize, jitter: f64, seed: u64) -> Result<Shape<T>> {
    let min_points = if family == ShapeFamily::MultiContourGlyph { 6 } else { 3 };
    if point_count < min_points {
        return Err(Error::BadParams(format!("{} needs at least {min_points} points, got {point_count}", family.name())));
    }
    if jitter < 0.0 || !jitter.is_finite() {
        return Err(Error::BadParams(format!("jitter must be finite and >= 0, got {jitter}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = point_count;
    let contours = match family {
        ShapeFamily::Circle => vec![radial_jitter(ring(n, 1.0), jitter, &mut rng)],
        ShapeFamily::Square => {
            let corners = [(1.0, 0.0), (1.0, 1.0), (-1.0, 1.0), (-1.0, -1.0), (1.0, -1.0)];
            vec![radial_jitter(sample_polygon(&corners, n), jitter, &mut rng)]
        }
        ShapeFamily::Star => {
            let vertices: Vec<_> = (0..10)
                .map(|k| {
                    let r = if k % 2 == 0 { STAR_OUTER } else { STAR_INNER };
                    let t = FRAC_PI_2 + k as f64 * PI / 5.0;
                    (r * t.cos(), r * t.sin())
                })
                .collect();
            vec![radial_jitter(sample_polygon(&vertices, n), jitter, &mut rng)]
        }
        ShapeFamily::Blob => {
            let harmonics: Vec<(f64, f64, f64)> =
                (2..=4).map(|k| (k as f64, rng.gen_range(0.0..0.12), rng.gen_range(0.0..TAU))).collect();
            let points = (0..n)
                .map(|i| {
                    let t = TAU * i as f64 / n as f64;
                    let r = 1.0 + harmonics.iter().map(|(k, a, phi)| a * (k * t + phi).cos()).sum::<f64>();
                    (r * t.cos(), r * t.sin())
                })
                .collect();
            vec![radial_jitter(points, jitter, &mut rng)]
        }
        ShapeFamily::MultiContourGlyph => {
            let inner_n = (n / 3).max(3);
            let outer = radial_jitter(ring(n - inner_n, 1.0), jitter, &mut rng);
            let hole = [(0.4, 0.0), (0.4, 0.4), (-0.4, 0.4), (-0.4, -0.4), (0.4, -0.4)];
            let inner = radial_jitter(sample_polygon(&hole, inner_n), jitter, &mut rng);
            vec![outer, inner]
        }
    };
    Ok(Shape::new(contours.into_iter().map(contour).collect()).with_label(family.name()))
}

/// Labelled circles, squares and stars, `per_family` of each, with varied
/// point counts (40 to 60), radial jitter 0.03, scale and position.
pub fn synthetic_gallery<T: Scalar>(per_family: usize, seed: u64) -> Result<Vec<Shape<T>>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(3 * per_family);
    for family in [ShapeFamily::Circle, ShapeFamily::Square, ShapeFamily::Star] {
        for _ in 0..per_family {
            let n = rng.gen_range(40..=60);
            let s: Shape<T> = generate_shape(family, n, 0.03, rng.gen())?;
            let scale = T::lit(rng.gen_range(0.5..2.0));
            let (dx, dy) = (T::lit(rng.gen_range(-10.0..10.0)), T::lit(rng.gen_range(-10.0..10.0)));
            out.push(s.scale(scale).translate(dx, dy));
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn circle_spacing() {
        let s: Shape<f64> = generate_shape(ShapeFamily::Circle, 100, 0.0, 1).unwrap();
        let pts = s.flat_points();
        assert_eq!(pts.len(), 100);
        for (k, p) in pts.iter().enumerate() {
            assert!((p.x.hypot(p.y) - 1.0).abs() < 1e-12);
            let next = pts[(k + 1) % 100];
            let mut dt = next.y.atan2(next.x) - p.y.atan2(p.x);
            if dt < 0.0 {
                dt += TAU;
            }
            assert!((dt - TAU / 100.0).abs() < 1e-12);
        }
    }

    #[test]
    fn deterministic_per_seed() {
        for f in ShapeFamily::ALL {
            let a: Shape<f64> = generate_shape(f, 50, 0.05, 11).unwrap();
            assert_eq!(a, generate_shape(f, 50, 0.05, 11).unwrap());
            assert_eq!(a.len(), 50, "{f:?}");
        }
        let a: Shape<f64> = generate_shape(ShapeFamily::Blob, 50, 0.05, 1).unwrap();
        assert_ne!(a, generate_shape(ShapeFamily::Blob, 50, 0.05, 2).unwrap());
    }

    #[test]
    fn star_envelope() {
        let s: Shape<f64> = generate_shape(ShapeFamily::Star, 50, 0.05, 7).unwrap();
        assert_eq!(s.len(), 50);
        for p in s.points() {
            let r = p.x.hypot(p.y);
            assert!((STAR_INNER - 0.05 - 1e-12..=STAR_OUTER + 0.05 + 1e-12).contains(&r), "{r}");
        }
    }

    #[test]
    fn glyph_has_two_contours() {
        let s: Shape<f64> = generate_shape(ShapeFamily::MultiContourGlyph, 60, 0.0, 0).unwrap();
        assert_eq!(s.contours.len(), 2);
        assert_eq!(s.len(), 60);
    }

    #[test]
    fn bad_params() {
        assert!(generate_shape::<f64>(ShapeFamily::Circle, 2, 0.0, 0).is_err());
        assert!(generate_shape::<f64>(ShapeFamily::MultiContourGlyph, 5, 0.0, 0).is_err());
        assert!(generate_shape::<f64>(ShapeFamily::Square, 10, -0.1, 0).is_err());
        assert!("triangle".parse::<ShapeFamily>().is_err());
        assert_eq!("multi_contour_glyph".parse::<ShapeFamily>().unwrap(), ShapeFamily::MultiContourGlyph);
    }

    #[test]
    fn gallery_layout() {
        let g: Vec<Shape<f64>> = synthetic_gallery(10, 42).unwrap();
        assert_eq!(g.len(), 30);
        assert_eq!(g.iter().filter(|s| s.label.as_deref() == Some("star")).count(), 10);
    }
}
