//! Shape representation, image loading, contour extraction and point-set I/O.

mod io;
mod pgm;
mod trace;

use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use crate::{Error, Result, Scalar};

pub use io::{load_points, save_points, shape_from_json, shape_to_json, ShapeJson};
pub use pgm::{load_pgm, BinaryImage};
pub use trace::{extract_contours, DEFAULT_FG_THRESHOLD};

/// A point in the plane.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(from = "[T; 2]", into = "[T; 2]", bound = "T: Scalar")]
pub struct Point2<T> {
    pub x: T,
    pub y: T,
}

impl<T: Scalar> Point2<T> {
    pub fn new(x: T, y: T) -> Self {
        Self { x, y }
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }

    pub fn distance(&self, other: &Self) -> T {
        (self.x - other.x).hypot(self.y - other.y)
    }

    pub fn translate(&self, dx: T, dy: T) -> Self {
        Self::new(self.x + dx, self.y + dy)
    }

    pub fn scale(&self, s: T) -> Self {
        Self::new(self.x * s, self.y * s)
    }

    fn bit_key(&self) -> (u64, u64) {
        (self.x.as_f64().to_bits(), self.y.as_f64().to_bits())
    }
}

impl<T: Scalar> From<[T; 2]> for Point2<T> {
    fn from([x, y]: [T; 2]) -> Self {
        Self { x, y }
    }
}

impl<T: Scalar> From<Point2<T>> for [T; 2] {
    fn from(p: Point2<T>) -> Self {
        [p.x, p.y]
    }
}

/// One boundary, points in traversal order.
#[derive(Debug, Clone, PartialEq)]
pub struct Contour<T> {
    pub points: Vec<Point2<T>>,
    pub closed: bool,
}

impl<T: Scalar> Contour<T> {
    /// Builds a closed contour, dropping consecutive repeats.
    pub fn closed(points: Vec<Point2<T>>) -> Self {
        let mut c = Self { points, closed: true };
        c.points.dedup();
        c
    }

    pub fn open(points: Vec<Point2<T>>) -> Self {
        let mut c = Self { points, closed: false };
        c.points.dedup();
        c
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// A possibly multi-contour planar shape: the point set entering the matcher.
#[derive(Debug, Clone, PartialEq)]
pub struct Shape<T> {
    pub contours: Vec<Contour<T>>,
    pub label: Option<String>,
}

impl<T: Scalar> Shape<T> {
    pub fn new(contours: Vec<Contour<T>>) -> Self {
        Self { contours, label: None }
    }

    /// Single closed contour through `points`.
    pub fn from_points(points: Vec<Point2<T>>) -> Self {
        Self::new(vec![Contour::closed(points)])
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = Some(label.into());
        self
    }

    /// Total point count over all contours.
    pub fn len(&self) -> usize {
        self.contours.iter().map(Contour::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn points(&self) -> impl Iterator<Item = &Point2<T>> + '_ {
        self.contours.iter().flat_map(|c| c.points.iter())
    }

    /// All points, contours concatenated in order. Indices into this vector are
    /// the point indices used by descriptors and correspondences.
    pub fn flat_points(&self) -> Vec<Point2<T>> {
        self.points().copied().collect()
    }

    /// Applies `f` to every point, keeping contour structure and label.
    pub fn map_points(&self, mut f: impl FnMut(&Point2<T>) -> Point2<T>) -> Self {
        Self {
            contours: self
                .contours
                .iter()
                .map(|c| Contour { points: c.points.iter().map(&mut f).collect(), closed: c.closed })
                .collect(),
            label: self.label.clone(),
        }
    }

    pub fn translate(&self, dx: T, dy: T) -> Self {
        self.map_points(|p| p.translate(dx, dy))
    }

    pub fn scale(&self, s: T) -> Self {
        self.map_points(|p| p.scale(s))
    }

    /// Removes exact duplicate points across the whole shape, keeping the first
    /// occurrence, and drops contours left empty.
    pub fn dedup(&self) -> Self {
        let mut seen = HashSet::new();
        let contours = self
            .contours
            .iter()
            .filter_map(|c| {
                let points: Vec<_> = c.points.iter().copied().filter(|p| seen.insert(p.bit_key())).collect();
                (!points.is_empty()).then_some(Contour { points, closed: c.closed })
            })
            .collect();
        Self { contours, label: self.label.clone() }
    }

    pub fn centroid(&self) -> Option<Point2<T>> {
        let n = self.len();
        if n == 0 {
            return None;
        }
        let (sx, sy) = self.points().fold((T::zero(), T::zero()), |(sx, sy), p| (sx + p.x, sy + p.y));
        Some(Point2::new(sx / T::count(n), sy / T::count(n)))
    }
}

/// Mean of the full `m x m` distance matrix, zero diagonal included.
/// `None` for fewer than two points.
pub fn mean_pairwise_distance<T: Scalar>(points: &[Point2<T>]) -> Option<T> {
    let n = points.len();
    if n < 2 {
        return None;
    }
    let mut sum = T::zero();
    for (i, p) in points.iter().enumerate() {
        let mut row = T::zero();
        for q in &points[i + 1..] {
            row = row + p.distance(q);
        }
        sum = sum + row;
    }
    Some(sum * T::lit(2.0) / T::count(n * n))
}

/// Translates the centroid to the origin and scales the [`mean_pairwise_distance`] to 1.
pub fn normalize<T: Scalar>(shape: &Shape<T>) -> Result<Shape<T>> {
    if shape.len() < 2 {
        return Err(Error::DegenerateShape(format!("normalize needs at least 2 points, got {}", shape.len())));
    }
    let c = shape.centroid().expect("nonempty");
    let centered = shape.translate(-c.x, -c.y);
    let d = mean_pairwise_distance(&centered.flat_points()).expect("at least two points");
    if d <= T::zero() || !d.is_finite() {
        return Err(Error::DegenerateShape("all points coincide".into()));
    }
    let inv = T::one() / d;
    Ok(centered.scale(inv))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pts(v: &[(f64, f64)]) -> Vec<Point2<f64>> {
        v.iter().map(|&(x, y)| Point2::new(x, y)).collect()
    }

    #[test]
    fn normalize_two_points() {
        let s = Shape::new(vec![Contour::open(pts(&[(0.0, 0.0), (2.0, 0.0)]))]);
        let n = normalize(&s).unwrap();
        assert_eq!(n.flat_points(), pts(&[(-1.0, 0.0), (1.0, 0.0)]));
    }

    #[test]
    fn normalize_is_idempotent() {
        let s = Shape::from_points(pts(&[(3.0, 1.0), (7.5, -2.0), (0.25, 9.0), (4.0, 4.0)]));
        let once = normalize(&s).unwrap();
        let twice = normalize(&once).unwrap();
        for (a, b) in once.points().zip(twice.points()) {
            assert!((a.x - b.x).abs() < 1e-12 && (a.y - b.y).abs() < 1e-12);
        }
    }

    #[test]
    fn normalize_rejects_coincident_points() {
        let s = Shape::new(vec![Contour { points: pts(&[(5.0, 5.0), (5.0, 5.0)]), closed: false }]);
        assert!(matches!(normalize(&s), Err(Error::DegenerateShape(_))));
        let one = Shape::from_points(pts(&[(1.0, 1.0)]));
        assert!(matches!(normalize(&one), Err(Error::DegenerateShape(_))));
    }

    #[test]
    fn dedup_across_contours() {
        let s = Shape::new(vec![
            Contour::closed(pts(&[(0.0, 0.0), (1.0, 0.0), (1.0, 1.0)])),
            Contour::closed(pts(&[(1.0, 0.0), (0.0, 0.0)])),
            Contour::closed(pts(&[(2.0, 2.0), (1.0, 1.0)])),
        ]);
        let d = s.dedup();
        assert_eq!(d.contours.len(), 2);
        assert_eq!(d.contours[1].points, pts(&[(2.0, 2.0)]));
    }

    #[test]
    fn consecutive_repeats_removed_on_construction() {
        let c = Contour::closed(pts(&[(0.0, 0.0), (0.0, 0.0), (1.0, 0.0)]));
        assert_eq!(c.len(), 2);
    }
}
