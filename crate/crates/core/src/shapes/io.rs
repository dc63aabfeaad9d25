use serde::{Deserialize, Serialize};

use super::{Contour, Point2, Shape};
use crate::format::format_significant;
use crate::{Error, Result, Scalar};

/// Parses `x,y` lines; a blank line ends the current contour. Lines starting
/// with `#` are ignored. Contours are marked closed.
pub fn load_points<T: Scalar>(text: &str) -> Result<Shape<T>> {
    let mut contours = Vec::new();
    let mut current = Vec::new();
    for (n, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.starts_with('#') {
            continue;
        }
        if line.is_empty() {
            if !current.is_empty() {
                contours.push(Contour::closed(std::mem::take(&mut current)));
            }
            continue;
        }
        current.push(parse_point(line, n + 1)?);
    }
    if !current.is_empty() {
        contours.push(Contour::closed(current));
    }
    if contours.is_empty() {
        return Err(Error::EmptyShape);
    }
    Ok(Shape::new(contours))
}

fn parse_point<T: Scalar>(line: &str, line_no: usize) -> Result<Point2<T>> {
    let err = |message: String| Error::Parse { line: line_no, message };
    let mut fields = line.split(',');
    let (Some(x), Some(y), None) = (fields.next(), fields.next(), fields.next()) else {
        return Err(err(format!("expected two comma-separated fields, got {line:?}")));
    };
    let coord = |s: &str| -> Result<T> {
        let v: f64 = s.trim().parse().map_err(|_| err(format!("invalid number {:?}", s.trim())))?;
        if !v.is_finite() {
            return Err(err(format!("non-finite coordinate {:?}", s.trim())));
        }
        Ok(T::lit(v))
    };
    Ok(Point2::new(coord(x)?, coord(y)?))
}

/// Writes one `x,y` line per point with 17 significant digits, contours separated by a blank line.
pub fn save_points<T: Scalar>(shape: &Shape<T>) -> String {
    let mut out = String::new();
    for (i, c) in shape.contours.iter().enumerate() {
        if i > 0 {
            out.push('\n');
        }
        for p in &c.points {
            out.push_str(&format_significant(p.x, 17));
            out.push(',');
            out.push_str(&format_significant(p.y, 17));
            out.push('\n');
        }
    }
    out
}

/// JSON form of a shape: `{"contours": [[[x,y],...],...], "label": string|null}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct ShapeJson<T> {
    pub contours: Vec<Vec<Point2<T>>>,
    pub label: Option<String>,
}

impl<T: Scalar> From<&Shape<T>> for ShapeJson<T> {
    fn from(s: &Shape<T>) -> Self {
        Self { contours: s.contours.iter().map(|c| c.points.clone()).collect(), label: s.label.clone() }
    }
}

impl<T: Scalar> From<ShapeJson<T>> for Shape<T> {
    fn from(j: ShapeJson<T>) -> Self {
        Shape { contours: j.contours.into_iter().map(Contour::closed).collect(), label: j.label }
    }
}

pub fn shape_to_json<T: Scalar>(shape: &Shape<T>) -> String {
    serde_json::to_string(&ShapeJson::from(shape)).expect("shape serializes")
}

pub fn shape_from_json<T: Scalar>(text: &str) -> Result<Shape<T>> {
    let j: ShapeJson<T> = serde_json::from_str(text).map_err(|e| Error::Parse { line: e.line(), message: e.to_string() })?;
    Ok(j.into())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn single_contour() {
        let s: Shape<f64> = load_points("0,0\n1,0\n1,1\n").unwrap();
        assert_eq!(s.contours.len(), 1);
        assert_eq!(s.len(), 3);
        assert_eq!(s.contours[0].points[2], Point2::new(1.0, 1.0));
    }

    #[test]
    fn blank_line_separates_contours() {
        let s: Shape<f64> = load_points("0,0\n\n5,5\n6,5\n").unwrap();
        assert_eq!(s.contours.len(), 2);
        assert_eq!(s.contours[0].len(), 1);
        assert_eq!(s.contours[1].len(), 2);
    }

    #[test]
    fn parse_errors_carry_line_numbers() {
        assert!(matches!(load_points::<f64>("0,abc\n"), Err(Error::Parse { line: 1, .. })));
        assert!(matches!(load_points::<f64>("0,0\n1\n"), Err(Error::Parse { line: 2, .. })));
        assert!(matches!(load_points::<f64>("0,0\n\n1,2,3\n"), Err(Error::Parse { line: 3, .. })));
        assert!(matches!(load_points::<f64>("nan,0\n"), Err(Error::Parse { line: 1, .. })));
        assert_eq!(load_points::<f64>("\n# nothing\n"), Err(Error::EmptyShape));
    }

    #[test]
    fn json_schema() {
        let s: Shape<f64> = load_points("0,0\n1.5,0\n\n2,2\n").unwrap();
        assert_eq!(shape_to_json(&s), r#"{"contours":[[[0.0,0.0],[1.5,0.0]],[[2.0,2.0]]],"label":null}"#);
        let back: Shape<f64> = shape_from_json(&shape_to_json(&s.clone().with_label("x"))).unwrap();
        assert_eq!(back, s.with_label("x"));
    }

    fn arb_shape() -> impl Strategy<Value = Shape<f64>> {
        let coord = prop_oneof![any::<f64>().prop_filter("finite", |v| v.is_finite()), -1e6..1e6f64];
        prop::collection::vec(prop::collection::vec((coord.clone(), coord), 1..12), 1..4).prop_map(|cs| {
            Shape::new(
                cs.into_iter()
                    .map(|c| Contour::closed(c.into_iter().map(|(x, y)| Point2::new(x, y)).collect()))
                    .collect(),
            )
        })
    }

    proptest! {
        #[test]
        fn csv_round_trip_is_bit_exact(s in arb_shape()) {
            let back: Shape<f64> = load_points(&save_points(&s)).unwrap();
            prop_assert_eq!(back.contours.len(), s.contours.len());
            for (a, b) in back.points().zip(s.points()) {
                prop_assert_eq!(a.x.to_bits(), b.x.to_bits());
                prop_assert_eq!(a.y.to_bits(), b.y.to_bits());
            }
        }
    }
}
