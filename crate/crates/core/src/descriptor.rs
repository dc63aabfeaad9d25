//! Log-polar shape-context histograms and the chi-square cost matrix.

use serde::{Deserialize, Serialize};

use crate::shapes::{mean_pairwise_distance, Point2, Shape};
use crate::{Error, Result, Scalar};

/// Histogram geometry for shape contexts.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar", default, deny_unknown_fields)]
pub struct ShapeContextParams<T> {
    pub radial_bins: usize,
    pub angular_bins: usize,
    /// Innermost radial edge, as a fraction of the mean pairwise distance.
    pub r_inner: T,
    /// Outermost radial edge, as a fraction of the mean pairwise distance.
    pub r_outer: T,
    /// Measure angles against the local contour tangent instead of +x.
    pub rotation_invariant: bool,
}

impl<T: Scalar> Default for ShapeContextParams<T> {
    fn default() -> Self {
        Self {
            radial_bins: 5,
            angular_bins: 12,
            r_inner: T::lit(0.125),
            r_outer: T::lit(2.0),
            rotation_invariant: false,
        }
    }
}

impl<T: Scalar> ShapeContextParams<T> {
    pub fn validate(&self) -> Result<()> {
        if self.radial_bins < 2 || self.angular_bins < 4 {
            return Err(Error::BadParams(format!(
                "need radial_bins >= 2 and angular_bins >= 4, got {} and {}",
                self.radial_bins, self.angular_bins
            )));
        }
        if !(self.r_inner > T::zero() && self.r_inner < self.r_outer && self.r_outer.is_finite()) {
            return Err(Error::BadParams(format!(
                "need 0 < r_inner < r_outer, got {} and {}",
                self.r_inner, self.r_outer
            )));
        }
        Ok(())
    }

    pub fn bin_count(&self) -> usize {
        self.radial_bins * self.angular_bins
    }
}

/// Per-point shape-context histograms for one shape.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct DescriptorSet<T> {
    /// Row-major `m x bin_count` counts; bin index is `radial * angular_bins + angular`.
    histograms: Vec<u32>,
    source_points: Vec<Point2<T>>,
    params: ShapeContextParams<T>,
}

impl<T: Scalar> DescriptorSet<T> {
    pub fn len(&self) -> usize {
        self.source_points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.source_points.is_empty()
    }

    pub fn histogram(&self, i: usize) -> &[u32] {
        let b = self.params.bin_count();
        &self.histograms[i * b..(i + 1) * b]
    }

    pub fn histograms(&self) -> impl Iterator<Item = &[u32]> + '_ {
        self.histograms.chunks_exact(self.params.bin_count())
    }

    pub fn source_points(&self) -> &[Point2<T>] {
        &self.source_points
    }

    pub fn params(&self) -> &ShapeContextParams<T> {
        &self.params
    }

    /// Histograms scaled to unit mass.
    fn normalized(&self) -> Vec<T> {
        let mut out = Vec::with_capacity(self.histograms.len());
        for h in self.histograms() {
            let total = T::count(h.iter().map(|&c| c as usize).sum());
            out.extend(h.iter().map(|&c| if total > T::zero() { T::count(c as usize) / total } else { T::zero() }));
        }
        out
    }
}

/// Values that land within this many bin-widths below a bin edge are counted
/// in the upper bin, so round-off on lattice-aligned inputs cannot flip bins.
fn bin_snap<T: Scalar>() -> T {
    T::epsilon().sqrt()
}

/// Tangent direction at every point, by central differences along its contour.
fn tangent_angles<T: Scalar>(shape: &Shape<T>) -> Vec<T> {
    let mut out = Vec::with_capacity(shape.len());
    for c in &shape.contours {
        let n = c.points.len();
        for k in 0..n {
            if n == 1 {
                out.push(T::zero());
                continue;
            }
            let (prev, next) = if c.closed {
                ((k + n - 1) % n, (k + 1) % n)
            } else {
                (k.saturating_sub(1), (k + 1).min(n - 1))
            };
            let (a, b) = (c.points[prev], c.points[next]);
            out.push((b.y - a.y).atan2(b.x - a.x));
        }
    }
    out
}

/// Builds the shape context of every point of `shape`.
///
/// Radial bins are log-spaced over `[r_inner, r_outer]` times the mean pairwise
/// distance, with radii outside that range clamped into the first or last
/// bin, so every histogram holds exactly `m - 1` counts.
pub fn compute_descriptors<T: Scalar>(shape: &Shape<T>, params: &ShapeContextParams<T>) -> Result<DescriptorSet<T>> {
    params.validate()?;
    let points = shape.flat_points();
    let m = points.len();
    if m < 3 {
        return Err(Error::DegenerateShape(format!("shape contexts need at least 3 points, got {m}")));
    }
    let mean_dist = mean_pairwise_distance(&points).expect("m >= 3");
    if mean_dist <= T::zero() || !mean_dist.is_finite() {
        return Err(Error::DegenerateShape("mean pairwise distance is zero".into()));
    }
    let tangents = params.rotation_invariant.then(|| tangent_angles(shape));

    let (nr, na) = (params.radial_bins, params.angular_bins);
    let half = T::lit(0.5);
    let log_inner = params.r_inner.ln();
    let radial_scale = T::count(nr) / (params.r_outer.ln() - log_inner);
    let inv_mean_sq = T::one() / (mean_dist * mean_dist);
    let two_pi = T::TAU();
    let angular_scale = T::count(na) / two_pi;
    let snap = bin_snap::<T>();

    let mut histograms = vec![0u32; m * nr * na];
    for (i, p) in points.iter().enumerate() {
        let hist = &mut histograms[i * nr * na..(i + 1) * nr * na];
        let reference = tangents.as_ref().map_or(T::zero(), |t| t[i]);
        for (j, q) in points.iter().enumerate() {
            if i == j {
                continue;
            }
            let (dx, dy) = (q.x - p.x, q.y - p.y);
            let r2 = (dx * dx + dy * dy) * inv_mean_sq;
            let rt = ((half * r2.ln()) - log_inner) * radial_scale + snap;
            let rb = if rt >= T::zero() { rt.floor().to_usize().unwrap_or(nr - 1).min(nr - 1) } else { 0 };

            let mut theta = dy.atan2(dx) - reference;
            while theta < T::zero() {
                theta = theta + two_pi;
            }
            while theta >= two_pi {
                theta = theta - two_pi;
            }
            let mut ab = (theta * angular_scale + snap).floor().to_usize().unwrap_or(0);
            if ab >= na {
                ab -= na;
            }
            hist[rb * na + ab] += 1;
        }
    }
    Ok(DescriptorSet { histograms, source_points: points, params: *params })
}

/// Chi-square distance `1/2 sum (h - g)^2 / (h + g)` between two histograms,
/// each first scaled to unit mass. Terms with `h + g = 0` contribute nothing.
pub fn chi2_cost<T: Scalar>(h: &[T], g: &[T]) -> Result<T> {
    if h.len() != g.len() {
        return Err(Error::LengthMismatch { left: h.len(), right: g.len() });
    }
    let unit = |v: &[T]| {
        let s: T = v.iter().copied().sum();
        v.iter().map(|&x| if s > T::zero() { x / s } else { T::zero() }).collect::<Vec<_>>()
    };
    Ok(chi2_normalized(&unit(h), &unit(g)))
}

#[inline]
fn chi2_normalized<T: Scalar>(h: &[T], g: &[T]) -> T {
    let mut acc = T::zero();
    for (&a, &b) in h.iter().zip(g) {
        let s = a + b;
        if s > T::zero() {
            let d = a - b;
            acc = acc + d * d / s;
        }
    }
    (acc * T::lit(0.5)).min(T::one())
}

/// Dense `rows x cols` matrix of nonnegative match costs, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct CostMatrix<T> {
    rows: usize,
    cols: usize,
    values: Vec<T>,
}

impl<T: Scalar> CostMatrix<T> {
    /// Builds a matrix from row-major values. Entries must be finite and nonnegative.
    pub fn new(rows: usize, cols: usize, values: Vec<T>) -> Result<Self> {
        if values.len() != rows * cols {
            return Err(Error::LengthMismatch { left: values.len(), right: rows * cols });
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite() || *v < T::zero()) {
            return Err(Error::NonFiniteInput(i));
        }
        Ok(Self { rows, cols, values })
    }

    pub fn from_rows(rows: &[Vec<T>]) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        if let Some(bad) = rows.iter().find(|r| r.len() != cols) {
            return Err(Error::LengthMismatch { left: bad.len(), right: cols });
        }
        Self::new(rows.len(), cols, rows.concat())
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_empty(&self) -> bool {
        self.rows == 0 || self.cols == 0
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> T {
        self.values[i * self.cols + j]
    }

    pub fn row(&self, i: usize) -> &[T] {
        &self.values[i * self.cols..(i + 1) * self.cols]
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn transpose(&self) -> Self {
        let mut values = Vec::with_capacity(self.values.len());
        for j in 0..self.cols {
            values.extend((0..self.rows).map(|i| self.get(i, j)));
        }
        Self { rows: self.cols, cols: self.rows, values }
    }

    pub fn map(&self, f: impl Fn(T) -> T) -> Self {
        Self { rows: self.rows, cols: self.cols, values: self.values.iter().map(|&v| f(v)).collect() }
    }

    pub fn to_rows(&self) -> Vec<Vec<T>> {
        self.values.chunks(self.cols.max(1)).map(<[T]>::to_vec).collect()
    }
}

#[derive(Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
struct CostMatrixJson<T> {
    m: usize,
    n: usize,
    values: Vec<Vec<T>>,
}

impl<T: Scalar> Serialize for CostMatrix<T> {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        CostMatrixJson { m: self.rows, n: self.cols, values: self.to_rows() }.serialize(s)
    }
}

impl<'de, T: Scalar> Deserialize<'de> for CostMatrix<T> {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let j = CostMatrixJson::<T>::deserialize(d)?;
        if j.values.len() != j.m {
            return Err(serde::de::Error::custom(format!("expected {} rows, got {}", j.m, j.values.len())));
        }
        let m = Self::from_rows(&j.values).map_err(serde::de::Error::custom)?;
        if m.rows > 0 && m.cols != j.n {
            return Err(serde::de::Error::custom(format!("expected {} columns, got {}", j.n, m.cols)));
        }
        Ok(Self { rows: j.m, cols: j.n, values: m.values })
    }
}

/// Chi-square cost between every descriptor of `dp` (rows) and of `dq` (columns).
pub fn cost_matrix<T: Scalar>(dp: &DescriptorSet<T>, dq: &DescriptorSet<T>) -> Result<CostMatrix<T>> {
    if dp.params != dq.params {
        return Err(Error::ParamMismatch);
    }
    let bins = dp.params.bin_count();
    let (hp, hq) = (dp.normalized(), dq.normalized());
    let (m, n) = (dp.len(), dq.len());
    let mut values = Vec::with_capacity(m * n);
    for a in hp.chunks_exact(bins) {
        for b in hq.chunks_exact(bins) {
            values.push(chi2_normalized(a, b));
        }
    }
    Ok(CostMatrix { rows: m, cols: n, values })
}

/// Descriptors for both shapes and the cost matrix between them.
pub fn shape_cost_matrix<T: Scalar>(p: &Shape<T>, q: &Shape<T>, params: &ShapeContextParams<T>) -> Result<CostMatrix<T>> {
    cost_matrix(&compute_descriptors(p, params)?, &compute_descriptors(q, params)?)
}
