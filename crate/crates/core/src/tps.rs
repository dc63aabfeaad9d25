//! Thin-plate-spline interpolation `R^2 -> R^2` from point constraints.
//!
//! Each output coordinate is `a0 + a1 x + a2 y + sum_i w_i U(|p - c_i|)` with
//! kernel `U(r) = r^2 log r^2`, `U(0) = 0`, and the side conditions
//! `sum w = sum w x = sum w y = 0`. The regularization `lambda` is added to
//! the kernel diagonal, so `lambda = 0` interpolates exactly.

use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use crate::linalg::solve;
use crate::shapes::{mean_pairwise_distance, Point2, Shape};
use crate::{Error, Result, Scalar};

/// Relative regularization: `lambda = DEFAULT_LAMBDA_SCALE * d^2`, `d` the
/// [`mean_pairwise_distance`] of the control points.
pub const DEFAULT_LAMBDA_SCALE: f64 = 1e-3;

#[inline]
pub fn tps_kernel<T: Scalar>(r2: T) -> T {
    if r2 > T::zero() {
        r2 * r2.ln()
    } else {
        T::zero()
    }
}

#[inline]
fn sq_dist<T: Scalar>(a: &Point2<T>, b: &Point2<T>) -> T {
    let (dx, dy) = (a.x - b.x, a.y - b.y);
    dx * dx + dy * dy
}

/// Matched source and target points, `f(source[i]) ~ target[i]`.
#[derive(Debug, Clone, PartialEq)]
pub struct TpsConstraints<T> {
    pub source: Vec<Point2<T>>,
    pub target: Vec<Point2<T>>,
}

impl<T: Scalar> TpsConstraints<T> {
    pub fn new(source: Vec<Point2<T>>, target: Vec<Point2<T>>) -> Result<Self> {
        if source.len() != target.len() {
            return Err(Error::LengthMismatch { left: source.len(), right: target.len() });
        }
        Ok(Self { source, target })
    }

    /// Drops constraints whose source repeats an earlier one.
    fn collapse_duplicates(&self) -> Self {
        let mut seen = HashSet::new();
        let (source, target) = self
            .source
            .iter()
            .zip(&self.target)
            .filter(|(s, _)| seen.insert((s.x.as_f64().to_bits(), s.y.as_f64().to_bits())))
            .map(|(s, t)| (*s, *t))
            .unzip();
        Self { source, target }
    }
}

/// `scale * d^2` for the mean pairwise distance `d` of `points`.
pub fn default_lambda<T: Scalar>(points: &[Point2<T>], scale: T) -> T {
    mean_pairwise_distance(points).map_or(T::zero(), |d| scale * d * d)
}

/// A fitted spline pair `(f_x, f_y)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct TpsModel<T> {
    pub control_points: Vec<Point2<T>>,
    /// `[w_x, w_y]` per control point.
    pub kernel_weights: Vec<[T; 2]>,
    /// Rows: constant, x, y coefficient; columns: f_x, f_y.
    pub affine: [[T; 2]; 3],
    pub lambda: T,
}

impl<T: Scalar> TpsModel<T> {
    pub fn identity() -> Self {
        Self {
            control_points: Vec::new(),
            kernel_weights: Vec::new(),
            affine: [[T::zero(), T::zero()], [T::one(), T::zero()], [T::zero(), T::one()]],
            lambda: T::zero(),
        }
    }

    pub fn warp_point(&self, p: &Point2<T>) -> Point2<T> {
        let [c, ax, ay] = self.affine;
        let mut fx = c[0] + ax[0] * p.x + ay[0] * p.y;
        let mut fy = c[1] + ax[1] * p.x + ay[1] * p.y;
        for (cp, w) in self.control_points.iter().zip(&self.kernel_weights) {
            let u = tps_kernel(sq_dist(p, cp));
            fx = fx + w[0] * u;
            fy = fy + w[1] * u;
        }
        Point2::new(fx, fy)
    }

    pub fn warp_shape(&self, s: &Shape<T>) -> Shape<T> {
        s.map_points(|p| self.warp_point(p))
    }

    /// `w^T K w` summed over both output coordinates; zero exactly when the map is affine.
    pub fn bending_energy(&self) -> T {
        let mut e = T::zero();
        for (i, (ci, wi)) in self.control_points.iter().zip(&self.kernel_weights).enumerate() {
            for (cj, wj) in self.control_points[i + 1..].iter().zip(&self.kernel_weights[i + 1..]) {
                let k = tps_kernel(sq_dist(ci, cj));
                e = e + T::lit(2.0) * k * (wi[0] * wj[0] + wi[1] * wj[1]);
            }
        }
        e.max(T::zero())
    }

    /// Largest violation of the three side conditions, over both coordinates.
    pub fn side_condition_residual(&self) -> T {
        let mut worst = T::zero();
        for d in 0..2 {
            let (mut s, mut sx, mut sy) = (T::zero(), T::zero(), T::zero());
            for (p, w) in self.control_points.iter().zip(&self.kernel_weights) {
                s = s + w[d];
                sx = sx + w[d] * p.x;
                sy = sy + w[d] * p.y;
            }
            worst = worst.max(s.abs()).max(sx.abs()).max(sy.abs());
        }
        worst
    }
}

/// Fits the spline through `c` with diagonal regularization `lambda`.
///
/// The system is solved for the displacement `target - source` in centred,
/// unit-spread coordinates and mapped back, which keeps pixel-scale inputs
/// well conditioned and makes identical source and target give exactly the
/// identity map.
pub fn fit_tps<T: Scalar>(c: &TpsConstraints<T>, lambda: T) -> Result<TpsModel<T>> {
    if c.source.len() != c.target.len() {
        return Err(Error::LengthMismatch { left: c.source.len(), right: c.target.len() });
    }
    if lambda < T::zero() || !lambda.is_finite() {
        return Err(Error::BadParams(format!("lambda must be finite and >= 0, got {lambda}")));
    }
    if let Some(i) = c.source.iter().chain(&c.target).position(|p| !p.is_finite()) {
        return Err(Error::NonFiniteInput(i));
    }
    let c = c.collapse_duplicates();
    let n = c.source.len();
    if n < 3 {
        return Err(Error::SingularSystem(format!("need at least 3 distinct control points, got {n}")));
    }

    let inv_n = T::one() / T::count(n);
    let centre = Point2::new(
        c.source.iter().map(|p| p.x).sum::<T>() * inv_n,
        c.source.iter().map(|p| p.y).sum::<T>() * inv_n,
    );
    let spread = mean_pairwise_distance(&c.source).expect("n >= 3");
    let local: Vec<Point2<T>> = c
        .source
        .iter()
        .map(|p| Point2::new((p.x - centre.x) / spread, (p.y - centre.y) / spread))
        .collect();
    let local_lambda = lambda / (spread * spread);

    let dim = n + 3;
    let mut a = vec![T::zero(); dim * dim];
    for i in 0..n {
        for j in 0..n {
            a[i * dim + j] = if i == j { local_lambda } else { tps_kernel(sq_dist(&local[i], &local[j])) };
        }
        let row = [T::one(), local[i].x, local[i].y];
        for (k, &v) in row.iter().enumerate() {
            a[i * dim + n + k] = v;
            a[(n + k) * dim + i] = v;
        }
    }
    let mut b = vec![T::zero(); dim * 2];
    for (i, (s, t)) in c.source.iter().zip(&c.target).enumerate() {
        b[2 * i] = t.x - s.x;
        b[2 * i + 1] = t.y - s.y;
    }
    let x = solve(a, dim, b, 2)?;

    // U(|p~ - c~|) = U(|p - c|)/s^2 - (ln s^2 / s^2) |p - c|^2, and under the side
    // conditions the second term sums to the constant -(ln s^2/s^2) sum w |c|^2.
    let s2 = spread * spread;
    let log_s2 = s2.ln();
    let mut kernel_weights = Vec::with_capacity(n);
    let mut shift = [T::zero(); 2];
    for (i, p) in c.source.iter().enumerate() {
        let w = [x[2 * i], x[2 * i + 1]];
        let norm2 = p.x * p.x + p.y * p.y;
        for d in 0..2 {
            shift[d] = shift[d] - log_s2 / s2 * w[d] * norm2;
        }
        kernel_weights.push([w[0] / s2, w[1] / s2]);
    }
    let mut affine = [[T::zero(); 2]; 3];
    for d in 0..2 {
        let (a0, ax, ay) = (x[2 * n + d], x[2 * (n + 1) + d], x[2 * (n + 2) + d]);
        affine[0][d] = a0 - (ax * centre.x + ay * centre.y) / spread + shift[d];
        affine[1][d] = ax / spread;
        affine[2][d] = ay / spread;
    }
    affine[1][0] = affine[1][0] + T::one();
    affine[2][1] = affine[2][1] + T::one();

    Ok(TpsModel { control_points: c.source, kernel_weights, affine, lambda })
}
