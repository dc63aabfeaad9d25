//! Two-class splitting of 1-D value sets by Otsu's between-class variance criterion.

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use crate::{Error, Result, Scalar};

pub const DEFAULT_OTSU_BINS: usize = 64;

/// Outcome of a two-class split. The low class is every value `<= threshold`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct OtsuResult<T> {
    pub threshold: T,
    pub low_class_count: usize,
    pub high_class_count: usize,
    pub between_class_variance: T,
}

impl<T: Scalar> OtsuResult<T> {
    fn constant(value: T, n: usize) -> Self {
        Self { threshold: value, low_class_count: n, high_class_count: 0, between_class_variance: T::zero() }
    }

    fn with_counts(values: &[T], threshold: T, between_class_variance: T) -> Self {
        let low = values.iter().filter(|&&v| v <= threshold).count();
        Self { threshold, low_class_count: low, high_class_count: values.len() - low, between_class_variance }
    }

    pub fn is_low(&self, v: T) -> bool {
        v <= self.threshold
    }
}

fn check<T: Scalar>(values: &[T]) -> Result<(T, T)> {
    if values.is_empty() {
        return Err(Error::EmptyInput);
    }
    if let Some(i) = values.iter().position(|v| !v.is_finite()) {
        return Err(Error::NonFiniteInput(i));
    }
    let lo = values.iter().copied().fold(T::infinity(), T::min);
    let hi = values.iter().copied().fold(T::neg_infinity(), T::max);
    Ok((lo, hi))
}

/// True when `var` beats `best` by more than round-off; near-equal objectives
/// count as ties and keep the earlier (smaller) threshold.
#[inline]
fn improves<T: Scalar>(var: T, best: Option<T>) -> bool {
    best.is_none_or(|b| var > b + b * T::epsilon() * T::lit(64.0))
}

/// `w0 * w1 * (mu0 - mu1)^2` for class weights given as counts.
#[inline]
fn between_class<T: Scalar>(n0: T, s0: T, n1: T, s1: T) -> T {
    let n = n0 + n1;
    let d = s0 / n0 - s1 / n1;
    (n0 / n) * (n1 / n) * d * d
}

/// Histogram-based Otsu threshold.
///
/// Values are binned into `bins` equal-width bins over `[min, max]` (bin `k`
/// covers `(min + k w, min + (k+1) w]`, the minimum joins bin 0) and the bin
/// edge maximizing between-class variance of the bin-centre histogram becomes
/// the threshold. Ties go to the smaller threshold. A constant input puts
/// everything in the low class.
pub fn otsu_threshold<T: Scalar>(values: &[T], bins: usize) -> Result<OtsuResult<T>> {
    let (lo, hi) = check(values)?;
    if bins == 0 {
        return Err(Error::BadParams("otsu needs at least one bin".into()));
    }
    if lo == hi {
        return Ok(OtsuResult::constant(lo, values.len()));
    }
    let width = (hi - lo) / T::count(bins);
    let mut counts = vec![0usize; bins];
    for &v in values {
        let k = ((v - lo) / width).ceil().to_usize().unwrap_or(0).saturating_sub(1).min(bins - 1);
        counts[k] += 1;
    }
    let centre = |k: usize| lo + (T::count(k) + T::lit(0.5)) * width;
    let total_n = T::count(values.len());
    let total_s: T = counts.iter().enumerate().map(|(k, &c)| T::count(c) * centre(k)).sum();

    let (mut n0, mut s0) = (T::zero(), T::zero());
    let mut best: Option<(usize, T)> = None;
    for k in 1..bins {
        n0 = n0 + T::count(counts[k - 1]);
        s0 = s0 + T::count(counts[k - 1]) * centre(k - 1);
        let n1 = total_n - n0;
        if n0 == T::zero() || n1 == T::zero() {
            continue;
        }
        let var = between_class(n0, s0, n1, total_s - s0);
        if improves(var, best.map(|(_, b)| b)) {
            best = Some((k, var));
        }
    }
    // a single bin offers no edge to split at
    let Some((k, var)) = best else {
        return Ok(OtsuResult::with_counts(values, hi, T::zero()));
    };
    Ok(OtsuResult::with_counts(values, lo + T::count(k) * width, var))
}

/// Exact Otsu split: every gap between consecutive distinct sorted values is a
/// candidate, and the low class is cut at the value below the best gap. This is
/// the limit of [`otsu_threshold`] as the bin count grows; ties go to the
/// smaller threshold.
pub fn otsu_exact<T: Scalar>(values: &[T]) -> Result<OtsuResult<T>> {
    let (lo, hi) = check(values)?;
    if lo == hi {
        return Ok(OtsuResult::constant(lo, values.len()));
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap_or(Ordering::Equal));
    let total_s: T = sorted.iter().copied().sum();
    let total_n = T::count(sorted.len());

    let mut s0 = T::zero();
    let mut best: Option<(usize, T)> = None;
    for k in 1..sorted.len() {
        s0 = s0 + sorted[k - 1];
        if sorted[k - 1] == sorted[k] {
            continue;
        }
        let n0 = T::count(k);
        let var = between_class(n0, s0, total_n - n0, total_s - s0);
        if improves(var, best.map(|(_, b)| b)) {
            best = Some((k, var));
        }
    }
    let (k, var) = best.expect("at least two distinct values");
    Ok(OtsuResult { threshold: sorted[k - 1], low_class_count: k, high_class_count: sorted.len() - k, between_class_variance: var })
}

/// Which split a pruning step uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OtsuMode {
    /// [`otsu_exact`].
    #[default]
    Exact,
    /// [`otsu_threshold`] with this many bins.
    Binned(usize),
}

impl OtsuMode {
    pub fn split<T: Scalar>(self, values: &[T]) -> Result<OtsuResult<T>> {
        match self {
            OtsuMode::Exact => otsu_exact(values),
            OtsuMode::Binned(bins) => otsu_threshold(values, bins),
        }
    }
}
