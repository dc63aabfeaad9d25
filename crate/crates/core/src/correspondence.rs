//! Bidirectional best-match correspondences over a cost matrix.
//!
//! Every point of one shape independently picks its cheapest partner on the
//! other shape. Doing this from `P` to `Q` (rows of the matrix) gives the
//! forward set, from `Q` to `P` (columns) the backward set. Neither map is
//! required to be injective, which is what lets boundary segments of
//! different lengths correspond. Each sweep reads every matrix entry once,
//! so both together cost `O(mn)`.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::clustering::{OtsuMode, OtsuResult};
use crate::descriptor::CostMatrix;
use crate::scalar::mean;
use crate::{Error, Result, Scalar};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    /// Points of `P` (matrix rows) choose partners in `Q`.
    Forward,
    /// Points of `Q` (matrix columns) choose partners in `P`.
    Backward,
}

impl Direction {
    pub fn as_str(self) -> &'static str {
        match self {
            Direction::Forward => "forward",
            Direction::Backward => "backward",
        }
    }
}

/// `source_index` indexes the choosing shape, `target_index` the chosen one.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CorrespondencePair<T> {
    pub source_index: usize,
    pub target_index: usize,
    pub cost: T,
}

impl<T: Scalar> CorrespondencePair<T> {
    /// Index into `P` and into `Q`, whatever the direction.
    pub fn pq(&self, direction: Direction) -> (usize, usize) {
        match direction {
            Direction::Forward => (self.source_index, self.target_index),
            Direction::Backward => (self.target_index, self.source_index),
        }
    }
}

/// One best match per source point, plus the mean match cost.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrespondenceSet<T> {
    pub direction: Direction,
    pub pairs: Vec<CorrespondencePair<T>>,
    pub average_cost: T,
}

impl<T: Scalar> CorrespondenceSet<T> {
    pub fn costs(&self) -> Vec<T> {
        self.pairs.iter().map(|p| p.cost).collect()
    }

    /// Sources grouped by the target they chose; targets with two or more
    /// sources witness a many-to-one map.
    pub fn sources_by_target(&self) -> BTreeMap<usize, Vec<usize>> {
        group_by_target(&self.pairs)
    }
}

fn group_by_target<T>(pairs: &[CorrespondencePair<T>]) -> BTreeMap<usize, Vec<usize>> {
    let mut out: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for p in pairs {
        out.entry(p.target_index).or_default().push(p.source_index);
    }
    out
}

/// The good-match group of a [`CorrespondenceSet`] after two-class clustering of its costs.
#[derive(Debug, Clone, PartialEq)]
pub struct PrunedCorrespondenceSet<T> {
    pub direction: Direction,
    /// Kept pairs, in source order. Their sources form the domain of the pruned map.
    pub kept: Vec<CorrespondencePair<T>>,
    /// Pairs whose cost exceeded the threshold.
    pub dropped: Vec<CorrespondencePair<T>>,
    pub threshold: T,
    pub pruned_average_cost: T,
    pub kept_count: usize,
    pub split: OtsuResult<T>,
}

impl<T: Scalar> PrunedCorrespondenceSet<T> {
    pub fn total_count(&self) -> usize {
        self.kept.len() + self.dropped.len()
    }

    /// The pruned map as `source -> target`.
    pub fn map(&self) -> BTreeMap<usize, usize> {
        self.kept.iter().map(|p| (p.source_index, p.target_index)).collect()
    }

    pub fn sources_by_target(&self) -> BTreeMap<usize, Vec<usize>> {
        group_by_target(&self.kept)
    }

    /// True when some target is chosen by two or more kept sources.
    pub fn is_many_to_one(&self) -> bool {
        self.sources_by_target().values().any(|s| s.len() >= 2)
    }
}

fn check_nonempty<T: Scalar>(m: &CostMatrix<T>) -> Result<()> {
    if m.is_empty() {
        Err(Error::EmptyMatrix)
    } else {
        Ok(())
    }
}

/// Each row's cheapest column; ties go to the lowest column index.
pub fn forward_correspondences<T: Scalar>(m: &CostMatrix<T>) -> Result<CorrespondenceSet<T>> {
    check_nonempty(m)?;
    let pairs: Vec<_> = (0..m.rows())
        .map(|i| {
            let row = m.row(i);
            let (mut best_j, mut best) = (0, row[0]);
            for (j, &c) in row.iter().enumerate().skip(1) {
                if c < best {
                    best = c;
                    best_j = j;
                }
            }
            CorrespondencePair { source_index: i, target_index: best_j, cost: best }
        })
        .collect();
    let average_cost = mean(pairs.iter().map(|p| p.cost)).expect("nonempty");
    Ok(CorrespondenceSet { direction: Direction::Forward, pairs, average_cost })
}

/// Each column's cheapest row; ties go to the lowest row index.
pub fn backward_correspondences<T: Scalar>(m: &CostMatrix<T>) -> Result<CorrespondenceSet<T>> {
    check_nonempty(m)?;
    let mut best: Vec<(usize, T)> = m.row(0).iter().map(|&c| (0, c)).collect();
    for i in 1..m.rows() {
        for (slot, &c) in best.iter_mut().zip(m.row(i)) {
            if c < slot.1 {
                *slot = (i, c);
            }
        }
    }
    let pairs: Vec<_> = best
        .into_iter()
        .enumerate()
        .map(|(j, (i, cost))| CorrespondencePair { source_index: j, target_index: i, cost })
        .collect();
    let average_cost = mean(pairs.iter().map(|p| p.cost)).expect("nonempty");
    Ok(CorrespondenceSet { direction: Direction::Backward, pairs, average_cost })
}

/// Mean of the unpruned forward and backward average match costs.
pub fn bidirectional_cost<T: Scalar>(m: &CostMatrix<T>) -> Result<T> {
    let f = forward_correspondences(m)?;
    let b = backward_correspondences(m)?;
    Ok(bidirectional_from(&f, &b))
}

pub fn bidirectional_from<T: Scalar>(fwd: &CorrespondenceSet<T>, bwd: &CorrespondenceSet<T>) -> T {
    (fwd.average_cost + bwd.average_cost) * T::lit(0.5)
}

/// Splits a direction's match costs into good and bad groups and keeps the
/// good (low-cost) pairs. Costs equal to the threshold count as good.
pub fn prune<T: Scalar>(cs: &CorrespondenceSet<T>) -> Result<PrunedCorrespondenceSet<T>> {
    prune_with(cs, OtsuMode::Exact)
}

pub fn prune_with<T: Scalar>(cs: &CorrespondenceSet<T>, mode: OtsuMode) -> Result<PrunedCorrespondenceSet<T>> {
    if cs.pairs.is_empty() {
        return Err(Error::EmptyInput);
    }
    let split = mode.split(&cs.costs())?;
    let (kept, dropped): (Vec<CorrespondencePair<T>>, Vec<_>) = cs.pairs.iter().partition(|p| split.is_low(p.cost));
    debug_assert!(!kept.is_empty(), "low class always holds the minimum cost");
    let pruned_average_cost = mean(kept.iter().map(|p| p.cost)).expect("low class is nonempty");
    Ok(PrunedCorrespondenceSet {
        direction: cs.direction,
        kept_count: kept.len(),
        kept,
        dropped,
        threshold: split.threshold,
        pruned_average_cost,
        split,
    })
}

/// Skips clustering: every pair is kept.
pub fn keep_all<T: Scalar>(cs: &CorrespondenceSet<T>) -> PrunedCorrespondenceSet<T> {
    let threshold = cs.pairs.iter().map(|p| p.cost).fold(T::neg_infinity(), T::max);
    PrunedCorrespondenceSet {
        direction: cs.direction,
        kept: cs.pairs.clone(),
        dropped: Vec::new(),
        threshold,
        pruned_average_cost: cs.average_cost,
        kept_count: cs.pairs.len(),
        split: OtsuResult {
            threshold,
            low_class_count: cs.pairs.len(),
            high_class_count: 0,
            between_class_variance: T::zero(),
        },
    }
}

/// Forward when its pruned average cost is no larger than the backward one.
pub fn select_direction<T: Scalar>(pruned_fwd: &PrunedCorrespondenceSet<T>, pruned_bwd: &PrunedCorrespondenceSet<T>) -> Direction {
    if pruned_fwd.pruned_average_cost <= pruned_bwd.pruned_average_cost {
        Direction::Forward
    } else {
        Direction::Backward
    }
}

// JSON view: {"direction","pairs":[{"p","q","cost"}],"average_cost","pruned":{...}|null}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct PairJson<T> {
    pub p: usize,
    pub q: usize,
    pub cost: T,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct PrunedJson<T> {
    pub threshold: T,
    pub kept: Vec<PairJson<T>>,
    pub pruned_average_cost: T,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct CorrespondenceJson<T> {
    pub direction: Direction,
    pub pairs: Vec<PairJson<T>>,
    pub average_cost: T,
    pub pruned: Option<PrunedJson<T>>,
}

fn pair_json<T: Scalar>(direction: Direction, pairs: &[CorrespondencePair<T>]) -> Vec<PairJson<T>> {
    pairs
        .iter()
        .map(|pair| {
            let (p, q) = pair.pq(direction);
            PairJson { p, q, cost: pair.cost }
        })
        .collect()
}

impl<T: Scalar> CorrespondenceJson<T> {
    pub fn new(cs: &CorrespondenceSet<T>, pruned: Option<&PrunedCorrespondenceSet<T>>) -> Self {
        Self {
            direction: cs.direction,
            pairs: pair_json(cs.direction, &cs.pairs),
            average_cost: cs.average_cost,
            pruned: pruned.map(|pr| PrunedJson {
                threshold: pr.threshold,
                kept: pair_json(pr.direction, &pr.kept),
                pruned_average_cost: pr.pruned_average_cost,
            }),
        }
    }
}
