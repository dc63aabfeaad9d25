//! Iterated shape-context / thin-plate-spline matching and a k-NN classifier on top of it.

use serde::{Deserialize, Serialize};

use crate::clustering::OtsuMode;
use crate::correspondence::{
    backward_correspondences, bidirectional_from, forward_correspondences, keep_all, prune_with, select_direction,
    CorrespondenceJson, CorrespondenceSet, Direction, PrunedCorrespondenceSet,
};
use crate::descriptor::{shape_cost_matrix, ShapeContextParams};
use crate::shapes::{Contour, Shape, ShapeJson};
use crate::tps::{default_lambda, fit_tps, TpsConstraints, TpsModel, DEFAULT_LAMBDA_SCALE};
use crate::{Error, Result, Scalar};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar", default, deny_unknown_fields)]
pub struct PipelineConfig<T> {
    /// Number of correspondence + warp rounds before the final scoring pass.
    pub iterations: usize,
    /// Upper bound on TPS control points drawn from the kept pairs.
    pub tps_sample_count: usize,
    /// TPS regularization relative to the squared control-point spread.
    pub lambda_scale: T,
    pub sc_params: ShapeContextParams<T>,
    pub prune: bool,
    pub otsu: OtsuMode,
    /// Optional cap on points per shape; `None` uses every boundary point.
    pub max_points: Option<usize>,
}

impl<T: Scalar> Default for PipelineConfig<T> {
    fn default() -> Self {
        Self {
            iterations: 3,
            tps_sample_count: 100,
            lambda_scale: T::lit(DEFAULT_LAMBDA_SCALE),
            sc_params: ShapeContextParams::default(),
            prune: true,
            otsu: OtsuMode::Exact,
            max_points: None,
        }
    }
}

impl<T: Scalar> PipelineConfig<T> {
    pub fn validate(&self) -> Result<()> {
        self.sc_params.validate()?;
        if self.tps_sample_count < 3 {
            return Err(Error::BadParams(format!("tps_sample_count must be >= 3, got {}", self.tps_sample_count)));
        }
        if self.lambda_scale < T::zero() || !self.lambda_scale.is_finite() {
            return Err(Error::BadParams(format!("lambda_scale must be finite and >= 0, got {}", self.lambda_scale)));
        }
        if let OtsuMode::Binned(0) = self.otsu {
            return Err(Error::BadParams("otsu bins must be positive".into()));
        }
        if matches!(self.max_points, Some(n) if n < 3) {
            return Err(Error::BadParams("max_points must be >= 3".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct IterationRecord<T> {
    /// Direction chosen this round; its source shape is the one warped.
    pub direction: Direction,
    pub bidirectional_cost: T,
    pub forward_cost: T,
    pub backward_cost: T,
    pub pruned_forward_cost: T,
    pub pruned_backward_cost: T,
    pub kept_forward: usize,
    pub kept_backward: usize,
}

/// One scoring pass: both directions, pruned, with the chosen one.
#[derive(Debug, Clone, PartialEq)]
pub struct Pass<T> {
    pub forward: CorrespondenceSet<T>,
    pub backward: CorrespondenceSet<T>,
    pub pruned_forward: PrunedCorrespondenceSet<T>,
    pub pruned_backward: PrunedCorrespondenceSet<T>,
    pub direction: Direction,
    /// Unpruned bidirectional cost.
    pub score: T,
}

impl<T: Scalar> Pass<T> {
    pub fn chosen(&self) -> (&CorrespondenceSet<T>, &PrunedCorrespondenceSet<T>) {
        match self.direction {
            Direction::Forward => (&self.forward, &self.pruned_forward),
            Direction::Backward => (&self.backward, &self.pruned_backward),
        }
    }

    fn record(&self) -> IterationRecord<T> {
        IterationRecord {
            direction: self.direction,
            bidirectional_cost: self.score,
            forward_cost: self.forward.average_cost,
            backward_cost: self.backward.average_cost,
            pruned_forward_cost: self.pruned_forward.pruned_average_cost,
            pruned_backward_cost: self.pruned_backward.pruned_average_cost,
            kept_forward: self.pruned_forward.kept_count,
            kept_backward: self.pruned_backward.kept_count,
        }
    }
}

/// Computes descriptors, the cost matrix, both correspondence directions and
/// their pruned subsets, and picks a direction. With `prune = false` every
/// pair is kept.
pub fn correspondence_pass<T: Scalar>(p: &Shape<T>, q: &Shape<T>, cfg: &PipelineConfig<T>) -> Result<Pass<T>> {
    let m = shape_cost_matrix(p, q, &cfg.sc_params)?;
    let forward = forward_correspondences(&m)?;
    let backward = backward_correspondences(&m)?;
    let (pruned_forward, pruned_backward) = if cfg.prune {
        (prune_with(&forward, cfg.otsu)?, prune_with(&backward, cfg.otsu)?)
    } else {
        (keep_all(&forward), keep_all(&backward))
    };
    let direction = select_direction(&pruned_forward, &pruned_backward);
    let score = bidirectional_from(&forward, &backward);
    Ok(Pass { forward, backward, pruned_forward, pruned_backward, direction, score })
}

#[derive(Debug, Clone, PartialEq)]
pub struct MatchResult<T> {
    /// Unpruned bidirectional cost of the final pass.
    pub score: T,
    pub per_iteration: Vec<IterationRecord<T>>,
    /// Chosen direction's pruned set from the final pass.
    pub final_correspondences: PrunedCorrespondenceSet<T>,
    pub final_pass: Pass<T>,
    pub warp_models: Vec<TpsModel<T>>,
    /// Both shapes as they stood for the final pass.
    pub warped_p: Shape<T>,
    pub warped_q: Shape<T>,
}

/// Keeps every `len/max`-th point (by global index) when a shape exceeds `max` points.
pub fn subsample<T: Scalar>(shape: &Shape<T>, max: usize) -> Shape<T> {
    let total = shape.len();
    if total <= max {
        return shape.clone();
    }
    let keep: Vec<usize> = (0..max).map(|k| k * total / max).collect();
    let mut next = 0;
    let mut offset = 0;
    let mut contours = Vec::new();
    for c in &shape.contours {
        let mut points = Vec::new();
        while next < keep.len() && keep[next] < offset + c.len() {
            points.push(c.points[keep[next] - offset]);
            next += 1;
        }
        offset += c.len();
        if !points.is_empty() {
            contours.push(Contour { points, closed: c.closed });
        }
    }
    Shape { contours, label: shape.label.clone() }
}

fn prepare<T: Scalar>(s: &Shape<T>, cfg: &PipelineConfig<T>) -> Result<Shape<T>> {
    let s = s.dedup();
    let s = match cfg.max_points {
        Some(max) => subsample(&s, max),
        None => s,
    };
    if s.len() < 3 {
        return Err(Error::DegenerateShape(format!("matching needs at least 3 distinct points, got {}", s.len())));
    }
    Ok(s)
}

/// Evenly spaced picks by index: `count` of `len` items.
fn sample_indices(len: usize, count: usize) -> impl Iterator<Item = usize> {
    let count = count.min(len);
    (0..count).map(move |k| k * len / count)
}

/// Matches `p` against `q`.
///
/// Each round computes correspondences on the current shapes, prunes both
/// directions, picks one, fits a spline on up to `tps_sample_count` kept
/// pairs and warps that direction's source shape onto the other. A final
/// pass with no warp after it supplies the score.
pub fn match_shapes<T: Scalar>(p: &Shape<T>, q: &Shape<T>, cfg: &PipelineConfig<T>) -> Result<MatchResult<T>> {
    cfg.validate()?;
    let mut cur_p = prepare(p, cfg)?;
    let mut cur_q = prepare(q, cfg)?;
    let mut per_iteration = Vec::with_capacity(cfg.iterations);
    let mut warp_models = Vec::with_capacity(cfg.iterations);

    for _ in 0..cfg.iterations {
        let pass = correspondence_pass(&cur_p, &cur_q, cfg)?;
        per_iteration.push(pass.record());

        let (_, chosen) = pass.chosen();
        let (src, dst) = match pass.direction {
            Direction::Forward => (cur_p.flat_points(), cur_q.flat_points()),
            Direction::Backward => (cur_q.flat_points(), cur_p.flat_points()),
        };
        let (source, target) = sample_indices(chosen.kept.len(), cfg.tps_sample_count)
            .map(|k| {
                let pair = &chosen.kept[k];
                (src[pair.source_index], dst[pair.target_index])
            })
            .unzip();
        let constraints = TpsConstraints::new(source, target)?;
        let lambda = default_lambda(&constraints.source, cfg.lambda_scale);
        let model = fit_tps(&constraints, lambda)?;
        match pass.direction {
            Direction::Forward => cur_p = model.warp_shape(&cur_p),
            Direction::Backward => cur_q = model.warp_shape(&cur_q),
        }
        warp_models.push(model);
    }

    let final_pass = correspondence_pass(&cur_p, &cur_q, cfg)?;
    Ok(MatchResult {
        score: final_pass.score,
        per_iteration,
        final_correspondences: final_pass.chosen().1.clone(),
        final_pass,
        warp_models,
        warped_p: cur_p,
        warped_q: cur_q,
    })
}

/// JSON form of a [`MatchResult`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct MatchResultJson<T> {
    pub score: T,
    pub per_iteration: Vec<IterationRecord<T>>,
    pub final_correspondences: CorrespondenceJson<T>,
    pub warp_models: Vec<TpsModel<T>>,
    pub warped_p: ShapeJson<T>,
    pub warped_q: ShapeJson<T>,
}

impl<T: Scalar> From<&MatchResult<T>> for MatchResultJson<T> {
    fn from(r: &MatchResult<T>) -> Self {
        let (set, pruned) = r.final_pass.chosen();
        Self {
            score: r.score,
            per_iteration: r.per_iteration.clone(),
            final_correspondences: CorrespondenceJson::new(set, Some(pruned)),
            warp_models: r.warp_models.clone(),
            warped_p: (&r.warped_p).into(),
            warped_q: (&r.warped_q).into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Classification<T> {
    pub label: String,
    /// `(gallery index, score)` of the k nearest, best first.
    pub neighbors: Vec<(usize, T)>,
}

/// Ranks every gallery entry by match score against `query`.
pub fn rank_gallery<T: Scalar>(query: &Shape<T>, gallery: &[Shape<T>], cfg: &PipelineConfig<T>) -> Result<Vec<(usize, T)>> {
    let mut scored = gallery
        .iter()
        .enumerate()
        .map(|(i, g)| match_shapes(query, g, cfg).map(|r| (i, r.score)))
        .collect::<Result<Vec<_>>>()?;
    scored.sort_by(|a, b| a.1.partial_cmp(&b.1).unwrap_or(std::cmp::Ordering::Equal).then(a.0.cmp(&b.0)));
    Ok(scored)
}

/// Majority vote among the labels of `ranked[..k]`; ties go to the label with
/// the smaller mean score, then to the one appearing first in the gallery.
pub fn vote<T: Scalar>(ranked: &[(usize, T)], labels: &[&str], k: usize) -> String {
    struct Tally<T> {
        count: usize,
        sum: T,
        first: usize,
    }
    let mut tallies: Vec<(&str, Tally<T>)> = Vec::new();
    for &(i, score) in ranked.iter().take(k.max(1)) {
        match tallies.iter_mut().find(|(l, _)| *l == labels[i]) {
            Some((_, t)) => {
                t.count += 1;
                t.sum = t.sum + score;
                t.first = t.first.min(i);
            }
            None => tallies.push((labels[i], Tally { count: 1, sum: score, first: i })),
        }
    }
    let best = tallies
        .into_iter()
        .min_by(|(_, a), (_, b)| {
            let mean_a = a.sum / T::count(a.count);
            let mean_b = b.sum / T::count(b.count);
            b.count
                .cmp(&a.count)
                .then(mean_a.partial_cmp(&mean_b).unwrap_or(std::cmp::Ordering::Equal))
                .then(a.first.cmp(&b.first))
        })
        .expect("at least one neighbour");
    best.0.to_string()
}

fn labels_of<T: Scalar>(gallery: &[Shape<T>]) -> Result<Vec<&str>> {
    gallery
        .iter()
        .enumerate()
        .map(|(i, s)| s.label.as_deref().ok_or_else(|| Error::BadParams(format!("gallery shape {i} has no label"))))
        .collect()
}

/// k-nearest-neighbour label of `query` under the match score.
pub fn classify_knn<T: Scalar>(
    query: &Shape<T>,
    gallery: &[Shape<T>],
    k: usize,
    cfg: &PipelineConfig<T>,
) -> Result<Classification<T>> {
    if gallery.is_empty() {
        return Err(Error::EmptyGallery);
    }
    if k == 0 {
        return Err(Error::BadParams("k must be >= 1".into()));
    }
    let labels = labels_of(gallery)?;
    let ranked = rank_gallery(query, gallery, cfg)?;
    let label = vote(&ranked, &labels, k);
    Ok(Classification { label, neighbors: ranked.into_iter().take(k).collect() })
}

/// Fraction of gallery shapes whose k-NN label among the others matches their own.
pub fn leave_one_out_accuracy<T: Scalar>(gallery: &[Shape<T>], k: usize, cfg: &PipelineConfig<T>) -> Result<f64> {
    if gallery.len() < 2 {
        return Err(Error::EmptyGallery);
    }
    let labels = labels_of(gallery)?;
    let mut correct = 0;
    for (i, query) in gallery.iter().enumerate() {
        let rest: Vec<Shape<T>> = gallery.iter().enumerate().filter(|(j, _)| *j != i).map(|(_, s)| s.clone()).collect();
        if classify_knn(query, &rest, k, cfg)?.label == labels[i] {
            correct += 1;
        }
    }
    Ok(correct as f64 / gallery.len() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::shapes::Point2;

    fn blob(seed: u64) -> Shape<f64> {
        crate::baseline::generate_shape(crate::baseline::ShapeFamily::Blob, 40, 0.02, seed).unwrap()
    }

    #[test]
    fn self_match_is_identity() {
        let s = blob(3);
        let r = match_shapes(&s, &s, &PipelineConfig::default()).unwrap();
        assert_eq!(r.score, 0.0);
        assert_eq!(r.per_iteration.len(), 3);
        assert!(r.final_correspondences.kept.iter().all(|p| p.source_index == p.target_index));
        assert_eq!(r.warped_p, s);
    }

    #[test]
    fn zero_iterations_is_one_pass() {
        let (a, b) = (blob(1), blob(2));
        let cfg = PipelineConfig { iterations: 0, ..Default::default() };
        let r = match_shapes(&a, &b, &cfg).unwrap();
        assert!(r.per_iteration.is_empty() && r.warp_models.is_empty());
        let direct = crate::bidirectional_cost(&shape_cost_matrix(&a, &b, &cfg.sc_params).unwrap()).unwrap();
        assert_eq!(r.score, direct);
        let swapped = match_shapes(&b, &a, &cfg).unwrap();
        assert!((r.score - swapped.score).abs() < 1e-12);
    }

    #[test]
    fn records_are_consistent() {
        let (a, b) = (blob(5), blob(6));
        let r = match_shapes(&a, &b, &PipelineConfig::default()).unwrap();
        for rec in &r.per_iteration {
            let expect = if rec.pruned_forward_cost <= rec.pruned_backward_cost { Direction::Forward } else { Direction::Backward };
            assert_eq!(rec.direction, expect);
            assert!(rec.pruned_forward_cost <= rec.forward_cost);
            assert!(rec.pruned_backward_cost <= rec.backward_cost);
            assert!(rec.kept_forward >= 1 && rec.kept_backward >= 1);
        }
        assert_eq!(r, match_shapes(&a, &b, &PipelineConfig::default()).unwrap());
    }

    #[test]
    fn subsample_keeps_structure() {
        let s = Shape::new(vec![
            Contour::closed((0..10).map(|i| Point2::new(i as f64, 0.0)).collect()),
            Contour::closed((0..10).map(|i| Point2::new(i as f64, 5.0)).collect()),
        ]);
        let t = subsample(&s, 5);
        assert_eq!(t.len(), 5);
        assert_eq!(t.contours.len(), 2);
        assert_eq!(subsample(&s, 50), s);
    }

    #[test]
    fn degenerate_inputs() {
        let tiny = Shape::from_points(vec![Point2::new(0.0, 0.0), Point2::new(1.0, 0.0)]);
        assert!(matches!(match_shapes(&tiny, &blob(1), &PipelineConfig::default()), Err(Error::DegenerateShape(_))));
        let bad = PipelineConfig { tps_sample_count: 2, ..PipelineConfig::<f64>::default() };
        assert!(matches!(match_shapes(&blob(1), &blob(1), &bad), Err(Error::BadParams(_))));
    }

    #[test]
    fn vote_rules() {
        let labels = ["a", "b", "b", "a"];
        assert_eq!(vote(&[(0, 0.1), (1, 0.2), (2, 0.3)], &labels, 3), "b");
        // one vote each: smaller mean wins
        assert_eq!(vote(&[(1, 0.1), (0, 0.2)], &labels, 2), "b");
        // equal counts and means: earliest gallery entry wins
        assert_eq!(vote(&[(1, 0.2), (0, 0.2)], &labels, 2), "a");
    }

    #[test]
    fn knn_examples() {
        let gallery = vec![blob(1).with_label("x"), blob(2).with_label("y"), blob(3).with_label("z")];
        let c = classify_knn(&blob(2), &gallery, 1, &PipelineConfig::default()).unwrap();
        assert_eq!(c.label, "y");
        assert_eq!(c.neighbors[0], (1, 0.0));
        let one = vec![blob(4).with_label("only")];
        assert_eq!(classify_knn(&blob(9), &one, 5, &PipelineConfig::default()).unwrap().label, "only");
        assert_eq!(classify_knn(&blob(9), &[], 1, &PipelineConfig::default()), Err(Error::EmptyGallery));
    }
}
