//! Bidirectional shape correspondence for 2-D shapes.
//!
//! Points on two shapes are described by log-polar shape contexts and
//! compared with the chi-square cost. Instead of a one-to-one assignment,
//! every point on each shape picks its cheapest partner on the other
//! ([`forward_correspondences`], [`backward_correspondences`]), which yields
//! many-to-many matches in `O(M^2)` time. The mean of the two directions'
//! average costs is the shape distance ([`bidirectional_cost`]).
//!
//! For warping, each direction's match costs are split into good and bad
//! groups with Otsu's criterion ([`prune`]); the cheaper pruned direction
//! supplies control points for a thin-plate spline ([`fit_tps`]), and
//! [`match_shapes`] iterates correspondence and warping a few times before
//! scoring.
//!
//! All numeric code is generic over [`Scalar`] (`f32` or `f64`); the
//! `*64`/`*32` aliases below name the common instantiations.
//!
//! ```
//! use bsc::{generate_shape, match_shapes, PipelineConfig64, Shape64, ShapeFamily};
//!
//! let a: Shape64 = generate_shape(ShapeFamily::Star, 60, 0.02, 1).unwrap();
//! let b: Shape64 = generate_shape(ShapeFamily::Star, 50, 0.02, 2).unwrap();
//! let result = match_shapes(&a, &b, &PipelineConfig64::default()).unwrap();
//! assert!(result.score >= 0.0 && result.score < 1.0);
//! ```

pub mod baseline;
pub mod clustering;
pub mod correspondence;
pub mod descriptor;
mod error;
pub mod format;
mod linalg;
pub mod pipeline;
mod scalar;
pub mod shapes;
pub mod svg;
pub mod tps;

pub use baseline::{
    bench_scaling, generate_shape, hungarian, synthetic_gallery, Algorithm, Assignment, BenchRecord, BenchReport,
    ShapeFamily,
};
pub use clustering::{otsu_exact, otsu_threshold, OtsuMode, OtsuResult, DEFAULT_OTSU_BINS};
pub use correspondence::{
    backward_correspondences, bidirectional_cost, forward_correspondences, prune, prune_with, select_direction,
    CorrespondenceJson, CorrespondencePair, CorrespondenceSet, Direction, PrunedCorrespondenceSet,
};
pub use descriptor::{chi2_cost, compute_descriptors, cost_matrix, shape_cost_matrix, CostMatrix, DescriptorSet, ShapeContextParams};
pub use error::{Error, Result};
pub use pipeline::{classify_knn, leave_one_out_accuracy, match_shapes, Classification, MatchResult, MatchResultJson, PipelineConfig};
pub use scalar::Scalar;
pub use shapes::{
    extract_contours, load_pgm, load_points, normalize, save_points, BinaryImage, Contour, Point2, Shape,
};
pub use tps::{fit_tps, TpsConstraints, TpsModel};

pub type Point64 = Point2<f64>;
pub type Shape64 = Shape<f64>;
pub type CostMatrix64 = CostMatrix<f64>;
pub type ShapeContextParams64 = ShapeContextParams<f64>;
pub type TpsModel64 = TpsModel<f64>;
pub type PipelineConfig64 = PipelineConfig<f64>;
pub type MatchResult64 = MatchResult<f64>;

pub type Point32 = Point2<f32>;
pub type Shape32 = Shape<f32>;
pub type CostMatrix32 = CostMatrix<f32>;
pub type ShapeContextParams32 = ShapeContextParams<f32>;
pub type TpsModel32 = TpsModel<f32>;
pub type PipelineConfig32 = PipelineConfig<f32>;
pub type MatchResult32 = MatchResult<f32>;
