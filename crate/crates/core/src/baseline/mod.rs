//! One-to-one assignment baseline, synthetic shapes and the scaling benchmark.

mod bench;
mod generate;
mod hungarian;

pub use bench::{bench_inputs, bench_scaling, loglog_slope, Algorithm, BenchRecord, BenchReport};
pub use generate::{generate_shape, synthetic_gallery, ShapeFamily};
pub use hungarian::{hungarian, Assignment};
