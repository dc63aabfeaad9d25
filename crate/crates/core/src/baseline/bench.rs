//! Wall-clock scaling of the correspondence phase against the assignment baseline.

use std::hint::black_box;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use super::generate::{generate_shape, ShapeFamily};
use super::hungarian::hungarian;
use crate::correspondence::{backward_correspondences, forward_correspondences};
use crate::descriptor::{shape_cost_matrix, ShapeContextParams};
use crate::shapes::Shape;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Algorithm {
    /// Descriptors, cost matrix and both best-match sweeps.
    #[serde(rename = "bsc")]
    BscCorrespondence,
    /// Optimal assignment on the same cost matrix.
    #[serde(rename = "hungarian")]
    Hungarian,
}

impl Algorithm {
    pub fn name(self) -> &'static str {
        match self {
            Algorithm::BscCorrespondence => "bsc",
            Algorithm::Hungarian => "hungarian",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "bsc" => Ok(Algorithm::BscCorrespondence),
            "hungarian" => Ok(Algorithm::Hungarian),
            _ => Err(Error::BadParams(format!("unknown algorithm {s:?} (expected bsc or hungarian)"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchRecord {
    pub algorithm: Algorithm,
    pub size: usize,
    /// Fastest of `repetitions` runs, seconds.
    pub wall_time: f64,
    pub repetitions: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchReport {
    pub records: Vec<BenchRecord>,
    /// Least-squares slope of log time against log size; `None` with fewer than two sizes.
    pub slopes: Vec<(Algorithm, Option<f64>)>,
}

impl BenchReport {
    pub fn slope(&self, algorithm: Algorithm) -> Option<f64> {
        self.slopes.iter().find(|(a, _)| *a == algorithm).and_then(|(_, s)| *s)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("algorithm,size,wall_time_s,repetitions\n");
        for r in &self.records {
            out.push_str(&format!("{},{},{:e},{}\n", r.algorithm.name(), r.size, r.wall_time, r.repetitions));
        }
        out
    }

    /// `{"slopes": {"bsc": 2.01, "hungarian": null}, "records": [...]}`
    pub fn summary_json(&self) -> serde_json::Value {
        let slopes: serde_json::Map<_, _> =
            self.slopes.iter().map(|(a, s)| (a.name().to_string(), serde_json::json!(s))).collect();
        serde_json::json!({ "slopes": slopes, "records": self.records })
    }
}

/// Ordinary least-squares slope through `(x, y)` after taking logs of both.
pub fn loglog_slope(points: &[(f64, f64)]) -> Option<f64> {
    if points.len() < 2 {
        return None;
    }
    let logs: Vec<(f64, f64)> = points.iter().map(|&(x, y)| (x.ln(), y.ln())).collect();
    let n = logs.len() as f64;
    let mx = logs.iter().map(|p| p.0).sum::<f64>() / n;
    let my = logs.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = logs.iter().map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = logs.iter().map(|(x, _)| (x - mx) * (x - mx)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

/// The pair of shapes benchmarked at `size`: two blobs from consecutive seeds.
pub fn bench_inputs(size: usize, seed: u64) -> Result<(Shape<f64>, Shape<f64>)> {
    Ok((
        generate_shape(ShapeFamily::Blob, size, 0.01, seed)?,
        generate_shape(ShapeFamily::Blob, size, 0.01, seed.wrapping_add(1))?,
    ))
}

fn min_time(repetitions: usize, mut f: impl FnMut()) -> f64 {
    (0..repetitions)
        .map(|_| {
            let t = Instant::now();
            f();
            t.elapsed().as_secs_f64()
        })
        .fold(f64::INFINITY, f64::min)
}

/// Times each algorithm at each size (single-threaded, best of `repetitions`)
/// and fits a log-log slope per algorithm.
pub fn bench_scaling(sizes: &[usize], algorithms: &[Algorithm], repetitions: usize, seed: u64) -> Result<BenchReport> {
    if sizes.is_empty() || sizes.windows(2).any(|w| w[0] >= w[1]) || sizes[0] < 50 {
        return Err(Error::BadParams("sizes must be strictly increasing and each >= 50".into()));
    }
    if repetitions < 3 {
        return Err(Error::BadParams(format!("repetitions must be >= 3, got {repetitions}")));
    }
    let params = ShapeContextParams::<f64>::default();
    let mut records = Vec::new();
    for &size in sizes {
        let (p, q) = bench_inputs(size, seed)?;
        let matrix = shape_cost_matrix(&p, &q, &params)?;
        for &algorithm in algorithms {
            let wall_time = match algorithm {
                Algorithm::BscCorrespondence => min_time(repetitions, || {
                    let m = shape_cost_matrix(black_box(&p), black_box(&q), &params).expect("valid bench shapes");
                    black_box(forward_correspondences(&m).expect("nonempty"));
                    black_box(backward_correspondences(&m).expect("nonempty"));
                }),
                Algorithm::Hungarian => min_time(repetitions, || {
                    black_box(hungarian(black_box(&matrix)).expect("square"));
                }),
            };
            records.push(BenchRecord { algorithm, size, wall_time, repetitions });
        }
    }
    let slopes = algorithms
        .iter()
        .map(|&a| {
            let pts: Vec<(f64, f64)> =
                records.iter().filter(|r| r.algorithm == a).map(|r| (r.size as f64, r.wall_time)).collect();
            (a, loglog_slope(&pts))
        })
        .collect();
    Ok(BenchReport { records, slopes })
}
