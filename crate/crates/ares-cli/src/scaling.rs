//! Scaling measurements: compression time as a function of the dataset size
//! and of the vector dimension, summarized as log-log slopes.
//!
//! Data generation happens outside the timed region; each grid point is
//! repeated and the median is used for the slope fit, so a stray descheduled
//! run does not tilt the estimate.

use std::time::Instant;

use ares_core::ingest::generate_uniform;
use ares_core::{compress_batch, DomainScaling, SolverKind};

use crate::report::median;

#[derive(Debug, Clone)]
pub struct ScalingConfig {
    /// Dataset sizes to sweep at fixed dimension.
    pub count_grid: Vec<usize>,
    /// Vector dimensions to sweep at fixed dataset size.
    pub dim_grid: Vec<usize>,
    pub fixed_count: usize,
    pub fixed_dim: usize,
    pub target_dim: usize,
    pub repeats: usize,
    pub threads: usize,
    pub seed: u64,
    pub scaling: DomainScaling,
    pub solver: SolverKind,
}

impl Default for ScalingConfig {
    fn default() -> Self {
        ScalingConfig {
            count_grid: vec![500, 1000, 2000, 4000],
            dim_grid: vec![500, 1000, 2000, 4000],
            fixed_count: 1000,
            fixed_dim: 1000,
            target_dim: 10,
            repeats: 3,
            threads: 1,
            seed: 7,
            scaling: DomainScaling::Unit,
            solver: SolverKind::Qr,
        }
    }
}

#[derive(Debug, Clone)]
pub struct ScalingRow {
    /// "count" or "dim".
    pub axis: &'static str,
    pub size: usize,
    /// 1-based repetition, or 0 for the median row.
    pub repetition: usize,
    pub compress_ms: f64,
}

#[derive(Debug)]
pub struct ScalingSummary {
    pub rows: Vec<ScalingRow>,
    pub slope_vs_count: f64,
    pub slope_vs_dim: f64,
}

/// Least-squares slope of ln(ms) against ln(size).
pub fn loglog_slope(points: &[(f64, f64)]) -> f64 {
    let n = points.len() as f64;
    let (mut sx, mut sy, mut sxx, mut sxy) = (0.0, 0.0, 0.0, 0.0);
    for &(size, ms) in points {
        let x = size.ln();
        let y = ms.ln();
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    (n * sxy - sx * sy) / (n * sxx - sx * sx)
}

fn time_compress_ms(
    data: &[ares_core::VectorRecord],
    config: &ScalingConfig,
    pool: &rayon::ThreadPool,
) -> f64 {
    let start = Instant::now();
    let records = pool
        .install(|| compress_batch(data, config.target_dim, config.scaling, config.solver))
        .expect("scaling fit");
    let elapsed = start.elapsed().as_secs_f64() * 1e3;
    std::hint::black_box(&records);
    elapsed
}

pub fn run_scaling(config: &ScalingConfig) -> ScalingSummary {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.threads)
        .build()
        .expect("worker pool");

    let mut rows = Vec::new();
    let mut count_points = Vec::new();
    let mut dim_points = Vec::new();

    for &count in &config.count_grid {
        let data = generate_uniform(config.seed, count, config.fixed_dim);
        // One untimed run per grid point absorbs allocator and page-fault
        // warm-up, which otherwise dominates the small sizes.
        let _ = time_compress_ms(&data, config, &pool);
        let mut times = Vec::new();
        for repetition in 1..=config.repeats.max(1) {
            let ms = time_compress_ms(&data, config, &pool);
            times.push(ms);
            rows.push(ScalingRow {
                axis: "count",
                size: count,
                repetition,
                compress_ms: ms,
            });
        }
        let med = median(&mut times);
        rows.push(ScalingRow {
            axis: "count",
            size: count,
            repetition: 0,
            compress_ms: med,
        });
        count_points.push((count as f64, med));
    }

    for &dim in &config.dim_grid {
        let data = generate_uniform(config.seed, config.fixed_count, dim);
        let _ = time_compress_ms(&data, config, &pool);
        let mut times = Vec::new();
        for repetition in 1..=config.repeats.max(1) {
            let ms = time_compress_ms(&data, config, &pool);
            times.push(ms);
            rows.push(ScalingRow {
                axis: "dim",
                size: dim,
                repetition,
                compress_ms: ms,
            });
        }
        let med = median(&mut times);
        rows.push(ScalingRow {
            axis: "dim",
            size: dim,
            repetition: 0,
            compress_ms: med,
        });
        dim_points.push((dim as f64, med));
    }

    ScalingSummary {
        rows,
        slope_vs_count: loglog_slope(&count_points),
        slope_vs_dim: loglog_slope(&dim_points),
    }
}

pub fn to_csv(summary: &ScalingSummary) -> String {
    let mut out = String::from("axis,size,repetition,compress_ms\n");
    for r in &summary.rows {
        let rep = if r.repetition == 0 {
            "median".to_string()
        } else {
            r.repetition.to_string()
        };
        out.push_str(&format!("{},{},{},{:.3}\n", r.axis, r.size, rep, r.compress_ms));
    }
    out.push_str(&format!(
        "# slope_vs_count,{:.4}\n# slope_vs_dim,{:.4}\n",
        summary.slope_vs_count, summary.slope_vs_dim
    ));
    out
}
