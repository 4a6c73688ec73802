//! The benchmark matrix: (algorithm x dataset x repetition) measurements of
//! compression time, decompression time, compression ratio, and MAE.
//!
//! MAE is always computed against the conditioned (normalized) inputs, since
//! that is what every algorithm consumes. Timing uses the monotonic clock.
//! Non-timing fields are independent of the worker-thread count: per-vector
//! work is bit-deterministic and all aggregation runs in input order.

use std::time::Instant;

use ares_core::baselines::{nmf_fit, pca_fit_transform, pca_inverse};
use ares_core::codec::HEADER_BYTES;
use ares_core::ingest::{load_dataset, DatasetSource, DatasetSpec, NormalizationScope};
use ares_core::{compress_batch, reconstruct_batch, DomainScaling, SolverKind, VectorRecord};

use crate::report::{Algorithm, BenchRow};

#[derive(Debug, Clone)]
pub struct BenchConfig {
    pub algorithms: Vec<Algorithm>,
    pub datasets: Vec<DatasetSpec>,
    pub target_dim: usize,
    pub repeats: usize,
    pub threads: usize,
    pub scaling: DomainScaling,
    pub solver: SolverKind,
    pub normalization: NormalizationScope,
    /// Row cap applied during conditioning (subsampling seed comes from the
    /// dataset spec).
    pub max_count: usize,
    pub nmf_iters: usize,
    pub nmf_seed: u64,
}

impl Default for BenchConfig {
    fn default() -> Self {
        BenchConfig {
            algorithms: vec![Algorithm::Ares, Algorithm::Pca, Algorithm::Nmf],
            datasets: vec![DatasetSpec {
                name: "synthetic".to_string(),
                source: DatasetSource::SyntheticUniform {
                    seed: 7,
                    count: 1000,
                    dim: 1000,
                },
                target_n: 1000,
                subsample_seed: 7,
            }],
            target_dim: 10,
            repeats: 5,
            threads: 0, // 0 = rayon default
            scaling: DomainScaling::Unit,
            solver: SolverKind::Qr,
            normalization: NormalizationScope::PerFeature,
            max_count: 1000,
            nmf_iters: 200,
            nmf_seed: 7,
        }
    }
}

/// Completed rows plus human-readable descriptions of any (algorithm,
/// dataset) cells that failed. A failing cell never emits a partial row.
#[derive(Debug)]
pub struct BenchOutcome {
    pub rows: Vec<BenchRow>,
    pub failures: Vec<String>,
}

fn mae(reconstructed: &[VectorRecord], original: &[VectorRecord]) -> f64 {
    let mut sum = 0.0;
    let mut count = 0u64;
    for (r, o) in reconstructed.iter().zip(original) {
        for (&a, &b) in r.values.iter().zip(&o.values) {
            sum += (a - b).abs();
            count += 1;
        }
    }
    sum / count as f64
}

fn original_bytes(spec: &DatasetSpec, rows: usize, dim: usize) -> u64 {
    match &spec.source {
        // Dense accounting: 8 bytes per stored entry.
        DatasetSource::SyntheticUniform { .. } | DatasetSource::DenseCsv(_) => {
            8 * rows as u64 * dim as u64
        }
        // Sparse accounting: the serialized size actually on disk.
        DatasetSource::SparseFile(path) => std::fs::metadata(path)
            .map(|m| m.len())
            .unwrap_or(8 * rows as u64 * dim as u64),
    }
}

struct CellMeasurement {
    compress_ms: f64,
    decompress_ms: f64,
    total_compressed_bytes: u64,
    payload_bytes: u64,
    mae: f64,
}

fn run_cell(
    algorithm: Algorithm,
    data: &[VectorRecord],
    config: &BenchConfig,
    pool: &rayon::ThreadPool,
) -> Result<CellMeasurement, String> {
    let rows = data.len();
    let m = config.target_dim;
    let payload_bytes = 8 * rows as u64 * m as u64;

    match algorithm {
        Algorithm::Ares => {
            let start = Instant::now();
            let records = pool
                .install(|| compress_batch(data, m, config.scaling, config.solver))
                .map_err(|e| e.to_string())?;
            let compress_ms = start.elapsed().as_secs_f64() * 1e3;

            let start = Instant::now();
            let reconstructed = pool.install(|| reconstruct_batch(&records));
            let decompress_ms = start.elapsed().as_secs_f64() * 1e3;

            // Archive accounting without per-record deltas: header + ids +
            // coefficients. There is no model state to amortize.
            let total = HEADER_BYTES + rows as u64 * (8 + 8 * m as u64);
            Ok(CellMeasurement {
                compress_ms,
                decompress_ms,
                total_compressed_bytes: total,
                payload_bytes,
                mae: mae(&reconstructed, data),
            })
        }
        Algorithm::Pca => {
            let start = Instant::now();
            let (model, scores) = pca_fit_transform(data, m).map_err(|e| e.to_string())?;
            let compress_ms = start.elapsed().as_secs_f64() * 1e3;

            let ids: Vec<u64> = data.iter().map(|v| v.id).collect();
            let start = Instant::now();
            let reconstructed = pca_inverse(&model, &scores, &ids).map_err(|e| e.to_string())?;
            let decompress_ms = start.elapsed().as_secs_f64() * 1e3;

            let total = payload_bytes + model.model_bytes();
            Ok(CellMeasurement {
                compress_ms,
                decompress_ms,
                total_compressed_bytes: total,
                payload_bytes,
                mae: mae(&reconstructed, data),
            })
        }
        Algorithm::Nmf => {
            let start = Instant::now();
            let model =
                nmf_fit(data, m, config.nmf_iters, config.nmf_seed).map_err(|e| e.to_string())?;
            let compress_ms = start.elapsed().as_secs_f64() * 1e3;

            let start = Instant::now();
            let reconstructed = model.reconstruct();
            let decompress_ms = start.elapsed().as_secs_f64() * 1e3;

            let total = payload_bytes + model.model_bytes();
            Ok(CellMeasurement {
                compress_ms,
                decompress_ms,
                total_compressed_bytes: total,
                payload_bytes,
                mae: mae(&reconstructed, data),
            })
        }
    }
}

/// Run the full benchmark matrix. One row per (algorithm, dataset,
/// repetition), followed by a mean summary row per (algorithm, dataset).
pub fn run_bench(config: &BenchConfig) -> BenchOutcome {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.threads)
        .build()
        .expect("worker pool");
    let effective_threads = pool.current_num_threads();

    let mut rows = Vec::new();
    let mut failures = Vec::new();

    for spec in &config.datasets {
        let data = match load_dataset(spec, config.max_count, config.normalization) {
            Ok(d) => d,
            Err(e) => {
                failures.push(format!("dataset {}: {e}", spec.name));
                continue;
            }
        };
        let dim = data[0].values.len();
        let original = original_bytes(spec, data.len(), dim);

        for &algorithm in &config.algorithms {
            let mut reps = Vec::new();
            for repetition in 1..=config.repeats.max(1) {
                match run_cell(algorithm, &data, config, &pool) {
                    Ok(cell) => {
                        let row = BenchRow {
                            algorithm,
                            dataset: spec.name.clone(),
                            repetition,
                            threads: effective_threads,
                            compress_ms: cell.compress_ms,
                            decompress_ms: cell.decompress_ms,
                            ratio_percent: 100.0 * original as f64
                                / cell.total_compressed_bytes as f64,
                            ratio_payload_percent: 100.0 * original as f64
                                / cell.payload_bytes as f64,
                            mae: cell.mae,
                        };
                        reps.push(row);
                    }
                    Err(e) => {
                        failures.push(format!(
                            "{} on {} (repetition {repetition}): {e}",
                            algorithm.name(),
                            spec.name
                        ));
                    }
                }
            }
            if !reps.is_empty() {
                let count = reps.len() as f64;
                let summary = BenchRow {
                    algorithm,
                    dataset: spec.name.clone(),
                    repetition: 0,
                    threads: effective_threads,
                    compress_ms: reps.iter().map(|r| r.compress_ms).sum::<f64>() / count,
                    decompress_ms: reps.iter().map(|r| r.decompress_ms).sum::<f64>() / count,
                    ratio_percent: reps[0].ratio_percent,
                    ratio_payload_percent: reps[0].ratio_payload_percent,
                    mae: reps[0].mae,
                };
                rows.extend(reps);
                rows.push(summary);
            }
        }
    }

    BenchOutcome { rows, failures }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny_config() -> BenchConfig {
        BenchConfig {
            datasets: vec![DatasetSpec {
                name: "tiny".to_string(),
                source: DatasetSource::SyntheticUniform {
                    seed: 3,
                    count: 40,
                    dim: 60,
                },
                target_n: 60,
                subsample_seed: 3,
            }],
            target_dim: 4,
            repeats: 2,
            threads: 1,
            nmf_iters: 20,
            max_count: 40,
            ..BenchConfig::default()
        }
    }

    #[test]
    fn bench_emits_complete_matrix() {
        let outcome = run_bench(&tiny_config());
        assert!(outcome.failures.is_empty(), "{:?}", outcome.failures);
        // 3 algorithms x (2 repetitions + 1 summary)
        assert_eq!(outcome.rows.len(), 9);
        for row in &outcome.rows {
            assert!(row.compress_ms >= 0.0);
            assert!(row.decompress_ms >= 0.0);
            assert!(row.mae >= 0.0);
            assert!(row.ratio_percent > 0.0);
            assert_eq!(row.threads, 1);
        }
        let summaries: Vec<_> = outcome.rows.iter().filter(|r| r.is_summary()).collect();
        assert_eq!(summaries.len(), 3);
    }

    #[test]
    fn non_timing_fields_are_thread_invariant() {
        let mut config = tiny_config();
        let a = run_bench(&config);
        config.threads = 4;
        let b = run_bench(&config);
        for (ra, rb) in a.rows.iter().zip(&b.rows) {
            assert_eq!(ra.mae.to_bits(), rb.mae.to_bits());
            assert_eq!(ra.ratio_percent.to_bits(), rb.ratio_percent.to_bits());
            assert_eq!(ra.repetition, rb.repetition);
        }
    }

    #[test]
    fn payload_ratio_matches_dimension_reduction() {
        // 60 -> 4 coefficients on dense accounting is exactly 15x = 1500%.
        let outcome = run_bench(&tiny_config());
        for row in outcome.rows {
            assert!((row.ratio_payload_percent - 1500.0).abs() < 1e-9);
        }
    }
}
