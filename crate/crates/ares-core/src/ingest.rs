//! Dataset acquisition and conditioning: synthetic generation, dense CSV and
//! sparse `index:value` loading, and the fixed-dimension / [0,1]
//! normalization pass that every benchmark input goes through.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::fit::VectorRecord;

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("parse error at line {line}: {message}")]
    ParseError { line: usize, message: String },
    #[error("dataset is empty")]
    EmptyDataset,
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Where a dataset comes from.
#[derive(Debug, Clone)]
pub enum DatasetSource {
    /// Seeded i.i.d. uniform entries on `[0, 1)`.
    SyntheticUniform { seed: u64, count: usize, dim: usize },
    /// Sparse `index:value` text lines (1-based indices).
    SparseFile(PathBuf),
    /// Dense CSV, one vector per line.
    DenseCsv(PathBuf),
}

/// A named dataset plus its conditioning parameters.
#[derive(Debug, Clone)]
pub struct DatasetSpec {
    pub name: String,
    pub source: DatasetSource,
    pub target_n: usize,
    pub subsample_seed: u64,
}

/// Which statistics the min-max normalization uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NormalizationScope {
    /// Per-feature min/max (default). Constant features map to 0.
    PerFeature,
    /// One global min/max across all entries.
    Global,
}

/// Seeded uniform dataset: entries are i.i.d. on `[0, 1)` from one ChaCha8
/// stream, so a given `(seed, count, dim)` always reproduces bit-identically.
pub fn generate_uniform(seed: u64, count: usize, dim: usize) -> Vec<VectorRecord> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|i| {
            let values = (0..dim).map(|_| rng.random::<f64>()).collect();
            VectorRecord::new(i as u64, values)
        })
        .collect()
}

/// Result of a sparse load: the densified vectors plus how many entries were
/// dropped for having indices beyond `target_n`.
#[derive(Debug)]
pub struct SparseLoad {
    pub records: Vec<VectorRecord>,
    pub dropped_entries: usize,
}

/// Load sparse `index:value` lines into dense vectors of length `target_n`.
///
/// Each line may start with a label token (anything without a colon), which
/// is ignored. Indices are 1-based; entries beyond `target_n` are dropped
/// and counted; missing entries are zero. Empty lines become zero vectors.
pub fn load_sparse(path: &Path, target_n: usize) -> Result<SparseLoad, IngestError> {
    let reader = BufReader::new(File::open(path)?);
    let mut records = Vec::new();
    let mut dropped = 0usize;

    for (line_no, line) in reader.lines().enumerate() {
        let line = line?;
        let mut values = vec![0.0; target_n];
        for (tok_no, tok) in line.split_whitespace().enumerate() {
            let Some((idx, val)) = tok.split_once(':') else {
                if tok_no == 0 {
                    continue; // leading label
                }
                return Err(IngestError::ParseError {
                    line: line_no + 1,
                    message: format!("expected index:value, got {tok:?}"),
                });
            };
            let idx: usize = idx.parse().map_err(|_| IngestError::ParseError {
                line: line_no + 1,
                message: format!("bad index in {tok:?}"),
            })?;
            let val: f64 = val.parse().map_err(|_| IngestError::ParseError {
                line: line_no + 1,
                message: format!("bad value in {tok:?}"),
            })?;
            if idx == 0 {
                return Err(IngestError::ParseError {
                    line: line_no + 1,
                    message: "indices are 1-based".to_string(),
                });
            }
            if idx > target_n {
                dropped += 1;
            } else {
                values[idx - 1] = val;
            }
        }
        records.push(VectorRecord::new(records.len() as u64, values));
    }
    Ok(SparseLoad {
        records,
        dropped_entries: dropped,
    })
}

/// Load a dense CSV, one comma-separated vector per line.
pub fn load_dense_csv(path: &Path) -> Result<Vec<VectorRecord>, IngestError> {
    let reader = BufReader::new(File::open(path)?);
    let mut records = Vec::new();
    for (line_no, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let values: Result<Vec<f64>, _> = line
            .split(',')
            .map(|tok| tok.trim().parse::<f64>())
            .collect();
        let values = values.map_err(|e| IngestError::ParseError {
            line: line_no + 1,
            message: e.to_string(),
        })?;
        records.push(VectorRecord::new(records.len() as u64, values));
    }
    Ok(records)
}

/// Write vectors as dense CSV. Values use the shortest representation that
/// parses back to the same f64, so a write/read cycle is lossless.
pub fn write_dense_csv(path: &Path, records: &[VectorRecord]) -> Result<(), IngestError> {
    let mut w = BufWriter::new(File::create(path)?);
    for r in records {
        let mut first = true;
        for v in &r.values {
            if !first {
                write!(w, ",")?;
            }
            write!(w, "{v}")?;
            first = false;
        }
        writeln!(w)?;
    }
    w.flush()?;
    Ok(())
}

/// Conditioning pass: pad or truncate every vector to `target_n`, subsample
/// to at most `max_count` rows (seeded, without replacement, indices drawn
/// against the input order), then min-max normalize into `[0, 1]`.
pub fn condition(
    records: &[VectorRecord],
    target_n: usize,
    subsample_seed: u64,
    max_count: usize,
    scope: NormalizationScope,
) -> Result<Vec<VectorRecord>, IngestError> {
    if records.is_empty() {
        return Err(IngestError::EmptyDataset);
    }

    let mut rows: Vec<VectorRecord> = records
        .iter()
        .map(|r| {
            let mut values = r.values.clone();
            values.resize(target_n, 0.0);
            VectorRecord::new(r.id, values)
        })
        .collect();

    if rows.len() > max_count {
        // Partial Fisher-Yates over input positions.
        let mut rng = ChaCha8Rng::seed_from_u64(subsample_seed);
        let mut indices: Vec<usize> = (0..rows.len()).collect();
        for i in 0..max_count {
            let j = i + rng.random_range(0..indices.len() - i);
            indices.swap(i, j);
        }
        let mut chosen = indices[..max_count].to_vec();
        chosen.sort_unstable();
        rows = chosen.into_iter().map(|i| rows[i].clone()).collect();
    }

    match scope {
        NormalizationScope::PerFeature => {
            let mut mins = vec![f64::INFINITY; target_n];
            let mut maxs = vec![f64::NEG_INFINITY; target_n];
            for r in &rows {
                for ((&x, lo), hi) in r.values.iter().zip(&mut mins).zip(&mut maxs) {
                    if x < *lo {
                        *lo = x;
                    }
                    if x > *hi {
                        *hi = x;
                    }
                }
            }
            for r in rows.iter_mut() {
                for ((x, &lo), &hi) in r.values.iter_mut().zip(&mins).zip(&maxs) {
                    let range = hi - lo;
                    *x = if range > 0.0 { (*x - lo) / range } else { 0.0 };
                }
            }
        }
        NormalizationScope::Global => {
            let mut lo = f64::INFINITY;
            let mut hi = f64::NEG_INFINITY;
            for r in &rows {
                for &x in &r.values {
                    lo = lo.min(x);
                    hi = hi.max(x);
                }
            }
            let range = hi - lo;
            for r in rows.iter_mut() {
                for x in r.values.iter_mut() {
                    *x = if range > 0.0 { (*x - lo) / range } else { 0.0 };
                }
            }
        }
    }

    Ok(rows)
}

/// Load and condition a dataset in one step, per its spec.
pub fn load_dataset(
    spec: &DatasetSpec,
    max_count: usize,
    scope: NormalizationScope,
) -> Result<Vec<VectorRecord>, IngestError> {
    let raw = match &spec.source {
        DatasetSource::SyntheticUniform { seed, count, dim } => {
            generate_uniform(*seed, *count, *dim)
        }
        DatasetSource::SparseFile(path) => load_sparse(path, spec.target_n)?.records,
        DatasetSource::DenseCsv(path) => load_dense_csv(path)?,
    };
    condition(&raw, spec.target_n, spec.subsample_seed, max_count, scope)
}
