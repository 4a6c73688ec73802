//! Implementations of the file-level subcommands: compress, decompress,
//! distance, combine.

use std::path::{Path, PathBuf};
use std::time::Instant;

use ares_core::codec::{compression_ratio, read_archive, write_archive, AresHeader, CodecError};
use ares_core::homomorphic::{
    linear_combination, BoundMode, CovarianceMatrix, HomomorphicError,
};
use ares_core::ingest::{load_dense_csv, load_sparse, write_dense_csv, IngestError};
use ares_core::metric::{l1_distance, l2_distance, linf_distance, IntegrationDomain, MetricError};
use ares_core::{
    compress_batch, reconstruct_batch, DomainScaling, FitError, PolyRecord, SolverKind,
};

/// Process exit codes: 1 usage, 2 data error, 3 numerical failure.
#[derive(Debug)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl CliError {
    pub fn usage(message: impl Into<String>) -> Self {
        CliError {
            code: 1,
            message: message.into(),
        }
    }

    pub fn data(message: impl Into<String>) -> Self {
        CliError {
            code: 2,
            message: message.into(),
        }
    }

    pub fn numerical(message: impl Into<String>) -> Self {
        CliError {
            code: 3,
            message: message.into(),
        }
    }
}

impl From<FitError> for CliError {
    fn from(e: FitError) -> Self {
        match &e {
            FitError::SingularSystem { .. } => CliError::numerical(e.to_string()),
            FitError::InvalidTargetDim { .. } | FitError::EmptyDomain => {
                CliError::usage(e.to_string())
            }
            _ => CliError::data(e.to_string()),
        }
    }
}

impl From<CodecError> for CliError {
    fn from(e: CodecError) -> Self {
        CliError::data(e.to_string())
    }
}

impl From<IngestError> for CliError {
    fn from(e: IngestError) -> Self {
        CliError::data(e.to_string())
    }
}

impl From<MetricError> for CliError {
    fn from(e: MetricError) -> Self {
        CliError::data(e.to_string())
    }
}

impl From<HomomorphicError> for CliError {
    fn from(e: HomomorphicError) -> Self {
        match &e {
            HomomorphicError::InvalidCovariance => CliError::numerical(e.to_string()),
            HomomorphicError::NonFiniteScalar { .. } => CliError::numerical(e.to_string()),
            _ => CliError::data(e.to_string()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InputFormat {
    Csv,
    Sparse,
}

pub struct CompressArgs {
    pub input: PathBuf,
    pub output: PathBuf,
    pub input_format: InputFormat,
    /// Dense dimension for sparse inputs.
    pub sparse_dim: Option<usize>,
    pub target_dim: usize,
    pub scaling: DomainScaling,
    pub solver: SolverKind,
    pub threads: usize,
    pub store_deltas: bool,
}

pub fn cmd_compress(args: &CompressArgs) -> Result<(), CliError> {
    let vectors = match args.input_format {
        InputFormat::Csv => load_dense_csv(&args.input)?,
        InputFormat::Sparse => {
            let dim = args.sparse_dim.ok_or_else(|| {
                CliError::usage("--sparse-dim is required for sparse input")
            })?;
            let load = load_sparse(&args.input, dim)?;
            if load.dropped_entries > 0 {
                eprintln!(
                    "warning: dropped {} sparse entries with index > {dim}",
                    load.dropped_entries
                );
            }
            load.records
        }
    };
    if vectors.is_empty() {
        return Err(CliError::data("input contains no vectors"));
    }
    let n = vectors[0].values.len();

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(args.threads)
        .build()
        .map_err(|e| CliError::data(e.to_string()))?;

    let start = Instant::now();
    let records = pool.install(|| {
        compress_batch(&vectors, args.target_dim, args.scaling, args.solver)
    })?;
    let elapsed_ms = start.elapsed().as_secs_f64() * 1e3;

    let header = AresHeader::for_records(&records, args.store_deltas)
        .ok_or_else(|| CliError::data("no records to write"))?;
    let archive_bytes = write_archive(&args.output, &records, header)?;

    let original_bytes = 8 * vectors.len() as u64 * n as u64;
    let payload_bytes = 8 * records.len() as u64 * args.target_dim as u64;
    println!("n: {n}");
    println!("m: {}", args.target_dim);
    println!("vectors: {}", vectors.len());
    println!("original_bytes: {original_bytes}");
    println!("archive_bytes: {archive_bytes}");
    println!(
        "archive_ratio_percent: {:.2}",
        compression_ratio(original_bytes, archive_bytes)?
    );
    println!(
        "payload_ratio_percent: {:.2}",
        compression_ratio(original_bytes, payload_bytes)?
    );
    println!("compress_ms: {elapsed_ms:.3}");
    Ok(())
}

pub struct DecompressArgs {
    pub input: PathBuf,
    pub output: PathBuf,
    pub threads: usize,
}

pub fn cmd_decompress(args: &DecompressArgs) -> Result<(), CliError> {
    let (header, records) = read_archive(&args.input)?;

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(args.threads)
        .build()
        .map_err(|e| CliError::data(e.to_string()))?;

    let start = Instant::now();
    let vectors = pool.install(|| reconstruct_batch(&records));
    let elapsed_ms = start.elapsed().as_secs_f64() * 1e3;

    write_dense_csv(&args.output, &vectors)?;
    println!("n: {}", header.n);
    println!("m: {}", header.m);
    println!("vectors: {}", vectors.len());
    println!("decompress_ms: {elapsed_ms:.3}");
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MetricKind {
    L2,
    L1,
    Linf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MetricDomainChoice {
    /// The interval the records were fit on.
    Fit,
    /// The literal [1, m] interval over the reduced dimension.
    Paper,
}

pub struct DistanceArgs {
    pub archive: PathBuf,
    pub id1: u64,
    pub id2: u64,
    pub metric: MetricKind,
    pub domain: MetricDomainChoice,
}

fn find_record(records: &[PolyRecord], id: u64) -> Result<&PolyRecord, CliError> {
    records
        .iter()
        .find(|r| r.id == id)
        .ok_or_else(|| CliError::data(format!("no record with id {id} in archive")))
}

pub fn cmd_distance(args: &DistanceArgs) -> Result<(), CliError> {
    let (_, records) = read_archive(&args.archive)?;
    let p = find_record(&records, args.id1)?;
    let q = find_record(&records, args.id2)?;
    let dom = match args.domain {
        MetricDomainChoice::Fit => IntegrationDomain::fit_domain(p),
        MetricDomainChoice::Paper => IntegrationDomain::reduced_domain(p.coeffs.len())?,
    };
    let d = match args.metric {
        MetricKind::L2 => l2_distance(p, q, dom)?,
        MetricKind::L1 => l1_distance(p, q, dom)?,
        MetricKind::Linf => linf_distance(p, q, dom)?,
    };
    // 12 significant digits.
    println!("{d:.11e}");
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundChoice {
    Worst,
    Rms,
    Correlated,
}

pub struct CombineArgs {
    pub archive: PathBuf,
    pub manifest: PathBuf,
    pub bound: BoundChoice,
    pub cov: Option<PathBuf>,
    pub output: Option<PathBuf>,
    pub out_id: Option<u64>,
}

/// Manifest lines are `coefficient record-id` (whitespace or comma
/// separated); blank lines and `#` comments are skipped.
fn parse_manifest(path: &Path) -> Result<Vec<(f64, u64)>, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::data(e.to_string()))?;
    let mut terms = Vec::new();
    for (line_no, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut parts = line.split(|c: char| c == ',' || c.is_whitespace());
        let c = parts
            .next()
            .and_then(|t| t.trim().parse::<f64>().ok())
            .ok_or_else(|| {
                CliError::data(format!("manifest line {}: expected coefficient", line_no + 1))
            })?;
        let id = parts
            .find(|t| !t.is_empty())
            .and_then(|t| t.trim().parse::<u64>().ok())
            .ok_or_else(|| {
                CliError::data(format!("manifest line {}: expected record id", line_no + 1))
            })?;
        terms.push((c, id));
    }
    if terms.is_empty() {
        return Err(CliError::data("manifest contains no terms"));
    }
    Ok(terms)
}

fn parse_covariance(path: &Path, k: usize) -> Result<CovarianceMatrix, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::data(e.to_string()))?;
    let mut data = Vec::new();
    let mut rows = 0usize;
    for line in text.lines() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        rows += 1;
        for tok in line.split(',') {
            let v = tok.trim().parse::<f64>().map_err(|e| {
                CliError::data(format!("covariance parse error: {e}"))
            })?;
            data.push(v);
        }
    }
    if rows != k || data.len() != k * k {
        return Err(CliError::data(format!(
            "covariance must be {k}x{k} to match the manifest"
        )));
    }
    Ok(CovarianceMatrix::new(data, k)?)
}

pub fn cmd_combine(args: &CombineArgs) -> Result<(), CliError> {
    let (header, records) = read_archive(&args.archive)?;
    let manifest = parse_manifest(&args.manifest)?;
    let terms: Vec<(f64, PolyRecord)> = manifest
        .iter()
        .map(|&(c, id)| Ok((c, find_record(&records, id)?.clone())))
        .collect::<Result<_, CliError>>()?;

    let mode = match args.bound {
        BoundChoice::Worst => BoundMode::WorstCase,
        BoundChoice::Rms => BoundMode::IndependentRms,
        BoundChoice::Correlated => {
            let path = args.cov.as_ref().ok_or_else(|| {
                CliError::usage("--cov FILE is required for the correlated bound")
            })?;
            BoundMode::Correlated(parse_covariance(path, terms.len())?)
        }
    };

    let (mut record, ledger) = linear_combination(&terms, mode)?;
    if let Some(id) = args.out_id {
        record.id = id;
    }

    println!("terms: {}", ledger.terms);
    println!("delta_bound: {:.11e}", ledger.delta_bound);
    println!("worst_case_delta: {:.11e}", record.delta);

    if let Some(output) = &args.output {
        let out_header = AresHeader {
            count: 1,
            ..header
        };
        let bytes = write_archive(output, std::slice::from_ref(&record), out_header)?;
        println!("archive_bytes: {bytes}");
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write as _;

    #[test]
    fn manifest_parses_comma_and_whitespace_forms() {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        writeln!(f, "# comment").unwrap();
        writeln!(f, "1.5 0").unwrap();
        writeln!(f, "-0.25,3").unwrap();
        let terms = parse_manifest(f.path()).unwrap();
        assert_eq!(terms, vec![(1.5, 0), (-0.25, 3)]);
    }

    #[test]
    fn manifest_rejects_garbage() {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        writeln!(f, "one two").unwrap();
        assert!(parse_manifest(f.path()).is_err());
    }

    #[test]
    fn error_codes_map_as_documented() {
        assert_eq!(CliError::from(FitError::EmptyDomain).code, 1);
        assert_eq!(
            CliError::from(FitError::SingularSystem { m: 2, n: 4 }).code,
            3
        );
        assert_eq!(
            CliError::from(FitError::NonFiniteInput { id: 0, index: 1 }).code,
            2
        );
        assert_eq!(CliError::from(HomomorphicError::InvalidCovariance).code, 3);
        assert_eq!(CliError::from(HomomorphicError::DomainMismatch).code, 2);
    }
}
