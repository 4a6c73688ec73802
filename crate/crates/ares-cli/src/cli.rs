//! Argument parsing and dispatch.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use ares_core::ingest::{DatasetSource, DatasetSpec, NormalizationScope};
use ares_core::{DomainScaling, SolverKind};

use crate::bench::{run_bench, BenchConfig};
use crate::commands::{
    cmd_combine, cmd_compress, cmd_decompress, cmd_distance, BoundChoice, CliError, CombineArgs,
    CompressArgs, DecompressArgs, DistanceArgs, InputFormat, MetricDomainChoice, MetricKind,
};
use crate::report::{to_csv, to_gnuplot, to_json, Algorithm};
use crate::scaling::{run_scaling, ScalingConfig};

#[derive(Debug, Parser)]
#[command(
    name = "ares",
    about = "Stateless polynomial vector compression: compress, operate, and benchmark",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ScalingArg {
    Raw,
    Unit,
}

impl From<ScalingArg> for DomainScaling {
    fn from(s: ScalingArg) -> Self {
        match s {
            ScalingArg::Raw => DomainScaling::Raw,
            ScalingArg::Unit => DomainScaling::Unit,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum SolverArg {
    Qr,
    Normal,
}

impl From<SolverArg> for SolverKind {
    fn from(s: SolverArg) -> Self {
        match s {
            SolverArg::Qr => SolverKind::Qr,
            SolverArg::Normal => SolverKind::NormalEq,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum FormatArg {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum NormalizeArg {
    Feature,
    Global,
}

impl From<NormalizeArg> for NormalizationScope {
    fn from(s: NormalizeArg) -> Self {
        match s {
            NormalizeArg::Feature => NormalizationScope::PerFeature,
            NormalizeArg::Global => NormalizationScope::Global,
        }
    }
}

#[derive(Debug, Args)]
struct SharedFitArgs {
    /// Number of stored coefficients per vector.
    #[arg(long, default_value_t = 10)]
    target_dim: usize,
    /// Abscissa placement for the polynomial basis.
    #[arg(long, value_enum, default_value_t = ScalingArg::Unit)]
    scaling: ScalingArg,
    /// Least-squares route.
    #[arg(long, value_enum, default_value_t = SolverArg::Qr)]
    solver: SolverArg,
    /// Worker threads (0 = all available).
    #[arg(long, default_value_t = 0)]
    threads: usize,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Compress vectors from CSV or sparse text into an .ares archive.
    Compress {
        /// Input file (dense CSV by default).
        #[arg(long)]
        input: PathBuf,
        /// Output archive path.
        #[arg(long)]
        output: PathBuf,
        /// Treat the input as sparse index:value lines.
        #[arg(long)]
        sparse: bool,
        /// Dense dimension for sparse input.
        #[arg(long)]
        sparse_dim: Option<usize>,
        /// Skip storing per-record residual bounds.
        #[arg(long)]
        no_deltas: bool,
        #[command(flatten)]
        fit: SharedFitArgs,
    },
    /// Reconstruct an archive back into a dense CSV.
    Decompress {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        output: PathBuf,
        /// Worker threads (0 = all available).
        #[arg(long, default_value_t = 0)]
        threads: usize,
    },
    /// Distance between two records of an archive.
    Distance {
        #[arg(long)]
        archive: PathBuf,
        #[arg(long)]
        id1: u64,
        #[arg(long)]
        id2: u64,
        /// Which metric to evaluate.
        #[arg(long, default_value = "l2")]
        metric: String,
        /// Integration interval: the fitted domain, or the literal reduced
        /// [1, m] interval.
        #[arg(long, default_value = "fit")]
        metric_domain: String,
    },
    /// Linear combination of records with an error-bound ledger.
    Combine {
        #[arg(long)]
        archive: PathBuf,
        /// Text file of `coefficient record-id` lines.
        #[arg(long)]
        manifest: PathBuf,
        /// Bound aggregation mode.
        #[arg(long, default_value = "worst")]
        bound: String,
        /// k x k covariance CSV for the correlated bound.
        #[arg(long)]
        cov: Option<PathBuf>,
        /// Optional archive to write the combined record to.
        #[arg(long)]
        output: Option<PathBuf>,
        /// Id for the combined record (defaults to the first term's id).
        #[arg(long)]
        out_id: Option<u64>,
    },
    /// Run the benchmark matrix and emit a report.
    Bench {
        /// Comma-separated subset of ares,pca,nmf.
        #[arg(long, default_value = "ares,pca,nmf")]
        algorithms: String,
        /// Synthetic dataset rows.
        #[arg(long, default_value_t = 1000)]
        synthetic_count: usize,
        /// Synthetic dataset dimension.
        #[arg(long, default_value_t = 1000)]
        synthetic_dim: usize,
        /// Skip the synthetic dataset.
        #[arg(long)]
        no_synthetic: bool,
        /// Sparse index:value dataset files (repeatable).
        #[arg(long = "sparse")]
        sparse: Vec<PathBuf>,
        /// Dense CSV dataset files (repeatable).
        #[arg(long = "dense-csv")]
        dense_csv: Vec<PathBuf>,
        /// Conditioned dimension every dataset is padded/truncated to.
        #[arg(long, default_value_t = 1000)]
        target_n: usize,
        /// Row cap; larger datasets are subsampled with --seed.
        #[arg(long, default_value_t = 1000)]
        max_count: usize,
        /// Seed for synthetic data and subsampling.
        #[arg(long, default_value_t = 7)]
        seed: u64,
        /// Repetitions per (algorithm, dataset) cell.
        #[arg(long, default_value_t = 5)]
        repeats: usize,
        /// Min-max normalization granularity.
        #[arg(long, value_enum, default_value_t = NormalizeArg::Feature)]
        normalize: NormalizeArg,
        /// Multiplicative-update iterations for NMF.
        #[arg(long, default_value_t = 200)]
        nmf_iters: usize,
        /// Report format on stdout or --out.
        #[arg(long, value_enum, default_value_t = FormatArg::Csv)]
        format: FormatArg,
        /// Write the report here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Also write a gnuplot-compatible data file.
        #[arg(long)]
        gnuplot: Option<PathBuf>,
        #[command(flatten)]
        fit: SharedFitArgs,
    },
    /// Measure compression-time scaling in dataset size and dimension.
    Scaling {
        /// Comma-separated dataset sizes (vary N at fixed dimension).
        #[arg(long, default_value = "500,1000,2000,4000")]
        count_grid: String,
        /// Comma-separated dimensions (vary n at fixed size).
        #[arg(long, default_value = "500,1000,2000,4000")]
        dim_grid: String,
        #[arg(long, default_value_t = 1000)]
        fixed_count: usize,
        #[arg(long, default_value_t = 1000)]
        fixed_dim: usize,
        #[arg(long, default_value_t = 7)]
        seed: u64,
        /// Repetitions per grid point (medians are reported).
        #[arg(long, default_value_t = 3)]
        repeats: usize,
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        fit: SharedFitArgs,
    },
}

fn parse_grid(s: &str) -> Result<Vec<usize>, CliError> {
    let grid: Result<Vec<usize>, _> = s.split(',').map(|t| t.trim().parse::<usize>()).collect();
    let grid = grid.map_err(|_| CliError::usage(format!("bad grid {s:?}")))?;
    if grid.is_empty() {
        return Err(CliError::usage("grid must not be empty"));
    }
    Ok(grid)
}

fn dispatch(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Compress {
            input,
            output,
            sparse,
            sparse_dim,
            no_deltas,
            fit,
        } => cmd_compress(&CompressArgs {
            input,
            output,
            input_format: if sparse {
                InputFormat::Sparse
            } else {
                InputFormat::Csv
            },
            sparse_dim,
            target_dim: fit.target_dim,
            scaling: fit.scaling.into(),
            solver: fit.solver.into(),
            threads: fit.threads,
            store_deltas: !no_deltas,
        }),
        Command::Decompress {
            input,
            output,
            threads,
        } => cmd_decompress(&DecompressArgs {
            input,
            output,
            threads,
        }),
        Command::Distance {
            archive,
            id1,
            id2,
            metric,
            metric_domain,
        } => {
            let metric = match metric.as_str() {
                "l2" => MetricKind::L2,
                "l1" => MetricKind::L1,
                "linf" => MetricKind::Linf,
                other => return Err(CliError::usage(format!("unknown metric {other:?}"))),
            };
            let domain = match metric_domain.as_str() {
                "fit" => MetricDomainChoice::Fit,
                "paper" => MetricDomainChoice::Paper,
                other => {
                    return Err(CliError::usage(format!("unknown metric domain {other:?}")))
                }
            };
            cmd_distance(&DistanceArgs {
                archive,
                id1,
                id2,
                metric,
                domain,
            })
        }
        Command::Combine {
            archive,
            manifest,
            bound,
            cov,
            output,
            out_id,
        } => {
            let bound = match bound.as_str() {
                "worst" => BoundChoice::Worst,
                "rms" => BoundChoice::Rms,
                "correlated" => BoundChoice::Correlated,
                other => return Err(CliError::usage(format!("unknown bound mode {other:?}"))),
            };
            cmd_combine(&CombineArgs {
                archive,
                manifest,
                bound,
                cov,
                output,
                out_id,
            })
        }
        Command::Bench {
            algorithms,
            synthetic_count,
            synthetic_dim,
            no_synthetic,
            sparse,
            dense_csv,
            target_n,
            max_count,
            seed,
            repeats,
            normalize,
            nmf_iters,
            format,
            out,
            gnuplot,
            fit,
        } => {
            let algorithms: Result<Vec<Algorithm>, CliError> = algorithms
                .split(',')
                .map(|t| {
                    Algorithm::parse(t.trim())
                        .ok_or_else(|| CliError::usage(format!("unknown algorithm {t:?}")))
                })
                .collect();
            let algorithms = algorithms?;

            let mut datasets = Vec::new();
            if !no_synthetic {
                datasets.push(DatasetSpec {
                    name: "synthetic".to_string(),
                    source: DatasetSource::SyntheticUniform {
                        seed,
                        count: synthetic_count,
                        dim: synthetic_dim,
                    },
                    target_n,
                    subsample_seed: seed,
                });
            }
            for path in sparse {
                datasets.push(DatasetSpec {
                    name: dataset_name(&path),
                    source: DatasetSource::SparseFile(path),
                    target_n,
                    subsample_seed: seed,
                });
            }
            for path in dense_csv {
                datasets.push(DatasetSpec {
                    name: dataset_name(&path),
                    source: DatasetSource::DenseCsv(path),
                    target_n,
                    subsample_seed: seed,
                });
            }
            if datasets.is_empty() {
                return Err(CliError::usage("no datasets selected"));
            }

            let config = BenchConfig {
                algorithms,
                datasets,
                target_dim: fit.target_dim,
                repeats,
                threads: fit.threads,
                scaling: fit.scaling.into(),
                solver: fit.solver.into(),
                normalization: normalize.into(),
                max_count,
                nmf_iters,
                nmf_seed: seed,
            };
            let outcome = run_bench(&config);
            for failure in &outcome.failures {
                eprintln!("warning: {failure}");
            }
            if outcome.rows.is_empty() {
                return Err(CliError::data("every benchmark cell failed"));
            }
            let rendered = match format {
                FormatArg::Csv => to_csv(&outcome.rows),
                FormatArg::Json => to_json(&outcome.rows),
            };
            emit(out.as_deref(), &rendered)?;
            if let Some(path) = gnuplot {
                std::fs::write(&path, to_gnuplot(&outcome.rows))
                    .map_err(|e| CliError::data(e.to_string()))?;
            }
            Ok(())
        }
        Command::Scaling {
            count_grid,
            dim_grid,
            fixed_count,
            fixed_dim,
            seed,
            repeats,
            out,
            fit,
        } => {
            let config = ScalingConfig {
                count_grid: parse_grid(&count_grid)?,
                dim_grid: parse_grid(&dim_grid)?,
                fixed_count,
                fixed_dim,
                target_dim: fit.target_dim,
                repeats,
                threads: fit.threads,
                seed,
                scaling: fit.scaling.into(),
                solver: fit.solver.into(),
            };
            let summary = run_scaling(&config);
            emit(out.as_deref(), &crate::scaling::to_csv(&summary))?;
            eprintln!(
                "slope vs count: {:.4}, slope vs dim: {:.4}",
                summary.slope_vs_count, summary.slope_vs_dim
            );
            Ok(())
        }
    }
}

fn dataset_name(path: &std::path::Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| path.display().to_string())
}

fn emit(out: Option<&std::path::Path>, text: &str) -> Result<(), CliError> {
    match out {
        Some(path) => {
            std::fs::write(path, text).map_err(|e| CliError::data(e.to_string()))
        }
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

/// Parse arguments, run, and return the process exit code.
pub fn run() -> i32 {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // Help and version requests are successes, not usage errors.
            let success = matches!(
                e.kind(),
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion
            );
            let _ = e.print();
            return if success { 0 } else { 1 };
        }
    };
    match dispatch(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {}", e.message);
            e.code
        }
    }
}
