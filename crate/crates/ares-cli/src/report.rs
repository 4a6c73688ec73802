//! Benchmark report rows and the CSV / JSON / gnuplot writers.

use serde::Serialize;

/// Algorithms the bench harness can run. The report is row-oriented, so
/// externally measured algorithms (e.g. an autoencoder) can be merged by
/// appending rows with their own name.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Algorithm {
    Ares,
    Pca,
    Nmf,
}

impl Algorithm {
    pub fn name(&self) -> &'static str {
        match self {
            Algorithm::Ares => "ares",
            Algorithm::Pca => "pca",
            Algorithm::Nmf => "nmf",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s.to_ascii_lowercase().as_str() {
            "ares" => Some(Algorithm::Ares),
            "pca" => Some(Algorithm::Pca),
            "nmf" => Some(Algorithm::Nmf),
            _ => None,
        }
    }
}

/// One complete measurement. `repetition` is 1-based; the averaged summary
/// row uses `repetition = 0` and the label "mean".
#[derive(Debug, Clone, Serialize)]
pub struct BenchRow {
    pub algorithm: Algorithm,
    pub dataset: String,
    /// 1-based repetition index, or 0 for the mean-of-repetitions summary.
    pub repetition: usize,
    pub threads: usize,
    pub compress_ms: f64,
    pub decompress_ms: f64,
    /// 100 * original / compressed, with model state (PCA components, NMF H,
    /// archive ids/header) amortized into the compressed size.
    pub ratio_percent: f64,
    /// Same ratio over the per-vector coefficient/score payload alone.
    pub ratio_payload_percent: f64,
    pub mae: f64,
}

impl BenchRow {
    pub fn is_summary(&self) -> bool {
        self.repetition == 0
    }

    fn repetition_label(&self) -> String {
        if self.is_summary() {
            "mean".to_string()
        } else {
            self.repetition.to_string()
        }
    }
}

pub const CSV_HEADER: &str =
    "algorithm,dataset,repetition,threads,compress_ms,decompress_ms,ratio_percent,ratio_payload_percent,mae";

/// Render rows as CSV. The leading comment lines pin down the conventions
/// the numbers depend on.
pub fn to_csv(rows: &[BenchRow]) -> String {
    let mut out = String::new();
    out.push_str("# mae is computed against the normalized ([0,1]) inputs\n");
    out.push_str(
        "# ratio_percent amortizes required model state; ratio_payload_percent is coefficients/scores only\n",
    );
    out.push_str(CSV_HEADER);
    out.push('\n');
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{},{:.3},{:.3},{},{},{}\n",
            r.algorithm.name(),
            r.dataset,
            r.repetition_label(),
            r.threads,
            r.compress_ms,
            r.decompress_ms,
            r.ratio_percent,
            r.ratio_payload_percent,
            r.mae
        ));
    }
    out
}

/// Render rows as JSON (an array of objects).
pub fn to_json(rows: &[BenchRow]) -> String {
    serde_json::to_string_pretty(rows).expect("bench rows serialize")
}

/// Render rows as a gnuplot-friendly whitespace-separated data file.
pub fn to_gnuplot(rows: &[BenchRow]) -> String {
    let mut out = String::from(
        "# algorithm dataset repetition threads compress_ms decompress_ms ratio_percent ratio_payload_percent mae\n",
    );
    for r in rows {
        out.push_str(&format!(
            "{} {} {} {} {:.3} {:.3} {} {} {}\n",
            r.algorithm.name(),
            r.dataset,
            r.repetition_label(),
            r.threads,
            r.compress_ms,
            r.decompress_ms,
            r.ratio_percent,
            r.ratio_payload_percent,
            r.mae
        ));
    }
    out
}

/// The same CSV with timing fields zeroed, for comparing reports across
/// thread counts where only wall-clock fields may differ.
pub fn to_csv_masked_timings(rows: &[BenchRow]) -> String {
    let mut masked = rows.to_vec();
    for r in masked.iter_mut() {
        r.compress_ms = 0.0;
        r.decompress_ms = 0.0;
    }
    to_csv(&masked)
}

pub fn median(values: &mut [f64]) -> f64 {
    values.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = values.len();
    if n == 0 {
        f64::NAN
    } else if n % 2 == 1 {
        values[n / 2]
    } else {
        0.5 * (values[n / 2 - 1] + values[n / 2])
    }
}
