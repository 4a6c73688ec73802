//! PCA and NMF baselines for the benchmark matrix, implemented from first
//! principles.
//!
//! Both are deliberately *stateful* compressors — PCA must persist its mean
//! and component matrix, NMF its H factor — which is the foil to the
//! stateless polynomial records. The benchmark surfaces those model bytes in
//! the size accounting.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::fit::VectorRecord;
use crate::linalg::jacobi_eigen;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BaselineError {
    #[error("target dimension {m} exceeds min(samples, features) = {limit}")]
    InvalidTargetDim { m: usize, limit: usize },
    #[error("input is empty")]
    EmptyInput,
    #[error("vector {id} has dimension {got}, expected {expected}")]
    DimensionMismatch {
        id: u64,
        expected: usize,
        got: usize,
    },
    #[error("vector {id} has a negative entry at index {index}")]
    NegativeInput { id: u64, index: usize },
    #[error("vector {id} has a non-finite entry at index {index}")]
    NonFiniteInput { id: u64, index: usize },
    #[error("scores have {got} columns, model expects {expected}")]
    ShapeMismatch { expected: usize, got: usize },
}

fn check_rows(data: &[VectorRecord], require_nonnegative: bool) -> Result<usize, BaselineError> {
    let first = data.first().ok_or(BaselineError::EmptyInput)?;
    let n = first.values.len();
    for v in data {
        if v.values.len() != n {
            return Err(BaselineError::DimensionMismatch {
                id: v.id,
                expected: n,
                got: v.values.len(),
            });
        }
        for (i, &x) in v.values.iter().enumerate() {
            if !x.is_finite() {
                return Err(BaselineError::NonFiniteInput { id: v.id, index: i });
            }
            if require_nonnegative && x < 0.0 {
                return Err(BaselineError::NegativeInput { id: v.id, index: i });
            }
        }
    }
    Ok(n)
}

// -------------------------------------------------------------------------
// PCA
// -------------------------------------------------------------------------

/// Principal components of a dataset: the feature mean plus `m` orthonormal
/// component rows. Both must be stored to decompress the scores.
#[derive(Debug, Clone)]
pub struct PcaModel {
    pub mean: Vec<f64>,
    /// Row-major `m x n`; rows are orthonormal.
    pub components: Vec<f64>,
    pub n: usize,
    pub m: usize,
}

impl PcaModel {
    /// Bytes needed to persist the model (mean plus components, f64 each).
    pub fn model_bytes(&self) -> u64 {
        8 * (self.n as u64 + self.m as u64 * self.n as u64)
    }
}

/// Fixed internal seed for the iteration's starting block; PCA has no
/// user-facing randomness.
const PCA_START_SEED: u64 = 0x4152_4553; // "ARES"

/// Fit a PCA model and project the data onto it.
///
/// Centers by the feature mean and extracts the top-`m` eigenvectors of the
/// covariance by block power (subspace) iteration with a Rayleigh–Ritz
/// finish: the covariance `X_c^T X_c` is formed once, a seeded orthonormal
/// block is iterated to convergence of the invariant subspace, and the small
/// projected eigenproblem orders the components by explained variance.
/// Deterministic for fixed input.
///
/// Returns the model plus the `N x m` score rows.
pub fn pca_fit_transform(
    data: &[VectorRecord],
    m: usize,
) -> Result<(PcaModel, Vec<Vec<f64>>), BaselineError> {
    let n = check_rows(data, false)?;
    let rows = data.len();
    if m == 0 || m > n.min(rows) {
        return Err(BaselineError::InvalidTargetDim {
            m,
            limit: n.min(rows),
        });
    }

    let mut mean = vec![0.0; n];
    for v in data {
        for (s, &x) in mean.iter_mut().zip(&v.values) {
            *s += x;
        }
    }
    for s in mean.iter_mut() {
        *s /= rows as f64;
    }

    // Covariance (unnormalized): C = X_c^T X_c, accumulated row by row so the
    // inner loops stay contiguous. Only the upper triangle is computed.
    let mut cov = vec![0.0; n * n];
    let mut centered_row = vec![0.0; n];
    for v in data {
        for (c, (&x, &mu)) in centered_row.iter_mut().zip(v.values.iter().zip(&mean)) {
            *c = x - mu;
        }
        for i in 0..n {
            let xi = centered_row[i];
            if xi == 0.0 {
                continue;
            }
            let row = &mut cov[i * n..(i + 1) * n];
            for (j, &xj) in centered_row.iter().enumerate().skip(i) {
                row[j] += xi * xj;
            }
        }
    }
    for i in 0..n {
        for j in 0..i {
            cov[i * n + j] = cov[j * n + i];
        }
    }

    // Subspace iteration: Q <- orth(C Q) until the subspace stops rotating.
    let mut rng = ChaCha8Rng::seed_from_u64(PCA_START_SEED);
    let mut q = vec![0.0; n * m];
    for col in 0..m {
        for row in 0..n {
            q[row * m + col] = rng.random::<f64>() - 0.5;
        }
    }
    orthonormalize_columns(&mut q, n, m);

    let mut z = vec![0.0; n * m];
    for _iter in 0..200 {
        // z = C q
        for i in 0..n {
            let zrow = &mut z[i * m..(i + 1) * m];
            zrow.fill(0.0);
            let crow = &cov[i * n..(i + 1) * n];
            for (k, &c) in crow.iter().enumerate() {
                if c == 0.0 {
                    continue;
                }
                let qrow = &q[k * m..(k + 1) * m];
                for (zv, &qv) in zrow.iter_mut().zip(qrow) {
                    *zv += c * qv;
                }
            }
        }
        orthonormalize_columns(&mut z, n, m);
        // Convergence: every new column should overlap its predecessor.
        let mut worst = 0.0f64;
        for col in 0..m {
            let mut dot = 0.0;
            for row in 0..n {
                dot += z[row * m + col] * q[row * m + col];
            }
            worst = worst.max((1.0 - dot.abs()).abs());
        }
        std::mem::swap(&mut q, &mut z);
        if worst < 1e-12 {
            break;
        }
    }

    // Rayleigh–Ritz: diagonalize Q^T C Q (m x m) and rotate the block so the
    // components come out eigenvalue-ordered.
    let mut cq = vec![0.0; n * m];
    for i in 0..n {
        let row = &cov[i * n..(i + 1) * n];
        let out = &mut cq[i * m..(i + 1) * m];
        for (k, &c) in row.iter().enumerate() {
            if c == 0.0 {
                continue;
            }
            let qrow = &q[k * m..(k + 1) * m];
            for (o, &qv) in out.iter_mut().zip(qrow) {
                *o += c * qv;
            }
        }
    }
    let mut small = vec![0.0; m * m];
    for a in 0..m {
        for b in 0..m {
            let mut s = 0.0;
            for row in 0..n {
                s += q[row * m + a] * cq[row * m + b];
            }
            small[a * m + b] = s;
        }
    }
    let (_eigenvalues, eigenvectors) = jacobi_eigen(&small, m);

    // components[r] = sum_a eigvec[r][a] * q_col_a
    let mut components = vec![0.0; m * n];
    for r in 0..m {
        for row in 0..n {
            let mut s = 0.0;
            for a in 0..m {
                s += eigenvectors[r * m + a] * q[row * m + a];
            }
            components[r * n + row] = s;
        }
    }

    let model = PcaModel {
        mean,
        components,
        n,
        m,
    };
    let scores = pca_transform(&model, data)?;
    Ok((model, scores))
}

/// Project rows onto an existing model: `scores = (x - mean) . components^T`.
pub fn pca_transform(
    model: &PcaModel,
    data: &[VectorRecord],
) -> Result<Vec<Vec<f64>>, BaselineError> {
    let n = check_rows(data, false)?;
    if n != model.n {
        return Err(BaselineError::ShapeMismatch {
            expected: model.n,
            got: n,
        });
    }
    Ok(data
        .iter()
        .map(|v| {
            (0..model.m)
                .map(|r| {
                    let comp = &model.components[r * model.n..(r + 1) * model.n];
                    v.values
                        .iter()
                        .zip(&model.mean)
                        .zip(comp)
                        .map(|((&x, &mu), &c)| (x - mu) * c)
                        .sum()
                })
                .collect()
        })
        .collect())
}

/// Reconstruct rows from scores: `scores . components + mean`.
pub fn pca_inverse(
    model: &PcaModel,
    scores: &[Vec<f64>],
    ids: &[u64],
) -> Result<Vec<VectorRecord>, BaselineError> {
    if scores.len() != ids.len() {
        return Err(BaselineError::ShapeMismatch {
            expected: ids.len(),
            got: scores.len(),
        });
    }
    let mut out = Vec::with_capacity(scores.len());
    for (row, &id) in scores.iter().zip(ids) {
        if row.len() != model.m {
            return Err(BaselineError::ShapeMismatch {
                expected: model.m,
                got: row.len(),
            });
        }
        let mut values = model.mean.clone();
        for (r, &s) in row.iter().enumerate() {
            let comp = &model.components[r * model.n..(r + 1) * model.n];
            for (v, &c) in values.iter_mut().zip(comp) {
                *v += s * c;
            }
        }
        out.push(VectorRecord { id, values });
    }
    Ok(out)
}

fn orthonormalize_columns(q: &mut [f64], rows: usize, cols: usize) {
    for col in 0..cols {
        for prev in 0..col {
            let mut dot = 0.0;
            for row in 0..rows {
                dot += q[row * cols + col] * q[row * cols + prev];
            }
            for row in 0..rows {
                let p = q[row * cols + prev];
                q[row * cols + col] -= dot * p;
            }
        }
        let mut norm = 0.0;
        for row in 0..rows {
            let v = q[row * cols + col];
            norm += v * v;
        }
        let norm = norm.sqrt();
        if norm > 1e-300 {
            for row in 0..rows {
                q[row * cols + col] /= norm;
            }
        } else {
            // Degenerate (e.g. zero covariance): fall back to a unit vector.
            for row in 0..rows {
                q[row * cols + col] = if row == col % rows { 1.0 } else { 0.0 };
            }
        }
    }
}

// -------------------------------------------------------------------------
// NMF
// -------------------------------------------------------------------------

/// Non-negative factors `W (N x m)` and `H (m x n)` with `V ~= W H`.
#[derive(Debug, Clone)]
pub struct NmfModel {
    pub w: Vec<f64>,
    pub h: Vec<f64>,
    pub rows: usize,
    pub n: usize,
    pub m: usize,
    pub ids: Vec<u64>,
}

impl NmfModel {
    /// Bytes needed to persist the shared H factor.
    pub fn model_bytes(&self) -> u64 {
        8 * (self.m as u64 * self.n as u64)
    }

    /// Reconstruction `W H`, one row per input vector.
    pub fn reconstruct(&self) -> Vec<VectorRecord> {
        let (rows, n, m) = (self.rows, self.n, self.m);
        let mut out = Vec::with_capacity(rows);
        for r in 0..rows {
            let mut values = vec![0.0; n];
            let wrow = &self.w[r * m..(r + 1) * m];
            for (k, &wv) in wrow.iter().enumerate() {
                if wv == 0.0 {
                    continue;
                }
                let hrow = &self.h[k * n..(k + 1) * n];
                for (v, &hv) in values.iter_mut().zip(hrow) {
                    *v += wv * hv;
                }
            }
            out.push(VectorRecord {
                id: self.ids[r],
                values,
            });
        }
        out
    }

    /// Frobenius objective `||V - W H||_F`.
    pub fn objective(&self, data: &[VectorRecord]) -> f64 {
        let rec = self.reconstruct();
        let mut sum = 0.0;
        for (v, r) in data.iter().zip(&rec) {
            for (&a, &b) in v.values.iter().zip(&r.values) {
                let d = a - b;
                sum += d * d;
            }
        }
        sum.sqrt()
    }
}

const NMF_EPS: f64 = 1e-12;

/// Multiplicative-update NMF with a fixed iteration budget.
///
/// Classic Lee–Seung updates with epsilon-guarded denominators; the
/// Frobenius objective is non-increasing across iterations and the factors
/// stay non-negative. Initialization is uniform on `[0, sqrt(mean(V)/m))`
/// from a seeded generator, so runs are reproducible.
pub fn nmf_fit(
    data: &[VectorRecord],
    m: usize,
    iters: usize,
    seed: u64,
) -> Result<NmfModel, BaselineError> {
    let (model, _) = nmf_fit_impl(data, m, iters, seed, false)?;
    Ok(model)
}

/// Like [`nmf_fit`] but records the objective after initialization and after
/// every update, for convergence inspection.
pub fn nmf_fit_traced(
    data: &[VectorRecord],
    m: usize,
    iters: usize,
    seed: u64,
) -> Result<(NmfModel, Vec<f64>), BaselineError> {
    nmf_fit_impl(data, m, iters, seed, true)
}

/// Run the multiplicative updates from caller-supplied starting factors
/// (`w0` is `N x m`, `h0` is `m x n`, both row-major and non-negative).
pub fn nmf_fit_with_init(
    data: &[VectorRecord],
    w0: Vec<f64>,
    h0: Vec<f64>,
    m: usize,
    iters: usize,
) -> Result<NmfModel, BaselineError> {
    let n = check_rows(data, true)?;
    let rows = data.len();
    if w0.len() != rows * m || h0.len() != m * n {
        return Err(BaselineError::ShapeMismatch {
            expected: rows * m + m * n,
            got: w0.len() + h0.len(),
        });
    }
    let mut model = NmfModel {
        w: w0,
        h: h0,
        rows,
        n,
        m,
        ids: data.iter().map(|v| v.id).collect(),
    };
    for _ in 0..iters.max(1) {
        nmf_update_h(data, &model.w, &mut model.h, rows, n, m);
        nmf_update_w(data, &mut model.w, &model.h, n, m);
    }
    Ok(model)
}

fn nmf_fit_impl(
    data: &[VectorRecord],
    m: usize,
    iters: usize,
    seed: u64,
    trace: bool,
) -> Result<(NmfModel, Vec<f64>), BaselineError> {
    let n = check_rows(data, true)?;
    let rows = data.len();
    if m == 0 || m > n.min(rows) {
        return Err(BaselineError::InvalidTargetDim {
            m,
            limit: n.min(rows),
        });
    }
    let iters = iters.max(1);

    let total: f64 = data.iter().map(|v| v.values.iter().sum::<f64>()).sum();
    let scale = (total / (rows * n) as f64 / m as f64).max(NMF_EPS).sqrt();

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let w: Vec<f64> = (0..rows * m).map(|_| scale * rng.random::<f64>()).collect();
    let h: Vec<f64> = (0..m * n).map(|_| scale * rng.random::<f64>()).collect();

    let mut model = NmfModel {
        w,
        h,
        rows,
        n,
        m,
        ids: data.iter().map(|v| v.id).collect(),
    };
    let mut objectives = Vec::new();
    if trace {
        objectives.push(model.objective(data));
    }

    for _ in 0..iters {
        nmf_update_h(data, &model.w, &mut model.h, rows, n, m);
        nmf_update_w(data, &mut model.w, &model.h, n, m);
        if trace {
            objectives.push(model.objective(data));
        }
    }
    Ok((model, objectives))
}

/// `H <- H .* (W^T V) ./ (W^T W H + eps)`
fn nmf_update_h(data: &[VectorRecord], w: &[f64], h: &mut [f64], rows: usize, n: usize, m: usize) {
    // numerator: W^T V (m x n)
    let mut wtv = vec![0.0; m * n];
    for (r, v) in data.iter().enumerate() {
        let wrow = &w[r * m..(r + 1) * m];
        for (k, &wv) in wrow.iter().enumerate() {
            if wv == 0.0 {
                continue;
            }
            let out = &mut wtv[k * n..(k + 1) * n];
            for (o, &x) in out.iter_mut().zip(&v.values) {
                *o += wv * x;
            }
        }
    }
    // W^T W (m x m)
    let mut wtw = vec![0.0; m * m];
    for r in 0..rows {
        let wrow = &w[r * m..(r + 1) * m];
        for a in 0..m {
            let wa = wrow[a];
            if wa == 0.0 {
                continue;
            }
            for b in 0..m {
                wtw[a * m + b] += wa * wrow[b];
            }
        }
    }
    // denominator: (W^T W) H, formed in full before H is touched — the
    // update is simultaneous, not Gauss-Seidel.
    let mut denom = vec![0.0; m * n];
    for a in 0..m {
        let out = &mut denom[a * n..(a + 1) * n];
        for b in 0..m {
            let c = wtw[a * m + b];
            if c == 0.0 {
                continue;
            }
            let hrow = &h[b * n..(b + 1) * n];
            for (d, &hv) in out.iter_mut().zip(hrow) {
                *d += c * hv;
            }
        }
    }
    for ((hv, &nu), &de) in h.iter_mut().zip(&wtv).zip(&denom) {
        *hv *= nu / (de + NMF_EPS);
    }
}

/// `W <- W .* (V H^T) ./ (W H H^T + eps)`
fn nmf_update_w(data: &[VectorRecord], w: &mut [f64], h: &[f64], n: usize, m: usize) {
    // H H^T (m x m)
    let mut hht = vec![0.0; m * m];
    for a in 0..m {
        for b in a..m {
            let mut s = 0.0;
            let ha = &h[a * n..(a + 1) * n];
            let hb = &h[b * n..(b + 1) * n];
            for (&x, &y) in ha.iter().zip(hb) {
                s += x * y;
            }
            hht[a * m + b] = s;
            hht[b * m + a] = s;
        }
    }
    for (r, v) in data.iter().enumerate() {
        // numerator row: V_r H^T (1 x m)
        let mut num = vec![0.0; m];
        for (k, slot) in num.iter_mut().enumerate() {
            let hrow = &h[k * n..(k + 1) * n];
            let mut s = 0.0;
            for (&x, &hv) in v.values.iter().zip(hrow) {
                s += x * hv;
            }
            *slot = s;
        }
        let wrow = &mut w[r * m..(r + 1) * m];
        // denominator row: W_r (H H^T)
        let mut denom = vec![0.0; m];
        for (a, slot) in denom.iter_mut().enumerate() {
            let mut s = 0.0;
            for b in 0..m {
                s += wrow[b] * hht[b * m + a];
            }
            *slot = s;
        }
        for ((wv, &nu), &de) in wrow.iter_mut().zip(&num).zip(&denom) {
            *wv *= nu / (de + NMF_EPS);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rows_from(values: Vec<Vec<f64>>) -> Vec<VectorRecord> {
        values
            .into_iter()
            .enumerate()
            .map(|(i, v)| VectorRecord::new(i as u64, v))
            .collect()
    }

    fn seeded_rows(seed: u64, rows: usize, n: usize) -> Vec<VectorRecord> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..rows)
            .map(|i| {
                VectorRecord::new(i as u64, (0..n).map(|_| rng.random::<f64>()).collect())
            })
            .collect()
    }

    fn mae(a: &[VectorRecord], b: &[VectorRecord]) -> f64 {
        let mut sum = 0.0;
        let mut count = 0usize;
        for (x, y) in a.iter().zip(b) {
            for (&u, &v) in x.values.iter().zip(&y.values) {
                sum += (u - v).abs();
                count += 1;
            }
        }
        sum / count as f64
    }

    // --- PCA ---

    #[test]
    fn pca_identical_rows_give_zero_scores() {
        let data = rows_from(vec![vec![0.3, 0.7, 0.1]; 5]);
        let (_, scores) = pca_fit_transform(&data, 2).unwrap();
        for row in scores {
            for s in row {
                assert!(s.abs() < 1e-10);
            }
        }
    }

    #[test]
    fn pca_recovers_rank_one_data() {
        // Outer product u v^T plus a constant shift.
        let u = [1.0, 2.0, 3.0, 4.0, 5.0];
        let v = [0.5, -0.25, 1.5, 0.75];
        let data = rows_from(
            u.iter()
                .map(|&ui| v.iter().map(|&vj| 1.0 + ui * vj).collect())
                .collect(),
        );
        let (model, scores) = pca_fit_transform(&data, 1).unwrap();
        let ids: Vec<u64> = data.iter().map(|d| d.id).collect();
        let rec = pca_inverse(&model, &scores, &ids).unwrap();
        assert!(mae(&data, &rec) < 1e-8);
    }

    /// Independent oracle: power iteration with deflation on the covariance.
    fn power_iteration_components(data: &[VectorRecord], m: usize) -> (Vec<f64>, Vec<f64>) {
        let n = data[0].values.len();
        let rows = data.len();
        let mut mean = vec![0.0; n];
        for v in data {
            for (s, &x) in mean.iter_mut().zip(&v.values) {
                *s += x;
            }
        }
        for s in mean.iter_mut() {
            *s /= rows as f64;
        }
        let mut cov = vec![0.0; n * n];
        for v in data {
            for i in 0..n {
                for j in 0..n {
                    cov[i * n + j] += (v.values[i] - mean[i]) * (v.values[j] - mean[j]);
                }
            }
        }
        let mut comps = vec![0.0; m * n];
        for r in 0..m {
            let mut vec_: Vec<f64> = (0..n).map(|i| ((i + r) % 2) as f64 * 2.0 - 1.0 + 0.1 * r as f64).collect();
            for _ in 0..5000 {
                let mut next = vec![0.0; n];
                for i in 0..n {
                    for j in 0..n {
                        next[i] += cov[i * n + j] * vec_[j];
                    }
                }
                let norm = next.iter().map(|x| x * x).sum::<f64>().sqrt();
                if norm < 1e-14 {
                    break;
                }
                for x in next.iter_mut() {
                    *x /= norm;
                }
                vec_ = next;
            }
            let lambda = {
                let mut cv = vec![0.0; n];
                for i in 0..n {
                    for j in 0..n {
                        cv[i] += cov[i * n + j] * vec_[j];
                    }
                }
                vec_.iter().zip(&cv).map(|(a, b)| a * b).sum::<f64>()
            };
            // deflate
            for i in 0..n {
                for j in 0..n {
                    cov[i * n + j] -= lambda * vec_[i] * vec_[j];
                }
            }
            comps[r * n..(r + 1) * n].copy_from_slice(&vec_);
        }
        (mean, comps)
    }

    #[test]
    fn pca_matches_power_iteration_oracle() {
        let data = seeded_rows(99, 5, 4);
        let m = 2;
        let (model, scores) = pca_fit_transform(&data, m).unwrap();
        let ids: Vec<u64> = data.iter().map(|d| d.id).collect();
        let rec = pca_inverse(&model, &scores, &ids).unwrap();
        let ours = mae(&data, &rec);

        let (mean, comps) = power_iteration_components(&data, m);
        // Reconstruct with the oracle components.
        let oracle_rec: Vec<VectorRecord> = data
            .iter()
            .map(|v| {
                let mut values = mean.clone();
                for r in 0..m {
                    let comp = &comps[r * 4..(r + 1) * 4];
                    let score: f64 = v
                        .values
                        .iter()
                        .zip(&mean)
                        .zip(comp)
                        .map(|((&x, &mu), &c)| (x - mu) * c)
                        .sum();
                    for (val, &c) in values.iter_mut().zip(comp) {
                        *val += score * c;
                    }
                }
                VectorRecord::new(v.id, values)
            })
            .collect();
        let oracle = mae(&data, &oracle_rec);
        assert!(
            (ours - oracle).abs() < 1e-3,
            "ours {ours} vs oracle {oracle}"
        );
    }

    #[test]
    fn pca_components_are_orthonormal() {
        let data = seeded_rows(5, 30, 8);
        let (model, _) = pca_fit_transform(&data, 4).unwrap();
        for a in 0..4 {
            for b in 0..4 {
                let dot: f64 = (0..8)
                    .map(|i| model.components[a * 8 + i] * model.components[b * 8 + i])
                    .sum();
                let expect = if a == b { 1.0 } else { 0.0 };
                assert!((dot - expect).abs() < 1e-8, "gram[{a}][{b}] = {dot}");
            }
        }
    }

    #[test]
    fn pca_error_is_non_increasing_in_m() {
        let data = seeded_rows(11, 20, 10);
        let ids: Vec<u64> = data.iter().map(|d| d.id).collect();
        let mut last = f64::INFINITY;
        for m in [1, 2, 4, 8, 10] {
            let (model, scores) = pca_fit_transform(&data, m).unwrap();
            let rec = pca_inverse(&model, &scores, &ids).unwrap();
            let err = mae(&data, &rec);
            assert!(err <= last + 1e-10, "m={m}: {err} > {last}");
            last = err;
        }
    }

    #[test]
    fn pca_zero_scores_reconstruct_the_mean() {
        let data = seeded_rows(3, 6, 4);
        let (model, _) = pca_fit_transform(&data, 2).unwrap();
        let rec = pca_inverse(&model, &[vec![0.0, 0.0]], &[0]).unwrap();
        for (a, b) in rec[0].values.iter().zip(&model.mean) {
            assert_eq!(a, b);
        }
    }

    #[test]
    fn pca_rejects_oversized_target() {
        let data = seeded_rows(3, 4, 6);
        assert!(matches!(
            pca_fit_transform(&data, 5),
            Err(BaselineError::InvalidTargetDim { .. })
        ));
    }

    // --- NMF ---

    #[test]
    fn nmf_objective_is_monotone_non_increasing() {
        let data = seeded_rows(21, 50, 100);
        let (_, trace) = nmf_fit_traced(&data, 10, 200, 42).unwrap();
        assert_eq!(trace.len(), 201);
        for pair in trace.windows(2) {
            assert!(
                pair[1] <= pair[0] + 1e-9 * (1.0 + pair[0]),
                "objective increased: {} -> {}",
                pair[0],
                pair[1]
            );
        }
    }

    #[test]
    fn nmf_single_step_matches_hand_rolled_update() {
        // One update on a seeded 3x3 with m = 2, cross-checked against the
        // formulas written out with plain index loops.
        let data = seeded_rows(33, 3, 3);
        let (model, _) = nmf_fit_traced(&data, 2, 1, 7).unwrap();

        // Recompute the initialization exactly.
        let (rows, n, m) = (3usize, 3usize, 2usize);
        let total: f64 = data.iter().map(|v| v.values.iter().sum::<f64>()).sum();
        let scale = (total / (rows * n) as f64 / m as f64).sqrt();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let mut w: Vec<f64> = (0..rows * m).map(|_| scale * rng.random::<f64>()).collect();
        let mut h: Vec<f64> = (0..m * n).map(|_| scale * rng.random::<f64>()).collect();

        // H update, by hand.
        let mut h_new = h.clone();
        for a in 0..m {
            for j in 0..n {
                let mut num = 0.0;
                for r in 0..rows {
                    num += w[r * m + a] * data[r].values[j];
                }
                let mut den = 0.0;
                for b in 0..m {
                    let mut wtw = 0.0;
                    for r in 0..rows {
                        wtw += w[r * m + a] * w[r * m + b];
                    }
                    den += wtw * h[b * n + j];
                }
                h_new[a * n + j] = h[a * n + j] * num / (den + 1e-12);
            }
        }
        h = h_new;

        // W update, by hand.
        let mut w_new = w.clone();
        for r in 0..rows {
            for a in 0..m {
                let mut num = 0.0;
                for j in 0..n {
                    num += data[r].values[j] * h[a * n + j];
                }
                let mut den = 0.0;
                for b in 0..m {
                    let mut hht = 0.0;
                    for j in 0..n {
                        hht += h[b * n + j] * h[a * n + j];
                    }
                    den += w[r * m + b] * hht;
                }
                w_new[r * m + a] = w[r * m + a] * num / (den + 1e-12);
            }
        }
        w = w_new;

        for (ours, hand) in model.w.iter().zip(&w) {
            assert!((ours - hand).abs() < 1e-12, "W mismatch: {ours} vs {hand}");
        }
        for (ours, hand) in model.h.iter().zip(&h) {
            assert!((ours - hand).abs() < 1e-12, "H mismatch: {ours} vs {hand}");
        }
    }

    #[test]
    fn nmf_exact_factorization_is_a_fixpoint() {
        // V = W0 H0 with matching m, initialized at (W0, H0): the updates
        // multiply by num/den = 1, so the factors stay put and the objective
        // sits at numerical zero.
        let w0 = vec![1.0, 0.5, 0.25, 2.0, 1.5, 0.75];
        let h0 = vec![0.2, 0.8, 0.4, 0.1, 0.6, 0.3, 0.9, 0.5];
        let (rows, m, n) = (3usize, 2usize, 4usize);
        let data = rows_from(
            (0..rows)
                .map(|r| {
                    (0..n)
                        .map(|j| (0..m).map(|k| w0[r * m + k] * h0[k * n + j]).sum())
                        .collect()
                })
                .collect(),
        );
        let model = nmf_fit_with_init(&data, w0.clone(), h0.clone(), m, 50).unwrap();
        let obj = model.objective(&data);
        assert!(obj < 1e-9, "objective {obj}");
        for (a, b) in model.w.iter().zip(&w0) {
            assert!((a - b).abs() < 1e-9);
        }
        for (a, b) in model.h.iter().zip(&h0) {
            assert!((a - b).abs() < 1e-9);
        }
    }

    #[test]
    fn nmf_random_init_converges_on_factorizable_data() {
        let w0 = [1.0, 0.5, 0.25, 2.0, 1.5, 0.75];
        let h0 = [0.2, 0.8, 0.4, 0.1, 0.6, 0.3, 0.9, 0.5];
        let (rows, m, n) = (3usize, 2usize, 4usize);
        let data = rows_from(
            (0..rows)
                .map(|r| {
                    (0..n)
                        .map(|j| (0..m).map(|k| w0[r * m + k] * h0[k * n + j]).sum())
                        .collect()
                })
                .collect(),
        );
        let model = nmf_fit(&data, m, 500, 1).unwrap();
        let obj = model.objective(&data);
        assert!(obj < 1e-4, "objective {obj}");
    }

    #[test]
    fn nmf_factors_stay_non_negative() {
        let data = seeded_rows(55, 20, 15);
        let model = nmf_fit(&data, 4, 50, 3).unwrap();
        assert!(model.w.iter().all(|&x| x >= 0.0));
        assert!(model.h.iter().all(|&x| x >= 0.0));
    }

    #[test]
    fn nmf_is_deterministic_per_seed() {
        let data = seeded_rows(8, 10, 12);
        let a = nmf_fit(&data, 3, 25, 9).unwrap();
        let b = nmf_fit(&data, 3, 25, 9).unwrap();
        assert_eq!(a.w, b.w);
        assert_eq!(a.h, b.h);
        let c = nmf_fit(&data, 3, 25, 10).unwrap();
        assert_ne!(a.w, c.w);
    }

    #[test]
    fn nmf_rejects_negative_input() {
        let data = rows_from(vec![vec![0.5, -0.1, 0.3]]);
        assert!(matches!(
            nmf_fit(&data, 1, 10, 0),
            Err(BaselineError::NegativeInput { id: 0, index: 1 })
        ));
    }
}
