//! Dense linear-algebra kernels used across the crate.
//!
//! Everything here is written directly against `&[f64]` in row-major layout.
//! The problem sizes are small (design matrices up to a few thousand rows and
//! a few dozen columns), so plain loops beat the overhead of pulling in a
//! matrix library.

/// Error-free transformation of a sum: returns `(s, e)` with `s = fl(a + b)`
/// and `a + b = s + e` exactly.
#[inline]
pub(crate) fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    let e = (a - (s - bb)) + (b - bb);
    (s, e)
}

const SPLIT: f64 = 134_217_729.0; // 2^27 + 1, Dekker's splitter

#[inline]
fn split(a: f64) -> (f64, f64) {
    let c = SPLIT * a;
    let hi = c - (c - a);
    (hi, a - hi)
}

/// Error-free transformation of a product: returns `(p, e)` with
/// `p = fl(a * b)` and `a * b = p + e` exactly (barring overflow).
///
/// Uses Dekker's splitting rather than `f64::mul_add` so the result does not
/// depend on whether the target has hardware FMA.
#[inline]
pub(crate) fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    let (ah, al) = split(a);
    let (bh, bl) = split(b);
    let e = ((ah * bh - p) + ah * bl + al * bh) + al * bl;
    (p, e)
}

/// Plain Horner evaluation of `coeffs[0] + coeffs[1] x + ...` at `x`.
#[inline]
pub(crate) fn horner(coeffs: &[f64], x: f64) -> f64 {
    let mut acc = 0.0;
    for &c in coeffs.iter().rev() {
        acc = acc * x + c;
    }
    acc
}

/// Compensated Horner evaluation, split into a value and a correction term.
///
/// `value + correction` approximates the exact polynomial value as if the
/// whole evaluation had been carried out in twice the working precision.
/// Callers that only want the best f64 value should add the two parts;
/// callers computing residuals can subtract them separately to dodge the
/// final rounding.
#[inline]
pub(crate) fn comp_horner_parts(coeffs: &[f64], x: f64) -> (f64, f64) {
    if coeffs.is_empty() {
        return (0.0, 0.0);
    }
    let mut s = coeffs[coeffs.len() - 1];
    let mut c = 0.0;
    for &a in coeffs[..coeffs.len() - 1].iter().rev() {
        let (p, pi) = two_prod(s, x);
        let (t, sigma) = two_sum(p, a);
        s = t;
        c = c * x + (pi + sigma);
    }
    (s, c)
}

/// Compensated Horner evaluation rounded to a single f64.
#[inline]
pub(crate) fn comp_horner(coeffs: &[f64], x: f64) -> f64 {
    let (s, c) = comp_horner_parts(coeffs, x);
    s + c
}

/// Householder QR factorization of a tall (rows >= cols) row-major matrix.
///
/// The upper triangle of `qr` holds R (diagonal in `r_diag`); the columns at
/// and below the diagonal hold the Householder vectors.
#[derive(Debug, Clone)]
pub(crate) struct QrFactor {
    qr: Vec<f64>,
    r_diag: Vec<f64>,
    rows: usize,
    cols: usize,
}

impl QrFactor {
    pub fn factor(a: &[f64], rows: usize, cols: usize) -> Self {
        assert!(rows >= cols && rows * cols == a.len());
        let mut qr = a.to_vec();
        let mut r_diag = vec![0.0; cols];

        for k in 0..cols {
            let mut norm_sq = 0.0;
            for i in k..rows {
                let v = qr[i * cols + k];
                norm_sq += v * v;
            }
            let mut norm = norm_sq.sqrt();
            if norm == 0.0 {
                r_diag[k] = 0.0;
                continue;
            }
            if qr[k * cols + k] > 0.0 {
                norm = -norm;
            }
            for i in k..rows {
                qr[i * cols + k] /= -norm;
            }
            qr[k * cols + k] += 1.0;

            for j in (k + 1)..cols {
                let mut s = 0.0;
                for i in k..rows {
                    s += qr[i * cols + k] * qr[i * cols + j];
                }
                s = -s / qr[k * cols + k];
                for i in k..rows {
                    let v = qr[i * cols + k];
                    qr[i * cols + j] += s * v;
                }
            }
            r_diag[k] = norm;
        }

        QrFactor {
            qr,
            r_diag,
            rows,
            cols,
        }
    }

    pub fn is_full_rank(&self) -> bool {
        self.r_diag.iter().all(|d| d.abs() > f64::MIN_POSITIVE)
    }

    /// Least-squares solve of `min ||A x - b||_2`; `b` has `rows` entries.
    ///
    /// Panics if the factorization is rank deficient; callers check
    /// `is_full_rank` up front.
    #[allow(clippy::needless_range_loop)] // strided dual-index loops
    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        assert_eq!(b.len(), self.rows);
        let (rows, cols) = (self.rows, self.cols);
        let mut x = b.to_vec();

        // Q^T b via the stored Householder reflections.
        for k in 0..cols {
            let diag = self.qr[k * cols + k];
            if diag == 0.0 {
                continue;
            }
            let mut s = 0.0;
            for i in k..rows {
                s += self.qr[i * cols + k] * x[i];
            }
            s = -s / diag;
            for i in k..rows {
                x[i] += s * self.qr[i * cols + k];
            }
        }

        // Back substitution on R.
        for i in (0..cols).rev() {
            for j in (i + 1)..cols {
                let xj = x[j];
                x[i] -= self.qr[i * cols + j] * xj;
            }
            x[i] /= self.r_diag[i];
        }
        x.truncate(cols);
        x
    }
}

/// Cholesky factorization of a symmetric positive-definite matrix, used for
/// the normal-equation solve path.
#[derive(Debug, Clone)]
pub(crate) struct CholeskyFactor {
    l: Vec<f64>,
    dim: usize,
}

impl CholeskyFactor {
    /// Returns `None` when the matrix is not numerically positive definite
    /// at working precision. Besides outright non-positive pivots, a pivot
    /// collapse of more than 1/eps (squared diagonal ratio) means the system
    /// is singular as far as f64 arithmetic can tell.
    pub fn factor(a: &[f64], dim: usize) -> Option<Self> {
        assert_eq!(a.len(), dim * dim);
        let mut l = vec![0.0; dim * dim];
        for i in 0..dim {
            for j in 0..=i {
                let mut sum = a[i * dim + j];
                for k in 0..j {
                    sum -= l[i * dim + k] * l[j * dim + k];
                }
                if i == j {
                    if sum <= 0.0 || !sum.is_finite() {
                        return None;
                    }
                    l[i * dim + i] = sum.sqrt();
                } else {
                    l[i * dim + j] = sum / l[j * dim + j];
                }
            }
        }
        let mut min_diag = f64::INFINITY;
        let mut max_diag = 0.0f64;
        for i in 0..dim {
            let d = l[i * dim + i];
            min_diag = min_diag.min(d);
            max_diag = max_diag.max(d);
        }
        let ratio = min_diag / max_diag;
        if ratio * ratio < f64::EPSILON {
            return None;
        }
        Some(CholeskyFactor { l, dim })
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        assert_eq!(b.len(), self.dim);
        let n = self.dim;
        let mut y = b.to_vec();
        for i in 0..n {
            for k in 0..i {
                let yk = y[k];
                y[i] -= self.l[i * n + k] * yk;
            }
            y[i] /= self.l[i * n + i];
        }
        for i in (0..n).rev() {
            for k in (i + 1)..n {
                let yk = y[k];
                y[i] -= self.l[k * n + i] * yk;
            }
            y[i] /= self.l[i * n + i];
        }
        y
    }
}

/// Eigen-decomposition of a small symmetric matrix by the cyclic Jacobi
/// method. Returns eigenvalues (descending) and the matching eigenvectors as
/// rows of a `dim x dim` row-major matrix.
pub(crate) fn jacobi_eigen(a: &[f64], dim: usize) -> (Vec<f64>, Vec<f64>) {
    assert_eq!(a.len(), dim * dim);
    let mut m = a.to_vec();
    // v starts as the identity; accumulates rotations column-wise.
    let mut v = vec![0.0; dim * dim];
    for i in 0..dim {
        v[i * dim + i] = 1.0;
    }

    for _sweep in 0..64 {
        let mut off = 0.0;
        for i in 0..dim {
            for j in (i + 1)..dim {
                off += m[i * dim + j] * m[i * dim + j];
            }
        }
        if off.sqrt() < 1e-14 * (1.0 + frobenius_norm(&m)) {
            break;
        }
        for p in 0..dim {
            for q in (p + 1)..dim {
                let apq = m[p * dim + q];
                if apq == 0.0 {
                    continue;
                }
                let app = m[p * dim + p];
                let aqq = m[q * dim + q];
                let theta = (aqq - app) / (2.0 * apq);
                let t = if theta >= 0.0 {
                    1.0 / (theta + (1.0 + theta * theta).sqrt())
                } else {
                    1.0 / (theta - (1.0 + theta * theta).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;

                for k in 0..dim {
                    let mkp = m[k * dim + p];
                    let mkq = m[k * dim + q];
                    m[k * dim + p] = c * mkp - s * mkq;
                    m[k * dim + q] = s * mkp + c * mkq;
                }
                for k in 0..dim {
                    let mpk = m[p * dim + k];
                    let mqk = m[q * dim + k];
                    m[p * dim + k] = c * mpk - s * mqk;
                    m[q * dim + k] = s * mpk + c * mqk;
                }
                for k in 0..dim {
                    let vkp = v[k * dim + p];
                    let vkq = v[k * dim + q];
                    v[k * dim + p] = c * vkp - s * vkq;
                    v[k * dim + q] = s * vkp + c * vkq;
                }
            }
        }
    }

    let mut order: Vec<usize> = (0..dim).collect();
    order.sort_by(|&i, &j| {
        m[j * dim + j]
            .partial_cmp(&m[i * dim + i])
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    let eigenvalues: Vec<f64> = order.iter().map(|&i| m[i * dim + i]).collect();
    let mut eigenvectors = vec![0.0; dim * dim];
    for (row, &col) in order.iter().enumerate() {
        for k in 0..dim {
            eigenvectors[row * dim + k] = v[k * dim + col];
        }
    }
    (eigenvalues, eigenvectors)
}

fn frobenius_norm(m: &[f64]) -> f64 {
    m.iter().map(|x| x * x).sum::<f64>().sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn approx(a: &[f64], b: &[f64], tol: f64) -> bool {
        a.len() == b.len() && a.iter().zip(b).all(|(x, y)| (x - y).abs() < tol)
    }

    #[test]
    fn two_prod_is_exact() {
        let (p, e) = two_prod(1.0 + f64::EPSILON, 1.0 + f64::EPSILON);
        // (1+eps)^2 = 1 + 2 eps + eps^2; the eps^2 term is the error part.
        assert_eq!(p, 1.0 + 2.0 * f64::EPSILON);
        assert_eq!(e, f64::EPSILON * f64::EPSILON);
    }

    #[test]
    fn comp_horner_matches_plain_on_tame_input() {
        let coeffs = [1.0, -2.0, 0.5, 3.0];
        for &x in &[0.0, 0.3, 1.0, -1.7] {
            let a = horner(&coeffs, x);
            let b = comp_horner(&coeffs, x);
            assert!((a - b).abs() <= 1e-15 * (1.0 + a.abs()));
        }
    }

    #[test]
    fn comp_horner_beats_plain_on_cancellation() {
        // (x - 1)^6 expanded; near x = 1 plain Horner loses most digits.
        let coeffs = [1.0, -6.0, 15.0, -20.0, 15.0, -6.0, 1.0];
        let x = 1.0 + 1e-4;
        let exact = (x - 1.0f64).powi(6);
        let comp = comp_horner(&coeffs, x);
        assert!((comp - exact).abs() <= 1e-16 * exact.max(1e-300) + 1e-30);
    }

    #[test]
    fn qr_solves_overdetermined_system() {
        // Fit y = 5 + 0.5 x through (1,6), (2,5), (3,7).
        let a = [1.0, 1.0, 1.0, 2.0, 1.0, 3.0];
        let b = [6.0, 5.0, 7.0];
        let f = QrFactor::factor(&a, 3, 2);
        assert!(f.is_full_rank());
        let x = f.solve(&b);
        assert!(approx(&x, &[5.0, 0.5], 1e-12));
    }

    #[test]
    fn qr_solves_square_system() {
        let a = [2.0, 1.0, 1.0, 4.0];
        let b = [5.0, 6.0];
        let x = QrFactor::factor(&a, 2, 2).solve(&b);
        assert!(approx(&x, &[2.0, 1.0], 1e-12));
    }

    #[test]
    fn qr_detects_rank_deficiency() {
        let a = [1.0, 2.0, 2.0, 4.0, 3.0, 6.0];
        let f = QrFactor::factor(&a, 3, 2);
        assert!(!f.is_full_rank());
    }

    #[test]
    fn cholesky_round_trips() {
        let a = [4.0, 2.0, 2.0, 3.0];
        let f = CholeskyFactor::factor(&a, 2).unwrap();
        let x = f.solve(&[8.0, 7.0]);
        // 4x + 2y = 8, 2x + 3y = 7 => x = 1.25, y = 1.5
        assert!(approx(&x, &[1.25, 1.5], 1e-12));
    }

    #[test]
    fn cholesky_rejects_indefinite() {
        let a = [1.0, 2.0, 2.0, 1.0]; // eigenvalues 3, -1
        assert!(CholeskyFactor::factor(&a, 2).is_none());
    }

    #[test]
    fn jacobi_diagonalizes_known_matrix() {
        // Eigenvalues of [[2,1],[1,2]] are 3 and 1.
        let (vals, vecs) = jacobi_eigen(&[2.0, 1.0, 1.0, 2.0], 2);
        assert!(approx(&vals, &[3.0, 1.0], 1e-12));
        // First eigenvector proportional to (1,1)/sqrt(2).
        let v0 = [vecs[0], vecs[1]];
        assert!((v0[0].abs() - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-10);
        assert!((v0[0] - v0[1]).abs() < 1e-10);
    }

    #[test]
    fn jacobi_handles_diagonal_input() {
        let (vals, _) = jacobi_eigen(&[5.0, 0.0, 0.0, 0.0, 3.0, 0.0, 0.0, 0.0, 1.0], 3);
        assert!(approx(&vals, &[5.0, 3.0, 1.0], 1e-13));
    }
}
