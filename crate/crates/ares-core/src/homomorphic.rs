//! Linear algebra directly on compressed records.
//!
//! Because fitting is linear in the input vector, adding or scaling records
//! at the coefficient level agrees with compressing the corresponding vector
//! operation. Residual bounds compose alongside: the record itself always
//! carries the worst-case bound, while [`linear_combination`] additionally
//! returns a [`BoundLedger`] that can track the tighter RMS or
//! covariance-based estimates.

use thiserror::Error;

use crate::fit::PolyRecord;
use crate::linalg::jacobi_eigen;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum HomomorphicError {
    #[error("records were fit on different domains or target dimensions")]
    DomainMismatch,
    #[error("scalar must be finite, got {value}")]
    NonFiniteScalar { value: f64 },
    #[error("covariance matrix is {got}x{got} but there are {terms} terms")]
    CovarianceShapeMismatch { got: usize, terms: usize },
    #[error("covariance matrix is not symmetric positive semidefinite")]
    InvalidCovariance,
    #[error("linear combination needs at least one term")]
    EmptyCombination,
}

/// Symmetric positive semidefinite covariance of the per-record errors,
/// supplied by the caller for the correlated bound mode.
#[derive(Debug, Clone, PartialEq)]
pub struct CovarianceMatrix {
    dim: usize,
    data: Vec<f64>, // row-major dim x dim
}

impl CovarianceMatrix {
    /// Validates symmetry (to 1e-12) and positive semidefiniteness
    /// (eigenvalues >= -1e-10).
    pub fn new(data: Vec<f64>, dim: usize) -> Result<Self, HomomorphicError> {
        if data.len() != dim * dim || dim == 0 {
            return Err(HomomorphicError::InvalidCovariance);
        }
        let scale = data.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(1.0);
        for i in 0..dim {
            for j in (i + 1)..dim {
                if (data[i * dim + j] - data[j * dim + i]).abs() > 1e-12 * scale {
                    return Err(HomomorphicError::InvalidCovariance);
                }
            }
        }
        let (eigenvalues, _) = jacobi_eigen(&data, dim);
        if eigenvalues.iter().any(|&l| l < -1e-10) {
            return Err(HomomorphicError::InvalidCovariance);
        }
        Ok(CovarianceMatrix { dim, data })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Quadratic form `c^T Sigma c`.
    fn quad_form(&self, c: &[f64]) -> f64 {
        let mut total = 0.0;
        for (i, &ci) in c.iter().enumerate() {
            let row = &self.data[i * self.dim..(i + 1) * self.dim];
            let dot: f64 = row.iter().zip(c).map(|(&s, &cj)| s * cj).sum();
            total += ci * dot;
        }
        total
    }
}

/// How the cumulative error bound of a combination is aggregated.
#[derive(Debug, Clone, PartialEq)]
pub enum BoundMode {
    /// `sum |c_i| delta_i` — holds unconditionally.
    WorstCase,
    /// `sqrt(sum c_i^2 delta_i^2)` — an expectation-level estimate that
    /// assumes the per-record errors are independent.
    IndependentRms,
    /// `sqrt(c^T Sigma c)` with a caller-supplied error covariance.
    Correlated(CovarianceMatrix),
}

/// Accumulated error-bound state for a chain of compressed-domain
/// operations.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundLedger {
    /// Bound on the sup-norm error of the result, under `mode`.
    pub delta_bound: f64,
    pub mode: BoundMode,
    /// Number of accumulated operations (combination terms plus any
    /// follow-up scalings).
    pub terms: usize,
}

fn check_compatible(p: &PolyRecord, q: &PolyRecord) -> Result<(), HomomorphicError> {
    if p.domain != q.domain || p.coeffs.len() != q.coeffs.len() {
        return Err(HomomorphicError::DomainMismatch);
    }
    Ok(())
}

/// Compressed-domain addition: coefficients add, worst-case deltas add.
pub fn add(p: &PolyRecord, q: &PolyRecord) -> Result<PolyRecord, HomomorphicError> {
    check_compatible(p, q)?;
    let coeffs = p
        .coeffs
        .iter()
        .zip(&q.coeffs)
        .map(|(a, b)| a + b)
        .collect();
    Ok(PolyRecord {
        id: p.id,
        coeffs,
        domain: p.domain,
        delta: p.delta + q.delta,
    })
}

/// Compressed-domain scalar multiplication: coefficients scale by `c`, the
/// delta bound by `|c|`.
pub fn scale(p: &PolyRecord, c: f64) -> Result<PolyRecord, HomomorphicError> {
    if !c.is_finite() {
        return Err(HomomorphicError::NonFiniteScalar { value: c });
    }
    Ok(PolyRecord {
        id: p.id,
        coeffs: p.coeffs.iter().map(|a| c * a).collect(),
        domain: p.domain,
        delta: c.abs() * p.delta,
    })
}

/// `sum c_i P_i` over the compressed records, with the cumulative error
/// bound aggregated under the requested mode.
///
/// The returned record keeps the first term's id and carries the worst-case
/// bound as its own delta; the ledger holds the mode-specific bound.
pub fn linear_combination(
    terms: &[(f64, PolyRecord)],
    mode: BoundMode,
) -> Result<(PolyRecord, BoundLedger), HomomorphicError> {
    let Some((_, first)) = terms.first() else {
        return Err(HomomorphicError::EmptyCombination);
    };
    for (c, p) in terms {
        if !c.is_finite() {
            return Err(HomomorphicError::NonFiniteScalar { value: *c });
        }
        check_compatible(first, p)?;
    }
    if let BoundMode::Correlated(cov) = &mode {
        if cov.dim() != terms.len() {
            return Err(HomomorphicError::CovarianceShapeMismatch {
                got: cov.dim(),
                terms: terms.len(),
            });
        }
    }

    let m = first.coeffs.len();
    let mut coeffs = vec![0.0; m];
    let mut worst_case = 0.0;
    for (c, p) in terms {
        for (slot, a) in coeffs.iter_mut().zip(&p.coeffs) {
            *slot += c * a;
        }
        worst_case += c.abs() * p.delta;
    }

    let delta_bound = match &mode {
        BoundMode::WorstCase => worst_case,
        BoundMode::IndependentRms => terms
            .iter()
            .map(|(c, p)| c * c * p.delta * p.delta)
            .sum::<f64>()
            .sqrt(),
        BoundMode::Correlated(cov) => {
            let c: Vec<f64> = terms.iter().map(|(c, _)| *c).collect();
            cov.quad_form(&c).max(0.0).sqrt()
        }
    };

    let record = PolyRecord {
        id: first.id,
        coeffs,
        domain: first.domain,
        delta: worst_case,
    };
    let ledger = BoundLedger {
        delta_bound,
        mode,
        terms: terms.len(),
    };
    Ok((record, ledger))
}

/// Apply one more scalar multiplication to a combination result: the
/// coefficients scale by `c_final`, both bounds by `|c_final|`.
pub fn scale_after(
    result: (PolyRecord, BoundLedger),
    c_final: f64,
) -> Result<(PolyRecord, BoundLedger), HomomorphicError> {
    let (record, ledger) = result;
    let record = scale(&record, c_final)?;
    let ledger = BoundLedger {
        delta_bound: c_final.abs() * ledger.delta_bound,
        mode: ledger.mode,
        terms: ledger.terms + 1,
    };
    Ok((record, ledger))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fit::{DomainScaling, DomainSpec};

    fn record(coeffs: Vec<f64>, delta: f64) -> PolyRecord {
        PolyRecord {
            id: 1,
            coeffs,
            domain: DomainSpec::new(8, DomainScaling::Unit).unwrap(),
            delta,
        }
    }

    #[test]
    fn add_with_zero_record_is_identity() {
        let p = record(vec![1.0, -0.5, 2.0], 0.25);
        let zero = record(vec![0.0; 3], 0.0);
        let sum = add(&p, &zero).unwrap();
        assert_eq!(sum.coeffs, p.coeffs);
        assert_eq!(sum.delta, p.delta);
    }

    #[test]
    fn add_sums_deltas() {
        let p = record(vec![1.0], 0.1);
        let q = record(vec![2.0], 0.2);
        let sum = add(&p, &q).unwrap();
        assert!((sum.delta - 0.3).abs() < 1e-12);
        assert_eq!(sum.coeffs, vec![3.0]);
    }

    #[test]
    fn scale_identity_zero_and_doubling() {
        let p = record(vec![1.0, 2.0], 0.1);
        let same = scale(&p, 1.0).unwrap();
        assert_eq!(same.coeffs, p.coeffs);
        assert_eq!(same.delta, p.delta);

        let zeroed = scale(&p, 0.0).unwrap();
        assert_eq!(zeroed.coeffs, vec![0.0, 0.0]);
        assert_eq!(zeroed.delta, 0.0);

        let doubled = scale(&p, 2.0).unwrap();
        assert!((doubled.delta - 0.2).abs() < 1e-15);
    }

    #[test]
    fn scale_rejects_non_finite() {
        let p = record(vec![1.0], 0.1);
        assert!(matches!(
            scale(&p, f64::NAN),
            Err(HomomorphicError::NonFiniteScalar { .. })
        ));
    }

    #[test]
    fn single_term_combination_gives_delta_in_all_modes() {
        let p = record(vec![0.5, 1.5], 0.125);
        for mode in [
            BoundMode::WorstCase,
            BoundMode::IndependentRms,
            BoundMode::Correlated(CovarianceMatrix::new(vec![0.125 * 0.125], 1).unwrap()),
        ] {
            let (rec, ledger) = linear_combination(&[(1.0, p.clone())], mode).unwrap();
            assert_eq!(rec.coeffs, p.coeffs);
            assert!((ledger.delta_bound - 0.125).abs() < 1e-15);
            assert_eq!(ledger.terms, 1);
        }
    }

    #[test]
    fn two_term_bounds_match_hand_values() {
        // deltas (0.3, 0.4), c = (1, 1): worst case 0.7, RMS 0.5.
        let p = record(vec![1.0], 0.3);
        let q = record(vec![2.0], 0.4);
        let terms = vec![(1.0, p), (1.0, q)];
        let (_, wc) = linear_combination(&terms, BoundMode::WorstCase).unwrap();
        assert!((wc.delta_bound - 0.7).abs() < 1e-15);
        let (_, rms) = linear_combination(&terms, BoundMode::IndependentRms).unwrap();
        assert!((rms.delta_bound - 0.5).abs() < 1e-15);
    }

    #[test]
    fn scale_after_scales_bound() {
        let p = record(vec![1.0], 0.3);
        let q = record(vec![2.0], 0.4);
        let terms = vec![(1.0, p), (1.0, q)];
        let out = linear_combination(&terms, BoundMode::IndependentRms).unwrap();
        let (_, ledger) = scale_after(out.clone(), 1.0).unwrap();
        assert!((ledger.delta_bound - 0.5).abs() < 1e-15);

        let (_, ledger) = scale_after(out.clone(), -3.0).unwrap();
        assert!((ledger.delta_bound - 1.5).abs() < 1e-15);
        assert_eq!(ledger.terms, 3);

        // c_final = 2 on the RMS 0.5 example gives 1.0.
        let (_, ledger) = scale_after(out, 2.0).unwrap();
        assert!((ledger.delta_bound - 1.0).abs() < 1e-15);
    }

    #[test]
    fn diagonal_covariance_reproduces_rms() {
        let p = record(vec![1.0], 0.3);
        let q = record(vec![2.0], 0.4);
        let cs = [0.7, -1.3];
        let terms: Vec<(f64, PolyRecord)> = vec![(cs[0], p), (cs[1], q)];
        let (_, rms) = linear_combination(&terms, BoundMode::IndependentRms).unwrap();
        let cov = CovarianceMatrix::new(vec![0.09, 0.0, 0.0, 0.16], 2).unwrap();
        let (_, corr) = linear_combination(&terms, BoundMode::Correlated(cov)).unwrap();
        assert!((rms.delta_bound - corr.delta_bound).abs() < 1e-12);
    }

    #[test]
    fn covariance_validation() {
        // Asymmetric.
        assert!(CovarianceMatrix::new(vec![1.0, 0.5, 0.2, 1.0], 2).is_err());
        // Indefinite: eigenvalues 3, -1.
        assert!(CovarianceMatrix::new(vec![1.0, 2.0, 2.0, 1.0], 2).is_err());
        // PSD (rank one) is fine.
        assert!(CovarianceMatrix::new(vec![1.0, 1.0, 1.0, 1.0], 2).is_ok());
    }

    #[test]
    fn covariance_shape_mismatch() {
        let p = record(vec![1.0], 0.3);
        let cov = CovarianceMatrix::new(vec![1.0, 0.0, 0.0, 1.0], 2).unwrap();
        let err = linear_combination(&[(1.0, p)], BoundMode::Correlated(cov)).unwrap_err();
        assert_eq!(
            err,
            HomomorphicError::CovarianceShapeMismatch { got: 2, terms: 1 }
        );
    }

    #[test]
    fn mismatched_records_are_rejected() {
        let p = record(vec![1.0, 2.0], 0.1);
        let q = PolyRecord {
            id: 2,
            coeffs: vec![1.0, 2.0],
            domain: DomainSpec::new(9, DomainScaling::Unit).unwrap(),
            delta: 0.1,
        };
        assert_eq!(add(&p, &q), Err(HomomorphicError::DomainMismatch));
        let r = record(vec![1.0], 0.1); // different m
        assert_eq!(add(&p, &r), Err(HomomorphicError::DomainMismatch));
    }

    #[test]
    fn empty_combination_is_rejected() {
        assert_eq!(
            linear_combination(&[], BoundMode::WorstCase).unwrap_err(),
            HomomorphicError::EmptyCombination
        );
    }
}
