//! Vector-to-polynomial compression: basis construction, the least-squares
//! fit, and Horner-based reconstruction.
//!
//! A vector `v` of length `n` is read as samples of a discrete function at
//! abscissae `x_1..x_n` and replaced by the `m` coefficients of the
//! polynomial that minimizes the L2 misfit over those samples. The basis
//! context (design matrix plus factorizations) depends only on `(n, m,
//! scaling)`, never on the data, so one context serves an entire stream of
//! vectors and nothing beyond the coefficients has to be kept to decompress.

use rayon::prelude::*;
use thiserror::Error;

use crate::linalg::{comp_horner, comp_horner_parts, CholeskyFactor, QrFactor};

/// How sample points are placed on the real line.
///
/// `Raw` uses the plain indices 1..n. At realistic sizes the resulting design
/// matrix has entries up to `n^(m-1)` and the normal equations collapse in
/// double precision; it is kept for fidelity with the textbook construction.
/// `Unit` rescales to k/n, which spans the same polynomial subspace at the
/// sample points but keeps the basis numerically workable, and is the default
/// everywhere in this crate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum DomainScaling {
    /// Sample points `x_k = k`.
    Raw,
    /// Sample points `x_k = k / n`.
    Unit,
}

/// The abscissa layout a polynomial record was fit against.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DomainSpec {
    n: usize,
    scaling: DomainScaling,
}

impl DomainSpec {
    pub fn new(n: usize, scaling: DomainScaling) -> Result<Self, FitError> {
        if n == 0 {
            return Err(FitError::EmptyDomain);
        }
        Ok(DomainSpec { n, scaling })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn scaling(&self) -> DomainScaling {
        self.scaling
    }

    /// Sample point for 1-based index `k`. Strictly increasing in `k`.
    #[inline]
    pub fn abscissa(&self, k: usize) -> f64 {
        debug_assert!(k >= 1 && k <= self.n);
        match self.scaling {
            DomainScaling::Raw => k as f64,
            DomainScaling::Unit => k as f64 / self.n as f64,
        }
    }

    /// The interval spanned by the sample points, used as the default
    /// integration domain for distances between records.
    pub fn fit_interval(&self) -> (f64, f64) {
        (self.abscissa(1), self.abscissa(self.n))
    }
}

/// One input vector: an id plus its `n` coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct VectorRecord {
    pub id: u64,
    pub values: Vec<f64>,
}

impl VectorRecord {
    pub fn new(id: u64, values: Vec<f64>) -> Self {
        VectorRecord { id, values }
    }

    pub fn dim(&self) -> usize {
        self.values.len()
    }
}

/// The compressed form of a vector: `m` polynomial coefficients (constant
/// term first), the domain they were fit on, and the sup-norm residual over
/// the sample points.
#[derive(Debug, Clone, PartialEq)]
pub struct PolyRecord {
    pub id: u64,
    pub coeffs: Vec<f64>,
    pub domain: DomainSpec,
    /// `max_k |v_k - P(x_k)|` at fit time; recomputable from the source
    /// vector because reconstruction uses the identical evaluation path.
    pub delta: f64,
}

impl PolyRecord {
    pub fn target_dim(&self) -> usize {
        self.coeffs.len()
    }

    /// Evaluate the polynomial at an arbitrary point.
    pub fn eval(&self, x: f64) -> f64 {
        comp_horner(&self.coeffs, x)
    }
}

/// Which least-squares route `fit` takes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolverKind {
    /// Householder QR on the design matrix. Default.
    Qr,
    /// Cholesky on the normal equations `A^T A a = A^T b`. Matches the
    /// textbook derivation but fails on ill-conditioned bases.
    NormalEq,
}

/// Precomputed fitting state for one `(n, m, scaling)` shape.
///
/// Immutable after construction and freely shareable across threads. Both
/// factorizations are prepared eagerly; the normal-equation route records a
/// failure instead of a factorization when `A^T A` is numerically singular.
#[derive(Debug, Clone)]
pub struct BasisContext {
    domain: DomainSpec,
    m: usize,
    design: Vec<f64>, // row-major n x m, entry (k, j) = x_k^j
    qr: QrFactor,
    normal: Option<CholeskyFactor>,
}

impl BasisContext {
    pub fn domain(&self) -> DomainSpec {
        self.domain
    }

    pub fn target_dim(&self) -> usize {
        self.m
    }

    pub fn design(&self) -> &[f64] {
        &self.design
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FitError {
    #[error("target dimension {m} exceeds vector dimension {n}")]
    InvalidTargetDim { m: usize, n: usize },
    #[error("domain must contain at least one sample point")]
    EmptyDomain,
    #[error("vector {id} has a non-finite entry at index {index}")]
    NonFiniteInput { id: u64, index: usize },
    #[error("normal equations are numerically singular{}", hint_suffix(*.m, *.n))]
    SingularSystem { m: usize, n: usize },
    #[error("vector {id} has dimension {got}, expected {expected}")]
    DimensionMismatch {
        id: u64,
        expected: usize,
        got: usize,
    },
}

fn hint_suffix(_m: usize, _n: usize) -> String {
    "; retry with the QR solver".to_string()
}

/// Build the design matrix and its factorizations for a `(n, m, scaling)`
/// shape. Column `j` holds the `j`-th powers of the sample points, starting
/// from the constant column `j = 0`.
pub fn build_basis(n: usize, m: usize, scaling: DomainScaling) -> Result<BasisContext, FitError> {
    let domain = DomainSpec::new(n, scaling)?;
    if m == 0 || m > n {
        return Err(FitError::InvalidTargetDim { m, n });
    }

    let mut design = vec![0.0; n * m];
    for k in 1..=n {
        let x = domain.abscissa(k);
        let row = &mut design[(k - 1) * m..k * m];
        let mut p = 1.0;
        for entry in row.iter_mut() {
            *entry = p;
            p *= x;
        }
    }

    let qr = QrFactor::factor(&design, n, m);

    // Normal equations: form A^T A once (m x m) and attempt Cholesky. A
    // failure here is not fatal; it surfaces as SingularSystem only when a
    // caller asks for the NormalEq route.
    let mut ata = vec![0.0; m * m];
    for i in 0..m {
        for j in i..m {
            let mut s = 0.0;
            for k in 0..n {
                s += design[k * m + i] * design[k * m + j];
            }
            ata[i * m + j] = s;
            ata[j * m + i] = s;
        }
    }
    let normal = CholeskyFactor::factor(&ata, m);

    Ok(BasisContext {
        domain,
        m,
        design,
        qr,
        normal,
    })
}

/// Residual of the current coefficients against `values`, evaluated with the
/// split compensated Horner so the subtraction does not round through the
/// polynomial value.
fn residual_into(basis: &BasisContext, coeffs: &[f64], values: &[f64], out: &mut [f64]) {
    for (k, slot) in out.iter_mut().enumerate() {
        let x = basis.domain.abscissa(k + 1);
        let (s, c) = comp_horner_parts(coeffs, x);
        *slot = (values[k] - s) - c;
    }
}

fn sup_residual(basis: &BasisContext, coeffs: &[f64], values: &[f64]) -> f64 {
    let mut sup = 0.0f64;
    for (k, &v) in values.iter().enumerate() {
        let x = basis.domain.abscissa(k + 1);
        let r = (v - comp_horner(coeffs, x)).abs();
        if r > sup {
            sup = r;
        }
    }
    sup
}

/// Greedy descent over the f64 coefficient lattice: nudge one coefficient a
/// single ulp at a time, keeping any move that shrinks the sup-norm
/// residual. The refined solution is already within rounding of the real
/// minimizer; this picks the best representable neighbor.
fn polish_on_lattice(basis: &BasisContext, values: &[f64], coeffs: &mut [f64]) {
    let mut best = sup_residual(basis, coeffs, values);
    for _pass in 0..8 {
        let mut improved = false;
        for j in 0..coeffs.len() {
            let original = coeffs[j];
            for candidate in [original.next_up(), original.next_down()] {
                coeffs[j] = candidate;
                let s = sup_residual(basis, coeffs, values);
                if s < best {
                    best = s;
                    improved = true;
                    break;
                }
                coeffs[j] = original;
            }
        }
        if !improved {
            break;
        }
    }
}

fn solve_once(basis: &BasisContext, rhs: &[f64], solver: SolverKind) -> Result<Vec<f64>, FitError> {
    match solver {
        SolverKind::Qr => {
            if !basis.qr.is_full_rank() {
                return Err(FitError::SingularSystem {
                    m: basis.m,
                    n: basis.domain.n,
                });
            }
            Ok(basis.qr.solve(rhs))
        }
        SolverKind::NormalEq => {
            let chol = basis.normal.as_ref().ok_or(FitError::SingularSystem {
                m: basis.m,
                n: basis.domain.n,
            })?;
            let m = basis.m;
            let mut atb = vec![0.0; m];
            for (j, slot) in atb.iter_mut().enumerate() {
                *slot = basis
                    .design
                    .iter()
                    .skip(j)
                    .step_by(m)
                    .zip(rhs)
                    .map(|(&a, &b)| a * b)
                    .sum();
            }
            Ok(chol.solve(&atb))
        }
    }
}

/// Least-squares fit of one vector against a prepared basis.
///
/// The returned coefficients minimize `||A a - b||_2`; `delta` is the
/// sup-norm residual over the sample points. The map from `values` to
/// coefficients is linear, which is what makes compressed-domain addition
/// and scaling exact at the coefficient level.
pub fn fit(basis: &BasisContext, v: &VectorRecord, solver: SolverKind) -> Result<PolyRecord, FitError> {
    let n = basis.domain.n;
    if v.values.len() != n {
        return Err(FitError::DimensionMismatch {
            id: v.id,
            expected: n,
            got: v.values.len(),
        });
    }
    if let Some(index) = v.values.iter().position(|x| !x.is_finite()) {
        return Err(FitError::NonFiniteInput { id: v.id, index });
    }

    let mut coeffs = solve_once(basis, &v.values, solver)?;

    // Square systems sit at the edge of what f64 coefficients can express:
    // two rounds of iterative refinement with a compensated residual push
    // the error down to the representability floor, and a +-1 ulp
    // coordinate polish then picks the best lattice neighbor under the
    // sup-norm. Capped at small n where interpolation is meaningful.
    if basis.m == n && n <= 64 {
        let mut resid = vec![0.0; n];
        for _ in 0..2 {
            residual_into(basis, &coeffs, &v.values, &mut resid);
            let correction = solve_once(basis, &resid, solver)?;
            for (c, d) in coeffs.iter_mut().zip(&correction) {
                *c += d;
            }
        }
        polish_on_lattice(basis, &v.values, &mut coeffs);
    }

    let mut delta = 0.0f64;
    for k in 1..=n {
        let x = basis.domain.abscissa(k);
        let r = (v.values[k - 1] - comp_horner(&coeffs, x)).abs();
        if r > delta {
            delta = r;
        }
    }

    Ok(PolyRecord {
        id: v.id,
        coeffs,
        domain: basis.domain,
        delta,
    })
}

/// Evaluate a record back into its `n` sample values by Horner's method.
///
/// Uses the same compensated evaluation as the delta computation inside
/// `fit`, so `reconstruct(fit(v))` deviates from `v` by exactly `delta` in
/// the sup norm.
pub fn reconstruct(p: &PolyRecord) -> VectorRecord {
    let n = p.domain.n;
    let mut values = Vec::with_capacity(n);
    for k in 1..=n {
        values.push(comp_horner(&p.coeffs, p.domain.abscissa(k)));
    }
    VectorRecord {
        id: p.id,
        values,
    }
}

/// Reconstruct a batch in parallel, preserving order.
pub fn reconstruct_batch(records: &[PolyRecord]) -> Vec<VectorRecord> {
    records.par_iter().map(reconstruct).collect()
}

/// Fit a whole batch against one shared basis.
///
/// Equivalent to mapping `fit` over the input in order: no information flows
/// between vectors, so the work is partitioned across the current rayon pool
/// and the output is bit-identical for any thread count.
pub fn compress_batch(
    vs: &[VectorRecord],
    m: usize,
    scaling: DomainScaling,
    solver: SolverKind,
) -> Result<Vec<PolyRecord>, FitError> {
    let Some(first) = vs.first() else {
        return Ok(Vec::new());
    };
    let n = first.values.len();
    for v in vs {
        if v.values.len() != n {
            return Err(FitError::DimensionMismatch {
                id: v.id,
                expected: n,
                got: v.values.len(),
            });
        }
    }
    let basis = build_basis(n, m, scaling)?;
    vs.par_iter().map(|v| fit(&basis, v, solver)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
        a.iter()
            .zip(b)
            .map(|(x, y)| (x - y).abs())
            .fold(0.0, f64::max)
    }

    #[test]
    fn basis_raw_n3_m2() {
        let basis = build_basis(3, 2, DomainScaling::Raw).unwrap();
        assert_eq!(basis.design(), &[1.0, 1.0, 1.0, 2.0, 1.0, 3.0]);
    }

    #[test]
    fn basis_constant_column() {
        let basis = build_basis(4, 1, DomainScaling::Raw).unwrap();
        assert_eq!(basis.design(), &[1.0, 1.0, 1.0, 1.0]);
    }

    #[test]
    fn basis_unit_corner_entry_is_one() {
        let basis = build_basis(1000, 10, DomainScaling::Unit).unwrap();
        // x_1000 = 1000/1000 = 1, so the last row is all ones.
        assert_eq!(basis.design()[999 * 10 + 9], 1.0);
    }

    #[test]
    fn basis_rejects_bad_shapes() {
        assert!(matches!(
            build_basis(3, 4, DomainScaling::Raw),
            Err(FitError::InvalidTargetDim { m: 4, n: 3 })
        ));
        assert!(matches!(
            build_basis(0, 1, DomainScaling::Raw),
            Err(FitError::EmptyDomain)
        ));
    }

    #[test]
    fn fit_constant_vector_is_exact() {
        for &c in &[0.0, 1.0, -3.5, 1e6] {
            let basis = build_basis(20, 5, DomainScaling::Unit).unwrap();
            let v = VectorRecord::new(0, vec![c; 20]);
            let p = fit(&basis, &v, SolverKind::Qr).unwrap();
            assert!((p.coeffs[0] - c).abs() <= 1e-9 * c.abs() + 1e-12);
            for &a in &p.coeffs[1..] {
                assert!(a.abs() <= 1e-9 * c.abs().max(1.0));
            }
            assert!(p.delta <= 1e-9 * c.abs() + 1e-12);
        }
    }

    #[test]
    fn fit_linear_sequence_is_exact() {
        let n = 12;
        let basis = build_basis(n, 3, DomainScaling::Raw).unwrap();
        let v = VectorRecord::new(0, (1..=n).map(|k| k as f64).collect());
        let p = fit(&basis, &v, SolverKind::Qr).unwrap();
        assert!(p.coeffs[0].abs() < 1e-8);
        assert!((p.coeffs[1] - 1.0).abs() < 1e-8);
        assert!(p.coeffs[2].abs() < 1e-8);
        assert!(p.delta <= 1e-8);
    }

    /// Independent oracle for the 2-coefficient fit: forms A^T A and A^T b by
    /// explicit summation and solves the 2x2 system by Cramer's rule.
    fn cramer_fit_2(xs: &[f64], ys: &[f64]) -> (f64, f64) {
        let n = xs.len() as f64;
        let sx: f64 = xs.iter().sum();
        let sxx: f64 = xs.iter().map(|x| x * x).sum();
        let sy: f64 = ys.iter().sum();
        let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| x * y).sum();
        let det = n * sxx - sx * sx;
        ((sxx * sy - sx * sxy) / det, (n * sxy - sx * sy) / det)
    }

    #[test]
    fn fit_matches_cramer_oracle() {
        let xs = [1.0, 2.0, 3.0, 4.0];
        let ys = [1.0, 2.0, 2.0, 3.0];
        let (a0, a1) = cramer_fit_2(&xs, &ys);
        // Frozen oracle output for v = (1, 2, 2, 3) on the raw domain.
        assert_eq!((a0, a1), (0.5, 0.6));

        let basis = build_basis(4, 2, DomainScaling::Raw).unwrap();
        let v = VectorRecord::new(7, ys.to_vec());
        let p = fit(&basis, &v, SolverKind::Qr).unwrap();
        assert!((p.coeffs[0] - a0).abs() < 1e-12);
        assert!((p.coeffs[1] - a1).abs() < 1e-12);
        // Residuals are (-0.1, 0.3, -0.3, 0.1), so delta = 0.3.
        assert!((p.delta - 0.3).abs() < 1e-12);

        // NormalEq route agrees on this well-conditioned instance.
        let pn = fit(&basis, &v, SolverKind::NormalEq).unwrap();
        assert!(max_abs_diff(&p.coeffs, &pn.coeffs) < 1e-12);
    }

    #[test]
    fn fit_round_trip_matches_oracle_values() {
        let basis = build_basis(4, 2, DomainScaling::Raw).unwrap();
        let v = VectorRecord::new(7, vec![1.0, 2.0, 2.0, 3.0]);
        let p = fit(&basis, &v, SolverKind::Qr).unwrap();
        let rec = reconstruct(&p);
        // Oracle fitted values A*a for a = (0.5, 0.6).
        let expected = [1.1, 1.7, 2.3, 2.9];
        assert!(max_abs_diff(&rec.values, &expected) < 1e-12);
    }

    #[test]
    fn fit_rejects_non_finite_input() {
        let basis = build_basis(4, 2, DomainScaling::Unit).unwrap();
        let v = VectorRecord::new(3, vec![1.0, f64::NAN, 0.0, 0.0]);
        assert_eq!(
            fit(&basis, &v, SolverKind::Qr),
            Err(FitError::NonFiniteInput { id: 3, index: 1 })
        );
    }

    #[test]
    fn fit_rejects_dimension_mismatch() {
        let basis = build_basis(4, 2, DomainScaling::Unit).unwrap();
        let v = VectorRecord::new(9, vec![1.0, 2.0]);
        assert_eq!(
            fit(&basis, &v, SolverKind::Qr),
            Err(FitError::DimensionMismatch {
                id: 9,
                expected: 4,
                got: 2
            })
        );
    }

    #[test]
    fn normal_eq_reports_singular_system_with_hint() {
        // Raw abscissae at this size wreck A^T A in double precision.
        let basis = build_basis(1000, 10, DomainScaling::Raw).unwrap();
        let v = VectorRecord::new(0, vec![0.5; 1000]);
        let err = fit(&basis, &v, SolverKind::NormalEq).unwrap_err();
        match &err {
            FitError::SingularSystem { .. } => {}
            other => panic!("expected SingularSystem, got {other:?}"),
        }
        assert!(err.to_string().contains("QR"), "error should suggest the QR path");
    }

    #[test]
    fn reconstruct_constant_and_linear() {
        let p = PolyRecord {
            id: 0,
            coeffs: vec![2.5],
            domain: DomainSpec::new(5, DomainScaling::Raw).unwrap(),
            delta: 0.0,
        };
        assert_eq!(reconstruct(&p).values, vec![2.5; 5]);

        let p = PolyRecord {
            id: 0,
            coeffs: vec![0.0, 1.0],
            domain: DomainSpec::new(3, DomainScaling::Raw).unwrap(),
            delta: 0.0,
        };
        assert_eq!(reconstruct(&p).values, vec![1.0, 2.0, 3.0]);
    }

    #[test]
    fn delta_matches_reconstruction_exactly() {
        let basis = build_basis(50, 6, DomainScaling::Unit).unwrap();
        let values: Vec<f64> = (0..50).map(|k| ((k * 2654435761u64 as usize) % 1000) as f64 / 1000.0).collect();
        let v = VectorRecord::new(1, values.clone());
        let p = fit(&basis, &v, SolverKind::Qr).unwrap();
        let rec = reconstruct(&p);
        let sup = max_abs_diff(&rec.values, &values);
        assert_eq!(sup, p.delta);
    }

    #[test]
    fn compress_batch_empty_and_identical() {
        assert!(compress_batch(&[], 3, DomainScaling::Unit, SolverKind::Qr)
            .unwrap()
            .is_empty());

        let v = VectorRecord::new(0, vec![0.1, 0.9, 0.4, 0.7, 0.2]);
        let w = VectorRecord::new(1, v.values.clone());
        let out = compress_batch(&[v, w], 2, DomainScaling::Unit, SolverKind::Qr).unwrap();
        assert_eq!(out[0].coeffs, out[1].coeffs);
        assert_eq!(out[0].delta, out[1].delta);
    }

    #[test]
    fn compress_batch_rejects_mixed_dimensions() {
        let vs = vec![
            VectorRecord::new(0, vec![1.0, 2.0]),
            VectorRecord::new(5, vec![1.0, 2.0, 3.0]),
        ];
        assert_eq!(
            compress_batch(&vs, 1, DomainScaling::Unit, SolverKind::Qr),
            Err(FitError::DimensionMismatch {
                id: 5,
                expected: 2,
                got: 3
            })
        );
    }
}
