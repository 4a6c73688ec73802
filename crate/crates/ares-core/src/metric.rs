//! Distances between compressed records, treated as polynomials on a fixed
//! interval.
//!
//! The L2 distance has a closed form: square the coefficient difference by
//! convolution and integrate term by term. L1 and sup-norm distances are
//! computed from the real roots of the difference polynomial — L1 by
//! adaptive quadrature on panels where the integrand keeps one sign, the sup
//! norm exactly from the interior critical points and the endpoints.

use thiserror::Error;

use crate::fit::PolyRecord;
use crate::linalg::horner;
use crate::roots::{critical_points_in, real_roots_in};

/// Absolute tolerance for the L1 quadrature. Overridable through
/// [`l1_distance_with_tolerance`].
pub const DEFAULT_QUADRATURE_TOL: f64 = 1e-9;

/// A closed interval `[lo, hi]` to integrate over.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegrationDomain {
    lo: f64,
    hi: f64,
}

impl IntegrationDomain {
    pub fn new(lo: f64, hi: f64) -> Result<Self, MetricError> {
        if !lo.is_finite() || !hi.is_finite() || lo >= hi {
            return Err(MetricError::InvalidDomain { lo, hi });
        }
        Ok(IntegrationDomain { lo, hi })
    }

    /// The interval the record was fit on: `[1, n]` for raw scaling,
    /// `[1/n, 1]` for unit scaling.
    pub fn fit_domain(p: &PolyRecord) -> Self {
        let (lo, hi) = p.domain.fit_interval();
        IntegrationDomain { lo, hi }
    }

    /// The literal `[1, m]` interval over the reduced dimension.
    pub fn reduced_domain(m: usize) -> Result<Self, MetricError> {
        IntegrationDomain::new(1.0, m as f64)
    }

    pub fn lo(&self) -> f64 {
        self.lo
    }

    pub fn hi(&self) -> f64 {
        self.hi
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MetricError {
    #[error("records were fit on different domains and cannot be compared")]
    DomainMismatch,
    #[error("invalid integration domain [{lo}, {hi}]")]
    InvalidDomain { lo: f64, hi: f64 },
    #[error("record {id} has a non-finite coefficient")]
    NonFiniteCoefficient { id: u64 },
}

/// Coefficient difference `p - q`, padded to the longer length.
fn diff_coeffs(p: &PolyRecord, q: &PolyRecord) -> Result<Vec<f64>, MetricError> {
    if p.domain != q.domain {
        return Err(MetricError::DomainMismatch);
    }
    for r in [p, q] {
        if r.coeffs.iter().any(|c| !c.is_finite()) {
            return Err(MetricError::NonFiniteCoefficient { id: r.id });
        }
    }
    let len = p.coeffs.len().max(q.coeffs.len());
    let mut d = vec![0.0; len];
    for (i, slot) in d.iter_mut().enumerate() {
        let a = p.coeffs.get(i).copied().unwrap_or(0.0);
        let b = q.coeffs.get(i).copied().unwrap_or(0.0);
        *slot = a - b;
    }
    Ok(d)
}

/// Exact L2 distance `sqrt(int (P - Q)^2 dx)` over the domain.
pub fn l2_distance(
    p: &PolyRecord,
    q: &PolyRecord,
    dom: IntegrationDomain,
) -> Result<f64, MetricError> {
    let r = diff_coeffs(p, q)?;
    // Square by convolution: s_k = sum_{i+j=k} r_i r_j.
    let mut sq = vec![0.0; 2 * r.len() - 1];
    for (i, &ri) in r.iter().enumerate() {
        for (j, &rj) in r.iter().enumerate() {
            sq[i + j] += ri * rj;
        }
    }
    // Term-wise integral: int x^k dx = (hi^{k+1} - lo^{k+1}) / (k + 1).
    let mut total = 0.0;
    let mut hi_pow = dom.hi;
    let mut lo_pow = dom.lo;
    for (k, &s) in sq.iter().enumerate() {
        total += s * (hi_pow - lo_pow) / (k as f64 + 1.0);
        hi_pow *= dom.hi;
        lo_pow *= dom.lo;
    }
    Ok(total.max(0.0).sqrt())
}

fn adaptive_simpson(coeffs: &[f64], a: f64, b: f64, tol: f64) -> f64 {
    fn f(coeffs: &[f64], x: f64) -> f64 {
        horner(coeffs, x).abs()
    }
    #[allow(clippy::too_many_arguments)]
    fn recurse(
        coeffs: &[f64],
        a: f64,
        b: f64,
        fa: f64,
        fm: f64,
        fb: f64,
        whole: f64,
        tol: f64,
        depth: u32,
    ) -> f64 {
        let m = 0.5 * (a + b);
        let lm = 0.5 * (a + m);
        let rm = 0.5 * (m + b);
        let flm = f(coeffs, lm);
        let frm = f(coeffs, rm);
        let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
        let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
        let delta = left + right - whole;
        if depth == 0 || delta.abs() <= 15.0 * tol {
            left + right + delta / 15.0
        } else {
            recurse(coeffs, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
                + recurse(coeffs, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
        }
    }
    let fa = f(coeffs, a);
    let fb = f(coeffs, b);
    let fm = f(coeffs, 0.5 * (a + b));
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    recurse(coeffs, a, b, fa, fm, fb, whole, tol, 48)
}

/// L1 distance `int |P - Q| dx` by adaptive quadrature, with the interval
/// split at the real roots of `P - Q` so each panel is smooth.
pub fn l1_distance(
    p: &PolyRecord,
    q: &PolyRecord,
    dom: IntegrationDomain,
) -> Result<f64, MetricError> {
    l1_distance_with_tolerance(p, q, dom, DEFAULT_QUADRATURE_TOL)
}

/// L1 distance with an explicit absolute quadrature tolerance.
pub fn l1_distance_with_tolerance(
    p: &PolyRecord,
    q: &PolyRecord,
    dom: IntegrationDomain,
    tol: f64,
) -> Result<f64, MetricError> {
    let r = diff_coeffs(p, q)?;
    let mut cuts = vec![dom.lo];
    cuts.extend(real_roots_in(&r, dom.lo, dom.hi));
    cuts.push(dom.hi);
    cuts.dedup_by(|a, b| (*a - *b).abs() <= 1e-12 * (dom.hi - dom.lo));

    let width = dom.hi - dom.lo;
    let mut total = 0.0;
    for pair in cuts.windows(2) {
        let (a, b) = (pair[0], pair[1]);
        if b <= a {
            continue;
        }
        let panel_tol = tol * ((b - a) / width).max(f64::MIN_POSITIVE);
        total += adaptive_simpson(&r, a, b, panel_tol);
    }
    Ok(total)
}

/// Sup-norm distance `max |P - Q|`, taken exactly over the endpoints and the
/// interior critical points of `P - Q`.
pub fn linf_distance(
    p: &PolyRecord,
    q: &PolyRecord,
    dom: IntegrationDomain,
) -> Result<f64, MetricError> {
    let r = diff_coeffs(p, q)?;
    let mut best = horner(&r, dom.lo).abs().max(horner(&r, dom.hi).abs());
    for x in critical_points_in(&r, dom.lo, dom.hi) {
        let v = horner(&r, x).abs();
        if v > best {
            best = v;
        }
    }
    Ok(best)
}
