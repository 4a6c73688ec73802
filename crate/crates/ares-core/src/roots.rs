//! Real root location for low-degree polynomials via eigenvalues of the
//! companion matrix.
//!
//! The distance code needs the real roots of `P - Q` (to split integration
//! panels where the integrand kinks) and of `(P - Q)'` (to enumerate interior
//! extrema). Degrees here are small — twice the target dimension at most —
//! so a balanced companion matrix plus the classic double-shift Hessenberg QR
//! iteration is accurate and fast. Candidate roots are polished with a few
//! Newton steps before filtering into the requested interval.

use crate::linalg::{comp_horner, horner};

const RADIX: f64 = 2.0;

/// Diagonal similarity balancing (powers of two, exact in floating point).
fn balance(a: &mut [f64], n: usize) {
    let sqrdx = RADIX * RADIX;
    loop {
        let mut done = true;
        for i in 0..n {
            let mut c = 0.0;
            let mut r = 0.0;
            for j in 0..n {
                if j != i {
                    c += a[j * n + i].abs();
                    r += a[i * n + j].abs();
                }
            }
            if c != 0.0 && r != 0.0 {
                let mut f = 1.0;
                let s = c + r;
                let mut c = c;
                let g = r / RADIX;
                while c < g {
                    f *= RADIX;
                    c *= sqrdx;
                }
                let g = r * RADIX;
                while c > g {
                    f /= RADIX;
                    c /= sqrdx;
                }
                if (c + r) / f < 0.95 * s {
                    done = false;
                    let g = 1.0 / f;
                    for j in 0..n {
                        a[i * n + j] *= g;
                    }
                    for j in 0..n {
                        a[j * n + i] *= f;
                    }
                }
            }
        }
        if done {
            break;
        }
    }
}

/// Eigenvalues of an upper Hessenberg matrix by Francis double-shift QR.
/// Returns `(re, im)` pairs. The matrix is destroyed.
fn hessenberg_eigenvalues(a: &mut [f64], n: usize) -> Vec<(f64, f64)> {
    let mut eig = Vec::with_capacity(n);
    if n == 0 {
        return eig;
    }
    let at = |a: &[f64], i: usize, j: usize| a[i * n + j];

    let mut anorm = 0.0;
    for i in 0..n {
        for j in i.saturating_sub(1)..n {
            anorm += at(a, i, j).abs();
        }
    }
    if anorm == 0.0 {
        anorm = 1.0;
    }

    let eps = f64::EPSILON;
    let mut nn = n as isize - 1;
    let mut t = 0.0;

    while nn >= 0 {
        let mut its = 0;
        loop {
            // Find a small subdiagonal element to split at.
            let mut l = nn;
            while l >= 1 {
                let s = {
                    let s = at(a, (l - 1) as usize, (l - 1) as usize).abs()
                        + at(a, l as usize, l as usize).abs();
                    if s == 0.0 {
                        anorm
                    } else {
                        s
                    }
                };
                if at(a, l as usize, (l - 1) as usize).abs() <= eps * s {
                    a[l as usize * n + (l - 1) as usize] = 0.0;
                    break;
                }
                l -= 1;
            }

            let x = at(a, nn as usize, nn as usize);
            if l == nn {
                eig.push((x + t, 0.0));
                nn -= 1;
                break;
            }
            let y = at(a, (nn - 1) as usize, (nn - 1) as usize);
            let w = at(a, nn as usize, (nn - 1) as usize) * at(a, (nn - 1) as usize, nn as usize);
            if l == nn - 1 {
                let p = 0.5 * (y - x);
                let q = p * p + w;
                let mut z = q.abs().sqrt();
                let x = x + t;
                if q >= 0.0 {
                    z = p + z.copysign(p);
                    let r1 = x + z;
                    let r2 = if z != 0.0 { x - w / z } else { r1 };
                    eig.push((r1, 0.0));
                    eig.push((r2, 0.0));
                } else {
                    eig.push((x + p, z));
                    eig.push((x + p, -z));
                }
                nn -= 2;
                break;
            }

            // No luck; run one more double QR sweep.
            if its == 60 {
                // Pathological case: force a deflation rather than spin.
                eig.push((x + t, 0.0));
                nn -= 1;
                break;
            }
            let (mut x, mut y, mut w) = (x, y, w);
            if its == 10 || its == 20 || its == 30 || its == 40 || its == 50 {
                t += x;
                for i in 0..=nn as usize {
                    a[i * n + i] -= x;
                }
                let s = at(a, nn as usize, (nn - 1) as usize).abs()
                    + at(a, (nn - 1) as usize, (nn - 2) as usize).abs();
                x = 0.75 * s;
                y = x;
                w = -0.4375 * s * s;
            }
            its += 1;

            let mut m = nn - 2;
            let (mut p, mut q, mut r) = (0.0, 0.0, 0.0);
            while m >= l {
                let z = at(a, m as usize, m as usize);
                let rr = x - z;
                let ss = y - z;
                p = (rr * ss - w) / at(a, (m + 1) as usize, m as usize)
                    + at(a, m as usize, (m + 1) as usize);
                q = at(a, (m + 1) as usize, (m + 1) as usize) - z - rr - ss;
                r = at(a, (m + 2) as usize, (m + 1) as usize);
                let s = p.abs() + q.abs() + r.abs();
                p /= s;
                q /= s;
                r /= s;
                if m == l {
                    break;
                }
                let u = at(a, m as usize, (m - 1) as usize).abs() * (q.abs() + r.abs());
                let v = p.abs()
                    * (at(a, (m - 1) as usize, (m - 1) as usize).abs()
                        + z.abs()
                        + at(a, (m + 1) as usize, (m + 1) as usize).abs());
                if u <= eps * v {
                    break;
                }
                m -= 1;
            }
            for i in (m + 2)..=nn {
                a[i as usize * n + (i - 2) as usize] = 0.0;
                if i != m + 2 {
                    a[i as usize * n + (i - 3) as usize] = 0.0;
                }
            }

            for k in m..=nn - 1 {
                if k != m {
                    p = at(a, k as usize, (k - 1) as usize);
                    q = at(a, (k + 1) as usize, (k - 1) as usize);
                    r = if k != nn - 1 {
                        at(a, (k + 2) as usize, (k - 1) as usize)
                    } else {
                        0.0
                    };
                    x = p.abs() + q.abs() + r.abs();
                    if x != 0.0 {
                        p /= x;
                        q /= x;
                        r /= x;
                    }
                }
                let s = (p * p + q * q + r * r).sqrt().copysign(p);
                if s == 0.0 {
                    continue;
                }
                if k == m {
                    if l != m {
                        a[k as usize * n + (k - 1) as usize] =
                            -a[k as usize * n + (k - 1) as usize];
                    }
                } else {
                    a[k as usize * n + (k - 1) as usize] = -s * x;
                }
                p += s;
                x = p / s;
                y = q / s;
                let z = r / s;
                q /= p;
                r /= p;
                for j in k as usize..=nn as usize {
                    let mut pj = at(a, k as usize, j) + q * at(a, (k + 1) as usize, j);
                    if k != nn - 1 {
                        pj += r * at(a, (k + 2) as usize, j);
                        a[(k + 2) as usize * n + j] -= pj * z;
                    }
                    a[(k + 1) as usize * n + j] -= pj * y;
                    a[k as usize * n + j] -= pj * x;
                }
                let mmin = nn.min(k + 3);
                for i in l as usize..=mmin as usize {
                    let mut pi = x * at(a, i, k as usize) + y * at(a, i, (k + 1) as usize);
                    if k != nn - 1 {
                        pi += z * at(a, i, (k + 2) as usize);
                        a[i * n + (k + 2) as usize] -= pi * r;
                    }
                    a[i * n + (k + 1) as usize] -= pi * q;
                    a[i * n + k as usize] -= pi;
                }
            }
        }
    }
    eig
}

fn derivative(coeffs: &[f64]) -> Vec<f64> {
    coeffs
        .iter()
        .enumerate()
        .skip(1)
        .map(|(j, &c)| j as f64 * c)
        .collect()
}

/// Real roots of `coeffs[0] + coeffs[1] x + ...` inside `[lo, hi]`, sorted
/// ascending and deduplicated at 1e-10 spacing.
pub(crate) fn real_roots_in(coeffs: &[f64], lo: f64, hi: f64) -> Vec<f64> {
    let max_abs = coeffs.iter().fold(0.0f64, |m, c| m.max(c.abs()));
    if max_abs == 0.0 {
        return Vec::new(); // identically zero; no isolated roots
    }
    // Trim negligible leading coefficients so the companion matrix is sane.
    let mut deg = coeffs.len() - 1;
    while deg > 0 && coeffs[deg].abs() <= 1e-14 * max_abs {
        deg -= 1;
    }
    if deg == 0 {
        return Vec::new();
    }

    let mut candidates: Vec<f64> = Vec::new();
    if deg == 1 {
        candidates.push(-coeffs[0] / coeffs[1]);
    } else if deg == 2 {
        let (a, b, c) = (coeffs[2], coeffs[1], coeffs[0]);
        let disc = b * b - 4.0 * a * c;
        if disc >= 0.0 {
            let sq = disc.sqrt();
            let q = -0.5 * (b + sq.copysign(b));
            candidates.push(q / a);
            if q != 0.0 {
                candidates.push(c / q);
            } else {
                candidates.push(0.0);
            }
        }
    } else {
        // Companion matrix of the monic polynomial: ones on the subdiagonal,
        // negated scaled coefficients in the last column.
        let lead = coeffs[deg];
        let mut comp = vec![0.0; deg * deg];
        for i in 0..deg {
            comp[i * deg + (deg - 1)] = -coeffs[i] / lead;
            if i >= 1 {
                comp[i * deg + (i - 1)] = 1.0;
            }
        }
        balance(&mut comp, deg);
        for (re, im) in hessenberg_eigenvalues(&mut comp, deg) {
            if im.abs() <= 1e-8 * (1.0 + re.abs()) {
                candidates.push(re);
            }
        }
    }

    // Newton polish sharpens eigenvalue-grade roots to evaluation accuracy.
    let dcoeffs = derivative(&coeffs[..=deg]);
    let span = hi - lo;
    let mut roots: Vec<f64> = Vec::new();
    for mut x in candidates {
        for _ in 0..3 {
            let p = comp_horner(&coeffs[..=deg], x);
            let d = horner(&dcoeffs, x);
            if d == 0.0 {
                break;
            }
            let step = p / d;
            if !step.is_finite() {
                break;
            }
            x -= step;
        }
        if x.is_finite() && x >= lo - 1e-9 * span && x <= hi + 1e-9 * span {
            roots.push(x.clamp(lo, hi));
        }
    }
    roots.sort_by(|a, b| a.partial_cmp(b).unwrap());
    roots.dedup_by(|a, b| (*a - *b).abs() <= 1e-10);
    roots
}

/// Real roots of the derivative inside `[lo, hi]` — the interior critical
/// points used by the sup-norm distance.
pub(crate) fn critical_points_in(coeffs: &[f64], lo: f64, hi: f64) -> Vec<f64> {
    if coeffs.len() < 2 {
        return Vec::new();
    }
    real_roots_in(&derivative(coeffs), lo, hi)
}
