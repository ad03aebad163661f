//! Laguerre polynomials, Hurwitz zeta and factorial ratios.

use crate::error::{domain, Result};

/// Generalized Laguerre polynomial L_m^(alpha)(x).
///
/// Evaluated by the three-term recurrence, which defines the same polynomial
/// as the explicit sum for every real alpha but does not cancel.
pub fn laguerre(m: usize, alpha: f64, x: f64) -> f64 {
    if m == 0 {
        return 1.0;
    }
    let mut prev = 1.0;
    let mut cur = 1.0 + alpha - x;
    for k in 1..m {
        let kf = k as f64;
        let next = ((2.0 * kf + 1.0 + alpha - x) * cur - (kf + alpha) * prev) / (kf + 1.0);
        prev = cur;
        cur = next;
    }
    cur
}

/// The explicit sum
/// sum_j (alpha+m)(alpha+m-1)...(alpha+j+1) / (j! (m-j)!) (-x)^j.
/// Exact for small arguments; kept as a reference for [`laguerre`].
pub fn laguerre_sum(m: usize, alpha: f64, x: f64) -> f64 {
    let mut total = 0.0;
    for j in 0..=m {
        let mut falling = 1.0;
        for k in (j + 1)..=m {
            falling *= alpha + k as f64;
        }
        let denom = factorial(j) * factorial(m - j);
        total += falling / denom * (-x).powi(j as i32);
    }
    total
}

fn factorial(n: usize) -> f64 {
    (1..=n).fold(1.0, |acc, k| acc * k as f64)
}

const DIRECT_TERMS: usize = 50;

/// Hurwitz zeta sum_{j>=0} (j+q)^{-s}, for s > 1 and q > 0.
///
/// Direct sum of the first 50 terms plus an Euler-Maclaurin tail carried
/// through the B4 term.
pub fn hurwitz_zeta(s: f64, q: f64) -> Result<f64> {
    if !(s > 1.0) || !s.is_finite() {
        return domain(format!("hurwitz_zeta needs s > 1, got {s}"));
    }
    if !(q > 0.0) || !q.is_finite() {
        return domain(format!("hurwitz_zeta needs q > 0, got {q}"));
    }
    let mut head = 0.0;
    // smallest terms first
    for j in (0..DIRECT_TERMS).rev() {
        head += (j as f64 + q).powf(-s);
    }
    let a = DIRECT_TERMS as f64 + q;
    let f = a.powf(-s);
    let tail = a * f / (s - 1.0) + 0.5 * f + s * f / (12.0 * a)
        - s * (s + 1.0) * (s + 2.0) * f / (720.0 * a * a * a);
    Ok(head + tail)
}

/// Riemann zeta for s > 1.
pub fn riemann_zeta(s: f64) -> Result<f64> {
    hurwitz_zeta(s, 1.0)
}

/// sqrt(n1! / n2!) without forming either factorial.
pub fn sqrt_factorial_ratio(n1: usize, n2: usize) -> f64 {
    let (hi, lo, invert) = if n1 >= n2 {
        (n1, n2, false)
    } else {
        (n2, n1, true)
    };
    let r = if hi - lo <= 64 {
        let mut p = 1.0;
        for k in (lo + 1)..=hi {
            p *= (k as f64).sqrt();
        }
        p
    } else {
        let log: f64 = ((lo + 1)..=hi).map(|k| (k as f64).ln()).sum();
        (0.5 * log).exp()
    };
    if invert {
        1.0 / r
    } else {
        r
    }
}
