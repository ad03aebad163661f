use landau_core::specfun::{hurwitz_zeta, laguerre, laguerre_sum, riemann_zeta, sqrt_factorial_ratio};
use proptest::prelude::*;

#[test]
fn laguerre_hand_values() {
    for &(a, x) in &[(0.0, 0.0), (2.5, -1.0), (-3.0, 7.0)] {
        assert_eq!(laguerre(0, a, x), 1.0);
    }
    for &x in &[-2.0, 0.0, 0.5, 3.0] {
        assert!((laguerre(1, 0.0, x) - (1.0 - x)).abs() < 1e-15);
        let l2 = (x * x - 4.0 * x + 2.0) / 2.0;
        assert!((laguerre(2, 0.0, x) - l2).abs() < 1e-14);
    }
    assert!((laguerre(2, 0.0, 2.0) + 1.0).abs() < 1e-15);
}

#[test]
fn laguerre_at_origin_is_one() {
    for m in 0..300 {
        assert!((laguerre(m, 0.0, 0.0) - 1.0).abs() < 1e-12, "m={m}");
    }
}

#[test]
fn laguerre_matches_explicit_sum_for_small_arguments() {
    for m in 0..12 {
        for &alpha in &[-(m as f64), -1.0, 0.0, 0.5, 3.0, 7.25] {
            for &x in &[0.0, 0.3, 1.0, 2.2, 4.0] {
                let a = laguerre(m, alpha, x);
                let b = laguerre_sum(m, alpha, x);
                assert!((a - b).abs() <= 1e-10 * (1.0 + b.abs()), "m={m} alpha={alpha} x={x}: {a} vs {b}");
            }
        }
    }
}

#[test]
fn hurwitz_reference_values() {
    let z2 = std::f64::consts::PI.powi(2) / 6.0;
    // the Euler-Maclaurin tail stops at B4, leaving ~2e-14 at s = 2
    assert!((hurwitz_zeta(2.0, 1.0).unwrap() - 1.644934066848226).abs() < 1e-13);
    assert!((riemann_zeta(2.0).unwrap() - z2).abs() < 1e-13);
    let z3 = 1.2020569031595942;
    assert!((riemann_zeta(3.0).unwrap() - z3).abs() < 1e-13);
    let z4 = std::f64::consts::PI.powi(4) / 90.0;
    assert!((riemann_zeta(4.0).unwrap() - z4).abs() < 1e-13);
    let shifted = hurwitz_zeta(3.0, 2.0).unwrap();
    assert!((shifted - (hurwitz_zeta(3.0, 1.0).unwrap() - 1.0)).abs() < 1e-14);
}

#[test]
fn hurwitz_matches_brute_force() {
    // Direct sum to 10^6 plus the integral tail estimate.
    for &(s, q) in &[(1.5, 1.0), (2.0, 2.0), (3.0, 4.5), (2.5, 0.3)] {
        let n = 1_000_000usize;
        let mut direct = 0.0;
        for j in (0..n).rev() {
            direct += (j as f64 + q).powf(-s);
        }
        let a: f64 = n as f64 + q;
        direct += a.powf(1.0 - s) / (s - 1.0) + 0.5 * a.powf(-s);
        let z = hurwitz_zeta(s, q).unwrap();
        assert!(((z - direct) / z).abs() < 1e-12, "s={s} q={q}: {z} vs {direct}");
    }
}

#[test]
fn hurwitz_rejects_divergent_arguments() {
    assert!(hurwitz_zeta(1.0, 1.0).is_err());
    assert!(hurwitz_zeta(0.5, 1.0).is_err());
    assert!(hurwitz_zeta(2.0, 0.0).is_err());
    assert!(hurwitz_zeta(2.0, -1.0).is_err());
}

#[test]
fn factorial_ratio_values() {
    assert_eq!(sqrt_factorial_ratio(0, 0), 1.0);
    assert!((sqrt_factorial_ratio(3, 1) - 6f64.sqrt()).abs() < 1e-14);
    let expect = (170.0f64 * 169.0).sqrt();
    assert!((sqrt_factorial_ratio(170, 168) - expect).abs() < 1e-10);
    assert!((sqrt_factorial_ratio(168, 170) - 1.0 / expect).abs() < 1e-16);
    let big = sqrt_factorial_ratio(10_000, 9_900);
    let log: f64 = (9_901..=10_000).map(|k| (k as f64).ln()).sum::<f64>() * 0.5;
    assert!((big.ln() - log).abs() < 1e-10);
}

proptest! {
    #[test]
    fn laguerre_three_term_recurrence(m in 1usize..200, x in -50.0f64..50.0, t in 0.0f64..1.0) {
        // alpha in [-m, 20]
        let alpha = -(m as f64) + t * (20.0 + m as f64);
        let lm1 = laguerre(m - 1, alpha, x);
        let lm = laguerre(m, alpha, x);
        let lp1 = laguerre(m + 1, alpha, x);
        let mf = m as f64;
        let lhs = (mf + 1.0) * lp1;
        let rhs = (2.0 * mf + 1.0 + alpha - x) * lm - (mf + alpha) * lm1;
        let scale = lhs.abs().max(((2.0 * mf + 1.0 + alpha - x) * lm).abs()).max(((mf + alpha) * lm1).abs()).max(1e-300);
        prop_assert!((lhs - rhs).abs() <= 1e-12 * scale);
    }

    #[test]
    fn hurwitz_decreasing_in_q(s in 1.1f64..8.0, q in 0.05f64..50.0, dq in 0.01f64..5.0) {
        prop_assert!(hurwitz_zeta(s, q + dq).unwrap() < hurwitz_zeta(s, q).unwrap());
    }

    #[test]
    fn hurwitz_decreasing_in_s(s in 1.1f64..8.0, q in 1.05f64..50.0, ds in 0.01f64..3.0) {
        prop_assert!(hurwitz_zeta(s + ds, q).unwrap() < hurwitz_zeta(s, q).unwrap());
    }

    #[test]
    fn factorial_ratio_reciprocal(n1 in 0usize..3000, d in 0usize..120) {
        let n2 = n1 + d;
        let p = sqrt_factorial_ratio(n1, n2) * sqrt_factorial_ratio(n2, n1);
        prop_assert!((p - 1.0).abs() < 1e-9);
    }
}

