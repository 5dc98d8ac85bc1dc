//! Direct quadrature of the defining θ-integrals of `F` and `F'`.
//!
//! This path never touches the elliptic reduction; it exists to check it.
//! The integrand is folded about θ = π/2 before integrating:
//!
//! ```text
//! F(s)  =  ∫₀^{π/2} 4cos²θ / (√A √B (√A + √B)) dθ
//! F'(s) = −2 ∫₀^{π/2} cos²θ (A + √(AB) + B) / ((√A + √B) (AB)^{3/2}) dθ
//! A = 2(1 − cos θ) + s,   B = 2(1 + cos θ) + s
//! ```
//!
//! which is algebraically the same integral with a positive integrand, so the
//! cancellation between the two halves of `[0, π]` (severe for large `s`)
//! never happens in floating point.

use std::f64::consts::FRAC_PI_2;

use crate::quadrature::{adaptive_with_breaks, Tolerance};

const TOL: Tolerance = Tolerance {
    abs: 1e-300,
    rel: 1e-13,
    max_intervals: 20_000,
};

fn ab(theta: f64, s: f64) -> (f64, f64, f64) {
    let c = theta.cos();
    let half = (0.5 * theta).sin();
    // 1 - cos θ = 2 sin²(θ/2)
    let a = 4.0 * half * half + s;
    let b = 2.0 * (1.0 + c) + s;
    (c, a, b)
}

fn breaks(s: f64) -> Vec<f64> {
    // the integrand peaks in a layer of width ~√s at θ = 0
    let w = s.sqrt();
    let mut pts = vec![0.0];
    for k in [1.0, 10.0, 100.0] {
        if k * w < 0.5 * FRAC_PI_2 {
            pts.push(k * w);
        }
    }
    pts.push(FRAC_PI_2);
    pts
}

/// `F(s)` by adaptive quadrature.
pub fn f_by_quadrature(s: f64) -> f64 {
    let integrand = |t: f64| {
        let (c, a, b) = ab(t, s);
        let (sa, sb) = (a.sqrt(), b.sqrt());
        4.0 * c * c / (sa * sb * (sa + sb))
    };
    adaptive_with_breaks(integrand, &breaks(s), TOL).value
}

/// `F'(s)` by adaptive quadrature.
pub fn f_prime_by_quadrature(s: f64) -> f64 {
    let integrand = |t: f64| {
        let (c, a, b) = ab(t, s);
        let (sa, sb) = (a.sqrt(), b.sqrt());
        let p = a * b;
        c * c * (a + p.sqrt() + b) / ((sa + sb) * p * p.sqrt())
    };
    -2.0 * adaptive_with_breaks(integrand, &breaks(s), TOL).value
}

/// Unfolded `∫₀^π cos θ (2(1 − cos θ) + s)^{-1/2} dθ`, the literal definition.
/// Accurate only while `F(s)` is not much smaller than `s^{-1/2}`.
pub fn f_by_unfolded_quadrature(s: f64) -> f64 {
    let integrand = |t: f64| {
        let (c, a, _) = ab(t, s);
        c / a.sqrt()
    };
    let mut pts = breaks(s);
    pts.push(std::f64::consts::PI);
    adaptive_with_breaks(integrand, &pts, Tolerance::new(1e-15, 1e-13)).value
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn folded_and_unfolded_agree_for_moderate_s() {
        for &s in &[1e-4, 0.1, 1.0, 10.0] {
            let a = f_by_quadrature(s);
            let b = f_by_unfolded_quadrature(s);
            assert!(((a - b) / a).abs() < 1e-11, "s = {s}: {a} vs {b}");
        }
    }

    #[test]
    fn derivative_oracle_matches_difference_of_value_oracle() {
        let s = 2.0;
        let h = 1e-4;
        let fd = (f_by_quadrature(s + h) - f_by_quadrature(s - h)) / (2.0 * h);
        let fp = f_prime_by_quadrature(s);
        assert!(((fd - fp) / fp).abs() < 1e-7);
    }
}
