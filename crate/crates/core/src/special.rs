//! Scalar special functions and the geometric constants used by the
//! nearest-neighbor estimators: `ln Γ`, digamma, trigamma, the volume of the
//! unit ball and the normalizing constant `C_k`.
//!
//! `ln Γ`, digamma and trigamma shift the argument upward with the usual
//! recurrences and then evaluate an asymptotic (Stirling-type) series. All
//! three reject non-positive arguments.

use std::f64::consts::PI;

use crate::error::{domain, Result};

/// Euler–Mascheroni constant.
pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_8;

/// Below this distance from 1, `C_k` is replaced by its limit `exp(-Ψ(k))`.
pub const Q_ONE_THRESHOLD: f64 = 1e-8;

const LGAMMA_SHIFT: f64 = 15.0;
const POLYGAMMA_SHIFT: f64 = 10.0;

fn check_positive(name: &str, x: f64) -> Result<()> {
    if x.is_nan() || x <= 0.0 {
        return domain(format!("{name} requires x > 0, got {x}"));
    }
    Ok(())
}

fn ln_gamma_stirling(y: f64) -> f64 {
    let r = 1.0 / y;
    let r2 = r * r;
    let series = r
        * (1.0 / 12.0
            + r2 * (-1.0 / 360.0
                + r2 * (1.0 / 1260.0
                    + r2 * (-1.0 / 1680.0
                        + r2 * (1.0 / 1188.0 + r2 * (-691.0 / 360_360.0 + r2 / 156.0))))));
    (y - 0.5) * y.ln() - y + LN_SQRT_2PI + series
}

pub(crate) fn ln_gamma_unchecked(x: f64) -> f64 {
    if x >= LGAMMA_SHIFT {
        return ln_gamma_stirling(x);
    }
    let mut y = x;
    let mut prod = 1.0;
    while y < LGAMMA_SHIFT {
        prod *= y;
        y += 1.0;
    }
    ln_gamma_stirling(y) - prod.ln()
}

/// `ln Γ(x)` for `x > 0`.
pub fn log_gamma(x: f64) -> Result<f64> {
    check_positive("log_gamma", x)?;
    if x.is_infinite() {
        return Ok(f64::INFINITY);
    }
    Ok(ln_gamma_unchecked(x))
}

/// `ln B(a, b) = ln Γ(a) + ln Γ(b) − ln Γ(a + b)`.
pub fn log_beta(a: f64, b: f64) -> Result<f64> {
    Ok(log_gamma(a)? + log_gamma(b)? - log_gamma(a + b)?)
}

pub(crate) fn digamma_unchecked(x: f64) -> f64 {
    let mut y = x;
    let mut acc = 0.0;
    while y < POLYGAMMA_SHIFT {
        acc -= 1.0 / y;
        y += 1.0;
    }
    let r = 1.0 / y;
    let r2 = r * r;
    let series = r2
        * (1.0 / 12.0
            - r2 * (1.0 / 120.0
                - r2 * (1.0 / 252.0
                    - r2 * (1.0 / 240.0
                        - r2 * (1.0 / 132.0 - r2 * (691.0 / 32_760.0 - r2 / 12.0))))));
    acc + y.ln() - 0.5 * r - series
}

/// Digamma `Ψ(x) = Γ'(x)/Γ(x)` for `x > 0`.
pub fn digamma(x: f64) -> Result<f64> {
    check_positive("digamma", x)?;
    Ok(digamma_unchecked(x))
}

pub(crate) fn trigamma_unchecked(x: f64) -> f64 {
    let mut y = x;
    let mut acc = 0.0;
    while y < POLYGAMMA_SHIFT {
        acc += 1.0 / (y * y);
        y += 1.0;
    }
    let r = 1.0 / y;
    let r2 = r * r;
    // 1/y + 1/(2y²) + Σ B_2n / y^(2n+1)
    let series = r
        * r2
        * (1.0 / 6.0
            + r2 * (-1.0 / 30.0
                + r2 * (1.0 / 42.0
                    + r2 * (-1.0 / 30.0
                        + r2 * (5.0 / 66.0 + r2 * (-691.0 / 2730.0 + r2 * 7.0 / 6.0))))));
    acc + r + 0.5 * r2 + series
}

/// Trigamma `Ψ̇(x) = d² ln Γ(x)/dx²` for `x > 0`.
pub fn trigamma(x: f64) -> Result<f64> {
    check_positive("trigamma", x)?;
    Ok(trigamma_unchecked(x))
}

/// `ln V_m`, with `V_m = π^{m/2} / Γ(m/2 + 1)` the volume of the Euclidean unit ball.
pub fn ln_unit_ball_volume(m: usize) -> Result<f64> {
    if m < 1 {
        return domain("unit ball volume requires dimension m >= 1");
    }
    // V_m = V_{m−2} · 2π/m, V_0 = 1, V_1 = 2
    let mut ln_v = if m.is_multiple_of(2) { 0.0 } else { 2f64.ln() };
    for j in ((2 + m % 2)..=m).step_by(2) {
        ln_v += (2.0 * PI / j as f64).ln();
    }
    Ok(ln_v)
}

/// Volume of the Euclidean unit ball in `m` dimensions.
pub fn unit_ball_volume(m: usize) -> Result<f64> {
    ln_unit_ball_volume(m).map(f64::exp)
}

/// `ln C_k` where `C_k = [Γ(k)/Γ(k+1−q)]^{1/(1−q)}`.
///
/// Near `q = 1` the limit `−Ψ(k)` is returned.
pub fn ln_c_k(k: usize, q: f64) -> Result<f64> {
    if k < 1 {
        return domain("neighbor order k must be >= 1");
    }
    if q.is_nan() {
        return domain("q must be a number");
    }
    let kf = k as f64;
    if q >= kf + 1.0 {
        return domain(format!("q must be < k+1 (q = {q}, k = {k})"));
    }
    if (q - 1.0).abs() < Q_ONE_THRESHOLD {
        return Ok(-digamma_unchecked(kf));
    }
    Ok((ln_gamma_unchecked(kf) - ln_gamma_unchecked(kf + 1.0 - q)) / (1.0 - q))
}

/// The constant `C_k` of the power-sum estimator.
pub fn c_k(k: usize, q: f64) -> Result<f64> {
    ln_c_k(k, q).map(f64::exp)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) {
        assert!((a - b).abs() <= tol, "{a} vs {b} (tol {tol})");
    }

    #[test]
    fn log_gamma_known_values() {
        close(log_gamma(1.0).unwrap(), 0.0, 1e-14);
        close(log_gamma(2.0).unwrap(), 0.0, 1e-14);
        close(log_gamma(0.5).unwrap(), 0.5 * PI.ln(), 1e-13);
        close(log_gamma(5.0).unwrap(), 24f64.ln(), 1e-13);
        // Γ(1e-3) ≈ 1/x − γ near zero
        close(log_gamma(1e-3).unwrap(), 6.907_178_885_383_854, 1e-12);
        close(log_gamma(171.0).unwrap(), 706.573_062_245_787_4, 1e-10);
    }

    #[test]
    fn log_gamma_large_argument_is_relatively_accurate() {
        // ln Γ(1e6) = 1e6 ln 1e6 − 1e6 − ½ ln 1e6 + ln √(2π) + 1/(12e6) + ...
        let x = 1e6_f64;
        let expected = (x - 0.5) * x.ln() - x + LN_SQRT_2PI + 1.0 / (12.0 * x);
        let got = log_gamma(x).unwrap();
        assert!(((got - expected) / expected).abs() < 1e-15);
    }

    #[test]
    fn rejects_non_positive_arguments() {
        assert!(log_gamma(0.0).is_err());
        assert!(log_gamma(-1.5).is_err());
        assert!(digamma(0.0).is_err());
        assert!(trigamma(-2.0).is_err());
        assert!(digamma(f64::NAN).is_err());
        assert!(unit_ball_volume(0).is_err());
    }

    #[test]
    fn digamma_known_values() {
        close(digamma(1.0).unwrap(), -EULER_GAMMA, 1e-14);
        close(digamma(2.0).unwrap(), 1.0 - EULER_GAMMA, 1e-14);
        // harmonic-sum oracle for integer arguments
        let h9: f64 = (1..=9).map(|i| 1.0 / i as f64).sum();
        close(digamma(10.0).unwrap(), -EULER_GAMMA + h9, 1e-13);
        close(digamma(10.0).unwrap(), 2.251_752_589_066_721, 1e-10);
        close(digamma(0.5).unwrap(), -EULER_GAMMA - 2.0 * 2f64.ln(), 1e-13);
    }

    #[test]
    fn trigamma_known_values() {
        close(trigamma(1.0).unwrap(), PI * PI / 6.0, 1e-13);
        close(trigamma(2.0).unwrap(), PI * PI / 6.0 - 1.0, 1e-13);
        close(trigamma(0.5).unwrap(), PI * PI / 2.0, 1e-12);
    }

    #[test]
    fn recurrences_hold() {
        let mut x = 0.1;
        while x <= 100.0 {
            close(
                digamma(x + 1.0).unwrap() - digamma(x).unwrap(),
                1.0 / x,
                1e-10,
            );
            close(
                trigamma(x + 1.0).unwrap() - trigamma(x).unwrap(),
                -1.0 / (x * x),
                1e-10,
            );
            close(
                log_gamma(x + 1.0).unwrap() - log_gamma(x).unwrap(),
                x.ln(),
                1e-12,
            );
            x += 0.37;
        }
    }

    #[test]
    fn unit_ball_volumes() {
        close(unit_ball_volume(1).unwrap(), 2.0, 1e-14);
        close(unit_ball_volume(2).unwrap(), PI, 1e-14);
        close(unit_ball_volume(3).unwrap(), 4.0 * PI / 3.0, 1e-14);
        for m in 3..20 {
            let lhs = unit_ball_volume(m).unwrap();
            let rhs = unit_ball_volume(m - 2).unwrap() * 2.0 * PI / m as f64;
            close(lhs / rhs, 1.0, 1e-13);
        }
    }

    #[test]
    fn c_k_values() {
        close(c_k(1, 0.5).unwrap(), 4.0 / PI, 1e-13);
        close(c_k(1, 1.0).unwrap(), EULER_GAMMA.exp(), 1e-13);
        close(c_k(3, 2.0).unwrap(), 0.5, 1e-13);
        assert!(c_k(5, 6.0).is_err());
        assert!(c_k(5, 7.0).is_err());
        assert!(c_k(0, 0.5).is_err());
    }

    #[test]
    fn c_k_is_continuous_at_one() {
        for k in 1..=10 {
            let limit = (-digamma(k as f64).unwrap()).exp();
            for q in [1.0 - 1e-6, 1.0 + 1e-6] {
                assert!(
                    (c_k(k, q).unwrap() - limit).abs() <= 1e-5,
                    "k = {k}, q = {q}"
                );
            }
        }
    }
}
