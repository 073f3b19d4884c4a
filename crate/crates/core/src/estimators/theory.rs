//! Asymptotic variance and leading-order bias of the power-sum estimator.

use std::f64::consts::PI;

use crate::error::{domain, Result};
use crate::special::{ln_gamma_unchecked, ln_unit_ball_volume};

/// Limit of `N·var(Î_{N,k,q})`:
/// `Δ = I_{2q−1} Γ(k+2−2q) Γ(k) / Γ²(k+1−q) − I_q²`.
pub fn variance_limit_delta(k: usize, q: f64, i_q: f64, i_2q_minus_1: f64) -> Result<f64> {
    let kf = k as f64;
    if k == 0 || !q.is_finite() {
        return domain(format!("invalid arguments k = {k}, q = {q}"));
    }
    if 2.0 * q >= kf + 2.0 {
        return domain(format!("variance limit needs 2q < k+2 (q = {q}, k = {k})"));
    }
    let ln_ratio = ln_gamma_unchecked(kf + 2.0 - 2.0 * q) + ln_gamma_unchecked(kf)
        - 2.0 * ln_gamma_unchecked(kf + 1.0 - q);
    Ok(i_2q_minus_1 * ln_ratio.exp() - i_q * i_q)
}

/// `J_β = ∫ f^β Δf` for the density of `N(0, σ² I_m)`.
pub fn normal_laplacian_integral(beta: f64, m: usize, sigma2: f64) -> Result<f64> {
    if !(beta > -1.0) || m == 0 || !(sigma2 > 0.0) {
        return domain(format!(
            "J_beta needs beta > -1, m >= 1, sigma2 > 0 (beta = {beta})"
        ));
    }
    let mf = m as f64;
    Ok(
        -(mf / sigma2) * (2.0 * PI * sigma2).powf(-mf * beta / 2.0) * beta
            / (beta + 1.0).powf(1.0 + mf / 2.0),
    )
}

fn normal_iq(q: f64, m: usize, sigma2: f64) -> f64 {
    let mf = m as f64;
    (2.0 * PI * sigma2).powf(mf * (1.0 - q) / 2.0) * q.powf(-mf / 2.0)
}

/// Leading term of the bias `E Î_{N,k,q} − I_q` for samples from
/// `N(0, σ² I_m)`, with `sigma` the standard deviation.
pub fn bias_approx_normal(m: usize, k: usize, q: f64, n: usize, sigma: f64) -> Result<f64> {
    let (mf, kf, nf) = (m as f64, k as f64, n as f64);
    if m == 0 || k == 0 || n == 0 || !q.is_finite() || !(sigma > 0.0) {
        return domain("bias approximation needs m, k, N >= 1, finite q and sigma > 0");
    }
    if !(q > 0.0) || q >= kf + 1.0 {
        return domain(format!("q must be in (0, k+1) (q = {q}, k = {k})"));
    }
    let s2 = sigma * sigma;
    let iq = normal_iq(q, m, s2);
    match m {
        1 => Ok((q - 1.0) * (2.0 - q) * iq / (2.0 * nf)),
        2 => {
            let j = normal_laplacian_integral(q - 2.0, 2, s2)?;
            Ok((q - 1.0) / nf * ((kf + 1.0 - q) * j / (8.0 * PI) + (2.0 - q) * iq / 2.0))
        }
        _ => {
            let a = kf + 1.0 + 2.0 / mf - q;
            if !(a > 0.0) {
                return domain("need k + 1 + 2/m - q > 0");
            }
            let j = normal_laplacian_integral(q - 1.0 - 2.0 / mf, m, s2)?;
            let d_m = 2.0 * (mf + 2.0) * (2.0 / mf * ln_unit_ball_volume(m)?).exp();
            let gamma_ratio = (ln_gamma_unchecked(a) - ln_gamma_unchecked(kf + 1.0 - q)).exp();
            Ok((q - 1.0) / nf.powf(2.0 / mf) * gamma_ratio / d_m * j)
        }
    }
}
