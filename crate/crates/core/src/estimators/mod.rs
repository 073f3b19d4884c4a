//! Nearest-neighbor estimators of entropies and divergences.
//!
//! The single-sample estimators all start from the per-point log-volumes
//! `ln[(N−1) V ρ_k^m]`, where `V` is the unit-ball volume of the metric:
//!
//! * power sum `Î = mean ζ^{1−q}` with `ζ = (N−1) C_k V ρ_k^m`, estimating `∫f^q`;
//! * Shannon entropy `Ĥ₁ = mean ln ξ` with `ξ = (N−1) e^{−Ψ(k)} V ρ_k^m`;
//! * the information spectrum `Ŝ = var(ln ξ) − Ψ̇(k)`.
//!
//! Points whose k-th neighbor does not exist after discarding zero distances
//! are left out of the averages; the `N − 1` prefactor still uses the full
//! sample size.

mod divergence;
mod result;
mod theory;

pub use divergence::{
    bregman_distance, cross_entropy, cross_iq, jensen_difference, kl_divergence,
    kl_vs_known_density, mutual_information,
};
pub use result::{EstimatorResult, Validity};
pub use theory::{bias_approx_normal, normal_laplacian_integral, variance_limit_delta};

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::knn::{within_sample_knn_multi, Metric, MetricKind, NeighborDistances, SearchMethod};
use crate::sample::SampleMatrix;
use crate::special::{digamma_unchecked, ln_c_k, trigamma_unchecked, Q_ONE_THRESHOLD};

/// Order `q`, neighbor rank `k` and metric for the power-sum family.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EstimatorParams {
    pub q: f64,
    pub k: usize,
    #[serde(default)]
    pub metric: MetricKind,
}

impl EstimatorParams {
    pub fn new(q: f64, k: usize) -> Self {
        Self {
            q,
            k,
            metric: MetricKind::Euclidean,
        }
    }

    pub fn with_metric(mut self, metric: MetricKind) -> Self {
        self.metric = metric;
        self
    }
}

pub(crate) fn check_order(q: f64) -> Result<()> {
    if !q.is_finite() {
        return domain(format!("q must be finite, got {q}"));
    }
    Ok(())
}

pub(crate) fn is_one(q: f64) -> bool {
    (q - 1.0).abs() < Q_ONE_THRESHOLD
}

/// Validity of the within-sample power-sum estimator for `(q, k)`, with an
/// explanatory note when the guarantee is partial or conditional.
pub fn power_sum_validity(q: f64, k: usize, m: usize) -> (Validity, Option<String>) {
    let kf = k as f64;
    if is_one(q) {
        (Validity::FullyConsistent, None)
    } else if q > 1.0 {
        let bound = if k == 1 { 1.5 } else { (kf + 1.0) / 2.0 };
        if q < bound {
            (Validity::FullyConsistent, None)
        } else {
            (
                Validity::UnbiasedOnly,
                Some(format!(
                    "q = {q} is outside the L2-consistency range (1, {bound}) for k = {k}; \
                     only asymptotic unbiasedness holds (bounded f)"
                )),
            )
        }
    } else if q > 0.0 {
        (Validity::FullyConsistent, Some(moment_caveat(q, m)))
    } else {
        (
            Validity::OutsideGuarantee,
            Some(format!(
                "q = {q} <= 0: the power sum is finite only for densities with bounded support"
            )),
        )
    }
}

/// Moment conditions required for `q < 1` when the support is unbounded.
pub(crate) fn moment_caveat(q: f64, m: usize) -> String {
    let mf = m as f64;
    let unbiased = mf * (1.0 - q) / q;
    let l2 = if q > 0.5 {
        format!(
            "r_c(f) > {:.4} for L2 convergence",
            2.0 * mf * (1.0 - q) / (2.0 * q - 1.0)
        )
    } else {
        "no L2 guarantee since q <= 1/2".to_string()
    };
    format!(
        "q < 1 with unbounded support requires finite moments E|X|^r for r up to the critical \
         order r_c(f): r_c(f) > {unbiased:.4} for asymptotic unbiasedness, {l2}"
    )
}

/// Log-volumes `ln count + ln V + m ln ρ_i` of the retained points.
pub(crate) fn log_volumes(nd: &NeighborDistances, count: f64, m: usize, ln_ball: f64) -> Vec<f64> {
    let base = count.ln() + ln_ball;
    let mf = m as f64;
    nd.retained().map(|(_, r)| base + mf * r.ln()).collect()
}

pub(crate) fn note_drops(res: &mut EstimatorResult, nd: &NeighborDistances) -> Result<()> {
    let flagged = nd.flagged_count();
    if flagged == nd.len() {
        return Err(Error::DegenerateSample(format!(
            "no point has {} neighbors at nonzero distance",
            nd.k
        )));
    }
    res.dropped_points += flagged;
    if flagged > 0 {
        res.warn(format!(
            "{flagged} of {} points have fewer than {} neighbors at nonzero distance and were excluded",
            nd.len(),
            nd.k
        ));
    }
    let zeros = nd.total_zero_drops();
    if zeros > 0 {
        res.warn(format!(
            "{zeros} zero distances between coincident points were ignored"
        ));
    }
    Ok(())
}

pub(crate) fn mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}

/// `ζ_i = (N−1) C_k V ρ_i^m` for every point (`None` for dropped points).
pub fn zeta_values(
    rho: &NeighborDistances,
    q: f64,
    n: usize,
    m: usize,
    ball_volume: f64,
) -> Result<Vec<Option<f64>>> {
    check_order(q)?;
    if !(ball_volume > 0.0) {
        return domain("ball volume must be positive");
    }
    let ln_c = ln_c_k(rho.k, q)?;
    let base = ((n - 1) as f64).ln() + ln_c + ball_volume.ln();
    let mf = m as f64;
    Ok(rho
        .rho
        .iter()
        .map(|r| r.map(|r| (base + mf * r.ln()).exp()))
        .collect())
}

/// Power-sum estimate `Î` kept together with `Î − 1`, which carries the
/// precision needed near `q = 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct PowerSum {
    result: EstimatorResult,
    excess: f64,
}

impl PowerSum {
    /// Builds the power sum from log-volumes; `count` is `N − 1` within a
    /// sample and `M` across samples.
    pub(crate) fn from_log_volumes(
        log_vol: &[f64],
        q: f64,
        k: usize,
        n: usize,
        m: usize,
    ) -> Result<Self> {
        let ln_c = ln_c_k(k, q)?;
        let count = log_vol.len() as f64;
        let (mut direct, mut excess) = (0.0, 0.0);
        for lv in log_vol {
            let e = (1.0 - q) * (lv + ln_c);
            direct += e.exp();
            excess += e.exp_m1();
        }
        // the direct mean stays accurate when Î is far from 1
        Ok(Self {
            result: EstimatorResult::new(direct / count, Some(q), k, n, m),
            excess: excess / count,
        })
    }

    pub fn q(&self) -> f64 {
        self.result.q.expect("power sum has an order")
    }

    fn ln_iq(&self) -> f64 {
        if self.excess.abs() < 0.5 {
            self.excess.ln_1p()
        } else {
            self.result.value.ln()
        }
    }

    /// `Î`, estimating `I_q = ∫ f^q`.
    pub fn iq(&self) -> EstimatorResult {
        self.result.clone()
    }

    /// Tsallis entropy `(1 − Î)/(q − 1)`.
    pub fn tsallis(&self) -> Result<EstimatorResult> {
        let q = self.q();
        if is_one(q) {
            return domain("Tsallis estimator needs q != 1; use the Shannon estimator");
        }
        let mut r = self.result.clone();
        r.value = -self.excess / (q - 1.0);
        Ok(r)
    }

    /// Rényi entropy `ln Î / (1 − q)`.
    pub fn renyi(&self) -> Result<EstimatorResult> {
        let q = self.q();
        if is_one(q) {
            return domain("Rényi estimator needs q != 1; use the Shannon estimator");
        }
        if !(self.result.value > 0.0) {
            return Err(Error::DegenerateSample("power sum is not positive".into()));
        }
        let mut r = self.result.clone();
        r.value = self.ln_iq() / (1.0 - q);
        Ok(r)
    }

    /// Sharma–Mittal entropy `[1 − Î^{(s−1)/(q−1)}]/(s − 1)`.
    pub fn sharma_mittal(&self, s: f64) -> Result<EstimatorResult> {
        let q = self.q();
        check_order(s)?;
        if is_one(q) || is_one(s) {
            return domain("Sharma-Mittal estimator needs q != 1 and s != 1");
        }
        if !(self.result.value > 0.0) {
            return Err(Error::DegenerateSample("power sum is not positive".into()));
        }
        let mut r = self.result.clone();
        let expo = (s - 1.0) / (q - 1.0) * self.ln_iq();
        r.value = -expo.exp_m1() / (s - 1.0);
        r.components.insert("s".into(), s);
        Ok(r)
    }
}

/// Tsallis entropy for a given value of `I_q`.
pub fn tsallis_from_iq(iq: f64, q: f64) -> Result<f64> {
    if is_one(q) {
        return domain("q must differ from 1");
    }
    Ok((1.0 - iq) / (q - 1.0))
}

/// Rényi entropy for a given value of `I_q`.
pub fn renyi_from_iq(iq: f64, q: f64) -> Result<f64> {
    if is_one(q) {
        return domain("q must differ from 1");
    }
    if !(iq > 0.0) {
        return domain("I_q must be positive");
    }
    Ok(iq.ln() / (1.0 - q))
}

/// Sharma–Mittal entropy for a given value of `I_q`.
pub fn sharma_mittal_from_iq(iq: f64, q: f64, s: f64) -> Result<f64> {
    if is_one(q) || is_one(s) {
        return domain("q and s must differ from 1");
    }
    if !(iq > 0.0) {
        return domain("I_q must be positive");
    }
    Ok((1.0 - iq.powf((s - 1.0) / (q - 1.0))) / (s - 1.0))
}

/// Power sum from precomputed within-sample neighbor distances of an
/// `n`-point sample.
pub fn power_sum_from_neighbors(
    nd: &NeighborDistances,
    q: f64,
    n: usize,
    m: usize,
    ln_ball_volume: f64,
) -> Result<PowerSum> {
    check_order(q)?;
    ln_c_k(nd.k, q)?;
    let lv = log_volumes(nd, (n - 1) as f64, m, ln_ball_volume);
    let mut ps = if lv.is_empty() {
        // let note_drops report the degenerate sample
        PowerSum {
            result: EstimatorResult::new(f64::NAN, Some(q), nd.k, n, m),
            excess: f64::NAN,
        }
    } else {
        PowerSum::from_log_volumes(&lv, q, nd.k, n, m)?
    };
    note_drops(&mut ps.result, nd)?;
    let (validity, note) = power_sum_validity(q, nd.k, m);
    ps.result = ps.result.with_validity(validity, note);
    Ok(ps)
}

/// `ln ξ_i = ln(N−1) − Ψ(k) + ln V + m ln ρ_i` of the retained points.
pub fn log_xi_values(nd: &NeighborDistances, n: usize, m: usize, ln_ball_volume: f64) -> Vec<f64> {
    let psi = digamma_unchecked(nd.k as f64);
    log_volumes(nd, (n - 1) as f64, m, ln_ball_volume)
        .into_iter()
        .map(|lv| lv - psi)
        .collect()
}

/// Shannon entropy from precomputed within-sample neighbor distances.
pub fn shannon_from_neighbors(
    nd: &NeighborDistances,
    n: usize,
    m: usize,
    ln_ball_volume: f64,
) -> Result<EstimatorResult> {
    let xi = log_xi_values(nd, n, m, ln_ball_volume);
    let mut res = EstimatorResult::new(f64::NAN, None, nd.k, n, m);
    note_drops(&mut res, nd)?;
    res.value = mean(&xi);
    Ok(res)
}

/// Information spectrum `Ŝ` from precomputed within-sample neighbor distances.
pub fn spectrum_from_neighbors(
    nd: &NeighborDistances,
    n: usize,
    m: usize,
    ln_ball_volume: f64,
) -> Result<EstimatorResult> {
    if n < 3 {
        return domain("spectrum estimator needs at least 3 points");
    }
    let xi = log_xi_values(nd, n, m, ln_ball_volume);
    let mut res = EstimatorResult::new(f64::NAN, None, nd.k, n, m);
    note_drops(&mut res, nd)?;
    let h = mean(&xi);
    let var = xi.iter().map(|v| (v - h) * (v - h)).sum::<f64>() / xi.len() as f64;
    res.value = var - trigamma_unchecked(nd.k as f64);
    res.components.insert("shannon".into(), h);
    res.validity = Validity::UnbiasedOnly;
    if res.value < 0.0 {
        res.warn("spectrum estimate is negative (small-sample effect); reported unclamped");
    }
    Ok(res)
}

struct Within {
    nd: NeighborDistances,
    n: usize,
    m: usize,
    ln_ball: f64,
}

fn within(sample: &SampleMatrix, k: usize, metric: &Metric) -> Result<Within> {
    let nd = within_sample_knn_multi(sample, &[k], metric, SearchMethod::Auto)?
        .pop()
        .expect("one order");
    Ok(Within {
        nd,
        n: sample.n(),
        m: sample.m(),
        ln_ball: metric.ln_ball_volume(sample.m())?,
    })
}

pub(crate) fn power_sum_with(
    sample: &SampleMatrix,
    q: f64,
    k: usize,
    metric: &Metric,
) -> Result<PowerSum> {
    check_order(q)?;
    ln_c_k(k, q)?;
    let w = within(sample, k, metric)?;
    power_sum_from_neighbors(&w.nd, q, w.n, w.m, w.ln_ball)
}

pub(crate) fn shannon_with(
    sample: &SampleMatrix,
    k: usize,
    metric: &Metric,
) -> Result<EstimatorResult> {
    let w = within(sample, k, metric)?;
    shannon_from_neighbors(&w.nd, w.n, w.m, w.ln_ball)
}

/// Power-sum estimate `Î_{N,k,q}` of `I_q = ∫ f^q`.
pub fn estimate_iq(sample: &SampleMatrix, params: &EstimatorParams) -> Result<EstimatorResult> {
    let metric = Metric::fit(params.metric, sample)?;
    Ok(power_sum_with(sample, params.q, params.k, &metric)?.iq())
}

/// Tsallis (Havrda–Charvát) entropy estimate.
pub fn tsallis_entropy(sample: &SampleMatrix, params: &EstimatorParams) -> Result<EstimatorResult> {
    let metric = Metric::fit(params.metric, sample)?;
    power_sum_with(sample, params.q, params.k, &metric)?.tsallis()
}

/// Rényi entropy estimate.
pub fn renyi_entropy(sample: &SampleMatrix, params: &EstimatorParams) -> Result<EstimatorResult> {
    let metric = Metric::fit(params.metric, sample)?;
    power_sum_with(sample, params.q, params.k, &metric)?.renyi()
}

/// Sharma–Mittal entropy estimate with second order `s`.
pub fn sharma_mittal(
    sample: &SampleMatrix,
    params: &EstimatorParams,
    s: f64,
) -> Result<EstimatorResult> {
    let metric = Metric::fit(params.metric, sample)?;
    power_sum_with(sample, params.q, params.k, &metric)?.sharma_mittal(s)
}

/// Shannon entropy estimate `Ĥ_{N,k,1}`.
pub fn shannon_entropy(
    sample: &SampleMatrix,
    k: usize,
    metric: MetricKind,
) -> Result<EstimatorResult> {
    let metric = Metric::fit(metric, sample)?;
    shannon_with(sample, k, &metric)
}

/// Estimate of `S(f) = var[ln f(X)]`.
pub fn spectrum_s(sample: &SampleMatrix, k: usize, metric: MetricKind) -> Result<EstimatorResult> {
    let metric = Metric::fit(metric, sample)?;
    let w = within(sample, k, &metric)?;
    spectrum_from_neighbors(&w.nd, w.n, w.m, w.ln_ball)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::knn::within_sample_knn;
    use crate::special::EULER_GAMMA;
    use std::f64::consts::PI;

    fn two_points() -> SampleMatrix {
        SampleMatrix::from_scalars(&[0.0, 1.0]).unwrap()
    }

    #[test]
    fn zeta_for_two_points() {
        let nd = within_sample_knn(&two_points(), 1, &Metric::Euclidean).unwrap();
        let z = zeta_values(&nd, 0.5, 2, 1, 2.0).unwrap();
        for zi in z {
            assert!((zi.unwrap() - 8.0 / PI).abs() < 1e-13);
        }
    }

    #[test]
    fn shannon_for_two_points() {
        let h = shannon_entropy(&two_points(), 1, MetricKind::Euclidean).unwrap();
        assert!((h.value - (EULER_GAMMA + 2f64.ln())).abs() < 1e-13);
        assert_eq!(h.q, None);
    }

    #[test]
    fn transforms_of_iq() {
        assert!((tsallis_from_iq(0.5, 2.0).unwrap() - 0.5).abs() < 1e-15);
        assert!((sharma_mittal_from_iq(0.25, 2.0, 3.0).unwrap() - 0.46875).abs() < 1e-15);
        assert_eq!(sharma_mittal_from_iq(1.0, 2.5, 0.3).unwrap(), 0.0);
        assert!(renyi_from_iq(0.0, 2.0).is_err());
        assert!(tsallis_from_iq(0.5, 1.0).is_err());
    }

    #[test]
    fn q_at_or_above_k_plus_one_is_rejected() {
        let s = SampleMatrix::from_scalars(&[0.0, 1.0, 3.0, 7.0, 8.5, 9.0, 11.0]).unwrap();
        let err = renyi_entropy(&s, &EstimatorParams::new(7.0, 5)).unwrap_err();
        assert!(err.to_string().contains("q must be < k+1"), "{err}");
        assert!(estimate_iq(&s, &EstimatorParams::new(6.0, 5)).is_err());
        assert!(estimate_iq(&s, &EstimatorParams::new(f64::NAN, 5)).is_err());
    }

    #[test]
    fn validity_ranges() {
        assert_eq!(power_sum_validity(1.6, 1, 3).0, Validity::UnbiasedOnly);
        assert_eq!(power_sum_validity(1.4, 1, 3).0, Validity::FullyConsistent);
        assert_eq!(power_sum_validity(2.9, 5, 3).0, Validity::FullyConsistent);
        assert_eq!(power_sum_validity(3.0, 5, 3).0, Validity::UnbiasedOnly);
        let (v, note) = power_sum_validity(0.75, 3, 3);
        assert_eq!(v, Validity::FullyConsistent);
        assert!(note.unwrap().contains("r_c(f) > 1.0000"));
        assert_eq!(power_sum_validity(-0.5, 3, 3).0, Validity::OutsideGuarantee);
    }

    #[test]
    fn duplicates_are_excluded_from_the_average() {
        let s = SampleMatrix::from_scalars(&[0.0, 0.0, 0.0, 1.0, 3.0, 4.5]).unwrap();
        // the three zeros have only three neighbors at nonzero distance
        let r = shannon_entropy(&s, 4, MetricKind::Euclidean).unwrap();
        assert_eq!(r.dropped_points, 3);
        assert!(r.warnings.iter().any(|w| w.contains("excluded")));
        assert!(r.warnings.iter().any(|w| w.contains("zero distances")));
        let all_same = SampleMatrix::from_scalars(&[2.0, 2.0, 2.0]).unwrap();
        assert!(matches!(
            shannon_entropy(&all_same, 1, MetricKind::Euclidean),
            Err(Error::DegenerateSample(_))
        ));
    }

    #[test]
    fn spectrum_needs_three_points() {
        assert!(spectrum_s(&two_points(), 1, MetricKind::Euclidean).is_err());
    }
}
