//! Two-sample estimators: cross-entropy, Kullback–Leibler, Bregman and
//! q-Jensen divergences, and mutual information.
//!
//! Unless stated otherwise, a Mahalanobis metric is fitted on the first
//! (f) sample and applied to both samples, so that both neighbor sets are
//! measured in the same geometry.

use nalgebra::{DMatrix, SymmetricEigen};

use super::{
    check_order, is_one, log_volumes, mean, moment_caveat, note_drops, power_sum_with,
    shannon_with, EstimatorParams, EstimatorResult, PowerSum, Validity,
};
use crate::error::{domain, Error, Result};
use crate::knn::{
    cross_sample_knn_multi, within_sample_knn_multi, Metric, MetricKind, NeighborDistances,
    SearchMethod, MAX_CONDITION,
};
use crate::sample::SampleMatrix;
use crate::special::{digamma_unchecked, ln_c_k};

fn check_dims(f: &SampleMatrix, g: &SampleMatrix) -> Result<()> {
    if f.m() != g.m() {
        return Err(Error::DimensionMismatch {
            expected: f.m(),
            found: g.m(),
        });
    }
    Ok(())
}

fn cross_neighbors(
    queries: &SampleMatrix,
    references: &SampleMatrix,
    k: usize,
    metric: &Metric,
) -> Result<NeighborDistances> {
    check_dims(queries, references)?;
    Ok(
        cross_sample_knn_multi(queries, references, &[k], metric, SearchMethod::Auto)?
            .pop()
            .expect("one order"),
    )
}

fn cross_entropy_with(
    queries: &SampleMatrix,
    references: &SampleMatrix,
    k: usize,
    metric: &Metric,
) -> Result<EstimatorResult> {
    let nd = cross_neighbors(queries, references, k, metric)?;
    let m = queries.m();
    let psi = digamma_unchecked(k as f64);
    let lv = log_volumes(&nd, references.n() as f64, m, metric.ln_ball_volume(m)?);
    let mut res = EstimatorResult::new(f64::NAN, None, k, queries.n(), m);
    note_drops(&mut res, &nd)?;
    res.value = mean(&lv) - psi;
    Ok(res)
}

/// Estimate of the cross-entropy `−∫ f ln g` from a sample of `f` (queries)
/// and a sample of `g` (references).
pub fn cross_entropy(
    queries: &SampleMatrix,
    references: &SampleMatrix,
    k: usize,
    metric: MetricKind,
) -> Result<EstimatorResult> {
    let metric = Metric::fit(metric, queries)?;
    cross_entropy_with(queries, references, k, &metric)
}

/// Kullback–Leibler divergence `K(f, g)` from samples of `f` and `g`,
/// computed in the ratio form `m·mean ln(ρ̌/ρ) + ln(M/(N−1))` over the points
/// that have both neighbors.
pub fn kl_divergence(
    f_sample: &SampleMatrix,
    g_sample: &SampleMatrix,
    k: usize,
    metric: MetricKind,
) -> Result<EstimatorResult> {
    check_dims(f_sample, g_sample)?;
    let metric = Metric::fit(metric, f_sample)?;
    let (n, m) = (f_sample.n(), f_sample.m());
    let within = within_sample_knn_multi(f_sample, &[k], &metric, SearchMethod::Auto)?
        .pop()
        .expect("one order");
    let cross = cross_neighbors(f_sample, g_sample, k, &metric)?;

    let mut res = EstimatorResult::new(f64::NAN, None, k, n, m);
    note_drops(&mut res, &within)?;
    note_drops(&mut res, &cross)?;
    let ratios: Vec<f64> = within
        .rho
        .iter()
        .zip(&cross.rho)
        .filter_map(|(r, c)| match (r, c) {
            (Some(r), Some(c)) => Some((c / r).ln()),
            _ => None,
        })
        .collect();
    if ratios.is_empty() {
        return Err(Error::DegenerateSample(
            "no point has both a within-sample and a cross-sample neighbor".into(),
        ));
    }
    res.dropped_points = n - ratios.len();
    res.value = m as f64 * mean(&ratios) + (g_sample.n() as f64 / (n - 1) as f64).ln();
    Ok(res)
}

/// `K(f, g)` when `g` is known: the Monte Carlo cross-entropy
/// `−mean ln g(X_i)` minus the nearest-neighbor Shannon estimate.
pub fn kl_vs_known_density<G>(
    f_sample: &SampleMatrix,
    log_g: G,
    k: usize,
    metric: MetricKind,
) -> Result<EstimatorResult>
where
    G: Fn(&[f64]) -> f64,
{
    let mut cross = 0.0;
    for (index, x) in f_sample.rows().enumerate() {
        let lg = log_g(x);
        if !lg.is_finite() {
            return Err(Error::SupportViolation { index });
        }
        cross -= lg;
    }
    cross /= f_sample.n() as f64;
    let mut res = shannon_entropy_kind(f_sample, k, metric)?;
    let h = res.value;
    res.value = cross - h;
    res.components.insert("cross_entropy".into(), cross);
    res.components.insert("shannon".into(), h);
    Ok(res)
}

fn shannon_entropy_kind(
    sample: &SampleMatrix,
    k: usize,
    metric: MetricKind,
) -> Result<EstimatorResult> {
    let metric = Metric::fit(metric, sample)?;
    shannon_with(sample, k, &metric)
}

fn cross_validity(q: f64, k: usize, m: usize) -> (Validity, Option<String>) {
    if q > 1.0 {
        let bound = (k as f64 + 2.0) / 2.0;
        if q < bound {
            (Validity::FullyConsistent, None)
        } else {
            (
                Validity::UnbiasedOnly,
                Some(format!(
                    "q = {q} is outside the consistency range (1, {bound}) for k = {k}; \
                     only asymptotic unbiasedness holds (bounded g)"
                )),
            )
        }
    } else if q > 0.0 {
        (Validity::FullyConsistent, Some(moment_caveat(q, m)))
    } else {
        (
            Validity::OutsideGuarantee,
            Some(format!("q = {q} <= 0 is not covered by any guarantee")),
        )
    }
}

fn cross_power_sum(
    f_sample: &SampleMatrix,
    g_sample: &SampleMatrix,
    q: f64,
    k: usize,
    metric: &Metric,
) -> Result<PowerSum> {
    check_order(q)?;
    if is_one(q) {
        return domain("q must differ from 1");
    }
    ln_c_k(k, q)?;
    let nd = cross_neighbors(f_sample, g_sample, k, metric)?;
    let m = f_sample.m();
    let lv = log_volumes(&nd, g_sample.n() as f64, m, metric.ln_ball_volume(m)?);
    let mut res = EstimatorResult::new(f64::NAN, Some(q), k, f_sample.n(), m);
    note_drops(&mut res, &nd)?;
    let mut ps = PowerSum::from_log_volumes(&lv, q, k, f_sample.n(), m)?;
    res.value = ps.result.value;
    let (validity, note) = cross_validity(q, k, m);
    ps.result = res.with_validity(validity, note);
    Ok(ps)
}

/// Estimate of `J_q = ∫ f g^{q−1}` from samples of `f` and `g`.
pub fn cross_iq(
    f_sample: &SampleMatrix,
    g_sample: &SampleMatrix,
    params: &EstimatorParams,
) -> Result<EstimatorResult> {
    check_dims(f_sample, g_sample)?;
    let metric = Metric::fit(params.metric, f_sample)?;
    Ok(cross_power_sum(f_sample, g_sample, params.q, params.k, &metric)?.iq())
}

/// Bregman distance `D_q(f, g) = ∫ [g^q + f^q/(q−1) − q f g^{q−1}/(q−1)]`.
/// All three power sums share one metric, fitted on the f sample.
pub fn bregman_distance(
    f_sample: &SampleMatrix,
    g_sample: &SampleMatrix,
    params: &EstimatorParams,
) -> Result<EstimatorResult> {
    check_dims(f_sample, g_sample)?;
    let q = params.q;
    check_order(q)?;
    if is_one(q) {
        return domain("Bregman distance needs q != 1");
    }
    let metric = Metric::fit(params.metric, f_sample)?;
    let i_f = power_sum_with(f_sample, q, params.k, &metric)?;
    let i_g = power_sum_with(g_sample, q, params.k, &metric)?;
    let j = cross_power_sum(f_sample, g_sample, q, params.k, &metric)?;
    // I_g + (I_f − q J)/(q − 1), rewritten on the excesses over 1
    let value = i_g.excess + (i_f.excess - q * j.excess) / (q - 1.0);
    let mut res = EstimatorResult::new(value, Some(q), params.k, f_sample.n(), f_sample.m());
    res.absorb("iq_f", &i_f.result);
    res.absorb("iq_g", &i_g.result);
    res.absorb("j_q", &j.result);
    Ok(res)
}

/// q-Jensen difference `H*_q(βf + (1−β)g) − βH*_q(f) − (1−β)H*_q(g)` with
/// `β = s/(s+t)` for sample sizes `s` and `t`; the pooled sample stands in
/// for the mixture. Each Rényi entropy uses its own metric.
pub fn jensen_difference(
    f_sample: &SampleMatrix,
    g_sample: &SampleMatrix,
    params: &EstimatorParams,
) -> Result<EstimatorResult> {
    check_dims(f_sample, g_sample)?;
    let (s, t) = (f_sample.n(), g_sample.n());
    if s < 2 || t < 2 {
        return domain(format!(
            "both samples need at least 2 points (got {s} and {t})"
        ));
    }
    let beta = s as f64 / (s + t) as f64;
    let pooled = f_sample.concat(g_sample)?;
    let renyi = |x: &SampleMatrix| -> Result<EstimatorResult> {
        let metric = Metric::fit(params.metric, x)?;
        power_sum_with(x, params.q, params.k, &metric)?.renyi()
    };
    let hp = renyi(&pooled)?;
    let hf = renyi(f_sample)?;
    let hg = renyi(g_sample)?;
    let value = hp.value - beta * hf.value - (1.0 - beta) * hg.value;
    let mut res = EstimatorResult::new(value, Some(params.q), params.k, s, f_sample.m());
    res.absorb("pooled", &hp);
    res.absorb("f", &hf);
    res.absorb("g", &hg);
    res.components.insert("beta".into(), beta);
    Ok(res)
}

fn condition_number(sample: &SampleMatrix) -> Result<f64> {
    let m = sample.m();
    let cov = DMatrix::from_row_slice(m, m, &sample.covariance()?);
    let eig = SymmetricEigen::new(cov).eigenvalues;
    let (max, min) = (eig.max(), eig.min());
    Ok(if min > 0.0 { max / min } else { f64::INFINITY })
}

/// Mutual information `H₁(x) + H₁(y) − H₁(x, y)` between the first `split`
/// coordinates and the rest. Each entropy uses its own metric.
pub fn mutual_information(
    paired: &SampleMatrix,
    split: usize,
    k: usize,
    metric: MetricKind,
) -> Result<EstimatorResult> {
    let m = paired.m();
    if split == 0 || split >= m {
        return domain(format!(
            "split must satisfy 1 <= split < m = {m}, got {split}"
        ));
    }
    let x = paired.columns(0..split)?;
    let y = paired.columns(split..m)?;
    let hx = shannon_entropy_kind(&x, k, metric)?;
    let hy = shannon_entropy_kind(&y, k, metric)?;
    let hxy = shannon_entropy_kind(paired, k, metric)?;
    let mut res = EstimatorResult::new(hx.value + hy.value - hxy.value, None, k, paired.n(), m);
    res.absorb("h_x", &hx);
    res.absorb("h_y", &hy);
    res.absorb("h_joint", &hxy);
    if paired.n() > 1 {
        let cond = condition_number(paired)?;
        if cond >= MAX_CONDITION {
            res = res.with_validity(
                Validity::OutsideGuarantee,
                Some(format!(
                    "joint sample is numerically singular (covariance condition number {cond:.3e}); \
                     the joint density does not exist"
                )),
            );
        }
    }
    Ok(res)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::special::EULER_GAMMA;

    fn pts(v: &[f64]) -> SampleMatrix {
        SampleMatrix::from_scalars(v).unwrap()
    }

    #[test]
    fn cross_entropy_single_query() {
        let h = cross_entropy(&pts(&[0.5]), &pts(&[0.0, 1.0]), 1, MetricKind::Euclidean).unwrap();
        assert!((h.value - (EULER_GAMMA + 2f64.ln())).abs() < 1e-13);
    }

    #[test]
    fn dimension_mismatch_is_reported() {
        let a = pts(&[0.0, 1.0, 2.0]);
        let b = SampleMatrix::from_rows(&[[0.0, 1.0], [1.0, 2.0]]).unwrap();
        assert!(matches!(
            kl_divergence(&a, &b, 1, MetricKind::Euclidean),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn support_violation_carries_index() {
        let s = pts(&[0.2, 0.5, 1.5, 0.7]);
        let log_g = |x: &[f64]| {
            if (0.0..=1.0).contains(&x[0]) {
                0.0
            } else {
                f64::NEG_INFINITY
            }
        };
        match kl_vs_known_density(&s, log_g, 1, MetricKind::Euclidean) {
            Err(Error::SupportViolation { index }) => assert_eq!(index, 2),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn jensen_needs_two_points_each() {
        let p = EstimatorParams::new(2.0, 1);
        assert!(jensen_difference(&pts(&[0.0, 1.0, 2.0]), &pts(&[4.0]), &p).is_err());
    }

    #[test]
    fn mutual_information_split_range() {
        let s = SampleMatrix::from_rows(&[[0.0, 1.0], [1.0, 0.5], [2.0, 3.0]]).unwrap();
        assert!(mutual_information(&s, 0, 1, MetricKind::Euclidean).is_err());
        assert!(mutual_information(&s, 2, 1, MetricKind::Euclidean).is_err());
    }

    #[test]
    fn cross_validity_bound_is_looser() {
        assert_eq!(cross_validity(1.45, 1, 2).0, Validity::FullyConsistent);
        assert_eq!(cross_validity(1.6, 1, 2).0, Validity::UnbiasedOnly);
        assert_eq!(cross_validity(2.4, 3, 2).0, Validity::FullyConsistent);
    }
}
