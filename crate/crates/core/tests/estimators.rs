//! Estimator identities, invariances and comparisons against quadrature.

mod common;

use std::f64::consts::PI;

use knn_entropy::estimators::{
    bregman_distance, cross_entropy, cross_iq, estimate_iq, jensen_difference, kl_divergence,
    mutual_information, normal_laplacian_integral, renyi_entropy, shannon_entropy, sharma_mittal,
    spectrum_s, tsallis_entropy, variance_limit_delta, zeta_values,
};
use knn_entropy::knn::within_sample_knn;
use knn_entropy::reference::{normal_iq, SpdMatrix};
use knn_entropy::special::unit_ball_volume;
use knn_entropy::{
    EstimatorParams, Metric, MetricKind, ReferenceDistribution, SampleMatrix, Validity,
};
use proptest::prelude::*;

use common::{integrate, integrate_2d, mean, rel_close, truncation};

fn points(max_n: usize) -> impl Strategy<Value = SampleMatrix> {
    (1usize..=3, 12..=max_n).prop_flat_map(|(m, n)| {
        prop::collection::vec(-20.0..20.0f64, n * m)
            .prop_map(move |v| SampleMatrix::new(v, m).unwrap())
    })
}

fn std_normal_pdf(x: f64) -> f64 {
    (-0.5 * x * x).exp() / (2.0 * PI).sqrt()
}

fn normal_pdf(x: f64, mu: f64) -> f64 {
    std_normal_pdf(x - mu)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn power_sum_scales_with_volume(x in points(60), q in 0.2..3.5f64, a in 0.05..20.0f64, k in 1usize..4) {
        prop_assume!((q - 1.0).abs() > 1e-3 && q < k as f64 + 1.0);
        let p = EstimatorParams::new(q, k);
        let base = estimate_iq(&x, &p).unwrap().value;
        let scaled = estimate_iq(&x.scaled(a), &p).unwrap().value;
        prop_assert!(rel_close(scaled, a.powf(x.m() as f64 * (1.0 - q)) * base, 1e-12));
    }

    #[test]
    fn shannon_and_spectrum_under_scaling(x in points(60), a in 0.05..20.0f64, k in 1usize..4) {
        let m = x.m() as f64;
        let h = shannon_entropy(&x, k, MetricKind::Euclidean).unwrap().value;
        let hs = shannon_entropy(&x.scaled(a), k, MetricKind::Euclidean).unwrap().value;
        prop_assert!((hs - h - m * a.ln()).abs() <= 1e-12 * (1.0 + h.abs() + hs.abs()));
        let s = spectrum_s(&x, k, MetricKind::Euclidean).unwrap().value;
        let ss = spectrum_s(&x.scaled(a), k, MetricKind::Euclidean).unwrap().value;
        prop_assert!((s - ss).abs() <= 1e-9 * (1.0 + s.abs()));
    }

    #[test]
    fn renyi_and_tsallis_agree(x in points(60), q in 0.2..3.5f64, k in 1usize..4) {
        prop_assume!((q - 1.0).abs() > 1e-3 && q < k as f64 + 1.0);
        let p = EstimatorParams::new(q, k);
        let t = tsallis_entropy(&x, &p).unwrap().value;
        let r = renyi_entropy(&x, &p).unwrap().value;
        // both sides equal Î − 1
        let lhs = (1.0 - q) * t;
        let rhs = ((1.0 - q) * r).exp_m1();
        prop_assert!((lhs - rhs).abs() <= 1e-12 * (1.0 + lhs.abs()));
    }

    #[test]
    fn sharma_mittal_at_s_equal_q_is_tsallis(x in points(60), q in 0.2..3.5f64, k in 1usize..4) {
        prop_assume!((q - 1.0).abs() > 1e-3 && q < k as f64 + 1.0);
        let p = EstimatorParams::new(q, k);
        let sm = sharma_mittal(&x, &p, q).unwrap().value;
        let t = tsallis_entropy(&x, &p).unwrap().value;
        prop_assert!((sm - t).abs() <= 1e-12 * (1.0 + t.abs()));
    }

    #[test]
    fn renyi_continuous_at_one(x in points(60), k in 1usize..4) {
        let h = shannon_entropy(&x, k, MetricKind::Euclidean).unwrap().value;
        for q in [1.0 - 1e-7, 1.0 + 1e-7] {
            let r = renyi_entropy(&x, &EstimatorParams::new(q, k)).unwrap().value;
            prop_assert!((r - h).abs() <= 1e-4 * (1.0 + h.abs()));
        }
    }

    #[test]
    fn kl_ratio_form_equals_entropy_difference(x in points(50), y in points(50), k in 1usize..4) {
        prop_assume!(x.m() == y.m());
        let kl = kl_divergence(&x, &y, k, MetricKind::Euclidean).unwrap();
        prop_assume!(kl.dropped_points == 0);
        let cross = cross_entropy(&x, &y, k, MetricKind::Euclidean).unwrap().value;
        let own = shannon_entropy(&x, k, MetricKind::Euclidean).unwrap().value;
        prop_assert!((kl.value - (cross - own)).abs() <= 1e-12 * (1.0 + cross.abs() + own.abs()));
    }

    #[test]
    fn mahalanobis_determinant_law(
        x in points(60),
        lin in prop::collection::vec(-1.0..1.0f64, 9),
        shift in prop::collection::vec(-5.0..5.0f64, 3),
        q in 0.3..2.5f64,
    ) {
        let m = x.m();
        let mut a = lin[..m * m].to_vec();
        for i in 0..m {
            a[i * m + i] += 2.5;
        }
        let det = match m {
            1 => a[0],
            2 => a[0] * a[3] - a[1] * a[2],
            _ => a[0] * (a[4] * a[8] - a[5] * a[7]) - a[1] * (a[3] * a[8] - a[5] * a[6])
                + a[2] * (a[3] * a[7] - a[4] * a[6]),
        };
        let y = x.affine(&a, &shift[..m]).unwrap();
        let k = 3;
        prop_assume!((q - 1.0).abs() > 1e-3);
        let h = shannon_entropy(&x, k, MetricKind::Mahalanobis).unwrap().value;
        let hy = shannon_entropy(&y, k, MetricKind::Mahalanobis).unwrap().value;
        prop_assert!((hy - h - det.abs().ln()).abs() <= 1e-8 * (1.0 + h.abs()));
        let p = EstimatorParams::new(q, k).with_metric(MetricKind::Mahalanobis);
        let i = estimate_iq(&x, &p).unwrap().value;
        let iy = estimate_iq(&y, &p).unwrap().value;
        prop_assert!(rel_close(iy, det.abs().powf(1.0 - q) * i, 1e-8));
    }
}

#[test]
fn uniform_power_sum_is_near_one() {
    let x = ReferenceDistribution::uniform_cube(1)
        .unwrap()
        .sample(20_000, 1)
        .unwrap();
    for q in [0.5, 2.0] {
        let v = estimate_iq(&x, &EstimatorParams::new(q, 3)).unwrap().value;
        assert!((v - 1.0).abs() < 0.02, "q = {q}: {v}");
    }
}

#[test]
fn normal_quadratic_power_sum() {
    let x = ReferenceDistribution::standard_normal(1)
        .sample(20_000, 2)
        .unwrap();
    let truth = integrate(|t| std_normal_pdf(t).powi(2), -12.0, 12.0, 1e-12);
    assert!((truth - 0.5 / PI.sqrt()).abs() < 1e-10);
    let v = estimate_iq(&x, &EstimatorParams::new(2.0, 4))
        .unwrap()
        .value;
    assert!((v - truth).abs() < 0.01, "{v} vs {truth}");
}

#[test]
fn cross_entropy_of_matching_samples_is_shannon() {
    let d = ReferenceDistribution::standard_normal(2);
    let f = d.sample(8000, 3).unwrap();
    let g = d.sample(8000, 4).unwrap();
    let h = cross_entropy(&f, &g, 5, MetricKind::Euclidean)
        .unwrap()
        .value;
    let truth = 1.0 + (2.0 * PI).ln();
    assert!((h - truth).abs() < 0.05, "{h} vs {truth}");
}

#[test]
fn cross_power_sum_matches_quadrature() {
    let f = ReferenceDistribution::standard_normal(1)
        .sample(10_000, 5)
        .unwrap();
    let gd = ReferenceDistribution::normal(vec![0.5], SpdMatrix::identity(1)).unwrap();
    let g = gd.sample(10_000, 6).unwrap();
    let truth = integrate(
        |t| std_normal_pdf(t) * normal_pdf(t, 0.5),
        -12.0,
        12.0,
        1e-12,
    );
    let v = cross_iq(&f, &g, &EstimatorParams::new(2.0, 4))
        .unwrap()
        .value;
    assert!((v - truth).abs() < 0.01, "{v} vs {truth}");
}

#[test]
fn bregman_quadratic_is_squared_l2() {
    // at q = 2 the Bregman distance is ∫ (f − g)²
    let gd = ReferenceDistribution::normal(vec![1.0], SpdMatrix::identity(1)).unwrap();
    let truth = integrate(
        |t| (std_normal_pdf(t) - normal_pdf(t, 1.0)).powi(2),
        -14.0,
        14.0,
        1e-12,
    );
    let est: Vec<f64> = (0..4)
        .map(|r| {
            let f = ReferenceDistribution::standard_normal(1)
                .sample(10_000, 10 + r)
                .unwrap();
            let g = gd.sample(10_000, 20 + r).unwrap();
            bregman_distance(&f, &g, &EstimatorParams::new(2.0, 5))
                .unwrap()
                .value
        })
        .collect();
    let v = mean(&est);
    assert!(v > 0.0);
    assert!((v - truth).abs() < 0.01, "{v} vs {truth}");
}

#[test]
fn jensen_difference_matches_quadrature() {
    let q = 2.0;
    let mix = |t: f64| 0.5 * std_normal_pdf(t) + 0.5 * normal_pdf(t, 2.0);
    let h_mix = -integrate(|t| mix(t).powi(2), -14.0, 16.0, 1e-12).ln();
    let h_one = -integrate(|t| std_normal_pdf(t).powi(2), -14.0, 14.0, 1e-12).ln();
    let truth = h_mix - h_one;
    let gd = ReferenceDistribution::normal(vec![2.0], SpdMatrix::identity(1)).unwrap();
    let est: Vec<f64> = (0..4)
        .map(|r| {
            let f = ReferenceDistribution::standard_normal(1)
                .sample(8000, 30 + r)
                .unwrap();
            let g = gd.sample(8000, 40 + r).unwrap();
            let res = jensen_difference(&f, &g, &EstimatorParams::new(q, 5)).unwrap();
            assert_eq!(res.components["beta"], 0.5);
            res.value
        })
        .collect();
    let v = mean(&est);
    assert!((v - truth).abs() < 0.03, "{v} vs {truth}");
}

#[test]
fn mutual_information_of_duplicated_coordinate_is_flagged() {
    let x = ReferenceDistribution::standard_normal(1)
        .sample(500, 7)
        .unwrap();
    let rows: Vec<[f64; 2]> = x.rows().map(|r| [r[0], r[0]]).collect();
    let paired = SampleMatrix::from_rows(&rows).unwrap();
    let res = mutual_information(&paired, 1, 3, MetricKind::Euclidean).unwrap();
    assert_eq!(res.validity, Validity::OutsideGuarantee);
    assert!(!res.warnings.is_empty());
}

#[test]
fn independent_blocks_have_small_information() {
    let x = ReferenceDistribution::standard_normal(3)
        .sample(5000, 8)
        .unwrap();
    let res = mutual_information(&x, 1, 5, MetricKind::Euclidean).unwrap();
    assert!(res.value.abs() < 0.05, "{}", res.value);
    assert_eq!(res.validity, Validity::FullyConsistent);
}

#[test]
fn per_point_second_moment_matches_delta() {
    // Δ is the variance of a single term ζ^{1−q}
    let (q, k, n) = (1.25, 3, 20_000);
    let one = SpdMatrix::identity(1);
    let iq = normal_iq(&one, q).unwrap();
    let delta = variance_limit_delta(k, q, iq, normal_iq(&one, 2.0 * q - 1.0).unwrap()).unwrap();
    let mut terms = Vec::new();
    for seed in 0..5 {
        let x = ReferenceDistribution::standard_normal(1)
            .sample(n, 50 + seed)
            .unwrap();
        let nd = within_sample_knn(&x, k, &Metric::Euclidean).unwrap();
        let zeta = zeta_values(&nd, q, n, 1, unit_ball_volume(1).unwrap()).unwrap();
        terms.extend(
            zeta.into_iter()
                .flatten()
                .map(|z| (z.powf(1.0 - q) - iq).powi(2)),
        );
    }
    let moment = mean(&terms);
    assert!((moment / delta - 1.0).abs() < 0.05, "{moment} vs {delta}");
}

fn laplacian_oracle(beta: f64, m: usize, s2: f64) -> f64 {
    let pdf = |r2: f64| (2.0 * PI * s2).powf(-(m as f64) / 2.0) * (-r2 / (2.0 * s2)).exp();
    let lap = |r2: f64| pdf(r2) * (r2 / (s2 * s2) - m as f64 / s2);
    let lim = truncation(|r| pdf(r * r).powf(1.0 + beta));
    match m {
        1 => integrate(|t| pdf(t * t).powf(beta) * lap(t * t), -lim, lim, 1e-13),
        _ => integrate_2d(
            |a, b| pdf(a * a + b * b).powf(beta) * lap(a * a + b * b),
            (-lim, lim),
            (-lim, lim),
            1e-12,
        ),
    }
}

#[test]
fn laplacian_integral_matches_quadrature() {
    for (beta, m, s2) in [
        (0.5, 1, 1.0),
        (-0.5, 1, 2.0),
        (1.5, 1, 0.7),
        (0.25, 2, 1.0),
        (-0.5, 2, 1.5),
    ] {
        let closed = normal_laplacian_integral(beta, m, s2).unwrap();
        let quad = laplacian_oracle(beta, m, s2);
        assert!(
            (closed - quad).abs() < 1e-7 * (1.0 + quad.abs()),
            "beta {beta}, m {m}: {closed} vs {quad}"
        );
    }
}
