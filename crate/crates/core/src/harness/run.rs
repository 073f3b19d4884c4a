//! Single estimates on samples read from files.

use serde::Serialize;

use super::config::{DivergenceKind, EstimatorKind};
use crate::error::{domain, Error, Result};
use crate::estimators::{
    bregman_distance, cross_entropy, cross_iq, estimate_iq, jensen_difference, kl_divergence,
    kl_vs_known_density, mutual_information, renyi_entropy, shannon_entropy, sharma_mittal,
    spectrum_s, tsallis_entropy, EstimatorParams, EstimatorResult,
};
use crate::knn::MetricKind;
use crate::reference::ReferenceDistribution;
use crate::sample::SampleMatrix;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EstimateRequest {
    pub estimator: EstimatorKind,
    pub q: Option<f64>,
    pub k: usize,
    pub metric: MetricKind,
    pub s: Option<f64>,
    pub split: Option<usize>,
}

fn need_q(q: Option<f64>, name: &str) -> Result<f64> {
    q.ok_or_else(|| Error::Domain(format!("{name} needs --q")))
}

pub fn run_estimate(x: &SampleMatrix, req: &EstimateRequest) -> Result<EstimatorResult> {
    let name = req.estimator.as_str();
    let params = |q| EstimatorParams::new(q, req.k).with_metric(req.metric);
    match req.estimator {
        EstimatorKind::Iq => estimate_iq(x, &params(need_q(req.q, name)?)),
        EstimatorKind::Tsallis => tsallis_entropy(x, &params(need_q(req.q, name)?)),
        EstimatorKind::Renyi => renyi_entropy(x, &params(need_q(req.q, name)?)),
        EstimatorKind::SharmaMittal => {
            let s = req
                .s
                .ok_or_else(|| Error::Domain("sharma-mittal needs --s".into()))?;
            sharma_mittal(x, &params(need_q(req.q, name)?), s)
        }
        EstimatorKind::Shannon => shannon_entropy(x, req.k, req.metric),
        EstimatorKind::Spectrum => spectrum_s(x, req.k, req.metric),
        EstimatorKind::MutualInformation => {
            let split = req
                .split
                .ok_or_else(|| Error::Domain("mi needs --split".into()))?;
            mutual_information(x, split, req.k, req.metric)
        }
    }
}

pub fn run_divergence(
    f: &SampleMatrix,
    g: &SampleMatrix,
    kind: DivergenceKind,
    q: Option<f64>,
    k: usize,
    metric: MetricKind,
) -> Result<EstimatorResult> {
    let params = || -> Result<EstimatorParams> {
        Ok(EstimatorParams::new(need_q(q, kind.as_str())?, k).with_metric(metric))
    };
    match kind {
        DivergenceKind::Kl => kl_divergence(f, g, k, metric),
        DivergenceKind::CrossEntropy => cross_entropy(f, g, k, metric),
        DivergenceKind::CrossIq => cross_iq(f, g, &params()?),
        DivergenceKind::Bregman => bregman_distance(f, g, &params()?),
        DivergenceKind::Jensen => jensen_difference(f, g, &params()?),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DensityComparison {
    pub dist: String,
    #[serde(flatten)]
    pub result: EstimatorResult,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DensityReport {
    pub estimator: &'static str,
    pub results: Vec<DensityComparison>,
    /// Index into `results` of the smallest divergence.
    pub argmin: usize,
    pub argmin_dist: String,
}

/// `K(f, g)` for each named candidate density `g`.
pub fn kl_against_densities(
    f: &SampleMatrix,
    densities: &[(String, ReferenceDistribution)],
    k: usize,
    metric: MetricKind,
) -> Result<DensityReport> {
    if densities.is_empty() {
        return domain("no candidate densities given");
    }
    let mut results = Vec::with_capacity(densities.len());
    for (spec, dist) in densities {
        if dist.dim() != f.m() {
            return Err(Error::DimensionMismatch {
                expected: f.m(),
                found: dist.dim(),
            });
        }
        let result = kl_vs_known_density(f, |x| dist.log_density(x), k, metric)?;
        results.push(DensityComparison {
            dist: spec.clone(),
            result,
        });
    }
    let argmin = results
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.result.value.total_cmp(&b.1.result.value))
        .map(|(i, _)| i)
        .expect("non-empty");
    Ok(DensityReport {
        estimator: "kl",
        argmin_dist: results[argmin].dist.clone(),
        results,
        argmin,
    })
}
