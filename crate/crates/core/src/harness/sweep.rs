//! Repetition sweeps over `(q, k, N)` grids.
//!
//! Repetition `r` draws its sample from stream `r` of the master seed, and
//! every grid cell with the same `N` reuses those samples. Repetitions run
//! in parallel; each cell is aggregated in repetition order, so the table
//! is the same for any number of workers.

use std::collections::BTreeSet;
use std::fmt::Write as _;

use log::warn;
use rayon::prelude::*;
use serde::Serialize;

use super::config::EstimatorKind;
use crate::error::{domain, Error, Result};
use crate::estimators::{
    bias_approx_normal, power_sum_from_neighbors, shannon_from_neighbors, spectrum_from_neighbors,
    variance_limit_delta, EstimatorResult, Validity,
};
use crate::knn::{within_sample_knn_multi, Metric, MetricKind, SearchMethod};
use crate::reference::{spectrum_closed_form, stream_rng, ReferenceDistribution};

#[derive(Debug, Clone)]
pub struct SweepConfig {
    pub dist: ReferenceDistribution,
    pub estimator: EstimatorKind,
    pub qs: Vec<f64>,
    pub ks: Vec<usize>,
    pub ns: Vec<usize>,
    pub reps: usize,
    pub seed: u64,
    pub metric: MetricKind,
    /// Second order of the Sharma–Mittal entropy.
    pub s: Option<f64>,
}

impl SweepConfig {
    pub fn validate(&self) -> Result<()> {
        if self.reps == 0 {
            return domain("reps must be at least 1");
        }
        if self.ks.is_empty()
            || self.ns.is_empty()
            || (self.estimator.uses_q() && self.qs.is_empty())
        {
            return domain("grids must be non-empty");
        }
        if self.ks.contains(&0) {
            return domain("k must be at least 1");
        }
        if self.estimator == EstimatorKind::MutualInformation {
            return domain("mutual information is not available in sweeps");
        }
        if self.estimator == EstimatorKind::SharmaMittal && self.s.is_none() {
            return domain("sharma-mittal needs s");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub estimator: String,
    pub q: Option<f64>,
    pub k: usize,
    pub n: usize,
    pub mean: f64,
    pub bias: Option<f64>,
    /// Empirical variance with divisor `reps`.
    pub variance: f64,
    /// `N·(bias² + variance)`.
    pub n_mse: Option<f64>,
    pub reps: usize,
    pub truth: Option<f64>,
    pub validity: Validity,
    /// `N·variance / Δ_{k,q}` for the power sum, when `Δ` is known.
    pub delta_ratio: Option<f64>,
    /// Leading bias term of the power sum for isotropic normals.
    pub bias_approx: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResultTable {
    pub rows: Vec<SweepRow>,
}

const HEADER: &str =
    "estimator,q,k,n,mean,bias,variance,n_mse,reps,truth,validity,delta_ratio,bias_approx";

fn opt(v: Option<f64>) -> String {
    v.map(|v| v.to_string()).unwrap_or_default()
}

impl ResultTable {
    pub fn to_csv(&self) -> String {
        let mut out = String::from(HEADER);
        out.push('\n');
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{},{},{},{},{},{},{}",
                r.estimator,
                opt(r.q),
                r.k,
                r.n,
                r.mean,
                opt(r.bias),
                r.variance,
                opt(r.n_mse),
                r.reps,
                opt(r.truth),
                r.validity,
                opt(r.delta_ratio),
                opt(r.bias_approx)
            );
        }
        out
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(&self.rows).map_err(|e| Error::Parse(e.to_string()))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SkippedCell {
    pub q: Option<f64>,
    pub k: usize,
    pub n: Option<usize>,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepReport {
    pub table: ResultTable,
    pub skipped: Vec<SkippedCell>,
}

#[derive(Debug, Clone, Copy)]
struct Cell {
    q: Option<f64>,
    k: usize,
}

fn skip(
    skipped: &mut Vec<SkippedCell>,
    q: Option<f64>,
    k: usize,
    n: Option<usize>,
    reason: String,
) {
    warn!("skipping cell: {reason}");
    skipped.push(SkippedCell { q, k, n, reason });
}

fn estimate_cell(
    cfg: &SweepConfig,
    nd: &crate::knn::NeighborDistances,
    cell: Cell,
    n: usize,
    m: usize,
    ln_ball: f64,
) -> Result<EstimatorResult> {
    match cfg.estimator {
        EstimatorKind::Shannon => shannon_from_neighbors(nd, n, m, ln_ball),
        EstimatorKind::Spectrum => spectrum_from_neighbors(nd, n, m, ln_ball),
        kind => {
            let q = cell.q.expect("order present");
            let ps = power_sum_from_neighbors(nd, q, n, m, ln_ball)?;
            match kind {
                EstimatorKind::Iq => Ok(ps.iq()),
                EstimatorKind::Tsallis => ps.tsallis(),
                EstimatorKind::Renyi => ps.renyi(),
                EstimatorKind::SharmaMittal => ps.sharma_mittal(cfg.s.expect("validated")),
                _ => unreachable!("validated"),
            }
        }
    }
}

type RepOutcome = Vec<Option<(f64, Validity)>>;

fn run_rep(cfg: &SweepConfig, n: usize, rep: usize, cells: &[Cell], ks: &[usize]) -> RepOutcome {
    let outcome = || -> Result<RepOutcome> {
        let x = cfg
            .dist
            .sample_with(n, &mut stream_rng(cfg.seed, rep as u64))?;
        let metric = Metric::fit(cfg.metric, &x)?;
        let m = x.m();
        let ln_ball = metric.ln_ball_volume(m)?;
        let nds = within_sample_knn_multi(&x, ks, &metric, SearchMethod::Auto)?;
        Ok(cells
            .iter()
            .map(|&cell| {
                let nd = &nds[ks.binary_search(&cell.k).expect("k searched")];
                estimate_cell(cfg, nd, cell, n, m, ln_ball)
                    .ok()
                    .map(|r| (r.value, r.validity))
            })
            .collect())
    };
    outcome().unwrap_or_else(|_| vec![None; cells.len()])
}

fn truth(cfg: &SweepConfig, q: Option<f64>) -> Option<f64> {
    let d = &cfg.dist;
    match (cfg.estimator, q) {
        (EstimatorKind::Iq, Some(q)) => d.iq(q).ok(),
        (EstimatorKind::Tsallis, Some(q)) => d.iq(q).ok().map(|i| (1.0 - i) / (q - 1.0)),
        (EstimatorKind::Renyi, Some(q)) => d.renyi(q).ok(),
        (EstimatorKind::SharmaMittal, Some(q)) => {
            let s = cfg.s?;
            d.iq(q)
                .ok()
                .map(|i| (1.0 - i.powf((s - 1.0) / (q - 1.0))) / (s - 1.0))
        }
        (EstimatorKind::Shannon, _) => d.shannon().ok(),
        (EstimatorKind::Spectrum, _) => spectrum_closed_form(d).ok(),
        _ => None,
    }
}

/// Standard deviation of an isotropic normal reference distribution.
fn isotropic_normal_sd(dist: &ReferenceDistribution) -> Option<f64> {
    let ReferenceDistribution::Normal { sigma, .. } = dist else {
        return None;
    };
    let m = sigma.dim();
    let a = sigma.to_row_major();
    let s2 = a[0];
    let iso = (0..m * m).all(|i| {
        if i / m == i % m {
            a[i] == s2
        } else {
            a[i] == 0.0
        }
    });
    iso.then(|| s2.sqrt())
}

/// Runs the sweep on the current rayon pool.
pub fn run_sweep(cfg: &SweepConfig) -> Result<SweepReport> {
    cfg.validate()?;
    let m = cfg.dist.dim();
    let mut skipped = Vec::new();

    let mut cells = Vec::new();
    if cfg.estimator.uses_q() {
        for &q in &cfg.qs {
            for &k in &cfg.ks {
                if q >= k as f64 + 1.0 {
                    skip(
                        &mut skipped,
                        Some(q),
                        k,
                        None,
                        format!("q = {q} >= k+1 with k = {k}"),
                    );
                } else {
                    cells.push(Cell { q: Some(q), k });
                }
            }
        }
    } else {
        cells.extend(cfg.ks.iter().map(|&k| Cell { q: None, k }));
    }

    let mut rows = Vec::new();
    for &n in &cfg.ns {
        let mut too_large = BTreeSet::new();
        let live: Vec<Cell> = cells
            .iter()
            .copied()
            .filter(|c| {
                if c.k >= n {
                    too_large.insert(c.k);
                    false
                } else {
                    true
                }
            })
            .collect();
        for k in too_large {
            skip(
                &mut skipped,
                None,
                k,
                Some(n),
                format!("k = {k} needs more than N = {n} points"),
            );
        }
        if live.is_empty() {
            continue;
        }
        let ks: Vec<usize> = live
            .iter()
            .map(|c| c.k)
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect();
        let outcomes: Vec<RepOutcome> = (0..cfg.reps)
            .into_par_iter()
            .map(|rep| run_rep(cfg, n, rep, &live, &ks))
            .collect();

        for (ci, cell) in live.iter().enumerate() {
            let mut values = Vec::with_capacity(cfg.reps);
            let mut validity = Validity::FullyConsistent;
            for o in &outcomes {
                if let Some((v, val)) = o[ci] {
                    values.push(v);
                    validity = validity.weakest(val);
                }
            }
            if values.is_empty() {
                skip(
                    &mut skipped,
                    cell.q,
                    cell.k,
                    Some(n),
                    format!(
                        "every repetition failed for q = {:?}, k = {}, N = {n}",
                        cell.q, cell.k
                    ),
                );
                continue;
            }
            let r = values.len() as f64;
            let mean = values.iter().sum::<f64>() / r;
            let variance = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / r;
            let truth = truth(cfg, cell.q);
            let bias = truth.map(|t| mean - t);
            let n_mse = bias.map(|b| n as f64 * (b * b + variance));
            let (delta_ratio, bias_approx) = match (cfg.estimator, cell.q) {
                (EstimatorKind::Iq, Some(q)) => {
                    let delta = match (cfg.dist.iq(q), cfg.dist.iq(2.0 * q - 1.0)) {
                        (Ok(iq), Ok(i2)) => variance_limit_delta(cell.k, q, iq, i2).ok(),
                        _ => None,
                    };
                    let approx = isotropic_normal_sd(&cfg.dist)
                        .and_then(|sd| bias_approx_normal(m, cell.k, q, n, sd).ok());
                    (delta.map(|d| n as f64 * variance / d), approx)
                }
                _ => (None, None),
            };
            rows.push(SweepRow {
                estimator: cfg.estimator.as_str().to_string(),
                q: cell.q,
                k: cell.k,
                n,
                mean,
                bias,
                variance,
                n_mse,
                reps: values.len(),
                truth,
                validity,
                delta_ratio,
                bias_approx,
            });
        }
    }
    Ok(SweepReport {
        table: ResultTable { rows },
        skipped,
    })
}
