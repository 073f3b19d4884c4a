//! Entropy estimates along a family of mixtures `β·T(5, (3/5)I₃, 0) + (1−β)·N(0, I₃)`.
//! Both components have identity covariance, so the family moves between
//! the Rényi maximizer for `q = 0.75` and the Shannon maximizer.

use std::fmt::Write as _;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{domain, Result};
use crate::estimators::{power_sum_from_neighbors, shannon_from_neighbors};
use crate::knn::{within_sample_knn_multi, Metric, MetricKind, SearchMethod};
use crate::reference::{stream_rng, ReferenceDistribution, SpdMatrix};

#[derive(Debug, Clone, PartialEq)]
pub struct MixtureConfig {
    pub betas: Vec<f64>,
    pub n: usize,
    pub k: usize,
    pub q: f64,
    pub reps: usize,
    pub seed: u64,
    pub metric: MetricKind,
}

impl Default for MixtureConfig {
    fn default() -> Self {
        Self {
            betas: (0..=10).map(|i| i as f64 / 10.0).collect(),
            n: 500,
            k: 3,
            q: 0.75,
            reps: 1000,
            seed: 1,
            metric: MetricKind::Euclidean,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MixtureRow {
    pub beta: f64,
    pub n: usize,
    pub k: usize,
    pub q: f64,
    pub reps: usize,
    pub renyi_mean: f64,
    /// Standard deviations use divisor `reps − 1`.
    pub renyi_sd: f64,
    pub shannon_mean: f64,
    pub shannon_sd: f64,
}

/// The mixture with weight `beta` on the Student component.
pub fn mixture_distribution(beta: f64) -> Result<ReferenceDistribution> {
    let student = ReferenceDistribution::student(5.0, SpdMatrix::isotropic(3, 0.6)?, vec![0.0; 3])?;
    ReferenceDistribution::mixture(beta, student, ReferenceDistribution::standard_normal(3))
}

fn mean_sd(v: &[f64]) -> (f64, f64) {
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    let ss = v.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>();
    let sd = if v.len() > 1 {
        (ss / (n - 1.0)).sqrt()
    } else {
        0.0
    };
    (mean, sd)
}

/// Runs the experiment on the current rayon pool. Repetition `r` uses
/// stream `r` of the master seed for every `β`.
pub fn run_mixture(cfg: &MixtureConfig) -> Result<Vec<MixtureRow>> {
    if cfg.reps == 0 || cfg.betas.is_empty() {
        return domain("reps and the beta grid must be non-empty");
    }
    if cfg.k == 0 || cfg.k >= cfg.n {
        return domain(format!("need 1 <= k < N (k = {}, N = {})", cfg.k, cfg.n));
    }
    let mut rows = Vec::with_capacity(cfg.betas.len());
    for &beta in &cfg.betas {
        let dist = mixture_distribution(beta)?;
        let pairs: Vec<(f64, f64)> = (0..cfg.reps)
            .into_par_iter()
            .map(|rep| -> Result<(f64, f64)> {
                let x = dist.sample_with(cfg.n, &mut stream_rng(cfg.seed, rep as u64))?;
                let metric = Metric::fit(cfg.metric, &x)?;
                let ln_ball = metric.ln_ball_volume(x.m())?;
                let nd = within_sample_knn_multi(&x, &[cfg.k], &metric, SearchMethod::Auto)?
                    .pop()
                    .expect("one order");
                let renyi = power_sum_from_neighbors(&nd, cfg.q, x.n(), x.m(), ln_ball)?.renyi()?;
                let shannon = shannon_from_neighbors(&nd, x.n(), x.m(), ln_ball)?;
                Ok((renyi.value, shannon.value))
            })
            .collect::<Result<_>>()?;
        let (renyi, shannon): (Vec<f64>, Vec<f64>) = pairs.into_iter().unzip();
        let (renyi_mean, renyi_sd) = mean_sd(&renyi);
        let (shannon_mean, shannon_sd) = mean_sd(&shannon);
        rows.push(MixtureRow {
            beta,
            n: cfg.n,
            k: cfg.k,
            q: cfg.q,
            reps: cfg.reps,
            renyi_mean,
            renyi_sd,
            shannon_mean,
            shannon_sd,
        });
    }
    Ok(rows)
}

pub fn mixture_csv(rows: &[MixtureRow]) -> String {
    let mut out = String::from("beta,n,k,q,reps,renyi_mean,renyi_sd,shannon_mean,shannon_sd\n");
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{}",
            r.beta, r.n, r.k, r.q, r.reps, r.renyi_mean, r.renyi_sd, r.shannon_mean, r.shannon_sd
        );
    }
    out
}
