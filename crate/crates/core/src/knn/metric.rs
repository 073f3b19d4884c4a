use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sample::SampleMatrix;
use crate::special::ln_unit_ball_volume;

/// Largest accepted condition number of a fitted covariance matrix.
pub const MAX_CONDITION: f64 = 1e12;

const SYMMETRY_TOL: f64 = 1e-12;

/// Which metric an estimator should use. `Mahalanobis` is fitted to the
/// sample(s) at hand.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MetricKind {
    #[default]
    Euclidean,
    Mahalanobis,
}

impl std::str::FromStr for MetricKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "euclidean" => Ok(Self::Euclidean),
            "mahalanobis" => Ok(Self::Mahalanobis),
            other => Err(Error::Parse(format!("unknown metric '{other}'"))),
        }
    }
}

/// A quadratic-form metric `‖x‖² = xᵀ P x` with `P` the precision matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Mahalanobis {
    precision: DMatrix<f64>,
    /// Transpose of the lower Cholesky factor of `P`; `z = W x` whitens.
    whitening: DMatrix<f64>,
    log_det_covariance: f64,
}

impl Mahalanobis {
    pub fn dim(&self) -> usize {
        self.precision.nrows()
    }

    pub fn precision(&self) -> &DMatrix<f64> {
        &self.precision
    }

    pub fn log_det_covariance(&self) -> f64 {
        self.log_det_covariance
    }

    fn whiten_into(&self, x: &[f64], out: &mut Vec<f64>) {
        let m = self.dim();
        for i in 0..m {
            let mut acc = 0.0;
            for (j, xj) in x.iter().enumerate().skip(i) {
                acc += self.whitening[(i, j)] * xj;
            }
            out.push(acc);
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Metric {
    Euclidean,
    Mahalanobis(Mahalanobis),
}

impl Metric {
    /// Mahalanobis metric from the unbiased sample covariance.
    pub fn fit_mahalanobis(sample: &SampleMatrix) -> Result<Self> {
        let (n, m) = (sample.n(), sample.m());
        if n < m + 1 {
            return Err(Error::DegenerateSample(format!(
                "Mahalanobis fit needs at least m+1 = {} points, got {n}",
                m + 1
            )));
        }
        let cov = DMatrix::from_row_slice(m, m, &sample.covariance()?);
        let eig = SymmetricEigen::new(cov.clone());
        let max = eig.eigenvalues.max();
        let min = eig.eigenvalues.min();
        if !(min > 0.0) || max / min >= MAX_CONDITION {
            let condition = if min > 0.0 { max / min } else { f64::INFINITY };
            return Err(Error::SingularCovariance { condition });
        }
        let chol = cov.cholesky().ok_or(Error::SingularCovariance {
            condition: max / min,
        })?;
        let log_det_covariance = 2.0 * chol.l().diagonal().iter().map(|d| d.ln()).sum::<f64>();
        let inv = chol.inverse();
        let precision = (&inv + inv.transpose()) * 0.5;
        Self::from_parts(precision, log_det_covariance)
    }

    /// Mahalanobis metric from an explicit precision matrix (row-major `m × m`).
    pub fn mahalanobis_from_precision(precision: &[f64], m: usize) -> Result<Self> {
        if m == 0 || precision.len() != m * m {
            return Err(Error::DimensionMismatch {
                expected: m * m,
                found: precision.len(),
            });
        }
        let p = DMatrix::from_row_slice(m, m, precision);
        let scale = p.amax().max(f64::MIN_POSITIVE);
        if (&p - p.transpose()).amax() > SYMMETRY_TOL * scale {
            return Err(Error::NotPositiveDefinite(
                "precision matrix is not symmetric".into(),
            ));
        }
        let chol = p
            .clone()
            .cholesky()
            .ok_or_else(|| Error::NotPositiveDefinite("Cholesky factorization failed".into()))?;
        let log_det_precision = 2.0 * chol.l().diagonal().iter().map(|d| d.ln()).sum::<f64>();
        Self::from_parts(p, -log_det_precision)
    }

    fn from_parts(precision: DMatrix<f64>, log_det_covariance: f64) -> Result<Self> {
        let chol = precision
            .clone()
            .cholesky()
            .ok_or_else(|| Error::NotPositiveDefinite("precision matrix".into()))?;
        Ok(Metric::Mahalanobis(Mahalanobis {
            whitening: chol.l().transpose(),
            precision,
            log_det_covariance,
        }))
    }

    /// Resolves a [`MetricKind`] against a sample.
    pub fn fit(kind: MetricKind, sample: &SampleMatrix) -> Result<Self> {
        match kind {
            MetricKind::Euclidean => Ok(Metric::Euclidean),
            MetricKind::Mahalanobis => Self::fit_mahalanobis(sample),
        }
    }

    pub fn kind(&self) -> MetricKind {
        match self {
            Metric::Euclidean => MetricKind::Euclidean,
            Metric::Mahalanobis(_) => MetricKind::Mahalanobis,
        }
    }

    fn check_dim(&self, m: usize) -> Result<()> {
        match self {
            Metric::Mahalanobis(mh) if mh.dim() != m => Err(Error::DimensionMismatch {
                expected: mh.dim(),
                found: m,
            }),
            _ => Ok(()),
        }
    }

    /// `ln` of the volume of the unit ball of this metric:
    /// `ln V_m` or `½ ln|Σ| + ln V_m`.
    pub fn ln_ball_volume(&self, m: usize) -> Result<f64> {
        self.check_dim(m)?;
        let base = ln_unit_ball_volume(m)?;
        Ok(match self {
            Metric::Euclidean => base,
            Metric::Mahalanobis(mh) => base + 0.5 * mh.log_det_covariance,
        })
    }

    /// Coordinates in which this metric is Euclidean. Distances used by the
    /// neighbor search are always Euclidean distances between embedded points.
    pub fn embed(&self, sample: &SampleMatrix) -> Result<SampleMatrix> {
        self.check_dim(sample.m())?;
        match self {
            Metric::Euclidean => Ok(sample.clone()),
            Metric::Mahalanobis(mh) => {
                let mut data = Vec::with_capacity(sample.as_slice().len());
                for row in sample.rows() {
                    mh.whiten_into(row, &mut data);
                }
                Ok(SampleMatrix::from_raw(data, sample.m()))
            }
        }
    }

    /// Distance between two points, computed exactly as the neighbor search does.
    pub fn distance(&self, a: &[f64], b: &[f64]) -> Result<f64> {
        if a.len() != b.len() {
            return Err(Error::DimensionMismatch {
                expected: a.len(),
                found: b.len(),
            });
        }
        self.check_dim(a.len())?;
        Ok(match self {
            Metric::Euclidean => squared_distance(a, b).sqrt(),
            Metric::Mahalanobis(mh) => {
                let mut za = Vec::with_capacity(a.len());
                let mut zb = Vec::with_capacity(b.len());
                mh.whiten_into(a, &mut za);
                mh.whiten_into(b, &mut zb);
                squared_distance(&za, &zb).sqrt()
            }
        })
    }
}

/// Sum of squared coordinate differences, accumulated in coordinate order.
#[inline]
pub(crate) fn squared_distance(a: &[f64], b: &[f64]) -> f64 {
    let mut s = 0.0;
    for (x, y) in a.iter().zip(b) {
        let d = x - y;
        s += d * d;
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_covariance_matches_euclidean() {
        // points with sample covariance exactly I_2: (±1, 0), (0, ±1) scaled
        let c = (1.5f64).sqrt();
        let s = SampleMatrix::from_rows(&[[c, 0.0], [-c, 0.0], [0.0, c], [0.0, -c]]).unwrap();
        let cov = s.covariance().unwrap();
        assert!((cov[0] - 1.0).abs() < 1e-14 && cov[1].abs() < 1e-14);
        let metric = Metric::fit_mahalanobis(&s).unwrap();
        let Metric::Mahalanobis(mh) = &metric else {
            panic!("expected Mahalanobis")
        };
        assert!(mh.log_det_covariance().abs() < 1e-12);
        let d = metric.distance(&[0.3, -1.0], &[2.0, 0.5]).unwrap();
        let e = Metric::Euclidean
            .distance(&[0.3, -1.0], &[2.0, 0.5])
            .unwrap();
        assert!((d - e).abs() < 1e-12);
    }

    #[test]
    fn one_dimensional_fit() {
        let s = SampleMatrix::from_scalars(&[0.0, 1.0, 2.0]).unwrap();
        let metric = Metric::fit_mahalanobis(&s).unwrap();
        assert!((metric.distance(&[0.5], &[3.0]).unwrap() - 2.5).abs() < 1e-14);
        assert!((metric.ln_ball_volume(1).unwrap() - 2f64.ln()).abs() < 1e-14);
    }

    #[test]
    fn singular_covariance_is_reported() {
        let s = SampleMatrix::from_rows(&[[0.0, 0.0], [1.0, 1.0], [2.0, 2.0], [3.0, 3.0]]).unwrap();
        match Metric::fit_mahalanobis(&s) {
            Err(Error::SingularCovariance { condition }) => assert!(condition >= MAX_CONDITION),
            other => panic!("unexpected {other:?}"),
        }
        let few = SampleMatrix::from_rows(&[[0.0, 0.0], [1.0, 2.0]]).unwrap();
        assert!(Metric::fit_mahalanobis(&few).is_err());
    }

    #[test]
    fn precision_must_be_spd() {
        assert!(Metric::mahalanobis_from_precision(&[1.0, 2.0, 2.0, 1.0], 2).is_err());
        assert!(Metric::mahalanobis_from_precision(&[1.0, 0.1, 0.0, 1.0], 2).is_err());
        let ok = Metric::mahalanobis_from_precision(&[4.0, 0.0, 0.0, 1.0], 2).unwrap();
        assert!((ok.distance(&[0.0, 0.0], &[1.0, 0.0]).unwrap() - 2.0).abs() < 1e-15);
        // |Σ| = 1/4
        let lv = ok.ln_ball_volume(2).unwrap();
        assert!((lv - (std::f64::consts::PI.ln() + 0.5 * 0.25f64.ln())).abs() < 1e-14);
    }

    #[test]
    fn distances_are_invariant_under_linear_maps() {
        let s = SampleMatrix::from_rows(&[
            [0.1, 0.7],
            [1.3, -0.2],
            [-0.8, 0.4],
            [0.5, 1.9],
            [2.2, 0.3],
        ])
        .unwrap();
        let a = [2.0, 0.5, -1.0, 3.0];
        let t = s.affine(&a, &[0.0, 0.0]).unwrap();
        let ms = Metric::fit_mahalanobis(&s).unwrap();
        let mt = Metric::fit_mahalanobis(&t).unwrap();
        for i in 0..s.n() {
            for j in 0..s.n() {
                let d1 = ms.distance(s.row(i), s.row(j)).unwrap();
                let d2 = mt.distance(t.row(i), t.row(j)).unwrap();
                assert!((d1 - d2).abs() <= 1e-9 * d1.max(1.0));
            }
        }
    }
}
