use std::ops::Range;

use crate::error::{Error, Result};

/// `n` points in `m` dimensions, stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleMatrix {
    data: Vec<f64>,
    n: usize,
    m: usize,
}

impl SampleMatrix {
    /// Builds a sample from row-major data. Every coordinate must be finite.
    pub fn new(data: Vec<f64>, m: usize) -> Result<Self> {
        if m == 0 {
            return Err(Error::InvalidSample("dimension must be >= 1".into()));
        }
        if data.is_empty() {
            return Err(Error::InvalidSample("sample is empty".into()));
        }
        if !data.len().is_multiple_of(m) {
            return Err(Error::InvalidSample(format!(
                "{} values do not form rows of length {m}",
                data.len()
            )));
        }
        if let Some(pos) = data.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidSample(format!(
                "non-finite coordinate in row {}",
                pos / m
            )));
        }
        let n = data.len() / m;
        Ok(Self { data, n, m })
    }

    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let m = rows
            .first()
            .map(|r| r.as_ref().len())
            .ok_or_else(|| Error::InvalidSample("sample is empty".into()))?;
        let mut data = Vec::with_capacity(rows.len() * m);
        for row in rows {
            let row = row.as_ref();
            if row.len() != m {
                return Err(Error::DimensionMismatch {
                    expected: m,
                    found: row.len(),
                });
            }
            data.extend_from_slice(row);
        }
        Self::new(data, m)
    }

    /// One-dimensional sample.
    pub fn from_scalars(values: &[f64]) -> Result<Self> {
        Self::new(values.to_vec(), 1)
    }

    pub(crate) fn from_raw(data: Vec<f64>, m: usize) -> Self {
        debug_assert!(m > 0 && data.len().is_multiple_of(m));
        let n = data.len() / m;
        Self { data, n, m }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.m..(i + 1) * self.m]
    }

    pub fn rows(&self) -> impl ExactSizeIterator<Item = &[f64]> + '_ {
        self.data.chunks_exact(self.m)
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.data
    }

    /// Sub-sample made of the coordinates in `cols` for every point.
    pub fn columns(&self, cols: Range<usize>) -> Result<Self> {
        if cols.start >= cols.end || cols.end > self.m {
            return Err(Error::InvalidSample(format!(
                "column range {cols:?} is invalid for dimension {}",
                self.m
            )));
        }
        let data = self
            .rows()
            .flat_map(|r| r[cols.clone()].iter().copied())
            .collect();
        Ok(Self::from_raw(data, cols.end - cols.start))
    }

    /// Stacks `other` below `self`.
    pub fn concat(&self, other: &SampleMatrix) -> Result<Self> {
        if other.m != self.m {
            return Err(Error::DimensionMismatch {
                expected: self.m,
                found: other.m,
            });
        }
        let mut data = Vec::with_capacity(self.data.len() + other.data.len());
        data.extend_from_slice(&self.data);
        data.extend_from_slice(&other.data);
        Ok(Self::from_raw(data, self.m))
    }

    /// Applies `x -> a x + b` to every point, with `a` given row-major (`out_m × m`).
    pub fn affine(&self, a: &[f64], b: &[f64]) -> Result<Self> {
        let out_m = b.len();
        if out_m == 0 || a.len() != out_m * self.m {
            return Err(Error::DimensionMismatch {
                expected: out_m * self.m,
                found: a.len(),
            });
        }
        let mut data = Vec::with_capacity(self.n * out_m);
        for row in self.rows() {
            for (i, bi) in b.iter().enumerate() {
                let coeffs = &a[i * self.m..(i + 1) * self.m];
                let dot: f64 = coeffs.iter().zip(row).map(|(c, x)| c * x).sum();
                data.push(dot + bi);
            }
        }
        Self::new(data, out_m)
    }

    /// Multiplies every coordinate by `a`.
    pub fn scaled(&self, a: f64) -> Self {
        Self::from_raw(self.data.iter().map(|v| v * a).collect(), self.m)
    }

    pub fn mean(&self) -> Vec<f64> {
        let mut mean = vec![0.0; self.m];
        for row in self.rows() {
            for (acc, v) in mean.iter_mut().zip(row) {
                *acc += v;
            }
        }
        mean.iter_mut().for_each(|v| *v /= self.n as f64);
        mean
    }

    /// Unbiased covariance matrix (divisor `n − 1`), row-major `m × m`.
    pub fn covariance(&self) -> Result<Vec<f64>> {
        if self.n < 2 {
            return Err(Error::DegenerateSample(
                "covariance needs at least two points".into(),
            ));
        }
        let mean = self.mean();
        let m = self.m;
        let mut cov = vec![0.0; m * m];
        for row in self.rows() {
            for i in 0..m {
                let di = row[i] - mean[i];
                for j in i..m {
                    cov[i * m + j] += di * (row[j] - mean[j]);
                }
            }
        }
        let denom = (self.n - 1) as f64;
        for i in 0..m {
            for j in i..m {
                let v = cov[i * m + j] / denom;
                cov[i * m + j] = v;
                cov[j * m + i] = v;
            }
        }
        Ok(cov)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_input() {
        assert!(SampleMatrix::new(vec![], 1).is_err());
        assert!(SampleMatrix::new(vec![1.0, 2.0, 3.0], 2).is_err());
        assert!(SampleMatrix::new(vec![1.0, f64::NAN], 1).is_err());
        assert!(SampleMatrix::from_rows(&[vec![1.0, 2.0], vec![1.0]]).is_err());
    }

    #[test]
    fn columns_and_concat() {
        let s = SampleMatrix::from_rows(&[[1.0, 2.0, 3.0], [4.0, 5.0, 6.0]]).unwrap();
        let c = s.columns(1..3).unwrap();
        assert_eq!(c.as_slice(), &[2.0, 3.0, 5.0, 6.0]);
        let both = s.concat(&s).unwrap();
        assert_eq!(both.n(), 4);
        assert!(s.concat(&c).is_err());
        assert!(s.columns(2..2).is_err());
    }

    #[test]
    fn covariance_of_small_sample() {
        let s = SampleMatrix::from_scalars(&[0.0, 1.0, 2.0]).unwrap();
        assert_eq!(s.covariance().unwrap(), vec![1.0]);
    }
}
