//! Reference distributions with closed-form entropies and seeded samplers.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Beta, Distribution, Gamma, StandardNormal};

use crate::error::{domain, Error, Result};
use crate::sample::SampleMatrix;
use crate::special::{digamma_unchecked, ln_gamma_unchecked, log_beta, trigamma_unchecked};

/// Generator for repetition `stream` of a run with master seed `seed`.
pub fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// A symmetric positive-definite matrix with its Cholesky factor.
#[derive(Debug, Clone, PartialEq)]
pub struct SpdMatrix {
    matrix: DMatrix<f64>,
    lower: DMatrix<f64>,
    log_det: f64,
}

impl SpdMatrix {
    /// From a row-major `m × m` matrix.
    pub fn new(row_major: &[f64], m: usize) -> Result<Self> {
        if m == 0 || row_major.len() != m * m {
            return Err(Error::DimensionMismatch {
                expected: m * m,
                found: row_major.len(),
            });
        }
        let matrix = DMatrix::from_row_slice(m, m, row_major);
        let scale = matrix.amax().max(f64::MIN_POSITIVE);
        if (&matrix - matrix.transpose()).amax() > 1e-12 * scale {
            return Err(Error::NotPositiveDefinite("matrix is not symmetric".into()));
        }
        let lower = matrix
            .clone()
            .cholesky()
            .ok_or_else(|| Error::NotPositiveDefinite("Cholesky factorization failed".into()))?
            .l();
        let log_det = 2.0 * lower.diagonal().iter().map(|d| d.ln()).sum::<f64>();
        Ok(Self {
            matrix,
            lower,
            log_det,
        })
    }

    pub fn identity(m: usize) -> Self {
        Self::isotropic(m, 1.0).expect("identity is SPD")
    }

    /// `s2 · I_m`.
    pub fn isotropic(m: usize, s2: f64) -> Result<Self> {
        Self::equicorrelated(m, s2, 0.0)
    }

    /// `s2 · [(1−ρ) I + ρ 11ᵀ]`.
    pub fn equicorrelated(m: usize, s2: f64, rho: f64) -> Result<Self> {
        let data: Vec<f64> = (0..m * m)
            .map(|i| if i / m == i % m { s2 } else { s2 * rho })
            .collect();
        Self::new(&data, m)
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn log_det(&self) -> f64 {
        self.log_det
    }

    /// Row-major entries.
    pub fn to_row_major(&self) -> Vec<f64> {
        self.matrix.transpose().as_slice().to_vec()
    }

    pub fn scaled(&self, a: f64) -> Result<Self> {
        Self::new(
            &self
                .to_row_major()
                .iter()
                .map(|v| v * a)
                .collect::<Vec<_>>(),
            self.dim(),
        )
    }

    /// `dᵀ A⁻¹ d`.
    pub fn quad_form(&self, d: &[f64]) -> f64 {
        let m = self.dim();
        let mut y = vec![0.0; m];
        let mut acc = 0.0;
        for i in 0..m {
            let s = d[i] - (0..i).map(|j| self.lower[(i, j)] * y[j]).sum::<f64>();
            y[i] = s / self.lower[(i, i)];
            acc += y[i] * y[i];
        }
        acc
    }

    /// `L z` with `A = L Lᵀ`, written into `out`.
    fn apply_lower(&self, z: &[f64], out: &mut [f64]) {
        for (i, o) in out.iter_mut().enumerate() {
            *o = (0..=i).map(|j| self.lower[(i, j)] * z[j]).sum();
        }
    }

    fn trace_inv_times(&self, other: &SpdMatrix) -> f64 {
        let inv = self.matrix.clone().cholesky().expect("SPD").inverse();
        (inv * &other.matrix).trace()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ReferenceDistribution {
    Normal {
        mu: Vec<f64>,
        sigma: SpdMatrix,
    },
    /// Student `T(ν, Σ, μ)`; covariance `νΣ/(ν−2)` for `ν > 2`.
    Student {
        nu: f64,
        sigma: SpdMatrix,
        mu: Vec<f64>,
    },
    /// Compactly supported maximizer of the q-entropy for `q > 1` under a
    /// covariance constraint `C`, with `p = m + 2/(q−1)`.
    BoundedMaximizer {
        p: f64,
        c: SpdMatrix,
        mu: Vec<f64>,
    },
    /// Uniform on `[0, 1]^m`.
    UniformCube {
        m: usize,
    },
    /// `w · first + (1 − w) · second`.
    Mixture {
        w: f64,
        first: Box<ReferenceDistribution>,
        second: Box<ReferenceDistribution>,
    },
}

use ReferenceDistribution as D;

fn check_mu(mu: &[f64], m: usize) -> Result<()> {
    if mu.len() != m {
        return Err(Error::DimensionMismatch {
            expected: m,
            found: mu.len(),
        });
    }
    if mu.iter().any(|v| !v.is_finite()) {
        return domain("location must be finite");
    }
    Ok(())
}

fn no_closed_form<T>(what: &str, dist: &ReferenceDistribution) -> Result<T> {
    domain(format!("no closed-form {what} for {}", dist.name()))
}

impl ReferenceDistribution {
    pub fn normal(mu: Vec<f64>, sigma: SpdMatrix) -> Result<Self> {
        check_mu(&mu, sigma.dim())?;
        Ok(D::Normal { mu, sigma })
    }

    pub fn standard_normal(m: usize) -> Self {
        D::Normal {
            mu: vec![0.0; m],
            sigma: SpdMatrix::identity(m),
        }
    }

    pub fn student(nu: f64, sigma: SpdMatrix, mu: Vec<f64>) -> Result<Self> {
        if !(nu > 0.0) || !nu.is_finite() {
            return domain(format!("degrees of freedom must be positive, got {nu}"));
        }
        check_mu(&mu, sigma.dim())?;
        Ok(D::Student { nu, sigma, mu })
    }

    /// The bounded maximizer for order `q > 1` and covariance `c`.
    pub fn bounded_maximizer(q: f64, c: SpdMatrix, mu: Vec<f64>) -> Result<Self> {
        if !(q > 1.0) || !q.is_finite() {
            return domain(format!("bounded maximizer needs q > 1, got {q}"));
        }
        let p = c.dim() as f64 + 2.0 / (q - 1.0);
        check_mu(&mu, c.dim())?;
        Ok(D::BoundedMaximizer { p, c, mu })
    }

    pub fn uniform_cube(m: usize) -> Result<Self> {
        if m == 0 {
            return domain("dimension must be at least 1");
        }
        Ok(D::UniformCube { m })
    }

    pub fn mixture(w: f64, first: Self, second: Self) -> Result<Self> {
        if !(0.0..=1.0).contains(&w) {
            return domain(format!("mixture weight must lie in [0, 1], got {w}"));
        }
        if first.dim() != second.dim() {
            return Err(Error::DimensionMismatch {
                expected: first.dim(),
                found: second.dim(),
            });
        }
        Ok(D::Mixture {
            w,
            first: Box::new(first),
            second: Box::new(second),
        })
    }

    pub fn name(&self) -> &'static str {
        match self {
            D::Normal { .. } => "normal",
            D::Student { .. } => "student",
            D::BoundedMaximizer { .. } => "bounded",
            D::UniformCube { .. } => "uniform",
            D::Mixture { .. } => "mixture",
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            D::Normal { sigma, .. } | D::Student { sigma, .. } => sigma.dim(),
            D::BoundedMaximizer { c, .. } => c.dim(),
            D::UniformCube { m } => *m,
            D::Mixture { first, .. } => first.dim(),
        }
    }

    /// `N` points drawn with a generator seeded from `seed`.
    pub fn sample(&self, n: usize, seed: u64) -> Result<SampleMatrix> {
        self.sample_with(n, &mut ChaCha8Rng::seed_from_u64(seed))
    }

    pub fn sample_with<R: Rng + ?Sized>(&self, n: usize, rng: &mut R) -> Result<SampleMatrix> {
        if n == 0 {
            return domain("sample size must be at least 1");
        }
        let m = self.dim();
        let mut data = vec![0.0; n * m];
        let mut z = vec![0.0; m];
        for row in data.chunks_exact_mut(m) {
            self.draw(rng, &mut z, row);
        }
        SampleMatrix::new(data, m)
    }

    fn draw<R: Rng + ?Sized>(&self, rng: &mut R, z: &mut [f64], out: &mut [f64]) {
        match self {
            D::Normal { mu, sigma } => {
                fill_normal(rng, z);
                sigma.apply_lower(z, out);
                add(out, mu);
            }
            D::Student { nu, sigma, mu } => {
                fill_normal(rng, z);
                sigma.apply_lower(z, out);
                let chi2: f64 = Gamma::new(nu / 2.0, 2.0).expect("valid shape").sample(rng);
                let s = (chi2 / nu).sqrt();
                out.iter_mut().for_each(|v| *v /= s);
                add(out, mu);
            }
            D::BoundedMaximizer { p, c, mu } => {
                let m = c.dim() as f64;
                // uniform direction times a radius with r² ~ Beta(m/2, (p−m)/2 + 1)
                fill_normal(rng, z);
                let norm = z.iter().map(|v| v * v).sum::<f64>().sqrt();
                let r2: f64 = Beta::new(m / 2.0, (p - m) / 2.0 + 1.0)
                    .expect("valid shape")
                    .sample(rng);
                let scale = (r2 * (p + 2.0)).sqrt() / norm;
                z.iter_mut().for_each(|v| *v *= scale);
                c.apply_lower(z, out);
                add(out, mu);
            }
            D::UniformCube { .. } => out.iter_mut().for_each(|v| *v = rng.random::<f64>()),
            D::Mixture { w, first, second } => {
                if rng.random::<f64>() < *w {
                    first.draw(rng, z, out)
                } else {
                    second.draw(rng, z, out)
                }
            }
        }
    }

    /// `ln f(x)`; `−∞` outside the support.
    pub fn log_density(&self, x: &[f64]) -> f64 {
        let m = self.dim() as f64;
        match self {
            D::Normal { mu, sigma } => {
                let q = sigma.quad_form(&diff(x, mu));
                -0.5 * (m * (2.0 * PI).ln() + sigma.log_det + q)
            }
            D::Student { nu, sigma, mu } => {
                let q = sigma.quad_form(&diff(x, mu)) / nu;
                ln_gamma_unchecked((m + nu) / 2.0)
                    - ln_gamma_unchecked(nu / 2.0)
                    - 0.5 * m * (nu * PI).ln()
                    - 0.5 * sigma.log_det
                    - (m + nu) / 2.0 * q.ln_1p()
            }
            D::BoundedMaximizer { p, c, mu } => {
                let t = c.quad_form(&diff(x, mu)) / (p + 2.0);
                if t > 1.0 {
                    return f64::NEG_INFINITY;
                }
                bounded_log_norm(*p, c) + (p - m) / 2.0 * (-t).ln_1p()
            }
            D::UniformCube { .. } => {
                if x.iter().all(|v| (0.0..=1.0).contains(v)) {
                    0.0
                } else {
                    f64::NEG_INFINITY
                }
            }
            D::Mixture { w, first, second } => {
                let a = w.ln() + first.log_density(x);
                let b = (1.0 - w).ln() + second.log_density(x);
                let hi = a.max(b);
                if hi == f64::NEG_INFINITY {
                    hi
                } else {
                    hi + ((a - hi).exp() + (b - hi).exp()).ln()
                }
            }
        }
    }

    pub fn mean(&self) -> Option<Vec<f64>> {
        match self {
            D::Normal { mu, .. } | D::BoundedMaximizer { mu, .. } => Some(mu.clone()),
            D::Student { nu, mu, .. } => (*nu > 1.0).then(|| mu.clone()),
            D::UniformCube { m } => Some(vec![0.5; *m]),
            D::Mixture { w, first, second } => {
                let (a, b) = (first.mean()?, second.mean()?);
                Some(
                    a.iter()
                        .zip(&b)
                        .map(|(x, y)| w * x + (1.0 - w) * y)
                        .collect(),
                )
            }
        }
    }

    /// Row-major covariance matrix, when it exists.
    pub fn covariance(&self) -> Option<Vec<f64>> {
        match self {
            D::Normal { sigma, .. } => Some(sigma.to_row_major()),
            D::Student { nu, sigma, .. } => (*nu > 2.0).then(|| {
                let f = nu / (nu - 2.0);
                sigma.to_row_major().iter().map(|v| v * f).collect()
            }),
            D::BoundedMaximizer { c, .. } => Some(c.to_row_major()),
            D::UniformCube { m } => Some(
                (0..m * m)
                    .map(|i| if i / m == i % m { 1.0 / 12.0 } else { 0.0 })
                    .collect(),
            ),
            D::Mixture { w, first, second } => {
                let m = self.dim();
                let (ma, mb) = (first.mean()?, second.mean()?);
                let (ca, cb) = (first.covariance()?, second.covariance()?);
                Some(
                    (0..m * m)
                        .map(|idx| {
                            let (i, j) = (idx / m, idx % m);
                            w * ca[idx]
                                + (1.0 - w) * cb[idx]
                                + w * (1.0 - w) * (ma[i] - mb[i]) * (ma[j] - mb[j])
                        })
                        .collect(),
                )
            }
        }
    }

    /// `I_q = ∫ f^q`.
    pub fn iq(&self, q: f64) -> Result<f64> {
        match self {
            D::Normal { sigma, .. } => normal_iq(sigma, q),
            D::Student { .. } => Ok(((1.0 - q) * self.renyi(q)?).exp()),
            D::BoundedMaximizer { p, c, .. } => bounded_iq(*p, c, q),
            D::UniformCube { .. } => Ok(1.0),
            D::Mixture { .. } => no_closed_form("I_q", self),
        }
    }

    /// Rényi entropy `H*_q`, `q ≠ 1`.
    pub fn renyi(&self, q: f64) -> Result<f64> {
        match self {
            D::Normal { sigma, .. } => normal_renyi(sigma, q),
            D::Student { nu, sigma, .. } => student_renyi(*nu, sigma, q),
            D::BoundedMaximizer { .. } => {
                if q == 1.0 {
                    return domain("q must differ from 1");
                }
                Ok(self.iq(q)?.ln() / (1.0 - q))
            }
            D::UniformCube { .. } => Ok(0.0),
            D::Mixture { .. } => no_closed_form("Rényi entropy", self),
        }
    }

    /// Shannon entropy `H₁`.
    pub fn shannon(&self) -> Result<f64> {
        match self {
            D::Normal { sigma, .. } => Ok(normal_shannon(sigma)),
            D::Student { nu, sigma, .. } => student_shannon(*nu, sigma),
            D::BoundedMaximizer { p, c, .. } => {
                let (a, h) = ((p - c.dim() as f64) / 2.0, c.dim() as f64 / 2.0);
                Ok(-bounded_log_norm(*p, c)
                    - a * (digamma_unchecked(a + 1.0) - digamma_unchecked(a + 1.0 + h)))
            }
            D::UniformCube { .. } => Ok(0.0),
            D::Mixture { .. } => no_closed_form("Shannon entropy", self),
        }
    }
}

fn fill_normal<R: Rng + ?Sized>(rng: &mut R, z: &mut [f64]) {
    z.iter_mut().for_each(|v| *v = StandardNormal.sample(rng));
}

fn add(out: &mut [f64], mu: &[f64]) {
    out.iter_mut().zip(mu).for_each(|(o, m)| *o += m);
}

fn diff(x: &[f64], mu: &[f64]) -> Vec<f64> {
    x.iter().zip(mu).map(|(a, b)| a - b).collect()
}

fn bounded_log_norm(p: f64, c: &SpdMatrix) -> f64 {
    let m = c.dim() as f64;
    ln_gamma_unchecked(p / 2.0 + 1.0)
        - 0.5 * c.log_det
        - m / 2.0 * (PI * (p + 2.0)).ln()
        - ln_gamma_unchecked((p - m) / 2.0 + 1.0)
}

fn bounded_iq(p: f64, c: &SpdMatrix, q: f64) -> Result<f64> {
    let m = c.dim() as f64;
    let b = q * (p - m) / 2.0;
    if !(b > -1.0) {
        return domain(format!("I_q diverges for q = {q}"));
    }
    let ln = q * bounded_log_norm(p, c)
        + m / 2.0 * (PI * (p + 2.0)).ln()
        + 0.5 * c.log_det
        + ln_gamma_unchecked(b + 1.0)
        - ln_gamma_unchecked(b + 1.0 + m / 2.0);
    Ok(ln.exp())
}

fn check_q(q: f64) -> Result<()> {
    if !(q > 0.0) || !q.is_finite() {
        return domain(format!("q must be positive, got {q}"));
    }
    Ok(())
}

/// `I_q = (2π)^{m(1−q)/2} |Σ|^{(1−q)/2} q^{−m/2}` for `N(μ, Σ)`.
pub fn normal_iq(sigma: &SpdMatrix, q: f64) -> Result<f64> {
    check_q(q)?;
    let m = sigma.dim() as f64;
    let ln = (1.0 - q) * (m / 2.0 * (2.0 * PI).ln() + 0.5 * sigma.log_det) - m / 2.0 * q.ln();
    Ok(ln.exp())
}

/// Rényi entropy of `N(μ, Σ)`.
pub fn normal_renyi(sigma: &SpdMatrix, q: f64) -> Result<f64> {
    check_q(q)?;
    if q == 1.0 {
        return domain("q must differ from 1");
    }
    let m = sigma.dim() as f64;
    Ok(m / 2.0 * (2.0 * PI).ln() + 0.5 * sigma.log_det - m * q.ln() / (2.0 * (1.0 - q)))
}

/// Shannon entropy `ln[(2πe)^{m/2} |Σ|^{1/2}]` of `N(μ, Σ)`.
pub fn normal_shannon(sigma: &SpdMatrix) -> f64 {
    let m = sigma.dim() as f64;
    m / 2.0 * (2.0 * PI * std::f64::consts::E).ln() + 0.5 * sigma.log_det
}

/// Rényi entropy of the m-variate Student `T(ν, Σ, μ)`, for `q > m/(m+ν)`.
pub fn student_renyi(nu: f64, sigma: &SpdMatrix, q: f64) -> Result<f64> {
    let m = sigma.dim() as f64;
    if !(nu > 0.0) {
        return domain(format!("degrees of freedom must be positive, got {nu}"));
    }
    if !(q > m / (m + nu)) || q == 1.0 || !q.is_finite() {
        return domain(format!(
            "Student Rényi entropy needs q > m/(m+nu) and q != 1, got {q}"
        ));
    }
    let ln_ratio =
        log_beta(q * (m + nu) / 2.0 - m / 2.0, m / 2.0)? - q * log_beta(nu / 2.0, m / 2.0)?;
    Ok(
        ln_ratio / (1.0 - q) + 0.5 * (m * (PI * nu).ln() + sigma.log_det)
            - ln_gamma_unchecked(m / 2.0),
    )
}

/// Rényi entropy of the standard one-dimensional Student distribution.
pub fn student_renyi_1d(nu: f64, q: f64) -> Result<f64> {
    student_renyi(nu, &SpdMatrix::identity(1), q)
}

/// Shannon entropy of `T(ν, Σ, μ)`.
pub fn student_shannon(nu: f64, sigma: &SpdMatrix) -> Result<f64> {
    if !(nu > 0.0) {
        return domain(format!("degrees of freedom must be positive, got {nu}"));
    }
    let m = sigma.dim() as f64;
    let a = (nu + m) / 2.0;
    Ok(
        m / 2.0 * (nu * PI).ln() + ln_gamma_unchecked(nu / 2.0) - ln_gamma_unchecked(a)
            + 0.5 * sigma.log_det
            + a * (digamma_unchecked(a) - digamma_unchecked(nu / 2.0)),
    )
}

/// `S(f) = var[ln f(X)]` in closed form.
pub fn spectrum_closed_form(dist: &ReferenceDistribution) -> Result<f64> {
    match dist {
        D::Normal { sigma, .. } => Ok(sigma.dim() as f64 / 2.0),
        D::Student { nu, sigma, .. } => {
            let m = sigma.dim() as f64;
            Ok(0.25
                * (nu + m).powi(2)
                * (trigamma_unchecked(nu / 2.0) - trigamma_unchecked((nu + m) / 2.0)))
        }
        D::BoundedMaximizer { p, c, .. } => {
            let m = c.dim() as f64;
            let a = (p - m) / 2.0;
            Ok(a * a * (trigamma_unchecked(a + 1.0) - trigamma_unchecked(a + 1.0 + m / 2.0)))
        }
        D::UniformCube { .. } => Ok(0.0),
        D::Mixture { .. } => no_closed_form("spectrum", dist),
    }
}

/// `K(N(μ₁, Σ₁), N(μ₂, Σ₂))`.
pub fn gaussian_kl(
    mu1: &[f64],
    sigma1: &SpdMatrix,
    mu2: &[f64],
    sigma2: &SpdMatrix,
) -> Result<f64> {
    let m = sigma1.dim();
    if sigma2.dim() != m {
        return Err(Error::DimensionMismatch {
            expected: m,
            found: sigma2.dim(),
        });
    }
    check_mu(mu1, m)?;
    check_mu(mu2, m)?;
    let d = diff(mu2, mu1);
    Ok(0.5
        * (sigma2.trace_inv_times(sigma1) + sigma2.quad_form(&d) - m as f64 + sigma2.log_det
            - sigma1.log_det))
}

// Distribution specs: `normal:m=3,sigma2=1,mu=0,rho=0.9`,
// `student:nu=5,m=1,scale=1,mu=0`, `bounded:q=2,m=2,var=1`, `uniform:m=3`,
// `mixture:w=0.5|student:...|normal:...`.

struct Params<'a> {
    name: &'a str,
    pairs: Vec<(&'a str, &'a str)>,
}

impl<'a> Params<'a> {
    fn parse(name: &'a str, body: &'a str, allowed: &[&str]) -> Result<Self> {
        let mut pairs = Vec::new();
        for item in body.split(',').map(str::trim).filter(|s| !s.is_empty()) {
            let (k, v) = item
                .split_once('=')
                .ok_or_else(|| Error::Parse(format!("expected key=value in '{item}'")))?;
            let k = k.trim();
            if !allowed.contains(&k) {
                return Err(Error::Parse(format!("unknown parameter '{k}' for {name}")));
            }
            pairs.push((k, v.trim()));
        }
        Ok(Self { name, pairs })
    }

    fn get(&self, key: &str) -> Result<Option<f64>> {
        match self.pairs.iter().rev().find(|(k, _)| *k == key) {
            None => Ok(None),
            Some((_, v)) => v
                .parse::<f64>()
                .map(Some)
                .map_err(|_| Error::Parse(format!("invalid number '{v}' for {}.{key}", self.name))),
        }
    }

    fn or(&self, key: &str, default: f64) -> Result<f64> {
        Ok(self.get(key)?.unwrap_or(default))
    }

    fn dim(&self) -> Result<usize> {
        let m = self.or("m", 1.0)?;
        if m < 1.0 || m.fract() != 0.0 {
            return Err(Error::Parse(format!(
                "dimension must be a positive integer, got {m}"
            )));
        }
        Ok(m as usize)
    }

    fn shape(&self, scale_key: &str, m: usize) -> Result<SpdMatrix> {
        SpdMatrix::equicorrelated(m, self.or(scale_key, 1.0)?, self.or("rho", 0.0)?)
    }
}

impl FromStr for ReferenceDistribution {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let (name, body) = s.split_once(':').unwrap_or((s, ""));
        let name = name.trim().to_ascii_lowercase();
        match name.as_str() {
            "normal" | "gaussian" => {
                let p = Params::parse("normal", body, &["m", "sigma2", "mu", "rho"])?;
                let m = p.dim()?;
                D::normal(vec![p.or("mu", 0.0)?; m], p.shape("sigma2", m)?)
            }
            "student" | "t" => {
                let p = Params::parse("student", body, &["nu", "m", "scale", "mu", "rho"])?;
                let m = p.dim()?;
                let nu = p
                    .get("nu")?
                    .ok_or_else(|| Error::Parse("student needs nu".into()))?;
                D::student(nu, p.shape("scale", m)?, vec![p.or("mu", 0.0)?; m])
            }
            "bounded" => {
                let p = Params::parse("bounded", body, &["q", "m", "var", "mu", "rho"])?;
                let m = p.dim()?;
                let q = p
                    .get("q")?
                    .ok_or_else(|| Error::Parse("bounded needs q".into()))?;
                D::bounded_maximizer(q, p.shape("var", m)?, vec![p.or("mu", 0.0)?; m])
            }
            "uniform" => {
                let p = Params::parse("uniform", body, &["m"])?;
                D::uniform_cube(p.dim()?)
            }
            "mixture" => {
                let mut parts = body.splitn(3, '|');
                let head = parts.next().unwrap_or("");
                let p = Params::parse("mixture", head, &["w"])?;
                let (a, b) = match (parts.next(), parts.next()) {
                    (Some(a), Some(b)) if !b.contains('|') => (a, b),
                    _ => {
                        return Err(Error::Parse(
                            "mixture needs exactly two components: mixture:w=..|spec|spec".into(),
                        ))
                    }
                };
                D::mixture(p.or("w", 0.5)?, a.parse()?, b.parse()?)
            }
            "" => Err(Error::Parse("empty distribution spec".into())),
            other => Err(Error::Parse(format!("unknown distribution '{other}'"))),
        }
    }
}

impl fmt::Display for ReferenceDistribution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            D::Normal { .. } => write!(f, "normal(m={})", self.dim()),
            D::Student { nu, .. } => write!(f, "student(nu={nu}, m={})", self.dim()),
            D::BoundedMaximizer { p, .. } => write!(f, "bounded(p={p}, m={})", self.dim()),
            D::UniformCube { m } => write!(f, "uniform(m={m})"),
            D::Mixture { w, first, second } => write!(f, "mixture(w={w}, {first}, {second})"),
        }
    }
}
