//! Exponential-family cluster models.
//!
//! A family with statistic `τ` has densities `p_θ(x) = exp(⟨τ(x), θ⟩ - ψ(θ))`.
//! Clusters are summarized by mean parameters `τ̂`, and the divergence used for
//! merging is `B_{ψ*}(τ̂₁, τ̂₂)`, which equals `KL(p₁ ‖ p₂)`.
//!
//! Mean parameters travel as [`StatVec`]s with these layouts:
//!
//! | family          | layout                              | length      |
//! |-----------------|-------------------------------------|-------------|
//! | `gaussian-full` | `(μ, vec(M))`, `M = E[xxᵀ]` row-major | `d + d²`    |
//! | `gaussian-diag` | `(μ, diag(M))`                      | `2d`        |
//! | `multinomial`   | `τ̂` on the probability simplex      | `n`         |
//!
//! The covariance is recovered as `Σ = M - μμᵀ`.

use std::f64::consts::PI;

use crate::bregman::{DivergenceModel, StatVec};
use crate::error::{check_dim, Error, Result};
use crate::linalg;

/// Tolerance on `Σ τ̂ᵢ = 1` when testing simplex membership.
pub const SIMPLEX_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Family {
    GaussianFull,
    GaussianDiag,
    Multinomial,
}

impl Family {
    pub fn tag(self) -> &'static str {
        match self {
            Family::GaussianFull => "gaussian-full",
            Family::GaussianDiag => "gaussian-diag",
            Family::Multinomial => "multinomial",
        }
    }

    /// Inverse of `stat_dim`: the data dimension for a statistic of length `n`.
    pub fn data_dim_for(self, n: usize) -> Option<usize> {
        let d = match self {
            Family::GaussianFull => ((4 * n + 1).isqrt() - 1) / 2,
            Family::GaussianDiag => n / 2,
            Family::Multinomial => n,
        };
        (d > 0 && ExpFamModel::new(self, d).stat_dim() == n).then_some(d)
    }
}

impl std::str::FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        [Family::GaussianFull, Family::GaussianDiag, Family::Multinomial]
            .into_iter()
            .find(|f| f.tag() == s)
            .ok_or_else(|| Error::usage(format!("unknown family {s:?}")))
    }
}

/// Moments `(μ, M)` of a Gaussian with `M = E[xxᵀ]`.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianMeanParams {
    pub mean: Vec<f64>,
    /// d×d, row-major.
    pub second_moment: Vec<f64>,
}

impl GaussianMeanParams {
    pub fn from_mean_cov(mean: Vec<f64>, cov: &[f64]) -> Result<Self> {
        let d = mean.len();
        check_dim(d * d, cov.len())?;
        let mut second_moment = cov.to_vec();
        for i in 0..d {
            for j in 0..d {
                second_moment[i * d + j] += mean[i] * mean[j];
            }
        }
        Ok(GaussianMeanParams { mean, second_moment })
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    pub fn covariance(&self) -> Vec<f64> {
        let d = self.dim();
        let mut cov = self.second_moment.clone();
        for i in 0..d {
            for j in 0..d {
                cov[i * d + j] -= self.mean[i] * self.mean[j];
            }
        }
        cov
    }

    /// Full layout `(μ, vec(M))`.
    pub fn to_stat(&self) -> Result<StatVec> {
        let mut v = self.mean.clone();
        v.extend_from_slice(&self.second_moment);
        StatVec::new(v)
    }

    /// Diagonal layout `(μ, diag(M))`; off-diagonal moments are dropped.
    pub fn to_diag_stat(&self) -> Result<StatVec> {
        let d = self.dim();
        let mut v = self.mean.clone();
        v.extend((0..d).map(|i| self.second_moment[i * d + i]));
        StatVec::new(v)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GaussianCanonicalParams {
    /// `Σ⁻¹μ`.
    pub theta1: Vec<f64>,
    /// `-Σ⁻¹/2`, d×d row-major.
    pub theta2: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MultinomialMeanParams {
    pub probs: Vec<f64>,
}

impl MultinomialMeanParams {
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        if probs.iter().any(|p| !(*p >= 0.0) || !p.is_finite()) {
            return Err(Error::usage("multinomial probabilities must be finite and nonnegative"));
        }
        let sum: f64 = probs.iter().sum();
        if (sum - 1.0).abs() > SIMPLEX_TOL {
            return Err(Error::usage(format!("multinomial probabilities sum to {sum}")));
        }
        Ok(MultinomialMeanParams { probs })
    }

    pub fn to_stat(&self) -> Result<StatVec> {
        StatVec::new(self.probs.clone())
    }
}

/// Canonical parameters; for the diagonal family `theta2` holds `-1/(2σᵢ²)`.
#[derive(Debug, Clone, PartialEq)]
pub enum CanonicalParams {
    Gaussian(GaussianCanonicalParams),
    GaussianDiag { theta1: Vec<f64>, theta2: Vec<f64> },
    Multinomial { theta: Vec<f64> },
}

/// An exponential family over `ℝᵈ` (Lebesgue base measure) or over a
/// vocabulary of `n` words (counting measure).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExpFamModel {
    family: Family,
    /// `d` for Gaussians, vocabulary size `n` for multinomials.
    data_dim: usize,
}

/// `Σ` and its Cholesky factor decoded from a full-layout statistic.
struct FullGaussian<'a> {
    mean: &'a [f64],
    chol: Vec<f64>,
}

impl ExpFamModel {
    pub fn new(family: Family, data_dim: usize) -> Self {
        assert!(data_dim >= 1, "dimension must be positive");
        ExpFamModel { family, data_dim }
    }

    pub fn gaussian_full(d: usize) -> Self {
        Self::new(Family::GaussianFull, d)
    }

    pub fn gaussian_diag(d: usize) -> Self {
        Self::new(Family::GaussianDiag, d)
    }

    pub fn multinomial(n: usize) -> Self {
        Self::new(Family::Multinomial, n)
    }

    pub fn family(&self) -> Family {
        self.family
    }

    pub fn data_dim(&self) -> usize {
        self.data_dim
    }

    /// Length of the mean-parameter vector.
    pub fn stat_dim(&self) -> usize {
        let d = self.data_dim;
        match self.family {
            Family::GaussianFull => d + d * d,
            Family::GaussianDiag => 2 * d,
            Family::Multinomial => d,
        }
    }

    fn covariance_full(&self, stat: &[f64]) -> Vec<f64> {
        let d = self.data_dim;
        let (mean, m) = stat.split_at(d);
        let mut cov = m.to_vec();
        for i in 0..d {
            for j in 0..d {
                cov[i * d + j] -= mean[i] * mean[j];
            }
        }
        // Symmetrize so the factorization sees exactly one triangle's values.
        for i in 0..d {
            for j in (i + 1)..d {
                let avg = 0.5 * (cov[i * d + j] + cov[j * d + i]);
                cov[i * d + j] = avg;
                cov[j * d + i] = avg;
            }
        }
        cov
    }

    fn decode_full<'a>(&self, stat: &'a [f64]) -> Option<FullGaussian<'a>> {
        let cov = self.covariance_full(stat);
        let chol = linalg::cholesky(&cov, self.data_dim)?;
        Some(FullGaussian {
            mean: &stat[..self.data_dim],
            chol,
        })
    }

    /// Per-coordinate variances, or `None` if any variance is at or below
    /// the pivot floor `PIVOT_RTOL * Σ variances`.
    fn variances_diag(&self, stat: &[f64]) -> Option<Vec<f64>> {
        let d = self.data_dim;
        let (mean, m) = stat.split_at(d);
        let var: Vec<f64> = m.iter().zip(mean).map(|(s, mu)| s - mu * mu).collect();
        let trace: f64 = var.iter().sum();
        if !(trace > 0.0) || !trace.is_finite() {
            return None;
        }
        let floor = linalg::PIVOT_RTOL * trace;
        if var.iter().all(|v| *v > floor) {
            Some(var)
        } else {
            None
        }
    }

    fn simplex_point(stat: &[f64]) -> bool {
        stat.iter().all(|p| *p >= 0.0) && (stat.iter().sum::<f64>() - 1.0).abs() <= SIMPLEX_TOL
    }

    fn degenerate_reason(&self, stat: &[f64]) -> String {
        match self.family {
            Family::Multinomial => match stat.iter().position(|p| !(*p > 0.0)) {
                Some(i) => format!("probs[{i}] = {} is not strictly positive", stat[i]),
                None => format!("probabilities sum to {}", stat.iter().sum::<f64>()),
            },
            Family::GaussianFull => "covariance is not positive definite".to_string(),
            Family::GaussianDiag => {
                let d = self.data_dim;
                let i = (0..d)
                    .min_by(|&a, &b| {
                        let va = stat[d + a] - stat[a] * stat[a];
                        let vb = stat[d + b] - stat[b] * stat[b];
                        va.total_cmp(&vb)
                    })
                    .unwrap_or(0);
                format!("variance[{i}] is not positive")
            }
        }
    }

    /// `θ ∈ ∂ψ*(τ̂)` for an interior mean parameter.
    pub fn to_canonical(&self, mean: &StatVec) -> Result<CanonicalParams> {
        check_dim(self.stat_dim(), mean.dim())?;
        if !self.in_relative_interior(mean) {
            return Err(Error::Degenerate(self.degenerate_reason(mean)));
        }
        let d = self.data_dim;
        Ok(match self.family {
            Family::GaussianFull => {
                let g = self
                    .decode_full(mean)
                    .ok_or_else(|| Error::Degenerate(self.degenerate_reason(mean)))?;
                let prec = linalg::inverse(&g.chol, d);
                let theta1 = (0..d)
                    .map(|i| (0..d).map(|j| prec[i * d + j] * g.mean[j]).sum())
                    .collect();
                let theta2 = prec.iter().map(|p| -0.5 * p).collect();
                CanonicalParams::Gaussian(GaussianCanonicalParams { theta1, theta2 })
            }
            Family::GaussianDiag => {
                let var = self
                    .variances_diag(mean)
                    .ok_or_else(|| Error::Degenerate(self.degenerate_reason(mean)))?;
                let theta1 = mean[..d].iter().zip(&var).map(|(m, v)| m / v).collect();
                let theta2 = var.iter().map(|v| -0.5 / v).collect();
                CanonicalParams::GaussianDiag { theta1, theta2 }
            }
            Family::Multinomial => CanonicalParams::Multinomial {
                theta: mean.iter().map(|p| p.ln()).collect(),
            },
        })
    }

    /// The cumulant `ψ(θ)`; `+inf` outside `dom(ψ)`.
    pub fn cumulant(&self, theta: &CanonicalParams) -> f64 {
        let d = self.data_dim;
        match theta {
            CanonicalParams::Gaussian(p) => {
                // Σ = (-2θ₂)⁻¹, μ = Σθ₁; ψ = ½ ln((2π)^d|Σ|) + ½ θ₁ᵀΣθ₁.
                let prec: Vec<f64> = p.theta2.iter().map(|t| -2.0 * t).collect();
                let Some(l) = linalg::cholesky(&prec, d) else {
                    return f64::INFINITY;
                };
                let log_det_prec = linalg::log_det(&l, d);
                let q = linalg::quad_form_inv(&l, d, &p.theta1);
                0.5 * (d as f64 * (2.0 * PI).ln() - log_det_prec) + 0.5 * q
            }
            CanonicalParams::GaussianDiag { theta1, theta2 } => theta1
                .iter()
                .zip(theta2)
                .map(|(t1, t2)| {
                    if !(*t2 < 0.0) {
                        return f64::INFINITY;
                    }
                    let var = -0.5 / t2;
                    0.5 * (2.0 * PI * var).ln() + 0.5 * t1 * t1 * var
                })
                .sum(),
            CanonicalParams::Multinomial { theta } => {
                let mx = theta.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
                mx + theta.iter().map(|t| (t - mx).exp()).sum::<f64>().ln()
            }
        }
    }

    /// `∇ψ(θ)`, the mean parameter of `p_θ`.
    pub fn mean_of(&self, theta: &CanonicalParams) -> Result<StatVec> {
        let d = self.data_dim;
        let v = match theta {
            CanonicalParams::Gaussian(p) => {
                let prec: Vec<f64> = p.theta2.iter().map(|t| -2.0 * t).collect();
                let l = linalg::cholesky(&prec, d)
                    .ok_or_else(|| Error::Degenerate("-2·theta2 is not positive definite".into()))?;
                let cov = linalg::inverse(&l, d);
                let mean: Vec<f64> = (0..d)
                    .map(|i| (0..d).map(|j| cov[i * d + j] * p.theta1[j]).sum())
                    .collect();
                GaussianMeanParams::from_mean_cov(mean, &cov)?
                    .to_stat()?
                    .into_inner()
            }
            CanonicalParams::GaussianDiag { theta1, theta2 } => {
                if theta2.iter().any(|t| !(*t < 0.0)) {
                    return Err(Error::Degenerate("theta2 must be negative".into()));
                }
                let var: Vec<f64> = theta2.iter().map(|t| -0.5 / t).collect();
                let mean: Vec<f64> = theta1.iter().zip(&var).map(|(t, v)| t * v).collect();
                let second: Vec<f64> = mean.iter().zip(&var).map(|(m, v)| v + m * m).collect();
                mean.into_iter().chain(second).collect()
            }
            CanonicalParams::Multinomial { theta } => {
                let mx = theta.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
                let w: Vec<f64> = theta.iter().map(|t| (t - mx).exp()).collect();
                let z: f64 = w.iter().sum();
                w.into_iter().map(|x| x / z).collect()
            }
        };
        StatVec::new(v)
    }

    /// `⟨a, b⟩` between a statistic and a canonical parameter.
    pub fn pairing(&self, stat: &StatVec, theta: &CanonicalParams) -> Result<f64> {
        check_dim(self.stat_dim(), stat.dim())?;
        let d = self.data_dim;
        let dot = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>();
        Ok(match theta {
            CanonicalParams::Gaussian(p) => dot(&stat[..d], &p.theta1) + dot(&stat[d..], &p.theta2),
            CanonicalParams::GaussianDiag { theta1, theta2 } => {
                dot(&stat[..d], theta1) + dot(&stat[d..], theta2)
            }
            CanonicalParams::Multinomial { theta } => dot(stat, theta),
        })
    }

    /// `ln p_θ(x) = ⟨τ(x), θ⟩ - ψ(θ)` with `θ = to_canonical(mean)`.
    ///
    /// `stat_x` is the datum's statistic `τ(x)`: `(x, xxᵀ)` for Gaussians,
    /// the basis vector `e_k` for a single word `k`.
    pub fn log_density(&self, mean: &StatVec, stat_x: &StatVec) -> Result<f64> {
        let theta = self.to_canonical(mean)?;
        Ok(self.pairing(stat_x, &theta)? - self.cumulant(&theta))
    }

    /// `KL(p_{τ̂₁} ‖ p_{τ̂₂})` in closed form; both arguments must be interior.
    pub fn kl(&self, mean1: &StatVec, mean2: &StatVec) -> Result<f64> {
        check_dim(self.stat_dim(), mean1.dim())?;
        check_dim(self.stat_dim(), mean2.dim())?;
        for m in [mean1, mean2] {
            if !self.in_relative_interior(m) {
                return Err(Error::Degenerate(self.degenerate_reason(m)));
            }
        }
        Ok(self.divergence_unchecked(mean1, mean2))
    }

    fn kl_full(&self, x: &[f64], y: &[f64]) -> f64 {
        let d = self.data_dim;
        let (Some(g1), Some(g2)) = (self.decode_full(x), self.decode_full(y)) else {
            return f64::INFINITY;
        };
        let diff: Vec<f64> = g2.mean.iter().zip(g1.mean).map(|(a, b)| a - b).collect();
        let trace = linalg::trace_of_solve(&g2.chol, &g1.chol, d);
        let maha = linalg::quad_form_inv(&g2.chol, d, &diff);
        let ld = linalg::log_det(&g2.chol, d) - linalg::log_det(&g1.chol, d);
        (0.5 * (trace + maha - d as f64 + ld)).max(0.0)
    }

    fn kl_diag(&self, x: &[f64], y: &[f64]) -> f64 {
        let d = self.data_dim;
        let (Some(v1), Some(v2)) = (self.variances_diag(x), self.variances_diag(y)) else {
            return f64::INFINITY;
        };
        let total: f64 = (0..d)
            .map(|i| {
                let r = v1[i] / v2[i];
                let dm = y[i] - x[i];
                r + dm * dm / v2[i] - 1.0 - r.ln()
            })
            .sum();
        (0.5 * total).max(0.0)
    }

    fn kl_multinomial(x: &[f64], y: &[f64]) -> f64 {
        let mut total = 0.0;
        for (&p, &q) in x.iter().zip(y) {
            if p > 0.0 {
                if !(q > 0.0) {
                    return f64::INFINITY;
                }
                total += p * (p / q).ln();
            }
        }
        total.max(0.0)
    }
}

impl DivergenceModel for ExpFamModel {
    fn name(&self) -> &str {
        self.family.tag()
    }

    fn dim(&self) -> usize {
        self.stat_dim()
    }

    /// `ψ*(τ̂)`, the negative entropy of `p_{τ̂}`.
    fn value(&self, x: &[f64]) -> f64 {
        let d = self.data_dim as f64;
        match self.family {
            Family::GaussianFull => match self.decode_full(x) {
                Some(g) => -0.5 * linalg::log_det(&g.chol, self.data_dim) - 0.5 * d * (1.0 + (2.0 * PI).ln()),
                None => f64::INFINITY,
            },
            Family::GaussianDiag => match self.variances_diag(x) {
                Some(v) => {
                    -0.5 * v.iter().map(|s| s.ln()).sum::<f64>() - 0.5 * d * (1.0 + (2.0 * PI).ln())
                }
                None => f64::INFINITY,
            },
            Family::Multinomial => {
                if Self::simplex_point(x) {
                    x.iter().filter(|p| **p > 0.0).map(|p| p * p.ln()).sum()
                } else {
                    f64::INFINITY
                }
            }
        }
    }

    fn in_domain(&self, x: &[f64]) -> bool {
        match self.family {
            Family::Multinomial => Self::simplex_point(x),
            _ => self.in_relative_interior(x),
        }
    }

    fn in_relative_interior(&self, x: &[f64]) -> bool {
        match self.family {
            Family::GaussianFull => self.decode_full(x).is_some(),
            Family::GaussianDiag => self.variances_diag(x).is_some(),
            Family::Multinomial => Self::simplex_point(x) && x.iter().all(|p| *p > 0.0),
        }
    }

    fn divergence_unchecked(&self, x: &[f64], y: &[f64]) -> f64 {
        match self.family {
            Family::GaussianFull => self.kl_full(x, y),
            Family::GaussianDiag => self.kl_diag(x, y),
            Family::Multinomial => Self::kl_multinomial(x, y),
        }
    }
}

/// The divergence model `B_{ψ*}` for a family over `data_dim` dimensions.
pub fn divergence_model_of(family: Family, data_dim: usize) -> ExpFamModel {
    ExpFamModel::new(family, data_dim)
}
