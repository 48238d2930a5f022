//! Smoothing statistic maps.
//!
//! A smoothing map pushes statistics from the closure of a convex set `S`
//! into its relative interior, either by a convex combination with an
//! interior anchor, `(1 - α)τ + αz`, or, when `S` is a convex cone, by
//! adding an interior element, `τ + αz`. Both are affine with fixed `(α, z)`,
//! so smoothing leaves-then-averaging equals averaging-then-smoothing and the
//! center-only merge cost stays exact.

use crate::bregman::StatVec;
use crate::error::{check_dim, Error, Result};
use crate::expfam::{Family, GaussianMeanParams, MultinomialMeanParams};

/// Weight used for cone smoothers; only the product `αz` matters there.
pub const CONE_ALPHA: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SmoothingMode {
    None,
    Convex,
    Cone,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Smoother {
    mode: SmoothingMode,
    anchor: Option<StatVec>,
    alpha: f64,
    m_total: usize,
}

fn check_alpha(alpha: f64) -> Result<()> {
    if alpha > 0.0 && alpha < 1.0 {
        Ok(())
    } else {
        Err(Error::usage(format!("smoothing weight must lie in (0, 1), got {alpha}")))
    }
}

impl Smoother {
    pub fn none() -> Self {
        Smoother {
            mode: SmoothingMode::None,
            anchor: None,
            alpha: 0.0,
            m_total: 1,
        }
    }

    pub fn convex(anchor: StatVec, alpha: f64, m_total: usize) -> Result<Self> {
        check_alpha(alpha)?;
        Ok(Smoother {
            mode: SmoothingMode::Convex,
            anchor: Some(anchor),
            alpha,
            m_total: m_total.max(1),
        })
    }

    pub fn cone(anchor: StatVec, alpha: f64, m_total: usize) -> Result<Self> {
        check_alpha(alpha)?;
        Ok(Smoother {
            mode: SmoothingMode::Cone,
            anchor: Some(anchor),
            alpha,
            m_total: m_total.max(1),
        })
    }

    /// Bernstein-style smoothing toward the uniform distribution over `n`
    /// words, sized by the total number of observations `m_total`.
    pub fn multinomial(n: usize, m_total: usize) -> Self {
        let eps = bernstein_epsilon(m_total.max(1), n);
        let alpha = n as f64 * eps / (1.0 + n as f64 * eps);
        let anchor = StatVec::from_vec_unchecked(vec![1.0 / n as f64; n]);
        Smoother {
            mode: SmoothingMode::Convex,
            anchor: Some(anchor),
            alpha,
            m_total: m_total.max(1),
        }
    }

    /// Cone smoother adding `diag(h²)` to the second-moment block of a
    /// Gaussian statistic in the layout of `family`.
    pub fn gaussian(family: Family, bandwidth: &GaussianBandwidth) -> Result<Self> {
        let d = bandwidth.h.len();
        let h2 = bandwidth.h.iter().map(|h| h * h);
        let mut z = vec![0.0; d];
        match family {
            Family::GaussianFull => {
                let mut block = vec![0.0; d * d];
                for (i, v) in h2.enumerate() {
                    block[i * d + i] = v / CONE_ALPHA;
                }
                z.extend(block);
            }
            Family::GaussianDiag => z.extend(h2.map(|v| v / CONE_ALPHA)),
            Family::Multinomial => {
                return Err(Error::usage("bandwidth smoothing applies to Gaussian families"))
            }
        }
        Smoother::cone(StatVec::new(z)?, CONE_ALPHA, bandwidth.m)
    }

    pub fn mode(&self) -> SmoothingMode {
        self.mode
    }

    pub fn is_enabled(&self) -> bool {
        self.mode != SmoothingMode::None
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn anchor(&self) -> Option<&StatVec> {
        self.anchor.as_ref()
    }

    pub fn m_total(&self) -> usize {
        self.m_total
    }

    pub fn apply(&self, stat: &StatVec) -> Result<StatVec> {
        match (&self.mode, &self.anchor) {
            (SmoothingMode::None, _) | (_, None) => Ok(stat.clone()),
            (SmoothingMode::Convex, Some(z)) => smooth_convex(stat, z, self.alpha),
            (SmoothingMode::Cone, Some(z)) => smooth_cone(stat, z, self.alpha),
        }
    }
}

impl Default for Smoother {
    fn default() -> Self {
        Smoother::none()
    }
}

/// `(1 - α)·stat + α·z`.
pub fn smooth_convex(stat: &StatVec, z: &StatVec, alpha: f64) -> Result<StatVec> {
    check_alpha(alpha)?;
    check_dim(z.dim(), stat.dim())?;
    Ok(StatVec::from_vec_unchecked(
        stat.iter()
            .zip(z.iter())
            .map(|(s, a)| (1.0 - alpha) * s + alpha * a)
            .collect(),
    ))
}

/// `stat + α·z`, for sets that are convex cones.
pub fn smooth_cone(stat: &StatVec, z: &StatVec, alpha: f64) -> Result<StatVec> {
    check_alpha(alpha)?;
    check_dim(z.dim(), stat.dim())?;
    Ok(StatVec::from_vec_unchecked(
        stat.iter().zip(z.iter()).map(|(s, a)| s + alpha * a).collect(),
    ))
}

/// Upper-confidence perturbation `1/m + √(p(1-p)/m)` with `p = 1/n`.
pub fn bernstein_epsilon(m: usize, n: usize) -> f64 {
    let m = m.max(1) as f64;
    let p = 1.0 / n.max(1) as f64;
    1.0 / m + (p * (1.0 - p) / m).sqrt()
}

/// Adds `ε(m)` to every coordinate and renormalizes onto the simplex.
pub fn multinomial_smoother(mean: &MultinomialMeanParams, m: usize, n: usize) -> MultinomialMeanParams {
    let eps = bernstein_epsilon(m, n);
    let raised: Vec<f64> = mean.probs.iter().map(|p| p + eps).collect();
    let total: f64 = raised.iter().sum();
    MultinomialMeanParams {
        probs: raised.into_iter().map(|p| p / total).collect(),
    }
}

/// Normal-reference bandwidth `σ̂ (4 / ((d + 2) m))^{1/(d + 4)}`.
pub fn normal_reference_bandwidth(sigma: f64, m: usize, d: usize) -> f64 {
    let (m, d) = (m.max(1) as f64, d as f64);
    sigma * (4.0 / ((d + 2.0) * m)).powf(1.0 / (d + 4.0))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BandwidthMode {
    /// One bandwidth per coordinate (the `-nd` variant).
    PerCoordinate,
    /// A single bandwidth from the mean coordinate deviation (the `-n` variant).
    Uniform,
}

/// Per-coordinate bandwidths `hᵢ` estimated once from the full dataset.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianBandwidth {
    pub h: Vec<f64>,
    pub m: usize,
}

impl GaussianBandwidth {
    pub fn from_data(data: &[Vec<f64>], mode: BandwidthMode, scale: f64) -> Result<Self> {
        let first = data.first().ok_or_else(|| Error::usage("bandwidth needs at least one point"))?;
        let d = first.len();
        let m = data.len();
        if !(scale > 0.0) || !scale.is_finite() {
            return Err(Error::usage(format!("bandwidth scale must be positive, got {scale}")));
        }
        let sd = coordinate_std(data, d)?;
        let h = match mode {
            BandwidthMode::PerCoordinate => sd
                .iter()
                .map(|s| scale * normal_reference_bandwidth(*s, m, d))
                .collect(),
            BandwidthMode::Uniform => {
                let mean_sd = sd.iter().sum::<f64>() / d as f64;
                vec![scale * normal_reference_bandwidth(mean_sd, m, d); d]
            }
        };
        Ok(GaussianBandwidth { h, m })
    }
}

/// Sample standard deviation per coordinate. Coordinates with zero spread
/// (or a single point) fall back to 1 so the bandwidth stays positive.
fn coordinate_std(data: &[Vec<f64>], d: usize) -> Result<Vec<f64>> {
    let m = data.len() as f64;
    let mut mean = vec![0.0; d];
    for x in data {
        check_dim(d, x.len())?;
        for (a, v) in mean.iter_mut().zip(x) {
            *a += v / m;
        }
    }
    let mut var = vec![0.0; d];
    for x in data {
        for ((s, v), mu) in var.iter_mut().zip(x).zip(&mean) {
            *s += (v - mu) * (v - mu);
        }
    }
    Ok(var
        .into_iter()
        .map(|s| {
            let sd = if data.len() > 1 { (s / (m - 1.0)).sqrt() } else { 0.0 };
            if sd > 0.0 && sd.is_finite() {
                sd
            } else {
                1.0
            }
        })
        .collect())
}

/// Adds `diag(h²)` to the covariance (equivalently the second moment).
pub fn gaussian_smoother(mean: &GaussianMeanParams, bandwidth: &GaussianBandwidth) -> Result<GaussianMeanParams> {
    let d = mean.dim();
    check_dim(d, bandwidth.h.len())?;
    let mut out = mean.clone();
    for (i, h) in bandwidth.h.iter().enumerate() {
        out.second_moment[i * d + i] += h * h;
    }
    Ok(out)
}
