//! Bregman divergences for convex generators that need not be differentiable.
//!
//! For a convex `f` the divergence is `B_f(x, y) = f(x) - f(y) + f'(y; y - x)`,
//! using the one-sided directional derivative in place of a gradient. Each
//! model ships this in closed form, so no subgradient sets are materialized.
//! Divergences are extended reals: a second argument on the relative
//! boundary of `dom(f)` yields `f64::INFINITY`, which is a value, not an error.

use std::fmt;
use std::ops::Deref;

use crate::error::{check_dim, Error, Result};

/// A finite real vector; the image of a statistic map.
#[derive(Clone, PartialEq)]
pub struct StatVec(Vec<f64>);

impl StatVec {
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        if coords.is_empty() {
            return Err(Error::usage("statistic vectors need dimension >= 1"));
        }
        if let Some(i) = coords.iter().position(|c| !c.is_finite()) {
            return Err(Error::usage(format!(
                "coordinate {i} is not finite ({})",
                coords[i]
            )));
        }
        Ok(StatVec(coords))
    }

    /// Skips the finiteness scan; for values derived from existing `StatVec`s.
    pub(crate) fn from_vec_unchecked(coords: Vec<f64>) -> Self {
        debug_assert!(!coords.is_empty());
        StatVec(coords)
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }
}

impl Deref for StatVec {
    type Target = [f64];

    fn deref(&self) -> &[f64] {
        &self.0
    }
}

impl fmt::Debug for StatVec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.0.iter()).finish()
    }
}

impl TryFrom<Vec<f64>> for StatVec {
    type Error = Error;

    fn try_from(v: Vec<f64>) -> Result<Self> {
        StatVec::new(v)
    }
}

impl TryFrom<&[f64]> for StatVec {
    type Error = Error;

    fn try_from(v: &[f64]) -> Result<Self> {
        StatVec::new(v.to_vec())
    }
}

/// A convex generator `f` together with its closed-form divergence.
pub trait DivergenceModel: Send + Sync + fmt::Debug {
    fn name(&self) -> &str;

    fn dim(&self) -> usize;

    /// `f(x)`, `+inf` outside `dom(f)`.
    fn value(&self, x: &[f64]) -> f64;

    fn in_domain(&self, x: &[f64]) -> bool;

    fn in_relative_interior(&self, x: &[f64]) -> bool;

    /// Closed-form `B_f(x, y)` without argument validation.
    ///
    /// Callers guarantee matching dimensions. Returns `+inf` whenever
    /// `y` is not in `ri(dom(f))` or `x` is not in `dom(f)`; never NaN.
    fn divergence_unchecked(&self, x: &[f64], y: &[f64]) -> f64;

    /// The Fenchel conjugate `f*(g)`, when the model has one in closed form.
    fn conjugate(&self, _g: &[f64]) -> Option<f64> {
        None
    }

    /// `B_f(x, y)` with dimension and domain checks.
    fn divergence(&self, x: &StatVec, y: &StatVec) -> Result<f64> {
        check_dim(self.dim(), x.dim())?;
        check_dim(self.dim(), y.dim())?;
        if !self.in_domain(x) {
            return Err(Error::domain(self.name(), "first argument lies outside dom(f)"));
        }
        if !self.in_relative_interior(y) {
            return Ok(f64::INFINITY);
        }
        Ok(self.divergence_unchecked(x, y))
    }
}

/// `f = ‖·‖²₂`; the divergence is squared Euclidean distance.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SquaredEuclidean {
    dim: usize,
}

impl SquaredEuclidean {
    pub fn new(dim: usize) -> Self {
        assert!(dim >= 1, "dimension must be positive");
        SquaredEuclidean { dim }
    }
}

impl DivergenceModel for SquaredEuclidean {
    fn name(&self) -> &str {
        "squared-euclidean"
    }

    fn dim(&self) -> usize {
        self.dim
    }

    fn value(&self, x: &[f64]) -> f64 {
        x.iter().map(|v| v * v).sum()
    }

    fn in_domain(&self, _x: &[f64]) -> bool {
        true
    }

    fn in_relative_interior(&self, _x: &[f64]) -> bool {
        true
    }

    fn divergence_unchecked(&self, x: &[f64], y: &[f64]) -> f64 {
        x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum()
    }

    fn conjugate(&self, g: &[f64]) -> Option<f64> {
        Some(g.iter().map(|v| v * v).sum::<f64>() / 4.0)
    }
}

/// `f = ‖·‖₁`, nondifferentiable wherever a coordinate is zero.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct L1 {
    dim: usize,
}

impl L1 {
    pub fn new(dim: usize) -> Self {
        assert!(dim >= 1, "dimension must be positive");
        L1 { dim }
    }
}

/// Univariate divergence of `|·|`: zero when `x` and `y` share a strict
/// sign, `2|x|` otherwise (including `xy = 0`).
#[inline]
pub fn abs_divergence(x: f64, y: f64) -> f64 {
    if x * y > 0.0 {
        0.0
    } else {
        2.0 * x.abs()
    }
}

impl DivergenceModel for L1 {
    fn name(&self) -> &str {
        "l1"
    }

    fn dim(&self) -> usize {
        self.dim
    }

    fn value(&self, x: &[f64]) -> f64 {
        x.iter().map(|v| v.abs()).sum()
    }

    fn in_domain(&self, _x: &[f64]) -> bool {
        true
    }

    fn in_relative_interior(&self, _x: &[f64]) -> bool {
        true
    }

    fn divergence_unchecked(&self, x: &[f64], y: &[f64]) -> f64 {
        x.iter().zip(y).map(|(&a, &b)| abs_divergence(a, b)).sum()
    }

    /// Indicator of the unit `ℓ∞` ball.
    fn conjugate(&self, g: &[f64]) -> Option<f64> {
        if g.iter().all(|v| v.abs() <= 1.0) {
            Some(0.0)
        } else {
            Some(f64::INFINITY)
        }
    }
}

/// `B_{‖·‖₁}(x, y)`: twice the `ℓ¹` distance from `x` to the farthest
/// orthant containing `y`.
pub fn l1_divergence(x: &StatVec, y: &StatVec) -> Result<f64> {
    check_dim(x.dim(), y.dim())?;
    Ok(x.iter().zip(y.iter()).map(|(&a, &b)| abs_divergence(a, b)).sum())
}

/// Gordon's divergence `D_f(x, g) = f(x) + f*(g) - ⟨g, x⟩` against a dual
/// element `g`. Requires a model with a closed-form conjugate.
pub fn gordon_divergence(model: &dyn DivergenceModel, x: &StatVec, g: &StatVec) -> Result<f64> {
    check_dim(model.dim(), x.dim())?;
    check_dim(model.dim(), g.dim())?;
    if !model.in_domain(x) {
        return Err(Error::domain(model.name(), "first argument lies outside dom(f)"));
    }
    let conj = model.conjugate(g).ok_or_else(|| Error::Unsupported {
        model: model.name().to_string(),
        op: "conjugate".to_string(),
    })?;
    let inner: f64 = g.iter().zip(x.iter()).map(|(a, b)| a * b).sum();
    Ok(model.value(x) + conj - inner)
}
