//! Statistic maps, cluster summaries, cluster cost and merge cost.
//!
//! A cluster is represented only by its size and mean statistic. The merge
//! cost is computed from those two numbers per side:
//! `Δ(C₁, C₂) = Σⱼ |Cⱼ| B(τ(Cⱼ), τ(C₁ ∪ C₂))`.
//! [`merge_cost_direct`] recomputes the growth in total cost from raw points
//! and serves as the reference for it.

use crate::bregman::{DivergenceModel, StatVec};
use crate::error::{check_dim, Error, Result};
use crate::smoothing::Smoother;

/// A bag of words: `(word index, count)` pairs sorted by index, counts > 0.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Document {
    pub counts: Vec<(usize, u32)>,
}

impl Document {
    /// Builds a document, summing duplicate indices and dropping zero counts.
    pub fn from_counts(pairs: impl IntoIterator<Item = (usize, u32)>) -> Self {
        let mut counts: Vec<(usize, u32)> = pairs.into_iter().filter(|(_, c)| *c > 0).collect();
        counts.sort_unstable_by_key(|(w, _)| *w);
        counts.dedup_by(|next, prev| {
            if next.0 == prev.0 {
                prev.1 += next.1;
                true
            } else {
                false
            }
        });
        Document { counts }
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().map(|(_, c)| *c as u64).sum()
    }
}

/// Embeds a datum into `ℝⁿ`. Sets are mapped by averaging.
pub trait StatisticMap: Send + Sync {
    type Datum: Sync;

    fn dim(&self) -> usize;

    fn stat(&self, x: &Self::Datum) -> Result<StatVec>;

    /// Number of observations a datum stands for; `τ(C)` is the weighted
    /// mean and `|C|` the total weight.
    fn weight(&self, _x: &Self::Datum) -> usize {
        1
    }
}

/// `τ(x) = x` on `ℝⁿ`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct IdentityMap {
    pub dim: usize,
}

impl StatisticMap for IdentityMap {
    type Datum = Vec<f64>;

    fn dim(&self) -> usize {
        self.dim
    }

    fn stat(&self, x: &Vec<f64>) -> Result<StatVec> {
        check_dim(self.dim, x.len())?;
        StatVec::new(x.clone())
    }
}

/// `τ(x) = (x, xxᵀ)`, or `(x, x ⊙ x)` when `diagonal`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GaussianMap {
    pub dim: usize,
    pub diagonal: bool,
}

impl StatisticMap for GaussianMap {
    type Datum = Vec<f64>;

    fn dim(&self) -> usize {
        if self.diagonal {
            2 * self.dim
        } else {
            self.dim + self.dim * self.dim
        }
    }

    fn stat(&self, x: &Vec<f64>) -> Result<StatVec> {
        check_dim(self.dim, x.len())?;
        let mut v = Vec::with_capacity(self.dim());
        v.extend_from_slice(x);
        if self.diagonal {
            v.extend(x.iter().map(|a| a * a));
        } else {
            for a in x {
                v.extend(x.iter().map(|b| a * b));
            }
        }
        StatVec::new(v)
    }
}

/// Each word occurrence is one observation with `τ = e_k`. A document is
/// summarized by its word distribution with weight equal to its length, so
/// `τ(C)` is the normalized aggregate count vector of the documents in `C`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct WordFrequencyMap {
    pub vocab: usize,
}

impl StatisticMap for WordFrequencyMap {
    type Datum = Document;

    fn dim(&self) -> usize {
        self.vocab
    }

    fn stat(&self, doc: &Document) -> Result<StatVec> {
        let total = doc.total();
        if total == 0 {
            return Err(Error::usage("document has no words"));
        }
        let mut v = vec![0.0; self.vocab];
        for &(w, c) in &doc.counts {
            if w >= self.vocab {
                return Err(Error::DimensionMismatch {
                    expected: self.vocab,
                    found: w + 1,
                });
            }
            v[w] += c as f64 / total as f64;
        }
        StatVec::new(v)
    }

    fn weight(&self, doc: &Document) -> usize {
        doc.total() as usize
    }
}

/// Size (total weight) and mean statistic of a cluster.
#[derive(Debug, Clone, PartialEq)]
pub struct ClusterSummary {
    pub id: usize,
    pub size: usize,
    pub stat: StatVec,
}

impl ClusterSummary {
    pub fn new(id: usize, size: usize, stat: StatVec) -> Result<Self> {
        if size == 0 {
            return Err(Error::usage("cluster size must be at least 1"));
        }
        Ok(ClusterSummary { id, size, stat })
    }
}

/// Mean of `τ` over `points`, then smoothed.
pub fn summarize<M: StatisticMap>(
    map: &M,
    points: &[M::Datum],
    smoother: &Smoother,
    id: usize,
) -> Result<ClusterSummary> {
    if points.is_empty() {
        return Err(Error::usage("cannot summarize an empty cluster"));
    }
    let mut acc = vec![0.0; map.dim()];
    let mut total = 0usize;
    for x in points {
        let s = map.stat(x)?;
        check_dim(acc.len(), s.dim())?;
        let w = map.weight(x);
        total += w;
        for (a, v) in acc.iter_mut().zip(s.iter()) {
            *a += w as f64 * v;
        }
    }
    if total == 0 {
        return Err(Error::usage("cluster has zero total weight"));
    }
    acc.iter_mut().for_each(|a| *a /= total as f64);
    let stat = smoother.apply(&StatVec::new(acc)?)?;
    ClusterSummary::new(id, total, stat)
}

#[inline]
fn weighted_mean(na: usize, a: &[f64], nb: usize, b: &[f64]) -> Vec<f64> {
    let (wa, wb) = (na as f64, nb as f64);
    let n = wa + wb;
    a.iter().zip(b).map(|(x, y)| (wa * x + wb * y) / n).collect()
}

/// Summary of `a ∪ b` under the fresh id `id`.
pub fn merge_summaries(a: &ClusterSummary, b: &ClusterSummary, id: usize) -> Result<ClusterSummary> {
    check_dim(a.stat.dim(), b.stat.dim())?;
    let stat = weighted_mean(a.size, &a.stat, b.size, &b.stat);
    ClusterSummary::new(id, a.size + b.size, StatVec::from_vec_unchecked(stat))
}

/// `φ(C) = Σ_{x∈C} w(x) B(τ(x), τ(C))`, with the smoothed map on both sides.
///
/// Returns `+inf` when the center lies on the relative boundary.
pub fn cluster_cost<M: StatisticMap>(
    model: &dyn DivergenceModel,
    map: &M,
    points: &[M::Datum],
    smoother: &Smoother,
) -> Result<f64> {
    let center = summarize(map, points, smoother, 0)?;
    check_dim(model.dim(), center.stat.dim())?;
    let mut total = 0.0;
    for x in points {
        let s = smoother.apply(&map.stat(x)?)?;
        total += map.weight(x) as f64 * model.divergence_unchecked(&s, &center.stat);
    }
    Ok(if total.is_nan() { f64::INFINITY } else { total })
}

#[inline]
pub(crate) fn merge_cost_unchecked(model: &dyn DivergenceModel, a: &ClusterSummary, b: &ClusterSummary) -> f64 {
    let merged = weighted_mean(a.size, &a.stat, b.size, &b.stat);
    let da = model.divergence_unchecked(&a.stat, &merged);
    let db = model.divergence_unchecked(&b.stat, &merged);
    let cost = a.size as f64 * da + b.size as f64 * db;
    if cost.is_nan() {
        f64::INFINITY
    } else {
        cost
    }
}

/// `Δ(a, b) = |a| B(τ_a, τ_{a∪b}) + |b| B(τ_b, τ_{a∪b})`; `+inf` when either
/// center is outside `ri(dom(f))`.
pub fn merge_cost(model: &dyn DivergenceModel, a: &ClusterSummary, b: &ClusterSummary) -> Result<f64> {
    check_dim(model.dim(), a.stat.dim())?;
    check_dim(model.dim(), b.stat.dim())?;
    Ok(merge_cost_unchecked(model, a, b))
}

/// `φ(C₁ ∪ C₂) - φ(C₁) - φ(C₂)` recomputed from the points.
pub fn merge_cost_direct<M>(
    model: &dyn DivergenceModel,
    map: &M,
    c1: &[M::Datum],
    c2: &[M::Datum],
    smoother: &Smoother,
) -> Result<f64>
where
    M: StatisticMap,
    M::Datum: Clone,
{
    if c1.is_empty() || c2.is_empty() {
        return Err(Error::usage("merge_cost_direct needs two nonempty clusters"));
    }
    let union: Vec<M::Datum> = c1.iter().chain(c2).cloned().collect();
    let whole = cluster_cost(model, map, &union, smoother)?;
    let p1 = cluster_cost(model, map, c1, smoother)?;
    let p2 = cluster_cost(model, map, c2, smoother)?;
    if !(whole.is_finite() && p1.is_finite() && p2.is_finite()) {
        return Ok(f64::INFINITY);
    }
    Ok(whole - p1 - p2)
}
