//! Model selection and end-to-end runs shared by the command line and the
//! Python bindings.

use std::fmt;
use std::str::FromStr;

use crate::agglomerate::{agglomerate_with_stats, RunStats, Strategy};
use crate::bregman::{DivergenceModel, SquaredEuclidean, L1};
use crate::cluster::{Document, GaussianMap, IdentityMap, WordFrequencyMap};
use crate::dendrogram::Dendrogram;
use crate::error::{Error, Result};
use crate::eval::feature_matrix;
use crate::expfam::{ExpFamModel, Family};
use crate::smoothing::{BandwidthMode, GaussianBandwidth, Smoother};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ModelKind {
    /// Squared Euclidean distance on raw points (Ward linkage).
    Kmeans,
    L1,
    GaussianFull,
    GaussianDiag,
    Multinomial,
}

impl ModelKind {
    pub const ALL: [ModelKind; 5] = [
        ModelKind::Kmeans,
        ModelKind::L1,
        ModelKind::GaussianFull,
        ModelKind::GaussianDiag,
        ModelKind::Multinomial,
    ];

    pub fn tag(self) -> &'static str {
        match self {
            ModelKind::Kmeans => "kmeans",
            ModelKind::L1 => "l1",
            ModelKind::GaussianFull => "gaussian-full",
            ModelKind::GaussianDiag => "gaussian-diag",
            ModelKind::Multinomial => "multinomial",
        }
    }

    pub fn needs_documents(self) -> bool {
        self == ModelKind::Multinomial
    }

    pub fn stat_layout(self) -> &'static str {
        match self {
            ModelKind::Kmeans | ModelKind::L1 => "point",
            ModelKind::GaussianFull => "mean[d] ++ second_moment[d*d] (row-major E[x x^T])",
            ModelKind::GaussianDiag => "mean[d] ++ second_moment_diag[d] (E[x_i^2])",
            ModelKind::Multinomial => "word_probs[n] (sorted vocabulary order)",
        }
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl FromStr for ModelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ModelKind::ALL
            .into_iter()
            .find(|k| k.tag() == s)
            .ok_or_else(|| Error::usage(format!("unknown model {s:?}")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SmoothingChoice {
    /// Per-model default: none for `kmeans`/`l1`, uniform bandwidth for
    /// `gaussian-full`, per-coordinate bandwidth for `gaussian-diag`, and
    /// additive smoothing toward uniform for `multinomial`.
    #[default]
    Auto,
    None,
}

impl FromStr for SmoothingChoice {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "auto" => Ok(SmoothingChoice::Auto),
            "none" => Ok(SmoothingChoice::None),
            other => Err(Error::usage(format!("unknown smoothing {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Dataset {
    Points(Vec<Vec<f64>>),
    Documents { docs: Vec<Document>, vocab: Vec<String> },
}

impl Dataset {
    pub fn len(&self) -> usize {
        match self {
            Dataset::Points(p) => p.len(),
            Dataset::Documents { docs, .. } => docs.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Point dimension or vocabulary size.
    pub fn dim(&self) -> usize {
        match self {
            Dataset::Points(p) => p.first().map_or(0, Vec::len),
            Dataset::Documents { vocab, .. } => vocab.len(),
        }
    }

    fn check(&self) -> Result<()> {
        if self.is_empty() {
            return Err(Error::usage("dataset is empty"));
        }
        match self {
            Dataset::Points(p) => {
                let d = self.dim();
                if d == 0 {
                    return Err(Error::usage("points have dimension 0"));
                }
                if let Some((i, x)) = p.iter().enumerate().find(|(_, x)| x.len() != d) {
                    return Err(Error::usage(format!("point {i} has dimension {}, expected {d}", x.len())));
                }
            }
            Dataset::Documents { docs, vocab } => {
                if vocab.is_empty() {
                    return Err(Error::usage("vocabulary is empty"));
                }
                if let Some(i) = docs.iter().position(|d| d.total() == 0) {
                    return Err(Error::usage(format!("document {i} has no words")));
                }
            }
        }
        Ok(())
    }
}

/// A configured divergence, statistic map and smoother for one dataset.
#[derive(Debug)]
pub struct Pipeline {
    kind: ModelKind,
    dim: usize,
    model: Box<dyn DivergenceModel>,
    smoother: Smoother,
}

impl Pipeline {
    /// `bandwidth_scale` multiplies the estimated Gaussian bandwidth and is
    /// ignored by the other models.
    pub fn new(kind: ModelKind, data: &Dataset, smoothing: SmoothingChoice, bandwidth_scale: f64) -> Result<Self> {
        match (kind.needs_documents(), data) {
            (true, Dataset::Points(_)) => {
                return Err(Error::usage(format!("model {kind} needs bag-of-words input")))
            }
            (false, Dataset::Documents { .. }) => {
                return Err(Error::usage(format!("model {kind} needs numeric csv input")))
            }
            _ => {}
        }
        data.check()?;
        if !(bandwidth_scale > 0.0 && bandwidth_scale.is_finite()) {
            return Err(Error::usage(format!("bandwidth scale must be positive, got {bandwidth_scale}")));
        }
        let dim = data.dim();
        let model: Box<dyn DivergenceModel> = match kind {
            ModelKind::Kmeans => Box::new(SquaredEuclidean::new(dim)),
            ModelKind::L1 => Box::new(L1::new(dim)),
            ModelKind::GaussianFull => Box::new(ExpFamModel::gaussian_full(dim)),
            ModelKind::GaussianDiag => Box::new(ExpFamModel::gaussian_diag(dim)),
            ModelKind::Multinomial => Box::new(ExpFamModel::multinomial(dim)),
        };
        let smoother = match (smoothing, kind, data) {
            (SmoothingChoice::None, ..) | (_, ModelKind::Kmeans | ModelKind::L1, _) => Smoother::none(),
            (SmoothingChoice::Auto, ModelKind::GaussianFull, Dataset::Points(p)) => {
                let bw = GaussianBandwidth::from_data(p, BandwidthMode::Uniform, bandwidth_scale)?;
                Smoother::gaussian(Family::GaussianFull, &bw)?
            }
            (SmoothingChoice::Auto, ModelKind::GaussianDiag, Dataset::Points(p)) => {
                let bw = GaussianBandwidth::from_data(p, BandwidthMode::PerCoordinate, bandwidth_scale)?;
                Smoother::gaussian(Family::GaussianDiag, &bw)?
            }
            (SmoothingChoice::Auto, ModelKind::Multinomial, Dataset::Documents { docs, .. }) => {
                let tokens: u64 = docs.iter().map(Document::total).sum();
                Smoother::multinomial(dim, usize::try_from(tokens).unwrap_or(usize::MAX))
            }
            _ => unreachable!("model/format pairing checked above"),
        };
        Ok(Pipeline { kind, dim, model, smoother })
    }

    pub fn kind(&self) -> ModelKind {
        self.kind
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn model(&self) -> &dyn DivergenceModel {
        self.model.as_ref()
    }

    pub fn smoother(&self) -> &Smoother {
        &self.smoother
    }

    fn check_compatible(&self, data: &Dataset) -> Result<()> {
        match (self.kind.needs_documents(), data) {
            (true, Dataset::Documents { .. }) | (false, Dataset::Points(_)) => {}
            _ => return Err(Error::usage(format!("dataset format does not match model {}", self.kind))),
        }
        data.check()?;
        if data.dim() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: data.dim(),
            });
        }
        Ok(())
    }

    pub fn cluster(&self, data: &Dataset, strategy: Strategy) -> Result<(Dendrogram, RunStats)> {
        self.check_compatible(data)?;
        let model = self.model();
        let (tree, stats) = match (self.kind, data) {
            (ModelKind::Kmeans | ModelKind::L1, Dataset::Points(p)) => {
                agglomerate_with_stats(p, model, &IdentityMap { dim: self.dim }, &self.smoother, strategy)?
            }
            (ModelKind::GaussianFull | ModelKind::GaussianDiag, Dataset::Points(p)) => {
                let map = GaussianMap {
                    dim: self.dim,
                    diagonal: self.kind == ModelKind::GaussianDiag,
                };
                agglomerate_with_stats(p, model, &map, &self.smoother, strategy)?
            }
            (ModelKind::Multinomial, Dataset::Documents { docs, .. }) => {
                agglomerate_with_stats(docs, model, &WordFrequencyMap { vocab: self.dim }, &self.smoother, strategy)?
            }
            _ => unreachable!("checked by check_compatible"),
        };
        let tree = tree.with_model(self.kind.tag()).with_stat_layout(self.kind.stat_layout());
        Ok((tree, stats))
    }

    /// Feature rows for `data` against the top-`k` clusters of `tree`.
    pub fn features(&self, tree: &Dendrogram, k: usize, data: &Dataset) -> Result<Vec<Vec<f64>>> {
        self.check_compatible(data)?;
        let model = self.model();
        match (self.kind, data) {
            (ModelKind::Kmeans | ModelKind::L1, Dataset::Points(p)) => {
                feature_matrix(tree, k, p, model, &IdentityMap { dim: self.dim }, &self.smoother)
            }
            (ModelKind::GaussianFull | ModelKind::GaussianDiag, Dataset::Points(p)) => {
                let map = GaussianMap {
                    dim: self.dim,
                    diagonal: self.kind == ModelKind::GaussianDiag,
                };
                feature_matrix(tree, k, p, model, &map, &self.smoother)
            }
            (ModelKind::Multinomial, Dataset::Documents { docs, .. }) => {
                feature_matrix(tree, k, docs, model, &WordFrequencyMap { vocab: self.dim }, &self.smoother)
            }
            _ => unreachable!("checked by check_compatible"),
        }
    }
}
