//! Agglomerative clustering under Bregman divergences.
//!
//! A cluster is summarized by its size and the mean of a statistic map
//! `τ` over its points. Merging `C₁` and `C₂` costs
//! `Σⱼ |Cⱼ| B(τ(Cⱼ), τ(C₁ ∪ C₂))`, which for squared Euclidean distance is
//! Ward's criterion and for exponential families is the drop in maximum
//! log-likelihood. Optional smoothing keeps statistics in the interior of
//! the domain so divergences stay finite.
//!
//! ```
//! use bregtree::{Dataset, ModelKind, Pipeline, SmoothingChoice, Strategy};
//!
//! let data = Dataset::Points(vec![vec![0.0], vec![1.0], vec![10.0]]);
//! let p = Pipeline::new(ModelKind::Kmeans, &data, SmoothingChoice::Auto, 1.0).unwrap();
//! let (tree, _) = p.cluster(&data, Strategy::Heap).unwrap();
//! assert_eq!(tree.merges()[0].children, Some((0, 1)));
//! ```

// Negated float comparisons are used on purpose so that NaN fails checks.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod agglomerate;
pub mod bregman;
pub mod cluster;
pub mod dendrogram;
pub mod error;
pub mod eval;
pub mod expfam;
pub mod io;
mod linalg;
pub mod pipeline;
pub mod smoothing;

pub use agglomerate::{agglomerate, agglomerate_summaries, agglomerate_with_stats, MergeCandidate, RunStats, Strategy};
pub use bregman::{gordon_divergence, l1_divergence, DivergenceModel, SquaredEuclidean, StatVec, L1};
pub use cluster::{
    cluster_cost, merge_cost, merge_cost_direct, merge_summaries, summarize, ClusterSummary, Document, GaussianMap,
    IdentityMap, StatisticMap, WordFrequencyMap,
};
pub use dendrogram::{Dendrogram, Node};
pub use error::{Error, Result};
pub use eval::{dendrogram_purity, feature_matrix, tree_features, write_features_csv, LabeledDataset};
pub use expfam::{divergence_model_of, CanonicalParams, ExpFamModel, Family, GaussianMeanParams, MultinomialMeanParams};
pub use pipeline::{Dataset, ModelKind, Pipeline, SmoothingChoice};
pub use smoothing::{BandwidthMode, GaussianBandwidth, Smoother, SmoothingMode};
