//! Dendrogram purity and tree-derived features.

use std::collections::HashMap;
use std::io::Write;

use rayon::prelude::*;

use crate::bregman::DivergenceModel;
use crate::cluster::{merge_cost, summarize, StatisticMap};
use crate::dendrogram::Dendrogram;
use crate::error::{Error, Result};
use crate::smoothing::Smoother;

/// Categorical labels for data `0..m`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabeledDataset {
    codes: Vec<u32>,
    names: Vec<String>,
}

impl LabeledDataset {
    pub fn new<S: AsRef<str>>(labels: &[S]) -> Result<Self> {
        if labels.is_empty() {
            return Err(Error::usage("label list is empty"));
        }
        let mut index: HashMap<&str, u32> = HashMap::new();
        let mut names = Vec::new();
        let codes = labels
            .iter()
            .map(|l| {
                let l = l.as_ref();
                *index.entry(l).or_insert_with(|| {
                    names.push(l.to_string());
                    (names.len() - 1) as u32
                })
            })
            .collect();
        Ok(LabeledDataset { codes, names })
    }

    pub fn len(&self) -> usize {
        self.codes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.codes.is_empty()
    }

    pub fn num_labels(&self) -> usize {
        self.names.len()
    }

    pub fn code(&self, i: usize) -> u32 {
        self.codes[i]
    }

    pub fn name(&self, code: u32) -> &str {
        &self.names[code as usize]
    }
}

/// Mean, over unordered pairs of points sharing a label `l`, of the fraction
/// of label `l` in the smallest cluster containing both.
///
/// Each internal node is the smallest common cluster for exactly the pairs
/// split across its two children, so the sum is accumulated per node from
/// per-label counts instead of per pair.
pub fn dendrogram_purity(tree: &Dendrogram, labels: &LabeledDataset) -> Result<f64> {
    let m = tree.num_leaves();
    if labels.len() != m {
        return Err(Error::usage(format!(
            "{} labels for a tree with {m} leaves",
            labels.len()
        )));
    }
    let nl = labels.num_labels();
    let mut per_label = vec![0u64; nl];
    for i in 0..m {
        per_label[labels.code(i) as usize] += 1;
    }
    let total_pairs: u64 = per_label.iter().map(|n| n * n.saturating_sub(1) / 2).sum();
    if total_pairs == 0 {
        return Err(Error::UndefinedMetric("no two points share a label".into()));
    }

    let mut counts: Vec<Option<Vec<u32>>> = Vec::with_capacity(tree.nodes().len());
    for i in 0..m {
        let mut c = vec![0u32; nl];
        c[labels.code(i) as usize] = 1;
        counts.push(Some(c));
    }
    let mut acc = 0.0;
    for node in tree.merges() {
        let (a, b) = node.children.expect("internal node");
        let ca = counts[a].take().expect("child counted once");
        let cb = counts[b].take().expect("child counted once");
        let size = (ca.iter().sum::<u32>() + cb.iter().sum::<u32>()) as f64;
        let mut merged = ca;
        for (l, nb) in cb.iter().enumerate() {
            let na = merged[l];
            if na > 0 && *nb > 0 {
                let pairs = na as f64 * *nb as f64;
                acc += pairs * (na + nb) as f64 / size;
            }
            merged[l] += nb;
        }
        counts.push(Some(merged));
    }
    Ok(acc / total_pairs as f64)
}

/// Features of `x` against the `k` clusters of `tree.cut(k)`:
/// `feature[i] = Δ(Cᵢ, {x})`, with `{x}` summarized through the same
/// smoothed statistic map used to build the tree.
pub fn tree_features<M: StatisticMap>(
    tree: &Dendrogram,
    k: usize,
    x: &M::Datum,
    model: &dyn DivergenceModel,
    map: &M,
    smoother: &Smoother,
) -> Result<Vec<f64>> {
    let clusters = tree.cut(k)?;
    let single = summarize(map, std::slice::from_ref(x), smoother, usize::MAX)?;
    clusters.iter().map(|c| merge_cost(model, c, &single)).collect()
}

/// One feature row per datum.
pub fn feature_matrix<M: StatisticMap>(
    tree: &Dendrogram,
    k: usize,
    data: &[M::Datum],
    model: &dyn DivergenceModel,
    map: &M,
    smoother: &Smoother,
) -> Result<Vec<Vec<f64>>> {
    let clusters = tree.cut(k)?;
    data.par_iter()
        .map(|x| {
            let single = summarize(map, std::slice::from_ref(x), smoother, usize::MAX)?;
            clusters.iter().map(|c| merge_cost(model, c, &single)).collect()
        })
        .collect()
}

/// CSV with header `f1,…,fk` and one row per datum.
pub fn write_features_csv<W: Write>(out: W, rows: &[Vec<f64>], k: usize) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let header: Vec<String> = (1..=k).map(|i| format!("f{i}")).collect();
    let map_err = |e: csv::Error| Error::Io(e.to_string());
    w.write_record(&header).map_err(map_err)?;
    for row in rows {
        let cells: Vec<String> = row
            .iter()
            .map(|v| if v.is_finite() { format!("{v:.16e}") } else { "inf".to_string() })
            .collect();
        w.write_record(&cells).map_err(map_err)?;
    }
    w.flush()?;
    Ok(())
}
