//! Greedy agglomeration under the center-based merge cost.
//!
//! Every step merges the pair with the smallest key `(cost, smaller id,
//! larger id)`, compared exactly (costs via `f64::total_cmp`, so `+inf`
//! sorts after every finite cost). Two strategies produce the same tree:
//!
//! * [`Strategy::Brute`] rescans all live pairs each step: `O(m)` memory,
//!   `O(m³ T_Δ)` time.
//! * [`Strategy::Heap`] keeps every candidate in a global min-heap with lazy
//!   invalidation: `O(m²)` memory, `O(m² (lg m + T_Δ))` time.
//!
//! Cost batches are evaluated on the rayon pool and committed in id order
//! before selection, so the result does not depend on the thread count.

use std::cmp::{Ordering, Reverse};
use std::collections::BinaryHeap;

use rayon::prelude::*;

use crate::bregman::DivergenceModel;
use crate::cluster::{merge_cost_unchecked, merge_summaries, summarize, ClusterSummary, StatisticMap};
use crate::dendrogram::Dendrogram;
use crate::error::{check_dim, Error, Result};
use crate::smoothing::Smoother;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Strategy {
    Brute,
    #[default]
    Heap,
}

impl std::str::FromStr for Strategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "brute" => Ok(Strategy::Brute),
            "heap" => Ok(Strategy::Heap),
            other => Err(Error::usage(format!("unknown strategy {other:?}"))),
        }
    }
}

impl std::fmt::Display for Strategy {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Strategy::Brute => "brute",
            Strategy::Heap => "heap",
        })
    }
}

/// Counters collected during a run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct RunStats {
    pub merges: usize,
    pub cost_evaluations: u64,
    /// Evaluations that came back `+inf`.
    pub infinite_costs: u64,
    pub heap_pushes: u64,
    pub stale_pops: u64,
    /// Largest number of candidates held at once (0 for brute force).
    pub peak_candidates: usize,
}

/// A candidate merge ordered by `(cost, i, j)`.
#[derive(Debug, Clone, Copy)]
pub struct MergeCandidate {
    pub cost: f64,
    pub i: u32,
    pub j: u32,
}

impl PartialEq for MergeCandidate {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for MergeCandidate {}

impl PartialOrd for MergeCandidate {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for MergeCandidate {
    fn cmp(&self, other: &Self) -> Ordering {
        self.cost
            .total_cmp(&other.cost)
            .then(self.i.cmp(&other.i))
            .then(self.j.cmp(&other.j))
    }
}

fn candidate(model: &dyn DivergenceModel, a: &ClusterSummary, b: &ClusterSummary) -> MergeCandidate {
    debug_assert!(a.id < b.id);
    MergeCandidate {
        cost: merge_cost_unchecked(model, a, b),
        i: a.id as u32,
        j: b.id as u32,
    }
}

fn tally(stats: &mut RunStats, batch: &[MergeCandidate]) {
    stats.cost_evaluations += batch.len() as u64;
    stats.infinite_costs += batch.iter().filter(|c| c.cost == f64::INFINITY).count() as u64;
}

/// Clusters raw data: summarizes each datum as a smoothed singleton, then
/// agglomerates the summaries.
pub fn agglomerate<M: StatisticMap>(
    data: &[M::Datum],
    model: &dyn DivergenceModel,
    map: &M,
    smoother: &Smoother,
    strategy: Strategy,
) -> Result<Dendrogram> {
    agglomerate_with_stats(data, model, map, smoother, strategy).map(|(t, _)| t)
}

pub fn agglomerate_with_stats<M: StatisticMap>(
    data: &[M::Datum],
    model: &dyn DivergenceModel,
    map: &M,
    smoother: &Smoother,
    strategy: Strategy,
) -> Result<(Dendrogram, RunStats)> {
    if data.is_empty() {
        return Err(Error::usage("agglomeration needs at least one datum"));
    }
    let leaves = data
        .par_iter()
        .enumerate()
        .map(|(i, x)| summarize(map, std::slice::from_ref(x), smoother, i))
        .collect::<Result<Vec<_>>>()?;
    agglomerate_summaries(leaves, model, strategy)
}

/// Agglomerates precomputed leaf summaries; their ids are reassigned to
/// `0..m` in input order.
pub fn agglomerate_summaries(
    mut leaves: Vec<ClusterSummary>,
    model: &dyn DivergenceModel,
    strategy: Strategy,
) -> Result<(Dendrogram, RunStats)> {
    if leaves.is_empty() {
        return Err(Error::usage("agglomeration needs at least one datum"));
    }
    if leaves.len() > (u32::MAX / 2) as usize {
        return Err(Error::usage("too many data for 32-bit cluster ids"));
    }
    for (i, l) in leaves.iter_mut().enumerate() {
        check_dim(model.dim(), l.stat.dim())?;
        l.id = i;
    }
    let tree = Dendrogram::from_leaves(leaves, model.name());
    Ok(match strategy {
        Strategy::Brute => run_brute(tree, model),
        Strategy::Heap => run_heap(tree, model),
    })
}

fn run_brute(mut tree: Dendrogram, model: &dyn DivergenceModel) -> (Dendrogram, RunStats) {
    let mut stats = RunStats::default();
    // Live clusters, kept in ascending id order.
    let mut live: Vec<ClusterSummary> = tree.nodes().iter().map(|n| n.summary.clone()).collect();
    while live.len() > 1 {
        let n = live.len();
        let best_per_row: Vec<(MergeCandidate, u64, u64)> = (0..n - 1)
            .into_par_iter()
            .map(|r| {
                let mut best: Option<MergeCandidate> = None;
                let mut inf = 0;
                for c in (r + 1)..n {
                    let cand = candidate(model, &live[r], &live[c]);
                    if cand.cost == f64::INFINITY {
                        inf += 1;
                    }
                    if best.is_none_or(|b| cand < b) {
                        best = Some(cand);
                    }
                }
                (best.expect("row has a partner"), (n - r - 1) as u64, inf)
            })
            .collect();
        let mut best = best_per_row[0].0;
        for (cand, evals, inf) in &best_per_row {
            stats.cost_evaluations += evals;
            stats.infinite_costs += inf;
            if *cand < best {
                best = *cand;
            }
        }
        let (i, j) = (best.i as usize, best.j as usize);
        let pi = live.iter().position(|s| s.id == i).expect("live cluster");
        let pj = live.iter().position(|s| s.id == j).expect("live cluster");
        let merged = merge_summaries(&live[pi], &live[pj], tree.nodes().len()).expect("dims agree");
        live.remove(pj);
        live.remove(pi);
        live.push(merged.clone());
        tree.push_merge(i, j, best.cost, merged);
        stats.merges += 1;
    }
    (tree, stats)
}

fn run_heap(mut tree: Dendrogram, model: &dyn DivergenceModel) -> (Dendrogram, RunStats) {
    let mut stats = RunStats::default();
    let m = tree.num_leaves();
    let mut live: Vec<Option<ClusterSummary>> = Vec::with_capacity(2 * m - 1);
    live.extend(tree.nodes().iter().map(|n| Some(n.summary.clone())));

    let initial: Vec<MergeCandidate> = {
        let leaves: Vec<&ClusterSummary> = live.iter().flatten().collect();
        (0..m)
            .into_par_iter()
            .flat_map_iter(|r| {
                let leaves = &leaves;
                ((r + 1)..m).map(move |c| candidate(model, leaves[r], leaves[c]))
            })
            .collect()
    };
    tally(&mut stats, &initial);
    stats.heap_pushes += initial.len() as u64;
    let mut heap: BinaryHeap<Reverse<MergeCandidate>> = initial.into_iter().map(Reverse).collect();
    stats.peak_candidates = heap.len();
    let mut live_ids: Vec<usize> = (0..m).collect();

    while live_ids.len() > 1 {
        let Reverse(best) = heap.pop().expect("heap holds a live pair");
        let (i, j) = (best.i as usize, best.j as usize);
        if live[i].is_none() || live[j].is_none() {
            stats.stale_pops += 1;
            continue;
        }
        let a = live[i].take().expect("live");
        let b = live[j].take().expect("live");
        let merged = merge_summaries(&a, &b, live.len()).expect("dims agree");
        live_ids.retain(|&id| id != i && id != j);

        let batch: Vec<MergeCandidate> = live_ids
            .par_iter()
            .map(|&k| candidate(model, live[k].as_ref().expect("live"), &merged))
            .collect();
        tally(&mut stats, &batch);
        stats.heap_pushes += batch.len() as u64;
        heap.extend(batch.into_iter().map(Reverse));
        stats.peak_candidates = stats.peak_candidates.max(heap.len());

        live_ids.push(merged.id);
        live.push(Some(merged.clone()));
        tree.push_merge(i, j, best.cost, merged);
        stats.merges += 1;
    }
    (tree, stats)
}
