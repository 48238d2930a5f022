#![allow(dead_code)]

use bregtree::{
    merge_cost, merge_cost_direct, summarize, BandwidthMode, Dataset, Dendrogram, DivergenceModel, Document,
    ExpFamModel, Family, GaussianBandwidth, GaussianMap, GaussianMeanParams, IdentityMap, ModelKind, Smoother,
    SquaredEuclidean, StatVec, StatisticMap, WordFrequencyMap, L1,
};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use rand_distr::{Distribution, Normal};
use std::f64::consts::PI;

pub fn rng(seed: u64) -> StdRng {
    StdRng::seed_from_u64(seed)
}

pub fn sv(v: Vec<f64>) -> StatVec {
    StatVec::new(v).unwrap()
}

pub fn gauss_vec(r: &mut StdRng, d: usize, scale: f64) -> Vec<f64> {
    let n = Normal::new(0.0, scale).unwrap();
    (0..d).map(|_| n.sample(r)).collect()
}

pub fn points(r: &mut StdRng, m: usize, d: usize) -> Vec<Vec<f64>> {
    (0..m).map(|_| gauss_vec(r, d, 3.0)).collect()
}

/// A point of the open simplex, bounded away from the faces.
pub fn simplex(r: &mut StdRng, n: usize) -> Vec<f64> {
    let w: Vec<f64> = (0..n).map(|_| r.random_range(0.05..1.0)).collect();
    let s: f64 = w.iter().sum();
    w.into_iter().map(|x| x / s).collect()
}

/// A well-conditioned SPD matrix `AAᵀ + εI`, row-major.
pub fn spd(r: &mut StdRng, d: usize) -> Vec<f64> {
    let a = gauss_vec(r, d * d, 1.0);
    let mut s = vec![0.0; d * d];
    for i in 0..d {
        for j in 0..d {
            s[i * d + j] = (0..d).map(|k| a[i * d + k] * a[j * d + k]).sum();
        }
        s[i * d + i] += 0.5;
    }
    s
}

pub fn gaussian_full_stat(r: &mut StdRng, d: usize) -> StatVec {
    let mu = gauss_vec(r, d, 2.0);
    GaussianMeanParams::from_mean_cov(mu, &spd(r, d)).unwrap().to_stat().unwrap()
}

pub fn gaussian_diag_stat(r: &mut StdRng, d: usize) -> StatVec {
    let mu = gauss_vec(r, d, 2.0);
    let mut v = mu.clone();
    v.extend(mu.iter().map(|m| m * m + r.random_range(0.2..3.0)));
    sv(v)
}

pub fn document(r: &mut StdRng, vocab: usize, max_len: u32) -> Document {
    let words = r.random_range(1..=vocab.min(6));
    Document::from_counts((0..words).map(|_| (r.random_range(0..vocab), r.random_range(1..=max_len))))
}

/// Documents that together use every word, so the pooled distribution is
/// interior.
pub fn covering_docs(r: &mut StdRng, k: usize, vocab: usize) -> Vec<Document> {
    let mut docs: Vec<Document> = (0..k).map(|_| document(r, vocab, 4)).collect();
    let extra = Document::from_counts((0..vocab).map(|w| (w, r.random_range(1..3))));
    docs[0] = Document::from_counts(docs[0].counts.iter().cloned().chain(extra.counts));
    docs
}

pub fn sq(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

pub fn rel_close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * (1.0 + a.abs().max(b.abs()))
}

/// Textbook Ward agglomeration by the Lance–Williams recurrence on the
/// merge-cost matrix. Returns `(left, right, cost)` per merge with the same
/// id scheme and tie order as the library.
pub fn lance_williams_ward(data: &[Vec<f64>]) -> Vec<(usize, usize, f64)> {
    let m = data.len();
    let total = 2 * m - 1;
    let mut dist = vec![vec![f64::NAN; total]; total];
    for i in 0..m {
        for j in (i + 1)..m {
            let c = 0.5 * sq(&data[i], &data[j]);
            dist[i][j] = c;
            dist[j][i] = c;
        }
    }
    let mut size = vec![0usize; total];
    size[..m].fill(1);
    let mut live: Vec<usize> = (0..m).collect();
    let mut out = Vec::new();
    let mut next = m;
    while live.len() > 1 {
        let mut best = (f64::INFINITY, usize::MAX, usize::MAX);
        for (a, &i) in live.iter().enumerate() {
            for &j in &live[a + 1..] {
                let (lo, hi) = if i < j { (i, j) } else { (j, i) };
                let key = (dist[lo][hi], lo, hi);
                if key.0 < best.0 || (key.0 == best.0 && (key.1, key.2) < (best.1, best.2)) {
                    best = key;
                }
            }
        }
        let (c, i, j) = best;
        let (ni, nj) = (size[i] as f64, size[j] as f64);
        for &k in &live {
            if k == i || k == j {
                continue;
            }
            let nk = size[k] as f64;
            let d = ((nk + ni) * dist[k][i] + (nk + nj) * dist[k][j] - nk * c) / (nk + ni + nj);
            dist[k][next] = d;
            dist[next][k] = d;
        }
        size[next] = size[i] + size[j];
        live.retain(|&k| k != i && k != j);
        live.push(next);
        out.push((i, j, c));
        next += 1;
    }
    out
}

/// Pairwise purity by explicit lowest common ancestors.
pub fn purity_by_lca(tree: &Dendrogram, labels: &[u32]) -> f64 {
    let m = tree.num_leaves();
    let parents = tree.parents();
    let ancestors = |mut v: usize| {
        let mut path = vec![v];
        while let Some(p) = parents[v] {
            path.push(p);
            v = p;
        }
        path
    };
    let paths: Vec<Vec<usize>> = (0..m).map(ancestors).collect();
    let mut leaves_cache: Vec<Option<Vec<usize>>> = vec![None; tree.nodes().len()];
    let (mut sum, mut pairs) = (0.0, 0u64);
    for i in 0..m {
        for j in (i + 1)..m {
            if labels[i] != labels[j] {
                continue;
            }
            let lca = *paths[i].iter().find(|a| paths[j].contains(a)).unwrap();
            let under = leaves_cache[lca].get_or_insert_with(|| tree.leaves_under(lca));
            let same = under.iter().filter(|&&l| labels[l] == labels[i]).count();
            sum += same as f64 / under.len() as f64;
            pairs += 1;
        }
    }
    sum / pairs as f64
}

pub fn merge_pairs(tree: &Dendrogram) -> Vec<(usize, usize)> {
    tree.merges().iter().map(|n| n.children.unwrap()).collect()
}

pub const GAUSS_DIM: usize = 3;
pub const VOCAB: usize = 6;

pub fn divergence_for(kind: ModelKind, d: usize) -> Box<dyn DivergenceModel> {
    match kind {
        ModelKind::Kmeans => Box::new(SquaredEuclidean::new(d)),
        ModelKind::L1 => Box::new(L1::new(d)),
        ModelKind::GaussianFull => Box::new(ExpFamModel::gaussian_full(d)),
        ModelKind::GaussianDiag => Box::new(ExpFamModel::gaussian_diag(d)),
        ModelKind::Multinomial => Box::new(ExpFamModel::multinomial(d)),
    }
}

fn center_vs_direct<M>(model: &dyn DivergenceModel, map: &M, c1: &[M::Datum], c2: &[M::Datum], s: &Smoother) -> (f64, f64)
where
    M: StatisticMap,
    M::Datum: Clone,
{
    let a = summarize(map, c1, s, 0).unwrap();
    let b = summarize(map, c2, s, 1).unwrap();
    let fast = merge_cost(model, &a, &b).unwrap();
    let direct = merge_cost_direct(model, map, c1, c2, s).unwrap();
    (fast, direct)
}

/// Two random clusters of sizes 1..=20 under `kind` with its default
/// smoothing; returns `(merge_cost, merge_cost_direct)`.
pub fn center_vs_direct_case(kind: ModelKind, r: &mut StdRng) -> (f64, f64) {
    let (n1, n2) = (r.random_range(1..=20), r.random_range(1..=20));
    match kind {
        ModelKind::Kmeans | ModelKind::L1 => {
            let d = 4;
            let c1 = points(r, n1, d);
            let c2: Vec<Vec<f64>> = points(r, n2, d).into_iter().map(|x| x.iter().map(|v| v + 2.0).collect()).collect();
            center_vs_direct(divergence_for(kind, d).as_ref(), &IdentityMap { dim: d }, &c1, &c2, &Smoother::none())
        }
        ModelKind::GaussianFull | ModelKind::GaussianDiag => {
            let d = GAUSS_DIM;
            let diag = kind == ModelKind::GaussianDiag;
            let c1 = points(r, n1, d);
            let c2 = points(r, n2, d);
            let all: Vec<Vec<f64>> = c1.iter().chain(&c2).cloned().collect();
            let mode = if diag { BandwidthMode::PerCoordinate } else { BandwidthMode::Uniform };
            let bw = GaussianBandwidth::from_data(&all, mode, 1.0).unwrap();
            let fam = if diag { Family::GaussianDiag } else { Family::GaussianFull };
            let s = Smoother::gaussian(fam, &bw).unwrap();
            center_vs_direct(divergence_for(kind, d).as_ref(), &GaussianMap { dim: d, diagonal: diag }, &c1, &c2, &s)
        }
        ModelKind::Multinomial => {
            let c1: Vec<Document> = (0..n1).map(|_| document(r, VOCAB, 5)).collect();
            let c2: Vec<Document> = (0..n2).map(|_| document(r, VOCAB, 5)).collect();
            let tokens: u64 = c1.iter().chain(&c2).map(Document::total).sum();
            let s = Smoother::multinomial(VOCAB, tokens as usize);
            center_vs_direct(divergence_for(kind, VOCAB).as_ref(), &WordFrequencyMap { vocab: VOCAB }, &c1, &c2, &s)
        }
    }
}

/// Points in `dom(f)` for `kind`, as statistics.
pub fn domain_point(kind: ModelKind, r: &mut StdRng) -> StatVec {
    match kind {
        ModelKind::Kmeans | ModelKind::L1 => sv(gauss_vec(r, 4, 2.0)),
        ModelKind::GaussianFull => gaussian_full_stat(r, GAUSS_DIM),
        ModelKind::GaussianDiag => gaussian_diag_stat(r, GAUSS_DIM),
        ModelKind::Multinomial => {
            // Mix basis vectors (boundary points) with interior ones.
            if r.random_bool(0.5) {
                let mut e = vec![0.0; VOCAB];
                e[r.random_range(0..VOCAB)] = 1.0;
                sv(e)
            } else {
                sv(simplex(r, VOCAB))
            }
        }
    }
}

/// `k` domain points whose mean is interior (the first one is interior).
pub fn domain_points(kind: ModelKind, r: &mut StdRng, k: usize) -> Vec<StatVec> {
    let mut xs = vec![interior_point(kind, r)];
    xs.extend((1..k).map(|_| domain_point(kind, r)));
    xs
}

pub fn interior_point(kind: ModelKind, r: &mut StdRng) -> StatVec {
    match kind {
        ModelKind::Multinomial => sv(simplex(r, VOCAB)),
        _ => domain_point(kind, r),
    }
}

/// `(Σᵢ B(xᵢ, y) − Σᵢ B(xᵢ, μ), m·B(μ, y))` for random `xᵢ` and interior `y`.
pub fn decomposition_case(kind: ModelKind, r: &mut StdRng) -> (f64, f64) {
    let m = r.random_range(1..=15);
    let xs = domain_points(kind, r, m);
    let dim = xs[0].dim();
    let mut mu = vec![0.0; dim];
    for x in &xs {
        for (a, v) in mu.iter_mut().zip(x.iter()) {
            *a += v / m as f64;
        }
    }
    let mu = sv(mu);
    let y = interior_point(kind, r);
    let data_dim = match kind {
        ModelKind::Kmeans | ModelKind::L1 => dim,
        ModelKind::Multinomial => VOCAB,
        _ => GAUSS_DIM,
    };
    let model = divergence_for(kind, data_dim);
    let b = |x: &StatVec, y: &StatVec| model.divergence(x, y).unwrap();
    let lhs: f64 = xs.iter().map(|x| b(x, &y)).sum::<f64>() - xs.iter().map(|x| b(x, &mu)).sum::<f64>();
    (lhs, m as f64 * b(&mu, &y))
}

/// `(Δ, Σᵢ Σ_{x∈Cᵢ} ln p_{θᵢ}(x) − Σ_{x∈C₁∪C₂} ln p_{θ₃}(x))` for unsmoothed
/// interior clusters of an exponential-family model.
pub fn likelihood_case(kind: ModelKind, r: &mut StdRng) -> (f64, f64) {
    match kind {
        ModelKind::GaussianFull | ModelKind::GaussianDiag => {
            let d = GAUSS_DIM;
            let diag = kind == ModelKind::GaussianDiag;
            let model = ExpFamModel::new(if diag { Family::GaussianDiag } else { Family::GaussianFull }, d);
            let map = GaussianMap { dim: d, diagonal: diag };
            let (n1, n2) = (r.random_range(d + 2..=15), r.random_range(d + 2..=15));
            let c1 = points(r, n1, d);
            let c2: Vec<Vec<f64>> = points(r, n2, d)
                .into_iter()
                .map(|x| x.iter().map(|v| v + 1.5).collect())
                .collect();
            let none = Smoother::none();
            let (a, b) = (summarize(&map, &c1, &none, 0).unwrap(), summarize(&map, &c2, &none, 1).unwrap());
            let all: Vec<Vec<f64>> = c1.iter().chain(&c2).cloned().collect();
            let u = summarize(&map, &all, &none, 2).unwrap();
            let ll = |c: &[Vec<f64>], mean: &StatVec| -> f64 {
                c.iter().map(|x| model.log_density(mean, &map.stat(x).unwrap()).unwrap()).sum()
            };
            let delta = merge_cost(&model, &a, &b).unwrap();
            (delta, ll(&c1, &a.stat) + ll(&c2, &b.stat) - ll(&all, &u.stat))
        }
        ModelKind::Multinomial => {
            let model = ExpFamModel::multinomial(VOCAB);
            let map = WordFrequencyMap { vocab: VOCAB };
            let (k1, k2) = (r.random_range(1..=8), r.random_range(1..=8));
            let c1 = covering_docs(r, k1, VOCAB);
            let c2 = covering_docs(r, k2, VOCAB);
            let none = Smoother::none();
            let (a, b) = (summarize(&map, &c1, &none, 0).unwrap(), summarize(&map, &c2, &none, 1).unwrap());
            let all: Vec<Document> = c1.iter().chain(&c2).cloned().collect();
            let u = summarize(&map, &all, &none, 2).unwrap();
            // Each word occurrence is an observation with τ = e_k.
            let ll = |c: &[Document], mean: &StatVec| -> f64 {
                let mut total = 0.0;
                for doc in c {
                    for &(w, cnt) in &doc.counts {
                        let mut e = vec![0.0; VOCAB];
                        e[w] = 1.0;
                        total += cnt as f64 * model.log_density(mean, &sv(e)).unwrap();
                    }
                }
                total
            };
            let delta = merge_cost(&model, &a, &b).unwrap();
            (delta, ll(&c1, &a.stat) + ll(&c2, &b.stat) - ll(&all, &u.stat))
        }
        _ => panic!("likelihood identity applies to exponential families"),
    }
}

/// A random dataset for `kind` with `m` data.
pub fn dataset(kind: ModelKind, r: &mut StdRng, m: usize) -> Dataset {
    match kind {
        ModelKind::Multinomial => Dataset::Documents {
            docs: (0..m).map(|_| document(r, VOCAB, 5)).collect(),
            vocab: (0..VOCAB).map(|i| format!("w{i}")).collect(),
        },
        ModelKind::GaussianFull | ModelKind::GaussianDiag => Dataset::Points(points(r, m, GAUSS_DIM)),
        _ => Dataset::Points(points(r, m, 4)),
    }
}

pub fn normal_log_pdf(x: f64, mu: f64, var: f64) -> f64 {
    -(x - mu) * (x - mu) / (2.0 * var) - 0.5 * (2.0 * PI * var).ln()
}

/// ∫ p ln(p/q) by composite Simpson over ±14 standard deviations.
pub fn kl_quadrature_1d(m1: f64, v1: f64, m2: f64, v2: f64) -> f64 {
    let s = v1.sqrt().max(v2.sqrt());
    let (lo, hi) = (m1.min(m2) - 14.0 * s, m1.max(m2) + 14.0 * s);
    let n = 40_000;
    let h = (hi - lo) / n as f64;
    let f = |x: f64| {
        let lp = normal_log_pdf(x, m1, v1);
        lp.exp() * (lp - normal_log_pdf(x, m2, v2))
    };
    let mut acc = f(lo) + f(hi);
    for i in 1..n {
        acc += f(lo + i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
    }
    acc * h / 3.0
}

pub fn logsumexp(t: &[f64]) -> f64 {
    let mx = t.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    mx + t.iter().map(|v| (v - mx).exp()).sum::<f64>().ln()
}

pub type Gen = fn(&mut StdRng) -> StatVec;

pub fn property_models() -> Vec<(Box<dyn DivergenceModel>, Gen)> {
    vec![
        (Box::new(SquaredEuclidean::new(3)), |r| sv(gauss_vec(r, 3, 2.0))),
        (Box::new(L1::new(3)), |r| sv(gauss_vec(r, 3, 2.0))),
        (Box::new(ExpFamModel::gaussian_full(2)), |r| gaussian_full_stat(r, 2)),
        (Box::new(ExpFamModel::gaussian_diag(3)), |r| gaussian_diag_stat(r, 3)),
        (Box::new(ExpFamModel::multinomial(4)), |r| sv(simplex(r, 4))),
    ]
}
