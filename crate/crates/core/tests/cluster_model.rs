mod common;

use bregtree::{
    cluster_cost, merge_cost, merge_cost_direct, merge_summaries, summarize, ClusterSummary, DivergenceModel, IdentityMap,
    ModelKind, Smoother, SquaredEuclidean,
};
use common::*;
use proptest::prelude::*;
use rand::Rng;

#[test]
fn center_formula_matches_direct_recomputation() {
    let mut r = rng(20);
    for kind in ModelKind::ALL {
        for _ in 0..200 {
            let (fast, direct) = center_vs_direct_case(kind, &mut r);
            assert!(fast.is_finite() && direct.is_finite(), "{kind}");
            assert!((fast - direct).abs() <= 1e-8 * (1.0 + direct.abs()), "{kind}: {fast} vs {direct}");
        }
    }
}

#[test]
fn decomposition_identity() {
    let mut r = rng(21);
    for kind in ModelKind::ALL {
        for _ in 0..100 {
            let (lhs, rhs) = decomposition_case(kind, &mut r);
            assert!((lhs - rhs).abs() <= 1e-8 * (1.0 + rhs.abs()), "{kind}: {lhs} vs {rhs}");
        }
    }
}

#[test]
fn merge_cost_is_likelihood_drop() {
    let mut r = rng(22);
    for kind in [ModelKind::GaussianFull, ModelKind::GaussianDiag, ModelKind::Multinomial] {
        for _ in 0..50 {
            let (delta, ll) = likelihood_case(kind, &mut r);
            assert!((delta - ll).abs() <= 1e-6 * (1.0 + ll.abs()), "{kind}: {delta} vs {ll}");
        }
    }
}

#[test]
fn ward_identity() {
    let mut r = rng(23);
    let model = SquaredEuclidean::new(3);
    let map = IdentityMap { dim: 3 };
    for _ in 0..200 {
        let (n1, n2) = (r.random_range(1..10), r.random_range(1..10));
        let (c1, c2) = (points(&mut r, n1, 3), points(&mut r, n2, 3));
        let a = summarize(&map, &c1, &Smoother::none(), 0).unwrap();
        let b = summarize(&map, &c2, &Smoother::none(), 1).unwrap();
        let ward = (n1 * n2) as f64 / (n1 + n2) as f64 * sq(&a.stat, &b.stat);
        let got = merge_cost(&model, &a, &b).unwrap();
        assert!((got - ward).abs() <= 1e-9 * (1.0 + ward));
    }
}

#[test]
fn worked_examples() {
    let model = SquaredEuclidean::new(2);
    let map = IdentityMap { dim: 2 };
    let none = Smoother::none();
    let pts = vec![vec![0.0, 0.0], vec![2.0, 0.0]];
    assert_eq!(cluster_cost(&model, &map, &pts, &none).unwrap(), 2.0);
    let direct = merge_cost_direct(&model, &map, &pts[..1], &pts[1..], &none).unwrap();
    assert_eq!(direct, 2.0);
    let a = summarize(&map, &pts[..1], &none, 0).unwrap();
    let b = summarize(&map, &pts[1..], &none, 1).unwrap();
    assert_eq!(merge_cost(&model, &a, &b).unwrap(), 2.0);
    assert_eq!(merge_cost(&model, &a, &a).unwrap(), 0.0);

    let a = ClusterSummary::new(0, 3, sv(vec![1.0, 1.0])).unwrap();
    let b = ClusterSummary::new(1, 1, sv(vec![5.0, 1.0])).unwrap();
    let m = merge_summaries(&a, &b, 2).unwrap();
    assert_eq!((m.size, m.stat.as_slice()), (4, &[2.0, 1.0][..]));
    let union = vec![vec![1.0, 1.0], vec![0.0, 0.0], vec![2.0, 2.0], vec![5.0, 1.0]];
    assert_eq!(summarize(&map, &union, &none, 0).unwrap().stat, m.stat);
    assert!(ClusterSummary::new(0, 0, sv(vec![1.0])).is_err());
}

#[test]
fn center_minimizes_total_divergence() {
    let mut r = rng(24);
    for kind in ModelKind::ALL {
        for _ in 0..10 {
            let k = r.random_range(1..12);
            let xs = domain_points(kind, &mut r, k);
            let dim = xs[0].dim();
            let mut mu = vec![0.0; dim];
            for x in &xs {
                for (a, v) in mu.iter_mut().zip(x.iter()) {
                    *a += v / k as f64;
                }
            }
            let mu = sv(mu);
            let data_dim = match kind {
                ModelKind::Kmeans | ModelKind::L1 => dim,
                ModelKind::Multinomial => VOCAB,
                _ => GAUSS_DIM,
            };
            let model = divergence_for(kind, data_dim);
            let total = |y: &bregtree::StatVec| xs.iter().map(|x| model.divergence(x, y).unwrap()).sum::<f64>();
            let at_center = total(&mu);
            for _ in 0..100 {
                let y = interior_point(kind, &mut r);
                assert!(at_center <= total(&y) + 1e-9 * (1.0 + at_center), "{kind}");
            }
        }
    }
}

#[test]
fn singleton_with_identity_smoothing_costs_nothing() {
    let model = SquaredEuclidean::new(1);
    let map = IdentityMap { dim: 1 };
    assert_eq!(cluster_cost(&model, &map, &[vec![4.0]], &Smoother::none()).unwrap(), 0.0);
}

#[test]
fn unsmoothed_gaussian_singletons_are_infinite() {
    let model = bregtree::ExpFamModel::gaussian_full(2);
    let map = bregtree::GaussianMap { dim: 2, diagonal: false };
    let none = Smoother::none();
    let a = summarize(&map, &[vec![0.0, 1.0]], &none, 0).unwrap();
    let b = summarize(&map, &[vec![1.0, 1.0]], &none, 1).unwrap();
    assert_eq!(merge_cost(&model, &a, &b).unwrap(), f64::INFINITY);
    assert_eq!(
        merge_cost_direct(&model, &map, &[vec![0.0, 1.0]], &[vec![1.0, 1.0]], &none).unwrap(),
        f64::INFINITY
    );
}

#[test]
fn dimension_mismatch_rejected() {
    let model = SquaredEuclidean::new(2);
    let a = ClusterSummary::new(0, 1, sv(vec![1.0, 2.0])).unwrap();
    let b = ClusterSummary::new(1, 1, sv(vec![1.0])).unwrap();
    assert!(merge_cost(&model, &a, &b).is_err());
    assert!(merge_summaries(&a, &b, 2).is_err());
    assert!(model.divergence(&a.stat, &b.stat).is_err());
}

proptest! {
    #[test]
    fn merged_stat_is_weighted_mean(
        na in 1usize..50, nb in 1usize..50,
        xa in prop::collection::vec(-1e3f64..1e3, 3),
        xb in prop::collection::vec(-1e3f64..1e3, 3),
    ) {
        let a = ClusterSummary::new(0, na, sv(xa.clone())).unwrap();
        let b = ClusterSummary::new(1, nb, sv(xb.clone())).unwrap();
        let m = merge_summaries(&a, &b, 2).unwrap();
        prop_assert_eq!(m.size, na + nb);
        for i in 0..3 {
            let want = (na as f64 * xa[i] + nb as f64 * xb[i]) / (na + nb) as f64;
            prop_assert!((m.stat[i] - want).abs() <= 1e-12 * (1.0 + want.abs()));
        }
    }

    #[test]
    fn merge_cost_is_nonnegative_and_symmetric(seed in any::<u64>()) {
        let mut r = rng(seed);
        for kind in ModelKind::ALL {
            let (fast, _) = center_vs_direct_case(kind, &mut r);
            prop_assert!(fast >= 0.0);
        }
        let model = SquaredEuclidean::new(2);
        let a = ClusterSummary::new(0, r.random_range(1..9), sv(gauss_vec(&mut r, 2, 1.0))).unwrap();
        let b = ClusterSummary::new(1, r.random_range(1..9), sv(gauss_vec(&mut r, 2, 1.0))).unwrap();
        let ab = merge_cost(&model, &a, &b).unwrap();
        let ba = merge_cost(&model, &b, &a).unwrap();
        prop_assert!((ab - ba).abs() <= 1e-12 * (1.0 + ab));
    }
}
