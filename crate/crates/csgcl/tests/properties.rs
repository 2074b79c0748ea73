//! Property tests for the structural invariants the modules promise.

use csgcl::augment::{
    ced, generate_views, normalize_attr, normalize_edge, AugmentationConfig,
};
use csgcl::community::{community_strength_raw, louvain, modularity, Partition};
use csgcl::eval::{normalized_mutual_information, roc_auc};
use csgcl::graph::{read_edge_list, write_edge_list, AttributedGraph};
use csgcl::objective::{gamma, TeamupSchedule};
use ndarray::Array2;
use proptest::collection::vec;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Arbitrary small graph: node count plus an edge soup that may contain
/// duplicates, reversed duplicates, and self-loops.
fn arb_graph() -> impl Strategy<Value = AttributedGraph> {
    (2usize..24).prop_flat_map(|n| {
        vec((0..n, 0..n), 1..60).prop_map(move |edges| {
            AttributedGraph::new(edges, Array2::from_elem((n, 3), 1.0), None).unwrap()
        })
    })
}

fn arb_graph_with_edges() -> impl Strategy<Value = AttributedGraph> {
    arb_graph().prop_filter("needs an edge", |g| g.num_edges() > 0)
}

fn dense_partition(g: &AttributedGraph, raw: &[usize]) -> Vec<usize> {
    let mut map = std::collections::HashMap::new();
    let mut next = 0;
    (0..g.num_nodes())
        .map(|v| {
            *map.entry(raw[v % raw.len()] % 4).or_insert_with(|| {
                let id = next;
                next += 1;
                id
            })
        })
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn adjacency_is_symmetric_without_self_loops(g in arb_graph()) {
        prop_assert!(g.adjacency().is_symmetric());
        for v in 0..g.num_nodes() {
            prop_assert_eq!(g.adjacency().get(v, v), 0.0);
        }
        let degrees = g.degree_vector();
        prop_assert_eq!(degrees.iter().sum::<usize>(), 2 * g.num_edges());
    }

    #[test]
    fn edge_list_roundtrip_is_identity(g in arb_graph()) {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("edges.txt");
        write_edge_list(&path, g.edges()).unwrap();
        let reloaded = AttributedGraph::new(
            read_edge_list(&path).unwrap(),
            g.attributes().clone(),
            None,
        ).unwrap();
        prop_assert_eq!(reloaded.edges(), g.edges());
        prop_assert_eq!(reloaded.adjacency(), g.adjacency());
    }

    #[test]
    fn normalized_adjacency_is_symmetric(g in arb_graph()) {
        prop_assert!(g.normalized_adjacency().is_symmetric());
    }

    #[test]
    fn strength_sum_matches_modularity(
        g in arb_graph_with_edges(),
        raw in vec(0usize..4, 1..24),
    ) {
        let assignment = dense_partition(&g, &raw);
        let strengths = community_strength_raw(&g, &assignment).unwrap();
        let q = modularity(&g, &assignment).unwrap();
        prop_assert!((strengths.iter().sum::<f64>() - q).abs() < 1e-12);
    }

    #[test]
    fn louvain_not_worse_than_singletons(g in arb_graph_with_edges(), seed in 0u64..100) {
        let p = louvain(&g, 1.0, seed).unwrap();
        let singletons: Vec<usize> = (0..g.num_nodes()).collect();
        prop_assert!(
            modularity(&g, p.assignment()).unwrap()
                >= modularity(&g, &singletons).unwrap()
        );
    }

    #[test]
    fn normalizers_average_to_one(values in vec(-10.0f64..10.0, 2..40)) {
        // Both normalizations are affine maps whose image has mean 1 for
        // non-constant input; the constant fallback is all ones.
        for out in [normalize_attr(&values), normalize_edge(&values)] {
            let mean = out.iter().sum::<f64>() / out.len() as f64;
            prop_assert!((mean - 1.0).abs() < 1e-9, "mean {mean}");
            prop_assert!(out.iter().all(|v| v.is_finite()));
        }
    }

    #[test]
    fn views_mask_but_never_rewrite(
        g in arb_graph_with_edges(),
        raw in vec(0usize..3, 1..24),
        seed in 0u64..50,
    ) {
        let assignment = dense_partition(&g, &raw);
        let p = Partition::from_assignment(&g, &assignment).unwrap();
        let cfg = AugmentationConfig::new(0.4, 0.2, 0.6, 0.9);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (v1, v2) = generate_views(&g, &p, &cfg, &mut rng);
        for view in [&v1, &v2] {
            // attribute entries are either zeroed or untouched
            for (a, b) in view.attributes().iter().zip(g.attributes().iter()) {
                prop_assert!(*a == 0.0 || a == b);
            }
            // kept edges are a subset and stay symmetric
            for e in view.edges() {
                prop_assert!(g.edges().contains(e));
            }
            prop_assert!(view.adjacency().is_symmetric());
        }
        // identical seeds reproduce the pair bitwise
        let mut rng2 = ChaCha8Rng::seed_from_u64(seed);
        let again = generate_views(&g, &p, &cfg, &mut rng2);
        prop_assert_eq!((v1, v2), again);
    }

    #[test]
    fn ced_mask_indices_match_kept_edges(
        g in arb_graph_with_edges(),
        seed in 0u64..50,
    ) {
        let p = Partition::from_assignment(&g, &vec![0; g.num_nodes()]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (mask, kept) = ced(&g, &p, 0.5, &mut rng);
        let expected: Vec<(usize, usize)> = g
            .edges()
            .iter()
            .zip(&mask)
            .filter(|(_, &m)| m == 1)
            .map(|(&e, _)| e)
            .collect();
        prop_assert_eq!(kept, expected);
    }

    #[test]
    fn gamma_is_monotone_and_bounded(
        t0 in 0.0f64..20.0,
        gamma_max in 0.0f64..10.0,
        times in vec(0.0f64..50.0, 2..20),
    ) {
        let sched = TeamupSchedule::new(t0, gamma_max, 0.5);
        let mut sorted = times;
        sorted.sort_by(f64::total_cmp);
        let mut prev = f64::NEG_INFINITY;
        for t in sorted {
            let value = gamma(t, &sched);
            prop_assert!(value >= prev - 1e-15);
            prop_assert!((0.0..=gamma_max).contains(&value));
            prev = value;
        }
    }

    #[test]
    fn auc_invariant_under_monotone_transform(
        pos in vec(-5.0f64..5.0, 1..20),
        neg in vec(-5.0f64..5.0, 1..20),
    ) {
        let base = roc_auc(&pos, &neg);
        let transform = |v: &[f64]| v.iter().map(|x| x.exp()).collect::<Vec<_>>();
        let mapped = roc_auc(&transform(&pos), &transform(&neg));
        prop_assert!((base - mapped).abs() < 1e-12);
    }

    #[test]
    fn nmi_symmetric_and_permutation_invariant(
        labels in vec(0usize..4, 4..40),
        clusters in vec(0usize..4, 4..40),
    ) {
        let n = labels.len().min(clusters.len());
        let (a, b) = (&labels[..n], &clusters[..n]);
        let forward = normalized_mutual_information(a, b);
        let backward = normalized_mutual_information(b, a);
        prop_assert!((forward - backward).abs() < 1e-12);
        // relabeling one side leaves the score unchanged
        let permuted: Vec<usize> = b.iter().map(|&c| (c + 1) % 4).collect();
        let relabeled = normalized_mutual_information(a, &permuted);
        prop_assert!((forward - relabeled).abs() < 1e-12);
    }
}
