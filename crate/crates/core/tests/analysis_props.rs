use std::collections::BTreeSet;

use mapperscope_core::analysis::{
    build_routing, cluster_summary, extract_problem_clusters, problematic_labels, route_point,
    ProblematicRule,
};
use mapperscope_core::coloring::{accuracy_coloring, correctness_flags, density_coloring, Coloring};
use mapperscope_core::dataset::{
    synth_dataset, FeatureMatrix, ImageRecord, Prediction, SynthOutput, SynthParams,
};
use mapperscope_core::geometry::{column_stats, pca_lens};
use mapperscope_core::mapper::{build_mapper, MapperGraph, MapperParams};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn record(id: usize, truth: &str, predicted: &str) -> ImageRecord {
    ImageRecord::new(format!("r{id}"), truth, vec![Prediction::new(predicted, 0.9)])
}

fn labelled(spec: &[(&str, usize, usize)]) -> Vec<ImageRecord> {
    let mut out = Vec::new();
    for &(label, count, correct) in spec {
        for i in 0..count {
            let predicted = if i < correct { label } else { "other" };
            out.push(record(out.len(), label, predicted));
        }
    }
    out
}

#[test]
fn rule_boundary_cases() {
    let records = labelled(&[("seen_twice", 2, 0), ("exactly_forty", 5, 2), ("one_in_three", 3, 1)]);
    let p = problematic_labels(&records, &ProblematicRule::default());
    assert_eq!(p.labels, BTreeSet::from(["one_in_three".to_string()]));
    assert_eq!(p.marks.iter().filter(|&&m| m).count(), 3);
}

fn synth(seed: u64) -> SynthOutput {
    synth_dataset(&SynthParams {
        n_per_cluster: 100,
        n_clusters: 4,
        dims: 10,
        separation: 12.0,
        error_rate_per_cluster: vec![0.9, 0.8, 0.05, 0.0],
        seed,
    })
    .unwrap()
}

fn graph_of(out: &SynthOutput) -> MapperGraph {
    let m = out.dataset.matrix();
    let params = MapperParams {
        resolution: 8,
        gain: 3.0,
        bins: 10,
    };
    build_mapper(m, &column_stats(m), &pca_lens(m, 2).unwrap(), &params).unwrap()
}

#[test]
fn overall_accuracy_equals_background_share() {
    let out = synth_dataset(&SynthParams {
        n_per_cluster: 500,
        n_clusters: 5,
        dims: 8,
        separation: 10.0,
        error_rate_per_cluster: vec![1.0, 1.0, 1.0, 1.0, 0.0],
        seed: 17,
    })
    .unwrap();
    let flags = correctness_flags(out.dataset.records(), 1);
    let accuracy = flags.iter().filter(|&&f| f).count() as f64 / flags.len() as f64;
    assert_eq!(accuracy, 500.0 / 2500.0);
}

#[test]
fn colorings_are_complementary() {
    let out = synth(2);
    let g = graph_of(&out);
    let flags = correctness_flags(out.dataset.records(), 1);
    let negated: Vec<bool> = flags.iter().map(|f| !f).collect();
    let acc = accuracy_coloring(&g, &flags).unwrap();
    let err = density_coloring(&g, &negated).unwrap();
    for (a, e) in acc.node_values.iter().zip(&err.node_values) {
        assert!((a + e - 1.0).abs() < 1e-12);
        assert!((0.0..=1.0).contains(a));
    }
}

#[test]
fn components_are_disjoint_and_cover_hot_nodes() {
    let out = synth(3);
    let g = graph_of(&out);
    let p = problematic_labels(out.dataset.records(), &ProblematicRule::default());
    let density = density_coloring(&g, &p.marks).unwrap();
    let reports = extract_problem_clusters(&g, &density, out.dataset.records(), 0.5, 1).unwrap();
    let hot: BTreeSet<usize> = (0..g.nodes.len()).filter(|&i| density.node_values[i] >= 0.5).collect();
    let mut seen = BTreeSet::new();
    let adj = g.adjacency();
    for r in &reports {
        for &n in &r.node_ids {
            assert!(seen.insert(n), "node {n} in two reports");
        }
        // connected inside the hot set
        let mut reached = BTreeSet::from([r.node_ids[0]]);
        let mut stack = vec![r.node_ids[0]];
        while let Some(n) = stack.pop() {
            for &m in &adj[n] {
                if hot.contains(&m) && reached.insert(m) {
                    stack.push(m);
                }
            }
        }
        assert_eq!(reached, r.node_ids.iter().copied().collect());
        let points: BTreeSet<usize> =
            r.node_ids.iter().flat_map(|&n| g.nodes[n].members.clone()).collect();
        assert_eq!(points.into_iter().collect::<Vec<_>>(), r.point_ids);
    }
    assert_eq!(seen, hot);
    for w in reports.windows(2) {
        assert!(w[0].point_ids.len() >= w[1].point_ids.len());
    }
    let none = extract_problem_clusters(
        &g,
        &Coloring {
            name: "zero".into(),
            node_values: vec![0.0; g.nodes.len()],
            aggregation: "mean".into(),
        },
        out.dataset.records(),
        0.5,
        1,
    )
    .unwrap();
    assert!(none.is_empty());
}

#[test]
fn radius_is_the_farthest_member() {
    let out = synth(4);
    let g = graph_of(&out);
    let m = out.dataset.matrix();
    let stats = column_stats(m);
    let p = problematic_labels(out.dataset.records(), &ProblematicRule::default());
    let density = density_coloring(&g, &p.marks).unwrap();
    let reports = extract_problem_clusters(&g, &density, out.dataset.records(), 0.5, 2).unwrap();
    assert!(!reports.is_empty());
    let model = build_routing(m, &reports, &stats).unwrap();
    for (r, c) in reports.iter().zip(&model.clusters) {
        // brute-force scan with an independent distance expression
        let mut worst = 0.0f64;
        for &pid in &r.point_ids {
            let mut acc = 0.0;
            for j in 0..m.n_cols() {
                if stats.variances[j] > 0.0 {
                    acc += (m.get(pid, j) as f64 - c.centroid[j]).powi(2) / stats.variances[j];
                }
            }
            worst = worst.max(acc.sqrt());
        }
        assert!((worst - c.radius).abs() <= 1e-9 * worst.max(1.0));
        let at_centroid = route_point(&c.centroid, &model, 1.0).unwrap();
        assert_eq!(at_centroid.cluster_id, Some(c.cluster_id));
    }
    let far: Vec<f64> = vec![1e6; m.n_cols()];
    assert_eq!(route_point(&far, &model, 1.5).unwrap().cluster_id, None);
}

#[test]
fn routing_is_invariant_to_column_scaling() {
    let out = synth(5);
    let g = graph_of(&out);
    let m = out.dataset.matrix();
    let p = problematic_labels(out.dataset.records(), &ProblematicRule::default());
    let density = density_coloring(&g, &p.marks).unwrap();
    let reports = extract_problem_clusters(&g, &density, out.dataset.records(), 0.5, 2).unwrap();
    let model = build_routing(m, &reports, &column_stats(m)).unwrap();

    let d = m.n_cols();
    let mut rng = ChaCha8Rng::seed_from_u64(50);
    // powers of two keep the scaled f32 matrix exact
    let scales: Vec<f32> = (0..d).map(|_| 2f32.powi(rng.gen_range(-4..5))).collect();
    let scaled_values: Vec<f32> =
        m.values().iter().enumerate().map(|(i, v)| v * scales[i % d]).collect();
    let m2 = FeatureMatrix::new(m.n_rows(), d, scaled_values, "scaled").unwrap();
    let model2 = build_routing(&m2, &reports, &column_stats(&m2)).unwrap();

    for _ in 0..300 {
        let row = rng.gen_range(0..m.n_rows());
        let x: Vec<f64> = m.row(row).iter().map(|&v| v as f64 + rng.gen_range(-2.0..2.0)).collect();
        let x2: Vec<f64> = x.iter().zip(&scales).map(|(v, &s)| v * s as f64).collect();
        let a = route_point(&x, &model, 1.5).unwrap();
        let b = route_point(&x2, &model2, 1.5).unwrap();
        assert_eq!(a.route, b.route);
        assert_eq!(a.cluster_id, b.cluster_id);
    }
}

#[test]
fn summary_counts_partition_each_cluster() {
    let out = synth(6);
    let g = graph_of(&out);
    let records = out.dataset.records();
    let p = problematic_labels(records, &ProblematicRule::default());
    let density = density_coloring(&g, &p.marks).unwrap();
    let reports = extract_problem_clusters(&g, &density, records, 0.5, 2).unwrap();
    let flags = correctness_flags(records, 1);
    let summary = cluster_summary(&reports, records, &flags);
    assert_eq!(summary.len(), reports.len());
    for s in &summary {
        let listed: usize = s.top_true_labels.iter().map(|(_, c)| c).sum();
        assert_eq!(listed + s.other_true_labels, s.size);
    }
    assert!(cluster_summary(&[], records, &flags).is_empty());
}

#[test]
fn single_cluster_summary_names_the_planted_label() {
    let out = synth_dataset(&SynthParams {
        n_per_cluster: 60,
        n_clusters: 1,
        dims: 5,
        separation: 1.0,
        error_rate_per_cluster: vec![0.9],
        seed: 8,
    })
    .unwrap();
    let g = graph_of(&out);
    let records = out.dataset.records();
    let flags = correctness_flags(records, 1);
    let acc = accuracy_coloring(&g, &flags).unwrap();
    let inverted = Coloring {
        name: "error".into(),
        node_values: acc.node_values.iter().map(|v| 1.0 - v).collect(),
        aggregation: "mean".into(),
    };
    let reports = extract_problem_clusters(&g, &inverted, records, 0.0, 1).unwrap();
    let summary = cluster_summary(&reports, records, &flags);
    assert_eq!(summary[0].top_true_labels[0].0, "class_0");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn stricter_rules_never_add_labels(
        spec in prop::collection::vec((1usize..10, 0usize..10), 1..8),
        min_count in 1usize..6,
        extra in 0usize..4,
        max_accuracy in 0.0f64..1.0,
        lower in 0.0f64..1.0,
    ) {
        let named: Vec<(String, usize, usize)> = spec
            .iter()
            .enumerate()
            .map(|(i, &(count, correct))| (format!("l{i}"), count, correct.min(count)))
            .collect();
        let borrowed: Vec<(&str, usize, usize)> =
            named.iter().map(|(l, c, k)| (l.as_str(), *c, *k)).collect();
        let records = labelled(&borrowed);
        let base = ProblematicRule { min_count, max_accuracy, top_k: 1 };
        let stricter = ProblematicRule {
            min_count: min_count + extra,
            max_accuracy: max_accuracy * lower,
            top_k: 1,
        };
        let a = problematic_labels(&records, &base).labels;
        let b = problematic_labels(&records, &stricter).labels;
        prop_assert!(b.is_subset(&a));
    }
}
