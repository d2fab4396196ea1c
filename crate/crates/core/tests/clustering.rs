mod common;

use causeway::citest::correlation_matrix;
use causeway::clustering::{
    correlation_distance, cut_tree, diagnostics_sweep, hierarchical_cluster, reduce_dataset, select_medoids,
    ClusterError, Clustering, Linkage,
};
use causeway::linalg::Matrix;
use causeway::{CorrelationMatrix, Dataset};
use proptest::prelude::*;
use rand::Rng;

use common::*;

fn random_corr(d: usize, seed: u64) -> (Dataset<f64>, CorrelationMatrix<f64>) {
    let mut r = rng(seed);
    let latent: Vec<Vec<f64>> = (0..3).map(|_| normals(60, &mut r)).collect();
    let cols: Vec<Vec<f64>> = (0..d)
        .map(|_| {
            let w: Vec<f64> = (0..3).map(|_| r.random_range(-1.0..1.0)).collect();
            let noise = normals(60, &mut r);
            (0..60).map(|i| noise[i] * 0.5 + (0..3).map(|b| w[b] * latent[b][i]).sum::<f64>()).collect()
        })
        .collect();
    let data = Dataset::with_default_names(cols).unwrap();
    let c = correlation_matrix(&data).unwrap();
    (data, c)
}

// recomputes cluster distances from the leaves at every step
fn naive_heights(d: &Matrix<f64>, average: bool) -> Vec<(Vec<usize>, f64)> {
    let mut clusters: Vec<Vec<usize>> = (0..d.rows()).map(|i| vec![i]).collect();
    let mut out = Vec::new();
    while clusters.len() > 1 {
        let mut best = (f64::INFINITY, 0, 0);
        for i in 0..clusters.len() {
            for j in i + 1..clusters.len() {
                let pairs: Vec<f64> =
                    clusters[i].iter().flat_map(|&a| clusters[j].iter().map(move |&b| d[(a, b)])).collect();
                let h = if average {
                    pairs.iter().sum::<f64>() / pairs.len() as f64
                } else {
                    pairs.iter().cloned().fold(f64::MIN, f64::max)
                };
                if h < best.0 {
                    best = (h, i, j);
                }
            }
        }
        let (h, i, j) = best;
        let b = clusters.remove(j);
        clusters[i].extend(b);
        let mut merged = clusters[i].clone();
        merged.sort_unstable();
        out.push((merged, h));
    }
    out
}

fn leaves_of(t: &causeway::Dendrogram64, id: usize) -> Vec<usize> {
    let n = t.n_leaves();
    if id < n {
        return vec![id];
    }
    let m = t.merges()[id - n];
    let mut v = leaves_of(t, m.a);
    v.extend(leaves_of(t, m.b));
    v.sort_unstable();
    v
}

#[test]
fn complete_and_average_match_naive_recomputation() {
    for seed in 0..20 {
        let (_, c) = random_corr(9, seed);
        let d = correlation_distance(&c);
        for (linkage, average) in [(Linkage::Complete, false), (Linkage::Average, true)] {
            let t = hierarchical_cluster(&d, linkage).unwrap();
            let naive = naive_heights(&d, average);
            assert_eq!(t.merges().len(), naive.len());
            for (s, (m, (members, h))) in t.merges().iter().zip(&naive).enumerate() {
                assert!((m.height - h).abs() < 1e-12, "seed {seed} step {s}");
                assert_eq!(&leaves_of(&t, 9 + s), members);
                assert_eq!(m.size, members.len());
            }
        }
    }
}

#[test]
fn linkage_names_parse() {
    assert_eq!("complete".parse::<Linkage>().unwrap(), Linkage::Complete);
    assert_eq!("Ward".parse::<Linkage>().unwrap(), Linkage::Ward);
    assert!(matches!("single".parse::<Linkage>(), Err(ClusterError::UnknownLinkage(_))));
}

#[test]
fn invalid_inputs_are_rejected() {
    let asym = Matrix::from_rows(&[vec![0.0, 0.2], vec![0.3, 0.0]]).unwrap();
    assert!(hierarchical_cluster(&asym, Linkage::Complete).is_err());
    let (_, c) = random_corr(4, 1);
    let t = hierarchical_cluster(&correlation_distance(&c), Linkage::Complete).unwrap();
    assert!(matches!(cut_tree(&t, 0), Err(ClusterError::InvalidK { .. })));
    assert!(matches!(cut_tree(&t, 5), Err(ClusterError::InvalidK { .. })));
}

#[test]
fn medoid_list_and_assignment_tables() {
    let cl = Clustering::from_assignment(&[4, 4, 7, 4]);
    assert_eq!(cl.assignment(), &[0, 0, 1, 0]);
    let names: Vec<String> = ["a", "b", "c", "d"].iter().map(|s| s.to_string()).collect();
    assert_eq!(cl.assignment_tsv(&names), "feature\tcluster\na\t0\nb\t0\nc\t1\nd\t0\n");
    assert!(matches!(cl.medoid_list(&names), Err(ClusterError::NoMedoids)));
}

#[test]
fn diagnostics_cover_every_k() {
    let (_, c) = random_corr(8, 3);
    let t = hierarchical_cluster(&correlation_distance(&c), Linkage::Complete).unwrap();
    let rows = diagnostics_sweep(&t, &c, 1..=8).unwrap();
    assert_eq!(rows.len(), 8);
    assert_eq!(rows[7].size_max, 1);
    assert_eq!(rows[0].size_min, 8);
    assert_eq!(rows[7].corr_min, 1.0);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn cuts_refine_as_k_grows(seed in any::<u64>(), d in 3usize..12) {
        let (_, c) = random_corr(d, seed);
        let t = hierarchical_cluster(&correlation_distance(&c), Linkage::Complete).unwrap();
        for k in 2..=d {
            let fine = cut_tree(&t, k).unwrap();
            let coarse = cut_tree(&t, k - 1).unwrap();
            prop_assert_eq!(fine.n_clusters(), k);
            for cluster in fine.clusters() {
                let parent = coarse.cluster_of(cluster[0]);
                prop_assert!(cluster.iter().all(|&v| coarse.cluster_of(v) == parent));
            }
        }
    }

    #[test]
    fn heights_monotone_for_reducible_linkages(seed in any::<u64>(), d in 2usize..12) {
        let (_, c) = random_corr(d, seed);
        let dist = correlation_distance(&c);
        for l in [Linkage::Complete, Linkage::Average, Linkage::Ward] {
            prop_assert!(hierarchical_cluster(&dist, l).unwrap().heights_monotone());
        }
    }

    #[test]
    fn medoids_sit_in_their_clusters(seed in any::<u64>(), d in 2usize..12, k in 1usize..12) {
        let k = k.min(d);
        let (data, c) = random_corr(d, seed);
        let t = hierarchical_cluster(&correlation_distance(&c), Linkage::Complete).unwrap();
        let cl = select_medoids(&cut_tree(&t, k).unwrap(), &c);
        let medoids = cl.medoids().unwrap();
        prop_assert_eq!(medoids.len(), k);
        for (i, &m) in medoids.iter().enumerate() {
            prop_assert_eq!(cl.cluster_of(m), i);
        }
        let (reduced, membership) = reduce_dataset(&data, &cl).unwrap();
        prop_assert_eq!(reduced.n_cols(), k);
        prop_assert_eq!(membership.iter().map(|m| m.members.len()).sum::<usize>(), d);
    }

    #[test]
    fn reduce_at_full_dimension_is_identity(seed in any::<u64>(), d in 1usize..10) {
        let (data, c) = random_corr(d.max(2), seed);
        let d = data.n_cols();
        let t = hierarchical_cluster(&correlation_distance(&c), Linkage::Average).unwrap();
        let cl = select_medoids(&cut_tree(&t, d).unwrap(), &c);
        let (reduced, _) = reduce_dataset(&data, &cl).unwrap();
        prop_assert_eq!(reduced.names(), data.names());
        prop_assert_eq!(reduced.columns(), data.columns());
    }
}
