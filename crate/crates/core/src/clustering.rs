//! Feature reduction by agglomerative clustering under the `1 - |corr|`
//! distance, with one medoid kept per cluster.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::citest::CorrelationMatrix;
use crate::dataset::{Dataset, DatasetError};
use crate::linalg::Matrix;
use crate::Scalar;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ClusterError {
    #[error("distance matrix invalid at ({0}, {1}): must be square, symmetric, non-negative with zero diagonal")]
    InvalidDistance(usize, usize),
    #[error("cluster count {k} outside 1..={n}")]
    InvalidK { k: usize, n: usize },
    #[error("clustering covers {clustering} features, data has {data}")]
    SizeMismatch { clustering: usize, data: usize },
    #[error("medoids have not been selected")]
    NoMedoids,
    #[error("unknown linkage `{0}`")]
    UnknownLinkage(String),
    #[error(transparent)]
    Dataset(#[from] DatasetError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Linkage {
    /// Maximum pairwise distance.
    #[default]
    Complete,
    Average,
    Median,
    Centroid,
    Ward,
}

impl std::str::FromStr for Linkage {
    type Err = ClusterError;
    fn from_str(s: &str) -> Result<Self, ClusterError> {
        match s.to_ascii_lowercase().as_str() {
            "complete" | "maximum" | "max" => Ok(Linkage::Complete),
            "average" => Ok(Linkage::Average),
            "median" => Ok(Linkage::Median),
            "centroid" => Ok(Linkage::Centroid),
            "ward" => Ok(Linkage::Ward),
            _ => Err(ClusterError::UnknownLinkage(s.to_string())),
        }
    }
}

/// `1 - |r|` for every pair, zero on the diagonal.
pub fn correlation_distance<F: Scalar>(c: &CorrelationMatrix<F>) -> Matrix<F> {
    let d = c.dim();
    Matrix::from_fn(d, d, |i, j| if i == j { F::zero() } else { F::one() - c.get(i, j).abs() })
}

/// One agglomeration step, `a < b`. Ids `0..n` are leaves; the cluster
/// created at step `s` gets id `n + s`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Merge<F> {
    pub a: usize,
    pub b: usize,
    pub height: F,
    pub size: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dendrogram<F> {
    n_leaves: usize,
    merges: Vec<Merge<F>>,
}

impl<F: Scalar> Dendrogram<F> {
    pub fn n_leaves(&self) -> usize {
        self.n_leaves
    }

    pub fn merges(&self) -> &[Merge<F>] {
        &self.merges
    }

    pub fn heights_monotone(&self) -> bool {
        self.merges.windows(2).all(|w| w[0].height <= w[1].height)
    }

    /// Leaves in left-to-right order of the final tree.
    pub fn leaf_order(&self) -> Vec<usize> {
        let n = self.n_leaves;
        if n == 0 {
            return Vec::new();
        }
        let mut out = Vec::with_capacity(n);
        let mut stack = vec![n + self.merges.len() - 1];
        if self.merges.is_empty() {
            stack = vec![0];
        }
        while let Some(id) = stack.pop() {
            if id < n {
                out.push(id);
            } else {
                let m = &self.merges[id - n];
                stack.push(m.b);
                stack.push(m.a);
            }
        }
        out
    }
}

fn validate_distance<F: Scalar>(d: &Matrix<F>) -> Result<(), ClusterError> {
    if d.rows() != d.cols() {
        return Err(ClusterError::InvalidDistance(d.rows(), d.cols()));
    }
    let tol = F::lit(1e-12);
    for i in 0..d.rows() {
        if d[(i, i)].abs() > tol {
            return Err(ClusterError::InvalidDistance(i, i));
        }
        for j in i + 1..d.cols() {
            let v = d[(i, j)];
            if !(v >= -tol) || (v - d[(j, i)]).abs() > tol {
                return Err(ClusterError::InvalidDistance(i, j));
            }
        }
    }
    Ok(())
}

/// Agglomerative clustering with Lance-Williams distance updates.
///
/// The closest pair is merged at each step, ties going to the smallest
/// pair of slot indices. Median, centroid and Ward updates are applied to
/// the dissimilarities as given.
pub fn hierarchical_cluster<F: Scalar>(
    d: &Matrix<F>,
    linkage: Linkage,
) -> Result<Dendrogram<F>, ClusterError> {
    validate_distance(d)?;
    let n = d.rows();
    let mut dist = d.clone();
    let mut active: Vec<bool> = vec![true; n];
    let mut ids: Vec<usize> = (0..n).collect();
    let mut sizes: Vec<usize> = vec![1; n];
    let mut merges = Vec::with_capacity(n.saturating_sub(1));

    for step in 0..n.saturating_sub(1) {
        let mut best: Option<(usize, usize, F)> = None;
        for i in 0..n {
            if !active[i] {
                continue;
            }
            for j in i + 1..n {
                if !active[j] {
                    continue;
                }
                let v = dist[(i, j)];
                if best.is_none_or(|(_, _, b)| v < b) {
                    best = Some((i, j, v));
                }
            }
        }
        let (i, j, h) = best.expect("at least two active clusters");
        let (ni, nj) = (F::from_usize_lossy(sizes[i]), F::from_usize_lossy(sizes[j]));
        let dij = dist[(i, j)];
        let half = F::lit(0.5);
        for k in 0..n {
            if !active[k] || k == i || k == j {
                continue;
            }
            let (dki, dkj) = (dist[(k, i)], dist[(k, j)]);
            let nk = F::from_usize_lossy(sizes[k]);
            let v = match linkage {
                Linkage::Complete => dki.max(dkj),
                Linkage::Average => (ni * dki + nj * dkj) / (ni + nj),
                Linkage::Median => half * dki + half * dkj - F::lit(0.25) * dij,
                Linkage::Centroid => {
                    (ni * dki + nj * dkj) / (ni + nj) - ni * nj * dij / ((ni + nj) * (ni + nj))
                }
                Linkage::Ward => ((ni + nk) * dki + (nj + nk) * dkj - nk * dij) / (ni + nj + nk),
            };
            dist[(k, i)] = v;
            dist[(i, k)] = v;
        }
        let (a, b) = (ids[i].min(ids[j]), ids[i].max(ids[j]));
        merges.push(Merge { a, b, height: h, size: sizes[i] + sizes[j] });
        sizes[i] += sizes[j];
        ids[i] = n + step;
        active[j] = false;
    }
    Ok(Dendrogram { n_leaves: n, merges })
}

/// Assignment of features to clusters, optionally with medoids.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Clustering {
    assignment: Vec<usize>,
    medoids: Option<Vec<usize>>,
}

impl Clustering {
    /// Cluster ids are renumbered by first appearance in node order.
    pub fn from_assignment(raw: &[usize]) -> Self {
        let mut map = std::collections::HashMap::new();
        let assignment = raw
            .iter()
            .map(|c| {
                let next = map.len();
                *map.entry(*c).or_insert(next)
            })
            .collect();
        Self { assignment, medoids: None }
    }

    pub fn n_features(&self) -> usize {
        self.assignment.len()
    }

    pub fn n_clusters(&self) -> usize {
        self.assignment.iter().max().map_or(0, |m| m + 1)
    }

    pub fn assignment(&self) -> &[usize] {
        &self.assignment
    }

    pub fn cluster_of(&self, v: usize) -> usize {
        self.assignment[v]
    }

    /// Members of each cluster, ascending.
    pub fn clusters(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.n_clusters()];
        for (v, &c) in self.assignment.iter().enumerate() {
            out[c].push(v);
        }
        out
    }

    pub fn medoids(&self) -> Option<&[usize]> {
        self.medoids.as_deref()
    }

    /// Feature-name / cluster-id table followed by nothing else.
    pub fn assignment_tsv(&self, names: &[String]) -> String {
        let mut out = String::from("feature\tcluster\n");
        for (v, c) in self.assignment.iter().enumerate() {
            out.push_str(&format!("{}\t{}\n", names[v], c));
        }
        out
    }

    /// `cluster<TAB>medoid` lines.
    pub fn medoid_list(&self, names: &[String]) -> Result<String, ClusterError> {
        let medoids = self.medoids.as_ref().ok_or(ClusterError::NoMedoids)?;
        let mut out = String::from("cluster\tmedoid\n");
        for (c, &m) in medoids.iter().enumerate() {
            out.push_str(&format!("{}\t{}\n", c, names[m]));
        }
        Ok(out)
    }
}

/// Cuts the tree into exactly `k` clusters by applying all but the last
/// `k - 1` merges.
pub fn cut_tree<F: Scalar>(t: &Dendrogram<F>, k: usize) -> Result<Clustering, ClusterError> {
    let n = t.n_leaves;
    if k == 0 || k > n {
        return Err(ClusterError::InvalidK { k, n });
    }
    let mut parent: Vec<usize> = (0..2 * n).collect();
    fn find(p: &mut [usize], mut x: usize) -> usize {
        while p[x] != x {
            p[x] = p[p[x]];
            x = p[x];
        }
        x
    }
    for (step, m) in t.merges.iter().take(n - k).enumerate() {
        let new = n + step;
        let ra = find(&mut parent, m.a);
        let rb = find(&mut parent, m.b);
        parent[ra] = new;
        parent[rb] = new;
    }
    let roots: Vec<usize> = (0..n).map(|v| find(&mut parent, v)).collect();
    Ok(Clustering::from_assignment(&roots))
}

fn mean_abs_corr_to_others<F: Scalar>(c: &CorrelationMatrix<F>, v: usize, members: &[usize]) -> F {
    let others: Vec<F> = members.iter().filter(|&&u| u != v).map(|&u| c.get(v, u).abs()).collect();
    if others.is_empty() {
        return F::one();
    }
    others.iter().copied().sum::<F>() / F::from_usize_lossy(others.len())
}

/// Picks, per cluster, the member with the largest mean `|corr|` to the
/// other members; ties go to the smallest index.
pub fn select_medoids<F: Scalar>(cl: &Clustering, c: &CorrelationMatrix<F>) -> Clustering {
    let medoids = cl
        .clusters()
        .iter()
        .map(|members| {
            let mut best = members[0];
            let mut best_score = mean_abs_corr_to_others(c, best, members);
            for &v in &members[1..] {
                let s = mean_abs_corr_to_others(c, v, members);
                if s > best_score {
                    best = v;
                    best_score = s;
                }
            }
            best
        })
        .collect();
    Clustering { assignment: cl.assignment.clone(), medoids: Some(medoids) }
}

/// Summary of cluster coherence and size for one cut.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ClusterDiagnostics {
    pub k: usize,
    pub corr_min: f64,
    pub corr_max: f64,
    pub corr_mean: f64,
    pub size_min: usize,
    pub size_max: usize,
    pub size_mean: f64,
}

/// Mean pairwise `|corr|` within a cluster; 1 for singletons.
pub fn within_cluster_correlation<F: Scalar>(members: &[usize], c: &CorrelationMatrix<F>) -> f64 {
    if members.len() < 2 {
        return 1.0;
    }
    let mut sum = 0.0;
    let mut count = 0usize;
    for (i, &a) in members.iter().enumerate() {
        for &b in &members[i + 1..] {
            sum += c.get(a, b).abs().as_f64();
            count += 1;
        }
    }
    sum / count as f64
}

pub fn cluster_diagnostics<F: Scalar>(cl: &Clustering, c: &CorrelationMatrix<F>) -> ClusterDiagnostics {
    let clusters = cl.clusters();
    let corrs: Vec<f64> = clusters.iter().map(|m| within_cluster_correlation(m, c)).collect();
    let sizes: Vec<usize> = clusters.iter().map(Vec::len).collect();
    let k = clusters.len();
    ClusterDiagnostics {
        k,
        corr_min: corrs.iter().copied().fold(f64::INFINITY, f64::min),
        corr_max: corrs.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        corr_mean: corrs.iter().sum::<f64>() / k as f64,
        size_min: sizes.iter().copied().min().unwrap_or(0),
        size_max: sizes.iter().copied().max().unwrap_or(0),
        size_mean: sizes.iter().sum::<usize>() as f64 / k as f64,
    }
}

/// Diagnostics for each `k` in `ks` (the curves of cluster coherence
/// against cluster count).
pub fn diagnostics_sweep<F: Scalar>(
    t: &Dendrogram<F>,
    c: &CorrelationMatrix<F>,
    ks: impl IntoIterator<Item = usize>,
) -> Result<Vec<ClusterDiagnostics>, ClusterError> {
    ks.into_iter().map(|k| Ok(cluster_diagnostics(&cut_tree(t, k)?, c))).collect()
}

pub fn diagnostics_tsv(rows: &[ClusterDiagnostics]) -> String {
    let mut out =
        String::from("k\tcorr_min\tcorr_max\tcorr_mean\tsize_min\tsize_max\tsize_mean\n");
    for r in rows {
        out.push_str(&format!(
            "{}\t{}\t{}\t{}\t{}\t{}\t{}\n",
            r.k, r.corr_min, r.corr_max, r.corr_mean, r.size_min, r.size_max, r.size_mean
        ));
    }
    out
}

/// Which original features each kept medoid stands for.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClusterMembership {
    pub medoid: String,
    pub cluster: usize,
    pub members: Vec<String>,
}

/// Restricts the data to medoid columns in index order.
pub fn reduce_dataset<F: Scalar>(
    data: &Dataset<F>,
    cl: &Clustering,
) -> Result<(Dataset<F>, Vec<ClusterMembership>), ClusterError> {
    if cl.n_features() != data.n_cols() {
        return Err(ClusterError::SizeMismatch { clustering: cl.n_features(), data: data.n_cols() });
    }
    let medoids = cl.medoids().ok_or(ClusterError::NoMedoids)?;
    let clusters = cl.clusters();
    let mut keep: Vec<(usize, usize)> = medoids.iter().enumerate().map(|(c, &m)| (m, c)).collect();
    keep.sort_unstable();
    let idx: Vec<usize> = keep.iter().map(|(m, _)| *m).collect();
    let reduced = data.select_columns(&idx)?;
    let membership = keep
        .iter()
        .map(|&(m, c)| ClusterMembership {
            medoid: data.name(m).to_string(),
            cluster: c,
            members: clusters[c].iter().map(|&v| data.name(v).to_string()).collect(),
        })
        .collect();
    Ok((reduced, membership))
}
