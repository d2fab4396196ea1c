//! Linear-Gaussian Bayesian networks: fitting, sampling, implied covariance
//! and normality diagnostics.

use rand::seq::{index, SliceRandom};
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::{ChaCha20Rng, ChaCha8Rng};
use serde::Serialize;
use thiserror::Error;

use crate::dataset::{mean, Dataset, DatasetError};
use crate::graph::PartialDag;
use crate::linalg::{least_squares_qr, LinalgError, Matrix};
use crate::pc::PriorKnowledge;
use crate::special::normal_quantile;
use crate::Scalar;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SynthError {
    #[error("graph must be fully directed and acyclic")]
    NotADag,
    #[error("graph has {graph} nodes, data has {data} columns")]
    SizeMismatch { graph: usize, data: usize },
    #[error("node `{node}`: {rows} rows are not enough for {parents} parents")]
    TooFewRows { node: String, rows: usize, parents: usize },
    #[error("node `{node}`: parent matrix is rank deficient")]
    RankDeficient { node: String },
    #[error("node `{node}`: {source}")]
    Fit { node: String, source: LinalgError },
    #[error("node `{node}`: parameters do not match the graph ({reason})")]
    Parameters { node: String, reason: String },
    #[error("column `{0}` is constant")]
    DegenerateColumn(String),
    #[error("need at least {min} rows, got {got}")]
    TooFewSamples { min: usize, got: usize },
    #[error("name `{0}` cannot be written (tab, comma or newline)")]
    InvalidName(String),
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("invalid generator settings: {0}")]
    Settings(String),
    #[error(transparent)]
    Dataset(#[from] DatasetError),
}

/// Local model of one node: `x = intercept + sum coefs[i] * x[parents[i]] + N(0, noise_std^2)`.
#[derive(Debug, Clone, PartialEq)]
pub struct NodeModel<F> {
    pub parents: Vec<usize>,
    pub coefs: Vec<F>,
    pub intercept: F,
    pub noise_std: F,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GaussianBn<F> {
    dag: PartialDag,
    nodes: Vec<NodeModel<F>>,
    order: Vec<usize>,
}

impl<F: Scalar> GaussianBn<F> {
    /// Parent lists must equal the DAG's parents (any order).
    pub fn new(dag: PartialDag, nodes: Vec<NodeModel<F>>) -> Result<Self, SynthError> {
        if !dag.is_fully_directed() {
            return Err(SynthError::NotADag);
        }
        let order = dag.topological_order().ok_or(SynthError::NotADag)?;
        if nodes.len() != dag.node_count() {
            return Err(SynthError::SizeMismatch { graph: dag.node_count(), data: nodes.len() });
        }
        for (v, m) in nodes.iter().enumerate() {
            let bad = |reason: &str| SynthError::Parameters {
                node: dag.label(v).to_string(),
                reason: reason.to_string(),
            };
            if m.coefs.len() != m.parents.len() {
                return Err(bad("coefficient count differs from parent count"));
            }
            let mut sorted = m.parents.clone();
            sorted.sort_unstable();
            if sorted != dag.parents(v) {
                return Err(bad("parent list differs from the graph"));
            }
            if !(m.noise_std >= F::zero()) {
                return Err(bad("negative noise standard deviation"));
            }
            if !m.intercept.is_finite() || m.coefs.iter().any(|c| !c.is_finite()) {
                return Err(bad("non-finite parameter"));
            }
        }
        Ok(Self { dag, nodes, order })
    }

    pub fn dag(&self) -> &PartialDag {
        &self.dag
    }

    pub fn nodes(&self) -> &[NodeModel<F>] {
        &self.nodes
    }

    pub fn node(&self, v: usize) -> &NodeModel<F> {
        &self.nodes[v]
    }

    pub fn n_nodes(&self) -> usize {
        self.nodes.len()
    }

    pub fn names(&self) -> &[String] {
        self.dag.labels()
    }

    /// Coefficient of `parent` in the model of `child` (0 if not a parent).
    pub fn coefficient(&self, child: usize, parent: usize) -> F {
        let m = &self.nodes[child];
        m.parents.iter().position(|&p| p == parent).map_or(F::zero(), |i| m.coefs[i])
    }

    /// The same model over rescaled variables `x_v / sd(x_v)`, so every
    /// node has unit implied variance. Nodes with zero variance are left
    /// unscaled.
    pub fn standardized(&self) -> Self {
        let s = implied_covariance(self);
        let sd: Vec<F> = (0..self.n_nodes())
            .map(|v| if s[(v, v)] > F::zero() { s[(v, v)].sqrt() } else { F::one() })
            .collect();
        let nodes = self
            .nodes
            .iter()
            .enumerate()
            .map(|(v, m)| NodeModel {
                parents: m.parents.clone(),
                coefs: m.parents.iter().zip(&m.coefs).map(|(&p, &b)| b * sd[p] / sd[v]).collect(),
                intercept: m.intercept / sd[v],
                noise_std: m.noise_std / sd[v],
            })
            .collect();
        Self { dag: self.dag.clone(), nodes, order: self.order.clone() }
    }

    /// One line per node: `name<TAB>parents<TAB>coefs<TAB>intercept<TAB>noise_std`,
    /// with comma-separated parent names and coefficients. Values use the
    /// shortest representation that parses back to the same number.
    pub fn to_text(&self) -> Result<String, SynthError> {
        for name in self.names() {
            if name.is_empty() || name.contains(['\t', ',', '\n', '\r']) || name.starts_with('#') {
                return Err(SynthError::InvalidName(name.clone()));
            }
        }
        let mut out = String::from("# name\tparents\tcoefficients\tintercept\tnoise_std\n");
        for (v, m) in self.nodes.iter().enumerate() {
            let parents: Vec<&str> = m.parents.iter().map(|&p| self.dag.label(p)).collect();
            let coefs: Vec<String> = m.coefs.iter().map(|c| c.to_string()).collect();
            out.push_str(&format!(
                "{}\t{}\t{}\t{}\t{}\n",
                self.dag.label(v),
                parents.join(","),
                coefs.join(","),
                m.intercept,
                m.noise_std
            ));
        }
        Ok(out)
    }

    pub fn from_text(text: &str) -> Result<Self, SynthError> {
        let parse_err = |line: usize, message: String| SynthError::Parse { line, message };
        let mut rows = Vec::new();
        for (i, line) in text.lines().enumerate() {
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            let fields: Vec<&str> = line.split('\t').collect();
            if fields.len() != 5 {
                return Err(parse_err(i + 1, format!("expected 5 fields, got {}", fields.len())));
            }
            rows.push((i + 1, fields));
        }
        let names: Vec<String> = rows.iter().map(|(_, f)| f[0].to_string()).collect();
        let index = |line: usize, name: &str| {
            names
                .iter()
                .position(|n| n == name)
                .ok_or_else(|| parse_err(line, format!("unknown parent `{name}`")))
        };
        let num = |line: usize, s: &str| {
            s.parse::<F>().map_err(|_| parse_err(line, format!("invalid number `{s}`")))
        };
        let list = |s: &str| -> Vec<String> {
            if s.is_empty() {
                Vec::new()
            } else {
                s.split(',').map(str::to_string).collect()
            }
        };
        let mut nodes = Vec::with_capacity(rows.len());
        let mut arcs = Vec::new();
        for (v, (line, f)) in rows.iter().enumerate() {
            let parents = list(f[1])
                .iter()
                .map(|p| index(*line, p))
                .collect::<Result<Vec<_>, _>>()?;
            let coefs = list(f[2]).iter().map(|c| num(*line, c)).collect::<Result<Vec<_>, _>>()?;
            arcs.extend(parents.iter().map(|&p| (p, v)));
            nodes.push(NodeModel {
                parents,
                coefs,
                intercept: num(*line, f[3])?,
                noise_std: num(*line, f[4])?,
            });
        }
        let mut dag = PartialDag::from_directed(names.len(), &arcs).map_err(|e| parse_err(0, e.to_string()))?;
        dag.set_labels(names).map_err(|e| parse_err(0, e.to_string()))?;
        Self::new(dag, nodes)
    }
}

/// Ordinary least squares of every column on its parents' columns, with an
/// intercept. Noise std is `sqrt(RSS / (n - p - 1))`.
pub fn fit_gaussian_bn<F: Scalar>(dag: &PartialDag, data: &Dataset<F>) -> Result<GaussianBn<F>, SynthError> {
    if !dag.is_fully_directed() || dag.topological_order().is_none() {
        return Err(SynthError::NotADag);
    }
    if dag.node_count() != data.n_cols() {
        return Err(SynthError::SizeMismatch { graph: dag.node_count(), data: data.n_cols() });
    }
    let n = data.n_rows();
    let means: Vec<F> = (0..data.n_cols()).map(|j| data.mean(j)).collect();
    let centered = |j: usize| -> Vec<F> { data.column(j).iter().map(|v| *v - means[j]).collect() };
    let rank_tol = F::epsilon() * F::lit(1e4);
    let mut nodes = Vec::with_capacity(dag.node_count());
    for v in 0..dag.node_count() {
        let parents = dag.parents(v);
        let node = data.name(v).to_string();
        if n <= parents.len() + 1 {
            return Err(SynthError::TooFewRows { node, rows: n, parents: parents.len() });
        }
        let x: Vec<Vec<F>> = parents.iter().map(|&p| centered(p)).collect();
        let (coefs, rss) = least_squares_qr(&x, &centered(v), rank_tol).map_err(|e| match e {
            LinalgError::RankDeficient { .. } => SynthError::RankDeficient { node: node.clone() },
            other => SynthError::Fit { node: node.clone(), source: other },
        })?;
        let intercept = means[v]
            - parents.iter().zip(&coefs).map(|(&p, &b)| b * means[p]).sum::<F>();
        let dof = F::from_usize_lossy(n - parents.len() - 1);
        nodes.push(NodeModel { parents, coefs, intercept, noise_std: (rss / dof).sqrt() });
    }
    let mut dag = dag.clone();
    dag.set_labels(data.names().to_vec()).expect("one label per column");
    GaussianBn::new(dag, nodes)
}

/// Uniform on the open interval (0, 1) from the top 53 bits of a word.
fn open_uniform(word: u64) -> f64 {
    ((word >> 11) as f64 + 0.5) * (1.0 / (1u64 << 53) as f64)
}

/// Draws `n` rows. Node `v` uses ChaCha20 stream `v` under `seed`, one
/// 64-bit word per standard-normal draw, transformed by the inverse CDF; the
/// output therefore depends only on `(bn, n, seed)`.
pub fn sample<F: Scalar>(bn: &GaussianBn<F>, n: usize, seed: u64) -> Dataset<F> {
    let mut columns: Vec<Vec<F>> = vec![Vec::new(); bn.n_nodes()];
    for &v in &bn.order {
        let m = &bn.nodes[v];
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        rng.set_stream(v as u64);
        let mut col = vec![m.intercept; n];
        for (&p, &b) in m.parents.iter().zip(&m.coefs) {
            for (c, x) in col.iter_mut().zip(&columns[p]) {
                *c = *c + b * *x;
            }
        }
        for c in col.iter_mut() {
            let z = F::lit(normal_quantile(open_uniform(rng.next_u64())));
            *c = *c + m.noise_std * z;
        }
        columns[v] = col;
    }
    Dataset::from_columns(bn.names().to_vec(), columns).expect("names come from a valid graph")
}

/// Covariance of the joint distribution, `(I - B)^-1 D (I - B)^-T` with
/// `B[child][parent]` the coefficients and `D` the noise variances.
///
/// Computed by the recursion `Cov(v, u) = sum_p b_vp Cov(p, u)` over a
/// topological order.
pub fn implied_covariance<F: Scalar>(bn: &GaussianBn<F>) -> Matrix<F> {
    let d = bn.n_nodes();
    let mut s = Matrix::zeros(d, d);
    let mut done: Vec<usize> = Vec::with_capacity(d);
    for &v in &bn.order {
        let m = &bn.nodes[v];
        for &u in &done {
            let c: F = m.parents.iter().zip(&m.coefs).map(|(&p, &b)| b * s[(p, u)]).sum();
            s[(v, u)] = c;
            s[(u, v)] = c;
        }
        let mut var = m.noise_std * m.noise_std;
        for (&p, &b) in m.parents.iter().zip(&m.coefs) {
            var = var + b * s[(p, v)];
        }
        s[(v, v)] = var;
        done.push(v);
    }
    s
}

/// Whether kurtosis is reported raw (normal = 3) or in excess (normal = 0).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Kurtosis {
    #[default]
    Excess,
    Raw,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ColumnMoments {
    pub column: String,
    pub skewness: f64,
    pub kurtosis: f64,
    pub within_range: bool,
}

/// Uncorrected moment estimators: `g1 = m3 / m2^1.5`, `g2 = m4 / m2^2`
/// (minus 3 for excess), with `m_k` the central moments using `1/n`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NormalityReport {
    pub kurtosis: Kurtosis,
    pub estimator: &'static str,
    pub columns: Vec<ColumnMoments>,
    pub fraction_within_range: f64,
}

impl NormalityReport {
    pub fn to_tsv(&self) -> String {
        let label = match self.kurtosis {
            Kurtosis::Excess => "excess_kurtosis",
            Kurtosis::Raw => "kurtosis",
        };
        let mut out = format!("column\tskewness\t{label}\twithin_range\n");
        for c in &self.columns {
            out.push_str(&format!("{}\t{}\t{}\t{}\n", c.column, c.skewness, c.kurtosis, c.within_range));
        }
        out.push_str(&format!("# fraction_within_range\t{}\n", self.fraction_within_range));
        out
    }
}

pub const NORMALITY_RANGE: f64 = 2.0;

pub fn moment_stats<F: Scalar>(data: &Dataset<F>, kurtosis: Kurtosis) -> Result<NormalityReport, SynthError> {
    if data.n_rows() < 4 {
        return Err(SynthError::TooFewSamples { min: 4, got: data.n_rows() });
    }
    let mut columns = Vec::with_capacity(data.n_cols());
    for j in 0..data.n_cols() {
        let x: Vec<f64> = data.column(j).iter().map(|v| v.as_f64()).collect();
        let mu = mean(&x);
        let n = x.len() as f64;
        let (mut m2, mut m3, mut m4) = (0.0, 0.0, 0.0);
        for v in &x {
            let d = v - mu;
            let d2 = d * d;
            m2 += d2;
            m3 += d2 * d;
            m4 += d2 * d2;
        }
        let (m2, m3, m4) = (m2 / n, m3 / n, m4 / n);
        if !(m2 > 0.0) {
            return Err(SynthError::DegenerateColumn(data.name(j).to_string()));
        }
        let skewness = m3 / m2.powf(1.5);
        let raw = m4 / (m2 * m2);
        let (k, excess) = match kurtosis {
            Kurtosis::Excess => (raw - 3.0, raw - 3.0),
            Kurtosis::Raw => (raw, raw - 3.0),
        };
        let within_range = skewness.abs() <= NORMALITY_RANGE && excess.abs() <= NORMALITY_RANGE;
        columns.push(ColumnMoments { column: data.name(j).to_string(), skewness, kurtosis: k, within_range });
    }
    let fraction_within_range =
        columns.iter().filter(|c| c.within_range).count() as f64 / columns.len().max(1) as f64;
    Ok(NormalityReport { kurtosis, estimator: "uncorrected moments", columns, fraction_within_range })
}

/// Settings for [`random_network`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NetworkSpec {
    pub nodes: usize,
    /// Average number of neighbours per node; the edge count is `nodes * mean_degree / 2`.
    pub mean_degree: f64,
    /// Coefficient magnitudes are uniform on `[coef_min, coef_max]` with a random sign.
    pub coef_min: f64,
    pub coef_max: f64,
    pub noise_std: f64,
    /// Number of equally sized tiers along the causal order; 0 or 1 means none.
    pub tiers: usize,
}

impl Default for NetworkSpec {
    fn default() -> Self {
        Self { nodes: 30, mean_degree: 2.0, coef_min: 0.5, coef_max: 1.5, noise_std: 1.0, tiers: 0 }
    }
}

/// A random generating model together with the tier ranks it respects.
#[derive(Debug, Clone, PartialEq)]
pub struct RandomNetwork<F> {
    pub bn: GaussianBn<F>,
    pub tiers: Vec<Option<u32>>,
}

impl<F: Scalar> RandomNetwork<F> {
    pub fn knowledge(&self) -> PriorKnowledge {
        if self.tiers.iter().all(Option::is_none) {
            PriorKnowledge::none(self.tiers.len())
        } else {
            PriorKnowledge::from_tiers(self.tiers.clone())
        }
    }
}

/// Random DAG over a shuffled causal order with exactly
/// `round(nodes * mean_degree / 2)` edges drawn uniformly from the
/// order-respecting pairs, then random coefficients. Tiers cut the order
/// into consecutive blocks, so every edge points forward in tier rank.
pub fn random_network<F: Scalar>(spec: &NetworkSpec, seed: u64) -> Result<RandomNetwork<F>, SynthError> {
    let n = spec.nodes;
    let pairs = n * n.saturating_sub(1) / 2;
    if !(spec.mean_degree >= 0.0) || !(spec.coef_min >= 0.0 && spec.coef_min <= spec.coef_max) {
        return Err(SynthError::Settings("need mean_degree >= 0 and 0 <= coef_min <= coef_max".into()));
    }
    if !(spec.noise_std >= 0.0) {
        return Err(SynthError::Settings("noise_std must be non-negative".into()));
    }
    let m = ((n as f64 * spec.mean_degree / 2.0).round() as usize).min(pairs);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut rng);

    let mut arcs = Vec::with_capacity(m);
    for k in index::sample(&mut rng, pairs, m).into_vec().into_iter() {
        let (i, j) = pair_from_index(k, n);
        arcs.push((order[i], order[j]));
    }
    arcs.sort_unstable();
    let dag = PartialDag::from_directed(n, &arcs).expect("order-respecting arcs are acyclic");

    let mut nodes = Vec::with_capacity(n);
    for v in 0..n {
        let parents = dag.parents(v);
        let coefs = parents
            .iter()
            .map(|_| {
                let mag = if spec.coef_max > spec.coef_min {
                    rng.random_range(spec.coef_min..=spec.coef_max)
                } else {
                    spec.coef_min
                };
                F::lit(if rng.random_bool(0.5) { mag } else { -mag })
            })
            .collect();
        nodes.push(NodeModel { parents, coefs, intercept: F::zero(), noise_std: F::lit(spec.noise_std) });
    }

    let mut tiers = vec![None; n];
    if spec.tiers > 1 && n > 0 {
        for (pos, &v) in order.iter().enumerate() {
            tiers[v] = Some((pos * spec.tiers / n) as u32);
        }
    }
    Ok(RandomNetwork { bn: GaussianBn::new(dag, nodes)?, tiers })
}

// k-th pair (i, j), i < j, in row-major order over the upper triangle.
fn pair_from_index(mut k: usize, n: usize) -> (usize, usize) {
    let mut i = 0;
    loop {
        let row = n - 1 - i;
        if k < row {
            return (i, i + 1 + k);
        }
        k -= row;
        i += 1;
    }
}
