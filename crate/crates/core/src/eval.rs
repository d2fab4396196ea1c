//! Precision and recall of learned graphs against a ground truth, and
//! (alpha, soe) sweeps over replicated synthetic data.

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::citest::correlation_matrix;
use crate::graph::PartialDag;
use crate::pc::{maximal_pattern, pc_from_correlation, PcConfig, PcError, PriorKnowledge};
use crate::synth::{sample, GaussianBn};
use crate::Scalar;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EvalError {
    #[error("learned graph has {learned} nodes, truth has {truth}")]
    NodeMismatch { learned: usize, truth: usize },
    #[error("invalid sweep settings: {0}")]
    Settings(String),
    #[error(transparent)]
    Pc(#[from] PcError),
}

/// The four ratios are `None` when their denominator is zero.
///
/// An edge undirected in the learned graph counts toward neither
/// `matched_oriented` nor `learned_oriented`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EvalReport {
    pub undirected_precision: Option<f64>,
    pub undirected_recall: Option<f64>,
    pub directed_precision: Option<f64>,
    pub directed_recall: Option<f64>,
    pub learned_edges: usize,
    pub true_edges: usize,
    pub learned_oriented: usize,
    pub true_oriented: usize,
    pub matched_undirected: usize,
    pub matched_oriented: usize,
}

fn ratio(num: usize, den: usize) -> Option<f64> {
    (den > 0).then(|| num as f64 / den as f64)
}

pub fn score_graphs(learned: &PartialDag, truth: &PartialDag) -> Result<EvalReport, EvalError> {
    if learned.node_count() != truth.node_count() {
        return Err(EvalError::NodeMismatch { learned: learned.node_count(), truth: truth.node_count() });
    }
    let mut matched_undirected = 0;
    let mut matched_oriented = 0;
    for e in learned.edges() {
        if truth.is_adjacent(e.a, e.b) {
            matched_undirected += 1;
        }
        if e.is_directed() && truth.is_directed(e.a, e.b) {
            matched_oriented += 1;
        }
    }
    let (learned_edges, true_edges) = (learned.edge_count(), truth.edge_count());
    let (learned_oriented, true_oriented) = (learned.directed_count(), truth.directed_count());
    Ok(EvalReport {
        undirected_precision: ratio(matched_undirected, learned_edges),
        undirected_recall: ratio(matched_undirected, true_edges),
        directed_precision: ratio(matched_oriented, learned_oriented),
        directed_recall: ratio(matched_oriented, true_oriented),
        learned_edges,
        true_edges,
        learned_oriented,
        true_oriented,
        matched_undirected,
        matched_oriented,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    UndirectedPrecision,
    UndirectedRecall,
    DirectedPrecision,
    DirectedRecall,
    LearnedEdges,
}

impl Metric {
    pub const ALL: [Metric; 5] = [
        Metric::UndirectedPrecision,
        Metric::UndirectedRecall,
        Metric::DirectedPrecision,
        Metric::DirectedRecall,
        Metric::LearnedEdges,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Metric::UndirectedPrecision => "undirected_precision",
            Metric::UndirectedRecall => "undirected_recall",
            Metric::DirectedPrecision => "directed_precision",
            Metric::DirectedRecall => "directed_recall",
            Metric::LearnedEdges => "learned_edges",
        }
    }

    pub fn of(self, r: &EvalReport) -> Option<f64> {
        match self {
            Metric::UndirectedPrecision => r.undirected_precision,
            Metric::UndirectedRecall => r.undirected_recall,
            Metric::DirectedPrecision => r.directed_precision,
            Metric::DirectedRecall => r.directed_recall,
            Metric::LearnedEdges => Some(r.learned_edges as f64),
        }
    }
}

/// Mean and sample standard deviation over the replicates where a metric
/// is defined. `stddev` is 0 for a single defined replicate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MetricSummary {
    pub mean: Option<f64>,
    pub stddev: Option<f64>,
    pub replicates_defined: usize,
    pub replicates: usize,
}

pub fn summarize(values: impl IntoIterator<Item = Option<f64>>) -> MetricSummary {
    let mut defined = Vec::new();
    let mut replicates = 0;
    for v in values {
        replicates += 1;
        if let Some(x) = v {
            defined.push(x);
        }
    }
    let k = defined.len();
    if k == 0 {
        return MetricSummary { mean: None, stddev: None, replicates_defined: 0, replicates };
    }
    let mean = defined.iter().sum::<f64>() / k as f64;
    let stddev = if k == 1 {
        0.0
    } else {
        (defined.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (k - 1) as f64).sqrt()
    };
    MetricSummary { mean: Some(mean), stddev: Some(stddev), replicates_defined: k, replicates }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepConfig {
    pub replicates: usize,
    pub n: usize,
    pub alphas: Vec<f64>,
    pub soes: Vec<f64>,
    /// Replicate `r` samples with seed `seed + r`.
    pub seed: u64,
    /// Depth, candidate pool and skeleton mode; alpha and soe are overridden.
    pub pc: PcConfig,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            replicates: 10,
            n: 50_000,
            alphas: vec![0.001, 0.01, 0.05, 0.1],
            soes: vec![0.0, 0.05, 0.1],
            seed: 0,
            pc: PcConfig::default(),
        }
    }
}

impl SweepConfig {
    pub fn validate(&self) -> Result<(), EvalError> {
        if self.replicates == 0 {
            return Err(EvalError::Settings("replicates must be at least 1".into()));
        }
        if self.n < 4 {
            return Err(EvalError::Settings("sample size must be at least 4".into()));
        }
        if self.alphas.is_empty() || self.soes.is_empty() {
            return Err(EvalError::Settings("alpha and soe lists must be non-empty".into()));
        }
        for &a in &self.alphas {
            PcConfig { alpha: a, ..self.pc }.validate()?;
        }
        for &s in &self.soes {
            PcConfig { soe: s, ..self.pc }.validate()?;
        }
        Ok(())
    }

    pub fn replicate_seeds(&self) -> Vec<u64> {
        (0..self.replicates as u64).map(|r| self.seed.wrapping_add(r)).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepCell {
    pub alpha: f64,
    pub soe: f64,
    /// One report per replicate, in seed order.
    pub reports: Vec<EvalReport>,
}

impl SweepCell {
    pub fn summary(&self, metric: Metric) -> MetricSummary {
        summarize(self.reports.iter().map(|r| metric.of(r)))
    }

    pub fn mean(&self, metric: Metric) -> Option<f64> {
        self.summary(metric).mean
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepResult {
    /// Alpha-major grid.
    pub cells: Vec<SweepCell>,
}

impl SweepResult {
    pub fn cell(&self, alpha: f64, soe: f64) -> Option<&SweepCell> {
        self.cells.iter().find(|c| c.alpha == alpha && c.soe == soe)
    }

    /// `alpha soe metric mean stddev replicatesDefined`, tab separated;
    /// undefined values are written as `NA`.
    pub fn to_tsv(&self) -> String {
        let na = |v: Option<f64>| v.map_or_else(|| "NA".to_string(), |x| x.to_string());
        let mut out = String::from("alpha\tsoe\tmetric\tmean\tstddev\treplicatesDefined\n");
        for c in &self.cells {
            for m in Metric::ALL {
                let s = c.summary(m);
                out.push_str(&format!(
                    "{}\t{}\t{}\t{}\t{}\t{}\n",
                    c.alpha,
                    c.soe,
                    m.as_str(),
                    na(s.mean),
                    na(s.stddev),
                    s.replicates_defined
                ));
            }
        }
        out
    }
}

/// Ground truth for scoring: the maximally oriented pattern of the DAG
/// under `k`, or the DAG itself when `raw_dag` is set.
pub fn truth_graph(dag: &PartialDag, k: &PriorKnowledge, raw_dag: bool) -> Result<PartialDag, EvalError> {
    if raw_dag {
        Ok(dag.clone())
    } else {
        Ok(maximal_pattern(dag, k)?)
    }
}

/// Samples `replicates` datasets from `bn`, runs PC at every grid point on
/// each, and scores against `truth`. Replicates run in parallel; the result
/// does not depend on scheduling.
pub fn sweep<F: Scalar>(
    bn: &GaussianBn<F>,
    truth: &PartialDag,
    cfg: &SweepConfig,
    k: &PriorKnowledge,
) -> Result<SweepResult, EvalError> {
    cfg.validate()?;
    if truth.node_count() != bn.n_nodes() {
        return Err(EvalError::NodeMismatch { learned: bn.n_nodes(), truth: truth.node_count() });
    }
    let per_replicate: Vec<Vec<EvalReport>> = cfg
        .replicate_seeds()
        .into_par_iter()
        .map(|seed| {
            let data = sample(bn, cfg.n, seed);
            let corr = correlation_matrix(&data).map_err(PcError::from)?;
            let mut reports = Vec::with_capacity(cfg.alphas.len() * cfg.soes.len());
            for &alpha in &cfg.alphas {
                for &soe in &cfg.soes {
                    let pc_cfg = PcConfig { alpha, soe, ..cfg.pc };
                    let out = pc_from_correlation(&corr, &pc_cfg, k)?;
                    reports.push(score_graphs(&out.graph, truth)?);
                }
            }
            Ok(reports)
        })
        .collect::<Result<_, EvalError>>()?;

    let mut cells = Vec::new();
    for (ai, &alpha) in cfg.alphas.iter().enumerate() {
        for (si, &soe) in cfg.soes.iter().enumerate() {
            let idx = ai * cfg.soes.len() + si;
            let reports = per_replicate.iter().map(|r| r[idx]).collect();
            cells.push(SweepCell { alpha, soe, reports });
        }
    }
    Ok(SweepResult { cells })
}
