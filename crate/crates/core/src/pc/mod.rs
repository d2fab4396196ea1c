//! The PC algorithm with tiered background knowledge.
//!
//! Pipeline: skeleton search from the complete graph, orientation of every
//! edge whose direction the knowledge fixes, collider detection, then the
//! four orientation rules to closure. Output is deterministic for fixed
//! input: pairs and conditioning sets are enumerated lexicographically.

mod knowledge;
mod log;
mod orient;
mod skeleton;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use knowledge::{apply_tiers, KnowledgeError, PriorKnowledge};
pub use log::{Action, OrientationLog, OrientationRecord, Rule};
pub use orient::{apply_orientation_rules, close_under_rules, orient_colliders};
pub use skeleton::{learn_skeleton, SkeletonResult, TestFailure};

use crate::citest::{correlation_matrix, CiError, CorrelationMatrix, FisherZTest, IndependenceTest};
use crate::dataset::Dataset;
use crate::graph::{PartialDag, SepsetMap};
use crate::Scalar;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PcError {
    #[error(transparent)]
    Ci(#[from] CiError),
    #[error(transparent)]
    Knowledge(#[from] KnowledgeError),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("graph has {graph} nodes but knowledge covers {knowledge}")]
    Size { graph: usize, knowledge: usize },
}

/// Where phase I draws conditioning sets for an edge `x - y` (`x < y`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CandidatePool {
    /// Subsets of `adj(x) \ {y}`, then of `adj(y) \ {x}`.
    #[default]
    TwoSided,
    /// Subsets of `adj(y) \ {x}` only. Not complete in general.
    PaperStrict,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SkeletonMode {
    /// Removals take effect immediately (reference behaviour).
    #[default]
    Sequential,
    /// Tests of one level run in parallel against the level's starting graph.
    LevelParallel,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PcConfig {
    pub alpha: f64,
    /// Squared partial correlations below this count as independence.
    pub soe: f64,
    /// Largest conditioning-set size; `None` is unbounded.
    pub depth: Option<usize>,
    pub candidates: CandidatePool,
    pub mode: SkeletonMode,
}

impl Default for PcConfig {
    fn default() -> Self {
        Self {
            alpha: 0.05,
            soe: 0.0,
            depth: None,
            candidates: CandidatePool::TwoSided,
            mode: SkeletonMode::Sequential,
        }
    }
}

impl PcConfig {
    pub fn new(alpha: f64, soe: f64) -> Self {
        Self { alpha, soe, ..Self::default() }
    }

    pub fn validate(&self) -> Result<(), PcError> {
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(PcError::Config(format!("alpha must lie in (0, 1), got {}", self.alpha)));
        }
        if !(self.soe >= 0.0) {
            return Err(PcError::Config(format!("soe must be non-negative, got {}", self.soe)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct PcOutput {
    pub graph: PartialDag,
    /// Undirected phase I result.
    pub skeleton: PartialDag,
    pub sepsets: SepsetMap,
    pub log: OrientationLog,
    pub failures: Vec<TestFailure>,
    pub tests_run: usize,
}

/// Runs PC on a dataset with the Fisher-z test. Node labels are the
/// dataset's column names.
pub fn pc<F: Scalar>(
    data: &Dataset<F>,
    cfg: &PcConfig,
    k: &PriorKnowledge,
) -> Result<PcOutput, PcError> {
    let corr = correlation_matrix(data)?;
    let mut out = pc_from_correlation(&corr, cfg, k)?;
    let labels = data.names().to_vec();
    out.graph.set_labels(labels.clone()).expect("one label per column");
    out.skeleton.set_labels(labels).expect("one label per column");
    Ok(out)
}

pub fn pc_from_correlation<F: Scalar>(
    corr: &CorrelationMatrix<F>,
    cfg: &PcConfig,
    k: &PriorKnowledge,
) -> Result<PcOutput, PcError> {
    cfg.validate()?;
    let test = FisherZTest::new(corr, F::lit(cfg.alpha), F::lit(cfg.soe))?;
    pc_with_test(&test, cfg, k)
}

/// PC with an arbitrary independence test (e.g. a d-separation oracle).
pub fn pc_with_test<T: IndependenceTest + ?Sized>(
    test: &T,
    cfg: &PcConfig,
    k: &PriorKnowledge,
) -> Result<PcOutput, PcError> {
    if !k.tiers().is_empty() && k.tiers().len() != test.n_vars() {
        return Err(PcError::Size { graph: test.n_vars(), knowledge: k.tiers().len() });
    }
    let skel = learn_skeleton(test, cfg);
    let mut log = OrientationLog::default();
    let mut g = skel.graph.clone();
    knowledge::apply_knowledge(&mut g, k, &mut log)?;
    orient::orient_colliders_in_place(&mut g, &skel.sepsets, k, &mut log);
    close_under_rules(&mut g, k, &mut log);
    Ok(PcOutput {
        graph: g,
        skeleton: skel.graph,
        sepsets: skel.sepsets,
        log,
        failures: skel.failures,
        tests_run: skel.tests_run,
    })
}

/// Maximally oriented pattern of a DAG's equivalence class, restricted to
/// members that agree with `k`: skeleton, unshielded colliders, knowledge
/// orientations, then rule closure.
pub fn maximal_pattern(dag: &PartialDag, k: &PriorKnowledge) -> Result<PartialDag, PcError> {
    let mut g = dag.skeleton();
    for (x, z, y) in dag.unshielded_colliders() {
        g.orient(x, z).and_then(|_| g.orient(y, z)).map_err(|source| {
            PcError::Knowledge(KnowledgeError::Orientation { from: x, to: z, source })
        })?;
    }
    for (a, b) in dag.directed_edges() {
        if !k.allows(a, b) {
            return Err(KnowledgeError::Conflict { from: a, to: b }.into());
        }
    }
    let mut log = OrientationLog::default();
    knowledge::apply_knowledge(&mut g, k, &mut log)?;
    close_under_rules(&mut g, k, &mut log);
    Ok(g)
}
