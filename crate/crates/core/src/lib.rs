//! Causal structure discovery for sequential tabular data.
//!
//! The crate learns partially directed causal graphs with the PC algorithm
//! (Fisher-z tests, temporal tiers, strength-of-effect cutoff), reduces
//! correlated feature sets by hierarchical clustering with medoids, fits and
//! samples linear-Gaussian Bayesian networks, and scores learned graphs
//! against a ground truth.
//!
//! Numeric code is generic over [`Scalar`] (`f32` or `f64`); the `*64`
//! aliases below are the usual entry points.

pub mod citest;
pub mod clustering;
pub mod dataset;
pub mod demo;
pub mod eval;
pub mod graph;
pub mod io;
pub mod linalg;
pub mod pc;
pub mod scalar;
pub mod special;
pub mod synth;

pub use scalar::Scalar;

pub use citest::{CiDecision, CorrelationMatrix, FisherZ, IndependenceTest};
pub use dataset::Dataset;
pub use graph::{Edge, Mark, PartialDag, SepsetMap};
pub use pc::{PcConfig, PcOutput, PriorKnowledge};
pub use clustering::{Clustering, Dendrogram, Linkage};
pub use synth::{GaussianBn, NormalityReport};
pub use eval::{score_graphs, EvalReport};

pub type Dataset64 = Dataset<f64>;
pub type Dataset32 = Dataset<f32>;
pub type CorrelationMatrix64 = CorrelationMatrix<f64>;
pub type CorrelationMatrix32 = CorrelationMatrix<f32>;
pub type GaussianBn64 = GaussianBn<f64>;
pub type GaussianBn32 = GaussianBn<f32>;
pub type Dendrogram64 = Dendrogram<f64>;
pub type Dendrogram32 = Dendrogram<f32>;
