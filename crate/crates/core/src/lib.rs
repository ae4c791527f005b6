//! Instantaneous model selection for graph learning.
//!
//! The crate turns graphs into fixed-length structural fingerprints
//! ([`metafeat`]), learns from a matrix of prior model performances
//! ([`perf`]) with one of ten selection algorithms ([`selectors`]), and
//! scores those algorithms under five evaluation protocols ([`testbeds`],
//! [`eval`]). No candidate model is ever trained on the query graph.

pub mod error;
pub mod eval;
pub mod features;
pub mod graph;
pub mod linalg;
pub mod metafeat;
pub mod perf;
pub mod pipeline;
pub mod selectors;
pub mod split;
pub mod synth;
pub mod testbeds;

mod rng;

pub use error::{Error, Result};
pub use eval::{EvaluationReport, MetricKind};
pub use features::FeatureMatrix;
pub use graph::{CatalogEntry, Graph, LoadOptions};
pub use linalg::Matrix;
pub use metafeat::{meta_features, MetaFeatureVector, Schema};
pub use perf::{ModelConfig, PerformanceMatrix, Task};
pub use selectors::{Algorithm, SelectorConfig, SelectorModel, TrainCorpus};
pub use split::{EdgeSplit, NodeSplit};
pub use testbeds::{Fold, Testbed, TestbedSplit};
