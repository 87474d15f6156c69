//! Higher-order network models of path data.
//!
//! Observed trajectories over a first-order graph become fixed-order and
//! multi-order Markov models. Centralities and next-step predictions are
//! computed on the resulting higher-order networks.

pub mod analytics;
pub mod error;
pub mod experiment;
pub mod graph;
pub mod hon;
pub mod labels;
pub mod metrics;
pub mod multi_order;
pub mod paths;
pub mod synth;
pub mod trajectory;

pub use error::{Error, ErrorKind, Result};
pub use graph::{EdgeRow, FirstOrderGraph};
pub use hon::{HigherOrderModel, LogLikelihood, WeightMode};
pub use labels::{Labels, NodeId};
pub use multi_order::{detect_optimal_order, likelihood_ratio_test, MultiOrderModel};
pub use trajectory::{Path, PathCorpus};
