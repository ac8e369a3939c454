//! Finite-graph toolkit for Benjamini–Schramm local statistics, hyperfinite
//! partitioning, component censuses, local-rule transfer between
//! statistically similar graphs, local-global distances and Schreier-action
//! encodings.

pub mod balls;
pub mod census;
pub mod generators;
pub mod local_global;
pub mod matcher;
pub mod oracle;
pub mod graph;
pub mod partition;
pub mod schreier;
pub mod seed;
pub mod stats;

pub use balls::{CanonicalBallKey, LabelKind, RootedBall, VertexLabels};
pub use graph::{load_edge_list, EdgeSet, Graph, GraphError};
pub use seed::Seed;

/// Exact rational used for probabilities, distances and fractions.
pub type Rational = num_rational::Ratio<i128>;
