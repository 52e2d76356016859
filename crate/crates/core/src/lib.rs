//! Clustering from a faulty same-cluster oracle with persistent noise.
//!
//! The oracle answers `sign(tau(u, v) * eta)` where the noise `eta` is fixed
//! per pair. The pipeline samples vertices, recovers sub-clusters spectrally
//! from the queried sample, and grows them into full clusters by majority
//! vote.

pub mod algorithms;
pub mod error;
pub mod eval;
pub mod experiment;
pub mod oracle;
pub mod par;
pub mod signed_graph;
pub mod spectral;
pub mod verify;

pub use algorithms::{AlgorithmConstants, Cluster, Clustering};
pub use error::{Error, Result};
pub use oracle::{FaultyOracle, GroundTruth, SameClusterOracle, Sign, Vertex};
pub use par::Execution;
