//! Clustering with a faulty oracle: sub-cluster recovery from a queried
//! sample, bias testing, and growing sub-clusters into full clusters.
//!
//! Every procedure takes its multiplicative constants from
//! [`AlgorithmConstants`]; fractional sizes and thresholds are rounded up.

mod balanced;
mod bias;
mod enumerate;
mod gap;
mod grow;
mod noisy;

use std::collections::HashSet;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::oracle::Vertex;
use crate::par::Execution;

pub use balanced::{balanced_clustering, balanced_clustering_sized};
pub use bias::test_bias;
pub use enumerate::{enumerate_index, Accepted, Enumeration, Rejection};
pub use gap::{degree_threshold, gap_clustering, gap_clustering_sized};
pub use grow::{belong_to_cluster, global_grow};
pub use noisy::{noisy_clustering, noisy_clustering_traced, NoisyRun, Round, RoundOutcome, NOISY_BALANCE, NOISY_ETA};

/// Every constant the procedures multiply by, plus a global scale applied to
/// all derived sizes.
///
/// Derived quantities (natural log throughout):
///
/// | quantity | formula |
/// |---|---|
/// | balanced sample | `balanced_sample_mult * c0 * k^2 ln n / (b^2 delta^2)` |
/// | gap sample | `gap_sample_mult * c0 * k^4 ln n / (b^2 delta^2)` |
/// | growth subset | `grow_size_mult * ln n / delta^2` |
/// | tested subset | `subset_size_mult * ln n / (eta^2 delta^2)` |
/// | bias-test probes | `bias_trials_mult * k ln n / b` |
/// | loop floor | `stop_size_mult * c0 * k^4 ln n / delta^2` |
///
/// each multiplied by `scale`. Enumeration is admissible when
/// `eta^2 / b >= admissibility_mult / c0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AlgorithmConstants {
    pub c0: f64,
    pub balanced_sample_mult: f64,
    pub gap_sample_mult: f64,
    pub grow_size_mult: f64,
    pub subset_size_mult: f64,
    pub bias_trials_mult: f64,
    pub stop_size_mult: f64,
    pub admissibility_mult: f64,
    pub scale: f64,
    /// How inner data-parallel loops run. Never changes results.
    #[serde(skip)]
    pub execution: Execution,
}

impl Default for AlgorithmConstants {
    fn default() -> Self {
        AlgorithmConstants::desk_defaults()
    }
}

impl AlgorithmConstants {
    /// The literal constants of the analysis. Far beyond desk scale: used to
    /// check formulas, not to run.
    pub fn paper_defaults() -> Self {
        AlgorithmConstants {
            c0: 1000.0,
            balanced_sample_mult: 400.0,
            gap_sample_mult: 8.0,
            grow_size_mult: 1600.0,
            subset_size_mult: 256.0,
            bias_trials_mult: 16.0,
            stop_size_mult: 40000.0,
            admissibility_mult: 64.0,
            scale: 1.0,
            execution: Execution::default(),
        }
    }

    /// Constants calibrated so the acceptance regimes (hundreds to a few
    /// thousand vertices) run in seconds with exact recovery.
    pub fn desk_defaults() -> Self {
        AlgorithmConstants {
            c0: 4.0,
            balanced_sample_mult: 1.0,
            gap_sample_mult: 0.01,
            grow_size_mult: 4.0,
            subset_size_mult: 0.1,
            bias_trials_mult: 1.0,
            stop_size_mult: 0.0025,
            admissibility_mult: 0.4,
            scale: 1.0,
            execution: Execution::default(),
        }
    }

    pub fn with_scale(mut self, scale: f64) -> Self {
        self.scale = scale;
        self
    }

    pub fn with_execution(mut self, execution: Execution) -> Self {
        self.execution = execution;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("c0", self.c0),
            ("balanced_sample_mult", self.balanced_sample_mult),
            ("gap_sample_mult", self.gap_sample_mult),
            ("grow_size_mult", self.grow_size_mult),
            ("subset_size_mult", self.subset_size_mult),
            ("bias_trials_mult", self.bias_trials_mult),
            ("stop_size_mult", self.stop_size_mult),
            ("admissibility_mult", self.admissibility_mult),
            ("scale", self.scale),
        ];
        for (name, value) in fields {
            if !(value.is_finite() && value > 0.0) {
                return Err(Error::InvalidArgument(format!("{name} = {value} must be positive")));
            }
        }
        Ok(())
    }

    fn size(&self, raw: f64) -> usize {
        (raw * self.scale).ceil().max(1.0) as usize
    }

    pub fn balanced_sample_size(&self, n: usize, k: usize, b: f64, delta: f64) -> usize {
        let k = k as f64;
        self.size(self.balanced_sample_mult * self.c0 * k * k * ln(n) / (b * b * delta * delta))
            .max(2)
    }

    pub fn gap_sample_size(&self, n: usize, k: usize, b: f64, delta: f64) -> usize {
        let k4 = (k as f64).powi(4);
        self.size(self.gap_sample_mult * self.c0 * k4 * ln(n) / (b * b * delta * delta))
            .max(2)
    }

    pub fn grow_size(&self, n: usize, delta: f64) -> usize {
        self.size(self.grow_size_mult * ln(n) / (delta * delta))
    }

    pub fn subset_size(&self, n: usize, eta: f64, delta: f64) -> usize {
        self.size(self.subset_size_mult * ln(n) / (eta * eta * delta * delta))
    }

    pub fn bias_trials(&self, n: usize, k: usize, b: f64) -> usize {
        self.size(self.bias_trials_mult * k as f64 * ln(n) / b)
    }

    pub fn stop_size(&self, n: usize, k: usize, delta: f64) -> usize {
        let k4 = (k as f64).powi(4);
        self.size(self.stop_size_mult * self.c0 * k4 * ln(n) / (delta * delta))
    }

    pub fn admissibility_floor(&self) -> f64 {
        self.admissibility_mult / self.c0
    }

    pub fn admits(&self, eta: f64, b: f64) -> bool {
        eta * eta / b >= self.admissibility_floor()
    }
}

fn ln(n: usize) -> f64 {
    (n.max(1) as f64).ln()
}

/// One recovered cluster.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Cluster {
    pub id: usize,
    pub vertices: Vec<Vertex>,
}

/// Disjoint labeled vertex sets plus whatever was left unclustered.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Clustering {
    clusters: Vec<Cluster>,
    remainder: Vec<Vertex>,
    partial: bool,
}

impl Clustering {
    /// Empty sets are dropped; ids are assigned `1..` in the given order;
    /// vertices are sorted. Fails if any vertex appears twice.
    pub fn new(sets: Vec<Vec<Vertex>>, remainder: Vec<Vertex>) -> Result<Self> {
        let mut seen = HashSet::new();
        let mut clusters = Vec::with_capacity(sets.len());
        for mut set in sets.into_iter().filter(|s| !s.is_empty()) {
            set.sort_unstable();
            for &v in &set {
                if !seen.insert(v) {
                    return Err(Error::DuplicateVertex(v));
                }
            }
            clusters.push(Cluster { id: clusters.len() + 1, vertices: set });
        }
        let mut remainder = remainder;
        remainder.sort_unstable();
        for &v in &remainder {
            if !seen.insert(v) {
                return Err(Error::DuplicateVertex(v));
            }
        }
        Ok(Clustering { clusters, remainder, partial: false })
    }

    pub fn with_partial(mut self, partial: bool) -> Self {
        self.partial = partial;
        self
    }

    pub fn clusters(&self) -> &[Cluster] {
        &self.clusters
    }

    pub fn remainder(&self) -> &[Vertex] {
        &self.remainder
    }

    /// True when the pipeline stopped early because no index was accepted.
    pub fn is_partial(&self) -> bool {
        self.partial
    }

    pub fn vertex_sets(&self) -> Vec<Vec<Vertex>> {
        self.clusters.iter().map(|c| c.vertices.clone()).collect()
    }

    pub fn cluster_sizes(&self) -> Vec<usize> {
        self.clusters.iter().map(|c| c.vertices.len()).collect()
    }

    /// True if some recovered cluster equals `members` exactly.
    pub fn contains_cluster(&self, members: &[Vertex]) -> bool {
        let mut sorted = members.to_vec();
        sorted.sort_unstable();
        self.clusters.iter().any(|c| c.vertices == sorted)
    }
}

/// Uniform sample of `t` vertices without replacement, returned ascending.
pub(crate) fn sample_subset<R: Rng>(rng: &mut R, pool: &[Vertex], t: usize) -> Vec<Vertex> {
    let mut out: Vec<Vertex> = rand::seq::index::sample(rng, pool.len(), t.min(pool.len()))
        .into_iter()
        .map(|i| pool[i])
        .collect();
    out.sort_unstable();
    out
}

/// The first `g` vertices of `set` by ascending id.
pub(crate) fn first_by_id(set: &[Vertex], g: usize) -> Result<Vec<Vertex>> {
    if set.len() < g {
        return Err(Error::SubsetTooSmall { needed: g, available: set.len() });
    }
    let mut sorted = set.to_vec();
    sorted.sort_unstable();
    sorted.truncate(g);
    Ok(sorted)
}

pub(crate) fn check_delta(delta: f64) -> Result<()> {
    if delta > 0.0 && delta <= 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidBias(delta))
    }
}

pub(crate) fn check_distinct(set: &[Vertex]) -> Result<()> {
    let mut seen = HashSet::with_capacity(set.len());
    for &v in set {
        if !seen.insert(v) {
            return Err(Error::DuplicateVertex(v));
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn proof_profile_reproduces_literal_sizes() {
        let c = AlgorithmConstants::paper_defaults();
        let (n, k, b, d) = (1_000_000usize, 3usize, 0.5, 0.25);
        let ln = (n as f64).ln();
        assert_eq!(
            c.balanced_sample_size(n, k, b, d),
            (400.0 * 1000.0 * 9.0 * ln / (b * b * d * d)).ceil() as usize
        );
        assert_eq!(
            c.gap_sample_size(n, k, b, d),
            (8.0 * 1000.0 * 81.0 * ln / (b * b * d * d)).ceil() as usize
        );
        assert_eq!(c.grow_size(n, d), (1600.0 * ln / (d * d)).ceil() as usize);
        assert_eq!(c.subset_size(n, 0.1, d), (256.0 * ln / (0.01 * d * d)).ceil() as usize);
        assert_eq!(c.bias_trials(n, k, b), (16.0 * 3.0 * ln / b).ceil() as usize);
        assert_eq!(c.stop_size(n, k, d), (40000.0 * 1000.0 * 81.0 * ln / (d * d)).ceil() as usize);
        assert!(c.admits(0.1, 0.1));
        assert!(!AlgorithmConstants { c0: 500.0, ..c }.admits(0.1, 0.1));
    }

    #[test]
    fn constants_validate_and_scale() {
        assert!(AlgorithmConstants::desk_defaults().validate().is_ok());
        assert!(AlgorithmConstants::paper_defaults().validate().is_ok());
        let bad = AlgorithmConstants { c0: 0.0, ..AlgorithmConstants::desk_defaults() };
        assert!(bad.validate().is_err());
        let c = AlgorithmConstants::desk_defaults();
        assert!(c.with_scale(2.0).grow_size(1000, 0.5) >= 2 * c.grow_size(1000, 0.5) - 1);
        assert!(c.admits(0.1, 0.1));
    }

    #[test]
    fn clustering_rejects_overlap() {
        let v = |x| Vertex(x);
        assert!(Clustering::new(vec![vec![v(1), v(2)], vec![v(2)]], vec![]).is_err());
        assert!(Clustering::new(vec![vec![v(1)]], vec![v(1)]).is_err());
        let c = Clustering::new(vec![vec![], vec![v(3), v(1)]], vec![v(2)]).unwrap();
        assert_eq!(c.clusters().len(), 1);
        assert_eq!(c.clusters()[0].id, 1);
        assert_eq!(c.clusters()[0].vertices, vec![v(1), v(3)]);
        assert!(c.contains_cluster(&[v(3), v(1)]));
    }
}
