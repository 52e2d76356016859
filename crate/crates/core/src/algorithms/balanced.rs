use super::{check_delta, check_distinct, sample_subset, AlgorithmConstants};
use crate::error::{Error, Result};
use crate::oracle::{SameClusterOracle, Vertex};
use crate::signed_graph::build_query_graph_with;
use crate::spectral::bal_partition_with;

/// Recovers `k` sub-clusters of a `b`-balanced instance from a uniform sample
/// of `balanced_sample_size` vertices. Fails if `vertices` is smaller than
/// the sample.
pub fn balanced_clustering<O: SameClusterOracle + ?Sized>(
    oracle: &mut O,
    vertices: &[Vertex],
    k: usize,
    delta: f64,
    b: f64,
    consts: &AlgorithmConstants,
) -> Result<Vec<Vec<Vertex>>> {
    check_balance(b)?;
    check_delta(delta)?;
    let t = consts.balanced_sample_size(vertices.len(), k, b, delta);
    if vertices.len() < t {
        return Err(Error::InsufficientVertices { needed: t, available: vertices.len() });
    }
    balanced_clustering_sized(oracle, vertices, k, delta, b, t, consts)
}

/// As [`balanced_clustering`] with an explicit sample size, clamped to
/// `|vertices|`.
pub fn balanced_clustering_sized<O: SameClusterOracle + ?Sized>(
    oracle: &mut O,
    vertices: &[Vertex],
    k: usize,
    delta: f64,
    b: f64,
    t: usize,
    consts: &AlgorithmConstants,
) -> Result<Vec<Vec<Vertex>>> {
    check_balance(b)?;
    check_delta(delta)?;
    check_distinct(vertices)?;
    if k == 0 {
        return Err(Error::InvalidArgument("k must be at least 1".into()));
    }
    let t = t.min(vertices.len());
    if t < k {
        return Err(Error::TooManyClusters { k, len: t });
    }
    let sample = sample_subset(&mut oracle.sampling_rng(), vertices, t);
    if k == 1 {
        return Ok(vec![sample]);
    }
    let graph = build_query_graph_with(oracle, &sample, consts.execution)?;
    let parts = bal_partition_with(&graph, k, delta, b / 2.0, consts.execution)?;
    Ok(parts
        .into_clusters()
        .into_iter()
        .map(|c| c.into_iter().map(|p| sample[p]).collect())
        .collect())
}

pub(crate) fn check_balance(b: f64) -> Result<()> {
    if b > 0.0 && b <= 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("balance {b} must lie in (0, 1]")))
    }
}
