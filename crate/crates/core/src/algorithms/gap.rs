use super::balanced::check_balance;
use super::{check_delta, check_distinct, sample_subset, AlgorithmConstants};
use crate::error::{Error, Result};
use crate::oracle::{SameClusterOracle, Vertex};
use crate::signed_graph::build_query_graph_with;
use crate::spectral::bal_partition_with;

/// Degree cut separating the `h` largest clusters from the rest in a
/// `t`-vertex query graph:
/// `t/2 - (1/2 - 1/k + (h + 1/2) b / k^2) delta t`.
pub fn degree_threshold(t: usize, k: usize, h: usize, b: f64, delta: f64) -> f64 {
    let (t, k, h) = (t as f64, k as f64, h as f64);
    t / 2.0 - (0.5 - 1.0 / k + (h + 0.5) * b / (k * k)) * delta * t
}

/// Recovers sub-clusters of the `h` largest clusters when the size profile
/// has a gap after index `h`. The query graph on a uniform sample is
/// filtered by [`degree_threshold`] and the survivors split into `h` parts.
pub fn gap_clustering<O: SameClusterOracle + ?Sized>(
    oracle: &mut O,
    vertices: &[Vertex],
    h: usize,
    k: usize,
    delta: f64,
    b: f64,
    consts: &AlgorithmConstants,
) -> Result<Vec<Vec<Vertex>>> {
    check_balance(b)?;
    check_delta(delta)?;
    let t = consts.gap_sample_size(vertices.len(), k, b, delta);
    if vertices.len() < t {
        return Err(Error::InsufficientVertices { needed: t, available: vertices.len() });
    }
    gap_clustering_sized(oracle, vertices, h, k, delta, b, t, consts)
}

/// As [`gap_clustering`] with an explicit sample size, clamped to
/// `|vertices|`.
#[allow(clippy::too_many_arguments)]
pub fn gap_clustering_sized<O: SameClusterOracle + ?Sized>(
    oracle: &mut O,
    vertices: &[Vertex],
    h: usize,
    k: usize,
    delta: f64,
    b: f64,
    t: usize,
    consts: &AlgorithmConstants,
) -> Result<Vec<Vec<Vertex>>> {
    check_balance(b)?;
    check_delta(delta)?;
    check_distinct(vertices)?;
    if h == 0 || h >= k {
        return Err(Error::InvalidIndex { h, max: k.saturating_sub(1) });
    }
    let t = t.min(vertices.len());
    let sample = sample_subset(&mut oracle.sampling_rng(), vertices, t);
    let graph = build_query_graph_with(oracle, &sample, consts.execution)?;
    let cut = degree_threshold(sample.len(), k, h, b, delta);
    let survivors = graph.positions_with_degree_at_least(cut);
    if survivors.len() < h {
        return Err(Error::DegenerateFilter { survivors: survivors.len(), h });
    }
    let filtered = graph.induced(&survivors)?;
    if h == 1 {
        return Ok(vec![filtered.vertices().to_vec()]);
    }
    let parts = bal_partition_with(&filtered, h, delta, h as f64 / (2.0 * k as f64), consts.execution)?;
    Ok(parts
        .into_clusters()
        .into_iter()
        .map(|c| c.into_iter().map(|p| filtered.vertices()[p]).collect())
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::{all_vertices, FaultyOracle, GroundTruth};

    #[test]
    fn threshold_value() {
        assert!((degree_threshold(100, 4, 2, 0.1, 0.5) - 36.71875).abs() < 1e-12);
    }

    #[test]
    fn noiseless_filter_keeps_large_clusters() {
        let mut labels = vec![1; 40];
        labels.extend(vec![2; 40]);
        labels.extend(vec![3; 5]);
        let truth = GroundTruth::new(labels, 3).unwrap();
        let mut o = FaultyOracle::new(truth.clone(), 1.0, 0).unwrap();
        let consts = AlgorithmConstants::desk_defaults();
        let parts = gap_clustering_sized(&mut o, &all_vertices(85), 2, 3, 1.0, 0.5, 85, &consts).unwrap();
        assert_eq!(parts, vec![truth.members(1), truth.members(2)]);
    }

    #[test]
    fn index_and_filter_errors() {
        let truth = GroundTruth::new(vec![1; 20], 1).unwrap();
        let mut o = FaultyOracle::new(truth, 1.0, 0).unwrap();
        let consts = AlgorithmConstants::desk_defaults();
        let all = all_vertices(20);
        assert!(matches!(
            gap_clustering_sized(&mut o, &all, 3, 3, 1.0, 0.5, 20, &consts),
            Err(Error::InvalidIndex { .. })
        ));
        assert!(matches!(
            gap_clustering_sized(&mut o, &all, 0, 3, 1.0, 0.5, 20, &consts),
            Err(Error::InvalidIndex { .. })
        ));
    }
}
