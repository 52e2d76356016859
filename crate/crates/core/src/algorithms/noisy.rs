use super::enumerate::{enumerate_index, Accepted, Rejection};
use super::grow::{grow_all, Membership};
use super::{check_delta, check_distinct, AlgorithmConstants, Clustering};
use crate::error::{Error, Result};
use crate::oracle::{SameClusterOracle, Vertex};

/// Balance parameter handed to every enumeration round.
pub const NOISY_BALANCE: f64 = 0.1;
/// Bias level handed to every enumeration round.
pub const NOISY_ETA: f64 = 0.1;

#[derive(Debug, Clone, PartialEq)]
pub enum RoundOutcome {
    /// Index `h` accepted; `subsets` are the tested reference sets and
    /// `sizes` the sizes of the clusters grown from them.
    Grew { h: usize, subsets: Vec<Vec<Vertex>>, sizes: Vec<usize> },
    Fail,
}

/// One pass of the main loop.
#[derive(Debug, Clone, PartialEq)]
pub struct Round {
    pub remaining_clusters: usize,
    pub unclustered: usize,
    pub outcome: RoundOutcome,
    pub rejections: Vec<Rejection>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NoisyRun {
    pub clustering: Clustering,
    pub rounds: Vec<Round>,
    /// Size below which the loop stops and leaves vertices unclustered.
    pub floor: usize,
}

/// Full pipeline for arbitrary cluster sizes.
///
/// Repeatedly finds an accepted index `h` over the unclustered vertices,
/// grows one cluster per biased subset as [`global_grow`](super::global_grow) does, and lowers the cluster budget by `h`.
/// Stops when fewer than `stop_size` vertices remain or one cluster is left;
/// a lone remaining cluster above the floor takes every unclustered vertex.
/// Vertices left over are reported as the remainder, and a round in which no
/// index is accepted marks the result partial.
pub fn noisy_clustering<O: SameClusterOracle + ?Sized>(
    oracle: &mut O,
    vertices: &[Vertex],
    k: usize,
    delta: f64,
    consts: &AlgorithmConstants,
) -> Result<Clustering> {
    noisy_clustering_traced(oracle, vertices, k, delta, consts).map(|r| r.clustering)
}

pub fn noisy_clustering_traced<O: SameClusterOracle + ?Sized>(
    oracle: &mut O,
    vertices: &[Vertex],
    k: usize,
    delta: f64,
    consts: &AlgorithmConstants,
) -> Result<NoisyRun> {
    check_delta(delta)?;
    check_distinct(vertices)?;
    consts.validate()?;
    if k == 0 {
        return Err(Error::InvalidArgument("k must be at least 1".into()));
    }
    let floor = consts.stop_size(vertices.len(), k, delta);
    let mut unclustered = Membership::new(oracle.n(), vertices);
    let mut remaining = k;
    let mut clusters = Vec::new();
    let mut rounds = Vec::new();
    let mut partial = false;

    while unclustered.len() >= floor && remaining >= 2 {
        let pool = unclustered.to_vec();
        let e = enumerate_index(oracle, &pool, remaining, delta, NOISY_BALANCE, NOISY_ETA, consts)?;
        let mut round = Round {
            remaining_clusters: remaining,
            unclustered: pool.len(),
            outcome: RoundOutcome::Fail,
            rejections: e.rejections,
        };
        let Some(Accepted { h, subsets }) = e.accepted else {
            rounds.push(round);
            partial = true;
            break;
        };
        let grown = grow_all(oracle, &mut unclustered, &subsets)?;
        let sizes = grown.iter().map(Vec::len).collect();
        clusters.extend(grown);
        round.outcome = RoundOutcome::Grew { h, subsets, sizes };
        rounds.push(round);
        remaining -= h;
    }

    let mut rest = unclustered.to_vec();
    if !partial && remaining == 1 && !rest.is_empty() && rest.len() >= floor {
        clusters.push(std::mem::take(&mut rest));
    }
    let clustering = Clustering::new(clusters, rest)?.with_partial(partial);
    Ok(NoisyRun { clustering, rounds, floor })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::{all_vertices, FaultyOracle, GroundTruth};

    #[test]
    fn noiseless_two_clusters_exact() {
        let labels: Vec<u32> = (0..200).map(|i| if i % 3 == 0 { 2 } else { 1 }).collect();
        let truth = GroundTruth::new(labels, 2).unwrap();
        let mut o = FaultyOracle::new(truth.clone(), 1.0, 9).unwrap();
        let consts = AlgorithmConstants::desk_defaults();
        let c = noisy_clustering(&mut o, &all_vertices(200), 2, 1.0, &consts).unwrap();
        assert!(!c.is_partial());
        assert!(c.remainder().is_empty());
        assert!(c.contains_cluster(&truth.members(1)));
        assert!(c.contains_cluster(&truth.members(2)));
    }

    #[test]
    fn single_cluster_returns_everything() {
        let truth = GroundTruth::new(vec![1; 30], 1).unwrap();
        let mut o = FaultyOracle::new(truth, 0.8, 0).unwrap();
        let c = noisy_clustering(&mut o, &all_vertices(30), 1, 0.8, &AlgorithmConstants::desk_defaults()).unwrap();
        assert_eq!(c.vertex_sets(), vec![all_vertices(30)]);
        assert_eq!(o.query_stats().distinct_pairs, 0);
    }
}
