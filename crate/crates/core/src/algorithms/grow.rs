use super::{check_delta, first_by_id, AlgorithmConstants, Clustering};
use crate::error::{Error, Result};
use crate::oracle::{SameClusterOracle, Vertex};

/// Majority vote of `v` against a reference set: true iff at least half of
/// the answers against `set` are `+`.
pub fn belong_to_cluster<O: SameClusterOracle + ?Sized>(oracle: &mut O, v: Vertex, set: &[Vertex]) -> Result<bool> {
    if set.is_empty() {
        return Err(Error::InvalidArgument("reference set is empty".into()));
    }
    if set.contains(&v) {
        return Err(Error::SelfPair(v));
    }
    let plus = oracle.count_plus(v, set)?;
    Ok(2 * plus >= set.len())
}

/// Grows each sub-cluster in turn over the still-unclaimed part of `vertices`.
///
/// From each `X_i` the first `grow_size` vertices by id form the reference
/// set. Reference vertices join their own `C_i` directly and are never
/// claimed by another cluster; every other unclaimed vertex joins the first
/// `C_i` for which [`belong_to_cluster`] says so.
pub fn global_grow<O: SameClusterOracle + ?Sized>(
    oracle: &mut O,
    vertices: &[Vertex],
    subclusters: &[Vec<Vertex>],
    delta: f64,
    consts: &AlgorithmConstants,
) -> Result<Clustering> {
    check_delta(delta)?;
    let g = consts.grow_size(vertices.len(), delta);
    let references = subclusters
        .iter()
        .map(|x| first_by_id(x, g))
        .collect::<Result<Vec<_>>>()?;

    let mut unclaimed = Membership::new(oracle.n(), vertices);
    let grown = grow_all(oracle, &mut unclaimed, &references)?;
    Clustering::new(grown, unclaimed.to_vec())
}

/// Grows one cluster per reference set, in order, removing claimed vertices
/// from `unclaimed`. Reference vertices still in `unclaimed` are reserved for
/// their own cluster up front.
pub(crate) fn grow_all<O: SameClusterOracle + ?Sized>(
    oracle: &mut O,
    unclaimed: &mut Membership,
    references: &[Vec<Vertex>],
) -> Result<Vec<Vec<Vertex>>> {
    let reserved: Vec<Vec<Vertex>> = references
        .iter()
        .map(|r| r.iter().copied().filter(|&v| unclaimed.contains(v)).collect())
        .collect();
    for r in &reserved {
        unclaimed.remove_all(r);
    }
    let mut grown = Vec::with_capacity(references.len());
    for (reference, mut cluster) in references.iter().zip(reserved) {
        for v in unclaimed.iter() {
            if belong_to_cluster(oracle, v, reference)? {
                cluster.push(v);
            }
        }
        unclaimed.remove_all(&cluster);
        cluster.sort_unstable();
        grown.push(cluster);
    }
    Ok(grown)
}

/// Ordered vertex set with O(1) membership, indexed by vertex id.
pub(crate) struct Membership {
    flags: Vec<bool>,
    order: Vec<Vertex>,
}

impl Membership {
    pub(crate) fn new(n: usize, vertices: &[Vertex]) -> Self {
        let mut flags = vec![false; n + 1];
        for &v in vertices {
            if let Some(f) = flags.get_mut(v.0 as usize) {
                *f = true;
            }
        }
        let mut order = vertices.to_vec();
        order.sort_unstable();
        order.dedup();
        Membership { flags, order }
    }

    pub(crate) fn contains(&self, v: Vertex) -> bool {
        self.flags.get(v.0 as usize).copied().unwrap_or(false)
    }

    pub(crate) fn remove_all(&mut self, vertices: &[Vertex]) {
        for &v in vertices {
            if let Some(f) = self.flags.get_mut(v.0 as usize) {
                *f = false;
            }
        }
        let flags = &self.flags;
        self.order.retain(|v| flags[v.0 as usize]);
    }

    pub(crate) fn iter(&self) -> impl Iterator<Item = Vertex> + '_ {
        self.order.iter().copied()
    }

    pub(crate) fn to_vec(&self) -> Vec<Vertex> {
        self.order.clone()
    }

    pub(crate) fn len(&self) -> usize {
        self.order.len()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::{all_vertices, FaultyOracle, GroundTruth};

    fn two_blocks(a: usize, b: usize) -> GroundTruth {
        let mut labels = vec![1; a];
        labels.extend(vec![2; b]);
        GroundTruth::new(labels, 2).unwrap()
    }

    #[test]
    fn noiseless_membership() {
        let mut o = FaultyOracle::new(two_blocks(5, 5), 1.0, 0).unwrap();
        let b: Vec<Vertex> = (1..=4).map(Vertex).collect();
        assert!(belong_to_cluster(&mut o, Vertex(5), &b).unwrap());
        assert!(!belong_to_cluster(&mut o, Vertex(6), &b).unwrap());
        assert_eq!(belong_to_cluster(&mut o, Vertex(1), &b), Err(Error::SelfPair(Vertex(1))));
        assert!(belong_to_cluster(&mut o, Vertex(1), &[]).is_err());
    }

    #[test]
    fn global_grow_noiseless_recovers_planted() {
        let truth = two_blocks(30, 20);
        let mut o = FaultyOracle::new(truth.clone(), 1.0, 0).unwrap();
        let consts = AlgorithmConstants { grow_size_mult: 1.0, ..AlgorithmConstants::desk_defaults() };
        let x = vec![truth.members(2)[..6].to_vec(), truth.members(1)[3..12].to_vec()];
        let c = global_grow(&mut o, &all_vertices(50), &x, 1.0, &consts).unwrap();
        assert_eq!(c.vertex_sets(), vec![truth.members(2), truth.members(1)]);
        assert!(c.remainder().is_empty());
    }

    #[test]
    fn global_grow_single_biased_set() {
        let truth = two_blocks(12, 8);
        let mut o = FaultyOracle::new(truth.clone(), 1.0, 0).unwrap();
        let consts = AlgorithmConstants { grow_size_mult: 1.0, ..AlgorithmConstants::desk_defaults() };
        let c = global_grow(&mut o, &all_vertices(20), &[truth.members(1)], 1.0, &consts).unwrap();
        assert_eq!(c.vertex_sets(), vec![truth.members(1)]);
        assert_eq!(c.remainder(), &truth.members(2)[..]);
    }

    #[test]
    fn global_grow_rejects_small_subclusters() {
        let truth = two_blocks(12, 8);
        let mut o = FaultyOracle::new(truth.clone(), 1.0, 0).unwrap();
        let consts = AlgorithmConstants::desk_defaults();
        let g = consts.grow_size(20, 1.0);
        let res = global_grow(&mut o, &all_vertices(20), &[vec![Vertex(1)]], 1.0, &consts);
        assert_eq!(res, Err(Error::SubsetTooSmall { needed: g, available: 1 }));
    }
}
