use super::balanced::{balanced_clustering_sized, check_balance};
use super::bias::test_bias;
use super::gap::gap_clustering_sized;
use super::{check_delta, first_by_id, AlgorithmConstants};
use crate::error::{Error, Result};
use crate::oracle::{SameClusterOracle, Vertex};

/// Why a candidate index was passed over.
#[derive(Debug, Clone, PartialEq)]
pub enum Rejection {
    /// The sub-clustering step or subset extraction failed.
    SubCall { h: usize, error: Error },
    /// The subset at `set` (0-based) did not pass the bias test.
    Unbiased { h: usize, set: usize },
}

/// The accepted index and its tested subsets.
#[derive(Debug, Clone, PartialEq)]
pub struct Accepted {
    pub h: usize,
    pub subsets: Vec<Vec<Vertex>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Enumeration {
    /// `None` means every index was rejected.
    pub accepted: Option<Accepted>,
    pub rejections: Vec<Rejection>,
}

/// Tries `h = k, k-1, ..., 1` and returns the first index whose sub-clusters
/// all yield a biased subset.
///
/// `h = k` uses the balanced routine, smaller `h` the gap routine. Sample
/// sizes larger than `|vertices|` are clamped to it. From each sub-cluster the
/// first `subset_size` vertices by id are kept and bias-tested against the
/// rest of `vertices`. Any failing sub-call only rejects its index.
pub fn enumerate_index<O: SameClusterOracle + ?Sized>(
    oracle: &mut O,
    vertices: &[Vertex],
    k: usize,
    delta: f64,
    b: f64,
    eta: f64,
    consts: &AlgorithmConstants,
) -> Result<Enumeration> {
    check_delta(delta)?;
    check_balance(b)?;
    if k == 0 {
        return Err(Error::InvalidArgument("k must be at least 1".into()));
    }
    if !(eta > 0.0 && eta <= 0.5) {
        return Err(Error::InvalidArgument(format!("eta {eta} must lie in (0, 1/2]")));
    }
    if !consts.admits(eta, b) {
        return Err(Error::Inadmissible { ratio: eta * eta / b, floor: consts.admissibility_floor() });
    }
    let n = vertices.len();
    let g = consts.subset_size(n, eta, delta);
    let mut rejections = Vec::new();
    for h in (1..=k).rev() {
        let parts = if h == k {
            let t = consts.balanced_sample_size(n, k, b, delta);
            balanced_clustering_sized(oracle, vertices, k, delta, b, t, consts)
        } else {
            let t = consts.gap_sample_size(n, k, b, delta);
            gap_clustering_sized(oracle, vertices, h, k, delta, b, t, consts)
        };
        let subsets = match parts.and_then(|p| p.iter().map(|x| first_by_id(x, g)).collect::<Result<Vec<_>>>()) {
            Ok(s) => s,
            Err(error) => {
                rejections.push(Rejection::SubCall { h, error });
                continue;
            }
        };
        let mut unbiased = None;
        for (i, set) in subsets.iter().enumerate() {
            if !test_bias(oracle, n, set, vertices, eta, b, k, delta, consts)? {
                unbiased = Some(i);
                break;
            }
        }
        match unbiased {
            Some(set) => rejections.push(Rejection::Unbiased { h, set }),
            None => return Ok(Enumeration { accepted: Some(Accepted { h, subsets }), rejections }),
        }
    }
    Ok(Enumeration { accepted: None, rejections })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::{all_vertices, FaultyOracle, GroundTruth};

    fn consts() -> AlgorithmConstants {
        AlgorithmConstants::desk_defaults()
    }

    #[test]
    fn balanced_instance_accepts_top_index() {
        let labels: Vec<u32> = (0..120).map(|i| (i % 2) as u32 + 1).collect();
        let truth = GroundTruth::new(labels, 2).unwrap();
        let mut o = FaultyOracle::new(truth.clone(), 1.0, 1).unwrap();
        let e = enumerate_index(&mut o, &all_vertices(120), 2, 1.0, 0.1, 0.1, &consts()).unwrap();
        let acc = e.accepted.unwrap();
        assert_eq!(acc.h, 2);
        for s in &acc.subsets {
            let l = truth.label(s[0]).unwrap();
            assert!(s.iter().all(|&v| truth.label(v).unwrap() == l));
        }
    }

    #[test]
    fn single_cluster() {
        let truth = GroundTruth::new(vec![1; 50], 1).unwrap();
        let mut o = FaultyOracle::new(truth, 1.0, 0).unwrap();
        let e = enumerate_index(&mut o, &all_vertices(50), 1, 1.0, 0.1, 0.1, &consts()).unwrap();
        assert_eq!(e.accepted.unwrap().h, 1);
    }

    #[test]
    fn inadmissible_parameters() {
        let truth = GroundTruth::new(vec![1; 50], 1).unwrap();
        let mut o = FaultyOracle::new(truth, 1.0, 0).unwrap();
        let res = enumerate_index(&mut o, &all_vertices(50), 1, 1.0, 0.5, 0.01, &consts());
        assert!(matches!(res, Err(Error::Inadmissible { .. })));
    }
}
