use rand::Rng;

use super::grow::Membership;
use super::{check_delta, AlgorithmConstants};
use crate::error::{Error, Result};
use crate::oracle::{SameClusterOracle, Vertex};

/// Tests whether `set` is `eta`-biased toward some cluster.
///
/// Draws `bias_trials(n, k, b)` probes uniformly from `pool \ set` and accepts
/// as soon as one probe gets at least `(1/2 + eta delta / 2) |set|` `+`
/// answers against `set`. With nothing to probe the test rejects.
#[allow(clippy::too_many_arguments)]
pub fn test_bias<O: SameClusterOracle + ?Sized>(
    oracle: &mut O,
    n: usize,
    set: &[Vertex],
    pool: &[Vertex],
    eta: f64,
    b: f64,
    k: usize,
    delta: f64,
    consts: &AlgorithmConstants,
) -> Result<bool> {
    check_delta(delta)?;
    if set.is_empty() {
        return Err(Error::InvalidArgument("bias test on an empty set".into()));
    }
    if !(eta > 0.0 && eta <= 0.5) {
        return Err(Error::InvalidArgument(format!("eta {eta} must lie in (0, 1/2]")));
    }
    let in_set = Membership::new(oracle.n(), set);
    let probes: Vec<Vertex> = pool.iter().copied().filter(|&v| !in_set.contains(v)).collect();
    if probes.is_empty() {
        return Ok(false);
    }
    let need = (0.5 + eta * delta / 2.0) * set.len() as f64;
    let rounds = consts.bias_trials(n, k, b);
    let mut rng = oracle.sampling_rng();
    for _ in 0..rounds {
        let probe = probes[rng.random_range(0..probes.len())];
        if oracle.count_plus(probe, set)? as f64 >= need {
            return Ok(true);
        }
    }
    Ok(false)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::{all_vertices, FaultyOracle, GroundTruth};

    #[test]
    fn noiseless_pure_set_accepted_mixed_rejected() {
        let mut labels = vec![1; 20];
        labels.extend(vec![2; 20]);
        let truth = GroundTruth::new(labels, 2).unwrap();
        let mut o = FaultyOracle::new(truth.clone(), 1.0, 3).unwrap();
        let consts = AlgorithmConstants::desk_defaults();
        let all = all_vertices(40);
        let pure = truth.members(1)[..10].to_vec();
        assert!(test_bias(&mut o, 40, &pure, &all, 0.1, 0.5, 2, 1.0, &consts).unwrap());
        // Exactly half from each cluster: every probe sees 5 of 10 `+`, below 5.5.
        let mut mixed = truth.members(1)[..5].to_vec();
        mixed.extend_from_slice(&truth.members(2)[..5]);
        assert!(!test_bias(&mut o, 40, &mixed, &all, 0.1, 0.5, 2, 1.0, &consts).unwrap());
    }

    #[test]
    fn nothing_to_probe_rejects() {
        let truth = GroundTruth::new(vec![1; 4], 1).unwrap();
        let mut o = FaultyOracle::new(truth, 1.0, 0).unwrap();
        let all = all_vertices(4);
        let consts = AlgorithmConstants::desk_defaults();
        assert!(!test_bias(&mut o, 4, &all, &all, 0.1, 0.5, 1, 1.0, &consts).unwrap());
        assert!(test_bias(&mut o, 4, &[], &all, 0.1, 0.5, 1, 1.0, &consts).is_err());
    }
}
