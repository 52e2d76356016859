//! Ground-truth evaluation and exact reference computations.

use pathfinding::kuhn_munkres::kuhn_munkres;
use pathfinding::matrix::Matrix;
use serde::{Deserialize, Serialize};

use crate::algorithms::Clustering;
use crate::error::{Error, Result};
use crate::oracle::{GroundTruth, Vertex};
use crate::par::{self, Execution};
use crate::signed_graph::SignedSubgraph;

/// Largest instance [`brute_force_ml_clustering`] will enumerate.
pub const BRUTE_FORCE_LIMIT: usize = 14;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    /// Fraction of `[n]` counted as wrong under the best label matching.
    pub misclassification: f64,
    pub exact: bool,
    /// `(predicted cluster id, matched true label)`; `None` when a predicted
    /// cluster had to be left unmatched.
    pub matched_permutation: Vec<(usize, Option<u32>)>,
    pub unclustered_count: usize,
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct EvalOptions {
    /// Unclustered vertices whose true cluster is smaller than this are not
    /// counted as errors.
    pub exempt_below: Option<usize>,
}

/// Minimum over injective matchings of predicted to true clusters of the
/// fraction of misassigned vertices, solved exactly on the overlap matrix.
pub fn misclassification_error(pred: &Clustering, truth: &GroundTruth) -> Result<EvalReport> {
    misclassification_error_with(pred, truth, EvalOptions::default())
}

pub fn misclassification_error_with(
    pred: &Clustering,
    truth: &GroundTruth,
    opts: EvalOptions,
) -> Result<EvalReport> {
    let n = truth.n();
    let k = truth.k();
    let p = pred.clusters().len();
    let sizes = truth.cluster_sizes();

    let mut clustered = vec![false; n];
    let side = p.max(k);
    let mut overlap = Matrix::new(side.max(1), side.max(1), 0i64);
    for (row, cluster) in pred.clusters().iter().enumerate() {
        for &v in &cluster.vertices {
            let label = truth.label(v)?;
            clustered[v.index()] = true;
            overlap[(row, label as usize - 1)] += 1;
        }
    }

    let (matched, assignment) = if p == 0 { (0, Vec::new()) } else { kuhn_munkres(&overlap) };
    let clustered_total = clustered.iter().filter(|&&c| c).count();
    let mut errors = clustered_total as i64 - matched;

    let mut unclustered_count = 0;
    for (i, &c) in clustered.iter().enumerate() {
        if !c {
            unclustered_count += 1;
            let size = sizes[truth.labels()[i] as usize - 1];
            let exempt = opts.exempt_below.is_some_and(|floor| size < floor);
            if !exempt {
                errors += 1;
            }
        }
    }

    let matched_permutation = pred
        .clusters()
        .iter()
        .enumerate()
        .map(|(row, cluster)| {
            let col = assignment[row];
            (cluster.id, (col < k).then_some(col as u32 + 1))
        })
        .collect();

    let misclassification = errors as f64 / n as f64;
    Ok(EvalReport {
        misclassification,
        exact: errors == 0 && unclustered_count == 0,
        matched_permutation,
        unclustered_count,
    })
}

/// The size-gap index: the largest `i` with `s_i >= n/k - i b n / k^2`.
///
/// `sizes` must be descending, of length `k`, and sum to `n`. Returns `None`
/// when the smallest cluster already has `s_k >= b n / k`.
pub fn find_gap_index(sizes: &[usize], n: usize, k: usize, b: f64) -> Result<Option<usize>> {
    if sizes.len() != k || k == 0 {
        return Err(Error::MalformedSizes(format!("expected {k} sizes, got {}", sizes.len())));
    }
    if sizes.windows(2).any(|w| w[0] < w[1]) {
        return Err(Error::MalformedSizes(format!("{sizes:?} is not descending")));
    }
    if sizes.iter().sum::<usize>() != n {
        return Err(Error::MalformedSizes(format!("{sizes:?} does not sum to {n}")));
    }
    if !(0.0..=0.5).contains(&b) {
        return Err(Error::MalformedSizes(format!("b = {b} outside [0, 1/2]")));
    }
    let (nf, kf) = (n as f64, k as f64);
    if sizes[k - 1] as f64 >= b * nf / kf {
        return Ok(None);
    }
    Ok((1..=k)
        .rev()
        .find(|&i| sizes[i - 1] as f64 >= gap_threshold(i, nf, kf, b)))
}

/// `n/k - i b n / k^2`.
pub fn gap_threshold(i: usize, n: f64, k: f64, b: f64) -> f64 {
    n / k - i as f64 * b * n / (k * k)
}

/// `e^{-2 lambda^2 / t}`: the one-sided Chernoff-Hoeffding tail for a sum of
/// `t` independent `[0, 1]` variables deviating by `lambda`.
pub fn chernoff_failure_bound(t: usize, lambda: f64) -> f64 {
    (-2.0 * lambda * lambda / t as f64).exp()
}

/// Returns the true label `C` for which `|set & C| >= (1/2 + eta) |set|`, if any.
pub fn biased_toward(set: &[Vertex], truth: &GroundTruth, eta: f64) -> Option<u32> {
    if set.is_empty() {
        return None;
    }
    let mut counts = vec![0usize; truth.k()];
    for &v in set {
        counts[truth.labels()[v.index()] as usize - 1] += 1;
    }
    let need = (0.5 + eta) * set.len() as f64;
    counts
        .iter()
        .position(|&c| c as f64 >= need)
        .map(|i| i as u32 + 1)
}

/// Maximum-agreement partition of a fully queried graph into at most `k`
/// parts, by exhaustive enumeration of restricted-growth labelings.
///
/// Agreements are `+` edges inside parts plus `-` edges across parts. Ties go
/// to the lexicographically smallest labeling.
pub fn brute_force_ml_clustering(graph: &SignedSubgraph, k: usize) -> Result<Clustering> {
    brute_force_ml_clustering_with(graph, k, Execution::default())
}

pub fn brute_force_ml_clustering_with(graph: &SignedSubgraph, k: usize, exec: Execution) -> Result<Clustering> {
    let n = graph.len();
    if n > BRUTE_FORCE_LIMIT {
        return Err(Error::BruteForceTooLarge { n, limit: BRUTE_FORCE_LIMIT });
    }
    if n == 0 || k == 0 {
        return Err(Error::InvalidArgument("need a nonempty graph and k >= 1".into()));
    }

    // Enumerate shallow prefixes in lexicographic order, search below each in
    // parallel, and keep the first maximum so results match a sequential scan.
    let depth = n.min(6);
    let mut prefixes = Vec::new();
    let mut labels = vec![0u8; n];
    collect_prefixes(graph, k, &mut labels, 1, 0, depth, 0, &mut prefixes);

    let results = par::map_slice(exec, &prefixes, |(prefix, score)| {
        let mut labels = vec![0u8; n];
        labels[..depth].copy_from_slice(prefix);
        let max_used = *prefix.iter().max().unwrap();
        let mut best = (i64::MIN, labels.clone());
        search(graph, k, &mut labels, depth, max_used, *score, &mut best);
        best
    });

    let mut best = &results[0];
    for r in &results[1..] {
        if r.0 > best.0 {
            best = r;
        }
    }
    let parts = best.1.iter().copied().max().unwrap() as usize + 1;
    let mut sets = vec![Vec::new(); parts];
    for (i, &l) in best.1.iter().enumerate() {
        sets[l as usize].push(graph.vertices()[i]);
    }
    Clustering::new(sets, Vec::new())
}

fn gain(graph: &SignedSubgraph, labels: &[u8], i: usize, label: u8) -> i64 {
    (0..i)
        .filter(|&j| (labels[j] == label) == graph.is_positive(i, j))
        .count() as i64
}

#[allow(clippy::too_many_arguments)]
fn collect_prefixes(
    graph: &SignedSubgraph,
    k: usize,
    labels: &mut [u8],
    i: usize,
    max_used: u8,
    depth: usize,
    score: i64,
    out: &mut Vec<(Vec<u8>, i64)>,
) {
    if i == depth {
        out.push((labels[..depth].to_vec(), score));
        return;
    }
    let top = (max_used as usize + 1).min(k - 1) as u8;
    for l in 0..=top {
        labels[i] = l;
        let s = score + gain(graph, labels, i, l);
        collect_prefixes(graph, k, labels, i + 1, max_used.max(l), depth, s, out);
    }
}

fn search(
    graph: &SignedSubgraph,
    k: usize,
    labels: &mut [u8],
    i: usize,
    max_used: u8,
    score: i64,
    best: &mut (i64, Vec<u8>),
) {
    if i == labels.len() {
        if score > best.0 {
            best.0 = score;
            best.1.copy_from_slice(labels);
        }
        return;
    }
    let top = (max_used as usize + 1).min(k - 1) as u8;
    for l in 0..=top {
        labels[i] = l;
        let s = score + gain(graph, labels, i, l);
        search(graph, k, labels, i + 1, max_used.max(l), s, best);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::{all_vertices, FaultyOracle};
    use crate::signed_graph::build_query_graph;

    fn v(xs: &[u32]) -> Vec<Vertex> {
        xs.iter().map(|&x| Vertex(x)).collect()
    }

    fn truth33() -> GroundTruth {
        GroundTruth::new(vec![1, 1, 1, 2, 2, 2], 2).unwrap()
    }

    #[test]
    fn exact_and_swapped() {
        let t = truth33();
        let c = Clustering::new(vec![v(&[1, 2, 3]), v(&[4, 5, 6])], vec![]).unwrap();
        let r = misclassification_error(&c, &t).unwrap();
        assert_eq!(r.misclassification, 0.0);
        assert!(r.exact);
        let c = Clustering::new(vec![v(&[4, 5, 6]), v(&[1, 2, 3])], vec![]).unwrap();
        let r = misclassification_error(&c, &t).unwrap();
        assert!(r.exact);
        assert_eq!(r.matched_permutation, vec![(1, Some(2)), (2, Some(1))]);
    }

    #[test]
    fn two_sixths_example() {
        // Overlap [[2,1],[1,2]]: best matching keeps 4 of 6.
        let c = Clustering::new(vec![v(&[1, 2, 4]), v(&[3, 5, 6])], vec![]).unwrap();
        let r = misclassification_error(&c, &truth33()).unwrap();
        assert!((r.misclassification - 2.0 / 6.0).abs() < 1e-12);
        assert!(!r.exact);
    }

    #[test]
    fn more_predicted_than_true_and_remainder() {
        let t = truth33();
        let c = Clustering::new(vec![v(&[1, 2]), v(&[3]), v(&[4, 5, 6])], vec![]).unwrap();
        let r = misclassification_error(&c, &t).unwrap();
        assert!((r.misclassification - 1.0 / 6.0).abs() < 1e-12);
        assert!(r.matched_permutation.iter().any(|(_, m)| m.is_none()));

        let c = Clustering::new(vec![v(&[1, 2, 3])], v(&[4, 5, 6])).unwrap();
        let r = misclassification_error(&c, &t).unwrap();
        assert_eq!(r.unclustered_count, 3);
        assert!((r.misclassification - 0.5).abs() < 1e-12);
        let r = misclassification_error_with(&c, &t, EvalOptions { exempt_below: Some(4) }).unwrap();
        assert_eq!(r.misclassification, 0.0);
        assert!(!r.exact);
    }

    #[test]
    fn gap_index_examples() {
        assert_eq!(find_gap_index(&[50, 48, 10, 2], 110, 4, 0.5).unwrap(), Some(2));
        assert_eq!(find_gap_index(&[25, 25, 25, 25], 100, 4, 0.5).unwrap(), None);
        assert!(find_gap_index(&[2, 50], 52, 2, 0.5).is_err());
        assert!(find_gap_index(&[50, 2], 53, 2, 0.5).is_err());
        assert!(find_gap_index(&[50, 2], 52, 3, 0.5).is_err());
        assert!(find_gap_index(&[50, 2], 52, 2, 0.7).is_err());
    }

    #[test]
    fn chernoff_examples() {
        assert_eq!(chernoff_failure_bound(100, 0.0), 1.0);
        assert!((chernoff_failure_bound(100, 10.0) - (-2.0f64).exp()).abs() < 1e-15);
        assert!(chernoff_failure_bound(100, 11.0) < chernoff_failure_bound(100, 10.0));
        assert!(chernoff_failure_bound(200, 10.0) > chernoff_failure_bound(100, 10.0));
    }

    #[test]
    fn brute_force_small_cases() {
        let g = SignedSubgraph::from_edges(
            all_vertices(6),
            &[(0, 1), (0, 2), (1, 2), (3, 4), (3, 5), (4, 5)],
        )
        .unwrap();
        let c = brute_force_ml_clustering(&g, 2).unwrap();
        assert_eq!(c.vertex_sets(), vec![v(&[1, 2, 3]), v(&[4, 5, 6])]);

        let one = SignedSubgraph::from_edges(all_vertices(1), &[]).unwrap();
        let c = brute_force_ml_clustering(&one, 3).unwrap();
        assert_eq!(c.vertex_sets(), vec![v(&[1])]);

        let big = SignedSubgraph::from_edges(all_vertices(15), &[]).unwrap();
        assert!(matches!(brute_force_ml_clustering(&big, 2), Err(Error::BruteForceTooLarge { .. })));
    }

    #[test]
    fn brute_force_modes_agree() {
        let t = GroundTruth::new(vec![1, 2, 1, 2, 3, 3, 1, 2, 3, 1, 2], 3).unwrap();
        let mut o = FaultyOracle::new(t, 0.4, 12).unwrap();
        let g = build_query_graph(&mut o, &all_vertices(11)).unwrap();
        let a = brute_force_ml_clustering_with(&g, 3, Execution::Sequential).unwrap();
        let b = brute_force_ml_clustering_with(&g, 3, Execution::Parallel).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn biased_toward_threshold() {
        let t = GroundTruth::new(vec![1, 1, 1, 2, 2], 2).unwrap();
        assert_eq!(biased_toward(&v(&[1, 2, 3, 4]), &t, 0.25), Some(1));
        assert_eq!(biased_toward(&v(&[1, 2, 4, 5]), &t, 0.0), Some(1));
        assert_eq!(biased_toward(&v(&[1, 2, 4, 5]), &t, 0.01), None);
    }
}
