//! Planted-partition recovery on a queried graph.
//!
//! The `+` graph on a sample is an SBM with `p = 1/2 + delta/2` and
//! `q = 1/2 - delta/2`. [`bal_partition`] centers the adjacency by `q`,
//! embeds each vertex by its row of the rank-`k` projection, and clusters
//! the embedded rows: greedy distance-threshold seeding followed by nearest
//! mean reassignment.
//!
//! The rank-`k` part is taken from the `k` largest eigenvalues of the
//! centered matrix. Its expectation is positive semidefinite up to the
//! diagonal, so these coincide with the top singular directions whenever
//! the planted signal clears the noise; picking by signed value also keeps
//! the `-1` eigenvalues of noiseless cliques out of the way.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::par::{self, Execution};
use crate::signed_graph::SignedSubgraph;

/// Graphs up to this many vertices use a full dense eigendecomposition.
const DENSE_LIMIT: usize = 128;
const MAX_SUBSPACE_ITERS: usize = 300;
const RESIDUAL_TOL: f64 = 1e-7;
const MAX_LLOYD_ROUNDS: usize = 100;

/// Disjoint position sets covering every vertex of the input graph.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PartitionResult {
    clusters: Vec<Vec<usize>>,
}

impl PartitionResult {
    /// Canonicalizes: positions ascending inside each cluster, clusters
    /// ordered by their smallest position, empty clusters dropped.
    pub fn from_clusters(mut clusters: Vec<Vec<usize>>) -> Self {
        clusters.retain(|c| !c.is_empty());
        for c in &mut clusters {
            c.sort_unstable();
        }
        clusters.sort_by_key(|c| c[0]);
        PartitionResult { clusters }
    }

    pub fn from_labels(labels: &[usize], k: usize) -> Self {
        let mut clusters = vec![Vec::new(); k];
        for (i, &l) in labels.iter().enumerate() {
            clusters[l].push(i);
        }
        PartitionResult::from_clusters(clusters)
    }

    pub fn clusters(&self) -> &[Vec<usize>] {
        &self.clusters
    }

    pub fn into_clusters(self) -> Vec<Vec<usize>> {
        self.clusters
    }

    pub fn len(&self) -> usize {
        self.clusters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.clusters.is_empty()
    }
}

/// `t >= c0 k^2 ln t / (b^2 delta^2)`, the size condition under which the
/// partitioner is expected to recover a `b`-balanced planted partition.
pub fn recovery_condition(t: usize, k: usize, b: f64, delta: f64, c0: f64) -> bool {
    let t = t as f64;
    let k = k as f64;
    t >= c0 * k * k * t.ln() / (b * b * delta * delta)
}

/// Splits `graph` into `k` clusters.
///
/// `b` is the balance the caller believes holds; it is validated but the
/// partitioner itself is parameter-free. Rows are processed in vertex-id
/// order, so reordering the input positions only relabels the output.
pub fn bal_partition(graph: &SignedSubgraph, k: usize, delta: f64, b: f64) -> Result<PartitionResult> {
    bal_partition_with(graph, k, delta, b, Execution::default())
}

pub fn bal_partition_with(
    graph: &SignedSubgraph,
    k: usize,
    delta: f64,
    b: f64,
    exec: Execution,
) -> Result<PartitionResult> {
    let m = graph.len();
    if m == 0 {
        return Err(Error::InvalidArgument("cannot partition an empty graph".into()));
    }
    if k == 0 {
        return Err(Error::InvalidArgument("k must be at least 1".into()));
    }
    if !(delta > 0.0 && delta <= 1.0) {
        return Err(Error::InvalidBias(delta));
    }
    if !(b > 0.0 && b <= 1.0) {
        return Err(Error::InvalidArgument(format!("balance b = {b} outside (0, 1]")));
    }
    if k > m {
        return Err(Error::TooManyClusters { k, len: m });
    }
    if k == 1 {
        return Ok(PartitionResult::from_clusters(vec![(0..m).collect()]));
    }
    if k == m {
        return Ok(PartitionResult::from_clusters((0..m).map(|i| vec![i]).collect()));
    }

    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by_key(|&i| graph.vertices()[i]);
    if order.windows(2).all(|w| w[0] < w[1]) {
        return partition_rows(graph, k, delta, exec);
    }
    let canonical = graph.induced(&order)?;
    let clusters = partition_rows(&canonical, k, delta, exec)?
        .into_clusters()
        .into_iter()
        .map(|c| c.into_iter().map(|i| order[i]).collect())
        .collect();
    Ok(PartitionResult::from_clusters(clusters))
}

/// The spectral step proper, on positions in the order given.
fn partition_rows(graph: &SignedSubgraph, k: usize, delta: f64, exec: Execution) -> Result<PartitionResult> {
    let m = graph.len();
    let q = 0.5 - 0.5 * delta;
    let centered = centered_adjacency(graph, q, exec);
    let (values, vectors) = top_eigenpairs(&centered, m, k, exec)?;

    let mut embedding = vec![0.0; m * k];
    for i in 0..m {
        for c in 0..k {
            embedding[i * k + c] = vectors[i * k + c] * values[c];
        }
    }
    if embedding.iter().any(|x| !x.is_finite()) {
        return Err(Error::DecompositionFailed("non-finite embedding".into()));
    }
    let labels = cluster_rows(&embedding, m, k);
    Ok(PartitionResult::from_labels(&labels, k))
}

/// `A - q (J - I)`, row-major.
fn centered_adjacency(graph: &SignedSubgraph, q: f64, exec: Execution) -> Vec<f64> {
    let m = graph.len();
    let mut out = vec![0.0; m * m];
    par::for_each_row_mut(exec, &mut out, m, |i, row| {
        let adj = graph.row(i);
        for (j, x) in row.iter_mut().enumerate() {
            if i != j {
                *x = f64::from(u8::from(adj[j])) - q;
            }
        }
    });
    out
}

/// The `k` largest eigenvalues (descending) of the symmetric `m x m` matrix
/// and their eigenvectors as a row-major `m x k` block.
fn top_eigenpairs(matrix: &[f64], m: usize, k: usize, exec: Execution) -> Result<(Vec<f64>, Vec<f64>)> {
    if m <= DENSE_LIMIT {
        dense_top_eigenpairs(matrix, m, k)
    } else {
        subspace_top_eigenpairs(matrix, m, k, exec)
    }
}

fn dense_top_eigenpairs(matrix: &[f64], m: usize, k: usize) -> Result<(Vec<f64>, Vec<f64>)> {
    let eig = DMatrix::from_row_slice(m, m, matrix).symmetric_eigen();
    let order = descending_order(eig.eigenvalues.as_slice());
    let mut values = Vec::with_capacity(k);
    let mut vectors = vec![0.0; m * k];
    for (c, &idx) in order.iter().take(k).enumerate() {
        values.push(eig.eigenvalues[idx]);
        for i in 0..m {
            vectors[i * k + c] = eig.eigenvectors[(i, idx)];
        }
    }
    if values.iter().chain(vectors.iter()).any(|x| !x.is_finite()) {
        return Err(Error::DecompositionFailed("dense solver produced non-finite values".into()));
    }
    Ok((values, vectors))
}

fn descending_order(values: &[f64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[b].total_cmp(&values[a]).then(a.cmp(&b)));
    order
}

/// Block subspace iteration with Rayleigh-Ritz extraction.
///
/// The block is oversampled so the wanted eigenvalues only need to separate
/// from the bulk edge, not from their immediate neighbours. If the residual
/// tolerance is not met within the iteration cap, the last Ritz pairs are
/// returned; they still span the dominant subspace to within the gap the
/// matrix offers.
fn subspace_top_eigenpairs(matrix: &[f64], m: usize, k: usize, exec: Execution) -> Result<(Vec<f64>, Vec<f64>)> {
    let p = (2 * k + 8).min(m);
    let mut rng = ChaCha8Rng::seed_from_u64(0x5bec_7a1e ^ m as u64);
    let mut basis: Vec<f64> = (0..m * p).map(|_| rng.random_range(-1.0..1.0)).collect();
    orthonormalize(&mut basis, m, p, &mut rng);

    let mut image = vec![0.0; m * p];
    let mut best = None;
    for _ in 0..MAX_SUBSPACE_ITERS {
        multiply(matrix, &basis, &mut image, m, p, exec);

        // Rayleigh quotient S = Q^T (M Q).
        let mut s = DMatrix::<f64>::zeros(p, p);
        for i in 0..m {
            let qi = &basis[i * p..(i + 1) * p];
            let zi = &image[i * p..(i + 1) * p];
            for a in 0..p {
                for b in 0..p {
                    s[(a, b)] += qi[a] * zi[b];
                }
            }
        }
        let s = (&s + s.transpose()) * 0.5;
        let eig = s.symmetric_eigen();
        if eig.eigenvalues.iter().any(|x| !x.is_finite()) {
            return Err(Error::DecompositionFailed("Rayleigh-Ritz step diverged".into()));
        }
        let order = descending_order(eig.eigenvalues.as_slice());
        let scale = eig.eigenvalues.iter().fold(0.0f64, |a, x| a.max(x.abs())).max(f64::MIN_POSITIVE);

        let mut values = Vec::with_capacity(k);
        let mut vectors = vec![0.0; m * k];
        let mut converged = true;
        for (c, &idx) in order.iter().take(k).enumerate() {
            let theta = eig.eigenvalues[idx];
            let w = eig.eigenvectors.column(idx);
            let mut residual = 0.0;
            for i in 0..m {
                let mut x = 0.0;
                let mut mx = 0.0;
                for a in 0..p {
                    x += basis[i * p + a] * w[a];
                    mx += image[i * p + a] * w[a];
                }
                vectors[i * k + c] = x;
                residual += (mx - theta * x).powi(2);
            }
            values.push(theta);
            if residual.sqrt() > RESIDUAL_TOL * scale {
                converged = false;
            }
        }
        best = Some((values, vectors));
        if converged {
            break;
        }
        std::mem::swap(&mut basis, &mut image);
        orthonormalize(&mut basis, m, p, &mut rng);
    }
    best.ok_or_else(|| Error::DecompositionFailed("no iterations run".into()))
}

/// `out = matrix * basis` for row-major `m x m` and `m x p`.
fn multiply(matrix: &[f64], basis: &[f64], out: &mut [f64], m: usize, p: usize, exec: Execution) {
    par::for_each_row_mut(exec, out, p, |i, row| {
        row.fill(0.0);
        let mrow = &matrix[i * m..(i + 1) * m];
        for (j, &mij) in mrow.iter().enumerate() {
            if mij != 0.0 {
                let qj = &basis[j * p..(j + 1) * p];
                for (r, q) in row.iter_mut().zip(qj) {
                    *r += mij * q;
                }
            }
        }
    });
}

/// Modified Gram-Schmidt (two passes) on the columns of a row-major block.
/// Columns that collapse are replaced by fresh random directions.
fn orthonormalize(block: &mut [f64], m: usize, p: usize, rng: &mut ChaCha8Rng) {
    for c in 0..p {
        let mut attempts = 0;
        loop {
            let before = column_norm(block, m, p, c);
            for _ in 0..2 {
                for prev in 0..c {
                    let mut dot = 0.0;
                    for i in 0..m {
                        dot += block[i * p + c] * block[i * p + prev];
                    }
                    for i in 0..m {
                        block[i * p + c] -= dot * block[i * p + prev];
                    }
                }
            }
            let norm = column_norm(block, m, p, c);
            if norm > 1e-10 * before.max(1e-300) && norm > 1e-300 {
                for i in 0..m {
                    block[i * p + c] /= norm;
                }
                break;
            }
            attempts += 1;
            assert!(attempts < 64, "could not complete an orthonormal basis");
            for i in 0..m {
                block[i * p + c] = rng.random_range(-1.0..1.0);
            }
        }
    }
}

fn column_norm(block: &[f64], m: usize, p: usize, c: usize) -> f64 {
    (0..m).map(|i| block[i * p + c].powi(2)).sum::<f64>().sqrt()
}

#[inline]
fn dist2(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum()
}

/// Clusters `m` points of dimension `k` into exactly `k` nonempty groups.
///
/// Seeding: the threshold is half the smallest pairwise distance among `k`
/// farthest-first rows (starting from the largest-norm row). Then `k` times,
/// the largest-norm unassigned row gathers every unassigned row within the
/// threshold. Lloyd reassignment to the nearest mean follows, until the
/// labels stop changing or the round cap is hit. Ties go to the lowest index.
fn cluster_rows(points: &[f64], m: usize, k: usize) -> Vec<usize> {
    debug_assert!(k >= 2 && k < m);
    let row = |i: usize| &points[i * k..(i + 1) * k];
    let norms: Vec<f64> = (0..m).map(|i| row(i).iter().map(|x| x * x).sum::<f64>()).collect();

    let mut by_norm: Vec<usize> = (0..m).collect();
    by_norm.sort_by(|&a, &b| norms[b].total_cmp(&norms[a]).then(a.cmp(&b)));

    let mut far = vec![by_norm[0]];
    let mut nearest: Vec<f64> = (0..m).map(|i| dist2(row(i), row(far[0]))).collect();
    while far.len() < k {
        let mut next = 0;
        for i in 1..m {
            if nearest[i] > nearest[next] {
                next = i;
            }
        }
        far.push(next);
        for i in 0..m {
            nearest[i] = nearest[i].min(dist2(row(i), row(next)));
        }
    }
    let mut min_sep = f64::INFINITY;
    for a in 0..k {
        for b in a + 1..k {
            min_sep = min_sep.min(dist2(row(far[a]), row(far[b])).sqrt());
        }
    }
    let radius2 = (0.5 * min_sep).powi(2);

    let mut labels: Vec<Option<usize>> = vec![None; m];
    let mut groups = 0;
    while groups < k {
        let Some(&center) = by_norm.iter().find(|&&i| labels[i].is_none()) else {
            break;
        };
        for i in 0..m {
            if labels[i].is_none() && dist2(row(i), row(center)) <= radius2 {
                labels[i] = Some(groups);
            }
        }
        labels[center] = Some(groups);
        groups += 1;
    }

    let mut means = vec![0.0; k * k];
    let mut counts = vec![0usize; k];
    for i in 0..m {
        if let Some(g) = labels[i] {
            counts[g] += 1;
            for d in 0..k {
                means[g * k + d] += row(i)[d];
            }
        }
    }
    for g in 0..groups {
        for d in 0..k {
            means[g * k + d] /= counts[g] as f64;
        }
    }
    for g in groups..k {
        // Fewer groups than k: seed from the row farthest from every mean so far.
        let mut pick = 0;
        let mut pick_d = -1.0;
        for i in 0..m {
            let d = (0..g)
                .map(|h| dist2(row(i), &means[h * k..(h + 1) * k]))
                .fold(f64::INFINITY, f64::min);
            if d > pick_d {
                pick_d = d;
                pick = i;
            }
        }
        means[g * k..(g + 1) * k].copy_from_slice(row(pick));
    }

    let nearest_mean = |i: usize, means: &[f64]| {
        let mut best = 0;
        let mut best_d = f64::INFINITY;
        for g in 0..k {
            let d = dist2(row(i), &means[g * k..(g + 1) * k]);
            if d < best_d {
                best_d = d;
                best = g;
            }
        }
        best
    };

    let mut assign: Vec<usize> = (0..m).map(|i| nearest_mean(i, &means)).collect();
    for _ in 0..MAX_LLOYD_ROUNDS {
        repair_empty(&mut assign, points, m, k, &means);
        means.fill(0.0);
        counts.fill(0);
        for i in 0..m {
            let g = assign[i];
            counts[g] += 1;
            for d in 0..k {
                means[g * k + d] += row(i)[d];
            }
        }
        for g in 0..k {
            for d in 0..k {
                means[g * k + d] /= counts[g] as f64;
            }
        }
        let next: Vec<usize> = (0..m).map(|i| nearest_mean(i, &means)).collect();
        if next == assign {
            break;
        }
        assign = next;
    }
    repair_empty(&mut assign, points, m, k, &means);
    assign
}

/// Moves the worst-fitting row of a multi-member group into each empty group.
fn repair_empty(assign: &mut [usize], points: &[f64], m: usize, k: usize, means: &[f64]) {
    loop {
        let mut counts = vec![0usize; k];
        for &g in assign.iter() {
            counts[g] += 1;
        }
        let Some(empty) = counts.iter().position(|&c| c == 0) else {
            return;
        };
        let mut pick = None;
        let mut pick_d = -1.0;
        for i in 0..m {
            let g = assign[i];
            if counts[g] > 1 {
                let d = dist2(&points[i * k..(i + 1) * k], &means[g * k..(g + 1) * k]);
                if d > pick_d {
                    pick_d = d;
                    pick = Some(i);
                }
            }
        }
        match pick {
            Some(i) => assign[i] = empty,
            None => return,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::{all_vertices, Vertex};

    fn cliques(sizes: &[usize]) -> SignedSubgraph {
        let m: usize = sizes.iter().sum();
        let mut edges = Vec::new();
        let mut start = 0;
        for &s in sizes {
            for a in start..start + s {
                for b in a + 1..start + s {
                    edges.push((a, b));
                }
            }
            start += s;
        }
        SignedSubgraph::from_edges(all_vertices(m), &edges).unwrap()
    }

    fn planted(sizes: &[usize]) -> Vec<Vec<usize>> {
        let mut out = Vec::new();
        let mut start = 0;
        for &s in sizes {
            out.push((start..start + s).collect());
            start += s;
        }
        out
    }

    #[test]
    fn two_cliques_noiseless() {
        let g = cliques(&[5, 5]);
        let p = bal_partition(&g, 2, 1.0, 1.0).unwrap();
        assert_eq!(p.clusters(), &planted(&[5, 5])[..]);
    }

    #[test]
    fn single_cluster_and_singletons() {
        let g = cliques(&[3, 4]);
        assert_eq!(bal_partition(&g, 1, 0.5, 1.0).unwrap().clusters(), &[(0..7).collect::<Vec<_>>()]);
        assert_eq!(bal_partition(&g, 7, 0.5, 1.0).unwrap().len(), 7);
        assert_eq!(bal_partition(&g, 8, 0.5, 1.0), Err(Error::TooManyClusters { k: 8, len: 7 }));
        assert!(bal_partition(&SignedSubgraph::empty(), 1, 0.5, 1.0).is_err());
    }

    #[test]
    fn noiseless_unequal_cliques_dense_and_iterative() {
        for sizes in [vec![40, 40, 5], vec![2, 3, 2], vec![100, 60, 30, 2]] {
            let g = cliques(&sizes);
            for exec in [Execution::Sequential, Execution::Parallel] {
                let p = bal_partition_with(&g, sizes.len(), 1.0, 0.5, exec).unwrap();
                assert_eq!(p.clusters(), &planted(&sizes)[..], "sizes {sizes:?}");
            }
        }
    }

    #[test]
    fn recovery_condition_examples() {
        assert!(recovery_condition(1_000_000, 2, 1.0, 0.5, 4.0));
        assert!(!recovery_condition(100, 10, 0.1, 0.1, 1000.0));
        assert!(recovery_condition(3, 5, 0.01, 0.01, 0.0));
    }

    #[test]
    fn subspace_matches_dense_on_moderate_matrix() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let m = 150;
        let mut a = vec![0.0; m * m];
        for i in 0..m {
            for j in i + 1..m {
                let same = (i % 3) == (j % 3);
                let p = if same { 0.8 } else { 0.2 };
                let x = f64::from(u8::from(rng.random::<f64>() < p)) - 0.2;
                a[i * m + j] = x;
                a[j * m + i] = x;
            }
        }
        let (dv, _) = dense_top_eigenpairs(&a, m, 3).unwrap();
        let (sv, _) = subspace_top_eigenpairs(&a, m, 3, Execution::Parallel).unwrap();
        for (d, s) in dv.iter().zip(&sv) {
            assert!((d - s).abs() < 1e-6 * d.abs(), "{d} vs {s}");
        }
    }

    #[test]
    fn partition_result_canonical() {
        let p = PartitionResult::from_clusters(vec![vec![4, 2], vec![], vec![1, 3]]);
        assert_eq!(p.clusters(), &[vec![1, 3], vec![2, 4]]);
        let _ = Vertex(1);
    }
}
