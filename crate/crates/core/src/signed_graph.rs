//! The positive-edge graph `H_T` on a queried sample `T`.

use std::collections::HashSet;
use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::oracle::{SameClusterOracle, Vertex};
use crate::par::Execution;

/// Dense symmetric `+`-adjacency over an ordered vertex sample.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SignedSubgraph {
    vertices: Vec<Vertex>,
    adj: Vec<bool>,
}

impl SignedSubgraph {
    /// Wraps a row-major `m x m` adjacency. The matrix must be symmetric with
    /// a false diagonal and the vertex ids distinct.
    pub fn new(vertices: Vec<Vertex>, adj: Vec<bool>) -> Result<Self> {
        let m = vertices.len();
        if adj.len() != m * m {
            return Err(Error::InvalidArgument(format!(
                "adjacency has {} entries, expected {}",
                adj.len(),
                m * m
            )));
        }
        check_distinct(&vertices)?;
        for i in 0..m {
            if adj[i * m + i] {
                return Err(Error::InvalidArgument(format!("self-loop at position {i}")));
            }
            for j in i + 1..m {
                if adj[i * m + j] != adj[j * m + i] {
                    return Err(Error::InvalidArgument(format!(
                        "adjacency asymmetric at ({i}, {j})"
                    )));
                }
            }
        }
        Ok(SignedSubgraph { vertices, adj })
    }

    /// Builds a graph from 0-based position pairs; handy for hand-made fixtures.
    pub fn from_edges(vertices: Vec<Vertex>, edges: &[(usize, usize)]) -> Result<Self> {
        let m = vertices.len();
        let mut adj = vec![false; m * m];
        for &(a, b) in edges {
            if a >= m || b >= m {
                return Err(Error::PositionOutOfRange { position: a.max(b), len: m });
            }
            if a == b {
                return Err(Error::InvalidArgument(format!("self-loop at position {a}")));
            }
            adj[a * m + b] = true;
            adj[b * m + a] = true;
        }
        SignedSubgraph::new(vertices, adj)
    }

    pub fn empty() -> Self {
        SignedSubgraph { vertices: Vec::new(), adj: Vec::new() }
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn vertices(&self) -> &[Vertex] {
        &self.vertices
    }

    #[inline]
    pub fn is_positive(&self, i: usize, j: usize) -> bool {
        self.adj[i * self.len() + j]
    }

    pub fn row(&self, i: usize) -> &[bool] {
        let m = self.len();
        &self.adj[i * m..(i + 1) * m]
    }

    pub fn positive_degree(&self, i: usize) -> Result<usize> {
        if i >= self.len() {
            return Err(Error::PositionOutOfRange { position: i, len: self.len() });
        }
        Ok(self.row(i).iter().filter(|&&x| x).count())
    }

    pub fn degrees(&self) -> Vec<usize> {
        (0..self.len()).map(|i| self.row(i).iter().filter(|&&x| x).count()).collect()
    }

    pub fn edge_count(&self) -> usize {
        self.degrees().iter().sum::<usize>() / 2
    }

    /// Induced subgraph on the given positions, in the given order.
    pub fn induced(&self, positions: &[usize]) -> Result<SignedSubgraph> {
        let m = self.len();
        if let Some(&p) = positions.iter().find(|&&p| p >= m) {
            return Err(Error::PositionOutOfRange { position: p, len: m });
        }
        let r = positions.len();
        let mut adj = Vec::with_capacity(r * r);
        for &a in positions {
            for &b in positions {
                adj.push(self.adj[a * m + b]);
            }
        }
        let vertices: Vec<Vertex> = positions.iter().map(|&p| self.vertices[p]).collect();
        check_distinct(&vertices)?;
        Ok(SignedSubgraph { vertices, adj })
    }

    /// Keeps positions whose degree in `self` is at least `threshold`.
    /// Degrees are computed once, before any removal.
    pub fn filter_by_degree(&self, threshold: f64) -> SignedSubgraph {
        let keep = self.positions_with_degree_at_least(threshold);
        self.induced(&keep).expect("positions come from self")
    }

    pub fn positions_with_degree_at_least(&self, threshold: f64) -> Vec<usize> {
        self.degrees()
            .into_iter()
            .enumerate()
            .filter(|&(_, d)| d as f64 >= threshold)
            .map(|(i, _)| i)
            .collect()
    }

    /// Edge-list dump: header `t m`, then one `u v` line per positive edge
    /// using original vertex ids.
    pub fn to_edge_list(&self) -> String {
        let mut out = String::new();
        writeln!(out, "{} {}", self.len(), self.edge_count()).unwrap();
        for i in 0..self.len() {
            for j in i + 1..self.len() {
                if self.is_positive(i, j) {
                    writeln!(out, "{} {}", self.vertices[i], self.vertices[j]).unwrap();
                }
            }
        }
        out
    }
}

fn check_distinct(vertices: &[Vertex]) -> Result<()> {
    let mut seen = HashSet::with_capacity(vertices.len());
    for &v in vertices {
        if !seen.insert(v) {
            return Err(Error::DuplicateVertex(v));
        }
    }
    Ok(())
}

/// Queries every pair in `sample` and keeps the `+` answers.
pub fn build_query_graph<O: SameClusterOracle + ?Sized>(
    oracle: &mut O,
    sample: &[Vertex],
) -> Result<SignedSubgraph> {
    build_query_graph_with(oracle, sample, Execution::default())
}

pub fn build_query_graph_with<O: SameClusterOracle + ?Sized>(
    oracle: &mut O,
    sample: &[Vertex],
    exec: Execution,
) -> Result<SignedSubgraph> {
    if sample.len() < 2 {
        return Err(Error::InsufficientVertices { needed: 2, available: sample.len() });
    }
    check_distinct(sample)?;
    let adj = oracle.query_all_pairs(sample, exec)?;
    Ok(SignedSubgraph { vertices: sample.to_vec(), adj })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::{all_vertices, FaultyOracle, GroundTruth};

    fn four() -> SignedSubgraph {
        SignedSubgraph::from_edges(all_vertices(4), &[(0, 1), (0, 2)]).unwrap()
    }

    #[test]
    fn degrees_of_hand_built_graph() {
        let g = four();
        assert_eq!(g.degrees(), vec![2, 1, 1, 0]);
        assert_eq!(g.positive_degree(3).unwrap(), 0);
        assert!(matches!(g.positive_degree(4), Err(Error::PositionOutOfRange { .. })));
    }

    #[test]
    fn filter_examples() {
        let g = four();
        assert_eq!(g.filter_by_degree(0.0), g);
        assert!(g.filter_by_degree(4.0).is_empty());
        let f = g.filter_by_degree(1.0);
        assert_eq!(f.vertices(), &all_vertices(3)[..]);
        assert_eq!(f.degrees(), vec![2, 1, 1]);
    }

    #[test]
    fn filter_is_single_pass() {
        // Path 1-2-3: with threshold 2 only the middle survives, and it keeps
        // degree 0 in the result rather than triggering further removal.
        let g = SignedSubgraph::from_edges(all_vertices(3), &[(0, 1), (1, 2)]).unwrap();
        let f = g.filter_by_degree(2.0);
        assert_eq!(f.vertices(), &[Vertex(2)]);
    }

    #[test]
    fn noiseless_query_graph() {
        let truth = GroundTruth::new(vec![1, 1, 1, 2, 2], 2).unwrap();
        let mut o = FaultyOracle::new(truth, 1.0, 0).unwrap();
        let g = build_query_graph(&mut o, &all_vertices(5)).unwrap();
        assert_eq!(g.degrees(), vec![2, 2, 2, 1, 1]);
        let g = build_query_graph(&mut o, &all_vertices(3)).unwrap();
        assert_eq!(g.edge_count(), 3);
    }

    #[test]
    fn query_graph_accounting_and_errors() {
        let truth = GroundTruth::new(vec![1; 30], 1).unwrap();
        let mut o = FaultyOracle::new(truth, 0.5, 0).unwrap();
        let t = all_vertices(20);
        build_query_graph(&mut o, &t).unwrap();
        assert_eq!(o.query_stats().distinct_pairs, 190);
        assert_eq!(
            build_query_graph(&mut o, &[Vertex(1), Vertex(2), Vertex(1)]),
            Err(Error::DuplicateVertex(Vertex(1)))
        );
        assert!(build_query_graph(&mut o, &[Vertex(1)]).is_err());
    }

    #[test]
    fn edge_list_dump() {
        let g = SignedSubgraph::from_edges(vec![Vertex(7), Vertex(3), Vertex(5)], &[(0, 2)]).unwrap();
        assert_eq!(g.to_edge_list(), "3 1\n7 5\n");
    }

    #[test]
    fn new_validates() {
        assert!(SignedSubgraph::new(all_vertices(2), vec![false, true, false, false]).is_err());
        assert!(SignedSubgraph::new(all_vertices(2), vec![true, false, false, false]).is_err());
        assert!(SignedSubgraph::new(vec![Vertex(1), Vertex(1)], vec![false; 4]).is_err());
    }
}
