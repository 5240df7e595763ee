//! Detection of unresolved diagonal blocks after the skew sweeps: a thresholded
//! pair adjacency matrix and its connected components.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use crate::matcore::{frobenius_norm, DenseMatrix};

/// Symmetric boolean `n×n` pattern.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Adjacency {
    n: usize,
    data: Vec<bool>,
}

impl Adjacency {
    pub fn empty(n: usize) -> Self {
        Self {
            n,
            data: vec![false; n * n],
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> bool {
        self.data[i * self.n + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: bool) {
        self.data[i * self.n + j] = v;
    }

    /// Marks the full 4×4 pattern on the union of pairs `p` and `q`.
    pub fn connect_pairs(&mut self, p: usize, q: usize) {
        let idx = [2 * p, 2 * p + 1, 2 * q, 2 * q + 1];
        for &i in &idx {
            for &j in &idx {
                self.set(i, j, true);
            }
        }
    }

    pub fn is_symmetric(&self) -> bool {
        (0..self.n).all(|i| (0..self.n).all(|j| self.get(i, j) == self.get(j, i)))
    }

    pub fn edge_count(&self) -> usize {
        self.data.iter().filter(|v| **v).count()
    }
}

/// Disjoint index clusters, each a sorted list of whole pairs.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClusterSet {
    pub clusters: Vec<Vec<usize>>,
}

impl ClusterSet {
    pub fn len(&self) -> usize {
        self.clusters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.clusters.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &Vec<usize>> {
        self.clusters.iter()
    }

    /// True if the clusters partition `0..n` into whole pairs.
    pub fn is_partition_of(&self, n: usize) -> bool {
        let mut seen = vec![false; n];
        for c in &self.clusters {
            if c.len() % 2 != 0 {
                return false;
            }
            for w in c.chunks(2) {
                if w[0] % 2 != 0 || w[1] != w[0] + 1 {
                    return false;
                }
            }
            for &i in c {
                if i >= n || seen[i] {
                    return false;
                }
                seen[i] = true;
            }
        }
        seen.into_iter().all(|s| s)
    }

    /// Cluster containing index `i`.
    pub fn cluster_of(&self, i: usize) -> Option<usize> {
        self.clusters.iter().position(|c| c.contains(&i))
    }
}

/// Connects pairs whose off-block coupling `‖[A_{l1,l2} | A_{l2,l1}]‖_F` exceeds
/// `sqrt(ρ ‖A‖_F)`.
pub fn build_adjacency(a: &DenseMatrix, rho: f64) -> Adjacency {
    build_adjacency_with_norm(a, rho, frobenius_norm(a))
}

pub fn build_adjacency_with_norm(a: &DenseMatrix, rho: f64, norm_a: f64) -> Adjacency {
    build_adjacency_threshold(a, (rho * norm_a).sqrt())
}

/// Same test against an explicit threshold (strict inequality).
pub fn build_adjacency_threshold(a: &DenseMatrix, threshold: f64) -> Adjacency {
    let n = a.n();
    assert!(n % 2 == 0, "adjacency needs an even dimension");
    let m = n / 2;
    let mut adj = Adjacency::empty(n);
    for p in 0..m {
        for q in (p + 1)..m {
            let mut s = 0.0;
            for i in [2 * p, 2 * p + 1] {
                for j in [2 * q, 2 * q + 1] {
                    s += a[(i, j)] * a[(i, j)] + a[(j, i)] * a[(j, i)];
                }
            }
            if s.sqrt() > threshold {
                adj.connect_pairs(p, q);
            }
        }
    }
    adj
}

/// Breadth-first components over pair nodes, visited in ascending order.
pub fn connected_components(adj: &Adjacency) -> ClusterSet {
    let n = adj.n();
    assert!(n % 2 == 0);
    let m = n / 2;
    let linked = |p: usize, q: usize| {
        [2 * p, 2 * p + 1].iter().any(|&i| {
            [2 * q, 2 * q + 1]
                .iter()
                .any(|&j| adj.get(i, j) || adj.get(j, i))
        })
    };
    let mut visited = vec![false; m];
    let mut clusters = Vec::new();
    for start in 0..m {
        if visited[start] {
            continue;
        }
        visited[start] = true;
        let mut queue = VecDeque::from([start]);
        let mut nodes = Vec::new();
        while let Some(p) = queue.pop_front() {
            nodes.push(p);
            for q in 0..m {
                if !visited[q] && q != p && linked(p, q) {
                    visited[q] = true;
                    queue.push_back(q);
                }
            }
        }
        nodes.sort_unstable();
        clusters.push(nodes.iter().flat_map(|&p| [2 * p, 2 * p + 1]).collect());
    }
    ClusterSet { clusters }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn block_diagonal_has_no_edges() {
        let mut a = DenseMatrix::identity(6);
        a[(1, 0)] = 2.0;
        a[(0, 1)] = -2.0;
        let adj = build_adjacency(&a, 1e-15);
        assert_eq!(adj.edge_count(), 0);
        let c = connected_components(&adj);
        assert_eq!(c.clusters, vec![vec![0, 1], vec![2, 3], vec![4, 5]]);
    }

    #[test]
    fn full_pattern_is_one_cluster() {
        let mut adj = Adjacency::empty(6);
        adj.connect_pairs(0, 1);
        adj.connect_pairs(1, 2);
        let c = connected_components(&adj);
        assert_eq!(c.clusters, vec![(0..6).collect::<Vec<_>>()]);
    }

    #[test]
    fn strict_threshold() {
        let mut a = DenseMatrix::zeros(4);
        a[(0, 2)] = 1.0;
        assert_eq!(build_adjacency_threshold(&a, 1.0).edge_count(), 0);
        assert_eq!(build_adjacency_threshold(&a, 0.999).edge_count(), 16);
    }

    #[test]
    fn components_are_sorted_partition() {
        let mut adj = Adjacency::empty(10);
        adj.connect_pairs(4, 1);
        adj.connect_pairs(3, 0);
        let c = connected_components(&adj);
        assert_eq!(
            c.clusters,
            vec![vec![0, 1, 6, 7], vec![2, 3, 8, 9], vec![4, 5]]
        );
        assert!(c.is_partition_of(10));
        assert!(adj.is_symmetric());
    }
}
