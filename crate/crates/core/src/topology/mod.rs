//! Oriented incidence structure, bridges, and consistently oriented cycle bases.

mod basis;
mod bridges;
mod dot;
mod search;

use nalgebra::DMatrix;

use crate::netparse::Network;

pub use basis::{dfs_cycle_basis, dfs_cycle_basis_with, Cycle, CycleBasis, NeighborOrder, RootPolicy};
pub use bridges::{find_bridges, BridgeDecomposition, Component};
pub use dot::to_dot;
pub use search::{select_basis, BasisSearch};

/// Node-edge incidence of an oriented graph plus its edge weights.
///
/// Edge `e` runs from `ends[e].0` (source, `+1`) to `ends[e].1` (sink, `-1`).
#[derive(Debug, Clone, PartialEq)]
pub struct Incidence {
    n: usize,
    ends: Vec<(usize, usize)>,
    weights: Vec<f64>,
}

impl Incidence {
    pub fn new(n: usize, ends: Vec<(usize, usize)>, weights: Vec<f64>) -> Self {
        assert_eq!(ends.len(), weights.len(), "one weight per edge");
        assert!(ends.iter().all(|&(a, b)| a < n && b < n && a != b));
        Incidence { n, ends, weights }
    }

    /// Unit-weight incidence; handy for purely topological work.
    pub fn unweighted(n: usize, ends: Vec<(usize, usize)>) -> Self {
        let m = ends.len();
        Incidence::new(n, ends, vec![1.0; m])
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.ends.len()
    }

    pub fn ends(&self) -> &[(usize, usize)] {
        &self.ends
    }

    /// Diagonal of `D`.
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn entry(&self, node: usize, edge: usize) -> i8 {
        let (s, t) = self.ends[edge];
        if node == s {
            1
        } else if node == t {
            -1
        } else {
            0
        }
    }

    /// Dense `n x m` integer matrix `A`.
    pub fn matrix(&self) -> Vec<Vec<i8>> {
        (0..self.n)
            .map(|k| (0..self.m()).map(|e| self.entry(k, e)).collect())
            .collect()
    }

    pub fn to_dmatrix(&self) -> DMatrix<f64> {
        DMatrix::from_fn(self.n, self.m(), |k, e| self.entry(k, e) as f64)
    }

    /// `L = A D A^T`.
    pub fn laplacian(&self) -> DMatrix<f64> {
        let mut l = DMatrix::zeros(self.n, self.n);
        for (&(s, t), &w) in self.ends.iter().zip(&self.weights) {
            l[(s, s)] += w;
            l[(t, t)] += w;
            l[(s, t)] -= w;
            l[(t, s)] -= w;
        }
        l
    }

    /// `A^T x`: potential difference across each edge.
    pub fn edge_differences(&self, x: &[f64]) -> Vec<f64> {
        self.ends.iter().map(|&(s, t)| x[s] - x[t]).collect()
    }

    /// `A f`: net outflow at each node.
    pub fn node_balance(&self, f: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.n];
        for (&(s, t), &fe) in self.ends.iter().zip(f) {
            out[s] += fe;
            out[t] -= fe;
        }
        out
    }

    /// Same graph with the listed edges reversed.
    pub fn reoriented(&self, flipped: &[bool]) -> Incidence {
        let ends = self
            .ends
            .iter()
            .zip(flipped)
            .map(|(&(s, t), &f)| if f { (t, s) } else { (s, t) })
            .collect();
        Incidence {
            n: self.n,
            ends,
            weights: self.weights.clone(),
        }
    }

    /// Neighbor lists `(neighbor, edge)` in ascending `(neighbor, edge)` order.
    pub(crate) fn adjacency(&self) -> Vec<Vec<(usize, usize)>> {
        let mut adj = vec![Vec::new(); self.n];
        for (e, &(s, t)) in self.ends.iter().enumerate() {
            adj[s].push((t, e));
            adj[t].push((s, e));
        }
        for list in &mut adj {
            list.sort_unstable();
        }
        adj
    }
}

/// Incidence in the network's stored branch order, `D_ee = V_i V_j B_ij`.
pub fn build_incidence(net: &Network) -> Incidence {
    Incidence::new(
        net.n(),
        net.branches.iter().map(|b| (b.from, b.to)).collect(),
        net.edge_weights(),
    )
}
