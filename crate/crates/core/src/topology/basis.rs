use nalgebra::DMatrix;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{BridgeDecomposition, Component, Incidence};

/// One basis cycle: a back edge closed by the tree path from its descendant
/// endpoint up to its ancestor endpoint.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Cycle {
    pub back_edge: usize,
    /// Traversal order: the back edge first, then the tree path.
    pub edges: Vec<usize>,
    pub component: usize,
}

/// DFS fundamental cycle basis with all cycles traversing every edge in its
/// stored (possibly flipped) direction, so `C` is a 0/1 matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct CycleBasis {
    m: usize,
    cycles: Vec<Cycle>,
    tree_edges: Vec<usize>,
    back_edges: Vec<usize>,
    bridges: Vec<usize>,
    roots: Vec<usize>,
    flipped: Vec<bool>,
    /// DFS forest over the bridge-free graph: `(parent node, edge)`.
    parent: Vec<Option<(usize, usize)>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub enum RootPolicy {
    /// Lowest node index of every component.
    #[default]
    Lowest,
    /// This node for the component containing it, lowest elsewhere.
    Node(usize),
    /// One root per component, in component order.
    PerComponent(Vec<usize>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum NeighborOrder {
    #[default]
    Ascending,
    /// Neighbor lists shuffled with a seeded generator.
    Shuffled(u64),
}

pub(crate) struct ComponentDfs {
    pub cycles: Vec<(usize, Vec<usize>)>,
    pub tree_edges: Vec<usize>,
    pub back_edges: Vec<usize>,
    /// `(edge, flipped)` for every edge of the component.
    pub orientation: Vec<(usize, bool)>,
    pub parents: Vec<(usize, usize, usize)>,
}

/// Depth-first search over one component. `adj` must already be restricted
/// to the component's edges and ordered as desired.
pub(crate) fn dfs_component(
    inc: &Incidence,
    adj: &[Vec<(usize, usize)>],
    root: usize,
) -> ComponentDfs {
    const NONE: usize = usize::MAX;
    let n = inc.n();
    let mut visited = vec![false; n];
    let mut active = vec![false; n];
    let mut parent_node = vec![NONE; n];
    let mut parent_edge = vec![NONE; n];
    let mut out = ComponentDfs {
        cycles: Vec::new(),
        tree_edges: Vec::new(),
        back_edges: Vec::new(),
        orientation: Vec::new(),
        parents: Vec::new(),
    };

    visited[root] = true;
    active[root] = true;
    let mut stack = vec![(root, 0usize)];
    while let Some(top) = stack.last_mut() {
        let (u, slot) = *top;
        if slot == adj[u].len() {
            active[u] = false;
            stack.pop();
            continue;
        }
        top.1 += 1;
        let (v, e) = adj[u][slot];
        if e == parent_edge[u] {
            continue;
        }
        if !visited[v] {
            // tree edge, oriented child -> parent
            visited[v] = true;
            active[v] = true;
            parent_node[v] = u;
            parent_edge[v] = e;
            out.tree_edges.push(e);
            out.orientation.push((e, inc.ends()[e].0 != v));
            out.parents.push((v, u, e));
            stack.push((v, 0));
        } else if active[v] {
            // back edge to an ancestor, oriented ancestor -> descendant
            out.back_edges.push(e);
            out.orientation.push((e, inc.ends()[e].0 != v));
            let mut edges = vec![e];
            let mut w = u;
            while w != v {
                edges.push(parent_edge[w]);
                w = parent_node[w];
            }
            out.cycles.push((e, edges));
        }
        // finished neighbors are descendants whose back edge is already recorded
    }
    out
}

pub(crate) fn component_adjacency(inc: &Incidence, comp: &Component) -> Vec<Vec<(usize, usize)>> {
    let mut adj = vec![Vec::new(); inc.n()];
    for &e in &comp.edges {
        let (s, t) = inc.ends()[e];
        adj[s].push((t, e));
        adj[t].push((s, e));
    }
    for list in &mut adj {
        list.sort_unstable();
    }
    adj
}

pub(crate) fn shuffle_adjacency(adj: &mut [Vec<(usize, usize)>], rng: &mut ChaCha8Rng) {
    for list in adj {
        list.shuffle(rng);
    }
}

/// Deterministic basis: ascending neighbor order, roots per `root`.
pub fn dfs_cycle_basis(decomp: &BridgeDecomposition, inc: &Incidence, root: &RootPolicy) -> CycleBasis {
    dfs_cycle_basis_with(decomp, inc, root, NeighborOrder::Ascending)
}

pub fn dfs_cycle_basis_with(
    decomp: &BridgeDecomposition,
    inc: &Incidence,
    root: &RootPolicy,
    order: NeighborOrder,
) -> CycleBasis {
    let mut rng = match order {
        NeighborOrder::Shuffled(seed) => Some(ChaCha8Rng::seed_from_u64(seed)),
        NeighborOrder::Ascending => None,
    };
    let roots: Vec<usize> = decomp
        .components
        .iter()
        .enumerate()
        .map(|(c, comp)| match root {
            RootPolicy::Lowest => comp.nodes[0],
            RootPolicy::Node(r) if comp.nodes.contains(r) => *r,
            RootPolicy::Node(_) => comp.nodes[0],
            RootPolicy::PerComponent(list) => {
                let r = list[c];
                assert!(comp.nodes.contains(&r), "root {r} not in component {c}");
                r
            }
        })
        .collect();
    let parts = decomp
        .components
        .iter()
        .zip(&roots)
        .map(|(comp, &r)| {
            let mut adj = component_adjacency(inc, comp);
            if let Some(rng) = rng.as_mut() {
                shuffle_adjacency(&mut adj, rng);
            }
            dfs_component(inc, &adj, r)
        })
        .collect();
    CycleBasis::assemble(inc, decomp, roots, parts)
}

impl CycleBasis {
    pub(crate) fn assemble(
        inc: &Incidence,
        decomp: &BridgeDecomposition,
        roots: Vec<usize>,
        parts: Vec<ComponentDfs>,
    ) -> CycleBasis {
        let mut basis = CycleBasis {
            m: inc.m(),
            cycles: Vec::new(),
            tree_edges: Vec::new(),
            back_edges: Vec::new(),
            bridges: decomp.bridges.clone(),
            roots,
            flipped: vec![false; inc.m()],
            parent: vec![None; inc.n()],
        };
        for (c, part) in parts.into_iter().enumerate() {
            basis.tree_edges.extend(part.tree_edges);
            basis.back_edges.extend(part.back_edges);
            for (e, f) in part.orientation {
                basis.flipped[e] = f;
            }
            for (child, par, e) in part.parents {
                basis.parent[child] = Some((par, e));
            }
            basis
                .cycles
                .extend(part.cycles.into_iter().map(|(back_edge, edges)| Cycle {
                    back_edge,
                    edges,
                    component: c,
                }));
        }
        basis
    }

    pub fn m(&self) -> usize {
        self.m
    }

    /// Number of basis cycles.
    pub fn q(&self) -> usize {
        self.cycles.len()
    }

    pub fn cycles(&self) -> &[Cycle] {
        &self.cycles
    }

    pub fn tree_edges(&self) -> &[usize] {
        &self.tree_edges
    }

    pub fn back_edges(&self) -> &[usize] {
        &self.back_edges
    }

    pub fn bridges(&self) -> &[usize] {
        &self.bridges
    }

    /// DFS root of each bridgeless component.
    pub fn roots(&self) -> &[usize] {
        &self.roots
    }

    /// Per edge: whether the basis orientation reverses the input orientation.
    pub fn flipped(&self) -> &[bool] {
        &self.flipped
    }

    pub fn reoriented_edges(&self) -> Vec<usize> {
        (0..self.m).filter(|&e| self.flipped[e]).collect()
    }

    /// `+1.0` or `-1.0` per edge: the input-to-basis orientation sign.
    pub fn orientation_signs(&self) -> Vec<f64> {
        self.flipped.iter().map(|&f| if f { -1.0 } else { 1.0 }).collect()
    }

    pub fn parent(&self, node: usize) -> Option<(usize, usize)> {
        self.parent[node]
    }

    /// Incidence `A'` in the basis orientation.
    pub fn oriented(&self, inc: &Incidence) -> Incidence {
        inc.reoriented(&self.flipped)
    }

    /// `C` as an `m x q` 0/1 matrix.
    pub fn matrix(&self) -> Vec<Vec<u8>> {
        let mut c = vec![vec![0u8; self.q()]; self.m];
        for (k, cyc) in self.cycles.iter().enumerate() {
            for &e in &cyc.edges {
                c[e][k] = 1;
            }
        }
        c
    }

    /// Column `k` of `C`.
    pub fn column(&self, k: usize) -> Vec<u8> {
        let mut col = vec![0u8; self.m];
        for &e in &self.cycles[k].edges {
            col[e] = 1;
        }
        col
    }

    pub fn to_dmatrix(&self) -> DMatrix<f64> {
        let mut c = DMatrix::zeros(self.m, self.q());
        for (k, cyc) in self.cycles.iter().enumerate() {
            for &e in &cyc.edges {
                c[(e, k)] = 1.0;
            }
        }
        c
    }

    /// Number of basis cycles through each edge.
    pub fn cycle_counts(&self) -> Vec<usize> {
        let mut counts = vec![0; self.m];
        for cyc in &self.cycles {
            for &e in &cyc.edges {
                counts[e] += 1;
            }
        }
        counts
    }

    /// `sum_e binom(c_e, 2)`.
    pub fn overlap(&self) -> usize {
        self.cycle_counts().iter().map(|&c| c * c.saturating_sub(1) / 2).sum()
    }

    /// Largest eigenvalue of `N - I`, with `N` the unit-diagonal scaling of
    /// `C^T D^-1 C`. Values below one make `2 diag(J) - J` an M-matrix at
    /// zero flow, which the face conditions need for any box to succeed.
    pub fn dominance_index(&self, weights: &[f64]) -> f64 {
        dominance_of(&self.cycles, weights, &(0..self.q()).collect::<Vec<_>>())
    }
}

pub(crate) fn dominance_of(cycles: &[Cycle], weights: &[f64], which: &[usize]) -> f64 {
    let q = which.len();
    if q <= 1 {
        return 0.0;
    }
    let mut resist = vec![0.0; weights.len()];
    let mut j = DMatrix::<f64>::zeros(q, q);
    for (a, &ka) in which.iter().enumerate() {
        for &e in &cycles[ka].edges {
            resist[e] = 1.0 / weights[e];
        }
        for (b, &kb) in which.iter().enumerate().skip(a) {
            let v: f64 = cycles[kb].edges.iter().map(|&e| resist[e]).sum();
            j[(a, b)] = v;
            j[(b, a)] = v;
        }
        for &e in &cycles[ka].edges {
            resist[e] = 0.0;
        }
    }
    let scale: Vec<f64> = (0..q).map(|i| 1.0 / j[(i, i)].sqrt()).collect();
    let n = DMatrix::from_fn(q, q, |a, b| {
        if a == b {
            0.0
        } else {
            j[(a, b)] * scale[a] * scale[b]
        }
    });
    n.symmetric_eigenvalues().max()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::topology::find_bridges;

    fn fig1() -> Incidence {
        // e1..e5 = (2,1) (2,4) (3,2) (1,4) (3,4), zero-based nodes
        Incidence::unweighted(4, vec![(1, 0), (1, 3), (2, 1), (0, 3), (2, 3)])
    }

    #[test]
    fn worked_example_columns() {
        let inc = fig1();
        let basis = dfs_cycle_basis(&find_bridges(&inc), &inc, &RootPolicy::Node(0));
        assert_eq!(basis.q(), 2);
        assert_eq!(basis.column(0), vec![1, 0, 1, 1, 1]);
        assert_eq!(basis.column(1), vec![0, 1, 1, 0, 1]);
        assert_eq!(basis.back_edges(), &[3, 1]);
        assert_eq!(basis.tree_edges(), &[0, 2, 4]);
        // e4 is stored 1->4 and e2 2->4 as in the figure; e5 stored 3->4 is flipped to 4->3
        assert_eq!(basis.reoriented_edges(), vec![4]);
    }

    #[test]
    fn columns_are_cycle_vectors() {
        let inc = fig1();
        let basis = dfs_cycle_basis(&find_bridges(&inc), &inc, &RootPolicy::Lowest);
        let oriented = basis.oriented(&inc);
        for k in 0..basis.q() {
            let col: Vec<f64> = basis.column(k).iter().map(|&v| v as f64).collect();
            assert!(oriented.node_balance(&col).iter().all(|&v| v == 0.0));
        }
    }

    #[test]
    fn tree_has_empty_basis() {
        let inc = Incidence::unweighted(4, vec![(0, 1), (1, 2), (1, 3)]);
        let basis = dfs_cycle_basis(&find_bridges(&inc), &inc, &RootPolicy::Lowest);
        assert_eq!(basis.q(), 0);
        assert_eq!(basis.matrix(), vec![Vec::<u8>::new(); 3]);
        assert_eq!(basis.bridges(), &[0, 1, 2]);
    }

    #[test]
    fn single_cycle_dominance_is_zero() {
        let inc = Incidence::unweighted(3, vec![(0, 1), (1, 2), (2, 0)]);
        let basis = dfs_cycle_basis(&find_bridges(&inc), &inc, &RootPolicy::Lowest);
        assert_eq!(basis.dominance_index(inc.weights()), 0.0);
    }

    #[test]
    fn shuffled_order_is_seed_deterministic() {
        let inc = Incidence::unweighted(
            5,
            vec![(0, 1), (1, 2), (2, 3), (3, 4), (4, 0), (0, 2), (1, 3), (2, 4)],
        );
        let d = find_bridges(&inc);
        let a = dfs_cycle_basis_with(&d, &inc, &RootPolicy::Lowest, NeighborOrder::Shuffled(9));
        let b = dfs_cycle_basis_with(&d, &inc, &RootPolicy::Lowest, NeighborOrder::Shuffled(9));
        assert_eq!(a, b);
        assert_eq!(a.q(), 4);
    }
}
