use super::Incidence;

/// A connected piece of the graph after all bridges are removed.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Component {
    /// Ascending node indices.
    pub nodes: Vec<usize>,
    /// Ascending edge indices; empty for a node isolated by bridge removal.
    pub edges: Vec<usize>,
}

impl Component {
    /// Cycle-space dimension `m_c - n_c + 1`.
    pub fn cycle_rank(&self) -> usize {
        self.edges.len() + 1 - self.nodes.len()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BridgeDecomposition {
    /// Ascending edge indices.
    pub bridges: Vec<usize>,
    /// Ordered by lowest node.
    pub components: Vec<Component>,
}

impl BridgeDecomposition {
    pub fn is_bridge(&self, edge: usize) -> bool {
        self.bridges.binary_search(&edge).is_ok()
    }

    /// Total cycle-space dimension.
    pub fn cycle_rank(&self) -> usize {
        self.components.iter().map(Component::cycle_rank).sum()
    }
}

/// Low-link bridge search (iterative, linear time) followed by a sweep that
/// collects the 2-edge-connected components.
pub fn find_bridges(inc: &Incidence) -> BridgeDecomposition {
    const UNSEEN: usize = usize::MAX;
    let n = inc.n();
    let adj = inc.adjacency();
    let mut disc = vec![UNSEEN; n];
    let mut low = vec![UNSEEN; n];
    let mut is_bridge = vec![false; inc.m()];
    let mut clock = 0;

    for start in 0..n {
        if disc[start] != UNSEEN {
            continue;
        }
        disc[start] = clock;
        low[start] = clock;
        clock += 1;
        // (node, edge to parent, next neighbor slot)
        let mut stack: Vec<(usize, usize, usize)> = vec![(start, UNSEEN, 0)];
        while let Some(top) = stack.last_mut() {
            let (u, parent_edge, slot) = *top;
            if slot < adj[u].len() {
                top.2 += 1;
                let (v, e) = adj[u][slot];
                if e == parent_edge {
                    continue;
                }
                if disc[v] == UNSEEN {
                    disc[v] = clock;
                    low[v] = clock;
                    clock += 1;
                    stack.push((v, e, 0));
                } else {
                    low[u] = low[u].min(disc[v]);
                }
            } else {
                stack.pop();
                if let Some(&(p, _, _)) = stack.last() {
                    low[p] = low[p].min(low[u]);
                    if low[u] > disc[p] {
                        is_bridge[parent_edge] = true;
                    }
                }
            }
        }
    }

    let bridges: Vec<usize> = (0..inc.m()).filter(|&e| is_bridge[e]).collect();

    let mut comp_of = vec![UNSEEN; n];
    let mut components = Vec::new();
    for start in 0..n {
        if comp_of[start] != UNSEEN {
            continue;
        }
        let id = components.len();
        let mut nodes = vec![start];
        let mut edges = Vec::new();
        comp_of[start] = id;
        let mut i = 0;
        while i < nodes.len() {
            let u = nodes[i];
            i += 1;
            for &(v, e) in &adj[u] {
                if is_bridge[e] {
                    continue;
                }
                if u < v {
                    edges.push(e);
                }
                if comp_of[v] == UNSEEN {
                    comp_of[v] = id;
                    nodes.push(v);
                }
            }
        }
        nodes.sort_unstable();
        edges.sort_unstable();
        components.push(Component { nodes, edges });
    }

    BridgeDecomposition { bridges, components }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tree_is_all_bridges() {
        let inc = Incidence::unweighted(5, vec![(0, 1), (1, 2), (1, 3), (3, 4)]);
        let d = find_bridges(&inc);
        assert_eq!(d.bridges, vec![0, 1, 2, 3]);
        assert_eq!(d.components.len(), 5);
        assert!(d.components.iter().all(|c| c.edges.is_empty()));
        assert_eq!(d.cycle_rank(), 0);
    }

    #[test]
    fn fig1_graph_is_bridgeless() {
        // e1..e5 = (2,1) (2,4) (3,2) (1,4) (3,4), zero-based
        let inc = Incidence::unweighted(4, vec![(1, 0), (1, 3), (2, 1), (0, 3), (2, 3)]);
        let d = find_bridges(&inc);
        assert!(d.bridges.is_empty());
        assert_eq!(d.components.len(), 1);
        assert_eq!(d.components[0].edges, vec![0, 1, 2, 3, 4]);
        assert_eq!(d.cycle_rank(), 2);
    }

    #[test]
    fn two_triangles_joined_by_a_bridge() {
        let inc = Incidence::unweighted(
            6,
            vec![(0, 1), (1, 2), (2, 0), (2, 3), (3, 4), (4, 5), (5, 3)],
        );
        let d = find_bridges(&inc);
        assert_eq!(d.bridges, vec![3]);
        assert_eq!(d.components.len(), 2);
        assert_eq!(d.components[0].nodes, vec![0, 1, 2]);
        assert_eq!(d.components[1].edges, vec![4, 5, 6]);
    }

    #[test]
    fn single_node() {
        let inc = Incidence::unweighted(1, vec![]);
        let d = find_bridges(&inc);
        assert!(d.bridges.is_empty());
        assert_eq!(d.components.len(), 1);
        assert_eq!(d.cycle_rank(), 0);
    }
}
