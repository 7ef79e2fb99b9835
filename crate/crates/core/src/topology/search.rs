use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::basis::{component_adjacency, dfs_component, dominance_of, shuffle_adjacency, ComponentDfs};
use super::{BridgeDecomposition, CycleBasis, Incidence};

/// How the DFS basis is chosen.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "lowercase")]
pub enum BasisSearch {
    /// Lowest root, ascending neighbors.
    None,
    /// Every root with ascending neighbors; least total cycle overlap wins.
    Roots,
    /// Every root plus `trials` seeded random neighbor orders; the basis with
    /// the smallest dominance index wins.
    Orders { trials: usize, seed: u64 },
    /// The deterministic basis, replaced by an `Orders` search on components
    /// whose dominance index is at least one.
    Auto { trials: usize, seed: u64 },
}

impl Default for BasisSearch {
    fn default() -> Self {
        BasisSearch::Auto {
            trials: 2000,
            seed: 0,
        }
    }
}

impl BasisSearch {
    pub fn name(&self) -> &'static str {
        match self {
            BasisSearch::None => "none",
            BasisSearch::Roots => "roots",
            BasisSearch::Orders { .. } => "orders",
            BasisSearch::Auto { .. } => "auto",
        }
    }
}

/// Builds a cycle basis per component following `search`. Components are
/// edge-disjoint, so every criterion is optimised component by component.
pub fn select_basis(decomp: &BridgeDecomposition, inc: &Incidence, search: &BasisSearch) -> CycleBasis {
    let mut roots = Vec::with_capacity(decomp.components.len());
    let mut parts = Vec::with_capacity(decomp.components.len());
    for (c, comp) in decomp.components.iter().enumerate() {
        let adj = component_adjacency(inc, comp);
        let default_part = || dfs_component(inc, &adj, comp.nodes[0]);
        let (root, part) = match *search {
            BasisSearch::None => (comp.nodes[0], default_part()),
            BasisSearch::Roots => comp
                .nodes
                .iter()
                .map(|&r| (r, dfs_component(inc, &adj, r)))
                .min_by_key(|(_, p)| overlap_of(p, inc.m()))
                .expect("component has a node"),
            BasisSearch::Orders { trials, seed } => {
                search_orders(inc, &adj, &comp.nodes, trials, seed.wrapping_add(c as u64))
            }
            BasisSearch::Auto { trials, seed } => {
                let part = default_part();
                if dominance_of_part(&part, inc.weights()) < 1.0 {
                    (comp.nodes[0], part)
                } else {
                    search_orders(inc, &adj, &comp.nodes, trials, seed.wrapping_add(c as u64))
                }
            }
        };
        roots.push(root);
        parts.push(part);
    }
    CycleBasis::assemble(inc, decomp, roots, parts)
}

fn search_orders(
    inc: &Incidence,
    adj: &[Vec<(usize, usize)>],
    nodes: &[usize],
    trials: usize,
    seed: u64,
) -> (usize, ComponentDfs) {
    let weights = inc.weights();
    let mut best: Option<(f64, usize, ComponentDfs)> = None;
    let consider = |root: usize, part: ComponentDfs, best: &mut Option<(f64, usize, ComponentDfs)>| {
        let score = dominance_of_part(&part, weights);
        if best.as_ref().is_none_or(|b| score < b.0) {
            *best = Some((score, root, part));
        }
    };
    for &r in nodes {
        consider(r, dfs_component(inc, adj, r), &mut best);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut shuffled = adj.to_vec();
    for _ in 0..trials {
        let root = nodes[rng.random_range(0..nodes.len())];
        shuffle_adjacency(&mut shuffled, &mut rng);
        consider(root, dfs_component(inc, &shuffled, root), &mut best);
    }
    let (score, root, part) = best.expect("component has a node");
    log::debug!("basis search: dominance {score:.4} with root {root}");
    (root, part)
}

fn overlap_of(part: &ComponentDfs, m: usize) -> usize {
    let mut counts = vec![0usize; m];
    for (_, edges) in &part.cycles {
        for &e in edges {
            counts[e] += 1;
        }
    }
    counts.iter().map(|&c| c * c.saturating_sub(1) / 2).sum()
}

fn dominance_of_part(part: &ComponentDfs, weights: &[f64]) -> f64 {
    let cycles: Vec<super::Cycle> = part
        .cycles
        .iter()
        .map(|(b, edges)| super::Cycle {
            back_edge: *b,
            edges: edges.clone(),
            component: 0,
        })
        .collect();
    dominance_of(&cycles, weights, &(0..cycles.len()).collect::<Vec<_>>())
}
