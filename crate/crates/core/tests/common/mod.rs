#![allow(dead_code)]

use std::path::PathBuf;

use cyclecert::netparse::{load_network, LosslessOptions, Network};
use cyclecert::topology::{CycleBasis, Incidence};
use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub fn case_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("cases").join(name)
}

pub fn ieee(name: &str) -> Network {
    load_network(&case_path(name), &LosslessOptions::default()).unwrap().0
}

/// Four-node, five-edge example graph; buses 1..4 are indices 0..3.
pub fn example_edges() -> Vec<(usize, usize)> {
    vec![(1, 0), (1, 3), (2, 1), (0, 3), (2, 3)]
}

/// Random connected simple graph: a random spanning tree plus `extra` chords.
pub fn random_graph(rng: &mut ChaCha8Rng, n: usize, extra: usize) -> Vec<(usize, usize)> {
    let mut edges = Vec::new();
    for v in 1..n {
        let u = rng.random_range(0..v);
        edges.push(if rng.random_bool(0.5) { (u, v) } else { (v, u) });
    }
    let mut tries = 0;
    while edges.len() < n - 1 + extra && tries < 200 {
        tries += 1;
        let a = rng.random_range(0..n);
        let b = rng.random_range(0..n);
        if a == b || edges.iter().any(|&(s, t)| (s, t) == (a, b) || (s, t) == (b, a)) {
            continue;
        }
        edges.push((a, b));
    }
    edges
}

pub fn random_weights(rng: &mut ChaCha8Rng, m: usize) -> Vec<f64> {
    (0..m).map(|_| rng.random_range(0.5..5.0)).collect()
}

/// Balanced injections with entries roughly in `[-scale, scale]`.
pub fn random_balanced(rng: &mut ChaCha8Rng, n: usize, scale: f64) -> Vec<f64> {
    let mut p: Vec<f64> = (0..n).map(|_| rng.random_range(-scale..scale)).collect();
    let mean = p.iter().sum::<f64>() / n as f64;
    p.iter_mut().for_each(|v| *v -= mean);
    let drift: f64 = p.iter().sum();
    p[n - 1] -= drift;
    p
}

pub fn network(n: usize, edges: &[(usize, usize)], weights: &[f64], p: Vec<f64>) -> Network {
    let triples: Vec<_> = edges.iter().zip(weights).map(|(&(a, b), &w)| (a, b, w)).collect();
    Network::from_edges(n, &triples, p).unwrap()
}

/// Dense signed incidence matrix built straight from the edge list.
pub fn dense_incidence(n: usize, edges: &[(usize, usize)]) -> DMatrix<f64> {
    let mut a = DMatrix::zeros(n, edges.len());
    for (e, &(s, t)) in edges.iter().enumerate() {
        a[(s, e)] = 1.0;
        a[(t, e)] = -1.0;
    }
    a
}

/// `L^+ P` from a dense SVD pseudoinverse.
pub fn svd_pinv_apply(l: &DMatrix<f64>, p: &[f64]) -> Vec<f64> {
    let pinv = l.clone().pseudo_inverse(1e-10).unwrap();
    (pinv * DVector::from_column_slice(p)).iter().copied().collect()
}

/// Bridges by deleting each edge and testing connectivity.
pub fn brute_force_bridges(n: usize, edges: &[(usize, usize)]) -> Vec<usize> {
    (0..edges.len())
        .filter(|&skip| {
            let mut seen = vec![false; n];
            let mut stack = vec![0];
            seen[0] = true;
            while let Some(v) = stack.pop() {
                for (e, &(a, b)) in edges.iter().enumerate() {
                    if e == skip {
                        continue;
                    }
                    let w = if a == v {
                        b
                    } else if b == v {
                        a
                    } else {
                        continue;
                    };
                    if !seen[w] {
                        seen[w] = true;
                        stack.push(w);
                    }
                }
            }
            seen.iter().any(|s| !s)
        })
        .collect()
}

/// `P - A D sin(A^T theta)` computed edge by edge from the raw edge list.
pub fn independent_residual(edges: &[(usize, usize)], weights: &[f64], p: &[f64], theta: &[f64]) -> f64 {
    let mut r = p.to_vec();
    for (e, &(s, t)) in edges.iter().enumerate() {
        let f = weights[e] * (theta[s] - theta[t]).sin();
        r[s] -= f;
        r[t] += f;
    }
    r.iter().fold(0.0, |m, v| m.max(v.abs()))
}

pub fn max_branch_angle(edges: &[(usize, usize)], theta: &[f64]) -> f64 {
    edges.iter().fold(0.0, |m, &(s, t)| m.max((theta[s] - theta[t]).abs()))
}

/// Signed cycle matrix in the input orientation: `C` with flipped rows negated.
pub fn signed_cycle_matrix(basis: &CycleBasis) -> DMatrix<f64> {
    let mut c = basis.to_dmatrix();
    for (e, &flip) in basis.flipped().iter().enumerate() {
        if flip {
            c.row_mut(e).neg_mut();
        }
    }
    c
}

/// `g_i` by explicit loops over the basis matrix and the input data.
pub fn g_by_loops(inc: &Incidence, basis: &CycleBasis, z0: &[f64], lambda: &[f64]) -> Vec<f64> {
    let c = basis.matrix();
    let w = inc.weights();
    let q = basis.q();
    let mut g = vec![0.0; q];
    for (i, gi) in g.iter_mut().enumerate() {
        for e in 0..inc.m() {
            if c[e][i] == 0 {
                continue;
            }
            let mut z = z0[e];
            for k in 0..q {
                z += f64::from(c[e][k]) / w[e] * lambda[k];
            }
            assert!(z.abs() <= 1.0 + 1e-12, "corner outside the arcsin domain: {z}");
            *gi += z.clamp(-1.0, 1.0).asin();
        }
    }
    g
}

/// Theta shifted so that entry 0 is zero.
pub fn anchored(theta: &[f64]) -> Vec<f64> {
    theta.iter().map(|t| t - theta[0]).collect()
}

pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).fold(0.0, |m, (x, y)| m.max((x - y).abs()))
}
