//! Line-flow parameterisation: `L^+ P`, the particular flow, the affine family
//! `z(lambda) = z0 + H lambda`, the cycle residual `g`, and angle recovery.

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::netparse::BALANCE_TOL;
use crate::topology::{CycleBasis, Incidence};

/// `arcsin` arguments within this distance outside `[-1, 1]` are clamped;
/// anything further out is a domain error.
pub const DOMAIN_CLAMP: f64 = 1e-12;

/// `arcsin` that refuses to invent values outside its domain.
pub fn guarded_asin(z: f64, edge: usize) -> Result<f64> {
    if z.abs() <= 1.0 {
        Ok(z.asin())
    } else if z.abs() <= 1.0 + DOMAIN_CLAMP {
        Ok(z.signum() * std::f64::consts::FRAC_PI_2)
    } else {
        Err(Error::Domain { edge, value: z })
    }
}

/// Cholesky factor of the Laplacian with node 0 grounded.
#[derive(Debug, Clone)]
pub struct GroundedLaplacian {
    n: usize,
    factor: Option<Cholesky<f64, Dyn>>,
}

impl GroundedLaplacian {
    pub fn new(inc: &Incidence) -> Result<Self> {
        let n = inc.n();
        if n == 1 {
            return Ok(GroundedLaplacian { n, factor: None });
        }
        let l = inc.laplacian();
        let reduced = l.view((1, 1), (n - 1, n - 1)).into_owned();
        let factor = Cholesky::new(reduced).ok_or(Error::SingularLaplacian)?;
        Ok(GroundedLaplacian {
            n,
            factor: Some(factor),
        })
    }

    /// `u = L^+ p` for `p` orthogonal to the ones vector.
    pub fn solve(&self, p: &[f64]) -> Result<Vec<f64>> {
        if p.len() != self.n {
            return Err(Error::Dimension {
                expected: self.n,
                got: p.len(),
            });
        }
        let sum: f64 = p.iter().sum();
        if sum.abs() > BALANCE_TOL {
            return Err(Error::Unbalanced { sum });
        }
        let Some(factor) = &self.factor else {
            return Ok(vec![0.0]);
        };
        let rhs = DVector::from_column_slice(&p[1..]);
        let x = factor.solve(&rhs);
        let mut u = Vec::with_capacity(self.n);
        u.push(0.0);
        u.extend(x.iter());
        let mean = u.iter().sum::<f64>() / self.n as f64;
        for v in &mut u {
            *v -= mean;
        }
        Ok(u)
    }
}

/// `L^+ P` through the grounded system.
pub fn laplacian_pinv_apply(inc: &Incidence, p: &[f64]) -> Result<Vec<f64>> {
    GroundedLaplacian::new(inc)?.solve(p)
}

/// Particular flow and the normalized affine family, all in the basis
/// orientation (flipped edges carry negated flows).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FlowParam {
    pub f_hat: Vec<f64>,
    pub z0: Vec<f64>,
    pub weights: Vec<f64>,
    /// `(edge, z0)` on bridges.
    pub bridge_flows: Vec<(usize, f64)>,
    /// Per edge, the `(cycle, H_ek)` pairs with `H_ek > 0`, ascending cycle.
    #[serde(skip)]
    rows: Vec<Vec<(usize, f64)>>,
    /// Per cycle, its edges in ascending order.
    #[serde(skip)]
    cols: Vec<Vec<usize>>,
}

/// `f_hat = D A^T L^+ P` and `z0 = A^T L^+ P`, reoriented to the basis.
pub fn particular_flow(inc: &Incidence, basis: &CycleBasis, p: &[f64]) -> Result<FlowParam> {
    FlowParam::new(&GroundedLaplacian::new(inc)?, inc, basis, p)
}

impl FlowParam {
    pub fn new(ground: &GroundedLaplacian, inc: &Incidence, basis: &CycleBasis, p: &[f64]) -> Result<Self> {
        let u = ground.solve(p)?;
        let signs = basis.orientation_signs();
        let z0: Vec<f64> = inc
            .edge_differences(&u)
            .iter()
            .zip(&signs)
            .map(|(d, s)| d * s)
            .collect();
        let weights = inc.weights().to_vec();
        let f_hat = z0.iter().zip(&weights).map(|(z, w)| z * w).collect();

        let mut rows = vec![Vec::new(); inc.m()];
        let mut cols = Vec::with_capacity(basis.q());
        for (k, cyc) in basis.cycles().iter().enumerate() {
            let mut edges = cyc.edges.clone();
            edges.sort_unstable();
            for &e in &edges {
                rows[e].push((k, 1.0 / weights[e]));
            }
            cols.push(edges);
        }
        let bridge_flows = basis.bridges().iter().map(|&e| (e, z0[e])).collect();
        Ok(FlowParam {
            f_hat,
            z0,
            weights,
            bridge_flows,
            rows,
            cols,
        })
    }

    pub fn m(&self) -> usize {
        self.z0.len()
    }

    pub fn q(&self) -> usize {
        self.cols.len()
    }

    /// Edges of cycle `k`, ascending.
    pub fn cycle_edges(&self, k: usize) -> &[usize] {
        &self.cols[k]
    }

    /// `(cycle, H_ek)` entries of row `e`.
    pub fn h_row(&self, e: usize) -> &[(usize, f64)] {
        &self.rows[e]
    }

    /// Whether edge `e` lies on any basis cycle.
    pub fn on_cycle(&self, e: usize) -> bool {
        !self.rows[e].is_empty()
    }

    /// `H = D^-1 C` as a dense matrix.
    pub fn h_matrix(&self) -> DMatrix<f64> {
        let mut h = DMatrix::zeros(self.m(), self.q());
        for (e, row) in self.rows.iter().enumerate() {
            for &(k, v) in row {
                h[(e, k)] = v;
            }
        }
        h
    }

    pub fn z_edge(&self, e: usize, lambda: &[f64]) -> f64 {
        let mut z = self.z0[e];
        for &(k, h) in &self.rows[e] {
            z += h * lambda[k];
        }
        z
    }

    /// `z(lambda) = z0 + H lambda`.
    pub fn z(&self, lambda: &[f64]) -> Vec<f64> {
        (0..self.m()).map(|e| self.z_edge(e, lambda)).collect()
    }

    /// Component `i` of `g`.
    pub fn g_component(&self, i: usize, lambda: &[f64]) -> Result<f64> {
        let mut acc = 0.0;
        for &e in &self.cols[i] {
            acc += guarded_asin(self.z_edge(e, lambda), e)?;
        }
        Ok(acc)
    }

    /// `J = C^T diag(1 / sqrt(1 - z^2)) H` at `lambda`.
    pub fn jacobian(&self, lambda: &[f64]) -> Result<DMatrix<f64>> {
        let q = self.q();
        let mut j = DMatrix::zeros(q, q);
        for e in 0..self.m() {
            if self.rows[e].is_empty() {
                continue;
            }
            let z = self.z_edge(e, lambda);
            if z.abs() >= 1.0 {
                return Err(Error::Domain { edge: e, value: z });
            }
            let d = 1.0 / (self.weights[e] * (1.0 - z * z).sqrt());
            for &(a, _) in &self.rows[e] {
                for &(b, _) in &self.rows[e] {
                    j[(a, b)] += d;
                }
            }
        }
        Ok(j)
    }
}

/// `g(lambda) = C^T arcsin(z0 + H lambda)`: angle sums around basis cycles.
pub fn eval_g(fp: &FlowParam, lambda: &[f64]) -> Result<Vec<f64>> {
    if lambda.len() != fp.q() {
        return Err(Error::Dimension {
            expected: fp.q(),
            got: lambda.len(),
        });
    }
    let asin: Vec<Option<f64>> = (0..fp.m())
        .map(|e| {
            if fp.on_cycle(e) {
                guarded_asin(fp.z_edge(e, lambda), e).map(Some)
            } else {
                Ok(None)
            }
        })
        .collect::<Result<_>>()?;
    Ok(fp
        .cols
        .iter()
        .map(|edges| edges.iter().map(|&e| asin[e].expect("cycle edge")).sum())
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RecoveryTolerances {
    /// Bound on `||g(lambda*)||_inf` accepted as a root.
    pub root: f64,
    /// Bound on `||P - A D sin(A^T theta)||_inf`.
    pub residual: f64,
    /// Bound on `|delta_e - (theta_i - theta_j)|` for non-tree edges.
    pub consistency: f64,
}

impl Default for RecoveryTolerances {
    fn default() -> Self {
        RecoveryTolerances {
            root: 1e-8,
            residual: 1e-7,
            consistency: 1e-7,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AngleSolution {
    /// Radians, with `theta[0] = 0`.
    pub theta: Vec<f64>,
    pub max_angle_diff: f64,
    /// `||P - A D sin(A^T theta)||_inf`.
    pub residual: f64,
}

/// Angles from a cycle root `lambda*`: `f* = f_hat + C lambda*`, then
/// [`angles_from_flows`].
pub fn recover_theta(
    fp: &FlowParam,
    basis: &CycleBasis,
    inc: &Incidence,
    lambda_star: &[f64],
    tol: &RecoveryTolerances,
) -> Result<AngleSolution> {
    let g = eval_g(fp, lambda_star)?;
    let g_norm = inf_norm(&g);
    if g_norm > tol.root {
        return Err(Error::Consistency(format!("||g(lambda*)|| = {g_norm:e}")));
    }
    let signs = basis.orientation_signs();
    let flows: Vec<f64> = (0..fp.m())
        .map(|e| signs[e] * fp.weights[e] * fp.z_edge(e, lambda_star))
        .collect();
    let p = inc.node_balance(&flows);
    angles_from_flows(inc, basis, &flows, &p, tol)
}

/// Recovers `theta` with `D sin(A^T theta) = flows` by integrating
/// `delta = arcsin(D^-1 flows)` along the spanning forest formed by the DFS
/// tree edges and the bridges. `flows` use the input orientation of `inc`.
pub fn angles_from_flows(
    inc: &Incidence,
    basis: &CycleBasis,
    flows: &[f64],
    p: &[f64],
    tol: &RecoveryTolerances,
) -> Result<AngleSolution> {
    let n = inc.n();
    let ends = inc.ends();
    let w = inc.weights();
    let delta: Vec<f64> = (0..inc.m())
        .map(|e| guarded_asin(flows[e] / w[e], e))
        .collect::<Result<_>>()?;

    let mut spanning = vec![Vec::new(); n];
    for &e in basis.tree_edges().iter().chain(basis.bridges()) {
        let (s, t) = ends[e];
        spanning[s].push((t, e));
        spanning[t].push((s, e));
    }
    let mut theta = vec![f64::NAN; n];
    theta[0] = 0.0;
    let mut queue = std::collections::VecDeque::from([0usize]);
    while let Some(u) = queue.pop_front() {
        for &(v, e) in &spanning[u] {
            if !theta[v].is_nan() {
                continue;
            }
            // delta_e = theta_source - theta_sink
            theta[v] = if ends[e].0 == u {
                theta[u] - delta[e]
            } else {
                theta[u] + delta[e]
            };
            queue.push_back(v);
        }
    }
    if theta.iter().any(|t| t.is_nan()) {
        return Err(Error::Consistency("spanning forest does not reach every bus".into()));
    }

    let diffs = inc.edge_differences(&theta);
    for (e, (&d, &de)) in diffs.iter().zip(&delta).enumerate() {
        if (d - de).abs() > tol.consistency {
            return Err(Error::Consistency(format!(
                "edge {e}: angle difference {d} vs arcsin flow {de}"
            )));
        }
    }
    let residual = power_residual(inc, p, &theta);
    if residual > tol.residual {
        return Err(Error::Consistency(format!("power residual {residual:e}")));
    }
    Ok(AngleSolution {
        max_angle_diff: diffs.iter().fold(0.0, |a: f64, d| a.max(d.abs())),
        theta,
        residual,
    })
}

/// `||P - A D sin(A^T theta)||_inf`.
pub fn power_residual(inc: &Incidence, p: &[f64], theta: &[f64]) -> f64 {
    let flows: Vec<f64> = inc
        .edge_differences(theta)
        .iter()
        .zip(inc.weights())
        .map(|(d, w)| w * d.sin())
        .collect();
    let balance = inc.node_balance(&flows);
    p.iter()
        .zip(&balance)
        .fold(0.0, |acc: f64, (a, b)| acc.max((a - b).abs()))
}

pub(crate) fn inf_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |a: f64, x| a.max(x.abs()))
}
