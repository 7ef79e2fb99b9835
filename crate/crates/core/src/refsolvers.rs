//! Newton-Raphson on the lossless real power balance, plus raw diagnostic
//! scalars.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::error::Result;
use crate::flowcore::{inf_norm, laplacian_pinv_apply};
use crate::netparse::Network;
use crate::topology::{build_incidence, Incidence};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NrOptions {
    pub max_iter: usize,
    pub tol: f64,
    pub max_halvings: usize,
}

impl Default for NrOptions {
    fn default() -> Self {
        NrOptions {
            max_iter: 50,
            tol: 1e-8,
            max_halvings: 20,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NrResult {
    pub converged: bool,
    /// Angle difference bound `pi/2` holds on every branch.
    pub within_angle_limit: bool,
    pub theta: Option<Vec<f64>>,
    pub iterations: usize,
    pub final_residual: f64,
    pub max_angle_diff: f64,
}

impl NrResult {
    /// Converged with every branch angle inside `pi/2`.
    pub fn success(&self) -> bool {
        self.converged && self.within_angle_limit
    }
}

/// `P - A D sin(A^T theta)`.
pub fn mismatch(inc: &Incidence, p: &[f64], theta: &[f64]) -> Vec<f64> {
    let flows: Vec<f64> = inc
        .edge_differences(theta)
        .iter()
        .zip(inc.weights())
        .map(|(d, w)| w * d.sin())
        .collect();
    let balance = inc.node_balance(&flows);
    p.iter().zip(balance).map(|(p, b)| p - b).collect()
}

/// Largest `|theta_i - theta_j|` over branches.
pub fn max_angle_diff(inc: &Incidence, theta: &[f64]) -> f64 {
    inc.edge_differences(theta).iter().fold(0.0, |m, d| m.max(d.abs()))
}

/// Reduced Jacobian `A D diag(cos(A^T theta)) A^T` with node 0 removed.
fn reduced_jacobian(inc: &Incidence, theta: &[f64]) -> DMatrix<f64> {
    let n = inc.n();
    let diffs = inc.edge_differences(theta);
    let mut j = DMatrix::zeros(n - 1, n - 1);
    for (e, &(s, t)) in inc.ends().iter().enumerate() {
        let c = inc.weights()[e] * diffs[e].cos();
        for (a, b, v) in [(s, s, c), (t, t, c), (s, t, -c), (t, s, -c)] {
            if a > 0 && b > 0 {
                j[(a - 1, b - 1)] += v;
            }
        }
    }
    j
}

/// Damped Newton from `theta0` with angle 0 held fixed at bus index 0.
pub fn nr_solve_incidence(inc: &Incidence, p: &[f64], theta0: &[f64], opts: &NrOptions) -> NrResult {
    let n = inc.n();
    let mut theta = theta0.to_vec();
    let shift = theta.first().copied().unwrap_or(0.0);
    theta.iter_mut().for_each(|t| *t -= shift);
    let mut r = mismatch(inc, p, &theta);
    let mut norm = inf_norm(&r);
    let mut iterations = 0;

    while norm > opts.tol && iterations < opts.max_iter && n > 1 {
        iterations += 1;
        let rhs = DVector::from_iterator(n - 1, r[1..].iter().copied());
        let Some(step) = reduced_jacobian(inc, &theta).lu().solve(&rhs) else {
            log::debug!("nr: singular jacobian at iteration {iterations}");
            break;
        };
        let mut alpha = 1.0;
        let mut accepted = false;
        for _ in 0..=opts.max_halvings {
            let mut trial = theta.clone();
            for k in 1..n {
                trial[k] += alpha * step[k - 1];
            }
            let rt = mismatch(inc, p, &trial);
            let nt = inf_norm(&rt);
            if nt < norm {
                theta = trial;
                r = rt;
                norm = nt;
                accepted = true;
                break;
            }
            alpha *= 0.5;
        }
        if !accepted {
            break;
        }
    }

    let converged = norm <= opts.tol && norm.is_finite();
    let max_diff = max_angle_diff(inc, &theta);
    NrResult {
        converged,
        within_angle_limit: max_diff <= std::f64::consts::FRAC_PI_2,
        theta: converged.then_some(theta),
        iterations,
        final_residual: norm,
        max_angle_diff: max_diff,
    }
}

pub fn nr_solve(net: &Network, theta0: &[f64], opts: &NrOptions) -> Result<NrResult> {
    net.validate()?;
    if theta0.len() != net.n() {
        return Err(crate::Error::Dimension {
            expected: net.n(),
            got: theta0.len(),
        });
    }
    Ok(nr_solve_incidence(&build_incidence(net), &net.injections, theta0, opts))
}

/// Flat-start solve.
pub fn nr_flat(net: &Network, opts: &NrOptions) -> Result<NrResult> {
    nr_solve(net, &vec![0.0; net.n()], opts)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Diagnostics {
    pub z_inf_norm: f64,
    pub lambda2: f64,
}

/// Second-smallest eigenvalue of a symmetric Laplacian.
pub fn lambda2(laplacian: &DMatrix<f64>) -> f64 {
    if laplacian.nrows() < 2 {
        return 0.0;
    }
    let mut ev: Vec<f64> = laplacian.clone().symmetric_eigenvalues().iter().copied().collect();
    ev.sort_by(f64::total_cmp);
    ev[1]
}

pub fn diagnostics(net: &Network) -> Result<Diagnostics> {
    net.validate()?;
    let inc = build_incidence(net);
    let u = laplacian_pinv_apply(&inc, &net.injections)?;
    let z = inc.edge_differences(&u);
    Ok(Diagnostics {
        z_inf_norm: inf_norm(&z),
        lambda2: lambda2(&inc.laplacian()),
    })
}
