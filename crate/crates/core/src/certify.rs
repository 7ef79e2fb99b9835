//! Poincaré–Miranda certificate for the cycle residual `g` on a box of cycle
//! flows.
//!
//! `C >= 0` and `H >= 0` make every `g_i` non-decreasing in every coordinate,
//! so on the face `lambda_i = lo_i` the largest value of `g_i` sits at the
//! corner with every other coordinate at its upper bound (and symmetrically
//! for the upper face). Sign conditions at those `2q` corners, together with
//! edge feasibility on the whole box, imply a root of `g` inside the box.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::flowcore::{
    angles_from_flows, eval_g, inf_norm, recover_theta, AngleSolution, FlowParam, GroundedLaplacian,
    RecoveryTolerances, DOMAIN_CLAMP,
};
use crate::netparse::Network;
use crate::refsolvers::lambda2;
use crate::topology::{build_incidence, find_bridges, select_basis, BasisSearch, CycleBasis, Incidence};

/// How the half-widths of the box are chosen around the center.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BoxPolicy {
    /// Each edge's slack split evenly among the cycles through it.
    SlackShare,
    /// Widths `w` solving `(2 diag(J) - J) w = 1` at the center, scaled to the
    /// largest edge-feasible box. Falls back to `SlackShare` when that matrix
    /// is not an M-matrix.
    #[default]
    Dominance,
}

impl BoxPolicy {
    pub fn name(&self) -> &'static str {
        match self {
            BoxPolicy::SlackShare => "slack-share",
            BoxPolicy::Dominance => "dominance",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CertifyOptions {
    pub basis_search: BasisSearch,
    pub box_policy: BoxPolicy,
    /// Descending box scales tried first.
    pub scale_grid: Vec<f64>,
    /// Total face evaluations per certification, grid included.
    pub max_evaluations: usize,
    pub recover_solution: bool,
    pub tolerances: RecoveryTolerances,
}

impl Default for CertifyOptions {
    fn default() -> Self {
        CertifyOptions {
            basis_search: BasisSearch::default(),
            box_policy: BoxPolicy::default(),
            scale_grid: default_scale_grid(),
            max_evaluations: 40,
            recover_solution: false,
            tolerances: RecoveryTolerances::default(),
        }
    }
}

pub fn default_scale_grid() -> Vec<f64> {
    (0..10).map(|k| (10 - k) as f64 / 10.0).collect()
}

/// Axis-aligned box `lo <= lambda <= hi`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LambdaBox {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
    pub center: Vec<f64>,
    /// Half-widths at scale 1.
    pub half_widths: Vec<f64>,
    pub scale: f64,
    pub policy: BoxPolicy,
    /// A cycle edge had no slack at the center.
    pub degenerate: bool,
}

impl LambdaBox {
    pub fn q(&self) -> usize {
        self.lo.len()
    }

    /// Same center and shape at a different scale.
    pub fn scaled(&self, t: f64) -> LambdaBox {
        let (lo, hi) = self
            .center
            .iter()
            .zip(&self.half_widths)
            .map(|(c, w)| (c - t * w, c + t * w))
            .unzip();
        LambdaBox {
            lo,
            hi,
            scale: t,
            ..self.clone()
        }
    }

    /// Worst edge-feasibility margin over the box (`>= 0` means feasible).
    /// With `H >= 0` the extremes of `z_e` sit at `lo` and `hi`.
    pub fn feasibility_margin(&self, fp: &FlowParam) -> f64 {
        (0..fp.m())
            .filter(|&e| fp.on_cycle(e))
            .map(|e| (1.0 - fp.z_edge(e, &self.hi)).min(1.0 + fp.z_edge(e, &self.lo)))
            .fold(f64::INFINITY, f64::min)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FaceValues {
    /// `g_i` at `lambda_i = lo_i`, other coordinates at `hi`.
    pub lower: Vec<f64>,
    /// `g_i` at `lambda_i = hi_i`, other coordinates at `lo`.
    pub upper: Vec<f64>,
}

impl FaceValues {
    /// `min_i min(-lower_i, upper_i)`; non-negative iff the sign conditions hold.
    pub fn margin(&self) -> f64 {
        self.lower
            .iter()
            .zip(&self.upper)
            .map(|(l, u)| (-l).min(*u))
            .fold(f64::INFINITY, f64::min)
    }

    pub fn satisfied(&self) -> bool {
        self.lower.iter().all(|&l| l <= 0.0) && self.upper.iter().all(|&u| u >= 0.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum InconclusiveReason {
    /// A bridge carries `|z0| > 1`.
    BridgeOverload,
    /// A cycle edge is saturated at the center, so no box has interior.
    NoSlack,
    /// No tried box satisfied the face sign conditions.
    FaceCondition,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum Verdict {
    Certified,
    Inconclusive {
        reason: InconclusiveReason,
        /// Offending edge, when the reason names one.
        edge: Option<usize>,
        /// Worst violated margin (negative).
        margin: f64,
    },
}

impl Verdict {
    pub fn is_certified(&self) -> bool {
        matches!(self, Verdict::Certified)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EdgeSlack {
    pub edge: usize,
    /// `1 - z_e` at the center.
    pub upper: f64,
    /// `1 + z_e` at the center.
    pub lower: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CertDiagnostics {
    pub z0_inf_norm: f64,
    pub lambda2: f64,
    pub center_residual: Option<f64>,
    pub edge_slacks: Vec<EdgeSlack>,
    pub face_evaluations: usize,
    /// Smallest finite-difference partial of `g` at the center.
    pub min_partial: Option<f64>,
    pub root_residual: Option<f64>,
    pub recovery_error: Option<String>,
}

/// Everything needed to re-verify the certificate independently.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BasisReport {
    pub search: BasisSearch,
    pub q: usize,
    pub roots: Vec<usize>,
    pub bridges: Vec<usize>,
    pub reoriented_edges: Vec<usize>,
    /// Per cycle, its edges in traversal order.
    pub cycles: Vec<Vec<usize>>,
    pub overlap: usize,
    pub dominance_index: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Certificate {
    pub verdict: Verdict,
    #[serde(rename = "box")]
    pub lambda_box: Option<LambdaBox>,
    pub lower_face_values: Vec<f64>,
    pub upper_face_values: Vec<f64>,
    pub lambda_star: Option<Vec<f64>>,
    pub theta: Option<AngleSolution>,
    pub diagnostics: CertDiagnostics,
    pub basis: BasisReport,
}

// The extended arcsin is linear beyond +-(1 - EXT_EPS); its potential stays
// convex and coercive, so Newton with backtracking has a unique target.
const EXT_EPS: f64 = 1e-9;

fn asin_ext(z: f64) -> f64 {
    let zc = 1.0 - EXT_EPS;
    if z.abs() <= zc {
        z.asin()
    } else {
        let slope = 1.0 / (1.0 - zc * zc).sqrt();
        z.signum() * (zc.asin() + slope * (z.abs() - zc))
    }
}

fn asin_ext_prime(z: f64) -> f64 {
    let zc = z.abs().min(1.0 - EXT_EPS);
    1.0 / (1.0 - zc * zc).sqrt()
}

/// Antiderivative of `asin_ext`.
fn asin_ext_potential(z: f64) -> f64 {
    let zc = 1.0 - EXT_EPS;
    let a = z.abs();
    let inner = a.min(zc);
    let base = inner * inner.asin() + (1.0 - inner * inner).sqrt();
    let extra = a - inner;
    base + zc.asin() * extra + 0.5 * extra * extra / (1.0 - zc * zc).sqrt()
}

struct Extended<'a> {
    fp: &'a FlowParam,
}

impl Extended<'_> {
    fn potential(&self, lambda: &[f64]) -> f64 {
        (0..self.fp.m())
            .filter(|&e| self.fp.on_cycle(e))
            .map(|e| self.fp.weights[e] * asin_ext_potential(self.fp.z_edge(e, lambda)))
            .sum()
    }

    fn gradient(&self, lambda: &[f64]) -> Vec<f64> {
        (0..self.fp.q())
            .map(|k| {
                self.fp
                    .cycle_edges(k)
                    .iter()
                    .map(|&e| asin_ext(self.fp.z_edge(e, lambda)))
                    .sum()
            })
            .collect()
    }

    fn hessian(&self, lambda: &[f64]) -> DMatrix<f64> {
        let q = self.fp.q();
        let mut j = DMatrix::zeros(q, q);
        for e in 0..self.fp.m() {
            let row = self.fp.h_row(e);
            if row.is_empty() {
                continue;
            }
            let d = asin_ext_prime(self.fp.z_edge(e, lambda)) / self.fp.weights[e];
            for &(a, _) in row {
                for &(b, _) in row {
                    j[(a, b)] += d;
                }
            }
        }
        j
    }
}

/// Approximate root of `g`, from `lambda = 0`.
///
/// Runs damped Newton on the convex potential whose gradient is `g` with
/// `arcsin` continued linearly past `+-(1 - 1e-9)`. The minimiser is the root
/// of `g` whenever that root has slack on every edge; otherwise it is the
/// closest thing to one and the box step reports the saturated edge.
pub fn find_center(fp: &FlowParam) -> Vec<f64> {
    let q = fp.q();
    let mut lambda = vec![0.0; q];
    if q == 0 {
        return lambda;
    }
    let ext = Extended { fp };
    let mut phi = ext.potential(&lambda);
    for _ in 0..100 {
        let grad = ext.gradient(&lambda);
        if inf_norm(&grad) <= 1e-13 {
            break;
        }
        let Some(chol) = ext.hessian(&lambda).cholesky() else {
            break;
        };
        let step = chol.solve(&nalgebra::DVector::from_column_slice(&grad));
        let slope: f64 = -grad.iter().zip(step.iter()).map(|(g, s)| g * s).sum::<f64>();
        let mut alpha = 1.0;
        let mut accepted = false;
        for _ in 0..60 {
            let trial: Vec<f64> = lambda.iter().zip(step.iter()).map(|(l, s)| l - alpha * s).collect();
            let phi_trial = ext.potential(&trial);
            if phi_trial <= phi + 1e-4 * alpha * slope {
                lambda = trial;
                phi = phi_trial;
                accepted = true;
                break;
            }
            alpha *= 0.5;
        }
        if !accepted {
            break;
        }
    }
    lambda
}

/// Result of box construction: either a box or the saturated edge.
#[derive(Debug, Clone, PartialEq)]
pub struct BoxOutcome {
    pub lambda_box: LambdaBox,
    /// Saturated cycle edge when `lambda_box.degenerate`.
    pub saturated_edge: Option<(usize, f64)>,
}

/// Box around `center` at scale 1 under `policy`; see [`LambdaBox::scaled`].
pub fn build_box(fp: &FlowParam, center: &[f64], policy: BoxPolicy) -> BoxOutcome {
    let q = fp.q();
    let degenerate = |edge: Option<(usize, f64)>| BoxOutcome {
        lambda_box: LambdaBox {
            lo: center.to_vec(),
            hi: center.to_vec(),
            center: center.to_vec(),
            half_widths: vec![0.0; q],
            scale: 1.0,
            policy,
            degenerate: true,
        },
        saturated_edge: edge,
    };

    let z = fp.z(center);
    let mut slack = vec![f64::INFINITY; fp.m()];
    let mut worst: Option<(usize, f64)> = None;
    for e in (0..fp.m()).filter(|&e| fp.on_cycle(e)) {
        let s = (1.0 - z[e]).min(1.0 + z[e]);
        if s <= 0.0 && worst.is_none_or(|(_, w)| s < w) {
            worst = Some((e, s));
        }
        slack[e] = s;
    }
    if worst.is_some() {
        return degenerate(worst);
    }

    let widths = match policy {
        BoxPolicy::SlackShare => slack_share_widths(fp, &slack),
        BoxPolicy::Dominance => dominance_widths(fp, center, &slack).unwrap_or_else(|| {
            log::debug!("dominance widths unavailable, using slack share");
            slack_share_widths(fp, &slack)
        }),
    };
    let shape = LambdaBox {
        lo: center.to_vec(),
        hi: center.to_vec(),
        center: center.to_vec(),
        half_widths: widths,
        scale: 1.0,
        policy,
        degenerate: false,
    };
    BoxOutcome {
        lambda_box: shape.scaled(1.0),
        saturated_edge: None,
    }
}

/// `w_k = min_{e in k} slack_e / (H_ek c_e)`, `c_e` = cycles through `e`.
fn slack_share_widths(fp: &FlowParam, slack: &[f64]) -> Vec<f64> {
    let mut w = vec![f64::INFINITY; fp.q()];
    for (e, &s) in slack.iter().enumerate() {
        let row = fp.h_row(e);
        let count = row.len() as f64;
        for &(k, h) in row {
            w[k] = w[k].min(s / (h * count));
        }
    }
    w
}

fn dominance_widths(fp: &FlowParam, center: &[f64], slack: &[f64]) -> Option<Vec<f64>> {
    let q = fp.q();
    let j = fp.jacobian(center).ok()?;
    let m = DMatrix::from_fn(q, q, |a, b| if a == b { j[(a, a)] } else { -j[(a, b)] });
    let w = m.lu().solve(&nalgebra::DVector::from_element(q, 1.0))?;
    if w.iter().any(|&v| !(v > 0.0 && v.is_finite())) {
        return None;
    }
    let mut t = f64::INFINITY;
    for (e, &s) in slack.iter().enumerate() {
        let hw: f64 = fp.h_row(e).iter().map(|&(k, h)| h * w[k]).sum();
        if hw > 0.0 {
            t = t.min(s / hw);
        }
    }
    if !t.is_finite() {
        return None;
    }
    Some(w.iter().map(|v| v * t).collect())
}

/// The `2q` corner values of the face sign conditions.
pub fn check_faces(fp: &FlowParam, lambda_box: &LambdaBox) -> Result<FaceValues> {
    let q = fp.q();
    let mut lower = Vec::with_capacity(q);
    let mut upper = Vec::with_capacity(q);
    let mut corner = lambda_box.hi.clone();
    for i in 0..q {
        corner[i] = lambda_box.lo[i];
        lower.push(fp.g_component(i, &corner)?);
        corner[i] = lambda_box.hi[i];
    }
    let mut corner = lambda_box.lo.clone();
    for i in 0..q {
        corner[i] = lambda_box.hi[i];
        upper.push(fp.g_component(i, &corner)?);
        corner[i] = lambda_box.lo[i];
    }
    Ok(FaceValues { lower, upper })
}

/// Forward-difference partials of `g` at `at`; returns the smallest.
fn min_partial(fp: &FlowParam, at: &[f64], widths: &[f64]) -> Option<f64> {
    let base = eval_g(fp, at).ok()?;
    let mut min = f64::INFINITY;
    for k in 0..fp.q() {
        let h = 1e-7 * widths[k].max(1e-6);
        let mut probe = at.to_vec();
        probe[k] += h;
        let shifted = eval_g(fp, &probe).ok()?;
        for (a, b) in shifted.iter().zip(&base) {
            min = min.min((a - b) / h);
        }
    }
    Some(min)
}

/// Root of `g` inside a certified box: Newton from the center, then
/// per-coordinate bisection sweeps if Newton leaves the box or stalls.
pub fn locate_root(fp: &FlowParam, lambda_box: &LambdaBox, tol: f64) -> Option<Vec<f64>> {
    let inside = |l: &[f64]| {
        l.iter()
            .zip(&lambda_box.lo)
            .zip(&lambda_box.hi)
            .all(|((v, lo), hi)| *v >= *lo && *v <= *hi)
    };
    let residual = |l: &[f64]| eval_g(fp, l).ok().map(|g| inf_norm(&g));

    let mut lambda = lambda_box.center.clone();
    if let Some(root) = newton_polish(fp, &lambda, tol) {
        if inside(&root) {
            return Some(root);
        }
    }
    for _ in 0..500 {
        for i in 0..fp.q() {
            let (mut a, mut b) = (lambda_box.lo[i], lambda_box.hi[i]);
            for _ in 0..200 {
                let mid = 0.5 * (a + b);
                if mid == a || mid == b {
                    break;
                }
                lambda[i] = mid;
                match fp.g_component(i, &lambda) {
                    Ok(v) if v > 0.0 => b = mid,
                    Ok(_) => a = mid,
                    Err(_) => return None,
                }
            }
            lambda[i] = 0.5 * (a + b);
        }
        if residual(&lambda).is_some_and(|r| r <= tol) {
            break;
        }
    }
    let polished = newton_polish(fp, &lambda, tol).filter(|r| inside(r));
    polished.or_else(|| residual(&lambda).filter(|&r| r <= tol).map(|_| lambda))
}

fn newton_polish(fp: &FlowParam, start: &[f64], tol: f64) -> Option<Vec<f64>> {
    let mut lambda = start.to_vec();
    for _ in 0..50 {
        let g = eval_g(fp, &lambda).ok()?;
        let r = inf_norm(&g);
        if r <= tol * 1e-3 {
            return Some(lambda);
        }
        let j = fp.jacobian(&lambda).ok()?;
        let step = j.lu().solve(&nalgebra::DVector::from_column_slice(&g))?;
        let mut alpha = 1.0;
        let mut improved = false;
        for _ in 0..30 {
            let trial: Vec<f64> = lambda.iter().zip(step.iter()).map(|(l, s)| l - alpha * s).collect();
            if let Ok(gt) = eval_g(fp, &trial) {
                if inf_norm(&gt) < r {
                    lambda = trial;
                    improved = true;
                    break;
                }
            }
            alpha *= 0.5;
        }
        if !improved {
            break;
        }
    }
    let r = inf_norm(&eval_g(fp, &lambda).ok()?);
    (r <= tol).then_some(lambda)
}

/// Topology and factorisation shared by every certification on one network.
#[derive(Debug, Clone)]
pub struct Certifier {
    inc: Incidence,
    basis: CycleBasis,
    ground: GroundedLaplacian,
    lambda2: f64,
    opts: CertifyOptions,
}

impl Certifier {
    pub fn new(net: &Network, opts: CertifyOptions) -> Result<Self> {
        net.validate()?;
        let inc = build_incidence(net);
        let decomp = find_bridges(&inc);
        let basis = select_basis(&decomp, &inc, &opts.basis_search);
        let ground = GroundedLaplacian::new(&inc)?;
        Ok(Certifier {
            lambda2: lambda2(&inc.laplacian()),
            inc,
            basis,
            ground,
            opts,
        })
    }

    pub fn incidence(&self) -> &Incidence {
        &self.inc
    }

    pub fn basis(&self) -> &CycleBasis {
        &self.basis
    }

    pub fn options(&self) -> &CertifyOptions {
        &self.opts
    }

    pub fn flow_param(&self, p: &[f64]) -> Result<FlowParam> {
        FlowParam::new(&self.ground, &self.inc, &self.basis, p)
    }

    pub fn basis_report(&self) -> BasisReport {
        BasisReport {
            search: self.opts.basis_search,
            q: self.basis.q(),
            roots: self.basis.roots().to_vec(),
            bridges: self.basis.bridges().to_vec(),
            reoriented_edges: self.basis.reoriented_edges(),
            cycles: self.basis.cycles().iter().map(|c| c.edges.clone()).collect(),
            overlap: self.basis.overlap(),
            dominance_index: self.basis.dominance_index(self.inc.weights()),
        }
    }

    /// Runs the full verification for injections `p`.
    pub fn certify(&self, p: &[f64]) -> Result<Certificate> {
        let fp = self.flow_param(p)?;
        let q = fp.q();
        let mut cert = Certificate {
            verdict: Verdict::Certified,
            lambda_box: None,
            lower_face_values: Vec::new(),
            upper_face_values: Vec::new(),
            lambda_star: None,
            theta: None,
            diagnostics: CertDiagnostics {
                z0_inf_norm: inf_norm(&fp.z0),
                lambda2: self.lambda2,
                center_residual: None,
                edge_slacks: Vec::new(),
                face_evaluations: 0,
                min_partial: None,
                root_residual: None,
                recovery_error: None,
            },
            basis: self.basis_report(),
        };

        if let Some(&(edge, z)) = fp
            .bridge_flows
            .iter()
            .filter(|(_, z)| z.abs() > 1.0)
            .max_by(|a, b| a.1.abs().total_cmp(&b.1.abs()))
        {
            cert.verdict = Verdict::Inconclusive {
                reason: InconclusiveReason::BridgeOverload,
                edge: Some(edge),
                margin: 1.0 - z.abs(),
            };
            return Ok(cert);
        }

        if q == 0 {
            if self.opts.recover_solution {
                self.attach_solution(&mut cert, &fp, Vec::new(), p);
            }
            return Ok(cert);
        }

        let center = find_center(&fp);
        let zc = fp.z(&center);
        cert.diagnostics.center_residual = eval_g(&fp, &center).ok().map(|g| inf_norm(&g));
        cert.diagnostics.edge_slacks = (0..fp.m())
            .filter(|&e| fp.on_cycle(e))
            .map(|e| EdgeSlack {
                edge: e,
                upper: 1.0 - zc[e],
                lower: 1.0 + zc[e],
            })
            .collect();

        let outcome = build_box(&fp, &center, self.opts.box_policy);
        if let Some((edge, s)) = outcome.saturated_edge {
            cert.lambda_box = Some(outcome.lambda_box);
            cert.verdict = Verdict::Inconclusive {
                reason: InconclusiveReason::NoSlack,
                edge: Some(edge),
                margin: s,
            };
            return Ok(cert);
        }
        let shape = outcome.lambda_box;
        cert.diagnostics.min_partial = min_partial(&fp, &center, &shape.half_widths);

        let mut best: Option<(LambdaBox, FaceValues)> = None;
        let mut accepted = None;
        let mut evaluations = 0;
        for t in scale_schedule(&self.opts.scale_grid, self.opts.max_evaluations) {
            let candidate = shape.scaled(t);
            if candidate.feasibility_margin(&fp) < -DOMAIN_CLAMP {
                continue;
            }
            evaluations += 1;
            let faces = match check_faces(&fp, &candidate) {
                Ok(f) => f,
                Err(e) => return Err(Error::Consistency(format!("box invariant breached: {e}"))),
            };
            if faces.satisfied() {
                accepted = Some((candidate, faces));
                break;
            }
            if best.as_ref().is_none_or(|(_, b)| faces.margin() > b.margin()) {
                best = Some((candidate, faces));
            }
        }
        cert.diagnostics.face_evaluations = evaluations;

        match accepted {
            Some((lambda_box, faces)) => {
                cert.lower_face_values = faces.lower;
                cert.upper_face_values = faces.upper;
                if self.opts.recover_solution {
                    match locate_root(&fp, &lambda_box, self.opts.tolerances.root) {
                        Some(root) => self.attach_solution(&mut cert, &fp, root, p),
                        None => {
                            cert.diagnostics.recovery_error =
                                Some("no root located inside the certified box".into())
                        }
                    }
                }
                cert.lambda_box = Some(lambda_box);
            }
            None => {
                let margin = best.as_ref().map_or(f64::NEG_INFINITY, |(_, f)| f.margin());
                if let Some((lambda_box, faces)) = best {
                    cert.lower_face_values = faces.lower;
                    cert.upper_face_values = faces.upper;
                    cert.lambda_box = Some(lambda_box);
                }
                cert.verdict = Verdict::Inconclusive {
                    reason: InconclusiveReason::FaceCondition,
                    edge: None,
                    margin,
                };
            }
        }
        Ok(cert)
    }

    fn attach_solution(&self, cert: &mut Certificate, fp: &FlowParam, root: Vec<f64>, p: &[f64]) {
        let tol = &self.opts.tolerances;
        let solution = if root.is_empty() {
            // no cycles: the particular flow is the only line flow
            let signs = self.basis.orientation_signs();
            let flows: Vec<f64> = fp.f_hat.iter().zip(&signs).map(|(f, s)| f * s).collect();
            angles_from_flows(&self.inc, &self.basis, &flows, p, tol)
        } else {
            recover_theta(fp, &self.basis, &self.inc, &root, tol)
        };
        cert.diagnostics.root_residual = eval_g(fp, &root).ok().map(|g| inf_norm(&g));
        match solution {
            Ok(sol) => cert.theta = Some(sol),
            Err(e) => cert.diagnostics.recovery_error = Some(e.to_string()),
        }
        cert.lambda_star = Some(root);
    }
}

/// Grid values first, then repeated halving below the smallest grid value,
/// capped at `budget` scales in total.
fn scale_schedule(grid: &[f64], budget: usize) -> Vec<f64> {
    let mut out: Vec<f64> = grid.iter().copied().filter(|t| *t > 0.0 && *t <= 1.0).collect();
    let mut t = out.iter().copied().fold(1.0, f64::min);
    while out.len() < budget {
        t *= 0.5;
        out.push(t);
    }
    out.truncate(budget);
    out
}

/// Full pipeline on a network's own injections.
pub fn certify(net: &Network, opts: &CertifyOptions) -> Result<Certificate> {
    Certifier::new(net, opts.clone())?.certify(&net.injections)
}
