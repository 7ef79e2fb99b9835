//! Uniform load scaling `P(y) = y P0` and bisection for the certified and
//! Newton-Raphson margins.

use serde::Serialize;

use crate::certify::{CertifyOptions, Certifier};
use crate::error::{Error, Result};
use crate::flowcore::inf_norm;
use crate::netparse::Network;
use crate::refsolvers::{nr_solve_incidence, NrOptions};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepOptions {
    pub y_max: f64,
    /// Relative bisection tolerance.
    pub tol: f64,
    pub certify: CertifyOptions,
    pub nr: NrOptions,
}

impl Default for SweepOptions {
    fn default() -> Self {
        SweepOptions {
            y_max: 20.0,
            tol: 1e-3,
            certify: CertifyOptions::default(),
            nr: NrOptions::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SweepSample {
    pub y: f64,
    pub certified: bool,
    pub nr_converged: bool,
    /// The angles recovered from the certificate pass the residual and angle
    /// checks. Always false when not certified.
    pub theta_validated: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepResult {
    pub y_cert: f64,
    pub y_nr: f64,
    pub eta: f64,
    /// Every probe, sorted by `y`.
    pub trace: Vec<SweepSample>,
    pub tolerance: f64,
    pub y_max: f64,
    pub warnings: Vec<String>,
    /// Probes certified while neither Newton-Raphson nor the recovered angles
    /// confirm a solution.
    pub sufficiency_violations: usize,
}

struct Probe<'a> {
    certifier: Certifier,
    p0: &'a [f64],
    nr: NrOptions,
    trace: Vec<SweepSample>,
}

impl Probe<'_> {
    fn sample(&mut self, y: f64) -> Result<SweepSample> {
        if let Some(s) = self.trace.iter().find(|s| s.y == y) {
            return Ok(*s);
        }
        let p: Vec<f64> = self.p0.iter().map(|v| y * v).collect();
        let cert = self.certifier.certify(&p)?;
        let certified = cert.verdict.is_certified();
        let theta_validated = certified
            && cert.theta.as_ref().is_some_and(|t| {
                t.residual <= 1e-7 && t.max_angle_diff <= std::f64::consts::FRAC_PI_2
            });
        let inc = self.certifier.incidence();
        let nr = nr_solve_incidence(inc, &p, &vec![0.0; inc.n()], &self.nr);
        let s = SweepSample {
            y,
            certified,
            nr_converged: nr.success(),
            theta_validated,
        };
        log::debug!("probe y={y:.6}: certified={certified} nr={}", s.nr_converged);
        self.trace.push(s);
        Ok(s)
    }

    /// Largest passing `y` found by bisection on `[0, y_max]`.
    fn bisect(&mut self, y_max: f64, tol: f64, pred: fn(&SweepSample) -> bool) -> Result<f64> {
        if pred(&self.sample(y_max)?) {
            return Ok(y_max);
        }
        let floor = 1e-9 * y_max;
        let (mut lo, mut hi) = (0.0, y_max);
        while hi - lo > tol * lo && hi > floor {
            let mid = 0.5 * (lo + hi);
            if pred(&self.sample(mid)?) {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Ok(lo)
    }
}

/// Margin consistent with the whole trace: the largest passing `y` below the
/// smallest failing `y`, plus a warning when some larger `y` passes again.
fn reconcile(trace: &[SweepSample], pred: fn(&SweepSample) -> bool, name: &str, warnings: &mut Vec<String>) -> f64 {
    let first_fail = trace
        .iter()
        .filter(|s| !pred(s))
        .map(|s| s.y)
        .fold(f64::INFINITY, f64::min);
    if let Some(s) = trace.iter().find(|s| pred(s) && s.y > first_fail) {
        warnings.push(format!(
            "{name}: non-monotone in y (fails at {first_fail}, passes at {})",
            s.y
        ));
    }
    trace
        .iter()
        .filter(|s| pred(s) && s.y < first_fail)
        .map(|s| s.y)
        .fold(0.0, f64::max)
}

/// Certified and Newton-Raphson load margins of `net` along its own
/// injections.
pub fn stress_sweep(net: &Network, opts: &SweepOptions) -> Result<SweepResult> {
    if inf_norm(&net.injections) == 0.0 {
        return Err(Error::ZeroInjection);
    }
    let mut cert_opts = opts.certify.clone();
    cert_opts.recover_solution = true;
    let mut probe = Probe {
        certifier: Certifier::new(net, cert_opts)?,
        p0: &net.injections,
        nr: opts.nr,
        trace: Vec::new(),
    };
    let cert_pred: fn(&SweepSample) -> bool = |s| s.certified;
    let nr_pred: fn(&SweepSample) -> bool = |s| s.nr_converged;
    probe.bisect(opts.y_max, opts.tol, cert_pred)?;
    probe.bisect(opts.y_max, opts.tol, nr_pred)?;

    let mut trace = probe.trace;
    trace.sort_by(|a, b| a.y.total_cmp(&b.y));
    let mut warnings = Vec::new();
    let y_cert = reconcile(&trace, cert_pred, "certificate", &mut warnings);
    let y_nr = reconcile(&trace, nr_pred, "newton-raphson", &mut warnings);
    for (name, y) in [("certificate", y_cert), ("newton-raphson", y_nr)] {
        if y >= opts.y_max {
            warnings.push(format!("{name}: margin reaches y_max = {}", opts.y_max));
        }
    }
    let sufficiency_violations = trace
        .iter()
        .filter(|s| s.certified && !s.nr_converged && !s.theta_validated)
        .count();
    if sufficiency_violations > 0 {
        warnings.push(format!("{sufficiency_violations} certified probes without a confirmed solution"));
    }
    let eta = if y_nr > 0.0 { y_cert / y_nr } else { 0.0 };
    if y_nr == 0.0 {
        warnings.push("newton-raphson margin is zero; eta undefined".into());
    }
    Ok(SweepResult {
        y_cert,
        y_nr,
        eta,
        trace,
        tolerance: opts.tol,
        y_max: opts.y_max,
        warnings,
        sufficiency_violations,
    })
}
