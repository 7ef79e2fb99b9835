//! Command-line front end: `certify`, `sweep`, `topo` and `nr`.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};

use crate::certify::{default_scale_grid, BoxPolicy, Certifier, CertifyOptions, Verdict};
use crate::netparse::{load_network, BalancePolicy, LosslessOptions, LosslessReport, Network, VoltagePolicy};
use crate::refsolvers::{diagnostics, nr_flat, NrOptions};
use crate::sweep::{stress_sweep, SweepOptions, SweepResult};
use crate::topology::{build_incidence, find_bridges, select_basis, to_dot, BasisSearch};
use crate::Error;

pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT: i32 = 1;
pub const EXIT_INCONCLUSIVE: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "cyclecert", version, about = "Cycle-space solvability certificates for lossless power flow")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub flags: Flags,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Certify solvability at the case's own injections.
    Certify { input: PathBuf },
    /// Certified and Newton-Raphson load margins; several cases run in parallel.
    Sweep {
        #[arg(required = true)]
        inputs: Vec<PathBuf>,
    },
    /// Bridges, bridgeless components, cycle basis and a DOT dump.
    Topo { input: PathBuf },
    /// Newton-Raphson from a flat start.
    Nr { input: PathBuf },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
    Text,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SearchMode {
    None,
    Roots,
    Orders,
    Auto,
}

#[derive(Debug, Clone, Args)]
pub struct Flags {
    #[arg(long, global = true, value_enum, default_value = "flat")]
    pub voltage: VoltageArg,
    /// Absorb the injection mismatch at this bus instead of spreading it.
    #[arg(long, global = true)]
    pub slack_bus: Option<usize>,
    #[arg(long, global = true, value_enum, default_value = "auto")]
    pub basis_search: SearchMode,
    /// Random DFS orders tried by `orders` and `auto`.
    #[arg(long, global = true, default_value_t = 2000)]
    pub trials: usize,
    #[arg(long, global = true, value_enum, default_value = "dominance")]
    pub box_policy: BoxArg,
    /// Comma-separated descending box scales in (0, 1].
    #[arg(long, global = true, value_delimiter = ',')]
    pub box_scale_grid: Option<Vec<f64>>,
    /// Relative bisection tolerance for sweeps.
    #[arg(long, global = true, default_value_t = 1e-3)]
    pub tol: f64,
    #[arg(long, global = true, default_value_t = 20.0)]
    pub ymax: f64,
    #[arg(long, global = true, value_enum, default_value = "json")]
    pub format: Format,
    #[arg(long, global = true)]
    pub recover_solution: bool,
    /// Leave out timestamps and timings so reports are byte-reproducible.
    #[arg(long, global = true)]
    pub no_meta: bool,
    /// Seed for randomised basis search.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum VoltageArg {
    Flat,
    Case,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum BoxArg {
    SlackShare,
    Dominance,
}

/// Fully resolved settings, echoed into every report.
#[derive(Debug, Clone, Serialize)]
pub struct RunConfig {
    pub command: &'static str,
    pub inputs: Vec<PathBuf>,
    pub lossless: LosslessOptions,
    pub basis_search: BasisSearch,
    pub box_policy: BoxPolicy,
    pub box_scale_grid: Vec<f64>,
    pub tol: f64,
    pub ymax: f64,
    pub format: Format,
    pub recover_solution: bool,
    pub seed: u64,
    pub nr: NrOptions,
    #[serde(skip)]
    pub no_meta: bool,
}

impl RunConfig {
    pub fn from_cli(cli: &Cli) -> Result<Self, String> {
        let f = &cli.flags;
        let (command, inputs) = match &cli.command {
            Command::Certify { input } => ("certify", vec![input.clone()]),
            Command::Sweep { inputs } => ("sweep", inputs.clone()),
            Command::Topo { input } => ("topo", vec![input.clone()]),
            Command::Nr { input } => ("nr", vec![input.clone()]),
        };
        let grid = f.box_scale_grid.clone().unwrap_or_else(default_scale_grid);
        if grid.is_empty() || grid.iter().any(|t| !(*t > 0.0 && *t <= 1.0)) {
            return Err("--box-scale-grid values must lie in (0, 1]".into());
        }
        if !(f.tol > 0.0 && f.tol < 1.0) {
            return Err("--tol must lie in (0, 1)".into());
        }
        if !(f.ymax > 0.0 && f.ymax.is_finite()) {
            return Err("--ymax must be positive".into());
        }
        let basis_search = match f.basis_search {
            SearchMode::None => BasisSearch::None,
            SearchMode::Roots => BasisSearch::Roots,
            SearchMode::Orders => BasisSearch::Orders {
                trials: f.trials,
                seed: f.seed,
            },
            SearchMode::Auto => BasisSearch::Auto {
                trials: f.trials,
                seed: f.seed,
            },
        };
        Ok(RunConfig {
            command,
            inputs,
            lossless: LosslessOptions {
                voltage: match f.voltage {
                    VoltageArg::Flat => VoltagePolicy::Flat,
                    VoltageArg::Case => VoltagePolicy::Case,
                },
                balance: f.slack_bus.map_or(BalancePolicy::Uniform, BalancePolicy::SlackBus),
            },
            basis_search,
            box_policy: match f.box_policy {
                BoxArg::SlackShare => BoxPolicy::SlackShare,
                BoxArg::Dominance => BoxPolicy::Dominance,
            },
            box_scale_grid: grid,
            tol: f.tol,
            ymax: f.ymax,
            format: f.format,
            recover_solution: f.recover_solution,
            seed: f.seed,
            nr: NrOptions::default(),
            no_meta: f.no_meta,
        })
    }

    pub fn certify_options(&self) -> CertifyOptions {
        CertifyOptions {
            basis_search: self.basis_search,
            box_policy: self.box_policy,
            scale_grid: self.box_scale_grid.clone(),
            recover_solution: self.recover_solution,
            ..CertifyOptions::default()
        }
    }

    pub fn sweep_options(&self) -> SweepOptions {
        SweepOptions {
            y_max: self.ymax,
            tol: self.tol,
            certify: self.certify_options(),
            nr: self.nr,
        }
    }
}

/// Rendered report plus the exit status it implies.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub stdout: String,
    pub code: i32,
}

/// Parses arguments and runs; never exits the process.
pub fn run_args<I, T>(args: I) -> Outcome
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    match Cli::try_parse_from(args) {
        Ok(cli) => run(&cli),
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INPUT } else { EXIT_OK };
            let rendered = e.render().to_string();
            if code == EXIT_OK {
                Outcome {
                    stdout: rendered,
                    code,
                }
            } else {
                eprint!("{rendered}");
                Outcome {
                    stdout: String::new(),
                    code,
                }
            }
        }
    }
}

pub fn run(cli: &Cli) -> Outcome {
    let config = match RunConfig::from_cli(cli) {
        Ok(c) => c,
        Err(msg) => return input_error(&msg),
    };
    let started = Instant::now();
    let result = match config.command {
        "certify" => run_certify(&config),
        "sweep" => run_sweep(&config),
        "topo" => run_topo(&config),
        _ => run_nr(&config),
    };
    match result {
        Ok((mut body, code)) => {
            if config.format == Format::Json {
                let mut report = json!({ "config": config });
                if !config.no_meta {
                    report["meta"] = meta(started);
                }
                if let (Value::Object(dst), Value::Object(src)) = (&mut report, body.json.take()) {
                    dst.extend(src);
                }
                body.text = serde_json::to_string_pretty(&report).expect("report serializes") + "\n";
            }
            Outcome {
                stdout: body.text,
                code,
            }
        }
        Err(e) => input_error(&e.to_string()),
    }
}

fn input_error(msg: &str) -> Outcome {
    eprintln!("error: {msg}");
    Outcome {
        stdout: String::new(),
        code: EXIT_INPUT,
    }
}

fn meta(started: Instant) -> Value {
    let ts = SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0);
    json!({
        "version": env!("CARGO_PKG_VERSION"),
        "timestamp": ts,
        "wall_time_s": started.elapsed().as_secs_f64(),
    })
}

struct Body {
    json: Value,
    text: String,
}

type Step = crate::Result<(Body, i32)>;

fn case_name(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| path.display().to_string())
}

fn load(config: &RunConfig, path: &Path) -> crate::Result<(Network, LosslessReport)> {
    let (net, report) = load_network(path, &config.lossless)?;
    for m in &report.merged {
        log::info!("merged {} parallel branches {}-{}", m.count, m.from, m.to);
    }
    Ok((net, report))
}

fn network_summary(net: &Network, report: &LosslessReport) -> Value {
    json!({
        "n": net.n(),
        "m": net.m(),
        "bus_ids": net.bus_ids,
        "branches": net.branches.iter().map(|b| [net.bus_ids[b.from], net.bus_ids[b.to]]).collect::<Vec<_>>(),
        "lossless": report,
    })
}

fn csv_text(header: &[&str], rows: &[Vec<String>]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).expect("in-memory csv");
    for r in rows {
        w.write_record(r).expect("in-memory csv");
    }
    String::from_utf8(w.into_inner().expect("in-memory csv")).expect("csv is utf-8")
}

fn run_certify(config: &RunConfig) -> Step {
    let path = &config.inputs[0];
    let (net, report) = load(config, path)?;
    let certifier = Certifier::new(&net, config.certify_options())?;
    let cert = certifier.certify(&net.injections)?;
    let code = if cert.verdict.is_certified() { EXIT_OK } else { EXIT_INCONCLUSIVE };
    let (status, reason, margin) = match &cert.verdict {
        Verdict::Certified => ("certified", String::new(), String::new()),
        Verdict::Inconclusive { reason, margin, .. } => (
            "inconclusive",
            serde_json::to_value(reason).ok().and_then(|v| v.as_str().map(str::to_owned)).unwrap_or_default(),
            format!("{margin:e}"),
        ),
    };
    let scale = cert.lambda_box.as_ref().map(|b| b.scale);
    let text = match config.format {
        Format::Csv => csv_text(
            &["case", "verdict", "reason", "margin", "q", "boxScale", "z0InfNorm", "lambda2"],
            &[vec![
                case_name(path),
                status.into(),
                reason,
                margin,
                cert.basis.q.to_string(),
                scale.map(|s| s.to_string()).unwrap_or_default(),
                cert.diagnostics.z0_inf_norm.to_string(),
                cert.diagnostics.lambda2.to_string(),
            ]],
        ),
        _ => {
            let mut t = String::new();
            let _ = writeln!(t, "case: {}", case_name(path));
            let _ = writeln!(t, "verdict: {status}");
            if !reason.is_empty() {
                let _ = writeln!(t, "reason: {reason} (margin {margin})");
            }
            let _ = writeln!(t, "cycles: {}", cert.basis.q);
            if let Some(s) = scale {
                let _ = writeln!(t, "box scale: {s}");
            }
            let _ = writeln!(t, "|z0|_inf: {:.6}", cert.diagnostics.z0_inf_norm);
            let _ = writeln!(t, "lambda2: {:.6}", cert.diagnostics.lambda2);
            if let Some(th) = &cert.theta {
                let _ = writeln!(t, "max angle difference: {:.6} rad", th.max_angle_diff);
            }
            t
        }
    };
    let json = json!({
        "case": case_name(path),
        "network": network_summary(&net, &report),
        "certificate": cert,
    });
    Ok((Body { json, text }, code))
}

struct SweepRow {
    name: String,
    result: SweepResult,
    seconds: f64,
}

fn run_sweep(config: &RunConfig) -> Step {
    let opts = config.sweep_options();
    let rows: Vec<crate::Result<SweepRow>> = std::thread::scope(|s| {
        let handles: Vec<_> = config
            .inputs
            .iter()
            .map(|path| {
                let opts = &opts;
                s.spawn(move || {
                    let started = Instant::now();
                    let (net, _) = load(config, path)?;
                    let result = stress_sweep(&net, opts)?;
                    Ok(SweepRow {
                        name: case_name(path),
                        result,
                        seconds: started.elapsed().as_secs_f64(),
                    })
                })
            })
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().unwrap_or_else(|_| Err(Error::InvalidNetwork("sweep worker panicked".into()))))
            .collect()
    });
    let rows = rows.into_iter().collect::<crate::Result<Vec<_>>>()?;
    let basis = config.basis_search.name();
    let boxp = config.box_policy.name();
    let text = match config.format {
        Format::Csv => csv_text(
            &["case", "yCert", "yNR", "eta", "basisPolicy", "boxPolicy", "wallTime"],
            &rows
                .iter()
                .map(|r| {
                    vec![
                        r.name.clone(),
                        r.result.y_cert.to_string(),
                        r.result.y_nr.to_string(),
                        r.result.eta.to_string(),
                        basis.into(),
                        boxp.into(),
                        if config.no_meta { String::new() } else { format!("{:.3}", r.seconds) },
                    ]
                })
                .collect::<Vec<_>>(),
        ),
        _ => {
            let mut t = String::new();
            let _ = writeln!(t, "{:<12} {:>16} {:>10} {:>10}", "Case", "Certified ratio", "y_cert", "y_NR");
            for r in &rows {
                let _ = writeln!(
                    t,
                    "{:<12} {:>15.2}% {:>10.4} {:>10.4}",
                    r.name,
                    100.0 * r.result.eta,
                    r.result.y_cert,
                    r.result.y_nr
                );
                for w in &r.result.warnings {
                    let _ = writeln!(t, "  warning: {w}");
                }
            }
            t
        }
    };
    let code = if rows.iter().all(|r| r.result.sufficiency_violations == 0) {
        EXIT_OK
    } else {
        EXIT_INCONCLUSIVE
    };
    let json = json!({
        "cases": rows.iter().map(|r| json!({
            "case": r.name,
            "basis_policy": basis,
            "box_policy": boxp,
            "result": r.result,
        })).collect::<Vec<_>>(),
    });
    Ok((Body { json, text }, code))
}

fn run_topo(config: &RunConfig) -> Step {
    let path = &config.inputs[0];
    let (net, report) = load(config, path)?;
    let inc = build_incidence(&net);
    let decomp = find_bridges(&inc);
    let basis = select_basis(&decomp, &inc, &config.basis_search);
    let ids = &net.bus_ids;
    let pair = |e: usize| [ids[net.branches[e].from], ids[net.branches[e].to]];
    let dot = to_dot(&inc, &basis, ids);
    let components: Vec<Value> = decomp
        .components
        .iter()
        .map(|c| {
            json!({
                "buses": c.nodes.iter().map(|&k| ids[k]).collect::<Vec<_>>(),
                "branches": c.edges.iter().map(|&e| pair(e)).collect::<Vec<_>>(),
            })
        })
        .collect();
    let bridges: Vec<[usize; 2]> = decomp.bridges.iter().map(|&e| pair(e)).collect();
    let text = match config.format {
        Format::Csv => csv_text(
            &["edge", "from", "to", "role", "reoriented"],
            &(0..net.m())
                .map(|e| {
                    let role = if decomp.is_bridge(e) {
                        "bridge"
                    } else if basis.back_edges().contains(&e) {
                        "back"
                    } else {
                        "tree"
                    };
                    let [a, b] = pair(e);
                    vec![
                        (e + 1).to_string(),
                        a.to_string(),
                        b.to_string(),
                        role.into(),
                        basis.flipped()[e].to_string(),
                    ]
                })
                .collect::<Vec<_>>(),
        ),
        _ => {
            let mut t = String::new();
            let _ = writeln!(t, "buses: {}  branches: {}", net.n(), net.m());
            let _ = writeln!(t, "bridges: {}", bridges.len());
            for [a, b] in &bridges {
                let _ = writeln!(t, "  ({a},{b})");
            }
            let _ = writeln!(t, "components: {}", decomp.components.len());
            let _ = writeln!(t, "q: {}", basis.q());
            t.push_str(&dot);
            t
        }
    };
    let json = json!({
        "case": case_name(path),
        "network": network_summary(&net, &report),
        "bridges": bridges,
        "components": components,
        "q": basis.q(),
        "roots": basis.roots().iter().map(|&k| ids[k]).collect::<Vec<_>>(),
        "reoriented_edges": basis.reoriented_edges(),
        "cycles": basis.cycles().iter().map(|c| &c.edges).collect::<Vec<_>>(),
        "basis_matrix": basis.matrix(),
        "dominance_index": basis.dominance_index(inc.weights()),
        "dot": dot,
    });
    Ok((Body { json, text }, EXIT_OK))
}

fn run_nr(config: &RunConfig) -> Step {
    let path = &config.inputs[0];
    let (net, report) = load(config, path)?;
    let result = nr_flat(&net, &config.nr)?;
    let diag = diagnostics(&net)?;
    let code = if result.success() { EXIT_OK } else { EXIT_INCONCLUSIVE };
    let text = match config.format {
        Format::Csv => csv_text(
            &["case", "converged", "withinAngleLimit", "iterations", "finalResidual", "maxAngleDiff"],
            &[vec![
                case_name(path),
                result.converged.to_string(),
                result.within_angle_limit.to_string(),
                result.iterations.to_string(),
                result.final_residual.to_string(),
                result.max_angle_diff.to_string(),
            ]],
        ),
        _ => format!(
            "case: {}\nconverged: {}\niterations: {}\nresidual: {:e}\nmax angle difference: {:.6} rad\n",
            case_name(path),
            result.success(),
            result.iterations,
            result.final_residual,
            result.max_angle_diff
        ),
    };
    let json = json!({
        "case": case_name(path),
        "network": network_summary(&net, &report),
        "nr": result,
        "diagnostics": diag,
    });
    Ok((Body { json, text }, code))
}
