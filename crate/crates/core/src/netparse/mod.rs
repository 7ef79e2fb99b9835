//! Case ingestion and the lossless network model.

mod json;
mod matpower;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, ParseError, Result};

pub use json::NetworkFile;

/// Bus row as read from a case file. Units as in the file (MW, p.u.).
#[derive(Debug, Clone, PartialEq)]
pub struct BusRecord {
    pub id: usize,
    pub bus_type: u8,
    pub pd: f64,
    pub vm: f64,
}

/// In-service generator.
#[derive(Debug, Clone, PartialEq)]
pub struct GenRecord {
    pub bus: usize,
    pub pg: f64,
}

/// In-service branch. `susceptance` overrides `1/x` when present (JSON input).
#[derive(Debug, Clone, PartialEq)]
pub struct BranchRecord {
    pub from: usize,
    pub to: usize,
    pub r: f64,
    pub x: f64,
    pub charging: f64,
    pub susceptance: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RawCase {
    pub base_mva: f64,
    pub buses: Vec<BusRecord>,
    pub gens: Vec<GenRecord>,
    pub branches: Vec<BranchRecord>,
}

impl RawCase {
    pub fn validate(&self) -> std::result::Result<(), ParseError> {
        if self.buses.is_empty() {
            return Err(ParseError::NoBuses);
        }
        let mut seen = std::collections::BTreeSet::new();
        for b in &self.buses {
            if !seen.insert(b.id) {
                return Err(ParseError::DuplicateBus(b.id));
            }
        }
        for g in &self.gens {
            if !seen.contains(&g.bus) {
                return Err(ParseError::UnknownBus {
                    bus: g.bus,
                    what: "generator",
                });
            }
        }
        for br in &self.branches {
            for bus in [br.from, br.to] {
                if !seen.contains(&bus) {
                    return Err(ParseError::UnknownBus {
                        bus,
                        what: "branch",
                    });
                }
            }
            let positive = match br.susceptance {
                Some(b) => b > 0.0 && b.is_finite(),
                None => br.x > 0.0 && br.x.is_finite(),
            };
            if !positive {
                return Err(ParseError::NonPositiveReactance {
                    from: br.from,
                    to: br.to,
                    x: br.x,
                });
            }
        }
        Ok(())
    }
}

/// Parses MATPOWER text or the JSON network schema (detected by a leading `{`).
pub fn parse_case(text: &str) -> std::result::Result<RawCase, ParseError> {
    if text.trim_start().starts_with('{') {
        json::parse_json_case(text)
    } else {
        matpower::parse_matpower(text)
    }
}

/// Lossless branch with fixed orientation `from -> to` (bus indices).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Branch {
    pub from: usize,
    pub to: usize,
    /// `B_ij`, p.u.
    pub susceptance: f64,
    /// `V_i V_j B_ij`, p.u.
    pub weight: f64,
}

/// Validated lossless network. Buses are addressed by dense index; `bus_ids`
/// maps indices back to case numbering.
#[derive(Debug, Clone, PartialEq)]
pub struct Network {
    pub base_mva: f64,
    pub bus_ids: Vec<usize>,
    pub vm: Vec<f64>,
    pub injections: Vec<f64>,
    pub branches: Vec<Branch>,
}

/// Tolerance on `|sum(P)|`.
pub const BALANCE_TOL: f64 = 1e-9;

impl Network {
    /// Builds and validates a network. `branches` are `(from, to, B)` by index.
    pub fn new(
        base_mva: f64,
        bus_ids: Vec<usize>,
        vm: Vec<f64>,
        injections: Vec<f64>,
        branches: &[(usize, usize, f64)],
    ) -> Result<Self> {
        let n = bus_ids.len();
        if n == 0 {
            return Err(Error::InvalidNetwork("no buses".into()));
        }
        for len in [vm.len(), injections.len()] {
            if len != n {
                return Err(Error::Dimension {
                    expected: n,
                    got: len,
                });
            }
        }
        let branches = branches
            .iter()
            .map(|&(from, to, susceptance)| Branch {
                from,
                to,
                susceptance,
                weight: vm.get(from).copied().unwrap_or(f64::NAN)
                    * vm.get(to).copied().unwrap_or(f64::NAN)
                    * susceptance,
            })
            .collect();
        let net = Network {
            base_mva,
            bus_ids,
            vm,
            injections,
            branches,
        };
        net.validate()?;
        Ok(net)
    }

    /// Unit-voltage network on buses `1..=n` (convenient for synthetic graphs).
    pub fn from_edges(n: usize, edges: &[(usize, usize, f64)], injections: Vec<f64>) -> Result<Self> {
        Network::new(1.0, (1..=n).collect(), vec![1.0; n], injections, edges)
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.n();
        for (e, br) in self.branches.iter().enumerate() {
            if br.from >= n || br.to >= n {
                return Err(Error::InvalidNetwork(format!("branch {e} endpoint out of range")));
            }
            if br.from == br.to {
                return Err(Error::InvalidNetwork(format!("branch {e} is a self-loop")));
            }
            if !(br.weight > 0.0 && br.weight.is_finite()) {
                return Err(Error::InvalidNetwork(format!(
                    "branch {e} has non-positive weight {}",
                    br.weight
                )));
            }
        }
        if let Some(v) = self.vm.iter().find(|v| !(**v > 0.0 && v.is_finite())) {
            return Err(Error::InvalidNetwork(format!("voltage magnitude {v}")));
        }
        if self.injections.iter().any(|p| !p.is_finite()) {
            return Err(Error::InvalidNetwork("non-finite injection".into()));
        }
        let components = count_components(n, self.branches.iter().map(|b| (b.from, b.to)));
        if components != 1 {
            return Err(Error::Disconnected { components });
        }
        let sum: f64 = self.injections.iter().sum();
        if sum.abs() > BALANCE_TOL {
            return Err(Error::Unbalanced { sum });
        }
        Ok(())
    }

    pub fn n(&self) -> usize {
        self.bus_ids.len()
    }

    pub fn m(&self) -> usize {
        self.branches.len()
    }

    pub fn index_of(&self, bus_id: usize) -> Option<usize> {
        self.bus_ids.iter().position(|&b| b == bus_id)
    }

    pub fn edge_weights(&self) -> Vec<f64> {
        self.branches.iter().map(|b| b.weight).collect()
    }

    /// Same topology with a different (balanced) injection vector.
    pub fn with_injections(&self, injections: Vec<f64>) -> Result<Self> {
        if injections.len() != self.n() {
            return Err(Error::Dimension {
                expected: self.n(),
                got: injections.len(),
            });
        }
        let sum: f64 = injections.iter().sum();
        if sum.abs() > BALANCE_TOL {
            return Err(Error::Unbalanced { sum });
        }
        Ok(Network {
            injections,
            ..self.clone()
        })
    }

    /// Injections scaled uniformly by `y`.
    pub fn scaled(&self, y: f64) -> Self {
        Network {
            injections: self.injections.iter().map(|p| y * p).collect(),
            ..self.clone()
        }
    }

    /// Canonical JSON; parsed back by [`Network::from_json`] bit-identically.
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&NetworkFile::from_network(self))
            .expect("network serialization cannot fail")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: NetworkFile =
            serde_json::from_str(text).map_err(|e| ParseError::Json(e.to_string()))?;
        file.into_network()
    }
}

pub(crate) fn count_components(n: usize, edges: impl Iterator<Item = (usize, usize)>) -> usize {
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(parent: &mut [usize], mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    let mut count = n;
    for (a, b) in edges {
        let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
        if ra != rb {
            parent[ra] = rb;
            count -= 1;
        }
    }
    count
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum VoltagePolicy {
    #[default]
    Flat,
    Case,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BalancePolicy {
    /// Subtract the mean injection from every bus.
    #[default]
    Uniform,
    /// Absorb the whole mismatch at one bus (case numbering).
    SlackBus(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct LosslessOptions {
    pub voltage: VoltagePolicy,
    pub balance: BalancePolicy,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MergedBranch {
    pub from: usize,
    pub to: usize,
    pub count: usize,
}

/// What losslessify changed on the way in.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LosslessReport {
    pub merged: Vec<MergedBranch>,
    /// Raw injection sum before balancing, p.u.
    pub mismatch: f64,
    /// Per-bus shift applied by the uniform projection, p.u.
    pub shift_per_bus: f64,
}

/// Subtracts the mean; returns the shift that was applied to every entry.
pub fn project_balanced(p: &mut [f64]) -> f64 {
    if p.is_empty() {
        return 0.0;
    }
    let mean = p.iter().sum::<f64>() / p.len() as f64;
    for v in p.iter_mut() {
        *v -= mean;
    }
    mean
}

/// Drops resistance, shunts and taps; merges parallel branches; balances the
/// injections. Branches come out sorted by `(min endpoint, max endpoint)`.
pub fn losslessify(raw: &RawCase, opts: &LosslessOptions) -> Result<(Network, LosslessReport)> {
    raw.validate()?;
    let mut ids: Vec<usize> = raw.buses.iter().map(|b| b.id).collect();
    ids.sort_unstable();
    let index: BTreeMap<usize, usize> = ids.iter().enumerate().map(|(i, &id)| (id, i)).collect();
    let n = ids.len();

    let mut vm = vec![1.0; n];
    let mut pd = vec![0.0; n];
    for bus in &raw.buses {
        let k = index[&bus.id];
        pd[k] = bus.pd;
        if opts.voltage == VoltagePolicy::Case {
            vm[k] = bus.vm;
        }
    }
    let mut pg = vec![0.0; n];
    for g in &raw.gens {
        pg[index[&g.bus]] += g.pg;
    }
    let mut p: Vec<f64> = (0..n).map(|k| (pg[k] - pd[k]) / raw.base_mva).collect();

    let mismatch: f64 = p.iter().sum();
    let shift_per_bus = match opts.balance {
        BalancePolicy::Uniform => project_balanced(&mut p),
        BalancePolicy::SlackBus(id) => {
            let k = *index.get(&id).ok_or(Error::UnknownSlack(id))?;
            p[k] -= mismatch;
            0.0
        }
    };

    // key (lo, hi) -> (from, to, B, count)
    let mut merged: BTreeMap<(usize, usize), (usize, usize, f64, usize)> = BTreeMap::new();
    for br in &raw.branches {
        let (from, to) = (index[&br.from], index[&br.to]);
        if from == to {
            return Err(Error::InvalidNetwork(format!("self-loop at bus {}", br.from)));
        }
        let b = match br.susceptance {
            Some(b) => b,
            None if br.x == 0.0 => {
                return Err(Error::ZeroReactance {
                    from: br.from,
                    to: br.to,
                })
            }
            None => 1.0 / br.x,
        };
        let key = (from.min(to), from.max(to));
        merged
            .entry(key)
            .and_modify(|e| {
                e.2 += b;
                e.3 += 1;
            })
            .or_insert((from, to, b, 1));
    }
    let report_merged = merged
        .values()
        .filter(|e| e.3 > 1)
        .map(|e| MergedBranch {
            from: ids[e.0],
            to: ids[e.1],
            count: e.3,
        })
        .collect();
    for m in &report_merged {
        let m: &MergedBranch = m;
        log::info!("merged {} parallel branches {}-{}", m.count, m.from, m.to);
    }
    let edges: Vec<(usize, usize, f64)> = merged.values().map(|e| (e.0, e.1, e.2)).collect();

    let net = Network::new(raw.base_mva, ids, vm, p, &edges)?;
    Ok((
        net,
        LosslessReport {
            merged: report_merged,
            mismatch,
            shift_per_bus,
        },
    ))
}

/// Reads a case file from disk and losslessifies it.
pub fn load_network(path: &std::path::Path, opts: &LosslessOptions) -> Result<(Network, LosslessReport)> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::InvalidNetwork(format!("{}: {e}", path.display())))?;
    let raw = parse_case(&text)?;
    losslessify(&raw, opts)
}
