use serde::{Deserialize, Serialize};

use super::{BranchRecord, BusRecord, GenRecord, Network, RawCase};
use crate::error::{Error, ParseError, Result};

/// JSON network schema, shared by raw input and canonical output.
///
/// Injections are per unit. Canonical output additionally carries the branch
/// susceptance `b`, which takes precedence over `x` when present.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NetworkFile {
    #[serde(rename = "baseMVA", default, skip_serializing_if = "Option::is_none")]
    pub base_mva: Option<f64>,
    pub buses: Vec<JsonBus>,
    #[serde(default)]
    pub branches: Vec<JsonBranch>,
    #[serde(default)]
    pub injections: Vec<JsonInjection>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JsonBus {
    pub id: usize,
    #[serde(default = "unit")]
    pub vm: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JsonBranch {
    pub from: usize,
    pub to: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub x: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub b: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JsonInjection {
    pub id: usize,
    pub p: f64,
}

fn unit() -> f64 {
    1.0
}

pub(super) fn parse_json_case(text: &str) -> std::result::Result<RawCase, ParseError> {
    let file: NetworkFile = serde_json::from_str(text).map_err(|e| ParseError::Json(e.to_string()))?;
    let raw = RawCase {
        // injections are already per unit
        base_mva: 1.0,
        buses: file
            .buses
            .iter()
            .map(|b| BusRecord {
                id: b.id,
                bus_type: 1,
                pd: 0.0,
                vm: b.vm,
            })
            .collect(),
        gens: file
            .injections
            .iter()
            .map(|i| GenRecord { bus: i.id, pg: i.p })
            .collect(),
        branches: file
            .branches
            .iter()
            .map(|br| BranchRecord {
                from: br.from,
                to: br.to,
                r: 0.0,
                x: br.x.or(br.b.map(|b| 1.0 / b)).unwrap_or(0.0),
                charging: 0.0,
                susceptance: br.b,
            })
            .collect(),
    };
    raw.validate()?;
    Ok(raw)
}

impl NetworkFile {
    pub fn from_network(net: &Network) -> Self {
        NetworkFile {
            base_mva: Some(net.base_mva),
            buses: net
                .bus_ids
                .iter()
                .zip(&net.vm)
                .map(|(&id, &vm)| JsonBus { id, vm })
                .collect(),
            branches: net
                .branches
                .iter()
                .map(|br| JsonBranch {
                    from: net.bus_ids[br.from],
                    to: net.bus_ids[br.to],
                    x: Some(1.0 / br.susceptance),
                    b: Some(br.susceptance),
                })
                .collect(),
            injections: net
                .bus_ids
                .iter()
                .zip(&net.injections)
                .map(|(&id, &p)| JsonInjection { id, p })
                .collect(),
        }
    }

    /// Builds the network exactly as written: no projection, merging or reordering.
    pub fn into_network(self) -> Result<Network> {
        let bus_ids: Vec<usize> = self.buses.iter().map(|b| b.id).collect();
        let index = |id: usize, what: &'static str| {
            bus_ids
                .iter()
                .position(|&b| b == id)
                .ok_or(Error::Parse(ParseError::UnknownBus { bus: id, what }))
        };
        let mut injections = vec![0.0; bus_ids.len()];
        for inj in &self.injections {
            injections[index(inj.id, "injection")?] += inj.p;
        }
        let mut edges = Vec::with_capacity(self.branches.len());
        for br in &self.branches {
            let b = match (br.b, br.x) {
                (Some(b), _) => b,
                (None, Some(x)) if x > 0.0 => 1.0 / x,
                (None, x) => {
                    return Err(ParseError::NonPositiveReactance {
                        from: br.from,
                        to: br.to,
                        x: x.unwrap_or(0.0),
                    }
                    .into())
                }
            };
            edges.push((index(br.from, "branch")?, index(br.to, "branch")?, b));
        }
        Network::new(
            self.base_mva.unwrap_or(1.0),
            bus_ids,
            self.buses.iter().map(|b| b.vm).collect(),
            injections,
            &edges,
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn json_raw_case() {
        let text = r#"{"buses":[{"id":1},{"id":2,"vm":1.02}],
                       "branches":[{"from":1,"to":2,"x":0.25}],
                       "injections":[{"id":1,"p":0.5},{"id":2,"p":-0.5}]}"#;
        let raw = super::super::parse_case(text).unwrap();
        assert_eq!(raw.buses.len(), 2);
        assert_eq!(raw.buses[1].vm, 1.02);
        assert_eq!(raw.gens[1].pg, -0.5);
        assert_eq!(raw.branches[0].x, 0.25);
    }

    #[test]
    fn json_unknown_bus() {
        let text = r#"{"buses":[{"id":1}],"branches":[{"from":1,"to":3,"x":0.1}]}"#;
        assert!(matches!(
            super::super::parse_case(text),
            Err(ParseError::UnknownBus { bus: 3, .. })
        ));
    }
}
