//! JSON exchange format for nets and traces.

use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::net::{AgentId, Net, PortRef};
use crate::report::Violation;
use crate::signature::Signature;
use crate::trace::{Document, TraceLabel, TraceTree};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AgentJson {
    pub id: u64,
    pub symbol: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum EndpointJson {
    Agent { agent: u64, port: usize },
    Free { free: String },
}

impl EndpointJson {
    pub fn to_port_ref(&self) -> PortRef {
        match self {
            EndpointJson::Agent { agent, port } => PortRef::agent(AgentId(*agent), *port),
            EndpointJson::Free { free } => PortRef::free(free.clone()),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NetJson {
    pub agents: Vec<AgentJson>,
    pub edges: Vec<[EndpointJson; 2]>,
    pub free: Vec<String>,
    pub selections: BTreeMap<String, Vec<u64>>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TraceEdgeJson {
    pub from: u64,
    pub to: u64,
    /// Rule name; the rules of a parallel step joined by `||`.
    pub rule: String,
    /// Consumed agent pair; all pairs of a parallel step, flattened.
    pub agents: Vec<u64>,
    pub strategy: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TraceJson {
    pub root: u64,
    pub nodes: IndexMap<String, NetJson>,
    pub edges: Vec<TraceEdgeJson>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum JsonError {
    #[error("malformed JSON: {0}")]
    Malformed(String),
    #[error("unknown symbol `{0}`")]
    UnknownSymbol(String),
    #[error("agent id {0} used twice")]
    DuplicateAgent(u64),
    #[error("invalid net: {0}")]
    Net(String),
    #[error("invalid net: {}", .0.first().map(|v| v.to_string()).unwrap_or_default())]
    Invalid(Vec<Violation>),
}

fn endpoint_json(end: &PortRef) -> EndpointJson {
    match end {
        PortRef::Agent { agent, port } => EndpointJson::Agent {
            agent: agent.0,
            port: *port,
        },
        PortRef::Free(name) => EndpointJson::Free { free: name.clone() },
    }
}

pub fn net_json(net: &Net) -> NetJson {
    NetJson {
        agents: net
            .agents()
            .map(|(id, _)| AgentJson {
                id: id.0,
                symbol: net.symbol_name(id).unwrap_or_default().to_string(),
            })
            .collect(),
        edges: net
            .edges()
            .map(|(_, e)| [endpoint_json(&e.0), endpoint_json(&e.1)])
            .collect(),
        free: net.interface().into_iter().map(str::to_string).collect(),
        selections: net
            .selections()
            .iter()
            .map(|(k, v)| (k.clone(), v.iter().map(|a| a.0).collect()))
            .collect(),
    }
}

pub fn net_to_json(net: &Net) -> String {
    serde_json::to_string_pretty(&net_json(net)).expect("net serializes")
}

/// Rebuilds a net from its JSON form. Agent ids are kept; edge ids follow
/// the order of the `edges` list.
pub fn net_from_json_value(sig: &Arc<Signature>, json: &NetJson) -> Result<Net, JsonError> {
    let mut net = Net::new(sig.clone());
    let mut ids = BTreeSet::new();
    for a in &json.agents {
        let symbol = sig
            .lookup(&a.symbol)
            .ok_or_else(|| JsonError::UnknownSymbol(a.symbol.clone()))?;
        if !ids.insert(a.id) {
            return Err(JsonError::DuplicateAgent(a.id));
        }
        net.insert_agent_unchecked(AgentId(a.id), symbol);
    }
    for name in &json.free {
        let fresh = net
            .declare_free(name)
            .map_err(|e| JsonError::Net(e.to_string()))?;
        if !fresh {
            return Err(JsonError::Net(format!("free port `{name}` listed twice")));
        }
    }
    for [a, b] in &json.edges {
        net.connect(a.to_port_ref(), b.to_port_ref())
            .map_err(|e| JsonError::Net(e.to_string()))?;
    }
    for (name, members) in &json.selections {
        net.set_selection(name, members.iter().map(|m| AgentId(*m)))
            .map_err(|e| JsonError::Net(e.to_string()))?;
    }
    let violations = net.validate();
    if !violations.is_empty() {
        return Err(JsonError::Invalid(violations));
    }
    Ok(net)
}

pub fn net_from_json(sig: &Arc<Signature>, text: &str) -> Result<Net, JsonError> {
    let json: NetJson =
        serde_json::from_str(text).map_err(|e| JsonError::Malformed(e.to_string()))?;
    net_from_json_value(sig, &json)
}

pub fn label_json(label: &TraceLabel) -> (String, Vec<u64>) {
    let rule = label
        .rewrites
        .iter()
        .map(|(r, _)| r.as_str())
        .collect::<Vec<_>>()
        .join("||");
    let agents = label
        .rewrites
        .iter()
        .flat_map(|(_, (a, b))| [a.0, b.0])
        .collect();
    (rule, agents)
}

pub fn trace_json(trace: &TraceTree) -> TraceJson {
    TraceJson {
        root: trace.root().0,
        nodes: trace
            .nodes()
            .map(|n| (n.id.0.to_string(), net_json(n.net)))
            .collect(),
        edges: trace
            .edges()
            .map(|(from, to, label)| {
                let (rule, agents) = label_json(label);
                TraceEdgeJson {
                    from: from.0,
                    to: to.0,
                    rule,
                    agents,
                    strategy: label.strategy.clone(),
                }
            })
            .collect(),
    }
}

pub fn export_trace_json(doc: &Document) -> String {
    serde_json::to_string_pretty(&trace_json(doc.trace())).expect("trace serializes")
}
