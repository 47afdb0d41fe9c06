//! Nets: agents, port-to-port edges, named free ports and agent selections.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::sync::Arc;

use indexmap::IndexMap;
use thiserror::Error;

use crate::report::{Violation, ViolationCode};
use crate::signature::{is_identifier, Signature, SymbolId};

/// Document-unique agent identifier. Allocated from a monotone counter and
/// never reused.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct AgentId(pub u64);

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct EdgeId(pub u64);

impl fmt::Display for AgentId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl fmt::Display for EdgeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// One end of an edge: a port of an agent, or a named free port.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum PortRef {
    Agent { agent: AgentId, port: usize },
    Free(String),
}

impl PortRef {
    pub fn agent(agent: AgentId, port: usize) -> Self {
        PortRef::Agent { agent, port }
    }

    pub fn free(name: impl Into<String>) -> Self {
        PortRef::Free(name.into())
    }

    pub fn is_principal(&self) -> bool {
        matches!(self, PortRef::Agent { port: 0, .. })
    }

    pub fn agent_id(&self) -> Option<AgentId> {
        match self {
            PortRef::Agent { agent, .. } => Some(*agent),
            PortRef::Free(_) => None,
        }
    }
}

impl fmt::Display for PortRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PortRef::Agent { agent, port } => write!(f, "{agent}.{port}"),
            PortRef::Free(name) => write!(f, "free {name}"),
        }
    }
}

/// An unordered pair of endpoints. The stored order is the order the edge
/// was created with and only matters for printing.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Edge(pub PortRef, pub PortRef);

impl Edge {
    pub fn other(&self, end: &PortRef) -> Option<&PortRef> {
        if &self.0 == end {
            Some(&self.1)
        } else if &self.1 == end {
            Some(&self.0)
        } else {
            None
        }
    }

    pub fn ends(&self) -> [&PortRef; 2] {
        [&self.0, &self.1]
    }

    pub fn touches(&self, agent: AgentId) -> bool {
        self.0.agent_id() == Some(agent) || self.1.agent_id() == Some(agent)
    }

    /// Both endpoints are principal ports of two distinct agents.
    pub fn is_active(&self) -> bool {
        match (&self.0, &self.1) {
            (PortRef::Agent { agent: a, port: 0 }, PortRef::Agent { agent: b, port: 0 }) => a != b,
            _ => false,
        }
    }
}

/// An active pair: an edge joining the principal ports of two agents.
/// `left_agent` is always the smaller id.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Redex {
    pub edge: EdgeId,
    pub left_agent: AgentId,
    pub right_agent: AgentId,
    pub symbols: (SymbolId, SymbolId),
}

impl Redex {
    pub fn agents(&self) -> (AgentId, AgentId) {
        (self.left_agent, self.right_agent)
    }

    pub fn involves(&self, agent: AgentId) -> bool {
        self.left_agent == agent || self.right_agent == agent
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum NetError {
    #[error("unknown symbol `{0}`")]
    UnknownSymbol(String),
    #[error("unknown agent {0}")]
    UnknownAgent(AgentId),
    #[error("unknown edge {0}")]
    UnknownEdge(EdgeId),
    #[error("invalid port reference {0}")]
    InvalidPortRef(PortRef),
    #[error("port {0} is already connected")]
    PortOccupied(PortRef),
    #[error("cannot connect {0} to itself")]
    SelfEndpoint(PortRef),
    #[error("invalid free port name `{0}`")]
    InvalidFreePortName(String),
    #[error("invalid selection name `{0}`")]
    InvalidSelectionName(String),
}

impl NetError {
    pub fn code(&self) -> &'static str {
        match self {
            NetError::UnknownSymbol(_) => "UnknownSymbol",
            NetError::UnknownAgent(_) => "UnknownAgent",
            NetError::UnknownEdge(_) => "UnknownEdge",
            NetError::InvalidPortRef(_) => "InvalidPortRef",
            NetError::PortOccupied(_) => "PortOccupied",
            NetError::SelfEndpoint(_) => "SelfEndpoint",
            NetError::InvalidFreePortName(_) => "InvalidFreePortName",
            NetError::InvalidSelectionName(_) => "InvalidSelectionName",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
struct AgentSlot {
    symbol: SymbolId,
    ports: Vec<Option<EdgeId>>,
}

/// Membership change of one selection caused by a rewrite step.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SelectionChange {
    pub name: String,
    pub removed: Vec<AgentId>,
    pub added: Vec<AgentId>,
}

/// An interaction net over a fixed signature.
///
/// Every port has degree at most one. Edges may join two ports of the same
/// agent, and free ports may be wired directly to each other.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Net {
    sig: Arc<Signature>,
    agents: BTreeMap<AgentId, AgentSlot>,
    edges: BTreeMap<EdgeId, Edge>,
    free: IndexMap<String, Option<EdgeId>>,
    selections: BTreeMap<String, BTreeSet<AgentId>>,
    next_agent: u64,
    next_edge: u64,
}

impl Net {
    pub fn new(sig: Arc<Signature>) -> Net {
        Net {
            sig,
            agents: BTreeMap::new(),
            edges: BTreeMap::new(),
            free: IndexMap::new(),
            selections: BTreeMap::new(),
            next_agent: 0,
            next_edge: 0,
        }
    }

    pub fn signature(&self) -> &Arc<Signature> {
        &self.sig
    }

    pub fn add_agent(&mut self, symbol: &str) -> Result<AgentId, NetError> {
        let sym = self
            .sig
            .lookup(symbol)
            .ok_or_else(|| NetError::UnknownSymbol(symbol.to_string()))?;
        Ok(self.alloc_agent(sym))
    }

    pub fn add_agent_of(&mut self, symbol: SymbolId) -> Result<AgentId, NetError> {
        if !self.sig.contains(symbol) {
            return Err(NetError::UnknownSymbol(format!("#{}", symbol.index())));
        }
        Ok(self.alloc_agent(symbol))
    }

    pub(crate) fn alloc_agent(&mut self, symbol: SymbolId) -> AgentId {
        let id = AgentId(self.next_agent);
        self.next_agent += 1;
        let ports = vec![None; self.sig.arity(symbol) + 1];
        self.agents.insert(id, AgentSlot { symbol, ports });
        id
    }

    /// Joins two currently unconnected ports. Free-port names are declared
    /// on first use, `a` before `b`.
    pub fn connect(&mut self, a: PortRef, b: PortRef) -> Result<EdgeId, NetError> {
        if a == b {
            return Err(NetError::SelfEndpoint(a));
        }
        self.check_connectable(&a)?;
        self.check_connectable(&b)?;
        Ok(self.link(a, b))
    }

    fn check_connectable(&self, end: &PortRef) -> Result<(), NetError> {
        match end {
            PortRef::Agent { agent, port } => {
                let slot = self
                    .agents
                    .get(agent)
                    .ok_or_else(|| NetError::InvalidPortRef(end.clone()))?;
                match slot.ports.get(*port) {
                    None => Err(NetError::InvalidPortRef(end.clone())),
                    Some(Some(_)) => Err(NetError::PortOccupied(end.clone())),
                    Some(None) => Ok(()),
                }
            }
            PortRef::Free(name) => {
                if !is_identifier(name) {
                    return Err(NetError::InvalidFreePortName(name.clone()));
                }
                match self.free.get(name) {
                    Some(Some(_)) => Err(NetError::PortOccupied(end.clone())),
                    _ => Ok(()),
                }
            }
        }
    }

    /// Inserts an edge between two ports already known to be connectable.
    pub(crate) fn link(&mut self, a: PortRef, b: PortRef) -> EdgeId {
        let id = EdgeId(self.next_edge);
        self.next_edge += 1;
        self.set_slot(&a, Some(id));
        self.set_slot(&b, Some(id));
        self.edges.insert(id, Edge(a, b));
        id
    }

    fn set_slot(&mut self, end: &PortRef, value: Option<EdgeId>) {
        match end {
            PortRef::Agent { agent, port } => {
                if let Some(slot) = self
                    .agents
                    .get_mut(agent)
                    .and_then(|s| s.ports.get_mut(*port))
                {
                    *slot = value;
                }
            }
            PortRef::Free(name) => {
                if let Some(slot) = self.free.get_mut(name) {
                    *slot = value;
                } else {
                    self.free.insert(name.clone(), value);
                }
            }
        }
    }

    pub fn disconnect(&mut self, edge: EdgeId) -> Result<Edge, NetError> {
        self.unlink(edge).ok_or(NetError::UnknownEdge(edge))
    }

    pub(crate) fn unlink(&mut self, edge: EdgeId) -> Option<Edge> {
        let e = self.edges.remove(&edge)?;
        for end in e.ends() {
            if self.edge_at(end) == Some(edge) {
                self.set_slot(end, None);
            }
        }
        Some(e)
    }

    /// Removes an agent together with its incident edges and its selection
    /// memberships. The id is never handed out again.
    pub fn delete_agent(&mut self, id: AgentId) -> Result<(), NetError> {
        let slot = self.agents.get(&id).ok_or(NetError::UnknownAgent(id))?;
        let incident: BTreeSet<EdgeId> = slot.ports.iter().flatten().copied().collect();
        for e in incident {
            self.unlink(e);
        }
        self.agents.remove(&id);
        for members in self.selections.values_mut() {
            members.remove(&id);
        }
        Ok(())
    }

    /// Declares a free port without connecting it. Returns false when the
    /// name was already declared.
    pub fn declare_free(&mut self, name: &str) -> Result<bool, NetError> {
        if !is_identifier(name) {
            return Err(NetError::InvalidFreePortName(name.to_string()));
        }
        if self.free.contains_key(name) {
            return Ok(false);
        }
        self.free.insert(name.to_string(), None);
        Ok(true)
    }

    /// Free-port names in declaration order.
    pub fn interface(&self) -> Vec<&str> {
        self.free.keys().map(String::as_str).collect()
    }

    pub fn interface_set(&self) -> BTreeSet<String> {
        self.free.keys().cloned().collect()
    }

    pub fn agent_count(&self) -> usize {
        self.agents.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.agents.is_empty() && self.edges.is_empty() && self.free.is_empty()
    }

    pub fn agents(&self) -> impl Iterator<Item = (AgentId, SymbolId)> + '_ {
        self.agents.iter().map(|(id, slot)| (*id, slot.symbol))
    }

    pub fn agent_ids(&self) -> impl Iterator<Item = AgentId> + '_ {
        self.agents.keys().copied()
    }

    pub fn contains_agent(&self, id: AgentId) -> bool {
        self.agents.contains_key(&id)
    }

    pub fn symbol_of(&self, id: AgentId) -> Option<SymbolId> {
        self.agents.get(&id).map(|s| s.symbol)
    }

    pub fn symbol_name(&self, id: AgentId) -> Option<&str> {
        self.symbol_of(id).map(|s| self.sig.name(s))
    }

    /// Edge slots of an agent, indexed by port.
    pub fn ports_of(&self, id: AgentId) -> Option<&[Option<EdgeId>]> {
        self.agents.get(&id).map(|s| s.ports.as_slice())
    }

    pub fn edges(&self) -> impl Iterator<Item = (EdgeId, &Edge)> + '_ {
        self.edges.iter().map(|(id, e)| (*id, e))
    }

    pub fn edge(&self, id: EdgeId) -> Option<&Edge> {
        self.edges.get(&id)
    }

    /// Free ports in declaration order with the edge attached to each.
    pub fn free_ports(&self) -> impl Iterator<Item = (&str, Option<EdgeId>)> + '_ {
        self.free.iter().map(|(n, e)| (n.as_str(), *e))
    }

    pub fn edge_at(&self, end: &PortRef) -> Option<EdgeId> {
        match end {
            PortRef::Agent { agent, port } => self
                .agents
                .get(agent)
                .and_then(|s| s.ports.get(*port))
                .copied()
                .flatten(),
            PortRef::Free(name) => self.free.get(name).copied().flatten(),
        }
    }

    /// The endpoint at the other side of whatever edge is attached to `end`.
    pub fn peer(&self, end: &PortRef) -> Option<&PortRef> {
        let e = self.edge_at(end)?;
        self.edges.get(&e)?.other(end)
    }

    pub fn selections(&self) -> &BTreeMap<String, BTreeSet<AgentId>> {
        &self.selections
    }

    pub fn selection(&self, name: &str) -> Option<&BTreeSet<AgentId>> {
        self.selections.get(name)
    }

    pub fn set_selection<I>(&mut self, name: &str, members: I) -> Result<(), NetError>
    where
        I: IntoIterator<Item = AgentId>,
    {
        if !is_identifier(name) {
            return Err(NetError::InvalidSelectionName(name.to_string()));
        }
        let members: BTreeSet<AgentId> = members.into_iter().collect();
        if let Some(missing) = members.iter().find(|a| !self.agents.contains_key(a)) {
            return Err(NetError::UnknownAgent(*missing));
        }
        self.selections.insert(name.to_string(), members);
        Ok(())
    }

    pub fn next_agent_id(&self) -> AgentId {
        AgentId(self.next_agent)
    }

    pub fn next_edge_id(&self) -> EdgeId {
        EdgeId(self.next_edge)
    }

    pub fn redex_on(&self, edge: EdgeId) -> Option<Redex> {
        let e = self.edges.get(&edge)?;
        if !e.is_active() {
            return None;
        }
        let (a, b) = (e.0.agent_id()?, e.1.agent_id()?);
        let (l, r) = if a < b { (a, b) } else { (b, a) };
        Some(Redex {
            edge,
            left_agent: l,
            right_agent: r,
            symbols: (self.symbol_of(l)?, self.symbol_of(r)?),
        })
    }

    /// The redex on `agent`'s principal port, if there is one.
    pub fn redex_of_agent(&self, agent: AgentId) -> Option<Redex> {
        let e = self.edge_at(&PortRef::agent(agent, 0))?;
        self.redex_on(e)
    }

    /// Scans every edge for principal-to-principal connections. Sorted by
    /// (smaller agent id, larger agent id).
    pub fn find_active_pairs(&self) -> Vec<Redex> {
        let mut out: Vec<Redex> = self
            .edges
            .keys()
            .filter_map(|e| self.redex_on(*e))
            .collect();
        out.sort_by_key(|r| (r.left_agent, r.right_agent, r.edge));
        out
    }

    /// Checks every structural invariant. Never mutates.
    pub fn validate(&self) -> Vec<Violation> {
        use ViolationCode::*;
        let mut out = Vec::new();
        for (id, slot) in &self.agents {
            if !self.sig.contains(slot.symbol) {
                out.push(Violation::new(
                    UnknownSymbol,
                    format!("agent {id} has a symbol outside the signature"),
                ));
            }
            if id.0 >= self.next_agent {
                out.push(Violation::new(
                    CounterBehind,
                    format!("agent {id} is not below the id counter {}", self.next_agent),
                ));
            }
        }
        let mut degree: HashMap<&PortRef, usize> = HashMap::new();
        for (id, edge) in &self.edges {
            if id.0 >= self.next_edge {
                out.push(Violation::new(
                    CounterBehind,
                    format!("edge {id} is not below the edge counter {}", self.next_edge),
                ));
            }
            if edge.0 == edge.1 {
                out.push(Violation::new(
                    SelfEndpoint,
                    format!("edge {id} joins {} to itself", edge.0),
                ));
            }
            for end in edge.ends() {
                *degree.entry(end).or_default() += 1;
                match end {
                    PortRef::Agent { agent, port } => match self.agents.get(agent) {
                        None => out.push(Violation::new(
                            DanglingRef,
                            format!("edge {id} references missing agent {agent}"),
                        )),
                        Some(slot) if *port >= slot.ports.len() => out.push(Violation::new(
                            PortOutOfRange,
                            format!(
                                "edge {id} uses port {port} of agent {agent} with arity {}",
                                slot.ports.len() - 1
                            ),
                        )),
                        Some(_) => {}
                    },
                    PortRef::Free(name) => {
                        if !self.free.contains_key(name) {
                            out.push(Violation::new(
                                DanglingRef,
                                format!("edge {id} references undeclared free port `{name}`"),
                            ));
                        }
                    }
                }
            }
        }
        let mut overused: Vec<_> = degree.into_iter().filter(|(_, n)| *n > 1).collect();
        overused.sort();
        for (end, n) in overused {
            out.push(Violation::new(
                PortDegree,
                format!("port {end} occurs in {n} edges"),
            ));
        }
        for name in self.free.keys() {
            if !is_identifier(name) {
                out.push(Violation::new(
                    InvalidFreePort,
                    format!("invalid free port name `{name}`"),
                ));
            }
        }
        for (name, members) in &self.selections {
            for a in members {
                if !self.agents.contains_key(a) {
                    out.push(Violation::new(
                        BadSelection,
                        format!("selection `{name}` contains missing agent {a}"),
                    ));
                }
            }
        }
        out
    }

    // Low-level construction used by importers. Nothing is checked; run
    // `validate` afterwards.

    pub fn insert_agent_unchecked(&mut self, id: AgentId, symbol: SymbolId) {
        let arity = if self.sig.contains(symbol) {
            self.sig.arity(symbol)
        } else {
            0
        };
        self.agents.insert(
            id,
            AgentSlot {
                symbol,
                ports: vec![None; arity + 1],
            },
        );
        self.next_agent = self.next_agent.max(id.0 + 1);
    }

    pub fn insert_edge_unchecked(&mut self, a: PortRef, b: PortRef) -> EdgeId {
        for end in [&a, &b] {
            if let PortRef::Free(name) = end {
                if !self.free.contains_key(name) {
                    self.free.insert(name.clone(), None);
                }
            }
        }
        self.link(a, b)
    }

    pub fn insert_selection_unchecked(&mut self, name: &str, members: BTreeSet<AgentId>) {
        self.selections.insert(name.to_string(), members);
    }

    // Primitives for rewriting and its undo.

    pub(crate) fn remove_agent_raw(&mut self, id: AgentId) -> Option<SymbolId> {
        self.agents.remove(&id).map(|s| s.symbol)
    }

    pub(crate) fn restore_agent(&mut self, id: AgentId, symbol: SymbolId) {
        let ports = vec![None; self.sig.arity(symbol) + 1];
        self.agents.insert(id, AgentSlot { symbol, ports });
    }

    pub(crate) fn restore_edge(&mut self, id: EdgeId, edge: Edge) {
        self.set_slot(&edge.0, Some(id));
        self.set_slot(&edge.1, Some(id));
        self.edges.insert(id, edge);
    }

    pub(crate) fn counters(&self) -> (u64, u64) {
        (self.next_agent, self.next_edge)
    }

    pub(crate) fn set_counters(&mut self, (agents, edges): (u64, u64)) {
        self.next_agent = agents;
        self.next_edge = edges;
    }

    /// Keeps selections pointing at residuals after a rewrite: `consumed`
    /// agents leave every selection, and `created` agents join each
    /// selection that held at least one consumed agent.
    pub(crate) fn inherit_selections(
        &mut self,
        consumed: &[AgentId],
        created: &[AgentId],
    ) -> Vec<SelectionChange> {
        let mut changes = Vec::new();
        for (name, members) in self.selections.iter_mut() {
            let removed: Vec<AgentId> = consumed
                .iter()
                .copied()
                .filter(|a| members.remove(a))
                .collect();
            if removed.is_empty() {
                continue;
            }
            let added: Vec<AgentId> = created
                .iter()
                .copied()
                .filter(|a| members.insert(*a))
                .collect();
            changes.push(SelectionChange {
                name: name.clone(),
                removed,
                added,
            });
        }
        changes
    }

    pub(crate) fn undo_selection_change(&mut self, change: &SelectionChange) {
        if let Some(members) = self.selections.get_mut(&change.name) {
            for a in &change.added {
                members.remove(a);
            }
            members.extend(change.removed.iter().copied());
        }
    }
}
