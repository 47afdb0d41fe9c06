use std::collections::{BTreeSet, HashMap, HashSet};

use thiserror::Error;

use super::redexes::RedexSet;
use super::rule::{InteractionRule, LhsPort, MapTarget, Side};
use super::RuleSet;
use crate::net::{AgentId, Edge, EdgeId, Net, PortRef, Redex, SelectionChange};
use crate::signature::SymbolId;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RewriteError {
    #[error("edge {0} is no longer an active pair")]
    RedexStale(EdgeId),
    #[error("rule `{rule}` does not apply to the active pair on edge {edge}")]
    RuleMismatch { rule: String, edge: EdgeId },
}

/// Everything one rewrite step changed, in enough detail to undo it.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct RewriteDelta {
    pub removed_agents: Vec<(AgentId, SymbolId)>,
    pub added_agents: Vec<AgentId>,
    pub removed_edges: Vec<(EdgeId, Edge)>,
    pub added_edges: Vec<EdgeId>,
    pub selection_changes: Vec<SelectionChange>,
    counters_before: (u64, u64),
}

impl RewriteDelta {
    pub fn consumed(&self) -> impl Iterator<Item = AgentId> + '_ {
        self.removed_agents.iter().map(|(a, _)| *a)
    }
}

// A stop on the path that a wire follows through the vanished active pair.
#[derive(Clone, Debug)]
enum Peer {
    External(PortRef),
    Joint(LhsPort),
}

/// Rewrites one active pair with `rule`, mutating `net`.
///
/// The two agents and every edge touching them are removed, a fresh copy
/// of the right-hand net is added with ids taken from the net's counter,
/// and each former neighbour of an interface port is reconnected to the
/// target its port maps to. When a mapping joins two interface ports the
/// two neighbours are wired directly; chains of such joins are followed
/// to their ends.
pub fn apply_rule(
    net: &mut Net,
    redex: &Redex,
    rule: &InteractionRule,
) -> Result<RewriteDelta, RewriteError> {
    match net.redex_on(redex.edge) {
        Some(live) if live.agents() == redex.agents() => {}
        _ => return Err(RewriteError::RedexStale(redex.edge)),
    }
    let (sa, sb) = redex.symbols;
    let (left, right) = if (sa, sb) == rule.lhs() {
        (redex.left_agent, redex.right_agent)
    } else if (sb, sa) == rule.lhs() {
        (redex.right_agent, redex.left_agent)
    } else {
        return Err(RewriteError::RuleMismatch {
            rule: rule.name().to_string(),
            edge: redex.edge,
        });
    };
    let sig = net.signature().clone();
    let counters_before = net.counters();
    let agent_of = |side| match side {
        Side::Left => left,
        Side::Right => right,
    };

    let mut interface_ports = Vec::new();
    let mut peers: HashMap<LhsPort, Peer> = HashMap::new();
    for side in [Side::Left, Side::Right] {
        let agent = agent_of(side);
        for port in 1..=sig.arity(rule.side_symbol(side)) {
            let here = LhsPort::new(side, port);
            interface_ports.push(here);
            let peer = match net.peer(&PortRef::agent(agent, port)) {
                None => continue,
                Some(PortRef::Agent { agent: x, port: j }) if *x == left && *j > 0 => {
                    Peer::Joint(LhsPort::new(Side::Left, *j))
                }
                Some(PortRef::Agent { agent: x, port: j }) if *x == right && *j > 0 => {
                    Peer::Joint(LhsPort::new(Side::Right, *j))
                }
                Some(p) => Peer::External(p.clone()),
            };
            peers.insert(here, peer);
        }
    }

    let mut delta = RewriteDelta {
        counters_before,
        ..RewriteDelta::default()
    };
    let incident: BTreeSet<EdgeId> = [left, right]
        .iter()
        .flat_map(|a| net.ports_of(*a).unwrap_or(&[]).iter().flatten().copied())
        .collect();
    for e in incident {
        if let Some(edge) = net.unlink(e) {
            delta.removed_edges.push((e, edge));
        }
    }
    let mut consumed = [left, right];
    consumed.sort();
    for a in consumed {
        if let Some(sym) = net.remove_agent_raw(a) {
            delta.removed_agents.push((a, sym));
        }
    }

    let mut fresh: HashMap<AgentId, AgentId> = HashMap::new();
    for (rid, sym) in rule.rhs().agents() {
        let id = net.alloc_agent(sym);
        fresh.insert(rid, id);
        delta.added_agents.push(id);
    }
    let place = |p: &PortRef| match p {
        PortRef::Agent { agent, port } => PortRef::agent(fresh[agent], *port),
        PortRef::Free(_) => p.clone(),
    };
    for (_, edge) in rule.rhs().edges() {
        let id = net.link(place(&edge.0), place(&edge.1));
        delta.added_edges.push(id);
    }

    // Walk from one end of a spliced wire to the other. `via_peer` says
    // whether `start` was entered over its external connection (so the
    // walk continues through the mapping) or over the mapping.
    let limit = 2 * interface_ports.len() + 2;
    let walk = |start: LhsPort, via_peer: bool| -> Option<PortRef> {
        let (mut at, mut via_peer) = (start, via_peer);
        for _ in 0..limit {
            if via_peer {
                match rule.target_of(at)? {
                    MapTarget::Rhs { agent, port } => {
                        return Some(PortRef::agent(fresh[&agent], port))
                    }
                    MapTarget::Lhs(q) => at = q,
                }
            } else {
                match peers.get(&at)? {
                    Peer::External(x) => return Some(x.clone()),
                    Peer::Joint(q) => at = *q,
                }
            }
            via_peer = !via_peer;
        }
        None
    };

    let mut wired: HashSet<PortRef> = HashSet::new();
    let mut splice: Vec<(PortRef, PortRef)> = Vec::new();
    for port in &interface_ports {
        let Some(Peer::External(x)) = peers.get(port) else {
            continue;
        };
        if !wired.insert(x.clone()) {
            continue;
        }
        if let Some(y) = walk(*port, true) {
            wired.insert(y.clone());
            if &y != x {
                splice.push((x.clone(), y));
            }
        }
    }
    for (src, tgt) in rule.mapping() {
        let MapTarget::Rhs { agent, port } = tgt else {
            continue;
        };
        let start = PortRef::agent(fresh[agent], *port);
        if !wired.insert(start.clone()) {
            continue;
        }
        if let Some(y) = walk(*src, false) {
            wired.insert(y.clone());
            if y != start {
                splice.push((start, y));
            }
        }
    }
    for (a, b) in splice {
        delta.added_edges.push(net.link(a, b));
    }

    delta.selection_changes = net.inherit_selections(&consumed, &delta.added_agents);
    Ok(delta)
}

/// Undoes `delta`, which must be the most recent change applied to `net`.
/// Afterwards the net is identical to its state before that change,
/// counters included. Returns the inverse delta, suitable for
/// [`RedexSet::update`].
pub fn revert(net: &mut Net, delta: &RewriteDelta) -> RewriteDelta {
    let mut inverse = RewriteDelta {
        counters_before: net.counters(),
        ..RewriteDelta::default()
    };
    for e in delta.added_edges.iter().rev() {
        if let Some(edge) = net.unlink(*e) {
            inverse.removed_edges.push((*e, edge));
        }
    }
    for a in delta.added_agents.iter().rev() {
        if let Some(sym) = net.remove_agent_raw(*a) {
            inverse.removed_agents.push((*a, sym));
        }
    }
    for (a, sym) in &delta.removed_agents {
        net.restore_agent(*a, *sym);
        inverse.added_agents.push(*a);
    }
    for (id, edge) in &delta.removed_edges {
        net.restore_edge(*id, edge.clone());
        inverse.added_edges.push(*id);
    }
    for change in delta.selection_changes.iter().rev() {
        net.undo_selection_change(change);
        inverse.selection_changes.push(SelectionChange {
            name: change.name.clone(),
            removed: change.added.clone(),
            added: change.removed.clone(),
        });
    }
    net.set_counters(delta.counters_before);
    inverse
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum NormalizeError {
    #[error("no normal form within {0} steps")]
    StepLimitExceeded(u64),
}

/// Fires rule-covered redexes, smallest agent pair first, until none are
/// left. Redexes without a rule are left in place. Returns the number of
/// steps taken.
pub fn normalize(net: &mut Net, rules: &RuleSet, max_steps: u64) -> Result<u64, NormalizeError> {
    let mut redexes = RedexSet::new(net);
    let mut steps = 0;
    loop {
        let next = redexes.iter().find_map(|r| {
            rules
                .for_pair(r.symbols.0, r.symbols.1)
                .map(|rule| (*r, rule))
        });
        let Some((redex, rule)) = next else {
            return Ok(steps);
        };
        if steps == max_steps {
            return Err(NormalizeError::StepLimitExceeded(max_steps));
        }
        let delta = apply_rule(net, &redex, rule).expect("tracked redex is live");
        redexes.update(&delta, net);
        steps += 1;
    }
}
