use std::collections::BTreeSet;

use super::{Depth, EvalError, Location, Selector};
use crate::net::{AgentId, Net, PortRef, Redex};
use crate::rewrite::{InteractionRule, RedexSet};

/// A set of agents a rule may be matched in.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Region {
    /// The whole net, whatever it contains at the time of matching.
    All,
    Agents(BTreeSet<AgentId>),
}

impl Region {
    pub fn contains(&self, agent: AgentId) -> bool {
        match self {
            Region::All => true,
            Region::Agents(set) => set.contains(&agent),
        }
    }

    pub fn to_set(&self, net: &Net) -> BTreeSet<AgentId> {
        match self {
            Region::All => net.agent_ids().collect(),
            Region::Agents(set) => set.clone(),
        }
    }
}

pub fn resolve_selector(net: &Net, selector: &Selector) -> Result<Region, EvalError> {
    Ok(match selector {
        Selector::All => Region::All,
        Selector::Named(name) => Region::Agents(
            net.selection(name)
                .ok_or_else(|| EvalError::UnknownSelection(name.clone()))?
                .clone(),
        ),
        Selector::Interface(inner) => {
            let inner = resolve_selector(net, inner)?.to_set(net);
            Region::Agents(interface_selector(net, &inner))
        }
        Selector::Successors(inner) => {
            let inner = resolve_selector(net, inner)?.to_set(net);
            Region::Agents(successors_selector(net, &inner))
        }
    })
}

/// The selector's agents extended `depth` times by every agent joined to
/// the current set through an edge with a principal endpoint.
pub fn resolve_location(net: &Net, location: &Location) -> Result<Region, EvalError> {
    let start = match resolve_selector(net, &location.selector)? {
        Region::All => return Ok(Region::All),
        Region::Agents(set) => set,
    };
    let rounds = match location.depth {
        Depth::Bounded(d) => u64::from(d),
        Depth::Unbounded => u64::MAX,
    };
    let mut reached = start.clone();
    let mut frontier: Vec<AgentId> = start.into_iter().collect();
    let mut round = 0;
    while round < rounds && !frontier.is_empty() {
        let mut next = Vec::new();
        for x in frontier {
            for y in principal_neighbours(net, x) {
                if reached.insert(y) {
                    next.push(y);
                }
            }
        }
        frontier = next;
        round += 1;
    }
    Ok(Region::Agents(reached))
}

fn principal_neighbours(net: &Net, x: AgentId) -> impl Iterator<Item = AgentId> + '_ {
    let ports = net.ports_of(x).unwrap_or(&[]);
    ports.iter().enumerate().filter_map(move |(port, slot)| {
        let edge = net.edge((*slot)?)?;
        match edge.other(&PortRef::agent(x, port))? {
            PortRef::Agent { agent: y, port: q } if *y != x && (port == 0 || *q == 0) => Some(*y),
            _ => None,
        }
    })
}

/// Members of `inner` with at least one edge to an agent outside `inner`
/// or to a free port.
pub fn interface_selector(net: &Net, inner: &BTreeSet<AgentId>) -> BTreeSet<AgentId> {
    inner
        .iter()
        .copied()
        .filter(|x| {
            let ports = net.ports_of(*x).unwrap_or(&[]);
            ports.iter().enumerate().any(|(port, slot)| {
                let Some(edge) = slot.and_then(|e| net.edge(e)) else {
                    return false;
                };
                match edge.other(&PortRef::agent(*x, port)) {
                    Some(PortRef::Free(_)) => true,
                    Some(PortRef::Agent { agent, .. }) => !inner.contains(agent),
                    None => false,
                }
            })
        })
        .collect()
}

/// Agents outside `inner` joined to a member of `inner` by an edge with at
/// least one principal endpoint.
pub fn successors_selector(net: &Net, inner: &BTreeSet<AgentId>) -> BTreeSet<AgentId> {
    inner
        .iter()
        .flat_map(|x| principal_neighbours(net, *x))
        .filter(|y| !inner.contains(y))
        .collect()
}

/// The redex with the smallest agent pair among those matching `rule`
/// whose two agents both lie in `region`.
pub fn match_rule_at(
    net: &Net,
    redexes: &RedexSet,
    rule: &InteractionRule,
    region: &Region,
) -> Option<Redex> {
    let fits = |r: &Redex| {
        rule.matches(r.symbols.0, r.symbols.1)
            && region.contains(r.left_agent)
            && region.contains(r.right_agent)
    };
    match region {
        Region::Agents(set) if set.len() < redexes.len() => set
            .iter()
            .filter_map(|a| net.redex_of_agent(*a))
            .filter(|r| redexes.contains_edge(r.edge) && fits(r))
            .min_by_key(|r| r.agents()),
        _ => redexes.iter().find(|r| fits(r)).copied(),
    }
}
