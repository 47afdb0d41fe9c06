use std::collections::{BTreeMap, HashMap};

use super::apply::RewriteDelta;
use crate::net::{AgentId, EdgeId, Net, Redex};

/// The active pairs of one net, kept current from rewrite deltas instead of
/// rescanning the net. Iterates in the same order as
/// [`Net::find_active_pairs`].
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct RedexSet {
    by_pair: BTreeMap<(AgentId, AgentId), Redex>,
    by_edge: HashMap<EdgeId, (AgentId, AgentId)>,
}

impl RedexSet {
    pub fn new(net: &Net) -> RedexSet {
        let mut set = RedexSet::default();
        for r in net.find_active_pairs() {
            set.insert(r);
        }
        set
    }

    fn insert(&mut self, r: Redex) {
        self.by_edge.insert(r.edge, r.agents());
        self.by_pair.insert(r.agents(), r);
    }

    fn remove_edge(&mut self, edge: EdgeId) {
        if let Some(pair) = self.by_edge.remove(&edge) {
            self.by_pair.remove(&pair);
        }
    }

    /// Brings the set up to date after `delta`, which must be the change
    /// just applied to `net`. Only the edges the delta touched are looked
    /// at: edges are never modified in place, so a new redex can only sit
    /// on a new edge.
    pub fn update(&mut self, delta: &RewriteDelta, net: &Net) {
        for (e, _) in &delta.removed_edges {
            self.remove_edge(*e);
        }
        for e in &delta.added_edges {
            if let Some(r) = net.redex_on(*e) {
                self.insert(r);
            }
        }
        for a in &delta.added_agents {
            if let Some(r) = net.redex_of_agent(*a) {
                self.insert(r);
            }
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = &Redex> + '_ {
        self.by_pair.values()
    }

    pub fn to_vec(&self) -> Vec<Redex> {
        self.by_pair.values().copied().collect()
    }

    pub fn len(&self) -> usize {
        self.by_pair.len()
    }

    pub fn is_empty(&self) -> bool {
        self.by_pair.is_empty()
    }

    pub fn contains_edge(&self, edge: EdgeId) -> bool {
        self.by_edge.contains_key(&edge)
    }

    pub fn get(&self, edge: EdgeId) -> Option<&Redex> {
        self.by_edge.get(&edge).and_then(|p| self.by_pair.get(p))
    }
}
