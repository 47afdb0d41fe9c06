//! Net isomorphism.
//!
//! Two nets are isomorphic when some bijection between their agents keeps
//! symbols, maps every port-level edge onto a port-level edge and fixes each
//! free-port name. Selections and ids play no part.
//!
//! Mapping one agent determines the image of its whole connected component
//! (port indices pin each neighbour), so the search picks an image for one
//! root per component and propagates. A component that maps onto some
//! unused component is never revisited: any other valid image is an
//! isomorphic copy, which leaves an equivalent remainder.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use crate::net::{AgentId, Net, PortRef};
use crate::signature::SymbolId;

pub fn iso_equal(a: &Net, b: &Net) -> bool {
    if a.agent_count() != b.agent_count()
        || a.edge_count() != b.edge_count()
        || a.interface_set() != b.interface_set()
        || symbol_counts(a) != symbol_counts(b)
        || free_wirings(a) != free_wirings(b)
    {
        return false;
    }
    let mut m = Matcher {
        a,
        b,
        fwd: HashMap::new(),
        bwd: HashMap::new(),
    };
    let mut by_symbol: BTreeMap<SymbolId, Vec<AgentId>> = BTreeMap::new();
    for (id, sym) in b.agents() {
        by_symbol.entry(sym).or_default().push(id);
    }
    for (x, sym) in a.agents() {
        if m.fwd.contains_key(&x) {
            continue;
        }
        let candidates = by_symbol.get(&sym).map(Vec::as_slice).unwrap_or(&[]);
        let mut found = false;
        for &y in candidates {
            if m.bwd.contains_key(&y) {
                continue;
            }
            let mut trail = Vec::new();
            if m.propagate(x, y, &mut trail) {
                found = true;
                break;
            }
            for t in trail {
                if let Some(img) = m.fwd.remove(&t) {
                    m.bwd.remove(&img);
                }
            }
        }
        if !found {
            return false;
        }
    }
    true
}

fn symbol_counts(net: &Net) -> BTreeMap<SymbolId, usize> {
    let mut out = BTreeMap::new();
    for (_, s) in net.agents() {
        *out.entry(s).or_insert(0) += 1;
    }
    out
}

fn free_wirings(net: &Net) -> BTreeSet<(String, String)> {
    net.edges()
        .filter_map(|(_, e)| match (&e.0, &e.1) {
            (PortRef::Free(x), PortRef::Free(y)) => Some(if x <= y {
                (x.clone(), y.clone())
            } else {
                (y.clone(), x.clone())
            }),
            _ => None,
        })
        .collect()
}

struct Matcher<'n> {
    a: &'n Net,
    b: &'n Net,
    fwd: HashMap<AgentId, AgentId>,
    bwd: HashMap<AgentId, AgentId>,
}

impl Matcher<'_> {
    fn propagate(&mut self, x: AgentId, y: AgentId, trail: &mut Vec<AgentId>) -> bool {
        let mut stack = vec![(x, y)];
        while let Some((x, y)) = stack.pop() {
            match (self.fwd.get(&x), self.bwd.get(&y)) {
                (Some(img), _) if *img == y => continue,
                (Some(_), _) | (None, Some(_)) => return false,
                (None, None) => {}
            }
            if self.a.symbol_of(x) != self.b.symbol_of(y) {
                return false;
            }
            self.fwd.insert(x, y);
            self.bwd.insert(y, x);
            trail.push(x);
            let arity = self.a.ports_of(x).map_or(0, |p| p.len());
            for port in 0..arity {
                let pa = self.a.peer(&PortRef::agent(x, port));
                let pb = self.b.peer(&PortRef::agent(y, port));
                match (pa, pb) {
                    (None, None) => {}
                    (Some(PortRef::Free(n)), Some(PortRef::Free(m))) if n == m => {}
                    (
                        Some(PortRef::Agent { agent: x2, port: i }),
                        Some(PortRef::Agent { agent: y2, port: j }),
                    ) if i == j => {
                        // self-wires must map onto self-wires
                        if (*x2 == x) != (*y2 == y) {
                            return false;
                        }
                        stack.push((*x2, *y2));
                    }
                    _ => return false,
                }
            }
        }
        true
    }
}
