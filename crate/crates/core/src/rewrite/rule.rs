use std::collections::HashMap;
use std::fmt;

use crate::net::{AgentId, Net, PortRef};
use crate::report::{Violation, ViolationCode};
use crate::signature::{is_identifier, Signature, SymbolId};

/// Which agent of the active pair a left-hand-side port belongs to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Side {
    Left,
    Right,
}

/// Auxiliary port `port` (1-based) of one side of a rule's active pair.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct LhsPort {
    pub side: Side,
    pub port: usize,
}

impl LhsPort {
    pub fn new(side: Side, port: usize) -> Self {
        LhsPort { side, port }
    }

    fn swapped(self) -> Self {
        let side = match self.side {
            Side::Left => Side::Right,
            Side::Right => Side::Left,
        };
        LhsPort {
            side,
            port: self.port,
        }
    }
}

/// Where a left-hand-side interface port goes on the right-hand side.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum MapTarget {
    /// A port of an agent of the rule's right-hand net.
    Rhs { agent: AgentId, port: usize },
    /// Another interface port: the two external peers end up wired together.
    Lhs(LhsPort),
}

/// `α ⋈ β ⇒ N` together with the correspondence between the interface of
/// the active pair and the ports of `N`.
///
/// Rules are kept in canonical orientation: the left symbol never sorts
/// after the right one. Port-to-port mapping entries are stored with the
/// smaller port as source, and entries are sorted by source.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct InteractionRule {
    name: String,
    lhs: (SymbolId, SymbolId),
    rhs: Net,
    mapping: Vec<(LhsPort, MapTarget)>,
}

impl InteractionRule {
    pub fn new(
        name: impl Into<String>,
        lhs: (SymbolId, SymbolId),
        rhs: Net,
        mapping: Vec<(LhsPort, MapTarget)>,
    ) -> Self {
        let swap = lhs.0 > lhs.1;
        let flip = |p: LhsPort| if swap { p.swapped() } else { p };
        let mut mapping: Vec<(LhsPort, MapTarget)> = mapping
            .into_iter()
            .map(|(src, tgt)| {
                let src = flip(src);
                match tgt {
                    MapTarget::Lhs(q) => {
                        let q = flip(q);
                        if q < src {
                            (q, MapTarget::Lhs(src))
                        } else {
                            (src, MapTarget::Lhs(q))
                        }
                    }
                    rhs => (src, rhs),
                }
            })
            .collect();
        mapping.sort();
        let lhs = if swap { (lhs.1, lhs.0) } else { lhs };
        InteractionRule {
            name: name.into(),
            lhs,
            rhs,
            mapping,
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn lhs(&self) -> (SymbolId, SymbolId) {
        self.lhs
    }

    pub fn rhs(&self) -> &Net {
        &self.rhs
    }

    pub fn mapping(&self) -> &[(LhsPort, MapTarget)] {
        &self.mapping
    }

    pub fn side_symbol(&self, side: Side) -> SymbolId {
        match side {
            Side::Left => self.lhs.0,
            Side::Right => self.lhs.1,
        }
    }

    /// Does this rule fire on an active pair with these two symbols, in
    /// either order?
    pub fn matches(&self, a: SymbolId, b: SymbolId) -> bool {
        (a, b) == self.lhs || (b, a) == self.lhs
    }

    /// Target of `port` in the mapping, looked up from either direction.
    pub fn target_of(&self, port: LhsPort) -> Option<MapTarget> {
        self.mapping.iter().find_map(|(src, tgt)| {
            if *src == port {
                Some(*tgt)
            } else if *tgt == MapTarget::Lhs(port) {
                Some(MapTarget::Lhs(*src))
            } else {
                None
            }
        })
    }
}

impl fmt::Display for Side {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Side::Left => f.write_str("left"),
            Side::Right => f.write_str("right"),
        }
    }
}

/// Checks arities, totality and uniqueness of the interface mapping, and
/// the shape of the right-hand net.
pub fn validate_rule(sig: &Signature, rule: &InteractionRule) -> Vec<Violation> {
    use ViolationCode::*;
    let mut out = Vec::new();
    let subject = rule.name.clone();
    let mut push = |code, msg: String| out.push(Violation::new(code, msg).in_subject(&subject));

    if !is_identifier(&rule.name) {
        push(
            InvalidRuleName,
            format!("invalid rule name `{}`", rule.name),
        );
    }
    let (l, r) = rule.lhs;
    if !sig.contains(l) || !sig.contains(r) {
        push(
            UnknownSymbol,
            "active pair uses a symbol outside the signature".into(),
        );
        return out;
    }
    if rule.rhs.signature().as_ref() != sig {
        push(
            SignatureMismatch,
            "right-hand net uses another signature".into(),
        );
        return out;
    }
    let arity = |side| sig.arity(rule.side_symbol(side));
    let describe = |p: LhsPort| format!("{}.{}", sig.name(rule.side_symbol(p.side)), p.port);

    for v in rule.rhs.validate() {
        out.push(v.in_subject(&subject));
    }
    let mut push = |code, msg: String| out.push(Violation::new(code, msg).in_subject(&subject));
    if let Some(name) = rule.rhs.interface().first() {
        push(
            RhsFreePort,
            format!("right-hand net declares free port `{name}`"),
        );
    }

    let mut lhs_uses: HashMap<LhsPort, usize> = HashMap::new();
    let mut rhs_uses: HashMap<(AgentId, usize), usize> = HashMap::new();
    for (src, tgt) in &rule.mapping {
        *lhs_uses.entry(*src).or_default() += 1;
        match tgt {
            MapTarget::Lhs(q) => *lhs_uses.entry(*q).or_default() += 1,
            MapTarget::Rhs { agent, port } => {
                match rule.rhs.ports_of(*agent) {
                    None => push(
                        DanglingRef,
                        format!("mapping targets missing right-hand agent {agent}"),
                    ),
                    Some(ports) if *port >= ports.len() => push(
                        PortOutOfRange,
                        format!("mapping targets port {port} of right-hand agent {agent}"),
                    ),
                    Some(_) => {}
                }
                *rhs_uses.entry((*agent, *port)).or_default() += 1;
            }
        }
    }
    for port in lhs_uses.keys() {
        if port.port == 0 || port.port > arity(port.side) {
            push(
                PortOutOfRange,
                format!("{} side has no auxiliary port {}", port.side, port.port),
            );
        }
    }
    for side in [Side::Left, Side::Right] {
        for i in 1..=arity(side) {
            let p = LhsPort::new(side, i);
            match lhs_uses.get(&p).copied().unwrap_or(0) {
                0 => push(
                    UnmappedInterfacePort,
                    format!("interface port {} has no correspondence", describe(p)),
                ),
                1 => {}
                n => push(
                    DuplicateMapping,
                    format!("interface port {} is mapped {n} times", describe(p)),
                ),
            }
        }
    }
    for (agent, sym) in rule.rhs.agents() {
        if !sig.contains(sym) {
            continue;
        }
        for port in 0..=sig.arity(sym) {
            let wired = usize::from(rule.rhs.edge_at(&PortRef::agent(agent, port)).is_some());
            match wired + rhs_uses.get(&(agent, port)).copied().unwrap_or(0) {
                0 => push(
                    DanglingRhsPort,
                    format!(
                        "right-hand port {agent}.{port} ({}) is neither wired nor mapped",
                        sig.name(sym)
                    ),
                ),
                1 => {}
                _ => push(
                    RhsPortOverused,
                    format!("right-hand port {agent}.{port} is used more than once"),
                ),
            }
        }
    }
    out
}
