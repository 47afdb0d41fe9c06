//! Test helpers: unary arithmetic built through the API, and random
//! signatures, rule sets and nets.
#![allow(dead_code)]

use std::sync::Arc;

use inetc_core::rewrite::{LhsPort, MapTarget, Side};
use inetc_core::{AgentId, InteractionRule, Net, PortRef, RuleSet, Signature};
use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub use rand::SeedableRng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn unary_sig() -> Arc<Signature> {
    Arc::new(Signature::new([("Z", 0), ("S", 1), ("add", 2)]).unwrap())
}

/// `add >< Z` and `add >< S`, built without the text format.
pub fn unary_rules(sig: &Arc<Signature>) -> RuleSet {
    let add = sig.lookup("add").unwrap();
    let s = sig.lookup("S").unwrap();
    let z = sig.lookup("Z").unwrap();
    let add_z = InteractionRule::new(
        "addZ",
        (add, z),
        Net::new(sig.clone()),
        vec![(
            LhsPort::new(Side::Left, 1),
            MapTarget::Lhs(LhsPort::new(Side::Left, 2)),
        )],
    );
    let mut rhs = Net::new(sig.clone());
    let ns = rhs.add_agent("S").unwrap();
    let na = rhs.add_agent("add").unwrap();
    rhs.connect(PortRef::agent(ns, 1), PortRef::agent(na, 1))
        .unwrap();
    let add_s = InteractionRule::new(
        "addS",
        (add, s),
        rhs,
        vec![
            (
                LhsPort::new(Side::Left, 1),
                MapTarget::Rhs { agent: ns, port: 0 },
            ),
            (
                LhsPort::new(Side::Left, 2),
                MapTarget::Rhs { agent: na, port: 2 },
            ),
            (
                LhsPort::new(Side::Right, 1),
                MapTarget::Rhs { agent: na, port: 0 },
            ),
        ],
    );
    RuleSet::new(sig, vec![add_z, add_s]).unwrap()
}

/// Adds `S^n(Z)` to `net`; returns the principal port of its outermost
/// agent.
pub fn numeral(net: &mut Net, n: usize) -> PortRef {
    let z = net.add_agent("Z").unwrap();
    let mut top = PortRef::agent(z, 0);
    for _ in 0..n {
        let s = net.add_agent("S").unwrap();
        net.connect(PortRef::agent(s, 1), top).unwrap();
        top = PortRef::agent(s, 0);
    }
    top
}

/// `add(S^n(Z), S^m(Z))` with the result on free port `out`.
pub fn addition(sig: &Arc<Signature>, n: usize, m: usize) -> Net {
    let mut net = Net::new(sig.clone());
    let a = net.add_agent("add").unwrap();
    let x = numeral(&mut net, n);
    let y = numeral(&mut net, m);
    net.connect(PortRef::agent(a, 0), x).unwrap();
    net.connect(PortRef::agent(a, 2), y).unwrap();
    net.connect(PortRef::agent(a, 1), PortRef::free("out"))
        .unwrap();
    net
}

/// `S^n(Z)` on free port `out`.
pub fn numeral_net(sig: &Arc<Signature>, n: usize) -> Net {
    let mut net = Net::new(sig.clone());
    let top = numeral(&mut net, n);
    net.connect(top, PortRef::free("out")).unwrap();
    net
}

/// Reference unary addition: the value and the number of rule firings
/// taken by the add–S / add–Z rules.
pub fn reference_add(n: usize, m: usize) -> (usize, usize) {
    if n == 0 {
        (m, 1)
    } else {
        let (v, steps) = reference_add(n - 1, m);
        (v + 1, steps + 1)
    }
}

/// Reads a numeral back off the net: follows `out` through S agents to Z.
pub fn read_numeral(net: &Net) -> Option<usize> {
    let mut at = net.peer(&PortRef::free("out"))?.clone();
    let mut n = 0;
    loop {
        let PortRef::Agent { agent, port: 0 } = at else {
            return None;
        };
        match net.symbol_name(agent)? {
            "Z" => return (net.agent_count() == n + 1).then_some(n),
            "S" => {
                n += 1;
                at = net.peer(&PortRef::agent(agent, 1))?.clone();
            }
            _ => return None,
        }
    }
}

/// Five symbols of mixed arity.
pub fn random_sig() -> Arc<Signature> {
    Arc::new(Signature::new([("a", 0), ("b", 1), ("c", 2), ("d", 2), ("e", 3)]).unwrap())
}

enum Slot {
    Lhs(LhsPort),
    Rhs(AgentId, usize),
}

/// One randomly wired rule for every unordered pair of symbols. Each
/// right-hand side has at most `max_rhs` agents; all ports are paired up
/// at random among the interface ports and the right-hand ports.
pub fn random_rules(sig: &Arc<Signature>, rng: &mut impl Rng, max_rhs: usize) -> RuleSet {
    let symbols: Vec<_> = sig.iter().map(|(id, _, _)| id).collect();
    let mut rules = Vec::new();
    for (i, &l) in symbols.iter().enumerate() {
        for &r in &symbols[i..] {
            let mut rhs = Net::new(sig.clone());
            let mut slots = Vec::new();
            for side in [Side::Left, Side::Right] {
                let sym = if side == Side::Left { l } else { r };
                for p in 1..=sig.arity(sym) {
                    slots.push(Slot::Lhs(LhsPort::new(side, p)));
                }
            }
            let k = rng.gen_range(0..=max_rhs);
            for _ in 0..k {
                let sym = *symbols.choose(rng).unwrap();
                let id = rhs.add_agent_of(sym).unwrap();
                for p in 0..=sig.arity(sym) {
                    slots.push(Slot::Rhs(id, p));
                }
            }
            if slots.len() % 2 == 1 {
                // An arity-0 agent adds a single port.
                let id = rhs.add_agent("a").unwrap();
                slots.push(Slot::Rhs(id, 0));
            }
            slots.shuffle(rng);
            let mut mapping = Vec::new();
            while let (Some(x), Some(y)) = (slots.pop(), slots.pop()) {
                match (x, y) {
                    (Slot::Lhs(p), Slot::Lhs(q)) => mapping.push((p, MapTarget::Lhs(q))),
                    (Slot::Lhs(p), Slot::Rhs(a, n)) | (Slot::Rhs(a, n), Slot::Lhs(p)) => {
                        mapping.push((p, MapTarget::Rhs { agent: a, port: n }))
                    }
                    (Slot::Rhs(a, n), Slot::Rhs(b, m)) => {
                        rhs.connect(PortRef::agent(a, n), PortRef::agent(b, m))
                            .unwrap();
                    }
                }
            }
            let name = format!("r_{}_{}", sig.name(l), sig.name(r));
            rules.push(InteractionRule::new(name, (l, r), rhs, mapping));
        }
    }
    RuleSet::new(sig, rules).expect("generated rules are valid")
}

/// A net with `pairs` active pairs plus `extra` further agents, every port
/// wired. Some ports go to free ports `f0`, `f1`, ...
pub fn random_net(sig: &Arc<Signature>, rng: &mut impl Rng, pairs: usize, extra: usize) -> Net {
    let symbols: Vec<_> = sig.iter().map(|(id, _, _)| id).collect();
    let mut net = Net::new(sig.clone());
    let mut open = Vec::new();
    for _ in 0..pairs {
        let x = net.add_agent_of(*symbols.choose(rng).unwrap()).unwrap();
        let y = net.add_agent_of(*symbols.choose(rng).unwrap()).unwrap();
        net.connect(PortRef::agent(x, 0), PortRef::agent(y, 0))
            .unwrap();
        for a in [x, y] {
            for p in 1..net.ports_of(a).unwrap().len() {
                open.push(PortRef::agent(a, p));
            }
        }
    }
    for _ in 0..extra {
        let x = net.add_agent_of(*symbols.choose(rng).unwrap()).unwrap();
        for p in 0..net.ports_of(x).unwrap().len() {
            open.push(PortRef::agent(x, p));
        }
    }
    open.shuffle(rng);
    let mut free = 0;
    while let Some(x) = open.pop() {
        let y = if open.is_empty() || rng.gen_bool(0.15) {
            free += 1;
            PortRef::free(format!("f{}", free - 1))
        } else {
            open.pop().unwrap()
        };
        net.connect(x, y).unwrap();
    }
    net
}

/// The rule for a redex's symbol pair.
pub fn rule_for<'a>(rules: &'a RuleSet, redex: &inetc_core::Redex) -> &'a InteractionRule {
    rules.for_pair(redex.symbols.0, redex.symbols.1).unwrap()
}
