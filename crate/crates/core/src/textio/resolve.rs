//! Turns a positioned syntax tree into a validated [`Document`].

use std::collections::{BTreeMap, HashMap, HashSet};
use std::sync::Arc;

use super::lexer::Pos;
use super::parse::{SrcBody, SrcDoc, SrcEp, SrcNamed, SrcRule};
use super::Diagnostic;
use crate::net::{AgentId, Net, NetError, PortRef};
use crate::report::Violation;
use crate::rewrite::{validate_rule, InteractionRule, LhsPort, MapTarget, RuleSet, Side};
use crate::signature::{Signature, SymbolId, MAX_ARITY};
use crate::strategy::Strategy;
use crate::trace::{check_strategy, Document, DEFAULT_BASE};

struct Resolver {
    diags: Vec<Diagnostic>,
}

impl Resolver {
    fn err(&mut self, pos: Pos, code: &str, message: impl Into<String>) {
        self.diags.push(Diagnostic::resolve(pos, code, message));
    }

    fn violations(&mut self, pos: Pos, vs: Vec<Violation>) {
        for v in vs {
            self.diags.push(Diagnostic::from_violation(pos, &v));
        }
    }
}

pub(crate) fn resolve(src: SrcDoc, base: &str) -> Result<Document, Vec<Diagnostic>> {
    let mut r = Resolver { diags: Vec::new() };
    let Some(sig) = signature(&mut r, &src) else {
        return Err(finish(r));
    };

    let mut nets: BTreeMap<String, Net> = BTreeMap::new();
    let mut net_pos: HashMap<String, Pos> = HashMap::new();
    let mut agent_names: HashMap<String, HashMap<String, AgentId>> = HashMap::new();
    for net in &src.nets {
        if net_pos.contains_key(&net.name) {
            r.err(
                net.pos,
                "DuplicateNet",
                format!("net `{}` defined twice", net.name),
            );
            continue;
        }
        let (built, names) = build_body(&mut r, &sig, &net.body, BodyKind::Net);
        net_pos.insert(net.name.clone(), net.pos);
        agent_names.insert(net.name.clone(), names);
        nets.insert(net.name.clone(), built);
    }
    for named in &src.named {
        match (nets.get_mut(DEFAULT_BASE), agent_names.get(DEFAULT_BASE)) {
            (Some(net), Some(names)) => add_selection(&mut r, net, names, named),
            _ => r.err(
                named.pos,
                "MissingNet",
                format!(
                    "top-level selection `{}` needs a net `{DEFAULT_BASE}`",
                    named.name
                ),
            ),
        }
    }
    for (name, net) in &nets {
        let vs = net.validate();
        r.violations(net_pos[name], vs);
    }

    let mut rules = Vec::new();
    let mut seen_pairs: HashMap<(SymbolId, SymbolId), String> = HashMap::new();
    let mut seen_names: HashSet<String> = HashSet::new();
    for src_rule in &src.rules {
        let Some(rule) = build_rule(&mut r, &sig, src_rule) else {
            continue;
        };
        let vs = validate_rule(&sig, &rule);
        if !vs.is_empty() {
            r.violations(src_rule.pos, vs);
            continue;
        }
        if !seen_names.insert(rule.name().to_string()) {
            r.err(
                src_rule.pos,
                "DuplicateRuleName",
                format!("rule name `{}` used twice", rule.name()),
            );
            continue;
        }
        if let Some(first) = seen_pairs.get(&rule.lhs()) {
            r.err(
                src_rule.pos,
                "DuplicatePair",
                format!("rules `{first}` and `{}` share an active pair", rule.name()),
            );
            continue;
        }
        seen_pairs.insert(rule.lhs(), rule.name().to_string());
        rules.push(rule);
    }
    let ruleset = RuleSet::new(&sig, rules.clone()).unwrap_or_default();

    let mut strategies: BTreeMap<String, Strategy> = BTreeMap::new();
    for (pos, name, expr) in &src.strategies {
        if strategies.contains_key(name) {
            r.err(
                *pos,
                "DuplicateStrategy",
                format!("strategy `{name}` defined twice"),
            );
            continue;
        }
        let vs = check_strategy(&ruleset, expr);
        r.violations(*pos, vs);
        strategies.insert(name.clone(), expr.clone());
    }

    if !nets.contains_key(base) {
        r.err(src.end, "MissingNet", format!("no net named `{base}`"));
    }
    if !r.diags.is_empty() {
        return Err(finish(r));
    }
    Document::with_nets(sig, rules, strategies, nets, base).map_err(|vs| {
        vs.iter()
            .map(|v| Diagnostic::from_violation(Pos { line: 1, col: 1 }, v))
            .collect()
    })
}

fn finish(mut r: Resolver) -> Vec<Diagnostic> {
    r.diags.sort_by_key(|d| (d.line, d.col));
    r.diags
}

fn signature(r: &mut Resolver, src: &SrcDoc) -> Option<Arc<Signature>> {
    let (_, entries) = match src.signatures.as_slice() {
        [] => {
            r.err(
                Pos { line: 1, col: 1 },
                "MissingSignature",
                "the document has no signature block",
            );
            return None;
        }
        [one] => one,
        [first, rest @ ..] => {
            for (pos, _) in rest {
                r.err(
                    *pos,
                    "DuplicateSignature",
                    "only one signature block is allowed",
                );
            }
            first
        }
    };
    let mut seen = HashSet::new();
    let mut ok = r.diags.is_empty();
    for (pos, name, arity) in entries {
        if !seen.insert(name.as_str()) {
            r.err(
                *pos,
                "DuplicateSymbol",
                format!("symbol `{name}` declared twice"),
            );
            ok = false;
        }
        if *arity > MAX_ARITY as u64 {
            r.err(
                *pos,
                "ArityTooLarge",
                format!("arity {arity} of `{name}` exceeds the limit of {MAX_ARITY}"),
            );
            ok = false;
        }
    }
    if !ok {
        return None;
    }
    match Signature::new(entries.iter().map(|(_, n, a)| (n.clone(), *a as usize))) {
        Ok(sig) => Some(Arc::new(sig)),
        Err(e) => {
            r.err(src.signatures[0].0, "InvalidSignature", e.to_string());
            None
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum BodyKind {
    Net,
    Rhs,
}

fn build_body(
    r: &mut Resolver,
    sig: &Arc<Signature>,
    body: &SrcBody,
    kind: BodyKind,
) -> (Net, HashMap<String, AgentId>) {
    let mut net = Net::new(sig.clone());
    let mut names: HashMap<String, AgentId> = HashMap::new();
    for (pos, agent, spos, symbol) in &body.decls {
        if names.contains_key(agent) {
            r.err(
                *pos,
                "DuplicateAgentName",
                format!("agent `{agent}` declared twice"),
            );
            continue;
        }
        match net.add_agent(symbol) {
            Ok(id) => {
                names.insert(agent.clone(), id);
            }
            Err(_) => r.err(*spos, "UnknownSymbol", format!("unknown symbol `{symbol}`")),
        }
    }
    let mut declared = HashSet::new();
    for (pos, name) in &body.frees {
        if !declared.insert(name.as_str()) {
            r.err(
                *pos,
                "FreePortRedeclared",
                format!("free port `{name}` declared twice"),
            );
            continue;
        }
        if let Err(e) = net.declare_free(name) {
            r.err(*pos, net_error_code(&e), e.to_string());
        }
    }
    if kind == BodyKind::Net {
        for (pos, a, b) in &body.wires {
            let (Some(a), Some(b)) = (
                port_ref(r, &net, &names, a, kind),
                port_ref(r, &net, &names, b, kind),
            ) else {
                continue;
            };
            if let Err(e) = net.connect(a, b) {
                r.err(*pos, net_error_code(&e), e.to_string());
            }
        }
        for named in &body.named {
            add_selection(r, &mut net, &names, named);
        }
    }
    (net, names)
}

fn port_ref(
    r: &mut Resolver,
    net: &Net,
    names: &HashMap<String, AgentId>,
    (pos, ep): &(Pos, SrcEp),
    kind: BodyKind,
) -> Option<PortRef> {
    match ep {
        SrcEp::Free(name) => Some(PortRef::free(name.clone())),
        SrcEp::Port { agent, port } => {
            let Some(id) = names.get(agent).copied() else {
                r.err(
                    *pos,
                    "UnknownAgentName",
                    format!("no agent named `{agent}`"),
                );
                return None;
            };
            let arity = net.ports_of(id).map_or(0, |p| p.len() - 1);
            match usize::try_from(*port) {
                Ok(p) if p <= arity => Some(PortRef::agent(id, p)),
                _ => {
                    let symbol = net.symbol_name(id).unwrap_or("?");
                    r.err(
                        *pos,
                        "PortOutOfRange",
                        format!("`{agent}` ({symbol}) has arity {arity}, no port {port}"),
                    );
                    None
                }
            }
        }
        SrcEp::Lhs { .. } => {
            if kind == BodyKind::Net {
                r.err(
                    *pos,
                    "LhsPortOutsideRule",
                    "left-hand ports can only be used in rules",
                );
            }
            None
        }
    }
}

fn add_selection(
    r: &mut Resolver,
    net: &mut Net,
    names: &HashMap<String, AgentId>,
    named: &SrcNamed,
) {
    if net.selection(&named.name).is_some() {
        r.err(
            named.pos,
            "DuplicateSelection",
            format!("selection `{}` defined twice", named.name),
        );
        return;
    }
    let mut members = Vec::new();
    for (pos, agent) in &named.members {
        match names.get(agent) {
            Some(id) => members.push(*id),
            None => r.err(
                *pos,
                "UnknownAgentName",
                format!("no agent named `{agent}`"),
            ),
        }
    }
    if let Err(e) = net.set_selection(&named.name, members) {
        r.err(named.pos, net_error_code(&e), e.to_string());
    }
}

fn net_error_code(e: &NetError) -> &'static str {
    match e {
        NetError::UnknownSymbol(_) => "UnknownSymbol",
        NetError::UnknownAgent(_) => "UnknownAgent",
        NetError::UnknownEdge(_) => "UnknownEdge",
        NetError::InvalidPortRef(_) => "PortOutOfRange",
        NetError::PortOccupied(_) => "PortOccupied",
        NetError::SelfEndpoint(_) => "SelfEndpoint",
        NetError::InvalidFreePortName(_) => "InvalidFreePort",
        NetError::InvalidSelectionName(_) => "BadSelection",
    }
}

enum MapEnd {
    Lhs(LhsPort),
    Rhs(AgentId, usize),
}

fn build_rule(r: &mut Resolver, sig: &Arc<Signature>, src: &SrcRule) -> Option<InteractionRule> {
    let before = r.diags.len();
    let mut lookup = |(pos, name): &(Pos, String)| {
        let s = sig.lookup(name);
        if s.is_none() {
            r.err(*pos, "UnknownSymbol", format!("unknown symbol `{name}`"));
        }
        s
    };
    let (left, right) = (lookup(&src.left), lookup(&src.right));
    let (Some(left), Some(right)) = (left, right) else {
        return None;
    };
    let empty = SrcBody::default();
    let body = src.rhs.as_ref().unwrap_or(&empty);
    let (rhs, names) = build_body(r, sig, body, BodyKind::Rhs);
    for named in &body.named {
        r.err(
            named.pos,
            "SelectionInRule",
            "right-hand nets cannot carry selections",
        );
    }
    let mut rhs = rhs;
    let mut mapping = Vec::new();

    let end = |r: &mut Resolver, rhs: &Net, ep: &(Pos, SrcEp)| -> Option<MapEnd> {
        let (pos, e) = ep;
        match e {
            SrcEp::Lhs {
                symbol,
                prime,
                port,
            } => {
                let side = lhs_side(sig, left, right, symbol, *prime);
                let Some(side) = side else {
                    r.err(
                        *pos,
                        "UnknownLhsPort",
                        format!(
                            "`L.{symbol}{}` is not a side of this rule",
                            if *prime { "'" } else { "" }
                        ),
                    );
                    return None;
                };
                let arity = sig.arity(if side == Side::Left { left } else { right });
                match usize::try_from(*port) {
                    Ok(p) if p >= 1 && p <= arity => Some(MapEnd::Lhs(LhsPort::new(side, p))),
                    _ => {
                        r.err(
                            *pos,
                            "PortOutOfRange",
                            format!("`{symbol}` has no auxiliary port {port}"),
                        );
                        None
                    }
                }
            }
            SrcEp::Free(name) => {
                r.err(
                    *pos,
                    "RhsFreePort",
                    format!("right-hand nets cannot use free port `{name}`"),
                );
                None
            }
            SrcEp::Port { .. } => match port_ref(r, rhs, &names, ep, BodyKind::Rhs)? {
                PortRef::Agent { agent, port } => Some(MapEnd::Rhs(agent, port)),
                PortRef::Free(_) => None,
            },
        }
    };

    let mut links: Vec<(Pos, MapEnd, MapEnd)> = Vec::new();
    for (pos, a, b) in body.wires.iter().chain(&src.maps) {
        if let (Some(x), Some(y)) = (end(r, &rhs, a), end(r, &rhs, b)) {
            links.push((*pos, x, y));
        }
    }
    for (pos, a, b) in links {
        match (a, b) {
            (MapEnd::Rhs(x, p), MapEnd::Rhs(y, q)) => {
                if let Err(e) = rhs.connect(PortRef::agent(x, p), PortRef::agent(y, q)) {
                    r.err(pos, net_error_code(&e), e.to_string());
                }
            }
            (MapEnd::Lhs(l), MapEnd::Rhs(x, p)) | (MapEnd::Rhs(x, p), MapEnd::Lhs(l)) => {
                mapping.push((l, MapTarget::Rhs { agent: x, port: p }));
            }
            (MapEnd::Lhs(l), MapEnd::Lhs(m)) => mapping.push((l, MapTarget::Lhs(m))),
        }
    }
    if r.diags.len() > before {
        return None;
    }
    Some(InteractionRule::new(
        src.name.clone(),
        (left, right),
        rhs,
        mapping,
    ))
}

fn lhs_side(
    sig: &Signature,
    left: SymbolId,
    right: SymbolId,
    symbol: &str,
    prime: bool,
) -> Option<Side> {
    let s = sig.lookup(symbol)?;
    if left == right {
        return (s == left).then_some(if prime { Side::Right } else { Side::Left });
    }
    match (s == left, s == right, prime) {
        (true, _, false) => Some(Side::Left),
        (_, true, false) => Some(Side::Right),
        _ => None,
    }
}
