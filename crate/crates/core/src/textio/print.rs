//! Canonical text output for documents and strategy expressions.

use std::fmt::Write;

use crate::net::{AgentId, Net, PortRef};
use crate::rewrite::{InteractionRule, LhsPort, MapTarget, Side};
use crate::signature::Signature;
use crate::strategy::{Location, Selector, Strategy};
use crate::trace::Document;

/// Prints a document in canonical form: signature sorted by symbol, rules
/// by name, then nets and strategies by name. Agents are renamed `n<id>`.
pub fn print_document(doc: &Document) -> String {
    print_document_with_base(doc, doc.m0())
}

/// Like [`print_document`] but with `base` in place of the base model.
pub fn print_document_with_base(doc: &Document, base: &Net) -> String {
    let mut out = String::new();
    print_signature(&mut out, doc.signature());
    for rule in doc.rules().iter() {
        out.push('\n');
        print_rule(&mut out, doc.signature(), rule);
    }
    for (name, net) in doc.nets() {
        out.push('\n');
        let net = if name == doc.base_name() { base } else { net };
        print_net(&mut out, name, net);
    }
    if !doc.strategies().is_empty() {
        out.push('\n');
        for (name, expr) in doc.strategies() {
            let _ = writeln!(out, "strategy {name} = {};", print_strategy(expr));
        }
    }
    out
}

fn print_signature(out: &mut String, sig: &Signature) {
    out.push_str("signature {\n");
    for (_, name, arity) in sig.iter() {
        let _ = writeln!(out, "  {name}: {arity};");
    }
    out.push_str("}\n");
}

fn agent_name(id: AgentId) -> String {
    format!("n{}", id.0)
}

fn endpoint(end: &PortRef) -> String {
    match end {
        PortRef::Agent { agent, port } => format!("{}.{port}", agent_name(*agent)),
        PortRef::Free(name) => format!("free {name}"),
    }
}

fn print_body(out: &mut String, net: &Net, indent: &str) {
    let free = net.interface();
    if !free.is_empty() {
        let _ = writeln!(out, "{indent}free {};", free.join(", "));
    }
    for (id, _) in net.agents() {
        let _ = writeln!(
            out,
            "{indent}{}: {};",
            agent_name(id),
            net.symbol_name(id).unwrap_or("?")
        );
    }
    for (_, edge) in net.edges() {
        let _ = writeln!(
            out,
            "{indent}wire {} - {};",
            endpoint(&edge.0),
            endpoint(&edge.1)
        );
    }
}

/// One `net NAME { ... }` block.
pub fn print_net(out: &mut String, name: &str, net: &Net) {
    let _ = writeln!(out, "net {name} {{");
    print_body(out, net, "  ");
    for (sel, members) in net.selections() {
        let _ = write!(out, "  named {sel} {{");
        for m in members {
            let _ = write!(out, " {};", agent_name(*m));
        }
        out.push_str(" }\n");
    }
    out.push_str("}\n");
}

fn print_rule(out: &mut String, sig: &Signature, rule: &InteractionRule) {
    let (l, r) = rule.lhs();
    let (ln, rn) = (sig.name(l), sig.name(r));
    let _ = writeln!(out, "rule {} : {ln} >< {rn} {{", rule.name());
    out.push_str("  rhs {\n");
    print_body(out, rule.rhs(), "    ");
    out.push_str("  }\n");
    let lhs = |p: LhsPort| match p.side {
        Side::Left => format!("L.{ln}.{}", p.port),
        Side::Right if l == r => format!("L.{rn}'.{}", p.port),
        Side::Right => format!("L.{rn}.{}", p.port),
    };
    for (src, tgt) in rule.mapping() {
        let tgt = match tgt {
            MapTarget::Rhs { agent, port } => format!("{}.{port}", agent_name(*agent)),
            MapTarget::Lhs(q) => lhs(*q),
        };
        let _ = writeln!(out, "  map {} -> {tgt};", lhs(*src));
    }
    out.push_str("}\n");
}

pub fn print_selector(s: &Selector) -> String {
    match s {
        Selector::All => "all".into(),
        Selector::Named(n) => n.clone(),
        Selector::Interface(inner) => format!("interface({})", print_selector(inner)),
        Selector::Successors(inner) => format!("successors({})", print_selector(inner)),
    }
}

pub fn print_location(l: &Location) -> String {
    format!("({},{})", print_selector(&l.selector), l.depth.as_i64())
}

const PAR: u8 = 0;
const OR: u8 = 1;
const SEQ: u8 = 2;
const POSTFIX: u8 = 3;

/// Prints with the fewest parentheses that parse back to the same tree.
pub fn print_strategy(s: &Strategy) -> String {
    let mut out = String::new();
    top(&mut out, s);
    out
}

fn top(out: &mut String, s: &Strategy) {
    match s {
        Strategy::At(inner, locs) if locs.len() != 1 => {
            if level(inner) < POSTFIX {
                out.push('(');
                top(out, inner);
                out.push(')');
            } else {
                top(out, inner);
            }
            bracket(out, locs);
        }
        _ => expr(out, s, PAR),
    }
}

fn bracket(out: &mut String, locs: &[Location]) {
    out.push('[');
    for (i, l) in locs.iter().enumerate() {
        if i > 0 {
            out.push(',');
        }
        out.push_str(&print_location(l));
    }
    out.push(']');
}

fn level(s: &Strategy) -> u8 {
    match s {
        Strategy::Par(..) => PAR,
        Strategy::Or(..) => OR,
        Strategy::Seq(..) => SEQ,
        _ => POSTFIX,
    }
}

/// Prints `s` where the context requires at least precedence `min`.
fn expr(out: &mut String, s: &Strategy, min: u8) {
    let wrap = match s {
        Strategy::At(_, locs) if locs.len() != 1 => true,
        _ => level(s) < min,
    };
    if wrap {
        out.push('(');
        top(out, s);
        out.push(')');
        return;
    }
    match s {
        Strategy::Id => out.push_str("id"),
        Strategy::Fail => out.push_str("fail"),
        Strategy::Apply { rule, location } => {
            out.push_str(rule);
            if let Some(l) = location {
                out.push_str(&print_location(l));
            }
        }
        Strategy::Par(a, b) => binary(out, a, " || ", b, PAR),
        Strategy::Or(a, b) => binary(out, a, " or ", b, OR),
        Strategy::Seq(a, b) => binary(out, a, ";", b, SEQ),
        Strategy::Star(a) => {
            expr(out, a, POSTFIX);
            out.push('*');
        }
        Strategy::At(inner, locs) => {
            postfix_operand(out, inner);
            out.push_str(&print_location(&locs[0]));
        }
    }
}

fn binary(out: &mut String, a: &Strategy, op: &str, b: &Strategy, lvl: u8) {
    expr(out, a, lvl);
    out.push_str(op);
    expr(out, b, lvl + 1);
}

/// Operand of a single location. A bare unlocated rule name
/// followed by a location would read as a located rule, so it is wrapped.
fn postfix_operand(out: &mut String, s: &Strategy) {
    match s {
        Strategy::Apply {
            rule,
            location: None,
        } => {
            out.push('(');
            out.push_str(rule);
            out.push(')');
        }
        _ => expr(out, s, POSTFIX),
    }
}
