//! Graphviz output.

use std::fmt::Write;

use crate::net::{Net, PortRef};

fn node(end: &PortRef) -> String {
    match end {
        PortRef::Agent { agent, .. } => format!("n{}", agent.0),
        PortRef::Free(name) => format!("\"free:{name}\""),
    }
}

fn port_label(end: &PortRef) -> Option<usize> {
    match end {
        PortRef::Agent { port, .. } => Some(*port),
        PortRef::Free(_) => None,
    }
}

fn arrow(end: &PortRef) -> &'static str {
    if end.is_principal() {
        "normal"
    } else {
        "none"
    }
}

/// Undirected graph with one node per agent and per free port. Edge ends
/// carry their port numbers; principal ends get an arrowhead.
pub fn export_dot(net: &Net) -> String {
    let mut out = String::from("graph inet {\n");
    for (id, _) in net.agents() {
        let _ = writeln!(
            out,
            "  n{0} [label=\"n{0}:{1}\"];",
            id.0,
            net.symbol_name(id).unwrap_or("?")
        );
    }
    for name in net.interface() {
        let _ = writeln!(out, "  \"free:{name}\" [shape=box, label=\"{name}\"];");
    }
    for (_, edge) in net.edges() {
        let (a, b) = (&edge.0, &edge.1);
        let mut attrs = Vec::new();
        if let Some(p) = port_label(a) {
            attrs.push(format!("taillabel=\"{p}\""));
        }
        if let Some(p) = port_label(b) {
            attrs.push(format!("headlabel=\"{p}\""));
        }
        attrs.push("dir=both".into());
        attrs.push(format!("arrowtail={}", arrow(a)));
        attrs.push(format!("arrowhead={}", arrow(b)));
        let _ = writeln!(out, "  {} -- {} [{}];", node(a), node(b), attrs.join(", "));
    }
    out.push_str("}\n");
    out
}
