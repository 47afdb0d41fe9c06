//! Concrete syntax: the document and strategy languages, their printers,
//! and the DOT and JSON exporters.
//!
//! A document holds one signature, any number of rules, nets, selections
//! and strategies, in any order:
//!
//! ```text
//! signature { Z: 0; S: 1; add: 2; }
//!
//! rule addZ : add >< Z {
//!   rhs { }
//!   map L.add.1 -> L.add.2;
//! }
//!
//! net main {
//!   free out;
//!   a: add;  z: Z;  y: Z;
//!   wire a.0 - z.0;
//!   wire a.1 - free out;
//!   wire a.2 - y.0;
//!   named here { a; }
//! }
//!
//! strategy go = addZ*(all,-1);
//! ```

mod dot;
mod json;
mod lexer;
mod parse;
mod print;
mod resolve;

use std::fmt;

pub use dot::export_dot;
pub use json::{
    export_trace_json, label_json, net_from_json, net_from_json_value, net_json, net_to_json,
    trace_json, AgentJson, EndpointJson, JsonError, NetJson, TraceEdgeJson, TraceJson,
};
pub use lexer::Pos;
pub use parse::{is_reserved, MAX_NESTING};
pub use print::{
    print_document, print_document_with_base, print_location, print_net, print_selector,
    print_strategy,
};

use crate::report::Violation;
use crate::strategy::Strategy;
use crate::trace::{Document, DEFAULT_BASE};

/// A positioned error. `code` is `SyntaxError` for malformed input, and
/// otherwise names the resolution or validation failure.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Diagnostic {
    pub line: usize,
    pub col: usize,
    pub code: String,
    pub message: String,
    /// For syntax errors, what would have been accepted here.
    pub expected: Vec<String>,
}

impl Diagnostic {
    pub(crate) fn syntax(pos: Pos, message: impl Into<String>, expected: Vec<String>) -> Self {
        Diagnostic {
            line: pos.line,
            col: pos.col,
            code: "SyntaxError".into(),
            message: message.into(),
            expected,
        }
    }

    pub(crate) fn resolve(pos: Pos, code: &str, message: impl Into<String>) -> Self {
        Diagnostic {
            line: pos.line,
            col: pos.col,
            code: code.into(),
            message: message.into(),
            expected: Vec::new(),
        }
    }

    pub(crate) fn from_violation(pos: Pos, v: &Violation) -> Self {
        let message = match &v.subject {
            Some(s) => format!("{} (in `{s}`)", v.message),
            None => v.message.clone(),
        };
        Diagnostic::resolve(pos, v.code.as_str(), message)
    }

    pub fn is_syntax(&self) -> bool {
        self.code == "SyntaxError"
    }
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}:{}: {}: {}",
            self.line, self.col, self.code, self.message
        )
    }
}

/// Parses and validates a document whose base model is the net `main`.
pub fn parse_document(text: &str) -> Result<Document, Vec<Diagnostic>> {
    check_document(text, DEFAULT_BASE)
}

/// Parses and validates a document with the net `base` as base model.
pub fn check_document(text: &str, base: &str) -> Result<Document, Vec<Diagnostic>> {
    let src = parse::Parser::new(text)
        .and_then(|mut p| p.document())
        .map_err(|d| vec![d])?;
    resolve::resolve(src, base)
}

/// Parses a strategy expression. Locations are not checked; see
/// [`crate::strategy::elaborate`].
pub fn parse_strategy(text: &str) -> Result<Strategy, Diagnostic> {
    parse::Parser::new(text)?.strategy_only()
}

/// A strategy given either as the name of one of the document's
/// strategies or as an expression. Returns the name when it was one.
pub fn strategy_for(doc: &Document, text: &str) -> Result<(Strategy, Option<String>), Diagnostic> {
    let trimmed = text.trim();
    if let Some(s) = doc.strategy(trimmed) {
        return Ok((s.clone(), Some(trimmed.to_string())));
    }
    parse_strategy(text).map(|s| (s, None))
}
