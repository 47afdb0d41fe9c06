//! The strategy language: located rule applications combined with
//! sequence, choice, iteration and parallel composition.
//!
//! ```text
//! S := id | fail | R(sel, depth) | S;S | S||S | S* | S or S | S[(sel, depth), ...]
//! ```

mod eval;
mod location;

use std::fmt;

use thiserror::Error;

pub use eval::{eval, EvalConfig, EvalError, Outcome, Rewrite, Status, Step, DEFAULT_STAR_CAP};
pub use location::{
    interface_selector, match_rule_at, resolve_location, resolve_selector, successors_selector,
    Region,
};

/// How far a location reaches out from its selected agents.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Depth {
    /// Follow principal-port edges this many times.
    Bounded(u32),
    /// Follow principal-port edges to a fixpoint; written `-1`.
    Unbounded,
}

impl Depth {
    /// Accepts `-1` and non-negative values.
    pub fn from_i64(d: i64) -> Option<Depth> {
        match d {
            -1 => Some(Depth::Unbounded),
            0..=0xFFFF_FFFF => Some(Depth::Bounded(d as u32)),
            _ => None,
        }
    }

    pub fn as_i64(self) -> i64 {
        match self {
            Depth::Bounded(d) => i64::from(d),
            Depth::Unbounded => -1,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Selector {
    /// A selection stored in the net.
    Named(String),
    /// Every agent of the net.
    All,
    /// Members of the inner set with a connection leaving it.
    Interface(Box<Selector>),
    /// Agents outside the inner set one principal-port edge away from it.
    Successors(Box<Selector>),
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Location {
    pub selector: Selector,
    pub depth: Depth,
}

impl Location {
    pub fn new(selector: Selector, depth: Depth) -> Self {
        Location { selector, depth }
    }

    pub fn all() -> Self {
        Location::new(Selector::All, Depth::Unbounded)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Strategy {
    Id,
    Fail,
    Apply {
        rule: String,
        location: Option<Location>,
    },
    Seq(Box<Strategy>, Box<Strategy>),
    Par(Box<Strategy>, Box<Strategy>),
    Star(Box<Strategy>),
    Or(Box<Strategy>, Box<Strategy>),
    /// The inner strategy applied at each location in turn.
    At(Box<Strategy>, Vec<Location>),
}

impl Strategy {
    pub fn apply(rule: impl Into<String>, location: Option<Location>) -> Self {
        Strategy::Apply {
            rule: rule.into(),
            location,
        }
    }

    pub fn seq(a: Strategy, b: Strategy) -> Self {
        Strategy::Seq(Box::new(a), Box::new(b))
    }

    pub fn par(a: Strategy, b: Strategy) -> Self {
        Strategy::Par(Box::new(a), Box::new(b))
    }

    pub fn or(a: Strategy, b: Strategy) -> Self {
        Strategy::Or(Box::new(a), Box::new(b))
    }

    pub fn star(a: Strategy) -> Self {
        Strategy::Star(Box::new(a))
    }

    pub fn at(a: Strategy, locations: Vec<Location>) -> Self {
        Strategy::At(Box::new(a), locations)
    }

    /// Names of all rules the expression applies, in order of appearance.
    pub fn rule_names(&self) -> Vec<&str> {
        let mut out = Vec::new();
        self.collect_rules(&mut out);
        out
    }

    fn collect_rules<'a>(&'a self, out: &mut Vec<&'a str>) {
        match self {
            Strategy::Id | Strategy::Fail => {}
            Strategy::Apply { rule, .. } => out.push(rule),
            Strategy::Seq(a, b) | Strategy::Par(a, b) | Strategy::Or(a, b) => {
                a.collect_rules(out);
                b.collect_rules(out);
            }
            Strategy::Star(a) | Strategy::At(a, _) => a.collect_rules(out),
        }
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&crate::textio::print_strategy(self))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ElaborateError {
    #[error("rule `{0}` is applied without a location")]
    UnlocatedRule(String),
}

/// Pushes factored locations down onto the rule applications they cover.
/// The innermost location wins; a location list becomes a sequence of
/// copies, one per location. Fails if some application ends up without a
/// location. The result contains no `At` nodes.
pub fn elaborate(expr: &Strategy) -> Result<Strategy, ElaborateError> {
    specialize(expr, None)
}

pub(crate) fn specialize(
    expr: &Strategy,
    outer: Option<&Location>,
) -> Result<Strategy, ElaborateError> {
    Ok(match expr {
        Strategy::Id => Strategy::Id,
        Strategy::Fail => Strategy::Fail,
        Strategy::Apply { rule, location } => match location.as_ref().or(outer) {
            Some(loc) => Strategy::apply(rule.clone(), Some(loc.clone())),
            None => return Err(ElaborateError::UnlocatedRule(rule.clone())),
        },
        Strategy::Seq(a, b) => Strategy::seq(specialize(a, outer)?, specialize(b, outer)?),
        Strategy::Par(a, b) => Strategy::par(specialize(a, outer)?, specialize(b, outer)?),
        Strategy::Or(a, b) => Strategy::or(specialize(a, outer)?, specialize(b, outer)?),
        Strategy::Star(a) => Strategy::star(specialize(a, outer)?),
        Strategy::At(inner, locations) => {
            let mut copies = locations
                .iter()
                .map(|l| specialize(inner, Some(l)))
                .collect::<Result<Vec<_>, _>>()?;
            match copies.len() {
                0 => specialize(inner, outer)?,
                _ => {
                    let mut acc = copies.pop().expect("nonempty");
                    while let Some(prev) = copies.pop() {
                        acc = Strategy::seq(prev, acc);
                    }
                    acc
                }
            }
        }
    })
}
