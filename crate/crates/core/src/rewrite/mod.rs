//! Interaction rules, rule sets, rule application and incremental redex
//! tracking.

mod apply;
mod redexes;
mod rule;

use std::collections::HashMap;

pub use apply::{apply_rule, normalize, revert, NormalizeError, RewriteDelta, RewriteError};
pub use redexes::RedexSet;
pub use rule::{validate_rule, InteractionRule, LhsPort, MapTarget, Side};

use crate::report::{Violation, ViolationCode};
use crate::signature::{Signature, SymbolId};

/// Rules indexed by their (unordered) active pair. At most one rule per
/// pair.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct RuleSet {
    rules: Vec<InteractionRule>,
    by_pair: HashMap<(SymbolId, SymbolId), usize>,
    by_name: HashMap<String, usize>,
}

/// Rejects duplicate active pairs and duplicate rule names.
pub fn validate_ruleset(rules: &[InteractionRule]) -> Vec<Violation> {
    let mut out = Vec::new();
    let mut pairs: HashMap<(SymbolId, SymbolId), &str> = HashMap::new();
    let mut names: HashMap<&str, ()> = HashMap::new();
    for rule in rules {
        if let Some(first) = pairs.insert(rule.lhs(), rule.name()) {
            out.push(
                Violation::new(
                    ViolationCode::DuplicatePair,
                    format!("rules `{first}` and `{}` share an active pair", rule.name()),
                )
                .in_subject(rule.name()),
            );
        }
        if names.insert(rule.name(), ()).is_some() {
            out.push(
                Violation::new(
                    ViolationCode::DuplicateRuleName,
                    format!("rule name `{}` used twice", rule.name()),
                )
                .in_subject(rule.name()),
            );
        }
    }
    out
}

impl RuleSet {
    /// Validates every rule against `sig` and the set as a whole.
    pub fn new(sig: &Signature, rules: Vec<InteractionRule>) -> Result<RuleSet, Vec<Violation>> {
        let mut violations: Vec<Violation> =
            rules.iter().flat_map(|r| validate_rule(sig, r)).collect();
        violations.extend(validate_ruleset(&rules));
        if !violations.is_empty() {
            return Err(violations);
        }
        let mut rules = rules;
        rules.sort_by(|a, b| a.name().cmp(b.name()));
        let by_pair = rules
            .iter()
            .enumerate()
            .map(|(i, r)| (r.lhs(), i))
            .collect();
        let by_name = rules
            .iter()
            .enumerate()
            .map(|(i, r)| (r.name().to_string(), i))
            .collect();
        Ok(RuleSet {
            rules,
            by_pair,
            by_name,
        })
    }

    pub fn empty() -> RuleSet {
        RuleSet::default()
    }

    /// The rule for an active pair, in either order.
    pub fn for_pair(&self, a: SymbolId, b: SymbolId) -> Option<&InteractionRule> {
        let key = if a <= b { (a, b) } else { (b, a) };
        self.by_pair.get(&key).map(|i| &self.rules[*i])
    }

    pub fn get(&self, name: &str) -> Option<&InteractionRule> {
        self.by_name.get(name).map(|i| &self.rules[*i])
    }

    /// Rules sorted by name.
    pub fn iter(&self) -> impl Iterator<Item = &InteractionRule> + '_ {
        self.rules.iter()
    }

    pub fn len(&self) -> usize {
        self.rules.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rules.is_empty()
    }
}
