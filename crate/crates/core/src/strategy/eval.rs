use std::collections::{BTreeSet, HashMap};

use thiserror::Error;

use super::location::{match_rule_at, resolve_location};
use super::{specialize, Location, Strategy};
use crate::net::{AgentId, Net};
use crate::rewrite::{apply_rule, revert, RedexSet, RewriteDelta, RuleSet};

/// Default bound on the iterations of a single `*`.
pub const DEFAULT_STAR_CAP: u64 = 1_000_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct EvalConfig {
    /// An iteration must not succeed more than this many times in a row.
    pub star_cap: u64,
}

impl Default for EvalConfig {
    fn default() -> Self {
        EvalConfig {
            star_cap: DEFAULT_STAR_CAP,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EvalError {
    #[error("iteration exceeded {0} steps")]
    StepLimitExceeded(u64),
    #[error("unknown rule `{0}`")]
    UnknownRule(String),
    #[error("unknown selection `{0}`")]
    UnknownSelection(String),
    #[error("rule `{0}` is applied without a location")]
    UnlocatedRule(String),
}

/// One rule firing: the rule, the consumed pair (smaller id first) and the
/// agents the right-hand side created.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Rewrite {
    pub rule: String,
    pub agents: (AgentId, AgentId),
    pub created: Vec<AgentId>,
}

/// A committed step. Holds one rewrite, or several for a parallel
/// composition applied atomically.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Step {
    pub rewrites: Vec<Rewrite>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Status {
    Success,
    Failure,
}

impl Status {
    pub fn as_str(self) -> &'static str {
        match self {
            Status::Success => "success",
            Status::Failure => "failure",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Outcome {
    pub status: Status,
    pub steps: Vec<Step>,
}

impl Outcome {
    pub fn is_success(&self) -> bool {
        self.status == Status::Success
    }

    pub fn rewrite_count(&self) -> usize {
        self.steps.iter().map(|s| s.rewrites.len()).sum()
    }
}

/// Evaluates `expr` on `net`, keeping `redexes` in sync.
///
/// On failure, and on error, the net is restored to exactly its state at
/// entry. Composite strategies are transactional: a failing `S1;S2`
/// undoes `S1`, so the second branch of an `or` always starts from the
/// state the `or` was entered with.
pub fn eval(
    net: &mut Net,
    redexes: &mut RedexSet,
    rules: &RuleSet,
    expr: &Strategy,
    config: &EvalConfig,
) -> Result<Outcome, EvalError> {
    let mut m = Machine {
        net,
        redexes,
        rules,
        config,
        journal: Vec::new(),
        steps: Vec::new(),
    };
    match m.run(expr) {
        Ok(true) => Ok(Outcome {
            status: Status::Success,
            steps: m.steps,
        }),
        Ok(false) => {
            m.rollback(Mark::default());
            Ok(Outcome {
                status: Status::Failure,
                steps: Vec::new(),
            })
        }
        Err(e) => {
            m.rollback(Mark::default());
            Err(e)
        }
    }
}

#[derive(Clone, Copy, Debug, Default)]
struct Mark {
    journal: usize,
    steps: usize,
}

struct Machine<'a> {
    net: &'a mut Net,
    redexes: &'a mut RedexSet,
    rules: &'a RuleSet,
    config: &'a EvalConfig,
    journal: Vec<RewriteDelta>,
    steps: Vec<Step>,
}

impl Machine<'_> {
    fn mark(&self) -> Mark {
        Mark {
            journal: self.journal.len(),
            steps: self.steps.len(),
        }
    }

    fn rollback(&mut self, mark: Mark) {
        while self.journal.len() > mark.journal {
            let delta = self.journal.pop().expect("nonempty journal");
            let inverse = revert(self.net, &delta);
            self.redexes.update(&inverse, self.net);
        }
        self.steps.truncate(mark.steps);
    }

    fn run(&mut self, expr: &Strategy) -> Result<bool, EvalError> {
        match expr {
            Strategy::Id => Ok(true),
            Strategy::Fail => Ok(false),
            Strategy::Apply { rule, location } => {
                let location = location
                    .as_ref()
                    .ok_or_else(|| EvalError::UnlocatedRule(rule.clone()))?;
                self.apply_at(rule, location)
            }
            Strategy::Seq(a, b) => {
                let mark = self.mark();
                if self.run(a)? && self.run(b)? {
                    return Ok(true);
                }
                self.rollback(mark);
                Ok(false)
            }
            Strategy::Or(a, b) => {
                if self.run(a)? {
                    return Ok(true);
                }
                self.run(b)
            }
            Strategy::Star(body) => {
                let mut iterations: u64 = 0;
                loop {
                    let mark = self.mark();
                    if !self.run(body)? {
                        self.rollback(mark);
                        return Ok(true);
                    }
                    iterations += 1;
                    if iterations > self.config.star_cap {
                        return Err(EvalError::StepLimitExceeded(self.config.star_cap));
                    }
                }
            }
            Strategy::Par(a, b) => self.parallel(a, b),
            Strategy::At(inner, locations) => {
                let mark = self.mark();
                for location in locations {
                    let local = specialize(inner, Some(location)).map_err(
                        |super::ElaborateError::UnlocatedRule(r)| EvalError::UnlocatedRule(r),
                    )?;
                    if !self.run(&local)? {
                        self.rollback(mark);
                        return Ok(false);
                    }
                }
                Ok(true)
            }
        }
    }

    fn apply_at(&mut self, rule_name: &str, location: &Location) -> Result<bool, EvalError> {
        let rule = self
            .rules
            .get(rule_name)
            .ok_or_else(|| EvalError::UnknownRule(rule_name.to_string()))?;
        let region = resolve_location(self.net, location)?;
        let Some(redex) = match_rule_at(self.net, self.redexes, rule, &region) else {
            return Ok(false);
        };
        let delta = apply_rule(self.net, &redex, rule).expect("matched redex is live");
        self.redexes.update(&delta, self.net);
        self.steps.push(Step {
            rewrites: vec![Rewrite {
                rule: rule_name.to_string(),
                agents: redex.agents(),
                created: delta.added_agents.clone(),
            }],
        });
        self.journal.push(delta);
        Ok(true)
    }

    /// Both branches are evaluated against the entry net. They conflict
    /// when they consume a common agent of that net; otherwise the first
    /// branch's rewrites and then the second's are replayed and recorded as
    /// one step.
    fn parallel(&mut self, a: &Strategy, b: &Strategy) -> Result<bool, EvalError> {
        let mark = self.mark();
        let entry_counter = self.net.next_agent_id();

        let trial = |m: &mut Self, s: &Strategy| -> Result<Option<Vec<Rewrite>>, EvalError> {
            let ok = m.run(s)?;
            let rewrites = m.steps[mark.steps..]
                .iter()
                .flat_map(|st| st.rewrites.iter().cloned())
                .collect();
            m.rollback(mark);
            Ok(ok.then_some(rewrites))
        };
        let Some(first) = trial(self, a)? else {
            return Ok(false);
        };
        let Some(second) = trial(self, b)? else {
            return Ok(false);
        };

        let consumed = |rs: &[Rewrite]| -> BTreeSet<AgentId> {
            rs.iter()
                .flat_map(|r| [r.agents.0, r.agents.1])
                .filter(|x| *x < entry_counter)
                .collect()
        };
        if !consumed(&first).is_disjoint(&consumed(&second)) {
            return Ok(false);
        }

        let mut applied = Vec::new();
        for branch in [&first, &second] {
            let mut renaming: HashMap<AgentId, AgentId> = HashMap::new();
            for r in branch {
                match self.replay(r, &mut renaming) {
                    Some(done) => applied.push(done),
                    None => {
                        self.rollback(mark);
                        return Ok(false);
                    }
                }
            }
        }
        if !applied.is_empty() {
            self.steps.push(Step { rewrites: applied });
        }
        Ok(true)
    }

    fn replay(
        &mut self,
        rewrite: &Rewrite,
        renaming: &mut HashMap<AgentId, AgentId>,
    ) -> Option<Rewrite> {
        let rename = |x: AgentId| renaming.get(&x).copied().unwrap_or(x);
        let (x, y) = (rename(rewrite.agents.0), rename(rewrite.agents.1));
        let redex = self.net.redex_of_agent(x).filter(|r| r.involves(y))?;
        let rule = self.rules.get(&rewrite.rule)?;
        let delta = apply_rule(self.net, &redex, rule).ok()?;
        self.redexes.update(&delta, self.net);
        for (old, new) in rewrite.created.iter().zip(&delta.added_agents) {
            renaming.insert(*old, *new);
        }
        let done = Rewrite {
            rule: rewrite.rule.clone(),
            agents: redex.agents(),
            created: delta.added_agents.clone(),
        };
        self.journal.push(delta);
        Some(done)
    }
}
