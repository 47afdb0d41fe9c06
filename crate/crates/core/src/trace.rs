//! Documents and their rewrite traces.
//!
//! A [`Document`] bundles a signature, rules, named strategies and named
//! nets; one of the nets is the base model. The trace is a tree of net
//! snapshots rooted at the base model, each edge labelled with the rewrites
//! that produced the child.

use std::collections::{BTreeMap, VecDeque};
use std::fmt;
use std::sync::Arc;

use thiserror::Error;

use crate::net::{AgentId, EdgeId, Net};
use crate::report::{Violation, ViolationCode};
use crate::rewrite::{apply_rule, InteractionRule, RedexSet, RuleSet};
use crate::signature::Signature;
use crate::strategy::{self, elaborate, EvalConfig, EvalError, Status, Step, Strategy};

/// Name of the base model when none is chosen explicitly.
pub const DEFAULT_BASE: &str = "main";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct NodeId(pub u64);

impl NodeId {
    pub const ROOT: NodeId = NodeId(0);
}

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// What produced a trace node: the rule and consumed pair of each rewrite
/// (several for a parallel step), and the strategy that ran, if any.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TraceLabel {
    pub rewrites: Vec<(String, (AgentId, AgentId))>,
    pub strategy: Option<String>,
}

impl TraceLabel {
    pub fn single(rule: &str, agents: (AgentId, AgentId)) -> Self {
        TraceLabel {
            rewrites: vec![(rule.to_string(), agents)],
            strategy: None,
        }
    }

    fn from_step(step: &Step, strategy: Option<&str>) -> Self {
        TraceLabel {
            rewrites: step
                .rewrites
                .iter()
                .map(|r| (r.rule.clone(), r.agents))
                .collect(),
            strategy: strategy.map(str::to_string),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
struct TraceNode {
    net: Arc<Net>,
    parent: Option<(NodeId, TraceLabel)>,
    children: Vec<NodeId>,
    depth: usize,
}

/// A read-only view of one recorded state.
#[derive(Clone, Copy, Debug)]
pub struct NodeView<'a> {
    pub id: NodeId,
    pub net: &'a Arc<Net>,
    pub parent: Option<NodeId>,
    pub label: Option<&'a TraceLabel>,
    pub children: &'a [NodeId],
    pub depth: usize,
}

/// Tree of recorded states. Nodes are never modified or removed once
/// recorded; ids are assigned in creation order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TraceTree {
    nodes: Vec<TraceNode>,
}

impl TraceTree {
    fn new(root: Net) -> Self {
        TraceTree {
            nodes: vec![TraceNode {
                net: Arc::new(root),
                parent: None,
                children: Vec::new(),
                depth: 0,
            }],
        }
    }

    pub fn root(&self) -> NodeId {
        NodeId::ROOT
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn get(&self, id: NodeId) -> Option<NodeView<'_>> {
        let node = self.nodes.get(usize::try_from(id.0).ok()?)?;
        Some(NodeView {
            id,
            net: &node.net,
            parent: node.parent.as_ref().map(|(p, _)| *p),
            label: node.parent.as_ref().map(|(_, l)| l),
            children: &node.children,
            depth: node.depth,
        })
    }

    pub fn nodes(&self) -> impl Iterator<Item = NodeView<'_>> + '_ {
        (0..self.nodes.len() as u64).filter_map(|i| self.get(NodeId(i)))
    }

    /// (parent, child, label) for every non-root node, in creation order.
    pub fn edges(&self) -> impl Iterator<Item = (NodeId, NodeId, &TraceLabel)> + '_ {
        self.nodes
            .iter()
            .enumerate()
            .filter_map(|(i, n)| n.parent.as_ref().map(|(p, l)| (*p, NodeId(i as u64), l)))
    }

    fn push(&mut self, parent: NodeId, label: TraceLabel, net: Net) -> NodeId {
        let id = NodeId(self.nodes.len() as u64);
        let depth = self.nodes[parent.0 as usize].depth + 1;
        self.nodes.push(TraceNode {
            net: Arc::new(net),
            parent: Some((parent, label)),
            children: Vec::new(),
            depth,
        });
        self.nodes[parent.0 as usize].children.push(id);
        id
    }

    /// Checks the tree shape: one root, every other node has exactly one
    /// parent listing it as a child, and everything is reachable.
    pub fn check(&self) -> Result<(), String> {
        let Some(root) = self.nodes.first() else {
            return Err("trace has no root".into());
        };
        if root.parent.is_some() {
            return Err("root has a parent".into());
        }
        for (i, node) in self.nodes.iter().enumerate().skip(1) {
            let Some((p, _)) = &node.parent else {
                return Err(format!("node {i} has no parent"));
            };
            let parent = self
                .nodes
                .get(p.0 as usize)
                .ok_or_else(|| format!("node {i} has missing parent {p}"))?;
            if p.0 as usize >= i {
                return Err(format!("node {i} was created before its parent {p}"));
            }
            if parent.children.iter().filter(|c| c.0 as usize == i).count() != 1 {
                return Err(format!("parent {p} does not list node {i} exactly once"));
            }
            if node.depth != parent.depth + 1 {
                return Err(format!("node {i} has inconsistent depth"));
            }
        }
        let mut seen = vec![false; self.nodes.len()];
        let mut queue = VecDeque::from([0usize]);
        let mut reached = 0;
        while let Some(i) = queue.pop_front() {
            if std::mem::replace(&mut seen[i], true) {
                return Err(format!("node {i} reached twice"));
            }
            reached += 1;
            for c in &self.nodes[i].children {
                queue.push_back(c.0 as usize);
            }
        }
        if reached != self.nodes.len() {
            return Err(format!(
                "{} of {} nodes reachable from the root",
                reached,
                self.nodes.len()
            ));
        }
        if self.edges().count() + 1 != self.nodes.len() {
            return Err("edge count is not node count minus one".into());
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TraceError {
    #[error("unknown trace node {0}")]
    UnknownNode(NodeId),
    #[error("edge {0} is not an active pair of this node")]
    StaleRedex(EdgeId),
    #[error("no rule for the active pair on edge {0}")]
    NoRuleForPair(EdgeId),
    #[error("unknown strategy `{0}`")]
    UnknownStrategy(String),
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error("the base model can only be edited before the trace grows")]
    TraceNotPristine,
    #[error("invalid net: {}", .0.first().map(|v| v.to_string()).unwrap_or_default())]
    InvalidNet(Vec<Violation>),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Document {
    signature: Arc<Signature>,
    rules: RuleSet,
    strategies: BTreeMap<String, Strategy>,
    nets: BTreeMap<String, Net>,
    base: String,
    trace: TraceTree,
}

impl Document {
    /// A document whose only net is the base model `m0`, named `main`.
    pub fn new(
        signature: Arc<Signature>,
        rules: Vec<InteractionRule>,
        strategies: BTreeMap<String, Strategy>,
        m0: Net,
    ) -> Result<Document, Vec<Violation>> {
        let nets = BTreeMap::from([(DEFAULT_BASE.to_string(), m0)]);
        Document::with_nets(signature, rules, strategies, nets, DEFAULT_BASE)
    }

    /// Validates everything and starts a trace at `nets[base]`.
    pub fn with_nets(
        signature: Arc<Signature>,
        rules: Vec<InteractionRule>,
        strategies: BTreeMap<String, Strategy>,
        nets: BTreeMap<String, Net>,
        base: &str,
    ) -> Result<Document, Vec<Violation>> {
        let mut violations = Vec::new();
        let rules = match RuleSet::new(&signature, rules) {
            Ok(r) => r,
            Err(v) => {
                violations.extend(v);
                RuleSet::empty()
            }
        };
        for (name, net) in &nets {
            if net.signature().as_ref() != signature.as_ref() {
                violations.push(
                    Violation::new(
                        ViolationCode::SignatureMismatch,
                        "net uses another signature",
                    )
                    .in_subject(name),
                );
                continue;
            }
            violations.extend(net.validate().into_iter().map(|v| v.in_subject(name)));
        }
        for (name, expr) in &strategies {
            violations.extend(
                check_strategy(&rules, expr)
                    .into_iter()
                    .map(|v| v.in_subject(name)),
            );
        }
        let Some(m0) = nets.get(base) else {
            violations.push(Violation::new(
                ViolationCode::MissingNet,
                format!("no net named `{base}`"),
            ));
            return Err(violations);
        };
        if !violations.is_empty() {
            return Err(violations);
        }
        let trace = TraceTree::new(m0.clone());
        Ok(Document {
            signature,
            rules,
            strategies,
            nets,
            base: base.to_string(),
            trace,
        })
    }

    pub fn signature(&self) -> &Arc<Signature> {
        &self.signature
    }

    pub fn rules(&self) -> &RuleSet {
        &self.rules
    }

    pub fn strategies(&self) -> &BTreeMap<String, Strategy> {
        &self.strategies
    }

    pub fn strategy(&self, name: &str) -> Option<&Strategy> {
        self.strategies.get(name)
    }

    pub fn nets(&self) -> &BTreeMap<String, Net> {
        &self.nets
    }

    pub fn base_name(&self) -> &str {
        &self.base
    }

    /// The base model.
    pub fn m0(&self) -> &Net {
        &self.nets[&self.base]
    }

    pub fn trace(&self) -> &TraceTree {
        &self.trace
    }

    pub fn get_node(&self, id: NodeId) -> Result<NodeView<'_>, TraceError> {
        self.trace.get(id).ok_or(TraceError::UnknownNode(id))
    }

    fn node_net(&self, id: NodeId) -> Result<Arc<Net>, TraceError> {
        Ok(self.get_node(id)?.net.clone())
    }

    fn find_child(&self, node: NodeId, label: &TraceLabel) -> Option<NodeId> {
        let view = self.trace.get(node)?;
        view.children
            .iter()
            .copied()
            .find(|c| self.trace.get(*c).and_then(|v| v.label) == Some(label))
    }

    /// Fires the redex on `edge` in a copy of `node`'s net and records the
    /// result as a child. Returns the existing child if this exact rewrite
    /// was already recorded under `node`, together with `false`.
    pub fn step(&mut self, node: NodeId, edge: EdgeId) -> Result<(NodeId, bool), TraceError> {
        let net = self.node_net(node)?;
        let redex = net.redex_on(edge).ok_or(TraceError::StaleRedex(edge))?;
        let rule = self
            .rules
            .for_pair(redex.symbols.0, redex.symbols.1)
            .ok_or(TraceError::NoRuleForPair(edge))?;
        let label = TraceLabel::single(rule.name(), redex.agents());
        if let Some(existing) = self.find_child(node, &label) {
            return Ok((existing, false));
        }
        let mut next = Net::clone(&net);
        apply_rule(&mut next, &redex, rule).expect("redex checked live");
        Ok((self.trace.push(node, label, next), true))
    }

    /// One child per rule-covered redex of the node, in redex order.
    /// Exploring again returns the same children.
    pub fn explore(&mut self, node: NodeId) -> Result<Vec<NodeId>, TraceError> {
        let net = self.node_net(node)?;
        let mut out = Vec::new();
        for redex in net.find_active_pairs() {
            if self
                .rules
                .for_pair(redex.symbols.0, redex.symbols.1)
                .is_some()
            {
                out.push(self.step(node, redex.edge)?.0);
            }
        }
        Ok(out)
    }

    /// Breadth-first exploration from the root down to `depth` levels.
    /// Returns the node ids of each level, root level first.
    pub fn explore_to_depth(&mut self, depth: usize) -> Result<Vec<Vec<NodeId>>, TraceError> {
        let mut levels = vec![vec![self.trace.root()]];
        for _ in 0..depth {
            let mut next = Vec::new();
            for node in levels.last().expect("nonempty").clone() {
                next.extend(self.explore(node)?);
            }
            if next.is_empty() {
                break;
            }
            levels.push(next);
        }
        Ok(levels)
    }

    /// Runs a strategy from `node`. On success appends one child per
    /// committed step along a single path and returns the new ids; on
    /// failure records nothing.
    pub fn run_strategy(
        &mut self,
        node: NodeId,
        expr: &Strategy,
        name: Option<&str>,
        config: &EvalConfig,
    ) -> Result<(Status, Vec<NodeId>), TraceError> {
        let start = self.node_net(node)?;
        let expr = elaborate(expr).map_err(|strategy::ElaborateError::UnlocatedRule(r)| {
            TraceError::Eval(EvalError::UnlocatedRule(r))
        })?;
        let mut net = Net::clone(&start);
        let mut redexes = RedexSet::new(&net);
        let outcome = strategy::eval(&mut net, &mut redexes, &self.rules, &expr, config)?;
        if outcome.status == Status::Failure {
            return Ok((Status::Failure, Vec::new()));
        }
        let mut path = Vec::new();
        let mut current = Net::clone(&start);
        let mut parent = node;
        for step in &outcome.steps {
            for rewrite in &step.rewrites {
                let redex = current
                    .redex_of_agent(rewrite.agents.0)
                    .filter(|r| r.involves(rewrite.agents.1))
                    .expect("replayed step finds its redex");
                let rule = self.rules.get(&rewrite.rule).expect("rule exists");
                apply_rule(&mut current, &redex, rule).expect("replayed step applies");
            }
            let child = self
                .trace
                .push(parent, TraceLabel::from_step(step, name), current.clone());
            path.push(child);
            parent = child;
        }
        debug_assert_eq!(&current, &net);
        Ok((Status::Success, path))
    }

    /// Runs the document strategy called `name`.
    pub fn run_named(
        &mut self,
        node: NodeId,
        name: &str,
        config: &EvalConfig,
    ) -> Result<(Status, Vec<NodeId>), TraceError> {
        let expr = self
            .strategies
            .get(name)
            .cloned()
            .ok_or_else(|| TraceError::UnknownStrategy(name.to_string()))?;
        self.run_strategy(node, &expr, Some(name), config)
    }

    /// Replaces the base model. Only allowed while the trace is just the
    /// root.
    pub fn replace_base(&mut self, net: Net) -> Result<(), TraceError> {
        if self.trace.len() != 1 {
            return Err(TraceError::TraceNotPristine);
        }
        let violations = net.validate();
        if !violations.is_empty() {
            return Err(TraceError::InvalidNet(violations));
        }
        if net.signature().as_ref() != self.signature.as_ref() {
            return Err(TraceError::InvalidNet(vec![Violation::new(
                ViolationCode::SignatureMismatch,
                "net uses another signature",
            )]));
        }
        self.trace = TraceTree::new(net.clone());
        self.nets.insert(self.base.clone(), net);
        Ok(())
    }
}

/// A stored strategy must elaborate and only mention known rules.
pub fn check_strategy(rules: &RuleSet, expr: &Strategy) -> Vec<Violation> {
    let mut out: Vec<Violation> = expr
        .rule_names()
        .into_iter()
        .filter(|r| rules.get(r).is_none())
        .map(|r| Violation::new(ViolationCode::UnknownRule, format!("unknown rule `{r}`")))
        .collect();
    if let Err(strategy::ElaborateError::UnlocatedRule(r)) = elaborate(expr) {
        out.push(Violation::new(
            ViolationCode::UnlocatedRule,
            format!("rule `{r}` is applied without a location"),
        ));
    }
    out
}
