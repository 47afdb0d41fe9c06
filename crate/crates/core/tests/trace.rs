mod common;

use std::collections::BTreeMap;
use std::fs;
use std::path::PathBuf;
use std::sync::Arc;

use common::*;
use inetc_core::report::{codes, ViolationCode};
use inetc_core::strategy::{EvalConfig, EvalError, Status, Strategy};
use inetc_core::textio::{parse_document, parse_strategy};
use inetc_core::trace::{Document, NodeId, TraceError};
use inetc_core::{iso_equal, AgentId, EdgeId, Net, Signature};
use rand::Rng;

fn fixture(name: &str) -> Document {
    let p = PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("tests/fixtures")
        .join(name);
    parse_document(&fs::read_to_string(p).unwrap()).unwrap()
}

fn config() -> EvalConfig {
    EvalConfig::default()
}

#[test]
fn new_document_has_a_single_root() {
    let sig = unary_sig();
    let rules = unary_rules(&sig).iter().cloned().collect();
    let m0 = addition(&sig, 1, 1);
    let doc = Document::new(sig, rules, BTreeMap::new(), m0.clone()).unwrap();
    assert_eq!(doc.trace().len(), 1);
    let root = doc.get_node(NodeId::ROOT).unwrap();
    assert_eq!(root.net.as_ref(), &m0);
    assert_eq!(root.parent, None);
    assert!(root.label.is_none());
    assert!(matches!(
        doc.get_node(NodeId(5)),
        Err(TraceError::UnknownNode(NodeId(5)))
    ));
}

#[test]
fn invalid_components_are_rejected() {
    let sig = unary_sig();
    let mut rules: Vec<_> = unary_rules(&sig).iter().cloned().collect();
    let dup = rules[0].clone();
    rules.push(inetc_core::InteractionRule::new(
        "again",
        dup.lhs(),
        dup.rhs().clone(),
        dup.mapping().to_vec(),
    ));
    let err = Document::new(sig.clone(), rules, BTreeMap::new(), addition(&sig, 1, 0)).unwrap_err();
    assert!(codes(&err).contains(&ViolationCode::DuplicatePair));

    let bigger = Signature::new([("Z", 0), ("S", 1), ("add", 2), ("zz", 0)]).unwrap();
    let mut m0 = Net::new(sig.clone());
    m0.insert_agent_unchecked(AgentId(0), bigger.lookup("zz").unwrap());
    let rules = unary_rules(&sig).iter().cloned().collect();
    let err = Document::new(sig.clone(), rules, BTreeMap::new(), m0).unwrap_err();
    assert!(codes(&err).contains(&ViolationCode::UnknownSymbol));

    let rules = unary_rules(&sig).iter().cloned().collect();
    let strategies = BTreeMap::from([("s".to_string(), Strategy::apply("addS", None))]);
    let err = Document::new(sig.clone(), rules, strategies, addition(&sig, 1, 0)).unwrap_err();
    assert!(codes(&err).contains(&ViolationCode::UnlocatedRule));

    let other = Arc::new(Signature::new([("Q", 0)]).unwrap());
    let err = Document::new(sig, Vec::new(), BTreeMap::new(), Net::new(other)).unwrap_err();
    assert!(codes(&err).contains(&ViolationCode::SignatureMismatch));
}

#[test]
fn explore_branches_once_per_covered_redex() {
    let mut doc = fixture("diamond.inet");
    let children = doc.explore(NodeId::ROOT).unwrap();
    assert_eq!(children.len(), 2);
    for c in &children {
        let view = doc.get_node(*c).unwrap();
        assert_eq!(view.parent, Some(NodeId::ROOT));
        assert_eq!(view.depth, 1);
        assert_eq!(view.label.unwrap().rewrites.len(), 1);
        assert!(view.net.validate().is_empty());
    }
    assert_eq!(doc.explore(NodeId::ROOT).unwrap(), children);
    assert_eq!(doc.trace().len(), 3);

    let mut doc = fixture("missing_rule.inet");
    assert_eq!(doc.m0().find_active_pairs().len(), 2);
    assert_eq!(doc.explore(NodeId::ROOT).unwrap().len(), 1);

    let mut doc = fixture("normal_form.inet");
    assert!(doc.explore(NodeId::ROOT).unwrap().is_empty());
    assert!(matches!(
        doc.explore(NodeId(3)),
        Err(TraceError::UnknownNode(_))
    ));
}

#[test]
fn diamond_children_reconverge() {
    let mut doc = fixture("diamond.inet");
    let levels = doc.explore_to_depth(2).unwrap();
    assert_eq!(levels[1].len(), 2);
    let leaves: Vec<_> = levels[2]
        .iter()
        .map(|n| doc.get_node(*n).unwrap().net.clone())
        .collect();
    assert_eq!(leaves.len(), 2);
    assert!(iso_equal(&leaves[0], &leaves[1]));
    doc.trace().check().unwrap();
}

#[test]
fn step_is_idempotent_and_checks_the_redex() {
    let mut doc = fixture("missing_rule.inet");
    let pairs = doc.m0().find_active_pairs();
    let covered = pairs
        .iter()
        .find(|r| doc.rules().for_pair(r.symbols.0, r.symbols.1).is_some())
        .unwrap()
        .edge;
    let uncovered = pairs
        .iter()
        .find(|r| doc.rules().for_pair(r.symbols.0, r.symbols.1).is_none())
        .unwrap()
        .edge;
    let (child, fresh) = doc.step(NodeId::ROOT, covered).unwrap();
    assert!(fresh);
    assert_eq!(doc.step(NodeId::ROOT, covered).unwrap(), (child, false));
    assert_eq!(
        doc.step(NodeId::ROOT, uncovered),
        Err(TraceError::NoRuleForPair(uncovered))
    );
    assert_eq!(
        doc.step(NodeId::ROOT, EdgeId(77)),
        Err(TraceError::StaleRedex(EdgeId(77)))
    );
    assert_eq!(
        doc.step(child, covered),
        Err(TraceError::StaleRedex(covered))
    );
}

#[test]
fn strategy_runs_append_a_path() {
    let mut doc = fixture("add_unary.inet");
    let expr = doc.strategy("normalize").unwrap().clone();
    let (status, path) = doc
        .run_strategy(NodeId::ROOT, &expr, Some("normalize"), &config())
        .unwrap();
    assert_eq!(status, Status::Success);
    assert_eq!(path.len(), 3);
    let mut parent = NodeId::ROOT;
    for n in &path {
        let view = doc.get_node(*n).unwrap();
        assert_eq!(view.parent, Some(parent));
        assert_eq!(view.label.unwrap().strategy.as_deref(), Some("normalize"));
        parent = *n;
    }
    let leaf = doc.get_node(*path.last().unwrap()).unwrap().net.clone();
    assert!(iso_equal(&leaf, &doc.nets()["expected"]));

    let (status, again) = doc.run_named(NodeId::ROOT, "normalize", &config()).unwrap();
    assert_eq!(status, Status::Success);
    assert_eq!(again.len(), 3);
    assert!(again.iter().all(|n| !path.contains(n)));
    assert_eq!(doc.trace().len(), 7);

    let (status, none) = doc
        .run_strategy(NodeId::ROOT, &Strategy::Fail, None, &config())
        .unwrap();
    assert_eq!((status, none.len()), (Status::Failure, 0));
    let (status, none) = doc
        .run_strategy(NodeId::ROOT, &Strategy::Id, None, &config())
        .unwrap();
    assert_eq!((status, none.len()), (Status::Success, 0));
    assert_eq!(doc.trace().len(), 7);

    assert!(matches!(
        doc.run_strategy(
            NodeId::ROOT,
            &parse_strategy("addS").unwrap(),
            None,
            &config()
        ),
        Err(TraceError::Eval(EvalError::UnlocatedRule(_)))
    ));
    assert!(matches!(
        doc.run_named(NodeId::ROOT, "nope", &config()),
        Err(TraceError::UnknownStrategy(_))
    ));
    doc.trace().check().unwrap();
}

#[test]
fn step_limit_records_nothing() {
    let mut doc = fixture("loop.inet");
    let expr = doc.strategy("forever").unwrap().clone();
    let err = doc.run_strategy(NodeId::ROOT, &expr, None, &EvalConfig { star_cap: 20 });
    assert_eq!(err, Err(TraceError::Eval(EvalError::StepLimitExceeded(20))));
    assert_eq!(doc.trace().len(), 1);
}

#[test]
fn parallel_step_is_one_node() {
    let mut doc = fixture("diamond.inet");
    let (status, path) = doc.run_named(NodeId::ROOT, "both", &config()).unwrap();
    assert_eq!(status, Status::Success);
    assert_eq!(path.len(), 1);
    assert_eq!(
        doc.get_node(path[0]).unwrap().label.unwrap().rewrites.len(),
        2
    );
}

#[test]
fn base_can_only_change_while_pristine() {
    let mut doc = fixture("diamond.inet");
    let mut net = doc.m0().clone();
    net.delete_agent(AgentId(0)).unwrap();
    doc.replace_base(net.clone()).unwrap();
    assert_eq!(doc.m0(), &net);
    assert_eq!(doc.get_node(NodeId::ROOT).unwrap().net.as_ref(), &net);
    doc.explore(NodeId::ROOT).unwrap();
    assert_eq!(doc.replace_base(net), Err(TraceError::TraceNotPristine));
}

#[test]
fn random_operations_keep_the_tree_well_formed() {
    let mut doc = fixture("multiply.inet");
    let mut r = rng(7);
    let strategies = [
        "run",
        "(mulS or addS)(all,0)",
        "dupS*(all,-1)",
        "fail",
        "id",
    ];
    for _ in 0..300 {
        let n = NodeId(r.gen_range(0..doc.trace().len() as u64));
        match r.gen_range(0..3) {
            0 => {
                doc.explore(n).unwrap();
            }
            1 => {
                let net = doc.get_node(n).unwrap().net.clone();
                if let Some(redex) = net.find_active_pairs().first() {
                    doc.step(n, redex.edge).unwrap();
                }
            }
            _ => {
                let text = strategies[r.gen_range(0..strategies.len())];
                let (expr, name) = inetc_core::textio::strategy_for(&doc, text).unwrap();
                doc.run_strategy(n, &expr, name.as_deref(), &config())
                    .unwrap();
            }
        }
    }
    doc.trace().check().unwrap();
    for (parent, child, _) in doc.trace().edges() {
        let p = doc.get_node(parent).unwrap().net.clone();
        let c = doc.get_node(child).unwrap().net.clone();
        assert!(c.validate().is_empty());
        assert_eq!(p.interface_set(), c.interface_set());
    }
}
