//! End-to-end acceptance checks. Prints one `PASS`/`FAIL` line per
//! criterion and exits non-zero if any fails.

mod common;

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::panic::{self, AssertUnwindSafe};
use std::path::PathBuf;
use std::process::ExitCode;
use std::sync::Arc;
use std::time::{Duration, Instant};

use common::*;
use inetc_core::rewrite::normalize;
use inetc_core::strategy::{
    elaborate, eval, Depth, EvalConfig, Location, Selector, Status, Strategy,
};
use inetc_core::textio::{parse_document, parse_strategy, print_document, strategy_for};
use inetc_core::trace::NodeId;
use inetc_core::{apply_rule, iso_equal, Document, Net, Redex, RedexSet, RuleSet, Signature};
use rand::seq::SliceRandom;
use rand::Rng;

struct Report {
    failed: usize,
    /// Rewrites whose interface was compared, and how many differed.
    interface_checks: usize,
    interface_breaks: usize,
}

impl Report {
    fn line(&mut self, name: &str, ok: bool, detail: String) {
        if !ok {
            self.failed += 1;
        }
        println!("{} {name}: {detail}", if ok { "PASS" } else { "FAIL" });
    }

    /// Fires one redex and records whether the interface survived.
    fn fire(&mut self, net: &mut Net, rules: &RuleSet, redex: &Redex) -> inetc_core::RewriteDelta {
        let before = net.interface_set();
        let delta = apply_rule(net, redex, rule_for(rules, redex)).expect("live redex");
        self.interface_checks += 1;
        if net.interface_set() != before {
            self.interface_breaks += 1;
        }
        delta
    }
}

fn fixture_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures")
}

fn fixtures() -> Vec<(String, String)> {
    let mut out: Vec<(String, String)> = fs::read_dir(fixture_dir())
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|e| e == "inet"))
        .map(|p| {
            let name = p.file_name().unwrap().to_string_lossy().into_owned();
            (name, fs::read_to_string(&p).unwrap())
        })
        .collect();
    out.sort();
    out
}

fn covered(net: &Net, rules: &RuleSet) -> Vec<Redex> {
    net.find_active_pairs()
        .into_iter()
        .filter(|r| rules.for_pair(r.symbols.0, r.symbols.1).is_some())
        .collect()
}

fn unary_addition(rep: &mut Report) {
    let sig = unary_sig();
    let rules = unary_rules(&sig);
    let expr = elaborate(&parse_strategy("(addS or addZ)*(all,-1)").unwrap()).unwrap();
    let start = Instant::now();
    let mut bad = Vec::new();
    for n in 0..=20 {
        for m in 0..=20 {
            let mut net = addition(&sig, n, m);
            let iface = net.interface_set();
            let mut redexes = RedexSet::new(&net);
            let out = eval(
                &mut net,
                &mut redexes,
                &rules,
                &expr,
                &EvalConfig::default(),
            )
            .unwrap();
            let (value, steps) = reference_add(n, m);
            rep.interface_checks += 1;
            if net.interface_set() != iface {
                rep.interface_breaks += 1;
            }
            let ok = out.status == Status::Success
                && out.steps.len() == steps
                && out.steps.len() == n + 1
                && iso_equal(&net, &numeral_net(&sig, value));
            if !ok {
                bad.push((n, m));
            }
        }
    }
    let took = start.elapsed();
    rep.line(
        "unary addition",
        bad.is_empty() && took < Duration::from_secs(1),
        format!(
            "441 cases, {} wrong {:?}, {:.3}s (limit 1s)",
            bad.len(),
            bad,
            took.as_secs_f64()
        ),
    );
}

fn diamond(rep: &mut Report) {
    let sig = random_sig();
    let start = Instant::now();
    let mut r = rng(1);
    let (mut nets, mut pairs, mut bad) = (0, 0, 0);
    while nets < 500 {
        let rules = random_rules(&sig, &mut r, 3);
        let p = r.gen_range(2..5);
        let extra = r.gen_range(0..5);
        let net = random_net(&sig, &mut r, p, extra);
        let redexes = net.find_active_pairs();
        if redexes.len() < 2 {
            continue;
        }
        nets += 1;
        for (i, a) in redexes.iter().enumerate() {
            for b in &redexes[i + 1..] {
                pairs += 1;
                let mut ab = net.clone();
                rep.fire(&mut ab, &rules, a);
                let residual = ab.redex_on(b.edge).expect("disjoint redex survives");
                rep.fire(&mut ab, &rules, &residual);
                let mut ba = net.clone();
                rep.fire(&mut ba, &rules, b);
                let residual = ba.redex_on(a.edge).expect("disjoint redex survives");
                rep.fire(&mut ba, &rules, &residual);
                if !iso_equal(&ab, &ba) {
                    bad += 1;
                }
            }
        }
    }
    let took = start.elapsed();
    rep.line(
        "diamond property",
        bad == 0 && took < Duration::from_secs(30),
        format!(
            "{nets} nets, {pairs} redex pairs, {bad} not rejoined, {:.2}s (limit 30s)",
            took.as_secs_f64()
        ),
    );
}

/// Reduces with a random choice among covered redexes at every step.
fn random_order(
    rep: &mut Report,
    net: &mut Net,
    rules: &RuleSet,
    r: &mut impl Rng,
    cap: u64,
) -> Option<u64> {
    let mut steps = 0;
    loop {
        let options = covered(net, rules);
        let Some(redex) = options.choose(r) else {
            return Some(steps);
        };
        if steps == cap {
            return None;
        }
        rep.fire(net, rules, redex);
        steps += 1;
    }
}

fn permutation_equivalence(rep: &mut Report) {
    const CAP: u64 = 300;
    let sig = random_sig();
    let mut r = rng(2);
    let (mut nets, mut bad, mut drawn) = (0, 0, 0);
    while nets < 100 {
        drawn += 1;
        let rules = random_rules(&sig, &mut r, 2);
        let p = r.gen_range(1..5);
        let extra = r.gen_range(0..4);
        let net = random_net(&sig, &mut r, p, extra);
        let mut reference = net.clone();
        let Ok(length) = normalize(&mut reference, &rules, CAP) else {
            continue;
        };
        nets += 1;
        for _ in 0..10 {
            let mut other = net.clone();
            match random_order(rep, &mut other, &rules, &mut r, CAP) {
                Some(n) if n == length && iso_equal(&other, &reference) => {}
                _ => bad += 1,
            }
        }
    }
    rep.line(
        "permutation equivalence",
        bad == 0,
        format!("{nets} terminating nets (of {drawn} drawn) x 10 orders, {bad} disagreeing"),
    );
}

fn incremental_redexes(rep: &mut Report) {
    let sig = random_sig();
    let mut r = rng(3);
    let (mut steps, mut bad) = (0, 0);
    while steps < 1000 {
        let rules = random_rules(&sig, &mut r, 3);
        let mut net = random_net(&sig, &mut r, 4, 6);
        let mut tracked = RedexSet::new(&net);
        for _ in 0..40 {
            let options = tracked.to_vec();
            let Some(redex) = options.choose(&mut r) else {
                break;
            };
            let delta = rep.fire(&mut net, &rules, redex);
            tracked.update(&delta, &net);
            steps += 1;
            if tracked.to_vec() != net.find_active_pairs() {
                bad += 1;
            }
        }
    }
    rep.line(
        "incremental redex tracking",
        bad == 0,
        format!("{steps} steps, {bad} mismatches against a full rescan"),
    );
}

fn random_strategy(r: &mut impl Rng, rules: &[String], depth: u32) -> Strategy {
    let located = |r: &mut _| {
        let rule = rules.choose(r).unwrap().clone();
        let d = if Rng::gen_bool(r, 0.5) {
            Depth::Bounded(0)
        } else {
            Depth::Unbounded
        };
        Strategy::apply(rule, Some(Location::new(Selector::All, d)))
    };
    if depth == 0 {
        return match r.gen_range(0..6) {
            0 => Strategy::Fail,
            1 => Strategy::Id,
            _ => located(r),
        };
    }
    let sub = |r: &mut _| random_strategy(r, rules, depth - 1);
    match r.gen_range(0..6) {
        0 => Strategy::seq(sub(r), sub(r)),
        1 => Strategy::or(sub(r), sub(r)),
        2 => Strategy::par(sub(r), sub(r)),
        3 => Strategy::star(sub(r)),
        4 => Strategy::seq(sub(r), Strategy::Fail),
        _ => located(r),
    }
}

fn failure_purity(rep: &mut Report) {
    let sig = random_sig();
    let mut r = rng(4);
    let config = EvalConfig { star_cap: 50 };
    let (mut failures, mut bad, mut tried) = (0, 0, 0);
    while failures < 200 {
        tried += 1;
        let rules = random_rules(&sig, &mut r, 2);
        let names: Vec<String> = rules.iter().map(|x| x.name().to_string()).collect();
        let depth = r.gen_range(1..4);
        let expr = random_strategy(&mut r, &names, depth);
        let before = random_net(&sig, &mut r, 3, 3);
        let mut net = before.clone();
        let mut redexes = RedexSet::new(&net);
        match eval(&mut net, &mut redexes, &rules, &expr, &config) {
            Ok(out) if out.status == Status::Success => continue,
            // Errors roll back too; check them but count only failures.
            Err(_) => {
                if net != before {
                    bad += 1;
                }
                continue;
            }
            Ok(_) => failures += 1,
        }
        if net != before || redexes.to_vec() != net.find_active_pairs() {
            bad += 1;
        }
    }
    rep.line(
        "strategy (a) failure purity",
        bad == 0,
        format!("{failures} failing evaluations (of {tried} drawn), {bad} left the net changed"),
    );
}

fn par_vs_seq(rep: &mut Report) {
    let sig = random_sig();
    let mut r = rng(5);
    let config = EvalConfig::default();
    let (mut nets, mut bad) = (0, 0);
    while nets < 100 {
        let rules = random_rules(&sig, &mut r, 3);
        let mut net = random_net(&sig, &mut r, 3, 3);
        let redexes = net.find_active_pairs();
        let pick = redexes
            .iter()
            .flat_map(|a| redexes.iter().map(move |b| (a, b)))
            .find(|(a, b)| a.symbols != b.symbols);
        let Some((a, b)) = pick else {
            continue;
        };
        let (a, b) = (*a, *b);
        nets += 1;
        net.set_selection("s1", [a.left_agent, a.right_agent])
            .unwrap();
        net.set_selection("s2", [b.left_agent, b.right_agent])
            .unwrap();
        let r1 = rule_for(&rules, &a).name().to_string();
        let r2 = rule_for(&rules, &b).name().to_string();
        let run = |text: String| {
            let expr = elaborate(&parse_strategy(&text).unwrap()).unwrap();
            let mut n = net.clone();
            let mut tracked = RedexSet::new(&n);
            let out = eval(&mut n, &mut tracked, &rules, &expr, &config).unwrap();
            (out.status, n)
        };
        let x = format!("{r1}(s1,0)");
        let y = format!("{r2}(s2,0)");
        let (sp, par) = run(format!("{x} || {y}"));
        let (s1, xy) = run(format!("{x};{y}"));
        let (s2, yx) = run(format!("{y};{x}"));
        let ok = [sp, s1, s2].iter().all(|s| *s == Status::Success)
            && iso_equal(&par, &xy)
            && iso_equal(&par, &yx);
        if !ok {
            bad += 1;
        }
    }
    rep.line(
        "strategy (b) parallel vs sequence",
        bad == 0,
        format!("{nets} nets with two disjoint matches, {bad} disagreeing"),
    );
}

fn strategy_semantics(rep: &mut Report) {
    failure_purity(rep);
    par_vs_seq(rep);

    let sig = unary_sig();
    let rules = unary_rules(&sig);
    let before = addition(&sig, 2, 1);
    let mut net = before.clone();
    let expr = elaborate(&parse_strategy("(addS; fail)(all,-1)").unwrap()).unwrap();
    let mut redexes = RedexSet::new(&net);
    let out = eval(
        &mut net,
        &mut redexes,
        &rules,
        &expr,
        &EvalConfig::default(),
    )
    .unwrap();
    let c = out.status == Status::Failure && out.steps.is_empty() && net == before;
    rep.line(
        "strategy (c) (addS; fail)",
        c,
        format!(
            "status {}, net unchanged: {}",
            out.status.as_str(),
            net == before
        ),
    );

    let text = fs::read_to_string(fixture_dir().join("located_strategy.inet")).unwrap();
    let mut d_ok = true;
    let mut details = Vec::new();
    for expr in [
        "(R1 or R2);R3*[interface(sub1),0]",
        "(R1 or R2);R3*[Interface(sub1),0]",
    ] {
        let mut doc = parse_document(&text).unwrap();
        let outcome = parse_strategy(expr)
            .map_err(|e| e.to_string())
            .and_then(|s| elaborate(&s).map_err(|e| e.to_string()).map(|_| s))
            .and_then(|s| {
                doc.run_strategy(NodeId::ROOT, &s, None, &EvalConfig::default())
                    .map_err(|e| e.to_string())
            });
        match outcome {
            Ok((Status::Success, path)) => {
                details.push(format!("`{expr}` ran {} steps", path.len()))
            }
            other => {
                d_ok = false;
                details.push(format!("`{expr}` gave {other:?}"));
            }
        }
    }
    rep.line(
        "strategy (d) located example expression",
        d_ok,
        details.join("; "),
    );
}

fn trace_contract(rep: &mut Report) {
    let sig = random_sig();
    let mut r = rng(6);
    let (mut nodes, mut bad) = (0, 0);
    for _ in 0..100 {
        let full = random_rules(&sig, &mut r, 2);
        // Drop some rules so that not every redex is covered.
        let kept: Vec<_> = full.iter().filter(|_| r.gen_bool(0.7)).cloned().collect();
        let rules = RuleSet::new(&sig, kept.clone()).unwrap();
        let net = random_net(&sig, &mut r, 4, 2);
        let mut doc = Document::new(sig.clone(), kept, BTreeMap::new(), net.clone()).unwrap();
        let expected: BTreeSet<_> = covered(&net, &rules)
            .iter()
            .map(|x| (rule_for(&rules, x).name().to_string(), x.agents()))
            .collect();
        let children = doc.explore(NodeId::ROOT).unwrap();
        let again = doc.explore(NodeId::ROOT).unwrap();
        nodes += 1;
        let mut labels = BTreeSet::new();
        let mut nets_ok = true;
        for c in &children {
            let view = doc.get_node(*c).unwrap();
            let label = view.label.unwrap();
            if label.rewrites.len() != 1 || view.parent != Some(NodeId::ROOT) {
                nets_ok = false;
                continue;
            }
            let (rule, pair) = label.rewrites[0].clone();
            let mut replay = net.clone();
            let redex = replay.redex_of_agent(pair.0).filter(|x| x.involves(pair.1));
            match redex {
                Some(redex) => {
                    apply_rule(&mut replay, &redex, rules.get(&rule).unwrap()).unwrap();
                    nets_ok &= replay == **view.net;
                }
                None => nets_ok = false,
            }
            labels.insert((rule, pair));
        }
        if children.len() != expected.len() || labels != expected || again != children || !nets_ok {
            bad += 1;
        }
    }
    rep.line(
        "trace explore children",
        bad == 0,
        format!("{nodes} explored nodes, {bad} with wrong children or labels"),
    );

    let text = fs::read_to_string(fixture_dir().join("multiply.inet")).unwrap();
    let mut doc = parse_document(&text).unwrap();
    let strategies = [
        "run",
        "(mulS or addS)(all,0)",
        "dupS*(all,-1)",
        "fail",
        "id",
    ];
    let config = EvalConfig::default();
    let mut errors = 0;
    for _ in 0..1000 {
        let n = NodeId(r.gen_range(0..doc.trace().len() as u64));
        let result = match r.gen_range(0..3) {
            0 => doc.explore(n).map(drop),
            1 => {
                let net = doc.get_node(n).unwrap().net.clone();
                match covered(&net, doc.rules()).choose(&mut r) {
                    Some(redex) => doc.step(n, redex.edge).map(drop),
                    None => Ok(()),
                }
            }
            _ => {
                let text = strategies[r.gen_range(0..strategies.len())];
                let (expr, name) = strategy_for(&doc, text).unwrap();
                doc.run_strategy(n, &expr, name.as_deref(), &config)
                    .map(drop)
            }
        };
        if result.is_err() {
            errors += 1;
        }
    }
    let shape = doc.trace().check();
    let mut child_bad = 0;
    for (parent, child, _) in doc.trace().edges() {
        let p = doc.get_node(parent).unwrap().net.clone();
        let c = doc.get_node(child).unwrap().net.clone();
        rep.interface_checks += 1;
        if p.interface_set() != c.interface_set() {
            rep.interface_breaks += 1;
        }
        if !c.validate().is_empty() {
            child_bad += 1;
        }
    }
    let edges = doc.trace().edges().count();
    let ok = shape.is_ok() && errors == 0 && child_bad == 0 && edges + 1 == doc.trace().len();
    rep.line(
        "trace invariants after 1000 operations",
        ok,
        format!(
            "{} nodes, {edges} edges, tree check {:?}, {errors} errors, {child_bad} invalid children",
            doc.trace().len(),
            shape
        ),
    );
}

fn mutate(text: &str, r: &mut impl Rng) -> String {
    const PIECES: &[&str] = &[
        "{",
        "}",
        "(",
        ")",
        "[",
        "]",
        ";",
        ":",
        ",",
        ".",
        "-",
        "->",
        "><",
        "*",
        "||",
        "=",
        "'",
        "rule",
        "net",
        "signature",
        "named",
        "strategy",
        "free",
        "wire",
        "map",
        "rhs",
        "L",
        "R",
        "id",
        "fail",
        "or",
        "all",
        "interface",
        "successors",
        "-1",
        "0",
        "7",
        "99999999999999999999",
        "x",
        "main",
        " ",
        "\n",
        "//",
        "⋈",
        "∥",
        "é",
    ];
    let mut chars: Vec<char> = text.chars().collect();
    for _ in 0..r.gen_range(1..6) {
        let at = r.gen_range(0..=chars.len());
        match r.gen_range(0..3) {
            0 if !chars.is_empty() => {
                let end = (at + r.gen_range(1..8)).min(chars.len());
                let start = at.min(chars.len().saturating_sub(1));
                chars.drain(start..end.max(start));
            }
            1 => {
                let piece = PIECES.choose(r).unwrap();
                chars.splice(at..at, piece.chars());
            }
            _ => {
                if !chars.is_empty() {
                    let i = at.min(chars.len() - 1);
                    chars[i] = *PIECES
                        .choose(r)
                        .unwrap()
                        .chars()
                        .collect::<Vec<_>>()
                        .first()
                        .unwrap_or(&' ');
                }
            }
        }
    }
    chars.into_iter().collect()
}

fn parser_robustness(rep: &mut Report) {
    let fixtures = fixtures();
    let mut bad = Vec::new();
    for (name, text) in &fixtures {
        let ok = parse_document(text).ok().is_some_and(|doc| {
            let printed = print_document(&doc);
            parse_document(&printed)
                .ok()
                .is_some_and(|again| again == doc && print_document(&again) == printed)
        });
        if !ok {
            bad.push(name.clone());
        }
    }
    rep.line(
        "parser round-trip fixpoint",
        fixtures.len() >= 20 && bad.is_empty(),
        format!("{} fixtures, failing {:?}", fixtures.len(), bad),
    );

    let mut r = rng(8);
    let hook = panic::take_hook();
    panic::set_hook(Box::new(|_| {}));
    let (mut panics, mut rejected, mut empty_diags) = (0, 0, 0);
    for i in 0..10_000 {
        let (_, base) = &fixtures[i % fixtures.len()];
        let input = mutate(base, &mut r);
        let result = panic::catch_unwind(AssertUnwindSafe(|| {
            let doc = parse_document(&input);
            let strat = parse_strategy(&input.chars().take(40).collect::<String>());
            (doc.map(|_| ()), strat.map(|_| ()))
        }));
        match result {
            Err(_) => panics += 1,
            Ok((Err(diags), _)) => {
                rejected += 1;
                if diags.is_empty() {
                    empty_diags += 1;
                }
            }
            Ok(_) => {}
        }
    }
    panic::set_hook(hook);
    rep.line(
        "parser fuzzing",
        panics == 0 && empty_diags == 0,
        format!("10000 inputs, {rejected} rejected with diagnostics, {panics} panics, {empty_diags} empty reports"),
    );
}

fn throughput(rep: &mut Report) {
    const N: usize = 100_000;
    let sig: Arc<Signature> = unary_sig();
    let rules = unary_rules(&sig);

    let mut net = addition(&sig, N, 0);
    let iface = net.interface_set();
    let start = Instant::now();
    let steps = normalize(&mut net, &rules, 1_000_000).unwrap_or(0);
    let took = start.elapsed();
    let ok =
        steps as usize == N + 1 && read_numeral(&net) == Some(N) && net.interface_set() == iface;
    rep.line(
        "throughput, normalize",
        ok && took < Duration::from_secs(10),
        format!("{steps} steps in {:.2}s (limit 10s)", took.as_secs_f64()),
    );

    let mut net = addition(&sig, N, 0);
    let expr = elaborate(&parse_strategy("(addS or addZ)*(all,-1)").unwrap()).unwrap();
    let start = Instant::now();
    let mut redexes = RedexSet::new(&net);
    let out = eval(
        &mut net,
        &mut redexes,
        &rules,
        &expr,
        &EvalConfig::default(),
    );
    let took = start.elapsed();
    let steps = out.as_ref().map(|o| o.steps.len()).unwrap_or(0);
    let ok = out.is_ok_and(|o| o.is_success())
        && steps == N + 1
        && read_numeral(&net) == Some(N)
        && net.interface_set() == iface;
    rep.line(
        "throughput, strategy",
        ok && took < Duration::from_secs(10),
        format!("{steps} steps in {:.2}s (limit 10s)", took.as_secs_f64()),
    );
}

fn main() -> ExitCode {
    let mut rep = Report {
        failed: 0,
        interface_checks: 0,
        interface_breaks: 0,
    };
    unary_addition(&mut rep);
    diamond(&mut rep);
    permutation_equivalence(&mut rep);
    incremental_redexes(&mut rep);
    strategy_semantics(&mut rep);
    trace_contract(&mut rep);
    parser_robustness(&mut rep);
    throughput(&mut rep);
    let (checks, breaks) = (rep.interface_checks, rep.interface_breaks);
    rep.line(
        "interface preservation",
        breaks == 0 && checks > 0,
        format!("{checks} rewrites checked, {breaks} changed the interface"),
    );
    if rep.failed == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{} criteria failed", rep.failed);
        ExitCode::FAILURE
    }
}
