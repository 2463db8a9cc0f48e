use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::*;
use crate::context::Context;
use crate::data::EvalMap;
use crate::gen::GenConfig;
use crate::parser::{parse_spec, parse_term, SpecFile};
use crate::term::{Action, ProcTerm};

const HEADER: &str = "domain -4..3;\nvars u, v;\nactions a, b, c, send/1, recv/1, pass/1;\n\
                      comm { a | b = c, send | recv = pass }\n";

fn ctx() -> Context {
    parse_spec(HEADER).unwrap().ctx
}

fn t(s: &str) -> ProcTerm {
    parse_term(s, &ctx()).unwrap()
}

fn sigma(u: i64, v: i64) -> EvalMap {
    EvalMap::from_pairs([("u", u), ("v", v)])
}

fn labels(steps: &[(Action, ProcTerm)]) -> Vec<String> {
    steps.iter().map(|(a, x)| format!("{a} -> {x}")).collect()
}

#[test]
fn action_axiom_and_constants() {
    let c = ctx();
    let s = sigma(0, 0);
    assert_eq!(labels(&step(&t("a"), &s, &c).unwrap()), ["a -> epsilon"]);
    assert!(step(&t("delta"), &s, &c).unwrap().is_empty());
    assert!(step(&t("epsilon"), &s, &c).unwrap().is_empty());
    assert!(terminates(&t("epsilon"), &s, &c).unwrap());
    assert!(!terminates(&t("delta"), &s, &c).unwrap());
}

#[test]
fn guarded_termination() {
    let c = ctx();
    let g = t("[v = 0] -> epsilon");
    assert!(terminates(&g, &sigma(0, 0), &c).unwrap());
    assert!(!terminates(&g, &sigma(0, 1), &c).unwrap());
}

#[test]
fn difference_under_evaluation() {
    let f = parse_spec(
        "vars d, i, j;\nmaps { s = { i = 11, j = 3 } }\n\
         proc P = eval{s}(d := i . ([d >= j] -> d := d - j + [d < j] -> d := j - d));",
    )
    .unwrap();
    let c = &f.ctx;
    let p = f.proc("P").unwrap();
    let ambient = f.ctx.vars.complete(&EvalMap::new(), &c.carrier).unwrap();
    let first = step(p, &ambient, c).unwrap();
    assert_eq!(first.len(), 1);
    assert_eq!(first[0].0.to_string(), "d := 11");
    let second = step(&first[0].1, &ambient, c).unwrap();
    assert_eq!(second.len(), 1);
    assert_eq!(second[0].0.to_string(), "d := 8");
    assert_eq!(second[0].1, ProcTerm::Eps);
    // the ambient map is irrelevant under an evaluation operator
    let other = EvalMap::from_pairs([("d", -5), ("i", 0), ("j", 9)]);
    assert_eq!(step(p, &other, c).unwrap(), first);
}

#[test]
fn division_trace() {
    let f = parse_spec(
        "vars i, j, q, r;\nmaps { s = { i = 11, j = 3 } }\n\
         spec E = { Q = [r >= j] -> q := q + 1 . R + [r < j] -> epsilon, R = [true] -> r := r - j . Q };\n\
         proc P = eval{s}(q := 0 . r := i . rec Q where E);",
    )
    .unwrap();
    let lts = build_lts(f.proc("P").unwrap(), &f.ctx).unwrap();
    assert_eq!(lts.maps.len(), 1);
    let mut trace = Vec::new();
    let mut s = lts.root;
    loop {
        let outs: Vec<_> = lts.successors(s, 0).collect();
        if outs.is_empty() {
            break;
        }
        assert_eq!(outs.len(), 1, "deterministic");
        trace.push(outs[0].action.to_string());
        s = outs[0].to;
    }
    assert_eq!(
        trace,
        ["q := 0", "r := 11", "q := 1", "r := 8", "q := 2", "r := 5", "q := 3", "r := 2"]
    );
    assert!(lts.term[s][0]);
}

#[test]
fn chain_and_self_loop() {
    let c = ctx();
    let l = build_lts(&t("a . b"), &c).unwrap();
    assert_eq!((l.num_states(), l.transitions.len()), (3, 2));
    let last = l.transitions.last().unwrap().to;
    assert_eq!(l.terminating, vec![(last, 0)]);

    let l = build_lts(&t("rec X where { X = [true] -> a . X }"), &c).unwrap();
    assert_eq!(l.num_states(), 1);
    assert_eq!(l.transitions.len(), 1);
    assert_eq!(l.transitions[0].to, 0);
}

#[test]
fn synchronization_requires_equal_data() {
    let c = ctx();
    let p = t("send(u) . a | recv(v) . b");
    for u in -4..=3 {
        for v in -4..=3 {
            let steps = step(&p, &sigma(u, v), &c).unwrap();
            assert_eq!(steps.len(), usize::from(u == v), "u={u} v={v}");
        }
    }
    let q = t("a . epsilon || b");
    let steps = step(&q, &sigma(0, 0), &c).unwrap();
    assert!(labels(&steps).contains(&"c -> epsilon".to_string()));
    assert!(step(&t("a | send(1)"), &sigma(0, 0), &c).unwrap().is_empty());
}

#[test]
fn encapsulation_and_abstraction() {
    let c = ctx();
    let s = sigma(0, 0);
    assert!(step(&t("encap{a}(a . b)"), &s, &c).unwrap().is_empty());
    assert_eq!(labels(&step(&t("hide{a}(a . b)"), &s, &c).unwrap()), ["tau -> hide{a}(b)"]);
    assert_eq!(labels(&step(&t("encap{send}(send(1) + b)"), &s, &c).unwrap()), ["b -> epsilon"]);
}

#[test]
fn json_export_shape() {
    let c = ctx();
    let l = build_lts(&t("[u = 0] -> a"), &c).unwrap();
    let j = l.to_json();
    assert_eq!(j["root"], 0);
    assert_eq!(j["transitions"].as_array().unwrap().len(), 1);
    assert_eq!(j["transitions"][0]["map"]["u"], 0);
    assert_eq!(j["terminating"][0]["state"], 1);
}

#[test]
fn evaluation_operator_ignores_ambient_map() {
    let c = ctx();
    let cfg = GenConfig::full(&c);
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..200 {
        let body = cfg.term(&mut rng, 4);
        let e = ProcTerm::eval(cfg.eval_map(&mut rng), body);
        let base = step(&e, &sigma(0, 0), &c).unwrap();
        let fin = terminates(&e, &sigma(0, 0), &c).unwrap();
        for (u, v) in [(1, 2), (-4, 3), (3, -1)] {
            assert_eq!(step(&e, &sigma(u, v), &c).unwrap(), base);
            assert_eq!(terminates(&e, &sigma(u, v), &c).unwrap(), fin);
        }
    }
}

#[test]
fn condition_labelled_examples() {
    let c = ctx();
    let s = step_cond(&t("[u = 1] -> a"), &c).unwrap();
    assert_eq!(s.len(), 1);
    assert_eq!(s[0].0.to_string(), "u = 1");
    assert!(step_cond(&t("[false] -> a"), &c).unwrap().is_empty());
    let s = step_cond(&t("a"), &c).unwrap();
    assert_eq!(s[0].0, crate::cond::Condition::True);
    assert_eq!(terminates_cond(&t("epsilon"), &c).unwrap(), vec![crate::cond::Condition::True]);
    assert_eq!(terminates_cond(&t("[v = 0] -> epsilon"), &c).unwrap()[0].to_string(), "v = 0");
    assert!(terminates_cond(&t("delta"), &c).unwrap().is_empty());
    let s = step_cond(&t("send(u) | recv(v)"), &c).unwrap();
    assert_eq!(s.len(), 1);
    assert_eq!(s[0].0.to_string(), "u = v");
}

#[test]
fn expansion_instantiates_labels() {
    let c = Context {
        carrier: crate::data::Carrier::new(0, 1).unwrap(),
        ..ctx()
    };
    let g = t("[v = 0] -> a");
    let cl = build_cond_lts(&g, &c).unwrap();
    let sl = expand_to_sigma(&cl, &cl.decl, &c).unwrap();
    assert_eq!(sl.transitions.len(), 1);
    assert_eq!(sl.maps[sl.transitions[0].map], EvalMap::from_pairs([("v", 0)]));
    let cl = build_cond_lts(&t("a"), &c).unwrap();
    let decl = c.vars.clone();
    let sl = expand_to_sigma(&cl, &decl, &c).unwrap();
    assert_eq!(sl.transitions.len(), 4);
}

/// Transition relation keyed by state terms, for comparing systems up to renaming.
pub(crate) fn keyed(l: &SigmaLts) -> (Vec<(String, EvalMap, String, String)>, Vec<(String, EvalMap)>) {
    let reach = reachable(l);
    let mut ts: Vec<_> = l
        .transitions
        .iter()
        .filter(|t| reach[t.from])
        .map(|t| (l.states[t.from].to_string(), l.maps[t.map].clone(), t.action.to_string(), l.states[t.to].to_string()))
        .collect();
    ts.sort();
    let mut fs: Vec<_> = l
        .terminating
        .iter()
        .filter(|(s, _)| reach[*s])
        .map(|&(s, m)| (l.states[s].to_string(), l.maps[m].clone()))
        .collect();
    fs.sort();
    (ts, fs)
}

fn reachable(l: &SigmaLts) -> Vec<bool> {
    let mut seen = vec![false; l.num_states()];
    let mut stack = vec![l.root];
    seen[l.root] = true;
    while let Some(s) = stack.pop() {
        for &i in &l.out[s] {
            let to = l.transitions[i].to;
            if !seen[to] {
                seen[to] = true;
                stack.push(to);
            }
        }
    }
    seen
}

#[test]
fn cross_semantics_agreement() {
    let c = ctx();
    let cfg = GenConfig::full(&c);
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for i in 0..200 {
        let p = cfg.term(&mut rng, 4);
        let direct = build_lts(&p, &c).unwrap();
        let cl = build_cond_lts(&p, &c).unwrap();
        let expanded = expand_to_sigma(&cl, &direct.decl, &c).unwrap();
        assert_eq!(keyed(&direct), keyed(&expanded), "term {i}: {p}");
    }
}

#[test]
fn named_process_file() {
    let f: SpecFile = parse_spec(&format!("{HEADER}proc P = a . b;\nproc Q = P || c;")).unwrap();
    let l = build_lts(f.proc("Q").unwrap(), &f.ctx).unwrap();
    assert!(l.num_states() >= 4);
}
