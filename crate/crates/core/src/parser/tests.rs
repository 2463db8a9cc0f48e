use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::*;
use crate::gen::GenConfig;
use crate::term::{linear_summands, Summand};

const HEADER: &str = "domain -4..3;\nvars u, v;\nactions a, b, c, send/1;\ncomm { a | b = c }\n";

fn ctx() -> Context {
    parse_spec(HEADER).unwrap().ctx
}

fn term(s: &str) -> ProcTerm {
    parse_term(s, &ctx()).unwrap()
}

#[test]
fn alternative_of_constants() {
    assert_eq!(term("delta + epsilon"), ProcTerm::alt(ProcTerm::Delta, ProcTerm::Eps));
}

#[test]
fn communication_merge_with_declared_table() {
    let c = ctx();
    assert_eq!(c.comm.apply("a", "b"), Some("c"));
    assert_eq!(term("a | b"), ProcTerm::comm_merge(ProcTerm::basic("a"), ProcTerm::basic("b")));
}

#[test]
fn division_specification() {
    let src = "vars i, j, q, r;\n\
               proc D = rec Q where { Q = [r >= j] -> q := q + 1 . R + [r < j] -> epsilon, \
               R = [true] -> r := r - j . Q };";
    let f = parse_spec(src).unwrap();
    let ProcTerm::Rec(x, spec) = f.proc("D").unwrap() else { panic!("expected a recursion constant") };
    assert_eq!(x, "Q");
    let q = linear_summands(spec.rhs("Q").unwrap()).unwrap();
    assert_eq!(q.len(), 2);
    let Summand::Prefix(phi, Action::Assign(v, e), target) = &q[0] else { panic!("expected a prefix summand") };
    assert_eq!(phi.to_string(), "r >= j");
    assert_eq!((v.as_str(), e.to_string().as_str(), target.as_str()), ("q", "q + 1", "R"));
    assert!(matches!(&q[1], Summand::Exit(c) if c.to_string() == "r < j"));
    assert_eq!(crate::term::reachable(spec, "Q").unwrap().len(), 2);
}

#[test]
fn bare_summands_are_desugared() {
    let f = parse_spec(&format!("{HEADER}proc P = rec X where {{ X = a . X + epsilon }};")).unwrap();
    let ProcTerm::Rec(_, spec) = f.proc("P").unwrap() else { panic!() };
    assert_eq!(spec.rhs("X").unwrap().to_string(), "[true] -> a . X + [true] -> epsilon");
}

#[test]
fn named_maps_specs_and_security() {
    let src = format!(
        "{HEADER}maps {{ s = {{ u = 1 }} }}\nspec E = {{ X = [u = 1] -> a . X }};\n\
         proc P = eval{{s}}(rec X where E);\nsecurity {{ low = {{ v }}; ext = {{ send/1 }} }}"
    );
    let f = parse_spec(&src).unwrap();
    assert_eq!(f.maps["s"], EvalMap::from_pairs([("u", 1), ("v", 0)]));
    let p = f.proc("P").unwrap();
    assert_eq!(
        p.to_string(),
        "eval{u=1, v=0}(rec X where { X = [u = 1] -> a . X })"
    );
    let sec = f.security.as_ref().unwrap();
    assert!(sec.low.contains("v"));
    assert!(sec.ext.contains(&Action::Param("send".into(), vec![DataTerm::Lit(0)])));
    assert_eq!(f.resolve_term("P").unwrap(), *p);
    assert_eq!(f.resolve_term("P + a").unwrap(), ProcTerm::alt(p.clone(), ProcTerm::basic("a")));
}

#[test]
fn assignment_data_stops_at_alternative() {
    let t = term("u := u + 1 + a");
    assert_eq!(t.to_string(), "u := (u + 1) + a");
    let t = term("u := v + v := 2");
    assert!(matches!(t, ProcTerm::Alt(..)));
    let t = term("u := 1 + (a . b)");
    assert!(matches!(t, ProcTerm::Alt(..)));
    assert_eq!(term("u := 1 + (2)").to_string(), "u := (1 + 2)");
}

#[test]
fn condition_syntax() {
    let c = ctx();
    let phi = parse_condition("forall x. x <= 3 and u != v -> not (u < 0 or v >= 1)", &c).unwrap();
    assert!(matches!(phi, Condition::Forall(..)));
    let iff = parse_condition("u = 0 <-> v = 0", &c).unwrap();
    assert!(matches!(iff, Condition::And(..)));
    assert!(parse_condition("(u + 1) * 2 = v", &c).is_ok());
    assert!(parse_condition("x = 1", &c).is_err());
}

fn parse_error(src: &str) -> (usize, usize, String) {
    match parse_spec(src) {
        Err(Error::Parse { line, col, message }) => (line, col, message),
        other => panic!("expected a parse error, got {other:?}"),
    }
}

#[test]
fn diagnostics_carry_positions() {
    let (l, c, m) = parse_error("actions a;\nproc P = a . b;");
    assert_eq!((l, c), (2, 14));
    assert!(m.contains("undeclared"), "{m}");
    let (l, _, m) = parse_error("actions a, b, c, d;\ncomm { a | b = c, b | a = d }");
    assert_eq!(l, 2);
    assert!(m.contains("communication"), "{m}");
    let (_, _, m) = parse_error("actions send/1;\nproc P = send(1, 2);");
    assert!(m.contains("arity"), "{m}");
    let (_, _, m) = parse_error("domain 0..3;\nactions send/1;\nproc P = send(7);");
    assert!(m.contains("carrier"), "{m}");
    let (_, _, m) = parse_error("actions a;\nproc P = rec X where { X = tau . X };");
    assert!(m.contains("tau-cycle"), "{m}");
    let (_, _, m) = parse_error("actions a, b;\nproc P = rec X where { X = a . b };");
    assert!(m.contains("linear"), "{m}");
    let (l, c, _) = parse_error("vars u;\nactions a;\nproc P = a . u;");
    assert_eq!((l, c), (3, 14));
    let (_, _, m) = parse_error("vars u;\ndomain 0..1;");
    assert!(m.contains("first"), "{m}");
}

#[test]
fn render_parse_round_trip_on_random_terms() {
    let c = ctx();
    let cfg = GenConfig::full(&c);
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for i in 0..1000 {
        let t = cfg.term(&mut rng, 5);
        let text = render(&t);
        let back = parse_term(&text, &c).unwrap_or_else(|e| panic!("term {i}: `{text}`: {e}"));
        assert_eq!(back, t, "term {i}: `{text}`");
    }
}
