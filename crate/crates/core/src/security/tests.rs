use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::*;
use crate::gen::GenConfig;
use crate::parser::parse_spec;

const HEADER: &str = "domain -4..3;\nvars h, l, k;\nactions a, b, c, send/1, recv/1, pass/1;\n\
                      comm { a | b = c, send | recv = pass }\n";

fn file(body: &str) -> SpecFile {
    parse_spec(&format!("{HEADER}{body}")).unwrap()
}

fn spec(body: &str) -> SecuritySpec {
    SecuritySpec::from_file(&file(body), "P").unwrap()
}

fn acts(items: &[&str], f: &SpecFile) -> BTreeSet<Action> {
    items
        .iter()
        .map(|s| match crate::parser::parse_term(s, &f.ctx).unwrap() {
            ProcTerm::Act(a) => a,
            t => panic!("`{t}` is not an action"),
        })
        .collect()
}

#[test]
fn sets_of_a_send_then_assignment() {
    let body = "proc P = send(l) . h := 0;\nsecurity { low = { l }; ext = { send/1 } }";
    let f = file(body);
    let s = spec(body);
    let d = derive_sets(&s, &f.ctx);
    assert_eq!(d.high, BTreeSet::from(["h".to_string()]));
    assert_eq!(d.int, acts(&["h := 0"], &f));
    assert!(d.enc.is_empty());
}

#[test]
fn communicating_internal_actions_are_encapsulated() {
    let body = "proc P = a . b;\nsecurity { ext = { } }";
    let f = file(body);
    let d = derive_sets(&spec(body), &f.ctx);
    assert_eq!(d.enc, acts(&["a", "b"], &f));
    assert_eq!(d.int, d.enc);
}

#[test]
fn deadlock_has_no_sets() {
    let body = "proc P = delta;";
    let f = file(body);
    assert_eq!(derive_sets(&spec(body), &f.ctx), DerivedSets::default());
}

#[test]
fn external_assignments_are_rejected() {
    let f = file("proc P = h := 0;\nsecurity { ext = { h := * } }");
    assert!(matches!(SecuritySpec::from_file(&f, "P"), Err(Error::Declaration(_))));
}

#[test]
fn undeclared_low_variable_is_rejected() {
    let f = file("proc P = a;");
    let r = SecuritySpec::new(f.proc("P").unwrap().clone(), BTreeSet::from(["z".to_string()]), ActionSet::default(), &f.ctx);
    assert!(matches!(r, Err(Error::Declaration(_))));
}

const LEAK: &str = "proc P = [h = 0] -> send(0) + [not (h = 0)] -> send(1);\nsecurity { ext = { send/1 } }";

#[test]
fn leak_fails_with_a_pair_that_splits_on_zero() {
    let f = file(LEAK);
    let Dnii::Fails(leak) = check_dnii(&spec(LEAK), &f.ctx).unwrap() else {
        panic!("the leak is not detected")
    };
    let (x, y) = (leak.sigma.get("h").unwrap(), leak.sigma_prime.get("h").unwrap());
    assert_ne!(x == 0, y == 0);
    assert!(leak.result.counterexample.is_some());
}

#[test]
fn leak_distinguishes_zero_from_one() {
    let f = file(LEAK);
    let s = spec(LEAK);
    let d = derive_sets(&s, &f.ctx);
    let lts = |h: i64| build_lts(&observed(&s, &d, &EvalMap::from_pairs([("h", h)])), &f.ctx).unwrap();
    let r = rooted_branching_bisim(&lts(0), &lts(1)).unwrap();
    assert!(!r.equivalent);
    let visible = |l: &SigmaLts| l.successors(l.root, 0).map(|t| t.action.to_string()).collect::<Vec<_>>();
    assert_eq!(visible(&lts(0)), ["send(0)"]);
    assert_eq!(visible(&lts(1)), ["send(1)"]);
}

#[test]
fn low_copy_holds() {
    let body = "proc P = send(l) . h := h + 1;\nsecurity { low = { l }; ext = { send/1 } }";
    let f = file(body);
    let verdict = check_dnii(&spec(body), &f.ctx).unwrap();
    assert!(matches!(verdict, Dnii::Holds { comparisons: 56 }), "{verdict:?}");
}

#[test]
fn all_internal_holds() {
    let body = "proc P = [h = 0] -> a . k := h + [not (h = 0)] -> c . c;\nsecurity { ext = { } }";
    let f = file(body);
    assert!(check_dnii(&spec(body), &f.ctx).unwrap().holds());
}

#[test]
fn leak_through_a_low_variable_is_caught() {
    let body = "proc P = l := h . send(l);\nsecurity { low = { l }; ext = { send/1 } }";
    let f = file(body);
    assert!(!check_dnii(&spec(body), &f.ctx).unwrap().holds());
}

#[test]
fn trace_reaches_the_parting_state() {
    let body = "proc P = send(l) . ([h = 0] -> send(1) + [not (h = 0)] -> send(2));\n\
                security { low = { l }; ext = { send/1 } }";
    let f = file(body);
    let Dnii::Fails(leak) = check_dnii(&spec(body), &f.ctx).unwrap() else {
        panic!("the leak is not detected")
    };
    assert_eq!(leak.trace.len(), leak.result.counterexample.as_ref().map_or(0, |c| usize::from(c.left != 0)));
}

fn small_config(ctx: &Context) -> GenConfig {
    GenConfig {
        recursion: false,
        abstraction: false,
        evals: false,
        ..GenConfig::full(ctx)
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn verdicts_are_symmetric(seed in any::<u64>()) {
        let f = file("security { low = { l }; ext = { send/1, a } }");
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let p = small_config(&f.ctx).term(&mut rng, 3);
        let s = SecuritySpec::new(p, f.security.clone().unwrap().low, f.security.clone().unwrap().ext, &f.ctx).unwrap();
        let d = derive_sets(&s, &f.ctx);
        let maps = [
            EvalMap::from_pairs([("h", 0), ("l", 1), ("k", 2)]),
            EvalMap::from_pairs([("h", -1), ("l", 1), ("k", 3)]),
        ];
        let l: Vec<SigmaLts> = maps.iter().map(|m| build_lts(&observed(&s, &d, m), &f.ctx).unwrap()).collect();
        let fwd = rooted_branching_bisim(&l[0], &l[1]).unwrap().equivalent;
        let bwd = rooted_branching_bisim(&l[1], &l[0]).unwrap().equivalent;
        prop_assert_eq!(fwd, bwd);
        prop_assert!(rooted_branching_bisim(&l[0], &l[0]).unwrap().equivalent);
    }

    #[test]
    fn no_high_variables_means_no_leak(seed in any::<u64>()) {
        let f = file("security { low = { h, l, k }; ext = { send/1, a } }");
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let p = small_config(&f.ctx).term(&mut rng, 3);
        let s = SecuritySpec::new(p, f.security.clone().unwrap().low, f.security.clone().unwrap().ext, &f.ctx).unwrap();
        prop_assert!(derive_sets(&s, &f.ctx).high.is_empty());
        let holds_trivially = matches!(check_dnii(&s, &f.ctx).unwrap(), Dnii::Holds { comparisons: 0 });
        prop_assert!(holds_trivially);
    }

    #[test]
    fn derived_sets_partition_occurrences(seed in any::<u64>()) {
        let f = file("security { low = { l }; ext = { send/1, a } }");
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let p = small_config(&f.ctx).term(&mut rng, 3);
        let s = SecuritySpec::new(p.clone(), f.security.clone().unwrap().low, f.security.clone().unwrap().ext, &f.ctx).unwrap();
        let d = derive_sets(&s, &f.ctx);
        prop_assert!(d.enc.is_subset(&d.int));
        prop_assert!(d.int.iter().all(|a| !s.ext.contains(a)));
        for a in p.occurring_actions() {
            prop_assert!(d.int.contains(&a) || s.ext.contains(&a));
        }
        prop_assert!(!d.high.contains("l"));
    }
}
