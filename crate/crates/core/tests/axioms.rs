use deacp::axioms::{AxiomGen, AXIOMS};
use deacp::bisim::{rooted_branching_bisim, verify_witness};
use deacp::parser::parse_spec;
use deacp::sos::build_lts;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const HEADER: &str = "domain -4..3;\nvars u, v;\nactions a, b, c, send/1, recv/1, pass/1;\n\
                      comm { a | b = c, send | recv = pass }\n";

#[test]
fn every_axiom_instance_is_bisimilar() {
    let ctx = parse_spec(HEADER).unwrap().ctx;
    let gen = AxiomGen::new(&ctx, 2);
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut failures = Vec::new();
    for name in AXIOMS.iter().filter(|n| **n != "BED") {
        for _ in 0..40 {
            let inst = gen.instantiate(name, &mut rng).unwrap();
            let l1 = build_lts(&inst.lhs, &ctx).unwrap();
            let l2 = build_lts(&inst.rhs, &ctx).unwrap();
            let r = rooted_branching_bisim(&l1, &l2).unwrap();
            if r.equivalent {
                assert_eq!(verify_witness(&l1, &l2, &r.relation).unwrap(), None);
            } else {
                failures.push(format!("{name}: {}  vs  {}\n    {}", inst.lhs, inst.rhs, r.counterexample.unwrap()));
            }
        }
    }
    assert!(failures.is_empty(), "{}", failures.join("\n"));
}

#[test]
fn bed_holds_exactly_for_constant_guards() {
    let ctx = parse_spec(HEADER).unwrap().ctx;
    let mut gen = AxiomGen::new(&ctx, 2);
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let decide = |gen: &AxiomGen, rng: &mut ChaCha8Rng| {
        let inst = gen.instantiate("BED", rng).unwrap();
        let l1 = build_lts(&inst.lhs, &ctx).unwrap();
        let l2 = build_lts(&inst.rhs, &ctx).unwrap();
        rooted_branching_bisim(&l1, &l2).unwrap().equivalent
    };
    let failed = (0..40).filter(|_| !decide(&gen, &mut rng)).count();
    assert!(failed > 0, "contingent guards should expose the lost guard");
    gen.cfg.bool_guards = true;
    assert!((0..40).all(|_| decide(&gen, &mut rng)));
}
