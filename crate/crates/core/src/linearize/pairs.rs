//! Equal pairs built by random axiom rewrites.

use rand::seq::SliceRandom;
use rand::Rng;

use crate::axioms::AXIOMS;
use crate::cond::Condition;
use crate::context::Context;
use crate::term::ProcTerm;

use super::rules::rewrite;

/// Introductions `x -> C[x]` by right-to-left axioms that apply to every term.
const INTRODUCTIONS: &[&str] = &["A3", "A6", "A8", "A9", "GC1"];

fn introduce(axiom: &str, x: ProcTerm) -> ProcTerm {
    match axiom {
        "A3" => ProcTerm::alt(x.clone(), x),
        "A6" => ProcTerm::alt(x, ProcTerm::Delta),
        "A8" => ProcTerm::seq(x, ProcTerm::Eps),
        "A9" => ProcTerm::seq(ProcTerm::Eps, x),
        _ => ProcTerm::guard(Condition::True, x),
    }
}

/// Applies `n` random rewrites to `t`, each an axiom instance at some position,
/// and returns the result with the axioms used. BED and RDP are not used.
pub fn random_rewrites<R: Rng>(t: &ProcTerm, n: usize, rng: &mut R, ctx: &Context) -> (ProcTerm, Vec<&'static str>) {
    let mut cur = t.clone();
    let mut used = Vec::new();
    for _ in 0..n {
        let mut options: Vec<(&'static str, Vec<usize>, ProcTerm)> = Vec::new();
        for p in cur.positions() {
            let sub = cur.subterm(&p).expect("listed position");
            for &a in AXIOMS {
                if matches!(a, "BED" | "RDP" | "IMP1" | "IMP2") {
                    continue;
                }
                if let Ok(r) = rewrite(a, sub, ctx) {
                    options.push((a, p.clone(), r));
                }
            }
        }
        if rng.gen_bool(0.3) || options.is_empty() {
            let ps = cur.positions();
            let p = ps.choose(rng).expect("the root is a position").clone();
            let a = *INTRODUCTIONS.choose(rng).expect("nonempty");
            let sub = cur.subterm(&p).expect("listed position").clone();
            cur = cur.replace_at(&p, introduce(a, sub)).expect("listed position");
            used.push(a);
        } else {
            let (a, p, r) = options.swap_remove(rng.gen_range(0..options.len()));
            cur = cur.replace_at(&p, r).expect("listed position");
            used.push(a);
        }
    }
    (cur, used)
}
