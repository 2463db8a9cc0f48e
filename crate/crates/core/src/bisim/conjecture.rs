//! Empirical comparison of rooted branching and rooted ab-bisimilarity.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::context::Context;
use crate::error::Result;
use crate::gen::GenConfig;
use crate::sos::{build_cond_lts, build_lts};
use crate::term::{Action, ProcTerm};

use super::{rooted_ab_bisim, rooted_branching_bisim};

#[derive(Debug, Clone, Serialize)]
pub struct Divergence {
    pub left: String,
    pub right: String,
    pub rb: bool,
    pub rab: bool,
}

/// Agreement matrix of the two equivalences over a corpus of pairs.
#[derive(Debug, Clone, Default, Serialize)]
pub struct ConjectureReport {
    pub pairs: usize,
    pub both_equivalent: usize,
    pub both_inequivalent: usize,
    pub rb_only: usize,
    pub rab_only: usize,
    /// Pairs skipped because a resource limit was hit.
    pub skipped: usize,
    pub divergences: Vec<Divergence>,
}

impl ConjectureReport {
    pub fn agreement(&self) -> usize {
        self.both_equivalent + self.both_inequivalent
    }

    pub fn record(&mut self, t1: &ProcTerm, t2: &ProcTerm, ctx: &Context) {
        self.pairs += 1;
        match decide_both(t1, t2, ctx) {
            Err(_) => self.skipped += 1,
            Ok((true, true)) => self.both_equivalent += 1,
            Ok((false, false)) => self.both_inequivalent += 1,
            Ok((rb, rab)) => {
                if rb {
                    self.rb_only += 1;
                } else {
                    self.rab_only += 1;
                }
                self.divergences.push(Divergence {
                    left: t1.to_string(),
                    right: t2.to_string(),
                    rb,
                    rab,
                });
            }
        }
    }
}

fn decide_both(t1: &ProcTerm, t2: &ProcTerm, ctx: &Context) -> Result<(bool, bool)> {
    let rb = rooted_branching_bisim(&build_lts(t1, ctx)?, &build_lts(t2, ctx)?)?.equivalent;
    let (c1, c2) = (build_cond_lts(t1, ctx)?, build_cond_lts(t2, ctx)?);
    let decl = c1.decl.union(&c2.decl);
    let rab = rooted_ab_bisim(&c1, &c2, &decl, ctx)?.equivalent;
    Ok((rb, rab))
}

/// Decides both equivalences on `size` generated pairs.
///
/// About half of the pairs are related by a behavior-preserving rewrite of a
/// random subterm; the rest pair a term with an arbitrary mutation of it.
pub fn conjecture_experiment(size: usize, cfg: &GenConfig, depth: usize, seed: u64, ctx: &Context) -> ConjectureReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut report = ConjectureReport::default();
    for _ in 0..size {
        let (t1, t2) = pair(&mut rng, cfg, depth);
        report.record(&t1, &t2, ctx);
    }
    report
}

fn pair<R: Rng>(rng: &mut R, cfg: &GenConfig, depth: usize) -> (ProcTerm, ProcTerm) {
    let t = cfg.term(rng, depth);
    let positions = t.positions();
    let pos = positions.choose(rng).expect("the root is a position");
    let sub = t.subterm(pos).expect("valid position").clone();
    let new = if rng.gen_bool(0.5) {
        rewrite(rng, sub)
    } else {
        cfg.term(rng, 2)
    };
    let t2 = t.replace_at(pos, new).expect("valid position");
    (t, t2)
}

/// A term equal to `x` in every model of the axioms.
fn rewrite<R: Rng>(rng: &mut R, x: ProcTerm) -> ProcTerm {
    if let ProcTerm::Seq(a, w) = &x {
        if matches!(**a, ProcTerm::Act(_)) && rng.gen_bool(0.7) {
            let (a, w) = ((**a).clone(), (**w).clone());
            let tau = |t: ProcTerm| ProcTerm::seq(ProcTerm::Act(Action::Tau), t);
            return match (w, rng.gen_bool(0.5)) {
                // α·(u+v) = α·(τ·(u+v)+u)
                (ProcTerm::Alt(u, v), true) => {
                    let uv = ProcTerm::alt((*u).clone(), (*v).clone());
                    ProcTerm::seq(a, ProcTerm::alt(tau(uv), (*u).clone()))
                }
                (w, true) => ProcTerm::seq(a, ProcTerm::alt(tau(w.clone()), w)),
                // α·w = α·τ·w
                (w, false) => ProcTerm::seq(a, tau(w)),
            };
        }
    }
    match rng.gen_range(0..4) {
        0 => ProcTerm::alt(x.clone(), x),
        1 => ProcTerm::alt(x, ProcTerm::Delta),
        2 => ProcTerm::seq(x, ProcTerm::Eps),
        _ => ProcTerm::guard(crate::cond::Condition::True, x),
    }
}
