//! Head normal forms by recorded axiom rewrites.
//!
//! A normal sum is `delta` or a right-nested alternative composition of
//! summands `[phi] -> alpha . t` and `[phi] -> epsilon`. [`Deriver::hnf`]
//! rewrites the subterm at a position into a normal sum, recording each step.

use crate::cond::{satisfiable_own, valid_own, Condition};
use crate::context::Context;
use crate::error::{Error, Result};
use crate::term::{Action, ProcTerm};

use super::cert::{Dir, Rule, Step};
use super::rules::{communication_axiom, rewrite};

use ProcTerm as P;

fn at(p: &[usize], rest: &[usize]) -> Vec<usize> {
    let mut out = p.to_vec();
    out.extend_from_slice(rest);
    out
}

/// Summands of a normal sum, with their positions relative to it.
pub(crate) fn summand_positions(t: &ProcTerm) -> Vec<(Vec<usize>, &ProcTerm)> {
    let mut out = Vec::new();
    let mut cur = t;
    let mut pos = Vec::new();
    loop {
        match cur {
            P::Delta => break,
            P::Alt(s, rest) => {
                out.push((at(&pos, &[0]), &**s));
                pos.push(1);
                cur = rest;
            }
            s => {
                out.push((pos.clone(), s));
                break;
            }
        }
    }
    out
}

/// Decides conditions whose truth value does not depend on the map; otherwise the canonical label form.
pub(crate) fn normal_condition(phi: &Condition, ctx: &Context) -> Result<Condition> {
    if matches!(phi, Condition::True | Condition::False) {
        return Ok(phi.clone());
    }
    let bound = ctx.limits.enumeration;
    if !satisfiable_own(phi, &ctx.carrier, bound)? {
        return Ok(Condition::False);
    }
    if valid_own(phi, &ctx.carrier, bound)? {
        return Ok(Condition::True);
    }
    Ok(fold(phi, ctx)?.normalize(&ctx.carrier))
}

/// Replaces decided operands of connectives by constants and folds them away.
fn fold(phi: &Condition, ctx: &Context) -> Result<Condition> {
    use Condition as C;
    let decided = |c: &Condition| -> Result<Option<bool>> {
        let bound = ctx.limits.enumeration;
        Ok(if !satisfiable_own(c, &ctx.carrier, bound)? {
            Some(false)
        } else if valid_own(c, &ctx.carrier, bound)? {
            Some(true)
        } else {
            None
        })
    };
    let sub = |c: &Condition| -> Result<Condition> {
        Ok(match decided(c)? {
            Some(true) => C::True,
            Some(false) => C::False,
            None => fold(c, ctx)?,
        })
    };
    Ok(match phi {
        C::And(l, r) => match (sub(l)?, sub(r)?) {
            (C::False, _) | (_, C::False) => C::False,
            (C::True, x) | (x, C::True) => x,
            (l, r) => C::and(l, r),
        },
        C::Or(l, r) => match (sub(l)?, sub(r)?) {
            (C::True, _) | (_, C::True) => C::True,
            (C::False, x) | (x, C::False) => x,
            (l, r) => C::or(l, r),
        },
        C::Not(x) => match sub(x)? {
            C::True => C::False,
            C::False => C::True,
            x => C::not(x),
        },
        other => other.clone(),
    })
}

pub(crate) struct Deriver<'a> {
    ctx: &'a Context,
    pub term: ProcTerm,
    pub steps: Vec<Step>,
}

impl<'a> Deriver<'a> {
    pub fn new(term: ProcTerm, ctx: &'a Context) -> Self {
        Deriver {
            ctx,
            term,
            steps: Vec::new(),
        }
    }

    pub fn sub(&self, p: &[usize]) -> &ProcTerm {
        self.term.subterm(p).expect("engine positions are valid")
    }

    pub fn record(&mut self, rule: Rule, dir: Dir, p: &[usize], after: ProcTerm) {
        let before = self.sub(p).clone();
        self.term = self.term.replace_at(p, after.clone()).expect("valid position");
        self.steps.push(Step {
            rule,
            dir,
            pos: p.to_vec(),
            before,
            after,
        });
    }

    pub fn fwd(&mut self, axiom: &'static str, p: &[usize]) -> Result<()> {
        let after = rewrite(axiom, self.sub(p), self.ctx)?;
        self.record(Rule::Axiom(axiom), Dir::Forward, p, after);
        Ok(())
    }

    /// Replaces the subterm, which must be the axiom's right-hand side for `lhs`, by `lhs`.
    pub fn bwd(&mut self, axiom: &'static str, p: &[usize], lhs: ProcTerm) -> Result<()> {
        if rewrite(axiom, &lhs, self.ctx)? != *self.sub(p) {
            return Err(Error::Shape(format!("`{lhs}` does not rewrite to `{}` by {axiom}", self.sub(p))));
        }
        self.record(Rule::Axiom(axiom), Dir::Backward, p, lhs);
        Ok(())
    }

    /// Rewrites the guard at `p` to an equivalent condition.
    pub fn imp2(&mut self, p: &[usize], psi: Condition) {
        let P::Guard(phi, x) = self.sub(p).clone() else {
            panic!("IMP2 needs a guard");
        };
        if phi != psi {
            self.record(Rule::Axiom("IMP2"), Dir::Forward, p, P::Guard(psi, x));
        }
    }

    /// Rewrites `lhs` at `p` into `rhs` by an earlier lemma.
    pub fn lemma(&mut self, index: usize, p: &[usize], lhs: &ProcTerm, rhs: &ProcTerm, dir: Dir) {
        debug_assert_eq!(self.sub(p), if dir == Dir::Forward { lhs } else { rhs });
        let after = if dir == Dir::Forward { rhs } else { lhs };
        self.record(Rule::Lemma(index), dir, p, after.clone());
    }

    /// Rewrites the subterm at `p` into a normal sum.
    pub fn hnf(&mut self, p: &[usize]) -> Result<()> {
        match self.sub(p).clone() {
            P::Delta => Ok(()),
            P::Eps => self.bwd("GC1", p, P::guard(Condition::True, P::Eps)),
            P::Act(a) => {
                let s = P::seq(P::Act(a), P::Eps);
                self.bwd("A8", p, s.clone())?;
                self.bwd("GC1", p, P::guard(Condition::True, s))
            }
            P::Alt(..) => {
                self.hnf(&at(p, &[0]))?;
                self.hnf(&at(p, &[1]))?;
                self.merge(p)
            }
            P::Seq(x, y) => {
                if matches!(*x, P::Act(_)) {
                    self.bwd("GC1", p, P::guard(Condition::True, P::Seq(x, y)))?;
                    return self.tidy(&at(p, &[0, 1]));
                }
                self.hnf(&at(p, &[0]))?;
                self.seq_dist(p)
            }
            P::Guard(_, body) => {
                if matches!(*body, P::Eps) || matches!(&*body, P::Seq(a, _) if matches!(**a, P::Act(_))) {
                    return self.finish_guard(p);
                }
                self.hnf(&at(p, &[0]))?;
                self.push_guard(p)
            }
            P::Par(..) => {
                self.fwd("CM1E", p)?;
                self.hnf(p)
            }
            P::LeftMerge(..) => {
                self.hnf(&at(p, &[0]))?;
                self.lm_dist(p)
            }
            P::CommMerge(..) => {
                self.hnf(&at(p, &[0]))?;
                self.hnf(&at(p, &[1]))?;
                self.cm_dist(p)
            }
            P::Encap(..) | P::Abstr(..) => {
                self.hnf(&at(p, &[0]))?;
                self.hide_dist(p)
            }
            P::Eval(..) => {
                self.hnf(&at(p, &[0]))?;
                self.eval_dist(p)
            }
            P::Rec(..) => {
                self.fwd("RDP", p)?;
                self.hnf(p)
            }
            P::RecVar(x) => Err(Error::NotClosed(format!("free recursion variable {x}"))),
        }
    }

    /// `S1 + S2` of two normal sums into one.
    fn merge(&mut self, p: &[usize]) -> Result<()> {
        let P::Alt(s1, s2) = self.sub(p).clone() else {
            return Ok(());
        };
        match (&*s1, &*s2) {
            (P::Delta, _) => {
                self.fwd("A1", p)?;
                self.fwd("A6", p)
            }
            (_, P::Delta) => self.fwd("A6", p),
            (P::Alt(..), _) => {
                self.fwd("A2", p)?;
                self.merge(&at(p, &[1]))
            }
            _ => Ok(()),
        }
    }

    /// Normalizes the condition of the summand at `p`, dropping it when false.
    fn finish_guard(&mut self, p: &[usize]) -> Result<()> {
        let P::Guard(phi, _) = self.sub(p) else {
            return Ok(());
        };
        let psi = normal_condition(phi, self.ctx)?;
        self.imp2(p, psi.clone());
        if psi == Condition::False {
            self.fwd("GC2", p)?;
        }
        Ok(())
    }

    /// `[phi] -> S` with `S` normal.
    fn push_guard(&mut self, p: &[usize]) -> Result<()> {
        let P::Guard(_, s) = self.sub(p).clone() else {
            return Ok(());
        };
        match &*s {
            P::Delta => self.fwd("GC3", p),
            P::Alt(..) => {
                self.fwd("GC4", p)?;
                self.push_guard(&at(p, &[0]))?;
                self.push_guard(&at(p, &[1]))?;
                self.merge(p)
            }
            _ => {
                self.fwd("GC6", p)?;
                self.finish_guard(p)
            }
        }
    }

    /// Removes `epsilon` and evaluation clutter at the top of a residual.
    fn tidy(&mut self, q: &[usize]) -> Result<()> {
        loop {
            let axiom = match self.sub(q) {
                P::Seq(e, _) if **e == P::Eps => "A9",
                P::Seq(_, e) if **e == P::Eps => "A8",
                P::Eval(_, e) if **e == P::Eps => "V0",
                P::Encap(_, e) if **e == P::Eps => "D0",
                P::Abstr(_, e) if **e == P::Eps => "T0",
                _ => return Ok(()),
            };
            self.fwd(axiom, q)?;
        }
    }

    /// `S . y` with `S` normal.
    fn seq_dist(&mut self, p: &[usize]) -> Result<()> {
        let P::Seq(s, y) = self.sub(p).clone() else {
            unreachable!("sequential composition expected")
        };
        match *s {
            P::Delta => self.fwd("A7", p),
            P::Alt(..) => {
                self.fwd("A4", p)?;
                self.seq_dist(&at(p, &[0]))?;
                self.seq_dist(&at(p, &[1]))?;
                self.merge(p)
            }
            P::Guard(phi, b) => {
                let body = P::seq((*b).clone(), (*y).clone());
                self.bwd("GC5", p, P::guard(phi, body))?;
                let q = at(p, &[0]);
                if *b == P::Eps {
                    self.fwd("A9", &q)?;
                    self.hnf(&q)?;
                    self.push_guard(p)
                } else {
                    self.fwd("A5", &q)?;
                    self.tidy(&at(&q, &[1]))
                }
            }
            other => Err(Error::Shape(format!("`{other}` is not a normal sum"))),
        }
    }

    /// `S ||_ y` with `S` normal.
    fn lm_dist(&mut self, p: &[usize]) -> Result<()> {
        let P::LeftMerge(s, _) = self.sub(p).clone() else {
            unreachable!("left merge expected")
        };
        match *s {
            P::Delta => {
                self.bwd("GC2", &at(p, &[0]), P::guard(Condition::False, P::Eps))?;
                self.fwd("GC8", p)?;
                self.fwd("GC2", p)
            }
            P::Alt(..) => {
                self.fwd("CM4", p)?;
                self.lm_dist(&at(p, &[0]))?;
                self.lm_dist(&at(p, &[1]))?;
                self.merge(p)
            }
            P::Guard(_, b) => {
                self.fwd("GC8", p)?;
                let q = at(p, &[0]);
                if *b == P::Eps {
                    self.fwd("CM2E", &q)?;
                    self.fwd("GC3", p)
                } else {
                    self.fwd("CM3", &q)?;
                    self.tidy(&at(&q, &[1]))
                }
            }
            other => Err(Error::Shape(format!("`{other}` is not a normal sum"))),
        }
    }

    /// `S1 | S2` with both normal.
    fn cm_dist(&mut self, p: &[usize]) -> Result<()> {
        let P::CommMerge(s1, s2) = self.sub(p).clone() else {
            unreachable!("communication merge expected")
        };
        let false_eps = P::guard(Condition::False, P::Eps);
        match (&*s1, &*s2) {
            (P::Delta, _) => {
                self.bwd("GC2", &at(p, &[0]), false_eps)?;
                self.fwd("GC9", p)?;
                self.fwd("GC2", p)
            }
            (_, P::Delta) => {
                self.bwd("GC2", &at(p, &[1]), false_eps)?;
                self.fwd("GC10", p)?;
                self.fwd("GC2", p)
            }
            (P::Alt(..), _) | (_, P::Alt(..)) => {
                self.fwd(if matches!(*s1, P::Alt(..)) { "CM8" } else { "CM9" }, p)?;
                self.cm_dist(&at(p, &[0]))?;
                self.cm_dist(&at(p, &[1]))?;
                self.merge(p)
            }
            (P::Guard(_, b), P::Guard(_, c)) => {
                self.fwd("GC9", p)?;
                let q = at(p, &[0]);
                self.fwd("GC10", &q)?;
                self.fwd("GC6", p)?;
                let axiom = match (&**b, &**c) {
                    (P::Eps, _) => "CM5E",
                    (_, P::Eps) => "CM6E",
                    (P::Seq(a, _), P::Seq(b, _)) => match (&**a, &**b) {
                        (P::Act(a), P::Act(b)) => communication_axiom(a, b),
                        _ => unreachable!("summands start with an action"),
                    },
                    _ => unreachable!("summands of normal sums"),
                };
                if self.fwd(axiom, &q).is_err() && axiom == "CM7Da" {
                    self.fwd("CM7Db", &q)?;
                }
                if let P::Seq(c, _) = self.sub(&q) {
                    if **c == P::Delta {
                        self.fwd("A7", &q)?;
                    }
                }
                match self.sub(&q) {
                    P::Delta => self.fwd("GC3", p),
                    P::Guard(..) => {
                        self.fwd("GC6", p)?;
                        self.finish_guard(p)?;
                        self.tidy_summand(p)
                    }
                    _ => {
                        self.finish_guard(p)?;
                        self.tidy_summand(p)
                    }
                }
            }
            _ => Err(Error::Shape(format!("`{}` has operands that are not normal sums", self.sub(p)))),
        }
    }

    fn tidy_summand(&mut self, p: &[usize]) -> Result<()> {
        if let P::Guard(_, b) = self.sub(p) {
            if matches!(&**b, P::Seq(..)) {
                return self.tidy(&at(p, &[0, 1]));
            }
        }
        Ok(())
    }

    /// `encap_H(S)` or `hide_I(S)` with `S` normal.
    fn hide_dist(&mut self, p: &[usize]) -> Result<()> {
        let (encap, s) = match self.sub(p).clone() {
            P::Encap(_, s) => (true, s),
            P::Abstr(_, s) => (false, s),
            _ => unreachable!("encapsulation or abstraction expected"),
        };
        let pick = |d: &'static str, t: &'static str| if encap { d } else { t };
        match *s {
            P::Delta => self.fwd(pick("D1", "T1"), p),
            P::Alt(..) => {
                self.fwd(pick("D3", "T3"), p)?;
                self.hide_dist(&at(p, &[0]))?;
                self.hide_dist(&at(p, &[1]))?;
                self.merge(p)
            }
            P::Guard(_, b) => {
                self.fwd(pick("GC11", "GC12"), p)?;
                let q = at(p, &[0]);
                if *b == P::Eps {
                    return self.fwd(pick("D0", "T0"), &q);
                }
                self.fwd(pick("D4", "T4"), &q)?;
                let head = at(&q, &[0]);
                if rewrite(pick("D1", "T1"), self.sub(&head), self.ctx).is_ok() {
                    self.fwd(pick("D1", "T1"), &head)?;
                } else {
                    self.fwd(pick("D2", "T2"), &head)?;
                }
                if *self.sub(&head) == P::Delta {
                    self.fwd("A7", &q)?;
                    return self.fwd("GC3", p);
                }
                self.tidy(&at(&q, &[1]))
            }
            other => Err(Error::Shape(format!("`{other}` is not a normal sum"))),
        }
    }

    /// `eval_sigma(S)` with `S` normal.
    fn eval_dist(&mut self, p: &[usize]) -> Result<()> {
        let P::Eval(_, s) = self.sub(p).clone() else {
            unreachable!("evaluation expected")
        };
        match *s {
            P::Delta => {
                self.bwd("GC2", &at(p, &[0]), P::guard(Condition::False, P::Eps))?;
                self.fwd("V6", p)?;
                self.fwd("GC2", p)
            }
            P::Alt(..) => {
                self.fwd("V5", p)?;
                self.eval_dist(&at(p, &[0]))?;
                self.eval_dist(&at(p, &[1]))?;
                self.merge(p)
            }
            P::Guard(..) => {
                self.fwd("V6", p)?;
                self.finish_guard(p)?;
                if *self.sub(p) == P::Delta {
                    return Ok(());
                }
                let q = at(p, &[0]);
                let axiom = match self.sub(&q) {
                    P::Eval(_, b) => match &**b {
                        P::Eps => "V0",
                        P::Seq(a, _) => match &**a {
                            P::Act(Action::Tau) => "V1",
                            P::Act(Action::Basic(_)) => "V2",
                            P::Act(Action::Param(..)) => "V3",
                            P::Act(Action::Assign(..)) => "V4",
                            _ => unreachable!("summands start with an action"),
                        },
                        _ => unreachable!("summand bodies"),
                    },
                    _ => unreachable!("V6 leaves an evaluation"),
                };
                self.fwd(axiom, &q)?;
                self.tidy_summand(p)
            }
            other => Err(Error::Shape(format!("`{other}` is not a normal sum"))),
        }
    }
}
