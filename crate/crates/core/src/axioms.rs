//! Random closed instances of the equational axioms.
//!
//! Each instance is a pair of closed terms that the axiom equates. Metavariables
//! for processes are filled by [`GenConfig::term`] at the configured depth.

use rand::seq::SliceRandom;
use rand::Rng;

use crate::cond::{conj, eval_cond, Condition};
use crate::context::Context;
use crate::data::{enumerate_maps, eval_data, BinOp, DataTerm, VarDecl};
use crate::error::{Error, Result};
use crate::gen::GenConfig;
use crate::term::{Action, ActionPattern, ActionSet, CommFunction, ProcTerm};

/// Names of the axioms and schemas [`AxiomGen::instantiate`] knows.
pub const AXIOMS: &[&str] = &[
    "A1", "A2", "A3", "A4", "A5", "A6", "A7", "A8", "A9", "CM1E", "CM2E", "CM3", "CM4", "CM5E", "CM6E", "CM7", "CM8",
    "CM9", "D0", "D1", "D2", "D3", "D4", "T0", "T1", "T2", "T3", "T4", "BE", "IMP1", "IMP2", "GC1", "GC2", "GC3", "GC4",
    "GC5", "GC6", "GC7", "GC8", "GC9", "GC10", "GC11", "GC12", "V0", "V1", "V2", "V3", "V4", "V5", "V6", "CM7Da",
    "CM7Db", "CM7Dc", "CM7Dd", "CM7De", "CM7Df", "BED", "RDP",
];

#[derive(Debug, Clone)]
pub struct AxiomInstance {
    pub axiom: &'static str,
    pub lhs: ProcTerm,
    pub rhs: ProcTerm,
}

/// Instance generator over the names declared in a context.
#[derive(Debug, Clone)]
pub struct AxiomGen {
    pub cfg: GenConfig,
    pub comm: CommFunction,
    /// Depth of the terms substituted for process metavariables.
    pub depth: usize,
    decl: VarDecl,
}

use ProcTerm as P;

fn act(a: Action) -> ProcTerm {
    P::Act(a)
}

impl AxiomGen {
    pub fn new(ctx: &Context, depth: usize) -> Self {
        AxiomGen {
            cfg: GenConfig::full(ctx),
            comm: ctx.comm.clone(),
            depth,
            decl: ctx.vars.clone(),
        }
    }

    fn x<R: Rng>(&self, rng: &mut R) -> ProcTerm {
        self.cfg.term(rng, self.depth)
    }

    /// An action constant, occasionally `delta`.
    fn alpha<R: Rng>(&self, rng: &mut R) -> ProcTerm {
        if rng.gen_bool(0.1) {
            P::Delta
        } else {
            act(self.cfg.action(rng))
        }
    }

    fn phi<R: Rng>(&self, rng: &mut R) -> Condition {
        self.cfg.condition(rng, 1)
    }

    fn basic<R: Rng>(&self, rng: &mut R) -> Result<String> {
        self.cfg
            .basic
            .choose(rng)
            .cloned()
            .ok_or_else(|| Error::Unsupported("no basic actions declared".into()))
    }

    fn param<R: Rng>(&self, rng: &mut R, name: &str, n: usize) -> Action {
        Action::Param(name.to_string(), (0..n).map(|_| self.cfg.data(rng, 1)).collect())
    }

    /// An action that is not data-parameterized.
    fn plain<R: Rng>(&self, rng: &mut R) -> Result<Action> {
        Ok(match rng.gen_range(0..3) {
            0 => Action::Tau,
            1 if !self.cfg.vars.is_empty() => {
                Action::Assign(self.cfg.vars.choose(rng).unwrap().clone(), self.cfg.data(rng, 1))
            }
            _ => Action::Basic(self.basic(rng)?),
        })
    }

    fn assignment<R: Rng>(&self, rng: &mut R) -> Result<Action> {
        let v = self
            .cfg
            .vars
            .choose(rng)
            .ok_or_else(|| Error::Unsupported("no flexible variables declared".into()))?;
        Ok(Action::Assign(v.clone(), self.cfg.data(rng, 1)))
    }

    fn pattern_for(a: &Action) -> Option<ActionPattern> {
        match a {
            Action::Tau => None,
            Action::Basic(n) | Action::Param(n, _) => Some(ActionPattern::Name(n.clone())),
            Action::Assign(v, _) => Some(ActionPattern::Assign(v.clone())),
        }
    }

    /// A random set containing `a` (when `inside`) or avoiding it.
    fn set_around<R: Rng>(&self, rng: &mut R, a: &Action, inside: bool) -> ActionSet {
        let mut pats: Vec<ActionPattern> = self.cfg.action_set(rng).0.into_iter().filter(|p| !p.matches(a)).collect();
        if inside {
            pats.extend(Self::pattern_for(a));
        }
        ActionSet::new(pats)
    }

    fn parallel(x: ProcTerm, y: ProcTerm) -> ProcTerm {
        P::par(x, y)
    }

    /// Two parameterized names with equal arity that communicate, and the result.
    fn communicating_params<R: Rng>(&self, rng: &mut R) -> Result<(String, String, String, usize)> {
        let mut cands = Vec::new();
        for (a, n) in &self.cfg.param {
            for (b, m) in &self.cfg.param {
                if n == m {
                    if let Some(c) = self.comm.apply(a, b) {
                        cands.push((a.clone(), b.clone(), c.to_string(), *n));
                    }
                }
            }
        }
        cands
            .choose(rng)
            .cloned()
            .ok_or_else(|| Error::Unsupported("no communicating parameterized actions".into()))
    }

    fn equal_data<R: Rng>(&self, rng: &mut R) -> Result<(DataTerm, DataTerm)> {
        let e = self.cfg.data(rng, 1);
        let f = self.cfg.data(rng, 1);
        let (l, r) = match rng.gen_range(0..6) {
            0 => (DataTerm::bin(BinOp::Add, e.clone(), DataTerm::Lit(0)), e),
            1 => (DataTerm::bin(BinOp::Mul, DataTerm::Lit(1), e.clone()), e),
            2 => (DataTerm::bin(BinOp::Sub, e.clone(), DataTerm::Lit(0)), e),
            3 => (DataTerm::bin(BinOp::Add, e.clone(), f.clone()), DataTerm::bin(BinOp::Add, f, e)),
            4 => (DataTerm::bin(BinOp::Mul, e.clone(), f.clone()), DataTerm::bin(BinOp::Mul, f, e)),
            _ => {
                let closed = e.fold_closed(&self.cfg.carrier);
                (e, closed)
            }
        };
        for sigma in enumerate_maps(&self.decl, &self.cfg.carrier, usize::MAX)? {
            if eval_data(&l, &sigma, &self.cfg.carrier)? != eval_data(&r, &sigma, &self.cfg.carrier)? {
                return Err(Error::Shape(format!("`{l}` and `{r}` differ")));
            }
        }
        Ok((l, r))
    }

    fn equivalent_condition<R: Rng>(&self, rng: &mut R) -> Result<(Condition, Condition)> {
        let phi = self.phi(rng);
        let psi = self.phi(rng);
        let (l, r) = match rng.gen_range(0..6) {
            0 => (phi.clone(), Condition::not(Condition::not(phi))),
            1 => (Condition::and(phi.clone(), psi.clone()), Condition::and(psi, phi)),
            2 => (Condition::or(phi.clone(), Condition::False), phi),
            3 => (
                Condition::not(Condition::and(phi.clone(), psi.clone())),
                Condition::or(Condition::not(phi), Condition::not(psi)),
            ),
            4 => (Condition::implies(phi.clone(), psi.clone()), Condition::or(Condition::not(phi), psi)),
            _ => (Condition::and(phi.clone(), Condition::True), phi),
        };
        for sigma in enumerate_maps(&self.decl, &self.cfg.carrier, usize::MAX)? {
            if eval_cond(&l, &sigma, &self.cfg.carrier)? != eval_cond(&r, &sigma, &self.cfg.carrier)? {
                return Err(Error::Shape(format!("`{l}` and `{r}` differ")));
            }
        }
        Ok((l, r))
    }

    pub fn instantiate<R: Rng>(&self, axiom: &str, rng: &mut R) -> Result<AxiomInstance> {
        let name = *AXIOMS
            .iter()
            .find(|a| **a == axiom)
            .ok_or_else(|| Error::Unsupported(format!("unknown axiom `{axiom}`")))?;
        let (x, y, z) = (self.x(rng), self.x(rng), self.x(rng));
        let (lhs, rhs) = match name {
            "A1" => (P::alt(x.clone(), y.clone()), P::alt(y, x)),
            "A2" => (P::alt(P::alt(x.clone(), y.clone()), z.clone()), P::alt(x, P::alt(y, z))),
            "A3" => (P::alt(x.clone(), x.clone()), x),
            "A4" => (
                P::seq(P::alt(x.clone(), y.clone()), z.clone()),
                P::alt(P::seq(x, z.clone()), P::seq(y, z)),
            ),
            "A5" => (P::seq(P::seq(x.clone(), y.clone()), z.clone()), P::seq(x, P::seq(y, z))),
            "A6" => (P::alt(x.clone(), P::Delta), x),
            "A7" => (P::seq(P::Delta, x), P::Delta),
            "A8" => (P::seq(x.clone(), P::Eps), x),
            "A9" => (P::seq(P::Eps, x.clone()), x),
            "CM1E" => {
                let all = ActionSet::all();
                let rhs = P::sum([
                    P::left_merge(x.clone(), y.clone()),
                    P::left_merge(y.clone(), x.clone()),
                    P::comm_merge(x.clone(), y.clone()),
                    P::seq(P::encap(all.clone(), x.clone()), P::encap(all, y.clone())),
                ]);
                (Self::parallel(x, y), rhs)
            }
            "CM2E" => (P::left_merge(P::Eps, x), P::Delta),
            "CM3" => {
                let a = self.alpha(rng);
                (
                    P::left_merge(P::seq(a.clone(), x.clone()), y.clone()),
                    P::seq(a, Self::parallel(x, y)),
                )
            }
            "CM4" => (
                P::left_merge(P::alt(x.clone(), y.clone()), z.clone()),
                P::alt(P::left_merge(x, z.clone()), P::left_merge(y, z)),
            ),
            "CM5E" => (P::comm_merge(P::Eps, x), P::Delta),
            "CM6E" => (P::comm_merge(x, P::Eps), P::Delta),
            "CM7" => {
                let (a, b) = (self.basic(rng)?, self.basic(rng)?);
                let c = match self.comm.apply(&a, &b) {
                    Some(c) => P::basic(c),
                    None => P::Delta,
                };
                (
                    P::comm_merge(P::seq(P::basic(&a), x.clone()), P::seq(P::basic(&b), y.clone())),
                    P::seq(c, Self::parallel(x, y)),
                )
            }
            "CM8" => (
                P::comm_merge(P::alt(x.clone(), y.clone()), z.clone()),
                P::alt(P::comm_merge(x, z.clone()), P::comm_merge(y, z)),
            ),
            "CM9" => (
                P::comm_merge(x.clone(), P::alt(y.clone(), z.clone())),
                P::alt(P::comm_merge(x.clone(), y), P::comm_merge(x, z)),
            ),
            "D0" => (P::encap(self.cfg.action_set(rng), P::Eps), P::Eps),
            "D1" | "D2" | "T1" | "T2" => {
                let a = self.cfg.action(rng);
                let inside = matches!(name, "D2" | "T2") && !a.is_tau();
                let set = self.set_around(rng, &a, inside);
                let encap = name.starts_with('D');
                let lhs = if encap { P::encap(set, act(a.clone())) } else { P::abstr(set, act(a.clone())) };
                let rhs = match (inside, encap) {
                    (false, _) => act(a),
                    (true, true) => P::Delta,
                    (true, false) => P::tau(),
                };
                (lhs, rhs)
            }
            "D3" | "D4" | "T3" | "T4" => {
                let h = self.cfg.action_set(rng);
                let op = |t: ProcTerm| if name.starts_with('D') { P::encap(h.clone(), t) } else { P::abstr(h.clone(), t) };
                let comb = |l: ProcTerm, r: ProcTerm| if name.ends_with('3') { P::alt(l, r) } else { P::seq(l, r) };
                (op(comb(x.clone(), y.clone())), comb(op(x), op(y)))
            }
            "T0" => (P::abstr(self.cfg.action_set(rng), P::Eps), P::Eps),
            "BE" => {
                let a = self.alpha(rng);
                (
                    P::seq(a.clone(), P::alt(P::seq(P::tau(), P::alt(x.clone(), y.clone())), x.clone())),
                    P::seq(a, P::alt(x, y)),
                )
            }
            "IMP1" => {
                let (e, f) = self.equal_data(rng)?;
                let wrap = |d: DataTerm| -> Result<ProcTerm> {
                    Ok(match self.cfg.param.first() {
                        Some((n, 1)) => P::seq(act(Action::Param(n.clone(), vec![d])), x.clone()),
                        _ => P::seq(act(Action::Assign(self.cfg.vars.first().cloned().unwrap_or_default(), d)), x.clone()),
                    })
                };
                (wrap(e)?, wrap(f)?)
            }
            "IMP2" => {
                let (phi, psi) = self.equivalent_condition(rng)?;
                (P::guard(phi, x.clone()), P::guard(psi, x))
            }
            "GC1" => (P::guard(Condition::True, x.clone()), x),
            "GC2" => (P::guard(Condition::False, x), P::Delta),
            "GC3" => (P::guard(self.phi(rng), P::Delta), P::Delta),
            "GC4" => {
                let phi = self.phi(rng);
                (
                    P::guard(phi.clone(), P::alt(x.clone(), y.clone())),
                    P::alt(P::guard(phi.clone(), x), P::guard(phi, y)),
                )
            }
            "GC5" => {
                let phi = self.phi(rng);
                (P::guard(phi.clone(), P::seq(x.clone(), y.clone())), P::seq(P::guard(phi, x), y))
            }
            "GC6" => {
                let (phi, psi) = (self.phi(rng), self.phi(rng));
                (
                    P::guard(phi.clone(), P::guard(psi.clone(), x.clone())),
                    P::guard(Condition::and(phi, psi), x),
                )
            }
            "GC7" => {
                let (phi, psi) = (self.phi(rng), self.phi(rng));
                (
                    P::guard(Condition::or(phi.clone(), psi.clone()), x.clone()),
                    P::alt(P::guard(phi, x.clone()), P::guard(psi, x)),
                )
            }
            "GC8" | "GC9" | "GC10" => {
                let phi = self.phi(rng);
                let g = |t: ProcTerm| P::guard(phi.clone(), t);
                match name {
                    "GC8" => (P::left_merge(g(x.clone()), y.clone()), g(P::left_merge(x, y))),
                    "GC9" => (P::comm_merge(g(x.clone()), y.clone()), g(P::comm_merge(x, y))),
                    _ => (P::comm_merge(x.clone(), g(y.clone())), g(P::comm_merge(x, y))),
                }
            }
            "GC11" | "GC12" => {
                let (phi, h) = (self.phi(rng), self.cfg.action_set(rng));
                let op = |t: ProcTerm| if name == "GC11" { P::encap(h.clone(), t) } else { P::abstr(h.clone(), t) };
                (op(P::guard(phi.clone(), x.clone())), P::guard(phi, op(x)))
            }
            "V0" => (P::eval(self.cfg.eval_map(rng), P::Eps), P::Eps),
            "V1" | "V2" | "V3" | "V4" | "V5" | "V6" => {
                let s = self.cfg.eval_map(rng);
                let car = self.cfg.carrier;
                let ev = |t: ProcTerm| P::eval(s.clone(), t);
                match name {
                    "V1" => (ev(P::seq(P::tau(), x.clone())), P::seq(P::tau(), ev(x))),
                    "V2" => {
                        let a = P::basic(&self.basic(rng)?);
                        (ev(P::seq(a.clone(), x.clone())), P::seq(a, ev(x)))
                    }
                    "V3" => {
                        let (n, k) = self
                            .cfg
                            .param
                            .choose(rng)
                            .cloned()
                            .ok_or_else(|| Error::Unsupported("no parameterized actions declared".into()))?;
                        let a = self.param(rng, &n, k);
                        (ev(P::seq(act(a.clone()), x.clone())), P::seq(act(a.substitute(&s, &car)?), ev(x)))
                    }
                    "V4" => {
                        let a = self.assignment(rng)?;
                        let Action::Assign(v, e) = &a else { unreachable!() };
                        let d = eval_data(e, &s, &car)?;
                        let mut s2 = s.clone();
                        s2.insert(v, d);
                        (
                            ev(P::seq(act(a.clone()), x.clone())),
                            P::seq(act(Action::Assign(v.clone(), DataTerm::Lit(d))), P::eval(s2, x)),
                        )
                    }
                    "V5" => (ev(P::alt(x.clone(), y.clone())), P::alt(ev(x), ev(y))),
                    _ => {
                        let phi = self.phi(rng);
                        (ev(P::guard(phi.clone(), x.clone())), P::guard(phi.substitute(&s, &car)?, ev(x)))
                    }
                }
            }
            "CM7Da" => {
                let (a, b, c, n) = self.communicating_params(rng)?;
                let (pa, pb) = (self.param(rng, &a, n), self.param(rng, &b, n));
                let (Action::Param(_, es), Action::Param(_, fs)) = (&pa, &pb) else { unreachable!() };
                let eqs = conj(es.iter().zip(fs).map(|(e, f)| Condition::eq(e.clone(), f.clone())).collect());
                (
                    P::comm_merge(P::seq(act(pa.clone()), x.clone()), P::seq(act(pb), y.clone())),
                    P::guard(eqs, P::seq(act(Action::Param(c, es.clone())), Self::parallel(x, y))),
                )
            }
            "CM7Db" => {
                let mut found = None;
                for _ in 0..64 {
                    let ((a, n), (b, m)) = match (self.cfg.param.choose(rng), self.cfg.param.choose(rng)) {
                        (Some(p), Some(q)) => (p.clone(), q.clone()),
                        _ => break,
                    };
                    if self.comm.apply(&a, &b).is_none() || n != m {
                        found = Some((self.param(rng, &a, n), self.param(rng, &b, m)));
                        break;
                    }
                }
                let (pa, pb) = found.ok_or_else(|| Error::Unsupported("every parameterized pair communicates".into()))?;
                (P::comm_merge(P::seq(act(pa), x), P::seq(act(pb), y)), P::Delta)
            }
            "CM7Dc" | "CM7Dd" => {
                let (n, k) = self
                    .cfg
                    .param
                    .choose(rng)
                    .cloned()
                    .ok_or_else(|| Error::Unsupported("no parameterized actions declared".into()))?;
                let l = P::seq(act(self.param(rng, &n, k)), x);
                let r = P::seq(act(self.plain(rng)?), y);
                let lhs = if name == "CM7Dc" { P::comm_merge(l, r) } else { P::comm_merge(r, l) };
                (lhs, P::Delta)
            }
            "CM7De" | "CM7Df" => {
                let l = P::seq(act(self.assignment(rng)?), x);
                let r = P::seq(act(self.cfg.action(rng)), y);
                let lhs = if name == "CM7De" { P::comm_merge(l, r) } else { P::comm_merge(r, l) };
                (lhs, P::Delta)
            }
            "BED" => {
                let (a, phi) = (self.alpha(rng), self.phi(rng));
                (
                    P::seq(
                        a.clone(),
                        P::alt(
                            P::guard(phi.clone(), P::seq(P::tau(), P::alt(x.clone(), y.clone()))),
                            P::guard(phi.clone(), x.clone()),
                        ),
                    ),
                    P::seq(a, P::guard(phi, P::alt(x, y))),
                )
            }
            "RDP" => {
                let spec = self.cfg.linear_spec(rng, 3, 3);
                let names: Vec<String> = spec.vars().map(str::to_string).collect();
                let v = names.choose(rng).expect("non-empty specification");
                let body = spec.rhs(v).expect("declared").close_with(&spec);
                (P::rec(v, &spec), body)
            }
            _ => unreachable!("every listed axiom is handled"),
        };
        Ok(AxiomInstance { axiom: name, lhs, rhs })
    }
}
