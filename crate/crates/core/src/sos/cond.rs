//! Condition-labelled transitions and termination.

use std::cell::RefCell;
use std::collections::{HashMap, VecDeque};

use crate::cond::{eval_cond, satisfiable_own, valid_iff, Condition};
use crate::context::Context;
use crate::data::{enumerate_maps, eval_data, DataTerm, EvalMap, VarDecl};
use crate::error::{Error, Result};
use crate::term::{Action, ProcTerm};

use super::canon::{canon, normalize_map};
use super::sigma::{SigmaLts, Transition};

const UNFOLD_LIMIT: usize = 256;

type Steps = Vec<(Condition, Action, ProcTerm)>;

/// Condition-labelled semantics with a satisfiability cache.
pub struct CondSos<'a> {
    ctx: &'a Context,
    sat: RefCell<HashMap<Condition, bool>>,
}

impl<'a> CondSos<'a> {
    pub fn new(ctx: &'a Context) -> Self {
        CondSos {
            ctx,
            sat: RefCell::new(HashMap::new()),
        }
    }

    fn satisfiable(&self, phi: &Condition) -> Result<bool> {
        if let Some(&b) = self.sat.borrow().get(phi) {
            return Ok(b);
        }
        let b = satisfiable_own(phi, &self.ctx.carrier, self.ctx.limits.enumeration)?;
        self.sat.borrow_mut().insert(phi.clone(), b);
        Ok(b)
    }

    /// Normalized `phi /\ psi`, or `None` when unsatisfiable.
    fn conjoin(&self, phi: &Condition, psi: &Condition) -> Result<Option<Condition>> {
        let c = Condition::and(phi.clone(), psi.clone()).normalize(&self.ctx.carrier);
        Ok(if self.satisfiable(&c)? { Some(c) } else { None })
    }

    fn label(&self, phi: Condition) -> Result<Option<Condition>> {
        let c = phi.normalize(&self.ctx.carrier);
        Ok(if self.satisfiable(&c)? { Some(c) } else { None })
    }

    /// All `(phi, alpha, t')` with `t --(phi, alpha)--> t'`, canonical targets,
    /// normalized labels, semantically equal labels merged.
    pub fn step(&self, t: &ProcTerm) -> Result<Steps> {
        let raw: Steps = self
            .step_raw(t, 0)?
            .into_iter()
            .map(|(c, a, x)| (c, a, canon(&x, &self.ctx.carrier)))
            .collect();
        let mut out: Steps = Vec::new();
        for (c, a, x) in raw {
            let mut dup = false;
            for (d, b, y) in &out {
                if *b == a && *y == x && self.equivalent(&c, d)? {
                    dup = true;
                    break;
                }
            }
            if !dup {
                out.push((c, a, x));
            }
        }
        out.sort();
        Ok(out)
    }

    /// All `phi` with `t` terminating under `phi`, deduplicated semantically.
    pub fn terminates(&self, t: &ProcTerm) -> Result<Vec<Condition>> {
        let mut out: Vec<Condition> = Vec::new();
        for c in self.term_raw(t, 0)? {
            let mut dup = false;
            for d in &out {
                if self.equivalent(&c, d)? {
                    dup = true;
                    break;
                }
            }
            if !dup {
                out.push(c);
            }
        }
        out.sort();
        Ok(out)
    }

    fn equivalent(&self, phi: &Condition, psi: &Condition) -> Result<bool> {
        if phi == psi {
            return Ok(true);
        }
        let mut vars = phi.flex_vars();
        vars.extend(psi.flex_vars());
        let decl = VarDecl::new(vars).expect("set has no duplicates");
        valid_iff(phi, psi, &decl, &self.ctx.carrier, self.ctx.limits.enumeration)
    }

    fn unfold(&self, x: &str, spec: &crate::term::SpecRef, depth: usize) -> Result<ProcTerm> {
        if depth > UNFOLD_LIMIT {
            return Err(Error::Guardedness(format!("unbounded unfolding of {x}")));
        }
        let rhs = spec.rhs(x).ok_or_else(|| Error::UnknownVariable(x.to_string()))?;
        Ok(rhs.close_with(spec))
    }

    fn term_raw(&self, t: &ProcTerm, depth: usize) -> Result<Vec<Condition>> {
        use ProcTerm::*;
        Ok(match t {
            Eps => vec![Condition::True],
            Act(_) | Delta | LeftMerge(..) | CommMerge(..) => vec![],
            Alt(l, r) => {
                let mut v = self.term_raw(l, depth)?;
                v.extend(self.term_raw(r, depth)?);
                v
            }
            Seq(l, r) | Par(l, r) => {
                let ls = self.term_raw(l, depth)?;
                let mut v = Vec::new();
                if !ls.is_empty() {
                    for psi in self.term_raw(r, depth)? {
                        for phi in &ls {
                            if let Some(c) = self.conjoin(phi, &psi)? {
                                v.push(c);
                            }
                        }
                    }
                }
                v
            }
            Encap(_, x) | Abstr(_, x) => self.term_raw(x, depth)?,
            Guard(psi, x) => {
                let mut v = Vec::new();
                for phi in self.term_raw(x, depth)? {
                    if let Some(c) = self.conjoin(&phi, psi)? {
                        v.push(c);
                    }
                }
                v
            }
            Eval(sigma, x) => {
                let mut v = Vec::new();
                for phi in self.term_raw(x, depth)? {
                    if let Some(c) = self.label(phi.substitute(sigma, &self.ctx.carrier)?)? {
                        v.push(c);
                    }
                }
                v
            }
            RecVar(x) => return Err(Error::NotClosed(format!("free recursion variable {x}"))),
            Rec(x, spec) => self.term_raw(&self.unfold(x, spec, depth)?, depth + 1)?,
        })
    }

    fn sync(&self, ls: &Steps, rs: &Steps, out: &mut Steps) -> Result<()> {
        if self.ctx.comm.is_empty() {
            return Ok(());
        }
        for (phi, a, x) in ls {
            for (psi, b, y) in rs {
                let (c, eqs) = match (a, b) {
                    (Action::Basic(a), Action::Basic(b)) => match self.ctx.comm.apply(a, b) {
                        Some(c) => (Action::basic(c), vec![]),
                        None => continue,
                    },
                    (Action::Param(a, es), Action::Param(b, fs)) if es.len() == fs.len() => {
                        match self.ctx.comm.apply(a, b) {
                            Some(c) => (
                                Action::Param(c.to_string(), es.clone()),
                                es.iter().zip(fs).map(|(e, f)| Condition::eq(e.clone(), f.clone())).collect(),
                            ),
                            None => continue,
                        }
                    }
                    _ => continue,
                };
                let mut parts = vec![phi.clone(), psi.clone()];
                parts.extend(eqs);
                if let Some(l) = self.label(crate::cond::conj(parts))? {
                    out.push((l, c, ProcTerm::par(x.clone(), y.clone())));
                }
            }
        }
        Ok(())
    }

    fn step_raw(&self, t: &ProcTerm, depth: usize) -> Result<Steps> {
        use ProcTerm::*;
        let carrier = &self.ctx.carrier;
        let mut out = Vec::new();
        match t {
            Act(a) => out.push((Condition::True, a.fold_closed(carrier), Eps)),
            Delta | Eps => {}
            RecVar(x) => return Err(Error::NotClosed(format!("free recursion variable {x}"))),
            Alt(l, r) => {
                out = self.step_raw(l, depth)?;
                out.extend(self.step_raw(r, depth)?);
            }
            Seq(l, r) => {
                for (c, a, x) in self.step_raw(l, depth)? {
                    out.push((c, a, ProcTerm::seq(x, (**r).clone())));
                }
                let fins = self.term_raw(l, depth)?;
                if !fins.is_empty() {
                    for (psi, a, y) in self.step_raw(r, depth)? {
                        for phi in &fins {
                            if let Some(c) = self.conjoin(phi, &psi)? {
                                out.push((c, a.clone(), y.clone()));
                            }
                        }
                    }
                }
            }
            Par(l, r) => {
                let ls = self.step_raw(l, depth)?;
                let rs = self.step_raw(r, depth)?;
                for (c, a, x) in &ls {
                    out.push((c.clone(), a.clone(), ProcTerm::par(x.clone(), (**r).clone())));
                }
                for (c, b, y) in &rs {
                    out.push((c.clone(), b.clone(), ProcTerm::par((**l).clone(), y.clone())));
                }
                self.sync(&ls, &rs, &mut out)?;
            }
            LeftMerge(l, r) => {
                for (c, a, x) in self.step_raw(l, depth)? {
                    out.push((c, a, ProcTerm::par(x, (**r).clone())));
                }
            }
            CommMerge(l, r) => {
                let ls = self.step_raw(l, depth)?;
                if !ls.is_empty() {
                    let rs = self.step_raw(r, depth)?;
                    self.sync(&ls, &rs, &mut out)?;
                }
            }
            Encap(h, x) => {
                for (c, a, y) in self.step_raw(x, depth)? {
                    if !h.contains(&a) {
                        out.push((c, a, ProcTerm::encap(h.clone(), y)));
                    }
                }
            }
            Abstr(i, x) => {
                for (c, a, y) in self.step_raw(x, depth)? {
                    let a = if i.contains(&a) { Action::Tau } else { a };
                    out.push((c, a, ProcTerm::abstr(i.clone(), y)));
                }
            }
            Guard(psi, x) => {
                for (phi, a, y) in self.step_raw(x, depth)? {
                    if let Some(c) = self.conjoin(&phi, psi)? {
                        out.push((c, a, y));
                    }
                }
            }
            Eval(sigma, x) => {
                for (phi, a, y) in self.step_raw(x, depth)? {
                    let Some(c) = self.label(phi.substitute(sigma, carrier)?)? else { continue };
                    match a {
                        Action::Assign(v, e) => {
                            let d = eval_data(&e, sigma, carrier)?;
                            if !sigma.contains(&v) {
                                return Err(Error::Declaration(format!("flexible variable `{v}` is not declared")));
                            }
                            let mut next = sigma.clone();
                            next.insert(&v, d);
                            let next = normalize_map(&next, &y, carrier);
                            out.push((c, Action::Assign(v, DataTerm::Lit(d)), ProcTerm::eval(next, y)));
                        }
                        other => {
                            let label = other.substitute(sigma, carrier)?;
                            out.push((c, label, ProcTerm::eval(sigma.clone(), y)));
                        }
                    }
                }
            }
            Rec(x, spec) => out = self.step_raw(&self.unfold(x, spec, depth)?, depth + 1)?,
        }
        Ok(out)
    }
}

pub fn step_cond(t: &ProcTerm, ctx: &Context) -> Result<Steps> {
    CondSos::new(ctx).step(t)
}

pub fn terminates_cond(t: &ProcTerm, ctx: &Context) -> Result<Vec<Condition>> {
    CondSos::new(ctx).terminates(t)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CondTransition {
    pub from: usize,
    pub cond: Condition,
    pub action: Action,
    pub to: usize,
}

/// A finite transition system with satisfiable condition labels.
#[derive(Debug, Clone)]
pub struct CondLts {
    pub states: Vec<ProcTerm>,
    pub root: usize,
    pub transitions: Vec<CondTransition>,
    pub terminating: Vec<(usize, Condition)>,
    pub out: Vec<Vec<usize>>,
    /// Variables the root reads.
    pub decl: VarDecl,
}

impl CondLts {
    pub fn num_states(&self) -> usize {
        self.states.len()
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "states": self.states.iter().map(ToString::to_string).collect::<Vec<_>>(),
            "root": self.root,
            "transitions": self.transitions.iter().map(|t| serde_json::json!({
                "from": t.from,
                "cond": t.cond.to_string(),
                "action": t.action.to_string(),
                "to": t.to,
            })).collect::<Vec<_>>(),
            "terminating": self.terminating.iter().map(|(s, c)| serde_json::json!({
                "state": s,
                "cond": c.to_string(),
            })).collect::<Vec<_>>(),
        })
    }
}

pub fn build_cond_lts(t: &ProcTerm, ctx: &Context) -> Result<CondLts> {
    if !t.is_closed() {
        return Err(Error::NotClosed(t.to_string()));
    }
    let sos = CondSos::new(ctx);
    let root = canon(t, &ctx.carrier);
    let decl = ctx.vars.restrict(&root.free_reads());
    let mut index: HashMap<ProcTerm, usize> = HashMap::from([(root.clone(), 0)]);
    let mut states = vec![root];
    let mut queue = VecDeque::from([0usize]);
    let (mut transitions, mut terminating, mut out) = (Vec::new(), Vec::new(), Vec::new());
    while let Some(s) = queue.pop_front() {
        let src = states[s].clone();
        for c in sos.terminates(&src)? {
            terminating.push((s, c));
        }
        let mut outs = Vec::new();
        for (cond, action, target) in sos.step(&src)? {
            let to = match index.get(&target) {
                Some(&i) => i,
                None => {
                    let i = states.len();
                    if i >= ctx.limits.states {
                        return Err(Error::ExplorationLimit {
                            states: i,
                            transitions: transitions.len(),
                            bound: ctx.limits.states,
                        });
                    }
                    index.insert(target.clone(), i);
                    states.push(target);
                    queue.push_back(i);
                    i
                }
            };
            outs.push(transitions.len());
            transitions.push(CondTransition { from: s, cond, action, to });
        }
        out.push(outs);
    }
    Ok(CondLts {
        states,
        root: 0,
        transitions,
        terminating,
        out,
        decl,
    })
}

/// Instantiates every label at each satisfying map over `decl`.
///
/// States that become unreachable are kept, so state ids coincide with `c`.
pub fn expand_to_sigma(c: &CondLts, decl: &VarDecl, ctx: &Context) -> Result<SigmaLts> {
    let maps = enumerate_maps(decl, &ctx.carrier, ctx.limits.enumeration)?;
    let n = c.states.len();
    let mut transitions = Vec::new();
    let mut out = vec![Vec::new(); n];
    for (m, sigma) in maps.iter().enumerate() {
        for t in &c.transitions {
            if holds(&t.cond, sigma, ctx)? {
                out[t.from].push(transitions.len());
                transitions.push(Transition {
                    from: t.from,
                    map: m,
                    action: t.action.clone(),
                    to: t.to,
                });
            }
        }
    }
    let mut term = vec![vec![false; maps.len()]; n];
    for (s, phi) in &c.terminating {
        for (m, sigma) in maps.iter().enumerate() {
            if holds(phi, sigma, ctx)? {
                term[*s][m] = true;
            }
        }
    }
    let terminating = (0..n)
        .flat_map(|s| (0..maps.len()).map(move |m| (s, m)))
        .filter(|&(s, m)| term[s][m])
        .collect();
    for o in &mut out {
        o.sort_by_key(|&i| (transitions[i].map, i));
    }
    Ok(SigmaLts {
        states: c.states.clone(),
        root: c.root,
        decl: decl.clone(),
        carrier: ctx.carrier,
        maps,
        transitions,
        terminating,
        out,
        term,
    })
}

fn holds(phi: &Condition, sigma: &EvalMap, ctx: &Context) -> Result<bool> {
    let needed = phi.flex_vars();
    if needed.iter().any(|v| !sigma.contains(v)) {
        return Err(Error::Declaration(format!("condition `{phi}` reads undeclared variables")));
    }
    eval_cond(phi, sigma, &ctx.carrier)
}
