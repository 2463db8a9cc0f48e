//! Transitions and termination indexed by evaluation maps.

use std::collections::{HashMap, VecDeque};

use crate::cond::eval_cond;
use crate::context::Context;
use crate::data::{enumerate_maps, eval_data, Carrier, EvalMap, VarDecl};
use crate::error::{Error, Result};
use crate::term::{Action, ProcTerm};

use super::canon::{canon, normalize_map};

/// Nesting limit for unfolding recursion constants within one step.
const UNFOLD_LIMIT: usize = 256;

/// All `(alpha, t')` with `t --(sigma, alpha)--> t'`; targets are canonical.
pub fn step(t: &ProcTerm, sigma: &EvalMap, ctx: &Context) -> Result<Vec<(Action, ProcTerm)>> {
    let mut out: Vec<(Action, ProcTerm)> = step_raw(t, sigma, ctx, 0)?
        .into_iter()
        .map(|(a, t)| (a, canon(&t, &ctx.carrier)))
        .collect();
    out.sort();
    out.dedup();
    Ok(out)
}

/// Whether `t` terminates successfully under `sigma`.
pub fn terminates(t: &ProcTerm, sigma: &EvalMap, ctx: &Context) -> Result<bool> {
    term_raw(t, sigma, ctx, 0)
}

fn unfold(x: &str, spec: &crate::term::SpecRef, depth: usize) -> Result<ProcTerm> {
    if depth > UNFOLD_LIMIT {
        return Err(Error::Guardedness(format!("unbounded unfolding of {x}")));
    }
    let rhs = spec
        .rhs(x)
        .ok_or_else(|| Error::UnknownVariable(x.to_string()))?;
    Ok(rhs.close_with(spec))
}

fn holds(phi: &crate::cond::Condition, sigma: &EvalMap, ctx: &Context) -> Result<bool> {
    eval_cond(phi, sigma, &ctx.carrier)
}

fn term_raw(t: &ProcTerm, sigma: &EvalMap, ctx: &Context, depth: usize) -> Result<bool> {
    use ProcTerm::*;
    Ok(match t {
        Eps => true,
        Act(_) | Delta | LeftMerge(..) | CommMerge(..) => false,
        Alt(l, r) => term_raw(l, sigma, ctx, depth)? || term_raw(r, sigma, ctx, depth)?,
        Seq(l, r) | Par(l, r) => term_raw(l, sigma, ctx, depth)? && term_raw(r, sigma, ctx, depth)?,
        Encap(_, x) | Abstr(_, x) => term_raw(x, sigma, ctx, depth)?,
        Guard(phi, x) => holds(phi, sigma, ctx)? && term_raw(x, sigma, ctx, depth)?,
        Eval(rho, x) => term_raw(x, rho, ctx, depth)?,
        RecVar(x) => return Err(Error::NotClosed(format!("free recursion variable {x}"))),
        Rec(x, spec) => term_raw(&unfold(x, spec, depth)?, sigma, ctx, depth + 1)?,
    })
}

/// Communication of two labels under `sigma`, if any.
pub fn communicate(a: &Action, b: &Action, sigma: &EvalMap, ctx: &Context) -> Result<Option<Action>> {
    Ok(match (a, b) {
        (Action::Basic(a), Action::Basic(b)) => ctx.comm.apply(a, b).map(Action::basic),
        (Action::Param(a, es), Action::Param(b, fs)) if es.len() == fs.len() => match ctx.comm.apply(a, b) {
            None => None,
            Some(c) => {
                for (e, f) in es.iter().zip(fs) {
                    if eval_data(e, sigma, &ctx.carrier)? != eval_data(f, sigma, &ctx.carrier)? {
                        return Ok(None);
                    }
                }
                Some(Action::Param(c.to_string(), es.clone()))
            }
        },
        _ => None,
    })
}

fn sync(
    l: &[(Action, ProcTerm)],
    r: &[(Action, ProcTerm)],
    sigma: &EvalMap,
    ctx: &Context,
    out: &mut Vec<(Action, ProcTerm)>,
) -> Result<()> {
    if ctx.comm.is_empty() {
        return Ok(());
    }
    for (a, x) in l {
        for (b, y) in r {
            if let Some(c) = communicate(a, b, sigma, ctx)? {
                out.push((c, ProcTerm::par(x.clone(), y.clone())));
            }
        }
    }
    Ok(())
}

fn step_raw(t: &ProcTerm, sigma: &EvalMap, ctx: &Context, depth: usize) -> Result<Vec<(Action, ProcTerm)>> {
    use ProcTerm::*;
    let mut out = Vec::new();
    match t {
        Act(a) => out.push((a.fold_closed(&ctx.carrier), Eps)),
        Delta | Eps => {}
        RecVar(x) => return Err(Error::NotClosed(format!("free recursion variable {x}"))),
        Alt(l, r) => {
            out = step_raw(l, sigma, ctx, depth)?;
            out.extend(step_raw(r, sigma, ctx, depth)?);
        }
        Seq(l, r) => {
            for (a, x) in step_raw(l, sigma, ctx, depth)? {
                out.push((a, ProcTerm::seq(x, (**r).clone())));
            }
            if term_raw(l, sigma, ctx, depth)? {
                out.extend(step_raw(r, sigma, ctx, depth)?);
            }
        }
        Par(l, r) => {
            let ls = step_raw(l, sigma, ctx, depth)?;
            let rs = step_raw(r, sigma, ctx, depth)?;
            for (a, x) in &ls {
                out.push((a.clone(), ProcTerm::par(x.clone(), (**r).clone())));
            }
            for (b, y) in &rs {
                out.push((b.clone(), ProcTerm::par((**l).clone(), y.clone())));
            }
            sync(&ls, &rs, sigma, ctx, &mut out)?;
        }
        LeftMerge(l, r) => {
            for (a, x) in step_raw(l, sigma, ctx, depth)? {
                out.push((a, ProcTerm::par(x, (**r).clone())));
            }
        }
        CommMerge(l, r) => {
            let ls = step_raw(l, sigma, ctx, depth)?;
            if !ls.is_empty() {
                let rs = step_raw(r, sigma, ctx, depth)?;
                sync(&ls, &rs, sigma, ctx, &mut out)?;
            }
        }
        Encap(h, x) => {
            for (a, y) in step_raw(x, sigma, ctx, depth)? {
                if !h.contains(&a) {
                    out.push((a, ProcTerm::encap(h.clone(), y)));
                }
            }
        }
        Abstr(i, x) => {
            for (a, y) in step_raw(x, sigma, ctx, depth)? {
                let a = if i.contains(&a) { Action::Tau } else { a };
                out.push((a, ProcTerm::abstr(i.clone(), y)));
            }
        }
        Guard(phi, x) => {
            if holds(phi, sigma, ctx)? {
                out = step_raw(x, sigma, ctx, depth)?;
            }
        }
        Eval(rho, x) => {
            for (a, y) in step_raw(x, rho, ctx, depth)? {
                match a {
                    Action::Assign(v, e) => {
                        let d = eval_data(&e, rho, &ctx.carrier)?;
                        let mut next = rho.clone();
                        if !next.contains(&v) {
                            return Err(Error::Declaration(format!("flexible variable `{v}` is not declared")));
                        }
                        next.insert(&v, d);
                        let next = normalize_map(&next, &y, &ctx.carrier);
                        out.push((Action::Assign(v, crate::data::DataTerm::Lit(d)), ProcTerm::eval(next, y)));
                    }
                    other => {
                        let label = other.substitute(rho, &ctx.carrier)?;
                        out.push((label, ProcTerm::eval(rho.clone(), y)));
                    }
                }
            }
        }
        Rec(x, spec) => out = step_raw(&unfold(x, spec, depth)?, sigma, ctx, depth + 1)?,
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Transition {
    pub from: usize,
    /// Index into [`SigmaLts::maps`].
    pub map: usize,
    pub action: Action,
    pub to: usize,
}

/// A finite transition system with transitions indexed by evaluation maps.
#[derive(Debug, Clone)]
pub struct SigmaLts {
    pub states: Vec<ProcTerm>,
    pub root: usize,
    /// Variables the maps range over: those the root reads.
    pub decl: VarDecl,
    pub carrier: Carrier,
    pub maps: Vec<EvalMap>,
    pub transitions: Vec<Transition>,
    /// `(state, map)` pairs with successful termination.
    pub terminating: Vec<(usize, usize)>,
    /// Outgoing transition indices per state, ordered by map.
    pub out: Vec<Vec<usize>>,
    /// `term[state][map]`
    pub term: Vec<Vec<bool>>,
}

impl SigmaLts {
    pub fn num_states(&self) -> usize {
        self.states.len()
    }

    pub fn successors(&self, s: usize, map: usize) -> impl Iterator<Item = &Transition> {
        self.out[s].iter().map(|&i| &self.transitions[i]).filter(move |t| t.map == map)
    }

    /// States reachable from `s` by zero or more `tau`-steps under the given map.
    pub fn silent_closure(&self, s: usize, map: usize) -> Vec<usize> {
        let mut seen = vec![false; self.states.len()];
        let mut stack = vec![s];
        let mut out = Vec::new();
        seen[s] = true;
        while let Some(x) = stack.pop() {
            out.push(x);
            for t in self.successors(x, map) {
                if t.action.is_tau() && !seen[t.to] {
                    seen[t.to] = true;
                    stack.push(t.to);
                }
            }
        }
        out.sort_unstable();
        out
    }

    pub fn map_index(&self, sigma: &EvalMap) -> Option<usize> {
        let r = sigma.restrict(self.decl.names());
        self.maps.iter().position(|m| *m == r)
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "states": self.states.iter().map(ToString::to_string).collect::<Vec<_>>(),
            "root": self.root,
            "transitions": self.transitions.iter().map(|t| serde_json::json!({
                "from": t.from,
                "map": self.maps[t.map],
                "action": t.action.to_string(),
                "to": t.to,
            })).collect::<Vec<_>>(),
            "terminating": self.terminating.iter().map(|&(s, m)| serde_json::json!({
                "state": s,
                "map": self.maps[m],
            })).collect::<Vec<_>>(),
        })
    }
}

/// Breadth-first exploration over every map of the variables the root reads.
pub fn build_lts(t: &ProcTerm, ctx: &Context) -> Result<SigmaLts> {
    let decl = ctx.vars.restrict(&t.free_reads());
    build_lts_over(t, &decl, ctx)
}

/// Exploration over every map of `decl`, which must cover the variables `t` reads.
pub fn build_lts_over(t: &ProcTerm, decl: &VarDecl, ctx: &Context) -> Result<SigmaLts> {
    if !t.is_closed() {
        return Err(Error::NotClosed(t.to_string()));
    }
    if let Some(v) = t.free_reads().iter().find(|v| !decl.contains(v)) {
        return Err(Error::Declaration(format!("flexible variable `{v}` is not declared")));
    }
    let maps = enumerate_maps(decl, &ctx.carrier, ctx.limits.enumeration)?;
    let root = canon(t, &ctx.carrier);
    let mut index: HashMap<ProcTerm, usize> = HashMap::new();
    let mut states = vec![root.clone()];
    index.insert(root, 0);
    let mut queue = VecDeque::from([0usize]);
    let mut transitions = Vec::new();
    let mut terminating = Vec::new();
    let mut out = Vec::new();
    let mut term = Vec::new();
    while let Some(s) = queue.pop_front() {
        let mut outs = Vec::new();
        let mut terms = Vec::with_capacity(maps.len());
        for (m, sigma) in maps.iter().enumerate() {
            let src = states[s].clone();
            let fin = terminates(&src, sigma, ctx)?;
            terms.push(fin);
            if fin {
                terminating.push((s, m));
            }
            for (action, target) in step(&src, sigma, ctx)? {
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
                transitions.push(Transition { from: s, map: m, action, to });
            }
        }
        // states are dequeued in discovery order
        debug_assert_eq!(out.len(), s);
        out.push(outs);
        term.push(terms);
    }
    Ok(SigmaLts {
        states,
        root: 0,
        decl: decl.clone(),
        carrier: ctx.carrier,
        maps,
        transitions,
        terminating,
        out,
        term,
    })
}
