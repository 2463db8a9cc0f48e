//! Derived security sets and the data non-interference check.

use std::collections::{BTreeSet, VecDeque};

use serde::Serialize;

use crate::bisim::{rooted_branching_bisim, BisimResult};
use crate::context::Context;
use crate::data::{enumerate_maps, EvalMap, VarDecl};
use crate::error::{Error, Result};
use crate::parser::SpecFile;
use crate::sos::sigma::{build_lts, SigmaLts};
use crate::term::{Action, ActionPattern, ActionSet, ProcTerm};

/// A closed process with its observable variables and external actions.
#[derive(Debug, Clone)]
pub struct SecuritySpec {
    pub process: ProcTerm,
    pub low: BTreeSet<String>,
    pub ext: ActionSet,
}

impl SecuritySpec {
    pub fn new(process: ProcTerm, low: BTreeSet<String>, ext: ActionSet, ctx: &Context) -> Result<Self> {
        if !process.is_closed() {
            return Err(Error::NotClosed(process.to_string()));
        }
        if let Some(p) = ext.0.iter().find(|p| matches!(p, ActionPattern::All | ActionPattern::Assign(_))) {
            return Err(Error::Declaration(format!("external action pattern `{p}` covers assignments")));
        }
        if let Some(v) = low.iter().find(|v| !ctx.vars.contains(v)) {
            return Err(Error::Declaration(format!("low variable `{v}` is not declared")));
        }
        Ok(SecuritySpec { process, low, ext })
    }

    /// The named process or term with the file's security declarations.
    pub fn from_file(file: &SpecFile, process: &str) -> Result<Self> {
        let decl = file.security.clone().unwrap_or_default();
        SecuritySpec::new(file.resolve_term(process)?, decl.low, decl.ext, &file.ctx)
    }
}

/// High variables, internal actions and encapsulated actions of a process.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct DerivedSets {
    pub high: BTreeSet<String>,
    pub int: BTreeSet<Action>,
    pub enc: BTreeSet<Action>,
}

fn pattern(a: &Action) -> ActionPattern {
    match a {
        Action::Assign(v, _) => ActionPattern::Assign(v.clone()),
        a => {
            let (n, k) = a.signature().expect("atomic action");
            ActionPattern::NameArity(n.to_string(), k)
        }
    }
}

impl DerivedSets {
    /// Patterns covering every evaluated form of the internal actions.
    pub fn int_patterns(&self) -> ActionSet {
        ActionSet::new(self.int.iter().map(pattern))
    }

    pub fn enc_patterns(&self) -> ActionSet {
        ActionSet::new(self.enc.iter().map(pattern))
    }
}

fn communicates(a: &Action, b: &Action, ctx: &Context) -> bool {
    match (a.signature(), b.signature()) {
        (Some((m, j)), Some((n, k))) => j == k && ctx.comm.apply(m, n).is_some(),
        _ => false,
    }
}

pub fn derive_sets(s: &SecuritySpec, ctx: &Context) -> DerivedSets {
    let high = s.process.occurring_flex().into_iter().filter(|v| !s.low.contains(v)).collect();
    let int: BTreeSet<Action> = s.process.occurring_actions().into_iter().filter(|a| !s.ext.contains(a)).collect();
    let enc = int
        .iter()
        .filter(|a| int.iter().any(|b| communicates(a, b, ctx)))
        .cloned()
        .collect();
    DerivedSets { high, int, enc }
}

/// `tau_INT(V_sigma(encap_ENC(P)))`
pub fn observed(s: &SecuritySpec, sets: &DerivedSets, sigma: &EvalMap) -> ProcTerm {
    ProcTerm::abstr(
        sets.int_patterns(),
        ProcTerm::eval(sigma.clone(), ProcTerm::encap(sets.enc_patterns(), s.process.clone())),
    )
}

/// Two maps agreeing on the low variables whose observed processes differ.
#[derive(Debug, Clone, Serialize)]
pub struct Leak {
    pub sigma: EvalMap,
    pub sigma_prime: EvalMap,
    /// Actions from the left root to the state where the sides part.
    pub trace: Vec<String>,
    pub result: BisimResult,
}

#[derive(Debug, Clone, Serialize)]
#[serde(tag = "verdict", rename_all = "lowercase")]
pub enum Dnii {
    Holds { comparisons: usize },
    Fails(Box<Leak>),
}

impl Dnii {
    pub fn holds(&self) -> bool {
        matches!(self, Dnii::Holds { .. })
    }
}

fn trace_to(lts: &SigmaLts, target: usize) -> Vec<String> {
    let mut prev: Vec<Option<(usize, usize)>> = vec![None; lts.num_states()];
    let mut seen = vec![false; lts.num_states()];
    seen[lts.root] = true;
    let mut queue = VecDeque::from([lts.root]);
    while let Some(s) = queue.pop_front() {
        for &i in &lts.out[s] {
            let t = &lts.transitions[i];
            if !seen[t.to] {
                seen[t.to] = true;
                prev[t.to] = Some((s, i));
                queue.push_back(t.to);
            }
        }
    }
    let mut out = Vec::new();
    let mut cur = target;
    while let Some((s, i)) = prev[cur] {
        out.push(lts.transitions[i].action.to_string());
        cur = s;
    }
    out.reverse();
    out
}

/// Decides the property over every pair of maps of the occurring variables that agree on the low ones.
///
/// Within one low assignment every high assignment is compared with the first, which
/// covers all pairs since rooted branching bisimilarity is an equivalence.
pub fn check_dnii(s: &SecuritySpec, ctx: &Context) -> Result<Dnii> {
    let sets = derive_sets(s, ctx);
    let occurring = s.process.occurring_flex();
    let low: Vec<&String> = occurring.iter().filter(|v| s.low.contains(*v)).collect();
    let lows = enumerate_maps(&VarDecl::new(low)?, &ctx.carrier, ctx.limits.enumeration)?;
    let highs = enumerate_maps(&VarDecl::new(&sets.high)?, &ctx.carrier, ctx.limits.enumeration)?;
    let mut comparisons = 0;
    for l in &lows {
        let join = |h: &EvalMap| {
            let mut m = l.clone();
            h.iter().for_each(|(v, d)| m.insert(v, d));
            m
        };
        let sigma = join(&highs[0]);
        let first = build_lts(&observed(s, &sets, &sigma), ctx)?;
        for h in &highs[1..] {
            let sigma_prime = join(h);
            let other = build_lts(&observed(s, &sets, &sigma_prime), ctx)?;
            let result = rooted_branching_bisim(&first, &other)?;
            comparisons += 1;
            if !result.equivalent {
                let trace = match &result.counterexample {
                    Some(ce) => trace_to(&first, ce.left),
                    None => Vec::new(),
                };
                return Ok(Dnii::Fails(Box::new(Leak {
                    sigma,
                    sigma_prime,
                    trace,
                    result,
                })));
            }
        }
    }
    Ok(Dnii::Holds { comparisons })
}

#[cfg(test)]
mod tests;
