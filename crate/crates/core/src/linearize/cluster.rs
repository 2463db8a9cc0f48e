//! Clusters, exit sets and the cluster fair abstraction rule.

use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;

use crate::cond::Condition;
use crate::context::Context;
use crate::error::{Error, Result};
use crate::term::{linear_summands, reachable, ActionSet, ProcTerm, RecSpec, SpecRef, Summand};

use super::cert::{Dir, Rule, Step};

/// One cluster with its exits.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Cluster {
    pub vars: BTreeSet<String>,
    /// Exit summands, in equation order.
    #[serde(serialize_with = "as_strings")]
    pub exits: Vec<Summand>,
    pub conservative: bool,
    /// Whether some summand of a member moves inside the cluster.
    pub internal_moves: bool,
}

fn as_strings<S: serde::Serializer>(exits: &[Summand], s: S) -> std::result::Result<S::Ok, S::Error> {
    s.collect_seq(exits.iter().map(|e| e.to_term().to_string()))
}

/// The strongly connected clusters of a linear specification for an action set.
#[derive(Debug, Clone, Serialize)]
pub struct ClusterAnalysis {
    #[serde(skip)]
    pub spec: SpecRef,
    #[serde(serialize_with = "set_string")]
    pub actions: ActionSet,
    pub clusters: Vec<Cluster>,
}

fn set_string<S: serde::Serializer>(a: &ActionSet, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&a.to_string())
}

impl ClusterAnalysis {
    pub fn cluster_of(&self, x: &str) -> Option<&Cluster> {
        self.clusters.iter().find(|c| c.vars.contains(x))
    }
}

/// `phi :-> alpha . Y` with `phi` syntactically `true` and `alpha` in `I` or `tau`.
fn internal(s: &Summand, i: &ActionSet) -> Option<String> {
    match s {
        Summand::Prefix(Condition::True, a, y) if a.is_tau() || i.contains(a) => Some(y.clone()),
        _ => None,
    }
}

fn summands_of(spec: &RecSpec) -> Result<BTreeMap<String, Vec<Summand>>> {
    spec.equations()
        .iter()
        .map(|(x, rhs)| Ok((x.clone(), linear_summands(rhs)?)))
        .collect()
}

/// Whether `c` satisfies the cluster condition: summands of members that lead
/// into `c` are `true`-guarded moves with actions from `I` or `tau`.
pub fn is_cluster(spec: &RecSpec, i: &ActionSet, c: &BTreeSet<String>) -> Result<bool> {
    for x in c {
        let rhs = spec.rhs(x).ok_or_else(|| Error::UnknownVariable(x.clone()))?;
        for s in linear_summands(rhs)? {
            if s.target().is_some_and(|y| c.contains(y)) && internal(&s, i).is_none() {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// Summands of members that leave `c`, take a visible action, or terminate.
pub fn exits(spec: &RecSpec, i: &ActionSet, c: &BTreeSet<String>) -> Result<Vec<Summand>> {
    let mut out = Vec::new();
    for (x, rhs) in spec.equations() {
        if c.contains(x) {
            out.extend(exits_of_one(rhs, i, c)?);
        }
    }
    Ok(out)
}

fn exits_of_one(rhs: &ProcTerm, i: &ActionSet, c: &BTreeSet<String>) -> Result<Vec<Summand>> {
    Ok(linear_summands(rhs)?
        .into_iter()
        .filter(|s| match s {
            Summand::Exit(_) => true,
            Summand::Prefix(_, a, y) => !(a.is_tau() || i.contains(a)) || !c.contains(y),
        })
        .collect())
}

/// Every member reaches every member that owns an exit.
pub fn is_conservative(spec: &RecSpec, i: &ActionSet, c: &BTreeSet<String>) -> Result<bool> {
    let mut owners = Vec::new();
    for x in c {
        let rhs = spec.rhs(x).ok_or_else(|| Error::UnknownVariable(x.clone()))?;
        if !exits_of_one(rhs, i, c)?.is_empty() {
            owners.push(x);
        }
    }
    for x in c {
        let r = reachable(spec, x)?;
        if !owners.iter().all(|o| r.contains(*o)) {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Strongly connected components of the internal-move graph, in equation order.
pub(crate) fn components(spec: &RecSpec, i: &ActionSet) -> Result<Vec<(BTreeSet<String>, bool)>> {
    let sums = summands_of(spec)?;
    let edges: BTreeMap<&str, Vec<String>> = sums
        .iter()
        .map(|(x, ss)| (x.as_str(), ss.iter().filter_map(|s| internal(s, i)).collect()))
        .collect();
    let reach = |x: &str| {
        let mut seen = BTreeSet::new();
        let mut stack = vec![x.to_string()];
        while let Some(y) = stack.pop() {
            for z in &edges[y.as_str()] {
                if seen.insert(z.clone()) {
                    stack.push(z.clone());
                }
            }
        }
        seen
    };
    let closures: BTreeMap<&str, BTreeSet<String>> = spec.vars().map(|x| (x, reach(x))).collect();
    let mut done = BTreeSet::new();
    let mut out = Vec::new();
    for x in spec.vars() {
        if done.contains(x) {
            continue;
        }
        let mut comp: BTreeSet<String> = closures[x]
            .iter()
            .filter(|y| closures[y.as_str()].contains(x))
            .cloned()
            .collect();
        comp.insert(x.to_string());
        let cyclic = closures[x].contains(x);
        done.extend(comp.iter().cloned());
        out.push((comp, cyclic));
    }
    Ok(out)
}

/// Maximal strongly connected clusters with their exits and conservativity.
pub fn analyze_clusters(spec: &SpecRef, i: &ActionSet) -> Result<ClusterAnalysis> {
    let mut clusters = Vec::new();
    for (c, cyclic) in components(spec, i)? {
        if is_cluster(spec, i, &c)? {
            clusters.push(Cluster {
                exits: exits(spec, i, &c)?,
                conservative: is_conservative(spec, i, &c)?,
                internal_moves: cyclic,
                vars: c,
            });
        }
    }
    Ok(ClusterAnalysis {
        spec: spec.clone(),
        actions: i.clone(),
        clusters,
    })
}

fn exit_sum(spec: &SpecRef, exits: &[Summand]) -> ProcTerm {
    ProcTerm::sum(exits.iter().map(|s| s.to_term().close_with(spec)))
}

fn prefixed(i: &ActionSet, body: ProcTerm) -> ProcTerm {
    ProcTerm::seq(ProcTerm::tau(), ProcTerm::abstr(i.clone(), body))
}

/// The CFAR right-hand side for `c`, after checking the side condition.
fn cfar_rhs(spec: &SpecRef, x: &str, i: &ActionSet, c: &BTreeSet<String>) -> Result<ProcTerm> {
    if !spec.contains(x) {
        return Err(Error::UnknownVariable(x.to_string()));
    }
    if !c.contains(x) {
        return Err(Error::CfarInapplicable(format!("{x} is not in the cluster")));
    }
    if !is_cluster(spec, i, c)? {
        return Err(Error::CfarInapplicable(format!("{c:?} is not a cluster for {i}")));
    }
    if !is_conservative(spec, i, c)? {
        return Err(Error::CfarInapplicable(format!("cluster {c:?} is not conservative")));
    }
    Ok(prefixed(i, exit_sum(spec, &exits(spec, i, c)?)))
}

/// `tau . hide_I(<X|E>) = tau . hide_I(exits)` for the strongly connected cluster of `X`.
pub fn apply_cfar(spec: &SpecRef, x: &str, i: &ActionSet) -> Result<(ProcTerm, Step)> {
    if !spec.contains(x) {
        return Err(Error::UnknownVariable(x.to_string()));
    }
    let (c, _) = components(spec, i)?
        .into_iter()
        .find(|(c, _)| c.contains(x))
        .expect("components cover every variable");
    let rhs = cfar_rhs(spec, x, i, &c)?;
    let step = Step {
        rule: Rule::Cfar(c.into_iter().collect()),
        dir: Dir::Forward,
        pos: vec![],
        before: prefixed(i, ProcTerm::rec(x, spec)),
        after: rhs.clone(),
    };
    Ok((rhs, step))
}

/// Re-validates a recorded CFAR application.
pub(crate) fn check_cfar(l: &ProcTerm, r: &ProcTerm, cluster: &[String], _ctx: &Context) -> Result<()> {
    let bad = || Error::CfarInapplicable(format!("`{l}` is not of the form tau . hide_I(<X|E>)"));
    let ProcTerm::Seq(t, h) = l else { return Err(bad()) };
    let ProcTerm::Abstr(i, x) = &**h else { return Err(bad()) };
    let ProcTerm::Rec(x, spec) = &**x else { return Err(bad()) };
    if **t != ProcTerm::tau() {
        return Err(bad());
    }
    let c: BTreeSet<String> = cluster.iter().cloned().collect();
    let want = cfar_rhs(spec, x, i, &c)?;
    if want != *r {
        return Err(Error::CfarInapplicable(format!("expected `{want}`, found `{r}`")));
    }
    Ok(())
}
