//! Proof certificates: equational lemmas justified by rewrite chains, RSP or the bisimulation oracle.

use std::collections::{BTreeSet, HashMap};
use std::fmt::Write as _;

use serde::Serialize;
use serde_json::{json, Value};

use crate::bisim::rooted_branching_bisim;
use crate::context::Context;
use crate::error::{Error, Result};
use crate::sos::build_lts;
use crate::term::{is_guarded_linear_spec, ProcTerm, SpecRef};

use super::cluster::check_cfar;
use super::rules::{imp1, imp2, rewrite};

/// Orientation of a rewrite relative to the cited equation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Dir {
    /// Left-hand side replaced by right-hand side.
    Forward,
    Backward,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Rule {
    /// An axiom or schema of the equational theory, IMP1 and IMP2 included.
    Axiom(&'static str),
    /// CFAR with the cluster it was applied to.
    Cfar(Vec<String>),
    /// An earlier lemma of the same certificate.
    Lemma(usize),
}

impl Rule {
    pub fn name(&self) -> String {
        match self {
            Rule::Axiom(a) => a.to_string(),
            Rule::Cfar(_) => "CFAR".into(),
            Rule::Lemma(i) => format!("L{i}"),
        }
    }
}

/// One rewrite of the subterm at `pos`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Step {
    pub rule: Rule,
    pub dir: Dir,
    pub pos: Vec<usize>,
    pub before: ProcTerm,
    pub after: ProcTerm,
}

#[derive(Debug, Clone)]
pub enum Justification {
    /// A chain of rewrites from the left-hand side to the right-hand side.
    Chain(Vec<Step>),
    /// `theta(var) = <var|spec>` from one antecedent lemma per equation,
    /// each proving `theta(X) = rhs_X[theta]`.
    Rsp {
        spec: SpecRef,
        var: String,
        theta: Vec<(String, ProcTerm)>,
        antecedents: Vec<usize>,
    },
    /// Decided by rooted branching bisimulation on the two sides.
    Oracle,
}

#[derive(Debug, Clone)]
pub struct Lemma {
    pub lhs: ProcTerm,
    pub rhs: ProcTerm,
    pub by: Justification,
}

/// Counts gathered while replaying a certificate.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct ReplayReport {
    pub lemmas: usize,
    pub rewrites: usize,
    pub rsp: usize,
    pub cfar: usize,
    pub oracle: usize,
}

/// A list of lemmas; the last one is the proved equation.
#[derive(Debug, Clone, Default)]
pub struct ProofCertificate {
    pub lemmas: Vec<Lemma>,
}

/// Replaces recursion variables by the terms `theta` assigns them.
pub(crate) fn substitute(t: &ProcTerm, theta: &HashMap<&str, &ProcTerm>) -> ProcTerm {
    match t {
        ProcTerm::RecVar(x) => theta.get(x.as_str()).map_or_else(|| t.clone(), |s| (*s).clone()),
        _ => {
            let kids = t.children();
            if kids.is_empty() {
                t.clone()
            } else {
                t.with_children(kids.into_iter().map(|k| substitute(k, theta)).collect())
            }
        }
    }
}

pub(crate) fn check_step(step: &Step, lemmas: &[Lemma], ctx: &Context) -> Result<()> {
    let (l, r) = match step.dir {
        Dir::Forward => (&step.before, &step.after),
        Dir::Backward => (&step.after, &step.before),
    };
    let ok = match &step.rule {
        Rule::Axiom("IMP1") => imp1(l, r, ctx)?,
        Rule::Axiom("IMP2") => imp2(l, r, ctx)?,
        Rule::Axiom(a) => rewrite(a, l, ctx)? == *r,
        Rule::Lemma(i) => lemmas.get(*i).is_some_and(|m| m.lhs == *l && m.rhs == *r),
        Rule::Cfar(cluster) => {
            check_cfar(l, r, cluster, ctx)?;
            true
        }
    };
    if ok {
        Ok(())
    } else {
        Err(Error::Shape(format!("`{l}` = `{r}` is not an instance of {}", step.rule.name())))
    }
}

impl ProofCertificate {
    /// The proved equation.
    pub fn goal(&self) -> Option<(&ProcTerm, &ProcTerm)> {
        self.lemmas.last().map(|l| (&l.lhs, &l.rhs))
    }

    pub(crate) fn push(&mut self, lemma: Lemma) -> usize {
        self.lemmas.push(lemma);
        self.lemmas.len() - 1
    }

    /// Re-checks every lemma against the rule it cites.
    pub fn replay(&self, ctx: &Context) -> Result<ReplayReport> {
        let mut report = ReplayReport {
            lemmas: self.lemmas.len(),
            ..ReplayReport::default()
        };
        for (k, lemma) in self.lemmas.iter().enumerate() {
            let fail = |reason: String| Error::Replay { step: k, reason };
            let earlier = &self.lemmas[..k];
            match &lemma.by {
                Justification::Chain(steps) => {
                    let mut cur = lemma.lhs.clone();
                    for (i, s) in steps.iter().enumerate() {
                        if cur.subterm(&s.pos) != Some(&s.before) {
                            return Err(fail(format!("rewrite {i}: no `{}` at {:?}", s.before, s.pos)));
                        }
                        check_step(s, earlier, ctx).map_err(|e| fail(format!("rewrite {i}: {e}")))?;
                        if matches!(s.rule, Rule::Cfar(_)) {
                            report.cfar += 1;
                        }
                        cur = cur.replace_at(&s.pos, s.after.clone()).expect("position checked");
                    }
                    if cur != lemma.rhs {
                        return Err(fail(format!("chain ends in `{cur}`, not `{}`", lemma.rhs)));
                    }
                    report.rewrites += steps.len();
                }
                Justification::Rsp {
                    spec,
                    var,
                    theta,
                    antecedents,
                } => {
                    if !is_guarded_linear_spec(spec) {
                        return Err(fail("RSP needs a guarded linear specification".into()));
                    }
                    let map: HashMap<&str, &ProcTerm> = theta.iter().map(|(x, t)| (x.as_str(), t)).collect();
                    let vars: BTreeSet<&str> = spec.vars().collect();
                    if map.len() != theta.len() || map.keys().copied().collect::<BTreeSet<_>>() != vars {
                        return Err(fail("the substitution must cover exactly the specification's variables".into()));
                    }
                    if antecedents.len() != spec.len() {
                        return Err(fail("one antecedent per equation is required".into()));
                    }
                    for ((x, rhs), &a) in spec.equations().iter().zip(antecedents) {
                        let want = (map[x.as_str()].clone(), substitute(rhs, &map));
                        let Some(ante) = earlier.get(a) else {
                            return Err(fail(format!("antecedent L{a} is not an earlier lemma")));
                        };
                        let fits = (ante.lhs == want.0 && ante.rhs == want.1) || (ante.lhs == want.1 && ante.rhs == want.0);
                        if !fits {
                            return Err(fail(format!("L{a} does not prove the equation for {x}")));
                        }
                    }
                    if lemma.lhs != **map.get(var.as_str()).ok_or_else(|| fail(format!("`{var}` is unknown")))?
                        || lemma.rhs != ProcTerm::rec(var, spec)
                    {
                        return Err(fail("conclusion does not match the RSP instance".into()));
                    }
                    report.rsp += 1;
                }
                Justification::Oracle => {
                    let r = rooted_branching_bisim(&build_lts(&lemma.lhs, ctx)?, &build_lts(&lemma.rhs, ctx)?)?;
                    if !r.equivalent {
                        return Err(fail("the two sides are not rooted branching bisimilar".into()));
                    }
                    report.oracle += 1;
                }
            }
        }
        Ok(report)
    }

    /// Axioms, CFAR and RSP as cited anywhere in the certificate.
    pub fn cited(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        for l in &self.lemmas {
            match &l.by {
                Justification::Chain(steps) => {
                    out.extend(steps.iter().filter(|s| !matches!(s.rule, Rule::Lemma(_))).map(|s| s.rule.name()));
                }
                Justification::Rsp { .. } => {
                    out.insert("RSP".to_string());
                }
                Justification::Oracle => {}
            }
        }
        out
    }

    pub fn num_steps(&self) -> usize {
        self.lemmas
            .iter()
            .map(|l| match &l.by {
                Justification::Chain(s) => s.len(),
                _ => 1,
            })
            .sum()
    }

    pub fn to_json(&self) -> Value {
        let names = SpecNames::collect(self);
        let show = |t: &ProcTerm| names.show(t);
        json!({
            "specifications": names.table(),
            "goal": self.goal().map(|(l, r)| json!({"lhs": show(l), "rhs": show(r)})),
            "lemmas": self.lemmas.iter().enumerate().map(|(i, l)| {
                let by = match &l.by {
                    Justification::Chain(steps) => json!({
                        "kind": "chain",
                        "steps": steps.iter().map(|s| json!({
                            "rule": s.rule.name(),
                            "direction": s.dir,
                            "position": s.pos,
                            "cluster": match &s.rule { Rule::Cfar(c) => Some(c), _ => None },
                            "before": show(&s.before),
                            "after": show(&s.after),
                        })).collect::<Vec<_>>(),
                    }),
                    Justification::Rsp { spec, var, theta, antecedents } => json!({
                        "kind": "rsp",
                        "specification": names.name_of(spec),
                        "variable": var,
                        "substitution": theta.iter().map(|(x, t)| json!([x, show(t)])).collect::<Vec<_>>(),
                        "antecedents": antecedents,
                    }),
                    Justification::Oracle => json!({"kind": "oracle"}),
                };
                json!({"id": i, "lhs": show(&l.lhs), "rhs": show(&l.rhs), "by": by})
            }).collect::<Vec<_>>(),
        })
    }

    /// One line per rewrite, lemmas in order, specifications listed first.
    pub fn to_text(&self) -> String {
        let names = SpecNames::collect(self);
        let mut out = String::new();
        for (name, text) in names.table() {
            let _ = writeln!(out, "{name} = {text}");
        }
        for (i, l) in self.lemmas.iter().enumerate() {
            let _ = writeln!(out, "L{i}: {} = {}", names.show(&l.lhs), names.show(&l.rhs));
            match &l.by {
                Justification::Chain(steps) => {
                    for s in steps {
                        let arrow = if s.dir == Dir::Forward { "" } else { " (right to left)" };
                        let _ = writeln!(
                            out,
                            "  {}{arrow} at {:?}: {}  ~>  {}",
                            s.rule.name(),
                            s.pos,
                            names.show(&s.before),
                            names.show(&s.after)
                        );
                    }
                }
                Justification::Rsp {
                    spec, var, antecedents, ..
                } => {
                    let ante: Vec<String> = antecedents.iter().map(|a| format!("L{a}")).collect();
                    let _ = writeln!(out, "  RSP on {} for {var} from {}", names.name_of(spec), ante.join(", "));
                }
                Justification::Oracle => {
                    let _ = writeln!(out, "  rooted branching bisimulation check");
                }
            }
        }
        out
    }
}

/// Short names `E1, E2, ...` for the specifications a certificate mentions.
struct SpecNames {
    specs: Vec<SpecRef>,
    /// `(rendered rec constant, short form)`, longest first.
    subst: Vec<(String, String)>,
}

impl SpecNames {
    fn collect(cert: &ProofCertificate) -> Self {
        let mut specs: Vec<SpecRef> = Vec::new();
        let mut add = |t: &ProcTerm| {
            t.visit_all(&mut |s| {
                if let ProcTerm::Rec(_, e) = s {
                    if !specs.contains(e) {
                        specs.push(e.clone());
                    }
                }
            })
        };
        for l in &cert.lemmas {
            add(&l.lhs);
            add(&l.rhs);
            match &l.by {
                Justification::Chain(steps) => steps.iter().for_each(|s| {
                    add(&s.before);
                    add(&s.after)
                }),
                Justification::Rsp { spec, theta, .. } => {
                    add(&ProcTerm::rec(spec.vars().next().unwrap_or("X"), spec));
                    theta.iter().for_each(|(_, t)| add(t));
                }
                Justification::Oracle => {}
            }
        }
        let mut subst = Vec::new();
        for (k, e) in specs.iter().enumerate() {
            for x in e.vars() {
                subst.push((ProcTerm::rec(x, e).to_string(), format!("<{x}|E{}>", k + 1)));
            }
        }
        subst.sort_by_key(|(l, _)| std::cmp::Reverse(l.len()));
        SpecNames { specs, subst }
    }

    fn show(&self, t: &ProcTerm) -> String {
        let mut s = t.to_string();
        if s.contains("rec ") {
            for (long, short) in &self.subst {
                s = s.replace(long.as_str(), short);
            }
        }
        s
    }

    fn name_of(&self, spec: &SpecRef) -> String {
        match self.specs.iter().position(|e| e == spec) {
            Some(k) => format!("E{}", k + 1),
            None => "E?".into(),
        }
    }

    fn table(&self) -> Vec<(String, String)> {
        self.specs
            .iter()
            .enumerate()
            .map(|(k, e)| {
                let x = e.vars().next().unwrap_or("X");
                let full = ProcTerm::rec(x, e).to_string();
                let body = full.split_once(" where ").map_or(full.clone(), |(_, b)| b.to_string());
                (format!("E{}", k + 1), body)
            })
            .collect()
    }
}
