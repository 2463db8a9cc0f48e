//! Equality proofs through a merged specification over bisimulation classes.
//!
//! Both sides are normalized to `<X0|G1>` and `<X0|G2>`. The merged
//! specification `M` has one variable per related pair of states without
//! inert silent steps, plus the root pair; each pair carries the summands of
//! both members, with targets paired up through the joint branching
//! bisimulation classes. Two RSP instances identify both constants with the
//! root of `M`.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use crate::bisim::{rooted_branching_bisim, BisimResult};
use crate::context::Context;
use crate::error::{Error, Result};
use crate::sos::{build_lts, SigmaLts};
use crate::term::{classify, is_guarded_linear_spec, linear_summands, Action, ProcTerm, RecSpec, SpecRef, Summand};

use super::cert::{substitute, Dir, Justification, Lemma, ProofCertificate, Step};
use super::derive::Deriver;
use super::explore::normalize;

use ProcTerm as P;

/// Result of [`prove_equal`].
#[derive(Debug, Clone)]
pub enum ProofOutcome {
    Proved(ProofCertificate),
    /// The terms are not rooted branching bisimilar; the result carries the counterexample.
    Refuted(BisimResult),
}

struct Union(Vec<usize>);

impl Union {
    fn find(&mut self, x: usize) -> usize {
        let p = self.0[x];
        if p == x {
            return x;
        }
        let r = self.find(p);
        self.0[x] = r;
        r
    }

    fn join(&mut self, x: usize, y: usize) {
        let (a, b) = (self.find(x), self.find(y));
        self.0[a.max(b)] = a.min(b);
    }
}

/// The recursion variable of each state of the system of `<X|G>`.
fn state_vars(l: &SigmaLts, g: &SpecRef) -> Result<Vec<String>> {
    l.states
        .iter()
        .map(|s| match s {
            P::Rec(y, h) if h == g => Ok(y.clone()),
            other => Err(Error::Shape(format!("state `{other}` is not a variable of the normal form"))),
        })
        .collect()
}

/// One side of the merge: a normal form with its states grouped into classes.
struct Side {
    spec: SpecRef,
    vars: Vec<String>,
    /// Class of each state of the system.
    class: Vec<usize>,
    /// Chosen member without inert silent summands, per class.
    bottom: BTreeMap<usize, String>,
    /// Members without inert silent summands.
    bottoms: BTreeSet<String>,
}

impl Side {
    fn class_of(&self, y: &str) -> usize {
        self.class[self.vars.iter().position(|v| v == y).expect("reachable variable")]
    }

    fn summands(&self, y: &str) -> Result<Vec<Summand>> {
        linear_summands(self.spec.rhs(y).ok_or_else(|| Error::UnknownVariable(y.to_string()))?)
    }

    fn choose_bottoms(&mut self) -> Result<()> {
        for (i, y) in self.vars.iter().enumerate() {
            let k = self.class[i];
            let inert = self.summands(y)?.iter().any(|s| {
                matches!(s, Summand::Prefix(_, Action::Tau, w) if self.class_of(w) == k)
            });
            if !inert {
                self.bottom.entry(k).or_insert_with(|| y.clone());
                self.bottoms.insert(y.clone());
            }
        }
        Ok(())
    }

    fn class_bottom(&self, k: usize) -> Result<String> {
        self.bottom
            .get(&k)
            .cloned()
            .ok_or_else(|| Error::Unsupported("a bisimulation class has no member without inert silent steps".into()))
    }

    /// `w` itself when it has no inert silent summand, otherwise the chosen member of its class.
    fn bot(&self, w: &str) -> Result<String> {
        if self.bottoms.contains(w) {
            Ok(w.to_string())
        } else {
            self.class_bottom(self.class_of(w))
        }
    }
}

/// A summand of `mine` with the same condition and action whose target lies in class `k` of `other`.
fn partner<'a>(s: &Summand, mine: &Side, others: &'a [Summand], other: &Side) -> Option<&'a str> {
    let Summand::Prefix(phi, a, y) = s else { return None };
    let k = mine.class_of(y);
    others.iter().find_map(|o| match o {
        Summand::Prefix(psi, b, z) if psi == phi && b == a && other.class_of(z) == k => Some(z.as_str()),
        _ => None,
    })
}

/// The product of both normal forms over pairs of members without inert silent steps, rooted at `R`.
fn product(left: &Side, right: &Side, x1: &str, x2: &str) -> Result<Vec<(String, ProcTerm, String, String)>> {
    let mut names: HashMap<(String, String), String> = HashMap::new();
    let mut order = vec![(x1.to_string(), x2.to_string())];
    names.insert(order[0].clone(), "R".into());
    let mut out = Vec::new();
    let mut next = 0;
    while next < order.len() {
        let (y, z) = order[next].clone();
        next += 1;
        let (ys, zs) = (left.summands(&y)?, right.summands(&z)?);
        let mut targets = Vec::new();
        let mut summands = Vec::new();
        for s in &ys {
            match s {
                Summand::Exit(_) => summands.push((s.clone(), None)),
                Summand::Prefix(_, _, y2) => {
                    let z2 = match partner(s, left, &zs, right) {
                        Some(z2) => right.bot(z2)?,
                        None => right.class_bottom(left.class_of(y2))?,
                    };
                    summands.push((s.clone(), Some((left.bot(y2)?, z2))));
                }
            }
        }
        for s in &zs {
            match s {
                Summand::Exit(_) => summands.push((s.clone(), None)),
                Summand::Prefix(_, _, z2) => {
                    let y2 = match partner(s, right, &ys, left) {
                        Some(y2) => left.bot(y2)?,
                        None => left.class_bottom(right.class_of(z2))?,
                    };
                    summands.push((s.clone(), Some((y2, right.bot(z2)?))));
                }
            }
        }
        for (s, pair) in summands {
            let s = match (s, pair) {
                (Summand::Prefix(phi, a, _), Some(pair)) => {
                    let name = match names.get(&pair) {
                        Some(n) => n.clone(),
                        None => {
                            let n = format!("P{}", order.len());
                            names.insert(pair.clone(), n.clone());
                            order.push(pair);
                            n
                        }
                    };
                    Summand::Prefix(phi, a, name)
                }
                (s, _) => s,
            };
            targets.push(s.to_term());
        }
        out.push((names[&(y.clone(), z.clone())].clone(), P::sum(targets), y, z));
    }
    Ok(out)
}

/// Sorts a right-nested sum at `p` by the term order and drops duplicates, with A1, A2 and A3.
fn sort_sum(d: &mut Deriver, p: &[usize]) -> Result<()> {
    let P::Alt(_, rest) = d.sub(p).clone() else {
        return Ok(());
    };
    let tail = [p, &[1]].concat();
    if matches!(*rest, P::Alt(..)) {
        sort_sum(d, &tail)?;
    }
    insert(d, p)
}

/// `s + S` with `S` sorted: moves `s` into place.
fn insert(d: &mut Deriver, p: &[usize]) -> Result<()> {
    let P::Alt(s, rest) = d.sub(p).clone() else {
        return Ok(());
    };
    let head = [p, &[0]].concat();
    match &*rest {
        P::Alt(s2, r2) => {
            if s <= *s2 {
                if s == *s2 {
                    d.bwd("A2", p, P::alt(P::alt((*s).clone(), (**s2).clone()), (**r2).clone()))?;
                    d.fwd("A3", &head)?;
                }
                return Ok(());
            }
            d.bwd("A2", p, P::alt(P::alt((*s).clone(), (**s2).clone()), (**r2).clone()))?;
            d.fwd("A1", &head)?;
            d.fwd("A2", p)?;
            insert(d, &[p, &[1]].concat())
        }
        s2 => {
            if *s == *s2 {
                d.fwd("A3", p)
            } else if *s > *s2 {
                d.fwd("A1", p)
            } else {
                Ok(())
            }
        }
    }
}

/// A chain from `lhs` to `rhs` when RDP on `lhs` yields the same set of summands.
fn syntactic(lhs: &ProcTerm, rhs: &ProcTerm, ctx: &Context) -> Result<Option<Vec<Step>>> {
    let mut l = Deriver::new(lhs.clone(), ctx);
    l.fwd("RDP", &[])?;
    sort_sum(&mut l, &[])?;
    let mut r = Deriver::new(rhs.clone(), ctx);
    sort_sum(&mut r, &[])?;
    if l.term != r.term {
        return Ok(None);
    }
    let back = r.steps.into_iter().rev().map(|s| Step {
        dir: match s.dir {
            Dir::Forward => Dir::Backward,
            Dir::Backward => Dir::Forward,
        },
        before: s.after,
        after: s.before,
        ..s
    });
    Ok(Some(l.steps.into_iter().chain(back).collect()))
}

/// Pushes the antecedents `theta(V) = M(V)[theta]` and the RSP conclusion for one side.
fn close_side(
    merged: &SpecRef,
    theta: Vec<(String, ProcTerm)>,
    ctx: &Context,
    cert: &mut ProofCertificate,
) -> Result<usize> {
    let map: HashMap<&str, &ProcTerm> = theta.iter().map(|(x, t)| (x.as_str(), t)).collect();
    let mut antecedents = Vec::new();
    for (v, rhs) in merged.equations() {
        let lhs = map[v.as_str()].clone();
        let rhs = substitute(rhs, &map);
        let by = match syntactic(&lhs, &rhs, ctx)? {
            Some(steps) => Justification::Chain(steps),
            None => Justification::Oracle,
        };
        antecedents.push(cert.push(Lemma { lhs, rhs, by }));
    }
    let lhs = map["R"].clone();
    Ok(cert.push(Lemma {
        lhs,
        rhs: P::rec("R", merged),
        by: Justification::Rsp {
            spec: merged.clone(),
            var: "R".into(),
            theta,
            antecedents,
        },
    }))
}

/// Proves `t1 = t2` or refutes it with a counterexample.
pub fn prove_equal(t1: &ProcTerm, t2: &ProcTerm, ctx: &Context) -> Result<ProofOutcome> {
    let bound = ctx.limits.enumeration;
    let (c1, c2) = (classify(t1, &ctx.carrier, bound)?, classify(t2, &ctx.carrier, bound)?);
    if !(c1.abstraction_free && c2.abstraction_free || c1.bool_conditional && c2.bool_conditional) {
        return Err(Error::Unsupported(
            "both terms must be abstraction-free, or both must have only trivial conditions".into(),
        ));
    }
    let decided = rooted_branching_bisim(&build_lts(t1, ctx)?, &build_lts(t2, ctx)?)?;
    if !decided.equivalent {
        return Ok(ProofOutcome::Refuted(decided));
    }
    let mut cert = ProofCertificate::default();
    let (r1, l1) = normalize(t1, ctx, &mut cert)?;
    let (r2, l2) = normalize(t2, ctx, &mut cert)?;
    let (P::Rec(x1, g1), P::Rec(x2, g2)) = (&r1, &r2) else {
        unreachable!("normal forms are recursion constants")
    };
    let (s1, s2) = (build_lts(&r1, ctx)?, build_lts(&r2, ctx)?);
    let (n1, n2) = (s1.num_states(), s2.num_states());
    let mut u = Union((0..n1 + n2).collect());
    for (p, q) in rooted_branching_bisim(&s1, &s1)?.relation {
        u.join(p, q);
    }
    for (p, q) in rooted_branching_bisim(&s2, &s2)?.relation {
        u.join(n1 + p, n1 + q);
    }
    for (p, q) in rooted_branching_bisim(&s1, &s2)?.relation {
        u.join(p, n1 + q);
    }
    let mut left = Side {
        spec: g1.clone(),
        vars: state_vars(&s1, g1)?,
        class: (0..n1).map(|i| u.find(i)).collect(),
        bottom: BTreeMap::new(),
        bottoms: BTreeSet::new(),
    };
    let mut right = Side {
        spec: g2.clone(),
        vars: state_vars(&s2, g2)?,
        class: (n1..n1 + n2).map(|i| u.find(i)).collect(),
        bottom: BTreeMap::new(),
        bottoms: BTreeSet::new(),
    };
    left.choose_bottoms()?;
    right.choose_bottoms()?;

    let mut eqs = Vec::new();
    let (mut theta1, mut theta2) = (Vec::new(), Vec::new());
    for (v, rhs, y, z) in product(&left, &right, x1, x2)? {
        theta1.push((v.clone(), P::rec(&y, g1)));
        theta2.push((v.clone(), P::rec(&z, g2)));
        eqs.push((v, rhs));
    }
    let merged = RecSpec::new(eqs)?.into_ref();
    if !is_guarded_linear_spec(&merged) {
        return Err(Error::Unsupported("the merged specification has a silent cycle".into()));
    }
    let m1 = close_side(&merged, theta1, ctx, &mut cert)?;
    let m2 = close_side(&merged, theta2, ctx, &mut cert)?;
    let root = P::rec("R", &merged);
    let mut d = Deriver::new(t1.clone(), ctx);
    d.lemma(l1, &[], t1, &r1, Dir::Forward);
    d.lemma(m1, &[], &r1, &root, Dir::Forward);
    d.lemma(m2, &[], &r2, &root, Dir::Backward);
    d.lemma(l2, &[], t2, &r2, Dir::Backward);
    cert.push(Lemma {
        lhs: t1.clone(),
        rhs: t2.clone(),
        by: Justification::Chain(d.steps),
    });
    Ok(ProofOutcome::Proved(cert))
}
