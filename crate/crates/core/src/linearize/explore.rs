//! Linear specifications from head normal forms, combined by RSP.

use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};

use crate::cond::Condition;
use crate::context::Context;
use crate::error::{Error, Result};
use crate::term::{is_guarded_linear_spec, linear_summands, ActionSet, ProcTerm, RecSpec, SpecRef, Summand};

use super::cert::{Dir, Justification, Lemma, ProofCertificate, Rule, Step};
use super::cluster::{apply_cfar, components};
use super::derive::{summand_positions, Deriver};

use ProcTerm as P;

/// An abstraction `hide_I(<X|F>)` over a specification whose internal cycles only enter hatted copies.
struct Hidden<'a> {
    actions: &'a ActionSet,
    spec: &'a SpecRef,
    cyclic: &'a BTreeSet<String>,
}

/// Replaces `tau . hide_I(<W|F>)` in summands by the CFAR right-hand side when `W` lies on an internal cycle.
fn cfar_pass(d: &mut Deriver, hidden: &Hidden, cache: &mut HashMap<String, (ProcTerm, Step)>) -> Result<()> {
    let targets: Vec<(Vec<usize>, String)> = summand_positions(&d.term)
        .into_iter()
        .filter_map(|(pos, s)| match s {
            P::Guard(_, body) => match &**body {
                P::Seq(t, h) if **t == P::tau() => match &**h {
                    P::Abstr(i, r) if i == hidden.actions => match &**r {
                        P::Rec(w, f) if f == hidden.spec && hidden.cyclic.contains(w) => Some((pos, w.clone())),
                        _ => None,
                    },
                    _ => None,
                },
                _ => None,
            },
            _ => None,
        })
        .collect();
    for (mut pos, w) in targets {
        if !cache.contains_key(&w) {
            cache.insert(w.clone(), apply_cfar(hidden.spec, &w, hidden.actions)?);
        }
        let (rhs, step) = &cache[&w];
        pos.push(0);
        d.record(step.rule.clone(), Dir::Forward, &pos, rhs.clone());
    }
    Ok(())
}

/// Proves `root = <X0|G>` for a fresh guarded linear `G`; returns the constant and the lemma index.
fn explore(root: ProcTerm, ctx: &Context, cert: &mut ProofCertificate, hidden: Option<&Hidden>) -> Result<(ProcTerm, usize)> {
    let mut states = vec![root.clone()];
    let mut index: HashMap<ProcTerm, usize> = HashMap::from([(root, 0)]);
    let mut queue = VecDeque::from([0]);
    let mut found: BTreeMap<usize, (ProcTerm, Vec<Step>, Vec<Summand>)> = BTreeMap::new();
    let mut cache = HashMap::new();
    let mut transitions = 0;
    while let Some(k) = queue.pop_front() {
        let mut d = Deriver::new(states[k].clone(), ctx);
        d.hnf(&[])?;
        if let Some(h) = hidden {
            cfar_pass(&mut d, h, &mut cache)?;
        }
        let mut summands = Vec::new();
        for (_, s) in summand_positions(&d.term) {
            let P::Guard(phi, body) = s else {
                return Err(Error::Shape(format!("`{s}` is not a summand")));
            };
            match &**body {
                P::Eps => summands.push(Summand::Exit(phi.clone())),
                P::Seq(a, r) => {
                    let P::Act(a) = &**a else {
                        return Err(Error::Shape(format!("`{s}` is not a summand")));
                    };
                    let j = match index.get(&**r) {
                        Some(&j) => j,
                        None => {
                            if states.len() >= ctx.limits.states {
                                return Err(Error::ExplorationLimit {
                                    states: states.len(),
                                    transitions,
                                    bound: ctx.limits.states,
                                });
                            }
                            states.push((**r).clone());
                            index.insert((**r).clone(), states.len() - 1);
                            queue.push_back(states.len() - 1);
                            states.len() - 1
                        }
                    };
                    transitions += 1;
                    summands.push(Summand::Prefix(phi.clone(), a.clone(), format!("X{j}")));
                }
                _ => return Err(Error::Shape(format!("`{s}` is not a summand"))),
            }
        }
        found.insert(k, (d.term, d.steps, summands));
    }
    let eqs = found
        .iter()
        .map(|(k, (_, _, ss))| (format!("X{k}"), P::sum(ss.iter().map(Summand::to_term))))
        .collect();
    let spec = RecSpec::new(eqs)?.into_ref();
    if !is_guarded_linear_spec(&spec) {
        return Err(Error::Unsupported(
            "the abstraction leaves a silent cycle that is not a cluster".into(),
        ));
    }
    let mut antecedents = Vec::new();
    for (k, (normal, steps, _)) in found {
        antecedents.push(cert.push(Lemma {
            lhs: states[k].clone(),
            rhs: normal,
            by: Justification::Chain(steps),
        }));
    }
    let theta = states.iter().enumerate().map(|(k, s)| (format!("X{k}"), s.clone())).collect();
    let rec = P::rec("X0", &spec);
    let lemma = cert.push(Lemma {
        lhs: states[0].clone(),
        rhs: rec.clone(),
        by: Justification::Rsp {
            spec,
            var: "X0".into(),
            theta,
            antecedents,
        },
    });
    Ok((rec, lemma))
}

fn internal(s: &Summand, i: &ActionSet) -> bool {
    matches!(s, Summand::Prefix(Condition::True, a, _) if a.is_tau() || i.contains(a))
}

/// `<X|F> = <X|F'>` where `F'` routes internal moves to hatted copies, so every internal cycle is a cluster.
fn hat_double(f: &SpecRef, x: &str, i: &ActionSet, cert: &mut ProofCertificate) -> Result<Option<(SpecRef, usize, BTreeSet<String>)>> {
    if components(f, i)?.iter().all(|(_, cyclic)| !cyclic) {
        return Ok(None);
    }
    let mut hat: BTreeMap<&str, String> = BTreeMap::new();
    for y in f.vars() {
        let mut h = format!("{y}_h");
        while f.contains(&h) {
            h.push('h');
        }
        hat.insert(y, h);
    }
    let mut eqs = Vec::new();
    for (y, rhs) in f.equations() {
        let ss = linear_summands(rhs)?
            .into_iter()
            .map(|s| match s {
                Summand::Prefix(phi, a, z) if internal(&Summand::Prefix(phi.clone(), a.clone(), z.clone()), i) => {
                    Summand::Prefix(phi, a, hat[z.as_str()].clone())
                }
                s => s,
            })
            .map(|s| s.to_term());
        eqs.push((y.clone(), P::sum(ss)));
    }
    let copies: Vec<(String, ProcTerm)> = eqs.iter().map(|(y, r)| (hat[y.as_str()].clone(), r.clone())).collect();
    eqs.extend(copies);
    let doubled = RecSpec::new(eqs)?.into_ref();
    let mut unfold = BTreeMap::new();
    for y in f.vars() {
        let lhs = P::rec(y, f);
        let rhs = f.rhs(y).expect("variable of the specification").close_with(f);
        let step = Step {
            rule: Rule::Axiom("RDP"),
            dir: Dir::Forward,
            pos: vec![],
            before: lhs.clone(),
            after: rhs.clone(),
        };
        unfold.insert(y.to_string(), cert.push(Lemma {
            lhs,
            rhs,
            by: Justification::Chain(vec![step]),
        }));
    }
    let original: BTreeMap<&str, &str> = hat.iter().map(|(y, h)| (h.as_str(), *y)).collect();
    let base = |v: &str| original.get(v).copied().unwrap_or(v).to_string();
    let theta = doubled.vars().map(|v| (v.to_string(), P::rec(&base(v), f))).collect();
    let antecedents = doubled.vars().map(|v| unfold[&base(v)]).collect();
    let lemma = cert.push(Lemma {
        lhs: P::rec(x, f),
        rhs: P::rec(x, &doubled),
        by: Justification::Rsp {
            spec: doubled.clone(),
            var: x.to_string(),
            theta,
            antecedents,
        },
    });
    let cyclic = components(&doubled, i)?
        .into_iter()
        .filter(|(_, cyclic)| *cyclic)
        .flat_map(|(c, _)| c)
        .collect();
    Ok(Some((doubled, lemma, cyclic)))
}

/// A position of an abstraction whose argument is abstraction-free.
fn innermost_abstraction(t: &ProcTerm) -> Option<Vec<usize>> {
    t.positions().into_iter().rev().find(|p| {
        matches!(t.subterm(p), Some(P::Abstr(_, u)) if !u.contains_abstraction())
    })
}

/// Proves `t = <X0|G>` for closed `t`; returns the constant and the index of the goal lemma.
pub(crate) fn normalize(t: &ProcTerm, ctx: &Context, cert: &mut ProofCertificate) -> Result<(ProcTerm, usize)> {
    if !t.is_closed() {
        return Err(Error::NotClosed(t.to_string()));
    }
    if !t.contains_abstraction() {
        return explore(t.clone(), ctx, cert, None);
    }
    let mut d = Deriver::new(t.clone(), ctx);
    while d.term.contains_abstraction() {
        let Some(p) = innermost_abstraction(&d.term) else {
            return Err(Error::Unsupported("abstraction inside a recursive specification".into()));
        };
        let P::Abstr(i, u) = d.sub(&p).clone() else {
            unreachable!("abstraction position")
        };
        let (lin, l1) = explore((*u).clone(), ctx, cert, None)?;
        let arg = [p.clone(), vec![0]].concat();
        d.lemma(l1, &arg, &u, &lin, Dir::Forward);
        let P::Rec(x, f) = &lin else { unreachable!("explore yields a constant") };
        let (hidden_spec, cyclic) = match hat_double(f, x, &i, cert)? {
            Some((doubled, l2, cyclic)) => {
                let rhs = P::rec(x, &doubled);
                d.lemma(l2, &arg, &lin, &rhs, Dir::Forward);
                (doubled, cyclic)
            }
            None => (f.clone(), BTreeSet::new()),
        };
        let hidden = Hidden {
            actions: &i,
            spec: &hidden_spec,
            cyclic: &cyclic,
        };
        let before = d.sub(&p).clone();
        let (g, l3) = explore(before.clone(), ctx, cert, Some(&hidden))?;
        d.lemma(l3, &p, &before, &g, Dir::Forward);
    }
    let g = match &d.term {
        P::Rec(..) if d.steps.last().is_some_and(|s| s.pos.is_empty()) => d.term.clone(),
        _ => {
            let before = d.term.clone();
            let (g, l4) = explore(before.clone(), ctx, cert, None)?;
            d.lemma(l4, &[], &before, &g, Dir::Forward);
            g
        }
    };
    let lemma = cert.push(Lemma {
        lhs: t.clone(),
        rhs: g.clone(),
        by: Justification::Chain(d.steps),
    });
    Ok((g, lemma))
}
