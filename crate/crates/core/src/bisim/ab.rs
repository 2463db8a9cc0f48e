//! Rooted ab-bisimulation on condition-labelled systems.
//!
//! A condition denotes a finite set of maps, so a covering set of conditions
//! exists iff every satisfying map admits a matching path. Each clause is
//! therefore checked map by map, with silent paths whose intermediate states
//! all stay related.

use std::collections::HashMap;

use crate::cond::eval_cond;
use crate::context::Context;
use crate::data::{enumerate_maps, EvalMap, VarDecl};
use crate::error::{Error, Result};
use crate::sos::CondLts;

use super::{action_class, BisimResult, Classes, Counterexample, Observation, Rel, Side, TAU};

struct Edge {
    /// Class per map, `None` where the condition fails.
    class: Vec<Option<u32>>,
    to: usize,
}

struct Part {
    edges: Vec<Vec<Edge>>,
    term: Vec<Vec<bool>>,
    names: Vec<String>,
}

impl Part {
    fn new(c: &CondLts, maps: &[EvalMap], ctx: &Context, classes: &mut Classes) -> Result<Self> {
        let n = c.num_states();
        let mut edges: Vec<Vec<Edge>> = (0..n).map(|_| Vec::new()).collect();
        for t in &c.transitions {
            let mut class = Vec::with_capacity(maps.len());
            for sigma in maps {
                class.push(if eval_cond(&t.cond, sigma, &ctx.carrier)? {
                    Some(classes.intern(action_class(&t.action, Some(sigma), &ctx.carrier)?))
                } else {
                    None
                });
            }
            edges[t.from].push(Edge { class, to: t.to });
        }
        let mut term = vec![vec![false; maps.len()]; n];
        for (s, phi) in &c.terminating {
            for (k, sigma) in maps.iter().enumerate() {
                term[*s][k] |= eval_cond(phi, sigma, &ctx.carrier)?;
            }
        }
        Ok(Part {
            edges,
            term,
            names: c.states.iter().map(ToString::to_string).collect(),
        })
    }
}

struct Checker {
    classes: Classes,
    left: Part,
    right: Part,
    maps: Vec<EvalMap>,
}

impl Checker {
    fn sides(&self, s: Side) -> (&Part, &Part) {
        match s {
            Side::Left => (&self.left, &self.right),
            Side::Right => (&self.right, &self.left),
        }
    }

    fn related(rel: &Rel, s: Side, x: usize, y: usize) -> bool {
        match s {
            Side::Left => rel.get(x, y),
            Side::Right => rel.get(y, x),
        }
    }

    fn finishes(&self, rel: &Rel, s: Side, z: usize, k: usize, obs: Option<(u32, usize)>) -> bool {
        let (_, other) = self.sides(s);
        match obs {
            None => other.term[z][k],
            Some((c, x2)) => {
                (c == TAU && Self::related(rel, s, x2, z))
                    || other.edges[z]
                        .iter()
                        .any(|e| e.class[k] == Some(c) && Self::related(rel, s, x2, e.to))
            }
        }
    }

    /// Searches a silent path from `y` under map `k` whose states stay related to `x`.
    fn path(&self, rel: &Rel, s: Side, x: usize, y: usize, k: usize, obs: Option<(u32, usize)>) -> bool {
        let (_, other) = self.sides(s);
        let mut seen = vec![false; other.names.len()];
        let mut stack = vec![y];
        seen[y] = true;
        while let Some(z) = stack.pop() {
            if self.finishes(rel, s, z, k, obs) {
                return true;
            }
            for e in &other.edges[z] {
                if e.class[k] == Some(TAU) && !seen[e.to] && Self::related(rel, s, x, e.to) {
                    seen[e.to] = true;
                    stack.push(e.to);
                }
            }
        }
        false
    }

    fn violation(&self, rel: &Rel, p: usize, q: usize, root: bool) -> Option<Counterexample> {
        for s in [Side::Left, Side::Right] {
            let (x, y) = match s {
                Side::Left => (p, q),
                Side::Right => (q, p),
            };
            let (me, _) = self.sides(s);
            for k in 0..self.maps.len() {
                let moves = me.edges[x].iter().filter_map(|e| e.class[k].map(|c| Some((c, e.to))));
                let fin = me.term[x][k].then_some(None);
                for obs in moves.chain(fin) {
                    let ok = if root {
                        self.direct(rel, s, y, k, obs)
                    } else {
                        self.path(rel, s, x, y, k, obs)
                    };
                    if !ok {
                        return Some(self.counterexample(p, q, k, s, obs, root));
                    }
                }
            }
        }
        None
    }

    fn direct(&self, rel: &Rel, s: Side, y: usize, k: usize, obs: Option<(u32, usize)>) -> bool {
        let (_, other) = self.sides(s);
        match obs {
            None => other.term[y][k],
            Some((c, x2)) => other.edges[y]
                .iter()
                .any(|e| e.class[k] == Some(c) && Self::related(rel, s, x2, e.to)),
        }
    }

    fn counterexample(&self, p: usize, q: usize, k: usize, side: Side, obs: Option<(u32, usize)>, root: bool) -> Counterexample {
        Counterexample {
            left: p,
            right: q,
            map: self.maps[k].clone(),
            side,
            observation: match obs {
                None => Observation::Terminates,
                Some((c, t)) => Observation::Step {
                    action: self.classes.get(c).clone(),
                    target: t,
                },
            },
            root,
            left_state: self.left.names[p].clone(),
            right_state: self.right.names[q].clone(),
        }
    }
}

/// Decides rooted ab-bisimilarity of the roots of `c1` and `c2`, with
/// conditions interpreted over the maps of `decl`.
pub fn rooted_ab_bisim(c1: &CondLts, c2: &CondLts, decl: &VarDecl, ctx: &Context) -> Result<BisimResult> {
    for v in c1.decl.names().iter().chain(c2.decl.names()) {
        if !decl.contains(v) {
            return Err(Error::Declaration(format!("flexible variable `{v}` is not declared")));
        }
    }
    let maps = enumerate_maps(decl, &ctx.carrier, ctx.limits.enumeration)?;
    let mut classes = Classes::new();
    let left = Part::new(c1, &maps, ctx, &mut classes)?;
    let right = Part::new(c2, &maps, ctx, &mut classes)?;
    let chk = Checker { classes, left, right, maps };
    let (n1, n2) = (c1.num_states(), c2.num_states());
    let mut rel = Rel::full(n1, n2);
    let mut why = HashMap::new();
    loop {
        let mut changed = false;
        for p in 0..n1 {
            for q in 0..n2 {
                if rel.get(p, q) {
                    if let Some(c) = chk.violation(&rel, p, q, false) {
                        rel.remove(p, q);
                        why.insert((p, q), c);
                        changed = true;
                    }
                }
            }
        }
        if !changed {
            break;
        }
    }
    let (r1, r2) = (c1.root, c2.root);
    let counterexample = if rel.get(r1, r2) {
        chk.violation(&rel, r1, r2, true)
    } else {
        why.remove(&(r1, r2))
    };
    Ok(BisimResult {
        equivalent: counterexample.is_none(),
        relation: rel.pairs(),
        counterexample,
    })
}
