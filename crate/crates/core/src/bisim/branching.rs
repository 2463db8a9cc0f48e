//! Rooted branching bisimulation by greatest-fixpoint pair refinement.

use std::collections::HashMap;

use crate::data::{enumerate_maps, EvalMap, DEFAULT_ENUMERATION_BOUND};
use crate::error::{Error, Result};
use crate::sos::SigmaLts;

use super::{action_class, BisimResult, Classes, Counterexample, Observation, Rel, Side, TAU};

/// One transition system indexed by its own maps.
pub(crate) struct View {
    /// `succ[state][map]`: `(class, target)`
    pub(crate) succ: Vec<Vec<Vec<(u32, usize)>>>,
    pub(crate) term: Vec<Vec<bool>>,
    pub(crate) closure: Vec<Vec<Vec<usize>>>,
    pub(crate) names: Vec<String>,
}

impl View {
    fn new(l: &SigmaLts, classes: &mut Classes) -> Result<Self> {
        let n = l.num_states();
        let m = l.maps.len();
        let mut succ = vec![vec![Vec::new(); m]; n];
        for t in &l.transitions {
            let c = classes.intern(action_class(&t.action, Some(&l.maps[t.map]), &l.carrier)?);
            succ[t.from][t.map].push((c, t.to));
        }
        for row in &mut succ {
            for v in row.iter_mut() {
                v.sort_unstable();
                v.dedup();
            }
        }
        let closure = (0..n).map(|s| (0..m).map(|k| l.silent_closure(s, k)).collect()).collect();
        Ok(View {
            succ,
            term: l.term.clone(),
            closure,
            names: l.states.iter().map(ToString::to_string).collect(),
        })
    }
}

/// Both systems over the maps of the union of their declarations.
pub(crate) struct Product {
    pub(crate) classes: Classes,
    pub(crate) left: View,
    pub(crate) right: View,
    /// Distinct projections `(left map, right map)` with a representative joint map.
    pub(crate) joint: Vec<(usize, usize, EvalMap)>,
    pub(crate) roots: (usize, usize),
}

fn index_of(l: &SigmaLts) -> HashMap<&EvalMap, usize> {
    l.maps.iter().enumerate().map(|(i, m)| (m, i)).collect()
}

impl Product {
    pub(crate) fn new(l1: &SigmaLts, l2: &SigmaLts) -> Result<Self> {
        if l1.carrier != l2.carrier {
            return Err(Error::Declaration("the transition systems use different carriers".into()));
        }
        let mut classes = Classes::new();
        let left = View::new(l1, &mut classes)?;
        let right = View::new(l2, &mut classes)?;
        let decl = l1.decl.union(&l2.decl);
        let bound = DEFAULT_ENUMERATION_BOUND.max(l1.maps.len().saturating_mul(l2.maps.len()));
        let (i1, i2) = (index_of(l1), index_of(l2));
        let mut seen = HashMap::new();
        let mut joint = Vec::new();
        for sigma in enumerate_maps(&decl, &l1.carrier, bound)? {
            let m1 = *i1
                .get(&sigma.restrict(l1.decl.names()))
                .ok_or_else(|| Error::Shape("left system lacks a map".into()))?;
            let m2 = *i2
                .get(&sigma.restrict(l2.decl.names()))
                .ok_or_else(|| Error::Shape("right system lacks a map".into()))?;
            if seen.insert((m1, m2), ()).is_none() {
                joint.push((m1, m2, sigma));
            }
        }
        Ok(Product {
            classes,
            left,
            right,
            joint,
            roots: (l1.root, l2.root),
        })
    }

    fn side(&self, s: Side) -> (&View, &View) {
        match s {
            Side::Left => (&self.left, &self.right),
            Side::Right => (&self.right, &self.left),
        }
    }

    /// Whether `(x, y)` is related, with `x` on side `s`.
    fn rel(rel: &Rel, s: Side, x: usize, y: usize) -> bool {
        match s {
            Side::Left => rel.get(x, y),
            Side::Right => rel.get(y, x),
        }
    }

    /// Can the other side answer a move of `x` (on side `s`) from `y`?
    fn answers(&self, rel: &Rel, s: Side, x: usize, y: usize, my: usize, obs: Option<(u32, usize)>) -> bool {
        let (_, other) = self.side(s);
        other.closure[y][my].iter().any(|&ys| {
            Self::rel(rel, s, x, ys)
                && match obs {
                    None => other.term[ys][my],
                    Some((c, x2)) => {
                        (c == TAU && Self::rel(rel, s, x2, ys))
                            || other.succ[ys][my].iter().any(|&(c2, y2)| c2 == c && Self::rel(rel, s, x2, y2))
                    }
                }
        })
    }

    fn answers_directly(&self, rel: &Rel, s: Side, y: usize, my: usize, obs: Option<(u32, usize)>) -> bool {
        let (_, other) = self.side(s);
        match obs {
            None => other.term[y][my],
            Some((c, x2)) => other.succ[y][my].iter().any(|&(c2, y2)| c2 == c && Self::rel(rel, s, x2, y2)),
        }
    }

    /// The first violated transfer (or, with `root`, root) condition at `(p, q)`.
    pub(crate) fn violation(&self, rel: &Rel, p: usize, q: usize, root: bool) -> Option<Counterexample> {
        for (m1, m2, sigma) in &self.joint {
            for s in [Side::Left, Side::Right] {
                let (x, y, mx, my) = match s {
                    Side::Left => (p, q, *m1, *m2),
                    Side::Right => (q, p, *m2, *m1),
                };
                let (me, _) = self.side(s);
                let moves = me.succ[x][mx].iter().map(|&o| Some(o));
                let fin = me.term[x][mx].then_some(None);
                for obs in moves.chain(fin) {
                    let ok = if root {
                        self.answers_directly(rel, s, y, my, obs)
                    } else {
                        self.answers(rel, s, x, y, my, obs)
                    };
                    if !ok {
                        return Some(self.counterexample(p, q, sigma, s, obs, root));
                    }
                }
            }
        }
        None
    }

    fn counterexample(
        &self,
        p: usize,
        q: usize,
        sigma: &EvalMap,
        side: Side,
        obs: Option<(u32, usize)>,
        root: bool,
    ) -> Counterexample {
        Counterexample {
            left: p,
            right: q,
            map: sigma.clone(),
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

    /// Deletes violating pairs in lexicographic order until none remain.
    pub(crate) fn refine(&self) -> (Rel, HashMap<(usize, usize), Counterexample>) {
        let (n1, n2) = (self.left.names.len(), self.right.names.len());
        let mut rel = Rel::full(n1, n2);
        let mut why = HashMap::new();
        loop {
            let mut changed = false;
            for p in 0..n1 {
                for q in 0..n2 {
                    if rel.get(p, q) {
                        if let Some(c) = self.violation(&rel, p, q, false) {
                            rel.remove(p, q);
                            why.insert((p, q), c);
                            changed = true;
                        }
                    }
                }
            }
            if !changed {
                return (rel, why);
            }
        }
    }

    pub(crate) fn decide(&self) -> BisimResult {
        let (rel, mut why) = self.refine();
        let (r1, r2) = self.roots;
        let counterexample = if rel.get(r1, r2) {
            self.violation(&rel, r1, r2, true)
        } else {
            why.remove(&(r1, r2))
        };
        BisimResult {
            equivalent: counterexample.is_none(),
            relation: rel.pairs(),
            counterexample,
        }
    }
}

/// Decides rooted branching bisimilarity of the roots of `l1` and `l2`.
///
/// Maps range over the union of both declarations; each system sees the
/// restriction to its own variables.
pub fn rooted_branching_bisim(l1: &SigmaLts, l2: &SigmaLts) -> Result<BisimResult> {
    Ok(Product::new(l1, l2)?.decide())
}

/// Checks that `relation` is a branching bisimulation containing the root
/// pair, and that the root pair satisfies the root condition.
pub fn verify_witness(l1: &SigmaLts, l2: &SigmaLts, relation: &[(usize, usize)]) -> Result<Option<Counterexample>> {
    let prod = Product::new(l1, l2)?;
    let rel = Rel::from_pairs(l1.num_states(), l2.num_states(), relation);
    let (r1, r2) = prod.roots;
    if !rel.get(r1, r2) {
        return Err(Error::Replay {
            step: 0,
            reason: "the relation does not contain the root pair".into(),
        });
    }
    for &(p, q) in relation {
        if let Some(c) = prod.violation(&rel, p, q, false) {
            return Ok(Some(c));
        }
    }
    Ok(prod.violation(&rel, r1, r2, true))
}

/// Replays a counterexample: its observation must be a genuine move of the
/// named side that the other side cannot answer within `result.relation`.
pub fn verify_counterexample(l1: &SigmaLts, l2: &SigmaLts, result: &BisimResult) -> Result<()> {
    let fail = |reason: &str| Error::Replay { step: 0, reason: reason.to_string() };
    let c = result.counterexample.as_ref().ok_or_else(|| fail("no counterexample"))?;
    let prod = Product::new(l1, l2)?;
    let rel = Rel::from_pairs(l1.num_states(), l2.num_states(), &result.relation);
    let (m1, m2, _) = prod
        .joint
        .iter()
        .find(|(_, _, s)| *s == c.map)
        .ok_or_else(|| fail("unknown evaluation map"))?;
    let (x, y, mx, my) = match c.side {
        Side::Left => (c.left, c.right, *m1, *m2),
        Side::Right => (c.right, c.left, *m2, *m1),
    };
    let (me, _) = prod.side(c.side);
    let obs = match &c.observation {
        Observation::Terminates => {
            if !me.term[x][mx] {
                return Err(fail("the state does not terminate"));
            }
            None
        }
        Observation::Step { action, target } => {
            let cls = prod.classes.lookup(action).ok_or_else(|| fail("unknown action"))?;
            if !me.succ[x][mx].contains(&(cls, *target)) {
                return Err(fail("the step is not a transition"));
            }
            Some((cls, *target))
        }
    };
    let answered = if c.root {
        prod.answers_directly(&rel, c.side, y, my, obs)
    } else {
        rel.get(c.left, c.right) || prod.answers(&rel, c.side, x, y, my, obs)
    };
    if answered {
        return Err(fail("the observation can be matched"));
    }
    Ok(())
}
