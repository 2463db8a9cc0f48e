//! Data equivalence on actions and equivalence checking on transition systems.

mod ab;
mod branching;
mod conjecture;
mod signature;

use std::collections::HashMap;
use std::fmt;

use serde::Serialize;

use crate::data::{eval_data, Carrier, EvalMap};
use crate::error::{Error, Result};
use crate::term::Action;

pub use ab::rooted_ab_bisim;
pub use branching::{rooted_branching_bisim, verify_counterexample, verify_witness};
pub use conjecture::{conjecture_experiment, ConjectureReport, Divergence};
pub use signature::signature_bisim;

/// Canonical representative of a data-equivalence class of actions.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum ActionClass {
    Tau,
    Basic(String),
    Param(String, Vec<i64>),
    Assign(String, i64),
}

impl fmt::Display for ActionClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ActionClass::Tau => write!(f, "tau"),
            ActionClass::Basic(a) => write!(f, "{a}"),
            ActionClass::Param(a, vs) => {
                let args: Vec<String> = vs.iter().map(i64::to_string).collect();
                write!(f, "{a}({})", args.join(", "))
            }
            ActionClass::Assign(v, d) => write!(f, "{v} := {d}"),
        }
    }
}

/// The class of `a`, with flexible variables read from `sigma`.
pub fn action_class(a: &Action, sigma: Option<&EvalMap>, carrier: &Carrier) -> Result<ActionClass> {
    let empty = EvalMap::new();
    let sigma = match sigma {
        Some(s) => s,
        None if a.has_flex() => return Err(Error::OpenData(a.to_string())),
        None => &empty,
    };
    Ok(match a {
        Action::Tau => ActionClass::Tau,
        Action::Basic(n) => ActionClass::Basic(n.clone()),
        Action::Param(n, args) => ActionClass::Param(
            n.clone(),
            args.iter().map(|e| eval_data(e, sigma, carrier)).collect::<Result<_>>()?,
        ),
        Action::Assign(v, e) => ActionClass::Assign(v.clone(), eval_data(e, sigma, carrier)?),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Left,
    Right,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Observation {
    Step { action: ActionClass, target: usize },
    Terminates,
}

/// A move of one side at a pair of states that the other side cannot answer.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Counterexample {
    pub left: usize,
    pub right: usize,
    pub map: EvalMap,
    pub side: Side,
    pub observation: Observation,
    /// The failure is of the root condition rather than a transfer condition.
    pub root: bool,
    pub left_state: String,
    pub right_state: String,
}

impl fmt::Display for Counterexample {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let (who, other) = match self.side {
            Side::Left => ("left", "right"),
            Side::Right => ("right", "left"),
        };
        let what = match &self.observation {
            Observation::Step { action, target } => format!("does `{action}` to state {target}"),
            Observation::Terminates => "terminates".to_string(),
        };
        write!(
            f,
            "at ({}, {}) = (`{}`, `{}`) under {}: {who} {what}, {other} cannot {}",
            self.left,
            self.right,
            self.left_state,
            self.right_state,
            self.map,
            if self.root { "answer directly" } else { "match" }
        )
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct BisimResult {
    pub equivalent: bool,
    /// The greatest bisimulation found; a witness when `equivalent`.
    pub relation: Vec<(usize, usize)>,
    pub counterexample: Option<Counterexample>,
}

impl BisimResult {
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("plain data")
    }
}

/// Interned action classes; id 0 is `tau`.
#[derive(Debug, Default)]
pub(crate) struct Classes {
    ids: HashMap<ActionClass, u32>,
    all: Vec<ActionClass>,
}

pub(crate) const TAU: u32 = 0;

impl Classes {
    pub(crate) fn new() -> Self {
        let mut c = Classes::default();
        c.intern(ActionClass::Tau);
        c
    }

    pub(crate) fn intern(&mut self, a: ActionClass) -> u32 {
        if let Some(&i) = self.ids.get(&a) {
            return i;
        }
        let i = self.all.len() as u32;
        self.ids.insert(a.clone(), i);
        self.all.push(a);
        i
    }

    pub(crate) fn lookup(&self, a: &ActionClass) -> Option<u32> {
        self.ids.get(a).copied()
    }

    pub(crate) fn get(&self, i: u32) -> &ActionClass {
        &self.all[i as usize]
    }
}

/// A dense relation between left and right states.
#[derive(Debug, Clone)]
pub(crate) struct Rel {
    n2: usize,
    bits: Vec<bool>,
}

impl Rel {
    pub(crate) fn full(n1: usize, n2: usize) -> Self {
        Rel { n2, bits: vec![true; n1 * n2] }
    }

    pub(crate) fn from_pairs(n1: usize, n2: usize, pairs: &[(usize, usize)]) -> Self {
        let mut r = Rel { n2, bits: vec![false; n1 * n2] };
        for &(p, q) in pairs {
            if p < n1 && q < n2 {
                r.bits[p * n2 + q] = true;
            }
        }
        r
    }

    pub(crate) fn get(&self, p: usize, q: usize) -> bool {
        self.bits[p * self.n2 + q]
    }

    pub(crate) fn remove(&mut self, p: usize, q: usize) {
        self.bits[p * self.n2 + q] = false;
    }

    pub(crate) fn pairs(&self) -> Vec<(usize, usize)> {
        (0..self.bits.len())
            .filter(|&i| self.bits[i])
            .map(|i| (i / self.n2, i % self.n2))
            .collect()
    }
}

#[cfg(test)]
mod tests;
