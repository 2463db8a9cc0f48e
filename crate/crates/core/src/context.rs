//! Shared declarations and resource limits for every analysis.

use std::collections::{BTreeMap, BTreeSet};

use crate::data::{Carrier, VarDecl, DEFAULT_ENUMERATION_BOUND};
use crate::term::CommFunction;

pub const DEFAULT_STATE_BOUND: usize = 100_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Limits {
    /// Maximum number of evaluation maps in one enumeration.
    pub enumeration: usize,
    /// Maximum number of states explored per transition system.
    pub states: usize,
}

impl Default for Limits {
    fn default() -> Self {
        Limits {
            enumeration: DEFAULT_ENUMERATION_BOUND,
            states: DEFAULT_STATE_BOUND,
        }
    }
}

/// The data domain, flexible variables, actions and communication function of a problem.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Context {
    pub carrier: Carrier,
    pub vars: VarDecl,
    /// Declared action names with their admissible arities (0 = basic action).
    pub actions: BTreeMap<String, BTreeSet<usize>>,
    pub comm: CommFunction,
    pub limits: Limits,
}

impl Context {
    pub fn new(carrier: Carrier, vars: VarDecl) -> Self {
        Context {
            carrier,
            vars,
            ..Context::default()
        }
    }

    pub fn with_actions<'a>(mut self, actions: impl IntoIterator<Item = (&'a str, usize)>) -> Self {
        for (a, n) in actions {
            self.actions.entry(a.to_string()).or_default().insert(n);
        }
        self
    }

    pub fn with_comm(mut self, comm: CommFunction) -> Self {
        self.comm = comm;
        self
    }

    pub fn with_limits(mut self, limits: Limits) -> Self {
        self.limits = limits;
        self
    }

    pub fn declares_action(&self, name: &str, arity: usize) -> bool {
        self.actions.get(name).is_some_and(|s| s.contains(&arity))
    }
}
