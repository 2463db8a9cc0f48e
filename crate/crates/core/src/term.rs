//! Process terms, actions, recursive specifications and the communication function.

use std::collections::hash_map::DefaultHasher;
use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::hash::{Hash, Hasher};
use std::sync::{Arc, OnceLock};

use serde::Serialize;

use crate::cond::{satisfiable_own, valid_own, Condition};
use crate::data::{Carrier, DataTerm, EvalMap};
use crate::error::{Error, Result};

/// Atomic actions plus the silent step.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Action {
    Basic(String),
    Tau,
    /// Data-parameterized action `a(e1,...,en)`, n >= 1.
    Param(String, Vec<DataTerm>),
    /// Assignment action `v := e`.
    Assign(String, DataTerm),
}

impl Action {
    pub fn basic(name: &str) -> Self {
        Action::Basic(name.to_string())
    }

    pub fn is_tau(&self) -> bool {
        matches!(self, Action::Tau)
    }

    /// Name and arity of a basic or parameterized action.
    pub fn signature(&self) -> Option<(&str, usize)> {
        match self {
            Action::Basic(a) => Some((a, 0)),
            Action::Param(a, args) => Some((a, args.len())),
            _ => None,
        }
    }

    pub fn collect_flex(&self, out: &mut BTreeSet<String>) {
        match self {
            Action::Param(_, args) => args.iter().for_each(|e| e.collect_flex(out)),
            Action::Assign(_, e) => e.collect_flex(out),
            _ => {}
        }
    }

    pub fn has_flex(&self) -> bool {
        match self {
            Action::Param(_, args) => args.iter().any(DataTerm::has_flex),
            Action::Assign(_, e) => e.has_flex(),
            _ => false,
        }
    }

    /// `sigma(alpha)`: data arguments evaluated under `sigma`.
    pub fn substitute(&self, sigma: &EvalMap, carrier: &Carrier) -> Result<Action> {
        Ok(match self {
            Action::Param(a, args) => Action::Param(
                a.clone(),
                args.iter()
                    .map(|e| e.substitute(sigma, carrier))
                    .collect::<Result<_>>()?,
            ),
            Action::Assign(v, e) => Action::Assign(v.clone(), e.substitute(sigma, carrier)?),
            other => other.clone(),
        })
    }

    pub fn fold_closed(&self, carrier: &Carrier) -> Action {
        match self {
            Action::Param(a, args) => Action::Param(a.clone(), args.iter().map(|e| e.fold_closed(carrier)).collect()),
            Action::Assign(v, e) => Action::Assign(v.clone(), e.fold_closed(carrier)),
            other => other.clone(),
        }
    }
}

impl fmt::Display for Action {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Action::Basic(a) => write!(f, "{a}"),
            Action::Tau => write!(f, "tau"),
            Action::Param(a, args) => {
                write!(f, "{a}(")?;
                for (i, e) in args.iter().enumerate() {
                    if i > 0 {
                        write!(f, ", ")?;
                    }
                    write!(f, "{e}")?;
                }
                write!(f, ")")
            }
            Action::Assign(v, e) => match e {
                DataTerm::Bin(..) => write!(f, "{v} := ({e})"),
                _ => write!(f, "{v} := {e}"),
            },
        }
    }
}

/// Finite description of a (possibly infinite) set of atomic actions.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ActionPattern {
    /// Every action, `tau` included; `encap{*}(x)` only keeps termination.
    All,
    /// The basic action and all parameterized forms with this name.
    Name(String),
    /// Exactly the forms with this name and arity (arity 0 is the basic action).
    NameArity(String, usize),
    /// Every assignment to this flexible variable.
    Assign(String),
}

impl ActionPattern {
    pub fn matches(&self, a: &Action) -> bool {
        match (self, a) {
            (ActionPattern::All, _) => true,
            (_, Action::Tau) => false,
            (ActionPattern::Name(n), a) => a.signature().is_some_and(|(m, _)| m == n),
            (ActionPattern::NameArity(n, k), a) => a.signature().is_some_and(|(m, j)| m == n && j == *k),
            (ActionPattern::Assign(v), Action::Assign(w, _)) => v == w,
            _ => false,
        }
    }
}

impl fmt::Display for ActionPattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ActionPattern::All => write!(f, "*"),
            ActionPattern::Name(n) => write!(f, "{n}"),
            ActionPattern::NameArity(n, k) => write!(f, "{n}/{k}"),
            ActionPattern::Assign(v) => write!(f, "{v}:=*"),
        }
    }
}

/// The action sets `H` and `I` of encapsulation and abstraction.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ActionSet(pub BTreeSet<ActionPattern>);

impl ActionSet {
    pub fn new(patterns: impl IntoIterator<Item = ActionPattern>) -> Self {
        ActionSet(patterns.into_iter().collect())
    }

    pub fn names<'a>(names: impl IntoIterator<Item = &'a str>) -> Self {
        ActionSet(names.into_iter().map(|n| ActionPattern::Name(n.to_string())).collect())
    }

    pub fn all() -> Self {
        ActionSet::new([ActionPattern::All])
    }

    pub fn contains(&self, a: &Action) -> bool {
        self.0.iter().any(|p| p.matches(a))
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn union(&self, other: &ActionSet) -> ActionSet {
        ActionSet(self.0.union(&other.0).cloned().collect())
    }
}

impl fmt::Display for ActionSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, p) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{p}")?;
        }
        write!(f, "}}")
    }
}

/// A recursive specification: distinct variables with their right-hand sides.
#[derive(Debug, Clone)]
pub struct RecSpec {
    equations: Vec<(String, ProcTerm)>,
    index: HashMap<String, usize>,
    hash: u64,
    reads: OnceLock<BTreeSet<String>>,
}

impl RecSpec {
    pub fn new(equations: Vec<(String, ProcTerm)>) -> Result<Self> {
        let mut index = HashMap::new();
        for (i, (x, _)) in equations.iter().enumerate() {
            if index.insert(x.clone(), i).is_some() {
                return Err(Error::Declaration(format!("recursion variable `{x}` defined twice")));
            }
        }
        for (x, t) in &equations {
            let mut free = BTreeSet::new();
            t.collect_recvars(&mut free);
            if let Some(y) = free.iter().find(|y| !index.contains_key(*y)) {
                return Err(Error::UnknownVariable(format!("{y} (in the equation for {x})")));
            }
        }
        let mut h = DefaultHasher::new();
        equations.hash(&mut h);
        Ok(RecSpec {
            equations,
            index,
            hash: h.finish(),
            reads: OnceLock::new(),
        })
    }

    pub fn equations(&self) -> &[(String, ProcTerm)] {
        &self.equations
    }

    pub fn vars(&self) -> impl Iterator<Item = &str> {
        self.equations.iter().map(|(x, _)| x.as_str())
    }

    pub fn rhs(&self, x: &str) -> Option<&ProcTerm> {
        self.index.get(x).map(|&i| &self.equations[i].1)
    }

    pub fn contains(&self, x: &str) -> bool {
        self.index.contains_key(x)
    }

    pub fn len(&self) -> usize {
        self.equations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.equations.is_empty()
    }

    /// Flexible variables read by any right-hand side.
    pub fn reads(&self) -> &BTreeSet<String> {
        self.reads.get_or_init(|| {
            let mut out = BTreeSet::new();
            for (_, rhs) in &self.equations {
                out.extend(rhs.free_reads());
            }
            out
        })
    }

    pub fn into_ref(self) -> SpecRef {
        SpecRef(Arc::new(self))
    }
}

impl PartialEq for RecSpec {
    fn eq(&self, other: &Self) -> bool {
        self.hash == other.hash && self.equations == other.equations
    }
}

impl Eq for RecSpec {}

/// Shared handle to a recursive specification with a cached structural hash.
#[derive(Debug, Clone)]
pub struct SpecRef(pub Arc<RecSpec>);

impl SpecRef {
    pub fn spec(&self) -> &RecSpec {
        &self.0
    }
}

impl std::ops::Deref for SpecRef {
    type Target = RecSpec;
    fn deref(&self) -> &RecSpec {
        &self.0
    }
}

impl PartialEq for SpecRef {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.0, &other.0) || *self.0 == *other.0
    }
}

impl Eq for SpecRef {}

impl Hash for SpecRef {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.0.hash.hash(state);
    }
}

impl PartialOrd for SpecRef {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for SpecRef {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        if self == other {
            return std::cmp::Ordering::Equal;
        }
        self.0
            .hash
            .cmp(&other.0.hash)
            .then_with(|| self.0.equations.cmp(&other.0.equations))
    }
}

/// Process terms, including recursion variables and recursion constants `<X|E>`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ProcTerm {
    Act(Action),
    Delta,
    Eps,
    Alt(Box<ProcTerm>, Box<ProcTerm>),
    Seq(Box<ProcTerm>, Box<ProcTerm>),
    Par(Box<ProcTerm>, Box<ProcTerm>),
    LeftMerge(Box<ProcTerm>, Box<ProcTerm>),
    CommMerge(Box<ProcTerm>, Box<ProcTerm>),
    Encap(ActionSet, Box<ProcTerm>),
    Abstr(ActionSet, Box<ProcTerm>),
    Guard(Condition, Box<ProcTerm>),
    Eval(EvalMap, Box<ProcTerm>),
    RecVar(String),
    Rec(String, SpecRef),
}

macro_rules! binary_ctor {
    ($name:ident, $variant:ident) => {
        pub fn $name(l: ProcTerm, r: ProcTerm) -> ProcTerm {
            ProcTerm::$variant(Box::new(l), Box::new(r))
        }
    };
}

impl ProcTerm {
    binary_ctor!(alt, Alt);
    binary_ctor!(seq, Seq);
    binary_ctor!(par, Par);
    binary_ctor!(left_merge, LeftMerge);
    binary_ctor!(comm_merge, CommMerge);

    pub fn act(a: Action) -> ProcTerm {
        ProcTerm::Act(a)
    }

    pub fn basic(name: &str) -> ProcTerm {
        ProcTerm::Act(Action::basic(name))
    }

    pub fn tau() -> ProcTerm {
        ProcTerm::Act(Action::Tau)
    }

    pub fn guard(c: Condition, t: ProcTerm) -> ProcTerm {
        ProcTerm::Guard(c, Box::new(t))
    }

    pub fn encap(h: ActionSet, t: ProcTerm) -> ProcTerm {
        ProcTerm::Encap(h, Box::new(t))
    }

    pub fn abstr(i: ActionSet, t: ProcTerm) -> ProcTerm {
        ProcTerm::Abstr(i, Box::new(t))
    }

    pub fn eval(s: EvalMap, t: ProcTerm) -> ProcTerm {
        ProcTerm::Eval(s, Box::new(t))
    }

    pub fn rec(x: &str, spec: &SpecRef) -> ProcTerm {
        ProcTerm::Rec(x.to_string(), spec.clone())
    }

    /// Right-nested alternative composition; the empty sum is `delta`.
    pub fn sum(items: impl IntoIterator<Item = ProcTerm>) -> ProcTerm {
        let items: Vec<ProcTerm> = items.into_iter().collect();
        items
            .into_iter()
            .rev()
            .reduce(|acc, t| ProcTerm::alt(t, acc))
            .unwrap_or(ProcTerm::Delta)
    }

    /// Summand `phi :-> alpha . X`.
    pub fn prefix_summand(phi: Condition, a: Action, x: &str) -> ProcTerm {
        ProcTerm::guard(phi, ProcTerm::seq(ProcTerm::Act(a), ProcTerm::RecVar(x.to_string())))
    }

    /// Summand `phi :-> epsilon`.
    pub fn exit_summand(phi: Condition) -> ProcTerm {
        ProcTerm::guard(phi, ProcTerm::Eps)
    }

    pub fn children(&self) -> Vec<&ProcTerm> {
        match self {
            ProcTerm::Alt(l, r)
            | ProcTerm::Seq(l, r)
            | ProcTerm::Par(l, r)
            | ProcTerm::LeftMerge(l, r)
            | ProcTerm::CommMerge(l, r) => vec![l, r],
            ProcTerm::Encap(_, t) | ProcTerm::Abstr(_, t) | ProcTerm::Guard(_, t) | ProcTerm::Eval(_, t) => vec![t],
            _ => vec![],
        }
    }

    /// Rebuilds this node with new children (same arity as `children`).
    pub fn with_children(&self, mut kids: Vec<ProcTerm>) -> ProcTerm {
        let mut take = || Box::new(kids.remove(0));
        match self {
            ProcTerm::Alt(..) => ProcTerm::Alt(take(), take()),
            ProcTerm::Seq(..) => ProcTerm::Seq(take(), take()),
            ProcTerm::Par(..) => ProcTerm::Par(take(), take()),
            ProcTerm::LeftMerge(..) => ProcTerm::LeftMerge(take(), take()),
            ProcTerm::CommMerge(..) => ProcTerm::CommMerge(take(), take()),
            ProcTerm::Encap(h, _) => ProcTerm::Encap(h.clone(), take()),
            ProcTerm::Abstr(i, _) => ProcTerm::Abstr(i.clone(), take()),
            ProcTerm::Guard(c, _) => ProcTerm::Guard(c.clone(), take()),
            ProcTerm::Eval(s, _) => ProcTerm::Eval(s.clone(), take()),
            other => other.clone(),
        }
    }

    pub fn subterm(&self, pos: &[usize]) -> Option<&ProcTerm> {
        match pos.split_first() {
            None => Some(self),
            Some((&i, rest)) => self.children().get(i).and_then(|c| c.subterm(rest)),
        }
    }

    /// Replaces the subterm at `pos`.
    pub fn replace_at(&self, pos: &[usize], new: ProcTerm) -> Option<ProcTerm> {
        match pos.split_first() {
            None => Some(new),
            Some((&i, rest)) => {
                let kids = self.children();
                if i >= kids.len() {
                    return None;
                }
                let mut owned: Vec<ProcTerm> = kids.into_iter().cloned().collect();
                owned[i] = owned[i].replace_at(rest, new)?;
                Some(self.with_children(owned))
            }
        }
    }

    /// All positions in pre-order.
    pub fn positions(&self) -> Vec<Vec<usize>> {
        let mut out = Vec::new();
        fn go(t: &ProcTerm, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
            out.push(cur.clone());
            for (i, c) in t.children().into_iter().enumerate() {
                cur.push(i);
                go(c, cur, out);
                cur.pop();
            }
        }
        go(self, &mut Vec::new(), &mut out);
        out
    }

    pub fn depth(&self) -> usize {
        1 + self.children().into_iter().map(ProcTerm::depth).max().unwrap_or(0)
    }

    pub fn size(&self) -> usize {
        1 + self.children().into_iter().map(ProcTerm::size).sum::<usize>()
    }

    pub fn collect_recvars(&self, out: &mut BTreeSet<String>) {
        match self {
            ProcTerm::RecVar(x) => {
                out.insert(x.clone());
            }
            _ => self.children().into_iter().for_each(|c| c.collect_recvars(out)),
        }
    }

    pub fn is_closed(&self) -> bool {
        let mut s = BTreeSet::new();
        self.collect_recvars(&mut s);
        s.is_empty()
    }

    /// Replaces every free recursion variable `Y` by `<Y|E>`.
    pub fn close_with(&self, spec: &SpecRef) -> ProcTerm {
        match self {
            ProcTerm::RecVar(y) => ProcTerm::Rec(y.clone(), spec.clone()),
            _ => {
                let kids = self.children();
                if kids.is_empty() {
                    self.clone()
                } else {
                    self.with_children(kids.into_iter().map(|k| k.close_with(spec)).collect())
                }
            }
        }
    }

    /// Flexible variables whose value the term reads under the ambient evaluation
    /// map: occurrences in conditions and action data outside any evaluation operator.
    pub fn free_reads(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_reads(&mut out);
        out
    }

    fn collect_reads(&self, out: &mut BTreeSet<String>) {
        match self {
            ProcTerm::Act(a) => a.collect_flex(out),
            ProcTerm::Guard(c, t) => {
                c.collect_flex(out);
                t.collect_reads(out);
            }
            ProcTerm::Eval(..) => {}
            ProcTerm::Rec(_, spec) => out.extend(spec.reads().iter().cloned()),
            _ => self.children().into_iter().for_each(|c| c.collect_reads(out)),
        }
    }

    pub fn has_free_reads(&self) -> bool {
        match self {
            ProcTerm::Act(a) => a.has_flex(),
            ProcTerm::Guard(c, t) => !c.flex_vars().is_empty() || t.has_free_reads(),
            ProcTerm::Eval(..) => false,
            ProcTerm::Rec(_, spec) => !spec.reads().is_empty(),
            _ => self.children().into_iter().any(ProcTerm::has_free_reads),
        }
    }

    /// Every flexible variable occurring anywhere, including assignment targets.
    pub fn occurring_flex(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.visit_all(&mut |t| match t {
            ProcTerm::Act(a) => {
                a.collect_flex(&mut out);
                if let Action::Assign(v, _) = a {
                    out.insert(v.clone());
                }
            }
            ProcTerm::Guard(c, _) => c.collect_flex(&mut out),
            _ => {}
        });
        out
    }

    /// Every atomic action term occurring anywhere (tau excluded).
    pub fn occurring_actions(&self) -> BTreeSet<Action> {
        let mut out = BTreeSet::new();
        self.visit_all(&mut |t| {
            if let ProcTerm::Act(a) = t {
                if !a.is_tau() {
                    out.insert(a.clone());
                }
            }
        });
        out
    }

    /// Pre-order visit of every node, descending into recursion constants once per spec.
    pub fn visit_all(&self, f: &mut dyn FnMut(&ProcTerm)) {
        let mut seen: Vec<SpecRef> = Vec::new();
        fn go(t: &ProcTerm, f: &mut dyn FnMut(&ProcTerm), seen: &mut Vec<SpecRef>) {
            f(t);
            if let ProcTerm::Rec(_, spec) = t {
                if !seen.contains(spec) {
                    seen.push(spec.clone());
                    for (_, rhs) in spec.equations() {
                        go(rhs, f, seen);
                    }
                }
            }
            for c in t.children() {
                go(c, f, seen);
            }
        }
        go(self, f, &mut seen);
    }

    pub fn conditions(&self) -> Vec<Condition> {
        let mut out = Vec::new();
        self.visit_all(&mut |t| {
            if let ProcTerm::Guard(c, _) = t {
                out.push(c.clone());
            }
        });
        out
    }

    pub fn contains_abstraction(&self) -> bool {
        let mut found = false;
        self.visit_all(&mut |t| found |= matches!(t, ProcTerm::Abstr(..)));
        found
    }
}

/// A linear summand in decomposed form.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Summand {
    Exit(Condition),
    Prefix(Condition, Action, String),
}

impl Summand {
    pub fn to_term(&self) -> ProcTerm {
        match self {
            Summand::Exit(c) => ProcTerm::exit_summand(c.clone()),
            Summand::Prefix(c, a, x) => ProcTerm::prefix_summand(c.clone(), a.clone(), x),
        }
    }

    pub fn from_term(t: &ProcTerm) -> Option<Summand> {
        match t {
            ProcTerm::Guard(c, body) => match &**body {
                ProcTerm::Eps => Some(Summand::Exit(c.clone())),
                ProcTerm::Seq(a, x) => match (&**a, &**x) {
                    (ProcTerm::Act(a), ProcTerm::RecVar(x)) => Some(Summand::Prefix(c.clone(), a.clone(), x.clone())),
                    _ => None,
                },
                _ => None,
            },
            _ => None,
        }
    }

    pub fn condition(&self) -> &Condition {
        match self {
            Summand::Exit(c) | Summand::Prefix(c, _, _) => c,
        }
    }

    pub fn target(&self) -> Option<&str> {
        match self {
            Summand::Prefix(_, _, x) => Some(x),
            Summand::Exit(_) => None,
        }
    }
}

/// Flattens a linear term into its summands, left to right; `delta` has none.
pub fn summands(t: &ProcTerm) -> Result<Vec<ProcTerm>> {
    Ok(linear_summands(t)?.iter().map(Summand::to_term).collect())
}

/// Like [`summands`] but decomposed.
pub fn linear_summands(t: &ProcTerm) -> Result<Vec<Summand>> {
    fn go(t: &ProcTerm, out: &mut Vec<Summand>) -> Result<()> {
        match t {
            ProcTerm::Delta => Ok(()),
            ProcTerm::Alt(l, r) => {
                go(l, out)?;
                go(r, out)
            }
            other => match Summand::from_term(other) {
                Some(s) => {
                    out.push(s);
                    Ok(())
                }
                None => Err(Error::Shape(format!("`{other}` is not a linear summand"))),
            },
        }
    }
    let mut out = Vec::new();
    go(t, &mut out)?;
    Ok(out)
}

pub fn is_linear(t: &ProcTerm) -> bool {
    linear_summands(t).is_ok()
}

/// Unguarded edges of a linear specification: `X -> Y` for every `phi :-> tau . Y` in X's equation.
fn unguarded_edges(spec: &RecSpec) -> Result<BTreeMap<String, Vec<String>>> {
    let mut edges = BTreeMap::new();
    for (x, rhs) in spec.equations() {
        let targets = linear_summands(rhs)?
            .into_iter()
            .filter_map(|s| match s {
                Summand::Prefix(_, Action::Tau, y) => Some(y),
                _ => None,
            })
            .collect();
        edges.insert(x.clone(), targets);
    }
    Ok(edges)
}

/// Finds a cycle through unguarded (tau-prefixed) occurrences, if any.
pub fn unguarded_cycle(spec: &RecSpec) -> Result<Option<Vec<String>>> {
    let edges = unguarded_edges(spec)?;
    // 0 = new, 1 = on stack, 2 = done
    let mut state: HashMap<&str, u8> = HashMap::new();
    fn dfs<'a>(
        x: &'a str,
        edges: &'a BTreeMap<String, Vec<String>>,
        state: &mut HashMap<&'a str, u8>,
        stack: &mut Vec<&'a str>,
    ) -> Option<Vec<String>> {
        state.insert(x, 1);
        stack.push(x);
        for y in edges.get(x).into_iter().flatten() {
            match state.get(y.as_str()).copied().unwrap_or(0) {
                1 => {
                    let start = stack.iter().position(|s| *s == y).unwrap();
                    return Some(stack[start..].iter().map(|s| s.to_string()).collect());
                }
                0 => {
                    if let Some(c) = dfs(y, edges, state, stack) {
                        return Some(c);
                    }
                }
                _ => {}
            }
        }
        stack.pop();
        state.insert(x, 2);
        None
    }
    for x in edges.keys() {
        if state.get(x.as_str()).copied().unwrap_or(0) == 0 {
            if let Some(c) = dfs(x, &edges, &mut state, &mut Vec::new()) {
                return Ok(Some(c));
            }
        }
    }
    Ok(None)
}

/// Linear right-hand sides and no infinite chain of unguarded occurrences.
pub fn is_guarded_linear_spec(spec: &RecSpec) -> bool {
    matches!(unguarded_cycle(spec), Ok(None))
}

/// `Y` with `X ->*_E Y`.
pub fn reachable(spec: &RecSpec, x: &str) -> Result<BTreeSet<String>> {
    if !spec.contains(x) {
        return Err(Error::UnknownVariable(x.to_string()));
    }
    let mut seen = BTreeSet::new();
    let mut stack = vec![x.to_string()];
    while let Some(y) = stack.pop() {
        if !seen.insert(y.clone()) {
            continue;
        }
        let mut next = BTreeSet::new();
        spec.rhs(&y).expect("closed spec").collect_recvars(&mut next);
        stack.extend(next.into_iter().filter(|z| !seen.contains(z)));
    }
    Ok(seen)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Classification {
    pub abstraction_free: bool,
    pub bool_conditional: bool,
    pub closed: bool,
}

pub fn classify(t: &ProcTerm, carrier: &Carrier, bound: usize) -> Result<Classification> {
    let mut bool_conditional = true;
    for c in t.conditions() {
        let trivial = valid_own(&c, carrier, bound)? || !satisfiable_own(&c, carrier, bound)?;
        if !trivial {
            bool_conditional = false;
            break;
        }
    }
    Ok(Classification {
        abstraction_free: !t.contains_abstraction(),
        bool_conditional,
        closed: t.is_closed(),
    })
}

/// The communication function on basic action names, extended with delta where undefined.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct CommFunction {
    table: BTreeMap<(String, String), String>,
}

impl CommFunction {
    /// Builds the symmetric closure of the given entries and validates associativity.
    pub fn new<I, S>(entries: I) -> Result<Self>
    where
        I: IntoIterator<Item = (S, S, S)>,
        S: Into<String>,
    {
        let mut table: BTreeMap<(String, String), String> = BTreeMap::new();
        for (a, b, c) in entries {
            let (a, b, c) = (a.into(), b.into(), c.into());
            for key in [(a.clone(), b.clone()), (b.clone(), a.clone())] {
                if let Some(prev) = table.get(&key) {
                    if *prev != c {
                        return Err(Error::Declaration(format!(
                            "communication of {} and {} defined as both {prev} and {c}",
                            key.0, key.1
                        )));
                    }
                }
                table.insert(key, c.clone());
            }
        }
        let f = CommFunction { table };
        f.check_associative()?;
        Ok(f)
    }

    pub fn apply(&self, a: &str, b: &str) -> Option<&str> {
        self.table.get(&(a.to_string(), b.to_string())).map(String::as_str)
    }

    pub fn is_empty(&self) -> bool {
        self.table.is_empty()
    }

    /// Entries with `a <= b`, for rendering.
    pub fn entries(&self) -> impl Iterator<Item = (&str, &str, &str)> {
        self.table
            .iter()
            .filter(|((a, b), _)| a <= b)
            .map(|((a, b), c)| (a.as_str(), b.as_str(), c.as_str()))
    }

    fn names(&self) -> BTreeSet<&str> {
        self.table
            .iter()
            .flat_map(|((a, b), c)| [a.as_str(), b.as_str(), c.as_str()])
            .collect()
    }

    fn check_associative(&self) -> Result<()> {
        let names: Vec<&str> = self.names().into_iter().collect();
        let ext = |x: Option<&str>, y: &str| x.and_then(|x| self.apply(x, y));
        for a in &names {
            for b in &names {
                for c in &names {
                    let left = ext(self.apply(a, b), c);
                    let right = self.apply(b, c).and_then(|bc| self.apply(a, bc));
                    if left != right {
                        return Err(Error::Declaration(format!(
                            "communication function is not associative on ({a}, {b}, {c})"
                        )));
                    }
                }
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::DEFAULT_ENUMERATION_BOUND as B;

    fn spec(eqs: Vec<(&str, ProcTerm)>) -> RecSpec {
        RecSpec::new(eqs.into_iter().map(|(x, t)| (x.to_string(), t)).collect()).unwrap()
    }

    fn pre(a: &str, x: &str) -> ProcTerm {
        ProcTerm::prefix_summand(Condition::True, Action::basic(a), x)
    }

    #[test]
    fn summand_flattening() {
        assert!(summands(&ProcTerm::Delta).unwrap().is_empty());
        let e = ProcTerm::exit_summand(Condition::True);
        assert_eq!(summands(&e).unwrap(), vec![e.clone()]);
        let t = ProcTerm::alt(pre("a", "X"), ProcTerm::exit_summand(Condition::False));
        assert_eq!(summands(&t).unwrap().len(), 2);
        let bad = ProcTerm::seq(ProcTerm::basic("a"), ProcTerm::basic("b"));
        assert!(matches!(summands(&bad), Err(Error::Shape(_))));
    }

    #[test]
    fn linearity() {
        assert!(is_linear(&ProcTerm::Delta));
        assert!(is_linear(&ProcTerm::alt(pre("a", "X"), ProcTerm::exit_summand(Condition::False))));
        assert!(!is_linear(&ProcTerm::seq(ProcTerm::basic("a"), ProcTerm::basic("b"))));
    }

    #[test]
    fn guardedness() {
        assert!(is_guarded_linear_spec(&spec(vec![("X", pre("a", "X"))])));
        let tau_loop = spec(vec![(
            "X",
            ProcTerm::prefix_summand(Condition::True, Action::Tau, "X"),
        )]);
        assert!(!is_guarded_linear_spec(&tau_loop));
        assert_eq!(unguarded_cycle(&tau_loop).unwrap(), Some(vec!["X".to_string()]));
        assert!(is_guarded_linear_spec(&spec(vec![
            ("X", pre("a", "Y")),
            ("Y", ProcTerm::exit_summand(Condition::True)),
        ])));
    }

    #[test]
    fn reachability() {
        let e = spec(vec![("X", pre("a", "X"))]);
        assert_eq!(reachable(&e, "X").unwrap(), BTreeSet::from(["X".to_string()]));
        let e = spec(vec![
            ("X", ProcTerm::exit_summand(Condition::True)),
            ("Y", pre("a", "X")),
        ]);
        assert_eq!(reachable(&e, "X").unwrap(), BTreeSet::from(["X".to_string()]));
        assert_eq!(reachable(&e, "Y").unwrap().len(), 2);
        assert!(reachable(&e, "Z").is_err());
    }

    #[test]
    fn classification() {
        let c = Carrier::new(-4, 3).unwrap();
        let t = ProcTerm::abstr(ActionSet::names(["a"]), ProcTerm::basic("a"));
        assert!(!classify(&t, &c, B).unwrap().abstraction_free);
        let v = DataTerm::flex("v");
        let t = ProcTerm::guard(Condition::eq(v.clone(), v.clone()), ProcTerm::basic("a"));
        assert!(classify(&t, &c, B).unwrap().bool_conditional);
        let t = ProcTerm::guard(Condition::eq(v, DataTerm::Lit(0)), ProcTerm::basic("a"));
        let k = classify(&t, &c, B).unwrap();
        assert!(!k.bool_conditional);
        assert!(k.closed);
        assert!(!classify(&ProcTerm::RecVar("X".into()), &c, B).unwrap().closed);
    }

    #[test]
    fn comm_function_validation() {
        let g = CommFunction::new([("a", "b", "c")]).unwrap();
        assert_eq!(g.apply("b", "a"), Some("c"));
        assert_eq!(g.apply("a", "a"), None);
        assert!(CommFunction::new([("a", "b", "c"), ("b", "a", "d")]).is_err());
        // (a|a)|b = c|b = d but a|(a|b) = a|c is undefined
        assert!(CommFunction::new([("a", "a", "c"), ("c", "b", "d")]).is_err());
    }

    #[test]
    fn patterns() {
        let h = ActionSet::names(["a"]);
        assert!(h.contains(&Action::basic("a")));
        assert!(h.contains(&Action::Param("a".into(), vec![DataTerm::Lit(1)])));
        assert!(!h.contains(&Action::Tau));
        let p = ActionPattern::NameArity("a".into(), 0);
        assert!(!p.matches(&Action::Param("a".into(), vec![DataTerm::Lit(1)])));
        assert!(ActionPattern::Assign("h".into()).matches(&Action::Assign("h".into(), DataTerm::Lit(0))));
        assert!(ActionSet::all().contains(&Action::Assign("h".into(), DataTerm::Lit(0))));
    }

    #[test]
    fn free_reads_skip_evaluation_operator() {
        let u = DataTerm::flex("u");
        let inner = ProcTerm::Act(Action::Param("a".into(), vec![u.clone()]));
        assert_eq!(inner.free_reads(), BTreeSet::from(["u".to_string()]));
        let t = ProcTerm::eval(EvalMap::from_pairs([("u", 1)]), inner);
        assert!(t.free_reads().is_empty());
        let asg = ProcTerm::Act(Action::Assign("w".into(), DataTerm::Lit(1)));
        assert!(asg.free_reads().is_empty());
        assert!(asg.occurring_flex().contains("w"));
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn arb_summand() -> impl Strategy<Value = ProcTerm> {
            prop_oneof![
                prop_oneof![Just(Condition::True), Just(Condition::False)].prop_map(ProcTerm::exit_summand),
                (prop_oneof![Just("a"), Just("b"), Just("tau")], prop_oneof![Just("X"), Just("Y")]).prop_map(
                    |(a, x)| {
                        let act = if a == "tau" { Action::Tau } else { Action::basic(a) };
                        ProcTerm::prefix_summand(Condition::True, act, x)
                    }
                ),
            ]
        }

        fn arb_linear() -> impl Strategy<Value = ProcTerm> {
            let leaf = prop_oneof![Just(ProcTerm::Delta), arb_summand()];
            leaf.prop_recursive(3, 12, 2, |inner| (inner.clone(), inner).prop_map(|(l, r)| ProcTerm::alt(l, r)))
        }

        proptest! {
            #[test]
            fn summands_reassemble(t in arb_linear()) {
                let parts = summands(&t).unwrap();
                let back = ProcTerm::sum(parts.clone());
                prop_assert!(is_linear(&back));
                prop_assert_eq!(summands(&back).unwrap(), parts);
            }

            #[test]
            fn reachable_within_vars(x in arb_linear(), y in arb_linear()) {
                let e = RecSpec::new(vec![("X".into(), x.clone()), ("Y".into(), y.clone())]).unwrap();
                for v in ["X", "Y"] {
                    let r = reachable(&e, v).unwrap();
                    prop_assert!(r.iter().all(|z| e.contains(z)));
                    let bigger = RecSpec::new(vec![
                        ("X".into(), x.clone()), ("Y".into(), y.clone()),
                        ("Z".into(), ProcTerm::prefix_summand(Condition::True, Action::basic("a"), "X")),
                    ]).unwrap();
                    prop_assert!(r.is_subset(&reachable(&bigger, v).unwrap()));
                }
            }
        }
    }
}
