//! The finite data algebra: an integer interval with saturating arithmetic,
//! flexible variables and evaluation maps.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default bound on the number of evaluation maps any single enumeration may produce.
pub const DEFAULT_ENUMERATION_BOUND: usize = 1 << 20;

/// The carrier `[lo, hi]` of the data algebra.
///
/// Every value is denoted by a literal, so the algebra is minimal.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Carrier {
    pub lo: i64,
    pub hi: i64,
}

impl Default for Carrier {
    fn default() -> Self {
        Carrier { lo: -16, hi: 15 }
    }
}

impl Carrier {
    pub fn new(lo: i64, hi: i64) -> Result<Self> {
        if lo > hi {
            return Err(Error::Declaration(format!("empty carrier {lo}..{hi}")));
        }
        Ok(Carrier { lo, hi })
    }

    pub fn size(&self) -> u128 {
        (self.hi - self.lo + 1) as u128
    }

    pub fn contains(&self, v: i64) -> bool {
        self.lo <= v && v <= self.hi
    }

    pub fn saturate(&self, v: i128) -> i64 {
        v.clamp(self.lo as i128, self.hi as i128) as i64
    }

    pub fn values(&self) -> impl Iterator<Item = i64> + Clone {
        self.lo..=self.hi
    }

    /// Value given to declared variables that a named map leaves unspecified.
    pub fn default_value(&self) -> i64 {
        if self.contains(0) {
            0
        } else {
            self.lo
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
}

impl BinOp {
    pub fn symbol(self) -> &'static str {
        match self {
            BinOp::Add => "+",
            BinOp::Sub => "-",
            BinOp::Mul => "*",
        }
    }
}

/// Terms of sort data.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum DataTerm {
    Lit(i64),
    /// A flexible (program) variable.
    Flex(String),
    /// A data variable; only legal under a quantifier.
    Var(String),
    Bin(BinOp, Box<DataTerm>, Box<DataTerm>),
}

impl DataTerm {
    pub fn flex(name: &str) -> Self {
        DataTerm::Flex(name.to_string())
    }

    pub fn bin(op: BinOp, l: DataTerm, r: DataTerm) -> Self {
        DataTerm::Bin(op, Box::new(l), Box::new(r))
    }

    pub fn collect_flex(&self, out: &mut BTreeSet<String>) {
        match self {
            DataTerm::Flex(v) => {
                out.insert(v.clone());
            }
            DataTerm::Bin(_, l, r) => {
                l.collect_flex(out);
                r.collect_flex(out);
            }
            DataTerm::Lit(_) | DataTerm::Var(_) => {}
        }
    }

    pub fn has_flex(&self) -> bool {
        match self {
            DataTerm::Flex(_) => true,
            DataTerm::Bin(_, l, r) => l.has_flex() || r.has_flex(),
            _ => false,
        }
    }

    pub fn has_var(&self) -> bool {
        match self {
            DataTerm::Var(_) => true,
            DataTerm::Bin(_, l, r) => l.has_var() || r.has_var(),
            _ => false,
        }
    }

    /// Folds the term to a literal when it mentions no variables at all.
    pub fn fold_closed(&self, carrier: &Carrier) -> DataTerm {
        if self.has_flex() || self.has_var() {
            match self {
                DataTerm::Bin(op, l, r) => {
                    DataTerm::bin(*op, l.fold_closed(carrier), r.fold_closed(carrier))
                }
                other => other.clone(),
            }
        } else {
            DataTerm::Lit(
                eval_with(self, &EvalMap::default(), &[], carrier)
                    .expect("closed data term evaluates"),
            )
        }
    }

    /// Replaces every flexible variable by its value under `sigma`.
    pub fn substitute(&self, sigma: &EvalMap, carrier: &Carrier) -> Result<DataTerm> {
        match self {
            DataTerm::Flex(v) => sigma
                .get(v)
                .map(DataTerm::Lit)
                .ok_or_else(|| Error::Declaration(format!("flexible variable `{v}` is not declared"))),
            DataTerm::Bin(op, l, r) => {
                let t = DataTerm::bin(*op, l.substitute(sigma, carrier)?, r.substitute(sigma, carrier)?);
                Ok(t.fold_closed(carrier))
            }
            other => Ok(other.clone()),
        }
    }
}

impl fmt::Display for DataTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fn prec(op: BinOp) -> u8 {
            match op {
                BinOp::Add | BinOp::Sub => 1,
                BinOp::Mul => 2,
            }
        }
        fn go(t: &DataTerm, f: &mut fmt::Formatter<'_>, ctx: u8, right: bool) -> fmt::Result {
            match t {
                DataTerm::Lit(v) => write!(f, "{v}"),
                DataTerm::Flex(v) | DataTerm::Var(v) => write!(f, "{v}"),
                DataTerm::Bin(op, l, r) => {
                    let p = prec(*op);
                    let paren = p < ctx || (p == ctx && right);
                    if paren {
                        write!(f, "(")?;
                    }
                    go(l, f, p, false)?;
                    write!(f, " {} ", op.symbol())?;
                    go(r, f, p, true)?;
                    if paren {
                        write!(f, ")")?;
                    }
                    Ok(())
                }
            }
        }
        go(self, f, 0, false)
    }
}

/// An evaluation map, total on the declared flexible variables.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct EvalMap(BTreeMap<String, i64>);

impl EvalMap {
    pub fn new() -> Self {
        EvalMap(BTreeMap::new())
    }

    pub fn from_pairs<I, S>(pairs: I) -> Self
    where
        I: IntoIterator<Item = (S, i64)>,
        S: Into<String>,
    {
        EvalMap(pairs.into_iter().map(|(k, v)| (k.into(), v)).collect())
    }

    pub fn get(&self, v: &str) -> Option<i64> {
        self.0.get(v).copied()
    }

    pub fn contains(&self, v: &str) -> bool {
        self.0.contains_key(v)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, i64)> {
        self.0.iter().map(|(k, v)| (k.as_str(), *v))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn insert(&mut self, v: &str, d: i64) {
        self.0.insert(v.to_string(), d);
    }

    /// Restriction of the map to the given variables.
    pub fn restrict<'a>(&self, vars: impl IntoIterator<Item = &'a String>) -> EvalMap {
        EvalMap(
            vars.into_iter()
                .filter_map(|v| self.0.get(v).map(|d| (v.clone(), *d)))
                .collect(),
        )
    }

    /// Whether two maps agree on every variable in `vars`.
    pub fn agrees_on<'a>(&self, other: &EvalMap, vars: impl IntoIterator<Item = &'a String>) -> bool {
        vars.into_iter().all(|v| self.get(v) == other.get(v))
    }
}

impl fmt::Display for EvalMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, (k, v)) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{k}={v}")?;
        }
        write!(f, "}}")
    }
}

/// The ordered, duplicate-free set of declared flexible variables.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct VarDecl {
    names: Vec<String>,
}

impl VarDecl {
    pub fn new<I, S>(names: I) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let mut out: Vec<String> = Vec::new();
        for n in names {
            let n = n.into();
            if out.contains(&n) {
                return Err(Error::Declaration(format!("flexible variable `{n}` declared twice")));
            }
            out.push(n);
        }
        Ok(VarDecl { names: out })
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn contains(&self, v: &str) -> bool {
        self.names.iter().any(|n| n == v)
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    /// Sub-declaration containing only the given names, in declaration order.
    pub fn restrict(&self, keep: &BTreeSet<String>) -> VarDecl {
        VarDecl {
            names: self.names.iter().filter(|n| keep.contains(*n)).cloned().collect(),
        }
    }

    /// Union preserving the order of `self` first.
    pub fn union(&self, other: &VarDecl) -> VarDecl {
        let mut names = self.names.clone();
        for n in &other.names {
            if !names.contains(n) {
                names.push(n.clone());
            }
        }
        VarDecl { names }
    }

    /// Completes a partial map to a total one over the declaration.
    pub fn complete(&self, partial: &EvalMap, carrier: &Carrier) -> Result<EvalMap> {
        for (k, v) in partial.iter() {
            if !self.contains(k) {
                return Err(Error::Declaration(format!("flexible variable `{k}` is not declared")));
            }
            if !carrier.contains(v) {
                return Err(Error::Declaration(format!(
                    "value {v} for `{k}` lies outside the carrier {}..{}",
                    carrier.lo, carrier.hi
                )));
            }
        }
        Ok(EvalMap(
            self.names
                .iter()
                .map(|n| (n.clone(), partial.get(n).unwrap_or(carrier.default_value())))
                .collect(),
        ))
    }
}

/// Evaluates a data term under `sigma` with data variables bound by `env`.
pub fn eval_with(e: &DataTerm, sigma: &EvalMap, env: &[(&str, i64)], carrier: &Carrier) -> Result<i64> {
    match e {
        DataTerm::Lit(v) => Ok(carrier.saturate(*v as i128)),
        DataTerm::Flex(v) => sigma
            .get(v)
            .ok_or_else(|| Error::Declaration(format!("flexible variable `{v}` is not declared"))),
        DataTerm::Var(x) => env
            .iter()
            .rev()
            .find(|(n, _)| n == x)
            .map(|(_, d)| *d)
            .ok_or_else(|| Error::MalformedCondition(format!("free data variable `{x}`"))),
        DataTerm::Bin(op, l, r) => {
            let a = eval_with(l, sigma, env, carrier)? as i128;
            let b = eval_with(r, sigma, env, carrier)? as i128;
            let v = match op {
                BinOp::Add => a + b,
                BinOp::Sub => a - b,
                BinOp::Mul => a * b,
            };
            Ok(carrier.saturate(v))
        }
    }
}

/// Value of `e` under `sigma`; arithmetic saturates at the carrier bounds.
pub fn eval_data(e: &DataTerm, sigma: &EvalMap, carrier: &Carrier) -> Result<i64> {
    if e.has_var() {
        return Err(Error::MalformedCondition(format!("data term `{e}` contains a bound data variable")));
    }
    eval_with(e, sigma, &[], carrier)
}

/// `sigma` with `v` remapped to `d`.
pub fn update_map(sigma: &EvalMap, v: &str, d: i64) -> Result<EvalMap> {
    if !sigma.contains(v) {
        return Err(Error::Declaration(format!("flexible variable `{v}` is not declared")));
    }
    let mut out = sigma.clone();
    out.insert(v, d);
    Ok(out)
}

/// Every total map over `decl`, lexicographic in (variable order, value order).
pub fn enumerate_maps(decl: &VarDecl, carrier: &Carrier, bound: usize) -> Result<Vec<EvalMap>> {
    let count = carrier
        .size()
        .checked_pow(decl.len() as u32)
        .unwrap_or(u128::MAX);
    if count > bound as u128 {
        return Err(Error::EnumerationLimit { count, bound });
    }
    let mut out = Vec::with_capacity(count as usize);
    let n = decl.len();
    let mut digits = vec![carrier.lo; n];
    loop {
        out.push(EvalMap(
            decl.names().iter().cloned().zip(digits.iter().copied()).collect(),
        ));
        // odometer, last variable fastest
        let mut i = n;
        loop {
            if i == 0 {
                return Ok(out);
            }
            i -= 1;
            if digits[i] < carrier.hi {
                digits[i] += 1;
                for d in digits.iter_mut().skip(i + 1) {
                    *d = carrier.lo;
                }
                break;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sigma_11_3() -> EvalMap {
        EvalMap::from_pairs([("i", 11), ("j", 3), ("d", 0)])
    }

    #[test]
    fn eval_flexible_variable() {
        let c = Carrier::default();
        assert_eq!(eval_data(&DataTerm::flex("i"), &sigma_11_3(), &c).unwrap(), 11);
        assert_eq!(eval_data(&DataTerm::Lit(5), &sigma_11_3(), &c).unwrap(), 5);
        let diff = DataTerm::bin(BinOp::Sub, DataTerm::flex("i"), DataTerm::flex("j"));
        assert_eq!(eval_data(&diff, &sigma_11_3(), &c).unwrap(), 8);
    }

    #[test]
    fn eval_saturates() {
        let c = Carrier::new(-4, 3).unwrap();
        let s = EvalMap::from_pairs([("v", 3)]);
        let t = DataTerm::bin(BinOp::Mul, DataTerm::flex("v"), DataTerm::Lit(3));
        assert_eq!(eval_data(&t, &s, &c).unwrap(), 3);
        let t = DataTerm::bin(BinOp::Sub, DataTerm::Lit(-4), DataTerm::flex("v"));
        assert_eq!(eval_data(&t, &s, &c).unwrap(), -4);
    }

    #[test]
    fn undeclared_variable_is_an_error() {
        let c = Carrier::default();
        let err = eval_data(&DataTerm::flex("zz"), &sigma_11_3(), &c).unwrap_err();
        assert!(matches!(err, Error::Declaration(_)));
        assert!(update_map(&sigma_11_3(), "zz", 1).is_err());
    }

    #[test]
    fn update_is_pointwise() {
        let s = sigma_11_3();
        let u = update_map(&s, "j", 7).unwrap();
        assert_eq!(u.get("i"), Some(11));
        assert_eq!(u.get("j"), Some(7));
        assert_eq!(update_map(&s, "j", s.get("j").unwrap()).unwrap(), s);
        assert_eq!(update_map(&s, "d", 11).unwrap().get("d"), Some(11));
    }

    #[test]
    fn enumeration_order_and_size() {
        let c = Carrier::new(0, 1).unwrap();
        let one = enumerate_maps(&VarDecl::new(["v"]).unwrap(), &c, 100).unwrap();
        assert_eq!(
            one,
            vec![EvalMap::from_pairs([("v", 0)]), EvalMap::from_pairs([("v", 1)])]
        );
        let none = enumerate_maps(&VarDecl::default(), &c, 100).unwrap();
        assert_eq!(none, vec![EvalMap::new()]);
        let two = enumerate_maps(&VarDecl::new(["u", "v"]).unwrap(), &c, 100).unwrap();
        assert_eq!(two.len(), 4);
        assert_eq!(two[0], EvalMap::from_pairs([("u", 0), ("v", 0)]));
        assert_eq!(two[1], EvalMap::from_pairs([("u", 0), ("v", 1)]));
    }

    #[test]
    fn enumeration_bound_reports_count() {
        let c = Carrier::new(0, 9).unwrap();
        let err = enumerate_maps(&VarDecl::new(["a", "b", "c"]).unwrap(), &c, 999).unwrap_err();
        assert_eq!(err, Error::EnumerationLimit { count: 1000, bound: 999 });
    }

    #[test]
    fn duplicate_declaration_rejected() {
        assert!(VarDecl::new(["x", "x"]).is_err());
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn arb_term() -> impl Strategy<Value = DataTerm> {
            let leaf = prop_oneof![
                (-4i64..=3).prop_map(DataTerm::Lit),
                prop_oneof![Just("u"), Just("v")].prop_map(DataTerm::flex),
            ];
            leaf.prop_recursive(3, 16, 2, |inner| {
                (prop_oneof![Just(BinOp::Add), Just(BinOp::Sub), Just(BinOp::Mul)], inner.clone(), inner)
                    .prop_map(|(o, l, r)| DataTerm::bin(o, l, r))
            })
        }

        proptest! {
            #[test]
            fn update_then_eval(u in -4i64..=3, v in -4i64..=3, d in -4i64..=3) {
                let c = Carrier::new(-4, 3).unwrap();
                let s = EvalMap::from_pairs([("u", u), ("v", v)]);
                let s2 = update_map(&s, "v", d).unwrap();
                prop_assert_eq!(eval_data(&DataTerm::flex("v"), &s2, &c).unwrap(), d);
                prop_assert_eq!(eval_data(&DataTerm::flex("u"), &s2, &c).unwrap(), u);
            }

            #[test]
            fn eval_in_carrier_and_deterministic(t in arb_term(), u in -4i64..=3, v in -4i64..=3) {
                let c = Carrier::new(-4, 3).unwrap();
                let s = EvalMap::from_pairs([("u", u), ("v", v)]);
                let a = eval_data(&t, &s, &c).unwrap();
                prop_assert!(c.contains(a));
                prop_assert_eq!(a, eval_data(&t, &s, &c).unwrap());
                let sub = t.substitute(&s, &c).unwrap();
                prop_assert_eq!(sub, DataTerm::Lit(a));
            }
        }
    }
}
