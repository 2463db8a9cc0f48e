//! Conditions over the data algebra and their decision by enumeration.

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::data::{enumerate_maps, eval_with, Carrier, DataTerm, EvalMap, VarDecl};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum RelOp {
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
}

impl RelOp {
    pub fn symbol(self) -> &'static str {
        match self {
            RelOp::Eq => "=",
            RelOp::Ne => "!=",
            RelOp::Lt => "<",
            RelOp::Le => "<=",
            RelOp::Gt => ">",
            RelOp::Ge => ">=",
        }
    }

    fn holds(self, a: i64, b: i64) -> bool {
        match self {
            RelOp::Eq => a == b,
            RelOp::Ne => a != b,
            RelOp::Lt => a < b,
            RelOp::Le => a <= b,
            RelOp::Gt => a > b,
            RelOp::Ge => a >= b,
        }
    }
}

/// Terms of sort condition. Flexible variables occur free; data variables
/// must be bound by a quantifier.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Condition {
    True,
    False,
    /// Equality and the derived order predicates of the integer carrier.
    Rel(RelOp, DataTerm, DataTerm),
    Not(Box<Condition>),
    And(Box<Condition>, Box<Condition>),
    Or(Box<Condition>, Box<Condition>),
    Implies(Box<Condition>, Box<Condition>),
    Forall(String, Box<Condition>),
    Exists(String, Box<Condition>),
}

impl Condition {
    pub fn eq(l: DataTerm, r: DataTerm) -> Self {
        Condition::Rel(RelOp::Eq, l, r)
    }

    pub fn rel(op: RelOp, l: DataTerm, r: DataTerm) -> Self {
        Condition::Rel(op, l, r)
    }

    pub fn not(c: Condition) -> Self {
        Condition::Not(Box::new(c))
    }

    pub fn and(l: Condition, r: Condition) -> Self {
        Condition::And(Box::new(l), Box::new(r))
    }

    pub fn or(l: Condition, r: Condition) -> Self {
        Condition::Or(Box::new(l), Box::new(r))
    }

    pub fn implies(l: Condition, r: Condition) -> Self {
        Condition::Implies(Box::new(l), Box::new(r))
    }

    pub fn iff(l: Condition, r: Condition) -> Self {
        Condition::and(Condition::implies(l.clone(), r.clone()), Condition::implies(r, l))
    }

    /// Left-nested disjunction; the empty disjunction is `false`.
    pub fn or_all(items: impl IntoIterator<Item = Condition>) -> Condition {
        items
            .into_iter()
            .reduce(Condition::or)
            .unwrap_or(Condition::False)
    }

    pub fn collect_flex(&self, out: &mut BTreeSet<String>) {
        match self {
            Condition::True | Condition::False => {}
            Condition::Rel(_, l, r) => {
                l.collect_flex(out);
                r.collect_flex(out);
            }
            Condition::Not(c) | Condition::Forall(_, c) | Condition::Exists(_, c) => c.collect_flex(out),
            Condition::And(l, r) | Condition::Or(l, r) | Condition::Implies(l, r) => {
                l.collect_flex(out);
                r.collect_flex(out);
            }
        }
    }

    pub fn flex_vars(&self) -> BTreeSet<String> {
        let mut s = BTreeSet::new();
        self.collect_flex(&mut s);
        s
    }

    /// Checks that every data variable is bound.
    pub fn check_bound(&self) -> Result<()> {
        fn go(c: &Condition, bound: &mut Vec<String>) -> Result<()> {
            let check_term = |t: &DataTerm, bound: &Vec<String>| -> Result<()> {
                fn free(t: &DataTerm, bound: &Vec<String>) -> Option<String> {
                    match t {
                        DataTerm::Var(x) if !bound.contains(x) => Some(x.clone()),
                        DataTerm::Bin(_, l, r) => free(l, bound).or_else(|| free(r, bound)),
                        _ => None,
                    }
                }
                match free(t, bound) {
                    Some(x) => Err(Error::MalformedCondition(format!("free data variable `{x}`"))),
                    None => Ok(()),
                }
            };
            match c {
                Condition::True | Condition::False => Ok(()),
                Condition::Rel(_, l, r) => {
                    check_term(l, bound)?;
                    check_term(r, bound)
                }
                Condition::Not(c) => go(c, bound),
                Condition::And(l, r) | Condition::Or(l, r) | Condition::Implies(l, r) => {
                    go(l, bound)?;
                    go(r, bound)
                }
                Condition::Forall(x, c) | Condition::Exists(x, c) => {
                    bound.push(x.clone());
                    let res = go(c, bound);
                    bound.pop();
                    res
                }
            }
        }
        go(self, &mut Vec::new())
    }

    /// `sigma(phi)`: every flexible variable replaced by its value.
    pub fn substitute(&self, sigma: &EvalMap, carrier: &Carrier) -> Result<Condition> {
        Ok(match self {
            Condition::True => Condition::True,
            Condition::False => Condition::False,
            Condition::Rel(op, l, r) => {
                Condition::Rel(*op, l.substitute(sigma, carrier)?, r.substitute(sigma, carrier)?)
            }
            Condition::Not(c) => Condition::not(c.substitute(sigma, carrier)?),
            Condition::And(l, r) => Condition::and(l.substitute(sigma, carrier)?, r.substitute(sigma, carrier)?),
            Condition::Or(l, r) => Condition::or(l.substitute(sigma, carrier)?, r.substitute(sigma, carrier)?),
            Condition::Implies(l, r) => {
                Condition::implies(l.substitute(sigma, carrier)?, r.substitute(sigma, carrier)?)
            }
            Condition::Forall(x, c) => Condition::Forall(x.clone(), Box::new(c.substitute(sigma, carrier)?)),
            Condition::Exists(x, c) => Condition::Exists(x.clone(), Box::new(c.substitute(sigma, carrier)?)),
        })
    }

    /// Splits nested conjunctions into their conjuncts.
    pub fn conjuncts(&self) -> Vec<Condition> {
        let mut out = Vec::new();
        fn go(c: &Condition, out: &mut Vec<Condition>) {
            match c {
                Condition::And(l, r) => {
                    go(l, out);
                    go(r, out);
                }
                other => out.push(other.clone()),
            }
        }
        go(self, &mut out);
        out
    }

    /// Canonical label form: flattened, sorted, duplicate-free conjunction with
    /// closed conjuncts decided. Semantically equivalent to the input.
    pub fn normalize(&self, carrier: &Carrier) -> Condition {
        let mut parts: Vec<Condition> = Vec::new();
        for c in self.conjuncts() {
            if c.flex_vars().is_empty() {
                match eval_cond(&c, &EvalMap::new(), carrier) {
                    Ok(true) => continue,
                    Ok(false) => return Condition::False,
                    Err(_) => {}
                }
            }
            parts.push(c);
        }
        parts.sort();
        parts.dedup();
        conj(parts)
    }
}

/// Right-nested conjunction; the empty conjunction is `true`.
pub fn conj(parts: Vec<Condition>) -> Condition {
    parts
        .into_iter()
        .rev()
        .reduce(|acc, c| Condition::and(c, acc))
        .unwrap_or(Condition::True)
}

impl fmt::Display for Condition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        // precedence: 1 implies (right), 2 or, 3 and, 4 not, 5 atom
        fn go(c: &Condition, f: &mut fmt::Formatter<'_>, ctx: u8) -> fmt::Result {
            let (p, body): (u8, Box<dyn Fn(&mut fmt::Formatter<'_>) -> fmt::Result + '_>) = match c {
                Condition::True => (5, Box::new(|f| write!(f, "true"))),
                Condition::False => (5, Box::new(|f| write!(f, "false"))),
                Condition::Rel(op, l, r) => (5, Box::new(move |f| write!(f, "{l} {} {r}", op.symbol()))),
                Condition::Not(x) => (4, Box::new(move |f| {
                    write!(f, "not ")?;
                    go(x, f, 4)
                })),
                Condition::And(l, r) => (3, Box::new(move |f| {
                    go(l, f, 3)?;
                    write!(f, " and ")?;
                    go(r, f, 4)
                })),
                Condition::Or(l, r) => (2, Box::new(move |f| {
                    go(l, f, 2)?;
                    write!(f, " or ")?;
                    go(r, f, 3)
                })),
                Condition::Implies(l, r) => (1, Box::new(move |f| {
                    go(l, f, 2)?;
                    write!(f, " -> ")?;
                    go(r, f, 1)
                })),
                Condition::Forall(x, b) => (0, Box::new(move |f| {
                    write!(f, "forall {x}. ")?;
                    go(b, f, 0)
                })),
                Condition::Exists(x, b) => (0, Box::new(move |f| {
                    write!(f, "exists {x}. ")?;
                    go(b, f, 0)
                })),
            };
            if p < ctx {
                write!(f, "(")?;
                body(f)?;
                write!(f, ")")
            } else {
                body(f)
            }
        }
        go(self, f, 0)
    }
}

fn eval_env(c: &Condition, sigma: &EvalMap, env: &mut Vec<(String, i64)>, carrier: &Carrier) -> Result<bool> {
    Ok(match c {
        Condition::True => true,
        Condition::False => false,
        Condition::Rel(op, l, r) => {
            let env_ref: Vec<(&str, i64)> = env.iter().map(|(n, v)| (n.as_str(), *v)).collect();
            let a = eval_with(l, sigma, &env_ref, carrier)?;
            let b = eval_with(r, sigma, &env_ref, carrier)?;
            op.holds(a, b)
        }
        Condition::Not(x) => !eval_env(x, sigma, env, carrier)?,
        Condition::And(l, r) => eval_env(l, sigma, env, carrier)? && eval_env(r, sigma, env, carrier)?,
        Condition::Or(l, r) => eval_env(l, sigma, env, carrier)? || eval_env(r, sigma, env, carrier)?,
        Condition::Implies(l, r) => !eval_env(l, sigma, env, carrier)? || eval_env(r, sigma, env, carrier)?,
        Condition::Forall(x, b) | Condition::Exists(x, b) => {
            let universal = matches!(c, Condition::Forall(..));
            let mut result = universal;
            for d in carrier.values() {
                env.push((x.clone(), d));
                let v = eval_env(b, sigma, env, carrier);
                env.pop();
                if v? != universal {
                    result = !universal;
                    break;
                }
            }
            result
        }
    })
}

/// Classical truth value of `phi` under `sigma`; quantifiers range over the carrier.
pub fn eval_cond(phi: &Condition, sigma: &EvalMap, carrier: &Carrier) -> Result<bool> {
    eval_env(phi, sigma, &mut Vec::new(), carrier)
}

/// Whether `phi <-> psi` holds under every map over `decl`.
pub fn valid_iff(phi: &Condition, psi: &Condition, decl: &VarDecl, carrier: &Carrier, bound: usize) -> Result<bool> {
    for sigma in enumerate_maps(decl, carrier, bound)? {
        if eval_cond(phi, &sigma, carrier)? != eval_cond(psi, &sigma, carrier)? {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Whether some map over `decl` makes `phi` true.
pub fn satisfiable(phi: &Condition, decl: &VarDecl, carrier: &Carrier, bound: usize) -> Result<bool> {
    for sigma in enumerate_maps(decl, carrier, bound)? {
        if eval_cond(phi, &sigma, carrier)? {
            return Ok(true);
        }
    }
    Ok(false)
}

/// Satisfiability over exactly the flexible variables that occur in `phi`.
pub fn satisfiable_own(phi: &Condition, carrier: &Carrier, bound: usize) -> Result<bool> {
    let vars = phi.flex_vars();
    let decl = VarDecl::new(vars).expect("set has no duplicates");
    satisfiable(phi, &decl, carrier, bound)
}

/// Validity over exactly the flexible variables that occur in `phi`.
pub fn valid_own(phi: &Condition, carrier: &Carrier, bound: usize) -> Result<bool> {
    Ok(!satisfiable_own(&Condition::not(phi.clone()), carrier, bound)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::DEFAULT_ENUMERATION_BOUND as B;

    fn v(n: &str) -> DataTerm {
        DataTerm::flex(n)
    }

    #[test]
    fn eval_examples() {
        let c = Carrier::default();
        let s = EvalMap::from_pairs([("d", 11), ("j", 3), ("i", 4)]);
        assert!(eval_cond(&Condition::rel(RelOp::Ge, v("d"), v("j")), &s, &c).unwrap());
        assert!(eval_cond(&Condition::True, &s, &c).unwrap());
        assert!(!eval_cond(&Condition::False, &s, &c).unwrap());
        let ex = Condition::Exists("x".into(), Box::new(Condition::eq(DataTerm::Var("x".into()), v("i"))));
        assert!(eval_cond(&ex, &s, &c).unwrap());
    }

    #[test]
    fn free_data_variable_is_malformed() {
        let c = Carrier::default();
        let bad = Condition::eq(DataTerm::Var("x".into()), DataTerm::Lit(0));
        assert!(matches!(
            eval_cond(&bad, &EvalMap::new(), &c),
            Err(Error::MalformedCondition(_))
        ));
        assert!(bad.check_bound().is_err());
    }

    #[test]
    fn validity_and_satisfiability() {
        let c = Carrier::new(-4, 3).unwrap();
        let d = VarDecl::new(["v"]).unwrap();
        let taut = Condition::or(
            Condition::rel(RelOp::Ge, v("v"), DataTerm::Lit(0)),
            Condition::rel(RelOp::Lt, v("v"), DataTerm::Lit(0)),
        );
        assert!(valid_iff(&taut, &Condition::True, &d, &c, B).unwrap());
        let v0 = Condition::eq(v("v"), DataTerm::Lit(0));
        assert!(!valid_iff(&v0, &Condition::False, &d, &c, B).unwrap());
        assert!(valid_iff(&v0, &v0, &d, &c, B).unwrap());

        assert!(!satisfiable(&Condition::False, &d, &c, B).unwrap());
        assert!(satisfiable(&Condition::eq(v("v"), DataTerm::Lit(3)), &d, &c, B).unwrap());
        assert!(!satisfiable(&Condition::rel(RelOp::Lt, v("v"), v("v")), &d, &c, B).unwrap());
    }

    #[test]
    fn normalize_sorts_and_decides_closed_parts() {
        let c = Carrier::default();
        let a = Condition::eq(v("u"), DataTerm::Lit(1));
        let b = Condition::eq(v("v"), DataTerm::Lit(2));
        let n1 = Condition::and(Condition::and(b.clone(), Condition::True), a.clone()).normalize(&c);
        let n2 = Condition::and(a.clone(), Condition::and(b.clone(), a.clone())).normalize(&c);
        assert_eq!(n1, n2);
        let closed_false = Condition::eq(DataTerm::Lit(1), DataTerm::Lit(2));
        assert_eq!(Condition::and(a, closed_false).normalize(&c), Condition::False);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn arb_cond() -> impl Strategy<Value = Condition> {
            let atom = (
                prop_oneof![Just(RelOp::Eq), Just(RelOp::Lt), Just(RelOp::Ge)],
                prop_oneof![Just("u"), Just("v")],
                -4i64..=3,
            )
                .prop_map(|(op, x, k)| Condition::rel(op, DataTerm::flex(x), DataTerm::Lit(k)));
            let leaf = prop_oneof![Just(Condition::True), Just(Condition::False), atom];
            leaf.prop_recursive(3, 24, 2, |inner| {
                prop_oneof![
                    inner.clone().prop_map(Condition::not),
                    (inner.clone(), inner.clone()).prop_map(|(a, b)| Condition::and(a, b)),
                    (inner.clone(), inner.clone()).prop_map(|(a, b)| Condition::or(a, b)),
                    (inner.clone(), inner).prop_map(|(a, b)| Condition::implies(a, b)),
                ]
            })
        }

        proptest! {
            #[test]
            fn classical_connectives(phi in arb_cond(), psi in arb_cond(), u in -4i64..=3, w in -4i64..=3) {
                let c = Carrier::new(-4, 3).unwrap();
                let s = EvalMap::from_pairs([("u", u), ("v", w)]);
                let a = eval_cond(&phi, &s, &c).unwrap();
                let b = eval_cond(&psi, &s, &c).unwrap();
                prop_assert_eq!(eval_cond(&Condition::not(phi.clone()), &s, &c).unwrap(), !a);
                prop_assert_eq!(eval_cond(&Condition::and(phi.clone(), psi.clone()), &s, &c).unwrap(), a && b);
                prop_assert_eq!(eval_cond(&Condition::or(phi.clone(), psi.clone()), &s, &c).unwrap(), a || b);
                prop_assert_eq!(eval_cond(&Condition::implies(phi.clone(), psi.clone()), &s, &c).unwrap(), !a || b);
                prop_assert_eq!(eval_cond(&phi.normalize(&c), &s, &c).unwrap(), a);
            }

            #[test]
            fn unsat_iff_equivalent_to_false(phi in arb_cond()) {
                let c = Carrier::new(-4, 3).unwrap();
                let d = VarDecl::new(["u", "v"]).unwrap();
                let sat = satisfiable(&phi, &d, &c, 1000).unwrap();
                let eqf = valid_iff(&phi, &Condition::False, &d, &c, 1000).unwrap();
                prop_assert_eq!(sat, !eqf);
            }

            #[test]
            fn valid_iff_agrees_pointwise(phi in arb_cond(), psi in arb_cond()) {
                let c = Carrier::new(-4, 3).unwrap();
                let d = VarDecl::new(["u", "v"]).unwrap();
                if valid_iff(&phi, &psi, &d, &c, 1000).unwrap() {
                    for s in enumerate_maps(&d, &c, 1000).unwrap() {
                        prop_assert_eq!(eval_cond(&phi, &s, &c).unwrap(), eval_cond(&psi, &s, &c).unwrap());
                    }
                }
            }
        }
    }
}
