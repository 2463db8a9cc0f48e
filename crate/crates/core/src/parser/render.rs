//! Canonical text for process terms.
//!
//! Binding strength, weakest first: `+`, the three merges, `.`, guards, atoms.
//! All binary operators associate to the right.

use std::fmt;

use crate::term::{ProcTerm, RecSpec};

const ALT: u8 = 0;
const MERGE: u8 = 1;
const SEQ: u8 = 2;
const SEQ_LEFT: u8 = 3;

fn go(t: &ProcTerm, f: &mut fmt::Formatter<'_>, ctx: u8) -> fmt::Result {
    let binary = |f: &mut fmt::Formatter<'_>, level: u8, op: &str, l: &ProcTerm, r: &ProcTerm| {
        let paren = ctx > level;
        if paren {
            write!(f, "(")?;
        }
        go(l, f, level + 1)?;
        write!(f, " {op} ")?;
        go(r, f, level)?;
        if paren {
            write!(f, ")")?;
        }
        Ok(())
    };
    match t {
        ProcTerm::Act(a) => write!(f, "{a}"),
        ProcTerm::Delta => write!(f, "delta"),
        ProcTerm::Eps => write!(f, "epsilon"),
        ProcTerm::Alt(l, r) => binary(f, ALT, "+", l, r),
        ProcTerm::Par(l, r) => binary(f, MERGE, "||", l, r),
        ProcTerm::LeftMerge(l, r) => binary(f, MERGE, "||_", l, r),
        ProcTerm::CommMerge(l, r) => binary(f, MERGE, "|", l, r),
        ProcTerm::Seq(l, r) => binary(f, SEQ, ".", l, r),
        ProcTerm::Guard(c, body) => {
            let paren = ctx >= SEQ_LEFT;
            if paren {
                write!(f, "(")?;
            }
            write!(f, "[{c}] -> ")?;
            go(body, f, SEQ)?;
            if paren {
                write!(f, ")")?;
            }
            Ok(())
        }
        ProcTerm::Encap(h, p) => {
            write!(f, "encap{h}(")?;
            go(p, f, ALT)?;
            write!(f, ")")
        }
        ProcTerm::Abstr(i, p) => {
            write!(f, "hide{i}(")?;
            go(p, f, ALT)?;
            write!(f, ")")
        }
        ProcTerm::Eval(s, p) => {
            write!(f, "eval{s}(")?;
            go(p, f, ALT)?;
            write!(f, ")")
        }
        ProcTerm::RecVar(x) => write!(f, "{x}"),
        ProcTerm::Rec(x, spec) => {
            write!(f, "rec {x} where ")?;
            write_spec(spec, f)
        }
    }
}

fn write_spec(spec: &RecSpec, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    write!(f, "{{ ")?;
    for (i, (x, rhs)) in spec.equations().iter().enumerate() {
        if i > 0 {
            write!(f, ", ")?;
        }
        write!(f, "{x} = ")?;
        go(rhs, f, ALT)?;
    }
    write!(f, " }}")
}

impl fmt::Display for ProcTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        go(self, f, ALT)
    }
}

impl fmt::Display for RecSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_spec(self, f)
    }
}

/// Canonical text of a process term, with minimal parentheses.
pub fn render(t: &ProcTerm) -> String {
    t.to_string()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cond::Condition;

    #[test]
    fn precedence() {
        let (a, b, c) = (ProcTerm::basic("a"), ProcTerm::basic("b"), ProcTerm::basic("c"));
        assert_eq!(render(&ProcTerm::seq(a.clone(), ProcTerm::alt(b.clone(), c.clone()))), "a . (b + c)");
        assert_eq!(render(&ProcTerm::exit_summand(Condition::True)), "[true] -> epsilon");
        assert_eq!(
            render(&ProcTerm::seq(ProcTerm::guard(Condition::True, a.clone()), b.clone())),
            "([true] -> a) . b"
        );
        assert_eq!(render(&ProcTerm::alt(ProcTerm::alt(a.clone(), b.clone()), c.clone())), "(a + b) + c");
        assert_eq!(render(&ProcTerm::alt(a.clone(), ProcTerm::alt(b.clone(), c.clone()))), "a + b + c");
        assert_eq!(render(&ProcTerm::par(ProcTerm::seq(a, b), c)), "a . b || c");
    }
}
