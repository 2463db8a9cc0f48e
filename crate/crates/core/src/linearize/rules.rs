//! Left-to-right instances of the equational axioms.
//!
//! [`rewrite`] maps a left-hand side to the right-hand side the axiom
//! prescribes, or fails when the term is not an instance. Both the
//! normal-form engine and certificate replay go through it, so a rewrite the
//! engine records is exactly one the checker accepts.

use crate::cond::{conj, valid_iff, Condition};
use crate::context::Context;
use crate::data::{eval_data, update_map, DataTerm, VarDecl};
use crate::error::{Error, Result};
use crate::term::{Action, ActionSet, ProcTerm};

use ProcTerm as P;

fn no(axiom: &str, t: &ProcTerm) -> Error {
    Error::Shape(format!("`{t}` is not an instance of the left-hand side of {axiom}"))
}

/// An action constant other than `epsilon`: an atomic action or `delta`.
fn constant(t: &ProcTerm) -> Option<Option<&Action>> {
    match t {
        P::Act(a) => Some(Some(a)),
        P::Delta => Some(None),
        _ => None,
    }
}

fn in_set(set: &ActionSet, a: Option<&Action>) -> bool {
    a.is_some_and(|a| set.contains(a))
}

/// The right-hand side axiom `axiom` assigns to `l`.
pub(crate) fn rewrite(axiom: &str, l: &ProcTerm, ctx: &Context) -> Result<ProcTerm> {
    let fail = || no(axiom, l);
    let car = &ctx.carrier;
    Ok(match (axiom, l) {
        ("A1", P::Alt(x, y)) => P::alt((**y).clone(), (**x).clone()),
        ("A2", P::Alt(xy, z)) => match &**xy {
            P::Alt(x, y) => P::alt((**x).clone(), P::alt((**y).clone(), (**z).clone())),
            _ => return Err(fail()),
        },
        ("A3", P::Alt(x, y)) if x == y => (**x).clone(),
        ("A4", P::Seq(xy, z)) => match &**xy {
            P::Alt(x, y) => P::alt(P::seq((**x).clone(), (**z).clone()), P::seq((**y).clone(), (**z).clone())),
            _ => return Err(fail()),
        },
        ("A5", P::Seq(xy, z)) => match &**xy {
            P::Seq(x, y) => P::seq((**x).clone(), P::seq((**y).clone(), (**z).clone())),
            _ => return Err(fail()),
        },
        ("A6", P::Alt(x, d)) if **d == P::Delta => (**x).clone(),
        ("A7", P::Seq(d, _)) if **d == P::Delta => P::Delta,
        ("A8", P::Seq(x, e)) if **e == P::Eps => (**x).clone(),
        ("A9", P::Seq(e, x)) if **e == P::Eps => (**x).clone(),
        ("CM1E", P::Par(x, y)) => {
            let (x, y) = ((**x).clone(), (**y).clone());
            let all = ActionSet::all();
            P::sum([
                P::left_merge(x.clone(), y.clone()),
                P::left_merge(y.clone(), x.clone()),
                P::comm_merge(x.clone(), y.clone()),
                P::seq(P::encap(all.clone(), x), P::encap(all, y)),
            ])
        }
        ("CM2E", P::LeftMerge(e, _)) if **e == P::Eps => P::Delta,
        ("CM3", P::LeftMerge(ax, y)) => match &**ax {
            P::Seq(a, x) if constant(a).is_some() => P::seq((**a).clone(), P::par((**x).clone(), (**y).clone())),
            _ => return Err(fail()),
        },
        ("CM4", P::LeftMerge(xy, z)) => match &**xy {
            P::Alt(x, y) => P::alt(
                P::left_merge((**x).clone(), (**z).clone()),
                P::left_merge((**y).clone(), (**z).clone()),
            ),
            _ => return Err(fail()),
        },
        ("CM5E", P::CommMerge(e, _)) if **e == P::Eps => P::Delta,
        ("CM6E", P::CommMerge(_, e)) if **e == P::Eps => P::Delta,
        ("CM7" | "CM7Da" | "CM7Db" | "CM7Dc" | "CM7Dd" | "CM7De" | "CM7Df", P::CommMerge(l, r)) => {
            let (P::Seq(a, x), P::Seq(b, y)) = (&**l, &**r) else {
                return Err(fail());
            };
            let (Some(a), Some(b)) = (constant(a), constant(b)) else {
                return Err(fail());
            };
            communication(axiom, a, b, (**x).clone(), (**y).clone(), ctx).ok_or_else(fail)?
        }
        ("CM8", P::CommMerge(xy, z)) => match &**xy {
            P::Alt(x, y) => P::alt(
                P::comm_merge((**x).clone(), (**z).clone()),
                P::comm_merge((**y).clone(), (**z).clone()),
            ),
            _ => return Err(fail()),
        },
        ("CM9", P::CommMerge(x, yz)) => match &**yz {
            P::Alt(y, z) => P::alt(
                P::comm_merge((**x).clone(), (**y).clone()),
                P::comm_merge((**x).clone(), (**z).clone()),
            ),
            _ => return Err(fail()),
        },
        ("D0", P::Encap(_, e)) | ("T0", P::Abstr(_, e)) if **e == P::Eps => P::Eps,
        ("D1", P::Encap(h, a)) => match constant(a) {
            Some(act) if !in_set(h, act) => (**a).clone(),
            _ => return Err(fail()),
        },
        ("D2", P::Encap(h, a)) => match constant(a) {
            Some(act) if in_set(h, act) => P::Delta,
            _ => return Err(fail()),
        },
        ("T1", P::Abstr(i, a)) => match constant(a) {
            Some(act) if !in_set(i, act) => (**a).clone(),
            _ => return Err(fail()),
        },
        ("T2", P::Abstr(i, a)) => match constant(a) {
            Some(act) if in_set(i, act) => P::tau(),
            _ => return Err(fail()),
        },
        ("D3", P::Encap(h, xy)) | ("T3", P::Abstr(h, xy)) | ("D4", P::Encap(h, xy)) | ("T4", P::Abstr(h, xy)) => {
            let op = |t: ProcTerm| {
                if axiom.starts_with('D') {
                    P::encap(h.clone(), t)
                } else {
                    P::abstr(h.clone(), t)
                }
            };
            match (&**xy, axiom.ends_with('3')) {
                (P::Alt(x, y), true) => P::alt(op((**x).clone()), op((**y).clone())),
                (P::Seq(x, y), false) => P::seq(op((**x).clone()), op((**y).clone())),
                _ => return Err(fail()),
            }
        }
        ("BE", P::Seq(a, body)) if constant(a).is_some() => match &**body {
            P::Alt(l, x2) => match &**l {
                P::Seq(t, xy) if **t == P::tau() => match &**xy {
                    P::Alt(x, y) if x == x2 => P::seq((**a).clone(), P::alt((**x).clone(), (**y).clone())),
                    _ => return Err(fail()),
                },
                _ => return Err(fail()),
            },
            _ => return Err(fail()),
        },
        ("BED", P::Seq(a, body)) if constant(a).is_some() => match &**body {
            P::Alt(l, r) => match (&**l, &**r) {
                (P::Guard(phi, l), P::Guard(psi, x2)) if phi == psi => match &**l {
                    P::Seq(t, xy) if **t == P::tau() => match &**xy {
                        P::Alt(x, y) if x == x2 => P::seq(
                            (**a).clone(),
                            P::guard(phi.clone(), P::alt((**x).clone(), (**y).clone())),
                        ),
                        _ => return Err(fail()),
                    },
                    _ => return Err(fail()),
                },
                _ => return Err(fail()),
            },
            _ => return Err(fail()),
        },
        ("GC1", P::Guard(Condition::True, x)) => (**x).clone(),
        ("GC2", P::Guard(Condition::False, _)) => P::Delta,
        ("GC3", P::Guard(_, d)) if **d == P::Delta => P::Delta,
        ("GC4", P::Guard(phi, xy)) => match &**xy {
            P::Alt(x, y) => P::alt(P::guard(phi.clone(), (**x).clone()), P::guard(phi.clone(), (**y).clone())),
            _ => return Err(fail()),
        },
        ("GC5", P::Guard(phi, xy)) => match &**xy {
            P::Seq(x, y) => P::seq(P::guard(phi.clone(), (**x).clone()), (**y).clone()),
            _ => return Err(fail()),
        },
        ("GC6", P::Guard(phi, inner)) => match &**inner {
            P::Guard(psi, x) => P::guard(Condition::and(phi.clone(), psi.clone()), (**x).clone()),
            _ => return Err(fail()),
        },
        ("GC7", P::Guard(Condition::Or(phi, psi), x)) => P::alt(
            P::guard((**phi).clone(), (**x).clone()),
            P::guard((**psi).clone(), (**x).clone()),
        ),
        ("GC8", P::LeftMerge(g, y)) => match &**g {
            P::Guard(phi, x) => P::guard(phi.clone(), P::left_merge((**x).clone(), (**y).clone())),
            _ => return Err(fail()),
        },
        ("GC9", P::CommMerge(g, y)) => match &**g {
            P::Guard(phi, x) => P::guard(phi.clone(), P::comm_merge((**x).clone(), (**y).clone())),
            _ => return Err(fail()),
        },
        ("GC10", P::CommMerge(x, g)) => match &**g {
            P::Guard(phi, y) => P::guard(phi.clone(), P::comm_merge((**x).clone(), (**y).clone())),
            _ => return Err(fail()),
        },
        ("GC11", P::Encap(h, g)) => match &**g {
            P::Guard(phi, x) => P::guard(phi.clone(), P::encap(h.clone(), (**x).clone())),
            _ => return Err(fail()),
        },
        ("GC12", P::Abstr(i, g)) => match &**g {
            P::Guard(phi, x) => P::guard(phi.clone(), P::abstr(i.clone(), (**x).clone())),
            _ => return Err(fail()),
        },
        ("V0", P::Eval(_, e)) if **e == P::Eps => P::Eps,
        ("V1" | "V2" | "V3" | "V4", P::Eval(s, ax)) => {
            let P::Seq(a, x) = &**ax else {
                return Err(fail());
            };
            let P::Act(a) = &**a else {
                return Err(fail());
            };
            let ev = |s, x: &ProcTerm| P::eval(s, x.clone());
            match (axiom, a) {
                ("V1", Action::Tau) | ("V2", Action::Basic(_)) => P::seq(P::Act(a.clone()), ev(s.clone(), x)),
                ("V3", Action::Param(n, es)) => {
                    let vals = es
                        .iter()
                        .map(|e| eval_data(e, s, car).map(DataTerm::Lit))
                        .collect::<Result<Vec<_>>>()?;
                    P::seq(P::Act(Action::Param(n.clone(), vals)), ev(s.clone(), x))
                }
                ("V4", Action::Assign(v, e)) => {
                    let d = eval_data(e, s, car)?;
                    P::seq(P::Act(Action::Assign(v.clone(), DataTerm::Lit(d))), ev(update_map(s, v, d)?, x))
                }
                _ => return Err(fail()),
            }
        }
        ("V5", P::Eval(s, xy)) => match &**xy {
            P::Alt(x, y) => P::alt(P::eval(s.clone(), (**x).clone()), P::eval(s.clone(), (**y).clone())),
            _ => return Err(fail()),
        },
        ("V6", P::Eval(s, g)) => match &**g {
            P::Guard(phi, x) => P::guard(phi.substitute(s, car)?, P::eval(s.clone(), (**x).clone())),
            _ => return Err(fail()),
        },
        ("RDP", P::Rec(x, spec)) => spec
            .rhs(x)
            .ok_or_else(|| Error::UnknownVariable(x.clone()))?
            .close_with(spec),
        _ => return Err(fail()),
    })
}

/// The communication axioms on `a . x | b . y`; `None` marks `delta` operands.
fn communication(
    axiom: &str,
    a: Option<&Action>,
    b: Option<&Action>,
    x: ProcTerm,
    y: ProcTerm,
    ctx: &Context,
) -> Option<ProcTerm> {
    use Action::*;
    let plain = |a: Option<&Action>| matches!(a, None | Some(Basic(_) | Tau));
    let param = |a: Option<&Action>| matches!(a, Some(Param(..)));
    let assign = |a: Option<&Action>| matches!(a, Some(Assign(..)));
    match axiom {
        "CM7" if plain(a) && plain(b) => {
            let c = match (a, b) {
                (Some(Basic(a)), Some(Basic(b))) => ctx.comm.apply(a, b).map(|c| P::basic(c)),
                _ => None,
            };
            Some(P::seq(c.unwrap_or(P::Delta), P::par(x, y)))
        }
        "CM7Da" | "CM7Db" => {
            let (Some(Param(a, es)), Some(Param(b, fs))) = (a, b) else {
                return None;
            };
            match (ctx.comm.apply(a, b), es.len() == fs.len(), axiom) {
                (Some(c), true, "CM7Da") => {
                    let eqs = conj(es.iter().zip(fs).map(|(e, f)| Condition::eq(e.clone(), f.clone())).collect());
                    Some(P::guard(eqs, P::seq(P::Act(Param(c.to_string(), es.clone())), P::par(x, y))))
                }
                (None, _, "CM7Db") | (_, false, "CM7Db") => Some(P::Delta),
                _ => None,
            }
        }
        "CM7Dc" if param(a) && !param(b) => Some(P::Delta),
        "CM7Dd" if !param(a) && param(b) => Some(P::Delta),
        "CM7De" if assign(a) => Some(P::Delta),
        "CM7Df" if assign(b) => Some(P::Delta),
        _ => None,
    }
}

/// The communication axiom that applies to `a . x | b . y`.
pub(crate) fn communication_axiom(a: &Action, b: &Action) -> &'static str {
    use Action::*;
    match (a, b) {
        (Assign(..), _) => "CM7De",
        (_, Assign(..)) => "CM7Df",
        (Param(..), Param(..)) => "CM7Da",
        (Param(..), _) => "CM7Dc",
        (_, Param(..)) => "CM7Dd",
        _ => "CM7",
    }
}

/// Whether `l = r` is an IMP1 instance: the same action up to data arguments
/// that are equal under every map.
pub(crate) fn imp1(l: &ProcTerm, r: &ProcTerm, ctx: &Context) -> Result<bool> {
    let pairs: Vec<(&DataTerm, &DataTerm)> = match (l, r) {
        (P::Act(Action::Param(a, es)), P::Act(Action::Param(b, fs))) if a == b && es.len() == fs.len() => {
            es.iter().zip(fs).collect()
        }
        (P::Act(Action::Assign(v, e)), P::Act(Action::Assign(w, f))) if v == w => vec![(e, f)],
        _ => return Ok(false),
    };
    for (e, f) in pairs {
        let phi = Condition::eq(e.clone(), f.clone());
        let decl = VarDecl::new(phi.flex_vars()).expect("set has no duplicates");
        if !valid_iff(&phi, &Condition::True, &decl, &ctx.carrier, ctx.limits.enumeration)? {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Whether `l = r` is an IMP2 instance: guards with equivalent conditions over the same body.
pub(crate) fn imp2(l: &ProcTerm, r: &ProcTerm, ctx: &Context) -> Result<bool> {
    let (P::Guard(phi, x), P::Guard(psi, y)) = (l, r) else {
        return Ok(false);
    };
    if x != y {
        return Ok(false);
    }
    let mut vars = phi.flex_vars();
    vars.extend(psi.flex_vars());
    let decl = VarDecl::new(vars).expect("set has no duplicates");
    valid_iff(phi, psi, &decl, &ctx.carrier, ctx.limits.enumeration)
}
