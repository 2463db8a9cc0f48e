//! Behavior-preserving normalization of states.

use crate::data::{Carrier, EvalMap};
use crate::term::ProcTerm;

/// Rewrites a closed term into the representative used as an LTS state.
///
/// Every rule relates terms with identical transitions (up to the same
/// normalization of targets) and identical termination:
/// `epsilon . x = x`, `delta . x = delta`, `x + delta = x`, `epsilon || x = x`,
/// `encap/hide/eval` over `epsilon` or `delta`, `[phi] -> delta = delta`,
/// closed data folded to literals, and evaluation operators whose body reads
/// no flexible variable are dropped. Inside an evaluation operator, variables
/// the body never reads are reset to the carrier's default value.
pub fn canon(t: &ProcTerm, carrier: &Carrier) -> ProcTerm {
    use ProcTerm::*;
    match t {
        Act(a) => Act(a.fold_closed(carrier)),
        Delta | Eps | RecVar(_) | Rec(..) => t.clone(),
        Alt(l, r) => match (canon(l, carrier), canon(r, carrier)) {
            (Delta, y) => y,
            (x, Delta) => x,
            (x, y) => ProcTerm::alt(x, y),
        },
        Seq(l, r) => match canon(l, carrier) {
            Eps => canon(r, carrier),
            Delta => Delta,
            x => ProcTerm::seq(x, canon(r, carrier)),
        },
        Par(l, r) => match (canon(l, carrier), canon(r, carrier)) {
            (Eps, y) => y,
            (x, Eps) => x,
            (x, y) => ProcTerm::par(x, y),
        },
        LeftMerge(l, r) => ProcTerm::left_merge(canon(l, carrier), canon(r, carrier)),
        CommMerge(l, r) => ProcTerm::comm_merge(canon(l, carrier), canon(r, carrier)),
        Encap(h, x) => match canon(x, carrier) {
            y @ (Eps | Delta) => y,
            y => ProcTerm::encap(h.clone(), y),
        },
        Abstr(i, x) => match canon(x, carrier) {
            y @ (Eps | Delta) => y,
            y => ProcTerm::abstr(i.clone(), y),
        },
        Guard(c, x) => match canon(x, carrier) {
            Delta => Delta,
            y => ProcTerm::guard(c.clone(), y),
        },
        Eval(s, x) => {
            let y = canon(x, carrier);
            if matches!(y, Eps | Delta) || !y.has_free_reads() {
                return y;
            }
            ProcTerm::eval(normalize_map(s, &y, carrier), y)
        }
    }
}

/// Resets the values of variables `body` never reads.
pub fn normalize_map(s: &EvalMap, body: &ProcTerm, carrier: &Carrier) -> EvalMap {
    let reads = body.free_reads();
    let mut out = s.clone();
    for (v, d) in s.iter() {
        if !reads.contains(v) && d != carrier.default_value() {
            out.insert(v, carrier.default_value());
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::DataTerm;
    use crate::term::Action;

    #[test]
    fn structural_rules() {
        let c = Carrier::default();
        let a = ProcTerm::basic("a");
        assert_eq!(canon(&ProcTerm::seq(ProcTerm::Eps, a.clone()), &c), a);
        assert_eq!(canon(&ProcTerm::par(a.clone(), ProcTerm::Eps), &c), a);
        assert_eq!(canon(&ProcTerm::alt(ProcTerm::Delta, a.clone()), &c), a);
        let folded = ProcTerm::Act(Action::Param(
            "a".into(),
            vec![DataTerm::bin(crate::data::BinOp::Add, DataTerm::Lit(1), DataTerm::Lit(2))],
        ));
        assert_eq!(canon(&folded, &c).to_string(), "a(3)");
    }

    #[test]
    fn evaluation_maps() {
        let c = Carrier::default();
        let a = ProcTerm::basic("a");
        let s = EvalMap::from_pairs([("u", 1), ("w", 5)]);
        assert_eq!(canon(&ProcTerm::eval(s.clone(), a), &c), ProcTerm::basic("a"));
        let reads_u = ProcTerm::Act(Action::Param("a".into(), vec![DataTerm::flex("u")]));
        let t = canon(&ProcTerm::eval(s, reads_u.clone()), &c);
        assert_eq!(t, ProcTerm::eval(EvalMap::from_pairs([("u", 1), ("w", 0)]), reads_u));
    }
}
