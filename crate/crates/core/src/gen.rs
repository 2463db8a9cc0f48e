//! Seeded random generation of data terms, conditions, process terms and
//! guarded linear specifications, for property tests and experiments.

use rand::seq::SliceRandom;
use rand::Rng;

use crate::cond::{Condition, RelOp};
use crate::context::Context;
use crate::data::{BinOp, Carrier, DataTerm, EvalMap};
use crate::term::{is_guarded_linear_spec, Action, ActionPattern, ActionSet, ProcTerm, RecSpec, SpecRef};

/// Which constructs the generator may emit.
#[derive(Debug, Clone)]
pub struct GenConfig {
    pub basic: Vec<String>,
    /// Parameterized action names with arity.
    pub param: Vec<(String, usize)>,
    pub vars: Vec<String>,
    pub carrier: Carrier,
    pub merges: bool,
    pub encap: bool,
    pub abstraction: bool,
    pub guards: bool,
    pub evals: bool,
    pub assignments: bool,
    pub tau: bool,
    pub recursion: bool,
    /// Only the constants `true` and `false` as guard conditions.
    pub bool_guards: bool,
}

impl GenConfig {
    /// Everything enabled, over the names declared in `ctx`.
    pub fn full(ctx: &Context) -> Self {
        let mut basic = Vec::new();
        let mut param = Vec::new();
        for (a, arities) in &ctx.actions {
            for &k in arities {
                if k == 0 {
                    basic.push(a.clone());
                } else {
                    param.push((a.clone(), k));
                }
            }
        }
        GenConfig {
            basic,
            param,
            vars: ctx.vars.names().to_vec(),
            carrier: ctx.carrier,
            merges: true,
            encap: true,
            abstraction: true,
            guards: true,
            evals: true,
            assignments: true,
            tau: true,
            recursion: true,
            bool_guards: false,
        }
    }

    fn literal<R: Rng>(&self, rng: &mut R) -> i64 {
        rng.gen_range(self.carrier.lo..=self.carrier.hi)
    }

    pub fn data<R: Rng>(&self, rng: &mut R, depth: usize) -> DataTerm {
        let leaf = depth == 0 || rng.gen_bool(0.5);
        if leaf {
            if !self.vars.is_empty() && rng.gen_bool(0.5) {
                DataTerm::Flex(self.vars.choose(rng).unwrap().clone())
            } else {
                DataTerm::Lit(self.literal(rng))
            }
        } else {
            let op = *[BinOp::Add, BinOp::Sub, BinOp::Mul].choose(rng).unwrap();
            DataTerm::bin(op, self.data(rng, depth - 1), self.data(rng, depth - 1))
        }
    }

    pub fn condition<R: Rng>(&self, rng: &mut R, depth: usize) -> Condition {
        if self.bool_guards || self.vars.is_empty() {
            return if rng.gen_bool(0.6) { Condition::True } else { Condition::False };
        }
        if depth == 0 || rng.gen_bool(0.4) {
            return match rng.gen_range(0..6) {
                0 => Condition::True,
                1 => Condition::False,
                _ => {
                    let op = *[RelOp::Eq, RelOp::Ne, RelOp::Lt, RelOp::Le, RelOp::Gt, RelOp::Ge]
                        .choose(rng)
                        .unwrap();
                    Condition::rel(op, self.data(rng, 1), self.data(rng, 1))
                }
            };
        }
        match rng.gen_range(0..5) {
            0 => Condition::not(self.condition(rng, depth - 1)),
            1 => Condition::and(self.condition(rng, depth - 1), self.condition(rng, depth - 1)),
            2 => Condition::or(self.condition(rng, depth - 1), self.condition(rng, depth - 1)),
            3 => Condition::implies(self.condition(rng, depth - 1), self.condition(rng, depth - 1)),
            _ => {
                let x = "x".to_string();
                let body = Condition::rel(RelOp::Le, DataTerm::Var(x.clone()), self.data(rng, 1));
                if rng.gen_bool(0.5) {
                    Condition::Forall(x, Box::new(body))
                } else {
                    Condition::Exists(x, Box::new(body))
                }
            }
        }
    }

    pub fn action<R: Rng>(&self, rng: &mut R) -> Action {
        let mut kinds = Vec::new();
        if !self.basic.is_empty() {
            kinds.extend([0, 0, 0]);
        }
        if !self.param.is_empty() {
            kinds.push(1);
        }
        if self.assignments && !self.vars.is_empty() {
            kinds.push(2);
        }
        if self.tau || kinds.is_empty() {
            kinds.push(3);
        }
        match kinds.choose(rng).unwrap() {
            0 => Action::Basic(self.basic.choose(rng).unwrap().clone()),
            1 => {
                let (a, k) = self.param.choose(rng).unwrap();
                Action::Param(a.clone(), (0..*k).map(|_| self.data(rng, 1)).collect())
            }
            2 => Action::Assign(self.vars.choose(rng).unwrap().clone(), self.data(rng, 1)),
            _ => Action::Tau,
        }
    }

    pub fn action_set<R: Rng>(&self, rng: &mut R) -> ActionSet {
        let mut pats = Vec::new();
        for a in &self.basic {
            if rng.gen_bool(0.4) {
                pats.push(ActionPattern::Name(a.clone()));
            }
        }
        for (a, _) in &self.param {
            if rng.gen_bool(0.3) {
                pats.push(ActionPattern::Name(a.clone()));
            }
        }
        if self.assignments {
            for v in &self.vars {
                if rng.gen_bool(0.2) {
                    pats.push(ActionPattern::Assign(v.clone()));
                }
            }
        }
        ActionSet::new(pats)
    }

    pub fn eval_map<R: Rng>(&self, rng: &mut R) -> EvalMap {
        EvalMap::from_pairs(self.vars.iter().map(|v| (v.as_str(), self.literal(rng))))
    }

    /// A closed process term of at most the given depth.
    pub fn term<R: Rng>(&self, rng: &mut R, depth: usize) -> ProcTerm {
        if depth <= 1 || rng.gen_bool(0.2) {
            return match rng.gen_range(0..10) {
                0 => ProcTerm::Delta,
                1 => ProcTerm::Eps,
                2 if self.recursion => ProcTerm::Rec("X0".into(), self.linear_spec(rng, 2, 2)),
                _ => ProcTerm::Act(self.action(rng)),
            };
        }
        let d = depth - 1;
        let mut choices = vec![0, 0, 1, 1];
        if self.merges {
            choices.extend([2, 3, 4]);
        }
        if self.encap {
            choices.push(5);
        }
        if self.abstraction {
            choices.push(6);
        }
        if self.guards {
            choices.extend([7, 7]);
        }
        if self.evals && !self.vars.is_empty() {
            choices.push(8);
        }
        match choices.choose(rng).unwrap() {
            0 => ProcTerm::alt(self.term(rng, d), self.term(rng, d)),
            1 => ProcTerm::seq(self.term(rng, d), self.term(rng, d)),
            2 => ProcTerm::par(self.term(rng, d), self.term(rng, d)),
            3 => ProcTerm::left_merge(self.term(rng, d), self.term(rng, d)),
            4 => ProcTerm::comm_merge(self.term(rng, d), self.term(rng, d)),
            5 => ProcTerm::encap(self.action_set(rng), self.term(rng, d)),
            6 => ProcTerm::abstr(self.action_set(rng), self.term(rng, d)),
            7 => ProcTerm::guard(self.condition(rng, 1), self.term(rng, d)),
            _ => ProcTerm::eval(self.eval_map(rng), self.term(rng, d)),
        }
    }

    /// A guarded linear specification over `X0..X{n-1}` with up to `width` summands each.
    pub fn linear_spec<R: Rng>(&self, rng: &mut R, n: usize, width: usize) -> SpecRef {
        let names: Vec<String> = (0..n.max(1)).map(|i| format!("X{i}")).collect();
        loop {
            let eqs: Vec<(String, ProcTerm)> = names
                .iter()
                .map(|x| {
                    let k = rng.gen_range(0..=width);
                    let summands = (0..k).map(|_| {
                        let c = self.condition(rng, 1);
                        if rng.gen_bool(0.25) {
                            ProcTerm::exit_summand(c)
                        } else {
                            ProcTerm::prefix_summand(c, self.action(rng), names.choose(rng).unwrap())
                        }
                    });
                    (x.clone(), ProcTerm::sum(summands))
                })
                .collect();
            let spec = RecSpec::new(eqs).expect("names are distinct");
            if is_guarded_linear_spec(&spec) {
                return spec.into_ref();
            }
        }
    }
}
