//! Spec files: lexing, recursive-descent parsing and rendering.
//!
//! A file is a sequence of sections:
//!
//! ```text
//! domain -4..3;
//! vars u, v;
//! actions a, b, c, send/1;
//! comm { a | b = c }
//! maps { sigma = { u = 1 } }
//! spec E = { X = [true] -> a . X };
//! proc P = eval{sigma}(rec X where E);
//! security { low = { v }; ext = { send/1 } }
//! ```

mod lexer;
mod render;

use std::collections::{BTreeMap, BTreeSet};

pub use render::render;

use crate::cond::{Condition, RelOp};
use crate::context::Context;
use crate::data::{BinOp, Carrier, DataTerm, EvalMap, VarDecl};
use crate::error::{Error, Result};
use crate::term::{
    is_guarded_linear_spec, unguarded_cycle, Action, ActionPattern, ActionSet, CommFunction, ProcTerm, RecSpec,
    SpecRef,
};
use lexer::{lex, Tok, Token};

const KEYWORDS: &[&str] = &[
    "delta", "epsilon", "tau", "encap", "hide", "eval", "rec", "where", "true", "false", "not", "and", "or", "forall",
    "exists", "domain", "vars", "actions", "comm", "maps", "proc", "spec", "security", "low", "ext",
];

/// Declarations of the security property: observable variables and external actions.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SecurityDecl {
    pub low: BTreeSet<String>,
    pub ext: ActionSet,
}

/// Everything declared in one spec file.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SpecFile {
    pub ctx: Context,
    pub maps: BTreeMap<String, EvalMap>,
    pub procs: Vec<(String, ProcTerm)>,
    pub specs: Vec<(String, SpecRef)>,
    pub security: Option<SecurityDecl>,
}

impl SpecFile {
    /// A file with the given declarations and no named entities.
    pub fn from_context(ctx: Context) -> Self {
        SpecFile {
            ctx,
            ..SpecFile::default()
        }
    }

    pub fn proc(&self, name: &str) -> Option<&ProcTerm> {
        self.procs.iter().find(|(n, _)| n == name).map(|(_, t)| t)
    }

    pub fn spec(&self, name: &str) -> Option<&SpecRef> {
        self.specs.iter().find(|(n, _)| n == name).map(|(_, s)| s)
    }

    /// A named process, or else the text parsed as a term in this file's scope.
    pub fn resolve_term(&self, name_or_term: &str) -> Result<ProcTerm> {
        match self.proc(name_or_term.trim()) {
            Some(t) => Ok(t.clone()),
            None => parse_term_in(name_or_term, self),
        }
    }
}

pub fn parse_spec(text: &str) -> Result<SpecFile> {
    let mut p = Parser::new(text, SpecFile::default())?;
    p.file()?;
    Ok(p.file)
}

/// Parses a process term against a context without named entities.
pub fn parse_term(text: &str, ctx: &Context) -> Result<ProcTerm> {
    parse_term_in(text, &SpecFile::from_context(ctx.clone()))
}

/// Parses a process term; names of processes, maps and specs from `file` are in scope.
pub fn parse_term_in(text: &str, file: &SpecFile) -> Result<ProcTerm> {
    let mut p = Parser::new(text, file.clone())?;
    let t = p.proc_term()?;
    p.expect(Tok::Eof)?;
    Ok(t)
}

pub fn parse_condition(text: &str, ctx: &Context) -> Result<Condition> {
    let mut p = Parser::new(text, SpecFile::from_context(ctx.clone()))?;
    let c = p.condition()?;
    p.expect(Tok::Eof)?;
    Ok(c)
}

struct Parser {
    toks: Vec<Token>,
    pos: usize,
    file: SpecFile,
    recvars: Vec<BTreeSet<String>>,
    bound: Vec<String>,
    started: bool,
}

impl Parser {
    fn new(text: &str, file: SpecFile) -> Result<Self> {
        Ok(Parser {
            toks: lex(text)?,
            pos: 0,
            file,
            recvars: Vec::new(),
            bound: Vec::new(),
            started: false,
        })
    }

    fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    fn peek_at(&self, k: usize) -> &Tok {
        &self.toks[(self.pos + k).min(self.toks.len() - 1)].tok
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.pos].tok.clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn err_at(&self, pos: usize, message: impl Into<String>) -> Error {
        let t = &self.toks[pos.min(self.toks.len() - 1)];
        Error::Parse {
            line: t.line,
            col: t.col,
            message: message.into(),
        }
    }

    fn err(&self, message: impl Into<String>) -> Error {
        self.err_at(self.pos, message)
    }

    fn eat(&mut self, t: &Tok) -> bool {
        if self.peek() == t {
            self.bump();
            true
        } else {
            false
        }
    }

    fn expect(&mut self, t: Tok) -> Result<()> {
        if self.eat(&t) {
            Ok(())
        } else {
            Err(self.err(format!("expected {}, found {}", t.describe(), self.peek().describe())))
        }
    }

    fn is_kw(&self, kw: &str) -> bool {
        matches!(self.peek(), Tok::Ident(s) if s == kw)
    }

    fn eat_kw(&mut self, kw: &str) -> bool {
        if self.is_kw(kw) {
            self.bump();
            true
        } else {
            false
        }
    }

    fn expect_kw(&mut self, kw: &str) -> Result<()> {
        if self.eat_kw(kw) {
            Ok(())
        } else {
            Err(self.err(format!("expected `{kw}`, found {}", self.peek().describe())))
        }
    }

    fn ident(&mut self) -> Result<String> {
        match self.peek().clone() {
            Tok::Ident(s) if !KEYWORDS.contains(&s.as_str()) => {
                self.bump();
                Ok(s)
            }
            other => Err(self.err(format!("expected an identifier, found {}", other.describe()))),
        }
    }

    fn number(&mut self) -> Result<i64> {
        let neg = self.eat(&Tok::Minus);
        match self.bump() {
            Tok::Num(n) => Ok(if neg { -n } else { n }),
            other => {
                self.pos -= 1;
                Err(self.err(format!("expected a number, found {}", other.describe())))
            }
        }
    }

    fn literal(&mut self) -> Result<i64> {
        let at = self.pos;
        let n = self.number()?;
        let c = self.file.ctx.carrier;
        if !c.contains(n) {
            return Err(self.err_at(at, format!("literal {n} lies outside the carrier {}..{}", c.lo, c.hi)));
        }
        Ok(n)
    }

    // ---- declarations -------------------------------------------------

    fn is_flex(&self, n: &str) -> bool {
        self.file.ctx.vars.contains(n)
    }

    fn is_action(&self, n: &str) -> bool {
        self.file.ctx.actions.contains_key(n)
    }

    fn is_recvar(&self, n: &str) -> bool {
        self.recvars.iter().rev().any(|s| s.contains(n))
    }

    fn name_taken(&self, n: &str) -> bool {
        self.is_flex(n)
            || self.is_action(n)
            || self.file.maps.contains_key(n)
            || self.file.proc(n).is_some()
            || self.file.spec(n).is_some()
    }

    fn fresh_name(&mut self) -> Result<String> {
        let at = self.pos;
        let n = self.ident()?;
        if self.name_taken(&n) {
            return Err(self.err_at(at, format!("`{n}` is already declared")));
        }
        Ok(n)
    }

    fn file(&mut self) -> Result<()> {
        while *self.peek() != Tok::Eof {
            let at = self.pos;
            let kw = match self.peek() {
                Tok::Ident(s) => s.clone(),
                other => return Err(self.err(format!("expected a section keyword, found {}", other.describe()))),
            };
            self.bump();
            match kw.as_str() {
                "domain" => {
                    if self.started {
                        return Err(self.err_at(at, "`domain` must be the first section"));
                    }
                    let lo = self.number()?;
                    self.expect(Tok::DotDot)?;
                    let hi = self.number()?;
                    self.file.ctx.carrier = Carrier::new(lo, hi).map_err(|e| self.err_at(at, e.to_string()))?;
                    self.expect(Tok::Semi)?;
                }
                "vars" => {
                    let mut names = self.file.ctx.vars.names().to_vec();
                    loop {
                        names.push(self.fresh_name()?);
                        self.file.ctx.vars = VarDecl::new(names.clone()).expect("fresh names");
                        if !self.eat(&Tok::Comma) {
                            break;
                        }
                    }
                    self.expect(Tok::Semi)?;
                }
                "actions" => {
                    loop {
                        let at = self.pos;
                        let n = self.ident()?;
                        if n == "tau" || self.is_flex(&n) || (!self.is_action(&n) && self.name_taken(&n)) {
                            return Err(self.err_at(at, format!("`{n}` cannot be declared as an action")));
                        }
                        let arity = if self.eat(&Tok::Slash) {
                            let k = self.number()?;
                            if k < 0 {
                                return Err(self.err_at(at, "arity must be non-negative"));
                            }
                            k as usize
                        } else {
                            0
                        };
                        self.file.ctx.actions.entry(n).or_default().insert(arity);
                        if !self.eat(&Tok::Comma) {
                            break;
                        }
                    }
                    self.expect(Tok::Semi)?;
                }
                "comm" => self.comm_section(at)?,
                "maps" => {
                    self.expect(Tok::LBrace)?;
                    while !self.eat(&Tok::RBrace) {
                        let name = self.fresh_name()?;
                        self.expect(Tok::Eq)?;
                        let m = self.inline_map()?;
                        self.file.maps.insert(name, m);
                        if !self.eat(&Tok::Comma) && !self.eat(&Tok::Semi) {
                            self.expect(Tok::RBrace)?;
                            break;
                        }
                    }
                }
                "spec" => {
                    let name = self.fresh_name()?;
                    self.expect(Tok::Eq)?;
                    let spec = self.equations()?;
                    self.expect(Tok::Semi)?;
                    self.file.specs.push((name, spec));
                }
                "proc" => {
                    let name = self.fresh_name()?;
                    self.expect(Tok::Eq)?;
                    let t = self.proc_term()?;
                    self.expect(Tok::Semi)?;
                    self.file.procs.push((name, t));
                }
                "security" => self.security_section(at)?,
                other => return Err(self.err_at(at, format!("unknown section `{other}`"))),
            }
            self.started = true;
        }
        Ok(())
    }

    fn comm_section(&mut self, at: usize) -> Result<()> {
        self.expect(Tok::LBrace)?;
        let mut entries: Vec<(String, String, String)> = self.file.ctx.comm.entries().map(|(a, b, c)| (a.into(), b.into(), c.into())).collect();
        while !self.eat(&Tok::RBrace) {
            let mut names = Vec::new();
            for sep in [Some(Tok::Bar), Some(Tok::Eq), None] {
                let at = self.pos;
                let n = self.ident()?;
                if !self.is_action(&n) {
                    return Err(self.err_at(at, format!("undeclared action `{n}`")));
                }
                names.push(n);
                if let Some(s) = sep {
                    self.expect(s)?;
                }
            }
            let [a, b, c]: [String; 3] = names.try_into().expect("three names");
            entries.push((a, b, c));
            if !self.eat(&Tok::Comma) && !self.eat(&Tok::Semi) {
                self.expect(Tok::RBrace)?;
                break;
            }
        }
        self.file.ctx.comm = CommFunction::new(entries).map_err(|e| self.err_at(at, e.to_string()))?;
        Ok(())
    }

    fn security_section(&mut self, at: usize) -> Result<()> {
        if self.file.security.is_some() {
            return Err(self.err_at(at, "duplicate `security` section"));
        }
        let mut sec = SecurityDecl::default();
        self.expect(Tok::LBrace)?;
        while !self.eat(&Tok::RBrace) {
            if self.eat_kw("low") {
                self.expect(Tok::Eq)?;
                self.expect(Tok::LBrace)?;
                while !self.eat(&Tok::RBrace) {
                    let at = self.pos;
                    let v = self.ident()?;
                    if !self.is_flex(&v) {
                        return Err(self.err_at(at, format!("undeclared flexible variable `{v}`")));
                    }
                    sec.low.insert(v);
                    if !self.eat(&Tok::Comma) {
                        self.expect(Tok::RBrace)?;
                        break;
                    }
                }
            } else if self.eat_kw("ext") {
                self.expect(Tok::Eq)?;
                sec.ext = self.action_set()?;
            } else {
                return Err(self.err(format!("expected `low` or `ext`, found {}", self.peek().describe())));
            }
            if !self.eat(&Tok::Semi) && !self.eat(&Tok::Comma) {
                self.expect(Tok::RBrace)?;
                break;
            }
        }
        self.file.security = Some(sec);
        Ok(())
    }

    /// `{ v = 1, w = -2 }`, completed over the declared variables.
    fn inline_map(&mut self) -> Result<EvalMap> {
        self.expect(Tok::LBrace)?;
        let at = self.pos;
        let mut m = EvalMap::new();
        while !self.eat(&Tok::RBrace) {
            let vat = self.pos;
            let v = self.ident()?;
            if !self.is_flex(&v) {
                return Err(self.err_at(vat, format!("undeclared flexible variable `{v}`")));
            }
            if m.contains(&v) {
                return Err(self.err_at(vat, format!("`{v}` assigned twice")));
            }
            self.expect(Tok::Eq)?;
            let d = self.literal()?;
            m.insert(&v, d);
            if !self.eat(&Tok::Comma) {
                self.expect(Tok::RBrace)?;
                break;
            }
        }
        self.file
            .ctx
            .vars
            .complete(&m, &self.file.ctx.carrier)
            .map_err(|e| self.err_at(at, e.to_string()))
    }

    fn action_set(&mut self) -> Result<ActionSet> {
        self.expect(Tok::LBrace)?;
        let mut pats = BTreeSet::new();
        while !self.eat(&Tok::RBrace) {
            let at = self.pos;
            if self.eat(&Tok::Star) {
                pats.insert(ActionPattern::All);
            } else {
                let n = self.ident()?;
                if self.eat(&Tok::Assign) {
                    if !self.is_flex(&n) {
                        return Err(self.err_at(at, format!("undeclared flexible variable `{n}`")));
                    }
                    self.expect(Tok::Star)?;
                    pats.insert(ActionPattern::Assign(n));
                } else {
                    if !self.is_action(&n) {
                        return Err(self.err_at(at, format!("undeclared action `{n}`")));
                    }
                    if self.eat(&Tok::Slash) {
                        let k = self.number()?;
                        if k < 0 || !self.file.ctx.declares_action(&n, k as usize) {
                            return Err(self.err_at(at, format!("action `{n}` has no arity {k}")));
                        }
                        pats.insert(ActionPattern::NameArity(n, k as usize));
                    } else {
                        pats.insert(ActionPattern::Name(n));
                    }
                }
            }
            if !self.eat(&Tok::Comma) {
                self.expect(Tok::RBrace)?;
                break;
            }
        }
        Ok(ActionSet(pats))
    }

    // ---- recursive specifications ---------------------------------------

    /// Left-hand sides of `{ X = ..., Y = ... }` found by scanning ahead.
    fn scan_equation_names(&self) -> Vec<String> {
        let mut names = Vec::new();
        let mut depth = 0i32;
        let mut i = self.pos;
        let mut at_start = true;
        while i < self.toks.len() {
            let t = &self.toks[i].tok;
            match t {
                Tok::LBrace | Tok::LParen | Tok::LBrack => {
                    depth += 1;
                    at_start = depth == 1 && *t == Tok::LBrace && i == self.pos;
                    i += 1;
                    continue;
                }
                Tok::RBrace | Tok::RParen | Tok::RBrack => {
                    depth -= 1;
                    if depth == 0 {
                        break;
                    }
                }
                Tok::Comma if depth == 1 => {
                    at_start = true;
                    i += 1;
                    continue;
                }
                Tok::Ident(n) if at_start && depth == 1 => {
                    if self.toks.get(i + 1).map(|t| &t.tok) == Some(&Tok::Eq) {
                        names.push(n.clone());
                    }
                }
                Tok::Eof => break,
                _ => {}
            }
            at_start = false;
            i += 1;
        }
        names
    }

    fn equations(&mut self) -> Result<SpecRef> {
        let at = self.pos;
        if *self.peek() != Tok::LBrace {
            return Err(self.err(format!("expected `{{`, found {}", self.peek().describe())));
        }
        let names = self.scan_equation_names();
        for n in &names {
            if self.name_taken(n) || KEYWORDS.contains(&n.as_str()) {
                return Err(self.err_at(at, format!("recursion variable `{n}` clashes with a declared name")));
            }
        }
        self.recvars.push(names.into_iter().collect());
        self.expect(Tok::LBrace)?;
        let mut eqs = Vec::new();
        let result = (|| {
            while !self.eat(&Tok::RBrace) {
                let eq_at = self.pos;
                let x = self.ident()?;
                self.expect(Tok::Eq)?;
                let rhs = desugar_summands(self.proc_term()?);
                if let Err(e) = crate::term::linear_summands(&rhs) {
                    return Err(self.err_at(eq_at, format!("equation for {x}: {e}")));
                }
                eqs.push((x, rhs));
                if !self.eat(&Tok::Comma) {
                    self.expect(Tok::RBrace)?;
                    break;
                }
            }
            Ok(())
        })();
        self.recvars.pop();
        result?;
        let spec = RecSpec::new(eqs).map_err(|e| self.err_at(at, e.to_string()))?;
        if !is_guarded_linear_spec(&spec) {
            let cycle = unguarded_cycle(&spec).ok().flatten().unwrap_or_default();
            return Err(self.err_at(
                at,
                Error::Guardedness(format!("tau-cycle through {}", cycle.join(", "))).to_string(),
            ));
        }
        Ok(spec.into_ref())
    }

    // ---- process terms --------------------------------------------------

    fn proc_term(&mut self) -> Result<ProcTerm> {
        let l = self.merge_term()?;
        if self.eat(&Tok::Plus) {
            Ok(ProcTerm::alt(l, self.proc_term()?))
        } else {
            Ok(l)
        }
    }

    fn merge_term(&mut self) -> Result<ProcTerm> {
        let l = self.seq_term()?;
        let ctor: fn(ProcTerm, ProcTerm) -> ProcTerm = match self.peek() {
            Tok::Par => ProcTerm::par,
            Tok::LeftMerge => ProcTerm::left_merge,
            Tok::Bar => ProcTerm::comm_merge,
            _ => return Ok(l),
        };
        self.bump();
        Ok(ctor(l, self.merge_term()?))
    }

    fn seq_term(&mut self) -> Result<ProcTerm> {
        let l = self.prefix_term()?;
        if self.eat(&Tok::Dot) {
            Ok(ProcTerm::seq(l, self.seq_term()?))
        } else {
            Ok(l)
        }
    }

    fn prefix_term(&mut self) -> Result<ProcTerm> {
        if self.eat(&Tok::LBrack) {
            let c = self.condition()?;
            self.expect(Tok::RBrack)?;
            self.expect(Tok::Arrow)?;
            let body = self.seq_term()?;
            return Ok(ProcTerm::guard(c, body));
        }
        self.atom_term()
    }

    fn parenthesized(&mut self) -> Result<ProcTerm> {
        self.expect(Tok::LParen)?;
        let t = self.proc_term()?;
        self.expect(Tok::RParen)?;
        Ok(t)
    }

    fn atom_term(&mut self) -> Result<ProcTerm> {
        let at = self.pos;
        let name = match self.peek().clone() {
            Tok::LParen => return self.parenthesized(),
            Tok::Ident(n) => n,
            other => return Err(self.err(format!("expected a process term, found {}", other.describe()))),
        };
        self.bump();
        match name.as_str() {
            "delta" => return Ok(ProcTerm::Delta),
            "epsilon" => return Ok(ProcTerm::Eps),
            "tau" => return Ok(ProcTerm::tau()),
            "encap" => {
                let h = self.action_set()?;
                return Ok(ProcTerm::encap(h, self.parenthesized()?));
            }
            "hide" => {
                let i = self.action_set()?;
                return Ok(ProcTerm::abstr(i, self.parenthesized()?));
            }
            "eval" => {
                let sigma = self.eval_map()?;
                return Ok(ProcTerm::eval(sigma, self.parenthesized()?));
            }
            "rec" => {
                let xat = self.pos;
                let x = self.ident()?;
                self.expect_kw("where")?;
                let spec = if *self.peek() == Tok::LBrace {
                    self.equations()?
                } else {
                    let sat = self.pos;
                    let e = self.ident()?;
                    self.file
                        .spec(&e)
                        .cloned()
                        .ok_or_else(|| self.err_at(sat, format!("undeclared recursive specification `{e}`")))?
                };
                if !spec.contains(&x) {
                    return Err(self.err_at(xat, format!("`{x}` is not a variable of the specification")));
                }
                return Ok(ProcTerm::Rec(x, spec));
            }
            kw if KEYWORDS.contains(&kw) => return Err(self.err_at(at, format!("unexpected keyword `{kw}`"))),
            _ => {}
        }
        if self.is_recvar(&name) {
            return Ok(ProcTerm::RecVar(name));
        }
        if self.is_flex(&name) {
            if !self.eat(&Tok::Assign) {
                return Err(self.err_at(at, format!("flexible variable `{name}` used as a process; expected `:=`")));
            }
            let e = self.data_after_assign()?;
            return Ok(ProcTerm::Act(Action::Assign(name, e)));
        }
        if self.is_action(&name) {
            if *self.peek() == Tok::LParen {
                self.bump();
                let mut args = vec![self.data()?];
                while self.eat(&Tok::Comma) {
                    args.push(self.data()?);
                }
                self.expect(Tok::RParen)?;
                if !self.file.ctx.declares_action(&name, args.len()) {
                    return Err(self.err_at(at, format!("action `{name}` is not declared with arity {}", args.len())));
                }
                return Ok(ProcTerm::Act(Action::Param(name, args)));
            }
            if !self.file.ctx.declares_action(&name, 0) {
                return Err(self.err_at(at, format!("action `{name}` requires data arguments")));
            }
            return Ok(ProcTerm::basic(&name));
        }
        if let Some(t) = self.file.proc(&name) {
            return Ok(t.clone());
        }
        Err(self.err_at(at, format!("undeclared identifier `{name}`")))
    }

    fn eval_map(&mut self) -> Result<EvalMap> {
        if let (Tok::LBrace, Tok::Ident(n), Tok::RBrace) = (self.peek(), self.peek_at(1), self.peek_at(2)) {
            let n = n.clone();
            let at = self.pos + 1;
            if let Some(m) = self.file.maps.get(&n) {
                let m = m.clone();
                self.pos += 3;
                return Ok(m);
            }
            return Err(self.err_at(at, format!("undeclared evaluation map `{n}`")));
        }
        self.inline_map()
    }

    // ---- data -----------------------------------------------------------

    /// Right-hand side of an assignment. A `+` continues the data term only when
    /// what follows can start a data term; otherwise it is alternative composition.
    fn data_after_assign(&mut self) -> Result<DataTerm> {
        let mut l = self.data_product()?;
        loop {
            let op = match self.peek().clone() {
                Tok::Minus => BinOp::Sub,
                Tok::Plus if self.data_follows(1) => BinOp::Add,
                _ => return Ok(l),
            };
            self.bump();
            let r = self.data_product()?;
            l = DataTerm::bin(op, l, r);
        }
    }

    fn data_follows(&mut self, k: usize) -> bool {
        match self.peek_at(k).clone() {
            Tok::Num(_) | Tok::Minus => true,
            Tok::Ident(n) => {
                (self.is_flex(&n) && *self.peek_at(k + 1) != Tok::Assign) || self.bound.contains(&n)
            }
            Tok::LParen => {
                let save = self.pos;
                self.pos += k;
                let ok = self.data_factor().is_ok();
                self.pos = save;
                ok
            }
            _ => false,
        }
    }

    fn data(&mut self) -> Result<DataTerm> {
        let mut l = self.data_product()?;
        loop {
            let op = match self.peek() {
                Tok::Plus => BinOp::Add,
                Tok::Minus => BinOp::Sub,
                _ => return Ok(l),
            };
            self.bump();
            let r = self.data_product()?;
            l = DataTerm::bin(op, l, r);
        }
    }

    fn data_product(&mut self) -> Result<DataTerm> {
        let mut l = self.data_factor()?;
        while self.eat(&Tok::Star) {
            let r = self.data_factor()?;
            l = DataTerm::bin(BinOp::Mul, l, r);
        }
        Ok(l)
    }

    fn data_factor(&mut self) -> Result<DataTerm> {
        let at = self.pos;
        match self.peek().clone() {
            Tok::Num(_) | Tok::Minus => Ok(DataTerm::Lit(self.literal()?)),
            Tok::LParen => {
                self.bump();
                let e = self.data()?;
                self.expect(Tok::RParen)?;
                Ok(e)
            }
            Tok::Ident(n) => {
                self.bump();
                if self.bound.contains(&n) {
                    Ok(DataTerm::Var(n))
                } else if self.is_flex(&n) {
                    Ok(DataTerm::Flex(n))
                } else {
                    Err(self.err_at(at, format!("`{n}` is not a flexible or bound data variable")))
                }
            }
            other => Err(self.err(format!("expected a data term, found {}", other.describe()))),
        }
    }

    // ---- conditions -----------------------------------------------------

    fn condition(&mut self) -> Result<Condition> {
        for (kw, q) in [("forall", true), ("exists", false)] {
            if self.eat_kw(kw) {
                let at = self.pos;
                let x = self.ident()?;
                if self.name_taken(&x) {
                    return Err(self.err_at(at, format!("bound variable `{x}` clashes with a declared name")));
                }
                self.expect(Tok::Dot)?;
                self.bound.push(x.clone());
                let body = self.condition();
                self.bound.pop();
                let body = Box::new(body?);
                return Ok(if q { Condition::Forall(x, body) } else { Condition::Exists(x, body) });
            }
        }
        let l = self.cond_or()?;
        if self.eat(&Tok::Arrow) {
            Ok(Condition::implies(l, self.condition()?))
        } else if self.eat(&Tok::Iff) {
            Ok(Condition::iff(l, self.condition()?))
        } else {
            Ok(l)
        }
    }

    fn cond_or(&mut self) -> Result<Condition> {
        let mut l = self.cond_and()?;
        while self.eat_kw("or") {
            l = Condition::or(l, self.cond_and()?);
        }
        Ok(l)
    }

    fn cond_and(&mut self) -> Result<Condition> {
        let mut l = self.cond_not()?;
        while self.eat_kw("and") {
            l = Condition::and(l, self.cond_not()?);
        }
        Ok(l)
    }

    fn cond_not(&mut self) -> Result<Condition> {
        if self.eat_kw("not") {
            return Ok(Condition::not(self.cond_not()?));
        }
        if self.eat_kw("true") {
            return Ok(Condition::True);
        }
        if self.eat_kw("false") {
            return Ok(Condition::False);
        }
        if *self.peek() == Tok::LParen {
            let save = self.pos;
            if let Ok(c) = self.relation() {
                return Ok(c);
            }
            self.pos = save;
            self.bump();
            let c = self.condition()?;
            self.expect(Tok::RParen)?;
            return Ok(c);
        }
        self.relation()
    }

    fn relation(&mut self) -> Result<Condition> {
        let l = self.data()?;
        let op = match self.peek() {
            Tok::Eq => RelOp::Eq,
            Tok::Ne => RelOp::Ne,
            Tok::Lt => RelOp::Lt,
            Tok::Le => RelOp::Le,
            Tok::Gt => RelOp::Gt,
            Tok::Ge => RelOp::Ge,
            other => return Err(self.err(format!("expected a comparison, found {}", other.describe()))),
        };
        self.bump();
        let r = self.data()?;
        Ok(Condition::rel(op, l, r))
    }
}

/// Writes the bare summand forms `alpha . X` and `epsilon` as `[true] -> ...`.
fn desugar_summands(t: ProcTerm) -> ProcTerm {
    match t {
        ProcTerm::Alt(l, r) => ProcTerm::alt(desugar_summands(*l), desugar_summands(*r)),
        ProcTerm::Eps => ProcTerm::exit_summand(Condition::True),
        ProcTerm::Seq(a, x) if matches!((&*a, &*x), (ProcTerm::Act(_), ProcTerm::RecVar(_))) => {
            ProcTerm::guard(Condition::True, ProcTerm::Seq(a, x))
        }
        other => other,
    }
}

#[cfg(test)]
mod tests;
