//! Command-line front end.
//!
//! Exit status: 0 for success, equivalence or a holding property; 1 for
//! inequivalence or a failing property; 2 for usage, input or limit errors.

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Parser, Subcommand};
use serde_json::{json, Value};

use crate::bisim::{conjecture_experiment, rooted_ab_bisim, rooted_branching_bisim, BisimResult};
use crate::data::Carrier;
use crate::error::{Error, Result};
use crate::gen::GenConfig;
use crate::linearize::{analyze_clusters, apply_cfar, linearize, normalize_bool_conditional, prove_equal, ProofOutcome};
use crate::parser::{parse_spec, parse_term_in, SpecFile};
use crate::security::{check_dnii, derive_sets, Dnii, SecuritySpec};
use crate::sos::{build_cond_lts, build_lts};
use crate::term::ProcTerm;

#[derive(Debug, Parser)]
#[command(name = "deacp", version, about = "Workbench for an imperative process algebra")]
pub struct Cli {
    /// Machine-readable output.
    #[arg(long, global = true)]
    pub json: bool,
    /// Lower bound of the data carrier, overriding the file.
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub lo: Option<i64>,
    /// Upper bound of the data carrier, overriding the file.
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub hi: Option<i64>,
    /// Maximum number of states per transition system.
    #[arg(long, global = true, env = "DEACP_STATE_BOUND")]
    pub state_bound: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Parse a file and print its declarations.
    Parse { file: PathBuf },
    /// Transition system of a process.
    Lts {
        file: PathBuf,
        #[arg(long)]
        process: String,
        /// Condition-labelled instead of map-indexed transitions.
        #[arg(long)]
        conditional: bool,
    },
    /// Rooted branching bisimilarity.
    Bisim {
        file: PathBuf,
        #[arg(long)]
        left: String,
        #[arg(long)]
        right: String,
    },
    /// Rooted ab-bisimilarity over the condition-labelled systems.
    AbBisim {
        file: PathBuf,
        #[arg(long)]
        left: String,
        #[arg(long)]
        right: String,
    },
    /// Guarded linear specification with its certificate.
    Linearize {
        file: PathBuf,
        #[arg(long)]
        process: String,
        /// Print every lemma of the certificate.
        #[arg(long)]
        certificate: bool,
    },
    /// Clusters of a specification and the cluster rule at one variable.
    Cfar {
        file: PathBuf,
        #[arg(long)]
        spec: String,
        #[arg(long)]
        var: String,
        /// Hidden actions, as inside `hide{...}`.
        #[arg(long)]
        hide: String,
    },
    /// Equational proof of two processes, or a distinguishing counterexample.
    Prove {
        file: PathBuf,
        #[arg(long)]
        left: String,
        #[arg(long)]
        right: String,
        #[arg(long)]
        certificate: bool,
    },
    /// Data non-interference with the file's security declarations.
    Dnii {
        file: PathBuf,
        #[arg(long)]
        process: String,
    },
    /// Compares rooted branching and rooted ab-bisimilarity on generated pairs.
    Conjecture {
        /// Declarations to generate from; a small built-in signature otherwise.
        file: Option<PathBuf>,
        #[arg(long, default_value_t = 500)]
        pairs: usize,
        #[arg(long, default_value_t = 3)]
        depth: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

const DEFAULT_SIGNATURE: &str = "domain -4..3;\nvars u, v;\nactions a, b, c;\ncomm { a | b = c }\n";

/// Whether the command's question was answered positively.
enum Verdict {
    Yes,
    No,
}

struct Session<'a> {
    json: bool,
    out: &'a mut dyn Write,
}

impl Session<'_> {
    fn emit(&mut self, value: Value, text: String) -> Result<()> {
        let s = if self.json {
            serde_json::to_string_pretty(&value).expect("plain data")
        } else {
            text
        };
        writeln!(self.out, "{}", s.trim_end()).map_err(|e| Error::Io(format!("cannot write output: {e}")))
    }
}

fn load(cli: &Cli, file: Option<&PathBuf>) -> Result<SpecFile> {
    let text = match file {
        Some(p) => std::fs::read_to_string(p).map_err(|e| Error::Io(format!("{}: {e}", p.display())))?,
        None => DEFAULT_SIGNATURE.to_string(),
    };
    let mut f = parse_spec(&text)?;
    if cli.lo.is_some() || cli.hi.is_some() {
        let c = f.ctx.carrier;
        f.ctx.carrier = Carrier::new(cli.lo.unwrap_or(c.lo), cli.hi.unwrap_or(c.hi))?;
    }
    if let Some(b) = cli.state_bound {
        f.ctx.limits.states = b;
    }
    Ok(f)
}

fn bisim_text(r: &BisimResult) -> String {
    match &r.counterexample {
        None if r.equivalent => format!("equivalent (relation of {} pairs)", r.relation.len()),
        None => "not equivalent".to_string(),
        Some(ce) => format!("not equivalent: {ce}"),
    }
}

fn verdict(yes: bool) -> Verdict {
    if yes {
        Verdict::Yes
    } else {
        Verdict::No
    }
}

fn parse_cmd(f: &SpecFile, s: &mut Session) -> Result<Verdict> {
    let c = &f.ctx;
    let procs: Vec<(String, String)> = f.procs.iter().map(|(n, t)| (n.clone(), t.to_string())).collect();
    let specs: Vec<(String, String)> = f.specs.iter().map(|(n, e)| (n.clone(), e.spec().to_string())).collect();
    let actions: Vec<String> = c
        .actions
        .iter()
        .flat_map(|(a, ks)| ks.iter().map(move |k| if *k == 0 { a.clone() } else { format!("{a}/{k}") }))
        .collect();
    let comm: Vec<String> = c.comm.entries().map(|(a, b, r)| format!("{a} | {b} = {r}")).collect();
    let security = f.security.as_ref().map(|d| json!({"low": d.low, "ext": d.ext.to_string()}));
    let value = json!({
        "domain": [c.carrier.lo, c.carrier.hi],
        "vars": c.vars.names(),
        "actions": actions,
        "comm": comm,
        "procs": procs.iter().map(|(n, t)| json!({"name": n, "term": t})).collect::<Vec<_>>(),
        "specs": specs.iter().map(|(n, e)| json!({"name": n, "equations": e})).collect::<Vec<_>>(),
        "security": security,
    });
    let mut text = format!("domain {}..{};\n", c.carrier.lo, c.carrier.hi);
    if !c.vars.is_empty() {
        text.push_str(&format!("vars {};\n", c.vars.names().join(", ")));
    }
    if !actions.is_empty() {
        text.push_str(&format!("actions {};\n", actions.join(", ")));
    }
    if !comm.is_empty() {
        text.push_str(&format!("comm {{ {} }}\n", comm.join(", ")));
    }
    for (n, e) in &specs {
        text.push_str(&format!("spec {n} = {e};\n"));
    }
    for (n, t) in &procs {
        text.push_str(&format!("proc {n} = {t};\n"));
    }
    if let Some(d) = &f.security {
        let low: Vec<&str> = d.low.iter().map(String::as_str).collect();
        text.push_str(&format!("security {{ low = {{ {} }}; ext = {} }}\n", low.join(", "), d.ext));
    }
    s.emit(value, text)?;
    Ok(Verdict::Yes)
}

fn lts_cmd(f: &SpecFile, t: &ProcTerm, conditional: bool, s: &mut Session) -> Result<Verdict> {
    let mut text = String::new();
    let value = if conditional {
        let l = build_cond_lts(t, &f.ctx)?;
        text.push_str(&format!("{} states, {} transitions, root {}\n", l.num_states(), l.transitions.len(), l.root));
        for (i, st) in l.states.iter().enumerate() {
            text.push_str(&format!("  {i}: {st}\n"));
        }
        for tr in &l.transitions {
            text.push_str(&format!("  {} --[{}] {}--> {}\n", tr.from, tr.cond, tr.action, tr.to));
        }
        for (st, c) in &l.terminating {
            text.push_str(&format!("  {st} terminates if {c}\n"));
        }
        l.to_json()
    } else {
        let l = build_lts(t, &f.ctx)?;
        text.push_str(&format!(
            "{} states, {} transitions, {} maps, root {}\n",
            l.num_states(),
            l.transitions.len(),
            l.maps.len(),
            l.root
        ));
        for (i, st) in l.states.iter().enumerate() {
            text.push_str(&format!("  {i}: {st}\n"));
        }
        for tr in &l.transitions {
            text.push_str(&format!("  {} --{}--> {} under {}\n", tr.from, tr.action, tr.to, l.maps[tr.map]));
        }
        for &(st, m) in &l.terminating {
            text.push_str(&format!("  {st} terminates under {}\n", l.maps[m]));
        }
        l.to_json()
    };
    s.emit(value, text)?;
    Ok(Verdict::Yes)
}

fn certificate_json(cert: &crate::linearize::ProofCertificate, f: &SpecFile) -> Result<(Value, String)> {
    let report = cert.replay(&f.ctx)?;
    let text = format!(
        "certificate: {} lemmas, {} rewrite steps, {} RSP, {} CFAR, {} decided by bisimulation; replay ok\ncites {}\n",
        report.lemmas,
        report.rewrites,
        report.rsp,
        report.cfar,
        report.oracle,
        cert.cited().into_iter().collect::<Vec<_>>().join(", ")
    );
    Ok((json!({"replay": report, "certificate": cert.to_json()}), text))
}

fn run_command(cli: &Cli, s: &mut Session) -> Result<Verdict> {
    match &cli.command {
        Command::Parse { file } => parse_cmd(&load(cli, Some(file))?, s),
        Command::Lts { file, process, conditional } => {
            let f = load(cli, Some(file))?;
            lts_cmd(&f, &f.resolve_term(process)?, *conditional, s)
        }
        Command::Bisim { file, left, right } => {
            let f = load(cli, Some(file))?;
            let l1 = build_lts(&f.resolve_term(left)?, &f.ctx)?;
            let l2 = build_lts(&f.resolve_term(right)?, &f.ctx)?;
            let r = rooted_branching_bisim(&l1, &l2)?;
            s.emit(r.to_json(), bisim_text(&r))?;
            Ok(verdict(r.equivalent))
        }
        Command::AbBisim { file, left, right } => {
            let f = load(cli, Some(file))?;
            let c1 = build_cond_lts(&f.resolve_term(left)?, &f.ctx)?;
            let c2 = build_cond_lts(&f.resolve_term(right)?, &f.ctx)?;
            let decl = c1.decl.union(&c2.decl);
            let r = rooted_ab_bisim(&c1, &c2, &decl, &f.ctx)?;
            s.emit(r.to_json(), bisim_text(&r))?;
            Ok(verdict(r.equivalent))
        }
        Command::Linearize { file, process, certificate } => {
            let f = load(cli, Some(file))?;
            let t = f.resolve_term(process)?;
            let lin = if t.contains_abstraction() {
                normalize_bool_conditional(&t, &f.ctx)?
            } else {
                linearize(&t, &f.ctx)?
            };
            let (cert, summary) = certificate_json(&lin.certificate, &f)?;
            let mut text = format!("{} = {}\n{summary}", t, lin.constant());
            if *certificate {
                text.push_str(&lin.certificate.to_text());
            }
            let value = json!({
                "term": t.to_string(),
                "constant": lin.constant().to_string(),
                "var": lin.var,
                "spec": lin.spec.spec().to_string(),
                "replay": cert["replay"],
                "certificate": cert["certificate"],
            });
            s.emit(value, text)?;
            Ok(Verdict::Yes)
        }
        Command::Cfar { file, spec, var, hide } => {
            let f = load(cli, Some(file))?;
            let e = f.spec(spec).ok_or_else(|| Error::Declaration(format!("no specification `{spec}`")))?;
            let ProcTerm::Abstr(i, _) = parse_term_in(&format!("hide{{{hide}}}(delta)"), &f)? else {
                unreachable!("parsed an abstraction")
            };
            let analysis = analyze_clusters(e, &i)?;
            let mut text = String::new();
            for c in &analysis.clusters {
                let vars: Vec<&str> = c.vars.iter().map(String::as_str).collect();
                let exits: Vec<String> = c.exits.iter().map(|x| x.to_term().to_string()).collect();
                text.push_str(&format!(
                    "cluster {{{}}}: exits [{}], {}conservative\n",
                    vars.join(", "),
                    exits.join(", "),
                    if c.conservative { "" } else { "not " }
                ));
            }
            let (applied, value) = match apply_cfar(e, var, &i) {
                Ok((rhs, step)) => {
                    let lhs = ProcTerm::seq(ProcTerm::tau(), ProcTerm::abstr(i.clone(), ProcTerm::rec(var, e)));
                    text.push_str(&format!("{lhs} = {rhs}\n"));
                    let v = json!({"clusters": analysis, "lhs": lhs.to_string(), "rhs": rhs.to_string(), "rule": step.rule.name()});
                    (true, v)
                }
                Err(Error::CfarInapplicable(why)) => {
                    text.push_str(&format!("not applicable: {why}\n"));
                    (false, json!({"clusters": analysis, "inapplicable": why}))
                }
                Err(e) => return Err(e),
            };
            s.emit(value, text)?;
            Ok(verdict(applied))
        }
        Command::Prove { file, left, right, certificate } => {
            let f = load(cli, Some(file))?;
            let (t1, t2) = (f.resolve_term(left)?, f.resolve_term(right)?);
            match prove_equal(&t1, &t2, &f.ctx)? {
                ProofOutcome::Proved(cert) => {
                    let (value, summary) = certificate_json(&cert, &f)?;
                    let mut text = format!("proved {t1} = {t2}\n{summary}");
                    if *certificate {
                        text.push_str(&cert.to_text());
                    }
                    s.emit(json!({"proved": true, "replay": value["replay"], "certificate": value["certificate"]}), text)?;
                    Ok(Verdict::Yes)
                }
                ProofOutcome::Refuted(r) => {
                    s.emit(json!({"proved": false, "bisim": r.to_json()}), format!("refuted: {}", bisim_text(&r)))?;
                    Ok(Verdict::No)
                }
            }
        }
        Command::Dnii { file, process } => {
            let f = load(cli, Some(file))?;
            let spec = SecuritySpec::from_file(&f, process)?;
            let sets = derive_sets(&spec, &f.ctx);
            let show = |xs: Vec<String>| format!("{{{}}}", xs.join(", "));
            let high = show(sets.high.iter().cloned().collect());
            let int = show(sets.int.iter().map(ToString::to_string).collect());
            let enc = show(sets.enc.iter().map(ToString::to_string).collect());
            let mut text = format!("HIGH = {high}\nINT = {int}\nENC = {enc}\n");
            let v = check_dnii(&spec, &f.ctx)?;
            match &v {
                Dnii::Holds { comparisons } => text.push_str(&format!("holds ({comparisons} comparisons)\n")),
                Dnii::Fails(leak) => {
                    text.push_str(&format!("fails\n  sigma  = {}\n  sigma' = {}\n", leak.sigma, leak.sigma_prime));
                    let trace = if leak.trace.is_empty() { "(at the root)".to_string() } else { leak.trace.join(" . ") };
                    text.push_str(&format!("  trace: {trace}\n"));
                    text.push_str(&format!("  {}\n", bisim_text(&leak.result)));
                }
            }
            let value = json!({"high": high, "int": int, "enc": enc, "result": v});
            s.emit(value, text)?;
            Ok(verdict(v.holds()))
        }
        Command::Conjecture { file, pairs, depth, seed } => {
            let f = load(cli, file.as_ref())?;
            let cfg = GenConfig::full(&f.ctx);
            let r = conjecture_experiment(*pairs, &cfg, *depth, *seed, &f.ctx);
            let mut text = format!(
                "{} pairs: {} both equivalent, {} both inequivalent, {} rb only, {} rab only, {} skipped\n",
                r.pairs, r.both_equivalent, r.both_inequivalent, r.rb_only, r.rab_only, r.skipped
            );
            for d in &r.divergences {
                text.push_str(&format!("  divergence: {} vs {} (rb {}, rab {})\n", d.left, d.right, d.rb, d.rab));
            }
            s.emit(serde_json::to_value(&r).expect("plain data"), text)?;
            Ok(Verdict::Yes)
        }
    }
}

/// Runs one invocation, writing results to `out` and diagnostics to `err`; returns the exit status.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = e.exit_code();
            let w: &mut dyn Write = if code == 0 { out } else { err };
            let _ = write!(w, "{}", e.render());
            return if code == 0 { 0 } else { 2 };
        }
    };
    let mut s = Session { json: cli.json, out };
    match run_command(&cli, &mut s) {
        Ok(Verdict::Yes) => 0,
        Ok(Verdict::No) => 1,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            2
        }
    }
}
