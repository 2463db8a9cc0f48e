//! Linearization with replayable equational certificates.

mod cert;
mod cluster;
mod derive;
mod explore;
mod merge;
mod pairs;
mod rules;


use crate::context::Context;
use crate::error::{Error, Result};
use crate::term::{classify, ProcTerm, SpecRef};

pub use cert::{Dir, Justification, Lemma, ProofCertificate, ReplayReport, Rule, Step};
pub use merge::{prove_equal, ProofOutcome};
pub use pairs::random_rewrites;
pub use cluster::{analyze_clusters, apply_cfar, exits, is_cluster, is_conservative, Cluster, ClusterAnalysis};

/// `t = <var|spec>` with its derivation.
#[derive(Debug, Clone)]
pub struct Linearization {
    pub spec: SpecRef,
    pub var: String,
    pub certificate: ProofCertificate,
}

impl Linearization {
    pub fn constant(&self) -> ProcTerm {
        ProcTerm::rec(&self.var, &self.spec)
    }
}

fn run(t: &ProcTerm, ctx: &Context) -> Result<Linearization> {
    let mut certificate = ProofCertificate::default();
    let (rec, _) = explore::normalize(t, ctx, &mut certificate)?;
    let ProcTerm::Rec(var, spec) = rec else {
        unreachable!("normal forms are recursion constants")
    };
    Ok(Linearization { spec, var, certificate })
}

/// A guarded linear specification for a closed abstraction-free term.
pub fn linearize(t: &ProcTerm, ctx: &Context) -> Result<Linearization> {
    if t.contains_abstraction() {
        return Err(Error::Unsupported(format!("`{t}` contains an abstraction")));
    }
    run(t, ctx)
}

/// A guarded linear specification for a closed term whose conditions are all valid or unsatisfiable.
pub fn normalize_bool_conditional(t: &ProcTerm, ctx: &Context) -> Result<Linearization> {
    if !classify(t, &ctx.carrier, ctx.limits.enumeration)?.bool_conditional {
        return Err(Error::Unsupported(format!("`{t}` has a contingent condition")));
    }
    run(t, ctx)
}
