pub mod axioms;
pub mod cli;
pub mod bisim;
pub mod cond;
pub mod context;
pub mod data;
pub mod error;
pub mod gen;
pub mod linearize;
pub mod parser;
pub mod security;
pub mod sos;
pub mod term;

pub use cond::Condition;
pub use context::{Context, Limits};
pub use data::{Carrier, DataTerm, EvalMap, VarDecl};
pub use error::{Error, Result};
pub use term::{Action, ActionSet, CommFunction, ProcTerm, RecSpec, SpecRef};
