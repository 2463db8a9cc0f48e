//! Doc-tests for the guide.

#[doc = include_str!("../../../book/src/overview.md")]
pub mod overview {}
#[doc = include_str!("../../../book/src/data.md")]
pub mod data {}
#[doc = include_str!("../../../book/src/terms.md")]
pub mod terms {}
#[doc = include_str!("../../../book/src/semantics.md")]
pub mod semantics {}
#[doc = include_str!("../../../book/src/bisimulation.md")]
pub mod bisimulation {}
#[doc = include_str!("../../../book/src/linearization.md")]
pub mod linearization {}
#[doc = include_str!("../../../book/src/security.md")]
pub mod security {}
#[doc = include_str!("../../../book/src/cli.md")]
pub mod cli {}
