//! Compiles the chapters of the guide under `book/` so `cargo test` runs
//! their listings as doctests. One module per chapter keeps failures
//! traceable to a file.

#[doc = include_str!("../../../book/src/introduction.md")]
pub mod introduction {}
#[doc = include_str!("../../../book/src/nets.md")]
pub mod nets {}
#[doc = include_str!("../../../book/src/scrambling.md")]
pub mod scrambling {}
#[doc = include_str!("../../../book/src/verification.md")]
pub mod verification {}
#[doc = include_str!("../../../book/src/integrands.md")]
pub mod integrands {}
#[doc = include_str!("../../../book/src/variation.md")]
pub mod variation {}
#[doc = include_str!("../../../book/src/experiments.md")]
pub mod experiments {}
#[doc = include_str!("../../../book/src/cli.md")]
pub mod cli {}
