//! The guide in `book/` is written for mdbook, which cannot build snippets
//! that depend on workspace crates. Each chapter is included here as the doc
//! comment of an empty module so `cargo test --doc` compiles and runs every
//! snippet against the current API.

#[doc = include_str!("../../../book/src/introduction.md")]
pub mod introduction {}
#[doc = include_str!("../../../book/src/spectral-basis.md")]
pub mod spectral_basis {}
#[doc = include_str!("../../../book/src/model.md")]
pub mod model {}
#[doc = include_str!("../../../book/src/delay-history.md")]
pub mod delay_history {}
#[doc = include_str!("../../../book/src/time-integration.md")]
pub mod time_integration {}
#[doc = include_str!("../../../book/src/energy-bounds.md")]
pub mod energy_bounds {}
#[doc = include_str!("../../../book/src/experiments.md")]
pub mod experiments {}
#[doc = include_str!("../../../book/src/cli.md")]
pub mod cli {}
#[doc = include_str!("../../../book/src/verification.md")]
pub mod verification {}
