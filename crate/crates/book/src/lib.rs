//! The chapters of the guide in `book/src`, included here so that `cargo test`
//! runs every Rust snippet they contain.

#[doc = include_str!("../../../book/src/introduction.md")]
pub mod introduction {}

#[doc = include_str!("../../../book/src/strategies.md")]
pub mod strategies {}

#[doc = include_str!("../../../book/src/phase_space.md")]
pub mod phase_space {}

#[doc = include_str!("../../../book/src/risk.md")]
pub mod risk {}

#[doc = include_str!("../../../book/src/clearing.md")]
pub mod clearing {}

#[doc = include_str!("../../../book/src/auctions.md")]
pub mod auctions {}

#[doc = include_str!("../../../book/src/zeno.md")]
pub mod zeno {}

#[doc = include_str!("../../../book/src/cli.md")]
pub mod cli {}

#[doc = include_str!("../../../README.md")]
pub mod readme {}
