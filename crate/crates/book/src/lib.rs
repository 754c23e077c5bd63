// mdbook can't run its code listings as tests, so each chapter is pulled in
// as the docs of an empty module and `cargo test --doc` runs them instead.

#[doc = include_str!("../../../book/src/introduction.md")]
pub mod introduction {}
#[doc = include_str!("../../../book/src/consumption.md")]
pub mod consumption {}
#[doc = include_str!("../../../book/src/provisioning.md")]
pub mod provisioning {}
#[doc = include_str!("../../../book/src/wpt.md")]
pub mod wpt {}
#[doc = include_str!("../../../book/src/simulation.md")]
pub mod simulation {}
#[doc = include_str!("../../../book/src/cli.md")]
pub mod cli {}
