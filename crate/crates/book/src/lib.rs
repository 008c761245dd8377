//! The guide's chapters, included as doc comments so `cargo test` compiles
//! and runs every code block in them.

#[doc = include_str!("../../../book/src/introduction.md")]
pub mod introduction {}

#[doc = include_str!("../../../book/src/event-logs.md")]
pub mod event_logs {}

#[doc = include_str!("../../../book/src/process-trees.md")]
pub mod process_trees {}

#[doc = include_str!("../../../book/src/workflow-nets.md")]
pub mod workflow_nets {}

#[doc = include_str!("../../../book/src/alignments.md")]
pub mod alignments {}

#[doc = include_str!("../../../book/src/discovery.md")]
pub mod discovery {}

#[doc = include_str!("../../../book/src/incremental.md")]
pub mod incremental {}

#[doc = include_str!("../../../book/src/sessions.md")]
pub mod sessions {}
