//! Doc-test harness for the book under `book/`.
//!
//! mdbook cannot compile snippets against crate dependencies, so every
//! chapter is included here as module documentation and
//! `cargo test --doc -p alks-scenarios-guide` runs the code blocks. One
//! module per chapter keeps failures attributable to their chapter.

#[doc = include_str!("../../../book/src/introduction.md")]
pub mod introduction {}

#[doc = include_str!("../../../book/src/getting-started.md")]
pub mod getting_started {}

#[doc = include_str!("../../../book/src/recordings.md")]
pub mod recordings {}

#[doc = include_str!("../../../book/src/event-detection.md")]
pub mod event_detection {}

#[doc = include_str!("../../../book/src/scenarios.md")]
pub mod scenarios {}

#[doc = include_str!("../../../book/src/maneuver-models.md")]
pub mod maneuver_models {}

#[doc = include_str!("../../../book/src/export.md")]
pub mod export {}

#[doc = include_str!("../../../book/src/replay-validation.md")]
pub mod replay_validation {}

#[doc = include_str!("../../../book/src/synthetic-data.md")]
pub mod synthetic_data {}

#[doc = include_str!("../../../book/src/file-formats.md")]
pub mod file_formats {}

#[doc = include_str!("../../../book/src/highd-reproduction.md")]
pub mod highd_reproduction {}
