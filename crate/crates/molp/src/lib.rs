//! File formats, reports and the command-line front end for `molp-core`.

pub mod format;
pub mod sdpa;
pub mod report;
pub mod run;
pub mod plot;
pub mod cli;
