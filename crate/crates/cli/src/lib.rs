//! Library half of the `ionheat` command-line tool: configuration, file
//! schemas, the analysis pipeline, result documents, and report emission.

pub mod cli;
pub mod config;
pub mod pipeline;
pub mod report;
pub mod resultdoc;
pub mod scanfile;
