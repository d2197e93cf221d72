//! Command line, file formats and parallel drivers for `ternisd-core`.

pub mod cli;
pub mod format;
pub mod parallel;
pub mod report;
