//! File formats, JSON reports, parallel execution and the command-line front
//! end for `nncl-core`.

pub mod cli;
pub mod io;
pub mod parallel;
pub mod report;

pub use parallel::Rayon;
