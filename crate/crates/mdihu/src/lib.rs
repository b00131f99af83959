//! Command-line driver, configuration, file formats and a sparse direct
//! solver for [`mdihu_core`].

pub mod cli;
pub mod config;
pub mod fields;
pub mod output;
pub mod runner;
pub mod sparse;

pub use mdihu_core as core;
pub use sparse::SparseLu;
