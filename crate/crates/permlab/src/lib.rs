//! File formats, shared caches and the `permlab` command line for
//! [`permlab_core`].

pub mod cli;
pub mod error;
pub mod format;
pub mod memo;
pub mod report;
pub mod threads;

pub use error::CliError;
pub use memo::SharedMemo;
