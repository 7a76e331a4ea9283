//! File formats, verification suites and the command-line front end of the
//! sine polarity toolkit.

pub mod cli;
pub mod descriptor;
pub mod error;
pub mod report;
pub mod suite;
pub mod zoo;

pub use error::{Error, Result};
