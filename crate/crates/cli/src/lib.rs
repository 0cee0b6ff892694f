//! Command line front end for the collapse model library: scenario files
//! in, CSV tables out, plus a self-check harness over the headline
//! numbers.

pub mod bundled;
pub mod runner;
pub mod scenario;
pub mod verify;
