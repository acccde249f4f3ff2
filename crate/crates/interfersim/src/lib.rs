//! File formats, parallel sweeps and the command-line front end for
//! [`interfersim_core`].

pub mod cli;
pub mod output;
pub mod parallel;
