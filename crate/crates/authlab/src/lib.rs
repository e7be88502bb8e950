//! File formats, staged pipeline and command-line interface around
//! `authlab-core`.

pub mod config;
pub mod failure;
pub mod io;
pub mod modelfile;
pub mod simcache;
pub mod pipeline;
pub mod cli;
