//! Command-line front end of `fdem-core`: JSON configs, text data formats and
//! the `forward`, `synth`, `invert` and `compare` commands.

pub mod commands;
pub mod config;
pub mod format;

pub use config::RunConfig;
