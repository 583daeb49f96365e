//! Files, rendering and the command-line interface for `opexp-core`.

pub mod cli;
pub mod dump;
pub mod matrix;
pub mod problem_file;
pub mod render;

pub use cli::run;
