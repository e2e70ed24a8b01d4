//! Command-line front end: argument handling, JSON and CSV output, and the
//! SVG butterfly renderer.

pub mod export;
pub mod format;
pub mod run;

pub use run::run;
