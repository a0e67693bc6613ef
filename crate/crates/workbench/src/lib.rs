//! Scenario runner for the `argprin_core` toolkit: load a scenario (a JSON file
//! or a built-in), run it, and write JSON, CSV and SVG reports.

pub mod builtins;
pub mod emit;
pub mod expr;
pub mod report;
pub mod runner;
pub mod scenario;

pub use emit::{emit, Format};
pub use report::Report;
pub use runner::{run, RunError};
pub use scenario::{load_scenario, parse_scenario, LoadError, Scenario};
