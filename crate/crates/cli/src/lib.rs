//! Configuration, example registry, orchestration and serialization behind
//! the `horizon-lab` binary.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod examples;
pub mod output;
pub mod pipeline;

pub use config::{build_problem, parse_config, AnalysisConfig, ConfigError, Problem};
pub use examples::{emit_example, list_examples, ExampleParams};
pub use pipeline::{analyze, Analysis};

/// Process exit codes.
pub mod exit {
    pub const OK: i32 = 0;
    pub const CONFIG: i32 = 1;
    pub const PARTIAL: i32 = 2;
}
