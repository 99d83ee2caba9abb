//! Parser and static interpreter for the drone-control DSL.
//!
//! The interpreter is the ground-truth oracle: it turns code text into an
//! [`ExecutionTrace`] of NED pose deltas, and renders that trace as the
//! semantic and numerical baseline observations.

pub mod ast;
mod error;
mod exec;
mod lexer;
mod mutate;
mod parser;
mod printer;
mod render;
mod state;

pub use ast::{Api, Program, Span};
pub use error::{MutateError, ParseError, YawError};
pub use exec::{
    execute, transitions_of, Action, ActionKind, ExecConfig, ExecutionLimits, ExecutionTrace, Fault, FaultKind,
    FaultMode,
};
pub use mutate::{apply as apply_mutation, mutate, mutate_detailed, mutate_with, mutation_sites, Mutation, MutationSite};
pub use parser::parse;
pub use printer::to_source;
pub use render::{format_number, parse_narration, render_faults, render_numerical, render_semantic, NO_ACTIONS};
pub use state::{normalize_yaw, transitions_match, yaw_delta, DroneState, Tolerance, Transition};

/// Parse and execute in one step.
pub fn run_source(source: &str, initial: DroneState, config: &ExecConfig) -> Result<ExecutionTrace, ParseError> {
    parse(source).map(|p| execute(&p, initial, config))
}
