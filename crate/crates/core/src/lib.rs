//! Corrective drone-code generation with static text-based simulation.
//!
//! A code generator writes drone-control code for a task, a simulator turns
//! the code into a trajectory observation without running it, and an
//! evaluator compares the observation with the task and feeds mismatches back
//! to the generator. The deterministic [`interpreter`] doubles as ground-truth
//! oracle and as the numerical/semantic baselines.

pub mod evalbench;
pub mod interpreter;
pub mod llm;
pub mod pipeline;
pub mod prompts;
pub mod roles;
