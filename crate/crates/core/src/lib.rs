//! Synthesis and verification of *direct* heuristic functions for classical
//! planning.
//!
//! The crate covers the full pipeline:
//!
//! * [`pddl`] parses and grounds STRIPS tasks with typing, equality and
//!   negative preconditions.
//! * [`state_space`] exposes grounded tasks and small explicit graphs through
//!   one [`TransitionSystem`](state_space::TransitionSystem) interface.
//! * [`heuristics`] and [`search`] provide the baselines (FF, goal count,
//!   blind, lookup tables) and the two planners (hill climbing, GBFS).
//! * [`validator`] checks the direct property with an early-stopping DFS and
//!   contains exhaustive oracles for the direct and DDA properties.
//! * [`candidate_runtime`], [`synth`] and [`repair`] run the
//!   counterexample-driven repair loop around an LLM.
//! * [`bench`] runs task × heuristic × algorithm grids and writes reports.

pub mod bench;
pub mod candidate_runtime;
pub mod fixtures;
pub mod heuristics;
pub mod pddl;
pub mod repair;
pub mod search;
pub mod state_space;
pub mod synth;
pub mod validator;

pub use heuristics::{Heuristic, HeuristicValue};
pub use pddl::{GroundAction, GroundTask};
pub use state_space::{ExplicitGraph, State, TransitionSystem};
