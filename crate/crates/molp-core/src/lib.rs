//! Pareto-optimal extreme points of multiobjective linear programs.
//!
//! For each constraint `i` the problem is encoded as a polynomial system whose
//! integer solutions project onto Pareto-optimal vertices. Each system is relaxed
//! to a moment semidefinite program, solved by a primal-dual interior-point
//! method, and its solutions are read off from multiplication matrices. An exact
//! rational oracle checks every stage.
#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;

pub mod exact;
pub mod extract;
pub mod model;
pub mod moment;
pub mod oracle;
pub mod pipeline;
pub mod poly;
pub mod rational;
pub mod scaling;
pub mod sdp;

pub use model::{validate, verify_sys1, weighted_objective, Diagnostic, MolpProblem, ValidTriplet};
pub use rational::Rational;
