//! Chaotic echo state networks trained online by FORCE learning.
//!
//! Three readout rules are provided: basic RLS FORCE, composite RLS FORCE
//! (RLS plus a filtered generalized-error term) and composite LMS FORCE.
//! The [`harness`] module runs the Mackey-Glass prediction benchmark end to
//! end; [`io`] and [`plot`] turn its records into CSV and SVG.

pub mod config;
pub mod error;
pub mod harness;
pub mod io;
pub mod learners;
pub mod linalg;
pub mod plot;
pub mod reservoir;
pub mod rng;
pub mod signal;

pub use config::{AutonomousInput, CompositeSign, ExperimentConfig, Method};
pub use error::{Error, Result};
pub use harness::{compare_methods, convergence_step, mse, run_experiment, seed_sweep, RunRecord};
pub use reservoir::{EsnModel, ReservoirState};
