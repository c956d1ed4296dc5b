//! Constant-modulus waveform design for MIMO integrated sensing and
//! communication.
//!
//! The crate minimizes a nonsmooth beampattern-plus-correlation objective
//! directly on the unit-modulus manifold with a gradient-sampling descent
//! method, and evaluates the designed waveform's beampattern, correlation
//! sidelobes and bit error rate.

// `!(x > 0.0)` style checks are deliberate: they also reject NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod eval;
pub mod format;
pub mod manifold;
pub mod minnorm;
pub mod objective;
pub mod scenario;
pub mod seed;
pub mod solver;

pub use error::{Error, Result};
pub use manifold::{CMat, TangentVector, WaveformMatrix};
pub use objective::{Objective, ObjectiveBreakdown};
pub use scenario::{Scenario, ScenarioParams, TermWeights};
pub use solver::{solve, SolveStatus, SolveTrace, SolverConfig};
