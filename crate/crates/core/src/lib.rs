//! Time-averages of observables along trajectories of quasiperiodically
//! forced systems, joint level-set partitions of initial-condition slices,
//! and boundedness verdicts for the resulting invariant sets.
//!
//! The crate is organised bottom-up:
//!
//! - [`models`]: built-in vector fields (forced harmonic oscillator,
//!   dissipative scalar system, reduced swing model of a loop power grid)
//!   with their closed-form oracles.
//! - [`integrators`]: fixed-step RK4 and a fourth-order symplectic
//!   composition applied to the time-augmented Hamiltonian.
//! - [`averaging`]: trapezoidal running averages, convergence diagnostics
//!   and the escape predicate.
//! - [`partition`]: parallel grid sweeps, joint binning of averaged fields
//!   and boundedness reports.
//! - [`config`], [`fieldfile`], [`render`]: run configuration, persistent
//!   formats and PPM rasters used by the `qperg` command-line tool.

pub mod averaging;
pub mod config;
pub mod error;
pub mod fieldfile;
pub mod integrators;
pub mod models;
pub mod partition;
pub mod presets;
pub mod render;

pub use error::{Error, Result};
