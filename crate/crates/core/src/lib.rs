//! Finite-population permutation statistics.
//!
//! Exact moment formulas for combinatorial sums, concentration bounds with
//! their Monte Carlo domination checks, Stein exchangeable-pair diagnostics,
//! permutation processes and sup-deviations, series regression under
//! sampling without replacement, and two-sample permutation tests. Every
//! analytic quantity is paired with an enumeration or Monte Carlo oracle at
//! desk scale.

pub mod bounds;
pub mod cli;
pub mod clt;
pub mod eigen;
pub mod error;
pub mod gauss;
pub mod io;
pub mod matrix_bounds;
pub mod moments;
pub mod perm;
pub mod process;
pub mod ranks;
pub mod report;
pub mod rng;
pub mod series;
pub mod twosample;
pub mod verify;

pub use error::{Error, Result};
