//! Continuous-time quantum-walk search for a marked vertex of the complete
//! graph, for the linear walk and for Gross-Pitaevskii (cubic nonlinear)
//! walks with repulsive or attractive interactions.
//!
//! * [`model`]: Hamiltonians, initial states, subspace embedding.
//! * [`closed_form`]: exact linear solution for any jumping rate.
//! * [`integrator`]: RK4 propagation in full space or the 2-D subspace.
//! * [`conservation`]: energy functionals and their drift along runs.
//! * [`experiments`]: peaks, thresholds, runtime tables, figure grids.
//! * [`cli`]: the `qwsearch` command line.

// `!(x > 0.0)` is used on purpose so that NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod closed_form;
pub mod conservation;
pub mod error;
pub mod experiments;
pub mod integrator;
pub mod model;

pub use error::{Result, SearchError};
pub use num_complex::Complex64 as C64;
