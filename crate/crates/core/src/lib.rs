//! Parallel-in-time integration with minimal communication.
//!
//! Every time slice builds a map from its initial value to its final value
//! independently; one sequential sweep then composes the maps. A reference
//! parareal driver, PDE test problems and a cost model for the schedule are
//! included for comparison.

pub mod cost_model;
pub mod error;
pub mod harness;
pub mod interp;
pub mod linalg;
pub mod nievergelt;
pub mod ode;
pub mod parareal;
pub mod pde;
pub mod propagate;
pub mod report;

pub use error::{Error, Result};
pub use harness::{ClockMode, ExecConfig};
pub use interp::{InitialValueSpace, NodeKind};
pub use ode::{ScalarIvp, StepPolicy, TimeSliceDecomposition};
pub use report::{Method, RunConfig, RunReport};
