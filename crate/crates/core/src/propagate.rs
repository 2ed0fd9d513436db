//! Slice propagators: the common interface the parallel-in-time drivers use
//! to push a state across one time slice.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::linalg;
use crate::ode::{self, LinearSystem, ScalarIvp, Slice, TimeSliceDecomposition};

/// A state that can be handed between slices.
pub trait StateVector: Clone + Send + Sync + fmt::Debug {
    /// Number of doubles in one message carrying this state.
    fn len(&self) -> usize;

    /// Parareal update `coarse_new + fine_old - coarse_old`.
    fn correction(coarse_new: &Self, fine_old: &Self, coarse_old: &Self) -> Self;

    fn to_vec(&self) -> Vec<f64>;

    fn message_bytes(&self) -> usize {
        8 * self.len()
    }
}

impl StateVector for f64 {
    fn len(&self) -> usize {
        1
    }

    fn correction(coarse_new: &Self, fine_old: &Self, coarse_old: &Self) -> Self {
        coarse_new + fine_old - coarse_old
    }

    fn to_vec(&self) -> Vec<f64> {
        vec![*self]
    }
}

impl StateVector for Vec<f64> {
    fn len(&self) -> usize {
        Vec::len(self)
    }

    fn correction(coarse_new: &Self, fine_old: &Self, coarse_old: &Self) -> Self {
        coarse_new
            .iter()
            .zip(fine_old)
            .zip(coarse_old)
            .map(|((g, f), o)| g + f - o)
            .collect()
    }

    fn to_vec(&self) -> Vec<f64> {
        self.clone()
    }
}

/// Pushes a state across a slice with the slice's own step count.
pub trait Propagator: Sync {
    type State: StateVector;

    fn propagate(&self, state: &Self::State, slice: &Slice) -> Result<Self::State>;

    /// Exact solution at time `t`, when known.
    fn exact(&self, _t: f64) -> Option<Self::State> {
        None
    }
}

impl Propagator for ScalarIvp {
    type State = f64;

    fn propagate(&self, state: &f64, slice: &Slice) -> Result<f64> {
        ode::integrate_over(|y: &f64, t, h| self.be_step(*y, t, h), *state, slice)
    }

    fn exact(&self, t: f64) -> Option<f64> {
        ScalarIvp::exact(self, t)
    }
}

/// A linear evolution whose slice map is affine in the initial state.
pub trait AffineEvolution: Sync {
    fn dim(&self) -> usize;

    /// Advance across the slice; `forced = false` drops the inhomogeneous term.
    fn advance(&self, state: &[f64], slice: &Slice, forced: bool) -> Result<Vec<f64>>;

    /// True when there is no inhomogeneous term, so the affine offset is zero.
    fn is_homogeneous(&self) -> bool {
        false
    }

    fn exact_state(&self, _t: f64) -> Option<Vec<f64>> {
        None
    }
}

impl<E: AffineEvolution> Propagator for E {
    type State = Vec<f64>;

    fn propagate(&self, state: &Vec<f64>, slice: &Slice) -> Result<Vec<f64>> {
        self.advance(state, slice, true)
    }

    fn exact(&self, t: f64) -> Option<Vec<f64>> {
        self.exact_state(t)
    }
}

type ExactFn = Arc<dyn Fn(f64) -> Vec<f64> + Send + Sync>;

/// Fully implicit backward Euler on a [`LinearSystem`].
#[derive(Clone)]
pub struct BackwardEuler<S> {
    pub system: S,
    exact: Option<ExactFn>,
}

impl<S: fmt::Debug> fmt::Debug for BackwardEuler<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("BackwardEuler")
            .field("system", &self.system)
            .field("exact", &self.exact.is_some())
            .finish()
    }
}

impl<S: LinearSystem> BackwardEuler<S> {
    pub fn new(system: S) -> Self {
        Self { system, exact: None }
    }

    pub fn with_exact<F>(mut self, exact: F) -> Self
    where
        F: Fn(f64) -> Vec<f64> + Send + Sync + 'static,
    {
        self.exact = Some(Arc::new(exact));
        self
    }
}

impl<S: LinearSystem> AffineEvolution for BackwardEuler<S> {
    fn dim(&self) -> usize {
        self.system.dim()
    }

    fn advance(&self, state: &[f64], slice: &Slice, forced: bool) -> Result<Vec<f64>> {
        if state.len() != self.dim() {
            return Err(Error::LengthMismatch {
                expected: self.dim(),
                got: state.len(),
            });
        }
        let sys = &self.system;
        ode::integrate_over(
            |y: &Vec<f64>, t, h| {
                if forced {
                    ode::be_step_linear(sys, y, t, h)
                } else {
                    ode::be_step_linear_homogeneous(sys, y, t, h)
                }
            },
            state.to_vec(),
            slice,
        )
    }

    fn exact_state(&self, t: f64) -> Option<Vec<f64>> {
        self.exact.as_ref().map(|e| e(t))
    }
}

/// Sequential single-worker reference across every slice of `decomp`.
pub fn serial_run<P: Propagator + ?Sized>(
    prop: &P,
    y0: &P::State,
    decomp: &TimeSliceDecomposition,
) -> Result<P::State> {
    decomp
        .slices()
        .iter()
        .try_fold(y0.clone(), |y, slice| prop.propagate(&y, slice))
}

/// Max-norm distance between two states, relative to `reference`.
pub fn relative_distance<S: StateVector>(state: &S, reference: &S) -> f64 {
    linalg::rel_max_diff(&state.to_vec(), &reference.to_vec())
}

/// Absolute max-norm distance between two states.
pub fn distance<S: StateVector>(state: &S, reference: &S) -> f64 {
    linalg::max_abs_diff(&state.to_vec(), &reference.to_vec())
}
