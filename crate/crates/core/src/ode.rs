//! Time-stepping primitives: backward Euler for scalar problems and linear
//! systems, leapfrog for second-order systems, and the slice bookkeeping
//! shared by every parallel-in-time driver.

use std::fmt;
use std::sync::Arc;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::linalg;

/// Relative tolerance when deciding that a width is an integer number of steps.
pub const STEP_COUNT_TOL: f64 = 1e-9;

type ScalarFn2 = Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>;
type ScalarFn1 = Arc<dyn Fn(f64) -> f64 + Send + Sync>;
type ImplicitFn = Arc<dyn Fn(f64, f64, f64) -> Result<f64> + Send + Sync>;

/// Scalar initial value problem `y' = f(t, y)`, `y(t0) = y0` on `[t0, t_final]`.
#[derive(Clone)]
pub struct ScalarIvp {
    rhs: ScalarFn2,
    implicit: Option<ImplicitFn>,
    exact: Option<ScalarFn1>,
    pub t0: f64,
    pub t_final: f64,
    pub y0: f64,
}

impl fmt::Debug for ScalarIvp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ScalarIvp")
            .field("t0", &self.t0)
            .field("t_final", &self.t_final)
            .field("y0", &self.y0)
            .field("closed_form_step", &self.implicit.is_some())
            .field("exact", &self.exact.is_some())
            .finish()
    }
}

impl ScalarIvp {
    pub fn new<F>(rhs: F, t0: f64, t_final: f64, y0: f64) -> Result<Self>
    where
        F: Fn(f64, f64) -> f64 + Send + Sync + 'static,
    {
        if !(t_final > t0) {
            return Err(Error::InvalidArgument(format!(
                "final time {t_final} must exceed start time {t0}"
            )));
        }
        Ok(Self {
            rhs: Arc::new(rhs),
            implicit: None,
            exact: None,
            t0,
            t_final,
            y0,
        })
    }

    /// Attach the exact solution. It must agree with `y0` at `t0`.
    pub fn with_exact<F>(mut self, exact: F) -> Result<Self>
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        let at_start = exact(self.t0);
        if (at_start - self.y0).abs() > 1e-12 {
            return Err(Error::InvalidArgument(format!(
                "exact solution gives {at_start} at t0, expected y0 = {}",
                self.y0
            )));
        }
        self.exact = Some(Arc::new(exact));
        Ok(self)
    }

    /// Replace the Newton solve of the implicit equation with a closed form
    /// `(y, t_next, dt) -> z` solving `z = y + dt f(t_next, z)`.
    pub fn with_implicit_step<F>(mut self, step: F) -> Self
    where
        F: Fn(f64, f64, f64) -> Result<f64> + Send + Sync + 'static,
    {
        self.implicit = Some(Arc::new(step));
        self
    }

    /// `y' = y^2`, `y(0) = 1` on `[0, 1/2]`, exact solution `1/(1 - t)`.
    pub fn riccati() -> Self {
        Self::new(|_, y| y * y, 0.0, 0.5, 1.0)
            .and_then(|p| p.with_exact(|t| 1.0 / (1.0 - t)))
            .expect("model problem is well formed")
            .with_implicit_step(|y, _, dt| be_step_riccati(y, dt))
    }

    pub fn rhs(&self, t: f64, y: f64) -> f64 {
        (self.rhs)(t, y)
    }

    pub fn exact(&self, t: f64) -> Option<f64> {
        self.exact.as_ref().map(|e| e(t))
    }

    pub fn has_exact(&self) -> bool {
        self.exact.is_some()
    }

    /// One backward Euler step from `y` to time `t_next`.
    pub fn be_step(&self, y: f64, t_next: f64, dt: f64) -> Result<f64> {
        match &self.implicit {
            Some(step) => step(y, t_next, dt),
            None => self.newton_step(y, t_next, dt),
        }
    }

    fn newton_step(&self, y: f64, t_next: f64, dt: f64) -> Result<f64> {
        let mut z = y + dt * self.rhs(t_next, y);
        for _ in 0..50 {
            let g = z - y - dt * self.rhs(t_next, z);
            let h = 1e-7 * z.abs().max(1.0);
            let dg = 1.0 - dt * (self.rhs(t_next, z + h) - self.rhs(t_next, z - h)) / (2.0 * h);
            if dg == 0.0 || !dg.is_finite() {
                break;
            }
            let update = g / dg;
            z -= update;
            if update.abs() <= 1e-15 * z.abs().max(1.0) {
                return Ok(z);
            }
        }
        Err(Error::NoConvergence { y, dt })
    }
}

/// Backward Euler step for `y' = y^2`: the root of `z = y + dt z^2` that
/// tends to `y` as `dt -> 0`.
pub fn be_step_riccati(y: f64, dt: f64) -> Result<f64> {
    if !(dt > 0.0) {
        return Err(Error::InvalidArgument(format!("dt must be positive, got {dt}")));
    }
    let disc = 1.0 - 4.0 * dt * y;
    if disc < 0.0 || !disc.is_finite() {
        return Err(Error::NoRealRoot { y, dt });
    }
    // 2y / (1 + sqrt(disc)) is the same root as (1 - sqrt(disc)) / (2 dt)
    // without the cancellation for small dt*y.
    Ok(2.0 * y / (1.0 + disc.sqrt()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Structure {
    Tridiagonal,
    Dense,
}

/// Semi-discrete linear system `y' = A(t) y + b(t)`.
pub trait LinearSystem: Send + Sync {
    fn dim(&self) -> usize;
    fn apply_a(&self, t: f64, x: &[f64]) -> Vec<f64>;
    fn forcing(&self, t: f64) -> Vec<f64>;
    /// Solve `(I - dt A(t)) x = rhs`.
    fn solve_implicit(&self, t: f64, dt: f64, rhs: &[f64]) -> Result<Vec<f64>>;
    fn structure(&self) -> Structure;
}

/// Constant dense coefficient matrix with an optional time-dependent forcing.
#[derive(Clone)]
pub struct ConstantSystem {
    a: DMatrix<f64>,
    forcing: Option<Arc<dyn Fn(f64) -> Vec<f64> + Send + Sync>>,
}

impl fmt::Debug for ConstantSystem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ConstantSystem")
            .field("a", &self.a)
            .field("forced", &self.forcing.is_some())
            .finish()
    }
}

impl ConstantSystem {
    pub fn new(a: DMatrix<f64>) -> Result<Self> {
        if !a.is_square() || a.nrows() == 0 {
            return Err(Error::InvalidArgument("coefficient matrix must be square".into()));
        }
        Ok(Self { a, forcing: None })
    }

    pub fn with_forcing<F>(mut self, forcing: F) -> Self
    where
        F: Fn(f64) -> Vec<f64> + Send + Sync + 'static,
    {
        self.forcing = Some(Arc::new(forcing));
        self
    }
}

impl LinearSystem for ConstantSystem {
    fn dim(&self) -> usize {
        self.a.nrows()
    }

    fn apply_a(&self, _t: f64, x: &[f64]) -> Vec<f64> {
        let n = self.dim();
        (0..n)
            .map(|i| (0..n).map(|j| self.a[(i, j)] * x[j]).sum())
            .collect()
    }

    fn forcing(&self, t: f64) -> Vec<f64> {
        match &self.forcing {
            Some(f) => f(t),
            None => vec![0.0; self.dim()],
        }
    }

    fn solve_implicit(&self, _t: f64, dt: f64, rhs: &[f64]) -> Result<Vec<f64>> {
        let n = self.dim();
        let m = DMatrix::identity(n, n) - &self.a * dt;
        linalg::lu_solve(&m, rhs)
    }

    fn structure(&self) -> Structure {
        Structure::Dense
    }
}

/// Fully implicit backward Euler: solves `(I - dt A(t_next)) x = y + dt b(t_next)`.
pub fn be_step_linear<S: LinearSystem + ?Sized>(
    sys: &S,
    y: &[f64],
    t_next: f64,
    dt: f64,
) -> Result<Vec<f64>> {
    be_step_linear_inner(sys, y, t_next, dt, true)
}

/// Backward Euler step without the forcing term (the homogeneous problem).
pub fn be_step_linear_homogeneous<S: LinearSystem + ?Sized>(
    sys: &S,
    y: &[f64],
    t_next: f64,
    dt: f64,
) -> Result<Vec<f64>> {
    be_step_linear_inner(sys, y, t_next, dt, false)
}

fn be_step_linear_inner<S: LinearSystem + ?Sized>(
    sys: &S,
    y: &[f64],
    t_next: f64,
    dt: f64,
    forced: bool,
) -> Result<Vec<f64>> {
    if !(dt > 0.0) {
        return Err(Error::InvalidArgument(format!("dt must be positive, got {dt}")));
    }
    if y.len() != sys.dim() {
        return Err(Error::LengthMismatch {
            expected: sys.dim(),
            got: y.len(),
        });
    }
    if forced {
        let b = sys.forcing(t_next);
        let rhs: Vec<f64> = y.iter().zip(&b).map(|(yi, bi)| yi + dt * bi).collect();
        sys.solve_implicit(t_next, dt, &rhs)
    } else {
        sys.solve_implicit(t_next, dt, y)
    }
}

/// How a slice whose width is not a whole number of fine steps is handled.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum StepPolicy {
    /// The width must be an integer multiple of `dt`.
    #[default]
    Strict,
    /// Take `ceil(width / dt)` steps and shrink the step to fit the slice.
    Refine,
}

impl StepPolicy {
    pub fn name(self) -> &'static str {
        match self {
            StepPolicy::Strict => "strict",
            StepPolicy::Refine => "refine",
        }
    }
}

impl std::str::FromStr for StepPolicy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "strict" => Ok(StepPolicy::Strict),
            "refine" => Ok(StepPolicy::Refine),
            other => Err(Error::InvalidArgument(format!("unknown step policy '{other}'"))),
        }
    }
}

/// Number of steps and step size covering `width` under `policy`.
pub fn step_count(width: f64, dt: f64, policy: StepPolicy) -> Result<(usize, f64)> {
    if !(dt > 0.0) || !dt.is_finite() {
        return Err(Error::InvalidArgument(format!("dt must be positive, got {dt}")));
    }
    if width < 0.0 || !width.is_finite() {
        return Err(Error::InvalidArgument(format!("bad interval width {width}")));
    }
    if width == 0.0 {
        return Ok((0, dt));
    }
    let ratio = width / dt;
    let nearest = ratio.round();
    let is_integer = nearest >= 1.0 && (ratio - nearest).abs() <= STEP_COUNT_TOL * nearest;
    if is_integer {
        return Ok((nearest as usize, dt));
    }
    match policy {
        StepPolicy::Strict => Err(Error::NonIntegerStepCount { width, dt }),
        StepPolicy::Refine => {
            let steps = ratio.ceil() as usize;
            Ok((steps, width / steps as f64))
        }
    }
}

/// One time slice `[t_start, t_end]` covered by `steps` steps of size `step`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Slice {
    pub index: usize,
    pub t_start: f64,
    pub t_end: f64,
    pub steps: usize,
    pub step: f64,
}

impl Slice {
    pub fn width(&self) -> f64 {
        self.t_end - self.t_start
    }

    /// Same interval re-covered with a different nominal step (e.g. the coarse step).
    pub fn with_step(&self, dt: f64, policy: StepPolicy) -> Result<Slice> {
        let (steps, step) = step_count(self.width(), dt, policy)?;
        Ok(Slice { steps, step, ..*self })
    }
}

/// `N` equal slices `T_j = t0 + j (T - t0) / N` with a nominal fine step `dt`.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeSliceDecomposition {
    pub boundaries: Vec<f64>,
    pub dt: f64,
    pub policy: StepPolicy,
    slices: Vec<Slice>,
}

impl TimeSliceDecomposition {
    pub fn new(t0: f64, t_final: f64, n_slices: usize, dt: f64, policy: StepPolicy) -> Result<Self> {
        if n_slices == 0 {
            return Err(Error::InvalidArgument("slice count must be positive".into()));
        }
        if !(t_final > t0) {
            return Err(Error::InvalidArgument(format!(
                "final time {t_final} must exceed start time {t0}"
            )));
        }
        let span = t_final - t0;
        let boundaries: Vec<f64> = (0..=n_slices)
            .map(|j| {
                if j == n_slices {
                    t_final
                } else {
                    t0 + j as f64 * span / n_slices as f64
                }
            })
            .collect();
        let slices = boundaries
            .windows(2)
            .enumerate()
            .map(|(index, w)| {
                let (steps, step) = step_count(w[1] - w[0], dt, policy)?;
                Ok(Slice {
                    index,
                    t_start: w[0],
                    t_end: w[1],
                    steps,
                    step,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            boundaries,
            dt,
            policy,
            slices,
        })
    }

    pub fn n_slices(&self) -> usize {
        self.slices.len()
    }

    pub fn slices(&self) -> &[Slice] {
        &self.slices
    }

    pub fn slice(&self, j: usize) -> &Slice {
        &self.slices[j]
    }

    pub fn total_steps(&self) -> usize {
        self.slices.iter().map(|s| s.steps).sum()
    }

    pub fn t_final(&self) -> f64 {
        *self.boundaries.last().expect("at least one slice")
    }
}

/// Apply `steps` steps of size `h` starting at `t_start`. The stepper receives
/// the current state, the time at the end of the step, and the step size.
pub fn integrate_steps<S, F>(mut stepper: F, y: S, t_start: f64, steps: usize, h: f64) -> Result<S>
where
    F: FnMut(&S, f64, f64) -> Result<S>,
{
    let mut state = y;
    for i in 0..steps {
        let t_next = t_start + (i + 1) as f64 * h;
        state = stepper(&state, t_next, h)?;
    }
    Ok(state)
}

/// Integrate across `[t_start, t_end]` with exactly `(t_end - t_start) / dt` steps.
pub fn integrate_slice<S, F>(stepper: F, y: S, t_start: f64, t_end: f64, dt: f64) -> Result<S>
where
    F: FnMut(&S, f64, f64) -> Result<S>,
{
    let (steps, h) = step_count(t_end - t_start, dt, StepPolicy::Strict)?;
    integrate_steps(stepper, y, t_start, steps, h)
}

/// Integrate across a slice using its own step count and step size.
pub fn integrate_over<S, F>(stepper: F, y: S, slice: &Slice) -> Result<S>
where
    F: FnMut(&S, f64, f64) -> Result<S>,
{
    integrate_steps(stepper, y, slice.t_start, slice.steps, slice.step)
}

/// Leapfrog `y^{n+1} = 2 y^n - y^{n-1} + dt^2 D2 y^n`, zeroing the first and
/// last entries after each step (homogeneous Dirichlet ends).
///
/// Returns the final `(y_curr, y_prev)` pair.
pub fn leapfrog_integrate<F>(
    y_curr: Vec<f64>,
    y_prev: Vec<f64>,
    n_steps: usize,
    dt: f64,
    apply_d2: F,
) -> Result<(Vec<f64>, Vec<f64>)>
where
    F: Fn(&[f64]) -> Vec<f64>,
{
    if y_curr.len() != y_prev.len() {
        return Err(Error::LengthMismatch {
            expected: y_curr.len(),
            got: y_prev.len(),
        });
    }
    if !(dt > 0.0) {
        return Err(Error::InvalidArgument(format!("dt must be positive, got {dt}")));
    }
    let dt2 = dt * dt;
    let (mut curr, mut prev) = (y_curr, y_prev);
    for _ in 0..n_steps {
        let d2 = apply_d2(&curr);
        if d2.len() != curr.len() {
            return Err(Error::LengthMismatch {
                expected: curr.len(),
                got: d2.len(),
            });
        }
        let mut next: Vec<f64> = curr
            .iter()
            .zip(&prev)
            .zip(&d2)
            .map(|((c, p), d)| 2.0 * c - p + dt2 * d)
            .collect();
        if let Some(first) = next.first_mut() {
            *first = 0.0;
        }
        if let Some(last) = next.last_mut() {
            *last = 0.0;
        }
        prev = std::mem::replace(&mut curr, next);
    }
    Ok((curr, prev))
}
