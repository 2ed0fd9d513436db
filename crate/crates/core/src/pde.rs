//! Linear PDE test problems: a variable-coefficient heat equation with a
//! manufactured solution, and a Chebyshev spectral wave equation.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::interp::cheb_diff_matrix;
use crate::linalg::Tridiagonal;
use crate::ode::{self, LinearSystem, Slice, Structure};
use crate::propagate::{AffineEvolution, BackwardEuler};

/// Diffusion coefficient `a(t) = 1 + sin(t) / 4`.
pub fn heat_coefficient(t: f64) -> f64 {
    1.0 + t.sin() / 4.0
}

/// Manufactured solution `cos(t) sin(pi x)`.
pub fn heat_exact(x: f64, t: f64) -> f64 {
    t.cos() * (PI * x).sin()
}

/// Forcing that makes [`heat_exact`] solve `y_t = a(t) y_xx + b(x, t)`.
pub fn heat_forcing(x: f64, t: f64) -> f64 {
    let s = (PI * x).sin();
    -t.sin() * s + heat_coefficient(t) * PI * PI * t.cos() * s
}

/// Centered finite differences for the heat equation on the interior of
/// `[0, 1]` with homogeneous Dirichlet ends.
#[derive(Debug, Clone, PartialEq)]
pub struct HeatSystem {
    pub dx: f64,
    grid: Vec<f64>,
}

impl HeatSystem {
    pub fn new(dx: f64) -> Result<Self> {
        if !(dx > 0.0) || !dx.is_finite() {
            return Err(Error::BadGrid(format!("dx must be positive, got {dx}")));
        }
        let cells = (1.0 / dx).round();
        if cells < 2.0 || ((1.0 / dx) - cells).abs() > ode::STEP_COUNT_TOL * cells {
            return Err(Error::BadGrid(format!(
                "1/dx must be an integer of at least 2, got {}",
                1.0 / dx
            )));
        }
        let interior = cells as usize - 1;
        let grid = (1..=interior).map(|i| i as f64 * dx).collect();
        Ok(Self { dx, grid })
    }

    /// Interior grid points `x_i = i dx`.
    pub fn grid(&self) -> &[f64] {
        &self.grid
    }

    pub fn initial_state(&self) -> Vec<f64> {
        self.exact_state(0.0)
    }

    pub fn exact_state(&self, t: f64) -> Vec<f64> {
        self.grid.iter().map(|&x| heat_exact(x, t)).collect()
    }

    fn stencil_scale(&self, t: f64) -> f64 {
        heat_coefficient(t) / (self.dx * self.dx)
    }

    /// `I - dt A(t)` as a tridiagonal matrix.
    pub fn implicit_matrix(&self, t: f64, dt: f64) -> Tridiagonal {
        let n = self.grid.len();
        let s = dt * self.stencil_scale(t);
        Tridiagonal {
            lower: vec![-s; n - 1],
            diag: vec![1.0 + 2.0 * s; n],
            upper: vec![-s; n - 1],
        }
    }
}

impl LinearSystem for HeatSystem {
    fn dim(&self) -> usize {
        self.grid.len()
    }

    fn apply_a(&self, t: f64, x: &[f64]) -> Vec<f64> {
        let s = self.stencil_scale(t);
        let n = x.len();
        (0..n)
            .map(|i| {
                let left = if i > 0 { x[i - 1] } else { 0.0 };
                let right = if i + 1 < n { x[i + 1] } else { 0.0 };
                s * (left - 2.0 * x[i] + right)
            })
            .collect()
    }

    fn forcing(&self, t: f64) -> Vec<f64> {
        self.grid.iter().map(|&x| heat_forcing(x, t)).collect()
    }

    fn solve_implicit(&self, t: f64, dt: f64, rhs: &[f64]) -> Result<Vec<f64>> {
        self.implicit_matrix(t, dt).solve(rhs)
    }

    fn structure(&self) -> Structure {
        Structure::Tridiagonal
    }
}

pub fn make_heat_system(dx: f64) -> Result<HeatSystem> {
    HeatSystem::new(dx)
}

/// Heat system stepped with backward Euler, with the exact solution attached.
pub fn heat_evolution(dx: f64) -> Result<BackwardEuler<HeatSystem>> {
    let sys = HeatSystem::new(dx)?;
    let exact_sys = sys.clone();
    Ok(BackwardEuler::new(sys).with_exact(move |t| exact_sys.exact_state(t)))
}

/// Domain and pulse centre used by [`WaveProblem::new`].
pub const WAVE_DOMAIN: (f64, f64) = (-1.0, 1.0);
pub const WAVE_PULSE_CENTER: f64 = 0.0;

/// Default pulse `exp(-sigma x^2)` sharpness for `M` points: 200 at `M = 80`,
/// scaled with the square of the grid spacing so the pulse stays resolved.
pub fn default_pulse_sigma(m: usize) -> f64 {
    200.0 * (m as f64 / 80.0).powi(2)
}

/// `y_tt = y_xx` on Chebyshev points with Dirichlet ends, advanced by
/// leapfrog with `dt = 8 / M^2`. The state is the stacked pair
/// `(y^n, y^{n-1})` on interior points.
#[derive(Debug, Clone, PartialEq)]
pub struct WaveProblem {
    pub m: usize,
    pub domain: (f64, f64),
    pub x0: f64,
    pub sigma: f64,
    pub dt: f64,
    grid: Vec<f64>,
    d2_full: DMatrix<f64>,
    d2: DMatrix<f64>,
}

impl WaveProblem {
    pub fn new(m: usize) -> Result<Self> {
        Self::with_pulse(m, WAVE_DOMAIN, WAVE_PULSE_CENTER, default_pulse_sigma(m))
    }

    pub fn with_pulse(m: usize, domain: (f64, f64), x0: f64, sigma: f64) -> Result<Self> {
        if m < 8 || m % 2 != 0 {
            return Err(Error::BadGrid(format!("wave grid needs an even M >= 8, got {m}")));
        }
        if !(sigma > 0.0) {
            return Err(Error::BadGrid(format!("pulse width must be positive, got {sigma}")));
        }
        let (d, grid) = cheb_diff_matrix(m, domain.0, domain.1)?;
        let d2_full = &d * &d;
        let d2 = d2_full.view((1, 1), (m - 1, m - 1)).into_owned();
        Ok(Self {
            m,
            domain,
            x0,
            sigma,
            dt: 8.0 / (m * m) as f64,
            grid,
            d2_full,
            d2,
        })
    }

    /// All `M + 1` grid points, ascending.
    pub fn grid(&self) -> &[f64] {
        &self.grid
    }

    pub fn interior_len(&self) -> usize {
        self.m - 1
    }

    /// Second-derivative matrix on the full grid.
    pub fn d2_full(&self) -> &DMatrix<f64> {
        &self.d2_full
    }

    /// Second-derivative matrix restricted to interior rows and columns.
    pub fn d2_interior(&self) -> &DMatrix<f64> {
        &self.d2
    }

    pub fn pulse(&self, x: f64) -> f64 {
        (-self.sigma * (x - self.x0).powi(2)).exp()
    }

    /// Full-grid initial pair `(y^0, y^{-1})` for a left-moving pulse,
    /// with the boundary entries set to zero.
    pub fn initial_pair_full(&self) -> (Vec<f64>, Vec<f64>) {
        let last = self.m;
        let sample = |shift: f64| -> Vec<f64> {
            self.grid
                .iter()
                .enumerate()
                .map(|(i, &x)| if i == 0 || i == last { 0.0 } else { self.pulse(x - shift) })
                .collect()
        };
        (sample(0.0), sample(self.dt))
    }

    /// Stacked interior state `(y^0, y^{-1})`.
    pub fn initial_state(&self) -> Vec<f64> {
        let (curr, prev) = self.initial_pair_full();
        let mut s = curr[1..self.m].to_vec();
        s.extend_from_slice(&prev[1..self.m]);
        s
    }

    /// Serial leapfrog on the full grid; returns the final `(y^n, y^{n-1})`.
    pub fn serial_full(&self, n_steps: usize) -> Result<(Vec<f64>, Vec<f64>)> {
        let (curr, prev) = self.initial_pair_full();
        let d2 = &self.d2_full;
        ode::leapfrog_integrate(curr, prev, n_steps, self.dt, |y| {
            (d2 * DVector::from_column_slice(y)).as_slice().to_vec()
        })
    }

    /// Stack interior entries of a full-grid pair.
    pub fn stack_interior(&self, curr: &[f64], prev: &[f64]) -> Vec<f64> {
        let mut s = curr[1..self.m].to_vec();
        s.extend_from_slice(&prev[1..self.m]);
        s
    }

    fn check_step(&self, slice: &Slice) -> Result<()> {
        if slice.steps > 0 && (slice.step - self.dt).abs() > ode::STEP_COUNT_TOL * self.dt {
            return Err(Error::InvalidArgument(format!(
                "leapfrog slice step {} differs from the problem step {}",
                slice.step, self.dt
            )));
        }
        Ok(())
    }
}

impl AffineEvolution for WaveProblem {
    fn dim(&self) -> usize {
        2 * self.interior_len()
    }

    fn advance(&self, state: &[f64], slice: &Slice, _forced: bool) -> Result<Vec<f64>> {
        if state.len() != self.dim() {
            return Err(Error::LengthMismatch {
                expected: self.dim(),
                got: state.len(),
            });
        }
        self.check_step(slice)?;
        let n = self.interior_len();
        let dt2 = self.dt * self.dt;
        let mut curr = DVector::from_column_slice(&state[..n]);
        let mut prev = DVector::from_column_slice(&state[n..]);
        for _ in 0..slice.steps {
            let next = &curr * 2.0 - &prev + (&self.d2 * &curr) * dt2;
            prev = std::mem::replace(&mut curr, next);
        }
        let mut out = curr.as_slice().to_vec();
        out.extend_from_slice(prev.as_slice());
        Ok(out)
    }

    fn is_homogeneous(&self) -> bool {
        true
    }
}

pub fn make_wave_problem(m: usize, x0: f64, sigma: f64) -> Result<WaveProblem> {
    WaveProblem::with_pulse(m, WAVE_DOMAIN, x0, sigma)
}

/// One leapfrog step as a matrix on the stacked state:
/// `[[2I + dt^2 D2, -I], [I, 0]]`.
pub fn wave_step_map(problem: &WaveProblem) -> DMatrix<f64> {
    let n = problem.interior_len();
    let dt2 = problem.dt * problem.dt;
    let mut map = DMatrix::zeros(2 * n, 2 * n);
    for i in 0..n {
        for j in 0..n {
            map[(i, j)] = dt2 * problem.d2[(i, j)];
        }
        map[(i, i)] += 2.0;
        map[(i, n + i)] = -1.0;
        map[(n + i, i)] = 1.0;
    }
    map
}
