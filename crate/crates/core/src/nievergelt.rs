//! Minimal-communication parallel-in-time driver.
//!
//! Each slice independently builds a map from its initial value to its final
//! value, either by interpolating over sampled initial values (scalar
//! nonlinear problems) or exactly as an affine propagator (linear systems).
//! A single sequential sweep then pushes the true initial value through the
//! maps, one message per slice boundary.

use std::time::Instant;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::harness::{self, CommStats, ExecConfig, Executor, Link};
use crate::interp::{InitialValueSpace, Interpolant};
use crate::ode::{ScalarIvp, Slice, TimeSliceDecomposition};
use crate::propagate::{self, AffineEvolution, Propagator, StateVector};
use crate::report::{Method, RunConfig, RunReport};

/// Something that maps a slice's initial state to its final state.
pub trait SliceOperator: Sync {
    type State: StateVector;

    fn slice_index(&self) -> usize;

    fn apply(&self, input: &Self::State) -> Result<Self::State>;

    /// True when applying to `input` leaves the region the map was built on.
    fn extrapolates(&self, _input: &Self::State) -> bool {
        false
    }
}

/// Interpolated initial-value to final-value map for one slice.
#[derive(Debug, Clone, PartialEq)]
pub struct SliceMap {
    pub slice_index: usize,
    pub interpolant: Interpolant,
}

impl SliceMap {
    pub fn new(slice_index: usize, nodes: Vec<f64>, end_values: Vec<f64>) -> Result<Self> {
        Ok(Self {
            slice_index,
            interpolant: Interpolant::new(nodes, end_values)?,
        })
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.interpolant.eval(x)
    }
}

impl SliceOperator for SliceMap {
    type State = f64;

    fn slice_index(&self) -> usize {
        self.slice_index
    }

    fn apply(&self, input: &f64) -> Result<f64> {
        Ok(self.interpolant.eval(*input))
    }

    fn extrapolates(&self, input: &f64) -> bool {
        self.interpolant.extrapolates(*input)
    }
}

/// Exact slice map `y -> G y + c` for a linear evolution.
#[derive(Debug, Clone, PartialEq)]
pub struct AffinePropagator {
    pub slice_index: usize,
    pub g: DMatrix<f64>,
    pub c: DVector<f64>,
}

impl AffinePropagator {
    pub fn identity(slice_index: usize, dim: usize) -> Self {
        Self {
            slice_index,
            g: DMatrix::identity(dim, dim),
            c: DVector::zeros(dim),
        }
    }

    /// Assemble from the propagated basis vectors (columns of `G`) and the
    /// forced run from zero (`c`).
    pub fn from_runs(slice_index: usize, columns: &[Vec<f64>], offset: Vec<f64>) -> Result<Self> {
        let dim = offset.len();
        if columns.len() != dim {
            return Err(Error::LengthMismatch {
                expected: dim,
                got: columns.len(),
            });
        }
        if let Some(bad) = columns.iter().find(|c| c.len() != dim) {
            return Err(Error::LengthMismatch {
                expected: dim,
                got: bad.len(),
            });
        }
        let g = DMatrix::from_fn(dim, dim, |i, j| columns[j][i]);
        Ok(Self {
            slice_index,
            g,
            c: DVector::from_vec(offset),
        })
    }

    pub fn dim(&self) -> usize {
        self.c.len()
    }
}

impl SliceOperator for AffinePropagator {
    type State = Vec<f64>;

    fn slice_index(&self) -> usize {
        self.slice_index
    }

    fn apply(&self, input: &Vec<f64>) -> Result<Vec<f64>> {
        if input.len() != self.dim() {
            return Err(Error::LengthMismatch {
                expected: self.dim(),
                got: input.len(),
            });
        }
        let y = &self.g * DVector::from_column_slice(input) + &self.c;
        Ok(y.as_slice().to_vec())
    }
}

/// Integrate the IVP across `slice` from every node of `space` and build the
/// interpolated map. A blow-up from some sample is reported with its index.
pub fn build_scalar_slice_map(
    problem: &ScalarIvp,
    slice: &Slice,
    space: &InitialValueSpace,
) -> Result<SliceMap> {
    let nodes = space.nodes();
    let values = nodes
        .iter()
        .enumerate()
        .map(|(k, &xi)| scalar_sample(problem, slice, k, xi))
        .collect::<Result<Vec<_>>>()?;
    SliceMap::new(slice.index, nodes, values)
}

fn scalar_sample(problem: &ScalarIvp, slice: &Slice, k: usize, xi: f64) -> Result<f64> {
    problem
        .propagate(&xi, slice)
        .map_err(|e| e.in_task(slice.index, Some(k)))
}

/// Basis run `col` for an affine propagator: `col < dim` is the homogeneous
/// run from `e_col`, `col == dim` is the forced run from zero.
fn affine_run<E: AffineEvolution + ?Sized>(evo: &E, slice: &Slice, col: usize) -> Result<Vec<f64>> {
    let dim = evo.dim();
    let mut start = vec![0.0; dim];
    let forced = col == dim;
    if !forced {
        start[col] = 1.0;
    }
    evo.advance(&start, slice, forced)
        .map_err(|e| e.in_task(slice.index, Some(col)))
}

fn affine_run_count<E: AffineEvolution + ?Sized>(evo: &E) -> usize {
    evo.dim() + usize::from(!evo.is_homogeneous())
}

/// Build the exact propagator for `slice` from `dim + 1` independent runs
/// (`dim` when the evolution is homogeneous).
pub fn build_affine_propagator<E: AffineEvolution + ?Sized>(evo: &E, slice: &Slice) -> Result<AffinePropagator> {
    let runs = (0..affine_run_count(evo))
        .map(|col| affine_run(evo, slice, col))
        .collect::<Result<Vec<_>>>()?;
    assemble_affine(evo, slice.index, runs)
}

fn assemble_affine<E: AffineEvolution + ?Sized>(
    evo: &E,
    slice_index: usize,
    mut runs: Vec<Vec<f64>>,
) -> Result<AffinePropagator> {
    let dim = evo.dim();
    let offset = if evo.is_homogeneous() {
        vec![0.0; dim]
    } else {
        runs.pop().expect("forced run present")
    };
    AffinePropagator::from_runs(slice_index, &runs, offset)
}

/// Result of the sequential communication sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepOutcome<S> {
    pub final_state: S,
    pub stats: CommStats,
    pub extrapolations: usize,
}

/// Push `y0` through `maps` in slice order. The first map is applied
/// locally; each later map first receives its input from the previous slice.
pub fn compose_sweep<O: SliceOperator>(maps: &[O], y0: O::State, link: &Link) -> Result<SweepOutcome<O::State>> {
    if let Some(first) = maps.first() {
        let base = first.slice_index();
        if let Some((pos, m)) = maps
            .iter()
            .enumerate()
            .find(|(pos, m)| m.slice_index() != base + pos)
        {
            return Err(Error::InvalidArgument(format!(
                "maps are not contiguous: position {pos} holds slice {}",
                m.slice_index()
            )));
        }
    }
    let mut stats = CommStats::default();
    let mut extrapolations = 0;
    let sweep_start = Instant::now();
    let mut state = y0;
    for (pos, map) in maps.iter().enumerate() {
        if pos > 0 {
            link.receive(&mut stats, state.message_bytes());
        }
        if map.extrapolates(&state) {
            extrapolations += 1;
        }
        let (next, secs) = harness::timed(|| map.apply(&state));
        stats.t_apply += secs;
        state = next?;
    }
    stats.t_comm = sweep_start.elapsed().as_secs_f64();
    Ok(SweepOutcome {
        final_state: state,
        stats,
        extrapolations,
    })
}

/// Nievergelt run for a scalar IVP with interpolated slice maps.
pub fn run_scalar(
    problem: &ScalarIvp,
    decomp: &TimeSliceDecomposition,
    space: &InitialValueSpace,
    exec: &ExecConfig,
) -> Result<RunReport> {
    let n = decomp.n_slices();
    let mut config = RunConfig::new(Method::Nievergelt, n, decomp.dt, exec);
    config.samples = Some(space.m);
    config.node_kind = Some(space.kind);

    let start = Instant::now();
    let (final_state, per_slice_compute, stats, extrapolations, work) = if n == 1 {
        let slice = decomp.slice(0);
        let (y, secs) = harness::timed(|| problem.propagate(&problem.y0, slice));
        let y = y.map_err(|e| e.in_task(0, None))?;
        (y, vec![secs], CommStats::default(), 0, vec![slice.steps])
    } else {
        let executor = Executor::new(exec.workers)?;
        let nodes = space.nodes();
        let tasks: Vec<(usize, usize)> = (0..n)
            .flat_map(|j| (0..nodes.len()).map(move |k| (j, k)))
            .collect();
        let results = executor.map(&tasks, |_, &(j, k)| {
            let (v, secs) = harness::timed(|| scalar_sample(problem, decomp.slice(j), k, nodes[k]));
            v.map(|v| (v, secs))
        })?;
        let m = nodes.len();
        let mut maps = Vec::with_capacity(n);
        let mut per_slice = Vec::with_capacity(n);
        for (j, chunk) in results.chunks(m).enumerate() {
            let values = chunk.iter().map(|r| r.0).collect();
            per_slice.push(chunk.iter().map(|r| r.1).sum());
            maps.push(SliceMap::new(j, nodes.clone(), values)?);
        }
        let sweep = compose_sweep(&maps, problem.y0, &Link::new(exec))?;
        let work = decomp.slices().iter().map(|s| m * s.steps).collect();
        (sweep.final_state, per_slice, sweep.stats, sweep.extrapolations, work)
    };
    let t_total = start.elapsed().as_secs_f64();

    let mut report = RunReport::new(config, vec![final_state]);
    report.t_total = t_total;
    report.absorb_comm(&stats);
    report.per_slice_compute = per_slice_compute;
    report.per_slice_work = work;
    report.extrapolation_count = extrapolations;
    report.error_vs_exact = problem.exact(decomp.t_final()).map(|e| (final_state - e).abs());
    let serial = propagate::serial_run(problem, &problem.y0, decomp)?;
    report.error_vs_serial = Some(propagate::relative_distance(&final_state, &serial));
    fill_modeled(&mut report, exec);
    Ok(report)
}

/// Nievergelt run for a linear evolution with exact affine slice maps.
pub fn run_linear<E: AffineEvolution>(
    evo: &E,
    y0: &[f64],
    decomp: &TimeSliceDecomposition,
    exec: &ExecConfig,
) -> Result<RunReport> {
    let dim = evo.dim();
    if y0.len() != dim {
        return Err(Error::LengthMismatch {
            expected: dim,
            got: y0.len(),
        });
    }
    let n = decomp.n_slices();
    let runs = affine_run_count(evo);
    let mut config = RunConfig::new(Method::Nievergelt, n, decomp.dt, exec);
    config.samples = Some(runs);

    let start = Instant::now();
    let (final_state, per_slice_compute, stats, work) = if n == 1 {
        let slice = decomp.slice(0);
        let (y, secs) = harness::timed(|| evo.advance(y0, slice, true));
        let y = y.map_err(|e| e.in_task(0, None))?;
        (y, vec![secs], CommStats::default(), vec![slice.steps])
    } else {
        let executor = Executor::new(exec.workers)?;
        let tasks: Vec<(usize, usize)> = (0..n).flat_map(|j| (0..runs).map(move |c| (j, c))).collect();
        let results = executor.map(&tasks, |_, &(j, c)| {
            let (v, secs) = harness::timed(|| affine_run(evo, decomp.slice(j), c));
            v.map(|v| (v, secs))
        })?;
        let mut maps = Vec::with_capacity(n);
        let mut per_slice = Vec::with_capacity(n);
        let mut grouped = results.into_iter();
        for j in 0..n {
            let chunk: Vec<(Vec<f64>, f64)> = grouped.by_ref().take(runs).collect();
            per_slice.push(chunk.iter().map(|r| r.1).sum());
            maps.push(assemble_affine(evo, j, chunk.into_iter().map(|r| r.0).collect())?);
        }
        let sweep = compose_sweep(&maps, y0.to_vec(), &Link::new(exec))?;
        let work = decomp.slices().iter().map(|s| runs * s.steps).collect();
        (sweep.final_state, per_slice, sweep.stats, work)
    };
    let t_total = start.elapsed().as_secs_f64();

    let mut report = RunReport::new(config, final_state.clone());
    report.t_total = t_total;
    report.absorb_comm(&stats);
    report.per_slice_compute = per_slice_compute;
    report.per_slice_work = work;
    report.error_vs_exact = evo
        .exact_state(decomp.t_final())
        .map(|e| propagate::distance(&final_state, &e));
    let serial = propagate::serial_run(evo, &y0.to_vec(), decomp)?;
    report.error_vs_serial = Some(propagate::relative_distance(&final_state, &serial));
    fill_modeled(&mut report, exec);
    Ok(report)
}

fn fill_modeled(report: &mut RunReport, exec: &ExecConfig) {
    if !exec.clock.models() {
        return;
    }
    let n = report.n_slices();
    let apply = report.t_apply / n as f64;
    report.modeled_time = Some(harness::modeled_time_nievergelt(
        &report.per_slice_compute,
        exec.latency,
        apply,
    ));
    report.modeled_comm = Some(harness::modeled_comm_nievergelt(n, exec.latency, apply));
}
