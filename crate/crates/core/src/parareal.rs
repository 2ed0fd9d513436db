//! Reference parareal driver: a cheap coarse propagator chained sequentially,
//! corrected each iteration by fine propagations that run concurrently.

use std::time::Instant;

use crate::error::{Error, Result};
use crate::harness::{self, CommStats, ExecConfig, Executor, Link};
use crate::ode::{Slice, StepPolicy, TimeSliceDecomposition};
use crate::propagate::{self, Propagator, StateVector};
use crate::report::{Method, RunConfig, RunReport};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PararealConfig {
    pub dt: f64,
    pub coarse_dt: f64,
    pub iterations: usize,
    pub n_slices: usize,
    /// Policy for the fine step; coarse steps always shrink to fit the slice.
    pub policy: StepPolicy,
}

impl PararealConfig {
    pub fn new(dt: f64, coarse_dt: f64, iterations: usize, n_slices: usize) -> Result<Self> {
        let cfg = Self {
            dt,
            coarse_dt,
            iterations,
            n_slices,
            policy: StepPolicy::Strict,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn with_policy(mut self, policy: StepPolicy) -> Self {
        self.policy = policy;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0) || !(self.coarse_dt > 0.0) {
            return Err(Error::InvalidArgument("step sizes must be positive".into()));
        }
        if self.coarse_dt < self.dt {
            return Err(Error::InvalidArgument(format!(
                "coarse step {} is smaller than fine step {}",
                self.coarse_dt, self.dt
            )));
        }
        if self.n_slices == 0 {
            return Err(Error::InvalidArgument("slice count must be positive".into()));
        }
        Ok(())
    }
}

/// Backward Euler across `slice` with the coarse step. A coarse step wider
/// than the slice collapses to a single step.
pub fn coarse_propagate<P: Propagator + ?Sized>(
    prop: &P,
    state: &P::State,
    slice: &Slice,
    coarse_dt: f64,
) -> Result<P::State> {
    let coarse = coarse_slice(slice, coarse_dt)?;
    prop.propagate(state, &coarse)
}

fn coarse_slice(slice: &Slice, coarse_dt: f64) -> Result<Slice> {
    if slice.width() > 0.0 && coarse_dt >= slice.width() {
        return Ok(Slice {
            steps: 1,
            step: slice.width(),
            ..*slice
        });
    }
    slice.with_step(coarse_dt, StepPolicy::Refine)
}

/// Final state after every iteration (index 0 is the coarse initialisation)
/// together with the run report.
#[derive(Debug, Clone, PartialEq)]
pub struct PararealOutcome<S> {
    pub history: Vec<S>,
    pub report: RunReport,
}

pub fn parareal_sweep<P: Propagator>(
    prop: &P,
    y0: &P::State,
    t0: f64,
    t_final: f64,
    config: &PararealConfig,
    exec: &ExecConfig,
) -> Result<PararealOutcome<P::State>> {
    config.validate()?;
    let decomp = TimeSliceDecomposition::new(t0, t_final, config.n_slices, config.dt, config.policy)?;
    let n = decomp.n_slices();
    let k = config.iterations;
    let coarse: Vec<Slice> = decomp
        .slices()
        .iter()
        .map(|s| coarse_slice(s, config.coarse_dt))
        .collect::<Result<_>>()?;

    let mut run_config = RunConfig::new(Method::Parareal { iterations: k }, n, config.dt, exec);
    run_config.coarse_dt = Some(config.coarse_dt);

    let start = Instant::now();
    let mut stats = CommStats::default();
    let mut per_slice_fine = vec![0.0; n];
    let mut coarse_secs = 0.0;
    let mut coarse_calls = 0usize;

    let history = if n == 1 {
        let (y, secs) = harness::timed(|| prop.propagate(y0, decomp.slice(0)));
        let y = y.map_err(|e| e.in_task(0, None))?;
        per_slice_fine[0] = secs;
        vec![y; k + 1]
    } else {
        let link = Link::new(exec);
        let executor = Executor::new(exec.workers)?;
        let mut history = Vec::with_capacity(k + 1);

        // iteration 0: sequential coarse chain
        let sweep_start = Instant::now();
        let mut lambda = vec![y0.clone()];
        let mut coarse_prev = Vec::with_capacity(n);
        for (j, cs) in coarse.iter().enumerate() {
            if j > 0 {
                link.receive(&mut stats, lambda[j].message_bytes());
            }
            let (g, secs) = harness::timed(|| prop.propagate(&lambda[j], cs));
            coarse_secs += secs;
            coarse_calls += 1;
            let g = g.map_err(|e| e.in_task(j, None))?;
            lambda.push(g.clone());
            coarse_prev.push(g);
        }
        stats.t_comm += sweep_start.elapsed().as_secs_f64();
        history.push(lambda[n].clone());

        let slice_ids: Vec<usize> = (0..n).collect();
        for _ in 0..k {
            let fine = executor.map(&slice_ids, |_, &j| {
                let (y, secs) = harness::timed(|| prop.propagate(&lambda[j], decomp.slice(j)));
                y.map(|y| (y, secs)).map_err(|e| e.in_task(j, None))
            })?;
            for (j, (_, secs)) in fine.iter().enumerate() {
                per_slice_fine[j] += secs;
            }

            let sweep_start = Instant::now();
            let mut next = vec![y0.clone()];
            for (j, cs) in coarse.iter().enumerate() {
                if j > 0 {
                    link.receive(&mut stats, fine[j - 1].0.message_bytes());
                    link.receive(&mut stats, next[j].message_bytes());
                }
                let (g, secs) = harness::timed(|| prop.propagate(&next[j], cs));
                coarse_secs += secs;
                coarse_calls += 1;
                let g = g.map_err(|e| e.in_task(j, None))?;
                next.push(StateVector::correction(&g, &fine[j].0, &coarse_prev[j]));
                coarse_prev[j] = g;
            }
            stats.t_comm += sweep_start.elapsed().as_secs_f64();
            lambda = next;
            history.push(lambda[n].clone());
        }
        history
    };
    let t_total = start.elapsed().as_secs_f64();

    let final_state = history.last().expect("history is never empty").clone();
    let mut report = RunReport::new(run_config, final_state.to_vec());
    report.t_total = t_total;
    stats.t_apply = coarse_secs;
    report.absorb_comm(&stats);
    report.per_slice_compute = per_slice_fine.clone();
    report.per_slice_work = decomp
        .slices()
        .iter()
        .map(|s| if n == 1 { s.steps } else { k * s.steps })
        .collect();
    report.error_vs_exact = prop
        .exact(t_final)
        .map(|e| propagate::distance(&final_state, &e));
    let serial = propagate::serial_run(prop, y0, &decomp)?;
    report.error_vs_serial = Some(propagate::relative_distance(&final_state, &serial));

    if exec.clock.models() && n == 1 {
        report.modeled_time = Some(per_slice_fine[0]);
        report.modeled_comm = Some(0.0);
    } else if exec.clock.models() {
        let per_iter: Vec<f64> = per_slice_fine
            .iter()
            .map(|s| if k > 0 { s / k as f64 } else { 0.0 })
            .collect();
        let coarse_each = if coarse_calls > 0 {
            coarse_secs / coarse_calls as f64
        } else {
            0.0
        };
        report.modeled_time = Some(harness::modeled_time_parareal(&per_iter, coarse_each, k, exec.latency));
        report.modeled_comm = Some(harness::modeled_comm_parareal(n, coarse_each, k, exec.latency));
    }
    Ok(PararealOutcome { history, report })
}

pub fn run_parareal<P: Propagator>(
    prop: &P,
    y0: &P::State,
    t0: f64,
    t_final: f64,
    config: &PararealConfig,
    exec: &ExecConfig,
) -> Result<RunReport> {
    parareal_sweep(prop, y0, t0, t_final, config, exec).map(|o| o.report)
}
