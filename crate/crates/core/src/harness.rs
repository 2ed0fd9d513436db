//! Task execution over a configurable number of workers, timing, message
//! accounting with injectable receive latency, and modeled schedule time.

use std::thread;
use std::time::{Duration, Instant};

use rayon::prelude::*;

use crate::error::{Error, Result};

/// Which clock the communication phase is charged against.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ClockMode {
    /// Sleep for the injected latency on every receive.
    Measured,
    /// No sleeping; latency only enters the modeled schedule time.
    Modeled,
    #[default]
    Both,
}

impl ClockMode {
    pub fn sleeps(self) -> bool {
        matches!(self, ClockMode::Measured | ClockMode::Both)
    }

    pub fn models(self) -> bool {
        matches!(self, ClockMode::Modeled | ClockMode::Both)
    }
}

impl std::str::FromStr for ClockMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "measured" => Ok(ClockMode::Measured),
            "modeled" => Ok(ClockMode::Modeled),
            "both" => Ok(ClockMode::Both),
            other => Err(Error::InvalidArgument(format!("unknown clock mode '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExecConfig {
    pub workers: usize,
    /// Seconds added to every point-to-point receive.
    pub latency: f64,
    pub clock: ClockMode,
}

impl Default for ExecConfig {
    fn default() -> Self {
        Self {
            workers: 1,
            latency: 0.0,
            clock: ClockMode::Both,
        }
    }
}

impl ExecConfig {
    pub fn new(workers: usize, latency: f64, clock: ClockMode) -> Result<Self> {
        if workers == 0 {
            return Err(Error::InvalidArgument("worker count must be at least 1".into()));
        }
        if !(latency >= 0.0) || !latency.is_finite() {
            return Err(Error::InvalidArgument(format!("latency must be >= 0, got {latency}")));
        }
        Ok(Self { workers, latency, clock })
    }

    pub fn with_workers(mut self, workers: usize) -> Self {
        self.workers = workers.max(1);
        self
    }

    pub fn with_latency(mut self, latency: f64) -> Self {
        self.latency = latency;
        self
    }

    pub fn with_clock(mut self, clock: ClockMode) -> Self {
        self.clock = clock;
        self
    }
}

/// Worker count from `NIEVERGELT_WORKERS`, falling back to 1.
pub fn workers_from_env() -> usize {
    std::env::var("NIEVERGELT_WORKERS")
        .ok()
        .and_then(|v| v.parse().ok())
        .filter(|&w: &usize| w >= 1)
        .unwrap_or(1)
}

/// Runs independent tasks on a fixed number of workers.
pub struct Executor {
    pool: Option<rayon::ThreadPool>,
}

impl Executor {
    pub fn new(workers: usize) -> Result<Self> {
        if workers == 0 {
            return Err(Error::InvalidArgument("worker count must be at least 1".into()));
        }
        let pool = if workers == 1 {
            None
        } else {
            Some(
                rayon::ThreadPoolBuilder::new()
                    .num_threads(workers)
                    .build()
                    .map_err(|e| Error::InvalidArgument(format!("cannot start workers: {e}")))?,
            )
        };
        Ok(Self { pool })
    }

    pub fn workers(&self) -> usize {
        self.pool.as_ref().map_or(1, |p| p.current_num_threads())
    }

    /// Map `f` over `items`, returning results in index order. If any task
    /// fails, the failure with the lowest index is returned.
    pub fn map<T, R, F>(&self, items: &[T], f: F) -> Result<Vec<R>>
    where
        T: Sync,
        R: Send,
        F: Fn(usize, &T) -> Result<R> + Sync + Send,
    {
        let results: Vec<Result<R>> = match &self.pool {
            None => items.iter().enumerate().map(|(i, t)| f(i, t)).collect(),
            Some(pool) => pool.install(|| {
                items
                    .par_iter()
                    .enumerate()
                    .map(|(i, t)| f(i, t))
                    .collect()
            }),
        };
        results.into_iter().collect()
    }
}

/// One-shot convenience wrapper around [`Executor::map`].
pub fn parallel_map<T, R, F>(items: &[T], workers: usize, f: F) -> Result<Vec<R>>
where
    T: Sync,
    R: Send,
    F: Fn(usize, &T) -> Result<R> + Sync + Send,
{
    Executor::new(workers)?.map(items, f)
}

/// Run `f` and return its result with the elapsed seconds.
pub fn timed<R>(f: impl FnOnce() -> R) -> (R, f64) {
    let start = Instant::now();
    let out = f();
    (out, start.elapsed().as_secs_f64())
}

/// Point-to-point hand-off accounting for a sweep.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct CommStats {
    pub messages: usize,
    pub bytes: usize,
    /// Measured seconds spent in receives (including injected sleep) and applies.
    pub t_comm: f64,
    /// Measured seconds spent applying maps or coarse steps during sweeps.
    pub t_apply: f64,
    /// Latency charged to the modeled clock.
    pub modeled_latency: f64,
}

/// Charges latency for received messages according to the clock mode.
#[derive(Debug, Clone, Copy)]
pub struct Link {
    latency: f64,
    clock: ClockMode,
}

impl Link {
    pub fn new(cfg: &ExecConfig) -> Self {
        Self {
            latency: cfg.latency,
            clock: cfg.clock,
        }
    }

    /// Record one received message of `bytes` bytes.
    pub fn receive(&self, stats: &mut CommStats, bytes: usize) {
        stats.messages += 1;
        stats.bytes += bytes;
        stats.modeled_latency += self.latency;
        if self.latency > 0.0 && self.clock.sleeps() {
            thread::sleep(Duration::from_secs_f64(self.latency));
        }
    }
}

/// Schedule shape used for the modeled clock.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScheduleShape {
    Nievergelt,
    Parareal { iterations: usize },
}

/// Per-slice compute samples plus per-message latency, for modeled time.
#[derive(Debug, Clone, PartialEq)]
pub struct ScheduleModel {
    pub shape: ScheduleShape,
    pub per_slice: Vec<f64>,
    pub latency: f64,
    /// Map application cost (Nievergelt) or coarse cost per slice (parareal).
    pub sweep_cost: f64,
}

impl ScheduleModel {
    pub fn modeled_time(&self) -> f64 {
        match self.shape {
            ScheduleShape::Nievergelt => {
                modeled_time_nievergelt(&self.per_slice, self.latency, self.sweep_cost)
            }
            ScheduleShape::Parareal { iterations } => {
                modeled_time_parareal(&self.per_slice, self.sweep_cost, iterations, self.latency)
            }
        }
    }
}

/// All map constructions run concurrently, then a chain of `N - 1` receives
/// each followed by one map application.
pub fn modeled_time_nievergelt(per_slice: &[f64], latency: f64, apply_cost: f64) -> f64 {
    let n = per_slice.len();
    if n == 0 {
        return 0.0;
    }
    max_of(per_slice) + (n - 1) as f64 * (latency + apply_cost)
}

/// The communication share of [`modeled_time_nievergelt`].
pub fn modeled_comm_nievergelt(n_slices: usize, latency: f64, apply_cost: f64) -> f64 {
    n_slices.saturating_sub(1) as f64 * (latency + apply_cost)
}

/// Messages issued by `k` parareal iterations on `n` slices: one coarse
/// initialisation sweep plus two hand-offs per interior boundary per iteration.
pub fn parareal_messages(k: usize, n: usize) -> usize {
    (2 * k + 1) * n.saturating_sub(1)
}

/// `k` fine blocks run concurrently, `k + 1` sequential coarse chains over
/// all slices, and one latency charge per message.
pub fn modeled_time_parareal(per_slice_fine: &[f64], coarse_per_slice: f64, k: usize, latency: f64) -> f64 {
    let n = per_slice_fine.len();
    k as f64 * max_of(per_slice_fine)
        + (k + 1) as f64 * n as f64 * coarse_per_slice
        + parareal_messages(k, n) as f64 * latency
}

pub fn modeled_comm_parareal(n_slices: usize, coarse_per_slice: f64, k: usize, latency: f64) -> f64 {
    (k + 1) as f64 * n_slices as f64 * coarse_per_slice + parareal_messages(k, n_slices) as f64 * latency
}

fn max_of(v: &[f64]) -> f64 {
    v.iter().copied().fold(0.0, f64::max)
}
