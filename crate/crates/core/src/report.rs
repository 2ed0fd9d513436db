//! Run reports shared by the Nievergelt and parareal drivers.

use crate::harness::{CommStats, ExecConfig};
use crate::interp::NodeKind;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    Serial,
    Nievergelt,
    Parareal { iterations: usize },
}

impl Method {
    pub fn name(&self) -> &'static str {
        match self {
            Method::Serial => "serial",
            Method::Nievergelt => "nievergelt",
            Method::Parareal { .. } => "parareal",
        }
    }
}

/// Echo of the configuration that produced a report.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub method: Method,
    pub n_slices: usize,
    /// Interpolation samples per slice (scalar Nievergelt) or basis runs (linear).
    pub samples: Option<usize>,
    pub node_kind: Option<NodeKind>,
    pub dt: f64,
    pub coarse_dt: Option<f64>,
    pub latency: f64,
    pub workers: usize,
}

impl RunConfig {
    pub(crate) fn new(method: Method, n_slices: usize, dt: f64, exec: &ExecConfig) -> Self {
        Self {
            method,
            n_slices,
            samples: None,
            node_kind: None,
            dt,
            coarse_dt: None,
            latency: exec.latency,
            workers: exec.workers,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunReport {
    pub config: RunConfig,
    pub final_state: Vec<f64>,
    pub error_vs_exact: Option<f64>,
    /// Relative max-norm distance to a single-worker serial run on the same step grid.
    pub error_vs_serial: Option<f64>,
    pub t_total: f64,
    /// Measured communication phase: receives (with injected latency) plus sweep work.
    pub t_comm: f64,
    /// Measured seconds spent applying maps or coarse steps inside the sweep.
    pub t_apply: f64,
    pub modeled_time: Option<f64>,
    pub modeled_comm: Option<f64>,
    pub message_count: usize,
    pub bytes_communicated: usize,
    pub per_slice_compute: Vec<f64>,
    /// Deterministic work units per slice: fine steps summed over that slice's tasks.
    pub per_slice_work: Vec<usize>,
    pub extrapolation_count: usize,
}

impl RunReport {
    pub(crate) fn new(config: RunConfig, final_state: Vec<f64>) -> Self {
        Self {
            config,
            final_state,
            error_vs_exact: None,
            error_vs_serial: None,
            t_total: 0.0,
            t_comm: 0.0,
            t_apply: 0.0,
            modeled_time: None,
            modeled_comm: None,
            message_count: 0,
            bytes_communicated: 0,
            per_slice_compute: Vec::new(),
            per_slice_work: Vec::new(),
            extrapolation_count: 0,
        }
    }

    pub(crate) fn absorb_comm(&mut self, stats: &CommStats) {
        self.message_count += stats.messages;
        self.bytes_communicated += stats.bytes;
        self.t_comm += stats.t_comm;
        self.t_apply += stats.t_apply;
    }

    pub fn n_slices(&self) -> usize {
        self.config.n_slices
    }

    /// Largest per-slice work unit count.
    pub fn max_slice_work(&self) -> usize {
        self.per_slice_work.iter().copied().max().unwrap_or(0)
    }
}
