//! Cost model for the many-worker device: predicted time to solution,
//! speedup over a serial run, least-squares fitting of the unit costs, and
//! the slice count that balances sampling work against map application.
//!
//! All times are in microseconds.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::ode::STEP_COUNT_TOL;

/// Time horizon of the scalar model problem, used to turn `dt` into a step count.
pub const DEFAULT_HORIZON: f64 = 0.5;

/// Device timings shipped with the crate, in `parse_observations` format.
pub const GPU_TIMINGS: &str = include_str!("../fixtures/gpu_timings.txt");

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CostParams {
    /// One fine step of one task on the device.
    pub tau_f: f64,
    /// Applying one slice map.
    pub tau_n: f64,
    /// Fixed overhead per run.
    pub tau_k: f64,
    /// One fine step on the serial host.
    pub tau_f_cpu: f64,
}

impl CostParams {
    pub fn new(tau_f: f64, tau_n: f64, tau_k: f64, tau_f_cpu: f64) -> Result<Self> {
        let p = Self {
            tau_f,
            tau_n,
            tau_k,
            tau_f_cpu,
        };
        if [tau_f, tau_n, tau_k, tau_f_cpu]
            .iter()
            .any(|v| !(*v >= 0.0) || !v.is_finite())
        {
            return Err(Error::InvalidArgument(format!("cost parameters must be non-negative: {p:?}")));
        }
        Ok(p)
    }

    /// Ratio of serial to device step cost.
    pub fn kappa_f(&self) -> f64 {
        self.tau_f_cpu / self.tau_f
    }

    /// Ratio of map application cost to device step cost.
    pub fn kappa_n(&self) -> f64 {
        self.tau_n / self.tau_f
    }
}

/// One timing measurement.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CostObservation {
    pub dt: f64,
    pub n_slices: usize,
    pub samples: usize,
    pub t_total: f64,
    /// Serial time divided by `t_total`.
    pub ratio: f64,
}

impl CostObservation {
    /// Step count `horizon / dt`, which must be a positive integer.
    pub fn steps(&self, horizon: f64) -> Result<f64> {
        let n = horizon / self.dt;
        let r = n.round();
        if r < 1.0 || (n - r).abs() > STEP_COUNT_TOL * r {
            return Err(Error::NonIntegerStepCount {
                width: horizon,
                dt: self.dt,
            });
        }
        Ok(r)
    }

    /// Serial time implied by the recorded ratio.
    pub fn t_serial(&self) -> f64 {
        self.ratio * self.t_total
    }
}

/// Device time `(M n / N) tau_f + N tau_n + tau_k`.
pub fn device_cost(n: f64, n_slices: usize, samples: usize, p: &CostParams) -> f64 {
    let big_n = n_slices as f64;
    samples as f64 * n / big_n * p.tau_f + big_n * p.tau_n + p.tau_k
}

/// Serial time `n tau_f_cpu`.
pub fn serial_cost(n: f64, p: &CostParams) -> f64 {
    n * p.tau_f_cpu
}

pub fn speedup(n: f64, n_slices: usize, samples: usize, p: &CostParams) -> f64 {
    serial_cost(n, p) / device_cost(n, n_slices, samples, p)
}

/// Speedup with the fixed overhead dropped: `N n kF / (M n + N^2 kN)`.
pub fn approx_speedup(n: f64, n_slices: f64, samples: f64, kappa_f: f64, kappa_n: f64) -> f64 {
    n_slices * n * kappa_f / (samples * n + n_slices * n_slices * kappa_n)
}

/// Fitted parameters with per-observation device-time residuals
/// (`measured - predicted`).
#[derive(Debug, Clone, PartialEq)]
pub struct CostFit {
    pub params: CostParams,
    pub residuals: Vec<f64>,
}

/// Ordinary least squares for `(tau_f, tau_n, tau_k)` on the device times,
/// and a one-parameter fit of `tau_f_cpu` on the implied serial times.
pub fn fit_params(observations: &[CostObservation], horizon: f64) -> Result<CostFit> {
    const UNKNOWNS: usize = 3;
    let rows = observations.len();
    if rows < UNKNOWNS {
        return Err(Error::RankDeficient {
            rank: rows,
            needed: UNKNOWNS,
        });
    }
    let steps = observations
        .iter()
        .map(|o| o.steps(horizon))
        .collect::<Result<Vec<_>>>()?;
    if let Some(o) = observations.iter().find(|o| o.n_slices == 0 || o.samples == 0) {
        return Err(Error::InvalidArgument(format!("slice and sample counts must be positive: {o:?}")));
    }

    let design = DMatrix::from_fn(rows, UNKNOWNS, |i, j| {
        let o = &observations[i];
        match j {
            0 => o.samples as f64 * steps[i] / o.n_slices as f64,
            1 => o.n_slices as f64,
            _ => 1.0,
        }
    });
    let rhs = DVector::from_iterator(rows, observations.iter().map(|o| o.t_total));

    let svd = design.clone().svd(true, true);
    let s_max = svd.singular_values.max();
    let tol = s_max * rows.max(UNKNOWNS) as f64 * f64::EPSILON;
    let rank = svd.singular_values.iter().filter(|&&s| s > tol).count();
    if rank < UNKNOWNS {
        return Err(Error::RankDeficient {
            rank,
            needed: UNKNOWNS,
        });
    }
    let x = svd
        .solve(&rhs, tol)
        .map_err(|e| Error::InvalidArgument(e.to_string()))?;
    let residuals = (&rhs - &design * &x).iter().copied().collect();

    let (num, den) = observations
        .iter()
        .zip(&steps)
        .filter(|(o, _)| o.ratio > 0.0)
        .fold((0.0, 0.0), |(num, den), (o, n)| (num + n * o.t_serial(), den + n * n));
    let tau_f_cpu = if den > 0.0 { num / den } else { 0.0 };

    Ok(CostFit {
        params: CostParams {
            tau_f: x[0],
            tau_n: x[1],
            tau_k: x[2],
            tau_f_cpu,
        },
        residuals,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OptimalSlices {
    pub n_slices: usize,
    /// Predicted speedup `(kF / (2 sqrt(kN))) n^((1 - alpha) / 2)` divided by `kF`.
    pub speedup_scale: f64,
}

impl OptimalSlices {
    pub fn predicted_speedup(&self, kappa_f: f64) -> f64 {
        kappa_f * self.speedup_scale
    }
}

/// Slice count `round(sqrt(n^(alpha + 1) / kN))` that balances sampling and
/// map application when `M ~ n^alpha`.
pub fn optimal_slices(n: f64, alpha: f64, kappa_n: f64) -> Result<OptimalSlices> {
    if !(0.0..1.0).contains(&alpha) {
        return Err(Error::InvalidArgument(format!("alpha must lie in [0, 1), got {alpha}")));
    }
    if !(kappa_n > 0.0) || !(n >= 1.0) {
        return Err(Error::InvalidArgument(format!(
            "need n >= 1 and kappa_n > 0, got n = {n}, kappa_n = {kappa_n}"
        )));
    }
    let n_slices = (n.powf(alpha + 1.0) / kappa_n).sqrt().round().max(1.0) as usize;
    let speedup_scale = n.powf((1.0 - alpha) / 2.0) / (2.0 * kappa_n.sqrt());
    Ok(OptimalSlices {
        n_slices,
        speedup_scale,
    })
}

/// Parse `dt, N, M, T_total, ratio` lines. `#` starts a comment; `dt` may be
/// written as `2^-14`.
pub fn parse_observations(text: &str) -> Result<Vec<CostObservation>> {
    let mut out = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let bad = |what: &str| Error::InvalidArgument(format!("line {}: {what}: '{raw}'", lineno + 1));
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        if fields.len() != 5 {
            return Err(bad("expected 5 comma-separated fields"));
        }
        let dt = parse_step(fields[0]).ok_or_else(|| bad("bad dt"))?;
        let n_slices = fields[1].parse().map_err(|_| bad("bad slice count"))?;
        let samples = fields[2].parse().map_err(|_| bad("bad sample count"))?;
        let t_total = fields[3].parse().map_err(|_| bad("bad total time"))?;
        let ratio = fields[4].parse().map_err(|_| bad("bad ratio"))?;
        if !(dt > 0.0) {
            return Err(bad("dt must be positive"));
        }
        out.push(CostObservation {
            dt,
            n_slices,
            samples,
            t_total,
            ratio,
        });
    }
    Ok(out)
}

fn parse_step(s: &str) -> Option<f64> {
    match s.split_once('^') {
        Some((base, exp)) => {
            let base: f64 = base.trim().parse().ok()?;
            let exp: i32 = exp.trim().parse().ok()?;
            Some(base.powi(exp))
        }
        None => s.parse().ok(),
    }
}
