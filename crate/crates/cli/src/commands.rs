//! Subcommand bodies. Each takes its parameters and an execution config and
//! returns a `Report` whose manifest echoes every parameter.

use std::path::PathBuf;

use nievergelt_core::cost_model::{self, CostParams};
use nievergelt_core::harness::ExecConfig;
use nievergelt_core::interp::{InitialValueSpace, NodeKind};
use nievergelt_core::nievergelt;
use nievergelt_core::ode::{ScalarIvp, StepPolicy, TimeSliceDecomposition};
use nievergelt_core::parareal::{self, PararealConfig};
use nievergelt_core::pde::{self, WaveProblem};
use nievergelt_core::{Error as CoreError, RunReport};

use crate::error::CliError;
use crate::table::{Cell, Report, Table};

pub const SCALAR_Y0: f64 = 1.0;

fn join<T: ToString>(items: &[T]) -> String {
    items.iter().map(T::to_string).collect::<Vec<_>>().join(",")
}

fn kv(key: &str, value: impl ToString) -> (String, String) {
    (key.to_string(), value.to_string())
}

fn exec_manifest(exec: &ExecConfig) -> Vec<(String, String)> {
    vec![kv("workers", exec.workers), kv("latency", exec.latency)]
}

fn non_empty<T>(items: &[T], flag: &str) -> Result<(), CliError> {
    if items.is_empty() {
        return Err(CliError::Usage(format!("{flag} needs at least one value")));
    }
    Ok(())
}

fn scalar_problem(final_time: f64) -> Result<ScalarIvp, CliError> {
    if !(final_time > 0.0 && final_time < 1.0) {
        return Err(CliError::Usage(format!(
            "final time must lie in (0, 1) for y' = y^2 with y(0) = 1, got {final_time}"
        )));
    }
    Ok(ScalarIvp::riccati())
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScalarTableArgs {
    pub dts: Vec<f64>,
    pub cheb_points: Vec<usize>,
    pub slices: Vec<usize>,
    pub nodes: NodeKind,
    pub policy: StepPolicy,
    pub space: (f64, f64),
    pub final_time: f64,
}

impl Default for ScalarTableArgs {
    fn default() -> Self {
        Self {
            dts: vec![0.01, 0.005, 0.0025, 0.001, 0.0001],
            cheb_points: (3..=7).collect(),
            slices: vec![4],
            nodes: NodeKind::Lobatto,
            policy: StepPolicy::Refine,
            space: (0.0, 2.0),
            final_time: 0.5,
        }
    }
}

/// Error against the exact solution over the `dt x M` grid, one row per `(N, dt)`.
pub fn scalar_table(args: &ScalarTableArgs, exec: &ExecConfig) -> Result<Report, CliError> {
    non_empty(&args.dts, "--dt")?;
    non_empty(&args.cheb_points, "--cheb-points")?;
    non_empty(&args.slices, "--slices")?;
    let problem = scalar_problem(args.final_time)?;

    let mut headers = vec!["N".to_string(), "dt".to_string()];
    headers.extend(args.cheb_points.iter().map(|m| format!("M={m}")));
    let mut table = Table::with_headers("errors", headers);
    for &n in &args.slices {
        for &dt in &args.dts {
            let decomp = TimeSliceDecomposition::new(0.0, args.final_time, n, dt, args.policy)?;
            let mut row = vec![Cell::from(n), Cell::from(dt)];
            for &m in &args.cheb_points {
                let space = InitialValueSpace::new(args.space.0, args.space.1, m, args.nodes)?;
                let r = nievergelt::run_scalar(&problem, &decomp, &space, exec)?;
                row.push(r.error_vs_exact.into());
            }
            table.push(row);
        }
    }

    let mut manifest = vec![
        kv("command", "scalar-table"),
        kv("dt", join(&args.dts)),
        kv("cheb-points", join(&args.cheb_points)),
        kv("slices", join(&args.slices)),
        kv("nodes", args.nodes.name()),
        kv("step-policy", args.policy.name()),
        kv("space", format!("{},{}", args.space.0, args.space.1)),
        kv("final-time", args.final_time),
    ];
    manifest.extend(exec_manifest(exec));
    Ok(Report {
        manifest,
        tables: vec![table],
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct CompareArgs {
    pub dt: f64,
    pub cheb_points: usize,
    pub coarse_dt: f64,
    pub iterations: Vec<usize>,
    pub slices: Vec<usize>,
    pub nodes: NodeKind,
    pub policy: StepPolicy,
    pub space: (f64, f64),
    pub final_time: f64,
}

impl Default for CompareArgs {
    fn default() -> Self {
        Self {
            dt: 1e-4,
            cheb_points: 6,
            coarse_dt: 0.1,
            iterations: vec![2, 3, 5],
            slices: vec![1, 2, 4, 8, 16, 32, 64],
            nodes: NodeKind::Gauss,
            policy: StepPolicy::Refine,
            space: (0.0, 2.0),
            final_time: 0.5,
        }
    }
}

/// Nievergelt error next to parareal errors for each iteration count.
pub fn compare(args: &CompareArgs, exec: &ExecConfig) -> Result<Report, CliError> {
    non_empty(&args.slices, "--slices")?;
    let problem = scalar_problem(args.final_time)?;
    let space = InitialValueSpace::new(args.space.0, args.space.1, args.cheb_points, args.nodes)?;

    let mut headers = vec!["N".to_string(), "nievergelt".to_string()];
    headers.extend(args.iterations.iter().map(|k| format!("parareal k={k}")));
    let mut table = Table::with_headers("errors", headers);
    for &n in &args.slices {
        let decomp = TimeSliceDecomposition::new(0.0, args.final_time, n, args.dt, args.policy)?;
        let mut row = vec![Cell::from(n)];
        row.push(nievergelt::run_scalar(&problem, &decomp, &space, exec)?.error_vs_exact.into());
        for &k in &args.iterations {
            let cfg = PararealConfig::new(args.dt, args.coarse_dt, k, n)?.with_policy(args.policy);
            let r = parareal::run_parareal(&problem, &SCALAR_Y0, 0.0, args.final_time, &cfg, exec)?;
            row.push(r.error_vs_exact.into());
        }
        table.push(row);
    }

    let mut manifest = vec![
        kv("command", "compare"),
        kv("dt", args.dt),
        kv("cheb-points", args.cheb_points),
        kv("coarse-dt", args.coarse_dt),
        kv("iterations", join(&args.iterations)),
        kv("slices", join(&args.slices)),
        kv("nodes", args.nodes.name()),
        kv("step-policy", args.policy.name()),
        kv("space", format!("{},{}", args.space.0, args.space.1)),
        kv("final-time", args.final_time),
    ];
    manifest.extend(exec_manifest(exec));
    Ok(Report {
        manifest,
        tables: vec![table],
    })
}

/// Columns of the heat and wave timing tables.
pub const TIMING_HEADERS: [&str; 11] = [
    "method",
    "k",
    "N",
    "T_total",
    "T_comm",
    "modeled_time",
    "modeled_comm",
    "messages",
    "bytes",
    "error_vs_serial",
    "error_vs_exact",
];

fn timing_row(r: &RunReport, k: Option<usize>) -> Vec<Cell> {
    let n = r.n_slices();
    // a single slice never communicates
    let comm = |v: f64| if n == 1 { Cell::Empty } else { Cell::Float(v) };
    vec![
        r.config.method.name().into(),
        k.map_or(Cell::Empty, Cell::from),
        n.into(),
        r.t_total.into(),
        comm(r.t_comm),
        r.modeled_time.into(),
        if n == 1 { Cell::Empty } else { r.modeled_comm.into() },
        r.message_count.into(),
        r.bytes_communicated.into(),
        r.error_vs_serial.into(),
        r.error_vs_exact.into(),
    ]
}

#[derive(Debug, Clone, PartialEq)]
pub struct HeatArgs {
    pub slices: Vec<usize>,
    pub dt: f64,
    pub dx: f64,
    pub final_time: f64,
    pub policy: StepPolicy,
    /// Parareal iteration counts to run next to Nievergelt; empty for none.
    pub iterations: Vec<usize>,
    pub coarse_dt: f64,
}

impl Default for HeatArgs {
    fn default() -> Self {
        Self {
            slices: vec![1, 2, 4, 8, 16, 32, 64, 128],
            dt: 0.005,
            dx: 0.1,
            final_time: 10.0,
            policy: StepPolicy::Refine,
            iterations: Vec::new(),
            coarse_dt: 0.1,
        }
    }
}

pub fn heat(args: &HeatArgs, exec: &ExecConfig) -> Result<Report, CliError> {
    non_empty(&args.slices, "--slices")?;
    let evo = pde::heat_evolution(args.dx)?;
    let y0 = evo.system.initial_state();
    let mut table = Table::new("runs", &TIMING_HEADERS);
    for &n in &args.slices {
        let decomp = TimeSliceDecomposition::new(0.0, args.final_time, n, args.dt, args.policy)?;
        table.push(timing_row(&nievergelt::run_linear(&evo, &y0, &decomp, exec)?, None));
    }
    for &k in &args.iterations {
        for &n in &args.slices {
            let cfg = PararealConfig::new(args.dt, args.coarse_dt, k, n)?.with_policy(args.policy);
            let r = parareal::run_parareal(&evo, &y0, 0.0, args.final_time, &cfg, exec)?;
            table.push(timing_row(&r, Some(k)));
        }
    }

    let mut manifest = vec![
        kv("command", "heat"),
        kv("slices", join(&args.slices)),
        kv("dt", args.dt),
        kv("dx", args.dx),
        kv("final-time", args.final_time),
        kv("step-policy", args.policy.name()),
        kv("iterations", join(&args.iterations)),
        kv("coarse-dt", args.coarse_dt),
    ];
    manifest.extend(exec_manifest(exec));
    Ok(Report {
        manifest,
        tables: vec![table],
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct WaveArgs {
    pub slices: Vec<usize>,
    pub wave_points: usize,
    pub final_time: f64,
}

impl Default for WaveArgs {
    fn default() -> Self {
        Self {
            slices: vec![1, 2, 4, 8, 16],
            wave_points: 40,
            final_time: 16.0,
        }
    }
}

pub fn wave(args: &WaveArgs, exec: &ExecConfig) -> Result<Report, CliError> {
    non_empty(&args.slices, "--slices")?;
    let wave = WaveProblem::new(args.wave_points)?;
    let y0 = wave.initial_state();
    let mut table = Table::new("runs", &TIMING_HEADERS);
    for &n in &args.slices {
        // the leapfrog step is tied to the grid, so slices must hold whole steps
        let decomp = TimeSliceDecomposition::new(0.0, args.final_time, n, wave.dt, StepPolicy::Strict)?;
        table.push(timing_row(&nievergelt::run_linear(&wave, &y0, &decomp, exec)?, None));
    }

    let mut manifest = vec![
        kv("command", "wave"),
        kv("slices", join(&args.slices)),
        kv("wave-points", args.wave_points),
        kv("dt", wave.dt),
        kv("pulse-sigma", wave.sigma),
        kv("final-time", args.final_time),
    ];
    manifest.extend(exec_manifest(exec));
    Ok(Report {
        manifest,
        tables: vec![table],
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct CostModelArgs {
    /// Observation file; the shipped device timings when absent.
    pub fixture: Option<PathBuf>,
    pub horizon: f64,
}

impl Default for CostModelArgs {
    fn default() -> Self {
        Self {
            fixture: None,
            horizon: cost_model::DEFAULT_HORIZON,
        }
    }
}

const FIT_HINT: &str = "the fit needs at least 3 observations whose (M n / N, N) pairs are not collinear; \
                        vary both the slice count and the step size";

pub fn costmodel(args: &CostModelArgs) -> Result<Report, CliError> {
    let text = match &args.fixture {
        Some(path) => std::fs::read_to_string(path)
            .map_err(|e| CliError::Usage(format!("cannot read fixture {}: {e}", path.display())))?,
        None => cost_model::GPU_TIMINGS.to_string(),
    };
    let obs = cost_model::parse_observations(&text)?;
    if obs.is_empty() {
        return Err(CliError::Usage("fixture contains no observations".into()));
    }
    let fit = cost_model::fit_params(&obs, args.horizon).map_err(|e| match e {
        e @ CoreError::RankDeficient { .. } => CliError::Fit {
            source: e,
            hint: FIT_HINT.into(),
        },
        e => CliError::Run(e),
    })?;
    let p: CostParams = fit.params;

    let mut params = Table::new("parameters", &["name", "value"]);
    for (name, v) in [
        ("tau_f", p.tau_f),
        ("tau_n", p.tau_n),
        ("tau_k", p.tau_k),
        ("tau_f_cpu", p.tau_f_cpu),
        ("kappa_f", p.kappa_f()),
        ("kappa_n", p.kappa_n()),
    ] {
        params.push(vec![name.into(), v.into()]);
    }

    let mut rows = Table::new(
        "observations",
        &["dt", "N", "M", "steps", "T_total", "T_predicted", "residual", "speedup", "speedup_predicted"],
    );
    for (o, res) in obs.iter().zip(&fit.residuals) {
        let n = o.steps(args.horizon)?;
        rows.push(vec![
            o.dt.into(),
            o.n_slices.into(),
            o.samples.into(),
            n.into(),
            o.t_total.into(),
            cost_model::device_cost(n, o.n_slices, o.samples, &p).into(),
            (*res).into(),
            o.ratio.into(),
            cost_model::speedup(n, o.n_slices, o.samples, &p).into(),
        ]);
    }

    let source = args
        .fixture
        .as_ref()
        .map_or_else(|| "builtin".to_string(), |p| p.display().to_string());
    Ok(Report {
        manifest: vec![
            kv("command", "costmodel"),
            kv("fixture", source),
            kv("horizon", args.horizon),
        ],
        tables: vec![params, rows],
    })
}
