use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use nievergelt_cli::commands::{self, CompareArgs, CostModelArgs, HeatArgs, ScalarTableArgs, WaveArgs};
use nievergelt_cli::{CliError, Precision, Report};
use nievergelt_core::harness::{self, ClockMode, ExecConfig};
use nievergelt_core::interp::NodeKind;
use nievergelt_core::ode::StepPolicy;

#[derive(Parser)]
#[command(name = "nievergelt", version, about = "Parallel-in-time benchmark tables")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Nievergelt error for y' = y^2 over a grid of step sizes and node counts.
    ScalarTable {
        /// Fine step sizes (comma list).
        #[arg(long, value_delimiter = ',', default_values_t = [0.01, 0.005, 0.0025, 0.001, 0.0001])]
        dt: Vec<f64>,
        /// Interpolation node counts (comma list).
        #[arg(long, value_delimiter = ',', default_values_t = [3, 4, 5, 6, 7])]
        cheb_points: Vec<usize>,
        #[arg(long, value_delimiter = ',', default_values_t = [4])]
        slices: Vec<usize>,
        #[arg(long, default_value = "lobatto")]
        nodes: NodeKind,
        #[arg(long, default_value = "refine")]
        step_policy: StepPolicy,
        #[command(flatten)]
        space: SpaceArgs,
        #[arg(long, default_value_t = 0.5)]
        final_time: f64,
        #[command(flatten)]
        common: Common,
    },
    /// Nievergelt against parareal on y' = y^2.
    Compare {
        #[arg(long, default_value_t = 1e-4)]
        dt: f64,
        #[arg(long, default_value_t = 6)]
        cheb_points: usize,
        #[arg(long, default_value_t = 0.1)]
        coarse_dt: f64,
        /// Parareal iteration counts (comma list).
        #[arg(long, value_delimiter = ',', default_values_t = [2, 3, 5])]
        iterations: Vec<usize>,
        #[arg(long, value_delimiter = ',', default_values_t = [1, 2, 4, 8, 16, 32, 64])]
        slices: Vec<usize>,
        #[arg(long, default_value = "gauss")]
        nodes: NodeKind,
        #[arg(long, default_value = "refine")]
        step_policy: StepPolicy,
        #[command(flatten)]
        space: SpaceArgs,
        #[arg(long, default_value_t = 0.5)]
        final_time: f64,
        #[command(flatten)]
        common: Common,
    },
    /// Timing and communication table for the 1-D heat equation.
    Heat {
        #[arg(long, value_delimiter = ',', default_values_t = [1, 2, 4, 8, 16, 32, 64, 128])]
        slices: Vec<usize>,
        #[arg(long, default_value_t = 0.005)]
        dt: f64,
        #[arg(long, default_value_t = 0.1)]
        dx: f64,
        #[arg(long, default_value_t = 10.0)]
        final_time: f64,
        #[arg(long, default_value = "refine")]
        step_policy: StepPolicy,
        /// Also run parareal with these iteration counts (comma list).
        #[arg(long, value_delimiter = ',')]
        iterations: Vec<usize>,
        #[arg(long, default_value_t = 0.1)]
        coarse_dt: f64,
        #[command(flatten)]
        common: Common,
    },
    /// Timing and communication table for the 1-D wave equation.
    Wave {
        #[arg(long, value_delimiter = ',', default_values_t = [1, 2, 4, 8, 16])]
        slices: Vec<usize>,
        /// Chebyshev grid size M (the leapfrog step is 8 / M^2).
        #[arg(long, default_value_t = 40)]
        wave_points: usize,
        #[arg(long, default_value_t = 16.0)]
        final_time: f64,
        #[command(flatten)]
        common: Common,
    },
    /// Fit the device cost model to timing observations.
    Costmodel {
        /// Lines of `dt, N, M, T_total, T_cpu/T_total`; the shipped timings when omitted.
        #[arg(long)]
        fixture: Option<PathBuf>,
        #[arg(long, default_value_t = nievergelt_core::cost_model::DEFAULT_HORIZON)]
        horizon: f64,
        #[command(flatten)]
        output: OutputArgs,
    },
}

#[derive(Args)]
struct SpaceArgs {
    /// Lower end of the sampled initial-value interval.
    #[arg(long, default_value_t = 0.0)]
    space_min: f64,
    #[arg(long, default_value_t = 2.0)]
    space_max: f64,
}

#[derive(Args)]
struct Common {
    /// Seconds added to every message receive.
    #[arg(long, default_value_t = 0.0)]
    latency: f64,
    /// Worker threads (defaults to NIEVERGELT_WORKERS or 1).
    #[arg(long)]
    workers: Option<usize>,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Markdown,
}

#[derive(Args)]
struct OutputArgs {
    #[arg(long, value_enum, default_value = "csv")]
    format: Format,
    /// Write here instead of standard output.
    #[arg(long)]
    output: Option<PathBuf>,
    /// Significant digits for floats, or `full`.
    #[arg(long, default_value = "3")]
    precision: Precision,
}

impl Common {
    fn exec(&self) -> Result<ExecConfig, CliError> {
        let workers = self.workers.unwrap_or_else(harness::workers_from_env);
        Ok(ExecConfig::new(workers, self.latency, ClockMode::Both)?)
    }
}

fn run(cli: Cli) -> Result<(Report, OutputArgs), CliError> {
    Ok(match cli.command {
        Command::ScalarTable {
            dt,
            cheb_points,
            slices,
            nodes,
            step_policy,
            space,
            final_time,
            common,
        } => {
            let args = ScalarTableArgs {
                dts: dt,
                cheb_points,
                slices,
                nodes,
                policy: step_policy,
                space: (space.space_min, space.space_max),
                final_time,
            };
            (commands::scalar_table(&args, &common.exec()?)?, common.output)
        }
        Command::Compare {
            dt,
            cheb_points,
            coarse_dt,
            iterations,
            slices,
            nodes,
            step_policy,
            space,
            final_time,
            common,
        } => {
            let args = CompareArgs {
                dt,
                cheb_points,
                coarse_dt,
                iterations,
                slices,
                nodes,
                policy: step_policy,
                space: (space.space_min, space.space_max),
                final_time,
            };
            (commands::compare(&args, &common.exec()?)?, common.output)
        }
        Command::Heat {
            slices,
            dt,
            dx,
            final_time,
            step_policy,
            iterations,
            coarse_dt,
            common,
        } => {
            let args = HeatArgs {
                slices,
                dt,
                dx,
                final_time,
                policy: step_policy,
                iterations,
                coarse_dt,
            };
            (commands::heat(&args, &common.exec()?)?, common.output)
        }
        Command::Wave {
            slices,
            wave_points,
            final_time,
            common,
        } => {
            let args = WaveArgs {
                slices,
                wave_points,
                final_time,
            };
            (commands::wave(&args, &common.exec()?)?, common.output)
        }
        Command::Costmodel {
            fixture,
            horizon,
            output,
        } => (commands::costmodel(&CostModelArgs { fixture, horizon })?, output),
    })
}

fn emit(mut report: Report, out: &OutputArgs) -> Result<(), CliError> {
    let format = match out.format {
        Format::Csv => "csv",
        Format::Markdown => "markdown",
    };
    let precision = match out.precision {
        Precision::Full => "full".to_string(),
        Precision::Digits(d) => d.to_string(),
    };
    report.manifest.push(("format".into(), format.into()));
    report.manifest.push(("precision".into(), precision));
    let target = out.output.as_ref().map_or_else(|| "-".to_string(), |p| p.display().to_string());
    report.manifest.push(("output".into(), target));

    let text = match out.format {
        Format::Csv => report.to_csv(out.precision)?,
        Format::Markdown => report.to_markdown(out.precision),
    };
    match &out.output {
        Some(path) => std::fs::write(path, text).map_err(|source| CliError::Io {
            path: path.clone(),
            source,
        }),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(text.as_bytes())
                .and_then(|_| stdout.flush())
                .map_err(|source| CliError::Io {
                    path: "<stdout>".into(),
                    source,
                })
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli).and_then(|(report, out)| emit(report, &out)) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
