//! `nmdephasing` command line: `trace`, `measure`, `mc-validate` and
//! `closed-forms`.

mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::bail;
use clap::{Parser, Subcommand};
use rayon::prelude::*;
use serde::Serialize;

pub use config::{parse_list, Flags, Format, NoiseKind, RunConfig, SweepParam, OUT_DIR_ENV};

use crate::kernels::{self, ColoredParams, NoiseModel, RtnParams};
use crate::mc_oracle;
use crate::measures::{self, Cached, Horizon, MeasureReport, MeasureSettings, Powered};
use config::CommandDefaults;

#[derive(Debug, Parser)]
#[command(
    name = "nmdephasing",
    version,
    about = "Qubit dephasing and non-Markovianity under telegraph and 1/f^alpha noise"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Dephasing factor, trace distance and capacity over time.
    Trace(Flags),
    /// BLP and BCM measures over a parameter sweep.
    Measure(Flags),
    /// Compare Monte Carlo trajectories with the analytic or quadrature kernel.
    #[command(name = "mc-validate")]
    McValidate(Flags),
    /// Telegraph closed forms next to their numerical estimates.
    #[command(name = "closed-forms")]
    ClosedForms(Flags),
}

/// Outcome of a subcommand that ran to completion.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Ok,
    /// Some computation did not converge or a validation failed.
    Failed,
}

const USAGE_EXIT: u8 = 2;

/// Entry point of the binary.
pub fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(Status::Ok) => ExitCode::SUCCESS,
        Ok(Status::Failed) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(USAGE_EXIT)
        }
    }
}

pub fn run(command: Command) -> anyhow::Result<Status> {
    let out_dir = std::env::var_os(OUT_DIR_ENV).map(PathBuf::from);
    let (flags, defaults) = match command {
        Command::Trace(f) => (f, TRACE),
        Command::Measure(f) => (f, MEASURE),
        Command::McValidate(f) => (f, MC_VALIDATE),
        Command::ClosedForms(f) => (f, CLOSED_FORMS),
    };
    let flags = flags.with_config_file()?;
    let config = RunConfig::resolve(&flags, &defaults, out_dir.as_deref())?;
    match defaults.name {
        "trace" => cmd_trace(&config),
        "measure" => cmd_measure(&config),
        "mc-validate" => cmd_mc_validate(&config),
        _ => cmd_closed_forms(&config),
    }
}

const TRACE: CommandDefaults = CommandDefaults {
    name: "trace",
    noise: NoiseKind::Rtn,
    gamma: "1",
    tmax: 20.0,
    dt: 0.01,
};

const MEASURE: CommandDefaults = CommandDefaults {
    name: "measure",
    noise: NoiseKind::Rtn,
    gamma: "0.05:3:20:log",
    tmax: measures::COLORED_HORIZON,
    dt: 0.01,
};

const MC_VALIDATE: CommandDefaults = CommandDefaults {
    name: "mc-validate",
    noise: NoiseKind::Rtn,
    gamma: "1",
    tmax: 5.0,
    dt: 0.5,
};

const CLOSED_FORMS: CommandDefaults = CommandDefaults {
    name: "closed-forms",
    noise: NoiseKind::Rtn,
    gamma: "0.1,0.5,1,1.5,2.5",
    tmax: measures::RTN_MAX_HORIZON,
    dt: 0.01,
};

fn single_model(config: &RunConfig) -> anyhow::Result<NoiseModel> {
    Ok(match config.noise {
        NoiseKind::Rtn => NoiseModel::Rtn(RtnParams::new(RunConfig::single(&config.gamma, "gamma")?)?),
        NoiseKind::Colored => NoiseModel::Colored(ColoredParams::new(
            RunConfig::single(&config.alpha, "alpha")?,
            RunConfig::single(&config.nf, "nf")?,
            config.effective_window(),
        )?),
    })
}

#[derive(Debug, Serialize)]
pub struct TraceRow {
    pub tau: f64,
    pub gamma_value: f64,
    pub trace_distance: f64,
    pub quantum_capacity: f64,
}

fn cmd_trace(config: &RunConfig) -> anyhow::Result<Status> {
    let model = single_model(config)?;
    let times = kernels::uniform_grid(config.tmax, config.dt)?;
    let trace = kernels::dephasing_trace(&model, &times, None)?;
    let d = measures::trace_distance_curve(&trace);
    let c = measures::quantum_capacity_curve(&trace);
    let rows: Vec<TraceRow> = (0..trace.len())
        .map(|i| TraceRow {
            tau: trace.times()[i],
            gamma_value: trace.values()[i],
            trace_distance: d[i],
            quantum_capacity: c[i],
        })
        .collect();
    output::write_table(config, &rows)?;
    if config.gnuplot {
        output::write_gnuplot(config, &[(3, "D"), (4, "C_Q")], false)?;
    }
    Ok(Status::Ok)
}

#[derive(Debug, Serialize)]
pub struct MeasureRow {
    pub param: f64,
    pub n_blp: f64,
    pub n_bcm: f64,
    pub converged: bool,
}

#[derive(Debug, Serialize)]
struct MeasureJsonRow {
    param: f64,
    #[serde(flatten)]
    report: MeasureReport,
}

fn colored_settings(config: &RunConfig) -> MeasureSettings {
    let horizon = if config.horizon_doubling {
        Horizon::Doubling {
            initial: config.tmax,
            max_doublings: 4,
        }
    } else {
        Horizon::Fixed(config.tmax)
    };
    MeasureSettings {
        dt: config.dt,
        horizon,
        ..Default::default()
    }
}

fn cmd_measure(config: &RunConfig) -> anyhow::Result<Status> {
    let reports: Vec<(f64, MeasureReport)> = match config.sweep {
        SweepParam::Gamma => config
            .gamma
            .par_iter()
            .map(|&g| {
                let p = RtnParams::new(g)?;
                let mut settings = MeasureSettings::for_rtn(&p);
                settings.dt = config.dt;
                Ok((g, measures::estimate_measures(&p, &settings)?))
            })
            .collect::<crate::Result<_>>()?,
        SweepParam::Alpha => {
            let nf = RunConfig::single(&config.nf, "nf")?;
            let settings = colored_settings(config);
            config
                .alpha
                .par_iter()
                .map(|&a| {
                    let p = ColoredParams::new(a, nf, config.effective_window())?;
                    let base = Cached::new(p.with_fluctuators(1)?);
                    let source = Powered { base: &base, n: nf };
                    Ok((a, measures::estimate_measures(&source, &settings)?))
                })
                .collect::<crate::Result<_>>()?
        }
        SweepParam::Nf => {
            let alpha = RunConfig::single(&config.alpha, "alpha")?;
            let settings = colored_settings(config);
            // All fluctuator counts share one single-fluctuator evaluation per time.
            let base = Cached::new(ColoredParams::new(alpha, 1, config.effective_window())?);
            config
                .nf
                .iter()
                .map(|&n| {
                    let source = Powered { base: &base, n };
                    Ok((n as f64, measures::estimate_measures(&source, &settings)?))
                })
                .collect::<crate::Result<_>>()?
        }
    };

    let all_converged = reports.iter().all(|(_, r)| r.converged);
    for (param, r) in reports.iter().filter(|(_, r)| !r.converged) {
        eprintln!(
            "warning: measures at {param} did not converge (horizon {}, dt {:e})",
            r.horizon, r.dt
        );
    }
    match config.format {
        Format::Csv => {
            let rows: Vec<MeasureRow> = reports
                .iter()
                .map(|(param, r)| MeasureRow {
                    param: *param,
                    n_blp: r.n_blp,
                    n_bcm: r.n_bcm,
                    converged: r.converged,
                })
                .collect();
            output::write_table(config, &rows)?;
        }
        Format::Json => {
            let rows: Vec<MeasureJsonRow> = reports
                .into_iter()
                .map(|(param, report)| MeasureJsonRow { param, report })
                .collect();
            output::write_table(config, &rows)?;
        }
    }
    if config.gnuplot {
        output::write_gnuplot(config, &[(2, "N_BLP"), (3, "N_BCM")], config.sweep == SweepParam::Gamma)?;
    }
    Ok(if all_converged { Status::Ok } else { Status::Failed })
}

#[derive(Debug, Serialize)]
pub struct ValidationRow {
    pub tau: f64,
    pub mc_mean: f64,
    pub mc_stderr: f64,
    pub reference: f64,
    pub z_score: f64,
}

/// Fraction of points beyond 4σ above which validation fails.
const OUTLIER_FRACTION: f64 = 0.01;

fn cmd_mc_validate(config: &RunConfig) -> anyhow::Result<Status> {
    let model = single_model(config)?;
    let times = kernels::uniform_grid(config.tmax, config.dt)?;
    let (stats, reference) = match model {
        NoiseModel::Rtn(p) => {
            let reference = RtnParams::new(config.compare_gamma.unwrap_or(p.gamma))?;
            (
                mc_oracle::mc_rtn_dephasing(&p, &times, config.ntraj, config.seed)?,
                kernels::sample(&reference, &times)?,
            )
        }
        NoiseModel::Colored(p) => {
            if config.compare_gamma.is_some() {
                bail!("--compare-gamma applies to telegraph noise; use --compare-alpha");
            }
            let reference = ColoredParams::new(config.compare_alpha.unwrap_or(p.alpha), p.n_fluctuators, p.window())?;
            (
                mc_oracle::mc_colored_dephasing(&p, &times, config.ntraj, config.seed)?,
                kernels::sample(&reference, &times)?,
            )
        }
    };

    let rows: Vec<ValidationRow> = (0..times.len())
        .map(|i| {
            let diff = stats.mean_re[i] - reference[i];
            let se = stats.stderr[i];
            let z = if se > 0.0 {
                diff / se
            } else if diff.abs() < 1e-12 {
                0.0
            } else {
                f64::INFINITY.copysign(diff)
            };
            ValidationRow {
                tau: times[i],
                mc_mean: stats.mean_re[i],
                mc_stderr: se,
                reference: reference[i],
                z_score: z,
            }
        })
        .collect();

    let beyond3 = rows.iter().filter(|r| r.z_score.abs() > 3.0).count();
    let beyond4 = rows.iter().filter(|r| r.z_score.abs() > 4.0).count();
    let passed = (beyond4 as f64) <= OUTLIER_FRACTION * rows.len() as f64;
    output::write_table(config, &rows)?;
    eprintln!(
        "{} points, {} beyond 3 sigma (about {:.2} expected by chance), {} beyond 4 sigma: {}",
        rows.len(),
        beyond3,
        0.0027 * rows.iter().filter(|r| r.mc_stderr > 0.0).count() as f64,
        beyond4,
        if passed { "PASS" } else { "FAIL" }
    );
    Ok(if passed { Status::Ok } else { Status::Failed })
}

#[derive(Debug, Serialize)]
pub struct ClosedFormRow {
    pub gamma: f64,
    pub n_blp_closed: f64,
    pub n_blp_numeric: f64,
    pub n_blp_rel_err: f64,
    pub n_bcm_series: f64,
    pub n_bcm_numeric: f64,
    pub n_bcm_rel_err: f64,
}

fn relative_error(numeric: f64, exact: f64) -> f64 {
    if exact == 0.0 {
        numeric.abs()
    } else {
        (numeric - exact).abs() / exact.abs()
    }
}

fn cmd_closed_forms(config: &RunConfig) -> anyhow::Result<Status> {
    if config.noise != NoiseKind::Rtn {
        bail!("closed forms exist only for telegraph noise");
    }
    let results: Vec<(ClosedFormRow, bool)> = config
        .gamma
        .par_iter()
        .map(|&g| {
            let p = RtnParams::new(g)?;
            let mut settings = MeasureSettings::for_rtn(&p);
            settings.dt = config.dt;
            let r = measures::estimate_measures(&p, &settings)?;
            let blp = measures::rtn_blp_closed(&p);
            let bcm = measures::rtn_bcm_series(&p);
            Ok((
                ClosedFormRow {
                    gamma: g,
                    n_blp_closed: blp,
                    n_blp_numeric: r.n_blp,
                    n_blp_rel_err: relative_error(r.n_blp, blp),
                    n_bcm_series: bcm,
                    n_bcm_numeric: r.n_bcm,
                    n_bcm_rel_err: relative_error(r.n_bcm, bcm),
                },
                r.converged,
            ))
        })
        .collect::<crate::Result<_>>()?;
    let converged = results.iter().all(|(_, c)| *c);
    let rows: Vec<ClosedFormRow> = results.into_iter().map(|(r, _)| r).collect();
    output::write_table(config, &rows)?;
    Ok(if converged { Status::Ok } else { Status::Failed })
}
