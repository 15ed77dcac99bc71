//! Command-line flags, the JSON config file that mirrors them, and the
//! resolved [`RunConfig`].

use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use clap::{Args, ValueEnum};
use serde::{Deserialize, Serialize};

use crate::kernels::{RateWindow, DEFAULT_RATE_WINDOW};

/// Directory used for outputs when `--out` is relative or absent.
pub const OUT_DIR_ENV: &str = "NMDEPHASING_OUT_DIR";

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NoiseKind {
    Rtn,
    Colored,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

impl Format {
    pub fn extension(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SweepParam {
    Gamma,
    Alpha,
    Nf,
}

/// A list of values in a config file: `"0.1,0.5"`, `"0.05:3:20:log"`, `1.5`
/// or `[1, 2]`.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(untagged)]
enum ListValue {
    Text(String),
    Number(f64),
    Numbers(Vec<f64>),
}

fn list_to_text<'de, D: serde::Deserializer<'de>>(d: D) -> Result<Option<String>, D::Error> {
    Ok(Option::<ListValue>::deserialize(d)?.map(|v| match v {
        ListValue::Text(s) => s,
        ListValue::Number(x) => x.to_string(),
        ListValue::Numbers(xs) => xs.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(","),
    }))
}

/// Flags shared by every subcommand. A JSON config file with the same keys
/// (snake_case) supplies defaults; flags on the command line win.
#[derive(Debug, Clone, Default, Args, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Flags {
    /// JSON file with default values for any of these flags.
    #[arg(long)]
    #[serde(skip)]
    pub config: Option<PathBuf>,

    #[arg(long, value_enum)]
    pub noise: Option<NoiseKind>,

    /// Switching rate(s): `a,b,c`, `start:stop:count` or `start:stop:count:log`.
    #[arg(long, allow_hyphen_values = true)]
    #[serde(deserialize_with = "list_to_text")]
    pub gamma: Option<String>,

    /// Spectral exponent(s), same list syntax as `--gamma`.
    #[arg(long, allow_hyphen_values = true)]
    #[serde(deserialize_with = "list_to_text")]
    pub alpha: Option<String>,

    /// Number(s) of fluctuators, same list syntax as `--gamma`.
    #[arg(long, allow_hyphen_values = true)]
    #[serde(deserialize_with = "list_to_text")]
    pub nf: Option<String>,

    /// Rate window `min,max` for colored noise (default 1e-4,1e4).
    #[arg(long)]
    pub window: Option<String>,

    /// Final time (trace, mc-validate) or initial horizon (measure).
    #[arg(long, allow_hyphen_values = true)]
    pub tmax: Option<f64>,

    /// Time step.
    #[arg(long, allow_hyphen_values = true)]
    pub dt: Option<f64>,

    /// Monte Carlo trajectories.
    #[arg(long)]
    pub ntraj: Option<usize>,

    #[arg(long)]
    pub seed: Option<u64>,

    /// Output file; stdout when absent and the output directory variable is unset.
    #[arg(long)]
    pub out: Option<PathBuf>,

    #[arg(long, value_enum)]
    pub format: Option<Format>,

    /// Omit the generation-time line so reruns are byte-identical.
    #[arg(long)]
    pub no_header_timestamp: bool,

    /// Also write a gnuplot script next to the output file.
    #[arg(long)]
    pub gnuplot: bool,

    /// Parameter swept by `measure`.
    #[arg(long, value_enum)]
    pub sweep: Option<SweepParam>,

    /// Keep the horizon fixed at `--tmax` instead of doubling it until the
    /// measures settle (colored noise).
    #[arg(long)]
    pub no_horizon_doubling: bool,

    /// Compare Monte Carlo against a kernel with this rate instead (negative control).
    #[arg(long)]
    pub compare_gamma: Option<f64>,

    /// Compare Monte Carlo against a kernel with this exponent instead.
    #[arg(long)]
    pub compare_alpha: Option<f64>,
}

impl Flags {
    /// Fill unset flags from the config file, if one was given.
    pub fn with_config_file(self) -> anyhow::Result<Self> {
        let Some(path) = self.config.clone() else {
            return Ok(self);
        };
        let text = std::fs::read_to_string(&path).with_context(|| format!("reading config file {}", path.display()))?;
        let file: Flags =
            serde_json::from_str(&text).with_context(|| format!("parsing config file {}", path.display()))?;
        Ok(Flags {
            config: self.config,
            noise: self.noise.or(file.noise),
            gamma: self.gamma.or(file.gamma),
            alpha: self.alpha.or(file.alpha),
            nf: self.nf.or(file.nf),
            window: self.window.or(file.window),
            tmax: self.tmax.or(file.tmax),
            dt: self.dt.or(file.dt),
            ntraj: self.ntraj.or(file.ntraj),
            seed: self.seed.or(file.seed),
            out: self.out.or(file.out),
            format: self.format.or(file.format),
            no_header_timestamp: self.no_header_timestamp || file.no_header_timestamp,
            gnuplot: self.gnuplot || file.gnuplot,
            sweep: self.sweep.or(file.sweep),
            no_horizon_doubling: self.no_horizon_doubling || file.no_horizon_doubling,
            compare_gamma: self.compare_gamma.or(file.compare_gamma),
            compare_alpha: self.compare_alpha.or(file.compare_alpha),
        })
    }
}

/// Parse `a,b,c`, `start:stop:count` or `start:stop:count:log`.
pub fn parse_list(text: &str) -> anyhow::Result<Vec<f64>> {
    let text = text.trim();
    if text.is_empty() {
        bail!("empty value list");
    }
    if text.contains(':') {
        let parts: Vec<&str> = text.split(':').collect();
        let log = match parts.len() {
            3 => false,
            4 if parts[3] == "log" => true,
            4 if parts[3] == "lin" => false,
            _ => bail!("range must be start:stop:count[:log|lin], got {text:?}"),
        };
        let start: f64 = parts[0]
            .parse()
            .with_context(|| format!("bad range start in {text:?}"))?;
        let stop: f64 = parts[1]
            .parse()
            .with_context(|| format!("bad range stop in {text:?}"))?;
        let count: usize = parts[2]
            .parse()
            .with_context(|| format!("bad range count in {text:?}"))?;
        if count == 0 {
            bail!("range {text:?} has no points");
        }
        if log && !(start > 0.0 && stop > 0.0) {
            bail!("log range needs positive endpoints, got {text:?}");
        }
        if count == 1 {
            return Ok(vec![start]);
        }
        let (a, b) = if log { (start.ln(), stop.ln()) } else { (start, stop) };
        return Ok((0..count)
            .map(|i| {
                let x = a + (b - a) * i as f64 / (count - 1) as f64;
                if log {
                    x.exp()
                } else {
                    x
                }
            })
            .collect());
    }
    text.split(',')
        .map(|s| {
            s.trim()
                .parse::<f64>()
                .with_context(|| format!("bad number {s:?} in {text:?}"))
        })
        .collect()
}

fn parse_window(text: &str) -> anyhow::Result<RateWindow> {
    let v = parse_list(text)?;
    if v.len() != 2 {
        bail!("window must be min,max, got {text:?}");
    }
    RateWindow::new(v[0], v[1]).map_err(Into::into)
}

/// Fully resolved run parameters; written as a JSON sidecar next to outputs.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub command: String,
    pub noise: NoiseKind,
    pub gamma: Vec<f64>,
    pub alpha: Vec<f64>,
    pub nf: Vec<u32>,
    pub window: Option<RateWindow>,
    pub tmax: f64,
    pub dt: f64,
    pub ntraj: usize,
    pub seed: u64,
    pub out: Option<PathBuf>,
    pub format: Format,
    pub header_timestamp: bool,
    pub gnuplot: bool,
    pub sweep: SweepParam,
    pub horizon_doubling: bool,
    pub compare_gamma: Option<f64>,
    pub compare_alpha: Option<f64>,
}

/// Defaults that differ between subcommands.
pub struct CommandDefaults {
    pub name: &'static str,
    pub noise: NoiseKind,
    pub gamma: &'static str,
    pub tmax: f64,
    pub dt: f64,
}

impl RunConfig {
    pub fn resolve(flags: &Flags, defaults: &CommandDefaults, out_dir: Option<&Path>) -> anyhow::Result<Self> {
        let noise = flags.noise.unwrap_or(defaults.noise);
        let gamma = parse_list(flags.gamma.as_deref().unwrap_or(defaults.gamma))?;
        let alpha = parse_list(flags.alpha.as_deref().unwrap_or("1"))?;
        let nf_default = if defaults.name == "measure" && noise == NoiseKind::Colored {
            "1,2,5,10,20,50,100"
        } else {
            "1"
        };
        let nf = parse_list(flags.nf.as_deref().unwrap_or(nf_default))?
            .into_iter()
            .map(|x| {
                if x >= 1.0 && x.fract() == 0.0 && x <= u32::MAX as f64 {
                    Ok(x as u32)
                } else {
                    bail!("fluctuator count must be a positive integer, got {x}")
                }
            })
            .collect::<anyhow::Result<Vec<u32>>>()?;
        let window = flags.window.as_deref().map(parse_window).transpose()?;
        if window.is_some() && noise == NoiseKind::Rtn {
            bail!("--window applies only to --noise colored");
        }
        if let Some(g) = gamma.iter().find(|g| !(**g > 0.0 && g.is_finite())) {
            bail!("switching rate must be positive, got {g}");
        }
        if let Some(a) = alpha.iter().find(|a| !(**a > 0.0 && a.is_finite())) {
            bail!("spectral exponent must be positive, got {a}");
        }

        let tmax = flags.tmax.unwrap_or(defaults.tmax);
        let dt = flags.dt.unwrap_or(defaults.dt);
        if !(tmax.is_finite() && tmax > 0.0) {
            bail!("--tmax must be positive, got {tmax}");
        }
        if !(dt.is_finite() && dt > 0.0 && dt <= tmax) {
            bail!("--dt must be in (0, tmax], got {dt}");
        }

        let sweep = flags.sweep.unwrap_or(match noise {
            NoiseKind::Rtn => SweepParam::Gamma,
            NoiseKind::Colored => SweepParam::Nf,
        });
        if noise == NoiseKind::Rtn && sweep != SweepParam::Gamma {
            bail!("telegraph noise can only be swept over gamma");
        }
        if noise == NoiseKind::Colored && sweep == SweepParam::Gamma {
            bail!("colored noise is swept over alpha or nf");
        }
        let format = flags.format.unwrap_or(Format::Csv);
        let out = match (&flags.out, out_dir) {
            (Some(p), Some(dir)) if p.is_relative() => Some(dir.join(p)),
            (Some(p), _) => Some(p.clone()),
            (None, Some(dir)) => Some(dir.join(format!("{}.{}", defaults.name, format.extension()))),
            (None, None) => None,
        };

        Ok(Self {
            command: defaults.name.to_string(),
            noise,
            gamma,
            alpha,
            nf,
            window,
            tmax,
            dt,
            ntraj: flags.ntraj.unwrap_or(100_000),
            seed: flags.seed.unwrap_or(1),
            out,
            format,
            header_timestamp: !flags.no_header_timestamp,
            gnuplot: flags.gnuplot,
            sweep,
            horizon_doubling: !flags.no_horizon_doubling,
            compare_gamma: flags.compare_gamma,
            compare_alpha: flags.compare_alpha,
        })
    }

    pub fn effective_window(&self) -> RateWindow {
        self.window.unwrap_or(DEFAULT_RATE_WINDOW)
    }

    /// The single value of a list that is not being swept.
    pub fn single<T: Copy + std::fmt::Display>(values: &[T], name: &str) -> anyhow::Result<T> {
        match values {
            [v] => Ok(*v),
            _ => bail!("--{name} takes a single value here, got {} values", values.len()),
        }
    }
}
