//! Writing result tables as CSV or JSON, plus the config sidecar and the
//! optional gnuplot script.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use anyhow::Context;
use serde::Serialize;

use super::config::{Format, RunConfig};

fn open(out: Option<&Path>) -> anyhow::Result<Box<dyn Write>> {
    Ok(match out {
        Some(path) => {
            if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
                std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
            }
            let f = File::create(path).with_context(|| format!("creating {}", path.display()))?;
            Box::new(BufWriter::new(f))
        }
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn unix_seconds() -> u64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0)
}

fn sibling(path: &Path, suffix: &str) -> PathBuf {
    let mut name = path.file_name().unwrap_or_default().to_os_string();
    name.push(suffix);
    path.with_file_name(name)
}

#[derive(Serialize)]
struct JsonTable<'a, R: Serialize> {
    #[serde(skip_serializing_if = "Option::is_none")]
    generated_unix: Option<u64>,
    command: &'a str,
    rows: &'a [R],
}

/// Write `rows` in the configured format. CSV headers come from the field
/// names of `R`.
pub fn write_table<R: Serialize>(config: &RunConfig, rows: &[R]) -> anyhow::Result<()> {
    let mut sink = open(config.out.as_deref())?;
    let stamp = config.header_timestamp.then(unix_seconds);
    match config.format {
        Format::Csv => {
            if let Some(t) = stamp {
                writeln!(sink, "# generated_unix={t}")?;
            }
            let mut w = csv::Writer::from_writer(sink);
            for row in rows {
                w.serialize(row)?;
            }
            w.flush()?;
        }
        Format::Json => {
            let table = JsonTable {
                generated_unix: stamp,
                command: &config.command,
                rows,
            };
            serde_json::to_writer_pretty(&mut sink, &table)?;
            writeln!(sink)?;
            sink.flush()?;
        }
    }

    if let Some(path) = &config.out {
        let sidecar = sibling(path, ".config.json");
        let text = serde_json::to_string_pretty(config)?;
        std::fs::write(&sidecar, text + "\n").with_context(|| format!("writing {}", sidecar.display()))?;
    }
    Ok(())
}

/// Gnuplot script plotting `columns` (1-based, against column 1) of the
/// CSV output.
pub fn write_gnuplot(config: &RunConfig, columns: &[(usize, &str)], logscale: bool) -> anyhow::Result<()> {
    let Some(path) = &config.out else {
        anyhow::bail!("--gnuplot needs an output file");
    };
    if config.format != Format::Csv {
        anyhow::bail!("--gnuplot needs --format csv");
    }
    let data = path.file_name().unwrap_or_default().to_string_lossy();
    let mut script = String::new();
    script.push_str("set datafile separator ','\nset key autotitle columnhead\n");
    if logscale {
        script.push_str("set logscale xy\n");
    }
    let plots: Vec<String> = columns
        .iter()
        .map(|(c, title)| format!("'{data}' using 1:{c} with lines title '{title}'"))
        .collect();
    script.push_str(&format!("plot {}\n", plots.join(", \\\n     ")));
    let gp = sibling(path, ".gp");
    std::fs::write(&gp, script).with_context(|| format!("writing {}", gp.display()))?;
    Ok(())
}
