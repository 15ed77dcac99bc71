//! One 1/f fluctuator: restricting the rate window to fast or slow switchers
//! moves the evolution between the Markovian and non-Markovian regimes.

use nmdephasing::kernels::{dephasing_trace, uniform_grid, ColoredParams, NoiseModel, RateWindow, DEFAULT_RATE_WINDOW};
use nmdephasing::measures::{estimate_measures, Cached, Horizon, MeasureSettings};

fn main() -> nmdephasing::Result<()> {
    let settings = MeasureSettings::default().with_horizon(Horizon::Fixed(50.0));
    let times = uniform_grid(8.0, 1.0)?;
    for (label, window) in [
        ("full", DEFAULT_RATE_WINDOW),
        ("fast", RateWindow::new(2.0, 1e4)?),
        ("slow", RateWindow::new(1e-4, 2.0)?),
    ] {
        let params = ColoredParams::new(1.0, 1, window)?;
        let trace = dephasing_trace(&NoiseModel::Colored(params), &times, None)?;
        let report = estimate_measures(&Cached::new(params), &settings)?;
        let values: Vec<String> = trace.values().iter().map(|v| format!("{v:.3}")).collect();
        println!(
            "{label:>4} [{:.0e}, {:.0e}]  Λ(0..8) = {}",
            window.min,
            window.max,
            values.join(" ")
        );
        println!(
            "     N_BLP = {:.4}  N_BCM = {:.4}  converged = {}",
            report.n_blp, report.n_bcm, report.converged
        );
    }
    Ok(())
}
