//! Telegraph-noise dephasing across the Markovian threshold at γ = 2.

use nmdephasing::kernels::{dephasing_trace, uniform_grid, NoiseModel, RtnParams};
use nmdephasing::measures::{non_markovianity_regime, quantum_capacity_curve, trace_distance_curve, Regime};

fn main() -> nmdephasing::Result<()> {
    let times = uniform_grid(10.0, 0.01)?;
    for gamma in [0.01, 0.5, 2.0, 5.0] {
        let model = NoiseModel::Rtn(RtnParams::new(gamma)?);
        let trace = dephasing_trace(&model, &times, None)?;
        let d = trace_distance_curve(&trace);
        let c = quantum_capacity_curve(&trace);
        println!("γ = {gamma}");
        for i in (0..times.len()).step_by(100) {
            println!(
                "  τ = {:>5.2}  Γ = {:>9.6}  D = {:.6}  C_Q = {:.6}",
                times[i],
                trace.values()[i],
                d[i],
                c[i]
            );
        }
        let backflow: Vec<_> = non_markovianity_regime(&trace)
            .into_iter()
            .filter(|r| r.regime == Regime::NonMarkovian)
            .map(|r| (r.start, r.end))
            .collect();
        println!("  backflow intervals: {}", backflow.len());
        for (a, b) in backflow.iter().take(3) {
            println!("    [{a:.3}, {b:.3}]");
        }
    }
    Ok(())
}
