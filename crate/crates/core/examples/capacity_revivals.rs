//! Quantum capacity under 1/f² noise from ten fluctuators revives near
//! multiples of π/2.

use std::f64::consts::FRAC_PI_2;

use nmdephasing::kernels::{dephasing_trace, uniform_grid, ColoredParams, NoiseModel};
use nmdephasing::measures::{quantum_capacity_curve, two_qubit_capacity};

fn main() -> nmdephasing::Result<()> {
    let params = ColoredParams::with_default_window(2.0, 10)?;
    let times = uniform_grid(10.0, 1e-3)?;
    let trace = dephasing_trace(&NoiseModel::Colored(params), &times, None)?;
    let c = quantum_capacity_curve(&trace);
    for i in 1..c.len() - 1 {
        if c[i] > 1e-6 && c[i] > c[i - 1] && c[i] >= c[i + 1] {
            println!(
                "maximum at τ = {:.3} ({:.4} π/2): C_Q = {:.5}, two qubits {:.5}",
                times[i],
                times[i] / FRAC_PI_2,
                c[i],
                two_qubit_capacity(c[i])?
            );
        }
    }
    Ok(())
}
