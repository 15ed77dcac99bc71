//! Trajectory averages of exp(2iφ) against the analytic kernels.

use nmdephasing::kernels::{colored_dephasing, rtn_dephasing, ColoredParams, RtnParams};
use nmdephasing::mc_oracle::{mc_colored_dephasing, mc_rtn_dephasing, EnsembleStats};

fn report(label: &str, stats: &EnsembleStats, exact: impl Fn(f64) -> f64) {
    println!("{label}");
    for (i, &tau) in stats.tau_grid.iter().enumerate() {
        let g = exact(tau);
        let z = (stats.mean_re[i] - g) / stats.stderr[i];
        println!(
            "  τ = {tau:>4}  MC = {:>9.6} ± {:.6}  exact = {g:>9.6}  z = {z:>6.2}",
            stats.mean_re[i], stats.stderr[i]
        );
    }
}

fn main() -> nmdephasing::Result<()> {
    let grid = [0.5, 1.0, 2.0, 5.0];
    let n = 100_000;

    let rtn = RtnParams::new(1.0)?;
    let stats = mc_rtn_dephasing(&rtn, &grid, n, 1)?;
    report("telegraph γ = 1", &stats, |t| rtn_dephasing(t, &rtn).unwrap());

    for nf in [1, 3] {
        let colored = ColoredParams::with_default_window(1.0, nf)?;
        let stats = mc_colored_dephasing(&colored, &grid, n, 2)?;
        report(&format!("1/f, N_f = {nf}"), &stats, |t| {
            colored_dephasing(t, &colored).unwrap()
        });
    }
    Ok(())
}
