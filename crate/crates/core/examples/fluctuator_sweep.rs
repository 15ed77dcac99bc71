//! Memory effects wash out as more fluctuators contribute to the noise.

use nmdephasing::kernels::ColoredParams;
use nmdephasing::measures::{estimate_measures, Cached, Horizon, MeasureSettings, Powered};

fn main() -> nmdephasing::Result<()> {
    let settings = MeasureSettings::default().with_horizon(Horizon::Fixed(50.0));
    let counts = [1u32, 2, 5, 10, 20, 50, 100];
    for alpha in [0.5, 1.0, 1.5, 2.0] {
        // Λ(τ, α, N_f) = Λ(τ, α, 1)^N_f, so one cached base serves every N_f.
        let base = Cached::new(ColoredParams::with_default_window(alpha, 1)?);
        println!("α = {alpha}");
        for n in counts {
            let r = estimate_measures(&Powered { base: &base, n }, &settings)?;
            println!("  N_f = {n:>3}  N_BLP = {:>10.6}  N_BCM = {:>10.6}", r.n_blp, r.n_bcm);
        }
    }
    Ok(())
}
