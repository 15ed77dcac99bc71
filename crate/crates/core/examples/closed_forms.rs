//! Numeric BLP and BCM measures of telegraph noise against their closed forms.

use nmdephasing::kernels::RtnParams;
use nmdephasing::measures::{estimate_measures, rtn_bcm_series, rtn_blp_closed, MeasureSettings};

fn main() -> nmdephasing::Result<()> {
    println!(
        "{:>6} {:>12} {:>12} {:>10} {:>12} {:>12} {:>10}",
        "γ", "BLP closed", "BLP", "rel", "BCM series", "BCM", "rel"
    );
    for gamma in [0.05, 0.1, 0.5, 1.0, 1.5, 1.9, 2.0, 3.0] {
        let p = RtnParams::new(gamma)?;
        let report = estimate_measures(&p, &MeasureSettings::for_rtn(&p))?;
        let (blp, bcm) = (rtn_blp_closed(&p), rtn_bcm_series(&p));
        let rel = |x: f64, y: f64| if y == 0.0 { (x - y).abs() } else { (x - y).abs() / y };
        println!(
            "{gamma:>6} {blp:>12.6} {:>12.6} {:>10.2e} {bcm:>12.6} {:>12.6} {:>10.2e}",
            report.n_blp,
            rel(report.n_blp, blp),
            report.n_bcm,
            rel(report.n_bcm, bcm)
        );
    }
    Ok(())
}
