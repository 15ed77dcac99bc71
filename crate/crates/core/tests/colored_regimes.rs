use nmdephasing::kernels::{colored_dephasing, dephasing_trace, uniform_grid, ColoredParams, NoiseModel};
use nmdephasing::measures::{estimate_measures, Cached, Horizon, MeasureSettings, Powered};

fn settings() -> MeasureSettings {
    MeasureSettings::default().with_horizon(Horizon::Fixed(50.0))
}

#[test]
fn single_fluctuator_is_always_non_markovian() {
    for alpha in [0.5, 0.6, 0.8, 0.9, 1.0, 1.3, 1.5, 2.0] {
        let p = ColoredParams::with_default_window(alpha, 1).unwrap();
        let r = estimate_measures(&Cached::new(p), &settings()).unwrap();
        assert!(r.n_blp > 0.0 && r.n_bcm > 0.0, "α = {alpha}");
    }
}

#[test]
fn sub_unit_exponent_never_fully_dephases() {
    let times = uniform_grid(50.0, 0.01).unwrap();
    for alpha in [0.5, 0.8] {
        let p = ColoredParams::with_default_window(alpha, 1).unwrap();
        let trace = dephasing_trace(&NoiseModel::Colored(p), &times, None).unwrap();
        let lowest = trace.values().iter().copied().fold(f64::INFINITY, f64::min);
        assert!(lowest > 0.5, "α = {alpha}: Λ reaches {lowest}");
    }
}

#[test]
fn unit_exponent_alternates_revival_heights() {
    let p = ColoredParams::with_default_window(1.0, 1).unwrap();
    let peaks: Vec<f64> = (1..=4)
        .map(|k| {
            colored_dephasing(k as f64 * std::f64::consts::FRAC_PI_2, &p)
                .unwrap()
                .abs()
        })
        .collect();
    assert!(peaks[0] < peaks[1] && peaks[2] < peaks[1] && peaks[2] < peaks[3]);
}

#[test]
fn memory_is_weak_below_unit_exponent() {
    let counts = [1u32, 2, 5, 10, 20, 50, 100];
    let weak = Cached::new(ColoredParams::with_default_window(0.5, 1).unwrap());
    let strong = Cached::new(ColoredParams::with_default_window(1.0, 1).unwrap());
    let reference = estimate_measures(&strong, &settings()).unwrap();
    for n in counts {
        let r = estimate_measures(&Powered { base: &weak, n }, &settings()).unwrap();
        assert!(r.n_blp < 0.01 * reference.n_blp, "N_f = {n}: {}", r.n_blp);
        assert!(r.n_bcm < 0.02 * reference.n_bcm, "N_f = {n}: {}", r.n_bcm);
    }
}

#[test]
fn many_fluctuators_approach_markovian_dynamics() {
    let base = Cached::new(ColoredParams::with_default_window(1.0, 1).unwrap());
    let r = estimate_measures(&Powered { base: &base, n: 100 }, &settings()).unwrap();
    assert!(r.n_blp < 1e-6 && r.n_bcm < 1e-6);
}
