//! Dephasing kernels for telegraph and 1/f^α noise.
//!
//! Times and rates are dimensionless: `tau = nu * t` and `gamma = xi / nu`,
//! where `nu` is the qubit-noise coupling and `xi` the switching rate.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};
use crate::quadrature::{self, QuadratureOptions};

/// Default window of fluctuator switching rates, `[1e-4, 1e4]`.
pub const DEFAULT_RATE_WINDOW: RateWindow = RateWindow { min: 1e-4, max: 1e4 };

/// Below this distance from `gamma = 2` the kernel is evaluated by a power
/// series in `(gamma^2 - 4) tau^2`, which is regular at the critical point.
const CRITICAL_BAND: f64 = 1e-6;

/// Largest `|(gamma^2 - 4) tau^2|` handled by the series.
const SERIES_LIMIT: f64 = 16.0;

/// Parameters of a single random telegraph fluctuator.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RtnParams {
    pub gamma: f64,
}

impl RtnParams {
    pub fn new(gamma: f64) -> Result<Self> {
        if !(gamma.is_finite() && gamma > 0.0) {
            return Err(domain(format!("switching rate must be positive, got {gamma}")));
        }
        Ok(Self { gamma })
    }

    /// Angular frequency `sqrt(4 - gamma^2)` of the underdamped regime.
    pub fn oscillation_frequency(&self) -> Option<f64> {
        (self.gamma < 2.0).then(|| ((2.0 - self.gamma) * (2.0 + self.gamma)).sqrt())
    }
}

/// Closed interval of switching rates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RateWindow {
    pub min: f64,
    pub max: f64,
}

impl RateWindow {
    pub fn new(min: f64, max: f64) -> Result<Self> {
        if !(min.is_finite() && max.is_finite() && min > 0.0 && max > min) {
            return Err(domain(format!("rate window needs 0 < min < max, got [{min}, {max}]")));
        }
        Ok(Self { min, max })
    }

    fn log_width(&self) -> f64 {
        (self.max / self.min).ln()
    }
}

/// Parameters of 1/f^α noise built from `n_fluctuators` telegraph processes
/// whose rates are drawn from a power law on `[gamma_min, gamma_max]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ColoredParams {
    pub alpha: f64,
    pub n_fluctuators: u32,
    pub gamma_min: f64,
    pub gamma_max: f64,
}

impl ColoredParams {
    pub fn new(alpha: f64, n_fluctuators: u32, window: RateWindow) -> Result<Self> {
        if !(alpha.is_finite() && alpha > 0.0) {
            return Err(domain(format!("spectral exponent must be positive, got {alpha}")));
        }
        if n_fluctuators == 0 {
            return Err(domain("at least one fluctuator is required"));
        }
        let window = RateWindow::new(window.min, window.max)?;
        Ok(Self {
            alpha,
            n_fluctuators,
            gamma_min: window.min,
            gamma_max: window.max,
        })
    }

    /// Same spectrum on the default rate window.
    pub fn with_default_window(alpha: f64, n_fluctuators: u32) -> Result<Self> {
        Self::new(alpha, n_fluctuators, DEFAULT_RATE_WINDOW)
    }

    pub fn window(&self) -> RateWindow {
        RateWindow {
            min: self.gamma_min,
            max: self.gamma_max,
        }
    }

    /// Copy with a different rate window; the rate density is renormalized on it.
    pub fn with_window(&self, window: RateWindow) -> Result<Self> {
        Self::new(self.alpha, self.n_fluctuators, window)
    }

    pub fn with_fluctuators(&self, n_fluctuators: u32) -> Result<Self> {
        Self::new(self.alpha, n_fluctuators, self.window())
    }

    fn validate(&self) -> Result<()> {
        Self::new(self.alpha, self.n_fluctuators, self.window()).map(|_| ())
    }

    /// Density of `u = ln gamma`, i.e. `p(gamma) * gamma`, up to the
    /// `exp(-(alpha - 1)(u - u_min))` factor: returns `(prefactor, alpha - 1)`.
    fn log_rate_density(&self) -> (f64, f64) {
        let width = self.window().log_width();
        let s = self.alpha - 1.0;
        if s == 0.0 {
            (1.0 / width, 0.0)
        } else {
            (s / -(-s * width).exp_m1(), s)
        }
    }
}

/// Something that yields a dephasing factor `Γ(τ)`.
pub trait Dephasing: Sync {
    fn dephasing(&self, tau: f64) -> Result<f64>;
}

impl Dephasing for RtnParams {
    fn dephasing(&self, tau: f64) -> Result<f64> {
        rtn_dephasing(tau, self)
    }
}

impl Dephasing for ColoredParams {
    fn dephasing(&self, tau: f64) -> Result<f64> {
        colored_dephasing(tau, self)
    }
}

/// A noise source of either kind.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum NoiseModel {
    Rtn(RtnParams),
    Colored(ColoredParams),
}

impl Dephasing for NoiseModel {
    fn dephasing(&self, tau: f64) -> Result<f64> {
        match self {
            NoiseModel::Rtn(p) => p.dephasing(tau),
            NoiseModel::Colored(p) => p.dephasing(tau),
        }
    }
}

fn check_tau(tau: f64) -> Result<()> {
    if !(tau.is_finite() && tau >= 0.0) {
        return Err(domain(format!("time must be finite and nonnegative, got {tau}")));
    }
    Ok(())
}

/// `cosh(d tau)` and `sinh(d tau) / d` as power series in `x = d^2 tau^2`.
fn critical_series(x: f64, tau: f64) -> (f64, f64) {
    let mut c = 1.0;
    let mut s = 1.0;
    let mut term_c = 1.0;
    let mut term_s = 1.0;
    for k in 1..60 {
        let k = k as f64;
        term_c *= x / ((2.0 * k - 1.0) * (2.0 * k));
        term_s *= x / ((2.0 * k) * (2.0 * k + 1.0));
        c += term_c;
        s += term_s;
        if term_c.abs() < 1e-17 * c.abs() && term_s.abs() < 1e-17 * s.abs() {
            break;
        }
    }
    (c, tau * s)
}

/// `(G, dG/dτ)` for a single telegraph fluctuator. Inputs must already be valid.
pub(crate) fn rtn_kernel_and_slope(tau: f64, gamma: f64) -> (f64, f64) {
    if tau == 0.0 {
        return (1.0, 0.0);
    }
    let disc = (gamma - 2.0) * (gamma + 2.0);
    let x = disc * tau * tau;

    if (gamma - 2.0).abs() < CRITICAL_BAND && x.abs() <= SERIES_LIMIT {
        let (c, s) = critical_series(x, tau);
        let env = (-gamma * tau).exp();
        return (env * (c + gamma * s), -4.0 * env * s);
    }

    if gamma < 2.0 {
        let omega = (-disc).sqrt();
        let env = (-gamma * tau).exp();
        let (sin, cos) = (omega * tau).sin_cos();
        let s = sin / omega;
        (env * (cos + gamma * s), -4.0 * env * s)
    } else {
        // Overdamped: factor out the slow exponential exp(-(gamma - delta) tau).
        let delta = disc.sqrt();
        let slow = (-4.0 / (gamma + delta) * tau).exp();
        let fast_ratio = (-2.0 * delta * tau).exp();
        let g = 0.5 * slow * ((1.0 + gamma / delta) + (1.0 - gamma / delta) * fast_ratio);
        let slope = -2.0 / delta * slow * -(-2.0 * delta * tau).exp_m1();
        (g, slope)
    }
}

/// Dephasing factor `G(τ, γ) = <exp(2iφ(τ))>` of a single telegraph fluctuator.
pub fn rtn_dephasing(tau: f64, params: &RtnParams) -> Result<f64> {
    check_tau(tau)?;
    RtnParams::new(params.gamma)?;
    let (g, _) = rtn_kernel_and_slope(tau, params.gamma);
    Ok(g.clamp(-1.0, 1.0))
}

/// Probability density of the switching rate on the window of `params`.
pub fn switching_rate_pdf(gamma: f64, params: &ColoredParams) -> Result<f64> {
    params.validate()?;
    if !(gamma >= params.gamma_min && gamma <= params.gamma_max) {
        return Err(domain(format!(
            "rate {gamma} outside [{}, {}]",
            params.gamma_min, params.gamma_max
        )));
    }
    if params.alpha == 1.0 {
        return Ok(1.0 / (gamma * params.window().log_width()));
    }
    // Same expression as (α-1) γ^-α (γ1 γ2)^(α-1) / (γ2^(α-1) - γ1^(α-1)),
    // rearranged so that it stays finite for α near 1 and for large |α - 1|.
    let (prefactor, s) = params.log_rate_density();
    Ok(prefactor * (-s * (gamma / params.gamma_min).ln()).exp() / gamma)
}

fn colored_quadrature() -> QuadratureOptions {
    QuadratureOptions {
        rel_tol: 1e-8,
        abs_tol: 1e-12,
        max_depth: 60,
        initial_panels: 16,
    }
}

/// Rate-averaged single fluctuator factor `∫ G(τ, γ) p_α(γ) dγ`.
pub fn fluctuator_average(tau: f64, params: &ColoredParams) -> Result<f64> {
    check_tau(tau)?;
    params.validate()?;
    if tau == 0.0 {
        return Ok(1.0);
    }
    let (prefactor, s) = params.log_rate_density();
    let u_min = params.gamma_min.ln();
    let u_max = params.gamma_max.ln();
    let integrand = |u: f64| {
        let (g, _) = rtn_kernel_and_slope(tau, u.exp());
        g * prefactor * (-s * (u - u_min)).exp()
    };
    let r = quadrature::integrate(integrand, u_min, u_max, &colored_quadrature())?;
    Ok(r.value.clamp(-1.0, 1.0))
}

/// Dephasing factor `Λ(τ, α, N_f)` of 1/f^α noise.
pub fn colored_dephasing(tau: f64, params: &ColoredParams) -> Result<f64> {
    let single = fluctuator_average(tau, params)?;
    Ok(single.powi(params.n_fluctuators as i32))
}

/// Sampled dephasing factor on a time grid starting at zero.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DephasingTrace {
    times: Vec<f64>,
    values: Vec<f64>,
}

impl DephasingTrace {
    pub fn new(times: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        check_grid(&times)?;
        if values.len() != times.len() {
            return Err(domain(format!("{} times but {} values", times.len(), values.len())));
        }
        if (values[0] - 1.0).abs() > 1e-12 {
            return Err(domain(format!("Γ(0) must be 1, got {}", values[0])));
        }
        if let Some(v) = values.iter().find(|v| !(-1.0..=1.0).contains(*v)) {
            return Err(domain(format!("dephasing value {v} outside [-1, 1]")));
        }
        Ok(Self { times, values })
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn horizon(&self) -> f64 {
        *self.times.last().expect("trace has at least two points")
    }

    /// Pointwise `Γ^n`, the factor of `n` independent identical sources.
    pub fn powi(&self, n: u32) -> Self {
        Self {
            times: self.times.clone(),
            values: self.values.iter().map(|v| v.powi(n as i32)).collect(),
        }
    }
}

/// Grid must start at zero, increase strictly and have at least two points.
pub fn check_grid(times: &[f64]) -> Result<()> {
    if times.len() < 2 {
        return Err(domain("time grid needs at least two points"));
    }
    if times[0] != 0.0 {
        return Err(domain(format!("time grid must start at 0, got {}", times[0])));
    }
    if times.iter().any(|t| !t.is_finite()) || times.windows(2).any(|w| w[1] <= w[0]) {
        return Err(domain("time grid must be finite and strictly increasing"));
    }
    Ok(())
}

/// `0, dt, 2 dt, ...` up to the last multiple of `dt` not exceeding `horizon`
/// (within rounding).
pub fn uniform_grid(horizon: f64, dt: f64) -> Result<Vec<f64>> {
    if !(horizon.is_finite() && horizon > 0.0) {
        return Err(domain(format!("horizon must be positive, got {horizon}")));
    }
    if !(dt.is_finite() && dt > 0.0 && dt <= horizon) {
        return Err(domain(format!("time step must be in (0, horizon], got {dt}")));
    }
    let steps = (horizon / dt + 1e-9).floor() as usize;
    Ok((0..=steps).map(|i| i as f64 * dt).collect())
}

/// Evaluate `source` on every grid point.
pub fn sample<D: Dephasing + ?Sized>(source: &D, times: &[f64]) -> Result<Vec<f64>> {
    times.par_iter().map(|&t| source.dephasing(t)).collect()
}

/// Dephasing trace of `model` on `times`. For colored noise `window`, when
/// given, replaces the rate window of the parameters.
pub fn dephasing_trace(model: &NoiseModel, times: &[f64], window: Option<RateWindow>) -> Result<DephasingTrace> {
    check_grid(times)?;
    let values = match (model, window) {
        (NoiseModel::Rtn(_), Some(_)) => return Err(domain("a rate window applies only to colored noise")),
        (NoiseModel::Rtn(p), None) => sample(p, times)?,
        (NoiseModel::Colored(p), w) => {
            let params = match w {
                Some(w) => p.with_window(w)?,
                None => *p,
            };
            // One quadrature per time point, then the N_f-th power.
            let single = params.with_fluctuators(1)?;
            sample(&single, times)?
                .into_iter()
                .map(|v| v.powi(params.n_fluctuators as i32))
                .collect()
        }
    };
    DephasingTrace::new(times.to_vec(), values)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn rtn(g: f64) -> RtnParams {
        RtnParams::new(g).unwrap()
    }

    #[test]
    fn kernel_is_one_at_origin() {
        for g in [0.01, 1.0, 2.0, 3.0, 100.0] {
            assert_eq!(rtn_dephasing(0.0, &rtn(g)).unwrap(), 1.0);
        }
    }

    #[test]
    fn kernel_at_critical_rate() {
        let v = rtn_dephasing(1.0, &rtn(2.0)).unwrap();
        assert!((v - 3.0 * (-2.0f64).exp()).abs() < 1e-15);
        // Regular branches just outside the band agree with the limit.
        for g in [2.0 - 1e-5, 2.0 + 1e-5] {
            let w = rtn_dephasing(1.0, &rtn(g)).unwrap();
            assert!((w - v).abs() < 1e-4, "{g}: {w} vs {v}");
        }
        for g in [2.0 - 1e-6, 2.0 + 1e-6] {
            let (w, _) = rtn_kernel_and_slope(1.0, g);
            assert!((w - v).abs() < 1e-5);
        }
    }

    #[test]
    fn kernel_at_first_underdamped_extremum() {
        let tau = PI / 3f64.sqrt();
        let v = rtn_dephasing(tau, &rtn(1.0)).unwrap();
        assert!((v + (-tau).exp()).abs() < 1e-14);
        assert!((v + 0.1630).abs() < 1e-3);
    }

    #[test]
    fn series_matches_regular_branches_on_band_edge() {
        for &tau in &[0.1, 1.0, 1.9] {
            for &g in &[2.0 - 0.9e-6, 2.0 + 0.9e-6] {
                let disc = (g - 2.0) * (g + 2.0);
                let (c, s) = critical_series(disc * tau * tau, tau);
                let (c_ref, s_ref) = if g < 2.0 {
                    let w = (-disc).sqrt();
                    ((w * tau).cos(), (w * tau).sin() / w)
                } else {
                    let d = disc.sqrt();
                    ((d * tau).cosh(), (d * tau).sinh() / d)
                };
                assert!((c - c_ref).abs() < 1e-9);
                assert!((s - s_ref).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn overdamped_kernel_is_monotone_and_nonnegative() {
        for g in [2.0, 2.0 + 1e-7, 2.5, 5.0, 50.0] {
            let mut prev = 1.0;
            for i in 1..5000 {
                let v = rtn_dephasing(i as f64 * 0.01, &rtn(g)).unwrap();
                assert!(v >= 0.0 && v <= prev, "gamma {g} tau {}", i as f64 * 0.01);
                prev = v;
            }
        }
    }

    #[test]
    fn large_rate_large_time_does_not_overflow() {
        let v = rtn_dephasing(1e3, &rtn(1e4)).unwrap();
        assert!(v.is_finite() && v > 0.0);
        assert!((v - (-2.0e3f64 / 1e4).exp()).abs() < 1e-6);
    }

    #[test]
    fn invalid_inputs() {
        assert!(RtnParams::new(0.0).is_err());
        assert!(RtnParams::new(-1.0).is_err());
        assert!(rtn_dephasing(-0.1, &rtn(1.0)).is_err());
        assert!(rtn_dephasing(1.0, &RtnParams { gamma: -2.0 }).is_err());
        assert!(ColoredParams::with_default_window(0.0, 1).is_err());
        assert!(ColoredParams::with_default_window(1.0, 0).is_err());
        assert!(RateWindow::new(2.0, 1.0).is_err());
        assert!(RateWindow::new(0.0, 1.0).is_err());
    }

    #[test]
    fn pdf_value_and_domain() {
        let p = ColoredParams::with_default_window(1.0, 1).unwrap();
        let v = switching_rate_pdf(1.0, &p).unwrap();
        assert!((v - 1.0 / 1e8f64.ln()).abs() < 1e-15);
        assert!((v - 0.05429).abs() < 1e-5);
        assert!(switching_rate_pdf(1e-5, &p).is_err());
        assert!(switching_rate_pdf(2e4, &p).is_err());
    }

    #[test]
    fn pdf_matches_textbook_form() {
        let w = RateWindow::new(1e-2, 1e2).unwrap();
        for alpha in [0.5, 1.5, 2.0, 2.5] {
            let p = ColoredParams::new(alpha, 1, w).unwrap();
            for g in [0.02f64, 0.5, 3.0, 70.0] {
                let s = alpha - 1.0;
                let direct = s / g.powf(alpha) * (w.min * w.max).powf(s) / (w.max.powf(s) - w.min.powf(s));
                let v = switching_rate_pdf(g, &p).unwrap();
                assert!((v - direct).abs() < 1e-12 * direct, "{alpha} {g}");
            }
        }
    }

    #[test]
    fn pdf_continuous_at_unit_exponent() {
        let p1 = ColoredParams::with_default_window(1.0, 1).unwrap();
        let pe = ColoredParams::with_default_window(1.0 + 1e-8, 1).unwrap();
        for g in [1e-4, 0.3, 1.0, 17.0, 1e4] {
            let a = switching_rate_pdf(g, &p1).unwrap();
            let b = switching_rate_pdf(g, &pe).unwrap();
            assert!((a - b).abs() < 1e-6 * a);
        }
    }

    #[test]
    fn pdf_normalized() {
        for alpha in [0.5, 1.0, 1.5, 2.0, 2.5] {
            let p = ColoredParams::with_default_window(alpha, 1).unwrap();
            let opts = QuadratureOptions {
                rel_tol: 1e-13,
                abs_tol: 1e-15,
                ..Default::default()
            };
            // Integrate in ln γ so the mass near γ_min is resolved.
            let r = quadrature::integrate(
                |u: f64| switching_rate_pdf(u.exp().clamp(p.gamma_min, p.gamma_max), &p).unwrap() * u.exp(),
                p.gamma_min.ln(),
                p.gamma_max.ln(),
                &opts,
            )
            .unwrap();
            assert!((r.value - 1.0).abs() < 1e-10, "alpha {alpha}: {}", r.value);
        }
    }

    #[test]
    fn colored_is_one_at_origin() {
        let p = ColoredParams::with_default_window(1.3, 7).unwrap();
        assert_eq!(colored_dephasing(0.0, &p).unwrap(), 1.0);
    }

    #[test]
    fn colored_power_law_in_fluctuator_count() {
        let base = ColoredParams::with_default_window(1.5, 1).unwrap();
        for tau in [0.3, 1.7, 4.0] {
            let one = colored_dephasing(tau, &base).unwrap();
            for n in [2, 5, 10] {
                let many = colored_dephasing(tau, &base.with_fluctuators(n).unwrap()).unwrap();
                assert!((many - one.powi(n as i32)).abs() <= 1e-8 * many.abs() + 1e-300);
            }
        }
    }

    #[test]
    fn colored_single_fluctuator_is_bounded_by_kernel_range() {
        let w = RateWindow::new(1e-3, 1e3).unwrap();
        let p = ColoredParams::new(1.0, 1, w).unwrap();
        for tau in [0.5, 1.0, 3.0, 7.5] {
            let v = colored_dephasing(tau, &p).unwrap();
            let (lo, hi) = (0..=4000)
                .map(|i| {
                    let u = w.min.ln() + (w.max / w.min).ln() * i as f64 / 4000.0;
                    rtn_dephasing(tau, &rtn(u.exp())).unwrap()
                })
                .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), g| (lo.min(g), hi.max(g)));
            assert!(v >= lo - 1e-12 && v <= hi + 1e-12);
        }
    }

    #[test]
    fn trace_validation() {
        assert!(DephasingTrace::new(vec![0.0, 1.0], vec![1.0, 0.5]).is_ok());
        assert!(DephasingTrace::new(vec![0.0], vec![1.0]).is_err());
        assert!(DephasingTrace::new(vec![0.1, 1.0], vec![1.0, 0.5]).is_err());
        assert!(DephasingTrace::new(vec![0.0, 0.0], vec![1.0, 0.5]).is_err());
        assert!(DephasingTrace::new(vec![0.0, 1.0], vec![0.9, 0.5]).is_err());
        assert!(DephasingTrace::new(vec![0.0, 1.0], vec![1.0, -1.5]).is_err());
        assert!(DephasingTrace::new(vec![0.0, 1.0, 2.0], vec![1.0, 0.5]).is_err());
    }

    #[test]
    fn rtn_trace_first_zero_crossing() {
        let gamma = 0.01;
        let times = uniform_grid(20.0, 1e-3).unwrap();
        let trace = dephasing_trace(&NoiseModel::Rtn(rtn(gamma)), &times, None).unwrap();
        let omega = (4.0f64 - gamma * gamma).sqrt();
        // cos ωτ + (γ/ω) sin ωτ = 0  =>  τ = (π - atan(ω/γ)) / ω
        let root = (PI - (omega / gamma).atan()) / omega;
        let first = trace
            .values()
            .windows(2)
            .position(|w| w[0] > 0.0 && w[1] <= 0.0)
            .unwrap();
        assert!((trace.times()[first] - root).abs() <= 1e-3);
    }

    #[test]
    fn window_override_only_for_colored() {
        let times = uniform_grid(1.0, 0.5).unwrap();
        let w = RateWindow::new(1.0, 2.0).unwrap();
        assert!(dephasing_trace(&NoiseModel::Rtn(rtn(1.0)), &times, Some(w)).is_err());
    }

    #[test]
    fn grid_construction() {
        let g = uniform_grid(1.0, 0.25).unwrap();
        assert_eq!(g, vec![0.0, 0.25, 0.5, 0.75, 1.0]);
        assert_eq!(uniform_grid(0.3, 0.1).unwrap().len(), 4);
        assert!(uniform_grid(0.0, 0.1).is_err());
        assert!(uniform_grid(1.0, 0.0).is_err());
        assert!(uniform_grid(1.0, 2.0).is_err());
    }
}
