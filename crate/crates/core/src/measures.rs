//! Trace-distance and quantum-capacity curves, information flux and the
//! BLP / BCM non-Markovianity measures.

use std::collections::HashMap;
use std::f64::consts::{LN_2, PI};
use std::sync::Mutex;

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::kernels::{self, Dephasing, DephasingTrace, NoiseModel, RtnParams};

/// Shannon binary entropy in bits, with `0 log 0 = 0`.
pub fn binary_entropy(p: f64) -> f64 {
    let term = |x: f64| if x <= 0.0 { 0.0 } else { -x * x.log2() };
    term(p) + term(1.0 - p)
}

/// Quantum capacity `1 - H₂((1 - Γ)/2)` of the dephasing channel.
pub fn quantum_capacity(gamma_value: f64) -> f64 {
    let g = gamma_value.abs().min(1.0);
    if g == 1.0 {
        return 1.0;
    }
    // ½[(1+g) log₂(1+g) + (1-g) log₂(1-g)], free of the cancellation in 1 - H₂.
    ((1.0 + g) * g.ln_1p() + (1.0 - g) * (-g).ln_1p()) / (2.0 * LN_2)
}

/// Optimal trace distance `D(τ) = |Γ(τ)|`.
pub fn trace_distance_curve(trace: &DephasingTrace) -> Vec<f64> {
    trace.values().iter().map(|v| v.abs()).collect()
}

pub fn quantum_capacity_curve(trace: &DephasingTrace) -> Vec<f64> {
    trace.values().iter().map(|&v| quantum_capacity(v)).collect()
}

/// Capacity of two qubits under independent identical dephasing.
pub fn two_qubit_capacity(c_q: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&c_q) {
        return Err(domain(format!("single-qubit capacity must lie in [0, 1], got {c_q}")));
    }
    Ok(2.0 * c_q)
}

/// Time derivative of a sampled curve: second-order central differences in
/// the interior, second-order one-sided differences at the ends.
pub fn flux(times: &[f64], values: &[f64]) -> Result<Vec<f64>> {
    if times.len() < 3 || values.len() != times.len() {
        return Err(domain("flux needs at least three samples with matching times"));
    }
    if times
        .windows(2)
        .any(|w| w[1].partial_cmp(&w[0]) != Some(std::cmp::Ordering::Greater))
    {
        return Err(domain("flux grid must be strictly increasing"));
    }
    let n = times.len();
    let mut out = vec![0.0; n];
    for i in 1..n - 1 {
        let h1 = times[i] - times[i - 1];
        let h2 = times[i + 1] - times[i];
        out[i] = (h1 * h1 * values[i + 1] - h2 * h2 * values[i - 1] + (h2 * h2 - h1 * h1) * values[i])
            / (h1 * h2 * (h1 + h2));
    }
    let one_sided = |f0: f64, f1: f64, f2: f64, h1: f64, h2: f64| {
        -(2.0 * h1 + h2) / (h1 * (h1 + h2)) * f0 + (h1 + h2) / (h1 * h2) * f1 - h1 / (h2 * (h1 + h2)) * f2
    };
    out[0] = one_sided(
        values[0],
        values[1],
        values[2],
        times[1] - times[0],
        times[2] - times[1],
    );
    out[n - 1] = -one_sided(
        values[n - 1],
        values[n - 2],
        values[n - 3],
        times[n - 1] - times[n - 2],
        times[n - 2] - times[n - 3],
    );
    Ok(out)
}

/// `Σ max(0, v[i+1] - v[i])`.
pub fn positive_variation(values: &[f64]) -> f64 {
    values.windows(2).map(|w| (w[1] - w[0]).max(0.0)).sum()
}

/// Positive variation of `f(|Γ|)` for a nondecreasing `f` with `f(0) = 0`.
///
/// A sign change of `Γ` between two samples means `|Γ|` passed through zero;
/// the zero is inserted so the descent and the following rise are both
/// counted in full. Returns the total and the merged intervals of growth.
fn backflow_variation<F: Fn(f64) -> f64>(trace: &DephasingTrace, f: F) -> (f64, Vec<(f64, f64)>) {
    let t = trace.times();
    let g = trace.values();
    let mut total = 0.0;
    let mut intervals: Vec<(f64, f64)> = Vec::new();
    let mut push = |start: f64, end: f64| match intervals.last_mut() {
        Some(last) if last.1 == start => last.1 = end,
        _ => intervals.push((start, end)),
    };

    for i in 0..g.len() - 1 {
        let (a, b) = (g[i], g[i + 1]);
        let (fa, fb) = (f(a.abs()), f(b.abs()));
        if a * b < 0.0 {
            total += fb;
            if fb > 0.0 {
                let zero = t[i] + (t[i + 1] - t[i]) * a.abs() / (a.abs() + b.abs());
                push(zero, t[i + 1]);
            }
        } else if fb > fa {
            total += fb - fa;
            push(t[i], t[i + 1]);
        }
    }
    (total, intervals)
}

/// Non-Markovianity measures of one dephasing evolution.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeasureReport {
    pub n_blp: f64,
    pub n_bcm: f64,
    /// Intervals where the trace distance (and with it the capacity) grows.
    pub positive_intervals: Vec<(f64, f64)>,
    pub horizon: f64,
    pub dt: f64,
    pub converged: bool,
    pub refinement_levels: u32,
    /// Estimates `(n_blp, n_bcm)` one refinement step earlier, if any.
    pub previous: Option<(f64, f64)>,
}

/// Measures on the given samples, without refinement.
pub fn measures_of_trace(trace: &DephasingTrace) -> MeasureReport {
    let (n_blp, positive_intervals) = backflow_variation(trace, |d| d);
    let (n_bcm, _) = backflow_variation(trace, quantum_capacity);
    let dt = trace.times().windows(2).map(|w| w[1] - w[0]).fold(0.0, f64::max);
    MeasureReport {
        n_blp,
        n_bcm,
        positive_intervals,
        horizon: trace.horizon(),
        dt,
        converged: true,
        refinement_levels: 0,
        previous: None,
    }
}

/// How far in time the measures are integrated.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Horizon {
    Fixed(f64),
    /// Start at `initial` and double until the measures change by less than
    /// the relative tolerance.
    Doubling {
        initial: f64,
        max_doublings: u32,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeasureSettings {
    /// Base grid spacing.
    pub dt: f64,
    /// Maximum number of times the spacing is halved.
    pub max_halvings: u32,
    pub rel_tol: f64,
    /// Changes below this are treated as converged regardless of magnitude.
    pub abs_tol: f64,
    pub horizon: Horizon,
}

/// Horizon for telegraph noise: the envelope `exp(-γτ)` has fallen below 1e-10.
pub const RTN_ENVELOPE_FLOOR: f64 = 1e-10;
pub const RTN_MAX_HORIZON: f64 = 1e3;
pub const COLORED_HORIZON: f64 = 50.0;

impl Default for MeasureSettings {
    fn default() -> Self {
        Self {
            dt: 1e-2,
            max_halvings: 8,
            rel_tol: 1e-4,
            abs_tol: 1e-12,
            horizon: Horizon::Doubling {
                initial: COLORED_HORIZON,
                max_doublings: 4,
            },
        }
    }
}

impl MeasureSettings {
    pub fn for_rtn(params: &RtnParams) -> Self {
        let horizon = (-RTN_ENVELOPE_FLOOR.ln() / params.gamma).min(RTN_MAX_HORIZON);
        Self {
            horizon: Horizon::Fixed(horizon),
            ..Default::default()
        }
    }

    pub fn for_model(model: &NoiseModel) -> Self {
        match model {
            NoiseModel::Rtn(p) => Self::for_rtn(p),
            NoiseModel::Colored(_) => Self::default(),
        }
    }

    pub fn with_horizon(self, horizon: Horizon) -> Self {
        Self { horizon, ..self }
    }

    fn validate(&self) -> Result<()> {
        let h = match self.horizon {
            Horizon::Fixed(h) => h,
            Horizon::Doubling { initial, .. } => initial,
        };
        if !(self.dt > 0.0 && h.is_finite() && h >= self.dt) {
            return Err(domain(format!(
                "need 0 < dt <= horizon, got dt = {} and horizon = {h}",
                self.dt
            )));
        }
        if !(self.rel_tol > 0.0 && self.abs_tol >= 0.0) {
            return Err(domain("tolerances must be positive"));
        }
        Ok(())
    }

    fn agree(&self, a: (f64, f64), b: (f64, f64)) -> bool {
        let close = |x: f64, y: f64| {
            let diff = (x - y).abs();
            diff <= self.abs_tol || diff <= self.rel_tol * x.abs().max(y.abs())
        };
        close(a.0, b.0) && close(a.1, b.1)
    }
}

/// Measures on `[0, horizon]`, halving the grid spacing until two successive
/// levels agree. Each level reuses the samples of the previous one.
fn refine_at_horizon<D: Dephasing + ?Sized>(
    source: &D,
    horizon: f64,
    settings: &MeasureSettings,
) -> Result<MeasureReport> {
    let mut dt = settings.dt;
    let mut times = kernels::uniform_grid(horizon, dt)?;
    let mut values = kernels::sample(source, &times)?;
    let mut previous: Option<(f64, f64)> = None;

    for level in 0..=settings.max_halvings {
        if level > 0 {
            dt *= 0.5;
            let mids: Vec<f64> = (0..times.len() - 1).map(|i| (2 * i + 1) as f64 * dt).collect();
            let mid_values = kernels::sample(source, &mids)?;
            let mut t = Vec::with_capacity(times.len() + mids.len());
            let mut v = Vec::with_capacity(t.capacity());
            for i in 0..mids.len() {
                t.push((2 * i) as f64 * dt);
                v.push(values[i]);
                t.push(mids[i]);
                v.push(mid_values[i]);
            }
            t.push((2 * mids.len()) as f64 * dt);
            v.push(*values.last().expect("non-empty"));
            times = t;
            values = v;
        }

        let trace = DephasingTrace::new(times.clone(), values.clone())?;
        let mut report = measures_of_trace(&trace);
        report.dt = dt;
        report.refinement_levels = level;
        report.previous = previous;
        let current = (report.n_blp, report.n_bcm);
        let done = previous.is_some_and(|p| settings.agree(p, current));
        if done || level == settings.max_halvings {
            report.converged = done;
            return Ok(report);
        }
        previous = Some(current);
    }
    unreachable!("loop returns at the last level")
}

/// BLP and BCM measures of `source` with grid refinement and, if requested,
/// horizon extension. Non-convergence is reported through
/// [`MeasureReport::converged`]; see [`blp_measure`] for the strict variant.
pub fn estimate_measures<D: Dephasing + ?Sized>(source: &D, settings: &MeasureSettings) -> Result<MeasureReport> {
    settings.validate()?;
    match settings.horizon {
        Horizon::Fixed(h) => refine_at_horizon(source, h, settings),
        Horizon::Doubling { initial, max_doublings } => {
            let mut report = refine_at_horizon(source, initial, settings)?;
            let mut horizon = initial;
            for _ in 0..max_doublings {
                horizon *= 2.0;
                let longer = refine_at_horizon(source, horizon, settings)?;
                let stable = settings.agree((report.n_blp, report.n_bcm), (longer.n_blp, longer.n_bcm));
                let grid_ok = report.converged && longer.converged;
                let prev = (report.n_blp, report.n_bcm);
                report = longer;
                if stable {
                    report.converged = grid_ok;
                    return Ok(report);
                }
                report.previous = Some(prev);
            }
            report.converged = false;
            Ok(report)
        }
    }
}

fn require_convergence(report: MeasureReport) -> Result<MeasureReport> {
    if report.converged {
        return Ok(report);
    }
    Err(Error::NotConverged {
        levels: report.refinement_levels,
        last: (report.n_blp, report.n_bcm),
        previous: report.previous.unwrap_or((f64::NAN, f64::NAN)),
    })
}

/// BLP measure, failing with [`Error::NotConverged`] when refinement runs out.
pub fn blp_measure<D: Dephasing + ?Sized>(source: &D, settings: &MeasureSettings) -> Result<MeasureReport> {
    require_convergence(estimate_measures(source, settings)?)
}

/// BCM measure, failing with [`Error::NotConverged`] when refinement runs out.
///
/// Both measures come from the same samples, so this returns the same report
/// as [`blp_measure`]; the two exist to mirror the two quantities.
pub fn bcm_measure<D: Dephasing + ?Sized>(source: &D, settings: &MeasureSettings) -> Result<MeasureReport> {
    require_convergence(estimate_measures(source, settings)?)
}

/// Closed-form BLP measure of telegraph noise,
/// `[exp(πγ / sqrt(4 - γ²)) - 1]⁻¹` below `γ = 2` and zero above.
pub fn rtn_blp_closed(params: &RtnParams) -> f64 {
    match params.oscillation_frequency() {
        Some(omega) => 1.0 / (PI * params.gamma / omega).exp_m1(),
        None => 0.0,
    }
}

/// BCM measure of telegraph noise as the sum of capacities at the maxima
/// `τ_k = kπ / sqrt(4 - γ²)`, where `|G| = exp(-kπγ / sqrt(4 - γ²))`.
/// Summation stops at the first term below 1e-12.
pub fn rtn_bcm_series(params: &RtnParams) -> f64 {
    let Some(omega) = params.oscillation_frequency() else {
        return 0.0;
    };
    let decay = PI * params.gamma / omega;
    let mut sum = 0.0;
    for k in 1u64.. {
        let term = quantum_capacity((-(k as f64) * decay).exp());
        if term < 1e-12 {
            break;
        }
        sum += term;
    }
    sum
}

/// The first `count` zeros of the telegraph kernel, where the trace distance
/// and the capacity vanish. Each lies between consecutive maxima
/// `(k-1)π/ω` and `kπ/ω` and is found by bisection. Empty for `γ >= 2`.
pub fn rtn_minima(params: &RtnParams, count: usize) -> Vec<f64> {
    let Some(omega) = params.oscillation_frequency() else {
        return Vec::new();
    };
    let g = |t: f64| kernels::rtn_kernel_and_slope(t, params.gamma).0;
    (1..=count)
        .map(|k| {
            let (mut lo, mut hi) = ((k - 1) as f64 * PI / omega, k as f64 * PI / omega);
            let sign_lo = g(lo).signum();
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                if mid <= lo || mid >= hi {
                    break;
                }
                if g(mid).signum() == sign_lo {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            0.5 * (lo + hi)
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FluxKind {
    Blp,
    Bcm,
}

/// Analytic flux of telegraph noise: `dD/dτ` (BLP) or `dC_Q/dτ` (BCM).
///
/// With `dG/dτ = -4 e^{-γτ} sinh(δτ)/δ`, the BLP flux is `sgn(G) dG/dτ` and the
/// BCM flux is `arctanh(G) / ln 2 · dG/dτ`.
pub fn rtn_flux_analytic(tau: f64, params: &RtnParams, kind: FluxKind) -> Result<f64> {
    let g = kernels::rtn_dephasing(tau, params)?;
    let (_, slope) = kernels::rtn_kernel_and_slope(tau, params.gamma);
    match kind {
        FluxKind::Blp => Ok(if g == 0.0 { 0.0 } else { g.signum() * slope }),
        FluxKind::Bcm => {
            if tau == 0.0 || g.abs() >= 1.0 {
                return Err(domain(format!("capacity flux is singular where |G| = 1 (tau = {tau})")));
            }
            Ok(g.atanh() / LN_2 * slope)
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    Markovian,
    NonMarkovian,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegimeInterval {
    pub start: f64,
    pub end: f64,
    pub regime: Regime,
}

/// Split the trace into Markovian and non-Markovian stretches. Dynamics is
/// non-Markovian where `Γ` and `dΓ/dτ` share a sign, i.e. where `|Γ|` grows.
pub fn non_markovianity_regime(trace: &DephasingTrace) -> Vec<RegimeInterval> {
    let t = trace.times();
    let g = trace.values();
    let mut out: Vec<RegimeInterval> = Vec::new();
    let mut push = |start: f64, end: f64, regime: Regime| match out.last_mut() {
        Some(last) if last.regime == regime && last.end == start => last.end = end,
        _ => out.push(RegimeInterval { start, end, regime }),
    };
    for i in 0..g.len() - 1 {
        let (a, b) = (g[i], g[i + 1]);
        if a * b < 0.0 {
            let zero = t[i] + (t[i + 1] - t[i]) * a.abs() / (a.abs() + b.abs());
            push(t[i], zero, Regime::Markovian);
            push(zero, t[i + 1], Regime::NonMarkovian);
        } else {
            let slope = b - a;
            let sign = if a != 0.0 { a } else { b };
            let regime = if slope * sign > 0.0 {
                Regime::NonMarkovian
            } else {
                Regime::Markovian
            };
            push(t[i], t[i + 1], regime);
        }
    }
    out
}

/// Memoizes a source by the bit pattern of `τ`, so repeated sweeps over the
/// same grids evaluate each point once.
pub struct Cached<D> {
    inner: D,
    memo: Mutex<HashMap<u64, f64>>,
}

impl<D: Dephasing> Cached<D> {
    pub fn new(inner: D) -> Self {
        Self {
            inner,
            memo: Mutex::new(HashMap::new()),
        }
    }
}

impl<D: Dephasing> Dephasing for Cached<D> {
    fn dephasing(&self, tau: f64) -> Result<f64> {
        if let Some(&v) = self.memo.lock().expect("poisoned").get(&tau.to_bits()) {
            return Ok(v);
        }
        let v = self.inner.dephasing(tau)?;
        self.memo.lock().expect("poisoned").insert(tau.to_bits(), v);
        Ok(v)
    }
}

/// `Γ(τ)^n`: `n` independent copies of the same source.
pub struct Powered<'a, D: ?Sized> {
    pub base: &'a D,
    pub n: u32,
}

impl<D: Dephasing + ?Sized> Dephasing for Powered<'_, D> {
    fn dephasing(&self, tau: f64) -> Result<f64> {
        Ok(self.base.dephasing(tau)?.powi(self.n as i32))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernels::{uniform_grid, ColoredParams};

    fn trace(values: Vec<f64>) -> DephasingTrace {
        let times = (0..values.len()).map(|i| i as f64 * 0.1).collect();
        DephasingTrace::new(times, values).unwrap()
    }

    fn rtn_trace(gamma: f64, horizon: f64, dt: f64) -> DephasingTrace {
        let p = RtnParams::new(gamma).unwrap();
        kernels::dephasing_trace(&NoiseModel::Rtn(p), &uniform_grid(horizon, dt).unwrap(), None).unwrap()
    }

    #[test]
    fn entropy_and_capacity_endpoints() {
        assert_eq!(binary_entropy(0.0), 0.0);
        assert_eq!(binary_entropy(1.0), 0.0);
        assert!((binary_entropy(0.5) - 1.0).abs() < 1e-15);
        assert_eq!(quantum_capacity(1.0), 1.0);
        assert_eq!(quantum_capacity(-1.0), 1.0);
        assert_eq!(quantum_capacity(0.0), 0.0);
    }

    #[test]
    fn capacity_matches_entropy_form() {
        for g in [-0.9, -0.3, 0.01, 0.5, 0.99] {
            let direct = 1.0 - binary_entropy((1.0 - g) / 2.0);
            assert!((quantum_capacity(g) - direct).abs() < 1e-14);
        }
    }

    #[test]
    fn curves_are_pointwise() {
        let tr = trace(vec![1.0, 0.2, -0.3]);
        assert_eq!(trace_distance_curve(&tr), vec![1.0, 0.2, 0.3]);
        let c = quantum_capacity_curve(&tr);
        assert_eq!(c[0], 1.0);
        assert!((c[2] - quantum_capacity(0.3)).abs() < 1e-16);
    }

    #[test]
    fn flux_of_constant_and_linear() {
        let t = [0.0, 0.1, 0.3, 0.35, 1.0];
        assert!(flux(&t, &[2.0; 5]).unwrap().iter().all(|v| v.abs() < 1e-12));
        let lin: Vec<f64> = t.iter().map(|x| 3.0 * x - 1.0).collect();
        assert!(flux(&t, &lin).unwrap().iter().all(|v| (v - 3.0).abs() < 1e-10));
        let quad: Vec<f64> = t.iter().map(|x| x * x).collect();
        let f = flux(&t, &quad).unwrap();
        for (x, d) in t.iter().zip(f) {
            assert!((d - 2.0 * x).abs() < 1e-10);
        }
        assert!(flux(&[0.0, 1.0], &[1.0, 1.0]).is_err());
    }

    #[test]
    fn flux_nonpositive_for_overdamped_rtn() {
        let tr = rtn_trace(2.5, 20.0, 0.01);
        let d = trace_distance_curve(&tr);
        assert!(flux(tr.times(), &d).unwrap().iter().all(|&v| v <= 1e-12));
    }

    #[test]
    fn numeric_flux_tracks_analytic_flux() {
        let p = RtnParams::new(1.0).unwrap();
        let tr = rtn_trace(1.0, 10.0, 1e-3);
        let d = trace_distance_curve(&tr);
        let f = flux(tr.times(), &d).unwrap();
        let g = tr.values();
        for i in 1..tr.len() - 1 {
            // The kink of |G| at its zeros is not differentiable.
            if g[i - 1] * g[i + 1] <= 0.0 {
                continue;
            }
            let exact = rtn_flux_analytic(tr.times()[i], &p, FluxKind::Blp).unwrap();
            assert!((f[i] - exact).abs() < 1e-4, "tau {}", tr.times()[i]);
        }
    }

    #[test]
    fn analytic_flux_signs() {
        let p3 = RtnParams::new(3.0).unwrap();
        for tau in [0.01, 0.5, 3.0, 40.0] {
            assert!(rtn_flux_analytic(tau, &p3, FluxKind::Blp).unwrap() < 0.0);
            assert!(rtn_flux_analytic(tau, &p3, FluxKind::Bcm).unwrap() < 0.0);
        }
        let p1 = RtnParams::new(1.0).unwrap();
        let tau1 = PI / 3f64.sqrt();
        assert!(rtn_flux_analytic(tau1, &p1, FluxKind::Blp).unwrap().abs() < 1e-14);
        assert!(rtn_flux_analytic(0.0, &p1, FluxKind::Bcm).is_err());
    }

    #[test]
    fn analytic_capacity_flux_matches_finite_differences() {
        let p = RtnParams::new(1.0).unwrap();
        let h = 1e-6;
        for tau in [0.05, 0.2, 0.7, 1.3, 2.0, 2.6, 4.0] {
            let c = |t: f64| quantum_capacity(kernels::rtn_dephasing(t, &p).unwrap());
            let fd = (c(tau + h) - c(tau - h)) / (2.0 * h);
            let exact = rtn_flux_analytic(tau, &p, FluxKind::Bcm).unwrap();
            assert!(
                (fd - exact).abs() < 1e-6 * exact.abs().max(1.0),
                "tau {tau}: {fd} vs {exact}"
            );
        }
    }

    #[test]
    fn measures_vanish_for_monotone_decay() {
        let tr = trace(vec![1.0, 0.8, 0.5, 0.5, 0.1, 0.0]);
        let r = measures_of_trace(&tr);
        assert_eq!(r.n_blp, 0.0);
        assert_eq!(r.n_bcm, 0.0);
        assert!(r.positive_intervals.is_empty());
        assert!(non_markovianity_regime(&tr)
            .iter()
            .all(|i| i.regime == Regime::Markovian));
    }

    #[test]
    fn sign_change_counts_full_revival() {
        let tr = trace(vec![1.0, 0.4, -0.2, -0.5, -0.1]);
        let r = measures_of_trace(&tr);
        assert!((r.n_blp - 0.5).abs() < 1e-15);
        assert!((r.n_bcm - quantum_capacity(0.5)).abs() < 1e-15);
        assert_eq!(r.positive_intervals.len(), 1);
        let (s, e) = r.positive_intervals[0];
        assert!((s - (0.1 + 0.1 * 0.4 / 0.6)).abs() < 1e-12);
        assert!((e - 0.3).abs() < 1e-12);
    }

    #[test]
    fn negative_and_decreasing_is_non_markovian() {
        let tr = trace(vec![1.0, 0.5, -0.5, -0.7, -0.6]);
        let regimes = non_markovianity_regime(&tr);
        let at = |t: f64| regimes.iter().find(|r| r.start <= t && t <= r.end).unwrap().regime;
        assert_eq!(at(0.25), Regime::NonMarkovian);
        assert_eq!(at(0.05), Regime::Markovian);
        assert_eq!(at(0.35), Regime::Markovian);
    }

    #[test]
    fn regimes_follow_growth_of_abs_gamma_for_rtn() {
        let tr = rtn_trace(1.0, 12.0, 0.01);
        let d = trace_distance_curve(&tr);
        let regimes = non_markovianity_regime(&tr);
        for i in 0..tr.len() - 1 {
            let g = tr.values();
            if g[i] * g[i + 1] < 0.0 {
                continue;
            }
            let mid = 0.5 * (tr.times()[i] + tr.times()[i + 1]);
            let tag = regimes.iter().find(|r| r.start <= mid && mid <= r.end).unwrap().regime;
            assert_eq!(tag == Regime::NonMarkovian, d[i + 1] > d[i]);
        }
    }

    #[test]
    fn minima_are_kernel_zeros() {
        for gamma in [0.05, 0.7, 1.0, 1.9] {
            let p = RtnParams::new(gamma).unwrap();
            let omega = p.oscillation_frequency().unwrap();
            for (k, tau) in rtn_minima(&p, 5).into_iter().enumerate() {
                // tan(ωτ) = -ω/γ on the k-th branch.
                let expected = (PI - (omega / gamma).atan() + k as f64 * PI) / omega;
                assert!(
                    (tau - expected).abs() < 1e-12 * expected.max(1.0),
                    "γ = {gamma}, k = {k}"
                );
                assert!(kernels::rtn_dephasing(tau, &p).unwrap().abs() < 1e-12);
            }
        }
        assert!(rtn_minima(&RtnParams::new(2.0).unwrap(), 3).is_empty());
    }

    #[test]
    fn closed_forms() {
        let p = |g| RtnParams::new(g).unwrap();
        let one = rtn_blp_closed(&p(1.0));
        assert!((one - 1.0 / ((PI / 3f64.sqrt()).exp() - 1.0)).abs() < 1e-15);
        assert!((one - 0.194792).abs() < 1e-6);
        // Geometric series of the maxima.
        let q = (-PI / 3f64.sqrt()).exp();
        let geometric: f64 = (1..200).map(|k| q.powi(k)).sum();
        assert!((one - geometric).abs() < 1e-14);
        assert!((rtn_blp_closed(&p(0.1)) - 5.871).abs() < 1e-3);
        assert_eq!(rtn_blp_closed(&p(2.0)), 0.0);
        assert_eq!(rtn_bcm_series(&p(2.0)), 0.0);
        assert_eq!(rtn_bcm_series(&p(7.0)), 0.0);
        assert!(rtn_bcm_series(&p(0.01)) > rtn_bcm_series(&p(0.1)));
    }

    #[test]
    fn bcm_series_matches_brute_sum() {
        let omega = 3f64.sqrt();
        let brute: f64 = (1..400)
            .map(|k| 1.0 - binary_entropy((1.0 - (-(k as f64) * PI / omega).exp()) / 2.0))
            .sum();
        let series = rtn_bcm_series(&RtnParams::new(1.0).unwrap());
        assert!((series - brute).abs() < 1e-11);
    }

    #[test]
    fn refined_rtn_measures_match_closed_forms() {
        let p = RtnParams::new(1.0).unwrap();
        let r = blp_measure(&p, &MeasureSettings::for_rtn(&p)).unwrap();
        assert!(r.converged);
        let closed = rtn_blp_closed(&p);
        assert!((r.n_blp - closed).abs() < 1e-3 * closed);
        let r = bcm_measure(&p, &MeasureSettings::for_rtn(&p)).unwrap();
        let series = rtn_bcm_series(&p);
        assert!((r.n_bcm - series).abs() < 1e-3 * series);
    }

    #[test]
    fn overdamped_measures_are_zero() {
        let p = RtnParams::new(3.0).unwrap();
        let r = estimate_measures(&p, &MeasureSettings::for_rtn(&p)).unwrap();
        assert!(r.converged);
        assert!(r.n_blp <= 1e-9 && r.n_bcm <= 1e-9);
    }

    #[test]
    fn refinement_cap_reports_non_convergence() {
        let p = RtnParams::new(0.5).unwrap();
        let settings = MeasureSettings {
            dt: 0.5,
            max_halvings: 1,
            rel_tol: 1e-12,
            abs_tol: 0.0,
            horizon: Horizon::Fixed(30.0),
        };
        let r = estimate_measures(&p, &settings).unwrap();
        assert!(!r.converged);
        assert!(r.previous.is_some());
        match blp_measure(&p, &settings) {
            Err(Error::NotConverged { last, previous, .. }) => {
                assert_eq!(last.0, r.n_blp);
                assert!(previous.0.is_finite());
            }
            other => panic!("expected non-convergence, got {other:?}"),
        }
    }

    #[test]
    fn cached_and_powered_sources() {
        let base = Cached::new(ColoredParams::with_default_window(1.0, 1).unwrap());
        let three = Powered { base: &base, n: 3 };
        let direct = ColoredParams::with_default_window(1.0, 3).unwrap();
        for tau in [0.2, 1.0] {
            let a = three.dephasing(tau).unwrap();
            let b = direct.dephasing(tau).unwrap();
            assert!((a - b).abs() < 1e-15);
        }
        assert_eq!(base.memo.lock().unwrap().len(), 2);
    }

    #[test]
    fn two_qubit_capacity_doubles() {
        assert_eq!(two_qubit_capacity(0.0).unwrap(), 0.0);
        assert_eq!(two_qubit_capacity(1.0).unwrap(), 2.0);
        assert!((two_qubit_capacity(0.37).unwrap() - 0.74).abs() < 1e-15);
        assert!(two_qubit_capacity(1.2).is_err());
    }
}
