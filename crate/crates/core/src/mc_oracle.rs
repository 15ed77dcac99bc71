//! Monte Carlo estimate of `<exp(2iφ(τ))>` from sampled telegraph trajectories.
//!
//! Shares no code with the analytic kernels: phases are integrated exactly
//! from sampled flip times and averaged over trajectories. Trajectory `k` draws
//! from ChaCha8 stream `k` under the root seed, and partial sums are merged in
//! trajectory order, so results do not depend on thread scheduling.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};
use crate::kernels::{ColoredParams, RtnParams};

const CHUNK: usize = 2048;
pub const MIN_TRAJECTORIES: usize = 1000;

/// A piecewise-constant telegraph signal `c(τ) ∈ {-1, +1}` on `[0, horizon]`.
#[derive(Debug, Clone, PartialEq)]
pub struct TelegraphPath {
    pub initial: f64,
    pub flips: Vec<f64>,
    pub horizon: f64,
}

impl TelegraphPath {
    pub fn value_at(&self, tau: f64) -> f64 {
        let n = self.flips.partition_point(|&f| f <= tau);
        if n % 2 == 0 {
            self.initial
        } else {
            -self.initial
        }
    }

    /// `φ(τ) = ∫₀^τ c(s) ds`.
    pub fn phase_at(&self, tau: f64) -> f64 {
        let mut sign = self.initial;
        let mut last = 0.0;
        let mut phase = 0.0;
        for &f in self.flips.iter().take_while(|&&f| f < tau) {
            phase += sign * (f - last);
            last = f;
            sign = -sign;
        }
        phase + sign * (tau - last)
    }
}

fn trajectory_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

fn initial_sign<R: Rng>(rng: &mut R) -> f64 {
    if rng.random::<bool>() {
        1.0
    } else {
        -1.0
    }
}

fn sample_path<R: Rng>(gamma: f64, horizon: f64, rng: &mut R) -> TelegraphPath {
    let initial = initial_sign(rng);
    let wait = Exp::new(gamma).expect("positive rate");
    let mut flips = Vec::new();
    let mut t = wait.sample(rng);
    while t < horizon {
        flips.push(t);
        t += wait.sample(rng);
    }
    TelegraphPath {
        initial,
        flips,
        horizon,
    }
}

/// Telegraph path with flip rate `gamma` and a uniformly random initial sign.
/// Waiting times are exponential, so `<c(τ)c(τ')> = exp(-2γ|τ - τ'|)`.
pub fn sample_rtn_path(params: &RtnParams, horizon: f64, seed: u64) -> Result<TelegraphPath> {
    RtnParams::new(params.gamma)?;
    if !(horizon.is_finite() && horizon > 0.0) {
        return Err(domain(format!("horizon must be positive, got {horizon}")));
    }
    Ok(sample_path(params.gamma, horizon, &mut trajectory_rng(seed, 0)))
}

/// Add `φ(τ_j)` of a fresh path to `phases[j]` without storing the flips.
/// `grid` must be nondecreasing.
fn accumulate_phases<R: Rng>(gamma: f64, grid: &[f64], rng: &mut R, phases: &mut [f64]) {
    let mut sign = initial_sign(rng);
    let wait = Exp::new(gamma).expect("positive rate");
    let mut t = 0.0;
    let mut phase = 0.0;
    let mut next = wait.sample(rng);
    for (tau, out) in grid.iter().zip(phases.iter_mut()) {
        while next < *tau {
            phase += sign * (next - t);
            t = next;
            sign = -sign;
            next += wait.sample(rng);
        }
        phase += sign * (tau - t);
        t = *tau;
        *out += phase;
    }
}

/// Inverse-CDF sample of a switching rate from `p_α` on the rate window.
pub fn sample_rate(params: &ColoredParams, u: f64) -> Result<f64> {
    ColoredParams::new(params.alpha, params.n_fluctuators, params.window())?;
    if !(0.0..=1.0).contains(&u) {
        return Err(domain(format!("uniform variate {u} outside [0, 1]")));
    }
    Ok(rate_from_uniform(params, u))
}

fn rate_from_uniform(params: &ColoredParams, u: f64) -> f64 {
    let (lo, hi) = (params.gamma_min, params.gamma_max);
    let width = (hi / lo).ln();
    let s = params.alpha - 1.0;
    let rate = if s == 0.0 {
        lo * (u * width).exp()
    } else if s > 0.0 {
        // γ^(-s) = γ₂^(-s) + (1 - u)(γ₁^(-s) - γ₂^(-s)), anchored at the upper end.
        hi * (-((1.0 - u) * (s * width).exp_m1()).ln_1p() / s).exp()
    } else {
        lo * (-(u * (-s * width).exp_m1()).ln_1p() / s).exp()
    };
    rate.clamp(lo, hi)
}

/// Ensemble mean of `exp(2iφ(τ))` with per-point standard errors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleStats {
    pub n_traj: usize,
    pub seed: u64,
    pub tau_grid: Vec<f64>,
    pub mean_re: Vec<f64>,
    pub mean_im: Vec<f64>,
    /// Standard error of `mean_re`.
    pub stderr: Vec<f64>,
    pub stderr_im: Vec<f64>,
}

/// Running mean and sum of squared deviations, merged pairwise.
#[derive(Debug, Clone)]
struct Moments {
    n: f64,
    mean: Vec<f64>,
    m2: Vec<f64>,
}

impl Moments {
    fn new(len: usize) -> Self {
        Self {
            n: 0.0,
            mean: vec![0.0; len],
            m2: vec![0.0; len],
        }
    }

    fn push(&mut self, x: &[f64]) {
        self.n += 1.0;
        for ((m, s), &v) in self.mean.iter_mut().zip(self.m2.iter_mut()).zip(x) {
            let d = v - *m;
            *m += d / self.n;
            *s += d * (v - *m);
        }
    }

    fn merge(mut self, other: &Self) -> Self {
        if other.n == 0.0 {
            return self;
        }
        let n = self.n + other.n;
        for i in 0..self.mean.len() {
            let d = other.mean[i] - self.mean[i];
            self.mean[i] += d * other.n / n;
            self.m2[i] += other.m2[i] + d * d * self.n * other.n / n;
        }
        self.n = n;
        self
    }

    fn stderr(&self) -> Vec<f64> {
        self.m2
            .iter()
            .map(|s| (s.max(0.0) / (self.n - 1.0) / self.n).sqrt())
            .collect()
    }
}

fn check_run(grid: &[f64], n_traj: usize) -> Result<()> {
    if n_traj < MIN_TRAJECTORIES {
        return Err(domain(format!(
            "need at least {MIN_TRAJECTORIES} trajectories, got {n_traj}"
        )));
    }
    if grid.is_empty() || grid.iter().any(|t| !(t.is_finite() && *t >= 0.0)) {
        return Err(domain("time grid must be non-empty, finite and nonnegative"));
    }
    if grid.windows(2).any(|w| w[1] < w[0]) {
        return Err(domain("time grid must be sorted"));
    }
    Ok(())
}

/// Run `n_traj` trajectories; `phases` fills a zeroed buffer with `φ(τ_j)`.
fn run_ensemble<F>(grid: &[f64], n_traj: usize, seed: u64, phases: F) -> EnsembleStats
where
    F: Fn(&mut ChaCha8Rng, &mut [f64]) + Sync,
{
    let chunks = n_traj.div_ceil(CHUNK);
    let partials: Vec<(Moments, Moments)> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut re = Moments::new(grid.len());
            let mut im = Moments::new(grid.len());
            let mut phi = vec![0.0; grid.len()];
            let mut cos = vec![0.0; grid.len()];
            let mut sin = vec![0.0; grid.len()];
            for k in (c * CHUNK)..((c + 1) * CHUNK).min(n_traj) {
                let mut rng = trajectory_rng(seed, k as u64);
                phi.iter_mut().for_each(|p| *p = 0.0);
                phases(&mut rng, &mut phi);
                for j in 0..grid.len() {
                    let (s, c) = (2.0 * phi[j]).sin_cos();
                    cos[j] = c;
                    sin[j] = s;
                }
                re.push(&cos);
                im.push(&sin);
            }
            (re, im)
        })
        .collect();

    let (re, im) = partials.iter().fold(
        (Moments::new(grid.len()), Moments::new(grid.len())),
        |(re, im), (r, i)| (re.merge(r), im.merge(i)),
    );
    EnsembleStats {
        n_traj,
        seed,
        tau_grid: grid.to_vec(),
        stderr: re.stderr(),
        stderr_im: im.stderr(),
        mean_re: re.mean,
        mean_im: im.mean,
    }
}

/// Monte Carlo estimate of the telegraph kernel `G(τ, γ)` on `grid`.
pub fn mc_rtn_dephasing(params: &RtnParams, grid: &[f64], n_traj: usize, seed: u64) -> Result<EnsembleStats> {
    RtnParams::new(params.gamma)?;
    check_run(grid, n_traj)?;
    let gamma = params.gamma;
    Ok(run_ensemble(grid, n_traj, seed, |rng, phi| {
        accumulate_phases(gamma, grid, rng, phi)
    }))
}

/// Monte Carlo estimate of `Λ(τ, α, N_f)`: every trajectory draws fresh rates
/// for its `N_f` fluctuators and sums their phases.
pub fn mc_colored_dephasing(params: &ColoredParams, grid: &[f64], n_traj: usize, seed: u64) -> Result<EnsembleStats> {
    let params = ColoredParams::new(params.alpha, params.n_fluctuators, params.window())?;
    check_run(grid, n_traj)?;
    Ok(run_ensemble(grid, n_traj, seed, |rng, phi| {
        for _ in 0..params.n_fluctuators {
            let u: f64 = rng.random();
            let gamma = rate_from_uniform(&params, u);
            accumulate_phases(gamma, grid, rng, phi);
        }
    }))
}
