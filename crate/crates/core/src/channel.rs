//! One- and two-qubit dephasing channels, trace distance and the search for
//! the pair of initial states with maximal information backflow.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{domain, Result};

const HERMITIAN_TOL: f64 = 1e-12;
const TRACE_TOL: f64 = 1e-12;
const POSITIVITY_TOL: f64 = -1e-10;

#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    matrix: DMatrix<Complex64>,
}

impl DensityMatrix {
    /// Validates dimension (2 or 4), Hermiticity, unit trace and positivity.
    pub fn new(matrix: DMatrix<Complex64>) -> Result<Self> {
        let n = matrix.nrows();
        if matrix.ncols() != n || !(n == 2 || n == 4) {
            return Err(domain(format!(
                "density matrix must be 2x2 or 4x4, got {}x{}",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        for i in 0..n {
            for j in 0..n {
                if (matrix[(i, j)] - matrix[(j, i)].conj()).norm() > HERMITIAN_TOL {
                    return Err(domain(format!("matrix is not Hermitian at ({i}, {j})")));
                }
            }
        }
        let trace = matrix.trace();
        if (trace - Complex64::new(1.0, 0.0)).norm() > TRACE_TOL {
            return Err(domain(format!("trace is {trace}, expected 1")));
        }
        let rho = Self { matrix };
        if let Some(&low) = rho.eigenvalues().iter().find(|&&e| e < POSITIVITY_TOL) {
            return Err(domain(format!("negative eigenvalue {low:e}")));
        }
        Ok(rho)
    }

    /// `|ψ><ψ|` for a normalized state vector of length 2 or 4.
    pub fn pure(amplitudes: &[Complex64]) -> Result<Self> {
        let norm: f64 = amplitudes.iter().map(|a| a.norm_sqr()).sum();
        if (norm - 1.0).abs() > TRACE_TOL {
            return Err(domain(format!("state vector has squared norm {norm}")));
        }
        Self::new(outer(amplitudes))
    }

    /// Pure qubit state `cos(θ/2)|0> + e^{iφ} sin(θ/2)|1>`.
    pub fn bloch(theta: f64, phi: f64) -> Self {
        Self {
            matrix: outer(&bloch_vector(theta, phi)),
        }
    }

    pub fn maximally_mixed(dim: usize) -> Result<Self> {
        if !(dim == 2 || dim == 4) {
            return Err(domain(format!("unsupported dimension {dim}")));
        }
        let m = DMatrix::identity(dim, dim) / Complex64::new(dim as f64, 0.0);
        Ok(Self { matrix: m })
    }

    /// `a ⊗ b` for two single-qubit states.
    pub fn product(a: &Self, b: &Self) -> Result<Self> {
        if a.dim() != 2 || b.dim() != 2 {
            return Err(domain("product states are built from two qubits"));
        }
        Ok(Self {
            matrix: a.matrix.kronecker(&b.matrix),
        })
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.matrix
    }

    pub fn entry(&self, row: usize, col: usize) -> Complex64 {
        self.matrix[(row, col)]
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        hermitian_eigenvalues(&self.matrix)
    }
}

fn bloch_vector(theta: f64, phi: f64) -> [Complex64; 2] {
    let (s, c) = (0.5 * theta).sin_cos();
    [Complex64::new(c, 0.0), Complex64::from_polar(s, phi)]
}

fn outer(v: &[Complex64]) -> DMatrix<Complex64> {
    let n = v.len();
    DMatrix::from_fn(n, n, |i, j| v[i] * v[j].conj())
}

fn hermitian_eigenvalues(m: &DMatrix<Complex64>) -> Vec<f64> {
    let sym = (m + m.adjoint()) * Complex64::new(0.5, 0.0);
    SymmetricEigen::new(sym).eigenvalues.iter().copied().collect()
}

/// Computational-basis Bell states `Φ+`, `Φ-`, `Ψ+`, `Ψ-`.
pub fn bell_states() -> [DensityMatrix; 4] {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let z = Complex64::new(0.0, 0.0);
    let p = Complex64::new(h, 0.0);
    let vectors = [[p, z, z, p], [p, z, z, -p], [z, p, p, z], [z, p, -p, z]];
    vectors.map(|v| DensityMatrix { matrix: outer(&v) })
}

/// Two states of the same dimension.
#[derive(Debug, Clone, PartialEq)]
pub struct StatePair {
    pub first: DensityMatrix,
    pub second: DensityMatrix,
}

impl StatePair {
    pub fn new(first: DensityMatrix, second: DensityMatrix) -> Result<Self> {
        if first.dim() != second.dim() {
            return Err(domain(format!(
                "pair members differ in dimension: {} vs {}",
                first.dim(),
                second.dim()
            )));
        }
        Ok(Self { first, second })
    }
}

fn check_gamma(gamma_value: f64) -> Result<()> {
    if !(-1.0..=1.0).contains(&gamma_value) {
        return Err(domain(format!(
            "dephasing factor must lie in [-1, 1], got {gamma_value}"
        )));
    }
    Ok(())
}

/// Single-qubit dephasing: coherences are multiplied by `gamma_value`.
pub fn apply_dephasing(rho: &DensityMatrix, gamma_value: f64) -> Result<DensityMatrix> {
    check_gamma(gamma_value)?;
    if rho.dim() != 2 {
        return Err(domain(format!("expected a qubit state, got dimension {}", rho.dim())));
    }
    Ok(scale_coherences(rho, gamma_value))
}

/// Independent identical dephasing of two qubits. Element `<ab|ρ|cd>` is
/// multiplied by `Γ^([a≠c] + [b≠d])`.
pub fn apply_dephasing_two_qubit(rho: &DensityMatrix, gamma_value: f64) -> Result<DensityMatrix> {
    check_gamma(gamma_value)?;
    if rho.dim() != 4 {
        return Err(domain(format!(
            "expected a two-qubit state, got dimension {}",
            rho.dim()
        )));
    }
    Ok(scale_coherences(rho, gamma_value))
}

fn scale_coherences(rho: &DensityMatrix, gamma_value: f64) -> DensityMatrix {
    let n = rho.dim();
    let matrix = DMatrix::from_fn(n, n, |i, j| {
        // Qubit-wise mismatches between row and column labels.
        let flips = (i ^ j).count_ones() as i32;
        rho.matrix[(i, j)] * gamma_value.powi(flips)
    });
    DensityMatrix { matrix }
}

/// `½ Tr|ρ₁ - ρ₂|`.
pub fn trace_distance(pair: &StatePair) -> Result<f64> {
    if pair.first.dim() != pair.second.dim() {
        return Err(domain("trace distance between states of different dimension"));
    }
    Ok(distance_unchecked(&pair.first, &pair.second))
}

fn distance_unchecked(a: &DensityMatrix, b: &DensityMatrix) -> f64 {
    let diff = &a.matrix - &b.matrix;
    let d: f64 = hermitian_eigenvalues(&diff).iter().map(|e| e.abs()).sum();
    (0.5 * d).min(1.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Register {
    SingleQubit,
    TwoQubit,
}

/// Outcome of [`optimal_pair_search`].
#[derive(Debug, Clone)]
pub struct PairSearch {
    pub pair: StatePair,
    /// Trace distance of the evolved pair.
    pub distance: f64,
    /// Part of `distance` carried by coherences: `D(Φ_Γ ρ₁, Φ_Γ ρ₂) - D(Φ_0 ρ₁, Φ_0 ρ₂)`.
    pub backflow: f64,
    pub candidates: usize,
}

fn apply(register: Register, rho: &DensityMatrix, gamma_value: f64) -> DensityMatrix {
    debug_assert_eq!(rho.dim(), if register == Register::SingleQubit { 2 } else { 4 });
    scale_coherences(rho, gamma_value)
}

/// Distinguishability that coherences add after dephasing by `Γ`, relative to
/// full dephasing. A pair maximizing it realizes the largest revival of the
/// trace distance when `|Γ|` recovers from zero.
pub fn coherent_backflow(pair: &StatePair, gamma_value: f64) -> Result<f64> {
    check_gamma(gamma_value)?;
    let register = match pair.first.dim() {
        2 => Register::SingleQubit,
        _ => Register::TwoQubit,
    };
    Ok(backflow_unchecked(register, &pair.first, &pair.second, gamma_value).0)
}

/// `(backflow, distance)`.
fn backflow_unchecked(register: Register, a: &DensityMatrix, b: &DensityMatrix, gamma_value: f64) -> (f64, f64) {
    let d_gamma = distance_unchecked(&apply(register, a, gamma_value), &apply(register, b, gamma_value));
    // Fully dephased states are diagonal.
    let d_zero: f64 = 0.5
        * (0..a.dim())
            .map(|i| (a.matrix[(i, i)].re - b.matrix[(i, i)].re).abs())
            .sum::<f64>();
    (d_gamma - d_zero, d_gamma)
}

/// Orthogonal partner used by the two-qubit family.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Partner {
    First,
    Second,
    Both,
}

fn antipode(theta: f64, phi: f64) -> (f64, f64) {
    (std::f64::consts::PI - theta, phi + std::f64::consts::PI)
}

/// Bloch-angle grid with about `n` points, avoiding the poles.
fn angle_grid(n: usize) -> Vec<(f64, f64)> {
    let n_theta = ((n as f64).sqrt().round() as usize).max(2);
    let n_phi = n.div_ceil(n_theta).max(2);
    let mut grid = Vec::with_capacity(n_theta * n_phi);
    for i in 0..n_theta {
        let theta = std::f64::consts::PI * (i as f64 + 0.5) / n_theta as f64;
        for j in 0..n_phi {
            grid.push((theta, std::f64::consts::TAU * j as f64 / n_phi as f64));
        }
    }
    grid
}

/// Maximize `f` over `x` by compass search along coordinate and pairwise
/// diagonal directions, halving the step until it drops below `min_step`.
fn compass_search<F: Fn(&[f64]) -> f64>(f: F, start: Vec<f64>, step: f64, min_step: f64) -> (Vec<f64>, f64) {
    let dim = start.len();
    let mut directions: Vec<Vec<f64>> = Vec::new();
    for i in 0..dim {
        for sign in [1.0, -1.0] {
            let mut d = vec![0.0; dim];
            d[i] = sign;
            directions.push(d);
        }
        for j in (i + 1)..dim {
            for (si, sj) in [(1.0, 1.0), (1.0, -1.0), (-1.0, 1.0), (-1.0, -1.0)] {
                let mut d = vec![0.0; dim];
                d[i] = si;
                d[j] = sj;
                directions.push(d);
            }
        }
    }

    let mut x = start;
    let mut best = f(&x);
    let mut step = step;
    while step > min_step {
        let mut improved = false;
        for d in &directions {
            let trial: Vec<f64> = x.iter().zip(d).map(|(xi, di)| xi + step * di).collect();
            let v = f(&trial);
            if v > best {
                best = v;
                x = trial;
                improved = true;
                break;
            }
        }
        if !improved {
            step *= 0.5;
        }
    }
    (x, best)
}

/// Search for the pair of pure initial states whose trace distance after
/// dephasing by `gamma_value` carries the most coherence-borne
/// distinguishability.
///
/// Single qubit: all pairs drawn from a Bloch-angle grid of about `n_samples`
/// points. Two qubits: product states `|ab>` on an `n_samples`-point grid per
/// qubit paired with their orthogonal product partners, plus all pairs of Bell
/// states. The best candidate is then polished by a compass search.
pub fn optimal_pair_search(gamma_value: f64, n_samples: usize, register: Register) -> Result<PairSearch> {
    check_gamma(gamma_value)?;
    if n_samples < 100 {
        return Err(domain(format!("need at least 100 samples, got {n_samples}")));
    }
    match register {
        Register::SingleQubit => single_qubit_search(gamma_value, n_samples),
        Register::TwoQubit => two_qubit_search(gamma_value, n_samples),
    }
}

fn single_qubit_search(gamma_value: f64, n_samples: usize) -> Result<PairSearch> {
    let grid = angle_grid(n_samples);
    let states: Vec<DensityMatrix> = grid.iter().map(|&(t, p)| DensityMatrix::bloch(t, p)).collect();
    let candidates = grid.len() * (grid.len() - 1) / 2;

    let objective = |x: &[f64]| {
        let a = DensityMatrix::bloch(x[0], x[1]);
        let b = DensityMatrix::bloch(x[2], x[3]);
        backflow_unchecked(Register::SingleQubit, &a, &b, gamma_value).0
    };

    let (i, j, _) = (0..states.len())
        .into_par_iter()
        .flat_map_iter(|i| ((i + 1)..states.len()).map(move |j| (i, j)))
        .map(|(i, j)| {
            let (v, _) = backflow_unchecked(Register::SingleQubit, &states[i], &states[j], gamma_value);
            (i, j, v)
        })
        .reduce(|| (0, 0, f64::NEG_INFINITY), pick_best);

    let start = vec![grid[i].0, grid[i].1, grid[j].0, grid[j].1];
    let (x, _) = compass_search(objective, start, 0.1, 1e-12);
    let first = DensityMatrix::bloch(x[0], x[1]);
    let second = DensityMatrix::bloch(x[2], x[3]);
    let (backflow, distance) = backflow_unchecked(Register::SingleQubit, &first, &second, gamma_value);
    Ok(PairSearch {
        pair: StatePair { first, second },
        distance,
        backflow,
        candidates,
    })
}

/// Deterministic max: ties go to the lexicographically smaller index pair.
fn pick_best(a: (usize, usize, f64), b: (usize, usize, f64)) -> (usize, usize, f64) {
    match a.2.total_cmp(&b.2) {
        std::cmp::Ordering::Greater => a,
        std::cmp::Ordering::Less => b,
        std::cmp::Ordering::Equal => {
            if (a.0, a.1) <= (b.0, b.1) {
                a
            } else {
                b
            }
        }
    }
}

fn product_pair(x: &[f64], partner: Partner) -> (DensityMatrix, DensityMatrix) {
    let (ta, pa, tb, pb) = (x[0], x[1], x[2], x[3]);
    let (ta2, pa2) = match partner {
        Partner::First | Partner::Both => antipode(ta, pa),
        Partner::Second => (ta, pa),
    };
    let (tb2, pb2) = match partner {
        Partner::Second | Partner::Both => antipode(tb, pb),
        Partner::First => (tb, pb),
    };
    let kron = |t1: f64, p1: f64, t2: f64, p2: f64| {
        let a = bloch_vector(t1, p1);
        let b = bloch_vector(t2, p2);
        let v = [a[0] * b[0], a[0] * b[1], a[1] * b[0], a[1] * b[1]];
        DensityMatrix { matrix: outer(&v) }
    };
    (kron(ta, pa, tb, pb), kron(ta2, pa2, tb2, pb2))
}

const PARTNERS: [Partner; 3] = [Partner::First, Partner::Second, Partner::Both];

fn two_qubit_search(gamma_value: f64, n_samples: usize) -> Result<PairSearch> {
    let grid = angle_grid(n_samples);
    let n = grid.len();
    let total = n * n * PARTNERS.len();

    let (idx, _, product_best) = (0..total)
        .into_par_iter()
        .map(|k| {
            let partner = PARTNERS[k % 3];
            let ab = k / 3;
            let (ga, gb) = (grid[ab / n], grid[ab % n]);
            let (first, second) = product_pair(&[ga.0, ga.1, gb.0, gb.1], partner);
            let (v, _) = backflow_unchecked(Register::TwoQubit, &first, &second, gamma_value);
            (k, 0, v)
        })
        .reduce(|| (0, 0, f64::NEG_INFINITY), pick_best);

    let bells = bell_states();
    let mut bell_best: Option<(usize, usize, f64)> = None;
    for i in 0..4 {
        for j in (i + 1)..4 {
            let (v, _) = backflow_unchecked(Register::TwoQubit, &bells[i], &bells[j], gamma_value);
            if bell_best.is_none_or(|b| v > b.2) {
                bell_best = Some((i, j, v));
            }
        }
    }
    let candidates = total + 6;
    let (bi, bj, bell_value) = bell_best.expect("six Bell pairs");

    // Polish the best product candidate; keep a Bell pair only if it wins.
    let partner = PARTNERS[idx % 3];
    let ab = idx / 3;
    let start = vec![grid[ab / n].0, grid[ab / n].1, grid[ab % n].0, grid[ab % n].1];
    let objective = |x: &[f64]| {
        let (a, b) = product_pair(x, partner);
        backflow_unchecked(Register::TwoQubit, &a, &b, gamma_value).0
    };
    let (x, polished) = compass_search(objective, start, 0.1, 1e-12);
    debug_assert!(polished >= product_best);

    let (first, second) = if bell_value > polished {
        (bells[bi].clone(), bells[bj].clone())
    } else {
        product_pair(&x, partner)
    };
    let (backflow, distance) = backflow_unchecked(Register::TwoQubit, &first, &second, gamma_value);
    Ok(PairSearch {
        pair: StatePair { first, second },
        distance,
        backflow,
        candidates,
    })
}

/// `|++>` and `|-->`.
pub fn plus_plus_minus_minus() -> StatePair {
    let plus = DensityMatrix::bloch(std::f64::consts::FRAC_PI_2, 0.0);
    let minus = DensityMatrix::bloch(std::f64::consts::FRAC_PI_2, std::f64::consts::PI);
    StatePair {
        first: DensityMatrix::product(&plus, &plus).expect("qubits"),
        second: DensityMatrix::product(&minus, &minus).expect("qubits"),
    }
}
