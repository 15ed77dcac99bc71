//! Globally adaptive Gauss–Kronrod (7/15) quadrature.
//!
//! The interval with the largest error estimate is bisected until the summed
//! error drops below `max(abs_tol, rel_tol * |I|)`. Any interval that would
//! have to be split past `max_depth` bisections aborts the integration with
//! [`Error::Quadrature`].

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};

// Kronrod abscissae on [-1, 1]; odd indices are the embedded Gauss nodes.
const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];

const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];

const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

#[derive(Debug, Clone, Copy)]
pub struct QuadratureOptions {
    pub rel_tol: f64,
    pub abs_tol: f64,
    /// Maximum number of bisections applied to any single sub-interval.
    pub max_depth: u32,
    /// Number of equal panels the interval is split into before adapting.
    pub initial_panels: usize,
}

impl Default for QuadratureOptions {
    fn default() -> Self {
        Self {
            rel_tol: 1e-8,
            abs_tol: 1e-12,
            max_depth: 60,
            initial_panels: 8,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureResult {
    pub value: f64,
    pub error: f64,
    pub evaluations: usize,
}

#[derive(Debug, Clone, Copy)]
struct Segment {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
    depth: u32,
}

impl PartialEq for Segment {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}

impl Eq for Segment {}

impl PartialOrd for Segment {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Segment {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

/// One 15-point Kronrod rule on `[a, b]`; returns `(kronrod, |kronrod - gauss|)`.
fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);

    let fc = f(center);
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];

    for j in 0..7 {
        let dx = half * XGK[j];
        let pair = f(center - dx) + f(center + dx);
        kronrod += WGK[j] * pair;
        if j % 2 == 1 {
            gauss += WG[j / 2] * pair;
        }
    }

    let value = kronrod * half;
    let error = ((kronrod - gauss) * half).abs();
    (value, error)
}

/// Integrate `f` over `[a, b]`.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, opts: &QuadratureOptions) -> Result<QuadratureResult> {
    if !(a.is_finite() && b.is_finite()) || b <= a {
        return Err(Error::Domain(format!(
            "quadrature interval [{a}, {b}] must be finite and non-empty"
        )));
    }

    let panels = opts.initial_panels.max(1);
    let width = (b - a) / panels as f64;
    let mut heap = BinaryHeap::with_capacity(4 * panels);
    let mut total = 0.0;
    let mut total_err = 0.0;
    let mut evaluations = 0;

    for i in 0..panels {
        let lo = a + width * i as f64;
        let hi = if i + 1 == panels { b } else { lo + width };
        let (value, error) = gk15(&f, lo, hi);
        evaluations += 15;
        total += value;
        total_err += error;
        heap.push(Segment {
            a: lo,
            b: hi,
            value,
            error,
            depth: 0,
        });
    }

    loop {
        let target = opts.abs_tol.max(opts.rel_tol * total.abs());
        if total_err <= target {
            break;
        }
        let worst = match heap.pop() {
            Some(s) => s,
            None => break,
        };
        if worst.depth >= opts.max_depth {
            return Err(Error::Quadrature {
                achieved: total_err,
                requested: target,
            });
        }

        let mid = 0.5 * (worst.a + worst.b);
        let (left, left_err) = gk15(&f, worst.a, mid);
        let (right, right_err) = gk15(&f, mid, worst.b);
        evaluations += 30;

        total += left + right - worst.value;
        total_err += left_err + right_err - worst.error;

        heap.push(Segment {
            a: worst.a,
            b: mid,
            value: left,
            error: left_err,
            depth: worst.depth + 1,
        });
        heap.push(Segment {
            a: mid,
            b: worst.b,
            value: right,
            error: right_err,
            depth: worst.depth + 1,
        });
    }

    // Re-sum to shed the drift accumulated by the running updates.
    let value = heap.iter().map(|s| s.value).sum();
    let error = heap.iter().map(|s| s.error).sum();
    Ok(QuadratureResult {
        value,
        error,
        evaluations,
    })
}
