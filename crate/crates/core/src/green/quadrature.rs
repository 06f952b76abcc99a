//! Globally adaptive Gauss-Kronrod (7, 15) quadrature for vector-valued
//! integrands: every component shares the same nodes, so expensive common
//! work at a node (Bessel tables) is done once.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_5,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_48,
    0.0,
];

const WGK: [f64; 8] = [
    0.022_935_322_010_529_224,
    0.063_092_092_629_978_56,
    0.104_790_010_322_250_19,
    0.140_653_259_715_525_92,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_42,
    0.204_432_940_075_298_89,
    0.209_482_141_084_727_82,
];

/// Gauss weights for the odd-indexed Kronrod nodes `XGK[1], XGK[3], ...`.
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_64,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QuadratureOptions {
    /// Target for the summed error estimate (max over components).
    pub abs_tol: f64,
    /// Maximal bisection depth of any subinterval.
    pub max_depth: u32,
    pub initial_intervals: usize,
}

impl Default for QuadratureOptions {
    fn default() -> Self {
        QuadratureOptions { abs_tol: 1e-10, max_depth: 60, initial_intervals: 32 }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct QuadratureResult {
    pub values: Vec<f64>,
    pub error_estimate: f64,
    pub node_evaluations: usize,
}

struct Piece {
    a: f64,
    b: f64,
    depth: u32,
    kronrod: Vec<f64>,
    error: f64,
}

impl PartialEq for Piece {
    fn eq(&self, other: &Self) -> bool {
        self.error.total_cmp(&other.error) == Ordering::Equal
    }
}

impl Eq for Piece {}

impl PartialOrd for Piece {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Piece {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

fn rule<F: FnMut(f64, &mut [f64])>(f: &mut F, a: f64, b: f64, depth: u32, width: usize, buf: &mut [f64]) -> Piece {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let mut kronrod = vec![0.0; width];
    let mut gauss = vec![0.0; width];
    for (j, (&x, &wk)) in XGK.iter().zip(&WGK).enumerate() {
        let nodes: &[f64] = if x == 0.0 { &[0.0] } else { &[-1.0, 1.0] };
        for &sign in nodes {
            f(center + sign * half * x, buf);
            for i in 0..width {
                kronrod[i] += wk * buf[i];
                if j % 2 == 1 {
                    gauss[i] += WG[j / 2] * buf[i];
                }
            }
        }
    }
    let mut error: f64 = 0.0;
    for i in 0..width {
        kronrod[i] *= half;
        gauss[i] *= half;
        error = error.max((kronrod[i] - gauss[i]).abs());
    }
    Piece { a, b, depth, kronrod, error }
}

/// Integrates `f` over `[a, b]`; `f(s, out)` writes all `width` components
/// of the integrand at `s`.
pub fn integrate_vector<F: FnMut(f64, &mut [f64])>(
    mut f: F,
    a: f64,
    b: f64,
    width: usize,
    options: &QuadratureOptions,
) -> Result<QuadratureResult> {
    if !(a.is_finite() && b.is_finite() && a < b) {
        return Err(Error::InvalidArgument(format!("bad integration range [{a}, {b}]")));
    }
    let mut buf = vec![0.0; width];
    let mut heap = BinaryHeap::new();
    let n0 = options.initial_intervals.max(1);
    let h = (b - a) / n0 as f64;
    for j in 0..n0 {
        let lo = a + j as f64 * h;
        let hi = if j + 1 == n0 { b } else { lo + h };
        heap.push(rule(&mut f, lo, hi, 0, width, &mut buf));
    }
    let mut evaluations = 15 * n0;
    loop {
        let total: f64 = heap.iter().map(|p| p.error).sum();
        if total <= options.abs_tol {
            break;
        }
        let worst = heap.pop().expect("at least one piece");
        if worst.depth >= options.max_depth || !total.is_finite() {
            return Err(Error::Numeric {
                message: format!("quadrature did not converge on [{}, {}]", worst.a, worst.b),
                achieved: total,
            });
        }
        let mid = 0.5 * (worst.a + worst.b);
        heap.push(rule(&mut f, worst.a, mid, worst.depth + 1, width, &mut buf));
        heap.push(rule(&mut f, mid, worst.b, worst.depth + 1, width, &mut buf));
        evaluations += 30;
    }
    let mut pieces = heap.into_vec();
    // fixed summation order keeps results independent of heap layout
    pieces.sort_by(|p, q| p.a.total_cmp(&q.a));
    let mut values = vec![0.0; width];
    let mut error_estimate = 0.0;
    for p in &pieces {
        for (v, k) in values.iter_mut().zip(&p.kronrod) {
            *v += k;
        }
        error_estimate += p.error;
    }
    Ok(QuadratureResult { values, error_estimate, node_evaluations: evaluations })
}
