use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::hat::HatEvaluator;
use super::torus::{one_minus_dhat_table, MultiIndex, TorusPoint};
use crate::error::{Error, Result};
use crate::fit::{linear_fit, log_space, three_term_fit, LinearFit};

/// Non-increasing index tuples `q_1 >= ... >= q_d` in `0..=half`: one
/// representative per orbit of the grid `{2 pi q / L}` under sign flips
/// and permutations.
fn sorted_tuples(dim: usize, half: usize) -> Vec<Vec<u16>> {
    let mut out = Vec::new();
    let mut cur = vec![0u16; dim];
    fn fill(cur: &mut Vec<u16>, pos: usize, max: u16, out: &mut Vec<Vec<u16>>) {
        if pos == cur.len() {
            out.push(cur.clone());
            return;
        }
        for v in 0..=max {
            cur[pos] = v;
            fill(cur, pos + 1, v, out);
        }
    }
    fill(&mut cur, 0, half as u16, &mut out);
    out
}

/// Values of `h-hat` at every sorted grid tuple, `k_j = 2 pi q_j / L`.
fn tuple_values(h: &HatEvaluator, tuples: &[Vec<u16>], side: usize) -> Vec<f64> {
    let half = side / 2;
    let r = h.radius();
    let table: Vec<Vec<f64>> = (0..=half)
        .map(|q| (0..=r).map(|m| (2.0 * PI * (q * m) as f64 / side as f64).cos()).collect())
        .collect();
    tuples
        .par_iter()
        .map(|q| h.eval_with(|j, m| table[q[j] as usize][m]))
        .collect()
}

#[derive(Clone, Debug, PartialEq)]
pub struct InfraredReport {
    pub grid: usize,
    /// Orbit representatives of grid points scanned (`k = 0` excluded).
    pub points_scanned: usize,
    /// `min_k F-hat(k) / |k|^2`.
    pub c_est: f64,
    pub argmin: Vec<f64>,
    pub fhat_at_argmin: f64,
    /// `min_k F-hat(k)` over the nonzero grid.
    pub min_fhat: f64,
    /// `F-hat(0) = 1 / chi`.
    pub fhat_at_zero: f64,
    /// `c_est <= 0`.
    pub violation: bool,
}

/// Scans `F-hat(k) / |k|^2` over the grid `k_j = -pi + 2 pi m / L`.
pub fn infrared_scan(fhat: &HatEvaluator, grid: usize) -> Result<InfraredReport> {
    if grid < 2 || grid % 2 == 1 {
        return Err(Error::InvalidArgument(format!("grid size {grid} must be even and at least 2")));
    }
    let dim = fhat.dim();
    let tuples: Vec<Vec<u16>> = sorted_tuples(dim, grid / 2).into_iter().filter(|q| q[0] > 0).collect();
    let values = tuple_values(fhat, &tuples, grid);
    let wave = |q: u16| 2.0 * PI * f64::from(q) / grid as f64;
    let mut best = (f64::INFINITY, 0usize);
    let mut min_fhat = f64::INFINITY;
    for (i, (q, &v)) in tuples.iter().zip(&values).enumerate() {
        let k2: f64 = q.iter().map(|&c| wave(c).powi(2)).sum();
        let ratio = v / k2;
        if ratio < best.0 {
            best = (ratio, i);
        }
        min_fhat = min_fhat.min(v);
    }
    let argmin: Vec<f64> = tuples[best.1].iter().map(|&c| wave(c)).collect();
    Ok(InfraredReport {
        grid,
        points_scanned: tuples.len(),
        c_est: best.0,
        argmin,
        fhat_at_argmin: values[best.1],
        min_fhat,
        fhat_at_zero: fhat.eval(&TorusPoint::origin(dim))?,
        violation: best.0 <= 0.0,
    })
}

/// Largest `|G-hat F-hat - 1|` and `|G-hat|` over the orbit-reduced grid,
/// for two truncated transforms.
pub fn fourier_identity_residual(ghat: &HatEvaluator, fhat: &HatEvaluator, grid: usize) -> Result<(f64, f64)> {
    if ghat.dim() != fhat.dim() {
        return Err(Error::Mismatch("transforms live in different dimensions".into()));
    }
    if grid < 2 || grid % 2 == 1 {
        return Err(Error::InvalidArgument(format!("grid size {grid} must be even and at least 2")));
    }
    let tuples = sorted_tuples(ghat.dim(), grid / 2);
    let g = tuple_values(ghat, &tuples, grid);
    let f = tuple_values(fhat, &tuples, grid);
    let residual = g.iter().zip(&f).map(|(a, b)| (a * b - 1.0).abs()).fold(0.0, f64::max);
    let max_g = g.iter().map(|v| v.abs()).fold(0.0, f64::max);
    Ok((residual, max_g))
}

#[derive(Clone, Debug, PartialEq)]
pub struct ScalingOptions {
    pub r_min: f64,
    pub r_max: f64,
    pub radii: usize,
    pub random_directions: usize,
    pub seed: u64,
}

impl Default for ScalingOptions {
    fn default() -> Self {
        ScalingOptions { r_min: 0.05, r_max: 0.5, radii: 12, random_directions: 16, seed: 0x5eed }
    }
}

/// Fit of `ln M = c + s ln r + b ln ln(1/r)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LogCorrectedFit {
    pub slope: f64,
    pub log_coefficient: f64,
    pub intercept: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ScalingRow {
    pub alpha: MultiIndex,
    pub expected_slope: f64,
    /// `M_alpha(r) = max over sampled |k| = r of |d^alpha E-hat(k)|`.
    pub maxima: Vec<f64>,
    /// `None` when `E-hat` vanishes identically.
    pub fit: Option<LinearFit>,
    /// `exp(mean ln M)`: the fitted `M` at the geometric mean radius.
    pub amplitude: f64,
    pub deviation: Option<f64>,
    pub log_corrected: Option<LogCorrectedFit>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ScalingReport {
    pub radii: Vec<f64>,
    pub directions: usize,
    pub rows: Vec<ScalingRow>,
}

/// Unit vectors: the axes, the main diagonal, and seeded random directions.
pub fn sample_directions(dim: usize, random: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut out: Vec<Vec<f64>> = (0..dim)
        .map(|j| {
            let mut e = vec![0.0; dim];
            e[j] = 1.0;
            e
        })
        .collect();
    out.push(vec![1.0 / (dim as f64).sqrt(); dim]);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    while out.len() < dim + 1 + random {
        let v: Vec<f64> = (0..dim).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let n = v.iter().map(|c| c * c).sum::<f64>().sqrt();
        if n > 1e-3 && n <= 1.0 {
            out.push(v.into_iter().map(|c| c / n).collect());
        }
    }
    out
}

/// Small-`k` scaling of `d^alpha E-hat`: expected `|k|^{4 - |alpha|}` once
/// the zeroth and second moments of `E` vanish.
pub fn ehat_scaling_audit(ehat: &HatEvaluator, alphas: &[MultiIndex], options: &ScalingOptions) -> Result<ScalingReport> {
    let dim = ehat.dim();
    if alphas.iter().any(|a| a.order() > 3 || a.dim() != dim) {
        return Err(Error::InvalidArgument("scaling audit takes |alpha| <= 3 in the evaluator's dimension".into()));
    }
    if !(options.r_min > 0.0 && options.r_max > options.r_min && options.radii >= 2) {
        return Err(Error::InvalidArgument("need 0 < r_min < r_max and at least two radii".into()));
    }
    let radii = log_space(options.r_min, options.r_max, options.radii);
    let dirs = sample_directions(dim, options.random_directions, options.seed);
    let mut rows = Vec::with_capacity(alphas.len());
    for alpha in alphas {
        let maxima: Vec<f64> = radii
            .par_iter()
            .map(|&r| {
                dirs.iter()
                    .map(|u| {
                        let k: Vec<f64> = u.iter().map(|c| c * r).collect();
                        ehat.derivative(&TorusPoint::new(&k).expect("finite"), alpha).expect("dims match").abs()
                    })
                    .fold(0.0, f64::max)
            })
            .collect();
        let expected_slope = 4.0 - f64::from(alpha.order());
        let positive = maxima.iter().all(|&m| m > 0.0);
        let (fit, amplitude, log_corrected) = if positive {
            let lx: Vec<f64> = radii.iter().map(|r| r.ln()).collect();
            let ly: Vec<f64> = maxima.iter().map(|m| m.ln()).collect();
            let fit = linear_fit(&lx, &ly)?;
            let amplitude = (ly.iter().sum::<f64>() / ly.len() as f64).exp();
            let log_corrected = if dim == 5 && radii.len() >= 3 {
                let ones = vec![1.0; radii.len()];
                let lln: Vec<f64> = radii.iter().map(|r| (1.0 / r).ln().ln()).collect();
                let c = three_term_fit([&ones, &lx, &lln], &ly)?;
                Some(LogCorrectedFit { intercept: c[0], slope: c[1], log_coefficient: c[2] })
            } else {
                None
            };
            (Some(fit), amplitude, log_corrected)
        } else {
            (None, 0.0, None)
        };
        rows.push(ScalingRow {
            alpha: alpha.clone(),
            expected_slope,
            deviation: fit.map(|f| f.slope - expected_slope),
            maxima,
            fit,
            amplitude,
            log_corrected,
        });
    }
    Ok(ScalingReport { radii, directions: dirs.len(), rows })
}

#[derive(Clone, Debug, PartialEq)]
pub struct L1Row {
    pub alpha: MultiIndex,
    /// `int |d^alpha f-hat(k)| dk / (2 pi)^d` on the fine grid.
    pub l1: f64,
    pub l1_coarse: f64,
    pub relative_change: f64,
    /// Set when halving the grid moves the estimate by more than 10%.
    pub accuracy_warning: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct L1Report {
    pub points_per_axis: usize,
    pub rows: Vec<L1Row>,
}

/// Largest admissible `|alpha|` for the `f-hat` audit.
pub fn max_fhat_derivative(dim: usize) -> u32 {
    if dim >= 6 {
        dim as u32 - 1
    } else {
        dim.saturating_sub(2) as u32
    }
}

fn fhat_l1(coupling: f64, ehat: &HatEvaluator, fhat: &HatEvaluator, alpha: &MultiIndex, m: usize) -> Result<f64> {
    let dim = ehat.dim();
    let nodes: Vec<f64> = (0..m).map(|i| (i as f64 + 0.5) * PI / m as f64).collect();
    let betas = alpha.box_below();
    let e_grids: Vec<Vec<f64>> = betas.iter().map(|b| ehat.grid_values(&nodes, b)).collect::<Result<_>>()?;
    let f_grids: Vec<Vec<f64>> = betas.iter().map(|b| fhat.grid_values(&nodes, b)).collect::<Result<_>>()?;
    let total = m.pow(dim as u32);
    let values: Vec<Result<f64>> = (0..total)
        .into_par_iter()
        .map(|idx| {
            let mut rem = idx;
            let mut k = vec![0.0; dim];
            for slot in k.iter_mut().rev() {
                *slot = nodes[rem % m];
                rem /= m;
            }
            let k = TorusPoint::new(&k)?;
            let mut e = super::DerivativeTable::new(alpha);
            let mut f = super::DerivativeTable::new(alpha);
            for ((slot_e, slot_f), i) in e.values_mut().iter_mut().zip(f.values_mut().iter_mut()).zip(0..) {
                *slot_e = e_grids[i][idx];
                *slot_f = f_grids[i][idx];
            }
            if f.values()[0] <= 0.0 {
                return Err(Error::Precondition(format!(
                    "F-hat is not positive at k = {:?}; z is outside the evaluable range",
                    k.components()
                )));
            }
            let c = one_minus_dhat_table(&k, coupling, alpha).reciprocal()?;
            let g = f.reciprocal()?;
            Ok(c.product(&e).product(&g).get(alpha).abs())
        })
        .collect();
    let mut sum = 0.0;
    for v in values {
        sum += v?;
    }
    Ok(sum / total as f64)
}

/// `L^1(T^d, dk/(2 pi)^d)` norms of `d^alpha f-hat` with
/// `f-hat = C-hat_mu E-hat / F-hat`, by the midpoint rule on the positive
/// orthant (the integrand is even in every `k_j`).
pub fn fhat_l1_audit(
    coupling: f64,
    ehat: &HatEvaluator,
    fhat: &HatEvaluator,
    alphas: &[MultiIndex],
    points_per_axis: usize,
) -> Result<L1Report> {
    let dim = ehat.dim();
    if fhat.dim() != dim {
        return Err(Error::Mismatch("E-hat and F-hat live in different dimensions".into()));
    }
    if points_per_axis < 2 || points_per_axis % 2 == 1 {
        return Err(Error::InvalidArgument("points per axis must be even and at least 2".into()));
    }
    if !(0.0..=1.0).contains(&coupling) {
        return Err(Error::Precondition(format!("mu Omega = {coupling} must lie in [0, 1]")));
    }
    let limit = max_fhat_derivative(dim);
    let mut rows = Vec::new();
    for alpha in alphas {
        if alpha.dim() != dim || alpha.order() > limit {
            return Err(Error::InvalidArgument(format!("|alpha| = {} exceeds {limit} in d = {dim}", alpha.order())));
        }
        if ehat.is_zero() {
            rows.push(L1Row { alpha: alpha.clone(), l1: 0.0, l1_coarse: 0.0, relative_change: 0.0, accuracy_warning: false });
            continue;
        }
        let l1 = fhat_l1(coupling, ehat, fhat, alpha, points_per_axis)?;
        let l1_coarse = fhat_l1(coupling, ehat, fhat, alpha, points_per_axis / 2)?;
        let relative_change = if l1 > 0.0 { (l1 - l1_coarse).abs() / l1 } else { 0.0 };
        rows.push(L1Row { alpha: alpha.clone(), l1, l1_coarse, relative_change, accuracy_warning: relative_change > 0.1 });
    }
    Ok(L1Report { points_per_axis, rows })
}
