//! The simple random walk two-point function
//! `C_mu(x) = sum_n (mu Omega)^n D^{*n}(x)`, evaluated through
//! `C_mu(x) = int_0^inf e^{-t} prod_j I_{x_j}(mu Omega t / d) dt`.

pub mod bessel;
pub mod quadrature;

use std::collections::BTreeMap;
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::lattice::{representatives_in_box, LatticePoint};
use bessel::scaled_bessel_table;
use quadrature::{integrate_vector, QuadratureOptions};

/// `Gamma(k / 2)` for a positive integer `k`.
pub fn gamma_half(k: u32) -> f64 {
    assert!(k > 0, "Gamma has a pole at 0");
    if k.is_multiple_of(2) {
        (1..k / 2).map(f64::from).product()
    } else {
        // Gamma(n + 1/2) = (2n)! sqrt(pi) / (4^n n!)
        let n = (k - 1) / 2;
        (1..=n).map(|i| f64::from(2 * i - 1) / 2.0).product::<f64>() * PI.sqrt()
    }
}

/// `a_d = d Gamma((d - 2)/2) / (2 pi^{d/2})`, the amplitude of
/// `C_{1/Omega}(x) ~ a_d |x|^{-(d-2)}`.
pub fn amplitude_a_d(dim: usize) -> Result<f64> {
    if dim < 3 {
        return Err(Error::InvalidArgument(format!("a_d is defined for d >= 3, got d = {dim}")));
    }
    let d = dim as f64;
    Ok(d * gamma_half(dim as u32 - 2) / (2.0 * PI.powf(d / 2.0)))
}

/// Evaluator for `C_mu` at fixed `d` and `mu`.
#[derive(Clone, Debug, PartialEq)]
pub struct GreenEvaluator {
    dim: usize,
    mu: f64,
    coupling: f64,
    options: QuadratureOptions,
}

impl GreenEvaluator {
    pub fn new(dim: usize, mu: f64) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidArgument("dimension must be at least 1".into()));
        }
        let omega = 2.0 * dim as f64;
        if !(mu.is_finite() && mu >= 0.0) {
            return Err(Error::InvalidArgument(format!("mu = {mu} must be finite and non-negative")));
        }
        let mut coupling = mu * omega;
        if coupling > 1.0 + 1e-12 {
            return Err(Error::Precondition(format!("mu Omega = {coupling} exceeds 1")));
        }
        coupling = coupling.min(1.0);
        if coupling == 1.0 && dim < 3 {
            return Err(Error::Precondition(format!(
                "C_mu at mu = 1/Omega diverges in d = {dim}; need d >= 3"
            )));
        }
        Ok(GreenEvaluator { dim, mu, coupling, options: QuadratureOptions::default() })
    }

    /// The Green function `C_{1/Omega}`.
    pub fn critical(dim: usize) -> Result<Self> {
        Self::new(dim, 1.0 / (2.0 * dim as f64))
    }

    pub fn with_tolerance(mut self, abs_tol: f64) -> Self {
        self.options.abs_tol = abs_tol;
        self
    }

    pub fn with_options(mut self, options: QuadratureOptions) -> Self {
        self.options = options;
        self
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    /// `mu Omega`.
    pub fn coupling(&self) -> f64 {
        self.coupling
    }

    pub fn tolerance(&self) -> f64 {
        self.options.abs_tol
    }

    pub fn eval(&self, x: &LatticePoint) -> Result<f64> {
        Ok(self.eval_many(std::slice::from_ref(x))?[0])
    }

    /// Upper limit in `t` beyond which the integrand contributes less than
    /// `budget`, from `e^{-(1-a)t}` decay or, for `d >= 3`, from
    /// `Ie_0(u) <= 0.45 / sqrt(u)` (valid for `u >= 2`).
    fn upper_limit(&self, budget: f64) -> Result<f64> {
        let a = self.coupling;
        let d = self.dim as f64;
        let t_exp = if a < 1.0 { (1.0 / ((1.0 - a) * budget)).ln().max(1.0) / (1.0 - a) } else { f64::INFINITY };
        let t_poly = if self.dim >= 3 {
            let p = d / 2.0 - 1.0;
            let c = 0.45f64.powf(d) * (d / a).powf(d / 2.0) / p;
            (c / budget).powf(1.0 / p).max(2.0 * d / a)
        } else {
            f64::INFINITY
        };
        let t = t_exp.min(t_poly);
        if !t.is_finite() {
            return Err(Error::Precondition("integral does not converge".into()));
        }
        Ok(t)
    }

    /// Evaluates `C_mu` at many points with one shared adaptive quadrature.
    pub fn eval_many(&self, points: &[LatticePoint]) -> Result<Vec<f64>> {
        for x in points {
            if x.dim() != self.dim {
                return Err(Error::Mismatch(format!("point {x} is not in dimension {}", self.dim)));
            }
        }
        if self.coupling == 0.0 {
            return Ok(points.iter().map(|x| if x.is_origin() { 1.0 } else { 0.0 }).collect());
        }
        let mut index: BTreeMap<LatticePoint, usize> = BTreeMap::new();
        for x in points {
            let next = index.len();
            index.entry(x.orbit_representative()).or_insert(next);
        }
        let mut reps: Vec<(usize, Vec<usize>)> =
            index.iter().map(|(x, &i)| (i, x.coords().iter().map(|&c| c as usize).collect())).collect();
        reps.sort();
        let reps: Vec<Vec<usize>> = reps.into_iter().map(|(_, c)| c).collect();
        let n_max = reps.iter().flat_map(|c| c.iter().copied()).max().unwrap_or(0);

        let tol = self.options.abs_tol;
        let t_lo = tol * 1e-3;
        let t_hi = self.upper_limit(tol * 1e-3)?;
        let a = self.coupling;
        let d = self.dim as f64;
        let mut table = Vec::with_capacity(n_max + 1);
        let integrand = |s: f64, out: &mut [f64]| {
            let t = s.exp();
            let weight = t * (-(1.0 - a) * t).exp();
            if weight == 0.0 {
                out.iter_mut().for_each(|v| *v = 0.0);
                return;
            }
            scaled_bessel_table(a * t / d, n_max, &mut table);
            for (v, c) in out.iter_mut().zip(&reps) {
                *v = c.iter().fold(weight, |acc, &n| acc * table[n]);
            }
        };
        let opts = QuadratureOptions { abs_tol: 0.9 * tol, ..self.options };
        let result = integrate_vector(integrand, t_lo.ln(), t_hi.ln(), reps.len(), &opts)?;
        Ok(points.iter().map(|x| result.values[index[&x.orbit_representative()]]).collect())
    }

    /// `C_mu(x)` by summing `(mu Omega)^n P_n(x)` with exact-in-law walk
    /// probabilities; available for `mu Omega < 1`.
    pub fn series_eval(&self, x: &LatticePoint) -> Result<f64> {
        let a = self.coupling;
        if a >= 1.0 {
            return Err(Error::Precondition("series evaluation needs mu Omega < 1".into()));
        }
        if a == 0.0 {
            return Ok(if x.is_origin() { 1.0 } else { 0.0 });
        }
        if x.dim() != self.dim {
            return Err(Error::Mismatch(format!("point {x} is not in dimension {}", self.dim)));
        }
        // tail sum_{n > N} a^n <= a^{N+1} / (1 - a)
        let budget = self.options.abs_tol * 1e-2 * (1.0 - a);
        let n_max = ((budget.ln() / a.ln()).ceil() as usize).max(x.l1_norm() as usize + 1);
        let ln_fact: Vec<f64> = std::iter::once(0.0)
            .chain((1..=n_max).scan(0.0, |acc, k| {
                *acc += (k as f64).ln();
                Some(*acc)
            }))
            .collect();
        let ln_binom = |n: usize, m: usize| ln_fact[n] - ln_fact[m] - ln_fact[n - m];
        // one-dimensional walk probabilities p1(m, y)
        let p1 = |m: usize, y: i32| -> f64 {
            let y = y.unsigned_abs() as usize;
            if y > m || (m + y) % 2 == 1 {
                return 0.0;
            }
            (ln_binom(m, (m + y) / 2) - m as f64 * std::f64::consts::LN_2).exp()
        };
        let coords = x.coords();
        let mut q: Vec<f64> = (0..=n_max).map(|n| p1(n, coords[0])).collect();
        for (j, &c) in coords.iter().enumerate().skip(1) {
            let p = 1.0 / (j + 1) as f64;
            let (lp, lq) = (p.ln(), (1.0 - p).ln());
            let axis: Vec<f64> = (0..=n_max).map(|m| p1(m, c)).collect();
            let mut next = vec![0.0; n_max + 1];
            for (n, slot) in next.iter_mut().enumerate() {
                let mut s = 0.0;
                for m in 0..=n {
                    if axis[m] == 0.0 || q[n - m] == 0.0 {
                        continue;
                    }
                    let w = (ln_binom(n, m) + m as f64 * lp + (n - m) as f64 * lq).exp();
                    s += w * axis[m] * q[n - m];
                }
                *slot = s;
            }
            q = next;
        }
        let mut total = 0.0;
        let mut power = 1.0;
        for v in q {
            total += power * v;
            power *= a;
        }
        Ok(total)
    }
}

/// `max_{|x|_inf <= R} |C(x) - mu Omega (D * C)(x) - delta_{0,x}|`.
pub fn resolvent_residual(ev: &GreenEvaluator, radius: u32) -> Result<f64> {
    let dim = ev.dim();
    let outer = representatives_in_box(dim, radius + 1);
    let values = ev.eval_many(&outer)?;
    let c: BTreeMap<LatticePoint, f64> = outer.into_iter().zip(values).collect();
    let a = ev.coupling() / (2 * dim) as f64;
    let mut worst = 0.0f64;
    for x in representatives_in_box(dim, radius) {
        let mut s = c[&x];
        for axis in 0..dim {
            for sign in [-1, 1] {
                s -= a * c[&x.add(&LatticePoint::unit(dim, axis, sign)).orbit_representative()];
            }
        }
        let want = if x.is_origin() { 1.0 } else { 0.0 };
        worst = worst.max((s - want).abs());
    }
    Ok(worst)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Direction {
    Axis,
    Diagonal,
}

impl Direction {
    pub fn as_str(self) -> &'static str {
        match self {
            Direction::Axis => "axis",
            Direction::Diagonal => "diagonal",
        }
    }

    /// The lattice point at step `r` in this direction.
    pub fn point(self, dim: usize, r: i32) -> LatticePoint {
        match self {
            Direction::Axis => LatticePoint::on_axis(dim, r),
            Direction::Diagonal => LatticePoint::on_diagonal(dim, r),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct AsymptoticRow {
    pub direction: Direction,
    pub point: LatticePoint,
    /// Euclidean distance `|x|`.
    pub distance: f64,
    pub value: f64,
    /// `C(x) |x|^{d-2} / a_d`.
    pub ratio: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct AsymptoticAudit {
    pub amplitude: f64,
    pub rows: Vec<AsymptoticRow>,
    /// `|ratio - 1|` is non-increasing along the axis.
    pub axis_converges_monotonically: bool,
}

/// Table of `C_{1/Omega}(x) |x|^{d-2} / a_d` along the axis and diagonal.
pub fn green_asymptotic_audit(ev: &GreenEvaluator, radii: &[u32]) -> Result<AsymptoticAudit> {
    if ev.coupling() < 1.0 {
        return Err(Error::Precondition("asymptotic audit needs mu = 1/Omega".into()));
    }
    if radii.is_empty() || radii.contains(&0) {
        return Err(Error::InvalidArgument("radii must be nonempty and positive".into()));
    }
    let a_d = amplitude_a_d(ev.dim())?;
    let dirs = [Direction::Axis, Direction::Diagonal];
    let points: Vec<(Direction, LatticePoint)> =
        dirs.iter().flat_map(|&dir| radii.iter().map(move |&r| (dir, dir.point(ev.dim(), r as i32)))).collect();
    let pts: Vec<LatticePoint> = points.iter().map(|(_, p)| p.clone()).collect();
    let values = ev.eval_many(&pts)?;
    let exponent = ev.dim() as f64 - 2.0;
    let rows: Vec<AsymptoticRow> = points
        .into_iter()
        .zip(values)
        .map(|((direction, point), value)| {
            let distance = (point.norm_sq() as f64).sqrt();
            AsymptoticRow { direction, distance, value, ratio: value * distance.powf(exponent) / a_d, point }
        })
        .collect();
    let axis: Vec<f64> =
        rows.iter().filter(|r| r.direction == Direction::Axis).map(|r| (r.ratio - 1.0).abs()).collect();
    let monotone = axis.windows(2).all(|w| w[1] <= w[0]);
    Ok(AsymptoticAudit { amplitude: a_d, rows, axis_converges_monotonically: monotone })
}
