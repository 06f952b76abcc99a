//! The lace-expansion kernel `Pi_z`, obtained by inverting the two-point
//! series and reading off `Pi = delta - z Omega D - F`.

use num_rational::BigRational;
use num_traits::{One, Zero};
use rayon::prelude::*;
use rustc_hash::FxHashMap;

use crate::error::{Error, Result};
use crate::lattice::{
    rational_to_f64, representatives_in_l1_ball, LatticePoint, SpatialSeries, Storage, ZPolynomial,
};

/// `Pi_z` together with `F_z = delta - z Omega D - Pi_z`.
#[derive(Clone, Debug, PartialEq)]
pub struct PiSeries {
    pub pi: SpatialSeries,
    pub f: SpatialSeries,
}

impl PiSeries {
    pub fn is_zero(&self) -> bool {
        self.pi.is_empty()
    }
}

fn require_orbit(s: &SpatialSeries, what: &str) -> Result<SpatialSeries> {
    match s.storage() {
        Storage::Orbit => Ok(s.clone()),
        Storage::Full => s
            .to_orbit()
            .map_err(|_| Error::Precondition(format!("{what} must be lattice-symmetric"))),
    }
}

/// The unique `F` with `G * F = delta` through the truncation order, by
/// order-by-order back-substitution
/// `F_n(x) = [n = 0] delta(x) - sum_{m=1}^n sum_y g_m(y) F_{n-m}(x - y)`.
pub fn invert_to_f(g: &SpatialSeries) -> Result<SpatialSeries> {
    let g = require_orbit(g, "G")?;
    let dim = g.dim();
    let order = g.order();
    let origin = LatticePoint::origin(dim);
    let g0 = g.order_slice(0);
    if g0.len() != 1 || g0[0].0 != origin || !g0[0].1.is_one() {
        return Err(Error::Precondition("G must have constant term delta to be invertible".into()));
    }
    // g_m with orbits expanded, one list per order
    let slices: Vec<Vec<(LatticePoint, BigRational)>> = (0..=order).map(|m| g.order_slice(m)).collect();
    let mut f_orders: Vec<FxHashMap<LatticePoint, BigRational>> = Vec::with_capacity(order + 1);
    f_orders.push(FxHashMap::from_iter([(origin.clone(), BigRational::one())]));
    for n in 1..=order {
        let radius = n as u32;
        let candidates = representatives_in_l1_ball(dim, radius);
        let done = &f_orders;
        let slices = &slices;
        let values: Vec<(LatticePoint, BigRational)> = candidates
            .into_par_iter()
            .filter(|x| (x.l1_norm() as usize + n).is_multiple_of(2))
            .filter_map(|x| {
                let mut acc = BigRational::zero();
                for m in 1..=n {
                    let prev = &done[n - m];
                    if prev.is_empty() {
                        continue;
                    }
                    let reach = (n - m) as u32;
                    for (y, gy) in &slices[m] {
                        let w = x.sub(y);
                        if w.l1_norm() > reach {
                            continue;
                        }
                        if let Some(fw) = prev.get(&w.orbit_representative()) {
                            acc -= gy * fw;
                        }
                    }
                }
                (!acc.is_zero()).then_some((x, acc))
            })
            .collect();
        f_orders.push(values.into_iter().collect());
    }
    let mut polys: std::collections::BTreeMap<LatticePoint, ZPolynomial> = Default::default();
    for (n, fn_) in f_orders.into_iter().enumerate() {
        for (x, v) in fn_ {
            polys.entry(x).or_insert_with(|| ZPolynomial::zero(order)).set_coeff(n, v);
        }
    }
    let mut f = SpatialSeries::new(dim, order, Storage::Orbit)?;
    for (x, p) in polys {
        f.insert(&x, p)?;
    }
    Ok(f)
}

/// `Pi = delta - z Omega D - F`; asserts the structural facts every kernel
/// must satisfy (no `z^0`, `z^1` terms, symmetric, walk support).
pub fn pi_from_f(f: &SpatialSeries) -> Result<PiSeries> {
    let f = require_orbit(f, "F")?;
    let delta = SpatialSeries::delta(f.dim(), f.order())?;
    let step = SpatialSeries::fugacity_step(f.dim(), f.order())?;
    let pi = delta.checked_sub(&step)?.checked_sub(&f)?;
    for (x, p) in pi.entries() {
        if let Some(v) = p.valuation() {
            if v < 2 {
                return Err(Error::Internal(format!("kernel has a z^{v} term at {x}")));
            }
        }
    }
    if !pi.satisfies_support_constraint() {
        return Err(Error::Internal("kernel violates the walk support constraint".into()));
    }
    Ok(PiSeries { pi, f })
}

/// Convenience: `G -> (Pi, F)`.
pub fn kernel_from_g(g: &SpatialSeries) -> Result<PiSeries> {
    pi_from_f(&invert_to_f(g)?)
}

/// Outcome of an order-by-order check of
/// `G = delta + z Omega D * G + Pi * G`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RecursionReport {
    pub dim: usize,
    pub max_order_verified: usize,
    /// Orbit entries `(n, x)` at which either side is nonzero.
    pub entries_compared: usize,
    pub pi_is_zero: bool,
}

/// Checks the lace-expansion identity exactly. The first mismatch, in
/// order-major then lexicographic order, is reported as a
/// verification error.
pub fn verify_recursion(g: &SpatialSeries, pi: &PiSeries) -> Result<RecursionReport> {
    let g = require_orbit(g, "G")?;
    let pis = &pi.pi;
    if g.dim() != pis.dim() || g.order() != pis.order() {
        return Err(Error::Mismatch(format!(
            "G has (d, N) = ({}, {}) but Pi has ({}, {})",
            g.dim(),
            g.order(),
            pis.dim(),
            pis.order()
        )));
    }
    let delta = SpatialSeries::delta(g.dim(), g.order())?;
    let step = SpatialSeries::fugacity_step(g.dim(), g.order())?;
    let rhs = delta.checked_add(&step.convolve(&g)?)?.checked_add(&pis.convolve(&g)?)?;
    let mut points: Vec<&LatticePoint> = g.entries().map(|(x, _)| x).chain(rhs.entries().map(|(x, _)| x)).collect();
    points.sort();
    points.dedup();
    let mut compared = 0;
    for n in 0..=g.order() {
        for x in &points {
            let lhs = g.coefficient(n, x);
            let r = rhs.coefficient(n, x);
            if lhs != r {
                return Err(Error::Verification { order: n, point: (*x).clone(), lhs: lhs.to_string(), rhs: r.to_string() });
            }
            if !lhs.is_zero() {
                compared += 1;
            }
        }
    }
    Ok(RecursionReport { dim: g.dim(), max_order_verified: g.order(), entries_compared: compared, pi_is_zero: pi.is_zero() })
}

/// Fitted constant in `|Pi_z(x)| <= K beta / (1 + |x|^{3(d-2)})`.
#[derive(Clone, Debug, PartialEq)]
pub struct PiDecayReport {
    pub z: f64,
    pub exponent: u32,
    /// Smallest `K beta`, i.e. `max_x |Pi_z(x)| (1 + |x|^{3(d-2)})`.
    pub k_beta: f64,
    /// `K` itself; `None` when `beta = 0`.
    pub k_fit: Option<f64>,
    pub argmax: LatticePoint,
    /// The same fit on the series truncated one order lower.
    pub k_beta_previous_order: f64,
    /// Relative change of `K` between the last two orders.
    pub relative_change: f64,
    /// Set when `K` grows by more than 20% with the last order.
    pub truncation_warning: bool,
}

fn fit_k(pi: &SpatialSeries, z: f64, exponent: u32) -> (f64, LatticePoint) {
    let mut best = 0.0;
    let mut arg = LatticePoint::origin(pi.dim());
    for (x, p) in pi.entries() {
        let value = p.eval_f64(z).abs();
        let weight = 1.0 + (x.norm_sq() as f64).powf(f64::from(exponent) / 2.0);
        if value * weight > best {
            best = value * weight;
            arg = x.clone();
        }
    }
    (best, arg)
}

pub fn pi_decay_audit(pi: &PiSeries, beta: &BigRational, z: f64) -> Result<PiDecayReport> {
    if !(z.is_finite() && z >= 0.0) {
        return Err(Error::InvalidArgument(format!("fugacity {z} must be finite and non-negative")));
    }
    let d = pi.pi.dim() as i64;
    let exponent = (3 * (d - 2)).max(0) as u32;
    let (k_beta, argmax) = fit_k(&pi.pi, z, exponent);
    let previous = pi.pi.with_order(pi.pi.order().saturating_sub(1));
    let (k_prev, _) = fit_k(&previous, z, exponent);
    let b = rational_to_f64(beta);
    let k_fit = (b > 0.0).then(|| k_beta / b);
    let relative_change = if k_prev > 0.0 { (k_beta - k_prev) / k_prev } else if k_beta > 0.0 { f64::INFINITY } else { 0.0 };
    Ok(PiDecayReport {
        z,
        exponent,
        k_beta,
        k_fit,
        argmax,
        k_beta_previous_order: k_prev,
        relative_change,
        truncation_warning: relative_change > 0.2,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{rational, rational_from_int};
    use crate::walks::{enumerate_g, EnumerationOptions, WalkWeightParams};

    fn g_series(dim: usize, beta: BigRational, n: usize) -> SpatialSeries {
        let params = WalkWeightParams::new(dim, beta, n).unwrap();
        enumerate_g(&params, &EnumerationOptions::default()).unwrap().series
    }

    #[test]
    fn free_kernel_vanishes() {
        let g = g_series(3, BigRational::zero(), 6);
        let k = kernel_from_g(&g).unwrap();
        assert!(k.is_zero());
        let expected = SpatialSeries::delta(3, 6).unwrap().checked_sub(&SpatialSeries::fugacity_step(3, 6).unwrap()).unwrap();
        assert_eq!(k.f, expected);
        let report = verify_recursion(&g, &k).unwrap();
        assert!(report.pi_is_zero);
        assert_eq!(report.max_order_verified, 6);
    }

    #[test]
    fn second_order_kernel() {
        for dim in [1, 2, 5] {
            for beta in [rational(1, 10), rational(1, 2)] {
                let g = g_series(dim, beta.clone(), 3);
                let k = kernel_from_g(&g).unwrap();
                let two_d = rational_from_int(2 * dim as i64);
                assert_eq!(k.pi.origin_coefficient(2), -two_d * &beta);
                let order_two: Vec<_> = k.pi.order_slice(2);
                assert_eq!(order_two.len(), 1);
                assert!(k.pi.order_slice(0).is_empty() && k.pi.order_slice(1).is_empty());
            }
        }
    }

    #[test]
    fn third_order_kernel_in_one_dimension() {
        // beta = 1/2, d = 1. Three-step walks to +1: RRL (pair (1,3)) weighs
        // 1/2, RLR (pairs (0,2), (1,3)) 1/4, LRR (pair (0,2)) 1/2.
        let g = g_series(1, rational(1, 2), 3);
        let x1 = LatticePoint::new(&[1]).unwrap();
        assert_eq!(g.coefficient(3, &x1), rational(5, 4));
        // g_3 = (zOmega D * g)_3 + (Pi * g)_3 with pi_2 = -beta Omega delta:
        // at x = 1: 5/4 = (g_2(0) + g_2(2)) + pi_2(0) g_1(1) + pi_3(1) = 2 - 1 + pi_3(1)
        let k = kernel_from_g(&g).unwrap();
        assert_eq!(k.pi.coefficient(3, &x1), rational(1, 4));
        assert_eq!(k.pi.coefficient(3, &LatticePoint::new(&[3]).unwrap()), BigRational::zero());
        verify_recursion(&g, &k).unwrap();
    }

    #[test]
    fn interacting_identity_holds() {
        let g = g_series(2, rational(1, 2), 8);
        let k = kernel_from_g(&g).unwrap();
        let report = verify_recursion(&g, &k).unwrap();
        assert!(!report.pi_is_zero);
        assert!(report.entries_compared > 0);
    }

    #[test]
    fn corrupted_series_is_caught() {
        let g = g_series(2, rational(1, 4), 6);
        let k = kernel_from_g(&g).unwrap();
        let mut bad = g.clone();
        let x = LatticePoint::new(&[2, 1]).unwrap();
        let mut p = bad.get(&x).unwrap().clone();
        let c = p.coeff(5).clone();
        p.set_coeff(5, c + rational(1, 7));
        bad.insert(&x, p).unwrap();
        match verify_recursion(&bad, &k) {
            Err(Error::Verification { order, point, .. }) => {
                assert_eq!(order, 5);
                assert_eq!(point, x);
            }
            other => panic!("expected verification failure, got {other:?}"),
        }
    }

    #[test]
    fn non_invertible_input() {
        let s = SpatialSeries::fugacity_step(2, 3).unwrap();
        assert!(matches!(invert_to_f(&s), Err(Error::Precondition(_))));
    }

    #[test]
    fn decay_audit_free_and_interacting() {
        let g = g_series(3, BigRational::zero(), 4);
        let k = kernel_from_g(&g).unwrap();
        let r = pi_decay_audit(&k, &BigRational::zero(), 0.1).unwrap();
        assert_eq!(r.k_beta, 0.0);
        assert_eq!(r.k_fit, None);
        assert_eq!(r.exponent, 3);

        let g = g_series(5, rational(1, 10), 4);
        let k = kernel_from_g(&g).unwrap();
        let r = pi_decay_audit(&k, &rational(1, 10), 0.1).unwrap();
        assert_eq!(r.exponent, 9);
        assert!(r.k_fit.unwrap().is_finite() && r.k_fit.unwrap() > 0.0);
    }
}
