//! The near-critical decomposition `G = lambda C_mu + C_mu * E * G`, the
//! bootstrap function and the critical-point estimate.

mod estimate;
mod two_point;

pub use estimate::{decay_fit, round_fugacity, zc_estimate, ZcEstimate};
pub use two_point::{
    bootstrap_b, BootstrapReport, BootstrapSample, TwoPointOptions, TwoPointRow, TwoPointSolver, TwoPointTable,
};

use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::lace::PiSeries;
use crate::lattice::{rational_from_int, LatticeFunction, LatticePoint};

/// Thresholds of the bootstrap argument: `b <= 2` is the improved bound,
/// `b <= 3` the assumed one.
pub const BOOTSTRAP_IMPROVED: f64 = 2.0;
pub const BOOTSTRAP_ASSUMED: f64 = 3.0;

/// Numerical evaluation of truncated series is restricted to
/// `z <= EVALUABLE_FRACTION * z_c-hat`.
pub const EVALUABLE_FRACTION: f64 = 0.95;

/// `lambda_z`, `mu_z` and the error kernel `E_z` at a rational fugacity.
#[derive(Clone, Debug, PartialEq)]
pub struct Decomposition {
    pub dim: usize,
    pub order: usize,
    pub z: BigRational,
    pub lambda: BigRational,
    pub mu: BigRational,
    /// `Pi_z` collapsed at `z`.
    pub pi: LatticeFunction,
    /// `F_z = delta - z Omega D - Pi_z`.
    pub f: LatticeFunction,
    pub e: LatticeFunction,
    pub pi_hat_zero: BigRational,
    pub pi_second_moment: BigRational,
}

impl Decomposition {
    pub fn omega(&self) -> usize {
        2 * self.dim
    }

    /// `mu_z Omega`.
    pub fn coupling(&self) -> BigRational {
        &self.mu * rational_from_int(self.omega() as i64)
    }

    /// `F-hat_z(0) = 1 - z Omega - Pi-hat_z(0)`.
    pub fn fhat_zero(&self) -> BigRational {
        self.f.sum()
    }

    /// `(E-hat(0), sum |x|^2 E(x))`; both vanish by construction.
    pub fn moment_residuals(&self) -> Result<(BigRational, BigRational)> {
        Ok((self.e.sum(), self.e.moment(2)?))
    }
}

fn step_function(dim: usize, scale: &BigRational) -> LatticeFunction {
    let mut d = LatticeFunction::new(dim).expect("dim >= 1");
    d.insert(&LatticePoint::unit(dim, 0, 1), scale / rational_from_int(2 * dim as i64));
    d
}

fn collapse(pi: &PiSeries, z: &BigRational) -> Result<(LatticeFunction, LatticeFunction)> {
    if z.is_zero() || *z < BigRational::zero() {
        return Err(Error::InvalidArgument(format!("z = {z} must be positive")));
    }
    Ok((pi.pi.evaluate(z)?, pi.f.evaluate(z)?))
}

/// `lambda = 1 / (1 - Pi-hat(0) + sum |x|^2 Pi(x))` and
/// `mu Omega = 1 - lambda F-hat(0)`, exactly.
pub fn lambda_mu(pi: &PiSeries, z: &BigRational) -> Result<(BigRational, BigRational)> {
    let (pi_z, f_z) = collapse(pi, z)?;
    lambda_mu_collapsed(&pi_z, &f_z)
}

fn lambda_mu_collapsed(pi_z: &LatticeFunction, f_z: &LatticeFunction) -> Result<(BigRational, BigRational)> {
    let hat0 = pi_z.sum();
    let m2 = pi_z.moment(2)?;
    let denom = BigRational::one() - &hat0 + &m2;
    if denom.is_zero() {
        return Err(Error::Degenerate(format!(
            "1 - Pi-hat(0) + sum |x|^2 Pi = 0 with Pi-hat(0) = {hat0}, sum |x|^2 Pi = {m2}"
        )));
    }
    let lambda = denom.recip();
    let omega = rational_from_int(2 * pi_z.dim() as i64);
    let mu = (BigRational::one() - &lambda * f_z.sum()) / omega;
    Ok((lambda, mu))
}

/// `E = (1 - lambda)(delta - D) - lambda Pi-hat(0) D + lambda Pi_z`,
/// cross-checked against `E = delta - mu Omega D - lambda F_z`.
pub fn build_e(pi: &PiSeries, lambda: &BigRational, mu: &BigRational, z: &BigRational) -> Result<LatticeFunction> {
    let (pi_z, f_z) = collapse(pi, z)?;
    let e = build_e_collapsed(&pi_z, lambda)?;
    let dim = pi_z.dim();
    let coupling = mu * rational_from_int(2 * dim as i64);
    let alt = LatticeFunction::delta(dim)?.checked_sub(&step_function(dim, &coupling))?.checked_sub(&f_z.scale(lambda))?;
    if alt != e {
        return Err(Error::Internal("lambda and mu do not belong to this kernel at this z".into()));
    }
    check_moments(&e)?;
    Ok(e)
}

fn build_e_collapsed(pi_z: &LatticeFunction, lambda: &BigRational) -> Result<LatticeFunction> {
    let dim = pi_z.dim();
    let one = BigRational::one();
    let a = LatticeFunction::delta(dim)?.checked_sub(&step_function(dim, &one))?.scale(&(&one - lambda));
    let b = step_function(dim, &(lambda * pi_z.sum()));
    a.checked_sub(&b)?.checked_add(&pi_z.scale(lambda))
}

fn check_moments(e: &LatticeFunction) -> Result<()> {
    let zero = e.sum();
    let second = e.moment(2)?;
    if !zero.is_zero() || !second.is_zero() {
        return Err(Error::Internal(format!("E has moments E-hat(0) = {zero}, sum |x|^2 E = {second}")));
    }
    Ok(())
}

/// Collapses `Pi` at `z` and builds the full decomposition.
pub fn decompose(pi: &PiSeries, z: &BigRational) -> Result<Decomposition> {
    let (pi_z, f_z) = collapse(pi, z)?;
    let (lambda, mu) = lambda_mu_collapsed(&pi_z, &f_z)?;
    let e = build_e_collapsed(&pi_z, &lambda)?;
    check_moments(&e)?;
    let dim = pi.pi.dim();
    let coupling = &mu * rational_from_int(2 * dim as i64);
    if coupling < BigRational::zero() || coupling > BigRational::one() {
        return Err(Error::Precondition(format!("mu Omega = {coupling} lies outside [0, 1]")));
    }
    Ok(Decomposition {
        dim,
        order: pi.pi.order(),
        z: z.clone(),
        pi_hat_zero: pi_z.sum(),
        pi_second_moment: pi_z.moment(2)?,
        lambda,
        mu,
        pi: pi_z,
        f: f_z,
        e,
    })
}

/// Rejects fugacities beyond the range where truncated series are trusted.
/// A kernel that vanishes identically closes the series exactly, so then
/// every `z <= 1/Omega` is admitted.
pub fn check_evaluable(pi: &PiSeries, z: &BigRational, zc_hat: f64) -> Result<()> {
    let zf = crate::lattice::rational_to_f64(z);
    let dim = pi.pi.dim();
    if pi.is_zero() {
        let limit = BigRational::new(1.into(), (2 * dim as i64).into());
        if *z > limit {
            return Err(Error::Precondition(format!("z = {z} exceeds 1/Omega")));
        }
        return Ok(());
    }
    let limit = EVALUABLE_FRACTION * zc_hat;
    if zf > limit * (1.0 + 1e-12) {
        return Err(Error::Precondition(format!(
            "z = {zf} exceeds {EVALUABLE_FRACTION} z_c-hat = {limit}; truncated series are not evaluated there"
        )));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lace::kernel_from_g;
    use crate::lattice::rational;
    use crate::walks::{enumerate_g, EnumerationOptions, WalkWeightParams};

    fn kernel(dim: usize, beta: BigRational, order: usize) -> PiSeries {
        let params = WalkWeightParams::new(dim, beta, order).unwrap();
        let g = enumerate_g(&params, &EnumerationOptions::default()).unwrap();
        kernel_from_g(&g.series).unwrap()
    }

    #[test]
    fn free_case_is_trivial() {
        let pi = kernel(3, rational(0, 1), 6);
        let z = rational(1, 7);
        let (l, m) = lambda_mu(&pi, &z).unwrap();
        assert!(l.is_one());
        assert_eq!(m, z);
        assert!(build_e(&pi, &l, &m, &z).unwrap().is_zero());
        assert!(matches!(build_e(&pi, &l, &rational(1, 8), &z), Err(Error::Internal(_))));
    }

    #[test]
    fn moments_vanish_and_e_matches_alternate_form() {
        let pi = kernel(2, rational(1, 3), 6);
        let z = rational(1, 5);
        let dec = decompose(&pi, &z).unwrap();
        let (a, b) = dec.moment_residuals().unwrap();
        assert!(a.is_zero() && b.is_zero());
        // E = (delta - mu Omega D) - lambda F
        let coupling = dec.coupling();
        let alt = LatticeFunction::delta(2)
            .unwrap()
            .checked_sub(&step_function(2, &coupling))
            .unwrap()
            .checked_sub(&dec.f.scale(&dec.lambda))
            .unwrap();
        assert_eq!(alt, dec.e);
        assert!(!dec.e.is_zero());
    }

    #[test]
    fn degenerate_denominator_is_reported() {
        // Pi = delta collapses the denominator 1 - Pi-hat(0) + 0
        let mut pi_z = LatticeFunction::new(2).unwrap();
        pi_z.insert(&LatticePoint::origin(2), BigRational::one());
        let f = LatticeFunction::new(2).unwrap();
        assert!(matches!(lambda_mu_collapsed(&pi_z, &f), Err(Error::Degenerate(_))));
    }

    #[test]
    fn evaluable_range() {
        let free = kernel(2, rational(0, 1), 4);
        assert!(check_evaluable(&free, &rational(1, 4), 0.25).is_ok());
        assert!(check_evaluable(&free, &rational(26, 100), 0.25).is_err());
        let pi = kernel(2, rational(1, 2), 4);
        assert!(check_evaluable(&pi, &rational(1, 4), 0.3).is_ok());
        assert!(check_evaluable(&pi, &rational(29, 100), 0.3).is_err());
    }
}
