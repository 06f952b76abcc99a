use num_rational::BigRational;
use num_traits::Zero;

use crate::error::{Error, Result};
use crate::fit::{linear_fit, LinearFit};
use crate::lattice::{rational, rational_to_f64, ZPolynomial};

/// Ratio-method estimate of the radius of convergence of `chi`.
#[derive(Clone, Debug, PartialEq)]
pub struct ZcEstimate {
    pub order: usize,
    pub estimate: f64,
    /// Spread (max - min) of the last three two-step ratios.
    pub error_bar: f64,
    /// Spread of the last three accelerated ratios; carries the even-odd
    /// oscillation of the raw ratios.
    pub accelerated_spread: f64,
    /// `chi_{n-1} / chi_n` for `n = 1..=N`.
    pub ratios: Vec<f64>,
    /// Aitken delta-squared transform of the ratios.
    pub accelerated: Vec<f64>,
    /// `sqrt(chi_{n-2} / chi_n)` for `n = 2..=N`.
    pub two_step_ratios: Vec<f64>,
}

fn spread_of_last_three(v: &[f64]) -> f64 {
    let tail = &v[v.len().saturating_sub(3)..];
    let max = tail.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let min = tail.iter().copied().fold(f64::INFINITY, f64::min);
    max - min
}

/// `z_c` from `r_n = chi_{n-1} / chi_n` with Aitken acceleration, in exact
/// arithmetic up to the final conversion. On `Z^d` the ratios come in
/// near-equal pairs, so the error bar is taken from the parity-smoothed
/// ratios `sqrt(chi_{n-2} / chi_n)`.
pub fn zc_estimate(chi: &ZPolynomial, dim: usize) -> Result<ZcEstimate> {
    let nonzero = chi.coeffs().iter().take_while(|c| !c.is_zero()).count();
    if nonzero < 6 {
        return Err(Error::InvalidArgument(format!(
            "ratio method needs at least 6 consecutive nonzero coefficients, got {nonzero}"
        )));
    }
    let c = &chi.coeffs()[..nonzero];
    let ratios: Vec<BigRational> = c.windows(2).map(|w| &w[0] / &w[1]).collect();
    let accelerated: Vec<BigRational> = ratios
        .windows(3)
        .map(|w| {
            let second = &w[2] - &w[1] * BigRational::from_integer(2.into()) + &w[0];
            if second.is_zero() {
                w[2].clone()
            } else {
                let first = &w[1] - &w[0];
                &w[0] - &first * &first / second
            }
        })
        .collect();
    let accelerated: Vec<f64> = accelerated.iter().map(rational_to_f64).collect();
    let two_step: Vec<f64> = c.windows(3).map(|w| rational_to_f64(&(&w[0] / &w[2])).sqrt()).collect();
    let estimate = *accelerated.last().expect("at least four accelerated values");
    let lower = 1.0 / (2 * dim) as f64;
    if estimate < lower - 1e-3 {
        return Err(Error::Numeric {
            message: format!("estimate {estimate} falls below 1/Omega = {lower}"),
            achieved: (lower - estimate).abs(),
        });
    }
    Ok(ZcEstimate {
        order: nonzero - 1,
        estimate,
        error_bar: spread_of_last_three(&two_step),
        accelerated_spread: spread_of_last_three(&accelerated),
        ratios: ratios.iter().map(rational_to_f64).collect(),
        accelerated,
        two_step_ratios: two_step,
    })
}

/// Largest multiple of `10^-6` not exceeding `x`, so a rounded fraction of
/// `z_c-hat` never leaves the evaluable range.
pub fn round_fugacity(x: f64) -> Result<BigRational> {
    if !(x.is_finite() && x > 0.0) {
        return Err(Error::InvalidArgument(format!("fugacity {x} must be positive and finite")));
    }
    let n = (x * 1e6).floor() as i64;
    if n == 0 {
        return Err(Error::InvalidArgument(format!("fugacity {x} is below the 1e-6 resolution")));
    }
    Ok(rational(n, 1_000_000))
}

/// Least-squares slope of `ln |v|` against `ln r`.
pub fn decay_fit(samples: &[(f64, f64)]) -> Result<LinearFit> {
    let usable: Vec<&(f64, f64)> = samples.iter().filter(|(r, v)| *r > 0.0 && *v != 0.0 && v.is_finite()).collect();
    if usable.len() < 4 {
        return Err(Error::InvalidArgument(format!("decay fit needs 4 radii with nonzero values, got {}", usable.len())));
    }
    let xs: Vec<f64> = usable.iter().map(|(r, _)| r.ln()).collect();
    let ys: Vec<f64> = usable.iter().map(|(_, v)| v.abs().ln()).collect();
    linear_fit(&xs, &ys)
}
