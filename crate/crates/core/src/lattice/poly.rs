use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// Polynomial in the fugacity `z` with exact rational coefficients, carried
/// to a fixed truncation order. Products discard every power above it.
#[derive(Clone, PartialEq, Eq)]
pub struct ZPolynomial {
    coeffs: Vec<BigRational>,
    order: usize,
}

impl ZPolynomial {
    pub fn zero(order: usize) -> Self {
        ZPolynomial { coeffs: vec![BigRational::zero(); order + 1], order }
    }

    pub fn constant(c: BigRational, order: usize) -> Self {
        Self::monomial(c, 0, order)
    }

    /// `c z^power`; vanishes when `power > order`.
    pub fn monomial(c: BigRational, power: usize, order: usize) -> Self {
        let mut p = Self::zero(order);
        if power <= order {
            p.coeffs[power] = c;
        }
        p
    }

    /// Builds from explicit coefficients. More than `order + 1` coefficients
    /// is an argument error.
    pub fn from_coefficients(coeffs: Vec<BigRational>, order: usize) -> Result<Self> {
        if coeffs.len() > order + 1 {
            return Err(Error::InvalidArgument(format!(
                "{} coefficients exceed truncation order {order}",
                coeffs.len()
            )));
        }
        let mut p = Self::zero(order);
        for (i, c) in coeffs.into_iter().enumerate() {
            p.coeffs[i] = c;
        }
        Ok(p)
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn coeff(&self, n: usize) -> &BigRational {
        &self.coeffs[n]
    }

    pub fn coeffs(&self) -> &[BigRational] {
        &self.coeffs
    }

    pub fn set_coeff(&mut self, n: usize, c: BigRational) {
        self.coeffs[n] = c;
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(Zero::is_zero)
    }

    /// Lowest power with a nonzero coefficient.
    pub fn valuation(&self) -> Option<usize> {
        self.coeffs.iter().position(|c| !c.is_zero())
    }

    pub fn degree(&self) -> Option<usize> {
        self.coeffs.iter().rposition(|c| !c.is_zero())
    }

    /// Re-truncates (or zero-pads) to a different order.
    pub fn with_order(&self, order: usize) -> Self {
        let mut p = Self::zero(order);
        for (i, c) in self.coeffs.iter().enumerate().take(order + 1) {
            p.coeffs[i] = c.clone();
        }
        p
    }

    fn check(&self, other: &Self) -> Result<()> {
        if self.order != other.order {
            return Err(Error::Mismatch(format!(
                "truncation orders {} and {} differ",
                self.order, other.order
            )));
        }
        Ok(())
    }

    pub fn checked_add(&self, other: &Self) -> Result<Self> {
        self.check(other)?;
        let mut out = self.clone();
        for (a, b) in out.coeffs.iter_mut().zip(&other.coeffs) {
            *a += b;
        }
        Ok(out)
    }

    pub fn checked_sub(&self, other: &Self) -> Result<Self> {
        self.check(other)?;
        let mut out = self.clone();
        for (a, b) in out.coeffs.iter_mut().zip(&other.coeffs) {
            *a -= b;
        }
        Ok(out)
    }

    pub fn checked_mul(&self, other: &Self) -> Result<Self> {
        self.check(other)?;
        let mut out = Self::zero(self.order);
        out.add_product(self, other);
        Ok(out)
    }

    /// `self += a * b`, truncated at `self.order`. Order agreement is the
    /// caller's responsibility.
    pub(crate) fn add_product(&mut self, a: &Self, b: &Self) {
        let a_terms: Vec<(usize, &BigRational)> = a.terms().collect();
        if a_terms.is_empty() {
            return;
        }
        for (j, bj) in b.terms() {
            for &(i, ai) in &a_terms {
                let n = i + j;
                if n > self.order {
                    break;
                }
                self.coeffs[n] += ai * bj;
            }
        }
    }

    pub fn scale(&self, c: &BigRational) -> Self {
        ZPolynomial { coeffs: self.coeffs.iter().map(|a| a * c).collect(), order: self.order }
    }

    pub fn neg(&self) -> Self {
        ZPolynomial { coeffs: self.coeffs.iter().map(|a| -a).collect(), order: self.order }
    }

    /// Multiplies by `z^shift`, discarding overflow past the order.
    pub fn shift(&self, shift: usize) -> Self {
        let mut out = Self::zero(self.order);
        for (i, c) in self.terms() {
            if i + shift <= self.order {
                out.coeffs[i + shift] = c.clone();
            }
        }
        out
    }

    /// Nonzero `(power, coefficient)` pairs in increasing power.
    pub fn terms(&self) -> impl Iterator<Item = (usize, &BigRational)> {
        self.coeffs.iter().enumerate().filter(|(_, c)| !c.is_zero())
    }

    /// Exact evaluation at a rational fugacity (Horner).
    pub fn eval(&self, z: &BigRational) -> BigRational {
        let mut acc = BigRational::zero();
        for c in self.coeffs.iter().rev() {
            acc = acc * z + c;
        }
        acc
    }

    pub fn eval_f64(&self, z: f64) -> f64 {
        let mut acc = 0.0;
        for c in self.coeffs.iter().rev() {
            acc = acc * z + rational_to_f64(c);
        }
        acc
    }
}

impl fmt::Debug for ZPolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for ZPolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (n, c) in self.terms() {
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            write!(f, "({c}) z^{n}")?;
        }
        if first {
            write!(f, "0")?;
        }
        write!(f, " + O(z^{})", self.order + 1)
    }
}

pub fn rational_to_f64(r: &BigRational) -> f64 {
    r.to_f64().unwrap_or_else(|| {
        // to_f64 only fails on overflow of both parts; fall back to scaling
        let n = r.numer().to_f64().unwrap_or(f64::INFINITY);
        let d = r.denom().to_f64().unwrap_or(f64::INFINITY);
        n / d
    })
}

pub fn rational_from_int(n: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

pub fn rational(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

/// Parses `"p/q"`, `"p"` or a finite decimal such as `"0.125"` exactly.
pub fn parse_rational(s: &str) -> Result<BigRational> {
    let s = s.trim();
    let bad = || Error::InvalidArgument(format!("cannot parse rational from {s:?}"));
    if let Some((p, q)) = s.split_once('/') {
        let p: BigInt = p.trim().parse().map_err(|_| bad())?;
        let q: BigInt = q.trim().parse().map_err(|_| bad())?;
        if q.is_zero() {
            return Err(Error::InvalidArgument(format!("zero denominator in {s:?}")));
        }
        return Ok(BigRational::new(p, q));
    }
    if let Some((int_part, frac)) = s.split_once('.') {
        if frac.is_empty() || !frac.chars().all(|c| c.is_ascii_digit()) {
            return Err(bad());
        }
        let neg = int_part.starts_with('-');
        let int_digits = int_part.trim_start_matches(['-', '+']);
        let int_digits = if int_digits.is_empty() { "0" } else { int_digits };
        let whole: BigInt = format!("{int_digits}{frac}").parse().map_err(|_| bad())?;
        let scale = num_traits::pow(BigInt::from(10), frac.len());
        let r = BigRational::new(whole, scale);
        return Ok(if neg { -r } else { r });
    }
    let p: BigInt = s.parse().map_err(|_| bad())?;
    Ok(BigRational::from_integer(p))
}

/// Rounds `x` to the nearest multiple of `1/denominator`.
pub fn rationalize(x: f64, denominator: i64) -> BigRational {
    let n = (x * denominator as f64).round() as i64;
    rational(n, denominator)
}

pub fn one() -> BigRational {
    BigRational::one()
}
