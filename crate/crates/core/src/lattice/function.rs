use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;

use super::point::LatticePoint;
use super::poly::rational_to_f64;
use crate::error::{Error, Result};

/// A finitely supported, lattice-symmetric function `Z^d -> Q`, stored one
/// value per orbit representative.
#[derive(Clone, Debug, PartialEq)]
pub struct LatticeFunction {
    dim: usize,
    entries: BTreeMap<LatticePoint, BigRational>,
}

impl LatticeFunction {
    pub fn new(dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidArgument("dimension must be at least 1".into()));
        }
        Ok(LatticeFunction { dim, entries: BTreeMap::new() })
    }

    pub fn delta(dim: usize) -> Result<Self> {
        let mut f = Self::new(dim)?;
        f.insert(&LatticePoint::origin(dim), BigRational::from_integer(1.into()));
        Ok(f)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.entries.is_empty()
    }

    /// Sets the value on the whole orbit of `x`.
    pub fn insert(&mut self, x: &LatticePoint, value: BigRational) {
        let key = x.orbit_representative();
        if value.is_zero() {
            self.entries.remove(&key);
        } else {
            self.entries.insert(key, value);
        }
    }

    pub fn get(&self, x: &LatticePoint) -> BigRational {
        self.entries.get(&x.orbit_representative()).cloned().unwrap_or_else(BigRational::zero)
    }

    pub fn entries(&self) -> impl Iterator<Item = (&LatticePoint, &BigRational)> {
        self.entries.iter()
    }

    pub fn l1_radius(&self) -> u32 {
        self.entries.keys().map(LatticePoint::l1_norm).max().unwrap_or(0)
    }

    /// `sum_x |x|^p f(x)` for even `p`.
    pub fn moment(&self, p: u32) -> Result<BigRational> {
        if p % 2 == 1 {
            return Err(Error::InvalidArgument(format!("odd moment p = {p} requested")));
        }
        Ok(self
            .entries
            .iter()
            .map(|(x, v)| {
                let w = BigInt::from(x.norm_sq()).pow(p / 2) * BigInt::from(x.orbit_size());
                v * BigRational::from_integer(w)
            })
            .sum())
    }

    /// `f-hat(0) = sum_x f(x)`.
    pub fn sum(&self) -> BigRational {
        self.moment(0).expect("zeroth moment is defined")
    }

    pub fn scale(&self, c: &BigRational) -> Self {
        let mut out = Self { dim: self.dim, entries: BTreeMap::new() };
        for (k, v) in &self.entries {
            out.insert(k, v * c);
        }
        out
    }

    fn combine(&self, other: &Self, sign: i32) -> Result<Self> {
        if self.dim != other.dim {
            return Err(Error::Mismatch(format!("dimensions {} and {} differ", self.dim, other.dim)));
        }
        let mut out = self.clone();
        for (k, v) in &other.entries {
            let cur = out.get(k);
            out.insert(k, if sign > 0 { cur + v } else { cur - v });
        }
        Ok(out)
    }

    pub fn checked_add(&self, other: &Self) -> Result<Self> {
        self.combine(other, 1)
    }

    pub fn checked_sub(&self, other: &Self) -> Result<Self> {
        self.combine(other, -1)
    }

    /// `(representative, orbit_size, value)` in floating point.
    pub fn to_f64_terms(&self) -> Vec<(LatticePoint, u64, f64)> {
        self.entries.iter().map(|(x, v)| (x.clone(), x.orbit_size(), rational_to_f64(v))).collect()
    }

    pub fn max_abs_f64(&self) -> f64 {
        self.entries.values().map(|v| rational_to_f64(v).abs()).fold(0.0, f64::max)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::poly::{rational, rational_from_int};

    #[test]
    fn orbit_keyed_values() {
        let mut f = LatticeFunction::new(3).unwrap();
        f.insert(&LatticePoint::new(&[0, -1, 0]).unwrap(), rational(1, 6));
        assert_eq!(f.get(&LatticePoint::unit(3, 2, 1)), rational(1, 6));
        assert_eq!(f.len(), 1);
        assert_eq!(f.sum(), rational_from_int(1));
        assert_eq!(f.moment(2).unwrap(), rational_from_int(1));
        assert!(f.moment(3).is_err());
        f.insert(&LatticePoint::unit(3, 0, 1), rational(0, 1));
        assert!(f.is_zero());
    }

    #[test]
    fn arithmetic() {
        let a = LatticeFunction::delta(2).unwrap();
        let b = a.scale(&rational(3, 2));
        let c = b.checked_sub(&a).unwrap();
        assert_eq!(c.get(&LatticePoint::origin(2)), rational(1, 2));
        assert!(c.checked_sub(&c).unwrap().is_zero());
        assert!(a.checked_add(&LatticeFunction::delta(3).unwrap()).is_err());
    }
}
