use std::collections::{BTreeMap, BTreeSet};

use num_rational::BigRational;
use num_traits::{One, Zero};
use rayon::prelude::*;
use rustc_hash::FxHashMap;

use super::function::LatticeFunction;
use super::point::{representatives_in_l1_ball, LatticePoint};
use super::poly::{rational, rational_from_int, ZPolynomial};
use crate::error::{Error, Result};

/// How the entries of a [`SpatialSeries`] are keyed.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Storage {
    /// One entry per hyperoctahedral orbit, keyed by its representative;
    /// every point of the orbit carries the stored value.
    Orbit,
    /// One entry per lattice point (no symmetry assumed).
    Full,
}

impl Storage {
    pub fn as_str(self) -> &'static str {
        match self {
            Storage::Orbit => "orbit",
            Storage::Full => "full",
        }
    }
}

/// A finitely supported map `x -> ZPolynomial`: the exact truncated
/// representation of a `z`-dependent lattice function.
#[derive(Clone, Debug, PartialEq)]
pub struct SpatialSeries {
    dim: usize,
    order: usize,
    storage: Storage,
    entries: BTreeMap<LatticePoint, ZPolynomial>,
}

impl SpatialSeries {
    pub fn new(dim: usize, order: usize, storage: Storage) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidArgument("dimension must be at least 1".into()));
        }
        Ok(SpatialSeries { dim, order, storage, entries: BTreeMap::new() })
    }

    /// Kronecker delta at the origin.
    pub fn delta(dim: usize, order: usize) -> Result<Self> {
        let mut s = Self::new(dim, order, Storage::Orbit)?;
        s.insert(&LatticePoint::origin(dim), ZPolynomial::constant(BigRational::one(), order))?;
        Ok(s)
    }

    /// The nearest-neighbour step distribution `D`, as a constant series of
    /// truncation order 0. Use [`SpatialSeries::with_order`] to combine it
    /// with higher-order series.
    pub fn step_distribution(dim: usize) -> Result<Self> {
        let mut s = Self::new(dim, 0, Storage::Orbit)?;
        let weight = rational(1, 2 * dim as i64);
        s.insert(&LatticePoint::unit(dim, 0, 1), ZPolynomial::constant(weight, 0))?;
        Ok(s)
    }

    /// `z * Omega * D`: weight `z` on every unit vector.
    pub fn fugacity_step(dim: usize, order: usize) -> Result<Self> {
        let mut s = Self::new(dim, order, Storage::Orbit)?;
        if order >= 1 {
            s.insert(&LatticePoint::unit(dim, 0, 1), ZPolynomial::monomial(BigRational::one(), 1, order))?;
        }
        Ok(s)
    }

    /// Degree of the nearest-neighbour graph, `2d`.
    pub fn omega(&self) -> usize {
        2 * self.dim
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn storage(&self) -> Storage {
        self.storage
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Stored entries: orbit representatives for [`Storage::Orbit`].
    pub fn entries(&self) -> impl Iterator<Item = (&LatticePoint, &ZPolynomial)> {
        self.entries.iter()
    }

    fn key(&self, x: &LatticePoint) -> LatticePoint {
        match self.storage {
            Storage::Orbit => x.orbit_representative(),
            Storage::Full => x.clone(),
        }
    }

    pub fn get(&self, x: &LatticePoint) -> Option<&ZPolynomial> {
        if x.dim() != self.dim {
            return None;
        }
        self.entries.get(&self.key(x))
    }

    /// Coefficient of `z^n` at `x` (zero outside the support).
    pub fn coefficient(&self, n: usize, x: &LatticePoint) -> BigRational {
        match self.get(x) {
            Some(p) if n <= self.order => p.coeff(n).clone(),
            _ => BigRational::zero(),
        }
    }

    /// Sets the value at `x` (and, for orbit storage, at its whole orbit).
    pub fn insert(&mut self, x: &LatticePoint, value: ZPolynomial) -> Result<()> {
        if x.dim() != self.dim {
            return Err(Error::Mismatch(format!("point {x} is not in dimension {}", self.dim)));
        }
        if value.order() != self.order {
            return Err(Error::Mismatch(format!(
                "value of order {} inserted into series of order {}",
                value.order(),
                self.order
            )));
        }
        let key = self.key(x);
        if value.is_zero() {
            self.entries.remove(&key);
        } else {
            self.entries.insert(key, value);
        }
        Ok(())
    }

    /// All lattice points with a nonzero value, with orbits expanded.
    pub fn full_support(&self) -> Vec<(LatticePoint, &ZPolynomial)> {
        let mut out = Vec::new();
        for (k, v) in &self.entries {
            match self.storage {
                Storage::Orbit => out.extend(k.orbit().into_iter().map(|x| (x, v))),
                Storage::Full => out.push((k.clone(), v)),
            }
        }
        out
    }

    pub fn l1_radius(&self) -> u32 {
        self.entries.keys().map(LatticePoint::l1_norm).max().unwrap_or(0)
    }

    /// Coefficient of `z^n` at every point of its support, orbits expanded.
    pub fn order_slice(&self, n: usize) -> Vec<(LatticePoint, BigRational)> {
        let mut out = Vec::new();
        for (x, p) in self.full_support() {
            let c = p.coeff(n);
            if !c.is_zero() {
                out.push((x, c.clone()));
            }
        }
        out
    }

    /// Re-truncates (or zero-pads) every entry to a new order.
    pub fn with_order(&self, order: usize) -> Self {
        let mut out = SpatialSeries { dim: self.dim, order, storage: self.storage, entries: BTreeMap::new() };
        for (k, v) in &self.entries {
            let p = v.with_order(order);
            if !p.is_zero() {
                out.entries.insert(k.clone(), p);
            }
        }
        out
    }

    fn check_compatible(&self, other: &Self) -> Result<()> {
        if self.dim != other.dim {
            return Err(Error::Mismatch(format!("dimensions {} and {} differ", self.dim, other.dim)));
        }
        if self.order != other.order {
            return Err(Error::Mismatch(format!(
                "truncation orders {} and {} differ",
                self.order, other.order
            )));
        }
        Ok(())
    }

    /// Converts to full storage (no-op for full series).
    pub fn to_full(&self) -> Self {
        let mut out = SpatialSeries { dim: self.dim, order: self.order, storage: Storage::Full, entries: BTreeMap::new() };
        for (x, v) in self.full_support() {
            out.entries.insert(x, v.clone());
        }
        out
    }

    /// Converts a full series to orbit storage; fails if it is not symmetric.
    pub fn to_orbit(&self) -> Result<Self> {
        if self.storage == Storage::Orbit {
            return Ok(self.clone());
        }
        if !self.is_symmetric() {
            return Err(Error::Precondition("series is not lattice-symmetric".into()));
        }
        let mut out = SpatialSeries { dim: self.dim, order: self.order, storage: Storage::Orbit, entries: BTreeMap::new() };
        for (x, v) in &self.entries {
            out.entries.insert(x.orbit_representative(), v.clone());
        }
        Ok(out)
    }

    fn combine(&self, other: &Self, sign: i64) -> Result<Self> {
        self.check_compatible(other)?;
        let (a, b) = if self.storage == other.storage {
            (self.clone(), other.clone())
        } else {
            (self.to_full(), other.to_full())
        };
        let mut out = a;
        for (k, v) in b.entries {
            let cur = out.entries.remove(&k).unwrap_or_else(|| ZPolynomial::zero(out.order));
            let next = if sign > 0 { cur.checked_add(&v)? } else { cur.checked_sub(&v)? };
            if !next.is_zero() {
                out.entries.insert(k, next);
            }
        }
        Ok(out)
    }

    pub fn checked_add(&self, other: &Self) -> Result<Self> {
        self.combine(other, 1)
    }

    pub fn checked_sub(&self, other: &Self) -> Result<Self> {
        self.combine(other, -1)
    }

    pub fn scale(&self, c: &BigRational) -> Self {
        let mut out = self.clone();
        out.entries = self
            .entries
            .iter()
            .map(|(k, v)| (k.clone(), v.scale(c)))
            .filter(|(_, v)| !v.is_zero())
            .collect();
        out
    }

    /// Exact truncated convolution
    /// `(f*g)_n(x) = sum_y sum_{m<=n} f_m(y) g_{n-m}(x-y)`.
    ///
    /// Two orbit-stored operands give an orbit-stored result; the work is
    /// spread over output orbits.
    pub fn convolve(&self, other: &Self) -> Result<Self> {
        self.check_compatible(other)?;
        let storage = if self.storage == Storage::Orbit && other.storage == Storage::Orbit {
            Storage::Orbit
        } else {
            Storage::Full
        };
        let f_support = self.full_support();
        let g_radius = other.l1_radius();
        let lookup: FxHashMap<&LatticePoint, &ZPolynomial> = other.entries.iter().collect();
        let candidates: Vec<LatticePoint> = match storage {
            Storage::Orbit => representatives_in_l1_ball(self.dim, self.l1_radius() + g_radius),
            Storage::Full => {
                let g_support = other.full_support();
                let mut set = BTreeSet::new();
                for (y, _) in &f_support {
                    for (w, _) in &g_support {
                        set.insert(y.add(w));
                    }
                }
                set.into_iter().collect()
            }
        };
        let order = self.order;
        let other_storage = other.storage;
        let values: Vec<(LatticePoint, ZPolynomial)> = candidates
            .into_par_iter()
            .filter_map(|x| {
                let mut acc = ZPolynomial::zero(order);
                for (y, fy) in &f_support {
                    let w = x.sub(y);
                    if w.l1_norm() > g_radius {
                        continue;
                    }
                    let key = match other_storage {
                        Storage::Orbit => w.orbit_representative(),
                        Storage::Full => w,
                    };
                    if let Some(gw) = lookup.get(&key) {
                        acc.add_product(fy, gw);
                    }
                }
                (!acc.is_zero()).then_some((x, acc))
            })
            .collect();
        Ok(SpatialSeries { dim: self.dim, order, storage, entries: values.into_iter().collect() })
    }

    /// `sum_x |x|^p f(x)` for even `p`, with `|x|` the Euclidean norm.
    pub fn moment(&self, p: u32) -> Result<ZPolynomial> {
        if p % 2 == 1 {
            return Err(Error::InvalidArgument(format!(
                "odd moment p = {p} requested; odd moments of symmetric series vanish and are not computed"
            )));
        }
        let mut acc = ZPolynomial::zero(self.order);
        for (x, v) in &self.entries {
            let mult: u64 = match self.storage {
                Storage::Orbit => x.orbit_size(),
                Storage::Full => 1,
            };
            let weight = num_bigint::BigInt::from(x.norm_sq()).pow(p / 2) * num_bigint::BigInt::from(mult);
            acc = acc.checked_add(&v.scale(&BigRational::from_integer(weight)))?;
        }
        Ok(acc)
    }

    /// Collapses the series at a rational fugacity.
    pub fn evaluate(&self, z: &BigRational) -> Result<LatticeFunction> {
        let sym = self.to_orbit()?;
        let mut f = LatticeFunction::new(self.dim)?;
        for (x, p) in &sym.entries {
            f.insert(x, p.eval(z));
        }
        Ok(f)
    }

    /// True when every coefficient of `z^n` vanishes at `||x||_1 > n`.
    pub fn satisfies_support_constraint(&self) -> bool {
        self.entries.iter().all(|(x, p)| p.terms().all(|(n, _)| x.l1_norm() as usize <= n))
    }

    /// True when the coefficient of `z^n` at `x` vanishes unless
    /// `||x||_1 = n (mod 2)`, as for any bipartite walk series.
    pub fn has_walk_parity(&self) -> bool {
        self.entries.iter().all(|(x, p)| p.terms().all(|(n, _)| (x.l1_norm() as usize + n).is_multiple_of(2)))
    }

    /// `f(x) = f(sigma x)` for every hyperoctahedral `sigma`.
    pub fn is_symmetric(&self) -> bool {
        match self.storage {
            Storage::Orbit => true,
            Storage::Full => self.entries.iter().all(|(x, v)| {
                x.orbit().iter().all(|y| self.entries.get(y) == Some(v))
            }),
        }
    }

    /// Value of `sum_x f_n(x)` for each order: the coefficients of `f-hat(0)`.
    pub fn total(&self) -> ZPolynomial {
        self.moment(0).expect("zeroth moment is always defined")
    }

    /// Largest power carrying a nonzero coefficient anywhere.
    pub fn max_power(&self) -> Option<usize> {
        self.entries.values().filter_map(ZPolynomial::degree).max()
    }

    /// The integer `n`-th coefficient at the origin, convenience for tests.
    pub fn origin_coefficient(&self, n: usize) -> BigRational {
        self.coefficient(n, &LatticePoint::origin(self.dim))
    }
}

/// `Omega^n` as an exact rational, used for free-walk totals.
pub fn omega_power(dim: usize, n: usize) -> BigRational {
    num_traits::pow(rational_from_int(2 * dim as i64), n)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::poly::one;
    use proptest::prelude::*;

    fn d_at(dim: usize, order: usize) -> SpatialSeries {
        SpatialSeries::step_distribution(dim).unwrap().with_order(order)
    }

    #[test]
    fn delta_is_identity() {
        let delta = SpatialSeries::delta(5, 3).unwrap();
        assert_eq!(delta.origin_coefficient(0), one());
        assert_eq!(delta.len(), 1);
        let d = d_at(5, 3);
        assert_eq!(delta.convolve(&d).unwrap(), d);
        assert_eq!(d.convolve(&delta).unwrap(), d);
    }

    #[test]
    fn invalid_dimension() {
        assert!(SpatialSeries::delta(0, 2).is_err());
        assert!(SpatialSeries::step_distribution(0).is_err());
    }

    #[test]
    fn step_distribution_values() {
        let d = SpatialSeries::step_distribution(5).unwrap();
        assert_eq!(d.coefficient(0, &LatticePoint::unit(5, 0, 1)), rational(1, 10));
        assert_eq!(d.coefficient(0, &LatticePoint::unit(5, 3, -1)), rational(1, 10));
        assert_eq!(d.full_support().len(), 10);
        assert_eq!(d.omega(), 10);
        assert_eq!(d.moment(0).unwrap().coeff(0), &one());
        assert_eq!(d.moment(2).unwrap().coeff(0), &one());
    }

    #[test]
    fn two_step_return_probability() {
        for dim in 1..=5 {
            let d = d_at(dim, 0);
            let dd = d.convolve(&d).unwrap();
            // brute force: sum over the 2d unit vectors e of D(e) D(-e)
            let units: Vec<LatticePoint> = (0..dim)
                .flat_map(|a| [LatticePoint::unit(dim, a, 1), LatticePoint::unit(dim, a, -1)])
                .collect();
            let brute: BigRational = units.iter().map(|_| rational(1, 2 * dim as i64).pow(2)).sum();
            assert_eq!(brute, rational(1, 2 * dim as i64));
            assert_eq!(dd.origin_coefficient(0), brute);
        }
        let d1 = d_at(1, 0);
        let dd = d1.convolve(&d1).unwrap();
        assert_eq!(dd.coefficient(0, &LatticePoint::new(&[2]).unwrap()), rational(1, 4));
    }

    #[test]
    fn convolve_rejects_mismatch() {
        let a = SpatialSeries::delta(2, 3).unwrap();
        let b = SpatialSeries::delta(2, 4).unwrap();
        let c = SpatialSeries::delta(3, 3).unwrap();
        assert!(matches!(a.convolve(&b), Err(Error::Mismatch(_))));
        assert!(matches!(a.convolve(&c), Err(Error::Mismatch(_))));
    }

    #[test]
    fn moments() {
        let delta = SpatialSeries::delta(3, 0).unwrap();
        assert_eq!(delta.moment(0).unwrap().coeff(0), &one());
        assert!(matches!(delta.moment(1), Err(Error::InvalidArgument(_))));
        assert!(delta.moment(2).unwrap().is_zero());
    }

    #[test]
    fn orbit_and_full_storage_agree() {
        let d = d_at(2, 2);
        let z = SpatialSeries::fugacity_step(2, 2).unwrap();
        let a = d.convolve(&z).unwrap();
        let b = d.to_full().convolve(&z.to_full()).unwrap();
        assert_eq!(a.to_full(), b);
        assert_eq!(b.to_orbit().unwrap(), a);
    }

    fn random_full(dim: usize, order: usize, vals: &[(i32, i32, i64, i64, usize)]) -> SpatialSeries {
        let mut s = SpatialSeries::new(dim, order, Storage::Full).unwrap();
        for &(a, b, p, q, n) in vals {
            let mut c = vec![0; dim];
            c[0] = a;
            if dim > 1 {
                c[1] = b;
            }
            let x = LatticePoint::new(&c).unwrap();
            let mut poly = s.get(&x).cloned().unwrap_or_else(|| ZPolynomial::zero(order));
            let cur = poly.coeff(n % (order + 1)).clone();
            poly.set_coeff(n % (order + 1), cur + rational(p, q));
            s.insert(&x, poly).unwrap();
        }
        s
    }

    fn arb_series() -> impl Strategy<Value = Vec<(i32, i32, i64, i64, usize)>> {
        prop::collection::vec((-2i32..=2, -2i32..=2, -5i64..=5, 1i64..=4, 0usize..3), 1..5)
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn convolution_commutes_and_associates(a in arb_series(), b in arb_series(), c in arb_series()) {
            let (f, g, h) = (random_full(2, 2, &a), random_full(2, 2, &b), random_full(2, 2, &c));
            prop_assert_eq!(f.convolve(&g).unwrap(), g.convolve(&f).unwrap());
            let left = f.convolve(&g).unwrap().convolve(&h).unwrap();
            let right = f.convolve(&g.convolve(&h).unwrap()).unwrap();
            prop_assert_eq!(left, right);
        }

        #[test]
        fn symmetric_convolution_stays_symmetric(a in arb_series(), b in arb_series()) {
            let symmetrize = |s: SpatialSeries| {
                let mut out = SpatialSeries::new(2, 2, Storage::Orbit).unwrap();
                for (x, v) in s.entries() {
                    let cur = out.get(x).cloned().unwrap_or_else(|| ZPolynomial::zero(2));
                    out.insert(x, cur.checked_add(v).unwrap()).unwrap();
                }
                out
            };
            let f = symmetrize(random_full(2, 2, &a));
            let g = symmetrize(random_full(2, 2, &b));
            let full = f.to_full().convolve(&g.to_full()).unwrap();
            prop_assert!(full.is_symmetric());
            prop_assert_eq!(full.to_orbit().unwrap(), f.convolve(&g).unwrap());
        }
    }
}
