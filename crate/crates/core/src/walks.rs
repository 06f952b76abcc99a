//! Exhaustive enumeration of nearest-neighbour walks with the Domb-Joyce
//! weight `(1 - beta)^P`, `P` the number of coincident time pairs.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use rayon::prelude::*;
use rustc_hash::FxHashMap;

use crate::error::{Error, Result};
use crate::lattice::{LatticePoint, SpatialSeries, Storage, ZPolynomial};

/// Default cap on the number of DFS nodes visited by [`enumerate_g`].
pub const DEFAULT_WORK_LIMIT: u128 = 10_000_000_000;

/// Dense visit tables are used up to this many sites; larger boxes fall
/// back to a hash map.
const DENSE_TABLE_LIMIT: u128 = 1 << 22;

/// Model parameters: dimension, interaction strength and maximal length.
#[derive(Clone, Debug, PartialEq)]
pub struct WalkWeightParams {
    dim: usize,
    beta: BigRational,
    max_len: usize,
}

impl WalkWeightParams {
    pub fn new(dim: usize, beta: BigRational, max_len: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidArgument("dimension must be at least 1".into()));
        }
        if beta < BigRational::zero() || beta >= BigRational::one() {
            return Err(Error::InvalidArgument(format!("beta = {beta} must lie in [0, 1)")));
        }
        Ok(WalkWeightParams { dim, beta, max_len })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn beta(&self) -> &BigRational {
        &self.beta
    }

    pub fn max_len(&self) -> usize {
        self.max_len
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct EnumerationOptions {
    /// Maximal number of DFS nodes (walks of length `1..=N` with a fixed
    /// first step).
    pub work_limit: u128,
}

impl Default for EnumerationOptions {
    fn default() -> Self {
        EnumerationOptions { work_limit: DEFAULT_WORK_LIMIT }
    }
}

/// The two-point function series together with the parameters it was
/// built from.
#[derive(Clone, Debug, PartialEq)]
pub struct GSeries {
    pub params: WalkWeightParams,
    pub series: SpatialSeries,
}

impl GSeries {
    pub fn series(&self) -> &SpatialSeries {
        &self.series
    }
}

/// `beta`-independent walk statistics: for every length `n`, orbit
/// representative `x` and pair count `P`, the number of `n`-step walks
/// from `0` to `x` with exactly `P` coincident pairs.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WalkCensus {
    dim: usize,
    max_len: usize,
    counts: Vec<BTreeMap<LatticePoint, BTreeMap<u32, u64>>>,
}

impl WalkCensus {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn max_len(&self) -> usize {
        self.max_len
    }

    /// Walk counts by pair number for `n` steps ending at `x`.
    pub fn counts(&self, n: usize, x: &LatticePoint) -> Option<&BTreeMap<u32, u64>> {
        self.counts.get(n)?.get(&x.orbit_representative())
    }

    /// Total number of `n`-step walks (should be `(2d)^n`).
    pub fn total_walks(&self, n: usize) -> u128 {
        self.counts[n]
            .iter()
            .map(|(x, by_p)| u128::from(x.orbit_size()) * by_p.values().map(|&c| u128::from(c)).sum::<u128>())
            .sum()
    }

    pub fn max_pairs(&self) -> u32 {
        self.counts
            .iter()
            .flat_map(|m| m.values())
            .filter_map(|by_p| by_p.keys().next_back().copied())
            .max()
            .unwrap_or(0)
    }

    /// Applies the weight `(1 - beta)^P` to every walk.
    pub fn weighted(&self, beta: &BigRational) -> Result<SpatialSeries> {
        let one_minus = BigRational::one() - beta;
        let mut powers = vec![BigRational::one()];
        for _ in 0..self.max_pairs() {
            let next = powers.last().expect("nonempty") * &one_minus;
            powers.push(next);
        }
        let mut polys: BTreeMap<LatticePoint, ZPolynomial> = BTreeMap::new();
        for (n, by_site) in self.counts.iter().enumerate() {
            for (x, by_p) in by_site {
                let mut acc = BigRational::zero();
                for (&p, &c) in by_p {
                    acc += &powers[p as usize] * BigRational::from_integer(BigInt::from(c));
                }
                if acc.is_zero() {
                    continue;
                }
                let poly = polys.entry(x.clone()).or_insert_with(|| ZPolynomial::zero(self.max_len));
                poly.set_coeff(n, acc);
            }
        }
        let mut series = SpatialSeries::new(self.dim, self.max_len, Storage::Orbit)?;
        for (x, p) in polys {
            series.insert(&x, p)?;
        }
        Ok(series)
    }
}

/// Number of DFS nodes visited when the first step is pinned.
pub fn estimated_work(dim: usize, max_len: usize) -> u128 {
    let omega = 2 * dim as u128;
    let mut total: u128 = 0;
    let mut layer: u128 = 1;
    for _ in 1..=max_len {
        total = total.saturating_add(layer);
        layer = layer.saturating_mul(omega);
    }
    total
}

trait VisitTable {
    /// Marks a visit and returns the multiplicity before it.
    fn enter(&mut self, site: usize) -> u32;
    fn leave(&mut self, site: usize);
}

struct DenseVisits(Vec<u16>);

impl VisitTable for DenseVisits {
    #[inline]
    fn enter(&mut self, site: usize) -> u32 {
        let m = self.0[site];
        self.0[site] = m + 1;
        u32::from(m)
    }

    #[inline]
    fn leave(&mut self, site: usize) {
        self.0[site] -= 1;
    }
}

#[derive(Default)]
struct SparseVisits(FxHashMap<usize, u16>);

impl VisitTable for SparseVisits {
    #[inline]
    fn enter(&mut self, site: usize) -> u32 {
        let m = self.0.entry(site).or_insert(0);
        *m += 1;
        u32::from(*m - 1)
    }

    #[inline]
    fn leave(&mut self, site: usize) {
        if let Some(m) = self.0.get_mut(&site) {
            *m -= 1;
            if *m == 0 {
                self.0.remove(&site);
            }
        }
    }
}

/// Tally keyed by (length, encoded endpoint, pair count).
type Tally = FxHashMap<(u8, usize, u32), u64>;

struct Geometry {
    dim: usize,
    side: usize,
    center: usize,
    offsets: Vec<isize>,
}

impl Geometry {
    fn new(dim: usize, max_len: usize) -> Result<Self> {
        let side = 2 * max_len + 1;
        if (side as u128).checked_pow(dim as u32).is_none_or(|s| s > 1u128 << 63) {
            return Err(Error::InvalidArgument(format!(
                "lattice box of side {side} in dimension {dim} is too large to index"
            )));
        }
        let mut offsets = Vec::with_capacity(2 * dim);
        let mut stride: isize = 1;
        let mut center = 0usize;
        for _ in 0..dim {
            offsets.push(stride);
            offsets.push(-stride);
            center += max_len * stride as usize;
            stride *= side as isize;
        }
        Ok(Geometry { dim, side, center, offsets })
    }

    fn sites(&self) -> u128 {
        (self.side as u128).pow(self.dim as u32)
    }

    fn decode(&self, mut site: usize) -> LatticePoint {
        let half = (self.side / 2) as i32;
        let mut c = Vec::with_capacity(self.dim);
        for _ in 0..self.dim {
            c.push((site % self.side) as i32 - half);
            site /= self.side;
        }
        LatticePoint::new(&c).expect("dimension is positive")
    }
}

fn dfs<V: VisitTable>(
    geo: &Geometry,
    visits: &mut V,
    site: usize,
    len: usize,
    pairs: u32,
    max_len: usize,
    tally: &mut Tally,
) {
    *tally.entry((len as u8, site, pairs)).or_insert(0) += 1;
    if len == max_len {
        return;
    }
    for &off in &geo.offsets {
        let next = (site as isize + off) as usize;
        let m = visits.enter(next);
        dfs(geo, visits, next, len + 1, pairs + m, max_len, tally);
        visits.leave(next);
    }
}

/// Replays a prefix (sequence of direction indices after the pinned first
/// step) into `visits`, then explores everything below it.
fn run_prefix<V: VisitTable>(geo: &Geometry, visits: &mut V, prefix: &[usize], max_len: usize, tally: &mut Tally) {
    let mut path = Vec::with_capacity(prefix.len() + 2);
    let mut site = geo.center;
    visits.enter(site);
    path.push(site);
    site = (site as isize + geo.offsets[0]) as usize;
    let mut pairs = visits.enter(site);
    path.push(site);
    for &dir in prefix {
        site = (site as isize + geo.offsets[dir]) as usize;
        pairs += visits.enter(site);
        path.push(site);
    }
    dfs(geo, visits, site, prefix.len() + 1, pairs, max_len, tally);
    for s in path.into_iter().rev() {
        visits.leave(s);
    }
}

fn shallow_tally<V: VisitTable>(geo: &Geometry, visits: &mut V, depth: usize) -> Tally {
    let mut tally = Tally::default();
    visits.enter(geo.center);
    tally.insert((0, geo.center, 0), 1);
    let first = (geo.center as isize + geo.offsets[0]) as usize;
    let m = visits.enter(first);
    // nodes of length 1..depth-1 only; length >= depth comes from the prefixes
    if depth > 1 {
        dfs(geo, visits, first, 1, m, depth - 1, &mut tally);
    }
    visits.leave(first);
    visits.leave(geo.center);
    tally
}

fn all_prefixes(omega: usize, len: usize) -> Vec<Vec<usize>> {
    let mut out = vec![Vec::new()];
    for _ in 0..len {
        out = out
            .into_iter()
            .flat_map(|p| {
                (0..omega).map(move |d| {
                    let mut q = p.clone();
                    q.push(d);
                    q
                })
            })
            .collect();
    }
    out
}

fn merge(mut a: Tally, b: Tally) -> Tally {
    if a.len() < b.len() {
        return merge(b, a);
    }
    for (k, v) in b {
        *a.entry(k).or_insert(0) += v;
    }
    a
}

/// Counts every walk of length `<= N` by endpoint orbit and pair number.
///
/// The first step is pinned to `+e_1`; the other `2d - 1` first steps are
/// recovered by symmetry. The search runs in parallel over prefixes on the
/// current rayon pool, and the reduction is on integers, so the output does
/// not depend on the thread count.
pub fn walk_census(dim: usize, max_len: usize, options: &EnumerationOptions) -> Result<WalkCensus> {
    if dim == 0 {
        return Err(Error::InvalidArgument("dimension must be at least 1".into()));
    }
    if max_len > u8::MAX as usize {
        return Err(Error::InvalidArgument(format!("walk length {max_len} is too large")));
    }
    let estimated = estimated_work(dim, max_len);
    if estimated > options.work_limit {
        return Err(Error::WorkLimit { estimated, limit: options.work_limit });
    }
    let mut counts = vec![BTreeMap::new(); max_len + 1];
    counts[0].insert(LatticePoint::origin(dim), BTreeMap::from([(0u32, 1u64)]));
    if max_len == 0 {
        return Ok(WalkCensus { dim, max_len, counts });
    }

    let geo = Geometry::new(dim, max_len)?;
    let omega = 2 * dim;
    let threads = rayon::current_num_threads().max(1);
    // smallest prefix depth giving a few dozen tasks per thread
    let mut depth = 0;
    while depth + 1 < max_len && omega.pow(depth as u32) < 32 * threads {
        depth += 1;
    }
    let prefixes = all_prefixes(omega, depth);
    let dense = geo.sites() <= DENSE_TABLE_LIMIT;

    let tally = if dense {
        let fresh = || DenseVisits(vec![0; geo.sites() as usize]);
        let shallow = shallow_tally(&geo, &mut fresh(), depth + 1);
        let deep = prefixes
            .par_iter()
            .fold(
                || (fresh(), Tally::default()),
                |(mut v, mut t), p| {
                    run_prefix(&geo, &mut v, p, max_len, &mut t);
                    (v, t)
                },
            )
            .map(|(_, t)| t)
            .reduce(Tally::default, merge);
        merge(shallow, deep)
    } else {
        let shallow = shallow_tally(&geo, &mut SparseVisits::default(), depth + 1);
        let deep = prefixes
            .par_iter()
            .fold(
                || (SparseVisits::default(), Tally::default()),
                |(mut v, mut t), p| {
                    run_prefix(&geo, &mut v, p, max_len, &mut t);
                    (v, t)
                },
            )
            .map(|(_, t)| t)
            .reduce(Tally::default, merge);
        merge(shallow, deep)
    };

    for ((len, site, pairs), c) in tally {
        let n = len as usize;
        if n == 0 {
            continue;
        }
        let rep = geo.decode(site).orbit_representative();
        *counts[n].entry(rep).or_insert_with(BTreeMap::new).entry(pairs).or_insert(0u64) += c;
    }
    // counts hold walks with first step +e_1 landing anywhere in the orbit;
    // convert to walks (any first step) ending at the representative itself
    for by_site in counts.iter_mut().skip(1) {
        for (x, by_p) in by_site.iter_mut() {
            let size = x.orbit_size();
            for c in by_p.values_mut() {
                let total = *c * omega as u64;
                if !total.is_multiple_of(size) {
                    return Err(Error::Internal(format!(
                        "walk count {total} at {x} is not divisible by orbit size {size}"
                    )));
                }
                *c = total / size;
            }
        }
    }
    Ok(WalkCensus { dim, max_len, counts })
}

/// Exact coefficients `g_n(x)` of the weakly self-avoiding two-point
/// function for all `n <= N`.
pub fn enumerate_g(params: &WalkWeightParams, options: &EnumerationOptions) -> Result<GSeries> {
    let census = walk_census(params.dim, params.max_len, options)?;
    Ok(GSeries { params: params.clone(), series: census.weighted(&params.beta)? })
}

/// Simple random walk counts `Omega^n D^{*n}(x)` by repeated convolution
/// with `z Omega D`; an enumeration-free reference for `beta = 0`.
pub fn srw_counts(dim: usize, order: usize) -> Result<SpatialSeries> {
    let delta = SpatialSeries::delta(dim, order)?;
    let step = SpatialSeries::fugacity_step(dim, order)?;
    let mut s = delta.clone();
    for _ in 0..order {
        s = delta.checked_add(&step.convolve(&s)?)?;
    }
    Ok(s)
}

/// Susceptibility coefficients `chi_n = sum_x g_n(x)`.
pub fn chi_series(g: &SpatialSeries) -> ZPolynomial {
    g.total()
}
