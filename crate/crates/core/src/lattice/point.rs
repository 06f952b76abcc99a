use std::fmt;

use smallvec::SmallVec;

use crate::error::{Error, Result};

pub(crate) type Coords = SmallVec<[i32; 8]>;

/// A site of the hypercubic lattice `Z^d`.
///
/// Ordering is lexicographic on the coordinates, which makes the orbit
/// representative (absolute values sorted in decreasing order) the maximal
/// element of its orbit under the hyperoctahedral group.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct LatticePoint(Coords);

impl LatticePoint {
    pub fn new(coords: &[i32]) -> Result<Self> {
        if coords.is_empty() {
            return Err(Error::InvalidArgument("lattice dimension must be at least 1".into()));
        }
        Ok(LatticePoint(Coords::from_slice(coords)))
    }

    pub fn origin(dim: usize) -> Self {
        LatticePoint(smallvec::smallvec![0; dim])
    }

    /// `sign * e_axis`.
    pub fn unit(dim: usize, axis: usize, sign: i32) -> Self {
        let mut c: Coords = smallvec::smallvec![0; dim];
        c[axis] = sign;
        LatticePoint(c)
    }

    /// The point `r * e_1`.
    pub fn on_axis(dim: usize, r: i32) -> Self {
        let mut c: Coords = smallvec::smallvec![0; dim];
        c[0] = r;
        LatticePoint(c)
    }

    /// The point `(r, r, ..., r)`.
    pub fn on_diagonal(dim: usize, r: i32) -> Self {
        LatticePoint(smallvec::smallvec![r; dim])
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn coords(&self) -> &[i32] {
        &self.0
    }

    pub fn is_origin(&self) -> bool {
        self.0.iter().all(|&c| c == 0)
    }

    pub fn l1_norm(&self) -> u32 {
        self.0.iter().map(|c| c.unsigned_abs()).sum()
    }

    pub fn linf_norm(&self) -> u32 {
        self.0.iter().map(|c| c.unsigned_abs()).max().unwrap_or(0)
    }

    /// Squared Euclidean norm; always an exact integer.
    pub fn norm_sq(&self) -> i64 {
        self.0.iter().map(|&c| i64::from(c) * i64::from(c)).sum()
    }

    pub fn add(&self, other: &LatticePoint) -> LatticePoint {
        debug_assert_eq!(self.dim(), other.dim());
        LatticePoint(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    pub fn sub(&self, other: &LatticePoint) -> LatticePoint {
        debug_assert_eq!(self.dim(), other.dim());
        LatticePoint(self.0.iter().zip(&other.0).map(|(a, b)| a - b).collect())
    }

    /// Lexicographically maximal point of the orbit: absolute values in
    /// non-increasing order.
    pub fn orbit_representative(&self) -> LatticePoint {
        let mut c: Coords = self.0.iter().map(|v| v.abs()).collect();
        c.sort_unstable_by(|a, b| b.cmp(a));
        LatticePoint(c)
    }

    pub fn is_representative(&self) -> bool {
        self.0.windows(2).all(|w| w[0] >= w[1]) && self.0.iter().all(|&v| v >= 0)
    }

    /// Number of distinct images under sign flips and coordinate permutations.
    pub fn orbit_size(&self) -> u64 {
        let rep = self.orbit_representative();
        let d = rep.dim() as u64;
        let nonzero = rep.0.iter().filter(|&&v| v != 0).count() as u32;
        let mut size = factorial(d);
        let mut i = 0;
        while i < rep.0.len() {
            let mut j = i;
            while j < rep.0.len() && rep.0[j] == rep.0[i] {
                j += 1;
            }
            size /= factorial((j - i) as u64);
            i = j;
        }
        size << nonzero
    }

    /// All points of the orbit, in increasing lexicographic order.
    pub fn orbit(&self) -> Vec<LatticePoint> {
        let rep = self.orbit_representative();
        let mut out = Vec::with_capacity(self.orbit_size() as usize);
        for perm in distinct_permutations(rep.coords()) {
            let nz: Vec<usize> = (0..perm.len()).filter(|&i| perm[i] != 0).collect();
            for mask in 0u32..(1u32 << nz.len()) {
                let mut c = Coords::from_slice(&perm);
                for (bit, &axis) in nz.iter().enumerate() {
                    if mask & (1 << bit) != 0 {
                        c[axis] = -c[axis];
                    }
                }
                out.push(LatticePoint(c));
            }
        }
        out.sort();
        out
    }
}

impl fmt::Debug for LatticePoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for LatticePoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, c) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, ")")
    }
}

fn factorial(n: u64) -> u64 {
    (1..=n).product::<u64>().max(1)
}

/// Distinct permutations of a multiset, via repeated next-permutation on
/// the ascending arrangement.
pub(crate) fn distinct_permutations(values: &[i32]) -> Vec<Vec<i32>> {
    let mut cur: Vec<i32> = values.to_vec();
    cur.sort_unstable();
    let mut out = vec![cur.clone()];
    loop {
        let n = cur.len();
        let Some(i) = (0..n.saturating_sub(1)).rev().find(|&i| cur[i] < cur[i + 1]) else {
            break;
        };
        let j = (i + 1..n).rev().find(|&j| cur[j] > cur[i]).expect("pivot exists");
        cur.swap(i, j);
        cur[i + 1..].reverse();
        out.push(cur.clone());
    }
    out
}

/// Orbit representatives of all sites with `||x||_1 <= radius`, sorted.
pub fn representatives_in_l1_ball(dim: usize, radius: u32) -> Vec<LatticePoint> {
    let mut out = Vec::new();
    let mut cur: Coords = smallvec::smallvec![0; dim];
    fill_nonincreasing(&mut cur, 0, radius as i32, Some(radius as i32), &mut out);
    out.sort();
    out
}

/// Orbit representatives of all sites with `||x||_inf <= radius`, sorted.
pub fn representatives_in_box(dim: usize, radius: u32) -> Vec<LatticePoint> {
    let mut out = Vec::new();
    let mut cur: Coords = smallvec::smallvec![0; dim];
    fill_nonincreasing(&mut cur, 0, radius as i32, None, &mut out);
    out.sort();
    out
}

fn fill_nonincreasing(
    cur: &mut Coords,
    pos: usize,
    max_val: i32,
    budget: Option<i32>,
    out: &mut Vec<LatticePoint>,
) {
    if pos == cur.len() {
        out.push(LatticePoint(cur.clone()));
        return;
    }
    let top = budget.map_or(max_val, |b| b.min(max_val));
    for v in 0..=top {
        cur[pos] = v;
        fill_nonincreasing(cur, pos + 1, v, budget.map(|b| b - v), out);
    }
    cur[pos] = 0;
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(c: &[i32]) -> LatticePoint {
        LatticePoint::new(c).unwrap()
    }

    #[test]
    fn representative_is_sorted_absolute() {
        assert_eq!(p(&[-1, 3, 0, -2]).orbit_representative(), p(&[3, 2, 1, 0]));
        let r = p(&[2, -2, 1]).orbit_representative();
        assert_eq!(r.orbit_representative(), r);
        assert!(r.is_representative());
    }

    #[test]
    fn representative_is_lexicographic_maximum() {
        let x = p(&[0, -1, 2]);
        let orbit = x.orbit();
        assert_eq!(orbit.iter().max().unwrap(), &x.orbit_representative());
        for y in &orbit {
            assert_eq!(y.orbit_representative(), x.orbit_representative());
        }
    }

    #[test]
    fn orbit_sizes() {
        assert_eq!(LatticePoint::origin(5).orbit_size(), 1);
        assert_eq!(LatticePoint::unit(5, 0, 1).orbit_size(), 10);
        assert_eq!(p(&[1, 1]).orbit_size(), 4);
        assert_eq!(p(&[2, 1]).orbit_size(), 8);
        assert_eq!(p(&[3, 2, 1, 0, 0]).orbit_size(), 8 * 60);
        for c in [[1, 0, 0], [2, 1, 1], [3, 2, 1], [1, 1, 1]] {
            let x = p(&c);
            assert_eq!(x.orbit().len() as u64, x.orbit_size());
        }
    }

    #[test]
    fn empty_point_rejected() {
        assert!(LatticePoint::new(&[]).is_err());
    }

    #[test]
    fn ball_representatives_cover_ball() {
        let reps = representatives_in_l1_ball(3, 4);
        let total: u64 = reps.iter().map(|r| r.orbit_size()).sum();
        // |{x in Z^3 : ||x||_1 <= 4}| = sum_k 2^k C(3,k) C(4,k)
        assert_eq!(total, 1 + 2 * 3 * 4 + 4 * 3 * 6 + 8 * 4);
        assert!(reps.iter().all(|r| r.is_representative() && r.l1_norm() <= 4));
    }

    #[test]
    fn box_representatives_cover_box() {
        let reps = representatives_in_box(2, 3);
        let total: u64 = reps.iter().map(|r| r.orbit_size()).sum();
        assert_eq!(total, 49);
    }
}
