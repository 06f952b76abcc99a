//! Separable transforms of lattice-symmetric tensors: every function here
//! is even in each coordinate, so a `d`-dimensional cosine sum factors into
//! one small matrix product per axis.

use std::f64::consts::PI;

/// Contracts axis `axis` of a row-major tensor of shape `shape` with the
/// `out_len x shape[axis]` matrix `mat` (row-major).
pub(crate) fn contract_axis(data: &[f64], shape: &mut [usize], axis: usize, mat: &[f64], out_len: usize) -> Vec<f64> {
    let n = shape[axis];
    debug_assert_eq!(mat.len(), out_len * n);
    let pre: usize = shape[..axis].iter().product();
    let post: usize = shape[axis + 1..].iter().product();
    let mut out = vec![0.0; pre * out_len * post];
    for p in 0..pre {
        let src = &data[p * n * post..(p + 1) * n * post];
        let dst = &mut out[p * out_len * post..(p + 1) * out_len * post];
        for q in 0..out_len {
            let row = &mat[q * n..(q + 1) * n];
            let target = &mut dst[q * post..(q + 1) * post];
            for (m, &w) in row.iter().enumerate() {
                if w == 0.0 {
                    continue;
                }
                let s = &src[m * post..(m + 1) * post];
                for (t, v) in target.iter_mut().zip(s) {
                    *t += w * v;
                }
            }
        }
    }
    shape[axis] = out_len;
    out
}

/// Applies the same matrix along every axis.
pub(crate) fn contract_all(data: Vec<f64>, dim: usize, in_len: usize, mats: &[Vec<f64>], out_len: usize) -> Vec<f64> {
    let mut shape = vec![in_len; dim];
    let mut cur = data;
    for (axis, mat) in mats.iter().enumerate().take(dim) {
        cur = contract_axis(&cur, &mut shape, axis, mat, out_len);
    }
    cur
}

/// An even function on the discrete torus `(Z / L Z)^d`, stored on the
/// fundamental orthant `{0, ..., L/2}^d` (row-major, axis 0 slowest).
#[derive(Clone, Debug, PartialEq)]
pub struct EvenTorusGrid {
    dim: usize,
    side: usize,
    values: Vec<f64>,
}

impl EvenTorusGrid {
    pub fn new(dim: usize, side: usize) -> Self {
        assert!(side >= 2 && side.is_multiple_of(2), "torus side must be even");
        let m = side / 2 + 1;
        EvenTorusGrid { dim, side, values: vec![0.0; m.pow(dim as u32)] }
    }

    pub fn from_values(dim: usize, side: usize, values: Vec<f64>) -> Self {
        let g = Self::new(dim, side);
        assert_eq!(g.values.len(), values.len());
        EvenTorusGrid { values, ..g }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn side(&self) -> usize {
        self.side
    }

    /// Points per axis in the fundamental orthant, `L/2 + 1`.
    pub fn half(&self) -> usize {
        self.side / 2 + 1
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn index(&self, coords: &[usize]) -> usize {
        coords.iter().fold(0, |acc, &c| acc * self.half() + c)
    }

    /// Orthant coordinates of a flat index.
    pub fn coords(&self, mut idx: usize) -> Vec<usize> {
        let m = self.half();
        let mut c = vec![0; self.dim];
        for slot in c.iter_mut().rev() {
            *slot = idx % m;
            idx /= m;
        }
        c
    }

    /// Value at an arbitrary torus site (coordinates taken mod `L`, folded).
    pub fn get(&self, x: &[i32]) -> f64 {
        let l = self.side as i32;
        let c: Vec<usize> = x
            .iter()
            .map(|&v| {
                let r = v.rem_euclid(l);
                r.min(l - r) as usize
            })
            .collect();
        self.values[self.index(&c)]
    }

    /// Wave number `2 pi q / L` of orthant index `q`.
    pub fn wave_number(&self, q: usize) -> f64 {
        2.0 * PI * q as f64 / self.side as f64
    }

    fn cosine_matrix(&self, inverse: bool) -> Vec<f64> {
        let m = self.half();
        let mut mat = vec![0.0; m * m];
        for q in 0..m {
            for x in 0..m {
                let multiplicity = if x == 0 || x == self.side / 2 { 1.0 } else { 2.0 };
                let c = (2.0 * PI * (q * x) as f64 / self.side as f64).cos();
                mat[q * m + x] = if inverse { multiplicity * c / self.side as f64 } else { multiplicity * c };
            }
        }
        mat
    }

    fn transform(&self, inverse: bool) -> Self {
        let mat = self.cosine_matrix(inverse);
        let mats = vec![mat; self.dim];
        let values = contract_all(self.values.clone(), self.dim, self.half(), &mats, self.half());
        EvenTorusGrid { dim: self.dim, side: self.side, values }
    }

    /// `h-hat(k) = sum_{x in torus} h(x) e^{-i k x}` on the dual grid.
    pub fn forward(&self) -> Self {
        self.transform(false)
    }

    /// `h(x) = L^{-d} sum_k h-hat(k) e^{i k x}`.
    pub fn inverse(&self) -> Self {
        self.transform(true)
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        EvenTorusGrid { dim: self.dim, side: self.side, values: self.values.iter().map(|&v| f(v)).collect() }
    }

    pub fn zip_map(&self, other: &Self, f: impl Fn(f64, f64) -> f64) -> Self {
        assert_eq!((self.dim, self.side), (other.dim, other.side));
        let values = self.values.iter().zip(&other.values).map(|(&a, &b)| f(a, b)).collect();
        EvenTorusGrid { dim: self.dim, side: self.side, values }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Direct O(L^{2d}) transform over the whole torus.
    fn brute_forward(g: &EvenTorusGrid, k: &[usize]) -> f64 {
        let l = g.side();
        let total = l.pow(g.dim() as u32);
        let mut s = 0.0;
        for idx in 0..total {
            let mut rem = idx;
            let mut x = vec![0i32; g.dim()];
            for slot in x.iter_mut() {
                *slot = (rem % l) as i32;
                rem /= l;
            }
            let phase: f64 = x.iter().zip(k).map(|(&xi, &ki)| g.wave_number(ki) * f64::from(xi)).sum();
            s += g.get(&x) * phase.cos();
        }
        s
    }

    #[test]
    fn transform_matches_brute_force_and_inverts() {
        let mut g = EvenTorusGrid::new(3, 6);
        for (i, v) in g.values_mut().iter_mut().enumerate() {
            *v = ((i * 7919) % 13) as f64 - 6.0;
        }
        let f = g.forward();
        for k in [[0, 0, 0], [1, 2, 3], [3, 3, 0], [2, 0, 1]] {
            let want = brute_forward(&g, &k);
            assert!((f.values()[f.index(&k)] - want).abs() < 1e-9, "{k:?}");
        }
        let back = f.inverse();
        for (a, b) in back.values().iter().zip(g.values()) {
            assert!((a - b).abs() < 1e-12);
        }
    }
}
