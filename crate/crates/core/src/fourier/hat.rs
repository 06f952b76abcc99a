use smallvec::SmallVec;

use super::grid::contract_all;
use super::torus::{cos_derivative, DerivativeTable, MultiIndex, TorusPoint};
use crate::error::{Error, Result};
use crate::lattice::{distinct_permutations, rational_to_f64, LatticeFunction, LatticePoint, SpatialSeries};

type Term = (SmallVec<[u16; 8]>, f64);

/// Fourier transform `h-hat(k) = sum_x h(x) cos(k . x)` of a finitely
/// supported lattice-symmetric function, with exact termwise derivatives.
///
/// Sign flips are summed in closed form, leaving one term
/// `2^{#nonzero} h(x) prod_j cos(k_j p_j)` per distinct coordinate
/// permutation `p` of each orbit representative.
#[derive(Clone, Debug, PartialEq)]
pub struct HatEvaluator {
    dim: usize,
    radius: usize,
    terms: Vec<Term>,
}

impl HatEvaluator {
    /// `values` pairs orbit representatives (or any orbit member) with the
    /// value at every point of the orbit.
    pub fn from_values<'a>(dim: usize, values: impl IntoIterator<Item = (&'a LatticePoint, f64)>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidArgument("dimension must be at least 1".into()));
        }
        let mut terms = Vec::new();
        let mut radius = 0;
        for (x, h) in values {
            if x.dim() != dim {
                return Err(Error::Mismatch(format!("point {x} is not in dimension {dim}")));
            }
            if h == 0.0 {
                continue;
            }
            let rep = x.orbit_representative();
            let nonzero = rep.coords().iter().filter(|&&c| c != 0).count();
            let w = h * f64::from(1u32 << nonzero);
            radius = radius.max(rep.linf_norm() as usize);
            for perm in distinct_permutations(rep.coords()) {
                terms.push((perm.iter().map(|&c| c as u16).collect(), w));
            }
        }
        Ok(HatEvaluator { dim, radius, terms })
    }

    /// The series collapsed at a numeric fugacity.
    pub fn from_series(series: &SpatialSeries, z: f64) -> Result<Self> {
        if !(z.is_finite() && z >= 0.0) {
            return Err(Error::Precondition(format!("fugacity {z} is outside the evaluable range")));
        }
        let sym = series.to_orbit()?;
        let vals: Vec<(LatticePoint, f64)> = sym.entries().map(|(x, p)| (x.clone(), p.eval_f64(z))).collect();
        Self::from_values(series.dim(), vals.iter().map(|(x, v)| (x, *v)))
    }

    pub fn from_function(f: &LatticeFunction) -> Result<Self> {
        let vals: Vec<(LatticePoint, f64)> = f.entries().map(|(x, v)| (x.clone(), rational_to_f64(v))).collect();
        Self::from_values(f.dim(), vals.iter().map(|(x, v)| (x, *v)))
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Largest `|x_j|` in the support.
    pub fn radius(&self) -> usize {
        self.radius
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn scaled(&self, c: f64) -> Self {
        let terms = self.terms.iter().map(|(p, w)| (p.clone(), w * c)).collect();
        HatEvaluator { terms, ..self.clone() }
    }

    fn check(&self, k: &TorusPoint) -> Result<()> {
        if k.dim() != self.dim {
            return Err(Error::Mismatch(format!("wave vector of dimension {} for d = {}", k.dim(), self.dim)));
        }
        Ok(())
    }

    /// Per-axis tables `m^a cos^{(a)}(k_j m)`, laid out `[axis][a][m]`.
    fn axis_tables(&self, k: &TorusPoint, top: &[u32]) -> Vec<Vec<Vec<f64>>> {
        let r = self.radius;
        top.iter()
            .zip(k.components())
            .map(|(&a_max, &kj)| {
                (0..=a_max)
                    .map(|a| (0..=r).map(|m| (m as f64).powi(a as i32) * cos_derivative(a, kj * m as f64)).collect())
                    .collect()
            })
            .collect()
    }

    pub fn eval(&self, k: &TorusPoint) -> Result<f64> {
        self.derivative(k, &MultiIndex::zero(self.dim))
    }

    /// `d^alpha h-hat(k)`, summed termwise.
    pub fn derivative(&self, k: &TorusPoint, alpha: &MultiIndex) -> Result<f64> {
        self.check(k)?;
        let tables = self.axis_tables(k, alpha.components());
        let a = alpha.components();
        Ok(self
            .terms
            .iter()
            .map(|(p, w)| p.iter().enumerate().fold(*w, |acc, (j, &m)| acc * tables[j][a[j] as usize][m as usize]))
            .sum())
    }

    /// Every derivative below `top` at `k` in one pass.
    pub fn derivative_table(&self, k: &TorusPoint, top: &MultiIndex) -> Result<DerivativeTable> {
        self.check(k)?;
        let tables = self.axis_tables(k, top.components());
        let mut out = DerivativeTable::new(top);
        let indices: Vec<MultiIndex> = out.indices().to_vec();
        let vals = out.values_mut();
        for (p, w) in &self.terms {
            for (slot, beta) in vals.iter_mut().zip(&indices) {
                let b = beta.components();
                *slot += p.iter().enumerate().fold(*w, |acc, (j, &m)| acc * tables[j][b[j] as usize][m as usize]);
            }
        }
        Ok(out)
    }

    /// `sum_terms w prod_j cosine(j, p_j)` for caller-supplied per-axis
    /// cosine values, e.g. tabulated on a grid.
    pub(crate) fn eval_with(&self, cosine: impl Fn(usize, usize) -> f64) -> f64 {
        self.terms
            .iter()
            .map(|(p, w)| p.iter().enumerate().fold(*w, |acc, (j, &m)| acc * cosine(j, m as usize)))
            .sum()
    }

    /// Central difference, step `h`, of the analytic derivative one order
    /// lower along the last differentiated axis.
    pub fn finite_difference(&self, k: &TorusPoint, alpha: &MultiIndex, h: f64) -> Result<f64> {
        let Some(axis) = (0..alpha.dim()).rev().find(|&j| alpha.components()[j] > 0) else {
            return self.eval(k);
        };
        let mut lower = alpha.components().to_vec();
        lower[axis] -= 1;
        let lower = MultiIndex::new(&lower);
        let plus = self.derivative(&k.shifted(axis, h), &lower)?;
        let minus = self.derivative(&k.shifted(axis, -h), &lower)?;
        Ok((plus - minus) / (2.0 * h))
    }

    /// Nested central differences of `h-hat` itself, for `|alpha| <= 2`.
    pub fn pure_finite_difference(&self, k: &TorusPoint, alpha: &MultiIndex, h: f64) -> Result<f64> {
        let axes: Vec<usize> =
            (0..alpha.dim()).flat_map(|j| std::iter::repeat_n(j, alpha.components()[j] as usize)).collect();
        match axes.as_slice() {
            [] => self.eval(k),
            [j] => Ok((self.eval(&k.shifted(*j, h))? - self.eval(&k.shifted(*j, -h))?) / (2.0 * h)),
            [i, j] if i == j => {
                let c = self.eval(k)?;
                Ok((self.eval(&k.shifted(*i, h))? - 2.0 * c + self.eval(&k.shifted(*i, -h))?) / (h * h))
            }
            [i, j] => {
                let pp = self.eval(&k.shifted(*i, h).shifted(*j, h))?;
                let pm = self.eval(&k.shifted(*i, h).shifted(*j, -h))?;
                let mp = self.eval(&k.shifted(*i, -h).shifted(*j, h))?;
                let mm = self.eval(&k.shifted(*i, -h).shifted(*j, -h))?;
                Ok((pp - pm - mp + mm) / (4.0 * h * h))
            }
            _ => Err(Error::InvalidArgument("pure finite differences support |alpha| <= 2".into())),
        }
    }

    /// `d^alpha h-hat` on the tensor grid `nodes^d` (row-major, axis 0
    /// slowest), by one matrix contraction per axis.
    pub fn grid_values(&self, nodes: &[f64], alpha: &MultiIndex) -> Result<Vec<f64>> {
        if alpha.dim() != self.dim {
            return Err(Error::Mismatch("multi-index dimension differs from the evaluator".into()));
        }
        let side = self.radius + 1;
        let mut tensor = vec![0.0; side.pow(self.dim as u32)];
        for (p, w) in &self.terms {
            let idx = p.iter().fold(0usize, |acc, &m| acc * side + m as usize);
            tensor[idx] += w;
        }
        let mats: Vec<Vec<f64>> = alpha
            .components()
            .iter()
            .map(|&a| {
                let mut mat = Vec::with_capacity(nodes.len() * side);
                for &kq in nodes {
                    for m in 0..side {
                        mat.push((m as f64).powi(a as i32) * cos_derivative(a, kq * m as f64));
                    }
                }
                mat
            })
            .collect();
        Ok(contract_all(tensor, self.dim, side, &mats, nodes.len()))
    }
}
