use std::f64::consts::PI;
use std::fmt;

use smallvec::SmallVec;

use crate::error::{Error, Result};

/// A wave vector `k` on the torus `[-pi, pi)^d`.
#[derive(Clone, Debug, PartialEq)]
pub struct TorusPoint(Vec<f64>);

impl TorusPoint {
    /// Reduces every component into `[-pi, pi)`.
    pub fn new(k: &[f64]) -> Result<Self> {
        if k.is_empty() || k.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument("torus point needs finite components and d >= 1".into()));
        }
        Ok(TorusPoint(k.iter().map(|&v| reduce(v)).collect()))
    }

    pub fn origin(dim: usize) -> Self {
        TorusPoint(vec![0.0; dim])
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn components(&self) -> &[f64] {
        &self.0
    }

    pub fn norm_sq(&self) -> f64 {
        self.0.iter().map(|v| v * v).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sq().sqrt()
    }

    /// `self + h e_axis`, reduced.
    pub fn shifted(&self, axis: usize, h: f64) -> Self {
        let mut k = self.0.clone();
        k[axis] = reduce(k[axis] + h);
        TorusPoint(k)
    }
}

fn reduce(v: f64) -> f64 {
    let r = (v + PI).rem_euclid(2.0 * PI) - PI;
    if r >= PI {
        -PI
    } else {
        r
    }
}

/// `D-hat(k) = d^{-1} sum_j cos k_j`.
pub fn dhat(k: &TorusPoint) -> f64 {
    k.0.iter().map(|v| v.cos()).sum::<f64>() / k.dim() as f64
}

/// `d^a/dt^a cos(t)`.
#[inline]
pub fn cos_derivative(a: u32, t: f64) -> f64 {
    match a % 4 {
        0 => t.cos(),
        1 => -t.sin(),
        2 => -t.cos(),
        _ => t.sin(),
    }
}

/// A multi-index `alpha` selecting the derivative `d^alpha / dk^alpha`.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct MultiIndex(SmallVec<[u32; 8]>);

impl MultiIndex {
    pub fn new(components: &[u32]) -> Self {
        MultiIndex(SmallVec::from_slice(components))
    }

    pub fn zero(dim: usize) -> Self {
        MultiIndex(smallvec::smallvec![0; dim])
    }

    /// `order * e_axis`.
    pub fn axial(dim: usize, axis: usize, order: u32) -> Self {
        let mut m = Self::zero(dim);
        m.0[axis] = order;
        m
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn components(&self) -> &[u32] {
        &self.0
    }

    /// `|alpha|`.
    pub fn order(&self) -> u32 {
        self.0.iter().sum()
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&a| a == 0)
    }

    /// `alpha!`.
    pub fn factorial(&self) -> f64 {
        self.0.iter().map(|&a| (1..=a).map(f64::from).product::<f64>()).product()
    }

    /// `prod_j C(alpha_j, beta_j)`.
    pub fn binomial(&self, beta: &MultiIndex) -> f64 {
        self.0
            .iter()
            .zip(&beta.0)
            .map(|(&a, &b)| (0..b).map(|i| f64::from(a - i) / f64::from(i + 1)).product::<f64>())
            .product()
    }

    pub fn le(&self, other: &MultiIndex) -> bool {
        self.0.iter().zip(&other.0).all(|(a, b)| a <= b)
    }

    pub fn sub(&self, other: &MultiIndex) -> MultiIndex {
        MultiIndex(self.0.iter().zip(&other.0).map(|(a, b)| a - b).collect())
    }

    /// Every `beta <= alpha`, in mixed-radix order (last axis fastest).
    pub fn box_below(&self) -> Vec<MultiIndex> {
        let mut out = vec![MultiIndex::zero(self.dim())];
        for axis in 0..self.dim() {
            out = out
                .into_iter()
                .flat_map(|m| {
                    (0..=self.0[axis]).map(move |v| {
                        let mut n = m.clone();
                        n.0[axis] = v;
                        n
                    })
                })
                .collect();
        }
        out
    }
}

impl fmt::Display for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, a) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{a}")?;
        }
        write!(f, ")")
    }
}

impl fmt::Debug for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

/// All derivatives `d^beta h(k)`, `beta <= alpha`, of one function at one
/// point, with the Leibniz algebra needed for products and reciprocals.
#[derive(Clone, Debug, PartialEq)]
pub struct DerivativeTable {
    top: MultiIndex,
    indices: Vec<MultiIndex>,
    values: Vec<f64>,
}

impl DerivativeTable {
    pub fn new(top: &MultiIndex) -> Self {
        let indices = top.box_below();
        let values = vec![0.0; indices.len()];
        DerivativeTable { top: top.clone(), indices, values }
    }

    pub fn top(&self) -> &MultiIndex {
        &self.top
    }

    pub fn indices(&self) -> &[MultiIndex] {
        &self.indices
    }

    fn position(&self, beta: &MultiIndex) -> usize {
        let mut idx = 0;
        for (b, t) in beta.0.iter().zip(&self.top.0) {
            idx = idx * (*t as usize + 1) + *b as usize;
        }
        idx
    }

    pub fn get(&self, beta: &MultiIndex) -> f64 {
        self.values[self.position(beta)]
    }

    pub fn set(&mut self, beta: &MultiIndex, v: f64) {
        let i = self.position(beta);
        self.values[i] = v;
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Derivatives of `1/h` from `h R = 1`:
    /// `d^a R = -(1/h) sum_{0 < b <= a} C(a, b) d^b h d^{a-b} R`.
    pub fn reciprocal(&self) -> Result<Self> {
        let h0 = self.values[0];
        if h0 == 0.0 || !h0.is_finite() {
            return Err(Error::Numeric { message: "reciprocal of a vanishing function".into(), achieved: h0 });
        }
        let mut out = DerivativeTable::new(&self.top);
        out.values[0] = 1.0 / h0;
        for (i, a) in self.indices.iter().enumerate().skip(1) {
            let mut s = 0.0;
            for b in &self.indices {
                if b.is_zero() || !b.le(a) {
                    continue;
                }
                s += a.binomial(b) * self.get(b) * out.get(&a.sub(b));
            }
            out.values[i] = -s / h0;
        }
        Ok(out)
    }

    /// Leibniz rule `d^a (f g) = sum_{b <= a} C(a, b) d^b f d^{a-b} g`.
    pub fn product(&self, other: &Self) -> Self {
        debug_assert_eq!(self.top, other.top);
        let mut out = DerivativeTable::new(&self.top);
        for (i, a) in self.indices.iter().enumerate() {
            let mut s = 0.0;
            for b in &self.indices {
                if b.le(a) {
                    s += a.binomial(b) * self.get(b) * other.get(&a.sub(b));
                }
            }
            out.values[i] = s;
        }
        out
    }
}

/// Derivative table of `1 - c D-hat(k)` (`c = mu Omega`): only pure
/// single-axis derivatives survive.
pub fn one_minus_dhat_table(k: &TorusPoint, coupling: f64, top: &MultiIndex) -> DerivativeTable {
    let d = k.dim() as f64;
    let mut t = DerivativeTable::new(top);
    for i in 0..t.indices.len() {
        let beta = &t.indices[i];
        let nonzero: Vec<usize> = (0..beta.dim()).filter(|&j| beta.0[j] > 0).collect();
        let v = match nonzero.len() {
            0 => 1.0 - coupling * dhat(k),
            1 => {
                let j = nonzero[0];
                -coupling / d * cos_derivative(beta.0[j], k.0[j])
            }
            _ => 0.0,
        };
        t.values[i] = v;
    }
    t
}
