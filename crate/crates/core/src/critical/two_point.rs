use num_rational::BigRational;
use num_traits::{Signed, Zero};
use rayon::prelude::*;

use super::Decomposition;
use crate::error::{Error, Result};
use crate::fourier::{EvenTorusGrid, HatEvaluator, MultiIndex};
use crate::green::GreenEvaluator;
use crate::lattice::{rational_to_f64, LatticePoint};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TwoPointOptions {
    /// Side `L` of the torus carrying `G` and `f`; even.
    pub torus_side: usize,
    pub quadrature_tolerance: f64,
}

impl Default for TwoPointOptions {
    fn default() -> Self {
        TwoPointOptions { torus_side: 32, quadrature_tolerance: 1e-10 }
    }
}

/// `G_z = F_z^{-1}` and `f_z = C_mu * E_z * G_z` on a large torus, with
/// `C_mu` itself taken on `Z^d` from the Bessel integral.
#[derive(Clone, Debug)]
pub struct TwoPointSolver {
    dim: usize,
    lambda: f64,
    green: GreenEvaluator,
    g: Option<EvenTorusGrid>,
    f: EvenTorusGrid,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TwoPointRow {
    pub x: LatticePoint,
    /// `F_z^{-1}(x)`; absent when `F-hat_z` is not positive on the torus.
    pub g_direct: Option<f64>,
    pub c_mu: f64,
    pub f: f64,
    /// `lambda C_mu(x) + f(x)`.
    pub g: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TwoPointTable {
    pub lambda: f64,
    pub coupling: f64,
    pub torus_side: usize,
    pub rows: Vec<TwoPointRow>,
}

impl TwoPointTable {
    /// `(max |G - lambda C_mu - f|, max |G|)` over the rows.
    pub fn identity_residual(&self) -> Option<(f64, f64)> {
        let mut res = 0.0f64;
        let mut top = 0.0f64;
        for r in &self.rows {
            let g = r.g_direct?;
            res = res.max((g - self.lambda * r.c_mu - r.f).abs());
            top = top.max(g.abs());
        }
        Some((res, top))
    }

    pub fn max_abs_f(&self) -> f64 {
        self.rows.iter().map(|r| r.f.abs()).fold(0.0, f64::max)
    }
}

impl TwoPointSolver {
    pub fn new(dec: &Decomposition, options: &TwoPointOptions) -> Result<Self> {
        let dim = dec.dim;
        let side = options.torus_side;
        if side < 4 || side % 2 == 1 {
            return Err(Error::InvalidArgument(format!("torus side {side} must be even and at least 4")));
        }
        let reach = dec.e.l1_radius().max(dec.f.l1_radius()) as usize;
        if side / 2 < 2 * reach {
            return Err(Error::InvalidArgument(format!(
                "torus side {side} too small: half-side must be at least twice the support radius {reach} of E"
            )));
        }
        let coupling = rational_to_f64(&dec.coupling());
        let mu = rational_to_f64(&dec.mu);
        let green = GreenEvaluator::new(dim, mu)?.with_tolerance(options.quadrature_tolerance);

        let shape = EvenTorusGrid::new(dim, side);
        let nodes: Vec<f64> = (0..shape.half()).map(|q| shape.wave_number(q)).collect();
        let zero = MultiIndex::zero(dim);
        let fhat = HatEvaluator::from_function(&dec.f)?.grid_values(&nodes, &zero)?;
        let positive = dec.fhat_zero() > BigRational::zero() && fhat.iter().all(|&v| v > 0.0);
        let g = if positive {
            Some(EvenTorusGrid::from_values(dim, side, fhat.iter().map(|v| 1.0 / v).collect()).inverse())
        } else {
            None
        };
        let f = if dec.e.is_zero() {
            EvenTorusGrid::new(dim, side)
        } else {
            if !positive {
                return Err(Error::Precondition("F-hat_z is not positive on the torus; z is past the evaluable range".into()));
            }
            if coupling >= 1.0 {
                return Err(Error::Precondition("f_z needs mu Omega < 1".into()));
            }
            let ehat = HatEvaluator::from_function(&dec.e)?.grid_values(&nodes, &zero)?;
            let cosines: Vec<f64> = nodes.iter().map(|k| k.cos()).collect();
            let values: Vec<f64> = (0..fhat.len())
                .into_par_iter()
                .map(|idx| {
                    let dhat = shape.coords(idx).iter().map(|&q| cosines[q]).sum::<f64>() / dim as f64;
                    ehat[idx] / ((1.0 - coupling * dhat) * fhat[idx])
                })
                .collect();
            EvenTorusGrid::from_values(dim, side, values).inverse()
        };
        Ok(TwoPointSolver { dim, lambda: rational_to_f64(&dec.lambda), green, g, f })
    }

    pub fn green(&self) -> &GreenEvaluator {
        &self.green
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    /// Largest `|x|_inf` the torus represents without aliasing.
    pub fn max_radius(&self) -> u32 {
        (self.f.side() / 2) as u32
    }

    pub fn table(&self, points: &[LatticePoint]) -> Result<TwoPointTable> {
        for x in points {
            if x.dim() != self.dim {
                return Err(Error::Mismatch(format!("point {x} is not in dimension {}", self.dim)));
            }
            if x.linf_norm() > self.max_radius() {
                return Err(Error::InvalidArgument(format!("point {x} lies beyond the torus half-side {}", self.max_radius())));
            }
        }
        let c = self.green.eval_many(points)?;
        let rows = points
            .iter()
            .zip(c)
            .map(|(x, c_mu)| {
                let f = self.f.get(x.coords());
                TwoPointRow {
                    x: x.clone(),
                    g_direct: self.g.as_ref().map(|g| g.get(x.coords())),
                    c_mu,
                    f,
                    g: self.lambda * c_mu + f,
                }
            })
            .collect();
        Ok(TwoPointTable {
            lambda: self.lambda,
            coupling: self.green.coupling(),
            torus_side: self.f.side(),
            rows,
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct BootstrapSample {
    pub z: BigRational,
    pub b: f64,
    pub argmax: LatticePoint,
    /// The maximizer sits on the box boundary, so the box may undercount.
    pub on_boundary: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct BootstrapReport {
    pub box_radius: u32,
    pub samples: Vec<BootstrapSample>,
}

/// `b_box(z) = max_{|x|_inf <= R} G_z(x) / C_{1/Omega}(x)` with
/// `G_z = lambda C_mu + f` read from `table`.
pub fn bootstrap_b(z: &BigRational, table: &TwoPointTable, critical: &GreenEvaluator, box_radius: u32) -> Result<BootstrapSample> {
    if critical.coupling() != 1.0 {
        return Err(Error::Precondition("bootstrap ratio is taken against C_{1/Omega}".into()));
    }
    if z.is_negative() {
        return Err(Error::InvalidArgument("z must be nonnegative".into()));
    }
    let rows: Vec<&TwoPointRow> = table.rows.iter().filter(|r| r.x.linf_norm() <= box_radius).collect();
    if rows.is_empty() {
        return Err(Error::InvalidArgument("no table rows inside the box".into()));
    }
    let points: Vec<LatticePoint> = rows.iter().map(|r| r.x.clone()).collect();
    let c = critical.eval_many(&points)?;
    let mut best = (f64::NEG_INFINITY, 0usize);
    for (i, (r, c)) in rows.iter().zip(&c).enumerate() {
        let ratio = r.g / c;
        if ratio > best.0 {
            best = (ratio, i);
        }
    }
    let argmax = rows[best.1].x.clone();
    Ok(BootstrapSample { z: z.clone(), b: best.0, on_boundary: argmax.linf_norm() == box_radius, argmax })
}
