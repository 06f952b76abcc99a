//! Stages shared by the subcommands.

use lacewalk::critical::{check_evaluable, round_fugacity, zc_estimate, ZcEstimate};
use lacewalk::lace::{kernel_from_g, PiSeries};
use lacewalk::lattice::{rational, rational_to_f64, SpatialSeries, ZPolynomial};
use lacewalk::walks::{chi_series, enumerate_g, EnumerationOptions, WalkWeightParams};
use lacewalk::LatticePoint;
use num_rational::BigRational;
use serde_json::{json, Value};

use crate::config::{RunConfig, ZSpec};
use crate::failure::Failure;

pub fn enumerate(cfg: &RunConfig) -> Result<SpatialSeries, Failure> {
    let params = WalkWeightParams::new(cfg.dim, cfg.beta.clone(), cfg.order)?;
    let g = enumerate_g(&params, &EnumerationOptions { work_limit: cfg.work_limit })?;
    Ok(g.series)
}

/// `G`, `Pi` and `chi` for one configuration, with the critical-point
/// estimate when the series is long enough.
pub struct Model {
    pub g: SpatialSeries,
    pub pi: PiSeries,
    pub chi: ZPolynomial,
    pub zc: Result<ZcEstimate, lacewalk::Error>,
}

impl Model {
    pub fn build(cfg: &RunConfig) -> Result<Self, Failure> {
        let g = enumerate(cfg)?;
        let pi = kernel_from_g(&g)?;
        let chi = chi_series(&g);
        let zc = zc_estimate(&chi, cfg.dim);
        Ok(Model { g, pi, chi, zc })
    }

    pub fn dim(&self) -> usize {
        self.g.dim()
    }

    /// `z_c-hat`; exactly `1/Omega` when the kernel vanishes.
    pub fn zc_hat(&self) -> Result<f64, Failure> {
        if self.pi.is_zero() {
            return Ok(1.0 / (2 * self.dim()) as f64);
        }
        match &self.zc {
            Ok(e) => Ok(e.estimate),
            Err(e) => Err(Failure::Module(e.clone())),
        }
    }

    /// The fugacity named by `spec`, without the evaluability check.
    pub fn resolve_exact(&self, spec: &ZSpec) -> Result<BigRational, Failure> {
        Ok(match spec {
            ZSpec::Exact(z) => z.clone(),
            ZSpec::Auto(f) => {
                if self.pi.is_zero() {
                    // 1/Omega is exact here; keep the fraction exact too
                    let den = (2 * self.dim() as i64) * 1_000_000;
                    rational(((f * 1e6).round()) as i64, den)
                } else {
                    round_fugacity(f * self.zc_hat()?)?
                }
            }
        })
    }

    pub fn check(&self, z: &BigRational) -> Result<(), Failure> {
        let zc = self.zc_hat()?;
        check_evaluable(&self.pi, z, zc)?;
        Ok(())
    }

    /// The fugacity named by `spec`, admitted for numerical evaluation.
    pub fn resolve(&self, spec: &ZSpec) -> Result<BigRational, Failure> {
        let z = self.resolve_exact(spec)?;
        self.check(&z)?;
        Ok(z)
    }

    /// The kernel truncated one order lower.
    pub fn pi_previous_order(&self) -> PiSeries {
        let n = self.pi.pi.order().saturating_sub(1);
        PiSeries { pi: self.pi.pi.with_order(n), f: self.pi.f.with_order(n) }
    }
}

pub fn point_json(x: &LatticePoint) -> Value {
    json!(x.coords())
}

pub fn rational_json(r: &BigRational) -> Value {
    json!(r.to_string())
}

pub fn z_json(z: &BigRational) -> Value {
    json!({ "exact": z.to_string(), "value": rational_to_f64(z) })
}

/// `(value at N - value at N-1) / |value at N|`.
pub fn sensitivity(quantity: &str, value: f64, previous: f64) -> Value {
    let rel = if value != 0.0 { (value - previous) / value.abs() } else { previous.abs() };
    json!({ "quantity": quantity, "value": value, "previous_order": previous, "relative_change": rel })
}
