//! The `report` subcommand: every stage, one JSON document, sections that
//! fail independently.

use lacewalk::critical::{decay_fit, decompose, zc_estimate, Decomposition, TwoPointSolver, ZcEstimate};
use lacewalk::fit::LinearFit;
use lacewalk::fourier::{
    ehat_scaling_audit, fhat_l1_audit, infrared_scan, max_fhat_derivative, HatEvaluator, MultiIndex, ScalingOptions,
};
use lacewalk::green::GreenEvaluator;
use lacewalk::lace::{pi_decay_audit, verify_recursion};
use lacewalk::lattice::{rational_to_f64, representatives_in_box};
use lacewalk::LatticePoint;
use num_rational::BigRational;
use serde_json::{json, Map, Value};

use crate::commands::{
    bootstrap_samples, box_table, decay_audit_json, decomposition_json, default_bootstrap_specs, fhat_at,
    identity_json, infrared_json, two_point_options, Outcome,
};
use crate::config::{RunConfig, ZSpec};
use crate::failure::{error_object, Failure};
use crate::pipeline::{sensitivity, z_json, Model};

pub const SCHEMA_ID: &str = "lacewalk-report/1";

/// Radii (along the first axis) used by the decay fits.
pub fn decay_radii(cfg: &RunConfig) -> Vec<u32> {
    (4..=12.min(cfg.torus as u32 / 2)).collect()
}

/// Axial and mixed multi-indices of order 0..=3 that fit in `dim`.
pub fn scaling_alphas(dim: usize) -> Vec<MultiIndex> {
    let shapes: [&[u32]; 7] = [&[], &[1], &[2], &[1, 1], &[3], &[2, 1], &[1, 1, 1]];
    shapes
        .iter()
        .filter(|s| s.len() <= dim)
        .map(|s| {
            let mut c = vec![0u32; dim];
            c[..s.len()].copy_from_slice(s);
            MultiIndex::new(&c)
        })
        .collect()
}

pub fn fit_json(f: &LinearFit) -> Value {
    json!({ "slope": f.slope, "slope_stderr": f.slope_stderr, "intercept": f.intercept, "r_squared": f.r_squared })
}

pub fn zc_json(e: &ZcEstimate) -> Value {
    json!({
        "order": e.order,
        "estimate": e.estimate,
        "error_bar": e.error_bar,
        "accelerated_spread": e.accelerated_spread,
        "ratios": e.ratios,
        "accelerated": e.accelerated,
        "two_step_ratios": e.two_step_ratios,
    })
}

struct Sections {
    map: Map<String, Value>,
    failed: Vec<String>,
}

impl Sections {
    fn run(&mut self, name: &str, f: impl FnOnce() -> Result<Value, Failure>) {
        let v = match f() {
            Ok(mut v) => {
                v["status"] = json!("ok");
                v
            }
            Err(e) => {
                self.failed.push(name.to_string());
                json!({ "status": "error", "error": error_object(&e) })
            }
        };
        self.map.insert(name.to_string(), v);
    }
}

fn needs<T>(r: &Result<T, Failure>) -> Result<&T, Failure> {
    r.as_ref().map_err(|e| match e {
        Failure::Module(m) => Failure::Module(m.clone()),
        other => other.clone(),
    })
}

fn axis_points(dim: usize, radii: &[u32]) -> Vec<LatticePoint> {
    radii.iter().map(|&r| LatticePoint::on_axis(dim, r as i32)).collect()
}

pub fn report(cfg: &RunConfig) -> Result<Outcome, Failure> {
    let model = Model::build(cfg)?;
    let dim = cfg.dim;
    let spec = cfg.single_z(ZSpec::Auto(0.9))?;
    let z: Result<BigRational, Failure> = model.resolve(&spec);
    let mut s = Sections { map: Map::new(), failed: Vec::new() };
    let mut side_tables = Vec::new();

    s.run("enumeration", || {
        Ok(json!({
            "entries": model.g.len(),
            "chi": model.chi.coeffs().iter().map(|c| c.to_string()).collect::<Vec<_>>(),
        }))
    });
    s.run("verification", || {
        let r = verify_recursion(&model.g, &model.pi)?;
        Ok(json!({
            "max_order_verified": r.max_order_verified,
            "entries_compared": r.entries_compared,
            "pi_is_zero": r.pi_is_zero,
        }))
    });
    s.run("critical_point", || {
        let e = model.zc.clone()?;
        let by_order: Vec<Value> = (5..=cfg.order)
            .filter_map(|n| zc_estimate(&model.chi.with_order(n), dim).ok())
            .map(|e| json!({ "order": e.order, "estimate": e.estimate, "error_bar": e.error_bar }))
            .collect();
        let mut v = zc_json(&e);
        v["by_order"] = json!(by_order);
        v["lower_bound"] = json!(1.0 / (2 * dim) as f64);
        Ok(v)
    });

    let dec: Result<Decomposition, Failure> = needs(&z).and_then(|z| Ok(decompose(&model.pi, z)?));
    s.run("decomposition", || {
        let d = needs(&dec)?;
        let mut v = decomposition_json(d)?;
        let beta = rational_to_f64(&cfg.beta);
        v["lambda_minus_one_over_beta"] = json!(if beta > 0.0 { Some((rational_to_f64(&d.lambda) - 1.0) / beta) } else { None });
        Ok(v)
    });
    s.run("pi_decay", || {
        let z = needs(&z)?;
        Ok(decay_audit_json(&pi_decay_audit(&model.pi, &cfg.beta, rational_to_f64(z))?))
    });
    s.run("infrared", || {
        let z = needs(&z)?;
        Ok(infrared_json(&infrared_scan(&fhat_at(&model.pi, z)?, cfg.grid)?, dim))
    });
    s.run("ehat_scaling", || {
        let d = needs(&dec)?;
        let ehat = HatEvaluator::from_function(&d.e)?;
        let r = ehat_scaling_audit(&ehat, &scaling_alphas(dim), &ScalingOptions::default())?;
        let rows: Vec<Value> = r
            .rows
            .iter()
            .map(|row| {
                json!({
                    "alpha": row.alpha.components(),
                    "order": row.alpha.order(),
                    "expected_slope": row.expected_slope,
                    "fit": row.fit.as_ref().map(fit_json),
                    "amplitude": row.amplitude,
                    "deviation": row.deviation,
                    "maxima": row.maxima,
                    "log_corrected": row.log_corrected.map(|l| json!({
                        "slope": l.slope, "log_coefficient": l.log_coefficient, "intercept": l.intercept,
                    })),
                })
            })
            .collect();
        Ok(json!({ "radii": r.radii, "directions": r.directions, "rows": rows }))
    });
    s.run("fhat_l1", || {
        let d = needs(&dec)?;
        let alphas: Vec<MultiIndex> = (0..=max_fhat_derivative(dim)).map(|o| MultiIndex::axial(dim, 0, o)).collect();
        let ehat = HatEvaluator::from_function(&d.e)?;
        let fhat = HatEvaluator::from_function(&d.f)?;
        let r = fhat_l1_audit(rational_to_f64(&d.coupling()), &ehat, &fhat, &alphas, cfg.l1_grid)?;
        let beta = rational_to_f64(&cfg.beta);
        let rows: Vec<Value> = r
            .rows
            .iter()
            .map(|row| {
                json!({
                    "alpha": row.alpha.components(),
                    "l1": row.l1,
                    "l1_coarse": row.l1_coarse,
                    "relative_change": row.relative_change,
                    "accuracy_warning": row.accuracy_warning,
                    "ratio_to_beta": if beta > 0.0 { Some(row.l1 / beta) } else { None },
                })
            })
            .collect();
        Ok(json!({ "points_per_axis": r.points_per_axis, "rows": rows }))
    });

    let solver: Result<TwoPointSolver, Failure> = needs(&dec).and_then(|d| Ok(TwoPointSolver::new(d, &two_point_options(cfg))?));
    s.run("two_point", || {
        let solver = needs(&solver)?;
        let pts = representatives_in_box(dim, cfg.box_radius);
        let table = solver.table(&pts)?;
        let critical = if dim >= 3 { Some(GreenEvaluator::critical(dim)?.eval_many(&pts)?) } else { None };
        side_tables.push(("two_point".to_string(), box_table(&table, critical.as_deref(), dim)));
        let mut v = identity_json(&table);
        v["box_radius"] = json!(cfg.box_radius);
        Ok(v)
    });
    s.run("bootstrap", || {
        let mut specs = default_bootstrap_specs();
        if !specs.contains(&spec) {
            specs.push(spec.clone());
        }
        let (samples, table) = bootstrap_samples(&model, cfg, &specs)?;
        side_tables.push(("bootstrap".to_string(), table));
        Ok(json!({ "box_radius": cfg.box_radius, "samples": samples }))
    });
    s.run("decay_fits", || {
        let solver = needs(&solver)?;
        let radii = decay_radii(cfg);
        let pts = axis_points(dim, &radii);
        let t = solver.table(&pts)?;
        let g: Vec<(f64, f64)> = t.rows.iter().map(|r| (f64::from(r.x.coords()[0]), r.g)).collect();
        let f: Vec<(f64, f64)> = t.rows.iter().map(|r| (f64::from(r.x.coords()[0]), r.f)).collect();
        let fit_f = if f.iter().all(|(_, v)| *v == 0.0) { None } else { Some(fit_json(&decay_fit(&f)?)) };
        let mut v = json!({
            "radii": radii,
            "direction": "axis",
            "g": fit_json(&decay_fit(&g)?),
            "f": fit_f,
            "expected_g_exponent": -(dim as f64 - 2.0),
        });
        if dim >= 3 {
            let c = GreenEvaluator::critical(dim)?.eval_many(&pts)?;
            let cs: Vec<(f64, f64)> = radii.iter().zip(c).map(|(&r, v)| (f64::from(r), v)).collect();
            v["c_critical"] = fit_json(&decay_fit(&cs)?);
        }
        Ok(v)
    });
    s.run("truncation_sensitivity", || {
        let z = needs(&z)?;
        let d = needs(&dec)?;
        let prev_pi = model.pi_previous_order();
        let prev = decompose(&prev_pi, z)?;
        let mut rows = vec![
            sensitivity("lambda", rational_to_f64(&d.lambda), rational_to_f64(&prev.lambda)),
            sensitivity("mu_omega", rational_to_f64(&d.coupling()), rational_to_f64(&prev.coupling())),
            sensitivity("fhat_zero", rational_to_f64(&d.fhat_zero()), rational_to_f64(&prev.fhat_zero())),
        ];
        let ir = infrared_scan(&fhat_at(&model.pi, z)?, cfg.grid)?;
        let ir_prev = infrared_scan(&fhat_at(&prev_pi, z)?, cfg.grid)?;
        rows.push(sensitivity("c_est", ir.c_est, ir_prev.c_est));
        Ok(json!({ "z": z_json(z), "rows": rows }))
    });

    let status = if s.failed.is_empty() { "ok" } else { "partial" };
    let z_doc = match &z {
        Ok(z) => json!({ "spec": spec.describe(), "resolved": z_json(z) }),
        Err(e) => json!({ "spec": spec.describe(), "error": error_object(e) }),
    };
    let doc = json!({
        "schema": SCHEMA_ID,
        "config": {
            "dim": dim,
            "beta": cfg.beta.to_string(),
            "order": cfg.order,
            "box_radius": cfg.box_radius,
            "grid": cfg.grid,
            "torus": cfg.torus,
            "l1_grid": cfg.l1_grid,
            "work_limit": cfg.work_limit.to_string(),
        },
        "z": z_doc,
        "status": status,
        "failed_sections": s.failed,
        "sections": Value::Object(s.map),
    });
    let status = if s.failed.is_empty() { Ok(()) } else { Err(Failure::Sections(s.failed.clone())) };
    Ok(Outcome { json: doc, text: None, table: None, side_tables, status })
}
