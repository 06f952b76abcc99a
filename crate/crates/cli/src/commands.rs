use std::f64::consts::PI;
use std::fs;
use std::path::Path;

use lacewalk::critical::{
    bootstrap_b, decompose, Decomposition, TwoPointOptions, TwoPointSolver, TwoPointTable, BOOTSTRAP_ASSUMED,
    BOOTSTRAP_IMPROVED,
};
use lacewalk::fourier::{infrared_scan, HatEvaluator, InfraredReport};
use lacewalk::green::{green_asymptotic_audit, resolvent_residual, Direction, GreenEvaluator};
use lacewalk::lace::{kernel_from_g, pi_decay_audit, pi_from_f, verify_recursion, PiDecayReport, PiSeries};
use lacewalk::lattice::{rational, rational_to_f64, representatives_in_box, SpatialSeries};
use lacewalk::walks::{enumerate_g, EnumerationOptions, WalkWeightParams};
use lacewalk::LatticePoint;
use num_rational::BigRational;
use serde_json::{json, Value};

use crate::config::{Format, RunConfig, VerifyArgs, ZSpec};
use crate::failure::Failure;
use crate::pipeline::{point_json, rational_json, sensitivity, z_json, Model};
use crate::series_io::SeriesFile;
use crate::tables::Table;

/// What a command hands back for writing.
pub struct Outcome {
    pub json: Value,
    /// Preformatted document that replaces `json` (series files).
    pub text: Option<String>,
    pub table: Option<Table>,
    /// Extra CSV files written next to `--out`, by suffix.
    pub side_tables: Vec<(String, Table)>,
    pub status: Result<(), Failure>,
}

impl Outcome {
    pub fn json(json: Value) -> Self {
        Outcome { json, text: None, table: None, side_tables: Vec::new(), status: Ok(()) }
    }

    pub fn with_table(mut self, t: Table) -> Self {
        self.table = Some(t);
        self
    }

    /// The document written for `format`.
    pub fn render(&self, format: Format) -> Result<String, Failure> {
        match format {
            Format::Json => Ok(match &self.text {
                Some(t) => t.clone(),
                None => render_json(&self.json),
            }),
            Format::Csv => match &self.table {
                Some(t) => Ok(t.render()),
                None => Err(Failure::Usage("this command has no CSV table; use --format json".into())),
            },
        }
    }
}

pub fn render_json(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("values serialize");
    s.push('\n');
    s
}

pub fn config_json(cfg: &RunConfig) -> Value {
    json!({ "dim": cfg.dim, "beta": cfg.beta.to_string(), "order": cfg.order })
}

fn series_table(s: &SpatialSeries) -> Table {
    let mut t = Table::new(&coord_headers(s.dim(), &["orbit_size", "n", "coefficient"]));
    for (x, p) in s.entries() {
        for (n, c) in p.terms() {
            let mut row = coord_cells(x);
            row.extend([x.orbit_size().to_string(), n.to_string(), c.to_string()]);
            t.push(row);
        }
    }
    t
}

fn coord_headers(dim: usize, rest: &[&str]) -> Vec<String> {
    (1..=dim).map(|j| format!("x{j}")).chain(rest.iter().map(|s| s.to_string())).collect()
}

fn coord_cells(x: &LatticePoint) -> Vec<String> {
    x.coords().iter().map(|c| c.to_string()).collect()
}

pub fn enumerate(cfg: &RunConfig) -> Result<Outcome, Failure> {
    let g = crate::pipeline::enumerate(cfg)?;
    let file = SeriesFile::from_series("G", &cfg.beta, &g);
    let mut out = Outcome::json(Value::Null).with_table(series_table(&g));
    out.text = Some(file.render());
    Ok(out)
}

fn read_series(path: &Path, kind: &str) -> Result<(SeriesFile, SpatialSeries), Failure> {
    let text = fs::read_to_string(path).map_err(|e| Failure::Io(format!("{}: {e}", path.display())))?;
    let file = SeriesFile::parse(&text)?;
    if file.meta.kind != kind {
        return Err(Failure::Usage(format!("{} holds a {:?} series, expected {kind:?}", path.display(), file.meta.kind)));
    }
    let s = file.to_series()?;
    Ok((file, s))
}

pub fn verify(args: &VerifyArgs, cfg: &RunConfig) -> Result<Outcome, Failure> {
    let (g, beta, source) = match &args.input {
        Some(path) => {
            let (file, g) = read_series(path, "G")?;
            (g, file.beta()?, "input")
        }
        None => (crate::pipeline::enumerate(cfg)?, cfg.beta.clone(), "enumerated"),
    };
    let pi = match &args.kernel {
        Some(path) => {
            let (_, pi) = read_series(path, "Pi")?;
            let delta = SpatialSeries::delta(pi.dim(), pi.order())?;
            let step = SpatialSeries::fugacity_step(pi.dim(), pi.order())?;
            pi_from_f(&delta.checked_sub(&step)?.checked_sub(&pi)?)?
        }
        None if args.input.is_some() => {
            // an independent kernel, from walks rather than from the file
            let params = WalkWeightParams::new(g.dim(), beta.clone(), g.order())?;
            let fresh = enumerate_g(&params, &EnumerationOptions { work_limit: cfg.work_limit })?;
            kernel_from_g(&fresh.series)?
        }
        None => kernel_from_g(&g)?,
    };
    let report = verify_recursion(&g, &pi)?;
    Ok(Outcome::json(json!({
        "command": "verify",
        "config": { "dim": g.dim(), "beta": beta.to_string(), "order": g.order() },
        "source": source,
        "kernel": if args.kernel.is_some() { "input" } else if args.input.is_some() { "enumerated" } else { "inverted" },
        "status": "ok",
        "max_order_verified": report.max_order_verified,
        "entries_compared": report.entries_compared,
        "pi_is_zero": report.pi_is_zero,
    })))
}

pub fn decay_audit_json(a: &PiDecayReport) -> Value {
    json!({
        "z": a.z,
        "exponent": a.exponent,
        "k_beta": a.k_beta,
        "k_fit": a.k_fit,
        "argmax": point_json(&a.argmax),
        "k_beta_previous_order": a.k_beta_previous_order,
        "relative_change": a.relative_change,
        "truncation_warning": a.truncation_warning,
    })
}

pub fn pi(cfg: &RunConfig) -> Result<Outcome, Failure> {
    let model = Model::build(cfg)?;
    let audit = model
        .resolve(&cfg.single_z(ZSpec::Auto(0.9))?)
        .and_then(|z| Ok((pi_decay_audit(&model.pi, &cfg.beta, rational_to_f64(&z))?, z)));
    let mut file = SeriesFile::from_series("Pi", &cfg.beta, &model.pi.pi);
    file.audit = Some(match audit {
        Ok((a, z)) => json!({ "z": z_json(&z), "decay": decay_audit_json(&a) }),
        Err(e) => json!({ "skipped": crate::failure::error_object(&e) }),
    });
    let mut out = Outcome::json(Value::Null).with_table(series_table(&model.pi.pi));
    out.text = Some(file.render());
    Ok(out)
}

pub const GREEN_RADII: std::ops::RangeInclusive<u32> = 1..=12;

pub fn green(cfg: &RunConfig) -> Result<Outcome, Failure> {
    let omega = 2 * cfg.dim as i64;
    let mu = match cfg.single_z(ZSpec::Exact(rational(1, omega)))? {
        ZSpec::Exact(z) => z,
        ZSpec::Auto(_) => return Err(Failure::Usage("green takes an explicit --z (the random-walk fugacity mu)".into())),
    };
    let ev = GreenEvaluator::new(cfg.dim, rational_to_f64(&mu))?;
    let residual = resolvent_residual(&ev, cfg.box_radius)?;
    let radii: Vec<u32> = GREEN_RADII.collect();
    let mut table = Table::new(&["direction", "r", "distance", "value", "ratio"].map(String::from));
    let mut doc = json!({
        "command": "green",
        "dim": cfg.dim,
        "mu": z_json(&mu),
        "coupling": ev.coupling(),
        "tolerance": ev.tolerance(),
        "box_radius": cfg.box_radius,
        "resolvent_residual": residual,
    });
    if ev.coupling() == 1.0 && cfg.dim >= 3 {
        let audit = green_asymptotic_audit(&ev, &radii)?;
        let rows: Vec<Value> = audit
            .rows
            .iter()
            .map(|r| {
                json!({ "direction": r.direction.as_str(), "x": point_json(&r.point), "distance": r.distance, "value": r.value, "ratio": r.ratio })
            })
            .collect();
        for r in &audit.rows {
            let step = r.point.coords()[0];
            table.push(vec![r.direction.as_str().into(), step.to_string(), fmt(r.distance), fmt(r.value), fmt(r.ratio)]);
        }
        doc["amplitude"] = json!(audit.amplitude);
        doc["rows"] = json!(rows);
        doc["axis_converges_monotonically"] = json!(audit.axis_converges_monotonically);
    } else {
        let mut rows = Vec::new();
        for dir in [Direction::Axis, Direction::Diagonal] {
            let pts: Vec<LatticePoint> = radii.iter().map(|&r| dir.point(cfg.dim, r as i32)).collect();
            let values = ev.eval_many(&pts)?;
            for (p, v) in pts.iter().zip(values) {
                let dist = (p.norm_sq() as f64).sqrt();
                rows.push(json!({ "direction": dir.as_str(), "x": point_json(p), "distance": dist, "value": v }));
                table.push(vec![dir.as_str().into(), p.coords()[0].to_string(), fmt(dist), fmt(v), String::new()]);
            }
        }
        doc["rows"] = json!(rows);
    }
    Ok(Outcome::json(doc).with_table(table))
}

pub fn fmt(v: f64) -> String {
    serde_json::to_string(&v).expect("floats serialize")
}

/// `4 / (pi^2 Omega)`, the infrared constant of the free walk.
pub fn free_infrared_bound(dim: usize) -> f64 {
    4.0 / (PI * PI * (2 * dim) as f64)
}

pub fn infrared_json(r: &InfraredReport, dim: usize) -> Value {
    let bound = free_infrared_bound(dim);
    json!({
        "grid": r.grid,
        "points_scanned": r.points_scanned,
        "c_est": r.c_est,
        "argmin": r.argmin,
        "fhat_at_argmin": r.fhat_at_argmin,
        "min_fhat": r.min_fhat,
        "fhat_at_zero": r.fhat_at_zero,
        "violation": r.violation,
        "free_bound": bound,
        "meets_free_bound": r.c_est >= bound - 1e-9,
    })
}

pub fn fhat_at(pi: &PiSeries, z: &BigRational) -> Result<HatEvaluator, Failure> {
    Ok(HatEvaluator::from_function(&pi.f.evaluate(z)?)?)
}

pub fn infrared(cfg: &RunConfig) -> Result<Outcome, Failure> {
    let model = Model::build(cfg)?;
    let z = model.resolve(&cfg.single_z(ZSpec::Auto(0.9))?)?;
    let scan = infrared_scan(&fhat_at(&model.pi, &z)?, cfg.grid)?;
    let mut doc = infrared_json(&scan, cfg.dim);
    doc["command"] = json!("infrared");
    doc["config"] = config_json(cfg);
    doc["z"] = z_json(&z);
    Ok(Outcome::json(doc))
}

pub fn decomposition_json(d: &Decomposition) -> Result<Value, Failure> {
    let (m0, m2) = d.moment_residuals()?;
    let e: Vec<Value> = d
        .e
        .entries()
        .map(|(x, v)| json!({ "x": point_json(x), "orbit_size": x.orbit_size(), "value": v.to_string() }))
        .collect();
    Ok(json!({
        "z": z_json(&d.z),
        "lambda": rational_json(&d.lambda),
        "lambda_value": rational_to_f64(&d.lambda),
        "mu": rational_json(&d.mu),
        "mu_omega": rational_to_f64(&d.coupling()),
        "pi_hat_zero": rational_to_f64(&d.pi_hat_zero),
        "pi_second_moment": rational_to_f64(&d.pi_second_moment),
        "fhat_zero": rational_to_f64(&d.fhat_zero()),
        "moment_residuals": { "zeroth": m0.to_string(), "second": m2.to_string() },
        "e": e,
    }))
}

pub fn two_point_options(cfg: &RunConfig) -> TwoPointOptions {
    TwoPointOptions { torus_side: cfg.torus, ..TwoPointOptions::default() }
}

/// The box table with `C_{1/Omega}` alongside; that column is empty in
/// `d <= 2`, where it diverges.
pub fn box_table(table: &TwoPointTable, critical: Option<&[f64]>, dim: usize) -> Table {
    let mut t = Table::new(&coord_headers(dim, &["orbit_size", "g_direct", "g", "c_mu", "c_critical", "f", "ratio"]));
    for (i, r) in table.rows.iter().enumerate() {
        let c = critical.map(|c| c[i]);
        let mut row = coord_cells(&r.x);
        row.extend([
            r.x.orbit_size().to_string(),
            r.g_direct.map(fmt).unwrap_or_default(),
            fmt(r.g),
            fmt(r.c_mu),
            c.map(fmt).unwrap_or_default(),
            fmt(r.f),
            c.map(|c| fmt(r.g / c)).unwrap_or_default(),
        ]);
        t.push(row);
    }
    t
}

pub fn identity_json(table: &TwoPointTable) -> Value {
    match table.identity_residual() {
        Some((res, max_g)) => json!({
            "available": true,
            "max_residual": res,
            "max_abs_g": max_g,
            "relative_residual": res / max_g,
            "max_abs_f": table.max_abs_f(),
            "torus_side": table.torus_side,
        }),
        None => json!({ "available": false, "max_abs_f": table.max_abs_f(), "torus_side": table.torus_side }),
    }
}

/// The exact part runs at any `z`; the numerical identity table only
/// inside the evaluable range.
pub fn decompose_cmd(cfg: &RunConfig) -> Result<Outcome, Failure> {
    let model = Model::build(cfg)?;
    let z = model.resolve_exact(&cfg.single_z(ZSpec::Auto(0.9))?)?;
    let dec = decompose(&model.pi, &z)?;
    let prev = decompose(&model.pi_previous_order(), &z)?;
    let mut doc = decomposition_json(&dec)?;
    doc["command"] = json!("decompose");
    doc["config"] = config_json(cfg);
    doc["box_radius"] = json!(cfg.box_radius);
    doc["truncation_sensitivity"] = json!([
        sensitivity("lambda", rational_to_f64(&dec.lambda), rational_to_f64(&prev.lambda)),
        sensitivity("mu_omega", rational_to_f64(&dec.coupling()), rational_to_f64(&prev.coupling())),
    ]);
    let mut out = Outcome::json(Value::Null);
    match model.check(&z) {
        Ok(()) => {
            let solver = TwoPointSolver::new(&dec, &two_point_options(cfg))?;
            let pts = representatives_in_box(cfg.dim, cfg.box_radius);
            let table = solver.table(&pts)?;
            let critical = if cfg.dim >= 3 { Some(GreenEvaluator::critical(cfg.dim)?.eval_many(&pts)?) } else { None };
            doc["identity"] = identity_json(&table);
            out.table = Some(box_table(&table, critical.as_deref(), cfg.dim));
        }
        Err(e) => {
            doc["identity"] = json!({ "available": false, "skipped": crate::failure::error_object(&e) });
        }
    }
    out.json = doc;
    Ok(out)
}

pub const BOOTSTRAP_FRACTIONS: [f64; 3] = [0.5, 0.8, 0.95];

pub fn bootstrap_samples(model: &Model, cfg: &RunConfig, specs: &[ZSpec]) -> Result<(Vec<Value>, Table), Failure> {
    let critical = GreenEvaluator::critical(cfg.dim)?;
    let mut table = Table::new(&coord_headers(cfg.dim, &["z", "b", "on_boundary"]));
    let mut samples = Vec::new();
    for spec in specs {
        let z = model.resolve(spec)?;
        let dec = decompose(&model.pi, &z)?;
        let solver = TwoPointSolver::new(&dec, &two_point_options(cfg))?;
        let t = solver.table(&representatives_in_box(cfg.dim, cfg.box_radius))?;
        let s = bootstrap_b(&z, &t, &critical, cfg.box_radius)?;
        let mut row = coord_cells(&s.argmax);
        row.extend([z.to_string(), fmt(s.b), s.on_boundary.to_string()]);
        table.push(row);
        samples.push(json!({
            "z_spec": spec.describe(),
            "z": z_json(&z),
            "b": s.b,
            "argmax": point_json(&s.argmax),
            "on_boundary": s.on_boundary,
            "within_improved_bound": s.b <= BOOTSTRAP_IMPROVED,
            "within_assumed_bound": s.b <= BOOTSTRAP_ASSUMED,
        }));
    }
    Ok((samples, table))
}

pub fn default_bootstrap_specs() -> Vec<ZSpec> {
    BOOTSTRAP_FRACTIONS.iter().map(|&f| ZSpec::Auto(f)).collect()
}

pub fn bootstrap(cfg: &RunConfig) -> Result<Outcome, Failure> {
    let model = Model::build(cfg)?;
    let specs = cfg.z.clone().unwrap_or_else(default_bootstrap_specs);
    let (samples, table) = bootstrap_samples(&model, cfg, &specs)?;
    Ok(Outcome::json(json!({
        "command": "bootstrap",
        "config": config_json(cfg),
        "z_c_hat": model.zc_hat()?,
        "box_radius": cfg.box_radius,
        "thresholds": { "improved": BOOTSTRAP_IMPROVED, "assumed": BOOTSTRAP_ASSUMED },
        "samples": samples,
    }))
    .with_table(table))
}
