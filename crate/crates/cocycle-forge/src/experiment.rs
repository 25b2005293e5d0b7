//! Experiment runner: parsed config in, CSV and JSON artifacts out.
//!
//! Every table carries the config hash and the seed in `#` header rows, and
//! numbers are printed with 17 significant digits so downstream comparisons
//! at 1e-12 survive the round trip. All computation happens before any file
//! is created: a failing run leaves no partial output. Reruns with the same
//! config and seed reproduce every CSV byte for byte (the manifest also
//! records wall-clock time, so the manifest itself is exempt).

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha12Rng;
use sha2::{Digest, Sha256};

use crate::averaging::{frobenius_compare, tauberian_probe, von_neumann_residual, TwistedSequence};
use crate::base::{BaseKind, BasePoint, BaseSystem, SampleGrid};
use crate::cocycle::CocycleSpec;
use crate::config::{Config, ExperimentKind};
use crate::drift;
use crate::error::{Error, Result};
use crate::oracle;
use crate::registry::{AngleFn, TrigPoly, TwistMap, VectorMap};
use crate::section::Section;
use crate::solver;

#[derive(Debug, Clone, serde::Serialize)]
pub struct RunManifest {
    pub version: String,
    pub config_hash: String,
    pub seed: u64,
    pub experiment: String,
    pub wall_ms: u64,
    pub summary: serde_json::Value,
    pub outputs: Vec<String>,
}

#[derive(Debug)]
pub struct RunOutcome {
    pub manifest: RunManifest,
    /// Set when the experiment itself flags a contradiction; the CLI turns
    /// this into exit code 3.
    pub anomaly: Option<String>,
    pub out_dir: PathBuf,
}

pub fn config_hash(cfg: &Config) -> String {
    let digest = Sha256::digest(cfg.canonical.as_bytes());
    digest.iter().map(|b| format!("{b:02x}")).collect()
}

/// Buffered output files; nothing touches the filesystem until `flush`.
struct OutputSet {
    hash: String,
    seed: u64,
    files: Vec<(String, String)>,
}

fn fmt(x: f64) -> String {
    format!("{x:.16e}")
}

impl OutputSet {
    fn new(hash: String, seed: u64) -> Self {
        Self {
            hash,
            seed,
            files: Vec::new(),
        }
    }

    fn csv(&mut self, name: &str, columns: &str, rows: &[String]) {
        let mut text = String::new();
        text.push_str(&format!("# config_hash = {}\n", self.hash));
        text.push_str(&format!("# seed = {}\n", self.seed));
        text.push_str(&format!("{columns}\n"));
        for row in rows {
            text.push_str(row);
            text.push('\n');
        }
        self.files.push((name.to_string(), text));
    }

    fn json(&mut self, name: &str, value: &serde_json::Value) {
        let mut body = serde_json::to_string_pretty(value).expect("serializable value");
        body.push('\n');
        self.files.push((name.to_string(), body));
    }

    fn flush(self, dir: &Path) -> Result<Vec<String>> {
        std::fs::create_dir_all(dir)?;
        let mut names = Vec::with_capacity(self.files.len());
        for (name, text) in self.files {
            std::fs::write(dir.join(&name), text)?;
            names.push(name);
        }
        Ok(names)
    }
}

fn point_at(base: &BaseSystem, x0: f64) -> BasePoint {
    match &base.kind {
        BaseKind::CircleRotation { .. } => BasePoint::circle(x0),
        BaseKind::TorusRotation { alpha } => BasePoint::torus(vec![x0; alpha.len()]),
        BaseKind::FiniteCyclic { period } => {
            let idx = (x0 * *period as f64).round() as i64;
            BasePoint::finite(idx.rem_euclid(*period as i64) as u64, *period)
        }
    }
}

pub fn run(cfg: &Config, out_dir: &Path) -> Result<RunOutcome> {
    let started = Instant::now();
    let hash = config_hash(cfg);
    let mut out = OutputSet::new(hash.clone(), cfg.seed);
    let spec = CocycleSpec::new(cfg.base.clone(), cfg.psi.clone(), cfg.rho.clone())?;
    let grid = cfg.base.make_grid(cfg.grid_size, cfg.grid_offset)?;

    let mut anomaly = None;
    let summary = match cfg.experiment {
        ExperimentKind::Solve => run_solve(cfg, &spec, &grid, &mut out)?,
        ExperimentKind::Sweep => run_sweep(cfg, &spec, &grid, &mut out)?,
        ExperimentKind::Drift => run_drift(cfg, &spec, &grid, &mut out)?,
        ExperimentKind::Displacement => run_displacement(cfg, &spec, &grid, &mut out)?,
        ExperimentKind::TheoremB => {
            let (summary, flag) = run_theorem_b(cfg, &spec, &grid, &mut out)?;
            anomaly = flag;
            summary
        }
        ExperimentKind::Averaging => run_averaging(cfg, &spec, &grid, &mut out)?,
        ExperimentKind::OracleCheck => {
            let (summary, flag) = run_oracle_check(cfg, &mut out)?;
            anomaly = flag;
            summary
        }
    };

    let mut outputs = out.flush(out_dir)?;
    let manifest = RunManifest {
        version: env!("CARGO_PKG_VERSION").to_string(),
        config_hash: hash,
        seed: cfg.seed,
        experiment: cfg.experiment.name().to_string(),
        wall_ms: started.elapsed().as_millis() as u64,
        summary,
        outputs: {
            outputs.push("manifest.json".to_string());
            outputs
        },
    };
    let mut body = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
    body.push('\n');
    std::fs::write(out_dir.join("manifest.json"), body)?;
    Ok(RunOutcome {
        manifest,
        anomaly,
        out_dir: out_dir.to_path_buf(),
    })
}

fn solution_rows(grid: &SampleGrid, values: &[crate::isometry::FiberVector]) -> Vec<String> {
    grid.points
        .iter()
        .zip(values)
        .enumerate()
        .map(|(i, (x, v))| {
            let comps: Vec<String> = v.as_slice().iter().map(|&c| fmt(c)).collect();
            format!("{i},{},{}", fmt(x.coordinate()), comps.join(","))
        })
        .collect()
}

fn run_solve(
    cfg: &Config,
    spec: &CocycleSpec,
    grid: &SampleGrid,
    out: &mut OutputSet,
) -> Result<serde_json::Value> {
    let mut summary = Vec::new();
    for (k, &lambda) in cfg.lambdas.iter().enumerate() {
        let sol = solver::solve_u_lambda(spec, lambda, grid, cfg.eps)?;
        // residual through the series-backed view: the tabulated section
        // cannot evaluate at Tx, which is off the grid
        let residual = solver::residual(spec, lambda, &sol.series_section(spec)?, grid)?;
        out.csv(
            &format!("solution_{k}.csv"),
            "index,coord,u_components",
            &solution_rows(grid, &sol.values),
        );
        summary.push(serde_json::json!({
            "lambda": lambda,
            "sup_norm": sol.sup_norm,
            "residual": residual,
        }));
    }
    Ok(serde_json::Value::Array(summary))
}

/// Closed-form untwisted solution when the configured cocycle is a circle
/// rotation with a constant planar twist and Fourier forcing.
fn fourier_oracle(cfg: &Config) -> Result<Option<Section>> {
    let BaseKind::CircleRotation { alpha } = cfg.base.kind else {
        return Ok(None);
    };
    let Some(crate::registry::PlanarAngle::Constant(beta)) = cfg.psi.planar_angle() else {
        return Ok(None);
    };
    let VectorMap::Fourier { coeffs } = &cfg.rho else {
        return Ok(None);
    };
    let sol = oracle::fourier_solve(alpha, beta, coeffs, cfg.denom_threshold);
    if sol.is_complete() {
        Ok(Some(sol.section()?))
    } else {
        Ok(None)
    }
}

fn run_sweep(
    cfg: &Config,
    spec: &CocycleSpec,
    grid: &SampleGrid,
    out: &mut OutputSet,
) -> Result<serde_json::Value> {
    let star = fourier_oracle(cfg)?;
    let sweep = solver::sweep(spec, &cfg.lambdas, grid, cfg.eps, star.as_ref())?;
    let rows: Vec<String> = sweep
        .rows
        .iter()
        .map(|r| {
            let mut cells = vec![
                fmt(r.lambda),
                fmt(r.sup_norm),
                fmt(r.residual_lambda),
                fmt(r.residual_one),
            ];
            if let (Some(s), Some(l1), Some(l2)) = (r.sup_dist, r.l1_dist, r.l2_dist) {
                cells.extend([fmt(s), fmt(l1), fmt(l2)]);
            }
            cells.join(",")
        })
        .collect();
    let columns = if star.is_some() {
        "lambda,sup_norm,residual_lambda,residual_one,sup_dist,l1_dist,l2_dist"
    } else {
        "lambda,sup_norm,residual_lambda,residual_one"
    };
    out.csv("sweep.csv", columns, &rows);
    Ok(serde_json::json!({
        "oracle_attached": star.is_some(),
        "rows": sweep.rows,
    }))
}

fn drift_rows(est: &drift::DriftEstimate) -> Vec<String> {
    est.schedule
        .iter()
        .zip(&est.values)
        .map(|(&n, &d)| format!("{n},{},{}", fmt(d), fmt(n as f64 * d)))
        .collect()
}

fn run_drift(
    cfg: &Config,
    spec: &CocycleSpec,
    grid: &SampleGrid,
    out: &mut OutputSet,
) -> Result<serde_json::Value> {
    let est = drift::drift_estimate(spec, grid, &cfg.n_schedule)?;
    out.csv("drift.csv", "n,d_n,n_times_d_n", &drift_rows(&est));
    Ok(serde_json::to_value(&est).expect("serializable"))
}

fn displacement_rows(curve: &drift::DisplacementCurve) -> Vec<String> {
    curve
        .rows
        .iter()
        .map(|r| {
            format!(
                "{},{},{},{}",
                fmt(r.lambda),
                fmt(r.displacement),
                fmt(r.identity_bound),
                fmt(r.sup_norm)
            )
        })
        .collect()
}

fn run_displacement(
    cfg: &Config,
    spec: &CocycleSpec,
    grid: &SampleGrid,
    out: &mut OutputSet,
) -> Result<serde_json::Value> {
    let curve = drift::displacement_curve(spec, grid, &cfg.lambdas, cfg.eps)?;
    out.csv(
        "displacement.csv",
        "lambda,displacement,identity_bound,sup_norm",
        &displacement_rows(&curve),
    );
    Ok(serde_json::to_value(&curve).expect("serializable"))
}

fn frobenius_rows(report: &crate::averaging::FrobeniusReport) -> Vec<String> {
    report
        .rows
        .iter()
        .map(|r| {
            let ces: Vec<String> = r.cesaro.iter().map(|&c| fmt(c)).collect();
            let abel: Vec<String> = r.abel.iter().map(|&c| fmt(c)).collect();
            format!(
                "{},{},{},{},{}",
                r.n,
                fmt(r.lambda),
                fmt(r.discrepancy),
                ces.join(","),
                abel.join(",")
            )
        })
        .collect()
}

fn run_theorem_b(
    cfg: &Config,
    spec: &CocycleSpec,
    grid: &SampleGrid,
    out: &mut OutputSet,
) -> Result<(serde_json::Value, Option<String>)> {
    let report = drift::theorem_b_pipeline(spec, grid, &cfg.lambdas, &cfg.n_schedule, cfg.eps)?;
    out.csv("drift.csv", "n,d_n,n_times_d_n", &drift_rows(&report.drift));
    out.csv(
        "displacement.csv",
        "lambda,displacement,identity_bound,sup_norm",
        &displacement_rows(&report.curve),
    );
    out.csv(
        "frobenius.csv",
        "n,lambda,discrepancy,cesaro_components,abel_components",
        &frobenius_rows(&report.frobenius),
    );
    let value = serde_json::to_value(&report).expect("serializable");
    out.json("theorem_b.json", &value);
    Ok((value, report.anomaly))
}

fn run_averaging(
    cfg: &Config,
    spec: &CocycleSpec,
    grid: &SampleGrid,
    out: &mut OutputSet,
) -> Result<serde_json::Value> {
    let x = point_at(&cfg.base, cfg.x0);
    let seq = TwistedSequence::from_cocycle(spec);
    let cesaro = seq.cesaro_at(&x, &cfg.n_schedule)?;
    let abel = seq.abel_at(&x, &cfg.lambdas, cfg.eps)?;
    let mut rows = Vec::new();
    for (&n, v) in cfg.n_schedule.iter().zip(&cesaro) {
        let comps: Vec<String> = v.as_slice().iter().map(|&c| fmt(c)).collect();
        rows.push(format!(
            "cesaro,{},{},{}",
            fmt(n as f64),
            fmt(v.norm()),
            comps.join(",")
        ));
    }
    for (&lambda, v) in cfg.lambdas.iter().zip(&abel) {
        let comps: Vec<String> = v.as_slice().iter().map(|&c| fmt(c)).collect();
        rows.push(format!(
            "abel,{},{},{}",
            fmt(lambda),
            fmt(v.norm()),
            comps.join(",")
        ));
    }
    out.csv("averaging.csv", "kind,param,norm,components", &rows);
    let frobenius = frobenius_compare(&seq, &x, &cfg.n_schedule, cfg.eps)?;
    out.csv(
        "frobenius.csv",
        "n,lambda,discrepancy,cesaro_components,abel_components",
        &frobenius_rows(&frobenius),
    );
    let tauberian = tauberian_probe(&seq, &x, &cfg.n_schedule, cfg.eps)?;
    // second-to-last schedule entry keeps the 2n walk affordable on the
    // full grid
    let n_vn = cfg.n_schedule[cfg.n_schedule.len().saturating_sub(2)];
    let vn = von_neumann_residual(&seq, grid, n_vn)?;
    Ok(serde_json::json!({
        "frobenius_max_discrepancy": frobenius.max_discrepancy,
        "tauberian": {
            "max_term_norm": tauberian.max_term_norm,
            "sup_bound": tauberian.sup_bound,
            "bounded": tauberian.bounded,
            "discrepancy_decreasing": tauberian.discrepancy_decreasing,
        },
        "von_neumann": { "n": n_vn, "l2_cauchy_residual": vn },
    }))
}

/// Random cyclic instance: period, fiber dimension, twist and forcing all
/// drawn from the seeded stream.
fn random_instance(rng: &mut ChaCha12Rng) -> Result<(CocycleSpec, f64)> {
    let period = rng.random_range(1..=16u64);
    let dim = rng.random_range(1..=3usize);
    let lambda = match rng.random_range(0..3u8) {
        0 => 0.5,
        1 => 0.9,
        _ => 0.99,
    };
    let psi = match dim {
        1 => TwistMap::diagonal(vec![], 1, rng.random_range(0..2u8) == 0)?,
        2 => {
            let block = random_angle_fn(rng);
            TwistMap::diagonal(vec![block], 0, false)?
        }
        _ => {
            let block = random_angle_fn(rng);
            let flip = rng.random_range(0..2u8) == 0;
            TwistMap::diagonal(vec![block], 1, flip)?
        }
    };
    let components = (0..dim).map(|_| random_poly(rng)).collect();
    let rho = VectorMap::Trig { components };
    let spec = CocycleSpec::new(BaseSystem::finite(period)?, psi, rho)?;
    Ok((spec, lambda))
}

fn random_angle_fn(rng: &mut ChaCha12Rng) -> AngleFn {
    AngleFn {
        constant: rng_angle(rng),
        linear: 0.0,
        cos_coeff: rng_coeff(rng),
        sin_coeff: rng_coeff(rng),
    }
}

fn random_poly(rng: &mut ChaCha12Rng) -> TrigPoly {
    TrigPoly {
        mean: rng_coeff(rng),
        cos_coeffs: vec![rng_coeff(rng), rng_coeff(rng)],
        sin_coeffs: vec![rng_coeff(rng), rng_coeff(rng)],
    }
}

fn rng_coeff(rng: &mut ChaCha12Rng) -> f64 {
    rng.random_range(-0.5..0.5)
}

fn rng_angle(rng: &mut ChaCha12Rng) -> f64 {
    rng.random_range(0.0..std::f64::consts::TAU)
}

const ORACLE_CHECK_TOL: f64 = 1e-12;

fn run_oracle_check(
    cfg: &Config,
    out: &mut OutputSet,
) -> Result<(serde_json::Value, Option<String>)> {
    let mut rng = ChaCha12Rng::seed_from_u64(cfg.seed);
    let mut rows = Vec::with_capacity(cfg.instances as usize);
    let mut max_err = 0.0f64;
    let mut failures = 0u32;
    for i in 0..cfg.instances {
        let (spec, lambda) = random_instance(&mut rng)?;
        let sol = oracle::cyclic_solve(&spec, lambda)?;
        let mut err = 0.0f64;
        for (j, exact) in sol.values.iter().enumerate() {
            let x = BasePoint::finite(j as u64, sol.period);
            let series = solver::u_lambda_at(&spec, &x, lambda, 1e-14)?;
            err = err.max(series.distance(exact));
        }
        max_err = max_err.max(err);
        if err > ORACLE_CHECK_TOL {
            failures += 1;
        }
        rows.push(format!(
            "{i},{},{},{},{}",
            sol.period,
            spec.dim(),
            fmt(lambda),
            fmt(err)
        ));
    }
    out.csv(
        "oracle_check.csv",
        "instance,period,dim,lambda,max_abs_err",
        &rows,
    );
    let anomaly = (failures > 0).then(|| {
        format!("{failures} of {} cyclic instances exceeded {ORACLE_CHECK_TOL:e}", cfg.instances)
    });
    Ok((
        serde_json::json!({
            "instances": cfg.instances,
            "max_err": max_err,
            "tol": ORACLE_CHECK_TOL,
            "failures": failures,
        }),
        anomaly,
    ))
}

/// Rows for `cocycle-forge list`: built-ins plus any entries a custom
/// registry file defines through `cocycle.*` keys.
pub fn registry_listing(custom: Option<&str>) -> Result<Vec<String>> {
    let mut rows: Vec<String> = crate::registry::builtin_entries()
        .iter()
        .map(|e| {
            format!(
                "{:<11} {:<18} {:<55} {}",
                e.category, e.name, e.parameters, e.notes
            )
        })
        .collect();
    if let Some(text) = custom {
        for entry in custom_entries(text)? {
            rows.push(entry);
        }
    }
    Ok(rows)
}

fn custom_entries(text: &str) -> Result<Vec<String>> {
    let mut map = BTreeMap::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(Error::Config(format!(
                "registry line {}: expected `key = value`",
                lineno + 1
            )));
        };
        map.insert(key.trim().to_string(), value.trim().to_string());
    }
    let mut rows = Vec::new();
    if let Some(kind) = map.get("cocycle.psi.kind") {
        let detail = map
            .get("cocycle.beta")
            .map(|b| format!("beta = {b}"))
            .or_else(|| map.get("cocycle.psi.blocks").map(|b| format!("blocks = {b}")))
            .unwrap_or_default();
        rows.push(format!("{:<11} {:<18} {:<55} custom twist", "twist", kind, detail));
    }
    if let Some(kind) = map.get("cocycle.rho.kind") {
        let detail = map
            .get("cocycle.rho.fourier")
            .map(|f| format!("fourier = {f}"))
            .or_else(|| map.get("cocycle.rho.trig").map(|t| format!("trig = {t}")))
            .or_else(|| map.get("cocycle.rho.value").map(|v| format!("value = {v}")))
            .unwrap_or_default();
        rows.push(format!(
            "{:<11} {:<18} {:<55} custom observable",
            "observable", kind, detail
        ));
    }
    Ok(rows)
}
