//! Experiment configuration: a flat `key = value` file.
//!
//! Lines starting with `#` (or blank) are skipped. Keys are dotted paths,
//! values are scalars or small inline lists. Unknown or duplicate keys are
//! rejected so a typo cannot silently fall back to a default. The parsed
//! key set is also what gets hashed into the run manifest, after sorting,
//! so semantically identical files hash identically regardless of key
//! order or comments.

use std::collections::BTreeMap;
use std::path::Path;

use num_complex::Complex64;

use crate::base::{golden, BaseSystem};
use crate::error::{Error, Result};
use crate::registry::{AngleFn, TrigPoly, TwistMap, VectorMap};

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
pub enum ExperimentKind {
    Solve,
    Sweep,
    Drift,
    Displacement,
    TheoremB,
    Averaging,
    OracleCheck,
}

impl ExperimentKind {
    pub fn name(self) -> &'static str {
        match self {
            ExperimentKind::Solve => "solve",
            ExperimentKind::Sweep => "sweep",
            ExperimentKind::Drift => "drift",
            ExperimentKind::Displacement => "displacement",
            ExperimentKind::TheoremB => "theoremB",
            ExperimentKind::Averaging => "averaging",
            ExperimentKind::OracleCheck => "oracle-check",
        }
    }
}

#[derive(Debug, Clone)]
pub struct Config {
    pub experiment: ExperimentKind,
    pub base: BaseSystem,
    pub psi: TwistMap,
    pub rho: VectorMap,
    pub grid_size: usize,
    pub grid_offset: f64,
    pub eps: f64,
    pub lambdas: Vec<f64>,
    pub n_schedule: Vec<u64>,
    /// Base point for single-orbit experiments, as a scalar coordinate in
    /// turns (rounded to an index on the finite base).
    pub x0: f64,
    pub denom_threshold: f64,
    /// Random instance count for the oracle check.
    pub instances: u32,
    pub seed: u64,
    pub threads: Option<usize>,
    /// Sorted `key = value` lines, the hashing canonical form.
    pub canonical: String,
}

pub const DEFAULT_GRID_SIZE: usize = 1024;
pub const DEFAULT_EPS: f64 = 1e-10;
pub const DEFAULT_LAMBDAS: &[f64] = &[0.9, 0.99, 0.999, 0.9999];
pub const DEFAULT_N_SCHEDULE: &[u64] = &[100, 1000, 10_000, 100_000];

pub fn load(path: &Path) -> Result<Config> {
    let text = std::fs::read_to_string(path)?;
    parse(&text)
}

pub fn parse(text: &str) -> Result<Config> {
    let raw = parse_keys(text)?;
    build(raw)
}

fn parse_keys(text: &str) -> Result<BTreeMap<String, String>> {
    let mut map = BTreeMap::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(Error::Config(format!(
                "line {}: expected `key = value`, got `{line}`",
                lineno + 1
            )));
        };
        let key = key.trim().to_string();
        let value = value.trim().to_string();
        if key.is_empty() || value.is_empty() {
            return Err(Error::Config(format!("line {}: empty key or value", lineno + 1)));
        }
        if map.insert(key.clone(), value).is_some() {
            return Err(Error::Config(format!("duplicate key `{key}`")));
        }
    }
    Ok(map)
}

struct Keys {
    map: BTreeMap<String, String>,
    used: std::collections::BTreeSet<String>,
}

impl Keys {
    fn take(&mut self, key: &str) -> Option<String> {
        let v = self.map.get(key).cloned();
        if v.is_some() {
            self.used.insert(key.to_string());
        }
        v
    }

    fn require(&mut self, key: &str) -> Result<String> {
        self.take(key)
            .ok_or_else(|| Error::Config(format!("missing required key `{key}`")))
    }

    fn unknown(&self) -> Vec<String> {
        self.map
            .keys()
            .filter(|k| !self.used.contains(*k))
            .cloned()
            .collect()
    }
}

fn build(raw: BTreeMap<String, String>) -> Result<Config> {
    let canonical = raw
        .iter()
        .map(|(k, v)| format!("{k} = {v}"))
        .collect::<Vec<_>>()
        .join("\n");
    let mut keys = Keys {
        map: raw,
        used: Default::default(),
    };

    let experiment = match keys.require("experiment.kind")?.as_str() {
        "solve" => ExperimentKind::Solve,
        "sweep" => ExperimentKind::Sweep,
        "drift" => ExperimentKind::Drift,
        "displacement" => ExperimentKind::Displacement,
        "theoremB" | "theorem-b" => ExperimentKind::TheoremB,
        "averaging" => ExperimentKind::Averaging,
        "oracle-check" => ExperimentKind::OracleCheck,
        other => {
            return Err(Error::Config(format!("unknown experiment kind `{other}`")))
        }
    };

    let base = {
        let kind = keys
            .take("base.kind")
            .unwrap_or_else(|| "circle".to_string());
        let mut base = match kind.as_str() {
            "circle" => {
                let alpha = parse_alpha(
                    &keys.take("base.alpha").unwrap_or_else(|| "golden".into()),
                )?;
                BaseSystem::circle(alpha)
            }
            "torus" => {
                let spec = keys.require("base.alpha")?;
                let alphas = spec
                    .split(',')
                    .map(|s| parse_alpha(s.trim()))
                    .collect::<Result<Vec<f64>>>()?;
                BaseSystem::torus(alphas)?
            }
            "finite" => {
                let period = parse_u64("base.period", &keys.require("base.period")?)?;
                BaseSystem::finite(period)?
            }
            other => return Err(Error::Config(format!("unknown base kind `{other}`"))),
        };
        if let Some(v) = keys.take("base.uniquely_ergodic_extension") {
            base = base.with_unique_ergodicity(parse_bool("base.uniquely_ergodic_extension", &v)?);
        }
        base
    };

    let psi = {
        let kind = keys
            .take("cocycle.psi.kind")
            .unwrap_or_else(|| "constant_rotation".to_string());
        match kind.as_str() {
            "identity" => {
                let dim = keys
                    .take("cocycle.dim")
                    .map(|v| parse_usize("cocycle.dim", &v))
                    .transpose()?
                    .unwrap_or(2);
                if dim == 0 {
                    return Err(Error::Config("cocycle.dim must be positive".into()));
                }
                TwistMap::identity(dim)
            }
            "constant_rotation" => {
                let beta = parse_f64("cocycle.beta", &keys.require("cocycle.beta")?)?;
                TwistMap::constant_rotation(beta)
            }
            "diagonal_rotations" => {
                let blocks = keys
                    .take("cocycle.psi.blocks")
                    .map(|v| parse_angle_blocks(&v))
                    .transpose()?
                    .unwrap_or_default();
                let fixed_axes = keys
                    .take("cocycle.psi.fixed_axes")
                    .map(|v| parse_usize("cocycle.psi.fixed_axes", &v))
                    .transpose()?
                    .unwrap_or(0);
                let flip_last = keys
                    .take("cocycle.psi.flip_last")
                    .map(|v| parse_bool("cocycle.psi.flip_last", &v))
                    .transpose()?
                    .unwrap_or(false);
                TwistMap::diagonal(blocks, fixed_axes, flip_last)?
            }
            other => return Err(Error::Config(format!("unknown twist kind `{other}`"))),
        }
    };

    let rho = {
        let kind = keys
            .take("cocycle.rho.kind")
            .unwrap_or_else(|| "zero".to_string());
        let inner = match kind.as_str() {
            "zero" => VectorMap::zero(psi.dim()),
            "constant" => {
                let value = parse_floats(&keys.require("cocycle.rho.value")?)?;
                VectorMap::constant(value)
            }
            "fourier" => VectorMap::fourier(parse_fourier(&keys.require("cocycle.rho.fourier")?)?),
            "trig" => VectorMap::Trig {
                components: parse_trig(&keys.require("cocycle.rho.trig")?)?,
            },
            "coboundary" => {
                let of = VectorMap::fourier(parse_fourier(&keys.require("cocycle.rho.fourier")?)?);
                let step = match keys.take("cocycle.rho.step") {
                    Some(v) => parse_alpha(&v)?,
                    None => base_step(&base)?,
                };
                VectorMap::coboundary(of, step)
            }
            other => return Err(Error::Config(format!("unknown forcing kind `{other}`"))),
        };
        if inner.dim() != psi.dim() {
            return Err(Error::DimensionMismatch {
                expected: psi.dim(),
                got: inner.dim(),
            });
        }
        inner
    };

    let grid_size = keys
        .take("grid.size")
        .map(|v| parse_usize("grid.size", &v))
        .transpose()?
        .unwrap_or(DEFAULT_GRID_SIZE);
    if grid_size == 0 {
        return Err(Error::Config("grid.size must be positive".into()));
    }
    let grid_offset = keys
        .take("grid.offset")
        .map(|v| parse_f64("grid.offset", &v))
        .transpose()?
        .unwrap_or(0.0);

    let eps = keys
        .take("solver.eps")
        .map(|v| parse_f64("solver.eps", &v))
        .transpose()?
        .unwrap_or(DEFAULT_EPS);
    if !(eps > 0.0 && eps.is_finite()) {
        return Err(Error::Config("solver.eps must be positive".into()));
    }

    let lambdas = match keys.take("lambda.schedule") {
        Some(v) => {
            let ls = parse_floats(&v)?;
            for &l in &ls {
                crate::cocycle::check_lambda(l)?;
            }
            if ls.is_empty() {
                return Err(Error::Config("lambda.schedule is empty".into()));
            }
            ls
        }
        None => DEFAULT_LAMBDAS.to_vec(),
    };

    let n_schedule = match keys.take("n.schedule") {
        Some(v) => {
            let ns = v
                .split(',')
                .map(|s| parse_u64("n.schedule", s.trim()))
                .collect::<Result<Vec<u64>>>()?;
            if ns.is_empty() || ns[0] == 0 {
                return Err(Error::Config("n.schedule must start above zero".into()));
            }
            if ns.windows(2).any(|w| w[1] <= w[0]) {
                return Err(Error::Config("n.schedule must be strictly increasing".into()));
            }
            ns
        }
        None => DEFAULT_N_SCHEDULE.to_vec(),
    };

    let x0 = keys
        .take("averaging.x")
        .map(|v| parse_f64("averaging.x", &v))
        .transpose()?
        .unwrap_or(0.0);

    let denom_threshold = keys
        .take("oracle.denom_threshold")
        .map(|v| parse_f64("oracle.denom_threshold", &v))
        .transpose()?
        .unwrap_or(crate::oracle::DEFAULT_DENOM_THRESHOLD);

    let instances = keys
        .take("check.instances")
        .map(|v| parse_u64("check.instances", &v))
        .transpose()?
        .unwrap_or(100) as u32;

    let seed = keys
        .take("seed")
        .map(|v| parse_u64("seed", &v))
        .transpose()?
        .unwrap_or(0);

    let threads = keys
        .take("threads")
        .map(|v| parse_usize("threads", &v))
        .transpose()?;
    if threads == Some(0) {
        return Err(Error::Config("threads must be positive".into()));
    }

    let unknown = keys.unknown();
    if !unknown.is_empty() {
        return Err(Error::Config(format!(
            "unknown keys: {}",
            unknown.join(", ")
        )));
    }

    Ok(Config {
        experiment,
        base,
        psi,
        rho,
        grid_size,
        grid_offset,
        eps,
        lambdas,
        n_schedule,
        x0,
        denom_threshold,
        instances,
        seed,
        threads,
        canonical,
    })
}

fn base_step(base: &BaseSystem) -> Result<f64> {
    match &base.kind {
        crate::base::BaseKind::CircleRotation { alpha } => Ok(*alpha),
        crate::base::BaseKind::TorusRotation { alpha } => Ok(alpha[0]),
        crate::base::BaseKind::FiniteCyclic { period } => Ok(1.0 / *period as f64),
    }
}

fn parse_alpha(s: &str) -> Result<f64> {
    if s == "golden" {
        Ok(golden())
    } else {
        parse_f64("alpha", s)
    }
}

fn parse_f64(key: &str, s: &str) -> Result<f64> {
    let v: f64 = s
        .parse()
        .map_err(|_| Error::Config(format!("`{key}`: `{s}` is not a number")))?;
    if !v.is_finite() {
        return Err(Error::Config(format!("`{key}` must be finite")));
    }
    Ok(v)
}

fn parse_u64(key: &str, s: &str) -> Result<u64> {
    s.parse()
        .map_err(|_| Error::Config(format!("`{key}`: `{s}` is not a nonnegative integer")))
}

fn parse_usize(key: &str, s: &str) -> Result<usize> {
    s.parse()
        .map_err(|_| Error::Config(format!("`{key}`: `{s}` is not a nonnegative integer")))
}

fn parse_bool(key: &str, s: &str) -> Result<bool> {
    match s {
        "true" => Ok(true),
        "false" => Ok(false),
        _ => Err(Error::Config(format!("`{key}`: expected true or false"))),
    }
}

fn parse_floats(s: &str) -> Result<Vec<f64>> {
    s.split([',', ' '])
        .filter(|p| !p.is_empty())
        .map(|p| parse_f64("list entry", p))
        .collect()
}

/// `k:re,im; k:re,im; ...`
fn parse_fourier(s: &str) -> Result<Vec<(i64, Complex64)>> {
    let mut coeffs = Vec::new();
    for part in s.split(';') {
        let part = part.trim();
        if part.is_empty() {
            continue;
        }
        let (k_str, c_str) = part
            .split_once(':')
            .ok_or_else(|| Error::Config(format!("fourier term `{part}`: expected `k:re,im`")))?;
        let k: i64 = k_str
            .trim()
            .parse()
            .map_err(|_| Error::Config(format!("fourier mode `{k_str}` is not an integer")))?;
        let (re_str, im_str) = c_str
            .split_once(',')
            .ok_or_else(|| Error::Config(format!("fourier term `{part}`: expected `k:re,im`")))?;
        coeffs.push((
            k,
            Complex64::new(
                parse_f64("fourier re", re_str.trim())?,
                parse_f64("fourier im", im_str.trim())?,
            ),
        ));
    }
    if coeffs.is_empty() {
        return Err(Error::Config("fourier forcing has no terms".into()));
    }
    Ok(coeffs)
}

/// One component per `|`-separated field: `mean c1 s1 c2 s2 ...`.
fn parse_trig(s: &str) -> Result<Vec<TrigPoly>> {
    let mut components = Vec::new();
    for field in s.split('|') {
        let nums = parse_floats(field)?;
        if nums.is_empty() {
            return Err(Error::Config("empty trig component".into()));
        }
        if nums.len() % 2 == 0 {
            return Err(Error::Config(
                "trig component needs `mean` then cos/sin pairs".into(),
            ));
        }
        let mean = nums[0];
        let mut cos_coeffs = Vec::new();
        let mut sin_coeffs = Vec::new();
        for pair in nums[1..].chunks(2) {
            cos_coeffs.push(pair[0]);
            sin_coeffs.push(pair[1]);
        }
        components.push(TrigPoly {
            mean,
            cos_coeffs,
            sin_coeffs,
        });
    }
    Ok(components)
}

/// `constant linear cos sin` per `;`-separated block.
fn parse_angle_blocks(s: &str) -> Result<Vec<AngleFn>> {
    let mut blocks = Vec::new();
    for field in s.split(';') {
        let nums = parse_floats(field)?;
        if nums.len() != 4 {
            return Err(Error::Config(
                "each twist block needs exactly `constant linear cos sin`".into(),
            ));
        }
        blocks.push(AngleFn {
            constant: nums[0],
            linear: nums[1],
            cos_coeff: nums[2],
            sin_coeff: nums[3],
        });
    }
    Ok(blocks)
}

#[cfg(test)]
mod tests {
    use super::*;

    const SAMPLE: &str = "\
# vortex over the golden rotation
experiment.kind = sweep
base.kind = circle
base.alpha = golden
cocycle.psi.kind = constant_rotation
cocycle.beta = 1.0
cocycle.rho.kind = fourier
cocycle.rho.fourier = 0:1.0,0.0; 2:0.25,-0.5
grid.size = 64
lambda.schedule = 0.9, 0.99
";

    #[test]
    fn sample_parses() {
        let cfg = parse(SAMPLE).unwrap();
        assert_eq!(cfg.experiment, ExperimentKind::Sweep);
        assert_eq!(cfg.grid_size, 64);
        assert_eq!(cfg.lambdas, vec![0.9, 0.99]);
        assert_eq!(cfg.psi.dim(), 2);
        assert_eq!(cfg.eps, DEFAULT_EPS);
        assert_eq!(cfg.n_schedule, DEFAULT_N_SCHEDULE);
    }

    #[test]
    fn canonical_form_ignores_comments_and_order() {
        let a = parse(SAMPLE).unwrap();
        let mut lines: Vec<&str> = SAMPLE.lines().filter(|l| !l.starts_with('#')).collect();
        lines.reverse();
        let b = parse(&lines.join("\n")).unwrap();
        assert_eq!(a.canonical, b.canonical);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let text = format!("{SAMPLE}\nsolver.epsilon = 1e-8\n");
        match parse(&text) {
            Err(Error::Config(msg)) => assert!(msg.contains("solver.epsilon")),
            other => panic!("expected config error, got {other:?}"),
        }
    }

    #[test]
    fn duplicate_keys_are_rejected() {
        let text = format!("{SAMPLE}\ngrid.size = 32\n");
        assert!(matches!(parse(&text), Err(Error::Config(_))));
    }

    #[test]
    fn out_of_range_lambda_is_rejected() {
        let text = SAMPLE.replace("0.9, 0.99", "1.5");
        assert!(matches!(parse(&text), Err(Error::LambdaRange(_))));
    }

    #[test]
    fn dimension_mismatch_is_rejected() {
        let text = SAMPLE
            .replace("cocycle.rho.kind = fourier", "cocycle.rho.kind = constant")
            .replace(
                "cocycle.rho.fourier = 0:1.0,0.0; 2:0.25,-0.5",
                "cocycle.rho.value = 1.0, 0.0, 0.5",
            );
        assert!(matches!(parse(&text), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn trig_and_blocks_parse() {
        let text = "\
experiment.kind = solve
base.kind = finite
base.period = 6
cocycle.psi.kind = diagonal_rotations
cocycle.psi.blocks = 0.3 1.0 0.0 0.0; 0.1 0.0 0.2 0.0
cocycle.psi.fixed_axes = 1
cocycle.rho.kind = trig
cocycle.rho.trig = 0.5 0.1 0.2 | 0.0 0.3 0.0 | 1.0 | 0.2 0.0 0.1 | 0.7
";
        let cfg = parse(text).unwrap();
        assert_eq!(cfg.psi.dim(), 5);
        assert_eq!(cfg.rho.dim(), 5);
    }

    #[test]
    fn coboundary_defaults_to_the_base_step() {
        let text = "\
experiment.kind = drift
cocycle.psi.kind = identity
cocycle.rho.kind = coboundary
cocycle.rho.fourier = 1:0.5,0.0
";
        let cfg = parse(text).unwrap();
        match cfg.rho {
            VectorMap::Coboundary { step, .. } => assert!((step - golden()).abs() < 1e-15),
            other => panic!("expected coboundary, got {other:?}"),
        }
    }
}
