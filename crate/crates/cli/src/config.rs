//! Scenario files: one TOML tree per scenario, unknown keys rejected.
//!
//! ```toml
//! name = "baseline"
//!
//! [params]            # every key optional, baseline values otherwise
//! m = 0.2
//! sigma = 0.5         # or sigma_l / sigma_r
//! tau = 0.05
//! c = 0.02
//! k = 2
//! beta = 0.5          # or beta_l / beta_r
//!
//! [profile]
//! source = "explicit" # or "solve" (random-advertising equilibrium)
//! left = { technology = "random", intensity = 0.5 }
//! right = { technology = "random", intensity = 0.5 }
//!
//! [sim]
//! trials = 10000
//! voters = 100
//! seed = 7
//! state = "me"        # mm | me | em | ee, omitted = drawn from priors
//!
//! [[sweep]]
//! param = "beta"
//! values = [0.1, 0.5, 0.9]
//! ```

use std::path::Path;

use echolab::profile::{Advertising, PartyStrategy, StrategyProfile, Technology};
use echolab::simulation::{Population, RecordLevel, SimConfig};
use echolab::{ModelParams, State};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("{0}")]
    Parse(#[from] toml::de::Error),
    #[error("field `{field}`: {reason}")]
    Invalid { field: String, reason: String },
}

fn invalid(field: &str, reason: impl Into<String>) -> ConfigError {
    ConfigError::Invalid { field: field.to_string(), reason: reason.into() }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawParams {
    pub m: Option<f64>,
    pub sigma: Option<f64>,
    pub sigma_l: Option<f64>,
    pub sigma_r: Option<f64>,
    pub tau: Option<f64>,
    pub c: Option<f64>,
    pub k: Option<u32>,
    pub z: Option<u32>,
    pub beta: Option<f64>,
    pub beta_l: Option<f64>,
    pub beta_r: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TechName {
    None,
    Random,
    TargetOwn,
    TargetOpponent,
}

impl From<TechName> for Technology {
    fn from(t: TechName) -> Technology {
        match t {
            TechName::None => Technology::None,
            TechName::Random => Technology::Random,
            TechName::TargetOwn => Technology::TargetOwnSide,
            TechName::TargetOpponent => Technology::TargetOpponentSide,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawAd {
    pub technology: TechName,
    #[serde(default)]
    pub intensity: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProfileSource {
    #[default]
    Explicit,
    Solve,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawProfile {
    #[serde(default)]
    pub source: ProfileSource,
    pub left: Option<RawAd>,
    pub right: Option<RawAd>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PopulationName {
    Uniform,
    Band,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawSim {
    #[serde(default = "default_trials")]
    pub trials: u64,
    #[serde(default = "default_voters")]
    pub voters: usize,
    #[serde(default)]
    pub seed: u64,
    pub state: Option<String>,
    #[serde(default = "default_population")]
    pub population: PopulationName,
    pub w: Option<f64>,
    #[serde(default)]
    pub per_trial: bool,
}

fn default_trials() -> u64 {
    10_000
}
fn default_voters() -> usize {
    100
}
fn default_population() -> PopulationName {
    PopulationName::Uniform
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepAxis {
    pub param: String,
    pub values: Vec<f64>,
}

/// Parameters a sweep may vary; `x` is the intensity of an explicit
/// symmetric random profile.
pub const SWEEP_PARAMS: [&str; 8] = ["m", "sigma", "tau", "c", "k", "beta", "z", "x"];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawRegime {
    pub k: Vec<u32>,
    pub c: Vec<f64>,
    #[serde(default = "default_grid_step")]
    pub grid_step: f64,
}

fn default_grid_step() -> f64 {
    0.05
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CurveAxis {
    M,
    Sigma,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawCurves {
    pub axis: CurveAxis,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawPlots {
    /// grid step of the (s, r) credibility map
    pub chamber_map: Option<f64>,
    pub regime_diagram: Option<RawRegime>,
    pub threshold_curves: Option<RawCurves>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawScenario {
    pub name: String,
    #[serde(default)]
    pub params: RawParams,
    #[serde(default)]
    pub profile: RawProfile,
    pub sim: Option<RawSim>,
    #[serde(default)]
    pub sweep: Vec<SweepAxis>,
    #[serde(default)]
    pub plots: RawPlots,
}

/// How the strategy profile of a point is obtained.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ProfileSpec {
    Explicit(StrategyProfile),
    Solve,
}

/// A validated scenario point.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub name: String,
    pub params: ModelParams,
    pub profile: ProfileSpec,
    pub sim: Option<SimConfig>,
    pub sweep: Vec<SweepAxis>,
    pub plots: RawPlots,
    /// sha256 of the scenario file
    pub hash: String,
}

pub fn parse_state(s: &str) -> Option<State> {
    State::ALL.into_iter().find(|st| st.label() == s)
}

fn build_params(raw: &RawParams) -> Result<ModelParams, ConfigError> {
    let mut p = ModelParams::baseline();
    let pick = |both: Option<f64>, one: Option<f64>, name: &str, def: f64| -> Result<f64, ConfigError> {
        match (both, one) {
            (Some(_), Some(_)) => Err(invalid(name, "given together with its symmetric shorthand")),
            (Some(v), None) | (None, Some(v)) => Ok(v),
            (None, None) => Ok(def),
        }
    };
    p.m = raw.m.unwrap_or(p.m);
    p.sigma_l = pick(raw.sigma, raw.sigma_l, "params.sigma_l", p.sigma_l)?;
    p.sigma_r = pick(raw.sigma, raw.sigma_r, "params.sigma_r", p.sigma_r)?;
    p.tau = raw.tau.unwrap_or(p.tau);
    p.c = raw.c.unwrap_or(p.c);
    p.k = raw.k.unwrap_or(p.k);
    p.z = raw.z.unwrap_or(p.z);
    p.beta_l = pick(raw.beta, raw.beta_l, "params.beta_l", p.beta_l)?;
    p.beta_r = pick(raw.beta, raw.beta_r, "params.beta_r", p.beta_r)?;
    p.validate().map_err(|e| invalid("params", e.to_string()))?;
    Ok(p)
}

fn build_ad(raw: Option<RawAd>, field: &str) -> Result<Advertising, ConfigError> {
    let Some(raw) = raw else {
        return Ok(Advertising::NONE);
    };
    let tech: Technology = raw.technology.into();
    let x = match (tech, raw.intensity) {
        (Technology::Random, Some(x)) => x,
        (Technology::Random, None) => return Err(invalid(field, "random advertising needs an intensity")),
        (Technology::None, _) => 0.0,
        (_, Some(x)) if x != 1.0 => return Err(invalid(field, "targeted advertising has intensity 1")),
        _ => 1.0,
    };
    if !(0.0..=1.0).contains(&x) {
        return Err(invalid(field, format!("intensity {x} outside [0, 1]")));
    }
    Ok(Advertising::of(tech, x))
}

fn build_profile(raw: &RawProfile) -> Result<ProfileSpec, ConfigError> {
    match raw.source {
        ProfileSource::Solve => {
            if raw.left.is_some() || raw.right.is_some() {
                return Err(invalid("profile", "a solved profile takes no explicit strategies"));
            }
            Ok(ProfileSpec::Solve)
        }
        ProfileSource::Explicit => {
            let prof = StrategyProfile {
                left: PartyStrategy::moderate(build_ad(raw.left, "profile.left")?),
                right: PartyStrategy::moderate(build_ad(raw.right, "profile.right")?),
            };
            prof.validate().map_err(|e| invalid("profile", e.to_string()))?;
            Ok(ProfileSpec::Explicit(prof))
        }
    }
}

fn build_sim(raw: &RawSim, params: ModelParams) -> Result<SimConfig, ConfigError> {
    let mut sim = SimConfig::new(params, StrategyProfile::silent());
    sim.n_trials = raw.trials;
    sim.n_voters = raw.voters;
    sim.seed = raw.seed;
    sim.state = match &raw.state {
        None => None,
        Some(s) => Some(parse_state(s).ok_or_else(|| invalid("sim.state", format!("`{s}` is not one of mm, me, em, ee")))?),
    };
    sim.population = match raw.population {
        PopulationName::Uniform => {
            if raw.w.is_some() {
                return Err(invalid("sim.w", "only the band population has an independent mass"));
            }
            Population::Uniform
        }
        PopulationName::Band => Population::Band { w: raw.w },
    };
    sim.record_level = if raw.per_trial { RecordLevel::PerTrial } else { RecordLevel::Summary };
    sim.validate().map_err(|e| invalid("sim", e.to_string()))?;
    Ok(sim)
}

pub fn hash_bytes(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

pub fn parse_scenario(text: &str) -> Result<Scenario, ConfigError> {
    let raw: RawScenario = toml::from_str(text)?;
    if raw.name.is_empty() || !raw.name.chars().all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-') {
        return Err(invalid("name", "use letters, digits, '-' and '_' only"));
    }
    let params = build_params(&raw.params)?;
    let profile = build_profile(&raw.profile)?;
    let sim = raw.sim.as_ref().map(|s| build_sim(s, params)).transpose()?;
    for (i, axis) in raw.sweep.iter().enumerate() {
        let field = format!("sweep[{i}].param");
        if !SWEEP_PARAMS.contains(&axis.param.as_str()) {
            return Err(invalid(&field, format!("unknown parameter `{}` (expected one of {})", axis.param, SWEEP_PARAMS.join(", "))));
        }
        if axis.values.is_empty() {
            return Err(invalid(&format!("sweep[{i}].values"), "empty"));
        }
        if axis.param == "x" && !matches!(profile, ProfileSpec::Explicit(_)) {
            return Err(invalid(&field, "sweeping x needs an explicit profile"));
        }
        if raw.sweep[..i].iter().any(|a| a.param == axis.param) {
            return Err(invalid(&field, format!("`{}` swept twice", axis.param)));
        }
    }
    if let Some(step) = raw.plots.chamber_map {
        if !(step > 0.0 && step <= 0.01) {
            return Err(invalid("plots.chamber_map", "grid step must lie in (0, 0.01]"));
        }
    }
    if let Some(r) = &raw.plots.regime_diagram {
        if r.k.is_empty() || r.c.is_empty() {
            return Err(invalid("plots.regime_diagram", "needs k and c values"));
        }
        if raw.sim.is_none() {
            return Err(invalid("plots.regime_diagram", "needs a [sim] block for the simulated best responses"));
        }
    }
    Ok(Scenario {
        name: raw.name.clone(),
        params,
        profile,
        sim,
        sweep: raw.sweep.clone(),
        plots: raw.plots.clone(),
        hash: hash_bytes(text.as_bytes()),
    })
}

pub fn load_scenario(path: &Path) -> Result<Scenario, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io { path: path.display().to_string(), source })?;
    parse_scenario(&text)
}

/// Point of a sweep: the base scenario with `assignments` applied.
pub fn apply(base: &Scenario, assignments: &[(String, f64)]) -> Result<Scenario, ConfigError> {
    let mut s = base.clone();
    for (name, v) in assignments {
        let p = &mut s.params;
        let as_count = |v: f64| -> Result<u32, ConfigError> {
            if v >= 0.0 && v.fract() == 0.0 {
                Ok(v as u32)
            } else {
                Err(invalid(&format!("sweep.{name}"), format!("{v} is not a count")))
            }
        };
        match name.as_str() {
            "m" => p.m = *v,
            "sigma" => (p.sigma_l, p.sigma_r) = (*v, *v),
            "tau" => p.tau = *v,
            "c" => p.c = *v,
            "k" => p.k = as_count(*v)?,
            "z" => p.z = as_count(*v)?,
            "beta" => (p.beta_l, p.beta_r) = (*v, *v),
            "x" => {
                if !(0.0..=1.0).contains(v) {
                    return Err(invalid("sweep.x", format!("intensity {v} outside [0, 1]")));
                }
                s.profile = ProfileSpec::Explicit(StrategyProfile::symmetric_random(*v));
            }
            other => return Err(invalid("sweep", format!("unknown parameter `{other}`"))),
        }
        p.validate().map_err(|e| invalid(&format!("sweep.{name}"), e.to_string()))?;
    }
    if let Some(sim) = &mut s.sim {
        sim.params = s.params;
    }
    Ok(s)
}

/// Cartesian product of the sweep axes, first axis slowest.
pub fn sweep_points(axes: &[SweepAxis]) -> Vec<Vec<(String, f64)>> {
    let mut points = vec![Vec::new()];
    for axis in axes {
        points = points
            .into_iter()
            .flat_map(|pt| {
                axis.values.iter().map(move |&v| {
                    let mut q = pt.clone();
                    q.push((axis.param.clone(), v));
                    q
                })
            })
            .collect();
    }
    points
}

#[cfg(test)]
mod tests {
    use super::*;

    const BASE: &str = r#"
name = "baseline"
[params]
m = 0.2
sigma = 0.5
k = 2
beta = 0.5
[profile]
left = { technology = "random", intensity = 0.5 }
right = { technology = "random", intensity = 0.5 }
"#;

    #[test]
    fn parses_baseline() {
        let s = parse_scenario(BASE).unwrap();
        assert_eq!(s.params, ModelParams::baseline());
        assert_eq!(s.profile, ProfileSpec::Explicit(StrategyProfile::symmetric_random(0.5)));
        assert_eq!(s.hash.len(), 64);
    }

    #[test]
    fn unknown_keys_fail() {
        let text = BASE.replace("k = 2", "kk = 2");
        assert!(matches!(parse_scenario(&text), Err(ConfigError::Parse(_))));
    }

    #[test]
    fn distribution_constraint_cited() {
        let text = BASE.replace("m = 0.2", "m = 0.3\ntau = 0.05");
        let err = parse_scenario(&text).unwrap_err().to_string();
        assert!(err.contains("1/4 - tau/2"), "{err}");
    }

    #[test]
    fn bad_sweep_axis() {
        let text = format!("{BASE}\n[[sweep]]\nparam = \"gamma\"\nvalues = [0.1]\n");
        let err = parse_scenario(&text).unwrap_err().to_string();
        assert!(err.contains("sweep[0].param"), "{err}");
    }

    #[test]
    fn cartesian_order() {
        let axes = vec![
            SweepAxis { param: "k".into(), values: vec![1.0, 2.0] },
            SweepAxis { param: "beta".into(), values: vec![0.1, 0.2, 0.3] },
        ];
        let pts = sweep_points(&axes);
        assert_eq!(pts.len(), 6);
        assert_eq!(pts[1], vec![("k".to_string(), 1.0), ("beta".to_string(), 0.2)]);
    }

    #[test]
    fn fractional_k_rejected() {
        let s = parse_scenario(BASE).unwrap();
        assert!(apply(&s, &[("k".into(), 1.5)]).is_err());
        assert_eq!(apply(&s, &[("k".into(), 3.0)]).unwrap().params.k, 3);
    }
}
