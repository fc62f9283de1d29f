//! JSON scenario files.
//!
//! A scenario is one JSON object with the sections `params`, `load`,
//! `disturbance` (required) and `thresholds`, `agc`, `sim`, `damping`,
//! `high_order` (optional). Errors name the offending field by its path.

use serde::Deserialize;
use std::path::Path;

use crate::control::AgcParams;
use crate::high_order::HighOrderParams;
use crate::model::{steady_theta13, GeneratorParams};
use crate::signals::{Disturbance, LoadProfile};
use crate::sim::{AgcSettings, PhaseDampingSettings, Scenario, SimSettings};
use crate::supervisor::SyncThresholds;
use crate::{Error, Result};

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawParams {
    k: f64,
    omega0: f64,
    d1_0: f64,
    d2_0: f64,
    k1: f64,
    k2: f64,
    x1: f64,
    x2: f64,
    c1: f64,
    c2: f64,
    ell_bar: f64,
    /// Solved from `ell_bar` when absent.
    theta13_bar: Option<f64>,
    #[serde(default = "unit")]
    inertia: f64,
}

fn unit() -> f64 {
    1.0
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawScenario {
    params: RawParams,
    load: LoadProfile,
    disturbance: Disturbance,
    #[serde(default)]
    thresholds: Option<SyncThresholds>,
    #[serde(default)]
    agc: AgcSettings,
    #[serde(default)]
    sim: SimSettings,
    #[serde(default)]
    damping: Option<PhaseDampingSettings>,
    #[serde(default)]
    high_order: Option<HighOrderParams>,
    /// Free-form text, ignored.
    #[serde(default, rename = "description")]
    _description: Option<serde_json::Value>,
}

fn config_err(path: impl Into<String>, reason: impl Into<String>) -> Error {
    Error::Config { path: path.into(), reason: reason.into() }
}

/// Re-label a validation failure with the section it came from.
fn in_section<T>(section: &str, r: Result<T>) -> Result<T> {
    r.map_err(|e| match e {
        Error::InvalidParam { field, reason } => {
            let path = if field.contains('.') { field } else { format!("{section}.{field}") };
            config_err(path, reason)
        }
        other if other.is_config() => config_err(section, other.to_string()),
        other => other,
    })
}

fn parse<T: serde::de::DeserializeOwned>(text: &str) -> Result<T> {
    let de = &mut serde_json::Deserializer::from_str(text);
    serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        config_err(if path == "." { String::new() } else { path }, e.into_inner().to_string())
    })
}

pub fn parse_scenario(text: &str) -> Result<Scenario> {
    let raw: RawScenario = parse(text)?;
    let rp = raw.params;
    let mut params = GeneratorParams {
        k: rp.k,
        omega0: rp.omega0,
        d1_0: rp.d1_0,
        d2_0: rp.d2_0,
        k1: rp.k1,
        k2: rp.k2,
        x1: rp.x1,
        x2: rp.x2,
        c1: rp.c1,
        c2: rp.c2,
        ell_bar: rp.ell_bar,
        theta13_bar: 0.0,
        inertia: rp.inertia,
    };
    params.theta13_bar = match rp.theta13_bar {
        Some(v) => v,
        None => in_section("params", steady_theta13(&params, params.ell_bar))?,
    };
    let sc = Scenario {
        params,
        load: raw.load,
        disturbance: raw.disturbance,
        thresholds: raw.thresholds.unwrap_or_default(),
        agc: raw.agc,
        sim: raw.sim,
        damping: raw.damping,
        high_order: raw.high_order,
    };
    validate_scenario(&sc)?;
    Ok(sc)
}

/// Section-aware validation of a scenario.
pub fn validate_scenario(sc: &Scenario) -> Result<()> {
    in_section("params", sc.params.validate())?;
    in_section("load", sc.load.validate())?;
    in_section("disturbance", sc.disturbance.validate())?;
    in_section("thresholds", sc.thresholds.validate())?;
    in_section("agc", AgcParams { alpha1: sc.agc.alpha1, alpha2: sc.agc.alpha2 }.validate())?;
    if let Some(h) = &sc.high_order {
        in_section("high_order", h.validate())?;
    }
    if let Some(d) = &sc.damping {
        in_section("damping", d.profiles().map(|_| ()))?;
    }
    in_section("sim", sc.validate())
}

pub fn load_scenario(path: impl AsRef<Path>) -> Result<Scenario> {
    parse_scenario(&std::fs::read_to_string(path)?)
}

/// A detailed-machine parameter set: either a document with a `high_order`
/// section or a bare parameter object.
pub fn parse_high_order(text: &str) -> Result<HighOrderParams> {
    let value: serde_json::Value = parse(text)?;
    let (section, body) = match value.get("high_order") {
        Some(h) => ("high_order", h.to_string()),
        None => ("", text.to_string()),
    };
    let p: HighOrderParams = parse(&body).map_err(|e| match e {
        Error::Config { path, reason } if !section.is_empty() => {
            config_err(if path.is_empty() { section.to_string() } else { format!("{section}.{path}") }, reason)
        }
        other => other,
    })?;
    in_section(if section.is_empty() { "high_order" } else { section }, p.validate())?;
    Ok(p)
}

pub fn load_high_order(path: impl AsRef<Path>) -> Result<HighOrderParams> {
    parse_high_order(&std::fs::read_to_string(path)?)
}
