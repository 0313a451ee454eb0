//! Scenario files: the system description plus an optional `run` section
//! holding per-command parameters.

use std::path::Path;

use awq_core::config::{build_config, RawScenario, SystemConfig};
use awq_core::dynamics::{MarkovOptions, Model, RabiOptions};
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::Failure;

const SYSTEM_KEYS: [&str; 5] = ["chain", "dimers", "raman", "impurity_detuning", "dimer_crosstalk_threshold"];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Tuning {
    /// δ above the band edge J_{π/d}.
    BandEdge,
    /// δ2 above the highest chain mode.
    TopMode,
    /// δ2 at the optimum of the single-mode error.
    Optimal,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Initial {
    Dimer,
    Symmetric,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Envelope {
    Finite,
    Infinite,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Run {
    /// Subcommand evaluated at each point of `scan`.
    pub command: Option<String>,
    pub model: Model,
    /// Put the dimer energy on the mode nearest to this k d/π.
    pub kd_over_pi: Option<f64>,
    pub kd_start: f64,
    pub kd_stop: f64,
    pub kd_step: f64,
    /// Replace the dimers by a centered pair this many spacings apart.
    pub separation_over_d: Option<usize>,
    pub tuning: Tuning,
    /// Target Re g_eff/δ.
    pub epsilon: f64,
    /// Explicit detuning from the tuning reference; overrides `epsilon`.
    pub detuning: Option<f64>,
    /// Run the Rabi propagation in `bandgap`.
    pub measure: bool,
    pub initial: Initial,
    pub t_max: Option<f64>,
    pub points: usize,
    pub envelope: Envelope,
    pub dimer: usize,
    /// Write a time series per point in `purcell-scan`.
    pub write_series: bool,
    pub markov: MarkovOptions,
    pub rabi: RabiOptions,
}

impl Default for Run {
    fn default() -> Self {
        Self {
            command: None,
            model: Model::Effective,
            kd_over_pi: None,
            kd_start: 0.80,
            kd_stop: 0.97,
            kd_step: 0.01,
            separation_over_d: None,
            tuning: Tuning::BandEdge,
            epsilon: 2e-3,
            detuning: None,
            measure: true,
            initial: Initial::Dimer,
            t_max: None,
            points: 1000,
            envelope: Envelope::Finite,
            dimer: 0,
            write_series: false,
            markov: MarkovOptions::default(),
            rabi: RabiOptions::default(),
        }
    }
}

impl Run {
    /// Inclusive k d/π grid.
    pub fn kd_grid(&self) -> Result<Vec<f64>, Failure> {
        crate::axis::range(self.kd_start, self.kd_stop, self.kd_step).map_err(Failure::Validation)
    }
}

#[derive(Debug, Clone)]
pub struct Scenario {
    pub name: String,
    pub config: SystemConfig,
    pub run: Run,
}

pub fn read(path: &Path) -> Result<Value, Failure> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Failure::Validation(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| {
        Failure::Validation(format!("{}: line {}, column {}: {e}", path.display(), e.line(), e.column()))
    })
}

pub fn default_name(path: &Path) -> String {
    path.file_stem().and_then(|s| s.to_str()).unwrap_or("run").to_string()
}

/// Split a scenario document into system, run section and name, then validate.
pub fn parse(source: Value, fallback_name: &str) -> Result<Scenario, Failure> {
    let Value::Object(map) = &source else {
        return Err(Failure::Validation("scenario must be a JSON object".into()));
    };
    let mut system = serde_json::Map::new();
    let mut run = Run::default();
    let mut name = fallback_name.to_string();
    for (k, v) in map {
        match k.as_str() {
            "name" => {
                name = v
                    .as_str()
                    .ok_or_else(|| Failure::Validation("name must be a string".into()))?
                    .to_string()
            }
            "run" => run = serde_json::from_value(v.clone()).map_err(|e| Failure::Validation(format!("run: {e}")))?,
            key if SYSTEM_KEYS.contains(&key) => {
                system.insert(k.clone(), v.clone());
            }
            other => return Err(Failure::Validation(format!("unknown field `{other}`"))),
        }
    }
    if name.is_empty() || name.contains(['/', '\\']) {
        return Err(Failure::Validation(format!("name `{name}` is not a plain file name")));
    }
    let mut raw: RawScenario =
        serde_json::from_value(Value::Object(system)).map_err(|e| Failure::Validation(e.to_string()))?;
    if let Some(m) = run.separation_over_d {
        let center = raw.dimers.first().cloned();
        let template = center.unwrap_or(awq_core::config::RawDimer { center: 0.0, rho0: None, h: None, parity: None });
        let a = -((m / 2) as f64) * raw.chain.d;
        raw.dimers = vec![
            awq_core::config::RawDimer { center: a, ..template.clone() },
            awq_core::config::RawDimer { center: a + m as f64 * raw.chain.d, ..template },
        ];
    }
    let config = build_config(&raw).map_err(Failure::from)?;
    Ok(Scenario { name, config, run })
}
