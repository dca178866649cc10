//! Scenario configuration files.
//!
//! TOML with the physical parameters at top level and one table per concern:
//!
//! ```toml
//! epsilon = 0.1
//! variant = "exact"
//! initial_state = "ground"
//!
//! [time_grid]
//! kind = "log"
//! t_min = 1e-2
//! t_max = 1e7
//! points = 181
//!
//! [sweep]
//! parameter = "epsilon"
//! values = [1e-1, 1e-3, 5e-5]
//! ```
//!
//! Every key is optional and defaults to the reference parameter set; unknown
//! keys are rejected.

use std::path::Path;

use collisional::{ChainSpec64, QuadratureConfig, Variant};
use serde::{Deserialize, Serialize};

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum ConfigError {
    #[error("{path}: line {line}: {message}")]
    Parse { path: String, line: usize, message: String },
    #[error("invalid configuration: {invariant} ({message})")]
    Validation { invariant: &'static str, message: String },
    #[error("cannot read {path}: {message}")]
    Io { path: String, message: String },
}

fn invalid(invariant: &'static str, message: impl Into<String>) -> ConfigError {
    ConfigError::Validation { invariant, message: message.into() }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ScenarioConfig {
    pub n_qubits: usize,
    pub h: f64,
    pub epsilon: f64,
    pub g: f64,
    pub mass: f64,
    pub beta: f64,
    pub sigma_p: f64,
    pub gamma: f64,
    /// exact | narrow | band-resolved | local
    pub variant: String,
    /// `ground`, `gibbs`, `local-thermal`, a bit string such as `"010"`
    /// (qubit 1 first), or the path of a density-matrix file.
    pub initial_state: String,
    /// spectral | rk4
    pub method: String,
    pub time_grid: TimeGrid,
    pub quadrature: Quadrature,
    pub outputs: Outputs,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sweep: Option<Sweep>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TimeGrid {
    /// log | linear
    pub kind: String,
    pub t_min: f64,
    pub t_max: f64,
    pub points: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Quadrature {
    pub panels: usize,
    pub nodes: usize,
    #[serde(rename = "W")]
    pub w: f64,
    pub tol_quad: f64,
    pub trace_projection: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Outputs {
    pub directory: String,
    pub emit_plots: bool,
    /// Level pair `(j, k)` of `β_eff`; defaults to the ground state and the
    /// middle of the one-excitation band.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub beta_pair: Option<[usize; 2]>,
    /// Eigenbasis coherences recorded in the trajectory.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub coherences: Option<Vec<[usize; 2]>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Sweep {
    /// epsilon | sigma_p | gamma
    pub parameter: String,
    pub values: Vec<f64>,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        let p = ChainSpec64::reference_defaults();
        Self {
            n_qubits: p.n_qubits,
            h: p.h,
            epsilon: p.epsilon,
            g: p.g,
            mass: p.mass,
            beta: p.beta,
            sigma_p: p.sigma_p,
            gamma: p.gamma,
            variant: "exact".into(),
            initial_state: "ground".into(),
            method: "spectral".into(),
            time_grid: TimeGrid::default(),
            quadrature: Quadrature::default(),
            outputs: Outputs::default(),
            sweep: None,
        }
    }
}

impl Default for TimeGrid {
    fn default() -> Self {
        Self { kind: "log".into(), t_min: 1e-2, t_max: 1e7, points: 181 }
    }
}

impl Default for Quadrature {
    fn default() -> Self {
        let q = QuadratureConfig::<f64>::default();
        Self {
            panels: q.panels,
            nodes: q.nodes,
            w: q.cutoff_w,
            tol_quad: q.tol_quad,
            trace_projection: q.trace_projection,
        }
    }
}

impl Default for Outputs {
    fn default() -> Self {
        Self { directory: "out".into(), emit_plots: false, beta_pair: None, coherences: None }
    }
}

/// Propagation scheme requested by the configuration.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MethodChoice {
    Spectral,
    Rk4,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepParameter {
    Epsilon,
    SigmaP,
    Gamma,
}

impl SweepParameter {
    pub fn name(self) -> &'static str {
        match self {
            SweepParameter::Epsilon => "epsilon",
            SweepParameter::SigmaP => "sigma_p",
            SweepParameter::Gamma => "gamma",
        }
    }
}

fn line_of(text: &str, offset: usize) -> usize {
    text[..offset.min(text.len())].matches('\n').count() + 1
}

/// Parses and validates configuration text; `origin` names it in errors.
pub fn parse_config_str(text: &str, origin: &str) -> Result<ScenarioConfig, ConfigError> {
    let config: ScenarioConfig = toml::from_str(text).map_err(|e| ConfigError::Parse {
        path: origin.to_string(),
        line: e.span().map_or(0, |s| line_of(text, s.start)),
        message: e.message().to_string(),
    })?;
    config.validate()?;
    Ok(config)
}

pub fn parse_config(path: &Path) -> Result<ScenarioConfig, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|e| ConfigError::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    })?;
    parse_config_str(&text, &path.display().to_string())
}

impl ScenarioConfig {
    pub fn chain_spec(&self) -> ChainSpec64 {
        ChainSpec64 {
            n_qubits: self.n_qubits,
            h: self.h,
            epsilon: self.epsilon,
            g: self.g,
            mass: self.mass,
            beta: self.beta,
            sigma_p: self.sigma_p,
            gamma: self.gamma,
        }
    }

    pub fn variant(&self) -> Result<Variant, ConfigError> {
        self.variant.parse().map_err(|_| {
            invalid("variant is one of exact, narrow, band-resolved, local", self.variant.clone())
        })
    }

    pub fn method(&self) -> Result<MethodChoice, ConfigError> {
        match self.method.to_ascii_lowercase().as_str() {
            "spectral" => Ok(MethodChoice::Spectral),
            "rk4" => Ok(MethodChoice::Rk4),
            other => Err(invalid("method is spectral or rk4", other.to_string())),
        }
    }

    pub fn quadrature_config(&self) -> QuadratureConfig<f64> {
        QuadratureConfig {
            panels: self.quadrature.panels,
            nodes: self.quadrature.nodes,
            cutoff_w: self.quadrature.w,
            tol_quad: self.quadrature.tol_quad,
            trace_projection: self.quadrature.trace_projection,
        }
    }

    pub fn sweep_parameter(&self) -> Result<Option<SweepParameter>, ConfigError> {
        let Some(sweep) = &self.sweep else { return Ok(None) };
        match sweep.parameter.as_str() {
            "epsilon" => Ok(Some(SweepParameter::Epsilon)),
            "sigma_p" => Ok(Some(SweepParameter::SigmaP)),
            "gamma" => Ok(Some(SweepParameter::Gamma)),
            other => {
                Err(invalid("sweep.parameter is epsilon, sigma_p or gamma", other.to_string()))
            }
        }
    }

    /// Copy with the swept parameter set to `value`.
    pub fn with_parameter(&self, parameter: SweepParameter, value: f64) -> Self {
        let mut c = self.clone();
        match parameter {
            SweepParameter::Epsilon => c.epsilon = value,
            SweepParameter::SigmaP => c.sigma_p = value,
            SweepParameter::Gamma => c.gamma = value,
        }
        c.sweep = None;
        c
    }

    /// Sample times of the trajectory.
    pub fn times(&self) -> Vec<f64> {
        let g = &self.time_grid;
        let n = g.points;
        (0..n)
            .map(|i| {
                let f = i as f64 / (n - 1) as f64;
                if g.kind == "log" {
                    10f64.powf(g.t_min.log10() + f * (g.t_max.log10() - g.t_min.log10()))
                } else {
                    g.t_min + f * (g.t_max - g.t_min)
                }
            })
            .collect()
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let spec = self.chain_spec();
        if !(self.epsilon >= 0.0) {
            return Err(invalid("epsilon ≥ 0", format!("epsilon = {}", self.epsilon)));
        }
        spec.validate().map_err(|e| invalid("chain parameters are physical", e.to_string()))?;
        if !(self.gamma > 0.0) || !self.gamma.is_finite() {
            return Err(invalid("gamma > 0", format!("gamma = {}", self.gamma)));
        }
        let variant = self.variant()?;
        if variant.needs_bands() && self.epsilon >= self.h / 4.0 {
            return Err(invalid(
                "epsilon < h/4 for band-based variants",
                format!("epsilon = {}, h = {}, variant = {}", self.epsilon, self.h, variant),
            ));
        }
        self.method()?;
        let g = &self.time_grid;
        if g.kind != "log" && g.kind != "linear" {
            return Err(invalid("time_grid.kind is log or linear", g.kind.clone()));
        }
        if !(g.t_min < g.t_max) || !g.t_max.is_finite() {
            return Err(invalid(
                "t_min < t_max",
                format!("t_min = {}, t_max = {}", g.t_min, g.t_max),
            ));
        }
        if g.points < 2 {
            return Err(invalid("points ≥ 2", format!("points = {}", g.points)));
        }
        if g.kind == "log" && !(g.t_min > 0.0) {
            return Err(invalid("t_min > 0 on a log grid", format!("t_min = {}", g.t_min)));
        }
        if g.t_min < 0.0 {
            return Err(invalid("t_min ≥ 0", format!("t_min = {}", g.t_min)));
        }
        self.quadrature_config()
            .validate()
            .map_err(|e| invalid("quadrature settings are positive", e.to_string()))?;
        let d = 1usize << self.n_qubits;
        let pairs = self.outputs.beta_pair.iter().chain(self.outputs.coherences.iter().flatten());
        for &[a, b] in pairs {
            if a >= d || b >= d {
                return Err(invalid("output level indices < 2^n_qubits", format!("({a}, {b})")));
            }
        }
        if let Some(sweep) = &self.sweep {
            if sweep.values.is_empty() {
                return Err(invalid("sweep values nonempty", "sweep.values = []"));
            }
            let parameter = self.sweep_parameter()?.expect("sweep present");
            for &v in &sweep.values {
                self.with_parameter(parameter, v).validate()?;
            }
        }
        Ok(())
    }
}
