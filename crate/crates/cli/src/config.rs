//! Run configuration: the JSON config file schema, flag overlay, and
//! validation. Flags override file values; unknown keys are rejected with
//! the list of valid ones.

use nhscope::models::{Boundary, ModelSpec};
use nhscope::petermann::DetectorParams;
use serde::{Deserialize, Serialize};
use std::fmt;
use std::path::PathBuf;

#[derive(Debug)]
pub struct ConfigError(pub String);

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl std::error::Error for ConfigError {}

fn err<T>(msg: impl Into<String>) -> Result<T, ConfigError> {
    Err(ConfigError(msg.into()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Csv,
    Json,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelConfig {
    pub variant: Option<String>,
    pub t1: Option<f64>,
    pub t2: Option<f64>,
    pub g: Option<f64>,
    pub gamma: Option<f64>,
    pub jr: Option<f64>,
    pub jl: Option<f64>,
    pub v: Option<f64>,
    pub u: Option<f64>,
    pub w: Option<f64>,
    pub k: Option<f64>,
    pub t0: Option<f64>,
    pub alpha_num: Option<u64>,
    pub alpha_den: Option<u64>,
    pub sites: Option<usize>,
    pub cells: Option<usize>,
    pub boundary: Option<Boundary>,
    pub path: Option<String>,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub axis: Option<String>,
    pub lo: Option<f64>,
    pub hi: Option<f64>,
    pub steps: Option<usize>,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DetectorConfig {
    pub w: Option<usize>,
    pub kappa: Option<f64>,
    pub floor: Option<f64>,
}

impl DetectorConfig {
    /// Overlay these overrides on a base parameter set.
    pub fn apply(&self, base: DetectorParams) -> DetectorParams {
        DetectorParams {
            w: self.w.unwrap_or(base.w),
            kappa: self.kappa.unwrap_or(base.kappa),
            floor: self.floor.unwrap_or(base.floor),
        }
    }
}

/// Full run description; every command reads the subset it needs.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub command: Option<String>,
    #[serde(default)]
    pub model: ModelConfig,
    #[serde(default)]
    pub grid: GridConfig,
    #[serde(default)]
    pub detector: DetectorConfig,
    pub output: Option<PathBuf>,
    pub format: Option<OutputFormat>,
    pub sizes: Option<Vec<usize>>,
    pub blocks: Option<Vec<usize>>,
    pub state: Option<usize>,
    pub tol: Option<f64>,
}

macro_rules! overlay {
    ($dst:expr, $src:expr, [$($field:ident),* $(,)?]) => {
        $( if $src.$field.is_some() { $dst.$field = $src.$field.clone(); } )*
    };
}

impl RunConfig {
    /// Parse a JSON config file; unknown keys are reported with the valid
    /// alternatives (serde lists them).
    pub fn from_json(text: &str) -> Result<RunConfig, ConfigError> {
        serde_json::from_str(text).map_err(|e| ConfigError(format!("config file: {e}")))
    }

    /// Overlay `other` (typically command-line flags) on this config;
    /// set fields in `other` win.
    pub fn overlay(&mut self, other: &RunConfig) {
        overlay!(self, other, [command, output, format, sizes, blocks, state, tol]);
        overlay!(
            self.model,
            other.model,
            [
                variant, t1, t2, g, gamma, jr, jl, v, u, w, k, t0, alpha_num, alpha_den, sites,
                cells, boundary, path,
            ]
        );
        overlay!(self.grid, other.grid, [axis, lo, hi, steps]);
        overlay!(self.detector, other.detector, [w, kappa, floor]);
    }

    /// Resolve the model section into a concrete spec. Missing fields are
    /// named; defaults follow the models' conventions (t2 = 1 style
    /// defaults are left to presets, not invented here).
    pub fn model_spec(&self) -> Result<ModelSpec, ConfigError> {
        let m = &self.model;
        let need = |name: &str, v: Option<f64>| -> Result<f64, ConfigError> {
            v.ok_or_else(|| ConfigError(format!("model.{name} is required for this model")))
        };
        let variant = m
            .variant
            .as_deref()
            .ok_or_else(|| ConfigError("model.variant is required".into()))?;
        match variant {
            "ssh" | "non_reciprocal_ssh" => Ok(ModelSpec::NonReciprocalSsh {
                t1: need("t1", m.t1)?,
                t2: need("t2", m.t2)?,
                g: need("g", m.g)?,
                cells: m
                    .cells
                    .ok_or_else(|| ConfigError("model.cells is required".into()))?,
                boundary: m.boundary.unwrap_or(Boundary::Open),
            }),
            "two_level" => Ok(ModelSpec::TwoLevel {
                gamma: m.gamma.unwrap_or(1.0),
            }),
            "quasicrystal" => Ok(ModelSpec::Quasicrystal {
                jr: need("jr", m.jr)?,
                jl: need("jl", m.jl)?,
                v: need("v", m.v)?,
                alpha_num: m.alpha_num.unwrap_or(239),
                alpha_den: m.alpha_den.unwrap_or(169),
                sites: m
                    .sites
                    .ok_or_else(|| ConfigError("model.sites is required".into()))?,
                boundary: m.boundary.unwrap_or(Boundary::Periodic),
            }),
            "pt_ssh" | "pt_ssh_bloch" => Ok(ModelSpec::PtSshBloch {
                u: need("u", m.u)?,
                v: need("v", m.v)?,
                w: need("w", m.w)?,
                k: m.k.unwrap_or(0.0),
            }),
            "sl_chain" | "sturm_liouville_chain" => Ok(ModelSpec::SturmLiouvilleChain {
                t0: m.t0.unwrap_or(1.0),
                g: need("g", m.g)?,
                cells: m
                    .cells
                    .ok_or_else(|| ConfigError("model.cells is required".into()))?,
                boundary: m.boundary.unwrap_or(Boundary::Open),
            }),
            "external" => Ok(ModelSpec::External {
                path: m
                    .path
                    .clone()
                    .ok_or_else(|| ConfigError("model.path is required".into()))?,
            }),
            other => err(format!(
                "model.variant `{other}` unknown; expected one of ssh, two_level, \
                 quasicrystal, pt_ssh, sl_chain, external"
            )),
        }
    }

    pub fn grid_spec(&self) -> Result<(String, f64, f64, usize), ConfigError> {
        let g = &self.grid;
        let axis = g
            .axis
            .clone()
            .ok_or_else(|| ConfigError("grid.axis is required".into()))?;
        let lo = g.lo.ok_or_else(|| ConfigError("grid.lo is required".into()))?;
        let hi = g.hi.ok_or_else(|| ConfigError("grid.hi is required".into()))?;
        let steps = g
            .steps
            .ok_or_else(|| ConfigError("grid.steps is required".into()))?;
        if steps < 3 {
            return err(format!("grid.steps = {steps}, need at least 3"));
        }
        if lo >= hi || lo.is_nan() || hi.is_nan() {
            return err(format!("grid.lo = {lo} must be below grid.hi = {hi}"));
        }
        Ok((axis, lo, hi, steps))
    }
}

/// Named presets reproducing each figure's data at desk scale.
pub fn preset(name: &str) -> Result<RunConfig, ConfigError> {
    let json = match name {
        "fig1b" => {
            r#"{
              "command": "sweep",
              "model": {"variant": "ssh", "t1": 0.05, "t2": 1.0, "g": 0.1,
                        "cells": 150, "boundary": "open"},
              "grid": {"axis": "t1", "lo": 0.05, "hi": 1.5, "steps": 300}
            }"#
        }
        "fig2" => {
            r#"{
              "command": "sweep",
              "model": {"variant": "two_level"},
              "grid": {"axis": "gamma", "lo": 0.01, "hi": 3.0, "steps": 300}
            }"#
        }
        "fig3" => {
            r#"{
              "command": "sweep",
              "model": {"variant": "quasicrystal", "jr": 1.0, "jl": 0.5, "v": 0.2,
                        "alpha_num": 239, "alpha_den": 169, "sites": 169,
                        "boundary": "periodic"},
              "grid": {"axis": "v", "lo": 0.2, "hi": 1.8, "steps": 161}
            }"#
        }
        "fig4" => {
            r#"{
              "command": "bloch",
              "model": {"variant": "pt_ssh", "u": 0.5, "v": 0.8, "w": 0.7},
              "grid": {"steps": 400}
            }"#
        }
        "fig5" => {
            r#"{
              "command": "sweep",
              "model": {"variant": "sl_chain", "t0": 1.0, "g": 0.5,
                        "cells": 50, "boundary": "open"},
              "grid": {"axis": "g", "lo": 0.5, "hi": 2.0, "steps": 151}
            }"#
        }
        "fig-sm-finite-size" => {
            r#"{
              "command": "finite-size",
              "model": {"variant": "ssh", "t1": 0.05, "t2": 1.0, "g": 0.1, "cells": 50},
              "grid": {"axis": "t1", "lo": 0.05, "hi": 0.89, "steps": 43},
              "sizes": [50, 100, 150, 200, 300, 400]
            }"#
        }
        other => {
            return err(format!(
                "unknown preset `{other}`; expected one of fig1b, fig2, fig3, fig4, \
                 fig5, fig-sm-finite-size"
            ))
        }
    };
    RunConfig::from_json(json)
}
