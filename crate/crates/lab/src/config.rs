//! Experiment configuration shared by the CLI and the JSON config files.

use std::path::{Path, PathBuf};

use plancherel_core::SamplerKind;
use serde::{Deserialize, Serialize};

use crate::LabError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Experiment {
    Exact,
    Sample,
    Shape,
    Clt,
    Cov,
    Kerov,
    Edge,
    Kernel,
    Series,
    Tightness,
}

impl Experiment {
    pub fn name(self) -> &'static str {
        match self {
            Self::Exact => "exact",
            Self::Sample => "sample",
            Self::Shape => "shape",
            Self::Clt => "clt",
            Self::Cov => "cov",
            Self::Kerov => "kerov",
            Self::Edge => "edge",
            Self::Kernel => "kernel",
            Self::Series => "series",
            Self::Tightness => "tightness",
        }
    }
}

/// Everything a run needs. Fields that an experiment does not use are ignored.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: Experiment,
    /// Diagram size for the fixed-size samplers.
    pub n: Option<u64>,
    /// Poissonization parameter.
    pub t: Option<f64>,
    /// Further sizes for experiments that compare across `n`.
    #[serde(default)]
    pub n_values: Vec<u64>,
    pub x: Option<f64>,
    pub x0: Option<f64>,
    pub u: Option<f64>,
    pub z: Option<f64>,
    #[serde(default)]
    pub s: Vec<f64>,
    #[serde(default)]
    pub theta: Vec<f64>,
    /// Truncation order of the random series; `⌈√n⌉` when absent.
    pub m: Option<usize>,
    /// Highest Chebyshev index for the `kerov` experiment.
    pub k_max: Option<usize>,
    /// `|u − u′|` for the tightness probe.
    pub gap: Option<f64>,
    /// Threshold `ε` of the tightness probe.
    pub epsilon: Option<f64>,
    /// Constant `c` in the separation `|x₀ − x_i| = c·n^{−s_i/2}`.
    pub separation: Option<f64>,
    pub sampler: Option<SamplerKind>,
    pub replicas: usize,
    pub master_seed: u64,
    pub thread_count: Option<usize>,
    pub out_dir: Option<PathBuf>,
    #[serde(default)]
    pub reproducible: bool,
}

impl ExperimentConfig {
    /// Defaults for `experiment`; every optional parameter is left unset.
    pub fn new(experiment: Experiment) -> Self {
        Self {
            experiment,
            n: None,
            t: None,
            n_values: Vec::new(),
            x: None,
            x0: None,
            u: None,
            z: None,
            s: Vec::new(),
            theta: Vec::new(),
            m: None,
            k_max: None,
            gap: None,
            epsilon: None,
            separation: None,
            sampler: None,
            replicas: 100,
            master_seed: 0,
            thread_count: None,
            out_dir: None,
            reproducible: false,
        }
    }

    pub fn from_json_file(path: &Path) -> Result<Self, LabError> {
        let text = std::fs::read_to_string(path)?;
        serde_json::from_str(&text).map_err(|e| LabError::Validation(format!("{}: {e}", path.display())))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<(), LabError> {
        let bad = |msg: String| Err(LabError::Validation(msg));
        if self.replicas < 1 {
            return bad("replicas must be at least 1".into());
        }
        for (name, v) in [("x", self.x), ("x0", self.x0)] {
            if let Some(v) = v {
                if !(v > 0.0 && v < 2.0) {
                    return bad(format!("{name} must lie in (0, 2), got {v}"));
                }
            }
        }
        if let Some(u) = self.u {
            if !(u > -2.0 && u < 2.0) {
                return bad(format!("u must lie in (-2, 2), got {u}"));
            }
        }
        if let Some(&s) = self.s.iter().find(|s| !(0.0..=1.0).contains(*s)) {
            return bad(format!("s values must lie in [0, 1], got {s}"));
        }
        if let Some(&th) = self
            .theta
            .iter()
            .find(|th| !(**th > 0.0 && **th < std::f64::consts::PI))
        {
            return bad(format!("theta values must lie in (0, pi), got {th}"));
        }
        if let Some(t) = self.t {
            if !(t > 0.0) || !t.is_finite() {
                return bad(format!("t must be positive, got {t}"));
            }
        }
        if self.thread_count == Some(0) {
            return bad("thread count must be at least 1".into());
        }
        for (name, v) in [
            ("gap", self.gap),
            ("epsilon", self.epsilon),
            ("separation", self.separation),
        ] {
            if let Some(v) = v {
                if !(v > 0.0) || !v.is_finite() {
                    return bad(format!("{name} must be positive, got {v}"));
                }
            }
        }
        Ok(())
    }

    pub(crate) fn require_n(&self) -> Result<u64, LabError> {
        self.n
            .ok_or_else(|| LabError::Validation(format!("{} needs --n", self.experiment.name())))
    }

    pub(crate) fn require_t(&self) -> Result<f64, LabError> {
        self.t
            .ok_or_else(|| LabError::Validation(format!("{} needs --t", self.experiment.name())))
    }

    /// `n` followed by `n_values`, deduplicated in order.
    pub(crate) fn sizes(&self) -> Result<Vec<u64>, LabError> {
        let mut out: Vec<u64> = self.n.into_iter().chain(self.n_values.iter().copied()).collect();
        let mut seen = std::collections::HashSet::new();
        out.retain(|n| seen.insert(*n));
        if out.is_empty() {
            return Err(LabError::Validation(format!("{} needs --n", self.experiment.name())));
        }
        Ok(out)
    }
}
