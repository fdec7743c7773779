//! Experiment specifications: the JSON schema shared by the CLI flags and
//! `--config` files.

use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentName {
    Up,
    KernelSweep,
    CompareGg,
    MinVar,
    FrameUep,
    FrameCascade,
    FrameLimits,
    ReferenceLimits,
}

impl ExperimentName {
    pub fn as_str(&self) -> &'static str {
        match self {
            ExperimentName::Up => "up",
            ExperimentName::KernelSweep => "kernel-sweep",
            ExperimentName::CompareGg => "compare-gg",
            ExperimentName::MinVar => "min-var",
            ExperimentName::FrameUep => "frame-uep",
            ExperimentName::FrameCascade => "frame-cascade",
            ExperimentName::FrameLimits => "frame-limits",
            ExperimentName::ReferenceLimits => "reference-limits",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    #[default]
    Csv,
    Json,
}

/// A fully described experiment. The `params` object is validated against
/// the per-experiment schema before execution.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExperimentSpec {
    pub name: ExperimentName,
    pub params: serde_json::Value,
    #[serde(default)]
    pub output: Option<String>,
    #[serde(default)]
    pub format: OutputFormat,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_threads")]
    pub threads: usize,
    #[serde(default = "default_budget")]
    pub budget: u64,
}

fn default_threads() -> usize {
    1
}

fn default_budget() -> u64 {
    uptorus::budget::DEFAULT_POINT_CAP
}

impl ExperimentSpec {
    pub fn from_json_str(s: &str) -> Result<Self, CliError> {
        serde_json::from_str(s).map_err(|e| CliError::Validation(format!("bad spec: {e}")))
    }

    /// Canonical one-line echo embedded in every output table. serde_json
    /// orders object keys, so the bytes are a pure function of the spec.
    pub fn canonical_echo(&self) -> String {
        serde_json::to_string(self).expect("spec serialization cannot fail")
    }
}

// ---- typed parameter blocks -------------------------------------------------

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct UpParams {
    pub kernel: KernelId,
    #[serde(default)]
    pub n: Option<u32>,
    #[serde(default, rename = "N")]
    pub n_box: Option<Vec<i64>>,
    #[serde(default)]
    pub d: Option<usize>,
    #[serde(rename = "L")]
    pub l: Vec<i64>,
    #[serde(default)]
    pub k0: Option<Vec<i64>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum KernelId {
    Dirichlet,
    Fejer,
    PoweredCos,
    PerturbedP,
    PerturbedT,
    DirichletAlong,
    FejerAlong,
}

impl KernelId {
    pub fn as_str(&self) -> &'static str {
        match self {
            KernelId::Dirichlet => "dirichlet",
            KernelId::Fejer => "fejer",
            KernelId::PoweredCos => "powered-cos",
            KernelId::PerturbedP => "perturbed-p",
            KernelId::PerturbedT => "perturbed-t",
            KernelId::DirichletAlong => "dirichlet-along",
            KernelId::FejerAlong => "fejer-along",
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KernelSweepParams {
    pub kernel: KernelId,
    pub n: Vec<u32>,
    #[serde(default)]
    pub d: Option<usize>,
    #[serde(rename = "L")]
    pub l: Vec<i64>,
    #[serde(default)]
    pub k0: Option<Vec<i64>>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CompareGgParams {
    /// "p" for the perturbed cosine power, "t" for the perturbed line power.
    pub variant: String,
    pub n: Vec<u32>,
    #[serde(rename = "L")]
    pub l: Vec<i64>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MinVarParams {
    #[serde(default = "default_mode")]
    pub mode: String,
    #[serde(default = "default_support")]
    pub support: String,
    #[serde(default, rename = "N")]
    pub n_box: Option<Vec<i64>>,
    #[serde(default)]
    pub k0: Option<Vec<i64>>,
    #[serde(default)]
    pub m: Option<u32>,
    #[serde(default)]
    pub points: Option<Vec<Vec<i64>>>,
    #[serde(default, rename = "L")]
    pub l: Option<Vec<i64>>,
    #[serde(default)]
    pub normalize: bool,
}

fn default_mode() -> String {
    "directional".into()
}

fn default_support() -> String {
    "box".into()
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FrameParams {
    #[serde(rename = "A")]
    pub a: serde_json::Value,
    #[serde(rename = "L")]
    pub l: Vec<i64>,
    #[serde(default)]
    pub levels: Vec<u32>,
    #[serde(default = "default_eps")]
    pub eps: f64,
    // cascade-only knobs
    #[serde(default)]
    pub j_max: Option<u32>,
    #[serde(default)]
    pub radius: Option<i64>,
    #[serde(default)]
    pub count: Option<u32>,
}

pub fn default_eps() -> f64 {
    1e-8
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReferenceLimitsParams {
    #[serde(rename = "L")]
    pub l: Vec<i64>,
    pub levels: Vec<u32>,
    #[serde(default = "default_eps")]
    pub eps: f64,
}

pub fn parse_params<T: for<'de> Deserialize<'de>>(v: &serde_json::Value) -> Result<T, CliError> {
    serde_json::from_value(v.clone()).map_err(|e| CliError::Validation(format!("bad params: {e}")))
}

/// Resolves the dilation matrix parameter: "quincunx", "dyadic", or an
/// explicit row matrix.
pub fn parse_dilation(v: &serde_json::Value) -> Result<uptorus::frames::DilationMatrix, CliError> {
    match v {
        serde_json::Value::String(s) => match s.as_str() {
            "quincunx" => Ok(uptorus::frames::quincunx()),
            "dyadic" | "2" => Ok(uptorus::frames::dyadic()),
            other => Err(CliError::Validation(format!(
                "unknown dilation name {other:?}; use \"quincunx\", \"dyadic\" or a row matrix"
            ))),
        },
        serde_json::Value::Array(_) => {
            let rows: Vec<Vec<i64>> = serde_json::from_value(v.clone())
                .map_err(|e| CliError::Validation(format!("bad dilation matrix: {e}")))?;
            Ok(uptorus::frames::validate_dilation(&rows)?)
        }
        _ => Err(CliError::Validation(
            "dilation must be a name or a row matrix".into(),
        )),
    }
}
