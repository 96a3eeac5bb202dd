//! Experiment configuration: a JSON document, command-line flags, and the
//! rule that a flag always overrides the file.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use clap::ValueEnum;
use logvol::sampling::RadialLaw;
use serde::{Deserialize, Serialize};

/// Failures split by exit status: configuration problems exit with 2,
/// everything that goes wrong while computing or writing exits with 3.
#[derive(Debug)]
pub enum CliError {
    Config(String),
    Failure(String),
}

impl CliError {
    pub fn config(msg: impl Into<String>) -> Self {
        CliError::Config(msg.into())
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Failure(_) => 3,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(msg) => write!(f, "configuration: {msg}"),
            CliError::Failure(msg) => write!(f, "{msg}"),
        }
    }
}

impl From<logvol::Error> for CliError {
    fn from(e: logvol::Error) -> Self {
        CliError::Failure(e.to_string())
    }
}

pub type CliResult<T> = Result<T, CliError>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Csv,
    Json,
}

/// Dimension pair; `p` is absent for square-matrix experiments where only
/// the order matters.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DimsSpec {
    pub n: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p: Option<u32>,
}

impl DimsSpec {
    pub fn simplex(n: u32, p: u32) -> Self {
        DimsSpec { n, p: Some(p) }
    }

    pub fn matrix(n: u32) -> Self {
        DimsSpec { n, p: None }
    }
}

/// Radial law named in a config file. Custom admissible pairs take closures
/// and stay library-only.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum LawSpec {
    SphericalUnit,
    ScaledGaussian,
    BetaPrime { phi: f64 },
    ParetoLogRadius { alpha: f64, scale: f64 },
}

impl LawSpec {
    pub fn to_law(self) -> RadialLaw {
        match self {
            LawSpec::SphericalUnit => RadialLaw::SphericalUnit,
            LawSpec::ScaledGaussian => RadialLaw::ScaledGaussian,
            LawSpec::BetaPrime { phi } => RadialLaw::BetaPrime { phi },
            LawSpec::ParetoLogRadius { alpha, scale } => {
                RadialLaw::ParetoLogRadius { alpha, scale }
            }
        }
    }
}

/// One experiment run, as read from `--config`. Every field is optional;
/// the experiment fills in its canonical defaults and the resolved values
/// are echoed in the output header.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: Option<String>,
    pub dims: Option<DimsSpec>,
    pub dims_grid: Option<Vec<DimsSpec>>,
    pub law: Option<LawSpec>,
    pub n_samples: Option<usize>,
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub format: Option<OutputFormat>,
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> CliResult<Self> {
        let text = fs::read_to_string(path)
            .map_err(|e| CliError::config(format!("cannot read {}: {e}", path.display())))?;
        serde_json::from_str(&text)
            .map_err(|e| CliError::config(format!("cannot parse {}: {e}", path.display())))
    }

    /// Overlays command-line flags; a flag set on the command line wins over
    /// the value in the file.
    pub fn override_with(
        mut self,
        seed: Option<u64>,
        samples: Option<usize>,
        out: Option<PathBuf>,
        format: Option<OutputFormat>,
    ) -> Self {
        if seed.is_some() {
            self.seed = seed;
        }
        if samples.is_some() {
            self.n_samples = samples;
        }
        if out.is_some() {
            self.out = out;
        }
        if format.is_some() {
            self.format = format;
        }
        self
    }

    /// Grid of dimension pairs, from `dims_grid`, else a single `dims`,
    /// else the experiment default.
    pub fn grid_or(&self, default: &[DimsSpec]) -> Vec<DimsSpec> {
        if let Some(grid) = &self.dims_grid {
            grid.clone()
        } else if let Some(d) = self.dims {
            vec![d]
        } else {
            default.to_vec()
        }
    }

    pub fn samples_or(&self, default: usize) -> usize {
        self.n_samples.unwrap_or(default)
    }

    pub fn seed_or_default(&self) -> u64 {
        self.seed.unwrap_or(DEFAULT_SEED)
    }
}

pub const DEFAULT_SEED: u64 = 20260814;
