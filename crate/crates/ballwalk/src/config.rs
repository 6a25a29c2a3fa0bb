//! Run configuration: a flat JSON object, command-line flags on top, and
//! resolution of defaults and ranges.

use std::path::{Path, PathBuf};

use clap::ValueEnum;
use serde::{Deserialize, Serialize};

use ballwalk_core::walk::{DEFAULT_MAX_STEPS, DEFAULT_STOP_FRACTION};

use crate::grammar;

/// Stop tolerance used by default for the irregularity experiment, where
/// stopping near the puncture must be negligible.
pub const IRREGULARITY_STOP_TOLERANCE: f64 = 1e-200;

pub const DEFAULT_N_WALKS: u64 = 10_000;
pub const DEFAULT_N_OUTER: u64 = 64;
pub const DEFAULT_N_INNER: u64 = 1_000;
pub const DEFAULT_PROBES: u64 = 8;
pub const DEFAULT_REGULARITY_THRESHOLD: f64 = 0.95;
pub const DEFAULT_GAP_THRESHOLD: f64 = 0.9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    Solve,
    Field,
    Exitdist,
    Regularity,
    Escape,
    Cone,
    CheckMvp,
    CheckAvg,
    Irregularity,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Self::Solve => "solve",
            Self::Field => "field",
            Self::Exitdist => "exitdist",
            Self::Regularity => "regularity",
            Self::Escape => "escape",
            Self::Cone => "cone",
            Self::CheckMvp => "check-mvp",
            Self::CheckAvg => "check-avg",
            Self::Irregularity => "irregularity",
        }
    }

    fn walks(self) -> bool {
        !matches!(self, Self::Cone | Self::CheckAvg)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Kind {
    Ball,
    Sphere,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

/// Every configurable key. All are optional so that a file and flags can be
/// layered; [`RunConfig::resolve`] fills defaults and checks ranges.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub command: Option<Command>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub domain: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub data: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub oracle: Option<String>,
    /// Test function for `check-avg`: `norm2`, `x1^4`, or an oracle.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub function: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub x0: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub y0: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub direction: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub grid: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub epsilons: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub distances: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub stop_tolerance: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_steps: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub kind: Option<Kind>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_walks: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_outer: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_inner: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub radius: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub delta: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub delta_hat: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub probes: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dim: Option<usize>,
    /// Exterior cone ratio `R`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ratio: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub half_angle: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub threshold: Option<f64>,
    /// Allowance added to the statistical tolerance of oracle comparisons.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bias_budget: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub threads: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub format: Option<Format>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub svg: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trace: Option<PathBuf>,
}

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum ConfigError {
    #[error("{origin}:{line}:{column}: {message}")]
    Syntax {
        origin: String,
        line: usize,
        column: usize,
        message: String,
    },
    #[error("missing required key `{0}`")]
    Missing(&'static str),
    #[error("`{key}` out of range: {message}")]
    Range { key: &'static str, message: String },
    #[error("`{key}`: {message}")]
    Invalid { key: &'static str, message: String },
    #[error("cannot read {path}: {message}")]
    Io { path: String, message: String },
}

fn range(key: &'static str, message: impl Into<String>) -> ConfigError {
    ConfigError::Range {
        key,
        message: message.into(),
    }
}

fn invalid(key: &'static str, err: impl std::fmt::Display) -> ConfigError {
    ConfigError::Invalid {
        key,
        message: err.to_string(),
    }
}

fn require<T: Clone>(value: &Option<T>, key: &'static str) -> Result<T, ConfigError> {
    value.clone().ok_or(ConfigError::Missing(key))
}

macro_rules! overlay {
    ($top:ident, $base:ident; $($field:ident),* $(,)?) => {
        RunConfig { $($field: $top.$field.or($base.$field)),* }
    };
}

impl RunConfig {
    /// Parses a JSON config; `origin` names the source in syntax errors.
    pub fn from_json(text: &str, origin: &str) -> Result<Self, ConfigError> {
        serde_json::from_str(text).map_err(|e| ConfigError::Syntax {
            origin: origin.to_string(),
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        })
    }

    pub fn from_file(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|e| ConfigError::Io {
            path: path.display().to_string(),
            message: e.to_string(),
        })?;
        Self::from_json(&text, &path.display().to_string())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    /// `self` wins wherever it has a value.
    pub fn over(self, base: RunConfig) -> RunConfig {
        let top = self;
        overlay!(top, base;
            command, domain, data, oracle, function, x0, y0, direction, grid, epsilon,
            epsilons, distances, stop_tolerance, max_steps, kind, n_walks, n_outer, n_inner,
            radius, delta, delta_hat, probes, dim, ratio, half_angle, threshold, bias_budget,
            seed, threads, output, format, svg, trace,
        )
    }

    /// The config as embedded in reports: everything that determines the
    /// numbers, without the worker count and output location.
    pub fn for_report(&self) -> RunConfig {
        RunConfig {
            threads: None,
            output: None,
            ..self.clone()
        }
    }

    /// Fills defaults, checks that the command's required keys are present
    /// and that every value is in range. `env_seed` is the value of
    /// `BALLWALK_SEED`, used when no seed is configured.
    ///
    /// Resolution is idempotent.
    pub fn resolve(mut self, env_seed: Option<&str>) -> Result<RunConfig, ConfigError> {
        let command = require(&self.command, "command")?;
        if self.seed.is_none() {
            self.seed = Some(match env_seed {
                Some(s) => s
                    .trim()
                    .parse()
                    .map_err(|_| range("seed", format!("BALLWALK_SEED is not a 64-bit integer: {s:?}")))?,
                None => 0,
            });
        }
        self.format.get_or_insert(Format::Csv);
        self.svg.get_or_insert(false);

        if let Some(eps) = self.epsilon {
            check_epsilon("epsilon", eps)?;
        }
        if let Some(eps) = &self.epsilons {
            if eps.is_empty() {
                return Err(range("epsilons", "must not be empty"));
            }
            for &e in eps {
                check_epsilon("epsilons", e)?;
            }
        }
        if let Some(t) = self.threads {
            if t == 0 {
                return Err(range("threads", "must be at least 1"));
            }
        }
        self.check_positive()?;

        let required: &[&'static str] = match command {
            Command::Solve => &["domain", "data", "x0", "epsilon"],
            Command::Field => &["domain", "data", "grid", "epsilon"],
            Command::Exitdist => &["domain", "x0", "radius", "epsilon"],
            Command::Regularity => &["domain", "y0", "delta", "delta_hat", "epsilon"],
            Command::Escape => &["domain", "y0", "delta", "x0", "epsilon"],
            Command::Cone => &["dim"],
            Command::CheckMvp => &["domain", "data", "x0", "epsilon"],
            Command::CheckAvg => &["function", "x0", "epsilon"],
            Command::Irregularity => &["domain", "y0", "direction", "epsilons", "distances"],
        };
        for &key in required {
            if !self.has(key) {
                return Err(ConfigError::Missing(key));
            }
        }
        if matches!(command, Command::Cone | Command::Escape) && self.ratio.is_none() && self.half_angle.is_none() {
            return Err(ConfigError::Missing("ratio"));
        }
        if self.svg == Some(true) && self.output.is_none() {
            return Err(invalid("svg", "needs an output path"));
        }

        if command.walks() {
            self.kind.get_or_insert(Kind::Ball);
            self.max_steps.get_or_insert(DEFAULT_MAX_STEPS);
            self.n_walks.get_or_insert(DEFAULT_N_WALKS);
            if command == Command::CheckMvp {
                self.n_outer.get_or_insert(DEFAULT_N_OUTER);
                self.n_inner.get_or_insert(DEFAULT_N_INNER);
            }
            if command == Command::Regularity {
                self.probes.get_or_insert(DEFAULT_PROBES);
                self.threshold.get_or_insert(DEFAULT_REGULARITY_THRESHOLD);
            }
            if command == Command::Irregularity {
                self.threshold.get_or_insert(DEFAULT_GAP_THRESHOLD);
            }
            let domain = grammar::parse_domain(self.domain.as_deref().expect("required"))
                .map_err(|e| invalid("domain", e))?;
            let eps = match command {
                Command::Irregularity => self.epsilons.as_ref().expect("required").iter().copied().fold(1.0, f64::min),
                _ => self.epsilon.expect("required"),
            };
            let stop = *self.stop_tolerance.get_or_insert(match command {
                Command::Irregularity => IRREGULARITY_STOP_TOLERANCE,
                _ => (DEFAULT_STOP_FRACTION * domain.diameter()).min(0.5 * eps),
            });
            if !(stop > 0.0 && stop < eps) {
                return Err(range("stop_tolerance", format!("must lie in (0, epsilon = {eps}), got {stop}")));
            }
            self.check_dims(domain.dim())?;
        }
        if command == Command::CheckAvg {
            self.n_walks.get_or_insert(DEFAULT_N_WALKS);
        }
        if let Some(d) = self.dim {
            if !(1..=ballwalk_core::MAX_DIM).contains(&d) {
                return Err(range("dim", format!("must lie in 1..=16, got {d}")));
            }
        }
        if let Some(t) = self.threshold {
            if !(0.0..=1.0).contains(&t) {
                return Err(range("threshold", format!("must lie in [0, 1], got {t}")));
            }
        }
        if let (Some(d), Some(h)) = (self.delta, self.delta_hat) {
            if h >= d {
                return Err(range("delta_hat", format!("must be smaller than delta = {d}, got {h}")));
            }
        }
        if let Some(a) = self.half_angle {
            if !(a > 0.0 && a < std::f64::consts::FRAC_PI_2) {
                return Err(range("half_angle", format!("must lie in (0, pi/2), got {a}")));
            }
        }
        if let Some(grid) = &self.grid {
            grammar::parse_grid(grid).map_err(|e| invalid("grid", e))?;
        }
        Ok(self)
    }

    fn has(&self, key: &str) -> bool {
        match key {
            "domain" => self.domain.is_some(),
            "data" => self.data.is_some(),
            "x0" => self.x0.is_some(),
            "y0" => self.y0.is_some(),
            "direction" => self.direction.is_some(),
            "grid" => self.grid.is_some(),
            "epsilon" => self.epsilon.is_some(),
            "epsilons" => self.epsilons.is_some(),
            "distances" => self.distances.is_some(),
            "radius" => self.radius.is_some(),
            "delta" => self.delta.is_some(),
            "delta_hat" => self.delta_hat.is_some(),
            "dim" => self.dim.is_some(),
            "function" => self.function.is_some(),
            _ => unreachable!("unknown key {key}"),
        }
    }

    fn check_positive(&self) -> Result<(), ConfigError> {
        let reals = [
            ("radius", self.radius),
            ("delta", self.delta),
            ("delta_hat", self.delta_hat),
            ("ratio", self.ratio),
        ];
        for (key, value) in reals {
            if let Some(v) = value {
                if !(v > 0.0 && v.is_finite()) {
                    return Err(range(key, format!("must be positive, got {v}")));
                }
            }
        }
        if let Some(b) = self.bias_budget {
            if !(b >= 0.0 && b.is_finite()) {
                return Err(range("bias_budget", format!("must be nonnegative, got {b}")));
            }
        }
        let counts = [
            ("n_walks", self.n_walks, 2),
            ("n_outer", self.n_outer, 2),
            ("n_inner", self.n_inner, 2),
            ("probes", self.probes, 1),
            ("max_steps", self.max_steps, 1),
        ];
        for (key, value, min) in counts {
            if let Some(v) = value {
                if v < min {
                    return Err(range(key, format!("must be at least {min}, got {v}")));
                }
            }
        }
        if let Some(d) = &self.distances {
            if d.is_empty() || d.iter().any(|&v| !(v > 0.0 && v.is_finite())) {
                return Err(range("distances", "must be a nonempty list of positive numbers"));
            }
        }
        Ok(())
    }

    fn check_dims(&self, dim: usize) -> Result<(), ConfigError> {
        let vectors = [("x0", &self.x0), ("y0", &self.y0), ("direction", &self.direction)];
        for (key, value) in vectors {
            if let Some(v) = value {
                if v.len() != dim {
                    return Err(invalid(key, format!("expected {dim} coordinates, got {}", v.len())));
                }
                if v.iter().any(|c| !c.is_finite()) {
                    return Err(invalid(key, "coordinates must be finite"));
                }
            }
        }
        Ok(())
    }
}

fn check_epsilon(key: &'static str, eps: f64) -> Result<(), ConfigError> {
    if eps > 0.0 && eps < 1.0 {
        Ok(())
    } else {
        Err(range(key, format!("must lie in (0, 1), got {eps}")))
    }
}
