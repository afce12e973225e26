//! Hamiltonian files, run configuration and small output helpers.
//!
//! Hamiltonian files hold one term per line as `<coefficient> <letters>`,
//! e.g. `0.2 IIZ`. Blank lines and text after `#` are ignored. The leftmost
//! letter acts on qubit 0.
//!
//! Run configurations are TOML key/value files:
//!
//! ```toml
//! hamiltonian = "case1.txt"    # relative to the config file
//! delta_precision = 0.05
//! eta = 0.25
//! epsilon = 0.1
//! nu = 0.1
//! delta_band = "auto"          # or a number in (0, min(π/2, τΔ)]
//! epsilon_q = 1e-12
//! epsilon_c = 1e-14
//! runtime_mode = "quadratic"   # or "optimized" (uses gate_budget if set)
//! gate_budget = 20.0
//! shot_mode = "single_shot"    # or "exact"
//! seed = 7
//! solver = "binary"            # or "changepoint"
//! grid_resolution = 0.057
//! delta_c = 0.01
//! sample_mode = "reuse"        # or "redraw"
//! # n_samples = 2000           # overrides the sample-count formula
//! ```

use std::f64::consts::FRAC_PI_2;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::estimator::ShotMode;
use crate::pauli::{normalize_hamiltonian, PauliString, PauliSum, PauliTerm};

pub fn read_file(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

pub fn write_file(path: &Path, contents: &str) -> Result<()> {
    std::fs::write(path, contents).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

pub fn parse_hamiltonian(path: &Path, delta_precision: f64) -> Result<PauliSum> {
    parse_hamiltonian_str(&read_file(path)?, path, delta_precision)
}

/// Parse Hamiltonian text; `path` is used only in error messages.
pub fn parse_hamiltonian_str(text: &str, path: &Path, delta_precision: f64) -> Result<PauliSum> {
    let err = |line: usize, reason: String| Error::Parse {
        path: path.to_path_buf(),
        line,
        reason,
    };
    let mut terms = Vec::new();
    let mut width: Option<usize> = None;
    for (i, raw) in text.lines().enumerate() {
        let no = i + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.len() != 2 {
            return Err(err(
                no,
                format!("expected `<coefficient> <pauli-letters>`, got {line:?}"),
            ));
        }
        let coefficient: f64 = fields[0]
            .parse()
            .map_err(|_| err(no, format!("bad coefficient {:?}", fields[0])))?;
        if !coefficient.is_finite() {
            return Err(err(no, "coefficient must be finite".into()));
        }
        if coefficient == 0.0 {
            return Err(err(no, "coefficient is zero".into()));
        }
        let string: PauliString = fields[1].parse().map_err(|e| err(no, format!("{e}")))?;
        match width {
            None => width = Some(string.n_qubits()),
            Some(w) if w != string.n_qubits() => {
                return Err(err(
                    no,
                    format!(
                        "string has {} qubits, earlier terms have {w}",
                        string.n_qubits()
                    ),
                ))
            }
            Some(_) => {}
        }
        terms.push(PauliTerm::new(coefficient, string).map_err(|e| err(no, format!("{e}")))?);
    }
    normalize_hamiltonian(terms, delta_precision)
}

/// Either `"auto"` (resolves to `min(π/2, τΔ)`) or an explicit margin.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum DeltaBand {
    #[default]
    Auto,
    Value(f64),
}

impl Serialize for DeltaBand {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            DeltaBand::Auto => s.serialize_str("auto"),
            DeltaBand::Value(v) => s.serialize_f64(*v),
        }
    }
}

impl<'de> Deserialize<'de> for DeltaBand {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Repr {
            Num(f64),
            Text(String),
        }
        match Repr::deserialize(d)? {
            Repr::Num(v) => Ok(DeltaBand::Value(v)),
            Repr::Text(t) if t == "auto" => Ok(DeltaBand::Auto),
            Repr::Text(t) => Err(serde::de::Error::custom(format!(
                "delta_band must be \"auto\" or a number, got {t:?}"
            ))),
        }
    }
}

impl std::str::FromStr for DeltaBand {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s == "auto" {
            return Ok(DeltaBand::Auto);
        }
        s.parse().map(DeltaBand::Value).map_err(|_| {
            invalid(
                "delta_band",
                format!("expected \"auto\" or a number, got {s:?}"),
            )
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum RuntimeMode {
    /// `r_j = max(1, ⌈2 t_j²⌉)` for every frequency.
    #[default]
    Quadratic,
    Optimized,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum SolverKind {
    #[default]
    Binary,
    Changepoint,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum SampleMode {
    /// One sample set answers every query.
    #[default]
    Reuse,
    /// Fresh samples for every bisection step.
    Redraw,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub hamiltonian: PathBuf,
    #[serde(default = "defaults::delta_precision")]
    pub delta_precision: f64,
    #[serde(default = "defaults::eta")]
    pub eta: f64,
    #[serde(default = "defaults::epsilon")]
    pub epsilon: f64,
    #[serde(default = "defaults::nu")]
    pub nu: f64,
    #[serde(default)]
    pub delta_band: DeltaBand,
    #[serde(default = "defaults::epsilon_q")]
    pub epsilon_q: f64,
    #[serde(default = "defaults::epsilon_c")]
    pub epsilon_c: f64,
    #[serde(default)]
    pub runtime_mode: RuntimeMode,
    #[serde(default)]
    pub gate_budget: Option<f64>,
    #[serde(default)]
    pub shot_mode: ShotMode,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub solver: SolverKind,
    #[serde(default = "defaults::grid_resolution")]
    pub grid_resolution: f64,
    #[serde(default = "defaults::delta_c")]
    pub delta_c: f64,
    #[serde(default)]
    pub sample_mode: SampleMode,
    #[serde(default)]
    pub n_samples: Option<u64>,
}

mod defaults {
    pub fn delta_precision() -> f64 {
        0.05
    }
    pub fn eta() -> f64 {
        0.25
    }
    pub fn epsilon() -> f64 {
        0.1
    }
    pub fn nu() -> f64 {
        0.1
    }
    pub fn epsilon_q() -> f64 {
        crate::compiler::DEFAULT_EPSILON_Q
    }
    pub fn epsilon_c() -> f64 {
        crate::compiler::DEFAULT_EPSILON_C
    }
    pub fn grid_resolution() -> f64 {
        0.057
    }
    pub fn delta_c() -> f64 {
        0.01
    }
}

impl RunConfig {
    /// Defaults for everything except the Hamiltonian path.
    pub fn with_hamiltonian(path: impl Into<PathBuf>) -> Self {
        Self {
            hamiltonian: path.into(),
            delta_precision: defaults::delta_precision(),
            eta: defaults::eta(),
            epsilon: defaults::epsilon(),
            nu: defaults::nu(),
            delta_band: DeltaBand::Auto,
            epsilon_q: defaults::epsilon_q(),
            epsilon_c: defaults::epsilon_c(),
            runtime_mode: RuntimeMode::Quadratic,
            gate_budget: None,
            shot_mode: ShotMode::SingleShot,
            seed: 0,
            solver: SolverKind::Binary,
            grid_resolution: defaults::grid_resolution(),
            delta_c: defaults::delta_c(),
            sample_mode: SampleMode::Reuse,
            n_samples: None,
        }
    }

    /// Parse TOML; a relative Hamiltonian path is taken relative to `path`.
    pub fn from_toml(text: &str, path: &Path) -> Result<Self> {
        let mut cfg: RunConfig =
            toml::from_str(text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        if cfg.hamiltonian.is_relative() {
            if let Some(dir) = path.parent() {
                cfg.hamiltonian = dir.join(&cfg.hamiltonian);
            }
        }
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_toml(&read_file(path)?, path)
    }

    /// Checks that do not need the Hamiltonian.
    pub fn validate(&self) -> Result<()> {
        if !(self.delta_precision > 0.0 && self.delta_precision.is_finite()) {
            return Err(invalid("delta_precision", "must be positive and finite"));
        }
        if !(self.eta > 0.0 && self.eta <= 1.0) {
            return Err(invalid(
                "eta",
                format!("must lie in (0, 1], got {}", self.eta),
            ));
        }
        if !(self.epsilon > 0.0 && self.epsilon < self.eta / 2.0) {
            return Err(invalid(
                "epsilon",
                format!("must lie in (0, eta/2), got {}", self.epsilon),
            ));
        }
        if !(self.nu > 0.0 && self.nu < 1.0) {
            return Err(invalid(
                "nu",
                format!("must lie in (0, 1), got {}", self.nu),
            ));
        }
        if let DeltaBand::Value(d) = self.delta_band {
            if !(d > 0.0 && d <= FRAC_PI_2) {
                return Err(invalid(
                    "delta_band",
                    format!("must lie in (0, π/2], got {d}"),
                ));
            }
        }
        if !(self.epsilon_q > 0.0 && self.epsilon_q < 1.0) {
            return Err(invalid("epsilon_q", "must lie in (0, 1)"));
        }
        if !(self.epsilon_c > 0.0) {
            return Err(invalid("epsilon_c", "must be positive"));
        }
        if let Some(b) = self.gate_budget {
            if !(b >= 1.0) {
                return Err(invalid(
                    "gate_budget",
                    format!("must be at least 1, got {b}"),
                ));
            }
        }
        if !(self.grid_resolution > 0.0 && self.grid_resolution < std::f64::consts::PI) {
            return Err(invalid("grid_resolution", "must lie in (0, π)"));
        }
        if !(self.delta_c > 0.0) {
            return Err(invalid("delta_c", "must be positive"));
        }
        if self.n_samples == Some(0) {
            return Err(invalid("n_samples", "must be at least 1"));
        }
        Ok(())
    }

    /// Band margin for a Hamiltonian with normalization `τ`.
    pub fn resolve_delta_band(&self, tau: f64) -> Result<f64> {
        let cap = FRAC_PI_2.min(tau * self.delta_precision);
        match self.delta_band {
            DeltaBand::Auto => Ok(cap),
            DeltaBand::Value(d) if d > 0.0 && d <= cap * (1.0 + 1e-12) => Ok(d),
            DeltaBand::Value(d) => Err(invalid(
                "delta_band",
                format!("must lie in (0, min(π/2, τΔ)] = (0, {cap}], got {d}"),
            )),
        }
    }
}

/// 64-bit FNV-1a.
pub fn fnv1a64(bytes: &[u8]) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for &b in bytes {
        h ^= b as u64;
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h
}
