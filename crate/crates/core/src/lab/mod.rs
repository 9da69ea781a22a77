//! Experiment runner behind the `ajar` binary.
//!
//! Each command takes a resolved [`ExperimentConfig`] and produces a
//! [`ResultDocument`] plus an [`ExitStatus`]. Payloads are deterministic for a
//! fixed config; only `wall_clock_seconds` varies between runs.

mod config;
mod hjminus;
mod table1;
mod verify;

use std::time::Instant;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::Value;

use crate::error::{Error, Result};
use crate::exterior::{binomial4, KForm};
use crate::grid::{GridSpec, ScalarField};
use crate::hermitian::{build_named_family, AcsField, StructureSpec};

pub use config::{
    parse_center, parse_config_text, parse_list, Command, ExperimentConfig, Overrides, DEFAULT_CENTER, DEFAULT_EIGS,
    DEFAULT_N, DEFAULT_R_INNER, DEFAULT_R_OUTER, FAULTS,
};
pub use hjminus::{run_hjminus, run_sweep, sweep_csv, SweepRow};
pub use table1::run_table1;
pub use verify::run_verify_identities;

pub const VERSION: &str = concat!("v", env!("CARGO_PKG_VERSION"));

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ExitStatus {
    Success = 0,
    Failure = 1,
    Ambiguous = 2,
    ConfigError = 3,
}

impl ExitStatus {
    pub fn code(self) -> i32 {
        self as i32
    }

    /// Failure outranks ambiguity, which outranks success.
    pub fn worst(self, other: ExitStatus) -> ExitStatus {
        let rank = |s: ExitStatus| match s {
            ExitStatus::Success => 0,
            ExitStatus::Ambiguous => 1,
            ExitStatus::Failure => 2,
            ExitStatus::ConfigError => 3,
        };
        if rank(other) > rank(self) {
            other
        } else {
            self
        }
    }

    /// Status for an error raised while running an experiment.
    pub fn for_error(e: &Error) -> ExitStatus {
        match e {
            Error::Config(_) | Error::InvalidGrid(_) | Error::InvalidStructure(_) => ExitStatus::ConfigError,
            Error::NoConvergence(_) => ExitStatus::Ambiguous,
            _ => ExitStatus::Failure,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ResultDocument {
    pub config: ExperimentConfig,
    pub version: String,
    pub wall_clock_seconds: f64,
    pub payload: Value,
    pub flags: Vec<String>,
}

impl ResultDocument {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("document serializes")
    }

    /// The payload alone, as compact JSON; byte-identical across runs.
    pub fn payload_json(&self) -> String {
        serde_json::to_string(&self.payload).expect("payload serializes")
    }
}

#[derive(Debug, Clone)]
pub struct Outcome {
    pub document: ResultDocument,
    pub status: ExitStatus,
    /// Sweep table, when the command produces one.
    pub csv: Option<String>,
}

/// Payload plus the verdict of one command.
pub struct Report {
    pub payload: Value,
    pub failures: Vec<String>,
    pub ambiguous: Vec<String>,
    pub csv: Option<String>,
}

impl Report {
    pub fn new(payload: impl Serialize) -> Result<Self> {
        let payload = serde_json::to_value(payload).map_err(|e| Error::Format(e.to_string()))?;
        Ok(Self { payload, failures: Vec::new(), ambiguous: Vec::new(), csv: None })
    }
}

/// serde_json turns NaN and infinities into `null`; payloads never contain
/// `null` otherwise, so any `null` marks a non-finite value.
fn contains_null(v: &Value) -> bool {
    match v {
        Value::Null => true,
        Value::Array(a) => a.iter().any(contains_null),
        Value::Object(o) => o.values().any(contains_null),
        _ => false,
    }
}

/// Run the configured command.
pub fn run(config: &ExperimentConfig) -> Result<Outcome> {
    let start = Instant::now();
    let report = match config.command {
        Command::VerifyIdentities => run_verify_identities(config)?,
        Command::Table1 => run_table1(config)?,
        Command::Hjminus => run_hjminus(config)?,
        Command::Sweep => run_sweep(config)?,
    };
    let mut flags = Vec::new();
    let mut status = ExitStatus::Success;
    for f in &report.failures {
        flags.push(format!("failed: {f}"));
        status = status.worst(ExitStatus::Failure);
    }
    for f in &report.ambiguous {
        flags.push(format!("ambiguous: {f}"));
        status = status.worst(ExitStatus::Ambiguous);
    }
    if contains_null(&report.payload) {
        flags.push("failed: non_finite_value".into());
        status = status.worst(ExitStatus::Failure);
    }
    let document = ResultDocument {
        config: config.clone(),
        version: VERSION.to_string(),
        wall_clock_seconds: start.elapsed().as_secs_f64(),
        payload: report.payload,
        flags,
    };
    Ok(Outcome { document, status, csv: report.csv })
}

pub(crate) fn structure_at(spec: &StructureSpec, grid: GridSpec) -> Result<AcsField> {
    build_named_family(grid, spec)
}

/// Random form whose components are trigonometric polynomials with
/// wavenumbers `|mₐ| ≤ max_mode` (and below Nyquist), coefficients in `[-1, 1]`.
pub fn random_band_limited_form(grid: GridSpec, degree: usize, max_mode: i64, terms: usize, rng: &mut ChaCha8Rng) -> KForm {
    let limit = max_mode.min(grid.n() as i64 / 2 - 1);
    let comps = (0..binomial4(degree))
        .map(|_| {
            let modes: Vec<([i64; 4], f64, f64)> = (0..terms)
                .map(|_| {
                    let m = [0; 4].map(|_: i64| rng.gen_range(-limit..=limit));
                    (m, rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
                })
                .collect();
            ScalarField::sample(grid, |x| {
                modes
                    .iter()
                    .map(|(m, a, b)| {
                        let phase = std::f64::consts::TAU * (0..4).map(|i| m[i] as f64 * x[i]).sum::<f64>();
                        a * phase.cos() + b * phase.sin()
                    })
                    .sum()
            })
            .expect("finite samples")
        })
        .collect();
    KForm::new(degree, comps).expect("component count matches degree")
}

/// Named residual with its bound.
#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub tolerance: f64,
    pub pass: bool,
}

impl Check {
    /// Passes when `value < tolerance`.
    pub fn below(name: impl Into<String>, value: f64, tolerance: f64) -> Self {
        Self { name: name.into(), value, tolerance, pass: value < tolerance }
    }

    /// Passes when `value > bound`.
    pub fn above(name: impl Into<String>, value: f64, bound: f64) -> Self {
        Self { name: name.into(), value, tolerance: bound, pass: value > bound }
    }
}
