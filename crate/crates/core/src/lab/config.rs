//! Experiment configuration: defaults, then a `key = value` file with
//! `[section]` headers, then command-line overrides.

use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::grid::MAX_N;
use crate::hermitian::StructureSpec;
use crate::spectral::{SpectralParams, DEFAULT_SEED};

pub const DEFAULT_N: usize = 12;
pub const DEFAULT_EIGS: usize = 8;
pub const DEFAULT_R_INNER: f64 = 0.125;
pub const DEFAULT_R_OUTER: f64 = 0.25;
pub const DEFAULT_CENTER: [f64; 4] = [0.5; 4];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    VerifyIdentities,
    Table1,
    Hjminus,
    Sweep,
}

impl FromStr for Command {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "verify-identities" => Ok(Command::VerifyIdentities),
            "table1" => Ok(Command::Table1),
            "hjminus" => Ok(Command::Hjminus),
            "sweep" => Ok(Command::Sweep),
            other => Err(Error::Config(format!("unknown command '{other}'"))),
        }
    }
}

impl fmt::Display for Command {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Command::VerifyIdentities => "verify-identities",
            Command::Table1 => "table1",
            Command::Hjminus => "hjminus",
            Command::Sweep => "sweep",
        })
    }
}

/// Unresolved settings; `None` means "not given at this layer".
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub command: Option<Command>,
    pub structure: Option<String>,
    pub n: Option<Vec<usize>>,
    pub k: Option<Vec<f64>>,
    pub eigs: Option<usize>,
    pub seed: Option<u64>,
    pub r_inner: Option<f64>,
    pub r_outer: Option<f64>,
    pub center: Option<[f64; 4]>,
    pub solver_tol: Option<f64>,
    pub identity_tol: Option<f64>,
    pub table_tol: Option<f64>,
    pub out: Option<String>,
    pub csv: Option<String>,
    pub fault: Option<String>,
}

impl Overrides {
    /// `self` with every field of `top` that is set taking precedence.
    pub fn layered(self, top: Overrides) -> Overrides {
        Overrides {
            command: top.command.or(self.command),
            structure: top.structure.or(self.structure),
            n: top.n.or(self.n),
            k: top.k.or(self.k),
            eigs: top.eigs.or(self.eigs),
            seed: top.seed.or(self.seed),
            r_inner: top.r_inner.or(self.r_inner),
            r_outer: top.r_outer.or(self.r_outer),
            center: top.center.or(self.center),
            solver_tol: top.solver_tol.or(self.solver_tol),
            identity_tol: top.identity_tol.or(self.identity_tol),
            table_tol: top.table_tol.or(self.table_tol),
            out: top.out.or(self.out),
            csv: top.csv.or(self.csv),
            fault: top.fault.or(self.fault),
        }
    }
}

fn parse_num<T: FromStr>(key: &str, v: &str) -> Result<T> {
    v.trim().parse().map_err(|_| Error::Config(format!("{key}: cannot parse '{}'", v.trim())))
}

pub fn parse_list<T: FromStr>(key: &str, v: &str) -> Result<Vec<T>> {
    let items: Vec<T> = v
        .split(',')
        .filter(|s| !s.trim().is_empty())
        .map(|s| parse_num(key, s))
        .collect::<Result<_>>()?;
    if items.is_empty() {
        return Err(Error::Config(format!("{key}: empty list")));
    }
    Ok(items)
}

pub fn parse_center(v: &str) -> Result<[f64; 4]> {
    let c: Vec<f64> = parse_list("center", v)?;
    c.try_into().map_err(|_| Error::Config("center needs four coordinates".into()))
}

/// Parse config file text. Blank lines and lines starting with `#` or `;`
/// are ignored.
pub fn parse_config_text(text: &str) -> Result<Overrides> {
    let mut o = Overrides::default();
    let mut section = String::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') || line.starts_with(';') {
            continue;
        }
        if let Some(rest) = line.strip_prefix('[') {
            let name = rest
                .strip_suffix(']')
                .ok_or_else(|| Error::Config(format!("line {}: unterminated section header", lineno + 1)))?;
            section = name.trim().to_ascii_lowercase();
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("line {}: expected key = value", lineno + 1)))?;
        let key = key.trim().to_ascii_lowercase();
        let value = value.trim().trim_matches('"');
        let full = if section.is_empty() { key.clone() } else { format!("{section}.{key}") };
        match full.as_str() {
            "command" | "experiment.command" => o.command = Some(value.parse()?),
            "structure" | "structure.name" | "experiment.structure" => o.structure = Some(value.to_string()),
            "n" | "experiment.n" | "grid.n" => o.n = Some(parse_list(&full, value)?),
            "k" | "experiment.k" | "structure.k" | "sweep.k" => o.k = Some(parse_list(&full, value)?),
            "eigs" | "experiment.eigs" | "solver.eigs" => o.eigs = Some(parse_num(&full, value)?),
            "seed" | "experiment.seed" | "solver.seed" => o.seed = Some(parse_num(&full, value)?),
            "structure.r_inner" => o.r_inner = Some(parse_num(&full, value)?),
            "structure.r_outer" => o.r_outer = Some(parse_num(&full, value)?),
            "structure.center" => o.center = Some(parse_center(value)?),
            "solver.tol" | "tolerances.solver" => o.solver_tol = Some(parse_num(&full, value)?),
            "tolerances.identity" => o.identity_tol = Some(parse_num(&full, value)?),
            "tolerances.table" => o.table_tol = Some(parse_num(&full, value)?),
            "out" | "output.json" | "output.out" => o.out = Some(value.to_string()),
            "csv" | "output.csv" => o.csv = Some(value.to_string()),
            _ => return Err(Error::Config(format!("line {}: unknown key '{full}'", lineno + 1))),
        }
    }
    Ok(o)
}

/// Fully resolved configuration, echoed in every result document.
#[derive(Debug, Clone, Serialize)]
pub struct ExperimentConfig {
    pub command: Command,
    pub structure: StructureSpec,
    pub n: Vec<usize>,
    pub k: Vec<f64>,
    pub eigs: usize,
    pub seed: u64,
    pub solver_tol: f64,
    pub identity_tol: f64,
    pub table_tol: f64,
    pub out: Option<String>,
    pub csv: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fault: Option<String>,
}

pub const FAULTS: &[&str] = &["star_involution"];

impl ExperimentConfig {
    pub fn resolve(o: Overrides) -> Result<Self> {
        let command = o.command.ok_or_else(|| Error::Config("no command given".into()))?;
        let n = o.n.unwrap_or_else(|| vec![DEFAULT_N]);
        for &v in &n {
            if v % 2 != 0 || !(4..=MAX_N).contains(&v) {
                return Err(Error::Config(format!("n = {v} must be even and within 4..={MAX_N}")));
            }
        }
        let k = o.k.unwrap_or_else(|| vec![1.0, 2.0, 4.0, 8.0]);
        let name = o.structure.unwrap_or_else(|| "example".into());
        let structure = match name.as_str() {
            "standard" => StructureSpec::Standard,
            "example" => StructureSpec::Example,
            "limit" => StructureSpec::Limit,
            "tk" => {
                if command != Command::Sweep && k.len() != 1 {
                    return Err(Error::Config("structure tk needs exactly one k".into()));
                }
                StructureSpec::Tk { k: k[0] }
            }
            "localized" => StructureSpec::Localized {
                r_inner: o.r_inner.unwrap_or(DEFAULT_R_INNER),
                r_outer: o.r_outer.unwrap_or(DEFAULT_R_OUTER),
                center: o.center.unwrap_or(DEFAULT_CENTER),
            },
            other => return Err(Error::Config(format!("unknown structure '{other}'"))),
        };
        structure.validate().map_err(|e| Error::Config(e.to_string()))?;
        if command == Command::Sweep {
            for &kv in &k {
                StructureSpec::Tk { k: kv }.validate().map_err(|e| Error::Config(e.to_string()))?;
            }
        }
        let eigs = o.eigs.unwrap_or(DEFAULT_EIGS);
        if !(3..=crate::spectral::MAX_COUNT).contains(&eigs) {
            return Err(Error::Config(format!("eigs = {eigs} outside 3..={}", crate::spectral::MAX_COUNT)));
        }
        let positive = |name: &str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(v)
            } else {
                Err(Error::Config(format!("{name} must be positive, got {v}")))
            }
        };
        let solver_tol = positive("solver tolerance", o.solver_tol.unwrap_or(1e-8))?;
        let identity_tol = positive("identity tolerance", o.identity_tol.unwrap_or(1e-10))?;
        let table_tol = positive("table tolerance", o.table_tol.unwrap_or(1e-8))?;
        if let Some(f) = &o.fault {
            if !FAULTS.contains(&f.as_str()) {
                return Err(Error::Config(format!("unknown fault '{f}'")));
            }
        }
        Ok(Self {
            command,
            structure,
            n,
            k,
            eigs,
            seed: o.seed.unwrap_or(DEFAULT_SEED),
            solver_tol,
            identity_tol,
            table_tol,
            out: o.out,
            csv: o.csv,
            fault: o.fault,
        })
    }

    pub fn spectral_params(&self) -> SpectralParams {
        SpectralParams { count: self.eigs, tol: self.solver_tol, seed: self.seed, ..SpectralParams::default() }
    }
}
