//! TOML run configuration merged with command-line flags; flags win.

use std::path::{Path, PathBuf};

use gentrans_core::weighted::Exponent;
use serde::Deserialize;
use serde_json::{json, Value};

use crate::corpus::FunctionSpec;
use crate::error::{io_err, CliError, Result};
use crate::experiment::dyadic;
use crate::report::Format;

/// A number or a string in the TOML file (`p = 2` and `p = "inf"` both work).
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(untagged)]
pub enum Scalar {
    Number(f64),
    Text(String),
}

impl Scalar {
    fn text(&self) -> String {
        match self {
            Scalar::Number(v) => v.to_string(),
            Scalar::Text(s) => s.clone(),
        }
    }
}

/// One value or a list.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(untagged)]
pub enum OneOrMany<T> {
    One(T),
    Many(Vec<T>),
}

impl<T: Clone> OneOrMany<T> {
    fn to_vec(&self) -> Vec<T> {
        match self {
            OneOrMany::One(v) => vec![v.clone()],
            OneOrMany::Many(v) => v.clone(),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub mu: Option<OneOrMany<f64>>,
    pub p: Option<OneOrMany<Scalar>>,
    pub alpha: Option<f64>,
    pub n_max: Option<usize>,
    /// A list of values or `"dyadic:K"`.
    pub delta_grid: Option<OneOrMany<Scalar>>,
    pub tol: Option<f64>,
    pub out: Option<PathBuf>,
    pub format: Option<String>,
    pub seed: Option<u64>,
    pub functions: Option<Vec<String>>,
    pub input: Option<PathBuf>,
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(io_err(path))?;
        toml::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
    }
}

/// Flag values as given on the command line, still unparsed where the
/// syntax is shared with the file.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Flags {
    pub mu: Option<Vec<f64>>,
    pub p: Option<String>,
    pub alpha: Option<f64>,
    pub n_max: Option<usize>,
    pub delta_grid: Option<String>,
    pub tol: Option<f64>,
    pub out: Option<PathBuf>,
    pub format: Option<Format>,
    pub seed: Option<u64>,
    pub functions: Vec<String>,
    pub input: Option<PathBuf>,
}

/// Resolved settings; `None` leaves the choice to the subcommand.
#[derive(Debug, Clone, PartialEq)]
pub struct Settings {
    pub mus: Option<Vec<f64>>,
    pub exponents: Option<Vec<Exponent>>,
    pub alpha: Option<f64>,
    pub n_max: Option<usize>,
    pub deltas: Option<Vec<f64>>,
    pub tol: Option<f64>,
    pub out: PathBuf,
    pub format: Format,
    pub seed: u64,
    pub functions: Option<Vec<FunctionSpec>>,
}

pub const DEFAULT_OUT: &str = "gentrans-out";

/// `"inf"`, a number, or a comma-separated list of either.
pub fn parse_exponents(s: &str) -> Result<Vec<Exponent>> {
    s.split(',')
        .map(|v| {
            v.trim()
                .parse::<Exponent>()
                .map_err(|e| CliError::Usage(format!("--p {v:?}: {e}")))
        })
        .collect()
}

/// Comma-separated positive values, or `dyadic:K` for `pi / 2^k`, `k = 1..=K`.
pub fn parse_delta_grid(s: &str) -> Result<Vec<f64>> {
    let bad = |why: &str| CliError::Usage(format!("--delta-grid {s:?}: {why}"));
    let deltas = if let Some(k) = s.trim().strip_prefix("dyadic:") {
        let k: u32 = k
            .trim()
            .parse()
            .map_err(|_| bad("dyadic level must be a positive integer"))?;
        if k == 0 || k > 40 {
            return Err(bad("dyadic level must lie in 1..=40"));
        }
        dyadic(k)
    } else {
        s.split(',')
            .map(|v| {
                v.trim()
                    .parse::<f64>()
                    .map_err(|_| bad("expected numbers or dyadic:K"))
            })
            .collect::<Result<Vec<_>>>()?
    };
    if deltas.is_empty()
        || deltas
            .iter()
            .any(|d| !(*d > 0.0 && *d < std::f64::consts::PI))
    {
        return Err(bad("every delta must lie in (0, pi)"));
    }
    Ok(deltas)
}

fn check_mus(mus: &[f64]) -> Result<()> {
    if mus.is_empty() || mus.iter().any(|m| !(*m >= 0.0 && m.is_finite())) {
        return Err(CliError::Usage(format!(
            "--mu {mus:?}: values must be finite and >= 0"
        )));
    }
    Ok(())
}

impl Settings {
    /// Merges `file` under `flags`.
    pub fn resolve(flags: Flags, file: FileConfig) -> Result<Self> {
        let mus = flags.mu.or(file.mu.map(|m| m.to_vec()));
        if let Some(m) = &mus {
            check_mus(m)?;
        }
        let p = flags.p.or(file.p.map(|p| {
            p.to_vec()
                .iter()
                .map(Scalar::text)
                .collect::<Vec<_>>()
                .join(",")
        }));
        let exponents = p.as_deref().map(parse_exponents).transpose()?;
        let grid = flags.delta_grid.or(file.delta_grid.map(|d| match d {
            OneOrMany::One(s) => s.text(),
            OneOrMany::Many(v) => v.iter().map(Scalar::text).collect::<Vec<_>>().join(","),
        }));
        let deltas = grid.as_deref().map(parse_delta_grid).transpose()?;
        let format = match (flags.format, file.format) {
            (Some(f), _) => f,
            (None, Some(s)) => s.parse()?,
            (None, None) => Format::Csv,
        };
        let mut names = if flags.functions.is_empty() {
            file.functions.unwrap_or_default()
        } else {
            flags.functions
        };
        if let Some(path) = flags.input.or(file.input) {
            names.push(format!("user_csv:path={}", path.display()));
        }
        let functions = if names.is_empty() {
            None
        } else {
            Some(
                names
                    .iter()
                    .map(|s| s.parse())
                    .collect::<Result<Vec<FunctionSpec>>>()?,
            )
        };
        let n_max = flags.n_max.or(file.n_max);
        if n_max == Some(0) {
            return Err(CliError::Usage("--n-max must be positive".into()));
        }
        let tol = flags.tol.or(file.tol);
        if let Some(t) = tol {
            if !(t >= 0.0) {
                return Err(CliError::Usage(format!("--tol {t} must be >= 0")));
            }
        }
        Ok(Self {
            mus,
            exponents,
            alpha: flags.alpha.or(file.alpha),
            n_max,
            deltas,
            tol,
            out: flags
                .out
                .or(file.out)
                .unwrap_or_else(|| PathBuf::from(DEFAULT_OUT)),
            format,
            seed: flags.seed.or(file.seed).unwrap_or(0),
            functions,
        })
    }

    /// Echo written into the summary.
    pub fn to_json(&self) -> Value {
        json!({
            "mu": self.mus,
            "p": self.exponents.as_ref().map(|v| v.iter().map(|p| p.to_string()).collect::<Vec<_>>()),
            "alpha": self.alpha,
            "n_max": self.n_max,
            "delta_grid": self.deltas,
            "tol": self.tol,
            "out": self.out.display().to_string(),
            "format": self.format.to_string(),
            "seed": self.seed,
            "functions": self.functions.as_ref().map(|v| v.iter().map(|f| f.to_string()).collect::<Vec<_>>()),
        })
    }
}
