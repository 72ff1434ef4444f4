//! Named test functions on `[-1, 1]` and user data ingestion.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use gentrans_core::function::{FunctionHandle, SampledFunction};
use gentrans_core::jacobi::{JacobiBasis, PolynomialCoeffs};
use gentrans_core::quadrature::{gauss_jacobi, project};
use gentrans_core::translation::TranslationConfig;

use crate::error::{io_err, CliError, Result};

/// Names accepted by [`corpus`], with their parameters and a short description.
pub const ENTRIES: &[(&str, &str, &str)] = &[
    ("abs_power", "gamma (1)", "|x|^gamma, kink at 0"),
    (
        "jacobi_series",
        "s (1.5), K (64)",
        "sum_{k=1..K} k^-s R_k in the (mu, mu) basis",
    ),
    ("bump", "s (1)", "(1 - x^2)^s"),
    ("runge", "", "1 / (1 + 25 x^2)"),
    ("poly", "coeffs (1)", "monomial coefficients c0;c1;..."),
    ("user_csv", "path", "monotone cubic through (x, value) rows"),
];

/// A function name with `key=value` parameters, written `name:k=v,k=v`.
#[derive(Debug, Clone, PartialEq)]
pub struct FunctionSpec {
    pub name: String,
    pub params: BTreeMap<String, String>,
}

impl FromStr for FunctionSpec {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self> {
        let (name, rest) = match s.split_once(':') {
            Some((n, r)) => (n.trim(), r.trim()),
            None => (s.trim(), ""),
        };
        if name.is_empty() {
            return Err(CliError::Usage(format!("empty function name in {s:?}")));
        }
        let mut params = BTreeMap::new();
        for item in rest.split(',').map(str::trim).filter(|i| !i.is_empty()) {
            let (k, v) = item
                .split_once('=')
                .ok_or_else(|| CliError::Usage(format!("parameter {item:?} is not key=value")))?;
            params.insert(k.trim().to_string(), v.trim().to_string());
        }
        Ok(Self {
            name: name.to_string(),
            params,
        })
    }
}

impl fmt::Display for FunctionSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name)?;
        for (i, (k, v)) in self.params.iter().enumerate() {
            write!(f, "{}{k}={v}", if i == 0 { ':' } else { ',' })?;
        }
        Ok(())
    }
}

impl FunctionSpec {
    fn number(&self, key: &str, default: f64) -> Result<f64> {
        match self.params.get(key) {
            None => Ok(default),
            Some(v) => v.parse().map_err(|_| {
                CliError::Usage(format!("{}: {key}={v:?} is not a number", self.name))
            }),
        }
    }

    fn check_keys(&self, allowed: &[&str]) -> Result<()> {
        match self.params.keys().find(|k| !allowed.contains(&k.as_str())) {
            Some(k) => Err(CliError::Usage(format!(
                "{}: unknown parameter {k:?} (expected one of {allowed:?})",
                self.name
            ))),
            None => Ok(()),
        }
    }
}

#[derive(Debug, Clone)]
pub struct CorpusFunction {
    /// Descriptor this function was built from; used in check and table names.
    pub name: String,
    pub handle: FunctionHandle,
    /// Whether `D f` is bounded on `[-1, 1]`.
    pub smooth: bool,
    /// Built from user samples.
    pub sampled: bool,
}

/// Translation tolerance for sampled members. The interpolant has a kink at
/// every knot, so panel refinement converges only at second order.
pub const SAMPLED_TOLERANCE: f64 = 1e-7;

impl CorpusFunction {
    /// `base` with the tolerance loosened for sampled data.
    pub fn translation(&self, base: TranslationConfig) -> TranslationConfig {
        let mut cfg = base;
        if self.sampled {
            cfg.tolerance = cfg.tolerance.max(SAMPLED_TOLERANCE);
        }
        cfg
    }
}

/// Builds a corpus member; `mu` fixes the basis of the Jacobi-series member
/// and of polynomial members.
pub fn corpus(spec: &FunctionSpec, mu: f64) -> Result<CorpusFunction> {
    let basis = JacobiBasis::symmetric(mu)?;
    let name = spec.to_string();
    let (handle, smooth) = match spec.name.as_str() {
        "abs_power" => {
            spec.check_keys(&["gamma"])?;
            let g = spec.number("gamma", 1.0)?;
            if !(g > 0.0 && g.is_finite()) {
                return Err(CliError::Usage(format!(
                    "abs_power: gamma = {g} must be positive"
                )));
            }
            let h = FunctionHandle::from_fn(name.clone(), move |x: f64| x.abs().powf(g))
                .with_derivatives(
                    move |x: f64| g * x.abs().powf(g - 1.0) * x.signum(),
                    move |x: f64| g * (g - 1.0) * x.abs().powf(g - 2.0),
                )
                .with_breakpoints(vec![0.0]);
            (h, g >= 2.0)
        }
        "jacobi_series" => {
            spec.check_keys(&["s", "K"])?;
            let s = spec.number("s", 1.5)?;
            let k = spec.number("K", 64.0)?;
            if !(k >= 1.0 && k.fract() == 0.0 && k <= 4096.0) {
                return Err(CliError::Usage(format!(
                    "jacobi_series: K = {k} must be an integer in 1..=4096"
                )));
            }
            let mut c = vec![0.0];
            c.extend((1..=k as usize).map(|j| (j as f64).powf(-s)));
            let h =
                FunctionHandle::polynomial(PolynomialCoeffs::new(basis, c)).relabel(name.clone());
            (h, s > 3.0)
        }
        "bump" => {
            spec.check_keys(&["s"])?;
            let s = spec.number("s", 1.0)?;
            if !(s >= 0.0 && s.is_finite()) {
                return Err(CliError::Usage(format!("bump: s = {s} must be >= 0")));
            }
            let f = move |x: f64| (1.0 - x * x).max(0.0).powf(s);
            let h = if s.fract() == 0.0 && s <= 64.0 {
                let degree = 2 * s as usize;
                let rule = gauss_jacobi(degree + 2, basis)?;
                FunctionHandle::polynomial(project(f, degree, &rule))
            } else {
                FunctionHandle::from_fn(name.clone(), f).with_derivatives(
                    move |x: f64| -2.0 * s * x * (1.0 - x * x).max(0.0).powf(s - 1.0),
                    move |x: f64| {
                        let w = (1.0 - x * x).max(0.0);
                        -2.0 * s * w.powf(s - 1.0) + 4.0 * s * (s - 1.0) * x * x * w.powf(s - 2.0)
                    },
                )
            };
            (h.relabel(name.clone()), s >= 1.0)
        }
        "runge" => {
            spec.check_keys(&[])?;
            let h = FunctionHandle::from_fn(name.clone(), |x: f64| 1.0 / (1.0 + 25.0 * x * x))
                .with_derivatives(
                    |x: f64| -50.0 * x / (1.0 + 25.0 * x * x).powi(2),
                    |x: f64| (3750.0 * x * x - 50.0) / (1.0 + 25.0 * x * x).powi(3),
                );
            (h, true)
        }
        "poly" => {
            spec.check_keys(&["coeffs"])?;
            let raw = spec.params.get("coeffs").map(String::as_str).unwrap_or("1");
            let c: Vec<f64> = raw
                .split(';')
                .map(|v| {
                    v.trim().parse().map_err(|_| {
                        CliError::Usage(format!("poly: coefficient {v:?} is not a number"))
                    })
                })
                .collect::<Result<_>>()?;
            let degree = c.len() - 1;
            let rule = gauss_jacobi(degree + 2, basis)?;
            let horner = move |x: f64| c.iter().rev().fold(0.0, |acc, ck| acc * x + ck);
            let h =
                FunctionHandle::polynomial(project(horner, degree, &rule)).relabel(name.clone());
            (h, true)
        }
        "user_csv" => {
            spec.check_keys(&["path"])?;
            let path = spec
                .params
                .get("path")
                .ok_or_else(|| CliError::Usage("user_csv: missing path=<file>".into()))?;
            let data = read_samples(Path::new(path))?;
            (FunctionHandle::sampled(data).relabel(name.clone()), false)
        }
        other => {
            let names: Vec<&str> = ENTRIES.iter().map(|e| e.0).collect();
            return Err(CliError::Usage(format!(
                "unknown function {other:?}; known: {names:?}"
            )));
        }
    };
    let sampled = spec.name == "user_csv";
    Ok(CorpusFunction {
        name,
        handle,
        smooth,
        sampled,
    })
}

/// Reads two-column `x,value` rows; a non-numeric first row is taken as a header.
pub fn read_samples(path: &Path) -> Result<SampledFunction> {
    let data = |reason: String| CliError::Data {
        path: PathBuf::from(path),
        reason,
    };
    let file = std::fs::File::open(path).map_err(io_err(path))?;
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(file);
    let (mut xs, mut ys) = (Vec::new(), Vec::new());
    for (i, record) in reader.records().enumerate() {
        let record = record.map_err(|e| data(e.to_string()))?;
        if record.iter().all(|f| f.is_empty()) {
            continue;
        }
        if record.len() != 2 {
            return Err(data(format!(
                "row {}: expected 2 columns, found {}",
                i + 1,
                record.len()
            )));
        }
        match (record[0].parse::<f64>(), record[1].parse::<f64>()) {
            (Ok(x), Ok(y)) => {
                xs.push(x);
                ys.push(y);
            }
            _ if i == 0 => continue,
            _ => return Err(data(format!("row {}: non-numeric entry", i + 1))),
        }
    }
    SampledFunction::new(xs, ys).map_err(|e| data(e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use gentrans_core::quadrature::fourier_jacobi_coeff;
    use std::io::Write;

    fn build(s: &str, mu: f64) -> CorpusFunction {
        corpus(&s.parse().unwrap(), mu).unwrap()
    }

    #[test]
    fn spec_round_trip() {
        let s: FunctionSpec = "jacobi_series:s=2,K=16".parse().unwrap();
        assert_eq!(s.name, "jacobi_series");
        assert_eq!(s.params["K"], "16");
        assert_eq!(s.to_string(), "jacobi_series:K=16,s=2");
        assert!("bump:s".parse::<FunctionSpec>().is_err());
    }

    #[test]
    fn simple_values() {
        assert_eq!(build("abs_power:gamma=1", 1.0).handle.eval(-0.5), 0.5);
        assert!((build("bump:s=1", 1.0).handle.eval(0.0) - 1.0).abs() < 1e-14);
        assert!((build("bump:s=2.5", 1.0).handle.eval(0.5) - 0.75f64.powf(2.5)).abs() < 1e-14);
        assert!((build("runge", 1.0).handle.eval(0.2) - 0.5).abs() < 1e-15);
        assert!((build("poly:coeffs=1;0;-2", 2.0).handle.eval(0.5) - 0.5).abs() < 1e-14);
    }

    #[test]
    fn series_coefficients_recovered_by_projection() {
        let f = build("jacobi_series:s=2,K=16", 1.0);
        let basis = JacobiBasis::symmetric(1.0).unwrap();
        let rule = gauss_jacobi(40, basis).unwrap();
        for k in 1..=16 {
            let a = fourier_jacobi_coeff(|x| f.handle.eval(x), k, &rule);
            let expected = (k as f64).powi(-2) * basis.norm_sq(k);
            assert!((a - expected).abs() < 1e-13, "k = {k}");
        }
    }

    #[test]
    fn rejects_bad_input() {
        for s in [
            "abs_power:gamma=0",
            "abs_power:gamma=-1",
            "nope",
            "bump:t=1",
            "jacobi_series:K=1.5",
        ] {
            assert!(corpus(&s.parse().unwrap(), 1.0).is_err(), "{s}");
        }
    }

    #[test]
    fn reads_user_csv_with_header() {
        let mut file = tempfile::NamedTempFile::new().unwrap();
        writeln!(file, "x,value\n-1,1\n0,0\n1,1").unwrap();
        let spec = format!("user_csv:path={}", file.path().display());
        let f = build(&spec, 1.0);
        assert_eq!(f.handle.eval(0.0), 0.0);
        assert_eq!(f.handle.eval(1.0), 1.0);

        let mut bad = tempfile::NamedTempFile::new().unwrap();
        writeln!(bad, "0,1\n-0.5,2").unwrap();
        let spec = format!("user_csv:path={}", bad.path().display());
        assert!(matches!(
            corpus(&spec.parse().unwrap(), 1.0),
            Err(CliError::Data { .. })
        ));

        let mut ragged = tempfile::NamedTempFile::new().unwrap();
        writeln!(ragged, "0,1\n0.5,2,3").unwrap();
        let spec = format!("user_csv:path={}", ragged.path().display());
        assert!(corpus(&spec.parse().unwrap(), 1.0).is_err());
    }
}
