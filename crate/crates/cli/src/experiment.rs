//! Jackson-type and modulus/K-functional experiments over the corpus.

use std::time::Instant;

use gentrans_core::approx::{
    best_approx_sequence, jackson_operator, ApproxConfig, JacksonConfig, JacksonSpec,
};
use gentrans_core::function::FunctionHandle;
use gentrans_core::smoothness::{
    equivalence_ratio, modulus_sweep, KConfig, ModulusConfig, RatioStatus, ZERO_LEVEL,
};
use gentrans_core::weighted::{weighted_norm, Exponent, SpaceParams};

use crate::corpus::{corpus, FunctionSpec};
use crate::error::Result;
use crate::report::{Cell, Table, VerificationReport};
use crate::verify::SuiteOutput;

/// Functions, `mu` values and spaces shared by both experiments.
#[derive(Debug, Clone, PartialEq)]
pub struct Study {
    pub mus: Vec<f64>,
    pub exponents: Vec<Exponent>,
    /// Fixed `alpha`; `None` uses `mu / 2`.
    pub alpha: Option<f64>,
    pub functions: Vec<FunctionSpec>,
}

impl Default for Study {
    fn default() -> Self {
        Self {
            mus: vec![1.0, 2.0],
            exponents: vec![Exponent::Infinity, Exponent::Finite(1.0)],
            alpha: None,
            functions: ["abs_power:gamma=1", "bump:s=1", "jacobi_series:s=1.5"]
                .iter()
                .map(|s| s.parse().expect("built-in spec"))
                .collect(),
        }
    }
}

impl Study {
    fn spaces(&self, mu: f64) -> Result<Vec<SpaceParams>> {
        let alpha = self.alpha.unwrap_or(0.5 * mu);
        Ok(self
            .exponents
            .iter()
            .map(|&p| SpaceParams::new(p, alpha, mu))
            .collect::<Result<_, _>>()?)
    }
}

fn label(name: &str, space: &SpaceParams) -> String {
    format!("{name}/mu={}/p={}/alpha={}", space.mu, space.p, space.alpha)
}

/// Passing report used when every ratio of a check was excluded.
fn vacuous(check: String, grid: String, tolerance: f64, why: &str) -> VerificationReport {
    VerificationReport::deviation(check, grid, 0.0, tolerance).with_note(why)
}

#[derive(Debug, Clone, PartialEq)]
pub struct JacksonExperiment {
    pub study: Study,
    pub n_max: usize,
    /// Degrees at which the averaging operator is evaluated for smooth members.
    pub operator_degrees: Vec<usize>,
    /// Allowed spread of `omega(f, 1/n) n^2` and of `||f - Q_n|| n^2`.
    pub rate_spread: f64,
    pub approx: ApproxConfig,
    pub modulus: ModulusConfig,
    pub operator: JacksonConfig,
}

impl Default for JacksonExperiment {
    fn default() -> Self {
        Self {
            study: Study::default(),
            n_max: 64,
            operator_degrees: vec![8, 16, 32, 64],
            rate_spread: 4.0,
            approx: ApproxConfig::default(),
            modulus: ModulusConfig::default(),
            operator: JacksonConfig::default(),
        }
    }
}

/// Errors of the averaging operator `Q_n` in each space.
#[derive(Debug, Clone, PartialEq)]
pub struct OperatorRow {
    pub n: usize,
    pub error: f64,
    pub above_degree_mass: f64,
    pub degree: usize,
}

/// `||f - Q_n f||` for each requested degree, in one space.
pub fn operator_errors(
    f: &FunctionHandle,
    degrees: &[usize],
    space: &SpaceParams,
    cfg: &JacksonConfig,
    norm: &gentrans_core::weighted::NormConfig,
) -> Result<Vec<OperatorRow>> {
    let mut rows = Vec::with_capacity(degrees.len());
    for &n in degrees {
        let spec = JacksonSpec::new(n, space.mu)?;
        let q = jackson_operator(f, &spec, cfg)?;
        let diff = f.minus(&FunctionHandle::polynomial(q.coeffs.clone()));
        let error = weighted_norm(&diff, space.p, space.alpha, norm)?;
        rows.push(OperatorRow {
            n,
            error,
            above_degree_mass: q.above_degree_mass,
            degree: q.coeffs.degree(),
        });
    }
    Ok(rows)
}

/// Checks on the operator rows: degree and mass, the `n^-2` rate, and no
/// error below the best approximation of the same degree.
pub fn operator_checks(
    name: &str,
    rows: &[OperatorRow],
    best: &[f64],
    rate_spread: f64,
    mass_tolerance: f64,
) -> Vec<VerificationReport> {
    let ns: Vec<String> = rows.iter().map(|r| r.n.to_string()).collect();
    let grid = format!("n in {{{}}}", ns.join(", "));
    let mass = rows.iter().map(|r| r.above_degree_mass).fold(0.0, f64::max);
    let over = rows.iter().filter(|r| r.degree + 1 > r.n).count();
    let mut degree = VerificationReport::deviation(
        format!("jackson_operator/degree_and_mass/{name}"),
        grid.clone(),
        mass,
        mass_tolerance,
    );
    if over > 0 {
        degree.passed = false;
        degree = degree.with_note(format!("{over} outputs exceed degree n - 1"));
    }
    let scaled: Vec<f64> = rows.iter().map(|r| r.error * (r.n * r.n) as f64).collect();
    let rate = VerificationReport::ratio(
        format!("jackson_operator/rate/{name}"),
        grid.clone(),
        &scaled,
        rate_spread,
    );
    let gap = rows
        .iter()
        .filter_map(|r| best.get(r.n - 1).map(|e| e - r.error))
        .fold(0.0, f64::max);
    let floor = VerificationReport::deviation(
        format!("jackson_operator/not_below_best/{name}"),
        grid,
        gap,
        1e-8,
    );
    vec![degree, rate, floor]
}

/// `E_n`, `omega(f, 1/n)` and `S(n)` for `n = 2..=n_max`, plus the averaging
/// operator for smooth members.
pub fn jackson(cfg: &JacksonExperiment) -> Result<SuiteOutput> {
    let mut out = SuiteOutput::default();
    let ns: Vec<usize> = (2..=cfg.n_max).collect();
    let deltas: Vec<f64> = ns.iter().map(|&n| 1.0 / n as f64).collect();
    let grid = format!("n = 2..={}", cfg.n_max);
    for &mu in &cfg.study.mus {
        for spec in &cfg.study.functions {
            let member = corpus(spec, mu)?;
            let f = &member.handle;
            for space in cfg.study.spaces(mu)? {
                let started = Instant::now();
                let name = label(&member.name, &space);
                let mut mcfg = cfg.modulus;
                mcfg.translation = member.translation(mcfg.translation);
                let mut ocfg = cfg.operator;
                ocfg.translation = member.translation(ocfg.translation);
                let seq = best_approx_sequence(f, cfg.n_max, &space, &cfg.approx)?;
                let omegas = modulus_sweep(f, &deltas, &space, &mcfg)?;
                let zero =
                    ZERO_LEVEL * weighted_norm(f, space.p, space.alpha, &cfg.approx.norm)?.max(1.0);
                let mut table = Table::new(
                    format!("jackson_{name}"),
                    &["n", "E_n", "omega", "S", "omega_over_E", "omega_over_S"],
                );
                let (mut over_e, mut over_s, mut rate) = (Vec::new(), Vec::new(), Vec::new());
                for ((&n, om), delta) in ns.iter().zip(&omegas).zip(&deltas) {
                    let e = seq.values[n - 1];
                    let s = seq.weighted_sums[n - 1];
                    let ratio = |den: f64, acc: &mut Vec<f64>| {
                        if den <= zero {
                            Cell::ZeroDenominator
                        } else {
                            acc.push(om.value / den);
                            Cell::Num(om.value / den)
                        }
                    };
                    let re = ratio(e, &mut over_e);
                    let rs = ratio(s, &mut over_s);
                    rate.push(om.value / (delta * delta));
                    table.push(vec![n.into(), e.into(), om.value.into(), s.into(), re, rs]);
                }
                let elapsed = started.elapsed();
                for (kind, ratios) in [("omega_over_E", &over_e), ("omega_over_S", &over_s)] {
                    let check = format!("jackson/{kind}/{name}");
                    let r = if ratios.is_empty() {
                        vacuous(
                            check,
                            grid.clone(),
                            f64::INFINITY,
                            "all denominators vanish",
                        )
                    } else {
                        VerificationReport::ratio(check, grid.clone(), ratios, f64::INFINITY)
                    };
                    out.reports.push(r.with_runtime(elapsed));
                }
                if member.smooth {
                    out.reports.push(
                        VerificationReport::ratio(
                            format!("jackson/omega_rate/{name}"),
                            grid.clone(),
                            &rate,
                            cfg.rate_spread,
                        )
                        .with_runtime(elapsed),
                    );
                    let degrees: Vec<usize> = cfg
                        .operator_degrees
                        .iter()
                        .copied()
                        .filter(|&n| n <= cfg.n_max)
                        .collect();
                    if !degrees.is_empty() {
                        let rows = operator_errors(f, &degrees, &space, &ocfg, &cfg.approx.norm)?;
                        let mut t = Table::new(
                            format!("jackson_operator_{name}"),
                            &["n", "error", "n2_error", "E_n", "above_degree_mass"],
                        );
                        for r in &rows {
                            t.push(vec![
                                r.n.into(),
                                r.error.into(),
                                (r.error * (r.n * r.n) as f64).into(),
                                seq.values[r.n - 1].into(),
                                r.above_degree_mass.into(),
                            ]);
                        }
                        out.reports.extend(operator_checks(
                            &name,
                            &rows,
                            &seq.values,
                            cfg.rate_spread,
                            cfg.operator.mass_tolerance,
                        ));
                        out.tables.push(t);
                    }
                }
                out.tables.push(table);
            }
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq)]
pub struct EquivalenceExperiment {
    pub study: Study,
    pub deltas: Vec<f64>,
    /// Allowed max/min spread of both ratio columns.
    pub spread: f64,
    pub modulus: ModulusConfig,
    pub k: KConfig,
}

/// `pi / 2^k`, `k = 1..=levels`.
pub fn dyadic(levels: u32) -> Vec<f64> {
    (1..=levels)
        .map(|k| std::f64::consts::PI / 2f64.powi(k as i32))
        .collect()
}

impl Default for EquivalenceExperiment {
    fn default() -> Self {
        Self {
            study: Study::default(),
            deltas: dyadic(8),
            spread: 100.0,
            modulus: ModulusConfig::default(),
            k: KConfig::default(),
        }
    }
}

/// `rho = omega / K` on the shift grid; the weighted ratio must stay bounded
/// above and the plain one bounded below.
pub fn equivalence(cfg: &EquivalenceExperiment) -> Result<SuiteOutput> {
    let mut out = SuiteOutput::default();
    let grid = format!("{} values of delta", cfg.deltas.len());
    for &mu in &cfg.study.mus {
        for spec in &cfg.study.functions {
            let member = corpus(spec, mu)?;
            for space in cfg.study.spaces(mu)? {
                let started = Instant::now();
                let name = label(&member.name, &space);
                let mut mcfg = cfg.modulus;
                mcfg.translation = member.translation(mcfg.translation);
                let rows = equivalence_ratio(&member.handle, &cfg.deltas, &space, &mcfg, &cfg.k)?;
                let mut table = Table::new(
                    format!("equivalence_{name}"),
                    &["delta", "omega", "k_value", "rho", "rho_weighted", "status"],
                );
                let (mut rho, mut weighted, mut inconsistent) = (Vec::new(), Vec::new(), 0);
                for r in &rows {
                    let status = match r.status {
                        RatioStatus::Finite => {
                            rho.extend(r.rho);
                            weighted.extend(r.rho_weighted);
                            "finite"
                        }
                        RatioStatus::ZeroOverZero => "zero_over_zero",
                        RatioStatus::Inconsistent => {
                            inconsistent += 1;
                            "inconsistent"
                        }
                    };
                    let num = |v: Option<f64>| v.map_or(Cell::ZeroDenominator, Cell::Num);
                    table.push(vec![
                        r.delta.into(),
                        r.omega.into(),
                        r.k_value.into(),
                        num(r.rho),
                        num(r.rho_weighted),
                        status.into(),
                    ]);
                }
                for (kind, ratios) in [("rho_weighted_upper", &weighted), ("rho_lower", &rho)] {
                    let check = format!("equivalence/{kind}/{name}");
                    let mut r = if ratios.is_empty() {
                        vacuous(
                            check,
                            grid.clone(),
                            cfg.spread,
                            "every row is zero over zero",
                        )
                    } else {
                        VerificationReport::ratio(check, grid.clone(), ratios, cfg.spread)
                    };
                    if inconsistent > 0 {
                        r.passed = false;
                        r = r.with_note(format!("{inconsistent} rows with K = 0 < omega"));
                    }
                    out.reports.push(r.with_runtime(started.elapsed()));
                }
                out.tables.push(table);
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_study() -> Study {
        Study {
            mus: vec![1.0],
            exponents: vec![Exponent::Infinity],
            alpha: None,
            functions: vec!["bump:s=1".parse().unwrap()],
        }
    }

    #[test]
    fn dyadic_grid() {
        let d = dyadic(3);
        assert_eq!(d.len(), 3);
        assert!((d[0] - std::f64::consts::FRAC_PI_2).abs() < 1e-15);
        assert!((d[2] - std::f64::consts::PI / 8.0).abs() < 1e-15);
    }

    #[test]
    fn small_jackson_run() {
        let cfg = JacksonExperiment {
            study: small_study(),
            n_max: 8,
            operator_degrees: vec![4, 8],
            ..Default::default()
        };
        let out = jackson(&cfg).unwrap();
        assert!(out.reports.iter().all(|r| r.passed), "{:#?}", out.reports);
        assert_eq!(out.tables.len(), 2);
        assert_eq!(out.tables[1].rows.len(), 7);
    }

    #[test]
    fn small_equivalence_run() {
        let cfg = EquivalenceExperiment {
            study: small_study(),
            deltas: dyadic(3),
            ..Default::default()
        };
        let out = equivalence(&cfg).unwrap();
        assert_eq!(out.reports.len(), 2);
        assert!(out.reports.iter().all(|r| r.passed), "{:#?}", out.reports);
    }

    #[test]
    fn operator_checks_flag_excess_degree() {
        let rows = vec![
            OperatorRow {
                n: 4,
                error: 1.0 / 16.0,
                above_degree_mass: 0.0,
                degree: 3,
            },
            OperatorRow {
                n: 8,
                error: 1.0 / 64.0,
                above_degree_mass: 0.0,
                degree: 8,
            },
        ];
        let r = operator_checks("f", &rows, &[], 4.0, 1e-6);
        assert!(!r[0].passed);
        assert!(r[1].passed);
        assert!(r[2].passed);
    }
}
