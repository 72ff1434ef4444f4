//! Argument parsing and subcommand dispatch.
//!
//! Exit codes: 0 when every non-control check passes, 1 when a check fails,
//! 2 on usage, input or numerical errors.

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use gentrans_core::approx::{best_approx_sequence, ApproxConfig};
use gentrans_core::smoothness::{modulus_sweep, ModulusConfig};
use gentrans_core::translation::{self_test, AsymTranslator, TranslationConfig};
use gentrans_core::weighted::{Exponent, SpaceParams};
use serde_json::json;

use crate::config::{FileConfig, Flags, Settings};
use crate::corpus::{corpus, FunctionSpec, ENTRIES};
use crate::error::Result;
use crate::experiment::{self, EquivalenceExperiment, JacksonExperiment, Study};
use crate::report::{emit, exit_code, Format, Table, VerificationReport};
use crate::verify::{self, SuiteOutput};

#[derive(Debug, Parser)]
#[command(
    name = "gentrans",
    version,
    about = "Generalized translation operators, moduli of smoothness and best approximation in weighted spaces"
)]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct GlobalArgs {
    /// Comma-separated values of mu.
    #[arg(long, global = true, value_delimiter = ',')]
    pub mu: Option<Vec<f64>>,
    /// Exponent: a number >= 1 or `inf`; a comma list selects several spaces.
    #[arg(long, global = true)]
    pub p: Option<String>,
    /// Weight exponent alpha (default mu / 2 for experiments).
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub alpha: Option<f64>,
    #[arg(long, global = true)]
    pub n_max: Option<usize>,
    /// Comma-separated values in (0, pi), or `dyadic:K`.
    #[arg(long, global = true)]
    pub delta_grid: Option<String>,
    /// Overrides the deviation tolerance of identity checks.
    #[arg(long, global = true)]
    pub tol: Option<f64>,
    /// Output directory for tables and summary.json.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true)]
    pub format: Option<Format>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// TOML file with the same keys as the flags; flags take precedence.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Corpus function as `name:key=value,...`; repeatable.
    #[arg(long = "function", global = true)]
    pub functions: Vec<String>,
    /// Two-column CSV `x,value` with increasing x in [-1, 1].
    #[arg(long, global = true)]
    pub input: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run an identity suite.
    Verify { suite: Suite },
    /// Run an approximation experiment.
    Experiment { kind: ExperimentKind },
    /// Tabulate the asymmetric translation of a function.
    Translate {
        /// Shifts t; default 0.25,0.5,1,2.
        #[arg(long, value_delimiter = ',')]
        t: Option<Vec<f64>>,
        /// Number of x points.
        #[arg(long, default_value_t = 41)]
        points: usize,
    },
    /// Tabulate the modulus of smoothness.
    Modulus,
    /// Tabulate best approximations E_1..E_{n_max}.
    Bestapprox,
    /// Inspect the function corpus.
    Corpus {
        #[command(subcommand)]
        action: CorpusAction,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Suite {
    Lemma1,
    Commutation,
    Integral,
    Markov,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ExperimentKind {
    Jackson,
    Equivalence,
}

#[derive(Debug, Subcommand)]
pub enum CorpusAction {
    /// List the available functions and their parameters.
    List,
}

impl clap::ValueEnum for Format {
    fn value_variants<'a>() -> &'a [Self] {
        &[Format::Csv, Format::Json]
    }

    fn to_possible_value(&self) -> Option<clap::builder::PossibleValue> {
        Some(clap::builder::PossibleValue::new(match self {
            Format::Csv => "csv",
            Format::Json => "json",
        }))
    }
}

/// Parses `args` (including the program name), runs the command and returns
/// the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match execute(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            2
        }
    }
}

fn settings(g: GlobalArgs) -> Result<Settings> {
    let file = match &g.config {
        Some(path) => FileConfig::load(path)?,
        None => FileConfig::default(),
    };
    let flags = Flags {
        mu: g.mu,
        p: g.p,
        alpha: g.alpha,
        n_max: g.n_max,
        delta_grid: g.delta_grid,
        tol: g.tol,
        out: g.out,
        format: g.format,
        seed: g.seed,
        functions: g.functions,
        input: g.input,
    };
    Settings::resolve(flags, file)
}

pub fn execute(cli: Cli) -> Result<i32> {
    if let Command::Corpus {
        action: CorpusAction::List,
    } = cli.command
    {
        for (name, params, description) in ENTRIES {
            println!("{name:<14} {params:<22} {description}");
        }
        return Ok(0);
    }
    let s = settings(cli.global)?;
    let (label, out) = match cli.command {
        Command::Verify { suite } => (
            format!("verify {suite:?}").to_lowercase(),
            run_suite(suite, &s)?,
        ),
        Command::Experiment { kind } => (
            format!("experiment {kind:?}").to_lowercase(),
            run_experiment(kind, &s)?,
        ),
        Command::Translate { t, points } => ("translate".into(), translate(&s, t, points)?),
        Command::Modulus => ("modulus".into(), modulus(&s)?),
        Command::Bestapprox => ("bestapprox".into(), bestapprox(&s)?),
        Command::Corpus { .. } => unreachable!("handled above"),
    };
    for r in &out.reports {
        print_report(r);
    }
    let mut config = s.to_json();
    config["command"] = json!(label);
    let written = emit(&s.out, &out.tables, &out.reports, s.format, config)?;
    let code = exit_code(&out.reports);
    let failed = out
        .reports
        .iter()
        .filter(|r| !r.control && !r.passed)
        .count();
    println!(
        "{} checks, {failed} failed; wrote {} files to {}",
        out.reports.len(),
        written.len(),
        s.out.display()
    );
    Ok(code)
}

fn print_report(r: &VerificationReport) {
    let verdict = match (r.passed, r.control) {
        (true, false) => "PASS",
        (false, false) => "FAIL",
        (false, true) => "CONTROL-DETECTED",
        (true, true) => "CONTROL-MISSED",
    };
    let detail = match (r.max_deviation, r.spread()) {
        (Some(d), _) => format!("max_deviation={d:.3e} tol={:.1e}", r.tolerance),
        (None, Some(sp)) => format!(
            "ratio in [{:.4e}, {:.4e}] spread={sp:.3} limit={}",
            r.ratio_min.unwrap_or(f64::NAN),
            r.ratio_max.unwrap_or(f64::NAN),
            r.tolerance
        ),
        _ => String::new(),
    };
    let note = r
        .note
        .as_deref()
        .map(|n| format!(" ({n})"))
        .unwrap_or_default();
    println!(
        "{verdict:<16} {} {detail} [{:.2}s]{note}",
        r.check,
        r.runtime.as_secs_f64()
    );
}

fn run_suite(suite: Suite, s: &Settings) -> Result<SuiteOutput> {
    match suite {
        Suite::Lemma1 => {
            let mut cfg = verify::Lemma1Config {
                seed: s.seed,
                ..Default::default()
            };
            if let Some(m) = &s.mus {
                cfg.mus = m.clone();
            }
            if let Some(n) = s.n_max {
                cfg.n_max = n;
            }
            if let Some(t) = s.tol {
                cfg.tolerances = verify::Lemma1Tolerances {
                    normalization: t,
                    eigenfunction: t,
                    duality: t,
                    transport: t,
                    identity: t,
                };
            }
            verify::lemma1(&cfg)
        }
        Suite::Commutation => {
            let mut cfg = verify::CommutationConfig {
                seed: s.seed,
                ..Default::default()
            };
            if let Some(m) = &s.mus {
                cfg.mus = m.clone();
            }
            if let Some(t) = s.tol {
                cfg.tolerance = t;
            }
            verify::commutation(&cfg)
        }
        Suite::Integral => {
            let mut cfg = verify::IntegralConfig {
                seed: s.seed,
                ..Default::default()
            };
            if let Some(m) = &s.mus {
                cfg.mus = m.clone();
            }
            if let Some(t) = s.tol {
                cfg.tolerance = t;
            }
            verify::integral(&cfg)
        }
        Suite::Markov => {
            let base = verify::MarkovConfig {
                seed: s.seed,
                ..Default::default()
            };
            let mus = s.mus.clone().unwrap_or_else(|| vec![base.space.mu]);
            let p = s.exponents.as_ref().map_or(base.space.p, |e| e[0]);
            let mut out = SuiteOutput::default();
            for mu in mus {
                let space = SpaceParams::new(p, s.alpha.unwrap_or(base.space.alpha), mu)?;
                let mut cfg = base.clone();
                cfg.space = space;
                let mut part = verify::markov(&cfg)?;
                for t in &mut part.tables {
                    t.name = format!("{}_mu={mu}", t.name);
                }
                out.extend(part);
            }
            Ok(out)
        }
    }
}

fn study(s: &Settings) -> Study {
    let mut study = Study::default();
    if let Some(m) = &s.mus {
        study.mus = m.clone();
    }
    if let Some(e) = &s.exponents {
        study.exponents = e.clone();
    }
    study.alpha = s.alpha;
    if let Some(f) = &s.functions {
        study.functions = f.clone();
    }
    study
}

fn run_experiment(kind: ExperimentKind, s: &Settings) -> Result<SuiteOutput> {
    match kind {
        ExperimentKind::Jackson => {
            let mut cfg = JacksonExperiment {
                study: study(s),
                ..Default::default()
            };
            if let Some(n) = s.n_max {
                cfg.n_max = n.max(2);
            }
            experiment::jackson(&cfg)
        }
        ExperimentKind::Equivalence => {
            let mut cfg = EquivalenceExperiment {
                study: study(s),
                ..Default::default()
            };
            if let Some(d) = &s.deltas {
                cfg.deltas = d.clone();
            }
            experiment::equivalence(&cfg)
        }
    }
}

fn functions_or(s: &Settings, default: &str) -> Result<Vec<FunctionSpec>> {
    match &s.functions {
        Some(f) => Ok(f.clone()),
        None => Ok(vec![default.parse()?]),
    }
}

/// Spaces for the single-shot commands: `--p` (default inf) with `--alpha`
/// (default mu / 2).
fn spaces(s: &Settings, mu: f64) -> Result<Vec<SpaceParams>> {
    let exps = s
        .exponents
        .clone()
        .unwrap_or_else(|| vec![Exponent::Infinity]);
    let alpha = s.alpha.unwrap_or(0.5 * mu);
    Ok(exps
        .into_iter()
        .map(|p| SpaceParams::new(p, alpha, mu))
        .collect::<Result<_, _>>()?)
}

fn translate(s: &Settings, ts: Option<Vec<f64>>, points: usize) -> Result<SuiteOutput> {
    let ts = ts.unwrap_or_else(|| vec![0.25, 0.5, 1.0, 2.0]);
    let mus = s.mus.clone().unwrap_or_else(|| vec![1.0]);
    let xs: Vec<f64> = (0..points.max(2))
        .map(|i| -1.0 + 2.0 * i as f64 / (points.max(2) - 1) as f64)
        .collect();
    let cfg = TranslationConfig::default();
    let mut out = SuiteOutput::default();
    let mut table = Table::new("translate", &["mu", "function", "t", "x", "value"]);
    for &mu in &mus {
        let st = self_test(mu, &cfg)?;
        out.reports.push(VerificationReport::deviation(
            format!("translate/self_test/mu={mu}"),
            "startup grid",
            st.max_deviation,
            s.tol.unwrap_or(st.tolerance),
        ));
        for spec in functions_or(s, "runge")? {
            let f = corpus(&spec, mu)?;
            let op = AsymTranslator::new(mu, f.translation(cfg))?;
            for &t in &ts {
                for &x in &xs {
                    let v = op.eval(&f.handle, t, x)?;
                    table.push(vec![
                        mu.into(),
                        f.name.as_str().into(),
                        t.into(),
                        x.into(),
                        v.into(),
                    ]);
                }
            }
        }
    }
    out.tables.push(table);
    Ok(out)
}

fn modulus(s: &Settings) -> Result<SuiteOutput> {
    let deltas = s.deltas.clone().unwrap_or_else(|| experiment::dyadic(8));
    let mus = s.mus.clone().unwrap_or_else(|| vec![1.0]);
    let cfg = ModulusConfig::default();
    let mut out = SuiteOutput::default();
    for &mu in &mus {
        for spec in functions_or(s, "abs_power:gamma=1")? {
            let f = corpus(&spec, mu)?;
            for space in spaces(s, mu)? {
                let name = format!("{}/mu={mu}/p={}/alpha={}", f.name, space.p, space.alpha);
                let mut mcfg = cfg;
                mcfg.translation = f.translation(cfg.translation);
                let rows = modulus_sweep(&f.handle, &deltas, &space, &mcfg)?;
                let mut table =
                    Table::new(format!("modulus_{name}"), &["delta", "omega", "argmax_t"]);
                let mut order: Vec<usize> = (0..rows.len()).collect();
                order.sort_by(|&a, &b| rows[a].delta.total_cmp(&rows[b].delta));
                let mut decrease: f64 = 0.0;
                for w in order.windows(2) {
                    decrease = decrease.max(rows[w[0]].value - rows[w[1]].value);
                }
                for r in &rows {
                    table.push(vec![r.delta.into(), r.value.into(), r.argmax_t.into()]);
                }
                out.reports.push(VerificationReport::deviation(
                    format!("modulus/nondecreasing/{name}"),
                    format!("{} values of delta", deltas.len()),
                    decrease,
                    s.tol.unwrap_or(1e-10),
                ));
                out.tables.push(table);
            }
        }
    }
    Ok(out)
}

fn bestapprox(s: &Settings) -> Result<SuiteOutput> {
    let n_max = s.n_max.unwrap_or(16);
    let mus = s.mus.clone().unwrap_or_else(|| vec![1.0]);
    let cfg = ApproxConfig::default();
    let mut out = SuiteOutput::default();
    for &mu in &mus {
        for spec in functions_or(s, "abs_power:gamma=1")? {
            let f = corpus(&spec, mu)?;
            for space in spaces(s, mu)? {
                let name = format!("{}/mu={mu}/p={}/alpha={}", f.name, space.p, space.alpha);
                let seq = best_approx_sequence(&f.handle, n_max, &space, &cfg)?;
                let mut table = Table::new(
                    format!("bestapprox_{name}"),
                    &["n", "E_n", "S", "method", "levelled", "error_estimate"],
                );
                let mut increase: f64 = 0.0;
                for (i, r) in seq.results.iter().enumerate() {
                    if i > 0 {
                        increase = increase.max(r.value - seq.values[i - 1]);
                    }
                    table.push(vec![
                        r.n.into(),
                        r.value.into(),
                        seq.weighted_sums[i].into(),
                        r.method.tag().into(),
                        r.levelled.into(),
                        r.error_estimate.into(),
                    ]);
                }
                let mut report = VerificationReport::deviation(
                    format!("bestapprox/nonincreasing/{name}"),
                    format!("n = 1..={n_max}"),
                    increase,
                    0.0,
                );
                let warnings = seq.results.iter().filter(|r| r.warning.is_some()).count();
                if warnings > 0 {
                    report = report.with_note(format!("{warnings} solves reported warnings"));
                }
                out.reports.push(report);
                out.tables.push(table);
            }
        }
    }
    Ok(out)
}
