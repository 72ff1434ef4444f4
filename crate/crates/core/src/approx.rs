//! Weighted best polynomial approximation, the Jackson-type averaging
//! operator built on the symmetric translation, and Markov–Bernstein ratios.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;
use nalgebra::{DMatrix, DVector};
#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{contract, domain, Error, Result};
use crate::function::FunctionHandle;
use crate::jacobi::{JacobiBasis, PolynomialCoeffs};
use crate::lsq::{solve_square, weighted_least_squares};
use crate::quadrature::{
    chebyshev_lobatto, gauss_jacobi, gauss_legendre, gauss_legendre_on, project,
};
use crate::translation::{SymTranslator, TranslationConfig};
use crate::weighted::{weight, Exponent, NormConfig, NormGrid, SpaceParams};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ApproxConfig {
    /// Grid used to report the final error.
    pub norm: NormConfig,
    /// Chebyshev grid size for the exchange algorithm.
    pub remez_points: usize,
    /// Relative gap between the levelled error and the grid maximum at which
    /// the exchange stops.
    pub remez_tolerance: f64,
    pub max_iterations: usize,
    /// Smallest residual, relative to the error scale, entering IRLS weights.
    pub weight_floor: f64,
    /// Relative coefficient change counted as stagnation.
    pub stagnation: f64,
}

impl Default for ApproxConfig {
    fn default() -> Self {
        Self {
            norm: NormConfig::default(),
            remez_points: 4097,
            remez_tolerance: 1e-9,
            max_iterations: 500,
            weight_floor: 1e-12,
            stagnation: 1e-10,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ApproxMethod {
    /// Input already lies in the polynomial space.
    Exact,
    Remez,
    /// Grid-restricted minimax by Lawson reweighting after the exchange failed.
    Lawson,
    Irls,
}

impl ApproxMethod {
    pub fn tag(self) -> &'static str {
        match self {
            ApproxMethod::Exact => "exact",
            ApproxMethod::Remez => "remez",
            ApproxMethod::Lawson => "lawson",
            ApproxMethod::Irls => "irls",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BestApproxResult {
    /// The approximant has degree at most `n - 1`.
    pub n: usize,
    /// `||f - P||_{p, alpha}` for the returned `P`.
    pub value: f64,
    pub coeffs: PolynomialCoeffs,
    pub method: ApproxMethod,
    /// Levelled error of the final reference (sup norm); a lower bound for `E_n`.
    pub levelled: Option<f64>,
    /// Reference points with their weighted errors `(1-x^2)^alpha (f - P)`.
    pub reference: Vec<(f64, f64)>,
    /// Objective after each iteration.
    pub history: Vec<f64>,
    /// For the sup norm the gap to the levelled error, otherwise the change
    /// under doubling the quadrature.
    pub error_estimate: f64,
    pub warning: Option<String>,
    chebyshev: Vec<f64>,
}

impl BestApproxResult {
    /// Whether the reference carries at least `n + 1` alternating extrema of
    /// magnitude within `rel_tol * value` of `value`.
    pub fn equioscillates(&self, rel_tol: f64) -> bool {
        if self.value == 0.0 {
            return true;
        }
        if self.reference.len() < self.n + 1 {
            return false;
        }
        let level_ok = self
            .reference
            .iter()
            .all(|(_, e)| (e.abs() - self.value).abs() <= rel_tol * self.value);
        let alternates = self.reference.windows(2).all(|w| w[0].1 * w[1].1 < 0.0);
        level_ok && alternates
    }
}

fn chebyshev_row(x: f64, out: &mut [f64]) {
    if out.is_empty() {
        return;
    }
    out[0] = 1.0;
    if out.len() > 1 {
        out[1] = x;
    }
    for k in 2..out.len() {
        out[k] = 2.0 * x * out[k - 1] - out[k - 2];
    }
}

fn chebyshev_eval(c: &[f64], x: f64) -> f64 {
    // Clenshaw
    let (mut b1, mut b2) = (0.0, 0.0);
    for &ck in c.iter().skip(1).rev() {
        let b0 = ck + 2.0 * x * b1 - b2;
        b2 = b1;
        b1 = b0;
    }
    c.first().copied().unwrap_or(0.0) + x * b1 - b2
}

fn chebyshev_matrix(xs: &[f64], n: usize) -> DMatrix<f64> {
    let mut m = DMatrix::zeros(xs.len(), n);
    let mut row = vec![0.0; n];
    for (i, &x) in xs.iter().enumerate() {
        chebyshev_row(x, &mut row);
        for k in 0..n {
            m[(i, k)] = row[k];
        }
    }
    m
}

/// Re-expands a Chebyshev series in the `(mu, mu)` basis; exact up to rounding.
fn to_jacobi(c: &[f64], mu: f64) -> Result<PolynomialCoeffs> {
    let basis = JacobiBasis::symmetric(mu)?;
    let degree = c.len().saturating_sub(1);
    let rule = gauss_jacobi(degree + 2, basis)?;
    Ok(project(|x| chebyshev_eval(c, x), degree, &rule))
}

fn sample(f: &FunctionHandle, xs: &[f64]) -> Result<Vec<f64>> {
    xs.iter()
        .map(|&x| {
            let v = f.eval(x);
            if v.is_finite() {
                Ok(v)
            } else {
                Err(Error::NonFinite { x, value: v })
            }
        })
        .collect()
}

fn check_inputs(n: usize, space: &SpaceParams) -> Result<()> {
    if n == 0 {
        return Err(domain("n must be at least 1"));
    }
    let adm = space.check_admissible();
    if !adm.admissible {
        return Err(domain(adm.diagnostic));
    }
    Ok(())
}

/// `E_n(f)_{p, alpha}`: distance from `f` to polynomials of degree `<= n - 1`.
pub fn best_approx(
    f: &FunctionHandle,
    n: usize,
    space: &SpaceParams,
    cfg: &ApproxConfig,
) -> Result<BestApproxResult> {
    check_inputs(n, space)?;
    solve(f, n, space, cfg, None, n)
}

fn solve(
    f: &FunctionHandle,
    n: usize,
    space: &SpaceParams,
    cfg: &ApproxConfig,
    start: Option<&[f64]>,
    grid_degree: usize,
) -> Result<BestApproxResult> {
    if let Some(poly) = f.as_polynomial() {
        let scale = poly.coeffs().iter().fold(0.0f64, |m, c| m.max(c.abs()));
        if poly.effective_degree(1e-15 * scale) < n {
            return exact(poly, n, space.mu);
        }
    }
    match space.p {
        Exponent::Infinity => remez(f, n, space, cfg),
        Exponent::Finite(p) => irls(f, n, p, space, cfg, start, grid_degree),
    }
}

fn exact(poly: &PolynomialCoeffs, n: usize, mu: f64) -> Result<BestApproxResult> {
    let basis = JacobiBasis::symmetric(mu)?;
    let coeffs = if poly.basis() == basis {
        poly.clone()
    } else {
        let rule = gauss_jacobi(poly.degree() + 2, basis)?;
        project(|x| poly.eval(x), poly.degree(), &rule)
    };
    Ok(BestApproxResult {
        n,
        value: 0.0,
        coeffs,
        method: ApproxMethod::Exact,
        levelled: Some(0.0),
        reference: Vec::new(),
        history: Vec::new(),
        error_estimate: 0.0,
        warning: None,
        chebyshev: Vec::new(),
    })
}

/// Single-exchange Remez on a Chebyshev grid for the weighted error
/// `(1 - x^2)^alpha (f - P)`.
fn remez(
    f: &FunctionHandle,
    n: usize,
    space: &SpaceParams,
    cfg: &ApproxConfig,
) -> Result<BestApproxResult> {
    let alpha = space.alpha;
    let mut xs: Vec<f64> = chebyshev_lobatto(cfg.remez_points.max(16 * n + 1));
    xs.extend(f.breakpoints().iter().copied().filter(|b| b.abs() < 1.0));
    xs.sort_by(|a, b| a.total_cmp(b));
    xs.dedup();
    let (xs, ws): (Vec<f64>, Vec<f64>) = xs
        .into_iter()
        .map(|x| (x, weight(alpha, x)))
        .filter(|(_, w)| w.is_finite() && *w > 0.0)
        .unzip();
    let ys = sample(f, &xs)?;
    let fscale = ys
        .iter()
        .zip(&ws)
        .fold(0.0f64, |m, (y, w)| m.max((y * w).abs()));
    let tmat = chebyshev_matrix(&xs, n);

    let errors = |c: &DVector<f64>| -> Vec<f64> {
        let p = &tmat * c;
        ys.iter()
            .zip(p.iter())
            .zip(&ws)
            .map(|((y, p), w)| w * (y - p))
            .collect()
    };

    // initial reference: zeros of T_{n+1}, snapped to distinct grid points
    let mut reference: Vec<usize> = Vec::with_capacity(n + 1);
    for j in 0..=n {
        let target = -((PI * (j as f64 + 0.5) / (n as f64 + 1.0)).cos());
        let mut idx = xs.partition_point(|&x| x < target).min(xs.len() - 1);
        if idx > 0 && (xs[idx - 1] - target).abs() < (xs[idx] - target).abs() {
            idx -= 1;
        }
        if let Some(&last) = reference.last() {
            idx = idx.max(last + 1);
        }
        reference.push(idx.min(xs.len() - 1));
    }
    reference.dedup();
    if reference.len() < n + 1 {
        return Err(contract(format!(
            "grid of {} points too small for n = {n}",
            xs.len()
        )));
    }

    let mut history = Vec::new();
    let mut best: Option<(DVector<f64>, f64, f64)> = None;
    let mut converged = false;
    let mut final_ref = reference.clone();
    let max_iter = 100 + 40 * (n + 1);
    let mut previous_level = 0.0f64;
    let mut drops = 0;
    for _ in 0..max_iter {
        let mut a = DMatrix::zeros(n + 1, n + 1);
        let mut rhs = DVector::zeros(n + 1);
        let mut row = vec![0.0; n];
        for (i, &r) in reference.iter().enumerate() {
            chebyshev_row(xs[r], &mut row);
            for k in 0..n {
                a[(i, k)] = row[k];
            }
            let sign = if i % 2 == 0 { 1.0 } else { -1.0 };
            a[(i, n)] = sign / ws[r];
            rhs[i] = ys[r];
        }
        let sol = match solve_square(a, rhs) {
            Ok(s) => s,
            Err(_) => break,
        };
        let level = sol[n].abs();
        let c = sol.rows(0, n).into_owned();
        let e = errors(&c);
        let (jmax, emax) = e.iter().enumerate().fold((0, 0.0f64), |(bi, bv), (i, v)| {
            if v.abs() > bv {
                (i, v.abs())
            } else {
                (bi, bv)
            }
        });
        history.push(emax);
        if best.as_ref().is_none_or(|b| emax < b.1) {
            best = Some((c.clone(), emax, level));
            final_ref = reference.clone();
        }
        if emax - level <= cfg.remez_tolerance * emax + 1e-15 * fscale || reference.contains(&jmax)
        {
            converged = true;
            best = Some((c, emax, level));
            final_ref = reference.clone();
            break;
        }
        // the levelled error never decreases in exact arithmetic
        if level < previous_level * (1.0 - 1e-12) {
            drops += 1;
            if drops > 3 {
                break;
            }
        }
        previous_level = previous_level.max(level);

        let sgn = e[jmax].signum();
        let k = reference.partition_point(|&r| r < jmax);
        if k == 0 {
            if e[reference[0]].signum() == sgn {
                reference[0] = jmax;
            } else {
                reference.pop();
                reference.insert(0, jmax);
            }
        } else if k == reference.len() {
            if e[reference[k - 1]].signum() == sgn {
                reference[k - 1] = jmax;
            } else {
                reference.remove(0);
                reference.push(jmax);
            }
        } else if e[reference[k - 1]].signum() == sgn {
            reference[k - 1] = jmax;
        } else {
            reference[k] = jmax;
        }
    }

    let (method, c, level, warning) = match (converged, best) {
        (true, Some((c, _, level))) => (ApproxMethod::Remez, c, Some(level), None),
        (_, best) => {
            let c = lawson(&tmat, &ys, &ws, cfg.max_iterations, &mut history)?;
            let e = errors(&c);
            let emax = e.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            let (c, level) = match best {
                Some((bc, bmax, level)) if bmax < emax => (bc, Some(level)),
                _ => (c, None),
            };
            (
                ApproxMethod::Lawson,
                c,
                level,
                Some(String::from(
                    "exchange did not level the error; used grid minimax fallback",
                )),
            )
        }
    };

    let cheb: Vec<f64> = c.iter().copied().collect();
    let e = errors(&c);
    let reference: Vec<(f64, f64)> = final_ref.iter().map(|&r| (xs[r], e[r])).collect();
    let grid = NormGrid::new(Exponent::Infinity, alpha, f.breakpoints(), &cfg.norm)?;
    let fine = grid.norm(|x| f.eval(x) - chebyshev_eval(&cheb, x))?;
    let discrete = e.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let value = fine.max(discrete);
    Ok(BestApproxResult {
        n,
        value,
        coeffs: to_jacobi(&cheb, space.mu)?,
        method,
        levelled: level,
        reference,
        history,
        error_estimate: level.map_or(value, |l| (value - l).max(0.0)),
        warning,
        chebyshev: cheb,
    })
}

/// Lawson's reweighting for the discrete minimax problem.
fn lawson(
    tmat: &DMatrix<f64>,
    ys: &[f64],
    ws: &[f64],
    iterations: usize,
    history: &mut Vec<f64>,
) -> Result<DVector<f64>> {
    let m = ys.len();
    let mut u = vec![1.0 / m as f64; m];
    let mut best: Option<(DVector<f64>, f64)> = None;
    for _ in 0..iterations.max(1) {
        let a: Vec<f64> = u.iter().zip(ws).map(|(u, w)| u * w * w).collect();
        let c = weighted_least_squares(tmat, &a, ys, None)?;
        let p = tmat * &c;
        let e: Vec<f64> = ys
            .iter()
            .zip(p.iter())
            .zip(ws)
            .map(|((y, p), w)| (w * (y - p)).abs())
            .collect();
        let emax = e.iter().fold(0.0f64, |m, v| m.max(*v));
        history.push(emax);
        if best.as_ref().is_none_or(|b| emax < b.1) {
            best = Some((c, emax));
        }
        let total: f64 = u.iter().zip(&e).map(|(u, e)| u * e).sum();
        if !(total > 0.0) {
            break;
        }
        for (ui, ei) in u.iter_mut().zip(&e) {
            *ui *= ei / total;
        }
    }
    Ok(best.expect("at least one iteration").0)
}

/// Roots of `g` bracketed by consecutive sorted `xs`, refined by bisection;
/// at most `limit` are returned.
fn sign_changes(g: &impl Fn(f64) -> f64, xs: &[f64], limit: usize) -> Vec<f64> {
    let mut roots = Vec::new();
    for w in xs.windows(2) {
        let (mut a, mut b) = (w[0], w[1]);
        let (mut ga, gb) = (g(a), g(b));
        if !(ga * gb < 0.0) {
            continue;
        }
        for _ in 0..60 {
            let m = 0.5 * (a + b);
            let gm = g(m);
            if gm == 0.0 {
                a = m;
                b = m;
                break;
            }
            if ga * gm < 0.0 {
                b = m;
            } else {
                a = m;
                ga = gm;
            }
        }
        roots.push(0.5 * (a + b));
        if roots.len() >= limit {
            break;
        }
    }
    roots
}

fn irls(
    f: &FunctionHandle,
    n: usize,
    p: f64,
    space: &SpaceParams,
    cfg: &ApproxConfig,
    start: Option<&[f64]>,
    grid_degree: usize,
) -> Result<BestApproxResult> {
    let mut ncfg = cfg.norm;
    ncfg.nodes = ncfg.nodes.max(4 * grid_degree + 32);
    let grid = NormGrid::new(space.p, space.alpha, f.breakpoints(), &ncfg)?;
    let (xs, ws): (Vec<f64>, Vec<f64>) = grid
        .points()
        .iter()
        .zip(grid.weights())
        .filter(|(_, &w)| w > 0.0)
        .map(|(&x, &w)| (x, w))
        .unzip();
    let ys = sample(f, &xs)?;
    let tmat = chebyshev_matrix(&xs, n);
    let objective = |c: &DVector<f64>| -> f64 {
        let r = &tmat * c;
        ys.iter()
            .zip(r.iter())
            .zip(&ws)
            .map(|((y, g), w)| w * (y - g).abs().powf(p))
            .sum()
    };

    let mut c = weighted_least_squares(&tmat, &ws, &ys, None)?;
    let mut val = objective(&c);
    if let Some(s) = start {
        let mut warm = DVector::zeros(n);
        for (k, v) in s.iter().take(n).enumerate() {
            warm[k] = *v;
        }
        let wv = objective(&warm);
        if wv <= val {
            c = warm;
            val = wv;
        }
    }
    let mut history = vec![val.powf(1.0 / p)];
    let mass: f64 = ws.iter().sum();
    let mut eps = 1e-2f64.max(cfg.weight_floor);
    let mut iterations = 0;
    while iterations < cfg.max_iterations && val > 0.0 {
        iterations += 1;
        let scale = (val / mass).powf(1.0 / p);
        let r = &tmat * &c;
        let a: Vec<f64> = ys
            .iter()
            .zip(r.iter())
            .zip(&ws)
            .map(|((y, g), w)| w * (y - g).abs().max(eps * scale).powf(p - 2.0))
            .collect();
        let next = weighted_least_squares(&tmat, &a, &ys, None)?;
        let dir = &next - &c;
        let mut step = 1.0;
        let mut accepted = None;
        for _ in 0..12 {
            let trial = &c + &dir * step;
            let v = objective(&trial);
            if !v.is_finite() {
                history.push(v);
                return Err(Error::Solver {
                    solver: "IRLS",
                    reason: format!("objective became {v} at iteration {iterations}"),
                    history,
                });
            }
            if v <= val {
                accepted = Some((trial, v));
                break;
            }
            step *= 0.5;
        }
        let moved = match accepted {
            Some((nc, nv)) => {
                let change = (&nc - &c).norm() / c.norm().max(1e-300);
                c = nc;
                val = nv;
                change
            }
            None => 0.0,
        };
        history.push(val.powf(1.0 / p));
        if moved <= cfg.stagnation {
            if eps <= cfg.weight_floor {
                break;
            }
            eps = (eps * 0.1).max(cfg.weight_floor);
        }
    }

    let cheb: Vec<f64> = c.iter().copied().collect();
    // |f - g| has kinks at the sign changes of the residual; splitting the
    // panels there makes the reported value the norm of the final candidate
    let residual = |x: f64| f.eval(x) - chebyshev_eval(&cheb, x);
    let mut cuts = f.breakpoints().to_vec();
    cuts.extend(sign_changes(&residual, &xs, 4 * n + 8));
    let value = NormGrid::new(space.p, space.alpha, &cuts, &ncfg)?.norm(residual)?;
    let mut dcfg = ncfg;
    dcfg.nodes *= 2;
    let doubled = NormGrid::new(space.p, space.alpha, &cuts, &dcfg)?.norm(residual)?;
    Ok(BestApproxResult {
        n,
        value,
        coeffs: to_jacobi(&cheb, space.mu)?,
        method: ApproxMethod::Irls,
        levelled: None,
        reference: Vec::new(),
        history,
        error_estimate: (doubled - value).abs(),
        warning: None,
        chebyshev: cheb,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct BestApproxSequence {
    /// `results[i]` holds `E_{i+1}`.
    pub results: Vec<BestApproxResult>,
    pub values: Vec<f64>,
    /// `S(n) = n^{-2} sum_{nu <= n} nu E_nu`.
    pub weighted_sums: Vec<f64>,
}

/// `E_1, ..., E_{n_max}` with warm starts, kept non-increasing by reusing the
/// previous approximant when a solve does not improve on it.
pub fn best_approx_sequence(
    f: &FunctionHandle,
    n_max: usize,
    space: &SpaceParams,
    cfg: &ApproxConfig,
) -> Result<BestApproxSequence> {
    check_inputs(n_max, space)?;
    let mut results: Vec<BestApproxResult> = Vec::with_capacity(n_max);
    for n in 1..=n_max {
        let prev = results.last();
        let mut r = solve(
            f,
            n,
            space,
            cfg,
            prev.map(|r| r.chebyshev.as_slice()),
            n_max,
        )?;
        if let Some(prev) = prev {
            if r.value > prev.value {
                let mut kept = prev.clone();
                kept.n = n;
                kept.warning = Some(format!(
                    "kept the degree {} approximant",
                    n.saturating_sub(2)
                ));
                r = kept;
            }
        }
        results.push(r);
    }
    let values: Vec<f64> = results.iter().map(|r| r.value).collect();
    let mut weighted_sums = Vec::with_capacity(n_max);
    let mut acc = 0.0;
    for (i, v) in values.iter().enumerate() {
        let nu = (i + 1) as f64;
        acc += nu * v;
        weighted_sums.push(acc / (nu * nu));
    }
    Ok(BestApproxSequence {
        results,
        values,
        weighted_sums,
    })
}

/// Parameters of the averaging kernel
/// `(sin(m t / 2) / sin(t / 2))^{2 (q + 2)} sin^{2 mu + 1} t` on `[0, pi]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JacksonSpec {
    pub n: usize,
    pub mu: f64,
    /// Smallest integer above `mu`.
    pub q: usize,
    pub m: usize,
    pub exponent: i32,
    /// Integral of the kernel over `[0, pi]`.
    pub gamma: f64,
}

impl JacksonSpec {
    pub fn new(n: usize, mu: f64) -> Result<Self> {
        if n == 0 {
            return Err(domain("n must be at least 1"));
        }
        if !(mu.is_finite() && mu >= 0.0) {
            return Err(domain(format!("mu = {mu} must be finite and >= 0")));
        }
        let q = mu.floor() as usize + 1;
        let m = (n - 1) / (q + 2) + 1;
        let mut spec = Self {
            n,
            mu,
            q,
            m,
            exponent: 2 * (q as i32 + 2),
            gamma: 0.0,
        };
        let rule = gauss_legendre(24)?;
        let panels = 4 * m + 8;
        spec.gamma = (0..panels)
            .map(|j| {
                let lo = PI * j as f64 / panels as f64;
                let hi = PI * (j + 1) as f64 / panels as f64;
                let (ts, wts) = gauss_legendre_on(&rule, lo, hi);
                ts.iter()
                    .zip(&wts)
                    .map(|(&t, w)| w * spec.kernel(t))
                    .sum::<f64>()
            })
            .sum();
        Ok(spec)
    }

    /// Largest degree the operator can produce.
    pub fn degree_bound(&self) -> usize {
        (self.q + 2) * (self.m - 1)
    }

    /// The unnormalized kernel.
    pub fn kernel(&self, t: f64) -> f64 {
        let half = 0.5 * t;
        let s = half.sin();
        let ratio = if s.abs() < 1e-300 {
            self.m as f64
        } else {
            (self.m as f64 * half).sin() / s
        };
        ratio.powi(self.exponent) * t.sin().abs().powf(2.0 * self.mu + 1.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JacksonConfig {
    pub translation: TranslationConfig,
    /// Panels in `t` per unit of `m`.
    pub panels_per_m: usize,
    pub panel_nodes: usize,
    /// Allowed relative coefficient mass above degree `n - 1`.
    pub mass_tolerance: f64,
}

impl Default for JacksonConfig {
    fn default() -> Self {
        Self {
            translation: TranslationConfig::default(),
            panels_per_m: 2,
            panel_nodes: 16,
            mass_tolerance: 1e-6,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct JacksonOutput {
    /// `Q` truncated to degree `n - 1` in the `(mu, mu)` basis.
    pub coeffs: PolynomialCoeffs,
    /// Relative coefficient mass found above degree `n - 1` before truncation.
    pub above_degree_mass: f64,
}

/// `Q(x) = (1 / gamma) integral_0^pi T_{cos t}(f, x) K(t) dt` projected onto
/// degree `n - 1`.
pub fn jackson_operator(
    f: &FunctionHandle,
    spec: &JacksonSpec,
    cfg: &JacksonConfig,
) -> Result<JacksonOutput> {
    let n = spec.n;
    let check = JacksonSpec::new(n, spec.mu)?;
    if check.q != spec.q || check.m != spec.m || check.exponent != spec.exponent {
        return Err(contract(format!(
            "spec (q, m) = ({}, {}) inconsistent with n = {n}, mu = {}",
            spec.q, spec.m, spec.mu
        )));
    }
    let op = SymTranslator::new(spec.mu, cfg.translation)?;
    let basis = JacobiBasis::symmetric(spec.mu)?;
    let extra = 8;
    let top = n - 1 + extra;
    let rule = gauss_jacobi(n + extra, basis)?;
    let legendre = gauss_legendre(cfg.panel_nodes.max(4))?;
    let panels = cfg.panels_per_m.max(1) * spec.m + 4;
    let base: Vec<f64> = (0..=panels)
        .map(|j| PI * j as f64 / panels as f64)
        .collect();
    let bps: Vec<f64> = f
        .breakpoints()
        .iter()
        .copied()
        .filter(|b| b.abs() < 1.0)
        .collect();

    let mut coeffs = vec![0.0; top + 1];
    let mut vals = vec![0.0; top + 1];
    for (x, w) in rule.iter() {
        // the t-integrand has kinks where the averaging range touches a breakpoint
        let theta = x.clamp(-1.0, 1.0).acos();
        let mut cuts = base.clone();
        for &b in &bps {
            let tb = b.acos();
            cuts.push((theta - tb).abs());
            cuts.push(theta + tb);
        }
        cuts.retain(|t| (0.0..=PI).contains(t));
        cuts.sort_by(|a, b| a.total_cmp(b));
        cuts.dedup_by(|a, b| (*a - *b).abs() < 1e-14);
        let mut acc = 0.0;
        let mut mass = 0.0;
        for win in cuts.windows(2) {
            let (ts, wts) = gauss_legendre_on(&legendre, win[0], win[1]);
            for (&t, wt) in ts.iter().zip(&wts) {
                let k = wt * spec.kernel(t);
                if k == 0.0 {
                    continue;
                }
                acc += k * op.eval(f, t.cos(), x)?;
                mass += k;
            }
        }
        let q = acc / mass;
        basis.eval_all(x, &mut vals);
        for (c, v) in coeffs.iter_mut().zip(&vals) {
            *c += w * q * v;
        }
    }
    for (k, c) in coeffs.iter_mut().enumerate() {
        *c /= basis.norm_sq(k);
    }
    let total: f64 = coeffs.iter().map(|c| c.abs()).sum();
    let above: f64 = coeffs[n..].iter().map(|c| c.abs()).sum();
    let above_degree_mass = if total > 0.0 { above / total } else { 0.0 };
    if !(above_degree_mass <= cfg.mass_tolerance) {
        return Err(contract(format!(
            "coefficient mass {above_degree_mass:.3e} above degree {} exceeds {:.1e}",
            n - 1,
            cfg.mass_tolerance
        )));
    }
    coeffs.truncate(n);
    Ok(JacksonOutput {
        coeffs: PolynomialCoeffs::new(basis, coeffs),
        above_degree_mass,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MarkovRatios {
    /// `||P'||_{p, alpha + 1/2} / (n ||P||_{p, alpha})`.
    pub derivative: f64,
    /// `||P||_{p, alpha} / (n^{2 rho} ||P||_{p, alpha + rho})`.
    pub weight_shift: f64,
}

/// Both Markov–Bernstein ratios with `n = degree + 1`.
pub fn markov_bernstein_check(
    poly: &PolynomialCoeffs,
    space: &SpaceParams,
    rho: f64,
    cfg: &NormConfig,
) -> Result<MarkovRatios> {
    if !(rho.is_finite() && rho >= 0.0) {
        return Err(domain(format!("rho = {rho} must be finite and >= 0")));
    }
    let alpha = space.alpha;
    match space.p {
        Exponent::Finite(p) if alpha <= -1.0 / p => {
            return Err(domain(format!(
                "alpha = {alpha} must exceed -1/p = {}",
                -1.0 / p
            )));
        }
        Exponent::Infinity if alpha < 0.0 => {
            return Err(domain(format!(
                "alpha = {alpha} must be >= 0 for the sup norm"
            )));
        }
        _ => {}
    }
    if poly.is_zero() {
        return Err(contract("Markov–Bernstein ratios of the zero polynomial"));
    }
    let degree = poly.degree();
    let n = (degree + 1) as f64;
    let mut ncfg = *cfg;
    ncfg.nodes = ncfg.nodes.max(2 * degree + 32);
    ncfg.sup_points = ncfg.sup_points.max(32 * degree + 1);
    let norm = |a: f64, g: &dyn Fn(f64) -> f64| NormGrid::new(space.p, a, &[], &ncfg)?.norm(g);
    let base = norm(alpha, &|x| poly.eval(x))?;
    if base == 0.0 {
        return Err(contract("polynomial vanishes on the norm grid"));
    }
    let dp = poly.derivative();
    let d = norm(alpha + 0.5, &|x| dp.eval(x))?;
    let shifted = if rho == 0.0 {
        base
    } else {
        norm(alpha + rho, &|x| poly.eval(x))?
    };
    Ok(MarkovRatios {
        derivative: d / (n * base),
        weight_shift: base / (n.powf(2.0 * rho) * shifted),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::vec::Vec;

    fn space(p: Exponent, alpha: f64, mu: f64) -> SpaceParams {
        SpaceParams::new(p, alpha, mu).unwrap()
    }

    #[test]
    fn square_has_half_as_minimax_constant_error() {
        let f = FunctionHandle::from_fn("sq", |x| x * x);
        let r = best_approx(
            &f,
            2,
            &space(Exponent::Infinity, 0.0, 0.0),
            &ApproxConfig::default(),
        )
        .unwrap();
        assert_eq!(r.method, ApproxMethod::Remez);
        assert!((r.value - 0.5).abs() < 1e-9, "{}", r.value);
        assert!(r.equioscillates(1e-7));
        assert!((r.coeffs.eval(0.3) - 0.5).abs() < 1e-9);
    }

    #[test]
    fn identity_in_l1_by_constant_scan() {
        let f = FunctionHandle::identity();
        let r = best_approx(
            &f,
            1,
            &space(Exponent::Finite(1.0), 0.0, 0.0),
            &ApproxConfig::default(),
        )
        .unwrap();
        // oracle: min_c integral |x - c| dx over a grid of constants
        let oracle = (0..=2000)
            .map(|j| {
                let c = -1.0 + j as f64 / 1000.0;
                // closed form of integral_{-1}^{1} |x - c| dx for |c| <= 1
                c * c + 1.0
            })
            .fold(f64::INFINITY, f64::min);
        assert!((r.value - oracle).abs() < 1e-4, "{} vs {oracle}", r.value);
        assert!(r.coeffs.eval(0.0).abs() < 1e-3);
    }

    #[test]
    fn polynomials_in_the_space_have_zero_error() {
        let cfg = ApproxConfig::default();
        for p in [
            Exponent::Infinity,
            Exponent::Finite(1.0),
            Exponent::Finite(2.0),
        ] {
            let s = space(p, 0.5, 1.0);
            let f = FunctionHandle::from_fn("cubic", |x| 1.0 - 2.0 * x + x * x * x);
            let r = best_approx(&f, 4, &s, &cfg).unwrap();
            assert!(r.value < 1e-9, "{p}: {}", r.value);
            let poly =
                PolynomialCoeffs::new(JacobiBasis::symmetric(1.0).unwrap(), vec![0.3, -0.2, 0.1]);
            let r = best_approx(&FunctionHandle::polynomial(poly), 3, &s, &cfg).unwrap();
            assert_eq!(r.method, ApproxMethod::Exact);
            assert_eq!(r.value, 0.0);
        }
    }

    #[test]
    fn l2_matches_orthogonal_projection() {
        let s = space(Exponent::Finite(2.0), 0.5, 1.0);
        let f = FunctionHandle::from_fn("runge", |x| 1.0 / (1.0 + 25.0 * x * x));
        let r = best_approx(&f, 8, &s, &ApproxConfig::default()).unwrap();
        // weight (1 - x^2)^{2 alpha} is the (1, 1) Jacobi weight
        let rule = gauss_jacobi(200, JacobiBasis::symmetric(1.0).unwrap()).unwrap();
        let proj = project(|x| f.eval(x), 7, &rule);
        for i in 0..=20 {
            let x = -1.0 + i as f64 / 10.0;
            assert!((proj.eval(x) - r.coeffs.eval(x)).abs() < 1e-9, "x = {x}");
        }
    }

    #[test]
    fn sequence_is_monotone_with_weighted_sums() {
        let s = space(Exponent::Infinity, 0.5, 1.0);
        let f = FunctionHandle::from_fn("abs", f64::abs).with_breakpoints(vec![0.0]);
        let seq = best_approx_sequence(&f, 12, &s, &ApproxConfig::default()).unwrap();
        for w in seq.values.windows(2) {
            assert!(w[1] <= w[0] + 1e-8);
        }
        let manual = (1..=5).map(|k| k as f64 * seq.values[k - 1]).sum::<f64>() / 25.0;
        assert!((seq.weighted_sums[4] - manual).abs() < 1e-15);
        // even function: E_{2k} = E_{2k-1}
        assert!((seq.values[3] - seq.values[2]).abs() < 1e-7 * seq.values[2]);
    }

    #[test]
    fn sequence_in_l1_is_monotone() {
        let s = space(Exponent::Finite(1.0), 0.5, 1.0);
        let f = FunctionHandle::from_fn("abs", f64::abs).with_breakpoints(vec![0.0]);
        let seq = best_approx_sequence(&f, 10, &s, &ApproxConfig::default()).unwrap();
        for w in seq.values.windows(2) {
            assert!(w[1] <= w[0] + 1e-12);
        }
        assert!(seq.values[9] < 0.2 * seq.values[0]);
    }

    #[test]
    fn rejects_inadmissible_space_and_zero_n() {
        let f = FunctionHandle::identity();
        assert!(best_approx(
            &f,
            0,
            &space(Exponent::Infinity, 0.5, 1.0),
            &ApproxConfig::default()
        )
        .is_err());
        assert!(best_approx(
            &f,
            2,
            &space(Exponent::Infinity, 3.0, 1.0),
            &ApproxConfig::default()
        )
        .is_err());
    }

    #[test]
    fn jackson_spec_degree_window() {
        for mu in [0.5, 1.0, 2.0, 3.0] {
            for n in 1..80 {
                let s = JacksonSpec::new(n, mu).unwrap();
                let lower = (n - 1) as f64 / (s.q + 2) as f64;
                assert!(lower < s.m as f64 && (s.m as f64) <= lower + 1.0);
                assert!(s.degree_bound() < n);
                assert!(s.q as f64 > mu && (s.q as f64 - 1.0) <= mu);
            }
        }
    }

    #[test]
    fn jackson_reproduces_constants() {
        let spec = JacksonSpec::new(12, 1.0).unwrap();
        let out = jackson_operator(
            &FunctionHandle::constant(2.5),
            &spec,
            &JacksonConfig::default(),
        )
        .unwrap();
        for x in [-0.9, 0.0, 0.7] {
            assert!((out.coeffs.eval(x) - 2.5).abs() < 1e-10);
        }
    }

    #[test]
    fn jackson_scales_basis_elements() {
        let basis = JacobiBasis::symmetric(1.0).unwrap();
        let mut gaps = Vec::new();
        for n in [9, 17, 33, 65] {
            let spec = JacksonSpec::new(n, 1.0).unwrap();
            let f = FunctionHandle::polynomial(PolynomialCoeffs::basis_element(basis, 1));
            let out = jackson_operator(&f, &spec, &JacksonConfig::default()).unwrap();
            assert!(out.above_degree_mass < 1e-10);
            let c = out.coeffs.coeffs();
            // only the R_1 component survives
            assert!(c.iter().enumerate().all(|(k, v)| k == 1 || v.abs() < 1e-10));
            // multiplier: normalized kernel average of R_1(cos t)
            let rule = gauss_legendre(24).unwrap();
            let panels = 8 * spec.m + 8;
            let lambda: f64 = (0..panels)
                .map(|j| {
                    let (ts, ws) = gauss_legendre_on(
                        &rule,
                        PI * j as f64 / panels as f64,
                        PI * (j + 1) as f64 / panels as f64,
                    );
                    ts.iter()
                        .zip(&ws)
                        .map(|(&t, w)| w * spec.kernel(t) * t.cos())
                        .sum::<f64>()
                })
                .sum::<f64>()
                / spec.gamma;
            assert!((c[1] - lambda).abs() < 1e-10);
            gaps.push(1.0 - lambda);
        }
        for w in gaps.windows(2) {
            let r = w[0] / w[1];
            assert!(r > 2.5 && r < 6.0, "ratio {r}");
        }
    }

    #[test]
    fn jackson_handles_kinks() {
        let spec = JacksonSpec::new(16, 1.0).unwrap();
        let f = FunctionHandle::from_fn("abs", f64::abs).with_breakpoints(vec![0.0]);
        let out = jackson_operator(&f, &spec, &JacksonConfig::default()).unwrap();
        assert!(out.coeffs.degree() <= 15);
        assert!(out.above_degree_mass < 1e-6);
    }

    #[test]
    fn markov_ratios_trivial_cases() {
        let basis = JacobiBasis::symmetric(1.0).unwrap();
        let s = space(Exponent::Infinity, 0.0, 1.0);
        let c = PolynomialCoeffs::new(basis, vec![3.0]);
        let r = markov_bernstein_check(&c, &s, 0.0, &NormConfig::default()).unwrap();
        assert_eq!(r.derivative, 0.0);
        assert_eq!(r.weight_shift, 1.0);
        let zero = PolynomialCoeffs::new(basis, vec![0.0, 0.0]);
        assert!(matches!(
            markov_bernstein_check(&zero, &s, 0.5, &NormConfig::default()),
            Err(Error::Contract(_))
        ));
    }

    #[test]
    fn markov_ratio_of_chebyshev_polynomial() {
        // T_n: ||T_n'|| sqrt(1-x^2) = n on [-1, 1], so r1 = n / (n + 1)
        let n = 6;
        let rule = gauss_jacobi(20, JacobiBasis::symmetric(1.0).unwrap()).unwrap();
        let t = project(|x| (n as f64 * x.acos()).cos(), n, &rule);
        let s = space(Exponent::Infinity, 0.0, 1.0);
        let r = markov_bernstein_check(&t, &s, 0.5, &NormConfig::default()).unwrap();
        assert!(
            (r.derivative - n as f64 / (n + 1) as f64).abs() < 1e-8,
            "{}",
            r.derivative
        );
    }
}
