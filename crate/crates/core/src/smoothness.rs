//! The modulus of smoothness built on the asymmetric translation, the
//! K-functional with the operator `D` as penalty, and their ratio.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;
use nalgebra::{DMatrix, DVector};
#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{domain, Error, Result};
use crate::function::FunctionHandle;
use crate::jacobi::{JacobiBasis, PolynomialCoeffs, SturmLiouville};
use crate::lsq::weighted_least_squares;
use crate::quadrature::{gauss_jacobi, project};
use crate::search::golden_max;
use crate::translation::{spectral_translate, AsymTranslator, TranslationConfig};
use crate::weighted::{Exponent, NormConfig, NormGrid, SpaceParams};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModulusConfig {
    pub translation: TranslationConfig,
    pub norm: NormConfig,
    /// Size of the shift grid on `[0, delta]`.
    pub t_points: usize,
    /// Golden-section refinement of the supremum around the grid argmax.
    pub refine: bool,
    /// Use the diagonal action on Jacobi expansions for polynomial inputs
    /// when `mu` is an integer.
    pub spectral: bool,
}

impl Default for ModulusConfig {
    fn default() -> Self {
        Self {
            translation: TranslationConfig::default(),
            norm: NormConfig::default(),
            t_points: 65,
            refine: true,
            spectral: true,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModulusResult {
    pub delta: f64,
    pub value: f64,
    pub argmax_t: f64,
    pub grid_size: usize,
    /// Number of shifts at which the deviation norm was evaluated.
    pub evaluations: usize,
}

/// `t -> ||tau_t f - f||_{p, alpha}` for a fixed `f` and space.
pub struct Deviation {
    f: FunctionHandle,
    grid: NormGrid,
    op: AsymTranslator,
    spectral: Option<PolynomialCoeffs>,
}

impl Deviation {
    pub fn new(f: &FunctionHandle, space: &SpaceParams, cfg: &ModulusConfig) -> Result<Self> {
        let grid = NormGrid::new(space.p, space.alpha, f.breakpoints(), &cfg.norm)?;
        let op = AsymTranslator::new(space.mu, cfg.translation)?;
        let spectral = if cfg.spectral && space.mu.fract() == 0.0 {
            f.as_polynomial()
                .filter(|p| p.basis() == JacobiBasis::symmetric(space.mu).expect("mu >= 0"))
                .cloned()
        } else {
            None
        };
        Ok(Self {
            f: f.clone(),
            grid,
            op,
            spectral,
        })
    }

    pub fn at(&self, t: f64) -> Result<f64> {
        match &self.spectral {
            Some(poly) => self
                .grid
                .try_norm(|x| Ok(spectral_translate(poly, t, x)? - poly.eval(x))),
            None => self
                .grid
                .try_norm(|x| Ok(self.op.eval(&self.f, t, x)? - self.f.eval(x))),
        }
    }
}

/// Shift grid on `(0, delta]`: geometric points from `1e-4 delta` followed by
/// a uniform tail ending at `delta`.
pub fn shift_grid(delta: f64, points: usize) -> Vec<f64> {
    let points = points.max(4);
    let uniform = (points * 5 / 8).max(2);
    let geometric = points - uniform;
    let lowest = delta * 1e-4;
    let highest = delta / uniform as f64;
    let mut grid: Vec<f64> = (0..geometric)
        .map(|k| lowest * (highest / lowest).powf(k as f64 / geometric as f64))
        .collect();
    grid.extend((1..=uniform).map(|j| delta * j as f64 / uniform as f64));
    grid
}

fn check_delta(delta: f64) -> Result<()> {
    if !(delta.is_finite() && delta >= 0.0) {
        return Err(domain(format!("delta = {delta} must be finite and >= 0")));
    }
    if delta >= PI {
        return Err(domain(format!("delta = {delta} must be below pi")));
    }
    Ok(())
}

/// `omega(f, delta)_{p, alpha} = sup_{|t| <= delta} ||tau_t f - f||_{p, alpha}`.
pub fn modulus(
    f: &FunctionHandle,
    delta: f64,
    space: &SpaceParams,
    cfg: &ModulusConfig,
) -> Result<ModulusResult> {
    Ok(modulus_sweep(f, &[delta], space, cfg)?.remove(0))
}

/// The modulus at several `delta` sharing one set of deviation evaluations;
/// results follow the input order.
pub fn modulus_sweep(
    f: &FunctionHandle,
    deltas: &[f64],
    space: &SpaceParams,
    cfg: &ModulusConfig,
) -> Result<Vec<ModulusResult>> {
    for &d in deltas {
        check_delta(d)?;
    }
    let dmax = deltas.iter().copied().fold(0.0, f64::max);
    if dmax == 0.0 {
        return Ok(deltas
            .iter()
            .map(|&d| ModulusResult {
                delta: d,
                value: 0.0,
                argmax_t: 0.0,
                grid_size: 0,
                evaluations: 0,
            })
            .collect());
    }
    let dev = Deviation::new(f, space, cfg)?;
    let mut grid = shift_grid(dmax, cfg.t_points);
    grid.extend(deltas.iter().copied().filter(|&d| d > 0.0));
    for &d in deltas {
        if d > 0.0 && d < dmax {
            grid.extend(shift_grid(d, cfg.t_points / 4));
        }
    }
    grid.sort_by(|a, b| a.total_cmp(b));
    grid.dedup();
    let values = grid
        .iter()
        .map(|&t| dev.at(t))
        .collect::<Result<Vec<f64>>>()?;
    let mut evaluations = grid.len();
    let mut out = Vec::with_capacity(deltas.len());
    for &d in deltas {
        if d == 0.0 {
            out.push(ModulusResult {
                delta: 0.0,
                value: 0.0,
                argmax_t: 0.0,
                grid_size: 0,
                evaluations: 0,
            });
            continue;
        }
        let upto = grid.partition_point(|&t| t <= d);
        let (mut best_i, mut best) = (0, values[0]);
        for (i, &v) in values[..upto].iter().enumerate() {
            if v > best {
                best = v;
                best_i = i;
            }
        }
        let mut argmax = grid[best_i];
        // an argmax at delta itself sits on the boundary of the sup; only
        // interior maxima are refined
        if cfg.refine && best > 0.0 && best_i + 1 < upto {
            let lo = if best_i > 0 { grid[best_i - 1] } else { 0.0 };
            let hi = grid[best_i + 1];
            if hi > lo {
                let mut failure: Option<Error> = None;
                let mut calls = 0;
                let (t, v) = golden_max(
                    |t| {
                        calls += 1;
                        match dev.at(t) {
                            Ok(v) => v,
                            Err(e) => {
                                failure.get_or_insert(e);
                                0.0
                            }
                        }
                    },
                    lo,
                    hi,
                    1e-3 * (hi - lo),
                );
                if let Some(e) = failure {
                    return Err(e);
                }
                evaluations += calls;
                if v > best {
                    best = v;
                    argmax = t;
                }
            }
        }
        out.push(ModulusResult {
            delta: d,
            value: best,
            argmax_t: argmax,
            grid_size: upto,
            evaluations,
        });
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KConfig {
    /// Fixed candidate degree; `None` selects `max(32, ceil(4 / delta))`.
    pub degree: Option<usize>,
    /// Upper limit for the automatic degree.
    pub max_degree: usize,
    pub norm: NormConfig,
    pub max_iterations: usize,
    /// Relative objective improvement below which the solver stops.
    pub tolerance: f64,
}

impl Default for KConfig {
    fn default() -> Self {
        Self {
            degree: None,
            max_degree: 128,
            norm: NormConfig::default(),
            max_iterations: 300,
            tolerance: 1e-9,
        }
    }
}

/// `max(32, ceil(4 / delta))`, capped at `max_degree`.
pub fn candidate_degree(delta: f64, max_degree: usize) -> usize {
    let raw = (4.0 / delta).ceil();
    let raw = if raw.is_finite() {
        raw as usize
    } else {
        usize::MAX
    };
    raw.max(32).min(max_degree.max(1))
}

#[derive(Debug, Clone, PartialEq)]
pub struct KFunctionalResult {
    pub delta: f64,
    /// `||f - g|| + delta^2 ||D g||` for the returned `g`: an upper bound for K.
    pub value: f64,
    pub degree: usize,
    pub coeffs: PolynomialCoeffs,
    pub iterations: usize,
    /// Value of the competitor `g = 0`, i.e. `||f||`.
    pub zero_candidate: f64,
}

/// Discretized objective `N(y - M c) + delta^2 N(M E c)`.
struct KProblem {
    m: DMatrix<f64>,
    y: Vec<f64>,
    w: Vec<f64>,
    eig: Vec<f64>,
    penalty: f64,
    p: Exponent,
}

impl KProblem {
    fn residuals(&self, c: &DVector<f64>) -> (Vec<f64>, Vec<f64>) {
        let g = &self.m * c;
        let ec = DVector::from_iterator(c.len(), c.iter().zip(&self.eig).map(|(a, e)| a * e));
        let dg = &self.m * ec;
        let r = self.y.iter().zip(g.iter()).map(|(y, g)| y - g).collect();
        (r, dg.iter().copied().collect())
    }

    fn norm(&self, v: &[f64], q: Exponent) -> f64 {
        match q {
            Exponent::Infinity => v
                .iter()
                .zip(&self.w)
                .fold(0.0f64, |m, (x, w)| m.max(x.abs() * w)),
            Exponent::Finite(p) => {
                let s: f64 = v
                    .iter()
                    .zip(&self.w)
                    .map(|(x, w)| w * x.abs().powf(p))
                    .sum();
                s.powf(1.0 / p)
            }
        }
    }

    fn objective(&self, c: &DVector<f64>) -> f64 {
        let (r, s) = self.residuals(c);
        self.norm(&r, self.p) + self.penalty * self.norm(&s, self.p)
    }

    /// Smoothed `q`-norm surrogate used on the sup grid: the weights enter as
    /// `|w_i v_i|^q` averaged over the grid.
    fn surrogate(&self, v: &[f64], q: f64) -> f64 {
        let n = v.len() as f64;
        let top = v
            .iter()
            .zip(&self.w)
            .fold(0.0f64, |m, (x, w)| m.max(x.abs() * w));
        if top == 0.0 {
            return 0.0;
        }
        let s: f64 = v
            .iter()
            .zip(&self.w)
            .map(|(x, w)| (x.abs() * w / top).powf(q))
            .sum();
        top * (s / n).powf(1.0 / q)
    }

    fn surrogate_objective(&self, c: &DVector<f64>, q: f64) -> f64 {
        let (r, s) = self.residuals(c);
        self.surrogate(&r, q) + self.penalty * self.surrogate(&s, q)
    }

    /// One reweighted least-squares step for the `q`-norm objective (the
    /// grid-averaged surrogate when `sup` is set); residuals are floored at
    /// `eps` times their norm.
    fn irls_step(&self, c: &DVector<f64>, q: f64, eps: f64, sup: bool) -> Result<DVector<f64>> {
        let (r, s) = self.residuals(c);
        let (nr, ns) = if sup {
            (self.surrogate(&r, q), self.surrogate(&s, q))
        } else {
            (
                self.norm(&r, Exponent::Finite(q)),
                self.norm(&s, Exponent::Finite(q)),
            )
        };
        let n = r.len() as f64;
        let row = |v: f64, w: f64, norm: f64, scale: f64| -> f64 {
            if !(norm > 1e-300) {
                // the term vanishes identically; keep it as a plain quadratic
                return scale * w;
            }
            if sup {
                // d/dv of (mean |w v|^q)^{1/q}, written through the bounded ratio w |v| / norm
                let ratio = (w * v.abs() / norm).max(eps);
                scale * w * w / (n * norm) * ratio.powf(q - 2.0)
            } else {
                let ratio = (v.abs() / norm).max(eps);
                scale * w / norm * ratio.powf(q - 2.0)
            }
        };
        let a: Vec<f64> = r
            .iter()
            .zip(&self.w)
            .map(|(&v, &w)| row(v, w, nr, 1.0))
            .collect();
        let b: Vec<f64> = s
            .iter()
            .zip(&self.w)
            .map(|(&v, &w)| row(v, w, ns, self.penalty))
            .collect();
        weighted_least_squares(&self.m, &a, &self.y, Some((&b, &self.eig)))
    }
}

/// Backtracking along `next - c` until `objective` decreases; returns the
/// accepted point and its value, or `None` if no decrease was found.
fn line_search(
    c: &DVector<f64>,
    next: &DVector<f64>,
    current: f64,
    objective: impl Fn(&DVector<f64>) -> f64,
) -> Option<(DVector<f64>, f64)> {
    let dir = next - c;
    let mut step = 1.0;
    for _ in 0..12 {
        let trial = c + &dir * step;
        let v = objective(&trial);
        if v < current {
            return Some((trial, v));
        }
        step *= 0.5;
    }
    None
}

/// `K(f, delta) = inf_g ||f - g||_{p, alpha} + delta^2 ||D g||_{p, alpha}` over
/// polynomials `g` of degree `N` in the `(mu, mu)` basis. The returned value
/// is achieved by the returned `g`, hence an upper bound for the infimum.
pub fn k_functional(
    f: &FunctionHandle,
    delta: f64,
    space: &SpaceParams,
    cfg: &KConfig,
) -> Result<KFunctionalResult> {
    check_delta(delta)?;
    let mu = space.mu;
    let basis = JacobiBasis::symmetric(mu)?;
    let op = SturmLiouville::symmetric(mu)?;
    let degree = cfg
        .degree
        .unwrap_or_else(|| candidate_degree(delta, cfg.max_degree))
        .max(1);
    let mut ncfg = cfg.norm;
    ncfg.nodes = ncfg.nodes.max(2 * degree + 16);
    ncfg.sup_points = ncfg.sup_points.max(8 * degree + 1);
    let fine_grid = NormGrid::new(space.p, space.alpha, f.breakpoints(), &ncfg)?;
    let smooth_grid = NormGrid::new(space.p, space.alpha, &[], &ncfg)?;
    let zero_candidate = fine_grid.norm(|x| f.eval(x))?;

    let coarse_cfg = NormConfig {
        nodes: ncfg.nodes,
        sup_points: (4 * degree + 1).max(257),
        refine: false,
    };
    let grid = NormGrid::new(space.p, space.alpha, f.breakpoints(), &coarse_cfg)?;
    let (xs, ws): (Vec<f64>, Vec<f64>) = grid
        .points()
        .iter()
        .zip(grid.weights())
        .filter(|(_, &w)| w > 0.0)
        .map(|(&x, &w)| (x, w))
        .unzip();
    let mut m = DMatrix::zeros(xs.len(), degree + 1);
    let mut row = vec![0.0; degree + 1];
    for (i, &x) in xs.iter().enumerate() {
        basis.eval_all(x, &mut row);
        for (k, v) in row.iter().enumerate() {
            m[(i, k)] = *v;
        }
    }
    let y: Vec<f64> = xs.iter().map(|&x| f.eval(x)).collect();
    if let Some((i, v)) = y.iter().enumerate().find(|(_, v)| !v.is_finite()) {
        return Err(Error::NonFinite {
            x: xs[i],
            value: *v,
        });
    }
    let eig: Vec<f64> = (0..=degree).map(|k| op.eigenvalue(k)).collect();
    let problem = KProblem {
        m,
        y,
        w: ws,
        eig,
        penalty: delta * delta,
        p: space.p,
    };

    // warm starts: zero, the orthogonal projection and its Tikhonov filters
    let rule = gauss_jacobi(2 * degree + 32, basis)?;
    let proj = project(|x| f.eval(x), degree, &rule);
    let mut best = DVector::zeros(degree + 1);
    let mut best_val = problem.objective(&best);
    let d4 = delta.powi(4);
    for j in -6..=6 {
        let lambda = d4 * 10f64.powf(j as f64 / 2.0);
        let c = DVector::from_iterator(
            degree + 1,
            proj.coeffs()
                .iter()
                .zip(&problem.eig)
                .map(|(a, e)| a / (1.0 + lambda * e * e)),
        );
        let v = problem.objective(&c);
        if v < best_val {
            best_val = v;
            best = c;
        }
    }
    let c = DVector::from_column_slice(proj.coeffs());
    let v = problem.objective(&c);
    if v < best_val {
        best_val = v;
        best = c;
    }

    let mut iterations = 0;
    let negligible = best_val <= 1e-15 * zero_candidate.max(1e-300);
    match space.p {
        _ if negligible => {}
        Exponent::Finite(p) => {
            let mut c = best.clone();
            let mut val = best_val;
            let mut eps = 1e-2;
            while iterations < cfg.max_iterations {
                iterations += 1;
                let next = problem.irls_step(&c, p, eps, false)?;
                match line_search(&c, &next, val, |c| problem.objective(c)) {
                    Some((nc, nv)) => {
                        let gain = (val - nv) / val.max(1e-300);
                        c = nc;
                        val = nv;
                        if gain < cfg.tolerance {
                            if eps <= 1e-10 {
                                break;
                            }
                            eps *= 0.1;
                        }
                    }
                    None => {
                        if eps <= 1e-10 {
                            break;
                        }
                        eps *= 0.1;
                    }
                }
            }
            if val < best_val {
                best = c;
            }
        }
        Exponent::Infinity => {
            let mut c = best.clone();
            for &q in &[2.0, 4.0, 8.0, 16.0, 32.0, 64.0] {
                let mut val = problem.surrogate_objective(&c, q);
                for _ in 0..25 {
                    if iterations >= cfg.max_iterations {
                        break;
                    }
                    iterations += 1;
                    let next = problem.irls_step(&c, q, 1e-8, true)?;
                    match line_search(&c, &next, val, |c| problem.surrogate_objective(c, q)) {
                        Some((nc, nv)) => {
                            let gain = (val - nv) / val.max(1e-300);
                            c = nc;
                            val = nv;
                            if gain < 1e-6 {
                                break;
                            }
                        }
                        None => break,
                    }
                }
                let v = problem.objective(&c);
                if v < best_val {
                    best_val = v;
                    best = c.clone();
                }
            }
            let (c, _, steps) = subgradient_polish(&problem, &best, best_val, 400);
            iterations += steps;
            best = c;
        }
    }

    let coeffs = PolynomialCoeffs::new(basis, best.iter().copied().collect());
    let dg = op.apply_coeffs(&coeffs)?;
    let dist = fine_grid.norm(|x| f.eval(x) - coeffs.eval(x))?;
    let pen = smooth_grid.norm(|x| dg.eval(x))?;
    let mut value = dist + delta * delta * pen;
    let mut coeffs = coeffs;
    if zero_candidate <= value {
        value = zero_candidate;
        coeffs = PolynomialCoeffs::new(basis, vec![0.0]);
    }
    Ok(KFunctionalResult {
        delta,
        value,
        degree,
        coeffs,
        iterations,
        zero_candidate,
    })
}

/// Subgradient descent on the sup-norm objective with diminishing steps;
/// returns the best iterate seen.
fn subgradient_polish(
    problem: &KProblem,
    start: &DVector<f64>,
    start_val: f64,
    steps: usize,
) -> (DVector<f64>, f64, usize) {
    let mut c = start.clone();
    let mut best = start.clone();
    let mut best_val = start_val;
    let n = c.len();
    for k in 0..steps {
        let (r, s) = problem.residuals(&c);
        let arg = |v: &[f64]| {
            v.iter()
                .zip(&problem.w)
                .enumerate()
                .fold((0, 0.0f64), |(bi, bv), (i, (x, w))| {
                    let a = x.abs() * w;
                    if a > bv {
                        (i, a)
                    } else {
                        (bi, bv)
                    }
                })
        };
        let (ir, _) = arg(&r);
        let (is, vs) = arg(&s);
        let mut g = DVector::<f64>::zeros(n);
        let sr = -r[ir].signum() * problem.w[ir];
        for k2 in 0..n {
            g[k2] += sr * problem.m[(ir, k2)];
        }
        if vs > 0.0 {
            let ss = s[is].signum() * problem.w[is] * problem.penalty;
            for k2 in 0..n {
                g[k2] += ss * problem.m[(is, k2)] * problem.eig[k2];
            }
        }
        let gn = g.norm_squared();
        if gn == 0.0 {
            break;
        }
        let step = 0.05 * best_val / gn / ((k + 1) as f64).sqrt();
        c -= &g * step;
        let v = problem.objective(&c);
        if v < best_val {
            best_val = v;
            best.copy_from(&c);
        }
    }
    (best, best_val, steps)
}

/// How a ratio `omega / K` was resolved.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RatioStatus {
    Finite,
    /// Both sides vanish; the ratio is reported as 1 by convention.
    ZeroOverZero,
    /// `K = 0` while `omega > 0`: the solver failed.
    Inconsistent,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EquivalenceRow {
    pub delta: f64,
    pub omega: f64,
    pub k_value: f64,
    pub rho: Option<f64>,
    /// `rho cos^{2 mu}(delta / 2)`.
    pub rho_weighted: Option<f64>,
    pub status: RatioStatus,
}

/// Absolute level below which `omega` and `K` count as zero, relative to `||f||`.
pub const ZERO_LEVEL: f64 = 1e-11;

/// `rho(delta) = omega(f, delta) / K(f, delta)` on a grid of `delta`.
pub fn equivalence_ratio(
    f: &FunctionHandle,
    deltas: &[f64],
    space: &SpaceParams,
    mcfg: &ModulusConfig,
    kcfg: &KConfig,
) -> Result<Vec<EquivalenceRow>> {
    for &d in deltas {
        if !(d > 0.0 && d < PI) {
            return Err(domain(format!("delta = {d} must lie in (0, pi)")));
        }
    }
    let omegas = modulus_sweep(f, deltas, space, mcfg)?;
    let scale = NormGrid::new(space.p, space.alpha, f.breakpoints(), &mcfg.norm)?
        .norm(|x| f.eval(x))?
        .max(1.0);
    let mut rows = Vec::with_capacity(deltas.len());
    for (om, &d) in omegas.iter().zip(deltas) {
        let k = k_functional(f, d, space, kcfg)?;
        let weight = (0.5 * d).cos().powf(2.0 * space.mu);
        let zero = ZERO_LEVEL * scale;
        let (rho, status) = if k.value <= zero && om.value <= zero {
            (Some(1.0), RatioStatus::ZeroOverZero)
        } else if k.value <= zero {
            (None, RatioStatus::Inconsistent)
        } else {
            (Some(om.value / k.value), RatioStatus::Finite)
        };
        rows.push(EquivalenceRow {
            delta: d,
            omega: om.value,
            k_value: k.value,
            rho,
            rho_weighted: rho.map(|r| r * weight),
            status,
        });
    }
    Ok(rows)
}
