//! Weighted Lebesgue spaces on `[-1, 1]` with weight `(1 - x^2)^alpha`.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;
#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{domain, Error, Result};
use crate::function::FunctionHandle;
use crate::jacobi::JacobiBasis;
use crate::quadrature::{chebyshev_lobatto, gauss_jacobi, gauss_legendre};
use crate::search::golden_max;

/// The Lebesgue exponent: a finite `p >= 1` or the sup norm.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Exponent {
    Finite(f64),
    Infinity,
}

impl Exponent {
    pub fn finite(p: f64) -> Result<Self> {
        if !(p.is_finite() && p >= 1.0) {
            return Err(domain(format!(
                "exponent p = {p} must satisfy 1 <= p < inf"
            )));
        }
        Ok(Exponent::Finite(p))
    }

    pub fn is_infinite(self) -> bool {
        matches!(self, Exponent::Infinity)
    }

    /// `p` as a float; `f64::INFINITY` for the sup norm.
    pub fn value(self) -> f64 {
        match self {
            Exponent::Finite(p) => p,
            Exponent::Infinity => f64::INFINITY,
        }
    }
}

impl fmt::Display for Exponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Exponent::Finite(p) => write!(f, "{p}"),
            Exponent::Infinity => f.write_str("inf"),
        }
    }
}

impl FromStr for Exponent {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let t = s.trim();
        if t.eq_ignore_ascii_case("inf") || t.eq_ignore_ascii_case("infinity") || t == "∞" {
            return Ok(Exponent::Infinity);
        }
        let p: f64 = t
            .parse()
            .map_err(|_| domain(format!("cannot parse exponent {s:?}")))?;
        if p == f64::INFINITY {
            return Ok(Exponent::Infinity);
        }
        Exponent::finite(p)
    }
}

/// The triple `(p, alpha, mu)` fixing a weighted space and the translation parameter.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpaceParams {
    pub p: Exponent,
    pub alpha: f64,
    pub mu: f64,
}

/// Outcome of [`SpaceParams::check_admissible`].
#[derive(Debug, Clone, PartialEq)]
pub struct Admissibility {
    pub admissible: bool,
    pub diagnostic: String,
}

impl SpaceParams {
    pub fn new(p: Exponent, alpha: f64, mu: f64) -> Result<Self> {
        if let Exponent::Finite(v) = p {
            Exponent::finite(v)?;
        }
        if !alpha.is_finite() {
            return Err(domain(format!("alpha = {alpha} is not finite")));
        }
        if !(mu.is_finite() && mu >= 0.0) {
            return Err(domain(format!("mu = {mu} must be finite and >= 0")));
        }
        Ok(Self { p, alpha, mu })
    }

    /// Whether `(p, alpha, mu)` lies in the window where the direct and inverse
    /// estimates hold. The diagnostic names the violated bound.
    pub fn check_admissible(&self) -> Admissibility {
        let s = self.alpha - self.mu / 2.0;
        let (lo, lo_strict, hi, hi_strict) = match self.p {
            Exponent::Finite(1.0) => (-0.5, true, 0.0, false),
            Exponent::Finite(p) => (-1.0 / (2.0 * p), true, 0.5 - 1.0 / (2.0 * p), true),
            Exponent::Infinity => (0.0, false, 0.5, true),
        };
        let below = if lo_strict { s <= lo } else { s < lo };
        let above = if hi_strict { s >= hi } else { s > hi };
        let window = format!(
            "{lo} {} alpha - mu/2 {} {hi}",
            if lo_strict { "<" } else { "<=" },
            if hi_strict { "<" } else { "<=" }
        );
        let (admissible, diagnostic) = if below {
            (
                false,
                format!(
                    "lower bound violated: alpha - mu/2 = {s} for p = {}, need {window}",
                    self.p
                ),
            )
        } else if above {
            (
                false,
                format!(
                    "upper bound violated: alpha - mu/2 = {s} for p = {}, need {window}",
                    self.p
                ),
            )
        } else {
            (
                true,
                format!(
                    "admissible: alpha - mu/2 = {s} for p = {}, {window}",
                    self.p
                ),
            )
        };
        Admissibility {
            admissible,
            diagnostic,
        }
    }
}

/// Resolution of the norm discretization.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormConfig {
    /// Gauss nodes per smooth panel for finite `p`.
    pub nodes: usize,
    /// Chebyshev grid size for the sup norm.
    pub sup_points: usize,
    /// Golden-section refinement around the largest grid values (sup norm only).
    pub refine: bool,
}

impl Default for NormConfig {
    fn default() -> Self {
        Self {
            nodes: 128,
            sup_points: 2049,
            refine: true,
        }
    }
}

impl NormConfig {
    /// The same configuration at half resolution, used for error estimates.
    pub fn halved(&self) -> Self {
        Self {
            nodes: (self.nodes / 2).max(8),
            sup_points: (self.sup_points / 2).max(65) | 1,
            refine: self.refine,
        }
    }
}

/// Points and weights discretizing `||.||_{p, alpha}`, split at breakpoints.
///
/// For finite `p` the pairs form a quadrature rule for `integral g (1 - x^2)^{alpha p}`;
/// for the sup norm they are grid points with the weight `(1 - x^2)^alpha`.
#[derive(Debug, Clone, PartialEq)]
pub struct NormGrid {
    p: Exponent,
    alpha: f64,
    points: Vec<f64>,
    weights: Vec<f64>,
    refine: bool,
}

impl NormGrid {
    pub fn new(p: Exponent, alpha: f64, breakpoints: &[f64], cfg: &NormConfig) -> Result<Self> {
        let mut bps: Vec<f64> = breakpoints
            .iter()
            .copied()
            .filter(|b| b.abs() < 1.0)
            .collect();
        bps.sort_by(|a, b| a.total_cmp(b));
        bps.dedup();
        let (points, weights) = match p {
            Exponent::Finite(pv) => finite_rule(alpha * pv, &bps, cfg.nodes)?,
            Exponent::Infinity => sup_grid(alpha, &bps, cfg.sup_points),
        };
        Ok(Self {
            p,
            alpha,
            points,
            weights,
            refine: cfg.refine,
        })
    }

    pub fn exponent(&self) -> Exponent {
        self.p
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// The discrete norm of `values[i]` taken at `points()[i]`, without refinement.
    pub fn norm_of_values(&self, values: &[f64]) -> Result<f64> {
        match self.p {
            Exponent::Finite(p) => {
                let mut acc = 0.0;
                for ((&x, &w), &v) in self.points.iter().zip(&self.weights).zip(values) {
                    if !v.is_finite() {
                        return Err(Error::NonFinite { x, value: v });
                    }
                    acc += w * abs_pow(v, p);
                }
                Ok(root(acc, p))
            }
            Exponent::Infinity => {
                let mut best = 0.0f64;
                for ((&x, &w), &v) in self.points.iter().zip(&self.weights).zip(values) {
                    if w == 0.0 {
                        continue;
                    }
                    if !v.is_finite() {
                        return Err(Error::NonFinite { x, value: v });
                    }
                    best = best.max(v.abs() * w);
                }
                Ok(best)
            }
        }
    }

    /// The norm of `f`; for the sup norm the largest grid values are refined
    /// by golden-section search between their neighbours.
    pub fn norm(&self, f: impl Fn(f64) -> f64) -> Result<f64> {
        self.try_norm(|x| Ok(f(x)))
    }

    /// As [`NormGrid::norm`] for a fallible `f`; the first error is returned.
    pub fn try_norm(&self, mut f: impl FnMut(f64) -> Result<f64>) -> Result<f64> {
        let values = self
            .points
            .iter()
            .map(|&x| f(x))
            .collect::<Result<Vec<f64>>>()?;
        let coarse = self.norm_of_values(&values)?;
        if !self.p.is_infinite() || !self.refine || coarse == 0.0 {
            return Ok(coarse);
        }
        self.refine_sup(&mut f, &values, coarse)
    }

    fn refine_sup(
        &self,
        f: &mut impl FnMut(f64) -> Result<f64>,
        values: &[f64],
        coarse: f64,
    ) -> Result<f64> {
        let g: Vec<f64> = values
            .iter()
            .zip(&self.weights)
            .map(|(v, w)| if *w == 0.0 { 0.0 } else { v.abs() * w })
            .collect();
        let n = g.len();
        let mut peaks: Vec<usize> = (0..n)
            .filter(|&i| {
                let left = if i > 0 { g[i - 1] } else { f64::NEG_INFINITY };
                let right = if i + 1 < n {
                    g[i + 1]
                } else {
                    f64::NEG_INFINITY
                };
                g[i] > 0.0 && g[i] >= left && g[i] >= right
            })
            .collect();
        peaks.sort_by(|&a, &b| g[b].total_cmp(&g[a]));
        peaks.truncate(4);
        let alpha = self.alpha;
        let mut failure = None;
        let mut weighted = |x: f64| match f(x) {
            Ok(v) => {
                let v = v.abs() * weight(alpha, x);
                if v.is_finite() {
                    v
                } else {
                    0.0
                }
            }
            Err(e) => {
                failure.get_or_insert(e);
                0.0
            }
        };
        let mut best = coarse;
        for i in peaks {
            let lo = self.points[i.saturating_sub(1)];
            let hi = self.points[(i + 1).min(n - 1)];
            let (_, v) = golden_max(&mut weighted, lo, hi, 1e-13 * (hi - lo).max(1e-300) + 1e-15);
            best = best.max(v);
        }
        match failure {
            Some(e) => Err(e),
            None => Ok(best),
        }
    }
}

/// `(1 - x^2)^alpha`, with the value `1` at `x = +-1` for `alpha = 0`.
pub fn weight(alpha: f64, x: f64) -> f64 {
    if alpha == 0.0 {
        return 1.0;
    }
    let s = (1.0 - x) * (1.0 + x);
    if s <= 0.0 {
        return if alpha > 0.0 { 0.0 } else { f64::INFINITY };
    }
    s.powf(alpha)
}

fn abs_pow(v: f64, p: f64) -> f64 {
    let a = v.abs();
    if a == 0.0 {
        0.0
    } else if p == 1.0 {
        a
    } else if p == 2.0 {
        a * a
    } else {
        (p * a.ln()).exp()
    }
}

fn root(acc: f64, p: f64) -> f64 {
    if p == 1.0 {
        acc
    } else if acc == 0.0 {
        0.0
    } else {
        (acc.ln() / p).exp()
    }
}

fn finite_rule(e: f64, bps: &[f64], nodes: usize) -> Result<(Vec<f64>, Vec<f64>)> {
    if e <= -1.0 {
        return Err(domain(format!(
            "weight exponent alpha*p = {e} must exceed -1 for integrability"
        )));
    }
    let nodes = nodes.max(2);
    if bps.is_empty() {
        let rule = gauss_jacobi(nodes, JacobiBasis::new(e, e)?)?;
        return Ok((rule.nodes().to_vec(), rule.weights().to_vec()));
    }
    let panels = bps.len() + 1;
    let per_panel = (2 * nodes / panels).clamp(16, nodes);
    let left = gauss_jacobi(per_panel, JacobiBasis::new(0.0, e)?)?;
    let right = gauss_jacobi(per_panel, JacobiBasis::new(e, 0.0)?)?;
    let inner = gauss_legendre(per_panel)?;
    let mut cuts = Vec::with_capacity(panels + 1);
    cuts.push(-1.0);
    cuts.extend_from_slice(bps);
    cuts.push(1.0);
    let (mut xs, mut ws) = (Vec::new(), Vec::new());
    for (k, w) in cuts.windows(2).enumerate() {
        let (lo, hi) = (w[0], w[1]);
        let h = 0.5 * (hi - lo);
        if k == 0 {
            let scale = h.powf(e + 1.0);
            for (s, ws_) in left.iter() {
                let x = lo + h * (1.0 + s);
                xs.push(x);
                ws.push(ws_ * scale * (1.0 - x).powf(e));
            }
        } else if k == panels - 1 {
            let scale = h.powf(e + 1.0);
            for (s, ws_) in right.iter() {
                let x = hi - h * (1.0 - s);
                xs.push(x);
                ws.push(ws_ * scale * (1.0 + x).powf(e));
            }
        } else {
            let mid = 0.5 * (lo + hi);
            for (s, ws_) in inner.iter() {
                let x = mid + h * s;
                xs.push(x);
                ws.push(ws_ * h * weight(e, x));
            }
        }
    }
    Ok((xs, ws))
}

fn sup_grid(alpha: f64, bps: &[f64], n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut pts = chebyshev_lobatto(n.max(3));
    pts.extend_from_slice(bps);
    pts.sort_by(|a, b| a.total_cmp(b));
    pts.dedup();
    if alpha < 0.0 {
        pts.retain(|x| x.abs() < 1.0);
    }
    let ws = pts.iter().map(|&x| weight(alpha, x)).collect();
    (pts, ws)
}

/// `||f||_{p, alpha} = ||f (1 - x^2)^alpha||_p`.
pub fn weighted_norm(f: &FunctionHandle, p: Exponent, alpha: f64, cfg: &NormConfig) -> Result<f64> {
    NormGrid::new(p, alpha, f.breakpoints(), cfg)?.norm(|x| f.eval(x))
}

/// The norm together with the change observed when the resolution is halved.
pub fn weighted_norm_estimate(
    f: &FunctionHandle,
    p: Exponent,
    alpha: f64,
    cfg: &NormConfig,
) -> Result<(f64, f64)> {
    let fine = weighted_norm(f, p, alpha, cfg)?;
    let coarse = weighted_norm(f, p, alpha, &cfg.halved())?;
    Ok((fine, (fine - coarse).abs()))
}

/// `||f - g||_{p, alpha}`.
pub fn weighted_distance(
    f: &FunctionHandle,
    g: &FunctionHandle,
    p: Exponent,
    alpha: f64,
    cfg: &NormConfig,
) -> Result<f64> {
    let mut bps = f.breakpoints().to_vec();
    bps.extend_from_slice(g.breakpoints());
    NormGrid::new(p, alpha, &bps, cfg)?.norm(|x| f.eval(x) - g.eval(x))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn space(p: Exponent, alpha: f64, mu: f64) -> SpaceParams {
        SpaceParams::new(p, alpha, mu).unwrap()
    }

    #[test]
    fn admissibility_window() {
        assert!(
            space(Exponent::Infinity, 0.5, 1.0)
                .check_admissible()
                .admissible
        );
        assert!(
            space(Exponent::Finite(1.0), 0.5, 1.0)
                .check_admissible()
                .admissible
        );
        let v = space(Exponent::Infinity, 0.6, 0.0).check_admissible();
        assert!(!v.admissible);
        assert!(v.diagnostic.contains("upper"));
        let v = space(Exponent::Finite(1.0), -0.5, 0.0).check_admissible();
        assert!(!v.admissible);
        assert!(v.diagnostic.contains("lower"));
        assert!(
            space(Exponent::Finite(2.0), 0.0, 0.0)
                .check_admissible()
                .admissible
        );
        assert!(
            !space(Exponent::Finite(2.0), 0.25, 0.0)
                .check_admissible()
                .admissible
        );
    }

    #[test]
    fn parses_exponents() {
        assert_eq!("inf".parse::<Exponent>().unwrap(), Exponent::Infinity);
        assert_eq!("1.5".parse::<Exponent>().unwrap(), Exponent::Finite(1.5));
        assert!("0.5".parse::<Exponent>().is_err());
        assert!("x".parse::<Exponent>().is_err());
    }

    #[test]
    fn norm_examples() {
        let cfg = NormConfig::default();
        let one = FunctionHandle::constant(1.0);
        let id = FunctionHandle::identity();
        assert_relative_eq!(
            weighted_norm(&one, Exponent::Infinity, 0.0, &cfg).unwrap(),
            1.0
        );
        assert_relative_eq!(
            weighted_norm(&id, Exponent::Infinity, 0.5, &cfg).unwrap(),
            0.5,
            epsilon = 1e-14
        );
        assert_relative_eq!(
            weighted_norm(&one, Exponent::Finite(1.0), 0.5, &cfg).unwrap(),
            core::f64::consts::FRAC_PI_2,
            epsilon = 1e-13
        );
    }

    #[test]
    fn distance_examples() {
        let cfg = NormConfig::default();
        let id = FunctionHandle::identity();
        assert_eq!(
            weighted_distance(&id, &id, Exponent::Finite(1.5), 0.2, &cfg).unwrap(),
            0.0
        );
        let zero = FunctionHandle::constant(0.0);
        assert_relative_eq!(
            weighted_distance(&id, &zero, Exponent::Infinity, 0.5, &cfg).unwrap(),
            0.5,
            epsilon = 1e-14
        );
        let sq = FunctionHandle::from_fn("sq", |x| x * x);
        let half = FunctionHandle::constant(0.5);
        assert_relative_eq!(
            weighted_distance(&sq, &half, Exponent::Infinity, 0.0, &cfg).unwrap(),
            0.5,
            epsilon = 1e-14
        );
    }

    #[test]
    fn breakpoint_panels_integrate_kinks() {
        let cfg = NormConfig::default();
        let abs = FunctionHandle::from_fn("abs", f64::abs).with_breakpoints(alloc::vec![0.0]);
        // integral of |x| (1 - x^2)^{1/2} over [-1, 1] is 2/3
        let v = weighted_norm(&abs, Exponent::Finite(1.0), 0.5, &cfg).unwrap();
        assert_relative_eq!(v, 2.0 / 3.0, epsilon = 1e-13);
        // integral of x^2 over [-1, 1] is 2/3, so the L2 norm is sqrt(2/3)
        let v = weighted_norm(&abs, Exponent::Finite(2.0), 0.0, &cfg).unwrap();
        assert_relative_eq!(v, (2.0f64 / 3.0).sqrt(), epsilon = 1e-13);
    }

    #[test]
    fn rejects_nonintegrable_weight_and_nonfinite_values() {
        let cfg = NormConfig::default();
        let one = FunctionHandle::constant(1.0);
        assert!(matches!(
            weighted_norm(&one, Exponent::Finite(2.0), -0.6, &cfg),
            Err(Error::Domain(_))
        ));
        let bad = FunctionHandle::from_fn("bad", |x| if x > 0.5 { f64::NAN } else { 1.0 });
        assert!(matches!(
            weighted_norm(&bad, Exponent::Infinity, 0.0, &cfg),
            Err(Error::NonFinite { .. })
        ));
    }

    #[test]
    fn sup_norm_matches_dense_brute_force() {
        let cfg = NormConfig::default();
        let basis = JacobiBasis::symmetric(1.0).unwrap();
        let poly = crate::jacobi::PolynomialCoeffs::new(
            basis,
            alloc::vec![0.3, -1.1, 0.7, 0.25, -0.4, 0.9],
        );
        let f = FunctionHandle::polynomial(poly);
        for &alpha in &[0.0, 0.25, 0.5, 1.0] {
            let norm = weighted_norm(&f, Exponent::Infinity, alpha, &cfg).unwrap();
            let n = 100_000;
            let brute = (0..=n)
                .map(|i| {
                    let x = -1.0 + 2.0 * i as f64 / n as f64;
                    f.eval(x).abs() * weight(alpha, x)
                })
                .fold(0.0f64, f64::max);
            assert!(norm >= brute - 1e-12);
            assert!(
                (norm - brute).abs() <= 1e-8,
                "alpha={alpha}: {norm} vs {brute}"
            );
        }
    }

    #[test]
    fn halving_resolution_changes_little() {
        let cfg = NormConfig::default();
        let runge = FunctionHandle::from_fn("runge", |x| 1.0 / (1.0 + 25.0 * x * x));
        for p in [
            Exponent::Finite(1.0),
            Exponent::Finite(3.0),
            Exponent::Infinity,
        ] {
            let (v, err) = weighted_norm_estimate(&runge, p, 0.3, &cfg).unwrap();
            assert!(err <= 1e-8 * v, "{p}: {v} +- {err}");
        }
    }

    fn coeffs() -> impl Strategy<Value = Vec<f64>> {
        proptest::collection::vec(-2.0f64..2.0, 1..8)
    }

    fn exponent() -> impl Strategy<Value = Exponent> {
        prop_oneof![
            Just(Exponent::Infinity),
            (1.0f64..4.0).prop_map(Exponent::Finite)
        ]
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn triangle_inequality(a in coeffs(), b in coeffs(), p in exponent(), alpha in 0.0f64..1.0) {
            let basis = JacobiBasis::symmetric(1.0).unwrap();
            let fa = crate::jacobi::PolynomialCoeffs::new(basis, a.clone());
            let fb = crate::jacobi::PolynomialCoeffs::new(basis, b.clone());
            let f = FunctionHandle::polynomial(fa);
            let g = FunctionHandle::polynomial(fb);
            let zero = FunctionHandle::constant(0.0);
            let cfg = NormConfig::default();
            let sum = FunctionHandle::from_fn("sum", {
                let (f, g) = (f.clone(), g.clone());
                move |x| f.eval(x) + g.eval(x)
            });
            let nf = weighted_norm(&f, p, alpha, &cfg).unwrap();
            let ng = weighted_norm(&g, p, alpha, &cfg).unwrap();
            let ns = weighted_norm(&sum, p, alpha, &cfg).unwrap();
            prop_assert!(ns <= nf + ng + 1e-9);
            let nd = weighted_distance(&f, &zero, p, alpha, &cfg).unwrap();
            prop_assert!((nd - nf).abs() <= 1e-12 * nf.max(1.0));
        }

        #[test]
        fn homogeneity(a in coeffs(), c in -5.0f64..5.0, p in exponent(), alpha in 0.0f64..1.0) {
            let basis = JacobiBasis::symmetric(0.5).unwrap();
            let f = FunctionHandle::polynomial(crate::jacobi::PolynomialCoeffs::new(basis, a));
            let cfg = NormConfig::default();
            let nf = weighted_norm(&f, p, alpha, &cfg).unwrap();
            let ncf = weighted_norm(&f.scaled(c), p, alpha, &cfg).unwrap();
            prop_assert!((ncf - c.abs() * nf).abs() <= 1e-12 * (c.abs() * nf).max(1e-300));
        }
    }
}
