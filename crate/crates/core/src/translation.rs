//! Generalized translation on `[-1, 1]`: the asymmetric operator `tau_t`,
//! built from the spherical-triangle relations between `(x, t, phi1)` and
//! `(R, phi)`, and the symmetric operator `T_y`.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use core::cell::OnceCell;
use core::f64::consts::PI;
#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{contract, domain, Error, Result};
use crate::function::FunctionHandle;
use crate::jacobi::{JacobiBasis, PolynomialCoeffs};
use crate::quadrature::{gauss_jacobi, gauss_legendre, QuadratureRule};
use crate::weighted::{NormConfig, NormGrid, SpaceParams};

/// Points closer to `+-1` than this are moved inward before the asymmetric
/// operator is applied; the value there is a continuous limit.
pub const ENDPOINT_CLIP: f64 = 1e-9;

const CLAMP_SLACK: f64 = 1e-14;

/// The coordinates tied together by one evaluation of the translation kernel.
///
/// `x = cos(theta1)`, `R = cos(theta)`; `u` and `v` are `sin(theta) cos(phi)`
/// and `sin(theta) sin(phi)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GeodesicFrame {
    pub x: f64,
    pub t: f64,
    pub phi1: f64,
    pub r: f64,
    pub phi: f64,
    pub u: f64,
    pub v: f64,
}

impl GeodesicFrame {
    /// Residuals of the defining relations, largest first entry last:
    /// the product formula for `R`, the two polar components of `(u, v)` and
    /// `u^2 + v^2 = 1 - R^2`.
    pub fn residuals(&self) -> [f64; 4] {
        let s1 = (1.0 - self.x * self.x).max(0.0).sqrt();
        let (st, ct) = self.t.sin_cos();
        let sin_theta = (1.0 - self.r * self.r).max(0.0).sqrt();
        [
            self.r - (self.x * ct - self.phi1.cos() * s1 * st),
            sin_theta * self.phi.cos() - self.u,
            sin_theta * self.phi.sin() - self.v,
            self.u * self.u + self.v * self.v - (1.0 - self.r * self.r),
        ]
    }

    pub fn max_residual(&self) -> f64 {
        self.residuals().iter().fold(0.0f64, |m, r| m.max(r.abs()))
    }
}

/// Solves the triangle for `R` and `phi`; `phi = 0` when `sin(theta) = 0`.
pub fn geodesic_frame(x: f64, t: f64, phi1: f64) -> GeodesicFrame {
    let x = clamp_unit(x);
    let s1 = (1.0 - x * x).max(0.0).sqrt();
    let (st, ct) = t.sin_cos();
    let (sp, cp) = phi1.sin_cos();
    let r = clamp_unit(x * ct - cp * s1 * st);
    let u = x * st + s1 * ct * cp;
    let v = s1 * sp;
    let phi = if u == 0.0 && v == 0.0 {
        0.0
    } else {
        v.atan2(u)
    };
    GeodesicFrame {
        x,
        t,
        phi1,
        r,
        phi,
        u,
        v,
    }
}

fn clamp_unit(x: f64) -> f64 {
    if x > 1.0 && x <= 1.0 + CLAMP_SLACK {
        1.0
    } else if (-1.0 - CLAMP_SLACK..-1.0).contains(&x) {
        -1.0
    } else {
        x.clamp(-1.0, 1.0)
    }
}

/// Argument of the cosine kernel. `Difference` is the operator proper;
/// `Sum` is a deliberately wrong variant kept as a negative control.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KernelForm {
    Difference,
    Sum,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TranslationConfig {
    /// Initial node count per panel.
    pub nodes: usize,
    /// Relative change between successive doublings accepted as converged.
    pub tolerance: f64,
    pub max_doublings: usize,
    pub kernel: KernelForm,
}

impl Default for TranslationConfig {
    fn default() -> Self {
        Self {
            nodes: 32,
            tolerance: 1e-12,
            max_doublings: 6,
            kernel: KernelForm::Difference,
        }
    }
}

impl TranslationConfig {
    pub fn validate(&self) -> Result<()> {
        if self.nodes < 8 {
            return Err(domain(format!(
                "translation needs at least 8 nodes, got {}",
                self.nodes
            )));
        }
        if !(self.tolerance > 0.0) {
            return Err(domain(format!(
                "tolerance {} must be positive",
                self.tolerance
            )));
        }
        Ok(())
    }
}

/// Repeats `estimate(level)` for `level = 0, 1, ...` until two successive
/// values agree to `tol` relative to `max(1, |value|)`, or to the roundoff
/// floor set by the magnitude (integral of the absolute integrand) that
/// `estimate` returns alongside the value.
fn refine(
    max_doublings: usize,
    tol: f64,
    mut estimate: impl FnMut(usize) -> Result<(f64, f64)>,
) -> Result<f64> {
    let (mut prev, _) = estimate(0)?;
    for level in 1..=max_doublings {
        let (cur, magnitude) = estimate(level)?;
        let floor = 64.0 * f64::EPSILON * magnitude;
        if (cur - prev).abs() <= tol * cur.abs().max(1.0) + floor {
            return Ok(cur);
        }
        if level == max_doublings {
            return Err(Error::NotConverged {
                refinements: max_doublings,
                previous: prev,
                last: cur,
            });
        }
        prev = cur;
    }
    Ok(prev)
}

fn finite(x: f64, value: f64) -> Result<f64> {
    if value.is_finite() {
        Ok(value)
    } else {
        Err(Error::NonFinite { x, value })
    }
}

/// The asymmetric operator
/// `tau_t(f, x) = 1 / (pi (1-x^2)^{mu/2} cos^{2mu}(t/2)) * integral_0^pi (1-R^2)^{mu/2} f(R) cos(mu (phi1 - phi)) dphi1`
/// for a fixed `mu`, with cached quadrature rules.
#[derive(Debug)]
pub struct AsymTranslator {
    mu: f64,
    cfg: TranslationConfig,
    legendre: Vec<OnceCell<QuadratureRule>>,
}

impl AsymTranslator {
    pub fn new(mu: f64, cfg: TranslationConfig) -> Result<Self> {
        cfg.validate()?;
        if !(mu.is_finite() && mu >= 0.0) {
            return Err(domain(format!("mu = {mu} must be finite and >= 0")));
        }
        Ok(Self {
            mu,
            cfg,
            legendre: (0..=cfg.max_doublings).map(|_| OnceCell::new()).collect(),
        })
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    pub fn config(&self) -> &TranslationConfig {
        &self.cfg
    }

    fn legendre(&self, level: usize) -> Result<&QuadratureRule> {
        let cell = &self.legendre[level];
        if let Some(rule) = cell.get() {
            return Ok(rule);
        }
        let rule = gauss_legendre(self.cfg.nodes << level)?;
        Ok(cell.get_or_init(|| rule))
    }

    pub fn eval(&self, f: &FunctionHandle, t: f64, x: f64) -> Result<f64> {
        self.eval_fn(|r| f.eval(r), f.breakpoints(), t, x)
    }

    /// `tau_t` of an arbitrary closure; `breakpoints` are points of
    /// non-smoothness of `f` where the `phi1` range is split.
    pub fn eval_fn(
        &self,
        f: impl Fn(f64) -> f64,
        breakpoints: &[f64],
        t: f64,
        x: f64,
    ) -> Result<f64> {
        if !(t.abs() < PI) {
            return Err(domain(format!("|t| = {} must be below pi", t.abs())));
        }
        if !(x.abs() <= 1.0 + CLAMP_SLACK) {
            return Err(domain(format!("x = {x} outside [-1, 1]")));
        }
        let x = clamp_unit(x).clamp(-1.0 + ENDPOINT_CLIP, 1.0 - ENDPOINT_CLIP);
        let mu = self.mu;
        let s1 = ((1.0 - x) * (1.0 + x)).sqrt();
        let (st, ct) = t.sin_cos();
        let half_cos = (0.5 * t).cos();
        // 1 / cos^{2 mu}(t / 2), via logarithms where the power would underflow
        let inv_prefactor = if mu == 0.0 {
            1.0
        } else if half_cos < 1e-6 {
            (-2.0 * mu * half_cos.ln()).exp()
        } else {
            half_cos.powf(-2.0 * mu)
        };
        let sign = match self.cfg.kernel {
            KernelForm::Difference => -1.0,
            KernelForm::Sum => 1.0,
        };
        let int_mu = if mu.fract() == 0.0 && mu <= 64.0 {
            Some(mu as u32)
        } else {
            None
        };
        let integrand = |phi1: f64| -> Result<f64> {
            let (sp, cp) = phi1.sin_cos();
            let r = clamp_unit(x * ct - cp * s1 * st);
            let u = x * st + s1 * ct * cp;
            let v = s1 * sp;
            let fr = f(r);
            if !fr.is_finite() {
                return Err(Error::NonFinite { x: r, value: fr });
            }
            if mu == 0.0 {
                return Ok(fr);
            }
            if let Some(k) = int_mu {
                // Re[((u + i sign v) / s1 * e^{i phi1})^k] without angles
                let (a, b) = (u / s1, sign * v / s1);
                let (wr, wi) = (a * cp - b * sp, a * sp + b * cp);
                let (mut pr, mut pi) = (wr, wi);
                for _ in 1..k {
                    let next = pr * wr - pi * wi;
                    pi = pr * wi + pi * wr;
                    pr = next;
                }
                return Ok(pr * fr);
            }
            let rho = u.hypot(v);
            if rho == 0.0 {
                return Ok(0.0);
            }
            let phi = v.atan2(u);
            Ok((rho / s1).powf(mu) * (mu * (phi1 + sign * phi)).cos() * fr)
        };

        let mut cuts = vec![0.0];
        let denom = s1 * st;
        if denom.abs() > 0.0 {
            for &b in breakpoints {
                let c = (x * ct - b) / denom;
                if c.abs() < 1.0 {
                    cuts.push(c.acos());
                }
            }
        }
        cuts.push(PI);
        cuts.sort_by(|a, b| a.total_cmp(b));
        cuts.dedup();

        // for non-integer mu the kernel has algebraic singularities where
        // (u, v) = 0, which can only happen at the ends of the phi1 range
        let graded = mu.fract() != 0.0;
        let integral = if cuts.len() == 2 && !graded {
            // smooth periodic integrand: the midpoint rule in phi1 is the
            // Gauss-Chebyshev rule in z = cos(phi1)
            refine(self.cfg.max_doublings, self.cfg.tolerance, |level| {
                let m = self.cfg.nodes << level;
                let h = PI / m as f64;
                let (mut acc, mut mag) = (0.0, 0.0);
                for k in 0..m {
                    let v = integrand((k as f64 + 0.5) * h)?;
                    acc += v;
                    mag += v.abs();
                }
                Ok((acc / m as f64, mag / m as f64))
            })?
        } else {
            refine(self.cfg.max_doublings, self.cfg.tolerance, |level| {
                let rule = self.legendre(level)?;
                let (mut acc, mut mag) = (0.0, 0.0);
                for w in cuts.windows(2) {
                    let (lo, hi) = (w[0], w[1]);
                    if hi <= lo {
                        continue;
                    }
                    let half = 0.5 * (hi - lo);
                    let mid = 0.5 * (hi + lo);
                    let mut panel = 0.0;
                    if graded {
                        // smoothstep substitution, flat to second order at both ends
                        let len = hi - lo;
                        for (s, ws) in rule.iter() {
                            let tau = 0.5 * (s + 1.0);
                            let step = tau * tau * tau * (10.0 + tau * (-15.0 + 6.0 * tau));
                            let jac = 30.0 * tau * tau * (1.0 - tau) * (1.0 - tau);
                            let v = 0.5 * ws * jac * len * integrand(lo + len * step)?;
                            panel += v;
                            mag += v.abs();
                        }
                    } else {
                        for (s, ws) in rule.iter() {
                            let v = half * ws * integrand(mid + half * s)?;
                            panel += v;
                            mag += v.abs();
                        }
                    }
                    acc += panel;
                }
                Ok((acc / PI, mag / PI))
            })?
        };
        finite(x, integral * inv_prefactor)
    }
}

/// `tau_t(f, x)` for a single evaluation; see [`AsymTranslator`].
pub fn asym_translate(
    f: &FunctionHandle,
    t: f64,
    mu: f64,
    x: f64,
    cfg: &TranslationConfig,
) -> Result<f64> {
    AsymTranslator::new(mu, *cfg)?.eval(f, t, x)
}

/// `sum_k c_k R_k(x) R_k^{(0, 2mu)}(cos t)` for an expansion in the `(mu, mu)` basis.
///
/// For integer `mu` this coincides with `tau_t` of the polynomial, which the
/// identity checks confirm; it is the fast path for polynomial inputs.
pub fn spectral_translate(poly: &PolynomialCoeffs, t: f64, x: f64) -> Result<f64> {
    let basis = poly.basis();
    if basis.a() != basis.b() {
        return Err(contract(
            "spectral translation needs a symmetric (mu, mu) basis",
        ));
    }
    let shift = JacobiBasis::new(0.0, 2.0 * basis.a())?;
    let n = poly.coeffs().len();
    let mut rx = vec![0.0; n];
    let mut ry = vec![0.0; n];
    basis.eval_all(x, &mut rx);
    shift.eval_all(t.cos(), &mut ry);
    Ok(poly
        .coeffs()
        .iter()
        .zip(rx.iter().zip(&ry))
        .map(|(c, (a, b))| c * a * b)
        .sum())
}

/// The symmetric operator
/// `T_y(f, x) = (1 / gamma) integral_{-1}^1 (1-z^2)^{mu-1/2} f(x y - z sqrt(1-x^2) sqrt(1-y^2)) dz`,
/// with `gamma` the integral of the weight alone.
#[derive(Debug)]
pub struct SymTranslator {
    mu: f64,
    cfg: TranslationConfig,
    jacobi: Vec<OnceCell<QuadratureRule>>,
    legendre: Vec<OnceCell<QuadratureRule>>,
}

impl SymTranslator {
    pub fn new(mu: f64, cfg: TranslationConfig) -> Result<Self> {
        cfg.validate()?;
        if !(mu.is_finite() && mu >= 0.0) {
            return Err(domain(format!("mu = {mu} must be finite and >= 0")));
        }
        let levels = cfg.max_doublings + 1;
        Ok(Self {
            mu,
            cfg,
            jacobi: (0..levels).map(|_| OnceCell::new()).collect(),
            legendre: (0..levels).map(|_| OnceCell::new()).collect(),
        })
    }

    fn jacobi(&self, level: usize) -> Result<&QuadratureRule> {
        let cell = &self.jacobi[level];
        if let Some(rule) = cell.get() {
            return Ok(rule);
        }
        let basis = JacobiBasis::symmetric(self.mu - 0.5)?;
        let rule = gauss_jacobi(self.cfg.nodes << level, basis)?;
        Ok(cell.get_or_init(|| rule))
    }

    fn legendre(&self, level: usize) -> Result<&QuadratureRule> {
        let cell = &self.legendre[level];
        if let Some(rule) = cell.get() {
            return Ok(rule);
        }
        let rule = gauss_legendre(self.cfg.nodes << level)?;
        Ok(cell.get_or_init(|| rule))
    }

    pub fn eval(&self, f: &FunctionHandle, y: f64, x: f64) -> Result<f64> {
        self.eval_fn(|r| f.eval(r), f.breakpoints(), y, x)
    }

    pub fn eval_fn(
        &self,
        f: impl Fn(f64) -> f64,
        breakpoints: &[f64],
        y: f64,
        x: f64,
    ) -> Result<f64> {
        if !(x.abs() <= 1.0 + CLAMP_SLACK && y.abs() <= 1.0 + CLAMP_SLACK) {
            return Err(domain(format!("(x, y) = ({x}, {y}) outside [-1, 1]^2")));
        }
        let (x, y) = (clamp_unit(x), clamp_unit(y));
        let xy = x * y;
        let s = ((1.0 - x * x) * (1.0 - y * y)).max(0.0).sqrt();
        let at = |z: f64| -> Result<f64> {
            let r = clamp_unit(xy - z * s);
            let v = f(r);
            if v.is_finite() {
                Ok(v)
            } else {
                Err(Error::NonFinite { x: r, value: v })
            }
        };
        let mut cuts = vec![0.0];
        if s > 0.0 {
            for &b in breakpoints {
                let z = (xy - b) / s;
                if z.abs() < 1.0 {
                    cuts.push(z.acos());
                }
            }
        }
        cuts.push(PI);
        cuts.sort_by(|a, b| a.total_cmp(b));
        cuts.dedup();

        let value = if cuts.len() == 2 {
            refine(self.cfg.max_doublings, self.cfg.tolerance, |level| {
                let rule = self.jacobi(level)?;
                let mut acc = 0.0;
                let mut mass = 0.0;
                let mut mag = 0.0;
                for (z, w) in rule.iter() {
                    let v = w * at(z)?;
                    acc += v;
                    mag += v.abs();
                    mass += w;
                }
                Ok((acc / mass, mag / mass))
            })?
        } else {
            // z = cos(psi): the weight becomes sin^{2 mu}(psi) dpsi
            let two_mu = 2.0 * self.mu;
            refine(self.cfg.max_doublings, self.cfg.tolerance, |level| {
                let rule = self.legendre(level)?;
                let mut acc = 0.0;
                let mut mag = 0.0;
                let mut mass = 0.0;
                for w in cuts.windows(2) {
                    let (lo, hi) = (w[0], w[1]);
                    if hi <= lo {
                        continue;
                    }
                    let half = 0.5 * (hi - lo);
                    let mid = 0.5 * (hi + lo);
                    for (sv, ws) in rule.iter() {
                        let psi = mid + half * sv;
                        let wt = half * ws * psi.sin().powf(two_mu);
                        let v = wt * at(psi.cos())?;
                        acc += v;
                        mag += v.abs();
                        mass += wt;
                    }
                }
                Ok((acc / mass, mag / mass))
            })?
        };
        finite(x, value)
    }
}

/// `T_y(f, x)` for a single evaluation; see [`SymTranslator`].
pub fn sym_translate(
    f: &FunctionHandle,
    y: f64,
    mu: f64,
    x: f64,
    cfg: &TranslationConfig,
) -> Result<f64> {
    SymTranslator::new(mu, *cfg)?.eval(f, y, x)
}

/// `||tau_t f|| cos^{2mu}(t/2) / ||f||` together with both norms.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormBound {
    pub t: f64,
    pub ratio: f64,
    pub translated_norm: f64,
    pub norm: f64,
}

pub fn translate_norm_bound_check(
    f: &FunctionHandle,
    t: f64,
    space: &SpaceParams,
    cfg: &TranslationConfig,
    norm_cfg: &NormConfig,
) -> Result<NormBound> {
    let grid = NormGrid::new(space.p, space.alpha, f.breakpoints(), norm_cfg)?;
    let norm = grid.norm(|x| f.eval(x))?;
    if norm == 0.0 {
        return Err(contract(
            "norm bound ratio needs a function of nonzero norm",
        ));
    }
    let op = AsymTranslator::new(space.mu, *cfg)?;
    let translated_norm = grid.try_norm(|x| op.eval(f, t, x))?;
    let ratio = translated_norm * (0.5 * t).cos().powf(2.0 * space.mu) / norm;
    Ok(NormBound {
        t,
        ratio,
        translated_norm,
        norm,
    })
}

/// Both sides of the duality relation
/// `integral f tau_t(g) w = integral g tau_t(f) w`, `w = (1-x^2)^mu`, with `y = cos t`.
pub fn duality_check(
    f: &FunctionHandle,
    g: &FunctionHandle,
    y: f64,
    mu: f64,
    cfg: &TranslationConfig,
    nodes: usize,
) -> Result<(f64, f64)> {
    if !(y.abs() < 1.0) && y != 1.0 {
        return Err(domain(format!("y = {y} must lie in (-1, 1]")));
    }
    let t = y.clamp(-1.0, 1.0).acos();
    let op = AsymTranslator::new(mu, *cfg)?;
    let rule = gauss_jacobi(nodes.max(2), JacobiBasis::symmetric(mu)?)?;
    let left = rule.try_integrate(|x| Ok(f.eval(x) * op.eval(g, t, x)?))?;
    let right = rule.try_integrate(|x| Ok(g.eval(x) * op.eval(f, t, x)?))?;
    Ok((left, right))
}

/// Result of the startup check `tau_t(1, x) = 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SelfTest {
    pub mu: f64,
    pub max_deviation: f64,
    pub tolerance: f64,
    pub passed: bool,
}

/// Checks `tau_t(1, x) = 1` on a small `(x, t)` grid.
pub fn self_test(mu: f64, cfg: &TranslationConfig) -> Result<SelfTest> {
    const TOL: f64 = 1e-10;
    let op = AsymTranslator::new(mu, *cfg)?;
    let one = FunctionHandle::constant(1.0);
    let mut worst = 0.0f64;
    for &x in &[-0.8, -0.35, 0.1, 0.55, 0.9] {
        for &t in &[0.3, 1.1, 2.0, 2.6] {
            worst = worst.max((op.eval(&one, t, x)? - 1.0).abs());
        }
    }
    Ok(SelfTest {
        mu,
        max_deviation: worst,
        tolerance: TOL,
        passed: worst <= TOL,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn cfg() -> TranslationConfig {
        TranslationConfig::default()
    }

    #[test]
    fn frame_examples() {
        let f = geodesic_frame(0.3, 0.0, 1.2);
        assert_relative_eq!(f.r, 0.3, epsilon = 1e-15);
        assert_relative_eq!(f.phi, 1.2, epsilon = 1e-15);
        let f = geodesic_frame(1.0, 0.7, 2.0);
        assert_relative_eq!(f.r, 0.7f64.cos(), epsilon = 1e-15);
        assert_eq!(f.phi, 0.0);
        let f = geodesic_frame(-0.4, 1.3, core::f64::consts::FRAC_PI_2);
        assert_relative_eq!(f.r, -0.4 * 1.3f64.cos(), epsilon = 1e-15);
    }

    #[test]
    fn frame_clamps_roundoff() {
        let f = geodesic_frame(1.0 + 1e-15, 0.2, 0.4);
        assert_eq!(f.x, 1.0);
    }

    proptest! {
        #[test]
        fn frame_residuals_vanish(x in -1.0f64..=1.0, t in -3.1f64..3.1, phi1 in 0.0f64..=PI) {
            let f = geodesic_frame(x, t, phi1);
            prop_assert!(f.max_residual() <= 1e-12, "{:?}", f.residuals());
            prop_assert!((0.0..=PI).contains(&f.phi));
        }

        #[test]
        fn asym_is_even_in_t(x in -0.95f64..0.95, t in 0.05f64..2.8) {
            let op = AsymTranslator::new(1.0, cfg()).unwrap();
            let f = FunctionHandle::from_fn("runge", |x| 1.0 / (1.0 + 25.0 * x * x));
            let a = op.eval(&f, t, x).unwrap();
            let b = op.eval(&f, -t, x).unwrap();
            prop_assert!((a - b).abs() <= 1e-12 * a.abs().max(1.0));
        }
    }

    #[test]
    fn asym_preserves_constants_for_integer_mu() {
        let one = FunctionHandle::constant(1.0);
        for mu in [0.0, 1.0, 2.0, 3.0] {
            for &x in &[-0.9, -0.3, 0.0, 0.45, 0.99] {
                for &t in &[0.0, 0.4, 1.5, 2.7, -2.0] {
                    let v = asym_translate(&one, t, mu, x, &cfg()).unwrap();
                    assert!((v - 1.0).abs() < 1e-10, "mu={mu} x={x} t={t}: {v}");
                }
            }
        }
    }

    #[test]
    fn asym_identity_closed_form() {
        let id = FunctionHandle::identity();
        for &x in &[-0.8, -0.1, 0.33, 0.7] {
            for &t in &[0.2, 1.0, 2.2] {
                let v = asym_translate(&id, t, 1.0, x, &cfg()).unwrap();
                assert_relative_eq!(v, x * (2.0 * t.cos() - 1.0), epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn asym_eigenfunctions() {
        for mu in [1.0, 2.0] {
            let basis = JacobiBasis::symmetric(mu).unwrap();
            let shift = JacobiBasis::new(0.0, 2.0 * mu).unwrap();
            for n in [2usize, 5, 9] {
                let f = FunctionHandle::polynomial(PolynomialCoeffs::basis_element(basis, n));
                for &x in &[-0.6, 0.25, 0.8] {
                    for &t in &[0.5, 1.7] {
                        let v = asym_translate(&f, t, mu, x, &cfg()).unwrap();
                        let want = basis.eval(n, x) * shift.eval(n, t.cos());
                        assert!((v - want).abs() < 1e-10, "mu={mu} n={n}: {v} vs {want}");
                    }
                }
            }
        }
    }

    #[test]
    fn spectral_matches_integral_for_integer_mu() {
        let basis = JacobiBasis::symmetric(2.0).unwrap();
        let poly = PolynomialCoeffs::new(basis, vec![0.2, -0.5, 1.0, 0.3, -0.7]);
        let f = FunctionHandle::polynomial(poly.clone());
        for &(x, t) in &[(0.1, 0.3), (-0.7, 2.0), (0.5, 1.0)] {
            let a = asym_translate(&f, t, 2.0, x, &cfg()).unwrap();
            let b = spectral_translate(&poly, t, x).unwrap();
            assert!((a - b).abs() < 1e-11);
        }
    }

    #[test]
    fn asym_at_zero_shift_is_identity() {
        let f = FunctionHandle::from_fn("abs", f64::abs).with_breakpoints(vec![0.0]);
        for &x in &[-0.9, -0.2, 0.0, 0.6] {
            let v = asym_translate(&f, 0.0, 1.5, x, &cfg()).unwrap();
            assert!((v - x.abs()).abs() < 1e-12);
        }
    }

    #[test]
    fn asym_breakpoint_panels_converge() {
        let f = FunctionHandle::from_fn("abs", f64::abs).with_breakpoints(vec![0.0]);
        let op = AsymTranslator::new(1.0, cfg()).unwrap();
        let v = op.eval(&f, 1.0, 0.3).unwrap();
        // same value by brute-force midpoint sums with many nodes
        let m = 400_000;
        let s1 = (1.0f64 - 0.09).sqrt();
        let mut acc = 0.0;
        for k in 0..m {
            let p1 = (k as f64 + 0.5) * PI / m as f64;
            let fr = geodesic_frame(0.3, 1.0, p1);
            let rho = fr.u.hypot(fr.v);
            acc += rho / s1 * (p1 - fr.phi).cos() * fr.r.abs();
        }
        let brute = acc / m as f64 / (0.5f64).cos().powi(2);
        assert!((v - brute).abs() < 1e-8, "{v} vs {brute}");
    }

    #[test]
    fn wrong_kernel_breaks_constants() {
        let bad = TranslationConfig {
            kernel: KernelForm::Sum,
            ..cfg()
        };
        let st = self_test(1.0, &bad).unwrap();
        assert!(!st.passed);
        assert!(self_test(1.0, &cfg()).unwrap().passed);
    }

    #[test]
    fn rejects_bad_arguments() {
        let one = FunctionHandle::constant(1.0);
        assert!(asym_translate(&one, PI, 1.0, 0.0, &cfg()).is_err());
        assert!(asym_translate(&one, 0.1, 1.0, 1.5, &cfg()).is_err());
        assert!(asym_translate(&one, 0.1, -1.0, 0.0, &cfg()).is_err());
        let small = TranslationConfig { nodes: 4, ..cfg() };
        assert!(asym_translate(&one, 0.1, 1.0, 0.0, &small).is_err());
    }

    #[test]
    fn non_convergence_reports_iterates() {
        let wild = FunctionHandle::from_fn("wild", |x| (400.0 * x).sin());
        let tight = TranslationConfig {
            nodes: 8,
            max_doublings: 1,
            ..cfg()
        };
        match asym_translate(&wild, 1.0, 1.0, 0.2, &tight) {
            Err(Error::NotConverged {
                refinements,
                previous,
                last,
            }) => {
                assert_eq!(refinements, 1);
                assert!(previous != last);
            }
            other => panic!("expected non-convergence, got {other:?}"),
        }
    }

    #[test]
    fn sym_examples() {
        let one = FunctionHandle::constant(1.0);
        for mu in [0.0, 0.5, 1.0, 2.5] {
            assert_relative_eq!(
                sym_translate(&one, 0.3, mu, -0.4, &cfg()).unwrap(),
                1.0,
                epsilon = 1e-14
            );
        }
        let runge = FunctionHandle::from_fn("runge", |x| 1.0 / (1.0 + 25.0 * x * x));
        assert_relative_eq!(
            sym_translate(&runge, 1.0, 1.0, 0.37, &cfg()).unwrap(),
            runge.eval(0.37),
            epsilon = 1e-14
        );
    }

    #[test]
    fn sym_eigenfunctions() {
        for mu in [0.0, 0.5, 1.0, 2.0] {
            let basis = JacobiBasis::symmetric(mu).unwrap();
            for n in 0..=10 {
                let f = FunctionHandle::polynomial(PolynomialCoeffs::basis_element(basis, n));
                for &(x, y) in &[(0.2, 0.7), (-0.5, 0.1), (0.9, -0.6)] {
                    let v = sym_translate(&f, y, mu, x, &cfg()).unwrap();
                    let want = basis.eval(n, x) * basis.eval(n, y);
                    assert!((v - want).abs() < 1e-12, "mu={mu} n={n}: {v} vs {want}");
                }
            }
        }
    }

    #[test]
    fn sym_breakpoints_agree_with_smooth_rule() {
        // the panel rule must give the same answer as the Jacobi rule on a smooth f
        let f = FunctionHandle::from_fn("cos", |x| (3.0 * x).cos());
        let fb = f.clone().with_breakpoints(vec![0.1]);
        for mu in [0.0, 1.0, 1.5] {
            let a = sym_translate(&f, 0.4, mu, 0.3, &cfg()).unwrap();
            let b = sym_translate(&fb, 0.4, mu, 0.3, &cfg()).unwrap();
            assert!((a - b).abs() < 1e-12, "mu={mu}: {a} vs {b}");
        }
    }

    #[test]
    fn norm_bound_examples() {
        let space = SpaceParams::new(crate::weighted::Exponent::Infinity, 0.5, 1.0).unwrap();
        let one = FunctionHandle::constant(1.0);
        let nc = NormConfig::default();
        let t = 1.2;
        let r = translate_norm_bound_check(&one, t, &space, &cfg(), &nc).unwrap();
        assert_relative_eq!(r.ratio, (0.5 * t).cos().powi(2), epsilon = 1e-10);
        let id = FunctionHandle::identity();
        let r = translate_norm_bound_check(&id, t, &space, &cfg(), &nc).unwrap();
        let want = (2.0 * t.cos() - 1.0).abs() * (0.5 * t).cos().powi(2);
        assert_relative_eq!(r.ratio, want, epsilon = 1e-9);
        let zero = FunctionHandle::constant(0.0);
        assert!(matches!(
            translate_norm_bound_check(&zero, t, &space, &cfg(), &nc),
            Err(Error::Contract(_))
        ));
    }

    #[test]
    fn duality_examples() {
        let basis = JacobiBasis::symmetric(1.0).unwrap();
        let r1 = FunctionHandle::polynomial(PolynomialCoeffs::basis_element(basis, 1));
        let r2 = FunctionHandle::polynomial(PolynomialCoeffs::basis_element(basis, 2));
        let (a, b) = duality_check(&r1, &r2, 0.3, 1.0, &cfg(), 24).unwrap();
        assert!(a.abs() < 1e-12 && b.abs() < 1e-12);
        let p = FunctionHandle::polynomial(PolynomialCoeffs::new(basis, vec![0.3, 1.0, -0.2, 0.5]));
        let q = FunctionHandle::polynomial(PolynomialCoeffs::new(basis, vec![-1.0, 0.4, 0.8]));
        let (a, b) = duality_check(&p, &q, -0.45, 1.0, &cfg(), 24).unwrap();
        assert!((a - b).abs() < 1e-12, "{a} vs {b}");
        let (a, b) =
            duality_check(&p, &FunctionHandle::constant(1.0), 0.2, 1.0, &cfg(), 24).unwrap();
        assert!((a - b).abs() < 1e-12);
    }
}
