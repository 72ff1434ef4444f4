//! Gauss-Jacobi rules from the symmetric tridiagonal (Golub-Welsch) eigenproblem,
//! plus the Gauss-Legendre and Gauss-Chebyshev helpers used by the operators.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{domain, Error, Result};
use crate::jacobi::{JacobiBasis, PolynomialCoeffs};

const MAX_QL_SWEEPS: usize = 60;

/// Nodes and positive weights for `integral f(x) (1-x)^a (1+x)^b dx`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureRule {
    nodes: Vec<f64>,
    weights: Vec<f64>,
    basis: JacobiBasis,
}

impl QuadratureRule {
    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn basis(&self) -> JacobiBasis {
        self.basis
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Sequential weighted sum; the order is fixed so results are reproducible.
    pub fn integrate(&self, mut f: impl FnMut(f64) -> f64) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| w * f(x))
            .sum()
    }

    pub fn try_integrate(&self, mut f: impl FnMut(f64) -> Result<f64>) -> Result<f64> {
        let mut acc = 0.0;
        for (&x, &w) in self.nodes.iter().zip(&self.weights) {
            acc += w * f(x)?;
        }
        Ok(acc)
    }

    pub fn iter(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.nodes.iter().copied().zip(self.weights.iter().copied())
    }
}

/// The `m`-point Gauss rule for the Jacobi weight of `basis`; exact for
/// polynomials of degree `<= 2m - 1`.
pub fn gauss_jacobi(m: usize, basis: JacobiBasis) -> Result<QuadratureRule> {
    if m == 0 {
        return Err(domain("a Gauss rule needs at least one node"));
    }
    let (a, b) = (basis.a(), basis.b());
    let mut diag = vec![0.0; m];
    let mut off = vec![0.0; m];
    for (k, d) in diag.iter_mut().enumerate() {
        let kf = k as f64;
        *d = if k == 0 {
            (b - a) / (a + b + 2.0)
        } else {
            let s = 2.0 * kf + a + b;
            (b * b - a * a) / (s * (s + 2.0))
        };
    }
    for k in 1..m {
        let kf = k as f64;
        let s = 2.0 * kf + a + b;
        let beta = if k == 1 {
            4.0 * (1.0 + a) * (1.0 + b) / ((2.0 + a + b).powi(2) * (3.0 + a + b))
        } else {
            4.0 * kf * (kf + a) * (kf + b) * (kf + a + b) / (s * s * (s + 1.0) * (s - 1.0))
        };
        off[k - 1] = beta.sqrt();
    }
    let mut first = vec![0.0; m];
    first[0] = 1.0;
    tridiagonal_ql(&mut diag, &mut off, &mut first)?;

    let mass = basis.weight_mass();
    let mut pairs: Vec<(f64, f64)> = diag
        .into_iter()
        .zip(first)
        .map(|(x, v)| (x, mass * v * v))
        .collect();
    pairs.sort_by(|p, q| p.0.total_cmp(&q.0));
    let (nodes, weights) = pairs.into_iter().unzip();
    Ok(QuadratureRule {
        nodes,
        weights,
        basis,
    })
}

/// Implicit QL with Wilkinson-type shifts on a symmetric tridiagonal matrix.
///
/// On return `diag` holds the eigenvalues and `first[j]` the first component of
/// the `j`-th normalized eigenvector (only that row of the eigenvector matrix
/// is tracked). `off[i]` couples rows `i` and `i + 1`; `off[m - 1]` is unused.
fn tridiagonal_ql(diag: &mut [f64], off: &mut [f64], first: &mut [f64]) -> Result<()> {
    let n = diag.len();
    if n == 1 {
        return Ok(());
    }
    off[n - 1] = 0.0;
    for l in 0..n {
        let mut sweeps = 0;
        loop {
            let mut m = l;
            while m < n - 1 {
                let dd = diag[m].abs() + diag[m + 1].abs();
                if off[m].abs() <= f64::EPSILON * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            sweeps += 1;
            if sweeps > MAX_QL_SWEEPS {
                return Err(Error::Solver {
                    solver: "tridiagonal QL",
                    reason: format!(
                        "eigenvalue {l} of {n} unresolved after {MAX_QL_SWEEPS} sweeps (off-diagonal {:.3e})",
                        off[l]
                    ),
                    history: off.to_vec(),
                });
            }
            let mut g = (diag[l + 1] - diag[l]) / (2.0 * off[l]);
            let mut r = g.hypot(1.0);
            g = diag[m] - diag[l] + off[l] / (g + r.copysign(g));
            let (mut s, mut c, mut p) = (1.0, 1.0, 0.0);
            let mut deflated = false;
            let mut i = m;
            while i > l {
                i -= 1;
                let f = s * off[i];
                let b = c * off[i];
                r = f.hypot(g);
                off[i + 1] = r;
                if r == 0.0 {
                    diag[i + 1] -= p;
                    off[m] = 0.0;
                    deflated = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = diag[i + 1] - p;
                r = (diag[i] - g) * s + 2.0 * c * b;
                p = s * r;
                diag[i + 1] = g + p;
                g = c * r - b;
                let t = first[i + 1];
                first[i + 1] = s * first[i] + c * t;
                first[i] = c * first[i] - s * t;
            }
            if deflated {
                continue;
            }
            diag[l] -= p;
            off[l] = g;
            off[m] = 0.0;
        }
    }
    Ok(())
}

/// Gauss-Legendre rule on `[-1, 1]`.
pub fn gauss_legendre(m: usize) -> Result<QuadratureRule> {
    gauss_jacobi(m, JacobiBasis::new(0.0, 0.0)?)
}

/// Gauss-Legendre rule mapped to `[lo, hi]`, returned as parallel node/weight vectors.
pub fn gauss_legendre_on(rule: &QuadratureRule, lo: f64, hi: f64) -> (Vec<f64>, Vec<f64>) {
    let half = 0.5 * (hi - lo);
    let mid = 0.5 * (hi + lo);
    rule.iter().map(|(x, w)| (mid + half * x, half * w)).unzip()
}

/// `sum over panels of integral f` with a fixed Gauss-Legendre rule per panel.
pub fn integrate_panels(rule: &QuadratureRule, cuts: &[f64], mut f: impl FnMut(f64) -> f64) -> f64 {
    let mut acc = 0.0;
    for w in cuts.windows(2) {
        let (lo, hi) = (w[0], w[1]);
        if hi <= lo {
            continue;
        }
        let half = 0.5 * (hi - lo);
        let mid = 0.5 * (hi + lo);
        let mut panel = 0.0;
        for (x, wt) in rule.iter() {
            panel += wt * f(mid + half * x);
        }
        acc += half * panel;
    }
    acc
}

/// Angles `(2k - 1) pi / (2m)`, `k = 1..m`: the Gauss-Chebyshev nodes
/// `z = cos(angle)` for the measure `dz / sqrt(1 - z^2)`, each carrying weight `pi / m`.
pub fn chebyshev_angles(m: usize) -> Vec<f64> {
    (0..m)
        .map(|k| (k as f64 + 0.5) * core::f64::consts::PI / m as f64)
        .collect()
}

/// `n` Chebyshev points of the second kind, `cos(j pi / (n - 1))`, ascending.
pub fn chebyshev_lobatto(n: usize) -> Vec<f64> {
    if n <= 1 {
        return vec![0.0];
    }
    let mut pts: Vec<f64> = (0..n)
        .map(|j| -(j as f64 * core::f64::consts::PI / (n - 1) as f64).cos())
        .collect();
    pts[0] = -1.0;
    pts[n - 1] = 1.0;
    if n % 2 == 1 {
        pts[n / 2] = 0.0;
    }
    pts
}

/// `a_n(f) = integral f R_n^{(a,b)} (1-x)^a (1+x)^b dx` by `rule`, whose basis fixes `(a, b)`.
pub fn fourier_jacobi_coeff(f: impl Fn(f64) -> f64, n: usize, rule: &QuadratureRule) -> f64 {
    let basis = rule.basis();
    rule.integrate(|x| f(x) * basis.eval(n, x))
}

/// All coefficients `a_0..=a_degree` in one pass over the nodes.
pub fn fourier_jacobi_coeffs(
    f: impl Fn(f64) -> f64,
    degree: usize,
    rule: &QuadratureRule,
) -> Vec<f64> {
    let basis = rule.basis();
    let mut out = vec![0.0; degree + 1];
    let mut vals = vec![0.0; degree + 1];
    for (x, w) in rule.iter() {
        let fx = w * f(x);
        basis.eval_all(x, &mut vals);
        for (o, v) in out.iter_mut().zip(&vals) {
            *o += fx * v;
        }
    }
    out
}

/// Orthogonal projection of `f` onto `R_0..=R_degree` of the rule's basis.
pub fn project(f: impl Fn(f64) -> f64, degree: usize, rule: &QuadratureRule) -> PolynomialCoeffs {
    let basis = rule.basis();
    let coeffs = fourier_jacobi_coeffs(f, degree, rule)
        .into_iter()
        .enumerate()
        .map(|(k, a)| a / basis.norm_sq(k))
        .collect();
    PolynomialCoeffs::new(basis, coeffs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    /// Moments of the Jacobi weight by the binomial expansion in `u = (1 + x) / 2`
    /// and Beta integrals; independent of the eigenvalue solver.
    fn jacobi_moment(k: u32, a: f64, b: f64) -> f64 {
        moment_with_scale(k, a, b).0
    }

    /// Moment together with the sum of absolute terms, which bounds the
    /// cancellation error of the oracle itself.
    fn moment_with_scale(k: u32, a: f64, b: f64) -> (f64, f64) {
        let beta =
            |p: f64, q: f64| libm::exp(libm::lgamma(p) + libm::lgamma(q) - libm::lgamma(p + q));
        let mut total = 0.0;
        let mut abs_total = 0.0;
        for j in 0..=k {
            let binom = (0..j).fold(1.0, |acc, i| acc * (k - i) as f64 / (i + 1) as f64);
            let sign = if (k - j).is_multiple_of(2) { 1.0 } else { -1.0 };
            let term = binom * 2f64.powi(j as i32) * beta(b + j as f64 + 1.0, a + 1.0);
            total += sign * term;
            abs_total += term;
        }
        let c = 2f64.powf(a + b + 1.0);
        (total * c, abs_total * c)
    }

    #[test]
    fn two_point_legendre() {
        let rule = gauss_legendre(2).unwrap();
        let s = 1.0 / 3f64.sqrt();
        assert_relative_eq!(rule.nodes()[0], -s, epsilon = 1e-15);
        assert_relative_eq!(rule.nodes()[1], s, epsilon = 1e-15);
        assert_relative_eq!(rule.weights()[0], 1.0, epsilon = 1e-15);
        assert_relative_eq!(rule.weights()[1], 1.0, epsilon = 1e-15);
    }

    #[test]
    fn one_point_rule_for_one_one() {
        let rule = gauss_jacobi(1, JacobiBasis::symmetric(1.0).unwrap()).unwrap();
        assert_eq!(rule.nodes(), &[0.0]);
        assert_relative_eq!(rule.weights()[0], 4.0 / 3.0, epsilon = 1e-15);
    }

    #[test]
    fn quartic_moment_with_two_nodes() {
        let rule = gauss_jacobi(2, JacobiBasis::symmetric(1.0).unwrap()).unwrap();
        // integral of x^2 (1 - x^2) is 4/15, of x^2 (1 - x^2)^2 is 16/105
        assert_relative_eq!(rule.integrate(|x| x * x), 4.0 / 15.0, epsilon = 1e-15);
        assert_relative_eq!(jacobi_moment(2, 1.0, 1.0), 4.0 / 15.0, epsilon = 1e-14);
        let rule2 = gauss_jacobi(2, JacobiBasis::symmetric(2.0).unwrap()).unwrap();
        assert_relative_eq!(rule2.integrate(|x| x * x), 16.0 / 105.0, epsilon = 1e-15);
    }

    #[test]
    fn exact_for_monomials() {
        for &(a, b) in &[
            (0.0, 0.0),
            (1.0, 1.0),
            (0.5, 0.5),
            (-0.5, -0.5),
            (0.0, 2.0),
            (2.5, -0.3),
        ] {
            let basis = JacobiBasis::new(a, b).unwrap();
            for m in [1usize, 2, 5, 12, 30] {
                let rule = gauss_jacobi(m, basis).unwrap();
                assert!(rule.nodes().windows(2).all(|w| w[0] < w[1]));
                assert!(rule.weights().iter().all(|&w| w > 0.0));
                assert_relative_eq!(
                    rule.weights().iter().sum::<f64>(),
                    basis.weight_mass(),
                    max_relative = 1e-13
                );
                for k in 0..(2 * m as u32) {
                    let (exact, scale) = moment_with_scale(k, a, b);
                    let approx = rule.integrate(|x| x.powi(k as i32));
                    assert!(
                        (approx - exact).abs() <= 1e-12 * scale,
                        "m={m} k={k} ({a},{b}): {approx} vs {exact}"
                    );
                }
            }
        }
    }

    #[test]
    fn orthogonality_of_normalized_polynomials() {
        for &mu in &[0.0, 1.0, 2.5] {
            let basis = JacobiBasis::symmetric(mu).unwrap();
            let rule = gauss_jacobi(42, basis).unwrap();
            for n in 0..=20 {
                for m in 0..n {
                    let ip = rule.integrate(|x| basis.eval(n, x) * basis.eval(m, x));
                    assert!(ip.abs() <= 1e-10, "mu={mu} n={n} m={m}: {ip}");
                }
                let nn = rule.integrate(|x| basis.eval(n, x).powi(2));
                assert_relative_eq!(nn, basis.norm_sq(n), max_relative = 1e-11);
            }
        }
    }

    #[test]
    fn large_rule_converges() {
        let rule = gauss_jacobi(600, JacobiBasis::new(0.5, 0.5).unwrap()).unwrap();
        assert_eq!(rule.len(), 600);
        assert_relative_eq!(
            rule.weights().iter().sum::<f64>(),
            core::f64::consts::FRAC_PI_2,
            max_relative = 1e-12
        );
    }

    #[test]
    fn rejects_empty_rule() {
        assert!(gauss_jacobi(0, JacobiBasis::symmetric(0.0).unwrap()).is_err());
    }

    #[test]
    fn chebyshev_angles_integrate_cosines() {
        let angles = chebyshev_angles(8);
        let pi = core::f64::consts::PI;
        for k in 0..16 {
            let s: f64 = angles.iter().map(|&t| (k as f64 * t).cos()).sum::<f64>() * pi / 8.0;
            let exact = if k == 0 { pi } else { 0.0 };
            assert!((s - exact).abs() < 1e-13, "k={k}: {s}");
        }
    }

    #[test]
    fn fourier_coefficients() {
        let basis = JacobiBasis::symmetric(1.0).unwrap();
        let rule = gauss_jacobi(20, basis).unwrap();
        assert!(fourier_jacobi_coeff(|x| basis.eval(2, x), 1, &rule).abs() < 1e-15);
        assert_relative_eq!(
            fourier_jacobi_coeff(|_| 1.0, 0, &rule),
            4.0 / 3.0,
            epsilon = 1e-14
        );
        let poly = PolynomialCoeffs::new(basis, vec![0.5, -1.0, 0.25, 2.0]);
        let back = project(|x| poly.eval(x), 6, &rule);
        for (k, c) in back.coeffs().iter().enumerate() {
            let want = poly.coeffs().get(k).copied().unwrap_or(0.0);
            assert!((c - want).abs() < 1e-13, "k={k}: {c} vs {want}");
        }
    }
}
