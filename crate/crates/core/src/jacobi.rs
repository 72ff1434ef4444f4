//! Jacobi polynomials normalized by their value at `x = 1`, coefficient-space
//! calculus for expansions in that basis, and the Jacobi differential operator
//! `D = (1 - x^2) d^2/dx^2 + (mu - nu - (nu + mu + 2) x) d/dx`.
//!
//! Throughout, `R_n^{(a,b)}(x) = P_n^{(a,b)}(x) / P_n^{(a,b)}(1)`, so every basis
//! element equals one at the right endpoint.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{contract, domain, Result};
use crate::function::FunctionHandle;

/// Index pair `(a, b)` of the Jacobi weight `(1 - x)^a (1 + x)^b`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JacobiBasis {
    a: f64,
    b: f64,
}

impl JacobiBasis {
    pub fn new(a: f64, b: f64) -> Result<Self> {
        if !(a > -1.0 && b > -1.0) {
            return Err(domain(format!(
                "Jacobi exponents must exceed -1, got ({a}, {b})"
            )));
        }
        Ok(Self { a, b })
    }

    /// The ultraspherical pair `(mu, mu)`.
    pub fn symmetric(mu: f64) -> Result<Self> {
        Self::new(mu, mu)
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    pub fn weight(&self, x: f64) -> f64 {
        (1.0 - x).powf(self.a) * (1.0 + x).powf(self.b)
    }

    /// Classical `P_n^{(a,b)}(x)` by the three-term recurrence.
    pub fn classical(&self, n: usize, x: f64) -> f64 {
        let (a, b) = (self.a, self.b);
        let mut prev = 1.0;
        if n == 0 {
            return prev;
        }
        let mut cur = 0.5 * ((a + b + 2.0) * x + a - b);
        for k in 1..n {
            let next = self.step(k, x, cur, prev);
            prev = cur;
            cur = next;
        }
        cur
    }

    #[inline]
    fn step(&self, k: usize, x: f64, cur: f64, prev: f64) -> f64 {
        let (a, b) = (self.a, self.b);
        let k = k as f64;
        let s = 2.0 * k + a + b;
        let lead = 2.0 * (k + 1.0) * (k + a + b + 1.0) * s;
        let mid = (s + 1.0) * ((s + 2.0) * s * x + a * a - b * b);
        let tail = 2.0 * (k + a) * (k + b) * (s + 2.0);
        (mid * cur - tail * prev) / lead
    }

    /// `P_n^{(a,b)}(1) = (a+1)_n / n!`.
    pub fn value_at_one(&self, n: usize) -> f64 {
        (1..=n).fold(1.0, |acc, k| acc * (k as f64 + self.a) / k as f64)
    }

    /// Normalized `R_n^{(a,b)}(x)`.
    pub fn eval(&self, n: usize, x: f64) -> f64 {
        self.classical(n, x) / self.value_at_one(n)
    }

    /// Fills `out[k] = R_k^{(a,b)}(x)` for `k < out.len()` in one recurrence pass.
    pub fn eval_all(&self, x: f64, out: &mut [f64]) {
        let len = out.len();
        if len == 0 {
            return;
        }
        let (a, b) = (self.a, self.b);
        let mut prev = 1.0;
        out[0] = 1.0;
        if len == 1 {
            return;
        }
        let mut cur = 0.5 * ((a + b + 2.0) * x + a - b);
        let mut at_one = a + 1.0;
        out[1] = cur / at_one;
        for k in 1..len - 1 {
            let next = self.step(k, x, cur, prev);
            prev = cur;
            cur = next;
            at_one *= (k as f64 + 1.0 + a) / (k as f64 + 1.0);
            out[k + 1] = cur / at_one;
        }
    }

    /// `h_n = integral of R_n^2 (1-x)^a (1+x)^b over [-1, 1]`.
    pub fn norm_sq(&self, n: usize) -> f64 {
        let (a, b) = (self.a, self.b);
        let nf = n as f64;
        let ln2 = core::f64::consts::LN_2;
        let log_classical = if n == 0 {
            (a + b + 1.0) * ln2 + libm::lgamma(a + 1.0) + libm::lgamma(b + 1.0)
                - libm::lgamma(a + b + 2.0)
        } else {
            (a + b + 1.0) * ln2 - (2.0 * nf + a + b + 1.0).ln()
                + libm::lgamma(nf + a + 1.0)
                + libm::lgamma(nf + b + 1.0)
                - libm::lgamma(nf + a + b + 1.0)
                - libm::lgamma(nf + 1.0)
        };
        let at_one = self.value_at_one(n);
        log_classical.exp() / (at_one * at_one)
    }

    /// Total mass of the weight, `2^{a+b+1} B(a+1, b+1)`.
    pub fn weight_mass(&self) -> f64 {
        self.norm_sq(0)
    }
}

/// `R_n^{(a,b)}(x)` for a basis given by its exponents.
pub fn jacobi_eval(n: usize, a: f64, b: f64, x: f64) -> Result<f64> {
    Ok(JacobiBasis::new(a, b)?.eval(n, x))
}

/// A polynomial expanded in a normalized Jacobi basis; `coeffs[k]` multiplies `R_k`.
#[derive(Debug, Clone, PartialEq)]
pub struct PolynomialCoeffs {
    basis: JacobiBasis,
    coeffs: Vec<f64>,
}

impl PolynomialCoeffs {
    pub fn new(basis: JacobiBasis, coeffs: Vec<f64>) -> Self {
        let coeffs = if coeffs.is_empty() { vec![0.0] } else { coeffs };
        Self { basis, coeffs }
    }

    /// The single basis element `R_n`.
    pub fn basis_element(basis: JacobiBasis, n: usize) -> Self {
        let mut coeffs = vec![0.0; n + 1];
        coeffs[n] = 1.0;
        Self { basis, coeffs }
    }

    pub fn basis(&self) -> JacobiBasis {
        self.basis
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    /// Storage degree, `len - 1`.
    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    /// Index of the last coefficient whose magnitude exceeds `tol`.
    pub fn effective_degree(&self, tol: f64) -> usize {
        self.coeffs.iter().rposition(|c| c.abs() > tol).unwrap_or(0)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|&c| c == 0.0)
    }

    pub fn eval(&self, x: f64) -> f64 {
        let b = self.basis;
        let (a_, b_) = (b.a, b.b);
        let mut prev = 1.0;
        let mut sum = self.coeffs[0];
        if self.coeffs.len() == 1 {
            return sum;
        }
        let mut cur = 0.5 * ((a_ + b_ + 2.0) * x + a_ - b_);
        let mut at_one = a_ + 1.0;
        sum += self.coeffs[1] * cur / at_one;
        for k in 1..self.coeffs.len() - 1 {
            let next = b.step(k, x, cur, prev);
            prev = cur;
            cur = next;
            at_one *= (k as f64 + 1.0 + a_) / (k as f64 + 1.0);
            sum += self.coeffs[k + 1] * cur / at_one;
        }
        sum
    }

    /// Exact derivative, expressed in the basis `(a + 1, b + 1)`.
    ///
    /// Uses `d/dx R_k^{(a,b)} = k (k + a + b + 1) / (2 (a + 1)) R_{k-1}^{(a+1,b+1)}`.
    pub fn derivative(&self) -> Self {
        let (a, b) = (self.basis.a, self.basis.b);
        let basis = JacobiBasis {
            a: a + 1.0,
            b: b + 1.0,
        };
        if self.coeffs.len() == 1 {
            return Self::new(basis, vec![0.0]);
        }
        let coeffs = self.coeffs[1..]
            .iter()
            .enumerate()
            .map(|(j, &c)| {
                let k = (j + 1) as f64;
                c * k * (k + a + b + 1.0) / (2.0 * (a + 1.0))
            })
            .collect();
        Self { basis, coeffs }
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self {
            basis: self.basis,
            coeffs: self.coeffs.iter().map(|c| c * s).collect(),
        }
    }

    /// Coefficients `k > max_degree` dropped.
    pub fn truncated(&self, max_degree: usize) -> Self {
        let keep = (max_degree + 1).min(self.coeffs.len());
        Self::new(self.basis, self.coeffs[..keep].to_vec())
    }
}

/// Parameters `(nu, mu)` of the operator `D_{x,nu,mu}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SturmLiouville {
    nu: f64,
    mu: f64,
}

impl SturmLiouville {
    pub fn new(nu: f64, mu: f64) -> Result<Self> {
        if !(nu >= 0.0 && mu >= 0.0) || !nu.is_finite() || !mu.is_finite() {
            return Err(domain(format!(
                "operator indices must be finite and nonnegative, got ({nu}, {mu})"
            )));
        }
        Ok(Self { nu, mu })
    }

    /// `D_{x,mu,mu}`, the operator diagonal in the `(mu, mu)` basis.
    pub fn symmetric(mu: f64) -> Result<Self> {
        Self::new(mu, mu)
    }

    pub fn nu(&self) -> f64 {
        self.nu
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    /// `-k (k + nu + mu + 1)`.
    pub fn eigenvalue(&self, k: usize) -> f64 {
        let k = k as f64;
        -k * (k + self.nu + self.mu + 1.0)
    }

    /// `D` on an expansion in the matching basis `(nu, mu)`; exact.
    pub fn apply_coeffs(&self, poly: &PolynomialCoeffs) -> Result<PolynomialCoeffs> {
        let basis = poly.basis();
        if basis.a != self.nu || basis.b != self.mu {
            return Err(contract(format!(
                "operator ({}, {}) is diagonal only in the basis ({}, {}), got ({}, {})",
                self.nu, self.mu, self.nu, self.mu, basis.a, basis.b
            )));
        }
        let coeffs = poly
            .coeffs()
            .iter()
            .enumerate()
            .map(|(k, c)| c * self.eigenvalue(k))
            .collect();
        Ok(PolynomialCoeffs::new(basis, coeffs))
    }

    /// `D` from first and second derivative values at `x`.
    pub fn combine(&self, x: f64, d1: f64, d2: f64) -> f64 {
        (1.0 - x * x) * d2 + (self.mu - self.nu - (self.nu + self.mu + 2.0) * x) * d1
    }

    /// `D f` at a point, using analytic derivatives when the handle has them and
    /// central differences otherwise.
    pub fn apply_pointwise(&self, f: &FunctionHandle, x: f64) -> Result<f64> {
        if !(-1.0..=1.0).contains(&x) {
            return Err(domain(format!("x = {x} outside [-1, 1]")));
        }
        if let (Some(d1), Some(d2)) = (f.first_derivative(x), f.second_derivative(x)) {
            return Ok(self.combine(x, d1, d2));
        }
        if x.abs() == 1.0 {
            return Err(domain(
                "D at an endpoint needs analytic derivatives (polynomial handle)",
            ));
        }
        let (d1, d2) = central_derivatives(|u| f.eval(u), x);
        Ok(self.combine(x, d1, d2))
    }
}

/// First and second central differences at interior `x`, with step sizes
/// `cbrt(eps)` and `eps^(1/4)` (scaled by `max(1, |x|)`) kept inside the interval.
pub fn central_derivatives(f: impl Fn(f64) -> f64, x: f64) -> (f64, f64) {
    let scale = x.abs().max(1.0);
    let room = 0.5 * (1.0 - x.abs());
    let h1 = (f64::EPSILON.cbrt() * scale).min(room);
    let h2 = (f64::EPSILON.sqrt().sqrt() * scale).min(room);
    let d1 = (f(x + h1) - f(x - h1)) / (2.0 * h1);
    let d2 = (f(x + h2) - 2.0 * f(x) + f(x - h2)) / (h2 * h2);
    (d1, d2)
}
