//! Real functions on `[-1, 1]`: closures with optional analytic derivatives,
//! Jacobi expansions, and sampled data with monotone cubic interpolation.

use alloc::format;
use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec::Vec;
#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{domain, Result};
use crate::jacobi::PolynomialCoeffs;

type Rule = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

const MAX_KNOT_BREAKPOINTS: usize = 64;

/// A real function on `[-1, 1]`.
///
/// `breakpoints` lists interior points where the function (or a low derivative)
/// is not smooth; integrators split their panels there.
#[derive(Clone)]
pub struct FunctionHandle {
    label: String,
    value: Rule,
    first: Option<Rule>,
    second: Option<Rule>,
    breakpoints: Vec<f64>,
    polynomial: Option<PolynomialCoeffs>,
}

impl core::fmt::Debug for FunctionHandle {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.debug_struct("FunctionHandle")
            .field("label", &self.label)
            .field("analytic_derivatives", &self.first.is_some())
            .field("breakpoints", &self.breakpoints)
            .finish()
    }
}

impl FunctionHandle {
    pub fn from_fn(
        label: impl Into<String>,
        f: impl Fn(f64) -> f64 + Send + Sync + 'static,
    ) -> Self {
        Self {
            label: label.into(),
            value: Arc::new(f),
            first: None,
            second: None,
            breakpoints: Vec::new(),
            polynomial: None,
        }
    }

    pub fn with_derivatives(
        mut self,
        first: impl Fn(f64) -> f64 + Send + Sync + 'static,
        second: impl Fn(f64) -> f64 + Send + Sync + 'static,
    ) -> Self {
        self.first = Some(Arc::new(first));
        self.second = Some(Arc::new(second));
        self
    }

    pub fn with_breakpoints(mut self, mut points: Vec<f64>) -> Self {
        points.retain(|p| p.abs() < 1.0);
        points.sort_by(|a, b| a.total_cmp(b));
        points.dedup();
        self.breakpoints = points;
        self
    }

    pub fn constant(c: f64) -> Self {
        Self::from_fn(format!("const({c})"), move |_| c).with_derivatives(|_| 0.0, |_| 0.0)
    }

    pub fn identity() -> Self {
        Self::from_fn("id", |x| x).with_derivatives(|_| 1.0, |_| 0.0)
    }

    /// A Jacobi expansion, with exact derivatives.
    pub fn polynomial(poly: PolynomialCoeffs) -> Self {
        let d1 = poly.derivative();
        let d2 = d1.derivative();
        let p = poly.clone();
        let label = format!("poly(deg {})", poly.degree());
        Self {
            label,
            value: Arc::new(move |x| p.eval(x)),
            first: Some(Arc::new(move |x| d1.eval(x))),
            second: Some(Arc::new(move |x| d2.eval(x))),
            breakpoints: Vec::new(),
            polynomial: Some(poly),
        }
    }

    /// Wraps tabulated data. Knots become breakpoints when there are few of
    /// them; otherwise only the ends of the tabulated range do.
    pub fn sampled(data: SampledFunction) -> Self {
        let xs = data.abscissae();
        let knots = if xs.len() <= MAX_KNOT_BREAKPOINTS {
            xs.to_vec()
        } else {
            alloc::vec![xs[0], xs[xs.len() - 1]]
        };
        let data = Arc::new(data);
        let (v, d1, d2) = (data.clone(), data.clone(), data);
        Self {
            label: String::from("sampled"),
            value: Arc::new(move |x| v.eval(x)),
            first: Some(Arc::new(move |x| d1.derivative(x))),
            second: Some(Arc::new(move |x| d2.second_derivative(x))),
            breakpoints: Vec::new(),
            polynomial: None,
        }
        .with_breakpoints(knots)
    }

    pub fn relabel(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    #[inline]
    pub fn eval(&self, x: f64) -> f64 {
        (self.value)(x)
    }

    pub fn first_derivative(&self, x: f64) -> Option<f64> {
        self.first.as_ref().map(|d| d(x))
    }

    pub fn second_derivative(&self, x: f64) -> Option<f64> {
        self.second.as_ref().map(|d| d(x))
    }

    pub fn has_derivatives(&self) -> bool {
        self.first.is_some() && self.second.is_some()
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    /// The Jacobi expansion behind this handle, when it is a polynomial.
    pub fn as_polynomial(&self) -> Option<&PolynomialCoeffs> {
        self.polynomial.as_ref()
    }

    /// `self - other`, keeping derivatives and breakpoints of both.
    pub fn minus(&self, other: &FunctionHandle) -> Self {
        let (f, g) = (self.value.clone(), other.value.clone());
        let mut out = Self::from_fn(format!("{} - {}", self.label, other.label), move |x| {
            f(x) - g(x)
        });
        if let (Some(f1), Some(f2), Some(g1), Some(g2)) = (
            self.first.clone(),
            self.second.clone(),
            other.first.clone(),
            other.second.clone(),
        ) {
            out = out.with_derivatives(move |x| f1(x) - g1(x), move |x| f2(x) - g2(x));
        }
        let mut bp = self.breakpoints.clone();
        bp.extend_from_slice(&other.breakpoints);
        out.with_breakpoints(bp)
    }

    pub fn scaled(&self, c: f64) -> Self {
        let f = self.value.clone();
        let mut out = Self::from_fn(format!("{c}*{}", self.label), move |x| c * f(x));
        if let (Some(f1), Some(f2)) = (self.first.clone(), self.second.clone()) {
            out = out.with_derivatives(move |x| c * f1(x), move |x| c * f2(x));
        }
        out.polynomial = self.polynomial.as_ref().map(|p| p.scaled(c));
        out.with_breakpoints(self.breakpoints.clone())
    }
}

/// Tabulated data on strictly increasing abscissae, interpolated by a
/// monotonicity-preserving piecewise cubic (Fritsch-Carlson slopes).
///
/// Outside the tabulated range the end values are held constant.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledFunction {
    xs: Vec<f64>,
    ys: Vec<f64>,
    slopes: Vec<f64>,
}

impl SampledFunction {
    pub fn new(xs: Vec<f64>, ys: Vec<f64>) -> Result<Self> {
        if xs.len() != ys.len() {
            return Err(domain(format!(
                "{} abscissae but {} values",
                xs.len(),
                ys.len()
            )));
        }
        if xs.len() < 2 {
            return Err(domain("need at least two samples"));
        }
        for (i, &x) in xs.iter().enumerate() {
            if !(-1.0..=1.0).contains(&x) {
                return Err(domain(format!("abscissa {x} (row {i}) outside [-1, 1]")));
            }
            if i > 0 && x <= xs[i - 1] {
                return Err(domain(format!(
                    "abscissae must be strictly increasing: {} then {x} (row {i})",
                    xs[i - 1]
                )));
            }
        }
        if let Some((i, y)) = ys.iter().enumerate().find(|(_, y)| !y.is_finite()) {
            return Err(domain(format!("non-finite value {y} at row {i}")));
        }
        let slopes = fritsch_carlson(&xs, &ys);
        Ok(Self { xs, ys, slopes })
    }

    pub fn abscissae(&self) -> &[f64] {
        &self.xs
    }

    pub fn values(&self) -> &[f64] {
        &self.ys
    }

    fn locate(&self, x: f64) -> Option<usize> {
        let n = self.xs.len();
        if x <= self.xs[0] || x >= self.xs[n - 1] {
            return None;
        }
        Some(self.xs.partition_point(|&v| v <= x) - 1)
    }

    /// Interval width, local coordinate and endpoint data of segment `i`.
    fn segment(&self, i: usize, x: f64) -> (f64, f64, f64, f64, f64, f64) {
        let h = self.xs[i + 1] - self.xs[i];
        let s = (x - self.xs[i]) / h;
        let (m0, m1) = (self.slopes[i] * h, self.slopes[i + 1] * h);
        (h, s, self.ys[i], self.ys[i + 1], m0, m1)
    }

    pub fn eval(&self, x: f64) -> f64 {
        let n = self.xs.len();
        match self.locate(x) {
            None if x <= self.xs[0] => self.ys[0],
            None => self.ys[n - 1],
            Some(i) => {
                let (_, s, y0, y1, m0, m1) = self.segment(i, x);
                let s2 = s * s;
                let s3 = s2 * s;
                (2.0 * s3 - 3.0 * s2 + 1.0) * y0
                    + (s3 - 2.0 * s2 + s) * m0
                    + (-2.0 * s3 + 3.0 * s2) * y1
                    + (s3 - s2) * m1
            }
        }
    }

    pub fn derivative(&self, x: f64) -> f64 {
        match self.locate(x) {
            None => 0.0,
            Some(i) => {
                let (h, s, y0, y1, m0, m1) = self.segment(i, x);
                let s2 = s * s;
                ((6.0 * s2 - 6.0 * s) * y0
                    + (3.0 * s2 - 4.0 * s + 1.0) * m0
                    + (-6.0 * s2 + 6.0 * s) * y1
                    + (3.0 * s2 - 2.0 * s) * m1)
                    / h
            }
        }
    }

    pub fn second_derivative(&self, x: f64) -> f64 {
        match self.locate(x) {
            None => 0.0,
            Some(i) => {
                let (h, s, y0, y1, m0, m1) = self.segment(i, x);
                ((12.0 * s - 6.0) * y0
                    + (6.0 * s - 4.0) * m0
                    + (6.0 - 12.0 * s) * y1
                    + (6.0 * s - 2.0) * m1)
                    / (h * h)
            }
        }
    }
}

fn fritsch_carlson(xs: &[f64], ys: &[f64]) -> Vec<f64> {
    let n = xs.len();
    let secant: Vec<f64> = (0..n - 1)
        .map(|i| (ys[i + 1] - ys[i]) / (xs[i + 1] - xs[i]))
        .collect();
    let mut m = alloc::vec![0.0; n];
    m[0] = secant[0];
    m[n - 1] = secant[n - 2];
    for i in 1..n - 1 {
        m[i] = if secant[i - 1] * secant[i] <= 0.0 {
            0.0
        } else {
            0.5 * (secant[i - 1] + secant[i])
        };
    }
    for i in 0..n - 1 {
        if secant[i] == 0.0 {
            m[i] = 0.0;
            m[i + 1] = 0.0;
            continue;
        }
        let a = m[i] / secant[i];
        let b = m[i + 1] / secant[i];
        let r = a * a + b * b;
        if r > 9.0 {
            let tau = 3.0 / r.sqrt();
            m[i] = tau * a * secant[i];
            m[i + 1] = tau * b * secant[i];
        }
    }
    m
}
