//! Weighted linear least squares through equilibrated normal equations.

use alloc::string::ToString;
use alloc::vec::Vec;
use nalgebra::{DMatrix, DVector};
#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};

/// Minimizes `sum_i a_i (y_i - (M c)_i)^2 + sum_i b_i ((M E c)_i)^2` over `c`,
/// where `E = diag(scale)`; the penalty term is skipped when `penalty` is `None`.
pub fn weighted_least_squares(
    m: &DMatrix<f64>,
    a: &[f64],
    y: &[f64],
    penalty: Option<(&[f64], &[f64])>,
) -> Result<DVector<f64>> {
    let (rows, cols) = m.shape();
    let mut g = gram(m, a);
    let mut rhs = DVector::zeros(cols);
    for i in 0..rows {
        let w = a[i] * y[i];
        if w != 0.0 {
            for k in 0..cols {
                rhs[k] += w * m[(i, k)];
            }
        }
    }
    if let Some((b, scale)) = penalty {
        let h = gram(m, b);
        for j in 0..cols {
            for k in 0..cols {
                g[(j, k)] += scale[j] * h[(j, k)] * scale[k];
            }
        }
    }
    solve_spd(g, rhs)
}

fn gram(m: &DMatrix<f64>, w: &[f64]) -> DMatrix<f64> {
    let (rows, cols) = m.shape();
    let mut scaled = m.clone();
    for i in 0..rows {
        let s = w[i].max(0.0).sqrt();
        for k in 0..cols {
            scaled[(i, k)] *= s;
        }
    }
    scaled.tr_mul(&scaled)
}

/// Solves `G c = rhs` for symmetric positive semidefinite `G`, equilibrating
/// the diagonal and adding a small ridge if Cholesky fails.
pub fn solve_spd(mut g: DMatrix<f64>, mut rhs: DVector<f64>) -> Result<DVector<f64>> {
    let n = g.nrows();
    let d: Vec<f64> = (0..n)
        .map(|i| {
            let v = g[(i, i)];
            if v > 0.0 {
                1.0 / v.sqrt()
            } else {
                1.0
            }
        })
        .collect();
    for i in 0..n {
        for j in 0..n {
            g[(i, j)] *= d[i] * d[j];
        }
        rhs[i] *= d[i];
    }
    let mut ridge = 0.0;
    for _ in 0..8 {
        let mut trial = g.clone();
        for i in 0..n {
            trial[(i, i)] += ridge;
        }
        if let Some(chol) = trial.cholesky() {
            let mut c = chol.solve(&rhs);
            for i in 0..n {
                c[i] *= d[i];
            }
            if c.iter().all(|v| v.is_finite()) {
                return Ok(c);
            }
        }
        ridge = if ridge == 0.0 { 1e-14 } else { ridge * 100.0 };
    }
    Err(Error::Solver {
        solver: "normal equations",
        reason: "matrix not positive definite even after regularization".to_string(),
        history: Vec::new(),
    })
}

/// Solves a square system by LU with partial pivoting.
pub fn solve_square(m: DMatrix<f64>, rhs: DVector<f64>) -> Result<DVector<f64>> {
    m.lu().solve(&rhs).ok_or_else(|| Error::Solver {
        solver: "LU",
        reason: "singular matrix".to_string(),
        history: Vec::new(),
    })
}
