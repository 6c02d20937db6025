//! Ordinary least squares with an intercept, via the normal equations.

use log::debug;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{dot, Matrix};

/// Diagonal jitter added when the Gram matrix is numerically singular.
pub const RIDGE_JITTER: f64 = 1e-8;

/// A pivot below this fraction of the largest Gram diagonal entry counts as singular.
const PIVOT_TOLERANCE: f64 = 1e-10;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LinearModel {
    pub weights: Vec<f64>,
    pub intercept: f64,
    /// Ridge term that was added to the Gram diagonal, 0 if none.
    pub ridge: f64,
}

impl LinearModel {
    pub fn predict_row(&self, row: &[f64]) -> f64 {
        dot(&self.weights, row) + self.intercept
    }
}

/// Minimize Σ (y − Xw − b)² by solving `[X 1]ᵀ[X 1] β = [X 1]ᵀ y` with a
/// Cholesky factorization. A singular system (collinear columns, or more
/// columns than rows) is solved again with [`RIDGE_JITTER`] on the diagonal.
pub fn fit_linear(x: &Matrix, y: &[f64]) -> Result<LinearModel> {
    if x.rows() == 0 {
        return Err(Error::DegenerateInput(
            "linear regression needs at least one row".into(),
        ));
    }
    if x.rows() != y.len() {
        return Err(Error::LengthMismatch {
            left: x.rows(),
            right: y.len(),
        });
    }
    let k = x.cols();
    let dim = k + 1;
    let mut gram = vec![0.0; dim * dim];
    let mut rhs = vec![0.0; dim];
    for (row, &target) in x.iter_rows().zip(y) {
        for i in 0..k {
            let xi = row[i];
            if xi == 0.0 {
                continue;
            }
            let g = &mut gram[i * dim..];
            for j in i..k {
                g[j] += xi * row[j];
            }
            g[k] += xi;
            rhs[i] += xi * target;
        }
        gram[k * dim + k] += 1.0;
        rhs[k] += target;
    }
    for i in 0..dim {
        for j in 0..i {
            gram[i * dim + j] = gram[j * dim + i];
        }
    }

    let max_diag = (0..dim).map(|i| gram[i * dim + i]).fold(0.0, f64::max);
    let (beta, ridge) = match cholesky_solve(&gram, &rhs, dim, PIVOT_TOLERANCE * max_diag) {
        Some(beta) => (beta, 0.0),
        None => {
            debug!(
                "Gram matrix is singular ({} rows, {k} features); adding ridge {RIDGE_JITTER:e}",
                x.rows()
            );
            let mut jittered = gram;
            for i in 0..dim {
                jittered[i * dim + i] += RIDGE_JITTER;
            }
            let beta = cholesky_solve(&jittered, &rhs, dim, 0.0).ok_or_else(|| {
                Error::Numerical("Gram matrix not positive definite after ridge jitter".into())
            })?;
            (beta, RIDGE_JITTER)
        }
    };
    if beta.iter().any(|b| !b.is_finite()) {
        return Err(Error::Numerical(
            "non-finite regression coefficients".into(),
        ));
    }
    let intercept = beta[k];
    let mut weights = beta;
    weights.truncate(k);
    Ok(LinearModel {
        weights,
        intercept,
        ridge,
    })
}

/// Solve `A x = b` for symmetric positive definite `A` (row-major, `n × n`).
/// Returns `None` when a pivot is not above `min_pivot`.
fn cholesky_solve(a: &[f64], b: &[f64], n: usize, min_pivot: f64) -> Option<Vec<f64>> {
    let mut l = vec![0.0; n * n];
    for j in 0..n {
        let mut d = a[j * n + j];
        for p in 0..j {
            d -= l[j * n + p] * l[j * n + p];
        }
        if d.is_nan() || d <= min_pivot || d <= 0.0 {
            return None;
        }
        let d = d.sqrt();
        l[j * n + j] = d;
        for i in j + 1..n {
            let mut s = a[i * n + j];
            for p in 0..j {
                s -= l[i * n + p] * l[j * n + p];
            }
            l[i * n + j] = s / d;
        }
    }
    // L z = b
    let mut z = vec![0.0; n];
    for i in 0..n {
        let mut s = b[i];
        for p in 0..i {
            s -= l[i * n + p] * z[p];
        }
        z[i] = s / l[i * n + i];
    }
    // Lᵀ x = z
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let mut s = z[i];
        for p in i + 1..n {
            s -= l[p * n + i] * x[p];
        }
        x[i] = s / l[i * n + i];
    }
    Some(x)
}
