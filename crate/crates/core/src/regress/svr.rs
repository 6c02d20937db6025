//! Linear ε-insensitive support vector regression.
//!
//! The primal problem is
//!
//! ```text
//! minimize ½‖w‖² + C Σ max(0, |y_i − w·x_i − b| − ε)
//! ```
//!
//! It is solved in the dual, where `w = Σ β_i x_i`, `|β_i| ≤ C` and `Σ β_i = 0`.
//! Each epoch visits a seeded permutation of the rows and updates consecutive
//! pairs `(β_i, β_j) → (β_i + t, β_j − t)`, which keeps the equality constraint.
//! The step `t` minimizes the dual exactly along that direction. After each
//! epoch the bias is set to its exact primal minimizer for the current `w`, and
//! the primal objective is evaluated. The best primal iterate is kept, so the
//! recorded objective trace never increases.

use std::cmp::Ordering;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::normalize::Normalizer;
use crate::error::{Error, Result};
use crate::linalg::{dot, Matrix};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SvrParams {
    pub c: f64,
    pub epsilon: f64,
    /// Upper bound on solver epochs.
    pub epochs: usize,
    pub seed: u64,
}

impl Default for SvrParams {
    fn default() -> Self {
        SvrParams {
            c: 1.0,
            epsilon: 0.1,
            epochs: 200,
            seed: 0,
        }
    }
}

/// An epoch that lowers the dual objective by less than this fraction counts as stalled.
const STALL_TOLERANCE: f64 = 1e-10;
/// Two stalled epochs in a row end the solve.
const STALL_EPOCHS: usize = 2;
/// Smallest accepted decrease of the dual objective for one pair update.
const MIN_STEP_GAIN: f64 = 1e-15;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SvrModel {
    pub weights: Vec<f64>,
    pub bias: f64,
    pub params: SvrParams,
    pub normalized: bool,
    pub normalizer: Option<Normalizer>,
    /// Best primal objective after each epoch.
    pub trace: Vec<f64>,
}

impl SvrModel {
    pub fn predict_row(&self, row: &[f64]) -> f64 {
        match &self.normalizer {
            None => dot(&self.weights, row) + self.bias,
            Some(norm) => {
                let mut s = self.bias;
                for (((w, v), m), sd) in self
                    .weights
                    .iter()
                    .zip(row)
                    .zip(&norm.means)
                    .zip(&norm.stds)
                {
                    s += w * (v - m) / sd;
                }
                s
            }
        }
    }

    /// Primal objective of the fitted model on its (possibly normalized) training data.
    pub fn objective(&self) -> f64 {
        self.trace.last().copied().unwrap_or(f64::NAN)
    }
}

/// Primal objective `½‖w‖² + C Σ max(0, |y_i − w·x_i − b| − ε)`.
pub fn svr_objective(
    x: &Matrix,
    y: &[f64],
    weights: &[f64],
    bias: f64,
    c: f64,
    epsilon: f64,
) -> f64 {
    let reg = 0.5 * dot(weights, weights);
    let loss: f64 = x
        .iter_rows()
        .zip(y)
        .map(|(row, t)| ((t - dot(weights, row) - bias).abs() - epsilon).max(0.0))
        .sum();
    reg + c * loss
}

pub fn fit_svr(x: &Matrix, y: &[f64], params: &SvrParams, normalized: bool) -> Result<SvrModel> {
    if x.rows() == 0 {
        return Err(Error::DegenerateInput("SVR needs at least one row".into()));
    }
    if x.rows() != y.len() {
        return Err(Error::LengthMismatch {
            left: x.rows(),
            right: y.len(),
        });
    }
    if !(params.c > 0.0 && params.c.is_finite()) {
        return Err(Error::DegenerateInput(format!(
            "SVR penalty C must be positive, got {}",
            params.c
        )));
    }
    if !(params.epsilon >= 0.0 && params.epsilon.is_finite()) {
        return Err(Error::DegenerateInput(format!(
            "SVR epsilon must be non-negative, got {}",
            params.epsilon
        )));
    }
    let (normalizer, data) = if normalized {
        let norm = Normalizer::fit(x)?;
        let z = norm.apply(x)?;
        (Some(norm), z)
    } else {
        (None, x.clone())
    };
    let (weights, bias, trace) = solve(&data, y, params);
    Ok(SvrModel {
        weights,
        bias,
        params: *params,
        normalized,
        normalizer,
        trace,
    })
}

struct SparseRows {
    rows: Vec<Vec<(usize, f64)>>,
}

impl SparseRows {
    fn new(x: &Matrix) -> Self {
        let rows = x
            .iter_rows()
            .map(|r| {
                r.iter()
                    .copied()
                    .enumerate()
                    .filter(|(_, v)| *v != 0.0)
                    .collect()
            })
            .collect();
        SparseRows { rows }
    }

    fn dot_dense(&self, i: usize, w: &[f64]) -> f64 {
        self.rows[i].iter().map(|&(j, v)| w[j] * v).sum()
    }

    /// `‖x_i − x_j‖²`, computed directly from the merged entries.
    fn dist_sq(&self, i: usize, j: usize) -> f64 {
        let (a, b) = (&self.rows[i], &self.rows[j]);
        let (mut p, mut q, mut s) = (0, 0, 0.0);
        loop {
            let d = match (a.get(p), b.get(q)) {
                (Some(&(ja, va)), Some(&(jb, vb))) => match ja.cmp(&jb) {
                    Ordering::Equal => {
                        p += 1;
                        q += 1;
                        va - vb
                    }
                    Ordering::Less => {
                        p += 1;
                        va
                    }
                    Ordering::Greater => {
                        q += 1;
                        -vb
                    }
                },
                (Some(&(_, va)), None) => {
                    p += 1;
                    va
                }
                (None, Some(&(_, vb))) => {
                    q += 1;
                    -vb
                }
                (None, None) => break,
            };
            s += d * d;
        }
        s
    }

    fn axpy(&self, i: usize, t: f64, w: &mut [f64]) {
        for &(j, v) in &self.rows[i] {
            w[j] += t * v;
        }
    }
}

fn solve(x: &Matrix, y: &[f64], params: &SvrParams) -> (Vec<f64>, f64, Vec<f64>) {
    let n = x.rows();
    let (c, eps) = (params.c, params.epsilon);
    let data = SparseRows::new(x);
    let mut w = vec![0.0; x.cols()];
    let mut beta = vec![0.0; n];
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let mut order: Vec<usize> = (0..n).collect();

    let mut best_w = w.clone();
    let mut best_b = optimal_bias(&data, y, &w, eps);
    let mut best_obj = primal(&data, y, &w, best_b, c, eps);
    let mut trace = Vec::with_capacity(params.epochs);
    let mut dual = 0.0;
    let mut stalled = 0;

    for _ in 0..params.epochs {
        if n < 2 {
            trace.push(best_obj);
            break;
        }
        order.shuffle(&mut rng);
        let before = dual;
        for m in 0..n {
            let (i, j) = (order[m], order[(m + 1) % n]);
            if i == j {
                continue;
            }
            let g = (data.dot_dense(i, &w) - y[i]) - (data.dot_dense(j, &w) - y[j]);
            let a = data.dist_sq(i, j);
            let (t, gain) = pair_step(a, g, beta[i], beta[j], c, eps);
            if gain > MIN_STEP_GAIN {
                beta[i] += t;
                beta[j] -= t;
                data.axpy(i, t, &mut w);
                data.axpy(j, -t, &mut w);
                dual -= gain;
            }
        }
        let b = optimal_bias(&data, y, &w, eps);
        let obj = primal(&data, y, &w, b, c, eps);
        if obj < best_obj {
            best_obj = obj;
            best_w.clone_from(&w);
            best_b = b;
        }
        trace.push(best_obj);

        let decrease = before - dual;
        if decrease <= STALL_TOLERANCE * dual.abs().max(f64::MIN_POSITIVE) {
            stalled += 1;
            if stalled >= STALL_EPOCHS {
                break;
            }
        } else {
            stalled = 0;
        }
    }
    (best_w, best_b, trace)
}

/// Exact minimizer of the dual along `(β_i + t, β_j − t)`.
///
/// `φ(t) = ½ a t² + g t + ε(|β_i + t| + |β_j − t|)` on the box-feasible
/// interval. Returns the step and the decrease `φ(0) − φ(t)`.
fn pair_step(a: f64, g: f64, bi: f64, bj: f64, c: f64, eps: f64) -> (f64, f64) {
    let lo = (-c - bi).max(bj - c).min(0.0);
    let hi = (c - bi).min(bj + c).max(0.0);
    let phi = |t: f64| 0.5 * a * t * t + g * t + eps * ((bi + t).abs() + (bj - t).abs());
    let base = phi(0.0);
    let mut candidates = [0.0; 8];
    candidates[0] = lo;
    candidates[1] = hi;
    candidates[2] = -bi;
    candidates[3] = bj;
    let mut len = 4;
    if a > 0.0 {
        for (si, sj) in [(1.0, 1.0), (1.0, -1.0), (-1.0, 1.0), (-1.0, -1.0)] {
            candidates[len] = -(g + eps * (si - sj)) / a;
            len += 1;
        }
    }
    let mut best = (0.0, 0.0);
    for &t in &candidates[..len] {
        let t = t.clamp(lo, hi);
        if !t.is_finite() {
            continue;
        }
        let gain = base - phi(t);
        if gain > best.1 {
            best = (t, gain);
        }
    }
    best
}

/// The bias minimizing `Σ max(0, |r_i − b| − ε)` for residuals `r = y − Xw`.
///
/// The objective is piecewise linear in `b` with breakpoints `r_i ± ε`, and its
/// slope rises by one at each breakpoint from `−N`. It is flat between the N-th
/// and (N+1)-th smallest breakpoints; the midpoint of that range is returned.
fn optimal_bias(data: &SparseRows, y: &[f64], w: &[f64], eps: f64) -> f64 {
    let n = y.len();
    let mut points = Vec::with_capacity(2 * n);
    for (i, t) in y.iter().enumerate() {
        let r = t - data.dot_dense(i, w);
        points.push(r - eps);
        points.push(r + eps);
    }
    points.sort_unstable_by(f64::total_cmp);
    0.5 * (points[n - 1] + points[n])
}

fn primal(data: &SparseRows, y: &[f64], w: &[f64], b: f64, c: f64, eps: f64) -> f64 {
    let loss: f64 = y
        .iter()
        .enumerate()
        .map(|(i, t)| ((t - data.dot_dense(i, w) - b).abs() - eps).max(0.0))
        .sum();
    0.5 * dot(w, w) + c * loss
}
