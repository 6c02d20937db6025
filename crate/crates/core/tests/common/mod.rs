//! Independent reference implementations used to check the library.

#![allow(dead_code, clippy::needless_range_loop)]

use std::collections::{BTreeMap, HashMap};
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use starforge::corpus::{build_corpus, Corpus, Selection};
use starforge::features::FeatureMatrix;
use starforge::linalg::Matrix;
use starforge::regress::{Node, TreeModel};
use starforge::synth::{generate, SynthSpec};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_matrix(rng: &mut ChaCha8Rng, n: usize, k: usize, lo: f64, hi: f64) -> Matrix {
    let data = (0..n * k).map(|_| rng.random_range(lo..hi)).collect();
    Matrix::new(n, k, data).unwrap()
}

/// Least squares with intercept: `[w_1..w_K, b]` from `(ZᵀZ) β = Zᵀy`, `Z = [X 1]`,
/// solved by Gaussian elimination with partial pivoting.
pub fn ols_oracle(x: &Matrix, y: &[f64]) -> Vec<f64> {
    let (n, k) = (x.rows(), x.cols());
    let d = k + 1;
    let z = |i: usize, j: usize| if j == k { 1.0 } else { x.get(i, j) };
    let mut a = vec![vec![0.0; d + 1]; d];
    for r in 0..d {
        for c in 0..d {
            a[r][c] = (0..n).map(|i| z(i, r) * z(i, c)).sum();
        }
        a[r][d] = (0..n).map(|i| z(i, r) * y[i]).sum();
    }
    for col in 0..d {
        let pivot = (col..d)
            .max_by(|&p, &q| a[p][col].abs().total_cmp(&a[q][col].abs()))
            .unwrap();
        a.swap(col, pivot);
        for r in 0..d {
            if r != col {
                let f = a[r][col] / a[col][col];
                for c in col..=d {
                    a[r][c] -= f * a[col][c];
                }
            }
        }
    }
    (0..d).map(|r| a[r][d] / a[r][r]).collect()
}

#[derive(Debug, PartialEq)]
pub enum OracleTree {
    Leaf(f64),
    Split {
        feature: usize,
        threshold: f64,
        left: Box<OracleTree>,
        right: Box<OracleTree>,
    },
}

fn sse(values: &[f64]) -> f64 {
    if values.is_empty() {
        return 0.0;
    }
    let mean = values.iter().sum::<f64>() / values.len() as f64;
    values.iter().map(|v| (v - mean).powi(2)).sum()
}

/// Greedy CART by enumerating every (feature, midpoint) pair and computing the
/// child sums of squares directly.
pub fn tree_oracle(
    x: &Matrix,
    y: &[f64],
    rows: &[usize],
    depth: usize,
    max_depth: usize,
    min_leaf: usize,
) -> OracleTree {
    let ys: Vec<f64> = rows.iter().map(|&i| y[i]).collect();
    let mean = ys.iter().sum::<f64>() / ys.len() as f64;
    if depth == max_depth || rows.len() < 2 * min_leaf {
        return OracleTree::Leaf(mean);
    }
    let parent = sse(&ys);
    let mut best: Option<(f64, usize, f64)> = None;
    for f in 0..x.cols() {
        let mut values: Vec<f64> = rows.iter().map(|&i| x.get(i, f)).collect();
        values.sort_by(f64::total_cmp);
        values.dedup();
        for pair in values.windows(2) {
            let t = (pair[0] + pair[1]) / 2.0;
            let (l, r): (Vec<usize>, Vec<usize>) = rows.iter().partition(|&&i| x.get(i, f) <= t);
            if l.len() < min_leaf || r.len() < min_leaf {
                continue;
            }
            let yl: Vec<f64> = l.iter().map(|&i| y[i]).collect();
            let yr: Vec<f64> = r.iter().map(|&i| y[i]).collect();
            let red = parent - sse(&yl) - sse(&yr);
            let better = match best {
                None => red > 1e-9 * parent,
                Some((b, _, _)) => red > b * (1.0 + 1e-9),
            };
            if better {
                best = Some((red, f, t));
            }
        }
    }
    let Some((_, feature, threshold)) = best else {
        return OracleTree::Leaf(mean);
    };
    let (l, r): (Vec<usize>, Vec<usize>) =
        rows.iter().partition(|&&i| x.get(i, feature) <= threshold);
    OracleTree::Split {
        feature,
        threshold,
        left: Box::new(tree_oracle(x, y, &l, depth + 1, max_depth, min_leaf)),
        right: Box::new(tree_oracle(x, y, &r, depth + 1, max_depth, min_leaf)),
    }
}

/// Node-for-node comparison; thresholds and leaf values within `tol`.
pub fn same_tree(model: &TreeModel, at: usize, oracle: &OracleTree, tol: f64) -> bool {
    match (&model.nodes[at], oracle) {
        (Node::Leaf { value, .. }, OracleTree::Leaf(v)) => (value - v).abs() <= tol,
        (
            Node::Split {
                feature,
                threshold,
                left,
                right,
                ..
            },
            OracleTree::Split {
                feature: f,
                threshold: t,
                left: ol,
                right: or,
            },
        ) => {
            feature == f
                && (threshold - t).abs() <= tol * t.abs().max(1.0)
                && same_tree(model, *left, ol, tol)
                && same_tree(model, *right, or, tol)
        }
        _ => false,
    }
}

pub fn svr_primal(x: &Matrix, y: &[f64], w: &[f64], b: f64, c: f64, eps: f64) -> f64 {
    let reg: f64 = 0.5 * w.iter().map(|v| v * v).sum::<f64>();
    let loss: f64 = (0..x.rows())
        .map(|i| {
            let f: f64 = x.row(i).iter().zip(w).map(|(a, b)| a * b).sum::<f64>() + b;
            ((y[i] - f).abs() - eps).max(0.0)
        })
        .sum();
    reg + c * loss
}

/// Projected gradient descent on the standard (α, α*) dual of ε-SVR, then
/// the bias by scanning every breakpoint. Returns the primal objective.
pub fn svr_oracle_objective(x: &Matrix, y: &[f64], c: f64, eps: f64, iterations: usize) -> f64 {
    let n = x.rows();
    let kernel: Vec<Vec<f64>> = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| x.row(i).iter().zip(x.row(j)).map(|(a, b)| a * b).sum())
                .collect()
        })
        .collect();
    let trace: f64 = (0..n).map(|i| kernel[i][i]).sum();
    let step = 1.0 / (2.0 * trace).max(1e-12);
    let mut a = vec![0.0; n];
    let mut a_star = vec![0.0; n];
    for _ in 0..iterations {
        let beta: Vec<f64> = (0..n).map(|i| a[i] - a_star[i]).collect();
        let kb: Vec<f64> = (0..n)
            .map(|i| (0..n).map(|j| kernel[i][j] * beta[j]).sum())
            .collect();
        let u: Vec<f64> = (0..n).map(|i| a[i] - step * (kb[i] + eps - y[i])).collect();
        let v: Vec<f64> = (0..n)
            .map(|i| a_star[i] - step * (-kb[i] + eps + y[i]))
            .collect();
        // Project onto the box and Σα = Σα*.
        let clip = |z: f64| z.clamp(0.0, c);
        let gap = |lam: f64| -> f64 {
            u.iter().map(|&z| clip(z - lam)).sum::<f64>()
                - v.iter().map(|&z| clip(z + lam)).sum::<f64>()
        };
        let span = u.iter().chain(&v).fold(0.0f64, |m, z| m.max(z.abs())) + c + 1.0;
        let (mut lo, mut hi) = (-span, span);
        for _ in 0..80 {
            let mid = 0.5 * (lo + hi);
            if gap(mid) > 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let lam = 0.5 * (lo + hi);
        a = u.iter().map(|&z| clip(z - lam)).collect();
        a_star = v.iter().map(|&z| clip(z + lam)).collect();
    }
    let k = x.cols();
    let mut w = vec![0.0; k];
    for i in 0..n {
        for j in 0..k {
            w[j] += (a[i] - a_star[i]) * x.get(i, j);
        }
    }
    let mut best = f64::INFINITY;
    for i in 0..n {
        let r = y[i] - x.row(i).iter().zip(&w).map(|(p, q)| p * q).sum::<f64>();
        for b in [r - eps, r + eps] {
            best = best.min(svr_primal(x, y, &w, b, c, eps));
        }
    }
    best
}

/// Top-`k` by sorting every term: count descending, then term ascending.
pub fn top_k_oracle(counts: &HashMap<String, u64>, k: usize) -> Vec<(String, u64)> {
    let mut all: Vec<(String, u64)> = counts
        .iter()
        .filter(|(_, &c)| c > 0)
        .map(|(t, &c)| (t.clone(), c))
        .collect();
    all.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    all.truncate(k);
    all
}

pub fn random_counts(
    rng: &mut ChaCha8Rng,
    max_terms: usize,
    max_count: u64,
) -> HashMap<String, u64> {
    let terms = rng.random_range(0..=max_terms);
    (0..terms)
        .map(|_| {
            let len = rng.random_range(1..=3);
            let term: String = (0..len)
                .map(|_| (b'a' + rng.random_range(0..6u8)) as char)
                .collect();
            (term, rng.random_range(1..=max_count))
        })
        .collect::<BTreeMap<_, _>>()
        .into_iter()
        .collect()
}

/// Generate a synthetic dataset under `dir` and ingest all of it.
pub fn synth_corpus(spec: &SynthSpec, dir: &Path) -> Corpus {
    let files = generate(spec, dir).unwrap();
    build_corpus(&files.business, &files.review, &Selection::all())
        .unwrap()
        .0
}

/// Vocabulary column of the planted word with the largest absolute weight.
pub fn strongest_planted_column(spec: &SynthSpec, m: &FeatureMatrix) -> usize {
    m.vocabulary
        .term_names()
        .enumerate()
        .max_by(|a, b| {
            let w = |t: &str| spec.planted_weights.get(t).map_or(0.0, |v| v.abs());
            w(a.1).total_cmp(&w(b.1)).then(b.0.cmp(&a.0))
        })
        .map(|(j, _)| j)
        .expect("non-empty vocabulary")
}
